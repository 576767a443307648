//! Robust estimation of `(sigma_eta^2, sigma_nu^2, phi)` from lag differences.
//!
//! For lag `k` the differences `z^k_t = y_{t+k} - y_t` have variance
//! `k sigma_eta^2 + 2 (1 - phi^k) / (1 - phi^2) sigma_nu^2` away from
//! changes. Each variance is estimated by a squared MAD, and the parameters
//! are fitted by nonnegative least squares on a grid of `phi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{ModelParams, ModelVariant};

/// Gaussian consistency constant for the MAD.
pub const MAD_SCALE: f64 = 1.4826;

/// Default largest lag.
pub const DEFAULT_MAX_LAG: usize = 15;

/// Lower bound on a fitted `sigma_nu^2`, relative to the largest `v_k`.
pub const SIGMA_NU_SQ_FLOOR: f64 = 1e-8;

/// `y_{t+k} - y_t` for `t = 1..n-k`.
pub fn lag_differences(y: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= y.len() {
        return Err(Error::invalid_parameter(format!(
            "lag must satisfy 1 <= k < n = {}, got {k}",
            y.len()
        )));
    }
    Ok(y.iter().zip(&y[k..]).map(|(a, b)| b - a).collect())
}

/// Median with the two central order statistics averaged for even lengths.
/// Reorders `x`.
fn median_in_place(x: &mut [f64]) -> f64 {
    let n = x.len();
    let mid = n / 2;
    let (lower, upper, _) = x.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// `(1.4826 * median |x_i - median(x)|)^2`.
pub fn mad_variance(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid_parameter("MAD of an empty vector"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_data("non-finite value in MAD input"));
    }
    let mut buf = x.to_vec();
    let centre = median_in_place(&mut buf);
    for (b, v) in buf.iter_mut().zip(x) {
        *b = (v - centre).abs();
    }
    Ok((MAD_SCALE * median_in_place(&mut buf)).powi(2))
}

/// Robust variances `v_1..v_K` of the lag differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagVarianceProfile {
    v: Vec<f64>,
}

impl LagVarianceProfile {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::invalid_parameter("need at least two lags"));
        }
        if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid_parameter("lag variances must be finite and >= 0"));
        }
        Ok(Self { v })
    }

    pub fn from_series(y: &[f64], max_lag: usize) -> Result<Self> {
        if max_lag < 2 {
            return Err(Error::invalid_parameter(format!("need K >= 2, got {max_lag}")));
        }
        if max_lag >= y.len() {
            return Err(Error::invalid_parameter(format!(
                "need K < n, got K = {max_lag} with n = {}",
                y.len()
            )));
        }
        let v = (1..=max_lag)
            .map(|k| mad_variance(&lag_differences(y, k)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(v)
    }

    pub fn max_lag(&self) -> usize {
        self.v.len()
    }

    pub fn variances(&self) -> &[f64] {
        &self.v
    }

    /// `S_phi` at the given parameters.
    pub fn objective(&self, sigma_eta_sq: f64, sigma_nu_sq: f64, phi: f64) -> f64 {
        self.v
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = i + 1;
                (k as f64 * sigma_eta_sq + ar_lag_weight(phi, k) * sigma_nu_sq - v).powi(2)
            })
            .sum()
    }
}

/// `2 (1 - phi^k) / (1 - phi^2)`, the AR contribution to lag-`k` variance.
pub fn ar_lag_weight(phi: f64, k: usize) -> f64 {
    2.0 * (1.0 - phi.powi(k as i32)) / (1.0 - phi * phi)
}

/// Candidate values of `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGrid {
    values: Vec<f64>,
    step: f64,
}

impl Default for PhiGrid {
    /// `0, 0.01, ..., 0.99`.
    fn default() -> Self {
        Self::with_resolution(100)
    }
}

impl PhiGrid {
    /// `i / divisions` for `i = 0..divisions`.
    pub fn with_resolution(divisions: u32) -> Self {
        let d = divisions.max(1);
        Self {
            values: (0..d).map(|i| i as f64 / d as f64).collect(),
            step: 1.0 / d as f64,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty()
            || values.iter().any(|v| !(0.0..1.0).contains(v))
            || values.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::invalid_parameter(
                "phi grid must be non-empty, increasing and within [0, 1)",
            ));
        }
        let step = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(Self {
            step: if step.is_finite() { step } else { 0.0 },
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    pub params: ModelParams,
    /// `S_phi` at the returned parameters.
    pub residual: f64,
    pub phi_grid_step: f64,
}

impl EstimatedParams {
    /// No random-walk component was found, so the AR-only solver applies.
    pub fn ar_only(&self) -> bool {
        self.params.sigma_eta_sq == 0.0
    }

    pub fn suggested_variant(&self) -> ModelVariant {
        match (self.params.sigma_eta_sq > 0.0, self.params.phi > 0.0) {
            (true, true) => ModelVariant::RwAr,
            (true, false) => ModelVariant::RwOnly,
            (false, true) => ModelVariant::ArOnly,
            (false, false) => ModelVariant::Iid,
        }
    }
}

/// Nonnegative least squares of `v` on the columns `k` and `w_k` at one
/// `phi`, returning `(sigma_eta_sq, sigma_nu_sq, S)`.
fn fit_at_phi(v: &[f64], phi: f64, random_walk: bool) -> (f64, f64, f64) {
    let (mut saa, mut sab, mut sbb, mut sav, mut sbv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &vk) in v.iter().enumerate() {
        let a = (i + 1) as f64;
        let b = ar_lag_weight(phi, i + 1);
        saa += a * a;
        sab += a * b;
        sbb += b * b;
        sav += a * vk;
        sbv += b * vk;
    }
    let sse = |eta: f64, nu: f64| -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, vk)| ((i + 1) as f64 * eta + ar_lag_weight(phi, i + 1) * nu - vk).powi(2))
            .sum()
    };
    let nu_only = (sbv / sbb).max(0.0);
    if !random_walk {
        return (0.0, nu_only, sse(0.0, nu_only));
    }
    let det = saa * sbb - sab * sab;
    if det > 0.0 {
        let eta = (sav * sbb - sbv * sab) / det;
        let nu = (saa * sbv - sab * sav) / det;
        if eta >= 0.0 && nu >= 0.0 {
            return (eta, nu, sse(eta, nu));
        }
    }
    let eta_only = (sav / saa).max(0.0);
    let (s_nu, s_eta) = (sse(0.0, nu_only), sse(eta_only, 0.0));
    if s_nu <= s_eta {
        (0.0, nu_only, s_nu)
    } else {
        (eta_only, 0.0, s_eta)
    }
}

/// Grid search over `phi` with closed-form NNLS in the two variances.
/// `RwOnly` and `Iid` fix `phi = 0`; `ArOnly` and `Iid` fix
/// `sigma_eta^2 = 0`. Ties go to the smallest `phi`.
pub fn fit_parameters(
    profile: &LagVarianceProfile,
    variant: ModelVariant,
    grid: &PhiGrid,
) -> Result<EstimatedParams> {
    let v = profile.variances();
    let vmax = v.iter().copied().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Err(Error::DegenerateData(
            "all lag variances are zero; the series has no noise".into(),
        ));
    }
    let phis: &[f64] = if variant.has_autocorrelation() { grid.values() } else { &[0.0] };
    let tie_tol = 1e-12 * v.iter().map(|x| x * x).sum::<f64>();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &phi in phis {
        let (eta, nu, s) = fit_at_phi(v, phi, variant.has_random_walk());
        if best.map_or(true, |b| s < b.3 - tie_tol) {
            best = Some((phi, eta, nu, s));
        }
    }
    let (phi, eta, nu, _) = best.expect("grid is non-empty");
    let nu = nu.max(SIGMA_NU_SQ_FLOOR * vmax);
    Ok(EstimatedParams {
        params: ModelParams::new(eta, nu, phi)?,
        residual: profile.objective(eta, nu, phi),
        phi_grid_step: if variant.has_autocorrelation() { grid.step() } else { 0.0 },
    })
}

/// Lag profile with `max_lag` lags and fit on the default `phi` grid.
pub fn estimate(y: &[f64], max_lag: usize, variant: ModelVariant) -> Result<EstimatedParams> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_data("series contains non-finite values"));
    }
    let profile = LagVarianceProfile::from_series(y, max_lag)?;
    fit_parameters(&profile, variant, &PhiGrid::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{generate, DriftSpec, NoiseSpec, ScenarioKind, ScenarioSpec};
    use approx::assert_abs_diff_eq;

    fn exact_profile(eta: f64, nu: f64, phi: f64, k_max: usize) -> LagVarianceProfile {
        LagVarianceProfile::new(
            (1..=k_max)
                .map(|k| k as f64 * eta + ar_lag_weight(phi, k) * nu)
                .collect(),
        )
        .unwrap()
    }

    fn median(mut x: Vec<f64>) -> f64 {
        median_in_place(&mut x)
    }

    fn series(n: usize, eta: f64, nu: f64, phi: f64, seed: u64) -> Vec<f64> {
        generate(&ScenarioSpec {
            kind: ScenarioKind::None,
            n,
            change_size: 0.0,
            noise: NoiseSpec::Ar1 { phi, sigma_nu: nu },
            drift: DriftSpec::RandomWalk { sigma_eta: eta },
            seed,
        })
        .unwrap()
        .y
    }

    #[test]
    fn lag_difference_examples() {
        assert_eq!(lag_differences(&[1.0, 2.0, 4.0], 1).unwrap(), vec![1.0, 2.0]);
        assert_eq!(lag_differences(&[1.0, 2.0, 4.0], 2).unwrap(), vec![3.0]);
        assert_eq!(lag_differences(&[3.0; 5], 2).unwrap(), vec![0.0; 3]);
        assert!(lag_differences(&[1.0, 2.0], 2).is_err());
        assert!(lag_differences(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(vec![7.0]), 7.0);
    }

    #[test]
    fn mad_examples() {
        assert_eq!(mad_variance(&[2.5; 4]).unwrap(), 0.0);
        assert_abs_diff_eq!(mad_variance(&[-1.0, -1.0, 1.0, 1.0]).unwrap(), 2.198_102_76, epsilon = 1e-8);
        assert!(mad_variance(&[]).is_err());
    }

    #[test]
    fn mad_is_consistent_for_gaussian() {
        let x = series(100_000, 0.0, 1.5, 0.0, 11);
        assert!((mad_variance(&x).unwrap() / 2.25 - 1.0).abs() <= 0.02);
    }

    #[test]
    fn noiseless_white_noise_plus_walk() {
        let v = (1..=15).map(|k| k as f64 + 8.0).collect();
        let fit = fit_parameters(&LagVarianceProfile::new(v).unwrap(), ModelVariant::RwAr, &PhiGrid::default()).unwrap();
        assert_abs_diff_eq!(fit.params.sigma_eta_sq, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.params.sigma_nu_sq, 4.0, epsilon = 1e-9);
        assert_eq!(fit.params.phi, 0.0);
        assert!(fit.residual <= 1e-12);
    }

    #[test]
    fn constant_profile() {
        let fit = fit_parameters(&LagVarianceProfile::new(vec![3.0; 15]).unwrap(), ModelVariant::RwAr, &PhiGrid::default()).unwrap();
        assert_eq!(fit.params.sigma_eta_sq, 0.0);
        assert_abs_diff_eq!(fit.params.sigma_nu_sq, 1.5, epsilon = 1e-12);
        assert_eq!(fit.params.phi, 0.0);
        assert!(fit.residual <= 1e-20);
        assert!(fit.ar_only());
        assert_eq!(fit.suggested_variant(), ModelVariant::Iid);
    }

    #[test]
    fn noiseless_recovery_on_grid() {
        let grid = PhiGrid::default();
        for &(eta, nu, i) in &[(0.0, 4.0, 50), (1.0, 1.0, 30), (0.5, 2.0, 0), (0.2, 1.0, 90), (2.0, 0.5, 71)] {
            let phi = grid.values()[i];
            let fit = fit_parameters(&exact_profile(eta, nu, phi, 15), ModelVariant::RwAr, &grid).unwrap();
            assert_eq!(fit.params.phi, phi, "({eta}, {nu}, {phi})");
            assert_abs_diff_eq!(fit.params.sigma_eta_sq, eta, epsilon = 1e-6);
            assert_abs_diff_eq!(fit.params.sigma_nu_sq, nu, epsilon = 1e-6);
            assert!(fit.residual <= 1e-8);
        }
    }

    #[test]
    fn returned_phi_minimises_over_grid() {
        let profile = LagVarianceProfile::from_series(&series(3000, 0.3, 1.0, 0.4, 5), 15).unwrap();
        let grid = PhiGrid::default();
        let fit = fit_parameters(&profile, ModelVariant::RwAr, &grid).unwrap();
        for &phi in grid.values() {
            let (_, _, s) = fit_at_phi(profile.variances(), phi, true);
            assert!(fit.residual <= s + 1e-9 * (1.0 + s), "phi {phi}: {} > {s}", fit.residual);
        }
    }

    #[test]
    fn variant_restrictions() {
        let profile = exact_profile(0.5, 1.0, 0.6, 10);
        let grid = PhiGrid::default();
        let rw = fit_parameters(&profile, ModelVariant::RwOnly, &grid).unwrap();
        assert_eq!(rw.params.phi, 0.0);
        let ar = fit_parameters(&profile, ModelVariant::ArOnly, &grid).unwrap();
        assert_eq!(ar.params.sigma_eta_sq, 0.0);
        let iid = fit_parameters(&profile, ModelVariant::Iid, &grid).unwrap();
        assert_eq!((iid.params.phi, iid.params.sigma_eta_sq), (0.0, 0.0));
        let mean = profile.variances().iter().sum::<f64>() / 10.0;
        assert_abs_diff_eq!(iid.params.sigma_nu_sq, mean / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pure_walk_profile_keeps_positive_noise() {
        let v = (1..=10).map(|k| k as f64).collect();
        let fit = fit_parameters(&LagVarianceProfile::new(v).unwrap(), ModelVariant::RwAr, &PhiGrid::default()).unwrap();
        assert!(fit.params.sigma_nu_sq > 0.0);
        assert!(fit.params.validate().is_ok());
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(estimate(&[1.0; 50], 15, ModelVariant::RwAr), Err(Error::DegenerateData(_))));
        assert!(matches!(estimate(&[1.0, 2.0, 3.0], 3, ModelVariant::RwAr), Err(Error::InvalidParameter(_))));
        assert!(estimate(&[1.0, 2.0, 3.0], 1, ModelVariant::RwAr).is_err());
        assert!(LagVarianceProfile::new(vec![1.0]).is_err());
        assert!(LagVarianceProfile::new(vec![1.0, -1.0]).is_err());
        assert!(PhiGrid::from_values(vec![0.5, 0.2]).is_err());
        assert!(PhiGrid::from_values(vec![1.0]).is_err());
    }

    #[test]
    fn iid_noise_recovered() {
        let fits: Vec<_> = (0..200)
            .map(|r| estimate(&series(5000, 0.0, 2.0, 0.0, 1000 + r), 15, ModelVariant::RwAr).unwrap().params)
            .collect();
        let phi = median(fits.iter().map(|p| p.phi.abs()).collect());
        let nu = median(fits.iter().map(|p| (p.sigma_nu_sq - 4.0).abs() / 4.0).collect());
        let eta = median(fits.iter().map(|p| p.sigma_eta_sq / 4.0).collect());
        assert!(phi <= 0.15, "phi {phi}");
        assert!(nu <= 0.15, "sigma_nu^2 {nu}");
        assert!(eta <= 0.15, "sigma_eta^2 {eta}");
    }

    #[test]
    fn robust_to_level_shifts() {
        let clean = series(5000, 0.0, 1.0, 0.3, 77);
        let mut shifted = clean.clone();
        for (i, y) in shifted.iter_mut().enumerate() {
            *y += 10.0 * (i * 6 / 5000) as f64;
        }
        let a = LagVarianceProfile::from_series(&clean, 15).unwrap();
        let b = LagVarianceProfile::from_series(&shifted, 15).unwrap();
        for (va, vb) in a.variances().iter().zip(b.variances()) {
            assert!((vb / va - 1.0).abs() <= 0.25, "{va} vs {vb}");
        }
    }
}
