//! Exact minimisation of the penalised random-walk + AR(1) cost by functional
//! pruning.
//!
//! The cost of a mean path `mu` with jumps `delta` is
//!
//! ```text
//! (1 - phi^2) gamma (y_1 - mu_1)^2
//!   + sum_{t>=2} [ lambda (mu_t - mu_{t-1} - delta_t)^2
//!                  + gamma ((y_t - mu_t) - phi (y_{t-1} - mu_{t-1}))^2
//!                  + beta 1{delta_t != 0} ]
//! ```
//!
//! with `lambda = 1/sigma_eta^2` and `gamma = 1/sigma_nu^2`. `Q_t(mu)`, the
//! best cost of `y_1..y_t` given `mu_t = mu`, is kept as a
//! [`PiecewiseQuadratic`] and updated with two infimal convolutions per step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwq::{PiecewiseQuadratic, Quadratic, SearchBox};

/// Largest negative curvature tolerated after the AR shift before clamping.
const SHIFT_CURVATURE_TOL: f64 = 1e-9;

/// Noise and drift parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Random-walk increment variance; `0` means a constant mean between changes.
    pub sigma_eta_sq: f64,
    /// AR(1) innovation variance.
    pub sigma_nu_sq: f64,
    /// AR(1) coefficient in `[0, 1)`.
    pub phi: f64,
}

impl ModelParams {
    pub fn new(sigma_eta_sq: f64, sigma_nu_sq: f64, phi: f64) -> Result<Self> {
        let p = Self {
            sigma_eta_sq,
            sigma_nu_sq,
            phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eta_sq >= 0.0 && self.sigma_eta_sq.is_finite()) {
            return Err(Error::invalid_parameter(format!(
                "sigma_eta_sq must be finite and >= 0, got {}",
                self.sigma_eta_sq
            )));
        }
        if !(self.sigma_nu_sq > 0.0 && self.sigma_nu_sq.is_finite()) {
            return Err(Error::invalid_parameter(format!(
                "sigma_nu_sq must be finite and > 0, got {}",
                self.sigma_nu_sq
            )));
        }
        if !(0.0..1.0).contains(&self.phi) {
            return Err(Error::invalid_parameter(format!(
                "phi must lie in [0, 1), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Random-walk precision, infinite when there is no random walk.
    pub fn lambda(&self) -> f64 {
        if self.sigma_eta_sq == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.sigma_eta_sq
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.sigma_nu_sq
    }

    /// The most specific variant these parameters belong to.
    pub fn variant(&self) -> ModelVariant {
        match (self.sigma_eta_sq == 0.0, self.phi == 0.0) {
            (true, true) => ModelVariant::Iid,
            (true, false) => ModelVariant::ArOnly,
            (false, true) => ModelVariant::RwOnly,
            (false, false) => ModelVariant::RwAr,
        }
    }
}

/// Which components of the model are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Random walk plus AR(1) noise.
    #[default]
    RwAr,
    /// Constant mean between changes, AR(1) noise.
    ArOnly,
    /// Random walk plus independent noise.
    RwOnly,
    /// Constant mean between changes, independent noise.
    Iid,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [Self::RwAr, Self::ArOnly, Self::RwOnly, Self::Iid];

    pub fn has_random_walk(self) -> bool {
        matches!(self, Self::RwAr | Self::RwOnly)
    }

    pub fn has_autocorrelation(self) -> bool {
        matches!(self, Self::RwAr | Self::ArOnly)
    }

    /// Whether `params` respect the restrictions of this variant.
    pub fn admits(self, params: &ModelParams) -> bool {
        (self.has_random_walk() || params.sigma_eta_sq == 0.0)
            && (self.has_autocorrelation() || params.phi == 0.0)
    }

    /// Zeroes the components this variant switches off.
    pub fn restrict(self, params: ModelParams) -> ModelParams {
        ModelParams {
            sigma_eta_sq: if self.has_random_walk() { params.sigma_eta_sq } else { 0.0 },
            sigma_nu_sq: params.sigma_nu_sq,
            phi: if self.has_autocorrelation() { params.phi } else { 0.0 },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RwAr => "rw-ar",
            Self::ArOnly => "ar-only",
            Self::RwOnly => "rw-only",
            Self::Iid => "iid",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::invalid_parameter(format!("unknown model variant '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Penalty per changepoint. `f64::INFINITY` forbids changes.
    pub beta: f64,
    pub variant: ModelVariant,
    /// Radius of the box used to pin down flat minima; `None` uses
    /// `3 (range(y) + 1)`.
    pub search_box_radius: Option<f64>,
}

impl SolverConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            variant: ModelVariant::RwAr,
            search_box_radius: None,
        }
    }

    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_search_box_radius(mut self, radius: f64) -> Self {
        self.search_box_radius = Some(radius);
        self
    }

    fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::invalid_parameter(format!(
                "penalty must be > 0, got {}",
                self.beta
            )));
        }
        if let Some(r) = self.search_box_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid_parameter(format!(
                    "search box radius must be finite and > 0, got {r}"
                )));
            }
        }
        if !self.variant.admits(params) {
            return Err(Error::invalid_parameter(format!(
                "variant {} does not admit sigma_eta_sq = {}, phi = {}",
                self.variant, params.sigma_eta_sq, params.phi
            )));
        }
        Ok(())
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// 1-based indices `tau` such that the new regime starts at `tau + 1`.
    pub changepoints: Vec<usize>,
    /// Estimated mean `mu_1..mu_n`.
    pub signal: Vec<f64>,
    /// Optimal penalised cost.
    pub cost: f64,
    /// Largest number of pieces held by any `Q_t`.
    pub max_pieces: usize,
}

impl Segmentation {
    pub fn m(&self) -> usize {
        self.changepoints.len()
    }
}

/// `Q_1(mu) = (1 - phi^2) gamma (y_1 - mu)^2`.
pub fn initial_cost(y1: f64, params: &ModelParams) -> PiecewiseQuadratic {
    let w = (1.0 - params.phi * params.phi) * params.gamma();
    Quadratic::weighted_square(w, y1).into()
}

/// One step of the recursion: builds `Q_t` from `Q_{t-1}`.
pub fn update_step(
    q_prev: &PiecewiseQuadratic,
    y_t: f64,
    y_prev: f64,
    params: &ModelParams,
    beta: f64,
) -> Result<PiecewiseQuadratic> {
    let (gamma, phi, lambda) = (params.gamma(), params.phi, params.lambda());
    let z = y_t - phi * y_prev;
    // gamma / (1 - phi) * (z - (1 - phi) mu)^2
    let fit = Quadratic::new(gamma * (1.0 - phi), -2.0 * gamma * z, gamma * z * z / (1.0 - phi));

    let shifted = if phi > 0.0 {
        let w = gamma * phi * (1.0 - phi);
        q_prev
            .add_quadratic(-Quadratic::weighted_square(w, z / (1.0 - phi)))
            .clamp_curvature(SHIFT_CURVATURE_TOL)?
    } else {
        q_prev.clone()
    };

    let same = if lambda.is_infinite() {
        // u = mu: the AR residual is gamma (z - (1 - phi) mu)^2
        q_prev.add_quadratic(Quadratic::weighted_square(gamma * (1.0 - phi) * (1.0 - phi), z / (1.0 - phi)))
    } else {
        shifted.infimal_convolution(gamma * phi + lambda)?.add_quadratic(fit)
    };
    if beta.is_infinite() {
        return Ok(same);
    }
    let changed = shifted
        .infimal_convolution(gamma * phi)?
        .add_quadratic(fit + Quadratic::constant(beta));
    Ok(same.min_of_two(&changed))
}

fn validate_data(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid_data(format!(
            "non-finite value {} at index {i}",
            y[i]
        )));
    }
    Ok(())
}

/// Exact minimiser of the penalised cost.
pub fn solve(y: &[f64], params: &ModelParams, config: &SolverConfig) -> Result<Segmentation> {
    validate_data(y)?;
    params.validate()?;
    config.validate(params)?;
    let search = match config.search_box_radius {
        Some(r) => SearchBox::with_radius(y, r),
        None => SearchBox::around(y),
    };
    let n = y.len();

    // Each Q_t is stored shifted so that its minimum is zero.
    let mut costs: Vec<PiecewiseQuadratic> = Vec::with_capacity(n);
    costs.push(initial_cost(y[0], params));
    let mut offset = 0.0;
    let mut max_pieces = 1;
    for t in 1..n {
        let q = update_step(&costs[t - 1], y[t], y[t - 1], params, config.beta)?;
        let m = q.global_min()?.value;
        offset += m;
        max_pieces = max_pieces.max(q.len());
        costs.push(q.add_constant(-m));
    }

    let mut signal = vec![0.0; n];
    signal[n - 1] = costs[n - 1].global_argmin(search)?.argmin;
    for t in (0..n - 1).rev() {
        signal[t] = backtrack_step(&costs[t], y[t], y[t + 1], signal[t + 1], params, config.beta, search)?;
    }

    Ok(Segmentation {
        changepoints: extract_changepoints(&signal, params, config.beta),
        signal,
        cost: offset,
        max_pieces,
    })
}

/// `argmin_mu Q_t(mu) + min(lambda (mu - next)^2, beta) + gamma ((y_{t+1} - next) - phi (y_t - mu))^2`.
fn backtrack_step(
    q: &PiecewiseQuadratic,
    y_t: f64,
    y_next: f64,
    next: f64,
    params: &ModelParams,
    beta: f64,
    search: SearchBox,
) -> Result<f64> {
    let (gamma, phi, lambda) = (params.gamma(), params.phi, params.lambda());
    let r = y_next - next - phi * y_t;
    // gamma (r + phi mu)^2
    let data = Quadratic::new(gamma * phi * phi, 2.0 * gamma * phi * r, gamma * r * r);

    if lambda.is_infinite() {
        if beta.is_infinite() {
            return Ok(next);
        }
        let stay = q.evaluate(next) + data.eval(next);
        let jump = q.add_quadratic(data).global_argmin(search)?;
        return Ok(if jump.value + beta < stay { jump.argmin } else { next });
    }

    let stay = q.add_quadratic(data + Quadratic::weighted_square(lambda, next));
    let b = if beta.is_infinite() {
        stay
    } else {
        stay.min_of_two(&q.add_quadratic(data + Quadratic::constant(beta)))
    };
    Ok(b.global_argmin(search)?.argmin)
}

/// Indices `tau` (1-based) with `lambda (mu_{tau+1} - mu_tau)^2 > beta`, or
/// `mu_{tau+1} != mu_tau` when `lambda` is infinite.
pub fn extract_changepoints(signal: &[f64], params: &ModelParams, beta: f64) -> Vec<usize> {
    let lambda = params.lambda();
    signal
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let d = w[1] - w[0];
            if lambda.is_infinite() {
                d != 0.0
            } else {
                lambda * d * d > beta
            }
        })
        .map(|(i, _)| i + 1)
        .collect()
}

/// Penalised cost of a mean path, with jumps placed wherever the
/// changepoint rule fires.
pub fn penalised_cost(y: &[f64], signal: &[f64], params: &ModelParams, beta: f64) -> f64 {
    assert_eq!(y.len(), signal.len(), "data and signal lengths differ");
    if y.is_empty() {
        return 0.0;
    }
    let (gamma, phi, lambda) = (params.gamma(), params.phi, params.lambda());
    let mut cost = (1.0 - phi * phi) * gamma * (y[0] - signal[0]).powi(2);
    for t in 1..y.len() {
        let d = signal[t] - signal[t - 1];
        cost += if lambda.is_infinite() {
            if d != 0.0 {
                beta
            } else {
                0.0
            }
        } else {
            (lambda * d * d).min(beta)
        };
        let resid = (y[t] - signal[t]) - phi * (y[t - 1] - signal[t - 1]);
        cost += gamma * resid * resid;
    }
    cost
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iid(sigma_nu_sq: f64) -> ModelParams {
        ModelParams::new(0.0, sigma_nu_sq, 0.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, -0.1).is_err());
        let p = ModelParams::new(0.25, 4.0, 0.5).unwrap();
        assert_eq!(p.lambda() * p.sigma_eta_sq, 1.0);
        assert_eq!(p.gamma() * p.sigma_nu_sq, 1.0);
        assert_eq!(iid(1.0).lambda(), f64::INFINITY);
    }

    #[test]
    fn variants_parse_and_restrict() {
        for v in ModelVariant::ALL {
            assert_eq!(v.as_str().parse::<ModelVariant>().unwrap(), v);
        }
        assert!("ar".parse::<ModelVariant>().is_err());
        let p = ModelParams::new(0.5, 1.0, 0.3).unwrap();
        assert_eq!(ModelVariant::Iid.restrict(p).variant(), ModelVariant::Iid);
        assert!(!ModelVariant::ArOnly.admits(&p));
        assert!(ModelVariant::RwAr.admits(&p));
    }

    #[test]
    fn single_observation() {
        let seg = solve(&[3.0], &ModelParams::new(0.5, 2.0, 0.3).unwrap(), &SolverConfig::new(1.0)).unwrap();
        assert!(seg.changepoints.is_empty());
        assert_eq!(seg.signal, vec![3.0]);
        assert_eq!(seg.cost, 0.0);
    }

    #[test]
    fn step_series_iid() {
        let y = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let seg = solve(&y, &iid(1.0), &SolverConfig::new(4.0)).unwrap();
        assert_eq!(seg.changepoints, vec![3]);
        for (a, b) in seg.signal.iter().zip(y) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(seg.cost, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn infinite_penalty_gives_no_changes() {
        let y = [0.0, 5.0, -3.0, 12.0, 1.0];
        for p in [iid(1.0), ModelParams::new(0.5, 1.0, 0.7).unwrap()] {
            let seg = solve(&y, &p, &SolverConfig::new(f64::INFINITY)).unwrap();
            assert!(seg.changepoints.is_empty());
        }
    }

    #[test]
    fn constant_series_has_no_changes() {
        let y = [2.5; 20];
        for p in [iid(1.0), ModelParams::new(0.5, 1.0, 0.7).unwrap()] {
            let seg = solve(&y, &p, &SolverConfig::new(0.1)).unwrap();
            assert!(seg.changepoints.is_empty());
            assert_abs_diff_eq!(seg.cost, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = iid(1.0);
        assert_eq!(solve(&[], &p, &SolverConfig::new(1.0)), Err(Error::EmptyInput));
        assert!(matches!(
            solve(&[1.0, f64::NAN], &p, &SolverConfig::new(1.0)),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            solve(&[1.0], &p, &SolverConfig::new(0.0)),
            Err(Error::InvalidParameter(_))
        ));
        let rw = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            solve(&[1.0], &rw, &SolverConfig::new(1.0).with_variant(ModelVariant::ArOnly)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn extraction_rule() {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(extract_changepoints(&[0.0, 0.0, 5.0, 5.0], &p, 4.0), vec![2]);
        assert!(extract_changepoints(&[0.0, 1.0, 2.0, 3.0], &p, 4.0).is_empty());
        assert!(extract_changepoints(&[1.0; 4], &p, 4.0).is_empty());
        // boundary: lambda d^2 == beta is not a change
        assert!(extract_changepoints(&[0.0, 2.0], &p, 4.0).is_empty());
    }

    #[test]
    fn iid_update_matches_closed_form() {
        // Q_t(mu) = min(Q_{t-1}(mu), min Q_{t-1} + beta) + gamma (y_t - mu)^2
        let p = iid(0.5);
        let q1 = initial_cost(1.0, &p);
        let q2 = update_step(&q1, 4.0, 1.0, &p, 3.0).unwrap();
        for i in -100..=100 {
            let mu = i as f64 * 0.1;
            let want = q1.evaluate(mu).min(3.0) + 2.0 * (4.0 - mu).powi(2);
            assert_abs_diff_eq!(q2.evaluate(mu), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn update_from_single_quadratic_matches_two_dimensional_grid() {
        let cases = [
            (ModelParams::new(0.5, 2.0, 0.7).unwrap(), 2.0),
            (ModelParams::new(0.5, 0.5, 0.0).unwrap(), 1.0),
            (ModelParams::new(0.0, 2.0, 0.3).unwrap(), 5.0),
        ];
        let (y1, y2) = (0.3, 2.1);
        let us: Vec<f64> = (-6000..=6000).map(|i| i as f64 * 1e-3).collect();
        for (p, beta) in cases {
            let q1 = initial_cost(y1, &p);
            let q2 = update_step(&q1, y2, y1, &p, beta).unwrap();
            assert!(q2.len() <= 3, "{} pieces", q2.len());
            q2.check_invariants().unwrap();
            let (gamma, phi, lambda) = (p.gamma(), p.phi, p.lambda());
            for k in 0..=20 {
                let mu = -1.0 + k as f64 * 0.2;
                let oracle = us
                    .iter()
                    .map(|&u| {
                        let trans = if lambda.is_infinite() {
                            if (u - mu).abs() < 5e-4 { 0.0 } else { beta }
                        } else {
                            (lambda * (mu - u).powi(2)).min(beta)
                        };
                        q1.evaluate(u) + trans + gamma * ((y2 - mu) - phi * (y1 - u)).powi(2)
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (q2.evaluate(mu) - oracle).abs() <= 1e-5,
                    "mu={mu}: {} vs {oracle}",
                    q2.evaluate(mu)
                );
            }
        }
    }

    #[test]
    fn infinite_penalty_keeps_only_no_change_branch() {
        let p = ModelParams::new(0.5, 1.0, 0.4).unwrap();
        let q1 = initial_cost(0.7, &p);
        let all = update_step(&q1, 1.5, 0.7, &p, f64::INFINITY).unwrap();
        let shifted = q1.add_quadratic(-Quadratic::weighted_square(
            p.gamma() * 0.4 * 0.6,
            (1.5 - 0.4 * 0.7) / 0.6,
        ));
        let z = 1.5 - 0.4 * 0.7;
        let fit = Quadratic::weighted_square(p.gamma() / 0.6 * 0.36, z / 0.6);
        let same = shifted.infimal_convolution(p.gamma() * 0.4 + p.lambda()).unwrap().add_quadratic(fit);
        for i in -50..50 {
            let x = i as f64 * 0.1;
            assert_abs_diff_eq!(all.evaluate(x), same.evaluate(x), epsilon = 1e-9);
        }
    }

    #[test]
    fn cost_recomputes_from_signal() {
        let y = [0.1, -0.4, 0.3, 5.2, 4.7, 5.5, 5.1, 0.2, 0.0, -0.3];
        for p in [
            iid(1.0),
            ModelParams::new(0.5, 1.0, 0.0).unwrap(),
            ModelParams::new(0.0, 1.0, 0.6).unwrap(),
            ModelParams::new(0.3, 0.8, 0.5).unwrap(),
        ] {
            let seg = solve(&y, &p, &SolverConfig::new(3.0)).unwrap();
            let direct = penalised_cost(&y, &seg.signal, &p, 3.0);
            assert!((direct - seg.cost).abs() <= 1e-8 * (1.0 + seg.cost.abs()), "{p:?}");
        }
    }
}
