//! Independent ground truth for the solver.
//!
//! Everything here works on dense matrices and brute force, trading speed for
//! transparency: the regression form of the model, exhaustive search over
//! changepoint sets, a grid-discretised version of the recursion, the optimal
//! single-change projection and the penalty inflation factor.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::solver::ModelParams;

/// Regression form of the model, `y = X Delta + zeta` with
/// `Var(zeta) = Sigma_AR + Sigma_RW`.
#[derive(Debug, Clone)]
pub struct GlsModel {
    n: usize,
    params: ModelParams,
    sigma_ar: DMatrix<f64>,
    sigma_rw: DMatrix<f64>,
}

impl GlsModel {
    pub fn new(n: usize, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            n,
            params: *params,
            sigma_ar: ar1_covariance(n, params.sigma_nu_sq, params.phi),
            sigma_rw: random_walk_covariance(n, params.sigma_eta_sq),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma_ar(&self) -> &DMatrix<f64> {
        &self.sigma_ar
    }

    pub fn sigma_rw(&self) -> &DMatrix<f64> {
        &self.sigma_rw
    }

    /// `Sigma_AR + Sigma_RW`.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.sigma_ar + &self.sigma_rw
    }

    fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.covariance())
            .ok_or_else(|| Error::invalid_parameter("model covariance is not positive definite"))
    }

    /// `(Sigma_AR + Sigma_RW)^{-1}` by dense Cholesky.
    pub fn precision(&self) -> Result<DMatrix<f64>> {
        Ok(self.cholesky()?.inverse())
    }

    /// Closed-form tridiagonal inverse of `Sigma_AR`.
    pub fn sigma_ar_inverse(&self) -> DMatrix<f64> {
        ar1_precision(self.n, self.params.sigma_nu_sq, self.params.phi)
    }

    /// Closed-form tridiagonal inverse of `Sigma_RW`, `None` when
    /// `sigma_eta_sq = 0`.
    pub fn sigma_rw_inverse(&self) -> Option<DMatrix<f64>> {
        (self.params.sigma_eta_sq > 0.0)
            .then(|| random_walk_precision(self.n, self.params.sigma_eta_sq))
    }

    /// `n x (m + 1)` design; column `i` is `tau_{i-1}` zeros then ones, with
    /// `tau_0 = 0`.
    pub fn design(&self, tau: &[usize]) -> Result<DMatrix<f64>> {
        validate_changepoints(tau, self.n)?;
        let starts: Vec<usize> = std::iter::once(0).chain(tau.iter().copied()).collect();
        Ok(DMatrix::from_fn(self.n, starts.len(), |i, j| {
            if i >= starts[j] {
                1.0
            } else {
                0.0
            }
        }))
    }
}

/// `[Sigma_AR]_{ij} = sigma_nu^2 / (1 - phi^2) phi^{|i-j|}`.
pub fn ar1_covariance(n: usize, sigma_nu_sq: f64, phi: f64) -> DMatrix<f64> {
    let var = sigma_nu_sq / (1.0 - phi * phi);
    DMatrix::from_fn(n, n, |i, j| var * phi.powi(i.abs_diff(j) as i32))
}

/// `[Sigma_RW]_{ij} = sigma_eta^2 min(i, j)` with 1-based indices.
pub fn random_walk_covariance(n: usize, sigma_eta_sq: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| sigma_eta_sq * (i.min(j) + 1) as f64)
}

/// Tridiagonal AR(1) precision: `1/s` at the two corners, `(1 + phi^2)/s`
/// elsewhere on the diagonal, `-phi/s` off the diagonal.
pub fn ar1_precision(n: usize, sigma_nu_sq: f64, phi: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, i)] = if i == 0 || i == n - 1 { 1.0 } else { 1.0 + phi * phi } / sigma_nu_sq;
        if i + 1 < n {
            p[(i, i + 1)] = -phi / sigma_nu_sq;
            p[(i + 1, i)] = -phi / sigma_nu_sq;
        }
    }
    if n == 1 {
        p[(0, 0)] = (1.0 - phi * phi) / sigma_nu_sq;
    }
    p
}

/// Tridiagonal random-walk precision: `2/s` on the diagonal except `1/s` in
/// the last entry, `-1/s` off the diagonal.
pub fn random_walk_precision(n: usize, sigma_eta_sq: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, i)] = if i == n - 1 { 1.0 } else { 2.0 } / sigma_eta_sq;
        if i + 1 < n {
            p[(i, i + 1)] = -1.0 / sigma_eta_sq;
            p[(i + 1, i)] = -1.0 / sigma_eta_sq;
        }
    }
    p
}

fn validate_changepoints(tau: &[usize], n: usize) -> Result<()> {
    let mut prev = 0;
    for &t in tau {
        if t <= prev || t >= n {
            return Err(Error::invalid_parameter(format!(
                "changepoints must be strictly increasing within (0, {n}), got {tau:?}"
            )));
        }
        prev = t;
    }
    Ok(())
}

fn validate_series(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_data("series contains non-finite values"));
    }
    Ok(())
}

/// Minimises `(y - X a)^T W (y - X a)` over `a`; returns the minimum and `a`.
fn weighted_least_squares(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
) -> Result<(f64, DVector<f64>)> {
    let wx = w * x;
    let normal = x.transpose() * &wx;
    let rhs = wx.transpose() * y;
    let chol = Cholesky::new(normal)
        .ok_or_else(|| Error::invalid_parameter("singular normal equations"))?;
    let coef = chol.solve(&rhs);
    let resid = y - x * &coef;
    Ok(((resid.transpose() * w * &resid)[(0, 0)], coef))
}

/// Unpenalised cost of a segmentation as the generalised least squares
/// residual `min_Delta (y - X Delta)^T (Sigma_AR + Sigma_RW)^{-1} (y - X Delta)`.
pub fn gls_cost(y: &[f64], tau: &[usize], params: &ModelParams) -> Result<(f64, Vec<f64>)> {
    validate_series(y)?;
    let model = GlsModel::new(y.len(), params)?;
    let x = model.design(tau)?;
    let precision = model.precision()?;
    let (cost, coef) = weighted_least_squares(&DVector::from_column_slice(y), &x, &precision)?;
    Ok((cost, coef.iter().copied().collect()))
}

/// The same cost computed jointly over `Delta` and the cumulative
/// random-walk path, using the closed-form tridiagonal precisions:
/// `min (y - X Delta - e)^T Sigma_AR^{-1} (y - X Delta - e) + e^T Sigma_RW^{-1} e`.
pub fn gls_cost_two_block(y: &[f64], tau: &[usize], params: &ModelParams) -> Result<f64> {
    validate_series(y)?;
    let n = y.len();
    let model = GlsModel::new(n, params)?;
    let x = model.design(tau)?;
    let p_ar = model.sigma_ar_inverse();
    let yv = DVector::from_column_slice(y);
    let Some(p_rw) = model.sigma_rw_inverse() else {
        return weighted_least_squares(&yv, &x, &p_ar).map(|(c, _)| c);
    };
    let k = x.ncols();
    // unknowns w = (Delta, e); residual y - Z w with Z = [X I]
    let mut z = DMatrix::zeros(n, k + n);
    z.view_mut((0, 0), (n, k)).copy_from(&x);
    z.view_mut((0, k), (n, n)).fill_with_identity();
    let mut normal = z.transpose() * &p_ar * &z;
    {
        let mut block = normal.view_mut((k, k), (n, n));
        block += &p_rw;
    }
    let rhs = z.transpose() * &p_ar * &yv;
    let w = Cholesky::new(normal)
        .ok_or_else(|| Error::invalid_parameter("singular joint normal equations"))?
        .solve(&rhs);
    let resid = &yv - &z * &w;
    let e = w.rows(k, n);
    Ok((resid.transpose() * &p_ar * &resid)[(0, 0)] + (e.transpose() * &p_rw * e)[(0, 0)])
}

/// Best segmentation from exhaustive enumeration of all changepoint sets with
/// at most `m_max` changes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub changepoints: Vec<usize>,
    /// Penalised cost `C(tau) + m beta`.
    pub cost: f64,
}

/// Enumerates every subset of `{1, ..., n-1}` with at most `m_max` elements
/// and returns the penalised-cost minimiser. Ties go to fewer changes, then
/// to the lexicographically smallest set.
pub fn exhaustive_segment(
    y: &[f64],
    params: &ModelParams,
    beta: f64,
    m_max: usize,
) -> Result<ExhaustiveResult> {
    validate_series(y)?;
    let n = y.len();
    let precision = GlsModel::new(n, params)?.precision()?;
    let ay = &precision * DVector::from_column_slice(y);
    let yay = DVector::from_column_slice(y).dot(&ay);

    // suffix[i][j] = sum_{k >= i, l >= j} A_kl; step columns reduce to these.
    let mut suffix = DMatrix::zeros(n + 1, n + 1);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            suffix[(i, j)] =
                precision[(i, j)] + suffix[(i + 1, j)] + suffix[(i, j + 1)] - suffix[(i + 1, j + 1)];
        }
    }
    let mut suffix_ay = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_ay[i] = ay[i] + suffix_ay[i + 1];
    }

    let cost_of = |tau: &[usize]| -> Result<f64> {
        let starts: Vec<usize> = std::iter::once(0).chain(tau.iter().copied()).collect();
        let k = starts.len();
        let m = DMatrix::from_fn(k, k, |p, q| suffix[(starts[p], starts[q])]);
        let b = DVector::from_fn(k, |p, _| suffix_ay[starts[p]]);
        let chol = Cholesky::new(m).ok_or_else(|| Error::invalid_parameter("singular design"))?;
        Ok(yay - b.dot(&chol.solve(&b)))
    };

    let mut best = ExhaustiveResult {
        changepoints: vec![],
        cost: cost_of(&[])?,
    };
    if beta.is_infinite() {
        return Ok(best);
    }
    let m_max = m_max.min(n.saturating_sub(1));
    for m in 1..=m_max {
        for tau in Combinations::new(n - 1, m) {
            let c = cost_of(&tau)? + m as f64 * beta;
            if c < best.cost - 1e-12 * (1.0 + best.cost.abs()) {
                best = ExhaustiveResult {
                    changepoints: tau,
                    cost: c,
                };
            }
        }
    }
    Ok(best)
}

/// Lexicographic `m`-subsets of `{1, ..., max}`.
struct Combinations {
    max: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(max: usize, m: usize) -> Self {
        Self {
            max,
            current: (m <= max).then(|| (1..=m).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let m = out.len();
        let mut next = out.clone();
        let advanced = (0..m).rev().find(|&i| next[i] < self.max - (m - 1 - i));
        self.current = advanced.map(|i| {
            next[i] += 1;
            for j in i + 1..m {
                next[j] = next[j - 1] + 1;
            }
            next
        });
        Some(out)
    }
}

/// The recursion for `Q_t` with both `u` and `mu` restricted to `grid`.
/// Row `t` holds `Q_{t+1}` evaluated at each grid point.
pub fn grid_dp(y: &[f64], params: &ModelParams, beta: f64, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    validate_series(y)?;
    params.validate()?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid_parameter("grid must be non-empty and strictly increasing"));
    }
    let (gamma, phi, lambda) = (params.gamma(), params.phi, params.lambda());
    let mut rows = Vec::with_capacity(y.len());
    rows.push(
        grid.iter()
            .map(|&mu| (1.0 - phi * phi) * gamma * (y[0] - mu).powi(2))
            .collect::<Vec<_>>(),
    );
    for t in 1..y.len() {
        let prev = &rows[t - 1];
        let row = grid
            .iter()
            .enumerate()
            .map(|(j, &mu)| {
                grid.iter()
                    .enumerate()
                    .map(|(i, &u)| {
                        let trans = if lambda.is_infinite() {
                            if i == j {
                                0.0
                            } else {
                                beta
                            }
                        } else {
                            (lambda * (mu - u).powi(2)).min(beta)
                        };
                        prev[i] + trans + gamma * ((y[t] - mu) - phi * (y[t - 1] - u)).powi(2)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Projection `v` whose square `(v^T y)^2` is the cost reduction from adding
/// a single change after `tau1`.
pub fn projection_vector(tau1: usize, n: usize, params: &ModelParams) -> Result<Vec<f64>> {
    if tau1 == 0 || tau1 >= n {
        return Err(Error::invalid_parameter(format!(
            "changepoint must lie in (0, {n}), got {tau1}"
        )));
    }
    let a = GlsModel::new(n, params)?.precision()?;
    let u0 = DVector::from_element(n, 1.0);
    let u1 = DVector::from_fn(n, |i, _| if i >= tau1 { 1.0 } else { 0.0 });
    let (au0, au1) = (&a * &u0, &a * &u1);
    let c0 = u0.dot(&au0);
    let c01 = u0.dot(&au1);
    let c1 = u1.dot(&au1);
    let scale = (c1 - c01 * c01 / c0).sqrt();
    Ok(((au1 - au0 * (c01 / c0)) / scale).iter().copied().collect())
}

/// Largest eigenvalue of `(Sigma_AR + Sigma_RW)^{-1} Sigma_true`.
pub fn penalty_alpha(sigma_true: &DMatrix<f64>, params: &ModelParams) -> Result<f64> {
    let n = sigma_true.nrows();
    if sigma_true.ncols() != n {
        return Err(Error::invalid_parameter("true covariance must be square"));
    }
    let chol = GlsModel::new(n, params)?.cholesky()?;
    let l = chol.l();
    // L^{-1} Sigma_true L^{-T} is symmetric with the same spectrum
    let left = l
        .solve_lower_triangular(sigma_true)
        .ok_or_else(|| Error::invalid_parameter("singular model covariance"))?;
    let sym = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::invalid_parameter("singular model covariance"))?;
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    Ok(eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}
