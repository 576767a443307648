#![allow(dead_code)]

use rand::Rng;
use rwar_cpd::pwq::{PiecewiseQuadratic, Quadratic};
use rwar_cpd::solver::{initial_cost, update_step, ModelParams};

/// Median with the central pair averaged.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `min_i f_i + w (x_j - x_i)^2` for every grid point `x_j`, by the lower
/// envelope of parabolas rooted at each sample.
pub fn grid_infimal_convolution(f: &[f64], x: &[f64], w: f64) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let lift = |i: usize| f[i] + w * x[i] * x[i];
    let cross = |q: usize, p: usize| (lift(q) - lift(p)) / (2.0 * w * (x[q] - x[p]));
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = cross(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = cross(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut out = Vec::with_capacity(n);
    k = 0;
    for &xj in x {
        while z[k + 1] < xj {
            k += 1;
        }
        out.push(w * (xj - x[v[k]]).powi(2) + f[v[k]]);
    }
    out
}

/// Kolmogorov survival function `Q_KS(lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let en = n.sqrt();
    (d, kolmogorov_q((en + 0.12 + 0.11 / en) * d))
}

/// Standardised cusum `sqrt(tau (n - tau) / n) |mean_left - mean_right| / sigma`.
pub fn cusum(y: &[f64], tau: usize, sigma: f64) -> f64 {
    let n = y.len() as f64;
    let t = tau as f64;
    let left = y[..tau].iter().sum::<f64>() / t;
    let right = y[tau..].iter().sum::<f64>() / (n - t);
    (t * (n - t) / n).sqrt() * (left - right).abs() / sigma
}

/// Pointwise minimum of 2 to 12 convex quadratics with curvature in
/// `[0.05, 10]`, minimisers in `[-8, 8]` and minima in `[0, 5]`.
pub fn random_min_of_convex<R: Rng>(rng: &mut R) -> PiecewiseQuadratic {
    let m = rng.gen_range(2..=12);
    (0..m)
        .map(|_| {
            let a = rng.gen_range(0.05..10.0);
            let c = rng.gen_range(-8.0..8.0);
            let v = rng.gen_range(0.0..5.0);
            PiecewiseQuadratic::from_quadratic(Quadratic::new(a, -2.0 * a * c, a * c * c + v))
        })
        .reduce(|f, g| f.min_of_two(&g))
        .expect("at least two quadratics")
}

/// A cost function produced by the recursion itself on a short random series.
pub fn random_recursion_cost<R: Rng>(rng: &mut R) -> PiecewiseQuadratic {
    let n = rng.gen_range(2..=8);
    let params = ModelParams::new(
        if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.1..2.0) },
        rng.gen_range(1.0..3.0),
        rng.gen_range(0.0..0.8),
    )
    .unwrap();
    let beta = rng.gen_range(0.2..5.0);
    let mut level = 0.0;
    let y: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                level = rng.gen_range(-4.0..4.0);
            }
            level + rng.gen_range(-1.0..1.0)
        })
        .collect();
    let mut q = initial_cost(y[0], &params);
    for t in 1..n {
        q = update_step(&q, y[t], y[t - 1], &params, beta).unwrap();
    }
    q
}

pub fn max_curvature(f: &PiecewiseQuadratic) -> f64 {
    f.pieces().iter().map(|p| p.q.a).fold(0.0, f64::max)
}
