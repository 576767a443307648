//! Seedable generators for the model and the benchmark scenarios.
//!
//! A series is `y = mu + eps` where `mu` is a step function plus an optional
//! drift (random walk or sinusoid) and `eps` is AR(1), AR(2) or i.i.d. noise.
//! Random draws happen in a fixed order (change sizes, noise, drift) from a
//! single ChaCha8 stream, so a spec and seed determine the output bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steps discarded before an AR(2) sample is returned.
pub const AR2_BURN_IN: usize = 1000;

/// Number of interior changes in the `rand1` scenario.
pub const RAND1_CHANGES: usize = 19;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Change pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// No change.
    None,
    /// One upward change at `n/2`.
    Up,
    /// Three equally spaced changes, alternating up and down.
    Updown,
    /// Nineteen evenly spaced changes with random signed sizes.
    Rand1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    Ar1 { phi: f64, sigma_nu: f64 },
    Ar2 { phi1: f64, phi2: f64, sigma_nu: f64 },
    Iid { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftSpec {
    None,
    RandomWalk { sigma_eta: f64 },
    Sinusoidal { amplitude: f64, frequency: f64 },
}

/// Full description of one simulated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub change_size: f64,
    pub noise: NoiseSpec,
    pub drift: DriftSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSeries {
    pub y: Vec<f64>,
    pub mu_true: Vec<f64>,
    /// 1-based: a change at `tau` means `mu_{tau+1}` differs from `mu_tau`.
    pub changepoints_true: Vec<usize>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let min_n = match self.kind {
            ScenarioKind::None => 1,
            ScenarioKind::Up => 2,
            ScenarioKind::Updown => 4,
            ScenarioKind::Rand1 => RAND1_CHANGES + 1,
        };
        if self.n < min_n {
            return Err(Error::invalid_parameter(format!(
                "scenario {:?} needs n >= {min_n}, got {}",
                self.kind, self.n
            )));
        }
        if !self.change_size.is_finite() {
            return Err(Error::invalid_parameter("change_size must be finite"));
        }
        match self.noise {
            NoiseSpec::Ar1 { phi, sigma_nu } => {
                check_scale("sigma_nu", sigma_nu)?;
                if !(0.0..1.0).contains(&phi) {
                    return Err(Error::invalid_parameter(format!("AR(1) phi must be in [0, 1), got {phi}")));
                }
            }
            NoiseSpec::Ar2 { phi1, phi2, sigma_nu } => {
                check_scale("sigma_nu", sigma_nu)?;
                check_ar2(phi1, phi2)?;
            }
            NoiseSpec::Iid { sigma } => check_scale("sigma", sigma)?,
        }
        match self.drift {
            DriftSpec::None => {}
            DriftSpec::RandomWalk { sigma_eta } => check_scale("sigma_eta", sigma_eta)?,
            DriftSpec::Sinusoidal { amplitude, frequency } => {
                if !amplitude.is_finite() || !(frequency >= 0.0) || !frequency.is_finite() {
                    return Err(Error::invalid_parameter(
                        "sinusoid needs finite amplitude and frequency >= 0",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The same scenario with the seed of replicate `index`.
    pub fn replicate(&self, index: u64) -> Self {
        Self {
            seed: child_seed(self.seed, index),
            ..*self
        }
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_parameter(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_ar2(phi1: f64, phi2: f64) -> Result<()> {
    let stationary = phi2.abs() < 1.0 && phi1 + phi2 < 1.0 && phi2 - phi1 < 1.0;
    if stationary {
        Ok(())
    } else {
        Err(Error::invalid_parameter(format!(
            "AR(2) coefficients ({phi1}, {phi2}) are not stationary"
        )))
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index`: SplitMix64 of `seed + (index + 1) * golden gamma`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Changepoint positions for a scenario of length `n`.
pub fn scenario_changepoints(kind: ScenarioKind, n: usize) -> Vec<usize> {
    match kind {
        ScenarioKind::None => vec![],
        ScenarioKind::Up => vec![n / 2],
        ScenarioKind::Updown => (1..=3).map(|i| i * n / 4).collect(),
        ScenarioKind::Rand1 => (1..=RAND1_CHANGES).map(|i| i * n / (RAND1_CHANGES + 1)).collect(),
    }
}

/// Piecewise-constant mean starting at zero; `changes` are `(tau, size)`
/// pairs applied from index `tau` (0-based) onwards.
pub fn step_mean(n: usize, changes: &[(usize, f64)]) -> Vec<f64> {
    let mut mu = vec![0.0; n];
    for &(tau, size) in changes {
        for m in mu.iter_mut().skip(tau) {
            *m += size;
        }
    }
    mu
}

/// `mu_t = amplitude sin(2 pi frequency t)` for `t = 1..n`, plus the step
/// function of `changes`.
pub fn generate_sinusoidal_mean(
    n: usize,
    amplitude: f64,
    frequency: f64,
    changes: &[(usize, f64)],
) -> Vec<f64> {
    let mut mu = step_mean(n, changes);
    for (t, m) in mu.iter_mut().enumerate() {
        *m += amplitude * (std::f64::consts::TAU * frequency * (t + 1) as f64).sin();
    }
    mu
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("scale validated as finite and non-negative")
}

/// Stationary AR(1) sample with innovation standard deviation `sigma_nu`.
pub fn generate_ar1_noise<R: Rng>(n: usize, phi: f64, sigma_nu: f64, rng: &mut R) -> Vec<f64> {
    let innov = normal(sigma_nu);
    let mut eps = Vec::with_capacity(n);
    if n == 0 {
        return eps;
    }
    eps.push(normal(sigma_nu / (1.0 - phi * phi).sqrt()).sample(rng));
    for t in 1..n {
        eps.push(phi * eps[t - 1] + innov.sample(rng));
    }
    eps
}

/// Stationary AR(2) sample, started from zero and run through a burn-in.
pub fn generate_ar2_noise(n: usize, phi1: f64, phi2: f64, sigma_nu: f64, seed: u64) -> Result<Vec<f64>> {
    check_ar2(phi1, phi2)?;
    check_scale("sigma_nu", sigma_nu)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ar2_from_rng(n, phi1, phi2, sigma_nu, &mut rng))
}

fn ar2_from_rng<R: Rng>(n: usize, phi1: f64, phi2: f64, sigma_nu: f64, rng: &mut R) -> Vec<f64> {
    let innov = normal(sigma_nu);
    let (mut e1, mut e2) = (0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for t in 0..AR2_BURN_IN + n {
        let e = phi1 * e1 + phi2 * e2 + innov.sample(rng);
        e2 = e1;
        e1 = e;
        if t >= AR2_BURN_IN {
            out.push(e);
        }
    }
    out
}

/// Random walk `w_1 = 0`, `w_t = w_{t-1} + eta_t`.
fn random_walk<R: Rng>(n: usize, sigma_eta: f64, rng: &mut R) -> Vec<f64> {
    let step = normal(sigma_eta);
    let mut w = 0.0;
    (0..n)
        .map(|t| {
            if t > 0 {
                w += step.sample(rng);
            }
            w
        })
        .collect()
}

pub fn generate(spec: &ScenarioSpec) -> Result<SimulatedSeries> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let taus = scenario_changepoints(spec.kind, n);
    let sizes: Vec<f64> = match spec.kind {
        ScenarioKind::None => vec![],
        ScenarioKind::Up => vec![spec.change_size],
        ScenarioKind::Updown => [1.0, -1.0, 1.0].iter().map(|s| s * spec.change_size).collect(),
        ScenarioKind::Rand1 => {
            let bound = 2.0 * spec.change_size.abs();
            (0..RAND1_CHANGES)
                .map(|_| if bound > 0.0 { rng.gen_range(-bound..=bound) } else { 0.0 })
                .collect()
        }
    };
    let changes: Vec<(usize, f64)> = taus.iter().copied().zip(sizes).collect();

    let eps = match spec.noise {
        NoiseSpec::Ar1 { phi, sigma_nu } => generate_ar1_noise(n, phi, sigma_nu, &mut rng),
        NoiseSpec::Ar2 { phi1, phi2, sigma_nu } => ar2_from_rng(n, phi1, phi2, sigma_nu, &mut rng),
        NoiseSpec::Iid { sigma } => {
            let d = normal(sigma);
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
    };

    let mu_true = match spec.drift {
        DriftSpec::None => step_mean(n, &changes),
        DriftSpec::RandomWalk { sigma_eta } => step_mean(n, &changes)
            .into_iter()
            .zip(random_walk(n, sigma_eta, &mut rng))
            .map(|(s, w)| s + w)
            .collect(),
        DriftSpec::Sinusoidal { amplitude, frequency } => {
            generate_sinusoidal_mean(n, amplitude, frequency, &changes)
        }
    };

    let y = mu_true.iter().zip(&eps).map(|(m, e)| m + e).collect();
    Ok(SimulatedSeries {
        y,
        mu_true,
        changepoints_true: taus,
    })
}
