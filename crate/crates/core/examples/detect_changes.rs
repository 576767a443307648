// Detect abrupt changes in a series with autocorrelated noise and drift.

use rwar_cpd::simulate::{generate, DriftSpec, NoiseSpec, ScenarioKind, ScenarioSpec};
use rwar_cpd::solver::{solve, ModelParams, SolverConfig};

pub fn run_example() -> (Vec<usize>, Vec<usize>) {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Updown,
        n: 1000,
        change_size: 6.0,
        noise: NoiseSpec::Ar1 { phi: 0.5, sigma_nu: 1.0 },
        drift: DriftSpec::RandomWalk { sigma_eta: 0.1 },
        seed: 7,
    };
    let series = generate(&spec).expect("valid scenario");
    let params = ModelParams::new(0.01, 1.0, 0.5).expect("valid parameters");
    let beta = 2.0 * (spec.n as f64).ln();
    let seg = solve(&series.y, &params, &SolverConfig::new(beta)).expect("finite data");
    println!("true changes:     {:?}", series.changepoints_true);
    println!("detected changes: {:?}", seg.changepoints);
    println!("penalised cost:   {:.3}", seg.cost);
    println!("largest Q_t size: {} pieces", seg.max_pieces);
    (seg.changepoints, series.changepoints_true)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
