// A small scenario benchmark with true and estimated parameters.

use rwar_cpd::cli::{benchmark_spec, summary_csv, BenchmarkArgs, BenchmarkReport};
use rwar_cpd::estimation::DEFAULT_MAX_LAG;
use rwar_cpd::simulate::{DriftSpec, NoiseSpec, ScenarioKind, ScenarioSpec};
use rwar_cpd::solver::ModelVariant;

pub fn run_example() -> BenchmarkReport {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Updown,
        n: 1000,
        change_size: 5.0,
        noise: NoiseSpec::Ar1 { phi: 0.5, sigma_nu: 1.0 },
        drift: DriftSpec::RandomWalk { sigma_eta: 0.05 },
        seed: 1,
    };
    let args = BenchmarkArgs {
        input: "unused.json".into(),
        replicates: 10,
        seed: None,
        beta: None,
        penalty_scale: 1.0,
        model: ModelVariant::RwAr,
        lags: DEFAULT_MAX_LAG,
        output: "unused.json".into(),
    };
    let report = benchmark_spec(&spec, &args).expect("valid scenario");
    print!("{}", summary_csv(&report).expect("serialisable"));
    report
}

#[allow(dead_code)]
fn main() {
    run_example();
}
