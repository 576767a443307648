// Robust estimation of the drift variance, noise variance and AR coefficient.

use rwar_cpd::estimation::{estimate, LagVarianceProfile, DEFAULT_MAX_LAG};
use rwar_cpd::simulate::{generate, DriftSpec, NoiseSpec, ScenarioKind, ScenarioSpec};
use rwar_cpd::solver::{ModelParams, ModelVariant};

pub fn run_example() -> ModelParams {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Rand1,
        n: 5000,
        change_size: 5.0,
        noise: NoiseSpec::Ar1 { phi: 0.6, sigma_nu: 1.0 },
        drift: DriftSpec::RandomWalk { sigma_eta: 0.2 },
        seed: 3,
    };
    let y = generate(&spec).expect("valid scenario").y;
    let profile = LagVarianceProfile::from_series(&y, DEFAULT_MAX_LAG).expect("long enough");
    let shown: Vec<String> = profile.variances().iter().take(5).map(|v| format!("{v:.3}")).collect();
    println!("lag variances v_1..v_5: [{}]", shown.join(", "));
    let fit = estimate(&y, DEFAULT_MAX_LAG, ModelVariant::RwAr).expect("estimable");
    let p = fit.params;
    println!("truth:    sigma_eta^2 0.040, sigma_nu^2 1.000, phi 0.60");
    println!(
        "estimate: sigma_eta^2 {:.3}, sigma_nu^2 {:.3}, phi {:.2}",
        p.sigma_eta_sq, p.sigma_nu_sq, p.phi
    );
    println!("suggested model: {}", fit.suggested_variant().as_str());
    p
}

#[allow(dead_code)]
fn main() {
    run_example();
}
