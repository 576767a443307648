// Penalty inflation for a misspecified model, and the single-change projection.

use rwar_cpd::oracle::{ar1_covariance, penalty_alpha, projection_vector, GlsModel};
use rwar_cpd::solver::ModelParams;

pub fn run_example() -> Vec<(f64, f64)> {
    let n = 200;
    let assumed = ModelParams::new(0.0, 1.0, 0.3).expect("valid parameters");
    let mut rows = Vec::new();
    for true_phi in [0.3, 0.5, 0.7] {
        let alpha = penalty_alpha(&ar1_covariance(n, 1.0, true_phi), &assumed).expect("square covariance");
        let beta = 2.0 * alpha * (5000f64).ln();
        println!("true phi {true_phi}: alpha {alpha:.3}, beta at n = 5000 {beta:.2}");
        rows.push((true_phi, alpha));
    }
    let v = projection_vector(n / 2, n, &assumed).expect("interior change");
    let sigma = GlsModel::new(n, &assumed).expect("valid model").covariance();
    let vv = nalgebra::DVector::from_vec(v.clone());
    println!("projection at tau = {}: sum v {:.2e}, v'Sigma v {:.6}", n / 2, v.iter().sum::<f64>(), (vv.transpose() * &sigma * &vv)[0]);
    rows
}

#[allow(dead_code)]
fn main() {
    run_example();
}
