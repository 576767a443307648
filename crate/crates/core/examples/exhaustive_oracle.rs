// Check the solver against brute-force enumeration on a short series.

use rwar_cpd::oracle::{exhaustive_segment, gls_cost};
use rwar_cpd::solver::{solve, ModelParams, SolverConfig};

pub fn run_example() -> (Vec<usize>, Vec<usize>, f64) {
    let y = [0.3, -0.2, 0.1, 0.4, 4.2, 3.8, 4.5, 4.1, 3.9, 0.2, -0.1, 0.3];
    let params = ModelParams::new(0.05, 0.5, 0.3).expect("valid parameters");
    let beta = 3.0;
    let brute = exhaustive_segment(&y, &params, beta, y.len() - 1).expect("short series");
    let seg = solve(&y, &params, &SolverConfig::new(beta)).expect("finite data");
    let (gls, _) = gls_cost(&y, &seg.changepoints, &params).expect("valid changepoints");
    println!("exhaustive: {:?} cost {:.9}", brute.changepoints, brute.cost);
    println!("solver:     {:?} cost {:.9}", seg.changepoints, seg.cost);
    println!("GLS cost of the solver's changes plus penalty: {:.9}", gls + beta * seg.m() as f64);
    (brute.changepoints, seg.changepoints, (brute.cost - seg.cost).abs())
}

#[allow(dead_code)]
fn main() {
    run_example();
}
