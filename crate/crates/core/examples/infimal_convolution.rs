// The infimal convolution of a piecewise quadratic with `omega x^2`, and the
// input pieces that survive it.

use rwar_cpd::pwq::{PiecewiseQuadratic, Quadratic};

pub fn run_example() -> (PiecewiseQuadratic, Vec<usize>) {
    let f = [(-3.0, 0.0), (0.0, 2.0), (3.0, 0.5), (6.0, 1.0)]
        .into_iter()
        .map(|(centre, floor)| {
            PiecewiseQuadratic::from_quadratic(Quadratic::weighted_square(2.0, centre) + Quadratic::constant(floor))
        })
        .reduce(|f, g| f.min_of_two(&g))
        .expect("four quadratics");
    let omega = 0.5;
    let (g, survivors) = f.infimal_convolution_traced(omega).expect("omega >= 0");
    println!("input: {} pieces, knots {:?}", f.len(), f.knots().map(|k| format!("{k:.3}")).collect::<Vec<_>>());
    println!("output: {} pieces from input pieces {survivors:?}", g.len());
    for x in [-4.0, -1.5, 0.0, 1.5, 3.0, 7.0] {
        println!("  x {x:5.1}: f {:8.3}  INF f {:8.3}", f.evaluate(x), g.evaluate(x));
    }
    (g, survivors)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
