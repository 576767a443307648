// Precision, recall and F1 of detected changes within a matching window.

use rwar_cpd::evaluate::{match_changepoints, EvalReport, DEFAULT_TOLERANCE};

pub fn run_example() -> EvalReport {
    let truth = [250, 500, 750];
    let detected = [249, 502, 600, 754];
    let report = match_changepoints(&detected, &truth, DEFAULT_TOLERANCE).expect("sorted input");
    println!("truth {truth:?}, detected {detected:?}, window +/-{DEFAULT_TOLERANCE}");
    println!(
        "TP {} FP {} FN {}: precision {:.3}, recall {:.3}, F1 {:.3}",
        report.true_positives,
        report.false_positives,
        report.false_negatives,
        report.precision,
        report.recall,
        report.f1
    );
    report
}

#[allow(dead_code)]
fn main() {
    run_example();
}
