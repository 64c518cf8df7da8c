//! Seeded finite-shot experiment, then inversion of the observed frequencies.

use spinpair::cli::{sample, ExperimentConfig};
use spinpair::infer_parameters;

fn main() {
    let config = ExperimentConfig::from_json(
        r#"{"gamma": 1.0, "p1": 1.0, "theta1": 0.7, "n": 1, "delta": 0.05}"#,
    )
    .unwrap();
    let exp = config.validate().unwrap();

    let shots = 200_000;
    let report = sample(&exp, shots, 42).unwrap();
    let hist = report.histogram.as_ref().unwrap();
    println!("expected {:?}", report.populations_exact);
    println!("counts   {hist:?}");

    let f = |k: &str| hist[k] as f64 / shots as f64;
    let est = infer_parameters(f("00"), f("01"), f("11"), exp.knob.ndelta()).unwrap();
    println!(
        "estimated sin^2 gamma {:.4} (true {:.4}), C^2 {:.4} (true {:.4})",
        est.sin2_gamma,
        1.0f64.sin().powi(2),
        est.c_squared,
        0.7f64.cos().powi(2)
    );
}
