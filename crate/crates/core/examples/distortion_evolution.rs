//! Exchange + inhomogeneous field dynamics, the residual mismatch it leaves
//! after rational control, and the resulting knob.

use spinpair::distortion::{half_mismatch, rational_approx};
use spinpair::{bell_coefficients, bell_state, evolve, hamiltonian, j_parameter};
use spinpair::{small_mismatch_estimate, BellLabel, ControlKnob, FieldParams};

fn main() {
    let fp = FieldParams::new(1.0, 0.15, -0.05);
    let h = hamiltonian(&fp);
    println!("H diagonal:");
    for k in 0..4 {
        println!("  {:+.3}", h.entry(k, k).re);
    }
    println!("<01|H|10> = {:+.3}", h.entry(1, 2).re);

    // β00 leaks into β10 at a rate set by B1 - B2
    let start = bell_state(BellLabel::B00);
    for step in 0..=5 {
        let t = step as f64 * 0.5;
        let w = bell_coefficients(&evolve(&start, &fp, t).unwrap()).unwrap();
        println!("t={t:.1}: |b00|^2={:.4} |b10|^2={:.4}", w[0].norm_sqr(), w[2].norm_sqr());
    }

    println!(
        "j - 1/2 = {:.4e}, rough estimate -B^2/4J^2 = {:.4e}",
        half_mismatch(&fp).unwrap(),
        small_mismatch_estimate(&fp).unwrap()
    );

    let strong = FieldParams::new(1.0, 0.7, -0.6);
    let j = j_parameter(&strong).unwrap();
    println!("strong field: j = {j:.10}");
    for max_den in [2, 5, 12, 100] {
        let q = rational_approx(j, max_den).unwrap();
        println!("max_den {max_den:>3}: {}/{} delta {:+.3e}", q.numerator, q.denominator, q.delta);
    }

    let knob = ControlKnob::from_fields(&strong, 25, 12).unwrap();
    println!("n = {}, delta = {:.4e}, n*delta = {:.4e}", knob.n(), knob.delta(), knob.ndelta());
}
