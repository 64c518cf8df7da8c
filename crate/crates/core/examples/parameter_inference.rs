//! Recover emission parameters from measured populations at a known control
//! setting, then recover the setting itself from a steered pair of
//! populations.

use std::f64::consts::FRAC_PI_4;

use spinpair::{infer_ndelta, infer_parameters};

fn main() {
    let est = infer_parameters(0.4, 0.4, 0.2, 1.0 / 12.0).unwrap();
    println!(
        "sin^2 gamma = {:.6}, C^2 = {:.6}, S^2 = {:.6}, residual {:.1e}",
        est.sin2_gamma, est.c_squared, est.s_squared, est.residual
    );

    match infer_parameters(0.4, 0.4, 0.2, 0.125) {
        Ok(_) => unreachable!(),
        Err(e) => println!("n*delta = 1/8: {e}"),
    }

    let nd = infer_ndelta(0.3, 0.3, FRAC_PI_4).unwrap();
    println!("n*delta from (0.3, 0.3) at gamma = pi/4: {nd}");
}
