//! Build the emitted superposition for a few source settings and show its
//! Bell-species content and raw norm.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use spinpair::{bell_coefficients, emitted_state, psi1, psi2, species_moments, SourceSpec};

fn main() {
    println!("psi1 weights: {:?}", weights(&psi1()));
    println!("psi2(pi/6) weights: {:?}", weights(&psi2(FRAC_PI_6)));

    let specs = [
        SourceSpec::from_primary(FRAC_PI_4, 1.0, false, FRAC_PI_6).unwrap(),
        SourceSpec::from_primary(FRAC_PI_4, 0.6, false, 0.0).unwrap(),
        SourceSpec::from_primary(FRAC_PI_4, 0.6, true, FRAC_PI_6).unwrap(),
    ];
    for spec in specs {
        let emission = emitted_state(&spec).unwrap();
        let m = species_moments(&spec);
        println!(
            "gamma={:.3} p=({:.2},{:.2}) theta=({:.3},{:.3}): C={:.4} S={:.4} raw norm {:.6}",
            spec.gamma(),
            spec.p1(),
            spec.p2(),
            spec.theta1(),
            spec.theta2(),
            m.c,
            m.s,
            emission.raw_norm
        );
        println!("  species weights {:?}", weights(&emission.state));
    }

    match SourceSpec::new(0.3, 0.9, 0.9, 0.2, 1.3) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
}

fn weights(state: &spinpair::PureState) -> [String; 4] {
    bell_coefficients(state)
        .unwrap()
        .map(|c| format!("{:.4}", c.norm_sqr()))
}
