//! The ancilla circuit that measures a pair in the Bell basis without
//! destroying it, run on a controlled emission.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use spinpair::{circuit_realization, controlled_emission, fidelity_up_to_phase, populations_analytic};
use spinpair::{bell_state, seeded_rng, ControlKnob, SourceSpec};

fn main() {
    let spec = SourceSpec::new(FRAC_PI_4, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap();
    let knob = ControlKnob::from_ndelta(0.125).unwrap();
    let state = controlled_emission(&spec, &knob).unwrap().state;

    let circuit = circuit_realization();
    for g in circuit.gates() {
        println!("{} {:?}", g.name, g.targets);
    }

    println!("circuit populations:  {:?}", circuit.populations(&state).unwrap());
    println!("analytic populations: {:?}", populations_analytic(&spec, &knob).normalized);

    for branch in circuit.branches(&state).unwrap() {
        let r = &branch.record;
        let fid = fidelity_up_to_phase(&r.post_state, &bell_state(r.label())).unwrap();
        println!(
            "ancillas {:?} -> outcome {} ({}) p={:.4} post-state fidelity {fid:.12}",
            branch.copy_bits,
            r.key(),
            r.label(),
            r.probability
        );
    }

    let mut rng = seeded_rng(1);
    let shots: Vec<String> = (0..12).map(|_| circuit.run(&state, &mut rng).unwrap().key()).collect();
    println!("12 shots: {}", shots.join(" "));
}
