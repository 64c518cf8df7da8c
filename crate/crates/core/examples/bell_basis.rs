//! Prepare each Bell state with H + CNOT and read back its Bell coefficients.

use spinpair::{bell_coefficients, bell_state, fidelity_up_to_phase, measure_qubits};
use spinpair::{seeded_rng, BellLabel, PureState, UnitaryMatrix};

fn main() {
    let mut rng = seeded_rng(7);
    let h = UnitaryMatrix::hadamard();
    let cnot = UnitaryMatrix::cnot();
    let x = UnitaryMatrix::pauli_x();
    let z = UnitaryMatrix::pauli_z();

    for label in BellLabel::ALL {
        // |00> -> β00, then X on qubit 1 flips b, Z on qubit 0 flips a
        let mut state = PureState::basis(2, 0).unwrap();
        state = spinpair::apply_unitary(&state, &h, &[0]).unwrap();
        state = spinpair::apply_unitary(&state, &cnot, &[0, 1]).unwrap();
        if label.b() == 1 {
            state = spinpair::apply_unitary(&state, &x, &[1]).unwrap();
        }
        if label.a() == 1 {
            state = spinpair::apply_unitary(&state, &z, &[0]).unwrap();
        }

        let coeffs = bell_coefficients(&state).unwrap();
        let weights: Vec<String> = coeffs.iter().map(|c| format!("{:.3}", c.norm_sqr())).collect();
        let fid = fidelity_up_to_phase(&state, &bell_state(label)).unwrap();
        let m = measure_qubits(&state, &[0, 1], &mut rng).unwrap();
        println!(
            "{label}: weights [{}], fidelity {fid:.12}, computational readout {:?} (p = {:.2})",
            weights.join(", "),
            m.bits,
            m.probability
        );
    }
}
