//! Exact simulation of a spin entangled-pair emission source.
//!
//! The source emits a superposition of Bell species, a Heisenberg exchange
//! with inhomogeneous fields distorts it, and a control stage leaves a
//! residual mismatch `nδ`. This crate builds those states, measures them in
//! the Bell basis through an ancilla circuit, predicts the resulting species
//! populations, and inverts the relations to steer populations or recover
//! emission parameters.
//!
//! ```
//! use spinpair::{controlled_emission, populations_exact, ControlKnob, SourceSpec};
//! use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
//!
//! let spec = SourceSpec::new(FRAC_PI_4, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap();
//! let knob = ControlKnob::from_ndelta(0.125).unwrap();
//! let emission = controlled_emission(&spec, &knob).unwrap();
//! let pops = populations_exact(&emission.state).unwrap().normalized;
//! assert!((pops.f01 - 0.5).abs() < 1e-12);
//! ```

pub mod characterize;
pub mod cli;
pub mod control;
pub mod distortion;
pub mod source;
pub mod statevec;

pub use characterize::{
    circuit_realization, nonlocal_bell_measurement, populations_analytic, populations_exact,
    species_moments, CharacterizationCircuit, MeasurementRecord, PopulationTable, Populations,
    SpeciesMoments,
};
pub use control::{
    feasible, infer_ndelta, infer_parameters, region_grid, solve_ndelta, EmissionEstimate,
    InferenceError, RegionPoint, SteeringError, SteeringSolution,
};
pub use distortion::{
    controlled_emission, controlled_psi1, controlled_psi2, evolve, hamiltonian, j_parameter,
    rational_approx, small_mismatch_estimate, ControlKnob, DistortionError, FieldParams,
    HamiltonianMatrix, RationalApprox,
};
pub use source::{
    component_states, emitted_state, psi1, psi2, ComponentStates, Emission, SourceError,
    SourceSpec,
};
pub use statevec::{
    apply_unitary, bell_coefficients, bell_state, fidelity_up_to_phase, measure_qubits, tensor,
    BellLabel, PureState, StateError, UnitaryMatrix,
};

use rand::SeedableRng;

/// The deterministic stream used by every sampling operation.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
