//! Non-local Bell-basis characterization of the emitted pair.
//!
//! Two ancillas (qubits 2 and 3, zero-based) read out which Bell species the
//! pair is in without destroying it. Outcomes are labeled `|i3 j4>` and map
//! onto Bell species as
//!
//! | outcome | species |
//! |---------|---------|
//! | `00`    | `β00`   |
//! | `01`    | `β01`   |
//! | `11`    | `β10`   |
//! | `10`    | `β11`   |
//!
//! `β11` never occurs for states produced by the source model, so the
//! population `f10` is identically zero.

use rand::Rng;
use serde::Serialize;

use crate::distortion::ControlKnob;
use crate::source::SourceSpec;
use crate::statevec::{
    apply_unitary, bell_coefficients, bell_state, outcome_probabilities, project_qubits,
    sample_index, tensor, BellLabel, PureState, StateError, UnitaryMatrix,
};

/// Ancilla readout bits `(i3, j4)` reporting `label`.
pub fn outcome_for(label: BellLabel) -> (u8, u8) {
    (label.a(), label.a() ^ label.b())
}

/// Bell species announced by the readout `(i3, j4)`.
pub fn label_for_outcome(i3: u8, j4: u8) -> BellLabel {
    let a = i3 & 1;
    BellLabel::from_bits(a, a ^ (j4 & 1)).expect("bits masked to 0/1")
}

/// One probability per ancilla outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub f00: f64,
    pub f01: f64,
    pub f10: f64,
    pub f11: f64,
}

impl Populations {
    pub fn sum(&self) -> f64 {
        self.f00 + self.f01 + self.f10 + self.f11
    }

    pub fn get(&self, i3: u8, j4: u8) -> f64 {
        match (i3, j4) {
            (0, 0) => self.f00,
            (0, 1) => self.f01,
            (1, 0) => self.f10,
            _ => self.f11,
        }
    }

    /// Values in outcome order `00, 01, 10, 11`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.f00, self.f01, self.f10, self.f11]
    }

    pub fn max_abs_diff(&self, other: &Populations) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            f00: self.f00 * k,
            f01: self.f01 * k,
            f10: self.f10 * k,
            f11: self.f11 * k,
        }
    }
}

/// Populations before and after dividing by their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationTable {
    pub raw: Populations,
    pub normalized: Populations,
}

impl PopulationTable {
    fn from_raw(raw: Populations) -> Self {
        Self {
            raw,
            normalized: raw.scaled(1.0 / raw.sum()),
        }
    }
}

/// `C = p1 cos θ1 + p2 cos θ2`, `S = p1 sin θ1 + p2 sin θ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeciesMoments {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

pub fn species_moments(spec: &SourceSpec) -> SpeciesMoments {
    SpeciesMoments {
        c: spec.p1() * spec.theta1().cos() + spec.p2() * spec.theta2().cos(),
        s: spec.p1() * spec.theta1().sin() + spec.p2() * spec.theta2().sin(),
    }
}

/// Closed-form populations:
///
/// ```text
/// f00 = cos²γ cos²φ + C² sin²γ sin²φ
/// f01 = S² sin²γ
/// f10 = 0
/// f11 = C² sin²γ cos²φ + cos²γ sin²φ        (φ = 2π nδ)
/// ```
///
/// The raw values sum to `cos²γ + sin²γ (C² + S²)`, which exceeds 1 when the
/// two `ψ2` species overlap.
pub fn populations_analytic(spec: &SourceSpec, knob: &ControlKnob) -> PopulationTable {
    let SpeciesMoments { c, s } = species_moments(spec);
    let (sin_g, cos_g) = spec.gamma().sin_cos();
    let (sin_p, cos_p) = knob.angle().sin_cos();
    let (cg2, sg2) = (cos_g * cos_g, sin_g * sin_g);
    let (cp2, sp2) = (cos_p * cos_p, sin_p * sin_p);
    PopulationTable::from_raw(Populations {
        f00: cg2 * cp2 + c * c * sg2 * sp2,
        f01: s * s * sg2,
        f10: 0.0,
        f11: c * c * sg2 * cp2 + cg2 * sp2,
    })
}

/// Born-rule populations of a pair state, routed through the outcome
/// labeling. Raw and normalized views coincide.
pub fn populations_exact(state12: &PureState) -> Result<PopulationTable, StateError> {
    let coeffs = bell_coefficients(state12)?;
    let mut f = [0.0; 4];
    for label in BellLabel::ALL {
        let (i3, j4) = outcome_for(label);
        f[(2 * i3 + j4) as usize] = coeffs[label.index()].norm_sqr();
    }
    let pops = Populations {
        f00: f[0],
        f01: f[1],
        f10: f[2],
        f11: f[3],
    };
    Ok(PopulationTable {
        raw: pops,
        normalized: pops,
    })
}

/// One shot of the characterization measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: (u8, u8),
    /// Surviving pair state (qubits 0 and 1).
    pub post_state: PureState,
    pub probability: f64,
}

impl MeasurementRecord {
    pub fn label(&self) -> BellLabel {
        label_for_outcome(self.outcome.0, self.outcome.1)
    }

    /// Histogram key such as `"01"`.
    pub fn key(&self) -> String {
        format!("{}{}", self.outcome.0, self.outcome.1)
    }
}

/// Projective Bell-basis measurement of a pair, sampled by the Born rule.
pub fn nonlocal_bell_measurement<R: Rng + ?Sized>(
    state12: &PureState,
    rng: &mut R,
) -> Result<MeasurementRecord, StateError> {
    let weights = bell_coefficients(state12)?.map(|c| c.norm_sqr());
    let label = BellLabel::from_index(sample_index(&weights, rng));
    Ok(MeasurementRecord {
        outcome: outcome_for(label),
        post_state: bell_state(label),
        probability: weights[label.index()],
    })
}

/// A gate acting on the four-qubit register (pair followed by ancillas).
#[derive(Debug, Clone)]
pub struct CircuitGate {
    pub name: &'static str,
    pub unitary: UnitaryMatrix,
    pub targets: Vec<usize>,
}

/// Outcome of the circuit for a fixed ancilla readout.
#[derive(Debug, Clone)]
pub struct CircuitBranch {
    /// Raw ancilla bits before relabeling.
    pub copy_bits: (u8, u8),
    pub record: MeasurementRecord,
}

/// Ancilla-based realization of the Bell measurement:
/// disentangle the pair (`CNOT 0→1`, `H 0`), copy both bits onto the
/// ancillas (`CNOT 0→2`, `CNOT 1→3`), then re-entangle (`H 0`, `CNOT 0→1`).
/// The copied bits `(a, b)` are relabeled to `(a, a ⊕ b)`.
#[derive(Debug, Clone)]
pub struct CharacterizationCircuit {
    gates: Vec<CircuitGate>,
}

pub const PAIR: [usize; 2] = [0, 1];
pub const ANCILLAS: [usize; 2] = [2, 3];

pub fn circuit_realization() -> CharacterizationCircuit {
    let gate = |name, unitary, targets: &[usize]| CircuitGate {
        name,
        unitary,
        targets: targets.to_vec(),
    };
    CharacterizationCircuit {
        gates: vec![
            gate("CNOT", UnitaryMatrix::cnot(), &[0, 1]),
            gate("H", UnitaryMatrix::hadamard(), &[0]),
            gate("CNOT", UnitaryMatrix::cnot(), &[0, 2]),
            gate("CNOT", UnitaryMatrix::cnot(), &[1, 3]),
            gate("H", UnitaryMatrix::hadamard(), &[0]),
            gate("CNOT", UnitaryMatrix::cnot(), &[0, 1]),
        ],
    }
}

impl CharacterizationCircuit {
    pub fn gates(&self) -> &[CircuitGate] {
        &self.gates
    }

    /// Each gate lifted to a 16×16 unitary on the full register.
    pub fn unitaries(&self) -> Result<Vec<UnitaryMatrix>, StateError> {
        self.gates
            .iter()
            .map(|g| g.unitary.embed(&g.targets, 4))
            .collect()
    }

    /// Classical post-processing of the copied bits.
    pub fn relabel(&self, copy_bits: (u8, u8)) -> (u8, u8) {
        (copy_bits.0, copy_bits.0 ^ copy_bits.1)
    }

    /// The register just before the ancillas are read: `U (ψ ⊗ |00>)`.
    pub fn prepare(&self, state12: &PureState) -> Result<PureState, StateError> {
        if state12.num_qubits() != 2 {
            return Err(StateError::NotTwoQubit(state12.num_qubits()));
        }
        let mut register = tensor(state12, &PureState::zero(2)?)?;
        for g in &self.gates {
            register = apply_unitary(&register, &g.unitary, &g.targets)?;
        }
        Ok(register)
    }

    fn branch(&self, register: &PureState, copy_bits: (u8, u8)) -> Result<CircuitBranch, StateError> {
        let m = project_qubits(register, &ANCILLAS, &[copy_bits.0, copy_bits.1])?;
        let offset = (copy_bits.0 as usize) << 1 | copy_bits.1 as usize;
        let pair: Vec<_> = (0..4).map(|i| m.state.amplitudes()[(i << 2) | offset]).collect();
        Ok(CircuitBranch {
            copy_bits,
            record: MeasurementRecord {
                outcome: self.relabel(copy_bits),
                post_state: PureState::normalized(pair)?,
                probability: m.probability,
            },
        })
    }

    /// Every ancilla readout with nonzero probability, with its post-state.
    pub fn branches(&self, state12: &PureState) -> Result<Vec<CircuitBranch>, StateError> {
        let register = self.prepare(state12)?;
        let probs = outcome_probabilities(&register, &ANCILLAS)?;
        let mut out = Vec::new();
        for (k, p) in probs.iter().enumerate() {
            let bits = ((k >> 1) as u8, (k & 1) as u8);
            match self.branch(&register, bits) {
                Ok(b) => out.push(b),
                Err(StateError::ZeroProbability(_)) => debug_assert!(*p < 1e-15),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Relabeled outcome distribution as populations.
    pub fn populations(&self, state12: &PureState) -> Result<Populations, StateError> {
        let register = self.prepare(state12)?;
        let probs = outcome_probabilities(&register, &ANCILLAS)?;
        let mut f = [0.0; 4];
        for (k, p) in probs.into_iter().enumerate() {
            let (i3, j4) = self.relabel(((k >> 1) as u8, (k & 1) as u8));
            f[(2 * i3 + j4) as usize] = p;
        }
        Ok(Populations {
            f00: f[0],
            f01: f[1],
            f10: f[2],
            f11: f[3],
        })
    }

    /// Runs the circuit once, sampling the ancilla readout.
    pub fn run<R: Rng + ?Sized>(
        &self,
        state12: &PureState,
        rng: &mut R,
    ) -> Result<MeasurementRecord, StateError> {
        let register = self.prepare(state12)?;
        let probs = outcome_probabilities(&register, &ANCILLAS)?;
        let k = sample_index(&probs, rng);
        Ok(self.branch(&register, ((k >> 1) as u8, (k & 1) as u8))?.record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::controlled_emission;
    use crate::source::psi2;
    use crate::statevec::fidelity_up_to_phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn pops(f: [f64; 4]) -> Populations {
        Populations {
            f00: f[0],
            f01: f[1],
            f10: f[2],
            f11: f[3],
        }
    }

    #[test]
    fn outcome_labeling_round_trips() {
        assert_eq!(outcome_for(BellLabel::B00), (0, 0));
        assert_eq!(outcome_for(BellLabel::B01), (0, 1));
        assert_eq!(outcome_for(BellLabel::B10), (1, 1));
        assert_eq!(outcome_for(BellLabel::B11), (1, 0));
        for label in BellLabel::ALL {
            let (i, j) = outcome_for(label);
            assert_eq!(label_for_outcome(i, j), label);
        }
    }

    #[test]
    fn moments_examples() {
        let m = species_moments(&SourceSpec::new(0.2, 1.0, 0.0, 0.0, FRAC_PI_2).unwrap());
        assert!((m.c - 1.0).abs() < 1e-15 && m.s.abs() < 1e-15);
        let m = species_moments(&SourceSpec::new(0.2, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap());
        assert!(m.c.abs() < 1e-15 && (m.s - 1.0).abs() < 1e-15);
        let spec =
            SourceSpec::new(0.2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_4).unwrap();
        let m = species_moments(&spec);
        assert!((m.c - 1.0).abs() < 1e-15 && (m.s - 1.0).abs() < 1e-15);
        assert!((m.c * m.c + m.s * m.s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_examples() {
        let knob = ControlKnob::from_ndelta(0.17).unwrap();
        let phi = knob.angle();
        let spec = SourceSpec::new(0.0, 0.6, 0.8, 0.4, FRAC_PI_2 - 0.4).unwrap();
        let t = populations_analytic(&spec, &knob);
        let expected = pops([phi.cos().powi(2), 0.0, 0.0, phi.sin().powi(2)]);
        assert!(t.raw.max_abs_diff(&expected) < 1e-15);

        let spec = SourceSpec::new(FRAC_PI_4, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap();
        let t = populations_analytic(&spec, &ControlKnob::from_ndelta(0.125).unwrap());
        assert!(t.raw.max_abs_diff(&pops([0.25, 0.5, 0.0, 0.25])) < 1e-12);

        let spec = SourceSpec::new(0.7, 0.6, -0.8, 0.3, FRAC_PI_2 - 0.3).unwrap();
        let SpeciesMoments { c, s } = species_moments(&spec);
        let t = populations_analytic(&spec, &ControlKnob::new(3, 0.0).unwrap());
        let (sg2, cg2) = (0.7f64.sin().powi(2), 0.7f64.cos().powi(2));
        assert!(t.raw.max_abs_diff(&pops([cg2, s * s * sg2, 0.0, c * c * sg2])) < 1e-15);
        assert!((t.normalized.sum() - 1.0).abs() < 1e-15);
        assert!((t.raw.sum() - spec.raw_norm()).abs() < 1e-12);
    }

    #[test]
    fn exact_examples() {
        let t = populations_exact(&bell_state(BellLabel::B00)).unwrap();
        assert!(t.normalized.max_abs_diff(&pops([1.0, 0.0, 0.0, 0.0])) < 1e-15);

        let spec = SourceSpec::new(FRAC_PI_4, 1.0, 0.0, FRAC_PI_2, 0.0).unwrap();
        let knob = ControlKnob::from_ndelta(0.125).unwrap();
        let e = controlled_emission(&spec, &knob).unwrap();
        let exact = populations_exact(&e.state).unwrap();
        assert!(exact.normalized.max_abs_diff(&pops([0.25, 0.5, 0.0, 0.25])) < 1e-12);
        let analytic = populations_analytic(&spec, &knob);
        assert!(exact.normalized.max_abs_diff(&analytic.normalized) < 1e-12);

        let theta = 0.9;
        let t = populations_exact(&psi2(theta)).unwrap();
        let expected = pops([0.0, theta.sin().powi(2), 0.0, theta.cos().powi(2)]);
        assert!(t.normalized.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn measurement_of_bell_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = nonlocal_bell_measurement(&bell_state(BellLabel::B01), &mut rng).unwrap();
        assert_eq!(r.outcome, (0, 1));
        assert_eq!(r.post_state, bell_state(BellLabel::B01));
        assert!((r.probability - 1.0).abs() < 1e-15);

        let r = nonlocal_bell_measurement(&bell_state(BellLabel::B10), &mut rng).unwrap();
        assert_eq!(r.outcome, (1, 1));
        assert_eq!(r.label(), BellLabel::B10);
        assert!((r.probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measurement_of_equal_superposition() {
        let h = num_complex::Complex64::new(FRAC_1_SQRT_2, 0.0);
        let (state, _) = PureState::superpose(&[
            (h, &bell_state(BellLabel::B00)),
            (h, &bell_state(BellLabel::B01)),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let shots = 20_000;
        let mut counts = [0usize; 4];
        for _ in 0..shots {
            let r = nonlocal_bell_measurement(&state, &mut rng).unwrap();
            assert!((r.probability - 0.5).abs() < 1e-12);
            counts[(2 * r.outcome.0 + r.outcome.1) as usize] += 1;
        }
        assert_eq!(counts[2] + counts[3], 0);
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((counts[0] as f64 / shots as f64 - 0.5).abs() < 4.0 * sigma);
    }

    #[test]
    fn circuit_on_bell_inputs() {
        let circuit = circuit_realization();
        let branches = circuit.branches(&bell_state(BellLabel::B00)).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].copy_bits, (0, 0));
        assert_eq!(branches[0].record.outcome, (0, 0));
        let f = fidelity_up_to_phase(&branches[0].record.post_state, &bell_state(BellLabel::B00));
        assert!((f.unwrap() - 1.0).abs() < 1e-12);

        let branches = circuit.branches(&bell_state(BellLabel::B10)).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].copy_bits, (1, 0));
        assert_eq!(branches[0].record.outcome, (1, 1));
    }

    #[test]
    fn circuit_unitaries_compose_to_prepare() {
        let circuit = circuit_realization();
        let us = circuit.unitaries().unwrap();
        assert_eq!(us.len(), 6);
        let input = psi2(0.3);
        let mut register = tensor(&input, &PureState::zero(2).unwrap()).unwrap();
        for u in &us {
            assert_eq!(u.dim(), 16);
            register = u.apply(&register).unwrap();
        }
        assert!(register.max_abs_diff(&circuit.prepare(&input).unwrap()) < 1e-15);
    }

    #[test]
    fn circuit_run_is_seeded() {
        let circuit = circuit_realization();
        let state = psi2(0.6);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16)
                .map(|_| circuit.run(&state, &mut rng).unwrap().outcome)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert!(draw(5).iter().all(|o| *o == (0, 1) || *o == (1, 1)));
    }
}
