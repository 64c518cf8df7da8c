//! Emission-source states: the single-qubit component bases, the two
//! entangled species `ψ1`, `ψ2(θ)`, and their weighted superposition.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::statevec::{tensor, PureState, StateError};

/// Tolerance for the `p1² + p2² = 1` and `θ1 + θ2 = π/2` constraints.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("p1^2 + p2^2 = 1 violated: p1^2 + p2^2 = {0}")]
    WeightNorm(f64),
    #[error("theta1 + theta2 = pi/2 violated: theta1 + theta2 = {0}")]
    AngleSum(f64),
    #[error("gamma = {0} is outside [0, pi/2]")]
    GammaRange(f64),
    #[error("parameter {0} is not finite")]
    NotFinite(&'static str),
    #[error("emitted superposition is degenerate (squared norm {0:e})")]
    Degenerate(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Emission parameters. `α1 = cos γ` weights `ψ1`; `α2 = sin γ` weights
/// `p1 ψ2(θ1) + p2 ψ2(θ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    gamma: f64,
    p1: f64,
    p2: f64,
    theta1: f64,
    theta2: f64,
}

impl SourceSpec {
    pub fn new(gamma: f64, p1: f64, p2: f64, theta1: f64, theta2: f64) -> Result<Self, SourceError> {
        for (name, v) in [
            ("gamma", gamma),
            ("p1", p1),
            ("p2", p2),
            ("theta1", theta1),
            ("theta2", theta2),
        ] {
            if !v.is_finite() {
                return Err(SourceError::NotFinite(name));
            }
        }
        if !(-VALIDATION_TOLERANCE..=FRAC_PI_2 + VALIDATION_TOLERANCE).contains(&gamma) {
            return Err(SourceError::GammaRange(gamma));
        }
        let weights = p1 * p1 + p2 * p2;
        if (weights - 1.0).abs() > VALIDATION_TOLERANCE {
            return Err(SourceError::WeightNorm(weights));
        }
        let angles = theta1 + theta2;
        if (angles - FRAC_PI_2).abs() > VALIDATION_TOLERANCE {
            return Err(SourceError::AngleSum(angles));
        }
        Ok(Self {
            gamma,
            p1,
            p2,
            theta1,
            theta2,
        })
    }

    /// Derives `p2 = ±√(1 - p1²)` and `θ2 = π/2 - θ1`.
    pub fn from_primary(gamma: f64, p1: f64, p2_negative: bool, theta1: f64) -> Result<Self, SourceError> {
        if !p1.is_finite() {
            return Err(SourceError::NotFinite("p1"));
        }
        if p1.abs() > 1.0 + VALIDATION_TOLERANCE {
            return Err(SourceError::WeightNorm(p1 * p1));
        }
        let magnitude = (1.0 - p1 * p1).max(0.0).sqrt();
        let p2 = if p2_negative { -magnitude } else { magnitude };
        Self::new(gamma, p1, p2, theta1, FRAC_PI_2 - theta1)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn alpha1(&self) -> f64 {
        self.gamma.cos()
    }

    pub fn alpha2(&self) -> f64 {
        self.gamma.sin()
    }

    /// `p1 p2 sin 2θ1`, the overlap term that makes the two `ψ2` species
    /// non-orthogonal.
    pub fn species_overlap(&self) -> f64 {
        self.p1 * self.p2 * (2.0 * self.theta1).sin()
    }

    /// Closed form of the squared norm of the unnormalized superposition:
    /// `1 + sin²γ · 2 p1 p2 sin 2θ1`.
    pub fn raw_norm(&self) -> f64 {
        1.0 + self.gamma.sin().powi(2) * 2.0 * self.species_overlap()
    }
}

/// The single-qubit states generating `ψ1` and `ψ2(θ)` at a given angle.
#[derive(Debug, Clone)]
pub struct ComponentStates {
    pub phi: PureState,
    pub eta: PureState,
    pub varphi: PureState,
    pub mu: PureState,
}

fn qubit(a0: f64, a1: f64) -> PureState {
    PureState::from_real(&[a0, a1]).expect("half-angle components are normalized")
}

pub fn component_states(theta: f64) -> ComponentStates {
    let (s, c) = (theta / 2.0).sin_cos();
    ComponentStates {
        phi: qubit(c, s),
        eta: qubit(s, -c),
        varphi: qubit(s, c),
        mu: qubit(c, -s),
    }
}

fn pair(a: &PureState, b: &PureState) -> PureState {
    tensor(a, b).expect("two single-qubit factors")
}

/// `(|φ1 φ2> + |η1 η2>)/√2` built at `theta`; the result is `β00` for every
/// angle.
pub fn psi1_at(theta: f64) -> PureState {
    let k = component_states(theta);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::superpose(&[(h, &pair(&k.phi, &k.phi)), (h, &pair(&k.eta, &k.eta))])
        .expect("orthogonal product terms")
        .0
}

/// `ψ1` (equal to `β00`).
pub fn psi1() -> PureState {
    psi1_at(0.0)
}

/// `ψ2(θ) = (|ϕ1 ϕ2> - |μ1 μ2>)/√2 = sin θ β01 - cos θ β10`.
pub fn psi2(theta: f64) -> PureState {
    let k = component_states(theta);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::superpose(&[
        (Complex64::new(h, 0.0), &pair(&k.varphi, &k.varphi)),
        (Complex64::new(-h, 0.0), &pair(&k.mu, &k.mu)),
    ])
    .expect("orthogonal product terms")
    .0
}

/// A physical state together with the squared norm of the unnormalized
/// superposition it was built from.
#[derive(Debug, Clone)]
pub struct Emission {
    pub state: PureState,
    pub raw_norm: f64,
}

/// Normalized `α1 a + α2 (p1 b1 + p2 b2)` with degenerate-norm guard.
pub(crate) fn combine(
    spec: &SourceSpec,
    first: &PureState,
    species1: &PureState,
    species2: &PureState,
) -> Result<Emission, SourceError> {
    let a2 = spec.alpha2();
    let terms = [
        (Complex64::new(spec.alpha1(), 0.0), first),
        (Complex64::new(a2 * spec.p1, 0.0), species1),
        (Complex64::new(a2 * spec.p2, 0.0), species2),
    ];
    match PureState::superpose(&terms) {
        Ok((state, raw_norm)) => Ok(Emission { state, raw_norm }),
        Err(StateError::DegenerateNorm(n)) => Err(SourceError::Degenerate(n)),
        Err(e) => Err(e.into()),
    }
}

/// The emitted state `α1 ψ1 + α2 (p1 ψ2(θ1) + p2 ψ2(θ2))`, normalized.
pub fn emitted_state(spec: &SourceSpec) -> Result<Emission, SourceError> {
    combine(spec, &psi1(), &psi2(spec.theta1), &psi2(spec.theta2))
}
