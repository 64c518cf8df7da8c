//! Heisenberg-exchange distortion of a spin pair and the residual mismatch
//! left after control.
//!
//! The pair Hamiltonian is `H = -J σ1·σ2 + B1 σ1z + B2 σ2z` with ħ = 1, so
//! energies and inverse times share units. It is block diagonal over
//! `{|00>, |11>}` and `{|01>, |10>}`; [`evolve`] exponentiates the two
//! blocks in closed form.
//!
//! After control the pair is left with a mismatch `δ = j - Q(j)` between
//! `j = J / sqrt(B₋² + 4J²)` and a rational approximation `Q(j)`. Repeating
//! the control `n` times yields the states built by [`controlled_psi1`] and
//! [`controlled_psi2`], which depend on `n` and `δ` only through `nδ`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::source::{combine, Emission, SourceError, SourceSpec};
use crate::statevec::{from_bell_coefficients, PureState, StateError, UnitaryMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistortionError {
    #[error("j is undefined when J = 0 and B1 = B2")]
    ZeroDenominator,
    #[error("J = 0: the small-mismatch estimate divides by J^2")]
    ZeroCoupling,
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error("denominator bound must be at least 1")]
    ZeroDenominatorBound,
    #[error("mismatch |delta| = {0} exceeds 1/2")]
    MismatchRange(f64),
    #[error("provenance j - Q = {expected} disagrees with delta = {delta}")]
    Provenance { expected: f64, delta: f64 },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Exchange coupling and local fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldParams {
    #[serde(rename = "J")]
    pub exchange: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
}

impl FieldParams {
    pub fn new(exchange: f64, b1: f64, b2: f64) -> Self {
        Self { exchange, b1, b2 }
    }

    /// Field inhomogeneity `B₋ = B1 - B2`.
    pub fn b_minus(&self) -> f64 {
        self.b1 - self.b2
    }
}

/// Hermitian 4×4 Hamiltonian in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMatrix {
    entries: [[Complex64; 4]; 4],
}

impl HamiltonianMatrix {
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    /// Max-row-sum (infinity) norm.
    pub fn norm_inf(&self) -> f64 {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &PureState) -> Result<Vec<Complex64>, StateError> {
        if state.num_qubits() != 2 {
            return Err(StateError::NotTwoQubit(state.num_qubits()));
        }
        let a = state.amplitudes();
        Ok((0..4)
            .map(|r| (0..4).map(|c| self.entries[r][c] * a[c]).sum())
            .collect())
    }
}

/// Pauli matrices as plain arrays, used to assemble `H` term by term.
fn pauli(which: usize) -> [[Complex64; 2]; 2] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    match which {
        0 => [[l, o], [o, l]],
        1 => [[o, l], [l, o]],
        2 => [[o, -i], [i, o]],
        _ => [[l, o], [o, -l]],
    }
}

fn kron2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 4]; 4] {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    out
}

pub fn hamiltonian(fp: &FieldParams) -> HamiltonianMatrix {
    let mut entries = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut add = |m: [[Complex64; 4]; 4], w: f64| {
        for r in 0..4 {
            for c in 0..4 {
                entries[r][c] += m[r][c] * w;
            }
        }
    };
    for axis in 1..=3 {
        add(kron2(&pauli(axis), &pauli(axis)), -fp.exchange);
    }
    add(kron2(&pauli(3), &pauli(0)), fp.b1);
    add(kron2(&pauli(0), &pauli(3)), fp.b2);
    HamiltonianMatrix { entries }
}

/// `exp(-i h t)` for the Hermitian 2×2 block `[[a, b], [b*, d]]`.
fn block_propagator(a: f64, b: Complex64, d: f64, t: f64) -> [[Complex64; 2]; 2] {
    let mean = 0.5 * (a + d);
    let half_split = 0.5 * (a - d);
    let omega = (half_split * half_split + b.norm_sqr()).sqrt();
    let (sin_wt, cos_wt) = (omega * t).sin_cos();
    // sin(ωt)/ω → t as ω → 0
    let sinc = if omega * t.abs() < 1e-300 || omega == 0.0 {
        t
    } else {
        sin_wt / omega
    };
    let phase = Complex64::from_polar(1.0, -mean * t);
    let mi = -Complex64::i() * sinc;
    [
        [phase * (cos_wt + mi * half_split), phase * mi * b],
        [phase * mi * b.conj(), phase * (cos_wt - mi * half_split)],
    ]
}

/// `exp(-i H t)` as a 4×4 unitary.
pub fn evolution_operator(fp: &FieldParams, t: f64) -> UnitaryMatrix {
    let h = hamiltonian(fp);
    let mut u = vec![Complex64::new(0.0, 0.0); 16];
    for block in [[0usize, 3usize], [1, 2]] {
        let [i, k] = block;
        let p = block_propagator(h.entries[i][i].re, h.entries[i][k], h.entries[k][k].re, t);
        for (r, &row) in block.iter().enumerate() {
            for (c, &col) in block.iter().enumerate() {
                u[row * 4 + col] = p[r][c];
            }
        }
    }
    UnitaryMatrix::new(4, u).expect("closed-form block propagator is unitary")
}

/// Exact free evolution of a pair state for time `t`.
pub fn evolve(state: &PureState, fp: &FieldParams, t: f64) -> Result<PureState, StateError> {
    if state.num_qubits() != 2 {
        return Err(StateError::NotTwoQubit(state.num_qubits()));
    }
    evolution_operator(fp, t).apply(state)
}

/// `j = J / sqrt(B₋² + 4J²)`.
pub fn j_parameter(fp: &FieldParams) -> Result<f64, DistortionError> {
    let bm = fp.b_minus();
    let denom = (bm * bm + 4.0 * fp.exchange * fp.exchange).sqrt();
    if !denom.is_finite() || !fp.exchange.is_finite() {
        return Err(DistortionError::NotFinite("field parameters"));
    }
    if denom == 0.0 {
        return Err(DistortionError::ZeroDenominator);
    }
    Ok(fp.exchange / denom)
}

/// The rough estimate `δ ≈ -B₋² / 4J²`, returned as stated.
pub fn small_mismatch_estimate(fp: &FieldParams) -> Result<f64, DistortionError> {
    if fp.exchange == 0.0 {
        return Err(DistortionError::ZeroCoupling);
    }
    let bm = fp.b_minus();
    Ok(-bm * bm / (4.0 * fp.exchange * fp.exchange))
}

/// `j - 1/2` evaluated exactly; the mismatch against `Q(j) = 1/2` that the
/// estimate above approximates. Leading order is `-B₋²/16J²`.
pub fn half_mismatch(fp: &FieldParams) -> Result<f64, DistortionError> {
    Ok(j_parameter(fp)? - 0.5)
}

/// Best rational approximation `numerator / denominator` of some `j` and the
/// resulting mismatch `delta = j - numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalApprox {
    pub numerator: i64,
    pub denominator: u64,
    pub delta: f64,
}

impl RationalApprox {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// Closest fraction to `j` with denominator at most `max_den`.
///
/// Runs the continued-fraction expansion on the exact binary value of `j`,
/// then compares the last admissible convergent against the largest
/// admissible semiconvergent. Ties keep the convergent.
pub fn rational_approx(j: f64, max_den: u64) -> Result<RationalApprox, DistortionError> {
    if !j.is_finite() {
        return Err(DistortionError::NotFinite("j"));
    }
    if max_den == 0 {
        return Err(DistortionError::ZeroDenominatorBound);
    }
    let exact = BigRational::from_float(j).expect("finite float");
    let target = exact.abs();
    let bound = big(max_den);

    let (num, den) = if *target.denom() <= bound {
        (target.numer().clone(), target.denom().clone())
    } else {
        let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), big(1), big(1), BigInt::zero());
        let (mut n, mut d) = (target.numer().clone(), target.denom().clone());
        loop {
            let (a, rem) = n.div_rem(&d);
            let q2 = &q0 + &a * &q1;
            if q2 > bound {
                break;
            }
            let p2 = &p0 + &a * &p1;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            n = std::mem::replace(&mut d, rem);
        }
        let k = (&bound - &q0) / &q1;
        let semi = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
        let conv = BigRational::new(p1, q1);
        if (&conv - &target).abs() <= (&semi - &target).abs() {
            (conv.numer().clone(), conv.denom().clone())
        } else {
            (semi.numer().clone(), semi.denom().clone())
        }
    };

    let magnitude = num.to_i64().expect("numerator bounded by max_den");
    let numerator = if j < 0.0 { -magnitude } else { magnitude };
    let denominator = den.to_u64().expect("denominator bounded by max_den");
    Ok(RationalApprox {
        numerator,
        denominator,
        delta: j - numerator as f64 / denominator as f64,
    })
}

/// Where a knob's mismatch came from when it was derived from field values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnobProvenance {
    pub j: f64,
    pub q_num: i64,
    pub q_den: u64,
}

/// Control repetition count `n` and residual mismatch `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlKnob {
    n: u64,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<KnobProvenance>,
}

impl ControlKnob {
    /// A deliberately chosen mismatch.
    pub fn new(n: u64, delta: f64) -> Result<Self, DistortionError> {
        if !delta.is_finite() {
            return Err(DistortionError::NotFinite("delta"));
        }
        if delta.abs() > 0.5 {
            return Err(DistortionError::MismatchRange(delta));
        }
        Ok(Self {
            n,
            delta,
            provenance: None,
        })
    }

    /// Knob whose `δ = j - Q(j)` comes from the fields and a denominator
    /// bound for `Q`.
    pub fn from_fields(fp: &FieldParams, n: u64, max_den: u64) -> Result<Self, DistortionError> {
        let j = j_parameter(fp)?;
        let q = rational_approx(j, max_den)?;
        Self::with_provenance(
            n,
            q.delta,
            KnobProvenance {
                j,
                q_num: q.numerator,
                q_den: q.denominator,
            },
        )
    }

    pub fn with_provenance(
        n: u64,
        delta: f64,
        provenance: KnobProvenance,
    ) -> Result<Self, DistortionError> {
        let expected = provenance.j - provenance.q_num as f64 / provenance.q_den as f64;
        if (expected - delta).abs() > 1e-15 {
            return Err(DistortionError::Provenance { expected, delta });
        }
        let mut knob = Self::new(n, delta)?;
        knob.provenance = Some(provenance);
        Ok(knob)
    }

    /// Knob with `n = 1` and `δ = ndelta`, for sweeps over the product.
    pub fn from_ndelta(ndelta: f64) -> Result<Self, DistortionError> {
        Self::new(1, ndelta)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn provenance(&self) -> Option<KnobProvenance> {
        self.provenance
    }

    pub fn ndelta(&self) -> f64 {
        self.n as f64 * self.delta
    }

    /// `2π nδ`.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.ndelta()
    }
}

/// `(1 + i e^{iφ} sin φ) β00 - i e^{iφ} sin φ β10` with `φ = 2π nδ`.
pub fn controlled_psi1(knob: &ControlKnob) -> PureState {
    let (s, _) = knob.angle().sin_cos();
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, knob.angle());
    let zero = Complex64::new(0.0, 0.0);
    from_bell_coefficients([1.0 + i * e * s, zero, -i * e * s, zero])
        .expect("controlled state has unit norm")
}

/// `sin θ β01 - e^{iφ} cos φ cos θ β10 + i e^{iφ} sin φ cos θ β00`.
pub fn controlled_psi2(theta: f64, knob: &ControlKnob) -> PureState {
    let (s, c) = knob.angle().sin_cos();
    let (st, ct) = theta.sin_cos();
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, knob.angle());
    let zero = Complex64::new(0.0, 0.0);
    from_bell_coefficients([i * e * s * ct, Complex64::new(st, 0.0), -e * c * ct, zero])
        .expect("controlled state has unit norm")
}

/// The source superposition with each species replaced by its controlled
/// form. The raw squared norm does not depend on the knob.
pub fn controlled_emission(spec: &SourceSpec, knob: &ControlKnob) -> Result<Emission, SourceError> {
    combine(
        spec,
        &controlled_psi1(knob),
        &controlled_psi2(spec.theta1(), knob),
        &controlled_psi2(spec.theta2(), knob),
    )
}
