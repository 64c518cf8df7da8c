//! Dense complex state vectors for registers of one to four qubits.
//!
//! Qubits are numbered from zero and indexed big-endian: in the basis index
//! `b0 b1 ... b(k-1)` qubit 0 is the most significant (leftmost) bit, so
//! `|01>` has index 1 and `|10>` has index 2.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub const MAX_QUBITS: usize = 4;

/// Tolerance used when validating caller-supplied normalization.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Squared norms below this are treated as a vanishing vector.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Born weights at or below this are considered impossible outcomes.
const ZERO_PROBABILITY: f64 = 1e-20;

const UNITARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("qubit count {0} is outside 1..=4")]
    QubitCount(usize),
    #[error("amplitude vector of length {0} is not 2^k for k in 1..=4")]
    Length(usize),
    #[error("amplitudes are not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("vector has vanishing norm (squared norm {0:e})")]
    DegenerateNorm(f64),
    #[error("tensor product needs {0} qubits, at most 4 are supported")]
    TooManyQubits(usize),
    #[error("unitary of dimension {dim} cannot act on {targets} target qubit(s)")]
    DimensionMismatch { dim: usize, targets: usize },
    #[error("qubit {0} appears more than once")]
    RepeatedQubit(usize),
    #[error("qubit {index} is out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("states act on different qubit counts ({0} vs {1})")]
    QubitMismatch(usize, usize),
    #[error("operation requires a 2-qubit state, got {0} qubit(s)")]
    NotTwoQubit(usize),
    #[error("no qubits selected for measurement")]
    EmptySelection,
    #[error("outcome {0:?} has zero probability")]
    ZeroProbability(Vec<u8>),
    #[error("matrix of dimension {0} is not supported (expected 2, 4, 8 or 16)")]
    UnsupportedDimension(usize),
    #[error("matrix is not unitary (max deviation from identity {0:e})")]
    NotUnitary(f64),
}

fn qubits_for_len(len: usize) -> Result<usize, StateError> {
    match len {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        16 => Ok(4),
        other => Err(StateError::Length(other)),
    }
}

/// A normalized pure state of `1..=4` qubits.
#[derive(Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalized to
    /// within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = squared_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state by rescaling arbitrary amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        Self::normalized_with_norm(amplitudes).map(|(state, _)| state)
    }

    /// Like [`PureState::normalized`], also returning the squared norm the
    /// input had before rescaling.
    pub fn normalized_with_norm(
        mut amplitudes: Vec<Complex64>,
    ) -> Result<(Self, f64), StateError> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = squared_norm(&amplitudes);
        if norm.is_nan() || norm < DEGENERATE_NORM {
            return Err(StateError::DegenerateNorm(norm));
        }
        let scale = 1.0 / norm.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok((
            Self {
                num_qubits,
                amplitudes,
            },
            norm,
        ))
    }

    /// Real-amplitude convenience constructor (must be normalized).
    pub fn from_real(amplitudes: &[f64]) -> Result<Self, StateError> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(StateError::QubitCount(num_qubits));
        }
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(StateError::Length(index));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self, StateError> {
        Self::basis(num_qubits, 0)
    }

    /// Normalized linear combination `sum c_k |s_k>` of states on a common
    /// register, together with the squared norm of the unnormalized sum.
    pub fn superpose(terms: &[(Complex64, &PureState)]) -> Result<(Self, f64), StateError> {
        let first = terms.first().ok_or(StateError::DegenerateNorm(0.0))?.1;
        let mut acc = vec![Complex64::new(0.0, 0.0); first.dim()];
        for (coeff, state) in terms {
            if state.num_qubits != first.num_qubits {
                return Err(StateError::QubitMismatch(first.num_qubits, state.num_qubits));
            }
            for (a, s) in acc.iter_mut().zip(&state.amplitudes) {
                *a += coeff * s;
            }
        }
        Self::normalized_with_norm(acc)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn squared_norm(&self) -> f64 {
        squared_norm(&self.amplitudes)
    }

    /// Born probability of basis index `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, StateError> {
        if self.num_qubits != other.num_qubits {
            return Err(StateError::QubitMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies every amplitude by the unit phase `exp(i phase)`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        Self {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest componentwise amplitude difference.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_index(&self, index: usize) -> Result<(), StateError> {
        if index >= self.num_qubits {
            Err(StateError::QubitOutOfRange {
                index,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn check_indices(&self, indices: &[usize]) -> Result<(), StateError> {
        for (k, &q) in indices.iter().enumerate() {
            self.check_index(q)?;
            if indices[..k].contains(&q) {
                return Err(StateError::RepeatedQubit(q));
            }
        }
        Ok(())
    }

    /// Bit mask of qubit `q` inside a basis index.
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureState[{}](", self.num_qubits)?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
        }
        write!(f, ")")
    }
}

fn squared_norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Kronecker product `a ⊗ b`; `a`'s qubits come first.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState, StateError> {
    let num_qubits = a.num_qubits + b.num_qubits;
    if num_qubits > MAX_QUBITS {
        return Err(StateError::TooManyQubits(num_qubits));
    }
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(PureState {
        num_qubits,
        amplitudes,
    })
}

/// A square unitary matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Validates dimension and unitarity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        if !matches!(dim, 2 | 4 | 8 | 16) {
            return Err(StateError::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(StateError::Length(entries.len()));
        }
        let m = Self { dim, entries };
        let dev = m.unitarity_defect();
        if dev > UNITARITY_TOLERANCE {
            return Err(StateError::NotUnitary(dev));
        }
        Ok(m)
    }

    fn from_real_unchecked(dim: usize, entries: &[f64]) -> Self {
        Self {
            dim,
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn identity(dim: usize) -> Result<Self, StateError> {
        if !matches!(dim, 2 | 4 | 8 | 16) {
            return Err(StateError::UnsupportedDimension(dim));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { dim, entries })
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real_unchecked(2, &[h, h, h, -h])
    }

    pub fn pauli_x() -> Self {
        Self::from_real_unchecked(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_z() -> Self {
        Self::from_real_unchecked(2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        Self {
            dim: 2,
            entries: vec![z, -i, i, z],
        }
    }

    /// Controlled NOT; the first target is the control.
    pub fn cnot() -> Self {
        #[rustfmt::skip]
        let m = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        Self::from_real_unchecked(4, &m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &UnitaryMatrix) -> Result<Self, StateError> {
        let dim = self.dim * other.dim;
        if dim > 1 << MAX_QUBITS {
            return Err(StateError::TooManyQubits(self.num_qubits() + other.num_qubits()));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.entry(r1, c1);
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        entries[(r1 * other.dim + r2) * dim + c1 * other.dim + c2] =
                            a * other.entry(r2, c2);
                    }
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn matmul(&self, other: &UnitaryMatrix) -> Result<Self, StateError> {
        if self.dim != other.dim {
            return Err(StateError::DimensionMismatch {
                dim: other.dim,
                targets: self.num_qubits(),
            });
        }
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entry(r, k);
                for c in 0..n {
                    entries[r * n + c] += a * other.entry(k, c);
                }
            }
        }
        Ok(Self { dim: n, entries })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entry(r, c).conj();
            }
        }
        Self { dim: n, entries }
    }

    /// Max entry deviation of `U U†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let v: Complex64 = (0..n)
                    .map(|k| self.entry(r, k) * self.entry(c, k).conj())
                    .sum();
                let expected = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - expected).norm());
            }
        }
        worst
    }

    /// Lifts this gate onto the full `num_qubits` register acting on `targets`.
    pub fn embed(&self, targets: &[usize], num_qubits: usize) -> Result<Self, StateError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(StateError::QubitCount(num_qubits));
        }
        let dim = 1 << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let image = apply_unitary(&PureState::basis(num_qubits, col)?, self, targets)?;
            for (row, amp) in image.amplitudes.iter().enumerate() {
                entries[row * dim + col] = *amp;
            }
        }
        Ok(Self { dim, entries })
    }

    /// Matrix-vector product on a whole register.
    pub fn apply(&self, state: &PureState) -> Result<PureState, StateError> {
        let targets: Vec<usize> = (0..state.num_qubits).collect();
        apply_unitary(state, self, &targets)
    }
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "UnitaryMatrix[{}x{}]", self.dim, self.dim)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let e = self.entry(r, c);
                write!(f, " {:+.4}{:+.4}i", e.re, e.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Applies `u` to the ordered `targets`, identity elsewhere.
///
/// `targets[0]` corresponds to the most significant bit of `u`'s row/column
/// index, so `apply_unitary(s, &cnot(), &[c, t])` uses qubit `c` as control.
pub fn apply_unitary(
    state: &PureState,
    u: &UnitaryMatrix,
    targets: &[usize],
) -> Result<PureState, StateError> {
    let k = targets.len();
    if k == 0 || u.dim != 1 << k {
        return Err(StateError::DimensionMismatch {
            dim: u.dim,
            targets: k,
        });
    }
    state.check_indices(targets)?;

    let masks: Vec<usize> = targets.iter().map(|&q| state.mask(q)).collect();
    let target_mask: usize = masks.iter().sum();
    let sub_index = |base: usize, sub: usize| -> usize {
        masks
            .iter()
            .enumerate()
            .filter(|(t, _)| (sub >> (k - 1 - t)) & 1 == 1)
            .fold(base, |acc, (_, m)| acc | m)
    };

    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    let mut gathered = vec![Complex64::new(0.0, 0.0); u.dim];
    for base in (0..state.dim()).filter(|b| b & target_mask == 0) {
        for (c, g) in gathered.iter_mut().enumerate() {
            *g = state.amplitudes[sub_index(base, c)];
        }
        for r in 0..u.dim {
            out[sub_index(base, r)] = (0..u.dim).map(|c| u.entry(r, c) * gathered[c]).sum();
        }
    }
    Ok(PureState {
        num_qubits: state.num_qubits,
        amplitudes: out,
    })
}

/// Label `(a, b)` of the Bell state `β_ab`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellLabel {
    a: bool,
    b: bool,
}

impl BellLabel {
    pub const B00: BellLabel = BellLabel { a: false, b: false };
    pub const B01: BellLabel = BellLabel { a: false, b: true };
    pub const B10: BellLabel = BellLabel { a: true, b: false };
    pub const B11: BellLabel = BellLabel { a: true, b: true };
    pub const ALL: [BellLabel; 4] = [Self::B00, Self::B01, Self::B10, Self::B11];

    pub fn new(a: bool, b: bool) -> Self {
        Self { a, b }
    }

    /// `Some` only for bits in `{0, 1}`.
    pub fn from_bits(a: u8, b: u8) -> Option<Self> {
        match (a, b) {
            (0 | 1, 0 | 1) => Some(Self::new(a == 1, b == 1)),
            _ => None,
        }
    }

    pub fn a(self) -> u8 {
        self.a as u8
    }

    pub fn b(self) -> u8 {
        self.b as u8
    }

    /// Position `2a + b` in coefficient arrays.
    pub fn index(self) -> usize {
        2 * self.a() as usize + self.b() as usize
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index & 3]
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "β{}{}", self.a(), self.b())
    }
}

/// Bell states:
/// `β00 = (|00>+|11>)/√2`, `β01 = (|01>+|10>)/√2`,
/// `β10 = (|00>-|11>)/√2`, `β11 = (|01>-|10>)/√2`.
pub fn bell_state(label: BellLabel) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if label.a { -h } else { h };
    let mut amps = [0.0; 4];
    if label.b {
        amps[1] = h;
        amps[2] = sign;
    } else {
        amps[0] = h;
        amps[3] = sign;
    }
    PureState {
        num_qubits: 2,
        amplitudes: amps.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    }
}

/// `c_ab = <β_ab|state>`, indexed by [`BellLabel::index`].
pub fn bell_coefficients(state: &PureState) -> Result<[Complex64; 4], StateError> {
    if state.num_qubits != 2 {
        return Err(StateError::NotTwoQubit(state.num_qubits));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a = &state.amplitudes;
    Ok([
        (a[0] + a[3]) * h,
        (a[1] + a[2]) * h,
        (a[0] - a[3]) * h,
        (a[1] - a[2]) * h,
    ])
}

/// Two-qubit state `sum c_ab β_ab` from Bell-basis coefficients indexed by
/// [`BellLabel::index`]. The coefficients must already be normalized.
pub fn from_bell_coefficients(coeffs: [Complex64; 4]) -> Result<PureState, StateError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let [c00, c01, c10, c11] = coeffs;
    PureState::from_amplitudes(vec![
        (c00 + c10) * h,
        (c01 + c11) * h,
        (c01 - c11) * h,
        (c00 - c10) * h,
    ])
}

/// `|<a|b>|`, which is 1 exactly when the states agree up to a global phase.
pub fn fidelity_up_to_phase(a: &PureState, b: &PureState) -> Result<f64, StateError> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// Result of a projective computational-basis measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    /// One bit per measured qubit, in the order requested.
    pub bits: Vec<u8>,
    pub state: PureState,
    pub probability: f64,
}

fn outcome_of(state: &PureState, indices: &[usize], basis_index: usize) -> usize {
    indices.iter().fold(0, |acc, &q| {
        (acc << 1) | usize::from(basis_index & state.mask(q) != 0)
    })
}

fn bits_of(outcome: usize, width: usize) -> Vec<u8> {
    (0..width).map(|t| ((outcome >> (width - 1 - t)) & 1) as u8).collect()
}

/// Born probabilities of all `2^k` joint outcomes on `indices`, outcome bits
/// packed big-endian in the order of `indices`.
pub fn outcome_probabilities(state: &PureState, indices: &[usize]) -> Result<Vec<f64>, StateError> {
    if indices.is_empty() {
        return Err(StateError::EmptySelection);
    }
    state.check_indices(indices)?;
    let mut probs = vec![0.0; 1 << indices.len()];
    for (i, a) in state.amplitudes.iter().enumerate() {
        probs[outcome_of(state, indices, i)] += a.norm_sqr();
    }
    Ok(probs)
}

/// Collapses `state` onto the given outcome of `indices` and renormalizes.
pub fn project_qubits(
    state: &PureState,
    indices: &[usize],
    bits: &[u8],
) -> Result<Measurement, StateError> {
    if indices.is_empty() {
        return Err(StateError::EmptySelection);
    }
    if bits.len() != indices.len() {
        return Err(StateError::DimensionMismatch {
            dim: bits.len(),
            targets: indices.len(),
        });
    }
    state.check_indices(indices)?;
    let wanted = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
    let mut amplitudes = state.amplitudes.clone();
    let mut probability = 0.0;
    for (i, a) in amplitudes.iter_mut().enumerate() {
        if outcome_of(state, indices, i) == wanted {
            probability += a.norm_sqr();
        } else {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    if probability <= ZERO_PROBABILITY {
        return Err(StateError::ZeroProbability(bits.to_vec()));
    }
    let scale = 1.0 / probability.sqrt();
    amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(Measurement {
        bits: bits_of(wanted, indices.len()),
        state: PureState {
            num_qubits: state.num_qubits,
            amplitudes,
        },
        probability,
    })
}

/// Index drawn from a discrete distribution; zero-weight entries are never
/// returned.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= ZERO_PROBABILITY {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Measures `indices` in the computational basis, sampling by the Born rule.
pub fn measure_qubits<R: Rng + ?Sized>(
    state: &PureState,
    indices: &[usize],
    rng: &mut R,
) -> Result<Measurement, StateError> {
    let probs = outcome_probabilities(state, indices)?;
    let outcome = sample_index(&probs, rng);
    project_qubits(state, indices, &bits_of(outcome, indices.len()))
}
