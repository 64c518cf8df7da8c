#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;
use spinpair::{ControlKnob, PureState, SourceSpec};

pub type Matrix4 = [[Complex64; 4]; 4];

/// Random valid source spec whose superposition stays well away from the
/// degenerate cancellation point.
pub fn random_spec<R: Rng>(rng: &mut R) -> SourceSpec {
    loop {
        let gamma = rng.random_range(0.0..=FRAC_PI_2);
        let p1 = rng.random_range(-1.0..=1.0);
        let negative = rng.random_bool(0.5);
        let theta1 = rng.random_range(-PI..PI);
        let spec = SourceSpec::from_primary(gamma, p1, negative, theta1).unwrap();
        if spec.raw_norm() > 1e-3 {
            return spec;
        }
    }
}

/// Spec with `p1 p2 sin 2θ1 = 0`, so `C² + S² = 1`.
pub fn random_orthogonal_spec<R: Rng>(rng: &mut R, gamma: f64) -> SourceSpec {
    if rng.random_bool(0.5) {
        let theta1 = rng.random_range(0.0..FRAC_PI_2);
        let p1 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        SourceSpec::new(gamma, p1, 0.0, theta1, FRAC_PI_2 - theta1).unwrap()
    } else {
        let p1 = rng.random_range(-1.0..=1.0);
        SourceSpec::from_primary(gamma, p1, rng.random_bool(0.5), 0.0).unwrap()
    }
}

pub fn random_knob<R: Rng>(rng: &mut R) -> ControlKnob {
    let n = rng.random_range(0..40u64);
    ControlKnob::new(n, rng.random_range(-0.5..=0.5)).unwrap()
}

/// Haar-ish random pure state from normalized complex Gaussian-like draws.
pub fn random_state<R: Rng>(rng: &mut R, num_qubits: usize) -> PureState {
    let dim = 1 << num_qubits;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    PureState::normalized(amps).unwrap()
}

fn matmul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// `exp(-i h t)` by a 40-term Taylor series on `h t / 2^s`, squared `s`
/// times.
pub fn taylor_propagator(h: &Matrix4, t: f64) -> Matrix4 {
    let norm: f64 = h
        .iter()
        .map(|row| row.iter().map(|e| e.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.5 {
        squarings += 1;
    }
    let scale = -Complex64::i() * t / f64::powi(2.0, squarings);
    let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            a[r][c] = h[r][c] * scale;
        }
    }
    let mut sum = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut term = [[Complex64::new(0.0, 0.0); 4]; 4];
    for k in 0..4 {
        sum[k][k] = Complex64::new(1.0, 0.0);
        term[k][k] = Complex64::new(1.0, 0.0);
    }
    for order in 1..=40 {
        term = matmul(&term, &a);
        for r in 0..4 {
            for c in 0..4 {
                term[r][c] /= order as f64;
                sum[r][c] += term[r][c];
            }
        }
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

pub fn apply4(m: &Matrix4, v: &[Complex64]) -> Vec<Complex64> {
    (0..4).map(|r| (0..4).map(|c| m[r][c] * v[c]).sum()).collect()
}

/// Closest fraction to `x` with denominator at most `max_den`, found by
/// trying every denominator and comparing distances in exact arithmetic.
/// Returns `(p, q)`; ties keep the smaller denominator.
pub fn brute_force_best(x: f64, max_den: u64) -> (i64, u64) {
    let exact = BigRational::from_float(x).unwrap();
    let mut best: Option<(i64, u64, BigRational)> = None;
    for q in 1..=max_den {
        let centre = (x * q as f64).round() as i64;
        for p in centre - 1..=centre + 1 {
            let err = (&exact - BigRational::new(BigInt::from(p), BigInt::from(q))).abs();
            if best.as_ref().is_none_or(|b| err < b.2) {
                best = Some((p, q, err));
            }
        }
    }
    let (p, q, _) = best.unwrap();
    (p, q)
}

/// `|x - p/q|` in exact arithmetic.
pub fn exact_distance(x: f64, p: i64, q: u64) -> BigRational {
    (BigRational::from_float(x).unwrap() - BigRational::new(BigInt::from(p), BigInt::from(q))).abs()
}

/// Born weights of the Bell species computed straight from amplitudes,
/// `|<β_ab|ψ>|²` with the Bell vectors written out by hand.
pub fn bell_weights_by_hand(state: &PureState) -> [f64; 4] {
    let a = state.amplitudes();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        ((a[0] + a[3]) * h).norm_sqr(),
        ((a[1] + a[2]) * h).norm_sqr(),
        ((a[0] - a[3]) * h).norm_sqr(),
        ((a[1] - a[2]) * h).norm_sqr(),
    ]
}
