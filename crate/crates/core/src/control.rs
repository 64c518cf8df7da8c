//! Steering and inference on the `f00`/`f11` populations.
//!
//! The control angle `φ = 2π nδ` only moves weight between `f00` and `f11`;
//! `f01 = S² sin²γ` is untouched. Given a source angle `γ` and target values
//! for `f00` and `f11`, [`solve_ndelta`] returns
//!
//! ```text
//! S²     = (1 - f00 - f11) / sin²γ
//! sin²φ  = (cos²γ - f00) / (cos 2γ + 1 - f00 - f11)
//! ```
//!
//! and [`infer_parameters`] goes the other way, recovering `sin²γ`, `C²` and
//! `S²` from measured populations at a known `nδ`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use thiserror::Error;

/// Slack allowed on probability bounds before a point is declared infeasible.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// Below this the steering denominator `cos 2γ + 1 - f00 - f11` is treated
/// as zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Systems with `|cos 4π nδ|` at or below this are singular.
pub const SINGULAR_DETERMINANT: f64 = 1e-9;

const INFERENCE_TOLERANCE: f64 = 1e-9;

/// Which feasibility bound a steering target violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `f00` or `f11` is negative.
    NonNegativePopulation,
    /// `f00 + f11 > 1`.
    ProbabilityBudget,
    /// `sin²2πnδ` outside `[0, 1]`.
    MixingRange,
    /// `S²` or `C²` outside `[0, 1]`.
    SpeciesRange,
}

impl Bound {
    pub fn describe(self) -> &'static str {
        match self {
            Bound::NonNegativePopulation => "f00 >= 0 and f11 >= 0",
            Bound::ProbabilityBudget => "f00 + f11 <= 1",
            Bound::MixingRange => "0 <= sin^2(2 pi n delta) <= 1",
            Bound::SpeciesRange => "0 <= S^2 = (1 - f00 - f11)/sin^2(gamma) <= 1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteeringError {
    #[error("gamma = {0} is outside (0, pi/2]")]
    GammaRange(f64),
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("degenerate steering: cos 2gamma + 1 - f00 - f11 = {0:e}")]
    Degenerate(f64),
    #[error("infeasible target: requires {}", .0.describe())]
    Infeasible(Bound),
}

impl SteeringError {
    /// Precondition failures as opposed to mathematical infeasibility.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            SteeringError::GammaRange(_) | SteeringError::NotFinite(_) | SteeringError::Resolution(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringSolution {
    /// `sin²2πnδ`.
    pub s_squared: f64,
    /// Representative `nδ ∈ [0, 1/4]`; other solutions are `k/2 ± nδ`.
    #[serde(rename = "ndelta")]
    pub ndelta_principal: f64,
    #[serde(rename = "required_C_squared")]
    pub required_c_squared: f64,
    #[serde(rename = "required_S_squared")]
    pub required_s_squared: f64,
}

fn clamp_unit(x: f64, bound: Bound) -> Result<f64, SteeringError> {
    if (-BOUND_TOLERANCE..=1.0 + BOUND_TOLERANCE).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(SteeringError::Infeasible(bound))
    }
}

/// Control setting that steers the source to the target `(f00, f11)`.
pub fn solve_ndelta(gamma: f64, f00: f64, f11: f64) -> Result<SteeringSolution, SteeringError> {
    for (name, v) in [("gamma", gamma), ("f00", f00), ("f11", f11)] {
        if !v.is_finite() {
            return Err(SteeringError::NotFinite(name));
        }
    }
    if !(gamma > 0.0 && gamma <= FRAC_PI_2 + BOUND_TOLERANCE) {
        return Err(SteeringError::GammaRange(gamma));
    }
    if f00 < -BOUND_TOLERANCE || f11 < -BOUND_TOLERANCE {
        return Err(SteeringError::Infeasible(Bound::NonNegativePopulation));
    }
    let remainder = 1.0 - f00 - f11;
    if remainder < -BOUND_TOLERANCE {
        return Err(SteeringError::Infeasible(Bound::ProbabilityBudget));
    }

    let (sin_g, cos_g) = gamma.sin_cos();
    let denominator = (2.0 * gamma).cos() + 1.0 - f00 - f11;
    if denominator.abs() < DEGENERATE_DENOMINATOR {
        return Err(SteeringError::Degenerate(denominator));
    }
    let s_squared = clamp_unit((cos_g * cos_g - f00) / denominator, Bound::MixingRange)?;
    let required_s_squared = clamp_unit(remainder.max(0.0) / (sin_g * sin_g), Bound::SpeciesRange)?;
    Ok(SteeringSolution {
        s_squared,
        ndelta_principal: s_squared.sqrt().asin() / (2.0 * PI),
        required_c_squared: 1.0 - required_s_squared,
        required_s_squared,
    })
}

/// One cell of a feasibility scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub f00_target: f64,
    pub f11_target: f64,
    pub feasible: bool,
    pub solution: Option<SteeringSolution>,
    /// Why the point is infeasible, when it is.
    #[serde(skip)]
    pub failure: Option<SteeringError>,
}

pub fn feasible(gamma: f64, f00: f64, f11: f64) -> RegionPoint {
    let result = solve_ndelta(gamma, f00, f11);
    RegionPoint {
        f00_target: f00,
        f11_target: f11,
        feasible: result.is_ok(),
        solution: result.as_ref().ok().copied(),
        failure: result.err(),
    }
}

/// Evaluates [`feasible`] on the uniform `resolution × resolution` grid over
/// `[0, 1]²`; row-major with `f00` as the row coordinate.
pub fn region_grid(gamma: f64, resolution: usize) -> Result<Vec<RegionPoint>, SteeringError> {
    if resolution < 2 {
        return Err(SteeringError::Resolution(resolution));
    }
    let step = |k: usize| k as f64 / (resolution - 1) as f64;
    Ok((0..resolution)
        .flat_map(|r| (0..resolution).map(move |c| (step(r), step(c))))
        .map(|(f00, f11)| feasible(gamma, f00, f11))
        .collect())
}

/// Principal `nδ` consistent with populations `(f00, f11)` at angle `γ`.
pub fn infer_ndelta(f00: f64, f11: f64, gamma: f64) -> Result<f64, SteeringError> {
    solve_ndelta(gamma, f00, f11).map(|s| s.ndelta_principal)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error("frequencies must sum to 1, got f00 + f01 + f11 = {0}")]
    NotNormalized(f64),
    #[error("singular system: |cos 4 pi n delta| = {0:e} (n delta near 1/8 mod 1/4)")]
    Singular(f64),
    #[error("cos^2(gamma) estimate {0} lies outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("sin^2(gamma) = {0:e}: source emits only beta00, C and S are unidentifiable")]
    Unidentifiable(f64),
    #[error("{name} estimate {value} lies outside [0, 1]")]
    MomentOutOfRange { name: &'static str, value: f64 },
}

impl InferenceError {
    pub fn is_precondition(&self) -> bool {
        matches!(self, InferenceError::NotFinite(_) | InferenceError::NotNormalized(_))
    }
}

/// Emission parameters recovered from populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionEstimate {
    pub sin2_gamma: f64,
    #[serde(rename = "C_squared")]
    pub c_squared: f64,
    #[serde(rename = "S_squared")]
    pub s_squared: f64,
    /// `|C² + S² - 1|`.
    pub residual: f64,
}

fn unit_estimate(name: &'static str, value: f64) -> Result<f64, InferenceError> {
    if (-INFERENCE_TOLERANCE..=1.0 + INFERENCE_TOLERANCE).contains(&value) {
        Ok(value.clamp(0.0, 1.0))
    } else {
        Err(InferenceError::MomentOutOfRange { name, value })
    }
}

/// Solves
///
/// ```text
/// f00 = a cos²φ + b sin²φ
/// f11 = a sin²φ + b cos²φ      (a = cos²γ, b = sin²γ C², φ = 2π nδ)
/// ```
///
/// for `a` and `b`, then reads `S² sin²γ` off `f01`.
pub fn infer_parameters(
    f00: f64,
    f01: f64,
    f11: f64,
    ndelta: f64,
) -> Result<EmissionEstimate, InferenceError> {
    for (name, v) in [("f00", f00), ("f01", f01), ("f11", f11), ("ndelta", ndelta)] {
        if !v.is_finite() {
            return Err(InferenceError::NotFinite(name));
        }
    }
    let total = f00 + f01 + f11;
    if (total - 1.0).abs() > 1e-6 {
        return Err(InferenceError::NotNormalized(total));
    }
    let (sin_p, cos_p) = (2.0 * PI * ndelta).sin_cos();
    let (c2, s2) = (cos_p * cos_p, sin_p * sin_p);
    let det = c2 - s2;
    if det.abs() <= SINGULAR_DETERMINANT {
        return Err(InferenceError::Singular(det.abs()));
    }
    let a = (f00 * c2 - f11 * s2) / det;
    let b = (f11 * c2 - f00 * s2) / det;
    if !(-INFERENCE_TOLERANCE..=1.0 + INFERENCE_TOLERANCE).contains(&a) {
        return Err(InferenceError::GammaOutOfRange(a));
    }
    let sin2_gamma = 1.0 - a.clamp(0.0, 1.0);
    if sin2_gamma < INFERENCE_TOLERANCE {
        return Err(InferenceError::Unidentifiable(sin2_gamma));
    }
    let c_raw = b / sin2_gamma;
    let s_raw = f01 / sin2_gamma;
    let residual = (c_raw + s_raw - 1.0).abs();
    Ok(EmissionEstimate {
        sin2_gamma,
        c_squared: unit_estimate("C_squared", c_raw)?,
        s_squared: unit_estimate("S_squared", s_raw)?,
        residual,
    })
}
