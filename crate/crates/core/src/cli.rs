//! Command-line front end: `simulate`, `sample`, `region`, `solve`, `infer`.
//!
//! Exit codes: 0 success, 2 config or flag validation, 3 domain
//! precondition, 4 mathematical infeasibility or singularity. Results go to
//! stdout; diagnostics go to stderr.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterize::{
    nonlocal_bell_measurement, populations_analytic, populations_exact, species_moments,
    Populations, SpeciesMoments,
};
use crate::control::{infer_parameters, region_grid, solve_ndelta, SteeringError};
use crate::distortion::{controlled_emission, ControlKnob, FieldParams};
use crate::source::SourceSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Source(#[from] crate::source::SourceError),
    #[error("{0}")]
    Knob(#[from] crate::distortion::DistortionError),
    #[error("p2 = {p2} contradicts p2_negative = {negative}")]
    P2Sign { p2: f64, negative: bool },
    #[error("knob must be exactly one of {{n, delta}} or {{n, J, B1, B2, max_den}}")]
    KnobForm,
    #[error("knob is missing n")]
    MissingN,
}

/// Flat JSON experiment description, echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub p1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2_negative: Option<bool>,
    pub theta1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub exchange: Option<f64>,
    #[serde(rename = "B1", default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(rename = "B2", default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_den: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A config that passed validation.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: SourceSpec,
    pub knob: ControlKnob,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        let negative = match (self.p2, self.p2_negative) {
            (Some(p2), Some(neg)) if p2 != 0.0 && (p2 < 0.0) != neg => {
                return Err(ConfigError::P2Sign { p2, negative: neg })
            }
            (Some(p2), _) => p2 < 0.0,
            (None, neg) => neg.unwrap_or(false),
        };
        let derived = SourceSpec::from_primary(self.gamma, self.p1, negative, self.theta1)?;
        let spec = SourceSpec::new(
            self.gamma,
            self.p1,
            self.p2.unwrap_or(derived.p2()),
            self.theta1,
            self.theta2.unwrap_or(derived.theta2()),
        )?;

        let fields = [self.exchange, self.b1, self.b2];
        let any_field = fields.iter().any(Option::is_some) || self.max_den.is_some();
        let n = self.n.ok_or(ConfigError::MissingN)?;
        let knob = match (self.delta, any_field) {
            (Some(delta), false) => ControlKnob::new(n, delta)?,
            (None, true) => match (self.exchange, self.b1, self.b2, self.max_den) {
                (Some(j), Some(b1), Some(b2), Some(max_den)) => {
                    ControlKnob::from_fields(&FieldParams::new(j, b1, b2), n, max_den)?
                }
                _ => return Err(ConfigError::KnobForm),
            },
            _ => return Err(ConfigError::KnobForm),
        };
        Ok(Experiment {
            config: self.clone(),
            spec,
            knob,
        })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub populations_raw: Populations,
    pub populations_normalized: Populations,
    pub populations_exact: Populations,
    pub moments: SpeciesMoments,
    pub raw_norm: f64,
    pub histogram: Option<BTreeMap<String, u64>>,
    pub seed: u64,
}

pub const HISTOGRAM_KEYS: [&str; 4] = ["00", "01", "10", "11"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("no shot count given (use --shots or the config's shots field)")]
    MissingShots,
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::MissingShots => EXIT_INVALID,
            RunError::ZeroShots => EXIT_PRECONDITION,
        }
    }
}

/// Analytic and exact populations for a validated experiment.
pub fn simulate(exp: &Experiment, seed: u64) -> Result<RunReport, RunError> {
    let analytic = populations_analytic(&exp.spec, &exp.knob);
    let emission = controlled_emission(&exp.spec, &exp.knob).map_err(ConfigError::from)?;
    let exact = populations_exact(&emission.state).expect("emission is a 2-qubit state");
    Ok(RunReport {
        config: exp.config.clone(),
        populations_raw: analytic.raw,
        populations_normalized: analytic.normalized,
        populations_exact: exact.normalized,
        moments: species_moments(&exp.spec),
        raw_norm: emission.raw_norm,
        histogram: None,
        seed,
    })
}

/// [`simulate`] plus `shots` seeded characterization measurements.
pub fn sample(exp: &Experiment, shots: u64, seed: u64) -> Result<RunReport, RunError> {
    if shots == 0 {
        return Err(RunError::ZeroShots);
    }
    let mut report = simulate(exp, seed)?;
    let emission = controlled_emission(&exp.spec, &exp.knob).map_err(ConfigError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram: BTreeMap<String, u64> =
        HISTOGRAM_KEYS.iter().map(|k| (k.to_string(), 0)).collect();
    for _ in 0..shots {
        let record = nonlocal_bell_measurement(&emission.state, &mut rng)
            .expect("emission is a 2-qubit state");
        *histogram.entry(record.key()).or_default() += 1;
    }
    report.histogram = Some(histogram);
    Ok(report)
}

/// Feasibility slice as CSV (`f00,f11,feasible,s_squared,ndelta`).
pub fn region_csv(gamma: f64, resolution: usize) -> Result<String, SteeringError> {
    let grid = region_grid(gamma, resolution)?;
    let mut out = String::from("f00,f11,feasible,s_squared,ndelta\n");
    for p in grid {
        match p.solution {
            Some(s) => out.push_str(&format!(
                "{},{},1,{},{}\n",
                p.f00_target, p.f11_target, s.s_squared, s.ndelta_principal
            )),
            None => out.push_str(&format!("{},{},0,,\n", p.f00_target, p.f11_target)),
        }
    }
    Ok(out)
}

/// Parses plain numbers as well as `pi`, `pi/4`, `3pi/8`, `3*pi/8`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let lower = t.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return Err(format!("not a number or multiple of pi: {text:?}"));
    };
    let bad = || format!("not a number or multiple of pi: {text:?}");
    let head = lower[..pos].trim().trim_end_matches('*').trim();
    let tail = lower[pos + 2..].trim();
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
        None if tail.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(factor * PI / divisor)
}

#[derive(Debug, Parser)]
#[command(name = "spinpair", version, about = "Entangled-pair source characterization and control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic and exact populations for a config file.
    Simulate { config: PathBuf },
    /// Finite-shot characterization histogram.
    Sample {
        config: PathBuf,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Feasible (f00, f11) slice as CSV.
    Region {
        #[arg(long, value_parser = parse_angle, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long)]
        resolution: usize,
    },
    /// Control setting reaching target f00, f11.
    Solve {
        #[arg(long, value_parser = parse_angle, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        f00: f64,
        #[arg(long, allow_negative_numbers = true)]
        f11: f64,
    },
    /// Emission parameters from measured populations.
    Infer {
        #[arg(long, allow_negative_numbers = true)]
        f00: f64,
        #[arg(long, allow_negative_numbers = true)]
        f01: f64,
        #[arg(long, allow_negative_numbers = true)]
        f11: f64,
        #[arg(long, value_parser = parse_ratio, allow_negative_numbers = true)]
        ndelta: f64,
    },
}

/// Accepts decimals and simple fractions such as `1/12`.
fn parse_ratio(text: &str) -> Result<f64, String> {
    match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number {text:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number {text:?}"))?;
            Ok(a / b)
        }
        None => text.trim().parse().map_err(|_| format!("bad number {text:?}")),
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)
}

fn diagnostic(err: &mut dyn Write, kind: &str, detail: serde_json::Value) {
    let mut body = serde_json::json!({ "error": kind });
    if let (Some(map), serde_json::Value::Object(extra)) = (body.as_object_mut(), detail) {
        map.extend(extra);
    }
    let _ = writeln!(err, "{body}");
}

fn load_experiment(path: &Path, err: &mut dyn Write) -> Result<Experiment, i32> {
    ExperimentConfig::load(path)
        .and_then(|c| c.validate())
        .map_err(|e| {
            let _ = writeln!(err, "error: invalid config {}: {e}", path.display());
            EXIT_INVALID
        })
}

fn report_run(result: Result<RunReport, RunError>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match result {
        Ok(report) => match emit_json(out, &report) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn steering_exit(e: &SteeringError, err: &mut dyn Write) -> i32 {
    match e {
        SteeringError::Infeasible(bound) => {
            diagnostic(
                err,
                "infeasible",
                serde_json::json!({ "bound": bound, "requires": bound.describe() }),
            );
            EXIT_INFEASIBLE
        }
        SteeringError::Degenerate(d) => {
            diagnostic(err, "degenerate", serde_json::json!({ "denominator": d }));
            EXIT_INFEASIBLE
        }
        other => {
            diagnostic(err, "precondition", serde_json::json!({ "message": other.to_string() }));
            EXIT_PRECONDITION
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };

    match cli.command {
        Command::Simulate { config } => match load_experiment(&config, err) {
            Ok(exp) => {
                let seed = exp.config.seed.unwrap_or(0);
                report_run(simulate(&exp, seed), out, err)
            }
            Err(code) => code,
        },
        Command::Sample {
            config,
            shots,
            seed,
        } => match load_experiment(&config, err) {
            Ok(exp) => {
                let seed = seed.or(exp.config.seed).unwrap_or(0);
                let result = shots
                    .or(exp.config.shots)
                    .ok_or(RunError::MissingShots)
                    .and_then(|n| sample(&exp, n, seed));
                report_run(result, out, err)
            }
            Err(code) => code,
        },
        Command::Region { gamma, resolution } => match region_csv(gamma, resolution) {
            Ok(csv) => match out.write_all(csv.as_bytes()) {
                Ok(()) => EXIT_OK,
                Err(_) => 1,
            },
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INVALID
            }
        },
        Command::Solve { gamma, f00, f11 } => match solve_ndelta(gamma, f00, f11) {
            Ok(solution) => match emit_json(out, &solution) {
                Ok(()) => EXIT_OK,
                Err(_) => 1,
            },
            Err(e) => steering_exit(&e, err),
        },
        Command::Infer {
            f00,
            f01,
            f11,
            ndelta,
        } => match infer_parameters(f00, f01, f11, ndelta) {
            Ok(estimate) => match emit_json(out, &estimate) {
                Ok(()) => EXIT_OK,
                Err(_) => 1,
            },
            Err(e) => {
                let kind = if e.is_precondition() { "precondition" } else { "infeasible" };
                diagnostic(err, kind, serde_json::json!({ "message": e.to_string() }));
                if e.is_precondition() {
                    EXIT_PRECONDITION
                } else {
                    EXIT_INFEASIBLE
                }
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert!(parse_angle("tau").is_err());
        assert_eq!(parse_ratio("1/12").unwrap(), 1.0 / 12.0);
    }

    #[test]
    fn config_validation_messages() {
        let bad = config(r#"{"gamma":0.3,"p1":0.9,"p2":0.9,"theta1":0.2,"n":1,"delta":0.1}"#);
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("p1^2 + p2^2 = 1"), "{msg}");

        let bad = config(r#"{"gamma":0.3,"p1":1.0,"theta1":0.2,"theta2":0.2,"n":1,"delta":0.1}"#);
        assert!(bad.validate().unwrap_err().to_string().contains("theta1 + theta2 = pi/2"));

        let both = config(
            r#"{"gamma":0.3,"p1":1.0,"theta1":0.2,"n":1,"delta":0.1,"J":1.0,"B1":0.1,"B2":0.0,"max_den":10}"#,
        );
        assert!(matches!(both.validate(), Err(ConfigError::KnobForm)));

        let partial = config(r#"{"gamma":0.3,"p1":1.0,"theta1":0.2,"n":1,"J":1.0}"#);
        assert!(matches!(partial.validate(), Err(ConfigError::KnobForm)));

        let sign = config(
            r#"{"gamma":0.3,"p1":0.6,"p2":0.8,"p2_negative":true,"theta1":0.2,"n":1,"delta":0.1}"#,
        );
        assert!(matches!(sign.validate(), Err(ConfigError::P2Sign { .. })));

        assert!(ExperimentConfig::from_json(r#"{"gamma":0.3,"p1":1,"theta1":0,"bogus":1}"#).is_err());
    }

    #[test]
    fn field_knob_form() {
        let exp = config(
            r#"{"gamma":0.3,"p1":0.6,"p2_negative":true,"theta1":0.2,"n":4,"J":1.0,"B1":0.2,"B2":0.0,"max_den":10}"#,
        )
        .validate()
        .unwrap();
        assert!((exp.spec.p2() + 0.8).abs() < 1e-12);
        let prov = exp.knob.provenance().unwrap();
        assert_eq!((prov.q_num, prov.q_den), (1, 2));
        assert_eq!(exp.knob.n(), 4);
    }
}
