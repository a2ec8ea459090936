//! Parameter sweeps of the wall state: visibility against which-path
//! classification accuracy, and the incompatibility frontier.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::grid::Representation;
use crate::observables::{
    classification_accuracy, classification_probability, default_pivot, kennard_audit, visibility, AuditStatus,
    PathInferenceRule,
};
use crate::states::{build_state, momentum_support_width, support_width};

/// ε used for the support-width reading of ΔP (and ΔQ) in sweeps.
pub const SWEEP_SUPPORT_EPSILON: f64 = 0.01;

pub const CSV_HEADER: &str =
    "param,sigma_Q,delta_P_support,visibility,accuracy,uncertainty_product,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Which config field to vary and over which values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDescriptor {
    /// Dotted path of a numeric config field, e.g. `wall.sigma`.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl SweepDescriptor {
    pub fn validate(&self) -> Vec<(&'static str, String)> {
        let mut problems = Vec::new();
        if self.points < 3 {
            problems.push(("points", format!("at least 3 sweep points required, got {}", self.points)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            problems.push((
                "stop",
                format!("range [{}, {}] must be finite and non-degenerate", self.start, self.stop),
            ));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            problems.push(("spacing", "log spacing needs a positive range".to_string()));
        }
        problems
    }

    /// Monotone sweep grid including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.points - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "detail")]
pub enum CellStatus {
    Ok,
    MomentsUnresolved,
    KennardViolated,
    Failed(String),
}

impl CellStatus {
    pub fn is_usable(&self) -> bool {
        !matches!(self, CellStatus::Failed(_))
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::MomentsUnresolved => f.write_str("moments_unresolved"),
            CellStatus::KennardViolated => f.write_str("kennard_violated"),
            // commas would break the CSV column
            CellStatus::Failed(msg) => write!(f, "error: {}", msg.replace([',', '\n'], ";")),
        }
    }
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    /// Position standard deviation ΔQ.
    pub sigma_q: f64,
    pub sigma_p: f64,
    /// Position ε-support width.
    pub delta_q_support: f64,
    /// Momentum ε-support width ΔP.
    pub delta_p_support: f64,
    pub visibility: f64,
    pub accuracy: f64,
    /// Exact success probability of the same rule, without sampling noise.
    pub accuracy_exact: f64,
    /// `sigma_q · delta_p_support`
    pub uncertainty_product: f64,
    pub status: CellStatus,
}

impl SweepRow {
    fn failed(param: f64, err: &Error) -> Self {
        SweepRow {
            param,
            sigma_q: f64::NAN,
            sigma_p: f64::NAN,
            delta_q_support: f64::NAN,
            delta_p_support: f64::NAN,
            visibility: f64::NAN,
            accuracy: f64::NAN,
            accuracy_exact: f64::NAN,
            uncertainty_product: f64::NAN,
            status: CellStatus::Failed(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV body: fixed header plus one line per row.
    pub fn csv_body(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.param,
                r.sigma_q,
                r.delta_p_support,
                r.visibility,
                r.accuracy,
                r.uncertainty_product,
                r.status
            );
        }
        out
    }
}

fn evaluate_cell(base: &Scenario, parameter: &str, value: f64) -> Result<SweepRow> {
    let scenario = base.with_parameter(parameter, value)?;
    let seed = scenario.seed.ok_or_else(|| {
        Error::contract("sweeps need a seed for Monte Carlo path classification")
    })?;
    let particle = build_state(&scenario.particle, scenario.grid)?;
    let wall = build_state(&scenario.wall, scenario.grid)?;
    let pair = scenario.pipeline().run(&particle, &wall)?;

    let report = visibility(&wall, scenario.k)?;
    let delta_p_support = momentum_support_width(&wall, SWEEP_SUPPORT_EPSILON)?;
    let delta_q_support = support_width(&wall, SWEEP_SUPPORT_EPSILON, Representation::Position)?;
    let audit = kennard_audit(&wall)?;
    let pivot = match scenario.pivot {
        Some(p) => p,
        None => default_pivot(&wall)?,
    };
    let rule = PathInferenceRule::new(pivot, pair.applied_k)?;
    // every cell replays the same stream (common random numbers)
    let accuracy = classification_accuracy(&pair, &rule, scenario.samples, seed)?;
    let accuracy_exact = classification_probability(&pair, &rule)?;
    let status = match audit.status {
        AuditStatus::Satisfied => CellStatus::Ok,
        AuditStatus::Violated => CellStatus::KennardViolated,
        AuditStatus::MomentsUnresolved => CellStatus::MomentsUnresolved,
    };
    Ok(SweepRow {
        param: value,
        sigma_q: audit.sigma_q,
        sigma_p: audit.sigma_p,
        delta_q_support,
        delta_p_support,
        visibility: report.visibility,
        accuracy,
        accuracy_exact,
        uncertainty_product: audit.sigma_q * delta_p_support,
        status,
    })
}

/// Evaluates every sweep cell in parallel. Rows come back in sweep order;
/// a failing cell is recorded with its error and the sweep continues.
pub fn run_sweep(base: &Scenario, sweep: &SweepDescriptor) -> Result<SweepResult> {
    if let Some((field, msg)) = sweep.validate().into_iter().next() {
        return Err(Error::contract(format!("sweep {field}: {msg}")));
    }
    let rows = sweep
        .values()
        .into_par_iter()
        .map(|v| evaluate_cell(base, &sweep.parameter, v).unwrap_or_else(|e| SweepRow::failed(v, &e)))
        .collect();
    Ok(SweepResult {
        parameter: sweep.parameter.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierVerdict {
    pub compatible: bool,
    pub v_min: f64,
    pub acc_min: f64,
    /// Rows meeting both thresholds at once.
    pub witnesses: Vec<SweepRow>,
}

/// Whether any row reaches `visibility ≥ v_min` and `accuracy ≥ acc_min`.
pub fn incompatibility_frontier(result: &SweepResult, v_min: f64, acc_min: f64) -> FrontierVerdict {
    let witnesses: Vec<SweepRow> = result
        .rows
        .iter()
        .filter(|r| r.status.is_usable() && r.visibility >= v_min && r.accuracy >= acc_min)
        .cloned()
        .collect();
    FrontierVerdict {
        compatible: !witnesses.is_empty(),
        v_min,
        acc_min,
        witnesses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub param: f64,
    pub visibility: f64,
    pub accuracy: f64,
}

/// Usable rows ordered by increasing visibility.
pub fn frontier_curve(result: &SweepResult) -> Vec<FrontierPoint> {
    let mut points: Vec<FrontierPoint> = result
        .rows
        .iter()
        .filter(|r| r.status.is_usable())
        .map(|r| FrontierPoint {
            param: r.param,
            visibility: r.visibility,
            accuracy: r.accuracy,
        })
        .collect();
    points.sort_by(|a, b| a.visibility.total_cmp(&b.visibility));
    points
}

/// True when accuracy never increases as visibility increases.
pub fn is_monotone(curve: &[FrontierPoint]) -> bool {
    curve.windows(2).all(|w| w[1].accuracy <= w[0].accuracy)
}

pub fn frontier_csv_body(curve: &[FrontierPoint]) -> String {
    let mut out = String::from("param,visibility,accuracy\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.param, p.visibility, p.accuracy);
    }
    out
}
