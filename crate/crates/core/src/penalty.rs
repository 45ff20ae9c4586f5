// SPDX-License-Identifier: MIT OR Apache-2.0

//! Penalty selection: the log-spaced grid, label error curves, and three
//! ways of predicting a per-sequence penalty.
//!
//! * `bic0` predicts `λ = ln N` (unsupervised).
//! * `constant1` picks the grid penalty with the fewest total train errors.
//! * `linear2` fits `ln λ = w · ln ln N + b` by minimizing a squared hinge
//!   loss against per-sequence target intervals of `ln λ`. With `w = 1`,
//!   `b = 0` it reduces to `bic0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::metrics::{total_errors, ErrorCounts};
use crate::solver::opart;

/// Number of grid penalties: `10^-5, 10^-4.5, …, 10^5`.
pub const GRID_LEN: usize = 21;

pub fn penalty_grid() -> Vec<f64> {
    (0..GRID_LEN)
        .map(|k| 10f64.powf(-5.0 + 0.5 * k as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bic0,
    Constant1,
    Linear2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bic0, Method::Constant1, Method::Linear2];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Bic0 => "bic0",
            Method::Constant1 => "constant1",
            Method::Linear2 => "linear2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('.', "").as_str() {
            "bic0" | "bic" => Ok(Method::Bic0),
            "constant1" | "constant" => Ok(Method::Constant1),
            "linear2" | "linear" => Ok(Method::Linear2),
            other => Err(Error::InvalidArgument(format!(
                "unknown penalty method {other:?} (expected bic0, constant1 or linear2)"
            ))),
        }
    }
}

/// Train label errors of OPART over the penalty grid for one sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub sequence_id: String,
    /// Number of data points in the sequence.
    pub n: usize,
    pub penalties: Vec<f64>,
    pub errors: Vec<ErrorCounts>,
}

pub fn compute_error_curve(
    sequence_id: impl Into<String>,
    seq: &DataSequence,
    train_labels: &LabelSet,
) -> Result<ErrorCurve> {
    let penalties = penalty_grid();
    let errors = penalties
        .iter()
        .map(|&lambda| opart(seq, lambda).map(|fit| total_errors(train_labels, &fit.changepoints)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorCurve {
        sequence_id: sequence_id.into(),
        n: seq.len(),
        penalties,
        errors,
    })
}

/// Target interval for `ln λ`; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TargetInterval {
    pub fn is_unbounded(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    /// The same interval expressed in `log10 λ`.
    pub fn log10_bounds(&self) -> (f64, f64) {
        let k = std::f64::consts::LN_10;
        (self.lo / k, self.hi / k)
    }
}

/// Longest contiguous run of minimal-error grid points, first run on ties,
/// widened to `∓∞` where it touches the ends of the grid.
pub fn target_interval(curve: &ErrorCurve) -> Result<TargetInterval> {
    let errs: Vec<usize> = curve.errors.iter().map(ErrorCounts::errors).collect();
    let min = *errs
        .iter()
        .min()
        .ok_or_else(|| Error::InvalidArgument("empty error curve".into()))?;
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < errs.len() {
        if errs[i] != min {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < errs.len() && errs[i + 1] == min {
            i += 1;
        }
        if best.is_none_or(|(s, e)| i - start > e - s) {
            best = Some((start, i));
        }
        i += 1;
    }
    let (start, end) = best.expect("min is attained");
    let last = errs.len() - 1;
    Ok(TargetInterval {
        lo: if start == 0 { f64::NEG_INFINITY } else { curve.penalties[start].ln() },
        hi: if end == last { f64::INFINITY } else { curve.penalties[end].ln() },
    })
}

/// A fitted penalty predictor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum PenaltyModel {
    Bic0,
    Constant1 { penalty: f64 },
    Linear2 { w: f64, b: f64 },
}

impl PenaltyModel {
    pub fn method(&self) -> Method {
        match self {
            PenaltyModel::Bic0 => Method::Bic0,
            PenaltyModel::Constant1 { .. } => Method::Constant1,
            PenaltyModel::Linear2 { .. } => Method::Linear2,
        }
    }

    /// `key=value` lines: `method`, `w`, `b`. The constant model stores its penalty in `b`.
    pub fn to_key_value(&self) -> String {
        let (w, b) = match *self {
            PenaltyModel::Bic0 => (1.0, 0.0),
            PenaltyModel::Constant1 { penalty } => (0.0, penalty),
            PenaltyModel::Linear2 { w, b } => (w, b),
        };
        format!("method={}\nw={w:?}\nb={b:?}\n", self.method())
    }

    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut method = None;
        let (mut w, mut b) = (None, None);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {line:?}")))?;
            let number = || {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("{key}: not a number: {value:?}")))
            };
            match key.trim() {
                "method" => method = Some(value.parse::<Method>()?),
                "w" => w = Some(number()?),
                "b" => b = Some(number()?),
                other => return Err(Error::InvalidArgument(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::InvalidArgument(format!("missing key {k:?}"));
        match method.ok_or_else(|| missing("method"))? {
            Method::Bic0 => Ok(PenaltyModel::Bic0),
            Method::Constant1 => Ok(PenaltyModel::Constant1 {
                penalty: b.ok_or_else(|| missing("b"))?,
            }),
            Method::Linear2 => Ok(PenaltyModel::Linear2 {
                w: w.ok_or_else(|| missing("w"))?,
                b: b.ok_or_else(|| missing("b"))?,
            }),
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "penalty prediction needs at least 2 data points, got {n}"
        )));
    }
    Ok(())
}

/// `ln n`.
pub fn bic_penalty(n: usize) -> Result<f64> {
    check_size(n)?;
    Ok((n as f64).ln())
}

/// The `linear2` feature `ln ln n`.
pub fn log_log_feature(n: usize) -> Result<f64> {
    check_size(n)?;
    Ok((n as f64).ln().ln())
}

pub fn predict_penalty(model: &PenaltyModel, n: usize) -> Result<f64> {
    check_size(n)?;
    Ok(match *model {
        PenaltyModel::Bic0 => (n as f64).ln(),
        PenaltyModel::Constant1 { penalty } => penalty,
        // exp(w · ln ln n + b), written so that (w, b) = (1, 0) gives ln n exactly.
        PenaltyModel::Linear2 { w, b } => b.exp() * (n as f64).ln().powf(w),
    })
}

/// Grid penalty minimizing the summed errors; ties go to the larger penalty.
pub fn best_constant(curves: &[ErrorCurve]) -> Result<PenaltyModel> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no error curves".into()))?;
    let len = first.penalties.len();
    if curves.iter().any(|c| c.errors.len() != len || c.penalties != first.penalties) {
        return Err(Error::InvalidArgument("error curves use different grids".into()));
    }
    let totals: Vec<usize> = (0..len)
        .map(|k| curves.iter().map(|c| c.errors[k].errors()).sum())
        .collect();
    let min = *totals.iter().min().expect("nonempty grid");
    let k = totals.iter().rposition(|&t| t == min).expect("min attained");
    Ok(PenaltyModel::Constant1 {
        penalty: first.penalties[k],
    })
}

/// Optimizer settings for [`fit_linear2`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HingeOptions {
    pub margin: f64,
    pub step: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for HingeOptions {
    fn default() -> Self {
        Self {
            margin: 1.0,
            step: 0.01,
            max_iterations: 5000,
            gradient_tolerance: 1e-6,
        }
    }
}

/// Mean squared hinge loss of `ln λ_i = w x_i + b` against the target intervals.
pub fn squared_hinge_loss(w: f64, b: f64, features: &[f64], intervals: &[TargetInterval], margin: f64) -> f64 {
    let total: f64 = features
        .iter()
        .zip(intervals)
        .map(|(&x, iv)| {
            let p = w * x + b;
            let below = (iv.lo + margin - p).max(0.0);
            let above = (p - (iv.hi - margin)).max(0.0);
            below * below + above * above
        })
        .sum();
    total / features.len().max(1) as f64
}

/// Analytic gradient of [`squared_hinge_loss`] with respect to `(w, b)`.
pub fn squared_hinge_gradient(
    w: f64,
    b: f64,
    features: &[f64],
    intervals: &[TargetInterval],
    margin: f64,
) -> (f64, f64) {
    let (mut gw, mut gb) = (0.0, 0.0);
    for (&x, iv) in features.iter().zip(intervals) {
        let p = w * x + b;
        let d = -2.0 * (iv.lo + margin - p).max(0.0) + 2.0 * (p - (iv.hi - margin)).max(0.0);
        gw += d * x;
        gb += d;
    }
    let scale = features.len().max(1) as f64;
    (gw / scale, gb / scale)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub model: PenaltyModel,
    pub iterations: usize,
    pub converged: bool,
    /// Every interval was unbounded, so the initialization was returned unchanged.
    pub degenerate: bool,
    /// Loss before the first step and after each step.
    pub loss_history: Vec<f64>,
}

/// Full-gradient descent from `(w, b) = (1, 0)`.
pub fn fit_linear2(features: &[f64], intervals: &[TargetInterval], opts: &HingeOptions) -> Result<LinearFit> {
    if features.is_empty() || features.len() != intervals.len() {
        return Err(Error::InvalidArgument(format!(
            "need matching nonempty features and intervals, got {} and {}",
            features.len(),
            intervals.len()
        )));
    }
    if let Some(i) = intervals.iter().position(|iv| iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi) {
        return Err(Error::InvalidArgument(format!("interval {} has lo > hi", i + 1)));
    }
    let (mut w, mut b) = (1.0, 0.0);
    let loss = |w, b| squared_hinge_loss(w, b, features, intervals, opts.margin);
    let mut loss_history = vec![loss(w, b)];
    if intervals.iter().all(TargetInterval::is_unbounded) {
        return Ok(LinearFit {
            model: PenaltyModel::Linear2 { w, b },
            iterations: 0,
            converged: false,
            degenerate: true,
            loss_history,
        });
    }
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let (gw, gb) = squared_hinge_gradient(w, b, features, intervals, opts.margin);
        if gw.hypot(gb) < opts.gradient_tolerance {
            converged = true;
            break;
        }
        w -= opts.step * gw;
        b -= opts.step * gb;
        iterations += 1;
        loss_history.push(loss(w, b));
    }
    Ok(LinearFit {
        model: PenaltyModel::Linear2 { w, b },
        iterations,
        converged,
        degenerate: false,
        loss_history,
    })
}

/// Train `method` on a set of error curves.
pub fn train_model(curves: &[ErrorCurve], method: Method) -> Result<PenaltyModel> {
    match method {
        Method::Bic0 => Ok(PenaltyModel::Bic0),
        Method::Constant1 => best_constant(curves),
        Method::Linear2 => {
            let features = curves.iter().map(|c| log_log_feature(c.n)).collect::<Result<Vec<_>>>()?;
            let intervals = curves.iter().map(target_interval).collect::<Result<Vec<_>>>()?;
            Ok(fit_linear2(&features, &intervals, &HingeOptions::default())?.model)
        }
    }
}
