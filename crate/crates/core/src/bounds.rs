//! Finite-function-class generalization bound and its adapters for control
//! tasks and description-length metrics.
//!
//! With probability at least `1 - δ` the empirically optimal risk lies within
//!
//! ```text
//! B · sqrt(2 · ln(2|F| / δ) / n)
//! ```
//!
//! of the optimum, where `|F| = 2^bits · P` counts the representable
//! classifiers. Everything is evaluated in log space so `|F|` is never
//! materialized.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::domain::{ClassifierSpec, MetricKind};
use crate::error::{domain, Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-8;
pub const DEFAULT_BITS_PER_PARAM: u32 = 32;
pub const DEFAULT_PREQUENTIAL_C: f64 = 1.0;
pub const DEFAULT_T1_FRACTION: f64 = 0.001;

/// Hypothesis-space size of a probe whose parameters are stored with a fixed
/// bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionClassSpec {
    pub param_count: u64,
    pub bits_per_param: u32,
}

impl FunctionClassSpec {
    pub fn new(param_count: u64, bits_per_param: u32) -> Result<Self> {
        if param_count == 0 {
            return Err(domain("param_count", "must be at least 1"));
        }
        if bits_per_param == 0 {
            return Err(domain("bits_per_param", "must be at least 1"));
        }
        Ok(Self {
            param_count,
            bits_per_param,
        })
    }

    pub fn from_classifier(spec: &ClassifierSpec, bits_per_param: u32) -> Result<Self> {
        Self::new(spec.parameter_count(), bits_per_param)
    }

    /// `ln |F| = bits · ln 2 + ln P`.
    pub fn log_cardinality(&self) -> f64 {
        f64::from(self.bits_per_param) * LN_2 + (self.param_count as f64).ln()
    }
}

/// Metric range `B`. Only bounded metrics get a default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricRange(f64);

impl MetricRange {
    pub const UNIT: MetricRange = MetricRange(1.0);

    pub fn new(range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(domain("metric range", "must be a positive finite number"));
        }
        Ok(Self(range))
    }

    /// Default range for a metric; codelength metrics are refused.
    pub fn for_metric(kind: MetricKind) -> Result<Self> {
        kind.default_range()
            .map(Self)
            .ok_or(Error::UnboundedMetric(kind.name()))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(domain("delta", "must lie in (0,1)"))
    }
}

fn check_range(range: f64) -> Result<()> {
    MetricRange::new(range).map(|_| ())
}

/// `2 · ln(2|F| / δ)`: the numerator under the square root.
pub(crate) fn complexity_term(delta: f64, class_spec: &FunctionClassSpec) -> f64 {
    2.0 * (LN_2 + class_spec.log_cardinality() - delta.ln())
}

/// `B · sqrt(2 · ln(2|F|/δ) / n)`.
pub fn finite_class_margin(
    n: u64,
    delta: f64,
    range: f64,
    class_spec: &FunctionClassSpec,
) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", "must be at least 1"));
    }
    check_delta(delta)?;
    check_range(range)?;
    Ok(range * (complexity_term(delta, class_spec) / n as f64).sqrt())
}

/// Margin together with the confidence level it holds at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub margin: f64,
    /// Failure probability: the bound holds with probability `1 - effective_delta`.
    pub effective_delta: f64,
    /// Set for adapters whose margin is known to be loose.
    pub loose: bool,
}

/// Control-task score difference: the original and control bounds add, and
/// hold jointly with probability `(1 - δo)(1 - δc)`.
pub fn control_task_margin(
    n: u64,
    delta_original: f64,
    delta_control: f64,
    range: f64,
    class_spec: &FunctionClassSpec,
) -> Result<BoundResult> {
    let original = finite_class_margin(n, delta_original, range, class_spec)?;
    let control = finite_class_margin(n, delta_control, range, class_spec)?;
    // 1 - (1-a)(1-b) written to avoid cancellation for tiny deltas.
    let effective_delta = delta_original + delta_control - delta_original * delta_control;
    Ok(BoundResult {
        margin: original + control,
        effective_delta,
        loose: false,
    })
}

/// Variational MDL inherits the cross-entropy bound unchanged.
pub fn variational_mdl_margin(
    n: u64,
    delta: f64,
    range: f64,
    class_spec: &FunctionClassSpec,
) -> Result<f64> {
    finite_class_margin(n, delta, range, class_spec)
}

/// First-portion size `round(t1_fraction · n)`, validated to be at least 1.
pub fn first_portion(n: u64, t1_fraction: f64) -> Result<u64> {
    if !(t1_fraction > 0.0 && t1_fraction < 1.0) {
        return Err(domain("t1_fraction", "must lie in (0,1)"));
    }
    let t1 = (t1_fraction * n as f64).round() as u64;
    if t1 < 1 {
        return Err(domain(
            "t1",
            format!("round({t1_fraction} * {n}) is below 1; the first portion would be empty"),
        ));
    }
    Ok(t1)
}

/// Prequential MDL: the plain margin inflated by `C · n / t1`.
pub fn prequential_mdl_margin(
    n: u64,
    delta: f64,
    range: f64,
    class_spec: &FunctionClassSpec,
    c: f64,
    t1_fraction: f64,
) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain("C", "must be a positive finite number"));
    }
    let t1 = first_portion(n, t1_fraction)?;
    let inner = finite_class_margin(n, delta, range, class_spec)?;
    Ok(c * n as f64 / t1 as f64 * inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundAdapter {
    Plain,
    /// `control_delta` defaults to the query's δ.
    ControlTask { control_delta: Option<f64> },
    VariationalMdl,
    Prequential { c: f64, t1_fraction: f64 },
}

/// A full bound evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: u64,
    pub delta: f64,
    pub metric_range: f64,
    pub class_spec: FunctionClassSpec,
    pub adapter: BoundAdapter,
}

impl BoundQuery {
    pub fn evaluate(&self) -> Result<BoundResult> {
        let Self {
            n,
            delta,
            metric_range,
            class_spec,
            adapter,
        } = *self;
        match adapter {
            BoundAdapter::Plain => Ok(BoundResult {
                margin: finite_class_margin(n, delta, metric_range, &class_spec)?,
                effective_delta: delta,
                loose: false,
            }),
            BoundAdapter::ControlTask { control_delta } => control_task_margin(
                n,
                delta,
                control_delta.unwrap_or(delta),
                metric_range,
                &class_spec,
            ),
            BoundAdapter::VariationalMdl => Ok(BoundResult {
                margin: variational_mdl_margin(n, delta, metric_range, &class_spec)?,
                effective_delta: delta,
                loose: false,
            }),
            BoundAdapter::Prequential { c, t1_fraction } => Ok(BoundResult {
                margin: prequential_mdl_margin(
                    n,
                    delta,
                    metric_range,
                    &class_spec,
                    c,
                    t1_fraction,
                )?,
                effective_delta: delta,
                loose: true,
            }),
        }
    }
}
