//! Expected benefit, risk and net benefit of a disclosure, and the share /
//! withhold decision built on them.
//!
//! For a consumer with inference table `I`, impact tables `Z^B`, `Z^R`, value
//! vectors `b`, `r` and received-message distribution `x`:
//!
//! ```text
//! E[B] = bᵀ · Z^B · I · x
//! E[R] = rᵀ · Z^R · I · x
//! E[C] = E[B] − E[R]          share iff E[C] ≥ 0
//! ```
//!
//! Benefit and risk stay separate until the final subtraction.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::propagation::{self, MessageDistribution, ParallelOp, SerialOp};
use crate::scalar::Scalar;
use crate::scenario::{AgentId, ConsumerModel, ImpactModel, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactDistribution<T> {
    pub consumer: AgentId,
    pub z: Vec<T>,
}

/// `z̃ = Z · (I · x)`.
pub fn impact_distribution<T: Scalar>(
    impact: &Matrix<T>,
    inference: &Matrix<T>,
    x: &MessageDistribution<T>,
) -> Result<ImpactDistribution<T>> {
    let who = &x.consumer;
    if inference.cols() != x.x.len() {
        return Err(Error::DimensionMismatch {
            context: format!("inference model of `{who}` (columns vs messages)"),
            expected: x.x.len(),
            found: inference.cols(),
        });
    }
    if impact.cols() != inference.rows() {
        return Err(Error::DimensionMismatch {
            context: format!("impact model of `{who}` (columns vs inferences)"),
            expected: inference.rows(),
            found: impact.cols(),
        });
    }
    let inferred = inference.mul_vec(&x.x)?;
    Ok(ImpactDistribution {
        consumer: who.clone(),
        z: impact.mul_vec(&inferred)?,
    })
}

/// `values ᵀ · z̃`.
pub fn expected_impact<T: Scalar>(values: &[T], z: &ImpactDistribution<T>) -> Result<T> {
    if values.len() != z.z.len() {
        return Err(Error::DimensionMismatch {
            context: format!("impact values of `{}`", z.consumer),
            expected: z.z.len(),
            found: values.len(),
        });
    }
    dot(values, &z.z)
}

/// Net expectation `(b − r)ᵀ · z̃` for benefit and risk outcomes driven by a
/// shared impact table.
pub fn expected_net_shared<T: Scalar>(
    benefit_values: &[T],
    risk_values: &[T],
    z: &ImpactDistribution<T>,
) -> Result<T> {
    if benefit_values.len() != risk_values.len() {
        return Err(Error::DimensionMismatch {
            context: format!("shared impact values of `{}`", z.consumer),
            expected: benefit_values.len(),
            found: risk_values.len(),
        });
    }
    let diff: Vec<T> = benefit_values
        .iter()
        .zip(risk_values)
        .map(|(b, r)| b.clone() - r.clone())
        .collect();
    expected_impact(&diff, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Share,
    Withhold,
}

impl Verdict {
    pub fn from_net<T: Scalar>(net: &T) -> Self {
        if *net >= T::zero() {
            Self::Share
        } else {
            Self::Withhold
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Share => "share",
            Self::Withhold => "withhold",
        })
    }
}

/// Closed-form binary threshold diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold<T> {
    /// `(r_B − B̄) / (r_B − r_A)`.
    pub lhs: T,
    /// Probability of the low-risk outcome, `u·w(y₀) + (1 − u)·w(y₁)`.
    pub rhs: T,
    pub verdict: Verdict,
    /// `B̄ ≥ r_A`: without it no consumer can make sharing worthwhile.
    pub benefit_covers_min_risk: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport<T> {
    pub consumer: AgentId,
    pub effective_disclosure: Option<T>,
    /// Index of the delivered message for unit received distributions.
    pub delivered: Option<usize>,
    pub benefit_distribution: Vec<T>,
    pub risk_distribution: Vec<T>,
    pub expected_benefit: T,
    pub expected_risk: T,
    pub expected_net: T,
    pub verdict: Verdict,
    pub threshold: Option<Threshold<T>>,
}

pub fn evaluate<T, S, P>(
    s: &Scenario<T>,
    consumer: &AgentId,
    serial: &S,
    parallel: &P,
) -> Result<DecisionReport<T>>
where
    T: Scalar,
    S: SerialOp<T> + ?Sized,
    P: ParallelOp<T> + ?Sized,
{
    let model = s
        .consumer(consumer)
        .ok_or_else(|| Error::NoModel(consumer.to_string()))?;
    let x = propagation::message_distribution(s, consumer, serial, parallel)?;
    evaluate_distribution(s, model, &x)
}

/// Evaluates with the scenario's named operators.
pub fn evaluate_default<T: Scalar>(s: &Scenario<T>, consumer: &AgentId) -> Result<DecisionReport<T>> {
    evaluate(s, consumer, &s.operators.serial, &s.operators.parallel)
}

/// Evaluation for an already computed received-message distribution.
pub fn evaluate_distribution<T: Scalar>(
    s: &Scenario<T>,
    model: &ConsumerModel<T>,
    x: &MessageDistribution<T>,
) -> Result<DecisionReport<T>> {
    let inference = &model.inference.matrix;
    let (zb, zr) = match &model.impact {
        ImpactModel::Separate { benefit, risk } => (
            impact_distribution(&benefit.matrix, inference, x)?,
            impact_distribution(&risk.matrix, inference, x)?,
        ),
        ImpactModel::Shared { matrix, .. } => {
            let z = impact_distribution(matrix, inference, x)?;
            (z.clone(), z)
        }
    };
    let expected_benefit = expected_impact(model.impact.benefit_values(), &zb)?;
    let expected_risk = expected_impact(model.impact.risk_values(), &zr)?;
    let expected_net = expected_benefit.clone() - expected_risk.clone();
    let verdict = Verdict::from_net(&expected_net);
    let delivered = x.delivered();
    let threshold = delivered
        .and_then(|d| BinaryCase::from_consumer(s, model, d))
        .and_then(|bc| binary_threshold(&bc).ok());
    Ok(DecisionReport {
        consumer: model.id.clone(),
        effective_disclosure: x.effective_disclosure.clone(),
        delivered,
        benefit_distribution: zb.z,
        risk_distribution: zr.z,
        expected_benefit,
        expected_risk,
        expected_net,
        verdict,
        threshold,
    })
}

/// Two inferences, two risk levels and a fixed benefit.
///
/// `u_*` are `Pr(y₀ | message)`; `w_y*` are `Pr(r_A | inference)`, where
/// `r_A < r_B` is the lower risk level.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryCase<T> {
    pub u_original: T,
    pub u_delivered: T,
    pub w_y0: T,
    pub w_y1: T,
    pub r_a: T,
    pub r_b: T,
    pub fixed_benefit: T,
}

impl<T: Scalar> BinaryCase<T> {
    /// Extracts the binary parameters of a consumer when its model has that
    /// shape and a single message is delivered.
    pub fn from_consumer(s: &Scenario<T>, model: &ConsumerModel<T>, delivered: usize) -> Option<Self> {
        let inference = &model.inference.matrix;
        let ImpactModel::Separate { benefit, risk } = &model.impact else {
            return None;
        };
        let fixed = benefit.fixed_value()?.clone();
        if inference.rows() != 2 || risk.matrix.rows() != 2 || risk.values.len() != 2 {
            return None;
        }
        let original = s.original_index()?;
        if delivered >= inference.cols() || original >= inference.cols() {
            return None;
        }
        let low = if risk.values[0] <= risk.values[1] { 0 } else { 1 };
        Some(Self {
            u_original: inference.entry(0, original).clone(),
            u_delivered: inference.entry(0, delivered).clone(),
            w_y0: risk.matrix.entry(low, 0).clone(),
            w_y1: risk.matrix.entry(low, 1).clone(),
            r_a: risk.values[low].clone(),
            r_b: risk.values[1 - low].clone(),
            fixed_benefit: fixed,
        })
    }

    /// Probability of the low-risk outcome.
    pub fn low_risk_probability(&self) -> T {
        low_risk_probability(&self.u_delivered, &(self.w_y0.clone(), self.w_y1.clone()))
    }

    /// Closed form `r_B − (r_B − r_A)·{u·[w(y₀) − w(y₁)] + w(y₁)}`.
    pub fn expected_risk(&self) -> T {
        self.r_b.clone() - (self.r_b.clone() - self.r_a.clone()) * self.low_risk_probability()
    }
}

/// `q·w(0) + (1 − q)·w(1)`, written as `q·[w(0) − w(1)] + w(1)`.
pub fn low_risk_probability<T: Scalar>(q: &T, w: &(T, T)) -> T {
    q.clone() * (w.0.clone() - w.1.clone()) + w.1.clone()
}

pub fn binary_threshold<T: Scalar>(bc: &BinaryCase<T>) -> Result<Threshold<T>> {
    if bc.r_b <= bc.r_a {
        return Err(Error::DegenerateThreshold {
            r_a: bc.r_a.to_f64(),
            r_b: bc.r_b.to_f64(),
        });
    }
    let lhs = (bc.r_b.clone() - bc.fixed_benefit.clone()) / (bc.r_b.clone() - bc.r_a.clone());
    let rhs = bc.low_risk_probability();
    let verdict = if lhs <= rhs && rhs <= T::one() {
        Verdict::Share
    } else {
        Verdict::Withhold
    };
    Ok(Threshold {
        lhs,
        rhs,
        verdict,
        benefit_covers_min_risk: bc.fixed_benefit >= bc.r_a,
    })
}

/// Outcome of matching consumer 2's inference probability to consumer 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Balance<T> {
    Feasible(T),
    /// The equal-impact `q₂` lies outside `[0, 1]`.
    Infeasible(T),
}

impl<T> Balance<T> {
    pub fn value(&self) -> &T {
        match self {
            Self::Feasible(v) | Self::Infeasible(v) => v,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

/// The inference probability `q₂` at which consumer 2 presents the same
/// expected risk as consumer 1 with `(q₁, w₁)`. Independent of the risk
/// levels themselves.
pub fn balance_q2<T: Scalar>(q1: &T, w1: &(T, T), w2: &(T, T)) -> Result<Balance<T>> {
    let denom = w2.0.clone() - w2.1.clone();
    if denom.is_zero() {
        return Err(Error::DegenerateBalance);
    }
    let q2 = q1.clone() * (w1.0.clone() - w1.1.clone()) / denom.clone()
        + (w1.1.clone() - w2.1.clone()) / denom;
    Ok(if q2.in_unit_interval() {
        Balance::Feasible(q2)
    } else {
        Balance::Infeasible(q2)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub delta: T,
    pub report: DecisionReport<T>,
}

/// One evaluation per grid degree, with the consumer's effective disclosure
/// overridden. Rows follow grid order.
pub fn sweep<T: Scalar>(s: &Scenario<T>, consumer: &AgentId, grid: &[T]) -> Result<Vec<SweepRow<T>>> {
    let model = s
        .consumer(consumer)
        .ok_or_else(|| Error::NoModel(consumer.to_string()))?;
    if let Some(bad) = grid.iter().find(|d| !d.in_unit_interval()) {
        return Err(Error::InvalidInput(format!("sweep degree {bad} outside [0, 1]")));
    }
    grid.par_iter()
        .map(|delta| {
            let x = propagation::message_distribution_at(s, consumer, delta.clone())?;
            Ok(SweepRow {
                delta: delta.clone(),
                report: evaluate_distribution(s, model, &x)?,
            })
        })
        .collect()
}

/// `n` equally spaced degrees from 0 to 1 inclusive.
pub fn uniform_grid<T: Scalar>(n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![T::one()],
        _ => (0..n)
            .map(|i| T::from_decimal(i as f64) / T::from_decimal((n - 1) as f64))
            .collect(),
    }
}
