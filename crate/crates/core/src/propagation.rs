//! Reduction of multi-hop, multi-path communication to one effective degree
//! of disclosure per consumer, and the resulting received-message
//! distribution.
//!
//! Each simple path from the producer is folded hop by hop with a serial
//! operator; the per-path results are fused with a parallel operator. Any
//! operator pair must keep the result inside `[0, 1]`, never let a hop raise
//! the running degree, and never let the fused degree exceed the smallest
//! first-hop disclosure among the fused paths. [`effective_disclosure`]
//! checks those bounds on every call, so custom operators that break them are
//! rejected on the graph where they misbehave.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::is_probability_vector;
use crate::scalar::{self, Scalar};
use crate::scenario::{AgentId, MessageSpace, Scenario, STOCHASTIC_TOLERANCE};

/// Default cap on the number of simple paths enumerated per consumer.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// One transmission: forwarding probability and degree of disclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop<T> {
    pub forward_prob: T,
    pub disclosure: T,
}

impl<T: Scalar> Hop<T> {
    pub fn new(forward_prob: T, disclosure: T) -> Self {
        Self {
            forward_prob,
            disclosure,
        }
    }

    /// The neutral starting point of a path fold.
    pub fn full() -> Self {
        Self::new(T::one(), T::one())
    }

    /// A realised transmission with the given accumulated disclosure.
    pub fn delivered(disclosure: T) -> Self {
        Self::new(T::one(), disclosure)
    }
}

/// Combines a hop with the next hop along a chain.
pub trait SerialOp<T> {
    fn name(&self) -> &str;
    fn combine(&self, first: &Hop<T>, second: &Hop<T>) -> T;
}

/// Fuses the degrees arriving over two paths. Must be commutative and
/// associative.
pub trait ParallelOp<T> {
    fn name(&self) -> &str;
    fn fuse(&self, a: &T, b: &T) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SerialKind {
    /// `(p₁δ₁)·(p₂δ₂)`.
    #[default]
    Product,
    /// `min(p₁δ₁, p₂δ₂)`.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParallelKind {
    #[default]
    Min,
    Product,
}

impl<T: Scalar> SerialOp<T> for SerialKind {
    fn name(&self) -> &str {
        match self {
            Self::Product => "product",
            Self::Min => "min",
        }
    }

    fn combine(&self, first: &Hop<T>, second: &Hop<T>) -> T {
        let a = first.forward_prob.clone() * first.disclosure.clone();
        let b = second.forward_prob.clone() * second.disclosure.clone();
        match self {
            Self::Product => a * b,
            Self::Min => T::min_of(a, b),
        }
    }
}

impl<T: Scalar> ParallelOp<T> for ParallelKind {
    fn name(&self) -> &str {
        match self {
            Self::Min => "min",
            Self::Product => "product",
        }
    }

    fn fuse(&self, a: &T, b: &T) -> T {
        match self {
            Self::Min => T::min_of(a.clone(), b.clone()),
            Self::Product => a.clone() * b.clone(),
        }
    }
}

impl fmt::Display for SerialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(SerialOp::<f64>::name(self))
    }
}

impl fmt::Display for ParallelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(ParallelOp::<f64>::name(self))
    }
}

impl FromStr for SerialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Self::Product),
            "min" => Ok(Self::Min),
            other => Err(Error::InvalidInput(format!("unknown serial operator `{other}`"))),
        }
    }
}

impl FromStr for ParallelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "product" => Ok(Self::Product),
            other => Err(Error::InvalidInput(format!("unknown parallel operator `{other}`"))),
        }
    }
}

/// Named operator selection, as stored in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Operators {
    pub serial: SerialKind,
    pub parallel: ParallelKind,
}

pub fn combine_serial<T: Scalar, S: SerialOp<T> + ?Sized>(a: &Hop<T>, b: &Hop<T>, op: &S) -> T {
    op.combine(a, b)
}

pub fn combine_parallel<T: Scalar, P: ParallelOp<T> + ?Sized>(a: &T, b: &T, op: &P) -> T {
    op.fuse(a, b)
}

/// A simple path as a sequence of edge indices into `Scenario::edges`.
pub type EdgePath = Vec<usize>;

/// Every simple path from the producer to `consumer`, in a deterministic
/// order (lexicographic by the agent ids visited).
pub fn simple_paths<T: Scalar>(
    s: &Scenario<T>,
    consumer: &AgentId,
    cap: usize,
) -> Result<Vec<EdgePath>> {
    let mut outgoing: HashMap<&AgentId, Vec<usize>> = HashMap::new();
    for (i, e) in s.edges.iter().enumerate() {
        outgoing.entry(&e.from).or_default().push(i);
    }

    let mut paths = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut on_path: Vec<&AgentId> = vec![&s.producer];
    // Iterative DFS: `cursor[k]` is the next candidate edge index at depth k.
    let mut cursor: Vec<usize> = vec![0];
    while let Some(pos) = cursor.last_mut() {
        let here = *on_path.last().expect("path never empty while cursor non-empty");
        let candidates = outgoing.get(here).map_or(&[][..], Vec::as_slice);
        if *pos >= candidates.len() {
            cursor.pop();
            on_path.pop();
            stack.pop();
            continue;
        }
        let edge = candidates[*pos];
        *pos += 1;
        let next = &s.edges[edge].to;
        if on_path.contains(&next) {
            continue;
        }
        if next == consumer {
            let mut path = stack.clone();
            path.push(edge);
            paths.push(path);
            if paths.len() > cap {
                return Err(Error::GraphTooDense {
                    to: consumer.to_string(),
                    cap,
                });
            }
            continue;
        }
        stack.push(edge);
        on_path.push(next);
        cursor.push(0);
    }

    if paths.is_empty() {
        return Err(Error::NoPath {
            from: s.producer.to_string(),
            to: consumer.to_string(),
        });
    }
    paths.sort_by(|a, b| {
        let ids = |p: &EdgePath| p.iter().map(|&e| s.edges[e].to.clone()).collect::<Vec<_>>();
        ids(a).cmp(&ids(b))
    });
    Ok(paths)
}

/// Folds one path left to right, checking the serial-operator bounds.
pub fn path_disclosure<T: Scalar, S: SerialOp<T> + ?Sized>(hops: &[Hop<T>], serial: &S) -> Result<T> {
    let mut acc = T::one();
    for (k, hop) in hops.iter().enumerate() {
        let next = serial.combine(&Hop::delivered(acc.clone()), hop);
        if !next.in_unit_interval() || next > acc {
            return Err(Error::OperatorViolation(format!(
                "serial `{}` produced {next} from running degree {acc} at hop {k}",
                serial.name()
            )));
        }
        acc = next;
    }
    if let Some(first) = hops.first() {
        if acc > first.disclosure {
            return Err(Error::OperatorViolation(format!(
                "serial `{}` produced {acc}, above first-hop disclosure {}",
                serial.name(),
                first.disclosure
            )));
        }
    }
    Ok(acc)
}

/// Fuses per-path degrees and checks the result against the smallest
/// first-hop disclosure of the fused paths.
pub fn fuse_paths<T: Scalar, P: ParallelOp<T> + ?Sized>(
    path_values: &[T],
    first_hops: &[T],
    parallel: &P,
) -> Result<T> {
    let (first, rest) = path_values
        .split_first()
        .ok_or_else(|| Error::InvalidInput("no paths to fuse".into()))?;
    let fused = rest.iter().fold(first.clone(), |acc, v| parallel.fuse(&acc, v));
    let bound = first_hops
        .iter()
        .cloned()
        .reduce(T::min_of)
        .unwrap_or_else(T::one);
    if !fused.in_unit_interval() || fused > bound {
        return Err(Error::OperatorViolation(format!(
            "parallel `{}` produced {fused}, bound is {bound}",
            parallel.name()
        )));
    }
    Ok(fused)
}

pub fn effective_disclosure<T, S, P>(
    s: &Scenario<T>,
    consumer: &AgentId,
    serial: &S,
    parallel: &P,
) -> Result<T>
where
    T: Scalar,
    S: SerialOp<T> + ?Sized,
    P: ParallelOp<T> + ?Sized,
{
    effective_disclosure_capped(s, consumer, serial, parallel, DEFAULT_PATH_CAP)
}

pub fn effective_disclosure_capped<T, S, P>(
    s: &Scenario<T>,
    consumer: &AgentId,
    serial: &S,
    parallel: &P,
    cap: usize,
) -> Result<T>
where
    T: Scalar,
    S: SerialOp<T> + ?Sized,
    P: ParallelOp<T> + ?Sized,
{
    if !s.agents.contains(consumer) {
        return Err(Error::UnknownAgent(consumer.to_string()));
    }
    let paths = simple_paths(s, consumer, cap)?;
    let mut values = Vec::with_capacity(paths.len());
    let mut first_hops = Vec::with_capacity(paths.len());
    for path in &paths {
        let hops: Vec<Hop<T>> = path
            .iter()
            .map(|&e| Hop::new(s.edges[e].forward_prob.clone(), s.edges[e].disclosure.clone()))
            .collect();
        first_hops.push(hops[0].disclosure.clone());
        values.push(path_disclosure(&hops, serial)?);
    }
    fuse_paths(&values, &first_hops, parallel)
}

/// Index of the most informative message whose info level does not exceed
/// `degree · ℓ(message)`.
pub fn disclose<T: Scalar>(message: &str, degree: &T, ms: &MessageSpace<T>) -> Result<usize> {
    let index = ms
        .index_of(message)
        .ok_or_else(|| Error::UnknownMessage(message.to_owned()))?;
    if !degree.in_unit_interval() {
        return Err(Error::InvalidInput(format!("disclosure degree {degree} outside [0, 1]")));
    }
    if degree.is_one() {
        return Ok(index);
    }
    let target = degree.clone() * ms.info_level(index).clone();
    ms.messages
        .iter()
        .enumerate()
        .filter(|(_, m)| m.info_level <= target)
        .max_by(|(i, a), (j, b)| {
            a.info_level
                .partial_cmp(&b.info_level)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(j.cmp(i))
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidInput(format!("no message carries at most {target} information")))
}

/// Distribution over the message space that a consumer receives.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageDistribution<T> {
    pub consumer: AgentId,
    pub x: Vec<T>,
    /// Effective disclosure degree; `None` when the distribution was supplied explicitly.
    pub effective_disclosure: Option<T>,
}

impl<T: Scalar> MessageDistribution<T> {
    pub fn unit(consumer: AgentId, len: usize, index: usize, degree: T) -> Self {
        let mut x = vec![T::zero(); len];
        x[index] = T::one();
        Self {
            consumer,
            x,
            effective_disclosure: Some(degree),
        }
    }

    /// Index of the delivered message when the distribution is a unit vector.
    pub fn delivered(&self) -> Option<usize> {
        let mut ones = self.x.iter().enumerate().filter(|(_, v)| !v.is_zero());
        match (ones.next(), ones.next()) {
            (Some((i, v)), None) if v.is_one() => Some(i),
            _ => None,
        }
    }
}

pub fn message_distribution<T, S, P>(
    s: &Scenario<T>,
    consumer: &AgentId,
    serial: &S,
    parallel: &P,
) -> Result<MessageDistribution<T>>
where
    T: Scalar,
    S: SerialOp<T> + ?Sized,
    P: ParallelOp<T> + ?Sized,
{
    let model = s
        .consumer(consumer)
        .ok_or_else(|| Error::NoModel(consumer.to_string()))?;
    if let Some(x) = &model.received {
        if x.len() != s.messages.len() {
            return Err(Error::DimensionMismatch {
                context: format!("received distribution of `{consumer}`"),
                expected: s.messages.len(),
                found: x.len(),
            });
        }
        if !is_probability_vector(x, &T::from_decimal(STOCHASTIC_TOLERANCE)) {
            return Err(Error::NotNormalized {
                context: format!("received distribution of `{consumer}`"),
                sum: scalar::sum(x.iter().cloned()).to_f64(),
            });
        }
        return Ok(MessageDistribution {
            consumer: consumer.clone(),
            x: x.clone(),
            effective_disclosure: None,
        });
    }
    let degree = effective_disclosure(s, consumer, serial, parallel)?;
    message_distribution_at(s, consumer, degree)
}

/// Unit vector at the message delivered under an overridden effective degree.
pub fn message_distribution_at<T: Scalar>(
    s: &Scenario<T>,
    consumer: &AgentId,
    degree: T,
) -> Result<MessageDistribution<T>> {
    let index = disclose(&s.original_message, &degree, &s.messages)?;
    Ok(MessageDistribution::unit(
        consumer.clone(),
        s.messages.len(),
        index,
        degree,
    ))
}
