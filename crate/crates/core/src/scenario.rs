//! Domain model for a communication assessment: who talks to whom, which
//! messages exist, and how each consumer turns messages into inferences and
//! inferences into benefit and risk.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::matrix::{is_probability_vector, Matrix};
use crate::propagation::Operators;
use crate::scalar::Scalar;

/// Default tolerance for column sums of human-authored tables.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message<T> {
    pub id: String,
    pub label: String,
    /// Information content relative to the full original message, in `[0, 1]`.
    pub info_level: T,
}

/// Ordered from most informative (`info_level = 1`) down to the "no message"
/// entry (`info_level = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSpace<T> {
    pub messages: Vec<Message<T>>,
}

impl<T: Scalar> MessageSpace<T> {
    pub fn new(messages: Vec<Message<T>>) -> Self {
        Self { messages }
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.messages.iter().position(|m| m.id == id)
    }

    /// The entry carrying no information, if present.
    pub fn no_message_index(&self) -> Option<usize> {
        self.messages.iter().rposition(|m| m.info_level.is_zero())
    }

    pub fn info_level(&self, index: usize) -> &T {
        &self.messages[index].info_level
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisclosureEdge<T> {
    pub from: AgentId,
    pub to: AgentId,
    /// Probability that the sender forwards anything along this link.
    pub forward_prob: T,
    /// Degree of disclosure applied on this link.
    pub disclosure: T,
}

/// `matrix[(i, j)] = Pr(inference i | message j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceModel<T> {
    pub labels: Vec<String>,
    pub matrix: Matrix<T>,
}

/// One impact dimension: `matrix[(k, i)] = Pr(outcome k | inference i)` and
/// the currency value of each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactChannel<T> {
    pub matrix: Matrix<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> ImpactChannel<T> {
    /// A benefit realised with certainty regardless of the inference.
    pub fn fixed(value: T, inferences: usize) -> Self {
        Self {
            matrix: Matrix::ones_row(inferences),
            values: vec![value],
        }
    }

    pub fn fixed_value(&self) -> Option<&T> {
        (self.matrix.is_all_ones_row() && self.values.len() == 1).then(|| &self.values[0])
    }

    fn map<U: Scalar>(&self, f: &impl Fn(&T) -> U) -> ImpactChannel<U> {
        ImpactChannel {
            matrix: self.matrix.map(f),
            values: self.values.iter().map(f).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImpactModel<T> {
    /// Independent benefit and risk tables.
    Separate {
        benefit: ImpactChannel<T>,
        risk: ImpactChannel<T>,
    },
    /// Benefit and risk outcomes in bijection, driven by one table.
    Shared {
        matrix: Matrix<T>,
        benefit_values: Vec<T>,
        risk_values: Vec<T>,
    },
}

impl<T: Scalar> ImpactModel<T> {
    pub fn benefit_matrix(&self) -> &Matrix<T> {
        match self {
            Self::Separate { benefit, .. } => &benefit.matrix,
            Self::Shared { matrix, .. } => matrix,
        }
    }

    pub fn risk_matrix(&self) -> &Matrix<T> {
        match self {
            Self::Separate { risk, .. } => &risk.matrix,
            Self::Shared { matrix, .. } => matrix,
        }
    }

    pub fn benefit_values(&self) -> &[T] {
        match self {
            Self::Separate { benefit, .. } => &benefit.values,
            Self::Shared { benefit_values, .. } => benefit_values,
        }
    }

    pub fn risk_values(&self) -> &[T] {
        match self {
            Self::Separate { risk, .. } => &risk.values,
            Self::Shared { risk_values, .. } => risk_values,
        }
    }

    fn map<U: Scalar>(&self, f: &impl Fn(&T) -> U) -> ImpactModel<U> {
        match self {
            Self::Separate { benefit, risk } => ImpactModel::Separate {
                benefit: benefit.map(f),
                risk: risk.map(f),
            },
            Self::Shared {
                matrix,
                benefit_values,
                risk_values,
            } => ImpactModel::Shared {
                matrix: matrix.map(f),
                benefit_values: benefit_values.iter().map(f).collect(),
                risk_values: risk_values.iter().map(f).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerModel<T> {
    pub id: AgentId,
    pub inference: InferenceModel<T>,
    pub impact: ImpactModel<T>,
    /// Explicit received-message distribution; bypasses path reduction.
    pub received: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub agents: Vec<AgentId>,
    pub edges: Vec<DisclosureEdge<T>>,
    pub messages: MessageSpace<T>,
    pub producer: AgentId,
    pub original_message: String,
    pub consumers: Vec<ConsumerModel<T>>,
    /// Scenario-wide fixed benefit applied to consumers without a benefit table.
    pub fixed_benefit: Option<T>,
    pub operators: Operators,
}

impl<T: Scalar> Scenario<T> {
    pub fn consumer(&self, id: &AgentId) -> Option<&ConsumerModel<T>> {
        self.consumers.iter().find(|c| &c.id == id)
    }

    pub fn original_index(&self) -> Option<usize> {
        self.messages.index_of(&self.original_message)
    }

    /// Re-expresses every number in another scalar type.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Scenario<U> {
        Scenario {
            agents: self.agents.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| DisclosureEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    forward_prob: f(&e.forward_prob),
                    disclosure: f(&e.disclosure),
                })
                .collect(),
            messages: MessageSpace::new(
                self.messages
                    .messages
                    .iter()
                    .map(|m| Message {
                        id: m.id.clone(),
                        label: m.label.clone(),
                        info_level: f(&m.info_level),
                    })
                    .collect(),
            ),
            producer: self.producer.clone(),
            original_message: self.original_message.clone(),
            consumers: self
                .consumers
                .iter()
                .map(|c| ConsumerModel {
                    id: c.id.clone(),
                    inference: InferenceModel {
                        labels: c.inference.labels.clone(),
                        matrix: c.inference.matrix.map(&f),
                    },
                    impact: c.impact.map(&f),
                    received: c.received.as_ref().map(|x| x.iter().map(&f).collect()),
                })
                .collect(),
            fixed_benefit: self.fixed_benefit.as_ref().map(&f),
            operators: self.operators,
        }
    }

    /// Agents reachable from the producer along directed edges.
    pub fn reachable_from_producer(&self) -> HashSet<&AgentId> {
        let mut adjacency: HashMap<&AgentId, Vec<&AgentId>> = HashMap::new();
        for e in &self.edges {
            adjacency.entry(&e.from).or_default().push(&e.to);
        }
        let mut seen = HashSet::from([&self.producer]);
        let mut queue = VecDeque::from([&self.producer]);
        while let Some(a) = queue.pop_front() {
            for &next in adjacency.get(a).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Warning => "warning",
            Self::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub location: String,
    pub description: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.severity, self.location, self.description)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    fn error(&mut self, location: impl Into<String>, description: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Error,
            location: location.into(),
            description: description.into(),
        });
    }

    fn warning(&mut self, location: impl Into<String>, description: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            location: location.into(),
            description: description.into(),
        });
    }
}

pub fn validate_scenario<T: Scalar>(s: &Scenario<T>) -> ValidationReport {
    validate_scenario_with_tolerance(s, &T::from_decimal(STOCHASTIC_TOLERANCE))
}

/// Reports every violated invariant. Never fails.
pub fn validate_scenario_with_tolerance<T: Scalar>(s: &Scenario<T>, tol: &T) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_agents(s, &mut report);
    check_messages(s, &mut report);
    check_edges(s, &mut report);
    check_consumers(s, tol, &mut report);
    report
}

fn check_agents<T: Scalar>(s: &Scenario<T>, report: &mut ValidationReport) {
    let mut seen = HashSet::new();
    for (i, a) in s.agents.iter().enumerate() {
        if a.as_str().is_empty() {
            report.error(format!("agents[{i}]"), "agent id is empty");
        }
        if !seen.insert(a) {
            report.error(format!("agents[{i}]"), format!("duplicate agent `{a}`"));
        }
    }
    if !seen.contains(&s.producer) {
        report.error("producer", format!("producer `{}` is not an agent", s.producer));
    }
}

fn check_messages<T: Scalar>(s: &Scenario<T>, report: &mut ValidationReport) {
    let ms = &s.messages.messages;
    if ms.is_empty() {
        report.error("messages", "message space is empty");
        return;
    }
    let mut ids = HashSet::new();
    for (i, m) in ms.iter().enumerate() {
        let loc = format!("messages[{i}]");
        if !ids.insert(m.id.as_str()) {
            report.error(&loc, format!("duplicate message id `{}`", m.id));
        }
        if !m.info_level.in_unit_interval() {
            report.error(&loc, format!("info_level {} outside [0, 1]", m.info_level));
        }
        if i > 0 && m.info_level >= ms[i - 1].info_level {
            report.error(&loc, "info levels must be strictly decreasing");
        }
    }
    if !ms[0].info_level.is_one() {
        report.error("messages[0]", "the most informative message must have info_level 1");
    }
    if !ms[ms.len() - 1].info_level.is_zero() {
        report.error(
            format!("messages[{}]", ms.len() - 1),
            "the last message must be the no-message entry with info_level 0",
        );
    }
    match s.original_index() {
        None => report.error(
            "original_message",
            format!("`{}` is not in the message space", s.original_message),
        ),
        Some(i) if !ms[i].info_level.is_one() => report.warning(
            "original_message",
            "original message is not the fully informative entry",
        ),
        Some(_) => {}
    }
}

fn check_edges<T: Scalar>(s: &Scenario<T>, report: &mut ValidationReport) {
    let agents: HashSet<&AgentId> = s.agents.iter().collect();
    let mut pairs = HashSet::new();
    for (i, e) in s.edges.iter().enumerate() {
        let loc = format!("edges[{i}] ({} -> {})", e.from, e.to);
        for end in [&e.from, &e.to] {
            if !agents.contains(end) {
                report.error(&loc, format!("unknown agent `{end}`"));
            }
        }
        if e.from == e.to {
            report.error(&loc, "self-loop");
        }
        if !pairs.insert((&e.from, &e.to)) {
            report.error(&loc, "duplicate edge");
        }
        if !e.forward_prob.in_unit_interval() {
            report.error(&loc, format!("forward_prob {} outside [0, 1]", e.forward_prob));
        }
        if !e.disclosure.in_unit_interval() {
            report.error(&loc, format!("disclosure {} outside [0, 1]", e.disclosure));
        }
    }
}

fn check_consumers<T: Scalar>(s: &Scenario<T>, tol: &T, report: &mut ValidationReport) {
    let agents: HashSet<&AgentId> = s.agents.iter().collect();
    let reachable = s.reachable_from_producer();
    let m = s.messages.len();
    let mut seen = BTreeSet::new();
    for c in &s.consumers {
        let loc = format!("consumers.{}", c.id);
        if !seen.insert(&c.id) {
            report.error(&loc, "duplicate consumer model");
        }
        if !agents.contains(&c.id) {
            report.error(&loc, format!("unknown agent `{}`", c.id));
        } else if c.id == s.producer {
            report.error(&loc, "the producer cannot be its own consumer");
        } else if !reachable.contains(&c.id) {
            report.error(&loc, "consumer unreachable from producer");
        }

        let inf = &c.inference.matrix;
        let n = inf.rows();
        check_table(&format!("{loc}.inference"), inf, m, tol, report);
        if c.inference.labels.len() != n {
            report.error(
                format!("{loc}.inference.labels"),
                format!("{} labels for {n} inference rows", c.inference.labels.len()),
            );
        }

        match &c.impact {
            ImpactModel::Separate { benefit, risk } => {
                check_channel(&format!("{loc}.benefit"), benefit, n, tol, report);
                check_channel(&format!("{loc}.risk"), risk, n, tol, report);
            }
            ImpactModel::Shared {
                matrix,
                benefit_values,
                risk_values,
            } => {
                let loc = format!("{loc}.shared");
                check_table(&loc, matrix, n, tol, report);
                check_values(&format!("{loc}.benefit_values"), benefit_values, matrix.rows(), report);
                check_values(&format!("{loc}.risk_values"), risk_values, matrix.rows(), report);
            }
        }

        if let Some(x) = &c.received {
            if x.len() != m {
                report.error(
                    format!("{loc}.received"),
                    format!("length {} does not match {m} messages", x.len()),
                );
            } else if !is_probability_vector(x, tol) {
                report.error(format!("{loc}.received"), "not a probability vector");
            }
        }
    }
}

fn check_channel<T: Scalar>(
    loc: &str,
    ch: &ImpactChannel<T>,
    inferences: usize,
    tol: &T,
    report: &mut ValidationReport,
) {
    check_table(loc, &ch.matrix, inferences, tol, report);
    check_values(&format!("{loc}.values"), &ch.values, ch.matrix.rows(), report);
}

fn check_table<T: Scalar>(
    loc: &str,
    table: &Matrix<T>,
    expected_cols: usize,
    tol: &T,
    report: &mut ValidationReport,
) {
    if table.rows() == 0 || table.cols() == 0 {
        report.error(loc, "empty matrix");
        return;
    }
    if table.cols() != expected_cols {
        report.error(
            loc,
            format!("{} columns, expected {expected_cols}", table.cols()),
        );
    }
    for c in 0..table.cols() {
        let sum = table.column_sum(c);
        if table.column(c).any(|v| !v.in_unit_interval()) {
            report.error(loc, format!("column {c} has an entry outside [0, 1]"));
        }
        if (sum.clone() - T::one()).abs() > *tol {
            report.error(loc, format!("column {c} sums to {sum}, not 1"));
        }
    }
}

fn check_values<T: Scalar>(loc: &str, values: &[T], rows: usize, report: &mut ValidationReport) {
    if values.len() != rows {
        report.error(loc, format!("{} values for {rows} outcome rows", values.len()));
    }
    if values.iter().any(|v| !v.is_finite_value()) {
        report.error(loc, "non-finite value");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::james_alec;

    #[test]
    fn canonical_scenario_is_valid() {
        let report = validate_scenario(&james_alec());
        assert!(report.ok(), "{:?}", report.findings);
        assert!(report.findings.is_empty());
    }

    #[test]
    fn short_inference_column_names_consumer_and_column() {
        let mut s = james_alec();
        *s.consumers[1].inference.matrix.entry_mut(0, 1) = 0.5;
        let report = validate_scenario(&s);
        assert!(!report.ok());
        let f = report.errors().next().unwrap();
        assert!(f.location.contains("Alec"), "{f}");
        assert!(f.description.contains("column 1"), "{f}");
        assert!(f.description.contains("0.9"), "{f}");
    }

    #[test]
    fn unreachable_consumer_reported() {
        let mut s = james_alec();
        s.edges.retain(|e| !(e.from.as_str() == "BI" && e.to.as_str() == "Alec"));
        let report = validate_scenario(&s);
        assert!(report
            .errors()
            .any(|f| f.description == "consumer unreachable from producer" && f.location.contains("Alec")));
    }

    #[test]
    fn message_space_invariants() {
        let mut s = james_alec();
        s.messages.messages[1].info_level = 1.0;
        s.messages.messages[0].id = "none".into();
        let report = validate_scenario(&s);
        let descriptions: Vec<_> = report.errors().map(|f| f.description.clone()).collect();
        assert!(descriptions.iter().any(|d| d.contains("strictly decreasing")));
        assert!(descriptions.iter().any(|d| d.contains("duplicate message id")));
    }

    #[test]
    fn edge_range_and_duplicates() {
        let mut s = james_alec();
        s.edges[0].forward_prob = 1.5;
        s.edges.push(s.edges[1].clone());
        s.edges.push(DisclosureEdge {
            from: "BI".into(),
            to: "BI".into(),
            forward_prob: 1.0,
            disclosure: 1.0,
        });
        let report = validate_scenario(&s);
        let d: Vec<_> = report.errors().map(|f| f.description.clone()).collect();
        assert!(d.iter().any(|x| x.contains("forward_prob")));
        assert!(d.iter().any(|x| x == "duplicate edge"));
        assert!(d.iter().any(|x| x == "self-loop"));
    }

    #[test]
    fn validation_is_pure() {
        let mut s = james_alec();
        s.consumers[0].impact = ImpactModel::Separate {
            benefit: ImpactChannel::fixed(25000.0, 3),
            risk: ImpactChannel {
                matrix: Matrix::identity(2),
                values: vec![1.0],
            },
        };
        assert_eq!(validate_scenario(&s), validate_scenario(&s));
    }

    #[test]
    fn exact_scenario_validates() {
        let exact = james_alec().map_scalar(|v| crate::Exact::from_decimal(*v));
        assert!(validate_scenario(&exact).ok());
    }
}
