//! Bundled scenarios used by tests, the acceptance suite and documentation.

use crate::format::parse_scenario;
use crate::scenario::{AgentId, DisclosureEdge, Scenario};

/// The two-spy intelligence scenario shipped as `scenarios/james_alec.json`.
pub const JAMES_ALEC_JSON: &str = include_str!("../../../scenarios/james_alec.json");

pub fn james_alec() -> Scenario<f64> {
    parse_scenario(JAMES_ALEC_JSON).expect("bundled scenario parses")
}

/// A chain `a1 → a2 → … → a(k+1)` with the given per-hop disclosures and
/// `forward_prob = 1`. Reuses the James model for the last agent so the
/// scenario is evaluable end to end.
pub fn chain(disclosures: &[f64]) -> Scenario<f64> {
    let mut s = james_alec();
    let n = disclosures.len() + 1;
    s.agents = (1..=n).map(|i| AgentId::new(format!("a{i}"))).collect();
    s.producer = AgentId::new("a1");
    s.edges = disclosures
        .iter()
        .enumerate()
        .map(|(i, &d)| DisclosureEdge {
            from: AgentId::new(format!("a{}", i + 1)),
            to: AgentId::new(format!("a{}", i + 2)),
            forward_prob: 1.0,
            disclosure: d,
        })
        .collect();
    s.consumers.truncate(1);
    s.consumers[0].id = AgentId::new(format!("a{n}"));
    s
}
