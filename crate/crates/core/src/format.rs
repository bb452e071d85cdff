//! JSON scenario files.
//!
//! The on-disk layout is documented in `docs/scenario-format.md`. Parsing
//! converts to the typed [`Scenario`] but does not validate invariants; run
//! [`crate::validate_scenario`] on the result.

use serde::{Deserialize, Serialize};

use crate::continuous::spec::ContinuousSection;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::propagation::{Operators, ParallelKind, SerialKind};
use crate::scenario::{
    AgentId, ConsumerModel, DisclosureEdge, ImpactChannel, ImpactModel, InferenceModel, Message,
    MessageSpace, Scenario,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub agents: Vec<String>,
    pub edges: Vec<EdgeFile>,
    pub messages: Vec<MessageFile>,
    pub producer: String,
    pub original_message: String,
    pub consumers: Vec<ConsumerFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_benefit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorsFile>,
    /// Continuous-density section, consumed by the `continuous` subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous: Option<ContinuousSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub from: String,
    pub to: String,
    #[serde(default = "one")]
    pub forward_prob: f64,
    pub disclosure: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageFile {
    pub id: String,
    #[serde(default)]
    pub label: String,
    pub info_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorsFile {
    #[serde(default)]
    pub serial: Option<String>,
    #[serde(default)]
    pub parallel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerFile {
    pub id: String,
    pub inference: InferenceFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<ChannelFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<ChannelFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared: Option<SharedFile>,
    /// Explicit received-message distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub received: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceFile {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelFile {
    Fixed { fixed: f64 },
    Table { matrix: Vec<Vec<f64>>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedFile {
    pub matrix: Vec<Vec<f64>>,
    pub benefit_values: Vec<f64>,
    pub risk_values: Vec<f64>,
}

/// Syntax-level failure with the position reported by the JSON parser.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at line {line} column {column}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("malformed scenario: {0}")]
    Structure(#[from] Error),
}

pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })
}

/// Parses JSON text into a scenario. Does not validate.
pub fn parse_scenario(text: &str) -> Result<Scenario<f64>, FormatError> {
    Ok(parse_scenario_file(text)?.into_scenario()?)
}

pub fn to_json(s: &Scenario<f64>) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario<f64>, Error> {
        let inferences_for = |c: &ConsumerFile| c.inference.matrix.len();
        let mut consumers = Vec::with_capacity(self.consumers.len());
        for c in &self.consumers {
            let n = inferences_for(c);
            let channel = |ch: &Option<ChannelFile>, what: &str| -> Result<ImpactChannel<f64>, Error> {
                match (ch, self.fixed_benefit) {
                    (Some(ChannelFile::Fixed { fixed }), _) => Ok(ImpactChannel::fixed(*fixed, n)),
                    (Some(ChannelFile::Table { matrix, values }), _) => Ok(ImpactChannel {
                        matrix: Matrix::from_rows(matrix.clone())?,
                        values: values.clone(),
                    }),
                    (None, Some(b)) if what == "benefit" => Ok(ImpactChannel::fixed(b, n)),
                    (None, _) => Err(Error::InvalidInput(format!(
                        "consumer `{}` has no {what} model",
                        c.id
                    ))),
                }
            };
            let impact = match &c.shared {
                Some(shared) => {
                    if c.benefit.is_some() || c.risk.is_some() {
                        return Err(Error::InvalidInput(format!(
                            "consumer `{}` mixes `shared` with `benefit`/`risk`",
                            c.id
                        )));
                    }
                    ImpactModel::Shared {
                        matrix: Matrix::from_rows(shared.matrix.clone())?,
                        benefit_values: shared.benefit_values.clone(),
                        risk_values: shared.risk_values.clone(),
                    }
                }
                None => ImpactModel::Separate {
                    benefit: channel(&c.benefit, "benefit")?,
                    risk: channel(&c.risk, "risk")?,
                },
            };
            consumers.push(ConsumerModel {
                id: AgentId::new(c.id.clone()),
                inference: InferenceModel {
                    labels: c.inference.labels.clone(),
                    matrix: Matrix::from_rows(c.inference.matrix.clone())?,
                },
                impact,
                received: c.received.clone(),
            });
        }

        let operators = match &self.operators {
            None => Operators::default(),
            Some(ops) => Operators {
                serial: ops
                    .serial
                    .as_deref()
                    .map(str::parse::<SerialKind>)
                    .transpose()?
                    .unwrap_or_default(),
                parallel: ops
                    .parallel
                    .as_deref()
                    .map(str::parse::<ParallelKind>)
                    .transpose()?
                    .unwrap_or_default(),
            },
        };

        Ok(Scenario {
            agents: self.agents.into_iter().map(AgentId::new).collect(),
            edges: self
                .edges
                .into_iter()
                .map(|e| DisclosureEdge {
                    from: AgentId::new(e.from),
                    to: AgentId::new(e.to),
                    forward_prob: e.forward_prob,
                    disclosure: e.disclosure,
                })
                .collect(),
            messages: MessageSpace::new(
                self.messages
                    .into_iter()
                    .map(|m| Message {
                        id: m.id,
                        label: m.label,
                        info_level: m.info_level,
                    })
                    .collect(),
            ),
            producer: AgentId::new(self.producer),
            original_message: self.original_message,
            consumers,
            fixed_benefit: self.fixed_benefit,
            operators,
        })
    }

    pub fn from_scenario(s: &Scenario<f64>) -> Self {
        let channel = |ch: &ImpactChannel<f64>| match ch.fixed_value() {
            Some(&fixed) => ChannelFile::Fixed { fixed },
            None => ChannelFile::Table {
                matrix: ch.matrix.to_rows(),
                values: ch.values.clone(),
            },
        };
        let consumers = s
            .consumers
            .iter()
            .map(|c| {
                let (benefit, risk, shared) = match &c.impact {
                    ImpactModel::Separate { benefit, risk } => {
                        (Some(channel(benefit)), Some(channel(risk)), None)
                    }
                    ImpactModel::Shared {
                        matrix,
                        benefit_values,
                        risk_values,
                    } => (
                        None,
                        None,
                        Some(SharedFile {
                            matrix: matrix.to_rows(),
                            benefit_values: benefit_values.clone(),
                            risk_values: risk_values.clone(),
                        }),
                    ),
                };
                ConsumerFile {
                    id: c.id.to_string(),
                    inference: InferenceFile {
                        labels: c.inference.labels.clone(),
                        matrix: c.inference.matrix.to_rows(),
                    },
                    benefit,
                    risk,
                    shared,
                    received: c.received.clone(),
                }
            })
            .collect();
        let operators = (s.operators != Operators::default()).then(|| OperatorsFile {
            serial: Some(s.operators.serial.to_string()),
            parallel: Some(s.operators.parallel.to_string()),
        });
        Self {
            agents: s.agents.iter().map(ToString::to_string).collect(),
            edges: s
                .edges
                .iter()
                .map(|e| EdgeFile {
                    from: e.from.to_string(),
                    to: e.to.to_string(),
                    forward_prob: e.forward_prob,
                    disclosure: e.disclosure,
                })
                .collect(),
            messages: s
                .messages
                .messages
                .iter()
                .map(|m| MessageFile {
                    id: m.id.clone(),
                    label: m.label.clone(),
                    info_level: m.info_level,
                })
                .collect(),
            producer: s.producer.to_string(),
            original_message: s.original_message.clone(),
            consumers,
            fixed_benefit: s.fixed_benefit,
            operators,
            continuous: None,
        }
    }
}
