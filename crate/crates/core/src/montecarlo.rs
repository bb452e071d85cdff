//! Brute-force sampling oracle for the analytic pipeline.
//!
//! Each trial samples the whole chain: which links forward, the degree at
//! which the message arrives, the delivered message, the consumer's
//! inference, and the benefit and risk outcomes. Means and standard errors
//! of the sampled values estimate `E[B]`, `E[R]` and `E[C]`.
//!
//! # Reproducibility
//!
//! Trials are grouped into batches of [`BATCH_SIZE`]. Batch `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`, and partial
//! statistics are merged in batch order. Results are therefore bit-identical
//! for a given `(scenario, seed, trials)` whatever the thread count or
//! platform.
//!
//! Link forwarding is sampled per trial: a link with `forward_prob = p`
//! delivers with probability `p` and, when it does, applies its disclosure
//! in full. The analytic side folds `p` into the degree instead, so the two
//! only describe the same model when every `p` on a contributing path is 0
//! or 1 (or when the received distribution is given explicitly).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::impact::{evaluate, DecisionReport};
use crate::matrix::Matrix;
use crate::propagation::{self, disclose, fuse_paths, path_disclosure, Hop};
use crate::scenario::{AgentId, ImpactModel, Scenario};

pub const BATCH_SIZE: u64 = 4096;

/// Acceptance bound in standard errors.
pub const Z_BOUND: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub consumer: AgentId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub consumer: AgentId,
    pub trials_used: u64,
    pub seed: u64,
    pub est_eb: f64,
    pub est_er: f64,
    pub est_ec: f64,
    pub stderr_eb: f64,
    pub stderr_er: f64,
    pub stderr_ec: f64,
    /// Empirical received-message distribution.
    pub empirical_x: Vec<f64>,
    pub empirical_benefit_z: Vec<f64>,
    pub empirical_risk_z: Vec<f64>,
}

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone)]
struct Partial {
    benefit: Moments,
    risk: Moments,
    net: Moments,
    x: Vec<u64>,
    zb: Vec<u64>,
    zr: Vec<u64>,
}

impl Partial {
    fn new(m: usize, kb: usize, kr: usize) -> Self {
        Self {
            benefit: Moments::default(),
            risk: Moments::default(),
            net: Moments::default(),
            x: vec![0; m],
            zb: vec![0; kb],
            zr: vec![0; kr],
        }
    }

    fn merge(&mut self, other: &Self) {
        self.benefit.merge(&other.benefit);
        self.risk.merge(&other.risk);
        self.net.merge(&other.net);
        for (a, b) in [(&mut self.x, &other.x), (&mut self.zb, &other.zb), (&mut self.zr, &other.zr)] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Cumulative distribution of each column of a column-stochastic table.
struct ColumnSampler {
    cumulative: Vec<Vec<f64>>,
}

impl ColumnSampler {
    fn new(m: &Matrix<f64>) -> Self {
        let cumulative = (0..m.cols())
            .map(|c| {
                let mut acc = 0.0;
                m.column(c)
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, col: usize, u: f64) -> usize {
        sample_cumulative(&self.cumulative[col], u)
    }
}

fn sample_cumulative(cum: &[f64], u: f64) -> usize {
    let total = cum.last().copied().unwrap_or(1.0);
    let u = u * total;
    match cum.iter().position(|&c| u < c) {
        Some(i) => i,
        // Rounding left `u` at the top: take the last outcome with mass.
        None => cum
            .windows(2)
            .rposition(|w| w[1] > w[0])
            .map_or(0, |i| i + 1),
    }
}

/// How the received message is drawn in each trial.
enum MessageSource {
    Fixed(usize),
    Explicit(Vec<f64>),
    Paths {
        paths: Vec<Vec<usize>>,
        /// Indices of edges whose forwarding is random (0 < p < 1).
        random_edges: Vec<usize>,
        forward_prob: Vec<f64>,
    },
}

struct Model<'a> {
    scenario: &'a Scenario<f64>,
    source: MessageSource,
    inference: ColumnSampler,
    benefit: ColumnSampler,
    risk: ColumnSampler,
    shared: bool,
    benefit_values: &'a [f64],
    risk_values: &'a [f64],
    m: usize,
}

impl<'a> Model<'a> {
    fn new(s: &'a Scenario<f64>, consumer: &AgentId) -> Result<Self> {
        let model = s
            .consumer(consumer)
            .ok_or_else(|| Error::NoModel(consumer.to_string()))?;
        let source = match &model.received {
            Some(x) => {
                // Same normalisation check as the analytic side.
                propagation::message_distribution(s, consumer, &s.operators.serial, &s.operators.parallel)?;
                let mut acc = 0.0;
                MessageSource::Explicit(
                    x.iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect(),
                )
            }
            None => {
                let paths = propagation::simple_paths(s, consumer, propagation::DEFAULT_PATH_CAP)?;
                let on_paths: std::collections::BTreeSet<usize> = paths.iter().flatten().copied().collect();
                let forward_prob: Vec<f64> = s.edges.iter().map(|e| e.forward_prob).collect();
                let random_edges: Vec<usize> = on_paths
                    .into_iter()
                    .filter(|&e| forward_prob[e] > 0.0 && forward_prob[e] < 1.0)
                    .collect();
                if random_edges.is_empty() {
                    let forwarded: Vec<bool> = forward_prob.iter().map(|&p| p >= 1.0).collect();
                    MessageSource::Fixed(received_index(s, &paths, &forwarded)?)
                } else {
                    MessageSource::Paths {
                        paths,
                        random_edges,
                        forward_prob,
                    }
                }
            }
        };
        let (benefit, risk, shared) = match &model.impact {
            ImpactModel::Separate { benefit, risk } => {
                (ColumnSampler::new(&benefit.matrix), ColumnSampler::new(&risk.matrix), false)
            }
            ImpactModel::Shared { matrix, .. } => (ColumnSampler::new(matrix), ColumnSampler::new(matrix), true),
        };
        Ok(Self {
            scenario: s,
            source,
            inference: ColumnSampler::new(&model.inference.matrix),
            benefit,
            risk,
            shared,
            benefit_values: model.impact.benefit_values(),
            risk_values: model.impact.risk_values(),
            m: s.messages.len(),
        })
    }

    fn run_batch(&self, seed: u64, batch: u64, trials: u64) -> Result<Partial> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let mut out = Partial::new(self.m, self.benefit_values.len(), self.risk_values.len());
        let mut forwarded: Vec<bool> = self.scenario.edges.iter().map(|e| e.forward_prob >= 1.0).collect();
        for _ in 0..trials {
            let msg = match &self.source {
                MessageSource::Fixed(i) => *i,
                MessageSource::Explicit(cum) => sample_cumulative(cum, rng.random::<f64>()),
                MessageSource::Paths {
                    paths,
                    random_edges,
                    forward_prob,
                } => {
                    for &e in random_edges {
                        forwarded[e] = rng.random::<f64>() < forward_prob[e];
                    }
                    received_index(self.scenario, paths, &forwarded)?
                }
            };
            let y = self.inference.sample(msg, rng.random::<f64>());
            let (kb, kr) = if self.shared {
                let k = self.risk.sample(y, rng.random::<f64>());
                (k, k)
            } else {
                let kb = self.benefit.sample(y, rng.random::<f64>());
                (kb, self.risk.sample(y, rng.random::<f64>()))
            };
            let (b, r) = (self.benefit_values[kb], self.risk_values[kr]);
            out.benefit.push(b);
            out.risk.push(r);
            out.net.push(b - r);
            out.x[msg] += 1;
            out.zb[kb] += 1;
            out.zr[kr] += 1;
        }
        Ok(out)
    }
}

/// Message received when exactly the edges flagged in `forwarded` deliver.
fn received_index(s: &Scenario<f64>, paths: &[Vec<usize>], forwarded: &[bool]) -> Result<usize> {
    let mut values = Vec::new();
    let mut first_hops = Vec::new();
    for path in paths.iter().filter(|p| p.iter().all(|&e| forwarded[e])) {
        let hops: Vec<Hop<f64>> = path.iter().map(|&e| Hop::delivered(s.edges[e].disclosure)).collect();
        first_hops.push(hops[0].disclosure);
        values.push(path_disclosure(&hops, &s.operators.serial)?);
    }
    if values.is_empty() {
        return s
            .messages
            .no_message_index()
            .ok_or_else(|| Error::InvalidInput("nothing arrived and there is no no-message entry".into()));
    }
    let degree = fuse_paths(&values, &first_hops, &s.operators.parallel)?;
    disclose(&s.original_message, &degree, &s.messages)
}

pub fn simulate(s: &Scenario<f64>, cfg: &SimConfig) -> Result<SimResult> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let model = Model::new(s, &cfg.consumer)?;
    let batches = cfg.trials.div_ceil(BATCH_SIZE);
    let partials = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH_SIZE.min(cfg.trials - b * BATCH_SIZE);
            model.run_batch(cfg.seed, b, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Partial::new(model.m, model.benefit_values.len(), model.risk_values.len());
    for p in &partials {
        total.merge(p);
    }
    let n = cfg.trials as f64;
    let freq = |counts: &[u64]| counts.iter().map(|&c| c as f64 / n).collect::<Vec<_>>();
    Ok(SimResult {
        consumer: cfg.consumer.clone(),
        trials_used: cfg.trials,
        seed: cfg.seed,
        est_eb: total.benefit.mean,
        est_er: total.risk.mean,
        est_ec: total.net.mean,
        stderr_eb: total.benefit.stderr(),
        stderr_er: total.risk.stderr(),
        stderr_ec: total.net.stderr(),
        empirical_x: freq(&total.x),
        empirical_benefit_z: freq(&total.zb),
        empirical_risk_z: freq(&total.zr),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub quantity: &'static str,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub consumer: AgentId,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(quantity: &'static str, analytic: f64, estimate: f64, stderr: f64) -> OracleCheck {
    let diff = estimate - analytic;
    let (z_score, pass) = if stderr > 0.0 {
        let z = diff / stderr;
        (z, z.abs() <= Z_BOUND)
    } else {
        // A zero-variance sample must match exactly, up to rounding.
        let pass = diff.abs() <= 1e-9 * analytic.abs().max(1.0);
        (if pass { 0.0 } else { f64::INFINITY.copysign(diff) }, pass)
    };
    OracleCheck {
        quantity,
        analytic,
        estimate,
        stderr,
        z_score,
        pass,
    }
}

/// Compares analytic expectations against a simulation of the same consumer.
pub fn compare(analytic: &DecisionReport<f64>, sim: &SimResult) -> OracleReport {
    OracleReport {
        consumer: analytic.consumer.clone(),
        checks: vec![
            check("E[B]", analytic.expected_benefit, sim.est_eb, sim.stderr_eb),
            check("E[R]", analytic.expected_risk, sim.est_er, sim.stderr_er),
            check("E[C]", analytic.expected_net, sim.est_ec, sim.stderr_ec),
        ],
    }
}

pub fn oracle_compare(s: &Scenario<f64>, cfg: &SimConfig) -> Result<(DecisionReport<f64>, SimResult, OracleReport)> {
    let analytic = evaluate(s, &cfg.consumer, &s.operators.serial, &s.operators.parallel)?;
    let sim = simulate(s, cfg)?;
    let report = compare(&analytic, &sim);
    Ok((analytic, sim, report))
}
