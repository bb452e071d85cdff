use disclosure_core::continuous::spec::FamilySpec;
use disclosure_core::continuous::{descriptor, risk_density, ConditionalDensityFamily};
use disclosure_core::fixtures::{chain, james_alec};
use disclosure_core::montecarlo::{compare, oracle_compare, simulate, SimConfig};
use disclosure_core::scenario::DisclosureEdge;
use disclosure_core::*;
use num_rational::BigRational;

fn diamond() -> Scenario64 {
    let mut s = chain(&[0.9]);
    s.agents = ["a1", "a2", "a3", "a4"].map(AgentId::new).to_vec();
    s.consumers[0].id = AgentId::new("a4");
    let edge = |a: &str, b: &str, d: f64| DisclosureEdge {
        from: AgentId::new(a),
        to: AgentId::new(b),
        forward_prob: 1.0,
        disclosure: d,
    };
    s.edges = vec![edge("a1", "a2", 0.9), edge("a2", "a4", 0.9), edge("a1", "a3", 0.5), edge("a3", "a4", 0.5)];
    s
}

/// Every ordering of every subset of the intermediate agents, kept when each
/// consecutive pair is an edge. Folded with `p·δ` products and fused with min.
fn brute_force(s: &Scenario64, target: &str) -> Option<f64> {
    let middle: Vec<&AgentId> = s
        .agents
        .iter()
        .filter(|a| **a != s.producer && a.as_str() != target)
        .collect();
    let edge = |a: &str, b: &str| s.edges.iter().find(|e| e.from.as_str() == a && e.to.as_str() == b);
    let mut best: Option<f64> = None;
    let k = middle.len();
    for mask in 0u32..(1 << k) {
        let chosen: Vec<&AgentId> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| middle[i]).collect();
        let mut order: Vec<usize> = (0..chosen.len()).collect();
        loop {
            let mut seq = vec![s.producer.as_str()];
            seq.extend(order.iter().map(|&i| chosen[i].as_str()));
            seq.push(target);
            let hops: Option<Vec<_>> = seq.windows(2).map(|w| edge(w[0], w[1])).collect();
            if let Some(hops) = hops {
                let value = hops.iter().map(|e| e.forward_prob * e.disclosure).product::<f64>();
                best = Some(best.map_or(value, |b| b.min(value)));
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
    }
    best
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[test]
fn diamond_matches_brute_force() {
    let s = diamond();
    let d = effective_disclosure(&s, &AgentId::new("a4"), &SerialKind::Product, &ParallelKind::Min).unwrap();
    assert_eq!(d, 0.25);
    assert_eq!(Some(d), brute_force(&s, "a4"));
}

#[test]
fn dense_graphs_match_brute_force() {
    // Complete digraph on 6 agents with distinct values.
    let mut s = diamond();
    s.agents = (1..=6).map(|i| AgentId::new(format!("a{i}"))).collect();
    s.edges.clear();
    for a in 1..=6 {
        for b in 1..=6 {
            if a != b {
                s.edges.push(DisclosureEdge {
                    from: AgentId::new(format!("a{a}")),
                    to: AgentId::new(format!("a{b}")),
                    forward_prob: 1.0 - 0.01 * b as f64,
                    disclosure: 0.3 + 0.1 * ((a * 7 + b * 3) % 7) as f64,
                });
            }
        }
    }
    for target in ["a2", "a4", "a6"] {
        let d = effective_disclosure(&s, &AgentId::new(target), &SerialKind::Product, &ParallelKind::Min).unwrap();
        let oracle = brute_force(&s, target).unwrap();
        assert!((d - oracle).abs() <= 1e-15, "{target}: {d} vs {oracle}");
    }
}

#[test]
fn exact_chain_and_diamond() {
    let to_exact = |s: &Scenario64| s.map_scalar(|v| Exact::from_decimal(*v));
    let frac = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let c = to_exact(&chain(&[0.7, 0.5]));
    assert_eq!(
        effective_disclosure(&c, &AgentId::new("a3"), &SerialKind::Product, &ParallelKind::Min).unwrap(),
        frac(7, 20)
    );
    let d = to_exact(&diamond());
    assert_eq!(
        effective_disclosure(&d, &AgentId::new("a4"), &SerialKind::Product, &ParallelKind::Min).unwrap(),
        frac(1, 4)
    );
}

#[test]
fn stderr_shrinks_with_root_trials() {
    let s = james_alec();
    for id in ["James", "Alec"] {
        let stderr = |trials| {
            simulate(
                &s,
                &SimConfig {
                    trials,
                    seed: 99,
                    consumer: AgentId::new(id),
                },
            )
            .unwrap()
            .stderr_er
        };
        let (a, b, c) = (stderr(10_000), stderr(100_000), stderr(1_000_000));
        for ratio in [a / b, b / c] {
            let scaled = ratio / 10f64.sqrt();
            assert!((1.0 / 1.5..=1.5).contains(&scaled), "{id}: ratio {ratio}");
        }
    }
}

#[test]
fn empirical_distributions_converge() {
    let s = james_alec();
    let trials = 1_000_000u64;
    let bound = 5.0 / (trials as f64).sqrt();
    for id in ["James", "Alec"] {
        let cfg = SimConfig {
            trials,
            seed: 5,
            consumer: AgentId::new(id),
        };
        let (analytic, sim, report) = oracle_compare(&s, &cfg).unwrap();
        assert!(report.pass(), "{report:?}");
        let tv = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        assert!(tv(&sim.empirical_risk_z, &analytic.risk_distribution) <= bound);
        assert!(tv(&sim.empirical_benefit_z, &analytic.benefit_distribution) <= bound);
        for v in [&sim.empirical_x, &sim.empirical_risk_z, &sim.empirical_benefit_z] {
            assert!((v.iter().sum::<f64>() - 1.0).abs() <= bound);
        }
        assert!(sim.stderr_eb >= 0.0 && sim.stderr_er >= 0.0 && sim.stderr_ec >= 0.0);
    }
}

#[test]
fn corrupted_inference_is_detected() {
    let s = james_alec();
    let alec = AgentId::new("Alec");
    let analytic = evaluate_default(&s, &alec).unwrap();
    let mut corrupted = s.clone();
    let model = corrupted.consumers.iter_mut().find(|c| c.id == alec).unwrap();
    let m = &mut model.inference.matrix;
    for c in 0..m.cols() {
        *m.entry_mut(0, c) += 0.2;
        let total = m.column_sum(c);
        for r in 0..m.rows() {
            *m.entry_mut(r, c) /= total;
        }
    }
    let sim = simulate(
        &corrupted,
        &SimConfig {
            trials: 1_000_000,
            seed: 3,
            consumer: alec,
        },
    )
    .unwrap();
    assert!(!compare(&analytic, &sim).pass());
}

fn mean_at(impact: &str, inference: &str, n: usize, x: f64) -> f64 {
    let fz: ConditionalDensityFamily<f64> = impact.parse::<FamilySpec>().unwrap().build(n).unwrap();
    let fi = inference.parse::<FamilySpec>().unwrap().build(n).unwrap();
    descriptor(|w| w, &risk_density(&fz, &fi, x).unwrap().density)
}

#[test]
fn trapezoid_error_is_second_order() {
    // Densities with flat endpoints converge faster than h², so every
    // family here has a nonzero slope at 0 or 1.
    for (impact, inference) in [
        ("tilt(-1,1.5)", "beta(1,1,2,-1)"),
        ("beta(1,1,1,0)", "tilt(1,-2)"),
        ("beta(2,0,1,0)", "beta(1,0,2,0)"),
        ("beta(1,2,2,-1)", "tilt(-0.5,1)"),
    ] {
        for x in [0.25, 0.6] {
            let d: Vec<f64> = [16, 32, 64].iter().map(|&n| mean_at(impact, inference, n, x)).collect();
            let ratio = (d[0] - d[1]) / (d[1] - d[2]);
            assert!((3.0..=5.0).contains(&ratio), "{impact} / {inference} at {x}: ratio {ratio}");
        }
    }
}

