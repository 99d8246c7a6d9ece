//! Implementation-against-oracle comparisons for one generated knowledge
//! base. Each check returns one message per mismatch.

use std::collections::{BTreeMap, BTreeSet};

use claimgraph::inference::{
    compute_impact, detect_inconsistent_positions, detect_perspectives, detect_schools_of_thought, propagate_challenges,
    ImpactWeights, PerspectiveConfig, PropagationConfig,
};
use claimgraph::kb::KnowledgeBase;
use claimgraph::query::naive::{naive_execute, naive_execute_with};
use claimgraph::query::{execute, execute_with, extract_concept_map, QueryOptions};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::*;

pub type Check = fn(&KnowledgeBase, u64) -> Vec<String>;

pub const ALL: [(&str, Check); 7] = [
    ("queries", queries),
    ("inconsistent-positions", inconsistent),
    ("challenge-propagation", challenges),
    ("impact", impact),
    ("schools-of-thought", schools),
    ("perspectives", perspectives),
    ("concept-maps", maps),
];

fn concept_ids(kb: &KnowledgeBase) -> Vec<String> {
    kb.concepts().map(|c| c.id.clone()).collect()
}

pub fn queries(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let mut out = Vec::new();
    let mut rng = rng(seed ^ 0x5eed);
    for _ in 0..25 {
        let q = random_query(kb, &mut rng);
        if execute(kb, &q) != naive_execute(kb, &q) {
            out.push(format!("seed {seed}: {q}"));
        }
    }
    let opts = QueryOptions {
        impact_weights: ImpactWeights {
            docs: rng.random_range(0.0..2.0),
            domains: rng.random_range(0.0..2.0),
            problems: rng.random_range(0.0..2.0),
        },
        perspective_threshold: rng.random_range(0.05..1.0),
    };
    for _ in 0..5 {
        let q = random_query(kb, &mut rng);
        if execute_with(kb, &q, &opts) != naive_execute_with(kb, &q, &opts) {
            out.push(format!("seed {seed}: {q} with {opts:?}"));
        }
    }
    out
}

pub fn inconsistent(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let (got, want) = (detect_inconsistent_positions(kb), oracle_inconsistent(kb));
    if got == want {
        Vec::new()
    } else {
        vec![format!("seed {seed}: {got:?} != {want:?}")]
    }
}

pub fn challenges(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for _ in 0..3 {
        let cfg = PropagationConfig {
            max_depth: rng.random_range(1..=6),
            via_modifies_extends: rng.random_bool(0.8),
            via_uses_applies: rng.random_bool(0.8),
        };
        match propagate_challenges(kb, &cfg) {
            Ok(got) if got == oracle_challenges(kb, &cfg) => {}
            other => out.push(format!("seed {seed}, {cfg:?}: {other:?}")),
        }
    }
    out
}

pub fn impact(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let w = ImpactWeights {
        docs: rng.random_range(0.0..3.0),
        domains: rng.random_range(0.0..3.0),
        problems: rng.random_range(0.0..3.0),
    };
    let ids = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    let mut out = Vec::new();
    for target in concept_ids(kb) {
        let want = oracle_impact(kb, &target, &w);
        let ok = match compute_impact(kb, &target, w) {
            Ok(got) => {
                ids(&got.docs.ids) == want.docs
                    && ids(&got.domains.ids) == want.domains
                    && ids(&got.problems.ids) == want.problems
                    && got.docs.count == want.docs.len()
                    && got.domains.count == want.domains.len()
                    && got.problems.count == want.problems.len()
                    && (got.scalar - want.scalar).abs() < 1e-9
            }
            Err(_) => false,
        };
        if !ok {
            out.push(format!("seed {seed}: impact {target}"));
        }
    }
    out
}

pub fn schools(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    (1..=3)
        .filter(|&k| detect_schools_of_thought(kb, k).ok() != Some(oracle_schools(kb, k)))
        .map(|k| format!("seed {seed}: schools at {k}"))
        .collect()
}

pub fn perspectives(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let problems: Vec<String> = kb
        .concepts()
        .filter(|c| c.kind == "problem")
        .map(|c| c.id.clone())
        .collect();
    let mut out = Vec::new();
    for _ in 0..3 {
        let cfg = PerspectiveConfig {
            seed_problem: if rng.random_bool(0.5) { problems.choose(&mut rng).cloned() } else { None },
            threshold: *[0.2, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0].choose(&mut rng).unwrap(),
        };
        let result = detect_perspectives(kb, &cfg)
            .map_err(|e| e.to_string())
            .and_then(|facts| check_perspectives(kb, &cfg, &facts));
        if let Err(e) = result {
            out.push(format!("seed {seed}, {cfg:?}: {e}"));
        }
    }
    out
}

pub fn maps(kb: &KnowledgeBase, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let ids: Vec<String> = kb
        .concepts()
        .map(|c| c.id.clone())
        .chain(kb.articles().map(|a| a.id.clone()))
        .collect();
    let mut out = Vec::new();
    for _ in 0..5 {
        let focus = ids.choose(&mut rng).unwrap();
        let depth = rng.random_range(1..=4);
        let inferred = rng.random_bool(0.5);
        let at = format!("seed {seed} focus {focus} depth {depth} inferred {inferred}");
        let map = match extract_concept_map(kb, focus, depth, inferred) {
            Ok(m) => m,
            Err(e) => {
                out.push(format!("{at}: {e}"));
                continue;
            }
        };
        if let Err(e) = map.validate() {
            out.push(format!("{at}: {e}"));
        }
        let (sides, edges) = oracle_map(kb, focus, depth, inferred);
        let got_sides: BTreeMap<String, _> = map.nodes.iter().map(|n| (n.id.clone(), n.side)).collect();
        if got_sides != sides {
            out.push(format!("{at}: sides differ"));
        }
        let got_edges: BTreeSet<EdgeKey> = map
            .edges
            .iter()
            .map(|e| (e.source.clone(), e.link.clone(), e.target.clone(), e.status, e.claim.clone()))
            .collect();
        if got_edges.len() != map.edges.len() || got_edges != edges {
            out.push(format!("{at}: edges differ"));
        }
    }
    out
}
