//! Shared generators and brute-force oracles for the integration tests.
//!
//! The oracles below recompute every result from the raw claim list with
//! plain scans and fixpoints. They never call the adjacency index or the
//! inference helpers they are checked against.
#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet};

use claimgraph::dsl::{ArticleDecl, ClaimDecl, ElementDecl, Query, RelationGroup, Submission, Target};
use claimgraph::ids::ClaimId;
use claimgraph::inference::{Fact, ImpactWeights, InferredFact, PerspectiveConfig, PropagationConfig};
use claimgraph::kb::{ArticleMetadata, Assertion, Claim, Justification, KnowledgeBase};
use claimgraph::query::{EdgeStatus, Side};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

pub const SUBKIND: &str = "hypothesis";
pub const KINDS: [&str; 9] = [
    "idea",
    "problem",
    "theory-model",
    "methodology",
    "software",
    "language",
    "evidence",
    "phenomenon",
    SUBKIND,
];
pub const LINKS: [&str; 11] = [
    "addresses",
    "uses-applies",
    "modifies-extends",
    "analyses",
    "predicts-envisages",
    "supports",
    "raises-issues-with",
    "refutes",
    "describes",
    "sub-problem-of",
    "variation-on",
];
const WEIGHTED_LINKS: [(&str, u32); 10] = [
    ("modifies-extends", 5),
    ("uses-applies", 5),
    ("supports", 4),
    ("refutes", 3),
    ("raises-issues-with", 2),
    ("addresses", 3),
    ("analyses", 1),
    ("predicts-envisages", 1),
    ("sub-problem-of", 1),
    ("variation-on", 1),
];
const ARGUMENTATION: [&str; 3] = ["supports", "raises-issues-with", "refutes"];
const CHALLENGES: [&str; 2] = ["refutes", "raises-issues-with"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Endpoint of a planned claim: a node by plan index or an earlier claim op.
#[derive(Debug, Clone, Copy)]
pub enum Ref {
    Node(usize),
    Claim(usize),
}

#[derive(Debug, Clone)]
pub enum Op {
    Concept {
        node: usize,
        kind: &'static str,
    },
    Article {
        node: usize,
        authors: Vec<String>,
        domains: Vec<String>,
        describes: Vec<usize>,
    },
    Claim {
        authors: Vec<String>,
        source: Ref,
        link: &'static str,
        target: Ref,
        doc: Option<usize>,
    },
}

/// A replayable mutation sequence over abstract node indices.
#[derive(Debug, Clone)]
pub struct Plan {
    pub ops: Vec<Op>,
    pub nodes: usize,
    pub domains: Vec<String>,
}

pub fn default_name(i: usize) -> String {
    format!("n{i}")
}

impl Plan {
    /// Applies every op to a fresh KB, naming node `i` as `name(i)`. Ops the
    /// KB rejects are skipped, identically under any renaming.
    pub fn build_with(&self, name: &dyn Fn(usize) -> String) -> KnowledgeBase {
        let mut kb = KnowledgeBase::default();
        kb.register_node_kind(SUBKIND, Some("idea")).unwrap();
        let mut claim_ids: Vec<Option<ClaimId>> = Vec::new();
        let mut ts = 0;
        for op in &self.ops {
            ts += 1;
            match op {
                Op::Concept { node, kind } => {
                    kb.intern_concept(&name(*node), kind).unwrap();
                }
                Op::Article {
                    node,
                    authors,
                    domains,
                    describes,
                } => {
                    let meta = ArticleMetadata {
                        id: name(*node),
                        title: format!("title {}", name(*node)),
                        authors: authors.clone(),
                        domains: domains.clone(),
                        describes: describes.iter().map(|d| name(*d)).collect(),
                        ..Default::default()
                    };
                    kb.add_article(&meta, ts).unwrap();
                }
                Op::Claim {
                    authors,
                    source,
                    link,
                    target,
                    doc,
                } => {
                    let resolve = |r: &Ref| match r {
                        Ref::Node(n) => Some(name(*n)),
                        Ref::Claim(c) => claim_ids[*c].as_ref().map(|id| id.as_str().to_string()),
                    };
                    let id = match (resolve(source), resolve(target)) {
                        (Some(s), Some(t)) => {
                            let just = match doc {
                                Some(d) => Justification::Document(name(*d)),
                                None => Justification::Text(format!("{s} {link} {t}")),
                            };
                            kb.assert_claim(authors, Assertion::new(s, *link, t), just, ts).ok()
                        }
                        _ => None,
                    };
                    claim_ids.push(id);
                }
            }
        }
        kb
    }

    pub fn build(&self) -> KnowledgeBase {
        self.build_with(&default_name)
    }
}

fn authors(rng: &mut StdRng) -> Vec<String> {
    let n = rng.random_range(1..=3);
    (0..n).map(|_| format!("u{}", rng.random_range(0..6))).collect()
}

/// A random plan of at most 40 nodes (at most 8 of them articles) and 120
/// claim attempts.
pub fn random_plan(rng: &mut StdRng) -> Plan {
    let nodes = rng.random_range(4..=40);
    let n_articles = rng.random_range(0..=(nodes / 4).min(8));
    let n_concepts = nodes - n_articles;
    let domains: Vec<String> = (0..4).map(|i| format!("d{i}")).collect();
    let mut ops = Vec::new();
    let mut kinds: Vec<&'static str> = Vec::new();
    for node in 0..n_concepts {
        let kind = *KINDS.choose(rng).unwrap();
        kinds.push(kind);
        ops.push(Op::Concept { node, kind });
    }
    let articles: Vec<usize> = (n_concepts..nodes).collect();
    for &node in &articles {
        let describes: BTreeSet<usize> = (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(0..n_concepts))
            .collect();
        let doms: BTreeSet<String> = (0..rng.random_range(0..=2))
            .map(|_| domains.choose(rng).unwrap().clone())
            .collect();
        ops.push(Op::Article {
            node,
            authors: authors(rng),
            domains: doms.into_iter().collect(),
            describes: describes.into_iter().collect(),
        });
    }
    let of_kind = |ks: &[&str]| -> Vec<usize> { (0..n_concepts).filter(|&i| ks.contains(&kinds[i])).collect() };
    let problems = of_kind(&["problem"]);
    let predictable = of_kind(&["software", "phenomenon", "idea", SUBKIND]);

    for n_claims in 0..rng.random_range(0..=120) {
        let link = WEIGHTED_LINKS.choose_weighted(rng, |(_, w)| *w).unwrap().0;
        let argumentation = ARGUMENTATION.contains(&link);
        let source = if argumentation && !articles.is_empty() && rng.random_bool(0.2) {
            Ref::Node(*articles.choose(rng).unwrap())
        } else if link == "sub-problem-of" && !problems.is_empty() {
            Ref::Node(*problems.choose(rng).unwrap())
        } else {
            Ref::Node(rng.random_range(0..n_concepts))
        };
        let pick = |rng: &mut StdRng, pool: &[usize]| match pool.choose(rng) {
            Some(&n) => Ref::Node(n),
            None => Ref::Node(rng.random_range(0..n_concepts)),
        };
        let target = match link {
            "addresses" | "sub-problem-of" => pick(rng, &problems),
            "predicts-envisages" => pick(rng, &predictable),
            "modifies-extends" | "variation-on" if rng.random_bool(0.8) => {
                let Ref::Node(s) = source else { unreachable!() };
                let same = of_kind(&[kinds.get(s).copied().unwrap_or("idea")]);
                pick(rng, &same)
            }
            _ if argumentation && n_claims > 0 && rng.random_bool(0.25) => Ref::Claim(rng.random_range(0..n_claims)),
            _ => Ref::Node(rng.random_range(0..n_concepts)),
        };
        let doc = if !articles.is_empty() && rng.random_bool(0.6) {
            Some(*articles.choose(rng).unwrap())
        } else {
            None
        };
        ops.push(Op::Claim {
            authors: authors(rng),
            source,
            link,
            target,
            doc,
        });
    }
    Plan { ops, nodes, domains }
}

pub fn random_kb(seed: u64) -> KnowledgeBase {
    random_plan(&mut rng(seed)).build()
}

fn node_ids(kb: &KnowledgeBase) -> Vec<String> {
    kb.concepts()
        .map(|c| c.id.clone())
        .chain(kb.articles().map(|a| a.id.clone()))
        .collect()
}

/// A random query over `kb`, now and then naming an unknown id.
pub fn random_query(kb: &KnowledgeBase, rng: &mut StdRng) -> Query {
    let ids = node_ids(kb);
    let id = |rng: &mut StdRng| -> String {
        if ids.is_empty() || rng.random_bool(0.05) {
            "no-such-node".to_string()
        } else {
            ids.choose(rng).unwrap().clone()
        }
    };
    match rng.random_range(0..6) {
        0 => {
            let mut kinds: Vec<&str> = KINDS.to_vec();
            kinds.extend(["scholarly-contribution-element", "article", "Theory/Model"]);
            let mut links: Vec<&str> = LINKS.to_vec();
            links.push("predicts");
            Query::Find {
                kind: kinds.choose(rng).unwrap().to_string(),
                link: links.choose(rng).unwrap().to_string(),
                target: id(rng),
                direct: rng.random_bool(0.3),
            }
        }
        1 => Query::ClaimsAbout { target: id(rng) },
        2 => Query::Impact { target: id(rng) },
        3 => Query::Applying {
            method: id(rng),
            domains: (0..rng.random_range(1..=2))
                .map(|_| format!("d{}", rng.random_range(0..5)))
                .collect(),
        },
        4 => Query::Contradictions { target: id(rng) },
        _ => Query::Perspectives {
            problem: id(rng),
            threshold: [None, Some(0.25), Some(0.5), Some(1.0 / 3.0), Some(1.0)]
                .choose(rng)
                .copied()
                .unwrap(),
        },
    }
}

// ---------------------------------------------------------------------------
// submissions

const ID_CHARS: &[char] = &[
    'a', 'b', 'c', 'x', 'Y', 'Z', '0', '7', '-', '_', '.', '/', ':', 'é', 'Ω', '+',
];
const STR_CHARS: &[char] = &[
    'a', 'B', ' ', '"', '\\', '\n', '\t', '(', ')', ';', 'é', '日', '7', '\'',
];

pub fn raw_id(rng: &mut StdRng) -> String {
    let len = rng.random_range(1..=10);
    let mut s: String = (0..len).map(|_| *ID_CHARS.choose(rng).unwrap()).collect();
    if !s.chars().any(char::is_alphanumeric) {
        s.push('q');
    }
    s
}

pub fn raw_string(rng: &mut StdRng) -> String {
    let len = rng.random_range(0..=16);
    (0..len).map(|_| *STR_CHARS.choose(rng).unwrap()).collect()
}

fn some<T>(rng: &mut StdRng, f: impl FnOnce(&mut StdRng) -> T) -> Option<T> {
    rng.random_bool(0.6).then(|| f(rng))
}

fn many<T>(rng: &mut StdRng, max: usize, mut f: impl FnMut(&mut StdRng) -> T) -> Vec<T> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| f(rng)).collect()
}

/// A random normalized submission value.
pub fn random_submission(rng: &mut StdRng) -> Submission {
    let article = some(rng, |rng| ArticleDecl {
        id: raw_id(rng),
        title: some(rng, raw_string),
        authors: many(rng, 3, raw_id),
        publication_details: some(rng, raw_string),
        url: some(rng, raw_string),
        domains: many(rng, 2, raw_id),
        subject_codes: many(rng, 3, raw_string),
        describes: many(rng, 3, raw_id),
        loc: Default::default(),
    });
    let elements = many(rng, 4, |rng| ElementDecl {
        kind: KINDS[..8].choose(rng).unwrap().to_string(),
        id: raw_id(rng),
        relations: many(rng, 3, |rng| RelationGroup {
            link: LINKS.choose(rng).unwrap().to_string(),
            targets: (0..rng.random_range(1..=3)).map(|_| Target::new(raw_id(rng))).collect(),
        }),
        loc: Default::default(),
    });
    let claims = many(rng, 3, |rng| ClaimDecl {
        authors: (0..rng.random_range(1..=3)).map(|_| raw_id(rng)).collect(),
        source: raw_id(rng),
        link: LINKS.choose(rng).unwrap().to_string(),
        target: raw_id(rng),
        because: raw_string(rng),
        loc: Default::default(),
    });
    let mut sub = Submission {
        article,
        elements,
        claims,
    };
    sub.normalize();
    sub
}

/// Random byte-level damage: insertions, deletions and replacements biased
/// toward the characters the reader treats specially.
pub fn mutate(text: &str, rng: &mut StdRng) -> String {
    const SPECIAL: &[char] = &['(', ')', '"', '\\', ';', '\n', ' ', 'x', '\u{0}', 'é', '#'];
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.random_range(1..=4) {
        let at = rng.random_range(0..=chars.len());
        match rng.random_range(0..3) {
            0 => chars.insert(at, *SPECIAL.choose(rng).unwrap()),
            1 if at < chars.len() => {
                chars.remove(at);
            }
            _ if at < chars.len() => chars[at] = *SPECIAL.choose(rng).unwrap(),
            _ => chars.push(*SPECIAL.choose(rng).unwrap()),
        }
    }
    if rng.random_bool(0.1) {
        let cut = rng.random_range(0..=chars.len());
        chars.truncate(cut);
    }
    chars.into_iter().collect()
}

/// Submission text for a live repository: mostly valid against `kb`, with
/// occasional rejects and lax-mode partial failures. Returns the text and
/// whether to submit it in lax mode.
pub fn random_mutation_text(kb: &KnowledgeBase, step: usize, rng: &mut StdRng) -> (String, bool) {
    let concepts: Vec<(String, String)> = kb.concepts().map(|c| (c.id.clone(), c.kind.clone())).collect();
    let problems: Vec<&String> = concepts.iter().filter(|(_, k)| k == "problem").map(|(i, _)| i).collect();
    let roll = rng.random_range(0..10);
    if concepts.len() < 4 || roll == 0 {
        let kind = KINDS[..8].choose(rng).unwrap();
        return (format!("(problem p{step})\n({kind} c{step})\n"), false);
    }
    if roll == 1 {
        let bad = ["(article", "(idea)", "(theory-model x (frobs y))", "(claim (by) (assert a b c))"];
        return (bad.choose(rng).unwrap().to_string(), false);
    }
    if roll <= 3 {
        let (s, _) = concepts.choose(rng).unwrap();
        let (t, _) = concepts.choose(rng).unwrap();
        let link = ["supports", "refutes", "raises-issues-with", "uses-applies", "analyses"]
            .choose(rng)
            .unwrap();
        return (
            format!("(claim (by u{}) (assert {s} {link} {t}) (because \"step {step}\"))\n", rng.random_range(0..6)),
            false,
        );
    }
    let kind = KINDS[..8].choose(rng).unwrap();
    let el = format!("e{step}");
    let mut text = format!(
        "(article doc{step}\n  (has-title \"Doc {step}\")\n  (has-author u{} u{})\n  (concerns-domain d{})\n  (describes {el}))\n({kind} {el}",
        rng.random_range(0..6),
        rng.random_range(0..6),
        rng.random_range(0..4)
    );
    if let Some(p) = problems.choose(rng) {
        text.push_str(&format!("\n  (addresses {p})"));
    }
    let (t, _) = concepts.choose(rng).unwrap();
    text.push_str(&format!("\n  (uses-applies {t})"));
    let same: Vec<&String> = concepts.iter().filter(|(_, k)| k == kind).map(|(i, _)| i).collect();
    if let Some(t) = same.choose(rng) {
        text.push_str(&format!("\n  (modifies-extends {t})"));
    }
    let lax = rng.random_bool(0.3);
    if lax {
        text.push_str("\n  (analyses missing-target)");
    }
    text.push_str(")\n");
    (text, lax)
}

// ---------------------------------------------------------------------------
// oracles

fn claims_by(kb: &KnowledgeBase, links: &[&str]) -> Vec<Claim> {
    kb.claims()
        .iter()
        .filter(|c| links.contains(&c.assertion.link.as_str()))
        .cloned()
        .collect()
}

fn is_concept(kb: &KnowledgeBase, id: &str) -> bool {
    kb.concepts().any(|c| c.id == id)
}

/// `x` plus everything with a modifies-extends chain into it.
pub fn oracle_family(kb: &KnowledgeBase, x: &str) -> BTreeSet<String> {
    let mut set = BTreeSet::from([x.to_string()]);
    let edges = claims_by(kb, &["modifies-extends"]);
    loop {
        let before = set.len();
        for c in &edges {
            if set.contains(&c.assertion.target) {
                set.insert(c.assertion.source.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// The article a claim belongs to.
pub fn oracle_doc(kb: &KnowledgeBase, c: &Claim) -> Option<String> {
    if kb.articles().any(|a| a.id == c.assertion.source) {
        return Some(c.assertion.source.clone());
    }
    match &c.justification {
        Justification::Document(d) => Some(d.clone()),
        Justification::Text(_) => None,
    }
}

pub fn oracle_inconsistent(kb: &KnowledgeBase) -> Vec<InferredFact> {
    let mut found: BTreeMap<(String, String), BTreeSet<ClaimId>> = BTreeMap::new();
    for s in kb.claims() {
        for r in kb.claims() {
            if s.assertion.link != "supports" || r.assertion.link != "refutes" || s.assertion.target != r.assertion.target
            {
                continue;
            }
            for a in &s.authors {
                if r.authors.contains(a) {
                    let e = found.entry((a.clone(), s.assertion.target.clone())).or_default();
                    e.insert(s.id.clone());
                    e.insert(r.id.clone());
                }
            }
        }
    }
    found
        .into_iter()
        .map(|((author, assertion), ids)| InferredFact {
            fact: Fact::InconsistentPosition { author, assertion },
            provenance: ids.into_iter().collect(),
        })
        .collect()
}

/// Enumerates every walk of 1..=max_depth propagation edges and keeps the
/// smallest by (length, node sequence) that ends on a challenged element.
pub fn oracle_challenges(kb: &KnowledgeBase, cfg: &PropagationConfig) -> Vec<InferredFact> {
    let mut links = Vec::new();
    if cfg.via_modifies_extends {
        links.push("modifies-extends");
    }
    if cfg.via_uses_applies {
        links.push("uses-applies");
    }
    let mut hop: BTreeMap<(String, String), ClaimId> = BTreeMap::new();
    for c in claims_by(kb, &links) {
        let key = (c.assertion.source.clone(), c.assertion.target.clone());
        let e = hop.entry(key).or_insert_with(|| c.id.clone());
        if c.id < *e {
            *e = c.id.clone();
        }
    }
    let mut seeds: BTreeMap<String, BTreeSet<ClaimId>> = BTreeMap::new();
    for c in claims_by(kb, &CHALLENGES) {
        if is_concept(kb, &c.assertion.target) {
            seeds.entry(c.assertion.target.clone()).or_default().insert(c.id.clone());
        }
    }

    fn walk(
        path: &mut Vec<String>,
        hop: &BTreeMap<(String, String), ClaimId>,
        seeds: &BTreeMap<String, BTreeSet<ClaimId>>,
        max: usize,
        best: &mut Option<Vec<String>>,
    ) {
        let last = path.last().unwrap().clone();
        if path.len() > 1 && seeds.contains_key(&last) {
            let better = match best {
                None => true,
                Some(b) => (path.len(), &*path) < (b.len(), &*b),
            };
            if better {
                *best = Some(path.clone());
            }
        }
        if path.len() > max {
            return;
        }
        for (s, t) in hop.keys() {
            if *s == last {
                path.push(t.clone());
                walk(path, hop, seeds, max, best);
                path.pop();
            }
        }
    }

    let mut facts = Vec::new();
    for c in kb.concepts() {
        let mut best = None;
        walk(&mut vec![c.id.clone()], &hop, &seeds, cfg.max_depth, &mut best);
        let Some(path) = best else { continue };
        let mut provenance: Vec<ClaimId> = path
            .windows(2)
            .map(|w| hop[&(w[0].clone(), w[1].clone())].clone())
            .collect();
        provenance.extend(seeds[path.last().unwrap()].iter().cloned());
        facts.push(InferredFact {
            fact: Fact::MayBeChallenged {
                element: c.id.clone(),
                via: path,
            },
            provenance,
        });
    }
    facts
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleImpact {
    pub docs: BTreeSet<String>,
    pub domains: BTreeSet<String>,
    pub problems: BTreeSet<String>,
    pub scalar: f64,
}

pub fn oracle_impact(kb: &KnowledgeBase, target: &str, w: &ImpactWeights) -> OracleImpact {
    let family = oracle_family(kb, target);
    let users: BTreeSet<String> = kb
        .claims()
        .iter()
        .filter(|c| {
            (c.assertion.link == "uses-applies" || c.assertion.link == "modifies-extends")
                && family.contains(&c.assertion.target)
        })
        .map(|c| c.assertion.source.clone())
        .collect();
    let mut docs = BTreeSet::new();
    let mut problems = BTreeSet::new();
    for c in kb.claims() {
        let a = &c.assertion;
        if a.link == "describes" && users.contains(&a.target) {
            docs.insert(a.source.clone());
        }
        if a.link == "addresses" && users.contains(&a.source) {
            problems.insert(a.target.clone());
        }
    }
    let domains: BTreeSet<String> = kb
        .articles()
        .filter(|a| docs.contains(&a.id))
        .flat_map(|a| a.domains.iter().cloned())
        .collect();
    let scalar = w.docs * docs.len() as f64 + w.domains * domains.len() as f64 + w.problems * problems.len() as f64;
    OracleImpact {
        docs,
        domains,
        problems,
        scalar,
    }
}

pub fn oracle_schools(kb: &KnowledgeBase, min_docs: usize) -> Vec<InferredFact> {
    let concepts: Vec<String> = kb.concepts().map(|c| c.id.clone()).collect();
    let families: BTreeMap<&str, BTreeSet<String>> = concepts.iter().map(|c| (c.as_str(), oracle_family(kb, c))).collect();
    let with_docs: Vec<(String, &Claim)> = kb
        .claims()
        .iter()
        .filter_map(|c| oracle_doc(kb, c).map(|d| (d, c)))
        .collect();
    let side = |pro: &str, con: &str| -> (BTreeSet<String>, BTreeSet<ClaimId>) {
        let hits = |links: &[&str], fam: &BTreeSet<String>| -> BTreeMap<String, BTreeSet<ClaimId>> {
            let mut m: BTreeMap<String, BTreeSet<ClaimId>> = BTreeMap::new();
            for (d, c) in &with_docs {
                if links.contains(&c.assertion.link.as_str()) && fam.contains(&c.assertion.target) {
                    m.entry(d.clone()).or_default().insert(c.id.clone());
                }
            }
            m
        };
        let s = hits(&["supports"], &families[pro]);
        let r = hits(&CHALLENGES, &families[con]);
        let mut docs = BTreeSet::new();
        let mut claims = BTreeSet::new();
        for (d, cs) in &s {
            if let Some(more) = r.get(d) {
                docs.insert(d.clone());
                claims.extend(cs.iter().cloned());
                claims.extend(more.iter().cloned());
            }
        }
        (docs, claims)
    };
    let mut facts = Vec::new();
    for (i, l) in concepts.iter().enumerate() {
        for m in &concepts[i + 1..] {
            let (d1, c1) = side(l, m);
            let (d2, c2) = side(m, l);
            if d1.len() >= min_docs && d2.len() >= min_docs {
                facts.push(InferredFact {
                    fact: Fact::SchoolOfThought {
                        first: l.clone(),
                        second: m.clone(),
                    },
                    provenance: c1.union(&c2).cloned().collect(),
                });
            }
        }
    }
    facts
}

fn base_kind(kb: &KnowledgeBase, kind: &str) -> String {
    let mut k = kind.to_string();
    loop {
        let parent = kb.schema().node_kind(&k).and_then(|n| n.parent.clone());
        match parent.as_deref() {
            Some("scholarly-contribution-element") | None => return k,
            Some(p) => k = p.to_string(),
        }
    }
}

fn oracle_neighborhood(kb: &KnowledgeBase, problem: &str) -> BTreeSet<String> {
    let mut problems = BTreeSet::from([problem.to_string()]);
    loop {
        let before = problems.len();
        for c in claims_by(kb, &["sub-problem-of"]) {
            if problems.contains(&c.assertion.target) {
                problems.insert(c.assertion.source.clone());
            }
        }
        if problems.len() == before {
            break;
        }
    }
    let addressers: BTreeSet<String> = claims_by(kb, &["addresses"])
        .into_iter()
        .filter(|c| problems.contains(&c.assertion.target))
        .map(|c| c.assertion.source.clone())
        .collect();
    let mut out = addressers.clone();
    for c in kb.claims() {
        if addressers.contains(&c.assertion.source) {
            out.insert(c.assertion.target.clone());
        }
    }
    out
}

pub type Signatures = BTreeMap<String, BTreeMap<String, BTreeSet<ClaimId>>>;

pub fn oracle_signatures(kb: &KnowledgeBase, seed_problem: Option<&str>) -> Signatures {
    let within = seed_problem.map(|p| oracle_neighborhood(kb, p));
    let mut out: Signatures = BTreeMap::new();
    for c in claims_by(kb, &["supports", "uses-applies"]) {
        let t = &c.assertion.target;
        let Some(concept) = kb.concepts().find(|x| &x.id == t) else { continue };
        let base = base_kind(kb, &concept.kind);
        if !["theory-model", "methodology", "language", "evidence"].contains(&base.as_str()) {
            continue;
        }
        if within.as_ref().is_some_and(|n| !n.contains(t)) {
            continue;
        }
        for a in &c.authors {
            out.entry(a.clone()).or_default().entry(t.clone()).or_default().insert(c.id.clone());
        }
    }
    out
}

fn meets(shared: usize, union: usize, t: f64) -> bool {
    shared as f64 >= t * union as f64 - 1e-9
}

fn jaccard(a: &BTreeSet<&String>, b: &BTreeSet<&String>) -> (usize, usize) {
    let shared = a.intersection(b).count();
    (shared, a.len() + b.len() - shared)
}

/// Checks a perspective fact list against the clustering contract: a sorted
/// partition of the signature authors, clusters internally above the
/// threshold, no two clusters mergeable, shared concepts and provenance
/// exactly as recomputed here.
pub fn check_perspectives(kb: &KnowledgeBase, cfg: &PerspectiveConfig, facts: &[InferredFact]) -> Result<(), String> {
    let sigs = oracle_signatures(kb, cfg.seed_problem.as_deref());
    let set_of = |a: &String| -> BTreeSet<&String> { sigs[a].keys().collect() };
    let mut clusters: Vec<Vec<String>> = Vec::new();
    for f in facts {
        let Fact::Perspective { authors, concepts } = &f.fact else {
            return Err(format!("unexpected fact {f:?}"));
        };
        if authors.is_empty() || authors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("authors not sorted and unique: {authors:?}"));
        }
        for a in authors {
            if !sigs.contains_key(a) {
                return Err(format!("{a} has no signature"));
            }
        }
        for (i, a) in authors.iter().enumerate() {
            for b in &authors[i + 1..] {
                let (s, u) = jaccard(&set_of(a), &set_of(b));
                if !meets(s, u, cfg.threshold) {
                    return Err(format!("{a} and {b} share {s}/{u}, below {}", cfg.threshold));
                }
            }
        }
        let mut shared: BTreeSet<&String> = set_of(&authors[0]);
        for a in &authors[1..] {
            shared = shared.intersection(&set_of(a)).copied().collect();
        }
        let mut expect: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for id in shared {
            let kind = &kb.concepts().find(|c| &c.id == id).unwrap().kind;
            expect.entry(base_kind(kb, kind)).or_default().push(id.clone());
        }
        let got = [
            ("theory-model", &concepts.theory_models),
            ("methodology", &concepts.methodologies),
            ("language", &concepts.languages),
            ("evidence", &concepts.evidence),
        ];
        for (kind, ids) in got {
            if expect.get(kind).cloned().unwrap_or_default() != *ids {
                return Err(format!("shared {kind} for {authors:?}: got {ids:?}, want {:?}", expect.get(kind)));
            }
        }
        let prov: BTreeSet<ClaimId> = authors.iter().flat_map(|a| sigs[a].values().flatten().cloned()).collect();
        if prov.into_iter().collect::<Vec<_>>() != f.provenance {
            return Err(format!("provenance mismatch for {authors:?}"));
        }
        clusters.push(authors.clone());
    }
    let covered: Vec<&String> = clusters.iter().flatten().collect();
    let unique: BTreeSet<&String> = covered.iter().copied().collect();
    if covered.len() != unique.len() || unique.len() != sigs.len() {
        return Err(format!("clusters {clusters:?} do not partition {:?}", sigs.keys().collect::<Vec<_>>()));
    }
    for (i, x) in clusters.iter().enumerate() {
        for y in &clusters[i + 1..] {
            let all_meet = x
                .iter()
                .all(|a| y.iter().all(|b| {
                    let (s, u) = jaccard(&set_of(a), &set_of(b));
                    meets(s, u, cfg.threshold)
                }));
            if all_meet {
                return Err(format!("clusters {x:?} and {y:?} could still merge"));
            }
        }
    }
    let mut sorted = facts.to_vec();
    sorted.sort();
    if sorted != facts {
        return Err("facts are not sorted".into());
    }
    Ok(())
}

pub type EdgeKey = (String, String, String, EdgeStatus, Option<ClaimId>);

/// Map sides and edges by bounded relaxation over the raw claim list.
pub fn oracle_map(
    kb: &KnowledgeBase,
    focus: &str,
    depth: usize,
    include_inferred: bool,
) -> (BTreeMap<String, Side>, BTreeSet<EdgeKey>) {
    let relax = |links: &[&str], outgoing: bool| -> BTreeMap<String, usize> {
        let claims = claims_by(kb, links);
        let mut dist = BTreeMap::from([(focus.to_string(), 0usize)]);
        loop {
            let mut changed = false;
            for c in &claims {
                let (from, to) = if outgoing {
                    (&c.assertion.source, &c.assertion.target)
                } else {
                    (&c.assertion.target, &c.assertion.source)
                };
                let Some(&d) = dist.get(from) else { continue };
                if d < depth && dist.get(to).is_none_or(|&old| old > d + 1) {
                    dist.insert(to.clone(), d + 1);
                    changed = true;
                }
            }
            if !changed {
                return dist;
            }
        }
    };
    let motivation_links = ["addresses", "uses-applies", "analyses", "modifies-extends"];
    let impact_links = ["modifies-extends", "uses-applies", "supports", "raises-issues-with", "refutes"];
    let m = relax(&motivation_links, true);
    let i = relax(&impact_links, false);

    let mut sides = BTreeMap::from([(focus.to_string(), Side::Focus)]);
    for id in i.keys().chain(m.keys()) {
        if id != focus {
            let side = if m.contains_key(id) { Side::Motivation } else { Side::Impact };
            sides.insert(id.clone(), side);
        }
    }
    let mut edges = BTreeSet::new();
    for c in kb.claims() {
        let a = &c.assertion;
        let out = motivation_links.contains(&a.link.as_str()) && m.get(&a.source).is_some_and(|&d| d < depth);
        let inc = impact_links.contains(&a.link.as_str()) && i.get(&a.target).is_some_and(|&d| d < depth);
        if out || inc {
            edges.insert((a.source.clone(), a.link.clone(), a.target.clone(), EdgeStatus::Asserted, Some(c.id.clone())));
        }
    }
    if include_inferred {
        for f in oracle_challenges(kb, &PropagationConfig::default()) {
            let Fact::MayBeChallenged { element, via } = f.fact else { continue };
            let seed = via.last().unwrap().clone();
            if sides.contains_key(&element) && sides.contains_key(&seed) {
                edges.insert((element, "may-be-challenged".into(), seed, EdgeStatus::Inferred, None));
            }
        }
    }
    (sides, edges)
}
