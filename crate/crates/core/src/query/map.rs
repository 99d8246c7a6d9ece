//! Focus-centred concept maps. The motivation side holds what the focus
//! builds on (reached along its outgoing links), the impact side holds work
//! that builds on or argues with it (reached along incoming links).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::ClaimId;
use crate::inference::{propagate_challenges, Fact, PropagationConfig};
use crate::kb::KnowledgeBase;
use crate::schema::{
    ADDRESSES, ANALYSES, MODIFIES_EXTENDS, RAISES_ISSUES_WITH, REFUTES, SUPPORTS, USES_APPLIES,
};

pub const MOTIVATION_LINKS: [&str; 4] = [ADDRESSES, USES_APPLIES, ANALYSES, MODIFIES_EXTENDS];
pub const IMPACT_LINKS: [&str; 5] = [MODIFIES_EXTENDS, USES_APPLIES, SUPPORTS, RAISES_ISSUES_WITH, REFUTES];
pub const INFERRED_LINK: &str = "may-be-challenged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Motivation,
    Focus,
    Impact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeStatus {
    Asserted,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MapNode {
    pub id: String,
    pub kind: String,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MapEdge {
    pub source: String,
    pub link: String,
    pub target: String,
    pub status: EdgeStatus,
    pub claim: Option<ClaimId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMap {
    pub focus: String,
    pub nodes: Vec<MapNode>,
    pub edges: Vec<MapEdge>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("unknown format `{0}`, expected dot or json")]
    UnknownFormat(String),
    #[error("invalid map: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Dot,
    Json,
}

impl MapFormat {
    pub fn parse(s: &str) -> Result<Self, MapError> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(MapFormat::Dot),
            "json" => Ok(MapFormat::Json),
            _ => Err(MapError::UnknownFormat(s.to_string())),
        }
    }
}

impl ConceptMap {
    /// Nodes ordered left to right (motivation, focus, impact) then by id;
    /// edges by endpoints.
    pub fn sort(&mut self) {
        self.nodes.sort_by(|a, b| (a.side, &a.id).cmp(&(b.side, &b.id)));
        self.edges.sort();
        self.edges.dedup();
    }

    pub fn node(&self, id: &str) -> Option<&MapNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn side_ids(&self, side: Side) -> BTreeSet<&str> {
        self.nodes.iter().filter(|n| n.side == side).map(|n| n.id.as_str()).collect()
    }

    /// Structural checks: the focus occurs exactly once with side focus, node
    /// ids are unique and every edge joins two listed nodes.
    pub fn validate(&self) -> Result<(), MapError> {
        let focus_nodes: Vec<_> = self.nodes.iter().filter(|n| n.side == Side::Focus).collect();
        if focus_nodes.len() != 1 || focus_nodes[0].id != self.focus {
            return Err(MapError::Invalid("the focus must appear exactly once".into()));
        }
        let ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        if ids.len() != self.nodes.len() {
            return Err(MapError::Invalid("duplicate node".into()));
        }
        for e in &self.edges {
            if !ids.contains(e.source.as_str()) || !ids.contains(e.target.as_str()) {
                return Err(MapError::Invalid(format!("edge {} -> {} leaves the map", e.source, e.target)));
            }
        }
        Ok(())
    }
}

/// Bounded BFS from `focus`. `outgoing` follows claims from a node to their
/// targets, otherwise from targets back to sources.
fn reach(
    kb: &KnowledgeBase,
    focus: &str,
    depth: usize,
    links: &[&str],
    outgoing: bool,
) -> (BTreeSet<String>, Vec<MapEdge>) {
    let mut seen = BTreeSet::from([focus.to_string()]);
    let mut edges = Vec::new();
    let mut frontier = VecDeque::from([(focus.to_string(), 0)]);
    while let Some((node, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        let claims: Vec<_> = if outgoing {
            kb.claims_from(&node).collect()
        } else {
            kb.claims_to(&node).collect()
        };
        for c in claims.into_iter().filter(|c| links.contains(&c.assertion.link.as_str())) {
            let next = if outgoing { &c.assertion.target } else { &c.assertion.source };
            edges.push(MapEdge {
                source: c.assertion.source.clone(),
                link: c.assertion.link.clone(),
                target: c.assertion.target.clone(),
                status: EdgeStatus::Asserted,
                claim: Some(c.id.clone()),
            });
            if seen.insert(next.clone()) {
                frontier.push_back((next.clone(), d + 1));
            }
        }
    }
    seen.remove(focus);
    (seen, edges)
}

pub fn extract_concept_map(
    kb: &KnowledgeBase,
    focus: &str,
    depth: usize,
    include_inferred: bool,
) -> Result<ConceptMap, MapError> {
    if !kb.contains(focus) {
        return Err(MapError::UnknownId(focus.to_string()));
    }
    if depth == 0 {
        return Err(MapError::InvalidDepth);
    }
    let (motivation, mut edges) = reach(kb, focus, depth, &MOTIVATION_LINKS, true);
    let (impact, impact_edges) = reach(kb, focus, depth, &IMPACT_LINKS, false);
    edges.extend(impact_edges);

    let mut sides: BTreeMap<&str, Side> = BTreeMap::new();
    sides.insert(focus, Side::Focus);
    for id in &motivation {
        sides.insert(id, Side::Motivation);
    }
    for id in &impact {
        if motivation.contains(id) {
            log::debug!("`{id}` is on both sides of the map for `{focus}`, kept as motivation");
        } else {
            sides.insert(id, Side::Impact);
        }
    }

    if include_inferred {
        let facts = propagate_challenges(kb, &PropagationConfig::default()).unwrap_or_default();
        for f in facts {
            if let Fact::MayBeChallenged { element, via } = f.fact {
                let seed = via.last().cloned().unwrap_or_default();
                if sides.contains_key(element.as_str()) && sides.contains_key(seed.as_str()) {
                    edges.push(MapEdge {
                        source: element,
                        link: INFERRED_LINK.to_string(),
                        target: seed,
                        status: EdgeStatus::Inferred,
                        claim: None,
                    });
                }
            }
        }
    }

    let nodes = sides
        .into_iter()
        .map(|(id, side)| MapNode {
            id: id.to_string(),
            kind: kb.kind_of(id).unwrap_or_default().to_string(),
            side,
        })
        .collect();
    let mut map = ConceptMap {
        focus: focus.to_string(),
        nodes,
        edges,
    };
    map.sort();
    Ok(map)
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dot_node(n: &MapNode) -> String {
    let mut attrs = format!("label={}", dot_quote(&format!("{}\n{}", n.id, n.kind)));
    if n.side == Side::Focus {
        attrs.push_str(", shape=box, style=bold");
    }
    format!("{} [{attrs}];", dot_quote(&n.id))
}

pub fn to_dot(m: &ConceptMap) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=LR;\n", dot_quote(&m.focus));
    for (side, rank) in [(Side::Motivation, "min"), (Side::Focus, ""), (Side::Impact, "max")] {
        let nodes: Vec<&MapNode> = m.nodes.iter().filter(|n| n.side == side).collect();
        if nodes.is_empty() {
            continue;
        }
        if rank.is_empty() {
            for n in nodes {
                let _ = writeln!(out, "  {}", dot_node(n));
            }
        } else {
            let _ = writeln!(out, "  {{ rank={rank};");
            for n in nodes {
                let _ = writeln!(out, "    {}", dot_node(n));
            }
            out.push_str("  }\n");
        }
    }
    for e in &m.edges {
        let style = match e.status {
            EdgeStatus::Asserted => "",
            EdgeStatus::Inferred => ", style=dashed",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}{style}];",
            dot_quote(&e.source),
            dot_quote(&e.target),
            dot_quote(&e.link)
        );
    }
    out.push_str("}\n");
    out
}

pub fn to_json(m: &ConceptMap) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("maps always serialize");
    s.push('\n');
    s
}

pub fn export_map(m: &ConceptMap, format: MapFormat) -> String {
    match format {
        MapFormat::Dot => to_dot(m),
        MapFormat::Json => to_json(m),
    }
}

pub fn import_json(text: &str) -> Result<ConceptMap, MapError> {
    let m: ConceptMap = serde_json::from_str(text).map_err(|e| MapError::Invalid(e.to_string()))?;
    m.validate()?;
    Ok(m)
}
