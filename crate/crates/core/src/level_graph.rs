//! Enhanced level graphs: stable graphs with a level function, prong
//! orders on vertical edges and marked zeros/poles.

use num_integer::Integer;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Deserializer, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Violation};

/// Compares identifiers so that embedded numbers sort numerically
/// (`e2 < e10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for k in 1..=bytes.len() {
            if k == bytes.len() || bytes[k].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..k]));
                start = k;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(&cb) {
        let ord = match (da, db) {
            (true, true) => {
                let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
                ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
            }
            _ => sa.cmp(sb),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

pub fn sort_ids(ids: &mut [String]) {
    ids.sort_by(|a, b| natural_cmp(a, b));
}

pub(crate) fn de_id<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Int(n) => n.to_string(),
        Raw::Str(s) => s,
    })
}

fn de_opt_id<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_id")] String);
    Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
}

fn de_ends<'de, D: Deserializer<'de>>(d: D) -> Result<[String; 2], D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_id")] String);
    let [a, b] = <[Wrap; 2]>::deserialize(d)?;
    Ok([a.0, b.0])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    #[serde(deserialize_with = "de_id")]
    pub id: String,
    pub genus: u32,
    pub level: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(deserialize_with = "de_id")]
    pub id: String,
    #[serde(deserialize_with = "de_ends")]
    pub ends: [String; 2],
    #[serde(default, deserialize_with = "de_opt_id")]
    pub top: Option<String>,
    #[serde(default)]
    pub kappa: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    #[serde(deserialize_with = "de_id")]
    pub vertex: String,
    pub order: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnhancedLevelGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub markings: Vec<Marking>,
}

impl EnhancedLevelGraph {
    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    fn level_of(&self, v: &str) -> i32 {
        self.vertex(v).map_or(0, |v| v.level)
    }

    /// Number of levels below the top level.
    pub fn depth(&self) -> usize {
        self.vertices.iter().map(|v| (-v.level).max(0) as usize).max().unwrap_or(0)
    }

    /// Passage indices `-1, ..., -L`; passage `i` sits between levels
    /// `i + 1` and `i`.
    pub fn passages(&self) -> Vec<i32> {
        (1..=self.depth() as i32).map(|k| -k).collect()
    }

    /// Levels of the two endpoints, upper first.
    pub fn end_levels(&self, e: &Edge) -> (i32, i32) {
        let (a, b) = (self.level_of(&e.ends[0]), self.level_of(&e.ends[1]));
        (a.max(b), a.min(b))
    }

    pub fn is_horizontal(&self, e: &Edge) -> bool {
        let (hi, lo) = self.end_levels(e);
        hi == lo
    }

    /// Level at which the vanishing cycle of `e` is recorded: the common
    /// level of a horizontal edge, the lower level of a vertical one.
    pub fn carrier_level(&self, e: &Edge) -> i32 {
        self.end_levels(e).1
    }

    /// All edge ids in natural order.
    pub fn edge_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.edges.iter().map(|e| e.id.clone()).collect();
        sort_ids(&mut ids);
        ids
    }

    pub fn horizontal_edges(&self) -> Vec<String> {
        let mut ids: Vec<String> =
            self.edges.iter().filter(|e| self.is_horizontal(e)).map(|e| e.id.clone()).collect();
        sort_ids(&mut ids);
        ids
    }

    pub fn vertical_edges(&self) -> Vec<String> {
        let mut ids: Vec<String> =
            self.edges.iter().filter(|e| !self.is_horizontal(e)).map(|e| e.id.clone()).collect();
        sort_ids(&mut ids);
        ids
    }

    pub fn crosses(&self, e: &Edge, passage: i32) -> bool {
        let (hi, lo) = self.end_levels(e);
        hi > passage && passage >= lo
    }

    /// Vertical edges crossing passage `i`, in natural order.
    pub fn crossing_edges(&self, passage: i32) -> Vec<String> {
        let mut ids: Vec<String> = self
            .edges
            .iter()
            .filter(|e| !self.is_horizontal(e) && self.crosses(e, passage))
            .map(|e| e.id.clone())
            .collect();
        sort_ids(&mut ids);
        ids
    }

    fn check_passage(&self, passage: i32) -> Result<(), Error> {
        if passage >= 0 || passage < -(self.depth() as i32) {
            return Err(Error::Precondition(format!("no passage {passage}")));
        }
        Ok(())
    }

    /// `a_i`: least common multiple of the prong orders across passage `i`.
    pub fn lcm_weight(&self, passage: i32) -> Result<u64, Error> {
        self.check_passage(passage)?;
        let kappas: Vec<u64> = self
            .crossing_edges(passage)
            .iter()
            .map(|id| self.edge(id).and_then(|e| e.kappa).unwrap_or(1) as u64)
            .collect();
        if kappas.is_empty() {
            return Err(Error::Precondition(format!("disconnected level passage {passage}")));
        }
        Ok(kappas.iter().fold(1, |acc, k| acc.lcm(k)))
    }

    /// `m_{e,i} = a_i / κ_e` for a vertical edge crossing passage `i`, else 0.
    pub fn prong_multiplicity(&self, edge: &str, passage: i32) -> Result<u64, Error> {
        let e = self.edge(edge).ok_or_else(|| Error::Precondition(format!("no edge {edge}")))?;
        if self.is_horizontal(e) || !self.crosses(e, passage) {
            return Ok(0);
        }
        Ok(self.lcm_weight(passage)? / e.kappa.unwrap_or(1).max(1) as u64)
    }

    /// Codimension `H + L` of the boundary stratum.
    pub fn codim(&self) -> usize {
        self.horizontal_edges().len() + self.depth()
    }

    pub fn top_vertices_have_horizontal(&self) -> bool {
        self.vertices.iter().filter(|v| v.level == 0).all(|v| {
            self.edges.iter().any(|e| self.is_horizontal(e) && e.ends.contains(&v.id))
        })
    }

    /// Order of the differential at the half-edge of `e` attached to `v`.
    fn end_order(&self, e: &Edge, v: &str) -> i64 {
        if self.is_horizontal(e) {
            return -1;
        }
        let (hi, _) = self.end_levels(e);
        let k = e.kappa.unwrap_or(1) as i64;
        if self.level_of(v) == hi {
            k - 1
        } else {
            -k - 1
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        if self.vertices.is_empty() {
            out.push(Violation::new("graph", "graph has no vertices"));
            return out;
        }
        for v in &self.vertices {
            if !seen.insert(v.id.as_str()) {
                out.push(Violation::new("graph", format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut seen_e = BTreeSet::new();
        for e in &self.edges {
            if !seen_e.insert(e.id.as_str()) {
                out.push(Violation::new("graph", format!("duplicate edge id {}", e.id)));
            }
        }
        let levels: BTreeSet<i32> = self.vertices.iter().map(|v| v.level).collect();
        let depth = self.depth() as i32;
        if levels.iter().any(|&l| l > 0) || levels.len() as i32 != depth + 1 {
            out.push(Violation::new("levels", "levels are not surjective onto 0, -1, ..., -L"));
        }
        let mut dangling = false;
        for e in &self.edges {
            for v in &e.ends {
                if self.vertex(v).is_none() {
                    dangling = true;
                    out.push(Violation::new(
                        "graph",
                        format!("edge {} references missing vertex {v}", e.id),
                    ));
                }
            }
        }
        for m in &self.markings {
            if self.vertex(&m.vertex).is_none() {
                dangling = true;
                out.push(Violation::new(
                    "graph",
                    format!("marking references missing vertex {}", m.vertex),
                ));
            }
        }
        if dangling {
            return out;
        }
        for e in &self.edges {
            let (hi, _) = self.end_levels(e);
            if self.is_horizontal(e) {
                if e.top.is_some() || e.kappa.is_some() {
                    out.push(Violation::new(
                        "edge-kind",
                        format!("edge {}: equal levels but kind vertical", e.id),
                    ));
                }
                continue;
            }
            match &e.top {
                None => out.push(Violation::new(
                    "edge-kind",
                    format!("edge {}: vertical edge without top endpoint", e.id),
                )),
                Some(t) if !e.ends.contains(t) || self.level_of(t) != hi => out.push(
                    Violation::new(
                        "edge-kind",
                        format!("edge {}: top {t} is not the upper endpoint", e.id),
                    ),
                ),
                _ => {}
            }
            if e.kappa.unwrap_or(0) < 1 {
                out.push(Violation::new(
                    "edge-kind",
                    format!("edge {}: vertical edge needs kappa >= 1", e.id),
                ));
            }
        }
        for v in &self.vertices {
            let marks: i64 = self.markings.iter().filter(|m| m.vertex == v.id).map(|m| m.order).sum();
            let ends: i64 = self
                .edges
                .iter()
                .flat_map(|e| e.ends.iter().filter(|w| **w == v.id).map(move |_| e))
                .map(|e| self.end_order(e, &v.id))
                .sum();
            let want = 2 * v.genus as i64 - 2;
            if marks + ends != want {
                out.push(Violation::new(
                    "order-balance",
                    format!("vertex {}: orders sum to {} but 2g-2 = {want}", v.id, marks + ends),
                ));
            }
        }
        if !self.is_connected() {
            out.push(Violation::new("graph", "graph is disconnected"));
        }
        out
    }

    fn index(&self) -> BTreeMap<&str, usize> {
        self.vertices.iter().enumerate().map(|(k, v)| (v.id.as_str(), k)).collect()
    }

    fn is_connected(&self) -> bool {
        let idx = self.index();
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for e in &self.edges {
            if let (Some(&a), Some(&b)) = (idx.get(e.ends[0].as_str()), idx.get(e.ends[1].as_str())) {
                uf.union(a, b);
            }
        }
        (1..self.vertices.len()).all(|k| uf.equiv(0, k))
    }

    /// All undegenerations, passage subsets outermost, each in increasing
    /// bitmask order.
    pub fn undegenerations(&self) -> Vec<Undegeneration> {
        let passages = self.passages();
        let hor = self.horizontal_edges();
        let mut out = Vec::with_capacity(1 << (passages.len() + hor.len()));
        for pm in 0u64..(1 << passages.len()) {
            for hm in 0u64..(1 << hor.len()) {
                out.push(Undegeneration {
                    kept_passages: pick(&passages, pm),
                    kept_horizontal: pick(&hor, hm),
                });
            }
        }
        out
    }
}

fn pick<T: Clone>(items: &[T], mask: u64) -> Vec<T> {
    items.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, x)| x.clone()).collect()
}

/// A partial smoothing: the kept level passages and kept horizontal edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undegeneration {
    /// Kept passages in decreasing order (`-1` first).
    pub kept_passages: Vec<i32>,
    pub kept_horizontal: Vec<String>,
}

impl Undegeneration {
    pub fn new(mut kept_passages: Vec<i32>, mut kept_horizontal: Vec<String>) -> Self {
        kept_passages.sort_unstable_by(|a, b| b.cmp(a));
        kept_passages.dedup();
        sort_ids(&mut kept_horizontal);
        kept_horizontal.dedup();
        Undegeneration { kept_passages, kept_horizontal }
    }

    pub fn identity(graph: &EnhancedLevelGraph) -> Self {
        Undegeneration::new(graph.passages(), graph.horizontal_edges())
    }

    /// New level of an old level under the order-preserving collapse.
    pub fn relabel(&self, level: i32) -> i32 {
        -(self.kept_passages.iter().filter(|&&p| p >= level).count() as i32)
    }

    pub fn keeps_edge(&self, graph: &EnhancedLevelGraph, e: &Edge) -> bool {
        if graph.is_horizontal(e) {
            self.kept_horizontal.contains(&e.id)
        } else {
            self.kept_passages.iter().any(|&p| graph.crosses(e, p))
        }
    }

    pub fn codim(&self) -> usize {
        self.kept_passages.len() + self.kept_horizontal.len()
    }

    /// Expresses an undegeneration of the target graph as one of the source.
    pub fn lift(&self, inner: &Undegeneration) -> Undegeneration {
        let passages = inner
            .kept_passages
            .iter()
            .filter_map(|&j| self.kept_passages.get((-j - 1) as usize).copied())
            .collect();
        let hor = inner
            .kept_horizontal
            .iter()
            .filter(|e| self.kept_horizontal.contains(e))
            .cloned()
            .collect();
        Undegeneration::new(passages, hor)
    }

    /// The target level graph: smoothed edges are contracted, merged
    /// vertices carry the summed genus plus the loops created.
    pub fn target(&self, graph: &EnhancedLevelGraph) -> EnhancedLevelGraph {
        let idx = graph.index();
        let n = graph.vertices.len();
        let mut uf = UnionFind::<usize>::new(n);
        let mut kept = Vec::new();
        let mut smoothed = Vec::new();
        for e in &graph.edges {
            let (Some(&a), Some(&b)) = (idx.get(e.ends[0].as_str()), idx.get(e.ends[1].as_str()))
            else {
                continue;
            };
            if self.keeps_edge(graph, e) {
                kept.push(e);
            } else {
                uf.union(a, b);
                smoothed.push(a);
            }
        }
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for k in 0..n {
            members.entry(uf.find(k)).or_default().push(k);
        }
        let mut name = BTreeMap::new();
        let mut vertices = Vec::new();
        for (root, ms) in &members {
            let mut parts: Vec<String> = ms
                .iter()
                .flat_map(|&k| graph.vertices[k].id.split('+').map(str::to_string).collect::<Vec<_>>())
                .collect();
            sort_ids(&mut parts);
            let id = parts.join("+");
            let inner = smoothed.iter().filter(|&&a| uf.find(a) == *root).count() as u32;
            let genus = ms.iter().map(|&k| graph.vertices[k].genus).sum::<u32>() + inner + 1
                - ms.len() as u32;
            let level = self.relabel(graph.vertices[ms[0]].level);
            for &k in ms {
                name.insert(k, id.clone());
            }
            vertices.push(Vertex { id, genus, level });
        }
        vertices.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        let rename = |v: &str| name[&idx[v]].clone();
        let edges = kept
            .into_iter()
            .map(|e| Edge {
                id: e.id.clone(),
                ends: [rename(&e.ends[0]), rename(&e.ends[1])],
                top: e.top.as_deref().map(rename),
                kappa: e.kappa,
            })
            .collect();
        let markings = graph
            .markings
            .iter()
            .filter(|m| idx.contains_key(m.vertex.as_str()))
            .map(|m| Marking { vertex: rename(&m.vertex), order: m.order })
            .collect();
        EnhancedLevelGraph { vertices, edges, markings }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: &str, genus: u32, level: i32) -> Vertex {
        Vertex { id: id.into(), genus, level }
    }

    fn h(id: &str, a: &str, b: &str) -> Edge {
        Edge { id: id.into(), ends: [a.into(), b.into()], top: None, kappa: None }
    }

    fn vert(id: &str, top: &str, bot: &str, kappa: u32) -> Edge {
        Edge { id: id.into(), ends: [top.into(), bot.into()], top: Some(top.into()), kappa: Some(kappa) }
    }

    fn mk(vertex: &str, order: i64) -> Marking {
        Marking { vertex: vertex.into(), order }
    }

    fn two_level() -> EnhancedLevelGraph {
        EnhancedLevelGraph {
            vertices: vec![v("v0", 2, 0), v("v1", 1, -1)],
            edges: vec![vert("e", "v0", "v1", 1)],
            markings: vec![mk("v0", 2), mk("v1", 1), mk("v1", 1)],
        }
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["e10".to_string(), "e2".into(), "e1".into(), "a".into()];
        sort_ids(&mut ids);
        assert_eq!(ids, ["a", "e1", "e2", "e10"]);
    }

    #[test]
    fn two_level_graph_is_valid() {
        let g = two_level();
        assert!(g.validate().is_empty(), "{:?}", g.validate());
        assert_eq!(g.codim(), 1);
        assert_eq!(g.crossing_edges(-1), ["e"]);
        assert_eq!(g.lcm_weight(-1).unwrap(), 1);
    }

    #[test]
    fn horizontal_edge_marked_vertical_is_rejected() {
        let g = EnhancedLevelGraph {
            vertices: vec![v("a", 0, 0), v("b", 0, 0)],
            edges: vec![vert("e", "a", "b", 1), h("f", "a", "b")],
            markings: vec![mk("a", 0), mk("b", 0)],
        };
        let vs = g.validate();
        assert!(vs.iter().any(|x| x.message.contains("equal levels but kind vertical")));
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let mut g = two_level();
        g.edges.push(h("x", "v0", "ghost"));
        assert!(g.validate().iter().any(|x| x.message.contains("missing vertex ghost")));
    }

    #[test]
    fn lcm_of_prong_orders() {
        // Three vertical edges with prongs 2, 3, 4 across one passage.
        let g = EnhancedLevelGraph {
            vertices: vec![v("t", 5, 0), v("b", 0, -1)],
            edges: vec![vert("e1", "t", "b", 2), vert("e2", "t", "b", 3), vert("e3", "t", "b", 4)],
            markings: vec![mk("t", 2), mk("b", 10)],
        };
        assert!(g.validate().is_empty(), "{:?}", g.validate());
        assert_eq!(g.lcm_weight(-1).unwrap(), 12);
        assert_eq!(g.prong_multiplicity("e1", -1).unwrap(), 6);
        assert_eq!(g.prong_multiplicity("e2", -1).unwrap(), 4);
        assert_eq!(g.prong_multiplicity("e3", -1).unwrap(), 3);
    }

    #[test]
    fn disconnected_passage_is_an_error() {
        let g = two_level();
        assert!(g.lcm_weight(-2).is_err());
    }

    #[test]
    fn undegeneration_count_and_full_smoothing() {
        let g = EnhancedLevelGraph {
            vertices: vec![v("a", 0, 0), v("b", 0, -1)],
            edges: vec![h("h1", "a", "a"), vert("e", "a", "b", 1), vert("f", "a", "b", 1)],
            markings: vec![mk("a", 0), mk("b", 2)],
        };
        assert!(g.validate().is_empty(), "{:?}", g.validate());
        let all = g.undegenerations();
        assert_eq!(all.len(), 4);
        let smooth = all[0].target(&g);
        assert_eq!(smooth.vertices.len(), 1);
        assert_eq!(smooth.vertices[0].genus, 2);
        assert_eq!(smooth.codim(), 0);
        for u in &all {
            assert!(u.target(&g).validate().is_empty());
            assert_eq!(u.target(&g).codim(), u.codim());
        }
    }
}
