//! CDS instances as labeled bipartite graphs.
//!
//! Node `A_x` carries Alice's signal for input `x`, node `B_y` Bob's signal
//! for input `y`. An edge `{A_x, B_y}` is *qualified* when the secret must be
//! recoverable from the pair and *unqualified* when the pair must reveal
//! nothing.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

/// A signal node. Indices are 1-based; A nodes order before B nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub side: Side,
    pub index: u32,
}

impl NodeId {
    pub const fn a(index: u32) -> Self {
        NodeId {
            side: Side::A,
            index,
        }
    }

    pub const fn b(index: u32) -> Self {
        NodeId {
            side: Side::B,
            index,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::A => 'A',
            Side::B => 'B',
        };
        write!(f, "{s}{}", self.index)
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("invalid node name {s:?}; expected A<n> or B<n>"));
        let (side, rest) = match s.as_bytes().first() {
            Some(b'A') => (Side::A, &s[1..]),
            Some(b'B') => (Side::B, &s[1..]),
            _ => return Err(bad()),
        };
        if rest.starts_with('0') || rest.starts_with('+') {
            return Err(bad());
        }
        let index: u32 = rest.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(NodeId { side, index })
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Qualified,
    Unqualified,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Qualified => "qualified",
            Label::Unqualified => "unqualified",
        })
    }
}

/// Edge `{A_a, B_b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub label: Label,
}

impl Edge {
    pub fn qualified(a: u32, b: u32) -> Self {
        Edge {
            a,
            b,
            label: Label::Qualified,
        }
    }

    pub fn unqualified(a: u32, b: u32) -> Self {
        Edge {
            a,
            b,
            label: Label::Unqualified,
        }
    }

    pub fn a_node(&self) -> NodeId {
        NodeId::a(self.a)
    }

    pub fn b_node(&self) -> NodeId {
        NodeId::b(self.b)
    }

    pub fn name(&self) -> String {
        format!("{{A{},B{}}}", self.a, self.b)
    }
}

/// Unordered node pair, used for verdicts and witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeRef {
    pub a: NodeId,
    pub b: NodeId,
}

impl From<&Edge> for EdgeRef {
    fn from(e: &Edge) -> Self {
        EdgeRef {
            a: e.a_node(),
            b: e.b_node(),
        }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct CdsGraph {
    a_count: u32,
    b_count: u32,
    edges: Vec<Edge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    a_count: u32,
    b_count: u32,
    edges: Vec<Edge>,
}

impl TryFrom<GraphFile> for CdsGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        CdsGraph::new(f.a_count, f.b_count, f.edges)
    }
}

impl From<CdsGraph> for GraphFile {
    fn from(g: CdsGraph) -> Self {
        GraphFile {
            a_count: g.a_count,
            b_count: g.b_count,
            edges: g.edges,
        }
    }
}

/// A broken graph invariant, reported by [`CdsGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateEdge {
        edge: EdgeRef,
    },
    /// Every incident edge is qualified; the node can be stripped.
    OnlyQualifiedEdges {
        node: NodeId,
    },
    IsolatedNode {
        node: NodeId,
    },
    NoQualifiedEdge,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge {edge}"),
            Violation::OnlyQualifiedEdges { node } => write!(
                f,
                "node lacks unqualified edge: {node} has only qualified edges"
            ),
            Violation::IsolatedNode { node } => {
                write!(f, "node lacks unqualified edge: {node} has no edges")
            }
            Violation::NoQualifiedEdge => write!(f, "graph has no qualified edge"),
        }
    }
}

/// Output of [`CdsGraph::strip_secret_nodes`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stripped {
    pub removed: Vec<NodeId>,
    /// `(old, new)` names of surviving nodes whose index changed.
    pub renamed: Vec<(NodeId, NodeId)>,
}

impl CdsGraph {
    /// Checks that every edge references existing nodes. The remaining
    /// invariants are reported by [`CdsGraph::validate`].
    pub fn new(a_count: u32, b_count: u32, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.a == 0 || e.a > a_count || e.b == 0 || e.b > b_count {
                return Err(Error::input(format!(
                    "edge {} out of range for {a_count}+{b_count} nodes",
                    e.name()
                )));
            }
        }
        Ok(CdsGraph {
            a_count,
            b_count,
            edges,
        })
    }

    pub fn a_count(&self) -> u32 {
        self.a_count
    }

    pub fn b_count(&self) -> u32 {
        self.b_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_with(&self, label: Label) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.label == label)
    }

    pub fn node_count(&self) -> usize {
        (self.a_count + self.b_count) as usize
    }

    /// Dense index: A nodes first, then B nodes.
    pub fn index_of(&self, n: NodeId) -> Option<usize> {
        match n.side {
            Side::A if n.index >= 1 && n.index <= self.a_count => Some(n.index as usize - 1),
            Side::B if n.index >= 1 && n.index <= self.b_count => {
                Some((self.a_count + n.index) as usize - 1)
            }
            _ => None,
        }
    }

    pub fn node_at(&self, idx: usize) -> NodeId {
        let idx = idx as u32;
        if idx < self.a_count {
            NodeId::a(idx + 1)
        } else {
            NodeId::b(idx - self.a_count + 1)
        }
    }

    /// All nodes in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(|i| self.node_at(i))
    }

    pub fn endpoints(&self, e: &Edge) -> (usize, usize) {
        (e.a as usize - 1, (self.a_count + e.b) as usize - 1)
    }

    /// Sorted adjacency lists over edges with the given label.
    pub fn adjacency(&self, label: Label) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in self.edges_with(label) {
            let (u, v) = self.endpoints(e);
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn find_edge(&self, a: u32, b: u32) -> Option<&Edge> {
        self.edges.iter().find(|e| e.a == a && e.b == b)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if !seen.insert((e.a, e.b)) {
                out.push(Violation::DuplicateEdge { edge: e.into() });
            }
        }
        let mut has_q = vec![false; self.node_count()];
        let mut has_u = vec![false; self.node_count()];
        for e in &self.edges {
            let (u, v) = self.endpoints(e);
            let flags = match e.label {
                Label::Qualified => &mut has_q,
                Label::Unqualified => &mut has_u,
            };
            flags[u] = true;
            flags[v] = true;
        }
        for i in 0..self.node_count() {
            if !has_u[i] {
                let node = self.node_at(i);
                out.push(if has_q[i] {
                    Violation::OnlyQualifiedEdges { node }
                } else {
                    Violation::IsolatedNode { node }
                });
            }
        }
        if !has_q.iter().any(|&q| q) {
            out.push(Violation::NoQualifiedEdge);
        }
        out
    }

    /// Removes nodes whose every incident edge is qualified (such a node can
    /// carry the secret in the clear) and renumbers the survivors on each side.
    pub fn strip_secret_nodes(&self) -> (CdsGraph, Stripped) {
        let strip: BTreeSet<NodeId> = self
            .validate()
            .into_iter()
            .filter_map(|v| match v {
                Violation::OnlyQualifiedEdges { node } => Some(node),
                _ => None,
            })
            .collect();
        let renumber = |side: Side, count: u32| -> Vec<Option<u32>> {
            let mut next = 0;
            (1..=count)
                .map(|i| {
                    if strip.contains(&NodeId { side, index: i }) {
                        None
                    } else {
                        next += 1;
                        Some(next)
                    }
                })
                .collect()
        };
        let a_map = renumber(Side::A, self.a_count);
        let b_map = renumber(Side::B, self.b_count);
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge {
                    a: a_map[e.a as usize - 1]?,
                    b: b_map[e.b as usize - 1]?,
                    label: e.label,
                })
            })
            .collect();
        let mut renamed = Vec::new();
        for (side, map) in [(Side::A, &a_map), (Side::B, &b_map)] {
            for (i, m) in map.iter().enumerate() {
                if let Some(n) = m {
                    if *n != i as u32 + 1 {
                        renamed.push((
                            NodeId {
                                side,
                                index: i as u32 + 1,
                            },
                            NodeId { side, index: *n },
                        ));
                    }
                }
            }
        }
        let a_count = a_map.iter().flatten().count() as u32;
        let b_count = b_map.iter().flatten().count() as u32;
        let g = CdsGraph {
            a_count,
            b_count,
            edges,
        };
        (
            g,
            Stripped {
                removed: strip.into_iter().collect(),
                renamed,
            },
        )
    }
}

/// Position `t` (1-based) on the unqualified path of the cyclic family:
/// v_{2i−1} = A_i, v_{2i} = B_i.
pub fn path_node(t: usize) -> NodeId {
    assert!(t >= 1);
    if t % 2 == 1 {
        NodeId::a(t.div_ceil(2) as u32)
    } else {
        NodeId::b((t / 2) as u32)
    }
}

/// The (kd+1)+(kd+1) instance with one unqualified path v_1 … v_{2(kd+1)} and
/// kd+1 cyclic qualified edges {v_i, v_{((i+d−1) mod 2(kd+1))+1}} for odd i.
pub fn theorem4_graph(k: usize, d: usize) -> Result<CdsGraph> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if d < 3 || d % 2 == 0 {
        return Err(Error::input(format!(
            "d must be odd and at least 3, got {d}"
        )));
    }
    let side = (k * d + 1) as u32;
    let n = 2 * (k * d + 1);
    let mut edges = Vec::with_capacity(n - 1 + n / 2);
    let edge = |u: NodeId, v: NodeId, label: Label| {
        let (a, b) = if u.side == Side::A { (u, v) } else { (v, u) };
        Edge {
            a: a.index,
            b: b.index,
            label,
        }
    };
    for t in 1..n {
        edges.push(edge(path_node(t), path_node(t + 1), Label::Unqualified));
    }
    for i in (1..=n).step_by(2) {
        let partner = (i + d - 1) % n + 1;
        edges.push(edge(path_node(i), path_node(partner), Label::Qualified));
    }
    edges.sort();
    CdsGraph::new(side, side, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_names_round_trip() {
        for s in ["A1", "B12", "A300"] {
            assert_eq!(s.parse::<NodeId>().unwrap().to_string(), s);
        }
        for s in ["", "C1", "A0", "A01", "A", "B-1", "A+1"] {
            assert!(s.parse::<NodeId>().is_err(), "{s}");
        }
        assert!(NodeId::a(9) < NodeId::b(1));
    }

    #[test]
    fn rejects_out_of_range_edges() {
        assert!(CdsGraph::new(2, 2, vec![Edge::qualified(3, 1)]).is_err());
        assert!(CdsGraph::new(2, 2, vec![Edge::qualified(1, 0)]).is_err());
    }

    #[test]
    fn single_qualified_edge_is_flagged() {
        let g = CdsGraph::new(1, 1, vec![Edge::qualified(1, 1)]).unwrap();
        let v = g.validate();
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|x| x.to_string().contains("node lacks unqualified edge")));
    }

    #[test]
    fn duplicate_edge_is_flagged() {
        let g = CdsGraph::new(
            1,
            2,
            vec![
                Edge::unqualified(1, 1),
                Edge::qualified(1, 2),
                Edge::unqualified(1, 2),
                Edge::unqualified(1, 1),
            ],
        )
        .unwrap();
        let v = g.validate();
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v
            .iter()
            .all(|x| x.to_string().starts_with("duplicate edge")));
    }

    #[test]
    fn vacuous_instance_is_flagged() {
        let g = CdsGraph::new(1, 1, vec![Edge::unqualified(1, 1)]).unwrap();
        assert_eq!(g.validate(), vec![Violation::NoQualifiedEdge]);
    }

    #[test]
    fn fig5_edge_list() {
        let g = theorem4_graph(1, 5).unwrap();
        let q: Vec<(u32, u32)> = g.edges_with(Label::Qualified).map(|e| (e.a, e.b)).collect();
        assert_eq!(q, vec![(1, 3), (2, 4), (3, 5), (4, 6), (5, 1), (6, 2)]);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn family_counts() {
        for k in 1..=3 {
            for d in [3, 5, 7] {
                let g = theorem4_graph(k, d).unwrap();
                assert_eq!(g.node_count(), 2 * (k * d + 1));
                assert_eq!(g.edges_with(Label::Qualified).count(), k * d + 1);
                assert_eq!(g.edges_with(Label::Unqualified).count(), 2 * k * d + 1);
                assert!(g.validate().is_empty());
            }
        }
        assert!(theorem4_graph(0, 3).is_err());
        assert!(theorem4_graph(1, 4).is_err());
        assert!(theorem4_graph(1, 1).is_err());
    }

    #[test]
    fn strip_renumbers_survivors() {
        // A2 sees only qualified edges.
        let g = CdsGraph::new(
            3,
            1,
            vec![
                Edge::unqualified(1, 1),
                Edge::qualified(2, 1),
                Edge::unqualified(3, 1),
                Edge::qualified(3, 1),
            ],
        )
        .unwrap();
        let (h, s) = g.strip_secret_nodes();
        assert_eq!(s.removed, vec![NodeId::a(2)]);
        assert_eq!(s.renamed, vec![(NodeId::a(3), NodeId::a(2))]);
        assert_eq!(h.a_count(), 2);
        assert_eq!(h.edges().len(), 3);
        assert!(!h
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::OnlyQualifiedEdges { .. })));
    }

    #[test]
    fn json_round_trip() {
        let g = theorem4_graph(1, 3).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with(
            r#"{"a_count":4,"b_count":4,"edges":[{"a":1,"b":1,"label":"unqualified"}"#
        ));
        let back: CdsGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"a_count":1,"b_count":1,"edges":[{"a":2,"b":1,"label":"qualified"}]}"#;
        assert!(serde_json::from_str::<CdsGraph>(bad).is_err());
    }
}
