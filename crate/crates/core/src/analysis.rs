//! Graph parameters of a CDS instance: internal qualified edges, the residing
//! unqualified path distance `d`, the connected edge cover size `rho` and the
//! number `q` of qualified components met by a residing path.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CdsGraph, Edge, EdgeRef, Label, NodeId};

pub const DEFAULT_PATH_CAP: usize = 10_000;
pub const DEFAULT_WORK_CAP: u64 = 10_000_000;

/// A count that may be +∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedNat {
    Finite(u64),
    Infinite,
}

impl ExtendedNat {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedNat::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            ExtendedNat::Finite(n) => Some(*n),
            ExtendedNat::Infinite => None,
        }
    }
}

impl fmt::Display for ExtendedNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedNat::Finite(n) => write!(f, "{n}"),
            ExtendedNat::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedNat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedNat::Finite(n) => s.serialize_u64(*n),
            ExtendedNat::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedNat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            N(u64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::N(n) => Ok(ExtendedNat::Finite(n)),
            Repr::S(s) if s == "inf" => Ok(ExtendedNat::Infinite),
            Repr::S(s) => Err(serde::de::Error::custom(format!(
                "expected a count or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Limits for the residing-path and cover searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchCaps {
    /// Simple unqualified paths enumerated per internal edge.
    pub path_cap: usize,
    /// Total search nodes (path extensions plus branch-and-bound nodes).
    pub work_cap: u64,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            path_cap: DEFAULT_PATH_CAP,
            work_cap: DEFAULT_WORK_CAP,
        }
    }
}

/// Connected components over one edge label. Nodes without an edge of that
/// label are left out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub components: Vec<Vec<NodeId>>,
    #[serde(skip)]
    component_of: Vec<Option<usize>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component index of a dense node index.
    pub fn component_of(&self, idx: usize) -> Option<usize> {
        self.component_of[idx]
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Components ordered by their lowest node, members in canonical order.
pub fn components(g: &CdsGraph, label: Label) -> Partition {
    let n = g.node_count();
    let mut uf = UnionFind::new(n);
    let mut touched = vec![false; n];
    for e in g.edges_with(label) {
        let (u, v) = g.endpoints(e);
        uf.union(u, v);
        touched[u] = true;
        touched[v] = true;
    }
    let mut root_to_comp = vec![None; n];
    let mut component_of = vec![None; n];
    let mut comps: Vec<Vec<NodeId>> = Vec::new();
    // Dense indices follow canonical order, so first-seen order is by lowest node.
    for i in 0..n {
        if !touched[i] {
            continue;
        }
        let r = uf.find(i);
        let c = *root_to_comp[r].get_or_insert_with(|| {
            comps.push(Vec::new());
            comps.len() - 1
        });
        comps[c].push(g.node_at(i));
        component_of[i] = Some(c);
    }
    Partition {
        components: comps,
        component_of,
    }
}

/// Qualified edges whose endpoints are joined by an unqualified path.
pub fn internal_qualified_edges(g: &CdsGraph) -> Vec<Edge> {
    let unq = components(g, Label::Unqualified);
    let mut out: Vec<Edge> = g
        .edges_with(Label::Qualified)
        .filter(|e| {
            let (u, v) = g.endpoints(e);
            matches!((unq.component_of(u), unq.component_of(v)), (Some(x), Some(y)) if x == y)
        })
        .copied()
        .collect();
    out.sort();
    out.dedup_by_key(|e| (e.a, e.b));
    out
}

/// An internal qualified edge together with one residing unqualified path,
/// listed from the A endpoint to the B endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub edge: EdgeRef,
    pub path: Vec<NodeId>,
}

impl PathWitness {
    pub fn length(&self) -> usize {
        self.path.len() - 1
    }
}

fn bfs_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

fn witness(g: &CdsGraph, e: &Edge, path: &[usize]) -> PathWitness {
    PathWitness {
        edge: e.into(),
        path: path.iter().map(|&i| g.node_at(i)).collect(),
    }
}

/// Shortest residing unqualified path over all internal qualified edges.
pub fn distance_d(g: &CdsGraph) -> (ExtendedNat, Option<PathWitness>) {
    let adj = g.adjacency(Label::Unqualified);
    let mut best: Option<PathWitness> = None;
    for e in internal_qualified_edges(g) {
        let (u, v) = g.endpoints(&e);
        if let Some(path) = bfs_path(&adj, u, v) {
            if best.as_ref().is_none_or(|b| path.len() - 1 < b.length()) {
                best = Some(witness(g, &e, &path));
            }
        }
    }
    match best {
        Some(w) => (ExtendedNat::Finite(w.length() as u64), Some(w)),
        None => (ExtendedNat::Infinite, None),
    }
}

struct Work {
    used: u64,
    cap: u64,
}

impl Work {
    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.cap
    }
}

/// Simple paths from `from` to `to`, at most `cap` of them, in DFS order over
/// sorted adjacency. The flag reports whether the cap cut the enumeration short.
fn simple_paths(
    adj: &[Vec<usize>],
    from: usize,
    to: usize,
    cap: usize,
    work: &mut Work,
) -> std::result::Result<(Vec<Vec<usize>>, bool), ()> {
    let mut out = Vec::new();
    let mut on_path = vec![false; adj.len()];
    let mut path = vec![from];
    on_path[from] = true;
    // Explicit stack of neighbor cursors.
    let mut cursor = vec![0usize];
    let mut capped = false;
    while let Some(&top) = path.last() {
        let depth = path.len() - 1;
        if top == to {
            out.push(path.clone());
            if out.len() >= cap {
                capped = true;
                break;
            }
            on_path[top] = false;
            path.pop();
            cursor.pop();
            continue;
        }
        let i = cursor[depth];
        if i < adj[top].len() {
            cursor[depth] += 1;
            let next = adj[top][i];
            if !on_path[next] {
                if !work.tick() {
                    return Err(());
                }
                on_path[next] = true;
                path.push(next);
                cursor.push(0);
            }
        } else {
            on_path[top] = false;
            path.pop();
            cursor.pop();
        }
    }
    if capped {
        // The cap binds only if something was left unexplored.
        capped = !path.is_empty();
    }
    Ok((out, capped))
}

/// Residing paths of every internal edge, shortest first.
struct ResidingPaths {
    per_edge: Vec<(Edge, Vec<Vec<usize>>)>,
    cap_hit: bool,
}

fn residing_paths(
    g: &CdsGraph,
    caps: &SearchCaps,
    work: &mut Work,
) -> std::result::Result<ResidingPaths, ()> {
    let adj = g.adjacency(Label::Unqualified);
    let mut per_edge = Vec::new();
    let mut cap_hit = false;
    for e in internal_qualified_edges(g) {
        let (u, v) = g.endpoints(&e);
        let (mut paths, hit) = simple_paths(&adj, u, v, caps.path_cap, work)?;
        cap_hit |= hit;
        paths.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        per_edge.push((e, paths));
    }
    Ok(ResidingPaths { per_edge, cap_hit })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverWitness {
    pub edge: EdgeRef,
    pub path: Vec<NodeId>,
    /// Qualified edges of the cover; connected, contains `edge`, touches
    /// every node of `path`.
    pub cover: Vec<EdgeRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RhoResult {
    pub rho: ExtendedNat,
    pub witness: Option<CoverWitness>,
    pub path_cap_hit: bool,
    pub work_used: u64,
}

/// Minimum connected qualified edge cover over all (internal edge, residing
/// path) pairs.
///
/// For a fixed pair this is a unit-weight Steiner problem: a connected edge
/// set with node set `V` needs at least `|V| − 1` edges, and a spanning tree
/// of `V` through the internal edge attains it. The search therefore grows
/// connected node sets from the internal edge, branching on frontier nodes
/// (include / exclude) and pruning with `|S| − 1 + max(uncovered, farthest
/// uncovered distance)`.
pub fn rho_cover(g: &CdsGraph, caps: &SearchCaps) -> Result<RhoResult> {
    let mut work = Work {
        used: 0,
        cap: caps.work_cap,
    };
    let budget = |best: Option<u64>| Error::Budget {
        reason: format!("rho search exceeded work cap {}", caps.work_cap),
        best,
    };
    let paths = residing_paths(g, caps, &mut work).map_err(|_| budget(None))?;
    let qadj = g.adjacency(Label::Qualified);
    let qcomp = components(g, Label::Qualified);
    let mut best: Option<(u64, CoverWitness)> = None;

    for (e, edge_paths) in &paths.per_edge {
        let (u, v) = g.endpoints(e);
        let mut seen_sets: HashSet<Vec<usize>> = HashSet::new();
        for path in edge_paths {
            let lower = (path.len() - 1) as u64;
            if best.as_ref().is_some_and(|(b, _)| lower >= *b) {
                // Paths are sorted by length, so no later one can help either.
                break;
            }
            let mut terminals = path.clone();
            terminals.sort_unstable();
            if !seen_sets.insert(terminals.clone()) {
                continue;
            }
            let root = qcomp.component_of(u);
            if terminals.iter().any(|&t| qcomp.component_of(t) != root) {
                continue;
            }
            let bound = best.as_ref().map(|(b, _)| *b);
            let found = steiner_nodes(&qadj, (u, v), &terminals, bound, &mut work)
                .map_err(|_| budget(bound))?;
            if let Some(nodes) = found {
                let size = (nodes.len() - 1) as u64;
                let cover = spanning_tree(g, &qadj, (u, v), &nodes);
                debug_assert_eq!(cover.len() as u64, size);
                best = Some((
                    size,
                    CoverWitness {
                        edge: e.into(),
                        path: path.iter().map(|&i| g.node_at(i)).collect(),
                        cover,
                    },
                ));
            }
        }
    }
    Ok(match best {
        Some((size, w)) => RhoResult {
            rho: ExtendedNat::Finite(size),
            witness: Some(w),
            path_cap_hit: paths.cap_hit,
            work_used: work.used,
        },
        None => RhoResult {
            rho: ExtendedNat::Infinite,
            witness: None,
            path_cap_hit: paths.cap_hit,
            work_used: work.used,
        },
    })
}

/// Smallest connected node set containing `root` and all `terminals` whose
/// size minus one beats `bound`. `Err` when the work budget runs out.
fn steiner_nodes(
    adj: &[Vec<usize>],
    root: (usize, usize),
    terminals: &[usize],
    bound: Option<u64>,
    work: &mut Work,
) -> std::result::Result<Option<Vec<usize>>, ()> {
    let n = adj.len();
    let mut state = SteinerState {
        adj,
        is_terminal: vec![false; n],
        in_set: vec![false; n],
        excluded: vec![false; n],
        set: Vec::new(),
        uncovered: 0,
        best_edges: bound.unwrap_or(u64::MAX),
        best_set: None,
    };
    for &t in terminals {
        state.is_terminal[t] = true;
    }
    state.uncovered = terminals.len();
    state.add(root.0);
    state.add(root.1);
    state.search(work)?;
    Ok(state.best_set)
}

struct SteinerState<'a> {
    adj: &'a [Vec<usize>],
    is_terminal: Vec<bool>,
    in_set: Vec<bool>,
    excluded: Vec<bool>,
    set: Vec<usize>,
    uncovered: usize,
    best_edges: u64,
    best_set: Option<Vec<usize>>,
}

impl SteinerState<'_> {
    fn add(&mut self, v: usize) {
        self.in_set[v] = true;
        self.set.push(v);
        if self.is_terminal[v] {
            self.uncovered -= 1;
        }
    }

    fn remove_last(&mut self) {
        let v = self.set.pop().expect("nonempty set");
        self.in_set[v] = false;
        if self.is_terminal[v] {
            self.uncovered += 1;
        }
    }

    /// Multi-source BFS from the current set through non-excluded nodes.
    /// Returns the largest distance to an uncovered terminal, or `None` if one
    /// is unreachable.
    fn farthest_uncovered(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        for &s in &self.set {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if dist[y] == usize::MAX && !self.excluded[y] {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        let mut far = 0;
        for (t, &is_t) in self.is_terminal.iter().enumerate() {
            if is_t && !self.in_set[t] {
                if dist[t] == usize::MAX {
                    return None;
                }
                far = far.max(dist[t]);
            }
        }
        Some(far)
    }

    fn search(&mut self, work: &mut Work) -> std::result::Result<(), ()> {
        if !work.tick() {
            return Err(());
        }
        let edges_now = (self.set.len() - 1) as u64;
        if self.uncovered == 0 {
            if edges_now < self.best_edges {
                self.best_edges = edges_now;
                let mut s = self.set.clone();
                s.sort_unstable();
                self.best_set = Some(s);
            }
            return Ok(());
        }
        let Some(far) = self.farthest_uncovered() else {
            return Ok(());
        };
        let need = self.uncovered.max(far) as u64;
        if edges_now + need >= self.best_edges {
            return Ok(());
        }
        // Frontier nodes, terminals first: a reachable terminal is always
        // taken, so it needs no exclude branch.
        let mut frontier: BTreeSet<usize> = BTreeSet::new();
        for &s in &self.set {
            for &y in &self.adj[s] {
                if !self.in_set[y] && !self.excluded[y] {
                    frontier.insert(y);
                }
            }
        }
        if let Some(&t) = frontier.iter().find(|&&y| self.is_terminal[y]) {
            self.add(t);
            let r = self.search(work);
            self.remove_last();
            return r;
        }
        let Some(&v) = frontier.iter().next() else {
            return Ok(());
        };
        self.add(v);
        let r = self.search(work);
        self.remove_last();
        r?;
        self.excluded[v] = true;
        let r = self.search(work);
        self.excluded[v] = false;
        r
    }
}

fn spanning_tree(
    g: &CdsGraph,
    adj: &[Vec<usize>],
    root: (usize, usize),
    nodes: &[usize],
) -> Vec<EdgeRef> {
    let inside: HashSet<usize> = nodes.iter().copied().collect();
    let mut seen: HashSet<usize> = HashSet::from([root.0, root.1]);
    let mut tree = vec![edge_ref(g, root.0, root.1)];
    let mut queue = VecDeque::from([root.0, root.1]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if inside.contains(&y) && seen.insert(y) {
                tree.push(edge_ref(g, x, y));
                queue.push_back(y);
            }
        }
    }
    tree.sort();
    tree
}

fn edge_ref(g: &CdsGraph, x: usize, y: usize) -> EdgeRef {
    let (a, b) = (g.node_at(x), g.node_at(y));
    if a < b {
        EdgeRef { a, b }
    } else {
        EdgeRef { a: b, b: a }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QWitness {
    pub edge: EdgeRef,
    pub path: Vec<NodeId>,
    /// Qualified components met by the path, each named by its lowest node.
    pub components: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QResult {
    pub q: ExtendedNat,
    pub witness: Option<QWitness>,
    pub path_cap_hit: bool,
}

/// Fewest qualified components touched by any residing unqualified path.
pub fn q_components(g: &CdsGraph, caps: &SearchCaps) -> Result<QResult> {
    let mut work = Work {
        used: 0,
        cap: caps.work_cap,
    };
    let paths = residing_paths(g, caps, &mut work).map_err(|_| Error::Budget {
        reason: format!(
            "residing path enumeration exceeded work cap {}",
            caps.work_cap
        ),
        best: None,
    })?;
    let qcomp = components(g, Label::Qualified);
    let mut best: Option<(usize, QWitness)> = None;
    for (e, edge_paths) in &paths.per_edge {
        for path in edge_paths {
            let comps: BTreeSet<usize> =
                path.iter().filter_map(|&i| qcomp.component_of(i)).collect();
            if best.as_ref().is_none_or(|(b, _)| comps.len() < *b) {
                best = Some((
                    comps.len(),
                    QWitness {
                        edge: e.into(),
                        path: path.iter().map(|&i| g.node_at(i)).collect(),
                        components: comps.iter().map(|&c| qcomp.components[c][0]).collect(),
                    },
                ));
            }
        }
    }
    Ok(match best {
        Some((q, w)) => QResult {
            q: ExtendedNat::Finite(q as u64),
            witness: Some(w),
            path_cap_hit: paths.cap_hit,
        },
        None => QResult {
            q: ExtendedNat::Infinite,
            witness: None,
            path_cap_hit: paths.cap_hit,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub d: Option<PathWitness>,
    pub rho: Option<CoverWitness>,
    pub q: Option<QWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphParams {
    pub internal_edges: Vec<EdgeRef>,
    pub d: ExtendedNat,
    pub rho: ExtendedNat,
    pub q: ExtendedNat,
    pub witnesses: Witnesses,
    pub unqualified_components: Vec<Vec<NodeId>>,
    pub qualified_components: Vec<Vec<NodeId>>,
    /// True when some internal edge had more residing paths than the cap.
    pub path_cap_hit: bool,
}

pub fn analyze(g: &CdsGraph, caps: &SearchCaps) -> Result<GraphParams> {
    let internal = internal_qualified_edges(g);
    let (d, dw) = distance_d(g);
    let rho = rho_cover(g, caps)?;
    let q = q_components(g, caps)?;
    Ok(GraphParams {
        internal_edges: internal.iter().map(EdgeRef::from).collect(),
        d,
        rho: rho.rho,
        q: q.q,
        witnesses: Witnesses {
            d: dw,
            rho: rho.witness,
            q: q.witness,
        },
        unqualified_components: components(g, Label::Unqualified).components,
        qualified_components: components(g, Label::Qualified).components,
        path_cap_hit: rho.path_cap_hit || q.path_cap_hit,
    })
}
