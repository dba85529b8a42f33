//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use cdskit::analysis::ExtendedNat;
use cdskit::graph::{CdsGraph, Edge, Label, NodeId};
use cdskit::linalg::{FMatrix, PrimeField};
use cdskit::rational::Rational;
use cdskit::scheme::{LinearScheme, NodeCode};
use rand::Rng;

/// Random graph with at most `max_side` nodes per side. Every node gets at
/// least one unqualified edge; remaining pairs are qualified, unqualified or
/// absent with the given weights.
pub fn random_graph<R: Rng>(rng: &mut R, max_side: u32, q_weight: u32, u_weight: u32) -> CdsGraph {
    let a = rng.gen_range(1..=max_side);
    let b = rng.gen_range(1..=max_side);
    let mut labels: BTreeMap<(u32, u32), Label> = BTreeMap::new();
    for i in 1..=a {
        for j in 1..=b {
            let r = rng.gen_range(0..100);
            if r < q_weight {
                labels.insert((i, j), Label::Qualified);
            } else if r < q_weight + u_weight {
                labels.insert((i, j), Label::Unqualified);
            }
        }
    }
    let has_unq = |labels: &BTreeMap<(u32, u32), Label>, side_a: bool, n: u32| {
        labels
            .iter()
            .any(|(&(i, j), &l)| l == Label::Unqualified && if side_a { i == n } else { j == n })
    };
    for i in 1..=a {
        if !has_unq(&labels, true, i) {
            let j = rng.gen_range(1..=b);
            labels.insert((i, j), Label::Unqualified);
        }
    }
    for j in 1..=b {
        if !has_unq(&labels, false, j) {
            let i = rng.gen_range(1..=a);
            labels.insert((i, j), Label::Unqualified);
        }
    }
    let edges = labels
        .into_iter()
        .map(|((i, j), label)| Edge { a: i, b: j, label })
        .collect();
    CdsGraph::new(a, b, edges).unwrap()
}

pub fn random_scheme<R: Rng>(
    rng: &mut R,
    g: &CdsGraph,
    p: u64,
    l: usize,
    lz: usize,
    n: usize,
) -> LinearScheme {
    let field = PrimeField::new(p).unwrap();
    let mut rand_matrix = |rows: usize, cols: usize| {
        let data: Vec<Vec<u64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        FMatrix::from_rows_with_cols(&field, &data, cols).unwrap()
    };
    let mut nodes = BTreeMap::new();
    for node in g.nodes() {
        let f = rand_matrix(n, l);
        let h = rand_matrix(n, lz);
        nodes.insert(node, NodeCode { f, h });
    }
    LinearScheme::new(field, l, lz, n, nodes).unwrap()
}

/// H(S | v, u) in p-ary units by direct counting: for each observed signal
/// pair, the secrets consistent with it must be equally likely and number a
/// power of p.
pub fn counted_entropy(scheme: &LinearScheme, v: NodeId, u: NodeId) -> Rational {
    let p = scheme.p();
    let (l, lz) = (scheme.secret_len(), scheme.noise_len());
    let total = p.pow((l + lz) as u32);
    let mut groups: HashMap<Vec<u64>, HashMap<Vec<u64>, u64>> = HashMap::new();
    for idx in 0..total {
        let mut x = idx;
        let mut digits = Vec::with_capacity(l + lz);
        for _ in 0..l + lz {
            digits.push(x % p);
            x /= p;
        }
        let (s, z) = digits.split_at(l);
        let mut obs = scheme.evaluate(v, s, z).unwrap();
        obs.extend(scheme.evaluate(u, s, z).unwrap());
        *groups
            .entry(obs)
            .or_default()
            .entry(s.to_vec())
            .or_default() += 1;
    }
    let mut acc = Rational::from_integer(0);
    for cond in groups.values() {
        let counts: BTreeSet<u64> = cond.values().copied().collect();
        assert_eq!(counts.len(), 1, "linear conditionals are uniform");
        let support = cond.len() as u64;
        let t = (0..=l as u32)
            .find(|&t| p.pow(t) == support)
            .expect("p-power support");
        let weight: u64 = cond.values().sum();
        acc += Rational::new(weight as i64 * t as i64, total as i64);
    }
    acc
}

/// Minimum connected set of qualified edges containing an internal edge e and
/// covering some residing unqualified path of e, by enumerating edge subsets
/// in increasing size. A set of nodes hosts a residing path exactly when e's
/// endpoints are joined by unqualified edges inside it.
pub fn brute_rho(g: &CdsGraph) -> ExtendedNat {
    let n = g.node_count();
    let unq = g.adjacency(Label::Unqualified);
    let qual: Vec<(usize, usize)> = g
        .edges_with(Label::Qualified)
        .map(|e| g.endpoints(e))
        .collect();
    let joined_inside = |inside: &[bool], s: usize, t: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            if x == t {
                return true;
            }
            for &y in &unq[x] {
                if inside[y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    };
    let connected = |edges: &[(usize, usize)]| {
        let mut nodes: BTreeSet<usize> = BTreeSet::new();
        for &(x, y) in edges {
            nodes.insert(x);
            nodes.insert(y);
        }
        let start = edges[0].0;
        let mut seen: BTreeSet<usize> = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(a, b) in edges {
                let other = if a == x {
                    b
                } else if b == x {
                    a
                } else {
                    continue;
                };
                if seen.insert(other) {
                    stack.push(other);
                }
            }
        }
        seen.len() == nodes.len()
    };

    let mut best: Option<usize> = None;
    for (ei, &(s, t)) in qual.iter().enumerate() {
        // Internal edges only.
        if !joined_inside(&vec![true; n], s, t) {
            continue;
        }
        let others: Vec<(usize, usize)> = qual
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != ei)
            .map(|(_, &e)| e)
            .collect();
        let limit = best.map_or(others.len(), |b| b.saturating_sub(2).min(others.len()));
        'size: for extra in 0..=limit {
            for combo in combinations(others.len(), extra) {
                let mut set = vec![(s, t)];
                set.extend(combo.iter().map(|&i| others[i]));
                if !connected(&set) {
                    continue;
                }
                let mut inside = vec![false; n];
                for &(x, y) in &set {
                    inside[x] = true;
                    inside[y] = true;
                }
                if joined_inside(&inside, s, t) {
                    let size = extra + 1;
                    best = Some(best.map_or(size, |b| b.min(size)));
                    break 'size;
                }
            }
        }
    }
    best.map_or(ExtendedNat::Infinite, |b| ExtendedNat::Finite(b as u64))
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
