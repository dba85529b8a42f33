//! Worked instances with their published parameters.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::ExtendedNat;
use crate::construct::{construct_theorem4, Theorem4Options};
use crate::error::Result;
use crate::graph::{CdsGraph, Edge, NodeId};
use crate::linalg::{FMatrix, PrimeField};
use crate::rational::{self, Rational};
use crate::scheme::{LinearScheme, NodeCode};

/// Values the analyzer and verifier must reproduce. `None` means unstated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Expected {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<ExtendedNat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<ExtendedNat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<ExtendedNat>,
    #[serde(with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub thm2_bound: Option<Rational>,
    #[serde(with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub thm3_bound: Option<Rational>,
    /// (L, Lz, N) of the scheme achieving the stated rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<(usize, usize, usize)>,
    #[serde(with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub noise_rate: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unqualified_components: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub graph: CdsGraph,
    pub scheme: Option<LinearScheme>,
    pub expected: Expected,
}

fn graph(n: u32, q: &[(u32, u32)], u: &[(u32, u32)]) -> CdsGraph {
    let mut edges: Vec<Edge> = q.iter().map(|&(a, b)| Edge::qualified(a, b)).collect();
    edges.extend(u.iter().map(|&(a, b)| Edge::unqualified(a, b)));
    edges.sort();
    CdsGraph::new(n, n, edges).expect("fixture graph is well formed")
}

/// A node with its F rows and H rows.
type NodeRows = (NodeId, Vec<Vec<u64>>, Vec<Vec<u64>>);

fn scheme(p: u64, (l, lz, n): (usize, usize, usize), nodes: &[NodeRows]) -> LinearScheme {
    let field = PrimeField::new(p).expect("prime");
    let map: BTreeMap<NodeId, NodeCode> = nodes
        .iter()
        .map(|(id, f, h)| {
            (
                *id,
                NodeCode {
                    f: FMatrix::from_rows_with_cols(&field, f, l).expect("F"),
                    h: FMatrix::from_rows_with_cols(&field, h, lz).expect("H"),
                },
            )
        })
        .collect();
    LinearScheme::new(field, l, lz, n, map).expect("fixture scheme is well formed")
}

/// Three unqualified edges, no internal qualified edge, rate-1 scheme.
pub fn fig1() -> Fixture {
    let q = [(1, 1), (1, 3), (2, 1), (2, 2), (3, 2), (3, 3)];
    let u = [(1, 2), (2, 3), (3, 1)];
    let a = NodeId::a;
    let b = NodeId::b;
    // A1 = B2 = z, A2 = B3 = s + z, A3 = B1 = 2s + z
    let code = |i: u64| (vec![vec![i]], vec![vec![1]]);
    let nodes: Vec<_> = [
        (a(1), 0),
        (b(2), 0),
        (a(2), 1),
        (b(3), 1),
        (a(3), 2),
        (b(1), 2),
    ]
    .into_iter()
    .map(|(id, i)| {
        let (f, h) = code(i);
        (id, f, h)
    })
    .collect();
    Fixture {
        name: "fig1",
        graph: graph(3, &q, &u),
        scheme: Some(scheme(3, (1, 1, 1), &nodes)),
        expected: Expected {
            d: Some(ExtendedNat::Infinite),
            thm2_bound: Some(Rational::from_integer(1)),
            lengths: Some((1, 1, 1)),
            noise_rate: Some(Rational::from_integer(1)),
            unqualified_components: Some(3),
            ..Expected::default()
        },
    }
}

fn fig2_graph() -> CdsGraph {
    let q = [(1, 1), (2, 1), (2, 2), (3, 3)];
    let u = [(2, 3), (1, 3), (1, 2), (3, 1)];
    graph(3, &q, &u)
}

/// Internal edge {A2,B2} on the path B2 - A1 - B3 - A2, no connected cover.
pub fn fig2() -> Fixture {
    Fixture {
        name: "fig2",
        graph: fig2_graph(),
        scheme: None,
        expected: Expected {
            d: Some(ExtendedNat::Finite(3)),
            rho: Some(ExtendedNat::Infinite),
            q: Some(ExtendedNat::Finite(2)),
            thm2_bound: Some(Rational::new(2, 3)),
            ..Expected::default()
        },
    }
}

/// As fig2 plus {A3,B2}: the cover now needs every qualified edge.
pub fn fig3() -> Fixture {
    let q = [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)];
    let u = [(2, 3), (1, 3), (1, 2), (3, 1)];
    Fixture {
        name: "fig3",
        graph: graph(3, &q, &u),
        scheme: None,
        expected: Expected {
            d: Some(ExtendedNat::Finite(3)),
            rho: Some(ExtendedNat::Finite(5)),
            thm2_bound: Some(Rational::new(4, 7)),
            lengths: Some((4, 7, 5)),
            noise_rate: Some(Rational::new(4, 7)),
            ..Expected::default()
        },
    }
}

/// fig2's graph with an N = L scheme: one noise symbol per qualified component.
pub fn fig4() -> Fixture {
    let a = NodeId::a;
    let b = NodeId::b;
    // Component {A1,A2,B1,B2} uses Z0, component {A3,B3} uses Z1.
    let nodes = vec![
        (a(1), vec![vec![0]], vec![vec![1, 0]]),
        (b(2), vec![vec![0]], vec![vec![1, 0]]),
        (a(2), vec![vec![1]], vec![vec![1, 0]]),
        (b(1), vec![vec![2]], vec![vec![1, 0]]),
        (b(3), vec![vec![0]], vec![vec![0, 1]]),
        (a(3), vec![vec![1]], vec![vec![0, 1]]),
    ];
    Fixture {
        name: "fig4",
        graph: fig2_graph(),
        scheme: Some(scheme(3, (1, 2, 1), &nodes)),
        expected: Expected {
            q: Some(ExtendedNat::Finite(2)),
            thm3_bound: Some(Rational::new(1, 2)),
            lengths: Some((1, 2, 1)),
            noise_rate: Some(Rational::new(1, 2)),
            ..Expected::default()
        },
    }
}

/// The 6+6 cyclic instance (k = 1, d = 5) with its constructed scheme over F_11.
pub fn fig5() -> Result<Fixture> {
    let (g, s, _) = construct_theorem4(
        1,
        5,
        &Theorem4Options {
            p: Some(11),
            ..Default::default()
        },
    )?;
    Ok(Fixture {
        name: "fig5",
        graph: g,
        scheme: Some(s),
        expected: Expected {
            d: Some(ExtendedNat::Finite(5)),
            thm2_bound: Some(Rational::new(4, 5)),
            lengths: Some((4, 5, 4)),
            noise_rate: Some(Rational::new(4, 5)),
            ..Expected::default()
        },
    })
}

pub fn fixtures() -> Result<Vec<Fixture>> {
    Ok(vec![fig1(), fig2(), fig3(), fig4(), fig5()?])
}
