//! Linear CDS schemes: every node emits `F_v · S + H_v · Z` over F_p.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CdsGraph, NodeId};
use crate::linalg::{FMatrix, PrimeField};
use crate::rational::{self, Rational};

/// Signal map of one node: `N × L` secret part and `N × Lz` noise part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCode {
    pub f: FMatrix,
    pub h: FMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScheme {
    field: PrimeField,
    secret_len: usize,
    noise_len: usize,
    signal_len: usize,
    nodes: BTreeMap<NodeId, NodeCode>,
}

/// Anything that maps `(node, secret, noise)` to a signal. The exhaustive
/// verifier only needs this view of a scheme.
pub trait SignalMap {
    fn field(&self) -> PrimeField;
    fn secret_len(&self) -> usize;
    fn noise_len(&self) -> usize;
    fn signal(&self, node: NodeId, s: &[u64], z: &[u64]) -> Result<Vec<u64>>;
}

impl LinearScheme {
    pub fn new(
        field: PrimeField,
        secret_len: usize,
        noise_len: usize,
        signal_len: usize,
        nodes: BTreeMap<NodeId, NodeCode>,
    ) -> Result<Self> {
        if secret_len == 0 || noise_len == 0 || signal_len == 0 {
            return Err(Error::input("L, Lz and N must all be positive"));
        }
        for (id, code) in &nodes {
            if code.f.rows() != signal_len || code.f.cols() != secret_len {
                return Err(Error::input(format!(
                    "{id}: F is {}x{}, expected {signal_len}x{secret_len}",
                    code.f.rows(),
                    code.f.cols()
                )));
            }
            if code.h.rows() != signal_len || code.h.cols() != noise_len {
                return Err(Error::input(format!(
                    "{id}: H is {}x{}, expected {signal_len}x{noise_len}",
                    code.h.rows(),
                    code.h.cols()
                )));
            }
        }
        Ok(LinearScheme {
            field,
            secret_len,
            noise_len,
            signal_len,
            nodes,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.modulus()
    }

    /// L
    pub fn secret_len(&self) -> usize {
        self.secret_len
    }

    /// Lz
    pub fn noise_len(&self) -> usize {
        self.noise_len
    }

    /// N
    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, NodeCode> {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeCode> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::input(format!("scheme has no entry for node {id}")))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut NodeCode> {
        self.nodes.get_mut(&id)
    }

    pub fn rates(&self) -> Rates {
        Rates {
            noise_rate: Rational::new(self.secret_len as i64, self.noise_len as i64),
            comm_rate: Rational::new(self.secret_len as i64, 2 * self.signal_len as i64),
        }
    }

    /// Requires the scheme to cover exactly the graph's nodes.
    pub fn check_nodes(&self, g: &CdsGraph) -> Result<()> {
        let missing: Vec<String> = g
            .nodes()
            .filter(|n| !self.nodes.contains_key(n))
            .map(|n| n.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::input(format!(
                "scheme is missing nodes {}",
                missing.join(", ")
            )));
        }
        let extra: Vec<String> = self
            .nodes
            .keys()
            .filter(|n| g.index_of(**n).is_none())
            .map(|n| n.to_string())
            .collect();
        if !extra.is_empty() {
            return Err(Error::input(format!(
                "scheme has nodes not in the graph: {}",
                extra.join(", ")
            )));
        }
        Ok(())
    }

    /// `F_v · s + H_v · z`.
    pub fn evaluate(&self, node: NodeId, s: &[u64], z: &[u64]) -> Result<Vec<u64>> {
        if s.len() != self.secret_len {
            return Err(Error::input(format!(
                "secret has {} symbols, expected {}",
                s.len(),
                self.secret_len
            )));
        }
        if z.len() != self.noise_len {
            return Err(Error::input(format!(
                "noise has {} symbols, expected {}",
                z.len(),
                self.noise_len
            )));
        }
        let code = self.node(node)?;
        let fs = code.f.mul_vec(&self.field, s)?;
        let hz = code.h.mul_vec(&self.field, z)?;
        Ok(fs
            .iter()
            .zip(&hz)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: SchemeFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Json {
                context: format!("scheme JSON at {path}"),
                source: e.into_inner(),
            }
        })?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }
}

impl SignalMap for LinearScheme {
    fn field(&self) -> PrimeField {
        self.field
    }

    fn secret_len(&self) -> usize {
        self.secret_len
    }

    fn noise_len(&self) -> usize {
        self.noise_len
    }

    fn signal(&self, node: NodeId, s: &[u64], z: &[u64]) -> Result<Vec<u64>> {
        self.evaluate(node, s, z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rates {
    /// L / Lz
    #[serde(with = "rational")]
    pub noise_rate: Rational,
    /// L / (2N)
    #[serde(with = "rational")]
    pub comm_rate: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    p: u64,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "Lz")]
    lz: usize,
    #[serde(rename = "N")]
    n: usize,
    nodes: BTreeMap<String, NodeFile>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    #[serde(rename = "F")]
    f: Vec<Vec<u64>>,
    #[serde(rename = "H")]
    h: Vec<Vec<u64>>,
}

impl TryFrom<SchemeFile> for LinearScheme {
    type Error = Error;

    fn try_from(file: SchemeFile) -> Result<Self> {
        let field = PrimeField::new(file.p)?;
        let mut nodes = BTreeMap::new();
        for (name, nf) in file.nodes {
            let id: NodeId = name.parse()?;
            let ctx = |e: Error| Error::input(format!("node {name}: {e}"));
            let f = FMatrix::from_reduced_rows(&field, &nf.f, file.l).map_err(ctx)?;
            let h = FMatrix::from_reduced_rows(&field, &nf.h, file.lz).map_err(ctx)?;
            nodes.insert(id, NodeCode { f, h });
        }
        LinearScheme::new(field, file.l, file.lz, file.n, nodes)
    }
}

impl Serialize for LinearScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Nodes<'a>(&'a BTreeMap<NodeId, NodeCode>);
        impl Serialize for Nodes<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (id, code) in self.0 {
                    m.serialize_entry(
                        &id.to_string(),
                        &NodeFile {
                            f: code.f.row_vecs(),
                            h: code.h.row_vecs(),
                        },
                    )?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("p", &self.p())?;
        m.serialize_entry("L", &self.secret_len)?;
        m.serialize_entry("Lz", &self.noise_len)?;
        m.serialize_entry("N", &self.signal_len)?;
        m.serialize_entry("nodes", &Nodes(&self.nodes))?;
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_scheme(p: u64, f: u64, h: u64) -> LinearScheme {
        let field = PrimeField::new(p).unwrap();
        let mut nodes = BTreeMap::new();
        nodes.insert(
            NodeId::a(1),
            NodeCode {
                f: FMatrix::from_rows(&field, &[vec![f]]).unwrap(),
                h: FMatrix::from_rows(&field, &[vec![h]]).unwrap(),
            },
        );
        LinearScheme::new(field, 1, 1, 1, nodes).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = scalar_scheme(5, 1, 1);
        assert_eq!(s.evaluate(NodeId::a(1), &[2], &[3]).unwrap(), vec![0]);
        assert_eq!(s.evaluate(NodeId::a(1), &[0], &[0]).unwrap(), vec![0]);
        // z + i·s for component index i = 2
        let s = scalar_scheme(5, 2, 1);
        for (s0, z0) in [(1u64, 0u64), (3, 4), (4, 2)] {
            assert_eq!(
                s.evaluate(NodeId::a(1), &[s0], &[z0]).unwrap(),
                vec![(z0 + 2 * s0) % 5]
            );
        }
        assert!(s.evaluate(NodeId::a(1), &[1, 2], &[0]).is_err());
        assert!(s.evaluate(NodeId::a(1), &[1], &[]).is_err());
        assert!(s.evaluate(NodeId::b(1), &[1], &[0]).is_err());
    }

    #[test]
    fn json_shape_and_errors() {
        let s = scalar_scheme(5, 2, 1);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"p":5,"L":1,"Lz":1,"N":1,"nodes":{"A1":{"F":[[2]],"H":[[1]]}}}"#
        );
        assert_eq!(LinearScheme::from_json(&text).unwrap(), s);

        let unreduced = r#"{"p":5,"L":1,"Lz":1,"N":1,"nodes":{"A1":{"F":[[7]],"H":[[1]]}}}"#;
        assert!(LinearScheme::from_json(unreduced).is_err());
        let composite = r#"{"p":6,"L":1,"Lz":1,"N":1,"nodes":{}}"#;
        assert!(LinearScheme::from_json(composite).is_err());
        let bad_shape = r#"{"p":5,"L":2,"Lz":1,"N":1,"nodes":{"A1":{"F":[[1]],"H":[[1]]}}}"#;
        assert!(LinearScheme::from_json(bad_shape).is_err());
        let bad_field = r#"{"p":5,"L":1,"Lz":1,"N":1,"nodes":{"A1":{"F":[[1]],"G":[[1]]}}}"#;
        let err = LinearScheme::from_json(bad_field).unwrap_err().to_string();
        assert!(err.contains("nodes.A1"), "{err}");
    }

    #[test]
    fn node_binding_is_strict() {
        let g = CdsGraph::new(1, 1, vec![crate::graph::Edge::unqualified(1, 1)]).unwrap();
        let s = scalar_scheme(5, 1, 1);
        assert!(s.check_nodes(&g).is_err());
    }

    #[test]
    fn rates_are_exact() {
        let s = scalar_scheme(5, 1, 1);
        let r = s.rates();
        assert_eq!(r.noise_rate, Rational::from_integer(1));
        assert_eq!(r.comm_rate, Rational::new(1, 2));
    }
}
