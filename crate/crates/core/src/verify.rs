//! Correctness and security checks for linear schemes.
//!
//! Two independent routes compute `H(S | A_x, B_y)` in p-ary units:
//!
//! * [`rank_entropy`]: for linear maps of uniform inputs joint entropy equals
//!   rank, so `H(S | v, u) = L + rank[H_v; H_u] − rank[[F_v H_v]; [F_u H_u]]`.
//! * [`exhaustive_entropy`]: enumerate every `(s, z)`, tabulate the joint
//!   distribution of the signal pair and the secret, and read the entropy off
//!   the conditional supports.
//!
//! A qualified edge passes with entropy 0, an unqualified edge with entropy L.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CdsGraph, EdgeRef, Label, NodeId};
use crate::linalg::{solve_left, FMatrix, Subspace};
use crate::rational::{self, Rational};
use crate::scheme::{LinearScheme, Rates, SignalMap};

pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rank,
    Exhaustive,
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rank => "rank",
            Method::Exhaustive => "exhaustive",
            Method::Both => "both",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank" => Ok(Method::Rank),
            "exhaustive" => Ok(Method::Exhaustive),
            "both" => Ok(Method::Both),
            _ => Err(Error::input(format!(
                "unknown method {s:?}; expected rank, exhaustive or both"
            ))),
        }
    }
}

pub fn rank_entropy(scheme: &LinearScheme, v: NodeId, u: NodeId) -> Result<Rational> {
    let field = scheme.field();
    let (cv, cu) = (scheme.node(v)?, scheme.node(u)?);
    let noise = cv.h.vstack(&cu.h)?;
    let joint = cv.f.hstack(&cv.h)?.vstack(&cu.f.hstack(&cu.h)?)?;
    let value = scheme.secret_len() as i64 + noise.rank(field) as i64 - joint.rank(field) as i64;
    Ok(Rational::from_integer(value))
}

/// Outcome of exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExhaustiveEntropy {
    /// Every conditional of S given the signal pair is uniform on a support of
    /// size p^t, so the entropy is an exact rational.
    Exact {
        #[serde(with = "rational")]
        entropy: Rational,
    },
    /// Some conditional is not uniform over a p-power support.
    NonIntegral {
        observation: Vec<u64>,
        /// `(secret, count)` pairs of the offending conditional.
        distribution: Vec<(Vec<u64>, u64)>,
    },
}

impl ExhaustiveEntropy {
    pub fn exact(&self) -> Option<Rational> {
        match self {
            ExhaustiveEntropy::Exact { entropy } => Some(*entropy),
            ExhaustiveEntropy::NonIntegral { .. } => None,
        }
    }
}

fn checked_pow(p: u64, e: usize) -> Option<u64> {
    (0..e).try_fold(1u64, |acc, _| acc.checked_mul(p))
}

/// Advances a base-`p` odometer; false once it wraps to all zeros.
fn step(digits: &mut [u64], p: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < p {
            return true;
        }
        *d = 0;
    }
    false
}

fn decode(mut idx: u64, p: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = idx % p;
            idx /= p;
            d
        })
        .collect()
}

/// Log base `p` of `n` when `n` is a power of `p`.
fn exact_log(n: u64, p: u64) -> Option<u32> {
    let mut x = n;
    let mut e = 0;
    while x > 1 {
        if x % p != 0 {
            return None;
        }
        x /= p;
        e += 1;
    }
    (x == 1).then_some(e)
}

pub fn exhaustive_entropy<M: SignalMap>(
    scheme: &M,
    v: NodeId,
    u: NodeId,
    limit: u64,
) -> Result<ExhaustiveEntropy> {
    let p = scheme.field().modulus();
    let (l, lz) = (scheme.secret_len(), scheme.noise_len());
    let states = checked_pow(p, l + lz).filter(|&n| n <= limit).ok_or_else(|| Error::Budget {
        reason: format!(
            "exhaustive enumeration needs {p}^{} states, over the limit {limit}; use the rank method",
            l + lz
        ),
        best: None,
    })?;

    // observation -> (secret index -> count)
    let mut table: HashMap<Vec<u64>, HashMap<u64, u64>> = HashMap::new();
    let mut s = vec![0u64; l];
    let mut s_idx = 0u64;
    loop {
        let mut z = vec![0u64; lz];
        loop {
            let mut obs = scheme.signal(v, &s, &z)?;
            obs.extend(scheme.signal(u, &s, &z)?);
            *table.entry(obs).or_default().entry(s_idx).or_insert(0) += 1;
            if !step(&mut z, p) {
                break;
            }
        }
        s_idx += 1;
        if !step(&mut s, p) {
            break;
        }
    }

    let mut weighted: u128 = 0;
    let mut observations: Vec<&Vec<u64>> = table.keys().collect();
    observations.sort();
    for obs in observations {
        let cond = &table[obs];
        let total: u64 = cond.values().sum();
        let first = *cond.values().next().expect("nonempty conditional");
        let uniform = cond.values().all(|&c| c == first);
        match exact_log(cond.len() as u64, p) {
            Some(t) if uniform => weighted += total as u128 * t as u128,
            _ => {
                let mut distribution: Vec<(Vec<u64>, u64)> =
                    cond.iter().map(|(&si, &c)| (decode(si, p, l), c)).collect();
                distribution.sort();
                return Ok(ExhaustiveEntropy::NonIntegral {
                    observation: obs.clone(),
                    distribution,
                });
            }
        }
    }
    let entropy = Rational::new(
        i64::try_from(weighted).expect("entropy numerator fits"),
        states as i64,
    );
    Ok(ExhaustiveEntropy::Exact { entropy })
}

/// Noise and signal alignment diagnostics for one edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alignment {
    /// dim(rowspan H_v ∩ rowspan H_u)
    pub alpha: usize,
    /// `P_v H_v = P_u H_u` and both projections have rank alpha.
    pub projection_ok: bool,
    /// `P_v F_v = P_u F_u`
    pub signal_aligned: bool,
    /// rank(P_v F_v − P_u F_u)
    pub projected_secret_rank: usize,
}

pub fn alignment_check(scheme: &LinearScheme, v: NodeId, u: NodeId) -> Result<Alignment> {
    let field = scheme.field();
    let (cv, cu) = (scheme.node(v)?, scheme.node(u)?);
    let sv = Subspace::row_space(field, &cv.h);
    let su = Subspace::row_space(field, &cu.h);
    let inter = sv.intersect(field, &su)?;
    let n = scheme.signal_len();
    let mut pv = FMatrix::zeros(0, n);
    let mut pu = FMatrix::zeros(0, n);
    for r in 0..inter.dim() {
        let w = inter.basis().row(r);
        let a = solve_left(field, w, &cv.h)?.expect("intersection lies in rowspan H_v");
        let b = solve_left(field, w, &cu.h)?.expect("intersection lies in rowspan H_u");
        pv.push_row(&a);
        pu.push_row(&b);
    }
    let alpha = inter.dim();
    let projection_ok = pv.mul(field, &cv.h)? == pu.mul(field, &cu.h)?
        && pv.rank(field) == alpha
        && pu.rank(field) == alpha;
    let fv = pv.mul(field, &cv.f)?;
    let fu = pu.mul(field, &cu.f)?;
    Ok(Alignment {
        alpha,
        projection_ok,
        signal_aligned: fv == fu,
        projected_secret_rank: fv.sub(field, &fu)?.rank(field),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeVerdict {
    pub edge: EdgeRef,
    pub label: Label,
    #[serde(with = "rational::option")]
    pub rank_entropy: Option<Rational>,
    #[serde(with = "rational::option")]
    pub exhaustive_entropy: Option<Rational>,
    pub method: Method,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EdgeVerdict {
    /// The entropy this verdict was decided on.
    pub fn entropy(&self) -> Option<Rational> {
        self.rank_entropy.or(self.exhaustive_entropy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeAlignment {
    pub edge: EdgeRef,
    pub label: Label,
    #[serde(flatten)]
    pub alignment: Alignment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub method: Method,
    pub verdicts: Vec<EdgeVerdict>,
    pub rates: Rates,
    pub alignment: Vec<EdgeAlignment>,
    /// Nodes whose noise matrix does not have full row rank N.
    pub h_rank_deficient: Vec<NodeId>,
    /// Disagreements between the two entropy routes.
    pub inconsistencies: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failing_edges(&self) -> impl Iterator<Item = &EdgeVerdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }
}

fn target(label: Label, l: usize) -> Rational {
    match label {
        Label::Qualified => Rational::from_integer(0),
        Label::Unqualified => Rational::from_integer(l as i64),
    }
}

pub fn verify(
    g: &CdsGraph,
    scheme: &LinearScheme,
    method: Method,
    limit: u64,
) -> Result<VerificationReport> {
    scheme.check_nodes(g)?;
    let field = scheme.field();
    let h_rank_deficient: Vec<NodeId> = scheme
        .nodes()
        .iter()
        .filter(|(_, c)| c.h.rank(field) != scheme.signal_len())
        .map(|(id, _)| *id)
        .collect();

    let mut verdicts = Vec::new();
    let mut alignment = Vec::new();
    let mut inconsistencies = Vec::new();
    for e in g.edges() {
        let (v, u) = (e.a_node(), e.b_node());
        let want = target(e.label, scheme.secret_len());
        let rank = match method {
            Method::Rank | Method::Both => Some(rank_entropy(scheme, v, u)?),
            Method::Exhaustive => None,
        };
        let (exhaustive, note) = match method {
            Method::Exhaustive | Method::Both => match exhaustive_entropy(scheme, v, u, limit)? {
                ExhaustiveEntropy::Exact { entropy } => (Some(entropy), None),
                ExhaustiveEntropy::NonIntegral { observation, .. } => (
                    None,
                    Some(format!(
                        "conditional of S given signals {observation:?} is not uniform over a power of p"
                    )),
                ),
            },
            Method::Rank => (None, None),
        };
        let mut pass = match method {
            Method::Rank => rank == Some(want),
            Method::Exhaustive => exhaustive == Some(want),
            Method::Both => rank == Some(want) && exhaustive == Some(want),
        };
        if method == Method::Both && rank != exhaustive {
            pass = false;
            inconsistencies.push(format!(
                "{}: rank entropy {} but exhaustive entropy {}",
                e.name(),
                rank.map_or("-".into(), |r| rational::to_string(&r)),
                exhaustive.map_or("non-integral".into(), |r| rational::to_string(&r)),
            ));
        }
        verdicts.push(EdgeVerdict {
            edge: e.into(),
            label: e.label,
            rank_entropy: rank,
            exhaustive_entropy: exhaustive,
            method,
            pass,
            note,
        });
        alignment.push(EdgeAlignment {
            edge: e.into(),
            label: e.label,
            alignment: alignment_check(scheme, v, u)?,
        });
    }
    let pass = verdicts.iter().all(|v| v.pass)
        && h_rank_deficient.is_empty()
        && inconsistencies.is_empty();
    Ok(VerificationReport {
        method,
        verdicts,
        rates: scheme.rates(),
        alignment,
        h_rank_deficient,
        inconsistencies,
        pass,
    })
}
