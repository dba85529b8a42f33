//! Exact noise-rate bounds from (d, ρ, Q), and capacity certificates.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{ExtendedNat, GraphParams};
use crate::error::{Error, Result};
use crate::graph::CdsGraph;
use crate::rational::{self, Rational};
use crate::scheme::{LinearScheme, Rates};
use crate::verify::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub d: ExtendedNat,
    pub rho: ExtendedNat,
    pub q: ExtendedNat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RateBounds {
    /// No internal qualified edge, so noise rate 1 is achievable.
    pub capacity_one: bool,
    #[serde(with = "rational")]
    pub thm2_bound: Rational,
    /// Which case of the distance/cover bound applied.
    pub thm2_case: Thm2Case,
    /// Only present when N = L is asserted.
    #[serde(with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub thm3_bound: Option<Rational>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm2Case {
    NoInternalEdge,
    NoCover,
    Cover,
}

/// (ρ−1)(d−1)/(ρd−1).
pub fn cover_bound(rho: u64, d: u64) -> Rational {
    let (r, d) = (rho as i64, d as i64);
    Rational::new((r - 1) * (d - 1), r * d - 1)
}

/// (d−1)/d.
pub fn distance_bound(d: u64) -> Rational {
    Rational::new(d as i64 - 1, d as i64)
}

/// (Q−1)/Q.
pub fn component_bound(q: u64) -> Rational {
    Rational::new(q as i64 - 1, q as i64)
}

pub fn evaluate_bounds(params: &GraphParams, assert_n_equals_l: bool) -> RateBounds {
    let (thm2_bound, thm2_case) = match (params.d, params.rho) {
        (ExtendedNat::Infinite, _) => (Rational::from_integer(1), Thm2Case::NoInternalEdge),
        (ExtendedNat::Finite(d), ExtendedNat::Finite(rho)) => {
            (cover_bound(rho, d), Thm2Case::Cover)
        }
        (ExtendedNat::Finite(d), ExtendedNat::Infinite) => (distance_bound(d), Thm2Case::NoCover),
    };
    let thm3_bound = if assert_n_equals_l {
        Some(match params.q {
            ExtendedNat::Finite(q) => component_bound(q),
            ExtendedNat::Infinite => Rational::from_integer(1),
        })
    } else {
        None
    };
    RateBounds {
        capacity_one: !params.d.is_finite(),
        thm2_bound,
        thm2_case,
        thm3_bound,
        provenance: Provenance {
            d: params.d,
            rho: params.rho,
            q: params.q,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    CapacityAchieving {
        #[serde(with = "rational")]
        rate: Rational,
    },
    Gap {
        #[serde(with = "rational")]
        gap: Rational,
    },
    /// Achieved rate above a proven bound; only reachable through a bug in the
    /// analyzer or verifier.
    BoundViolating {
        #[serde(with = "rational")]
        excess: Rational,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CapacityAchieving { .. } => "capacity-achieving",
            Verdict::Gap { .. } => "gap",
            Verdict::BoundViolating { .. } => "bound-violating",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputHashes {
    pub graph_sha256: String,
    pub scheme_sha256: String,
    pub report_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub rates: Rates,
    pub bounds: RateBounds,
    /// The tightest applicable bound.
    #[serde(with = "rational")]
    pub bound: Rational,
    pub bound_source: &'static str,
    pub verdict: Verdict,
    pub hashes: InputHashes,
}

fn sha256_json<T: Serialize>(v: &T) -> String {
    let json = serde_json::to_string(v).expect("value serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Compares the achieved noise rate with the bounds for `params`. The N = L
/// bound applies when the scheme itself has N = L.
pub fn certify(
    graph: &CdsGraph,
    params: &GraphParams,
    scheme: &LinearScheme,
    report: &VerificationReport,
) -> Result<Certificate> {
    if !report.pass {
        let failing: Vec<String> = report.failing_edges().map(|v| v.edge.to_string()).collect();
        return Err(Error::refusal(format!(
            "cannot certify a scheme that fails verification (failing edges: {})",
            if failing.is_empty() {
                "none; see report".to_string()
            } else {
                failing.join(", ")
            }
        )));
    }
    let violations = graph.validate();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::refusal(format!(
            "the bounds assume a well-formed graph: {}",
            msgs.join("; ")
        )));
    }
    let bounds = evaluate_bounds(params, scheme.signal_len() == scheme.secret_len());
    let (bound, bound_source) = match bounds.thm3_bound {
        Some(b3) if b3 < bounds.thm2_bound => (b3, "components (N = L)"),
        _ => (bounds.thm2_bound, "distance/cover"),
    };
    let rates = scheme.rates();
    let rate = rates.noise_rate;
    let verdict = if rate == bound {
        Verdict::CapacityAchieving { rate }
    } else if rate < bound {
        Verdict::Gap { gap: bound - rate }
    } else {
        Verdict::BoundViolating {
            excess: rate - bound,
        }
    };
    Ok(Certificate {
        rates,
        bounds,
        bound,
        bound_source,
        verdict,
        hashes: InputHashes {
            graph_sha256: sha256_json(graph),
            scheme_sha256: sha256_json(scheme),
            report_sha256: sha256_json(report),
        },
    })
}
