use crate::geometry::{Polytope, DEFAULT_ETA};
use crate::system::SwitchedSystem;

use super::member::Member;
use super::minimal::{nominal_seeds, union_sweep};
use super::{EngineError, DEFAULT_PIECE_BUDGET};

/// Which sets the contraction was measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMethod {
    /// Hull of the disturbance sets entering each node.
    Disturbances,
    /// The unit ball at every node.
    UnitBall,
    /// Values provided by the caller; not re-checkable.
    Supplied,
}

impl CertificateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateMethod::Disturbances => "disturbance-seeded",
            CertificateMethod::UnitBall => "unit-ball-seeded",
            CertificateMethod::Supplied => "supplied",
        }
    }
}

/// Seed choice for [`stability_certificate_seeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSeed {
    Disturbances,
    UnitBall,
}

/// Exponential contraction bound `N_k ⊆ Γρ^k N_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCertificate {
    pub gamma: f64,
    pub rho: f64,
    pub lambda0: f64,
    pub k0: usize,
    pub method: CertificateMethod,
}

impl StabilityCertificate {
    pub fn supplied(gamma: f64, rho: f64) -> Result<Self, EngineError> {
        if !(gamma >= 1.0 && gamma.is_finite()) || !(rho > 0.0 && rho < 1.0) {
            return Err(EngineError::CertificateUnavailable(format!(
                "need gamma >= 1 and 0 < rho < 1, got ({gamma}, {rho})"
            )));
        }
        Ok(StabilityCertificate { gamma, rho, lambda0: rho, k0: 1, method: CertificateMethod::Supplied })
    }
}

/// Largest per-row ratio `h_M(a) / b` over the rows of the C-set `outer`.
pub(crate) fn ratio(member: &Member, outer: &Polytope) -> f64 {
    outer
        .hrep()
        .map(|rows| rows.iter().map(|r| member.support(&r.normal) / r.offset).fold(f64::NEG_INFINITY, f64::max))
        .unwrap_or(f64::INFINITY)
}

fn seed_sets(sys: &SwitchedSystem, seed: CertificateSeed) -> Result<Vec<Polytope>, EngineError> {
    match seed {
        CertificateSeed::UnitBall => Ok(vec![Polytope::ball(sys.dim(), 1.0); sys.node_count()]),
        CertificateSeed::Disturbances => {
            let seeds =
                nominal_seeds(sys, DEFAULT_PIECE_BUDGET)?.iter().map(Member::hull).collect::<Result<Vec<_>, _>>()?;
            if let Some(j) = seeds.iter().position(|s| !s.is_cset(DEFAULT_ETA)) {
                return Err(EngineError::CertificateUnavailable(format!(
                    "incoming disturbances of node {:?} do not form a C-set",
                    sys.graph().name(j)
                )));
            }
            Ok(seeds)
        }
    }
}

/// Certificate seeded by the disturbance sets, falling back to the unit
/// ball when they do not surround the origin (nominal systems).
pub fn stability_certificate(
    sys: &SwitchedSystem,
    lambda0: f64,
    budget: usize,
) -> Result<StabilityCertificate, EngineError> {
    match stability_certificate_seeded(sys, lambda0, CertificateSeed::Disturbances, budget) {
        Err(EngineError::CertificateUnavailable(_)) => {
            stability_certificate_seeded(sys, lambda0, CertificateSeed::UnitBall, budget)
        }
        other => other,
    }
}

pub fn stability_certificate_seeded(
    sys: &SwitchedSystem,
    lambda0: f64,
    seed: CertificateSeed,
    budget: usize,
) -> Result<StabilityCertificate, EngineError> {
    if !(lambda0 > 0.0 && lambda0 < 1.0) {
        return Err(EngineError::CertificateUnavailable(format!("lambda0 must lie in (0,1), got {lambda0}")));
    }
    let seeds = seed_sets(sys, seed)?;
    let convexify = sys.dim() <= 2;
    let mut cur: Vec<Member> = seeds.iter().cloned().map(Member::convex).collect();
    let mut worst: f64 = 1.0;
    for k in 1..=budget {
        cur = union_sweep(sys, &cur, true, convexify, DEFAULT_PIECE_BUDGET)?;
        let r = cur.iter().zip(&seeds).map(|(m, s)| ratio(m, s)).fold(0.0, f64::max);
        if r <= lambda0 {
            let kf = k as f64;
            let gamma = (lambda0.powf((1.0 - kf) / kf) * worst).max(1.0);
            let cert = StabilityCertificate {
                gamma,
                rho: lambda0.powf(1.0 / kf),
                lambda0,
                k0: k,
                method: match seed {
                    CertificateSeed::Disturbances => CertificateMethod::Disturbances,
                    CertificateSeed::UnitBall => CertificateMethod::UnitBall,
                },
            };
            if !verify_certificate(sys, &cert)? {
                return Err(EngineError::CertificateUnavailable("re-verification of the contraction failed".into()));
            }
            return Ok(cert);
        }
        worst = worst.max(r);
    }
    Err(EngineError::BudgetExceeded { what: "certificate search", budget })
}

/// Recomputes `N_{k0}` from the seed and checks `N_{k0} ⊆ λ0·N_0` by inclusion.
/// Supplied certificates carry no seed and are accepted as given.
pub fn verify_certificate(sys: &SwitchedSystem, cert: &StabilityCertificate) -> Result<bool, EngineError> {
    let seed = match cert.method {
        CertificateMethod::Supplied => return Ok(true),
        CertificateMethod::Disturbances => CertificateSeed::Disturbances,
        CertificateMethod::UnitBall => CertificateSeed::UnitBall,
    };
    let seeds = seed_sets(sys, seed)?;
    let convexify = sys.dim() <= 2;
    let mut cur: Vec<Member> = seeds.iter().cloned().map(Member::convex).collect();
    for _ in 0..cert.k0 {
        cur = union_sweep(sys, &cur, true, convexify, DEFAULT_PIECE_BUDGET)?;
    }
    Ok(cur.iter().zip(&seeds).all(|(m, s)| Member::convex(s.scale(cert.lambda0)).includes(m, DEFAULT_ETA)))
}
