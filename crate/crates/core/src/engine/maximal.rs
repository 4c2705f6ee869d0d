use crate::exec;
use crate::geometry::{canonical_rows, GeometryError, HalfSpace, Polytope, DEFAULT_ETA};
use crate::system::{step_backward_rows, SwitchedSystem};

use super::certificate::StabilityCertificate;
use super::member::Member;
use super::minimal::{min_invariant, ApproximationConfig, MinimalMode};
use super::{EngineError, MultiSet, SequenceTrace, SetKind, Termination, MAX_BUDGET};

/// Settings for the backward fixpoint iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxConfig {
    pub eta: f64,
    /// Iteration budget; derived from the a-priori bound when `None`.
    pub budget: Option<usize>,
    /// Enables the a-priori iteration bound.
    pub certificate: Option<StabilityCertificate>,
}

impl Default for MaxConfig {
    fn default() -> Self {
        MaxConfig { eta: DEFAULT_ETA, budget: None, certificate: None }
    }
}

impl MaxConfig {
    pub fn with_eta(eta: f64) -> Self {
        MaxConfig { eta, ..Default::default() }
    }
}

/// `log_ρ(min_j(R_j − r_j) / (Γ c))`: iterations after which the backward
/// sequence is guaranteed to have stopped. `None` when some `R_j <= r_j`.
pub fn maximal_iteration_bound(
    cert: &StabilityCertificate,
    inner_radii: &[f64],
    minimal_radii: &[f64],
    c: f64,
) -> Option<f64> {
    let margin = inner_radii.iter().zip(minimal_radii).map(|(big, small)| big - small).fold(f64::INFINITY, f64::min);
    if !(margin > 0.0) || !(c > 0.0) {
        return None;
    }
    let arg = margin / (cert.gamma * c);
    if arg >= 1.0 {
        return Some(0.0);
    }
    Some(arg.ln() / cert.rho.ln())
}

fn constraint_rows(sys: &SwitchedSystem) -> Result<Vec<Vec<HalfSpace>>, EngineError> {
    (0..sys.node_count())
        .map(|j| {
            let x = sys.constraint(j)?;
            if !x.is_cset(0.0) {
                return Err(EngineError::PreconditionViolated(format!(
                    "constraint set of node {:?} is not a C-set",
                    sys.graph().name(j)
                )));
            }
            Ok(x.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form of X"))?.to_vec())
        })
        .collect()
}

fn a_priori_bound(sys: &SwitchedSystem, cert: &StabilityCertificate, eta: f64) -> Option<f64> {
    let xs = sys.constraints()?;
    let radii: Vec<_> = xs.iter().map(|x| x.radii(true).ok()).collect::<Option<_>>()?;
    let inner: Vec<f64> = radii.iter().map(|r| r.inner_radius).collect();
    let c = radii.iter().map(|r| r.outer_radius).fold(0.0, f64::max);
    let minimal: Vec<f64> = if sys.is_nominal() {
        vec![0.0; sys.node_count()]
    } else {
        let mut cfg = ApproximationConfig::new(10.0 * eta);
        cfg.eta = eta;
        let (outer, _) = min_invariant(sys, &cfg, MinimalMode::Outer).ok()?;
        outer.members.iter().map(Member::outer_radius).collect()
    };
    maximal_iteration_bound(cert, &inner, &minimal, c)
}

/// Iterates `B_{l+1}^j = caps_j ∩ ⋂_{(j,d,σ)} C(σ, B_l^d)` from `start` until
/// two consecutive iterates agree within `eta`.
pub(crate) fn backward_fixpoint(
    sys: &SwitchedSystem,
    start: Vec<Vec<HalfSpace>>,
    caps: &[Vec<HalfSpace>],
    budget: usize,
    eta: f64,
) -> Result<(Vec<Polytope>, SequenceTrace), EngineError> {
    let g = sys.graph();
    let n = sys.dim();
    let mut trace = SequenceTrace::new();
    let mut cur_rows = start;
    let mut cur: Vec<Polytope> = exec::try_map_indexed(sys.node_count(), |j| {
        Polytope::from_hrep(n, cur_rows[j].clone()).map_err(|e| empty_at(sys, j, e))
    })?;
    for l in 1..=budget {
        let next_rows = exec::try_map_indexed(sys.node_count(), |j| {
            let mut rows = caps[j].clone();
            for e in g.out_edges(j) {
                rows.extend(step_backward_rows(sys, e.label, &cur_rows[e.target]));
            }
            canonical_rows(n, &rows).map_err(|e| empty_at(sys, j, e))
        })?;
        let next = exec::try_map_indexed(sys.node_count(), |j| {
            Polytope::from_canonical_rows(n, next_rows[j].clone()).map_err(|e| empty_at(sys, j, e))
        })?;
        let checks = exec::map_indexed(sys.node_count(), |j| {
            let shrinking = cur[j].includes(&next[j], eta);
            let settled = next[j].includes(&cur[j], eta);
            let delta = if n <= 2 {
                crate::geometry::hausdorff_distance(&cur[j], &next[j]).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            (shrinking, settled, delta)
        });
        if checks.iter().any(|c| !c.0) {
            return Err(EngineError::NestingViolated { iteration: l });
        }
        trace.deltas.push(checks.iter().map(|c| c.2).collect());
        trace.iterations = l;
        cur_rows = next_rows;
        cur = next;
        if checks.iter().all(|c| c.1) {
            trace.termination = Termination::Fixpoint;
            return Ok((cur, trace));
        }
    }
    trace.termination = Termination::Budget;
    Err(EngineError::BudgetExceeded { what: "maximal invariant iteration", budget })
}

fn empty_at(sys: &SwitchedSystem, j: usize, e: GeometryError) -> EngineError {
    match e {
        GeometryError::EmptySet => EngineError::EmptySet { node: sys.graph().name(j).to_string() },
        other => other.into(),
    }
}

/// Maximal constraint-admissible invariant multi-set by backward iteration
/// from the constraints. Works in any dimension.
pub fn max_invariant(sys: &SwitchedSystem, cfg: &MaxConfig) -> Result<(MultiSet, SequenceTrace), EngineError> {
    let caps = constraint_rows(sys)?;
    let bound = cfg.certificate.as_ref().and_then(|c| a_priori_bound(sys, c, cfg.eta));
    let budget = resolve_budget(cfg.budget, bound);
    let (sets, mut trace) = backward_fixpoint(sys, caps.clone(), &caps, budget, cfg.eta)?;
    trace.a_priori_bound = bound;
    let ms = MultiSet::new(sys, SetKind::Maximal, trace.iterations, sets.into_iter().map(Member::convex).collect())?;
    Ok((ms, trace))
}

pub(crate) fn resolve_budget(budget: Option<usize>, bound: Option<f64>) -> usize {
    match (budget, bound) {
        (Some(b), _) => b.min(MAX_BUDGET),
        (None, Some(k)) if k.is_finite() => ((10.0 * k.ceil().max(1.0)) as usize).min(MAX_BUDGET),
        _ => MAX_BUDGET,
    }
}

/// Intersection of the members on `y` (all nodes when `None`).
pub fn safe_set(sys: &SwitchedSystem, s_max: &MultiSet, y: Option<&[usize]>) -> Result<Polytope, EngineError> {
    if s_max.len() != sys.node_count() {
        return Err(EngineError::Mismatch("multi-set does not cover every node".into()));
    }
    let all: Vec<usize> = (0..sys.node_count()).collect();
    let nodes = y.unwrap_or(&all);
    if nodes.is_empty() {
        return Err(EngineError::PreconditionViolated("no designated start nodes".into()));
    }
    let mut rows = Vec::new();
    for &j in nodes {
        let p = s_max
            .members
            .get(j)
            .and_then(Member::as_convex)
            .ok_or_else(|| EngineError::Mismatch(format!("member {j} is missing or not convex")))?;
        rows.extend_from_slice(p.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form"))?);
    }
    let empty = || EngineError::EmptySet { node: "safe set".into() };
    let out = match Polytope::from_hrep(sys.dim(), rows) {
        Ok(p) => p,
        Err(GeometryError::EmptySet) => return Err(empty()),
        Err(e) => return Err(e.into()),
    };
    if !out.is_full_dimensional() {
        return Err(empty());
    }
    Ok(out)
}
