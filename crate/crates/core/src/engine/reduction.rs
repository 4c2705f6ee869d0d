use std::collections::BTreeSet;

use crate::automaton::{infer_dwell, DwellKind, ReductionPlan};
use crate::exec;
use crate::geometry::{canonical_rows, GeometryError, HalfSpace, Polytope};
use crate::system::{backward_rows, build_reduced_system, step_forward, SwitchedSystem};

use super::certificate::{stability_certificate_seeded, CertificateSeed};
use super::maximal::{backward_fixpoint, max_invariant, resolve_budget, MaxConfig};
use super::member::Member;
use super::minimal::{combine, min_invariant, ApproximationConfig, MinimalMode};
use super::{EngineError, MultiSet, SequenceTrace, SetKind};

/// How the expanded multi-set should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandMode {
    Minimal,
    MinimalInner,
    MinimalOuter,
}

fn check_plan(sys: &SwitchedSystem, plan: &ReductionPlan) -> Result<(), EngineError> {
    if plan.parent != *sys.graph() {
        return Err(EngineError::Mismatch("reduction plan was built for a different graph".into()));
    }
    Ok(())
}

/// Maps a multi-set of the reduced system back to every node: nodes of `Y`
/// keep their member, other nodes collect the forward images along the walks
/// that enter them from `Y`.
pub fn expand_from_reduced(
    sys: &SwitchedSystem,
    plan: &ReductionPlan,
    reduced: &MultiSet,
    mode: ExpandMode,
) -> Result<MultiSet, EngineError> {
    check_plan(sys, plan)?;
    if reduced.len() != plan.y.len() || reduced.dim() != sys.dim() {
        return Err(EngineError::Mismatch("reduced multi-set does not match the plan".into()));
    }
    if mode != ExpandMode::Minimal && reduced.iteration < plan.theta_max {
        return Err(EngineError::PreconditionViolated(format!(
            "reduced iteration {} is below the longest reduced walk {}",
            reduced.iteration, plan.theta_max
        )));
    }
    let members = exec::try_map_indexed(sys.node_count(), |j| -> Result<Member, EngineError> {
        if let Some(r) = plan.reduced_index(j) {
            return Ok(reduced.member(r).clone());
        }
        let mut pieces = Vec::new();
        for w in &plan.entry_walks[j] {
            let src = plan.reduced_index(w.start()).expect("entry walks start in Y");
            for p in reduced.member(src).pieces() {
                let mut cur = p.clone();
                for &l in &w.labels {
                    cur = step_forward(sys, l, &cur, false)?;
                }
                pieces.push(cur);
            }
        }
        combine(sys.dim(), pieces, false, usize::MAX)
    })?;
    let kind = match mode {
        ExpandMode::Minimal => SetKind::Minimal,
        ExpandMode::MinimalInner => SetKind::MinimalInner,
        ExpandMode::MinimalOuter => SetKind::MinimalOuter,
    };
    let mut out = MultiSet::new(sys, kind, reduced.iteration, members)?;
    out.epsilon = reduced.epsilon;
    if mode == ExpandMode::MinimalOuter {
        // The reduced member already passed its own check within η; walks
        // through the other nodes compose that slack with one more step.
        let report = super::verify_invariance(sys, &out, false, 2.0 * crate::geometry::DEFAULT_ETA)?;
        if !report.invariant {
            return Err(EngineError::VerificationFailed { excess: report.worst_excess() });
        }
    }
    Ok(out)
}

/// ε-approximation of the minimal multi-set computed on the reduced system
/// and expanded back. The reduced accuracy is tightened by `max(1, Γρ)` with
/// `(Γ, ρ)` a unit-ball certificate of the original system, and the reduced
/// index is held at or above the longest reduced walk.
pub fn min_invariant_reduced(
    sys: &SwitchedSystem,
    plan: &ReductionPlan,
    cfg: &ApproximationConfig,
    mode: MinimalMode,
) -> Result<(MultiSet, SequenceTrace), EngineError> {
    check_plan(sys, plan)?;
    let red = build_reduced_system(sys, plan)?;
    let mut rcfg = cfg.clone();
    rcfg.min_index = cfg.min_index.max(plan.theta_max);
    rcfg.certificate = None;
    if !sys.is_nominal() {
        let ball = stability_certificate_seeded(sys, cfg.lambda0, CertificateSeed::UnitBall, cfg.budget)?;
        rcfg.error_scale = cfg.error_scale * (ball.gamma * ball.rho).max(1.0);
    }
    let (reduced, trace) = min_invariant(&red, &rcfg, mode)?;
    let expand = match mode {
        MinimalMode::Inner => ExpandMode::MinimalInner,
        MinimalMode::Outer => ExpandMode::MinimalOuter,
    };
    let reduced = if sys.is_nominal() {
        // Nominal systems return `{0}` without iterating; any index works.
        MultiSet { iteration: plan.theta_max, ..reduced }
    } else {
        reduced
    };
    Ok((expand_from_reduced(sys, plan, &reduced, expand)?, trace))
}

/// Result of the warm-started maximal computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMaximal {
    pub maximal: MultiSet,
    pub trace: SequenceTrace,
    /// Maximal multi-set of the reduced system.
    pub reduced: MultiSet,
    pub reduced_trace: SequenceTrace,
}

fn rows_of(p: &Polytope) -> Result<Vec<HalfSpace>, EngineError> {
    Ok(p.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form"))?.to_vec())
}

/// Maximal multi-set warm-started from the reduced system: the backward
/// iteration starts from the reduced maximal set on `Y` and from `X` elsewhere.
pub fn max_from_reduced(
    sys: &SwitchedSystem,
    plan: &ReductionPlan,
    cfg: &MaxConfig,
) -> Result<ReducedMaximal, EngineError> {
    check_plan(sys, plan)?;
    let red = build_reduced_system(sys, plan)?;
    let rcfg = MaxConfig { certificate: None, ..cfg.clone() };
    let (reduced, reduced_trace) = max_invariant(&red, &rcfg)?;
    let start = (0..sys.node_count())
        .map(|j| match plan.reduced_index(j) {
            Some(r) => rows_of(reduced.member(r).as_convex().expect("maximal members are convex")),
            None => rows_of(sys.constraint(j)?),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let budget = resolve_budget(cfg.budget, None);
    let (sets, trace) = backward_fixpoint(sys, start.clone(), &start, budget, cfg.eta)?;
    for (r, &y) in plan.y.iter().enumerate() {
        if !reduced.member(r).includes_polytope(&sets[y], cfg.eta) {
            return Err(EngineError::PreconditionViolated(format!(
                "maximal member of node {:?} escaped the reduced maximal set",
                sys.graph().name(y)
            )));
        }
    }
    let maximal =
        MultiSet::new(sys, SetKind::Maximal, trace.iterations, sets.into_iter().map(Member::convex).collect())?;
    Ok(ReducedMaximal { maximal, trace, reduced, reduced_trace })
}

/// Maximal multi-set of a dwell-time system in closed form.
///
/// Nodes of `Y` take the reduced maximal set. Every other node `j` gets
/// `X ∩ ⋂_w [C(w, S̃^d) ∩ ⋂_i C(w→i, X)]` over the walks `w` from `j` to its
/// first `Y` node `d`, where `w→i` is the prefix of `w` ending at interior
/// node `i`.
pub fn dwell_closed_form_max(
    sys: &SwitchedSystem,
    plan: &ReductionPlan,
    kind: DwellKind,
    cfg: &MaxConfig,
) -> Result<ReducedMaximal, EngineError> {
    check_plan(sys, plan)?;
    if infer_dwell(sys.graph(), kind).is_none() {
        return Err(EngineError::KindMismatch(match kind {
            DwellKind::Min => "minimum",
            DwellKind::Max => "maximum",
        }));
    }
    let x0 = sys.constraint(0)?;
    for j in 1..sys.node_count() {
        if !sys.constraint(j)?.approx_eq(x0, cfg.eta) {
            return Err(EngineError::PreconditionViolated(
                "dwell-time closed form needs one common constraint set".into(),
            ));
        }
    }
    let red = build_reduced_system(sys, plan)?;
    let rcfg = MaxConfig { certificate: None, ..cfg.clone() };
    let (reduced, reduced_trace) = max_invariant(&red, &rcfg)?;
    let x_rows = rows_of(x0)?;
    let members = exec::try_map_indexed(sys.node_count(), |j| -> Result<Member, EngineError> {
        if let Some(r) = plan.reduced_index(j) {
            return Ok(reduced.member(r).clone());
        }
        // Distinct (label prefix, target set) pairs; walks share prefixes.
        let mut pulls: BTreeSet<(Vec<usize>, Option<usize>)> = BTreeSet::new();
        for w in &plan.exit_walks[j] {
            let d = plan.reduced_index(w.end()).expect("exit walks end in Y");
            pulls.insert((w.labels.clone(), Some(d)));
            for p in 1..w.len() {
                pulls.insert((w.labels[..p].to_vec(), None));
            }
        }
        let mut rows = x_rows.clone();
        for (labels, target) in &pulls {
            let base = match target {
                Some(d) => rows_of(reduced.member(*d).as_convex().expect("maximal members are convex"))?,
                None => x_rows.clone(),
            };
            rows.extend(backward_rows(sys, labels, &base)?);
        }
        let rows = canonical_rows(sys.dim(), &rows).map_err(|e| match e {
            GeometryError::EmptySet => EngineError::EmptySet { node: sys.graph().name(j).to_string() },
            other => other.into(),
        })?;
        Ok(Member::convex(Polytope::from_hrep(sys.dim(), rows)?))
    })?;
    let maximal = MultiSet::new(sys, SetKind::Maximal, reduced_trace.iterations, members)?;
    Ok(ReducedMaximal { maximal, trace: reduced_trace.clone(), reduced, reduced_trace })
}
