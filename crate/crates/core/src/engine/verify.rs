use crate::exec;
use crate::geometry::{GeometryError, Polytope};
use crate::system::SwitchedSystem;

use super::member::Member;
use super::{EngineError, MultiSet};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeViolation {
    pub source: usize,
    pub target: usize,
    pub label: usize,
    /// How far the image sticks out of the target member, measured along
    /// the worst row of the best-fitting target piece.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub invariant: bool,
    /// Present when constraint admissibility was requested.
    pub admissible: Option<bool>,
    pub violations: Vec<EdgeViolation>,
    /// `(node, excess)` for members sticking out of their constraint set.
    pub constraint_violations: Vec<(usize, f64)>,
}

impl InvarianceReport {
    pub fn passes(&self) -> bool {
        self.invariant && self.admissible != Some(false)
    }

    pub fn worst_excess(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.excess)
            .chain(self.constraint_violations.iter().map(|c| c.1))
            .fold(0.0, f64::max)
    }
}

/// Worst row excess of `A P ⊕ W` against the rows of `q`.
fn image_excess(sys: &SwitchedSystem, label: usize, p: &Polytope, q: &Polytope) -> Result<f64, GeometryError> {
    let mode = sys.mode(label);
    let rows = q.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form of a target member"))?;
    let at = mode.a.transpose();
    let nominal = mode.is_nominal();
    Ok(rows
        .iter()
        .map(|r| {
            let w = if nominal { 0.0 } else { mode.w.support(&r.normal) };
            p.support(&(&at * &r.normal)) + w - r.offset
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

fn member_excess(sys: &SwitchedSystem, label: usize, from: &Member, to: &Member) -> Result<f64, GeometryError> {
    let mut worst = f64::NEG_INFINITY;
    for p in from.pieces() {
        let mut best = f64::INFINITY;
        for q in to.pieces() {
            best = best.min(image_excess(sys, label, p, q)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Checks `R(σ, S_i) ⊆ S_j` on every edge, and optionally `S_j ⊆ X_j`.
pub fn verify_invariance(
    sys: &SwitchedSystem,
    ms: &MultiSet,
    admissible: bool,
    eta: f64,
) -> Result<InvarianceReport, EngineError> {
    if ms.len() != sys.node_count() || ms.dim() != sys.dim() {
        return Err(EngineError::Mismatch(format!(
            "multi-set has {} members of dimension {}, system has {} nodes of dimension {}",
            ms.len(),
            ms.dim(),
            sys.node_count(),
            sys.dim()
        )));
    }
    let edges = sys.graph().edges();
    let excesses = exec::try_map_indexed(edges.len(), |k| {
        let e = &edges[k];
        member_excess(sys, e.label, ms.member(e.source), ms.member(e.target))
    })?;
    let violations: Vec<EdgeViolation> = edges
        .iter()
        .zip(excesses)
        .filter(|(_, x)| *x > eta)
        .map(|(e, x)| EdgeViolation { source: e.source, target: e.target, label: e.label, excess: x })
        .collect();
    let mut constraint_violations = Vec::new();
    let admissible = if admissible {
        for j in 0..sys.node_count() {
            let x = sys.constraint(j)?;
            let rows = x.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form of X"))?;
            let excess =
                rows.iter().map(|r| ms.member(j).support(&r.normal) - r.offset).fold(f64::NEG_INFINITY, f64::max);
            if excess > eta {
                constraint_violations.push((j, excess));
            }
        }
        Some(constraint_violations.is_empty())
    } else {
        None
    };
    Ok(InvarianceReport { invariant: violations.is_empty(), admissible, violations, constraint_violations })
}
