use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::automaton::{lift_p, lift_t, LiftIndexMap, ReductionPlan, DEFAULT_WALK_CAP};
use crate::geometry::Polytope;

use super::maps::step_forward;
use super::{Mode, SwitchedSystem, SystemError};

/// Product `A_σp ⋯ A_σ1` and accumulated disturbance along `labels`.
pub(crate) fn accumulate(sys: &SwitchedSystem, labels: &[usize]) -> Result<Mode, SystemError> {
    let n = sys.dim();
    let mut a = DMatrix::identity(n, n);
    for &l in labels {
        a = &sys.mode(l).a * a;
    }
    let nominal = labels.iter().all(|&l| sys.mode(l).is_nominal());
    let w = if nominal {
        Polytope::zero(n)
    } else {
        sys.require_planar_or_nominal()?;
        let mut cur = Polytope::zero(n);
        for &l in labels {
            cur = step_forward(sys, l, &cur, false)?;
        }
        cur
    };
    Ok(Mode::new(a, w))
}

/// System on the unavoidable nodes with one mode per reduced edge.
pub fn build_reduced_system(sys: &SwitchedSystem, plan: &ReductionPlan) -> Result<SwitchedSystem, SystemError> {
    if plan.parent != *sys.graph() {
        return Err(SystemError::Invalid("reduction plan was built for a different graph".into()));
    }
    let modes = plan.edges.iter().map(|e| accumulate(sys, &e.walk.labels)).collect::<Result<Vec<_>, _>>()?;
    let constraints = sys.constraints().map(|xs| plan.y.iter().map(|&v| xs[v].clone()).collect());
    SwitchedSystem::new(sys.dim(), modes, plan.graph.clone(), constraints)
}

/// System whose steps are `t` steps of `sys`.
pub fn build_tlift_system(sys: &SwitchedSystem, t: usize) -> Result<(SwitchedSystem, LiftIndexMap), SystemError> {
    let map = lift_t(sys.graph(), t)?;
    if t == 1 {
        return Ok((sys.clone(), map));
    }
    let modes = map.label_sequences.iter().map(|seq| accumulate(sys, seq)).collect::<Result<Vec<_>, _>>()?;
    let lifted = SwitchedSystem::new(sys.dim(), modes, map.graph.clone(), sys.constraints().map(|x| x.to_vec()))?;
    Ok((lifted, map))
}

/// Same dynamics on the path-dependent lifted graph; each lifted node keeps
/// the constraint of the node its walk ends at.
pub fn build_plift_system(sys: &SwitchedSystem, p: usize) -> Result<(SwitchedSystem, LiftIndexMap), SystemError> {
    let map = lift_p(sys.graph(), p)?;
    let constraints = sys.constraints().map(|xs| map.node_walks.iter().map(|w| xs[w.end()].clone()).collect());
    let lifted = SwitchedSystem::new(sys.dim(), sys.modes().to_vec(), map.graph.clone(), constraints)?;
    Ok((lifted, map))
}

/// Largest `|A_σk ⋯ A_σ1|^(1/k)` over admissible sequences, induced ∞-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub horizon: usize,
    pub value: f64,
}

pub(crate) fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn growth_bound(sys: &SwitchedSystem, k: usize) -> Result<GrowthBound, SystemError> {
    if k == 0 {
        return Err(SystemError::Invalid("horizon must be at least 1".into()));
    }
    let sequences: BTreeSet<Vec<usize>> =
        sys.graph().all_walks(k, DEFAULT_WALK_CAP)?.into_iter().map(|w| w.labels).collect();
    let n = sys.dim();
    let value = sequences
        .iter()
        .map(|seq| {
            let mut a = DMatrix::identity(n, n);
            for &l in seq {
                a = &sys.mode(l).a * a;
            }
            inf_norm(&a).powf(1.0 / k as f64)
        })
        .fold(0.0, f64::max);
    Ok(GrowthBound { horizon: k, value })
}
