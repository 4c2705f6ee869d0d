use crate::automaton::{LiftIndexMap, LiftKind};
use crate::exec;
use crate::geometry::{canonical_rows, GeometryError, HalfSpace, Polytope};
use crate::system::{step_backward_rows, SwitchedSystem};

use super::member::Member;
use super::minimal::union_sweep;
use super::{EngineError, MultiSet, SetKind, DEFAULT_PIECE_BUDGET};

fn empty_at(sys: &SwitchedSystem, j: usize) -> impl Fn(GeometryError) -> EngineError + '_ {
    move |e| match e {
        GeometryError::EmptySet => EngineError::EmptySet { node: sys.graph().name(j).to_string() },
        other => other.into(),
    }
}

/// Recovers multi-sets of `sys` from those of its `t`-product lift.
///
/// Minimal: the union of the forward images of the lifted members over the
/// walks of fewer than `t` edges. Maximal: the intersection of the backward
/// maps over the same walks, which costs `t − 1` extra backward steps.
pub fn recover_from_tlift(
    sys: &SwitchedSystem,
    t: usize,
    lifted_min: Option<&MultiSet>,
    lifted_max: Option<&MultiSet>,
) -> Result<(Option<MultiSet>, Option<MultiSet>), EngineError> {
    if t == 0 {
        return Err(EngineError::PreconditionViolated("lift parameter must be at least 1".into()));
    }
    for ms in lifted_min.iter().chain(lifted_max.iter()) {
        if ms.len() != sys.node_count() || ms.dim() != sys.dim() {
            return Err(EngineError::Mismatch("lifted multi-set does not match the system".into()));
        }
    }
    let minimal = match lifted_min {
        None => None,
        Some(ms) => {
            let mut layer = ms.members.clone();
            let mut acc: Vec<Vec<Polytope>> = layer.iter().map(|m| m.pieces().to_vec()).collect();
            for _ in 1..t {
                layer = union_sweep(sys, &layer, false, false, DEFAULT_PIECE_BUDGET)?;
                for (a, m) in acc.iter_mut().zip(&layer) {
                    a.extend(m.pieces().iter().cloned());
                }
            }
            let members = acc
                .into_iter()
                .map(|pieces| Member::from_pieces(pieces, DEFAULT_PIECE_BUDGET))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = MultiSet::new(sys, recovered_kind(ms.kind), ms.iteration, members)?;
            out.epsilon = ms.epsilon;
            Some(out)
        }
    };
    let maximal = match lifted_max {
        None => None,
        Some(ms) => {
            let n = sys.dim();
            let g = sys.graph();
            let mut layer: Vec<Vec<HalfSpace>> = ms
                .members
                .iter()
                .map(|m| {
                    let p =
                        m.as_convex().ok_or_else(|| EngineError::Mismatch("maximal members must be convex".into()))?;
                    Ok(p.hrep().ok_or(GeometryError::RepresentationUnavailable("half-space form"))?.to_vec())
                })
                .collect::<Result<_, EngineError>>()?;
            let mut acc = layer.clone();
            for _ in 1..t {
                layer = exec::try_map_indexed(sys.node_count(), |j| {
                    let mut rows = Vec::new();
                    for e in g.out_edges(j) {
                        rows.extend(step_backward_rows(sys, e.label, &layer[e.target]));
                    }
                    canonical_rows(n, &rows).map_err(empty_at(sys, j))
                })?;
                acc = exec::try_map_indexed(sys.node_count(), |j| {
                    let mut rows = acc[j].clone();
                    rows.extend_from_slice(&layer[j]);
                    canonical_rows(n, &rows).map_err(empty_at(sys, j))
                })?;
            }
            let members = exec::try_map_indexed(sys.node_count(), |j| {
                Polytope::from_hrep(n, acc[j].clone()).map(Member::convex).map_err(empty_at(sys, j))
            })?;
            Some(MultiSet::new(sys, SetKind::Maximal, ms.iteration + (t - 1), members)?)
        }
    };
    Ok((minimal, maximal))
}

fn recovered_kind(kind: SetKind) -> SetKind {
    match kind {
        SetKind::Forward => SetKind::Minimal,
        other => other,
    }
}

/// Recovers multi-sets of `sys` from those of its path-dependent lift.
///
/// Minimal members are the union of the lifted members standing for the
/// node; maximal members must agree across them and one is returned.
pub fn recover_from_plift(
    sys: &SwitchedSystem,
    index: &LiftIndexMap,
    lifted_min: Option<&MultiSet>,
    lifted_max: Option<&MultiSet>,
    eta: f64,
) -> Result<(Option<MultiSet>, Option<MultiSet>), EngineError> {
    if index.kind != LiftKind::Path || index.members.len() != sys.node_count() {
        return Err(EngineError::Mismatch("index map is not a path lift of this system".into()));
    }
    for ms in lifted_min.iter().chain(lifted_max.iter()) {
        if ms.len() != index.graph.node_count() || ms.dim() != sys.dim() {
            return Err(EngineError::Mismatch("lifted multi-set does not match the lift".into()));
        }
    }
    if let Some(j) = index.members.iter().position(Vec::is_empty) {
        return Err(EngineError::Mismatch(format!("no lifted node stands for {:?}", sys.graph().name(j))));
    }
    let minimal = match lifted_min {
        None => None,
        Some(ms) => {
            let members = index
                .members
                .iter()
                .map(|ids| {
                    let pieces = ids.iter().flat_map(|&i| ms.member(i).pieces().iter().cloned()).collect();
                    Member::from_pieces(pieces, DEFAULT_PIECE_BUDGET)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = MultiSet::new(sys, recovered_kind(ms.kind), ms.iteration, members)?;
            out.epsilon = ms.epsilon;
            Some(out)
        }
    };
    let maximal = match lifted_max {
        None => None,
        Some(ms) => {
            let mut members = Vec::with_capacity(sys.node_count());
            for (j, ids) in index.members.iter().enumerate() {
                let first = ms.member(ids[0]);
                for &i in &ids[1..] {
                    let other = ms.member(i);
                    if !(first.includes(other, eta) && other.includes(first, eta)) {
                        return Err(EngineError::InconsistentLift { node: sys.graph().name(j).to_string() });
                    }
                }
                members.push(first.clone());
            }
            Some(MultiSet::new(sys, SetKind::Maximal, ms.iteration, members)?)
        }
    };
    Ok((minimal, maximal))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{forward_sequence, max_invariant, min_invariant, ApproximationConfig, MaxConfig, MinimalMode};
    use super::*;
    use crate::system::{build_plift_system, build_tlift_system};

    #[test]
    fn tlift_one_is_identity() {
        let sys = two_node_scalar(0.1);
        let (f, _) = forward_sequence(&sys, 4, true).unwrap();
        let (m, _) = max_invariant(&sys, &MaxConfig::default()).unwrap();
        let (rmin, rmax) = recover_from_tlift(&sys, 1, Some(&f), Some(&m)).unwrap();
        assert_eq!(rmin.unwrap().members, f.members);
        assert!(rmax.unwrap().approx_eq(&m, 0.0));
    }

    #[test]
    fn tlift_two_recovers_direct() {
        let sys = two_node_scalar(0.1);
        let (lifted, _) = build_tlift_system(&sys, 2).unwrap();
        let cfg = ApproximationConfig::new(1e-8);
        let (lmin, _) = min_invariant(&lifted, &cfg, MinimalMode::Outer).unwrap();
        let (lmax, _) = max_invariant(&lifted, &MaxConfig::default()).unwrap();
        let (rmin, rmax) = recover_from_tlift(&sys, 2, Some(&lmin), Some(&lmax)).unwrap();
        let (dmin, _) = min_invariant(&sys, &cfg, MinimalMode::Outer).unwrap();
        let (dmax, _) = max_invariant(&sys, &MaxConfig::default()).unwrap();
        assert!(rmin.unwrap().approx_eq(&dmin, 1e-6));
        assert!(rmax.unwrap().approx_eq(&dmax, 1e-9));
    }

    #[test]
    fn plift_recovers_direct() {
        let sys = two_node_scalar(0.1);
        let (lifted, index) = build_plift_system(&sys, 1).unwrap();
        let cfg = ApproximationConfig::new(1e-8);
        let (lmin, _) = min_invariant(&lifted, &cfg, MinimalMode::Outer).unwrap();
        let (lmax, _) = max_invariant(&lifted, &MaxConfig::default()).unwrap();
        let (rmin, rmax) = recover_from_plift(&sys, &index, Some(&lmin), Some(&lmax), 1e-9).unwrap();
        let (dmin, _) = min_invariant(&sys, &cfg, MinimalMode::Outer).unwrap();
        let (dmax, _) = max_invariant(&sys, &MaxConfig::default()).unwrap();
        assert!(rmin.unwrap().approx_eq(&dmin, 1e-6));
        assert!(rmax.unwrap().approx_eq(&dmax, 1e-9));
    }

    #[test]
    fn plift_of_single_node_is_identity() {
        let sys = single(0.5, 0.25);
        let (lifted, index) = build_plift_system(&sys, 1).unwrap();
        assert_eq!(lifted.node_count(), 1);
        let (f, _) = forward_sequence(&lifted, 3, true).unwrap();
        let (rmin, _) = recover_from_plift(&sys, &index, Some(&f), None, 1e-9).unwrap();
        assert_eq!(rmin.unwrap().members, f.members);
    }

    #[test]
    fn inconsistent_maximal_members_rejected() {
        let sys = two_node_scalar(0.1);
        let (lifted, index) = build_plift_system(&sys, 1).unwrap();
        let (mut lmax, _) = max_invariant(&lifted, &MaxConfig::default()).unwrap();
        let j = (0..sys.node_count()).find(|&j| index.members[j].len() > 1).unwrap();
        let victim = index.members[j][1];
        lmax.members[victim] = Member::convex(interval(-0.1, 0.1));
        assert!(matches!(
            recover_from_plift(&sys, &index, None, Some(&lmax), 1e-9),
            Err(EngineError::InconsistentLift { .. })
        ));
    }
}
