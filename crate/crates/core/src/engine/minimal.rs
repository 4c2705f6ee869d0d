use nalgebra::DVector;

use crate::exec;
use crate::geometry::{intersection, Polytope, DEFAULT_ETA};
use crate::system::{step_forward, SwitchedSystem};

use super::certificate::{ratio, stability_certificate, StabilityCertificate};
use super::member::Member;
use super::verify::verify_invariance;
use super::{EngineError, MultiSet, SequenceTrace, SetKind, Termination, DEFAULT_PIECE_BUDGET};

/// Settings for the ε-approximations of the minimal invariant multi-set.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationConfig {
    pub epsilon: f64,
    /// Fixed contraction target for the outer method; searched when `None`.
    pub lambda: Option<f64>,
    pub budget: usize,
    pub eta: f64,
    /// Hull every member after each step.
    pub convexified: bool,
    /// Contraction target used when a certificate has to be computed.
    pub lambda0: f64,
    /// Smallest admissible iteration index.
    pub min_index: usize,
    /// Factor by which the achieved error is inflated downstream; the
    /// iteration stops only once `error_scale · error <= ε`.
    pub error_scale: f64,
    pub certificate: Option<StabilityCertificate>,
    pub piece_budget: usize,
}

impl ApproximationConfig {
    pub fn new(epsilon: f64) -> Self {
        ApproximationConfig {
            epsilon,
            lambda: None,
            budget: 10_000,
            eta: DEFAULT_ETA,
            convexified: true,
            lambda0: 0.15,
            min_index: 0,
            error_scale: 1.0,
            certificate: None,
            piece_budget: DEFAULT_PIECE_BUDGET,
        }
    }

    fn check(&self) -> Result<(), EngineError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(EngineError::PreconditionViolated(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(EngineError::PreconditionViolated(format!("lambda must lie in (0,1), got {l}")));
            }
        }
        if self.error_scale < 1.0 {
            return Err(EngineError::PreconditionViolated("error scale must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inner or outer ε-approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimalMode {
    Inner,
    Outer,
}

/// One sweep of the forward (or nominal) union map: each node collects the
/// images of its predecessors' members along the incoming edges.
pub(crate) fn union_sweep(
    sys: &SwitchedSystem,
    prev: &[Member],
    nominal: bool,
    convexified: bool,
    piece_budget: usize,
) -> Result<Vec<Member>, EngineError> {
    let g = sys.graph();
    exec::try_map_indexed(sys.node_count(), |j| {
        let mut pieces = Vec::new();
        for e in g.in_edges(j) {
            for p in prev[e.source].pieces() {
                pieces.push(step_forward(sys, e.label, p, nominal)?);
            }
        }
        combine(sys.dim(), pieces, convexified, piece_budget)
    })
}

pub(crate) fn combine(
    dim: usize,
    pieces: Vec<Polytope>,
    convexified: bool,
    piece_budget: usize,
) -> Result<Member, EngineError> {
    if convexified && dim <= 2 && pieces.len() > 1 {
        let pts: Vec<DVector<f64>> = pieces.iter().flat_map(|p| p.vrep().unwrap_or(&[]).iter().cloned()).collect();
        return Ok(Member::convex(Polytope::from_points(dim, &pts)?));
    }
    Member::from_pieces(pieces, piece_budget)
}

/// `N_0`: per node, the union of the disturbance sets on incoming edges.
pub(crate) fn nominal_seeds(sys: &SwitchedSystem, piece_budget: usize) -> Result<Vec<Member>, EngineError> {
    let g = sys.graph();
    (0..sys.node_count())
        .map(|j| {
            let pieces = g.in_edges(j).map(|e| sys.mode(e.label).w.clone()).collect();
            Member::from_pieces(pieces, piece_budget)
        })
        .collect()
}

/// Per node, the intersection of the disturbance sets on incoming edges.
fn disturbance_cores(sys: &SwitchedSystem) -> Result<Vec<Polytope>, EngineError> {
    let g = sys.graph();
    (0..sys.node_count())
        .map(|j| {
            let mut it = g.in_edges(j);
            let first = it.next().ok_or_else(|| {
                EngineError::PreconditionViolated(format!("node {:?} has no incoming edge", g.name(j)))
            })?;
            let mut core = sys.mode(first.label).w.clone();
            for e in it {
                core = intersection(&core, &sys.mode(e.label).w)?;
            }
            if !core.is_cset(DEFAULT_ETA) {
                return Err(EngineError::CertificateUnavailable(format!(
                    "common incoming disturbance of node {:?} is not a C-set",
                    g.name(j)
                )));
            }
            Ok(core)
        })
        .collect()
}

/// `N_l`, or its convexified version.
pub fn nominal_sequence(sys: &SwitchedSystem, l: usize, convexified: bool) -> Result<MultiSet, EngineError> {
    let mut cur = nominal_seeds(sys, DEFAULT_PIECE_BUDGET)?;
    if convexified {
        cur = cur
            .into_iter()
            .map(|m| combine(sys.dim(), m.into_pieces(), true, DEFAULT_PIECE_BUDGET))
            .collect::<Result<_, _>>()?;
    }
    for _ in 0..l {
        cur = union_sweep(sys, &cur, true, convexified, DEFAULT_PIECE_BUDGET)?;
    }
    MultiSet::new(sys, SetKind::Nominal, l, cur)
}

/// Running forward sequence `F_0 = {0}`, `F_{l+1}^j = ∪ R(σ, F_l^s)`.
pub(crate) struct ForwardRun<'a> {
    sys: &'a SwitchedSystem,
    convexified: bool,
    piece_budget: usize,
    eta: f64,
    pub members: Vec<Member>,
    pub trace: SequenceTrace,
}

impl<'a> ForwardRun<'a> {
    pub fn new(sys: &'a SwitchedSystem, convexified: bool, piece_budget: usize, eta: f64) -> Self {
        ForwardRun {
            sys,
            convexified,
            piece_budget,
            eta,
            members: vec![Member::convex(Polytope::zero(sys.dim())); sys.node_count()],
            trace: SequenceTrace::new(),
        }
    }

    pub fn step(&mut self) -> Result<(), EngineError> {
        let next = union_sweep(self.sys, &self.members, false, self.convexified, self.piece_budget)?;
        let l = self.trace.iterations + 1;
        if !next.iter().zip(&self.members).all(|(n, p)| n.includes(p, self.eta)) {
            return Err(EngineError::NestingViolated { iteration: l });
        }
        let deltas = exec::map_indexed(next.len(), |j| {
            if self.sys.dim() <= 2 {
                self.members[j].hull_distance(&next[j]).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            }
        });
        self.trace.deltas.push(deltas);
        self.trace.iterations = l;
        self.members = next;
        Ok(())
    }

    pub fn outer_radius(&self) -> f64 {
        self.members.iter().map(Member::outer_radius).fold(0.0, f64::max)
    }
}

/// `F_l` with the per-iteration trace. Nesting `F_l ⊆ F_{l+1}` is checked at
/// every step.
pub fn forward_sequence(
    sys: &SwitchedSystem,
    l: usize,
    convexified: bool,
) -> Result<(MultiSet, SequenceTrace), EngineError> {
    let mut run = ForwardRun::new(sys, convexified, DEFAULT_PIECE_BUDGET, DEFAULT_ETA);
    for _ in 0..l {
        run.step()?;
    }
    let ms = MultiSet::new(sys, SetKind::Forward, l, run.members)?;
    Ok((ms, run.trace))
}

/// Smallest `l` with `αΓρ^l / (1−ρ) <= ε`.
pub fn inner_iteration_bound(epsilon: f64, alpha: f64, gamma: f64, rho: f64) -> usize {
    let arg = epsilon * (1.0 - rho) / (alpha * gamma);
    if arg >= 1.0 {
        return 0;
    }
    (arg.ln() / rho.ln()).ceil().max(0.0) as usize
}

/// ε-approximation of the minimal invariant multi-set.
///
/// The inner result `F_l` satisfies `F_l ⊆ S_m ⊆ F_l ⊕ B(ε)`; the outer result
/// is invariant, contains `S_m` and lies within `ε` of `F_k`.
pub fn min_invariant(
    sys: &SwitchedSystem,
    cfg: &ApproximationConfig,
    mode: MinimalMode,
) -> Result<(MultiSet, SequenceTrace), EngineError> {
    cfg.check()?;
    let kind = match mode {
        MinimalMode::Inner => SetKind::MinimalInner,
        MinimalMode::Outer => SetKind::MinimalOuter,
    };
    if sys.is_nominal() {
        let members = vec![Member::convex(Polytope::zero(sys.dim())); sys.node_count()];
        let mut trace = SequenceTrace::new();
        trace.termination = Termination::Fixpoint;
        return Ok((MultiSet::new(sys, kind, 0, members)?.with_epsilon(cfg.epsilon), trace));
    }
    sys.require_planar_or_nominal()?;
    match mode {
        MinimalMode::Inner => inner(sys, cfg),
        MinimalMode::Outer => outer(sys, cfg),
    }
}

fn inner(sys: &SwitchedSystem, cfg: &ApproximationConfig) -> Result<(MultiSet, SequenceTrace), EngineError> {
    let cert = match cfg.certificate {
        Some(c) => c,
        None => stability_certificate(sys, cfg.lambda0, cfg.budget)?,
    };
    let alpha = sys.modes().iter().map(|m| m.w.outer_radius()).fold(0.0, f64::max);
    let bound = inner_iteration_bound(cfg.epsilon / cfg.error_scale, alpha, cert.gamma, cert.rho);
    let l = bound.max(cfg.min_index);
    if l > cfg.budget {
        return Err(EngineError::BudgetExceeded { what: "inner approximation", budget: cfg.budget });
    }
    let mut run = ForwardRun::new(sys, cfg.convexified, cfg.piece_budget, cfg.eta);
    for _ in 0..l {
        run.step()?;
    }
    run.trace.termination = Termination::BoundReached;
    run.trace.a_priori_bound = Some(bound as f64);
    let ms = MultiSet::new(sys, SetKind::MinimalInner, l, run.members)?.with_epsilon(cfg.epsilon);
    Ok((ms, run.trace))
}

fn outer(sys: &SwitchedSystem, cfg: &ApproximationConfig) -> Result<(MultiSet, SequenceTrace), EngineError> {
    let cores = disturbance_cores(sys)?;
    let mut nominal = nominal_seeds(sys, cfg.piece_budget)?;
    let mut run = ForwardRun::new(sys, cfg.convexified, cfg.piece_budget, cfg.eta);
    let mut last_failure = None;
    for k in 1..=cfg.budget {
        nominal = union_sweep(sys, &nominal, true, true, cfg.piece_budget)?;
        run.step()?;
        if k < cfg.min_index.max(1) {
            continue;
        }
        let achieved = nominal.iter().zip(&cores).map(|(m, c)| ratio(m, c)).fold(0.0, f64::max);
        let lambda = match cfg.lambda {
            Some(target) if achieved <= target + cfg.eta => target,
            Some(_) => continue,
            None => achieved,
        };
        if lambda >= 1.0 || lambda / (1.0 - lambda) * cfg.error_scale * run.outer_radius() > cfg.epsilon {
            continue;
        }
        // Any λ above the achieved ratio keeps the inclusion. When rounding
        // defeats the check at the tight value, retry with the largest λ the
        // error bound allows before moving on to the next k.
        let room = cfg.epsilon / (cfg.error_scale * run.outer_radius());
        let widest = (room / (1.0 + room)).min(lambda.max(0.5));
        let mut tries = vec![lambda];
        if cfg.lambda.is_none() && widest > lambda {
            tries.push(widest);
        }
        for l in tries {
            match scaled_outer(sys, &run.members, k, l, cfg) {
                Ok(ms) => {
                    run.trace.termination = Termination::EpsilonReached;
                    return Ok((ms, run.trace));
                }
                Err(e @ EngineError::VerificationFailed { .. }) => last_failure = Some(e),
                Err(e) => return Err(e),
            }
        }
    }
    Err(last_failure.unwrap_or(EngineError::BudgetExceeded { what: "outer approximation", budget: cfg.budget }))
}

fn scaled_outer(
    sys: &SwitchedSystem,
    forward: &[Member],
    k: usize,
    lambda: f64,
    cfg: &ApproximationConfig,
) -> Result<MultiSet, EngineError> {
    let members = forward.iter().map(|m| m.scale(1.0 / (1.0 - lambda))).collect();
    let ms = MultiSet::new(sys, SetKind::MinimalOuter, k, members)?.with_epsilon(cfg.epsilon);
    let report = verify_invariance(sys, &ms, false, cfg.eta)?;
    if !report.invariant {
        return Err(EngineError::VerificationFailed { excess: report.worst_excess() });
    }
    Ok(ms)
}

/// Outer approximation for an explicit pair `(k, λ)`: requires
/// `N_k ⊆ λ·N_∩` and returns the verified `F_k / (1−λ)`.
pub fn outer_with(
    sys: &SwitchedSystem,
    k: usize,
    lambda: f64,
    cfg: &ApproximationConfig,
) -> Result<MultiSet, EngineError> {
    if k == 0 || !(lambda > 0.0 && lambda < 1.0) {
        return Err(EngineError::PreconditionViolated(format!("need k >= 1 and lambda in (0,1), got ({k}, {lambda})")));
    }
    if k < cfg.min_index {
        return Err(EngineError::PreconditionViolated(format!("k = {k} is below the minimum index {}", cfg.min_index)));
    }
    sys.require_planar_or_nominal()?;
    let cores = disturbance_cores(sys)?;
    let n_k = nominal_sequence(sys, k, true)?;
    if let Some(j) = (0..sys.node_count()).find(|&j| ratio(n_k.member(j), &cores[j]) > lambda + cfg.eta) {
        return Err(EngineError::PreconditionViolated(format!(
            "N_{k} is not inside {lambda}·N_∩ at node {:?}",
            sys.graph().name(j)
        )));
    }
    let mut run = ForwardRun::new(sys, cfg.convexified, cfg.piece_budget, cfg.eta);
    for _ in 0..k {
        run.step()?;
    }
    scaled_outer(sys, &run.members, k, lambda, cfg)
}
