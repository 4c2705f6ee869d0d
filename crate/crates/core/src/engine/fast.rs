use nalgebra::DMatrix;

use crate::automaton::{Edge, LabeledGraph};
use crate::geometry::Polytope;
use crate::system::{build_tlift_system, Mode, SwitchedSystem};

use super::certificate::StabilityCertificate;
use super::lift::recover_from_tlift;
use super::maximal::{max_invariant, MaxConfig};
use super::EngineError;

/// Iteration accounting of [`linear_fast_max`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastReport {
    /// A-priori bound on the direct backward iteration.
    pub k_bound: usize,
    pub t: usize,
    /// Predicted basic iterations `⌈2√k − 1⌉`.
    pub predicted: usize,
    pub lifted_iterations: usize,
    pub recovery_iterations: usize,
    pub total: usize,
}

/// `⌈log_ρ(R / (Γ c))⌉`, zero when the ratio is at least one.
pub(crate) fn direct_bound(cert: &StabilityCertificate, inner: f64, outer: f64) -> usize {
    let arg = inner / (cert.gamma * outer);
    if arg >= 1.0 {
        0
    } else {
        (arg.ln() / cert.rho.ln()).ceil() as usize
    }
}

/// Maximal invariant set of `x(t+1) = A x(t)` inside `X`, computed on the
/// `T`-product lift with `T = ⌈√k⌉` and mapped back with `T − 1` backward
/// steps. `t_override` replaces the chosen `T`.
pub fn linear_fast_max(
    a: &DMatrix<f64>,
    x: &Polytope,
    cert: &StabilityCertificate,
    t_override: Option<usize>,
    eta: f64,
) -> Result<(Polytope, FastReport), EngineError> {
    if !(cert.rho > 0.0 && cert.rho < 1.0 && cert.gamma >= 1.0) {
        return Err(EngineError::CertificateUnavailable(format!(
            "need gamma >= 1 and 0 < rho < 1, got ({}, {})",
            cert.gamma, cert.rho
        )));
    }
    if !x.is_cset(0.0) {
        return Err(EngineError::PreconditionViolated("constraint set is not a C-set".into()));
    }
    let radii = x.radii(true)?;
    let k = direct_bound(cert, radii.inner_radius, radii.outer_radius);
    let t = t_override.unwrap_or_else(|| ((k as f64).sqrt().ceil() as usize).max(1));
    if t == 0 {
        return Err(EngineError::PreconditionViolated("lift parameter must be at least 1".into()));
    }
    let predicted = (2.0 * (k as f64).sqrt() - 1.0).ceil().max(0.0) as usize;

    let graph = LabeledGraph::numbered(1, 1, vec![Edge::new(0, 0, 1)])?;
    let sys = SwitchedSystem::new(x.dim(), vec![Mode::nominal(a.clone())], graph, Some(vec![x.clone()]))?;
    let (lifted, _) = build_tlift_system(&sys, t)?;
    let (lifted_max, trace) = max_invariant(&lifted, &MaxConfig::with_eta(eta))?;
    let (_, recovered) = recover_from_tlift(&sys, t, None, Some(&lifted_max))?;
    let set = recovered.expect("maximal recovery requested").members.remove(0).into_pieces().remove(0);
    let report = FastReport {
        k_bound: k,
        t,
        predicted,
        lifted_iterations: trace.iterations,
        recovery_iterations: t - 1,
        total: trace.iterations + t - 1,
    };
    Ok((set, report))
}
