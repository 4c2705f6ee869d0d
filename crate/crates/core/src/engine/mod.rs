//! Invariant multi-set computations.
//!
//! Forward sequences grow from the origin towards the minimal invariant
//! multi-set, backward sequences shrink from the constraints towards the
//! maximal one. The reduction and lift helpers move results between a
//! system and its reduced or lifted counterparts.

mod certificate;
mod fast;
mod json;
mod lift;
mod maximal;
mod member;
mod minimal;
mod reduction;
mod verify;

pub use certificate::{
    stability_certificate, stability_certificate_seeded, verify_certificate, CertificateMethod, CertificateSeed,
    StabilityCertificate,
};
pub use fast::{linear_fast_max, FastReport};
pub use json::MultiSetJson;
pub use lift::{recover_from_plift, recover_from_tlift};
pub use maximal::{max_invariant, maximal_iteration_bound, safe_set, MaxConfig};
pub use member::Member;
pub use minimal::{
    forward_sequence, inner_iteration_bound, min_invariant, nominal_sequence, outer_with, ApproximationConfig,
    MinimalMode,
};
pub use reduction::{
    dwell_closed_form_max, expand_from_reduced, max_from_reduced, min_invariant_reduced, ExpandMode, ReducedMaximal,
};
pub use verify::{verify_invariance, EdgeViolation, InvarianceReport};

use thiserror::Error;

use crate::automaton::GraphError;
use crate::geometry::GeometryError;
use crate::system::{system_hash, SwitchedSystem, SystemError};

/// Hard cap on any iteration budget.
pub const MAX_BUDGET: usize = 100_000;

/// Default cap on the number of convex pieces a union member may hold.
pub const DEFAULT_PIECE_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{what} did not finish within {budget} iterations")]
    BudgetExceeded { what: &'static str, budget: usize },
    #[error("a union member exceeded {0} convex pieces")]
    PieceBudgetExceeded(usize),
    #[error("no stability certificate: {0}")]
    CertificateUnavailable(String),
    #[error("result failed the invariance check (worst excess {excess:.3e})")]
    VerificationFailed { excess: f64 },
    #[error("admissible set of node {node:?} is empty")]
    EmptySet { node: String },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("lifted maximal members of node {node:?} disagree")]
    InconsistentLift { node: String },
    #[error("graph is not a {0} dwell-time graph")]
    KindMismatch(&'static str),
    #[error("set sequence lost its nesting at iteration {iteration}")]
    NestingViolated { iteration: usize },
    #[error("multi-set does not match the system: {0}")]
    Mismatch(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which quantity a multi-set holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetKind {
    Forward,
    Nominal,
    Backward,
    OuterCandidate,
    MinimalInner,
    MinimalOuter,
    Minimal,
    Maximal,
    Custom,
}

impl SetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::Forward => "F_l",
            SetKind::Nominal => "N_l",
            SetKind::Backward => "B_l",
            SetKind::OuterCandidate => "D_k",
            SetKind::MinimalInner => "S_m_inner",
            SetKind::MinimalOuter => "S_m_outer",
            SetKind::Minimal => "S_m",
            SetKind::Maximal => "S_M",
            SetKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<SetKind> {
        [
            SetKind::Forward,
            SetKind::Nominal,
            SetKind::Backward,
            SetKind::OuterCandidate,
            SetKind::MinimalInner,
            SetKind::MinimalOuter,
            SetKind::Minimal,
            SetKind::Maximal,
            SetKind::Custom,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }

    pub fn is_minimal(self) -> bool {
        matches!(self, SetKind::Forward | SetKind::MinimalInner | SetKind::MinimalOuter | SetKind::Minimal)
    }
}

/// One member per graph node plus what the members represent.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSet {
    pub system: String,
    pub kind: SetKind,
    pub iteration: usize,
    pub epsilon: Option<f64>,
    pub members: Vec<Member>,
}

impl MultiSet {
    pub fn new(
        sys: &SwitchedSystem,
        kind: SetKind,
        iteration: usize,
        members: Vec<Member>,
    ) -> Result<Self, EngineError> {
        if members.len() != sys.node_count() {
            return Err(EngineError::Mismatch(format!("{} members for {} nodes", members.len(), sys.node_count())));
        }
        if let Some(m) = members.iter().find(|m| m.dim() != sys.dim()) {
            return Err(EngineError::Mismatch(format!(
                "member of dimension {} in a {}-dimensional system",
                m.dim(),
                sys.dim()
            )));
        }
        Ok(MultiSet { system: system_hash(sys), kind, iteration, epsilon: None, members })
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn member(&self, node: usize) -> &Member {
        &self.members[node]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members.first().map(Member::dim).unwrap_or(0)
    }

    /// Per-node mutual inclusion within `eta`.
    pub fn approx_eq(&self, other: &MultiSet, eta: f64) -> bool {
        self.members.len() == other.members.len()
            && self.members.iter().zip(&other.members).all(|(a, b)| a.includes(b, eta) && b.includes(a, eta))
    }

    /// Per-node inclusion `other ⊆ self` within `eta`.
    pub fn includes(&self, other: &MultiSet, eta: f64) -> bool {
        self.members.len() == other.members.len()
            && self.members.iter().zip(&other.members).all(|(a, b)| a.includes(b, eta))
    }
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Fixpoint,
    BoundReached,
    EpsilonReached,
    Budget,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Fixpoint => "fixpoint",
            Termination::BoundReached => "bound-reached",
            Termination::EpsilonReached => "epsilon-reached",
            Termination::Budget => "budget",
        }
    }
}

/// Per-iteration record of a set sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTrace {
    /// `deltas[l][j]` is the Hausdorff distance between consecutive members
    /// of node `j`; NaN where the distance needs vertices that are unavailable.
    pub deltas: Vec<Vec<f64>>,
    pub termination: Termination,
    pub iterations: usize,
    pub a_priori_bound: Option<f64>,
}

impl SequenceTrace {
    fn new() -> Self {
        SequenceTrace {
            deltas: Vec::new(),
            termination: Termination::BoundReached,
            iterations: 0,
            a_priori_bound: None,
        }
    }

    /// Largest finite delta of the last recorded iteration.
    pub fn last_delta(&self) -> Option<f64> {
        self.deltas.last().map(|d| d.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub use crate::system::fixtures::*;
}
