//! The constrained switching system `x(t+1) = A_σ x(t) + w(t)`, `w ∈ W_σ`,
//! with `σ` following the labels of a walk in a graph and `x(t) ∈ X_z(t)`.

mod json;
mod maps;
mod transform;

pub use json::{system_hash, ModeJson, SystemJson};
pub use maps::{backward_map, backward_rows, forward_map, step_backward_rows, step_forward, MapVariant};
pub use transform::{build_plift_system, build_reduced_system, build_tlift_system, growth_bound, GrowthBound};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::automaton::{GraphError, GraphReport, LabeledGraph};
use crate::geometry::{GeometryError, Polytope, DEFAULT_ETA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("mode {mode}: matrix is {rows}x{cols}, expected {dim}x{dim}")]
    MatrixShape { mode: usize, rows: usize, cols: usize, dim: usize },
    #[error("{what} has dimension {found}, expected {expected}")]
    SetDimension { what: String, expected: usize, found: usize },
    #[error("system has {modes} modes but the graph uses {graph}")]
    ModeCount { modes: usize, graph: usize },
    #[error("system has {sets} constraint sets for {nodes} nodes")]
    ConstraintCount { sets: usize, nodes: usize },
    #[error("constraint sets are required for this computation")]
    MissingConstraints,
    #[error("label sequence {0:?} is not realized by any walk")]
    InadmissibleSequence(Vec<usize>),
    #[error("operation needs dimension at most 2 unless the system is nominal (dimension {0})")]
    UnsupportedDimension(usize),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One switching mode: matrix and disturbance set.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub a: DMatrix<f64>,
    pub w: Polytope,
}

impl Mode {
    pub fn new(a: DMatrix<f64>, w: Polytope) -> Self {
        Self { a, w }
    }

    /// Mode without disturbance.
    pub fn nominal(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self { a, w: Polytope::zero(n) }
    }

    pub fn is_nominal(&self) -> bool {
        self.w.vrep().is_some_and(|v| v.len() == 1 && v[0].amax() == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem {
    dim: usize,
    modes: Vec<Mode>,
    graph: LabeledGraph,
    constraints: Option<Vec<Polytope>>,
}

/// Outcome of [`SwitchedSystem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport {
    pub graph: GraphReport,
    /// Human-readable descriptions of every failed check.
    pub issues: Vec<String>,
    pub nominal: bool,
}

impl SystemReport {
    pub fn passes(&self) -> bool {
        self.issues.is_empty()
    }
}

impl SwitchedSystem {
    /// Checks shapes and counts; set-level assumptions are left to [`validate`](Self::validate).
    pub fn new(
        dim: usize,
        modes: Vec<Mode>,
        graph: LabeledGraph,
        constraints: Option<Vec<Polytope>>,
    ) -> Result<Self, SystemError> {
        if dim == 0 {
            return Err(SystemError::Invalid("dimension must be positive".into()));
        }
        if modes.len() != graph.mode_count() {
            return Err(SystemError::ModeCount { modes: modes.len(), graph: graph.mode_count() });
        }
        for (i, m) in modes.iter().enumerate() {
            if m.a.nrows() != dim || m.a.ncols() != dim {
                return Err(SystemError::MatrixShape { mode: i + 1, rows: m.a.nrows(), cols: m.a.ncols(), dim });
            }
            if m.w.dim() != dim {
                return Err(SystemError::SetDimension {
                    what: format!("W_{}", i + 1),
                    expected: dim,
                    found: m.w.dim(),
                });
            }
        }
        if let Some(xs) = &constraints {
            if xs.len() != graph.node_count() {
                return Err(SystemError::ConstraintCount { sets: xs.len(), nodes: graph.node_count() });
            }
            for (j, x) in xs.iter().enumerate() {
                if x.dim() != dim {
                    return Err(SystemError::SetDimension {
                        what: format!("X_{}", graph.name(j)),
                        expected: dim,
                        found: x.dim(),
                    });
                }
            }
        }
        Ok(Self { dim, modes, graph, constraints })
    }

    /// Same matrices and disturbances with a common constraint set at every node.
    pub fn with_common_constraint(self, x: Polytope) -> Result<Self, SystemError> {
        let xs = vec![x; self.graph.node_count()];
        Self::new(self.dim, self.modes, self.graph, Some(xs))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Mode for a 1-based label.
    pub fn mode(&self, label: usize) -> &Mode {
        &self.modes[label - 1]
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn constraints(&self) -> Option<&[Polytope]> {
        self.constraints.as_deref()
    }

    pub fn constraint(&self, node: usize) -> Result<&Polytope, SystemError> {
        self.constraints.as_ref().map(|xs| &xs[node]).ok_or(SystemError::MissingConstraints)
    }

    pub fn is_nominal(&self) -> bool {
        self.modes.iter().all(Mode::is_nominal)
    }

    /// Errors unless Minkowski sums are avoidable or exact.
    pub(crate) fn require_planar_or_nominal(&self) -> Result<(), SystemError> {
        if self.dim > 2 && !self.is_nominal() {
            Err(SystemError::UnsupportedDimension(self.dim))
        } else {
            Ok(())
        }
    }

    /// Checks that disturbance and constraint sets contain the origin in
    /// their interior and that the graph is strongly connected.
    pub fn validate(&self) -> SystemReport {
        let mut issues = Vec::new();
        for (i, m) in self.modes.iter().enumerate() {
            if !m.is_nominal() && !m.w.is_cset(DEFAULT_ETA) {
                issues.push(format!(
                    "disturbance set W_{} is not a C-set: the origin must lie strictly inside it",
                    i + 1
                ));
            }
        }
        if let Some(xs) = &self.constraints {
            for (j, x) in xs.iter().enumerate() {
                if !x.is_cset(DEFAULT_ETA) {
                    issues.push(format!(
                        "constraint set X_{} is not a C-set: the origin must lie strictly inside it",
                        self.graph.name(j)
                    ));
                }
            }
        }
        let graph = self.graph.validate();
        if !graph.strongly_connected {
            issues.push("switching graph is not strongly connected".into());
        }
        for &j in &graph.dangling {
            issues.push(format!("node {} lacks an incoming or outgoing edge", self.graph.name(j)));
        }
        SystemReport { graph, issues, nominal: self.is_nominal() }
    }

    /// Applies label `label` to state `x` with disturbance `w`.
    pub fn step_state(&self, label: usize, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        &self.mode(label).a * x + w
    }
}
