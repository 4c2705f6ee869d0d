use nalgebra::DVector;

use crate::geometry::{hausdorff_distance, GeometryError, Polytope};

use super::EngineError;

/// Pieces dominated by another piece within this slack are dropped.
const PRUNE_TOL: f64 = 1e-11;

/// A member of a multi-set: a union of convex pieces, usually just one.
///
/// Intervals in dimension 1 are merged on construction, so a 1D member is a
/// list of disjoint intervals sorted from left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pieces: Vec<Polytope>,
}

impl From<Polytope> for Member {
    fn from(p: Polytope) -> Self {
        Member::convex(p)
    }
}

impl Member {
    pub fn convex(p: Polytope) -> Self {
        Member { pieces: vec![p] }
    }

    /// Union of the pieces with dominated ones removed.
    pub fn from_pieces(pieces: Vec<Polytope>, budget: usize) -> Result<Self, EngineError> {
        let dim = match pieces.first() {
            Some(p) => p.dim(),
            None => return Err(GeometryError::EmptySet.into()),
        };
        if pieces.iter().any(|p| p.dim() != dim) {
            return Err(EngineError::Mismatch("pieces of different dimensions".into()));
        }
        if pieces.len() == 1 {
            return Ok(Member { pieces });
        }
        let pieces = if dim == 1 { merge_intervals(&pieces)? } else { prune(pieces) };
        if pieces.len() > budget {
            return Err(EngineError::PieceBudgetExceeded(budget));
        }
        Ok(Member { pieces })
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn pieces(&self) -> &[Polytope] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Polytope> {
        self.pieces
    }

    pub fn is_convex(&self) -> bool {
        self.pieces.len() == 1
    }

    pub fn as_convex(&self) -> Option<&Polytope> {
        match self.pieces.as_slice() {
            [p] => Some(p),
            _ => None,
        }
    }

    /// Convex hull of the union.
    pub fn hull(&self) -> Result<Polytope, GeometryError> {
        if let Some(p) = self.as_convex() {
            return Ok(p.clone());
        }
        let mut pts = Vec::new();
        for p in &self.pieces {
            match p.vrep() {
                Some(v) => pts.extend(v.iter().cloned()),
                None => return Err(GeometryError::RepresentationUnavailable("vertex form of a union piece")),
            }
        }
        Polytope::from_points(self.dim(), &pts)
    }

    pub fn support(&self, d: &DVector<f64>) -> f64 {
        self.pieces.iter().map(|p| p.support(d)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.pieces.iter().any(|p| p.contains_point(x, tol))
    }

    /// Piecewise inclusion `inner ⊆ self`: each piece of `inner` must fit in
    /// one piece of `self`. Exact when `self` is convex or one-dimensional.
    pub fn includes(&self, inner: &Member, eta: f64) -> bool {
        inner.pieces.iter().all(|q| self.pieces.iter().any(|p| p.includes(q, eta)))
    }

    /// `inner ⊆ self` for a single convex set.
    pub fn includes_polytope(&self, inner: &Polytope, eta: f64) -> bool {
        self.pieces.iter().any(|p| p.includes(inner, eta))
    }

    pub fn outer_radius(&self) -> f64 {
        self.pieces.iter().map(Polytope::outer_radius).fold(0.0, f64::max)
    }

    pub fn scale(&self, lambda: f64) -> Member {
        Member { pieces: self.pieces.iter().map(|p| p.scale(lambda)).collect() }
    }

    /// Hausdorff distance between the hulls; `None` where vertices are unavailable.
    pub fn hull_distance(&self, other: &Member) -> Option<f64> {
        let a = self.hull().ok()?;
        let b = other.hull().ok()?;
        a.vrep()?;
        b.vrep()?;
        hausdorff_distance(&a, &b).ok()
    }

    /// Whether the union has nonempty interior.
    pub fn is_full_dimensional(&self) -> bool {
        self.pieces.iter().any(Polytope::is_full_dimensional)
    }
}

fn prune(pieces: Vec<Polytope>) -> Vec<Polytope> {
    let mut keep = vec![true; pieces.len()];
    for i in 0..pieces.len() {
        for j in 0..pieces.len() {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            // Among mutually equal pieces the earliest one survives.
            if pieces[j].includes(&pieces[i], PRUNE_TOL) && (j < i || !pieces[i].includes(&pieces[j], PRUNE_TOL)) {
                keep[i] = false;
            }
        }
    }
    pieces.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

fn merge_intervals(pieces: &[Polytope]) -> Result<Vec<Polytope>, GeometryError> {
    let one = DVector::from_element(1, 1.0);
    let mut spans: Vec<(f64, f64)> = pieces.iter().map(|p| (-p.support(&-&one), p.support(&one))).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + PRUNE_TOL * last.1.abs().max(1.0) => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
        .into_iter()
        .map(|(lo, hi)| Polytope::from_points(1, &[DVector::from_element(1, lo), DVector::from_element(1, hi)]))
        .collect()
}
