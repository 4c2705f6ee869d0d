use nalgebra::DVector;

use super::lp::{self, LpError, LP_TOL};
use super::planar::{self, P2};
use super::{check_dim, GeometryError, HalfSpace};
use crate::exec;

/// Bounded nonempty convex polytope.
///
/// Sets built through the constructors are canonical: rows have unit
/// normals and none is redundant, vertices are extreme points. In dimension
/// 1 and 2 both representations are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    hrep: Option<Vec<HalfSpace>>,
    vrep: Option<Vec<DVector<f64>>>,
}

/// Ball radii of a set, measured in the infinity norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiiReport {
    /// Largest `r` with `B(r)` inside the set.
    pub inner_radius: f64,
    /// Smallest `r` with the set inside `B(r)`.
    pub outer_radius: f64,
    pub norm: &'static str,
}

/// Normalizes, deduplicates and removes redundant rows.
///
/// The input may describe an unbounded polyhedron; only emptiness is an error.
pub fn canonical_rows(dim: usize, rows: &[HalfSpace]) -> Result<Vec<HalfSpace>, GeometryError> {
    let mut unit: Vec<HalfSpace> = Vec::with_capacity(rows.len());
    for r in rows {
        check_dim(dim, r.dim())?;
        let norm = r.normal.norm();
        if !norm.is_finite() || !r.offset.is_finite() {
            return Err(GeometryError::Invalid("non-finite row".into()));
        }
        if norm < 1e-14 {
            if r.offset < -LP_TOL {
                return Err(GeometryError::EmptySet);
            }
            continue;
        }
        let normal = &r.normal / norm;
        let offset = r.offset / norm;
        match unit.iter_mut().find(|k| (&k.normal - &normal).amax() <= 1e-12) {
            Some(k) => k.offset = k.offset.min(offset),
            None => unit.push(HalfSpace::new(normal, offset)),
        }
    }
    if !lp::feasible(dim, &unit)? {
        return Err(GeometryError::EmptySet);
    }
    if dim == 1 {
        return Ok(tightest_interval_rows(&unit));
    }
    let flagged = exec::map_indexed(unit.len(), |i| is_redundant(&unit, i, |j| j != i));
    let flagged: Vec<bool> = flagged.into_iter().collect::<Result<_, _>>()?;
    let mut keep = vec![true; unit.len()];
    for i in 0..unit.len() {
        if flagged[i] && is_redundant(&unit, i, |j| j != i && keep[j])? {
            keep[i] = false;
        }
    }
    Ok(unit.into_iter().zip(keep).filter_map(|(r, k)| k.then_some(r)).collect())
}

fn tightest_interval_rows(unit: &[HalfSpace]) -> Vec<HalfSpace> {
    let mut out = Vec::new();
    if let Some(up) = unit.iter().filter(|r| r.normal[0] > 0.0).min_by(|a, b| a.offset.total_cmp(&b.offset)) {
        out.push(up.clone());
    }
    if let Some(down) = unit.iter().filter(|r| r.normal[0] < 0.0).min_by(|a, b| a.offset.total_cmp(&b.offset)) {
        out.push(down.clone());
    }
    out
}

fn is_redundant(rows: &[HalfSpace], i: usize, others: impl Fn(usize) -> bool) -> Result<bool, GeometryError> {
    let target = &rows[i];
    let relaxed = target.offset + 1.0;
    let sub = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| others(*j))
        .map(|(_, r)| (&r.normal, r.offset))
        .chain(std::iter::once((&target.normal, relaxed)));
    let sol = lp::maximize_iter(&target.normal, sub)?;
    Ok(sol.value <= target.offset + LP_TOL * target.offset.abs().max(1.0))
}

fn to_p2(v: &DVector<f64>) -> P2 {
    [v[0], v[1]]
}

fn from_p2(p: P2) -> DVector<f64> {
    DVector::from_row_slice(&p)
}

impl Polytope {
    /// Builds a polytope from half-spaces, rejecting empty or unbounded input.
    pub fn from_hrep(dim: usize, rows: Vec<HalfSpace>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::Invalid("dimension must be positive".into()));
        }
        let rows = canonical_rows(dim, &rows)?;
        Self::from_canonical_rows(dim, rows)
    }

    pub(crate) fn from_canonical_rows(dim: usize, rows: Vec<HalfSpace>) -> Result<Self, GeometryError> {
        match dim {
            1 => {
                let (lo, hi) = planar::interval_from_rows(&rows);
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(GeometryError::Unbounded);
                }
                Ok(Self::interval_unchecked(lo, hi.max(lo)))
            }
            2 => {
                check_bounded(dim, &rows)?;
                let verts = planar::vertices_from_rows_2d(&rows);
                if verts.is_empty() {
                    return Err(GeometryError::EmptySet);
                }
                let vrep = verts.into_iter().map(from_p2).collect();
                Ok(Self { dim, hrep: Some(rows), vrep: Some(vrep) })
            }
            _ => {
                check_bounded(dim, &rows)?;
                Ok(Self { dim, hrep: Some(rows), vrep: None })
            }
        }
    }

    /// Convex hull of the points; flat results (points, segments) are kept.
    pub fn from_points(dim: usize, points: &[DVector<f64>]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        for p in points {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::Invalid("non-finite vertex".into()));
            }
        }
        match dim {
            0 => Err(GeometryError::Invalid("dimension must be positive".into())),
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                Ok(Self::interval_unchecked(lo, hi))
            }
            2 => {
                let pts: Vec<P2> = points.iter().map(to_p2).collect();
                let verts = planar::hull_2d(&pts);
                let rows = planar::rows_from_vertices_2d(&verts);
                Ok(Self { dim, hrep: Some(rows), vrep: Some(verts.into_iter().map(from_p2).collect()) })
            }
            _ => Ok(Self { dim, hrep: None, vrep: Some(extreme_points(points)?) }),
        }
    }

    fn interval_unchecked(lo: f64, hi: f64) -> Self {
        let same = (hi - lo).abs() <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300);
        let vrep = if same {
            vec![DVector::from_element(1, lo)]
        } else {
            vec![DVector::from_element(1, lo), DVector::from_element(1, hi)]
        };
        Self {
            dim: 1,
            hrep: Some(vec![HalfSpace::from_slice(&[1.0], hi), HalfSpace::from_slice(&[-1.0], -lo)]),
            vrep: Some(vrep),
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(GeometryError::Unbounded);
        }
        if lo > hi {
            return Err(GeometryError::EmptySet);
        }
        Ok(Self::interval_unchecked(lo, hi))
    }

    /// Infinity-norm ball `B(alpha)`.
    pub fn ball(dim: usize, alpha: f64) -> Self {
        Self::symmetric_box(&vec![alpha; dim])
    }

    /// `{x : |x_i| <= half_widths[i]}`.
    pub fn symmetric_box(half_widths: &[f64]) -> Self {
        let dim = half_widths.len();
        let mut rows = Vec::with_capacity(2 * dim);
        for (i, &w) in half_widths.iter().enumerate() {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            rows.push(HalfSpace::new(e.clone(), w));
            rows.push(HalfSpace::new(-e, w));
        }
        let vrep = match dim {
            1 => Some(vec![DVector::from_element(1, -half_widths[0]), DVector::from_element(1, half_widths[0])]),
            2 => {
                let (a, b) = (half_widths[0], half_widths[1]);
                Some(vec![
                    DVector::from_row_slice(&[-a, -b]),
                    DVector::from_row_slice(&[a, -b]),
                    DVector::from_row_slice(&[a, b]),
                    DVector::from_row_slice(&[-a, b]),
                ])
            }
            _ => None,
        };
        Self { dim, hrep: Some(rows), vrep }
    }

    /// The singleton `{0}`.
    pub fn zero(dim: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            rows.push(HalfSpace::new(e.clone(), 0.0));
            rows.push(HalfSpace::new(-e, 0.0));
        }
        Self { dim, hrep: Some(rows), vrep: Some(vec![DVector::zeros(dim)]) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hrep(&self) -> Option<&[HalfSpace]> {
        self.hrep.as_deref()
    }

    pub fn vrep(&self) -> Option<&[DVector<f64>]> {
        self.vrep.as_deref()
    }

    pub(crate) fn rows(&self) -> Result<&[HalfSpace], GeometryError> {
        self.hrep.as_deref().ok_or(GeometryError::RepresentationUnavailable("half-space form"))
    }

    /// Vertices, including those of axis-aligned boxes in any dimension.
    pub(crate) fn vertices_any(&self) -> Result<Vec<DVector<f64>>, GeometryError> {
        if let Some(v) = &self.vrep {
            return Ok(v.clone());
        }
        let rows = self.rows()?;
        let mut lo = vec![f64::NEG_INFINITY; self.dim];
        let mut hi = vec![f64::INFINITY; self.dim];
        for r in rows {
            let nz: Vec<usize> = (0..self.dim).filter(|&i| r.normal[i] != 0.0).collect();
            if nz.len() != 1 {
                return Err(GeometryError::RepresentationUnavailable("vertices of a non-box set"));
            }
            let i = nz[0];
            let a = r.normal[i];
            if a > 0.0 {
                hi[i] = hi[i].min(r.offset / a);
            } else {
                lo[i] = lo[i].max(r.offset / a);
            }
        }
        if self.dim > 16 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let mut out = Vec::with_capacity(1 << self.dim);
        for mask in 0..(1usize << self.dim) {
            out.push(DVector::from_iterator(
                self.dim,
                (0..self.dim).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }),
            ));
        }
        Ok(out)
    }

    /// Vertices of a planar set in counterclockwise order, starting from the
    /// lowest-leftmost one.
    pub fn polygon(&self) -> Result<Vec<[f64; 2]>, GeometryError> {
        if self.dim != 2 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let pts: Vec<P2> = self.vertices_any()?.iter().map(|v| [v[0], v[1]]).collect();
        Ok(planar::hull_2d(&pts))
    }

    /// Support function `max d·x`.
    ///
    /// Returns `+inf` or `-inf` only if the LP fails, which canonical sets rule out.
    pub fn support(&self, d: &DVector<f64>) -> f64 {
        if let Some(v) = &self.vrep {
            return v.iter().map(|p| p.dot(d)).fold(f64::NEG_INFINITY, f64::max);
        }
        match lp::maximize(d, self.hrep.as_deref().unwrap_or(&[])) {
            Ok(sol) => sol.value,
            Err(LpError::Infeasible) => f64::NEG_INFINITY,
            Err(_) => f64::INFINITY,
        }
    }

    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        if let Some(rows) = &self.hrep {
            return rows.iter().all(|r| r.contains(x, tol));
        }
        self.vrep.as_deref().map(|v| in_hull(v, x, tol).unwrap_or(false)).unwrap_or(false)
    }

    /// True when every row of `self` is satisfied by all of `inner` within `eta`.
    pub fn includes(&self, inner: &Polytope, eta: f64) -> bool {
        if self.dim != inner.dim {
            return false;
        }
        match &self.hrep {
            Some(rows) => rows.iter().all(|r| inner.support(&r.normal) <= r.offset + eta),
            None => match inner.vertices_any() {
                Ok(v) => v.iter().all(|p| self.contains_point(p, eta)),
                Err(_) => false,
            },
        }
    }

    /// Mutual inclusion within `eta`.
    pub fn approx_eq(&self, other: &Polytope, eta: f64) -> bool {
        self.includes(other, eta) && other.includes(self, eta)
    }

    pub fn scale(&self, lambda: f64) -> Polytope {
        Polytope {
            dim: self.dim,
            hrep: self
                .hrep
                .as_ref()
                .map(|rows| rows.iter().map(|r| HalfSpace::new(r.normal.clone(), r.offset * lambda)).collect()),
            vrep: self.vrep.as_ref().map(|v| v.iter().map(|p| p * lambda).collect()),
        }
    }

    /// Origin strictly interior: every row offset exceeds `eta`.
    pub fn is_cset(&self, eta: f64) -> bool {
        match &self.hrep {
            Some(rows) => !rows.is_empty() && rows.iter().all(|r| r.offset > eta),
            None => false,
        }
    }

    pub fn radii(&self, center_origin: bool) -> Result<RadiiReport, GeometryError> {
        if center_origin && !self.is_cset(0.0) {
            return Err(GeometryError::NotCSet);
        }
        let rows = self.rows()?;
        let inner = rows.iter().map(|r| r.offset / r.normal.lp_norm(1)).fold(f64::INFINITY, f64::min).max(0.0);
        let mut outer: f64 = 0.0;
        for i in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[i] = 1.0;
            outer = outer.max(self.support(&e)).max(self.support(&-e));
        }
        if let Some(v) = &self.vrep {
            outer = v.iter().map(|p| p.amax()).fold(0.0, f64::max);
        }
        Ok(RadiiReport { inner_radius: inner, outer_radius: outer, norm: "inf" })
    }

    /// Smallest `r` such that the set lies in `B(r)`.
    pub fn outer_radius(&self) -> f64 {
        if let Some(v) = &self.vrep {
            return v.iter().map(|p| p.amax()).fold(0.0, f64::max);
        }
        (0..self.dim)
            .map(|i| {
                let mut e = DVector::zeros(self.dim);
                e[i] = 1.0;
                self.support(&e).max(self.support(&-e))
            })
            .fold(0.0, f64::max)
    }

    /// Radius of the largest Euclidean ball inside the set; zero for flat sets.
    pub fn chebyshev_radius(&self) -> Result<f64, GeometryError> {
        let rows = self.rows()?;
        let n = self.dim;
        let lifted: Vec<HalfSpace> = rows
            .iter()
            .map(|r| {
                let mut a = DVector::zeros(n + 1);
                a.rows_mut(0, n).copy_from(&r.normal);
                a[n] = r.normal.norm();
                HalfSpace::new(a, r.offset)
            })
            .collect();
        let mut c = DVector::zeros(n + 1);
        c[n] = 1.0;
        let mut rows_t = lifted;
        let mut cap = DVector::zeros(n + 1);
        cap[n] = 1.0;
        rows_t.push(HalfSpace::new(cap, 1e12));
        let sol = lp::maximize(&c, &rows_t)?;
        Ok(sol.value.max(0.0))
    }

    /// Whether the set has nonempty interior, relative to its own size.
    pub fn is_full_dimensional(&self) -> bool {
        if let Some(v) = &self.vrep {
            if self.dim <= 2 {
                return v.len() > self.dim;
            }
        }
        let scale = self.outer_radius().max(1e-300);
        self.chebyshev_radius().map(|r| r > 1e-9 * scale).unwrap_or(false)
    }

    /// Recomputes the canonical form from the stored data.
    pub fn canonicalize(&self) -> Result<Polytope, GeometryError> {
        match (&self.hrep, &self.vrep) {
            (Some(rows), _) => {
                let mut p = Polytope::from_hrep(self.dim, rows.clone())?;
                if self.dim > 2 && p.vrep.is_none() {
                    if let Some(v) = &self.vrep {
                        p.vrep = Some(extreme_points(v)?);
                    }
                }
                Ok(p)
            }
            (None, Some(v)) => Polytope::from_points(self.dim, v),
            (None, None) => Err(GeometryError::Invalid("no representation".into())),
        }
    }

    /// Builds from raw parts without canonicalizing; used by the JSON reader
    /// and tests that exercise `canonicalize` itself.
    pub fn from_raw_parts(
        dim: usize,
        hrep: Option<Vec<HalfSpace>>,
        vrep: Option<Vec<DVector<f64>>>,
    ) -> Result<Self, GeometryError> {
        if hrep.is_none() && vrep.is_none() {
            return Err(GeometryError::Invalid("no representation".into()));
        }
        Ok(Self { dim, hrep, vrep })
    }

    /// Stores a vertex list next to the half-spaces of a set in dimension 3+.
    pub(crate) fn with_vertices(mut self, v: Vec<DVector<f64>>) -> Self {
        if self.vrep.is_none() {
            self.vrep = Some(v);
        }
        self
    }
}

fn check_bounded(dim: usize, rows: &[HalfSpace]) -> Result<(), GeometryError> {
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[i] = s;
            match lp::maximize(&e, rows) {
                Ok(_) => {}
                Err(LpError::Unbounded) => return Err(GeometryError::Unbounded),
                Err(LpError::Infeasible) => return Err(GeometryError::EmptySet),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

/// Membership of `x` in the hull of `points`, by an LP over convex weights.
pub(crate) fn in_hull(points: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
    let k = points.len();
    let n = x.len();
    let mut rows = Vec::with_capacity(k + 2 + 2 * n);
    for i in 0..k {
        let mut a = DVector::zeros(k);
        a[i] = -1.0;
        rows.push(HalfSpace::new(a, 0.0));
    }
    rows.push(HalfSpace::new(DVector::from_element(k, 1.0), 1.0));
    rows.push(HalfSpace::new(DVector::from_element(k, -1.0), -1.0));
    for d in 0..n {
        let a = DVector::from_iterator(k, points.iter().map(|p| p[d]));
        rows.push(HalfSpace::new(a.clone(), x[d] + tol));
        rows.push(HalfSpace::new(-a, -x[d] + tol));
    }
    Ok(lp::feasible(k, &rows)?)
}

fn extreme_points(points: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, GeometryError> {
    let mut uniq: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !uniq.iter().any(|q| (q - p).amax() <= 1e-12) {
            uniq.push(p.clone());
        }
    }
    let mut keep = vec![true; uniq.len()];
    for i in 0..uniq.len() {
        let others: Vec<DVector<f64>> =
            uniq.iter().enumerate().filter(|(j, _)| *j != i && keep[*j]).map(|(_, q)| q.clone()).collect();
        if !others.is_empty() && in_hull(&others, &uniq[i], 1e-12)? {
            keep[i] = false;
        }
    }
    Ok(uniq.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect())
}
