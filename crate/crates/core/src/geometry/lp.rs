//! Dense simplex for the small LPs behind support queries, redundancy
//! removal and inclusion tests.
//!
//! The primal `max c·x s.t. a_j·x <= b_j` has few variables and many rows,
//! so the solver works on the dual `min b·y s.t. Aᵀy = c, y >= 0`, whose
//! tableau has one row per primal variable. The primal optimizer is read off
//! the reduced costs of the artificial columns. Pivoting follows Bland's rule.

use nalgebra::DVector;
use thiserror::Error;

use super::HalfSpace;

/// Feasibility tolerance used by the solver.
pub const LP_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("objective has {objective} entries but rows have {rows}")]
    DimensionMismatch { objective: usize, rows: usize },
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
}

/// `max objective·x` subject to `row.normal·x <= row.offset` for every row.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub rows: Vec<HalfSpace>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub point: DVector<f64>,
}

impl LinearProgram {
    pub fn new(objective: DVector<f64>, rows: Vec<HalfSpace>) -> Self {
        Self { objective, rows }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    maximize(&lp.objective, &lp.rows)
}

/// Maximizes `c·x` over the rows without copying them into a `LinearProgram`.
pub fn maximize(c: &DVector<f64>, rows: &[HalfSpace]) -> Result<LpSolution, LpError> {
    maximize_iter(c, rows.iter().map(|r| (&r.normal, r.offset)))
}

/// Same as [`maximize`] over borrowed `(normal, offset)` pairs.
pub fn maximize_iter<'a>(
    c: &DVector<f64>,
    rows: impl Iterator<Item = (&'a DVector<f64>, f64)>,
) -> Result<LpSolution, LpError> {
    let n = c.len();
    let flat = Normalized::new(n, rows)?;
    let c_norm = c.norm();
    if c_norm == 0.0 {
        return match DualTableau::solve(&flat, &vec![0.0; n])? {
            DualOutcome::Optimal(x) => Ok(LpSolution { value: 0.0, point: DVector::from_vec(x) }),
            DualOutcome::DualUnbounded => Err(LpError::Infeasible),
            DualOutcome::DualInfeasible => Err(LpError::Unbounded),
        };
    }
    let c_hat: Vec<f64> = c.iter().map(|v| v / c_norm).collect();
    match DualTableau::solve(&flat, &c_hat)? {
        DualOutcome::Optimal(x) => {
            let point = DVector::from_vec(x);
            Ok(LpSolution { value: c.dot(&point), point })
        }
        DualOutcome::DualUnbounded => Err(LpError::Infeasible),
        DualOutcome::DualInfeasible => {
            if flat.is_feasible()? {
                Err(LpError::Unbounded)
            } else {
                Err(LpError::Infeasible)
            }
        }
    }
}

/// True when the rows admit at least one point.
pub fn feasible(dim: usize, rows: &[HalfSpace]) -> Result<bool, LpError> {
    match Normalized::new(dim, rows.iter().map(|r| (&r.normal, r.offset))) {
        Ok(flat) => flat.is_feasible(),
        Err(LpError::Infeasible) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Rows scaled to unit normals, stored row-major.
struct Normalized {
    n: usize,
    m: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
}

impl Normalized {
    /// Zero rows are dropped, or flag infeasibility when their offset is negative.
    fn new<'a>(n: usize, rows: impl Iterator<Item = (&'a DVector<f64>, f64)>) -> Result<Self, LpError> {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (a, b) in rows {
            if a.len() != n {
                return Err(LpError::DimensionMismatch { objective: n, rows: a.len() });
            }
            let norm = a.norm();
            if norm < 1e-14 {
                if b < -LP_TOL {
                    return Err(LpError::Infeasible);
                }
                continue;
            }
            normals.extend(a.iter().map(|v| v / norm));
            offsets.push(b / norm);
        }
        Ok(Self { n, m: offsets.len(), normals, offsets })
    }

    fn is_feasible(&self) -> Result<bool, LpError> {
        Ok(!matches!(DualTableau::solve(self, &vec![0.0; self.n])?, DualOutcome::DualUnbounded))
    }
}

enum DualOutcome {
    Optimal(Vec<f64>),
    DualUnbounded,
    DualInfeasible,
}

struct DualTableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs for every column plus the negated objective in the last slot.
    d: Vec<f64>,
    pivots: usize,
}

impl DualTableau {
    fn solve(rows: &Normalized, c: &[f64]) -> Result<DualOutcome, LpError> {
        let n = c.len();
        let m = rows.m;
        if n == 0 {
            return Ok(DualOutcome::Optimal(Vec::new()));
        }
        let cols = m + n;
        let width = cols + 1;
        let mut t = vec![0.0; n * width];
        let mut sign = vec![1.0; n];
        for i in 0..n {
            sign[i] = if c[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..m {
                t[i * width + j] = sign[i] * rows.normals[j * n + i];
            }
            t[i * width + m + i] = 1.0;
            t[i * width + cols] = sign[i] * c[i];
        }
        let mut tab = DualTableau { rows: n, cols, t, basis: (m..m + n).collect(), d: vec![0.0; width], pivots: 0 };

        // Phase one: drive the artificial variables to zero.
        let phase_one: Vec<f64> = (0..cols).map(|j| if j >= m { 1.0 } else { 0.0 }).collect();
        tab.price(&phase_one);
        if !tab.iterate(|j| j < cols)? {
            return Ok(DualOutcome::DualInfeasible);
        }
        let infeasibility: f64 = (0..n).filter(|&i| tab.basis[i] >= m).map(|i| tab.rhs(i)).sum();
        if infeasibility > 1e-9 {
            return Ok(DualOutcome::DualInfeasible);
        }
        for i in 0..n {
            if tab.basis[i] >= m {
                if let Some(j) = (0..m).find(|&j| tab.at(i, j).abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }

        // Phase two: minimize b·y with artificials barred from entering.
        let mut phase_two = vec![0.0; cols];
        phase_two[..m].copy_from_slice(&rows.offsets);
        tab.price(&phase_two);
        if !tab.iterate(|j| j < m)? {
            return Ok(DualOutcome::DualUnbounded);
        }
        let x = (0..n).map(|i| -sign[i] * tab.d[m + i]).collect();
        Ok(DualOutcome::Optimal(x))
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * (self.cols + 1) + self.cols]
    }

    fn price(&mut self, cost: &[f64]) {
        for j in 0..=self.cols {
            let base = if j < self.cols { cost[j] } else { 0.0 };
            let mut acc = 0.0;
            for i in 0..self.rows {
                acc += cost[self.basis[i]] * self.at(i, j);
            }
            self.d[j] = base - acc;
        }
    }

    /// Runs Bland pivots until optimal (`Ok(true)`) or unbounded (`Ok(false)`).
    fn iterate(&mut self, allowed: impl Fn(usize) -> bool) -> Result<bool, LpError> {
        loop {
            let entering = (0..self.cols).find(|&j| allowed(j) && self.d[j] < -COST_TOL);
            let Some(j) = entering else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, j);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k]) {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else { return Ok(false) };
            self.pivot(i, j);
            self.pivots += 1;
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::PivotLimit(MAX_PIVOTS));
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.at(r, c);
        for k in 0..width {
            self.t[r * width + k] /= p;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f != 0.0 {
                for k in 0..width {
                    self.t[i * width + k] -= f * self.t[r * width + k];
                }
            }
        }
        let f = self.d[c];
        if f != 0.0 {
            for k in 0..width {
                self.d[k] -= f * self.t[r * width + k];
            }
        }
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: &[f64], b: f64) -> HalfSpace {
        HalfSpace::new(DVector::from_row_slice(a), b)
    }

    fn unit_box(n: usize) -> Vec<HalfSpace> {
        let mut rows = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(row(&e, 1.0));
            e[i] = -1.0;
            rows.push(row(&e, 1.0));
        }
        rows
    }

    #[test]
    fn interval_endpoint() {
        let sol = maximize(&DVector::from_row_slice(&[1.0]), &[row(&[1.0], 1.0), row(&[-1.0], 1.0)]).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!((sol.point[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_corner() {
        let sol = maximize(&DVector::from_row_slice(&[1.0, 1.0]), &unit_box(2)).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        assert!((sol.point[0] - 1.0).abs() < 1e-12 && (sol.point[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows() {
        let err = maximize(&DVector::from_row_slice(&[1.0]), &[row(&[1.0], 1.0), row(&[-1.0], -2.0)]).unwrap_err();
        assert_eq!(err, LpError::Infeasible);
    }

    #[test]
    fn open_direction_is_unbounded() {
        let err = maximize(
            &DVector::from_row_slice(&[1.0, 0.0]),
            &[row(&[-1.0, 0.0], 1.0), row(&[0.0, 1.0], 1.0), row(&[0.0, -1.0], 1.0)],
        )
        .unwrap_err();
        assert_eq!(err, LpError::Unbounded);
    }

    #[test]
    fn infeasible_and_open() {
        // x >= 2, x <= 1 with y free: infeasible takes precedence.
        let err = maximize(&DVector::from_row_slice(&[0.0, 1.0]), &[row(&[1.0, 0.0], 1.0), row(&[-1.0, 0.0], -2.0)])
            .unwrap_err();
        assert_eq!(err, LpError::Infeasible);
    }

    #[test]
    fn degenerate_vertex() {
        // Several rows through the optimal vertex (1, 1).
        let rows = vec![
            row(&[1.0, 0.0], 1.0),
            row(&[0.0, 1.0], 1.0),
            row(&[1.0, 1.0], 2.0),
            row(&[2.0, 1.0], 3.0),
            row(&[-1.0, 0.0], 0.0),
            row(&[0.0, -1.0], 0.0),
        ];
        let sol = maximize(&DVector::from_row_slice(&[3.0, 2.0]), &rows).unwrap();
        assert!((sol.value - 5.0).abs() < 1e-10);
    }

    #[test]
    fn feasibility_of_point_set() {
        assert!(feasible(1, &[row(&[1.0], 0.0), row(&[-1.0], 0.0)]).unwrap());
        assert!(!feasible(1, &[row(&[1.0], -0.1), row(&[-1.0], 0.0)]).unwrap());
    }

    #[test]
    fn matches_brute_force_on_random_polygons() {
        // Oracle: enumerate all pairwise line intersections, keep feasible ones.
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let mut rows = unit_box(2);
            for _ in 0..6 {
                rows.push(row(&[next(), next()], 0.3 + next().abs()));
            }
            let c = DVector::from_row_slice(&[next(), next()]);
            let sol = maximize(&c, &rows).unwrap();
            let mut best = f64::NEG_INFINITY;
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    let (a, b) = (&rows[i], &rows[j]);
                    let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
                    let y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
                    if rows.iter().all(|r| r.normal[0] * x + r.normal[1] * y <= r.offset + 1e-9) {
                        best = best.max(c[0] * x + c[1] * y);
                    }
                }
            }
            assert!((sol.value - best).abs() < 1e-8, "{} vs {}", sol.value, best);
            assert!(rows.iter().all(|r| r.normal.dot(&sol.point) <= r.offset + 1e-8));
        }
    }
}
