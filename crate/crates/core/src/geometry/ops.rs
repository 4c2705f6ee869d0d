use nalgebra::{DMatrix, DVector};

use super::lp;
use super::polytope::Polytope;
use super::{check_dim, GeometryError, HalfSpace};

/// Convex hull of a full-dimensional point cloud.
pub fn hull(dim: usize, points: &[DVector<f64>]) -> Result<Polytope, GeometryError> {
    if dim >= 3 {
        if points.len() <= dim || affine_rank(points) < dim {
            return Err(GeometryError::DegenerateHull);
        }
        return Polytope::from_points(dim, points);
    }
    let p = Polytope::from_points(dim, points)?;
    let needed = dim + 1;
    if p.vrep().map(|v| v.len()).unwrap_or(0) < needed {
        return Err(GeometryError::DegenerateHull);
    }
    Ok(p)
}

fn affine_rank(points: &[DVector<f64>]) -> usize {
    let n = points[0].len();
    let m = DMatrix::from_fn(points.len() - 1, n, |i, j| points[i + 1][j] - points[0][j]);
    m.rank(1e-10 * m.amax().max(1e-300))
}

/// `{A x : x in p}`.
pub fn linear_image(a: &DMatrix<f64>, p: &Polytope) -> Result<Polytope, GeometryError> {
    let n = p.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, found: a.nrows() });
    }
    if let Some(v) = p.vrep() {
        let mapped: Vec<DVector<f64>> = v.iter().map(|x| a * x).collect();
        if n <= 2 {
            return Polytope::from_points(n, &mapped);
        }
        if let Some(inv) = a.clone().try_inverse() {
            return Ok(image_by_inverse(&inv, p)?.with_vertices(mapped));
        }
        return Polytope::from_points(n, &mapped);
    }
    match a.clone().try_inverse() {
        Some(inv) => image_by_inverse(&inv, p),
        None => Err(GeometryError::RepresentationUnavailable("image by a singular matrix needs vertices")),
    }
}

fn image_by_inverse(inv: &DMatrix<f64>, p: &Polytope) -> Result<Polytope, GeometryError> {
    let rows = p.rows()?.iter().map(|r| HalfSpace::new(inv.transpose() * &r.normal, r.offset)).collect();
    Polytope::from_hrep(p.dim(), rows)
}

/// `p ⊕ q`, exact in dimension 1 and 2.
pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    if p.dim() > 2 {
        if is_origin(q) {
            return Ok(p.clone());
        }
        if is_origin(p) {
            return Ok(q.clone());
        }
        return Err(GeometryError::UnsupportedDimension(p.dim()));
    }
    let (Some(vp), Some(vq)) = (p.vrep(), q.vrep()) else {
        return Err(GeometryError::RepresentationUnavailable("vertices"));
    };
    if vq.len() == 1 && vq[0].amax() == 0.0 {
        return Ok(p.clone());
    }
    if vp.len() == 1 && vp[0].amax() == 0.0 {
        return Ok(q.clone());
    }
    let mut sums = Vec::with_capacity(vp.len() * vq.len());
    for a in vp {
        for b in vq {
            sums.push(a + b);
        }
    }
    Polytope::from_points(p.dim(), &sums)
}

fn is_origin(p: &Polytope) -> bool {
    p.vrep().is_some_and(|v| v.len() == 1 && v[0].amax() == 0.0)
}

/// Rows of `{x : A x ⊕ w ⊆ S}` for `S = {H y <= h}`, without canonicalizing.
pub fn preimage_rows(a: &DMatrix<f64>, w: &Polytope, rows: &[HalfSpace]) -> Vec<HalfSpace> {
    let at = a.transpose();
    rows.iter()
        .map(|r| {
            let erosion = if is_origin(w) { 0.0 } else { w.support(&r.normal) };
            HalfSpace::new(&at * &r.normal, r.offset - erosion)
        })
        .collect()
}

/// `{x : A x ⊕ w ⊆ s}`.
pub fn preimage(a: &DMatrix<f64>, w: &Polytope, s: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(s.dim(), w.dim())?;
    if a.nrows() != s.dim() || a.ncols() != s.dim() {
        return Err(GeometryError::DimensionMismatch { expected: s.dim(), found: a.nrows() });
    }
    Polytope::from_hrep(s.dim(), preimage_rows(a, w, s.rows()?))
}

pub fn intersection(p: &Polytope, q: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    let mut rows = p.rows()?.to_vec();
    rows.extend_from_slice(q.rows()?);
    Polytope::from_hrep(p.dim(), rows)
}

/// Infinity-norm distance from `x` to `q`.
pub fn point_distance(x: &DVector<f64>, q: &Polytope) -> Result<f64, GeometryError> {
    check_dim(q.dim(), x.len())?;
    let n = x.len();
    if n == 1 {
        let v = q.vrep().ok_or(GeometryError::RepresentationUnavailable("vertices"))?;
        let lo = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return Ok((lo - x[0]).max(x[0] - hi).max(0.0));
    }
    // Variables (y, t): minimize t with |x - y|_inf <= t and y in q.
    let mut rows: Vec<HalfSpace> = q
        .rows()?
        .iter()
        .map(|r| {
            let mut a = DVector::zeros(n + 1);
            a.rows_mut(0, n).copy_from(&r.normal);
            HalfSpace::new(a, r.offset)
        })
        .collect();
    for i in 0..n {
        let mut a = DVector::zeros(n + 1);
        a[i] = 1.0;
        a[n] = -1.0;
        rows.push(HalfSpace::new(a.clone(), x[i]));
        a[i] = -1.0;
        rows.push(HalfSpace::new(a, -x[i]));
    }
    let mut c = DVector::zeros(n + 1);
    c[n] = -1.0;
    let sol = lp::maximize(&c, &rows)?;
    Ok((-sol.value).max(0.0))
}

/// Hausdorff distance in the infinity norm.
pub fn hausdorff_distance(p: &Polytope, q: &Polytope) -> Result<f64, GeometryError> {
    check_dim(p.dim(), q.dim())?;
    let vp = p.vertices_any()?;
    let vq = q.vertices_any()?;
    let mut d: f64 = 0.0;
    for x in &vp {
        d = d.max(point_distance(x, q)?);
    }
    for x in &vq {
        d = d.max(point_distance(x, p)?);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(a)
    }

    fn interval(lo: f64, hi: f64) -> Polytope {
        Polytope::interval(lo, hi).unwrap()
    }

    fn diamond(r: f64) -> Polytope {
        Polytope::from_points(2, &[v(&[r, 0.0]), v(&[0.0, r]), v(&[-r, 0.0]), v(&[0.0, -r])]).unwrap()
    }

    #[test]
    fn hull_examples() {
        let p = hull(1, &[v(&[-1.0]), v(&[0.3]), v(&[1.0])]).unwrap();
        assert!(p.approx_eq(&interval(-1.0, 1.0), 0.0));
        let sq =
            hull(2, &[v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0]), v(&[1.0, -1.0]), v(&[0.0, 0.0])]).unwrap();
        assert!(sq.approx_eq(&Polytope::ball(2, 1.0), 1e-12));
        let d = hull(2, &[v(&[2.0, 0.0]), v(&[-2.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])]).unwrap();
        assert_eq!(d.vrep().unwrap().len(), 4);
        assert_eq!(
            hull(2, &[v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])]).unwrap_err(),
            GeometryError::DegenerateHull
        );
        assert_eq!(hull(1, &[v(&[3.0])]).unwrap_err(), GeometryError::DegenerateHull);
    }

    #[test]
    fn image_examples() {
        let half = DMatrix::from_element(1, 1, 0.5);
        assert!(linear_image(&half, &interval(-1.0, 1.0)).unwrap().approx_eq(&interval(-0.5, 0.5), 1e-12));
        let neg2 = DMatrix::from_element(1, 1, -2.0);
        assert!(linear_image(&neg2, &interval(-0.5, 0.5)).unwrap().approx_eq(&interval(-1.0, 1.0), 1e-12));
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(linear_image(&rot, &Polytope::ball(2, 1.0)).unwrap().approx_eq(&Polytope::ball(2, 1.0), 1e-12));
    }

    #[test]
    fn image_in_3d_by_row_transform() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        let img = linear_image(&a, &Polytope::ball(3, 1.0)).unwrap();
        assert!((img.support(&v(&[1.0, 0.0, 0.0])) - 2.0).abs() < 1e-12);
        assert!((img.support(&v(&[0.0, 1.0, 0.0])) - 2.0).abs() < 1e-12);
        let singular = DMatrix::from_element(3, 3, 1.0);
        assert!(matches!(
            linear_image(&singular, &Polytope::ball(3, 1.0)),
            Err(GeometryError::RepresentationUnavailable(_))
        ));
    }

    #[test]
    fn minkowski_examples() {
        let s = minkowski_sum(&interval(-1.0, 1.0), &interval(-2.0, 2.0)).unwrap();
        assert!(s.approx_eq(&interval(-3.0, 3.0), 1e-12));
        let b = Polytope::ball(2, 1.0);
        assert!(minkowski_sum(&b, &Polytope::zero(2)).unwrap().approx_eq(&b, 0.0));
        let oct = minkowski_sum(&b, &diamond(1.0)).unwrap();
        assert_eq!(oct.vrep().unwrap().len(), 8);
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::PI / 8.0;
            let d = v(&[t.cos(), t.sin()]);
            let expect = b.support(&d) + diamond(1.0).support(&d);
            assert!((oct.support(&d) - expect).abs() < 1e-12);
        }
        assert_eq!(
            minkowski_sum(&Polytope::ball(3, 1.0), &Polytope::ball(3, 1.0)).unwrap_err(),
            GeometryError::UnsupportedDimension(3)
        );
        assert!(matches!(
            minkowski_sum(&Polytope::ball(2, 1.0), &interval(-1.0, 1.0)),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn preimage_examples() {
        let half = DMatrix::from_element(1, 1, 0.5);
        let p = preimage(&half, &interval(-0.25, 0.25), &interval(-1.0, 1.0)).unwrap();
        assert!(p.approx_eq(&interval(-1.5, 1.5), 1e-12));
        let quarter = DMatrix::from_element(1, 1, 0.25);
        let p = preimage(&quarter, &Polytope::zero(1), &interval(-1.0, 1.0)).unwrap();
        assert!(p.approx_eq(&interval(-4.0, 4.0), 1e-12));
        let wide = interval(-2.0, 2.0);
        assert_eq!(preimage(&half, &wide, &interval(-1.0, 1.0)).unwrap_err(), GeometryError::EmptySet);
    }

    #[test]
    fn preimage_matches_grid_membership() {
        // Oracle: x is in the preimage iff every vertex-shifted image A x + w stays in X.
        let a = DMatrix::from_row_slice(2, 2, &[0.7747, 1.2483, -0.4, 0.6]);
        let w = Polytope::ball(2, 1e-4);
        let x = Polytope::ball(2, 1.0);
        let p = preimage(&a, &w, &x).unwrap();
        let wv = w.vrep().unwrap().to_vec();
        for i in 0..100 {
            for j in 0..100 {
                let pt = v(&[-1.5 + 3.0 * i as f64 / 99.0, -1.5 + 3.0 * j as f64 / 99.0]);
                let img = &a * &pt;
                let margin = wv.iter().map(|d| (&img + d).amax()).fold(0.0, f64::max);
                if (margin - 1.0).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(p.contains_point(&pt, 0.0), margin <= 1.0, "grid point {pt:?}");
            }
        }
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&interval(-1.0, 1.0), &interval(-1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&interval(-1.0, 1.0), &interval(-2.0, 2.0)).unwrap(), 1.0);
        let b = Polytope::ball(2, 1.0);
        let d = hausdorff_distance(&b, &b.scale(1.3)).unwrap();
        assert!((d - 0.3).abs() < 1e-9);
        let d3 = hausdorff_distance(&Polytope::ball(3, 1.0), &Polytope::ball(3, 1.5)).unwrap();
        assert!((d3 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn intersection_of_boxes() {
        let a = Polytope::ball(2, 1.0);
        let b = Polytope::from_hrep(
            2,
            vec![
                HalfSpace::from_slice(&[1.0, 0.0], 3.0),
                HalfSpace::from_slice(&[-1.0, 0.0], -0.5),
                HalfSpace::from_slice(&[0.0, 1.0], 2.0),
                HalfSpace::from_slice(&[0.0, -1.0], 2.0),
            ],
        )
        .unwrap();
        let c = intersection(&a, &b).unwrap();
        assert!((c.support(&v(&[-1.0, 0.0])) + 0.5).abs() < 1e-12);
        assert_eq!(c.vrep().unwrap().len(), 4);
    }
}
