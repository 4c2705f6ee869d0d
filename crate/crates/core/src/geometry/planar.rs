//! Exact conversions between representations in dimension 1 and 2.

use super::HalfSpace;

pub(crate) type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn scale_of(points: &[P2]) -> f64 {
    points.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300)
}

/// Monotone-chain hull, counterclockwise from the lowest-leftmost point.
///
/// Flat inputs are allowed and come back as one or two points.
pub(crate) fn hull_2d(points: &[P2]) -> Vec<P2> {
    if points.is_empty() {
        return Vec::new();
    }
    let scale = scale_of(points);
    let same = 1e-12 * scale;
    let turn = 1e-13 * scale * scale;
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= same && (a[1] - b[1]).abs() <= same);
    if pts.len() <= 2 {
        if pts.len() == 2 {
            let (a, b) = (pts[0], pts[1]);
            if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) <= same {
                pts.truncate(1);
            }
        }
        return pts;
    }
    let mut lower: Vec<P2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= turn {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= turn {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 {
        let (a, b) = (lower[0], lower[1]);
        if (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) <= same {
            lower.truncate(1);
        }
    }
    lower
}

/// Half-spaces of the hull of `v` (output of `hull_2d`), unit normals.
pub(crate) fn rows_from_vertices_2d(v: &[P2]) -> Vec<HalfSpace> {
    match v.len() {
        0 => Vec::new(),
        1 => {
            let p = v[0];
            vec![
                HalfSpace::from_slice(&[1.0, 0.0], p[0]),
                HalfSpace::from_slice(&[0.0, 1.0], p[1]),
                HalfSpace::from_slice(&[-1.0, 0.0], -p[0]),
                HalfSpace::from_slice(&[0.0, -1.0], -p[1]),
            ]
        }
        2 => {
            let (p, q) = (v[0], v[1]);
            let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            let d = [(q[0] - p[0]) / len, (q[1] - p[1]) / len];
            let nrm = [-d[1], d[0]];
            let on = nrm[0] * p[0] + nrm[1] * p[1];
            vec![
                HalfSpace::from_slice(&d, d[0] * q[0] + d[1] * q[1]),
                HalfSpace::from_slice(&nrm, on),
                HalfSpace::from_slice(&[-d[0], -d[1]], -(d[0] * p[0] + d[1] * p[1])),
                HalfSpace::from_slice(&[-nrm[0], -nrm[1]], -on),
            ]
        }
        k => (0..k)
            .map(|i| {
                let a = v[i];
                let b = v[(i + 1) % k];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = (dx * dx + dy * dy).sqrt();
                let n = [dy / len, -dx / len];
                HalfSpace::from_slice(&n, n[0] * a[0] + n[1] * a[1])
            })
            .collect(),
    }
}

fn intersect(a: &HalfSpace, b: &HalfSpace) -> Option<P2> {
    let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
    if det.abs() < 1e-12 {
        return None;
    }
    Some([
        (a.offset * b.normal[1] - b.offset * a.normal[1]) / det,
        (a.normal[0] * b.offset - b.normal[0] * a.offset) / det,
    ])
}

fn satisfies_all(rows: &[HalfSpace], p: P2, tol: f64) -> bool {
    rows.iter().all(|r| r.normal[0] * p[0] + r.normal[1] * p[1] <= r.offset + tol)
}

/// Vertices of a nonempty bounded planar set given by irredundant unit rows.
pub(crate) fn vertices_from_rows_2d(rows: &[HalfSpace]) -> Vec<P2> {
    let scale = rows.iter().fold(1.0f64, |m, r| m.max(r.offset.abs()));
    let tol = 1e-9 * scale;
    let mut sorted: Vec<&HalfSpace> = rows.iter().collect();
    sorted.sort_by(|a, b| a.normal[1].atan2(a.normal[0]).total_cmp(&b.normal[1].atan2(b.normal[0])));
    let k = sorted.len();
    let mut candidates = Vec::with_capacity(k);
    let mut ok = k >= 2;
    for i in 0..k {
        if !ok {
            break;
        }
        match intersect(sorted[i], sorted[(i + 1) % k]) {
            Some(p) if satisfies_all(rows, p, tol) => candidates.push(p),
            _ => ok = false,
        }
    }
    if !ok {
        candidates.clear();
        for i in 0..k {
            for j in i + 1..k {
                if let Some(p) = intersect(&rows[i], &rows[j]) {
                    if satisfies_all(rows, p, tol) {
                        candidates.push(p);
                    }
                }
            }
        }
    }
    hull_2d(&candidates)
}

/// Endpoints of a nonempty bounded interval given by unit rows.
pub(crate) fn interval_from_rows(rows: &[HalfSpace]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for r in rows {
        let a = r.normal[0];
        if a > 0.0 {
            hi = hi.min(r.offset / a);
        } else if a < 0.0 {
            lo = lo.max(r.offset / a);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let h = hull_2d(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn flat_hulls() {
        assert_eq!(hull_2d(&[[1.0, 1.0], [1.0, 1.0]]), vec![[1.0, 1.0]]);
        assert_eq!(hull_2d(&[[0.0, 0.0], [2.0, 2.0], [1.0, 1.0]]).len(), 2);
    }

    #[test]
    fn rows_round_trip() {
        let sq = hull_2d(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]);
        let rows = rows_from_vertices_2d(&sq);
        assert_eq!(rows.len(), 4);
        let back = vertices_from_rows_2d(&rows);
        assert_eq!(back.len(), 4);
        for (a, b) in back.iter().zip(sq.iter()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_rows_recover_segment() {
        let seg = hull_2d(&[[-1.0, 0.5], [2.0, -1.0]]);
        let rows = rows_from_vertices_2d(&seg);
        let back = vertices_from_rows_2d(&rows);
        assert_eq!(back.len(), 2);
    }
}
