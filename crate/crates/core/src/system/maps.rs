use crate::geometry::{canonical_rows, linear_image, minkowski_sum, preimage_rows, HalfSpace, Polytope};

use super::{SwitchedSystem, SystemError};

/// Which forward reachability map to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapVariant {
    /// `A S ⊕ W`.
    Plain,
    /// `A S`.
    Nominal,
    /// Hull of the plain map; identical to it on convex input.
    Convex,
    /// Hull of the nominal map.
    ConvexNominal,
}

impl MapVariant {
    pub fn ignores_disturbance(self) -> bool {
        matches!(self, MapVariant::Nominal | MapVariant::ConvexNominal)
    }
}

/// One forward step under `label`.
pub fn step_forward(sys: &SwitchedSystem, label: usize, s: &Polytope, nominal: bool) -> Result<Polytope, SystemError> {
    let mode = sys.mode(label);
    let image = linear_image(&mode.a, s)?;
    if nominal || mode.is_nominal() {
        return Ok(image);
    }
    if sys.dim() > 2 {
        return Err(SystemError::UnsupportedDimension(sys.dim()));
    }
    Ok(minkowski_sum(&image, &mode.w)?)
}

/// Forward image of `s` along `labels`, folded left to right.
pub fn forward_map(
    sys: &SwitchedSystem,
    labels: &[usize],
    s: &Polytope,
    variant: MapVariant,
) -> Result<Polytope, SystemError> {
    if !variant.ignores_disturbance() {
        sys.require_planar_or_nominal()?;
    }
    if sys.graph().realize(None, labels).is_none() {
        return Err(SystemError::InadmissibleSequence(labels.to_vec()));
    }
    let mut cur = s.clone();
    for &l in labels {
        cur = step_forward(sys, l, &cur, variant.ignores_disturbance())?;
    }
    Ok(cur)
}

/// Rows of `{x : A x ⊕ W ⊆ {H y <= h}}` for one label, not canonicalized.
pub fn step_backward_rows(sys: &SwitchedSystem, label: usize, rows: &[HalfSpace]) -> Vec<HalfSpace> {
    let mode = sys.mode(label);
    preimage_rows(&mode.a, &mode.w, rows)
}

/// Canonical rows of the backward map along `labels`, folded right to left.
/// The result may be unbounded when some matrix is singular.
pub fn backward_rows(
    sys: &SwitchedSystem,
    labels: &[usize],
    rows: &[HalfSpace],
) -> Result<Vec<HalfSpace>, SystemError> {
    let mut cur = rows.to_vec();
    for &l in labels.iter().rev() {
        cur = canonical_rows(sys.dim(), &step_backward_rows(sys, l, &cur))?;
    }
    Ok(cur)
}

pub fn backward_map(sys: &SwitchedSystem, labels: &[usize], s: &Polytope) -> Result<Polytope, SystemError> {
    let rows = s.hrep().ok_or(crate::geometry::GeometryError::RepresentationUnavailable("half-space form"))?;
    let out = backward_rows(sys, labels, rows)?;
    Ok(Polytope::from_hrep(sys.dim(), out)?)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn forward_examples() {
        let sys = single(0.5, 0.25);
        let zero = Polytope::zero(1);
        let one = forward_map(&sys, &[1], &zero, MapVariant::Plain).unwrap();
        assert!(one.approx_eq(&interval(-0.25, 0.25), 1e-12));
        let two = forward_map(&sys, &[1, 1], &zero, MapVariant::Plain).unwrap();
        assert!(two.approx_eq(&interval(-0.375, 0.375), 1e-12));
        let nom = forward_map(&sys, &[1, 1], &interval(-1.0, 1.0), MapVariant::Nominal).unwrap();
        assert!(nom.approx_eq(&interval(-0.25, 0.25), 1e-12));
    }

    #[test]
    fn composition_order() {
        // R({1,2}, S) = A2 A1 S ⊕ A2 W1 ⊕ W2 on the two-node system.
        let sys = two_node_scalar(0.1);
        let s = interval(-0.5, 0.5);
        let got = forward_map(&sys, &[1, 2], &s, MapVariant::Plain).unwrap();
        let half_width = 0.25 * 2.0 * 0.5 + 0.25 * 0.1 + 0.1;
        assert!(got.approx_eq(&interval(-half_width, half_width), 1e-12));
        assert_eq!(
            forward_map(&sys, &[1, 1], &s, MapVariant::Plain).unwrap_err(),
            SystemError::InadmissibleSequence(vec![1, 1])
        );
    }

    #[test]
    fn backward_examples() {
        let sys = single(0.5, 0.25);
        let b = backward_map(&sys, &[1], &interval(-1.0, 1.0)).unwrap();
        assert!(b.approx_eq(&interval(-1.5, 1.5), 1e-12));
        let nom = single(0.25, 0.0);
        let b = backward_map(&nom, &[1], &interval(-1.0, 1.0)).unwrap();
        assert!(b.approx_eq(&interval(-4.0, 4.0), 1e-12));
    }

    #[test]
    fn backward_then_forward_stays_inside() {
        let sys = two_node_scalar(0.1);
        let s = interval(-1.0, 1.0);
        let labels = [2, 1, 2];
        let pre = backward_map(&sys, &labels, &s).unwrap();
        let img = forward_map(&sys, &labels, &pre, MapVariant::Plain).unwrap();
        assert!(s.includes(&img, 1e-9));
    }
}
