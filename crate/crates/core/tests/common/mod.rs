//! Seeded random instances and the property checks run both by the proptest
//! suites and by the acceptance harness.
#![allow(dead_code)]

use std::fmt::Display;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switchsafe::automaton::{minimal_unavoidable, reduce, Edge, LabeledGraph, ReductionPlan};
use switchsafe::engine::{
    forward_sequence, max_from_reduced, max_invariant, min_invariant, min_invariant_reduced, recover_from_plift,
    recover_from_tlift, stability_certificate_seeded, verify_invariance, ApproximationConfig, CertificateSeed,
    MaxConfig, Member, MinimalMode, MultiSet,
};
use switchsafe::geometry::{canonical_rows, minkowski_sum, HalfSpace, Polytope};
use switchsafe::system::{
    build_plift_system, build_reduced_system, build_tlift_system, forward_map, step_backward_rows, MapVariant, Mode,
    SwitchedSystem,
};

pub const ETA: f64 = 1e-8;
pub const RECOVERY_TOL: f64 = 1e-6;

pub type Check = fn(u64) -> Result<(), String>;

/// Named checks, each run on one seeded instance.
pub const SUITES: &[(&str, Check)] = &[
    ("forward nesting", check_nesting),
    ("certificate sandwich", check_sandwich),
    ("backward anti-monotonicity", check_antimonotone),
    ("minkowski splitting", check_splitting),
    ("reduced-length sandwich", check_reduced_sandwich),
    ("reduction recovery", check_reduction_recovery),
    ("product-lift recovery", check_tlift_recovery),
    ("path-lift recovery", check_plift_recovery),
    ("outer approximations invariant", check_outer_verifies),
    ("inner inside outer", check_inner_in_outer),
];

pub fn err<E: Display>(e: E) -> String {
    e.to_string()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn push_unique(edges: &mut Vec<Edge>, e: Edge) {
    if !edges.contains(&e) {
        edges.push(e);
    }
}

/// Matrix with ∞-norm `s`, so every product of `k` modes shrinks by `s^k`.
pub fn contraction(r: &mut ChaCha8Rng, dim: usize, s: f64) -> DMatrix<f64> {
    let a = DMatrix::<f64>::from_fn(dim, dim, |_, _| r.gen_range(-1.0..1.0));
    let norm = (0..dim).map(|i| a.row(i).iter().map(|v: &f64| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let sign = if dim == 1 && r.gen_bool(0.5) { -1.0 } else { 1.0 };
    if norm < 1e-3 {
        return DMatrix::identity(dim, dim) * (sign * s);
    }
    a * (s / norm)
}

pub fn random_box(r: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Polytope {
    let w: Vec<f64> = (0..dim).map(|_| r.gen_range(lo..hi)).collect();
    Polytope::symmetric_box(&w)
}

/// Strongly connected graph: a labeled cycle through every node plus a few
/// random extra edges.
pub fn random_graph(r: &mut ChaCha8Rng, nodes: usize, modes: usize) -> LabeledGraph {
    let mut edges = Vec::new();
    for j in 0..nodes {
        push_unique(&mut edges, Edge::new(j, (j + 1) % nodes, r.gen_range(1..=modes)));
    }
    for _ in 0..r.gen_range(0..=nodes) {
        push_unique(&mut edges, Edge::new(r.gen_range(0..nodes), r.gen_range(0..nodes), r.gen_range(1..=modes)));
    }
    LabeledGraph::numbered(nodes, modes, edges).expect("generated graph is well formed")
}

/// Stable system whose modes are ∞-norm contractions with rate at most 0.8
/// and whose disturbances are boxes of half-width at most 0.12, so the
/// minimal invariant multi-set stays inside constraint boxes of half-width
/// at least 0.9.
pub fn system_with(
    r: &mut ChaCha8Rng,
    dim: usize,
    max_nodes: usize,
    max_modes: usize,
    nominal: bool,
) -> SwitchedSystem {
    let nodes = r.gen_range(1..=max_nodes);
    let modes = r.gen_range(1..=max_modes);
    let g = random_graph(r, nodes, modes);
    let modes = (0..modes)
        .map(|_| {
            let s = r.gen_range(0.2..0.8);
            let a = contraction(r, dim, s);
            if nominal {
                Mode::nominal(a)
            } else {
                Mode::new(a, random_box(r, dim, 0.02, 0.12))
            }
        })
        .collect();
    let xs = (0..nodes).map(|_| random_box(r, dim, 0.9, 1.5)).collect();
    SwitchedSystem::new(dim, modes, g, Some(xs)).expect("generated system is consistent")
}

/// Scalar or planar system with at most four nodes and three modes.
pub fn random_system(seed: u64) -> SwitchedSystem {
    let mut r = rng(seed);
    let dim = if r.gen_bool(0.6) { 1 } else { 2 };
    let nominal = r.gen_bool(0.1);
    system_with(&mut r, dim, 4, 3, nominal)
}

pub fn random_scalar_system(seed: u64) -> SwitchedSystem {
    let mut r = rng(seed);
    let nominal = r.gen_bool(0.1);
    system_with(&mut r, 1, 4, 3, nominal)
}

pub fn random_polytope(r: &mut ChaCha8Rng, dim: usize) -> Polytope {
    if dim == 1 {
        let a = r.gen_range(-1.0..1.0);
        let b = r.gen_range(-1.0..1.0);
        return Polytope::interval(f64::min(a, b), f64::max(a, b) + 0.05).expect("nonempty interval");
    }
    loop {
        let k = r.gen_range(3..=6);
        let pts: Vec<DVector<f64>> = (0..k).map(|_| DVector::from_fn(dim, |_, _| r.gen_range(-1.0..1.0))).collect();
        if let Ok(p) = Polytope::from_points(dim, &pts) {
            return p;
        }
    }
}

/// Labels of a random walk of `len` edges.
pub fn random_walk(r: &mut ChaCha8Rng, g: &LabeledGraph, len: usize) -> Vec<usize> {
    let mut node = r.gen_range(0..g.node_count());
    let mut labels = Vec::with_capacity(len);
    for _ in 0..len {
        let out: Vec<&Edge> = g.out_edges(node).collect();
        let e = out[r.gen_range(0..out.len())];
        labels.push(e.label);
        node = e.target;
    }
    labels
}

pub fn direction(r: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| r.gen_range(-1.0..1.0))
}

fn directions(r: &mut ChaCha8Rng, dim: usize) -> Vec<DVector<f64>> {
    let mut ds = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut d = DVector::zeros(dim);
            d[i] = s;
            ds.push(d);
        }
    }
    ds.extend((0..6).map(|_| direction(r, dim)));
    ds
}

/// Largest ∞-norm radius among the disturbance sets.
pub fn disturbance_radius(sys: &SwitchedSystem) -> f64 {
    sys.modes().iter().map(|m| m.w.outer_radius()).fold(0.0, f64::max)
}

fn convexify(m: &Member) -> Result<Polytope, String> {
    m.hull().map_err(err)
}

/// Mutual inclusion of member hulls within `tol`.
pub fn hulls_agree(a: &MultiSet, b: &MultiSet, tol: f64) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} members against {}", a.len(), b.len()));
    }
    for (j, (x, y)) in a.members.iter().zip(&b.members).enumerate() {
        let (hx, hy) = (convexify(x)?, convexify(y)?);
        if !(hx.includes(&hy, tol) && hy.includes(&hx, tol)) {
            return Err(format!("member {j} differs beyond {tol}"));
        }
    }
    Ok(())
}

pub fn check_nesting(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let convexified = sys.dim() > 1;
    let mut prev = forward_sequence(&sys, 0, convexified).map_err(err)?.0;
    for l in 1..=5 {
        let next = forward_sequence(&sys, l, convexified).map_err(err)?.0;
        for j in 0..sys.node_count() {
            if !next.member(j).includes(prev.member(j), ETA) {
                return Err(format!("F_{} not inside F_{l} at node {j}", l - 1));
            }
        }
        prev = next;
    }
    Ok(())
}

/// `h_{F_{l+1}}(d) <= h_{F_l}(d) + Γρ^l α ‖d‖₁` with a ball-seeded certificate.
pub fn check_sandwich(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let mut r = rng(seed ^ 0x5a5a);
    let cert = stability_certificate_seeded(&sys, 0.15, CertificateSeed::UnitBall, 10_000).map_err(err)?;
    let alpha = disturbance_radius(&sys);
    let convexified = sys.dim() > 1;
    let ds = directions(&mut r, sys.dim());
    let mut prev = forward_sequence(&sys, 0, convexified).map_err(err)?.0;
    for l in 0..6 {
        let next = forward_sequence(&sys, l + 1, convexified).map_err(err)?.0;
        let slack = cert.gamma * cert.rho.powi(l as i32) * alpha;
        for j in 0..sys.node_count() {
            for d in &ds {
                let lhs = next.member(j).support(d);
                let rhs = prev.member(j).support(d) + slack * d.lp_norm(1);
                if lhs > rhs + 1e-9 {
                    return Err(format!("node {j}, l={l}: {lhs} > {rhs}"));
                }
            }
        }
        prev = next;
    }
    Ok(())
}

/// Runs the constrained backward iteration directly, checking that every
/// member shrinks, and compares its fixpoint with `max_invariant`.
pub fn check_antimonotone(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let n = sys.dim();
    let caps: Vec<Vec<HalfSpace>> =
        (0..sys.node_count()).map(|j| sys.constraint(j).unwrap().hrep().unwrap().to_vec()).collect();
    let mut cur: Vec<Polytope> = (0..sys.node_count()).map(|j| sys.constraint(j).unwrap().clone()).collect();
    for l in 0..500 {
        let mut next = Vec::with_capacity(cur.len());
        for (j, cap) in caps.iter().enumerate() {
            let mut rows = cap.clone();
            for e in sys.graph().out_edges(j) {
                rows.extend(step_backward_rows(&sys, e.label, cur[e.target].hrep().unwrap()));
            }
            let rows = canonical_rows(n, &rows).map_err(err)?;
            next.push(Polytope::from_hrep(n, rows).map_err(err)?);
        }
        for j in 0..cur.len() {
            if !cur[j].includes(&next[j], ETA) {
                return Err(format!("B_{} not inside B_{l} at node {j}", l + 1));
            }
        }
        let done = cur.iter().zip(&next).all(|(a, b)| b.includes(a, ETA));
        cur = next;
        if done {
            let (ms, _) = max_invariant(&sys, &MaxConfig::with_eta(ETA)).map_err(err)?;
            for (j, p) in cur.iter().enumerate() {
                let m = ms.member(j).as_convex().ok_or("maximal member not convex")?;
                if !p.approx_eq(m, RECOVERY_TOL) {
                    return Err(format!("fixpoint differs from max_invariant at node {j}"));
                }
            }
            return Ok(());
        }
    }
    Err("backward iteration did not settle in 500 steps".into())
}

/// Forward images split over Minkowski sums: the disturbances enter once.
pub fn check_splitting(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let mut r = rng(seed ^ 0xf00d);
    let s1 = random_polytope(&mut r, sys.dim());
    let s2 = random_polytope(&mut r, sys.dim());
    let len = r.gen_range(1..=4);
    let labels = random_walk(&mut r, sys.graph(), len);
    for (p, q) in [(&s1, &s2), (&s2, &s1)] {
        let sum = minkowski_sum(p, q).map_err(err)?;
        let lhs = forward_map(&sys, &labels, &sum, MapVariant::Plain).map_err(err)?;
        let rhs = minkowski_sum(
            &forward_map(&sys, &labels, p, MapVariant::Plain).map_err(err)?,
            &forward_map(&sys, &labels, q, MapVariant::Nominal).map_err(err)?,
        )
        .map_err(err)?;
        if !lhs.approx_eq(&rhs, 1e-9) {
            return Err(format!("split fails along {labels:?}"));
        }
    }
    Ok(())
}

/// Unavoidable set and plan with horizon equal to the node count.
pub fn plan_for(sys: &SwitchedSystem) -> Result<ReductionPlan, String> {
    let m = sys.node_count();
    let y = minimal_unavoidable(sys.graph(), m).map_err(err)?;
    reduce(sys.graph(), &y, m).map_err(err)
}

/// On the unavoidable nodes the reduced forward sets lie between the
/// original ones at `l·θ_min` and `l·θ_max` steps.
pub fn check_reduced_sandwich(seed: u64) -> Result<(), String> {
    let sys = random_scalar_system(seed);
    let plan = plan_for(&sys)?;
    let red = build_reduced_system(&sys, &plan).map_err(err)?;
    for l in 1..=3 {
        let (fr, _) = forward_sequence(&red, l, false).map_err(err)?;
        let (lo, _) = forward_sequence(&sys, l * plan.theta_min, false).map_err(err)?;
        let (hi, _) = forward_sequence(&sys, l * plan.theta_max, false).map_err(err)?;
        for (i, &y) in plan.y.iter().enumerate() {
            if !fr.member(i).includes(lo.member(y), ETA) {
                return Err(format!("lower bound fails at node {y}, l={l}"));
            }
            if !hi.member(y).includes(fr.member(i), ETA) {
                return Err(format!("upper bound fails at node {y}, l={l}"));
            }
        }
    }
    Ok(())
}

fn minimal_config() -> ApproximationConfig {
    ApproximationConfig::new(1e-7)
}

pub fn check_reduction_recovery(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let plan = plan_for(&sys)?;
    let cfg = MaxConfig::with_eta(ETA);
    let (direct, _) = max_invariant(&sys, &cfg).map_err(err)?;
    let rec = max_from_reduced(&sys, &plan, &cfg).map_err(err)?;
    if !rec.maximal.approx_eq(&direct, RECOVERY_TOL) {
        return Err("maximal multi-set from the reduced system differs".into());
    }
    let mcfg = minimal_config();
    let (dmin, _) = min_invariant(&sys, &mcfg, MinimalMode::Outer).map_err(err)?;
    let (rmin, _) = min_invariant_reduced(&sys, &plan, &mcfg, MinimalMode::Outer).map_err(err)?;
    hulls_agree(&rmin, &dmin, RECOVERY_TOL).map_err(|e| format!("minimal: {e}"))
}

pub fn check_tlift_recovery(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let (lifted, _) = build_tlift_system(&sys, 2).map_err(err)?;
    let cfg = MaxConfig::with_eta(ETA);
    let mcfg = minimal_config();
    let (lmin, _) = min_invariant(&lifted, &mcfg, MinimalMode::Outer).map_err(err)?;
    let (lmax, _) = max_invariant(&lifted, &cfg).map_err(err)?;
    let (rmin, rmax) = recover_from_tlift(&sys, 2, Some(&lmin), Some(&lmax)).map_err(err)?;
    let (dmin, _) = min_invariant(&sys, &mcfg, MinimalMode::Outer).map_err(err)?;
    let (dmax, _) = max_invariant(&sys, &cfg).map_err(err)?;
    if !rmax.unwrap().approx_eq(&dmax, RECOVERY_TOL) {
        return Err("maximal multi-set from the product lift differs".into());
    }
    hulls_agree(&rmin.unwrap(), &dmin, RECOVERY_TOL).map_err(|e| format!("minimal: {e}"))
}

pub fn check_plift_recovery(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let (lifted, index) = build_plift_system(&sys, 1).map_err(err)?;
    let cfg = MaxConfig::with_eta(ETA);
    let mcfg = minimal_config();
    let (lmin, _) = min_invariant(&lifted, &mcfg, MinimalMode::Outer).map_err(err)?;
    let (lmax, _) = max_invariant(&lifted, &cfg).map_err(err)?;
    let (rmin, rmax) = recover_from_plift(&sys, &index, Some(&lmin), Some(&lmax), RECOVERY_TOL).map_err(err)?;
    let (dmin, _) = min_invariant(&sys, &mcfg, MinimalMode::Outer).map_err(err)?;
    let (dmax, _) = max_invariant(&sys, &cfg).map_err(err)?;
    if !rmax.unwrap().approx_eq(&dmax, RECOVERY_TOL) {
        return Err("maximal multi-set from the path lift differs".into());
    }
    hulls_agree(&rmin.unwrap(), &dmin, RECOVERY_TOL).map_err(|e| format!("minimal: {e}"))
}

fn epsilon_for(seed: u64) -> f64 {
    [1e-2, 1e-3, 1e-4][(seed % 3) as usize]
}

pub fn check_outer_verifies(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let (outer, _) =
        min_invariant(&sys, &ApproximationConfig::new(epsilon_for(seed)), MinimalMode::Outer).map_err(err)?;
    let report = verify_invariance(&sys, &outer, false, ETA).map_err(err)?;
    if !report.invariant {
        return Err(format!("outer approximation not invariant (excess {:e})", report.worst_excess()));
    }
    Ok(())
}

pub fn check_inner_in_outer(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let cfg = ApproximationConfig::new(epsilon_for(seed));
    let (inner, _) = min_invariant(&sys, &cfg, MinimalMode::Inner).map_err(err)?;
    let (outer, _) = min_invariant(&sys, &cfg, MinimalMode::Outer).map_err(err)?;
    if !outer.includes(&inner, ETA) {
        return Err("inner approximation sticks out of the outer one".into());
    }
    Ok(())
}

/// Runs `check` on seeds `0..count`, returning the failures.
pub fn run_suite(check: Check, base: u64, count: u64) -> Vec<(u64, String)> {
    (0..count)
        .filter_map(|i| {
            let seed = base.wrapping_add(i);
            check(seed).err().map(|e| (seed, e))
        })
        .collect()
}
