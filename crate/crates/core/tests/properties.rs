mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

use common::*;
use switchsafe::automaton::{dwell_graph, reduce, DwellKind};
use switchsafe::engine::{
    dwell_closed_form_max, max_invariant, min_invariant, safe_set, stability_certificate_seeded, ApproximationConfig,
    CertificateSeed, MaxConfig, MinimalMode,
};
use switchsafe::geometry::{linear_image, minkowski_sum, point_distance, Polytope};
use switchsafe::system::{Mode, SwitchedSystem};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(20_241_015),
        ..ProptestConfig::default()
    }
}

macro_rules! seeded {
    ($($name:ident => $check:path),* $(,)?) => {
        proptest! {
            #![proptest_config(config())]
            $(
                #[test]
                fn $name(seed in any::<u64>()) {
                    if let Err(e) = $check(seed) {
                        prop_assert!(false, "seed {}: {}", seed, e);
                    }
                }
            )*
        }
    };
}

seeded! {
    forward_sets_are_nested => check_nesting,
    forward_growth_bounded_by_certificate => check_sandwich,
    backward_sets_shrink => check_antimonotone,
    forward_maps_split_over_minkowski_sums => check_splitting,
    reduced_forward_sets_sandwiched => check_reduced_sandwich,
    reduction_recovers_direct_sets => check_reduction_recovery,
    product_lift_recovers_direct_sets => check_tlift_recovery,
    path_lift_recovers_direct_sets => check_plift_recovery,
    outer_approximations_are_invariant => check_outer_verifies,
    inner_approximations_inside_outer => check_inner_in_outer,
    trajectories_approach_outer_sets => check_trajectories,
    safe_set_matches_grid_search => check_safe_grid,
    dwell_closed_form_matches_direct => check_dwell_closed_form,
}

fn sample(r: &mut rand_chacha::ChaCha8Rng, p: &Polytope) -> DVector<f64> {
    let dim = p.dim();
    let lo: Vec<f64> = (0..dim).map(|i| -p.support(&-unit(dim, i))).collect();
    let hi: Vec<f64> = (0..dim).map(|i| p.support(&unit(dim, i))).collect();
    DVector::from_fn(dim, |i, _| if hi[i] > lo[i] { r.gen_range(lo[i]..=hi[i]) } else { lo[i] })
}

fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[i] = 1.0;
    e
}

/// Simulated states approach the outer minimal approximation at the rate
/// the ball-seeded certificate promises: `d(x(t), S) <= Γ ρ^t ‖x(0)‖ + ε`.
fn check_trajectories(seed: u64) -> Result<(), String> {
    let sys = random_system(seed);
    let mut r = rng(seed ^ 0x7777);
    let eps = 1e-3;
    let (outer, _) = min_invariant(&sys, &ApproximationConfig::new(eps), MinimalMode::Outer).map_err(err)?;
    let cert = stability_certificate_seeded(&sys, 0.15, CertificateSeed::UnitBall, 10_000).map_err(err)?;
    let mut z = r.gen_range(0..sys.node_count());
    let mut x = sample(&mut r, sys.constraint(z).map_err(err)?);
    let c = x.amax();
    for t in 0..40 {
        let d = outer
            .member(z)
            .pieces()
            .iter()
            .map(|p| point_distance(&x, p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let bound = cert.gamma * c * cert.rho.powi(t) + eps;
        if d > bound + 1e-9 {
            return Err(format!("t={t}: distance {d} above {bound}"));
        }
        let out: Vec<_> = sys.graph().out_edges(z).collect();
        let e = out[r.gen_range(0..out.len())];
        let mode = sys.mode(e.label);
        let w = sample(&mut r, &mode.w);
        x = &mode.a * &x + w;
        z = e.target;
    }
    Ok(())
}

/// Worst constraint excess of every grid point over all walks of `depth`
/// edges from node 0, with the disturbance contribution carried as the
/// exact reachable set along the walk.
fn worst_excess(sys: &SwitchedSystem, grid: &[DVector<f64>], depth: usize) -> Vec<f64> {
    fn go(
        sys: &SwitchedSystem,
        node: usize,
        left: usize,
        phi: &DMatrix<f64>,
        reach: &Polytope,
        grid: &[DVector<f64>],
        worst: &mut [f64],
    ) {
        for row in sys.constraint(node).unwrap().hrep().unwrap() {
            let h = reach.support(&row.normal);
            let a = phi.transpose() * &row.normal;
            for (k, p) in grid.iter().enumerate() {
                worst[k] = worst[k].max(a.dot(p) + h - row.offset);
            }
        }
        if left == 0 {
            return;
        }
        for e in sys.graph().out_edges(node) {
            let m = sys.mode(e.label);
            let next = minkowski_sum(&linear_image(&m.a, reach).unwrap(), &m.w).unwrap();
            go(sys, e.target, left - 1, &(&m.a * phi), &next, grid, worst);
        }
    }
    let mut worst = vec![f64::NEG_INFINITY; grid.len()];
    let n = sys.dim();
    go(sys, 0, depth, &DMatrix::identity(n, n), &Polytope::zero(n), grid, &mut worst);
    worst
}

fn walk_count(sys: &SwitchedSystem, depth: usize) -> f64 {
    let mut count = vec![0.0; sys.node_count()];
    count[0] = 1.0;
    let mut total = 1.0;
    for _ in 0..depth {
        let mut next = vec![0.0; count.len()];
        for e in sys.graph().edges() {
            next[e.target] += count[e.source];
        }
        total += next.iter().sum::<f64>();
        count = next;
    }
    total
}

/// The safe set from node 0 holds exactly the grid points that keep every
/// constraint along every walk, checked up to one step past the fixpoint.
fn check_safe_grid(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let nominal = r.gen_bool(0.2);
    let sys = system_with(&mut r, 2, 3, 2, nominal);
    let (ms, trace) = max_invariant(&sys, &MaxConfig::with_eta(ETA)).map_err(err)?;
    let safe = safe_set(&sys, &ms, Some(&[0])).map_err(err)?;
    let depth = trace.iterations + 1;
    if walk_count(&sys, depth) > 20_000.0 {
        return Ok(());
    }
    let x0 = sys.constraint(0).map_err(err)?;
    let (h0, h1) = (x0.support(&unit(2, 0)), x0.support(&unit(2, 1)));
    let steps = 10;
    let grid: Vec<DVector<f64>> = (0..=steps)
        .flat_map(|i| {
            (0..=steps).map(move |k| {
                DVector::from_vec(vec![
                    h0 * (2.0 * i as f64 / steps as f64 - 1.0),
                    h1 * (2.0 * k as f64 / steps as f64 - 1.0),
                ])
            })
        })
        .collect();
    let worst = worst_excess(&sys, &grid, depth);
    for (p, &v) in grid.iter().zip(&worst) {
        if v > 1e-7 && safe.contains_point(p, 0.0) {
            return Err(format!("{p:?} violates a constraint by {v} but lies in the safe set"));
        }
        if v < -1e-7 && !safe.contains_point(p, 1e-9) {
            return Err(format!("{p:?} stays admissible but lies outside the safe set"));
        }
    }
    Ok(())
}

/// Closed-form maximal multi-sets of random scalar dwell-time systems agree
/// with the direct backward iteration.
fn check_dwell_closed_form(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let kind = if r.gen_bool(0.5) { DwellKind::Min } else { DwellKind::Max };
    let modes = r.gen_range(if kind == DwellKind::Min { 2 } else { 1 }..=3);
    let tau = r.gen_range(1..=3);
    let g = dwell_graph(kind, modes, tau).map_err(err)?;
    let ms = (0..modes)
        .map(|_| {
            let s = r.gen_range(0.2..0.8);
            let a = contraction(&mut r, 1, s);
            Mode::new(a, random_box(&mut r, 1, 0.02, 0.12))
        })
        .collect();
    let y: Vec<usize> = match kind {
        DwellKind::Min => {
            let block = (modes - 1) * (tau - 1) + 1;
            (0..modes).map(|i| i * block).collect()
        }
        DwellKind::Max => vec![0],
    };
    let sys = SwitchedSystem::new(1, ms, g, None)
        .and_then(|s| s.with_common_constraint(Polytope::symmetric_box(&[1.0])))
        .map_err(err)?;
    let plan = reduce(sys.graph(), &y, tau).map_err(err)?;
    let cfg = MaxConfig::with_eta(ETA);
    let closed = dwell_closed_form_max(&sys, &plan, kind, &cfg).map_err(err)?;
    let (direct, _) = max_invariant(&sys, &cfg).map_err(err)?;
    if !closed.maximal.approx_eq(&direct, RECOVERY_TOL) {
        return Err(format!("{kind:?} N={modes} tau={tau}: closed form differs"));
    }
    Ok(())
}
