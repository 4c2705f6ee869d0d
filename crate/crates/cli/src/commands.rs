use std::path::Path;

use serde_json::{json, Map, Value};

use switchsafe::automaton::{
    dwell_graph, graph_hash, infer_dwell, lift_p, lift_t, minimal_unavoidable, reduce, DwellKind, GraphJson,
    LabeledGraph, LiftIndexMap, ReductionPlan,
};
use switchsafe::engine::{
    dwell_closed_form_max, linear_fast_max, max_from_reduced, max_invariant, min_invariant, min_invariant_reduced,
    outer_with, recover_from_plift, recover_from_tlift, safe_set, stability_certificate, stability_certificate_seeded,
    verify_certificate, verify_invariance, ApproximationConfig, CertificateSeed, InvarianceReport, MaxConfig,
    MinimalMode, MultiSet, SequenceTrace, SetKind, StabilityCertificate,
};
use switchsafe::geometry::PolytopeJson;
use switchsafe::system::{build_plift_system, build_tlift_system, system_hash, SwitchedSystem};

use crate::io::{load_graph, load_multiset, load_system, node_list};
use crate::{plot, Artifact, CliError, Command, DwellArg, MaxMethod, ModeArg, Report, SeedArg};

pub fn dispatch(cmd: &Command, eta: f64) -> Result<Report, CliError> {
    let prov = Provenance::new(cmd, eta);
    match cmd {
        Command::Validate { system } => validate(system),
        Command::Certificate { system, lambda0, budget, seed } => certificate(prov, system, *lambda0, *budget, *seed),
        Command::MinInvariant { system, epsilon, mode, lambda, k, lambda0, budget, y, horizon } => {
            let sys = load_system(system)?;
            let mut cfg = ApproximationConfig::new(*epsilon);
            cfg.eta = eta;
            cfg.lambda0 = *lambda0;
            cfg.budget = *budget;
            cfg.lambda = *lambda;
            let plan = plan_for(sys.graph(), y.as_deref(), *horizon)?;
            min_command(prov, &sys, &cfg, *mode, *k, plan.as_ref())
        }
        Command::MaxInvariant { system, method, y, horizon, kind, product, path, budget, gamma, rho } => {
            let sys = load_system(system)?;
            let cert = supplied(*gamma, *rho)?;
            let cfg = MaxConfig { eta, budget: *budget, certificate: cert };
            let opts = MaxSpec {
                method: *method,
                y: y.as_deref(),
                horizon: *horizon,
                kind: *kind,
                product: *product,
                path: *path,
            };
            max_command(prov, &sys, &cfg, &opts)
        }
        Command::SafeSet { system, multiset, nodes } => {
            let sys = load_system(system)?;
            let (ms, _) = load_multiset(multiset, &sys)?;
            let y = nodes.as_deref().map(|n| node_list(sys.graph(), n)).transpose()?;
            let set = safe_set(&sys, &ms, y.as_deref())?;
            let mut out = to_map(serde_json::to_value(PolytopeJson::from(&set)).expect("polytope serializes"));
            out.insert("system".into(), json!(system_hash(&sys)));
            out.insert("provenance".into(), prov.finish(None, None));
            let summary = format!("safe set from {} node(s)", y.as_ref().map_or(sys.node_count(), Vec::len));
            Ok(done(Value::Object(out), summary))
        }
        Command::Reduce { graph, y, horizon } => {
            let g = load_graph(graph)?;
            let plan = plan_for(&g, y.as_deref(), *horizon)?
                .ok_or_else(|| CliError::Input("reduce needs --y or --horizon".into()))?;
            let j = reduced_graph_json(&g, &plan);
            let summary = format!(
                "reduced graph: {} nodes, {} edges, walk lengths {}..={}",
                plan.graph.node_count(),
                plan.graph.edges().len(),
                plan.theta_min,
                plan.theta_max
            );
            Ok(done(with_provenance(j, prov), summary))
        }
        Command::Lift { graph, product, path } => {
            let g = load_graph(graph)?;
            let map = match (product, path) {
                (Some(t), None) => lift_t(&g, *t),
                (None, Some(p)) => lift_p(&g, *p),
                _ => return Err(CliError::Input("give exactly one of --product and --path".into())),
            }
            .map_err(|e| CliError::Input(e.to_string()))?;
            let j = lifted_graph_json(&g, &map);
            let summary = format!("lifted graph: {} nodes, {} edges", map.graph.node_count(), map.graph.edges().len());
            Ok(done(with_provenance(j, prov), summary))
        }
        Command::DwellGraph { kind, modes, tau } => {
            let g = dwell_graph(dwell_kind(*kind), *modes, *tau).map_err(|e| CliError::Input(e.to_string()))?;
            let mut j = GraphJson::from(&g);
            j.provenance = Some(json!({"operation": "dwell-graph"}));
            let summary = format!("dwell-time graph: {} nodes, {} edges", g.node_count(), g.edges().len());
            Ok(done(with_provenance(j, prov), summary))
        }
        Command::FastLinearMax { system, gamma, rho, product, lambda0, budget } => {
            let sys = load_system(system)?;
            let cert = match supplied(*gamma, *rho)? {
                Some(c) => c,
                None => stability_certificate(&sys, *lambda0, *budget)?,
            };
            fast_command(prov, &sys, &cert, *product, eta)
        }
        Command::Plot { multiset, system } => {
            let sys = system.as_deref().map(load_system).transpose()?;
            let (artifact, summary) = plot::plot_file(multiset, sys.as_ref())?;
            Ok(Report { artifact, summary, status: 0 })
        }
        Command::Verify { system, multiset, admissible } => {
            let sys = load_system(system)?;
            let (ms, _) = load_multiset(multiset, &sys)?;
            let report = check(&sys, &ms, *admissible, eta)?;
            let passes = report.passes();
            let out = json!({
                "system": system_hash(&sys),
                "kind": ms.kind.as_str(),
                "verdict": passes,
                "report": report_json(&sys, &report),
                "provenance": prov.finish(None, None),
            });
            let summary = if passes {
                "verified: invariant".to_string()
            } else {
                format!("rejected: worst excess {:.3e}", report.worst_excess())
            };
            Ok(Report { artifact: Artifact::Json(out), summary, status: if passes { 0 } else { 1 } })
        }
    }
}

struct Provenance {
    command: &'static str,
    options: Value,
    eta: f64,
}

impl Provenance {
    fn new(cmd: &Command, eta: f64) -> Self {
        let options = match serde_json::to_value(cmd).expect("command serializes") {
            Value::Object(mut m) => m.remove(cmd.verb()).unwrap_or(Value::Null),
            _ => Value::Null,
        };
        Provenance { command: cmd.verb(), options, eta }
    }

    fn finish(&self, cert: Option<&StabilityCertificate>, trace: Option<&SequenceTrace>) -> Value {
        json!({
            "command": self.command,
            "options": self.options,
            "tolerance": self.eta,
            "certificate": cert.map(certificate_json),
            "trace": trace.map(trace_json),
        })
    }
}

fn done(v: Value, summary: String) -> Report {
    Report { artifact: Artifact::Json(v), summary, status: 0 }
}

fn to_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("serialized structs are objects"),
    }
}

fn with_provenance(mut j: GraphJson, prov: Provenance) -> Value {
    let mut p = to_map(j.provenance.take().unwrap_or_else(|| json!({})));
    for (k, v) in to_map(prov.finish(None, None)) {
        p.entry(k).or_insert(v);
    }
    j.provenance = Some(Value::Object(p));
    serde_json::to_value(j).expect("graph serializes")
}

fn certificate_json(c: &StabilityCertificate) -> Value {
    json!({
        "gamma": c.gamma,
        "rho": c.rho,
        "lambda0": c.lambda0,
        "k0": c.k0,
        "method": c.method.as_str(),
    })
}

fn trace_json(t: &SequenceTrace) -> Value {
    json!({
        "iterations": t.iterations,
        "termination": t.termination.as_str(),
        "last_delta": t.last_delta(),
        "a_priori_bound": t.a_priori_bound,
    })
}

fn report_json(sys: &SwitchedSystem, r: &InvarianceReport) -> Value {
    let g = sys.graph();
    json!({
        "invariant": r.invariant,
        "admissible": r.admissible,
        "violations": r.violations.iter().map(|v| json!({
            "source": g.name(v.source),
            "target": g.name(v.target),
            "label": v.label,
            "excess": v.excess,
        })).collect::<Vec<_>>(),
        "constraint_violations": r.constraint_violations.iter().map(|(j, e)| json!({
            "node": g.name(*j),
            "excess": e,
        })).collect::<Vec<_>>(),
    })
}

fn dwell_kind(k: DwellArg) -> DwellKind {
    match k {
        DwellArg::Min => DwellKind::Min,
        DwellArg::Max => DwellKind::Max,
    }
}

fn supplied(gamma: Option<f64>, rho: Option<f64>) -> Result<Option<StabilityCertificate>, CliError> {
    match (gamma, rho) {
        (Some(g), Some(r)) => {
            Ok(Some(StabilityCertificate::supplied(g, r).map_err(|e| CliError::Input(e.to_string()))?))
        }
        (None, None) => Ok(None),
        _ => Err(CliError::Input("--gamma and --rho go together".into())),
    }
}

/// The verification shared by `verify` and the computing commands: maximal
/// multi-sets are also checked against the constraints.
fn check(sys: &SwitchedSystem, ms: &MultiSet, admissible: bool, eta: f64) -> Result<InvarianceReport, CliError> {
    let admissible = (admissible || ms.kind == SetKind::Maximal) && sys.constraints().is_some();
    Ok(verify_invariance(sys, ms, admissible, eta)?)
}

fn validate(path: &Path) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let r = sys.validate();
    let out = json!({
        "valid": r.passes(),
        "dim": sys.dim(),
        "nodes": sys.node_count(),
        "modes": sys.modes().len(),
        "nominal": r.nominal,
        "strongly_connected": r.graph.strongly_connected,
        "issues": r.issues,
        "system": system_hash(&sys),
    });
    if r.passes() {
        Ok(done(out, "valid system".into()))
    } else {
        Ok(Report {
            artifact: Artifact::Json(out),
            summary: format!("invalid input: {}", r.issues.join("; ")),
            status: 2,
        })
    }
}

fn certificate(prov: Provenance, path: &Path, lambda0: f64, budget: usize, seed: SeedArg) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let cert = match seed {
        SeedArg::Auto => stability_certificate(&sys, lambda0, budget)?,
        SeedArg::Disturbances => stability_certificate_seeded(&sys, lambda0, CertificateSeed::Disturbances, budget)?,
        SeedArg::UnitBall => stability_certificate_seeded(&sys, lambda0, CertificateSeed::UnitBall, budget)?,
    };
    let verified = verify_certificate(&sys, &cert)?;
    let mut out = to_map(certificate_json(&cert));
    out.insert("verified".into(), json!(verified));
    out.insert("system".into(), json!(system_hash(&sys)));
    out.insert("provenance".into(), prov.finish(Some(&cert), None));
    let summary = format!("Γ = {:.6}, ρ = {:.6} (k0 = {})", cert.gamma, cert.rho, cert.k0);
    Ok(done(Value::Object(out), summary))
}

fn plan_for(g: &LabeledGraph, y: Option<&str>, horizon: Option<usize>) -> Result<Option<ReductionPlan>, CliError> {
    let input = |e: switchsafe::automaton::GraphError| CliError::Input(e.to_string());
    match (y, horizon) {
        (None, None) => Ok(None),
        (None, Some(m)) => {
            let y = minimal_unavoidable(g, m).map_err(input)?;
            Ok(Some(reduce(g, &y, m).map_err(input)?))
        }
        (Some(names), m) => {
            let y = node_list(g, names)?;
            let m = m.unwrap_or(g.node_count());
            Ok(Some(reduce(g, &y, m).map_err(input)?))
        }
    }
}

fn walks_json(g: &LabeledGraph, plan: &ReductionPlan) -> Value {
    Value::Array(
        plan.edges
            .iter()
            .map(|e| {
                json!({
                    "source": g.name(plan.y[e.source]),
                    "target": g.name(plan.y[e.target]),
                    "labels": e.walk.labels,
                    "nodes": e.walk.nodes.iter().map(|&n| g.name(n)).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn reduced_graph_json(g: &LabeledGraph, plan: &ReductionPlan) -> GraphJson {
    let mut j = GraphJson::from(&plan.graph);
    j.provenance = Some(json!({
        "operation": "reduce",
        "parent": graph_hash(g),
        "y": plan.y.iter().map(|&n| g.name(n)).collect::<Vec<_>>(),
        "horizon": plan.horizon,
        "theta_min": plan.theta_min,
        "theta_max": plan.theta_max,
        "walks": walks_json(g, plan),
    }));
    j
}

fn lifted_graph_json(g: &LabeledGraph, map: &LiftIndexMap) -> GraphJson {
    let mut j = GraphJson::from(&map.graph);
    let members: Map<String, Value> = map
        .members
        .iter()
        .enumerate()
        .map(|(p, ls)| (g.name(p).to_string(), json!(ls.iter().map(|&l| map.graph.name(l)).collect::<Vec<_>>())))
        .collect();
    j.provenance = Some(json!({
        "operation": match map.kind {
            switchsafe::automaton::LiftKind::Product => "product-lift",
            switchsafe::automaton::LiftKind::Path => "path-lift",
        },
        "parent": graph_hash(g),
        "parameter": map.parameter,
        "label_sequences": map.label_sequences,
        "members": members,
    }));
    j
}

fn multiset_output(
    sys: &SwitchedSystem,
    ms: &MultiSet,
    prov: &Provenance,
    cert: Option<&StabilityCertificate>,
    trace: Option<&SequenceTrace>,
    extra: Map<String, Value>,
) -> Result<(Value, bool), CliError> {
    let report = check(sys, ms, false, prov.eta)?;
    let mut j = ms.to_json(sys);
    j.extra.insert("invariance_verified".into(), json!(report.passes()));
    j.extra.extend(extra);
    j.extra.insert("provenance".into(), prov.finish(cert, trace));
    Ok((serde_json::to_value(j).expect("multi-set serializes"), report.passes()))
}

fn min_command(
    prov: Provenance,
    sys: &SwitchedSystem,
    cfg: &ApproximationConfig,
    mode: ModeArg,
    k: Option<usize>,
    plan: Option<&ReductionPlan>,
) -> Result<Report, CliError> {
    let mode = match mode {
        ModeArg::Inner => MinimalMode::Inner,
        ModeArg::Outer => MinimalMode::Outer,
    };
    let mut cfg = cfg.clone();
    let mut extra = Map::new();
    let (ms, trace, cert) = match (plan, k) {
        (Some(_), Some(_)) => return Err(CliError::Input("--k cannot be combined with a reduction".into())),
        (Some(plan), None) => {
            let (ms, trace) = min_invariant_reduced(sys, plan, &cfg, mode)?;
            extra.insert("reduction".into(), reduction_json(sys.graph(), plan));
            (ms, Some(trace), None)
        }
        (None, Some(k)) => {
            if mode == MinimalMode::Inner {
                return Err(CliError::Input("--k applies to the outer method only".into()));
            }
            let lambda = cfg.lambda.expect("clap requires --lambda with --k");
            (outer_with(sys, k, lambda, &cfg)?, None, None)
        }
        (None, None) => {
            let cert = if sys.is_nominal() { None } else { Some(stability_certificate(sys, cfg.lambda0, cfg.budget)?) };
            cfg.certificate = cert;
            let (ms, trace) = min_invariant(sys, &cfg, mode)?;
            (ms, Some(trace), cert)
        }
    };
    let (out, verified) = multiset_output(sys, &ms, &prov, cert.as_ref(), trace.as_ref(), extra)?;
    let summary = format!(
        "{}: {} nodes, iteration {}, invariance {}",
        ms.kind.as_str(),
        ms.len(),
        ms.iteration,
        if verified { "verified" } else { "not verified" }
    );
    Ok(done(out, summary))
}

fn reduction_json(g: &LabeledGraph, plan: &ReductionPlan) -> Value {
    json!({
        "y": plan.y.iter().map(|&n| g.name(n)).collect::<Vec<_>>(),
        "horizon": plan.horizon,
        "theta_min": plan.theta_min,
        "theta_max": plan.theta_max,
    })
}

struct MaxSpec<'a> {
    method: MaxMethod,
    y: Option<&'a str>,
    horizon: Option<usize>,
    kind: Option<DwellArg>,
    product: Option<usize>,
    path: Option<usize>,
}

fn max_command(prov: Provenance, sys: &SwitchedSystem, cfg: &MaxConfig, opts: &MaxSpec) -> Result<Report, CliError> {
    let mut extra = Map::new();
    let need = |what: &str| CliError::Input(format!("method {:?} needs {what}", opts.method));
    let (ms, trace) = match opts.method {
        MaxMethod::Direct => max_invariant(sys, cfg)?,
        MaxMethod::Reduced | MaxMethod::ClosedForm => {
            let kind = match (opts.method, opts.kind) {
                (MaxMethod::ClosedForm, Some(k)) => Some(dwell_kind(k)),
                (MaxMethod::ClosedForm, None) => Some(
                    [DwellKind::Min, DwellKind::Max]
                        .into_iter()
                        .find(|&k| infer_dwell(sys.graph(), k).is_some())
                        .ok_or_else(|| CliError::Input("graph is not a dwell-time graph".into()))?,
                ),
                _ => None,
            };
            let plan = match (kind, opts.y, opts.horizon) {
                (Some(k), None, None) => dwell_plan(sys.graph(), k)?,
                _ => plan_for(sys.graph(), opts.y, opts.horizon)?.ok_or_else(|| need("--y or --horizon"))?,
            };
            let r = match kind {
                Some(k) => dwell_closed_form_max(sys, &plan, k, cfg)?,
                None => max_from_reduced(sys, &plan, cfg)?,
            };
            let mut red = reduction_json(sys.graph(), &plan);
            red["reduced_trace"] = trace_json(&r.reduced_trace);
            extra.insert("reduction".into(), red);
            (r.maximal, r.trace)
        }
        MaxMethod::ProductLift => {
            let t = opts.product.ok_or_else(|| need("--product"))?;
            let (lifted, _) = build_tlift_system(sys, t).map_err(|e| CliError::Input(e.to_string()))?;
            let (lmax, ltrace) = max_invariant(&lifted, cfg)?;
            let (_, ms) = recover_from_tlift(sys, t, None, Some(&lmax))?;
            extra
                .insert("lift".into(), json!({"kind": "product", "parameter": t, "lifted_trace": trace_json(&ltrace)}));
            (ms.expect("maximal recovery requested"), ltrace)
        }
        MaxMethod::PathLift => {
            let p = opts.path.ok_or_else(|| need("--path"))?;
            let (lifted, map) = build_plift_system(sys, p).map_err(|e| CliError::Input(e.to_string()))?;
            let (lmax, ltrace) = max_invariant(&lifted, cfg)?;
            let (_, ms) = recover_from_plift(sys, &map, None, Some(&lmax), cfg.eta)?;
            extra.insert("lift".into(), json!({"kind": "path", "parameter": p, "lifted_trace": trace_json(&ltrace)}));
            (ms.expect("maximal recovery requested"), ltrace)
        }
    };
    let (out, verified) = multiset_output(sys, &ms, &prov, cfg.certificate.as_ref(), Some(&trace), extra)?;
    let summary = format!(
        "S_M: {} nodes, {} after {} iterations, invariance {}",
        ms.len(),
        trace.termination.as_str(),
        trace.iterations,
        if verified { "verified" } else { "not verified" }
    );
    Ok(done(out, summary))
}

/// Reduction onto the anchor nodes (minimum dwell) or the hub (maximum
/// dwell), with horizon τ.
fn dwell_plan(g: &LabeledGraph, kind: DwellKind) -> Result<ReductionPlan, CliError> {
    let (n, tau) = infer_dwell(g, kind).ok_or_else(|| CliError::Input("graph does not match the dwell kind".into()))?;
    let y: Vec<usize> = match kind {
        DwellKind::Min => {
            let block = (n - 1) * (tau - 1) + 1;
            (0..n).map(|i| i * block).collect()
        }
        DwellKind::Max => vec![0],
    };
    reduce(g, &y, tau.max(1)).map_err(|e| CliError::Input(e.to_string()))
}

fn fast_command(
    prov: Provenance,
    sys: &SwitchedSystem,
    cert: &StabilityCertificate,
    t: Option<usize>,
    eta: f64,
) -> Result<Report, CliError> {
    if sys.node_count() != 1 || sys.modes().len() != 1 || !sys.is_nominal() {
        return Err(CliError::Input("fast-linear-max needs one node, one mode and no disturbance".into()));
    }
    let x = sys.constraint(0).map_err(|e| CliError::Input(e.to_string()))?;
    let (set, rep) = linear_fast_max(&sys.mode(1).a, x, cert, t, eta)?;
    let ms = MultiSet::new(sys, SetKind::Maximal, rep.total, vec![switchsafe::engine::Member::convex(set)])?;
    let mut extra = Map::new();
    extra.insert(
        "fast".into(),
        json!({
            "k_bound": rep.k_bound,
            "t": rep.t,
            "predicted": rep.predicted,
            "lifted_iterations": rep.lifted_iterations,
            "recovery_iterations": rep.recovery_iterations,
            "total": rep.total,
        }),
    );
    let (out, verified) = multiset_output(sys, &ms, &prov, Some(cert), None, extra)?;
    let summary = format!(
        "S_M via T = {}: {} lifted + {} recovery iterations (predicted {}), invariance {}",
        rep.t,
        rep.lifted_iterations,
        rep.recovery_iterations,
        rep.predicted,
        if verified { "verified" } else { "not verified" }
    );
    Ok(done(out, summary))
}
