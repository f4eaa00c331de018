use serde::Serialize;
use serde_json::{json, Value};

use super::output::field;
use super::{
    AdvantageArgs, DesignArgs, Failure, Globals, HaarArgs, ListArgs, MassArgs, MitigationArgs, PowerArgs, Rendered,
};
use crate::biclique::{
    crossover, edge_count_threshold, sig6, fourier_mass_total, low_degree_mass_budget, phase_csv, phase_diagram,
    BicliqueInstance, CopyRule, Detector, LocalPlanGrid, ScanCaps, MAX_MASS_POSITIONS,
};
use crate::ensembles::{design_certify, MomentMode};
use crate::haar::{
    beta_series_check, centered_moment_operator, centered_moment_operator_subset_form, derangement_overlap_check,
    gamma_bound_check, haar_unitary, moment_operator, moment_trace_exact, GAMMA_CONSTANT,
};
use crate::lowdeg::{
    bound_audit, copywise_advantage, degree_advantage, AuditInstance, AuditKind, MeasurementPlan, Mode,
};
use crate::mitigation::{
    hypothesis_test_sim, purity_decay_check, reduced_state_audit, InputState, NoisyCircuitSpec,
};
use crate::qcore::{permutation_operator, CMatrix, Permutation, QuditRegister, C64};
use crate::registry::{Kind, Registry};
use crate::rng::stream;

// Stream labels, one per independent random source of a run.
const PLAN: u64 = 1;
const RUN: u64 = 2;
const AUDIT: u64 = 3;

fn missing(name: &str) -> Failure {
    Failure::Parse(format!("missing required field '{name}'"))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize to JSON")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => field(s),
        Value::Array(items) => field(&items.iter().map(cell).collect::<Vec<_>>().join(" ")),
        other => field(&other.to_string()),
    }
}

/// CSV from flat JSON objects; the header is the key set of the first row.
fn table(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| field(k)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = keys.iter().map(|k| cell(r.get(k.as_str()).unwrap_or(&Value::Null))).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn lowdeg_mode(mode: &str, samples: usize) -> Result<Mode, Failure> {
    match mode {
        "exact" | "moment" => Ok(Mode::Moment),
        "enumeration" => Ok(Mode::Enumeration),
        "mc" | "monte-carlo" => Ok(Mode::MonteCarlo { samples }),
        other => Err(Failure::Parse(format!("field 'mode': expected exact|enumeration|moment|mc, got '{other}'"))),
    }
}

pub(super) fn advantage(a: &AdvantageArgs, g: &Globals) -> Result<Rendered, Failure> {
    let reg = Registry::default();
    let ens = reg.ensemble(a.ensemble.as_deref().ok_or_else(|| missing("ensemble"))?)?;
    let plan_text = a.plan.as_deref().unwrap_or("comp-basis,m=1");
    let plan = reg.plan(plan_text, &ens.register, &mut stream(g.seed, &[PLAN]))?;
    let k = a.k.unwrap_or(1);
    let mode = lowdeg_mode(a.mode.as_deref().unwrap_or("exact"), a.samples.unwrap_or(10_000))?;
    let mut rng = stream(g.seed, &[RUN]);
    let report = match a.d_per_copy {
        Some(dpc) => copywise_advantage(&ens, &plan, dpc, k, mode, &mut rng)?,
        None => degree_advantage(&ens, &plan, k, mode, &mut rng)?,
    };
    let audit = match a.audit.as_deref() {
        None => None,
        Some(tag) => {
            let kind = AuditKind::parse(tag).ok_or_else(|| Failure::Parse(format!("field 'audit': unknown bound '{tag}'")))?;
            let inst = match kind {
                AuditKind::LocalMeasurements => AuditInstance::LocalMeasurements { ensemble: &ens, plan: &plan, k, mode },
                AuditKind::CopyWise => {
                    AuditInstance::CopyWise { ensemble: &ens, plan: &plan, d_per_copy: a.d_per_copy.unwrap_or(k), k, mode }
                }
                _ => {
                    return Err(Failure::Parse(format!(
                        "field 'audit': '{tag}' needs inputs beyond a descriptor; use local or copy-wise"
                    )))
                }
            };
            Some(bound_audit(inst, &mut stream(g.seed, &[AUDIT]))?)
        }
    };
    let rows: Vec<Value> = report
        .coefficients
        .iter()
        .map(|c| {
            json!({
                "positions": c.positions.iter().map(|(i, j)| format!("{i}:{j}")).collect::<Vec<_>>(),
                "exponents": c.exponents,
                "value_sq": c.value_sq,
            })
        })
        .collect();
    let mut csv = table(&rows);
    if csv.is_empty() {
        csv = "positions,exponents,value_sq\n".into();
    }
    let summary = format!(
        "advantage {} k={} total={} ({}, {} coefficients)",
        ens.name,
        k,
        sig6(report.total),
        report.method,
        report.coefficients.len()
    );
    let audit_failure = audit.as_ref().filter(|r| !r.pass).map(|r| r.inequality());
    Ok(Rendered {
        json: json!({
            "command": "advantage",
            "seed": g.seed,
            "ensemble": a.ensemble,
            "plan": plan_text,
            "report": to_value(&report),
            "audit": audit.as_ref().map(to_value),
        }),
        csv,
        summary,
        audit_failure,
    })
}

pub(super) fn design_check(a: &DesignArgs, g: &Globals) -> Result<Rendered, Failure> {
    let ens = Registry::default().ensemble(a.ensemble.as_deref().ok_or_else(|| missing("ensemble"))?)?;
    let k = a.k.unwrap_or(2);
    let mode = match a.mode.as_deref().unwrap_or("exact") {
        "exact" => MomentMode::Exact,
        "mc" | "monte-carlo" => MomentMode::MonteCarlo { samples: a.samples.unwrap_or(10_000) },
        other => return Err(Failure::Parse(format!("field 'mode': expected exact|mc, got '{other}'"))),
    };
    let report = design_certify(&ens, k, mode, &mut stream(g.seed, &[RUN]))?;
    let v = to_value(&report);
    Ok(Rendered {
        json: json!({ "command": "design-check", "seed": g.seed, "report": v }),
        csv: table(&[v.clone()]),
        summary: format!("design-check {} k={} epsilon={}", report.ensemble, k, sig6(report.epsilon)),
        audit_failure: None,
    })
}

pub(super) fn biclique_power(a: &PowerArgs, g: &Globals) -> Result<Rendered, Failure> {
    let ns = a.n.clone().unwrap_or_else(|| vec![64]);
    let ds = a.d.clone().unwrap_or_else(|| vec![2]);
    let lambdas = a.lambda.clone().unwrap_or_else(|| vec![4.0, 8.0, 16.0, 32.0]);
    let detector = Detector::parse(a.detector.as_deref().unwrap_or("edge-count"))?;
    let trials = a.trials.unwrap_or(200);
    let copies = a.m.map_or(CopyRule::EqualN, CopyRule::Fixed);
    let mut scan = ScanCaps::default();
    scan.t = a.scan_t.unwrap_or(scan.t);
    scan.t_prime = a.scan_t_prime.unwrap_or(scan.t_prime);
    scan.constant = a.scan_constant.unwrap_or(scan.constant);
    let mut cells = Vec::new();
    for &n in &ns {
        for &d in &ds {
            for &l in &lambdas {
                cells.push((n, d, l));
            }
        }
    }
    let rows = phase_diagram(&cells, copies, detector, trials, g.seed, scan)?;
    let mut crossings = Vec::new();
    for &n in &ns {
        for &d in &ds {
            let mut group: Vec<_> = rows.iter().filter(|r| r.n == n && r.d == d).cloned().collect();
            group.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
            crossings.push(json!({
                "n": n,
                "d": d,
                "crossover": crossover(&group, 0.5),
                "predicted": edge_count_threshold(n, d),
            }));
        }
    }
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.power), hi.max(r.power)));
    let summary = if rows.is_empty() {
        format!("biclique-power {} no trials", detector.name())
    } else {
        format!("biclique-power {} {} cells, power {}..{}", detector.name(), rows.len(), sig6(lo), sig6(hi))
    };
    Ok(Rendered {
        json: json!({
            "command": "biclique-power",
            "seed": g.seed,
            "detector": detector,
            "rows": to_value(&rows),
            "crossovers": crossings,
        }),
        csv: phase_csv(&rows),
        summary,
        audit_failure: None,
    })
}

pub(super) fn biclique_mass(a: &MassArgs, g: &Globals) -> Result<Rendered, Failure> {
    let n = a.n.unwrap_or(2);
    let d = a.d.unwrap_or(2);
    let inst = BicliqueInstance::new(n, d, a.lambda.unwrap_or(1.0), a.m.unwrap_or(n))?;
    let k = a.k.unwrap_or(2);
    if k > MAX_MASS_POSITIONS {
        return Err(Failure::Resource(format!("k = {k} exceeds the Fourier-mass cap of {MAX_MASS_POSITIONS} positions")));
    }
    let c = a.budget_constant.unwrap_or(8.0);
    let plan_name = a.plan.as_deref().unwrap_or("computational");
    let plan = match plan_name {
        "computational" => LocalPlanGrid::computational(inst.m, n, d),
        "random" => LocalPlanGrid::random(inst.m, n, d, &mut stream(g.seed, &[PLAN])),
        other => return Err(Failure::Parse(format!("field 'plan': expected computational|random, got '{other}'"))),
    };
    let mut rows = Vec::new();
    let mut prev = 0.0;
    let mut failure = None;
    for deg in 1..=k {
        let cumulative = fourier_mass_total(&inst, &plan, deg)?;
        let budget = low_degree_mass_budget(&inst, deg, c);
        let within = cumulative <= budget;
        if !within && failure.is_none() {
            failure = Some(format!("mass up to degree {deg}: {cumulative:.6e} <= budget {budget:.6e}"));
        }
        rows.push(json!({
            "degree": deg,
            "mass": cumulative - prev,
            "cumulative": cumulative,
            "budget": budget,
            "within_budget": within,
        }));
        prev = cumulative;
    }
    Ok(Rendered {
        json: json!({
            "command": "biclique-mass",
            "seed": g.seed,
            "instance": to_value(&inst),
            "plan": plan_name,
            "budget_constant": c,
            "rows": rows,
        }),
        csv: table(&rows),
        summary: format!("biclique-mass n={n} d={d} lambda={} total up to degree {k} = {}", inst.lambda, sig6(prev)),
        audit_failure: failure,
    })
}

fn scalars(task: &str, v: &Value, rows: &mut Vec<Value>) {
    if let Value::Object(map) = v {
        for (key, x) in map {
            match x {
                Value::Number(_) | Value::Bool(_) | Value::Null => rows.push(json!({ "task": task, "metric": key, "value": x })),
                _ => {}
            }
        }
    }
}

pub(super) fn mitigation(a: &MitigationArgs, g: &Globals) -> Result<Rendered, Failure> {
    let task = a.task.as_deref().unwrap_or("all");
    if !["purity", "reduced", "hypothesis", "all"].contains(&task) {
        return Err(Failure::Parse(format!("field 'task': expected purity|reduced|hypothesis|all, got '{task}'")));
    }
    let wants = |t: &str| task == "all" || task == t;
    let (n, l, kappa, trials) = (a.n.unwrap_or(4), a.l.unwrap_or(2), a.kappa.unwrap_or(0.3), a.trials.unwrap_or(500));
    let (eps, eps_star) = (a.eps.unwrap_or(0.0), a.eps_star.unwrap_or(0.0));
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("mitigation"));
    out.insert("seed".into(), json!(g.seed));
    out.insert("n".into(), json!(n));
    out.insert("l".into(), json!(l));
    out.insert("kappa".into(), json!(kappa));
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut headline = Vec::new();
    if wants("purity") {
        let r = purity_decay_check(n, l, kappa, trials, &mut stream(g.seed, &[RUN, 1]))?;
        if !r.pass {
            failures.push(format!("purity: {:.6e} <= {:.6e} + 3 * {:.3e}", r.mean, r.bound, r.stderr));
        }
        headline.push(format!("purity {:.6} (bound {:.6})", r.mean, r.bound));
        let v = to_value(&r);
        scalars("purity", &v, &mut rows);
        out.insert("purity".into(), v);
    }
    if wants("reduced") {
        let sites = a.sites.clone().unwrap_or_else(|| vec![0]);
        let spec = NoisyCircuitSpec::haar(n, l, kappa, InputState::Zero);
        let r = reduced_state_audit(&spec, &sites, trials, eps, eps_star, &mut stream(g.seed, &[RUN, 2]))?;
        if !r.pass {
            failures.push(format!(
                "reduced: exceedance {:.6e} <= {:.6e} + 3 * {:.3e}",
                r.exceedance, r.predicted_tail, r.exceedance_stderr
            ));
        }
        headline.push(format!("exceedance {:.4} (tail {:.4})", r.exceedance, r.predicted_tail));
        let v = to_value(&r);
        scalars("reduced", &v, &mut rows);
        out.insert("reduced".into(), v);
    }
    if wants("hypothesis") {
        let spec = NoisyCircuitSpec::haar(n, l, kappa, InputState::Alternative);
        let plan = MeasurementPlan::computational(QuditRegister::qubits(n)?, a.m.unwrap_or(1))?;
        let r = hypothesis_test_sim(&spec, &plan, a.k.unwrap_or(1), trials, &mut stream(g.seed, &[RUN, 3]))?;
        headline.push(format!("normalized advantage {:.6}", r.normalized));
        let v = to_value(&r);
        scalars("hypothesis", &v, &mut rows);
        rows.push(json!({ "task": "hypothesis", "metric": "total", "value": r.advantage.total }));
        out.insert("hypothesis".into(), v);
    }
    Ok(Rendered {
        json: Value::Object(out),
        csv: table(&rows),
        summary: format!("mitigation n={n} l={l} kappa={kappa}: {}", headline.join(", ")),
        audit_failure: if failures.is_empty() { None } else { Some(failures.join("; ")) },
    })
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).camax()
}

pub(super) fn haar_verify(a: &HaarArgs, g: &Globals) -> Result<Rendered, Failure> {
    let ds = a.d.clone().unwrap_or_else(|| vec![2, 3]);
    let t_max = a.t_max.unwrap_or(4);
    let w_max = a.w_max.unwrap_or(4);
    let mut rows = Vec::new();
    let mut push = |check: &str, d: usize, t: usize, value: f64, tolerance: f64, pass: bool| {
        rows.push(json!({ "check": check, "d": d, "t": t, "value": value, "tolerance": tolerance, "pass": pass }));
    };
    for &d in &ds {
        for k in 1..=3 {
            let m = moment_operator(d, k)?;
            let tr: C64 = m.matrix.trace();
            let exact_one = moment_trace_exact(d, k) == num_rational::BigRational::from_integer(1.into());
            let err = (tr - C64::new(1.0, 0.0)).norm();
            push("moment-trace", d, k, err, 1e-12, exact_one && err <= 1e-12);
        }
        for t in 1..=t_max {
            let gform = centered_moment_operator(d, t)?;
            let sform = centered_moment_operator_subset_form(d, t)?;
            let diff = max_diff(&gform.matrix, &sform.matrix);
            push("centered-vs-subset", d, t, diff, 1e-12, diff <= 1e-12);
        }
        let dim = d * d;
        let swap = permutation_operator(d, &Permutation::new(vec![1, 0])?)?;
        let id = CMatrix::identity(dim, dim);
        let closed = (&id + &swap) * C64::new(d as f64 / (d as f64 + 1.0), 0.0) - &id;
        let diff = max_diff(&centered_moment_operator(d, 2)?.matrix, &closed);
        push("t2-closed-form", d, 2, diff, 1e-12, diff <= 1e-12);
        let mut rng = stream(g.seed, &[RUN, d as u64]);
        for t in 2..=w_max {
            let bases: Vec<CMatrix> = (0..t).map(|_| haar_unitary(d, &mut rng)).collect();
            let mut worst: f64 = 0.0;
            let mut rhs = 0.0;
            let mut ok = true;
            for p in Permutation::all(t).into_iter().filter(|p| p.is_derangement()) {
                let c = derangement_overlap_check(&bases, &p)?;
                worst = worst.max(c.lhs);
                rhs = c.rhs;
                ok &= c.holds;
            }
            push("derangement-overlap", d, t, worst, rhs, ok);
        }
    }
    for d in [64usize, 256] {
        for t in 1..=6 {
            // Smallest constant that would still pass, against the frozen one.
            let (gammas, ok) = gamma_bound_check(d, t, GAMMA_CONSTANT);
            let needed = gammas
                .iter()
                .filter(|r| r.f > 0)
                .map(|r| r.gamma_abs.powf(1.0 / r.f as f64) * (d as f64).sqrt() / t as f64)
                .fold(0.0, f64::max);
            push("gamma-bound", d, t, needed, GAMMA_CONSTANT, ok);
        }
    }
    for d in [16u64, 64] {
        for s in 1..=6 {
            let c = beta_series_check(d, s, 4);
            push("beta-series", d as usize, s as usize, c.error, 2.0 * c.next_term, c.holds);
        }
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r["pass"] == json!(false))
        .map(|r| format!("{} d={} t={}: {} <= {}", r["check"].as_str().unwrap_or(""), r["d"], r["t"], r["value"], r["tolerance"]))
        .collect();
    let passed = rows.len() - failed.len();
    Ok(Rendered {
        summary: format!("haar-verify {passed}/{} checks passed", rows.len()),
        csv: table(&rows),
        json: json!({ "command": "haar-verify", "seed": g.seed, "checks": rows }),
        audit_failure: if failed.is_empty() { None } else { Some(failed.join("; ")) },
    })
}

pub(super) fn list(a: &ListArgs, _g: &Globals) -> Result<Rendered, Failure> {
    let reg = Registry::default();
    let filter = a.filter.as_deref();
    let rows: Vec<Value> = reg
        .names(filter)
        .into_iter()
        .map(|(kind, name)| {
            let kind = match kind {
                Kind::Ensemble => "ensemble",
                Kind::Plan => "plan",
                Kind::Detector => "detector",
            };
            json!({ "kind": kind, "name": name })
        })
        .collect();
    let mut csv = table(&rows);
    if csv.is_empty() {
        csv = "kind,name\n".into();
    }
    Ok(Rendered {
        summary: format!("{} registry {}", rows.len(), if rows.len() == 1 { "entry" } else { "entries" }),
        json: json!({ "command": "list", "entries": rows, "text": reg.list(filter) }),
        csv,
        audit_failure: None,
    })
}
