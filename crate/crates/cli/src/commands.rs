use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use drac::bell::bell_scan;
use drac::channels::{Certificate, FeasibilityReport};
use drac::data::ReferenceConstants;
use drac::optics::{
    bundled_averages, compare_averages, compare_measured, ingest_results, parse_averages, table_two, verify_measurement,
    verify_row, Basis, ComparisonReport, MeasuredTable,
};
use drac::protocols::{eval_earac, eval_qrac_strategy, EaracStrategy, QracStrategy};
use drac::report::{table_one_report, ReportOptions};
use drac::seesaw::{explicit_strategy, run_seesaw};
use drac::tasks::{
    classical_optimum, cube_rotation, reflection_nogo, rotation_feasibility, table_one_earac, table_one_qrac,
    table_one_task, table_one_transformation, Input, PhaseOffset, Reflection, TaskSpec,
};
use drac::{quantum_optimum, Error};

use super::{BellCmd, Command, EaracCmd, NogoCmd, OpticsCmd, QracCmd, ReportCmd, SeesawCmd, TaskArg, TasksCmd};
use crate::output::{num, Report};

/// Exit status 2 for bad input, 1 for everything else.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn report(self) -> ExitCode {
        match self {
            Failure::Validation(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
            Failure::Internal(e) => {
                eprintln!("internal error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}

fn is_internal(e: &Error) -> bool {
    use drac::bell::BellError;
    use drac::protocols::ProtocolError;
    matches!(
        e,
        Error::Numerics(_)
            | Error::Bell(BellError::Lp(_))
            | Error::Bell(BellError::Protocol(ProtocolError::Numerics(_)))
            | Error::Protocol(ProtocolError::Numerics(_))
    )
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        if is_internal(&e) {
            Failure::Internal(e.into())
        } else {
            Failure::Validation(e.into())
        }
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

type Outcome = Result<Report, Failure>;

pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Tasks(TasksCmd::List) => tasks_list(),
        Command::Tasks(TasksCmd::Show(t)) => tasks_show(t),
        Command::Classical(t) => classical(t),
        Command::Qrac(QracCmd::Eval { task, strategy }) => qrac_eval(task, strategy.as_deref()),
        Command::Earac(EaracCmd::Eval { task, reflection, offset, invert }) => {
            earac_eval(task, reflection.as_deref(), offset, *invert)
        }
        Command::Bell(BellCmd::Scan { t, qmin, qmax, steps }) => bell(*t, *qmin, *qmax, *steps),
        Command::Nogo(NogoCmd::Check { reflection, rotation }) => nogo(reflection.as_deref(), rotation.as_deref()),
        Command::Seesaw(SeesawCmd::Run { task, restarts, seed, save }) => seesaw(task, *restarts, *seed, save.as_deref()),
        Command::Optics(OpticsCmd::Verify) => optics_verify(),
        Command::Optics(OpticsCmd::Compare { input, averages }) => optics_compare(input.as_deref(), *averages),
        Command::Report(ReportCmd::Table1 { restarts, seed }) => report_table1(*restarts, *seed),
    }
}

/// A task with its Table I row, if it is one.
fn load_task(arg: &TaskArg) -> Result<(TaskSpec, Option<usize>), Failure> {
    let s = arg.task.trim();
    if s == "standard" {
        return Ok((TaskSpec::standard(), None));
    }
    if let Ok(row) = s.parse::<usize>() {
        return Ok((table_one_task(row)?, Some(row)));
    }
    let text = std::fs::read_to_string(s).with_context(|| format!("reading task file {s}")).map_err(invalid)?;
    let task = TaskSpec::from_json(&text).with_context(|| format!("parsing task file {s}")).map_err(invalid)?;
    Ok((task, None))
}

fn truth_string(t: &TaskSpec) -> String {
    Input::all().map(|x| (0..3).map(|y| char::from(b'0' + t.f(x, y))).collect::<String>()).collect::<Vec<_>>().join(" ")
}

fn tasks_list() -> Outcome {
    let mut r = Report::new("Table I tasks", &["row", "task", "transformation", "truth_table"]);
    let mut items = Vec::new();
    for row in 1..=8 {
        let t = table_one_task(row)?;
        let tr = table_one_transformation(row).unwrap_or_default();
        r.row(vec![row.to_string(), t.label().to_string(), tr.to_string(), truth_string(&t)]);
        items.push(json!({"row": row, "task": t.label(), "transformation": tr, "truth_table": truth_string(&t)}));
    }
    r.note("truth_table lists f(x,0)f(x,1)f(x,2) for x0x1x2 = 000, 001, ..., 111");
    Ok(r.with_json(Value::Array(items)))
}

fn tasks_show(arg: &TaskArg) -> Outcome {
    let (t, _) = load_task(arg)?;
    let mut r = Report::new(format!("task {}", t.label()), &["x0", "x1", "x2", "f0", "f1", "f2"]);
    for x in Input::all() {
        r.row([x.x0, x.x1, x.x2, t.f(x, 0), t.f(x, 1), t.f(x, 2)].iter().map(u8::to_string).collect());
    }
    let json = serde_json::from_str(&t.to_json()).map_err(|e| Failure::Internal(e.into()))?;
    Ok(r.with_json(json))
}

fn classical(arg: &TaskArg) -> Outcome {
    let (t, _) = load_task(arg)?;
    let opt = classical_optimum(&t);
    let successes = opt.successes.map_or_else(|| "-".to_string(), |s| format!("{s}/24"));
    let mut r = Report::new(format!("classical optimum of {}", t.label()), &["value", "successes", "encoder", "relay", "decoder"]);
    let w = &opt.witness;
    r.row(vec![num(opt.value), successes, w.encoder.to_string(), w.relay.to_string(), w.decoder.to_string()]);
    Ok(r.with_json(json!({"task": t.label(), "value": opt.value, "successes": opt.successes, "witness": w})))
}

fn qrac_eval(arg: &TaskArg, strategy: Option<&Path>) -> Outcome {
    let (t, row) = load_task(arg)?;
    let (s, source) = match (strategy, row) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(invalid)?;
            (QracStrategy::from_json(&text).context("parsing strategy").map_err(invalid)?, p.display().to_string())
        }
        (None, Some(k @ 5..=8)) => (table_one_qrac(k)?.1, "cube-rotation construction".to_string()),
        (None, Some(k @ 1..=4)) => (explicit_strategy(k)?, "explicit see-saw strategy".to_string()),
        _ => return Err(invalid(anyhow!("no built-in strategy for this task; pass --strategy"))),
    };
    let v = eval_qrac_strategy(&s, &t)?;
    let table = s.success_table(&t);
    let mut r = Report::new(format!("QRAC on {} ({source}): {}", t.label(), num(v)), &["x", "p_y0", "p_y1", "p_y2"]);
    for (i, p) in table.iter().enumerate() {
        r.row(vec![Input::from_index(i).to_string(), num(p[0]), num(p[1]), num(p[2])]);
    }
    Ok(r.with_json(json!({"task": t.label(), "source": source, "value": v, "per_input": table})))
}

fn earac_eval(arg: &TaskArg, reflection: Option<&str>, offset: &str, invert: bool) -> Outcome {
    let (t, row) = load_task(arg)?;
    let off: PhaseOffset = offset.parse()?;
    let members: Vec<(String, EaracStrategy)> = match (reflection, row) {
        (Some(refl), _) => {
            let rf: Reflection = refl.parse()?;
            let s = EaracStrategy::family(rf, off);
            vec![(format!("{} offset {}", rf.label(), off.label()), if invert { s.with_inverted_decoder() } else { s })]
        }
        (None, Some(k @ 1..=4)) => vec![("Table I construction".to_string(), table_one_earac(k)?.1)],
        _ => Reflection::ALL
            .iter()
            .flat_map(|&rf| PhaseOffset::ALL.iter().map(move |&o| (rf, o)))
            .flat_map(|(rf, o)| {
                let s = EaracStrategy::family(rf, o);
                let name = format!("{} offset {}", rf.label(), o.label());
                [(name.clone(), s.clone()), (format!("{name} inverted"), s.with_inverted_decoder())]
            })
            .collect(),
    };
    let mut r = Report::new(format!("EARAC on {}", t.label()), &["strategy", "value"]);
    let mut items = Vec::new();
    for (name, s) in &members {
        let v = eval_earac(s, &t)?;
        r.row(vec![name.clone(), num(v)]);
        items.push(json!({"strategy": name, "value": v}));
    }
    Ok(r.with_json(json!({"task": t.label(), "results": items})))
}

fn bell(t: u8, qmin: f64, qmax: f64, steps: usize) -> Outcome {
    if steps == 0 {
        return Err(invalid(anyhow!("--steps must be at least 1")));
    }
    let rows = bell_scan(t, qmin, qmax, steps)?;
    let mut r = Report::new(
        format!("Bell bounds, t = {t}"),
        &["t", "q", "local", "nsbl_ab", "nsbl_ac", "nsbl_bc", "quantum"],
    );
    for s in &rows {
        r.row(vec![
            s.t.to_string(),
            num(s.q),
            num(s.local),
            num(s.nsbl_ab),
            num(s.nsbl_ac),
            num(s.nsbl_bc),
            num(s.quantum),
        ]);
    }
    Ok(r.with_json(serde_json::to_value(&rows).map_err(|e| Failure::Internal(e.into()))?))
}

fn feasibility_line(rep: &FeasibilityReport) -> String {
    match &rep.certificate {
        Certificate::EllipsoidBounds { required_lambda3, allowed_lambda3, .. } => format!(
            "infeasible: λ₃ ∈ [{required_lambda3:.3}, ∞) required, ≤ {allowed_lambda3:.3} allowed"
        ),
        Certificate::Rotation { .. } => "feasible: unitary rotation".to_string(),
        Certificate::Channel { .. } => "feasible: non-unitary channel".to_string(),
        Certificate::FidelityGap => format!("infeasible: best total fidelity {:.6} < 4", rep.best_total_fidelity),
    }
}

fn feasibility_json(name: &str, rep: &FeasibilityReport) -> Value {
    let cert = match &rep.certificate {
        Certificate::EllipsoidBounds { offset, radius, required_lambda3, allowed_lambda3 } => json!({
            "kind": "ellipsoid_bounds", "offset": offset, "radius": radius,
            "required_lambda3": required_lambda3, "allowed_lambda3": allowed_lambda3
        }),
        Certificate::Rotation { .. } => json!({"kind": "rotation"}),
        Certificate::Channel { .. } => json!({"kind": "channel"}),
        Certificate::FidelityGap => json!({"kind": "fidelity_gap"}),
    };
    json!({"map": name, "feasible": rep.feasible, "best_total_fidelity": rep.best_total_fidelity, "certificate": cert})
}

fn nogo(reflection: Option<&str>, rotation: Option<&str>) -> Outcome {
    let mut checks: Vec<(String, FeasibilityReport)> = Vec::new();
    if let Some(label) = rotation {
        let rot = cube_rotation(label)?;
        if !rot.admissible {
            return Err(invalid(anyhow!("rotation {label} fixes a cube vertex")));
        }
        checks.push((rot.label.clone(), rotation_feasibility(&rot)?));
    } else {
        let list: Vec<Reflection> = match reflection {
            Some(s) => vec![s.parse()?],
            None => Reflection::ALL.to_vec(),
        };
        for rf in list {
            checks.push((rf.label().to_string(), reflection_nogo(rf)));
        }
    }
    let mut r = Report::new("", &["map", "feasible", "best_total_fidelity", "verdict"]);
    let mut items = Vec::new();
    for (name, rep) in &checks {
        r.row(vec![name.clone(), rep.feasible.to_string(), num(rep.best_total_fidelity), feasibility_line(rep)]);
        items.push(feasibility_json(name, rep));
    }
    if checks.len() == 1 {
        r.note(feasibility_line(&checks[0].1));
    }
    Ok(r.with_json(Value::Array(items)))
}

fn seesaw(arg: &TaskArg, restarts: usize, seed: u64, save: Option<&Path>) -> Outcome {
    let (t, _) = load_task(arg)?;
    let res = run_seesaw(&t, restarts, seed)?;
    if let Some(p) = save {
        std::fs::write(p, res.strategy.to_json()).with_context(|| format!("writing {}", p.display())).map_err(invalid)?;
    }
    let mut r = Report::new(format!("see-saw on {}", t.label()), &["restart", "value"]);
    for (k, v) in res.restart_values.iter().enumerate() {
        r.row(vec![k.to_string(), num(*v)]);
    }
    r.note(format!("best {} at restart {} (seed {seed}, {restarts} restarts)", num(res.value), res.best_restart));
    Ok(r.with_json(json!({
        "task": t.label(), "value": res.value, "best_restart": res.best_restart,
        "restarts": restarts, "seed": seed, "restart_values": res.restart_values
    })))
}

fn optics_verify() -> Outcome {
    let rows = table_two()?;
    let mut r = Report::new(
        "Table II design check",
        &["task", "state", "unitary", "preparation_fidelity", "unitary_distance", "realized", "pass"],
    );
    let mut items = Vec::new();
    for row in &rows {
        let c = verify_row(row)?;
        let pass = c.passes(1e-4, 1e-6);
        r.row(vec![
            c.task.to_string(),
            c.state.to_string(),
            c.unitary.clone(),
            num(c.preparation_fidelity),
            num(c.unitary_distance),
            c.realized.clone().unwrap_or_else(|| "-".into()),
            pass.to_string(),
        ]);
        items.push(json!({
            "task": c.task, "state": c.state.to_string(), "unitary": c.unitary,
            "preparation_fidelity": c.preparation_fidelity, "unitary_distance": c.unitary_distance,
            "identity_distance": c.identity_distance, "realized": c.realized, "pass": pass
        }));
    }
    let mut ports = Vec::new();
    for b in Basis::ALL {
        let m = verify_measurement(b);
        r.note(format!(
            "sigma_{b}: H port projects on the {} eigenvector (outcome {}), residual {:.1e}",
            if m.h_port_sign > 0 { "+1" } else { "-1" },
            m.h_port_outcome(),
            m.residual
        ));
        ports.push(json!({"basis": b.to_string(), "h_port_sign": m.h_port_sign, "residual": m.residual}));
    }
    Ok(r.with_json(json!({"rows": items, "measurements": ports})))
}

fn comparison_report(title: &str, rep: &ComparisonReport) -> Result<Report, Failure> {
    let mut r = Report::new(
        title,
        &["task", "state", "unitary", "basis", "measured", "sigma", "ideal", "deviation_sigma", "flag"],
    );
    for c in &rep.rows {
        let mut flags = Vec::new();
        if c.flagged {
            flags.push("deviation");
        }
        if c.suspect_sigma {
            flags.push("suspect-sigma");
        }
        r.row(vec![
            c.task.to_string(),
            c.state.map_or_else(|| "-".into(), |s| s.to_string()),
            c.unitary.clone().unwrap_or_else(|| "-".into()),
            c.basis.map_or_else(|| "-".into(), |b| b.to_string()),
            format!("{:.4}", c.measured),
            format!("{:.4}", c.sigma),
            num(c.ideal),
            format!("{:.3}", c.deviation),
            flags.join("+"),
        ]);
    }
    r.note(format!(
        "mean measured {:.4}, mean ideal {}, mean deviation {:.3} sigma, max |deviation| {:.3} sigma",
        rep.mean_measured,
        num(rep.mean_ideal),
        rep.mean_deviation,
        rep.max_abs_deviation
    ));
    if rep.rows.iter().any(|c| c.suspect_sigma) {
        r.note("suspect-sigma: uncertainty far below the table median, kept as printed (suspected typo)");
    }
    Ok(r.with_json(serde_json::to_value(rep).map_err(|e| Failure::Internal(e.into()))?))
}

fn optics_compare(input: Option<&Path>, averages: bool) -> Outcome {
    if averages {
        let rows = match input {
            Some(p) => {
                let f = std::fs::File::open(p).with_context(|| format!("opening {}", p.display())).map_err(invalid)?;
                parse_averages(f)?
            }
            None => bundled_averages()?,
        };
        return comparison_report("average success vs (1+√3)/(2√3)", &compare_averages(&rows, quantum_optimum()));
    }
    let table = match input {
        Some(p) => ingest_results(p)?,
        None => MeasuredTable::bundled()?,
    };
    comparison_report("measured success vs ideal QRAC", &compare_measured(&table)?)
}

fn report_table1(restarts: usize, seed: u64) -> Outcome {
    let rows = table_one_report(ReportOptions { restarts, seed })?;
    let refs = ReferenceConstants::load()?;
    let mut r = Report::new(
        "Table I reproduction",
        &["row", "task", "transformation", "classical", "earac", "earac_method", "qrac", "qrac_method", "qrac_reference"],
    );
    for t in &rows {
        r.row(vec![
            t.row.to_string(),
            t.task.clone(),
            t.transformation.clone(),
            format!("{} ({}/24)", num(t.classical), t.classical_successes.unwrap_or(0)),
            num(t.earac.value()),
            t.earac.annotation(),
            num(t.qrac.value()),
            t.qrac.annotation(),
            t.qrac_reference.as_ref().map_or_else(|| "-".into(), |v| format!("{} {}", num(v.value()), v.annotation())),
        ]);
    }
    r.note(format!("quantum optimum (1+√3)/(2√3) = {}", num(quantum_optimum())));
    r.note(format!(
        "published classical value {} for every row: {}",
        num(refs.classical_claim),
        refs.note
    ));
    Ok(r.with_json(json!({"rows": rows, "quantum_optimum": quantum_optimum()})))
}
