use serde_json::{json, Value};
use zlattice::convolution::{conv_axes_with, conv_general_with, convolve, ConvOptions, ConvOutput, ConvPlan};
use zlattice::document::{format_complex, ingest, parse_complex, parse_complex_list};
use zlattice::fixtures::{binomial_transform, probability_transform, run_fixture, FixtureParams, FIXTURE_NAMES};
use zlattice::fractional::{cesaro, weyl_am, WeylOperatorSpec};
use zlattice::sequence::{SequenceTable, ValueKind};
use zlattice::solver::{
    covering_kernel_window, parse_problem, polycircle_samples, required_solution_window, solve, uniqueness_probe,
    KernelOptions, SolveOptions,
};
use zlattice::ztransform::{eval_forward, invert_contour, RationalDoc, TransformEvaluator};

use crate::args::{ConvMode, ConvolveArgs, FixtureArgs, FractionalCmd, InvertArgs, ProbeArgs, SolveArgs, TransformCmd};
use crate::report::{CliError, Context, Outcome, Status};

type Run = Result<Outcome, CliError>;

fn complex_json(v: &[num_complex::Complex64]) -> Value {
    Value::Array(v.iter().map(|z| Value::String(format_complex(*z))).collect())
}

fn conv_ledger(out: &ConvOutput) -> Value {
    json!({ "max_tail_bound": out.max_tail(), "max_abs_mass": out.max_mass() })
}

fn enforcing(tail_tol: f64) -> Result<ConvOptions, CliError> {
    if !(tail_tol > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    Ok(ConvOptions { tail_rel_tol: tail_tol, enforce_tolerance: true, ..ConvOptions::default() })
}

pub fn transform(ctx: &mut Context, cmd: &TransformCmd) -> Run {
    match cmd {
        TransformCmd::Eval { seq, at } => {
            let f = ingest(&ctx.read(seq)?)?;
            let mut points = Vec::with_capacity(at.len());
            for a in at {
                let z = parse_complex_list(a)?;
                let ev = ctx.timed("evaluate", || eval_forward(&f, &z))?;
                points.push(json!({
                    "z": complex_json(&z),
                    "value": complex_json(&ev.value),
                    "tail_bound": ev.tail_bound,
                    "rounding_bound": ev.rounding_bound,
                }));
            }
            let worst = points.iter().filter_map(|p| p["tail_bound"].as_f64()).fold(0.0, f64::max);
            Ok(Outcome::ok(json!({ "max_tail_bound": worst }), Value::Array(points)))
        }
        TransformCmd::Invert(args) => invert(ctx, args),
        TransformCmd::SuggestRadii { seq } => {
            let f = ingest(&ctx.read(seq)?)?;
            let env = f.envelope().ok_or(zlattice::error::Error::NoEnvelope)?;
            let radii: Vec<f64> = (0..f.dim())
                .map(|i| {
                    let r = env.rates()[i];
                    let proposal = if r > 0.0 { 1.5 * r } else { 1.0 };
                    match env.negative_rates() {
                        Some(neg) if proposal >= neg[i] => (r * neg[i]).sqrt(),
                        _ => proposal,
                    }
                })
                .collect();
            Ok(Outcome::ok(Value::Null, json!({ "radii": radii })))
        }
    }
}

fn invert(ctx: &mut Context, args: &InvertArgs) -> Run {
    let evaluator: TransformEvaluator = match (&args.fixture, &args.rational, &args.seq) {
        (Some(name), None, None) => match name.as_str() {
            "probability" => probability_transform(args.p, args.truncation)?,
            "binomial" => binomial_transform(args.a, args.b)?,
            "constant" => TransformEvaluator::constant(args.dim, ValueKind::Scalar, vec![parse_complex(&args.value)?])?,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown evaluator {other:?}; expected probability, binomial or constant"
                )))
            }
        },
        (None, Some(path), None) => {
            let text = ctx.read(path)?;
            let doc: RationalDoc =
                serde_json::from_str(&text).map_err(|e| zlattice::error::Error::Schema(e.to_string()))?;
            doc.evaluator()?
        }
        (None, None, Some(path)) => TransformEvaluator::from_sequence(&ingest(&ctx.read(path)?)?)?,
        _ => return Err(CliError::Usage("give exactly one of --fixture, --rational or --seq".into())),
    };
    let grid = args.grid.as_ref().map(|g| g.0.clone());
    if grid.as_ref().is_some_and(|g| g.contains(&0)) {
        return Err(CliError::Usage("grid sizes must be at least 1".into()));
    }
    let inv = ctx.timed("invert", || invert_contour(&evaluator, &args.radii.0, &args.window, grid.as_deref()))?;
    let ledger = json!({
        "grid": inv.grid,
        "aliasing_bound": inv.aliasing_bound,
        "node_error_bound": inv.node_error_bound,
        "max_node_norm": inv.max_node_norm,
    });
    let result = ctx.emit_table(&inv.table, args.out.as_deref())?;
    Ok(Outcome::ok(ledger, result))
}

pub fn convolve_cmd(ctx: &mut Context, args: &ConvolveArgs) -> Run {
    let a = ingest(&ctx.read(&args.a)?)?;
    let b = ingest(&ctx.read(&args.b)?)?;
    let opts = enforcing(args.tail_tol)?;
    let out = ctx.timed("convolve", || -> Result<ConvOutput, CliError> {
        Ok(match args.mode {
            ConvMode::Faltung => convolve(&ConvPlan::faltung(a.dim()), &a, &b, &args.window, &opts)?,
            ConvMode::Weyl => convolve(&ConvPlan::weyl(a.dim()), &a, &b, &args.window, &opts)?,
            ConvMode::General => conv_general_with(&a, &b, &args.window, &opts)?,
            ConvMode::Axes => {
                let axes = args.axes.as_ref().ok_or_else(|| CliError::Usage("--mode axes needs --axes".into()))?;
                if axes.0.contains(&0) {
                    return Err(CliError::Usage("axes are 1-based".into()));
                }
                let axes: Vec<usize> = axes.0.iter().map(|a| a - 1).collect();
                conv_axes_with(&a, &b, &axes, &args.window, &opts)?
            }
        })
    })?;
    let result = ctx.emit_table(&out.table, args.out.as_deref())?;
    Ok(Outcome::ok(conv_ledger(&out), result))
}

pub fn fractional(ctx: &mut Context, cmd: &FractionalCmd) -> Run {
    match cmd {
        FractionalCmd::Cesaro { alpha, len, out } => {
            if *len == 0 {
                return Err(CliError::Usage("--len must be positive".into()));
            }
            let c = ctx.timed("cesaro", || cesaro(*alpha, len - 1))?;
            let result = ctx.emit_table(c.table(), out.as_deref())?;
            Ok(Outcome::ok(json!({ "alpha": alpha, "len": len }), result))
        }
        FractionalCmd::Weyl { alpha, m, seq, window, kernel_len, tail_tol, out } => {
            let f = ingest(&ctx.read(seq)?)?;
            if *kernel_len == 0 {
                return Err(CliError::Usage("--kernel-len must be positive".into()));
            }
            let spec = match m {
                None => WeylOperatorSpec::fractional(*alpha, kernel_len - 1)?,
                Some(m) => {
                    let gamma = *m as f64 - alpha;
                    if gamma < 0.0 {
                        return Err(CliError::Usage(format!("--m {m} is below the order {alpha}")));
                    }
                    WeylOperatorSpec::new(cesaro(gamma, kernel_len - 1)?.into_table(), *m)?
                }
            };
            let opts = enforcing(*tail_tol)?;
            let res = ctx.timed("weyl", || weyl_am(&spec, &f, window, &opts))?;
            let mut ledger = conv_ledger(&res);
            ledger["order"] = json!(spec.order());
            let result = ctx.emit_table(&res.table, out.as_deref())?;
            Ok(Outcome::ok(ledger, result))
        }
    }
}

pub fn solve_cmd(ctx: &mut Context, args: &SolveArgs) -> Run {
    let spec = parse_problem(&ctx.read(&args.problem)?)?;
    let f: SequenceTable = match &args.data {
        Some(p) => ingest(&ctx.read(p)?)?,
        None => spec.data.clone().ok_or_else(|| CliError::Usage("the problem has no data; pass --data".into()))?,
    };
    if !(args.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let problem = &spec.problem;
    let check = &args.check_window;
    let required = required_solution_window(problem, &f, &spec.kernel_domain, check)?;
    let out_window = match &args.out_window {
        Some(w) => w.hull(&required),
        None => required,
    };
    let kernel_window = match &args.kernel_window {
        Some(w) => w.clone(),
        None => covering_kernel_window(&out_window, f.support())?,
    };
    let opts = SolveOptions {
        kernel: KernelOptions { grid: args.grid.as_ref().map(|g| g.0.clone()), ..KernelOptions::default() },
        ..SolveOptions::default()
    };
    let sol = ctx.timed("solve", || {
        solve(problem, &f, &spec.kernel_domain, &args.radii.0, &kernel_window, &out_window, &opts)
    })?;
    let ver = ctx.timed("verify", || sol.verify(problem, &f, check))?;
    let status = if ver.residual.max_norm <= args.tol { Status::Pass } else { Status::Fail };
    let ledger = json!({
        "kind": problem.kind_name(),
        "kernel_window": [kernel_window.lo().coords(), kernel_window.hi().coords()],
        "out_window": [out_window.lo().coords(), out_window.hi().coords()],
        "solution": sol.ledger,
        "residual": ver.residual,
        "residual_budget": ver.budget,
        "tolerance": args.tol,
    });
    eprintln!("{status} residual {:.3e} (tolerance {:.1e}, budget {:.3e})", ver.residual.max_norm, args.tol, ver.budget);
    let result = ctx.emit_table(&sol.u, args.out.as_deref())?;
    Ok(Outcome { status, ledger, result })
}

pub fn probe(ctx: &mut Context, args: &ProbeArgs) -> Run {
    let spec = parse_problem(&ctx.read(&args.problem)?)?;
    if args.radii.0.len() != spec.problem.dim() {
        return Err(CliError::Usage(format!("--radii needs {} entries", spec.problem.dim())));
    }
    let samples = polycircle_samples(&args.radii.0, args.samples);
    let report = ctx.timed("probe", || uniqueness_probe(&spec.problem, &samples, args.threshold));
    eprintln!("{} (min sigma {:.3e})", report.verdict, report.min_sigma);
    let ledger = json!({ "min_sigma": report.min_sigma, "threshold": report.threshold });
    Ok(Outcome::ok(ledger, serde_json::to_value(&report).expect("probe reports serialize")))
}

pub fn fixtures(ctx: &mut Context, args: &FixtureArgs) -> Run {
    let defaults = FixtureParams::default();
    let params = FixtureParams {
        p: args.p.unwrap_or(defaults.p),
        a: args.a.unwrap_or(defaults.a),
        b: args.b.unwrap_or(defaults.b),
        window: args.window,
        radii: args.radii.as_ref().map(|r| r.0.clone()),
        grid: args.grid.as_ref().map(|g| g.0.clone()),
        truncation: args.truncation.unwrap_or(defaults.truncation),
    };
    let names: Vec<&str> = if args.name == "all" {
        if args.out.is_some() {
            return Err(CliError::Usage("--out needs a single fixture".into()));
        }
        FIXTURE_NAMES.to_vec()
    } else {
        vec![args.name.as_str()]
    };
    let mut reports = Vec::new();
    let mut all_passed = true;
    for name in names {
        let rep = ctx.timed(name, || run_fixture(name, &params)).map_err(|e| match e {
            zlattice::error::Error::InvalidProblem(msg) if !FIXTURE_NAMES.contains(&name) => CliError::Usage(msg),
            other => CliError::Core(other),
        })?;
        let verdict = if rep.passed { Status::Pass } else { Status::Fail };
        eprintln!("{verdict} {name}: {} {:.3e} (tolerance {:.1e})", rep.metric, rep.max_error, rep.tolerance);
        all_passed &= rep.passed;
        let mut entry = serde_json::to_value(&rep).expect("fixture reports serialize");
        if let Some(t) = &rep.table {
            entry["table"] = ctx.emit_table(t, args.out.as_deref())?;
        }
        reports.push(entry);
    }
    let status = if all_passed { Status::Pass } else { Status::Fail };
    let ledger = Value::Array(reports.iter().map(|r| json!({ "name": r["name"], "ledger": r["ledger"] })).collect());
    Ok(Outcome { status, ledger, result: Value::Array(reports) })
}
