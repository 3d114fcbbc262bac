//! Subcommand implementations. Each returns `Ok(true)` on success and
//! `Ok(false)` for a domain-level negative result (exit 1).

use std::io::Write;
use std::time::Instant;

use minima_forge::acceptance::{run_acceptance_with, AcceptanceOptions, Fault};
use minima_forge::builders::{pulse_template, quadrilateral_periodic, reflect_dual, zero_template};
use minima_forge::flow::{
    convergent_horizon_1x1, correspondence_cross_check, arithmetic_ba_scan, dual_flow_identity_check,
    dual_minima_flow_check, flow_point, minima_trace, verdict_from_trace, AMatrix, ClassifyConfig,
    MinimaTrace,
};
use minima_forge::lattice::{
    dual_basis, dual_minima_report, minkowski_report, successive_minima_with, LatticeBasis,
    MinimaOptions, Norm,
};
use minima_forge::rational::{format_rational, Rational};
use minima_forge::template::{average_rate, rate_bounds, Template};
use serde_json::{json, Value};

use crate::args::{BuildKind, LatticeArgs, OutputArgs};
use crate::config::{
    parse_a_spec, parse_grid, parse_norm, parse_orders, parse_rat, parse_tau, BuildParams, CheckParams,
    Experiment, ExperimentConfig, FlowParams, Format, OutputSpec, RateParams, ResolvedA, ScanParams,
    VERSION,
};
use crate::document::{Metadata, TemplateDocument};
use crate::error::{CliError, CliResult};
use crate::table::{json_document, Table};

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes to the file when given, else to `stdout`.
fn emit(path: Option<&str>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(CliError::from),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn strs(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn load_document(path: &str) -> CliResult<TemplateDocument> {
    TemplateDocument::from_json(&read(path)?)
}

pub fn validate(file: &str, stdout: &mut dyn Write) -> CliResult<bool> {
    let doc = load_document(file)?;
    let result = doc.check()?;
    let violations = match &result {
        Ok(_) => Vec::new(),
        Err(v) => v.clone(),
    };
    for v in &violations {
        writeln!(stdout, "{}", serde_json::to_string(v).expect("violation json"))?;
    }
    let summary = json!({
        "valid": violations.is_empty(),
        "m": doc.m,
        "n": doc.n,
        "violations": violations.len(),
    });
    writeln!(stdout, "{summary}")?;
    Ok(violations.is_empty())
}

fn rate_times(template: &Template, at: &str) -> CliResult<Vec<Rational>> {
    if at.trim() == "breakpoints" {
        let start = template.path().start().clone();
        let times: Vec<Rational> = template.path().knots().into_iter().filter(|k| *k > start).collect();
        if times.is_empty() {
            return Err(CliError::Domain("template has no breakpoint after its start; pass --at T".into()));
        }
        return Ok(times);
    }
    at.split(',').map(|s| parse_rat(s, "T")).collect()
}

pub fn rate(
    file: &str,
    at: &str,
    bounds: Option<&str>,
    raw: bool,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> CliResult<bool> {
    let format = Format::resolve(output.format.as_deref(), output.out.as_deref(), Format::Csv)?;
    let config = ExperimentConfig {
        experiment: Experiment::TemplateRate(RateParams {
            template: file.to_string(),
            at: at.to_string(),
            bounds: bounds.map(String::from),
            raw,
        }),
        output: OutputSpec { path: output.out.clone(), format },
    };
    let template = load_document(file)?.template(raw)?;
    let horizon = bounds.map(|b| parse_rat(b, "bounds horizon")).transpose()?;
    let mut rows = Vec::new();
    for t in rate_times(&template, at)? {
        let delta = average_rate(&template, &t).map_err(CliError::domain)?;
        rows.push((t, delta));
    }
    let bounds_json = horizon
        .map(|h| -> CliResult<Value> {
            let b = rate_bounds(&template, &h).map_err(CliError::domain)?;
            Ok(json!({
                "horizon": format_rational(&b.horizon),
                "tail_from": format_rational(&b.tail_from),
                "lower": format_rational(&b.lower),
                "upper": format_rational(&b.upper),
                "certificate": format_rational(&b.certificate),
                "samples": b.samples.iter()
                    .map(|(t, d)| [format_rational(t), format_rational(d)])
                    .collect::<Vec<_>>(),
            }))
        })
        .transpose()?;
    let text = match format {
        Format::Csv => {
            let header = ["T", "delta_avg_num", "delta_avg_den"].map(String::from).to_vec();
            let mut table = Table::new(config, header);
            for (t, d) in &rows {
                table.push(vec![format_rational(t), d.numer().to_string(), d.denom().to_string()]);
            }
            if let Some(b) = bounds_json {
                table.trailer("bounds", b);
            }
            table.to_csv()
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(t, d)| {
                    json!({
                        "T": format_rational(t),
                        "delta": format_rational(d),
                        "delta_avg_num": d.numer().to_string(),
                        "delta_avg_den": d.denom().to_string(),
                    })
                })
                .collect();
            pretty(&json_document(&config, json!({ "rows": rows, "bounds": bounds_json })))
        }
    };
    emit(output.out.as_deref(), &text, stdout)?;
    Ok(true)
}

pub struct BuildRequest<'a> {
    pub kind: BuildKind,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub scale: &'a str,
    pub periods: usize,
    pub tau1: &'a str,
    pub tau2: &'a str,
    pub k_max: usize,
    pub input: Option<&'a str>,
    pub name: Option<&'a str>,
    pub out: Option<&'a str>,
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: BuildKind) -> CliResult<T> {
    v.ok_or_else(|| CliError::Parse(format!("build {} needs --{flag}", kind.name())))
}

pub fn build(req: &BuildRequest<'_>, stdout: &mut dyn Write) -> CliResult<bool> {
    let kind = req.kind;
    let mut params = BuildParams {
        builder: kind.name().to_string(),
        m: req.m,
        n: req.n,
        r: None,
        scale: None,
        periods: None,
        tau1: None,
        tau2: None,
        k_max: None,
        input: None,
    };
    let built = match kind {
        BuildKind::Zero => zero_template(need(req.m, "m", kind)?, need(req.n, "n", kind)?),
        BuildKind::Quad => {
            let scale = parse_rat(req.scale, "scale")?;
            params.r = Some(need(req.r, "r", kind)?);
            params.scale = Some(format_rational(&scale));
            params.periods = Some(req.periods);
            quadrilateral_periodic(need(req.m, "m", kind)?, need(req.n, "n", kind)?, params.r.unwrap(), &scale, req.periods)
        }
        BuildKind::Pulse => {
            params.r = Some(need(req.r, "r", kind)?);
            params.tau1 = Some(req.tau1.to_string());
            params.tau2 = Some(req.tau2.to_string());
            params.k_max = Some(req.k_max);
            pulse_template(
                need(req.m, "m", kind)?,
                need(req.n, "n", kind)?,
                params.r.unwrap(),
                &parse_tau(req.tau1)?,
                &parse_tau(req.tau2)?,
                req.k_max,
            )
        }
        BuildKind::Reflect => {
            let input = req.input.ok_or_else(|| CliError::Parse("build reflect needs --input".into()))?;
            params.input = Some(input.to_string());
            let source = load_document(input)?.template(false)?;
            params.m = Some(source.n());
            params.n = Some(source.m());
            reflect_dual(&source)
        }
    };
    let template = built.map_err(CliError::domain)?;
    let config = ExperimentConfig {
        experiment: Experiment::PulseBuild(params.clone()),
        output: OutputSpec { path: req.out.map(String::from), format: Format::Json },
    };
    let default_name = match kind {
        BuildKind::Zero => format!("zero({},{})", template.m(), template.n()),
        BuildKind::Quad | BuildKind::Pulse => {
            format!("{}({},{},{})", kind.name(), template.m(), template.n(), params.r.unwrap_or(0))
        }
        BuildKind::Reflect => format!("reflect({})", req.input.unwrap_or_default()),
    };
    let metadata = Metadata {
        name: Some(req.name.map(String::from).unwrap_or(default_name)),
        builder: Some(serde_json::to_value(&params).expect("params json")),
        version: Some(VERSION.to_string()),
        config: Some(config),
    };
    let doc = TemplateDocument::from_template(&template, Some(metadata));
    let text = doc.to_json();
    // The written document must load and validate on its own.
    if let Err(v) = TemplateDocument::from_json(&text)?.check()? {
        return Err(CliError::Domain(format!("built template fails re-validation ({} violations)", v.len())));
    }
    emit(req.out, &(text + "\n"), stdout)?;
    Ok(true)
}

pub struct FlowRequest<'a> {
    pub m: usize,
    pub n: usize,
    pub a: &'a str,
    pub u_grid: &'a str,
    pub orders: &'a str,
    pub norm: &'a str,
    pub threshold: &'a str,
    pub dual: bool,
    pub cross_check: Option<i64>,
    pub output: &'a OutputArgs,
}

fn horizon_note(a: &ResolvedA, u_max: &Rational) -> Option<String> {
    let c = a.convergent.as_ref()?;
    let h = convergent_horizon_1x1(c);
    let beyond = if *u_max > h {
        "; samples above it follow the rational A, not its limit"
    } else {
        ""
    };
    Some(format!(
        "{} is a golden-ratio convergent; the flow mimics the limit for u <= {} (u^2 <= q^2/4), grid reaches u = {}{}",
        format_rational(c),
        format_rational(&h),
        format_rational(u_max),
        beyond
    ))
}

/// Column names and per-sample cells of the trace CSV.
fn trace_columns(trace: &MinimaTrace) -> (Vec<String>, Vec<Vec<String>>) {
    let d = trace.m + trace.n;
    let mut header = vec!["u".to_string(), "t".to_string()];
    for j in 1..=d {
        match (trace.exact, trace.norm) {
            (true, Norm::L2) => {
                header.push(format!("lambda{j}_sq"));
                header.push(format!("lambda{j}"));
            }
            (true, Norm::LInf) => header.push(format!("lambda{j}")),
            (false, _) => {
                header.push(format!("lambda{j}_f64"));
                header.push(format!("err{j}"));
            }
        }
    }
    header.extend((1..=d).map(|j| format!("h{j}")));
    let rows = trace
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![format_rational(&s.u), s.t.to_string()];
            for j in 0..d {
                match (&s.exact, &s.errors, trace.norm) {
                    (Some(x), _, Norm::L2) => {
                        row.push(format_rational(&x[j]));
                        row.push(s.lambdas[j].to_string());
                    }
                    (Some(x), _, Norm::LInf) => row.push(format_rational(&x[j])),
                    (None, errs, _) => {
                        row.push(s.lambdas[j].to_string());
                        row.push(errs.as_ref().map_or(String::new(), |e| e[j].to_string()));
                    }
                }
            }
            row.extend(s.h.iter().map(|h| h.to_string()));
            row
        })
        .collect();
    (header, rows)
}

pub fn flow(req: &FlowRequest<'_>, stdout: &mut dyn Write) -> CliResult<bool> {
    let (m, n) = (req.m, req.n);
    let format = Format::resolve(req.output.format.as_deref(), req.output.out.as_deref(), Format::Csv)?;
    let a = parse_a_spec(req.a, m, n)?;
    let grid = parse_grid(req.u_grid)?;
    let orders = parse_orders(req.orders)?;
    let norm = parse_norm(req.norm)?;
    let threshold = parse_rat(req.threshold, "threshold")?;
    let config = ExperimentConfig {
        experiment: Experiment::FlowTrace(FlowParams {
            m,
            n,
            a: req.a.to_string(),
            a_resolved: a.entries(),
            u_grid: req.u_grid.to_string(),
            orders: orders.clone(),
            norm,
            threshold: format_rational(&threshold),
            dual: req.dual,
            cross_check: req.cross_check,
        }),
        output: OutputSpec { path: req.output.out.clone(), format },
    };
    let trace = minima_trace(m, n, &a.matrix, &grid, norm).map_err(CliError::domain)?;
    let cfg = ClassifyConfig { threshold, norm };
    let note = horizon_note(&a, grid.last().expect("nonempty grid"));
    let verdicts = orders
        .iter()
        .map(|&r| {
            verdict_from_trace(&trace, &a.matrix, r, &cfg)
                .map(|mut v| {
                    v.horizon_note = note.clone();
                    v
                })
                .map_err(CliError::domain)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let dual = if req.dual {
        orders
            .iter()
            .map(|&r| dual_minima_flow_check(m, n, &a.matrix, &grid, r).map_err(CliError::domain))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let cross = match req.cross_check {
        Some(q) => orders
            .iter()
            .map(|&r| correspondence_cross_check(m, n, &a.matrix, r, &grid, q).map_err(CliError::domain))
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    let ok = trace.samples.iter().all(|s| s.monotone && s.minkowski_pass)
        && dual.iter().all(|s| s.pass)
        && cross.iter().all(|c| c.pass);

    let text = match format {
        Format::Csv => {
            let (mut header, mut rows) = trace_columns(&trace);
            for series in &dual {
                let r = series.r;
                header.extend([format!("dual{r}_product_sq"), format!("dual{r}_product"), format!("dual{r}_within")]);
                for (row, d) in rows.iter_mut().zip(&series.rows) {
                    row.extend([format_rational(&d.product_sq), d.product.to_string(), d.within.to_string()]);
                }
            }
            let mut table = Table::new(config, header);
            for row in rows {
                table.push(row);
            }
            for v in &verdicts {
                table.trailer("verdict", serde_json::to_value(v).expect("verdict json"));
            }
            for s in &dual {
                table.trailer("dual", json!({ "r": s.r, "pass": s.pass }));
            }
            for c in &cross {
                table.trailer("cross-check", serde_json::to_value(c).expect("report json"));
            }
            table.to_csv()
        }
        Format::Json => pretty(&json_document(
            &config,
            json!({ "trace": trace, "verdicts": verdicts, "dual": dual, "cross_check": cross }),
        )),
    };
    emit(req.output.out.as_deref(), &text, stdout)?;
    if req.output.out.is_some() {
        for v in &verdicts {
            writeln!(stdout, "order {}: {} (inf lambda_{} = {:.6})", v.r, v.kind.label(), v.r, v.inf_lambda_r)?;
        }
    }
    Ok(ok)
}

pub fn scan(
    m: usize,
    n: usize,
    a_spec: &str,
    r: usize,
    q_max: i64,
    out: Option<&str>,
    stdout: &mut dyn Write,
) -> CliResult<bool> {
    let a = parse_a_spec(a_spec, m, n)?;
    let config = ExperimentConfig {
        experiment: Experiment::BaScan(ScanParams {
            m,
            n,
            a: a_spec.to_string(),
            a_resolved: a.entries(),
            r,
            q_max,
        }),
        output: OutputSpec { path: out.map(String::from), format: Format::Json },
    };
    let result = arithmetic_ba_scan(m, n, &a.matrix, r, q_max).map_err(CliError::domain)?;
    let text = pretty(&json_document(&config, json!({ "scan": result })));
    emit(out, &text, stdout)?;
    Ok(true)
}

struct CheckTarget {
    basis: LatticeBasis,
    params: CheckParams,
    flow: Option<(usize, usize, AMatrix, Rational)>,
}

fn check_target(args: &LatticeArgs, norm: Option<Norm>) -> CliResult<CheckTarget> {
    if let Some(b) = &args.basis {
        let m = match crate::config::parse_matrix_json(b)? {
            AMatrix::Exact(m) => m,
            AMatrix::Float(_) => return Err(CliError::Parse("basis entries must be exact rationals".into())),
        };
        let rows = (0..m.rows()).map(|i| strs(m.row(i))).collect();
        let basis = LatticeBasis::exact(m).map_err(CliError::domain)?;
        let params = CheckParams { basis: Some(rows), m: None, n: None, a: None, a_resolved: None, u: None, norm };
        return Ok(CheckTarget { basis, params, flow: None });
    }
    let missing = |f: &str| CliError::Parse(format!("pass --basis, or --m, --n, --a and --u (missing --{f})"));
    let m = args.m.ok_or_else(|| missing("m"))?;
    let n = args.n.ok_or_else(|| missing("n"))?;
    let a_spec = args.a.as_deref().ok_or_else(|| missing("a"))?;
    let u = parse_rat(args.u.as_deref().ok_or_else(|| missing("u"))?, "u")?;
    let a = parse_a_spec(a_spec, m, n)?;
    if !a.matrix.is_exact() {
        return Err(CliError::Parse("checks need an exact A".into()));
    }
    let fp = flow_point(m, n, &a.matrix, &u).map_err(CliError::domain)?;
    let params = CheckParams {
        basis: None,
        m: Some(m),
        n: Some(n),
        a: Some(a_spec.to_string()),
        a_resolved: Some(a.entries()),
        u: Some(format_rational(&u)),
        norm,
    };
    Ok(CheckTarget { basis: fp.basis, params, flow: Some((m, n, a.matrix, u)) })
}

pub fn dual_check(args: &LatticeArgs, stdout: &mut dyn Write) -> CliResult<bool> {
    let target = check_target(args, None)?;
    let config = ExperimentConfig {
        experiment: Experiment::DualCheck(target.params.clone()),
        output: OutputSpec { path: args.out.clone(), format: Format::Json },
    };
    let opts = MinimaOptions::default();
    let primal = successive_minima_with(&target.basis, &opts).map_err(CliError::domain)?;
    let dual_b = dual_basis(&target.basis).map_err(CliError::domain)?;
    let dual = successive_minima_with(&dual_b, &opts).map_err(CliError::domain)?;
    let report = dual_minima_report(&primal, &dual);
    let identity = target
        .flow
        .as_ref()
        .map(|(m, n, a, u)| dual_flow_identity_check(*m, *n, a, u).map_err(CliError::domain))
        .transpose()?;
    let pass = report.pass && identity.as_ref().is_none_or(|c| c.pass);
    let body = json!({
        "pass": pass,
        "primal_lambda_sq": strs(&primal.values),
        "dual_lambda_sq": strs(&dual.values),
        "products_squared": strs(&report.products_squared),
        "lower": format_rational(&report.lower),
        "upper": format_rational(&report.upper),
        "products_within": report.pass,
        "flow_identity": identity,
    });
    emit(args.out.as_deref(), &pretty(&json_document(&config, body)), stdout)?;
    Ok(pass)
}

pub fn mink_check(args: &LatticeArgs, norm: &str, stdout: &mut dyn Write) -> CliResult<bool> {
    let norm = parse_norm(norm)?;
    let target = check_target(args, Some(norm))?;
    let config = ExperimentConfig {
        experiment: Experiment::MinkCheck(target.params.clone()),
        output: OutputSpec { path: args.out.clone(), format: Format::Json },
    };
    let minima = successive_minima_with(&target.basis, &MinimaOptions::with_norm(norm)).map_err(CliError::domain)?;
    let covol = target.basis.covolume().expect("exact covolume");
    let report = minkowski_report(&minima, covol);
    let body = json!({
        "pass": report.pass,
        "norm": norm,
        "minima": strs(&minima.values),
        "covolume": format_rational(covol),
        "product": format_rational(&report.product),
        "exact": report.exact.as_ref().map(|(v, l, u)| json!({
            "value": format_rational(v),
            "lower": format_rational(l),
            "upper": format_rational(u),
        })),
        "value_f64": report.value_f64,
        "lower_f64": report.lower_f64,
        "upper_f64": report.upper_f64,
        "slack_f64": report.slack_f64,
    });
    emit(args.out.as_deref(), &pretty(&json_document(&config, body)), stdout)?;
    Ok(report.pass)
}

pub fn selftest(
    inject: Option<&str>,
    only: Option<&str>,
    no_time_limits: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<bool> {
    let fault = inject
        .map(|s| {
            Fault::parse(s).ok_or_else(|| {
                let names: Vec<&str> = Fault::ALL.iter().map(|f| f.name()).collect();
                CliError::Parse(format!("unknown fault `{s}` (one of {})", names.join(", ")))
            })
        })
        .transpose()?;
    let only = only
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| CliError::Parse(format!("bad criterion id `{x}`"))))
                .collect::<CliResult<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();
    let opts = AcceptanceOptions { fault, only, enforce_time: !no_time_limits };
    let start = Instant::now();
    let mut io_error = None;
    let report = run_acceptance_with(&opts, |r| {
        let res = writeln!(stdout, "{}", r.line())
            .and_then(|_| writeln!(stderr, "criterion {}: {:.2?} (limit {:?})", r.label, r.elapsed, r.limit));
        if let Err(e) = res {
            io_error.get_or_insert(e);
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    writeln!(stderr, "total: {:.2?}", start.elapsed())?;
    let failures = report.failures();
    if failures.is_empty() {
        writeln!(stdout, "selftest: PASS ({} results)", report.results.len())?;
    } else {
        let ids: Vec<String> = failures.iter().map(|r| format!("{} ({})", r.label, r.name)).collect();
        writeln!(stdout, "selftest: FAIL in {}", ids.join(", "))?;
    }
    Ok(report.passed())
}
