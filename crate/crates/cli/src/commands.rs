//! One handler per subcommand.

use std::time::Instant;

use num_rational::BigRational;
use serde_json::{json, Value};

use queuemax::asymptotics::{self, convergence_report, limit_constants, AsymptoticsError, Method};
use queuemax::ell2::{
    self, appendix_cascade, closed_form_g, dp_partial_sums, quartic_zeros, ClosedFormEntry,
    Ell2Error,
};
use queuemax::montecarlo::{replica_sums, universality_experiment, SimConfig, SimError, SimResult};
use queuemax::series::{max_gf_paths, SeriesError};
use queuemax::stationary::{stationary_model, stationary_moments, stationary_pmf, StationaryError};
use queuemax::walk::{dp_step, WalkError};
use queuemax::{
    joint_dist, max_dist, parse_probability, phase_of, JointTable, Mode, ParamError, Params, Weight,
};

use crate::args::{
    AsymptoticsArgs, DistArgs, Ell2Args, GfCheckArgs, SimulateArgs, StationaryArgs,
    UniversalityArgs,
};
use crate::output::{object, rational_text, to_json, Cell, Report, Table};

/// Failure classes with their exit codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input, or a request the tool refuses (exit 1).
    Validation(String),
    /// A computation failed its own consistency checks (exit 2).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::InvalidProbability(_) | SeriesError::LevelTooSmall { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<Ell2Error> for CliError {
    fn from(e: Ell2Error) -> Self {
        match e {
            Ell2Error::InvalidProbability(_)
            | Ell2Error::NonPositiveLambda(_)
            | Ell2Error::LambdaOutsideUnit(_)
            | Ell2Error::Branch(_)
            | Ell2Error::Pole(_)
            | Ell2Error::EmptyCascade
            | Ell2Error::Walk(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<StationaryError> for CliError {
    fn from(e: StationaryError) -> Self {
        match e {
            StationaryError::NotStable(_)
            | StationaryError::InvalidProbability(_)
            | StationaryError::ZeroEll
            | StationaryError::Walk(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn params(p: &str, ell: usize, mode: Mode) -> Result<Params, CliError> {
    Ok(Params::new(parse_probability(p)?, ell, mode)?)
}

fn dist_params(args: &DistArgs) -> Result<Params, CliError> {
    params(&args.p, args.ell, args.mode)
}

fn detail_header(
    params: &Params,
    n: usize,
    a_cap: Option<usize>,
    lost: Value,
) -> Vec<(&'static str, Value)> {
    vec![
        ("p", Value::String(rational_text(params.p()))),
        ("ell", json!(params.ell())),
        ("n", json!(n)),
        ("mode", Value::String(params.mode().to_string())),
        ("a_cap", json!(a_cap)),
        ("lost_mass", lost),
    ]
}

fn maxdist_with<W: Weight + Cell>(params: &Params, args: &DistArgs) -> Result<Report, CliError> {
    let table = joint_dist::<W>(params, args.n, args.amax)?;
    let dist = max_dist(&table);
    let mut body = serde_json::Map::new();
    let mut csv = Table::new(&["a", "probability"]);
    for (a, w) in dist.values.iter().enumerate() {
        body.insert(a.to_string(), w.json());
        csv.push(vec![a.to_string(), w.text()]);
    }
    let body = Value::Object(body);
    let json = if args.detail {
        let mut fields = detail_header(params, args.n, table.a_cap(), dist.lost_mass.json());
        fields.push(("distribution", body));
        object(fields)
    } else {
        body
    };
    Ok(Report::new(json, csv))
}

pub fn maxdist(args: &DistArgs) -> Result<Report, CliError> {
    let params = dist_params(args)?;
    match params.mode() {
        Mode::Exact => maxdist_with::<BigRational>(&params, args),
        Mode::Float => maxdist_with::<f64>(&params, args),
    }
}

fn jointdist_with<W: Weight + Cell>(params: &Params, args: &DistArgs) -> Result<Report, CliError> {
    let table = joint_dist::<W>(params, args.n, args.amax)?;
    let mut entries = Vec::new();
    let mut csv = Table::new(&["x", "a", "probability"]);
    for ((x, a), w) in table.entries() {
        entries.push(json!({ "x": x, "a": a, "probability": w.json() }));
        csv.push(vec![x.to_string(), a.to_string(), w.text()]);
    }
    let body = Value::Array(entries);
    let json = if args.detail {
        let mut fields = detail_header(params, args.n, table.a_cap(), table.lost_mass().json());
        fields.push(("entries", body));
        object(fields)
    } else {
        body
    };
    Ok(Report::new(json, csv))
}

pub fn jointdist(args: &DistArgs) -> Result<Report, CliError> {
    let params = dist_params(args)?;
    match params.mode() {
        Mode::Exact => jointdist_with::<BigRational>(&params, args),
        Mode::Float => jointdist_with::<f64>(&params, args),
    }
}

pub fn gf_check(args: &GfCheckArgs) -> Result<Report, CliError> {
    let params = params(&args.p, 1, Mode::Exact)?;
    if args.terms == 0 {
        return Err(CliError::Validation("--terms must be at least 1".into()));
    }
    let paths = max_gf_paths(params.p(), args.a, args.terms)?;
    paths.check()?;
    let mut table = JointTable::<BigRational>::initial(None);
    let mut rows = Vec::new();
    let mut csv = Table::new(&["n", "series", "dp", "match"]);
    let mut matched = 0;
    for n in 1..=args.terms {
        for i in 2 * n - 1..=2 * n {
            table = dp_step(&table, phase_of(i, 1), &params)?;
        }
        let dp = max_dist(&table).get(args.a);
        let series = paths.bracket.coeff(n)?.clone();
        let ok = series == dp;
        matched += usize::from(ok);
        rows.push(json!({ "n": n, "series": rational_text(&series), "dp": rational_text(&dp), "match": ok }));
        csv.push(vec![
            n.to_string(),
            rational_text(&series),
            rational_text(&dp),
            ok.to_string(),
        ]);
    }
    let pass = matched == args.terms;
    let summary = format!(
        "{}: {matched}/{} coefficients match DP",
        if pass { "PASS" } else { "FAIL" },
        args.terms
    );
    let json = object(vec![
        ("p", Value::String(rational_text(params.p()))),
        ("a", json!(args.a)),
        ("terms", json!(args.terms)),
        ("paths_agree", Value::Bool(true)),
        ("summary", Value::String(summary.clone())),
        ("coefficients", Value::Array(rows)),
    ]);
    let mut report = Report::new(json, csv);
    report.summary = Some(summary);
    report.failed = !pass;
    Ok(report)
}

/// Absolute slack added to the DP tail bound, and relative cascade tolerance.
const ELL2_TOL: f64 = 1e-8;

pub fn ell2_verify(args: &Ell2Args) -> Result<Report, CliError> {
    let params = params(&args.p, 2, Mode::Float)?;
    let p = params.p_f64();
    let lambda = args.lambda;
    if args.amax < 2 {
        return Err(CliError::Validation(
            "--amax must be at least 2 to reach G(λ,0,2)".into(),
        ));
    }
    let zeros = quartic_zeros(p, lambda)?;
    let entries: Vec<(usize, usize)> = ClosedFormEntry::ALL.iter().map(|e| e.index()).collect();
    let partial = dp_partial_sums(p, lambda, &entries, args.terms)?;
    let cascade = appendix_cascade(p, lambda, args.amax)?;
    let mut rows = Vec::new();
    let mut csv = Table::new(&[
        "x",
        "a",
        "closed_form",
        "dp_partial_sum",
        "tail_bound",
        "cascade",
        "partial_ok",
        "cascade_ok",
    ]);
    let mut passed = 0;
    for (k, which) in ClosedFormEntry::ALL.iter().enumerate() {
        let (x, a) = which.index();
        let closed = closed_form_g(p, lambda, *which)?;
        let dp = partial.values[k];
        let casc = cascade
            .get(x, a)
            .ok_or_else(|| CliError::Numeric(format!("cascade did not determine ({x},{a})")))?;
        let partial_ok = (closed - dp).abs() <= partial.tail_bound + ELL2_TOL;
        let cascade_ok = (closed - casc).abs() <= ELL2_TOL * closed.abs();
        passed += usize::from(partial_ok && cascade_ok);
        rows.push(json!({
            "x": x, "a": a, "closed_form": closed, "dp_partial_sum": dp,
            "tail_bound": partial.tail_bound, "cascade": casc,
            "partial_ok": partial_ok, "cascade_ok": cascade_ok,
        }));
        csv.push(vec![
            x.to_string(),
            a.to_string(),
            closed.text(),
            dp.text(),
            partial.tail_bound.text(),
            casc.text(),
            partial_ok.to_string(),
            cascade_ok.to_string(),
        ]);
    }
    let levels: Vec<Value> = cascade
        .levels
        .iter()
        .map(|l| {
            json!({
                "a": l.a, "unknowns": l.unknowns, "condition": l.condition,
                "undetermined": l.undetermined,
            })
        })
        .collect();
    let total = ClosedFormEntry::ALL.len();
    let pass = passed == total;
    let summary = format!(
        "{}: {passed}/{total} closed forms agree with DP partial sums and cascade",
        if pass { "PASS" } else { "FAIL" }
    );
    let json = object(vec![
        ("p", json!(p)),
        ("lambda", json!(lambda)),
        ("terms", json!(args.terms)),
        ("theta", json!(zeros.theta)),
        ("omega", json!(zeros.omega)),
        ("kernel_zeros", json!(zeros.zeros)),
        ("kernel_residuals", json!(zeros.relative_residuals())),
        ("g00", json!(ell2::g00(p, lambda))),
        ("summary", Value::String(summary.clone())),
        ("entries", Value::Array(rows)),
        ("cascade_levels", Value::Array(levels)),
        ("cascade_values", cascade_values(&cascade)),
    ]);
    let mut report = Report::new(json, csv);
    report.summary = Some(summary);
    report.failed = !pass;
    Ok(report)
}

fn cascade_values(cascade: &ell2::CascadeResult) -> Value {
    Value::Array(
        cascade
            .values
            .iter()
            .map(|(&(x, a), v)| json!({ "x": x, "a": a, "value": v }))
            .collect(),
    )
}

pub fn stationary(args: &StationaryArgs) -> Result<Report, CliError> {
    let params = params(&args.p, args.ell, Mode::Float)?;
    let model = stationary_model(params.p_f64(), args.ell)?;
    let pmf = stationary_pmf(&model, args.xmax)?;
    let mut csv = Table::new(&["x", "probability"]);
    for (x, v) in pmf.values.iter().enumerate() {
        csv.push(vec![x.to_string(), v.text()]);
    }
    let values = json!(pmf.values);
    let json = if args.detail {
        let (mean, fact2) = stationary_moments(&model);
        let complex = |zs: &[num_complex::Complex64]| -> Value {
            Value::Array(
                zs.iter()
                    .map(|z| json!({ "re": z.re, "im": z.im }))
                    .collect(),
            )
        };
        object(vec![
            ("p", Value::String(rational_text(params.p()))),
            ("ell", json!(args.ell)),
            ("roots", complex(&model.roots)),
            ("weights", complex(&model.weights)),
            ("pmf", values),
            ("tail_mass", json!(pmf.lost_mass)),
            ("mean", json!(mean)),
            ("second_factorial_moment", json!(fact2)),
        ])
    } else {
        values
    };
    Ok(Report::new(json, csv))
}

const ABEL_NOTE: &str = "the reference constants are Abel limits at p=1/2; agreement of the rows \
is consistent with them and does not prove ordinary convergence";

pub fn asymptotics(args: &AsymptoticsArgs) -> Result<Report, CliError> {
    let params = params(&args.p, args.ell, Mode::Float)?;
    let (first, second) = limit_constants();
    let constants = json!({
        "sqrt_pi_over_8": first,
        "catalan": asymptotics::catalan_constant(),
        "catalan_half": second,
    });
    if args.n.is_empty() {
        let mut csv = Table::new(&["name", "value"]);
        csv.push(vec!["sqrt_pi_over_8".into(), first.text()]);
        csv.push(vec![
            "catalan".into(),
            asymptotics::catalan_constant().text(),
        ]);
        csv.push(vec!["catalan_half".into(), second.text()]);
        return Ok(Report::new(json!({ "constants": constants }), csv));
    }
    let report = convergence_report(&params, &args.n, args.method, args.reps, args.seed)?;
    let mut csv = Table::new(&[
        "n",
        "method",
        "estimate_first",
        "stderr_first",
        "delta_first",
        "estimate_second",
        "stderr_second",
        "delta_second",
    ]);
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.text());
    for row in &report.rows {
        csv.push(vec![
            row.n.to_string(),
            match row.method {
                Method::Dp => "dp".into(),
                Method::Mc => "mc".into(),
            },
            row.estimate_first.text(),
            opt(row.stderr_first),
            row.delta_first.text(),
            row.estimate_second.text(),
            opt(row.stderr_second),
            row.delta_second.text(),
        ]);
    }
    let seeds: Vec<u64> = report.rows.iter().filter_map(|r| r.seed).collect();
    let json = json!({ "constants": constants, "note": ABEL_NOTE, "report": to_json(&report) });
    let mut out = Report::new(json, csv);
    if args.method == Method::Mc {
        out.seeds = std::iter::once(args.seed).chain(seeds).collect();
    }
    Ok(out)
}

pub fn simulate(args: &SimulateArgs) -> Result<Report, CliError> {
    let params = params(&args.p, args.ell, Mode::Float)?;
    let config = SimConfig::new(params.clone(), args.n, args.reps, args.seed)?;
    let range = args.replicas.clone().unwrap_or(0..args.reps);
    if range.end > args.reps {
        return Err(CliError::Validation(format!(
            "replica range {}..{} exceeds --reps {}",
            range.start, range.end, args.reps
        )));
    }
    let start = Instant::now();
    let sums = replica_sums(&config, range.clone());
    let result = SimResult::from_sums(&sums, args.seed, start.elapsed());
    let scale = (args.n as f64).sqrt();
    let scaled_mean = result.mean_max / scale;
    let scaled_second = result.mean_max_sq / args.n as f64;
    let json = json!({
        "p": rational_text(params.p()),
        "ell": args.ell,
        "n": args.n,
        "reps": args.reps,
        "seed": args.seed,
        "replicas": [range.start, range.end],
        "mean_max": result.mean_max,
        "mean_max_sq": result.mean_max_sq,
        "variance": result.variance,
        "stderr_mean": result.stderr_mean,
        "stderr_sq": result.stderr_sq,
        "scaled_mean": scaled_mean,
        "scaled_second": scaled_second,
        "sums": {
            "count": sums.count.to_string(),
            "sum": sums.sum.to_string(),
            "sum_sq": sums.sum_sq.to_string(),
            "sum_fourth": sums.sum_fourth.to_string(),
        },
    });
    let mut csv = Table::new(&[
        "p",
        "ell",
        "n",
        "reps",
        "seed",
        "replica_start",
        "replica_end",
        "mean_max",
        "mean_max_sq",
        "variance",
        "stderr_mean",
        "stderr_sq",
        "scaled_mean",
        "scaled_second",
    ]);
    csv.push(vec![
        rational_text(params.p()),
        args.ell.to_string(),
        args.n.to_string(),
        args.reps.to_string(),
        args.seed.to_string(),
        range.start.to_string(),
        range.end.to_string(),
        result.mean_max.text(),
        result.mean_max_sq.text(),
        result.variance.text(),
        result.stderr_mean.text(),
        result.stderr_sq.text(),
        scaled_mean.text(),
        scaled_second.text(),
    ]);
    let mut report = Report::new(json, csv);
    report.seeds = vec![args.seed];
    Ok(report)
}

pub fn universality(args: &UniversalityArgs) -> Result<Report, CliError> {
    let params = params(&args.p, 1, Mode::Float)?;
    let report = universality_experiment(&params, &args.ells, args.n, args.reps, args.seed)?;
    let mut csv = Table::new(&[
        "ell",
        "seed",
        "scaled_mean",
        "scaled_mean_stderr",
        "scaled_second",
        "scaled_second_stderr",
        "mean_rel_diff",
        "mean_z",
        "second_z",
        "label",
    ]);
    for row in &report.rows {
        csv.push(vec![
            row.ell.to_string(),
            row.seed.to_string(),
            row.scaled_mean.text(),
            row.scaled_mean_stderr.text(),
            row.scaled_second.text(),
            row.scaled_second_stderr.text(),
            row.mean_rel_diff.text(),
            row.mean_z.text(),
            row.second_z.text(),
            report.label.to_string(),
        ]);
    }
    let seeds = std::iter::once(args.seed)
        .chain(std::iter::once(report.baseline.seed))
        .chain(report.rows.iter().map(|r| r.seed))
        .fold(Vec::new(), |mut acc, s| {
            if !acc.contains(&s) {
                acc.push(s);
            }
            acc
        });
    let mut out = Report::new(to_json(&report), csv);
    out.seeds = seeds;
    Ok(out)
}
