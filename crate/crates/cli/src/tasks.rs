//! Task runners. Each writes its CSV files plus `summary.json` into the
//! output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use sconv::families::{family_psi, family_rate, family_states, StateFamilySpec};
use sconv::hoeffding::{hoeffding_anti, polar_detail, regime_threshold, sc_lower_bound_curve, ConvexRate};
use sconv::ldp::{chernoff_upper, chernoff_upper_at, gartner_ellis_lower_check, log_mgf_convex, WeightedSampleSequence};
use sconv::renyi::{PairSpectra, RenyiVariant};
use sconv::testing::{
    default_a_grid, exponent_sweep_grid, np_upper_bound_violation, rate_sample_sizes, sc_report_with_rate, BlockEvaluator, ExponentReport,
    TestMode,
};
use sconv::Extended;

use crate::error::CliError;
use crate::scenario::*;
use crate::table::{emit_convergence_table, fmt_num, fmt_opt, writer};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub dim_cap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// Invariant checks that failed.
    pub failures: usize,
}

fn ext(x: Extended) -> String {
    match x {
        Extended::Finite(v) => fmt_num(v),
        Extended::Infinite => "inf".into(),
    }
}

fn ext_json(x: Extended) -> Value {
    match x {
        Extended::Finite(v) => json!(v),
        Extended::Infinite => json!("inf"),
    }
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    files.push(path);
    Ok(BufWriter::new(f))
}

fn write_summary(dir: &Path, summary: &Value, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(summary).expect("json value");
    text.push('\n');
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

/// Runs a parsed scenario.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, CliError> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut files = Vec::new();
    let (mut summary, failures) = match &scenario.params {
        Params::Renyi(p) => (run_renyi(scenario.family(), p, opts, &mut files)?, 0),
        Params::Hoeffding(p) => (run_hoeffding(scenario.family.as_ref(), p, opts, &mut files)?, 0),
        Params::NpSweep(p) => run_np_sweep(scenario.family(), p, opts, &mut files)?,
        Params::ScReport(p) => run_sc_report(scenario.family(), p, opts, &mut files)?,
        Params::Ldp(p) => run_ldp(scenario.family.as_ref(), p, opts, &mut files)?,
        Params::Family(p) => (run_family(scenario.family(), p, opts, &mut files)?, 0),
        Params::Verify(p) => {
            let report = crate::verify::run_suite(opts.seed, p.cases.unwrap_or(crate::verify::DEFAULT_CASES));
            let failed = report.failed();
            let mut w = create(&opts.out_dir, "verify.csv", &mut files)?;
            report.write_csv(&mut w)?;
            (serde_json::to_value(&report).expect("serializable"), failed)
        }
    };
    if let Value::Object(m) = &mut summary {
        m.insert("task".into(), json!(scenario.task.name()));
        m.insert("seed".into(), json!(opts.seed));
        m.insert("dim_cap".into(), json!(opts.dim_cap));
        m.insert("invariant_failures".into(), json!(failures));
        if let Some(f) = &scenario.family {
            m.insert("family".into(), json!(f.kind()));
        }
    }
    write_summary(&opts.out_dir, &summary, &mut files)?;
    Ok(RunOutput { files, summary, failures })
}

fn run_renyi(spec: &StateFamilySpec, p: &RenyiParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<Value, CliError> {
    let blocks = p
        .n_list
        .par_iter()
        .map(|&n| -> Result<Vec<[String; 7]>, CliError> {
            let ps = PairSpectra::from_pair(&family_states(spec, n, opts.dim_cap)?)?;
            let mut rows = Vec::new();
            for &alpha in &p.alphas {
                for &v in &p.variants {
                    let val = ps.value(alpha, v)?;
                    let slope = ps.psi_derivative(alpha, v).map(fmt_num).unwrap_or_default();
                    rows.push([
                        n.to_string(),
                        fmt_num(alpha),
                        v.name().to_string(),
                        fmt_num(val.q),
                        fmt_num(val.psi),
                        ext(val.divergence),
                        slope,
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = writer(create(&opts.out_dir, "renyi.csv", files)?);
    w.write_record(["n", "alpha", "variant", "q", "psi", "divergence", "derivative"])?;
    let mut count = 0;
    for row in blocks.iter().flatten() {
        w.write_record(row)?;
        count += 1;
    }
    w.flush()?;
    Ok(json!({ "rows": count }))
}

fn curve_of(spec: Option<&StateFamilySpec>, curve: Option<&CurveSpec>, dim_cap: usize) -> Result<ConvexRate, CliError> {
    match curve {
        Some(CurveSpec::Samples(c)) => {
            ConvexRate::from_nodes(&c.alphas, &c.psis, c.right_derivative).map_err(|e| CliError::at(e, "/params/curve"))
        }
        Some(CurveSpec::Analytic(AnalyticCurve::Quadratic { c })) => {
            ConvexRate::quadratic(*c).map_err(|e| CliError::at(e, "/params/curve"))
        }
        Some(CurveSpec::Analytic(AnalyticCurve::Linear { a0 })) => {
            ConvexRate::linear(*a0).map_err(|e| CliError::at(e, "/params/curve"))
        }
        None => {
            let spec = spec.expect("checked at parse time");
            Ok(family_rate(spec, &rate_sample_sizes(spec, dim_cap), dim_cap)?)
        }
    }
}

fn run_hoeffding(spec: Option<&StateFamilySpec>, p: &HoeffdingParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<Value, CliError> {
    let f = curve_of(spec, p.curve.as_ref(), opts.dim_cap)?;
    let results = p
        .r_grid
        .par_iter()
        .map(|&r| Ok((hoeffding_anti(&f, r)?, sc_lower_bound_curve(&f, r)?)))
        .collect::<Result<Vec<_>, sconv::Error>>()?;
    let mut w = writer(create(&opts.out_dir, "hoeffding.csv", files)?);
    w.write_record(["r", "value", "regime", "a_r", "attaining_t", "sc_lower_curve", "tail_dominated", "provenance"])?;
    for (h, lb) in &results {
        w.write_record([
            fmt_num(h.r),
            fmt_num(h.value),
            h.regime.name().to_string(),
            fmt_opt(h.a_r),
            fmt_opt(h.attaining_t),
            fmt_num(*lb),
            h.tail_dominated.to_string(),
            f.label().to_string(),
        ])?;
    }
    w.flush()?;
    if let Some(a_grid) = &p.a_grid {
        let polars: Vec<_> = a_grid.par_iter().map(|&a| polar_detail(&f, a)).collect();
        let mut w = writer(create(&opts.out_dir, "polar.csv", files)?);
        w.write_record(["a", "polar", "attaining_t", "tail_dominated", "provenance"])?;
        for (a, pr) in a_grid.iter().zip(&polars) {
            w.write_record([fmt_num(*a), ext(pr.value), fmt_opt(pr.t), pr.tail_dominated.to_string(), f.label().to_string()])?;
        }
        w.flush()?;
    }
    Ok(json!({
        "curve": f.label(),
        "a_min": f.a_min(),
        "a_max": ext_json(f.a_max()),
        "regime_threshold": ext_json(regime_threshold(&f)),
        "results": results.iter().map(|(h, _)| h).collect::<Vec<_>>(),
    }))
}

fn emit_reports(reports: &[ExponentReport], stem: &str, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    for (k, rep) in reports.iter().enumerate() {
        let w = create(dir, &format!("{stem}_{k:02}.csv"), files)?;
        emit_convergence_table(rep, w)?;
    }
    Ok(())
}

/// Orders at which the finite-`n` bounds are checked.
const CHECK_ALPHAS: [f64; 6] = [1.1, 1.5, 2.0, 3.0, 5.0, 8.0];

#[derive(Default)]
struct InvariantLog {
    entries: Vec<Value>,
    failures: usize,
}

impl InvariantLog {
    fn record(&mut self, check: &str, n: usize, excess: f64, tol: f64) {
        let ok = excess <= tol;
        if !ok {
            self.failures += 1;
        }
        self.entries.push(json!({ "check": check, "n": n, "excess": excess, "tol": tol, "passed": ok }));
    }

    fn skip(&mut self, check: &str, n: usize, why: String) {
        self.entries.push(json!({ "check": check, "n": n, "skipped": why }));
    }

    fn summary(self) -> (Value, usize) {
        (json!(self.entries), self.failures)
    }
}

/// Finite-`n` checks on every sweep row: the measurement bound
/// `log Tr ρT <= ((α−1)/α)[D*_α + log Tr σT]` and the Chernoff-type bound
/// `log Tr ρS <= −[N a(α−1) − ψ*_n(α)]`.
fn check_reports(spec: &StateFamilySpec, reports: &[ExponentReport], n_list: &[usize], dim_cap: usize) -> (Value, usize) {
    let psis: Vec<Result<Vec<(f64, f64)>, sconv::Error>> = n_list
        .par_iter()
        .map(|&n| {
            CHECK_ALPHAS
                .iter()
                .map(|&a| family_psi(spec, n, a, RenyiVariant::Sandwiched, dim_cap).map(|v| (a, v)))
                .filter_map(|r| match r {
                    Ok((a, Extended::Finite(v))) => Some(Ok((a, v))),
                    Ok((_, Extended::Infinite)) => None,
                    Err(e) => Some(Err(e)),
                })
                .collect()
        })
        .collect();
    let mut log = InvariantLog::default();
    for (&n, psi) in n_list.iter().zip(&psis) {
        let psi = match psi {
            Ok(p) => p,
            Err(e) => {
                log.skip("finite_n_bounds", n, e.to_string());
                continue;
            }
        };
        let big_n = spec.scaled(n);
        let tol = 1e-9 * (1.0 + big_n);
        for rep in reports {
            if let Some(e) = rep.per_n.iter().find(|e| e.n == n) {
                log.record("measurement_bound", n, sconv::testing::measurement_bound_violation(e, psi), tol);
                log.record("np_chernoff_bound", n, np_upper_bound_violation(e, big_n, psi), tol);
            }
        }
    }
    log.summary()
}

fn run_np_sweep(spec: &StateFamilySpec, p: &SweepParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<(Value, usize), CliError> {
    let f = family_rate(spec, &rate_sample_sizes(spec, opts.dim_cap), opts.dim_cap)?;
    let a_list = match &p.a_grid {
        Some(a) => a.clone(),
        None => default_a_grid(&f).map_err(|e| CliError::at(e, "/params/a_grid"))?,
    };
    let reports = exponent_sweep_grid(spec, &f, &a_list, &p.n_list, p.mode, opts.dim_cap)?;
    emit_reports(&reports, "np_sweep", &opts.out_dir, files)?;
    let (mut checks, mut failures) = check_reports(spec, &reports, &p.n_list, opts.dim_cap);
    // β is nonincreasing in the threshold at every n.
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&i, &j| reports[i].value.total_cmp(&reports[j].value));
    for (k, &n) in p.n_list.iter().enumerate() {
        let betas: Vec<f64> = order.iter().map(|&i| reports[i].per_n[k].beta_err).collect();
        let excess = betas.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let ok = betas.len() < 2 || excess <= 1e-15;
        failures += usize::from(!ok);
        if let Value::Array(v) = &mut checks {
            v.push(json!({ "check": "beta_monotone_in_a", "n": n, "excess": excess.max(0.0), "passed": ok }));
        }
    }
    Ok((json!({ "reports": reports, "invariants": checks }), failures))
}

fn run_sc_report(spec: &StateFamilySpec, p: &ScParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<(Value, usize), CliError> {
    let f = family_rate(spec, &rate_sample_sizes(spec, opts.dim_cap), opts.dim_cap)?;
    let reports = p
        .r_grid
        .iter()
        .map(|&r| sc_report_with_rate(spec, &f, r, &p.n_list, p.mode, opts.dim_cap))
        .collect::<Result<Vec<_>, _>>()?;
    emit_reports(&reports, "sc_report", &opts.out_dir, files)?;
    let (checks, failures) = check_reports(spec, &reports, &p.n_list, opts.dim_cap);
    Ok((json!({ "reports": reports, "invariants": checks }), failures))
}

fn ldp_sequence(spec: Option<&StateFamilySpec>, src: &LdpSource, dim_cap: usize) -> Result<WeightedSampleSequence, CliError> {
    match src {
        LdpSource::Binomial { p, ns } => {
            WeightedSampleSequence::binomial(ns, *p).map_err(|e| CliError::at(e, "/params/source"))
        }
        LdpSource::Pinched { ns, reference } => {
            let spec = spec.expect("checked at parse time");
            let pairs = ns
                .par_iter()
                .map(|&n| {
                    let ev = BlockEvaluator::new(spec, n, TestMode::Pinched, dim_cap)?;
                    ev.classes().cloned().ok_or_else(|| {
                        CliError::Runtime(format!("no likelihood classes for {} at n = {n}", spec.kind()))
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(WeightedSampleSequence::from_classes(&pairs, *reference)?)
        }
    }
}

fn run_ldp(spec: Option<&StateFamilySpec>, p: &LdpParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<(Value, usize), CliError> {
    let seq = ldp_sequence(spec, &p.source, opts.dim_cap)?;
    let top = seq
        .levels()
        .iter()
        .flat_map(|l| l.atoms.iter().map(|a| a.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let window_end = p.window_end.unwrap_or(top + 1e-9 * (1.0 + top.abs()));
    let t_max = 4.0 * p.t_range.1.abs().max(1.0);
    let t_grid: Vec<f64> = (0..=128).map(|k| t_max * k as f64 / 128.0).collect();
    let per_x = p
        .x_grid
        .par_iter()
        .map(|&x| {
            let bound = chernoff_upper(&seq, x, &t_grid)?;
            let ge = gartner_ellis_lower_check(&seq, x, (x, window_end), p.t_range);
            Ok((x, bound, ge))
        })
        .collect::<Result<Vec<_>, sconv::Error>>()?;
    let mut w = writer(create(&opts.out_dir, "ldp.csv", files)?);
    w.write_record(["n", "x", "exact_tail_rate", "chernoff_bound", "ge_lower", "margin"])?;
    let mut checks = Vec::new();
    for (x, bound, ge) in &per_x {
        for (k, level) in seq.levels().iter().enumerate() {
            let (lower, margin) = match ge {
                Ok(c) => (fmt_num(c.per_n[k].predicted), fmt_num(c.per_n[k].margin)),
                Err(_) => (String::new(), String::new()),
            };
            w.write_record([level.n.to_string(), fmt_num(*x), fmt_num(level.upper_tail_rate(*x)), fmt_num(*bound), lower, margin])?;
        }
        checks.push(match ge {
            Ok(c) => json!({ "x": x, "rate": c.rate, "cauchy_gap": c.cauchy_gap, "margins_shrink": c.margins_shrink() }),
            Err(e) => json!({ "x": x, "skipped": e.to_string() }),
        });
    }
    w.flush()?;
    // Exact finite-n Chernoff bounds and convexity of every log-MGF.
    let mut log = InvariantLog::default();
    let convex_grid: Vec<f64> = (-64..=64).map(|k| t_max * k as f64 / 64.0).collect();
    for level in seq.levels() {
        for &x in &p.x_grid {
            let bound = chernoff_upper_at(level, x, &t_grid)?;
            log.record("finite_n_chernoff", level.n, level.upper_tail_rate(x) - bound, 1e-12);
        }
        let convex = log_mgf_convex(level, &convex_grid)?;
        log.record("log_mgf_convex", level.n, if convex { 0.0 } else { 1.0 }, 0.0);
    }
    let (invariants, failures) = log.summary();
    Ok((json!({ "window_end": window_end, "lower_checks": checks, "invariants": invariants }), failures))
}

fn run_family(spec: &StateFamilySpec, p: &FamilyParams, opts: &RunOptions, files: &mut Vec<PathBuf>) -> Result<Value, CliError> {
    let limit = if p.variant == RenyiVariant::Sandwiched || spec.is_classical() {
        Some(family_rate(spec, &rate_sample_sizes(spec, opts.dim_cap), opts.dim_cap)?)
    } else {
        None
    };
    let mut jobs = Vec::new();
    for &n in &p.n_list {
        for &alpha in &p.alphas {
            jobs.push((n, alpha));
        }
    }
    let values = jobs
        .par_iter()
        .map(|&(n, alpha)| family_psi(spec, n, alpha, p.variant, opts.dim_cap))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = writer(create(&opts.out_dir, "family.csv", files)?);
    w.write_record(["n", "alpha", "variant", "psi_n", "psi_n_over_n", "psi_limit", "provenance"])?;
    for ((n, alpha), psi) in jobs.iter().zip(&values) {
        let per = match psi {
            Extended::Finite(x) => fmt_num(x / spec.scaled(*n)),
            Extended::Infinite => "inf".into(),
        };
        let (lim, prov) = match &limit {
            Some(f) => (fmt_num(f.eval(*alpha)), f.label().to_string()),
            None => (String::new(), "no limit curve for this variant".to_string()),
        };
        w.write_record([n.to_string(), fmt_num(*alpha), p.variant.name().to_string(), ext(*psi), per, lim, prov])?;
    }
    w.flush()?;
    Ok(json!({ "rows": values.len(), "limit": limit.as_ref().map(|f| f.label().to_string()) }))
}
