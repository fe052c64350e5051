//! One function per subcommand; each returns the text to write.

use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use shadowtail::compare::compare_at;
use shadowtail::dual::DualTransform;
use shadowtail::gpd::{self, empirical_mean_excess};
use shadowtail::shadow::ShadowModel;
use shadowtail::simulate::{self, bootstrap_shadow_mean, sample_quantile, SimConfig};

use crate::args::{
    CompareArgs, DiagnoseArgs, Experiment, FitArgs, LevelArgs, ReportArgs, SimulateArgs, ThresholdArgs,
};
use crate::input::read_sample;
use crate::pipeline::{fit_shadow_model, ThresholdSpec};
use crate::report::{
    fmt_f64, sensitivity, to_json, DataSummary, FitSummary, Measures, Naive, Provenance, RiskReport, Status,
    SCHEMA_VERSION,
};

pub const DEFAULT_LEVELS: [f64; 2] = [0.95, 0.99];

/// Bad flag combinations that clap cannot express; exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn require_seed(seed: Option<u64>, why: &str) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => Err(UsageError(format!("{why} needs a seed: pass --seed or set SHADOW_SEED")).into()),
    }
}

fn threshold_spec(t: &ThresholdArgs) -> ThresholdSpec {
    match (t.threshold, t.threshold_quantile) {
        (Some(v), _) => ThresholdSpec::Value(v),
        (None, Some(q)) => ThresholdSpec::Quantile(q),
        (None, None) => ThresholdSpec::default(),
    }
}

pub fn fit(args: &FitArgs) -> Result<String> {
    let seed = match args.bootstrap {
        Some(_) => Some(require_seed(args.seed, "--bootstrap")?),
        None => None,
    };
    let (lower, upper) = (args.bounds.lower_bound, args.bounds.upper_bound);
    let sample = read_sample(&args.data.input, args.data.format, args.data.column, args.data.field.as_deref())?;
    let spec = threshold_spec(&args.threshold);
    let outcome = fit_shadow_model(&sample, lower, upper, spec)?;
    let u = outcome.threshold;

    let var_levels = args.levels.var_levels.clone().unwrap_or(DEFAULT_LEVELS.to_vec());
    let es_levels = args.levels.es_levels.clone().unwrap_or(DEFAULT_LEVELS.to_vec());
    let measures = match &outcome.model {
        Some(m) => Some(Measures::evaluate(m, &var_levels, &es_levels)?),
        None => None,
    };
    let sensitivity = match (&outcome.model, &args.levels.h_grid) {
        (Some(m), Some(grid)) => Some(sensitivity(m, grid)?),
        _ => None,
    };

    let raw: Vec<f64> = outcome.exceedances.iter().map(|y| y - u).collect();
    let naive_fit = gpd::fit_mle(&raw).context("naive fit on raw excesses")?;
    let naive = Naive {
        sample_mean_above_u: outcome.exceedances.iter().sum::<f64>() / outcome.exceedances.len() as f64,
        naive_gpd_fit_on_y: FitSummary::from(&naive_fit),
        dual_mean_finite: naive_fit.params.moment_exists(1.0)?,
    };

    let bootstrap = match (args.bootstrap, seed, &outcome.model) {
        (Some(reps), Some(seed), Some(_)) => Some(bootstrap_shadow_mean(
            &outcome.exceedances,
            lower,
            upper,
            u,
            args.level,
            reps,
            seed,
        )?),
        _ => None,
    };

    let (min, max) = sample
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let report = RiskReport {
        schema_version: SCHEMA_VERSION,
        status: if outcome.warnings.is_empty() {
            Status::Ok
        } else {
            Status::Warning
        },
        warnings: outcome.warnings.clone(),
        data: DataSummary {
            source: sample.source.clone(),
            n_total: sample.n_total(),
            n_exceedances: outcome.exceedances.len(),
            sample_min: min,
            sample_max: max,
            lower_bound: lower,
            upper_bound: upper,
            threshold: u,
            threshold_quantile: match spec {
                ThresholdSpec::Quantile(q) => Some(q),
                ThresholdSpec::Value(_) => None,
            },
        },
        fit: FitSummary::from(&outcome.fit),
        model: outcome.model,
        measures,
        naive,
        bootstrap,
        sensitivity,
        provenance: Provenance::new(sample.digest.clone(), seed),
    };
    Ok(to_json(&report))
}

pub fn report(args: &ReportArgs) -> Result<String> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let mut report: RiskReport =
        serde_json::from_str(&text).with_context(|| format!("{} is not a risk report", args.input.display()))?;
    let Some(model) = report.model else {
        bail!("the report has no shadow model (fit status: {:?})", report.status);
    };
    let LevelArgs {
        var_levels,
        es_levels,
        h_grid,
    } = &args.levels;
    let previous = report.measures.as_ref();
    let levels_of = |given: &Option<Vec<f64>>, old: Option<&Vec<crate::report::LevelValue>>| match (given, old) {
        (Some(v), _) => v.clone(),
        (None, Some(old)) => old.iter().map(|lv| lv.level).collect(),
        (None, None) => DEFAULT_LEVELS.to_vec(),
    };
    let var = levels_of(var_levels, previous.map(|m| &m.var));
    let es = levels_of(es_levels, previous.map(|m| &m.es));
    report.measures = Some(Measures::evaluate(&model, &var, &es)?);
    if let Some(grid) = h_grid {
        report.sensitivity = Some(sensitivity(&model, grid)?);
    }
    report.provenance.timestamp = crate::report::timestamp();
    Ok(to_json(&report))
}

pub fn compare(args: &CompareArgs) -> Result<String> {
    let u = args.threshold.unwrap_or(args.lower_bound);
    let grid: Vec<f64> = match (&args.h_curve, args.upper_bound) {
        (Some(curve), _) => curve.clone(),
        (None, Some(h)) => vec![h],
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let rows = shadowtail::par::map_slice(&grid, |&h| compare_at(args.alpha, args.sigma, args.lower_bound, h, u));
    let mut out = String::from("upper_bound,truncated_mean,absorbing_mean,shadow_mean,ratio\n");
    for row in rows {
        let c = row?;
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(c.upper),
            fmt_f64(c.truncated_mean),
            fmt_f64(c.absorbing_mean),
            fmt_f64(c.shadow_mean),
            fmt_f64(c.ratio)
        )?;
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ExperimentSummary {
    model: ShadowModel,
    seed: u64,
    n: usize,
    censor_at: f64,
    kept: usize,
    naive: FitSummary,
    dual: FitSummary,
    /// `|xi_naive - xi_dual|` over the combined standard error.
    shape_gap_in_se: Option<f64>,
    /// `xi_naive + 2 se >= 1`: the raw data cannot rule out an infinite mean.
    naive_consistent_with_infinite_mean: bool,
    shadow_mean: f64,
    plugin_shadow_mean: Option<f64>,
}

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let seed = require_seed(args.seed, "simulate")?;
    let (lower, upper) = (args.bounds.lower_bound, args.bounds.upper_bound);
    let u = args.threshold.unwrap_or(lower);
    let model = ShadowModel::new(args.alpha, args.sigma, lower, upper, u)?;
    let mut cfg = SimConfig::new(seed, args.n);
    cfg.censor_at = args.censor_at;

    match args.experiment {
        None => {
            let ys = simulate::sample_shadow_y(&model, &cfg)?;
            let mut out = String::with_capacity(24 * (ys.len() + 1));
            out.push_str("y\n");
            for y in ys {
                out.push_str(&fmt_f64(y));
                out.push('\n');
            }
            Ok(out)
        }
        Some(Experiment::ApparentTail) => {
            let Some(m) = args.censor_at else {
                return Err(UsageError("--experiment apparent-tail needs --censor-at".into()).into());
            };
            let r = simulate::apparent_tail_experiment(&model, &cfg)?;
            let consistent = match r.naive.std_errors {
                Some((se, _)) => r.naive.params.xi + 2.0 * se >= 1.0,
                None => r.naive.params.xi >= 1.0,
            };
            let plugin = ShadowModel::from_gpd(r.dual.params, lower, upper, u)
                .and_then(|m| m.mean())
                .ok();
            let summary = ExperimentSummary {
                model,
                seed,
                n: args.n,
                censor_at: m,
                kept: r.kept,
                naive: FitSummary::from(&r.naive),
                dual: FitSummary::from(&r.dual),
                shape_gap_in_se: r.shape_gap_in_se(),
                naive_consistent_with_infinite_mean: consistent,
                shadow_mean: model.mean()?,
                plugin_shadow_mean: plugin,
            };
            Ok(to_json(&summary))
        }
    }
}

/// Number of points on the survival grid.
const SURVIVAL_GRID: usize = 200;

pub fn diagnose(args: &DiagnoseArgs) -> Result<String> {
    let (lower, upper) = (args.bounds.lower_bound, args.bounds.upper_bound);
    let sample = read_sample(&args.data.input, args.data.format, args.data.column, args.data.field.as_deref())?;
    let outcome = fit_shadow_model(&sample, lower, upper, threshold_spec(&args.threshold))?;
    let t = DualTransform::new(lower, upper)?;
    let u = outcome.threshold;

    let mut ys = sample.values.clone();
    ys.sort_by(f64::total_cmp);
    let zs = ys.iter().map(|&y| t.phi(y)).collect::<shadowtail::Result<Vec<_>>>()?;
    let median = sample_quantile(&ys, 0.5);
    let start = ys.partition_point(|&y| y <= median);
    let picks: Vec<usize> = (start..ys.len()).step_by(5).collect();
    let y_thresholds: Vec<f64> = picks.iter().map(|&i| ys[i]).collect();
    let z_thresholds: Vec<f64> = picks.iter().map(|&i| zs[i]).collect();

    let mut out = String::from("space,threshold_or_y,value,series_tag\n");
    let mut row = |space: &str, x: f64, v: f64, tag: &str| {
        writeln!(out, "{space},{},{},{tag}", fmt_f64(x), fmt_f64(v)).expect("writing to a String");
    };
    for (x, e) in empirical_mean_excess(&ys, &y_thresholds) {
        row("y", x, e, "mean_excess");
    }
    for (x, e) in empirical_mean_excess(&zs, &z_thresholds) {
        row("z", x, e, "mean_excess");
    }

    let tail = &outcome.exceedances;
    let m = tail.len() as f64;
    for &y in tail {
        let above = tail.len() - tail.partition_point(|&v| v <= y);
        row("y", y, above as f64 / m, "empirical_survival");
    }

    let raw: Vec<f64> = tail.iter().map(|y| y - u).collect();
    let naive = gpd::fit_mle(&raw).context("naive fit on raw excesses")?.params;
    let dual = outcome.fit.params;
    let reach = 1.5 * (upper - u);
    let mut grid: Vec<f64> = (0..=SURVIVAL_GRID)
        .map(|j| u + reach * 10f64.powf(-6.0 + 6.0 * j as f64 / SURVIVAL_GRID as f64))
        .collect();
    grid.push(upper);
    grid.sort_by(f64::total_cmp);
    for &y in &grid {
        let s = if y < upper {
            dual.survival(t.dual_excess(u, y)?)?
        } else {
            0.0
        };
        row("y", y, s, "dual_model_survival");
    }
    for &y in &grid {
        row("y", y, naive.survival(y - u)?, "naive_pareto_survival");
    }
    Ok(out)
}
