//! Acceptance run: one PASS/FAIL line per criterion, with the measured value.
//!
//! Exits nonzero only when a check fails that is not listed in
//! `KNOWN_UNATTAINABLE`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use shadowtail::compare::soft_to_truncated_ratio;
use shadowtail::dual::DualTransform;
use shadowtail::gpd::{self, GpdParams};
use shadowtail::numerics::{
    generalized_exponential_integral as expint, integrate_adaptive, upper_incomplete_gamma as ugamma,
};
use shadowtail::shadow::ShadowModel;
use shadowtail::simulate::{self, bootstrap_summaries, sample_gpd, sample_shadow_y, SimConfig, SummarySpec};
use shadowtail_cli::input::TailSample;
use shadowtail_cli::pipeline::{fit_shadow_model, fit_y_space, ThresholdSpec};

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

/// The literal recurrence check cannot hold in double precision; see the README.
const KNOWN_UNATTAINABLE: &[&str] = &["9a"];

struct Run {
    failed: Vec<&'static str>,
}

impl Run {
    fn check(&mut self, id: &'static str, name: &str, pass: bool, detail: String) {
        println!("[{}] {id:<3} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn closed_form_vs_quadrature(run: &mut Run) {
    let start = Instant::now();
    let (mut worst_mean, mut worst_me, mut worst_cdf) = (0.0f64, 0.0f64, 0.0f64);
    for a in oracle::ALPHAS {
        for h in oracle::H_OVER_SIGMA {
            let m = ShadowModel::new(a, 1.0, 1.0, h, 1.0).unwrap();
            worst_mean = worst_mean.max(rel(m.mean().unwrap(), oracle::mean(&m)));
            for frac in [0.0, 0.01, 0.3, 0.9, 0.999] {
                let v = m.threshold + frac * (m.upper - m.threshold);
                worst_me = worst_me.max(rel(m.mean_excess(v).unwrap(), oracle::mean_excess(&m, v)));
            }
            for p in [0.05, 0.5, 0.9, 0.999] {
                let y = m.quantile(p).unwrap();
                worst_cdf = worst_cdf.max(rel(m.cdf(y).unwrap(), oracle::cdf(&m, y)));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let worst = worst_mean.max(worst_me).max(worst_cdf);
    run.check(
        "1",
        "closed form vs quadrature, 15-point grid",
        worst <= 1e-8 && secs < 10.0,
        format!("max rel err mean {worst_mean:.1e}, mean excess {worst_me:.1e}, cdf {worst_cdf:.1e} (tol 1e-8); {secs:.1}s"),
    );
}

fn closed_form_vs_monte_carlo(run: &mut Run) {
    let start = Instant::now();
    let m = ShadowModel::new(0.5, 1.0, 1.0, 1000.0, 1.0).unwrap();
    let ys = sample_shadow_y(&m, &SimConfig::new(20_240_601, 10_000_000)).unwrap();
    let spec = SummarySpec {
        moments: vec![1],
        quantiles: vec![0.95, 0.99],
        mean_excess_at: vec![],
        shortfall_levels: vec![0.95],
    };
    let s = bootstrap_summaries(&ys, &spec, simulate::MIN_REPLICATES, 7).unwrap();
    let z = |e: &simulate::Estimate, truth: f64| (e.value - truth).abs() / e.std_error;
    let zs = [
        ("mean", z(&s.moments[0], m.mean().unwrap())),
        ("q95", z(&s.quantiles[0], m.quantile(0.95).unwrap())),
        ("q99", z(&s.quantiles[1], m.quantile(0.99).unwrap())),
        ("ES95", z(&s.shortfall[0], m.expected_shortfall(0.95).unwrap())),
    ];
    let secs = start.elapsed().as_secs_f64();
    let pass = zs.iter().all(|(_, v)| *v <= 3.0) && secs < 60.0;
    let detail = zs.iter().map(|(k, v)| format!("{k} {v:.2} SE")).collect::<Vec<_>>().join(", ");
    run.check(
        "2",
        "closed form vs 1e7 Monte Carlo draws",
        pass,
        format!("{detail} (tol 3 SE); mean {:.4} vs {:.4}; {secs:.1}s", s.moments[0].value, m.mean().unwrap()),
    );
}

fn pushforward(run: &mut Run) {
    let mut worst = 0.0f64;
    for &(a, s, l, h, u) in &[
        (0.5, 1.0, 1.0, 1e3, 1.0),
        (0.8, 2.0, 0.0, 1e4, 5.0),
        (1.0, 1.0, 0.0, 100.0, 0.0),
        (2.0, 0.5, -3.0, 1e6, 10.0),
        (3.0, 1.0, 1.0, 1e8, 1.0),
    ] {
        let m = ShadowModel::new(a, s, l, h, u).unwrap();
        let t = DualTransform::new(l, h).unwrap();
        let g = GpdParams::new(1.0 / a, s).unwrap();
        let phi_u = t.phi(u).unwrap();
        for i in 0..100 {
            let y = m.quantile(i as f64 / 100.0).unwrap();
            let expect = g.cdf(t.phi(y).unwrap() - phi_u).unwrap();
            worst = worst.max((m.cdf(y).unwrap() - expect).abs());
        }
    }
    run.check(
        "3",
        "cdf is the pushforward of the dual GPD",
        worst <= 1e-12,
        format!("max abs diff {worst:.1e} over 5 x 100 points (tol 1e-12)"),
    );
}

fn likelihood_equivalence(run: &mut Run) {
    let start = Instant::now();
    let (mut worst_arg, mut worst_gap) = (0.0f64, 0.0f64);
    let (lower, upper, u) = (1.0, 1e3, 1.0);
    let t = DualTransform::new(lower, upper).unwrap();
    for seed in 0..10u64 {
        let alpha = [0.8, 1.25, 2.0][seed as usize % 3];
        let m = ShadowModel::new(alpha, 1.0 + seed as f64 / 4.0, lower, upper, u).unwrap();
        let ys = sample_shadow_y(&m, &SimConfig::new(1000 + seed, 400)).unwrap();
        let ys: Vec<f64> = ys.into_iter().filter(|&y| y > u).collect();
        let z: Vec<f64> = ys.iter().map(|&y| t.dual_excess(u, y).unwrap()).collect();
        let zfit = gpd::fit_mle(&z).unwrap();
        let yfit = fit_y_space(&ys, lower, upper, u).unwrap();
        let za = 1.0 / zfit.params.xi;
        worst_arg = worst_arg.max(rel(yfit.alpha, za)).max(rel(yfit.sigma, zfit.params.sigma));
        let jacobian: f64 = ys.iter().map(|&y| (upper / (upper - y)).ln()).sum();
        worst_gap = worst_gap.max(rel(yfit.log_likelihood - zfit.log_likelihood, jacobian));
    }
    let secs = start.elapsed().as_secs_f64();
    run.check(
        "4",
        "Y-space and Z-space likelihoods, 10 fixtures",
        worst_arg <= 1e-6 && worst_gap <= 1e-8 && secs < 30.0,
        format!("max rel argmax diff {worst_arg:.1e} (tol 1e-6), max rel gap err {worst_gap:.1e} (tol 1e-8); {secs:.1}s"),
    );
}

fn parameter_recovery(run: &mut Run) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, alpha) in [0.8, 1.25, 2.0].into_iter().enumerate() {
        let m = ShadowModel::new(alpha, 1.0, 0.0, 1e6, 0.0).unwrap();
        let ys = sample_shadow_y(&m, &SimConfig::new(500 + i as u64, 100_000)).unwrap();
        let sample = TailSample::from_values(ys, "synthetic");
        let fit = fit_shadow_model(&sample, 0.0, 1e6, ThresholdSpec::Value(0.0)).unwrap();
        let got = fit.model.unwrap();
        let (da, ds) = (got.alpha - alpha, got.sigma - 1.0);
        pass &= da.abs() <= 0.1 && ds.abs() <= 0.15;
        parts.push(format!("a={alpha}: da {da:+.3} ds {ds:+.3}"));
    }
    for (i, xi) in [0.0, 0.25].into_iter().enumerate() {
        let w = sample_gpd(GpdParams::new(xi, 1.0).unwrap(), &SimConfig::new(600 + i as u64, 1_000_000)).unwrap();
        let d = gpd::fit_moments(&w).unwrap().params.xi - xi;
        pass &= d.abs() <= 0.02;
        parts.push(format!("moments xi={xi}: d {d:+.4}"));
    }
    run.check(
        "5",
        "parameter recovery (tol 0.1 / 0.15, moments 0.02)",
        pass,
        parts.join("; "),
    );
}

fn apparent_infinite_mean(run: &mut Run) {
    let (lower, upper, u) = (1.0, 1e6, 1.0);
    let m = ShadowModel::new(0.8, 1.0, lower, upper, u).unwrap();
    let mut consistent = 0;
    let mut finite_below_h = true;
    let mut worst_gap = 0.0f64;
    for seed in 0..5u64 {
        let cfg = SimConfig::new(300 + seed, 100_000).censored(upper / 100.0);
        let r = simulate::apparent_tail_experiment(&m, &cfg).unwrap();
        let (se, _) = r.naive.std_errors.unwrap();
        if r.naive.params.xi + 2.0 * se >= 1.0 {
            consistent += 1;
        }
        let plugin = ShadowModel::from_gpd(r.dual.params, lower, upper, u).and_then(|p| p.mean());
        finite_below_h &= matches!(plugin, Ok(v) if v.is_finite() && v < upper);
        worst_gap = worst_gap.max(r.shape_gap_in_se().unwrap_or(f64::INFINITY));
    }
    run.check(
        "6",
        "censored alpha = 0.8 sample looks infinite-mean, shadow mean finite",
        consistent >= 1 && finite_below_h && worst_gap <= 2.0,
        format!(
            "{consistent}/5 fixtures with naive xi + 2 SE >= 1; plug-in shadow mean finite and < H in all: {finite_below_h}; \
             max naive-dual gap {worst_gap:.4} combined SE (tol 2)"
        ),
    );
}

fn truncation_ratio(run: &mut Run) {
    let mut worst_below = 0.0f64;
    for a in [0.3, 0.5, 0.7, 0.9] {
        for h in [1e2, 1e4] {
            worst_below = worst_below.max(soft_to_truncated_ratio(a, 1.0, 0.0, h, 0.0).unwrap());
        }
    }
    let far = soft_to_truncated_ratio(2.0, 1.0, 0.0, 1e10, 0.0).unwrap();
    run.check(
        "7",
        "truncated / shadow mean ratio",
        worst_below < 1.0 && (far - 1.0).abs() <= 1e-3,
        format!("max r for alpha < 1 is {worst_below:.6} (< 1); r(alpha=2, H=1e10) = {far:.8} (tol 1e-3)"),
    );
}

fn unbounded_limit(run: &mut Run) {
    let mut worst = 0.0f64;
    for a in [1.5, 2.0, 3.0] {
        let m = ShadowModel::new(a, 1.0, 0.0, 1e12, 0.0).unwrap();
        worst = worst.max((m.mean().unwrap() - a / (a - 1.0)).abs());
    }
    run.check(
        "8",
        "H -> infinity recovers the GPD mean",
        worst <= 1e-3,
        format!("max |shadow mean - (u + alpha sigma/(alpha-1))| = {worst:.1e} at H = 1e12 sigma (tol 1e-3)"),
    );
}

fn special_functions(run: &mut Run) {
    // recurrence, taken literally
    let (mut bad, mut total, mut worst) = (0, 0, 0.0f64);
    for k in 0..=40 {
        let s = -10.0 + 0.5 * k as f64;
        for j in 0..=24 {
            let x = 10f64.powf(-6.0 + 8.0 * j as f64 / 24.0);
            let lhs = ugamma(s + 1.0, x).unwrap();
            let rhs = s * ugamma(s, x).unwrap() + x.powf(s) * (-x).exp();
            let err = (lhs - rhs).abs() / lhs.abs().max(1.0);
            total += 1;
            worst = worst.max(err);
            if err > 1e-10 {
                bad += 1;
            }
        }
    }
    run.check(
        "9a",
        "Gamma(s+1,x) = s Gamma(s,x) + x^s e^-x on s in [-10,10], x in [1e-6,100]",
        bad == 0,
        format!("{bad}/{total} points above 1e-10, worst {worst:.1e}"),
    );

    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 0..=28 {
        let nu = -2.0 + 0.25 * k as f64;
        for j in 0..=24 {
            let x = 1e-4 * (5e5f64).powf(j as f64 / 24.0);
            let lhs = expint(nu, x).unwrap();
            let rhs = x.powf(nu - 1.0) * ugamma(1.0 - nu, x).unwrap();
            worst = worst.max(rel(lhs, rhs));
            count += 1;
        }
    }
    run.check(
        "9b",
        "E_nu(x) = x^(nu-1) Gamma(1-nu, x) on nu in [-2,5], x in [1e-4,50]",
        worst <= 1e-10,
        format!("max rel err {worst:.1e} over {count} points (tol 1e-10)"),
    );

    // Each reference is re-derived the way it was produced, by quadrature of
    // the defining integral, and compared with the printed figure as well.
    let quad = |f: &dyn Fn(f64) -> f64| integrate_adaptive(f, 1.0, f64::INFINITY, 1e-13).unwrap().value;
    let examples = [
        ("Gamma(-0.5, 1)", ugamma(-0.5, 1.0).unwrap(), quad(&|t: f64| t.powf(-1.5) * (-t).exp()), 0.17816),
        ("E_1(1)", expint(1.0, 1.0).unwrap(), quad(&|t: f64| (-t).exp() / t), 0.2193839),
        ("E_0.5(1)", expint(0.5, 1.0).unwrap(), quad(&|t: f64| (-t).exp() / t.sqrt()), 0.2788056),
    ];
    let worst = examples.iter().map(|(_, v, q, _)| rel(*v, *q)).fold(0.0, f64::max);
    let detail = examples
        .iter()
        .map(|(k, v, _, printed)| format!("{k} = {v:.10} (printed {printed}, diff {:.1e})", v - printed))
        .collect::<Vec<_>>()
        .join(", ");
    run.check(
        "9c",
        "reference values against quadrature of their integrals",
        worst <= 1e-10,
        format!("max rel err {worst:.1e} (tol 1e-10); {detail}"),
    );
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shadowtail"));
    c.current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures"))
        .env("SOURCE_DATE_EPOCH", "0")
        .env_remove("SHADOW_SEED");
    c
}

fn output(args: &[&str], threads: &str) -> Vec<u8> {
    let out = bin().args(args).env("RAYON_NUM_THREADS", threads).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn reproducibility(run: &mut Run) {
    let dir = tempfile::tempdir().unwrap();
    let stored = dir.path().join("stored.json");
    let bounds = ["--lower-bound", "1", "--upper-bound", "1000"];
    let fit_args: Vec<&str> = ["fit", "--input", "claims.csv", "--bootstrap", "200", "--seed", "9", "--h-grid", "1e3,1e6"]
        .into_iter()
        .chain(bounds)
        .collect();
    std::fs::write(&stored, output(&fit_args, "1")).unwrap();
    let stored_s = stored.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        fit_args.clone(),
        vec!["report", "--input", stored_s, "--es-levels", "0.9,0.999", "--h-grid", "1e4"],
        vec!["compare", "--alpha", "0.7", "--sigma", "1", "--lower-bound", "0", "--h-curve", "1e2,1e4,1e6"],
        ["simulate", "--alpha", "0.8", "--sigma", "1", "--n", "50000", "--seed", "4"].into_iter().chain(bounds).collect(),
        vec![
            "simulate", "--alpha", "0.8", "--sigma", "1", "--lower-bound", "1", "--upper-bound", "1e6", "--n", "20000",
            "--seed", "4", "--censor-at", "1e4", "--experiment", "apparent-tail",
        ],
        ["diagnose", "--input", "claims.csv"].into_iter().chain(bounds).collect(),
    ];
    let mut unstable = Vec::new();
    for args in &commands {
        let first = output(args, "1");
        if output(args, "1") != first || output(args, "4") != first {
            unstable.push(args[0]);
        }
    }
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_report.json")).unwrap();
    let golden_args: Vec<&str> = ["fit", "--input", "claims.csv", "--h-grid", "1e3,1e4,1e5"].into_iter().chain(bounds).collect();
    let golden_ok = output(&golden_args, "4") == golden;
    run.check(
        "10",
        "byte-identical CLI output across runs and thread counts; golden report",
        unstable.is_empty() && golden_ok,
        format!(
            "{} commands x (2 runs at 1 thread + 1 at 4 threads), unstable: {unstable:?}; golden report matches: {golden_ok}",
            commands.len()
        ),
    );
}

fn main() {
    // `cargo test` passes harness flags such as --list or a name filter; this target has no subtests.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let start = Instant::now();
    let mut run = Run { failed: Vec::new() };
    closed_form_vs_quadrature(&mut run);
    closed_form_vs_monte_carlo(&mut run);
    pushforward(&mut run);
    likelihood_equivalence(&mut run);
    parameter_recovery(&mut run);
    apparent_infinite_mean(&mut run);
    truncation_ratio(&mut run);
    unbounded_limit(&mut run);
    special_functions(&mut run);
    reproducibility(&mut run);

    let unexpected: Vec<_> = run.failed.iter().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    println!(
        "acceptance: {} failed ({} known unattainable), {:.0}s",
        run.failed.len(),
        run.failed.len() - unexpected.len(),
        start.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
