use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use sturm_core::coefficient::CoefficientKind;
use sturm_core::experiments::{self, Example17Config, Example18Config};
use sturm_core::fss::compute_fss;
use sturm_core::otelbaev::{self, build_profile, OtelbaevConfig, Verdict};
use sturm_core::solver::{self, SolveResult};
use sturm_core::{grid, report, testfunctions, Coefficient};

use crate::config::RunConfig;
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_NOT_SOLVABLE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_DEVIATION: u8 = 4;

/// Band limit for the test-function ratios checked by `verify`.
const RATIO_LIMIT: f64 = 10.0;
const SOLVE_INTERIOR: f64 = 0.8;

fn prepare(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(())
}

fn emit<T: Serialize>(path: &Path, body: &T) -> Result<(), CliError> {
    report::write_json(path, body)?;
    report::write_meta(path)?;
    Ok(())
}

fn probe_bound((lo, hi): (f64, f64)) -> f64 {
    2.0 * lo.abs().max(hi.abs()) + 10.0
}

fn tail_fails(coeff: &Coefficient, domain: (f64, f64)) -> Result<Option<String>, CliError> {
    let status = otelbaev::check_tail_positivity(coeff, probe_bound(domain))?;
    Ok(status.fails().then(|| format!("{}: tail positivity fails ({status:?})", coeff.label())))
}

pub fn analyze(cfg: &RunConfig) -> Result<u8, CliError> {
    let config = OtelbaevConfig { root_tol: cfg.root_tol, method: cfg.method(), ..OtelbaevConfig::default() };
    let profile = build_profile(&cfg.coefficient, cfg.domain, cfg.n_points, &cfg.a_list, &config)?;
    prepare(&cfg.out)?;
    let json = cfg.out.join("profile.json");
    emit(&json, &profile)?;
    profile.write_csv(&cfg.out.join("profile.csv"))?;

    let ev = &profile.evidence;
    println!("coefficient: {}", cfg.coefficient.label());
    println!("verdict: {:?}", profile.verdict);
    match profile.d0_estimate {
        Some(d0) => println!("d0 estimate: {d0:.10}"),
        None => println!("d0 estimate: unavailable"),
    }
    for e in &profile.m_table {
        println!("m({}) = {:.10e}", e.a, e.m);
    }
    eprintln!("tail status: {:?} (probe bound {})", ev.tail_status, ev.probe_bound);
    eprintln!("positive m at: {:?}; growth ratio: {:?}", ev.positive_m_at, ev.growth_ratio);
    for t in &ev.m_trend {
        eprintln!("m({}) half domain {:.6e}, full domain {:.6e}", t.a, t.m_half_domain, t.m_full_domain);
    }
    for n in &ev.notes {
        eprintln!("note: {n}");
    }
    Ok(match profile.verdict {
        Verdict::CorrectlySolvable => EXIT_OK,
        Verdict::NotSolvable => EXIT_NOT_SOLVABLE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

#[derive(Serialize)]
struct SolveRun<'a> {
    forcing: String,
    sup_deviation: f64,
    green: &'a SolveResult,
    finite_difference: &'a SolveResult,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    coefficient: &'a CoefficientKind,
    p: f64,
    domain: (f64, f64),
    n_steps: usize,
    wronskian_drift: f64,
    log_space: bool,
    deviation_tol: f64,
    max_deviation: f64,
    /// `max ‖y‖_p / ‖f‖_p` over nonzero forcings.
    solvability_constant: Option<f64>,
    runs: Vec<SolveRun<'a>>,
}

pub fn solve(cfg: &RunConfig) -> Result<u8, CliError> {
    let (lo, hi) = cfg.domain;
    if lo != -hi {
        return Err(CliError::Usage(format!("solve needs a symmetric domain -L:L, got {lo}:{hi}")));
    }
    if let Some(msg) = tail_fails(&cfg.coefficient, cfg.domain)? {
        if !cfg.force {
            eprintln!("{msg}; the equation is not correctly solvable (use --force to solve anyway)");
            return Ok(EXIT_NOT_SOLVABLE);
        }
        eprintln!("warning: {msg}; solving because --force was given");
    }
    let mut forcings = if cfg.forcings.is_empty() { experiments::builtin_forcings() } else { cfg.forcings.clone() };
    if let Some(seed) = cfg.seed {
        forcings.extend(experiments::seeded_family(seed, 8));
    }

    let fss = compute_fss(&cfg.coefficient, hi, cfg.n_points, cfg.wronskian_tol)?;
    let pairs: Vec<(SolveResult, SolveResult, f64)> = forcings
        .par_iter()
        .map(|f| -> sturm_core::Result<_> {
            let g = solver::solve_green(&fss, f, cfg.p)?;
            let d = solver::solve_fd(&cfg.coefficient, f, cfg.domain, cfg.n_points, cfg.p)?;
            let dev = solver::sup_deviation(&g, &d, SOLVE_INTERIOR)?;
            Ok((g, d, dev))
        })
        .collect::<sturm_core::Result<_>>()?;

    prepare(&cfg.out)?;
    fss.write_csv(&cfg.out.join("fss.csv"))?;
    for (i, (g, d, _)) in pairs.iter().enumerate() {
        g.write_csv(&cfg.out.join(format!("solve_{i}_green.csv")))?;
        d.write_csv(&cfg.out.join(format!("solve_{i}_fd.csv")))?;
    }
    let greens: Vec<SolveResult> = pairs.iter().map(|(g, _, _)| g.clone()).collect();
    let max_deviation = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    let rep = SolveReport {
        coefficient: cfg.coefficient.kind(),
        p: cfg.p,
        domain: cfg.domain,
        n_steps: cfg.n_points,
        wronskian_drift: fss.wronskian_drift,
        log_space: fss.log_space,
        deviation_tol: cfg.deviation_tol,
        max_deviation,
        solvability_constant: solver::check_correct_solvability_constant(&greens).ok(),
        runs: pairs
            .iter()
            .map(|(g, d, dev)| SolveRun {
                forcing: g.forcing.clone(),
                sup_deviation: *dev,
                green: g,
                finite_difference: d,
            })
            .collect(),
    };
    emit(&cfg.out.join("solve.json"), &rep)?;

    for run in &rep.runs {
        println!(
            "{}: deviation {:.3e}, |y|_p {:.6e}, |f|_p {:.6e}",
            run.forcing, run.sup_deviation, run.green.norms.y_lp, run.green.norms.f_lp
        );
        let mut warnings: Vec<&String> = run.green.warnings.iter().chain(&run.finite_difference.warnings).collect();
        warnings.sort();
        warnings.dedup();
        for w in warnings {
            eprintln!("warning ({}): {w}", run.forcing);
        }
    }
    println!("max deviation: {max_deviation:.3e} (tolerance {:.1e})", cfg.deviation_tol);
    Ok(if max_deviation <= cfg.deviation_tol { EXIT_OK } else { EXIT_DEVIATION })
}

pub fn verify(cfg: &RunConfig) -> Result<u8, CliError> {
    if let Some(msg) = tail_fails(&cfg.coefficient, cfg.domain)? {
        eprintln!("{msg}; test-function hypotheses do not hold");
        return Ok(EXIT_NOT_SOLVABLE);
    }
    let (lo, hi) = cfg.domain;
    let centers = if cfg.centers == 1 { vec![0.5 * (lo + hi)] } else { grid::uniform(lo, hi, cfg.centers - 1) };
    let sweep = testfunctions::sweep(&cfg.coefficient, &centers, cfg.p, cfg.root_tol)?;
    prepare(&cfg.out)?;
    emit(&cfg.out.join("verify.json"), &sweep)?;
    let col = |f: fn(&testfunctions::LemmaChecks) -> f64| sweep.checks.iter().map(f).collect::<Vec<_>>();
    let cols =
        [col(|c| c.x), col(|c| c.d), col(|c| c.y_min), col(|c| c.y_max), col(|c| c.scaled_slope_max), col(|c| c.f1_lp)];
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    report::write_csv(&cfg.out.join("verify.csv"), &["x", "d", "y_min", "y_max", "scaled_slope_max", "f1_lp"], &refs)?;

    let failed = sweep.checks.iter().filter(|c| !c.pass).count();
    println!("centers: {}, failed lemma checks: {failed}", sweep.checks.len());
    println!(
        "f1 spread {:.4}, z band {:.4}, weighted z bound {:.4}",
        sweep.f1_spread, sweep.z_band, sweep.weighted_z_bound
    );
    println!("max identity residual {:.3e}", sweep.max_identity_residual);
    Ok(if sweep.within(RATIO_LIMIT) { EXIT_OK } else { EXIT_FAILED })
}

pub struct ReproduceRequest {
    pub example: String,
    pub thetas: Option<Vec<f64>>,
    pub extents: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub p: Option<f64>,
    pub out: PathBuf,
}

pub fn reproduce(req: &ReproduceRequest) -> Result<u8, CliError> {
    match req.example.trim() {
        "1.7" | "17" => reproduce_17(req),
        "1.8" | "18" => reproduce_18(req),
        other => Err(CliError::Usage(format!("unknown example {other:?}; expected 1.7 or 1.8"))),
    }
}

fn reproduce_17(req: &ReproduceRequest) -> Result<u8, CliError> {
    let mut config = Example17Config::default();
    if let Some(t) = &req.thetas {
        config.thetas = t.clone();
    }
    if let Some(e) = &req.extents {
        config.extents = e.clone();
    }
    let table = experiments::reproduce_example_17(&config)?;
    prepare(&req.out)?;
    emit(&req.out.join("example17.json"), &table)?;

    let mut header = vec!["theta".to_string()];
    header.extend(table.extents.iter().map(|e| format!("m_{e}")));
    header.extend(table.extents.iter().map(|e| format!("d_max_{e}")));
    header.extend(["m_relative_change", "d_growth", "expected_solvable", "matches_expectation"].map(String::from));
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut cols: Vec<Vec<f64>> = vec![table.rows.iter().map(|r| r.theta).collect()];
    for k in 0..table.extents.len() {
        cols.push(table.rows.iter().map(|r| r.m_estimates[k]).collect());
    }
    for k in 0..table.extents.len() {
        cols.push(table.rows.iter().map(|r| r.d_max[k]).collect());
    }
    cols.push(table.rows.iter().map(|r| r.m_relative_change).collect());
    cols.push(table.rows.iter().map(|r| flag(r.d_growth)).collect());
    cols.push(table.rows.iter().map(|r| flag(r.expected_solvable)).collect());
    cols.push(table.rows.iter().map(|r| flag(r.matches_expectation)).collect());
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let c: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    report::write_csv(&req.out.join("example17.csv"), &h, &c)?;

    for r in &table.rows {
        let status = if r.expected_solvable { "stabilizing" } else { "non-stabilizing" };
        let mark = if r.matches_expectation { "ok" } else { "MISMATCH" };
        println!("theta {}: m {:?}, d_max {:?}, expected {status}: {mark}", r.theta, r.m_estimates, r.d_max);
    }
    Ok(if table.all_match { EXIT_OK } else { EXIT_FAILED })
}

fn reproduce_18(req: &ReproduceRequest) -> Result<u8, CliError> {
    let mut config = Example18Config::default();
    config.alpha = req.alpha.unwrap_or(config.alpha);
    config.beta = req.beta.unwrap_or(config.beta);
    config.p = req.p.unwrap_or(config.p);
    let rep = experiments::reproduce_example_18(&config)?;
    prepare(&req.out)?;
    emit(&req.out.join("example18.json"), &rep)?;

    let ns: Vec<f64> = (config.n_first..=config.n_last).map(f64::from).collect();
    let series = |s: &[experiments::LabeledRatio]| s.iter().map(|r| r.ratio).collect::<Vec<_>>();
    let (sep, eq, narrow) =
        (series(&rep.separability_ratio_series), series(&rep.norm_equivalence_series), series(&rep.narrow_bump_series));
    if [sep.len(), eq.len(), narrow.len()].iter().all(|&l| l == ns.len()) {
        report::write_csv(
            &req.out.join("example18.csv"),
            &["n", "separability_ratio", "norm_equivalence_ratio", "narrow_bump_ratio"],
            &[&ns, &sep, &eq, &narrow],
        )?;
    }
    println!("verdict: {:?}", rep.profile.verdict);
    println!("embedding constant estimate: {:.6}", rep.embedding_constant_estimate);
    for f in &rep.flags {
        println!(
            "{}: {} (measured {}, threshold {})",
            f.name,
            if f.pass { "pass" } else { "FAIL" },
            f.measured,
            f.threshold
        );
    }
    Ok(if rep.pass { EXIT_OK } else { EXIT_FAILED })
}
