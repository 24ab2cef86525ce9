//! Acceptance suite. Each test checks one criterion at its pinned tolerance
//! and prints a single `criterion N: PASS|FAIL ...` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

mod common;

use std::process::Command;

use rand::Rng;
use rayon::prelude::*;

use common::*;
use rankfit::diagnostics::{slope_fit, transform_series, Scale};
use rankfit::estimation::{fit, fit_at_support};
use rankfit::histogram::{summarize, RankHistogram};
use rankfit::models::{geom_norm, log_likelihood, pmf, to_exponential_form, ModelKind, ModelParams};
use rankfit::selection::{aicc_evidence_closed_form, bic_evidence_closed_form, cross_apply, evidence_ratio, select};
use rankfit::simulation::{
    recovery_experiment, sample, sample_counts, trial_rng, undersampling_probability, SimulationConfig,
};

const N: u32 = 24;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {id:>2}: {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn exact_histogram(m: &ModelParams, f0: f64) -> RankHistogram {
    let freqs: Vec<f64> = (1..=m.support() as i64).map(|r| f0 * pmf(m, r)).collect();
    RankHistogram::from_frequencies("exact", "count", &freqs).unwrap()
}

#[test]
fn criterion_01_truncation_rule() {
    let mut rng = rng(101);
    let mut violations = Vec::new();
    let mut checked = 0;
    for i in 0..200 {
        let h = random_histogram(&mut rng, N);
        let s = summarize(&h);
        let q = rng.random_range(0.02..0.6);
        let alpha = rng.random_range(0.0..3.0);
        for kind in [ModelKind::Zeta2, ModelKind::Geometric2] {
            let shape = if kind.is_geometric() { q } else { alpha };
            let ll = |r: u32| log_likelihood(&ModelParams::new(kind, shape, r, N).unwrap(), &s);
            for r in 1..s.r_max {
                if ll(r) != f64::NEG_INFINITY {
                    violations.push(format!("#{i} {kind}: finite at R = {r} < r_max"));
                }
            }
            for r in s.r_max..N {
                if ll(r).partial_cmp(&ll(r + 1)) != Some(std::cmp::Ordering::Greater) {
                    violations.push(format!("#{i} {kind}: L(R={r}) <= L(R={})", r + 1));
                }
            }
            let fitted = fit(kind, &h, N).unwrap();
            if fitted.params.support() != s.r_max {
                violations.push(format!("#{i} {kind}: fitted R = {}", fitted.params.support()));
            }
            // Profile: no other R beats R = r_max after re-optimizing the shape.
            for r in (s.r_max + 1)..=N {
                let other = fit_at_support(kind, &h, r, N).unwrap();
                if other.loglik > fitted.loglik {
                    violations.push(format!("#{i} {kind}: profile at R = {r} beats r_max"));
                }
            }
            checked += 1;
        }
    }
    report(
        1,
        "truncation rule",
        violations.is_empty(),
        format!(
            "{checked} (histogram, kind) pairs, violations: {:?}",
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_02_normalization_and_closed_forms() {
    let mut worst_norm: f64 = 0.0;
    for r in [1u32, 2, 17, 24] {
        for a in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let m = ModelParams::zeta2(a, r, N).unwrap();
            worst_norm = worst_norm.max(((1..=r as i64).map(|k| pmf(&m, k)).sum::<f64>() - 1.0).abs());
        }
        for q in [0.05, 0.3, 0.5, 0.9] {
            let m = ModelParams::geometric2(q, r, N).unwrap();
            worst_norm = worst_norm.max(((1..=r as i64).map(|k| pmf(&m, k)).sum::<f64>() - 1.0).abs());
        }
    }

    let mut rng = rng(202);
    let mut worst_ll: f64 = 0.0;
    for _ in 0..100 {
        let h = random_histogram(&mut rng, N);
        let f = freqs(&h);
        let s = summarize(&h);
        let support = rng.random_range(s.r_max..=N);
        let alpha = rng.random_range(0.0..5.0);
        let q = rng.random_range(0.01..0.95);
        let z = ModelParams::zeta2(alpha, support, N).unwrap();
        let g = ModelParams::geometric2(q, support, N).unwrap();
        worst_ll = worst_ll.max((log_likelihood(&z, &s) - zeta_loglik_direct(&f, alpha, support as usize)).abs());
        worst_ll = worst_ll.max((log_likelihood(&g, &s) - geometric_loglik_direct(&f, q, support as usize)).abs());
    }
    report(
        2,
        "normalization and closed-form likelihoods",
        worst_norm <= 1e-12 && worst_ll <= 1e-9,
        format!("max |Σp - 1| = {worst_norm:e} (tol 1e-12), max |L_closed - L_direct| = {worst_ll:e} (tol 1e-9)"),
    );
}

#[test]
fn criterion_03_exponential_form_identity() {
    let mut worst: f64 = 0.0;
    for q in [0.05, 0.3, 0.5, 0.9] {
        let support = 100;
        let m = ModelParams::geometric2(q, support, support).unwrap();
        let c = geom_norm(q, support);
        let e = to_exponential_form(q, c);
        for r in 1..=100 {
            worst = worst.max((pmf(&m, r) - e.eval(r as f64)).abs() / c);
        }
    }
    report(
        3,
        "geometric pmf as c' e^(-βr)",
        worst <= 1e-12,
        format!("max relative-to-c deviation {worst:e} (tol 1e-12)"),
    );
}

#[test]
fn criterion_04_optimizer_matches_grid_oracle() {
    let mut rng = rng(404);
    let hists: Vec<RankHistogram> = std::iter::repeat_with(|| random_histogram(&mut rng, N))
        .filter(|h| h.r_max() >= 2)
        .take(100)
        .collect();

    let results: Vec<(f64, f64, String)> = hists
        .par_iter()
        .flat_map_iter(|h| {
            let f = freqs(h);
            ModelKind::ALL.into_iter().map(move |kind| {
                let fitted = fit(kind, h, N).unwrap();
                let support = fitted.params.support() as usize;
                let (x, v) = if kind.is_geometric() {
                    grid_argmax(|q| geometric_loglik_direct(&f, q, support), 1e-4, 1.0 - 1e-4, 1e-4)
                } else {
                    grid_argmax(|a| zeta_loglik_direct(&f, a, support), 0.0, 20.0, 1e-4)
                };
                assert!(
                    x < 19.99 && x > 0.0 || kind.is_geometric(),
                    "oracle hit its alpha range"
                );
                (
                    (fitted.params.shape() - x).abs(),
                    (fitted.loglik - v).abs(),
                    format!("{kind} r_max={} fit={} oracle={x}", h.r_max(), fitted.params.shape()),
                )
            })
        })
        .collect();

    let worst_param = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_ll = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let worst = results.iter().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    report(
        4,
        "optimizer vs dense grid oracle",
        worst_param <= 1e-6 && worst_ll <= 1e-8,
        format!(
            "{} fits, max |Δparam| = {worst_param:e} (tol 1e-6), max |ΔL| = {worst_ll:e} (tol 1e-8); worst: {}",
            results.len(),
            worst.2
        ),
    );
}

#[test]
fn criterion_05_family_discrimination() {
    let outcomes: Vec<(bool, bool)> = (0..100u32)
        .into_par_iter()
        .map(|t| {
            let q = if t % 2 == 0 { 0.3 } else { 0.5 };
            let truth = ModelParams::geometric1(q, N).unwrap();
            let h = sample(&truth, 2500, 5000 + t as u64).unwrap();
            let table = select(&h, N, &ModelKind::ALL).unwrap();
            let score = |k: ModelKind, bic: bool| {
                let row = table.row(k).unwrap();
                if bic { row.bic } else { row.aicc }.unwrap()
            };
            let ranked = [false, true].iter().all(|&b| {
                let worst_geo = score(ModelKind::Geometric1, b).max(score(ModelKind::Geometric2, b));
                let best_zeta = score(ModelKind::Zeta1, b).min(score(ModelKind::Zeta2, b));
                worst_geo < best_zeta
            });
            let tiny = [ModelKind::Zeta1, ModelKind::Zeta2].iter().all(|&k| {
                let row = table.row(k).unwrap();
                row.w_aicc.unwrap() < 1e-4 && row.w_bic.unwrap() < 1e-4
            });
            (ranked, tiny)
        })
        .collect();
    let ranked = outcomes.iter().filter(|o| o.0).count();
    let tiny = outcomes.iter().filter(|o| o.1).count();
    report(
        5,
        "geometric beats zeta on geometric samples (F0 = 2500)",
        ranked >= 95 && tiny >= 95,
        format!("ranked {ranked}/100 (need 95), zeta weights < 1e-4 in {tiny}/100 (need 95)"),
    );
}

#[test]
fn criterion_06_cross_dataset_zero_likelihood() {
    let base: Vec<f64> = (0..17).map(|i| (200.0 * 0.78f64.powi(i)).round().max(1.0)).collect();
    let d17 = RankHistogram::from_frequencies("earlier", "languages", &base).unwrap();
    let mut later = base.clone();
    later.iter_mut().for_each(|f| *f += 3.0);
    later.push(1.0);
    let d18 = RankHistogram::from_frequencies("later", "languages", &later).unwrap();
    assert_eq!((d17.r_max(), d18.r_max()), (17, 18));

    let g2 = fit(ModelKind::Geometric2, &d17, N).unwrap();
    let g1 = fit(ModelKind::Geometric1, &d17, N).unwrap();
    let l2 = cross_apply(&g2, &d18);
    let l1 = cross_apply(&g1, &d18);
    report(
        6,
        "cross-dataset zero likelihood",
        g2.params.support() == 17 && l2 == f64::NEG_INFINITY && l1.is_finite() && pmf(&g2.params, 18) == 0.0,
        format!(
            "Geometric2 (R = {}) on r_max = 18: {l2}; Geometric1 on r_max = 18: {l1}",
            g2.params.support()
        ),
    );
}

#[test]
fn criterion_07_bic_evidence_closed_form() {
    let mut worst_bic: f64 = 0.0;
    let mut worst_aicc: f64 = 0.0;
    let mut pairs = 0;
    for t in 0..60u64 {
        let mut r = trial_rng(707, 0, t as u32);
        let n = r.random_range(20..200);
        let truth = if t % 3 == 0 {
            ModelParams::zeta1(r.random_range(0.5..2.0), N).unwrap()
        } else {
            ModelParams::geometric1(r.random_range(0.15..0.6), N).unwrap()
        };
        let h = sample(&truth, n, 7000 + t).unwrap();
        let table = select(&h, N, &ModelKind::ALL).unwrap();
        for a in &table.rows {
            for b in &table.rows {
                let (fa, fb) = (a.fit.as_ref().unwrap(), b.fit.as_ref().unwrap());
                let wr = evidence_ratio(a.w_bic.unwrap(), b.w_bic.unwrap());
                assert!(!wr.infinite && wr.ratio > 0.0, "weights underflowed");
                let cf = bic_evidence_closed_form(fa.loglik, fa.n_params, fb.loglik, fb.n_params, table.f0);
                worst_bic = worst_bic.max((wr.ratio - cf).abs() / cf);
                let wr = evidence_ratio(a.w_aicc.unwrap(), b.w_aicc.unwrap());
                let cf = aicc_evidence_closed_form(fa.loglik, fa.n_params, fb.loglik, fb.n_params, table.f0);
                worst_aicc = worst_aicc.max((wr.ratio - cf).abs() / cf);
                pairs += 1;
            }
        }
    }
    let exact = bic_evidence_closed_form(-12.5, 1, -12.5, 2, 36.0);
    report(
        7,
        "evidence ratios: weights vs closed form",
        worst_bic <= 1e-9 && worst_aicc <= 1e-9 && exact == 6.0,
        format!("{pairs} pairs, max rel err BIC {worst_bic:e}, AICc {worst_aicc:e} (tol 1e-9); equal L, ΔK = 1, F0 = 36 -> {exact}"),
    );
}

#[test]
fn criterion_08_diagnostic_slopes() {
    let mut worst_geo: f64 = 0.0;
    let mut worst_zeta: f64 = 0.0;
    let mut curves_down = true;
    for support in [10u32, 17, 24] {
        for q in [0.05, 0.2, 0.3, 0.5, 0.9] {
            let h = exact_histogram(&ModelParams::geometric2(q, support, N).unwrap(), 1000.0);
            let lf = slope_fit(&transform_series(&h, Scale::LinearLog)).unwrap();
            worst_geo = worst_geo
                .max((lf.slope - (1.0f64 - q).ln()).abs())
                .max((lf.r2 - 1.0).abs());
            // Ranks are unevenly spaced in ln r, so "second differences" are
            // taken as differences of successive secant slopes.
            let p = transform_series(&h, Scale::LogLog).points;
            curves_down &= p
                .windows(3)
                .all(|w| (w[2].1 - w[1].1) / (w[2].0 - w[1].0) < (w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        for a in [0.5, 1.0, 1.5, 2.0, 5.0] {
            let h = exact_histogram(&ModelParams::zeta2(a, support, N).unwrap(), 1000.0);
            let lf = slope_fit(&transform_series(&h, Scale::LogLog)).unwrap();
            worst_zeta = worst_zeta.max((lf.slope + a).abs()).max((lf.r2 - 1.0).abs());
        }
    }
    report(
        8,
        "diagnostic slope recovery",
        worst_geo <= 1e-9 && worst_zeta <= 1e-9 && curves_down,
        format!("geometric max dev {worst_geo:e}, zeta max dev {worst_zeta:e} (tol 1e-9), log-log curves down: {curves_down}"),
    );
}

#[test]
fn criterion_09_undersampling_estimator() {
    let (q, domain, n, trials) = (0.25, 10u32, 60u64, 2000u32);
    let m = ModelParams::geometric1(q, domain).unwrap();
    let exact = undersampling_exact(&geometric_probs(q, domain as usize), domain as usize, n);
    let covered = (0..100u64)
        .filter(|&seed| {
            let est = undersampling_probability(&m, n, trials, seed).unwrap();
            (est.estimate - exact).abs() <= est.half_width
        })
        .count();
    report(
        9,
        "undersampling estimate vs inclusion-exclusion",
        covered >= 95,
        format!("exact P = {exact:.6} (q = {q}, N = {domain}, n = {n}); covered in {covered}/100 runs of {trials} trials (need 95)"),
    );
}

#[test]
fn criterion_10_q_hat_sanity() {
    let outcomes: Vec<(bool, Option<bool>)> = (0..100u32)
        .into_par_iter()
        .map(|t| {
            let q = [0.2, 0.3, 0.5][t as usize % 3];
            assert!((1.0f64 - q).powi(N as i32) < 0.01);
            let h = sample(&ModelParams::geometric1(q, N).unwrap(), 500, 10_000 + t as u64).unwrap();
            let s = summarize(&h);
            let g1 = fit(ModelKind::Geometric1, &h, N).unwrap();
            let near = (g1.params.shape() - 1.0 / s.mean_rank).abs() <= 0.02;
            let ordered = (s.r_max < N).then(|| {
                let g2 = fit(ModelKind::Geometric2, &h, N).unwrap();
                g1.params.shape() > g2.params.shape()
            });
            (near, ordered)
        })
        .collect();
    let near = outcomes.iter().filter(|o| o.0).count();
    let applicable = outcomes.iter().filter(|o| o.1.is_some()).count();
    let ordered = outcomes.iter().filter(|o| o.1 == Some(true)).count();
    report(
        10,
        "q̂ close to 1/<r> and q̂1 > q̂2",
        near >= 95 && ordered == applicable,
        format!(
            "|q̂1 - 1/<r>| <= 0.02 in {near}/100 (need 95); q̂1 > q̂2 in {ordered}/{applicable} trials with r_max < N"
        ),
    );
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_rankfit"))
        .args(args)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "rankfit {args:?} failed");
}

fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_11_determinism() {
    let mut identical = true;

    let m = ModelParams::zeta2(1.1, 18, N).unwrap();
    identical &= sample(&m, 777, 99).unwrap() == sample(&m, 777, 99).unwrap();
    identical &= sample_counts(&m, 500, &mut trial_rng(1, 2, 3)) == sample_counts(&m, 500, &mut trial_rng(1, 2, 3));

    let h = sample(&ModelParams::geometric1(0.35, N).unwrap(), 400, 5).unwrap();
    identical &= json(&select(&h, N, &ModelKind::ALL).unwrap()) == json(&select(&h, N, &ModelKind::ALL).unwrap());
    for kind in ModelKind::ALL {
        identical &= json(&fit(kind, &h, N).unwrap()) == json(&fit(kind, &h, N).unwrap());
    }
    let cfg = SimulationConfig {
        seed: 17,
        trials: 20,
        sample_sizes: vec![50, 300],
        model: ModelParams::geometric1(0.4, N).unwrap(),
    };
    identical &= json(&recovery_experiment(&cfg, &ModelKind::ALL).unwrap())
        == json(&recovery_experiment(&cfg, &ModelKind::ALL).unwrap());
    let u = |seed| undersampling_probability(&cfg.model, 100, 500, seed).unwrap();
    identical &= json(&u(3)) == json(&u(3));

    // CLI: rerun every command into the same directory and compare bytes.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.tsv");
    std::fs::write(&data, h.to_canonical_tsv()).unwrap();
    let out = dir.path().join("out");
    let (d, o) = (data.to_str().unwrap(), out.to_str().unwrap());
    let fit_file = out.join("fit_geometric2.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["summarize", "--input", d, "--out", o],
        vec!["fit", "--model", "geometric2", "--input", d, "--out", o],
        vec!["select", "--input", d, "--out", o],
        vec!["diagnose", "--input", d, "--out", o],
        vec![
            "simulate", "--q", "0.4", "--sizes", "50,200", "--trials", "10", "--seed", "8", "--out", o,
        ],
        vec![
            "simulate",
            "--mode",
            "undersampling",
            "--q",
            "0.4",
            "--sizes",
            "50",
            "--trials",
            "50",
            "--out",
            o,
        ],
        vec![
            "cross-apply",
            "--fit",
            fit_file.to_str().unwrap(),
            "--input",
            d,
            "--out",
            o,
        ],
    ];
    for c in &commands {
        run_cli(c);
    }
    let first = snapshot(&out);
    for c in &commands {
        run_cli(c);
    }
    let second = snapshot(&out);
    identical &= first == second;

    report(
        11,
        "determinism",
        identical,
        format!(
            "library reruns and {} CLI commands ({} files) byte-identical: {identical}",
            commands.len(),
            first.len()
        ),
    );
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}
