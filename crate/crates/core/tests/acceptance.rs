//! Acceptance run: one PASS/FAIL line per criterion, then a single assert.

use std::process::Command;
use std::time::{Duration, Instant};

use bergman_dbar::suites::{run_suite, Suite, SuiteConfig, SuiteReport};

struct Line {
    id: usize,
    pass: bool,
    detail: String,
}

fn value(rep: &SuiteReport, name: &str) -> f64 {
    rep.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name}")).value
}

fn worst(rep: &SuiteReport, group: &str, suffix: &str) -> f64 {
    rep.group(group).filter(|c| c.name.ends_with(suffix)).map(|c| c.value).fold(0.0, f64::max)
}

fn failures(rep: &SuiteReport, group: &str) -> String {
    let bad: Vec<&str> = rep.group(group).filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(", "))
    }
}

fn timed(suite: Suite, cfg: &SuiteConfig) -> (SuiteReport, Duration) {
    let t = Instant::now();
    let rep = run_suite(suite, cfg).unwrap_or_else(|e| panic!("suite {suite} errored: {e}"));
    (rep, t.elapsed())
}

fn verify_csv(dir: &std::path::Path, tag: &str) -> (bool, Vec<u8>) {
    let out = dir.join(format!("{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_bergman-dbar"))
        .args(["verify", "--suite", "identities", "--seed", "42", "--out"])
        .arg(&out)
        .status()
        .expect("binary runs");
    (status.success(), std::fs::read(&out).unwrap_or_default())
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig { seed: 2024, weight_scale: 1.0 };
    let mut lines = Vec::new();

    let (ids, t) = timed(Suite::Identities, &cfg);
    lines.push(Line {
        id: 1,
        pass: ids.group_passed("psi") && t < Duration::from_secs(10),
        detail: format!(
            "|Psi| = sigma e^k max rel err {:.2e} (<= 1e-10) over 5 sets x 1000 points, {:.1} s (< 10 s){}",
            worst(&ids, "psi", "max_rel_err"),
            t.as_secs_f64(),
            failures(&ids, "psi")
        ),
    });
    lines.push(Line {
        id: 2,
        pass: ids.group_passed("covariance"),
        detail: format!(
            "invariant Laplacian covariance rel err {:.2e} (<= 1e-10); fitted FD constant {:.6} (1 +- 1e-3){}",
            value(&ids, "invariant_lap_max_rel_err"),
            value(&ids, "fd_lap_fitted_constant"),
            failures(&ids, "covariance")
        ),
    });

    let (ker, t) = timed(Suite::Kernels, &cfg);
    let slopes: Vec<String> = ker.group("forelli_rudin").map(|c| format!("{:.3}", c.value)).collect();
    lines.push(Line {
        id: 3,
        pass: ker.group_passed("forelli_rudin") && t < Duration::from_secs(60),
        detail: format!(
            "fitted slopes [{}] within 0.05 of beta - M, suite time {:.1} s (< 60 s){}",
            slopes.join(", "),
            t.as_secs_f64(),
            failures(&ker, "forelli_rudin")
        ),
    });
    lines.push(Line {
        id: 4,
        pass: ker.group_passed("schur"),
        detail: format!(
            "certificate at alpha 0.1/0.25/0.4 succeeds, at -0.1/0.6 fails; empirical norm {:.4} <= bound {:.4} (32 functions){}",
            value(&ker, "empirical_norm"),
            value(&ker, "best_bound"),
            failures(&ker, "schur")
        ),
    });

    let (ext, _) = timed(Suite::Extremal, &cfg);
    lines.push(Line {
        id: 5,
        pass: ext.passed(),
        detail: format!(
            "max |norm - 1| {:.1e} (<= 1e-8); max harmonic residual {:.1e} (<= 1e-5); closed vs general {:.1e} / {:.1e} (<= 1e-3){}",
            worst(&ext, "extremal", "norm_err"),
            worst(&ext, "extremal", "harm_residual"),
            value(&ext, "w1_closed_vs_general"),
            value(&ext, "w5_closed_vs_general"),
            failures(&ext, "extremal")
        ),
    });

    let (db, t) = timed(Suite::Dbar, &cfg);
    lines.push(Line {
        id: 6,
        pass: db.passed() && t < Duration::from_secs(300),
        detail: format!(
            "max residual ratio {:.2e} (<= 5e-3); bound-ratio change under refinement plain {:.3} patched {:.3} (< 0.3); {:.1} s (< 300 s){}",
            worst(&db, "dbar", "_residual"),
            value(&db, "plain_bound_ratio_refinement_change"),
            value(&db, "patched_bound_ratio_refinement_change"),
            t.as_secs_f64(),
            failures(&db, "dbar")
        ),
    });

    let (int, _) = timed(Suite::Interpolate, &cfg);
    let ratios: Vec<f64> =
        int.group("interpolate").filter(|c| c.name.ends_with("norm_ratio")).map(|c| c.value).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    lines.push(Line {
        id: 7,
        pass: int.passed(),
        detail: format!(
            "{} points, 8 targets: max node err {:.1e} (<= 1e-6); norm ratio in [{lo:.3}, {hi:.3}]; grid variation {:.3} (< 0.2){}",
            value(&int, "lattice_points"),
            worst(&int, "interpolate", "node_err"),
            value(&int, "norm_ratio_grid_variation"),
            failures(&int, "interpolate")
        ),
    });

    let (den, _) = timed(Suite::Density, &cfg);
    lines.push(Line {
        id: 8,
        pass: den.group_passed("circle_mean") && den.group_passed("cross_form"),
        detail: format!(
            "closed form vs trapezoid {:.1e} (<= 1e-8); sign agreements {}/15{}{}",
            value(&den, "closed_vs_trapezoid"),
            value(&den, "sign_agreements"),
            failures(&den, "circle_mean"),
            failures(&den, "cross_form")
        ),
    });
    lines.push(Line {
        id: 9,
        pass: den.group_passed("phi_star"),
        detail: format!(
            "constant identity err {:.1e} (<= 1e-10); sup|phi*-phi| rmax change {:.3} (<= 0.1); sparse invariant lap in [{:.3}, {:.3}] (within (0, 1.02]); overdense min {:.3} (<= 0){}",
            value(&den, "constant_identity_err"),
            value(&den, "sup_deviation_rmax_change"),
            value(&den, "sparse_lap_min"),
            value(&den, "sparse_lap_max"),
            value(&den, "dense_lap_min"),
            failures(&den, "phi_star")
        ),
    });

    let dir = tempfile::tempdir().unwrap();
    let (ok1, a) = verify_csv(dir.path(), "first");
    let (ok2, b) = verify_csv(dir.path(), "second");
    lines.push(Line {
        id: 10,
        pass: ok1 && ok2 && !a.is_empty() && a == b,
        detail: format!("two verify runs with seed 42: exit ok {ok1}/{ok2}, {} bytes, identical {}", a.len(), a == b),
    });

    for l in &lines {
        println!("criterion {:2} {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
