//! One line per acceptance criterion. Tolerances and budgets are pinned
//! here; the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use squimld::cli::{self, Command};
use squimld::validate;
use squimld_core::ensemble::{classical_ising_1d, ising_log_z, ising_log_z_enumerated};
use squimld_core::ge::solve_q;
use squimld_core::lemmas::{uif_circle, SphereExample};
use squimld_core::mc::infinite_t_msq_exact;
use squimld_core::wfe::{eps_bound, WfeParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn fail(detail: impl ToString) -> Outcome {
    Outcome { passed: false, detail: detail.to_string() }
}

fn command(args: &[String]) -> Command {
    let mut argv = vec!["squimld".to_string()];
    argv.extend(args.iter().cloned());
    cli::parse(argv.into_iter().map(Into::into).collect()).expect("arguments parse").command
}

fn exec(args: &[String], out: &Path, workers: usize) -> Result<Vec<PathBuf>, squimld::CliError> {
    let mut a = args.to_vec();
    a.extend(["--out-dir".into(), out.display().to_string(), "--workers".into(), workers.to_string()]);
    cli::execute(&command(&a))
}

fn rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).expect("csv opens");
    let headers = r.headers().expect("header").clone();
    r.records()
        .map(|rec| {
            let rec = rec.expect("record");
            headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

fn f(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap_or(f64::NAN)
}

fn s(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn c1() -> Outcome {
    let mut worst: f64 = 0.0;
    for x in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7] {
        for eps in [0.1, 0.3] {
            match validate::gradient_consistency(x, eps, 100, 1) {
                Ok(w) => worst = worst.max(w),
                Err(e) => return fail(format!("x={x} eps={eps}: {e}")),
            }
        }
    }
    Outcome { passed: worst < 1e-4, detail: format!("max rel error {worst:.2e} (tol 1e-4) over 14 x 100 points") }
}

fn c2() -> Outcome {
    match validate::quadrature_equivalence(1_000_000) {
        Ok((e, pos, neg)) => Outcome {
            passed: e < 1e-6 && pos && neg,
            detail: format!("max abs diff {e:.2e} (tol 1e-6), branches disc>0: {pos}, disc<0: {neg}"),
        },
        Err(e) => fail(e),
    }
}

const C3: &[&str] = &["domain-scan", "--x", "0.7", "--eps", "0.3", "--samples", "1000000", "--seed", "1"];

fn c3(dir: &Path) -> Outcome {
    if let Err(e) = exec(&s(C3), dir, 1) {
        return fail(e);
    }
    let data = rows(&dir.join("domain_scan.csv"));
    let pick = |col: &str| -> Vec<(f64, f64)> {
        data.iter().filter(|r| r[col] == "1").map(|r| (f(r, "theta1"), f(r, "theta2"))).collect()
    };
    let d = pick("in_D");
    let g = pick("in_G");
    let n = d.len() as f64;
    let c = (d.iter().map(|p| p.0).sum::<f64>() / n, d.iter().map(|p| p.1).sum::<f64>() / n);
    let mut sectors = [0usize; 4];
    for p in &d {
        sectors[usize::from(p.0 > c.0) + 2 * usize::from(p.1 > c.1)] += 1;
    }
    let min_t2 = g.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Outcome {
        passed: !g.is_empty() && min_t2 > 0.0 && sectors.iter().all(|&q| q > 0),
        detail: format!(
            "accepted D {}/{}, G {}, min theta2 over G {min_t2:.3e}, D per sector around centroid {sectors:?}",
            d.len(),
            data.len(),
            g.len()
        ),
    }
}

const C4: &[&str] =
    &["rate-curves", "--xs", "0.1,0.2,0.3,0.4,0.5,0.6,0.7", "--eps", "0.3", "--samples", "10000000", "--seed", "1"];

fn c4(dir: &Path) -> Outcome {
    if let Err(e) = exec(&s(C4), dir, 1) {
        return fail(e);
    }
    let curve = rows(&dir.join("rate_curve.csv"));
    let detail = rows(&dir.join("rate_curve_detail.csv"));
    let i1: Vec<f64> = curve.iter().map(|r| f(r, "I1")).collect();
    let i2: Vec<f64> = curve.iter().map(|r| f(r, "I2")).collect();
    let nb: Vec<f64> = detail.iter().map(|r| f(r, "noise_band")).collect();
    let dominates = i1.iter().zip(&i2).all(|(a, b)| *b >= a - 1e-9);
    let i1_zero = i1.last() == Some(&0.0);
    let mut mono = true;
    for i in 0..i1.len() - 1 {
        mono &= i1[i + 1] <= i1[i];
        mono &= i2[i + 1] <= i2[i] + 2.0 * nb[i].max(nb[i + 1]);
    }
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(" ");
    Outcome {
        passed: dominates && i1_zero && mono && i2.iter().all(|v| v.is_finite()),
        detail: format!(
            "I1 [{}], I2 [{}], I2>=I1: {dominates}, I1(0.7)=0: {i1_zero}, non-increasing: {mono}",
            fmt(&i1),
            fmt(&i2)
        ),
    }
}

fn c5() -> Outcome {
    let gaps: Result<Vec<f64>, _> = [0.2, 0.1, 0.05, 0.02].iter().map(|&x| solve_q(x).map(|r| r.gap)).collect();
    match (solve_q(0.01), gaps) {
        (Ok(r), Ok(g)) => Outcome {
            passed: r.t < 1e-10 && g.windows(2).all(|w| w[1] < w[0]),
            detail: format!(
                "t(0.01) = {:.3e} (ln t = {:.2}), Q-P at 0.2/0.1/0.05/0.02 = {:.3e} {:.3e} {:.3e} {:.3e}",
                r.t, r.ln_t, g[0], g[1], g[2], g[3]
            ),
        },
        (a, b) => fail(format!("{:?} {:?}", a.err(), b.err())),
    }
}

fn c6_args(replicas: u64) -> Vec<String> {
    let mut a = s(&["wfe", "--omega", "1.2", "--eps", "0.1", "--rare-n", "2000", "--seed", "1", "--replicas"]);
    a.push(replicas.to_string());
    a
}

fn c6(dir: &Path) -> Outcome {
    if let Err(e) = exec(&c6_args(10_000_000), dir, 1) {
        return fail(e);
    }
    let t = &rows(&dir.join("wfe_transition.csv"))[0];
    let re = &rows(&dir.join("wfe_rare_event.csv"))[0];
    let bound = eps_bound(WfeParams::new(1.2, 0.1).expect("valid"));
    let pbar = f(t, "p_star_inf");
    let beta_c = f(t, "beta_c");
    let rate = f(re, "rate");
    let ok = t["hypotheses_ok"] == "1"
        && (bound - 0.622).abs() < 5e-4
        && pbar.is_finite()
        && pbar > 0.0
        && (beta_c - pbar / 0.02).abs() <= 1e-12 * beta_c
        && (rate / pbar - 1.0).abs() <= 0.25;
    Outcome {
        passed: ok,
        detail: format!(
            "eps bound {bound:.5}, p_bar* {pbar:.6}, beta_c {beta_c:.4}, rate at N=2000 {rate:.6} ({:+.2}% of p_bar*, tol 25%)",
            100.0 * (rate / pbar - 1.0)
        ),
    }
}

const C7: &[&str] = &[
    "ensemble", "--model", "scwm", "--n", "2,8,32", "--beta", "0", "--samples", "1000000", "--observables", "msq",
    "--sampler", "direct", "--seed", "1",
];

fn c7(dir: &Path) -> Outcome {
    if let Err(e) = exec(&s(C7), dir, 1) {
        return fail(e);
    }
    let mut ok = (infinite_t_msq_exact(2).expect("n=2") - 1.0 / 6.0).abs() < 1e-15;
    let mut parts = Vec::new();
    for r in rows(&dir.join("ensemble.csv")) {
        let n: usize = r["N"].parse().expect("N");
        let exact = infinite_t_msq_exact(n).expect("exact");
        let z = (f(&r, "mean") - exact) / f(&r, "std_error");
        ok &= z.abs() <= 3.0;
        parts.push(format!("N={n}: {:.6} vs {exact:.6} ({z:+.2} se)", f(&r, "mean")));
    }
    Outcome { passed: ok && parts.len() == 3, detail: parts.join(", ") }
}

fn c8(dir: &Path) -> Outcome {
    if let Err(e) = exec(&s(&["esm", "--n", "2,8,16", "--beta", "1"]), dir, 1) {
        return fail(e);
    }
    let r = rows(&dir.join("esm.csv"));
    let z2 = f(&r[0], "logZhat");
    let d2 = f(&r[0], "msq_dispersion");
    let (d8, d16) = (f(&r[1], "msq_dispersion"), f(&r[2], "msq_dispersion"));
    let ok = (z2 - 2.0 * (8.0f64 / 9.0).ln()).abs() < 1e-14 && (d2 - 1.0 / 32.0).abs() < 1e-16 && d16 < d8;
    Outcome { passed: ok, detail: format!("N=2: logZhat {z2:.15}, term {d2:.15}; term N=8 {d8:.4e} > N=16 {d16:.4e}") }
}

fn c9_args(model: &str) -> Vec<String> {
    s(&[
        "ensemble", "--model", model, "--n", "8", "--beta", "40", "--omega", "1.2", "--samples", "200000",
        "--observables", "msq", "--seed", "7",
    ])
}

fn c9(dir: &Path) -> Outcome {
    let (a, b) = (dir.join("wfe"), dir.join("plain"));
    for (m, d) in [("scwm-wfe", &a), ("scwm", &b)] {
        if let Err(e) = exec(&c9_args(m), d, 1) {
            return fail(e);
        }
    }
    let w = &rows(&a.join("ensemble.csv"))[0];
    let p = &rows(&b.join("ensemble.csv"))[0];
    let se = f(w, "std_error").hypot(f(p, "std_error"));
    let gap = (f(w, "mean") - f(p, "mean")) / se;
    Outcome {
        passed: gap >= 3.0,
        detail: format!("[m2] WFE {:.5} vs SCWM {:.5}, separation {gap:.1} combined se (need 3)", f(w, "mean"), f(p, "mean")),
    }
}

fn c10() -> Outcome {
    let u = uif_circle();
    match (SphereExample { kappa: 40.0, z_u: 0.5, z_v: 0.9 }).check() {
        Ok(c) => Outcome {
            passed: (u.lhs - u.rhs).abs() < 1e-4 && c.holds(),
            detail: format!(
                "UIF lhs {:.10} rhs {:.10}; concentration hypotheses {:?}, |xi| {:.2e}, |zeta| {:.2e}, bound {:.2e}",
                u.lhs,
                u.rhs,
                c.hypotheses,
                c.xi.abs(),
                c.zeta.abs(),
                c.bound
            ),
        },
        Err(e) => fail(e),
    }
}

fn same_csvs(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> =
        std::fs::read_dir(a).map_err(|e| e.to_string())?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    names.sort();
    let mut n = 0;
    for name in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
        let x = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(name)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{} differs", a.join(name).display()));
        }
        n += 1;
    }
    Ok(n)
}

/// Re-runs the sampling commands with three workers and compares CSV
/// bytes against the single-worker runs. The rare-event pair uses 1e6
/// replicas on both sides.
fn c11(first: &Path, second: &Path) -> Outcome {
    let reruns = [
        ("c3", s(C3), false),
        ("c4", s(C4), false),
        ("c7", s(C7), false),
        ("c9/wfe", c9_args("scwm-wfe"), false),
        ("c9/plain", c9_args("scwm"), false),
        ("c6-small", c6_args(1_000_000), true),
    ];
    let mut files = 0;
    for (name, args, both) in reruns {
        let (a, b) = (first.join(name), second.join(name));
        if both {
            if let Err(e) = exec(&args, &a, 1) {
                return fail(format!("{name}: {e}"));
            }
        }
        if let Err(e) = exec(&args, &b, 3) {
            return fail(format!("{name}: {e}"));
        }
        match same_csvs(&a, &b) {
            Ok(n) => files += n,
            Err(e) => return fail(e),
        }
    }
    Outcome { passed: files > 0, detail: format!("{files} CSV files byte-identical across 1 and 3 workers") }
}

fn c12() -> Outcome {
    let v = |n: usize| classical_ising_1d(n, 1.0, 0.0).map(|c| c.var_m / (n * n) as f64);
    match (v(100), v(10_000), ising_log_z_enumerated(2, 1.0, 0.0)) {
        (Ok(a), Ok(b), Ok(e)) => {
            let t = ising_log_z(2, 1.0, 0.0);
            Outcome {
                passed: b * 10.0 <= a && (t - e).abs() < 1e-10,
                detail: format!(
                    "var(M)/N^2 at N=1e2 {a:.4e}, N=1e4 {b:.4e} (ratio {:.1}); N=2 logZ {t:.12} vs enumerated {e:.12}",
                    a / b
                ),
            }
        }
        (a, b, e) => fail(format!("{:?} {:?} {:?}", a.err(), b.err(), e.err())),
    }
}

type Criterion<'a> = (u32, &'a str, u64, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let root = tempfile::tempdir().expect("temp dir");
    let first = root.path().join("w1");
    let second = root.path().join("w3");
    let d = |n: &str| first.join(n);
    let crits: Vec<Criterion> = vec![
        (1, "gradient consistency", 10, Box::new(c1)),
        (2, "quadrature equivalence", 30, Box::new(c2)),
        (3, "domain and constraint set at x=0.7", 60, Box::new(|| c3(&d("c3")))),
        (4, "rate curves, 1e7 samples per x", 1800, Box::new(|| c4(&d("c4")))),
        (5, "Q-root asymptotics", 1, Box::new(c5)),
        (6, "transition bound and rare-event rate", 600, Box::new(|| c6(&d("c6")))),
        (7, "infinite-temperature oracle", 120, Box::new(|| c7(&d("c7")))),
        (8, "exactly solvable model", 10, Box::new(|| c8(&d("c8")))),
        (9, "wavefunction energy raises [m2]", 300, Box::new(|| c9(&d("c9")))),
        (10, "lemma checks", 30, Box::new(c10)),
        (11, "determinism across worker counts", 3600, Box::new(|| c11(&first, &second))),
        (12, "classical 1-D baseline", 5, Box::new(c12)),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in crits {
        let t = Instant::now();
        let o = run();
        let el = t.elapsed();
        let ok = o.passed && el <= Duration::from_secs(limit);
        failed += u32::from(!ok);
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.1} s, limit {limit} s)",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            el.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
