//! Acceptance gate. Each test prints one PASS/FAIL line to stderr (bypassing
//! the test harness capture) and then asserts.

use std::io::Write;
use std::sync::Mutex;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pieprox::bench::counterexample_check;
use pieprox::bench::sweep::{run_sweep, SweepConfig};
use pieprox::bench::table1::{published_pairs, table1_report, PUBLISHED};
use pieprox::bench::timing::{timing_bench, DEFAULT_POINTS, PUBLISHED_ROWS};
use pieprox::ista::{fixed_point_residual, ista_solve, nu_max, IstaConfig, Problem};
use pieprox::lambert_w::{w0, wm1, INV_E};
use pieprox::pie_prox::{
    objective_l, t_operator, t_operator_malek, t_operator_refined, threshold_bar_tau, x1_candidate,
    PieParams, PieProx, ProxSet,
};
use pieprox::prox_zoo::{PenaltyKind, PenaltySpec, ScalarProx, PENALTY_NAMES};
use pieprox::sensing::{gen_matrix, gen_signal, mutual_coherence, MatrixKind, SignalSpec};

/// Timing must not share the CPU with other criteria.
static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(id: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] criterion {id} {name}: {status} ({detail})"
    );
    assert!(passed, "criterion {id} {name} failed: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

#[test]
fn criterion_1_threshold_table() {
    let _g = lock();
    let rows = table1_report(&published_pairs());
    let mut worst: f64 = 0.0;
    let mut ok = rows.len() == 18;
    for (row, reference) in rows.iter().zip(PUBLISHED.iter()) {
        match &row.result {
            Ok(r) => {
                worst = worst
                    .max((r.x_star - reference.x_star).abs())
                    .max((r.bar_tau - reference.bar_tau).abs());
            }
            Err(_) => ok = false,
        }
    }
    verdict(
        1,
        "threshold table",
        ok && worst <= 1e-6,
        &format!("18 pairs, max abs deviation {worst:.3e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_2_counterexample() {
    let _g = lock();
    let report = counterexample_check();
    let failed: Vec<_> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    verdict(
        2,
        "counterexample",
        report.passed(),
        &format!(
            "{} checks, baseline {:?}, prox {:?}, failed {:?}",
            report.checks.len(),
            report.baseline.values(),
            report.prox.values(),
            failed
        ),
    );
}

const GRID_HALF: usize = 500_000;
const ORACLE_INSTANCES: usize = 1000;

/// Minimum of `f` on `2 * GRID_HALF + 1` points over `[-c, c]`, with 0 and
/// both endpoints included exactly.
fn grid_min(c: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = c / GRID_HALF as f64;
    let mut best = f(0.0);
    for i in 1..=GRID_HALF {
        let x = if i == GRID_HALF { c } else { h * i as f64 };
        best = best.min(f(x)).min(f(-x));
    }
    best
}

fn random_zoo_spec(rng: &mut ChaCha8Rng, name: &str) -> PenaltySpec {
    let lambda = log_uniform(rng, 1e-2, 3.0);
    let kind = match name {
        "soft" => PenaltyKind::Soft,
        "hard" => PenaltyKind::Hard,
        "half" => PenaltyKind::Half,
        "scad" => PenaltyKind::Scad {
            a: rng.random_range(2.05..6.0),
        },
        "mcp" => PenaltyKind::Mcp {
            a: rng.random_range(1.05..6.0),
        },
        "log" => PenaltyKind::Log {
            a: log_uniform(rng, 0.03, 3.0),
        },
        "tl1" => PenaltyKind::Tl1 {
            a: log_uniform(rng, 0.1, 10.0),
        },
        "cap" => PenaltyKind::Cap {
            a: log_uniform(rng, 0.1, 3.0),
        },
        _ => unreachable!(),
    };
    PenaltySpec::new(kind, lambda).unwrap()
}

#[test]
fn criterion_3_oracle_equivalence() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
    let mut worst_overall: f64 = 0.0;
    let mut details = Vec::new();
    let mut ok = true;
    for name in PENALTY_NAMES {
        let mut worst: f64 = 0.0;
        let mut where_worst = String::new();
        for _ in 0..ORACLE_INSTANCES {
            let (gap, label) = if name == "pie" {
                // The PiE objective is compared on its own scale,
                // lambda f(x) + (x - x0)^2 / (2 mu).
                let p = PieParams::new(
                    log_uniform(&mut rng, 1e-2, 1e2),
                    log_uniform(&mut rng, 1e-2, 1e2),
                    log_uniform(&mut rng, 1e-2, 1e2),
                )
                .unwrap();
                let x0 = rng.random_range(-10.0..10.0);
                let set = PieProx::new(p).prox(x0);
                let g = grid_min(x0.abs() + 1.0, |x| objective_l(x, x0, &p));
                let gap = set
                    .values()
                    .iter()
                    .map(|&e| (objective_l(e, x0, &p) - g).abs())
                    .fold(0.0, f64::max);
                (gap, format!("{p:?} x0={x0}"))
            } else {
                let spec = random_zoo_spec(&mut rng, name);
                let mu = log_uniform(&mut rng, 0.05, 3.0);
                let x0 = rng.random_range(-6.0..6.0);
                let prox = ScalarProx::new(&spec, mu).unwrap();
                let set = prox.prox(x0);
                let g = grid_min(x0.abs() + 1.0, |x| prox.objective(x, x0));
                let gap = set
                    .values()
                    .iter()
                    .map(|&e| (prox.objective(e, x0) - g).abs())
                    .fold(0.0, f64::max);
                (gap, format!("{spec} mu={mu} x0={x0}"))
            };
            if gap > worst || gap.is_nan() {
                worst = if gap.is_nan() { f64::INFINITY } else { gap };
                where_worst = label;
            }
        }
        if worst > 1e-8 {
            ok = false;
            details.push(format!("{name} gap {worst:.3e} at {where_worst}"));
        }
        worst_overall = worst_overall.max(worst);
    }
    verdict(
        3,
        "oracle equivalence",
        ok,
        &format!(
            "9 penalties x {ORACLE_INSTANCES} instances, 1e6-point grid, max gap {worst_overall:.3e} (tol 1e-8){}",
            if details.is_empty() { String::new() } else { format!("; {}", details.join("; ")) }
        ),
    );
}

/// Weyl sequence in `[0, 1)`.
fn weyl(i: usize) -> f64 {
    const G: f64 = 0.618_033_988_749_894_9;
    (0.5 + G * i as f64).fract()
}

#[test]
fn criterion_4_lambert_w() {
    let _g = lock();
    const N: usize = 100_000;
    let mut worst0: f64 = 0.0;
    let mut worst1: f64 = 0.0;
    let mut bounds_ok = true;
    for i in 0..N {
        let u = weyl(i);
        // Half the points linear near the branch point, half log-spaced out to 1e300.
        let x0 = if i % 2 == 0 {
            -INV_E + u * (INV_E + 10.0)
        } else {
            10f64.powf(-300.0 + 600.0 * u)
        };
        let w = w0(x0).unwrap();
        bounds_ok &= w >= -1.0;
        worst0 = worst0.max((w * w.exp() - x0).abs() / x0.abs().max(1.0));

        let x1 = if i % 2 == 0 {
            -INV_E * (1.0 - u)
        } else {
            -(10f64.powf(-300.0 + 299.0 * u)) * INV_E
        };
        if x1 >= 0.0 {
            continue;
        }
        let w = wm1(x1).unwrap();
        bounds_ok &= w <= -1.0;
        worst1 = worst1.max((w * w.exp() - x1).abs() / x1.abs().max(1.0));
    }

    let branch_ok = (w0(-INV_E).unwrap() + 1.0).abs() <= 1e-10
        && (wm1(-INV_E).unwrap() + 1.0).abs() <= 1e-10
        && w0(0.0).unwrap() == 0.0
        && (w0(std::f64::consts::E).unwrap() - 1.0).abs() <= 1e-10;

    // Round trip W(w e^w) = w, relative to the conditioning 1 / |1 + w|.
    let mut worst_rt: f64 = 0.0;
    for i in 0..N {
        let u = weyl(i + 7);
        let w = -1.0 + 1e-6 + u * 40.0;
        let back = w0(w * w.exp()).unwrap();
        worst_rt = worst_rt.max((back - w).abs() * (1.0 + w).abs() / (1.0 + w.abs()));
        let w = -1.0 - 1e-6 - u * 700.0;
        let back = wm1(w * w.exp()).unwrap();
        worst_rt = worst_rt.max((back - w).abs() * (1.0 + w).abs() / (1.0 + w.abs()));
    }

    verdict(
        4,
        "lambert w",
        worst0 <= 1e-12 && worst1 <= 1e-12 && bounds_ok && branch_ok && worst_rt <= 1e-12,
        &format!(
            "1e5 points per branch: W0 residual {worst0:.2e}, W-1 residual {worst1:.2e}, round-trip {worst_rt:.2e}, branch point ok {branch_ok}"
        ),
    );
}

#[test]
fn criterion_5_timing_ordering() {
    let _g = lock();
    let rows = timing_bench(DEFAULT_POINTS, &PUBLISHED_ROWS);
    let (ok, detail) = match rows {
        Ok(rows) => {
            let ok = rows
                .iter()
                .all(|r| r.ordering_holds() && r.threshold_ratio() <= 0.9);
            let parts: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "({},{},{}): {:.4}s/{:.4}s/{:.4}s ratio {:.2}",
                        r.mu,
                        r.lambda,
                        r.sigma,
                        r.baseline_s,
                        r.refined_s,
                        r.threshold_s,
                        r.threshold_ratio()
                    )
                })
                .collect();
            (
                ok,
                format!("baseline/refined/threshold {}", parts.join("; ")),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    verdict(5, "timing ordering", ok, &detail);
}

#[test]
fn criterion_6_coherence_and_spectrum() {
    let _g = lock();
    const SEEDS: u64 = 20;
    let stats = |kind: MatrixKind| {
        let mut coh = 0.0;
        let mut nu = 0.0;
        for s in 0..SEEDS {
            let a = gen_matrix(kind, 128, 256, 1000 + s).unwrap();
            coh += mutual_coherence(a.view());
            nu += nu_max(a.view()).unwrap();
        }
        (coh / SEEDS as f64, nu / SEEDS as f64)
    };
    let (gc, gn) = stats(MatrixKind::Gaussian);
    let (d3c, _) = stats(MatrixKind::Dct { refinement: 3 });
    let (d10c, d10n) = stats(MatrixKind::Dct { refinement: 10 });
    let bands = [
        ("coherence gaussian", gc, 0.30, 0.44),
        ("coherence dct3", d3c, 0.60, 0.76),
        ("coherence dct10", d10c, 0.99, 1.0),
        ("nu_max gaussian", gn, 5.2, 6.0),
        ("nu_max dct10", d10n, 7.0, 8.4),
    ];
    let parts: Vec<String> = bands
        .iter()
        .map(|&(name, v, lo, hi)| {
            let mark = if (lo..=hi).contains(&v) {
                "ok"
            } else {
                "OUT OF BAND"
            };
            format!("{name} {v:.4} in [{lo}, {hi}] {mark}")
        })
        .collect();
    verdict(
        6,
        "coherence and spectrum",
        bands.iter().all(|&(_, v, lo, hi)| (lo..=hi).contains(&v)),
        &format!("{SEEDS} seeds at 128x256: {}", parts.join("; ")),
    );
}

#[test]
fn criterion_7_recovery() {
    let _g = lock();
    let pie = PenaltySpec::pie(0.01, 0.5).unwrap();
    let soft = PenaltySpec::comparison_default("soft").unwrap();
    let cfg = SweepConfig {
        ks: vec![10, 40],
        trials: 20,
        seed: 20_240_601,
        record_time: false,
        ..SweepConfig::desk(vec![pie, soft])
    };
    let reports = run_sweep(&cfg).unwrap();
    let rate = |p: &PenaltySpec, k: usize| {
        reports
            .iter()
            .find(|r| r.penalty == p.to_string() && r.k == k)
            .map(|r| r.success_rate)
            .unwrap()
    };
    let (p10, p40, s40) = (rate(&pie, 10), rate(&pie, 40), rate(&soft, 40));
    verdict(
        7,
        "recovery",
        p10 >= 0.9 && p40 >= 0.5 && s40 < p40,
        &format!("20 trials: pie k=10 {p10}, pie k=40 {p40}, soft k=40 {s40}"),
    );
}

#[test]
fn criterion_8_solver_invariants() {
    let _g = lock();
    const INSTANCES: u64 = 50;
    let (m, n) = (20, 40);
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    let mut worst_fp: f64 = 0.0;
    let mut converged = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for name in PENALTY_NAMES {
        let spec = PenaltySpec::comparison_default(name).unwrap();
        let mut name_converged = 0;
        for s in 0..INSTANCES {
            let a = gen_matrix(MatrixKind::Gaussian, m, n, 500 + s).unwrap();
            let x = gen_signal(&SignalSpec::new(n, 1 + (s as usize % 8), 900 + s)).unwrap();
            let b = a.dot(&x);
            let mu = 1.0 / nu_max(a.view()).unwrap();
            let prob = Problem::new(a, b, spec).unwrap();

            let run = ista_solve(&prob, &IstaConfig::new(mu).maxiter(500)).unwrap();
            for w in run.objective_trace.windows(2) {
                let rise = w[1] - w[0];
                worst_rise = worst_rise.max(rise);
                if rise > 1e-10 {
                    failures.push(format!("{name} seed {s} rises by {rise:.2e}"));
                    break;
                }
            }

            let tight = IstaConfig::new(mu)
                .eps(1e-14)
                .maxiter(50_000)
                .record_trace(false);
            let r = ista_solve(&prob, &tight).unwrap();
            total += 1;
            if r.final_e <= 1e-14 {
                converged += 1;
                name_converged += 1;
                let res = fixed_point_residual(&prob, mu, r.x_final.view()).unwrap();
                worst_fp = worst_fp.max(res);
                if res > 1e-10 {
                    failures.push(format!("{name} seed {s} fixed-point residual {res:.2e}"));
                }
            }
        }
        if name_converged == 0 {
            failures.push(format!("{name}: no run converged"));
        }
    }
    verdict(
        8,
        "solver invariants",
        failures.is_empty(),
        &format!(
            "9 penalties x {INSTANCES} instances at mu = 1/nu_max: max step increase {worst_rise:.2e} (tol 1e-10); {converged}/{total} runs converged, max fixed-point residual {worst_fp:.2e} (tol 1e-10){}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    );
}

fn cases() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn any_params() -> impl Strategy<Value = PieParams> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(a, b, c)| PieParams::new(10f64.powf(a), 10f64.powf(b), 10f64.powf(c)).unwrap())
}

/// Parameters with `mu*lambda/sigma^2 > threshold`.
fn discontinuous_params(threshold: f64) -> impl Strategy<Value = PieParams> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.0..3.0f64).prop_map(move |(a, s, excess)| {
        let mu_lambda = 10f64.powf(a);
        let sigma = 10f64.powf(s).min((mu_lambda / (threshold * 1.0001)).sqrt());
        let sigma = sigma / 10f64.powf(excess / 3.0);
        PieParams::new(1.0, mu_lambda, sigma).unwrap()
    })
}

fn any_zoo() -> impl Strategy<Value = (PenaltySpec, f64)> {
    (0usize..9, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(i, u, v, t)| {
        let lambda = 10f64.powf(-2.0 + 2.5 * u);
        let shape = 10f64.powf(-1.0 + 1.5 * v);
        let kind = match PENALTY_NAMES[i] {
            "pie" => PenaltyKind::Pie { sigma: shape },
            "soft" => PenaltyKind::Soft,
            "hard" => PenaltyKind::Hard,
            "half" => PenaltyKind::Half,
            "scad" => PenaltyKind::Scad {
                a: 2.0 + 4.0 * v + 1e-3,
            },
            "mcp" => PenaltyKind::Mcp {
                a: 1.0 + 4.0 * v + 1e-3,
            },
            "log" => PenaltyKind::Log { a: shape },
            "tl1" => PenaltyKind::Tl1 { a: shape },
            _ => PenaltyKind::Cap { a: shape },
        };
        (
            PenaltySpec::new(kind, lambda).unwrap(),
            10f64.powf(-1.0 + 1.3 * t),
        )
    })
}

fn iota() -> f64 {
    let f = |t: f64| 2f64.sqrt() * t - 2.0 * t.ln() - 2.0;
    let (mut lo, mut hi) = (2f64.sqrt(), 4.0 * 2f64.sqrt());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (f(lo) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn run<T: std::fmt::Debug>(
    name: &str,
    r: std::result::Result<(), proptest::test_runner::TestError<T>>,
) -> std::result::Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn property_suite() -> std::result::Result<(), String> {
    use proptest::test_runner::TestRunner;

    let mut runner = TestRunner::new(cases());
    run(
        "anti-symmetry",
        runner.run(&(any_params(), -20.0..20.0f64), |(p, x0)| {
            let prox = PieProx::new(p);
            prop_assert_eq!(prox.prox(-x0), prox.prox(x0).negate());
            Ok(())
        }),
    )?;
    run(
        "zoo anti-symmetry and shrinkage",
        runner.run(&(any_zoo(), -20.0..20.0f64), |((spec, mu), x0)| {
            let prox = ScalarProx::new(&spec, mu).unwrap();
            let set = prox.prox(x0);
            prop_assert_eq!(prox.prox(-x0), set.negate());
            for &e in set.values() {
                prop_assert!(e.abs() <= x0.abs() && e * x0 >= 0.0);
            }
            Ok(())
        }),
    )?;
    run(
        "shrinkage",
        runner.run(&(any_params(), 1e-6..20.0f64), |(p, x0)| {
            for &e in t_operator(x0, &p).values() {
                prop_assert!(e >= 0.0 && e <= x0);
                if e == x0 {
                    // The shift is below one ulp of x0.
                    let shift = x0 - x1_candidate(x0, &p).unwrap();
                    prop_assert!(shift.abs() <= x0 * f64::EPSILON);
                }
            }
            Ok(())
        }),
    )?;
    run(
        "ordering",
        runner.run(&(any_params(), 0.0..20.0f64, 0.0..20.0f64), |(p, a, b)| {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(lo < hi);
            let prox = PieProx::new(p);
            prop_assert!(prox.t(lo).max() <= prox.t(hi).min());
            Ok(())
        }),
    )?;
    run(
        "regime agreement",
        runner.run(&(discontinuous_params(1.0), 0.0..1.0f64), |(p, u)| {
            let x0 = u * 3.0 * (2.0 * p.mu_lambda()).sqrt();
            let a = t_operator(x0, &p);
            let b = t_operator_refined(x0, &p).unwrap();
            let c = t_operator_malek(x0, &p);
            prop_assert!(
                a.agrees_with(&b) && b.agrees_with(&c),
                "{:?} {:?} {:?}",
                a,
                b,
                c
            );
            Ok(())
        }),
    )?;
    run(
        "threshold consistency",
        runner.run(&discontinuous_params(1.0), |p| {
            let tau = threshold_bar_tau(&p).unwrap().bar_tau;
            let d = 1e-9 * tau;
            prop_assert_eq!(t_operator(tau - d, &p), ProxSet::zero());
            let above = t_operator(tau + d, &p);
            prop_assert!(above.is_singleton() && above.min() > 0.0);
            Ok(())
        }),
    )?;
    run(
        "1 + ln t <= t",
        runner.run(&(-10.0..10.0f64), |e| {
            let t = 10f64.powf(e);
            prop_assert!(1.0 + t.ln() <= t);
            if t != 1.0 {
                prop_assert!(1.0 + t.ln() < t || (t - 1.0).abs() < 1e-7);
            }
            Ok(())
        }),
    )?;
    run(
        "corollary bracket",
        runner.run(&discontinuous_params(2.0), |p| {
            let s = (2.0 * p.mu_lambda()).sqrt();
            let x1 = x1_candidate(s, &p).unwrap();
            let lower = (p.sigma() * p.ratio().ln()).max(s - 2.0 * p.sigma());
            prop_assert!(x1 > lower && x1 < s, "{} not in ({}, {})", x1, lower, s);
            Ok(())
        }),
    )?;

    let i = iota();
    if (i - 2.93868).abs() > 1e-4 {
        return Err(format!("iota = {i}"));
    }
    let mut last = 0.0;
    for sigma in [0.5, 0.3, 0.2, 0.1] {
        let t = threshold_bar_tau(&PieParams::new(1.0, 1.0, sigma).unwrap())
            .unwrap()
            .bar_tau;
        if t < last {
            return Err(format!("threshold decreased at sigma = {sigma}"));
        }
        last = t;
    }
    if (last - 2f64.sqrt()).abs() > 1e-4 {
        return Err(format!("threshold at sigma = 0.1 is {last}"));
    }
    Ok(())
}

#[test]
fn criterion_9_property_suites() {
    let _g = lock();
    let result = property_suite();
    verdict(
        9,
        "property suites",
        result.is_ok(),
        &match result {
            Ok(()) => format!(
                "8 suites x 1000 cases; iota = {:.6}; hard-threshold limit ok",
                iota()
            ),
            Err(e) => e,
        },
    );
}
