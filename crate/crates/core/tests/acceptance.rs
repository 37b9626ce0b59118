//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use twostep_gha::admissibility::{bound_coefficients, scan_agreement, ScanSample, SCAN_TOL};
use twostep_gha::algebra::{CharacteristicFunctions, LinearParams, VacuumState};
use twostep_gha::chain::{inflate, SubstitutionRule};
use twostep_gha::cli::{run, Cli};
use twostep_gha::linear_dynamics::{
    classify_spectrum, classify_stability, eigenvalues, StabilityKind, DEFAULT_PROBE_DEPTH,
};
use twostep_gha::pq_numbers::{binet_alpha, casimir2_diag, gauss_number, PQBasis};
use twostep_gha::rep_builder::{build_representation, casimir1, verify_relations};
use twostep_gha::spectrum::{figure4_presets, levels};

const PHI: f64 = 1.618_033_988_749_895;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_gha"))
        .args(args)
        .output()
        .expect("spawn gha");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).expect("utf-8 output"),
    )
}

fn fibonacci_reproduction() -> Outcome {
    let args = [
        "spectrum", "--r", "1", "--s", "1", "--alpha0", "1", "--beta0", "0", "--levels", "10",
    ];
    let (code, stdout) = run_cli(&args);
    let rows: Vec<Vec<String>> = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    let alphas: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let betas: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let want_alpha = [1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0];
    let want_beta = [0.0, 1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0];

    let mut argv = vec!["gha"];
    argv.extend_from_slice(&args);
    let cli = Cli::try_parse_from(&argv).expect("valid flags");
    let mut elapsed = Duration::MAX;
    for _ in 0..5 {
        let mut sink = Vec::new();
        let start = Instant::now();
        run(&cli, &mut sink).expect("spectrum runs");
        elapsed = elapsed.min(start.elapsed());
    }
    let ok = code == 0
        && alphas == want_alpha
        && betas == want_beta
        && elapsed < Duration::from_millis(1);
    outcome(
        ok,
        format!("alphas {:?}, in-process run {:?}", alphas, elapsed),
    )
}

fn golden_eigenvalues() -> Outcome {
    let pair = eigenvalues(LinearParams { r: 1.0, s: 1.0 });
    let plus = (1.0 + 5f64.sqrt()) / 2.0;
    let minus = (1.0 - 5f64.sqrt()) / 2.0;
    let dev = (pair.lambda_plus.re - plus)
        .abs()
        .max((pair.lambda_minus.re - minus).abs())
        .max(pair.lambda_plus.im.abs())
        .max(pair.lambda_minus.im.abs());
    outcome(dev <= 1e-12, format!("max deviation {dev:.2e}"))
}

/// Polynomial of degree ≤ 2 with coefficients in [−2, 2].
fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let degree = rng.gen_range(0..=2);
    (0..=degree).map(|_| rng.gen_range(-2.0..=2.0)).collect()
}

fn relation_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let (mut accepted, mut attempts, mut worst, mut failures) = (0, 0, 0.0_f64, 0);
    while accepted < 200 && attempts < 2_000_000 {
        attempts += 1;
        let funcs =
            CharacteristicFunctions::new(random_poly(&mut rng), random_poly(&mut rng)).unwrap();
        let vacuum =
            VacuumState::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)).unwrap();
        let Ok(rep) = build_representation(&funcs, vacuum, 32) else {
            continue;
        };
        let bounded = rep.h().diag().iter().all(|a| a.abs() <= 1e3);
        if !bounded {
            continue;
        }
        accepted += 1;
        let report = verify_relations(&rep, &funcs, 1e-9).unwrap();
        let c1 = casimir1(&rep, &funcs);
        let local = report
            .max_residual()
            .max(c1.forms_difference)
            .max(c1.constant_deviation);
        worst = worst.max(local);
        if !(report.passed && c1.forms_difference < 1e-9 && c1.constant_deviation < 1e-9) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = accepted == 200 && failures == 0 && elapsed < Duration::from_secs(5);
    outcome(
        ok,
        format!(
            "{accepted} instances ({attempts} drawn), worst residual {worst:.2e}, {failures} failures, {elapsed:?}"
        ),
    )
}

/// The 500-point (r, s) sample: 50 double roots, 100 complex pairs, 350 uniform.
fn binet_sample() -> Vec<(LinearParams, VacuumState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::with_capacity(500);
    for k in 0..500 {
        let r: f64 = rng.gen_range(-3.0..=3.0);
        let s = match k {
            0..=49 => -r * r / 4.0,
            50..=149 => rng.gen_range(-3.0..-r * r / 4.0),
            _ => rng.gen_range(-3.0..=3.0),
        };
        let vacuum =
            VacuumState::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)).unwrap();
        out.push((LinearParams { r, s }, vacuum));
    }
    out
}

/// α_n by the planar map, independent of the closed form.
fn alphas_by_recurrence(params: LinearParams, vacuum: VacuumState, n_max: usize) -> Vec<f64> {
    let (mut a, mut b) = (vacuum.alpha0, vacuum.beta0);
    let mut out = vec![a];
    for _ in 0..n_max {
        (a, b) = (params.r * a + b, params.s * a);
        out.push(a);
    }
    out
}

fn binet_vs_recurrence() -> Outcome {
    let sample = binet_sample();
    let complex = sample
        .iter()
        .filter(|(p, _)| p.discriminant() < 0.0)
        .count();
    let mut worst = 0.0_f64;
    for &(params, vacuum) in &sample {
        let basis = PQBasis::from_params(params);
        let rec = alphas_by_recurrence(params, vacuum, 40);
        for n in 0..=40u32 {
            let closed = binet_alpha(n, vacuum, &basis);
            let scale = 1f64.max(rec[n as usize].abs()).max(
                vacuum.alpha0.abs() * gauss_number(n + 1, &basis).abs()
                    + vacuum.beta0.abs() * gauss_number(n, &basis).abs(),
            );
            worst = worst.max((closed - rec[n as usize]).abs() / scale);
        }
    }
    outcome(
        worst < 1e-9,
        format!("500 samples ({complex} complex, 50 double roots), worst relative deviation {worst:.2e}"),
    )
}

fn casimir2_constancy() -> Outcome {
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for (params, vacuum) in binet_sample() {
        if params.s == 0.0 {
            continue;
        }
        let basis = PQBasis::from_params(params);
        for n in 0..=40u32 {
            let c2 = casimir2_diag(n, vacuum, &basis).unwrap();
            let scale = 1f64.max(
                vacuum.alpha0.abs() * gauss_number(n + 2, &basis).abs()
                    + vacuum.beta0.abs() * gauss_number(n + 1, &basis).abs(),
            );
            worst = worst.max((c2 - vacuum.beta0).abs() / scale);
            checked += 1;
        }
    }
    outcome(
        worst < 1e-9,
        format!("{checked} diagonal entries, worst scaled deviation {worst:.2e}"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Observed {
    Stable,
    Unstable,
    Marginal,
}

/// Iterates 10 random starting points for 200 steps and compares the peak
/// norm over steps 150..200 with the peak over steps 100..150.
fn trajectory_oracle(params: LinearParams, rng: &mut ChaCha8Rng) -> Observed {
    let mut ratio = 0.0_f64;
    for _ in 0..10 {
        let (mut a, mut b): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let (mut early, mut late) = (0.0_f64, 0.0_f64);
        for n in 1..=200 {
            (a, b) = (params.r * a + b, params.s * a);
            let norm = a.hypot(b);
            if (100..150).contains(&n) {
                early = early.max(norm);
            } else if n >= 150 {
                late = late.max(norm);
            }
        }
        ratio = ratio.max(late / early);
    }
    if ratio < 0.95 {
        Observed::Stable
    } else if ratio > 1.05 {
        Observed::Unstable
    } else {
        Observed::Marginal
    }
}

fn stability_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let axis: Vec<f64> = (0..100).map(|i| -3.0 + 6.0 * i as f64 / 99.0).collect();
    let (mut compared, mut mismatches) = (0, Vec::new());
    for &r in &axis {
        for &s in &axis {
            let band = [
                (1.0 - r - s).abs() / 2f64.sqrt(),
                (1.0 + r - s).abs() / 2f64.sqrt(),
                (1.0 + s).abs(),
            ];
            if band.iter().any(|&d| d <= 1e-3) {
                continue;
            }
            let params = LinearParams { r, s };
            let kind = classify_stability(params, 1e-10).kind;
            let expected = match kind {
                StabilityKind::AsymptoticallyStable => Observed::Stable,
                StabilityKind::Unstable | StabilityKind::FixedLineUnstable => Observed::Unstable,
                _ => Observed::Marginal,
            };
            compared += 1;
            let seen = trajectory_oracle(params, &mut rng);
            if seen != expected {
                mismatches.push((r, s, kind, seen));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed < Duration::from_secs(10);
    outcome(
        ok,
        format!(
            "{compared} grid points, {} mismatches{}, {elapsed:?}",
            mismatches.len(),
            mismatches
                .first()
                .map_or(String::new(), |m| format!(" (first {m:?})"))
        ),
    )
}

/// Half-grid of the (λ₋, λ₊) plane off the boundary lines plus points on each
/// boundary segment, each at three values of α₀.
fn appendix_sample() -> Vec<ScanSample> {
    let alpha0s = [-1.5, 0.0, 0.7];
    let mut pairs = Vec::new();
    let axis: Vec<f64> = (0..34).map(|i| -3.2 + 0.19 * i as f64 + 0.0137).collect();
    for &lp in &axis {
        for &lm in axis.iter().filter(|&&lm| lm <= lp) {
            pairs.push((lm, lp));
        }
    }
    for k in 1..=9 {
        let t = k as f64 / 10.0;
        pairs.push((-1.0 + 2.0 * t * 0.95, 1.0)); // I / II
        pairs.push((-1.0, 1.0 + 2.0 * t)); // I / IV
        pairs.push((-t, t)); // II / III
        pairs.push((-(1.0 + 2.0 * t), 1.0 + 2.0 * t)); // IV / V
        pairs.push((-1.0 - 2.0 * t, 0.0)); // V / VI
        pairs.push((-1.0, t)); // III / V
        pairs.push((-1.0, -t)); // III / VI
        pairs.push((-1.0 - 2.0 * t, -1.0)); // VI / VII
    }
    pairs
        .into_iter()
        .flat_map(|(lm, lp)| {
            alpha0s.iter().map(move |&alpha0| ScanSample {
                lambda_minus: lm,
                lambda_plus: lp,
                alpha0,
            })
        })
        .collect()
}

fn appendix_agreement() -> Outcome {
    let sample = appendix_sample();
    let report = scan_agreement(&sample, 200, SCAN_TOL);
    let conclusive = report.compared - report.inconclusive;
    let disagreeing: Vec<String> = report
        .per_region
        .iter()
        .filter(|(_, t)| t.disagreed > 0)
        .map(|(name, t)| format!("{name} {}/{}", t.disagreed, t.sampled - t.skipped))
        .collect();
    let ok = report.total >= 1000
        && report.disagreements.is_empty()
        && report.inconclusive_fraction() < 0.05;
    outcome(
        ok,
        format!(
            "{} points, {} compared, {} agreed of {} conclusive ({:.1}%), inconclusive {:.2}%, skipped {}; disagreeing: [{}]",
            report.total,
            report.compared,
            report.agreed,
            conclusive,
            100.0 * report.agreement_fraction(),
            100.0 * report.inconclusive_fraction(),
            report.skipped,
            disagreeing.join(", ")
        ),
    )
}

fn figure4_morphologies() -> Outcome {
    let mut labels = Vec::new();
    let mut ok = true;
    for preset in figure4_presets() {
        let got = classify_spectrum(preset.params, preset.vacuum, DEFAULT_PROBE_DEPTH).unwrap();
        ok &= got == preset.expected;
        labels.push(got.to_string());
    }
    let theta = 2.0 * PI / 3.0;
    let periodic = LinearParams {
        r: 2.0 * theta.cos(),
        s: -1.0,
    };
    let set = levels(periodic, VacuumState::new(-1.0, theta.cos()).unwrap(), 63).unwrap();
    let dev = (0..=60)
        .map(|n| (set.alphas[n + 3] - set.alphas[n]).abs())
        .fold(0.0, f64::max);
    ok &= dev <= 1e-9;
    outcome(
        ok,
        format!("[{}], period-3 deviation {dev:.2e}", labels.join(", ")),
    )
}

fn chain_correspondence() -> Outcome {
    let fib = SubstitutionRule::fibonacci();
    let fig2 = SubstitutionRule::new("ABA", "A").unwrap();
    let mut ok = true;
    for (rule, (r, s), steps) in [(&fib, (1.0, 1.0), 15), (&fig2, (2.0, 1.0), 15)] {
        let trace = inflate(rule, "A", steps).unwrap();
        let (mut a, mut b) = (1.0_f64, 0.0_f64);
        for (n, &(na, nb)) in trace.counts.iter().enumerate() {
            if n > 0 {
                (a, b) = (r * a + b, s * a);
            }
            ok &= na as f64 == a && nb as f64 == b;
        }
    }
    let trace = inflate(&fib, "A", 20).unwrap();
    let (na, nb) = trace.counts[20];
    let ratio = na as f64 / nb as f64;
    ok &= (ratio - PHI).abs() < 1e-4;
    outcome(ok, format!("step-20 ratio {ratio:.10}"))
}

fn fibonacci_bound() -> Outcome {
    let coeffs = bound_coefficients(LinearParams { r: 1.0, s: 1.0 }, 100);
    let inf = coeffs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let (code, stdout) = run_cli(&["admissible", "--r", "1", "--s", "1", "--alpha0", "-1"]);
    let doc: Value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    let bound = doc["beta0_lower_bound"].as_f64().unwrap_or(f64::NAN);
    let ok = code == 0 && (inf + PHI).abs() <= 1e-6 && (bound - PHI).abs() <= 1e-9;
    outcome(ok, format!("inf = {inf:.12}, CLI bound = {bound}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 Fibonacci reproduction", fibonacci_reproduction),
        ("2 golden eigenvalues", golden_eigenvalues),
        ("3 relation residuals", relation_residuals),
        ("4 Binet vs recurrence", binet_vs_recurrence),
        ("5 Casimir C2 constancy", casimir2_constancy),
        ("6 stability vs oracle", stability_vs_oracle),
        ("7 appendix agreement", appendix_agreement),
        ("8 Figure 4 morphologies", figure4_morphologies),
        ("9 chain correspondence", chain_correspondence),
        ("10 Fibonacci admissibility bound", fibonacci_bound),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", result.detail);
        failed += usize::from(!result.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
