//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed here and are not tuned to results.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use flicker::campaign::{compare, monte_carlo, MonteCarloSpec};
use flicker::config::{PipelineDoc, WaveformDoc};
use flicker::report::{estimate, truth_errors, RunOptions};
use flicker_core::adaline::{basis_vector, learning_rate, AdalineConfig, AdalineState};
use flicker_core::baseline::{goertzel, BaselineConfig};
use flicker_core::grid::{GRID_LEN, IEC_FREQUENCIES, IEC_UNITY_AMPLITUDES};
use flicker_core::hinf::{structure_row, HinfConfig, HinfState};
use flicker_core::metrics::{first_settled_index, sensation};
use flicker_core::pipeline::{run_observed, FrequencyMode, PipelineConfig};
use flicker_core::scenarios::{self, DISTORTED_ORDERS, DISTORTED_PHASES_DEG};
use flicker_core::signal::{synthesize, WaveformSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE: f64 = 1200.0;
const TAU_S: f64 = 1.0 / RATE;
const SEED: u64 = 20_240_601;

struct Verdict {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        title,
        pass,
        detail,
    }
}

fn phase_error_deg(estimate_rad: f64, truth_deg: f64) -> f64 {
    let d = estimate_rad.to_degrees() - truth_deg;
    (d + 180.0).rem_euclid(360.0) - 180.0
}

struct SingleRun {
    frequency: f64,
    truth: f64,
    estimate: f64,
    settled_s: Option<f64>,
}

/// Criteria 1 and 2 share the same 36 runs.
fn single_flicker_runs() -> Vec<SingleRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let config = PipelineConfig::new(vec![1]);
    IEC_FREQUENCIES
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let amp = rng.random_range(0.001..=0.02);
            let phase = rng.random_range(0.0..=90.0);
            let mut spec = scenarios::single_flicker(f, amp, phase);
            spec.noise.seed = SEED + i as u64;
            let series = synthesize(&spec).unwrap();
            let mut trace = Vec::with_capacity(series.len());
            let out = run_observed(&series, &config, |_, p| {
                let a = p
                    .amplitudes()
                    .map_or(f64::NAN, |a| a[0].relative_amplitudes[i]);
                trace.push(a);
            })
            .unwrap();
            let window = (0.1 * RATE).round() as usize;
            SingleRun {
                frequency: f,
                truth: amp,
                estimate: out.relative_amplitudes[i],
                settled_s: first_settled_index(&trace, window, 1e-3).map(|k| (k + 1) as f64 / RATE),
            }
        })
        .collect()
}

fn criterion_1(runs: &[SingleRun]) -> Verdict {
    let errors: Vec<f64> = runs
        .iter()
        .map(|r| (r.estimate - r.truth).abs() / r.truth)
        .collect();
    let ok = errors.iter().filter(|&&e| e < 0.01).count();
    let (worst_i, worst) =
        errors.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc },
        );
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    verdict(
        "1",
        "single-flicker accuracy",
        ok >= 35,
        format!(
            "{ok}/36 bins within 1% (need >= 35); median error {:.1}%, worst {:.1}% at {} Hz",
            100.0 * sorted[18],
            100.0 * worst,
            runs[worst_i].frequency
        ),
    )
}

fn criterion_2(runs: &[SingleRun]) -> Verdict {
    let within = runs
        .iter()
        .filter(|r| r.settled_s.is_some_and(|t| t <= 0.3))
        .count();
    let never = runs.iter().filter(|r| r.settled_s.is_none()).count();
    let slowest = runs
        .iter()
        .filter_map(|r| r.settled_s)
        .reduce(f64::max)
        .map_or("none settled".into(), |t| {
            format!("slowest settled at {t:.3} s")
        });
    verdict(
        "2",
        "single-flicker convergence",
        within == runs.len(),
        format!(
            "{within}/36 settled (0.1% over a 0.1 s window) by 0.3 s; {never} never settled \
             within 1 s; {slowest}"
        ),
    )
}

fn criterion_3() -> Verdict {
    let spec = scenarios::distorted();
    let series = synthesize(&spec).unwrap();
    let config = PipelineConfig::new(DISTORTED_ORDERS.to_vec());
    let mut env_23 = f64::NAN;
    let mut phases_35 = Vec::new();
    run_observed(&series, &config, |i, p| {
        if i == 23 {
            env_23 = p.envelopes().envelopes[0];
        }
        if i == 35 {
            phases_35 = p.envelopes().phases.clone();
        }
    })
    .unwrap();
    let truth = spec.envelope(0, 23);
    let env_err = (env_23 - truth).abs() / truth;
    let phase_errs: Vec<f64> = phases_35
        .iter()
        .zip(DISTORTED_PHASES_DEG)
        .map(|(&p, t)| phase_error_deg(p, t).abs())
        .collect();
    let worst_phase = phase_errs.iter().cloned().fold(0.0, f64::max);
    verdict(
        "3",
        "envelope/phase start-up",
        env_err < 0.02 && worst_phase < 1.0,
        format!(
            "envelope 1 error {:.2}% at 24 samples (need < 2%); phase errors at 0.03 s [{}] deg \
             (need < 1)",
            100.0 * env_err,
            phase_errs
                .iter()
                .map(|e| format!("{e:.2}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion_4() -> Verdict {
    let spec = scenarios::distorted();
    let series = synthesize(&spec).unwrap();
    let config = PipelineConfig::new(DISTORTED_ORDERS.to_vec());
    let at = (0.6 * RATE).round() as usize - 1;
    let mut amps = Vec::new();
    let mut final_amps = Vec::new();
    run_observed(&series, &config, |i, p| {
        if i == at || i + 1 == series.len() {
            let per = p.amplitudes().unwrap();
            let (pooled, _) = flicker_core::pipeline::pool_amplitudes(&per);
            if i == at {
                amps = pooled;
            } else {
                final_amps = pooled;
            }
        }
    })
    .unwrap();
    let rel = |a: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(IEC_UNITY_AMPLITUDES)
            .map(|(e, t)| (e - t).abs() / t)
            .collect()
    };
    let errs = rel(&amps);
    let ok = errs.iter().filter(|&&e| e < 0.05).count();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let final_ok = rel(&final_amps).iter().filter(|&&e| e < 0.05).count();
    verdict(
        "4",
        "full flicker recovery by 0.6 s",
        ok == GRID_LEN,
        format!(
            "{ok}/36 bins within 5% at 0.6 s, worst {:.0}%; after the full 6 s: {final_ok}/36",
            100.0 * worst
        ),
    )
}

fn criterion_5() -> Verdict {
    let mc = MonteCarloSpec::new(scenarios::distorted(), 100, SEED);
    let results = monte_carlo(&mc, &PipelineConfig::new(DISTORTED_ORDERS.to_vec())).unwrap();
    let failed = results.iter().filter(|r| r.failure.is_some()).count();
    let errs: Vec<f64> = results
        .iter()
        .filter(|r| !r.s_error_absolute)
        .filter_map(|r| r.s_error_pct)
        .collect();
    let below = errs.iter().filter(|&&e| e < 0.25).count();
    let mean = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
    let max = errs.iter().cloned().fold(0.0, f64::max);
    verdict(
        "5",
        "Monte Carlo S error",
        failed == 0 && errs.len() == 100 && below == 100 && mean < 0.5,
        format!(
            "{below}/100 runs below 0.25% (need all); mean {mean:.2}% (need < 0.5%), max \
             {max:.2}%; {failed} failed runs"
        ),
    )
}

fn criterion_6() -> Verdict {
    let spec = scenarios::distorted();
    let series = synthesize(&spec).unwrap();
    let mean_error = |mode: FrequencyMode| -> Result<f64, String> {
        let mut config = PipelineConfig::new(DISTORTED_ORDERS.to_vec());
        config.frequency_mode = mode;
        let est = estimate(&series, &config, RunOptions::default()).map_err(|e| e.to_string())?;
        Ok(truth_errors(&est, &spec)
            .map_err(|e| e.to_string())?
            .envelope_1
            .mean)
    };
    let base = mean_error(FrequencyMode::Tracked);
    let plus = mean_error(FrequencyMode::TrackedWithOffset(0.5));
    let minus = mean_error(FrequencyMode::TrackedWithOffset(-0.5));
    match (base, plus, minus) {
        (Ok(b), Ok(p), Ok(m)) => {
            let ratio = p.abs().max(m.abs()) / b.abs();
            verdict(
                "6",
                "frequency-deviation robustness",
                ratio <= 100.0,
                format!(
                    "envelope-1 mean error {b:.3e} nominal, {p:.3e} at +0.5 Hz, {m:.3e} at -0.5 Hz; \
                     worst degradation {ratio:.1}x (limit 100x); no feasibility failure"
                ),
            )
        }
        (b, p, m) => verdict(
            "6",
            "frequency-deviation robustness",
            false,
            format!("run failed: nominal {b:?}, +0.5 Hz {p:?}, -0.5 Hz {m:?}"),
        ),
    }
}

fn criterion_7() -> Verdict {
    let spec = scenarios::distorted();
    let series = synthesize(&spec).unwrap();
    let config = PipelineConfig::new(DISTORTED_ORDERS.to_vec());
    let report = compare(&series, &config, &BaselineConfig::default(), Some(&spec)).unwrap();
    let hefs = report.hefs.reconstruction_1.unwrap().mse;
    let fft = report.fft.reconstruction_1.unwrap().mse;
    verdict(
        "7",
        "baseline ordering",
        hefs < fft,
        format!(
            "final-2 s envelope reconstruction MSE: estimator {hefs:.3e}, FFT baseline {fft:.3e}"
        ),
    )
}

fn least_squares(rows: &[Vec<f64>], z: &[f64]) -> DVector<f64> {
    let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    a.svd(true, true)
        .solve(&DVector::from_column_slice(z), 1e-12)
        .unwrap()
}

fn criterion_8() -> Verdict {
    // (a) H-infinity state vs batch least squares, noiseless and flicker-free
    let mut spec = scenarios::distorted();
    spec.flickers.clear();
    spec.noise.sigma = 0.0;
    spec.sampling.duration = 2.0;
    let series = synthesize(&spec).unwrap();
    let cfg = HinfConfig::new(DISTORTED_ORDERS.to_vec());
    let mut state = HinfState::new(&cfg).unwrap();
    let mut rows = Vec::new();
    for (k, &z) in series.samples.iter().enumerate() {
        let h = structure_row(k as i64, 50.0, TAU_S, &DISTORTED_ORDERS);
        state.step(&cfg, z, &h).unwrap();
        rows.push(h);
    }
    let ls = least_squares(&rows, &series.samples);
    let hinf_dev = state
        .x_hat
        .iter()
        .zip(ls.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // (b) ADALINE weights vs batch least squares on a stationary grid envelope
    let env_spec = scenarios::distorted();
    let acfg = AdalineConfig::default();
    let mut unit = AdalineState::new(&acfg).unwrap();
    let n = 72_000;
    let mut basis_rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for k in 0..n as i64 {
        let x = basis_vector(k, TAU_S);
        let target = env_spec.envelope(0, k);
        unit.update(&acfg, target, &x).unwrap();
        // the second input is identically zero; drop it from the regression
        basis_rows.push(
            x.iter()
                .enumerate()
                .filter(|(j, _)| *j != 1)
                .map(|(_, v)| *v)
                .collect(),
        );
        targets.push(target);
    }
    let lsw = least_squares(&basis_rows, &targets);
    let w: Vec<f64> = unit
        .weights
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != 1)
        .map(|(_, v)| *v)
        .collect();
    let adaline_dev = w
        .iter()
        .zip(lsw.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // (c) Goertzel vs direct summation at every grid frequency
    let x = synthesize(&scenarios::distorted()).unwrap().samples[..2400].to_vec();
    let mut goertzel_dev: f64 = 0.0;
    for &f in IEC_FREQUENCIES.iter().chain([50.0, 150.0].iter()) {
        let (gr, gi) = goertzel(&x, f, RATE);
        let (mut nr, mut ni) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let a = std::f64::consts::TAU * f * j as f64 / RATE;
            nr += v * a.cos();
            ni -= v * a.sin();
        }
        let rel = ((gr - nr).hypot(gi - ni)) / nr.hypot(ni);
        goertzel_dev = goertzel_dev.max(rel);
    }
    verdict(
        "8",
        "oracle equivalence",
        hinf_dev < 1e-6 && adaline_dev < 1e-3 && goertzel_dev < 1e-9,
        format!(
            "(a) H-inf vs LS max {hinf_dev:.1e} (< 1e-6); (b) ADALINE vs LS max {adaline_dev:.1e} \
             (< 1e-3); (c) Goertzel vs DFT max rel {goertzel_dev:.1e} (< 1e-9)"
        ),
    )
}

fn covariance_steps(cfg: &HinfConfig, spec: &WaveformSpec, steps: usize) -> Result<usize, String> {
    let series = synthesize(spec).unwrap();
    let mut state = HinfState::new(cfg).map_err(|e| e.to_string())?;
    for k in 0..steps {
        let h = structure_row(k as i64, 50.0, TAU_S, &cfg.harmonic_orders);
        state
            .step(cfg, series.samples[k % series.len()], &h)
            .map_err(|e| e.to_string())?;
    }
    Ok(steps)
}

fn criterion_9() -> Verdict {
    let spec = scenarios::distorted();
    let literal = covariance_steps(
        &HinfConfig::table2(DISTORTED_ORDERS.to_vec()),
        &spec,
        10_000,
    );
    let tracking = covariance_steps(&HinfConfig::new(DISTORTED_ORDERS.to_vec()), &spec, 10_000);

    let mut min_denominator = f64::INFINITY;
    let mut lambdas = Vec::new();
    for cfg in [AdalineConfig::default(), AdalineConfig::table2()] {
        lambdas.push(cfg.regularizer);
        let mut unit = AdalineState::new(&cfg).unwrap();
        for k in 0..2400 {
            let d = unit
                .update(&cfg, spec.envelope(0, k), &basis_vector(k, TAU_S))
                .unwrap_or(f64::NAN);
            min_denominator = min_denominator.min(d - cfg.regularizer);
        }
    }
    let denominators_ok = min_denominator >= 0.0;

    let rates_ok = [AdalineConfig::default(), AdalineConfig::table2()]
        .iter()
        .all(|cfg| (0..100_000u64).all(|k| learning_rate(k + 1, cfg) < learning_rate(k, cfg)));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut homogeneity: f64 = 0.0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..GRID_LEN).map(|_| rng.random_range(0.0..0.02)).collect();
        let c: f64 = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
        let s = sensation(&a).unwrap().total;
        let sc = sensation(&scaled).unwrap().total;
        homogeneity = homogeneity.max((sc - c * s).abs() / (c * s));
    }

    let literal_ok = literal.is_ok();
    verdict(
        "9",
        "numeric invariants",
        literal_ok && denominators_ok && rates_ok && homogeneity <= 1e-12,
        format!(
            "covariance PD for 10000 steps at the literal parameter table: {}; (tracking \
             defaults: {}); denominator - lambda min {min_denominator:.3e} (>= 0); learning rate \
             strictly decreasing: {rates_ok}; homogeneity max rel dev {homogeneity:.1e} (<= 1e-12)",
            literal.map_or_else(|e| format!("no ({e})"), |n| format!("yes ({n} steps)")),
            tracking.map_or_else(|e| format!("no ({e})"), |n| format!("PD for {n} steps")),
        ),
    )
}

fn criterion_10(dir: &Path) -> Verdict {
    let spec_path = dir.join("template.json");
    let config_path = dir.join("config.json");
    let spec_doc = WaveformDoc::from_spec(&scenarios::distorted());
    std::fs::write(&spec_path, serde_json::to_vec_pretty(&spec_doc).unwrap()).unwrap();
    let config_doc = PipelineDoc::new(DISTORTED_ORDERS.to_vec());
    std::fs::write(
        &config_path,
        serde_json::to_vec_pretty(&config_doc).unwrap(),
    )
    .unwrap();
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_flicker"))
            .args(["mc", "--spec"])
            .arg(&spec_path)
            .arg("--config")
            .arg(&config_path)
            .args(["--runs", "100", "--seed", "42", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("exit status {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    match (run("first.csv"), run("second.csv")) {
        (Ok(a), Ok(b)) => {
            let rows = a.iter().filter(|&&c| c == b'\n').count().saturating_sub(1);
            verdict(
                "10",
                "determinism",
                a == b,
                format!(
                    "two `mc --runs 100 --seed 42` runs: {} bytes vs {} bytes, {rows} rows, {}",
                    a.len(),
                    b.len(),
                    if a == b {
                        "byte-identical"
                    } else {
                        "DIFFERENT"
                    }
                ),
            )
        }
        (a, b) => verdict(
            "10",
            "determinism",
            false,
            format!("mc failed: {:?} / {:?}", a.err(), b.err()),
        ),
    }
}

fn main() -> ExitCode {
    // `cargo test -- <filter>` style arguments are accepted and ignored.
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let singles = single_flicker_runs();
    let checks: Vec<Box<dyn Fn() -> Verdict>> = vec![
        Box::new(|| criterion_1(&singles)),
        Box::new(|| criterion_2(&singles)),
        Box::new(criterion_3),
        Box::new(criterion_4),
        Box::new(criterion_5),
        Box::new(criterion_6),
        Box::new(criterion_7),
        Box::new(criterion_8),
        Box::new(criterion_9),
        Box::new(|| criterion_10(dir.path())),
    ];
    let mut failed = 0;
    println!("acceptance criteria");
    for check in &checks {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        checks.len() - failed,
        checks.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
