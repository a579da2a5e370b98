//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use equalab::adapt::{self, AdaptParams, AdaptView, Algorithm};
use equalab::dsp::{self, DelayLine, TapWeights};
use equalab::experiment::{run_experiment, ExperimentConfig};
use equalab::metrics::{self, BitErrors};
use equalab::Symbol;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const PAPER_SPEEDUP: f64 = 6.2;
const PAPER_MSE_RATIO: f64 = 5.6 / 2.3;
const MIN_SPEEDUP: f64 = 1.5;
const RUNTIME_BUDGET_S: f64 = 30.0;
const FIR_TOL: f64 = 1e-12;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_run() -> Result<(equalab::RunRecord, f64), String> {
    let start = Instant::now();
    let rec = run_experiment(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    Ok((rec, start.elapsed().as_secs_f64()))
}

fn convergence_speed() -> Outcome {
    let (rec, secs) = default_run()?;
    let conv = |a| rec.report.get(a).and_then(|s| s.convergence_iter);
    let (c, i) = (conv(Algorithm::Conventional), conv(Algorithm::Improved));
    let sp = rec.report.speedup;
    let detail = format!(
        "conv_iter lms={c:?} ilms={i:?} speedup={} (required >= {MIN_SPEEDUP}, reported up to {PAPER_SPEEDUP}), {secs:.2}s",
        sp.map_or("n/a".into(), |s| format!("{s:.3}"))
    );
    let ordered = matches!((c, i), (Some(c), Some(i)) if i < c);
    check(
        ordered && sp.is_some_and(|s| s >= MIN_SPEEDUP) && secs < RUNTIME_BUDGET_S,
        detail,
    )
}

fn steady_state_ordering() -> Outcome {
    let (rec, _) = default_run()?;
    let ss = |a| {
        rec.report
            .get(a)
            .map(|s| s.steady_state_mse)
            .unwrap_or(f64::NAN)
    };
    let (c, i) = (ss(Algorithm::Conventional), ss(Algorithm::Improved));
    check(
        i <= c,
        format!(
            "steady_state lms={c:.6} ilms={i:.6} ratio lms/ilms={:.3} (reported {PAPER_MSE_RATIO:.3}, not asserted)",
            c / i
        ),
    )
}

fn fir_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let l = rng.gen_range(1..=16);
        let n = rng.gen_range(1..=256);
        let h: Vec<f64> = (0..l).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let got =
            dsp::filter(&TapWeights::new(h.clone()).unwrap(), &x).map_err(|e| e.to_string())?;
        for (k, g) in got.iter().enumerate() {
            let want: f64 = (0..=k.min(l - 1)).map(|j| h[j] * x[k - j]).sum();
            worst = worst.max((g - want).abs());
        }
    }
    check(
        worst <= FIR_TOL,
        format!("100 cases, max |dev| = {worst:.3e} (tol {FIR_TOL:e})"),
    )
}

fn hand_lms_step() -> Outcome {
    let params = AdaptParams::new(0.1).unwrap();
    let x = DelayLine::from_samples(vec![1.0, -1.0]).unwrap();
    let run = |algo| {
        let mut ff = TapWeights::zeros(2);
        let mut fb = TapWeights::zeros(0);
        let view = AdaptView {
            ff_weights: &mut ff,
            fb_weights: &mut fb,
            ff_line: &x,
            fb_line: &DelayLine::new(0),
        };
        adapt::adapt(algo, &params, view, 1.0, 0.0).unwrap();
        ff.into_vec()
    };
    let lms = run(Algorithm::Conventional);
    let ilms = run(Algorithm::Improved);
    check(
        lms == vec![0.1, -0.1] && ilms == lms,
        format!("lms={lms:?} ilms={ilms:?}"),
    )
}

fn zero_error_fixed_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bad = 0;
    for _ in 0..1000 {
        let nf = rng.gen_range(1..=16);
        let nb = rng.gen_range(0..=8);
        let mut vec = |n: usize, r: f64| (0..n).map(|_| rng.gen_range(-r..r)).collect::<Vec<f64>>();
        let (wf0, wb0) = (vec(nf, 2.0), vec(nb, 2.0));
        let xf = DelayLine::from_samples(vec(nf, 3.0)).unwrap();
        let xb = DelayLine::from_samples(vec(nb, 1.0)).unwrap();
        let e_prev = rng.gen_range(-3.0..3.0);
        let mu = rng.gen_range(1e-4..1.0);
        for algo in [Algorithm::Conventional, Algorithm::Improved] {
            let mut wf = TapWeights::new(wf0.clone()).unwrap();
            let mut wb = if nb == 0 {
                TapWeights::zeros(0)
            } else {
                TapWeights::new(wb0.clone()).unwrap()
            };
            let view = AdaptView {
                ff_weights: &mut wf,
                fb_weights: &mut wb,
                ff_line: &xf,
                fb_line: &xb,
            };
            adapt::adapt(algo, &AdaptParams::new(mu).unwrap(), view, 0.0, e_prev).unwrap();
            let same =
                |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
            if !same(wf.as_slice(), &wf0) || !same(wb.as_slice(), &wb0) {
                bad += 1;
            }
        }
    }
    check(bad == 0, format!("1000 states x 2 rules, {bad} changed"))
}

fn noiseless_recovery() -> Outcome {
    let cfg = ExperimentConfig {
        channel: vec![0.407, 0.815, 0.407],
        snr_db: None,
        n_symbols: 5000,
        mode: equalab::Mode::Trained,
        training_len: 500,
        ber_skip_frac: 0.2,
        ..Default::default()
    };
    let rec = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let line: Vec<String> = rec
        .report
        .algos
        .iter()
        .map(|a| {
            format!(
                "{} ber={} ({} of {})",
                a.algo, a.ber, a.bit_errors.errors, a.bit_errors.compared
            )
        })
        .collect();
    check(
        rec.report.algos.len() == 2 && rec.report.algos.iter().all(|a| a.bit_errors.errors == 0),
        line.join(", "),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = dir.path().join("exp.cfg");
    fs::write(&cfg_path, "n_symbols=2000\nseeds=16\nsnr_db=18\n").map_err(|e| e.to_string())?;
    let run = |tag: &str, serial: bool| -> Result<(Vec<u8>, Vec<u8>), String> {
        let curves = dir.path().join(format!("{tag}.csv"));
        let summary = dir.path().join(format!("{tag}.txt"));
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_equalab"));
        cmd.arg("run")
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out-curves")
            .arg(&curves)
            .arg("--out-summary")
            .arg(&summary);
        if serial {
            cmd.arg("--serial");
        }
        let status = cmd.status().map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{tag}: exit {status}"));
        }
        Ok((
            fs::read(curves).map_err(|e| e.to_string())?,
            fs::read(summary).map_err(|e| e.to_string())?,
        ))
    };
    let a = run("a", false)?;
    let b = run("b", false)?;
    let c = run("c", true)?;
    check(
        a == b && a == c,
        format!(
            "parallel x2 + serial: csv {} bytes, summary {} bytes",
            a.0.len(),
            a.1.len()
        ),
    )
}

fn metrics_suite() -> Outcome {
    let mut failures: Vec<&str> = Vec::new();
    let mut expect = |name, ok: bool| {
        if !ok {
            failures.push(name);
        }
    };
    let c = [0.3, 1.7, 0.0, 4.2];
    expect("smooth W=1", metrics::smooth(&c, 1).unwrap() == c.to_vec());
    expect(
        "smooth constant",
        metrics::smooth(&[0.7; 10], 3).unwrap() == vec![0.7; 8],
    );
    expect(
        "smooth [4,0,2]",
        metrics::smooth(&[4.0, 0.0, 2.0], 2).unwrap() == vec![2.0, 1.0],
    );
    expect("smooth W>len", metrics::smooth(&c, 5).is_err());

    let dec: Vec<f64> = (0..30).map(|i| 30.0 - i as f64).collect();
    expect(
        "conv monotone",
        metrics::convergence_iteration(&dec, 5.0, 2.0, 4) == Some(20),
    );
    let up: Vec<f64> = (0..30).map(|i| i as f64 + 1.0).collect();
    expect(
        "conv diverging",
        metrics::convergence_iteration(&up, 0.5, 1.5, 3).is_none(),
    );
    let sm = metrics::smooth(&[9.0, 9.0, 1.0, 1.0, 1.0, 1.0], 2).unwrap();
    expect(
        "conv synthetic",
        metrics::convergence_iteration(&sm, 1.0, 1.1, 2) == Some(2),
    );

    expect(
        "ss constant",
        metrics::steady_state_mse(&[0.3; 7], 0.4).unwrap() == 0.3,
    );
    expect(
        "ss f=1",
        metrics::steady_state_mse(&[1.0, 2.0, 6.0], 1.0).unwrap() == 3.0,
    );
    expect(
        "ss [4,4,0,0]",
        metrics::steady_state_mse(&[4.0, 4.0, 0.0, 0.0], 0.5).unwrap() == 0.0,
    );
    expect("ss empty", metrics::steady_state_mse(&[], 0.5).is_err());

    expect(
        "speedup 620/100",
        metrics::speedup(Some(620), Some(100)).is_some_and(|s| (s - 6.2).abs() < 1e-15),
    );
    expect(
        "speedup equal",
        metrics::speedup(Some(123), Some(123)) == Some(1.0),
    );
    expect(
        "speedup 300/120",
        metrics::speedup(Some(300), Some(120)) == Some(2.5),
    );
    expect("speedup absent", metrics::speedup(None, Some(1)).is_none());

    let tx: Vec<Symbol> = (0..1003)
        .map(|i| {
            if (i * 7) % 5 < 2 {
                Symbol::Plus
            } else {
                Symbol::Minus
            }
        })
        .collect();
    let d = 3;
    let mut aligned = vec![Symbol::Plus; tx.len()];
    aligned[d..].copy_from_slice(&tx[..tx.len() - d]);
    expect(
        "ber zero",
        metrics::ber(&aligned, &tx, d, 3).unwrap() == 0.0,
    );
    let flipped: Vec<Symbol> = aligned.iter().map(|s| s.flipped()).collect();
    expect("ber one", metrics::ber(&flipped, &tx, d, 3).unwrap() == 1.0);
    for n in [10, 400, 900] {
        aligned[n] = aligned[n].flipped();
    }
    expect(
        "ber 3/1000",
        metrics::bit_errors(&aligned, &tx, d, 3).unwrap()
            == BitErrors {
                errors: 3,
                compared: 1000,
            }
            && metrics::ber(&aligned, &tx, d, 3).unwrap() == 0.003,
    );
    expect(
        "ber out of range",
        metrics::ber(&aligned, &tx, 5, 2).is_err(),
    );

    check(
        failures.is_empty(),
        if failures.is_empty() {
            "20 examples".into()
        } else {
            format!("failed: {failures:?}")
        },
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1 convergence-speed ordering", convergence_speed),
        ("C2 steady-state ordering", steady_state_ordering),
        ("C3 FIR oracle equivalence", fir_oracle),
        ("C4 hand-computed LMS step", hand_lms_step),
        ("C5 zero-error fixed point", zero_error_fixed_point),
        ("C6 noiseless recovery", noiseless_recovery),
        ("C7 determinism", determinism),
        ("C8 metrics unit suite", metrics_suite),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
