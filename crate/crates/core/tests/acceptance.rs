//! Acceptance gate. Runs every criterion at its fixed tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use bellsim::experiment::{
    empirical_wigner, no_signaling_test, run_experiment, verification_rate, ExperimentConfig,
    SettingPair, Side,
};
use bellsim::inequality::{derivation_trace, wigner_counts, wigner_quantum, SettingTriple};
use bellsim::lhv::{
    enumerate_product_strategies, enumerate_shared_strategies, filter_perfectly_correlated, par,
    perp, SettingMenu, StrategyCensus,
};
use bellsim::optimize::{local_bound, maximize_violation, quantum_margin};
use bellsim::Angle;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_triple(rng: &mut ChaCha8Rng) -> SettingTriple {
    loop {
        let [a, b, c] = [0; 3].map(|_| rng.random_range(0.0..180.0));
        if let Ok(t) = SettingTriple::from_degrees(a, b, c) {
            return t;
        }
    }
}

fn random_census(rng: &mut ChaCha8Rng, triple: &SettingTriple, max: u64) -> StrategyCensus {
    let menu = SettingMenu::new(vec![triple.a, triple.b, triple.c]).unwrap();
    let counts = (0..8).map(|_| rng.random_range(0..=max)).collect();
    StrategyCensus::from_counts(menu, counts).unwrap()
}

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn ac1_paper_violation() -> Outcome {
    let r = wigner_quantum(&SettingTriple::from_degrees(0.0, 30.0, 60.0).unwrap());
    ensure((r.lhs - 0.5).abs() < 1e-12, || format!("lhs {}", r.lhs))?;
    ensure((r.rhs - 0.75).abs() < 1e-12, || format!("rhs {}", r.rhs))?;
    ensure(r.violated, || "not flagged violated".into())?;
    Ok(format!("lhs {} rhs {}", r.lhs, r.rhs))
}

fn ac2_bell_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0_0002);
    for _ in 0..100 {
        let t = random_triple(&mut rng);
        let b = local_bound(&t).map_err(|e| e.to_string())?;
        ensure(b.max_margin == 0.0, || format!("local margin {} at {t:?}", b.max_margin))?;
        ensure(b.vertices_examined == 8, || format!("{} vertices", b.vertices_examined))?;
    }
    let q = quantum_margin(30.0, 30.0).map_err(|e| e.to_string())?;
    ensure((q - 0.25).abs() < 1e-12, || format!("quantum margin {q}"))?;
    Ok(format!("local max 0 on 100 triples; quantum {q}"))
}

fn ac3_derivation_identities() -> Outcome {
    let triple = SettingTriple::from_degrees(0.0, 30.0, 60.0).unwrap();
    let strategy = (vec(0..=1_000_000u64, 8), 0usize..6, 0.0..180.0f64);
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(counts, perm, offset)| {
            // Random menu orientation and ordering; a, b, c keep their roles.
            let t = triple.rotated(offset);
            let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
            let abc = [t.a, t.b, t.c];
            let menu = SettingMenu::new(order.iter().map(|&i| abc[i]).collect()).unwrap();
            let census = StrategyCensus::from_counts(menu, counts).unwrap();
            let n = |sel: &[_]| census.census_count(sel).unwrap();
            let (a, b, c) = (t.a, t.b, t.c);
            prop_assert_eq!(
                n(&[par(a), par(b), par(c)]) + n(&[perp(a), par(b), par(c)]),
                n(&[par(b), par(c)])
            );
            prop_assert!(n(&[par(a), par(c)]) >= n(&[par(a), par(b), par(c)]));
            prop_assert!(n(&[perp(a), par(b)]) >= n(&[perp(a), par(b), par(c)]));
            let r = wigner_counts(&census, &t).unwrap();
            let residual = n(&[par(a), perp(b), par(c)]) + n(&[perp(a), par(b), perp(c)]);
            prop_assert_eq!(r.lhs as u64 - r.rhs as u64, residual);
            prop_assert!(!r.violated);
            prop_assert!(derivation_trace(&census, &t).unwrap().holds());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("10000 censuses, all identities exact".into())
}

fn ac4_determinism() -> Outcome {
    let menu = SettingMenu::from_degrees(&[0.0, 30.0, 60.0]).unwrap();
    let products = enumerate_product_strategies(&menu);
    ensure(products.len() == 64, || format!("{} product strategies", products.len()))?;
    let survivors = filter_perfectly_correlated(&products, &menu);
    let shared = enumerate_shared_strategies(&menu);
    ensure(survivors == shared, || format!("{} survivors differ from shared set", survivors.len()))?;
    Ok(format!("64 -> {} shared", survivors.len()))
}

fn ac5_monte_carlo() -> Outcome {
    let triple = SettingTriple::from_degrees(0.0, 30.0, 60.0).unwrap();
    let n = 1_000_000;
    let logs = SettingPair::wigner_pairs(&triple)
        .into_iter()
        .enumerate()
        .map(|(i, p)| run_experiment(&ExperimentConfig::quantum(vec![p], n, 500 + i as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let w = empirical_wigner([&logs[0], &logs[1], &logs[2]]).map_err(|e| e.to_string())?;
    // Expected-rate sigmas, not the empirical ones.
    let lhs_band = 4.0 * 2.0 * (sigma(0.125, n).powi(2) * 2.0).sqrt();
    let rhs_band = 4.0 * 2.0 * sigma(0.375, n);
    ensure((w.report.lhs - 0.5).abs() < lhs_band, || format!("lhs {} (band {lhs_band})", w.report.lhs))?;
    ensure((w.report.rhs - 0.75).abs() < rhs_band, || format!("rhs {} (band {rhs_band})", w.report.rhs))?;
    ensure(lhs_band <= 0.0038 && rhs_band <= 0.0039, || "bands wider than stated".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xB0_0005);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let t = random_triple(&mut rng);
        let census = random_census(&mut rng, &t, 1000);
        let cfg = ExperimentConfig::lhv(census, SettingPair::wigner_pairs(&t), 10_000, 9000 + i);
        let log = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let w = bellsim::experiment::empirical_wigner_from_log(&log)
            .expect("wigner pairs")
            .map_err(|e| e.to_string())?;
        let z = if w.margin_sigma > 0.0 { w.report.margin / w.margin_sigma } else { w.report.margin };
        ensure(w.report.margin <= 4.0 * w.margin_sigma, || {
            format!("census {i}: margin {} exceeds 4σ = {}", w.report.margin, 4.0 * w.margin_sigma)
        })?;
        worst = worst.max(z);
    }
    Ok(format!(
        "quantum lhs {:.5} rhs {:.5}; lhv worst margin {worst:.2}σ",
        w.report.lhs, w.report.rhs
    ))
}

fn ac6_timelike_verification() -> Outcome {
    let cfg = ExperimentConfig::quantum(vec![SettingPair::from_degrees(0.0, 0.0).unwrap()], 100_000, 6)
        .timelike(Side::A);
    let log = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let rate = verification_rate(&log).map_err(|e| e.to_string())?;
    ensure(rate == 1.0, || format!("rate {rate}"))?;
    ensure(log.verification_tally() == (100_000, 100_000), || format!("{:?}", log.verification_tally()))?;
    Ok("100000/100000 verified".into())
}

fn ac7_no_signaling() -> Outcome {
    let n = 1_000_000;
    let pairs: Vec<SettingPair> = [0.0, 30.0, 60.0]
        .iter()
        .map(|&a| SettingPair::from_degrees(a, 0.0).unwrap())
        .collect();
    let band = 4.0 * sigma(0.5, n);
    let quantum = run_experiment(&ExperimentConfig::quantum(pairs.clone(), n, 7)).map_err(|e| e.to_string())?;
    let menu = SettingMenu::from_degrees(&[0.0, 30.0, 60.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0_0007);
    let counts: Vec<u64> = (0..8).map(|_| rng.random_range(0..=1000)).collect();
    let census = StrategyCensus::from_counts(menu, counts).unwrap();
    // The census fixes side B's Transmit rate at 0° for every side-A setting.
    let expected_lhv = census.census_count(&[par(Angle::deg(0.0))]).unwrap() as f64 / census.total() as f64;
    let lhv = run_experiment(&ExperimentConfig::lhv(census, pairs, n, 77)).map_err(|e| e.to_string())?;

    let mut detail = Vec::new();
    for (name, log, expected) in [("quantum", &quantum, 0.5), ("lhv", &lhv, expected_lhv)] {
        let rep = no_signaling_test(&log.aggregates).map_err(|e| e.to_string())?;
        for row in &rep.rows {
            ensure((row.local_transmit_rate - expected).abs() < 4.0 * sigma(expected, n), || {
                format!("{name}: B rate {} at A={}", row.local_transmit_rate, row.remote_setting_deg)
            })?;
        }
        ensure(rep.max_deviation < 2.0 * band, || format!("{name}: deviation {}", rep.max_deviation))?;
        detail.push(format!("{name} deviation {:.5}", rep.max_deviation));
    }
    Ok(detail.join("; "))
}

fn oracle_margin(t1: f64, t2: f64) -> f64 {
    let (r1, r2) = (t1.to_radians(), t2.to_radians());
    r2.cos().powi(2) - (r1 + r2).cos().powi(2) - r1.sin().powi(2)
}

fn ac8_optimizer() -> Outcome {
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 1..900 {
        for j in 1..900 {
            let (t1, t2) = (i as f64 / 10.0, j as f64 / 10.0);
            let m = oracle_margin(t1, t2);
            if m > best.2 {
                best = (t1, t2, m);
            }
        }
    }
    let tol = 1e-6;
    let opt = maximize_violation(1.0, tol).map_err(|e| e.to_string())?;
    ensure((opt.theta1_deg - 30.0).abs() < 0.5 && (opt.theta2_deg - 30.0).abs() < 0.5, || {
        format!("optimum at ({}, {})", opt.theta1_deg, opt.theta2_deg)
    })?;
    ensure((opt.margin - 0.25).abs() < 1e-3, || format!("margin {}", opt.margin))?;
    ensure((opt.margin - best.2).abs() < 1e-6, || format!("oracle margin {}", best.2))?;
    ensure(
        (opt.theta1_deg - best.0).abs() < 0.1 && (opt.theta2_deg - best.1).abs() < 0.1,
        || format!("oracle point ({}, {})", best.0, best.1),
    )?;
    ensure(best.2 <= 0.25 + 1e-6, || format!("grid exceeds 0.25: {}", best.2))?;
    Ok(format!(
        "({:.6}, {:.6}) margin {:.9}; oracle ({}, {}) {:.9}",
        opt.theta1_deg, opt.theta2_deg, opt.margin, best.0, best.1, best.2
    ))
}

fn ac9_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let census = dir.path().join("census.json");
    std::fs::write(&census, r#"{"menu_deg":[0,30,60],"counts":{"TTT":3,"TRT":5,"RTR":2,"RRR":7}}"#)
        .map_err(|e| e.to_string())?;
    let census = census.to_str().unwrap().to_string();
    let runs: [&[&str]; 3] = [
        &["--mode", "quantum", "--ordering", "timelike", "--angles", "0,30,60", "--pairs", "20000"],
        &["--mode", "lhv", "--census", &census, "--angles", "0,30,60", "--pairs", "20000"],
        &["--mode", "quantum", "--visibility", "0.8", "--angles", "10,55", "--pairs", "30000"],
    ];
    let mut outputs = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let mut seen: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        for (rep, serial) in [false, false, true].into_iter().enumerate() {
            let log = dir.path().join(format!("log{k}_{rep}.csv"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_bellsim"));
            cmd.arg("simulate").args(*args).args(["--seed", "42", "--log"]).arg(&log);
            if serial {
                cmd.arg("--serial");
            }
            let out = cmd.output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
            seen.push((out.stdout, std::fs::read(&log).map_err(|e| e.to_string())?));
        }
        ensure(seen.windows(2).all(|w| w[0] == w[1]), || format!("run {k} differs between invocations"))?;
        outputs.push(seen.remove(0));
    }
    Ok(format!("{} configurations byte-identical (parallel x2, serial)", outputs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 paper violation, exact", ac1_paper_violation),
        ("AC2 local bound vs quantum margin", ac2_bell_theorem),
        ("AC3 derivation identities", ac3_derivation_identities),
        ("AC4 determinism from perfect correlations", ac4_determinism),
        ("AC5 Monte Carlo fidelity", ac5_monte_carlo),
        ("AC6 time-like verification", ac6_timelike_verification),
        ("AC7 no-signaling", ac7_no_signaling),
        ("AC8 optimizer", ac8_optimizer),
        ("AC9 reproducibility", ac9_reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({secs:.2}s)");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed > 0 {
        std::process::exit(1);
    }
}
