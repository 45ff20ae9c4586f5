// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end acceptance checks. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed.

mod common;

use std::time::Instant;

use lopart::cv::{run_cv, Baseline, CvConfig};
use lopart::io::segments_to_csv;
use lopart::oracle::brute_force_solve;
use lopart::penalty::{
    bic_penalty, fit_linear2, penalty_grid, predict_penalty, squared_hinge_gradient, squared_hinge_loss, HingeOptions,
    PenaltyModel, TargetInterval,
};
use lopart::simbench::{fit_slope, run_benchmark, synthetic_corpus, BenchConfig, LabelScheme};
use lopart::solver::lopart_traced;
use lopart::{lopart, lopart_infinite, opart, total_errors, Algorithm, LabelSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let lambdas = [0.0, 0.5, 1.0, 10.0, 1e3];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut compared = 0;
    for i in 0..200 {
        let (seq, labels) = common::instance(&mut rng, 3..=12, 3);
        let empty = LabelSet::empty(seq.len());
        for &lambda in &lambdas {
            let bf = brute_force_solve(&seq, &labels, lambda).map_err(|e| e.to_string())?;
            let dp = lopart(&seq, &labels, lambda).map_err(|e| e.to_string())?;
            check(common::rel_close(dp.cost, bf.cost, 1e-9) && dp.changepoints == bf.changepoints, || {
                format!("instance {i} λ={lambda}: lopart {:?}/{} vs oracle {:?}/{}", dp.changepoints, dp.cost, bf.changepoints, bf.cost)
            })?;
            let bf = brute_force_solve(&seq, &empty, lambda).map_err(|e| e.to_string())?;
            let dp = opart(&seq, lambda).map_err(|e| e.to_string())?;
            check(common::rel_close(dp.cost, bf.cost, 1e-9) && dp.changepoints == bf.changepoints, || {
                format!("instance {i} λ={lambda}: opart {:?}/{} vs oracle {:?}/{}", dp.changepoints, dp.cost, bf.changepoints, bf.cost)
            })?;
            compared += 2;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{compared} solves matched in {secs:.2} s"))
}

fn zero_train_errors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for i in 0..500 {
        let (seq, labels) = common::instance(&mut rng, 2..=400, 20);
        for lambda in [0.0, 1.0, 10.0] {
            let fit = lopart(&seq, &labels, lambda).map_err(|e| e.to_string())?;
            let c = total_errors(&labels, &fit.changepoints);
            check(c.errors() == 0, || format!("instance {i} λ={lambda}: {c:?}"))?;
        }
        let fit = lopart_infinite(&seq, &labels).map_err(|e| e.to_string())?;
        let c = total_errors(&labels, &fit.changepoints);
        check(c.errors() == 0, || format!("instance {i} λ=inf: {c:?}"))?;
    }
    Ok("500 instances x 4 penalties, no label errors".into())
}

fn no_label_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for i in 0..100 {
        let (seq, _) = common::instance(&mut rng, 1..=300, 0);
        let lambda = [0.0, 0.1, 1.0, 10.0, 100.0][i % 5];
        let a = lopart(&seq, &LabelSet::empty(seq.len()), lambda).map_err(|e| e.to_string())?;
        let b = opart(&seq, lambda).map_err(|e| e.to_string())?;
        let same = a == b && a.cost.to_bits() == b.cost.to_bits() && segments_to_csv(&a, 17) == segments_to_csv(&b, 17);
        check(same, || format!("instance {i} differs"))?;
    }
    Ok("100 instances byte-identical".into())
}

fn infinite_penalty_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for i in 0..300 {
        let (seq, labels) = common::instance(&mut rng, 2..=300, 15);
        let fit = lopart_infinite(&seq, &labels).map_err(|e| e.to_string())?;
        check(fit.changepoints.len() == labels.positive_count(), || {
            format!("instance {i}: {} changes for {} positive labels", fit.changepoints.len(), labels.positive_count())
        })?;
        for l in labels.iter().filter(|l| l.is_positive()) {
            let inside = fit.changepoints.iter().filter(|c| l.change_positions().contains(c)).count();
            check(inside == 1, || format!("instance {i}: label {l:?} holds {inside} changes"))?;
        }
    }
    Ok("300 instances, one change per positive label and none elsewhere".into())
}

fn candidate_set_fixture() -> Outcome {
    let labels = LabelSet::validate([(45i64, 55i64, 1i64), (80, 90, 0)], 100).map_err(|e| e.to_string())?;
    let seq = common::random_data(&mut ChaCha8Rng::seed_from_u64(5), 100);
    let state = lopart_traced(&seq, &labels, 1.0).map_err(|e| e.to_string())?;
    let expected: Vec<usize> = (45..=79).chain(90..=99).collect();
    check(state.candidates == expected, || format!("T_100 = {:?}", state.candidates))?;
    Ok("T_100 = {45..79} ∪ {90..99}".into())
}

fn opart_monotonicity() -> Outcome {
    let grid = penalty_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..50 {
        let (seq, _) = common::instance(&mut rng, 2..=300, 0);
        let counts = grid
            .iter()
            .map(|&l| opart(&seq, l).map(|f| f.changepoints.len()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        check(counts.windows(2).all(|w| w[1] <= w[0]), || format!("instance {i}: {counts:?}"))?;
    }
    Ok("50 instances over the 21-point grid".into())
}

fn timing_shape() -> Outcome {
    let started = Instant::now();
    let bench = |n_values: Vec<usize>, ratio: f64, algorithms: Vec<Algorithm>| {
        run_benchmark(&BenchConfig {
            n_values,
            scheme: LabelScheme::Density { ratio },
            algorithms,
            repeats: 5,
            seed: 11,
            min_sample_seconds: 0.05,
        })
        .map_err(|e| e.to_string())
    };
    let lopart_rows = bench(vec![1_000, 10_000, 100_000], 0.1, vec![Algorithm::Lopart])?;
    let lopart_slope = fit_slope(&lopart_rows, Algorithm::Lopart).map_err(|e| e.to_string())?;
    let opart_rows = bench(vec![1_000, 3_000, 10_000], 0.0, vec![Algorithm::Opart])?;
    let opart_slope = fit_slope(&opart_rows, Algorithm::Opart).map_err(|e| e.to_string())?;
    let both = bench(vec![10_000], 0.0, vec![Algorithm::Opart, Algorithm::Lopart])?;
    let median = |a: Algorithm| both.iter().find(|r| r.algorithm == a).map(|r| r.median_seconds).unwrap();
    let ratio = median(Algorithm::Lopart) / median(Algorithm::Opart);
    let secs = started.elapsed().as_secs_f64();
    let summary = format!(
        "lopart slope {lopart_slope:.3}, opart slope {opart_slope:.3}, unlabeled lopart/opart {ratio:.2}, {secs:.1} s"
    );
    check((0.8..=1.4).contains(&lopart_slope), || format!("lopart slope out of range: {summary}"))?;
    check((1.7..=2.3).contains(&opart_slope), || format!("opart slope out of range: {summary}"))?;
    check(ratio <= 2.0, || format!("lopart too slow without labels: {summary}"))?;
    check(secs < 600.0, || format!("over budget: {summary}"))?;
    Ok(summary)
}

fn penalty_learning() -> Outcome {
    check(bic_penalty(39).map_err(|e| e.to_string())? == 39f64.ln(), || "bic(39) != ln 39".into())?;
    let identity = PenaltyModel::Linear2 { w: 1.0, b: 0.0 };
    for n in 10..=100_000usize {
        let a = predict_penalty(&identity, n).map_err(|e| e.to_string())?;
        let b = bic_penalty(n).map_err(|e| e.to_string())?;
        check(a == b, || format!("n={n}: linear2(1,0) = {a} but bic = {b}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let problem = |rng: &mut ChaCha8Rng| {
        let k = rng.random_range(3..12);
        let features: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..2.5)).collect();
        let intervals: Vec<TargetInterval> = (0..k)
            .map(|_| {
                let lo = rng.random_range(-4.0..4.0);
                let hi = lo + rng.random_range(0.5..5.0);
                match rng.random_range(0..4) {
                    0 => TargetInterval { lo: f64::NEG_INFINITY, hi },
                    1 => TargetInterval { lo, hi: f64::INFINITY },
                    _ => TargetInterval { lo, hi },
                }
            })
            .collect();
        (features, intervals)
    };
    for i in 0..20 {
        let (x, iv) = problem(&mut rng);
        let (w, b) = (rng.random_range(-3.0..3.0), rng.random_range(-5.0..5.0));
        let (gw, gb) = squared_hinge_gradient(w, b, &x, &iv, 1.0);
        let h = 1e-5;
        let nw = (squared_hinge_loss(w + h, b, &x, &iv, 1.0) - squared_hinge_loss(w - h, b, &x, &iv, 1.0)) / (2.0 * h);
        let nb = (squared_hinge_loss(w, b + h, &x, &iv, 1.0) - squared_hinge_loss(w, b - h, &x, &iv, 1.0)) / (2.0 * h);
        for (a, n) in [(gw, nw), (gb, nb)] {
            check((a - n).abs() <= 1e-4 * a.abs().max(n.abs()).max(1e-8), || {
                format!("point {i} ({w}, {b}): analytic {a} vs numeric {n}")
            })?;
        }
    }
    for i in 0..20 {
        let (x, iv) = problem(&mut rng);
        let fit = fit_linear2(&x, &iv, &HingeOptions::default()).map_err(|e| e.to_string())?;
        check(fit.loss_history.windows(2).all(|p| p[1] <= p[0]), || format!("problem {i}: loss increased"))?;
    }
    Ok("bic exact, linear2(1,0) = bic on 10..1e5, 20 gradients, 20 descents".into())
}

fn cv_pipeline() -> Outcome {
    let corpus = synthetic_corpus(20, 200, 4, 2024).map_err(|e| e.to_string())?;
    let config = CvConfig::default();
    let first = run_cv(&corpus, &config).map_err(|e| e.to_string())?;
    let single_thread = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?
        .install(|| run_cv(&corpus, &config))
        .map_err(|e| e.to_string())?;
    check(first.to_csv(6) == single_thread.to_csv(6), || "report differs between runs".into())?;
    check(first.roc_to_csv(6) == single_thread.roc_to_csv(6), || "ROC differs between runs".into())?;
    for row in &first.rows {
        if row.algorithm == Baseline::Lopart {
            check(row.train.errors() == 0, || format!("lopart train errors in {row:?}"))?;
        }
        if row.algorithm == Baseline::Segannot {
            check(row.test.fp == 0, || format!("segannot test fp in {row:?}"))?;
        }
    }
    Ok(format!("{} rows, deterministic", first.rows.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("zero train errors", zero_train_errors),
        ("no-label equivalence", no_label_equivalence),
        ("infinite penalty contract", infinite_penalty_contract),
        ("candidate-set fixture", candidate_set_fixture),
        ("opart monotonicity", opart_monotonicity),
        ("timing shape", timing_shape),
        ("penalty learning", penalty_learning),
        ("cv pipeline", cv_pipeline),
    ];
    // libtest-style filtering so `cargo test <name>` still works.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
