//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{brute_force_throughput, rel_err, skellam_by_convolution, system_with_users};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_twoway::cli::{run_sweep, ConfigChoice, SweepSpec};
use uav_twoway::montecarlo::{simulate, Activation, ActivationModel, DistanceModel, SimOptions};
use uav_twoway::pairing::{pair_counts, schedule_frame};
use uav_twoway::throughput::skellam_pmf;
use uav_twoway::{average_throughput, optimal_configuration, AccountingMode, Configuration, LoadDistribution, System};

type Outcome = Result<String, String>;

const MODE: AccountingMode = AccountingMode::Consistent;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn total(cfg: &Configuration, l1: f64, l2: f64, sys: &System) -> f64 {
    average_throughput(cfg, &LoadDistribution::new(l1, l2).unwrap(), sys, MODE).unwrap().total
}

fn constants() -> Outcome {
    let d = *System::defaults().derived();
    let ok = (d.g0 - 2.2846).abs() < 1e-4 && (d.h_low - 58.735).abs() < 1e-3 && (d.h_high - 230.94).abs() < 1e-3;
    check(ok, format!("g0={:.6} H_l={:.4} m H_h={:.4} m", d.g0, d.h_low, d.h_high))
}

fn skellam_oracle() -> Outcome {
    let grid = [0.5, 2.0, 10.0];
    let mut worst = 0.0f64;
    for l1 in grid {
        for l2 in grid {
            for k in -30..=30 {
                worst = worst.max((skellam_pmf(k, l1, l2).unwrap() - skellam_by_convolution(k, l1, l2)).abs());
            }
        }
    }
    let mass: f64 = (-60..=60).map(|k| skellam_pmf(k, 5.0, 5.0).unwrap()).sum();
    check(
        worst <= 1e-10 && (mass - 1.0).abs() <= 1e-12,
        format!("max |err|={worst:.2e}, |mass-1|={:.2e}", (mass - 1.0).abs()),
    )
}

fn regrouping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let sys = system_with_users(n);
        for _ in 0..5 {
            let (l1, l2) = (rng.random_range(0.5..15.0), rng.random_range(0.5..15.0));
            for cfg in Configuration::CANDIDATES {
                let want = brute_force_throughput(&cfg, l1, l2, &sys, MODE);
                worst = worst.max(rel_err(total(&cfg, l1, l2, &sys), want));
            }
        }
    }
    check(worst < 1e-9, format!("N<=6, 5 points each, max rel err={worst:.2e}"))
}

fn pair_conservation() -> Outcome {
    let mut failures = 0;
    for k1 in 0..=30u32 {
        for k2 in 0..=30u32 {
            let k = i64::from(k1) - i64::from(k2);
            let (c1, c2): (Vec<u32>, Vec<u32>) = ((0..k1).collect(), (0..k2).collect());
            for cfg in Configuration::CANDIDATES {
                let c = pair_counts(k, k2, cfg.h1, cfg.h2, MODE).unwrap();
                if 2 * c.a_d + 2 * c.a_s + c.b != k1 + k2 || schedule_frame(&c1, &c2, &cfg).counts() != c {
                    failures += 1;
                }
            }
        }
    }
    let lit = pair_counts(3, 2, Configuration::ETA1.h1, Configuration::ETA1.h2, AccountingMode::PaperLiteral).unwrap();
    let literal_ok = (lit.a_d, lit.a_s, lit.b) == (2, 3, 1);
    check(
        failures == 0 && literal_ok,
        format!("{failures} conservation failures; literal (k=3,K2=2) -> ({},{},{})", lit.a_d, lit.a_s, lit.b),
    )
}

fn qualitative() -> Outcome {
    let sys = System::defaults();
    let best = |l1: f64, l2: f64| optimal_configuration(&LoadDistribution::new(l1, l2).unwrap(), &sys, MODE).unwrap().0;
    let a = [5.0, 10.0, 15.0, 20.0].iter().all(|&l| best(l, l) == Configuration::ETA3);
    let b = best(25.0, 2.0) == Configuration::ETA1;
    let c = best(2.0, 25.0) == Configuration::ETA2;
    let d = [(25.0, 2.0), (10.0, 10.0), (1.5, 7.0), (18.0, 0.4)].iter().all(|&(l1, l2)| {
        total(&Configuration::ETA1, l1, l2, &sys).to_bits() == total(&Configuration::ETA2, l2, l1, &sys).to_bits()
    });
    check(a && b && c && d, format!("equal loads->eta3:{a} (25,2)->eta1:{b} (2,25)->eta2:{c} mirror exact:{d}"))
}

fn grid_spec(n_frames: u64, sim: SimOptions, configs: Vec<ConfigChoice>) -> SweepSpec {
    SweepSpec {
        lambda1: (1..=20).map(f64::from).collect(),
        lambda2: vec![1.0, 5.0, 10.0, 15.0, 20.0],
        configs,
        accounting: MODE,
        n_frames,
        seed: 99,
        sim,
    }
}

fn all_choices() -> Vec<ConfigChoice> {
    let mut v: Vec<ConfigChoice> = Configuration::CANDIDATES.into_iter().map(ConfigChoice::Fixed).collect();
    v.push(ConfigChoice::Optimal);
    v
}

fn dominance() -> Outcome {
    let spec = grid_spec(0, SimOptions::matched(), all_choices());
    let rows = run_sweep(&spec, &System::defaults()).unwrap();
    let violations = rows
        .chunks(4)
        .filter(|g| g[..3].iter().any(|fixed| g[3].throughput < fixed.throughput))
        .count();
    check(violations == 0, format!("{} grid points, {violations} violations", rows.len() / 4))
}

fn consistency() -> Outcome {
    let sys = System::defaults();
    let points = [(10.0, 10.0), (25.0, 2.0), (2.0, 25.0)];
    let mut worst_exhaustive = 0.0f64;
    let mut worst_sigmas = 0.0f64;
    let sampled = SimOptions { activation: Activation::Sampled(ActivationModel::SkellamBinomial), ..SimOptions::matched() };
    for (l1, l2) in points {
        let loads = LoadDistribution::new(l1, l2).unwrap();
        for cfg in Configuration::CANDIDATES {
            let analytic = total(&cfg, l1, l2, &sys);
            let ex = simulate(&cfg, &loads, &sys, 1, 1, &SimOptions::matched()).unwrap();
            worst_exhaustive = worst_exhaustive.max(rel_err(ex.mean, analytic));
            let mc = simulate(&cfg, &loads, &sys, 100_000, 8, &sampled).unwrap();
            worst_sigmas = worst_sigmas.max((mc.mean - analytic).abs() / mc.half_width);
        }
    }
    check(
        worst_exhaustive < 1e-9 && worst_sigmas <= 3.0,
        format!("exhaustive max rel err={worst_exhaustive:.2e}; sampled (1e5 frames) max dev={worst_sigmas:.2} half-widths"),
    )
}

fn bound_dominance() -> Outcome {
    let sys = System::defaults();
    let exact = SimOptions {
        distances: DistanceModel::Exact,
        activation: Activation::Sampled(ActivationModel::SkellamBinomial),
        ..SimOptions::matched()
    };
    let fixed: Vec<ConfigChoice> = Configuration::CANDIDATES.into_iter().map(ConfigChoice::Fixed).collect();
    let rows = run_sweep(&grid_spec(2000, exact, fixed.clone()), &sys).unwrap();
    let below = rows.iter().filter(|r| r.mc.as_ref().unwrap().mean < r.throughput).count();
    let min_ratio = rows.iter().map(|r| r.mc.as_ref().unwrap().mean / r.throughput).fold(f64::INFINITY, f64::min);

    let physical = SimOptions { shadowing: uav_twoway::montecarlo::ShadowingModel::Sampled, ..exact };
    let sampled_rows = run_sweep(&grid_spec(500, physical, fixed), &sys).unwrap();
    let sampled_below = sampled_rows.iter().filter(|r| r.mc.as_ref().unwrap().mean < r.throughput).count();
    check(
        below == 0,
        format!(
            "{} rows, {below} below bound, min ratio={min_ratio:.4}; sampled shadowing (not gated): {sampled_below} below",
            rows.len()
        ),
    )
}

fn determinism() -> Outcome {
    let args = |threads: &str| -> Vec<String> {
        [
            "compare", "--lambda1", "1:20:4", "--lambda2", "1,10,20", "--frames", "200", "--seed", "5",
            "--activation", "binomial", "--distances", "exact", "--shadowing", "sampled", "--random-matching",
            "--threads", threads,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let run = |threads: &str| Command::new(env!("CARGO_BIN_EXE_uav-twoway")).args(args(threads)).output().unwrap();
    let outputs = [run("1"), run("1"), run("3"), run("8")];
    let ok = outputs[0].status.success()
        && !outputs[0].stdout.is_empty()
        && outputs.iter().all(|o| o.stdout == outputs[0].stdout);
    check(ok, format!("4 runs (1,1,3,8 threads), {} bytes each", outputs[0].stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("constants", constants),
        ("skellam oracle equivalence", skellam_oracle),
        ("regrouped sum vs double sum", regrouping),
        ("pair-count conservation", pair_conservation),
        ("qualitative regimes", qualitative),
        ("optimizer dominance", dominance),
        ("model/simulator consistency", consistency),
        ("bound dominance", bound_dominance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
