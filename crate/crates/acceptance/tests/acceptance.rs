//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use probe_sizer::bounds::{finite_class_margin, FunctionClassSpec};
use probe_sizer::cli;
use probe_sizer::collapse::Verdict;
use probe_sizer::domain::{
    ClassifierSpec, ComparisonProblem, PairedPredictions, PerformancePair, ProbingConfiguration,
};
use probe_sizer::lab::dataset::{generate_dataset, stratified_subsample, Split, SyntheticDatasetSpec};
use probe_sizer::lab::mdl::{prequential_mdl_with, Coder, UniformCoder};
use probe_sizer::lab::model::{Activation, Probe};
use probe_sizer::lab::study::{
    comparison_predictions, run_case_study, CaseStudyKind, CaseStudyParams, EncoderParams,
};
use probe_sizer::lab::train::TrainerConfig;
use probe_sizer::rng;
use probe_sizer::sizer::{recommend, required_train_size, SizerSettings};
use probe_sizer::stats::{mcnemar_chi2, ContingencyTable, PowerSettings, SamplingMode, ADEQUATE_POWER};
use rand::seq::index;
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// --- 1: worked bound examples ---------------------------------------------

fn worked_examples() -> Outcome {
    let spec = FunctionClassSpec::from_classifier(&ClassifierSpec::logistic_regression(4096, 2).unwrap(), 32).unwrap();
    let t = Instant::now();
    let margin = finite_class_margin(65_536, 1e-8, 1.0, &spec).unwrap();
    let n = required_train_size(0.05, 1e-8, 1.0, &spec).unwrap();
    let elapsed = t.elapsed();
    let rounded = (margin * 1000.0).round() / 1000.0;
    let pass = rounded == 0.039 && (39_000..=41_000).contains(&n) && elapsed < Duration::from_millis(1);
    outcome(pass, format!("margin {margin:.6} -> {rounded}, N(0.05) = {n}, {elapsed:?}"))
}

// --- 2: published sample sizes ------------------------------------------

struct Table {
    name: &'static str,
    dim_a: usize,
    dim_b: usize,
    tolerance: f64,
    rows: &'static [(f64, u64)],
}

const TABLES: [Table; 4] = [
    Table {
        name: "768 linear",
        dim_a: 768,
        dim_b: 768,
        tolerance: 0.01,
        rows: &[(0.1313, 22_263), (0.1281, 23_362), (0.0879, 49_647), (0.1331, 21_662), (0.1488, 17_331)],
    },
    Table {
        name: "768 vs 300 linear",
        dim_a: 768,
        dim_b: 300,
        tolerance: 0.01,
        rows: &[
            (0.0344, 324_563),
            (0.0492, 158_315),
            (0.0355, 303_516),
            (0.0091, 4_600_037),
            (0.0320, 373_513),
        ],
    },
    Table {
        name: "768 vs 4096 linear, set 1",
        dim_a: 768,
        dim_b: 4096,
        tolerance: 0.025,
        rows: &[(0.065, 95_156), (0.128, 24_375), (0.178, 12_481), (0.196, 10_285)],
    },
    Table {
        name: "768 vs 4096 linear, set 2",
        dim_a: 768,
        dim_b: 4096,
        tolerance: 0.025,
        rows: &[
            (0.025, 635_040),
            (0.019, 1_128_961),
            (0.041, 231_499),
            (0.051, 151_861),
            (0.063, 100_153),
        ],
    },
];

fn tables() -> Outcome {
    let t = Instant::now();
    let settings = SizerSettings::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for table in &TABLES {
        let problem = ComparisonProblem::new(
            ProbingConfiguration::new("task", "a", ClassifierSpec::logistic_regression(table.dim_a, 2).unwrap()).unwrap(),
            ProbingConfiguration::new("task", "b", ClassifierSpec::logistic_regression(table.dim_b, 2).unwrap()).unwrap(),
        )
        .unwrap();
        for (i, &(gap, printed)) in table.rows.iter().enumerate() {
            let pilot = [PerformancePair::accuracy(gap, 0.0).unwrap()];
            let n = recommend(&pilot, &problem, &settings, None).unwrap().n_train;
            let err = rel(n as f64, printed as f64);
            worst = worst.max(err);
            if err > table.tolerance {
                failures.push(format!(
                    "{} row {} gap {gap}: {n} vs {printed} ({:+.2}%)",
                    table.name,
                    i + 1,
                    100.0 * (n as f64 - printed as f64) / printed as f64
                ));
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(1);
    let detail = if failures.is_empty() {
        format!("19 rows, worst {:.2}%, {elapsed:?}", 100.0 * worst)
    } else {
        format!("{}; {elapsed:?}", failures.join("; "))
    };
    outcome(pass, detail)
}

// --- 3: McNemar oracle ----------------------------------------------------

fn chi2(n01: u64, n10: u64) -> f64 {
    mcnemar_chi2(&ContingencyTable { n00: 0, n01, n10, n11: 0 })
}

fn significant(n01: u64, n10: u64) -> bool {
    chi2(n01, n10) > 3.841458820694124
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact power of a pool with `plus` B-only, `minus` A-only and `zero`
/// concordant items at subsample size `s`.
fn exact_power(plus: u64, minus: u64, zero: u64, s: u64, replace: bool) -> f64 {
    let m = plus + minus + zero;
    let mut p = 0.0;
    for a in 0..=s {
        for b in 0..=(s - a) {
            let c = s - a - b;
            if !significant(a, b) {
                continue;
            }
            p += if replace {
                let multinomial = binom(s, a) * binom(s - a, b);
                multinomial
                    * (plus as f64 / m as f64).powi(a as i32)
                    * (minus as f64 / m as f64).powi(b as i32)
                    * (zero as f64 / m as f64).powi(c as i32)
            } else {
                binom(plus, a) * binom(minus, b) * binom(zero, c) / binom(m, s)
            };
        }
    }
    p
}

fn mcnemar_oracle() -> Outcome {
    let hand = chi2(15, 5) == 5.0 && chi2(5, 15) == 5.0 && chi2(0, 0) == 0.0 && chi2(3, 0) == 3.0;
    let draws = 10_000;
    let (mut cases, mut worst_z) = (0, 0.0f64);
    let (mut bad, mut rechecked) = (Vec::new(), Vec::new());
    for m in 1..=8u64 {
        for plus in 0..=m {
            for minus in 0..=(m - plus) {
                let zero = m - plus - minus;
                let mut a = Vec::new();
                let mut b = Vec::new();
                for _ in 0..plus {
                    a.push(false);
                    b.push(true);
                }
                for _ in 0..minus {
                    a.push(true);
                    b.push(false);
                }
                for _ in 0..zero {
                    a.push(true);
                    b.push(true);
                }
                let items = (0..m).map(|i| i.to_string()).collect();
                let pred = PairedPredictions::new(items, vec!["0".into()], vec![a], vec![b]).unwrap();
                for s in 1..=m {
                    for sampling in [SamplingMode::Auto, SamplingMode::WithReplacement] {
                        let replace = sampling == SamplingMode::WithReplacement || s == m;
                        if sampling == SamplingMode::WithReplacement && s == m {
                            continue;
                        }
                        let exact = exact_power(plus, minus, zero, s, replace);
                        let seed = 0x5eed ^ (m << 32) ^ (plus << 16) ^ (minus << 8) ^ (s << 4);
                        let z = |draws: usize, seed: u64| {
                            let est = PowerSettings {
                                num_sims_per_seed: draws,
                                alpha: 0.05,
                                sampling,
                                rng_seed: seed,
                            }
                            .estimate(&pred, s as usize)
                            .unwrap();
                            let sigma = (exact * (1.0 - exact) / draws as f64).sqrt();
                            let diff = (est.power - exact).abs();
                            if sigma > 0.0 {
                                diff / sigma
                            } else if diff == 0.0 {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        };
                        cases += 1;
                        let first = z(draws, seed);
                        worst_z = worst_z.max(first);
                        if first > 3.0 {
                            // Re-draw on an independent stream at ten times the draws.
                            let second = z(10 * draws, seed ^ 0xc0ff_ee00_0000_0000);
                            rechecked.push(format!("(+{plus},-{minus},0x{zero}) s={s} {sampling:?} z {first:.2} -> {second:.2}"));
                            if second > 3.0 {
                                bad.push(rechecked.last().unwrap().clone());
                            }
                        }
                    }
                }
            }
        }
    }
    let pass = hand && bad.is_empty();
    outcome(
        pass,
        format!(
            "χ²(15,5)=5 {}, {cases} pool/size cases at {draws} draws, worst |z| {worst_z:.2}, re-drawn [{}]{}",
            if hand { "ok" } else { "WRONG" },
            rechecked.join("; "),
            if bad.is_empty() { String::new() } else { format!(", outside 3σ twice: {}", bad.join("; ")) }
        ),
    )
}

// --- 4: power monotonicity ------------------------------------------------

fn study_params() -> CaseStudyParams {
    let mut p = CaseStudyParams::default();
    p.trainer = TrainerConfig::compact(p.trainer.model);
    p
}

fn power_monotonicity() -> Outcome {
    let t = Instant::now();
    let report = run_case_study(CaseStudyKind::GaussianNoise, &study_params(), 7).unwrap();
    let elapsed = t.elapsed();
    let mut firsts = Vec::new();
    let mut problems = Vec::new();
    for named in &report.power_curves {
        let first = named.curve.smallest_adequate(ADEQUATE_POWER);
        firsts.push(first);
        let powers: Vec<f64> = named.curve.points.iter().map(|(_, e)| e.power).collect();
        let drops: Vec<f64> = powers.windows(2).map(|w| w[0] - w[1]).filter(|d| *d > 0.0).collect();
        if drops.len() > 1 || drops.iter().any(|&d| d > 0.05) {
            problems.push(format!("{} not monotone: {powers:?}", named.comparison));
        }
    }
    let as_size = |f: &Option<usize>| f.unwrap_or(usize::MAX);
    if firsts.windows(2).any(|w| as_size(&w[1]) > as_size(&w[0])) {
        problems.push(format!("first adequate N_test increases with sigma2: {firsts:?}"));
    }
    let pass = problems.is_empty() && elapsed < Duration::from_secs(600);
    let shown: Vec<String> = firsts.iter().map(|f| f.map_or("-".into(), |n| n.to_string())).collect();
    outcome(
        pass,
        format!(
            "first N_test with power >= 0.8 by sigma2 {:?}: [{}], {:.1?}{}",
            report.params.noise_grid,
            shown.join(", "),
            elapsed,
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

// --- 5: bound coverage ----------------------------------------------------

fn bound_coverage() -> Outcome {
    let t = Instant::now();
    let mut params = CaseStudyParams {
        subset_sizes: (7..=15).map(|e| 1usize << e).collect(),
        ..CaseStudyParams::default()
    };
    params.trainer = TrainerConfig::full_grid(params.trainer.model);
    let report = run_case_study(CaseStudyKind::BoundCheck, &params, 11).unwrap();
    let elapsed = t.elapsed();
    let c = report.coverage;
    let widest = report
        .margins
        .iter()
        .map(|m| m.stdev / m.theoretical_margin)
        .fold(0.0, f64::max);
    let pass = c.fraction() >= 0.95 && elapsed < Duration::from_secs(900);
    outcome(
        pass,
        format!(
            "{}/{} cells within mean ± margin ({:.3}), largest stdev/margin {widest:.3}, {:.1?}",
            c.within,
            c.total,
            c.fraction(),
            elapsed
        ),
    )
}

// --- 6: closed loop -------------------------------------------------------

fn encoder_pair(per_class: usize) -> CaseStudyParams {
    let mut p = study_params();
    // LogReg accuracies near 0.95 and 0.85.
    p.encoder = EncoderParams {
        dim: 8,
        class_separation: 0.987,
        noise_floor: 0.3,
    };
    p.encoder_b = EncoderParams {
        dim: 12,
        class_separation: 0.622,
        noise_floor: 0.3,
    };
    p.subset_sizes = vec![per_class];
    p
}

fn cli_json(args: &[&str]) -> (i32, serde_json::Value) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(args.iter().copied(), &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let value = serde_json::from_str(&text).unwrap_or(serde_json::Value::Null);
    (code, value)
}

fn write_predictions(dir: &Path, name: &str, pred: &PairedPredictions) -> String {
    let path = dir.join(name);
    std::fs::write(&path, cli::files::write_predictions(pred)).unwrap();
    path.to_str().unwrap().to_string()
}

fn closed_loop() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let pilot = comparison_predictions(CaseStudyKind::EncoderComparison, &encoder_pair(128), 21).unwrap();
    let pilot = &pilot[0].predictions;
    let pilot_path = write_predictions(dir.path(), "pilot.csv", pilot);
    let (code, rec) = cli_json(&["probe-sizer", "recommend", "--predictions", &pilot_path, "--dim", "8", "--dim-b", "12"]);
    let Some(n_train) = rec["recommendation"]["n_train"].as_u64() else {
        return outcome(false, format!("recommend exited {code} without a recommendation"));
    };
    let gap = rec["recommendation"]["mean_gap"].as_f64().unwrap();
    let capped = n_train.min(1 << 16) as usize;
    let per_class = capped.div_ceil(2);
    let full = comparison_predictions(CaseStudyKind::EncoderComparison, &encoder_pair(per_class), 22).unwrap();
    let full = &full[0].predictions;
    let n_test = full.num_items();
    let full_path = write_predictions(dir.path(), "full.csv", full);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let size = n_test.to_string();
    let code = cli::run(
        ["probe-sizer", "power", "--predictions", &full_path, "--sizes", &size, "--seed", "5"],
        &mut out,
        &mut err,
    );
    let csv = String::from_utf8(out).unwrap();
    let power: f64 = csv
        .lines()
        .nth(1)
        .and_then(|l| l.split(',').nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    let (a, b): (f64, f64) = full
        .accuracy_pairs()
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p.r1, y + p.r2));
    let seeds = full.num_seeds() as f64;
    let elapsed = t.elapsed();
    let pass = code == 0 && power >= ADEQUATE_POWER && elapsed < Duration::from_secs(1200);
    outcome(
        pass,
        format!(
            "pilot gap {gap:.4} -> N_train {n_train} (run at {capped}), accuracies {:.3} vs {:.3}, power {power:.3} at N_test {n_test}, {:.1?}",
            a / seeds,
            b / seeds,
            elapsed
        ),
    )
}

// --- 7: property suites ---------------------------------------------------

fn gradient_check() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    let specs = [
        (ClassifierSpec::logistic_regression(7, 2).unwrap(), Activation::Relu),
        (ClassifierSpec::logistic_regression(5, 6).unwrap(), Activation::Relu),
        (ClassifierSpec::mlp(6, 5, 2).unwrap(), Activation::Relu),
        (ClassifierSpec::mlp(6, 5, 3).unwrap(), Activation::Tanh),
    ];
    for (seed, (spec, act)) in specs.into_iter().enumerate() {
        let mut r = rng::stream(seed as u64, &[0xfd]);
        let probe = Probe::init(spec, act, &mut r);
        let n = 16;
        let xs: Vec<f64> = (0..n * spec.input_dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let ys: Vec<usize> = (0..n).map(|_| r.random_range(0..spec.num_classes)).collect();
        let rows: Vec<usize> = (0..n).collect();
        let (_, grad) = probe.loss_and_grad(&xs, &ys, &rows);
        let h = 1e-5;
        for j in index::sample(&mut r, grad.len(), 10) {
            let mut p = probe.clone();
            p.params_mut()[j] += h;
            let up = p.mean_loss(&xs, &ys, &rows);
            p.params_mut()[j] -= 2.0 * h;
            let down = p.mean_loss(&xs, &ys, &rows);
            let fd = (up - down) / (2.0 * h);
            let e = (grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-8);
            worst = worst.max(e);
        }
    }
    if worst <= 1e-4 {
        Ok(worst)
    } else {
        Err(format!("gradient rel err {worst:.2e}"))
    }
}

fn stratification_check() -> Result<usize, String> {
    let mut checked = 0;
    for (k, per_class, eta) in [(2, 128, 4.0), (6, 128, 4.0), (3, 40, 4.0), (4, 30, 3.0), (2, 4, 4.0)] {
        let spec = SyntheticDatasetSpec {
            num_classes: k,
            dim: k.max(3),
            samples_per_class: per_class * 2,
            class_separation: 1.0,
            noise_floor: 1.0,
            rng_seed: 3,
        };
        let ds = stratified_subsample(&generate_dataset(&spec).unwrap(), per_class, eta, 9).unwrap();
        let eval = (per_class as f64 / eta).floor() as usize;
        for (split, want) in [(Split::Train, per_class), (Split::Val, eval), (Split::Test, eval)] {
            if ds.class_counts(split) != vec![want; k] {
                return Err(format!("K={k} per_class={per_class}: {split:?} counts {:?}", ds.class_counts(split)));
            }
        }
        checked += 1;
    }
    Ok(checked)
}

fn uniform_identity() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (k, per_class) in [(2, 500), (3, 100), (6, 64)] {
        let spec = SyntheticDatasetSpec {
            num_classes: k,
            dim: k.max(4),
            samples_per_class: per_class * 2,
            class_separation: 1.0,
            noise_floor: 1.0,
            rng_seed: 4,
        };
        let ds = stratified_subsample(&generate_dataset(&spec).unwrap(), per_class, 4.0, 1).unwrap();
        let score = prequential_mdl_with(&ds, 0.001, 2, |_, _| Ok(Box::new(UniformCoder { num_classes: k }) as Box<dyn Coder>))
            .unwrap();
        let want = (per_class * k) as f64 * (k as f64).log2();
        worst = worst.max(rel(score.codelength, want));
    }
    if worst <= 1e-9 {
        Ok(worst)
    } else {
        Err(format!("uniform identity rel err {worst:.2e}"))
    }
}

fn bound_properties() -> Result<usize, String> {
    let mut checked = 0;
    let spec = |p: u64| FunctionClassSpec::new(p, 32).unwrap();
    let m = |n: u64, d: f64, p: u64| finite_class_margin(n, d, 1.0, &spec(p)).unwrap();
    let ns = [1u64, 2, 10, 256, 1000, 65_536, 1 << 20, 1 << 30];
    let ps = [1u64, 2, 17, 769, 4097, 15_401];
    let ds = [0.5, 0.1, 1e-3, 1e-8, 1e-15];
    for &p in &ps {
        for &d in &ds {
            for w in ns.windows(2) {
                if m(w[1], d, p) >= m(w[0], d, p) {
                    return Err(format!("margin not decreasing in n at {w:?}"));
                }
                checked += 1;
            }
        }
    }
    for &n in &ns {
        for &d in &ds {
            for w in ps.windows(2) {
                if m(n, d, w[1]) <= m(n, d, w[0]) {
                    return Err(format!("margin not increasing in P at {w:?}"));
                }
                checked += 1;
            }
        }
        for &p in &ps {
            for w in ds.windows(2) {
                if m(n, w[1], p) <= m(n, w[0], p) {
                    return Err(format!("margin not increasing as delta shrinks at {w:?}"));
                }
                checked += 1;
            }
        }
    }
    for &p in &ps {
        for eps in [0.5, 0.2, 0.05, 0.0123, 0.001] {
            for d in [1e-3, 1e-8] {
                let n = required_train_size(eps, d, 1.0, &spec(p)).unwrap();
                if m(n, d, p) > eps || (n > 1 && m(n - 1, d, p) <= eps) {
                    return Err(format!("inversion off at eps={eps} P={p}: n={n}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn determinism() -> Result<String, String> {
    let mut params = study_params();
    params.subset_sizes = vec![64, 256];
    params.noise_grid = vec![0.1, 1.0];
    params.power.num_sims_per_seed = 200;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = run_case_study(CaseStudyKind::GaussianNoise, &params, 3).unwrap();
            serde_json::to_string(&r).unwrap()
        })
    };
    let one = run(1);
    let again = run(1);
    let four = run(4);
    if one != again {
        return Err("reruns differ".into());
    }
    if one != four {
        return Err("1-thread and 4-thread runs differ".into());
    }
    Ok(format!("{} report bytes identical across reruns and thread counts", one.len()))
}

fn property_suites() -> Outcome {
    let results = [
        ("gradients", gradient_check().map(|w| format!("max rel err {w:.1e}"))),
        ("stratification", stratification_check().map(|n| format!("{n} layouts exact"))),
        ("uniform MDL", uniform_identity().map(|w| format!("max rel err {w:.1e}"))),
        ("bounds", bound_properties().map(|n| format!("{n} monotonicity/inversion checks"))),
        ("determinism", determinism()),
    ];
    let pass = results.iter().all(|(_, r)| r.is_ok());
    let detail: Vec<String> = results
        .iter()
        .map(|(name, r)| match r {
            Ok(s) => format!("{name}: {s}"),
            Err(e) => format!("{name}: FAILED {e}"),
        })
        .collect();
    outcome(pass, detail.join("; "))
}

// --- 8: collapse detection ------------------------------------------------

fn collapse_detection() -> Outcome {
    let t = Instant::now();
    let mut identical = study_params();
    identical.identical = true;
    identical.subset_sizes = vec![1 << 9];
    let mut gapped = encoder_pair(1 << 9);
    // LogReg accuracies near 0.95 and 0.80.
    gapped.encoder_b.class_separation = 0.505;
    let reruns = 100;
    let (mut collapsed, mut not_collapsed) = (0, 0);
    let mut gaps = 0.0;
    for seed in 0..reruns {
        let r = run_case_study(CaseStudyKind::ClassifierComparison, &identical, 1000 + seed).unwrap();
        collapsed += usize::from(r.comparisons[0].collapse.verdict == Verdict::Collapsed);
        let r = run_case_study(CaseStudyKind::EncoderComparison, &gapped, 2000 + seed).unwrap();
        not_collapsed += usize::from(r.comparisons[0].collapse.verdict == Verdict::NotCollapsed);
        gaps += r.comparisons[0].mean_gap;
    }
    let n = reruns as f64;
    let pass = collapsed as f64 / n >= 0.95 && not_collapsed as f64 / n >= 0.95;
    outcome(
        pass,
        format!(
            "identical: {collapsed}/{reruns} Collapsed; gap {:.3}: {not_collapsed}/{reruns} NotCollapsed; {:.1?}",
            gaps / n,
            t.elapsed()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked bound examples", worked_examples),
        ("2 published sample sizes", tables),
        ("3 McNemar oracle", mcnemar_oracle),
        ("4 power monotonicity", power_monotonicity),
        ("5 bound coverage", bound_coverage),
        ("6 closed loop", closed_loop),
        ("7 property suites", property_suites),
        ("8 collapse detection", collapse_detection),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let o = check();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
