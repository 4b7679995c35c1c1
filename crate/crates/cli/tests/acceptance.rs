//! Acceptance run: one PASS/FAIL/SKIP line per criterion.
//!
//! Real-cohort criteria (1, 2, 4) need the 924-row student CSV; point
//! `MOTIVSCORE_DATA` at it to enable them.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use motivscore::data::{
    class_counts, derive_strategy_labels, load_csv, random_oversample, summary_statistics,
    synthesize_dataset, test_size, train_test_split, Dataset, StrategyLabel, StudentRecord,
    Validation,
};
use motivscore::eval::{classification_metrics, k_fold_split, ConfusionCounts};
use motivscore::experiment::{
    run_classification_experiment, run_importance, run_regression_experiment, ExperimentConfig,
    TaskKind, TestMetrics,
};
use motivscore::linear::{logistic_fit, ols_fit, LogisticModel, LogisticParams};
use motivscore::model::Algorithm;
use motivscore::seed::rng;
use motivscore::svm::{svc_fit, svc_fit_dual, svr_fit_dual, KernelChoice, SvmParams};
use motivscore::tree::{best_split, Task};
use motivscore::Matrix;
use rand::Rng;

const SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
const RUN_BUDGET_SECS: f64 = 60.0;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn real_data() -> Option<Dataset> {
    let path = std::env::var_os("MOTIVSCORE_DATA")?;
    Some(
        load_csv(PathBuf::from(path), Validation::Strict)
            .expect("MOTIVSCORE_DATA is not a readable student CSV"),
    )
}

fn real_config(task: TaskKind, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(task);
    cfg.seed = seed;
    cfg
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn criterion_1(d: &Dataset) -> Check {
    let models = [
        Algorithm::RandomForest,
        Algorithm::Linear,
        Algorithm::Svm,
        Algorithm::DecisionTree,
        Algorithm::Knn,
    ];
    let mut maes: Vec<Vec<f64>> = vec![Vec::new(); models.len()];
    let mut tree_wins = 0;
    let mut slowest: f64 = 0.0;
    for seed in SEEDS {
        let (r, secs) =
            timed(|| run_regression_experiment(&real_config(TaskKind::Regression, seed), d));
        let r = r.map_err(|e| e.to_string())?;
        slowest = slowest.max(secs);
        let m: Vec<f64> = models
            .iter()
            .map(|&a| r.model(a).unwrap().test.headline())
            .collect();
        for (k, v) in m.iter().enumerate() {
            maes[k].push(*v);
        }
        if m[0].min(m[3]) <= m[1].min(m[2]).min(m[4]) {
            tree_wins += 1;
        }
    }
    let med: Vec<f64> = maes.into_iter().map(median).collect();
    for (a, v) in models.iter().zip(&med) {
        ensure(
            (0.32..=0.48).contains(v),
            format!("{a} median MAE {v:.4} outside [0.32, 0.48]"),
        )?;
    }
    ensure(
        tree_wins >= 7,
        format!("tree-based model best in {tree_wins}/10 seeds"),
    )?;
    ensure(
        slowest < RUN_BUDGET_SECS,
        format!("slowest run {slowest:.1}s"),
    )?;
    Ok(format!(
        "median MAE {med:.4?}, tree best in {tree_wins}/10, slowest {slowest:.1}s"
    ))
}

fn criterion_2(d: &Dataset) -> Check {
    let models = [
        Algorithm::RandomForest,
        Algorithm::Linear,
        Algorithm::Svm,
        Algorithm::DecisionTree,
        Algorithm::Knn,
    ];
    let mut acc: Vec<Vec<f64>> = vec![Vec::new(); models.len()];
    let mut rf_wins = 0;
    let mut slowest: f64 = 0.0;
    for seed in SEEDS {
        let (r, secs) = timed(|| {
            run_classification_experiment(&real_config(TaskKind::Classification, seed), d)
        });
        let r = r.map_err(|e| e.to_string())?;
        slowest = slowest.max(secs);
        let a: Vec<f64> = models
            .iter()
            .map(|&m| r.model(m).unwrap().test.headline())
            .collect();
        for (k, v) in a.iter().enumerate() {
            acc[k].push(*v);
        }
        if a[0] > a[1] && a[0] > a[2] {
            rf_wins += 1;
        }
    }
    let med: Vec<f64> = acc.into_iter().map(median).collect();
    ensure(
        med[0] >= 0.90,
        format!("RF median accuracy {:.3} < 0.90", med[0]),
    )?;
    ensure(
        med[3] >= 0.84,
        format!("DT median accuracy {:.3} < 0.84", med[3]),
    )?;
    ensure(
        (0.60..=0.78).contains(&med[4]),
        format!("KNN median accuracy {:.3}", med[4]),
    )?;
    ensure(
        (0.50..=0.72).contains(&med[1]),
        format!("LR median accuracy {:.3}", med[1]),
    )?;
    ensure(
        (0.50..=0.72).contains(&med[2]),
        format!("SVM median accuracy {:.3}", med[2]),
    )?;
    ensure(
        rf_wins >= 9,
        format!("RF beats LR and SVM in {rf_wins}/10 seeds"),
    )?;
    ensure(
        slowest < RUN_BUDGET_SECS,
        format!("slowest run {slowest:.1}s"),
    )?;
    Ok(format!(
        "median accuracy RF/LR/SVM/DT/KNN {med:.3?}, RF ahead in {rf_wins}/10"
    ))
}

/// Synthetic cohort relabelled to the published 729 Deep / 195 Surface split
/// by swapping the two strategy scores on selected rows.
fn cohort_with_published_classes() -> Dataset {
    let mut d = synthesize_dataset(924, 42);
    let deep = |r: &StudentRecord| r.strategy_label() == StrategyLabel::Deep;
    let mut n_deep = d.records.iter().filter(|r| deep(r)).count();
    for r in &mut d.records {
        if n_deep == 729 {
            break;
        }
        let flip = if n_deep > 729 {
            deep(r) && r.deep_strategy > r.surface_strategy
        } else {
            !deep(r)
        };
        if flip {
            std::mem::swap(&mut r.deep_strategy, &mut r.surface_strategy);
            n_deep = if n_deep > 729 { n_deep - 1 } else { n_deep + 1 };
        }
    }
    d
}

fn criterion_3() -> Check {
    let d = cohort_with_published_classes();
    let c = class_counts(&derive_strategy_labels(&d)).map_err(|e| e.to_string())?;
    ensure(
        (c.deep, c.surface) == (729, 195),
        format!("relabelled counts {c:?}"),
    )?;
    let mut cfg = ExperimentConfig::defaults(TaskKind::Classification);
    cfg.models = vec![Algorithm::DecisionTree];
    let mut sizes = Vec::new();
    for seed in [1, 42] {
        cfg.seed = seed;
        let r = run_classification_experiment(&cfg, &d).map_err(|e| e.to_string())?;
        let total = match &r.model(Algorithm::DecisionTree).unwrap().test {
            TestMetrics::Classification(c) => c.counts.total(),
            TestMetrics::Regression(m) => m.n,
        };
        ensure(
            r.data.n_test == 292,
            format!("test set has {} rows", r.data.n_test),
        )?;
        ensure(total == 292, format!("confusion counts sum to {total}"))?;
        sizes.push(r.data.n_test);
    }
    Ok(format!("pool {} -> test {:?} rows", 2 * 729, sizes))
}

fn criterion_4(d: &Dataset) -> Check {
    let mut hits = 0;
    for seed in SEEDS {
        let r = run_importance(&real_config(TaskKind::Regression, seed), d)
            .map_err(|e| e.to_string())?;
        let v: Vec<f64> = r.importance.iter().map(|e| e.value).collect();
        ensure(
            v.iter().all(|&x| x >= 0.0),
            format!("seed {seed}: negative importance"),
        )?;
        let sum: f64 = v.iter().sum();
        ensure(
            (sum - 1.0).abs() <= 1e-9,
            format!("seed {seed}: importances sum to {sum}"),
        )?;
        let top: Vec<&str> = r
            .importance
            .iter()
            .take(4)
            .map(|e| e.feature.as_str())
            .collect();
        if ["study_year", "intrinsic", "extrinsic"]
            .iter()
            .all(|f| top.contains(f))
        {
            hits += 1;
        }
    }
    ensure(
        hits >= 6,
        format!("expected features in top 4 for {hits}/10 seeds"),
    )?;
    Ok(format!(
        "study_year, intrinsic, extrinsic in top 4 for {hits}/10 seeds"
    ))
}

fn criterion_5() -> Check {
    let cases = [
        ("DT", (122, 32, 135, 3), 0.880),
        ("KNN", (101, 53, 99, 39), 0.685),
    ];
    let mut out = Vec::new();
    for (name, (tp, fp, tn, fn_), want) in cases {
        let m = classification_metrics(ConfusionCounts::new(tp, fp, tn, fn_))
            .map_err(|e| e.to_string())?;
        ensure(
            (m.accuracy - want).abs() <= 0.001,
            format!("{name} accuracy {:.4}", m.accuracy),
        )?;
        ensure(
            (m.macro_f1 - want).abs() <= 0.002,
            format!("{name} macro-F1 {:.4}", m.macro_f1),
        )?;
        out.push(format!("{name} acc {:.4} F1 {:.4}", m.accuracy, m.macro_f1));
    }
    Ok(out.join(", "))
}

/// Gini or variance of the rows in `idx`, computed directly.
fn impurity(y: &[f64], idx: &[usize], classify: bool) -> f64 {
    let n = idx.len() as f64;
    if classify {
        let mut c = [0.0; 3];
        for &i in idx {
            c[y[i] as usize] += 1.0;
        }
        1.0 - c.iter().map(|k| (k / n) * (k / n)).sum::<f64>()
    } else {
        let m = idx.iter().map(|&i| y[i]).sum::<f64>() / n;
        idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>() / n
    }
}

fn brute_force_split(
    x: &Matrix,
    y: &[f64],
    classify: bool,
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let n = x.rows();
    let all: Vec<usize> = (0..n).collect();
    let parent = impurity(y, &all, classify);
    let mut cands = Vec::new();
    for f in 0..x.cols() {
        let mut vals = x.column(f);
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x.get(i, f) <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let gain = parent
                - l.len() as f64 / n as f64 * impurity(y, &l, classify)
                - r.len() as f64 / n as f64 * impurity(y, &r, classify);
            cands.push((f, t, gain));
        }
    }
    let top = cands.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    if !(top > 1e-12) {
        return None;
    }
    cands.into_iter().find(|c| c.2 >= top - 1e-9)
}

fn criterion_6() -> Check {
    let mut g = rng(6);
    for case in 0..200 {
        let n = g.random_range(2..=60);
        let p = g.random_range(1..=4);
        let classify = g.random_bool(0.5);
        let min_leaf = g.random_range(1..=3);
        let data = (0..n * p)
            .map(|_| f64::from(g.random_range(0u8..9)) * 0.5)
            .collect();
        let x = Matrix::new(n, p, data).unwrap();
        let y: Vec<f64> = (0..n)
            .map(|_| {
                if classify {
                    f64::from(g.random_range(0u8..3))
                } else {
                    1.0 + f64::from(g.random_range(0u8..29)) * 0.25
                }
            })
            .collect();
        let task = if classify {
            Task::Classify { n_classes: 3 }
        } else {
            Task::Regress
        };
        let features: Vec<usize> = (0..p).collect();
        let got = best_split(&x, &y, &features, task, min_leaf);
        match (got, brute_force_split(&x, &y, classify, min_leaf)) {
            (None, None) => {}
            (Some(s), Some((f, t, gain))) => ensure(
                s.feature == f && (s.threshold - t).abs() < 1e-12 && (s.gain - gain).abs() < 1e-9,
                format!("case {case}: got {s:?}, oracle ({f}, {t}, {gain})"),
            )?,
            (got, want) => return Err(format!("case {case}: got {got:?}, oracle {want:?}")),
        }
    }
    Ok("200/200 instances agree with exhaustive search".into())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn random_matrix<R: Rng>(g: &mut R, n: usize, p: usize, scale: f64) -> Matrix {
    Matrix::new(
        n,
        p,
        (0..n * p).map(|_| g.random_range(-scale..scale)).collect(),
    )
    .unwrap()
}

fn criterion_7() -> Check {
    let mut g = rng(7);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = g.random_range(2..40);
        let p = g.random_range(1..6);
        let x = random_matrix(&mut g, n, p, 3.0);
        let mut y: Vec<f64> = (0..n)
            .map(|_| f64::from(u8::from(g.random_bool(0.5))))
            .collect();
        let w: Vec<f64> = (0..p).map(|_| g.random_range(-2.0..2.0)).collect();
        let b = g.random_range(-1.0..1.0);
        let lambda = g.random_range(0.0..2.0);
        let (_, grad) = LogisticModel::with_params(w.clone(), b, lambda)
            .loss_and_gradient(&x, &y)
            .unwrap();
        let h = 1e-5;
        let loss_at = |j: usize, d: f64| {
            let (mut w2, mut b2) = (w.clone(), b);
            if j < p {
                w2[j] += d;
            } else {
                b2 += d;
            }
            LogisticModel::with_params(w2, b2, lambda)
                .loss_and_gradient(&x, &y)
                .unwrap()
                .0
        };
        let fd: Vec<f64> = (0..=p)
            .map(|j| (loss_at(j, h) - loss_at(j, -h)) / (2.0 * h))
            .collect();
        let diff: Vec<f64> = grad.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&grad).max(norm(&fd)).max(1e-8);
        worst = worst.max(rel);
        ensure(
            rel < 1e-5,
            format!("case {case}: relative gradient error {rel:.2e}"),
        )?;

        y[0] = 0.0;
        y[1] = 1.0;
        let params = LogisticParams {
            l2_lambda: lambda + 1e-3,
            max_iters: 300,
            tol: 1e-8,
        };
        let m = logistic_fit(&x, &y, params).map_err(|e| e.to_string())?;
        ensure(
            m.training_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            format!("case {case}: loss trace increased"),
        )?;
    }
    Ok(format!(
        "worst relative gradient error {worst:.2e}, traces non-increasing"
    ))
}

fn criterion_8() -> Check {
    let mut g = rng(8);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = g.random_range(8..40);
        let p = g.random_range(1..6);
        let x = random_matrix(&mut g, n, p, 3.0);
        let y: Vec<f64> = (0..n).map(|_| g.random_range(-5.0..5.0)).collect();
        let m = ols_fit(&x, &y).map_err(|e| e.to_string())?;
        let pred = m.predict(&x).unwrap();
        let r: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let mut xtr: Vec<f64> = (0..p)
            .map(|j| x.column(j).iter().zip(&r).map(|(a, b)| a * b).sum())
            .collect();
        xtr.push(r.iter().sum());
        let xnorm = x.iter_rows().flatten().map(|v| v * v).sum::<f64>().sqrt() + (n as f64).sqrt();
        let rel = norm(&xtr) / (xnorm * norm(&y).max(1e-12));
        worst = worst.max(rel);
        ensure(
            rel < 1e-8,
            format!("case {case}: normal-equation residual {rel:.2e}"),
        )?;
    }
    let rows: Vec<[f64; 2]> = (0..6).map(|i| [f64::from(i), 2.0 * f64::from(i)]).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let y: Vec<f64> = (0..6).map(|i| 3.0 * f64::from(i) + 1.0).collect();
    let m = ols_fit(&x, &y).map_err(|e| e.to_string())?;
    let fit_err = m
        .predict(&x)
        .unwrap()
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(
        fit_err < 1e-8,
        format!("collinear toy misfit {fit_err:.2e}"),
    )?;
    ensure(
        (m.intercept - 1.0).abs() < 1e-8,
        format!("collinear intercept {}", m.intercept),
    )?;
    Ok(format!(
        "worst residual {worst:.2e}, collinear toy recovered"
    ))
}

fn criterion_9() -> Check {
    let mut g = rng(9);
    let kernels = [
        KernelChoice::Linear,
        KernelChoice::Rbf { gamma: None },
        KernelChoice::Rbf { gamma: Some(2.0) },
    ];
    let mut fits = 0;
    for case in 0..60 {
        let n = g.random_range(3..=20);
        let x = random_matrix(&mut g, n, 2, 2.0);
        let params = SvmParams {
            c: g.random_range(0.1..5.0),
            kernel: kernels[case % kernels.len()],
            ..SvmParams::default()
        };
        let c = params.c;
        let mut labels: Vec<f64> = (0..n)
            .map(|_| if g.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        labels[0] = 1.0;
        labels[1] = -1.0;
        let (_, dual) =
            svc_fit_dual(&x, &labels, params, case as u64, false).map_err(|e| e.to_string())?;
        let in_box = dual.alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a));
        let eq: f64 = dual.alpha.iter().zip(&labels).map(|(a, y)| a * y).sum();
        ensure(
            in_box && eq.abs() < 1e-9,
            format!("SVC case {case}: box {in_box}, y'a = {eq:.2e}"),
        )?;

        let t: Vec<f64> = (0..n).map(|_| g.random_range(-3.0..3.0)).collect();
        let (_, dual) =
            svr_fit_dual(&x, &t, params, case as u64, false).map_err(|e| e.to_string())?;
        let in_box = dual.alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a));
        let eq: f64 = (0..n).map(|i| dual.alpha[i] - dual.alpha[i + n]).sum();
        ensure(
            in_box && eq.abs() < 1e-9,
            format!("SVR case {case}: box {in_box}, balance {eq:.2e}"),
        )?;
        fits += 2;
    }

    let two = Matrix::new(2, 1, vec![-1.0, 1.0]).unwrap();
    let linear = SvmParams {
        c: 10.0,
        kernel: KernelChoice::Linear,
        tol: 1e-9,
        ..SvmParams::default()
    };
    let (m, dual) =
        svc_fit_dual(&two, &[-1.0, 1.0], linear, 0, false).map_err(|e| e.to_string())?;
    ensure(
        dual.alpha.iter().all(|a| (a - 0.5).abs() < 1e-6),
        format!("two-point alpha {:?}", dual.alpha),
    )?;
    let probes = [-2.0, -0.4, 0.0, 0.3, 1.7];
    let f = m
        .decision(&Matrix::new(probes.len(), 1, probes.to_vec()).unwrap())
        .unwrap();
    ensure(
        f.iter().zip(&probes).all(|(v, x)| (v - x).abs() < 1e-6),
        format!("two-point decision {f:?}"),
    )?;

    let xor = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
    let y = [-1.0, -1.0, 1.0, 1.0];
    let rbf = SvmParams {
        c: 10.0,
        kernel: KernelChoice::Rbf { gamma: Some(1.0) },
        ..SvmParams::default()
    };
    let m = svc_fit(&xor, &y, rbf, 0).map_err(|e| e.to_string())?;
    let pred = m.predict_labels(&xor).unwrap();
    ensure(pred == y, format!("XOR predictions {pred:?}"))?;
    Ok(format!(
        "{fits} fits feasible, two-point alpha = 0.5 and f(x) = x, XOR separated"
    ))
}

fn criterion_10() -> Check {
    let mut g = rng(10);
    for case in 0..40 {
        let n = g.random_range(10..200);
        let seed: u64 = g.random();
        let d = derive_strategy_labels(&synthesize_dataset(n, seed));

        let f = g.random_range(0.05..0.95);
        let s = train_test_split(&d, f, seed).map_err(|e| e.to_string())?;
        let want = ((n as f64) * f - 1e-9).ceil() as usize;
        ensure(
            s.test.len() == want && test_size(n, f) == want,
            format!("case {case}: test size {}", s.test.len()),
        )?;
        let mut all: Vec<usize> = s
            .train_indices
            .iter()
            .chain(&s.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        ensure(
            all == (0..n).collect::<Vec<_>>(),
            format!("case {case}: split is not a partition"),
        )?;

        let c = class_counts(&d).map_err(|e| e.to_string())?;
        if c.deep > 0 && c.surface > 0 {
            let o = random_oversample(&d, seed ^ 1).map_err(|e| e.to_string())?;
            let oc = class_counts(&o).map_err(|e| e.to_string())?;
            ensure(
                oc.deep == oc.surface,
                format!("case {case}: oversampled counts {oc:?}"),
            )?;
            ensure(
                o.records[..n] == d.records[..],
                format!("case {case}: originals disturbed"),
            )?;
            ensure(
                o.records[n..].iter().all(|r| d.records.contains(r)),
                format!("case {case}: oversampling added a new row"),
            )?;
        }

        let k = g.random_range(2..=n.min(12));
        let folds = k_fold_split(n, k, seed).map_err(|e| e.to_string())?;
        let mut seen = vec![0u32; n];
        for fold in &folds.folds {
            for &i in fold {
                seen[i] += 1;
            }
        }
        ensure(
            seen.iter().all(|&c| c == 1),
            format!("case {case}: k-fold coverage {seen:?}"),
        )?;
    }
    Ok(
        "40 random cohorts: ceil-rule partitions, duplicate-only balancing, exact fold cover"
            .into(),
    )
}

fn run_cli_experiment(dir: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_motivscore"))
        .args(["experiment", "--task", "classification", "--seed", "17"])
        .args(["--set", "synthetic.n=300", "--set", "rf.n_trees=25"])
        .arg("--out")
        .arg(dir)
        .env_remove("MOTIVSCORE_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )?;
    std::fs::read(dir.join("report.json")).map_err(|e| e.to_string())
}

fn criterion_11() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_cli_experiment(a.path())?;
    let second = run_cli_experiment(b.path())?;
    ensure(!first.is_empty(), "empty report")?;
    ensure(first == second, "reports differ between runs")?;
    Ok(format!(
        "two runs produced identical {}-byte reports",
        first.len()
    ))
}

const COHORT_MOMENTS: [(&str, f64, f64, f64, f64); 11] = [
    ("intrinsic", 4.98, 0.61, 2.17, 6.58),
    ("extrinsic", 5.25, 0.75, 2.42, 7.00),
    ("autonomy", 5.01, 0.89, 2.00, 6.25),
    ("relatedness", 4.46, 0.90, 1.5, 6.25),
    ("competence", 4.77, 0.84, 2.25, 6.25),
    ("self_esteem", 4.17, 0.17, 1.75, 7.00),
    ("deep_strategy", 4.11, 0.72, 2.00, 6.25),
    ("surface_strategy", 3.32, 0.79, 1.50, 6.25),
    ("study_year", 3.24, 1.48, 1.0, 6.0),
    ("age", 22.83, 3.36, 18.00, 44.00),
    ("performance", 4.72, 0.54, 2.92, 6.40),
];

fn criterion_12() -> Check {
    let mut worst_mean: f64 = 0.0;
    let mut worst_sd: f64 = 0.0;
    for seed in [0, 1, 42, 2024, 31337] {
        let d = synthesize_dataset(924, seed);
        let stats = summary_statistics(&d).map_err(|e| e.to_string())?;
        for (name, mean, sd, _, _) in COHORT_MOMENTS {
            let s = stats
                .iter()
                .find(|s| s.feature == name)
                .ok_or(format!("no column {name}"))?;
            let dm = (s.mean - mean).abs();
            ensure(
                dm <= 0.10,
                format!("seed {seed}: {name} mean {:.3} vs {mean}", s.mean),
            )?;
            worst_mean = worst_mean.max(dm);
            if name != "self_esteem" {
                let ds = (s.sd - sd).abs();
                ensure(
                    ds <= 0.15,
                    format!("seed {seed}: {name} sd {:.3} vs {sd}", s.sd),
                )?;
                worst_sd = worst_sd.max(ds);
            }
        }
        let c = class_counts(&derive_strategy_labels(&d)).map_err(|e| e.to_string())?;
        let frac = c.deep as f64 / 924.0;
        ensure(
            (0.74..=0.84).contains(&frac),
            format!("seed {seed}: Deep fraction {frac:.3}"),
        )?;
    }
    Ok(format!(
        "worst mean gap {worst_mean:.3}, worst sd gap {worst_sd:.3}"
    ))
}

fn outcome(f: impl FnOnce() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(msg)) => Outcome::Pass(msg),
        Ok(Err(msg)) => Outcome::Fail(msg),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Outcome::Fail(msg)
        }
    }
}

fn gated(data: &Option<Dataset>, f: impl FnOnce(&Dataset) -> Check) -> Outcome {
    match data {
        Some(d) => outcome(|| f(d)),
        None => Outcome::Skip("MOTIVSCORE_DATA not set; real cohort unavailable".into()),
    }
}

fn main() -> ExitCode {
    let data = real_data();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (
            1,
            "regression MAE band and tree ranking",
            gated(&data, criterion_1),
        ),
        (
            2,
            "classification accuracy bands and RF ranking",
            gated(&data, criterion_2),
        ),
        (
            3,
            "oversample-then-split test set size",
            outcome(criterion_3),
        ),
        (4, "importance ranking", gated(&data, criterion_4)),
        (
            5,
            "metric identities on published counts",
            outcome(criterion_5),
        ),
        (
            6,
            "best split equals exhaustive search",
            outcome(criterion_6),
        ),
        (7, "logistic gradient and loss trace", outcome(criterion_7)),
        (8, "least squares normal equations", outcome(criterion_8)),
        (
            9,
            "SVM feasibility and analytic cases",
            outcome(criterion_9),
        ),
        (
            10,
            "resampling and splitting invariants",
            outcome(criterion_10),
        ),
        (
            11,
            "byte-identical experiment reports",
            outcome(criterion_11),
        ),
        (12, "synthetic cohort moments", outcome(criterion_12)),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        let (tag, msg) = match o {
            Outcome::Pass(m) => ("PASS", m),
            Outcome::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
            Outcome::Skip(m) => ("SKIP", m),
        };
        println!("{tag} criterion {id:>2} ({name}): {msg}");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
