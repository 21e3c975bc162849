//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

use qgassess::formats::to_json_line;
use qgassess_core::corpus::parse_generated;
use qgassess_core::filter::{filter_set, AgreementMode};
use qgassess_core::metrics::{
    classify_standalone, complexity_of_distribution, complexity_score, diversity, expected_entropy, macro_f1,
    DiversityScheme, StandaloneClass,
};
use qgassess_core::predictions::{EnsemblePrediction, PredictionSet, Purpose};
use qgassess_core::refsim::{
    exact_match_closed_form, linearity_check, simulate_exact_match, simulate_overlap, Column, SimPosterior,
};
use qgassess_core::{entropy, LogBase};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn qgassess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgassess")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Result<Value, String> {
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn majority_baseline() -> Outcome {
    let start = Instant::now();
    let published = json_of(&qgassess(&["baselines", "--published"]))?;
    let elapsed = start.elapsed().as_secs_f64();
    let row = &published["rows"][0];
    let pct = |v: &Value| 100.0 * v.as_f64().unwrap();
    let want = [("evl", 62.00, 25.51), ("dev", 61.64, 25.42)];
    for (split, acc, f1) in want {
        let (a, f) = (pct(&row[split]["accuracy"]), pct(&row[split]["macro_f1"]));
        ensure!((a - acc).abs() <= 0.01 && (f - f1).abs() <= 0.01, "{split}: {a:.4} / {f:.4}");
    }
    ensure!(elapsed < 1.0, "took {elapsed:.3} s");

    // the same figures from the bundled per-question label files
    let dev = fixture("race_pp/dev.jsonl");
    let evl = fixture("race_pp/evl.jsonl");
    let files = json_of(&qgassess(&["baselines", "--dev", dev.to_str().unwrap(), "--evl", evl.to_str().unwrap()]))?;
    ensure!(files["rows"][0] == published["rows"][0], "file-based rows differ from count-based rows");
    Ok(format!(
        "Evl {:.2} / {:.2}, Dev {:.2} / {:.2} in {elapsed:.3} s",
        pct(&row["evl"]["accuracy"]),
        pct(&row["evl"]["macro_f1"]),
        pct(&row["dev"]["accuracy"]),
        pct(&row["dev"]["macro_f1"])
    ))
}

fn entropy_endpoints() -> Outcome {
    ensure!(entropy(&[1.0, 0.0, 0.0, 0.0], LogBase::Nats).unwrap() == 0.0, "one-hot is not exactly 0");
    let u = [0.25; 4];
    let bits = entropy(&u, LogBase::Bits).unwrap();
    let nats = entropy(&u, LogBase::Nats).unwrap();
    ensure!((bits - 2.0).abs() <= 1e-12, "uniform bits {bits}");
    ensure!((nats - 4f64.ln()).abs() <= 1e-12, "uniform nats {nats}");
    let p =
        EnsemblePrediction::for_purpose("q", Purpose::Mcmrc, vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])
            .unwrap();
    let expected = expected_entropy(&p, LogBase::Bits);
    let of_mean = entropy(&p.mean_distribution(), LogBase::Bits).unwrap();
    ensure!(expected == 0.0, "expected entropy {expected}");
    ensure!((of_mean - 1.0).abs() <= 1e-12, "entropy of mean {of_mean}");
    Ok(format!("one-hot 0, uniform {bits} bits / {nats:.12} nats, opposing one-hots {expected} vs {of_mean} bits"))
}

fn distribution3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 3).prop_filter_map("zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-3).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn complexity_mapping() -> Outcome {
    for (row, want) in [([1.0, 0.0, 0.0], 0.0), ([0.0, 1.0, 0.0], 0.5), ([0.0, 0.0, 1.0], 1.0)] {
        let p = EnsemblePrediction::for_purpose("q", Purpose::Qc, vec![row.to_vec(), row.to_vec()]).unwrap();
        let c = complexity_score(&p).unwrap();
        ensure!(c == want, "{row:?} -> {c}");
    }
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(distribution3(), distribution3(), 0.0f64..=1.0), |(u, v, a)| {
            let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + (1.0 - a) * y).collect();
            let lhs = complexity_of_distribution(&mix);
            let rhs = a * complexity_of_distribution(&u) + (1.0 - a) * complexity_of_distribution(&v);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("one-hots map to 0 / 0.5 / 1; affine on 1000 random pairs".into())
}

fn diversity_fixtures() -> Outcome {
    let half = ["What is the main idea of the passage?", "Who is Tom?"];
    let d = diversity(&half, DiversityScheme::Binary).unwrap().bits;
    ensure!((d - 1.0).abs() <= 1e-12, "50/50 gives {d}");
    let single = ["Who is Tom?", "Why did he go?", "When was it?"];
    let s = diversity(&single, DiversityScheme::Binary).unwrap().bits;
    ensure!(s == 0.0, "single class gives {s}");
    let henry = classify_standalone("When was King Henry born").unwrap();
    let title = classify_standalone("What is the best title for this passage").unwrap();
    ensure!(henry == StandaloneClass::Standalone, "{henry:?}");
    ensure!(title == StandaloneClass::PassageDependent, "{title:?}");
    Ok(format!("50/50 {d:.4} bits, single class {s}, example questions classified"))
}

const FILTER_ITEMS: usize = 200;

/// One planted item of the filter fixture.
#[derive(Clone, Copy, PartialEq)]
enum Plant {
    Unparsed,
    Duplicate,
    FiveOptions,
    Disagree,
    Good,
}

fn plant(i: usize) -> Plant {
    if i.is_multiple_of(10) {
        Plant::Duplicate
    } else if i % 10 == 1 {
        Plant::FiveOptions
    } else if i % 25 == 2 {
        Plant::Unparsed
    } else if i % 7 == 3 {
        Plant::Disagree
    } else {
        Plant::Good
    }
}

fn filter_fixture() -> (String, String) {
    let mut gens = String::new();
    let mut preds = String::from("{\"purpose\":\"mcmrc\",\"ensemble_size\":3}\n");
    for i in 0..FILTER_ITEMS {
        let id = format!("c{i:03}");
        let raw = match plant(i) {
            Plant::Unparsed => format!("Question {i} without options"),
            Plant::Duplicate => format!("Question {i}? [SEP] red [SEP] blue [SEP] red [SEP] green"),
            Plant::FiveOptions => format!("Question {i}? [SEP] a [SEP] b [SEP] c [SEP] d [SEP] e"),
            Plant::Disagree | Plant::Good => format!("Question {i}? [SEP] a [SEP] b [SEP] c [SEP] d"),
        };
        gens.push_str(&to_json_line(&serde_json::json!({ "context_id": id, "raw": raw })).unwrap());
        gens.push('\n');
        if plant(i) == Plant::Unparsed {
            continue;
        }
        let mut members = vec![vec![0.7, 0.1, 0.1, 0.1]; 3];
        if plant(i) == Plant::Disagree {
            members[i % 3] = vec![0.1, 0.1, 0.7, 0.1];
        }
        let rec = serde_json::json!({ "question_id": id, "labels": ["A", "B", "C", "D"], "members": members });
        preds.push_str(&to_json_line(&rec).unwrap());
        preds.push('\n');
    }
    (gens, preds)
}

fn filter_pipeline() -> Outcome {
    let planted: Vec<Plant> = (0..FILTER_ITEMS).map(plant).collect();
    let count = |p: Plant| planted.iter().filter(|&&x| x == p).count();
    let n_parsed = FILTER_ITEMS - count(Plant::Unparsed);
    let n_four = count(Plant::Disagree) + count(Plant::Good);
    let n_good = count(Plant::Good);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (gens, preds) = filter_fixture();
    let g = dir.path().join("gens.jsonl");
    let p = dir.path().join("preds.jsonl");
    let kept = dir.path().join("kept.jsonl");
    std::fs::write(&g, gens).unwrap();
    std::fs::write(&p, preds).unwrap();
    let s = json_of(&qgassess(&[
        "filter",
        "--generations",
        g.to_str().unwrap(),
        "--mcmrc-preds",
        p.to_str().unwrap(),
        "--kept-out",
        kept.to_str().unwrap(),
    ]))?;
    ensure!(s["n_parsed"] == n_parsed, "n_parsed {} vs {n_parsed}", s["n_parsed"]);
    ensure!(s["four_opt_rate"].as_f64() == Some(n_four as f64 / FILTER_ITEMS as f64), "rate {}", s["four_opt_rate"]);
    ensure!(s["accuracy"].as_f64() == Some(n_good as f64 / n_four as f64), "accuracy {}", s["accuracy"]);
    ensure!(s["n_kept"] == n_good, "kept {} vs {n_good}", s["n_kept"]);

    let again =
        json_of(&qgassess(&["filter", "--generations", kept.to_str().unwrap(), "--mcmrc-preds", p.to_str().unwrap()]))?;
    ensure!(again["accuracy"].as_f64() == Some(1.0), "kept-subset accuracy {}", again["accuracy"]);
    ensure!(again["n_kept"] == n_good, "second pass kept {}", again["n_kept"]);

    // the library agrees with the command
    let text = std::fs::read_to_string(&g).unwrap();
    let parsed: Vec<_> = text
        .lines()
        .map(|line| {
            let v: Value = serde_json::from_str(line).unwrap();
            parse_generated(v["context_id"].as_str().unwrap(), v["raw"].as_str().unwrap(), "[SEP]").unwrap()
        })
        .collect();
    let set: PredictionSet = qgassess::formats::load_predictions(&p, Purpose::Mcmrc).map_err(|e| e.to_string())?;
    let r = filter_set(&parsed, &set, AgreementMode::PerMemberArgmax).map_err(|e| e.to_string())?;
    ensure!(r.summary.n_kept == n_good, "library kept {}", r.summary.n_kept);
    Ok(format!(
        "4-opt rate {n_four}/{FILTER_ITEMS}, accuracy {n_good}/{n_four}, kept {n_good}; kept-subset accuracy 100%; idempotent"
    ))
}

fn reference_scaling_exact_match() -> Outcome {
    let start = Instant::now();
    let trials = 100_000;
    let js: Vec<u32> = (1..=10).collect();
    let zipf = SimPosterior::zipf(1000, 1.0).unwrap();
    let r = simulate_exact_match(&zipf, &js, trials, 20_240_601).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..js.len() {
        let cf = exact_match_closed_form(r.p_star, js[i]).unwrap();
        let z = (r.estimates[i] - cf).abs() / r.std_errors[i];
        worst = worst.max(z);
        ensure!(z <= 3.0, "J={} estimate {} vs {cf}, {z:.2} SE", js[i], r.estimates[i]);
    }
    let zipf_lin = linearity_check(&r, 0.01, Column::Estimate).map_err(|e| e.to_string())?;
    ensure!(zipf_lin.passes, "Zipf linearity");

    // small p*: the linear regime covers every J
    let m = 10_000;
    let uniform = SimPosterior::explicit(vec![1.0 / m as f64; m]).unwrap();
    let small = simulate_exact_match(&uniform, &js, 1_000, 1).map_err(|e| e.to_string())?;
    let lin = linearity_check(&small, 0.01, Column::ClosedForm).map_err(|e| e.to_string())?;
    ensure!(lin.passes, "closed form not linear at p* = 1e-4: {:?}", lin.deviations);

    let coin = SimPosterior::explicit(vec![0.5, 0.5]).unwrap();
    let sat = simulate_exact_match(&coin, &js, trials, 3).map_err(|e| e.to_string())?;
    let report = linearity_check(&sat, 0.05, Column::Estimate).map_err(|e| e.to_string())?;
    ensure!(report.saturation_onset.is_some_and(|j| j <= 2), "saturation onset {:?}", report.saturation_onset);

    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 30.0, "took {elapsed:.1} s");
    Ok(format!(
        "Zipf M=1000 p*={:.4}: worst |z| {worst:.2} over J=1..10 at {trials} trials; linear at p*=1e-4 (closed form); \
         p*=0.5 saturates at J={}; {elapsed:.1} s",
        r.p_star,
        report.saturation_onset.unwrap()
    ))
}

/// Every pair of draws of a two-position binary sequence, scored against the
/// mode `[0, 0]`.
fn overlap_oracle(q: f64, j: u32) -> f64 {
    let seqs = [(1.0, q * q), (0.5, 2.0 * q * (1.0 - q)), (0.0, (1.0 - q) * (1.0 - q))];
    match j {
        1 => seqs.iter().map(|(s, p)| s * p).sum(),
        2 => {
            let mut total = 0.0;
            for (a, pa) in seqs {
                for (b, pb) in seqs {
                    total += pa * pb * f64::max(a, b);
                }
            }
            total
        }
        _ => unreachable!(),
    }
}

fn reference_scaling_overlap() -> Outcome {
    let p = SimPosterior::positionwise_iid(vec![0.9, 0.1], 2).unwrap();
    let r = simulate_overlap(&p, &[1, 2], 100_000, 8).map_err(|e| e.to_string())?;
    let mut notes = String::new();
    for (i, j) in [1u32, 2].into_iter().enumerate() {
        let oracle = overlap_oracle(0.9, j);
        ensure!((r.estimates[i] - oracle).abs() <= 3.0 * r.std_errors[i], "J={j}: {} vs {oracle}", r.estimates[i]);
        let _ = write!(notes, "J={j} {:.5} vs {oracle:.5}; ", r.estimates[i]);
    }
    ensure!((overlap_oracle(0.9, 1) - 0.9).abs() <= 1e-12, "J=1 oracle");

    let single = SimPosterior::positionwise_iid(vec![0.2, 0.5, 0.3], 1).unwrap();
    let js = [1, 2, 3, 5, 10];
    let a = simulate_overlap(&single, &js, 20_000, 99).map_err(|e| e.to_string())?;
    let b = simulate_exact_match(&single, &js, 20_000, 99).map_err(|e| e.to_string())?;
    ensure!(a.estimates == b.estimates && a.std_errors == b.std_errors, "T=1 overlap differs from exact match");
    Ok(format!("{notes}T=1 overlap equals exact match bitwise"))
}

fn macro_f1_oracle(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut cm = vec![vec![0u32; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        cm[t][p] += 1;
    }
    let mut total = 0.0;
    for c in 0..k {
        let tp = f64::from(cm[c][c]);
        let col: f64 = (0..k).map(|r| f64::from(cm[r][c])).sum();
        let row: f64 = cm[c].iter().map(|&x| f64::from(x)).sum();
        let precision = if col > 0.0 { tp / col } else { 0.0 };
        let recall = if row > 0.0 { tp / row } else { 0.0 };
        total += if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    }
    total / k as f64
}

fn macro_f1_oracle_check() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    let strategy = (1usize..=5).prop_flat_map(|k| (Just(k), prop::collection::vec((0..k, 0..k), 0..=100)));
    runner
        .run(&strategy, |(k, pairs)| {
            let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let truth: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let classes: Vec<usize> = (0..k).collect();
            prop_assert_eq!(macro_f1(&pred, &truth, &classes).unwrap(), macro_f1_oracle(&pred, &truth, k));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("500 random instances equal the confusion-matrix oracle exactly".into())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (gens, preds) = filter_fixture();
    let g = dir.path().join("gens.jsonl");
    let p = dir.path().join("preds.jsonl");
    std::fs::write(&g, gens).unwrap();
    std::fs::write(&p, preds).unwrap();
    let a10 = |f: &str| fixture(&format!("assess10/{f}")).to_str().unwrap().to_string();
    let h = |f: &str| fixture(&format!("human/{f}")).to_str().unwrap().to_string();
    let (g, p) = (g.to_str().unwrap().to_string(), p.to_str().unwrap().to_string());
    let commands: Vec<Vec<String>> = vec![
        vec![
            "assess".into(),
            "--generations".into(),
            a10("generations.jsonl"),
            "--mcmrc-preds".into(),
            a10("mcmrc.jsonl"),
            "--qc-preds".into(),
            a10("qc.jsonl"),
            "--grammar-report".into(),
            a10("grammar.jsonl"),
        ],
        vec!["filter".into(), "--generations".into(), g, "--mcmrc-preds".into(), p],
        vec!["tune-vocab".into(), "--dev".into(), h("dataset.jsonl"), "--lexicon".into(), h("lexicon.jsonl")],
        vec!["baselines".into(), "--published".into()],
        vec!["stats".into()],
        vec![
            "simulate".into(),
            "--j".into(),
            "1..5".into(),
            "--trials".into(),
            "20000".into(),
            "--seed".into(),
            "5".into(),
        ],
    ];
    let mut checked = 0;
    for cmd in &commands {
        for format in ["json", "csv"] {
            let mut args: Vec<&str> = cmd.iter().map(String::as_str).collect();
            args.extend(["--format", format]);
            let first = qgassess(&args);
            let second = qgassess(&args);
            ensure!(first.status.success(), "{} failed: {}", cmd[0], String::from_utf8_lossy(&first.stderr));
            ensure!(first.stdout == second.stdout, "{} --format {format} output differs between runs", cmd[0]);
            checked += 1;
        }
    }
    Ok(format!("{checked} subcommand/format pairs byte-identical across reruns"))
}

const DECLARED: &str = "model-dependent figures (reading-comprehension accuracies, trained complexity classifiers, \
    absolute A/C/D on generated questions, filtered-question counts, complexity distributions) need trained \
    models that are not part of this workspace; the metric definitions behind them are covered by the property suites";

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("majority-class baseline", majority_baseline),
        ("entropy endpoints", entropy_endpoints),
        ("complexity mapping", complexity_mapping),
        ("diversity", diversity_fixtures),
        ("filter pipeline", filter_pipeline),
        ("reference scaling, exact match", reference_scaling_exact_match),
        ("reference scaling, overlap", reference_scaling_overlap),
        ("macro F1 oracle", macro_f1_oracle_check),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("DECLARED  not reproducible at desk scale: {DECLARED}");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
