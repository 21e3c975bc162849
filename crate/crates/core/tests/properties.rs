use proptest::prelude::*;

use qgassess_core::corpus::{join_generated, parse_generated, Difficulty, McqExample, ParseStatus, Split};
use qgassess_core::filter::{ensemble_first_agreement, filter_set, AgreementMode};
use qgassess_core::metrics::{complexity_of_distribution, diversity, macro_f1, DiversityScheme};
use qgassess_core::predictions::{EnsemblePrediction, PredictionSet, Purpose};
use qgassess_core::vocab::{
    classify_by_threshold, tune_on_scores, vocab_score, ComplexityThresholds, Tier, VocabLexicon,
};
use qgassess_core::{entropy, LogBase};

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-3).then(|| w.iter().map(|x| x / s).collect())
    })
}

/// Confusion-matrix oracle: explicit matrix, then per-class precision and
/// recall by row and column sums.
fn macro_f1_oracle(pred: &[usize], truth: &[usize], n_classes: usize) -> f64 {
    let mut cm = vec![vec![0u64; n_classes]; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        cm[t][p] += 1;
    }
    let mut total = 0.0;
    for c in 0..n_classes {
        let tp = cm[c][c] as f64;
        let predicted: f64 = (0..n_classes).map(|r| cm[r][c] as f64).sum();
        let actual: f64 = cm[c].iter().map(|&x| x as f64).sum();
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = if actual > 0.0 { tp / actual } else { 0.0 };
        total += if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    }
    total / n_classes as f64
}

proptest! {
    #[test]
    fn entropy_is_permutation_invariant(p in distribution(6), rot in 0usize..6) {
        let mut q = p.clone();
        q.rotate_left(rot);
        q.reverse();
        let a = entropy(&p, LogBase::Bits).unwrap();
        let b = entropy(&q, LogBase::Bits).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_bounded_by_uniform(p in distribution(5)) {
        let h = entropy(&p, LogBase::Nats).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= 5f64.ln() + 1e-12);
    }

    #[test]
    fn complexity_is_affine(u in distribution(3), v in distribution(3), alpha in 0.0f64..=1.0) {
        let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let lhs = complexity_of_distribution(&mix);
        let rhs = alpha * complexity_of_distribution(&u) + (1.0 - alpha) * complexity_of_distribution(&v);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn mean_distribution_matches_loop(rows in prop::collection::vec(distribution(4), 1..6)) {
        let p = EnsemblePrediction::for_purpose("q", Purpose::Mcmrc, rows.clone()).unwrap();
        let mean = p.mean_distribution();
        for c in 0..4 {
            let mut acc = 0.0;
            for r in p.members() {
                acc += r[c];
            }
            prop_assert!((mean[c] - acc / rows.len() as f64).abs() < 1e-12);
        }
        prop_assert!((mean.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(mean.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn macro_f1_matches_confusion_matrix(
        (classes, pairs) in (1usize..=5).prop_flat_map(|k| {
            (Just(k), prop::collection::vec((0..k, 0..k), 0..=100))
        })
    ) {
        let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let labels: Vec<usize> = (0..classes).collect();
        let got = macro_f1(&pred, &truth, &labels).unwrap();
        prop_assert_eq!(got, macro_f1_oracle(&pred, &truth, classes));
    }

    #[test]
    fn diversity_ignores_order_and_duplication(
        picks in prop::collection::vec(0usize..6, 1..40),
        copies in 1usize..4,
    ) {
        const QS: [&str; 6] = [
            "What is the passage about?",
            "Who wrote it?",
            "Is it true?",
            "Why did she leave?",
            "The author thinks ___.",
            "In which passage section?",
        ];
        let qs: Vec<&str> = picks.iter().map(|&i| QS[i]).collect();
        let mut rev = qs.clone();
        rev.reverse();
        let dup: Vec<&str> = qs.iter().cycle().take(qs.len() * copies).copied().collect();
        for scheme in [DiversityScheme::Binary, DiversityScheme::EightWay] {
            let d = diversity(&qs, scheme).unwrap().bits;
            prop_assert!((d - diversity(&rev, scheme).unwrap().bits).abs() < 1e-12);
            prop_assert!((d - diversity(&dup, scheme).unwrap().bits).abs() < 1e-12);
            prop_assert!(d <= (scheme.class_count() as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn generated_round_trip(
        q in "[A-Za-z?][A-Za-z ?]{0,20}[A-Za-z?]",
        opts in prop::collection::vec("[a-z0-9][a-z0-9 ]{0,10}[a-z0-9]", 1..6),
    ) {
        let raw = join_generated(&q, &opts, "[SEP]");
        let g = parse_generated("c", &raw, "[SEP]").unwrap();
        prop_assert_eq!(g.parse_status, ParseStatus::Ok);
        prop_assert_eq!(&g.question, &q);
        prop_assert_eq!(&g.options, &opts);
    }

    #[test]
    fn threshold_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let th = ComplexityThresholds::new(t1.min(t2), t1.max(t2)).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(classify_by_threshold(lo, &th) <= classify_by_threshold(hi, &th));
    }

    #[test]
    fn tuned_thresholds_beat_majority(
        data in prop::collection::vec((0.0f64..0.999, 0usize..3), 1..60),
    ) {
        let scores: Vec<f64> = data.iter().map(|d| d.0).collect();
        let labels: Vec<Difficulty> = data.iter().map(|d| Difficulty::ALL[d.1]).collect();
        let tuned = tune_on_scores(&scores, &labels, 0.01).unwrap();
        let mut counts = [0usize; 3];
        for l in &labels {
            counts[l.index()] += 1;
        }
        let majority = *counts.iter().max().unwrap() as f64 / labels.len() as f64;
        prop_assert!(tuned.dev_accuracy >= majority - 1e-12);
        let th = tuned.thresholds;
        prop_assert!(0.0 <= th.t1 && th.t1 <= th.t2 && th.t2 <= 1.0);
    }

    #[test]
    fn vocab_score_ignores_order_and_repetition(
        words in prop::collection::vec(0usize..6, 1..20),
        k in 1usize..4,
    ) {
        const W: [&str; 6] = ["cat", "journey", "ubiquitous", "zebra", "the", "dog"];
        let lex = VocabLexicon::new([
            ("cat", Tier::Beginner),
            ("dog", Tier::Beginner),
            ("journey", Tier::Intermediate),
            ("ubiquitous", Tier::Expert),
        ]).unwrap();
        let mk = |ctx: String| McqExample {
            example_id: "e".into(),
            context_id: "c".into(),
            context: ctx,
            question: "q".into(),
            options: vec!["x".into(), "y".into()],
            correct_index: 0,
            split: Split::Dev,
            difficulty: None,
        };
        let text: Vec<&str> = words.iter().map(|&i| W[i]).collect();
        let mut rev = text.clone();
        rev.reverse();
        let rep: Vec<&str> = text.iter().flat_map(|w| std::iter::repeat_n(*w, k)).collect();
        let base = vocab_score(&mk(text.join(" ")), &lex);
        prop_assert!((base - vocab_score(&mk(rev.join(" ")), &lex)).abs() < 1e-12);
        prop_assert!((base - vocab_score(&mk(rep.join(" ")), &lex)).abs() < 1e-12);
    }

    #[test]
    fn filtering_is_idempotent_and_sound(
        items in prop::collection::vec((any::<bool>(), 0usize..4, 1usize..4), 0..30),
    ) {
        let mut gens = Vec::new();
        let mut set = PredictionSet::new(Purpose::Mcmrc, 3).unwrap();
        for (i, (dup, peak, members_on_a)) in items.iter().enumerate() {
            let id = format!("g{i}");
            let raw = if *dup { "Q? [SEP] a [SEP] a [SEP] b [SEP] c" } else { "Q? [SEP] a [SEP] b [SEP] c [SEP] d" };
            gens.push(parse_generated(&id, raw, "[SEP]").unwrap());
            let mut rows = Vec::new();
            for m in 0..3 {
                let mut row = vec![0.1; 4];
                row[if m < *members_on_a { 0 } else { *peak }] = 0.7;
                rows.push(row);
            }
            set.insert(EnsemblePrediction::for_purpose(&id, Purpose::Mcmrc, rows).unwrap()).unwrap();
        }
        let first = filter_set(&gens, &set, AgreementMode::PerMemberArgmax).unwrap();
        prop_assert!(first.kept.len() <= gens.len());
        let kept: Vec<_> = first.kept.iter().map(|&i| gens[i].clone()).collect();
        let second = filter_set(&kept, &set, AgreementMode::PerMemberArgmax).unwrap();
        prop_assert_eq!(second.kept.len(), kept.len());
        if !kept.is_empty() {
            prop_assert_eq!(second.summary.accuracy, 1.0);
            prop_assert_eq!(second.summary.four_opt_rate, 1.0);
        }
        for o in &first.outcomes {
            prop_assert_eq!(o.kept, o.four_unique && o.ensemble_agrees_first);
        }
    }

    #[test]
    fn single_member_modes_agree(row in distribution(4)) {
        let p = EnsemblePrediction::for_purpose("q", Purpose::Mcmrc, vec![row]).unwrap();
        prop_assert_eq!(
            ensemble_first_agreement(&p, AgreementMode::PerMemberArgmax).unwrap(),
            ensemble_first_agreement(&p, AgreementMode::MeanArgmax).unwrap()
        );
    }
}
