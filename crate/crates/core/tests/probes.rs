use std::collections::BTreeMap;

use rand::Rng;
use wordspace::io::EmbeddingRecord;
use wordspace::lexicon::{FirstTokenCategory, Lexicon, LexiconEntry};
use wordspace::probes::{
    bin_error_rates, build_context_retrieval_dataset, evaluate, fit_binary, partition_classes, run_identity_probe,
    train_ovr_logistic, BinaryProblem, Binning, ClassTally, LinearClassifier, ProbeReport, TrainOptions,
};
use wordspace::stats::{decade_edges, pearson, PairedSeries};
use wordspace::synth::{blobs, ContextFixture, FrequencyFixture};
use wordspace::{seed, Point};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = seed::rng(12);
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let n = rng.random_range(2..12);
        let d = rng.random_range(1..6);
        let data: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let positive: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let problem = BinaryProblem::new(&rows, positive, 0.5, trial % 2 == 0);
        let params: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, grad) = problem.objective(&params);
        let h = 1e-6;
        for j in 0..=d {
            let mut up = params.clone();
            let mut down = params.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (problem.loss(&up) - problem.loss(&down)) / (2.0 * h);
            worst = worst.max(rel_err(grad[j], fd));
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn loss_is_nonincreasing() {
    let data = [vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![-1.0, 0.5]];
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let problem = BinaryProblem::new(&rows, vec![true, false, false, true], 0.1, false);
    let fit = fit_binary(&problem, &TrainOptions::default());
    assert!(fit.loss_history.windows(2).all(|w| w[1] <= w[0]));
    assert!(fit.converged);
}

#[test]
fn separable_blobs_one_shot() {
    let ds = blobs(10, 32, 10.0, 1.0, 10, 3).unwrap();
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
    let report = evaluate(&model, &ds).unwrap();
    assert!(report.overall_accuracy > 0.95, "{}", report.overall_accuracy);
}

#[test]
fn predictions_agree_with_independent_sigmoid_argmax() {
    let ds = blobs(5, 8, 4.0, 1.0, 3, 8).unwrap();
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
    let mut rng = seed::rng(100);
    for _ in 0..100 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-4.0..4.0)).collect();
        let probs: Vec<f64> = model
            .weights
            .iter()
            .map(|row| {
                let z: f64 = row[..8].iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + row[8];
                1.0 / (1.0 + (-z).exp())
            })
            .collect();
        let mut best = 0;
        for k in 1..probs.len() {
            if probs[k] > probs[best] {
                best = k;
            }
        }
        assert_eq!(model.predict_index(&Point::new(x).unwrap()).unwrap(), best);
    }
}

#[test]
fn tie_breaks_and_dimension_errors() {
    let zero = LinearClassifier {
        classes: vec!["a".into(), "b".into(), "c".into()],
        weights: vec![vec![0.0; 3]; 3],
        l2_strength: 1.0,
        meta: vec![],
    };
    assert_eq!(zero.predict(&Point::new(vec![5.0, -2.0]).unwrap()).unwrap(), "a");
    assert!(zero.predict(&Point::new(vec![1.0]).unwrap()).is_err());
    let dominant = LinearClassifier {
        weights: vec![vec![0.0; 3], vec![0.0, 0.0, 10.0], vec![0.0; 3]],
        ..zero
    };
    assert_eq!(dominant.predict(&Point::new(vec![0.3, 0.1]).unwrap()).unwrap(), "b");
}

#[test]
fn one_dimensional_two_class() {
    let ds = wordspace::probes::ProbeDataset::new(
        vec!["neg".into(), "pos".into()],
        vec![
            wordspace::probes::LabeledPoint::new(0, Point::new(vec![-1.0]).unwrap()),
            wordspace::probes::LabeledPoint::new(1, Point::new(vec![1.0]).unwrap()),
        ],
        vec![],
    )
    .unwrap();
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
    assert_eq!(model.predict(&Point::new(vec![-0.5]).unwrap()).unwrap(), "neg");
    assert_eq!(model.predict(&Point::new(vec![0.5]).unwrap()).unwrap(), "pos");
}

#[test]
fn accuracy_matches_recount() {
    let ds = blobs(6, 6, 2.0, 1.0, 10, 21).unwrap();
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
    let report = evaluate(&model, &ds).unwrap();
    let mut wrong = 0;
    for lp in ds.test() {
        if model.predict_index(&lp.point).unwrap() != lp.label {
            wrong += 1;
        }
    }
    assert_eq!(report.errors(), wrong);
    assert!((report.overall_accuracy - (1.0 - wrong as f64 / ds.test().len() as f64)).abs() < 1e-15);
}

#[test]
fn same_seed_same_reports() {
    let fx = FrequencyFixture {
        words_per_decade: 8,
        ..FrequencyFixture::default()
    };
    let c = fx.build().unwrap();
    let words: Vec<String> = c.cohorts.keys().cloned().collect();
    let run = || {
        let part = partition_classes(&words, 2, 20, 4).unwrap();
        run_identity_probe(&c.cohorts, &part, &TrainOptions::default(), 10, 4).unwrap()
    };
    let a = run();
    let b = wordspace::exec::sequential(run);
    assert_eq!(a, b);
}

fn lex_entry(word: &str, frequency: u64) -> LexiconEntry {
    LexiconEntry {
        word: word.into(),
        frequency,
        sense_count: Some(1),
        token_count: 1,
        first_token_category: FirstTokenCategory::InVocabWord,
    }
}

#[test]
fn binned_rates_match_hand_aggregation() {
    // Word k in decade b misclassifies b + (k % 2) of its 10 test points.
    let mut per_class = BTreeMap::new();
    let mut lexicon = Lexicon::new();
    let mut by_hand = vec![(0usize, 0usize); 6];
    for b in 0..5u32 {
        for k in 0..4usize {
            let word = format!("b{b}k{k}");
            let errors = b as usize + k % 2;
            per_class.insert(word.clone(), ClassTally { errors, total: 10 });
            lexicon.insert(word.clone(), lex_entry(&word, 3 * 10u64.pow(b + 2)));
            by_hand[b as usize].0 += errors;
            by_hand[b as usize].1 += 10;
        }
    }
    let report = ProbeReport {
        per_class,
        overall_accuracy: 0.0,
    };
    let rows = bin_error_rates(&[report], &lexicon, &Binning::Frequency(decade_edges())).unwrap();
    for (row, (e, t)) in rows.iter().zip(&by_hand) {
        assert_eq!((row.errors, row.total), (*e, *t));
        if *t > 0 {
            assert!((row.error_pct().unwrap() - 100.0 * *e as f64 / *t as f64).abs() < 1e-12);
        }
    }
    assert_eq!(rows[5].error_pct(), None);
}

#[test]
fn binned_rate_missing_word_names_it() {
    let report = ProbeReport {
        per_class: [("ghost".to_string(), ClassTally { errors: 1, total: 10 })].into(),
        overall_accuracy: 0.9,
    };
    let err = bin_error_rates(&[report], &Lexicon::new(), &Binning::Tokens).unwrap_err();
    assert!(err.to_string().contains("ghost"));
}

#[test]
fn identity_errors_rise_with_frequency() {
    let c = FrequencyFixture::default().build().unwrap();
    let words: Vec<String> = c.cohorts.keys().cloned().collect();
    let part = partition_classes(&words, 2, 100, 1).unwrap();
    let reports = run_identity_probe(&c.cohorts, &part, &TrainOptions::default(), 10, 1).unwrap();
    let rows = bin_error_rates(&reports, &c.lexicon, &Binning::Frequency(decade_edges())).unwrap();
    let pct: Vec<f64> = rows.iter().filter_map(|r| r.error_pct()).collect();
    assert_eq!(pct.len(), 5);
    assert!(pct.windows(2).all(|w| w[0] < w[1]), "{pct:?}");
}

#[test]
fn context_retrieval_orthogonal_masks() {
    let recs = vec![
        EmbeddingRecord::new("w", 0, "artificial", vec![1.0, 0.0]).masked(),
        EmbeddingRecord::new("w", 1, "artificial", vec![0.0, 1.0]).masked(),
        EmbeddingRecord::new("w", 0, "artificial", vec![1.0, 0.0]),
        EmbeddingRecord::new("w", 1, "artificial", vec![0.0, 1.0]),
    ];
    let ds = build_context_retrieval_dataset(&recs, "w", 2).unwrap();
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
    assert_eq!(evaluate(&model, &ds).unwrap().overall_accuracy, 1.0);
    assert!(build_context_retrieval_dataset(&recs[1..], "w", 2).is_err());
}

#[test]
fn context_retrieval_shuffled_labels_is_chance() {
    let fx = ContextFixture {
        words: 40,
        noise: 0.5,
        ..ContextFixture::default()
    };
    let c = fx.build();
    let mut rng = seed::rng(2);
    let mut total = 0;
    let mut correct = 0;
    for word in &c.words {
        let mut ids: Vec<u32> = (0..30).collect();
        rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut rng);
        let shuffled: Vec<EmbeddingRecord> = c
            .records
            .iter()
            .filter(|r| &r.token == word)
            .map(|r| {
                let mut r = r.clone();
                if !r.is_mask {
                    r.context_id = ids[r.context_id as usize];
                }
                r
            })
            .collect();
        let ds = build_context_retrieval_dataset(&shuffled, word, 30).unwrap();
        let model = train_ovr_logistic(&ds, &TrainOptions::default()).unwrap();
        let rep = evaluate(&model, &ds).unwrap();
        total += rep.total();
        correct += rep.total() - rep.errors();
    }
    let acc = correct as f64 / total as f64;
    assert!((acc - 1.0 / 30.0).abs() < 0.03, "{acc}");
}

#[test]
fn context_retrieval_error_falls_with_frequency() {
    let fx = ContextFixture {
        words: 120,
        ..ContextFixture::default()
    };
    let c = fx.build();
    let rates = wordspace::probes::context_retrieval_error_rates(&c.records, &c.words, 30, &TrainOptions::default()).unwrap();
    let x: Vec<f64> = rates.iter().map(|r| r.rate()).collect();
    let y: Vec<f64> = rates.iter().map(|r| (c.lexicon[&r.word].frequency as f64).log10()).collect();
    let r = pearson(&PairedSeries::new(x, y).unwrap()).unwrap();
    assert!(r < -0.5, "{r}");
}
