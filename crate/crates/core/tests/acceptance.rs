//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::io::Cursor;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use wordspace::distortion::{calibrate_and_score, quartile_residual_correlation, PairMetric, SimilarityPair};
use wordspace::geometry::{meb_coreset, meb_exact_small, volume_ratio};
use wordspace::io::{
    emit_report, parse_csv_table, read_lexicon, read_similarity_pairs, write_lexicon, write_similarity_pairs, Cell,
    Emb1Reader, Emb1Writer, EmbeddingRecord, ReportFormat, Table,
};
use wordspace::lexicon::{FirstTokenCategory, Lexicon, LexiconEntry};
use wordspace::probes::{
    bin_error_rates, context_retrieval_error_rates, evaluate, partition_classes, run_identity_probe,
    train_ovr_logistic, BinaryProblem, Binning, TrainOptions,
};
use wordspace::stats::{decade_edges, linear_fit, pearson, spearman, PairedSeries};
use wordspace::synth::{blobs, gaussian_points, null_pairs, ContextFixture, FrequencyFixture};
use wordspace::theory::{cosine_distance, cosine_distance_range, range_width_monotone, CosineRangeQuery};
use wordspace::{exec, seed, Error, Point};

mod common;
use common::{brute_force_meb, brute_pearson, brute_quartiles};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn pts(raw: &[Vec<f64>]) -> Vec<Point> {
    raw.iter().map(|c| Point::new(c.clone()).unwrap()).collect()
}

fn unit(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn meb_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(2024);
    let mut worst: f64 = 0.0;
    let mut welzl_vs_brute: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let d = rng.random_range(1..=4);
        let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let p = pts(&raw);
        let exact = meb_exact_small(&p).map_err(|e| e.to_string())?.radius;
        let approx = meb_coreset(&p, 1e-4).map_err(|e| e.to_string())?.radius;
        if exact > 0.0 {
            worst = worst.max((approx - exact).abs() / exact);
            let brute = brute_force_meb(&raw);
            welzl_vs_brute = welzl_vs_brute.max((exact - brute).abs() / brute);
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-3, format!("worst relative error {worst:.3e}"))?;
    ensure(welzl_vs_brute <= 1e-9, format!("Welzl disagrees with brute force by {welzl_vs_brute:.3e}"))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("worst rel err {worst:.2e}, Welzl vs brute force {welzl_vs_brute:.1e}, {elapsed:.2?}"))
}

fn meb_certificate_at_scale() -> Outcome {
    let eps = 1e-3;
    let cohorts: Vec<Vec<Point>> = exec::map_range(50, |i| {
        let mut rng = seed::rng(seed::derive_index(7, i as u64));
        let center: Vec<f64> = (0..768).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sigma = rng.random_range(0.1..2.0);
        gaussian_points(&mut rng, &center, sigma, 1000)
    });
    let violations: usize = exec::try_map(&cohorts, |c| {
        let ball = meb_coreset(c, eps)?;
        Ok::<_, Error>(c.iter().filter(|p| !ball.contains(p, eps)).count())
    })
    .map_err(|e| e.to_string())?
    .into_iter()
    .sum();
    ensure(violations == 0, format!("{violations} points outside radius·(1+ε)"))?;

    let nested = exec::try_map_range(100, |k| {
        let mut rng = seed::rng(seed::derive_index(8, k as u64));
        let cohort = &cohorts[rng.random_range(0..cohorts.len())];
        let outer_n = rng.random_range(2..=cohort.len());
        let inner_n = rng.random_range(1..=outer_n);
        let outer: Vec<Point> = index::sample(&mut rng, cohort.len(), outer_n).iter().map(|i| cohort[i].clone()).collect();
        let inner: Vec<Point> = outer[..inner_n].to_vec();
        let r_out = meb_coreset(&outer, eps)?.radius;
        let r_in = meb_coreset(&inner, eps)?.radius;
        Ok::<_, Error>(r_in <= r_out * (1.0 + eps))
    })
    .map_err(|e| e.to_string())?;
    let broken = nested.iter().filter(|ok| !**ok).count();
    ensure(broken == 0, format!("{broken} of 100 nested pairs violate monotonicity"))?;
    Ok("50 cohorts (768-d, n=1000) certified; 100 nested pairs monotone".into())
}

fn volume_ratio_anchor() -> Outcome {
    let v = volume_ratio(1.01, 768).map_err(|e| e.to_string())?;
    let off = (v / 2084.0 - 1.0).abs();
    ensure(off < 0.005, format!("volume_ratio(1.01, 768) = {v:.2}"))?;
    Ok(format!("volume_ratio(1.01, 768) = {v:.2} ({:.3}% from 2084)", 100.0 * off))
}

fn theory_containment() -> Outcome {
    let mut rng = seed::rng(99);
    let mut samples = 0usize;
    for d in [2usize, 8, 768] {
        for (norm, r) in [(5.0, 0.5), (5.0, 3.0), (5.0, 4.9), (1.0, 1.5)] {
            let center: Vec<f64> = unit(&mut rng, d).into_iter().map(|x| norm * x).collect();
            let target = unit(&mut rng, d);
            let q = CosineRangeQuery::new(Point::new(center.clone()).unwrap(), r, Point::new(target.clone()).unwrap())
                .map_err(|e| e.to_string())?;
            let range = cosine_distance_range(&q);
            for _ in 0..10_000 {
                let dir = unit(&mut rng, d);
                let rho = r * rng.random::<f64>().powf(1.0 / d as f64);
                let x: Vec<f64> = center.iter().zip(&dir).map(|(c, u)| c + rho * u).collect();
                if x.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let dist = cosine_distance(&x, &target);
                ensure(
                    range.contains(dist, 1e-9),
                    format!("d={d} r={r}: {dist} outside [{}, {}]", range.lo, range.hi),
                )?;
                samples += 1;
            }
        }
    }
    for _ in 0..100 {
        let d = rng.random_range(2..=64);
        let norm = rng.random_range(0.5..10.0);
        let center = Point::new(unit(&mut rng, d).into_iter().map(|x| norm * x).collect()).unwrap();
        let target = Point::new(unit(&mut rng, d)).unwrap();
        let grid: Vec<f64> = (0..10).map(|i| norm * 0.099 * i as f64).collect();
        ensure(
            range_width_monotone(&center, &target, &grid).map_err(|e| e.to_string())?,
            "interval width decreased on a radius grid",
        )?;
    }
    Ok(format!("{samples} samples contained; 100 radius grids monotone"))
}

fn probe_correctness() -> Outcome {
    let mut rng = seed::rng(3);
    let mut worst: f64 = 0.0;
    for trial in 0..30 {
        let n = rng.random_range(2..20);
        let d = rng.random_range(1..10);
        let data: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let positive: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let problem = BinaryProblem::new(&rows, positive, 1.0, trial % 2 == 1);
        let params: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, grad) = problem.objective(&params);
        for j in 0..=d {
            let h = 1e-6;
            let mut up = params.clone();
            let mut down = params.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (problem.loss(&up) - problem.loss(&down)) / (2.0 * h);
            worst = worst.max((grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-8));
        }
    }
    ensure(worst < 1e-4, format!("gradient max relative error {worst:.2e}"))?;

    let ds = blobs(10, 32, 10.0, 1.0, 10, 11).map_err(|e| e.to_string())?;
    let model = train_ovr_logistic(&ds, &TrainOptions::default()).map_err(|e| e.to_string())?;
    let acc = evaluate(&model, &ds).map_err(|e| e.to_string())?.overall_accuracy;
    ensure(acc > 0.95, format!("blob accuracy {acc}"))?;

    let fx = FrequencyFixture {
        words_per_decade: 12,
        ..FrequencyFixture::default()
    };
    let c = fx.build().map_err(|e| e.to_string())?;
    let words: Vec<String> = c.cohorts.keys().cloned().collect();
    let run = || {
        let part = partition_classes(&words, 3, 20, 5)?;
        run_identity_probe(&c.cohorts, &part, &TrainOptions::default(), 10, 5)
    };
    let a = run().map_err(|e| e.to_string())?;
    let b = run().map_err(|e| e.to_string())?;
    let s = exec::sequential(run).map_err(|e| e.to_string())?;
    ensure(a == b && a == s, "same-seed retraining changed the reports")?;
    let m2 = train_ovr_logistic(&ds, &TrainOptions::default()).map_err(|e| e.to_string())?;
    let bits = |m: &wordspace::probes::LinearClassifier| -> Vec<u64> { m.weights.iter().flatten().map(|w| w.to_bits()).collect() };
    ensure(bits(&model) == bits(&m2), "same-seed weights differ")?;
    Ok(format!("gradient rel err {worst:.1e}; blob accuracy {acc:.3}; reruns bit-identical"))
}

fn planted_trends() -> Outcome {
    let c = FrequencyFixture::default().build().map_err(|e| e.to_string())?;
    let words: Vec<String> = c.cohorts.keys().cloned().collect();
    let part = partition_classes(&words, 2, 100, 1).map_err(|e| e.to_string())?;
    let reports = run_identity_probe(&c.cohorts, &part, &TrainOptions::default(), 10, 1).map_err(|e| e.to_string())?;
    let rows = bin_error_rates(&reports, &c.lexicon, &Binning::Frequency(decade_edges())).map_err(|e| e.to_string())?;
    let pct: Vec<f64> = rows.iter().filter_map(|r| r.error_pct()).collect();
    ensure(pct.len() == 5, format!("{} nonempty frequency bins", pct.len()))?;
    ensure(pct.windows(2).all(|w| w[0] < w[1]), format!("bin error % not increasing: {pct:?}"))?;

    let ctx = ContextFixture::default().build();
    let rates = context_retrieval_error_rates(&ctx.records, &ctx.words, 30, &TrainOptions::default()).map_err(|e| e.to_string())?;
    let x: Vec<f64> = rates.iter().map(|r| r.rate()).collect();
    let y: Vec<f64> = rates.iter().map(|r| (ctx.lexicon[&r.word].frequency as f64).log10()).collect();
    let r = pearson(&PairedSeries::new(x, y).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(r < -0.5, format!("context retrieval r = {r:.3}"))?;
    let shown: Vec<String> = pct.iter().map(|p| format!("{p:.1}")).collect();
    Ok(format!("identity error % by bin [{}]; context retrieval r = {r:.3}", shown.join(", ")))
}

fn distortion_oracle() -> Outcome {
    let mut rng = seed::rng(404);
    let n = 2000;
    let mut pairs: Vec<SimilarityPair> = (0..n)
        .map(|i| {
            let cos: f64 = rng.random_range(-0.1..0.95);
            let human = (8.0 * cos + 1.0 + rng.random_range(-2.0..2.0)).clamp(0.0, 10.0);
            let mut p = SimilarityPair::new("a", "b", i, i, human).with_cosine(cos);
            let r1 = rng.random_range(50.0..250.0);
            let r2 = rng.random_range(50.0..250.0);
            p.radius1 = Some(r1);
            p.radius2 = Some(r2);
            p.union_radius = Some(f64::max(r1, r2) + rng.random_range(0.0..60.0));
            p
        })
        .collect();
    calibrate_and_score(&mut pairs).map_err(|e| e.to_string())?;
    let total: f64 = pairs.iter().map(|p| p.residual.unwrap()).sum();
    ensure(total.abs() < 1e-6 * n as f64, format!("residual sum {total:.3e}"))?;

    let human: Vec<f64> = pairs.iter().map(|p| p.human_score).collect();
    let groups = brute_quartiles(&human);
    let mut worst: f64 = 0.0;
    for mode in [PairMetric::Union, PairMetric::Sum, PairMetric::Mean] {
        let got = quartile_residual_correlation(&pairs, mode).map_err(|e| e.to_string())?;
        for (q, group) in groups.iter().enumerate() {
            let x: Vec<f64> = group.iter().map(|&i| pairs[i].human_score - pairs[i].predicted.unwrap()).collect();
            let y: Vec<f64> = group
                .iter()
                .map(|&i| {
                    let p = &pairs[i];
                    match mode {
                        PairMetric::Union => p.union_radius.unwrap(),
                        PairMetric::Sum => p.radius1.unwrap() + p.radius2.unwrap(),
                        PairMetric::Mean => 0.5 * (p.radius1.unwrap() + p.radius2.unwrap()),
                    }
                })
                .collect();
            worst = worst.max((got[q] - brute_pearson(&x, &y)).abs());
        }
    }
    ensure(worst < 1e-9, format!("quartile correlations differ from brute force by {worst:.2e}"))?;

    let null = null_pairs(800, 17);
    let r = quartile_residual_correlation(&null, PairMetric::Union).map_err(|e| e.to_string())?;
    ensure(r.iter().all(|v| v.abs() < 0.2), format!("null fixture correlations {r:?}"))?;
    let max_null = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(format!("|Σ residual| = {:.1e}; brute-force gap {worst:.1e}; null max |r| = {max_null:.3}", total.abs()))
}

fn stats_exactness() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let s = |x: &[f64], y: &[f64]| PairedSeries::new(x.to_vec(), y.to_vec()).unwrap();
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    ensure(close(pearson(&s(&x, &y)).unwrap(), 1.0), "pearson of y = 2x + 1")?;
    ensure(close(pearson(&s(&x, &neg)).unwrap(), -1.0), "pearson of y = -x")?;
    // Sxy = 3 and Sxx = Syy = 5 about the common mean 2.5.
    let small = pearson(&s(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0])).unwrap();
    ensure(close(small, 0.6), format!("pearson small case {small}"))?;
    let cubes: Vec<f64> = x.iter().map(|v| v * v * v).collect();
    ensure(close(spearman(&s(&x, &cubes)).unwrap(), 1.0), "spearman monotone")?;
    ensure(close(spearman(&s(&x, &neg)).unwrap(), -1.0), "spearman reversed")?;
    let tied = spearman(&s(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0])).unwrap();
    let by_hand = pearson(&s(&[1.0, 2.5, 2.5, 4.0], &[1.0, 2.0, 3.0, 4.0])).unwrap();
    ensure(close(tied, by_hand), "spearman ties")?;
    let line: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
    let fit = linear_fit(&s(&x, &line)).unwrap();
    ensure(close(fit.slope, 3.0) && close(fit.intercept, -2.0) && close(fit.r_squared, 1.0), "fit of y = 3x - 2")?;
    let cloud = linear_fit(&s(&[-2.0, -1.0, 1.0, 2.0, -2.0, -1.0, 1.0, 2.0], &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0])).unwrap();
    ensure(close(cloud.slope, 0.0), "symmetric cloud slope")?;
    Ok(format!("documented cases exact; small pearson case = {small}"))
}

fn format_round_trips() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = seed::rng(55);
    let records: Vec<EmbeddingRecord> = (0..50)
        .map(|i| {
            let v: Vec<f64> = (0..16).map(|_| f64::from(rng.random::<f32>() - 0.5)).collect();
            let r = EmbeddingRecord::new(format!("tok{}", i % 7), i, if i % 2 == 0 { "base" } else { "artificial" }, v);
            if i % 5 == 0 {
                r.masked()
            } else {
                r
            }
        })
        .collect();
    let mut w = Emb1Writer::new(Vec::new(), 16, records.len() as u64).map_err(|e| e.to_string())?;
    for r in &records {
        w.write(r).map_err(|e| e.to_string())?;
    }
    let bytes = w.finish().map_err(|e| e.to_string())?;
    let back: Vec<EmbeddingRecord> = Emb1Reader::new(Cursor::new(&bytes))
        .map_err(|e| e.to_string())?
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(back == records, "EMB1 round trip changed records")?;

    let record_len = 2 + 4 + 4 + 1 + 16 + 16 * 4;
    let cut = 16 + 3 * record_len + 10;
    let truncated: Result<Vec<_>, _> = Emb1Reader::new(Cursor::new(&bytes[..cut])).unwrap().collect();
    ensure(
        matches!(truncated, Err(Error::Truncated { offset }) if offset == (16 + 3 * record_len) as u64),
        "truncated EMB1 not reported at the record offset",
    )?;
    ensure(matches!(Emb1Reader::new(Cursor::new(&b"EMB2rest-of-header"[..])), Err(Error::BadHeader(_))), "bad magic")?;

    let mut lexicon = Lexicon::new();
    for (i, w) in ["river", "bank", "über", "a"].iter().enumerate() {
        lexicon.insert(
            w.to_string(),
            LexiconEntry {
                word: w.to_string(),
                frequency: 10u64.pow(i as u32 + 2) + 7,
                sense_count: if i == 2 { None } else { Some(i as u32 + 1) },
                token_count: i as u32 + 1,
                first_token_category: FirstTokenCategory::ALL[i % 3],
            },
        );
    }
    let lex_path = dir.path().join("lexicon.tsv");
    write_lexicon(&lex_path, &lexicon).map_err(|e| e.to_string())?;
    ensure(read_lexicon(&lex_path).map_err(|e| e.to_string())? == lexicon, "lexicon round trip")?;
    std::fs::write(&lex_path, "word\tfrequency\tsenses\ttokens\tfirst_token_category\nwar\t3,000\t2\t1\tin_vocab_word\n").unwrap();
    ensure(matches!(read_lexicon(&lex_path), Err(Error::Parse { line: 2, .. })), "lexicon parse error line")?;

    let pairs: Vec<SimilarityPair> = (0..30)
        .map(|i| SimilarityPair::new(&format!("w{i}"), &format!("v{i}"), i, i + 100, f64::from(i) / 3.0))
        .collect();
    let pairs_path = dir.path().join("pairs.tsv");
    write_similarity_pairs(&pairs_path, &pairs).map_err(|e| e.to_string())?;
    ensure(read_similarity_pairs(&pairs_path).map_err(|e| e.to_string())? == pairs, "pairs round trip")?;
    std::fs::write(&pairs_path, "word1\tword2\tcontext1_id\tcontext2_id\thuman_score\na\tb\t1\t2\t3\nc\td\t1\t2\t10.5\n").unwrap();
    ensure(matches!(read_similarity_pairs(&pairs_path), Err(Error::Parse { line: 3, .. })), "pairs range error line")?;

    let mut table = Table::new("fig2", &["word", "log_frequency", "radius", "n"]);
    for i in 0..20 {
        table.push(vec![Cell::Text(format!("w,{i}")), Cell::Num(2.0 + i as f64 / 7.0), Cell::Num(100.0 + i as f64 * 1.5), Cell::Int(i)]);
    }
    let written = emit_report(std::slice::from_ref(&table), dir.path(), ReportFormat::Csv).map_err(|e| e.to_string())?;
    let parsed = parse_csv_table(&written[0], "fig2").map_err(|e| e.to_string())?;
    ensure(parsed.rendered() == table.rendered() && parsed.columns == table.columns, "CSV report round trip")?;
    Ok("EMB1, lexicon, pairs and CSV round-trip; corruption located".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("MEB oracle equivalence", meb_oracle_equivalence),
        ("MEB certificate at scale", meb_certificate_at_scale),
        ("Volume-ratio anchor", volume_ratio_anchor),
        ("Theory containment", theory_containment),
        ("Probe correctness", probe_correctness),
        ("Planted trend reproduction", planted_trends),
        ("Distortion pipeline oracle", distortion_oracle),
        ("Stats exactness", stats_exactness),
        ("Format round-trips", format_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
