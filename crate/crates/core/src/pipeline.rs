//! End-to-end analyses that turn loaded inputs into long-format report
//! tables. The command-line front end is a thin layer over these.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distortion::{
    attach_cosines, attach_radii, calibrate_and_score, quartile_residual_correlation, residual_frequency_correlation,
    FrequencyAggregate, PairMetric, SimilarityPair,
};
use crate::geo::{
    country_radii, gdp_radius_correlation, region_radius_table, select_countries, similar_country_counts, vocab_coverage,
    CityRecord, CountryRecord, SimilarityQuery,
};
use crate::geometry::{cohort_radius, meb_coreset, pairwise_mean_distance, volume_ratio, RadiusParams};
use crate::io::{cohorts_from_records, Cell, EmbeddingRecord, Table};
use crate::lexicon::Lexicon;
use crate::probes::{
    bin_error_rates, context_retrieval_error_rates, partition_classes, run_identity_probe, Binning, TrainOptions,
};
use crate::stats::{pearson, spearman, PairedSeries};
use crate::theory::{cosine_distance, cosine_distance_range, CosineRangeQuery};
use crate::{exec, seed, Error, Point, Result, SiblingCohort};

/// Cohorts keyed by source, then word.
pub type SourceCohorts = BTreeMap<String, BTreeMap<String, SiblingCohort>>;

pub fn cohorts_by_source(records: &[EmbeddingRecord]) -> Result<SourceCohorts> {
    let mut out = SourceCohorts::new();
    for ((source, word), cohort) in cohorts_from_records(records)? {
        out.entry(source).or_default().insert(word, cohort);
    }
    if out.is_empty() {
        return Err(Error::invalid("no non-mask embeddings in input"));
    }
    Ok(out)
}

/// The cohorts of one source. With `source = None` the input must hold
/// exactly one source.
pub fn single_source(mut all: SourceCohorts, source: Option<&str>) -> Result<(String, BTreeMap<String, SiblingCohort>)> {
    match source {
        Some(s) => all
            .remove_entry(s)
            .ok_or_else(|| Error::Missing(format!("source `{s}` in embeddings"))),
        None if all.len() == 1 => Ok(all.pop_first().expect("one source")),
        None => Err(Error::invalid(format!(
            "embeddings hold {} sources ({}); pick one with --source",
            all.len(),
            all.keys().cloned().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn log10_frequency(lexicon: Option<&Lexicon>, word: &str) -> Option<f64> {
    lexicon.and_then(|l| l.get(word)).map(|e| (e.frequency as f64).log10())
}

fn correlations(x: Vec<f64>, y: Vec<f64>) -> (Cell, Cell) {
    match PairedSeries::new(x, y) {
        Ok(s) => (
            pearson(&s).map_or(Cell::Empty, Cell::Num),
            spearman(&s).map_or(Cell::Empty, Cell::Num),
        ),
        Err(_) => (Cell::Empty, Cell::Empty),
    }
}

/// Per-word radius and spread, joined with lexicon metadata when given,
/// plus radius-versus-frequency correlations per source.
pub fn radius_tables(cohorts: &SourceCohorts, lexicon: Option<&Lexicon>, params: &RadiusParams) -> Result<Vec<Table>> {
    let mut rows = Table::new(
        "fig1_radius",
        &[
            "source",
            "word",
            "points",
            "radius",
            "mean_distance",
            "log10_frequency",
            "senses",
            "tokens",
            "first_token_category",
        ],
    );
    let mut summary = Table::new("fig1_summary", &["source", "words", "pearson_log_frequency", "spearman_log_frequency"]);
    for (source, by_word) in cohorts {
        let list: Vec<&SiblingCohort> = by_word.values().collect();
        let measured = exec::try_map(&list, |c| Ok::<_, Error>((cohort_radius(c, params)?, pairwise_mean_distance(c.points())?)))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (c, (radius, spread)) in list.iter().zip(measured) {
            let entry = lexicon.and_then(|l| l.get(c.word()));
            if let Some(f) = log10_frequency(lexicon, c.word()) {
                xs.push(f);
                ys.push(radius);
            }
            rows.push(vec![
                source.as_str().into(),
                c.word().into(),
                c.len().into(),
                radius.into(),
                spread.into(),
                log10_frequency(lexicon, c.word()).into(),
                entry.and_then(|e| e.sense_count).map_or(Cell::Empty, |s| Cell::Int(i64::from(s))),
                entry.map_or(Cell::Empty, |e| Cell::Int(i64::from(e.token_count))),
                entry.map_or(Cell::Empty, |e| e.first_token_category.as_str().into()),
            ]);
        }
        let n = xs.len();
        let (p, s) = correlations(xs, ys);
        summary.push(vec![source.as_str().into(), n.into(), p, s]);
    }
    Ok(vec![rows, summary])
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySetup {
    pub models: usize,
    pub classes_per_model: usize,
    pub test_per_class: usize,
    pub freq_edges: Vec<f64>,
    pub seed: u64,
}

/// Word-identity probe errors aggregated by frequency, senses, subword
/// count and first-token category.
pub fn identity_tables(
    cohorts: &BTreeMap<String, SiblingCohort>,
    lexicon: &Lexicon,
    setup: &IdentitySetup,
    opts: &TrainOptions,
) -> Result<Vec<Table>> {
    let words: Vec<String> = cohorts
        .iter()
        .filter(|(w, c)| lexicon.contains_key(*w) && c.len() > setup.test_per_class)
        .map(|(w, _)| w.clone())
        .collect();
    let partition = partition_classes(&words, setup.models, setup.classes_per_model, setup.seed)?;
    let reports = run_identity_probe(cohorts, &partition, opts, setup.test_per_class, setup.seed)?;
    let mut table = Table::new("fig2_identity", &["binning", "bin", "words", "errors", "total", "error_pct"]);
    let binnings = [
        ("frequency", Binning::Frequency(setup.freq_edges.clone())),
        ("senses", Binning::Senses),
        ("tokens", Binning::Tokens),
        ("first_token", Binning::FirstToken),
    ];
    for (name, binning) in binnings {
        for row in bin_error_rates(&reports, lexicon, &binning)? {
            table.push(vec![
                name.into(),
                row.label.clone().into(),
                row.words.into(),
                row.errors.into(),
                row.total.into(),
                row.error_pct().into(),
            ]);
        }
    }
    let mut models = Table::new("identity_models", &["model", "classes", "accuracy"]);
    for (i, r) in reports.iter().enumerate() {
        models.push(vec![i.into(), r.per_class.len().into(), r.overall_accuracy.into()]);
    }
    Ok(vec![table, models])
}

/// Context-retrieval error rate per word against log frequency.
pub fn context_tables(records: &[EmbeddingRecord], lexicon: &Lexicon, contexts: usize, opts: &TrainOptions) -> Result<Vec<Table>> {
    let masked: HashSet<&str> = records.iter().filter(|r| r.is_mask).map(|r| r.token.as_str()).collect();
    let words: Vec<String> = lexicon.keys().filter(|w| masked.contains(w.as_str())).cloned().collect();
    if words.is_empty() {
        return Err(Error::invalid("no lexicon word has mask embeddings"));
    }
    let rates = context_retrieval_error_rates(records, &words, contexts, opts)?;
    let mut table = Table::new("fig5_context", &["word", "log10_frequency", "errors", "total", "error_rate"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in &rates {
        let f = (lexicon[&r.word].frequency as f64).log10();
        xs.push(f);
        ys.push(r.rate());
        table.push(vec![r.word.clone().into(), f.into(), r.errors.into(), r.total.into(), r.rate().into()]);
    }
    let n = xs.len();
    let (p, s) = correlations(xs, ys);
    let mut summary = Table::new("fig5_summary", &["words", "pearson_log_frequency", "spearman_log_frequency"]);
    summary.push(vec![n.into(), p, s]);
    Ok(vec![table, summary])
}

/// Calibrates cosine against human scores and correlates residuals with
/// cohort size, per human-score quartile.
pub fn distortion_tables(
    mut pairs: Vec<SimilarityPair>,
    records: &[EmbeddingRecord],
    cohorts: &BTreeMap<String, SiblingCohort>,
    lexicon: Option<&Lexicon>,
    params: &RadiusParams,
) -> Result<Vec<Table>> {
    attach_cosines(&mut pairs, records)?;
    let fit = calibrate_and_score(&mut pairs)?;
    attach_radii(&mut pairs, cohorts, params)?;
    let mut rows = Table::new(
        "fig4_pairs",
        &[
            "word1", "word2", "context1_id", "context2_id", "human_score", "cosine", "predicted", "residual", "radius1",
            "radius2", "union_radius",
        ],
    );
    for p in &pairs {
        rows.push(vec![
            p.word1.clone().into(),
            p.word2.clone().into(),
            Cell::Int(i64::from(p.context1_id)),
            Cell::Int(i64::from(p.context2_id)),
            p.human_score.into(),
            p.cosine.into(),
            p.predicted.into(),
            p.residual.into(),
            p.radius1.into(),
            p.radius2.into(),
            p.union_radius.into(),
        ]);
    }
    let mut quartiles = Table::new("fig4_quartiles", &["metric", "quartile", "pearson"]);
    for mode in [PairMetric::Union, PairMetric::Sum, PairMetric::Mean] {
        for (q, r) in quartile_residual_correlation(&pairs, mode)?.into_iter().enumerate() {
            quartiles.push(vec![mode.as_str().into(), (q + 1).into(), r.into()]);
        }
    }
    let mut calibration = Table::new("distortion_calibration", &["pairs", "slope", "intercept", "r_squared"]);
    calibration.push(vec![pairs.len().into(), fit.slope.into(), fit.intercept.into(), fit.r_squared.into()]);
    let mut tables = vec![rows, quartiles, calibration];
    if let Some(lex) = lexicon {
        let mut freq = Table::new("distortion_frequency", &["aggregate", "pearson"]);
        for agg in FrequencyAggregate::ALL {
            freq.push(vec![agg.as_str().into(), residual_frequency_correlation(&pairs, lex, agg)?.into()]);
        }
        tables.push(freq);
    }
    Ok(tables)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoSetup {
    pub excluded: Vec<String>,
    pub single_word_only: bool,
    pub query: SimilarityQuery,
}

/// Region radius table, GDP correlation and similar-country counts for
/// every source, plus city coverage when cities and a vocabulary are given.
pub fn geo_tables(
    countries: &[CountryRecord],
    cohorts: &SourceCohorts,
    coverage: Option<(&[CityRecord], &HashSet<String>)>,
    setup: &GeoSetup,
    params: &RadiusParams,
) -> Result<Vec<Table>> {
    let selected = select_countries(countries, &setup.excluded, setup.single_word_only);
    let mut radii = Vec::new();
    let mut gdp_rows = Table::new("fig3_gdp", &["source", "country", "region", "gdp", "log_gdp", "radius"]);
    let mut gdp_summary = Table::new(
        "fig3_summary",
        &["source", "countries", "pearson", "low_gdp_countries", "low_gdp_gap_pct"],
    );
    let mut similar = Table::new("table2_similar", &["source", "country", "region", "similar_countries"]);
    for (source, by_word) in cohorts {
        if !selected.iter().any(|c| by_word.contains_key(&c.name)) {
            continue;
        }
        let per_country = country_radii(&selected, by_word, params)?;
        for c in &selected {
            gdp_rows.push(vec![
                source.as_str().into(),
                c.name.as_str().into(),
                c.region.as_str().into(),
                c.gdp.into(),
                c.gdp.map(f64::ln).into(),
                per_country[&c.name].into(),
            ]);
        }
        let corr = gdp_radius_correlation(&selected, &per_country)?;
        gdp_summary.push(vec![
            source.as_str().into(),
            corr.countries.into(),
            corr.pearson.into(),
            corr.low_gdp_countries.into(),
            if corr.low_gdp_countries > 0 { corr.gap_percent().into() } else { Cell::Empty },
        ]);
        let subset: BTreeMap<String, SiblingCohort> = selected
            .iter()
            .map(|c| (c.name.clone(), by_word[&c.name].clone()))
            .collect();
        let counts = similar_country_counts(&subset, &setup.query)?;
        for c in &selected {
            similar.push(vec![
                source.as_str().into(),
                c.name.as_str().into(),
                c.region.as_str().into(),
                counts[&c.name].into(),
            ]);
        }
        radii.push((source.clone(), per_country));
    }
    if radii.is_empty() {
        return Err(Error::invalid("no embeddings for any selected country"));
    }
    let regions = region_radius_table(&selected, &radii)?;
    let mut table1 = Table::new("table1_regions", &["source", "region", "mean_radius", "percent_of_north_america"]);
    for (s, source) in regions.sources.iter().enumerate() {
        for (r, region) in regions.regions.iter().enumerate() {
            table1.push(vec![
                source.as_str().into(),
                region.as_str().into(),
                regions.mean_radius[s][r].into(),
                regions.percent[s][r].into(),
            ]);
        }
    }
    let mut tables = vec![table1, gdp_rows, gdp_summary, similar];
    if let Some((cities, vocab)) = coverage {
        let mut cov = Table::new("city_coverage", &["region", "cities", "in_vocab", "percent"]);
        for (region, c) in vocab_coverage(cities, vocab)? {
            cov.push(vec![region.as_str().into(), c.cities.into(), c.in_vocab.into(), c.percent().into()]);
        }
        tables.push(cov);
    }
    Ok(tables)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryCheck {
    pub dim: usize,
    pub center_norm: f64,
    pub radii: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for TheoryCheck {
    fn default() -> Self {
        TheoryCheck {
            dim: 768,
            center_norm: 10.0,
            radii: 10,
            samples: 10_000,
            seed: 0,
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Samples points uniformly inside balls of growing radius and checks that
/// every cosine distance to a fixed target falls inside the predicted
/// range and that the range widens with the radius. A failed check is an
/// [`Error::Invariant`].
pub fn theory_check(check: &TheoryCheck) -> Result<Vec<Table>> {
    if check.dim == 0 || check.radii == 0 || check.samples == 0 || check.center_norm.is_nan() || check.center_norm <= 0.0 {
        return Err(Error::invalid("theory check needs positive dim, radii, samples and center norm"));
    }
    let mut rng = seed::rng(check.seed);
    let center: Vec<f64> = random_unit(&mut rng, check.dim).into_iter().map(|x| x * check.center_norm).collect();
    let target = Point::new(random_unit(&mut rng, check.dim))?;
    let center_pt = Point::new(center.clone())?;
    let mut table = Table::new(
        "theory_ranges",
        &["radius", "predicted_lo", "predicted_hi", "observed_min", "observed_max", "samples"],
    );
    let mut last_width = 0.0;
    for k in 1..=check.radii {
        let radius = 1.2 * check.center_norm * k as f64 / check.radii as f64;
        let range = cosine_distance_range(&CosineRangeQuery::new(center_pt.clone(), radius, target.clone())?);
        let observed = exec::map_range(check.samples, |i| {
            let mut rng = seed::rng(seed::derive_index(check.seed ^ k as u64, i as u64));
            let dir = random_unit(&mut rng, check.dim);
            let rho = radius * rng.random::<f64>().powf(1.0 / check.dim as f64);
            let x: Vec<f64> = center.iter().zip(&dir).map(|(c, u)| c + rho * u).collect();
            cosine_distance(&x, target.coords())
        });
        let finite = observed.iter().copied().filter(|d| d.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
        if observed.iter().any(|d| d.is_finite() && !range.contains(*d, 1e-9)) {
            return Err(Error::Invariant(format!(
                "radius {radius}: observed [{lo}, {hi}] escapes predicted [{}, {}]",
                range.lo, range.hi
            )));
        }
        if range.width() + 1e-12 < last_width {
            return Err(Error::Invariant(format!("range width shrank at radius {radius}")));
        }
        last_width = range.width();
        table.push(vec![radius.into(), range.lo.into(), range.hi.into(), lo.into(), hi.into(), check.samples.into()]);
    }
    let mut volume = Table::new("volume_ratio", &["radius_factor", "dim", "ratio"]);
    for factor in [1.001, 1.01, 1.05, 1.1] {
        volume.push(vec![factor.into(), check.dim.into(), volume_ratio(factor, check.dim)?.into()]);
    }
    Ok(vec![table, volume])
}

/// Full-cohort enclosing balls, one row per `(source, word)`.
pub fn meb_table(cohorts: &SourceCohorts, epsilon: f64) -> Result<Table> {
    let list: Vec<(&String, &SiblingCohort)> = cohorts
        .iter()
        .flat_map(|(s, m)| m.values().map(move |c| (s, c)))
        .collect();
    let balls = exec::try_map(&list, |(_, c)| meb_coreset(c.points(), epsilon))?;
    let mut table = Table::new("meb", &["source", "word", "points", "dim", "radius", "epsilon", "support"]);
    for ((source, c), ball) in list.iter().zip(balls) {
        table.push(vec![
            source.as_str().into(),
            c.word().into(),
            c.len().into(),
            c.dim().into(),
            ball.radius.into(),
            ball.epsilon.into(),
            ball.support_size.into(),
        ]);
    }
    Ok(table)
}
