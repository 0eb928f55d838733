//! Distortion of cosine similarity relative to human similarity judgements.
//!
//! Cosine scores are calibrated to the human scale with a least-squares
//! line; the signed residual `human − predicted` is then correlated, per
//! human-score quartile, with the size of the words' enclosing balls. A
//! positive correlation means cosine under-rates the similarity of words
//! whose clouds are large.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::geometry::{cohort_radius, meb_coreset, sample_points, RadiusParams};
use crate::io::EmbeddingRecord;
use crate::lexicon::Lexicon;
use crate::point::dot;
use crate::stats::{linear_fit, pearson, quartile_split, LinearFit, PairedSeries};
use crate::{exec, Error, Point, Result, SiblingCohort};

/// A human-rated word pair in context, filled in stage by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub word1: String,
    pub word2: String,
    pub context1_id: u32,
    pub context2_id: u32,
    /// Mean human rating, `0` (unrelated) to `10` (most similar).
    pub human_score: f64,
    pub cosine: Option<f64>,
    pub predicted: Option<f64>,
    pub residual: Option<f64>,
    pub radius1: Option<f64>,
    pub radius2: Option<f64>,
    pub union_radius: Option<f64>,
}

impl SimilarityPair {
    pub fn new(word1: &str, word2: &str, context1_id: u32, context2_id: u32, human_score: f64) -> Self {
        SimilarityPair {
            word1: word1.to_string(),
            word2: word2.to_string(),
            context1_id,
            context2_id,
            human_score,
            cosine: None,
            predicted: None,
            residual: None,
            radius1: None,
            radius2: None,
            union_radius: None,
        }
    }

    pub fn with_cosine(mut self, cosine: f64) -> Self {
        self.cosine = Some(cosine);
        self
    }

    /// Size of the pair's word spaces under `mode`, once radii are attached.
    pub fn metric(&self, mode: PairMetric) -> Option<f64> {
        match mode {
            PairMetric::Union => self.union_radius,
            PairMetric::Sum => Some(self.radius1? + self.radius2?),
            PairMetric::Mean => Some(0.5 * (self.radius1? + self.radius2?)),
        }
    }

    fn label(&self) -> String {
        format!("{}/{}#{}/{}", self.word1, self.word2, self.context1_id, self.context2_id)
    }
}

pub fn cosine_similarity(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::invalid("cosine similarity of a zero vector"));
    }
    Ok((dot(a.coords(), b.coords()) / (na * nb)).clamp(-1.0, 1.0))
}

/// Looks up each pair's two contextual embeddings in `records` (non-mask
/// rows, matched on token and context id) and stores their cosine.
pub fn attach_cosines(pairs: &mut [SimilarityPair], records: &[EmbeddingRecord]) -> Result<()> {
    let mut index: HashMap<(&str, u32), &EmbeddingRecord> = HashMap::new();
    for r in records.iter().filter(|r| !r.is_mask) {
        index.entry((r.token.as_str(), r.context_id)).or_insert(r);
    }
    let lookup = |word: &str, ctx: u32| -> Result<Point> {
        let r = index
            .get(&(word, ctx))
            .ok_or_else(|| Error::Missing(format!("embedding of `{word}` in context {ctx}")))?;
        Point::new(r.vector.clone())
    };
    for pair in pairs.iter_mut() {
        let a = lookup(&pair.word1, pair.context1_id)?;
        let b = lookup(&pair.word2, pair.context2_id)?;
        pair.cosine = Some(cosine_similarity(&a, &b)?);
    }
    Ok(())
}

/// Fits `human ≈ slope·cosine + intercept` over all pairs and fills in
/// `predicted` and `residual = human − predicted`.
pub fn calibrate_and_score(pairs: &mut [SimilarityPair]) -> Result<LinearFit> {
    if pairs.len() < 2 {
        return Err(Error::invalid("calibration needs at least 2 pairs"));
    }
    let cosines = pairs
        .iter()
        .map(|p| p.cosine.ok_or_else(|| Error::Missing(format!("cosine for {}", p.label()))))
        .collect::<Result<Vec<_>>>()?;
    let human = pairs.iter().map(|p| p.human_score).collect();
    let fit = linear_fit(&PairedSeries::new(cosines.clone(), human)?)?;
    for (pair, c) in pairs.iter_mut().zip(cosines) {
        let predicted = fit.predict(c);
        pair.predicted = Some(predicted);
        pair.residual = Some(pair.human_score - predicted);
    }
    Ok(fit)
}

/// How the two words' ball sizes combine into one pair-level number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairMetric {
    /// Radius of one ball enclosing both words' sampled embeddings.
    #[default]
    Union,
    Sum,
    Mean,
}

impl PairMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            PairMetric::Union => "union",
            PairMetric::Sum => "sum",
            PairMetric::Mean => "mean",
        }
    }
}

impl fmt::Display for PairMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(PairMetric::Union),
            "sum" => Ok(PairMetric::Sum),
            "mean" => Ok(PairMetric::Mean),
            _ => Err(Error::invalid(format!("unknown pair metric `{s}` (union | sum | mean)"))),
        }
    }
}

/// Word → cohort for a single source.
pub type CohortIndex = BTreeMap<String, SiblingCohort>;

fn cohort<'a>(cohorts: &'a CohortIndex, word: &str) -> Result<&'a SiblingCohort> {
    cohorts.get(word).ok_or_else(|| Error::Missing(format!("cohort for `{word}`")))
}

/// Mean radius of the ball enclosing both cohorts' samples. Each trial uses
/// the same per-cohort samples as [`cohort_radius`]. Symmetric in `a`, `b`.
pub fn union_radius(a: &SiblingCohort, b: &SiblingCohort, params: &RadiusParams) -> Result<f64> {
    let (a, b) = if (a.word(), a.source()) <= (b.word(), b.source()) { (a, b) } else { (b, a) };
    if params.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let radii = exec::try_map_range(params.trials, |trial| {
        let mut pts: Vec<Point> = sample_points(a, params.sample_size, params.seed, trial)?
            .into_iter()
            .cloned()
            .collect();
        pts.extend(sample_points(b, params.sample_size, params.seed, trial)?.into_iter().cloned());
        meb_coreset(&pts, params.epsilon).map(|ball| ball.radius)
    })?;
    Ok(radii.iter().sum::<f64>() / radii.len() as f64)
}

pub fn pair_radius_metric(pair: &SimilarityPair, cohorts: &CohortIndex, mode: PairMetric, params: &RadiusParams) -> Result<f64> {
    let a = cohort(cohorts, &pair.word1)?;
    let b = cohort(cohorts, &pair.word2)?;
    Ok(match mode {
        PairMetric::Union => union_radius(a, b, params)?,
        PairMetric::Sum => cohort_radius(a, params)? + cohort_radius(b, params)?,
        PairMetric::Mean => 0.5 * (cohort_radius(a, params)? + cohort_radius(b, params)?),
    })
}

/// Fills `radius1`, `radius2` and `union_radius` for every pair. Word radii
/// are computed once per word.
pub fn attach_radii(pairs: &mut [SimilarityPair], cohorts: &CohortIndex, params: &RadiusParams) -> Result<()> {
    let mut words: Vec<&str> = pairs.iter().flat_map(|p| [p.word1.as_str(), p.word2.as_str()]).collect();
    words.sort_unstable();
    words.dedup();
    let radii = exec::try_map(&words, |w| cohort_radius(cohort(cohorts, w)?, params))?;
    let by_word: HashMap<String, f64> = words.iter().map(|w| w.to_string()).zip(radii).collect();
    let unions = exec::try_map(pairs, |p| union_radius(cohort(cohorts, &p.word1)?, cohort(cohorts, &p.word2)?, params))?;
    for (pair, u) in pairs.iter_mut().zip(unions) {
        pair.radius1 = Some(by_word[&pair.word1]);
        pair.radius2 = Some(by_word[&pair.word2]);
        pair.union_radius = Some(u);
    }
    Ok(())
}

/// Pearson(residual, pair metric) within each human-score quartile,
/// lowest quartile first.
pub fn quartile_residual_correlation(pairs: &[SimilarityPair], mode: PairMetric) -> Result<[f64; 4]> {
    if pairs.len() < 16 {
        return Err(Error::invalid(format!("quartile analysis needs at least 16 pairs, got {}", pairs.len())));
    }
    let residuals = pairs
        .iter()
        .map(|p| p.residual.ok_or_else(|| Error::Missing(format!("residual for {}", p.label()))))
        .collect::<Result<Vec<_>>>()?;
    let metrics = pairs
        .iter()
        .map(|p| p.metric(mode).ok_or_else(|| Error::Missing(format!("{mode} radius for {}", p.label()))))
        .collect::<Result<Vec<_>>>()?;
    let human: Vec<f64> = pairs.iter().map(|p| p.human_score).collect();
    let groups = quartile_split(&human)?;
    let mut out = [0.0; 4];
    for (slot, group) in out.iter_mut().zip(&groups) {
        let series = PairedSeries::new(
            group.iter().map(|&i| residuals[i]).collect(),
            group.iter().map(|&i| metrics[i]).collect(),
        )?;
        *slot = pearson(&series)?;
    }
    Ok(out)
}

/// How two words' frequencies combine for the residual–frequency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyAggregate {
    Min,
    Max,
    Mean,
}

impl FrequencyAggregate {
    pub const ALL: [FrequencyAggregate; 3] = [FrequencyAggregate::Min, FrequencyAggregate::Max, FrequencyAggregate::Mean];

    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyAggregate::Min => "min",
            FrequencyAggregate::Max => "max",
            FrequencyAggregate::Mean => "mean",
        }
    }
}

/// Pearson(residual, aggregated log10 frequency of the two words).
pub fn residual_frequency_correlation(pairs: &[SimilarityPair], lexicon: &Lexicon, agg: FrequencyAggregate) -> Result<f64> {
    let mut x = Vec::with_capacity(pairs.len());
    let mut y = Vec::with_capacity(pairs.len());
    for p in pairs {
        let f = |w: &str| {
            lexicon
                .get(w)
                .map(|e| (e.frequency as f64).log10())
                .ok_or_else(|| Error::Missing(w.to_string()))
        };
        let (a, b) = (f(&p.word1)?, f(&p.word2)?);
        x.push(p.residual.ok_or_else(|| Error::Missing(format!("residual for {}", p.label())))?);
        y.push(match agg {
            FrequencyAggregate::Min => a.min(b),
            FrequencyAggregate::Max => a.max(b),
            FrequencyAggregate::Mean => 0.5 * (a + b),
        });
    }
    pearson(&PairedSeries::new(x, y)?)
}
