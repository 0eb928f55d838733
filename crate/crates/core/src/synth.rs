//! Seeded synthetic fixtures with planted structure.
//!
//! Used by tests, benches and the CLI demo paths; every generator is a pure
//! function of its parameters.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distortion::SimilarityPair;
use crate::io::EmbeddingRecord;
use crate::lexicon::{FirstTokenCategory, Lexicon, LexiconEntry};
use crate::probes::{LabeledPoint, ProbeDataset};
use crate::{seed, Point, Result, SiblingCohort};

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `n` draws from an isotropic Gaussian around `center`.
pub fn gaussian_points<R: Rng>(rng: &mut R, center: &[f64], sigma: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let coords = center.iter().map(|c| c + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
            Point::new(coords).expect("finite gaussian draw")
        })
        .collect()
}

fn entry(word: &str, frequency: u64) -> LexiconEntry {
    LexiconEntry {
        word: word.to_string(),
        frequency,
        sense_count: Some(1),
        token_count: 1,
        first_token_category: FirstTokenCategory::InVocabWord,
    }
}

/// Word cohorts whose spread grows with log frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFixture {
    pub words_per_decade: usize,
    /// Decades spanned starting at 10², one bin each.
    pub decades: usize,
    pub dim: usize,
    pub points_per_word: usize,
    /// σ of a word equals `sigma_per_decade · log10(frequency)`.
    pub sigma_per_decade: f64,
    /// σ of the word centers around the origin.
    pub center_spread: f64,
    pub seed: u64,
}

impl Default for FrequencyFixture {
    fn default() -> Self {
        FrequencyFixture {
            words_per_decade: 40,
            decades: 5,
            dim: 32,
            points_per_word: 40,
            sigma_per_decade: 0.2,
            center_spread: 1.0,
            seed: 0,
        }
    }
}

pub struct FrequencyCohorts {
    pub cohorts: BTreeMap<String, SiblingCohort>,
    pub lexicon: Lexicon,
}

impl FrequencyFixture {
    pub fn sigma(&self, frequency: u64) -> f64 {
        self.sigma_per_decade * (frequency as f64).log10()
    }

    pub fn build(&self) -> Result<FrequencyCohorts> {
        let mut cohorts = BTreeMap::new();
        let mut lexicon = Lexicon::new();
        for decade in 0..self.decades {
            for k in 0..self.words_per_decade {
                let word = format!("f{decade}w{k:04}");
                let mut rng = seed::rng(seed::derive(self.seed, &word));
                let exponent = 2.0 + decade as f64 + rng.random::<f64>();
                let frequency = 10f64.powf(exponent).floor() as u64;
                let center = gaussian_vector(&mut rng, self.dim, self.center_spread);
                let points = gaussian_points(&mut rng, &center, self.sigma(frequency), self.points_per_word);
                cohorts.insert(word.clone(), SiblingCohort::new(word.as_str(), "synthetic", points)?);
                lexicon.insert(word.clone(), entry(&word, frequency));
            }
        }
        Ok(FrequencyCohorts { cohorts, lexicon })
    }
}

/// Context-retrieval sweep. Each context has a shared signal vector; a
/// word's embedding in a context carries that signal with a weight growing
/// with log frequency, on top of a fixed word vector and noise. Mask
/// embeddings carry the signal at full weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextFixture {
    pub words: usize,
    pub contexts: usize,
    pub dim: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for ContextFixture {
    fn default() -> Self {
        ContextFixture {
            words: 500,
            contexts: 30,
            dim: 32,
            noise: 1.0,
            seed: 0,
        }
    }
}

pub struct ContextRecords {
    pub records: Vec<EmbeddingRecord>,
    pub words: Vec<String>,
    pub lexicon: Lexicon,
}

impl ContextFixture {
    pub fn build(&self) -> ContextRecords {
        let mut rng = seed::rng(seed::derive(self.seed, "contexts"));
        let signals: Vec<Vec<f64>> = (0..self.contexts).map(|_| gaussian_vector(&mut rng, self.dim, 1.0)).collect();
        let mut records = Vec::with_capacity(self.words * self.contexts * 2);
        let mut words = Vec::with_capacity(self.words);
        let mut lexicon = Lexicon::new();
        for i in 0..self.words {
            let word = format!("c{i:04}");
            let mut rng = seed::rng(seed::derive(self.seed, &word));
            let exponent = 2.0 + 5.0 * rng.random::<f64>();
            let weight = 0.15 * (exponent - 1.0);
            let own = gaussian_vector(&mut rng, self.dim, 1.0);
            for (ctx, signal) in signals.iter().enumerate() {
                let mask: Vec<f64> = signal.iter().map(|s| s + 0.3 * self.noise * rng.sample::<f64, _>(StandardNormal)).collect();
                let emb: Vec<f64> = signal
                    .iter()
                    .zip(&own)
                    .map(|(s, o)| weight * s + o + self.noise * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                records.push(EmbeddingRecord::new(word.as_str(), ctx as u32, "artificial", mask).masked());
                records.push(EmbeddingRecord::new(word.as_str(), ctx as u32, "artificial", emb));
            }
            lexicon.insert(word.clone(), entry(&word, 10f64.powf(exponent).floor() as u64));
            words.push(word);
        }
        ContextRecords { records, words, lexicon }
    }
}

/// One-shot Gaussian blobs: class centers on scaled coordinate axes, so any
/// two centers are `separation · sigma` apart.
pub fn blobs(classes: usize, dim: usize, separation: f64, sigma: f64, test_per_class: usize, seed: u64) -> Result<ProbeDataset> {
    assert!(classes <= dim, "blob centers need one axis per class");
    let mut rng = seed::rng(seed);
    let scale = separation * sigma / std::f64::consts::SQRT_2;
    let mut train = Vec::with_capacity(classes);
    let mut test = Vec::with_capacity(classes * test_per_class);
    for k in 0..classes {
        let mut center = vec![0.0; dim];
        center[k] = scale;
        let mut pts = gaussian_points(&mut rng, &center, sigma, test_per_class + 1).into_iter();
        train.push(LabeledPoint::new(k, pts.next().expect("one draw")));
        test.extend(pts.map(|p| LabeledPoint::new(k, p)));
    }
    ProbeDataset::new((0..classes).map(|k| format!("class{k}")).collect(), train, test)
}

/// One Gaussian cohort per name with the given per-coordinate σ.
pub fn scaled_cohorts(names_and_scales: &[(String, f64)], dim: usize, points: usize, seed: u64) -> Result<BTreeMap<String, SiblingCohort>> {
    names_and_scales
        .iter()
        .map(|(name, scale)| {
            let mut rng = seed::rng(seed::derive(seed, name));
            let center = gaussian_vector(&mut rng, dim, 10.0);
            let pts = gaussian_points(&mut rng, &center, *scale, points);
            Ok((name.clone(), SiblingCohort::new(name.as_str(), "synthetic", pts)?))
        })
        .collect()
}

/// Pairs with scores in `[0, 10]` and residuals independent of the pair
/// radii.
pub fn null_pairs(n: usize, seed: u64) -> Vec<SimilarityPair> {
    let mut rng = seed::rng(seed);
    (0..n)
        .map(|i| {
            let mut p = SimilarityPair::new("a", "b", i as u32, i as u32, 10.0 * rng.random::<f64>());
            let r1 = 100.0 + 50.0 * rng.random::<f64>();
            let r2 = 100.0 + 50.0 * rng.random::<f64>();
            p.radius1 = Some(r1);
            p.radius2 = Some(r2);
            p.union_radius = Some(r1.max(r2) + 20.0 * rng.random::<f64>());
            p.residual = Some(rng.sample::<f64, _>(StandardNormal));
            p
        })
        .collect()
}
