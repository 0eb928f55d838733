//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! seed = 7
//! epsilon = 0.001
//! embeddings = data/base.emb1
//! freq_edges = 100, 1000, 10000
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use crate::distortion::PairMetric;
use crate::geo::Reduction;
use crate::geometry::{RadiusParams, DEFAULT_EPSILON};
use crate::probes::TrainOptions;
use crate::stats::decade_edges;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub epsilon: f64,
    pub sample_size: usize,
    pub trials: usize,
    pub l2_strength: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub balanced: bool,
    pub models: usize,
    pub classes_per_model: usize,
    pub test_per_class: usize,
    pub contexts: usize,
    pub threshold: f64,
    pub instances: usize,
    pub reduction: Reduction,
    pub metric: PairMetric,
    pub single_word_only: bool,
    pub freq_edges: Vec<f64>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub countries: Option<PathBuf>,
    pub cities: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainOptions::default();
        RunConfig {
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            sample_size: 10,
            trials: 5,
            l2_strength: train.l2_strength,
            tol: train.tol,
            max_iter: train.max_iter,
            balanced: false,
            models: 24,
            classes_per_model: 1000,
            test_per_class: 10,
            contexts: 30,
            threshold: 0.7,
            instances: 10,
            reduction: Reduction::Mean,
            metric: PairMetric::Union,
            single_word_only: false,
            freq_edges: decade_edges(),
            embeddings: None,
            lexicon: None,
            pairs: None,
            countries: None,
            cities: None,
            vocab: None,
            templates: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::parse(&text, &path.display().to_string(), base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses config text; `base` anchors relative paths. Does not validate.
    pub fn parse(text: &str, origin: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected `key = value`".into()))?;
            cfg.set(key, value, base).map_err(|e| err(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{v}`")))
        }
        let path = |v: &str| Some(base.join(v));
        match key {
            "seed" => self.seed = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "sample_size" => self.sample_size = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "l2_strength" => self.l2_strength = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "balanced" => self.balanced = num(key, value)?,
            "models" => self.models = num(key, value)?,
            "classes_per_model" => self.classes_per_model = num(key, value)?,
            "test_per_class" => self.test_per_class = num(key, value)?,
            "contexts" => self.contexts = num(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "instances" => self.instances = num(key, value)?,
            "reduction" => self.reduction = value.parse()?,
            "metric" => self.metric = value.parse()?,
            "single_word_only" => self.single_word_only = num(key, value)?,
            "freq_edges" => {
                self.freq_edges = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            "embeddings" => self.embeddings = path(value),
            "lexicon" => self.lexicon = path(value),
            "pairs" => self.pairs = path(value),
            "countries" => self.countries = path(value),
            "cities" => self.cities = path(value),
            "vocab" => self.vocab = path(value),
            "templates" => self.templates = path(value),
            "out" => self.out = path(value),
            _ => return Err(Error::invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Range checks plus existence of every referenced input path.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::invalid(what.to_string())) };
        check(self.epsilon > 0.0 && self.epsilon <= 0.5, "epsilon must lie in (0, 0.5]")?;
        check(self.sample_size >= 1, "sample_size must be at least 1")?;
        check(self.trials >= 1, "trials must be at least 1")?;
        check(self.l2_strength >= 0.0, "l2_strength must be nonnegative")?;
        check(self.tol > 0.0, "tol must be positive")?;
        check(self.max_iter >= 1, "max_iter must be at least 1")?;
        check(self.models >= 1 && self.classes_per_model >= 2, "need at least one model of 2+ classes")?;
        check(self.test_per_class >= 1, "test_per_class must be at least 1")?;
        check(self.contexts >= 2, "contexts must be at least 2")?;
        check((-1.0..=1.0).contains(&self.threshold), "threshold must lie in [-1, 1]")?;
        check(self.instances >= 1, "instances must be at least 1")?;
        check(
            !self.freq_edges.is_empty() && self.freq_edges.windows(2).all(|w| w[0] < w[1]),
            "freq_edges must be strictly ascending",
        )?;
        let inputs = [
            &self.embeddings,
            &self.lexicon,
            &self.pairs,
            &self.countries,
            &self.cities,
            &self.vocab,
            &self.templates,
        ];
        for p in inputs.into_iter().flatten() {
            if !p.exists() {
                return Err(Error::invalid(format!("input path {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn radius_params(&self) -> RadiusParams {
        RadiusParams {
            sample_size: self.sample_size,
            trials: self.trials,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            l2_strength: self.l2_strength,
            tol: self.tol,
            max_iter: self.max_iter,
            balanced: self.balanced,
        }
    }
}
