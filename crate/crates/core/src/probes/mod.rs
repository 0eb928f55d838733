//! Linear probes over contextual embeddings.
//!
//! The identity probe asks which word an embedding belongs to; contextual
//! retrieval asks which sentence an embedding came from. Both are one-shot
//! one-vs-rest logistic regressions, and their error rates serve as a
//! measure of linear separability.

mod binning;
mod context;
mod logistic;

pub use binning::{bin_error_rates, BinRow, Binning};
pub use context::{build_context_retrieval_dataset, context_retrieval_error_rates, WordErrorRate};
pub use logistic::{
    fit_binary, train_ovr_logistic, BinaryFit, BinaryProblem, FitMeta, LinearClassifier, TrainOptions,
};

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use crate::geometry::sample_points;
use crate::point::common_dim;
use crate::{exec, seed, Error, Point, Result, SiblingCohort};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    /// Index into the dataset's class list.
    pub label: usize,
    pub point: Point,
}

impl LabeledPoint {
    pub fn new(label: usize, point: Point) -> Self {
        LabeledPoint { label, point }
    }
}

/// One-shot dataset: exactly one training point per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDataset {
    classes: Vec<String>,
    train: Vec<LabeledPoint>,
    test: Vec<LabeledPoint>,
    dim: usize,
}

impl ProbeDataset {
    pub fn new(classes: Vec<String>, mut train: Vec<LabeledPoint>, test: Vec<LabeledPoint>) -> Result<Self> {
        let unique: BTreeSet<&String> = classes.iter().collect();
        if unique.len() != classes.len() {
            return Err(Error::invalid("duplicate class label"));
        }
        train.sort_by_key(|lp| lp.label);
        let labels: Vec<usize> = train.iter().map(|lp| lp.label).collect();
        if labels != (0..classes.len()).collect::<Vec<_>>() {
            return Err(Error::invalid("one-shot datasets need exactly one training point per class"));
        }
        if let Some(bad) = test.iter().find(|lp| lp.label >= classes.len()) {
            return Err(Error::invalid(format!("test label {} has no class", bad.label)));
        }
        let all: Vec<Point> = train.iter().chain(&test).map(|lp| lp.point.clone()).collect();
        let dim = common_dim(&all)?;
        Ok(ProbeDataset {
            classes,
            train,
            test,
            dim,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn train(&self) -> &[LabeledPoint] {
        &self.train
    }

    pub fn test(&self) -> &[LabeledPoint] {
        &self.test
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same dataset with the training set used as the test set.
    pub fn train_as_test(&self) -> Self {
        ProbeDataset {
            test: self.train.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassTally {
    pub errors: usize,
    pub total: usize,
}

impl ClassTally {
    pub fn error_rate(&self) -> f64 {
        self.errors as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub per_class: BTreeMap<String, ClassTally>,
    pub overall_accuracy: f64,
}

impl ProbeReport {
    pub fn total(&self) -> usize {
        self.per_class.values().map(|t| t.total).sum()
    }

    pub fn errors(&self) -> usize {
        self.per_class.values().map(|t| t.errors).sum()
    }
}

/// Per-class error counts and overall accuracy on `dataset.test()`.
pub fn evaluate(model: &LinearClassifier, dataset: &ProbeDataset) -> Result<ProbeReport> {
    if dataset.test().is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    if model.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: dataset.dim(),
        });
    }
    if model.classes.len() != dataset.classes().len() {
        return Err(Error::invalid("model and dataset class counts differ"));
    }
    let predicted = exec::try_map(dataset.test(), |lp| model.predict_index(&lp.point))?;
    let mut per_class: BTreeMap<String, ClassTally> = dataset
        .classes()
        .iter()
        .map(|c| (c.clone(), ClassTally::default()))
        .collect();
    let mut correct = 0;
    for (lp, &pred) in dataset.test().iter().zip(&predicted) {
        let tally = per_class.get_mut(&dataset.classes()[lp.label]).expect("class present");
        tally.total += 1;
        if pred == lp.label {
            correct += 1;
        } else {
            tally.errors += 1;
        }
    }
    per_class.retain(|_, t| t.total > 0);
    Ok(ProbeReport {
        per_class,
        overall_accuracy: correct as f64 / predicted.len() as f64,
    })
}

/// Seeded shuffle of `words` cut into `models` disjoint lists of
/// `classes_per_model`.
pub fn partition_classes(words: &[String], models: usize, classes_per_model: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    let required = models * classes_per_model;
    if words.len() < required {
        return Err(Error::InsufficientWords {
            required,
            available: words.len(),
        });
    }
    let mut shuffled = words.to_vec();
    shuffled.shuffle(&mut seed::rng(seed));
    Ok(shuffled
        .chunks(classes_per_model)
        .take(models)
        .map(<[String]>::to_vec)
        .collect())
}

/// One-shot identity dataset over `cohorts`: per word one training point
/// and `test_per_class` further points, drawn without replacement.
pub fn build_identity_dataset(cohorts: &[&SiblingCohort], test_per_class: usize, seed: u64) -> Result<ProbeDataset> {
    let mut classes = Vec::with_capacity(cohorts.len());
    let mut train = Vec::with_capacity(cohorts.len());
    let mut test = Vec::with_capacity(cohorts.len() * test_per_class);
    for (label, cohort) in cohorts.iter().enumerate() {
        let mut drawn = sample_points(cohort, test_per_class + 1, seed, 0)?.into_iter();
        classes.push(cohort.word().to_string());
        train.push(LabeledPoint::new(label, drawn.next().expect("nonempty").clone()));
        test.extend(drawn.map(|p| LabeledPoint::new(label, p.clone())));
    }
    ProbeDataset::new(classes, train, test)
}

/// Trains and evaluates one identity probe per class list in `partition`.
pub fn run_identity_probe(
    cohorts: &BTreeMap<String, SiblingCohort>,
    partition: &[Vec<String>],
    opts: &TrainOptions,
    test_per_class: usize,
    seed: u64,
) -> Result<Vec<ProbeReport>> {
    exec::try_map(partition, |words| {
        let members = words
            .iter()
            .map(|w| cohorts.get(w).ok_or_else(|| Error::Missing(w.clone())))
            .collect::<Result<Vec<_>>>()?;
        let dataset = build_identity_dataset(&members, test_per_class, seed)?;
        let model = train_ovr_logistic(&dataset, opts)?;
        evaluate(&model, &dataset)
    })
}
