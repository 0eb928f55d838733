use std::collections::BTreeMap;

use crate::io::EmbeddingRecord;
use crate::{exec, Error, Point, Result};

use super::{evaluate, train_ovr_logistic, LabeledPoint, ProbeDataset, TrainOptions};

/// Context-retrieval dataset for `word`: classes are context ids
/// `0..contexts`, training rows are the mask-token embeddings of each
/// context and test rows are the word's own embeddings.
pub fn build_context_retrieval_dataset(records: &[EmbeddingRecord], word: &str, contexts: usize) -> Result<ProbeDataset> {
    let mut masks: BTreeMap<u32, &EmbeddingRecord> = BTreeMap::new();
    let mut test = Vec::new();
    for r in records.iter().filter(|r| r.token == word) {
        let ctx = r.context_id as usize;
        if ctx >= contexts {
            return Err(Error::invalid(format!(
                "`{word}` has context id {ctx}, expected ids below {contexts}"
            )));
        }
        if r.is_mask {
            if masks.insert(r.context_id, r).is_some() {
                return Err(Error::invalid(format!("`{word}` has two mask embeddings for context {ctx}")));
            }
        } else {
            test.push(LabeledPoint::new(ctx, Point::new(r.vector.clone())?));
        }
    }
    let train = (0..contexts)
        .map(|ctx| {
            let rec = masks
                .get(&(ctx as u32))
                .ok_or_else(|| Error::Missing(format!("mask embedding of `{word}` in context {ctx}")))?;
            Ok(LabeledPoint::new(ctx, Point::new(rec.vector.clone())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let classes = (0..contexts).map(|c| c.to_string()).collect();
    ProbeDataset::new(classes, train, test)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordErrorRate {
    pub word: String,
    pub errors: usize,
    pub total: usize,
}

impl WordErrorRate {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.total as f64
    }
}

/// Trains one context-retrieval probe per word.
pub fn context_retrieval_error_rates(
    records: &[EmbeddingRecord],
    words: &[String],
    contexts: usize,
    opts: &TrainOptions,
) -> Result<Vec<WordErrorRate>> {
    exec::try_map(words, |word| {
        let ds = build_context_retrieval_dataset(records, word, contexts)?;
        let model = train_ovr_logistic(&ds, opts)?;
        let report = evaluate(&model, &ds)?;
        Ok(WordErrorRate {
            word: word.clone(),
            errors: report.errors(),
            total: report.total(),
        })
    })
}
