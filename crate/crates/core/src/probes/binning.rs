use crate::io::render_number;
use crate::lexicon::{FirstTokenCategory, Lexicon, LexiconEntry};
use crate::stats::log_bin;
use crate::{Error, Result};

use super::ProbeReport;

/// How words are grouped when aggregating probe errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Left-closed bins over corpus frequency; see [`crate::stats::log_bin`].
    Frequency(Vec<f64>),
    /// Sense counts `1`, `2-3`, `4-10`, `>10`; words without senses are skipped.
    Senses,
    /// Subword counts `1`, `2`, `3`, `>=4`.
    Tokens,
    FirstToken,
}

impl Binning {
    fn labels(&self) -> Vec<String> {
        match self {
            Binning::Frequency(edges) => edges
                .iter()
                .enumerate()
                .map(|(i, lo)| match edges.get(i + 1) {
                    Some(hi) => format!("[{},{})", render_number(*lo), render_number(*hi)),
                    None => format!(">={}", render_number(*lo)),
                })
                .collect(),
            Binning::Senses => ["1", "2-3", "4-10", ">10"].map(String::from).to_vec(),
            Binning::Tokens => ["1", "2", "3", ">=4"].map(String::from).to_vec(),
            Binning::FirstToken => FirstTokenCategory::ALL.iter().map(|c| c.to_string()).collect(),
        }
    }

    fn bin_of(&self, entry: &LexiconEntry) -> Result<Option<usize>> {
        Ok(match self {
            Binning::Frequency(edges) => Some(
                log_bin(&[entry.frequency as f64], edges)
                    .map_err(|e| Error::invalid(format!("word `{}`: {e}", entry.word)))?[0],
            ),
            Binning::Senses => match entry.sense_count {
                None | Some(0) => None,
                Some(1) => Some(0),
                Some(2..=3) => Some(1),
                Some(4..=10) => Some(2),
                Some(_) => Some(3),
            },
            Binning::Tokens => Some((entry.token_count.clamp(1, 4) - 1) as usize),
            Binning::FirstToken => FirstTokenCategory::ALL
                .iter()
                .position(|c| *c == entry.first_token_category),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub label: String,
    pub words: usize,
    pub errors: usize,
    pub total: usize,
}

impl BinRow {
    /// Misclassified test instances over all test instances in the bin, in
    /// percent; `None` for an empty bin.
    pub fn error_pct(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.errors as f64 / self.total as f64)
    }
}

/// Aggregates per-word probe errors into bins.
pub fn bin_error_rates(reports: &[ProbeReport], lexicon: &Lexicon, binning: &Binning) -> Result<Vec<BinRow>> {
    let mut rows: Vec<BinRow> = binning
        .labels()
        .into_iter()
        .map(|label| BinRow {
            label,
            words: 0,
            errors: 0,
            total: 0,
        })
        .collect();
    for (word, tally) in reports.iter().flat_map(|r| &r.per_class) {
        let entry = lexicon.get(word).ok_or_else(|| Error::Missing(word.clone()))?;
        if let Some(b) = binning.bin_of(entry)? {
            rows[b].words += 1;
            rows[b].errors += tally.errors;
            rows[b].total += tally.total;
        }
    }
    Ok(rows)
}
