//! File formats: EMB1 embeddings (binary and text), lexicon and pair TSVs,
//! report tables, run configuration.

mod config;
mod emb1;
mod report;
mod tsv;

pub use config::RunConfig;
pub use emb1::{
    read_embeddings, read_embeddings_text, write_embeddings, write_embeddings_text, Emb1Reader,
    Emb1Writer, EmbeddingRecord, MAGIC, SOURCE_TAG_LEN,
};
pub use report::{emit_report, parse_csv_table, render_number, Cell, ReportFormat, Table};
pub use tsv::{
    read_cities, read_countries, read_lexicon, read_lines, read_similarity_pairs, read_vocab,
    write_lexicon, write_similarity_pairs,
};

use std::collections::BTreeMap;

use crate::{Point, Result, SiblingCohort};

/// Groups non-mask records into cohorts keyed by `(source, token)`.
pub fn cohorts_from_records(records: &[EmbeddingRecord]) -> Result<BTreeMap<(String, String), SiblingCohort>> {
    let mut grouped: BTreeMap<(String, String), Vec<Point>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_mask) {
        grouped
            .entry((r.source.clone(), r.token.clone()))
            .or_default()
            .push(Point::new(r.vector.clone())?);
    }
    grouped
        .into_iter()
        .map(|((source, token), pts)| {
            let cohort = SiblingCohort::new(token.clone(), source.clone(), pts)?;
            Ok(((source, token), cohort))
        })
        .collect()
}
