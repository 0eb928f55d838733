//! Tab-separated inputs: lexicon, similarity pairs, country and city tables,
//! plain line lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::distortion::SimilarityPair;
use crate::geo::{CityRecord, CountryRecord, Region};
use crate::lexicon::{FirstTokenCategory, Lexicon, LexiconEntry};
use crate::{Error, Result};

pub const LEXICON_HEADER: [&str; 5] = ["word", "frequency", "senses", "tokens", "first_token_category"];
pub const PAIRS_HEADER: [&str; 5] = ["word1", "word2", "context1_id", "context2_id", "human_score"];
pub const COUNTRIES_HEADER: [&str; 4] = ["name", "region", "gdp", "token_count"];
pub const CITIES_HEADER: [&str; 4] = ["name", "country", "region", "population"];

struct Row {
    line: usize,
    fields: Vec<String>,
}

struct Rows {
    path: String,
    header: Vec<String>,
    rows: Vec<Row>,
}

impl Rows {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }
}

/// Reads a TSV whose header must start with `required`; blank lines are skipped.
fn read_tsv(path: &Path, required: &[&str], allow_extra: bool) -> Result<Rows> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut lines = BufReader::new(file).lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, line)) => line?.split('\t').map(str::to_string).collect(),
        None => {
            return Err(Error::Parse {
                path: name,
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    let prefix_ok = header.len() >= required.len() && header.iter().zip(required).all(|(h, r)| h == r);
    if !prefix_ok || (!allow_extra && header.len() != required.len()) {
        return Err(Error::Parse {
            path: name,
            line: 1,
            message: format!("expected header `{}`", required.join("\\t")),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                path: name,
                line: i + 1,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        rows.push(Row { line: i + 1, fields });
    }
    Ok(Rows { path: name, header, rows })
}

fn parse_num<T: std::str::FromStr>(rows: &Rows, row: &Row, col: usize) -> Result<T> {
    let raw = &row.fields[col];
    raw.parse()
        .map_err(|_| rows.err(row.line, format!("column `{}`: cannot parse `{raw}`", rows.header[col])))
}

pub fn read_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let rows = read_tsv(path.as_ref(), &LEXICON_HEADER, false)?;
    let mut out = BTreeMap::new();
    for row in &rows.rows {
        let word = row.fields[0].clone();
        if word.is_empty() {
            return Err(rows.err(row.line, "empty word"));
        }
        let frequency: u64 = parse_num(&rows, row, 1)?;
        if frequency == 0 {
            return Err(rows.err(row.line, "frequency must be at least 1"));
        }
        let sense_count = if row.fields[2].is_empty() {
            None
        } else {
            Some(parse_num::<u32>(&rows, row, 2)?)
        };
        let token_count: u32 = parse_num(&rows, row, 3)?;
        if token_count == 0 {
            return Err(rows.err(row.line, "token count must be at least 1"));
        }
        let first_token_category: FirstTokenCategory = row.fields[4]
            .parse()
            .map_err(|e: Error| rows.err(row.line, e.to_string()))?;
        if out.contains_key(&word) {
            return Err(rows.err(row.line, format!("duplicate word `{word}`")));
        }
        out.insert(
            word.clone(),
            LexiconEntry {
                word,
                frequency,
                sense_count,
                token_count,
                first_token_category,
            },
        );
    }
    Ok(out)
}

pub fn write_lexicon(path: impl AsRef<Path>, lexicon: &Lexicon) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", LEXICON_HEADER.join("\t"))?;
    for e in lexicon.values() {
        let senses = e.sense_count.map(|s| s.to_string()).unwrap_or_default();
        writeln!(w, "{}\t{}\t{}\t{}\t{}", e.word, e.frequency, senses, e.token_count, e.first_token_category)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rated word pairs. Columns after `human_score` are individual
/// ratings; when `human_score` is empty their mean is used instead.
pub fn read_similarity_pairs(path: impl AsRef<Path>) -> Result<Vec<SimilarityPair>> {
    let rows = read_tsv(path.as_ref(), &PAIRS_HEADER, true)?;
    let in_range = |v: f64| (0.0..=10.0).contains(&v);
    rows.rows
        .iter()
        .map(|row| {
            let f = &row.fields;
            if f[0].is_empty() || f[1].is_empty() {
                return Err(rows.err(row.line, "empty word"));
            }
            let context1_id: u32 = parse_num(&rows, row, 2)?;
            let context2_id: u32 = parse_num(&rows, row, 3)?;
            let ratings = (5..f.len())
                .map(|c| parse_num::<f64>(&rows, row, c))
                .collect::<Result<Vec<_>>>()?;
            if let Some(bad) = ratings.iter().find(|r| !in_range(**r)) {
                return Err(rows.err(row.line, format!("rating {bad} outside [0, 10]")));
            }
            let human_score = if f[4].is_empty() {
                if ratings.is_empty() {
                    return Err(rows.err(row.line, "missing human_score"));
                }
                ratings.iter().sum::<f64>() / ratings.len() as f64
            } else {
                parse_num(&rows, row, 4)?
            };
            if !in_range(human_score) {
                return Err(rows.err(row.line, format!("human_score {human_score} outside [0, 10]")));
            }
            Ok(SimilarityPair::new(&f[0], &f[1], context1_id, context2_id, human_score))
        })
        .collect()
}

pub fn write_similarity_pairs(path: impl AsRef<Path>, pairs: &[SimilarityPair]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", PAIRS_HEADER.join("\t"))?;
    for p in pairs {
        writeln!(w, "{}\t{}\t{}\t{}\t{}", p.word1, p.word2, p.context1_id, p.context2_id, p.human_score)?;
    }
    w.flush()?;
    Ok(())
}

/// Country table; `gdp` may be empty. An optional fifth `excluded` column
/// holds an exclusion reason.
pub fn read_countries(path: impl AsRef<Path>) -> Result<Vec<CountryRecord>> {
    let rows = read_tsv(path.as_ref(), &COUNTRIES_HEADER, true)?;
    rows.rows
        .iter()
        .map(|row| {
            let f = &row.fields;
            let region: Region = f[1].parse().map_err(|e: Error| rows.err(row.line, e.to_string()))?;
            let gdp = if f[2].is_empty() {
                None
            } else {
                let g: f64 = parse_num(&rows, row, 2)?;
                if g.is_nan() || g <= 0.0 {
                    return Err(rows.err(row.line, format!("gdp must be positive, got {g}")));
                }
                Some(g)
            };
            let token_count: u32 = parse_num(&rows, row, 3)?;
            let excluded = f.get(4).filter(|s| !s.is_empty()).cloned();
            Ok(CountryRecord {
                name: f[0].clone(),
                region,
                gdp,
                token_count,
                excluded,
            })
        })
        .collect()
}

pub fn read_cities(path: impl AsRef<Path>) -> Result<Vec<CityRecord>> {
    let rows = read_tsv(path.as_ref(), &CITIES_HEADER, false)?;
    rows.rows
        .iter()
        .map(|row| {
            let f = &row.fields;
            let region: Region = f[2].parse().map_err(|e: Error| rows.err(row.line, e.to_string()))?;
            Ok(CityRecord {
                name: f[0].clone(),
                country: f[1].clone(),
                region,
                population: parse_num(&rows, row, 3)?,
            })
        })
        .collect()
}

/// Non-empty lines, with `#` comment lines dropped.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// One vocabulary entry per line; matching is exact and case-sensitive.
pub fn read_vocab(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    Ok(read_lines(path)?.into_iter().map(|l| l.trim().to_string()).collect())
}
