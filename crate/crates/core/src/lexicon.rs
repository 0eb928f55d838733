//! Per-word metadata used to bin probe errors and correlate radii.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::Error;

/// What the first subword piece of a word looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FirstTokenCategory {
    /// First piece is itself a vocabulary word.
    InVocabWord,
    /// First piece is a one- or two-character non-word (not "a" or "i").
    ShortNonword,
    Other,
}

impl FirstTokenCategory {
    pub const ALL: [FirstTokenCategory; 3] = [
        FirstTokenCategory::InVocabWord,
        FirstTokenCategory::ShortNonword,
        FirstTokenCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FirstTokenCategory::InVocabWord => "in_vocab_word",
            FirstTokenCategory::ShortNonword => "short_nonword",
            FirstTokenCategory::Other => "other",
        }
    }

    /// Classifies a first subword piece (with any `##` prefix already removed).
    pub fn classify(piece: &str, is_vocab_word: bool) -> Self {
        let len = piece.chars().count();
        if is_vocab_word || matches!(piece, "a" | "i" | "A" | "I") {
            FirstTokenCategory::InVocabWord
        } else if (1..=2).contains(&len) {
            FirstTokenCategory::ShortNonword
        } else {
            FirstTokenCategory::Other
        }
    }
}

impl fmt::Display for FirstTokenCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FirstTokenCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown first-token category `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub word: String,
    /// Occurrences in the pre-training corpus.
    pub frequency: u64,
    /// Number of lexical senses; `None` excludes the word from sense binning.
    pub sense_count: Option<u32>,
    /// Number of subword pieces, at least 1.
    pub token_count: u32,
    pub first_token_category: FirstTokenCategory,
}

pub type Lexicon = BTreeMap<String, LexiconEntry>;
