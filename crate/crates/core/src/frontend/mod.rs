//! Text frontend: Mandarin pinyin and English ARPABET parsing into a
//! shared phoneme inventory with tone/stress marks.
//!
//! Mandarin input is whitespace-separated numbered pinyin (`ni3 hao3`),
//! English input is whitespace-separated ARPABET tokens (`HH AH0 L OW1`).
//! Both sides land in the same inventory; the pinyin initials j, q and x
//! keep their own symbols because no ARPABET phoneme fits them. Each token
//! carries one of seven tone/stress marks; Mandarin neutral tone and
//! English unstressed both use the shared `None` slot.

mod arpabet;
mod inventory;
mod pinyin;

pub use arpabet::parse_arpabet;
pub use inventory::{Phoneme, PhonemeOrigin, SharedPhonemeInventory};
pub use pinyin::{parse_pinyin, pinyin_to_tokens, PinyinTable};

use crate::linalg::Matrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("malformed pinyin syllable {syllable:?}: {reason}")]
    MalformedSyllable { syllable: String, reason: String },
    #[error("pinyin unit {unit:?} missing from the mapping table")]
    UnmappedUnit { unit: String },
    #[error("unknown phoneme {token:?}")]
    UnknownPhoneme { token: String },
    #[error("bad stress digit in {token:?} (only 0, 1, 2 are valid)")]
    BadStressDigit { token: String },
    #[error("empty input")]
    EmptyInput,
    #[error("token {index}: {source}")]
    AtToken {
        index: usize,
        #[source]
        source: Box<FrontendError>,
    },
    #[error("{language:?} sequence carries a foreign mark {mark:?} at token {index}")]
    MixedMarks {
        language: Language,
        mark: ToneStressMark,
        index: usize,
    },
}

/// The seven tone/stress categories. `None` is shared between Mandarin
/// neutral tone and English unstressed syllables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToneStressMark {
    None,
    Tone1,
    Tone2,
    Tone3,
    Tone4,
    Stress1,
    Stress2,
}

impl ToneStressMark {
    pub const ALL: [ToneStressMark; 7] = [
        ToneStressMark::None,
        ToneStressMark::Tone1,
        ToneStressMark::Tone2,
        ToneStressMark::Tone3,
        ToneStressMark::Tone4,
        ToneStressMark::Stress1,
        ToneStressMark::Stress2,
    ];

    pub fn index(self) -> usize {
        match self {
            ToneStressMark::None => 0,
            ToneStressMark::Tone1 => 1,
            ToneStressMark::Tone2 => 2,
            ToneStressMark::Tone3 => 3,
            ToneStressMark::Tone4 => 4,
            ToneStressMark::Stress1 => 5,
            ToneStressMark::Stress2 => 6,
        }
    }

    pub fn is_tone(self) -> bool {
        matches!(
            self,
            ToneStressMark::Tone1
                | ToneStressMark::Tone2
                | ToneStressMark::Tone3
                | ToneStressMark::Tone4
        )
    }

    pub fn is_stress(self) -> bool {
        matches!(self, ToneStressMark::Stress1 | ToneStressMark::Stress2)
    }

    /// Tone digit 1-4 to mark; 5 (neutral) maps to `None`.
    pub fn from_tone_digit(tone: u8) -> ToneStressMark {
        match tone {
            1 => ToneStressMark::Tone1,
            2 => ToneStressMark::Tone2,
            3 => ToneStressMark::Tone3,
            4 => ToneStressMark::Tone4,
            _ => ToneStressMark::None,
        }
    }
}

/// 7-D one-hot encoding of a mark, category order as in [`ToneStressMark::ALL`].
pub fn encode_mark(mark: ToneStressMark) -> [f64; 7] {
    let mut v = [0.0; 7];
    v[mark.index()] = 1.0;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    English,
    Mandarin,
}

impl Language {
    /// Row index into the trained language embedding table.
    pub fn id(self) -> usize {
        match self {
            Language::English => 0,
            Language::Mandarin => 1,
        }
    }
}

/// One phoneme occurrence: inventory index plus tone/stress mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhonemeToken {
    pub phoneme_id: usize,
    pub mark: ToneStressMark,
}

/// A parsed utterance ready for the synthesizer.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    tokens: Vec<PhonemeToken>,
    language: Language,
    one_hots: Matrix,
}

impl InputSequence {
    /// Validates the language-purity invariant (no stress marks in
    /// Mandarin, no tone marks in English) and derives the one-hot rows.
    pub fn new(tokens: Vec<PhonemeToken>, language: Language) -> Result<Self, FrontendError> {
        if tokens.is_empty() {
            return Err(FrontendError::EmptyInput);
        }
        let inventory = SharedPhonemeInventory::global();
        for (index, tok) in tokens.iter().enumerate() {
            if tok.phoneme_id >= inventory.len() {
                return Err(FrontendError::AtToken {
                    index,
                    source: Box::new(FrontendError::UnknownPhoneme {
                        token: format!("id {}", tok.phoneme_id),
                    }),
                });
            }
            let foreign = match language {
                Language::Mandarin => tok.mark.is_stress(),
                Language::English => tok.mark.is_tone(),
            };
            if foreign {
                return Err(FrontendError::MixedMarks {
                    language,
                    mark: tok.mark,
                    index,
                });
            }
        }
        let mut one_hots = Matrix::zeros(tokens.len(), 7);
        for (t, tok) in tokens.iter().enumerate() {
            one_hots.row_mut(t).copy_from_slice(&encode_mark(tok.mark));
        }
        Ok(InputSequence {
            tokens,
            language,
            one_hots,
        })
    }

    pub fn tokens(&self) -> &[PhonemeToken] {
        &self.tokens
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// T x 7 matrix; row t is the one-hot encoding of token t's mark.
    pub fn one_hots(&self) -> &Matrix {
        &self.one_hots
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Parses a whole utterance into an [`InputSequence`].
///
/// Mandarin text is whitespace-separated numbered pinyin; English text is
/// whitespace-separated ARPABET tokens. Parser errors are reported with
/// the offending token position.
pub fn build_input_sequence(text: &str, language: Language) -> Result<InputSequence, FrontendError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.is_empty() {
        return Err(FrontendError::EmptyInput);
    }
    let mut tokens = Vec::new();
    for (index, word) in words.iter().enumerate() {
        let at = |source: FrontendError| FrontendError::AtToken {
            index,
            source: Box::new(source),
        };
        match language {
            Language::Mandarin => {
                let (initial, final_, tone) = parse_pinyin(word).map_err(at)?;
                tokens.extend(pinyin_to_tokens(&initial, &final_, tone).map_err(at)?);
            }
            Language::English => {
                tokens.push(parse_arpabet(word).map_err(at)?);
            }
        }
    }
    InputSequence::new(tokens, language)
}
