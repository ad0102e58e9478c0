//! Numbered-pinyin parsing and the pinyin-unit to ARPABET mapping.
//!
//! Both tables ship as data files compiled into the binary:
//! `data/pinyin_syllables.tsv` lists every accepted syllable with its
//! initial/final decomposition, `data/pinyin_map.tsv` maps each unit to
//! its ARPABET expansion.

use super::inventory::SharedPhonemeInventory;
use super::{FrontendError, PhonemeToken, ToneStressMark};
use std::collections::HashMap;
use std::sync::OnceLock;

const SYLLABLES_TSV: &str = include_str!("../../data/pinyin_syllables.tsv");
const MAP_TSV: &str = include_str!("../../data/pinyin_map.tsv");

/// Parsed copies of the bundled syllable and mapping tables.
#[derive(Debug)]
pub struct PinyinTable {
    /// syllable -> (initial, final)
    syllables: HashMap<String, (String, String)>,
    /// pinyin unit -> ARPABET symbol sequence
    units: HashMap<String, Vec<String>>,
}

impl PinyinTable {
    fn build() -> Self {
        let mut syllables = HashMap::new();
        for line in SYLLABLES_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut f = line.split('\t');
            let syl = f.next().expect("syllable column");
            let ini = f.next().unwrap_or("");
            let fin = f.next().expect("final column");
            syllables.insert(syl.to_string(), (ini.to_string(), fin.to_string()));
        }
        let mut units = HashMap::new();
        for line in MAP_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut f = line.split('\t');
            let unit = f.next().expect("unit column");
            let symbols = f.next().expect("symbols column");
            units.insert(
                unit.to_string(),
                symbols.split(',').map(|s| s.trim().to_string()).collect(),
            );
        }
        PinyinTable { syllables, units }
    }

    pub fn global() -> &'static PinyinTable {
        static INSTANCE: OnceLock<PinyinTable> = OnceLock::new();
        INSTANCE.get_or_init(PinyinTable::build)
    }

    /// All syllables in the bundled table.
    pub fn syllables(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.syllables
            .iter()
            .map(|(s, (i, f))| (s.as_str(), i.as_str(), f.as_str()))
    }

    pub fn decompose(&self, syllable: &str) -> Option<(&str, &str)> {
        self.syllables
            .get(syllable)
            .map(|(i, f)| (i.as_str(), f.as_str()))
    }

    pub fn expand_unit(&self, unit: &str) -> Option<&[String]> {
        self.units.get(unit).map(|v| v.as_slice())
    }
}

/// Splits a numbered pinyin syllable such as `xiang3` into its initial,
/// final and tone digit (1-5, where 5 is the neutral tone).
pub fn parse_pinyin(syllable: &str) -> Result<(String, String, u8), FrontendError> {
    let err = |reason: &str| FrontendError::MalformedSyllable {
        syllable: syllable.to_string(),
        reason: reason.to_string(),
    };
    if syllable.is_empty() {
        return Err(err("empty syllable"));
    }
    let (body, digit) = syllable.split_at(syllable.len() - 1);
    let tone = match digit.chars().next().unwrap() {
        d @ '1'..='5' => d as u8 - b'0',
        d if d.is_ascii_digit() => return Err(err("tone digit out of range 1-5")),
        _ => return Err(err("missing tone digit")),
    };
    if body.is_empty() {
        return Err(err("missing syllable body"));
    }
    if !body.bytes().all(|b| b.is_ascii_lowercase()) {
        return Err(err("syllable body must be lowercase letters"));
    }
    match PinyinTable::global().decompose(body) {
        Some((initial, final_)) => Ok((initial.to_string(), final_.to_string(), tone)),
        None => Err(err("unknown syllable structure")),
    }
}

/// Expands a decomposed syllable into phoneme tokens.
///
/// The tone mark attaches to every vowel token of the final; consonant
/// tokens (including the glides Y and W) carry `None`. Neutral tone
/// (digit 5) also maps to `None`.
pub fn pinyin_to_tokens(
    initial: &str,
    final_: &str,
    tone: u8,
) -> Result<Vec<PhonemeToken>, FrontendError> {
    let table = PinyinTable::global();
    let inventory = SharedPhonemeInventory::global();
    let mark = ToneStressMark::from_tone_digit(tone);
    let mut tokens = Vec::new();
    let mut push_unit = |unit: &str, marked: bool| -> Result<(), FrontendError> {
        let symbols = table
            .expand_unit(unit)
            .ok_or_else(|| FrontendError::UnmappedUnit {
                unit: unit.to_string(),
            })?;
        for symbol in symbols {
            let phoneme_id =
                inventory
                    .id(symbol)
                    .ok_or_else(|| FrontendError::UnmappedUnit {
                        unit: symbol.clone(),
                    })?;
            let token_mark = if marked && inventory.is_vowel(symbol) {
                mark
            } else {
                ToneStressMark::None
            };
            tokens.push(PhonemeToken {
                phoneme_id,
                mark: token_mark,
            });
        }
        Ok(())
    };
    if !initial.is_empty() {
        push_unit(initial, false)?;
    }
    push_unit(final_, true)?;
    Ok(tokens)
}
