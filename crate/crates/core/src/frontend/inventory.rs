//! The shared phoneme inventory: ARPABET plus the Mandarin-only J, Q, X.

use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhonemeOrigin {
    Shared,
    MandarinOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phoneme {
    pub symbol: &'static str,
    pub origin: PhonemeOrigin,
}

/// ARPABET consonants and vowels, standard CMU ordering.
const ARPABET: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH",
    "IH", "IY", "JH", "K", "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH",
    "UW", "V", "W", "Y", "Z", "ZH",
];

const ARPABET_VOWELS: [&str; 15] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];

/// Pinyin initials kept as distinct symbols.
const MANDARIN_ONLY: [&str; 3] = ["J", "Q", "X"];

/// Ordered phoneme list with contiguous ids and a symbol lookup.
#[derive(Debug)]
pub struct SharedPhonemeInventory {
    entries: Vec<Phoneme>,
    by_symbol: HashMap<&'static str, usize>,
}

impl SharedPhonemeInventory {
    fn build() -> Self {
        let mut entries = Vec::with_capacity(ARPABET.len() + MANDARIN_ONLY.len());
        for &s in &ARPABET {
            entries.push(Phoneme {
                symbol: s,
                origin: PhonemeOrigin::Shared,
            });
        }
        for &s in &MANDARIN_ONLY {
            entries.push(Phoneme {
                symbol: s,
                origin: PhonemeOrigin::MandarinOnly,
            });
        }
        let by_symbol = entries
            .iter()
            .enumerate()
            .map(|(i, p)| (p.symbol, i))
            .collect();
        SharedPhonemeInventory { entries, by_symbol }
    }

    pub fn global() -> &'static SharedPhonemeInventory {
        static INSTANCE: OnceLock<SharedPhonemeInventory> = OnceLock::new();
        INSTANCE.get_or_init(SharedPhonemeInventory::build)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Phoneme] {
        &self.entries
    }

    pub fn id(&self, symbol: &str) -> Option<usize> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn symbol(&self, id: usize) -> Option<&'static str> {
        self.entries.get(id).map(|p| p.symbol)
    }

    /// True for ARPABET vowels. Tone marks attach only to these.
    pub fn is_vowel(&self, symbol: &str) -> bool {
        ARPABET_VOWELS.contains(&symbol)
    }

    /// True if the symbol belongs to the English (ARPABET) side.
    pub fn is_arpabet(&self, symbol: &str) -> bool {
        matches!(
            self.id(symbol).map(|i| self.entries[i].origin),
            Some(PhonemeOrigin::Shared)
        )
    }
}
