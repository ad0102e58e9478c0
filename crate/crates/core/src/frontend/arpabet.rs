//! ARPABET token parsing for the English side.

use super::inventory::SharedPhonemeInventory;
use super::{FrontendError, PhonemeToken, ToneStressMark};

/// Parses an ARPABET symbol with an optional stress digit (`AH0`, `OW1`).
///
/// Digit 1 maps to primary stress, 2 to secondary, 0 or no digit to the
/// shared `None` mark. Only ARPABET symbols are accepted here; the
/// Mandarin-only J/Q/X are not valid English input.
pub fn parse_arpabet(token: &str) -> Result<PhonemeToken, FrontendError> {
    if token.is_empty() {
        return Err(FrontendError::UnknownPhoneme {
            token: token.to_string(),
        });
    }
    let (symbol, digit) = match token.chars().last() {
        Some(d) if d.is_ascii_digit() => (&token[..token.len() - 1], Some(d)),
        _ => (token, None),
    };
    let inventory = SharedPhonemeInventory::global();
    if !inventory.is_arpabet(symbol) {
        return Err(FrontendError::UnknownPhoneme {
            token: token.to_string(),
        });
    }
    let mark = match digit {
        None | Some('0') => ToneStressMark::None,
        Some('1') => ToneStressMark::Stress1,
        Some('2') => ToneStressMark::Stress2,
        Some(_) => {
            return Err(FrontendError::BadStressDigit {
                token: token.to_string(),
            })
        }
    };
    let phoneme_id = inventory.id(symbol).unwrap();
    Ok(PhonemeToken { phoneme_id, mark })
}
