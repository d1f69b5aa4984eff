//! Local rule tables over the binary alphabet.
//!
//! A table of diameter `D` stores `2^D` output bits. Entry `v` is the output
//! for the window whose binary value is `v`, with the leftmost cell as the
//! most significant bit. The Wolfram number is the table read as an integer
//! with entry `v` at bit `v`, so `from_wolfram(3, 240)` maps every window
//! starting with `1` to `1`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patterns::MixtureSet;

/// Largest diameter for which tables are materialized (`2^24` entries).
pub const MAX_DIAMETER: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("diameter {0} out of range 1..={MAX_DIAMETER}")]
    Diameter(usize),
    #[error("cell index {index} out of range for diameter {diameter}")]
    CellIndex { index: usize, diameter: usize },
    #[error("Wolfram number {number} does not fit a diameter-{diameter} table")]
    WolframRange { number: String, diameter: usize },
    #[error("malformed Wolfram number {0:?}")]
    MalformedNumber(String),
    #[error("malformed table hex {0:?}")]
    MalformedHex(String),
    #[error("table hex and decimal disagree ({decimal} vs {hex})")]
    EncodingMismatch { decimal: String, hex: String },
    #[error("patterns {first} and {second} both control window {window}")]
    FlipCollision {
        first: String,
        second: String,
        window: String,
    },
}

fn check_diameter(d: usize) -> Result<(), RuleError> {
    if (1..=MAX_DIAMETER).contains(&d) {
        Ok(())
    } else {
        Err(RuleError::Diameter(d))
    }
}

/// Arbitrary-precision rule number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WolframNumber(pub BigUint);

impl WolframNumber {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Lowercase hex, zero-padded to one digit per four table entries.
    pub fn to_table_hex(&self, diameter: usize) -> String {
        let digits = ((1usize << diameter) / 4).max(1);
        format!("{:0>width$}", self.0.to_str_radix(16), width = digits)
    }
}

impl From<u64> for WolframNumber {
    fn from(v: u64) -> Self {
        WolframNumber(BigUint::from(v))
    }
}

impl fmt::Display for WolframNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for WolframNumber {
    type Err = RuleError;

    /// Decimal, or hex with a `0x` prefix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) if !hex.is_empty() => BigUint::parse_bytes(hex.as_bytes(), 16),
            Some(_) => None,
            None if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) => {
                BigUint::parse_bytes(t.as_bytes(), 10)
            }
            None => None,
        };
        parsed
            .map(WolframNumber)
            .ok_or_else(|| RuleError::MalformedNumber(s.to_string()))
    }
}

/// A complete local rule of diameter `D` plus the output-cell position used
/// when simulating.
///
/// Equality and hashing ignore the anchor: two tables with the same bits name
/// the same rule.
#[derive(Debug, Clone)]
pub struct RuleTable {
    diameter: usize,
    anchor: usize,
    words: Vec<u64>,
}

impl PartialEq for RuleTable {
    fn eq(&self, other: &Self) -> bool {
        self.diameter == other.diameter && self.words == other.words
    }
}

impl Eq for RuleTable {}

impl Hash for RuleTable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.diameter.hash(state);
        self.words.hash(state);
    }
}

impl RuleTable {
    /// All-zero table with a centred anchor.
    pub fn zeros(diameter: usize) -> Result<Self, RuleError> {
        check_diameter(diameter)?;
        let entries = 1usize << diameter;
        Ok(RuleTable {
            diameter,
            anchor: (diameter - 1) / 2,
            words: vec![0; entries.div_ceil(64)],
        })
    }

    pub fn from_fn(diameter: usize, f: impl Fn(u64) -> bool) -> Result<Self, RuleError> {
        let mut t = RuleTable::zeros(diameter)?;
        for v in 0..t.len() {
            if f(v) {
                t.set(v, true);
            }
        }
        Ok(t)
    }

    /// Table from a packed word, entry `v` at bit `v`. Diameter at most 6.
    pub fn from_word(diameter: usize, word: u64) -> Result<Self, RuleError> {
        check_diameter(diameter)?;
        if diameter > 6 || (diameter < 6 && word >> (1u32 << diameter) != 0) {
            return Err(RuleError::WolframRange {
                number: word.to_string(),
                diameter,
            });
        }
        let mut t = RuleTable::zeros(diameter)?;
        t.words[0] = word;
        Ok(t)
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn with_anchor(mut self, anchor: usize) -> Result<Self, RuleError> {
        if anchor >= self.diameter {
            return Err(RuleError::CellIndex {
                index: anchor,
                diameter: self.diameter,
            });
        }
        self.anchor = anchor;
        Ok(self)
    }

    /// Number of entries, `2^D`.
    pub fn len(&self) -> u64 {
        1u64 << self.diameter
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, window: u64) -> bool {
        (self.words[(window >> 6) as usize] >> (window & 63)) & 1 == 1
    }

    pub fn set(&mut self, window: u64, bit: bool) {
        let w = &mut self.words[(window >> 6) as usize];
        if bit {
            *w |= 1 << (window & 63);
        } else {
            *w &= !(1 << (window & 63));
        }
    }

    pub fn flip(&mut self, window: u64) {
        self.words[(window >> 6) as usize] ^= 1 << (window & 63);
    }

    /// Packed entries, entry `v` at bit `v % 64` of word `v / 64`.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Number of entries on which two tables of equal diameter differ.
    pub fn hamming(&self, other: &RuleTable) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a ^ b).count_ones()))
            .sum()
    }

    /// The same rule seen through a mirror: windows are read right to left.
    pub fn reflected(&self) -> RuleTable {
        let d = self.diameter;
        let mut out = RuleTable::from_fn(d, |v| self.get(reverse_bits(v, d))).expect("diameter");
        out.anchor = d - 1 - self.anchor;
        out
    }

    /// Conjugation by global complement: `f'(w) = !f(!w)`.
    pub fn complement_conjugate(&self) -> RuleTable {
        let mask = self.len() - 1;
        let mut out = RuleTable::from_fn(self.diameter, |v| !self.get(v ^ mask)).expect("diameter");
        out.anchor = self.anchor;
        out
    }

    pub fn to_wolfram(&self) -> WolframNumber {
        to_wolfram(self)
    }
}

fn reverse_bits(v: u64, d: usize) -> u64 {
    v.reverse_bits() >> (64 - d)
}

/// Window bit at cell `j`, leftmost cell being position 0.
#[inline]
fn cell(v: u64, d: usize, j: usize) -> bool {
    (v >> (d - 1 - j)) & 1 == 1
}

fn check_cell(d: usize, j: usize) -> Result<(), RuleError> {
    check_diameter(d)?;
    if j >= d {
        return Err(RuleError::CellIndex {
            index: j,
            diameter: d,
        });
    }
    Ok(())
}

/// `f(window) = window[j]`: a pure shift (the identity when `j` is the
/// anchor).
pub fn projection_table(d: usize, j: usize) -> Result<RuleTable, RuleError> {
    check_cell(d, j)?;
    RuleTable::from_fn(d, |v| cell(v, d, j))
}

/// `f(window) = !window[j]`.
pub fn complement_table(d: usize, j: usize) -> Result<RuleTable, RuleError> {
    check_cell(d, j)?;
    RuleTable::from_fn(d, |v| !cell(v, d, j))
}

pub fn to_wolfram(rt: &RuleTable) -> WolframNumber {
    let mut words = rt.words.clone();
    if rt.diameter < 6 {
        words[0] &= (1u64 << rt.len()) - 1;
    }
    let digits: Vec<u32> = words
        .iter()
        .flat_map(|w| [*w as u32, (*w >> 32) as u32])
        .collect();
    WolframNumber(BigUint::from_slice(&digits))
}

pub fn from_wolfram(d: usize, w: &WolframNumber) -> Result<RuleTable, RuleError> {
    check_diameter(d)?;
    if w.0.bits() > 1u64 << d {
        return Err(RuleError::WolframRange {
            number: w.to_string(),
            diameter: d,
        });
    }
    let mut t = RuleTable::zeros(d)?;
    if !w.0.is_zero() {
        for (slot, digit) in t.words.iter_mut().zip(w.0.to_u64_digits()) {
            *slot = digit;
        }
    }
    Ok(t)
}

/// Half the entries are ones.
pub fn is_balanced(rt: &RuleTable) -> bool {
    rt.popcount() == rt.len() / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Triviality {
    Projection(usize),
    Complement(usize),
    NonTrivial,
}

impl Triviality {
    pub fn is_trivial(self) -> bool {
        !matches!(self, Triviality::NonTrivial)
    }
}

impl fmt::Display for Triviality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Triviality::Projection(j) => write!(f, "projection({j})"),
            Triviality::Complement(j) => write!(f, "complement({j})"),
            Triviality::NonTrivial => f.write_str("nontrivial"),
        }
    }
}

pub fn classify_trivial(rt: &RuleTable) -> Triviality {
    let d = rt.diameter;
    for j in 0..d {
        let proj = projection_table(d, j).expect("in range");
        match rt.hamming(&proj) {
            0 => return Triviality::Projection(j),
            n if n == rt.len() => return Triviality::Complement(j),
            _ => {}
        }
    }
    Triviality::NonTrivial
}

/// Rule induced by a mixture: start from the identity at the shared anchor
/// and flip the output of every window some member matches.
pub fn induce(m: &MixtureSet) -> Result<RuleTable, RuleError> {
    let d = m.diameter();
    let mut table = projection_table(d, m.anchor())?.with_anchor(m.anchor())?;
    let mut owner: Vec<Option<usize>> = vec![None; 1usize << d];
    for (i, member) in m.members().iter().enumerate() {
        for window in member.concretizations() {
            if let Some(prev) = owner[window as usize] {
                return Err(RuleError::FlipCollision {
                    first: m.members()[prev].to_string(),
                    second: member.to_string(),
                    window: crate::patterns::window_string(window, d),
                });
            }
            owner[window as usize] = Some(i);
            table.flip(window);
        }
    }
    Ok(table)
}

/// Serialized form of a rule. `table_hex` is the table as a hex number with
/// entry 0 in the lowest bit of the last digit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub diameter: usize,
    pub anchor: usize,
    pub wolfram_decimal: String,
    pub table_hex: String,
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl RuleRecord {
    pub fn new(rt: &RuleTable, provenance: Vec<String>) -> Self {
        let w = rt.to_wolfram();
        RuleRecord {
            diameter: rt.diameter,
            anchor: rt.anchor,
            wolfram_decimal: w.to_string(),
            table_hex: w.to_table_hex(rt.diameter),
            provenance,
        }
    }

    /// Decodes the table, checking that both encodings agree.
    pub fn decode(&self) -> Result<RuleTable, RuleError> {
        decode_rule(self.diameter, self.anchor, &self.wolfram_decimal, &self.table_hex)
    }
}

pub(crate) fn decode_rule(
    diameter: usize,
    anchor: usize,
    decimal: &str,
    hex: &str,
) -> Result<RuleTable, RuleError> {
    let w: WolframNumber = decimal.parse()?;
    let from_hex = BigUint::parse_bytes(hex.as_bytes(), 16)
        .filter(|_| !hex.is_empty())
        .ok_or_else(|| RuleError::MalformedHex(hex.to_string()))?;
    if from_hex != w.0 {
        return Err(RuleError::EncodingMismatch {
            decimal: decimal.to_string(),
            hex: hex.to_string(),
        });
    }
    from_wolfram(diameter, &w)?.with_anchor(anchor)
}
