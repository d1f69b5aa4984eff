//! Pattern strings over `{0, 1, X, a}` and the substring calculus used to
//! decide whether a pattern (or a set of patterns) induces a reversible rule.
//!
//! A pattern is a neighbourhood template. `0` and `1` are fixed cells, `X` is
//! the single cell whose state the induced rule flips, and `a` is a wildcard
//! that may only appear as padding on either end of the template. The
//! wildcard-free middle part containing `X` is the *core*.
//!
//! Two templates are *compatible* when some concrete binary word realizes
//! both of them, i.e. no position pairs a `0` with a `1`. `X` and `a` match
//! anything. Every check in this module is phrased in terms of that relation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

/// Longest pattern accepted by the parser. Concretizations are handed out as
/// `u64` window values, and rule tables top out well below this.
pub const MAX_PATTERN_LEN: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("empty pattern")]
    Empty,
    #[error("invalid character {ch:?} at position {pos} (expected 0, 1, X or a)")]
    InvalidChar { ch: char, pos: usize },
    #[error("pattern has no X cell")]
    NoFlip,
    #[error("pattern has {count} X cells, expected exactly one")]
    MultipleFlips { count: usize },
    #[error("wildcard at position {pos} is not part of a leading or trailing run")]
    InteriorWildcard { pos: usize },
    #[error("pattern length {len} exceeds the maximum of {MAX_PATTERN_LEN}")]
    TooLong { len: usize },
    #[error("substring length {len} out of range 1..={max}")]
    LengthOutOfRange { len: usize, max: usize },
    #[error("symbol sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("pattern {0} carries wildcards; an injective core is required")]
    NotCore(String),
}

/// One cell of a pattern template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    /// The output-aligned cell; stands for both states.
    Flip,
    /// Padding cell; stands for both states.
    Wild,
}

impl Symbol {
    pub fn to_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Flip => 'X',
            Symbol::Wild => 'a',
        }
    }

    pub fn from_char(ch: char) -> Option<Symbol> {
        match ch {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            'X' => Some(Symbol::Flip),
            'a' => Some(Symbol::Wild),
            _ => None,
        }
    }

    /// Fixed binary value, if any.
    pub fn bit(self) -> Option<u8> {
        match self {
            Symbol::Zero => Some(0),
            Symbol::One => Some(1),
            _ => None,
        }
    }

    fn complement(self) -> Symbol {
        match self {
            Symbol::Zero => Symbol::One,
            Symbol::One => Symbol::Zero,
            s => s,
        }
    }

    /// `true` when the pair is `{0, 1}`: no concrete cell can satisfy both.
    fn clashes(self, other: Symbol) -> bool {
        matches!(
            (self, other),
            (Symbol::Zero, Symbol::One) | (Symbol::One, Symbol::Zero)
        )
    }
}

/// Renders a symbol sequence in pattern notation.
pub fn symbols_to_string(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.to_char()).collect()
}

/// A validated pattern template with exactly one `X` and wildcards only at the
/// ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternString {
    symbols: Vec<Symbol>,
    anchor: usize,
    core_start: usize,
    core_end: usize,
}

impl PatternString {
    fn from_symbols(symbols: Vec<Symbol>) -> Result<Self, PatternError> {
        if symbols.is_empty() {
            return Err(PatternError::Empty);
        }
        if symbols.len() > MAX_PATTERN_LEN {
            return Err(PatternError::TooLong { len: symbols.len() });
        }
        let flips: Vec<usize> = symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Symbol::Flip)
            .map(|(i, _)| i)
            .collect();
        let anchor = match flips.as_slice() {
            [] => return Err(PatternError::NoFlip),
            [i] => *i,
            many => return Err(PatternError::MultipleFlips { count: many.len() }),
        };
        let core_start = symbols.iter().take_while(|s| **s == Symbol::Wild).count();
        let trailing = symbols
            .iter()
            .rev()
            .take_while(|s| **s == Symbol::Wild)
            .count();
        let core_end = symbols.len() - trailing - 1;
        if let Some(pos) = (core_start..=core_end).find(|&i| symbols[i] == Symbol::Wild) {
            return Err(PatternError::InteriorWildcard { pos });
        }
        Ok(PatternString {
            symbols,
            anchor,
            core_start,
            core_end,
        })
    }

    /// Builds a wildcard-free core with the given radii. Bit `L + R - 1 - i` of
    /// `free_bits` is the `i`-th non-`X` cell from the left, so iterating
    /// `free_bits` upward visits cores in ascending neighbourhood value.
    pub fn core_from_bits(left: usize, right: usize, free_bits: u64) -> Self {
        let free = left + right;
        let bit = |i: usize| {
            if (free_bits >> (free - 1 - i)) & 1 == 1 {
                Symbol::One
            } else {
                Symbol::Zero
            }
        };
        let mut symbols = Vec::with_capacity(free + 1);
        symbols.extend((0..left).map(bit));
        symbols.push(Symbol::Flip);
        symbols.extend((left..free).map(bit));
        PatternString {
            symbols,
            anchor: left,
            core_start: 0,
            core_end: free,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn diameter(&self) -> usize {
        self.symbols.len()
    }

    /// Index of the `X` cell within the full template.
    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Inclusive `(start, end)` of the injective core.
    pub fn core_span(&self) -> (usize, usize) {
        (self.core_start, self.core_end)
    }

    /// Number of leading wildcards (`k`).
    pub fn left_wild(&self) -> usize {
        self.core_start
    }

    /// Number of trailing wildcards (`h`).
    pub fn right_wild(&self) -> usize {
        self.symbols.len() - 1 - self.core_end
    }

    /// Cells of the core left of `X` (`L`).
    pub fn left_radius(&self) -> usize {
        self.anchor - self.core_start
    }

    /// Cells of the core right of `X` (`R`).
    pub fn right_radius(&self) -> usize {
        self.core_end - self.anchor
    }

    pub fn is_core(&self) -> bool {
        self.core_start == 0 && self.core_end + 1 == self.symbols.len()
    }

    /// The wildcard-free core as a pattern of its own.
    pub fn core(&self) -> PatternString {
        PatternString {
            symbols: self.core_symbols().to_vec(),
            anchor: self.left_radius(),
            core_start: 0,
            core_end: self.core_end - self.core_start,
        }
    }

    pub fn core_symbols(&self) -> &[Symbol] {
        &self.symbols[self.core_start..=self.core_end]
    }

    /// Neighbourhood value of the core read with `X = 0`, leftmost cell most
    /// significant.
    pub fn core_value(&self) -> u64 {
        self.core_symbols()
            .iter()
            .fold(0u64, |acc, s| (acc << 1) | u64::from(s.bit().unwrap_or(0)))
    }

    /// Left-right mirror image.
    pub fn reversed(&self) -> PatternString {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        let last = self.symbols.len() - 1;
        PatternString {
            symbols,
            anchor: last - self.anchor,
            core_start: last - self.core_end,
            core_end: last - self.core_start,
        }
    }

    /// Swaps every `0` and `1`.
    pub fn complemented(&self) -> PatternString {
        PatternString {
            symbols: self.symbols.iter().map(|s| s.complement()).collect(),
            ..self.clone()
        }
    }

    fn order_key(&self) -> (usize, u64, usize, usize) {
        (
            self.anchor,
            self.core_value(),
            self.core_end - self.core_start,
            self.core_start,
        )
    }

    /// Every concrete window the pattern matches, as neighbourhood values
    /// (leftmost cell most significant), ascending. There are `2^(k + h + 1)`
    /// of them.
    pub fn concretizations(&self) -> Vec<u64> {
        let free: Vec<usize> = self
            .symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| s.bit().is_none())
            .map(|(i, _)| i)
            .collect();
        let d = self.symbols.len();
        let base = self.symbols.iter().fold(0u64, |acc, s| {
            (acc << 1) | u64::from(s.bit().unwrap_or(0))
        });
        let mut out: Vec<u64> = (0u64..1 << free.len())
            .map(|assignment| {
                free.iter().enumerate().fold(base, |acc, (j, &pos)| {
                    acc | (((assignment >> j) & 1) << (d - 1 - pos))
                })
            })
            .collect();
        out.sort_unstable();
        out
    }
}

impl Ord for PatternString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key()
            .cmp(&other.order_key())
            .then_with(|| self.symbols.cmp(&other.symbols))
    }
}

impl PartialOrd for PatternString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for PatternString {
    type Err = PatternError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let symbols = text
            .chars()
            .enumerate()
            .map(|(pos, ch)| Symbol::from_char(ch).ok_or(PatternError::InvalidChar { ch, pos }))
            .collect::<Result<Vec<_>, _>>()?;
        PatternString::from_symbols(symbols)
    }
}

impl fmt::Display for PatternString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.symbols))
    }
}

pub fn parse_pattern(text: &str) -> Result<PatternString, PatternError> {
    text.parse()
}

pub fn format_pattern(p: &PatternString) -> String {
    p.to_string()
}

fn check_proper_len(p: &PatternString, len: usize) -> Result<(), PatternError> {
    let max = p.diameter().saturating_sub(1);
    if len == 0 || len > max {
        return Err(PatternError::LengthOutOfRange { len, max });
    }
    Ok(())
}

/// First `len` symbols; `len` must be a proper length (`1..D`).
pub fn prefix_substring(p: &PatternString, len: usize) -> Result<&[Symbol], PatternError> {
    check_proper_len(p, len)?;
    Ok(&p.symbols[..len])
}

/// Last `len` symbols; `len` must be a proper length (`1..D`).
pub fn suffix_substring(p: &PatternString, len: usize) -> Result<&[Symbol], PatternError> {
    check_proper_len(p, len)?;
    Ok(&p.symbols[p.symbols.len() - len..])
}

/// Whether a single binary word can realize both templates.
pub fn compatible(s: &[Symbol], t: &[Symbol]) -> Result<bool, PatternError> {
    if s.len() != t.len() {
        return Err(PatternError::LengthMismatch {
            left: s.len(),
            right: t.len(),
        });
    }
    Ok(templates_compatible(s, t))
}

fn templates_compatible(s: &[Symbol], t: &[Symbol]) -> bool {
    s.iter().zip(t).all(|(a, b)| !a.clashes(*b))
}

fn require_core(p: &PatternString) -> Result<(), PatternError> {
    if p.is_core() {
        Ok(())
    } else {
        Err(PatternError::NotCore(p.to_string()))
    }
}

/// Overlap length at which a core's prefix and suffix are compatible, if any.
///
/// Only borders containing `X` count: lengths `min(L, R) + 1 ..= L + R`.
/// A `None` result means the core is an injective pattern.
pub fn self_overlap_witness(p: &PatternString) -> Result<Option<usize>, PatternError> {
    require_core(p)?;
    let d = p.diameter();
    let first = p.left_radius().min(p.right_radius()) + 1;
    Ok((first..d).find(|&len| {
        templates_compatible(&p.symbols[..len], &p.symbols[d - len..])
    }))
}

pub fn is_injective_pattern(p: &PatternString) -> Result<bool, PatternError> {
    Ok(self_overlap_witness(p)?.is_none())
}

/// A placement of one core against another at which both can be realized by
/// the same word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    /// Start of the second core relative to the start of the first.
    pub offset: isize,
    /// Number of cells the two placements share.
    pub len: usize,
}

/// Looks for a placement that breaks independence of two cores.
///
/// Identical cores reduce to the self-overlap check. For distinct cores every
/// placement in which either `X` lands inside the other core must clash
/// somewhere: partial overlaps on both sides first, then full containment of
/// the shorter core inside the longer one (which includes the placement with
/// both `X` cells aligned).
pub fn independence_violation(
    first: &PatternString,
    second: &PatternString,
) -> Result<Option<Overlap>, PatternError> {
    require_core(first)?;
    require_core(second)?;
    if first.symbols == second.symbols {
        let d = first.diameter();
        return Ok(self_overlap_witness(first)?.map(|len| Overlap {
            offset: (d - len) as isize,
            len,
        }));
    }

    let (a, b) = (&first.symbols, &second.symbols);
    let (da, db) = (a.len(), b.len());
    let shorter = da.min(db);

    // `first` to the right of `second`: first's prefix against second's suffix.
    for len in (first.anchor().min(second.right_radius()) + 1)..shorter {
        if templates_compatible(&a[..len], &b[db - len..]) {
            return Ok(Some(Overlap {
                offset: len as isize - db as isize,
                len,
            }));
        }
    }
    // `second` to the right of `first`.
    for len in (second.anchor().min(first.right_radius()) + 1)..shorter {
        if templates_compatible(&b[..len], &a[da - len..]) {
            return Ok(Some(Overlap {
                offset: (da - len) as isize,
                len,
            }));
        }
    }
    // The shorter core placed inside the longer one.
    if da <= db {
        for start in 0..=db - da {
            if templates_compatible(a, &b[start..start + da]) {
                return Ok(Some(Overlap {
                    offset: -(start as isize),
                    len: da,
                }));
            }
        }
    } else {
        for start in 0..=da - db {
            if templates_compatible(&a[start..start + db], b) {
                return Ok(Some(Overlap {
                    offset: start as isize,
                    len: db,
                }));
            }
        }
    }
    Ok(None)
}

/// Pattern independence of two injective cores. Symmetric in its arguments.
pub fn independent(p_short: &PatternString, p_long: &PatternString) -> Result<bool, PatternError> {
    Ok(independence_violation(p_short, p_long)?.is_none())
}

/// All injective cores with the given radii, ascending by neighbourhood value.
pub fn generate_injective_patterns(left: usize, right: usize) -> Vec<PatternString> {
    let free = left + right;
    assert!(free < MAX_PATTERN_LEN, "radii too large");
    (0u64..1 << free)
        .into_par_iter()
        .map(|bits| PatternString::core_from_bits(left, right, bits))
        .filter(|p| self_overlap_witness(p).is_ok_and(|w| w.is_none()))
        .collect()
}

/// All injective cores of diameter `d`, over every split `L + R + 1 = d`.
pub fn generate_all_patterns(d: usize) -> Vec<PatternString> {
    if d == 0 {
        return Vec::new();
    }
    (0..d)
        .flat_map(|left| generate_injective_patterns(left, d - 1 - left))
        .collect()
}

/// Pads a pattern with `k` leading and `h` trailing wildcards.
pub fn extend(p: &PatternString, k: usize, h: usize) -> PatternString {
    let mut symbols = Vec::with_capacity(p.diameter() + k + h);
    symbols.extend(std::iter::repeat_n(Symbol::Wild, k));
    symbols.extend_from_slice(&p.symbols);
    symbols.extend(std::iter::repeat_n(Symbol::Wild, h));
    PatternString {
        symbols,
        anchor: p.anchor + k,
        core_start: p.core_start + k,
        core_end: p.core_end + k,
    }
}

/// Every extended pattern of diameter `d`: each nontrivial injective core of
/// diameter `2 ..= d - 1` in each of its `d - |core| + 1` placements.
///
/// The single-cell core `X` is left out; padding it only ever yields the
/// global complement, which is a trivial rule.
pub fn enumerate_extended(d: usize) -> Vec<PatternString> {
    let mut out: Vec<PatternString> = (2..d)
        .into_par_iter()
        .flat_map_iter(|core_len| {
            generate_all_patterns(core_len)
                .into_iter()
                .flat_map(move |core| {
                    let pad = d - core_len;
                    (0..=pad).map(move |k| extend(&core, k, pad - k))
                })
        })
        .collect();
    out.sort();
    out
}

pub fn enumerate_concretizations(p: &PatternString) -> Vec<u64> {
    p.concretizations()
}

/// Renders a window value of diameter `d` as a binary string.
pub fn window_string(value: u64, d: usize) -> String {
    (0..d)
        .map(|i| if (value >> (d - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixtureError {
    #[error("a mixture needs at least one pattern")]
    Empty,
    #[error("{other} has diameter {found}, expected {expected} (from {first})")]
    DiameterMismatch {
        first: String,
        other: String,
        expected: usize,
        found: usize,
    },
    #[error("{other} has its X at {found}, expected {expected} (from {first})")]
    AnchorMismatch {
        first: String,
        other: String,
        expected: usize,
        found: usize,
    },
    #[error("{pattern} is not an injective pattern (border of length {overlap} is compatible)")]
    NotInjective { pattern: String, overlap: usize },
    #[error("{first} and {second} are not independent (overlap of length {overlap} at offset {offset})")]
    Independence {
        first: String,
        second: String,
        overlap: usize,
        offset: isize,
    },
}

/// A validated set of patterns sharing diameter and anchor whose cores are
/// pairwise independent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixtureSet {
    members: Vec<PatternString>,
    diameter: usize,
    anchor: usize,
}

impl MixtureSet {
    pub fn members(&self) -> &[PatternString] {
        &self.members
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn singleton(p: PatternString) -> Result<Self, MixtureError> {
        build_mixture(&[p])
    }
}

/// Validates `candidates` as a mixture. Duplicates collapse; the first failing
/// check is reported.
pub fn build_mixture(candidates: &[PatternString]) -> Result<MixtureSet, MixtureError> {
    let first = candidates.first().ok_or(MixtureError::Empty)?;
    let (diameter, anchor) = (first.diameter(), first.anchor());
    for p in candidates {
        if p.diameter() != diameter {
            return Err(MixtureError::DiameterMismatch {
                first: first.to_string(),
                other: p.to_string(),
                expected: diameter,
                found: p.diameter(),
            });
        }
        if p.anchor() != anchor {
            return Err(MixtureError::AnchorMismatch {
                first: first.to_string(),
                other: p.to_string(),
                expected: anchor,
                found: p.anchor(),
            });
        }
    }
    let mut members = candidates.to_vec();
    members.sort();
    members.dedup();

    let cores: Vec<PatternString> = members.iter().map(PatternString::core).collect();
    for (p, core) in members.iter().zip(&cores) {
        if let Some(overlap) = self_overlap_witness(core).expect("core") {
            return Err(MixtureError::NotInjective {
                pattern: p.to_string(),
                overlap,
            });
        }
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if let Some(o) = independence_violation(&cores[i], &cores[j]).expect("cores") {
                return Err(MixtureError::Independence {
                    first: members[i].to_string(),
                    second: members[j].to_string(),
                    overlap: o.len,
                    offset: o.offset,
                });
            }
        }
    }
    Ok(MixtureSet {
        members,
        diameter,
        anchor,
    })
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Bypasses validation so callers can exercise the collision guard.
    pub fn forge_mixture(members: Vec<PatternString>, diameter: usize, anchor: usize) -> MixtureSet {
        MixtureSet {
            members,
            diameter,
            anchor,
        }
    }
}
