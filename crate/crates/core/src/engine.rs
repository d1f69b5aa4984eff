//! Periodic-boundary simulation.
//!
//! A [`Configuration`] is a cyclic binary word; cell indices wrap modulo its
//! length. Applying a rule with anchor `j` sets cell `i` to the table entry
//! for the window `c[i - j] .. c[i - j + D - 1]`, so windows wrap as many
//! times as needed when the word is shorter than the rule.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::rules::RuleTable;

/// Default cap on exhaustive checks over all `2^n` configurations.
pub const DEFAULT_EXHAUSTIVE_BOUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("empty configuration")]
    Empty,
    #[error("invalid cell {ch:?} at position {pos} (expected 0 or 1)")]
    InvalidCell { ch: char, pos: usize },
    #[error("length {n} exceeds the exhaustive bound {bound}; sample instead")]
    BoundExceeded { n: usize, bound: usize },
    #[error("length {0} cannot be packed into a 64-bit word")]
    TooLong(usize),
}

/// Cyclic binary word of length at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    cells: Vec<u8>,
}

impl Configuration {
    pub fn new(cells: Vec<u8>) -> Result<Self, EngineError> {
        if cells.is_empty() {
            return Err(EngineError::Empty);
        }
        Ok(Configuration {
            cells: cells.into_iter().map(|c| c & 1).collect(),
        })
    }

    /// Cell `i` is bit `i` of `word`.
    pub fn from_word(word: u64, n: usize) -> Result<Self, EngineError> {
        if n == 0 {
            return Err(EngineError::Empty);
        }
        if n > 64 {
            return Err(EngineError::TooLong(n));
        }
        Ok(Configuration {
            cells: (0..n).map(|i| ((word >> i) & 1) as u8).collect(),
        })
    }

    pub fn to_word(&self) -> Option<u64> {
        (self.cells.len() <= 64).then(|| {
            self.cells
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (u64::from(c) << i))
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Cell at a possibly negative or out-of-range index.
    pub fn at(&self, i: isize) -> u8 {
        self.cells[i.rem_euclid(self.cells.len() as isize) as usize]
    }
}

impl FromStr for Configuration {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cells = s
            .trim()
            .chars()
            .enumerate()
            .map(|(pos, ch)| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(EngineError::InvalidCell { ch, pos }),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Configuration::new(cells)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            f.write_str(if c == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One synchronous update.
pub fn step(rt: &RuleTable, c: &Configuration) -> Configuration {
    let d = rt.diameter();
    let n = c.len() as isize;
    let start = -(rt.anchor() as isize);
    let mask = rt.len() - 1;
    let mut window = (0..d as isize - 1).fold(0u64, |acc, j| (acc << 1) | u64::from(c.at(start + j)));
    let cells = (0..n)
        .map(|i| {
            window = ((window << 1) | u64::from(c.at(start + i + d as isize - 1))) & mask;
            u8::from(rt.get(window))
        })
        .collect();
    Configuration { cells }
}

/// Word-packed [`step`] for lengths up to 64; cell `i` is bit `i`.
#[inline]
pub fn step_word(rt: &RuleTable, word: u64, n: usize) -> u64 {
    debug_assert!((1..=64).contains(&n));
    let d = rt.diameter();
    let mask = rt.len() - 1;
    let bit = |i: isize| (word >> i.rem_euclid(n as isize)) & 1;
    let start = -(rt.anchor() as isize);
    let mut window = (0..d as isize - 1).fold(0u64, |acc, j| (acc << 1) | bit(start + j));
    let mut out = 0u64;
    let mut src = (start + d as isize - 1).rem_euclid(n as isize) as usize;
    for i in 0..n {
        window = ((window << 1) | ((word >> src) & 1)) & mask;
        out |= u64::from(rt.get(window)) << i;
        src += 1;
        if src == n {
            src = 0;
        }
    }
    out
}

/// Cyclic rotation: cell `i` of the result is cell `i - k` of `c`, so positive
/// `k` moves content to the right.
pub fn shift(c: &Configuration, k: isize) -> Configuration {
    let n = c.len() as isize;
    Configuration {
        cells: (0..n).map(|i| c.at(i - k)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitPeriod {
    Period(usize),
    Exhausted,
}

/// Smallest `t <= max_steps` with `τ^t(c) = c`.
pub fn orbit_period(rt: &RuleTable, c: &Configuration, max_steps: usize) -> OrbitPeriod {
    let mut cur = c.clone();
    for t in 1..=max_steps {
        cur = step(rt, &cur);
        if &cur == c {
            return OrbitPeriod::Period(t);
        }
    }
    OrbitPeriod::Exhausted
}

fn check_bound(n: usize, bound: usize) -> Result<(), EngineError> {
    if n == 0 {
        return Err(EngineError::Empty);
    }
    if n > bound.min(63) {
        return Err(EngineError::BoundExceeded { n, bound });
    }
    Ok(())
}

/// `τ(τ(c)) = c` for every configuration of length `n`.
pub fn check_involution(rt: &RuleTable, n: usize) -> Result<bool, EngineError> {
    check_involution_bounded(rt, n, DEFAULT_EXHAUSTIVE_BOUND)
}

pub fn check_involution_bounded(rt: &RuleTable, n: usize, bound: usize) -> Result<bool, EngineError> {
    check_bound(n, bound)?;
    Ok((0u64..1 << n)
        .into_par_iter()
        .all(|x| step_word(rt, step_word(rt, x, n), n) == x))
}

/// `τ² = id` on the given words of length `n` (at most 64).
pub fn involution_on_words(rt: &RuleTable, n: usize, words: &[u64]) -> Result<bool, EngineError> {
    if n == 0 {
        return Err(EngineError::Empty);
    }
    if n > 64 {
        return Err(EngineError::TooLong(n));
    }
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Ok(words.iter().all(|&w| {
        let x = w & mask;
        step_word(rt, step_word(rt, x, n), n) == x
    }))
}

/// Space-time diagram: the initial configuration followed by `steps` updates.
pub fn run(rt: &RuleTable, init: &Configuration, steps: usize) -> Vec<Configuration> {
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(init.clone());
    for _ in 0..steps {
        let next = step(rt, rows.last().expect("nonempty"));
        rows.push(next);
    }
    rows
}

/// Writes rows as a plain (P1) PBM image, one row per time step, black for 1.
pub fn write_pbm<W: Write>(mut out: W, rows: &[Configuration]) -> io::Result<()> {
    let width = rows.first().map_or(0, Configuration::len);
    writeln!(out, "P1")?;
    writeln!(out, "{} {}", width, rows.len())?;
    for row in rows {
        let line: Vec<&str> = row
            .cells()
            .iter()
            .map(|&c| if c == 1 { "1" } else { "0" })
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}
