//! Independent decision of global injectivity.
//!
//! The decision procedure works on the pair graph of a rule: vertices are
//! ordered pairs `(u, v)` of `(D - 1)`-cell words, and there is an edge
//! `(u, v) -> (u', v')` labelled `(a, b)` whenever `u'` is `u` with cell `a`
//! shifted in, `v'` is `v` with `b` shifted in, and the rule gives the same
//! output on the two `D`-cell windows `u·a` and `v·b`. A closed walk is a pair
//! of periodic configurations with the same image, and the two are distinct
//! exactly when the walk visits an off-diagonal vertex (`u != v`). So the
//! global map is injective on periodic configurations (and therefore on all
//! configurations) iff no off-diagonal vertex lies on a cycle.
//!
//! Nothing here looks at patterns; it only reads rule tables.

use std::collections::VecDeque;
use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{self, Configuration, DEFAULT_EXHAUSTIVE_BOUND};
use crate::rules::{classify_trivial, RuleTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("length {n} exceeds the exhaustive bound {bound}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("length must be at least 1")]
    ZeroLength,
    #[error("exhaustive sweep at diameter {0} needs the long-running flag")]
    NeedsLongRun(usize),
    #[error("exhaustive sweep at diameter {0} is infeasible")]
    Infeasible(usize),
}

/// Verdict of [`debruijn_injective`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InjectivityVerdict {
    Injective,
    /// Two distinct configurations of equal length with the same image.
    NotInjective {
        witness: (Configuration, Configuration),
    },
}

impl InjectivityVerdict {
    pub fn is_injective(&self) -> bool {
        matches!(self, InjectivityVerdict::Injective)
    }

    pub fn witness(&self) -> Option<&(Configuration, Configuration)> {
        match self {
            InjectivityVerdict::Injective => None,
            InjectivityVerdict::NotInjective { witness } => Some(witness),
        }
    }
}

const UNVISITED: u32 = u32::MAX;

/// Reusable scratch space for pair-graph searches. One per worker.
#[derive(Debug, Default)]
pub struct PairGraph {
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
    stack: Vec<u32>,
    calls: Vec<(u32, u8)>,
}

/// Successor of pair vertex `vertex` along edge label `edge` (`a = edge >> 1`,
/// `b = edge & 1`), if the rule agrees on the two windows.
#[inline]
fn successor(vertex: u32, edge: u8, half_bits: usize, f: &impl Fn(u64) -> bool) -> Option<u32> {
    let side = 1u64 << half_bits;
    let (u, v) = (u64::from(vertex) >> half_bits, u64::from(vertex) & (side - 1));
    let wa = (u << 1) | u64::from(edge >> 1);
    let wb = (v << 1) | u64::from(edge & 1);
    (f(wa) == f(wb)).then(|| (((wa & (side - 1)) << half_bits) | (wb & (side - 1))) as u32)
}

impl PairGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tarjan over the implicit pair graph. Returns the off-diagonal vertices
    /// that sit on a cycle; with `first_only` it stops at the first one.
    fn cyclic_off_diagonal(
        &mut self,
        d: usize,
        f: &impl Fn(u64) -> bool,
        first_only: bool,
    ) -> Vec<u32> {
        let half = d - 1;
        let n = 1usize << (2 * half);
        self.index.clear();
        self.index.resize(n, UNVISITED);
        self.low.clear();
        self.low.resize(n, 0);
        self.on_stack.clear();
        self.on_stack.resize(n, false);
        self.stack.clear();
        self.calls.clear();

        let diag = |x: u32| (x >> half) == (x & ((1 << half) - 1));
        let mut found = Vec::new();
        let mut counter = 0u32;
        for root in 0..n as u32 {
            if self.index[root as usize] != UNVISITED {
                continue;
            }
            self.index[root as usize] = counter;
            self.low[root as usize] = counter;
            counter += 1;
            self.stack.push(root);
            self.on_stack[root as usize] = true;
            self.calls.push((root, 0));

            while let Some(&(v, edge)) = self.calls.last() {
                if edge < 4 {
                    self.calls.last_mut().expect("frame").1 += 1;
                    let Some(w) = successor(v, edge, half, f) else {
                        continue;
                    };
                    if self.index[w as usize] == UNVISITED {
                        self.index[w as usize] = counter;
                        self.low[w as usize] = counter;
                        counter += 1;
                        self.stack.push(w);
                        self.on_stack[w as usize] = true;
                        self.calls.push((w, 0));
                    } else if self.on_stack[w as usize] {
                        let iw = self.index[w as usize];
                        let lv = &mut self.low[v as usize];
                        *lv = (*lv).min(iw);
                    }
                    continue;
                }
                self.calls.pop();
                if let Some(&(parent, _)) = self.calls.last() {
                    let lv = self.low[v as usize];
                    let lp = &mut self.low[parent as usize];
                    *lp = (*lp).min(lv);
                }
                if self.low[v as usize] != self.index[v as usize] {
                    continue;
                }
                let mut component = Vec::new();
                loop {
                    let w = self.stack.pop().expect("scc member");
                    self.on_stack[w as usize] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                let cyclic = component.len() > 1
                    || (0..4).any(|e| successor(v, e, half, f) == Some(v));
                if cyclic {
                    for &w in &component {
                        if !diag(w) {
                            found.push(w);
                            if first_only {
                                return found;
                            }
                        }
                    }
                }
            }
        }
        found
    }

    /// Whether the global map of the rule given by `f` (diameter `d`) is
    /// injective. No witness is built.
    pub fn is_injective_with(&mut self, d: usize, f: impl Fn(u64) -> bool) -> bool {
        if d == 1 {
            return f(0) != f(1);
        }
        self.cyclic_off_diagonal(d, &f, true).is_empty()
    }
}

/// Shortest closed walk from `start` back to itself, as edge labels.
fn shortest_cycle(start: u32, half: usize, f: &impl Fn(u64) -> bool) -> Option<Vec<u8>> {
    let n = 1usize << (2 * half);
    let mut parent: Vec<Option<(u32, u8)>> = vec![None; n];
    let mut queue = VecDeque::new();
    let mut seen = vec![false; n];
    for e in 0..4u8 {
        if let Some(w) = successor(start, e, half, f) {
            if w == start {
                return Some(vec![e]);
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = Some((start, e));
                queue.push_back(w);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for e in 0..4u8 {
            let Some(w) = successor(v, e, half, f) else {
                continue;
            };
            if w == start {
                let mut labels = vec![e];
                let mut cur = v;
                while cur != start {
                    let (p, pe) = parent[cur as usize].expect("bfs tree");
                    labels.push(pe);
                    cur = p;
                }
                labels.reverse();
                return Some(labels);
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    None
}

/// How many cycle starts are tried when looking for a short witness.
const WITNESS_CANDIDATES: usize = 64;

/// Decides injectivity of the rule's global map; a non-injective verdict
/// carries two distinct periodic configurations with equal images.
pub fn debruijn_injective(rt: &RuleTable) -> InjectivityVerdict {
    let d = rt.diameter();
    let f = |w: u64| rt.get(w);
    if d == 1 {
        return if f(0) != f(1) {
            InjectivityVerdict::Injective
        } else {
            let zero = Configuration::new(vec![0]).expect("nonempty");
            let one = Configuration::new(vec![1]).expect("nonempty");
            InjectivityVerdict::NotInjective {
                witness: (zero, one),
            }
        };
    }
    let half = d - 1;
    let candidates = PairGraph::new().cyclic_off_diagonal(d, &f, false);
    if candidates.is_empty() {
        return InjectivityVerdict::Injective;
    }
    let labels = candidates
        .iter()
        .take(WITNESS_CANDIDATES)
        .filter_map(|&s| shortest_cycle(s, half, &f))
        .min_by_key(Vec::len)
        .expect("a cyclic vertex has a cycle");
    let left = Configuration::new(labels.iter().map(|e| e >> 1).collect()).expect("nonempty cycle");
    let right = Configuration::new(labels.iter().map(|e| e & 1).collect()).expect("nonempty cycle");
    let witness = if left <= right { (left, right) } else { (right, left) };
    InjectivityVerdict::NotInjective { witness }
}

/// Injectivity without witness extraction.
pub fn is_injective(rt: &RuleTable) -> bool {
    PairGraph::new().is_injective_with(rt.diameter(), |w| rt.get(w))
}

/// Whether the rule permutes the `2^n` configurations of length `n`.
pub fn periodic_bijective(rt: &RuleTable, n: usize) -> Result<bool, OracleError> {
    periodic_bijective_bounded(rt, n, DEFAULT_EXHAUSTIVE_BOUND)
}

pub fn periodic_bijective_bounded(rt: &RuleTable, n: usize, bound: usize) -> Result<bool, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroLength);
    }
    if n > bound.min(32) {
        return Err(OracleError::BoundExceeded { n, bound });
    }
    let mut seen = vec![0u64; (1usize << n).div_ceil(64)];
    for x in 0u64..1 << n {
        let y = engine::step_word(rt, x, n) as usize;
        let (word, bit) = (y / 64, y % 64);
        if (seen[word] >> bit) & 1 == 1 {
            return Ok(false);
        }
        seen[word] |= 1 << bit;
    }
    Ok(true)
}

/// Checks that the pair-graph verdict agrees with direct image counting for
/// every period `1..=n_max` (capped at the exhaustive bound).
pub fn cross_validate(rt: &RuleTable, n_max: usize) -> bool {
    let n_max = n_max.min(DEFAULT_EXHAUSTIVE_BOUND);
    match debruijn_injective(rt) {
        InjectivityVerdict::Injective => {
            (1..=n_max).all(|n| periodic_bijective(rt, n) == Ok(true))
        }
        InjectivityVerdict::NotInjective { witness: (a, b) } => {
            let valid = a != b
                && a.len() == b.len()
                && engine::step(rt, &a) == engine::step(rt, &b);
            let n = a.len();
            valid && (n > n_max || periodic_bijective(rt, n) == Ok(false))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExhaustiveOptions {
    pub exclude_trivial: bool,
    /// Unlocks the diameter-5 sweep (hours of CPU).
    pub allow_long: bool,
}

/// Number of tables of diameter `d` (`2^(2^d)`), for `d <= 5`.
pub fn table_space(d: usize) -> Result<u64, OracleError> {
    match d {
        1..=5 => Ok(1u64 << (1u32 << d)),
        _ => Err(OracleError::Infeasible(d)),
    }
}

fn check_sweep(d: usize, opts: ExhaustiveOptions) -> Result<(), OracleError> {
    match d {
        1..=4 => Ok(()),
        5 if opts.allow_long => Ok(()),
        5 => Err(OracleError::NeedsLongRun(d)),
        _ => Err(OracleError::Infeasible(d)),
    }
}

/// Packed trivial tables of diameter `d <= 5`.
fn trivial_words(d: usize) -> Vec<u64> {
    let entries = 1u64 << d;
    let mask = if entries == 64 { u64::MAX } else { (1 << entries) - 1 };
    (0..d)
        .flat_map(|j| {
            let proj = (0..entries)
                .filter(|v| (v >> (d - 1 - j)) & 1 == 1)
                .fold(0u64, |acc, v| acc | (1 << v));
            [proj, !proj & mask]
        })
        .collect()
}

/// Cheap necessary conditions: balance, then bijectivity on periods 1 to 4.
#[inline]
fn passes_prefilter(d: usize, table: u64) -> bool {
    if u64::from(table.count_ones()) != (1u64 << d) / 2 {
        return false;
    }
    let f = |w: u64| (table >> w) & 1;
    let mask = (1u64 << d) - 1;
    for n in 1..=4usize {
        let mut seen = 0u16;
        for x in 0u64..1 << n {
            // Window starting at cell i of the periodic word x.
            let mut y = 0u64;
            for i in 0..n {
                let w = (0..d).fold(0u64, |acc, j| (acc << 1) | ((x >> ((i + j) % n)) & 1)) & mask;
                y |= f(w) << i;
            }
            if (seen >> y) & 1 == 1 {
                return false;
            }
            seen |= 1 << y;
        }
    }
    true
}

/// Injective table indices (= Wolfram numbers) in `range`, ascending.
pub fn sweep_range(d: usize, range: Range<u64>, exclude_trivial: bool) -> Vec<u64> {
    assert!((1..=5).contains(&d), "sweep diameter");
    let trivial = trivial_words(d);
    let chunk = 1u64 << 16;
    let starts: Vec<u64> = (range.start..range.end).step_by(chunk as usize).collect();
    let mut out: Vec<u64> = starts
        .into_par_iter()
        .map_init(PairGraph::new, |graph, lo| {
            let hi = (lo + chunk).min(range.end);
            (lo..hi)
                .filter(|&t| passes_prefilter(d, t))
                .filter(|t| !(exclude_trivial && trivial.contains(t)))
                .filter(|&t| graph.is_injective_with(d, |w| (t >> w) & 1 == 1))
                .collect::<Vec<u64>>()
        })
        .flatten()
        .collect();
    out.sort_unstable();
    out
}

/// Every injective table of diameter `d`, ascending by Wolfram number.
pub fn exhaustive_injective(d: usize, opts: ExhaustiveOptions) -> Result<Vec<RuleTable>, OracleError> {
    check_sweep(d, opts)?;
    let total = table_space(d)?;
    Ok(sweep_range(d, 0..total, opts.exclude_trivial)
        .into_iter()
        .map(|t| {
            let table = RuleTable::from_word(d, t).expect("in range");
            debug_assert!(!opts.exclude_trivial || !classify_trivial(&table).is_trivial());
            table
        })
        .collect())
}
