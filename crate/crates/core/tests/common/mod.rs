//! Brute-force oracles and samplers shared by the integration tests. Nothing
//! here calls the substring calculus it is used to check.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use revca::patterns::{self, build_mixture, MixtureSet, PatternString};
use revca::rules::{induce, RuleTable};

/// Does the concrete word `w` (cells as bytes) match `p` placed at `at`?
fn matches_at(p: &str, w: &[u8], at: isize) -> bool {
    p.bytes().enumerate().all(|(i, c)| {
        let cell = w[(at + i as isize) as usize];
        match c {
            b'0' => cell == 0,
            b'1' => cell == 1,
            _ => true,
        }
    })
}

/// Placements of core `b` relative to core `a` (offset = start of `b` minus
/// start of `a`) at which some concrete word realizes both and at least one
/// `X` falls inside the other core. Found by enumerating every binary word
/// over the union of the two spans. The identity placement of a core against
/// itself is skipped.
pub fn realizable_overlaps(a: &str, b: &str) -> Vec<isize> {
    let (la, lb) = (a.len() as isize, b.len() as isize);
    let (xa, xb) = (a.find('X').unwrap() as isize, b.find('X').unwrap() as isize);
    let mut out = Vec::new();
    for offset in -(lb - 1)..la {
        if a == b && offset == 0 {
            continue;
        }
        let xa_in_b = (offset..offset + lb).contains(&xa);
        let xb_in_a = (0..la).contains(&(offset + xb));
        if !xa_in_b && !xb_in_a {
            continue;
        }
        let lo = offset.min(0);
        let hi = (offset + lb).max(la);
        let span = (hi - lo) as usize;
        let realizable = (0u32..1 << span).any(|bits| {
            let w: Vec<u8> = (0..span).map(|i| ((bits >> i) & 1) as u8).collect();
            matches_at(a, &w, -lo) && matches_at(b, &w, offset - lo)
        });
        if realizable {
            out.push(offset);
        }
    }
    out
}

/// Injective-pattern test by concrete enumeration of self-overlaps.
pub fn brute_injective(core: &str) -> bool {
    realizable_overlaps(core, core).is_empty()
}

pub fn brute_independent(a: &str, b: &str) -> bool {
    realizable_overlaps(a, b).is_empty()
}

/// Every binary word of length `d` matched by `p`, by enumerating all `2^d`.
pub fn brute_concretizations(p: &str) -> Vec<u64> {
    let d = p.len();
    (0u64..1 << d)
        .filter(|&v| {
            p.bytes().enumerate().all(|(i, c)| {
                let bit = (v >> (d - 1 - i)) & 1;
                match c {
                    b'0' => bit == 0,
                    b'1' => bit == 1,
                    _ => true,
                }
            })
        })
        .collect()
}

/// All cores of diameter `d` by brute-force enumeration of all templates.
pub fn brute_cores(d: usize) -> Vec<String> {
    let mut out = Vec::new();
    for left in 0..d {
        for bits in 0u32..1 << (d - 1) {
            let mut s = String::new();
            for i in 0..d - 1 {
                if i == left {
                    s.push('X');
                }
                s.push(if (bits >> (d - 2 - i)) & 1 == 1 { '1' } else { '0' });
            }
            if left == d - 1 {
                s.push('X');
            }
            if brute_injective(&s) {
                out.push(s);
            }
        }
    }
    out
}

pub fn rule_of(patterns: &[PatternString]) -> RuleTable {
    induce(&build_mixture(patterns).unwrap()).unwrap()
}

/// Single patterns and extended patterns of diameter `d`.
pub fn single_pattern_candidates(d: usize) -> Vec<PatternString> {
    let mut all = patterns::generate_all_patterns(d);
    all.extend(patterns::enumerate_extended(d));
    all
}

/// A random valid mixture of diameter `d` with at least two members when one
/// can be found, built greedily from shuffled candidates sharing an anchor.
pub fn random_mixture(rng: &mut impl Rng, d: usize) -> Option<MixtureSet> {
    let candidates = single_pattern_candidates(d);
    let anchors: Vec<usize> = {
        let mut a: Vec<usize> = candidates.iter().map(PatternString::anchor).collect();
        a.sort_unstable();
        a.dedup();
        a
    };
    let anchor = *anchors.choose(rng)?;
    let mut pool: Vec<PatternString> = candidates.into_iter().filter(|p| p.anchor() == anchor).collect();
    pool.shuffle(rng);
    let target = rng.gen_range(2..=4);
    let mut chosen: Vec<PatternString> = Vec::new();
    for p in pool {
        let mut trial = chosen.clone();
        trial.push(p);
        if build_mixture(&trial).is_ok() {
            chosen = trial;
            if chosen.len() == target {
                break;
            }
        }
    }
    build_mixture(&chosen).ok()
}
