//! Constructive generation of reversible one-dimensional binary cellular
//! automata.
//!
//! Rules are built from *injective patterns*: neighbourhood templates whose
//! occurrences cannot overlap in a way that lets one flip disturb another.
//! A rule that flips the output cell of every matching window is an
//! involution on every periodic configuration, hence injective. Each
//! generated rule can be checked independently by the pair-graph decision
//! procedure in [`oracle`], which never looks at patterns.
//!
//! ```
//! use revca::patterns::{build_mixture, PatternString};
//! use revca::rules::induce;
//! use revca::oracle::debruijn_injective;
//!
//! let p: PatternString = "0X011".parse().unwrap();
//! let rule = induce(&build_mixture(&[p]).unwrap()).unwrap();
//! assert_eq!(rule.to_wolfram().to_string(), "4278253320");
//! assert!(debruijn_injective(&rule).is_injective());
//! ```
//!
//! The guide under `book/` walks through the concepts; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod catalog;
pub mod engine;
pub mod oracle;
pub mod patterns;
pub mod rules;

pub use engine::Configuration;
pub use oracle::InjectivityVerdict;
pub use patterns::{MixtureSet, PatternString};
pub use rules::{RuleTable, WolframNumber};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    mod patterns {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
}
