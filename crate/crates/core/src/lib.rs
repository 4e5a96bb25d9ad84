//! Epistemic alternating-time temporal logic with perfect recall: formulas,
//! interpreted systems, a bounded-horizon evaluator and a translation of a
//! fragment into CTL with distributed knowledge.
//!
//! The crate only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod formula;
pub mod gen;
pub mod oracle;
pub mod suites;
pub mod system;
pub mod translate;

pub use formula::{parse, parse_lenient, Agent, Coalition, Formula, FormulaError, Fragment, ParseError, Prop};
