//! Delegated stochastic probing.
//!
//! A principal commits to a policy (a family of acceptable outcome sets, or a
//! menu of lotteries over them). An agent with misaligned utilities probes
//! elements under an outer constraint and proposes an acceptable set that is
//! feasible for the inner constraint. This crate builds policies from greedy
//! prophet-inequality strategies and non-adaptive probe selection, evaluates
//! them exactly against a best-responding agent, and brute-forces the best
//! deterministic policy on small instances so the constructions can be
//! checked against ground truth.
//!
//! All expectations are computed exactly over the finite product of element
//! supports, in arbitrary-precision rationals.

pub mod benchmark;
pub mod builtin;
pub mod caps;
pub mod cli;
pub mod delegation;
pub mod error;
pub mod gen;
pub mod instance;
pub mod lottery;
pub mod oracle;
pub mod prophet;
pub mod rational;
pub mod report;
pub mod schema;
pub mod set_system;

mod probing;

pub use caps::Caps;
pub use delegation::{Policy, PolicyEvaluation, TieBreakMode};
pub use error::{Error, Result};
pub use instance::{Instance, Outcome, OutcomeSet, Realization, UtilityAtom};
pub use lottery::{Lottery, LotteryMenu};
pub use prophet::{GreedyFamily, ProphetReport};
pub use rational::Rational;
pub use set_system::{ElementSet, SetSystem};
