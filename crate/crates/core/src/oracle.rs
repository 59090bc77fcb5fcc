//! Brute force over every deterministic policy of a tiny instance.
//!
//! Policies are subsets of the realizable members of Ω_in; sets that can
//! never be realized cannot change what the agent does.

use rayon::prelude::*;

use crate::caps::Caps;
use crate::delegation::{Policy, PolicyEvaluator, TieBreakMode};
use crate::error::{Error, Result};
use crate::instance::{Instance, KeySet};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub best_policy: Policy,
    /// Best alpha over all policies for the tie mode.
    pub alpha_star: Rational,
    pub best_value: Rational,
    pub non_delegated_value: Rational,
    pub policies_enumerated: u64,
}

fn candidates(instance: &Instance, caps: &Caps) -> Result<Vec<KeySet>> {
    let sets = instance.realizable_outcome_sets(caps.outcome_sets)?;
    Error::check_cap("policy candidate sets", sets.len() as u128, caps.policy_candidates)?;
    if sets.len() >= 63 {
        return Err(Error::Capacity { what: "policy candidate sets", size: sets.len() as u128, cap: 62 });
    }
    Ok(sets)
}

fn subset(sets: &[KeySet], mask: u64) -> Vec<KeySet> {
    (0..sets.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| sets[i].clone())
        .collect()
}

/// Every policy, once each: bit `i` of the counter includes the `i`-th
/// candidate set in canonical order.
pub fn enumerate_policies<'a>(instance: &'a Instance, caps: &Caps) -> Result<impl Iterator<Item = Policy> + 'a> {
    let sets = candidates(instance, caps)?;
    Ok((0u64..1 << sets.len()).map(move |mask| {
        Policy::Explicit(subset(&sets, mask).iter().map(|k| instance.outcomes_from_keys(k)).collect())
    }))
}

/// The number of policies [`enumerate_policies`] yields.
pub fn policy_count(instance: &Instance, caps: &Caps) -> Result<u64> {
    Ok(1 << candidates(instance, caps)?.len())
}

/// Best alpha over all deterministic policies. Ties go to the policy with
/// the smallest counter value.
pub fn exact_delegation_gap(instance: &Instance, mode: TieBreakMode, caps: &Caps) -> Result<GapReport> {
    let sets = candidates(instance, caps)?;
    let evaluator = PolicyEvaluator::new(instance, caps)?;
    let count = 1u64 << sets.len();
    let values: Vec<Rational> = (0..count)
        .into_par_iter()
        .map(|mask| Ok(evaluator.evaluate_keys(subset(&sets, mask), mode)?.principal_value))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    let best_keys = subset(&sets, best as u64);
    let evaluation = evaluator.evaluate_keys(best_keys.clone(), mode)?;
    Ok(GapReport {
        best_policy: Policy::Explicit(best_keys.iter().map(|k| instance.outcomes_from_keys(k)).collect()),
        alpha_star: evaluation.alpha,
        best_value: evaluation.principal_value,
        non_delegated_value: evaluation.non_delegated_value,
        policies_enumerated: count,
    })
}
