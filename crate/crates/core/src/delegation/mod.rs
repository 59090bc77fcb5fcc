//! Single-proposal delegation with deterministic policies.
//!
//! The agent probes adaptively within the outer constraint, then proposes a
//! subset of what it saw; the principal accepts iff the proposal is in the
//! policy. The agent maximizes its own utility `y` and ties are resolved by
//! a [`TieBreakMode`] known to both sides in advance.

mod symmetry;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::benchmark::{best_nonadaptive_set, optimal_adaptive_value};
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::instance::{Instance, KeySet, OutcomeSet};
use crate::probing::{self, prefer, Value};
use crate::prophet::{samuel_cahn_threshold, ElementValue, GreedyFamily, ValueSet};
use crate::rational::{ratio_or_one, Rational};
use crate::set_system::ElementSet;

pub use symmetry::{is_symmetric_policy, symmetric_groups};

/// How the agent picks among options with equal agent utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreakMode {
    /// Minimize the principal's utility.
    #[default]
    Adversarial,
    /// Maximize the principal's utility.
    PrincipalFavoring,
    /// First in canonical order: the empty proposal (or stopping) first,
    /// then by ascending element and atom.
    Lexicographic,
}

impl TieBreakMode {
    pub const ALL: [TieBreakMode; 3] =
        [TieBreakMode::Adversarial, TieBreakMode::PrincipalFavoring, TieBreakMode::Lexicographic];

    pub fn as_str(self) -> &'static str {
        match self {
            TieBreakMode::Adversarial => "adversarial",
            TieBreakMode::PrincipalFavoring => "principal-favoring",
            TieBreakMode::Lexicographic => "lexicographic",
        }
    }
}

impl fmt::Display for TieBreakMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TieBreakMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adversarial" => Ok(TieBreakMode::Adversarial),
            "principal-favoring" | "principal_favoring" => Ok(TieBreakMode::PrincipalFavoring),
            "lexicographic" => Ok(TieBreakMode::Lexicographic),
            other => Err(Error::input(format!(
                "unknown tie-break mode {other:?}; expected adversarial, principal-favoring or lexicographic"
            ))),
        }
    }
}

/// A deterministic policy: the family of proposals the principal accepts.
/// The empty proposal is always acceptable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Listed outcome sets.
    Explicit(BTreeSet<OutcomeSet>),
    /// Any single outcome with `x ≥ tau`.
    XThreshold { tau: Rational },
    /// Any outcome set whose `(element, x)` projection is in the family.
    Greedy(GreedyFamily),
}

impl Policy {
    /// An explicit policy whose sets must all lie in Ω_in of `instance`.
    pub fn explicit(instance: &Instance, sets: impl IntoIterator<Item = OutcomeSet>) -> Result<Policy> {
        let sets: BTreeSet<OutcomeSet> = sets.into_iter().filter(|s| !s.is_empty()).collect();
        for s in &sets {
            if !instance.is_inner_feasible_outcome_set(s) {
                return Err(Error::input(format!(
                    "acceptable set {} is not an inner-feasible set of realizable outcomes",
                    describe(instance, s)
                )));
            }
        }
        Ok(Policy::Explicit(sets))
    }

    /// The policy accepting nothing but the empty proposal.
    pub fn reject_all() -> Policy {
        Policy::Explicit(BTreeSet::new())
    }

    pub fn accepts(&self, instance: &Instance, set: &OutcomeSet) -> bool {
        if set.is_empty() {
            return true;
        }
        if !instance.is_inner_feasible_outcome_set(set) {
            return false;
        }
        match self {
            Policy::Explicit(sets) => sets.contains(set),
            Policy::XThreshold { tau } => set.len() == 1 && set.iter().all(|o| &o.x >= tau),
            Policy::Greedy(family) => {
                let projection: ValueSet = set.iter().map(|o| ElementValue::new(o.element, o.x.clone())).collect();
                family.contains(&projection)
            }
        }
    }

    /// The nonempty acceptable realizable outcome sets in index form, sorted.
    pub(crate) fn acceptable_keys(&self, instance: &Instance, caps: &Caps) -> Result<Vec<KeySet>> {
        match self {
            Policy::Explicit(sets) => {
                let mut keys = sets
                    .iter()
                    .map(|s| {
                        instance
                            .keys_of(s)
                            .filter(|k| instance.inner().contains(k.iter().map(|&(e, _)| e).collect()))
                            .ok_or_else(|| {
                                Error::input(format!("acceptable set {} is not in Ω_in", describe(instance, s)))
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                keys.sort();
                keys.dedup();
                Ok(keys)
            }
            _ => Ok(instance
                .realizable_outcome_sets(caps.outcome_sets)?
                .into_iter()
                .filter(|k| self.accepts(instance, &instance.outcomes_from_keys(k)))
                .collect()),
        }
    }

    /// The explicit family of acceptable realizable outcome sets.
    pub fn materialize(&self, instance: &Instance, caps: &Caps) -> Result<Policy> {
        let keys = self.acceptable_keys(instance, caps)?;
        Ok(Policy::Explicit(keys.iter().map(|k| instance.outcomes_from_keys(k)).collect()))
    }
}

fn describe(instance: &Instance, set: &OutcomeSet) -> String {
    let parts: Vec<String> = set
        .iter()
        .map(|o| {
            let id = if o.element < instance.len() { instance.id(o.element).to_string() } else { format!("#{}", o.element) };
            format!("({id}, {}, {})", o.x, o.y)
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Acceptable sets with their `(y, x)` totals, ready for repeated best responses.
struct Menu {
    sets: Vec<(KeySet, Value)>,
}

impl Menu {
    fn new(instance: &Instance, keys: Vec<KeySet>) -> Self {
        let sets = keys
            .into_iter()
            .map(|k| {
                let mut v = (Rational::zero(), Rational::zero());
                for &(e, a) in &k {
                    let atom = &instance.atoms(e)[a];
                    v.0 += &atom.y;
                    v.1 += &atom.x;
                }
                (k, v)
            })
            .collect();
        Menu { sets }
    }

    /// Best proposal given the probed atoms (`key[e] = atom + 1`, 0 if unprobed).
    fn respond(&self, key: &[u8], mode: TieBreakMode) -> (Option<usize>, Value) {
        let mut best: (Option<usize>, Value) = (None, (Rational::zero(), Rational::zero()));
        for (i, (k, v)) in self.sets.iter().enumerate() {
            if k.iter().all(|&(e, a)| key[e] as usize == a + 1) && prefer(mode, v, &best.1) {
                best = (Some(i), v.clone());
            }
        }
        best
    }
}

fn probe_key(instance: &Instance, probed: &OutcomeSet) -> Option<Vec<u8>> {
    let keys = instance.keys_of(probed)?;
    let mut key = vec![0u8; instance.len()];
    for (e, a) in keys {
        key[e] = (a + 1) as u8;
    }
    Some(key)
}

/// The agent's proposal given the probed outcomes: an acceptable subset
/// maximizing `y`, with ties resolved per `mode`. Outcomes outside the
/// instance's supports are never part of an acceptable proposal.
pub fn agent_best_response(instance: &Instance, policy: &Policy, probed: &OutcomeSet, mode: TieBreakMode) -> OutcomeSet {
    let valid: OutcomeSet = probed
        .iter()
        .filter(|o| o.element < instance.len() && instance.atom_index(o.element, &o.x, &o.y).is_some())
        .cloned()
        .collect();
    let Some(key) = probe_key(instance, &valid) else {
        return OutcomeSet::new();
    };
    let items: Vec<_> = valid.iter().cloned().collect();
    let mut candidates: Vec<KeySet> = Vec::new();
    if items.len() < 32 {
        for mask in 1u64..(1u64 << items.len()) {
            let subset: OutcomeSet = (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i].clone()).collect();
            if policy.accepts(instance, &subset) {
                candidates.extend(instance.keys_of(&subset));
            }
        }
    }
    candidates.sort();
    let menu = Menu::new(instance, candidates);
    match menu.respond(&key, mode).0 {
        Some(i) => instance.outcomes_from_keys(&menu.sets[i].0),
        None => OutcomeSet::new(),
    }
}

/// Payoffs `(x, y)` when the agent proposes `proposal` after probing `probed`:
/// zero for both unless the proposal was probed and is acceptable.
pub fn settle(instance: &Instance, policy: &Policy, probed: &OutcomeSet, proposal: &OutcomeSet) -> (Rational, Rational) {
    if !proposal.is_subset(probed) || !policy.accepts(instance, proposal) {
        return (Rational::zero(), Rational::zero());
    }
    proposal.iter().fold((Rational::zero(), Rational::zero()), |(x, y), o| (x + &o.x, y + &o.y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    /// Expected principal utility of the accepted proposal.
    pub principal_value: Rational,
    /// Expected agent utility.
    pub agent_value: Rational,
    /// `E u(F*)` of the non-delegating principal.
    pub non_delegated_value: Rational,
    /// `principal_value / non_delegated_value`, one when the latter is zero.
    pub alpha: Rational,
    /// Distribution of the set of elements the agent ends up probing.
    pub probe_distribution: Vec<(ElementSet, Rational)>,
    /// Size of the agent's probing program.
    pub state_count: usize,
}

/// Evaluates many policies on one instance, computing the benchmark once.
pub struct PolicyEvaluator<'a> {
    instance: &'a Instance,
    caps: Caps,
    benchmark: Rational,
}

impl<'a> PolicyEvaluator<'a> {
    pub fn new(instance: &'a Instance, caps: &Caps) -> Result<Self> {
        let benchmark = optimal_adaptive_value(instance, caps)?.expected_value;
        Ok(PolicyEvaluator { instance, caps: caps.clone(), benchmark })
    }

    pub fn benchmark(&self) -> &Rational {
        &self.benchmark
    }

    pub fn evaluate(&self, policy: &Policy, mode: TieBreakMode) -> Result<PolicyEvaluation> {
        let keys = policy.acceptable_keys(self.instance, &self.caps)?;
        self.evaluate_keys(keys, mode)
    }

    pub(crate) fn evaluate_keys(&self, keys: Vec<KeySet>, mode: TieBreakMode) -> Result<PolicyEvaluation> {
        let menu = Menu::new(self.instance, keys);
        self.evaluate_with(mode, |key| menu.respond(key, mode).1)
    }

    /// Runs the agent's probing program with `stop` giving the
    /// `(agent, principal)` value of stopping at each state.
    pub(crate) fn evaluate_with<S>(&self, mode: TieBreakMode, mut stop: S) -> Result<PolicyEvaluation>
    where
        S: FnMut(&[u8]) -> Value,
    {
        let solution = probing::solve(self.instance, mode, self.caps.dp_states, |_, key| stop(key))?;
        let (agent_value, principal_value) = solution.value.clone();
        Ok(PolicyEvaluation {
            alpha: ratio_or_one(&principal_value, &self.benchmark),
            principal_value,
            agent_value,
            non_delegated_value: self.benchmark.clone(),
            probe_distribution: solution.probe_distribution(self.instance),
            state_count: solution.nodes.len(),
        })
    }

    pub(crate) fn instance(&self) -> &Instance {
        self.instance
    }
}

/// Exact value of `policy` when the agent probes and proposes optimally for
/// itself, with ties resolved per `mode` at every decision.
pub fn evaluate_policy(instance: &Instance, policy: &Policy, mode: TieBreakMode, caps: &Caps) -> Result<PolicyEvaluation> {
    PolicyEvaluator::new(instance, caps)?.evaluate(policy, mode)
}

/// Accept a proposal iff its `(element, x)` projection is in the family,
/// whatever the agent's utilities.
pub fn policy_from_greedy(family: GreedyFamily) -> Policy {
    Policy::Greedy(family)
}

/// The median-rule threshold policy; needs a 1-uniform inner constraint.
pub fn threshold_policy(instance: &Instance) -> Result<Policy> {
    Ok(Policy::XThreshold { tau: samuel_cahn_threshold(instance)? })
}

/// Restricts delegation to the best fixed probe set `F` and builds a policy
/// for the unconstrained restriction to `F`. The result only accepts
/// outcomes of `F`, so the agent never has a reason to probe outside it.
///
/// When `F` is the whole ground set the built policy is returned as is;
/// otherwise it is materialized and mapped back to the instance's elements.
pub fn compose_outer<B>(instance: &Instance, inner_builder: B, caps: &Caps) -> Result<(Policy, ElementSet)>
where
    B: FnOnce(&Instance) -> Result<Policy>,
{
    let f = best_nonadaptive_set(instance, caps)?.best_set;
    let (restricted, old_of) = instance.restriction(f)?;
    let built = inner_builder(&restricted)?;
    if f == instance.ground() {
        return Ok((built, f));
    }
    let sets = built
        .acceptable_keys(&restricted, caps)?
        .into_iter()
        .map(|k| {
            k.iter()
                .map(|&(e, a)| instance.outcome(old_of[e], a))
                .collect::<OutcomeSet>()
        });
    Ok((Policy::explicit(instance, sets)?, f))
}
