//! Greedy gambler strategies against the almighty adversary.
//!
//! A greedy strategy is a downward-closed family of `(element, x)` sets; the
//! gambler accepts an arriving outcome exactly when the accepted set stays in
//! the family. The almighty adversary sees the whole realization and picks
//! the worst arrival order, which at desk scale we find by trying all of them.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::instance::{Instance, Realization};
use crate::rational::{ratio_or_one, Rational};
use crate::set_system::{ElementSet, SetSystem};

/// A gambler-side outcome: an element and its principal value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementValue {
    pub element: usize,
    pub x: Rational,
}

impl ElementValue {
    pub fn new(element: usize, x: Rational) -> Self {
        ElementValue { element, x }
    }
}

pub type ValueSet = BTreeSet<ElementValue>;

fn elements_of(set: &ValueSet) -> ElementSet {
    set.iter().map(|v| v.element).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyFamily {
    maximal: Vec<ValueSet>,
    constraint: SetSystem,
}

impl GreedyFamily {
    /// The downward closure of `sets`. Every set must use distinct elements
    /// whose element set is feasible in `constraint`.
    pub fn new(constraint: SetSystem, sets: impl IntoIterator<Item = ValueSet>) -> Result<Self> {
        let mut sets: Vec<ValueSet> = sets.into_iter().filter(|s| !s.is_empty()).collect();
        for s in &sets {
            let elements = elements_of(s);
            if elements.len() != s.len() {
                return Err(Error::input("a greedy family set repeats an element"));
            }
            if !constraint.contains(elements) {
                return Err(Error::input(format!(
                    "greedy family set on elements {elements:?} is infeasible"
                )));
            }
        }
        sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        sets.dedup();
        let mut maximal: Vec<ValueSet> = Vec::new();
        for s in sets {
            if !maximal.iter().any(|m| s.is_subset(m)) {
                maximal.push(s);
            }
        }
        maximal.sort();
        Ok(GreedyFamily { maximal, constraint })
    }

    /// The family containing only the empty set.
    pub fn empty(constraint: SetSystem) -> Self {
        GreedyFamily { maximal: Vec::new(), constraint }
    }

    /// Accept any single realizable outcome with `x ≥ tau`.
    pub fn threshold(instance: &Instance, tau: &Rational) -> Self {
        let singletons = (0..instance.len())
            .filter(|&e| instance.inner().contains(ElementSet::singleton(e)))
            .flat_map(|e| {
                instance
                    .atoms(e)
                    .iter()
                    .filter(|a| &a.x >= tau)
                    .map(move |a| ValueSet::from([ElementValue::new(e, a.x.clone())]))
            });
        GreedyFamily::new(instance.inner().clone(), singletons.collect::<Vec<_>>())
            .expect("singletons feasible in the inner constraint form a greedy family")
    }

    pub fn maximal_sets(&self) -> &[ValueSet] {
        &self.maximal
    }

    pub fn constraint(&self) -> &SetSystem {
        &self.constraint
    }

    pub fn contains(&self, set: &ValueSet) -> bool {
        set.is_empty() || self.maximal.iter().any(|m| set.is_subset(m))
    }

    pub fn relabel(&self, f: &impl Fn(usize) -> usize) -> GreedyFamily {
        let maximal = self
            .maximal
            .iter()
            .map(|m| m.iter().map(|v| ElementValue::new(f(v.element), v.x.clone())).collect())
            .collect::<Vec<ValueSet>>();
        GreedyFamily::new(self.constraint.relabel(f), maximal).expect("relabeling preserves validity")
    }
}

/// The family in index form: `matches[m][e][a]` says whether atom `a` of
/// element `e` agrees with maximal set `m`.
struct Compiled {
    matches: Vec<Vec<Vec<bool>>>,
}

impl Compiled {
    fn new(instance: &Instance, family: &GreedyFamily) -> Self {
        let matches = family
            .maximal
            .iter()
            .map(|m| {
                let wanted: HashMap<usize, &Rational> = m.iter().map(|v| (v.element, &v.x)).collect();
                (0..instance.len())
                    .map(|e| {
                        instance
                            .atoms(e)
                            .iter()
                            .map(|a| wanted.get(&e).is_some_and(|x| **x == a.x))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Compiled { matches }
    }

    /// Total accepted value when the outcomes of `atoms` arrive in `order`.
    fn run(&self, instance: &Instance, atoms: &[usize], order: &[usize]) -> Rational {
        let mut alive: Vec<usize> = (0..self.matches.len()).collect();
        let mut total = Rational::zero();
        for &e in order {
            let a = atoms[e];
            if alive.iter().any(|&m| self.matches[m][e][a]) {
                alive.retain(|&m| self.matches[m][e][a]);
                total += &instance.atoms(e)[a].x;
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrace {
    pub realization: Realization,
    pub probability: Rational,
    /// Best inner-feasible value of the realization.
    pub prophet: Rational,
    /// Gambler value under the worst ordering.
    pub gambler: Rational,
    /// First ordering attaining the minimum.
    pub worst_order: Vec<usize>,
    pub orderings_checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProphetReport {
    pub gambler_value: Rational,
    pub prophet_value: Rational,
    /// `gambler / prophet`, one when the prophet gets nothing.
    pub ratio: Rational,
    pub scenarios: Vec<ScenarioTrace>,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, u128::saturating_mul)
}

/// Expected gambler value against the almighty adversary, next to the
/// prophet's expected value.
pub fn evaluate_vs_almighty(instance: &Instance, family: &GreedyFamily, caps: &Caps) -> Result<ProphetReport> {
    if !family.constraint.ground().is_subset(instance.ground()) {
        return Err(Error::input("greedy family ranges over elements outside the instance"));
    }
    let n = instance.len();
    Error::check_cap(
        "orderings x scenarios",
        factorial(n).saturating_mul(instance.scenario_count()),
        caps.orderings,
    )?;
    let scenarios = instance.enumerate_scenarios(caps.scenarios)?;
    let orders: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let compiled = Compiled::new(instance, family);
    let traces: Vec<ScenarioTrace> = scenarios
        .into_par_iter()
        .map(|(r, p)| {
            let weights = instance.x_weights(r.atoms());
            let prophet = instance.inner().max_weight_within(instance.ground(), &weights).1;
            let mut worst: Option<(Rational, usize)> = None;
            for (i, order) in orders.iter().enumerate() {
                let v = compiled.run(instance, r.atoms(), order);
                if worst.as_ref().is_none_or(|(w, _)| v < *w) {
                    worst = Some((v, i));
                }
            }
            let (gambler, idx) = worst.expect("at least one ordering");
            ScenarioTrace {
                realization: r,
                probability: p,
                prophet,
                gambler,
                worst_order: orders[idx].clone(),
                orderings_checked: orders.len(),
            }
        })
        .collect();
    let gambler_value: Rational = traces.iter().map(|t| &t.probability * &t.gambler).sum();
    let prophet_value: Rational = traces.iter().map(|t| &t.probability * &t.prophet).sum();
    Ok(ProphetReport {
        ratio: ratio_or_one(&gambler_value, &prophet_value),
        gambler_value,
        prophet_value,
        scenarios: traces,
    })
}

/// The distribution of `max_e X_e` as sorted `(value, probability)` pairs
/// with positive probability. The maximum of no elements is zero.
pub fn max_distribution(instance: &Instance) -> Vec<(Rational, Rational)> {
    if instance.is_empty() {
        return vec![(Rational::zero(), Rational::one())];
    }
    let values: BTreeSet<&Rational> = (0..instance.len())
        .flat_map(|e| instance.atoms(e).iter().map(|a| &a.x))
        .collect();
    let cdf = |v: &Rational| -> Rational {
        (0..instance.len())
            .map(|e| {
                instance
                    .atoms(e)
                    .iter()
                    .filter(|a| &a.x <= v)
                    .map(|a| &a.prob)
                    .sum::<Rational>()
            })
            .product()
    };
    let mut out = Vec::new();
    let mut below = Rational::zero();
    for v in values {
        let at_most = cdf(v);
        let mass = &at_most - &below;
        if !mass.is_zero() {
            out.push((v.clone(), mass));
        }
        below = at_most;
    }
    out
}

/// The smallest support value `m` of the maximum with `P[max ≥ m] ≥ 1/2`
/// and `P[max ≤ m] ≥ 1/2`.
pub fn median_of_max(instance: &Instance) -> Rational {
    let half = Rational::new(1.into(), 2.into());
    let dist = max_distribution(instance);
    let mut below = Rational::zero();
    for (v, mass) in &dist {
        let at_least = Rational::one() - &below;
        below += mass;
        if at_least >= half && below >= half {
            return v.clone();
        }
    }
    unreachable!("a finite distribution has a median in its support")
}

/// Acceptance threshold of the median rule: accept a single outcome iff
/// `x ≥ τ`.
///
/// With `m` the median of the maximum and `s = Σ_e E[(X_e − m)⁺]`, the
/// rule accepts at `m` inclusively when `m ≥ s` and strictly above `m`
/// otherwise; the strict case is expressed by returning the smallest
/// realizable value above `m` (or `m + 1` if there is none). Either choice
/// secures half of the prophet against the almighty adversary, including
/// when the maximum has an atom at `m`.
pub fn samuel_cahn_threshold(instance: &Instance) -> Result<Rational> {
    if !instance.inner().is_one_uniform() {
        return Err(Error::unsupported("the median rule needs a 1-uniform inner constraint"));
    }
    let m = median_of_max(instance);
    let overshoot: Rational = (0..instance.len())
        .flat_map(|e| instance.atoms(e))
        .filter(|a| a.x > m)
        .map(|a| &a.prob * (&a.x - &m))
        .sum();
    if m >= overshoot {
        return Ok(m);
    }
    let next = (0..instance.len())
        .flat_map(|e| instance.atoms(e))
        .map(|a| &a.x)
        .filter(|x| **x > m)
        .min()
        .cloned();
    Ok(next.unwrap_or_else(|| m + Rational::one()))
}

/// Nonempty `(element, x)` sets with distinct elements and an inner-feasible
/// element set, over realizable values; sorted by size, then value.
pub fn realizable_value_sets(instance: &Instance, caps: &Caps) -> Result<Vec<ValueSet>> {
    let values: Vec<Vec<Rational>> = (0..instance.len())
        .map(|e| {
            instance
                .atoms(e)
                .iter()
                .map(|a| a.x.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    let mut out: Vec<ValueSet> = Vec::new();
    for set in instance.inner().feasible_sets(caps.outer_sets.max(caps.outcome_sets))? {
        if set.is_empty() {
            continue;
        }
        for combo in set.iter().map(|e| values[e].iter().map(move |x| (e, x))).multi_cartesian_product() {
            out.push(combo.into_iter().map(|(e, x)| ElementValue::new(e, x.clone())).collect());
            Error::check_cap("greedy family candidates", out.len() as u128, caps.family_candidates)?;
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    Ok(out)
}

/// Every downward-closed family over the candidates, as inclusion masks.
fn downward_closed_families(candidates: &[ValueSet], cap: u128) -> Result<Vec<Vec<bool>>> {
    let index: HashMap<&ValueSet, usize> = candidates.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // immediate nonempty subsets of each candidate; they precede it in the order
    let parents: Vec<Vec<usize>> = candidates
        .iter()
        .map(|s| {
            if s.len() < 2 {
                return Vec::new();
            }
            s.iter()
                .map(|v| {
                    let mut sub = s.clone();
                    sub.remove(v);
                    index[&sub]
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current = vec![false; candidates.len()];
    fn walk(
        i: usize,
        parents: &[Vec<usize>],
        current: &mut Vec<bool>,
        out: &mut Vec<Vec<bool>>,
        cap: u128,
    ) -> Result<()> {
        if i == parents.len() {
            out.push(current.clone());
            return Error::check_cap("greedy families", out.len() as u128, cap);
        }
        walk(i + 1, parents, current, out, cap)?;
        if parents[i].iter().all(|&p| current[p]) {
            current[i] = true;
            walk(i + 1, parents, current, out, cap)?;
            current[i] = false;
        }
        Ok(())
    }
    walk(0, &parents, &mut current, &mut out, cap)?;
    Ok(out)
}

/// Exhaustive search for the greedy family with the best ratio against the
/// almighty adversary. Ties keep the first family in enumeration order,
/// which visits smaller families first.
pub fn best_greedy_family(instance: &Instance, caps: &Caps) -> Result<(GreedyFamily, ProphetReport)> {
    let candidates = realizable_value_sets(instance, caps)?;
    let masks = downward_closed_families(&candidates, caps.families)?;
    let families: Vec<GreedyFamily> = masks
        .iter()
        .map(|mask| {
            let sets = candidates
                .iter()
                .zip(mask)
                .filter(|(_, &keep)| keep)
                .map(|(s, _)| s.clone())
                .collect::<Vec<_>>();
            GreedyFamily::new(instance.inner().clone(), sets)
        })
        .collect::<Result<_>>()?;
    let reports: Vec<ProphetReport> = families
        .par_iter()
        .map(|f| evaluate_vs_almighty(instance, f, caps))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..reports.len() {
        if reports[i].ratio > reports[best].ratio {
            best = i;
        }
    }
    let report = reports.into_iter().nth(best).expect("the empty family is always enumerated");
    Ok((families.into_iter().nth(best).expect("same length"), report))
}
