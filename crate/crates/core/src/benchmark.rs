//! The non-delegating principal: the weighted-rank utility `u(F)`, the exact
//! optimal adaptive probing value, and the best fixed (non-adaptive) probe set.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::caps::Caps;
use crate::delegation::TieBreakMode;
use crate::error::{Error, Result};
use crate::instance::{Instance, Realization};
use crate::probing::{self, StateKey};
use crate::rational::{ratio_or_one, Rational};
use crate::set_system::ElementSet;

/// One decision of the optimal adaptive strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeDecision {
    /// `(element, atom)` pairs revealed so far.
    pub observed: Vec<(usize, usize)>,
    /// Element probed next; `None` means stop and select.
    pub probe: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveValueReport {
    /// `E u(F*)`.
    pub expected_value: Rational,
    /// Decision at every reachable or explored state, sorted by observations.
    pub decisions: Vec<ProbeDecision>,
    pub state_count: usize,
}

impl AdaptiveValueReport {
    pub fn first_probe(&self) -> Option<usize> {
        self.decisions
            .iter()
            .find(|d| d.observed.is_empty())
            .and_then(|d| d.probe)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonAdaptiveReport {
    pub best_set: ElementSet,
    /// `E u(F)` for the best fixed set.
    pub expected_value: Rational,
    /// `E u(F*)`.
    pub adaptive_value: Rational,
    /// `E u(F) / E u(F*)`, one when the adaptive value is zero.
    pub ratio_to_adaptive: Rational,
    pub sets_considered: usize,
}

/// `u(F)`: the best inner-feasible subset of `F` under realization `r`.
pub fn utility_u(instance: &Instance, r: &Realization, f: ElementSet) -> Result<Rational> {
    let restricted = instance.inner().restrict(f)?;
    let weights = instance.x_weights(r.atoms());
    Ok(restricted.max_weight_feasible(&weights)?.1)
}

fn stop_utility(instance: &Instance, probed: ElementSet, key: &[u8]) -> Rational {
    let atoms: Vec<usize> = key.iter().map(|&c| (c as usize).saturating_sub(1)).collect();
    let weights = instance.x_weights(&atoms);
    instance.inner().max_weight_within(probed, &weights).1
}

/// Exact optimal adaptive probing value `E u(F*)` for the non-delegating principal.
pub fn optimal_adaptive_value(instance: &Instance, caps: &Caps) -> Result<AdaptiveValueReport> {
    let solution = probing::solve(instance, TieBreakMode::Lexicographic, caps.dp_states, |probed, key| {
        let u = stop_utility(instance, probed, key);
        (u.clone(), u)
    })?;
    let mut decisions: Vec<(StateKey, ProbeDecision)> = solution
        .nodes
        .iter()
        .map(|(key, node)| {
            let observed = key
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(e, &c)| (e, c as usize - 1))
                .collect();
            (key.clone(), ProbeDecision { observed, probe: node.action })
        })
        .collect();
    decisions.sort_by(|a, b| a.1.observed.cmp(&b.1.observed).then(a.0.cmp(&b.0)));
    Ok(AdaptiveValueReport {
        expected_value: solution.value.0,
        state_count: decisions.len(),
        decisions: decisions.into_iter().map(|(_, d)| d).collect(),
    })
}

/// `E_r u(F)` by enumerating the product support of `F`.
pub fn expected_utility(instance: &Instance, f: ElementSet, caps: &Caps) -> Result<Rational> {
    if !f.is_subset(instance.ground()) {
        return Err(Error::input(format!("probe set {f:?} leaves the ground set")));
    }
    Ok(instance
        .marginal_scenarios(f, caps.scenarios)?
        .into_iter()
        .map(|(atoms, p)| {
            let weights = instance.x_weights(&atoms);
            p * instance.inner().max_weight_within(f, &weights).1
        })
        .sum())
}

/// The outer-feasible set maximizing `E u(F)`; ties prefer larger sets, then
/// the lexicographically smallest.
pub fn best_nonadaptive_set(instance: &Instance, caps: &Caps) -> Result<NonAdaptiveReport> {
    let adaptive = optimal_adaptive_value(instance, caps)?.expected_value;
    let sets = instance.outer().feasible_sets(caps.outer_sets)?;
    let values: Vec<Rational> = sets
        .par_iter()
        .map(|&f| expected_utility(instance, f, caps))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..sets.len() {
        let order = values[i]
            .cmp(&values[best])
            .then(sets[i].len().cmp(&sets[best].len()))
            .then(sets[best].lex_cmp(sets[i]));
        if order == Ordering::Greater {
            best = i;
        }
    }
    let expected_value = values[best].clone();
    Ok(NonAdaptiveReport {
        best_set: sets[best],
        ratio_to_adaptive: ratio_or_one(&expected_value, &adaptive),
        expected_value,
        adaptive_value: adaptive,
        sets_considered: sets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::instance::{Element, UtilityAtom};
    use crate::rational::{int, one, rat, zero};
    use crate::set_system::SetSystem;

    fn caps() -> Caps {
        Caps::default()
    }

    /// `E max_e X_e` by brute force over the full product support.
    fn expected_max(instance: &Instance) -> Rational {
        instance
            .enumerate_scenarios(1000)
            .unwrap()
            .into_iter()
            .map(|(r, p)| {
                let best = (0..instance.len()).map(|e| instance.atoms(e)[r.atom(e)].x.clone()).max();
                p * best.unwrap_or_else(zero)
            })
            .sum()
    }

    fn deterministic_vs_risky(outer_k: usize) -> Instance {
        let g = ElementSet::full(2);
        Instance::new(
            vec![
                Element::new("safe", vec![UtilityAtom::new(int(1), int(1), one())]),
                Element::new(
                    "risky",
                    vec![
                        UtilityAtom::new(int(0), int(1), rat(1, 2)),
                        UtilityAtom::new(int(3), int(1), rat(1, 2)),
                    ],
                ),
            ],
            SetSystem::uniform(g, outer_k),
            SetSystem::uniform(g, 1),
        )
        .unwrap()
    }

    #[test]
    fn utility_examples() {
        let eps = rat(1, 4);
        let inst = builtin::table1(&eps).unwrap();
        let high = Realization::new(vec![1, 0]);
        let low = Realization::new(vec![0, 0]);
        assert_eq!(utility_u(&inst, &high, ElementSet::EMPTY).unwrap(), zero());
        assert_eq!(utility_u(&inst, &high, inst.ground()).unwrap(), one() / &eps);
        assert_eq!(utility_u(&inst, &low, inst.ground()).unwrap(), one());
    }

    #[test]
    fn table1_adaptive_value() {
        for eps in [rat(1, 10), rat(1, 4), rat(1, 3)] {
            let inst = builtin::table1(&eps).unwrap();
            let report = optimal_adaptive_value(&inst, &caps()).unwrap();
            assert_eq!(report.expected_value, int(2) - &eps);
        }
    }

    #[test]
    fn single_atom_adaptive_value() {
        let g = ElementSet::full(1);
        let inst = Instance::new(
            vec![Element::new("a", vec![UtilityAtom::new(int(5), int(0), one())])],
            SetSystem::free(g),
            SetSystem::uniform(g, 1),
        )
        .unwrap();
        let report = optimal_adaptive_value(&inst, &caps()).unwrap();
        assert_eq!(report.expected_value, int(5));
        assert_eq!(report.first_probe(), Some(0));
    }

    #[test]
    fn coins_adaptive_value() {
        let inst = builtin::coins2();
        assert_eq!(expected_max(&inst), rat(3, 4));
        assert_eq!(optimal_adaptive_value(&inst, &caps()).unwrap().expected_value, rat(3, 4));
    }

    #[test]
    fn nonadaptive_free_outer_probes_everything() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let report = best_nonadaptive_set(&inst, &caps()).unwrap();
        assert_eq!(report.best_set, inst.ground());
        assert_eq!(report.ratio_to_adaptive, one());
    }

    #[test]
    fn nonadaptive_picks_risky_element() {
        let inst = deterministic_vs_risky(1);
        // oracle: E u({safe}) = 1, E u({risky}) = 3/2
        assert_eq!(expected_utility(&inst, ElementSet::singleton(0), &caps()).unwrap(), int(1));
        assert_eq!(expected_utility(&inst, ElementSet::singleton(1), &caps()).unwrap(), rat(3, 2));
        let report = best_nonadaptive_set(&inst, &caps()).unwrap();
        assert_eq!(report.best_set, ElementSet::singleton(1));
        assert_eq!(report.expected_value, rat(3, 2));
        assert_eq!(report.ratio_to_adaptive, one());
    }

    #[test]
    fn single_feasible_probe_set_has_ratio_one() {
        let inst = deterministic_vs_risky(0);
        let report = best_nonadaptive_set(&inst, &caps()).unwrap();
        assert_eq!(report.best_set, ElementSet::EMPTY);
        assert_eq!(report.ratio_to_adaptive, one());
        assert_eq!(report.sets_considered, 1);
    }

    #[test]
    fn adaptivity_strictly_helps() {
        // Two probes out of three. Values frozen from an independent
        // brute-force search: adaptive 99/8, best fixed pair 45/4.
        let g = ElementSet::full(3);
        let inst = Instance::new(
            vec![
                Element::new("safe", vec![UtilityAtom::new(int(9), int(1), one())]),
                Element::new(
                    "likely",
                    vec![
                        UtilityAtom::new(int(0), int(1), rat(1, 4)),
                        UtilityAtom::new(int(12), int(1), rat(3, 4)),
                    ],
                ),
                Element::new(
                    "longshot",
                    vec![
                        UtilityAtom::new(int(0), int(1), rat(3, 4)),
                        UtilityAtom::new(int(18), int(1), rat(1, 4)),
                    ],
                ),
            ],
            SetSystem::uniform(g, 2),
            SetSystem::uniform(g, 1),
        )
        .unwrap();
        let adaptive = optimal_adaptive_value(&inst, &caps()).unwrap();
        let fixed = best_nonadaptive_set(&inst, &caps()).unwrap();
        assert_eq!(adaptive.expected_value, rat(99, 8));
        assert_eq!(fixed.expected_value, rat(45, 4));
        assert_eq!(fixed.ratio_to_adaptive, rat(10, 11));
        for f in inst.outer().feasible_sets(100).unwrap() {
            assert!(expected_utility(&inst, f, &caps()).unwrap() <= adaptive.expected_value);
        }
    }

    #[test]
    fn dp_state_cap() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let tight = Caps { dp_states: 2, ..Caps::default() };
        assert!(matches!(
            optimal_adaptive_value(&inst, &tight),
            Err(Error::Capacity { .. })
        ));
    }
}
