//! Symmetric element groups and permutation-invariant policies.

use std::collections::BTreeSet;

use crate::caps::Caps;
use crate::error::Result;
use crate::instance::{Instance, OutcomeSet};
use crate::set_system::{ElementSet, SetSystem};

use super::Policy;

fn swap(a: usize, b: usize) -> impl Fn(usize) -> usize {
    move |e| {
        if e == a {
            b
        } else if e == b {
            a
        } else {
            e
        }
    }
}

fn invariant(system: &SetSystem, a: usize, b: usize, cap: u128) -> Result<bool> {
    let sets: BTreeSet<ElementSet> = system.feasible_sets(cap)?.into_iter().collect();
    let t = swap(a, b);
    Ok(sets.iter().all(|s| sets.contains(&s.map(&t))))
}

/// Maximal groups of interchangeable elements: equal distributions, and
/// both constraints unchanged by swapping any two members. Singletons are
/// omitted; groups are listed by smallest member.
pub fn symmetric_groups(instance: &Instance, caps: &Caps) -> Result<Vec<ElementSet>> {
    let n = instance.len();
    // interchangeability is an equivalence: a conjugate of two valid swaps is valid
    let mut group_of: Vec<usize> = (0..n).collect();
    for b in 0..n {
        for a in 0..b {
            if group_of[a] != a {
                continue;
            }
            if instance.same_distribution(a, b)
                && invariant(instance.inner(), a, b, caps.outer_sets)?
                && invariant(instance.outer(), a, b, caps.outer_sets)?
            {
                group_of[b] = a;
                break;
            }
        }
    }
    let mut groups: Vec<ElementSet> = (0..n)
        .map(|g| (0..n).filter(|&e| group_of[e] == g).collect::<ElementSet>())
        .filter(|s| s.len() > 1)
        .collect();
    groups.sort_by(|a, b| a.lex_cmp(*b));
    Ok(groups)
}

/// True iff the acceptable family is unchanged by every permutation inside
/// every symmetric group.
pub fn is_symmetric_policy(instance: &Instance, policy: &Policy, caps: &Caps) -> Result<bool> {
    let groups = symmetric_groups(instance, caps)?;
    if groups.is_empty() {
        return Ok(true);
    }
    let acceptable: BTreeSet<OutcomeSet> = policy
        .acceptable_keys(instance, caps)?
        .iter()
        .map(|k| instance.outcomes_from_keys(k))
        .collect();
    for group in groups {
        let members: Vec<usize> = group.iter().collect();
        // transpositions with the first member generate the whole group
        for &b in &members[1..] {
            let t = swap(members[0], b);
            let moved = acceptable.iter().all(|set| {
                let image: OutcomeSet = set
                    .iter()
                    .map(|o| {
                        let mut o = o.clone();
                        o.element = t(o.element);
                        o
                    })
                    .collect();
                acceptable.contains(&image)
            });
            if !moved {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
