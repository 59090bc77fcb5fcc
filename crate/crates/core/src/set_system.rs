//! Downward-closed set systems over small ground sets.
//!
//! Elements are dense indices (`0..64`); sets are bitmasks. Uniform and
//! partition matroids optimize by greedy, explicit families and intersections
//! by exhaustive search over feasible sets.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ElementSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ELEMENTS);
        if n == MAX_ELEMENTS {
            ElementSet(u64::MAX)
        } else {
            ElementSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: usize) -> Self {
        ElementSet(1u64 << e)
    }

    pub fn contains(self, e: usize) -> bool {
        e < MAX_ELEMENTS && self.0 & (1u64 << e) != 0
    }

    #[must_use]
    pub fn with(self, e: usize) -> Self {
        ElementSet(self.0 | (1u64 << e))
    }

    #[must_use]
    pub fn without(self, e: usize) -> Self {
        ElementSet(self.0 & !(1u64 << e))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ElementSet) -> Self {
        ElementSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElementSet) -> Self {
        ElementSet(self.0 & other.0)
    }

    pub fn difference(self, other: ElementSet) -> Self {
        ElementSet(self.0 & !other.0)
    }

    /// Elements in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }

    /// Lexicographic order on the sorted element lists (a proper prefix is smaller).
    pub fn lex_cmp(self, other: ElementSet) -> Ordering {
        self.iter().cmp(other.iter())
    }

    /// Applies an element relabeling.
    pub fn map(self, f: impl Fn(usize) -> usize) -> Self {
        self.iter().map(f).collect()
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(ElementSet::EMPTY, ElementSet::with)
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    /// Every subset is feasible.
    Free,
    Uniform { k: usize },
    /// Blocks partition the ground set; at most `caps[i]` elements from block `i`.
    Partition { blocks: Vec<ElementSet>, caps: Vec<usize> },
    /// Antichain of maximal feasible sets.
    Explicit { maximal: Vec<ElementSet> },
    Intersection(Vec<SetSystem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    ground: ElementSet,
    kind: Kind,
}

impl SetSystem {
    pub fn free(ground: ElementSet) -> Self {
        SetSystem { ground, kind: Kind::Free }
    }

    pub fn uniform(ground: ElementSet, k: usize) -> Self {
        SetSystem { ground, kind: Kind::Uniform { k } }
    }

    pub fn partition(ground: ElementSet, blocks: Vec<ElementSet>, caps: Vec<usize>) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(Error::input(format!(
                "partition has {} blocks but {} caps",
                blocks.len(),
                caps.len()
            )));
        }
        let mut covered = ElementSet::EMPTY;
        for block in &blocks {
            if !block.is_subset(ground) {
                return Err(Error::input(format!("partition block {block:?} leaves the ground set")));
            }
            if !block.intersection(covered).is_empty() {
                return Err(Error::input(format!("partition block {block:?} overlaps another block")));
            }
            covered = covered.union(*block);
        }
        if covered != ground {
            return Err(Error::input(format!(
                "partition blocks miss elements {:?}",
                ground.difference(covered)
            )));
        }
        Ok(SetSystem { ground, kind: Kind::Partition { blocks, caps } })
    }

    /// Explicit family given by any generating sets; only the maximal ones are kept.
    pub fn explicit(ground: ElementSet, sets: impl IntoIterator<Item = ElementSet>) -> Result<Self> {
        let sets: Vec<ElementSet> = sets.into_iter().collect();
        if let Some(bad) = sets.iter().find(|s| !s.is_subset(ground)) {
            return Err(Error::input(format!("explicit set {bad:?} leaves the ground set")));
        }
        Ok(SetSystem { ground, kind: Kind::Explicit { maximal: maximal_antichain(sets) } })
    }

    pub fn intersection(parts: Vec<SetSystem>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::input("intersection needs at least one part"));
        };
        let ground = first.ground;
        if parts.iter().any(|p| p.ground != ground) {
            return Err(Error::input("intersection parts have different ground sets"));
        }
        Ok(SetSystem { ground, kind: Kind::Intersection(parts) })
    }

    pub fn ground(&self) -> ElementSet {
        self.ground
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// True for the kinds optimized by greedy (uniform, partition, free).
    pub fn is_greedy_kind(&self) -> bool {
        matches!(self.kind, Kind::Free | Kind::Uniform { .. } | Kind::Partition { .. })
    }

    pub fn is_feasible(&self, subset: ElementSet) -> Result<bool> {
        if !subset.is_subset(self.ground) {
            return Err(Error::input(format!(
                "elements {:?} are not in the ground set",
                subset.difference(self.ground)
            )));
        }
        Ok(self.contains(subset))
    }

    /// Feasibility without the ground-set check; sets leaving the ground are infeasible.
    pub fn contains(&self, subset: ElementSet) -> bool {
        if !subset.is_subset(self.ground) {
            return false;
        }
        match &self.kind {
            Kind::Free => true,
            Kind::Uniform { k } => subset.len() <= *k,
            Kind::Partition { blocks, caps } => blocks
                .iter()
                .zip(caps)
                .all(|(block, cap)| subset.intersection(*block).len() <= *cap),
            Kind::Explicit { maximal } => subset.is_empty() || maximal.iter().any(|m| subset.is_subset(*m)),
            Kind::Intersection(parts) => parts.iter().all(|p| p.contains(subset)),
        }
    }

    /// The restriction to `f`: ground `f`, same feasibility on subsets of `f`.
    pub fn restrict(&self, f: ElementSet) -> Result<SetSystem> {
        if !f.is_subset(self.ground) {
            return Err(Error::input(format!(
                "restriction set has elements {:?} outside the ground set",
                f.difference(self.ground)
            )));
        }
        Ok(self.restrict_unchecked(f))
    }

    fn restrict_unchecked(&self, f: ElementSet) -> SetSystem {
        let kind = match &self.kind {
            Kind::Free => Kind::Free,
            Kind::Uniform { k } => Kind::Uniform { k: *k },
            Kind::Partition { blocks, caps } => {
                let (blocks, caps) = blocks
                    .iter()
                    .zip(caps)
                    .map(|(b, c)| (b.intersection(f), *c))
                    .filter(|(b, _)| !b.is_empty())
                    .unzip();
                Kind::Partition { blocks, caps }
            }
            Kind::Explicit { maximal } => Kind::Explicit {
                maximal: maximal_antichain(maximal.iter().map(|m| m.intersection(f))),
            },
            Kind::Intersection(parts) => {
                Kind::Intersection(parts.iter().map(|p| p.restrict_unchecked(f)).collect())
            }
        };
        SetSystem { ground: f, kind }
    }

    /// Renames every element through `f`, which must be injective on the ground set.
    pub fn relabel(&self, f: &impl Fn(usize) -> usize) -> SetSystem {
        let kind = match &self.kind {
            Kind::Free => Kind::Free,
            Kind::Uniform { k } => Kind::Uniform { k: *k },
            Kind::Partition { blocks, caps } => Kind::Partition {
                blocks: blocks.iter().map(|b| b.map(f)).collect(),
                caps: caps.clone(),
            },
            Kind::Explicit { maximal } => Kind::Explicit {
                maximal: maximal_antichain(maximal.iter().map(|m| m.map(f))),
            },
            Kind::Intersection(parts) => Kind::Intersection(parts.iter().map(|p| p.relabel(f)).collect()),
        };
        SetSystem { ground: self.ground.map(f), kind }
    }

    /// Every feasible set, in depth-first order extending by larger ids.
    pub fn feasible_sets(&self, cap: u128) -> Result<Vec<ElementSet>> {
        let elements: Vec<usize> = self.ground.iter().collect();
        let mut out = vec![ElementSet::EMPTY];
        let mut stack = vec![(ElementSet::EMPTY, 0usize)];
        while let Some((set, from)) = stack.pop() {
            for (i, &e) in elements.iter().enumerate().skip(from) {
                let next = set.with(e);
                if self.contains(next) {
                    out.push(next);
                    Error::check_cap("feasible sets", out.len() as u128, cap)?;
                    stack.push((next, i + 1));
                }
            }
        }
        Ok(out)
    }

    /// True iff every singleton of the ground set is feasible and no pair is.
    pub fn is_one_uniform(&self) -> bool {
        let elements: Vec<usize> = self.ground.iter().collect();
        if !elements.iter().all(|&e| self.contains(ElementSet::singleton(e))) {
            return false;
        }
        elements.iter().enumerate().all(|(i, &a)| {
            elements[i + 1..]
                .iter()
                .all(|&b| !self.contains(ElementSet::singleton(a).with(b)))
        })
    }

    /// Maximum-weight feasible set and its weight (the weighted rank of the ground set).
    ///
    /// `weights` is indexed by element id and must cover the ground set.
    /// Ties prefer fewer elements, then the lexicographically smallest sorted
    /// id list; zero-weight elements are never included.
    pub fn max_weight_feasible(&self, weights: &[Rational]) -> Result<(ElementSet, Rational)> {
        for e in self.ground.iter() {
            match weights.get(e) {
                None => return Err(Error::input(format!("no weight for element {e}"))),
                Some(w) if w.is_negative() => {
                    return Err(Error::input(format!("negative weight {w} for element {e}")))
                }
                Some(_) => {}
            }
        }
        Ok(self.max_weight_within(self.ground, weights))
    }

    /// Weighted rank of `within`: the best feasible subset of `within ∩ ground`.
    /// Weights are assumed nonnegative.
    pub fn max_weight_within(&self, within: ElementSet, weights: &[Rational]) -> (ElementSet, Rational) {
        let candidates: Vec<usize> = within
            .intersection(self.ground)
            .iter()
            .filter(|&e| !weights[e].is_zero())
            .collect();
        match &self.kind {
            Kind::Free | Kind::Uniform { .. } | Kind::Partition { .. } => self.greedy(candidates, weights),
            Kind::Explicit { maximal } => {
                let mut best = (ElementSet::EMPTY, Rational::zero());
                let positive: ElementSet = candidates.iter().copied().collect();
                for m in maximal {
                    let set = m.intersection(positive);
                    let value = weight_of(set, weights);
                    if better_weighted(&(set, value.clone()), &best) {
                        best = (set, value);
                    }
                }
                best
            }
            Kind::Intersection(_) => self.exhaustive(&candidates, weights),
        }
    }

    fn greedy(&self, mut candidates: Vec<usize>, weights: &[Rational]) -> (ElementSet, Rational) {
        candidates.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
        let mut set = ElementSet::EMPTY;
        let mut total = Rational::zero();
        for e in candidates {
            if self.contains(set.with(e)) {
                set = set.with(e);
                total += &weights[e];
            }
        }
        (set, total)
    }

    fn exhaustive(&self, candidates: &[usize], weights: &[Rational]) -> (ElementSet, Rational) {
        let mut best = (ElementSet::EMPTY, Rational::zero());
        let mut stack = vec![(ElementSet::EMPTY, Rational::zero(), 0usize)];
        while let Some((set, value, from)) = stack.pop() {
            if better_weighted(&(set, value.clone()), &best) {
                best = (set, value.clone());
            }
            for (i, &e) in candidates.iter().enumerate().skip(from) {
                let next = set.with(e);
                if self.contains(next) {
                    stack.push((next, &value + &weights[e], i + 1));
                }
            }
        }
        best
    }
}

fn weight_of(set: ElementSet, weights: &[Rational]) -> Rational {
    set.iter().map(|e| &weights[e]).sum()
}

/// Higher weight, then fewer elements, then lexicographically smaller.
fn better_weighted(a: &(ElementSet, Rational), b: &(ElementSet, Rational)) -> bool {
    match a.1.cmp(&b.1) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.0.len().cmp(&b.0.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a.0.lex_cmp(b.0) == Ordering::Less,
        },
    }
}

fn maximal_antichain(sets: impl IntoIterator<Item = ElementSet>) -> Vec<ElementSet> {
    let mut sets: Vec<ElementSet> = sets.into_iter().collect();
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a.lex_cmp(*b)));
    sets.dedup();
    let mut kept: Vec<ElementSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| s.is_subset(*k)) {
            kept.push(s);
        }
    }
    kept.sort_by(|a, b| a.lex_cmp(*b));
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn set(ids: &[usize]) -> ElementSet {
        ids.iter().copied().collect()
    }

    /// Brute force over every subset of the ground set.
    fn brute_max(system: &SetSystem, weights: &[Rational]) -> Rational {
        let ground: Vec<usize> = system.ground().iter().collect();
        (0u64..1 << ground.len())
            .map(|mask| {
                ground
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect::<ElementSet>()
            })
            .filter(|s| system.contains(*s))
            .map(|s| weight_of(s, weights))
            .max()
            .unwrap()
    }

    #[test]
    fn uniform_feasibility() {
        let m = SetSystem::uniform(set(&[A, B]), 1);
        assert!(m.is_feasible(ElementSet::EMPTY).unwrap());
        assert!(!m.is_feasible(set(&[A, B])).unwrap());
        assert!(m.is_feasible(set(&[B])).unwrap());
        assert!(m.is_feasible(set(&[C])).is_err());
    }

    #[test]
    fn explicit_feasibility_is_downward_closed() {
        let m = SetSystem::explicit(set(&[A, B]), [ElementSet::EMPTY, set(&[A]), set(&[B])]).unwrap();
        assert!(m.is_feasible(set(&[A])).unwrap());
        assert!(!m.is_feasible(set(&[A, B])).unwrap());
        let Kind::Explicit { maximal } = m.kind() else { unreachable!() };
        assert_eq!(maximal, &vec![set(&[A]), set(&[B])]);
    }

    #[test]
    fn restrict_uniform() {
        let m = SetSystem::uniform(set(&[A, B]), 1).restrict(set(&[A])).unwrap();
        assert_eq!(m, SetSystem::uniform(set(&[A]), 1));
        assert!(SetSystem::uniform(set(&[A]), 1).restrict(set(&[A, B])).is_err());
    }

    #[test]
    fn restrict_partition_enumerated() {
        let m = SetSystem::partition(set(&[A, B, C]), vec![set(&[A, B]), set(&[C])], vec![1, 1]).unwrap();
        let r = m.restrict(set(&[A, C])).unwrap();
        assert!(r.is_feasible(set(&[A, C])).unwrap());
        for bits in 0u64..8 {
            let s = ElementSet::from_bits(bits);
            if s.is_subset(set(&[A, C])) {
                assert_eq!(r.is_feasible(s).unwrap(), m.is_feasible(s).unwrap());
            }
        }
    }

    #[test]
    fn restrict_to_ground_is_identity() {
        let m = SetSystem::partition(set(&[A, B, C]), vec![set(&[A, B]), set(&[C])], vec![1, 1]).unwrap();
        let r = m.restrict(m.ground()).unwrap();
        for bits in 0u64..8 {
            let s = ElementSet::from_bits(bits);
            assert_eq!(r.contains(s), m.contains(s));
        }
    }

    #[test]
    fn max_weight_examples() {
        let m = SetSystem::uniform(set(&[A, B]), 1);
        assert_eq!(m.max_weight_feasible(&[int(2), int(1)]).unwrap(), (set(&[A]), int(2)));
        assert_eq!(
            m.max_weight_feasible(&[int(0), int(0)]).unwrap(),
            (ElementSet::EMPTY, int(0))
        );

        let inter = SetSystem::intersection(vec![
            SetSystem::uniform(set(&[A, B, C]), 2),
            SetSystem::partition(set(&[A, B, C]), vec![set(&[A, B]), set(&[C])], vec![1, 1]).unwrap(),
        ])
        .unwrap();
        let weights = [int(3), int(2), int(2)];
        assert_eq!(brute_max(&inter, &weights), int(5));
        assert_eq!(inter.max_weight_feasible(&weights).unwrap(), (set(&[A, C]), int(5)));
    }

    #[test]
    fn max_weight_rejects_bad_weights() {
        let m = SetSystem::uniform(set(&[A, B]), 1);
        assert!(m.max_weight_feasible(&[int(1), int(-1)]).is_err());
        assert!(m.max_weight_feasible(&[int(1)]).is_err());
    }

    #[test]
    fn ties_prefer_lexicographically_smaller() {
        let m = SetSystem::uniform(set(&[A, B, C]), 1);
        let w = [int(1), int(1), int(1)];
        assert_eq!(m.max_weight_feasible(&w).unwrap().0, set(&[A]));
        let e = SetSystem::explicit(set(&[A, B, C]), [set(&[B, C]), set(&[A, C])]).unwrap();
        assert_eq!(e.max_weight_feasible(&w).unwrap().0, set(&[A, C]));
    }

    #[test]
    fn one_uniform_detection() {
        assert!(SetSystem::uniform(set(&[A, B]), 1).is_one_uniform());
        assert!(!SetSystem::uniform(set(&[A, B]), 2).is_one_uniform());
        let e = SetSystem::explicit(set(&[A, B]), [set(&[A]), set(&[B])]).unwrap();
        assert!(e.is_one_uniform());
    }

    #[test]
    fn partition_validation() {
        let g = set(&[A, B, C]);
        assert!(SetSystem::partition(g, vec![set(&[A, B])], vec![1]).is_err());
        assert!(SetSystem::partition(g, vec![set(&[A, B]), set(&[B, C])], vec![1, 1]).is_err());
        assert!(SetSystem::partition(g, vec![set(&[A, B, C])], vec![]).is_err());
    }

    #[test]
    fn feasible_set_enumeration() {
        let m = SetSystem::uniform(set(&[A, B, C]), 2);
        assert_eq!(m.feasible_sets(100).unwrap().len(), 7);
        assert!(m.feasible_sets(3).is_err());
    }

    fn arb_family() -> impl Strategy<Value = (usize, Vec<u64>)> {
        (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(0u64..(1 << n), 0..6)))
    }

    fn arb_matroid() -> impl Strategy<Value = SetSystem> {
        (1usize..=8).prop_flat_map(|n| {
            prop_oneof![
                (0usize..=n).prop_map(move |k| SetSystem::uniform(ElementSet::full(n), k)),
                Just(SetSystem::free(ElementSet::full(n))),
                (prop::collection::vec(0usize..3, n), prop::collection::vec(0usize..3, 3)).prop_map(
                    move |(assign, caps)| {
                        let blocks: Vec<ElementSet> = (0..3)
                            .map(|b| (0..n).filter(|&e| assign[e] == b).collect())
                            .collect();
                        let (blocks, caps): (Vec<_>, Vec<_>) =
                            blocks.into_iter().zip(caps).filter(|(b, _)| !b.is_empty()).unzip();
                        SetSystem::partition(ElementSet::full(n), blocks, caps).unwrap()
                    }
                ),
            ]
        })
    }

    proptest! {
        #[test]
        fn explicit_families_are_downward_closed((n, sets) in arb_family()) {
            let ground = ElementSet::full(n);
            let m = SetSystem::explicit(ground, sets.into_iter().map(ElementSet::from_bits)).unwrap();
            for t in 0u64..(1 << n) {
                for s in 0u64..(1 << n) {
                    if s & !t == 0 && m.contains(ElementSet::from_bits(t)) {
                        prop_assert!(m.contains(ElementSet::from_bits(s)));
                    }
                }
            }
        }

        #[test]
        fn greedy_matches_exhaustive(m in arb_matroid(), raw in prop::collection::vec((0i64..6, 1i64..4), 8)) {
            let weights: Vec<Rational> = raw.iter().map(|&(n, d)| rat(n, d)).collect();
            let (best, value) = m.max_weight_feasible(&weights).unwrap();
            prop_assert!(m.contains(best));
            prop_assert_eq!(weight_of(best, &weights), value.clone());
            prop_assert_eq!(value, brute_max(&m, &weights));
        }

        #[test]
        fn restriction_agrees((n, sets) in arb_family(), f in 0u64..64) {
            let ground = ElementSet::full(n);
            let f = ElementSet::from_bits(f).intersection(ground);
            let m = SetSystem::intersection(vec![
                SetSystem::explicit(ground, sets.into_iter().map(ElementSet::from_bits)).unwrap(),
                SetSystem::uniform(ground, 2),
            ]).unwrap();
            let r = m.restrict(f).unwrap();
            for s in 0u64..(1 << n) {
                let s = ElementSet::from_bits(s);
                if s.is_subset(f) {
                    prop_assert_eq!(r.contains(s), m.contains(s));
                }
            }
        }
    }
}
