//! Problem instances: elements with independent finite bivariate utility
//! distributions, an outer (probing) constraint and an inner (selection)
//! constraint.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::set_system::{ElementSet, SetSystem, MAX_ELEMENTS};

/// Largest support size per element; atom indices are stored in a byte.
pub const MAX_SUPPORT: usize = 254;

/// One point `(x, y)` of an element's distribution with its probability.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UtilityAtom {
    /// Principal utility.
    pub x: Rational,
    /// Agent utility.
    pub y: Rational,
    pub prob: Rational,
}

impl UtilityAtom {
    pub fn new(x: Rational, y: Rational, prob: Rational) -> Self {
        UtilityAtom { x, y, prob }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: String,
    pub support: Vec<UtilityAtom>,
}

impl Element {
    pub fn new(id: impl Into<String>, support: Vec<UtilityAtom>) -> Self {
        Element { id: id.into(), support }
    }
}

/// A labeled outcome `(e, x, y)`. Ordered by element first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub element: usize,
    pub x: Rational,
    pub y: Rational,
}

pub type OutcomeSet = BTreeSet<Outcome>;

/// A full draw: the atom index realized by every element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Realization(Vec<usize>);

impl Realization {
    pub fn new(atoms: Vec<usize>) -> Self {
        Realization(atoms)
    }

    pub fn atom(&self, element: usize) -> usize {
        self.0[element]
    }

    pub fn atoms(&self) -> &[usize] {
        &self.0
    }
}

/// Outcome set in index form: `(element, atom)` pairs sorted by element.
pub(crate) type KeySet = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    elements: Vec<Element>,
    outer: SetSystem,
    inner: SetSystem,
}

impl Instance {
    /// Validates and canonicalizes: duplicate `(x, y)` atoms within an element
    /// are merged (keeping first-appearance order) and probabilities must sum to one.
    pub fn new(elements: Vec<Element>, outer: SetSystem, inner: SetSystem) -> Result<Self> {
        if elements.len() > MAX_ELEMENTS {
            return Err(Error::input(format!(
                "{} elements exceeds the limit of {MAX_ELEMENTS}",
                elements.len()
            )));
        }
        let ground = ElementSet::full(elements.len());
        if outer.ground() != ground || inner.ground() != ground {
            return Err(Error::input("outer and inner constraints must range over all elements"));
        }
        let mut seen = BTreeSet::new();
        let mut canonical = Vec::with_capacity(elements.len());
        for element in elements {
            if !seen.insert(element.id.clone()) {
                return Err(Error::input(format!("duplicate element id {:?}", element.id)));
            }
            canonical.push(canonicalize_element(element)?);
        }
        Ok(Instance { elements: canonical, outer, inner })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn ground(&self) -> ElementSet {
        ElementSet::full(self.len())
    }

    pub fn id(&self, element: usize) -> &str {
        &self.elements[element].id
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::input(format!("unknown element id {id:?}")))
    }

    pub fn atoms(&self, element: usize) -> &[UtilityAtom] {
        &self.elements[element].support
    }

    pub fn outer(&self) -> &SetSystem {
        &self.outer
    }

    pub fn inner(&self) -> &SetSystem {
        &self.inner
    }

    pub fn outcome(&self, element: usize, atom: usize) -> Outcome {
        let a = &self.elements[element].support[atom];
        Outcome { element, x: a.x.clone(), y: a.y.clone() }
    }

    /// Index of the atom `(x, y)` of `element`, if it is in the support.
    pub fn atom_index(&self, element: usize, x: &Rational, y: &Rational) -> Option<usize> {
        self.elements
            .get(element)?
            .support
            .iter()
            .position(|a| &a.x == x && &a.y == y)
    }

    /// Product of support sizes, saturating.
    pub fn scenario_count(&self) -> u128 {
        self.scenario_count_on(self.ground())
    }

    pub(crate) fn scenario_count_on(&self, f: ElementSet) -> u128 {
        f.iter()
            .map(|e| self.elements[e].support.len() as u128)
            .fold(1u128, u128::saturating_mul)
    }

    /// Every point of the product support with its probability.
    pub fn enumerate_scenarios(&self, cap: u128) -> Result<Vec<(Realization, Rational)>> {
        Ok(self
            .marginal_scenarios(self.ground(), cap)?
            .into_iter()
            .map(|(atoms, p)| (Realization(atoms), p))
            .collect())
    }

    /// Product support of the elements in `f` only. Elements outside `f` are
    /// reported at atom 0 and do not contribute to the probability.
    pub(crate) fn marginal_scenarios(&self, f: ElementSet, cap: u128) -> Result<Vec<(Vec<usize>, Rational)>> {
        let count = self.scenario_count_on(f);
        Error::check_cap("scenarios", count, cap)?;
        let members: Vec<usize> = f.iter().collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut atoms = vec![0usize; self.len()];
        loop {
            let p: Rational = members
                .iter()
                .map(|&e| &self.elements[e].support[atoms[e]].prob)
                .product();
            out.push((atoms.clone(), p));
            // odometer over the members of f, last element fastest
            let mut advanced = false;
            for &e in members.iter().rev() {
                atoms[e] += 1;
                if atoms[e] < self.elements[e].support.len() {
                    advanced = true;
                    break;
                }
                atoms[e] = 0;
            }
            if !advanced {
                return Ok(out);
            }
        }
    }

    /// The outcomes of the elements of `f` under realization `r`.
    pub fn outcomes_of(&self, r: &Realization, f: ElementSet) -> OutcomeSet {
        f.iter().map(|e| self.outcome(e, r.atom(e))).collect()
    }

    /// Membership in Ω_in: distinct elements, inner-feasible, each `(x, y)` in its support.
    pub fn is_inner_feasible_outcome_set<'a>(&self, outcomes: impl IntoIterator<Item = &'a Outcome>) -> bool {
        self.keys_of(outcomes)
            .map(|keys| self.inner.contains(keys.iter().map(|&(e, _)| e).collect()))
            .unwrap_or(false)
    }

    /// Index form of an outcome set; `None` if an outcome is not a support
    /// atom or two outcomes share an element.
    pub(crate) fn keys_of<'a>(&self, outcomes: impl IntoIterator<Item = &'a Outcome>) -> Option<KeySet> {
        let mut keys: KeySet = Vec::new();
        for o in outcomes {
            let atom = self.atom_index(o.element, &o.x, &o.y)?;
            keys.push((o.element, atom));
        }
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        Some(keys)
    }

    pub(crate) fn outcomes_from_keys(&self, keys: &[(usize, usize)]) -> OutcomeSet {
        keys.iter().map(|&(e, a)| self.outcome(e, a)).collect()
    }

    /// Every nonempty realizable member of Ω_in, in index form, sorted.
    pub(crate) fn realizable_outcome_sets(&self, cap: u128) -> Result<Vec<KeySet>> {
        let mut out: Vec<KeySet> = Vec::new();
        for set in self.inner.feasible_sets(cap)? {
            if set.is_empty() {
                continue;
            }
            let members: Vec<usize> = set.iter().collect();
            let count = self.scenario_count_on(set);
            Error::check_cap("outcome sets", out.len() as u128 + count, cap)?;
            let mut atoms = vec![0usize; members.len()];
            loop {
                out.push(members.iter().copied().zip(atoms.iter().copied()).collect());
                let mut i = members.len();
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    atoms[i] += 1;
                    if atoms[i] < self.elements[members[i]].support.len() {
                        advanced = true;
                        break;
                    }
                    atoms[i] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// The restriction `I_F = (F, free, inner|F)` with elements renumbered
    /// `0..|F|` in ascending order. Returns the new-to-old index map.
    pub fn restriction(&self, f: ElementSet) -> Result<(Instance, Vec<usize>)> {
        let inner = self.inner.restrict(f)?;
        let old: Vec<usize> = f.iter().collect();
        let mut new_of = vec![usize::MAX; self.len()];
        for (new, &o) in old.iter().enumerate() {
            new_of[o] = new;
        }
        let inner = inner.relabel(&|e| new_of[e]);
        let elements = old.iter().map(|&o| self.elements[o].clone()).collect();
        let sub = Instance {
            elements,
            outer: SetSystem::free(ElementSet::full(old.len())),
            inner,
        };
        Ok((sub, old))
    }

    /// Same instance with a different outer constraint.
    pub fn with_outer(&self, outer: SetSystem) -> Result<Instance> {
        Instance::new(self.elements.clone(), outer, self.inner.clone())
    }

    /// True iff the two elements have identical distributions.
    pub fn same_distribution(&self, a: usize, b: usize) -> bool {
        let sorted = |e: usize| {
            let mut atoms: Vec<(&Rational, &Rational, &Rational)> =
                self.elements[e].support.iter().map(|a| (&a.x, &a.y, &a.prob)).collect();
            atoms.sort();
            atoms
        };
        sorted(a) == sorted(b)
    }

    /// Principal utilities of a realization, indexed by element.
    pub fn x_weights(&self, atoms: &[usize]) -> Vec<Rational> {
        atoms
            .iter()
            .enumerate()
            .map(|(e, &a)| self.elements[e].support[a].x.clone())
            .collect()
    }
}

fn canonicalize_element(element: Element) -> Result<Element> {
    let id = element.id;
    if element.support.is_empty() {
        return Err(Error::input(format!("element {id:?} has an empty support")));
    }
    let mut merged: Vec<UtilityAtom> = Vec::new();
    for atom in element.support {
        if atom.x.is_negative() || atom.y.is_negative() {
            return Err(Error::input(format!("element {id:?} has a negative utility")));
        }
        if !atom.prob.is_positive() || atom.prob > Rational::one() {
            return Err(Error::input(format!(
                "element {id:?} has probability {} outside (0, 1]",
                atom.prob
            )));
        }
        match merged.iter_mut().find(|m| m.x == atom.x && m.y == atom.y) {
            Some(m) => m.prob += atom.prob,
            None => merged.push(atom),
        }
    }
    let total: Rational = merged.iter().map(|a| &a.prob).sum();
    if total != Rational::one() {
        return Err(Error::input(format!("probabilities of element {id:?} sum to {total}, not 1")));
    }
    if merged.len() > MAX_SUPPORT {
        return Err(Error::input(format!("element {id:?} has more than {MAX_SUPPORT} atoms")));
    }
    debug_assert!(merged.iter().all(|a| !a.prob.is_zero()));
    Ok(Element { id, support: merged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::rational::{int, one, rat};

    fn atom(x: i64, y: i64, p: Rational) -> UtilityAtom {
        UtilityAtom::new(int(x), int(y), p)
    }

    fn free_instance(elements: Vec<Element>) -> Instance {
        let g = ElementSet::full(elements.len());
        Instance::new(elements, SetSystem::free(g), SetSystem::uniform(g, 1)).unwrap()
    }

    #[test]
    fn single_atom_single_scenario() {
        let inst = free_instance(vec![Element::new("a", vec![atom(5, 0, one())])]);
        let s = inst.enumerate_scenarios(10).unwrap();
        assert_eq!(s, vec![(Realization::new(vec![0]), one())]);
    }

    #[test]
    fn table1_has_two_equally_likely_scenarios() {
        let inst = builtin::table1(&rat(1, 2)).unwrap();
        let s = inst.enumerate_scenarios(10).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|(_, p)| *p == rat(1, 2)));
    }

    #[test]
    fn product_law() {
        let third = rat(1, 3);
        let half = rat(1, 2);
        let inst = free_instance(vec![
            Element::new("a", vec![atom(0, 1, half.clone()), atom(1, 1, half.clone())]),
            Element::new("b", vec![atom(0, 1, half.clone()), atom(2, 1, half)]),
            Element::new("c", vec![atom(0, 1, third.clone()), atom(1, 1, third.clone()), atom(3, 1, third)]),
        ]);
        let s = inst.enumerate_scenarios(100).unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(s.iter().map(|(_, p)| p).sum::<Rational>(), one());
        assert!(matches!(
            inst.enumerate_scenarios(11),
            Err(Error::Capacity { size: 12, .. })
        ));
    }

    #[test]
    fn outcomes_of_table1() {
        let eps = rat(1, 4);
        let inst = builtin::table1(&eps).unwrap();
        let r = Realization::new(vec![1, 0]);
        assert!(inst.outcomes_of(&r, ElementSet::EMPTY).is_empty());
        let both = inst.outcomes_of(&r, inst.ground());
        let expected: OutcomeSet = [
            Outcome { element: 0, x: int(4), y: rat(3, 4) },
            Outcome { element: 1, x: int(1), y: int(1) },
        ]
        .into_iter()
        .collect();
        assert_eq!(both, expected);
        for (r, _) in inst.enumerate_scenarios(10).unwrap() {
            let only2 = inst.outcomes_of(&r, ElementSet::singleton(1));
            assert_eq!(only2, [Outcome { element: 1, x: int(1), y: int(1) }].into_iter().collect());
        }
        assert!(!inst.is_inner_feasible_outcome_set(&expected));
    }

    #[test]
    fn inner_feasibility_of_outcome_sets() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        assert!(inst.is_inner_feasible_outcome_set(&OutcomeSet::new()));
        let same_element = [
            Outcome { element: 0, x: int(0), y: int(0) },
            Outcome { element: 0, x: int(4), y: rat(3, 4) },
        ];
        assert!(!inst.is_inner_feasible_outcome_set(&same_element));
        let not_atom = [Outcome { element: 1, x: int(2), y: int(1) }];
        assert!(!inst.is_inner_feasible_outcome_set(&not_atom));
        let ok = [Outcome { element: 1, x: int(1), y: int(1) }];
        assert!(inst.is_inner_feasible_outcome_set(&ok));
    }

    #[test]
    fn duplicate_atoms_merge() {
        let half = rat(1, 2);
        let inst = free_instance(vec![Element::new("a", vec![atom(1, 1, half.clone()), atom(1, 1, half)])]);
        assert_eq!(inst.atoms(0), &[atom(1, 1, one())]);
    }

    #[test]
    fn validation_errors() {
        let g = ElementSet::full(1);
        let mk = |support| {
            Instance::new(
                vec![Element::new("a", support)],
                SetSystem::free(g),
                SetSystem::uniform(g, 1),
            )
        };
        assert!(mk(vec![atom(1, 1, rat(1, 2))]).is_err());
        assert!(mk(vec![atom(-1, 1, one())]).is_err());
        assert!(mk(vec![]).is_err());
        assert!(mk(vec![atom(1, 1, rat(3, 2)), atom(0, 0, rat(-1, 2))]).is_err());
        let dup = Instance::new(
            vec![Element::new("a", vec![atom(1, 1, one())]), Element::new("a", vec![atom(1, 1, one())])],
            SetSystem::free(ElementSet::full(2)),
            SetSystem::free(ElementSet::full(2)),
        );
        assert!(dup.is_err());
        let wrong_ground = Instance::new(
            vec![Element::new("a", vec![atom(1, 1, one())])],
            SetSystem::free(ElementSet::full(2)),
            SetSystem::free(g),
        );
        assert!(wrong_ground.is_err());
    }

    #[test]
    fn realizable_sets_of_table1() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let sets = inst.realizable_outcome_sets(100).unwrap();
        assert_eq!(sets, vec![vec![(0, 0)], vec![(0, 1)], vec![(1, 0)]]);
    }

    #[test]
    fn restriction_renumbers() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let (sub, map) = inst.restriction(ElementSet::singleton(1)).unwrap();
        assert_eq!(map, vec![1]);
        assert_eq!(sub.len(), 1);
        assert_eq!(sub.id(0), "2");
        assert!(sub.inner().is_one_uniform());
    }

    #[test]
    fn outcomes_of_is_monotone() {
        let inst = builtin::table1(&rat(1, 3)).unwrap();
        for (r, _) in inst.enumerate_scenarios(10).unwrap() {
            for small in 0u64..4 {
                for big in 0u64..4 {
                    if small & !big == 0 {
                        let a = inst.outcomes_of(&r, ElementSet::from_bits(small));
                        let b = inst.outcomes_of(&r, ElementSet::from_bits(big));
                        assert!(a.is_subset(&b));
                    }
                }
            }
        }
    }
}
