//! Lottery menus: the agent proposes a distribution over outcome sets and the
//! principal draws one. A drawn set pays `(x(T), y(T))` if the agent probed
//! all of it and nothing otherwise.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::caps::Caps;
use crate::delegation::{Policy, PolicyEvaluation, PolicyEvaluator, TieBreakMode};
use crate::error::{Error, Result};
use crate::instance::{Instance, KeySet, OutcomeSet};
use crate::probing::{prefer, Value};
use crate::rational::Rational;

/// A distribution over outcome sets. Zero-probability atoms are dropped and
/// repeated sets merged; atoms are sorted by set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lottery {
    atoms: Vec<(OutcomeSet, Rational)>,
}

impl Lottery {
    pub fn new(atoms: impl IntoIterator<Item = (OutcomeSet, Rational)>) -> Result<Lottery> {
        let mut merged: BTreeMap<OutcomeSet, Rational> = BTreeMap::new();
        for (set, p) in atoms {
            if p.is_negative() {
                return Err(Error::input(format!("lottery probability {p} is negative")));
            }
            *merged.entry(set).or_insert_with(Rational::zero) += p;
        }
        merged.retain(|_, p| !p.is_zero());
        let total: Rational = merged.values().sum();
        if total != Rational::one() {
            return Err(Error::input(format!("lottery probabilities sum to {total}, not 1")));
        }
        Ok(Lottery { atoms: merged.into_iter().collect() })
    }

    /// All mass on one set.
    pub fn point(set: OutcomeSet) -> Lottery {
        Lottery { atoms: vec![(set, Rational::one())] }
    }

    pub fn atoms(&self) -> &[(OutcomeSet, Rational)] {
        &self.atoms
    }

    pub fn support(&self) -> BTreeSet<&OutcomeSet> {
        self.atoms.iter().map(|(s, _)| s).collect()
    }

    /// Expected `(y, x)` when the probed outcomes are `probed`.
    pub fn value_given(&self, probed: &OutcomeSet) -> (Rational, Rational) {
        let mut v = (Rational::zero(), Rational::zero());
        for (set, p) in &self.atoms {
            if set.is_subset(probed) {
                for o in set {
                    v.0 += p * &o.y;
                    v.1 += p * &o.x;
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LotteryMenu {
    lotteries: Vec<Lottery>,
}

impl LotteryMenu {
    /// Keeps the first copy of repeated lotteries. Two different lotteries
    /// on the same support are rejected.
    pub fn new(lotteries: impl IntoIterator<Item = Lottery>) -> Result<LotteryMenu> {
        let mut kept: Vec<Lottery> = Vec::new();
        for l in lotteries {
            if kept.contains(&l) {
                continue;
            }
            if kept.iter().any(|k| k.support() == l.support()) {
                return Err(Error::input(
                    "menu has two different lotteries on the same support; use merge_duplicate_supports",
                ));
            }
            kept.push(l);
        }
        Ok(LotteryMenu { lotteries: kept })
    }

    /// Like [`LotteryMenu::new`], but first drops any lottery that another
    /// lottery on the same support weakly beats for the agent (and, on agent
    /// ties, for the principal) whatever was probed. Fails if two lotteries
    /// on one support remain.
    pub fn merge_duplicate_supports(lotteries: impl IntoIterator<Item = Lottery>) -> Result<LotteryMenu> {
        let mut all: Vec<Lottery> = Vec::new();
        for l in lotteries {
            if !all.contains(&l) {
                all.push(l);
            }
        }
        let mut dropped = vec![false; all.len()];
        for i in 0..all.len() {
            for j in 0..all.len() {
                if i == j || dropped[j] || all[i].support() != all[j].support() {
                    continue;
                }
                if dominates(&all[j], &all[i]) {
                    dropped[i] = true;
                    break;
                }
            }
        }
        LotteryMenu::new(all.into_iter().zip(dropped).filter(|(_, d)| !d).map(|(l, _)| l))
    }

    pub fn empty() -> LotteryMenu {
        LotteryMenu::default()
    }

    /// The point-mass lottery of every acceptable set, in canonical order.
    pub fn from_policy(instance: &Instance, policy: &Policy, caps: &Caps) -> Result<LotteryMenu> {
        let keys = policy.acceptable_keys(instance, caps)?;
        LotteryMenu::new(keys.iter().map(|k| Lottery::point(instance.outcomes_from_keys(k))))
    }

    pub fn lotteries(&self) -> &[Lottery] {
        &self.lotteries
    }

    pub fn len(&self) -> usize {
        self.lotteries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lotteries.is_empty()
    }

    /// Checks every support set against Ω_in of `instance` (the empty set is allowed).
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        for l in &self.lotteries {
            for (set, _) in &l.atoms {
                if !set.is_empty() && !instance.is_inner_feasible_outcome_set(set) {
                    return Err(Error::input("a lottery puts mass on a set outside Ω_in"));
                }
            }
        }
        Ok(())
    }
}

/// True iff `a` is at least as good as `b` for the agent on every probed
/// pattern, and at least as good for the principal wherever the agent is
/// indifferent. Patterns are unions of consistent subfamilies of the support.
fn dominates(a: &Lottery, b: &Lottery) -> bool {
    let sets: Vec<&OutcomeSet> = a.support().into_iter().collect();
    if sets.len() >= 20 {
        return false;
    }
    (0u32..1 << sets.len()).all(|mask| {
        let probed: OutcomeSet = (0..sets.len())
            .filter(|i| mask >> i & 1 == 1)
            .flat_map(|i| sets[i].iter().cloned())
            .collect();
        let elements: BTreeSet<usize> = probed.iter().map(|o| o.element).collect();
        if elements.len() != probed.len() {
            return true;
        }
        let (va, vb) = (a.value_given(&probed), b.value_given(&probed));
        va.0 > vb.0 || (va.0 == vb.0 && va.1 >= vb.1)
    })
}

/// The lottery the agent proposes after probing `probed`, or `None` when no
/// lottery beats proposing nothing. Ties follow `mode`; the lexicographic
/// order is "nothing" first, then menu order.
pub fn agent_lottery_choice<'m>(menu: &'m LotteryMenu, probed: &OutcomeSet, mode: TieBreakMode) -> Option<&'m Lottery> {
    let mut best: (Option<&Lottery>, Value) = (None, (Rational::zero(), Rational::zero()));
    for l in &menu.lotteries {
        let v = l.value_given(probed);
        if prefer(mode, &v, &best.1) {
            best = (Some(l), v);
        }
    }
    best.0
}

/// The menu in index form with per-atom `(y, x)` totals.
struct Compiled {
    lotteries: Vec<Vec<(KeySet, Rational, Value)>>,
}

impl Compiled {
    fn new(instance: &Instance, menu: &LotteryMenu) -> Result<Self> {
        menu.validate(instance)?;
        let lotteries = menu
            .lotteries
            .iter()
            .map(|l| {
                l.atoms
                    .iter()
                    .map(|(set, p)| {
                        let keys = instance.keys_of(set).expect("validated against the instance");
                        let y: Rational = set.iter().map(|o| &o.y).sum();
                        let x: Rational = set.iter().map(|o| &o.x).sum();
                        (keys, p.clone(), (y, x))
                    })
                    .collect()
            })
            .collect();
        Ok(Compiled { lotteries })
    }

    fn respond(&self, key: &[u8], mode: TieBreakMode) -> Value {
        let mut best = (Rational::zero(), Rational::zero());
        for atoms in &self.lotteries {
            let mut v = (Rational::zero(), Rational::zero());
            for (keys, p, (y, x)) in atoms {
                if keys.iter().all(|&(e, a)| key[e] as usize == a + 1) {
                    v.0 += p * y;
                    v.1 += p * x;
                }
            }
            if prefer(mode, &v, &best) {
                best = v;
            }
        }
        best
    }
}

fn evaluate_compiled(evaluator: &PolicyEvaluator<'_>, menu: &LotteryMenu, mode: TieBreakMode) -> Result<PolicyEvaluation> {
    let compiled = Compiled::new(evaluator.instance(), menu)?;
    evaluator.evaluate_with(mode, |key| compiled.respond(key, mode))
}

/// Exact expected utilities when the agent probes adaptively and then picks
/// from the menu.
pub fn evaluate_lottery_menu(
    instance: &Instance,
    menu: &LotteryMenu,
    mode: TieBreakMode,
    caps: &Caps,
) -> Result<PolicyEvaluation> {
    evaluate_compiled(&PolicyEvaluator::new(instance, caps)?, menu, mode)
}

/// Outcomes of a two-element instance in which one element has two atoms
/// and the other is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoElementShape {
    /// `low` and `high` are the atoms of the random element ordered by `x`;
    /// `sure` is the deterministic element's outcome.
    Risky { low: OutcomeSet, high: OutcomeSet, sure: OutcomeSet },
    /// Both elements deterministic, ordered by `x`.
    Deterministic { low: OutcomeSet, high: OutcomeSet },
}

impl TwoElementShape {
    pub fn of(instance: &Instance) -> Result<TwoElementShape> {
        if instance.len() != 2 || !instance.inner().is_one_uniform() {
            return Err(Error::unsupported(
                "two-lottery search needs exactly two elements under a 1-uniform inner constraint",
            ));
        }
        let single = |e: usize, a: usize| OutcomeSet::from([instance.outcome(e, a)]);
        let by_x = |e: usize| {
            let atoms = instance.atoms(e);
            let mut idx: Vec<usize> = (0..atoms.len()).collect();
            idx.sort_by(|&i, &j| atoms[i].x.cmp(&atoms[j].x).then(atoms[i].y.cmp(&atoms[j].y)));
            idx
        };
        match (instance.atoms(0).len(), instance.atoms(1).len()) {
            (2, 1) | (1, 2) => {
                let (r, s) = if instance.atoms(0).len() == 2 { (0, 1) } else { (1, 0) };
                let idx = by_x(r);
                Ok(TwoElementShape::Risky { low: single(r, idx[0]), high: single(r, idx[1]), sure: single(s, 0) })
            }
            (1, 1) => {
                let (lo, hi) = if instance.atoms(0)[0].x <= instance.atoms(1)[0].x { (0, 1) } else { (1, 0) };
                Ok(TwoElementShape::Deterministic { low: single(lo, 0), high: single(hi, 0) })
            }
            _ => Err(Error::unsupported(
                "two-lottery search needs one two-atom element and one deterministic element",
            )),
        }
    }

    /// The parametrized menu: `A` puts `a` on the sure outcome and the rest on
    /// the low atom, `B` puts `b` on the sure outcome and the rest on the high
    /// atom. In the deterministic shape only `A` exists, with `high` in place
    /// of the sure outcome.
    pub fn menu(&self, a: &Rational, b: &Rational) -> Result<LotteryMenu> {
        let unit = |q: &Rational| {
            if q.is_negative() || q > &Rational::one() {
                Err(Error::input(format!("menu parameter {q} outside [0, 1]")))
            } else {
                Ok(())
            }
        };
        unit(a)?;
        match self {
            TwoElementShape::Risky { low, high, sure } => {
                unit(b)?;
                let la = Lottery::new([(sure.clone(), a.clone()), (low.clone(), Rational::one() - a)])?;
                let lb = Lottery::new([(sure.clone(), b.clone()), (high.clone(), Rational::one() - b)])?;
                LotteryMenu::new([la, lb])
            }
            TwoElementShape::Deterministic { low, high } => {
                LotteryMenu::new([Lottery::new([(high.clone(), a.clone()), (low.clone(), Rational::one() - a)])?])
            }
        }
    }
}

/// Best menu over the grid `a, b ∈ {0, step, 2·step, …, 1}`; `step` must be
/// `1/k`. Ties go to the largest `a`, then the largest `b`.
pub fn search_two_lottery_menus(
    instance: &Instance,
    step: &Rational,
    mode: TieBreakMode,
    caps: &Caps,
) -> Result<(LotteryMenu, PolicyEvaluation)> {
    let shape = TwoElementShape::of(instance)?;
    if !step.is_positive() || !step.numer().is_one() {
        return Err(Error::input(format!("grid step {step} must be 1/k for a positive integer k")));
    }
    let k = step
        .denom()
        .to_u64()
        .ok_or_else(|| Error::input("grid step is too fine"))?;
    let levels: Vec<Rational> = (0..=k).map(|i| Rational::new(i.into(), k.into())).collect();
    let points: Vec<(usize, usize)> = match shape {
        TwoElementShape::Risky { .. } => (0..levels.len()).flat_map(|i| (0..levels.len()).map(move |j| (i, j))).collect(),
        TwoElementShape::Deterministic { .. } => (0..levels.len()).map(|i| (i, 0)).collect(),
    };
    Error::check_cap("grid points", points.len() as u128, caps.grid_points)?;
    let evaluator = PolicyEvaluator::new(instance, caps)?;
    let results: Vec<(LotteryMenu, PolicyEvaluation)> = points
        .par_iter()
        .map(|&(i, j)| {
            let menu = shape.menu(&levels[i], &levels[j])?;
            let ev = evaluate_compiled(&evaluator, &menu, mode)?;
            Ok((menu, ev))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..results.len() {
        if results[i].1.principal_value >= results[best].1.principal_value {
            best = i;
        }
    }
    Ok(results.into_iter().nth(best).expect("the grid has at least two points"))
}

/// The two-lottery menu for the first table instance: the rare outcome
/// surely, or the sure element w.p. `1 − 2ε` and the zero outcome otherwise.
/// Needs `ε ≤ 1/2`.
pub fn table1_menu(instance: &Instance, eps: &Rational) -> Result<LotteryMenu> {
    let TwoElementShape::Risky { low, high, sure } = TwoElementShape::of(instance)? else {
        return Err(Error::unsupported("the table menu needs a two-atom element"));
    };
    let two = Rational::from_integer(2.into());
    LotteryMenu::new([
        Lottery::point(high),
        Lottery::new([(sure, Rational::one() - &two * eps), (low, &two * eps)])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::delegation::evaluate_policy;
    use crate::instance::{Element, Outcome, UtilityAtom};
    use crate::rational::{int, one, rat, zero};
    use crate::set_system::{ElementSet, SetSystem};

    fn caps() -> Caps {
        Caps::default()
    }

    fn single(inst: &Instance, e: usize, a: usize) -> OutcomeSet {
        OutcomeSet::from([inst.outcome(e, a)])
    }

    fn stated_menu(inst: &Instance, eps: &Rational) -> LotteryMenu {
        table1_menu(inst, eps).unwrap()
    }

    #[test]
    fn agent_choice_examples() {
        let eps = rat(1, 4);
        let inst = builtin::table1(&eps).unwrap();
        let menu = stated_menu(&inst, &eps);
        let (w0, w1, w2) = (inst.outcome(0, 0), inst.outcome(0, 1), inst.outcome(1, 0));
        let high: OutcomeSet = [w1.clone(), w2.clone()].into();
        let low: OutcomeSet = [w0, w2].into();
        for mode in TieBreakMode::ALL {
            assert_eq!(agent_lottery_choice(&menu, &high, mode), Some(&menu.lotteries()[0]));
            assert_eq!(agent_lottery_choice(&menu, &low, mode), Some(&menu.lotteries()[1]));
            assert_eq!(agent_lottery_choice(&LotteryMenu::empty(), &high, mode), None);
        }
        assert_eq!(menu.lotteries()[0].value_given(&high), (one() - &eps, int(4)));
    }

    #[test]
    fn stated_menu_value() {
        for eps in [rat(1, 10), rat(1, 4), rat(1, 3)] {
            let inst = builtin::table1(&eps).unwrap();
            let ev = evaluate_lottery_menu(&inst, &stated_menu(&inst, &eps), TieBreakMode::Adversarial, &caps()).unwrap();
            let value = int(2) - int(3) * &eps + int(2) * &eps * &eps;
            assert_eq!(ev.principal_value, value);
            assert_eq!(ev.alpha, &value / (int(2) - &eps));
        }
    }

    #[test]
    fn empty_set_point_mass_is_worthless() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let menu = LotteryMenu::new([Lottery::point(OutcomeSet::new())]).unwrap();
        let ev = evaluate_lottery_menu(&inst, &menu, TieBreakMode::PrincipalFavoring, &caps()).unwrap();
        assert_eq!(ev.principal_value, zero());
    }

    #[test]
    fn table2_grid_never_beats_one() {
        let eps = rat(1, 2);
        let inst = builtin::table2(&eps).unwrap();
        let (menu, ev) = search_two_lottery_menus(&inst, &rat(1, 20), TieBreakMode::PrincipalFavoring, &caps()).unwrap();
        assert_eq!(ev.principal_value, one());
        assert_eq!(ev.alpha, rat(2, 3));
        // the optimum sits at a = 1: the sure element for certain
        let TwoElementShape::Risky { sure, .. } = TwoElementShape::of(&inst).unwrap() else { panic!() };
        assert_eq!(menu.lotteries()[0], Lottery::point(sure));
    }

    #[test]
    fn table1_grid_reaches_the_formula() {
        let eps = rat(1, 4);
        let inst = builtin::table1(&eps).unwrap();
        let (_, ev) = search_two_lottery_menus(&inst, &rat(1, 20), TieBreakMode::Adversarial, &caps()).unwrap();
        assert!(ev.principal_value >= rat(11, 8));
    }

    #[test]
    fn deterministic_pair_needs_no_lottery() {
        let g = ElementSet::full(2);
        let inst = Instance::new(
            vec![
                Element::new("a", vec![UtilityAtom::new(int(3), int(1), one())]),
                Element::new("b", vec![UtilityAtom::new(int(2), int(5), one())]),
            ],
            SetSystem::free(g),
            SetSystem::uniform(g, 1),
        )
        .unwrap();
        let (_, ev) = search_two_lottery_menus(&inst, &rat(1, 4), TieBreakMode::Adversarial, &caps()).unwrap();
        assert_eq!(ev.principal_value, int(3));
        assert_eq!(ev.principal_value, ev.non_delegated_value);
    }

    #[test]
    fn grid_shape_errors() {
        let coins = builtin::coins2();
        assert!(matches!(
            search_two_lottery_menus(&coins, &rat(1, 4), TieBreakMode::Adversarial, &caps()),
            Err(Error::Unsupported(_))
        ));
        let inst = builtin::table2(&rat(1, 2)).unwrap();
        assert!(search_two_lottery_menus(&inst, &rat(2, 5), TieBreakMode::Adversarial, &caps()).is_err());
        let tight = Caps { grid_points: 10, ..caps() };
        assert!(matches!(
            search_two_lottery_menus(&inst, &rat(1, 4), TieBreakMode::Adversarial, &tight),
            Err(Error::Capacity { size: 25, .. })
        ));
    }

    #[test]
    fn point_masses_match_the_deterministic_policy() {
        let inst = builtin::table1(&rat(1, 3)).unwrap();
        let sets: Vec<OutcomeSet> = (0..2).map(|a| single(&inst, 0, a)).chain([single(&inst, 1, 0)]).collect();
        for mask in 0u32..8 {
            let policy = Policy::explicit(&inst, (0..3).filter(|i| mask >> i & 1 == 1).map(|i| sets[i].clone())).unwrap();
            let menu = LotteryMenu::from_policy(&inst, &policy, &caps()).unwrap();
            for mode in TieBreakMode::ALL {
                let det = evaluate_policy(&inst, &policy, mode, &caps()).unwrap();
                let lot = evaluate_lottery_menu(&inst, &menu, mode, &caps()).unwrap();
                assert_eq!(det, lot);
            }
        }
    }

    #[test]
    fn lottery_canonical_form() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let w2 = single(&inst, 1, 0);
        let l = Lottery::new([
            (w2.clone(), rat(1, 4)),
            (OutcomeSet::new(), zero()),
            (w2.clone(), rat(3, 4)),
        ])
        .unwrap();
        assert_eq!(l, Lottery::point(w2.clone()));
        assert!(Lottery::new([(w2.clone(), rat(1, 2))]).is_err());
        assert!(Lottery::new([(w2.clone(), rat(3, 2)), (OutcomeSet::new(), rat(-1, 2))]).is_err());
        let bad = LotteryMenu::new([Lottery::point(OutcomeSet::from([Outcome { element: 0, x: int(9), y: int(9) }]))]).unwrap();
        assert!(evaluate_lottery_menu(&inst, &bad, TieBreakMode::Adversarial, &caps()).is_err());
    }

    #[test]
    fn duplicate_supports() {
        let inst = builtin::table1(&rat(1, 4)).unwrap();
        let (w0, w2) = (single(&inst, 0, 0), single(&inst, 1, 0));
        let mk = |p: Rational| Lottery::new([(w2.clone(), p.clone()), (w0.clone(), one() - p)]).unwrap();
        assert!(LotteryMenu::new([mk(rat(1, 2)), mk(rat(1, 2))]).unwrap().len() == 1);
        assert!(LotteryMenu::new([mk(rat(1, 2)), mk(rat(3, 4))]).is_err());
        let merged = LotteryMenu::merge_duplicate_supports([mk(rat(1, 2)), mk(rat(3, 4))]).unwrap();
        assert_eq!(merged.lotteries(), &[mk(rat(3, 4))]);
        // mass on the high atom against mass on the sure outcome: neither dominates
        let w1 = single(&inst, 0, 1);
        let mixed = |p: Rational| Lottery::new([(w2.clone(), p.clone()), (w1.clone(), one() - p)]).unwrap();
        assert!(LotteryMenu::merge_duplicate_supports([mixed(rat(1, 10)), mixed(rat(9, 10))]).is_err());
    }
}
