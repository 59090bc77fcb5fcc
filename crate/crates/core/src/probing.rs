//! Exact adaptive probing by memoized recursion over partial realizations.
//!
//! A state records, for every element, whether it has been probed and which
//! atom it revealed. The mover either stops (collecting a stop value) or
//! probes an element that keeps the probed set outer-feasible. Values are
//! pairs `(mover utility, principal utility)`; the mover maximizes the first
//! component and resolves exact ties in it according to the tie-break mode.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::delegation::TieBreakMode;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::set_system::ElementSet;

pub(crate) type Value = (Rational, Rational);

/// Probed elements carry `atom + 1`; unprobed elements carry 0.
pub(crate) type StateKey = Vec<u8>;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub value: Value,
    /// Element probed next, or `None` to stop.
    pub action: Option<usize>,
}

#[derive(Debug)]
pub(crate) struct Solution {
    pub value: Value,
    pub nodes: HashMap<StateKey, Node>,
}

pub(crate) fn probed_of(key: &[u8]) -> ElementSet {
    key.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(e, _)| e)
        .collect()
}

/// True iff `candidate` beats `incumbent` for a mover using `mode`.
pub(crate) fn prefer(mode: TieBreakMode, candidate: &Value, incumbent: &Value) -> bool {
    match candidate.0.cmp(&incumbent.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match mode {
            TieBreakMode::Adversarial => candidate.1 < incumbent.1,
            TieBreakMode::PrincipalFavoring => candidate.1 > incumbent.1,
            TieBreakMode::Lexicographic => false,
        },
    }
}

struct Solver<'a, S> {
    instance: &'a Instance,
    mode: TieBreakMode,
    cap: u128,
    stop: S,
    nodes: HashMap<StateKey, Node>,
}

impl<S> Solver<'_, S>
where
    S: FnMut(ElementSet, &[u8]) -> Value,
{
    fn solve(&mut self, key: &mut StateKey) -> Result<Value> {
        if let Some(node) = self.nodes.get(key.as_slice()) {
            return Ok(node.value.clone());
        }
        let probed = probed_of(key);
        let mut best = ((self.stop)(probed, key), None);
        for e in 0..self.instance.len() {
            if probed.contains(e) || !self.instance.outer().contains(probed.with(e)) {
                continue;
            }
            let mut expected = (Rational::zero(), Rational::zero());
            for (a, atom) in self.instance.atoms(e).iter().enumerate() {
                key[e] = (a + 1) as u8;
                let (m, p) = self.solve(key)?;
                expected.0 += &atom.prob * m;
                expected.1 += &atom.prob * p;
            }
            key[e] = 0;
            if prefer(self.mode, &expected, &best.0) {
                best = (expected, Some(e));
            }
        }
        Error::check_cap("probing states", self.nodes.len() as u128 + 1, self.cap)?;
        self.nodes.insert(key.clone(), Node { value: best.0.clone(), action: best.1 });
        Ok(best.0)
    }
}

/// Solves the probing program from the empty state.
pub(crate) fn solve<S>(instance: &Instance, mode: TieBreakMode, cap: u128, stop: S) -> Result<Solution>
where
    S: FnMut(ElementSet, &[u8]) -> Value,
{
    let mut solver = Solver { instance, mode, cap, stop, nodes: HashMap::new() };
    let mut root = vec![0u8; instance.len()];
    let value = solver.solve(&mut root)?;
    Ok(Solution { value, nodes: solver.nodes })
}

impl Solution {
    /// Distribution of the final probed set when following the chosen actions.
    pub fn probe_distribution(&self, instance: &Instance) -> Vec<(ElementSet, Rational)> {
        let mut dist: BTreeMap<ElementSet, Rational> = BTreeMap::new();
        let mut stack = vec![(vec![0u8; instance.len()], Rational::one())];
        while let Some((key, p)) = stack.pop() {
            match self.nodes[&key].action {
                None => *dist.entry(probed_of(&key)).or_insert_with(Rational::zero) += p,
                Some(e) => {
                    for (a, atom) in instance.atoms(e).iter().enumerate() {
                        let mut child = key.clone();
                        child[e] = (a + 1) as u8;
                        stack.push((child, &p * &atom.prob));
                    }
                }
            }
        }
        let mut out: Vec<_> = dist.into_iter().collect();
        out.sort_by(|a, b| a.0.lex_cmp(b.0));
        out
    }
}
