//! Seeded random instances and greedy families for property suites.
//!
//! Utilities are fractions `n/d` with `d ≤ 4` and value at most
//! `max_value`. Agent utilities are strictly positive, so the agent always
//! strictly prefers proposing an acceptable outcome to proposing nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::Caps;
use crate::error::Result;
use crate::instance::{Element, Instance, UtilityAtom};
use crate::prophet::{realizable_value_sets, GreedyFamily};
use crate::rational::Rational;
use crate::set_system::{ElementSet, SetSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterShape {
    Free,
    /// `k`-uniform with random `k ≥ 1`.
    Uniform,
    /// At most three blocks with random positive capacities.
    Partition,
    /// Uniform or partition, chosen at random.
    Matroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub max_elements: usize,
    pub max_support: usize,
    pub max_value: i64,
    pub outer: OuterShape,
}

impl Shape {
    pub fn desk(outer: OuterShape) -> Shape {
        Shape { max_elements: 4, max_support: 3, max_value: 10, outer }
    }
}

fn value<R: Rng>(rng: &mut R, max: i64, positive: bool) -> Rational {
    let d: i64 = rng.random_range(1..=4);
    let n: i64 = rng.random_range(if positive { 1 } else { 0 }..=max * d);
    Rational::new(n.into(), d.into())
}

fn element<R: Rng>(rng: &mut R, id: String, support: usize, max_value: i64) -> Element {
    let weights: Vec<i64> = (0..support).map(|_| rng.random_range(1..=6)).collect();
    let total: i64 = weights.iter().sum();
    let atoms = weights
        .into_iter()
        .map(|w| {
            UtilityAtom::new(
                value(rng, max_value, false),
                value(rng, max_value, true),
                Rational::new(w.into(), total.into()),
            )
        })
        .collect();
    Element::new(id, atoms)
}

fn outer<R: Rng>(rng: &mut R, n: usize, shape: OuterShape) -> SetSystem {
    let g = ElementSet::full(n);
    let shape = match shape {
        OuterShape::Matroid if rng.random_bool(0.5) => OuterShape::Uniform,
        OuterShape::Matroid => OuterShape::Partition,
        s => s,
    };
    match shape {
        OuterShape::Free => SetSystem::free(g),
        OuterShape::Uniform => SetSystem::uniform(g, rng.random_range(1..=n.max(1))),
        _ => {
            let count = rng.random_range(1..=n.clamp(1, 3));
            let mut blocks = vec![ElementSet::EMPTY; count];
            for e in 0..n {
                // the first elements seed every block so none is empty
                let b = if e < count { e } else { rng.random_range(0..count) };
                blocks[b] = blocks[b].with(e);
            }
            let caps = blocks.iter().map(|b| rng.random_range(1..=b.len())).collect();
            SetSystem::partition(g, blocks, caps).expect("blocks partition the ground set")
        }
    }
}

/// A random instance with a 1-uniform inner constraint.
pub fn random_instance<R: Rng>(rng: &mut R, shape: &Shape) -> Instance {
    let n = rng.random_range(1..=shape.max_elements);
    let elements = (0..n)
        .map(|e| {
            let support = rng.random_range(1..=shape.max_support);
            element(rng, format!("e{e}"), support, shape.max_value)
        })
        .collect();
    let outer = outer(rng, n, shape.outer);
    Instance::new(elements, outer, SetSystem::uniform(ElementSet::full(n), 1)).expect("generated instances are valid")
}

/// A 1-uniform instance with at most three atoms in total, hence at most
/// eight deterministic policies.
pub fn tiny_instance<R: Rng>(rng: &mut R) -> Instance {
    let n = rng.random_range(1..=3);
    let mut supports = vec![1usize; n];
    for _ in 0..rng.random_range(0..=3 - n) {
        let e = rng.random_range(0..n);
        supports[e] += 1;
    }
    let elements = supports
        .iter()
        .enumerate()
        .map(|(e, &s)| element(rng, format!("t{e}"), s, 10))
        .collect();
    let shape = if rng.random_bool(0.5) { OuterShape::Free } else { OuterShape::Matroid };
    let outer = outer(rng, n, shape);
    Instance::new(elements, outer, SetSystem::uniform(ElementSet::full(n), 1)).expect("generated instances are valid")
}

/// The downward closure of a random subfamily of the realizable
/// `(element, x)` sets; each is picked with probability 1/2.
pub fn random_greedy_family<R: Rng>(rng: &mut R, instance: &Instance, caps: &Caps) -> Result<GreedyFamily> {
    let candidates = realizable_value_sets(instance, caps)?;
    let picked: Vec<_> = candidates.into_iter().filter(|_| rng.random_bool(0.5)).collect();
    GreedyFamily::new(instance.inner().clone(), picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn seeded_generation_is_reproducible() {
        let shape = Shape::desk(OuterShape::Matroid);
        let a: Vec<Instance> = (0..5).map(|s| random_instance(&mut rng(s), &shape)).collect();
        let b: Vec<Instance> = (0..5).map(|s| random_instance(&mut rng(s), &shape)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_instances_respect_the_shape() {
        let mut r = rng(7);
        for _ in 0..200 {
            let inst = random_instance(&mut r, &Shape::desk(OuterShape::Partition));
            assert!((1..=4).contains(&inst.len()));
            assert!(inst.inner().is_one_uniform());
            for e in 0..inst.len() {
                assert!(inst.atoms(e).len() <= 3);
                for a in inst.atoms(e) {
                    assert!(a.y.is_positive());
                    assert!(a.x <= Rational::from_integer(10.into()));
                }
            }
        }
    }

    #[test]
    fn tiny_instances_have_few_atoms() {
        let mut r = rng(11);
        for _ in 0..100 {
            let inst = tiny_instance(&mut r);
            let atoms: usize = (0..inst.len()).map(|e| inst.atoms(e).len()).sum();
            assert!(atoms <= 3);
            assert!(inst.scenario_count() <= 16);
        }
    }
}
