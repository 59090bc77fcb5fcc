//! Built-in parametric instances.
//!
//! `table1(ε)` and `table2(ε)` are the two-element, 1-uniform, unconstrained
//! instances on which lotteries respectively help and do not help; element
//! `"1"` is `(0, 0)` w.p. `1 − ε` and `(1/ε, ·)` w.p. `ε`, element `"2"` is
//! `(1, 1)` surely. `coins2` is two iid fair coins with `x = y ∈ {0, 1}`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instance::{Element, Instance, UtilityAtom};
use crate::rational::{int, one, rat, zero, Rational};
use crate::set_system::{ElementSet, SetSystem};

pub const NAMES: &[&str] = &["table1", "table2", "coins2"];

fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps <= &Rational::zero() || eps >= &Rational::one() {
        return Err(Error::input(format!("epsilon {eps} must lie in (0, 1)")));
    }
    Ok(())
}

fn two_element(eps: &Rational, y_high: Rational) -> Result<Instance> {
    check_epsilon(eps)?;
    let g = ElementSet::full(2);
    Instance::new(
        vec![
            Element::new(
                "1",
                vec![
                    UtilityAtom::new(zero(), zero(), one() - eps),
                    UtilityAtom::new(one() / eps, y_high, eps.clone()),
                ],
            ),
            Element::new("2", vec![UtilityAtom::new(one(), one(), one())]),
        ],
        SetSystem::free(g),
        SetSystem::uniform(g, 1),
    )
}

/// Agent utility of the rare high outcome is `1 − ε`.
pub fn table1(eps: &Rational) -> Result<Instance> {
    two_element(eps, one() - eps)
}

/// Agent utility of the rare high outcome is `0`.
pub fn table2(eps: &Rational) -> Result<Instance> {
    two_element(eps, zero())
}

pub fn coins2() -> Instance {
    let g = ElementSet::full(2);
    let coin = |id: &str| {
        Element::new(
            id,
            vec![
                UtilityAtom::new(int(0), int(0), rat(1, 2)),
                UtilityAtom::new(int(1), int(1), rat(1, 2)),
            ],
        )
    };
    Instance::new(vec![coin("a"), coin("b")], SetSystem::free(g), SetSystem::uniform(g, 1))
        .expect("coins2 is well formed")
}

/// Looks up a built-in by name; `epsilon` is required for the table instances.
pub fn by_name(name: &str, epsilon: Option<&Rational>) -> Result<Instance> {
    let need_eps = || epsilon.ok_or_else(|| Error::input(format!("built-in {name} needs --epsilon")));
    match name {
        "table1" => table1(need_eps()?),
        "table2" => table2(need_eps()?),
        "coins2" => Ok(coins2()),
        other => Err(Error::input(format!(
            "unknown built-in {other:?}; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}
