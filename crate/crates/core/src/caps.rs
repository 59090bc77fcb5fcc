//! Enumeration caps.
//!
//! Every exhaustive routine checks its search space against one of these
//! before starting. Overrides come from a `key=value,key=value` string, which
//! is what the `DELEGATION_LAB_CAPS` environment variable holds.

use crate::error::{Error, Result};

pub const CAPS_ENV: &str = "DELEGATION_LAB_CAPS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Points of the product support enumerated for expectations.
    pub scenarios: u128,
    /// Memoized states in an adaptive probing program.
    pub dp_states: u128,
    /// Outer-feasible probe sets searched for the best non-adaptive set.
    pub outer_sets: u128,
    /// Element orderings times scenarios checked by the almighty adversary.
    pub orderings: u128,
    /// Realizable inner-feasible outcome sets a policy is materialized over.
    pub outcome_sets: u128,
    /// Candidate outcome sets the policy oracle takes subsets of (2^n policies).
    pub policy_candidates: u128,
    /// Candidate (element, value) sets a greedy-family search ranges over.
    pub family_candidates: u128,
    /// Downward-closed greedy families evaluated by the family search.
    pub families: u128,
    /// Parameter points evaluated by the lottery-menu grid search.
    pub grid_points: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            scenarios: 1_000_000,
            dp_states: 1_000_000,
            outer_sets: 100_000,
            orderings: 1_000_000,
            outcome_sets: 100_000,
            policy_candidates: 20,
            family_candidates: 20,
            families: 100_000,
            grid_points: 1_000_000,
        }
    }
}

impl Caps {
    /// Applies overrides such as `"scenarios=5000,policy_candidates=12"`.
    pub fn with_overrides(&self, spec: &str) -> Result<Caps> {
        let mut caps = self.clone();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("cap override {part:?} is not key=value")))?;
            let value: u128 = value
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("cap {key} has non-integer value {value:?}")))?;
            if value == 0 {
                return Err(Error::input(format!("cap {key} must be positive")));
            }
            let slot = match key.trim() {
                "scenarios" => &mut caps.scenarios,
                "dp_states" => &mut caps.dp_states,
                "outer_sets" => &mut caps.outer_sets,
                "orderings" => &mut caps.orderings,
                "outcome_sets" => &mut caps.outcome_sets,
                "policy_candidates" => &mut caps.policy_candidates,
                "family_candidates" => &mut caps.family_candidates,
                "families" => &mut caps.families,
                "grid_points" => &mut caps.grid_points,
                other => return Err(Error::input(format!("unknown cap {other:?}"))),
            };
            *slot = value;
        }
        Ok(caps)
    }

    /// Defaults with `DELEGATION_LAB_CAPS` applied, if set.
    pub fn from_env() -> Result<Caps> {
        match std::env::var(CAPS_ENV) {
            Ok(spec) => Caps::default().with_overrides(&spec),
            Err(_) => Ok(Caps::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let caps = Caps::default()
            .with_overrides("scenarios=10, policy_candidates=3")
            .unwrap();
        assert_eq!(caps.scenarios, 10);
        assert_eq!(caps.policy_candidates, 3);
        assert_eq!(caps.dp_states, Caps::default().dp_states);
    }

    #[test]
    fn bad_overrides_rejected() {
        assert!(Caps::default().with_overrides("nope=3").is_err());
        assert!(Caps::default().with_overrides("scenarios=0").is_err());
        assert!(Caps::default().with_overrides("scenarios").is_err());
        assert!(Caps::default().with_overrides("scenarios=-1").is_err());
    }
}
