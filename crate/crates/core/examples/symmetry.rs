//! Interchangeable elements and policies that treat them alike.

use delegation_lab::delegation::{is_symmetric_policy, policy_from_greedy, symmetric_groups};
use delegation_lab::instance::OutcomeSet;
use delegation_lab::prophet::samuel_cahn_threshold;
use delegation_lab::{builtin, Caps, GreedyFamily, Policy};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let coins = builtin::coins2();
    let groups = symmetric_groups(&coins, &caps)?;
    println!("groups: {:?}", groups.iter().map(|g| g.iter().collect::<Vec<_>>()).collect::<Vec<_>>());

    let tau = samuel_cahn_threshold(&coins)?;
    let fair = policy_from_greedy(GreedyFamily::threshold(&coins, &tau));
    println!("threshold policy symmetric: {}", is_symmetric_policy(&coins, &fair, &caps)?);

    // accepting heads from coin a only
    let lopsided = Policy::explicit(&coins, [OutcomeSet::from([coins.outcome(0, 1)])])?;
    println!("one-coin policy symmetric: {}", is_symmetric_policy(&coins, &lopsided, &caps)?);
    Ok(())
}
