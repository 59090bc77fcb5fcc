//! Build a threshold policy, watch the agent respond, and evaluate it under
//! each tie-breaking rule.

use delegation_lab::delegation::{agent_best_response, evaluate_policy, threshold_policy};
use delegation_lab::rational::rat;
use delegation_lab::{builtin, Caps, OutcomeSet, TieBreakMode};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let inst = builtin::table2(&rat(1, 3))?;
    let policy = threshold_policy(&inst)?;
    println!("policy: {policy:?}");

    // both elements probed, the risky one came up high
    let probed = OutcomeSet::from([inst.outcome(0, 1), inst.outcome(1, 0)]);
    for mode in TieBreakMode::ALL {
        let proposal = agent_best_response(&inst, &policy, &probed, mode);
        let ev = evaluate_policy(&inst, &policy, mode, &caps)?;
        println!(
            "{mode}: proposes {:?}, principal {} of {} (alpha {})",
            proposal.iter().map(|o| (inst.id(o.element), o.x.to_string())).collect::<Vec<_>>(),
            ev.principal_value,
            ev.non_delegated_value,
            ev.alpha
        );
    }
    Ok(())
}
