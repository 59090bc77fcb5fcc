//! The median-rule gambler against an adversary that orders elements after
//! seeing every value.

use delegation_lab::prophet::{best_greedy_family, evaluate_vs_almighty, median_of_max, samuel_cahn_threshold};
use delegation_lab::rational::rat;
use delegation_lab::{builtin, Caps, GreedyFamily};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let inst = builtin::table1(&rat(1, 10))?;
    let tau = samuel_cahn_threshold(&inst)?;
    println!("median of max {}, threshold {tau}", median_of_max(&inst));

    let report = evaluate_vs_almighty(&inst, &GreedyFamily::threshold(&inst, &tau), &caps)?;
    println!("gambler {} vs prophet {} (ratio {})", report.gambler_value, report.prophet_value, report.ratio);
    for t in &report.scenarios {
        println!("  {:?} p={} prophet {} gambler {}", t.realization.atoms(), t.probability, t.prophet, t.gambler);
    }

    let (family, best) = best_greedy_family(&inst, &caps)?;
    println!("best greedy family has {} maximal sets, ratio {}", family.maximal_sets().len(), best.ratio);
    Ok(())
}
