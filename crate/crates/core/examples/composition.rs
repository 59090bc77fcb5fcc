//! Fix a probe set first, then delegate on it with a threshold policy.

use delegation_lab::benchmark::best_nonadaptive_set;
use delegation_lab::delegation::{compose_outer, evaluate_policy, threshold_policy};
use delegation_lab::gen::{self, OuterShape, Shape};
use delegation_lab::{Caps, TieBreakMode};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let mut rng = gen::rng(42);
    for _ in 0..5 {
        let inst = gen::random_instance(&mut rng, &Shape::desk(OuterShape::Partition));
        let fixed = best_nonadaptive_set(&inst, &caps)?;
        let (policy, f) = compose_outer(&inst, threshold_policy, &caps)?;
        let ev = evaluate_policy(&inst, &policy, TieBreakMode::Adversarial, &caps)?;
        println!(
            "{} elements, probe {:?}: ratio to adaptive {}, alpha {}",
            inst.len(),
            f.iter().map(|e| inst.id(e)).collect::<Vec<_>>(),
            fixed.ratio_to_adaptive,
            ev.alpha
        );
    }
    Ok(())
}
