//! Enumerate every deterministic policy of a random tiny instance.

use delegation_lab::oracle::{enumerate_policies, exact_delegation_gap};
use delegation_lab::delegation::evaluate_policy;
use delegation_lab::{gen, Caps, TieBreakMode};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(41);
    let inst = gen::tiny_instance(&mut gen::rng(seed));
    for e in 0..inst.len() {
        let atoms: Vec<String> = inst.atoms(e).iter().map(|a| format!("(x {}, y {}) w.p. {}", a.x, a.y, a.prob)).collect();
        println!("{}: {}", inst.id(e), atoms.join(", "));
    }

    for (i, policy) in enumerate_policies(&inst, &caps)?.enumerate() {
        let ev = evaluate_policy(&inst, &policy, TieBreakMode::Adversarial, &caps)?;
        println!("policy {i}: alpha {}", ev.alpha);
    }
    for mode in TieBreakMode::ALL {
        let gap = exact_delegation_gap(&inst, mode, &caps)?;
        println!("{mode}: alpha* {} over {} policies", gap.alpha_star, gap.policies_enumerated);
    }
    Ok(())
}
