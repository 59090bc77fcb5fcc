//! Adaptive probing against the best fixed probe set on random matroid outer
//! constraints. Prints the instance where fixing the probes costs most.

use delegation_lab::benchmark::{best_nonadaptive_set, optimal_adaptive_value};
use delegation_lab::gen::{self, OuterShape, Shape};
use delegation_lab::rational::decimal;
use delegation_lab::Caps;

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let mut rng = gen::rng(3);
    let mut worst = None;
    for _ in 0..300 {
        let inst = gen::random_instance(&mut rng, &Shape::desk(OuterShape::Matroid));
        let report = best_nonadaptive_set(&inst, &caps)?;
        if worst.as_ref().is_none_or(|(_, r): &(_, delegation_lab::Rational)| report.ratio_to_adaptive < *r) {
            worst = Some((inst, report.ratio_to_adaptive));
        }
    }
    let (inst, ratio) = worst.expect("at least one instance");
    let adaptive = optimal_adaptive_value(&inst, &caps)?;
    let fixed = best_nonadaptive_set(&inst, &caps)?;
    println!("{}", delegation_lab::schema::instance_to_json(&inst)?);
    println!("adaptive {} ({} states), first probe {:?}", adaptive.expected_value, adaptive.state_count,
        adaptive.first_probe().map(|e| inst.id(e)));
    println!(
        "best fixed set {:?}: {}, ratio {ratio} ≈ {}",
        fixed.best_set.iter().map(|e| inst.id(e)).collect::<Vec<_>>(),
        fixed.expected_value,
        decimal(&ratio, 4)
    );
    Ok(())
}
