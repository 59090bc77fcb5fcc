//! Feasibility checks and max-weight selection on the supported set systems.

use delegation_lab::rational::int;
use delegation_lab::{ElementSet, SetSystem};

fn main() -> delegation_lab::Result<()> {
    let g = ElementSet::full(4);
    let partition = SetSystem::partition(
        g,
        vec![ElementSet::from_iter([0, 1]), ElementSet::from_iter([2, 3])],
        vec![1, 2],
    )?;
    let two = SetSystem::uniform(g, 2);
    let both = SetSystem::intersection(vec![partition.clone(), two.clone()])?;

    for set in [ElementSet::from_iter([0, 2]), ElementSet::from_iter([0, 1]), ElementSet::from_iter([0, 2, 3])] {
        println!(
            "{:?}: partition {}, 2-uniform {}, both {}",
            set.iter().collect::<Vec<_>>(),
            partition.is_feasible(set)?,
            two.is_feasible(set)?,
            both.is_feasible(set)?,
        );
    }

    let weights = [int(5), int(4), int(3), int(1)];
    let (best, value) = partition.max_weight_feasible(&weights)?;
    println!("heaviest independent set {:?} weighs {value}", best.iter().collect::<Vec<_>>());
    println!("partition has {} feasible sets", partition.feasible_sets(1 << 10)?.len());
    Ok(())
}
