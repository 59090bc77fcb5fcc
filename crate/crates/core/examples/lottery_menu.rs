//! Randomized acceptance beats every deterministic policy on one instance
//! and gains nothing on another.

use delegation_lab::lottery::{evaluate_lottery_menu, search_two_lottery_menus, table1_menu};
use delegation_lab::oracle::exact_delegation_gap;
use delegation_lab::rational::rat;
use delegation_lab::{builtin, Caps, TieBreakMode};

fn main() -> delegation_lab::Result<()> {
    let caps = Caps::default();
    let eps = rat(1, 4);

    let t1 = builtin::table1(&eps)?;
    let det = exact_delegation_gap(&t1, TieBreakMode::Adversarial, &caps)?;
    let menu = table1_menu(&t1, &eps)?;
    let lottery = evaluate_lottery_menu(&t1, &menu, TieBreakMode::Adversarial, &caps)?;
    println!("table1: deterministic alpha {}, lottery alpha {}", det.alpha_star, lottery.alpha);

    let t2 = builtin::table2(&eps)?;
    let mode = TieBreakMode::PrincipalFavoring;
    let det = exact_delegation_gap(&t2, mode, &caps)?;
    let (best_menu, best) = search_two_lottery_menus(&t2, &rat(1, 20), mode, &caps)?;
    println!("table2: deterministic {}, best of the grid {}", det.best_value, best.principal_value);
    println!("best menu has {} lotteries", best_menu.len());
    Ok(())
}
