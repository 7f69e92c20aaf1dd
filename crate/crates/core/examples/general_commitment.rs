//! Cutting-plane search over all valid menus, with the cut log summarized.

use std::collections::BTreeMap;

use menu_commit::commit_general::{eval_menu_value, optimize_general, GeneralOptions};
use menu_commit::commit_nr::optimal_no_regret_commitment;
use menu_commit::fixtures::g1;

fn main() -> menu_commit::Result<()> {
    let game = g1();
    let eps = 0.05;
    let nr = optimal_no_regret_commitment(&game)?;
    let out = optimize_general(&game, &GeneralOptions::new(eps))?;
    println!("no-regret optimum      {:.4}", nr.value);
    println!("general lower bound    {:.4}", out.value_lower_bound);
    println!("ellipsoid upper bound  {:.4}", out.upper_bound);
    println!(
        "status {:?} after {} iterations (tester delta {:.4})",
        out.status, out.iterations, out.delta
    );
    println!(
        "menu value under eps tie-breaking: {:.4}",
        eval_menu_value(&out.menu, &game, eps)?
    );
    println!("assignment: {:?}", out.assignment.profile(0).weights());

    let mut kinds = BTreeMap::new();
    for c in &out.cuts {
        *kinds.entry(format!("{:?}", c.kind)).or_insert(0) += 1;
    }
    println!("cuts by kind: {kinds:?}");
    Ok(())
}
