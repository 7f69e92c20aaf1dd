//! Optimal commitment among no-regret menus, on the three-action fixture and
//! on a random two-type game.

use menu_commit::commit_nr::{optimal_no_regret_commitment, optimal_no_regret_commitment_with, NrObjective};
use menu_commit::fixtures::{g1, random_game};
use menu_commit::menus::incentive_gap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> menu_commit::Result<()> {
    let game = g1();
    let nr = optimal_no_regret_commitment(&game)?;
    println!(
        "G1: no-swap-regret baseline {:.4}, best no-regret menu {:.4}",
        nr.nsr_baseline, nr.value
    );
    println!(
        "assigned CSP (rows A,B,C x cols R,S): {:?}",
        nr.assignment.profile(0).weights()
    );
    let pick = nr
        .menu
        .select(game.optimizer(0), game.learner(), 0.0)?
        .expect("menu is nonempty");
    println!(
        "optimizer's pick from the menu: optimizer {:.4}, learner {:.4}",
        pick.optimizer_value, pick.learner_value
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let game = random_game(&mut rng, 3, 3, 2);
    let expected = optimal_no_regret_commitment(&game)?;
    let maximin = optimal_no_regret_commitment_with(&game, &NrObjective::Maximin)?;
    println!(
        "\nrandom 3x3, k=2 (prior {:?}): baseline {:.4}, expected-value optimum {:.4}, worst-type optimum {:.4}",
        game.alphas(),
        expected.nsr_baseline,
        expected.value,
        maximin.value
    );
    println!(
        "incentive gap of the optimum: {:.1e}",
        incentive_gap(&expected.assignment, &game)
    );
    println!("{}", serde_json::to_string_pretty(&expected.to_value()).unwrap());
    Ok(())
}
