//! Running menus as learning algorithms: a cooperative optimizer follows a
//! published schedule, a defecting one meets the fallback dynamics.

use menu_commit::commit_nr::optimal_no_regret_commitment;
use menu_commit::fixtures::g1;
use menu_commit::playback::{
    compose_abortable, realize_menu_learner, simulate, Adversary, AdversaryKind, RoundRecord, SimulateOptions,
};

fn main() -> menu_commit::Result<()> {
    let game = g1();
    let nr = optimal_no_regret_commitment(&game)?;
    let rounds = 10_000;

    for kind in [AdversaryKind::BestResponse, AdversaryKind::Random { seed: 9 }] {
        let learner = realize_menu_learner(&nr.menu, nr.assignment.profiles().to_vec())?;
        let mut learner = compose_abortable(vec![Box::new(learner)])?;
        let mut optimizer = Adversary::new(kind.clone(), &game, 0)?;
        let mut checkpoints = Vec::new();
        let mut record = |r: &RoundRecord| {
            if (r.t + 1).is_power_of_two() {
                checkpoints.push((r.t + 1, r.learner_payoff));
            }
        };
        let report = simulate(
            &game,
            &mut learner,
            &mut optimizer,
            rounds,
            SimulateOptions {
                menu: Some(&nr.menu.base),
                on_round: Some(&mut record),
                ..Default::default()
            },
        )?;
        println!(
            "{kind:?}: learner average {:.4} (menu value {:.4}), optimizer {:.4}, swap-regret violation {:.4}",
            report.learner_avg,
            nr.value,
            report.optimizer_avg[0],
            report.menu_violation.unwrap_or(0.0)
        );
        println!("  per-round learner payoff at powers of two: {checkpoints:?}");
    }
    Ok(())
}
