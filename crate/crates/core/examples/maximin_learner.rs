//! The maximin learner against each built-in optimizer policy.

use menu_commit::fixtures::{g1, random_game};
use menu_commit::maximin::run_maximin;
use menu_commit::oracle::grid_maximin_opt;
use menu_commit::playback::AdversaryKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> menu_commit::Result<()> {
    let eps = 0.05;
    let rounds = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, game) in [("G1", g1()), ("random 2x2, k=2", random_game(&mut rng, 2, 2, 2))] {
        println!("{name}: scan oracle {:.3}", grid_maximin_opt(&game, eps, 0.02)?);
        for adversary in [
            AdversaryKind::Aborter { delta: 0.02 },
            AdversaryKind::BestResponse,
            AdversaryKind::Schedule,
            AdversaryKind::Random { seed: 1 },
        ] {
            for s in 0..game.k() {
                let r = run_maximin(&game, eps, adversary.clone(), rounds, s)?;
                println!(
                    "  {adversary:?} as type {s}: final V {:.3} after {} aborts, learner average {:.3}",
                    r.final_v, r.aborts, r.learner_avg
                );
            }
        }
    }
    Ok(())
}
