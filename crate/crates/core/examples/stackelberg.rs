//! Stackelberg commitments of every optimizer type, and what a learner using
//! any no-swap-regret algorithm ends up with.

use menu_commit::commit_nr::nsr_baseline_value;
use menu_commit::fixtures::g1;
use menu_commit::stackelberg::stackelberg_values;

fn main() -> menu_commit::Result<()> {
    let game = g1();
    let rows = ["A", "B", "C"];
    let cols = ["R", "S"];
    for (s, sol) in stackelberg_values(&game)?.iter().enumerate() {
        let col = (0..2)
            .max_by(|&a, &b| sol.leader_mix[a].total_cmp(&sol.leader_mix[b]))
            .unwrap();
        println!(
            "type {s}: optimizer commits to {:?} (mostly {}), learner answers {}; optimizer {:.3}, learner {:.3}",
            sol.leader_mix, cols[col], rows[sol.follower_action], sol.value, sol.follower_value
        );
    }
    println!("no-swap-regret learner value: {:.3}", nsr_baseline_value(&game)?);
    Ok(())
}
