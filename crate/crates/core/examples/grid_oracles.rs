//! Brute-force oracles used to cross-check the solvers on tiny games.

use menu_commit::commit_nr::optimal_no_regret_commitment;
use menu_commit::fixtures::{g1, random_game};
use menu_commit::menus::no_swap_regret_menu;
use menu_commit::oracle::{euclidean_distance_to_polytope, grid_bruteforce_nr, grid_general_opt, grid_menu_validity};
use menu_commit::{Csp, CspAssignment};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> menu_commit::Result<()> {
    let game = g1();
    for res in [0.5, 0.25, 0.1] {
        let grid = grid_bruteforce_nr(&game, res)?;
        println!(
            "G1 no-regret lattice at {res}: {:.4} over {} points",
            grid.value, grid.lattice_points
        );
    }
    println!("G1 no-regret LP: {:.4}", optimal_no_regret_commitment(&game)?.value);
    println!(
        "G1 single-type general optimum on the 0.05 lattice: {:.4}",
        grid_general_opt(&game, 0.05)?
    );

    let low = CspAssignment::new(vec![Csp::point_mass(3, 2, 1, 0)])?;
    let v = grid_menu_validity(&low, &game, 0.05)?;
    println!(
        "(B,R) sampled validity: {} after {} grid points, witness {:?}",
        v.valid, v.checked, v.certificate
    );

    let corner = Csp::point_mass(3, 2, 2, 0);
    let d = euclidean_distance_to_polytope(corner.weights(), &no_swap_regret_menu(&game))?;
    println!("distance from (C,R) to the no-swap-regret polytope: {d:.4}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_game(&mut rng, 2, 2, 2);
    println!(
        "random 2x2, k=2: lattice {:.4} <= LP {:.4}",
        grid_bruteforce_nr(&g, 0.1)?.value,
        optimal_no_regret_commitment(&g)?.value
    );
    Ok(())
}
