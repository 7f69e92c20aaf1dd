//! Testing candidate menus for validity, turning failures into cuts, and
//! repairing assignments by water-filling.

use menu_commit::approachability::{separating_hyperplane, test_assignment_valid, water_fill_repair, DirectionNet};
use menu_commit::fixtures::g1;
use menu_commit::menus::{candidate_menu, response_satisfiable_at};
use menu_commit::{Csp, CspAssignment};

fn main() -> menu_commit::Result<()> {
    let game = g1();
    let delta = 0.05;
    println!(
        "direction net for k=3 at spacing 0.1: {} points",
        DirectionNet::new(3, 0.1)?.len()
    );

    // (B,R) leaves the optimizer 0, below what it can force (0.75).
    let low = CspAssignment::new(vec![Csp::point_mass(3, 2, 1, 0)])?;
    let verdict = test_assignment_valid(&low, &game, delta)?;
    println!("(B,R): {:?}, min slack {:.3}", verdict.outcome, verdict.min_slack);
    let cert = verdict.certificate.expect("invalid assignment has a certificate");
    println!("  certificate y* = {:?}", cert.y);
    let menu = candidate_menu(&low, 0.0, &game)?;
    println!(
        "  any response to y* inside the menu? {}",
        response_satisfiable_at(&menu, &cert.y)?.is_some()
    );
    let cut = separating_hyperplane(&low, &game, &cert.y)?;
    println!(
        "  cut: weights {:?}, offset {:.3}, margin {:.3}",
        cut.h, cut.offset, cut.margin
    );

    let repaired = water_fill_repair(&low, &game, 1.0)?;
    let after = test_assignment_valid(&repaired, &game, delta)?;
    println!(
        "after water-filling with eps = 1: {:?} (CSP {:?})",
        after.outcome,
        repaired.profile(0).weights()
    );

    let mixed = Csp::point_mass(3, 2, 2, 0).mix(&Csp::point_mass(3, 2, 1, 0), 0.25)?;
    let ok = test_assignment_valid(&CspAssignment::new(vec![mixed])?, &game, delta)?;
    println!("1/4 (C,R) + 3/4 (B,R): {:?}, min slack {:.3}", ok.outcome, ok.min_slack);
    Ok(())
}
