//! Dense LP solving with duality certificates, and zero-sum game values.

use menu_commit::lp::{zero_sum_value, LinearProgram};
use menu_commit::Matrix;

fn main() -> menu_commit::Result<()> {
    // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18
    let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
    lp.le(vec![1.0, 0.0], 4.0)
        .le(vec![0.0, 2.0], 12.0)
        .le(vec![3.0, 2.0], 18.0);
    let sol = lp.solve()?;
    let cert = lp.certify(&sol);
    println!(
        "status {:?}, optimum {} at {:?}",
        sol.status, sol.objective_value, sol.point
    );
    println!("duals {:?}", sol.duals);
    println!(
        "primal violation {:.1e}, dual violation {:.1e}, gap {:.1e}",
        cert.primal_violation, cert.dual_violation, cert.gap
    );

    // Rock-paper-scissors: the row player minimizes, value 0 at uniform play.
    let rps = Matrix::from_rows(&[vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]])?;
    let z = zero_sum_value(&rps)?;
    println!("rock-paper-scissors value {:.3}, minimizer {:?}", z.value, z.x);
    Ok(())
}
