//! Stackelberg commitment in a normal-form game.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{BimatrixGame, Csp, Matrix};
use crate::lp::{LinearProgram, LpStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelbergSolution {
    /// Leader payoff at the equilibrium.
    pub value: f64,
    /// Follower payoff at the equilibrium.
    pub follower_value: f64,
    pub leader_mix: Vec<f64>,
    pub follower_action: usize,
    /// `leader_mix (x) e_f` over the leader-by-follower pairs.
    pub csp: Csp,
}

/// Leader mixes over rows and the follower best-responds with a column.
///
/// For each follower action `f` one LP maximizes the leader payoff over the
/// mixes against which `f` is a (weak) best response; a second solve with
/// the leader value pinned maximizes the follower payoff. Across `f` the
/// highest leader value wins, then the highest follower value, then the
/// lowest index.
pub fn stackelberg_leader(leader: &Matrix, follower: &Matrix) -> Result<StackelbergSolution> {
    if leader.rows() != follower.rows() || leader.cols() != follower.cols() {
        return Err(Error::invalid(format!(
            "leader payoff is {}x{} but follower payoff is {}x{}",
            leader.rows(),
            leader.cols(),
            follower.rows(),
            follower.cols()
        )));
    }
    let (a, b) = (leader.rows(), leader.cols());
    let tol = 1e-9 * (1.0 + leader.max_abs().max(follower.max_abs()));
    let mut best: Option<StackelbergSolution> = None;
    for f in 0..b {
        let mut lp = LinearProgram::maximize((0..a).map(|i| leader.get(i, f)).collect());
        lp.eq(vec![1.0; a], 1.0);
        for g in 0..b {
            if g != f {
                let row = (0..a).map(|i| follower.get(i, f) - follower.get(i, g)).collect();
                lp.ge(row, 0.0);
            }
        }
        let first = lp.solve()?;
        match first.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(Error::NumericalFailure(
                    "bounded Stackelberg LP reported unbounded".into(),
                ))
            }
            LpStatus::Optimal => {}
        }
        let value = first.objective_value;
        if let Some(cur) = &best {
            if value < cur.value - tol {
                continue;
            }
        }
        let mut second = lp.clone();
        let pinned: Vec<f64> = (0..a).map(|i| leader.get(i, f)).collect();
        second.ge(pinned, value - tol);
        let mut lex = LinearProgram::maximize((0..a).map(|i| follower.get(i, f)).collect());
        for c in second.constraints() {
            lex.add(c.coeffs.clone(), c.relation, c.rhs);
        }
        let refined = lex.solve()?;
        let mix = if refined.is_optimal() {
            crate::lp::normalize(refined.point)
        } else {
            crate::lp::normalize(first.point)
        };
        let value = (0..a).map(|i| mix[i] * leader.get(i, f)).sum::<f64>();
        let follower_value = (0..a).map(|i| mix[i] * follower.get(i, f)).sum::<f64>();
        let better = match &best {
            None => true,
            Some(cur) => {
                value > cur.value + tol || (value >= cur.value - tol && follower_value > cur.follower_value + tol)
            }
        };
        if better {
            let mut e = vec![0.0; b];
            e[f] = 1.0;
            best = Some(StackelbergSolution {
                value,
                follower_value,
                csp: Csp::product_unchecked(&mix, &e),
                leader_mix: mix,
                follower_action: f,
            });
        }
    }
    best.ok_or_else(|| Error::NumericalFailure("every follower best-response region was empty".into()))
}

/// Optimizer type `s` as leader and the learner as follower, reported in the
/// game's own indexing: `leader_mix` is over optimizer actions,
/// `follower_action` is a learner action and `csp` is `e_f (x) y`.
pub fn optimizer_stackelberg(game: &BimatrixGame, s: usize) -> Result<StackelbergSolution> {
    if s >= game.k() {
        return Err(Error::invalid(format!(
            "type index {s} out of range (k = {})",
            game.k()
        )));
    }
    let sol = stackelberg_leader(&game.optimizer(s).transpose(), &game.learner().transpose())?;
    let mut e = vec![0.0; game.m()];
    e[sol.follower_action] = 1.0;
    Ok(StackelbergSolution {
        csp: Csp::product_unchecked(&e, &sol.leader_mix),
        ..sol
    })
}

/// Stackelberg leader values of every optimizer type against the learner.
pub fn stackelberg_values(game: &BimatrixGame) -> Result<Vec<StackelbergSolution>> {
    (0..game.k()).map(|s| optimizer_stackelberg(game, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, random_matrix};
    use crate::lp::zero_sum_value;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g1_optimizer_leads_to_a_s() {
        let sol = optimizer_stackelberg(&g1(), 0).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert_eq!(sol.follower_action, 0);
        assert!((sol.csp.get(0, 1) - 1.0).abs() < 1e-9);
        assert!((sol.follower_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn one_by_one() {
        let l = Matrix::from_rows(&[vec![2.5]]).unwrap();
        let f = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let sol = stackelberg_leader(&l, &f).unwrap();
        assert_eq!(sol.value, 2.5);
    }

    fn grid_oracle(leader: &Matrix, follower: &Matrix, steps: usize) -> f64 {
        // Three leader actions: lattice over the 2-simplex with leader-favourable ties.
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            for j in 0..=steps - i {
                let x = [
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    (steps - i - j) as f64 / steps as f64,
                ];
                let fv: Vec<f64> = (0..follower.cols())
                    .map(|c| (0..3).map(|r| x[r] * follower.get(r, c)).sum())
                    .collect();
                let top = fv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for c in 0..follower.cols() {
                    if fv[c] >= top - 1e-12 {
                        let lv: f64 = (0..3).map(|r| x[r] * leader.get(r, c)).sum();
                        best = best.max(lv);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn random_three_by_two_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let l = random_matrix(&mut rng, 3, 2, 1.0);
            let f = random_matrix(&mut rng, 3, 2, 1.0);
            let sol = stackelberg_leader(&l, &f).unwrap();
            let grid = grid_oracle(&l, &f, 1000);
            assert!(sol.value >= grid - 1e-8, "{} < {}", sol.value, grid);
            assert!(sol.value <= grid + 5e-3, "{} vs {}", sol.value, grid);
        }
    }

    #[test]
    fn commitment_beats_maximin_and_survives_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let l = random_matrix(&mut rng, 3, 3, 1.0);
            let f = random_matrix(&mut rng, 3, 3, 1.0);
            let sol = stackelberg_leader(&l, &f).unwrap();
            // Leader maximin: rows maximize, so solve the negated transposed game.
            let z = zero_sum_value(&l.map(|v| -v)).unwrap();
            assert!(sol.value >= -z.value - 1e-8);

            let scaled = stackelberg_leader(&l.map(|v| 2.5 * v - 0.75), &f).unwrap();
            assert!((scaled.value - (2.5 * sol.value - 0.75)).abs() < 1e-8);
            assert_eq!(scaled.follower_action, sol.follower_action);
        }
    }
}
