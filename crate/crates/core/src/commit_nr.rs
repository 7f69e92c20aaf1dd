//! Optimal no-regret commitment as a single LP over CSP assignments.
//!
//! Each type gets its own CSP, constrained to the external-regret polytope,
//! incentive compatible across types, and worth at least that type's
//! Stackelberg value (what it could secure from the swap-regret menu). The
//! learner then offers `conv(M_NSR ∪ {phi_1, .., phi_k})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{assignment_value, bilinear_value, BimatrixGame, Csp, CspAssignment, Matrix};
use crate::lp::{LinearProgram, LpStatus};
use crate::menus::{no_regret_menu, no_swap_regret_menu, HullMenu};
use crate::stackelberg::stackelberg_values;

/// What the learner maximizes over feasible assignments.
#[derive(Debug, Clone, PartialEq)]
pub enum NrObjective {
    /// `sum_s alpha_s u_L(phi_s)`
    Expected,
    /// `min_s u_L(phi_s)`
    Maximin,
    /// `sum_s alpha_s u_L,s(phi_s)` with one learner payoff per type.
    PerTypeLearner(Vec<Matrix>),
}

#[derive(Debug, Clone)]
pub struct NrCommitment {
    pub assignment: CspAssignment,
    /// Objective value at `assignment`.
    pub value: f64,
    pub menu: HullMenu,
    pub stackelberg_values: Vec<f64>,
    pub nsr_baseline: f64,
}

#[derive(Serialize)]
struct NrDoc<'a> {
    value: f64,
    assignment: Vec<&'a [f64]>,
    stackelberg_values: &'a [f64],
    nsr_baseline: f64,
}

impl NrCommitment {
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(NrDoc {
            value: self.value,
            assignment: self.assignment.profiles().iter().map(Csp::weights).collect(),
            stackelberg_values: &self.stackelberg_values,
            nsr_baseline: self.nsr_baseline,
        })
        .expect("serializes")
    }
}

pub fn optimal_no_regret_commitment(game: &BimatrixGame) -> Result<NrCommitment> {
    optimal_no_regret_commitment_with(game, &NrObjective::Expected)
}

pub fn optimal_no_regret_commitment_with(game: &BimatrixGame, objective: &NrObjective) -> Result<NrCommitment> {
    let (k, d) = (game.k(), game.pairs());
    if let NrObjective::PerTypeLearner(us) = objective {
        if us.len() != k || us.iter().any(|u| u.rows() != game.m() || u.cols() != game.n()) {
            return Err(Error::invalid(
                "per-type learner payoffs must be k matrices of the game's shape",
            ));
        }
    }
    let stack = stackelberg_values(game)?;
    let v: Vec<f64> = stack.iter().map(|s| s.value).collect();
    let nsr_baseline = stack
        .iter()
        .enumerate()
        .map(|(s, st)| game.alpha(s) * bilinear_value(game.learner(), &st.csp).expect("shapes agree"))
        .sum();

    let extra = usize::from(matches!(objective, NrObjective::Maximin));
    let nv = k * d + extra;
    let scale = game.payoff_scale();
    let tol = 1e-9 * (1.0 + scale);

    let mut obj = vec![0.0; nv];
    match objective {
        NrObjective::Expected => {
            for s in 0..k {
                for (q, u) in game.learner().as_slice().iter().enumerate() {
                    obj[s * d + q] = game.alpha(s) * u;
                }
            }
        }
        NrObjective::PerTypeLearner(us) => {
            for s in 0..k {
                for (q, u) in us[s].as_slice().iter().enumerate() {
                    obj[s * d + q] = game.alpha(s) * u;
                }
            }
        }
        NrObjective::Maximin => obj[k * d] = 1.0,
    }

    let mut lp = LinearProgram::maximize(obj.clone());
    if extra == 1 {
        lp.free(k * d);
        for s in 0..k {
            let mut row = vec![0.0; nv];
            row[k * d] = 1.0;
            for (q, u) in game.learner().as_slice().iter().enumerate() {
                row[s * d + q] = -u;
            }
            lp.le(row, 0.0);
        }
    }
    let nr = no_regret_menu(game);
    for s in 0..k {
        let mut row = vec![0.0; nv];
        row[s * d..(s + 1) * d].iter_mut().for_each(|v| *v = 1.0);
        lp.eq(row, 1.0);
        for h in nr.constraints() {
            let mut row = vec![0.0; nv];
            row[s * d..(s + 1) * d].copy_from_slice(&h.normal);
            lp.le(row, h.rhs);
        }
        let u_o = game.optimizer(s).as_slice();
        let mut row = vec![0.0; nv];
        row[s * d..(s + 1) * d].copy_from_slice(u_o);
        lp.ge(row, v[s] - tol);
        for t in 0..k {
            if t != s {
                let mut row = vec![0.0; nv];
                row[s * d..(s + 1) * d].copy_from_slice(u_o);
                for (q, u) in u_o.iter().enumerate() {
                    row[t * d + q] -= u;
                }
                lp.ge(row, 0.0);
            }
        }
    }
    let first = lp.solve()?;
    if first.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!(
            "no-regret commitment LP returned {:?} although Stackelberg outcomes are feasible",
            first.status
        )));
    }

    // Deterministic representative: best total optimizer payoff on the optimal face.
    let mut lex_obj = vec![0.0; nv];
    for s in 0..k {
        lex_obj[s * d..(s + 1) * d].copy_from_slice(game.optimizer(s).as_slice());
    }
    let mut lex = LinearProgram::maximize(lex_obj);
    if extra == 1 {
        lex.free(k * d);
    }
    for c in lp.constraints() {
        lex.add(c.coeffs.clone(), c.relation, c.rhs);
    }
    lex.ge(obj.clone(), first.objective_value - tol);
    let second = lex.solve()?;
    let point = if second.is_optimal() { second.point } else { first.point };

    let profiles = (0..k)
        .map(|s| Csp::from_solver(game.m(), game.n(), point[s * d..(s + 1) * d].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let assignment = CspAssignment::new(profiles)?;
    let value = match objective {
        NrObjective::Expected => assignment_value(game, &assignment)?,
        NrObjective::Maximin => assignment
            .profiles()
            .iter()
            .map(|p| bilinear_value(game.learner(), p).expect("shapes agree"))
            .fold(f64::INFINITY, f64::min),
        NrObjective::PerTypeLearner(us) => (0..k)
            .map(|s| game.alpha(s) * bilinear_value(&us[s], assignment.profile(s)).expect("shapes agree"))
            .sum(),
    };
    let menu = HullMenu::new(no_swap_regret_menu(game), assignment.profiles().to_vec())?;
    Ok(NrCommitment {
        assignment,
        value,
        menu,
        stackelberg_values: v,
        nsr_baseline,
    })
}

/// Learner value of committing to any no-swap-regret algorithm: each type
/// plays its Stackelberg strategy.
pub fn nsr_baseline_value(game: &BimatrixGame) -> Result<f64> {
    let stack = stackelberg_values(game)?;
    let mut total = 0.0;
    for (s, st) in stack.iter().enumerate() {
        total += game.alpha(s) * bilinear_value(game.learner(), &st.csp)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, random_game};
    use crate::menus::{incentive_check, no_regret_check};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g1_optimum_mixes_three_pairs() {
        // Hand-derived vertex: 9/28 (C,R) + 18/28 (B,R) + 1/28 (A,S). The optimizer
        // gets exactly its Stackelberg value 1 and the regret towards B is zero.
        let g = g1();
        let out = optimal_no_regret_commitment(&g).unwrap();
        assert!((out.value - 193.8 / 28.0).abs() < 1e-6, "{}", out.value);
        let phi = out.assignment.profile(0);
        assert!((phi.get(2, 0) - 9.0 / 28.0).abs() < 1e-6);
        assert!((phi.get(1, 0) - 18.0 / 28.0).abs() < 1e-6);
        assert!((phi.get(0, 1) - 1.0 / 28.0).abs() < 1e-6);
        assert!((out.nsr_baseline - 3.0).abs() < 1e-9);
        assert!((nsr_baseline_value(&g).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(out.menu.points.len(), 1);
    }

    #[test]
    fn g1_half_and_half_menu_is_worth_five() {
        let g = g1();
        let phi = Csp::point_mass(3, 2, 2, 0)
            .mix(&Csp::point_mass(3, 2, 0, 1), 0.5)
            .unwrap();
        assert!(no_regret_check(&phi, &g, 0.0));
        let menu = HullMenu::new(no_swap_regret_menu(&g), vec![phi]).unwrap();
        let sel = menu.select(g.optimizer(0), g.learner(), 0.0).unwrap().unwrap();
        assert!((sel.learner_value - 5.0).abs() < 1e-7);
        assert!(optimal_no_regret_commitment(&g).unwrap().value >= 5.0);
    }

    #[test]
    fn one_by_one_game() {
        let g = BimatrixGame::single(Matrix::filled(1, 1, 0.3).unwrap(), Matrix::filled(1, 1, -2.0).unwrap()).unwrap();
        assert!((optimal_no_regret_commitment(&g).unwrap().value - 0.3).abs() < 1e-12);
        assert!((nsr_baseline_value(&g).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn stackelberg_optimal_when_interests_align() {
        // Learner and optimizer share the payoff: the Stackelberg point is the joint favourite.
        let u = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.1, 0.6]]).unwrap();
        let g = BimatrixGame::single(u.clone(), u).unwrap();
        let out = optimal_no_regret_commitment(&g).unwrap();
        assert!((out.value - 1.0).abs() < 1e-9);
        assert!((out.value - out.nsr_baseline).abs() < 1e-9);
    }

    #[test]
    fn invariants_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let g = random_game(&mut rng, 3, 2, 2);
            let out = optimal_no_regret_commitment(&g).unwrap();
            assert!(out.value >= out.nsr_baseline - 1e-7);
            assert!(incentive_check(&out.assignment, &g, 1e-7));
            for s in 0..2 {
                assert!(no_regret_check(out.assignment.profile(s), &g, 1e-7));
                let u = bilinear_value(g.optimizer(s), out.assignment.profile(s)).unwrap();
                assert!(u >= out.stackelberg_values[s] - 1e-7);
            }
            let mm = optimal_no_regret_commitment_with(&g, &NrObjective::Maximin).unwrap();
            let ev = optimal_no_regret_commitment_with(&g, &NrObjective::Expected).unwrap();
            let floor = ev
                .assignment
                .profiles()
                .iter()
                .map(|p| bilinear_value(g.learner(), p).unwrap())
                .fold(f64::INFINITY, f64::min);
            // Maximin optimum is at least the worst type under the expectation optimum,
            // and never above the expectation optimum itself.
            assert!(mm.value >= floor - 1e-7);
            assert!(mm.value <= ev.value + 1e-7);

            let same = NrObjective::PerTypeLearner(vec![g.learner().clone(); 2]);
            let pt = optimal_no_regret_commitment_with(&g, &same).unwrap();
            assert!((pt.value - ev.value).abs() < 1e-7);
        }
    }
}
