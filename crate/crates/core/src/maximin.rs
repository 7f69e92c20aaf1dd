//! Maximin learner: descending threshold epochs, each run by an abortable
//! Blackwell-style learner on the candidate menu of the epoch's threshold
//! assignment.

use serde::Serialize;

use crate::approachability::halfspace_value;
use crate::error::{Error, Result};
use crate::game::{dot, BimatrixGame, Csp, CspAssignment, Transcript};
use crate::lp::{LinearProgram, LpStatus};
use crate::menus::{candidate_menu_from_thresholds, HullMenu};
use crate::playback::{
    compose_lazy, AbortableLearner, Adversary, AdversaryKind, Choice, Composed, HedgeState, Learner, Offer, Optimizer,
    ScheduledLearner, Step,
};

/// Per-type `argmax u_O,s` over `{phi : u_L(phi) >= v}`, ties broken towards
/// higher learner payoff.
pub fn threshold_assignment(game: &BimatrixGame, v: f64) -> Result<CspAssignment> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("threshold must be finite, got {v}")));
    }
    let u_l = game.learner().as_slice();
    let top = game.learner().max_entry();
    if v > top + 1e-12 * (1.0 + top.abs()) {
        return Err(Error::ThresholdInfeasible {
            threshold: v,
            max_payoff: top,
        });
    }
    let level = v.min(top);
    let d = game.pairs();
    let tol = 1e-10 * (1.0 + game.p_max());
    let mut profiles = Vec::with_capacity(game.k());
    for s in 0..game.k() {
        let u_o = game.optimizer(s).as_slice();
        let mut lp = LinearProgram::maximize(u_o.to_vec());
        lp.eq(vec![1.0; d], 1.0);
        lp.ge(u_l.to_vec(), level);
        let first = lp.solve()?;
        if first.status != LpStatus::Optimal {
            return Err(Error::NumericalFailure(format!(
                "threshold LP returned {:?} below the top learner payoff",
                first.status
            )));
        }
        let mut lex = LinearProgram::maximize(u_l.to_vec());
        for c in lp.constraints() {
            lex.add(c.coeffs.clone(), c.relation, c.rhs);
        }
        lex.ge(u_o.to_vec(), first.objective_value - tol);
        let second = lex.solve()?;
        let point = if second.is_optimal() { second.point } else { first.point };
        profiles.push(Csp::from_solver(game.m(), game.n(), point)?);
    }
    CspAssignment::new(profiles)
}

/// Anytime Hedge step rate for constraint weights, with rewards in
/// `[-2 P_max, 2 P_max]`.
pub fn new_hedge(game: &BimatrixGame) -> HedgeState {
    HedgeState::new(game.k(), 2.0 * game.payoff_scale())
}

/// Rewards `u_O,s(x, y) - c_s` fed to Hedge.
pub fn constraint_rewards(game: &BimatrixGame, thresholds: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    (0..game.k())
        .map(|s| game.optimizer(s).bilinear(x, y) - thresholds[s])
        .collect()
}

pub fn hedge_update(state: &HedgeState, x: &[f64], y: &[f64], thresholds: &[f64], game: &BimatrixGame) -> HedgeState {
    let mut next = state.clone();
    next.update(&constraint_rewards(game, thresholds, x, y));
    next
}

/// Plays the minimizer of the Hedge-weighted constraint if it holds against
/// every optimizer action, otherwise aborts with the maximizing `y`.
pub fn blackwell_abort_step(state: &HedgeState, thresholds: &[f64], game: &BimatrixGame) -> Result<Step> {
    let p = state.weights();
    let z = halfspace_value(game, p)?;
    let pc = dot(p, thresholds);
    if z.value <= pc + 1e-9 * (1.0 + game.p_max()) {
        Ok(Step::Play(z.x))
    } else {
        Ok(Step::Abort(z.y))
    }
}

/// Anytime Hedge regret bound `4 P_max sqrt(t ln k)`.
pub fn regret_bound(game: &BimatrixGame, t: u64) -> f64 {
    4.0 * game.payoff_scale() * ((t as f64) * (game.k() as f64).ln()).sqrt()
}

/// Abortable learner keeping the realized optimizer payoffs below the
/// thresholds.
#[derive(Debug, Clone)]
pub struct BlackwellAbort {
    game: BimatrixGame,
    thresholds: Vec<f64>,
    hedge: HedgeState,
    worst_excess: f64,
}

impl BlackwellAbort {
    pub fn new(game: &BimatrixGame, thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() != game.k() || thresholds.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("thresholds must be k finite numbers"));
        }
        Ok(Self {
            game: game.clone(),
            hedge: new_hedge(game),
            thresholds,
            worst_excess: f64::NEG_INFINITY,
        })
    }

    pub fn hedge(&self) -> &HedgeState {
        &self.hedge
    }
}

impl AbortableLearner for BlackwellAbort {
    fn offer(&self) -> Option<Offer> {
        None
    }

    fn select(&mut self, _choice: Choice) -> Result<()> {
        Ok(())
    }

    fn step(&mut self) -> Result<Step> {
        blackwell_abort_step(&self.hedge, &self.thresholds, &self.game)
    }

    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        self.hedge
            .update(&constraint_rewards(&self.game, &self.thresholds, x, y));
        let top = self
            .hedge
            .cumulative()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let excess = top - regret_bound(&self.game, self.hedge.rounds());
        self.worst_excess = self.worst_excess.max(excess);
        Ok(())
    }

    fn regret_excess(&self) -> Option<f64> {
        (self.hedge.rounds() > 0).then_some(self.worst_excess)
    }
}

/// Threshold of epoch `j`: the top learner payoff minus `j * eps`.
pub fn epoch_threshold(game: &BimatrixGame, eps: f64, j: usize) -> f64 {
    game.learner().max_entry() - j as f64 * eps
}

/// Learner for one epoch: publishes `Phi(v)` as schedule targets inside
/// the candidate menu, with `BlackwellAbort` as the fallback.
pub fn maximin_epoch(game: &BimatrixGame, v: f64) -> Result<ScheduledLearner> {
    let phi = threshold_assignment(game, v)?;
    let c = phi.thresholds(game);
    let menu: HullMenu = candidate_menu_from_thresholds(game, &c, 0.0).into();
    let offer = Offer {
        targets: phi.profiles().to_vec(),
        menu,
        thresholds: Some(c.clone()),
    };
    ScheduledLearner::new(offer, Box::new(BlackwellAbort::new(game, c)?))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// The maximin learner as a lazy composition of epochs.
pub fn maximin_learner(game: &BimatrixGame, eps: f64) -> Result<Composed> {
    check_eps(eps)?;
    let game = game.clone();
    compose_lazy(move |j| Ok(Box::new(maximin_epoch(&game, epoch_threshold(&game, eps, j))?) as Box<_>))
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximinReport {
    pub final_v: f64,
    pub aborts: usize,
    /// Threshold of every epoch entered, in order.
    pub v_history: Vec<f64>,
    /// Round at which each epoch started.
    pub epoch_starts: Vec<u64>,
    pub learner_avg: f64,
    /// `u_O,s` of the running CSP for every type `s`.
    pub per_type_avg: Vec<f64>,
    pub running_csp: Csp,
    /// Learner average over the last epoch only.
    pub final_epoch_learner_avg: f64,
    /// Largest `max_s sum (u_O,s - c_s) - 4 P_max sqrt(tau ln k)` seen in any
    /// fallback phase; `None` if no fallback round was played.
    pub regret_excess: Option<f64>,
    #[serde(skip)]
    pub transcript: Transcript,
}

/// Runs the epoch loop for `rounds` rounds against one optimizer type.
pub fn run_maximin(
    game: &BimatrixGame,
    eps: f64,
    adversary: AdversaryKind,
    rounds: u64,
    type_index: usize,
) -> Result<MaximinReport> {
    let mut opt = Adversary::new(adversary, game, type_index)?;
    run_maximin_against(game, eps, &mut opt, rounds)
}

pub fn run_maximin_against(
    game: &BimatrixGame,
    eps: f64,
    opt: &mut dyn Optimizer,
    rounds: u64,
) -> Result<MaximinReport> {
    check_eps(eps)?;
    if rounds == 0 {
        return Err(Error::invalid("run_maximin needs at least one round"));
    }
    let (m, n) = (game.m(), game.n());
    let mut j = 0;
    let mut epoch = maximin_epoch(game, epoch_threshold(game, eps, 0))?;
    let mut selected = false;
    let mut v_history = vec![epoch_threshold(game, eps, 0)];
    let mut epoch_starts = vec![0u64];
    let mut regret_excess: Option<f64> = None;
    let mut transcript = Transcript::new(m, n);
    let mut sum = vec![0.0; m * n];
    let mut epoch_learner = 0.0;
    for t in 0..rounds {
        let x = loop {
            if !selected {
                if let Some(offer) = epoch.offer() {
                    let choice = opt.select(&offer)?;
                    epoch.select(choice)?;
                }
                selected = true;
            }
            match epoch.step()? {
                Step::Play(x) => break x,
                Step::Abort(_) => {
                    if let Some(e) = epoch.regret_excess() {
                        regret_excess = Some(regret_excess.map_or(e, |r: f64| r.max(e)));
                    }
                    j += 1;
                    let v = epoch_threshold(game, eps, j);
                    epoch = maximin_epoch(game, v)?;
                    selected = false;
                    v_history.push(v);
                    epoch_starts.push(t);
                    epoch_learner = 0.0;
                }
            }
        };
        let y = opt.act(&x)?;
        crate::game::check_simplex(&y, "optimizer action")?;
        epoch.observe(&x, &y)?;
        let u = game.learner().bilinear(&x, &y);
        epoch_learner += u;
        for i in 0..m {
            for c in 0..n {
                sum[i * n + c] += x[i] * y[c];
            }
        }
        transcript.push(x, y)?;
    }
    if let Some(e) = epoch.regret_excess() {
        regret_excess = Some(regret_excess.map_or(e, |r: f64| r.max(e)));
    }
    let running_csp = Csp::from_solver(m, n, sum.into_iter().map(|v| v / rounds as f64).collect())?;
    let last_len = rounds - *epoch_starts.last().expect("nonempty");
    Ok(MaximinReport {
        final_v: *v_history.last().expect("nonempty"),
        aborts: j,
        learner_avg: dot(game.learner().as_slice(), running_csp.weights()),
        per_type_avg: (0..game.k())
            .map(|s| dot(game.optimizer(s).as_slice(), running_csp.weights()))
            .collect(),
        running_csp,
        final_epoch_learner_avg: if last_len > 0 {
            epoch_learner / last_len as f64
        } else {
            f64::NAN
        },
        v_history,
        epoch_starts,
        regret_excess,
        transcript,
    })
}

/// Threshold currently in force for a learner built by [`maximin_learner`].
pub fn current_threshold(learner: &Composed, game: &BimatrixGame, eps: f64) -> f64 {
    epoch_threshold(game, eps, learner.aborts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approachability::test_thresholds_valid;
    use crate::fixtures::{g1, random_game, random_simplex};
    use crate::game::Matrix;
    use crate::menus::{incentive_check, response_satisfiable_at};
    use crate::playback::{simulate, SimulateOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_assignment_examples() {
        let g = g1();
        let phi = threshold_assignment(&g, 5.0).unwrap();
        // (C,R) is worth 7 >= 5 to the learner and 3 to the optimizer, the most it can get.
        assert!((phi.profile(0).get(2, 0) - 1.0).abs() < 1e-9);
        assert!((phi.thresholds(&g)[0] - 3.0).abs() < 1e-9);

        let top = threshold_assignment(&g, 7.1).unwrap();
        assert!((top.profile(0).get(1, 0) - 1.0).abs() < 1e-9);
        assert!(matches!(
            threshold_assignment(&g, 7.2),
            Err(Error::ThresholdInfeasible { .. })
        ));
        let low = threshold_assignment(&g, -g.p_max()).unwrap();
        assert!((low.thresholds(&g)[0] - 3.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let g = random_game(&mut rng, 3, 2, 3);
            let v = g.learner().max_entry() - 0.4;
            assert!(incentive_check(&threshold_assignment(&g, v).unwrap(), &g, 1e-7));
        }
    }

    #[test]
    fn abort_step_examples() {
        let g = g1();
        let h = new_hedge(&g);
        // Threshold at the global max never aborts.
        assert!(matches!(blackwell_abort_step(&h, &[3.0], &g).unwrap(), Step::Play(_)));
        // Below the minimax cap of 0.75 it aborts at once, with a sound certificate.
        match blackwell_abort_step(&h, &[0.5], &g).unwrap() {
            Step::Abort(y) => {
                let menu = candidate_menu_from_thresholds(&g, &[0.5], 0.0);
                assert!(response_satisfiable_at(&menu, &y).unwrap().is_none());
            }
            s => panic!("expected abort, got {s:?}"),
        }
        let c = threshold_assignment(&g, 5.0).unwrap().thresholds(&g);
        assert!(matches!(blackwell_abort_step(&h, &c, &g).unwrap(), Step::Play(_)));
    }

    #[test]
    fn hedge_regret_bound_on_random_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_game(&mut rng, 2, 2, 4);
        let c = vec![0.0; 4];
        let mut h = new_hedge(&g);
        let mut earned = 0.0;
        for t in 1..=3000u64 {
            let x = random_simplex(&mut rng, 2);
            let y = random_simplex(&mut rng, 2);
            let r = constraint_rewards(&g, &c, &x, &y);
            earned += dot(h.weights(), &r);
            h = hedge_update(&h, &x, &y, &c, &g);
            let best = h.cumulative().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(best - earned <= regret_bound(&g, t) + 1e-9);
        }
    }

    #[test]
    fn thresholds_nest_across_epochs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = random_game(&mut rng, 2, 3, 2);
            let mut prev: Option<Vec<f64>> = None;
            for j in 0..10 {
                let c = threshold_assignment(&g, epoch_threshold(&g, 0.2, j))
                    .unwrap()
                    .thresholds(&g);
                if let Some(p) = &prev {
                    assert!(c.iter().zip(p).all(|(a, b)| *a >= b - 1e-9));
                }
                prev = Some(c);
            }
        }
    }

    #[test]
    fn constant_learner_payoff_never_moves() {
        let g = BimatrixGame::single(
            Matrix::filled(2, 2, 0.4).unwrap(),
            Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap(),
        )
        .unwrap();
        for kind in [
            AdversaryKind::Aborter { delta: 0.02 },
            AdversaryKind::Random { seed: 1 },
        ] {
            let r = run_maximin(&g, 0.05, kind, 500, 0).unwrap();
            assert_eq!(r.final_v, 0.4);
            assert_eq!(r.aborts, 0);
        }
    }

    #[test]
    fn aborter_on_g1_stops_at_an_approachable_level() {
        let g = g1();
        let r = run_maximin(&g, 0.05, AdversaryKind::Aborter { delta: 0.02 }, 3000, 0).unwrap();
        assert!(r.regret_excess.is_none_or(|e| e <= 1e-6));
        assert!(r.final_v >= g.learner().min_entry() - 0.05);
        assert!(r.v_history.windows(2).all(|w| (w[0] - w[1] - 0.05).abs() < 1e-12));
        let c = threshold_assignment(&g, r.final_v).unwrap().thresholds(&g);
        assert!(c[0] >= 0.75 - 0.05 - 1e-9);
        // The final epoch was entered cooperatively, so the learner earns at least its threshold.
        assert!(r.final_epoch_learner_avg >= r.final_v - 1e-6, "{r:?}");
    }

    #[test]
    fn certificates_from_aborts_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let g = random_game(&mut rng, 2, 2, 2);
            let mut learner = maximin_learner(&g, 0.1).unwrap();
            let mut opt = Adversary::new(AdversaryKind::Random { seed: 2 }, &g, 0).unwrap();
            simulate(&g, &mut learner, &mut opt, 400, SimulateOptions::default()).unwrap();
            for (j, y) in learner.certificates().iter().enumerate() {
                let c = threshold_assignment(&g, epoch_threshold(&g, 0.1, j))
                    .unwrap()
                    .thresholds(&g);
                let menu = candidate_menu_from_thresholds(&g, &c, 0.0);
                assert!(response_satisfiable_at(&menu, y).unwrap().is_none());
            }
        }
    }

    #[test]
    fn approachable_epochs_survive_random_play() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut tried = 0;
        while tried < 5 {
            let g = random_game(&mut rng, 2, 2, 2);
            let c: Vec<f64> = (0..2).map(|s| g.optimizer(s).max_entry() - 0.3).collect();
            let v = test_thresholds_valid(&g, &c, 0.05).unwrap();
            if v.min_slack < 0.05 {
                continue;
            }
            tried += 1;
            let mut learner = BlackwellAbort::new(&g, c).unwrap();
            let mut y_rng = ChaCha8Rng::seed_from_u64(tried);
            for _ in 0..2000 {
                let x = match learner.step().unwrap() {
                    Step::Play(x) => x,
                    Step::Abort(_) => panic!("aborted on an approachable menu"),
                };
                learner.observe(&x, &random_simplex(&mut y_rng, 2)).unwrap();
            }
            assert!(learner.regret_excess().unwrap() <= 1e-6);
        }
    }

    #[test]
    fn lazy_composition_matches_the_epoch_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for kind in [
            AdversaryKind::Aborter { delta: 0.02 },
            AdversaryKind::Random { seed: 4 },
            AdversaryKind::BestResponse,
        ] {
            let g = random_game(&mut rng, 2, 2, 2);
            let direct = run_maximin(&g, 0.1, kind.clone(), 600, 1).unwrap();
            let mut learner = maximin_learner(&g, 0.1).unwrap();
            let mut opt = Adversary::new(kind, &g, 1).unwrap();
            let sim = simulate(
                &g,
                &mut learner,
                &mut opt,
                600,
                SimulateOptions {
                    keep_transcript: true,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(sim.transcript.as_ref().unwrap().rounds(), direct.transcript.rounds());
            assert_eq!(sim.aborts, direct.aborts);
            assert_eq!(current_threshold(&learner, &g, 0.1), direct.final_v);
            assert_eq!(sim.learner_avg, direct.learner_avg);
            assert_eq!(sim.optimizer_avg, direct.per_type_avg);
            assert_eq!(sim.running_csp, direct.running_csp);
            assert_eq!(learner.phase_starts, direct.epoch_starts);
        }
    }
}
