//! Menus as executable learners, optimizer policies, and the repeated-play
//! simulator.
//!
//! A phase opens with cheap talk: the learner publishes schedule targets and
//! the optimizer either picks one (or proposes its own CSP from the menu) or
//! declines. While the optimizer follows the published pure-pair schedule
//! the learner plays its side of it; the first deviation switches the learner
//! permanently to its fallback dynamics for that phase.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approachability::test_thresholds_valid;
use crate::error::{Error, Result};
use crate::game::{check_simplex, dot, BimatrixGame, Csp, Matrix, Transcript};
use crate::lp::zero_sum_value;
use crate::menus::{menu_violation, HalfspaceMenu, HullMenu};

/// What the learner publishes at the start of a phase.
#[derive(Debug, Clone)]
pub struct Offer {
    pub targets: Vec<Csp>,
    pub menu: HullMenu,
    /// Per-type thresholds when the menu is a candidate menu.
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Choice {
    Target(usize),
    /// A CSP of the optimizer's own choosing; must lie in the offered menu.
    Custom(Csp),
    Decline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Play(Vec<f64>),
    /// Gives up; carries an optimizer strategy certifying why.
    Abort(Vec<f64>),
}

/// A learner that may abort, used as a building block.
pub trait AbortableLearner {
    /// Cheap-talk offer; `None` skips selection.
    fn offer(&self) -> Option<Offer>;
    fn select(&mut self, choice: Choice) -> Result<()>;
    fn step(&mut self) -> Result<Step>;
    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()>;
    /// Worst excess of the constraint regret over its bound, if tracked.
    fn regret_excess(&self) -> Option<f64> {
        None
    }
}

/// A learner that never aborts, as seen by the simulator.
pub trait Learner {
    fn pending_offer(&self) -> Option<Offer>;
    fn select(&mut self, choice: Choice) -> Result<()>;
    /// `None` means the learner moved to a new phase; ask again.
    fn act(&mut self) -> Result<Option<Vec<f64>>>;
    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()>;
    fn aborts(&self) -> usize {
        0
    }
}

pub trait Optimizer {
    fn select(&mut self, offer: &Offer) -> Result<Choice>;
    /// Plays after seeing the learner's mixed action for the round.
    fn act(&mut self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Deterministic pure-pair schedule: each round plays the pair with the
/// largest deficit `t * phi_b - count_b`, lowest index on ties.
#[derive(Debug, Clone)]
pub struct Schedule {
    target: Csp,
    counts: Vec<u64>,
    played: u64,
}

impl Schedule {
    pub fn new(target: Csp) -> Self {
        let d = target.weights().len();
        Self {
            target,
            counts: vec![0; d],
            played: 0,
        }
    }

    pub fn target(&self) -> &Csp {
        &self.target
    }

    /// Pair for the next round, without advancing.
    pub fn peek(&self) -> usize {
        let t = (self.played + 1) as f64;
        let mut best = 0;
        let mut best_def = f64::NEG_INFINITY;
        for (b, (&w, &c)) in self.target.weights().iter().zip(&self.counts).enumerate() {
            let def = t * w - c as f64;
            if def > best_def {
                best = b;
                best_def = def;
            }
        }
        best
    }

    pub fn advance(&mut self) -> usize {
        let b = self.peek();
        self.counts[b] += 1;
        self.played += 1;
        b
    }
}

pub(crate) fn unit(len: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[i] = 1.0;
    e
}

/// Anytime Hedge over `k` experts with rewards in `[-range, range]`:
/// `p_s ∝ exp(eta_t R_s)` with `eta_t = sqrt(ln k / t) / range`.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    cumulative: Vec<f64>,
    weights: Vec<f64>,
    rounds: u64,
    range: f64,
}

impl HedgeState {
    pub fn new(k: usize, range: f64) -> Self {
        Self {
            cumulative: vec![0.0; k],
            weights: vec![1.0 / k as f64; k],
            rounds: 0,
            range: range.max(1e-12),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn update(&mut self, rewards: &[f64]) {
        for (c, r) in self.cumulative.iter_mut().zip(rewards) {
            *c += r;
        }
        self.rounds += 1;
        let k = self.cumulative.len();
        let eta = ((k as f64).ln() / (self.rounds + 1) as f64).sqrt() / self.range;
        let top = self.cumulative.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.cumulative.iter().map(|c| (eta * (c - top)).exp()).collect();
        let total: f64 = raw.iter().sum();
        self.weights = raw.into_iter().map(|w| w / total).collect();
    }
}

/// Hedge over the constraints of a halfspace menu: each round the learner
/// answers the weighted constraint as a zero-sum game. Never aborts.
#[derive(Debug, Clone)]
pub struct HedgeApproach {
    menu: HalfspaceMenu,
    hedge: HedgeState,
}

impl HedgeApproach {
    pub fn new(menu: HalfspaceMenu) -> Self {
        let range = menu
            .constraints()
            .iter()
            .map(|h| h.normal.iter().fold(0.0f64, |a, v| a.max(v.abs())) + h.rhs.abs())
            .fold(0.0, f64::max);
        let k = menu.len().max(1);
        Self {
            hedge: HedgeState::new(k, range),
            menu,
        }
    }
}

impl AbortableLearner for HedgeApproach {
    fn offer(&self) -> Option<Offer> {
        None
    }

    fn select(&mut self, _choice: Choice) -> Result<()> {
        Ok(())
    }

    fn step(&mut self) -> Result<Step> {
        let (m, n) = (self.menu.m(), self.menu.n());
        if self.menu.is_empty() {
            return Ok(Step::Play(vec![1.0 / m as f64; m]));
        }
        let mut data = vec![0.0; m * n];
        for (h, &w) in self.menu.constraints().iter().zip(self.hedge.weights()) {
            for (d, v) in data.iter_mut().zip(&h.normal) {
                *d += w * v;
            }
        }
        Ok(Step::Play(zero_sum_value(&Matrix::new(m, n, data)?)?.x))
    }

    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        if self.menu.is_empty() {
            return Ok(());
        }
        let phi = Csp::product_unchecked(x, y);
        let rewards: Vec<f64> = self
            .menu
            .constraints()
            .iter()
            .map(|h| h.violation(phi.weights()))
            .collect();
        self.hedge.update(&rewards);
        Ok(())
    }
}

/// Schedule-following learner with a fallback for defections.
pub struct ScheduledLearner {
    offer: Offer,
    selected: bool,
    schedule: Option<Schedule>,
    expected_y: Option<usize>,
    fallback: Box<dyn AbortableLearner + Send>,
    defected: bool,
}

impl ScheduledLearner {
    pub fn new(offer: Offer, fallback: Box<dyn AbortableLearner + Send>) -> Result<Self> {
        for (index, t) in offer.targets.iter().enumerate() {
            if !offer.menu.contains(t, 1e-7)? {
                let violation = menu_violation(t, &offer.menu.base);
                return Err(Error::InvalidTarget { index, violation });
            }
        }
        Ok(Self {
            offer,
            selected: false,
            schedule: None,
            expected_y: None,
            fallback,
            defected: false,
        })
    }

    pub fn defected(&self) -> bool {
        self.defected
    }
}

impl AbortableLearner for ScheduledLearner {
    fn offer(&self) -> Option<Offer> {
        if self.selected {
            None
        } else {
            Some(self.offer.clone())
        }
    }

    fn select(&mut self, choice: Choice) -> Result<()> {
        self.selected = true;
        let target = match choice {
            Choice::Target(i) => Some(
                self.offer
                    .targets
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("target index {i} out of range")))?,
            ),
            Choice::Custom(phi) => {
                if !self.offer.menu.contains(&phi, 1e-7)? {
                    let violation = menu_violation(&phi, &self.offer.menu.base);
                    return Err(Error::InvalidTarget {
                        index: self.offer.targets.len(),
                        violation,
                    });
                }
                Some(phi)
            }
            Choice::Decline => None,
        };
        match target {
            Some(t) => self.schedule = Some(Schedule::new(t)),
            None => self.defected = true,
        }
        Ok(())
    }

    fn step(&mut self) -> Result<Step> {
        if !self.defected {
            if let Some(s) = &self.schedule {
                let b = s.peek();
                let n = s.target().n();
                self.expected_y = Some(b % n);
                return Ok(Step::Play(unit(s.target().m(), b / n)));
            }
        }
        self.fallback.step()
    }

    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        if !self.defected {
            if let (Some(s), Some(j)) = (&mut self.schedule, self.expected_y) {
                let followed = y.iter().enumerate().all(|(c, &v)| v == if c == j { 1.0 } else { 0.0 });
                if followed {
                    s.advance();
                } else {
                    // The fallback starts fresh from the next round.
                    self.defected = true;
                }
                return Ok(());
            }
        }
        self.fallback.observe(x, y)
    }

    fn regret_excess(&self) -> Option<f64> {
        self.fallback.regret_excess()
    }
}

/// Learner for a menu: schedules to any offered target (or any optimizer
/// proposal inside the menu), otherwise Hedge approach to the halfspace part.
pub fn realize_menu_learner(menu: &HullMenu, targets: Vec<Csp>) -> Result<ScheduledLearner> {
    if !menu.is_nonempty()? {
        return Err(Error::EmptyMenu);
    }
    let offer = Offer {
        targets,
        menu: menu.clone(),
        thresholds: None,
    };
    ScheduledLearner::new(offer, Box::new(HedgeApproach::new(menu.base.clone())))
}

/// Source of sub-policies for [`Composed`].
enum Subpolicies {
    Eager(std::vec::IntoIter<Box<dyn AbortableLearner + Send>>),
    Lazy(Box<dyn FnMut(usize) -> Result<Box<dyn AbortableLearner + Send>> + Send>),
}

/// Runs sub-policies in order, switching on every abort.
pub struct Composed {
    source: Subpolicies,
    current: Box<dyn AbortableLearner + Send>,
    index: usize,
    remaining: Option<usize>,
    selected: bool,
    /// Round at which each phase started.
    pub phase_starts: Vec<u64>,
    rounds: u64,
    certificates: Vec<Vec<f64>>,
}

/// Eager composition; the last sub-policy must never abort.
pub fn compose_abortable(subpolicies: Vec<Box<dyn AbortableLearner + Send>>) -> Result<Composed> {
    if subpolicies.is_empty() {
        return Err(Error::invalid("compose_abortable needs at least one sub-policy"));
    }
    let total = subpolicies.len();
    let mut it = subpolicies.into_iter();
    let current = it.next().expect("nonempty");
    Ok(Composed {
        source: Subpolicies::Eager(it),
        current,
        index: 0,
        remaining: Some(total - 1),
        selected: false,
        phase_starts: vec![0],
        rounds: 0,
        certificates: Vec::new(),
    })
}

/// Lazy composition: `make(i)` builds the `i`-th sub-policy on demand.
pub fn compose_lazy(
    mut make: impl FnMut(usize) -> Result<Box<dyn AbortableLearner + Send>> + Send + 'static,
) -> Result<Composed> {
    let current = make(0)?;
    Ok(Composed {
        source: Subpolicies::Lazy(Box::new(make)),
        current,
        index: 0,
        remaining: None,
        selected: false,
        phase_starts: vec![0],
        rounds: 0,
        certificates: Vec::new(),
    })
}

impl Composed {
    pub fn phase(&self) -> usize {
        self.index
    }

    pub fn certificates(&self) -> &[Vec<f64>] {
        &self.certificates
    }

    fn advance(&mut self) -> Result<()> {
        let next = match &mut self.source {
            Subpolicies::Eager(it) => it
                .next()
                .ok_or_else(|| Error::NumericalFailure("the last composed sub-policy aborted".into()))?,
            Subpolicies::Lazy(make) => make(self.index + 1)?,
        };
        self.current = next;
        self.index += 1;
        if let Some(r) = &mut self.remaining {
            *r -= 1;
        }
        self.selected = false;
        self.phase_starts.push(self.rounds);
        Ok(())
    }
}

impl Learner for Composed {
    fn pending_offer(&self) -> Option<Offer> {
        if self.selected {
            None
        } else {
            self.current.offer()
        }
    }

    fn select(&mut self, choice: Choice) -> Result<()> {
        self.selected = true;
        self.current.select(choice)
    }

    fn act(&mut self) -> Result<Option<Vec<f64>>> {
        match self.current.step()? {
            Step::Play(x) => Ok(Some(x)),
            Step::Abort(y) => {
                self.certificates.push(y);
                self.advance()?;
                Ok(None)
            }
        }
    }

    fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        self.rounds += 1;
        self.current.observe(x, y)
    }

    fn aborts(&self) -> usize {
        self.index
    }
}

/// Best CSP in the menu for one payoff, learner-favourable on ties.
pub fn optimizer_best_response_policy(menu: &HullMenu, u_o: &Matrix, u_l: &Matrix) -> Result<(Csp, ScheduleFollower)> {
    let sel = menu.select(u_o, u_l, 0.0)?.ok_or(Error::EmptyMenu)?;
    Ok((
        sel.csp.clone(),
        ScheduleFollower {
            schedule: Some(Schedule::new(sel.csp.clone())),
            fixed: Some(sel.csp),
        },
    ))
}

/// Follows the published schedule of a fixed CSP.
#[derive(Debug, Clone)]
pub struct ScheduleFollower {
    schedule: Option<Schedule>,
    fixed: Option<Csp>,
}

impl Optimizer for ScheduleFollower {
    fn select(&mut self, _offer: &Offer) -> Result<Choice> {
        let phi = self.fixed.clone().ok_or_else(|| Error::invalid("no CSP to follow"))?;
        self.schedule = Some(Schedule::new(phi.clone()));
        Ok(Choice::Custom(phi))
    }

    fn act(&mut self, _x: &[f64]) -> Result<Vec<f64>> {
        let s = self
            .schedule
            .as_mut()
            .ok_or_else(|| Error::invalid("schedule not started"))?;
        let n = s.target().n();
        Ok(unit(n, s.advance() % n))
    }
}

/// Built-in optimizer policies, all acting as one fixed type.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdversaryKind {
    /// Picks its favourite CSP of every offered menu and follows its schedule.
    BestResponse,
    /// Declines and plays the tester's certificate whenever it finds one,
    /// otherwise behaves like `BestResponse`.
    Aborter { delta: f64 },
    /// Declines and plays uniformly random mixed strategies.
    Random { seed: u64 },
    /// Always picks its own type's target.
    Schedule,
}

pub struct Adversary {
    kind: AdversaryKind,
    game: BimatrixGame,
    type_index: usize,
    schedule: Option<Schedule>,
    certificate: Option<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, game: &BimatrixGame, type_index: usize) -> Result<Self> {
        if type_index >= game.k() {
            return Err(Error::invalid(format!(
                "type index {type_index} out of range (k = {})",
                game.k()
            )));
        }
        let seed = match kind {
            AdversaryKind::Random { seed } => seed,
            AdversaryKind::Aborter { delta } if !(delta > 0.0) => {
                return Err(Error::invalid(format!("aborter delta must be positive, got {delta}")))
            }
            _ => 0,
        };
        Ok(Self {
            kind,
            game: game.clone(),
            type_index,
            schedule: None,
            certificate: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn best_in(&self, offer: &Offer) -> Result<Choice> {
        let u = self.game.optimizer(self.type_index);
        let sel = offer
            .menu
            .select(u, self.game.learner(), 0.0)?
            .ok_or(Error::EmptyMenu)?;
        // Prefer a published target when it is as good for both sides.
        let tol = 1e-9 * (1.0 + self.game.p_max());
        for (i, t) in offer.targets.iter().enumerate() {
            let uo = dot(u.as_slice(), t.weights());
            let ul = dot(self.game.learner().as_slice(), t.weights());
            if uo >= sel.optimizer_value - tol && ul >= sel.learner_value - tol {
                return Ok(Choice::Target(i));
            }
        }
        Ok(Choice::Custom(sel.csp))
    }

    fn start(&mut self, choice: &Choice, offer: &Offer) {
        self.schedule = match choice {
            Choice::Target(i) => Some(Schedule::new(offer.targets[*i].clone())),
            Choice::Custom(phi) => Some(Schedule::new(phi.clone())),
            Choice::Decline => None,
        };
    }
}

impl Optimizer for Adversary {
    fn select(&mut self, offer: &Offer) -> Result<Choice> {
        self.certificate = None;
        let choice = match &self.kind {
            AdversaryKind::BestResponse => self.best_in(offer)?,
            AdversaryKind::Schedule => {
                if offer.targets.len() == self.game.k() {
                    Choice::Target(self.type_index)
                } else {
                    self.best_in(offer)?
                }
            }
            AdversaryKind::Random { .. } => Choice::Decline,
            AdversaryKind::Aborter { delta } => {
                let verdict = match &offer.thresholds {
                    Some(c) => Some(test_thresholds_valid(&self.game, c, *delta)?),
                    None => None,
                };
                match verdict.and_then(|v| v.certificate) {
                    Some(cert) => {
                        self.certificate = Some(cert.y);
                        Choice::Decline
                    }
                    None => self.best_in(offer)?,
                }
            }
        };
        self.start(&choice, offer);
        Ok(choice)
    }

    fn act(&mut self, _x: &[f64]) -> Result<Vec<f64>> {
        let n = self.game.n();
        if let Some(s) = &mut self.schedule {
            return Ok(unit(n, s.advance() % n));
        }
        if let Some(y) = &self.certificate {
            return Ok(y.clone());
        }
        Ok(crate::fixtures::random_simplex(&mut self.rng, n))
    }
}

/// Per-round record for streaming.
#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub t: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub learner_payoff: f64,
    pub optimizer_payoffs: Vec<f64>,
    pub phase: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub rounds: u64,
    pub learner_avg: f64,
    /// `u_O,s` of the running CSP for every type `s`.
    pub optimizer_avg: Vec<f64>,
    pub running_csp: Csp,
    pub aborts: usize,
    /// Constraint violation of the running CSP, when a menu was supplied.
    pub menu_violation: Option<f64>,
    #[serde(skip)]
    pub transcript: Option<Transcript>,
}

#[derive(Default)]
pub struct SimulateOptions<'a> {
    pub keep_transcript: bool,
    pub menu: Option<&'a HalfspaceMenu>,
    pub on_round: Option<&'a mut dyn FnMut(&RoundRecord)>,
}

/// Full-information repeated play for `rounds` rounds.
pub fn simulate(
    game: &BimatrixGame,
    learner: &mut dyn Learner,
    optimizer: &mut dyn Optimizer,
    rounds: u64,
    mut opts: SimulateOptions<'_>,
) -> Result<RunReport> {
    if rounds == 0 {
        return Err(Error::invalid("simulate needs at least one round"));
    }
    let (m, n) = (game.m(), game.n());
    let mut sum = vec![0.0; m * n];
    let mut transcript = opts.keep_transcript.then(|| Transcript::new(m, n));
    let mut phase = 0;
    for t in 0..rounds {
        let x = loop {
            if let Some(offer) = learner.pending_offer() {
                let choice = optimizer.select(&offer)?;
                learner.select(choice)?;
            }
            match learner.act()? {
                Some(x) => break x,
                None => phase += 1,
            }
        };
        check_simplex(&x, "learner action")?;
        let y = optimizer.act(&x)?;
        if y.len() != n {
            return Err(Error::invalid("optimizer action has the wrong length"));
        }
        check_simplex(&y, "optimizer action")?;
        learner.observe(&x, &y)?;
        for i in 0..m {
            if x[i] != 0.0 {
                for j in 0..n {
                    sum[i * n + j] += x[i] * y[j];
                }
            }
        }
        if let Some(cb) = opts.on_round.as_mut() {
            let phi = Csp::product_unchecked(&x, &y);
            cb(&RoundRecord {
                t,
                learner_payoff: dot(game.learner().as_slice(), phi.weights()),
                optimizer_payoffs: (0..game.k())
                    .map(|s| dot(game.optimizer(s).as_slice(), phi.weights()))
                    .collect(),
                x: x.clone(),
                y: y.clone(),
                phase,
            });
        }
        if let Some(tr) = &mut transcript {
            tr.push(x, y)?;
        }
    }
    let running_csp = Csp::from_solver(m, n, sum.into_iter().map(|v| v / rounds as f64).collect())?;
    Ok(RunReport {
        rounds,
        learner_avg: dot(game.learner().as_slice(), running_csp.weights()),
        optimizer_avg: (0..game.k())
            .map(|s| dot(game.optimizer(s).as_slice(), running_csp.weights()))
            .collect(),
        menu_violation: opts.menu.map(|menu| menu_violation(&running_csp, menu)),
        running_csp,
        aborts: learner.aborts(),
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit_nr::optimal_no_regret_commitment;
    use crate::fixtures::{g1, random_game};
    use crate::menus::{no_swap_regret_menu, Halfspace};

    struct Constant(Vec<f64>);

    impl AbortableLearner for Constant {
        fn offer(&self) -> Option<Offer> {
            None
        }
        fn select(&mut self, _c: Choice) -> Result<()> {
            Ok(())
        }
        fn step(&mut self) -> Result<Step> {
            Ok(Step::Play(self.0.clone()))
        }
        fn observe(&mut self, _x: &[f64], _y: &[f64]) -> Result<()> {
            Ok(())
        }
    }

    /// Plays a fixed action and aborts after a set number of rounds.
    struct AbortAfter {
        x: Vec<f64>,
        left: usize,
    }

    impl AbortableLearner for AbortAfter {
        fn offer(&self) -> Option<Offer> {
            None
        }
        fn select(&mut self, _c: Choice) -> Result<()> {
            Ok(())
        }
        fn step(&mut self) -> Result<Step> {
            if self.left == 0 {
                Ok(Step::Abort(vec![1.0, 0.0]))
            } else {
                Ok(Step::Play(self.x.clone()))
            }
        }
        fn observe(&mut self, _x: &[f64], _y: &[f64]) -> Result<()> {
            self.left -= 1;
            Ok(())
        }
    }

    struct Fixed(Vec<f64>);

    impl Optimizer for Fixed {
        fn select(&mut self, _o: &Offer) -> Result<Choice> {
            Ok(Choice::Decline)
        }
        fn act(&mut self, _x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn constant_play_reports_single_round_payoffs() {
        let g = g1();
        let mut l = compose_abortable(vec![Box::new(Constant(vec![0.0, 1.0, 0.0]))]).unwrap();
        let r = simulate(&g, &mut l, &mut Fixed(vec![1.0, 0.0]), 50, SimulateOptions::default()).unwrap();
        assert!((r.learner_avg - 7.1).abs() < 1e-12);
        assert!(r.optimizer_avg[0].abs() < 1e-12);
    }

    #[test]
    fn schedule_tracks_target() {
        let target = Csp::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut s = Schedule::new(target.clone());
        let mut counts = [0u64; 4];
        for t in 1..=1000u64 {
            counts[s.advance()] += 1;
            for b in 0..4 {
                assert!((counts[b] as f64 - t as f64 * target.weights()[b]).abs() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn following_the_schedule_converges() {
        let g = g1();
        let nr = optimal_no_regret_commitment(&g).unwrap();
        let target = nr.assignment.profile(0).clone();
        let mut learner = compose_abortable(vec![Box::new(
            realize_menu_learner(&nr.menu, vec![target.clone()]).unwrap(),
        )])
        .unwrap();
        let mut opt = Adversary::new(AdversaryKind::Schedule, &g, 0).unwrap();
        let t = 10_000;
        let r = simulate(&g, &mut learner, &mut opt, t, SimulateOptions::default()).unwrap();
        let bound = 2.0 / (t as f64).sqrt() * 6.0;
        assert!(r.running_csp.l1_distance(&target) <= bound);
    }

    #[test]
    fn best_response_on_nr_menu_earns_the_lp_value() {
        let g = g1();
        let nr = optimal_no_regret_commitment(&g).unwrap();
        let (chosen, _) = optimizer_best_response_policy(&nr.menu, g.optimizer(0), g.learner()).unwrap();
        assert!((dot(g.learner().as_slice(), chosen.weights()) - nr.value).abs() < 1e-6);
        let mut learner = compose_abortable(vec![Box::new(
            realize_menu_learner(&nr.menu, nr.assignment.profiles().to_vec()).unwrap(),
        )])
        .unwrap();
        let mut opt = Adversary::new(AdversaryKind::BestResponse, &g, 0).unwrap();
        let r = simulate(&g, &mut learner, &mut opt, 10_000, SimulateOptions::default()).unwrap();
        assert!((r.learner_avg - nr.value).abs() < 0.05);

        let nsr: HullMenu = no_swap_regret_menu(&g).into();
        let (chosen, _) = optimizer_best_response_policy(&nsr, g.optimizer(0), g.learner()).unwrap();
        assert!((dot(g.optimizer(0).as_slice(), chosen.weights()) - 1.0).abs() < 1e-7);
        assert!((dot(g.learner().as_slice(), chosen.weights()) - 3.0).abs() < 1e-7);
    }

    #[test]
    fn defection_against_the_full_simplex_is_harmless() {
        let g = g1();
        let menu: HullMenu = HalfspaceMenu::full(3, 2).into();
        let mut learner = compose_abortable(vec![Box::new(realize_menu_learner(&menu, vec![]).unwrap())]).unwrap();
        let mut opt = Adversary::new(AdversaryKind::Random { seed: 3 }, &g, 0).unwrap();
        let r = simulate(
            &g,
            &mut learner,
            &mut opt,
            100,
            SimulateOptions {
                menu: Some(&menu.base),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.menu_violation, Some(0.0));
    }

    #[test]
    fn targets_outside_the_menu_are_rejected() {
        let g = g1();
        let nsr: HullMenu = no_swap_regret_menu(&g).into();
        let outside = Csp::point_mass(3, 2, 2, 0);
        assert!(matches!(
            realize_menu_learner(&nsr, vec![outside]),
            Err(Error::InvalidTarget { index: 0, .. })
        ));
    }

    #[test]
    fn fallback_drives_violation_down_and_moves_slowly() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_game(&mut rng, 3, 3, 1);
        let menu = no_swap_regret_menu(&g);
        let max_normal = menu
            .constraints()
            .iter()
            .flat_map(|h: &Halfspace| h.normal.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let hull: HullMenu = menu.clone().into();
        let mut learner = compose_abortable(vec![Box::new(realize_menu_learner(&hull, vec![]).unwrap())]).unwrap();
        let mut opt = Adversary::new(AdversaryKind::Random { seed: 5 }, &g, 0).unwrap();
        let mut prev = 0.0;
        let mut sum = [0.0; 9];
        let mut check = |r: &RoundRecord| {
            for i in 0..3 {
                for j in 0..3 {
                    sum[i * 3 + j] += r.x[i] * r.y[j];
                }
            }
            let t = (r.t + 1) as f64;
            let phi = Csp::from_solver(3, 3, sum.iter().map(|v| v / t).collect()).unwrap();
            let v = menu_violation(&phi, &menu);
            assert!(v - prev <= 2.0 * max_normal / t + 1e-12);
            prev = v;
        };
        let r = simulate(
            &g,
            &mut learner,
            &mut opt,
            5_000,
            SimulateOptions {
                menu: Some(&menu),
                on_round: Some(&mut check),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.menu_violation.unwrap() < 0.1, "{:?}", r.menu_violation);
    }

    #[test]
    fn composition_is_a_convex_combination_of_phases() {
        let g = g1();
        let t = 1000;
        let subs: Vec<Box<dyn AbortableLearner + Send>> = vec![
            Box::new(AbortAfter {
                x: vec![1.0, 0.0, 0.0],
                left: 500,
            }),
            Box::new(Constant(vec![0.0, 0.0, 1.0])),
        ];
        let mut learner = compose_abortable(subs).unwrap();
        let mut opt = Fixed(vec![0.25, 0.75]);
        let r = simulate(&g, &mut learner, &mut opt, t, SimulateOptions::default()).unwrap();
        assert_eq!(r.aborts, 1);
        assert_eq!(learner.phase_starts, vec![0, 500]);
        let first = Csp::product(&[1.0, 0.0, 0.0], &[0.25, 0.75]).unwrap();
        let second = Csp::product(&[0.0, 0.0, 1.0], &[0.25, 0.75]).unwrap();
        let mix = first.mix(&second, 0.5).unwrap();
        assert!(r.running_csp.l1_distance(&mix) <= 1.0 / t as f64);

        let single = Constant(vec![0.0, 1.0, 0.0]);
        let mut composed = compose_abortable(vec![Box::new(single)]).unwrap();
        let a = simulate(
            &g,
            &mut composed,
            &mut Fixed(vec![0.5, 0.5]),
            10,
            SimulateOptions::default(),
        )
        .unwrap();
        assert!((a.learner_avg - 0.5 * (7.1 + 2.1)).abs() < 1e-12);
    }

    #[test]
    fn hedge_examples() {
        let mut h = HedgeState::new(2, 1.0);
        let before = h.weights().to_vec();
        h.update(&[0.0, 0.0]);
        assert_eq!(h.weights(), &before[..]);
        let mut last = h.weights()[0];
        for _ in 0..50 {
            h.update(&[1.0, -1.0]);
            assert!(h.weights()[0] >= last);
            last = h.weights()[0];
        }
        assert!(last > 0.99);
    }
}
