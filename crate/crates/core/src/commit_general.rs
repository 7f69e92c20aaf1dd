//! Approximately optimal general commitment by the ellipsoid method over
//! CSP assignments.
//!
//! The search runs in the affine hull of the product of simplices: each
//! type's CSP is `barycenter + H z_s` with `H` an orthonormal basis of the
//! zero-sum subspace, so the equality constraints never need cutting.
//! Feasibility cuts come from nonnegativity, relaxed incentive
//! compatibility and the approachability tester; feasible centres trigger
//! objective cuts.

use serde::Serialize;

use crate::approachability::{separating_hyperplane_for_thresholds, test_thresholds_valid};
use crate::error::{Error, Result};
use crate::game::{assignment_value, dot, BimatrixGame, Csp, CspAssignment};
use crate::menus::{candidate_menu, HullMenu};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    pub eps: f64,
    /// Tester resolution; defaults to `eps / (8 sqrt(mn))`.
    pub delta: Option<f64>,
    pub max_iters: usize,
}

impl GeneralOptions {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            delta: None,
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneralStatus {
    /// The localization ellipsoid cannot beat the incumbent by more than `eps / 2`.
    Converged,
    /// Iteration cap reached; the incumbent is returned as is.
    IterationCapExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutKind {
    Nonnegativity,
    Incentive,
    Approachability,
    Objective,
}

/// `normal . Phi <= rhs` on the flattened assignment, with the value the
/// query point had when the cut was generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRecord {
    pub kind: CutKind,
    pub normal: Vec<f64>,
    pub rhs: f64,
    pub query_value: f64,
}

#[derive(Debug, Clone)]
pub struct GeneralCommitment {
    pub assignment: CspAssignment,
    /// `candidate_menu(assignment, eps)` plus the assigned points.
    pub menu: HullMenu,
    pub value_lower_bound: f64,
    /// Upper bound on the objective over the final ellipsoid.
    pub upper_bound: f64,
    pub status: GeneralStatus,
    pub iterations: usize,
    pub delta: f64,
    pub cuts: Vec<CutRecord>,
}

/// Orthonormal basis of `{v in R^p : sum v = 0}` as `p - 1` columns, row-major `p x (p-1)`.
fn helmert(p: usize) -> Vec<f64> {
    let mut h = vec![0.0; p * (p - 1)];
    for j in 1..p {
        let norm = ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            h[i * (p - 1) + (j - 1)] = 1.0 / norm;
        }
        h[j * (p - 1) + (j - 1)] = -(j as f64) / norm;
    }
    h
}

struct Coords {
    k: usize,
    p: usize,
    h: Vec<f64>,
}

impl Coords {
    fn dim(&self) -> usize {
        self.k * (self.p - 1)
    }

    fn to_assignment(&self, z: &[f64]) -> Vec<f64> {
        let (p, r) = (self.p, self.p - 1);
        let mut out = vec![1.0 / p as f64; self.k * p];
        for s in 0..self.k {
            for q in 0..p {
                out[s * p + q] += dot(&self.h[q * r..(q + 1) * r], &z[s * r..(s + 1) * r]);
            }
        }
        out
    }

    /// Pulls a linear form on the flat assignment back to `(gradient in z, constant)`.
    fn pull_back(&self, normal: &[f64]) -> (Vec<f64>, f64) {
        let (p, r) = (self.p, self.p - 1);
        let mut g = vec![0.0; self.dim()];
        let mut constant = 0.0;
        for s in 0..self.k {
            for q in 0..p {
                let w = normal[s * p + q];
                if w == 0.0 {
                    continue;
                }
                constant += w / p as f64;
                for c in 0..r {
                    g[s * r + c] += w * self.h[q * r + c];
                }
            }
        }
        (g, constant)
    }
}

struct Ellipsoid {
    d: usize,
    center: Vec<f64>,
    /// Shape matrix, row-major `d x d`.
    p: Vec<f64>,
}

enum CutResult {
    Shrunk,
    Empty,
    Degenerate,
}

impl Ellipsoid {
    fn p_times(&self, g: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| dot(&self.p[i * self.d..(i + 1) * self.d], g))
            .collect()
    }

    /// `max_{z in E} g . z - g . center`
    fn width(&self, g: &[f64]) -> f64 {
        dot(g, &self.p_times(g)).max(0.0).sqrt()
    }

    /// Keeps `{z : g . z <= beta}`.
    fn cut(&mut self, g: &[f64], beta: f64) -> CutResult {
        let pg = self.p_times(g);
        let gpg = dot(g, &pg);
        if !(gpg > 1e-300) || !gpg.is_finite() {
            return CutResult::Degenerate;
        }
        let root = gpg.sqrt();
        let alpha = (dot(g, &self.center) - beta) / root;
        if alpha >= 1.0 {
            return CutResult::Empty;
        }
        let alpha = alpha.max(0.0);
        let d = self.d as f64;
        let b: Vec<f64> = pg.iter().map(|v| v / root).collect();
        if self.d == 1 {
            // Interval [c - r, c + r] clipped at the cut.
            let r = root / g[0].abs();
            let (lo, hi) = (self.center[0] - r, self.center[0] + r);
            let edge = beta / g[0];
            let (lo, hi) = if g[0] > 0.0 {
                (lo, hi.min(edge))
            } else {
                (lo.max(edge), hi)
            };
            self.center[0] = 0.5 * (lo + hi);
            self.p[0] = (0.5 * (hi - lo)).powi(2);
            return CutResult::Shrunk;
        }
        let step = (1.0 + d * alpha) / (d + 1.0);
        for (c, bi) in self.center.iter_mut().zip(&b) {
            *c -= step * bi;
        }
        let scale = d * d * (1.0 - alpha * alpha) / (d * d - 1.0);
        let shrink = 2.0 * (1.0 + d * alpha) / ((d + 1.0) * (1.0 + alpha));
        for i in 0..self.d {
            for j in 0..self.d {
                let v = self.p[i * self.d + j] - shrink * b[i] * b[j];
                self.p[i * self.d + j] = scale * v;
            }
        }
        // Re-symmetrize against round-off.
        for i in 0..self.d {
            for j in i + 1..self.d {
                let v = 0.5 * (self.p[i * self.d + j] + self.p[j * self.d + i]);
                self.p[i * self.d + j] = v;
                self.p[j * self.d + i] = v;
            }
        }
        CutResult::Shrunk
    }
}

pub fn optimize_general(game: &BimatrixGame, opts: &GeneralOptions) -> Result<GeneralCommitment> {
    let eps = opts.eps;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let (k, p) = (game.k(), game.pairs());
    let delta = opts.delta.unwrap_or(eps / (8.0 * (p as f64).sqrt()));
    if !(delta > 0.0) || delta > eps / 4.0 + 1e-15 {
        return Err(Error::invalid(format!("delta must lie in (0, eps/4], got {delta}")));
    }
    if opts.max_iters == 0 {
        return Err(Error::invalid("max_iters must be positive"));
    }

    let mut objective = vec![0.0; k * p];
    for s in 0..k {
        for (q, u) in game.learner().as_slice().iter().enumerate() {
            objective[s * p + q] = game.alpha(s) * u;
        }
    }

    if p == 1 {
        // A single pair: the only assignment is trivially valid.
        let assignment = CspAssignment::new(vec![Csp::point_mass(1, 1, 0, 0); k])?;
        let value = assignment_value(game, &assignment)?;
        return finish(
            game,
            assignment,
            value,
            value,
            GeneralStatus::Converged,
            0,
            delta,
            eps,
            Vec::new(),
        );
    }

    let coords = Coords { k, p, h: helmert(p) };
    let dim = coords.dim();
    let mut ell = Ellipsoid {
        d: dim,
        center: vec![0.0; dim],
        p: (0..dim * dim)
            .map(|i| if i % (dim + 1) == 0 { k as f64 } else { 0.0 })
            .collect(),
    };
    let (obj_g, obj_c) = coords.pull_back(&objective);
    let ic_slack = eps / 100.0;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut cuts = Vec::new();
    let mut status = GeneralStatus::IterationCapExceeded;
    let mut iterations = 0;
    let mut upper = f64::INFINITY;

    while iterations < opts.max_iters {
        iterations += 1;
        let phi = coords.to_assignment(&ell.center);

        let mut cut: Option<(CutKind, Vec<f64>, f64)> = None;
        // Most negative coordinate first.
        if let Some((q, &v)) = phi.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
            if v < 0.0 {
                let mut normal = vec![0.0; k * p];
                normal[q] = -1.0;
                cut = Some((CutKind::Nonnegativity, normal, 0.0));
            }
        }
        if cut.is_none() {
            let mut worst = (0.0, 0, 0);
            for s in 0..k {
                let u = game.optimizer(s).as_slice();
                let own = dot(u, &phi[s * p..(s + 1) * p]);
                for t in 0..k {
                    if t != s {
                        let gap = dot(u, &phi[t * p..(t + 1) * p]) - own - ic_slack;
                        if gap > worst.0 {
                            worst = (gap, s, t);
                        }
                    }
                }
            }
            if worst.0 > 0.0 {
                let (_, s, t) = worst;
                let u = game.optimizer(s).as_slice();
                let mut normal = vec![0.0; k * p];
                for q in 0..p {
                    normal[t * p + q] += u[q];
                    normal[s * p + q] -= u[q];
                }
                cut = Some((CutKind::Incentive, normal, ic_slack));
            }
        }
        let thresholds: Vec<f64> = (0..k)
            .map(|s| dot(game.optimizer(s).as_slice(), &phi[s * p..(s + 1) * p]))
            .collect();
        if cut.is_none() {
            let verdict = test_thresholds_valid(game, &thresholds, delta)?;
            if let Some(cert) = verdict.certificate {
                let hp = separating_hyperplane_for_thresholds(game, &thresholds, &cert.y)?;
                let normal: Vec<f64> = hp.normal(game).into_iter().map(|v| -v).collect();
                cut = Some((CutKind::Approachability, normal, -(hp.offset + hp.margin)));
            }
        }

        let (kind, normal, rhs) = match cut {
            Some(c) => c,
            None => {
                let value = dot(&objective, &phi);
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, phi.clone()));
                }
                let incumbent = best.as_ref().map(|b| b.0).unwrap();
                upper = value + ell.width(&obj_g);
                if upper - incumbent <= eps / 2.0 {
                    status = GeneralStatus::Converged;
                    break;
                }
                let normal: Vec<f64> = objective.iter().map(|v| -v).collect();
                (CutKind::Objective, normal, -incumbent)
            }
        };
        let query_value = dot(&normal, &phi);
        let (g, constant) = coords.pull_back(&normal);
        cuts.push(CutRecord {
            kind,
            normal,
            rhs,
            query_value,
        });
        match ell.cut(&g, rhs - constant) {
            CutResult::Shrunk => {}
            CutResult::Empty | CutResult::Degenerate => {
                // Nothing left that beats the incumbent (or the shape collapsed numerically).
                if let Some((b, _)) = &best {
                    upper = *b;
                    status = GeneralStatus::Converged;
                }
                break;
            }
        }
        if let Some((b, _)) = &best {
            // Ellipsoid-wide bound, valid at infeasible centres too.
            let bound = dot(&obj_g, &ell.center) + obj_c + ell.width(&obj_g);
            if bound - b <= eps / 2.0 {
                upper = bound.max(*b);
                status = GeneralStatus::Converged;
                break;
            }
        }
    }

    let Some((value, flat)) = best else {
        return Err(Error::IterationCapExceeded { iterations });
    };
    let profiles = (0..k)
        .map(|s| Csp::from_solver(game.m(), game.n(), flat[s * p..(s + 1) * p].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let assignment = CspAssignment::new(profiles)?;
    debug_assert!((assignment_value(game, &assignment)? - value).abs() < 1e-6);
    let value = assignment_value(game, &assignment)?;
    finish(game, assignment, value, upper, status, iterations, delta, eps, cuts)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    game: &BimatrixGame,
    assignment: CspAssignment,
    value: f64,
    upper: f64,
    status: GeneralStatus,
    iterations: usize,
    delta: f64,
    eps: f64,
    cuts: Vec<CutRecord>,
) -> Result<GeneralCommitment> {
    let menu = HullMenu::new(candidate_menu(&assignment, eps, game)?, assignment.profiles().to_vec())?;
    Ok(GeneralCommitment {
        assignment,
        menu,
        value_lower_bound: value,
        upper_bound: upper,
        status,
        iterations,
        delta,
        cuts,
    })
}

/// Learner value of a menu when every type picks its favourite outcome and
/// breaks near-ties (within `eps`) in the learner's favour.
pub fn eval_menu_value(menu: &HullMenu, game: &BimatrixGame, eps: f64) -> Result<f64> {
    if menu.base.m() != game.m() || menu.base.n() != game.n() {
        return Err(Error::invalid("menu shape does not match the game"));
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("eps must be nonnegative, got {eps}")));
    }
    let mut total = 0.0;
    for s in 0..game.k() {
        let sel = menu
            .select(game.optimizer(s), game.learner(), eps)?
            .ok_or(Error::EmptyMenu)?;
        total += game.alpha(s) * sel.learner_value;
    }
    Ok(total)
}
