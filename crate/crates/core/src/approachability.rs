//! Approachability of candidate menus, tested in utility space over
//! directions of the `k`-simplex.
//!
//! For thresholds `c`, the orthant `{u : u <= c}` is approachable iff for
//! every direction `a` the learner can hold `a . u_O(x, y)` to `a . c`.
//! The tester checks this on a lattice of directions and converts a failing
//! direction into a cut in assignment space.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{check_simplex, BimatrixGame, Csp, CspAssignment, Matrix};
use crate::lp::{zero_sum_value, ZeroSumSolution};

/// Learner-minimized value of `sum_s a_s u_O,s`.
pub fn halfspace_value(game: &BimatrixGame, a: &[f64]) -> Result<ZeroSumSolution> {
    if a.len() != game.k() {
        return Err(Error::invalid(format!(
            "direction has length {}, expected k = {}",
            a.len(),
            game.k()
        )));
    }
    check_simplex(a, "direction")?;
    zero_sum_value(&weighted_payoff(game, a))
}

pub(crate) fn weighted_payoff(game: &BimatrixGame, a: &[f64]) -> Matrix {
    let mut data = vec![0.0; game.pairs()];
    for (s, &w) in a.iter().enumerate() {
        if w != 0.0 {
            for (d, u) in data.iter_mut().zip(game.optimizer(s).as_slice()) {
                *d += w * u;
            }
        }
    }
    Matrix::new(game.m(), game.n(), data).expect("shape matches the game")
}

/// Lattice `{z / N : z in Z^k_{>=0}, sum z = N}` in lexicographic order of `z`.
///
/// Rounding any simplex point to the lattice moves it by at most
/// `2 floor(k/2) / N` in L1, so `N = ceil(2 floor(k/2) / spacing)` gives an
/// L1 mesh of at most `spacing`.
#[derive(Debug, Clone)]
pub struct DirectionNet {
    pub dim: usize,
    pub spacing: f64,
    pub denominator: usize,
    pub points: Vec<Vec<f64>>,
}

impl DirectionNet {
    pub fn new(dim: usize, spacing: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("direction net needs k >= 1"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!("net spacing must be positive, got {spacing}")));
        }
        let denominator = if dim == 1 {
            1
        } else {
            (2.0 * (dim / 2) as f64 / spacing).ceil().max(1.0) as usize
        };
        let points = compositions(dim, denominator)
            .into_iter()
            .map(|z| z.into_iter().map(|v| v as f64 / denominator as f64).collect())
            .collect();
        Ok(Self {
            dim,
            spacing,
            denominator,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of weak compositions of `total` into `parts` parts.
pub(crate) fn composition_count(parts: usize, total: usize) -> u128 {
    // C(total + parts - 1, parts - 1)
    let (n, r) = ((total + parts - 1) as u128, (parts - 1) as u128);
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All weak compositions of `total` into `parts` parts, in lexicographic order.
pub(crate) fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Outcome {
    /// The candidate menu expanded by `delta` is a valid menu.
    ApproachableExpanded(f64),
    NotApproachable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetCertificate {
    pub direction: Vec<f64>,
    /// Optimizer strategy against which no learner response lands in the menu.
    pub y: Vec<f64>,
    /// `halfspace_value(direction) - direction . c`
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachVerdict {
    pub outcome: Outcome,
    pub certificate: Option<NetCertificate>,
    /// `min_a (a . c + delta/2 - halfspace_value(a))` over the net.
    pub min_slack: f64,
    pub directions: usize,
}

impl ApproachVerdict {
    pub fn is_approachable(&self) -> bool {
        matches!(self.outcome, Outcome::ApproachableExpanded(_))
    }
}

/// Tests whether `candidate_menu(assign, delta)` is a valid menu.
pub fn test_assignment_valid(assign: &CspAssignment, game: &BimatrixGame, delta: f64) -> Result<ApproachVerdict> {
    assign.check_against(game)?;
    test_thresholds_valid(game, &assign.thresholds(game), delta)
}

/// Same test phrased over `m * n` actions. For candidate menus the two
/// perspectives coincide, so this shares the engine.
pub fn test_assignment_valid_mn(assign: &CspAssignment, game: &BimatrixGame, delta: f64) -> Result<ApproachVerdict> {
    test_assignment_valid(assign, game, delta)
}

/// Tester on raw thresholds `c` (one per type).
///
/// The map `a -> halfspace_value(a) - a . c` is `2 P_max`-Lipschitz in L1,
/// so with net mesh `delta / (4 P_max)` every net point passing with
/// margin `delta / 2` means every direction passes with margin `delta`.
pub fn test_thresholds_valid(game: &BimatrixGame, thresholds: &[f64], delta: f64) -> Result<ApproachVerdict> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if thresholds.len() != game.k() || thresholds.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("thresholds must be k finite numbers"));
    }
    let net = DirectionNet::new(game.k(), delta / (4.0 * game.payoff_scale()))?;
    let slacks: Vec<Result<(f64, ZeroSumSolution)>> = net
        .points
        .par_iter()
        .map(|a| {
            let z = halfspace_value(game, a)?;
            let ac: f64 = a.iter().zip(thresholds).map(|(x, c)| x * c).sum();
            Ok((ac + delta / 2.0 - z.value, z))
        })
        .collect();
    let mut min_slack = f64::INFINITY;
    let mut certificate = None;
    for (a, r) in net.points.iter().zip(slacks) {
        let (slack, z) = r?;
        min_slack = min_slack.min(slack);
        if slack < 0.0 && certificate.is_none() {
            certificate = Some(NetCertificate {
                direction: a.clone(),
                excess: delta / 2.0 - slack,
                y: z.y,
            });
        }
    }
    Ok(ApproachVerdict {
        outcome: if certificate.is_some() {
            Outcome::NotApproachable
        } else {
            Outcome::ApproachableExpanded(delta)
        },
        certificate,
        min_slack,
        directions: net.len(),
    })
}

/// Cut `sum_s h_s u_O,s(phi'_s) >= offset + margin`, satisfied by every
/// assignment whose candidate menu answers `y`; the queried assignment
/// attains exactly `offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatingHyperplane {
    pub h: Vec<f64>,
    pub offset: f64,
    pub margin: f64,
}

impl SeparatingHyperplane {
    /// Coefficients on the flattened assignment (type-major, then pairs).
    pub fn normal(&self, game: &BimatrixGame) -> Vec<f64> {
        let mut out = Vec::with_capacity(game.k() * game.pairs());
        for (s, &w) in self.h.iter().enumerate() {
            out.extend(game.optimizer(s).as_slice().iter().map(|u| w * u));
        }
        out
    }
}

pub fn separating_hyperplane(assign: &CspAssignment, game: &BimatrixGame, y: &[f64]) -> Result<SeparatingHyperplane> {
    assign.check_against(game)?;
    separating_hyperplane_for_thresholds(game, &assign.thresholds(game), y)
}

pub fn separating_hyperplane_for_thresholds(
    game: &BimatrixGame,
    thresholds: &[f64],
    y: &[f64],
) -> Result<SeparatingHyperplane> {
    if y.len() != game.n() {
        return Err(Error::invalid(format!(
            "y has length {}, expected {}",
            y.len(),
            game.n()
        )));
    }
    check_simplex(y, "y")?;
    let (m, k) = (game.m(), game.k());
    let mut data = Vec::with_capacity(m * k);
    for i in 0..m {
        for (s, c) in thresholds.iter().enumerate() {
            let u: f64 = game.optimizer(s).row(i).iter().zip(y).map(|(a, b)| a * b).sum();
            data.push(u - c);
        }
    }
    let z = zero_sum_value(&Matrix::new(m, k, data)?)?;
    if z.value <= 0.0 {
        return Err(Error::CertificateInvalid { margin: z.value });
    }
    let offset = z.y.iter().zip(thresholds).map(|(h, c)| h * c).sum();
    Ok(SeparatingHyperplane {
        h: z.y,
        offset,
        margin: z.value,
    })
}

/// Moves up to `eps / k` mass per type from the pairs worst for that type
/// onto its best pair (lowest index among ties).
pub fn water_fill_repair(assign: &CspAssignment, game: &BimatrixGame, eps: f64) -> Result<CspAssignment> {
    assign.check_against(game)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    let budget = eps / game.k() as f64;
    let profiles = (0..game.k())
        .map(|s| water_fill_profile(assign.profile(s), game.optimizer(s).as_slice(), budget))
        .collect::<Result<Vec<_>>>()?;
    CspAssignment::new(profiles)
}

fn water_fill_profile(phi: &Csp, u: &[f64], budget: f64) -> Result<Csp> {
    let top = best_pair(u);
    let mut order: Vec<usize> = (0..u.len()).filter(|&p| p != top).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
    let mut w = phi.weights().to_vec();
    let mut left = budget;
    for p in order {
        if left <= 0.0 {
            break;
        }
        let take = w[p].max(0.0).min(left);
        w[p] -= take;
        w[top] += take;
        left -= take;
    }
    Csp::from_solver(phi.m(), phi.n(), w)
}

pub(crate) fn best_pair(u: &[f64]) -> usize {
    let mut best = 0;
    for (p, &v) in u.iter().enumerate() {
        if v > u[best] {
            best = p;
        }
    }
    best
}

/// Smallest positive gap between distinct entries, or 1 if all are equal.
pub fn min_payoff_gap(u: &Matrix) -> f64 {
    let mut vals = u.as_slice().to_vec();
    vals.sort_by(f64::total_cmp);
    vals.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
        .unwrap_or(1.0)
}
