//! Grid-search oracles for cross-checking the solvers on tiny instances.
//!
//! Lattices are the weak compositions `z` of a denominator `N` over a list
//! of generators, visited in lexicographic order of `z`; the point is
//! `sum_i z_i / N * g_i`.

use std::collections::HashMap;

use serde::Serialize;

use crate::approachability::{composition_count, test_thresholds_valid, DirectionNet};
use crate::error::{Error, Result};
use crate::game::{dot, BimatrixGame, Csp, CspAssignment};
use crate::lp::zero_sum_value;
use crate::maximin::threshold_assignment;
use crate::menus::{candidate_menu, no_regret_check, response_satisfiable_at, HalfspaceMenu};
use crate::stackelberg::stackelberg_values;

/// Largest lattice any oracle will enumerate.
pub const GRID_CAP: u128 = 10_000_000;

fn denominator(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::invalid(format!(
            "resolution must lie in (0, 1], got {resolution}"
        )));
    }
    Ok((1.0 / resolution - 1e-9).ceil() as usize)
}

fn check_size(parts: usize, total: usize) -> Result<u128> {
    let points = composition_count(parts, total);
    if points > GRID_CAP {
        return Err(Error::GridTooLarge { points, cap: GRID_CAP });
    }
    Ok(points)
}

/// Calls `f` on every weak composition of `total` into `parts` parts, in
/// lexicographic order.
pub fn for_each_composition(parts: usize, total: usize, mut f: impl FnMut(&[usize])) {
    fn rec(pos: usize, left: usize, cur: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            f(cur);
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, f);
        }
    }
    if parts == 0 {
        return;
    }
    let mut cur = vec![0; parts];
    rec(0, total, &mut cur, &mut f);
}

fn lattice_point(z: &[usize], total: usize, gens: &[Vec<f64>], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (zi, g) in z.iter().zip(gens) {
        if *zi != 0 {
            let w = *zi as f64 / total as f64;
            for (o, gv) in out.iter_mut().zip(g) {
                *o += w * gv;
            }
        }
    }
}

fn pure_pairs(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|q| {
            let mut e = vec![0.0; d];
            e[q] = 1.0;
            e
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GridNrResult {
    pub value: f64,
    pub assignment: CspAssignment,
    pub lattice_points: u128,
}

#[derive(Clone)]
struct Candidate {
    phi: Vec<f64>,
    learner: f64,
    optimizer: Vec<f64>,
}

/// Brute-force no-regret commitment over the lattice spanned by the pure
/// pairs and the Stackelberg CSPs. The Stackelberg bound per type is exact
/// (tolerance 1e-9), so the result never exceeds the LP optimum.
pub fn grid_bruteforce_nr(game: &BimatrixGame, resolution: f64) -> Result<GridNrResult> {
    let (k, d) = (game.k(), game.pairs());
    let total = denominator(resolution)?;
    let stack = stackelberg_values(game)?;
    let mut gens = pure_pairs(d);
    gens.extend(stack.iter().map(|s| s.csp.weights().to_vec()));
    let points = check_size(gens.len(), total)?;
    let tol = 1e-9 * (1.0 + game.p_max());

    // Only (u_L, u_O vector) matters for feasibility and value, so dedupe on it.
    let mut per_type: Vec<HashMap<Vec<i64>, Candidate>> = vec![HashMap::new(); k];
    let mut phi = vec![0.0; d];
    let key = |v: f64| (v * 1e9).round() as i64;
    for_each_composition(gens.len(), total, |z| {
        lattice_point(z, total, &gens, &mut phi);
        let csp = Csp::from_solver(game.m(), game.n(), phi.clone()).expect("lattice point is a CSP");
        if !no_regret_check(&csp, game, tol) {
            return;
        }
        let learner = dot(game.learner().as_slice(), &phi);
        let optimizer: Vec<f64> = (0..k).map(|s| dot(game.optimizer(s).as_slice(), &phi)).collect();
        for s in 0..k {
            if optimizer[s] >= stack[s].value - tol {
                let mut kk: Vec<i64> = optimizer.iter().map(|v| key(*v)).collect();
                kk.push(key(learner));
                per_type[s].entry(kk).or_insert_with(|| Candidate {
                    phi: phi.clone(),
                    learner,
                    optimizer: optimizer.clone(),
                });
            }
        }
    });
    let lists: Vec<Vec<Candidate>> = per_type
        .into_iter()
        .enumerate()
        .map(|(s, map)| {
            let mut v: Vec<Candidate> = map.into_values().collect();
            // Deterministic order: best learner value first, then the lattice point.
            v.sort_by(|a, b| b.learner.total_cmp(&a.learner).then_with(|| cmp_vec(&a.phi, &b.phi)));
            pareto(v, s)
        })
        .collect();
    let combos = lists.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
    if combos > GRID_CAP {
        return Err(Error::GridTooLarge {
            points: combos,
            cap: GRID_CAP,
        });
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut pick = vec![0usize; k];
    search(game, &lists, 0, &mut pick, 0.0, tol, &mut best);
    let (value, idx) = best.ok_or_else(|| Error::NumericalFailure("no lattice assignment is feasible".into()))?;
    let profiles = idx
        .iter()
        .enumerate()
        .map(|(s, &i)| Csp::from_solver(game.m(), game.n(), lists[s][i].phi.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridNrResult {
        value,
        assignment: CspAssignment::new(profiles)?,
        lattice_points: points,
    })
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Drops candidates for type `s` weakly dominated by an earlier one: no
/// better for the learner, no better for `s`, no worse for the others.
fn pareto(list: Vec<Candidate>, s: usize) -> Vec<Candidate> {
    if list.len() > 20_000 {
        return list;
    }
    let mut kept: Vec<Candidate> = Vec::new();
    'outer: for c in list {
        for p in &kept {
            let dominated = p.learner >= c.learner
                && p.optimizer[s] >= c.optimizer[s]
                && p.optimizer
                    .iter()
                    .zip(&c.optimizer)
                    .enumerate()
                    .all(|(t, (a, b))| t == s || a <= b);
            if dominated {
                continue 'outer;
            }
        }
        kept.push(c);
    }
    kept
}

fn search(
    game: &BimatrixGame,
    lists: &[Vec<Candidate>],
    s: usize,
    pick: &mut Vec<usize>,
    acc: f64,
    tol: f64,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    let k = lists.len();
    if s == k {
        if best.as_ref().is_none_or(|(v, _)| acc > *v + 1e-12) {
            *best = Some((acc, pick.clone()));
        }
        return;
    }
    for (i, c) in lists[s].iter().enumerate() {
        // Incentive compatibility against every earlier type, both directions.
        let ok = (0..s).all(|t| {
            let prev = &lists[t][pick[t]];
            prev.optimizer[t] >= c.optimizer[t] - tol && c.optimizer[s] >= prev.optimizer[s] - tol
        });
        if ok {
            pick[s] = i;
            search(game, lists, s + 1, pick, acc + game.alpha(s) * c.learner, tol, best);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridValidity {
    pub valid: bool,
    /// First grid `y` with no response landing in the menu.
    pub certificate: Option<Vec<f64>>,
    pub checked: usize,
}

/// Samples the validity condition of `candidate_menu(assign, 0)` on a grid
/// of optimizer strategies. A failure is a proof of invalidity.
pub fn grid_menu_validity(assign: &CspAssignment, game: &BimatrixGame, y_resolution: f64) -> Result<GridValidity> {
    grid_menu_validity_eps(assign, game, 0.0, y_resolution)
}

pub fn grid_menu_validity_eps(
    assign: &CspAssignment,
    game: &BimatrixGame,
    eps: f64,
    y_resolution: f64,
) -> Result<GridValidity> {
    let menu = candidate_menu(assign, eps, game)?;
    grid_halfspace_validity(&menu, y_resolution)
}

/// Same check for any halfspace menu.
pub fn grid_halfspace_validity(menu: &HalfspaceMenu, y_resolution: f64) -> Result<GridValidity> {
    let total = denominator(y_resolution)?;
    let n = menu.n();
    check_size(n, total)?;
    let gens = pure_pairs(n);
    let mut y = vec![0.0; n];
    let mut checked = 0;
    let mut certificate = None;
    let mut failure = None;
    for_each_composition(n, total, |z| {
        if certificate.is_some() || failure.is_some() {
            return;
        }
        lattice_point(z, total, &gens, &mut y);
        checked += 1;
        match response_satisfiable_at(menu, &y) {
            Ok(Some(_)) => {}
            Ok(None) => certificate = Some(y.clone()),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GridValidity {
        valid: certificate.is_none(),
        certificate,
        checked,
    })
}

/// Largest `V` on the grid `max u_L - j * resolution` whose threshold
/// assignment the tester accepts at `delta`.
pub fn grid_maximin_opt(game: &BimatrixGame, resolution: f64, delta: f64) -> Result<f64> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::invalid(format!("resolution must be positive, got {resolution}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let top = game.learner().max_entry();
    let bottom = game.learner().min_entry();
    let steps = ((top - bottom) / resolution).floor() as u128 + 1;
    // Each step runs the tester over its direction net.
    let net = DirectionNet::new(game.k(), delta / (4.0 * game.p_max().max(1e-12)))?;
    let work = steps.saturating_mul(net.len() as u128);
    if work > GRID_CAP {
        return Err(Error::GridTooLarge {
            points: work,
            cap: GRID_CAP,
        });
    }
    for j in 0..steps as usize {
        let v = top - j as f64 * resolution;
        let c = threshold_assignment(game, v)?.thresholds(game);
        if test_thresholds_valid(game, &c, delta)?.is_approachable() {
            return Ok(v);
        }
    }
    Ok(bottom)
}

/// Best learner value of a single-type commitment over the pure-pair
/// lattice. With one type a CSP is a valid commitment exactly when the
/// optimizer gets at least its minimax cap there.
pub fn grid_general_opt(game: &BimatrixGame, resolution: f64) -> Result<f64> {
    if game.k() != 1 {
        return Err(Error::invalid("grid_general_opt handles one optimizer type"));
    }
    let total = denominator(resolution)?;
    let d = game.pairs();
    check_size(d, total)?;
    let cap = zero_sum_value(game.optimizer(0))?.value;
    let tol = 1e-9 * (1.0 + game.p_max());
    let gens = pure_pairs(d);
    let mut phi = vec![0.0; d];
    let mut best = f64::NEG_INFINITY;
    for_each_composition(d, total, |z| {
        lattice_point(z, total, &gens, &mut phi);
        if dot(game.optimizer(0).as_slice(), &phi) >= cap - tol {
            best = best.max(dot(game.learner().as_slice(), &phi));
        }
    });
    Ok(best)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn project_halfspace(v: &[f64], normal: &[f64], rhs: f64) -> Vec<f64> {
    let over = dot(normal, v) - rhs;
    let nn = dot(normal, normal);
    if over <= 0.0 || nn == 0.0 {
        return v.to_vec();
    }
    v.iter().zip(normal).map(|(x, a)| x - over / nn * a).collect()
}

/// L2 distance from `point` to the menu, by Dykstra's alternating
/// projections onto the simplex and each halfspace.
pub fn euclidean_distance_to_polytope(point: &[f64], menu: &HalfspaceMenu) -> Result<f64> {
    let d = menu.m() * menu.n();
    if point.len() != d || point.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("point must have {d} finite entries")));
    }
    if !menu.is_nonempty()? {
        return Err(Error::EmptyMenu);
    }
    let sets = menu.len() + 1;
    let mut x = point.to_vec();
    let mut incr = vec![vec![0.0; d]; sets];
    for _ in 0..200_000 {
        let start = x.clone();
        for s in 0..sets {
            let shifted: Vec<f64> = x.iter().zip(&incr[s]).map(|(a, b)| a + b).collect();
            let proj = if s == 0 {
                project_simplex(&shifted)
            } else {
                let h = &menu.constraints()[s - 1];
                project_halfspace(&shifted, &h.normal, h.rhs)
            };
            incr[s] = shifted.iter().zip(&proj).map(|(a, b)| a - b).collect();
            x = proj;
        }
        let moved: f64 = x.iter().zip(&start).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if moved < 1e-13 {
            break;
        }
    }
    Ok(x.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit_nr::optimal_no_regret_commitment;
    use crate::fixtures::{g1, random_game, random_matrix};
    use crate::game::Matrix;
    use crate::menus::Halfspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composition_order_and_count() {
        let mut seen = Vec::new();
        for_each_composition(3, 2, |z| seen.push(z.to_vec()));
        assert_eq!(seen.len() as u128, composition_count(3, 2));
        assert_eq!(seen[0], vec![0, 0, 2]);
        assert_eq!(seen.last().unwrap(), &vec![2, 0, 0]);
    }

    #[test]
    fn nr_oracle_on_g1_is_below_the_lp() {
        let g = g1();
        let grid = grid_bruteforce_nr(&g, 0.25).unwrap();
        let lp = optimal_no_regret_commitment(&g).unwrap();
        assert!(grid.value >= 4.5);
        assert!(grid.value <= lp.value + 1e-9);
        // 1/4 (A,S) + 1/2 (B,R) + 1/4 (C,R) is on the lattice and feasible.
        assert!(grid.value >= 6.05 - 1e-9);
    }

    #[test]
    fn nr_oracle_trivial_games() {
        let g = BimatrixGame::single(Matrix::filled(1, 1, 0.7).unwrap(), Matrix::filled(1, 1, 0.1).unwrap()).unwrap();
        assert!((grid_bruteforce_nr(&g, 0.5).unwrap().value - 0.7).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = BimatrixGame::single(Matrix::filled(2, 2, -0.3).unwrap(), random_matrix(&mut rng, 2, 2, 1.0)).unwrap();
        assert!((grid_bruteforce_nr(&g, 0.2).unwrap().value + 0.3).abs() < 1e-12);
    }

    #[test]
    fn nr_oracle_never_beats_the_lp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..8 {
            let g = random_game(&mut rng, 2, 2, 2);
            let grid = grid_bruteforce_nr(&g, 0.25).unwrap();
            let lp = optimal_no_regret_commitment(&g).unwrap();
            assert!(lp.value >= grid.value - 1e-7, "{} < {}", lp.value, grid.value);
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let g = g1();
        assert!(matches!(grid_bruteforce_nr(&g, 0.001), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn menu_validity_examples() {
        let g = g1();
        let argmax = CspAssignment::new(vec![Csp::point_mass(3, 2, 2, 0)]).unwrap();
        assert!(grid_menu_validity(&argmax, &g, 0.1).unwrap().valid);
        // Threshold 0 is below the minimax cap 0.75.
        let low = CspAssignment::new(vec![Csp::point_mass(3, 2, 1, 0)]).unwrap();
        let v = grid_menu_validity(&low, &g, 0.1).unwrap();
        assert!(!v.valid);
        let y = v.certificate.unwrap();
        let menu = candidate_menu(&low, 0.0, &g).unwrap();
        assert!(response_satisfiable_at(&menu, &y).unwrap().is_none());

        let empty = HalfspaceMenu::new(
            3,
            2,
            vec![Halfspace {
                normal: vec![0.0; 6],
                rhs: -1.0,
            }],
        )
        .unwrap();
        let v = grid_halfspace_validity(&empty, 0.5).unwrap();
        assert_eq!((v.valid, v.checked), (false, 1));
    }

    #[test]
    fn maximin_oracle_examples() {
        let g = BimatrixGame::single(Matrix::filled(2, 2, 0.25).unwrap(), Matrix::filled(2, 2, 1.0).unwrap()).unwrap();
        assert_eq!(grid_maximin_opt(&g, 0.05, 0.02).unwrap(), 0.25);

        let u = Matrix::from_rows(&[vec![0.9, 0.0], vec![0.0, 0.6]]).unwrap();
        let g = BimatrixGame::single(u.clone(), u).unwrap();
        assert!((grid_maximin_opt(&g, 0.05, 0.02).unwrap() - 0.9).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let u = random_matrix(&mut rng, 2, 2, 1.0);
            let g = BimatrixGame::single(u.clone(), u.map(|v| -v)).unwrap();
            let value = -zero_sum_value(&u.map(|v| -v)).unwrap().value;
            let grid = grid_maximin_opt(&g, 0.05, 0.02).unwrap();
            assert!((grid - value).abs() <= 0.05 + 0.02, "{grid} vs {value}");
        }
    }

    #[test]
    fn general_oracle_on_g1() {
        // Best single CSP worth at least the cap 0.75 to the optimizer: 1/4 (C,R) + 3/4 (B,R).
        let v = grid_general_opt(&g1(), 0.05).unwrap();
        assert!((v - 7.075).abs() < 1e-9, "{v}");
    }

    #[test]
    fn distance_examples() {
        let full = HalfspaceMenu::full(1, 3);
        assert!(euclidean_distance_to_polytope(&[0.2, 0.3, 0.5], &full).unwrap() < 1e-12);
        // Simplex cut by x_0 <= 0.5, from the vertex e_0: projection (0.5, 0.25, 0.25).
        let cut = HalfspaceMenu::new(
            1,
            3,
            vec![Halfspace {
                normal: vec![1.0, 0.0, 0.0],
                rhs: 0.5,
            }],
        )
        .unwrap();
        let d = euclidean_distance_to_polytope(&[1.0, 0.0, 0.0], &cut).unwrap();
        assert!((d - (0.25f64 + 2.0 * 0.0625).sqrt()).abs() < 1e-9);
        let empty = HalfspaceMenu::new(
            1,
            3,
            vec![Halfspace {
                normal: vec![0.0; 3],
                rhs: -1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            euclidean_distance_to_polytope(&[1.0, 0.0, 0.0], &empty),
            Err(Error::EmptyMenu)
        ));
    }

    #[test]
    fn distance_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let total = 1500;
        for _ in 0..3 {
            let normal: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let menu = HalfspaceMenu::new(1, 3, vec![Halfspace { normal, rhs: 0.0 }]).unwrap();
            if !menu.is_nonempty().unwrap() {
                continue;
            }
            let point: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..1.5)).collect();
            let exact = euclidean_distance_to_polytope(&point, &menu).unwrap();
            let mut best = f64::INFINITY;
            let gens = pure_pairs(3);
            let mut q = vec![0.0; 3];
            for_each_composition(3, total, |z| {
                lattice_point(z, total, &gens, &mut q);
                if menu.constraints()[0].violation(&q) <= 0.0 {
                    let dist = q.iter().zip(&point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    best = best.min(dist);
                }
            });
            assert!(exact <= best + 1e-9);
            assert!(best - exact <= 1e-3, "{best} vs {exact}");
        }
    }
}
