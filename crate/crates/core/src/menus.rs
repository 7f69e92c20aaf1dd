//! Menus as halfspace systems over the CSP simplex, plus convex hulls of a
//! halfspace menu with finitely many extra points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_simplex, dot, BimatrixGame, Csp, CspAssignment, Matrix};
use crate::lp::{LinearProgram, LpStatus};

/// `normal . phi <= rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub rhs: f64,
}

impl Halfspace {
    pub fn violation(&self, phi: &[f64]) -> f64 {
        dot(&self.normal, phi) - self.rhs
    }
}

/// Intersection of the CSP simplex with finitely many halfspaces. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceMenu {
    m: usize,
    n: usize,
    constraints: Vec<Halfspace>,
}

#[derive(Serialize, Deserialize)]
struct MenuDoc {
    constraints: Vec<Halfspace>,
}

impl HalfspaceMenu {
    pub fn new(m: usize, n: usize, constraints: Vec<Halfspace>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("menu dimensions must be positive"));
        }
        for (c, h) in constraints.iter().enumerate() {
            if h.normal.len() != m * n {
                return Err(Error::invalid(format!(
                    "constraint {c} has a normal of length {}, expected {}",
                    h.normal.len(),
                    m * n
                )));
            }
            if !h.rhs.is_finite() || h.normal.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("constraint {c} has a non-finite entry")));
            }
        }
        Ok(Self { m, n, constraints })
    }

    /// The whole simplex.
    pub fn full(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            constraints: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Halfspace] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Same normals, every right-hand side raised by `slack`.
    pub fn relaxed(&self, slack: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            constraints: self
                .constraints
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    rhs: h.rhs + slack,
                })
                .collect(),
        }
    }

    pub fn contains(&self, phi: &Csp, tol: f64) -> bool {
        menu_violation(phi, self) <= tol
    }

    /// Does the menu intersect the simplex at all?
    pub fn is_nonempty(&self) -> Result<bool> {
        let mut lp = LinearProgram::maximize(vec![0.0; self.m * self.n]);
        self.add_rows(&mut lp);
        Ok(lp.solve()?.is_optimal())
    }

    fn add_rows(&self, lp: &mut LinearProgram) {
        lp.eq(vec![1.0; self.m * self.n], 1.0);
        for h in &self.constraints {
            lp.le(h.normal.clone(), h.rhs);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MenuDoc {
            constraints: self.constraints.clone(),
        })
        .expect("menu serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(MenuDoc {
            constraints: self.constraints.clone(),
        })
        .expect("menu serializes")
    }

    pub fn from_json(text: &str, m: usize, n: usize) -> Result<Self> {
        let doc: MenuDoc = serde_json::from_str(text).map_err(|e| Error::invalid(format!("menu JSON: {e}")))?;
        Self::new(m, n, doc.constraints)
    }
}

/// `max(0, max_c normal_c . phi - rhs_c)`; zero exactly on the menu.
pub fn menu_violation(phi: &Csp, menu: &HalfspaceMenu) -> f64 {
    menu.constraints
        .iter()
        .map(|h| h.violation(phi.weights()))
        .fold(0.0, f64::max)
}

/// Orthant `{u in R^k : u_s <= c_s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilitySet {
    pub thresholds: Vec<f64>,
}

impl UtilitySet {
    pub fn of_assignment(assign: &CspAssignment, game: &BimatrixGame, eps: f64) -> Self {
        Self {
            thresholds: assign.thresholds(game).into_iter().map(|c| c + eps).collect(),
        }
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        u.iter().zip(&self.thresholds).all(|(a, c)| *a <= c + tol)
    }
}

/// External-regret polytope: one row per learner deviation `d`,
/// `sum_ij phi_ij (u_L(d, j) - u_L(i, j)) <= 0`.
pub fn no_regret_menu(game: &BimatrixGame) -> HalfspaceMenu {
    let (m, n) = (game.m(), game.n());
    let u = game.learner();
    let constraints = (0..m)
        .map(|d| {
            let mut normal = vec![0.0; m * n];
            for i in 0..m {
                for j in 0..n {
                    normal[i * n + j] = u.get(d, j) - u.get(i, j);
                }
            }
            Halfspace { normal, rhs: 0.0 }
        })
        .collect();
    HalfspaceMenu { m, n, constraints }
}

pub fn no_regret_check(phi: &Csp, game: &BimatrixGame, tol: f64) -> bool {
    no_regret_menu(game).contains(phi, tol)
}

/// Swap-regret polytope: for every ordered pair `i != d`,
/// `sum_j phi_ij (u_L(d, j) - u_L(i, j)) <= 0`.
pub fn no_swap_regret_menu(game: &BimatrixGame) -> HalfspaceMenu {
    let (m, n) = (game.m(), game.n());
    let u = game.learner();
    let mut constraints = Vec::with_capacity(m * m.saturating_sub(1));
    for i in 0..m {
        for d in 0..m {
            if d == i {
                continue;
            }
            let mut normal = vec![0.0; m * n];
            for j in 0..n {
                normal[i * n + j] = u.get(d, j) - u.get(i, j);
            }
            constraints.push(Halfspace { normal, rhs: 0.0 });
        }
    }
    HalfspaceMenu { m, n, constraints }
}

pub fn no_swap_regret_check(phi: &Csp, game: &BimatrixGame, tol: f64) -> bool {
    no_swap_regret_menu(game).contains(phi, tol)
}

/// `{phi : u_O,s(phi) <= u_O,s(phi_s) + eps for every type s}`.
pub fn candidate_menu(assign: &CspAssignment, eps: f64, game: &BimatrixGame) -> Result<HalfspaceMenu> {
    assign.check_against(game)?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be finite and nonnegative, got {eps}")));
    }
    Ok(candidate_menu_from_thresholds(game, &assign.thresholds(game), eps))
}

pub(crate) fn candidate_menu_from_thresholds(game: &BimatrixGame, thresholds: &[f64], eps: f64) -> HalfspaceMenu {
    let constraints = thresholds
        .iter()
        .enumerate()
        .map(|(s, c)| Halfspace {
            normal: game.optimizer(s).as_slice().to_vec(),
            rhs: c + eps,
        })
        .collect();
    HalfspaceMenu {
        m: game.m(),
        n: game.n(),
        constraints,
    }
}

/// Largest amount by which some type prefers another type's CSP to its own.
pub fn incentive_gap(assign: &CspAssignment, game: &BimatrixGame) -> f64 {
    let k = assign.k();
    let mut worst: f64 = 0.0;
    for s in 0..k {
        let u = game.optimizer(s).as_slice();
        let own = dot(u, assign.profile(s).weights());
        for t in 0..k {
            worst = worst.max(dot(u, assign.profile(t).weights()) - own);
        }
    }
    worst
}

pub fn incentive_check(assign: &CspAssignment, game: &BimatrixGame, slack: f64) -> bool {
    incentive_gap(assign, game) <= slack
}

/// Some `x` with `x (x) y` in the menu, if one exists.
pub fn response_satisfiable_at(menu: &HalfspaceMenu, y: &[f64]) -> Result<Option<Vec<f64>>> {
    let (m, n) = (menu.m, menu.n);
    if y.len() != n {
        return Err(Error::invalid(format!("y has length {}, expected {n}", y.len())));
    }
    check_simplex(y, "y")?;
    let mut lp = LinearProgram::maximize(vec![0.0; m]);
    lp.eq(vec![1.0; m], 1.0);
    for h in &menu.constraints {
        let row: Vec<f64> = (0..m).map(|i| dot(&h.normal[i * n..(i + 1) * n], y)).collect();
        lp.le(row, h.rhs);
    }
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(crate::lp::normalize(sol.point)),
        _ => None,
    })
}

/// `conv(base ∪ points)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HullMenu {
    pub base: HalfspaceMenu,
    pub points: Vec<Csp>,
}

/// Outcome an optimizer selects from a menu.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub csp: Csp,
    pub optimizer_value: f64,
    pub learner_value: f64,
}

impl From<HalfspaceMenu> for HullMenu {
    fn from(base: HalfspaceMenu) -> Self {
        Self {
            base,
            points: Vec::new(),
        }
    }
}

impl HullMenu {
    pub fn new(base: HalfspaceMenu, points: Vec<Csp>) -> Result<Self> {
        for (p, c) in points.iter().enumerate() {
            if c.m() != base.m || c.n() != base.n {
                return Err(Error::invalid(format!("extra point {p} has the wrong shape")));
            }
        }
        Ok(Self { base, points })
    }

    fn dims(&self) -> usize {
        self.base.m * self.base.n
    }

    /// Homogenized LP over `(psi, lambda_0, lambda_p)` with
    /// `phi = psi + sum_p lambda_p p`, `psi` in `lambda_0` times the base.
    fn hull_lp(&self, objective: &[f64]) -> LinearProgram {
        let d = self.dims();
        let np = self.points.len();
        let mut obj = objective.to_vec();
        obj.push(0.0);
        for p in &self.points {
            obj.push(dot(objective, p.weights()));
        }
        let mut lp = LinearProgram::maximize(obj);
        let mut row = vec![1.0; d];
        row.push(-1.0);
        row.extend(std::iter::repeat_n(0.0, np));
        lp.eq(row, 0.0);
        for h in &self.base.constraints {
            let mut row = h.normal.clone();
            row.push(-h.rhs);
            row.extend(std::iter::repeat_n(0.0, np));
            lp.le(row, 0.0);
        }
        let mut row = vec![0.0; d];
        row.push(1.0);
        row.extend(std::iter::repeat_n(1.0, np));
        lp.eq(row, 1.0);
        lp
    }

    fn recover(&self, point: &[f64]) -> Result<Csp> {
        let d = self.dims();
        let mut phi = point[..d].to_vec();
        for (p, lam) in self.points.iter().zip(&point[d + 1..]) {
            for (v, w) in phi.iter_mut().zip(p.weights()) {
                *v += lam * w;
            }
        }
        Csp::from_solver(self.base.m, self.base.n, phi)
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<Option<(f64, Csp)>> {
        let sol = self.hull_lp(objective).solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(Some((sol.objective_value, self.recover(&sol.point)?))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::NumericalFailure("hull LP reported unbounded".into())),
        }
    }

    pub fn is_nonempty(&self) -> Result<bool> {
        Ok(!self.points.is_empty() || self.base.is_nonempty()?)
    }

    /// Membership by LP: is `phi` a convex combination of a base point and the extra points?
    pub fn contains(&self, phi: &Csp, tol: f64) -> Result<bool> {
        if self.base.contains(phi, tol) {
            return Ok(true);
        }
        let d = self.dims();
        let np = self.points.len();
        if np == 0 {
            return Ok(false);
        }
        // Minimize the L1 residual `|phi - psi - sum lambda_p p|` with split slacks.
        let nv = d + 1 + np + 2 * d;
        let mut obj = vec![0.0; nv];
        for v in obj.iter_mut().skip(d + 1 + np) {
            *v = -1.0;
        }
        let mut lp = LinearProgram::maximize(obj);
        let base = self.hull_lp(&vec![0.0; d]);
        for c in base.constraints() {
            let mut row = c.coeffs.clone();
            row.extend(std::iter::repeat_n(0.0, 2 * d));
            lp.add(row, c.relation, c.rhs);
        }
        for q in 0..d {
            let mut row = vec![0.0; nv];
            row[q] = 1.0;
            for (p, pt) in self.points.iter().enumerate() {
                row[d + 1 + p] = pt.weights()[q];
            }
            row[d + 1 + np + q] = 1.0;
            row[d + 1 + np + d + q] = -1.0;
            lp.eq(row, phi.weights()[q]);
        }
        let sol = lp.solve()?;
        Ok(sol.is_optimal() && -sol.objective_value <= tol)
    }

    /// Optimizer's choice: maximize `u_O`, then `u_L` among outcomes within
    /// `eps` of the optimum. `None` if the menu is empty.
    pub fn select(&self, u_o: &Matrix, u_l: &Matrix, eps: f64) -> Result<Option<Selection>> {
        let Some((top, _)) = self.maximize(u_o.as_slice())? else {
            return Ok(None);
        };
        let mut lp = self.hull_lp(u_l.as_slice());
        let d = self.dims();
        let mut row = u_o.as_slice().to_vec();
        row.push(0.0);
        for p in &self.points {
            row.push(dot(u_o.as_slice(), p.weights()));
        }
        let floor = top - eps - 1e-10 * (1.0 + top.abs());
        lp.ge(row, floor);
        let sol = lp.solve()?;
        let csp = match sol.status {
            LpStatus::Optimal => self.recover(&sol.point)?,
            _ => {
                // The pinned face is numerically empty; fall back to the first solve.
                self.maximize(u_o.as_slice())?.expect("nonempty").1
            }
        };
        debug_assert_eq!(csp.weights().len(), d);
        Ok(Some(Selection {
            optimizer_value: dot(u_o.as_slice(), csp.weights()),
            learner_value: dot(u_l.as_slice(), csp.weights()),
            csp,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, random_game, random_simplex};
    use crate::game::OptimizerType;
    use crate::stackelberg::optimizer_stackelberg;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_point() -> Csp {
        Csp::point_mass(3, 2, 2, 0)
            .mix(&Csp::point_mass(3, 2, 0, 1), 0.5)
            .unwrap()
    }

    #[test]
    fn table_point_is_no_regret_but_not_no_swap_regret() {
        let g = g1();
        assert!(no_regret_check(&table_point(), &g, 1e-12));
        assert!(!no_swap_regret_check(&table_point(), &g, 1e-12));
        // Swapping C to B gains 0.05 in total.
        let worst = menu_violation(&table_point(), &no_swap_regret_menu(&g));
        assert!((worst - 0.05).abs() < 1e-12);
        assert!(!no_regret_check(&Csp::point_mass(3, 2, 0, 0), &g, 1e-12));
        assert!((menu_violation(&Csp::point_mass(3, 2, 0, 0), &no_regret_menu(&g)) - 7.1).abs() < 1e-12);
    }

    #[test]
    fn menu_sizes() {
        let g = g1();
        assert_eq!(no_regret_menu(&g).len(), 3);
        assert_eq!(no_swap_regret_menu(&g).len(), 6);
    }

    #[test]
    fn stackelberg_point_has_no_swap_regret() {
        let g = g1();
        let st = optimizer_stackelberg(&g, 0).unwrap();
        assert!(no_swap_regret_check(&st.csp, &g, 1e-9));
        assert!(no_regret_check(&st.csp, &g, 1e-9));
    }

    #[test]
    fn constant_learner_payoff_is_swap_indifferent() {
        let l = Matrix::filled(3, 3, 0.4).unwrap();
        let g = BimatrixGame::single(l, Matrix::filled(3, 3, 1.0).unwrap()).unwrap();
        assert!(no_swap_regret_check(&Csp::uniform(3, 3), &g, 0.0));
    }

    #[test]
    fn candidate_menu_of_table_point() {
        let g = g1();
        let a = CspAssignment::new(vec![table_point()]).unwrap();
        let menu = candidate_menu(&a, 0.0, &g).unwrap();
        assert_eq!(menu.len(), 1);
        assert!((menu.constraints()[0].rhs - 2.0).abs() < 1e-12);
        let big = candidate_menu(&a, 2.0 * g.p_max(), &g).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!(big.contains(&Csp::point_mass(3, 2, i, j), 0.0));
            }
        }
    }

    #[test]
    fn argmax_assignment_covers_simplex_and_is_incentive_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_game(&mut rng, 3, 2, 2);
        let profiles = (0..2)
            .map(|s| {
                let u = g.optimizer(s).as_slice();
                let best = (0..6).max_by(|&a, &b| u[a].total_cmp(&u[b])).unwrap();
                Csp::point_mass(3, 2, best / 2, best % 2)
            })
            .collect();
        let a = CspAssignment::new(profiles).unwrap();
        assert!(incentive_check(&a, &g, 0.0));
        let menu = candidate_menu(&a, 0.0, &g).unwrap();
        for _ in 0..50 {
            let phi = Csp::new(3, 2, random_simplex(&mut rng, 6)).unwrap();
            assert!(menu.contains(&phi, 1e-12));
        }
    }

    #[test]
    fn swapped_argmax_breaks_incentives() {
        let l = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let u1 = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.5, -0.3]]).unwrap();
        let u2 = Matrix::from_rows(&[vec![0.9, -0.4], vec![0.1, 0.6]]).unwrap();
        let g = BimatrixGame::new(
            l,
            vec![
                OptimizerType { payoff: u1, alpha: 0.5 },
                OptimizerType { payoff: u2, alpha: 0.5 },
            ],
        )
        .unwrap();
        let a = CspAssignment::new(vec![Csp::point_mass(2, 2, 0, 0), Csp::point_mass(2, 2, 0, 1)]).unwrap();
        assert!(!incentive_check(&a, &g, 1e-9));
        let single = CspAssignment::new(vec![Csp::point_mass(2, 2, 1, 1)]).unwrap();
        let g1 = BimatrixGame::single(Matrix::filled(2, 2, 0.0).unwrap(), Matrix::filled(2, 2, 1.0).unwrap()).unwrap();
        assert!(incentive_check(&single, &g1, 0.0));
    }

    #[test]
    fn response_satisfiability_examples() {
        let g = g1();
        let full = HalfspaceMenu::full(3, 2);
        assert!(response_satisfiable_at(&full, &[0.3, 0.7]).unwrap().is_some());
        let nsr = no_swap_regret_menu(&g);
        let x = response_satisfiable_at(&nsr, &[0.0, 1.0]).unwrap().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        let empty = candidate_menu_from_thresholds(&g, &[g.optimizer(0).min_entry() - 1.0], 0.0);
        assert!(response_satisfiable_at(&empty, &[0.5, 0.5]).unwrap().is_none());
        assert!(!empty.is_nonempty().unwrap());
    }

    #[test]
    fn nsr_menu_is_response_satisfiable_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g = random_game(&mut rng, 3, 2, 1);
            let menu = no_swap_regret_menu(&g);
            for s in 0..=20 {
                let p = s as f64 / 20.0;
                assert!(response_satisfiable_at(&menu, &[p, 1.0 - p]).unwrap().is_some());
            }
        }
    }

    #[test]
    fn hull_selection_on_g1() {
        let g = g1();
        let nsr: HullMenu = no_swap_regret_menu(&g).into();
        let sel = nsr.select(g.optimizer(0), g.learner(), 0.0).unwrap().unwrap();
        assert!((sel.optimizer_value - 1.0).abs() < 1e-7, "{sel:?}");
        assert!((sel.learner_value - 3.0).abs() < 1e-7);

        let hull = HullMenu::new(no_swap_regret_menu(&g), vec![table_point()]).unwrap();
        let sel = hull.select(g.optimizer(0), g.learner(), 0.0).unwrap().unwrap();
        assert!((sel.optimizer_value - 2.0).abs() < 1e-7);
        assert!((sel.learner_value - 5.0).abs() < 1e-7);
        assert!(hull.contains(&table_point(), 1e-9).unwrap());
        assert!(!hull.contains(&Csp::point_mass(3, 2, 2, 0), 1e-9).unwrap());
    }

    #[test]
    fn constant_optimizer_payoff_lets_learner_pick() {
        let g = g1();
        let flat = Matrix::filled(3, 2, 0.0).unwrap();
        let sel = HullMenu::from(HalfspaceMenu::full(3, 2))
            .select(&flat, g.learner(), 0.0)
            .unwrap()
            .unwrap();
        assert!((sel.learner_value - 7.1).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let menu = no_regret_menu(&g1());
        let back = HalfspaceMenu::from_json(&menu.to_json(), 3, 2).unwrap();
        assert_eq!(back, menu);
        assert!(HalfspaceMenu::from_json(r#"{"constraints":[{"normal":[1],"rhs":0}]}"#, 3, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn swap_regret_implies_external_regret(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_game(&mut rng, 3, 3, 1);
            for _ in 0..20 {
                let phi = Csp::new(3, 3, random_simplex(&mut rng, 9)).unwrap();
                if no_swap_regret_check(&phi, &g, 0.0) {
                    prop_assert!(no_regret_check(&phi, &g, 1e-12));
                }
                // Each external-regret row is the sum of swap rows with the same deviation.
                let nr = menu_violation(&phi, &no_regret_menu(&g));
                let nsr = menu_violation(&phi, &no_swap_regret_menu(&g));
                prop_assert!(nr <= 3.0 * nsr + 1e-12);
            }
        }

        #[test]
        fn relaxing_a_menu_keeps_responses(seed in any::<u64>(), slack in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_game(&mut rng, 2, 3, 2);
            let a = CspAssignment::new(vec![
                Csp::new(2, 3, random_simplex(&mut rng, 6)).unwrap(),
                Csp::new(2, 3, random_simplex(&mut rng, 6)).unwrap(),
            ]).unwrap();
            let tight = candidate_menu(&a, 0.0, &g).unwrap();
            let loose = tight.relaxed(slack);
            for _ in 0..10 {
                let y = random_simplex(&mut rng, 3);
                if response_satisfiable_at(&tight, &y).unwrap().is_some() {
                    prop_assert!(response_satisfiable_at(&loose, &y).unwrap().is_some());
                }
                let phi = Csp::new(2, 3, random_simplex(&mut rng, 6)).unwrap();
                prop_assert!(menu_violation(&phi, &loose) <= menu_violation(&phi, &tight));
            }
        }

        #[test]
        fn menu_violation_matches_direct_max(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cons: Vec<Halfspace> = (0..4).map(|_| Halfspace {
                normal: (0..4).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect(),
                rhs: rand::Rng::gen_range(&mut rng, -0.5..0.5),
            }).collect();
            let menu = HalfspaceMenu::new(2, 2, cons.clone()).unwrap();
            let phi = Csp::new(2, 2, random_simplex(&mut rng, 4)).unwrap();
            let mut direct: f64 = 0.0;
            for h in &cons {
                let lhs: f64 = h.normal.iter().zip(phi.weights()).map(|(a, b)| a * b).sum();
                direct = direct.max(lhs - h.rhs);
            }
            prop_assert!((menu_violation(&phi, &menu) - direct).abs() < 1e-15);
        }
    }
}
