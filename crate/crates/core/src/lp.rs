//! Dense two-phase simplex and zero-sum game values.
//!
//! Problems here are desk-sized (a few hundred variables at most), so the
//! solver keeps a dense tableau and pivots with Bland's rule: the entering
//! column is the lowest-index improving column and ratio-test ties go to
//! the lowest-index basic variable. Output is therefore deterministic.
//!
//! Once the tableau identifies an optimal basis, primal values and duals are
//! recomputed from the original data by a partial-pivoting solve against
//! the basis matrix, which removes most of the drift a long pivot sequence
//! accumulates.

use crate::error::{Error, Result};
use crate::game::Matrix;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective . x` subject to linear rows and per-variable bounds.
///
/// Variables default to `x >= 0`; use [`LinearProgram::set_bounds`] or
/// [`LinearProgram::free`] to change that.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (empty unless `Optimal`).
    pub point: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per constraint row: `>= 0` for `<=` rows, `<= 0` for
    /// `>=` rows, free for equalities.
    pub duals: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Optimality evidence for an `Optimal` solution.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    /// Largest violation of a row or bound by the primal point.
    pub primal_violation: f64,
    /// Largest sign violation of a dual multiplier or reduced cost.
    pub dual_violation: f64,
    /// `|dual objective - primal objective|`.
    pub gap: f64,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let d = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            lower: vec![Some(0.0); d],
            upper: vec![None; d],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Le, rhs)
    }

    pub fn ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Eq, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    fn validate(&self) -> Result<()> {
        let d = self.objective.len();
        if d == 0 {
            return Err(Error::invalid("linear program has no variables"));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite objective coefficient"));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != d {
                return Err(Error::invalid(format!(
                    "constraint {r} has {} coefficients, expected {d}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("constraint {r} has a non-finite entry")));
            }
        }
        for j in 0..d {
            if let Some(l) = self.lower[j] {
                if !l.is_finite() {
                    return Err(Error::invalid(format!("variable {j} has a non-finite lower bound")));
                }
            }
            if let Some(u) = self.upper[j] {
                if !u.is_finite() {
                    return Err(Error::invalid(format!("variable {j} has a non-finite upper bound")));
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.validate()?;
        let d = self.num_vars();
        for j in 0..d {
            if let (Some(l), Some(u)) = (self.lower[j], self.upper[j]) {
                if l > u {
                    return Ok(infeasible(self.constraints.len()));
                }
            }
        }
        let sf = StandardForm::build(self);
        let outcome = sf.solve()?;
        let (xs, w) = match outcome {
            Outcome::Infeasible => return Ok(infeasible(self.constraints.len())),
            Outcome::Unbounded => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    point: Vec::new(),
                    objective_value: f64::INFINITY,
                    duals: vec![0.0; self.constraints.len()],
                })
            }
            Outcome::Optimal { x, duals } => (x, duals),
        };
        let point = sf.recover_point(&xs);
        let duals: Vec<f64> = (0..self.constraints.len()).map(|i| sf.row_sign[i] * w[i]).collect();
        let objective_value = self.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        let sol = LpSolution {
            status: LpStatus::Optimal,
            point,
            objective_value,
            duals,
        };
        let cert = self.certify(&sol);
        let scale = self.scale(&sol);
        if cert.primal_violation > 1e-7 * scale || cert.gap > 1e-6 * scale || cert.dual_violation > 1e-6 * scale {
            return Err(Error::NumericalFailure(format!(
                "simplex result failed certification: primal {:.3e}, dual {:.3e}, gap {:.3e}",
                cert.primal_violation, cert.dual_violation, cert.gap
            )));
        }
        Ok(sol)
    }

    fn scale(&self, sol: &LpSolution) -> f64 {
        let mut s: f64 = 1.0;
        for c in &self.constraints {
            s = s.max(c.rhs.abs());
            for v in &c.coeffs {
                s = s.max(v.abs());
            }
        }
        for c in &self.objective {
            s = s.max(c.abs());
        }
        for x in &sol.point {
            s = s.max(x.abs());
        }
        s
    }

    /// Recomputes feasibility, dual sign conditions and the duality gap of
    /// an optimal solution directly from the problem data.
    pub fn certify(&self, sol: &LpSolution) -> Certificate {
        let d = self.num_vars();
        let x = &sol.point;
        let mut primal_violation: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            primal_violation = primal_violation.max(v);
        }
        for j in 0..d {
            if let Some(l) = self.lower[j] {
                primal_violation = primal_violation.max(l - x[j]);
            }
            if let Some(u) = self.upper[j] {
                primal_violation = primal_violation.max(x[j] - u);
            }
        }

        let mut dual_violation: f64 = 0.0;
        let mut dual_obj = 0.0;
        let mut reduced = self.objective.clone();
        for (c, &y) in self.constraints.iter().zip(&sol.duals) {
            let wrong = match c.relation {
                Relation::Le => (-y).max(0.0),
                Relation::Ge => y.max(0.0),
                Relation::Eq => 0.0,
            };
            dual_violation = dual_violation.max(wrong);
            dual_obj += y * c.rhs;
            for (r, a) in reduced.iter_mut().zip(&c.coeffs) {
                *r -= y * a;
            }
        }
        for j in 0..d {
            let r = reduced[j];
            if r > 0.0 {
                match self.upper[j] {
                    Some(u) => dual_obj += r * u,
                    None => dual_violation = dual_violation.max(r),
                }
            } else if r < 0.0 {
                match self.lower[j] {
                    Some(l) => dual_obj += r * l,
                    None => dual_violation = dual_violation.max(-r),
                }
            }
        }
        Certificate {
            primal_violation: primal_violation.max(0.0),
            dual_violation,
            gap: (dual_obj - sol.objective_value).abs(),
        }
    }
}

fn infeasible(rows: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        point: Vec::new(),
        objective_value: f64::NEG_INFINITY,
        duals: vec![0.0; rows],
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = shift + col`
    Shifted { col: usize, shift: f64 },
    /// `x = shift - col`
    Mirrored { col: usize, shift: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

enum Outcome {
    Optimal { x: Vec<f64>, duals: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// `max c.x  s.t.  A x (rel) b,  x >= 0` with `b >= 0` after row flips.
struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    rel: Vec<Relation>,
    c: Vec<f64>,
    vars: Vec<VarMap>,
    /// `+1` or `-1` per original row (the first `rows_orig` rows).
    row_sign: Vec<f64>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let d = lp.num_vars();
        let mut vars = Vec::with_capacity(d);
        let mut ncols = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..d {
            match (lp.lower[j], lp.upper[j]) {
                (Some(l), u) => {
                    vars.push(VarMap::Shifted { col: ncols, shift: l });
                    if let Some(u) = u {
                        bound_rows.push((ncols, u - l));
                    }
                    ncols += 1;
                }
                (None, Some(u)) => {
                    vars.push(VarMap::Mirrored { col: ncols, shift: u });
                    ncols += 1;
                }
                (None, None) => {
                    vars.push(VarMap::Split {
                        pos: ncols,
                        neg: ncols + 1,
                    });
                    ncols += 2;
                }
            }
        }

        let mut c = vec![0.0; ncols];
        for (j, map) in vars.iter().enumerate() {
            let cj = lp.objective[j];
            match *map {
                VarMap::Shifted { col, .. } => c[col] += cj,
                VarMap::Mirrored { col, .. } => c[col] -= cj,
                VarMap::Split { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
            }
        }

        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut rel = Vec::new();
        let mut row_sign = Vec::new();
        for con in &lp.constraints {
            let mut row = vec![0.0; ncols];
            let mut rhs = con.rhs;
            for (j, map) in vars.iter().enumerate() {
                let v = con.coeffs[j];
                if v == 0.0 {
                    continue;
                }
                match *map {
                    VarMap::Shifted { col, shift } => {
                        row[col] += v;
                        rhs -= v * shift;
                    }
                    VarMap::Mirrored { col, shift } => {
                        row[col] -= v;
                        rhs -= v * shift;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] += v;
                        row[neg] -= v;
                    }
                }
            }
            let mut r = con.relation;
            let mut sign = 1.0;
            if rhs < 0.0 {
                sign = -1.0;
                rhs = -rhs;
                row.iter_mut().for_each(|v| *v = -*v);
                r = match r {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            a.push(row);
            b.push(rhs);
            rel.push(r);
            row_sign.push(sign);
        }
        for (col, width) in bound_rows {
            let mut row = vec![0.0; ncols];
            row[col] = 1.0;
            a.push(row);
            b.push(width.max(0.0));
            rel.push(Relation::Le);
        }
        Self {
            a,
            b,
            rel,
            c,
            vars,
            row_sign,
        }
    }

    fn recover_point(&self, xs: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|map| match *map {
                VarMap::Shifted { col, shift } => shift + xs[col],
                VarMap::Mirrored { col, shift } => shift - xs[col],
                VarMap::Split { pos, neg } => xs[pos] - xs[neg],
            })
            .collect()
    }

    fn solve(&self) -> Result<Outcome> {
        let rows = self.a.len();
        let nstruct = self.c.len();
        if rows == 0 {
            // Only sign constraints: bounded iff no positive objective coefficient.
            if self.c.iter().any(|&c| c > COST_TOL) {
                return Ok(Outcome::Unbounded);
            }
            return Ok(Outcome::Optimal {
                x: vec![0.0; nstruct],
                duals: Vec::new(),
            });
        }
        Tableau::new(self).run()
    }
}

struct Tableau<'a> {
    sf: &'a StandardForm,
    /// `rows x (ncols + 1)`; the last entry of each row is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    nstruct: usize,
    /// Identity column of each row (slack or artificial).
    id_col: Vec<usize>,
    artificial_start: usize,
    /// Standard-form column data for slacks/surplus/artificials.
    extra_cols: Vec<(usize, f64)>,
    active: Vec<bool>,
    max_pivots: usize,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let rows = sf.a.len();
        let nstruct = sf.c.len();
        // Slack / surplus columns first, then artificials.
        let mut extra_cols = Vec::new();
        let mut id_col = vec![usize::MAX; rows];
        let mut col = nstruct;
        for (r, rel) in sf.rel.iter().enumerate() {
            match rel {
                Relation::Le => {
                    extra_cols.push((r, 1.0));
                    id_col[r] = col;
                    col += 1;
                }
                Relation::Ge => {
                    extra_cols.push((r, -1.0));
                    col += 1;
                }
                Relation::Eq => {}
            }
        }
        let artificial_start = col;
        for (r, rel) in sf.rel.iter().enumerate() {
            if *rel != Relation::Le {
                extra_cols.push((r, 1.0));
                id_col[r] = col;
                col += 1;
            }
        }
        let ncols = col;
        let mut t = vec![vec![0.0; ncols + 1]; rows];
        for r in 0..rows {
            t[r][..nstruct].copy_from_slice(&sf.a[r]);
            t[r][ncols] = sf.b[r];
        }
        for (k, &(r, v)) in extra_cols.iter().enumerate() {
            t[r][nstruct + k] = v;
        }
        let basis = id_col.clone();
        let max_pivots = 20_000 + 50 * (rows + ncols);
        Self {
            sf,
            t,
            basis,
            ncols,
            nstruct,
            id_col,
            artificial_start,
            extra_cols,
            active: vec![true; rows],
            max_pivots,
        }
    }

    fn column_cost(&self, j: usize, phase_one: bool) -> f64 {
        if phase_one {
            if j >= self.artificial_start {
                -1.0
            } else {
                0.0
            }
        } else if j < self.nstruct {
            self.sf.c[j]
        } else {
            0.0
        }
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current tableau.
    fn reduced_costs(&self, phase_one: bool) -> Vec<f64> {
        let mut d: Vec<f64> = (0..self.ncols).map(|j| self.column_cost(j, phase_one)).collect();
        for (r, row) in self.t.iter().enumerate() {
            if !self.active[r] {
                continue;
            }
            let cb = self.column_cost(self.basis[r], phase_one);
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row.iter()) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let ncols = self.ncols;
        let p = self.t[pr][pc];
        for v in self.t[pr].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[pr].clone();
        for (r, row) in self.t.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        self.t[pr][pc] = 1.0;
        if self.t[pr][ncols] < 0.0 && self.t[pr][ncols] > -1e-12 {
            self.t[pr][ncols] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland-rule simplex on the given phase. Returns `false` when unbounded.
    fn optimize(&mut self, phase_one: bool, pivots: &mut usize) -> Result<bool> {
        let limit = if phase_one { self.ncols } else { self.artificial_start };
        loop {
            if *pivots > self.max_pivots {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} pivots",
                    self.max_pivots
                )));
            }
            let d = self.reduced_costs(phase_one);
            let entering = (0..limit).find(|&j| d[j] > COST_TOL && !self.basis.contains(&j));
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (r, row) in self.t.iter().enumerate() {
                if !self.active[r] {
                    continue;
                }
                let a = row[pc];
                if a > PIVOT_TOL {
                    let ratio = row[self.ncols].max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                            if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = best else {
                return Ok(false);
            };
            self.pivot(pr, pc);
            *pivots += 1;
        }
    }

    fn run(mut self) -> Result<Outcome> {
        let rows = self.t.len();
        let mut pivots = 0;
        let has_artificial = self.artificial_start < self.ncols;
        if has_artificial {
            self.optimize(true, &mut pivots)?;
            let infeas: f64 = (0..rows)
                .filter(|&r| self.basis[r] >= self.artificial_start)
                .map(|r| self.t[r][self.ncols])
                .sum();
            let bscale = 1.0 + self.sf.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > 1e-9 * bscale {
                return Ok(Outcome::Infeasible);
            }
            // Drive zero-level artificials out of the basis or retire redundant rows.
            for r in 0..rows {
                if self.basis[r] < self.artificial_start {
                    continue;
                }
                let pc =
                    (0..self.artificial_start).find(|&j| self.t[r][j].abs() > PIVOT_TOL && !self.basis.contains(&j));
                match pc {
                    Some(pc) => {
                        self.pivot(r, pc);
                        pivots += 1;
                    }
                    None => self.active[r] = false,
                }
            }
        }
        if !self.optimize(false, &mut pivots)? {
            return Ok(Outcome::Unbounded);
        }
        Ok(self.polish())
    }

    /// Standard-form column `j` restricted to active rows.
    fn original_column(&self, j: usize, rows: &[usize]) -> Vec<f64> {
        if j < self.nstruct {
            rows.iter().map(|&r| self.sf.a[r][j]).collect()
        } else {
            let (row, v) = self.extra_cols[j - self.nstruct];
            rows.iter().map(|&r| if r == row { v } else { 0.0 }).collect()
        }
    }

    fn polish(&self) -> Outcome {
        let rows: Vec<usize> = (0..self.t.len()).filter(|&r| self.active[r]).collect();
        let size = rows.len();
        let basis: Vec<usize> = rows.iter().map(|&r| self.basis[r]).collect();
        // B[i][k] = row rows[i] of basic column k
        let cols: Vec<Vec<f64>> = basis.iter().map(|&j| self.original_column(j, &rows)).collect();
        let mut bmat = vec![vec![0.0; size]; size];
        for (k, col) in cols.iter().enumerate() {
            for i in 0..size {
                bmat[i][k] = col[i];
            }
        }
        let rhs: Vec<f64> = rows.iter().map(|&r| self.sf.b[r]).collect();
        let cb: Vec<f64> = basis
            .iter()
            .map(|&j| if j < self.nstruct { self.sf.c[j] } else { 0.0 })
            .collect();

        let tableau_x = || {
            let mut x = vec![0.0; self.nstruct];
            for &r in &rows {
                let j = self.basis[r];
                if j < self.nstruct {
                    x[j] = self.t[r][self.ncols].max(0.0);
                }
            }
            x
        };
        let tableau_duals = || {
            let d = self.reduced_costs(false);
            (0..self.t.len())
                .map(|r| if self.active[r] { -d[self.id_col[r]] } else { 0.0 })
                .collect::<Vec<f64>>()
        };

        let xb = solve_dense(&bmat, &rhs);
        let bt: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|k| bmat[k][i]).collect()).collect();
        let wb = solve_dense(&bt, &cb);
        let x = match xb {
            Some(xb) if xb.iter().all(|v| *v > -1e-9) => {
                let mut x = vec![0.0; self.nstruct];
                for (k, &j) in basis.iter().enumerate() {
                    if j < self.nstruct {
                        x[j] = xb[k].max(0.0);
                    }
                }
                x
            }
            _ => tableau_x(),
        };
        let duals = match wb {
            Some(wb) => {
                let mut w = vec![0.0; self.t.len()];
                for (i, &r) in rows.iter().enumerate() {
                    w[r] = wb[i];
                }
                w
            }
            None => tableau_duals(),
        };
        Outcome::Optimal { x, duals }
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Value and optimal strategies of the zero-sum game `M` where the row
/// player minimizes `x^T M y` and the column player maximizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumSolution {
    pub value: f64,
    /// Minimizing row strategy.
    pub x: Vec<f64>,
    /// Maximizing column strategy.
    pub y: Vec<f64>,
}

pub fn zero_sum_value(m: &Matrix) -> Result<ZeroSumSolution> {
    let (p, q) = (m.rows(), m.cols());
    // Variables: x_0..x_{p-1}, v. maximize -v.
    let mut obj = vec![0.0; p + 1];
    obj[p] = -1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.free(p);
    for j in 0..q {
        let mut row: Vec<f64> = (0..p).map(|i| m.get(i, j)).collect();
        row.push(-1.0);
        lp.le(row, 0.0);
    }
    let mut simplex = vec![1.0; p];
    simplex.push(0.0);
    lp.eq(simplex, 1.0);
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::NumericalFailure(format!(
            "zero-sum LP returned {:?}",
            sol.status
        )));
    }
    let value = sol.point[p];
    let x = normalize(sol.point[..p].to_vec());
    let tol = 1e-9 * (1.0 + m.max_abs());

    let y = normalize(sol.duals[..q].iter().map(|v| v.max(0.0)).collect());
    let guaranteed = m.mul_vec(&y).into_iter().fold(f64::INFINITY, f64::min);
    let y = if y.iter().all(|v| v.is_finite()) && guaranteed >= value - tol {
        y
    } else {
        column_strategy(m)?
    };
    Ok(ZeroSumSolution { value, x, y })
}

/// Maximin column strategy via the dual LP.
fn column_strategy(m: &Matrix) -> Result<Vec<f64>> {
    let (p, q) = (m.rows(), m.cols());
    let mut obj = vec![0.0; q + 1];
    obj[q] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.free(q);
    for i in 0..p {
        let mut row: Vec<f64> = m.row(i).iter().map(|v| -v).collect();
        row.push(1.0);
        lp.le(row, 0.0);
    }
    let mut simplex = vec![1.0; q];
    simplex.push(0.0);
    lp.eq(simplex, 1.0);
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::NumericalFailure("dual zero-sum LP failed".into()));
    }
    Ok(normalize(sol.point[..q].to_vec()))
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|w| *w = w.max(0.0));
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|w| *w /= s);
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|w| *w = 1.0 / n);
    }
    v
}
