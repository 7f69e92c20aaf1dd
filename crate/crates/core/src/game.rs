//! Game model shared by every solver: payoff matrices, correlated strategy
//! profiles (CSPs), per-type CSP assignments and transcripts of play.
//!
//! A CSP over an `m x n` game is stored as a length `m*n` vector in
//! row-major order: the weight of the pair (learner action `i`, optimizer
//! action `j`) lives at index `i * n + j`. Every module relies on this
//! linearization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(weights) == 1` for simplex points.
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// Allowed negative slack on individual simplex weights.
pub const NONNEG_SLACK: f64 = 1e-12;
/// Tolerance on the prior summing to one.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Row-major entries; doubles as the CSP-space normal of `phi -> payoff(phi)`.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x^T M y` for mixed strategies `x` (rows) and `y` (columns).
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        let mut total = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = self.row(i);
            total += xi * row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        }
        total
    }

    /// `M y`, the payoff of each row against column mix `y`.
    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T M`, the payoff of each column against row mix `x`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.data.chunks(m.cols).map(<[f64]>::to_vec).collect()
    }
}

/// One optimizer type: its payoff matrix and prior probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerType {
    #[serde(rename = "u_O")]
    pub payoff: Matrix,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameDoc {
    m: usize,
    n: usize,
    #[serde(rename = "u_L")]
    learner: Matrix,
    types: Vec<OptimizerType>,
}

/// A learner payoff matrix plus `k` optimizer types with prior weights.
///
/// Learner actions index rows (`m`), optimizer actions index columns (`n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDoc", into = "GameDoc")]
pub struct BimatrixGame {
    learner: Matrix,
    types: Vec<OptimizerType>,
}

impl BimatrixGame {
    pub fn new(learner: Matrix, types: Vec<OptimizerType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("a game needs at least one optimizer type"));
        }
        for (s, t) in types.iter().enumerate() {
            if t.payoff.rows() != learner.rows() || t.payoff.cols() != learner.cols() {
                return Err(Error::invalid(format!(
                    "type {s} payoff is {}x{}, learner payoff is {}x{}",
                    t.payoff.rows(),
                    t.payoff.cols(),
                    learner.rows(),
                    learner.cols()
                )));
            }
            if !t.alpha.is_finite() || t.alpha < 0.0 {
                return Err(Error::invalid(format!("type {s} has invalid prior weight {}", t.alpha)));
            }
        }
        let total: f64 = types.iter().map(|t| t.alpha).sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::invalid(format!("prior weights sum to {total}, expected 1")));
        }
        Ok(Self { learner, types })
    }

    /// Single optimizer type with prior weight one.
    pub fn single(learner: Matrix, optimizer: Matrix) -> Result<Self> {
        Self::new(
            learner,
            vec![OptimizerType {
                payoff: optimizer,
                alpha: 1.0,
            }],
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("game JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("game serializes")
    }

    pub fn m(&self) -> usize {
        self.learner.rows()
    }

    pub fn n(&self) -> usize {
        self.learner.cols()
    }

    pub fn k(&self) -> usize {
        self.types.len()
    }

    /// Number of pure action pairs, the CSP dimension.
    pub fn pairs(&self) -> usize {
        self.m() * self.n()
    }

    pub fn learner(&self) -> &Matrix {
        &self.learner
    }

    pub fn optimizer(&self, s: usize) -> &Matrix {
        &self.types[s].payoff
    }

    pub fn alpha(&self, s: usize) -> f64 {
        self.types[s].alpha
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.types.iter().map(|t| t.alpha).collect()
    }

    pub fn types(&self) -> &[OptimizerType] {
        &self.types
    }

    /// Largest absolute payoff over the learner and every optimizer type.
    /// Regret and net-spacing constants scale with it.
    pub fn p_max(&self) -> f64 {
        self.types
            .iter()
            .map(|t| t.payoff.max_abs())
            .fold(self.learner.max_abs(), f64::max)
    }

    /// `p_max` floored at a tiny positive value so it can divide.
    pub(crate) fn payoff_scale(&self) -> f64 {
        self.p_max().max(1e-12)
    }
}

impl TryFrom<GameDoc> for BimatrixGame {
    type Error = Error;

    fn try_from(doc: GameDoc) -> Result<Self> {
        if doc.learner.rows() != doc.m || doc.learner.cols() != doc.n {
            return Err(Error::invalid(format!(
                "u_L is {}x{} but m={}, n={}",
                doc.learner.rows(),
                doc.learner.cols(),
                doc.m,
                doc.n
            )));
        }
        BimatrixGame::new(doc.learner, doc.types)
    }
}

impl From<BimatrixGame> for GameDoc {
    fn from(g: BimatrixGame) -> Self {
        GameDoc {
            m: g.m(),
            n: g.n(),
            learner: g.learner,
            types: g.types,
        }
    }
}

pub(crate) fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    if v.iter().any(|w| !w.is_finite() || *w < -NONNEG_SLACK) {
        return Err(Error::invalid(format!("{what} has a negative or non-finite weight")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
        return Err(Error::invalid(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Correlated strategy profile: a distribution over the `m*n` pure action pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Csp {
    m: usize,
    n: usize,
    weights: Vec<f64>,
}

impl Csp {
    pub fn new(m: usize, n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != m * n {
            return Err(Error::invalid(format!(
                "CSP has {} weights, expected {}",
                weights.len(),
                m * n
            )));
        }
        check_simplex(&weights, "CSP")?;
        Ok(Self { m, n, weights })
    }

    /// Builds a CSP from solver output, clipping round-off negatives and
    /// renormalizing. Fails if the vector is far from the simplex.
    pub fn from_solver(m: usize, n: usize, mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w > -1e-7 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && (sum - 1.0).abs() < 1e-6 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self::new(m, n, weights)
    }

    pub fn point_mass(m: usize, n: usize, i: usize, j: usize) -> Self {
        let mut weights = vec![0.0; m * n];
        weights[i * n + j] = 1.0;
        Self { m, n, weights }
    }

    pub fn uniform(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            weights: vec![1.0 / (m * n) as f64; m * n],
        }
    }

    /// The product profile `x (x) y`.
    pub fn product(x: &[f64], y: &[f64]) -> Result<Self> {
        check_simplex(x, "learner mix")?;
        check_simplex(y, "optimizer mix")?;
        Ok(Self::product_unchecked(x, y))
    }

    pub(crate) fn product_unchecked(x: &[f64], y: &[f64]) -> Self {
        let mut weights = Vec::with_capacity(x.len() * y.len());
        for &xi in x {
            weights.extend(y.iter().map(|&yj| xi * yj));
        }
        Self {
            m: x.len(),
            n: y.len(),
            weights,
        }
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Csp, lambda: f64) -> Result<Csp> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::invalid("CSP shapes differ"));
        }
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Csp::new(self.m, self.n, weights)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Marginal distribution of the learner's action.
    pub fn learner_marginal(&self) -> Vec<f64> {
        self.weights.chunks(self.n).map(|row| row.iter().sum()).collect()
    }

    /// Marginal distribution of the optimizer's action.
    pub fn optimizer_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.weights.chunks(self.n) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w;
            }
        }
        out
    }

    pub fn l1_distance(&self, other: &Csp) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Average payoff `sum_ij phi_ij * payoff(i, j)`.
pub fn bilinear_value(payoff: &Matrix, phi: &Csp) -> Result<f64> {
    if payoff.rows() != phi.m() || payoff.cols() != phi.n() {
        return Err(Error::invalid(format!(
            "payoff is {}x{} but CSP is over {}x{}",
            payoff.rows(),
            payoff.cols(),
            phi.m(),
            phi.n()
        )));
    }
    Ok(dot(payoff.as_slice(), phi.weights()))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One CSP per optimizer type, in type order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspAssignment {
    profiles: Vec<Csp>,
}

impl CspAssignment {
    pub fn new(profiles: Vec<Csp>) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or_else(|| Error::invalid("assignment needs at least one profile"))?;
        let (m, n) = (first.m(), first.n());
        if profiles.iter().any(|p| p.m() != m || p.n() != n) {
            return Err(Error::invalid("assignment profiles have different shapes"));
        }
        Ok(Self { profiles })
    }

    /// Parses `{"profiles": [[w..], ...]}` against the game's shape.
    pub fn from_json(text: &str, game: &BimatrixGame) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            profiles: Vec<Vec<f64>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| Error::invalid(format!("assignment JSON: {e}")))?;
        let profiles = doc
            .profiles
            .into_iter()
            .map(|w| Csp::new(game.m(), game.n(), w))
            .collect::<Result<Vec<_>>>()?;
        let assign = Self::new(profiles)?;
        assign.check_against(game)?;
        Ok(assign)
    }

    pub fn k(&self) -> usize {
        self.profiles.len()
    }

    pub fn profiles(&self) -> &[Csp] {
        &self.profiles
    }

    pub fn profile(&self, s: usize) -> &Csp {
        &self.profiles[s]
    }

    pub(crate) fn check_against(&self, game: &BimatrixGame) -> Result<()> {
        if self.k() != game.k() {
            return Err(Error::invalid(format!(
                "assignment has {} profiles, game has {} types",
                self.k(),
                game.k()
            )));
        }
        let p = &self.profiles[0];
        if p.m() != game.m() || p.n() != game.n() {
            return Err(Error::invalid("assignment shape does not match the game"));
        }
        Ok(())
    }

    /// Per-type thresholds `c_s = u_{O,s}(phi_s)`.
    pub fn thresholds(&self, game: &BimatrixGame) -> Vec<f64> {
        self.profiles
            .iter()
            .enumerate()
            .map(|(s, p)| dot(game.optimizer(s).as_slice(), p.weights()))
            .collect()
    }

    /// Flattened `k*m*n` coordinate vector.
    pub fn to_flat(&self) -> Vec<f64> {
        self.profiles.iter().flat_map(|p| p.weights().iter().copied()).collect()
    }
}

/// `sum_s alpha_s * u_L(phi_s)`.
pub fn assignment_value(game: &BimatrixGame, assign: &CspAssignment) -> Result<f64> {
    assign.check_against(game)?;
    Ok(assign
        .profiles()
        .iter()
        .enumerate()
        .map(|(s, p)| game.alpha(s) * dot(game.learner().as_slice(), p.weights()))
        .sum())
}

/// Time-indexed record of mixed actions with the running average CSP.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    m: usize,
    n: usize,
    rounds: Vec<(Vec<f64>, Vec<f64>)>,
    #[serde(skip)]
    sum: Vec<f64>,
}

impl Transcript {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            rounds: Vec::new(),
            sum: vec![0.0; m * n],
        }
    }

    pub fn push(&mut self, x: Vec<f64>, y: Vec<f64>) -> Result<()> {
        if x.len() != self.m || y.len() != self.n {
            return Err(Error::invalid("round action has the wrong dimension"));
        }
        check_simplex(&x, "learner action")?;
        check_simplex(&y, "optimizer action")?;
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                self.sum[i * self.n + j] += xi * yj;
            }
        }
        self.rounds.push((x, y));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.rounds
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Running time-averaged CSP maintained incrementally.
    pub fn running_csp(&self) -> Result<Csp> {
        if self.rounds.is_empty() {
            return Err(Error::invalid("empty transcript"));
        }
        let t = self.rounds.len() as f64;
        Csp::from_solver(self.m, self.n, self.sum.iter().map(|s| s / t).collect())
    }

    /// Sub-transcript of rounds `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Transcript {
        let mut out = Transcript::new(self.m, self.n);
        for (x, y) in &self.rounds[range] {
            out.push(x.clone(), y.clone()).expect("rounds were validated on push");
        }
        out
    }
}

/// `(1/T) sum_t x_t (x) y_t`, recomputed directly from the rounds.
pub fn csp_of_transcript(t: &Transcript) -> Result<Csp> {
    if t.is_empty() {
        return Err(Error::invalid("empty transcript"));
    }
    let mut acc = vec![0.0; t.m() * t.n()];
    for (x, y) in t.rounds() {
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                acc[i * t.n() + j] += xi * yj;
            }
        }
    }
    let count = t.len() as f64;
    Csp::from_solver(t.m(), t.n(), acc.into_iter().map(|v| v / count).collect())
}
