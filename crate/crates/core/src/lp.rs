//! Small dense linear programs: two-phase primal simplex with Bland's rule.
//!
//! Problems here are tiny (a few dozen variables) and frequently degenerate,
//! so the solver favours determinism over speed: entering and leaving
//! variables are always the lowest eligible index, which also rules out
//! cycling. Redundant equality rows are detected after phase one and dropped.

use thiserror::Error;

/// Equality residual accepted on an optimal solution.
pub const EQ_TOLERANCE: f64 = 1e-9;
/// Smallest magnitude accepted as a pivot.
pub const PIVOT_TOLERANCE: f64 = 1e-11;

const COST_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// `minimize c·x  s.t.  A x = b,  lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// A minimization over `objective.len()` variables, each bounded to `[0, ∞)`.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    /// A maximization; internally the objective is negated.
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::minimize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_matrix.push(coeffs);
        self.eq_rhs.push(rhs);
        self
    }

    /// Sets `lo <= x_var <= hi`; `hi` may be infinite, `lo` must be finite.
    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_matrix(&self) -> &[Vec<f64>] {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    /// Largest `|A x - b|` over the equality rows.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.eq_matrix
            .iter()
            .zip(&self.eq_rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if let Some(i) = self.eq_matrix.iter().position(|r| r.len() != n) {
            return Err(LpError::DimensionMismatch(format!(
                "constraint {i} has {} coefficients, expected {n}",
                self.eq_matrix[i].len()
            )));
        }
        let finite = self.objective.iter().chain(self.eq_matrix.iter().flatten()).chain(&self.eq_rhs);
        if finite.clone().any(|v| !v.is_finite()) {
            return Err(LpError::DimensionMismatch("non-finite coefficient".into()));
        }
        if self.bounds.iter().any(|(lo, hi)| !lo.is_finite() || hi.is_nan()) {
            return Err(LpError::DimensionMismatch("lower bounds must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless `status` is `Optimal`.
    pub values: Vec<f64>,
    /// In the caller's sense (a maximization reports the maximum only if the
    /// caller negates back; see [`LinearProgram::maximize`]).
    pub objective_value: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        LpSolution { status, values: Vec::new(), objective_value }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Simplex tableau in standard form `A y = b, y >= 0`, `b >= 0`.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    enterable: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn n_cols(&self) -> usize {
        self.enterable.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rows[i][c] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Runs primal simplex on `cost` from the current feasible basis.
    fn optimize(&mut self, cost: &[f64]) -> Result<Step, LpError> {
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::NumericalBreakdown("iteration limit reached".into()));
            }
            self.iterations += 1;
            // Reduced costs are recomputed every step; drift-free for small tableaux.
            let d = self.reduced_costs(cost);
            let entering = (0..self.n_cols())
                .find(|&j| self.enterable[j] && !self.basis.contains(&j) && d[j] < -COST_TOLERANCE);
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            let mut tiny_positive = false;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= 0.0 {
                    continue;
                }
                if a <= PIVOT_TOLERANCE {
                    tiny_positive = true;
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None if tiny_positive => {
                    return Err(LpError::NumericalBreakdown(format!(
                        "column {c} only has pivots below {PIVOT_TOLERANCE:e}"
                    )))
                }
                None => return Ok(Step::Unbounded),
            }
        }
    }
}

/// Solves `lp`. Infeasibility and unboundedness are reported through
/// [`LpSolution::status`]; errors are reserved for malformed input and
/// numerical failure.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.n_vars();
    if lp.bounds.iter().any(|(lo, hi)| lo > hi) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }

    // Shift to y = x - lo >= 0; finite upper bounds become rows y_j + t_j = hi - lo.
    let upper: Vec<usize> = (0..n).filter(|&j| lp.bounds[j].1.is_finite()).collect();
    let n_struct = n + upper.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (coeffs, &b) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        let mut row = coeffs.clone();
        row.resize(n_struct, 0.0);
        let shift: f64 = coeffs.iter().zip(&lp.bounds).map(|(a, (lo, _))| a * lo).sum();
        rows.push(row);
        rhs.push(b - shift);
    }
    for (k, &j) in upper.iter().enumerate() {
        let mut row = vec![0.0; n_struct];
        row[j] = 1.0;
        row[n + k] = 1.0;
        rows.push(row);
        rhs.push(lp.bounds[j].1 - lp.bounds[j].0);
    }
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if *b < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            *b = -*b;
        }
    }

    let m = rows.len();
    if m == 0 {
        // Only bounds: every variable sits at whichever bound the cost prefers.
        let mut values = Vec::with_capacity(n);
        for (&c, &(lo, hi)) in lp.objective.iter().zip(&lp.bounds) {
            if c < 0.0 {
                if hi.is_infinite() {
                    return Ok(LpSolution::without_point(LpStatus::Unbounded));
                }
                values.push(hi);
            } else {
                values.push(lo);
            }
        }
        let objective_value = lp.objective.iter().zip(&values).map(|(c, v)| c * v).sum();
        return Ok(LpSolution { status: LpStatus::Optimal, values, objective_value });
    }

    // Phase one: one artificial per row.
    let n_cols = n_struct + m;
    for (i, row) in rows.iter_mut().enumerate() {
        row.resize(n_cols, 0.0);
        row[n_struct + i] = 1.0;
    }
    let scale = rhs.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n_struct..n_cols).collect(),
        enterable: vec![true; n_cols],
        iterations: 0,
        max_iterations: 10_000 + 200 * (m + n_cols),
    };
    let mut phase_one = vec![0.0; n_cols];
    phase_one[n_struct..].iter_mut().for_each(|c| *c = 1.0);
    t.optimize(&phase_one)?;
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= n_struct)
        .map(|(_, v)| v.abs())
        .sum();
    if infeasibility > EQ_TOLERANCE * scale {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are linear combinations of the others.
    let mut redundant = Vec::new();
    for r in 0..m {
        if t.basis[r] < n_struct {
            continue;
        }
        let best = (0..n_struct)
            .filter(|j| !t.basis.contains(j))
            .map(|j| (j, t.rows[r][j].abs()))
            .filter(|&(_, a)| a > PIVOT_TOLERANCE)
            .fold(None, |acc: Option<(usize, f64)>, (j, a)| match acc {
                Some((_, ba)) if ba >= a => acc,
                _ => Some((j, a)),
            });
        match best {
            Some((j, _)) => t.pivot(r, j),
            None => redundant.push(r),
        }
    }
    for &r in redundant.iter().rev() {
        t.rows.remove(r);
        t.rhs.remove(r);
        t.basis.remove(r);
    }
    for j in n_struct..n_cols {
        t.enterable[j] = false;
    }

    let mut cost = vec![0.0; n_cols];
    cost[..n].copy_from_slice(&lp.objective);
    if let Step::Unbounded = t.optimize(&cost)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut y = vec![0.0; n_cols];
    for (&b, &v) in t.basis.iter().zip(&t.rhs) {
        y[b] = v;
    }
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let (lo, hi) = lp.bounds[j];
            // Round-off can leave values a hair outside their bounds.
            (lo + y[j]).clamp(lo, hi)
        })
        .collect();
    let residual = lp.max_residual(&values);
    if residual > EQ_TOLERANCE * scale {
        return Err(LpError::NumericalBreakdown(format!(
            "equality residual {residual:e} after solve"
        )));
    }
    let objective_value = lp.objective.iter().zip(&values).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status: LpStatus::Optimal, values, objective_value })
}
