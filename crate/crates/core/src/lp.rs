//! Dense linear programming over the probability simplex.
//!
//! Problems are tiny (dimension at most 64, at most a few hundred
//! constraints), so a two-phase dense simplex method with Bland's rule is
//! used; exact feasibility decisions matter more than speed here. The
//! simplex constraint (coordinates sum to one, all non-negative) is always
//! implicit, which also rules out unbounded problems.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

/// Maximum supported problem dimension.
pub const MAX_DIMENSION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub bound: f64,
    pub sense: Sense,
}

impl LinearConstraint {
    pub fn le(coefficients: Vec<f64>, bound: f64) -> Self {
        LinearConstraint { coefficients, bound, sense: Sense::Le }
    }

    pub fn eq(coefficients: Vec<f64>, bound: f64) -> Self {
        LinearConstraint { coefficients, bound, sense: Sense::Eq }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub dimension: usize,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<f64>,
    pub direction: Direction,
}

#[derive(Debug, Clone)]
pub enum LpResult {
    Optimal { value: f64, witness: Vec<f64> },
    Infeasible,
}

impl LpResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpResult::Optimal { value, .. } => Some(*value),
            LpResult::Infeasible => None,
        }
    }
}

/// Solve min/max of a linear objective over the simplex intersected with the
/// given constraints.
pub fn solve(problem: &LpProblem) -> Result<LpResult> {
    validate(problem)?;
    let negate = problem.direction == Direction::Max;
    let objective: Vec<f64> = if negate {
        problem.objective.iter().map(|c| -c).collect()
    } else {
        problem.objective.clone()
    };
    let mut tab = Tableau::build(problem.dimension, &problem.constraints);
    if !tab.phase_one() {
        return Ok(LpResult::Infeasible);
    }
    let (value, witness) = tab.phase_two(&objective)?;
    check_witness(problem, &witness)?;
    let value = if negate { -value } else { value };
    Ok(LpResult::Optimal { value, witness })
}

/// True iff the constraint set intersected with the simplex is non-empty.
pub fn feasible(constraints: &[LinearConstraint], dimension: usize) -> Result<bool> {
    let problem = LpProblem {
        dimension,
        constraints: constraints.to_vec(),
        objective: vec![0.0; dimension],
        direction: Direction::Min,
    };
    validate(&problem)?;
    let mut tab = Tableau::build(dimension, constraints);
    Ok(tab.phase_one())
}

fn validate(problem: &LpProblem) -> Result<()> {
    if problem.dimension < 2 || problem.dimension > MAX_DIMENSION {
        return Err(Error::Usage(format!(
            "LP dimension must be in 2..={MAX_DIMENSION}, got {}",
            problem.dimension
        )));
    }
    if problem.objective.len() != problem.dimension {
        return Err(Error::Usage("objective length does not match dimension".into()));
    }
    for c in &problem.constraints {
        if c.coefficients.len() != problem.dimension {
            return Err(Error::Usage("constraint length does not match dimension".into()));
        }
    }
    Ok(())
}

fn check_witness(problem: &LpProblem, witness: &[f64]) -> Result<()> {
    let sum: f64 = witness.iter().sum();
    if (sum - 1.0).abs() > FEAS_EPS || witness.iter().any(|&x| x < -FEAS_EPS) {
        return Err(Error::Domain("LP witness violates the simplex constraint".into()));
    }
    for c in &problem.constraints {
        let lhs: f64 = c.coefficients.iter().zip(witness).map(|(a, x)| a * x).sum();
        let ok = match c.sense {
            Sense::Le => lhs <= c.bound + FEAS_EPS,
            Sense::Eq => (lhs - c.bound).abs() <= FEAS_EPS,
        };
        if !ok {
            return Err(Error::Domain("LP witness violates a constraint".into()));
        }
    }
    Ok(())
}

/// Dense simplex tableau in the basis-inverse-applied form: `rows` holds
/// B^-1 A and `rhs` holds B^-1 b.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_real: usize, // structural + slack columns
    n_total: usize,
}

impl Tableau {
    fn build(dim: usize, constraints: &[LinearConstraint]) -> Tableau {
        let n_slack = constraints.iter().filter(|c| c.sense == Sense::Le).count();
        let m = constraints.len() + 1; // + simplex equality row
        let n_real = dim + n_slack;
        let n_total = n_real + m; // + one artificial per row
        let mut rows = vec![vec![0.0; n_total]; m];
        let mut rhs = vec![0.0; m];

        // row 0: sum of coordinates equals one
        rows[0][..dim].fill(1.0);
        rhs[0] = 1.0;

        let mut slack = dim;
        for (i, c) in constraints.iter().enumerate() {
            let r = i + 1;
            rows[r][..dim].copy_from_slice(&c.coefficients);
            rhs[r] = c.bound;
            if c.sense == Sense::Le {
                rows[r][slack] = 1.0;
                slack += 1;
            }
        }
        // make all right-hand sides non-negative, then install artificials
        for r in 0..m {
            if rhs[r] < 0.0 {
                rhs[r] = -rhs[r];
                for v in rows[r].iter_mut() {
                    *v = -*v;
                }
            }
            rows[r][n_real + r] = 1.0;
        }
        let basis = (0..m).map(|r| n_real + r).collect();
        Tableau { rows, rhs, basis, n_real, n_total }
    }

    /// Minimize the sum of artificials; returns true iff it reaches ~0.
    fn phase_one(&mut self) -> bool {
        let cost: Vec<f64> = (0..self.n_total)
            .map(|j| if j >= self.n_real { 1.0 } else { 0.0 })
            .collect();
        let value = self.minimize(&cost, self.n_total);
        if value > FEAS_EPS {
            return false;
        }
        self.evict_artificials();
        true
    }

    /// Pivot basic artificials out; rows where that is impossible are
    /// redundant and dropped.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.n_real {
                let pivot_col = (0..self.n_real).find(|&j| self.rows[r][j].abs() > PIVOT_EPS);
                match pivot_col {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut cost = vec![0.0; self.n_total];
        cost[..objective.len()].copy_from_slice(objective);
        let value = self.minimize(&cost, self.n_real);
        let dim = objective.len();
        let mut witness = vec![0.0; dim];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < dim {
                witness[b] = self.rhs[r].max(0.0);
            }
        }
        Ok((value, witness))
    }

    /// Bland-rule simplex iterations on columns `0..allowed`; returns the
    /// objective value reached. The feasible region is bounded, so the ratio
    /// test always finds a pivot when an improving column exists.
    fn minimize(&mut self, cost: &[f64], allowed: usize) -> f64 {
        // reduced costs r_j = c_j - c_B^T B^-1 A_j
        let mut reduced: Vec<f64> = (0..self.n_total)
            .map(|j| {
                cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(r, &b)| cost[b] * self.rows[r][j])
                        .sum::<f64>()
            })
            .collect();
        loop {
            let entering = (0..allowed)
                .find(|&j| !self.basis.contains(&j) && reduced[j] < -FEAS_EPS);
            let Some(j) = entering else { break };
            // ratio test with Bland tie-break on the leaving basic variable
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[r] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio < lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                // cannot happen on a bounded region; stop defensively
                break;
            };
            self.pivot(r, j);
            // refresh reduced costs (problems are tiny, recomputation is fine)
            for (jj, rc) in reduced.iter_mut().enumerate() {
                *rc = cost[jj]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(rr, &b)| cost[b] * self.rows[rr][jj])
                        .sum::<f64>();
            }
        }
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| cost[b] * self.rhs[r])
            .sum()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        for rr in 0..self.rows.len() {
            if rr == r {
                continue;
            }
            let f = self.rows[rr][j];
            if f != 0.0 {
                for c in 0..self.n_total {
                    self.rows[rr][c] -= f * self.rows[r][c];
                }
                self.rhs[rr] -= f * self.rhs[r];
            }
        }
        self.basis[r] = j;
    }
}
