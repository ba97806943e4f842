//! Dense two-phase simplex solver.
//!
//! The fraction computations all reduce to small dense linear programs, a
//! few dozen to a few hundred variables. This solver keeps them in-repo:
//! Bland's anti-cycling rule makes the pivot sequence, and therefore the
//! result, independent of everything except the input data itself.

use crate::{Error, Result};

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// A linear program in the form: maximize `objective . x` subject to the
/// given rows and `x >= lower_bounds` (zero by default).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
    pub lower_bounds: Vec<f64>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
            lower_bounds: vec![0.0; n_vars],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.rows.push((coeffs, sense, rhs));
    }
}

/// An optimal solution together with the dual values of every row.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// One dual multiplier per constraint row, in row order.
    pub duals: Vec<f64>,
}

impl LpSolution {
    /// Verifies this solution as an optimality certificate: primal
    /// feasibility, dual feasibility, and matching objective values. All
    /// checks are plain arithmetic over the original program data.
    pub fn verify(&self, lp: &LinearProgram, tol: f64) -> Result<()> {
        for (v, (&x, &lb)) in self.x.iter().zip(lp.lower_bounds.iter()).enumerate() {
            if x < lb - tol {
                return Err(Error::Lp(format!("primal variable {v} below its bound")));
            }
        }
        for (r, (coeffs, sense, rhs)) in lp.rows.iter().enumerate() {
            let lhs: f64 = coeffs.iter().zip(&self.x).map(|(a, x)| a * x).sum();
            let ok = match sense {
                Sense::Le => lhs <= rhs + tol,
                Sense::Ge => lhs >= rhs - tol,
                Sense::Eq => (lhs - rhs).abs() <= tol,
            };
            if !ok {
                return Err(Error::Lp(format!(
                    "primal row {r} violated by {:.3e}",
                    lhs - rhs
                )));
            }
            let y = self.duals[r];
            let sign_ok = match sense {
                Sense::Le => y >= -tol,
                Sense::Ge => y <= tol,
                Sense::Eq => true,
            };
            if !sign_ok {
                return Err(Error::Lp(format!("dual multiplier {r} has the wrong sign")));
            }
        }
        // Dual feasibility: A^T y >= c on the shifted (x - lb >= 0) problem.
        for v in 0..lp.n_vars {
            let aty: f64 = lp
                .rows
                .iter()
                .zip(&self.duals)
                .map(|((a, _, _), y)| a[v] * y)
                .sum();
            if aty < lp.objective[v] - tol {
                return Err(Error::Lp(format!("dual constraint {v} violated")));
            }
        }
        // Strong duality: b^T y (with the lower-bound offset) equals c^T x.
        let shift: f64 = lp
            .rows
            .iter()
            .zip(&self.duals)
            .map(|((a, _, _), y)| {
                y * a
                    .iter()
                    .zip(&lp.lower_bounds)
                    .map(|(ai, lb)| ai * lb)
                    .sum::<f64>()
            })
            .sum();
        let const_term: f64 = lp
            .objective
            .iter()
            .zip(&lp.lower_bounds)
            .map(|(c, lb)| c * lb)
            .sum();
        let dual_obj: f64 = lp
            .rows
            .iter()
            .zip(&self.duals)
            .map(|((_, _, b), y)| b * y)
            .sum::<f64>()
            - shift
            + const_term;
        if (dual_obj - self.objective).abs() > tol {
            return Err(Error::Lp(format!(
                "duality gap {:.3e}",
                (dual_obj - self.objective).abs()
            )));
        }
        Ok(())
    }
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-8;

struct Tableau {
    /// m x (n_total + 1) rows; last column is the rhs.
    rows: Vec<Vec<f64>>,
    /// Objective row: reduced costs, last entry is the current value.
    obj: Vec<f64>,
    /// Basic variable of each row.
    basis: Vec<usize>,
    n_total: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        let inv = 1.0 / piv;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (r, tr) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = tr[col];
            if factor != 0.0 {
                for (v, pv) in tr.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations under Bland's rule until no column with a
    /// negative reduced cost remains among `enterable`.
    fn optimize(&mut self, enterable: &[bool]) -> Result<()> {
        loop {
            let entering = (0..self.n_total).find(|&c| enterable[c] && self.obj[c] < -COST_EPS);
            let Some(col) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.rows[r][self.n_total] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio <= lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Lp("unbounded program".into()));
            };
            self.pivot(row, col);
        }
    }
}

/// Phase-1 feasibility test: whether any point satisfies the constraints.
pub fn is_feasible(lp: &LinearProgram) -> Result<bool> {
    let mut relaxed = lp.clone();
    relaxed.objective = vec![0.0; lp.n_vars];
    match solve(&relaxed) {
        Ok(_) => Ok(true),
        Err(Error::Lp(msg)) if msg.starts_with("infeasible") => Ok(false),
        Err(e) => Err(e),
    }
}

/// Solves the program to optimality. Returns the optimal value, a primal
/// solution, and dual multipliers usable as an optimality certificate.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars;
    let m = lp.rows.len();
    for (coeffs, _, _) in &lp.rows {
        if coeffs.len() != n {
            return Err(Error::Lp("constraint width mismatch".into()));
        }
    }

    // Shift x = y + lb so that y >= 0.
    let shifted_rhs: Vec<f64> = lp
        .rows
        .iter()
        .map(|(a, _, b)| {
            b - a
                .iter()
                .zip(&lp.lower_bounds)
                .map(|(ai, lb)| ai * lb)
                .sum::<f64>()
        })
        .collect();
    let const_term: f64 = lp
        .objective
        .iter()
        .zip(&lp.lower_bounds)
        .map(|(c, lb)| c * lb)
        .sum();

    // Columns: n structural, m slack/surplus, m artificial.
    let n_total = n + m + m;
    let slack = |r: usize| n + r;
    let artificial = |r: usize| n + m + r;

    let mut rows = Vec::with_capacity(m);
    let mut row_sign = vec![1.0f64; m];
    for (r, (coeffs, sense, _)) in lp.rows.iter().enumerate() {
        let mut sign = 1.0;
        let mut rhs = shifted_rhs[r];
        if rhs < 0.0 {
            sign = -1.0;
            rhs = -rhs;
        }
        row_sign[r] = sign;
        let mut row = vec![0.0; n_total + 1];
        for (v, &a) in coeffs.iter().enumerate() {
            row[v] = sign * a;
        }
        match sense {
            Sense::Le => row[slack(r)] = sign,
            Sense::Ge => row[slack(r)] = -sign,
            Sense::Eq => {}
        }
        row[artificial(r)] = 1.0;
        row[n_total] = rhs;
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials, i.e. maximize their negated
    // sum. The objective row starts as sum of constraint rows so that the
    // artificial basis prices out to zero.
    let mut obj = vec![0.0; n_total + 1];
    for row in &rows {
        for (o, v) in obj.iter_mut().zip(row) {
            *o -= v;
        }
    }
    for r in 0..m {
        obj[artificial(r)] = 0.0;
    }
    let mut tableau = Tableau {
        rows,
        obj,
        basis: (0..m).map(artificial).collect(),
        n_total,
    };

    let mut enterable = vec![true; n_total];
    for r in 0..m {
        enterable[artificial(r)] = false;
    }
    tableau.optimize(&enterable)?;
    let infeasibility = -tableau.obj[n_total];
    if infeasibility.abs() > FEAS_EPS {
        return Err(Error::Lp(format!(
            "infeasible program (residual {infeasibility:.3e})"
        )));
    }

    // Drive remaining artificials out of the basis. Their rows are
    // degenerate (rhs 0), so any nonzero pivot in a real column is valid; a
    // row with no such column is redundant and stays inert.
    for r in 0..m {
        if tableau.basis[r] >= n + m {
            let col = (0..n + m).find(|&c| tableau.rows[r][c].abs() > PIVOT_EPS);
            if let Some(col) = col {
                tableau.pivot(r, col);
            }
        }
    }

    // Phase 2: swap in the real objective, priced over the current basis.
    let mut obj = vec![0.0; n_total + 1];
    for v in 0..n {
        obj[v] = -lp.objective[v];
    }
    for r in 0..m {
        let b = tableau.basis[r];
        let cost = if b < n { lp.objective[b] } else { 0.0 };
        if cost != 0.0 {
            let row = tableau.rows[r].clone();
            for (o, v) in obj.iter_mut().zip(&row) {
                *o += cost * v;
            }
        }
    }
    tableau.obj = obj;
    tableau.optimize(&enterable)?;

    let mut x = lp.lower_bounds.clone();
    for (r, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] += tableau.rows[r][n_total];
        }
    }
    // Duals are read off the objective row under the artificial columns,
    // undoing the per-row normalization sign.
    let duals: Vec<f64> = (0..m)
        .map(|r| row_sign[r] * tableau.obj[artificial(r)])
        .collect();
    let objective = tableau.obj[n_total] + const_term;
    Ok(LpSolution {
        objective,
        x,
        duals,
    })
}
