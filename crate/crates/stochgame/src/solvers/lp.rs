//! Dense phase-1 simplex for linear feasibility problems.

use crate::error::{Result, SgError};

/// Feasibility tolerance on rows and on the phase-1 optimum.
pub const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// Rows over `n_vars` variables with `lower[j] <= x_j <= upper[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub n_vars: usize,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    Infeasible,
}

impl LpProblem {
    /// Problem with all variables in `[0, inf)`.
    pub fn nonneg(n_vars: usize) -> Self {
        LpProblem { n_vars, rows: Vec::new(), lower: vec![0.0; n_vars], upper: vec![None; n_vars] }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) {
        self.rows.push(Row { coeffs, kind, rhs });
    }

    /// Largest row or bound violation at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match row.kind {
                RowKind::Le => lhs - row.rhs,
                RowKind::Ge => row.rhs - lhs,
                RowKind::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for j in 0..self.n_vars {
            worst = worst.max(self.lower[j] - x[j]);
            if let Some(u) = self.upper[j] {
                worst = worst.max(x[j] - u);
            }
        }
        worst
    }

    fn check(&self) -> Result<()> {
        if self.lower.len() != self.n_vars || self.upper.len() != self.n_vars {
            return Err(SgError::Lp("bound vectors do not match variable count".into()));
        }
        for r in &self.rows {
            if r.coeffs.len() != self.n_vars {
                return Err(SgError::Lp("row length does not match variable count".into()));
            }
            if !r.rhs.is_finite() || r.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(SgError::Lp("non-finite coefficient".into()));
            }
        }
        if self.lower.iter().any(|l| !l.is_finite()) {
            return Err(SgError::Lp("lower bounds must be finite".into()));
        }
        Ok(())
    }
}

/// Phase-1 simplex with Bland's rule.
pub fn lp_feasibility(lp: &LpProblem) -> Result<LpOutcome> {
    lp.check()?;
    let nv = lp.n_vars;
    // shift x = y + lower, y >= 0; upper bounds become rows
    let mut rows: Vec<(Vec<f64>, RowKind, f64)> = lp
        .rows
        .iter()
        .map(|r| {
            let shift: f64 = r.coeffs.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
            (r.coeffs.clone(), r.kind, r.rhs - shift)
        })
        .collect();
    for j in 0..nv {
        if let Some(u) = lp.upper[j] {
            let mut c = vec![0.0; nv];
            c[j] = 1.0;
            rows.push((c, RowKind::Le, u - lp.lower[j]));
        }
    }
    let m = rows.len();
    if m == 0 {
        return Ok(LpOutcome::Feasible(lp.lower.clone()));
    }
    let n_slack = rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let ncols = nv + n_slack + m;
    let rhs_col = ncols;
    let mut t = vec![vec![0.0; ncols + 1]; m];
    let mut slack = nv;
    for (k, (coeffs, kind, rhs)) in rows.iter().enumerate() {
        let row = &mut t[k];
        row[..nv].copy_from_slice(coeffs);
        match kind {
            RowKind::Le => {
                row[slack] = 1.0;
                slack += 1;
            }
            RowKind::Ge => {
                row[slack] = -1.0;
                slack += 1;
            }
            RowKind::Eq => {}
        }
        row[rhs_col] = *rhs;
        if *rhs < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        row[nv + n_slack + k] = 1.0;
    }
    let mut basis: Vec<usize> = (0..m).map(|k| nv + n_slack + k).collect();
    // reduced costs of min sum(artificials)
    let mut cost = vec![0.0; ncols + 1];
    for row in &t {
        for j in 0..nv + n_slack {
            cost[j] -= row[j];
        }
        cost[rhs_col] -= row[rhs_col];
    }
    let max_pivots = 50 * (m + ncols) + 1000;
    for _ in 0..max_pivots {
        let enter = (0..ncols).find(|&j| cost[j] < -PIVOT_TOL);
        let Some(e) = enter else { break };
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..m {
            if t[k][e] > PIVOT_TOL {
                let ratio = t[k][rhs_col] / t[k][e];
                let better = match leave {
                    None => true,
                    Some((l, best)) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[k] < basis[l]),
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        let Some((l, _)) = leave else {
            return Err(SgError::Lp("phase-1 objective unbounded".into()));
        };
        let piv = t[l][e];
        t[l].iter_mut().for_each(|x| *x /= piv);
        let prow = t[l].clone();
        for (k, row) in t.iter_mut().enumerate() {
            if k != l && row[e] != 0.0 {
                let f = row[e];
                row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
            }
        }
        let f = cost[e];
        cost.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
        basis[l] = e;
    }
    if -cost[rhs_col] > LP_TOL {
        return Ok(LpOutcome::Infeasible);
    }
    let mut x = lp.lower.clone();
    for (k, &b) in basis.iter().enumerate() {
        if b < nv {
            x[b] += t[k][rhs_col].max(0.0);
        }
    }
    if lp.violation(&x) > LP_TOL {
        return Err(SgError::Lp(format!("numerical failure: violation {:e}", lp.violation(&x))));
    }
    Ok(LpOutcome::Feasible(x))
}
