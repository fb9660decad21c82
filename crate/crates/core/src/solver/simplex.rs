//! Two-phase dense simplex for linear programs of the form
//! `min c.x  s.t.  A x >= b, x >= 0`.
//!
//! Upper bounds are expressed by the caller as extra rows. Rows already
//! satisfied at the origin enter the initial basis through their surplus
//! variable and need no artificial, so phase one only carries the genuinely
//! violated rows and stays well scaled even with very large bound rows.

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + surplus + artificial
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_real: usize, // structural + surplus columns
}

impl Tableau {
    fn column_disallowed(&self, j: usize, phase_two: bool) -> bool {
        phase_two && j >= self.n_real
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut red = costs.to_vec();
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i];
                for (r, coeff) in red.iter_mut().zip(row) {
                    *r -= cb * coeff;
                }
            }
        }
        red
    }

    fn exact_reduced_cost(&self, costs: &[f64], j: usize) -> f64 {
        let mut reduced = costs[j];
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                reduced -= cb * self.a[i][j];
            }
        }
        reduced
    }

    /// Runs the simplex on the given costs, maintaining the reduced-cost row
    /// incrementally through pivots. The incremental row can drift, so the
    /// chosen entering column is re-verified exactly and the row refreshed
    /// whenever the verification disagrees (and before declaring optimality).
    fn optimize(&mut self, costs: &[f64], phase_two: bool) -> Result<(), LpStatus> {
        let max_iterations = 50_000;
        let mut degenerate_streak = 0usize;
        let mut red = self.reduced_costs(costs);
        let mut in_basis = vec![false; self.cols];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        for _iteration in 1..=max_iterations {
            let select = |red: &[f64], in_basis: &[bool], use_bland: bool| -> Option<usize> {
                let mut entering = None;
                let mut best = -COST_TOL;
                for (j, &reduced) in red.iter().enumerate() {
                    if in_basis[j] || self.column_disallowed(j, phase_two) {
                        continue;
                    }
                    if reduced < -COST_TOL {
                        if use_bland {
                            return Some(j);
                        }
                        if reduced < best {
                            best = reduced;
                            entering = Some(j);
                        }
                    }
                }
                entering
            };
            let use_bland = degenerate_streak > 100;
            let mut entering = select(&red, &in_basis, use_bland);
            if entering.is_none() {
                red = self.reduced_costs(costs);
                entering = select(&red, &in_basis, use_bland);
            }
            let Some(enter) = entering else {
                return Ok(());
            };
            let exact = self.exact_reduced_cost(costs, enter);
            if exact >= -COST_TOL {
                // Stale entry; refresh the whole row and try again.
                red = self.reduced_costs(costs);
                degenerate_streak += 1;
                continue;
            }
            red[enter] = exact;
            // Ratio test; ties broken toward the smallest basis index.
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows {
                let coeff = self.a[i][enter];
                if coeff > PIVOT_TOL {
                    let ratio = self.rhs[i] / coeff;
                    let better = ratio < best_ratio - PIVOT_TOL
                        || (ratio < best_ratio + PIVOT_TOL
                            && leave.map(|l| self.basis[i] < self.basis[l]).unwrap_or(true));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(leave) = leave else {
                return Err(LpStatus::Unbounded);
            };
            if best_ratio <= PIVOT_TOL {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            in_basis[self.basis[leave]] = false;
            in_basis[enter] = true;
            self.pivot(leave, enter);
            let factor = red[enter];
            if factor != 0.0 {
                let row = &self.a[leave];
                for (r, coeff) in red.iter_mut().zip(row) {
                    *r -= factor * coeff;
                }
            }
        }
        Err(LpStatus::IterationLimit)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.a[row][col];
        for j in 0..self.cols {
            self.a[row][j] /= pivot;
        }
        self.rhs[row] /= pivot;
        for i in 0..self.rows {
            if i != row {
                let factor = self.a[i][col];
                if factor != 0.0 {
                    for j in 0..self.cols {
                        self.a[i][j] -= factor * self.a[row][j];
                    }
                    self.rhs[i] -= factor * self.rhs[row];
                }
            }
        }
        self.basis[row] = col;
    }
}

/// Solves `min c.x  s.t.  rows[i].x >= rhs[i], x >= 0`.
pub fn solve_ge_lp(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpSolution {
    let n = c.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    if m == 0 {
        return LpSolution {
            status: LpStatus::Optimal,
            x: vec![0.0; n],
            objective: 0.0,
        };
    }
    // Equality form: row.x - s = b. Rows with b <= 0 are satisfied at the
    // origin: negate them so the surplus enters the basis with +1.
    // Rows with b > 0 get an artificial variable.
    let violated: Vec<usize> = (0..m).filter(|&i| rhs[i] > 0.0).collect();
    let n_art = violated.len();
    let cols = n + m + n_art;
    let mut a = vec![vec![0.0; cols]; m];
    let mut b = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut art_idx = 0usize;
    for i in 0..m {
        if rhs[i] > 0.0 {
            for j in 0..n {
                a[i][j] = rows[i][j];
            }
            a[i][n + i] = -1.0; // surplus
            let art_col = n + m + art_idx;
            a[i][art_col] = 1.0;
            b[i] = rhs[i];
            basis[i] = art_col;
            art_idx += 1;
        } else {
            for j in 0..n {
                a[i][j] = -rows[i][j];
            }
            a[i][n + i] = 1.0; // surplus becomes the basic variable
            b[i] = -rhs[i];
            basis[i] = n + i;
        }
    }
    let mut tableau = Tableau {
        rows: m,
        cols,
        a,
        rhs: b,
        basis,
        n_real: n + m,
    };
    // Phase one: minimize the sum of artificials.
    if n_art > 0 {
        let mut phase1_costs = vec![0.0; cols];
        for j in n + m..cols {
            phase1_costs[j] = 1.0;
        }
        match tableau.optimize(&phase1_costs, false) {
            Ok(()) => {}
            Err(status) => {
                return LpSolution {
                    status,
                    x: vec![0.0; n],
                    objective: f64::NAN,
                }
            }
        }
        let infeasibility: f64 = (0..m)
            .filter(|&i| tableau.basis[i] >= n + m)
            .map(|i| tableau.rhs[i])
            .sum();
        let scale = rhs.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        if infeasibility > 1e-7 * scale {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
            };
        }
        // Drive remaining artificials out of the basis, or drop their rows.
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if tableau.basis[i] >= n + m {
                let col = (0..n + m).find(|&j| tableau.a[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(j) => tableau.pivot(i, j),
                    None => drop_rows.push(i),
                }
            }
        }
        if !drop_rows.is_empty() {
            for &i in drop_rows.iter().rev() {
                tableau.a.remove(i);
                tableau.rhs.remove(i);
                tableau.basis.remove(i);
                tableau.rows -= 1;
            }
        }
    }
    // Phase two.
    let mut phase2_costs = vec![0.0; cols];
    phase2_costs[..n].copy_from_slice(c);
    let status = match tableau.optimize(&phase2_costs, true) {
        Ok(()) => LpStatus::Optimal,
        Err(s) => s,
    };
    let mut x = vec![0.0; n];
    for i in 0..tableau.rows {
        if tableau.basis[i] < n {
            x[tableau.basis[i]] = tableau.rhs[i].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpSolution {
        status,
        x,
        objective,
    }
}
