//! Dense two-phase simplex for small linear programs over `x >= 0`.
//!
//! Bland's rule picks both the entering and leaving variable, so the method
//! terminates on degenerate problems. After the last pivot the basic
//! solution is recomputed from the original rows by Gaussian elimination,
//! which removes most of the drift accumulated across pivots.

use std::fmt;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const FEASIBILITY_EPS: f64 = 1e-8;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Lp {
    pub n: usize,
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
    Malformed(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => f.write_str("linear program is infeasible"),
            LpError::Unbounded => f.write_str("linear program is unbounded"),
            LpError::IterationLimit => f.write_str("simplex pivot limit reached"),
            LpError::Malformed(m) => write!(f, "malformed linear program: {m}"),
        }
    }
}

impl std::error::Error for LpError {}

impl Lp {
    pub fn new(n: usize, sense: Sense, objective: Vec<f64>) -> Self {
        Lp {
            n,
            sense,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        if self.objective.len() != self.n {
            return Err(LpError::Malformed("objective length differs from n".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.n {
                return Err(LpError::Malformed(format!("row {i} has the wrong length")));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|x| !x.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }
        let mut t = Tableau::build(self);
        t.phase_one()?;
        let costs: Vec<f64> = match self.sense {
            Sense::Min => self.objective.clone(),
            Sense::Max => self.objective.iter().map(|c| -c).collect(),
        };
        t.phase_two(&costs)?;
        let mut x = t.refined_solution();
        x.truncate(self.n);
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Solution { x, value })
    }
}

struct Tableau {
    /// Rows over all columns plus the right-hand side in the last slot.
    rows: Vec<Vec<f64>>,
    /// Copy of the rows before any pivot, for refinement.
    original: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Original row index of each live row.
    row_ids: Vec<usize>,
    ncols: usize,
    first_artificial: usize,
    obj: Vec<f64>,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.n;
        let mut rows_norm = Vec::with_capacity(m);
        for c in &lp.constraints {
            if c.rhs < 0.0 {
                let flipped = match c.cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                rows_norm.push((c.coeffs.iter().map(|x| -x).collect::<Vec<_>>(), flipped, -c.rhs));
            } else {
                rows_norm.push((c.coeffs.clone(), c.cmp, c.rhs));
            }
        }
        let n_slack = rows_norm.iter().filter(|r| r.1 != Cmp::Eq).count();
        let n_art = rows_norm.iter().filter(|r| r.1 != Cmp::Le).count();
        let first_artificial = n + n_slack;
        let ncols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, first_artificial);
        for (coeffs, cmp, rhs) in rows_norm {
            let mut row = vec![0.0; ncols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[ncols] = rhs;
            match cmp {
                Cmp::Le => {
                    row[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Cmp::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
                Cmp::Eq => {
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            original: rows.clone(),
            rows,
            basis,
            row_ids: (0..m).collect(),
            ncols,
            first_artificial,
            obj: vec![0.0; ncols + 1],
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols + 1;
        let p = self.rows[r][c];
        for j in 0..w {
            self.rows[r][j] /= p;
        }
        self.rows[r][c] = 1.0;
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..w {
                self.obj[j] -= f * prow[j];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on the current objective row over columns `< limit`.
    fn iterate(&mut self, limit: usize) -> Result<(), LpError> {
        let rhs = self.ncols;
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..limit).find(|&j| self.obj[j] < -COST_EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_EPS {
                    let ratio = row[rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Err(LpError::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(LpError::IterationLimit)
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let rhs = self.ncols;
        self.obj = vec![0.0; self.ncols + 1];
        for j in self.first_artificial..self.ncols {
            self.obj[j] = 1.0;
        }
        for i in 0..self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                for j in 0..=rhs {
                    self.obj[j] -= self.rows[i][j];
                }
            }
        }
        self.iterate(self.ncols)?;
        let infeasibility = -self.obj[rhs];
        let scale = 1.0 + self.original.iter().map(|r| r[rhs].abs()).fold(0.0, f64::max);
        if infeasibility > FEASIBILITY_EPS * scale {
            return Err(LpError::Infeasible);
        }
        // Drive artificials out of the basis, dropping rows that are
        // linear combinations of the others.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        self.row_ids.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        Ok(())
    }

    fn phase_two(&mut self, costs: &[f64]) -> Result<(), LpError> {
        let rhs = self.ncols;
        self.obj = vec![0.0; self.ncols + 1];
        self.obj[..costs.len()].copy_from_slice(costs);
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let f = self.obj[b];
            if f != 0.0 {
                for j in 0..=rhs {
                    self.obj[j] -= f * self.rows[i][j];
                }
            }
        }
        self.iterate(self.first_artificial)
    }

    fn tableau_solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.first_artificial];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.first_artificial {
                x[b] = self.rows[i][self.ncols].max(0.0);
            }
        }
        x
    }

    /// Re-solves `B x_B = b` on the original rows for the final basis.
    fn refined_solution(&self) -> Vec<f64> {
        let fallback = self.tableau_solution();
        let k = self.basis.len();
        if k == 0 {
            return fallback;
        }
        let rhs = self.ncols;
        let mut mat: Vec<Vec<f64>> = self
            .row_ids
            .iter()
            .map(|&r| {
                let mut row: Vec<f64> = self.basis.iter().map(|&b| self.original[r][b]).collect();
                row.push(self.original[r][rhs]);
                row
            })
            .collect();
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))
                .unwrap_or(col);
            if mat[piv][col].abs() < 1e-13 {
                return fallback;
            }
            mat.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = mat[r][col] / mat[col][col];
                    if f != 0.0 {
                        for j in col..=k {
                            mat[r][j] -= f * mat[col][j];
                        }
                    }
                }
            }
        }
        let mut x = vec![0.0; self.first_artificial];
        for (i, &b) in self.basis.iter().enumerate() {
            let v = mat[i][k] / mat[i][i];
            if v < -1e-9 || !v.is_finite() {
                return fallback;
            }
            if b < self.first_artificial {
                x[b] = v.max(0.0);
            } else if v.abs() > 1e-9 {
                return fallback;
            }
        }
        // Every original row, including dropped redundant ones, must hold.
        for row in &self.original {
            let lhs: f64 = (0..self.first_artificial).map(|j| row[j] * x[j]).sum();
            if (lhs - row[rhs]).abs() > 1e-9 * (1.0 + row[rhs].abs()) {
                return fallback;
            }
        }
        x
    }
}
