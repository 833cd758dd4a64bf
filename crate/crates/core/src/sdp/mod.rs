//! Block-diagonal semidefinite programs.
//!
//! Problems are stated as maximizations
//!
//! ```text
//! max  <C, X> + c^T u
//! s.t. <A_k, X> + a_k^T u  (= or <=)  b_k,   k = 1..m
//!      X = diag(X_1, ..., X_p),  X_j PSD (or a nonnegative diagonal)
//!      u free
//! ```
//!
//! with dual
//!
//! ```text
//! min  b^T y
//! s.t. sum_k y_k A_k - C = S  PSD,   sum_k y_k a_k = c,   y_k >= 0 for "<=" rows.
//! ```
//!
//! A dual value `y_k` is the Lagrange multiplier of constraint `k`, with the
//! sign convention that `y_k >= 0` whenever the constraint is an inequality.

mod presolve;
pub mod random;
pub mod sdpa;
mod solver;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use solver::solve;

/// Shape of one diagonal block of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// Dense symmetric PSD block of the given order.
    Psd(usize),
    /// Nonnegative diagonal block (linear variables).
    Diag(usize),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match *self {
            BlockKind::Psd(n) | BlockKind::Diag(n) => n,
        }
    }
}

/// One upper-triangular entry of a symmetric block matrix; `row <= col`,
/// and the entry stands for both `(row, col)` and `(col, row)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse symmetric block-diagonal matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub entries: Vec<SymEntry>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` and its mirror.
    pub fn push(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push(SymEntry {
            block,
            row,
            col,
            value,
        });
    }

    /// Sorted by `(block, row, col)`, duplicates summed, zeros dropped.
    pub fn canonical(&self) -> SparseSym {
        let mut e = self.entries.clone();
        e.sort_by_key(|a| (a.block, a.row, a.col));
        let mut out: Vec<SymEntry> = Vec::with_capacity(e.len());
        for x in e {
            match out.last_mut() {
                Some(last) if (last.block, last.row, last.col) == (x.block, x.row, x.col) => {
                    last.value += x.value
                }
                _ => out.push(x),
            }
        }
        out.retain(|x| x.value != 0.0);
        SparseSym { entries: out }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `<self, X>` for dense block values `x`.
    pub fn dot(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let xb = &x[e.block];
                if e.row == e.col {
                    e.value * xb[(e.row, e.col)]
                } else {
                    e.value * (xb[(e.row, e.col)] + xb[(e.col, e.row)])
                }
            })
            .sum()
    }

    /// `out += scale * self`.
    pub fn add_to(&self, scale: f64, out: &mut [DMatrix<f64>]) {
        for e in &self.entries {
            let m = &mut out[e.block];
            m[(e.row, e.col)] += scale * e.value;
            if e.row != e.col {
                m[(e.col, e.row)] += scale * e.value;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// `A_k` over the blocks of `X`.
    pub coeffs: SparseSym,
    /// `a_k`, one coefficient per free variable.
    pub free: Vec<f64>,
    pub rhs: f64,
    pub relation: Relation,
}

impl Constraint {
    /// Left-hand side `<A_k, X> + a_k^T u`.
    pub fn lhs(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        self.coeffs.dot(x) + self.free.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Violation: `|lhs - b|` for equalities, `max(0, lhs - b)` for `<=`.
    pub fn violation(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        let d = self.lhs(x, u) - self.rhs;
        match self.relation {
            Relation::Eq => d.abs(),
            Relation::Le => d.max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<BlockKind>,
    /// `C`.
    pub objective: SparseSym,
    /// `c`; its length fixes the number of free variables.
    pub free_objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn num_free(&self) -> usize {
        self.free_objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks block sizes, index ranges, diagonal-block structure, vector
    /// lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        for (b, k) in self.blocks.iter().enumerate() {
            if k.size() == 0 {
                return Err(Error::input(format!("block {b} has size zero")));
            }
        }
        let check = |m: &SparseSym, what: &str| -> Result<()> {
            for e in &m.entries {
                let kind = self
                    .blocks
                    .get(e.block)
                    .ok_or_else(|| Error::input(format!("{what}: block {} out of range", e.block)))?;
                if e.row > e.col || e.col >= kind.size() {
                    return Err(Error::input(format!(
                        "{what}: entry ({}, {}) invalid for block {} of size {}",
                        e.row,
                        e.col,
                        e.block,
                        kind.size()
                    )));
                }
                if matches!(kind, BlockKind::Diag(_)) && e.row != e.col {
                    return Err(Error::input(format!(
                        "{what}: off-diagonal entry in diagonal block {}",
                        e.block
                    )));
                }
                if !e.value.is_finite() {
                    return Err(Error::input(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        if self.free_objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("objective: non-finite free coefficient"));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.coeffs, &format!("constraint {k}"))?;
            if c.free.len() != self.num_free() {
                return Err(Error::Dimension {
                    expected: self.num_free(),
                    got: c.free.len(),
                });
            }
            if !c.rhs.is_finite() || c.free.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("constraint {k}: non-finite data")));
            }
        }
        Ok(())
    }

    /// True when every constraint is an equality and there are no free
    /// variables, i.e. the problem maps one-to-one onto SDPA data.
    pub fn is_standard_form(&self) -> bool {
        self.num_free() == 0 && self.constraints.iter().all(|c| c.relation == Relation::Eq)
    }

    /// Equivalent problem with only equalities and no free variables:
    /// inequality slacks and the split `u = u+ - u-` of every free variable
    /// go into one extra diagonal block (slacks first).
    pub fn to_standard_form(&self) -> SdpProblem {
        if self.is_standard_form() {
            return self.clone();
        }
        let n_le = self
            .constraints
            .iter()
            .filter(|c| c.relation == Relation::Le)
            .count();
        let nf = self.num_free();
        let extra = self.blocks.len();
        let mut blocks = self.blocks.clone();
        blocks.push(BlockKind::Diag(n_le + 2 * nf));
        let mut objective = self.objective.clone();
        for (j, c) in self.free_objective.iter().enumerate() {
            objective.push(extra, n_le + 2 * j, n_le + 2 * j, *c);
            objective.push(extra, n_le + 2 * j + 1, n_le + 2 * j + 1, -c);
        }
        let mut t = 0;
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = c.coeffs.clone();
                if c.relation == Relation::Le {
                    coeffs.push(extra, t, t, 1.0);
                    t += 1;
                }
                for (j, a) in c.free.iter().enumerate() {
                    coeffs.push(extra, n_le + 2 * j, n_le + 2 * j, *a);
                    coeffs.push(extra, n_le + 2 * j + 1, n_le + 2 * j + 1, -a);
                }
                Constraint {
                    coeffs: coeffs.canonical(),
                    free: Vec::new(),
                    rhs: c.rhs,
                    relation: Relation::Eq,
                }
            })
            .collect();
        SdpProblem {
            blocks,
            objective: objective.canonical(),
            free_objective: Vec::new(),
            constraints,
        }
    }

    /// Copy with every sparse matrix in canonical order.
    pub fn canonical(&self) -> SdpProblem {
        SdpProblem {
            blocks: self.blocks.clone(),
            objective: self.objective.canonical(),
            free_objective: self.free_objective.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.canonical(),
                    ..c.clone()
                })
                .collect(),
        }
    }

    /// Zero matrices shaped like the blocks of `X`.
    pub fn zero_blocks(&self) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|k| DMatrix::zeros(k.size(), k.size()))
            .collect()
    }

    /// `<C, X> + c^T u`.
    pub fn objective_value(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        self.objective.dot(x) + self.free_objective.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Largest constraint violation at `(X, u)`.
    pub fn max_violation(&self, x: &[DMatrix<f64>], u: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x, u))
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all blocks (diagonal entries for `Diag`).
    pub fn min_eigenvalue(&self, x: &[DMatrix<f64>]) -> f64 {
        self.blocks
            .iter()
            .zip(x)
            .map(|(k, m)| match k {
                BlockKind::Psd(_) => m
                    .clone()
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
                BlockKind::Diag(_) => m.diagonal().iter().copied().fold(f64::INFINITY, f64::min),
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Numerical(e.to_string()))
    }

    /// Parses and validates the JSON produced by [`SdpProblem::to_json`].
    pub fn from_json(s: &str) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative duality gap `<X,S> / (1 + |pobj| + |dobj|)`.
    pub tol_gap: f64,
    /// Relative primal and dual infeasibility.
    pub tol_feas: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-9,
            tol_feas: 1e-9,
            max_iter: 200,
        }
    }
}

/// One interior-point iterate, recorded before the step is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterLog {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `<X, S>` including inequality slacks.
    pub complementarity: f64,
    pub rel_gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub step_primal: f64,
    pub step_dual: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    /// Primal blocks; `Diag` blocks are stored as diagonal matrices.
    pub x: Vec<DMatrix<f64>>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual slack blocks `sum y_k A_k - C`.
    pub s: Vec<DMatrix<f64>>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    /// Complementarity `<X, S>` plus `sum y_k (b_k - lhs_k)` over inequalities.
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    pub log: Vec<IterLog>,
}

/// Residuals of a candidate primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Max-norm constraint violation.
    pub primal_infeas: f64,
    /// `|sum y_k A_k - C - S|_max`, together with sign violations of
    /// inequality multipliers.
    pub dual_infeas: f64,
    /// `|sum y_k a_k - c|_inf`.
    pub free_stationarity: f64,
    pub gap: f64,
}

/// Evaluates feasibility and complementarity residuals of `sol` for
/// `problem`.
pub fn residuals(problem: &SdpProblem, sol: &SdpSolution) -> Result<Residuals> {
    let m = problem.num_constraints();
    if sol.y.len() != m || sol.u.len() != problem.num_free() {
        return Err(Error::Dimension {
            expected: m,
            got: sol.y.len(),
        });
    }
    if sol.x.len() != problem.blocks.len() || sol.s.len() != problem.blocks.len() {
        return Err(Error::Dimension {
            expected: problem.blocks.len(),
            got: sol.x.len(),
        });
    }
    for ((k, x), s) in problem.blocks.iter().zip(&sol.x).zip(&sol.s) {
        let n = k.size();
        if x.shape() != (n, n) || s.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                got: x.nrows(),
            });
        }
    }
    let primal_infeas = problem.max_violation(&sol.x, &sol.u);

    let mut r = problem.zero_blocks();
    for (c, yk) in problem.constraints.iter().zip(&sol.y) {
        c.coeffs.add_to(*yk, &mut r);
    }
    problem.objective.add_to(-1.0, &mut r);
    let mut dual_infeas: f64 = 0.0;
    for ((k, rb), sb) in problem.blocks.iter().zip(&r).zip(&sol.s) {
        let d = rb - sb;
        let v = match k {
            BlockKind::Psd(_) => d.amax(),
            BlockKind::Diag(_) => d.diagonal().amax(),
        };
        dual_infeas = dual_infeas.max(v);
    }
    let mut gap = 0.0;
    for (c, yk) in problem.constraints.iter().zip(&sol.y) {
        if c.relation == Relation::Le {
            dual_infeas = dual_infeas.max(-yk);
            gap += yk * (c.rhs - c.lhs(&sol.x, &sol.u));
        }
    }
    let mut free_stationarity: f64 = 0.0;
    for j in 0..problem.num_free() {
        let s: f64 = problem
            .constraints
            .iter()
            .zip(&sol.y)
            .map(|(c, yk)| c.free[j] * yk)
            .sum();
        free_stationarity = free_stationarity.max((s - problem.free_objective[j]).abs());
    }
    for ((k, x), s) in problem.blocks.iter().zip(&sol.x).zip(&sol.s) {
        gap += match k {
            BlockKind::Psd(_) => x.dot(s),
            BlockKind::Diag(_) => x.diagonal().dot(&s.diagonal()),
        };
    }
    Ok(Residuals {
        primal_infeas,
        dual_infeas,
        free_stationarity,
        gap,
    })
}
