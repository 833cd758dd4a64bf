//! Presolve: one-row facial reduction and removal of redundant rows.
//!
//! A row `<A, X_j> = 0` (or `<= 0`) with `A` PSD and no free or foreign
//! terms forces `X_j` onto the face `X_j = V Y V^T`, where the columns of `V`
//! span the null space of `A`. Such problems have no strictly feasible
//! point, which stalls interior-point methods; solving over `Y` instead
//! restores strict feasibility.
//!
//! Rows with no coefficients that every point satisfies are dropped, and so
//! are consistent equality rows that are linear combinations of earlier
//! ones. Dropped rows get a zero multiplier.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{BlockKind, Constraint, Relation, SdpProblem, SdpSolution, SparseSym};

/// Relative eigenvalue threshold for PSD detection and null spaces.
const EIG_TOL: f64 = 1e-9;
/// Relative residual below which an equality row counts as dependent.
const DEP_TOL: f64 = 1e-10;

pub(crate) struct Reduction {
    pub reduced: SdpProblem,
    /// Face basis per reduced block.
    faces: Vec<Option<DMatrix<f64>>>,
    /// Original row index of each reduced row.
    kept: Vec<usize>,
    /// Original index of each reduced free variable; the rest are zero.
    free_kept: Vec<usize>,
    /// Detected rows with their block and normalization `1 / max|A|`.
    detected: Vec<(usize, usize, f64)>,
}

fn dense_block(s: &SparseSym, block: usize, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for e in s.entries.iter().filter(|e| e.block == block) {
        m[(e.row, e.col)] += e.value;
        if e.row != e.col {
            m[(e.col, e.row)] += e.value;
        }
    }
    m
}

/// Block and normalization of a face-defining row, if `c` is one.
fn face_row(problem: &SdpProblem, c: &Constraint) -> Option<(usize, f64)> {
    if c.rhs != 0.0 || c.coeffs.is_empty() || c.free.iter().any(|a| *a != 0.0) {
        return None;
    }
    let block = c.coeffs.entries[0].block;
    if c.coeffs.entries.iter().any(|e| e.block != block) {
        return None;
    }
    let BlockKind::Psd(n) = problem.blocks[block] else {
        return None;
    };
    let a = dense_block(&c.coeffs, block, n);
    let amax = a.amax();
    if amax == 0.0 {
        return None;
    }
    let ev = SymmetricEigen::new(a / amax).eigenvalues;
    let (lo, hi) = (ev.min(), ev.max());
    (lo >= -EIG_TOL * hi && hi > 0.0).then_some((block, 1.0 / amax))
}

fn transform(s: &SparseSym, faces: &[Option<DMatrix<f64>>], sizes: &[usize]) -> SparseSym {
    let mut out = SparseSym::new();
    for e in s.entries.iter().filter(|e| faces[e.block].is_none()) {
        out.entries.push(*e);
    }
    for (b, face) in faces.iter().enumerate() {
        let Some(v) = face else { continue };
        if !s.entries.iter().any(|e| e.block == b) {
            continue;
        }
        let a = dense_block(s, b, sizes[b]);
        let r = v.transpose() * &a * v;
        let cut = 1e-13 * a.amax();
        for i in 0..r.nrows() {
            for j in i..r.ncols() {
                let val = 0.5 * (r[(i, j)] + r[(j, i)]);
                if val.abs() > cut {
                    out.push(b, i, j, val);
                }
            }
        }
    }
    out
}

fn is_void(coeffs: &SparseSym, free: &[f64], rhs: f64, relation: Relation) -> bool {
    coeffs.entries.iter().all(|e| e.value == 0.0)
        && free.iter().all(|a| *a == 0.0)
        && match relation {
            Relation::Eq => rhs == 0.0,
            Relation::Le => rhs >= 0.0,
        }
}

/// Row vector of `<A, X> + a^T u` over the upper triangles, with
/// off-diagonal entries weighted so that dot products match `<A, B>`.
fn row_vector(c: &Constraint, offsets: &[usize], sizes: &[usize], len: usize) -> DVector<f64> {
    let mut v = DVector::zeros(len);
    for e in &c.coeffs.entries {
        let n = sizes[e.block];
        let idx = offsets[e.block] + e.row * n - e.row * (e.row + 1) / 2 + e.col;
        v[idx] += if e.row == e.col { e.value } else { e.value * std::f64::consts::SQRT_2 };
    }
    let base = len - c.free.len();
    for (j, a) in c.free.iter().enumerate() {
        v[base + j] = *a;
    }
    v
}

/// Indices of consistent `(v, r)` pairs whose `v` lies in the span of
/// earlier ones, with `r` following the same combination. Zero vectors count
/// as dependent when `r` is zero; inconsistent pairs are never reported.
fn dependent(items: impl IntoIterator<Item = (usize, DVector<f64>, f64)>) -> Vec<usize> {
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut out = Vec::new();
    for (k, mut v, rhs) in items {
        let norm = v.norm();
        let mut r = rhs;
        for (q, qr) in &basis {
            let t = q.dot(&v);
            v.axpy(-t, q, 1.0);
            r -= t * qr;
        }
        let res = v.norm();
        if res <= DEP_TOL * norm || norm == 0.0 {
            if r.abs() <= 1e-9 * (1.0 + rhs.abs()) {
                out.push(k);
            }
            continue;
        }
        basis.push((v / res, r / res));
    }
    out
}

fn dependent_rows(blocks: &[BlockKind], constraints: &[Constraint]) -> Vec<usize> {
    let sizes: Vec<usize> = blocks.iter().map(BlockKind::size).collect();
    // diagonal blocks are indexed like full ones; only the diagonal is used
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut len = 0;
    for n in &sizes {
        offsets.push(len);
        len += n * (n + 1) / 2;
    }
    len += constraints.first().map_or(0, |c| c.free.len());
    dependent(
        constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.relation == Relation::Eq)
            .map(|(k, c)| (k, row_vector(c, &offsets, &sizes, len), c.rhs)),
    )
}

/// Free variables whose column, together with its cost, depends on earlier
/// columns. Fixing them at zero loses nothing.
fn dependent_free(constraints: &[Constraint], cost: &[f64]) -> Vec<usize> {
    dependent((0..cost.len()).map(|j| {
        let col = DVector::from_iterator(constraints.len(), constraints.iter().map(|c| c.free[j]));
        (j, col, cost[j])
    }))
}

/// Restricts every block that carries a face-defining row and drops void
/// and dependent rows. Returns `None` when there is nothing to reduce.
pub(crate) fn reduce(problem: &SdpProblem) -> Option<Reduction> {
    let detected: Vec<(usize, usize, f64)> = problem
        .constraints
        .iter()
        .enumerate()
        .filter_map(|(k, c)| face_row(problem, c).map(|(b, w)| (k, b, w)))
        .collect();
    let sizes: Vec<usize> = problem.blocks.iter().map(BlockKind::size).collect();
    let mut faces: Vec<Option<DMatrix<f64>>> = vec![None; problem.blocks.len()];
    for (b, face) in faces.iter_mut().enumerate() {
        let mut p = DMatrix::zeros(sizes[b], sizes[b]);
        let mut any = false;
        for &(k, _, w) in detected.iter().filter(|d| d.1 == b) {
            p += dense_block(&problem.constraints[k].coeffs, b, sizes[b]) * w;
            any = true;
        }
        if !any {
            continue;
        }
        let eig = SymmetricEigen::new(p);
        let cut = EIG_TOL * eig.eigenvalues.max();
        let null: Vec<usize> = (0..sizes[b]).filter(|&i| eig.eigenvalues[i] <= cut).collect();
        if null.is_empty() {
            // X_j = 0 is forced; leave the block alone
            continue;
        }
        *face = Some(DMatrix::from_fn(sizes[b], null.len(), |r, c| eig.eigenvectors[(r, null[c])]));
    }
    let detected: Vec<(usize, usize, f64)> = detected.into_iter().filter(|d| faces[d.1].is_some()).collect();
    let blocks: Vec<BlockKind> = problem
        .blocks
        .iter()
        .zip(&faces)
        .map(|(k, f)| match f {
            Some(v) => BlockKind::Psd(v.ncols()),
            None => *k,
        })
        .collect();
    let mut kept = Vec::new();
    let mut constraints = Vec::new();
    for (k, c) in problem.constraints.iter().enumerate() {
        if detected.iter().any(|d| d.0 == k) {
            continue;
        }
        let coeffs = transform(&c.coeffs, &faces, &sizes);
        if is_void(&coeffs, &c.free, c.rhs, c.relation) {
            continue;
        }
        kept.push(k);
        constraints.push(Constraint {
            coeffs,
            free: c.free.clone(),
            rhs: c.rhs,
            relation: c.relation,
        });
    }
    let dependent = dependent_rows(&blocks, &constraints);
    for &r in dependent.iter().rev() {
        constraints.remove(r);
        kept.remove(r);
    }
    let fixed = dependent_free(&constraints, &problem.free_objective);
    let free_kept: Vec<usize> = (0..problem.num_free()).filter(|j| !fixed.contains(j)).collect();
    if !fixed.is_empty() {
        for c in &mut constraints {
            c.free = free_kept.iter().map(|&j| c.free[j]).collect();
        }
    }
    if faces.iter().all(Option::is_none) && constraints.len() == problem.constraints.len() && fixed.is_empty() {
        return None;
    }
    let reduced = SdpProblem {
        blocks,
        objective: transform(&problem.objective, &faces, &sizes),
        free_objective: free_kept.iter().map(|&j| problem.free_objective[j]).collect(),
        constraints,
    };
    Some(Reduction {
        reduced,
        faces,
        kept,
        free_kept,
        detected,
    })
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

impl Reduction {
    /// Maps a solution of the reduced problem back to `problem`.
    ///
    /// Multipliers of the face-defining rows are chosen by doubling until
    /// the dual slack is PSD; when the dual optimum is not attained the
    /// least indefinite slack found is reported.
    pub fn lift(&self, problem: &SdpProblem, sol: SdpSolution) -> SdpSolution {
        let mut x = problem.zero_blocks();
        for (b, face) in self.faces.iter().enumerate() {
            x[b] = match face {
                Some(v) => v * &sol.x[b] * v.transpose(),
                None => sol.x[b].clone(),
            };
        }
        let m = problem.constraints.len();
        let mut y = vec![0.0; m];
        for (r, &k) in self.kept.iter().enumerate() {
            y[k] = sol.y[r];
        }
        let slack = |y: &[f64]| {
            let mut s = problem.zero_blocks();
            problem.objective.add_to(-1.0, &mut s);
            for (c, yk) in problem.constraints.iter().zip(y) {
                if *yk != 0.0 {
                    c.coeffs.add_to(*yk, &mut s);
                }
            }
            s
        };
        let base = slack(&y);
        for (b, face) in self.faces.iter().enumerate() {
            if face.is_none() {
                continue;
            }
            let mut p = DMatrix::zeros(base[b].nrows(), base[b].ncols());
            for &(k, _, w) in self.detected.iter().filter(|d| d.1 == b) {
                p += dense_block(&problem.constraints[k].coeffs, b, base[b].nrows()) * w;
            }
            let mut best = (0.0, min_eig(&base[b]));
            let mut t = 1.0;
            while best.1 < 0.0 && t < 1e18 {
                let e = min_eig(&(&base[b] + &p * t));
                if e > best.1 {
                    best = (t, e);
                }
                t *= 2.0;
            }
            for &(k, _, w) in self.detected.iter().filter(|d| d.1 == b) {
                y[k] = best.0 * w;
            }
        }
        let mut u = vec![0.0; problem.num_free()];
        for (j, &k) in self.free_kept.iter().enumerate() {
            u[k] = sol.u[j];
        }
        assemble(problem, x, u, y, sol)
    }
}

/// Completes a solution of `problem` from its primal point and multipliers,
/// keeping the status and log of the reduced solve.
fn assemble(problem: &SdpProblem, x: Vec<DMatrix<f64>>, u: Vec<f64>, y: Vec<f64>, sol: SdpSolution) -> SdpSolution {
    let mut s = problem.zero_blocks();
    problem.objective.add_to(-1.0, &mut s);
    for (c, yk) in problem.constraints.iter().zip(&y) {
        if *yk != 0.0 {
            c.coeffs.add_to(*yk, &mut s);
        }
    }
    let objective_primal = problem.objective_value(&x, &u);
    let objective_dual = problem.constraints.iter().zip(&y).map(|(c, v)| c.rhs * v).sum();
    let ineq: f64 = problem
        .constraints
        .iter()
        .zip(&y)
        .filter(|(c, _)| c.relation == Relation::Le)
        .map(|(c, v)| v * (c.rhs - c.lhs(&x, &u)))
        .sum();
    let comp: f64 = x.iter().zip(&s).map(|(a, b)| a.dot(b)).sum();
    SdpSolution {
        x,
        u,
        y,
        s,
        objective_primal,
        objective_dual,
        gap: comp + ineq,
        status: sol.status,
        iterations: sol.iterations,
        log: sol.log,
    }
}

/// Recovery of split free variables.
///
/// Two diagonal entries whose columns and costs are exact negatives of each
/// other are the halves of `u = x_i - x_j`, which leaves the primal optimal
/// set unbounded and the dual without an interior. Each pair becomes one
/// free variable. Diagonal entries that appear nowhere are removed.
pub(crate) struct Merge {
    pub reduced: SdpProblem,
    /// Original block of each reduced block.
    block_map: Vec<usize>,
    /// Original diagonal index of each entry of a reduced diagonal block.
    diag_map: Vec<Vec<usize>>,
    /// `(block, i, j)` of each recovered free variable, in the order they
    /// follow the original ones.
    pairs: Vec<(usize, usize, usize)>,
}

/// Column of a diagonal entry over the constraints, and its cost.
fn diag_column(problem: &SdpProblem, block: usize, i: usize) -> (Vec<f64>, f64) {
    let coef = |m: &SparseSym| {
        m.entries
            .iter()
            .filter(|e| e.block == block && e.row == i && e.col == i)
            .map(|e| e.value)
            .sum::<f64>()
    };
    (problem.constraints.iter().map(|c| coef(&c.coeffs)).collect(), coef(&problem.objective))
}

pub(crate) fn merge(problem: &SdpProblem) -> Option<Merge> {
    let mut pairs = Vec::new();
    let mut removed: Vec<Vec<bool>> = problem.blocks.iter().map(|b| vec![false; b.size()]).collect();
    for (b, kind) in problem.blocks.iter().enumerate() {
        let BlockKind::Diag(n) = *kind else { continue };
        let cols: Vec<(Vec<f64>, f64)> = (0..n).map(|i| diag_column(problem, b, i)).collect();
        for i in 0..n {
            if removed[b][i] {
                continue;
            }
            let (ci, ki) = &cols[i];
            if ci.iter().all(|v| *v == 0.0) {
                if *ki == 0.0 {
                    removed[b][i] = true;
                }
                continue;
            }
            let partner = (i + 1..n).find(|&j| {
                let (cj, kj) = &cols[j];
                !removed[b][j] && *kj == -ki && cj.iter().zip(ci).all(|(a, c)| *a == -c)
            });
            if let Some(j) = partner {
                removed[b][i] = true;
                removed[b][j] = true;
                pairs.push((b, i, j));
            }
        }
    }
    if removed.iter().flatten().all(|r| !r) {
        return None;
    }
    let mut block_map = Vec::new();
    let mut diag_map = Vec::new();
    let mut new_index: Vec<Option<(usize, Vec<Option<usize>>)>> = Vec::new();
    let mut blocks = Vec::new();
    for (b, kind) in problem.blocks.iter().enumerate() {
        let keep: Vec<usize> = (0..kind.size()).filter(|&i| !removed[b][i]).collect();
        if keep.is_empty() {
            new_index.push(None);
            continue;
        }
        let mut idx = vec![None; kind.size()];
        for (r, &i) in keep.iter().enumerate() {
            idx[i] = Some(r);
        }
        new_index.push(Some((blocks.len(), idx)));
        blocks.push(match kind {
            BlockKind::Psd(n) => BlockKind::Psd(*n),
            BlockKind::Diag(_) => BlockKind::Diag(keep.len()),
        });
        block_map.push(b);
        diag_map.push(keep);
    }
    let remap = |m: &SparseSym| {
        let mut out = SparseSym::new();
        for e in &m.entries {
            if let Some((nb, idx)) = &new_index[e.block] {
                if let (Some(r), Some(c)) = (idx[e.row], idx[e.col]) {
                    out.push(*nb, r, c, e.value);
                }
            }
        }
        out
    };
    let constraints = problem
        .constraints
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut free = c.free.clone();
            free.extend(pairs.iter().map(|&(b, i, _)| diag_column(problem, b, i).0[k]));
            Constraint {
                coeffs: remap(&c.coeffs),
                free,
                rhs: c.rhs,
                relation: c.relation,
            }
        })
        .collect();
    let mut free_objective = problem.free_objective.clone();
    free_objective.extend(pairs.iter().map(|&(b, i, _)| diag_column(problem, b, i).1));
    Some(Merge {
        reduced: SdpProblem {
            blocks,
            objective: remap(&problem.objective),
            free_objective,
            constraints,
        },
        block_map,
        diag_map,
        pairs,
    })
}

impl Merge {
    pub fn lift(&self, problem: &SdpProblem, sol: SdpSolution) -> SdpSolution {
        let mut x = problem.zero_blocks();
        for (r, &b) in self.block_map.iter().enumerate() {
            match problem.blocks[b] {
                BlockKind::Psd(_) => x[b] = sol.x[r].clone(),
                BlockKind::Diag(_) => {
                    for (t, &i) in self.diag_map[r].iter().enumerate() {
                        x[b][(i, i)] = sol.x[r][(t, t)];
                    }
                }
            }
        }
        let nf = problem.num_free();
        for (p, &(b, i, j)) in self.pairs.iter().enumerate() {
            let v = sol.u[nf + p];
            x[b][(i, i)] = v.max(0.0);
            x[b][(j, j)] = (-v).max(0.0);
        }
        let u = sol.u[..nf].to_vec();
        let y = sol.y.clone();
        assemble(problem, x, u, y, sol)
    }
}
