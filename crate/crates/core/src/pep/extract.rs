//! From SDP solutions back to PEP objects, and from trajectories to SDP
//! points.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{CompiledPep, ConstraintTag, GramIndex, InitialCondition, Point, Variant};
use crate::error::{Error, Result};
use crate::fclass::LabeledPoint;
use crate::quadsim::{DiagQuadratic, Trajectory};
use crate::sdp::{SdpSolution, Status};

/// Relative eigenvalue threshold for Gram factorization.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    /// Signed dual of every constraint, in compiled order.
    pub tagged: Vec<(ConstraintTag, f64)>,
    /// `y1..y5` (exact line search), `y1..y4` (noisy) or `y1..y3` (fixed
    /// step); only filled for `N = 1`.
    pub named: Vec<(String, f64)>,
    /// Dual slack of each noisy LMI block, i.e. its matrix multiplier.
    pub lmi: Vec<DMatrix<f64>>,
}

impl Multipliers {
    pub fn get(&self, tag: &ConstraintTag) -> Option<f64> {
        self.tagged.iter().find(|(t, _)| t == tag).map(|(_, v)| *v)
    }

    pub fn named(&self, name: &str) -> Option<f64> {
        self.named.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Maps the duals of an optimal solution to constraint tags and, for
/// `N = 1`, to the names `y1, y2, ...` of the one-step certificate.
///
/// For `<=` rows and for the orthogonality equalities as oriented by
/// [`super::build`] the certificate multipliers are nonnegative.
pub fn extract_multipliers(c: &CompiledPep, sol: &SdpSolution) -> Result<Multipliers> {
    if sol.status != Status::Optimal {
        return Err(Error::State(format!(
            "multipliers need an optimal solution, status is {:?}",
            sol.status
        )));
    }
    if sol.y.len() != c.tags.len() {
        return Err(Error::Dimension {
            expected: c.tags.len(),
            got: sol.y.len(),
        });
    }
    let tagged: Vec<(ConstraintTag, f64)> = c.tags.iter().copied().zip(sol.y.iter().copied()).collect();
    let lookup = |t: ConstraintTag| tagged.iter().find(|(u, _)| *u == t).map(|(_, v)| *v);
    let interp = |i: Point, j: Point| lookup(ConstraintTag::Interpolation { i, j });
    let mut named = Vec::new();
    if c.spec.n == 1 {
        let mut order = vec![
            interp(Point::Iter(0), Point::Iter(1)),
            interp(Point::Star, Point::Iter(0)),
            interp(Point::Star, Point::Iter(1)),
        ];
        match c.spec.variant {
            Variant::ExactLsRelaxed => {
                order.push(lookup(ConstraintTag::SuccessiveGradOrtho(0)));
                order.push(lookup(ConstraintTag::LineSearchOrtho(0)));
            }
            Variant::Noisy(_) => order.push(lookup(ConstraintTag::LineSearchOrtho(0))),
            Variant::FixedStep => {}
        }
        for (k, v) in order.into_iter().enumerate() {
            let v = v.ok_or_else(|| Error::State("compiled problem lacks a certificate constraint".into()))?;
            named.push((format!("y{}", k + 1), v));
        }
    }
    let lmi = match c.spec.variant {
        Variant::Noisy(_) => sol.s.iter().skip(1).cloned().collect(),
        _ => Vec::new(),
    };
    Ok(Multipliers { tagged, named, lmi })
}

/// Explicit vectors realizing the Gram block of `sol`, with the minimizer
/// `(0, 0, 0)` first. Any primal-feasible solution may be passed.
pub fn reconstruct_worst_case(c: &CompiledPep, sol: &SdpSolution) -> Result<Vec<LabeledPoint>> {
    let gram = sol
        .x
        .first()
        .ok_or_else(|| Error::input("solution has no Gram block"))?;
    reconstruct_from_gram(&c.basis, gram, &sol.u)
}

/// Factorizes `gram = V^T V` (rank-truncated at `1e-9 * lambda_max`) and
/// returns labelled points `*, 0, ..., N`. Points that coincide with an
/// earlier one are dropped.
pub fn reconstruct_from_gram(basis: &GramIndex, gram: &DMatrix<f64>, f: &[f64]) -> Result<Vec<LabeledPoint>> {
    let d = basis.dim();
    let n = basis.iterations();
    if gram.shape() != (d, d) {
        return Err(Error::Dimension {
            expected: d,
            got: gram.nrows(),
        });
    }
    if f.len() != n + 1 {
        return Err(Error::Dimension {
            expected: n + 1,
            got: f.len(),
        });
    }
    let sym = (gram + gram.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmin < -RANK_TOL * lmax.max(1.0) {
        return Err(Error::Numerical(format!(
            "Gram matrix is indefinite: smallest eigenvalue {lmin:e}"
        )));
    }
    let keep: Vec<usize> = (0..d)
        .filter(|&k| lmax > 0.0 && eig.eigenvalues[k] > RANK_TOL * lmax)
        .collect();
    let r = keep.len().max(1);
    // row t of V is sqrt(lambda_t) q_t^T
    let mut v = DMatrix::zeros(r, d);
    for (t, &k) in keep.iter().enumerate() {
        let s = eig.eigenvalues[k].sqrt();
        for col in 0..d {
            v[(t, col)] = s * eig.eigenvectors[(col, k)];
        }
    }
    let realize = |coef: &[f64]| -> Vec<f64> {
        (0..r)
            .map(|t| (0..d).map(|col| v[(t, col)] * coef[col]).sum())
            .collect()
    };
    let mut out: Vec<LabeledPoint> = Vec::with_capacity(n + 2);
    out.push(LabeledPoint::new("*", vec![0.0; r], 0.0, vec![0.0; r])?);
    for i in 0..=n {
        let p = Point::Iter(i);
        let lp = LabeledPoint::new(i.to_string(), realize(&basis.x(p)), f[i], realize(&basis.g(p)))?;
        if !out.iter().any(|q| q.x == lp.x && q.f == lp.f && q.g == lp.g) {
            out.push(lp);
        }
    }
    Ok(out)
}

/// A candidate primal point of a compiled PEP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub blocks: Vec<DMatrix<f64>>,
    pub u: Vec<f64>,
}

/// Builds the SDP point induced by data `(x_i - x_*, f_i - f_*, g_i)`,
/// `i = 0..N`, rescaled (`x, g` by `s`, `f` by `s^2`) so the initial
/// condition holds with equality; the rescaled data come from
/// `s^2 f(. / s)`, which lies in the same function class.
pub fn assignment_from_points(
    c: &CompiledPep,
    xs: &[Vec<f64>],
    fs: &[f64],
    gs: &[Vec<f64>],
) -> Result<Assignment> {
    let n = c.spec.n;
    if xs.len() < n + 1 || fs.len() < n + 1 || gs.len() < n + 1 {
        return Err(Error::input(format!("need {} points, got {}", n + 1, xs.len().min(fs.len()).min(gs.len()))));
    }
    let dim = xs[0].len();
    if xs[..=n].iter().chain(&gs[..=n]).any(|v| v.len() != dim) {
        return Err(Error::input("points have inconsistent dimensions"));
    }
    let start = match c.spec.initial {
        InitialCondition::FunctionGap => fs[0],
        InitialCondition::DistanceSq => xs[0].iter().map(|v| v * v).sum(),
    };
    let s2 = if start > 0.0 { c.spec.r / start } else { 1.0 };
    let s = s2.sqrt();

    let basis = &c.basis;
    let d = basis.dim();
    let mut v = DMatrix::zeros(dim, d);
    let eliminated = basis.is_eliminated();
    let mut col = 0;
    let mut put = |vec: &[f64], v: &mut DMatrix<f64>| {
        for (row, val) in vec.iter().enumerate() {
            v[(row, col)] = s * val;
        }
        col += 1;
    };
    if eliminated {
        put(&xs[0], &mut v);
    } else {
        for x in &xs[..=n] {
            put(x, &mut v);
        }
    }
    for g in &gs[..=n] {
        put(g, &mut v);
    }
    let gram = v.transpose() * &v;
    let mut blocks = vec![gram];
    if let Variant::Noisy(eps) = c.spec.variant {
        let dot = |a: &[f64], b: &[f64]| s2 * a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        for k in 0..n {
            let (a, b) = (&gs[k], &gs[k + 1]);
            let z12 = dot(a, b);
            blocks.push(DMatrix::from_row_slice(
                2,
                2,
                &[eps * dot(a, a), z12, z12, eps * dot(b, b)],
            ));
        }
    }
    Ok(Assignment {
        blocks,
        u: fs[..=n].iter().map(|f| s2 * f).collect(),
    })
}

/// [`assignment_from_points`] for a trajectory on a diagonal quadratic
/// (minimizer `0`, minimum `0`).
pub fn assignment_from_trajectory(c: &CompiledPep, q: &DiagQuadratic, traj: &Trajectory) -> Result<Assignment> {
    let n = c.spec.n;
    if traj.iterates.len() < n + 1 {
        return Err(Error::input(format!(
            "trajectory has {} iterates, PEP needs {}",
            traj.iterates.len(),
            n + 1
        )));
    }
    let xs: Vec<Vec<f64>> = traj.iterates[..=n].to_vec();
    let gs: Vec<Vec<f64>> = xs.iter().map(|x| q.grad(x)).collect();
    let fs: Vec<f64> = xs.iter().map(|x| q.value(x)).collect();
    assignment_from_points(c, &xs, &fs, &gs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentCheck {
    /// Largest constraint violation.
    pub max_violation: f64,
    /// Smallest eigenvalue over the PSD blocks.
    pub min_eigenvalue: f64,
    /// Objective `f_N` at the point.
    pub objective: f64,
}

impl AssignmentCheck {
    /// Feasible up to `tol`, relative to the scale `1 + R`.
    pub fn feasible(&self, scale: f64, tol: f64) -> bool {
        self.max_violation <= tol * (1.0 + scale) && self.min_eigenvalue >= -tol * (1.0 + scale)
    }
}

pub fn check_assignment(c: &CompiledPep, a: &Assignment) -> Result<AssignmentCheck> {
    let p = &c.problem;
    if a.blocks.len() != p.blocks.len() || a.u.len() != p.num_free() {
        return Err(Error::Dimension {
            expected: p.blocks.len(),
            got: a.blocks.len(),
        });
    }
    for (k, m) in p.blocks.iter().zip(&a.blocks) {
        if m.shape() != (k.size(), k.size()) {
            return Err(Error::Dimension {
                expected: k.size(),
                got: m.nrows(),
            });
        }
    }
    Ok(AssignmentCheck {
        max_violation: p.max_violation(&a.blocks, &a.u),
        min_eigenvalue: p.min_eigenvalue(&a.blocks),
        objective: p.objective_value(&a.blocks, &a.u),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fclass::{is_interpolable, ClassParams};
    use crate::pep::{build, PepSpec};
    use crate::quadsim::{example1_start, run_exact_ls};

    fn compiled() -> CompiledPep {
        let spec = PepSpec::new(
            ClassParams::new(1.0, 10.0).unwrap(),
            1,
            1.0,
            Variant::ExactLsRelaxed,
            InitialCondition::FunctionGap,
        )
        .unwrap();
        build(&spec).unwrap()
    }

    #[test]
    fn zero_gram_reconstructs_single_point() {
        let c = compiled();
        let pts = reconstruct_from_gram(&c.basis, &DMatrix::zeros(4, 4), &[0.0, 0.0]).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(is_interpolable(&pts, &c.spec.params, 1e-12).unwrap());
    }

    #[test]
    fn indefinite_gram_rejected() {
        let c = compiled();
        let mut g = DMatrix::identity(4, 4);
        g[(3, 3)] = -1e-3;
        assert!(matches!(
            reconstruct_from_gram(&c.basis, &g, &[0.0, 0.0]),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn example_trajectory_is_feasible_and_tight() {
        let c = compiled();
        let (q, x0) = example1_start(&c.spec.params, 3).unwrap();
        let t = run_exact_ls(&q, &x0, 1).unwrap();
        let a = assignment_from_trajectory(&c, &q, &t).unwrap();
        let chk = check_assignment(&c, &a).unwrap();
        assert!(chk.feasible(1.0, 1e-12), "{chk:?}");
        assert!((chk.objective - 81.0 / 121.0).abs() < 1e-12);
        let pts = reconstruct_from_gram(&c.basis, &a.blocks[0], &a.u).unwrap();
        assert!(is_interpolable(&pts, &c.spec.params, 1e-9).unwrap());
    }

    #[test]
    fn multipliers_require_optimal() {
        let c = compiled();
        let sol = SdpSolution {
            x: vec![DMatrix::zeros(4, 4)],
            u: vec![0.0; 2],
            y: vec![0.0; c.tags.len()],
            s: vec![DMatrix::zeros(4, 4)],
            objective_primal: 0.0,
            objective_dual: 0.0,
            gap: 0.0,
            status: Status::MaxIter,
            iterations: 0,
            log: vec![],
        };
        assert!(matches!(extract_multipliers(&c, &sol), Err(Error::State(_))));
    }
}
