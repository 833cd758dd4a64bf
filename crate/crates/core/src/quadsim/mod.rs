//! Gradient-method simulators on diagonal quadratics.
//!
//! `f(x) = 1/2 * sum_i lambda_i x_i^2` has minimizer `0` and `f_* = 0`, so
//! trajectory values are directly the optimality gaps.

mod export;
pub mod oracle;
pub mod policy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fclass::{check_eps, ClassParams};

pub use policy::{rotation_policy, DirectionPolicy, NegativeGradient, RandomRotation, Rotation};

/// Iteration stops once `|g| <= STOP_REL * (1 + |x|)`.
pub const STOP_REL: f64 = 1e-14;

/// Relative tolerance for the orthogonality post-conditions.
pub const ORTHO_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `f(x) = 1/2 * sum lambda_i x_i^2` with all `lambda_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagQuadratic {
    lambdas: Vec<f64>,
}

impl DiagQuadratic {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::input("quadratic needs at least one eigenvalue"));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::input(format!("eigenvalues must be positive, got {bad}")));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Smallest eigenvalue.
    pub fn mu(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue.
    #[allow(non_snake_case)]
    pub fn L(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    /// Effective class parameters; fails when all eigenvalues coincide.
    pub fn class_params(&self) -> Result<ClassParams> {
        ClassParams::new(self.mu(), self.L())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.lambdas.iter().zip(x).map(|(l, v)| l * v * v).sum::<f64>()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.lambdas.iter().zip(x).map(|(l, v)| l * v).collect()
    }

    /// `v^T Q v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.lambdas.iter().zip(v).map(|(l, a)| l * a * a).sum()
    }

    /// `v^T Q^{-1} v`.
    pub fn inv_quad_form(&self, v: &[f64]) -> f64 {
        self.lambdas.iter().zip(v).map(|(l, a)| a * a / l).sum()
    }
}

/// A run of a gradient-type method.
///
/// `iterates[i + 1] = iterates[i] - steps[i] * directions[i]`; for gradient
/// descent the direction is the gradient itself, for the noisy method it is
/// the policy's search direction `d_i` (so the minimizing step is negative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
    /// `f(x_i) - f_*`.
    pub values: Vec<f64>,
    pub steps: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl Trajectory {
    fn start(q: &DiagQuadratic, x0: &[f64]) -> Self {
        Self {
            iterates: vec![x0.to_vec()],
            values: vec![q.value(x0)],
            steps: Vec::new(),
            directions: Vec::new(),
        }
    }

    fn push(&mut self, q: &DiagQuadratic, step: f64, direction: Vec<f64>) {
        let x = self.iterates.last().expect("trajectory is never empty");
        let next: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a - step * d).collect();
        self.values.push(q.value(&next));
        self.iterates.push(next);
        self.steps.push(step);
        self.directions.push(direction);
    }

    /// Number of completed steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Per-step ratios `(f_{i+1} - f_*)/(f_i - f_*)`; `None` where `f_i = f_*`.
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.values
            .windows(2)
            .map(|w| (w[0] > 0.0).then(|| w[1] / w[0]))
            .collect()
    }

    /// Largest per-step ratio, ignoring steps that start at the optimum.
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios().into_iter().flatten().reduce(f64::max)
    }

    /// Largest relative defects of the exact line-search conditions
    /// `g_{i+1}^T (x_{i+1} - x_i) = 0` and `g_{i+1}^T d_i = 0`, normalised by
    /// `|g_i| |x_{i+1} - x_i|` and `|g_i| |d_i|`.
    pub fn line_search_defects(&self, q: &DiagQuadratic) -> (f64, f64) {
        let mut step_defect: f64 = 0.0;
        let mut dir_defect: f64 = 0.0;
        for i in 0..self.len() {
            let gi = q.grad(&self.iterates[i]);
            let gn = q.grad(&self.iterates[i + 1]);
            let dx: Vec<f64> = self.iterates[i + 1]
                .iter()
                .zip(&self.iterates[i])
                .map(|(a, b)| a - b)
                .collect();
            let scale = norm(&gi);
            let s1 = scale * norm(&dx);
            if s1 > 0.0 {
                step_defect = step_defect.max(dot(&gn, &dx).abs() / s1);
            }
            let s2 = scale * norm(&self.directions[i]);
            if s2 > 0.0 {
                dir_defect = dir_defect.max(dot(&gn, &self.directions[i]).abs() / s2);
            }
        }
        (step_defect, dir_defect)
    }

    /// Largest `|g_{i+1}^T g_i| / (|g_i|^2)` over the run.
    pub fn successive_gradient_defect(&self, q: &DiagQuadratic) -> f64 {
        (0..self.len())
            .map(|i| {
                let gi = q.grad(&self.iterates[i]);
                let gn = q.grad(&self.iterates[i + 1]);
                let s = dot(&gi, &gi);
                if s > 0.0 {
                    dot(&gn, &gi).abs() / s
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

fn should_stop(g: &[f64], x: &[f64]) -> bool {
    norm(g) <= STOP_REL * (1.0 + norm(x))
}

/// Closed-form exact line-search step along the negative gradient:
/// `|g|^2 / (g^T Q g)`.
pub fn exact_ls_step(q: &DiagQuadratic, x: &[f64]) -> Result<f64> {
    q.check_dim(x)?;
    let g = q.grad(x);
    let gg = dot(&g, &g);
    if gg == 0.0 {
        return Err(Error::AtOptimum);
    }
    Ok(gg / q.quad_form(&g))
}

/// Gradient descent with exact line search for `iters` steps, stopping early
/// at a (numerically) stationary point.
pub fn run_exact_ls(q: &DiagQuadratic, x0: &[f64], iters: usize) -> Result<Trajectory> {
    q.check_dim(x0)?;
    let mut traj = Trajectory::start(q, x0);
    for _ in 0..iters {
        let x = traj.iterates.last().expect("nonempty");
        let g = q.grad(x);
        if should_stop(&g, x) {
            break;
        }
        let gamma = dot(&g, &g) / q.quad_form(&g);
        traj.push(q, gamma, g);
    }
    Ok(traj)
}

/// Gradient descent with constant step `gamma >= 0`.
pub fn run_fixed_step(q: &DiagQuadratic, x0: &[f64], gamma: f64, iters: usize) -> Result<Trajectory> {
    q.check_dim(x0)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::input(format!("step must be nonnegative, got {gamma}")));
    }
    let mut traj = Trajectory::start(q, x0);
    for _ in 0..iters {
        let g = q.grad(traj.iterates.last().expect("nonempty"));
        traj.push(q, gamma, g);
    }
    Ok(traj)
}

/// True iff some positive multiple of `d` lies within `eps * |g|` of `-g`,
/// i.e. the angle between `d` and `-g` is acute with sine at most `eps`.
///
/// Exact line search only sees the ray spanned by `d`, so the relative-error
/// condition is checked up to positive scaling.
pub fn direction_conforms(g: &[f64], d: &[f64], eps: f64) -> bool {
    let gd = dot(g, d);
    let gg = dot(g, g);
    let dd = dot(d, d);
    if gg == 0.0 {
        return true;
    }
    if !(gd < 0.0) || !dd.is_finite() {
        return false;
    }
    // sin^2 of the angle between d and -g
    let sin2 = (1.0 - gd * gd / (gg * dd)).max(0.0);
    sin2 <= eps * eps + 1e-12
}

/// Noisy gradient descent: at each step the policy supplies `d_i`, and the
/// step is the exact minimizer `gamma = g^T d / (d^T Q d)` of
/// `f(x_i - gamma d_i)`.
pub fn run_noisy(
    q: &DiagQuadratic,
    x0: &[f64],
    eps: f64,
    policy: &mut dyn DirectionPolicy,
    iters: usize,
) -> Result<Trajectory> {
    check_eps(eps)?;
    q.check_dim(x0)?;
    let mut traj = Trajectory::start(q, x0);
    for i in 0..iters {
        let x = traj.iterates.last().expect("nonempty");
        let g = q.grad(x);
        if should_stop(&g, x) {
            break;
        }
        let d = policy.direction(i, &g);
        if d.len() != g.len() {
            return Err(Error::Contract {
                iteration: i,
                detail: format!("direction has dimension {}, expected {}", d.len(), g.len()),
            });
        }
        if !direction_conforms(&g, &d, eps) {
            return Err(Error::Contract {
                iteration: i,
                detail: format!("search direction leaves the relative-error ball (eps = {eps})"),
            });
        }
        let gamma = dot(&g, &d) / q.quad_form(&d);
        let scale = norm(&g) * norm(&d);
        traj.push(q, gamma, d);
        let gn = q.grad(traj.iterates.last().expect("nonempty"));
        let defect = dot(&gn, traj.directions.last().expect("nonempty")).abs();
        if defect > ORTHO_TOL * scale {
            return Err(Error::Contract {
                iteration: i,
                detail: format!("new gradient not orthogonal to search direction ({defect:e})"),
            });
        }
    }
    Ok(traj)
}

/// Tight instance for exact line search: eigenvalues `(mu, ..., mu, L)` and
/// `x0 = (1/mu, 0, ..., 0, 1/L)`.
pub fn example1_start(params: &ClassParams, n: usize) -> Result<(DiagQuadratic, Vec<f64>)> {
    example_start(params, 1.0, n)
}

/// Tight instance for the noisy method:
/// `x0 = (1/mu, 0, ..., 0, sqrt((1 - eps)/(1 + eps)) / L)`.
pub fn example2_start(params: &ClassParams, eps: f64, n: usize) -> Result<(DiagQuadratic, Vec<f64>)> {
    check_eps(eps)?;
    example_start(params, ((1.0 - eps) / (1.0 + eps)).sqrt(), n)
}

fn example_start(params: &ClassParams, last_scale: f64, n: usize) -> Result<(DiagQuadratic, Vec<f64>)> {
    if n < 2 {
        return Err(Error::input(format!("example instances need n >= 2, got {n}")));
    }
    let (mu, l) = (params.mu(), params.L());
    let mut lambdas = vec![mu; n];
    lambdas[n - 1] = l;
    let mut x0 = vec![0.0; n];
    x0[0] = 1.0 / mu;
    x0[n - 1] = last_scale / l;
    Ok((DiagQuadratic::new(lambdas)?, x0))
}

/// `(mu + L)^2 / (4 mu L) - (x^T Q x)(x^T Q^{-1} x)` for a unit vector `x`,
/// where `mu`, `L` are the extreme eigenvalues of `q`. Nonnegative by the
/// Kantorovich inequality.
pub fn kantorovich_residual(q: &DiagQuadratic, x: &[f64]) -> Result<f64> {
    q.check_dim(x)?;
    let nx = norm(x);
    if (nx - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("expected a unit vector, |x| = {nx}")));
    }
    let (mu, l) = (q.mu(), q.L());
    let bound = (mu + l) * (mu + l) / (4.0 * mu * l);
    Ok(bound - q.quad_form(x) * q.inv_quad_form(x))
}

/// Checks `f(x_i) - f_* <= L/2 * ((L - mu)/(L + mu))^{2i} |x_0 - x_*|^2` for
/// every iterate, with relative slack `1e-10`.
pub fn bound_check_nesterov(traj: &Trajectory, params: &ClassParams, x0: &[f64]) -> bool {
    let r2 = dot(x0, x0);
    let c2 = params.contraction().powi(2);
    let mut factor = 0.5 * params.L() * r2;
    for v in &traj.values {
        if *v > factor * (1.0 + 1e-10) {
            return false;
        }
        factor *= c2;
    }
    true
}
