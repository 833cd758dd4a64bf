//! Exact line search on general smooth oracles.
//!
//! Quadratics admit a closed-form step; for other members of the class the
//! minimizer along a ray is located by bracketing followed by bisection on
//! the directional derivative.

use super::{dot, norm, Trajectory, STOP_REL};
use crate::error::{Error, Result};

/// Bisection stops once `|phi'(gamma)| <= LS_TOL * |phi'(0)|`.
pub const LS_TOL: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 200;

/// A continuously differentiable objective with known minimum value.
pub trait SmoothOracle {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
    /// `f_*`.
    fn min_value(&self) -> f64;
}

impl SmoothOracle for super::DiagQuadratic {
    fn dim(&self) -> usize {
        super::DiagQuadratic::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        super::DiagQuadratic::value(self, x)
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        super::DiagQuadratic::grad(self, x)
    }
    fn min_value(&self) -> f64 {
        0.0
    }
}

/// `f(x) = sum_i mu/2 x_i^2 + (L - mu) ln cosh(x_i)`.
///
/// The second derivative along each axis is `mu + (L - mu) sech^2(x_i)`, which
/// lies in `(mu, L]`, so `f` belongs to the class with parameters `(mu, L)`.
#[derive(Debug, Clone, Copy)]
pub struct LogCosh {
    pub mu: f64,
    pub l: f64,
    pub n: usize,
}

fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl SmoothOracle for LogCosh {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|t| 0.5 * self.mu * t * t + (self.l - self.mu) * ln_cosh(*t))
            .sum()
    }
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|t| self.mu * t + (self.l - self.mu) * t.tanh())
            .collect()
    }
    fn min_value(&self) -> f64 {
        0.0
    }
}

fn point(x: &[f64], gamma: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a - gamma * b).collect()
}

/// Minimizer of `phi(gamma) = f(x - gamma d)` over `gamma >= 0`, assuming
/// `d^T grad f(x) > 0`.
pub fn line_search<O: SmoothOracle + ?Sized>(oracle: &O, x: &[f64], d: &[f64]) -> Result<f64> {
    let dphi = |gamma: f64| -dot(d, &oracle.grad(&point(x, gamma, d)));
    let d0 = dphi(0.0);
    if !(d0 < 0.0) {
        return Err(Error::input("line search direction is not a descent direction"));
    }
    let tol = LS_TOL * d0.abs();
    let mut hi = 1.0 / norm(d).max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    let mut bracketed = false;
    for _ in 0..MAX_BISECTIONS {
        let v = dphi(hi);
        if v >= 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !bracketed {
        return Err(Error::Numerical("could not bracket the line-search minimizer".into()));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let v = dphi(mid);
        if v.abs() <= tol {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Gradient descent with bisection-based exact line search on `oracle`.
pub fn run_exact_ls_oracle<O: SmoothOracle + ?Sized>(oracle: &O, x0: &[f64], iters: usize) -> Result<Trajectory> {
    if x0.len() != oracle.dim() {
        return Err(Error::Dimension {
            expected: oracle.dim(),
            got: x0.len(),
        });
    }
    let fstar = oracle.min_value();
    let mut traj = Trajectory {
        iterates: vec![x0.to_vec()],
        values: vec![oracle.value(x0) - fstar],
        steps: Vec::new(),
        directions: Vec::new(),
    };
    for _ in 0..iters {
        let x = traj.iterates.last().expect("nonempty").clone();
        let g = oracle.grad(&x);
        if norm(&g) <= STOP_REL * (1.0 + norm(&x)) {
            break;
        }
        let gamma = line_search(oracle, &x, &g)?;
        let next = point(&x, gamma, &g);
        traj.values.push(oracle.value(&next) - fstar);
        traj.iterates.push(next);
        traj.steps.push(gamma);
        traj.directions.push(g);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fclass::{rate, ClassParams};
    use crate::quadsim::{run_exact_ls, DiagQuadratic};

    #[test]
    fn bisection_matches_closed_form_on_quadratics() {
        let q = DiagQuadratic::new(vec![1.0, 4.0, 10.0]).unwrap();
        let x0 = [1.0, -1.0, 0.3];
        let a = run_exact_ls(&q, &x0, 5).unwrap();
        let b = run_exact_ls_oracle(&q, &x0, 5).unwrap();
        for (s, t) in a.steps.iter().zip(&b.steps) {
            assert!((s - t).abs() < 1e-9 * s);
        }
    }

    #[test]
    fn logcosh_respects_rate() {
        let params = ClassParams::new(1.0, 10.0).unwrap();
        let f = LogCosh { mu: 1.0, l: 10.0, n: 3 };
        let t = run_exact_ls_oracle(&f, &[2.0, -0.7, 0.4], 25).unwrap();
        for r in t.ratios().into_iter().flatten() {
            assert!(r <= rate(&params) + 1e-9);
        }
        assert!(t.values.last().unwrap() < &1e-3);
    }

    #[test]
    fn ln_cosh_is_stable() {
        assert!((ln_cosh(0.0)).abs() < 1e-16);
        assert!((ln_cosh(1000.0) - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert!((ln_cosh(0.5) - 0.5_f64.cosh().ln()).abs() < 1e-15);
    }
}
