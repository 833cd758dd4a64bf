//! The class of `L`-smooth, `mu`-strongly convex functions.
//!
//! Holds the class parameters, the pairwise interpolation conditions that
//! characterise which finite data sets `(x_i, f_i, g_i)` can be extended to a
//! member of the class, and the closed-form contraction factors of gradient
//! descent with exact line search.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for floating-point interpolability checks.
pub const INTERP_TOL: f64 = 1e-9;

/// Parameters `(mu, L)` of the function class, with `0 < mu < L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    mu: f64,
    l: f64,
}

impl ClassParams {
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        if !(mu.is_finite() && l.is_finite()) {
            return Err(Error::input("mu and L must be finite"));
        }
        if mu <= 0.0 {
            return Err(Error::input(format!("mu must be positive, got {mu}")));
        }
        if mu >= l {
            return Err(Error::input(format!(
                "mu must be strictly smaller than L (got mu={mu}, L={l})"
            )));
        }
        Ok(Self { mu, l })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[allow(non_snake_case)]
    pub fn L(&self) -> f64 {
        self.l
    }

    /// Condition ratio `mu / L`, in `(0, 1)`.
    pub fn kappa(&self) -> f64 {
        self.mu / self.l
    }

    /// Per-iteration contraction factor on the distance scale, `(L - mu)/(L + mu)`.
    pub fn contraction(&self) -> f64 {
        (self.l - self.mu) / (self.l + self.mu)
    }

    /// Worst-case per-iteration rate of exact line search on function values.
    pub fn rate(&self) -> f64 {
        rate(self)
    }

    /// The fixed step `2 / (mu + L)`.
    pub fn optimal_step(&self) -> f64 {
        2.0 / (self.mu + self.l)
    }
}

/// A point of interpolation data: location, function value and gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub label: String,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

impl LabeledPoint {
    pub fn new(label: impl Into<String>, x: Vec<f64>, f: f64, g: Vec<f64>) -> Result<Self> {
        if x.len() != g.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: g.len(),
            });
        }
        Ok(Self {
            label: label.into(),
            x,
            f,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Left-hand side minus right-hand side of the interpolation inequality for
/// the ordered pair `(i, j)`:
///
/// ```text
/// f_i - f_j - <g_j, x_i - x_j>
///     >= 1/(2(1 - mu/L)) * ( |g_i - g_j|^2 / L + mu |x_i - x_j|^2
///                            - 2 mu/L <g_j - g_i, x_j - x_i> )
/// ```
///
/// The pair condition holds iff the result is nonnegative.
pub fn interp_residual(pi: &LabeledPoint, pj: &LabeledPoint, params: &ClassParams) -> Result<f64> {
    let n = pi.dim();
    for len in [pi.g.len(), pj.x.len(), pj.g.len()] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                got: len,
            });
        }
    }
    let (mu, l) = (params.mu, params.l);
    let dx: Vec<f64> = pi.x.iter().zip(&pj.x).map(|(a, b)| a - b).collect();
    let dg: Vec<f64> = pi.g.iter().zip(&pj.g).map(|(a, b)| a - b).collect();
    let lhs = pi.f - pj.f - dot(&pj.g, &dx);
    // <g_j - g_i, x_j - x_i> = <dg, dx>
    let quad = dot(&dg, &dg) / l + mu * dot(&dx, &dx) - 2.0 * mu / l * dot(&dg, &dx);
    let rhs = quad / (2.0 * (1.0 - mu / l));
    Ok(lhs - rhs)
}

/// True iff every ordered pair `i != j` satisfies the interpolation
/// inequality up to `tol`.
pub fn is_interpolable(points: &[LabeledPoint], params: &ClassParams, tol: f64) -> Result<bool> {
    Ok(worst_interp_residual(points, params)?.is_none_or(|(r, _, _)| r >= -tol))
}

/// Smallest pairwise residual together with the offending ordered pair, or
/// `None` for a single point.
pub fn worst_interp_residual(
    points: &[LabeledPoint],
    params: &ClassParams,
) -> Result<Option<(f64, usize, usize)>> {
    let first = points
        .first()
        .ok_or_else(|| Error::input("interpolability needs at least one point"))?;
    let n = first.dim();
    for p in points {
        if p.x.len() != n || p.g.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: if p.x.len() != n { p.x.len() } else { p.g.len() },
            });
        }
    }
    let mut worst: Option<(f64, usize, usize)> = None;
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let r = interp_residual(pi, pj, params)?;
            if worst.is_none_or(|(w, _, _)| r < w) {
                worst = Some((r, i, j));
            }
        }
    }
    Ok(worst)
}

/// `((L - mu)/(L + mu))^2`.
pub fn rate(params: &ClassParams) -> f64 {
    let c = params.contraction();
    c * c
}

/// Rate of the noisy variant, `((1 - k)/(1 + k))^2` with
/// `k = (mu/L)(1 - eps)/(1 + eps)`.
pub fn noisy_rate(params: &ClassParams, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let k = params.kappa() * (1.0 - eps) / (1.0 + eps);
    let r = (1.0 - k) / (1.0 + k);
    Ok(r * r)
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::input(format!(
            "relative tolerance must satisfy 0 <= eps < 1, got {eps}"
        )));
    }
    Ok(())
}

/// Number of exact-line-search iterations that guarantees relative accuracy
/// `eps_acc` on function values:
/// `ceil( ln(1/eps) / (2 ln((L + mu)/(L - mu))) )`.
///
/// Quotients within `1e-9` (relative) of an integer are snapped to it, so
/// that `eps_acc = rate^k` returns exactly `k`.
pub fn iteration_bound(params: &ClassParams, eps_acc: f64) -> Result<u64> {
    if !(eps_acc > 0.0 && eps_acc < 1.0) {
        return Err(Error::input(format!(
            "target accuracy must lie in (0, 1), got {eps_acc}"
        )));
    }
    let (mu, l) = (params.mu, params.l);
    let v = 0.5 * (1.0 / eps_acc).ln() / ((l + mu) / (l - mu)).ln();
    let r = v.round();
    let n = if (v - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        v.ceil()
    };
    Ok(n.max(1.0) as u64)
}

/// Exact rational class parameters, `0 < mu < L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    pub mu: BigRational,
    pub l: BigRational,
}

impl ExactParams {
    pub fn new(mu: BigRational, l: BigRational) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::input(format!("mu must be positive, got {mu}")));
        }
        if mu >= l {
            return Err(Error::input(format!(
                "mu must be strictly smaller than L (got mu={mu}, L={l})"
            )));
        }
        Ok(Self { mu, l })
    }

    pub fn from_ints(mu: i64, l: i64) -> Result<Self> {
        Self::new(BigRational::from_integer(mu.into()), BigRational::from_integer(l.into()))
    }

    pub fn to_f64(&self) -> Result<ClassParams> {
        use num_traits::ToPrimitive;
        let mu = self.mu.to_f64().ok_or_else(|| Error::input("mu not representable"))?;
        let l = self.l.to_f64().ok_or_else(|| Error::input("L not representable"))?;
        ClassParams::new(mu, l)
    }
}

/// Interpolation data with exact rational coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPoint {
    pub label: String,
    pub x: Vec<BigRational>,
    pub f: BigRational,
    pub g: Vec<BigRational>,
}

fn qdot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (u, v)| acc + u * v)
}

/// Exact counterpart of [`interp_residual`].
pub fn interp_residual_exact(pi: &ExactPoint, pj: &ExactPoint, params: &ExactParams) -> Result<BigRational> {
    let n = pi.x.len();
    for len in [pi.g.len(), pj.x.len(), pj.g.len()] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                got: len,
            });
        }
    }
    let (mu, l) = (&params.mu, &params.l);
    let dx: Vec<BigRational> = pi.x.iter().zip(&pj.x).map(|(a, b)| a - b).collect();
    let dg: Vec<BigRational> = pi.g.iter().zip(&pj.g).map(|(a, b)| a - b).collect();
    let lhs = &pi.f - &pj.f - qdot(&pj.g, &dx);
    let two = BigRational::from_integer(2.into());
    let quad = qdot(&dg, &dg) / l + mu * qdot(&dx, &dx) - &two * mu / l * qdot(&dg, &dx);
    let rhs = quad / (two * (BigRational::one() - mu / l));
    Ok(lhs - rhs)
}

/// Exact interpolability: every pairwise residual is nonnegative (tolerance zero).
pub fn is_interpolable_exact(points: &[ExactPoint], params: &ExactParams) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::input("interpolability needs at least one point"));
    }
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            if i != j && interp_residual_exact(pi, pj, params)?.is_negative() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(label: &str, x: &[f64], f: f64, g: &[f64]) -> LabeledPoint {
        LabeledPoint::new(label, x.to_vec(), f, g.to_vec()).unwrap()
    }

    #[test]
    fn params_reject_degenerate() {
        assert!(ClassParams::new(1.0, 1.0).is_err());
        assert!(ClassParams::new(0.0, 1.0).is_err());
        assert!(ClassParams::new(2.0, 1.0).is_err());
        assert!(ClassParams::new(f64::NAN, 1.0).is_err());
        assert!(ClassParams::new(1.0, 1.0 + 1e-9).is_ok());
    }

    #[test]
    fn residual_identical_points_is_zero() {
        let p = ClassParams::new(1.0, 2.0).unwrap();
        let a = pt("0", &[0.3, -1.0], 2.5, &[1.0, 4.0]);
        assert_eq!(interp_residual(&a, &a, &p).unwrap(), 0.0);
    }

    #[test]
    fn residual_on_boundary_example() {
        // f(x) = x^2 sampled at 1 and 0.
        let p = ClassParams::new(1.0, 2.0).unwrap();
        let a = pt("1", &[1.0], 1.0, &[2.0]);
        let b = pt("0", &[0.0], 0.0, &[0.0]);
        assert!(interp_residual(&a, &b, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn residual_negative_for_nonconvex_pair() {
        let p = ClassParams::new(1.0, 2.0).unwrap();
        let a = pt("1", &[1.0], 0.0, &[0.0]);
        let b = pt("0", &[0.0], 1.0, &[0.0]);
        assert!(interp_residual(&a, &b, &p).unwrap() < 0.0);
        assert!(!is_interpolable(&[a, b], &p, 1e-9).unwrap());
    }

    #[test]
    fn residual_dimension_mismatch() {
        let p = ClassParams::new(1.0, 2.0).unwrap();
        let a = pt("0", &[1.0], 0.0, &[0.0]);
        let b = pt("1", &[0.0, 1.0], 1.0, &[0.0, 0.0]);
        assert!(matches!(interp_residual(&a, &b, &p), Err(Error::Dimension { .. })));
        assert!(LabeledPoint::new("x", vec![1.0], 0.0, vec![]).is_err());
    }

    #[test]
    fn interpolable_edge_cases() {
        let p = ClassParams::new(1.0, 10.0).unwrap();
        assert!(is_interpolable(&[], &p, 1e-9).is_err());
        assert!(is_interpolable(&[pt("0", &[3.0], -7.0, &[1.0])], &p, 1e-9).unwrap());
    }

    #[test]
    fn quadratic_samples_are_interpolable() {
        let (mu, l) = (1.0, 10.0);
        let p = ClassParams::new(mu, l).unwrap();
        let xs = [[1.0, 0.1], [-2.0, 3.0], [0.5, 0.5], [0.0, 0.0], [7.0, -1.25]];
        let pts: Vec<_> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = 0.5 * (mu * x[0] * x[0] + l * x[1] * x[1]);
                pt(&i.to_string(), x, f, &[mu * x[0], l * x[1]])
            })
            .collect();
        assert!(is_interpolable(&pts, &p, 1e-9).unwrap());
    }

    #[test]
    fn rate_values() {
        let p = ClassParams::new(1.0, 10.0).unwrap();
        assert!((rate(&p) - 81.0 / 121.0).abs() < 1e-15);
        let p3 = ClassParams::new(1.0, 3.0).unwrap();
        assert!((rate(&p3) - 0.25).abs() < 1e-15);
        let near = ClassParams::new(1.0, 1.0 + 1e-9).unwrap();
        assert!(rate(&near) < 1e-18);
    }

    #[test]
    fn noisy_rate_values() {
        let p = ClassParams::new(1.0, 10.0).unwrap();
        assert!((noisy_rate(&p, 0.0).unwrap() - 81.0 / 121.0).abs() < 1e-15);
        let r = 123.0_f64 / 137.0;
        assert!((noisy_rate(&p, 0.3).unwrap() - r * r).abs() < 1e-15);
        assert!(noisy_rate(&p, 1.0 - 1e-12).unwrap() > 1.0 - 1e-9);
        assert!(noisy_rate(&p, 1.0).is_err());
        assert!(noisy_rate(&p, -0.1).is_err());
    }

    #[test]
    fn iteration_bound_values() {
        let p = ClassParams::new(1.0, 10.0).unwrap();
        assert_eq!(iteration_bound(&p, 1e-3).unwrap(), 18);
        assert_eq!(iteration_bound(&p, rate(&p).powi(2)).unwrap(), 2);
        assert_eq!(iteration_bound(&p, 0.99).unwrap(), 1);
        assert!(iteration_bound(&p, 0.0).is_err());
        assert!(iteration_bound(&p, 1.0).is_err());
    }

    #[test]
    fn exact_residual_matches_float() {
        use num_bigint::BigInt;
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let params = ExactParams::new(q(1, 1), q(2, 1)).unwrap();
        let a = ExactPoint {
            label: "1".into(),
            x: vec![q(1, 1)],
            f: q(1, 1),
            g: vec![q(2, 1)],
        };
        let b = ExactPoint {
            label: "0".into(),
            x: vec![q(0, 1)],
            f: q(0, 1),
            g: vec![q(0, 1)],
        };
        assert!(interp_residual_exact(&a, &b, &params).unwrap().is_zero());
        assert!(is_interpolable_exact(&[a.clone(), b.clone()], &params).unwrap());
        let bad = ExactPoint { f: q(-1, 1), ..a };
        assert!(!is_interpolable_exact(&[bad, b], &params).unwrap());
    }
}
