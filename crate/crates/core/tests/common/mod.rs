//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn rate(mu: f64, l: f64) -> f64 {
    ((l - mu) / (l + mu)).powi(2)
}

pub fn noisy_rate(mu: f64, l: f64, eps: f64) -> f64 {
    let (le, me) = ((1.0 + eps) * l, (1.0 - eps) * mu);
    ((le - me) / (le + me)).powi(2)
}

/// `(y1..y5)` of the one-step exact line-search certificate.
pub fn exact_ls_duals(mu: f64, l: f64) -> [f64; 5] {
    let s = l + mu;
    [(l - mu) / s, 2.0 * mu * (l - mu) / (s * s), 2.0 * mu / s, 2.0 / s, 1.0]
}

/// `(y1..y4)` of the noisy certificate.
pub fn noisy_duals(mu: f64, l: f64, eps: f64) -> [f64; 4] {
    let k = mu * (1.0 - eps) / (l * (1.0 + eps));
    [(1.0 - k) / (1.0 + k), 2.0 * k * (1.0 - k) / ((1.0 + k) * (1.0 + k)), 2.0 * k / (1.0 + k), 1.0]
}

/// Interpolation inequality in the form
/// `f_i - f_j - <g_j, dx> - |dg|^2/(2L) - mu/(2(1-mu/L)) |dx - dg/L|^2`.
#[allow(clippy::too_many_arguments)]
pub fn interp_taylor(mu: &Q, l: &Q, xi: &[Q], fi: &Q, gi: &[Q], xj: &[Q], fj: &Q, gj: &[Q]) -> Q {
    let dx: Vec<Q> = xi.iter().zip(xj).map(|(a, b)| a - b).collect();
    let dg: Vec<Q> = gi.iter().zip(gj).map(|(a, b)| a - b).collect();
    let w: Vec<Q> = dx.iter().zip(&dg).map(|(a, b)| a - b / l).collect();
    let two = Q::from_integer(2.into());
    let kappa = mu / l;
    fi - fj - dot(gj, &dx) - dot(&dg, &dg) / (&two * l) - mu / (two * (Q::one() - kappa)) * dot(&w, &w)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (u, v)| acc + u * v)
}

/// A concrete evaluation point for one-step identities: vectors in `Q^3`
/// and two function values.
#[derive(Debug, Clone)]
pub struct Sample {
    pub x0: Vec<Q>,
    pub x1: Vec<Q>,
    pub g0: Vec<Q>,
    pub g1: Vec<Q>,
    pub f0: Q,
    pub f1: Q,
}

impl Sample {
    pub fn from_ints(v: &[i64; 14]) -> Self {
        let z = |s: &[i64]| s.iter().map(|&n| Q::from_integer(n.into())).collect::<Vec<_>>();
        Sample {
            x0: z(&v[0..3]),
            x1: z(&v[3..6]),
            g0: z(&v[6..9]),
            g1: z(&v[9..12]),
            f0: Q::from_integer(v[12].into()),
            f1: Q::from_integer(v[13].into()),
        }
    }

    /// Coordinates `(x0, x1, g0, g1)` of a basis combination.
    pub fn combo(&self, c: &[Q; 4]) -> Vec<Q> {
        (0..3)
            .map(|k| &c[0] * &self.x0[k] + &c[1] * &self.x1[k] + &c[2] * &self.g0[k] + &c[3] * &self.g1[k])
            .collect()
    }

    /// The five constraints of the one-step exact line-search proof.
    pub fn five(&self, mu: &Q, l: &Q) -> [Q; 5] {
        let z = vec![Q::zero(); 3];
        let zf = Q::zero();
        let diff: Vec<Q> = self.x0.iter().zip(&self.x1).map(|(a, b)| a - b).collect();
        [
            interp_taylor(mu, l, &self.x0, &self.f0, &self.g0, &self.x1, &self.f1, &self.g1),
            interp_taylor(mu, l, &z, &zf, &z, &self.x0, &self.f0, &self.g0),
            interp_taylor(mu, l, &z, &zf, &z, &self.x1, &self.f1, &self.g1),
            -dot(&self.g0, &self.g1),
            dot(&self.g1, &diff),
        ]
    }
}

/// Value of a quadratic form at a sample.
pub fn eval_form(form: &pepkit::certify::QForm, s: &Sample) -> Q {
    let basis = [&s.x0, &s.x1, &s.g0, &s.g1];
    let m = form.matrix();
    let mut v = form.constant_term().clone();
    for a in 0..4 {
        for b in 0..4 {
            v += &m[a][b] * dot(basis[a], basis[b]);
        }
    }
    let lin = form.linear();
    v + &lin[0] * &s.f0 + &lin[1] * &s.f1
}
