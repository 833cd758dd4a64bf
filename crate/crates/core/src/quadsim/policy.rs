//! Search-direction policies for the noisy gradient method.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Supplies the search direction `d_i` given the current gradient.
pub trait DirectionPolicy {
    fn direction(&mut self, iteration: usize, grad: &[f64]) -> Vec<f64>;
}

/// `d = -g`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegativeGradient;

impl DirectionPolicy for NegativeGradient {
    fn direction(&mut self, _iteration: usize, grad: &[f64]) -> Vec<f64> {
        grad.iter().map(|g| -g).collect()
    }
}

/// Rotates `-g` by a fixed angle in the plane of the first and last
/// coordinates.
///
/// On iteration `i` the pair `(g_1, g_n)` is mapped to
/// `(c g_1 - s g_n, s g_1 + c g_n)` with `c = cos(theta)` and
/// `s = sin(theta)`, i.e. the row vector `(g_1, g_n)` is multiplied by
/// `[[c, s], [-s, c]]`. With `alternating` the sign of `s` flips on odd
/// iterations. The angle to `-g` is `theta`, so the policy conforms to the
/// relative tolerance `eps = sin(theta)`.
#[derive(Debug, Clone, Copy)]
pub struct Rotation {
    cos: f64,
    sin: f64,
    alternating: bool,
}

/// Builds a [`Rotation`] policy; requires `0 <= theta < pi/2`.
pub fn rotation_policy(theta: f64, alternating: bool) -> Result<Rotation> {
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::input(format!(
            "rotation angle must satisfy 0 <= theta < pi/2, got {theta}"
        )));
    }
    Ok(Rotation {
        cos: theta.cos(),
        sin: theta.sin(),
        alternating,
    })
}

impl Rotation {
    /// Relative tolerance met by this policy, `sin(theta)`.
    pub fn eps(&self) -> f64 {
        self.sin
    }
}

impl DirectionPolicy for Rotation {
    fn direction(&mut self, iteration: usize, grad: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        let n = d.len();
        if n < 2 {
            return d;
        }
        let s = if self.alternating && iteration % 2 == 1 {
            -self.sin
        } else {
            self.sin
        };
        let (a, b) = (d[0], d[n - 1]);
        d[0] = self.cos * a - s * b;
        d[n - 1] = s * a + self.cos * b;
        d
    }
}

/// Rotates `-g` by a random angle `theta` with `|sin theta| <= eps` in a
/// random plane containing `g`. Seeded, so runs are reproducible.
#[derive(Debug, Clone)]
pub struct RandomRotation {
    max_angle: f64,
    rng: ChaCha8Rng,
}

impl RandomRotation {
    pub fn new(eps: f64, seed: u64) -> Result<Self> {
        crate::fclass::check_eps(eps)?;
        Ok(Self {
            max_angle: eps.asin(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl DirectionPolicy for RandomRotation {
    fn direction(&mut self, _iteration: usize, grad: &[f64]) -> Vec<f64> {
        let n = grad.len();
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        if n < 2 || gn == 0.0 || self.max_angle == 0.0 {
            return neg;
        }
        let theta = self.rng.random_range(-self.max_angle..=self.max_angle);
        // random unit vector orthogonal to g
        let u = loop {
            let mut u: Vec<f64> = (0..n).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            let proj = u.iter().zip(grad).map(|(a, b)| a * b).sum::<f64>() / (gn * gn);
            for (a, b) in u.iter_mut().zip(grad) {
                *a -= proj * b;
            }
            let un = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            if un > 1e-6 {
                break u.into_iter().map(|a| a / un).collect::<Vec<_>>();
            }
        };
        neg.iter()
            .zip(&u)
            .map(|(a, b)| theta.cos() * a + theta.sin() * gn * b)
            .collect()
    }
}
