//! Random strictly feasible SDP instances for testing the solver.
//!
//! A strictly feasible primal point `(X0, u0)` fixes `b`, and a strictly
//! feasible dual point `(y0, S0)` fixes `C` and `c`, so every instance has
//! a finite optimum attained on both sides.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockKind, Constraint, Relation, SdpProblem, SparseSym};

#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    /// Largest PSD block order.
    pub max_block: usize,
    pub max_constraints: usize,
    /// Allow `<=` rows, free variables and diagonal blocks.
    pub general: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            max_block: 4,
            max_constraints: 6,
            general: true,
        }
    }
}

/// Rounds to three decimals so exported files stay readable.
fn r3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let m = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
    m.map(r3)
}

pub fn random_feasible(seed: u64, spec: &RandomSpec) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        blocks.push(BlockKind::Psd(rng.random_range(1..=spec.max_block.max(1))));
    }
    if spec.general && rng.random_bool(0.5) {
        blocks.push(BlockKind::Diag(rng.random_range(1..=3)));
    }
    let dim: usize = blocks
        .iter()
        .map(|b| match *b {
            BlockKind::Psd(n) => n * (n + 1) / 2,
            BlockKind::Diag(n) => n,
        })
        .sum();
    let m = rng.random_range(1..=spec.max_constraints.max(1).min(dim));
    let nf = if spec.general { rng.random_range(0..=1) } else { 0 };

    let x0: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| match *b {
            BlockKind::Psd(n) => random_pd(&mut rng, n),
            BlockKind::Diag(n) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| r3(rng.random_range(0.5..2.0))))
            }
        })
        .collect();
    let s0: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|b| match *b {
            BlockKind::Psd(n) => random_pd(&mut rng, n),
            BlockKind::Diag(n) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| r3(rng.random_range(0.5..2.0))))
            }
        })
        .collect();
    let u0: Vec<f64> = (0..nf).map(|_| r3(rng.random_range(-1.0..1.0))).collect();

    let mut constraints = Vec::with_capacity(m);
    let mut y0 = Vec::with_capacity(m);
    for _ in 0..m {
        let mut a = SparseSym::new();
        for (bi, b) in blocks.iter().enumerate() {
            match *b {
                BlockKind::Psd(n) => {
                    for i in 0..n {
                        for j in i..n {
                            if rng.random_bool(0.7) {
                                a.push(bi, i, j, r3(rng.random_range(-1.0..1.0)));
                            }
                        }
                    }
                }
                BlockKind::Diag(n) => {
                    for i in 0..n {
                        a.push(bi, i, i, r3(rng.random_range(-1.0..1.0)));
                    }
                }
            }
        }
        let a = a.canonical();
        let free: Vec<f64> = (0..nf).map(|_| r3(rng.random_range(-1.0..1.0))).collect();
        let relation = if spec.general && rng.random_bool(0.3) {
            Relation::Le
        } else {
            Relation::Eq
        };
        let lhs = a.dot(&x0) + free.iter().zip(&u0).map(|(p, q)| p * q).sum::<f64>();
        let (rhs, yk) = match relation {
            Relation::Eq => (lhs, r3(rng.random_range(-1.0..1.0))),
            Relation::Le => (lhs + r3(rng.random_range(0.1..1.0)), r3(rng.random_range(0.1..1.0))),
        };
        y0.push(yk);
        constraints.push(Constraint {
            coeffs: a,
            free,
            rhs,
            relation,
        });
    }
    // C = sum y0_k A_k - S0, c = sum y0_k a_k
    let mut cm: Vec<DMatrix<f64>> = s0.iter().map(|s| -s).collect();
    for (c, yk) in constraints.iter().zip(&y0) {
        c.coeffs.add_to(*yk, &mut cm);
    }
    let mut objective = SparseSym::new();
    for (bi, mat) in cm.iter().enumerate() {
        let n = mat.nrows();
        for i in 0..n {
            let jr = if matches!(blocks[bi], BlockKind::Diag(_)) { i..i + 1 } else { i..n };
            for j in jr {
                objective.push(bi, i, j, mat[(i, j)]);
            }
        }
    }
    let free_objective = (0..nf)
        .map(|j| constraints.iter().zip(&y0).map(|(c, yk)| c.free[j] * yk).sum())
        .collect();
    SdpProblem {
        blocks,
        objective: objective.canonical(),
        free_objective,
        constraints,
    }
}
