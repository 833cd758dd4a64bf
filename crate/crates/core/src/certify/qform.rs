//! Exact quadratic forms over the one-step basis
//! `(x0 - x*, x1 - x*, g0, g1)` with linear slots for `f0 - f*`, `f1 - f*`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::Exact;

pub const BASIS: [&str; 4] = ["x0", "x1", "g0", "g1"];
pub const VALUES: [&str; 2] = ["f0", "f1"];

pub const X0: usize = 0;
pub const X1: usize = 1;
pub const G0: usize = 2;
pub const G1: usize = 3;

/// A vector written as a rational combination of the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combo(pub [BigRational; 4]);

impl Combo {
    pub fn zero() -> Self {
        Combo(std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn unit(i: usize) -> Self {
        let mut c = Combo::zero();
        c.0[i] = BigRational::one();
        c
    }

    /// `sum coef * basis[idx]`.
    pub fn of(terms: &[(BigRational, usize)]) -> Self {
        let mut c = Combo::zero();
        for (coef, idx) in terms {
            c.0[*idx] += coef;
        }
        c
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Combo(std::array::from_fn(|i| &self.0[i] * s))
    }
}

impl Add for &Combo {
    type Output = Combo;
    fn add(self, o: &Combo) -> Combo {
        Combo(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &Combo {
    type Output = Combo;
    fn sub(self, o: &Combo) -> Combo {
        Combo(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl Serialize for Combo {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Exact> = self.0.iter().cloned().map(Exact).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Combo {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Vec::<Exact>::deserialize(d)?;
        let arr: [Exact; 4] = v
            .try_into()
            .map_err(|v: Vec<Exact>| D::Error::custom(format!("expected 4 coefficients, got {}", v.len())))?;
        Ok(Combo(arr.map(|e| e.0)))
    }
}

/// `sum M[i][j] <b_i, b_j> + lin . (f0, f1) + constant` with `M` symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QForm {
    m: [[BigRational; 4]; 4],
    lin: [BigRational; 2],
    constant: BigRational,
}

impl QForm {
    pub fn zero() -> Self {
        QForm {
            m: std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero())),
            lin: std::array::from_fn(|_| BigRational::zero()),
            constant: BigRational::zero(),
        }
    }

    /// The function value `f_i - f*` (`i` in 0..2).
    pub fn value(i: usize) -> Self {
        let mut q = QForm::zero();
        q.lin[i] = BigRational::one();
        q
    }

    pub fn constant(c: BigRational) -> Self {
        let mut q = QForm::zero();
        q.constant = c;
        q
    }

    /// The inner product `<a, b>`.
    pub fn inner(a: &Combo, b: &Combo) -> Self {
        let half = BigRational::new(1.into(), 2.into());
        let mut q = QForm::zero();
        for i in 0..4 {
            for j in 0..4 {
                q.m[i][j] = (&a.0[i] * &b.0[j] + &a.0[j] * &b.0[i]) * &half;
            }
        }
        q
    }

    pub fn norm_sq(a: &Combo) -> Self {
        QForm::inner(a, a)
    }

    pub fn matrix(&self) -> &[[BigRational; 4]; 4] {
        &self.m
    }

    pub fn linear(&self) -> &[BigRational; 2] {
        &self.lin
    }

    pub fn constant_term(&self) -> &BigRational {
        &self.constant
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        QForm {
            m: std::array::from_fn(|i| std::array::from_fn(|j| &self.m[i][j] * s)),
            lin: std::array::from_fn(|i| &self.lin[i] * s),
            constant: &self.constant * s,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms().all(|(_, c)| c.is_zero())
    }

    /// Every coefficient with its name (`"x0*g1"`, `"f0"`, `"const"`);
    /// off-diagonal names carry the full coefficient of `<b_i, b_j>`.
    fn terms(&self) -> impl Iterator<Item = (String, BigRational)> + '_ {
        let quad = (0..4).flat_map(move |i| {
            (i..4).map(move |j| {
                let c = if i == j {
                    self.m[i][i].clone()
                } else {
                    &self.m[i][j] + &self.m[j][i]
                };
                (format!("{}*{}", BASIS[i], BASIS[j]), c)
            })
        });
        let lin = (0..2).map(move |i| (VALUES[i].to_string(), self.lin[i].clone()));
        quad.chain(lin)
            .chain(std::iter::once(("const".to_string(), self.constant.clone())))
    }

    /// Nonzero coefficients by name, for failure reports.
    pub fn nonzero_terms(&self) -> Vec<(String, BigRational)> {
        self.terms().filter(|(_, c)| !c.is_zero()).collect()
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.terms()
            .map(|(_, c)| c.abs())
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }

    /// Rank of the quadratic part, by exact elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.m.clone();
        let mut rank = 0;
        for col in 0..4 {
            let Some(p) = (rank..4).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in 0..4 {
                if r != rank && !a[r][col].is_zero() {
                    let f = &a[r][col] / &a[rank][col];
                    for c in 0..4 {
                        let v = &f * &a[rank][c];
                        a[r][c] -= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Replaces basis vector `idx` by the combination `by`, which must not
    /// itself involve `idx`.
    pub fn substitute(&self, idx: usize, by: &Combo) -> Self {
        assert!(by.0[idx].is_zero(), "substitution must eliminate the basis vector");
        // b = R b', with R the identity except row idx = by
        let r = |j: usize, l: usize| -> BigRational {
            if j == idx {
                by.0[l].clone()
            } else if j == l {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        };
        let mut out = QForm::zero();
        for l in 0..4 {
            for k in 0..4 {
                let mut acc = BigRational::zero();
                for i in 0..4 {
                    for j in 0..4 {
                        if !self.m[i][j].is_zero() {
                            acc += &self.m[i][j] * r(i, l) * r(j, k);
                        }
                    }
                }
                out.m[l][k] = acc;
            }
        }
        out.lin = self.lin.clone();
        out.constant = self.constant.clone();
        out
    }
}

impl Add for &QForm {
    type Output = QForm;
    fn add(self, o: &QForm) -> QForm {
        QForm {
            m: std::array::from_fn(|i| std::array::from_fn(|j| &self.m[i][j] + &o.m[i][j])),
            lin: std::array::from_fn(|i| &self.lin[i] + &o.lin[i]),
            constant: &self.constant + &o.constant,
        }
    }
}

impl Sub for &QForm {
    type Output = QForm;
    fn sub(self, o: &QForm) -> QForm {
        self + &(-o)
    }
}

impl Neg for &QForm {
    type Output = QForm;
    fn neg(self) -> QForm {
        self.scale(&-BigRational::one())
    }
}

impl Mul<&BigRational> for &QForm {
    type Output = QForm;
    fn mul(self, s: &BigRational) -> QForm {
        self.scale(s)
    }
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.nonzero_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (name, c)) in terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if name == "const" {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{name}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct QFormRepr {
    matrix: Vec<Vec<Exact>>,
    linear: Vec<Exact>,
    constant: Exact,
}

impl Serialize for QForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QFormRepr {
            matrix: self
                .m
                .iter()
                .map(|row| row.iter().cloned().map(Exact).collect())
                .collect(),
            linear: self.lin.iter().cloned().map(Exact).collect(),
            constant: Exact(self.constant.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = QFormRepr::deserialize(d)?;
        if r.matrix.len() != 4 || r.matrix.iter().any(|row| row.len() != 4) {
            return Err(D::Error::custom("quadratic part must be 4x4"));
        }
        if r.linear.len() != 2 {
            return Err(D::Error::custom("linear part must have 2 entries"));
        }
        let mut q = QForm::zero();
        for (i, row) in r.matrix.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                q.m[i][j] = v.0;
            }
        }
        for i in 0..4 {
            for j in 0..i {
                if q.m[i][j] != q.m[j][i] {
                    return Err(D::Error::custom("quadratic part is not symmetric"));
                }
            }
        }
        for (i, v) in r.linear.into_iter().enumerate() {
            q.lin[i] = v.0;
        }
        q.constant = r.constant.0;
        Ok(q)
    }
}
