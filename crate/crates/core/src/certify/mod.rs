//! Exact verification of the one-step proof certificates.
//!
//! Each check expands the aggregated constraints and the claimed
//! right-hand side as [`QForm`]s at a rational parameter point and
//! returns the difference, which must vanish coefficient by coefficient.
//! The minimizer is placed at the origin and `f* = 0`.

mod qform;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use qform::{Combo, QForm, BASIS, G0, G1, VALUES, X0, X1};

use crate::error::{Error, Result};
use crate::fclass::ExactParams;
use crate::rational::{exact_sqrt, int, sqrt_truncated, Exact};

/// Digits kept by the truncated square root in [`symmetric_form_check`].
pub const SYMMETRIC_DIGITS: u32 = 50;

/// Largest coefficient accepted on the truncated-root path: `10^-30`.
pub fn symmetric_tolerance() -> BigRational {
    BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 30))
}

/// An iterate in the one-step basis: position, value slot, gradient.
struct Pt {
    x: Combo,
    f: QForm,
    g: Combo,
}

impl Pt {
    fn star() -> Pt {
        Pt {
            x: Combo::zero(),
            f: QForm::zero(),
            g: Combo::zero(),
        }
    }

    fn iter(i: usize) -> Pt {
        let (x, g) = if i == 0 { (X0, G0) } else { (X1, G1) };
        Pt {
            x: Combo::unit(x),
            f: QForm::value(i),
            g: Combo::unit(g),
        }
    }
}

/// The interpolation condition between `i` and `j` written as `(...) >= 0`:
/// `f_i - f_j - <g_j, x_i - x_j> - (|g_i-g_j|^2/L + mu|x_i-x_j|^2
///  - 2 mu/L <g_i-g_j, x_i-x_j>) / (2(1 - mu/L))`.
fn interpolation(p: &ExactParams, i: &Pt, j: &Pt) -> QForm {
    let (mu, l) = (&p.mu, &p.l);
    let dx = &i.x - &j.x;
    let dg = &i.g - &j.g;
    let quad = &(&(&QForm::norm_sq(&dg) * &(int(1) / l)) + &(&QForm::norm_sq(&dx) * mu))
        - &(&QForm::inner(&dg, &dx) * &(int(2) * mu / l));
    let c = int(1) / (int(2) * (int(1) - mu / l));
    &(&(&i.f - &j.f) - &QForm::inner(&j.g, &dx)) - &(&quad * &c)
}

/// The five constraints of the exact line-search proof, each `>= 0`:
/// interpolation (0,1), (*,0), (*,1), `-g0.g1` and `g1.(x0 - x1)`.
pub fn five_inequalities(p: &ExactParams) -> [QForm; 5] {
    let (s, p0, p1) = (Pt::star(), Pt::iter(0), Pt::iter(1));
    [
        interpolation(p, &p0, &p1),
        interpolation(p, &s, &p0),
        interpolation(p, &s, &p1),
        -&QForm::inner(&Combo::unit(G0), &Combo::unit(G1)),
        QForm::inner(&Combo::unit(G1), &(&Combo::unit(X0) - &Combo::unit(X1))),
    ]
}

/// Multipliers and slack data of the exact line-search certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateExactLs {
    pub mu: Exact,
    #[serde(rename = "L")]
    pub l: Exact,
    pub y: [Exact; 5],
    /// Rate `((L - mu) / (L + mu))^2`.
    pub rate: Exact,
    pub c1: Exact,
    pub c2: Exact,
    pub s1: Combo,
    pub s2: Combo,
}

impl CertificateExactLs {
    pub fn multipliers(&self) -> [BigRational; 5] {
        self.y.clone().map(|e| e.0)
    }

    /// `rate f0 - c1 |s1|^2 - c2 |s2|^2`, the claimed upper bound on `f1`.
    pub fn key_rhs(&self) -> QForm {
        let a = &QForm::value(0) * &self.rate.0;
        let b = &QForm::norm_sq(&self.s1) * &self.c1.0;
        let c = &QForm::norm_sq(&self.s2) * &self.c2.0;
        &(&a - &b) - &c
    }

    pub fn all_positive(&self) -> bool {
        self.y.iter().chain([&self.c1, &self.c2]).all(|v| v.0.is_positive())
    }
}

pub fn multipliers_exact(p: &ExactParams) -> CertificateExactLs {
    let (mu, l) = (&p.mu, &p.l);
    let sum = l + mu;
    let diff = l - mu;
    let l3 = l + int(3) * mu;
    let y = [
        &diff / &sum,
        int(2) * mu * &diff / (&sum * &sum),
        int(2) * mu / &sum,
        int(2) / &sum,
        int(1),
    ];
    let rate = (&diff / &sum) * (&diff / &sum);
    let c1 = mu * l * &l3 / (int(2) * &sum * &sum);
    let c2 = int(2) * l * mu * mu / (l * l + int(2) * l * mu - int(3) * mu * mu);
    let s1 = Combo::of(&[
        (int(1), X0),
        (-(&sum / &l3), X1),
        (-((int(3) * l + mu) / (l * &l3)), G0),
        (-(&sum / (l * &l3)), G1),
    ]);
    let s2 = Combo::of(&[
        (int(1), X1),
        (-(&diff * &diff / (int(2) * mu * l * &sum)), G0),
        (-(&sum / (int(2) * mu * l)), G1),
    ]);
    CertificateExactLs {
        mu: Exact(mu.clone()),
        l: Exact(l.clone()),
        y: y.map(Exact),
        rate: Exact(rate),
        c1: Exact(c1),
        c2: Exact(c2),
        s1,
        s2,
    }
}

/// Aggregates the five constraints with the multipliers.
fn aggregate(forms: &[QForm], y: &[BigRational]) -> QForm {
    forms
        .iter()
        .zip(y)
        .fold(QForm::zero(), |acc, (q, w)| &acc + &(q * w))
}

/// `sum y_k I_k - (rhs - f1)`; identically zero when the certificate holds.
pub fn verify_identity_exact(p: &ExactParams) -> QForm {
    let cert = multipliers_exact(p);
    let agg = aggregate(&five_inequalities(p), &cert.multipliers());
    &agg - &(&cert.key_rhs() - &QForm::value(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqrtPath {
    /// `kappa` is a rational square and the check is exact.
    Exact,
    /// `sqrt(kappa)` truncated to [`SYMMETRIC_DIGITS`] digits.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricCheck {
    pub path: SqrtPath,
    pub sqrt_kappa: Exact,
    pub residual: QForm,
}

impl SymmetricCheck {
    pub fn passes(&self) -> bool {
        match self.path {
            SqrtPath::Exact => self.residual.is_zero(),
            SqrtPath::Truncated => self.residual.max_abs_coefficient() <= symmetric_tolerance(),
        }
    }
}

/// Compares the symmetric rewriting
/// `((1-k)/(1+k))^2 f0 - mu/4 (|s1|^2/(1+sqrt k) + |s2|^2/(1-sqrt k))`
/// with the key right-hand side.
pub fn symmetric_form_check(p: &ExactParams) -> SymmetricCheck {
    let (mu, l) = (&p.mu, &p.l);
    let kappa = mu / l;
    let (r, path) = match exact_sqrt(&kappa) {
        Some(r) => (r, SqrtPath::Exact),
        None => (sqrt_truncated(&kappa, SYMMETRIC_DIGITS), SqrtPath::Truncated),
    };
    // sqrt(L mu) = L sqrt(kappa)
    let q = &r * l;
    let one = int(1);
    let up = (&one + &r) * (&one + &r) / (&one + &kappa);
    let down = (&one - &r) * (&one - &r) / (&one + &kappa);
    let s1 = Combo::of(&[(-&up, X0), (&up / &q, G0), (one.clone(), X1), (&one / &q, G1)]);
    let s2 = Combo::of(&[(down.clone(), X0), (&down / &q, G0), (-&one, X1), (&one / &q, G1)]);
    let ratio = (&one - &kappa) / (&one + &kappa);
    let quarter = mu / int(4);
    let sym = &(&QForm::value(0) * &(&ratio * &ratio))
        - &(&(&(&QForm::norm_sq(&s1) * &(&one / (&one + &r))) + &(&QForm::norm_sq(&s2) * &(&one / (&one - &r))))
            * &quarter);
    let key = multipliers_exact(p).key_rhs();
    SymmetricCheck {
        path,
        sqrt_kappa: Exact(r),
        residual: &sym - &key,
    }
}

/// All quantities of the noisy certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateNoisy {
    pub mu: Exact,
    #[serde(rename = "L")]
    pub l: Exact,
    pub eps: Exact,
    pub l_eps: Exact,
    pub mu_eps: Exact,
    pub kappa_eps: Exact,
    pub rho_eps: Exact,
    /// Multipliers of interpolation (0,1), (*,0), (*,1) and line search.
    pub y: [Exact; 4],
    pub a: Exact,
    /// `[[a rho, -a], [-a, a / rho]]`.
    pub lmi: [[Exact; 2]; 2],
    pub alpha: [Exact; 5],
    pub k1: Exact,
    pub k2: Exact,
}

impl CertificateNoisy {
    /// `x0 + a1 x1 + a2 g0 + a3 g1`.
    pub fn v1(&self) -> Combo {
        let a = &self.alpha;
        Combo::of(&[(int(1), X0), (a[0].0.clone(), X1), (a[1].0.clone(), G0), (a[2].0.clone(), G1)])
    }

    /// `x1 + a4 g0 + a5 g1`.
    pub fn v2(&self) -> Combo {
        let a = &self.alpha;
        Combo::of(&[(int(1), X1), (a[3].0.clone(), G0), (a[4].0.clone(), G1)])
    }

    /// `rho^2 f0 - k1 |v1|^2 - k2 |v2|^2`.
    pub fn rhs(&self) -> QForm {
        let r2 = &self.rho_eps.0 * &self.rho_eps.0;
        let a = &QForm::value(0) * &r2;
        let b = &QForm::norm_sq(&self.v1()) * &self.k1.0;
        let c = &QForm::norm_sq(&self.v2()) * &self.k2.0;
        &(&a - &b) - &c
    }

    /// Singular with a positive diagonal, hence PSD of rank one.
    pub fn lmi_rank_one_psd(&self) -> bool {
        let m = &self.lmi;
        let det = &m[0][0].0 * &m[1][1].0 - &m[0][1].0 * &m[1][0].0;
        det.is_zero() && m[0][0].0.is_positive() && m[1][1].0.is_positive() && m[0][1] == m[1][0]
    }

    pub fn all_positive(&self) -> bool {
        self.y.iter().all(|v| v.0.is_positive()) && self.k1.0.is_positive() && self.k2.0.is_positive()
    }
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if eps.is_negative() || *eps >= BigRational::one() {
        return Err(Error::input(format!("eps must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

pub fn noisy_certificate(p: &ExactParams, eps: &BigRational) -> Result<CertificateNoisy> {
    check_eps(eps)?;
    let (mu, l) = (&p.mu, &p.l);
    let one = int(1);
    let le = (&one + eps) * l;
    let me = (&one - eps) * mu;
    let ke = &me / &le;
    let re = (&one - &ke) / (&one + &ke);
    let a = &one / (&le + &me);
    let y = [
        re.clone(),
        int(2) * &ke * (&one - &ke) / ((&one + &ke) * (&one + &ke)),
        int(2) * &ke / (&one + &ke),
        one.clone(),
    ];
    let lmi = [[&a * &re, -&a], [-&a, &a / &re]];
    let sum_e = &le + &me;
    let diff_e = &le - &me;
    let l3e = &le + int(3) * &me;
    let alpha = [
        -(&sum_e / &l3e),
        -((int(4) * l - &le + &me) / (l * &l3e)),
        &sum_e * (int(-4) * l + int(3) * &le + &me) / (l * &diff_e * &l3e),
        -((l - mu) * &diff_e / (int(2) * l * mu * &sum_e)),
        -((l + mu) / (int(2) * l * mu)),
    ];
    let k1 = l * mu * &diff_e * &l3e / (int(2) * (l - mu) * &sum_e * &sum_e);
    let k2 = int(2) * l * mu * &me / ((l - mu) * &l3e);
    Ok(CertificateNoisy {
        mu: Exact(mu.clone()),
        l: Exact(l.clone()),
        eps: Exact(eps.clone()),
        l_eps: Exact(le),
        mu_eps: Exact(me),
        kappa_eps: Exact(ke),
        rho_eps: Exact(re),
        y: y.map(Exact),
        a: Exact(a),
        lmi: lmi.map(|r| r.map(Exact)),
        alpha: alpha.map(Exact),
        k1: Exact(k1),
        k2: Exact(k2),
    })
}

/// The noisy system: the three interpolation conditions, the line-search
/// inequality `-g1.(x1 - x0) >= 0`, and the entries of the LMI block
/// `[[eps|g0|^2, g0.g1], [g0.g1, eps|g1|^2]] >= 0`.
pub fn noisy_constraints(p: &ExactParams, eps: &BigRational) -> ([QForm; 4], [[QForm; 2]; 2]) {
    let [i1, i2, i3, _, _] = five_inequalities(p);
    let j4 = -&QForm::inner(&Combo::unit(G1), &(&Combo::unit(X1) - &Combo::unit(X0)));
    let g00 = &QForm::norm_sq(&Combo::unit(G0)) * eps;
    let g01 = QForm::inner(&Combo::unit(G0), &Combo::unit(G1));
    let g11 = &QForm::norm_sq(&Combo::unit(G1)) * eps;
    ([i1, i2, i3, j4], [[g00, g01.clone()], [g01, g11]])
}

/// Scalar part plus the LMI inner product, before subtracting the bound.
fn noisy_aggregate(p: &ExactParams, cert: &CertificateNoisy) -> QForm {
    let (scalar, block) = noisy_constraints(p, &cert.eps.0);
    let y: Vec<BigRational> = cert.y.iter().map(|e| e.0.clone()).collect();
    let mut agg = aggregate(&scalar, &y);
    for i in 0..2 {
        for j in 0..2 {
            agg = &agg + &(&block[i][j] * &cert.lmi[i][j].0);
        }
    }
    agg
}

/// `sum y_k J_k + <Y, block> - (rhs - f1)`; identically zero when the
/// noisy certificate holds.
pub fn verify_noisy_identity(p: &ExactParams, eps: &BigRational) -> Result<QForm> {
    let cert = noisy_certificate(p, eps)?;
    let agg = noisy_aggregate(p, &cert);
    Ok(&agg - &(&cert.rhs() - &QForm::value(1)))
}

/// Term-by-term comparison of the noisy certificate at `eps = 0` with the
/// exact line-search certificate. Returns the names of disagreeing items.
pub fn noisy_zero_eps_mismatches(p: &ExactParams) -> Vec<String> {
    let zero = BigRational::zero();
    let noisy = noisy_certificate(p, &zero).expect("eps = 0 is valid");
    let exact = multipliers_exact(p);
    let ey = exact.multipliers();
    let mut bad = Vec::new();
    for k in 0..3 {
        if noisy.y[k].0 != ey[k] {
            bad.push(format!("y{}", k + 1));
        }
    }
    // line search keeps its unit weight
    if noisy.y[3].0 != ey[4] {
        bad.push("y5 (line search)".into());
    }
    // the off-diagonal of the LMI multiplier plays the role of y4
    if -(&noisy.lmi[0][1].0 * int(2)) != ey[3] {
        bad.push("y4 (lmi off-diagonal)".into());
    }
    if noisy.k1 != exact.c1 {
        bad.push("k1".into());
    }
    if noisy.k2 != exact.c2 {
        bad.push("k2".into());
    }
    if noisy.v1() != exact.s1 {
        bad.push("v1".into());
    }
    if noisy.v2() != exact.s2 {
        bad.push("v2".into());
    }
    if noisy.rhs() != exact.key_rhs() {
        bad.push("rhs".into());
    }
    let exact_agg = aggregate(&five_inequalities(p), &ey);
    let noisy_agg = noisy_aggregate(p, &noisy);
    for (name, c) in (&noisy_agg - &exact_agg).nonzero_terms() {
        bad.push(format!("aggregate {name}: {c}"));
    }
    bad
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedStepCheck {
    /// `y4 (-g0.g1) + y5 g1.(x0 - x1) - g1.(x0 - 2/(L+mu) g0 - x1)`.
    pub combined_residual: QForm,
    /// The combined form after `x1 = x0 - 2/(L+mu) g0`.
    pub substituted: QForm,
    /// Rank of the combined form's quadratic part.
    pub rank: usize,
}

impl FixedStepCheck {
    pub fn passes(&self) -> bool {
        self.combined_residual.is_zero() && self.substituted.is_zero() && self.rank <= 2
    }
}

pub fn fixed_step_combined_check(p: &ExactParams) -> FixedStepCheck {
    let cert = multipliers_exact(p);
    let y = cert.multipliers();
    let ineq = five_inequalities(p);
    let gamma = int(2) / (&p.l + &p.mu);
    let step = Combo::of(&[(int(1), X0), (-gamma.clone(), G0), (int(-1), X1)]);
    let combined = QForm::inner(&Combo::unit(G1), &step);
    let lhs = &(&ineq[3] * &y[3]) + &(&ineq[4] * &y[4]);
    let x1 = Combo::of(&[(int(1), X0), (-gamma, G0)]);
    FixedStepCheck {
        combined_residual: &lhs - &combined,
        substituted: combined.substitute(X1, &x1),
        rank: combined.rank(),
    }
}

/// Exact rate of the noisy method, `rho_eps^2`.
pub fn noisy_rate_exact(p: &ExactParams, eps: &BigRational) -> Result<BigRational> {
    let c = noisy_certificate(p, eps)?;
    Ok(&c.rho_eps.0 * &c.rho_eps.0)
}

/// `(L - mu)^2 / (L + mu)^2` for the sample parameters of the examples.
pub fn rate_exact(p: &ExactParams) -> BigRational {
    multipliers_exact(p).rate.0
}
