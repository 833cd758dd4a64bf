//! Performance-estimation problems compiled to block SDPs.
//!
//! The unknowns are the Gram matrix of the iterates and gradients
//! (with the minimizer normalized to `x_* = 0`, `g_* = 0`, `f_* = 0`) and the
//! function values `f_0, ..., f_N`, which enter as free SDP variables.

mod extract;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fclass::{self, ClassParams};
use crate::sdp::{BlockKind, Constraint, Relation, SdpProblem, SparseSym};

pub use extract::{
    assignment_from_points, assignment_from_trajectory, check_assignment, extract_multipliers,
    reconstruct_from_gram, reconstruct_worst_case, Assignment, Multipliers,
};

/// Largest supported iteration count.
pub const MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    /// Exact line search, encoded by its two orthogonality relations.
    ExactLsRelaxed,
    /// Fixed step `2 / (mu + L)`.
    FixedStep,
    /// Directions within relative distance `eps` of `-g`, exact line search.
    Noisy(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `f_0 - f_* <= R`.
    FunctionGap,
    /// `|x_0 - x_*|^2 <= R`.
    DistanceSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PepSpec {
    pub params: ClassParams,
    pub n: usize,
    pub r: f64,
    pub variant: Variant,
    pub initial: InitialCondition,
}

impl PepSpec {
    pub fn new(params: ClassParams, n: usize, r: f64, variant: Variant, initial: InitialCondition) -> Result<Self> {
        let s = Self {
            params,
            n,
            r,
            variant,
            initial,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_N {
            return Err(Error::input(format!(
                "N must be in 1..={MAX_N}, got {}",
                self.n
            )));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::input(format!("R must be positive, got {}", self.r)));
        }
        if let Variant::Noisy(eps) = self.variant {
            fclass::check_eps(eps)?;
        }
        ClassParams::new(self.params.mu(), self.params.L())?;
        Ok(())
    }

    /// Per-iteration contraction of the function gap proven for the variant.
    pub fn rate(&self) -> f64 {
        match self.variant {
            Variant::ExactLsRelaxed | Variant::FixedStep => self.params.rate(),
            Variant::Noisy(eps) => fclass::noisy_rate(&self.params, eps).unwrap_or(f64::NAN),
        }
    }

    /// Analytic bound on `f_N - f_*`: `rate^N R` for a function-gap start and
    /// `L/2 rate^N R` for a distance start (an upper bound, not always tight).
    pub fn analytic_bound(&self) -> f64 {
        let base = self.rate().powi(self.n as i32) * self.r;
        match self.initial {
            InitialCondition::FunctionGap => base,
            InitialCondition::DistanceSq => 0.5 * self.params.L() * base,
        }
    }
}

/// A point of the PEP: the minimizer or iterate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Point {
    Star,
    Iter(usize),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Star => write!(f, "*"),
            Point::Iter(i) => write!(f, "{i}"),
        }
    }
}

/// Origin of a compiled constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintTag {
    /// `f_i >= f_j + <g_j, x_i - x_j> + ...`, the interpolation inequality in
    /// which `j` supplies the gradient.
    Interpolation { i: Point, j: Point },
    /// `g_{i+1}^T (x_{i+1} - x_i) = 0`.
    LineSearchOrtho(usize),
    /// `g_{i+1}^T g_i = 0`.
    SuccessiveGradOrtho(usize),
    InitialCondition,
    /// Link between entry `(row, col)` of the LMI block of step `step` and
    /// the Gram matrix.
    NoisyLmi { step: usize, row: usize, col: usize },
    /// `w^T X v_step = 0` with `v_k = x_{k+1} - x_k + gamma g_k`; `w` is the
    /// unit vector `component` when `component < dim`, else
    /// `v_{component - dim}`.
    FixedStepLink { step: usize, component: usize },
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintTag::Interpolation { i, j } => write!(f, "interp({i},{j})"),
            ConstraintTag::LineSearchOrtho(i) => write!(f, "line_search({i})"),
            ConstraintTag::SuccessiveGradOrtho(i) => write!(f, "grad_ortho({i})"),
            ConstraintTag::InitialCondition => write!(f, "initial"),
            ConstraintTag::NoisyLmi { step, row, col } => write!(f, "lmi({step};{row},{col})"),
            ConstraintTag::FixedStepLink { step, component } => {
                write!(f, "fixed_step_link({step};{component})")
            }
        }
    }
}

/// Basis of the Gram matrix and the expression of every PEP vector in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramIndex {
    pub labels: Vec<String>,
    n: usize,
    /// Step used to eliminate `x_1..x_N`, if any.
    eliminated_step: Option<f64>,
}

impl GramIndex {
    /// Basis `x_0..x_N, g_0..g_N`.
    pub fn full(n: usize) -> Self {
        let mut labels: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
        labels.extend((0..=n).map(|i| format!("g{i}")));
        Self {
            labels,
            n,
            eliminated_step: None,
        }
    }

    /// Basis `x_0, g_0..g_N`, with `x_{i+1} = x_i - step g_i`.
    pub fn eliminated(n: usize, step: f64) -> Self {
        let mut labels = vec!["x0".to_string()];
        labels.extend((0..=n).map(|i| format!("g{i}")));
        Self {
            labels,
            n,
            eliminated_step: Some(step),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn iterations(&self) -> usize {
        self.n
    }

    pub fn is_eliminated(&self) -> bool {
        self.eliminated_step.is_some()
    }

    /// Coefficients of `x_p` in the basis.
    pub fn x(&self, p: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let Point::Iter(i) = p else { return v };
        match self.eliminated_step {
            None => v[i] = 1.0,
            Some(step) => {
                v[0] = 1.0;
                for k in 0..i {
                    v[1 + k] = -step;
                }
            }
        }
        v
    }

    /// Coefficients of `g_p` in the basis.
    pub fn g(&self, p: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let Point::Iter(i) = p else { return v };
        let off = if self.is_eliminated() { 1 } else { self.n + 1 };
        v[off + i] = 1.0;
        v
    }
}

/// Affine form in the Gram matrix, the function values and a constant.
#[derive(Debug, Clone)]
struct Form {
    gram: DMatrix<f64>,
    f: Vec<f64>,
}

impl Form {
    fn new(d: usize, n: usize) -> Self {
        Self {
            gram: DMatrix::zeros(d, d),
            f: vec![0.0; n + 1],
        }
    }

    /// `+= c <u, v>`.
    fn inner(&mut self, c: f64, u: &[f64], v: &[f64]) {
        for (i, ui) in u.iter().enumerate() {
            if *ui == 0.0 {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                let t = 0.5 * c * ui * vj;
                self.gram[(i, j)] += t;
                self.gram[(j, i)] += t;
            }
        }
    }

    fn fval(&mut self, c: f64, p: Point) {
        if let Point::Iter(i) = p {
            self.f[i] += c;
        }
    }

    fn to_sparse(&self) -> SparseSym {
        let mut s = SparseSym::new();
        let d = self.gram.nrows();
        for i in 0..d {
            for j in i..d {
                let v = self.gram[(i, j)];
                if v != 0.0 {
                    s.push(0, i, j, v);
                }
            }
        }
        s
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// The compiled problem with one tag per constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledPep {
    pub spec: PepSpec,
    pub problem: SdpProblem,
    pub tags: Vec<ConstraintTag>,
    pub basis: GramIndex,
}

impl CompiledPep {
    pub fn position(&self, tag: &ConstraintTag) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    pub fn num_interpolation(&self) -> usize {
        self.tags
            .iter()
            .filter(|t| matches!(t, ConstraintTag::Interpolation { .. }))
            .count()
    }
}

struct Builder {
    basis: GramIndex,
    n: usize,
    constraints: Vec<Constraint>,
    tags: Vec<ConstraintTag>,
    blocks: Vec<BlockKind>,
}

impl Builder {
    fn form(&self) -> Form {
        Form::new(self.basis.dim(), self.n)
    }

    fn push(&mut self, tag: ConstraintTag, form: &Form, extra: Option<SparseSym>, rhs: f64, rel: Relation) {
        let mut coeffs = form.to_sparse();
        if let Some(e) = extra {
            coeffs.entries.extend(e.entries);
        }
        self.constraints.push(Constraint {
            coeffs: coeffs.canonical(),
            free: form.f.clone(),
            rhs,
            relation: rel,
        });
        self.tags.push(tag);
    }

    fn interpolation(&mut self, params: &ClassParams) {
        let (mu, l) = (params.mu(), params.L());
        let c = l / (2.0 * (l - mu));
        let pts: Vec<Point> = std::iter::once(Point::Star)
            .chain((0..=self.n).map(Point::Iter))
            .collect();
        for &i in &pts {
            for &j in &pts {
                if i == j {
                    continue;
                }
                let (xi, xj) = (self.basis.x(i), self.basis.x(j));
                let (gi, gj) = (self.basis.g(i), self.basis.g(j));
                let dx = sub(&xi, &xj);
                let dg = sub(&gi, &gj);
                let mut f = self.form();
                f.fval(1.0, j);
                f.fval(-1.0, i);
                f.inner(1.0, &gj, &dx);
                f.inner(c / l, &dg, &dg);
                f.inner(c * mu, &dx, &dx);
                // -(2 mu / L) <g_j - g_i, x_j - x_i> = -(2 mu / L) <dg, dx>
                f.inner(-c * 2.0 * mu / l, &dg, &dx);
                self.push(ConstraintTag::Interpolation { i, j }, &f, None, 0.0, Relation::Le);
            }
        }
    }

    fn line_search(&mut self, k: usize) {
        let mut f = self.form();
        let g1 = self.basis.g(Point::Iter(k + 1));
        let dx = sub(&self.basis.x(Point::Iter(k + 1)), &self.basis.x(Point::Iter(k)));
        f.inner(1.0, &g1, &dx);
        self.push(ConstraintTag::LineSearchOrtho(k), &f, None, 0.0, Relation::Eq);
    }

    fn grad_ortho(&mut self, k: usize) {
        let mut f = self.form();
        f.inner(1.0, &self.basis.g(Point::Iter(k + 1)), &self.basis.g(Point::Iter(k)));
        self.push(ConstraintTag::SuccessiveGradOrtho(k), &f, None, 0.0, Relation::Eq);
    }

    /// Adds block `Z` and the links
    /// `Z = [[eps |g_k|^2, g_k^T g_{k+1}], [., eps |g_{k+1}|^2]]`.
    fn lmi(&mut self, k: usize, eps: f64) {
        let blk = self.blocks.len();
        self.blocks.push(BlockKind::Psd(2));
        let ga = self.basis.g(Point::Iter(k));
        let gb = self.basis.g(Point::Iter(k + 1));
        for (row, col) in [(0, 0), (0, 1), (1, 1)] {
            let mut f = self.form();
            let mut z = SparseSym::new();
            match (row, col) {
                (0, 0) => {
                    z.push(blk, 0, 0, 1.0);
                    f.inner(-eps, &ga, &ga);
                }
                (0, 1) => {
                    z.push(blk, 0, 1, 0.5);
                    f.inner(-1.0, &ga, &gb);
                }
                _ => {
                    z.push(blk, 1, 1, 1.0);
                    f.inner(-eps, &gb, &gb);
                }
            }
            self.push(
                ConstraintTag::NoisyLmi { step: k, row, col },
                &f,
                Some(z),
                0.0,
                Relation::Eq,
            );
        }
    }

    fn initial(&mut self, spec: &PepSpec) {
        let mut f = self.form();
        match spec.initial {
            InitialCondition::FunctionGap => f.fval(1.0, Point::Iter(0)),
            InitialCondition::DistanceSq => {
                let x0 = self.basis.x(Point::Iter(0));
                f.inner(1.0, &x0, &x0);
            }
        }
        self.push(ConstraintTag::InitialCondition, &f, None, spec.r, Relation::Le);
    }

    fn finish(self, spec: &PepSpec) -> CompiledPep {
        let mut free_objective = vec![0.0; self.n + 1];
        free_objective[self.n] = 1.0;
        CompiledPep {
            spec: *spec,
            problem: SdpProblem {
                blocks: self.blocks,
                objective: SparseSym::new(),
                free_objective,
                constraints: self.constraints,
            },
            tags: self.tags,
            basis: self.basis,
        }
    }
}

fn builder(spec: &PepSpec, basis: GramIndex) -> Builder {
    let d = basis.dim();
    Builder {
        basis,
        n: spec.n,
        constraints: Vec::new(),
        tags: Vec::new(),
        blocks: vec![BlockKind::Psd(d)],
    }
}

/// Compiles `spec`. Constraint order: interpolation pairs over
/// `*, 0, ..., N` (row-major, `*` first), then the per-step constraints of
/// the variant, then the initial condition.
pub fn build(spec: &PepSpec) -> Result<CompiledPep> {
    spec.validate()?;
    let n = spec.n;
    let basis = match spec.variant {
        Variant::FixedStep => GramIndex::eliminated(n, spec.params.optimal_step()),
        _ => GramIndex::full(n),
    };
    let mut b = builder(spec, basis);
    b.interpolation(&spec.params);
    match spec.variant {
        Variant::ExactLsRelaxed => {
            for k in 0..n {
                b.line_search(k);
                b.grad_ortho(k);
            }
        }
        Variant::Noisy(eps) => {
            for k in 0..n {
                b.line_search(k);
                b.lmi(k, eps);
            }
        }
        Variant::FixedStep => {}
    }
    b.initial(spec);
    Ok(b.finish(spec))
}

/// Fixed-step PEP over the full basis `x_0..x_N, g_0..g_N`, with the step
/// relation imposed by `X v_k = 0` for `v_k = x_{k+1} - x_k + gamma g_k`,
/// written as a linearly independent set of rows.
/// Used to cross-check the eliminated form returned by [`build`].
pub fn build_fixed_step_explicit(spec: &PepSpec) -> Result<CompiledPep> {
    spec.validate()?;
    if spec.variant != Variant::FixedStep {
        return Err(Error::input("explicit form only exists for the fixed-step variant"));
    }
    let n = spec.n;
    let gamma = spec.params.optimal_step();
    let mut b = builder(spec, GramIndex::full(n));
    b.interpolation(&spec.params);
    let d = b.basis.dim();
    let vs: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut v = sub(&b.basis.x(Point::Iter(k + 1)), &b.basis.x(Point::Iter(k)));
            for (a, g) in v.iter_mut().zip(b.basis.g(Point::Iter(k))) {
                *a += gamma * g;
            }
            v
        })
        .collect();
    // v_k replaces the unit vector of x_{k+1} in the basis; pairing each v_k
    // with the remaining unit vectors and with v_0..v_k gives independent rows
    let replaced: Vec<usize> = (1..=n)
        .map(|i| b.basis.x(Point::Iter(i)).iter().position(|c| *c != 0.0).expect("x_i is a basis vector"))
        .collect();
    for (k, v) in vs.iter().enumerate() {
        let units = (0..d).filter(|c| !replaced.contains(c)).map(|c| {
            let mut e = vec![0.0; d];
            e[c] = 1.0;
            (c, e)
        });
        let links = vs[..=k].iter().enumerate().map(|(l, w)| (d + l, w.clone()));
        for (component, w) in units.chain(links).collect::<Vec<_>>() {
            let mut f = b.form();
            f.inner(1.0, v, &w);
            b.push(ConstraintTag::FixedStepLink { step: k, component }, &f, None, 0.0, Relation::Eq);
        }
    }
    b.initial(spec);
    Ok(b.finish(spec))
}
