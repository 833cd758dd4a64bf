//! Infeasible-start primal-dual interior-point method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector step.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{BlockKind, IterLog, Relation, SdpProblem, SdpSolution, SolveOptions, Status};
use crate::error::{Error, Result};

/// Fraction of the distance to the cone boundary taken by the corrector.
const STEP_FRACTION: f64 = 0.98;
/// Largest fraction of the objective gap `dobj - pobj` one step may close.
const GAP_KEEP: f64 = 0.95;
/// Gap damping below this factor triggers a pure centering step.
const RECENTER_BELOW: f64 = 0.5;
/// Below this damping factor the gap safeguard is dropped for the step.
const GIVE_UP_BELOW: f64 = 1e-2;
/// Fraction of the distance to the boundary used by a dual lift.
const LIFT_FRACTION: f64 = 0.5;
/// Both step lengths below this count as a stall.
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
enum Cone {
    Psd(usize),
    Lin(usize),
}

#[derive(Debug, Clone)]
enum Bv {
    M(DMatrix<f64>),
    V(DVector<f64>),
}

impl Bv {
    fn zeros(c: Cone) -> Bv {
        match c {
            Cone::Psd(n) => Bv::M(DMatrix::zeros(n, n)),
            Cone::Lin(n) => Bv::V(DVector::zeros(n)),
        }
    }

    fn identity(c: Cone, scale: f64) -> Bv {
        match c {
            Cone::Psd(n) => Bv::M(DMatrix::identity(n, n) * scale),
            Cone::Lin(n) => Bv::V(DVector::from_element(n, scale)),
        }
    }

    fn dot(&self, o: &Bv) -> f64 {
        match (self, o) {
            (Bv::M(a), Bv::M(b)) => a.dot(b),
            (Bv::V(a), Bv::V(b)) => a.dot(b),
            _ => unreachable!("block kinds differ"),
        }
    }

    fn axpy(&mut self, a: f64, o: &Bv) {
        match (self, o) {
            (Bv::M(x), Bv::M(y)) => *x += y * a,
            (Bv::V(x), Bv::V(y)) => *x += y * a,
            _ => unreachable!("block kinds differ"),
        }
    }

    fn amax(&self) -> f64 {
        match self {
            Bv::M(m) => m.amax(),
            Bv::V(v) => v.amax(),
        }
    }

    fn symmetrize(&mut self) {
        if let Bv::M(m) = self {
            let t = m.transpose();
            *m += t;
            *m *= 0.5;
        }
    }

    fn into_matrix(self) -> DMatrix<f64> {
        match self {
            Bv::M(m) => m,
            Bv::V(v) => DMatrix::from_diagonal(&v),
        }
    }
}

fn dot_all(a: &[Bv], b: &[Bv]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

type Entries = Vec<(usize, usize, f64)>;

/// Problem data in solver layout: inequality slacks become one extra
/// linear block.
struct Data {
    cones: Vec<Cone>,
    user_blocks: usize,
    /// Per block, the constraints that touch it with their entries.
    touch: Vec<Vec<(usize, Entries)>>,
    /// Dense `m x n` coefficient matrix of each linear block.
    lin: Vec<Option<DMatrix<f64>>>,
    c: Vec<Bv>,
    af: DMatrix<f64>,
    cf: DVector<f64>,
    b: DVector<f64>,
    /// Each constraint row is divided by its largest coefficient.
    row_scale: DVector<f64>,
}

fn add_entries(ents: &[(usize, usize, f64)], scale: f64, out: &mut Bv) {
    match out {
        Bv::M(m) => {
            for &(i, j, v) in ents {
                m[(i, j)] += scale * v;
                if i != j {
                    m[(j, i)] += scale * v;
                }
            }
        }
        Bv::V(d) => {
            for &(i, _, v) in ents {
                d[i] += scale * v;
            }
        }
    }
}

fn dot_entries(ents: &[(usize, usize, f64)], x: &Bv) -> f64 {
    match x {
        Bv::M(m) => ents
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * m[(i, i)]
                } else {
                    v * (m[(i, j)] + m[(j, i)])
                }
            })
            .sum(),
        Bv::V(d) => ents.iter().map(|&(i, _, v)| v * d[i]).sum(),
    }
}

impl Data {
    fn new(p: &SdpProblem) -> Data {
        let m = p.num_constraints();
        let nf = p.num_free();
        let n_le = p
            .constraints
            .iter()
            .filter(|c| c.relation == Relation::Le)
            .count();
        let mut cones: Vec<Cone> = p
            .blocks
            .iter()
            .map(|k| match *k {
                BlockKind::Psd(n) => Cone::Psd(n),
                BlockKind::Diag(n) => Cone::Lin(n),
            })
            .collect();
        let user_blocks = cones.len();
        if n_le > 0 {
            cones.push(Cone::Lin(n_le));
        }
        let nb = cones.len();
        let mut touch: Vec<Vec<(usize, Entries)>> = vec![Vec::new(); nb];
        let mut af = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        let mut t = 0;
        let mut row_scale = DVector::from_element(m, 1.0);
        for (k, con) in p.constraints.iter().enumerate() {
            let coeffs = con.coeffs.canonical();
            let size = coeffs
                .entries
                .iter()
                .map(|e| e.value.abs())
                .chain(con.free.iter().map(|a| a.abs()))
                .fold(0.0, f64::max);
            let d = if size > 0.0 { 1.0 / size } else { 1.0 };
            row_scale[k] = d;
            let mut per: BTreeMap<usize, Entries> = BTreeMap::new();
            for e in coeffs.entries {
                per.entry(e.block).or_default().push((e.row, e.col, d * e.value));
            }
            if con.relation == Relation::Le {
                per.entry(nb - 1).or_default().push((t, t, d));
                t += 1;
            }
            for (blk, ents) in per {
                touch[blk].push((k, ents));
            }
            for (j, a) in con.free.iter().enumerate() {
                af[(k, j)] = d * *a;
            }
            b[k] = d * con.rhs;
        }
        let lin = cones
            .iter()
            .enumerate()
            .map(|(blk, c)| match *c {
                Cone::Psd(_) => None,
                Cone::Lin(n) => {
                    let mut a = DMatrix::zeros(m, n);
                    for (k, ents) in &touch[blk] {
                        for &(i, _, v) in ents {
                            a[(*k, i)] += v;
                        }
                    }
                    Some(a)
                }
            })
            .collect();
        let mut c: Vec<Bv> = cones.iter().map(|c| Bv::zeros(*c)).collect();
        let obj = p.objective.canonical();
        for e in &obj.entries {
            add_entries(&[(e.row, e.col, e.value)], 1.0, &mut c[e.block]);
        }
        Data {
            cones,
            user_blocks,
            touch,
            lin,
            c,
            af,
            cf: DVector::from_column_slice(&p.free_objective),
            b,
            row_scale,
        }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn amap(&self, x: &[Bv]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (blk, t) in self.touch.iter().enumerate() {
            for (k, ents) in t {
                out[*k] += dot_entries(ents, &x[blk]);
            }
        }
        out
    }

    fn adj(&self, y: &DVector<f64>) -> Vec<Bv> {
        let mut out: Vec<Bv> = self.cones.iter().map(|c| Bv::zeros(*c)).collect();
        for (blk, t) in self.touch.iter().enumerate() {
            for (k, ents) in t {
                add_entries(ents, y[*k], &mut out[blk]);
            }
        }
        out
    }
}

/// Per-block Nesterov-Todd scaling.
enum Scale {
    Psd {
        lx: DMatrix<f64>,
        ls: DMatrix<f64>,
        g: DMatrix<f64>,
        w: DMatrix<f64>,
        lam: DVector<f64>,
    },
    Lin {
        x: DVector<f64>,
        s: DVector<f64>,
        /// `sqrt(x / s)`; plays the role of both `G G^T` and `W`.
        w: DVector<f64>,
        lam: DVector<f64>,
    },
}

fn scaling(x: &Bv, s: &Bv) -> Option<Scale> {
    match (x, s) {
        (Bv::M(x), Bv::M(s)) => {
            let lx = Cholesky::new(x.clone())?.l();
            let ls = Cholesky::new(s.clone())?.l();
            let svd = (ls.transpose() * &lx).svd(true, true);
            let v = svd.v_t?.transpose();
            let d = svd.singular_values;
            if d.iter().any(|&di| !(di > 0.0) || !di.is_finite()) {
                return None;
            }
            let mut g = &lx * v;
            for (j, dj) in d.iter().enumerate() {
                let f = 1.0 / dj.sqrt();
                g.column_mut(j).scale_mut(f);
            }
            let w = &g * g.transpose();
            Some(Scale::Psd {
                lx,
                ls,
                g,
                w,
                lam: d,
            })
        }
        (Bv::V(x), Bv::V(s)) => {
            if x.iter().chain(s.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
                return None;
            }
            let w = x.zip_map(s, |a, b| (a / b).sqrt());
            let lam = x.zip_map(s, |a, b| (a * b).sqrt());
            Some(Scale::Lin {
                x: x.clone(),
                s: s.clone(),
                w,
                lam,
            })
        }
        _ => None,
    }
}

impl Scale {
    /// `-Lambda^2`, the affine-scaling complementarity target.
    fn neg_lam_sq(&self) -> Bv {
        match self {
            Scale::Psd { lam, .. } => Bv::M(DMatrix::from_diagonal(&lam.map(|l| -l * l))),
            Scale::Lin { lam, .. } => Bv::V(lam.map(|l| -l * l)),
        }
    }

    /// Solves the scaled complementarity equation for `H = dX~ + dS~`.
    fn h_of(&self, r: &Bv) -> Bv {
        match (self, r) {
            (Scale::Psd { lam, .. }, Bv::M(r)) => {
                let n = lam.len();
                Bv::M(DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (lam[i] + lam[j])))
            }
            (Scale::Lin { lam, .. }, Bv::V(r)) => Bv::V(r.component_div(lam)),
            _ => unreachable!(),
        }
    }

    /// `G H G^T`.
    fn unscale(&self, h: &Bv) -> Bv {
        match (self, h) {
            (Scale::Psd { g, .. }, Bv::M(h)) => Bv::M(g * h * g.transpose()),
            (Scale::Lin { w, .. }, Bv::V(h)) => Bv::V(h.component_mul(w)),
            _ => unreachable!(),
        }
    }

    /// `W D W`.
    fn w_sandwich(&self, d: &Bv) -> Bv {
        match (self, d) {
            (Scale::Psd { w, .. }, Bv::M(d)) => Bv::M(w * d * w),
            (Scale::Lin { w, .. }, Bv::V(d)) => Bv::V(d.component_mul(w).component_mul(w)),
            _ => unreachable!(),
        }
    }

    /// `G^T D G`.
    fn scale_dual(&self, d: &Bv) -> Bv {
        match (self, d) {
            (Scale::Psd { g, .. }, Bv::M(d)) => Bv::M(g.transpose() * d * g),
            (Scale::Lin { w, .. }, Bv::V(d)) => Bv::V(d.component_mul(w)),
            _ => unreachable!(),
        }
    }

    /// Largest `a` with `X + a dX` (or `S + a dS` when `dual`) in the cone.
    fn max_step(&self, d: &Bv, dual: bool) -> f64 {
        match (self, d) {
            (Scale::Psd { lx, ls, .. }, Bv::M(d)) => {
                let l = if dual { ls } else { lx };
                let Some(t) = l.solve_lower_triangular(d) else {
                    return 0.0;
                };
                let Some(p) = l.solve_lower_triangular(&t.transpose()) else {
                    return 0.0;
                };
                let p = (&p + p.transpose()) * 0.5;
                let lmin = p.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
                if lmin < 0.0 {
                    -1.0 / lmin
                } else {
                    f64::INFINITY
                }
            }
            (Scale::Lin { x, s, .. }, Bv::V(d)) => {
                let base = if dual { s } else { x };
                base.iter()
                    .zip(d.iter())
                    .filter(|(_, di)| **di < 0.0)
                    .map(|(b, di)| -b / di)
                    .fold(f64::INFINITY, f64::min)
            }
            _ => unreachable!(),
        }
    }

    fn mu_target(&self, sigma_mu: f64, corr: Option<(&Bv, &Bv)>) -> Bv {
        let mut r = self.neg_lam_sq();
        match &mut r {
            Bv::M(m) => {
                for i in 0..m.nrows() {
                    m[(i, i)] += sigma_mu;
                }
                if let Some((Bv::M(dx), Bv::M(ds))) = corr {
                    let p = dx * ds;
                    *m -= (&p + p.transpose()) * 0.5;
                }
            }
            Bv::V(v) => {
                v.add_scalar_mut(sigma_mu);
                if let Some((Bv::V(dx), Bv::V(ds))) = corr {
                    *v -= dx.component_mul(ds);
                }
            }
        }
        r
    }
}

struct Direction {
    dx: Vec<Bv>,
    ds: Vec<Bv>,
    dy: DVector<f64>,
    du: DVector<f64>,
    /// Scaled `dX~` and `dS~`, used by the corrector.
    dxt: Vec<Bv>,
    dst: Vec<Bv>,
}

struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    m: usize,
}

impl Kkt {
    fn build(data: &Data, scales: &[Scale]) -> Option<Kkt> {
        let m = data.m();
        let nf = data.cf.len();
        let mut big = DMatrix::zeros(m + nf, m + nf);
        for (blk, sc) in scales.iter().enumerate() {
            match sc {
                Scale::Psd { w, .. } => {
                    let n = w.nrows();
                    for (l, ents_l) in &data.touch[blk] {
                        let mut p = DMatrix::zeros(n, n);
                        for &(i, j, v) in ents_l {
                            let wi = w.column(i);
                            let wj = w.column(j);
                            p.ger(v, &wi, &wj, 1.0);
                            if i != j {
                                p.ger(v, &wj, &wi, 1.0);
                            }
                        }
                        let pb = Bv::M(p);
                        for (k, ents_k) in &data.touch[blk] {
                            big[(*k, *l)] += dot_entries(ents_k, &pb);
                        }
                    }
                }
                Scale::Lin { x, s, .. } => {
                    let a = data.lin[blk].as_ref().expect("linear block data");
                    let ratio = x.component_div(s);
                    let mut ad = a.clone();
                    for (j, r) in ratio.iter().enumerate() {
                        ad.column_mut(j).scale_mut(*r);
                    }
                    let mm = ad * a.transpose();
                    let mut view = big.view_mut((0, 0), (m, m));
                    view += mm;
                }
            }
        }
        for k in 0..m {
            for j in 0..nf {
                big[(k, m + j)] = -data.af[(k, j)];
                big[(m + j, k)] = data.af[(k, j)];
            }
        }
        if !big.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some(Kkt { lu: big.lu(), m })
    }

    fn solve(&self, h: &DVector<f64>, ru: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let mut rhs = DVector::zeros(self.m + ru.len());
        if rhs.is_empty() {
            return Some((rhs.clone(), rhs));
        }
        rhs.rows_mut(0, self.m).copy_from(h);
        rhs.rows_mut(self.m, ru.len()).copy_from(ru);
        let sol = self.lu.solve(&rhs)?;
        if !sol.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some((
            sol.rows(0, self.m).into_owned(),
            sol.rows(self.m, ru.len()).into_owned(),
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn direction(
    data: &Data,
    scales: &[Scale],
    kkt: &Kkt,
    r: &[Bv],
    rp: &DVector<f64>,
    rd: &[Bv],
    ru: &DVector<f64>,
) -> Option<Direction> {
    let h: Vec<Bv> = scales.iter().zip(r).map(|(sc, r)| sc.h_of(r)).collect();
    let ghg: Vec<Bv> = scales.iter().zip(&h).map(|(sc, h)| sc.unscale(h)).collect();
    let mut t = ghg.clone();
    for ((tb, sc), rdb) in t.iter_mut().zip(scales).zip(rd) {
        tb.axpy(-1.0, &sc.w_sandwich(rdb));
    }
    let rhs = data.amap(&t) - rp;
    let (dy, du) = kkt.solve(&rhs, ru)?;
    let build = |dy: &DVector<f64>| -> (Vec<Bv>, Vec<Bv>) {
        let mut ds = data.adj(dy);
        for (d, rdb) in ds.iter_mut().zip(rd) {
            d.axpy(1.0, rdb);
            d.symmetrize();
        }
        let mut dx = ghg.clone();
        for ((d, sc), dsb) in dx.iter_mut().zip(scales).zip(&ds) {
            d.axpy(-1.0, &sc.w_sandwich(dsb));
            d.symmetrize();
        }
        (dx, ds)
    };
    let (dx, ds) = build(&dy);
    let dst: Vec<Bv> = scales.iter().zip(&ds).map(|(sc, d)| sc.scale_dual(d)).collect();
    let dxt: Vec<Bv> = h
        .into_iter()
        .zip(&dst)
        .map(|(mut hb, d)| {
            hb.axpy(-1.0, d);
            hb
        })
        .collect();
    Some(Direction {
        dx,
        ds,
        dy,
        du,
        dxt,
        dst,
    })
}

/// `b` projected onto the null space of `A_f^T`. Moving `y` along it raises
/// `b^T y` without touching the free-variable equations.
fn lift_direction(data: &Data) -> Option<DVector<f64>> {
    let mut v = data.b.clone();
    if data.af.ncols() > 0 {
        let z = data.af.clone().svd(true, true).solve(&data.b, 1e-12).ok()?;
        v -= &data.af * z;
    }
    (v.norm() > 1e-12 * data.b.norm().max(1.0)).then_some(v)
}

fn max_steps(scales: &[Scale], d: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for ((sc, dx), ds) in scales.iter().zip(&d.dx).zip(&d.ds) {
        ap = ap.min(sc.max_step(dx, false));
        ad = ad.min(sc.max_step(ds, true));
    }
    (ap, ad)
}

impl IterLog {
    fn converged(&self, opts: &SolveOptions) -> bool {
        self.rel_gap <= opts.tol_gap && self.primal_infeas <= opts.tol_feas && self.dual_infeas <= opts.tol_feas
    }
}

type Measured = (IterLog, DVector<f64>, Vec<Bv>, DVector<f64>, f64);

#[allow(clippy::too_many_arguments)]
fn measure(
    data: &Data,
    x: &[Bv],
    s: &[Bv],
    y: &DVector<f64>,
    u: &DVector<f64>,
    it: usize,
    nu: f64,
    norm_b: f64,
    norm_c: f64,
) -> Measured {
    let rp = &data.b - data.amap(x) - &data.af * u;
    let mut rd = data.adj(y);
    for ((r, c), sb) in rd.iter_mut().zip(&data.c).zip(s) {
        r.axpy(-1.0, c);
        r.axpy(-1.0, sb);
    }
    let ru = &data.cf - data.af.transpose() * y;
    let pobj = dot_all(&data.c, x) + data.cf.dot(u);
    let dobj = data.b.dot(y);
    let comp = dot_all(x, s);
    let rel_gap = comp.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
    let entry = IterLog {
        iter: it,
        primal_objective: pobj,
        dual_objective: dobj,
        complementarity: comp,
        rel_gap,
        primal_infeas: rp.amax() / (1.0 + norm_b),
        dual_infeas: rd.iter().map(Bv::amax).fold(ru.amax(), f64::max) / (1.0 + norm_c),
        step_primal: 0.0,
        step_dual: 0.0,
        sigma: 0.0,
    };
    (entry, rp, rd, ru, comp / nu)
}

/// Relative gap below which a stalled primal residual is projected away.
const POLISH_GAP: f64 = 1e-6;

const POLISH_ROUNDS: usize = 8;

/// Fraction of each cone block that a polish step must retain.
const POLISH_KEEP: f64 = 0.1;

/// Minimum-norm correction of `(X, u)` removing the primal residual `rp`.
///
/// Each cone block moves as `X^(1/2) Z X^(1/2)` with `Z` minimal, so a
/// small residual gives a step well inside the cone and leaves `<X, S>`
/// essentially unchanged.
fn polish(data: &Data, x: &[Bv], u: &DVector<f64>, rp: &DVector<f64>) -> Option<(Vec<Bv>, DVector<f64>)> {
    let m = data.m();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    // (block, direction) for every column except the free ones
    let mut dirs: Vec<(usize, Bv)> = Vec::new();
    // position of each cone coordinate of `Z`, per direction
    let mut at: Vec<(usize, usize)> = Vec::new();
    for (blk, xb) in x.iter().enumerate() {
        match xb {
            Bv::M(xm) => {
                let eig = xm.clone().symmetric_eigen();
                let n = xm.nrows();
                for a in 0..n {
                    for b in a..n {
                        let w = (eig.eigenvalues[a].max(0.0) * eig.eigenvalues[b].max(0.0)).sqrt();
                        if w == 0.0 {
                            continue;
                        }
                        let va = eig.eigenvectors.column(a);
                        let vb = eig.eigenvectors.column(b);
                        let mut e = va * vb.transpose();
                        if a != b {
                            e += vb * va.transpose();
                        }
                        dirs.push((blk, Bv::M(e * w)));
                        at.push((a, b));
                    }
                }
            }
            Bv::V(xv) => {
                for i in 0..xv.len() {
                    let mut e = DVector::zeros(xv.len());
                    e[i] = xv[i];
                    dirs.push((blk, Bv::V(e)));
                    at.push((i, i));
                }
            }
        }
    }
    for (blk, e) in &dirs {
        let mut col = DVector::zeros(m);
        for (k, ents) in &data.touch[*blk] {
            col[*k] = dot_entries(ents, e);
        }
        cols.push(col);
    }
    for j in 0..u.len() {
        cols.push(data.af.column(j).into_owned());
    }
    if cols.is_empty() {
        return None;
    }
    let jac = DMatrix::from_columns(&cols);
    let eps = 1e-12 * jac.amax();
    let delta = jac.svd(true, true).solve(rp, eps).ok()?;
    // damp so that new X >= POLISH_KEEP * old X, i.e. I + tZ >= POLISH_KEEP * I
    let mut zs: Vec<DMatrix<f64>> = x
        .iter()
        .map(|xb| match xb {
            Bv::M(xm) => DMatrix::zeros(xm.nrows(), xm.nrows()),
            Bv::V(xv) => DMatrix::zeros(xv.len(), 1),
        })
        .collect();
    for (((blk, e), &(a, b)), d) in dirs.iter().zip(&at).zip(delta.iter()) {
        match e {
            Bv::M(_) => {
                zs[*blk][(a, b)] += d;
                if a != b {
                    zs[*blk][(b, a)] += d;
                }
            }
            Bv::V(_) => zs[*blk][(a, 0)] += d,
        }
    }
    let mut zmin = 0f64;
    for (z, xb) in zs.into_iter().zip(x) {
        zmin = zmin.min(match xb {
            Bv::M(_) => z.symmetric_eigenvalues().min(),
            Bv::V(_) => z.min(),
        });
    }
    if !zmin.is_finite() {
        return None;
    }
    let t = if zmin < POLISH_KEEP - 1.0 {
        (1.0 - POLISH_KEEP) / -zmin
    } else {
        1.0
    };
    let mut xn = x.to_vec();
    for ((blk, e), d) in dirs.iter().zip(delta.iter()) {
        xn[*blk].axpy(t * d, e);
    }
    for xb in &mut xn {
        xb.symmetrize();
    }
    let mut un = u.clone();
    for j in 0..u.len() {
        un[j] += t * delta[dirs.len() + j];
    }
    Some((xn, un))
}

/// Solves `problem` to the tolerances in `opts`.
///
/// Returns `Ok` with a non-`Optimal` status when the iteration limit is
/// reached or the iterates lose definiteness; the last iterate is reported.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    problem.validate()?;
    if !(opts.tol_gap > 0.0 && opts.tol_feas > 0.0) {
        return Err(Error::input("tolerances must be positive"));
    }
    if let Some(m) = super::presolve::merge(problem) {
        log::debug!("presolve: {} split free variables recovered", m.reduced.num_free() - problem.num_free());
        let sol = solve(&m.reduced, opts)?;
        return Ok(m.lift(problem, sol));
    }
    if let Some(red) = super::presolve::reduce(problem) {
        log::debug!(
            "presolve: blocks {:?} -> {:?}, rows {} -> {}",
            problem.blocks,
            red.reduced.blocks,
            problem.num_constraints(),
            red.reduced.num_constraints()
        );
        let sol = solve(&red.reduced, opts)?;
        return Ok(red.lift(problem, sol));
    }
    let data = Data::new(problem);
    let m = data.m();
    let nf = data.cf.len();
    let nu: f64 = data
        .cones
        .iter()
        .map(|c| match *c {
            Cone::Psd(n) | Cone::Lin(n) => n as f64,
        })
        .sum();
    let norm_b = data.b.amax();
    let norm_c = data
        .c
        .iter()
        .map(Bv::amax)
        .fold(data.cf.amax(), f64::max);
    let xi = 1f64.max(norm_b).max(norm_c);

    let mut x: Vec<Bv> = data.cones.iter().map(|c| Bv::identity(*c, xi)).collect();
    let mut s = x.clone();
    let mut y = DVector::zeros(m);
    // start the dual objective above the primal one so that the
    // safeguarded steps below keep every iterate weakly dual
    let pobj0 = dot_all(&data.c, &x);
    let bb = data.b.norm_squared();
    if pobj0 >= 0.0 && bb > 0.0 {
        y = &data.b * ((pobj0 + xi * xi * nu) / bb);
    }
    let mut u = DVector::zeros(nf);
    let mut log = Vec::new();
    let mut status = Status::MaxIter;
    let mut iterations = 0;

    for it in 0..=opts.max_iter {
        iterations = it;
        let (mut entry, mut rp, mut rd, mut ru, mut mu) = measure(&data, &x, &s, &y, &u, it, nu, norm_b, norm_c);
        if entry.converged(opts) {
            log.push(entry);
            status = Status::Optimal;
            break;
        }
        if entry.rel_gap <= POLISH_GAP && entry.dual_infeas <= opts.tol_feas {
            for _ in 0..POLISH_ROUNDS {
                if entry.primal_infeas <= opts.tol_feas {
                    break;
                }
                let Some((xp, up)) = polish(&data, &x, &u, &rp) else {
                    break;
                };
                let next = measure(&data, &xp, &s, &y, &up, it, nu, norm_b, norm_c);
                if next.0.primal_infeas >= 0.5 * entry.primal_infeas
                    || next.0.primal_objective > next.0.dual_objective
                {
                    break;
                }
                log::debug!("iteration {it}: primal polish to {:.2e}", next.0.primal_infeas);
                x = xp;
                u = up;
                (entry, rp, rd, ru, mu) = next;
            }
            if entry.converged(opts) {
                log.push(entry);
                status = Status::Optimal;
                break;
            }
        }
        if it == opts.max_iter {
            log.push(entry);
            break;
        }

        let scales: Option<Vec<Scale>> = x.iter().zip(&s).map(|(a, b)| scaling(a, b)).collect();
        let Some(scales) = scales else {
            log::debug!("iteration {it}: lost definiteness");
            log.push(entry);
            status = Status::NumericalFailure;
            break;
        };
        let step = Kkt::build(&data, &scales).and_then(|kkt| {
            let r_aff: Vec<Bv> = scales.iter().map(|sc| sc.mu_target(0.0, None)).collect();
            let pred = direction(&data, &scales, &kkt, &r_aff, &rp, &rd, &ru)?;
            let (ap, ad) = max_steps(&scales, &pred);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for i in 0..x.len() {
                let mut xa = x[i].clone();
                xa.axpy(ap, &pred.dx[i]);
                let mut sa = s[i].clone();
                sa.axpy(ad, &pred.ds[i]);
                mu_aff += xa.dot(&sa);
            }
            mu_aff /= nu;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let r_cor: Vec<Bv> = scales
                .iter()
                .enumerate()
                .map(|(i, sc)| sc.mu_target(sigma * mu, Some((&pred.dxt[i], &pred.dst[i]))))
                .collect();
            let cor = direction(&data, &scales, &kkt, &r_cor, &rp, &rd, &ru)?;
            Some((kkt, cor, sigma))
        });
        let Some((kkt, mut dir, mut sigma)) = step else {
            log::debug!("iteration {it}: linear solve failed");
            log.push(entry);
            status = Status::NumericalFailure;
            break;
        };
        let obj_gap = entry.dual_objective - entry.primal_objective;
        // step lengths, damped so that one step closes at most GAP_KEEP
        // of the objective gap; the damping factor is returned too
        let lengths = |dir: &Direction, equal: bool| {
            let (ap, ad) = max_steps(&scales, dir);
            let mut ap = (STEP_FRACTION * ap).min(1.0);
            let mut ad = (STEP_FRACTION * ad).min(1.0);
            if equal {
                ap = ap.min(ad);
                ad = ap;
            }
            let closing = ap * (dot_all(&data.c, &dir.dx) + data.cf.dot(&dir.du)) - ad * data.b.dot(&dir.dy);
            let mut t = 1.0;
            if obj_gap > 0.0 && closing > GAP_KEEP * obj_gap {
                t = GAP_KEEP * obj_gap / closing;
            }
            (ap * t, ad * t, t)
        };
        let (mut ap, mut ad, t) = lengths(&dir, false);
        if t < RECENTER_BELOW {
            // the objectives met before feasibility; aim at the central
            // path instead, where the full step has a positive gap
            let r_cen: Vec<Bv> = scales.iter().map(|sc| sc.mu_target(mu, None)).collect();
            if let Some(cen) = direction(&data, &scales, &kkt, &r_cen, &rp, &rd, &ru) {
                let (cp, cd, ct) = lengths(&cen, true);
                if ct >= GIVE_UP_BELOW {
                    log::debug!("iteration {it}: centering step");
                    (ap, ad, dir, sigma) = (cp, cd, cen, 1.0);
                } else if t < GIVE_UP_BELOW {
                    // the gap cannot be kept open along either direction:
                    // raise the dual objective along a direction that keeps
                    // the dual residual, or else drop the safeguard
                    let lift = lift_direction(&data).and_then(|v| {
                        let dm = data.adj(&v);
                        let amax = scales
                            .iter()
                            .zip(&dm)
                            .map(|(sc, d)| sc.max_step(d, true))
                            .fold(f64::INFINITY, f64::min);
                        let want = (1.0 + entry.primal_objective.abs()) / data.b.dot(&v);
                        let a = want.min(LIFT_FRACTION * amax);
                        (a * data.b.dot(&v) > obj_gap.abs()).then_some((v, dm, a))
                    });
                    if let Some((v, dm, a)) = lift {
                        log::debug!("iteration {it}: dual lift by {a:.3e}");
                        entry.step_primal = 0.0;
                        entry.step_dual = a;
                        entry.sigma = 1.0;
                        log.push(entry);
                        y.axpy(a, &v, 1.0);
                        for (si, di) in s.iter_mut().zip(&dm) {
                            si.axpy(a, di);
                            si.symmetrize();
                        }
                        continue;
                    }
                    log::debug!("iteration {it}: objective gap safeguard released");
                    (ap, ad) = max_steps(&scales, &dir);
                    ap = (STEP_FRACTION * ap).min(1.0);
                    ad = (STEP_FRACTION * ad).min(1.0);
                }
            }
        }
        entry.step_primal = ap;
        entry.step_dual = ad;
        entry.sigma = sigma;
        log::debug!(
            "it {it:3} pobj {:+.10e} dobj {:+.10e} gap {:.2e} pinf {:.2e} dinf {:.2e} ap {ap:.3} ad {ad:.3} sigma {sigma:.2e}",
            entry.primal_objective,
            entry.dual_objective,
            entry.rel_gap,
            entry.primal_infeas,
            entry.dual_infeas
        );
        log.push(entry);
        for i in 0..x.len() {
            x[i].axpy(ap, &dir.dx[i]);
            x[i].symmetrize();
            s[i].axpy(ad, &dir.ds[i]);
            s[i].symmetrize();
        }
        y.axpy(ad, &dir.dy, 1.0);
        u.axpy(ap, &dir.du, 1.0);
        if ap < MIN_STEP && ad < MIN_STEP {
            iterations = it + 1;
            status = Status::NumericalFailure;
            break;
        }
    }

    let last = log.last().copied();
    let (pobj, dobj) = last.map_or((f64::NAN, f64::NAN), |l| (l.primal_objective, l.dual_objective));
    let gap = dot_all(&x, &s);
    x.truncate(data.user_blocks);
    s.truncate(data.user_blocks);
    Ok(SdpSolution {
        x: x.into_iter().map(Bv::into_matrix).collect(),
        u: u.iter().copied().collect(),
        y: y.component_mul(&data.row_scale).iter().copied().collect(),
        s: s.into_iter().map(Bv::into_matrix).collect(),
        objective_primal: pobj,
        objective_dual: dobj,
        gap,
        status,
        iterations,
        log,
    })
}
