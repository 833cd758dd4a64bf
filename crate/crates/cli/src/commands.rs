//! The subcommands. Each returns a [`Report`]; printing is left to the caller.

use std::collections::BTreeMap;
use std::path::Path;

use log::{debug, info};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pepkit::certify::{self, QForm};
use pepkit::fclass::{self, ClassParams, ExactParams};
use pepkit::pep::{self, ConstraintTag, InitialCondition, Variant};
use pepkit::quadsim::{self, DiagQuadratic, RandomRotation, Trajectory};
use pepkit::rational::{frac, int, Exact};
use pepkit::sdp::{self, sdpa, SdpSolution, Status};

use crate::config::{Number, RunConfig, Tolerances, VariantArg};
use crate::error::CliError;
use crate::report::*;

fn pep_inputs(cfg: &RunConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("mu".into(), cfg.mu.text.clone());
    m.insert("L".into(), cfg.l.text.clone());
    m.insert("N".into(), cfg.n.to_string());
    m.insert("R".into(), cfg.r.to_string());
    let variant = serde_json::to_value(cfg.variant).ok();
    m.insert(
        "variant".into(),
        variant.and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
    );
    let initial = serde_json::to_value(cfg.initial).ok();
    m.insert(
        "initial".into(),
        initial.and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
    );
    if let Some(e) = &cfg.eps {
        m.insert("eps".into(), e.text.clone());
    }
    m
}

fn exact_params(mu: &Number, l: &Number) -> Result<ExactParams, CliError> {
    Ok(ExactParams::new(mu.exact.clone(), l.exact.clone())?)
}

fn diagnostics(sol: &SdpSolution, gap_tol: f64, tol: &Tolerances) -> Diagnostics {
    let last = sol.log.last();
    let pick = |f: fn(&pepkit::sdp::IterLog) -> f64| last.map_or(f64::NAN, f);
    Diagnostics {
        status: format!("{:?}", sol.status),
        iterations: sol.iterations,
        rel_gap: Measured::new(pick(|l| l.rel_gap), gap_tol),
        primal_infeas: Measured::new(pick(|l| l.primal_infeas), tol.sdp_feas),
        dual_infeas: Measured::new(pick(|l| l.dual_infeas), tol.sdp_feas),
    }
}

/// Exact value of the analytic bound, when every input is rational.
fn analytic_exact(cfg: &RunConfig) -> Result<BigRational, CliError> {
    let p = exact_params(&cfg.mu, &cfg.l)?;
    let rate = match cfg.variant {
        VariantArg::ExactLs | VariantArg::FixedStep => certify::rate_exact(&p),
        VariantArg::Noisy => {
            let eps = cfg
                .eps
                .as_ref()
                .ok_or_else(|| CliError::Input("--variant noisy needs --eps".into()))?;
            certify::noisy_rate_exact(&p, &eps.exact)?
        }
    };
    let r = BigRational::from_float(cfg.r).ok_or_else(|| CliError::Input("R is not finite".into()))?;
    let mut bound = num_traits::pow(rate, cfg.n) * r;
    if InitialCondition::from(cfg.initial) == InitialCondition::DistanceSq {
        bound = bound * &p.l / int(2);
    }
    Ok(bound)
}

fn solve_pep(cfg: &RunConfig, opts: &sdp::SolveOptions) -> Result<(pep::CompiledPep, SdpSolution), CliError> {
    let spec = cfg.spec()?;
    let compiled = pep::build(&spec)?;
    debug!(
        "compiled PEP: {} constraints, blocks {:?}",
        compiled.problem.num_constraints(),
        compiled.problem.blocks
    );
    let start = std::time::Instant::now();
    let sol = sdp::solve(&compiled.problem, opts)?;
    info!("solved in {:?} ({} iterations, {:?})", start.elapsed(), sol.iterations, sol.status);
    Ok((compiled, sol))
}

/// Compiles and solves the PEP and compares the optimum with the analytic
/// bound.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Report, CliError> {
    let tol = cfg.tolerances;
    let mut report = Report::new("solve", pep_inputs(cfg), tol);
    let (compiled, sol) = solve_pep(cfg, &tol.solve_options())?;
    let analytic = compiled.spec.analytic_bound();
    let exact = analytic_exact(cfg).ok();
    let optimum = sol.objective_primal;
    let gap = optimum - analytic;
    let tight = compiled.spec.initial == InitialCondition::FunctionGap;
    report.solve = Some(SolveSection {
        optimum: Measured::new(optimum, tol.sdp_gap),
        analytic: Measured::exact(analytic),
        analytic_exact: exact.map(Exact),
        gap: Measured::new(gap, tol.bound),
        diagnostics: diagnostics(&sol, tol.sdp_gap, &tol),
    });
    if sol.status != Status::Optimal {
        report.outcome = Outcome::SolverFailure;
        report.notices.push(format!("solver stopped with status {:?}", sol.status));
    } else if gap > tol.bound || (tight && gap.abs() > tol.bound) {
        report.outcome = Outcome::Violation;
    }
    if !tight {
        report
            .notices
            .push("the distance-start bound is an upper bound and need not be attained".into());
    }
    Ok(report)
}

fn closed_form_multipliers(cfg: &RunConfig) -> Result<Vec<BigRational>, CliError> {
    let p = exact_params(&cfg.mu, &cfg.l)?;
    Ok(match cfg.variant {
        VariantArg::ExactLs => certify::multipliers_exact(&p).multipliers().to_vec(),
        VariantArg::FixedStep => certify::multipliers_exact(&p).multipliers()[..3].to_vec(),
        VariantArg::Noisy => {
            let eps = cfg
                .eps
                .as_ref()
                .ok_or_else(|| CliError::Input("--variant noisy needs --eps".into()))?;
            certify::noisy_certificate(&p, &eps.exact)?
                .y
                .into_iter()
                .map(|e| e.0)
                .collect()
        }
    })
}

/// Solves the PEP and tabulates its dual multipliers against the
/// closed-form certificate.
pub fn cmd_duals(cfg: &RunConfig) -> Result<Report, CliError> {
    let tol = cfg.tolerances;
    let mut report = Report::new("duals", pep_inputs(cfg), tol);
    let (compiled, sol) = solve_pep(cfg, &tol.duals_options())?;
    let diag = diagnostics(&sol, tol.duals_gap, &tol);
    if sol.status != Status::Optimal {
        report.outcome = Outcome::SolverFailure;
        report.notices.push(format!("solver stopped with status {:?}", sol.status));
        report.duals = Some(DualsSection {
            rows: Vec::new(),
            diagnostics: diag,
        });
        return Ok(report);
    }
    let mult = pep::extract_multipliers(&compiled, &sol)?;
    let numeric = |v: f64| Measured::new(v, tol.duals_gap);
    let compare = |v: f64, q: &BigRational| Measured::new((v - q.to_f64().unwrap_or(f64::NAN)).abs(), tol.dual_match);
    let mut rows = Vec::new();
    if cfg.n == 1 {
        let closed = closed_form_multipliers(cfg)?;
        let named_tags = named_tags(compiled.spec.variant);
        for (k, ((name, v), q)) in mult.named.iter().zip(&closed).enumerate() {
            rows.push(DualRow {
                name: Some(name.clone()),
                tag: named_tags.get(k).map_or_else(String::new, |t| t.to_string()),
                numeric: numeric(*v),
                closed_form: Some(Exact(q.clone())),
                abs_diff: Some(compare(*v, q)),
            });
        }
        let rate = analytic_exact(&RunConfig { r: 1.0, ..cfg.clone() }).ok();
        for (t, v) in &mult.tagged {
            if named_tags.contains(t) {
                continue;
            }
            let closed = match (t, &rate) {
                (ConstraintTag::InitialCondition, Some(r)) if compiled.spec.initial == InitialCondition::FunctionGap => {
                    Some(r.clone())
                }
                _ => None,
            };
            rows.push(DualRow {
                name: None,
                tag: t.to_string(),
                numeric: numeric(*v),
                abs_diff: closed.as_ref().map(|q| compare(*v, q)),
                closed_form: closed.map(Exact),
            });
        }
    } else {
        report
            .notices
            .push("named multipliers exist only for N = 1; showing raw tagged duals".into());
        rows.extend(mult.tagged.iter().map(|(t, v)| DualRow {
            name: None,
            tag: t.to_string(),
            numeric: numeric(*v),
            closed_form: None,
            abs_diff: None,
        }));
    }
    if rows.iter().filter_map(|r| r.abs_diff).any(|d| !(d.value <= d.tol)) {
        report.outcome = Outcome::Violation;
    }
    report.duals = Some(DualsSection {
        rows,
        diagnostics: diag,
    });
    Ok(report)
}

fn named_tags(variant: Variant) -> Vec<ConstraintTag> {
    use pep::Point::{Iter, Star};
    let mut tags = vec![
        ConstraintTag::Interpolation { i: Iter(0), j: Iter(1) },
        ConstraintTag::Interpolation { i: Star, j: Iter(0) },
        ConstraintTag::Interpolation { i: Star, j: Iter(1) },
    ];
    match variant {
        Variant::ExactLsRelaxed => {
            tags.push(ConstraintTag::SuccessiveGradOrtho(0));
            tags.push(ConstraintTag::LineSearchOrtho(0));
        }
        Variant::Noisy(_) => tags.push(ConstraintTag::LineSearchOrtho(0)),
        Variant::FixedStep => {}
    }
    tags
}

/// Options of `certify`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyConfig {
    pub mu: Option<Number>,
    pub l: Option<Number>,
    pub eps: Option<Number>,
    pub noisy: bool,
    pub symmetric: bool,
    pub fixed_step: bool,
    pub random: Option<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone)]
struct CertifyCase {
    params: ExactParams,
    eps: Option<BigRational>,
}

fn identity_check(name: &str, residual: &QForm, tol: &BigRational) -> CheckResult {
    let max = residual.max_abs_coefficient();
    let pass = max <= *tol;
    CheckResult {
        name: name.to_string(),
        pass,
        max_abs_residual: Some(Exact(max)),
        tol: Exact(tol.clone()),
        offending: if pass {
            Vec::new()
        } else {
            residual
                .nonzero_terms()
                .into_iter()
                .map(|(term, c)| Term {
                    term,
                    coefficient: Exact(c),
                })
                .collect()
        },
        detail: Vec::new(),
    }
}

fn flag_check(name: &str, pass: bool, detail: Vec<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        pass,
        max_abs_residual: None,
        tol: Exact(BigRational::zero()),
        offending: Vec::new(),
        detail,
    }
}

fn run_checks(case: &CertifyCase, cfg: &CertifyConfig) -> Result<Vec<CheckResult>, CliError> {
    let p = &case.params;
    let zero = BigRational::zero();
    let cert = certify::multipliers_exact(p);
    let mut out = vec![
        identity_check("exact_ls_identity", &certify::verify_identity_exact(p), &zero),
        flag_check("exact_ls_multipliers_positive", cert.all_positive(), Vec::new()),
    ];
    if cfg.noisy {
        let eps = case
            .eps
            .as_ref()
            .ok_or_else(|| CliError::Input("--noisy needs --eps".into()))?;
        out.push(identity_check(
            "noisy_identity",
            &certify::verify_noisy_identity(p, eps)?,
            &zero,
        ));
        let nc = certify::noisy_certificate(p, eps)?;
        let mut detail = Vec::new();
        if !nc.all_positive() {
            detail.push("a scalar multiplier is not positive".into());
        }
        if !nc.lmi_rank_one_psd() {
            detail.push("LMI multiplier is not rank-one PSD".into());
        }
        out.push(flag_check("noisy_multipliers_valid", detail.is_empty(), detail));
        let mismatch = certify::noisy_zero_eps_mismatches(p);
        out.push(flag_check("noisy_zero_eps_consistency", mismatch.is_empty(), mismatch));
    }
    if cfg.symmetric {
        let s = certify::symmetric_form_check(p);
        let tol = match s.path {
            certify::SqrtPath::Exact => zero.clone(),
            certify::SqrtPath::Truncated => certify::symmetric_tolerance(),
        };
        let mut c = identity_check("symmetric_form", &s.residual, &tol);
        c.detail.push(format!("sqrt(kappa) path: {:?}", s.path));
        out.push(c);
    }
    if cfg.fixed_step {
        let f = certify::fixed_step_combined_check(p);
        let mut c = identity_check("fixed_step_combined", &f.combined_residual, &zero);
        let sub = identity_check("fixed_step_substituted", &f.substituted, &zero);
        c.pass = c.pass && f.rank <= 2;
        c.detail.push(format!("rank of combined form: {}", f.rank));
        out.push(c);
        out.push(sub);
    }
    Ok(out)
}

/// Random rational `0 < mu < L` and `0 <= eps < 1` with small numerators
/// and denominators.
fn random_case(rng: &mut ChaCha8Rng, noisy: bool) -> CertifyCase {
    let mu = frac(rng.random_range(1..=20), rng.random_range(1..=20));
    let l = &mu + frac(rng.random_range(1..=60), rng.random_range(1..=20));
    let eps = noisy.then(|| {
        let d = rng.random_range(1..=20);
        frac(rng.random_range(0..d), d)
    });
    CertifyCase {
        params: ExactParams { mu, l },
        eps,
    }
}

/// Verifies the certificate identities in exact arithmetic.
pub fn cmd_certify(cfg: &CertifyConfig) -> Result<Report, CliError> {
    let mut inputs = BTreeMap::new();
    for (k, v) in [("mu", &cfg.mu), ("L", &cfg.l), ("eps", &cfg.eps)] {
        if let Some(v) = v {
            inputs.insert(k.to_string(), v.text.clone());
        }
    }
    for (k, on) in [("noisy", cfg.noisy), ("symmetric", cfg.symmetric), ("fixed_step", cfg.fixed_step)] {
        inputs.insert(k.to_string(), on.to_string());
    }
    if let Some(n) = cfg.random {
        inputs.insert("random".into(), n.to_string());
        inputs.insert("seed".into(), cfg.seed.to_string());
    }
    let mut report = Report::new("certify", inputs, cfg.tolerances);
    let cases: Vec<CertifyCase> = match cfg.random {
        Some(n) => {
            if cfg.mu.is_some() || cfg.l.is_some() || cfg.eps.is_some() {
                return Err(CliError::Input("--random draws its own mu, L and eps".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..n).map(|_| random_case(&mut rng, cfg.noisy)).collect()
        }
        None => {
            let (mu, l) = match (&cfg.mu, &cfg.l) {
                (Some(mu), Some(l)) => (mu, l),
                _ => return Err(CliError::Input("certify needs --mu and --L, or --random".into())),
            };
            if cfg.eps.is_some() && !cfg.noisy {
                return Err(CliError::Input("--eps only applies with --noisy".into()));
            }
            vec![CertifyCase {
                params: exact_params(mu, l)?,
                eps: cfg.eps.as_ref().map(|e| e.exact.clone()),
            }]
        }
    };
    let trials = cases
        .par_iter()
        .enumerate()
        .map(|(index, case)| {
            Ok(CertifyTrial {
                index,
                mu: Exact(case.params.mu.clone()),
                l: Exact(case.params.l.clone()),
                eps: case.eps.clone().map(Exact),
                checks: run_checks(case, cfg)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let passed = trials.iter().filter(|t| t.pass()).count();
    if passed != trials.len() {
        report.outcome = Outcome::Violation;
    }
    report.certify = Some(CertifySection {
        total: trials.len(),
        passed,
        trials,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Example1,
    Example2,
    Random,
}

/// Options of `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub mode: SimMode,
    pub mu: Number,
    pub l: Number,
    pub eps: Option<Number>,
    pub iters: usize,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

fn example_run(label: &str, traj: &Trajectory, rate: f64, tol: f64) -> ExampleRun {
    let ratios = traj.ratios();
    let steps: Vec<StepRow> = (0..traj.len())
        .map(|i| StepRow {
            iteration: i,
            f_gap: traj.values[i],
            step: traj.steps[i],
            ratio: ratios[i],
            deviation: ratios[i].map(|r| Measured::new(r - rate, tol)),
        })
        .collect();
    let equality = !steps.is_empty() && steps.iter().all(|s| s.deviation.is_some_and(|d| d.within()));
    ExampleRun {
        label: label.to_string(),
        rate: Measured::exact(rate),
        steps,
        equality,
    }
}

fn max_abs_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    if a.iterates.len() != b.iterates.len() {
        return f64::INFINITY;
    }
    a.iterates
        .iter()
        .zip(&b.iterates)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn random_trial(index: usize, cfg: &SimulateConfig, params: &ClassParams) -> Result<RandomTrial, CliError> {
    let tol = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let dim = rng.random_range(2..=6);
    let (mu, l) = (params.mu(), params.L());
    let lambdas: Vec<f64> = (0..dim).map(|_| rng.random_range(mu..=l)).collect();
    let x0: Vec<f64> = loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if x.iter().any(|v| v.abs() > 1e-3) {
            break x;
        }
    };
    let q = DiagQuadratic::new(lambdas)?;
    let ls = quadsim::run_exact_ls(&q, &x0, cfg.iters)?;
    let excess = ls.max_ratio().map_or(f64::NEG_INFINITY, |r| r - params.rate());
    let exact_ls_excess = Measured::new(excess, tol.guarantee);
    let fixed = quadsim::run_fixed_step(&q, &x0, params.optimal_step(), cfg.iters)?;
    let fixed_step_bound = quadsim::bound_check_nesterov(&fixed, params, &x0);
    let noisy_excess = match &cfg.eps {
        Some(e) => {
            let mut policy = RandomRotation::new(e.value, cfg.seed ^ (index as u64).rotate_left(32))?;
            let t = quadsim::run_noisy(&q, &x0, e.value, &mut policy, cfg.iters)?;
            let rate = fclass::noisy_rate(params, e.value)?;
            Some(Measured::new(t.max_ratio().map_or(f64::NEG_INFINITY, |r| r - rate), tol.ratio_noisy))
        }
        None => None,
    };
    let pass = exact_ls_excess.value <= exact_ls_excess.tol
        && fixed_step_bound
        && noisy_excess.is_none_or(|m| m.value <= m.tol);
    Ok(RandomTrial {
        index,
        dim,
        exact_ls_excess,
        noisy_excess,
        fixed_step_bound,
        pass,
    })
}

/// Runs the tight examples or the random guarantee suite.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<Report, CliError> {
    let tol = cfg.tolerances;
    let mut inputs = BTreeMap::new();
    inputs.insert("mu".into(), cfg.mu.text.clone());
    inputs.insert("L".into(), cfg.l.text.clone());
    if let Some(e) = &cfg.eps {
        inputs.insert("eps".into(), e.text.clone());
    }
    let mode = match cfg.mode {
        SimMode::Example1 => "example1",
        SimMode::Example2 => "example2",
        SimMode::Random => "random",
    };
    match cfg.mode {
        SimMode::Random => {
            inputs.insert("trials".into(), cfg.trials.to_string());
            inputs.insert("seed".into(), cfg.seed.to_string());
        }
        _ => {
            inputs.insert("dim".into(), cfg.dim.to_string());
        }
    }
    inputs.insert("iters".into(), cfg.iters.to_string());
    let mut report = Report::new(&format!("simulate {mode}"), inputs, tol);
    let params = ClassParams::new(cfg.mu.value, cfg.l.value)?;
    let mut section = SimulateSection {
        mode: mode.to_string(),
        examples: Vec::new(),
        random: Vec::new(),
        max_ratio: None,
    };
    match cfg.mode {
        SimMode::Example1 => {
            if cfg.eps.is_some() {
                return Err(CliError::Input("example1 takes no --eps".into()));
            }
            let (q, x0) = quadsim::example1_start(&params, cfg.dim)?;
            let ls = quadsim::run_exact_ls(&q, &x0, cfg.iters)?;
            let rate = params.rate();
            section.examples.push(example_run("exact line search", &ls, rate, tol.ratio_exact));
            let fixed = quadsim::run_fixed_step(&q, &x0, params.optimal_step(), cfg.iters)?;
            let mut run = example_run("fixed step 2/(mu+L)", &fixed, rate, tol.ratio_exact);
            let scale = x0.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let diff = max_abs_diff(&ls, &fixed);
            if !(diff <= tol.ratio_exact * scale) {
                run.equality = false;
                report
                    .notices
                    .push(format!("fixed-step iterates differ from exact line search by {diff:e}"));
            }
            section.examples.push(run);
        }
        SimMode::Example2 => {
            let eps = cfg
                .eps
                .as_ref()
                .ok_or_else(|| CliError::Input("example2 needs --eps".into()))?;
            let (q, x0) = quadsim::example2_start(&params, eps.value, cfg.dim)?;
            let mut policy = quadsim::rotation_policy(eps.value.asin(), true)?;
            let traj = quadsim::run_noisy(&q, &x0, eps.value, &mut policy, cfg.iters)?;
            let rate = fclass::noisy_rate(&params, eps.value)?;
            section
                .examples
                .push(example_run("noisy exact line search", &traj, rate, tol.ratio_noisy));
        }
        SimMode::Random => {
            let trials = (0..cfg.trials)
                .into_par_iter()
                .map(|i| random_trial(i, cfg, &params))
                .collect::<Result<Vec<_>, CliError>>()?;
            let worst = trials.iter().map(|t| t.exact_ls_excess.value).fold(f64::NEG_INFINITY, f64::max);
            if !trials.is_empty() {
                section.max_ratio = Some(Measured::new(worst + params.rate(), tol.guarantee));
            }
            section.random = trials;
        }
    }
    let ok = section.examples.iter().all(|r| r.equality) && section.random.iter().all(|t| t.pass);
    if !ok {
        report.outcome = Outcome::Violation;
    }
    report.simulate = Some(section);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Sdpa,
    Json,
}

/// Writes the compiled PEP. Without a path the text is returned for the
/// caller to print.
pub fn cmd_export(cfg: &RunConfig, format: ExportFormat, out: Option<&Path>) -> Result<(Report, Option<String>), CliError> {
    let spec = cfg.spec()?;
    let compiled = pep::build(&spec)?;
    let text = match format {
        ExportFormat::Sdpa => sdpa::write(&compiled.problem),
        ExportFormat::Json => compiled.problem.to_json()?,
    };
    let mut report = Report::new("export", pep_inputs(cfg), cfg.tolerances);
    let standard = match format {
        ExportFormat::Sdpa => compiled.problem.to_standard_form(),
        ExportFormat::Json => compiled.problem.clone(),
    };
    report.export = Some(ExportSection {
        format: match format {
            ExportFormat::Sdpa => "sdpa".into(),
            ExportFormat::Json => "json".into(),
        },
        path: out.map(|p| p.display().to_string()),
        constraints: standard.num_constraints(),
        blocks: standard.blocks.iter().map(|b| b.size()).collect(),
    });
    if format == ExportFormat::Sdpa && (compiled.problem.num_free() > 0 || !compiled.problem.is_standard_form()) {
        report
            .notices
            .push("free variables and inequalities were converted to standard form".into());
    }
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok((report, None))
        }
        None => Ok((report, Some(text))),
    }
}
