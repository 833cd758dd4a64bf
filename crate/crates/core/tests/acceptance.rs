//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{exact_ls_duals, noisy_rate, q};
use pepkit::certify::{noisy_zero_eps_mismatches, verify_identity_exact, verify_noisy_identity};
use pepkit::fclass::{is_interpolable, ClassParams, ExactParams, LabeledPoint};
use pepkit::pep::{
    assignment_from_trajectory, build, check_assignment, extract_multipliers, InitialCondition, PepSpec, Variant,
};
use pepkit::quadsim::{self, DiagQuadratic, RandomRotation, Trajectory};
use pepkit::sdp::random::{random_feasible, RandomSpec};
use pepkit::sdp::{sdpa, solve, SdpProblem, SdpSolution, SolveOptions, Status};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Every SDP solved by the suite, for the weak-duality sweep.
#[derive(Default)]
struct Runs {
    logs: Vec<(String, SdpSolution)>,
}

impl Runs {
    fn solve(&mut self, label: &str, p: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution, String> {
        let sol = solve(p, opts).map_err(|e| format!("{label}: {e}"))?;
        self.logs.push((label.to_string(), sol.clone()));
        Ok(sol)
    }

    /// Largest relative excess of the primal over the dual objective.
    fn worst_weak_duality(&self) -> (f64, String) {
        let mut worst = (f64::NEG_INFINITY, String::new());
        for (label, sol) in &self.logs {
            for e in &sol.log {
                let scale = 1.0 + e.primal_objective.abs() + e.dual_objective.abs();
                let excess = (e.primal_objective - e.dual_objective) / scale;
                if excess > worst.0 {
                    worst = (excess, format!("{label} iter {}", e.iter));
                }
            }
        }
        worst
    }
}

fn spec(n: usize, variant: Variant) -> PepSpec {
    PepSpec::new(
        ClassParams::new(1.0, 10.0).unwrap(),
        n,
        1.0,
        variant,
        InitialCondition::FunctionGap,
    )
    .unwrap()
}

fn pep_optimum(runs: &mut Runs, label: &str, s: &PepSpec, opts: &SolveOptions) -> Result<f64, String> {
    let c = build(s).map_err(|e| e.to_string())?;
    let sol = runs.solve(label, &c.problem, opts)?;
    if sol.status != Status::Optimal {
        return Err(format!("{label}: status {:?}", sol.status));
    }
    Ok(sol.objective_primal)
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn criterion1(runs: &mut Runs) -> Verdict {
    let t = Instant::now();
    let got = pep_optimum(runs, "exact-ls N=1", &spec(1, Variant::ExactLsRelaxed), &SolveOptions::default());
    let el = t.elapsed();
    match got {
        Ok(v) => {
            let err = (v - 81.0 / 121.0).abs();
            Verdict::new(
                err <= 1e-6 && el < Duration::from_secs(1),
                format!("optimum {v:.10}, |err| {err:.1e} (tol 1e-6), {}", secs(el)),
            )
        }
        Err(e) => Verdict::new(false, e),
    }
}

fn criterion2(runs: &mut Runs) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let t = Instant::now();
        let got = pep_optimum(
            runs,
            &format!("exact-ls N={n}"),
            &spec(n, Variant::ExactLsRelaxed),
            &SolveOptions::default(),
        );
        let el = t.elapsed();
        match got {
            Ok(v) => {
                let err = (v - (81.0f64 / 121.0).powi(n as i32)).abs();
                pass &= err <= 1e-5 && el < Duration::from_secs(5);
                parts.push(format!("N={n}: {v:.8}, |err| {err:.1e}, {}", secs(el)));
            }
            Err(e) => {
                pass = false;
                parts.push(e);
            }
        }
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion3(runs: &mut Runs) -> Verdict {
    let opts = SolveOptions {
        tol_gap: 1e-10,
        ..SolveOptions::default()
    };
    let mut worst: f64 = 0.0;
    for (mu, l) in [(1.0, 3.0), (1.0, 10.0)] {
        let s = PepSpec::new(
            ClassParams::new(mu, l).unwrap(),
            1,
            1.0,
            Variant::ExactLsRelaxed,
            InitialCondition::FunctionGap,
        )
        .unwrap();
        let c = build(&s).unwrap();
        let sol = match runs.solve(&format!("duals ({mu}, {l})"), &c.problem, &opts) {
            Ok(s) => s,
            Err(e) => return Verdict::new(false, e),
        };
        let m = match extract_multipliers(&c, &sol) {
            Ok(m) => m,
            Err(e) => return Verdict::new(false, format!("({mu}, {l}): {e}")),
        };
        for (k, want) in exact_ls_duals(mu, l).iter().enumerate() {
            match m.named(&format!("y{}", k + 1)) {
                Some(got) => worst = worst.max((got - want).abs()),
                None => return Verdict::new(false, format!("({mu}, {l}): y{} missing", k + 1)),
            }
        }
    }
    Verdict::new(
        worst <= 1e-5,
        format!("max |y - closed form| {worst:.1e} (tol 1e-5) over (1,3), (1,10)"),
    )
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    q(rng.random_range(1..=1000), rng.random_range(1..=1000))
}

fn random_pair(rng: &mut ChaCha8Rng) -> ExactParams {
    let mu = random_rational(rng);
    let l = &mu + random_rational(rng);
    ExactParams::new(mu, l).unwrap()
}

fn criterion4() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    for _ in 0..100 {
        if !verify_identity_exact(&random_pair(&mut rng)).is_zero() {
            bad += 1;
        }
    }
    let el = t.elapsed();
    Verdict::new(
        bad == 0 && el < Duration::from_secs(10),
        format!("{} of 100 residuals identically zero, {}", 100 - bad, secs(el)),
    )
}

fn criterion5(runs: &mut Runs) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    let mut failing = 0;
    for i in 0..100 {
        let before = bad.len();
        let p = random_pair(&mut rng);
        // eps in [0, 1), with eps = 0 exactly every tenth triple
        let eps = if i % 10 == 0 {
            q(0, 1)
        } else {
            q(rng.random_range(0..1000), 1000)
        };
        match verify_noisy_identity(&p, &eps) {
            Ok(r) if r.is_zero() => {}
            Ok(_) => bad.push(format!("triple {i} nonzero")),
            Err(e) => bad.push(format!("triple {i}: {e}")),
        }
        let mism = noisy_zero_eps_mismatches(&p);
        if !mism.is_empty() {
            bad.push(format!("triple {i} eps=0: {}", mism.join(", ")));
        }
        if bad.len() > before {
            failing += 1;
        }
    }
    let want = noisy_rate(1.0, 10.0, 0.3);
    let pep = pep_optimum(runs, "noisy N=1 eps=0.3", &spec(1, Variant::Noisy(0.3)), &SolveOptions::default());
    let (pep_ok, pep_detail) = match pep {
        Ok(v) => {
            let err = (v - want).abs();
            (err <= 1e-6, format!("noisy optimum {v:.10} vs (123/137)^2, |err| {err:.1e} (tol 1e-6)"))
        }
        Err(e) => (false, e),
    };
    let mut detail = format!("{} of 100 triples zero with eps=0 consistent; {pep_detail}", 100 - failing);
    if !bad.is_empty() {
        detail.push_str(&format!("; first problem: {}", bad[0]));
    }
    Verdict::new(bad.is_empty() && pep_ok, detail)
}

fn max_ratio_error(t: &Trajectory, want: f64) -> f64 {
    t.ratios()
        .iter()
        .map(|r| r.map_or(f64::INFINITY, |r| (r - want).abs()))
        .fold(0.0, f64::max)
}

fn criterion6() -> Verdict {
    let params = ClassParams::new(1.0, 10.0).unwrap();
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    let mut fixed: f64 = 0.0;
    let mut steps_ok = true;
    for dim in [2, 3, 5] {
        let (qd, x0) = quadsim::example1_start(&params, dim).unwrap();
        let ls = quadsim::run_exact_ls(&qd, &x0, 8).unwrap();
        let fs = quadsim::run_fixed_step(&qd, &x0, 2.0 / 11.0, 8).unwrap();
        steps_ok &= ls.len() == 8 && fs.len() == 8;
        e1 = e1.max(max_ratio_error(&ls, 81.0 / 121.0));
        for (a, b) in ls.iterates.iter().zip(&fs.iterates) {
            for (u, v) in a.iter().zip(b) {
                fixed = fixed.max((u - v).abs());
            }
        }
        let (qd, x0) = quadsim::example2_start(&params, 0.3, dim).unwrap();
        let mut pol = quadsim::rotation_policy(0.3f64.asin(), true).unwrap();
        let t = quadsim::run_noisy(&qd, &x0, 0.3, &mut pol, 8).unwrap();
        steps_ok &= t.len() == 8;
        e2 = e2.max(max_ratio_error(&t, (123.0f64 / 137.0).powi(2)));
    }
    // iterates are of order 1; identical means equal to rounding
    Verdict::new(
        steps_ok && e1 <= 1e-12 && e2 <= 1e-10 && fixed <= 1e-14,
        format!(
            "example1 ratio err {e1:.1e} (tol 1e-12), example2 {e2:.1e} (tol 1e-10), \
             fixed-step vs exact-LS iterates {fixed:.1e}"
        ),
    )
}

struct Sample {
    q: DiagQuadratic,
    ls: Trajectory,
    noisy: Trajectory,
    eps: f64,
    fixed: Trajectory,
}

const TRIALS: usize = 500;
const ITERS: usize = 8;

fn samples() -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..TRIALS)
        .map(|i| {
            let dim = rng.random_range(2..=6);
            let lambdas: Vec<f64> = (0..dim).map(|_| rng.random_range(1.0..=10.0)).collect();
            let x0: Vec<f64> = loop {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                if x.iter().any(|v| v.abs() > 1e-3) {
                    break x;
                }
            };
            let eps = rng.random_range(0.0..0.9);
            let q = DiagQuadratic::new(lambdas).unwrap();
            let ls = quadsim::run_exact_ls(&q, &x0, ITERS).unwrap();
            let mut pol = RandomRotation::new(eps, 1000 + i as u64).unwrap();
            let noisy = quadsim::run_noisy(&q, &x0, eps, &mut pol, ITERS).unwrap();
            let fixed = quadsim::run_fixed_step(&q, &x0, 2.0 / 11.0, ITERS).unwrap();
            Sample {
                q,
                ls,
                noisy,
                eps,
                fixed,
            }
        })
        .collect()
}

fn criterion7(s: &[Sample]) -> Verdict {
    let params = ClassParams::new(1.0, 10.0).unwrap();
    let bound = 81.0 / 121.0;
    let mut ls_worst = f64::NEG_INFINITY;
    let mut noisy_worst = f64::NEG_INFINITY;
    let mut nesterov_bad = 0;
    for x in s {
        if let Some(r) = x.ls.max_ratio() {
            ls_worst = ls_worst.max(r - bound);
        }
        if let Some(r) = x.noisy.max_ratio() {
            noisy_worst = noisy_worst.max(r - noisy_rate(1.0, 10.0, x.eps));
        }
        if !quadsim::bound_check_nesterov(&x.fixed, &params, &x.fixed.iterates[0]) {
            nesterov_bad += 1;
        }
    }
    Verdict::new(
        ls_worst <= 1e-12 && noisy_worst <= 1e-10 && nesterov_bad == 0,
        format!(
            "{TRIALS} quadratics: exact-LS max ratio - 81/121 = {ls_worst:.2e} (tol 1e-12), \
             noisy max ratio - rate = {noisy_worst:.2e} (tol 1e-10), \
             Nesterov bound violations {nesterov_bad}"
        ),
    )
}

fn labeled(q: &DiagQuadratic, t: &Trajectory) -> Vec<LabeledPoint> {
    let n = q.dim();
    let mut pts = vec![LabeledPoint::new("*", vec![0.0; n], 0.0, vec![0.0; n]).unwrap()];
    for (i, x) in t.iterates.iter().enumerate() {
        pts.push(LabeledPoint::new(i.to_string(), x.clone(), q.value(x), q.grad(x)).unwrap());
    }
    pts
}

fn criterion8(s: &[Sample]) -> Verdict {
    let params = ClassParams::new(1.0, 10.0).unwrap();
    let mut compiled = BTreeMap::new();
    let mut not_interp = 0;
    let mut infeasible = Vec::new();
    let mut worst_viol: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        for (kind, t) in [("exact-ls", &x.ls), ("noisy", &x.noisy), ("fixed-step", &x.fixed)] {
            if !is_interpolable(&labeled(&x.q, t), &params, 1e-9).unwrap() {
                not_interp += 1;
            }
            let n = t.len();
            if n == 0 {
                continue;
            }
            let variant = match kind {
                "exact-ls" => Variant::ExactLsRelaxed,
                "noisy" => Variant::Noisy(x.eps),
                _ => Variant::FixedStep,
            };
            let c = match variant {
                Variant::Noisy(_) => build(&spec(n, variant)).unwrap(),
                _ => compiled
                    .entry((kind, n))
                    .or_insert_with(|| build(&spec(n, variant)).unwrap())
                    .clone(),
            };
            let a = assignment_from_trajectory(&c, &x.q, t).unwrap();
            let chk = check_assignment(&c, &a).unwrap();
            worst_viol = worst_viol.max(chk.max_violation);
            worst_eig = worst_eig.min(chk.min_eigenvalue);
            if !chk.feasible(1.0, 1e-9) {
                infeasible.push(format!("{kind} #{i}"));
            }
        }
    }
    let mut detail = format!(
        "{} trajectories: {not_interp} not interpolable, {} infeasible for their PEP \
         (max violation {worst_viol:.1e}, min eigenvalue {worst_eig:.1e}, tol 1e-9)",
        3 * s.len(),
        infeasible.len()
    );
    if let Some(f) = infeasible.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    Verdict::new(not_interp == 0 && infeasible.is_empty(), detail)
}

fn criterion9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let dim = rng.random_range(2..=8);
        let lambdas: Vec<f64> = (0..dim).map(|_| rng.random_range(0.01..=100.0)).collect();
        let x: Vec<f64> = loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-3 {
                break v.iter().map(|a| a / n).collect();
            }
        };
        let r = quadsim::kantorovich_residual(&DiagQuadratic::new(lambdas).unwrap(), &x).unwrap();
        worst = worst.min(r);
    }
    let mut eq: f64 = 0.0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (mu, l) in [(1.0, 10.0), (0.3, 7.0), (2.0, 2.5), (1.0, 1000.0)] {
        let qd = DiagQuadratic::new(vec![mu, 0.5 * (mu + l), l]).unwrap();
        eq = eq.max(quadsim::kantorovich_residual(&qd, &[h, 0.0, h]).unwrap().abs());
    }
    Verdict::new(
        worst >= 0.0 && eq <= 1e-12,
        format!("min residual over 10^4 samples {worst:.3e}, equality case |residual| {eq:.1e} (tol 1e-12)"),
    )
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sdp")
}

fn criterion10(runs: &mut Runs) -> Verdict {
    let optima: serde_json::Value = match std::fs::read_to_string(fixture_dir().join("optima.json"))
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(v) => v,
        Err(e) => return Verdict::new(false, format!("optima.json: {e}")),
    };
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let name = format!("random_{seed:02}.dat-s");
        let text = match std::fs::read_to_string(fixture_dir().join(&name)) {
            Ok(t) => t,
            Err(e) => return Verdict::new(false, format!("{name}: {e}")),
        };
        let original = random_feasible(seed, &RandomSpec::default());
        if sdpa::write(&original) != text {
            problems.push(format!("{name}: export differs"));
            continue;
        }
        let parsed = match sdpa::parse(&text) {
            Ok(p) => p,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        if sdpa::write(&parsed) != text {
            problems.push(format!("{name}: reparse differs"));
        }
        let Some(want) = optima[&name]["optimum"].as_f64() else {
            problems.push(format!("{name}: no reference optimum"));
            continue;
        };
        for (label, p) in [("original", &original), ("parsed", &parsed)] {
            match runs.solve(&format!("{name} {label}"), p, &SolveOptions::default()) {
                Ok(sol) if sol.status == Status::Optimal => {
                    worst = worst.max((sol.objective_primal - want).abs());
                }
                Ok(sol) => problems.push(format!("{name} {label}: {:?}", sol.status)),
                Err(e) => problems.push(e),
            }
        }
    }
    let (wd, at) = runs.worst_weak_duality();
    let iterates: usize = runs.logs.iter().map(|(_, s)| s.log.len()).sum();
    let mut detail = format!(
        "20 fixtures, max |optimum - reference| {worst:.1e} (tol 1e-6); \
         weak duality over {iterates} iterates of {} runs, worst relative excess {wd:.1e} at {at}",
        runs.logs.len()
    );
    if let Some(p) = problems.first() {
        detail.push_str(&format!("; {p}"));
    }
    Verdict::new(problems.is_empty() && worst <= 1e-6 && wd <= 1e-9, detail)
}

fn main() {
    let mut runs = Runs::default();
    let start = Instant::now();
    let sims = samples();
    let results = [
        criterion1(&mut runs),
        criterion2(&mut runs),
        criterion3(&mut runs),
        criterion4(),
        criterion5(&mut runs),
        criterion6(),
        criterion7(&sims),
        criterion8(&sims),
        criterion9(),
        // last, so the weak-duality sweep covers every solve above
        criterion10(&mut runs),
    ];
    let mut failed = 0;
    for (i, v) in results.iter().enumerate() {
        println!("criterion {:>2}: {}  {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({})",
        results.len() - failed,
        secs(start.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
