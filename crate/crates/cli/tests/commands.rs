use clap::Parser;

use pepkit::rational::frac;
use pepkit_cli::args::{execute, Cli};
use pepkit_cli::report::{Outcome, Report};
use pepkit_cli::CliError;

fn run(line: &str) -> Result<Report, CliError> {
    let argv = std::iter::once("pepkit").chain(line.split_whitespace());
    let cli = Cli::try_parse_from(argv).expect("command line parses");
    execute(&cli.command).map(|o| o.report)
}

fn ok(line: &str) -> Report {
    let r = run(line).unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{line}\n{r}");
    r
}

#[test]
fn solve_examples() {
    let r = ok("solve --mu 1 --L 10 --N 1 --R 1 --variant exact-ls");
    let s = r.solve.unwrap();
    assert!((s.optimum.value - 81.0 / 121.0).abs() <= 1e-6);
    assert_eq!(s.analytic_exact.unwrap().0, frac(81, 121));
    assert!(s.gap.value.abs() <= 1e-6);

    let s = ok("solve --mu 1 --L 10 --N 1 --variant noisy --eps 0.3").solve.unwrap();
    assert!((s.optimum.value - 0.806063).abs() < 1e-6);
    assert_eq!(s.analytic_exact.unwrap().0, frac(15129, 18769));

    let s = ok("solve --variant fixed-step --mu 1 --L 10 --N 1").solve.unwrap();
    assert!((s.optimum.value - 0.669421).abs() < 1e-6);
}

#[test]
fn solve_distance_start_is_an_upper_bound() {
    let r = ok("solve --mu 1 --L 10 --N 2 --initial distance");
    let s = r.solve.unwrap();
    assert!(s.optimum.value <= s.analytic.value + 1e-6);
    assert!(!r.notices.is_empty());
}

#[test]
fn duals_match_closed_forms() {
    for line in ["duals --mu 1 --L 3", "duals --mu 1 --L 10"] {
        let d = ok(line).duals.unwrap();
        let named: Vec<_> = d.rows.iter().filter(|r| r.name.is_some()).collect();
        assert_eq!(named.len(), 5);
        for row in named {
            assert!(row.abs_diff.unwrap().value <= 1e-5, "{line}: {row:?}");
        }
    }
    let d = ok("duals --mu 1 --L 10 --variant noisy --eps 0.3").duals.unwrap();
    let y1 = &d.rows[0];
    assert_eq!(y1.name.as_deref(), Some("y1"));
    assert_eq!(y1.closed_form.as_ref().unwrap().0, frac(123, 137));
    assert!((y1.numeric.value - 0.897810).abs() < 1e-5);
}

#[test]
fn duals_beyond_one_step_are_raw() {
    let r = ok("duals --N 2");
    let d = r.duals.unwrap();
    assert!(d.rows.iter().all(|r| r.name.is_none() && r.closed_form.is_none()));
    assert!(r.notices.iter().any(|n| n.contains("N = 1")));
}

#[test]
fn certify_examples() {
    let c = ok("certify --mu 1 --L 3").certify.unwrap();
    assert_eq!((c.passed, c.total), (1, 1));
    let c = ok("certify --noisy --mu 1 --L 10 --eps 3/10").certify.unwrap();
    assert!(c.trials[0].checks.iter().any(|k| k.name == "noisy_identity" && k.pass));
    let c = ok("certify --random 100 --seed 42").certify.unwrap();
    assert_eq!((c.passed, c.total), (100, 100));
    let c = ok("certify --random 20 --seed 1 --noisy --symmetric --fixed-step").certify.unwrap();
    assert_eq!(c.passed, 20);
}

#[test]
fn certify_rejects_decimals() {
    for line in ["certify --mu 0.5 --L 3", "certify --noisy --mu 1 --L 10 --eps 0.3"] {
        let e = run(line).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{line}: {e}");
    }
    assert_eq!(run("certify --mu 1").unwrap_err().exit_code(), 3);
    assert_eq!(run("certify --random 3 --mu 1").unwrap_err().exit_code(), 3);
}

#[test]
fn simulate_examples() {
    let s = ok("simulate example1 --mu 1 --L 10 --iters 8").simulate.unwrap();
    assert_eq!(s.examples.len(), 2);
    for run in &s.examples {
        assert_eq!(run.steps.len(), 8);
        for st in &run.steps {
            assert!((st.ratio.unwrap() - 81.0 / 121.0).abs() <= 1e-12);
        }
    }
    let s = ok("simulate example2 --mu 1 --L 10 --eps 0.3 --iters 8").simulate.unwrap();
    let r2 = (123.0_f64 / 137.0).powi(2);
    for st in &s.examples[0].steps {
        assert!((st.ratio.unwrap() - r2).abs() <= 1e-10);
    }
    let s = ok("simulate random --trials 500 --seed 7").simulate.unwrap();
    assert_eq!(s.random.len(), 500);
    assert!(s.random.iter().enumerate().all(|(i, t)| t.index == i));
    assert!(s.max_ratio.unwrap().value <= 81.0 / 121.0 + 1e-12);
}

#[test]
fn outcomes_map_to_exit_codes() {
    let r = run("solve --max-iter 2").unwrap();
    assert_eq!(r.outcome, Outcome::SolverFailure);
    assert_eq!(r.exit_code(), 1);
    let r = run("solve --bound-tol 1e-16").unwrap();
    assert_eq!(r.outcome, Outcome::Violation);
    assert_eq!(r.exit_code(), 2);
    assert_eq!(run("solve --mu 2 --L 1").unwrap_err().exit_code(), 3);
    assert_eq!(run("solve --N 0").unwrap_err().exit_code(), 3);
    assert_eq!(run("solve --variant noisy").unwrap_err().exit_code(), 3);
    assert_eq!(run("solve --eps 0.1").unwrap_err().exit_code(), 3);
    assert_eq!(run("solve --tol-gap -1").unwrap_err().exit_code(), 3);
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    for line in [
        "solve --N 2",
        "duals --variant noisy --eps 1/4",
        "certify --random 5 --seed 3 --noisy --symmetric --fixed-step",
        "simulate example2 --eps 0.3",
        "simulate random --trials 30 --seed 11 --eps 0.2",
        "export --N 1",
    ] {
        let a = run(line).unwrap();
        let json = a.to_json().unwrap();
        assert_eq!(Report::from_json(&json).unwrap(), a, "{line}");
        let b = run(line).unwrap();
        assert_eq!(b.to_json().unwrap(), json, "{line}");
    }
}

#[test]
fn exported_sdpa_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pep.dat-s");
    let p = path.to_str().unwrap();
    let r = run(&format!("export --N 2 --variant noisy --eps 0.3 --out {p}")).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed = pepkit::sdp::sdpa::parse(&text).unwrap();
    assert_eq!(parsed.num_constraints(), r.export.unwrap().constraints);
}
