use std::collections::BTreeMap;
use std::path::PathBuf;

use proptest::prelude::*;

use pepkit::sdp::random::{random_feasible, RandomSpec};
use pepkit::sdp::{residuals, sdpa, solve, SdpProblem, SdpSolution, SolveOptions, Status};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sdp")
}

fn optima() -> BTreeMap<String, f64> {
    let text = std::fs::read_to_string(fixture_dir().join("optima.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object()
        .unwrap()
        .iter()
        .map(|(k, e)| (k.clone(), e["optimum"].as_f64().unwrap()))
        .collect()
}

fn assert_weak_duality(sol: &SdpSolution, what: &str) {
    for e in &sol.log {
        let scale = 1.0 + e.primal_objective.abs() + e.dual_objective.abs();
        assert!(
            e.primal_objective <= e.dual_objective + 1e-9 * scale,
            "{what} iter {}: {} > {}",
            e.iter,
            e.primal_objective,
            e.dual_objective
        );
    }
}

#[test]
fn fixtures_round_trip_and_match_reference_optima() {
    let optima = optima();
    assert_eq!(optima.len(), 20);
    for seed in 0..20u64 {
        let name = format!("random_{seed:02}.dat-s");
        let text = std::fs::read_to_string(fixture_dir().join(&name)).unwrap();
        let original = random_feasible(seed, &RandomSpec::default());
        assert_eq!(sdpa::write(&original), text, "{name}: export differs");
        let parsed = sdpa::parse(&text).unwrap();
        assert_eq!(sdpa::write(&parsed), text, "{name}: reparse differs");

        let want = optima[&name];
        for (label, p) in [("original", &original), ("parsed", &parsed)] {
            let sol = solve(p, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, Status::Optimal, "{name} {label}");
            assert!(
                (sol.objective_primal - want).abs() <= 1e-6,
                "{name} {label}: {} vs {want}",
                sol.objective_primal
            );
            assert_weak_duality(&sol, &name);
        }
    }
}

fn solved(p: &SdpProblem) -> SdpSolution {
    solve(p, &SolveOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sdpa_round_trip(seed in any::<u64>()) {
        let p = random_feasible(seed, &RandomSpec::default());
        let text = sdpa::write(&p);
        let q = sdpa::parse(&text).unwrap();
        prop_assert_eq!(&q, &p.to_standard_form().canonical());
        prop_assert_eq!(sdpa::write(&q), text);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let p = random_feasible(seed, &RandomSpec::default());
        let q = SdpProblem::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert_eq!(q, p);
    }

    #[test]
    fn random_instances_solve_with_small_residuals(seed in any::<u64>()) {
        let p = random_feasible(seed, &RandomSpec::default());
        let sol = solved(&p);
        prop_assert_eq!(sol.status, Status::Optimal);
        let r = residuals(&p, &sol).unwrap();
        prop_assert!(r.primal_infeas <= 1e-7, "{:?}", r);
        prop_assert!(r.dual_infeas <= 1e-7, "{:?}", r);
        prop_assert!(r.free_stationarity <= 1e-7, "{:?}", r);
        prop_assert!(p.min_eigenvalue(&sol.x) >= -1e-9);
        prop_assert!(p.min_eigenvalue(&sol.s) >= -1e-9);
        let scale = 1.0 + sol.objective_primal.abs();
        prop_assert!((sol.objective_primal - sol.objective_dual).abs() <= 1e-7 * scale);
        assert_weak_duality(&sol, "random");
    }

    #[test]
    fn standard_form_keeps_the_optimum(seed in any::<u64>()) {
        let p = random_feasible(seed, &RandomSpec::default());
        let a = solved(&p);
        let b = solved(&p.to_standard_form());
        prop_assert!((a.objective_primal - b.objective_primal).abs() <= 1e-6 * (1.0 + a.objective_primal.abs()));
    }
}
