use std::collections::BTreeMap;

use proptest::prelude::*;

use pepkit::rational::Exact;
use pepkit_cli::report::*;
use pepkit_cli::Tolerances;

fn measured() -> impl Strategy<Value = Measured> {
    (any::<f64>().prop_filter("finite", |v| v.is_finite()), 0.0..1.0f64).prop_map(|(v, t)| Measured::new(v, t))
}

fn exact() -> impl Strategy<Value = Exact> {
    (any::<i64>(), 1..i64::MAX).prop_map(|(n, d)| Exact(num_rational::BigRational::new(n.into(), d.into())))
}

fn diagnostics() -> impl Strategy<Value = Diagnostics> {
    ("[A-Za-z]{1,12}", 0..500usize, measured(), measured(), measured()).prop_map(|(status, iterations, a, b, c)| {
        Diagnostics {
            status,
            iterations,
            rel_gap: a,
            primal_infeas: b,
            dual_infeas: c,
        }
    })
}

fn report() -> impl Strategy<Value = Report> {
    let solve = (measured(), measured(), proptest::option::of(exact()), measured(), diagnostics()).prop_map(
        |(optimum, analytic, analytic_exact, gap, diagnostics)| SolveSection {
            optimum,
            analytic,
            analytic_exact,
            gap,
            diagnostics,
        },
    );
    let row = (
        proptest::option::of("y[0-9]"),
        "[a-z(),*0-9]{0,16}",
        measured(),
        proptest::option::of(exact()),
        proptest::option::of(measured()),
    )
        .prop_map(|(name, tag, numeric, closed_form, abs_diff)| DualRow {
            name,
            tag,
            numeric,
            closed_form,
            abs_diff,
        });
    let duals = (proptest::collection::vec(row, 0..6), diagnostics()).prop_map(|(rows, diagnostics)| DualsSection {
        rows,
        diagnostics,
    });
    let inputs = proptest::collection::btree_map("[a-zA-Z]{1,6}", "[ -~]{0,10}", 0..5);
    let outcome = prop_oneof![
        Just(Outcome::Pass),
        Just(Outcome::SolverFailure),
        Just(Outcome::Violation)
    ];
    (
        inputs,
        outcome,
        proptest::collection::vec("[ -~]{0,20}", 0..3),
        proptest::option::of(solve),
        proptest::option::of(duals),
    )
        .prop_map(|(inputs, outcome, notices, solve, duals): (BTreeMap<String, String>, _, _, _, _)| {
            let mut r = Report::new("prop", inputs, Tolerances::default());
            r.outcome = outcome;
            r.notices = notices;
            r.solve = solve;
            r.duals = duals;
            r
        })
}

proptest! {
    #[test]
    fn json_round_trip(r in report()) {
        let json = r.to_json().unwrap();
        prop_assert_eq!(Report::from_json(&json).unwrap(), r);
    }
}

#[test]
fn non_finite_values_survive() {
    let mut r = Report::new("x", BTreeMap::new(), Tolerances::default());
    r.simulate = Some(SimulateSection {
        mode: "random".into(),
        examples: Vec::new(),
        random: vec![RandomTrial {
            index: 0,
            dim: 2,
            exact_ls_excess: Measured::new(f64::NEG_INFINITY, 1e-12),
            noisy_excess: Some(Measured::new(f64::INFINITY, 1e-10)),
            fixed_step_bound: true,
            pass: true,
        }],
        max_ratio: None,
    });
    let back = Report::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
    let mut nan = r.clone();
    nan.simulate.as_mut().unwrap().random[0].exact_ls_excess.value = f64::NAN;
    let back = Report::from_json(&nan.to_json().unwrap()).unwrap();
    assert!(back.simulate.unwrap().random[0].exact_ls_excess.value.is_nan());
}

#[test]
fn outcome_combination() {
    use Outcome::*;
    assert_eq!(Pass.and(Violation), Violation);
    assert_eq!(Violation.and(SolverFailure), SolverFailure);
    assert_eq!(Pass.and(Pass), Pass);
    assert_eq!([Pass.exit_code(), SolverFailure.exit_code(), Violation.exit_code()], [0, 1, 2]);
}
