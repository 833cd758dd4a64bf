mod common;

use common::*;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use pepkit::fclass::*;
use proptest::prelude::*;

fn class() -> impl Strategy<Value = (f64, f64)> {
    (0.05..5.0f64, 1.01..40.0f64).prop_map(|(mu, k)| (mu, mu * k))
}

fn vec3() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-20..20i64, 3)
}

fn exact(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&n| Q::from_integer(n.into())).collect()
}

fn floats(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&n| n as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residual_matches_oracle(
        (mu, l) in (1..10i64, 11..60i64),
        xi in vec3(), gi in vec3(), xj in vec3(), gj in vec3(), fi in -50..50i64, fj in -50..50i64,
    ) {
        let (muq, lq) = (q(mu, 1), q(l, 1));
        let oracle = interp_taylor(&muq, &lq, &exact(&xi), &q(fi, 1), &exact(&gi), &exact(&xj), &q(fj, 1), &exact(&gj));
        let params = ExactParams::new(muq, lq).unwrap();
        let pe = |x: &[i64], f: i64, g: &[i64]| ExactPoint { label: String::new(), x: exact(x), f: q(f, 1), g: exact(g) };
        let lib = interp_residual_exact(&pe(&xi, fi, &gi), &pe(&xj, fj, &gj), &params).unwrap();
        prop_assert_eq!(&lib, &oracle);
        let pf = |x: &[i64], f: i64, g: &[i64]| LabeledPoint::new("", floats(x), f as f64, floats(g)).unwrap();
        let cp = ClassParams::new(mu as f64, l as f64).unwrap();
        let fl = interp_residual(&pf(&xi, fi, &gi), &pf(&xj, fj, &gj), &cp).unwrap();
        let o = oracle.to_f64().unwrap();
        prop_assert!((fl - o).abs() <= 1e-9 * (1.0 + o.abs()));
    }

    #[test]
    fn quadratic_samples_interpolable(
        (mu, l) in class(),
        ts in proptest::collection::vec(0.0..1.0f64, 3),
        xs in proptest::collection::vec(proptest::collection::vec(-3.0..3.0f64, 3), 2..6),
    ) {
        let lambdas: Vec<f64> = ts.iter().map(|t| mu + t * (l - mu)).collect();
        let params = ClassParams::new(mu, l).unwrap();
        let pts: Vec<LabeledPoint> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let g: Vec<f64> = x.iter().zip(&lambdas).map(|(a, b)| a * b).collect();
                let f = 0.5 * x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
                LabeledPoint::new(format!("{i}"), x.clone(), f, g).unwrap()
            })
            .collect();
        prop_assert!(is_interpolable(&pts, &params, 1e-9).unwrap());
    }

    #[test]
    fn rates_are_ordered((mu, l) in class(), e1 in 0.0..0.99f64, e2 in 0.0..0.99f64) {
        let p = ClassParams::new(mu, l).unwrap();
        let r = p.rate();
        prop_assert!((r - common::rate(mu, l)).abs() <= 1e-15);
        prop_assert!(r > 0.0 && r < 1.0);
        prop_assert!((pepkit::fclass::noisy_rate(&p, 0.0).unwrap() - r).abs() <= 1e-15);
        let (a, b) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (na, nb) = (pepkit::fclass::noisy_rate(&p, a).unwrap(), pepkit::fclass::noisy_rate(&p, b).unwrap());
        prop_assert!(na <= nb + 1e-15 && r <= na + 1e-15);
        prop_assert!((na - common::noisy_rate(mu, l, a)).abs() <= 1e-12);
    }

    #[test]
    fn iteration_bound_is_minimal((mu, l) in class(), acc in 1e-12..0.9f64) {
        let p = ClassParams::new(mu, l).unwrap();
        let k = iteration_bound(&p, acc).unwrap();
        let r = p.rate();
        prop_assert!(r.powi(k as i32) <= acc * (1.0 + 1e-8));
        if k > 1 {
            prop_assert!(r.powi(k as i32 - 1) > acc * (1.0 - 1e-8));
        }
    }
}

#[test]
fn interpolable_exact_detects_violation() {
    let p = ExactParams::new(q(1, 1), q(4, 1)).unwrap();
    let pt = |x: i64, f: BigRational, g: i64| ExactPoint { label: String::new(), x: exact(&[x]), f, g: exact(&[g]) };
    let good = [pt(0, q(0, 1), 0), pt(1, q(1, 1), 2)];
    assert!(is_interpolable_exact(&good, &p).unwrap());
    // gradient too steep for L = 4
    let bad = [pt(0, q(0, 1), 0), pt(1, q(1, 2), 5)];
    assert!(!is_interpolable_exact(&bad, &p).unwrap());
}
