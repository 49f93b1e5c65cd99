use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use reekit_core::ingest::{parse_csv, ImportOptions};
use reekit_core::lambda::{build_basis, fit_lambdas};
use reekit_core::metrics::{ndpr, pattern_shape_ratios, treo, OxideConfig, ShapeRatio};
use reekit_core::{builtin_reference, canonical_radii, normalize, Element, ReePattern};

fn pattern_strategy() -> impl Strategy<Value = ReePattern> {
    prop::collection::vec(0.01f64..1.0e4, 14).prop_map(|values| {
        let conc = Element::CANONICAL.iter().copied().zip(values).collect();
        ReePattern::new("p", conc).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_csv(&bytes, &ImportOptions::default());
    }

    #[test]
    fn parser_is_total_over_rows(
        rows in prop::collection::vec(prop::collection::vec(
            prop_oneof![
                (0.001f64..1e5).prop_map(|v| format!("{v}")),
                Just(String::new()),
                Just("NA".to_string()),
                Just("-3".to_string()),
                Just("abc".to_string()),
                Just("<0.1".to_string()),
            ],
            6,
        ), 1..40)
    ) {
        let mut text = String::from("sample,La,Ce,Nd,Sm,Eu,Yb\n");
        for (i, r) in rows.iter().enumerate() {
            text.push_str(&format!("s{i},{}\n", r.join(",")));
        }
        let (ds, report) = parse_csv(text.as_bytes(), &ImportOptions::default()).unwrap();
        prop_assert_eq!(report.input_rows(), rows.len());
        prop_assert_eq!(ds.len(), report.rows_accepted);
        let again = parse_csv(text.as_bytes(), &ImportOptions::default()).unwrap();
        prop_assert_eq!(&again.0, &ds);
        prop_assert_eq!(&again.1, &report);
    }

    #[test]
    fn scaling_shifts_lambda0_only(p in pattern_strategy(), s in 0.01f64..100.0) {
        let ch = builtin_reference("chondrite").unwrap();
        let radii = canonical_radii();
        let basis = build_basis(&radii, 4).unwrap();
        let a = fit_lambdas(&normalize(&p, &ch, &radii, &BTreeSet::new()).unwrap(), &basis, None).unwrap();
        let b = fit_lambdas(&normalize(&p.scaled(s), &ch, &radii, &BTreeSet::new()).unwrap(), &basis, None).unwrap();
        prop_assert!((b.lambdas[0] - a.lambdas[0] - s.ln()).abs() < 1e-9);
        for j in 1..4 {
            prop_assert!((b.lambdas[j] - a.lambdas[j]).abs() < 1e-9 * a.lambdas[j].abs().max(1e-3));
        }
    }

    #[test]
    fn treo_is_linear_and_ndpr_scale_free(p in pattern_strategy(), q in pattern_strategy(), s in 0.01f64..100.0) {
        let ox = OxideConfig::default();
        let t = treo(&p, &ox);
        prop_assert!((treo(&p.scaled(s), &ox) - s * t).abs() <= 1e-9 * s * t);
        let mut sum = p.concentrations_ppm.clone();
        for (e, v) in &q.concentrations_ppm {
            *sum.get_mut(e).unwrap() += v;
        }
        let combined = ReePattern::new("sum", sum).unwrap();
        let additive = treo(&p, &ox) + treo(&q, &ox);
        prop_assert!((treo(&combined, &ox) - additive).abs() <= 1e-9 * additive);
        prop_assert!((ndpr(&p.scaled(s)).unwrap() - ndpr(&p).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn flat_pattern_identities() {
    let ch = builtin_reference("chondrite").unwrap();
    let radii = canonical_radii();
    let basis = build_basis(&radii, 4).unwrap();
    let flat: BTreeMap<Element, f64> = Element::CANONICAL.iter().map(|&e| (e, ch.value(e) * 3.5)).collect();
    let p = ReePattern::new("flat", flat).unwrap();
    let fit = fit_lambdas(&normalize(&p, &ch, &radii, &BTreeSet::new()).unwrap(), &basis, None).unwrap();
    assert!(fit.lambdas[1..].iter().all(|l| l.abs() <= 1e-10));
    let ratios = pattern_shape_ratios(&p, &ch);
    for r in ShapeRatio::ALL {
        assert!((ratios.get(r).unwrap() - 1.0).abs() < 1e-12);
    }
}
