use std::path::PathBuf;

use mhc_core::motivic::TwistRule;
use mhc_core::nearby::SNCScenario;
use mhc_core::scenario::{parse_scenario, ScenarioFile};
use mhc_core::verify::check_identity;
use proptest::prelude::*;

fn fixtures() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    v.sort();
    v
}

#[test]
fn round_trip_on_every_fixture() {
    for p in fixtures() {
        let doc = ScenarioFile::load(&p).unwrap();
        let again = ScenarioFile::from_toml(&doc.to_toml()).unwrap();
        assert_eq!(again, doc, "{}", p.display());
        assert_eq!(again.build().unwrap(), doc.build().unwrap());
    }
}

#[test]
fn node_fixture_is_the_xy_scenario() {
    let s = parse_scenario(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/node.scn"))
        .unwrap();
    assert_eq!(
        s,
        SNCScenario::affine_monomial("node", &[1, 1], &[]).unwrap()
    );
    assert_eq!(s.function_label, "xy");
}

#[test]
fn expectations_hold() {
    for p in fixtures() {
        let doc = ScenarioFile::load(&p).unwrap();
        let s = doc.build().unwrap();
        let e = doc.expect.clone().expect("every fixture pins its classes");
        let r = check_identity(&s, e.convention.unwrap()).unwrap();
        assert_eq!(
            e.lhs.as_deref(),
            Some(r.lhs.render().as_str()),
            "{}",
            p.display()
        );
        assert_eq!(e.rhs.as_deref(), Some(r.rhs.render().as_str()));
        assert_eq!(e.defect.as_deref(), Some(r.defect.render().as_str()));
        assert_eq!(
            e.nearby.as_deref(),
            Some(s.nearby_class().render().as_str())
        );
    }
}

#[test]
fn explicit_export_of_every_builtin() {
    for p in fixtures() {
        let s = parse_scenario(&p).unwrap();
        let u = ScenarioFile::from_toml(&ScenarioFile::explicit(&s).to_toml())
            .unwrap()
            .build()
            .unwrap();
        for rule in TwistRule::ALL {
            let (a, b) = (
                check_identity(&s, rule).unwrap(),
                check_identity(&u, rule).unwrap(),
            );
            assert_eq!(a.defect.render(), b.defect.render(), "{}", p.display());
            assert_eq!(a.rhs.render(), b.rhs.render());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn powers_of_t(k in 1u32..9) {
        let covers = if k > 1 { vec![(vec![0], format!("{k}*[pt]"))] } else { vec![] };
        let s = SNCScenario::affine_monomial("t", &[k], &covers).unwrap();
        for rule in TwistRule::ALL {
            let r = check_identity(&s, rule).unwrap();
            prop_assert!(r.pass);
            prop_assert_eq!(r.rhs.render(), if k == 1 { "(1 + y)*[O_pt]".to_string() } else { format!("({k} + {k}*y)*[O_pt]") });
        }
        prop_assert_eq!(s.acampo_check(), (k as i64, k as i64, true));
    }

    #[test]
    fn divisibility_and_shadow_on_monomials(e in prop::collection::vec(0u32..3, 1..4)) {
        prop_assume!(e.iter().any(|a| *a > 0));
        // reduced exponents only: non-reduced strata need declared covers
        let e: Vec<u32> = e.into_iter().map(|a| a.min(1)).collect();
        let s = SNCScenario::affine_monomial("m", &e, &[]).unwrap();
        let r = check_identity(&s, TwistRule::Shifted).unwrap();
        prop_assert!(r.divisible);
        prop_assert!(r.acampo.2);
        // the degree functional only sees compact strata; with every
        // coordinate in f the origin is the only stratum of nonzero Euler
        // characteristic
        if e.iter().all(|a| *a > 0) {
            prop_assert!(r.shadow.agrees());
        }
    }
}
