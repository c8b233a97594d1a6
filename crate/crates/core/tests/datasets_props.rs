use proptest::prelude::*;
use rand::Rng;

use npick::datasets::{aggregate_from_simple, parse_dataset, serialize_dataset, validate_admissible_default, Dataset};
use npick::fixtures::{self, seeded_rng};
use npick::numkit::c;
use npick::pick::pick_matrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_roundtrip_is_exact(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let scale = rng.gen_range(0.0..2.0);
        let simple = Dataset::Simple(fixtures::random_simple(&mut rng, scale, true));
        let general = Dataset::Btoa(fixtures::random_btoa(&mut rng, scale));
        for d in [simple, general] {
            let text = serialize_dataset(&d);
            prop_assert_eq!(parse_dataset(text.as_bytes()).unwrap(), d);
        }
    }

    #[test]
    fn aggregated_simple_data_is_admissible(seed in any::<u64>(), coincide in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let scale = rng.gen_range(0.0..2.0);
        let s = fixtures::random_simple(&mut rng, scale, coincide);
        let report = validate_admissible_default(&aggregate_from_simple(&s).unwrap()).unwrap();
        prop_assert!(report.verdict, "{:?}", report);
    }

    #[test]
    fn rho_only_reaches_the_coupling_block(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let s = fixtures::random_simple(&mut rng, 1.0, true);
        prop_assume!(!s.rho.is_empty());
        let mut t = s.clone();
        for v in t.rho.values_mut() {
            *v += c(0.25, -0.5);
        }
        let a = pick_matrix(&aggregate_from_simple(&s).unwrap(), None).unwrap();
        let b = pick_matrix(&aggregate_from_simple(&t).unwrap(), None).unwrap();
        prop_assert_eq!(&a.gamma_l, &b.gamma_l);
        prop_assert_eq!(&a.gamma_r, &b.gamma_r);
        let ga = aggregate_from_simple(&s).unwrap().gamma;
        let gb = aggregate_from_simple(&t).unwrap().gamma;
        prop_assert!(ga != gb);
    }
}

#[test]
fn fixture_d4_places_rho_in_gamma() {
    let d = fixtures::d4(c(0.2, 0.1));
    assert_eq!(d.gamma[(0, 0)], c(0.2, 0.1));
}
