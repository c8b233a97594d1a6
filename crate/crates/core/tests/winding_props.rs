use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use npick::fixtures::{self, random_complex, random_contraction, random_matrix, seeded_rng};
use npick::lft::{make_interpolant, FreeParameter};
use npick::numkit::{identity, re};
use npick::realization::{blaschke_factor, build_psi, build_theta, MatrixFunction, Realization};
use npick::verify::{check_interpolation, dbr_kernel_inertia, ContourConfig};
use npick::winding::{certify, winding_det, WindingConfig};

/// Random `I + C(λ − A)⁻¹B` with the spectrum of `A` off the axis.
fn random_rational<R: Rng>(rng: &mut R, n: usize, k: usize) -> Realization {
    let mut a = random_matrix(rng, n, n);
    for i in 0..n {
        a[(i, i)] += re(if rng.gen_bool(0.5) { 1.5 } else { -1.5 });
    }
    let b = random_matrix(rng, n, k) * re(0.5);
    let c = random_matrix(rng, k, n) * re(0.5);
    Realization::new(a, b, c, identity(k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blaschke_products_wind_by_degree(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        let mut f = Realization::constant(identity(1));
        for _ in 0..k {
            let alpha = random_complex(&mut rng, (0.1, 3.0), (-5.0, 5.0));
            f = f.series(&blaschke_factor(alpha, &identity(1)).unwrap()).unwrap();
        }
        prop_assert_eq!(winding_det(&f, &WindingConfig::default()).unwrap(), k as i64);
    }

    #[test]
    fn winding_is_additive_over_products(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let k = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=3);
        let f = random_rational(&mut rng, n, k);
        let n = rng.gen_range(1..=3);
        let g = random_rational(&mut rng, n, k);
        let cfg = WindingConfig::default();
        let (Ok(wf), Ok(wg)) = (winding_det(&f, &cfg), winding_det(&g, &cfg)) else {
            return Err(TestCaseError::reject("determinant too small on the axis"));
        };
        prop_assert_eq!(winding_det(&f.series(&g).unwrap(), &cfg).unwrap(), wf + wg);
    }

    #[test]
    fn definite_case_psi_inverse_matches_theta22(seed in any::<u64>(), simple in any::<bool>()) {
        let d = fixtures::random_with_kappa(&mut seeded_rng(seed), 0, simple).to_btoa().unwrap();
        let theta = build_theta(&d).unwrap();
        let psi = build_psi(&d.u, &d.w).unwrap();
        let cfg = WindingConfig::default();
        prop_assert_eq!(
            winding_det(&psi.inverse, &cfg).unwrap(),
            winding_det(&theta.block(2, 2), &cfg).unwrap()
        );
    }

    #[test]
    fn certified_bundles_are_consistent(seed in any::<u64>(), kappa in 0usize..3) {
        let mut rng = seeded_rng(seed);
        let d = {
            let simple = rng.gen_bool(0.5);
            fixtures::random_with_kappa(&mut rng, kappa, simple)
        }.to_btoa().unwrap();
        let g = FreeParameter::constant(random_contraction(&mut rng, d.p, d.m)).unwrap();
        let s = make_interpolant(&d, g).unwrap();
        let cert = certify(&s, &WindingConfig::default()).unwrap();
        prop_assume!(cert.side_condition_ok);
        prop_assert!(cert.certified, "{:?}", cert);
        let r = check_interpolation(&s, &d, &ContourConfig::default()).unwrap();
        prop_assert!(r.r_left.max(r.r_right).max(r.r_bi) <= 1e-8);
        let poles = s.poles();
        let grid: Vec<Complex64> = (0..6)
            .map(|_| loop {
                let z = random_complex(&mut rng, (0.05, 4.0), (-4.0, 4.0));
                if poles.iter().all(|p| (p - z).norm() > 1e-2 && (p - z.conj()).norm() > 1e-2) {
                    break z;
                }
            })
            .collect();
        let sq = dbr_kernel_inertia(&s, &grid, true).unwrap().inertia.n_minus;
        prop_assert!(sq <= kappa);
    }
}
