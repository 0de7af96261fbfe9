use approx::assert_abs_diff_eq;
use grunsky::conformal::{build_disk, build_interior_polynomial, build_joukowski};
use grunsky::corners::{finalintegral, hp_hat, hp_hat_numeric};
use grunsky::coulomb::{exterior_identity, log_z_disk, log_z_interior, Route};
use grunsky::experiment::DomainSpec;
use grunsky::fredholm::{logdet_profile, operator_norm};
use grunsky::grunsky::grunsky_psi_contour;
use num_complex::Complex64 as c64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ellipse_block_is_diagonal(c in 0.05f64..0.9) {
        let b = grunsky_psi_contour(&build_joukowski(c).unwrap(), 16).unwrap();
        for k in 1..=16 {
            for l in 1..=16 {
                let want = if k == l { c.powi(k as i32) } else { 0.0 };
                prop_assert!((b.b(k, l) - want).norm() < 1e-10);
            }
        }
        prop_assert!(operator_norm(&b, 16).unwrap() < 1.0);
        let p = logdet_profile(&b, 16).unwrap();
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }

    #[test]
    fn integral_closed_form(beta in 0.05f64..0.95) {
        let (closed, quad) = finalintegral(beta).unwrap();
        prop_assert!((closed - quad).abs() < 1e-9);
    }

    #[test]
    fn transform_closed_form(gamma in 0.2f64..1.9, xi in 0.0f64..3.0) {
        let d = hp_hat(xi, gamma).unwrap() - hp_hat_numeric(xi, gamma).unwrap();
        prop_assert!(d.abs() < 1e-8);
    }

    #[test]
    fn domain_names_round_trip(m in 3usize..12, c in 0.0f64..0.95, r in 1.01f64..3.0) {
        for spec in [DomainSpec::Polygon(m), DomainSpec::Joukowski(c), DomainSpec::Equipotential(r, Box::new(DomainSpec::Polygon(m)))] {
            let back: DomainSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn exterior_identity_for_quadratics(a in -0.4f64..0.4, phase in 0.0f64..6.28) {
        let f = build_interior_polynomial(&[c64::new(1.0, 0.0), c64::from_polar(a, phase)]).unwrap();
        for row in exterior_identity(&f, &[1, 2, 3, 4, 5, 6]).unwrap() {
            prop_assert!(row.abs_diff < 1e-7, "n = {}: {}", row.n, row.abs_diff);
        }
    }
}

#[test]
fn disk_partition_function() {
    for n in 1..=10 {
        assert_abs_diff_eq!(log_z_interior(&build_disk(), n, Route::Direct).unwrap(), log_z_disk(n), epsilon = 1e-12);
        assert_abs_diff_eq!(log_z_interior(&build_disk(), n, Route::Grunsky).unwrap(), log_z_disk(n), epsilon = 1e-12);
    }
    // Z_3 = pi^3 / 3!
    assert_abs_diff_eq!(log_z_disk(3), (std::f64::consts::PI.powi(3) / 6.0).ln(), epsilon = 1e-14);
}

#[test]
fn malformed_domains_are_rejected() {
    for bad in ["", "polygon:2", "joukowski:1.5", "equipotential:0.9:square", "hexagon"] {
        assert!(bad.parse::<DomainSpec>().is_err(), "{bad}");
    }
}
