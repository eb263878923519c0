//! Cross-module properties on randomized inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use annspec::estimates::annulus_sandwich_check;
use annspec::geometry::{ball_measure, QuadGrid};
use annspec::heatkernel::{annulus_heat_spectrum, normalized_kernel};
use annspec::perturb::{annulus_perturbation_audit, AnnulusScenario, RadialProfile};
use annspec::radial::solve_radial;
use annspec::{AnnularDomainSpec, BaseDomain, MetricDomain, WeightFunction};

fn thin(eps: f64) -> AnnularDomainSpec {
    AnnularDomainSpec::new(2, 1.0, 1.0 + eps, BaseDomain::FullSphere { n: 2 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shell_eigenvalue_sits_in_closed_form_interval(n in 2usize..7, a in 0.1f64..3.0, ratio in 1.01f64..20.0) {
        let b = a * ratio;
        let lambda = solve_radial(n, a, b, 0.0, 1024, 1).unwrap()[0].lambda;
        let rep = annulus_sandwich_check(n, a, b, lambda).unwrap();
        prop_assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn thickening_lowers_the_eigenvalue(n in 2usize..6, t in 0.05f64..1.0, dt in 0.01f64..0.5) {
        let thin = solve_radial(n, 1.0, 1.0 + t, 0.0, 512, 1).unwrap()[0].lambda;
        let thick = solve_radial(n, 1.0, 1.0 + t + dt, 0.0, 512, 1).unwrap()[0].lambda;
        prop_assert!(thick < thin);
    }

    #[test]
    fn weighted_balls_grow_with_radius(r_frac in 0.0f64..1.0, theta in 0.0f64..2.0 * PI, r in 0.01f64..1.0) {
        let spec = thin(0.2);
        let w = WeightFunction::dirichlet(&spec).unwrap();
        let grid = QuadGrid::new(MetricDomain::annular(spec).unwrap(), &w, 32, 1024).unwrap();
        let rad = 1.0 + 0.2 * r_frac;
        let c = [rad * theta.cos(), rad * theta.sin()];
        let small = ball_measure(&grid, &c, r).unwrap();
        let big = ball_measure(&grid, &c, 2.0 * r).unwrap();
        prop_assert!(small <= big);
        prop_assert!(big <= grid.total_mass() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn normalized_annulus_kernel_is_symmetric_and_positive(
        r1 in 1.01f64..1.09, r2 in 1.01f64..1.09, t1 in 0.0f64..2.0 * PI, t2 in 0.0f64..2.0 * PI, t in 0.5f64..5.0,
    ) {
        let spec = thin(0.1);
        let s = annulus_heat_spectrum(&spec, 0.5).unwrap();
        let x = [r1 * t1.cos(), r1 * t1.sin()];
        let y = [r2 * t2.cos(), r2 * t2.sin()];
        // The raw kernel underflows here (λ₁ ≈ 990); the normalized one does not.
        let pxy = normalized_kernel(&s, t, &x, &y).unwrap().value;
        let pyx = normalized_kernel(&s, t, &y, &x).unwrap().value;
        prop_assert!(pxy > 0.0);
        prop_assert!((pxy - pyx).abs() <= 1e-12 * pxy.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn perturbed_annulus_eigenvalues_are_ordered(
        k in 1usize..8, c0 in 0.0f64..1.0, amp in 0.0f64..0.5, eps in 0.2f64..0.4,
    ) {
        let profile = RadialProfile { constant: c0, cos: vec![0.0; k - 1].into_iter().chain([amp]).collect(), sin: vec![] };
        let e3 = eps.powi(3);
        let sc = AnnulusScenario { a_eps: e3, b_eps: e3, inner: profile.clone(), outer: profile, ..AnnulusScenario::bumpy(eps) };
        let rep = annulus_perturbation_audit(&sc, 40, 192).unwrap();
        prop_assert!(rep.ordering_holds, "{rep:?}");
        prop_assert!(rep.upper_ratio.is_finite() && rep.lower_ratio > 0.0);
    }
}
