use proptest::prelude::*;

use djcm::dynamics::{solve_sector, solve_sector_with, time_grid, InitialCondition, MethodPreference, TOL_NORM};
use djcm::model::{DeformationKind, ModelParams};
use djcm::observables::{
    binary_entropy, field_moments, g2_zero, inversion, mandel_q, populations, reduced_density, squeezing_params,
    von_neumann_entropy,
};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.05f64..1.0,
        (0.0f64..0.3, 0.01f64..0.3, 0.01f64..0.3),
        0.0f64..0.2,
        0.0f64..0.2,
        0.0f64..0.2,
        0.0f64..0.5,
        0u32..6,
    )
        .prop_map(|(omega, (w1, d2, d3), g1, g2, omega_e, chi, n)| ModelParams {
            omega_cavity: omega,
            omega_levels: [w1, w1 + d2, w1 + d2 + d3],
            g1,
            g2,
            omega_e,
            deformation: DeformationKind::from_chi(chi),
            sector_n: n,
        })
}

fn initial_condition() -> impl Strategy<Value = InitialCondition> {
    proptest::array::uniform6(-1.0f64..1.0)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let c = |k: usize| num_complex::Complex64::new(v[2 * k] / norm, v[2 * k + 1] / norm);
            InitialCondition::new(c(0), c(1), c(2)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observables_respect_their_ranges(p in params(), ic in initial_condition()) {
        let traj = solve_sector(&p, &ic, &time_grid(&p, 30.0, 60)).unwrap();
        let d = p.deformation;
        let n = p.sector_n;
        let m1_bound = (d.f_squared(n + 1) * (n + 1) as f64).max(n as f64 * d.f_squared(n));
        for s in &traj.samples {
            let [p1, p2, p3] = populations(s);
            prop_assert!((p1 + p2 + p3 - 1.0).abs() <= TOL_NORM);
            let w = inversion(s);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&w));

            let rho = reduced_density(s);
            prop_assert!((rho.trace() - 1.0).abs() <= 1e-9);
            prop_assert!(rho.hermiticity_error() <= 1e-15);
            for ev in rho.eigenvalues() {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ev));
            }
            let e = von_neumann_entropy(&rho);
            prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-12).contains(&e));
            prop_assert!((e - binary_entropy(p1)).abs() <= 1e-10);

            let m = field_moments(s, &p);
            prop_assert!(m.m1 >= 0.0 && m.m2 >= 0.0 && m.m1 <= m1_bound * (1.0 + 1e-9));
            if let Ok(g2) = g2_zero(s, &p) {
                prop_assert!(g2 >= 0.0);
            }
            if let Ok(q) = mandel_q(s, &p) {
                prop_assert!(q >= -1.0 - 1e-12);
            }

            let sq = squeezing_params(s, &p);
            prop_assert!(sq.max_anomalous() <= 1e-14);
            prop_assert!((sq.s1_x - 2.0 * m.m1).abs() <= 1e-12 * m.m1.max(1.0));
            prop_assert!((sq.s2_x - 2.0 * (m.m2 - m.m1)).abs() <= 1e-12 * m.m2.max(1.0));
        }
    }

    #[test]
    fn methods_agree(p in params(), ic in initial_condition()) {
        let grid = time_grid(&p, 20.0, 40);
        let a = solve_sector_with(&p, &ic, &grid, MethodPreference::Auto).unwrap();
        let o = solve_sector_with(&p, &ic, &grid, MethodPreference::ForceOracle).unwrap();
        prop_assert!(a.max_abs_diff(&o) <= 1e-6);
        prop_assert!(a.max_norm_drift() <= TOL_NORM);
        // fixed 1e-10 tolerances: drift grows with the raw integration length
        prop_assert!(o.max_norm_drift() <= 1e-7);
    }
}
