//! Property tests over the public API on small grids.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use vpl_landau::collision::{invariant_floor, symmetry_probe, CollisionFields};
use vpl_landau::energy::{exact_construct, strain_guo_check};
use vpl_landau::experiment::pipelines::collision_fields;
use vpl_landau::experiment::validate_config_with;
use vpl_landau::phase_space::container::{read_field, write_field};
use vpl_landau::phase_space::{collision_invariants, project_null};
use vpl_landau::semigroup::{evolve_mode, exact_free_semigroup, EvolutionConfig};
use vpl_landau::util::{brent_minimize, gauss_legendre, random_smooth_field};
use vpl_landau::{build_grid, VelocityGrid, C64};

fn grid() -> Arc<VelocityGrid> {
    static GRID: OnceLock<Arc<VelocityGrid>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(build_grid(6.0, 12).unwrap())).clone()
}

fn fields() -> Arc<CollisionFields> {
    static CF: OnceLock<Arc<CollisionFields>> = OnceLock::new();
    CF.get_or_init(|| collision_fields(6.0, 12).unwrap()).clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn null_projection_is_an_orthogonal_projector(seed in any::<u64>(), index in 0u64..1000) {
        let g = random_smooth_field(&grid(), seed, index, false);
        let p = project_null(&g).unwrap();
        let pp = project_null(&p).unwrap();
        prop_assert!(pp.sub(&p).unwrap().norm() <= 1e-12 * g.norm());
        let rest = g.sub(&p).unwrap();
        prop_assert!(rest.inner(&p).unwrap().norm() <= 1e-12 * g.norm() * g.norm());
    }

    #[test]
    fn free_transport_is_an_isometry(
        seed in any::<u64>(),
        k in prop::array::uniform3(-2i64..=2),
        t in 0.0f64..20.0,
    ) {
        let g = random_smooth_field(&grid(), seed, 0, false);
        let s = exact_free_semigroup(&g.with_values(g.values().to_vec()), k, t);
        prop_assert!((s.norm() - g.norm()).abs() <= 1e-12 * g.norm());
        let back = exact_free_semigroup(&s, [-k[0], -k[1], -k[2]], t).to_physical();
        prop_assert!(back.sub(&g.to_physical()).unwrap().norm() <= 1e-12 * g.norm());
    }

    #[test]
    fn field_container_round_trips(seed in any::<u64>(), twist in prop::array::uniform3(-5.0f64..5.0)) {
        let g = random_smooth_field(&grid(), seed, 3, false).with_twist(twist);
        let mut buf = vec![];
        write_field(&mut buf, &g).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), g.values());
        prop_assert_eq!(back.twist(), g.twist());
        prop_assert_eq!(back.k(), g.k());
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1(n in 1usize..30, seed in any::<u64>()) {
        let mut rng = vpl_landau::util::probe_rng(seed, 0);
        let coef: Vec<f64> = (0..2 * n).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let (x, w) = gauss_legendre(n);
        let quad: f64 = x.iter().zip(&w).map(|(&x, &w)| w * coef.iter().rev().fold(0.0, |s, c| s * x + c)).sum();
        let exact: f64 = coef.iter().enumerate().filter(|(j, _)| j % 2 == 0).map(|(j, c)| 2.0 * c / (j as f64 + 1.0)).sum();
        prop_assert!((quad - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn brent_finds_a_quadratic_minimum(centre in -3.0f64..3.0, curvature in 0.1f64..10.0) {
        let (x, fx) = brent_minimize(|x| curvature * (x - centre).powi(2) + 1.0, -5.0, 5.0, 1e-10);
        prop_assert!((x - centre).abs() < 1e-6);
        prop_assert!((fx - 1.0).abs() < 1e-10);
    }

    #[test]
    fn timestep_overrides_must_divide_the_horizon(steps in 1u32..400, extra in 0.001f64..0.9) {
        let dt = 0.05;
        let exact = format!("run.t_final={}", steps as f64 * dt);
        prop_assert!(validate_config_with("experiment = \"landau-damping\"\n", &[exact]).is_ok());
        let off = format!("run.t_final={}", (steps as f64 + extra) * dt);
        let rejected = validate_config_with("experiment = \"landau-damping\"\n", &[off]).is_err();
        prop_assert!(rejected || extra < 1e-6 || extra > 1.0 - 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn collision_operator_is_symmetric_and_nonnegative(seed in any::<u64>()) {
        let report = symmetry_probe(&fields(), 3, seed).unwrap();
        prop_assert!(report.max_asymmetry < 1e-10, "asymmetry {}", report.max_asymmetry);
        prop_assert!(report.min_coercivity > -1e-10, "coercivity {}", report.min_coercivity);
    }

    #[test]
    fn collisions_conserve_the_invariants_at_the_zero_mode(seed in any::<u64>(), nu in 0.01f64..1.0) {
        let (t_final, dt) = (1.0, 0.1);
        let g = random_smooth_field(&grid(), seed, 1, false);
        let cfg = EvolutionConfig::new([0, 0, 0], nu, t_final, dt).unwrap().with_snapshot_stride(0);
        let last = evolve_mode(&g, &cfg, &fields()).unwrap().last;
        // <b, h(T) - h(0)> is nu int <Lb, h>, so the drift is bounded by the grid's invariant floor
        let floor = invariant_floor(&fields()).unwrap().floor;
        let w = grid().weight();
        for b in collision_invariants(&grid()) {
            let b_norm = (b.iter().map(|x| x * x).sum::<f64>() * w).sqrt();
            let moment = |h: &[C64]| h.iter().zip(&b).map(|(z, x)| z * x).sum::<C64>() * w;
            let drift = (moment(last.values()) - moment(g.values())).norm() / (b_norm * g.norm());
            prop_assert!(drift <= nu * t_final * floor + 1e-8, "invariant drift {drift}, floor {floor}");
        }
        prop_assert!(last.norm() <= g.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn interpolation_constant_stays_below_the_proof_bound(
        c in 0.2f64..3.0,
        m in 0.5f64..4.0,
        q in 0.2f64..0.8,
        frac in 0.05f64..0.95,
    ) {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.2).collect();
        let input = exact_construct(c, m, q, frac * q / 2.0, &times).unwrap();
        let report = strain_guo_check(&input).unwrap();
        prop_assert!(report.hypothesis_residual <= 0.0, "residual {}", report.hypothesis_residual);
        prop_assert!(report.c_const <= report.proof_bound, "{} > {}", report.c_const, report.proof_bound);
    }
}
