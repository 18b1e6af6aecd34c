use tentspace::audit;
use tentspace::halfspace::{self, HalfSpaceFunction, TimeGrid};
use tentspace::operators;
use tentspace::sample;
use tentspace::verify::{self, CheckConfig, Suite};
use tentspace::zoo::{self, SpaceKind, ZooParams};
use tentspace::Space;

fn grid16() -> Space {
    zoo::generate_space(SpaceKind::UniformGrid1d, &ZooParams::new(16, 1.0))
        .unwrap()
        .with_label("grid16")
}

fn with_default_grid(space: Space) -> (Space, TimeGrid) {
    let g = TimeGrid::default_for(&space, 1.0, 2.0).unwrap();
    (space, g)
}

#[test]
fn avgtrick_on_s3_with_eight_slabs() {
    let s3 = verify::s3();
    let grid = TimeGrid::new(0.25, std::f64::consts::SQRT_2, 8).unwrap();
    let r = verify::run_check("avgtrick", &s3, &grid, &CheckConfig::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.measured_defect <= 1e-12);
}

#[test]
fn pi_t_identity_is_exact_on_one_point() {
    let one = verify::one_point();
    let grid = TimeGrid::new(0.1, 2.0, 5).unwrap();
    let r = verify::run_check("pi_t_identity", &one, &grid, &CheckConfig::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.measured_defect, 0.0);
}

#[test]
fn tent_inclusion_is_exhaustive_on_four_points() {
    let (space, grid) = with_default_grid(verify::four_point());
    let r = verify::run_check("tent_inclusion", &space, &grid, &CheckConfig::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.constants["pairs"], 256.0);
    assert!(r.constants["eligible_pairs"] > 0.0);
}

#[test]
fn identities_pass_on_small_spaces() {
    let spaces = vec![
        with_default_grid(verify::one_point()),
        with_default_grid(verify::s3()),
        with_default_grid(grid16()),
    ];
    let results = verify::run_suite(Suite::Identities, &spaces, &CheckConfig::default()).unwrap();
    assert_eq!(results.len(), 3 * 7);
    let failed: Vec<_> = results.iter().filter(|r| r.failed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn set_geometry_passes_on_four_points() {
    let spaces = vec![with_default_grid(verify::four_point())];
    let results = verify::run_suite(Suite::SetGeometry, &spaces, &CheckConfig::default()).unwrap();
    assert!(results.iter().all(|r| r.pass), "{results:#?}");
}

#[test]
fn full_suite_passes_on_standard_spaces() {
    let cfg = CheckConfig::default();
    let spaces = verify::standard_spaces(&cfg).unwrap();
    let results = verify::run_suite(Suite::All, &spaces, &cfg).unwrap();
    let failed: Vec<_> = results.iter().filter(|r| r.failed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    let table = verify::summary_table(&results);
    assert!(table.contains("0 failed"));
}

#[test]
fn gaussian_doubling_is_flagged_unbounded() {
    let g = zoo::generate_space(SpaceKind::GaussianPlane, &ZooParams::new(9, 1.0)).unwrap();
    let grid = TimeGrid::default_for(&g, 1.0, 2.0).unwrap();
    let results = verify::run_suite(Suite::Assumptions, &[(g, grid)], &CheckConfig::default()).unwrap();
    let d = results.iter().find(|r| r.name == "doubling_audit").unwrap();
    assert!(d.pass);
    assert_eq!(d.constants["unbounded_at_tested_scales"], 1.0);
}

#[test]
fn ties_produce_skips_not_failures() {
    // alpha * tau_j runs through 1, 2, 4, which are distances on the grid.
    let space = grid16();
    let grid = TimeGrid::from_first_representative(1.0, 2.0, 3).unwrap();
    let cfg = CheckConfig {
        beta: 1.0,
        ..CheckConfig::default()
    };
    let results = verify::run_suite(Suite::All, &[(space, grid)], &cfg).unwrap();
    assert!(results.iter().any(|r| r.skipped.is_some()));
    assert!(results.iter().all(|r| !r.failed()), "{results:#?}");
}

#[test]
fn results_are_deterministic() {
    let cfg = CheckConfig::default();
    let (space, grid) = with_default_grid(grid16());
    for name in verify::check_names() {
        let a = verify::run_check(name, &space, &grid, &cfg).unwrap();
        let b = verify::run_check(name, &space, &grid, &cfg).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"), "{name}");
    }
}

#[test]
fn unknown_names_are_rejected() {
    let (space, grid) = with_default_grid(verify::s3());
    assert!(verify::run_check("no_such_check", &space, &grid, &CheckConfig::default()).is_err());
    assert!("everything".parse::<Suite>().is_err());
}

#[test]
fn integrate_matches_cell_accumulation() {
    let space = grid16();
    let grid = TimeGrid::default_for(&space, 1.0, 1.0).unwrap();
    let mut rng = sample::rng(9);
    let phi = sample::uniform_function(&mut rng, grid.slabs(), space.len(), -1.0, 1.0);
    let got = halfspace::integrate(&space, &grid, &phi, None).unwrap();
    let mut cells: Vec<f64> = Vec::new();
    for i in (0..space.len()).rev() {
        for j in (0..grid.slabs()).rev() {
            cells.push(phi.get(j, i) * space.weight(i) * grid.log_weight());
        }
    }
    let oracle: f64 = cells.iter().sum();
    assert!((got - oracle).abs() <= 1e-15 * cells.iter().map(|c| c.abs()).sum::<f64>());
}

#[test]
fn aperture_ratio_on_grid16_is_recorded_and_bounded() {
    let space = grid16();
    let grid = TimeGrid::default_for(&space, 1.0, 2.0).unwrap();
    let st = operators::aperture_ratio(&space, &grid, 2.0, 2.0, 1.0, 2.0, 10, 3).unwrap();
    assert!(st.ratio.samples > 0);
    // p = q: both norms are the same half-space L^2 norm.
    assert!((st.ratio.max_ratio - 1.0).abs() <= 1e-12);
    assert!(st.ratio.max_ratio <= st.volume_factor);

    let mixed = operators::aperture_ratio(&space, &grid, 1.0, 2.0, 1.0, 2.0, 10, 3).unwrap();
    assert!(mixed.ratio.max_ratio.is_finite() && mixed.ratio.min_ratio > 0.0);
    assert!(mixed.ratio.max_ratio <= mixed.volume_factor * (1.0 + 1e-12));
}

#[test]
fn variant_ratios_are_bounded_by_doubling() {
    let space = zoo::generate_space(SpaceKind::UniformGrid2d, &ZooParams::new(8, 1.0)).unwrap();
    let grid = TimeGrid::default_for(&space, 1.0, 1.0).unwrap();
    let q = 2.0;
    let stats = operators::variant_ratio(&space, &grid, 2.0, q, 1.0, 8, 5).unwrap();
    assert_eq!(stats.len(), 12);
    // With aperture 1 the volume normalisations differ by a ball at the
    // vertex versus at the integration point, within one doubling step.
    let radii: Vec<f64> = grid.representatives().to_vec();
    let d = audit::doubling_constant(&space, &radii).unwrap().constant;
    let bound = d.powf(1.0 / q) * (1.0 + 1e-12);
    for s in &stats {
        assert!(s.ratio.max_ratio <= bound, "{} / {}: {}", s.numerator, s.denominator, s.ratio.max_ratio);
        assert!(s.ratio.min_ratio >= 1.0 / bound);
    }
}

#[test]
fn variant_ratio_on_one_point_is_one() {
    let one = verify::one_point();
    let grid = TimeGrid::new(0.5, 2.0, 4).unwrap();
    for s in operators::variant_ratio(&one, &grid, 2.0, 2.0, 1.0, 4, 1).unwrap() {
        assert!((s.ratio.max_ratio - 1.0).abs() <= 1e-12);
        assert!((s.ratio.min_ratio - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn zero_function_has_zero_norm_everywhere() {
    let (space, grid) = with_default_grid(verify::s3());
    let f = HalfSpaceFunction::for_grid(&space, &grid);
    for p in [0.5, 1.0, 2.0, f64::INFINITY] {
        let n = tentspace::functionals::tent_norm(&space, &grid, &f, p, 2.0, 1.0, Default::default()).unwrap();
        assert_eq!(n, 0.0);
    }
}
