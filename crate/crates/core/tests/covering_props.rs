use orlicz_spectral::covering::{
    besicovich_cover, besicovich_cover_with_sides, build_calibrated_covering, calibration_error, cell_points,
    color_bound, cube_norm_profile, multiplicity_bound, solve_side_length, Covering,
};
use orlicz_spectral::young::inv_a;
use orlicz_spectral::{orlicz_norm, DomainMask, Grid, MaskPreset, MeasuredField};
use proptest::prelude::*;

/// Depth at `p` counted directly from the cube list.
fn depth_at(cov: &Covering, p: &[f64]) -> usize {
    cov.cubes.iter().filter(|c| c.contains(p)).count()
}

fn instance(dim: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (5usize..60).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), n),
            prop::collection::vec(0.02f64..0.4, n),
        )
    })
}

fn check_instance(points: &[Vec<f64>], sides: &[f64], probes: &[Vec<f64>]) -> Result<(), TestCaseError> {
    let dim = points[0].len();
    let cov = besicovich_cover_with_sides(points, sides).unwrap();
    let cert = cov.certify(points);
    prop_assert!(cert.ok(), "{cert:?}");
    prop_assert!(cov.multiplicity <= multiplicity_bound(dim));
    prop_assert!(cov.colors_used() <= color_bound(dim));
    for p in points.iter().chain(probes) {
        prop_assert!(depth_at(&cov, p) <= cov.multiplicity);
    }
    for (i, a) in cov.cubes.iter().enumerate() {
        for (j, b) in cov.cubes.iter().enumerate().skip(i + 1) {
            prop_assert!(!(cov.colors[i] == cov.colors[j] && a.intersects(b)));
            prop_assert!(!a.halved().intersects(&b.halved()));
            prop_assert!(!a.contains(&b.center) && !b.contains(&a.center));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn besicovitch_d1((pts, sides) in instance(1), probes in prop::collection::vec(prop::collection::vec(-0.2f64..1.2, 1), 50)) {
        check_instance(&pts, &sides, &probes)?;
    }

    #[test]
    fn besicovitch_d2((pts, sides) in instance(2), probes in prop::collection::vec(prop::collection::vec(-0.2f64..1.2, 2), 100)) {
        check_instance(&pts, &sides, &probes)?;
    }

    #[test]
    fn besicovitch_d3((pts, sides) in instance(3), probes in prop::collection::vec(prop::collection::vec(-0.2f64..1.2, 3), 200)) {
        check_instance(&pts, &sides, &probes)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn profile_is_monotone(seed in prop::collection::vec(0.0f64..30.0, 16 * 16), x in 0.0f64..1.0, y in 0.0f64..1.0, l1 in 0.0f64..1.5, dl in 0.0f64..0.5) {
        let mask = DomainMask::preset(MaskPreset::Square, 16).unwrap();
        let w = MeasuredField::on_mask(&mask, seed).unwrap();
        let a = cube_norm_profile(&w, &mask, [x, y], l1).unwrap();
        let b = cube_norm_profile(&w, &mask, [x, y], l1 + dl).unwrap();
        prop_assert!(a <= b + 1e-9, "{a} > {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn calibrated_covering_bounds(
        preset in prop::sample::select(MaskPreset::ALL.to_vec()),
        amp in 5.0f64..60.0,
        cx in 0.2f64..0.8,
        cy in 0.2f64..0.8,
        frac in 0.02f64..0.3,
    ) {
        let mask = DomainMask::preset(preset, 20).unwrap();
        let w = MeasuredField::sample(&mask, |x, y| amp * (-6.0 * ((x - cx).powi(2) + (y - cy).powi(2))).exp()).unwrap();
        let total = orlicz_norm(&w).unwrap().norm;
        let level = frac * total;
        let cov = build_calibrated_covering(&w, &mask, level, 1e-3).unwrap();
        prop_assert!(cov.certify(&cell_points(&mask)).ok());
        prop_assert!(cov.len() as f64 * level <= 17.0 * total * (1.0 + 1e-3));
        prop_assert!(calibration_error(&cov).unwrap() <= 1e-3);
    }
}

#[test]
fn small_examples() {
    let one = besicovich_cover(&[vec![0.3, 0.3]], |_| 1.0).unwrap();
    assert_eq!((one.len(), one.multiplicity, one.colors_used()), (1, 1, 1));
    let two = besicovich_cover(&[vec![0.0, 0.0], vec![10.0, 0.0]], |_| 1.0).unwrap();
    assert_eq!((two.len(), two.multiplicity), (2, 1));
    assert!(besicovich_cover(&[vec![0.0, 0.0]], |_| 0.0).is_err());
}

#[test]
fn grid_with_constant_side() {
    let pts: Vec<Vec<f64>> = (0..50 * 50).map(|i| vec![(i % 50) as f64 / 49.0, (i / 50) as f64 / 49.0]).collect();
    let cov = besicovich_cover(&pts, |_| 0.11).unwrap();
    let cert = cov.certify(&pts);
    assert!(cert.ok() && cov.multiplicity <= 4 && cov.colors_used() <= 17, "{cert:?}");
}

#[test]
fn constant_field_profile_and_side() {
    let grid = Grid::new([-2.0, -2.0], 4.0, 64).unwrap();
    let mask = DomainMask::from_fn(grid, |_, _| true).unwrap();
    let w = MeasuredField::on_mask(&mask, vec![1.0; mask.num_inside()]).unwrap();
    let a1 = inv_a(1.0).unwrap();
    assert_eq!(cube_norm_profile(&w, &mask, [0.0, 0.0], 0.0).unwrap(), 0.0);
    for l in [0.5, 1.0, 1.7, 2.0] {
        let j = cube_norm_profile(&w, &mask, [0.0, 0.0], l).unwrap();
        assert!((j - l * l * a1).abs() < 1e-9, "{l}: {j}");
    }
    let total = orlicz_norm(&w).unwrap().norm;
    assert!((cube_norm_profile(&w, &mask, [0.0, 0.0], 10.0).unwrap() - total).abs() < 1e-9);
    for (level, side) in [(a1, 1.0), (4.0 * a1, 2.0)] {
        let l = solve_side_length(&w, &mask, [0.0, 0.0], level, 1e-3).unwrap();
        assert!((l - side).abs() < 1e-3, "{l}");
    }
    let l = solve_side_length(&w, &mask, [0.0, 0.0], 0.99 * total, 1e-3).unwrap();
    assert!(l.is_finite() && l > 3.9);
    assert!(solve_side_length(&w, &mask, [0.0, 0.0], 2.0 * total, 1e-3).is_err());
    assert!(solve_side_length(&w, &mask, [0.0, 0.0], 0.0, 1e-3).is_err());
}

#[test]
fn unit_square_half_level() {
    let mask = DomainMask::preset(MaskPreset::Square, 32).unwrap();
    let w = MeasuredField::on_mask(&mask, vec![1.0; mask.num_inside()]).unwrap();
    let total = orlicz_norm(&w).unwrap().norm;
    let cov = build_calibrated_covering(&w, &mask, 0.5 * total, 1e-3).unwrap();
    assert!((2..=34).contains(&cov.len()), "{}", cov.len());
    let whole = build_calibrated_covering(&w, &mask, total, 1e-3).unwrap();
    assert_eq!(whole.len(), 1);
}

#[test]
fn document_round_trip() {
    let mask = DomainMask::preset(MaskPreset::Disk, 20).unwrap();
    let w = MeasuredField::sample(&mask, |x, y| 10.0 + 20.0 * x * y).unwrap();
    let cov = build_calibrated_covering(&w, &mask, 0.3, 1e-3).unwrap();
    let text = serde_json::to_string(&cov.to_document()).unwrap();
    for key in ["\"level\"", "\"rtol\"", "\"cubes\"", "\"cx\"", "\"cy\"", "\"side\"", "\"color\"", "\"multiplicity\"", "\"M_bound_rhs\""] {
        assert!(text.contains(key), "{key}");
    }
    let back = Covering::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, cov);
}
