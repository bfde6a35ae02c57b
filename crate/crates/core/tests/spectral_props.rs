use nalgebra::DMatrix;
use orlicz_spectral::domain::{DomainMask, Grid, MaskPreset};
use orlicz_spectral::orlicz::MeasuredField;
use orlicz_spectral::spectral::{count_negative, dirichlet_laplacian, schrodinger, SparseSymmetricOperator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle(a: &[Vec<f64>], shift: f64) -> (usize, usize) {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let eig = m.symmetric_eigen().eigenvalues;
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs())).max(shift.abs());
    let neg = eig.iter().filter(|&&l| l - shift < -1e-11 * scale).count();
    let zero = eig.iter().filter(|&&l| (l - shift).abs() <= 1e-11 * scale).count();
    (neg, zero)
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = rng.gen_range(-3.0..3.0);
        for j in i + 1..n {
            if rng.gen::<f64>() < density {
                let v = rng.gen_range(-2.0..2.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
    }
    a
}

#[test]
fn inertia_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..500 {
        let n = rng.gen_range(5..=60);
        let a = match case % 4 {
            0 => random_symmetric(&mut rng, n, 1.0),
            1 => random_symmetric(&mut rng, n, 0.1),
            2 => {
                // zero diagonal forces 2x2 pivots
                let mut a = random_symmetric(&mut rng, n, 0.3);
                for (i, row) in a.iter_mut().enumerate() {
                    row[i] = 0.0;
                }
                a
            }
            _ => {
                // integer diagonal: exact zero eigenvalues at integer shifts
                let mut a = vec![vec![0.0; n]; n];
                for (i, row) in a.iter_mut().enumerate() {
                    row[i] = rng.gen_range(-2..=2) as f64;
                }
                a
            }
        };
        let op = SparseSymmetricOperator::from_dense(&a).unwrap();
        for shift in [-1.0, 0.0, 1.0] {
            let r = count_negative(&op, shift).unwrap();
            let (neg, zero) = oracle(&a, shift);
            assert_eq!((r.n_negative, r.n_zero), (neg, zero), "case {case}, n = {n}, shift = {shift}");
            assert_eq!(r.n_negative + r.n_zero + r.n_positive, n);
        }
    }
}

fn lattice_count(lambda: f64) -> usize {
    let pi2 = std::f64::consts::PI.powi(2);
    let mut c = 0;
    for m in 1..100 {
        for n in 1..100 {
            if pi2 * ((m * m + n * n) as f64) < lambda {
                c += 1;
            }
        }
    }
    c
}

fn discrete_count(n: usize, depth: f64) -> usize {
    let mask = DomainMask::preset(MaskPreset::Square, n).unwrap();
    let v = MeasuredField::on_mask(&mask, vec![-depth; mask.num_inside()]).unwrap();
    count_negative(&schrodinger(&mask, &v).unwrap(), 0.0).unwrap().n_negative
}

#[test]
fn square_well_matches_lattice_count() {
    assert_eq!(lattice_count(50.0), 3);
    assert_eq!(discrete_count(128, 50.0), 3);
    let exact = lattice_count(200.0);
    let got = discrete_count(128, 200.0);
    assert!(got.abs_diff(exact) <= 1, "{got} vs {exact}");
}

#[test]
fn square_well_matches_lattice_count_on_gapped_levels() {
    // levels pi^2 k with k a sum of two positive squares; probe midway
    // between consecutive ones so that grid error cannot cross a level
    let pi2 = std::f64::consts::PI.powi(2);
    let sums: Vec<usize> = {
        let mut s: Vec<usize> = (1..20).flat_map(|m| (1..20).map(move |n| m * m + n * n)).filter(|&k| k <= 21).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    for w in sums.windows(2) {
        let lambda = pi2 * 0.5 * (w[0] + w[1]) as f64;
        assert_eq!(discrete_count(128, lambda), lattice_count(lambda), "lambda = {lambda}");
    }
}

#[test]
fn smallest_laplacian_eigenvalue_on_square() {
    // first eigenvalue of the n-cell stencil: 2 (4/h^2) sin^2(pi / (2 (n + 1)))
    let pi = std::f64::consts::PI;
    for n in [64usize, 256] {
        let h = 1.0 / n as f64;
        let exact = 2.0 * 4.0 / (h * h) * (pi / (2.0 * (n as f64 + 1.0))).sin().powi(2);
        let mask = DomainMask::preset(MaskPreset::Square, n).unwrap();
        let op = dirichlet_laplacian(&mask).unwrap();
        assert_eq!(count_negative(&op, exact * (1.0 - 1e-9)).unwrap().n_negative, 0);
        assert_eq!(count_negative(&op, exact * (1.0 + 1e-9)).unwrap().n_negative, 1);
        if n == 256 {
            assert!((exact - 2.0 * pi * pi).abs() < 0.01 * 2.0 * pi * pi);
        }
    }
}

#[test]
fn disconnected_spectrum_is_union() {
    let mask = DomainMask::preset(MaskPreset::TwoSquares, 40).unwrap();
    let grid = *mask.grid();
    let left = DomainMask::from_fn(grid, |x, y| mask_inside(&mask, x, y) && x < 0.5).unwrap();
    let right = DomainMask::from_fn(grid, |x, y| mask_inside(&mask, x, y) && x > 0.5).unwrap();
    let whole = dirichlet_laplacian(&mask).unwrap();
    for shift in [50.0, 150.0, 400.0, 900.0] {
        let a = count_negative(&dirichlet_laplacian(&left).unwrap(), shift).unwrap().n_negative;
        let b = count_negative(&dirichlet_laplacian(&right).unwrap(), shift).unwrap().n_negative;
        assert_eq!(count_negative(&whole, shift).unwrap().n_negative, a + b);
    }
}

fn mask_inside(mask: &DomainMask, x: f64, y: f64) -> bool {
    let g = mask.grid();
    let ix = ((x - g.origin[0]) / g.h) as usize;
    let iy = ((y - g.origin[1]) / g.h) as usize;
    mask.is_inside(g.index(ix, iy))
}

fn gaussian_potential(mask: &DomainMask, depth: f64, cx: f64, cy: f64, w: f64) -> MeasuredField {
    MeasuredField::sample(mask, |x, y| -depth * (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn domain_monotonicity(depth in 50.0..600.0f64, cx in 0.3..0.7f64, cy in 0.3..0.7f64, w in 0.1..0.4f64) {
        let grid = Grid::unit(32).unwrap();
        let small = DomainMask::from_fn(grid, |x, y| (x - 0.5).powi(2) + (y - 0.5).powi(2) < 0.12).unwrap();
        let large = DomainMask::preset(MaskPreset::Square, 32).unwrap();
        prop_assert!(small.is_subset_of(&large));
        let count = |m: &DomainMask| {
            let v = gaussian_potential(m, depth, cx, cy, w);
            count_negative(&schrodinger(m, &v).unwrap(), 0.0).unwrap().n_negative
        };
        prop_assert!(count(&small) <= count(&large));
    }

    #[test]
    fn coupling_monotonicity(depth in 10.0..200.0f64, w in 0.1..0.4f64, preset in 0usize..5) {
        let mask = DomainMask::preset(MaskPreset::ALL[preset], 32).unwrap();
        let v = gaussian_potential(&mask, depth, 0.5, 0.5, w);
        let mut prev = 0;
        for alpha in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let n = count_negative(&schrodinger(&mask, &v.scaled(alpha).unwrap()).unwrap(), 0.0).unwrap().n_negative;
            prop_assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn nonnegative_potential_has_no_bound_states(depth in 0.0..1e4f64, preset in 0usize..5) {
        let mask = DomainMask::preset(MaskPreset::ALL[preset], 24).unwrap();
        let v = gaussian_potential(&mask, -depth, 0.5, 0.5, 0.2);
        prop_assert_eq!(count_negative(&schrodinger(&mask, &v).unwrap(), 0.0).unwrap().n_negative, 0);
    }
}
