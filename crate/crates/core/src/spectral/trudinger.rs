//! Trudinger-type inequalities on grids.
//!
//! `C_alpha = sum_{n>=2} n^{n^2/(n-1)} / n! (alpha / 4 pi)^n` bounds
//! `int A(alpha |u|^2 / ||grad u||^2)` by `C_alpha |Omega|` for `u`
//! vanishing on the boundary. The checks here evaluate both sides for
//! discrete test functions.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::covering::Cube;
use crate::domain::DomainMask;
use crate::error::{ensure_finite, Error, Result};
use crate::orlicz::MeasuredField;
use crate::young::ExpLog;

/// `4 pi / e`, the radius of convergence of the series in `alpha`.
pub const CONVERGENCE_RADIUS: f64 = 4.0 * PI / E;

const SERIES_RTOL: f64 = 1e-14;

fn log_term(n: f64, ln_fact: f64, ln_x: f64) -> f64 {
    n * n / (n - 1.0) * n.ln() - ln_fact + n * ln_x
}

/// `C_alpha` for `0 <= alpha < 4 pi / e`, summed until the geometric tail
/// bound drops below `1e-14` of the partial sum. The term ratios decrease
/// to `e alpha / 4 pi`, so the tail after term `n` is at most
/// `t_{n+1} / (1 - t_{n+2}/t_{n+1})`.
pub fn trudinger_constant(alpha: f64) -> Result<f64> {
    ensure_finite(alpha, "alpha")?;
    if !(0.0..CONVERGENCE_RADIUS).contains(&alpha) {
        return Err(Error::OutsideConvergenceRadius(alpha));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let ln_x = (alpha / (4.0 * PI)).ln();
    let mut ln_fact = 2f64.ln();
    let mut sum = 0.0;
    let mut n = 2.0;
    let mut t = log_term(n, ln_fact, ln_x).exp();
    loop {
        sum += t;
        let next_fact = ln_fact + (n + 1.0).ln();
        let t1 = log_term(n + 1.0, next_fact, ln_x).exp();
        let t2 = log_term(n + 2.0, next_fact + (n + 2.0).ln(), ln_x).exp();
        let ratio = t2 / t1;
        if ratio < 1.0 && t1 / (1.0 - ratio) <= SERIES_RTOL * sum {
            return Ok(sum);
        }
        if n > 1e7 {
            return Err(Error::InvalidArgument(format!("series for alpha = {alpha} did not converge")));
        }
        n += 1.0;
        ln_fact = next_fact;
        t = t1;
    }
}

/// The root `S_2` of `C_alpha = 1`, by bisection on `(0, 4 pi / e)`.
pub fn trudinger_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (0.0, CONVERGENCE_RADIUS);
        while hi - lo > 1e-13 * hi {
            let mid = 0.5 * (lo + hi);
            match trudinger_constant(mid) {
                Ok(c) if c < 1.0 => lo = mid,
                _ => hi = mid,
            }
        }
        lo
    })
}

/// `sum (u_i - u_j)^2` over the edges between inside cells and from inside
/// cells to outside cells, where `u` is zero. Approximates `int |grad u|^2`.
pub fn dirichlet_energy(mask: &DomainMask, values: &[f64]) -> f64 {
    let grid = mask.grid();
    let dof = mask.dof_map();
    let mut e = 0.0;
    for (i, &c) in mask.cells().iter().enumerate() {
        for nb in grid.neighbors(c) {
            match nb {
                Some(nb) if mask.is_inside(nb) => {
                    if dof[nb] > i {
                        e += (values[i] - values[dof[nb]]).powi(2);
                    }
                }
                _ => e += values[i] * values[i],
            }
        }
    }
    e
}

fn check_on_mask(mask: &DomainMask, u: &MeasuredField) -> Result<()> {
    if u.len() != mask.num_inside() {
        return Err(Error::ShapeMismatch { expected: mask.num_inside(), got: u.len() });
    }
    for &v in u.values() {
        ensure_finite(v, "test function")?;
    }
    Ok(())
}

/// `int A(alpha u^2 / ||grad u||^2) - C_alpha |Omega|` for `u` vanishing on
/// every cell next to the outside of `mask`.
pub fn trudinger_check(mask: &DomainMask, u: &MeasuredField, alpha: f64) -> Result<f64> {
    check_on_mask(mask, u)?;
    let c_alpha = trudinger_constant(alpha)?;
    for (i, &c) in mask.cells().iter().enumerate() {
        if mask.touches_boundary(c) && u.values()[i] != 0.0 {
            return Err(Error::InvalidArgument("test function must vanish next to the boundary".into()));
        }
    }
    let energy = dirichlet_energy(mask, u.values());
    if energy == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let integral: f64 = u
        .values()
        .iter()
        .zip(u.measures())
        .map(|(&v, &m)| m * ExpLog::eval_a(alpha * v * v / energy))
        .sum();
    Ok(integral - c_alpha * mask.measure())
}

/// Inside cells of `mask` whose centres lie in `cube`.
pub fn cube_cells(mask: &DomainMask, cube: &Cube) -> Vec<usize> {
    let grid = mask.grid();
    (0..mask.num_inside())
        .filter(|&i| cube.contains(&grid.center(mask.cells()[i])))
        .collect()
}

/// `int_{Q cap Omega} A(alpha u^2 / ||grad u||^2) - constant |Q cap Omega|`
/// for `u` supported in the cells of `cube`, vanishing next to the outside of
/// `mask` and with zero mean. The gradient only uses edges inside the cube.
pub fn mean_zero_trudinger_check(mask: &DomainMask, cube: &Cube, u: &MeasuredField, alpha: f64, constant: f64) -> Result<f64> {
    check_on_mask(mask, u)?;
    ensure_finite(alpha, "alpha")?;
    ensure_finite(constant, "constant")?;
    let region = cube_cells(mask, cube);
    if region.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut inside = vec![false; u.len()];
    for &i in &region {
        inside[i] = true;
    }
    let values = u.values();
    let mut mass = 0.0;
    let mut abs_mass = 0.0;
    for (i, (&v, &m)) in values.iter().zip(u.measures()).enumerate() {
        if !inside[i] && v != 0.0 {
            return Err(Error::InvalidArgument("test function is not supported in the cube".into()));
        }
        if inside[i] && v != 0.0 && mask.touches_boundary(mask.cells()[i]) {
            return Err(Error::InvalidArgument("test function must vanish next to the boundary".into()));
        }
        mass += m * v;
        abs_mass += m * v.abs();
    }
    if mass.abs() > 1e-10 * abs_mass {
        return Err(Error::InvalidArgument(format!("test function has mean {mass}, not 0")));
    }
    let grid = mask.grid();
    let dof = mask.dof_map();
    let mut energy = 0.0;
    for &i in &region {
        let c = mask.cells()[i];
        for nb in grid.neighbors(c).into_iter().flatten() {
            if mask.is_inside(nb) && dof[nb] > i && inside[dof[nb]] {
                energy += (values[i] - values[dof[nb]]).powi(2);
            }
        }
    }
    if energy == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let mut integral = 0.0;
    let mut measure = 0.0;
    for &i in &region {
        integral += u.measures()[i] * ExpLog::eval_a(alpha * values[i] * values[i] / energy);
        measure += u.measures()[i];
    }
    Ok(integral - constant * measure)
}

/// `exp(1 - 1/(1 - rho^2))` for `rho < 1`, else 0.
fn bump(rho2: f64) -> f64 {
    if rho2 < 1.0 {
        (1.0 - 1.0 / (1.0 - rho2)).exp()
    } else {
        0.0
    }
}

/// Random smooth bump with centre in the box `[lo, hi]^2`; values on
/// the inside cells of `mask`, zeroed next to the outside.
fn random_bump(mask: &DomainMask, rng: &mut impl Rng, lo: [f64; 2], hi: [f64; 2], max_radius: f64) -> Vec<f64> {
    let grid = mask.grid();
    let cx = rng.gen_range(lo[0]..hi[0]);
    let cy = rng.gen_range(lo[1]..hi[1]);
    let r = rng.gen_range(0.2 * max_radius..max_radius);
    mask.cells()
        .iter()
        .map(|&c| {
            if mask.touches_boundary(c) {
                return 0.0;
            }
            let p = grid.center(c);
            bump(((p[0] - cx).powi(2) + (p[1] - cy).powi(2)) / (r * r))
        })
        .collect()
}

/// Random combination of `count` smooth bumps, zero next to the outside of
/// `mask`.
pub fn random_bump_field(mask: &DomainMask, rng: &mut impl Rng, count: usize) -> Vec<f64> {
    let grid = mask.grid();
    let (lo, hi) = (grid.origin, [grid.origin[0] + grid.side(), grid.origin[1] + grid.side()]);
    let mut u = vec![0.0; mask.num_inside()];
    for _ in 0..count {
        let a = rng.gen_range(-1.0..1.0);
        let b = random_bump(mask, rng, lo, hi, 0.4 * grid.side());
        for (x, y) in u.iter_mut().zip(b) {
            *x += a * y;
        }
    }
    u
}

/// Random mean-zero combination of `count >= 2` bumps supported in the cells
/// of `cube`, each zeroed next to the outside of `mask`. The coefficients
/// are projected onto the hyperplane that kills the mean, so the boundary
/// condition survives the projection.
pub fn random_mean_zero_field(mask: &DomainMask, cube: &Cube, rng: &mut impl Rng, count: usize) -> Result<Vec<f64>> {
    let region = cube_cells(mask, cube);
    let h2 = mask.h() * mask.h();
    let half = 0.5 * cube.side;
    let lo = [cube.center[0] - half, cube.center[1] - half];
    let hi = [cube.center[0] + half, cube.center[1] + half];
    let mut inside = vec![false; mask.num_inside()];
    for &i in &region {
        inside[i] = true;
    }
    let mut basis = Vec::new();
    let mut masses = Vec::new();
    for _ in 0..count.max(2) * 4 {
        if basis.len() == count.max(2) {
            break;
        }
        let mut b = random_bump(mask, rng, lo, hi, 0.5 * cube.side);
        for (i, x) in b.iter_mut().enumerate() {
            if !inside[i] {
                *x = 0.0;
            }
        }
        let m: f64 = b.iter().sum::<f64>() * h2;
        if m > 0.0 {
            basis.push(b);
            masses.push(m);
        }
    }
    if basis.len() < 2 {
        return Err(Error::InvalidArgument("cube holds too few interior cells for a mean-zero bump field".into()));
    }
    let mut coef: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dot: f64 = coef.iter().zip(&masses).map(|(c, m)| c * m).sum();
    let norm2: f64 = masses.iter().map(|m| m * m).sum();
    for (c, m) in coef.iter_mut().zip(&masses) {
        *c -= dot / norm2 * m;
    }
    let mut u = vec![0.0; mask.num_inside()];
    for (b, c) in basis.iter().zip(&coef) {
        for (x, y) in u.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    Ok(u)
}

/// Mirror extension of `values`, sampled on the `m x m` cell centres of
/// `cube` (row-major, `y` slowest), to the concentric cube of three times
/// the side, sampled on `3m x 3m` cells.
pub fn reflection_extension(cube: &Cube, values: &[f64], m: usize) -> Result<(Cube, Vec<f64>)> {
    if cube.dim() != 2 {
        return Err(Error::InvalidArgument("reflection is implemented in two dimensions".into()));
    }
    if m == 0 || values.len() != m * m {
        return Err(Error::ShapeMismatch { expected: m * m, got: values.len() });
    }
    let fold = |e: usize| {
        let (block, r) = (e / m, e % m);
        if block == 1 {
            r
        } else {
            m - 1 - r
        }
    };
    let big = 3 * m;
    let mut out = Vec::with_capacity(big * big);
    for ey in 0..big {
        for ex in 0..big {
            out.push(values[fold(ey) * m + fold(ex)]);
        }
    }
    Ok((Cube::new(cube.center.clone(), 3.0 * cube.side)?, out))
}

/// `h^2 sum u^2` on an `m x m` cell grid of width `h`.
pub fn l2_mass(values: &[f64], h: f64) -> f64 {
    h * h * values.iter().map(|v| v * v).sum::<f64>()
}

/// `sum (u_i - u_j)^2` over the interior edges of an `m x m` cell grid.
pub fn neumann_energy(values: &[f64], m: usize) -> f64 {
    let mut e = 0.0;
    for y in 0..m {
        for x in 0..m {
            let v = values[y * m + x];
            if x + 1 < m {
                e += (v - values[y * m + x + 1]).powi(2);
            }
            if y + 1 < m {
                e += (v - values[(y + 1) * m + x]).powi(2);
            }
        }
    }
    e
}

/// Both sides of
/// `||grad u||^{2(1-2/q)} ||u||^{4/q} >= (2/q)(4 pi)^{(q-2)/q} ||u||_q^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevCheck {
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs` on the finer grid.
    pub gap: f64,
    /// `|gap(n) - gap(n/2)|`, the estimated quadrature error.
    pub eps_grid: f64,
}

impl SobolevCheck {
    pub fn holds(&self) -> bool {
        self.gap >= -self.eps_grid
    }
}

fn sobolev_sides(u: &impl Fn(f64, f64) -> f64, half_width: f64, n: usize, q: f64) -> (f64, f64) {
    let h = 2.0 * half_width / n as f64;
    let vals: Vec<f64> = (0..n * n)
        .map(|c| {
            let (ix, iy) = (c % n, c / n);
            u(-half_width + (ix as f64 + 0.5) * h, -half_width + (iy as f64 + 0.5) * h)
        })
        .collect();
    let mut grad = neumann_energy(&vals, n);
    for i in 0..n {
        // edges to the zero exterior
        for c in [i, (n - 1) * n + i, i * n, i * n + n - 1] {
            grad += vals[c] * vals[c];
        }
    }
    let l2 = l2_mass(&vals, h);
    let lq = h * h * vals.iter().map(|v| v.abs().powf(q)).sum::<f64>();
    let lhs = grad.powf(1.0 - 2.0 / q) * l2.powf(2.0 / q);
    let rhs = 2.0 / q * (4.0 * PI).powf((q - 2.0) / q) * lq.powf(2.0 / q);
    (lhs, rhs)
}

/// Evaluates the interpolation inequality for `u` on `[-half_width,
/// half_width]^2` with `n` cells per side, estimating the quadrature error
/// from the same evaluation with `n / 2` cells.
pub fn sobolev_interp_check(u: impl Fn(f64, f64) -> f64, half_width: f64, n: usize, q: f64) -> Result<SobolevCheck> {
    ensure_finite(q, "q")?;
    ensure_finite(half_width, "half_width")?;
    if !(q > 2.0) {
        return Err(Error::InvalidArgument(format!("q must exceed 2, got {q}")));
    }
    if n < 8 || half_width <= 0.0 {
        return Err(Error::InvalidArgument("need n >= 8 and a positive half width".into()));
    }
    let (lhs, rhs) = sobolev_sides(&u, half_width, n, q);
    let (lhs2, rhs2) = sobolev_sides(&u, half_width, n / 2, q);
    let gap = lhs - rhs;
    Ok(SobolevCheck { q, lhs, rhs, gap, eps_grid: (gap - (lhs2 - rhs2)).abs() })
}
