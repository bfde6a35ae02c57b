//! The Orlicz norm `||g||_{B,X} = sup { |int_X f g| : int_X A(|f|) <= |X| }`
//! on finite measure spaces made of weighted cells.
//!
//! The budget of the constraint is the measure of the *current* set: the
//! norm on a subset `E` uses `|E|`, not 1. The norm is computed in Amemiya
//! form `inf_{k>0} (|X| + int B(k|g|)) / k` and certified from below by the
//! dual witness `f = B'(k*|g|)`, rescaled so that `int A(|f|) = |X|`.

use std::sync::Arc;

use serde::Serialize;

use crate::domain::{DomainMask, Grid};
use crate::error::{ensure_finite, Error, Result};
use crate::roots::bracket_root;
use crate::young::{ExpLog, YoungPair};

/// Scalar samples on a finite set of cells, each carrying a measure.
///
/// Grid-backed fields remember which grid cell every entry sits on, so they
/// can be restricted to cubes with exact (fractional) overlap areas.
#[derive(Debug, Clone)]
pub struct MeasuredField {
    values: Arc<[f64]>,
    measures: Arc<[f64]>,
    cells: Arc<[usize]>,
    grid: Option<Grid>,
}

impl MeasuredField {
    /// A field on an abstract measure space: entry `i` has value `values[i]`
    /// and measure `measures[i]`.
    pub fn new(values: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        let cells = (0..values.len()).collect();
        Self::build(values, measures, cells, None)
    }

    /// Equal cells of measure `cell_measure`.
    pub fn uniform(values: Vec<f64>, cell_measure: f64) -> Result<Self> {
        let measures = vec![cell_measure; values.len()];
        Self::new(values, measures)
    }

    /// Values on the inside cells of `mask`, in [`DomainMask::cells`] order.
    pub fn on_mask(mask: &DomainMask, values: Vec<f64>) -> Result<Self> {
        if values.len() != mask.num_inside() {
            return Err(Error::ShapeMismatch {
                expected: mask.num_inside(),
                got: values.len(),
            });
        }
        let measures = vec![mask.grid().cell_area(); values.len()];
        Self::build(values, measures, mask.cells().to_vec(), Some(*mask.grid()))
    }

    /// Sample `f` at the centres of the inside cells of `mask`.
    pub fn sample(mask: &DomainMask, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let g = mask.grid();
        let values = mask
            .cells()
            .iter()
            .map(|&c| {
                let [x, y] = g.center(c);
                f(x, y)
            })
            .collect();
        Self::on_mask(mask, values)
    }

    fn build(values: Vec<f64>, measures: Vec<f64>, cells: Vec<usize>, grid: Option<Grid>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySupport);
        }
        if measures.len() != values.len() {
            return Err(Error::ShapeMismatch {
                expected: values.len(),
                got: measures.len(),
            });
        }
        for (i, (&v, &m)) in values.iter().zip(&measures).enumerate() {
            ensure_finite(v, &format!("value[{i}]"))?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidArgument(format!("measure[{i}] = {m} must be positive")));
            }
        }
        Ok(Self {
            values: values.into(),
            measures: measures.into(),
            cells: cells.into(),
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Grid cell id of each entry (entry index for abstract fields).
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    /// `|X|`.
    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// The common cell measure, if all entries share one.
    pub fn cell_measure(&self) -> Option<f64> {
        let m0 = self.measures[0];
        self.measures.iter().all(|&m| m == m0).then_some(m0)
    }

    /// Same cells and measures, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            ensure_finite(v, &format!("value[{i}]"))?;
        }
        Ok(Self {
            values: values.into(),
            measures: Arc::clone(&self.measures),
            cells: Arc::clone(&self.cells),
            grid: self.grid,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `V_- = max(0, -V)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0)).expect("negative part of a finite field is finite")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Entrywise sum of two fields on the same cells.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.len() != self.len() || other.cells != self.cells {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        self.with_values(self.values.iter().zip(other.values.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().zip(self.measures.iter()).map(|(v, m)| v.abs() * m).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Values scattered back onto the full grid (zero off the support).
    pub fn to_grid_values(&self) -> Option<Vec<f64>> {
        let g = self.grid?;
        let mut out = vec![0.0; g.num_cells()];
        for (&c, &v) in self.cells.iter().zip(self.values.iter()) {
            out[c] = v;
        }
        Some(out)
    }

    /// The field on the entries `entries` (indices into this field, kept in
    /// increasing order), with the total measure recomputed from them.
    pub fn restrict(&self, entries: &[usize]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut entries = entries.to_vec();
        entries.sort_unstable();
        let mut seen = vec![false; self.len()];
        for &e in &entries {
            if e >= self.len() || std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidArgument(format!(
                    "restriction entry {e} is out of range or repeated"
                )));
            }
        }
        Ok(Self {
            values: entries.iter().map(|&e| self.values[e]).collect(),
            measures: entries.iter().map(|&e| self.measures[e]).collect(),
            cells: entries.iter().map(|&e| self.cells[e]).collect(),
            grid: self.grid,
        })
    }

    /// Entries satisfying `keep`, as a restricted field.
    pub fn restrict_where(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let entries: Vec<usize> = (0..self.len()).filter(|&e| keep(e)).collect();
        self.restrict(&entries)
    }

    /// `(value, measure)` pairs of the field on the open axis-parallel square
    /// `center + side (-1/2, 1/2)^2`, with each cell weighted by its exact
    /// overlap area. Grid-backed fields only.
    pub fn cube_entries(&self, center: [f64; 2], side: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self
            .grid
            .ok_or_else(|| Error::InvalidArgument("cube restriction needs a grid-backed field".into()))?;
        let mut values = Vec::new();
        let mut measures = Vec::new();
        if !(side > 0.0) {
            return Ok((values, measures));
        }
        let half = 0.5 * side;
        let (x0, x1) = (center[0] - half, center[0] + half);
        let (y0, y1) = (center[1] - half, center[1] + half);
        let overlap = |lo: f64, hi: f64, a: f64, b: f64| (hi.min(b) - lo.max(a)).max(0.0);
        let h = grid.h;
        // entries are sorted by cell id, i.e. by row then column
        let rows = grid.span(1, y0, y1);
        let cols = grid.span(0, x0, x1);
        if rows.is_empty() || cols.is_empty() {
            return Ok((values, measures));
        }
        for iy in rows {
            let first = grid.index(cols.start, iy);
            let last = grid.index(cols.end - 1, iy);
            let from = self.cells.partition_point(|&c| c < first);
            let to = self.cells.partition_point(|&c| c <= last);
            let cy = grid.origin[1] + iy as f64 * h;
            let wy = overlap(y0, y1, cy, cy + h);
            if wy <= 0.0 {
                continue;
            }
            for e in from..to {
                let (ix, _) = grid.coords(self.cells[e]);
                let cx = grid.origin[0] + ix as f64 * h;
                let wx = overlap(x0, x1, cx, cx + h);
                let area = wx * wy;
                if area > 0.0 {
                    let scale = self.measures[e] / (h * h);
                    values.push(self.values[e]);
                    measures.push(area * scale);
                }
            }
        }
        Ok((values, measures))
    }

    /// The field on the open square `center + side (-1/2,1/2)^2`, cells
    /// weighted by overlap area. `None` when the square meets no cell.
    pub fn restrict_to_cube(&self, center: [f64; 2], side: f64) -> Result<Option<Self>> {
        let (values, measures) = self.cube_entries(center, side)?;
        if values.is_empty() {
            return Ok(None);
        }
        Ok(Some(Self {
            values: values.into(),
            measures: measures.into(),
            cells: Arc::from(Vec::<usize>::new()),
            grid: None,
        }))
    }
}

/// Outcome of [`orlicz_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrliczNormResult {
    /// Amemiya value `(|X| + int B(k*|g|)) / k*`, an upper bound on the norm.
    pub norm: f64,
    /// Minimiser of the Amemiya functional; `None` for the zero field.
    pub k_star: Option<f64>,
    /// `int f g` for the rescaled dual witness, a lower bound on the norm.
    pub lower_bound: f64,
    /// `(norm - lower_bound) / norm`.
    pub witness_gap: f64,
}

impl OrliczNormResult {
    fn zero() -> Self {
        Self {
            norm: 0.0,
            k_star: None,
            lower_bound: 0.0,
            witness_gap: 0.0,
        }
    }
}

const K_RTOL: f64 = 1e-13;

/// Minimiser `k*` and value of the Amemiya functional
/// `(|X| + sum m B(k|g|)) / k`; `None` when the input is zero.
///
/// The value is stationary in `k`, so the error in `k*` enters the norm
/// only quadratically.
pub fn amemiya<P: YoungPair>(pair: &P, values: &[f64], measures: &[f64]) -> Option<(f64, f64)> {
    let total: f64 = measures.iter().sum();
    let gmax = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if values.is_empty() || gmax == 0.0 || total <= 0.0 {
        return None;
    }
    // F(k) = int A(B'(k|g|)) - |X| is increasing and convex with
    // F(0) = -|X|; its zero is the stationary point of the Amemiya
    // functional. Newton from the right decreases monotonically to it.
    let budget = |k: f64| -> (f64, f64) {
        values.iter().zip(measures).fold((-total, 0.0), |(f, df), (&v, &m)| {
            let g = v.abs();
            (f + m * pair.a_of_b_prime(k * g), df + m * g * pair.a_of_b_prime_slope(k * g))
        })
    };
    let mut k = 1.0 / gmax;
    let (mut f, mut df) = budget(k);
    while f <= 0.0 {
        k *= 2.0;
        (f, df) = budget(k);
    }
    for _ in 0..200 {
        let step = f / df;
        if !(step > K_RTOL * k) {
            break;
        }
        k -= step;
        (f, df) = budget(k);
        if f <= 0.0 {
            break;
        }
    }
    let value: f64 = values.iter().zip(measures).map(|(&v, &m)| m * pair.b(k * v.abs())).sum();
    Some((k, (total + value) / k))
}

/// Norm of `values` weighted by `measures` for the pair `pair`, with the
/// dual-witness lower bound. Both slices must have equal length; an empty
/// or all-zero input gives norm 0.
pub fn orlicz_norm_raw<P: YoungPair>(pair: &P, values: &[f64], measures: &[f64]) -> OrliczNormResult {
    let Some((k_star, norm)) = amemiya(pair, values, measures) else {
        return OrliczNormResult::zero();
    };
    let total: f64 = measures.iter().sum();
    let witness: Vec<f64> = values.iter().map(|&v| pair.b_prime(k_star * v.abs())).collect();
    let used = |theta: f64| -> f64 {
        witness
            .iter()
            .zip(measures)
            .map(|(&f, &m)| m * pair.a(theta * f))
            .sum::<f64>()
            - total
    };
    let theta = {
        let (mut lo, mut hi) = (0.5, 2.0);
        let (mut flo, mut fhi) = (used(lo), used(hi));
        while flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo *= 0.5;
            flo = used(lo);
        }
        while fhi <= 0.0 {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = used(hi);
        }
        bracket_root(used, lo, hi, flo, fhi, 1e-15, 400).0
    };
    let paired: f64 = witness
        .iter()
        .zip(values.iter().zip(measures))
        .map(|(&f, (&v, &m))| m * f * v.abs())
        .sum();
    let lower_bound = theta * paired;
    OrliczNormResult {
        norm,
        k_star: Some(k_star),
        lower_bound,
        witness_gap: (norm - lower_bound) / norm,
    }
}

/// `||g||_{B,X}` with the budget `|X|` of the field's own support.
pub fn orlicz_norm(g: &MeasuredField) -> Result<OrliczNormResult> {
    Ok(orlicz_norm_raw(&ExpLog, g.values(), g.measures()))
}

/// Closed form `||chi_F||_{B,X} = |F| A^{-1}(|X| / |F|)`.
pub fn orlicz_norm_indicator(measure_f: f64, measure_x: f64) -> Result<f64> {
    ensure_finite(measure_f, "measure_F")?;
    ensure_finite(measure_x, "measure_X")?;
    if !(measure_f > 0.0 && measure_f <= measure_x) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < |F| <= |X|, got |F| = {measure_f}, |X| = {measure_x}"
        )));
    }
    Ok(measure_f * ExpLog::inverse_a(measure_x / measure_f))
}

/// `int_X B(|X| |g| / ||g||_{B,X}) - |X|`, which is never positive.
pub fn luxemburg_check(g: &MeasuredField) -> Result<f64> {
    let norm = orlicz_norm(g)?.norm;
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let total = g.total_measure();
    let s: f64 = g
        .values()
        .iter()
        .zip(g.measures())
        .map(|(&v, &m)| m * ExpLog::eval_b(total * v.abs() / norm))
        .sum();
    Ok(s - total)
}

/// `C' = 1 / A^{-1}(1)`, the constant with `A(1/C') = 1`.
pub fn l1_constant() -> f64 {
    1.0 / ExpLog::inverse_a(1.0)
}

/// `C' ||g||_{B,X} - ||g||_{L^1(X)}`, which is never negative.
pub fn l1_bound_check(g: &MeasuredField) -> Result<f64> {
    Ok(l1_constant() * orlicz_norm(g)?.norm - g.l1_norm())
}

/// Executable forms of the structural properties of the norm.
pub mod checks {
    use super::*;

    /// `sum_j ||g||_{B,E_j} - ||g||_{B,X}` for disjoint entry sets `parts`
    /// (non-positive by superadditivity). Empty parts are skipped.
    pub fn superadditivity_excess(g: &MeasuredField, parts: &[Vec<usize>]) -> Result<f64> {
        let mut used = vec![false; g.len()];
        let mut sum = 0.0;
        for part in parts.iter().filter(|p| !p.is_empty()) {
            for &e in part {
                if e >= g.len() || std::mem::replace(&mut used[e], true) {
                    return Err(Error::InvalidArgument("parts must be disjoint".into()));
                }
            }
            sum += orlicz_norm(&g.restrict(part)?)?.norm;
        }
        Ok(sum - orlicz_norm(g)?.norm)
    }

    /// `(||g||_{B,E}, ||g||_{B,F}, |F|/|E| ||g||_{B,E})` for entry sets `e`,
    /// `f` of `g` with `|E| <= |F|`. `g` must vanish off `E ∩ F`.
    pub fn sandwich(g: &MeasuredField, e: &[usize], f: &[usize]) -> Result<(f64, f64, f64)> {
        let ge = g.restrict(e)?;
        let gf = g.restrict(f)?;
        let (me, mf) = (ge.total_measure(), gf.total_measure());
        if me > mf * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument("sandwich needs |E| <= |F|".into()));
        }
        let in_f = {
            let mut v = vec![false; g.len()];
            f.iter().for_each(|&i| v[i] = true);
            v
        };
        let in_e = {
            let mut v = vec![false; g.len()];
            e.iter().for_each(|&i| v[i] = true);
            v
        };
        if (0..g.len()).any(|i| g.values()[i] != 0.0 && !(in_e[i] && in_f[i])) {
            return Err(Error::InvalidArgument("g must vanish off E ∩ F".into()));
        }
        let ne = orlicz_norm(&ge)?.norm;
        let nf = orlicz_norm(&gf)?.norm;
        Ok((ne, nf, mf / me * ne))
    }

    /// Upper bound on `| ||g||_{B,E_n} - ||g||_{B,E} |` assembled from the
    /// indicator norms of the two set differences and the measure ratio.
    pub fn continuity_bound(g: &MeasuredField, e: &[usize], e_n: &[usize]) -> Result<f64> {
        let mark = |s: &[usize]| {
            let mut v = vec![false; g.len()];
            s.iter().for_each(|&i| v[i] = true);
            v
        };
        let (in_e, in_n) = (mark(e), mark(e_n));
        let total = g.total_measure();
        let diff_measure = |a: &[bool], b: &[bool]| -> f64 {
            (0..g.len()).filter(|&i| a[i] && !b[i]).map(|i| g.measures()[i]).sum()
        };
        let chi = |m: f64| if m > 0.0 { orlicz_norm_indicator(m, total) } else { Ok(0.0) };
        let ind = chi(diff_measure(&in_n, &in_e))? + chi(diff_measure(&in_e, &in_n))?;
        let me: f64 = e.iter().map(|&i| g.measures()[i]).sum();
        let mn: f64 = e_n.iter().map(|&i| g.measures()[i]).sum();
        let ratio = me.max(mn) / me.min(mn) - 1.0;
        Ok(g.sup_norm() * ind + ratio * orlicz_norm(g)?.norm)
    }

    /// `g 1_{|g| <= level}`.
    pub fn truncate(g: &MeasuredField, level: f64) -> MeasuredField {
        g.map(|v| if v.abs() <= level { v } else { 0.0 })
            .expect("truncation keeps values finite")
    }
}
