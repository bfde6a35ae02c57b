//! Calibrated Besicovitch coverings.
//!
//! [`besicovich_cover`] is the greedy construction for cubes centred at the
//! points of a finite set `K`: repeatedly take the uncovered point with the
//! largest prescribed side, then colour the new cube with the first class
//! none of whose members it meets. [`build_calibrated_covering`] feeds it
//! the side lengths at which the potential's Orlicz norm over the cube
//! reaches a fixed level.
//!
//! Every [`Covering`] can be re-checked from scratch with
//! [`Covering::certify`], which counts overlaps exactly over the whole
//! arrangement rather than sampling it.

use serde::{Deserialize, Serialize};

use crate::domain::DomainMask;
use crate::error::{ensure_finite, Error, Result};
use crate::orlicz::{amemiya, MeasuredField};
use crate::par;
use crate::roots::bracket_root;
use crate::young::ExpLog;

/// Default relative tolerance for calibrated cube norms.
pub const DEFAULT_RTOL: f64 = 1e-3;

/// Open axis-parallel cube `center + side (-1/2, 1/2)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        ensure_finite(side, "cube side")?;
        if side <= 0.0 {
            return Err(Error::InvalidArgument(format!("cube side must be positive, got {side}")));
        }
        if center.is_empty() {
            return Err(Error::InvalidArgument("cube centre has no coordinates".into()));
        }
        for &c in &center {
            ensure_finite(c, "cube centre")?;
        }
        Ok(Self { center, side })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lower(&self, k: usize) -> f64 {
        self.center[k] - 0.5 * self.side
    }

    pub fn upper(&self, k: usize) -> f64 {
        self.center[k] + 0.5 * self.side
    }

    /// Whether `p` lies in the open cube.
    pub fn contains(&self, p: &[f64]) -> bool {
        let half = 0.5 * self.side;
        p.iter().zip(&self.center).all(|(x, c)| (x - c).abs() < half)
    }

    /// Whether the two open cubes share a point.
    pub fn intersects(&self, other: &Cube) -> bool {
        let reach = 0.5 * (self.side + other.side);
        self.center.iter().zip(&other.center).all(|(a, b)| (a - b).abs() < reach)
    }

    /// The concentric cube of half the side.
    pub fn halved(&self) -> Cube {
        Cube { center: self.center.clone(), side: 0.5 * self.side }
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }
}

/// Norm data recorded for each cube of a calibrated covering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Target norm `A`.
    pub level: f64,
    pub rtol: f64,
    /// Norm of the potential over all of the domain.
    pub total_norm: f64,
    /// Norm of the potential over each cube intersected with the domain.
    pub cube_norms: Vec<f64>,
    /// Measure of each cube intersected with the domain.
    pub cube_budgets: Vec<f64>,
}

/// Cubes with a colouring into classes of pairwise disjoint cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct Covering {
    pub dim: usize,
    pub cubes: Vec<Cube>,
    /// Colour of each cube, 1-based.
    pub colors: Vec<usize>,
    /// Maximal number of cubes sharing a point, counted exactly.
    pub multiplicity: usize,
    pub calibration: Option<Calibration>,
}

/// Outcome of [`Covering::certify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub dim: usize,
    pub num_cubes: usize,
    /// Points of `K` outside every cube.
    pub uncovered: usize,
    /// Largest number of cubes containing a single point of `K`.
    pub max_depth_on_points: usize,
    /// Largest number of cubes sharing any point of space.
    pub max_depth: usize,
    /// `2^d`.
    pub multiplicity_bound: usize,
    pub colors_used: usize,
    /// `4^d + 1`.
    pub color_bound: usize,
    /// Intersecting pairs of cubes with equal colour.
    pub color_conflicts: usize,
    /// Pairs `(i, j)`, `i != j`, with the centre of cube `i` inside cube `j`.
    pub center_violations: usize,
    /// Intersecting pairs of half-side cubes.
    pub half_cube_overlaps: usize,
}

impl CertificationReport {
    pub fn ok(&self) -> bool {
        self.uncovered == 0
            && self.max_depth <= self.multiplicity_bound
            && self.colors_used <= self.color_bound
            && self.color_conflicts == 0
            && self.center_violations == 0
            && self.half_cube_overlaps == 0
    }
}

/// `4^d + 1`.
pub fn color_bound(dim: usize) -> usize {
    4usize.pow(dim as u32) + 1
}

/// `2^d`.
pub fn multiplicity_bound(dim: usize) -> usize {
    1usize << dim
}

/// For each cube, the indices of the other cubes it meets. Sweeps over the
/// cubes sorted by lower first coordinate.
pub fn intersection_graph(cubes: &[Cube]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.sort_by(|&a, &b| cubes[a].lower(0).total_cmp(&cubes[b].lower(0)));
    let max_side = cubes.iter().fold(0.0_f64, |m, c| m.max(c.side));
    let lowers: Vec<f64> = order.iter().map(|&i| cubes[i].lower(0)).collect();
    let found = par::map_range(order.len(), |pos| {
        let a = &cubes[order[pos]];
        // any partner starts below a's upper face and above a.lower - max_side
        let from = lowers.partition_point(|&l| l <= a.lower(0) - max_side);
        let to = lowers.partition_point(|&l| l < a.upper(0));
        (from..to)
            .filter(|&q| q != pos && a.intersects(&cubes[order[q]]))
            .map(|q| order[q])
            .collect::<Vec<usize>>()
    });
    let mut graph = vec![Vec::new(); cubes.len()];
    for (pos, mut nbrs) in found.into_iter().enumerate() {
        nbrs.sort_unstable();
        graph[order[pos]] = nbrs;
    }
    graph
}

/// Largest number of the open cubes sharing a point of space.
///
/// The intersection of any family of open boxes, when nonempty, is an open
/// box whose lower corner has every coordinate equal to a lower face of the
/// family. For each cube `a` the candidate corners are built from the lower
/// faces of `a` and its neighbours that fall inside `a`; a corner `p` counts
/// the cubes `b` with `lower(b) <= p < upper(b)` componentwise, which are
/// exactly the cubes containing points just above `p`.
pub fn arrangement_depth(cubes: &[Cube], graph: &[Vec<usize>]) -> usize {
    if cubes.is_empty() {
        return 0;
    }
    let dim = cubes[0].dim();
    let depths = par::map_range(cubes.len(), |a| {
        let cube = &cubes[a];
        let family: Vec<&Cube> = std::iter::once(cube).chain(graph[a].iter().map(|&b| &cubes[b])).collect();
        let cands: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                let mut v: Vec<f64> = family
                    .iter()
                    .map(|c| c.lower(k))
                    .filter(|&x| x >= cube.lower(k) && x < cube.upper(k))
                    .collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        let mut best = 0;
        let mut idx = vec![0usize; dim];
        let mut p = vec![0.0; dim];
        'outer: loop {
            for k in 0..dim {
                p[k] = cands[k][idx[k]];
            }
            let depth = family
                .iter()
                .filter(|c| (0..dim).all(|k| c.lower(k) <= p[k] && p[k] < c.upper(k)))
                .count();
            best = best.max(depth);
            for k in 0..dim {
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        best
    });
    depths.into_iter().max().unwrap_or(0)
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySupport)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("points have no coordinates".into()));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::ShapeMismatch { expected: dim, got: p.len() });
        }
        for &x in p {
            ensure_finite(x, "point coordinate")?;
        }
    }
    Ok(dim)
}

/// Greedy covering of `points` by cubes centred at points of the set, with
/// side `side_of(x)` for the cube at `x`.
///
/// Each step picks the uncovered point with the largest side, ties going to
/// the lexicographically smallest point. Colours are assigned first-fit over
/// `4^d + 1` classes. The multiplicity is counted exactly afterwards.
pub fn besicovich_cover(points: &[Vec<f64>], side_of: impl Fn(&[f64]) -> f64 + Sync) -> Result<Covering> {
    check_points(points)?;
    let sides = par::map(points, |p| side_of(p));
    besicovich_cover_with_sides(points, &sides)
}

/// [`besicovich_cover`] with the sides given per point.
pub fn besicovich_cover_with_sides(points: &[Vec<f64>], sides: &[f64]) -> Result<Covering> {
    let dim = check_points(points)?;
    if sides.len() != points.len() {
        return Err(Error::ShapeMismatch { expected: points.len(), got: sides.len() });
    }
    for &s in sides {
        ensure_finite(s, "side length")?;
        if s <= 0.0 {
            return Err(Error::InvalidArgument(format!("side lengths must be positive, got {s}")));
        }
    }
    let lex = |a: usize, b: usize| {
        sides[b].total_cmp(&sides[a]).then_with(|| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    };
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex(a, b));

    let mut by_x: Vec<usize> = (0..points.len()).collect();
    by_x.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    let xs: Vec<f64> = by_x.iter().map(|&i| points[i][0]).collect();

    let classes = color_bound(dim);
    let mut covered = vec![false; points.len()];
    let mut cubes: Vec<Cube> = Vec::new();
    let mut colors: Vec<usize> = Vec::new();
    for &i in &order {
        if covered[i] {
            continue;
        }
        let cube = Cube { center: points[i].clone(), side: sides[i] };
        let mut taken = vec![false; classes + 1];
        for (prev, &c) in cubes.iter().zip(&colors) {
            if prev.intersects(&cube) {
                taken[c] = true;
            }
        }
        let color = (1..=classes).find(|&c| !taken[c]).ok_or(Error::ColoringExceeded(classes))?;
        let from = xs.partition_point(|&x| x <= cube.lower(0));
        let to = xs.partition_point(|&x| x < cube.upper(0));
        for &j in &by_x[from..to] {
            if !covered[j] && cube.contains(&points[j]) {
                covered[j] = true;
            }
        }
        debug_assert!(covered[i]);
        cubes.push(cube);
        colors.push(color);
    }
    let graph = intersection_graph(&cubes);
    let multiplicity = arrangement_depth(&cubes, &graph);
    Ok(Covering { dim, cubes, colors, multiplicity, calibration: None })
}

impl Covering {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn colors_used(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Re-derives every structural property of the covering against the
    /// point set it was built on.
    pub fn certify(&self, points: &[Vec<f64>]) -> CertificationReport {
        let graph = intersection_graph(&self.cubes);
        let max_depth = arrangement_depth(&self.cubes, &graph);
        let depths = par::map(points, |p| self.cubes.iter().filter(|c| c.contains(p)).count());
        let uncovered = depths.iter().filter(|&&d| d == 0).count();
        let max_depth_on_points = depths.into_iter().max().unwrap_or(0);
        let mut color_conflicts = 0;
        for (a, nbrs) in graph.iter().enumerate() {
            color_conflicts += nbrs.iter().filter(|&&b| b > a && self.colors[a] == self.colors[b]).count();
        }
        let center_violations: usize = graph
            .iter()
            .enumerate()
            .map(|(i, nbrs)| nbrs.iter().filter(|&&j| self.cubes[j].contains(&self.cubes[i].center)).count())
            .sum();
        let halves: Vec<Cube> = self.cubes.iter().map(Cube::halved).collect();
        let half_cube_overlaps = intersection_graph(&halves).iter().map(Vec::len).sum::<usize>() / 2;
        CertificationReport {
            dim: self.dim,
            num_cubes: self.cubes.len(),
            uncovered,
            max_depth_on_points,
            max_depth,
            multiplicity_bound: multiplicity_bound(self.dim),
            colors_used: self.colors_used(),
            color_bound: color_bound(self.dim),
            color_conflicts,
            center_violations,
            half_cube_overlaps,
        }
    }

    /// `17 ||W|| / A`, the ceiling the cube count must respect.
    pub fn m_bound_rhs(&self) -> Option<f64> {
        self.calibration.as_ref().map(|c| color_bound(self.dim) as f64 * c.total_norm / c.level)
    }

    /// The JSON document `{level, rtol, cubes, multiplicity, M_bound_rhs}`.
    pub fn to_document(&self) -> CoveringDocument {
        let cal = self.calibration.as_ref();
        let cubes = self
            .cubes
            .iter()
            .enumerate()
            .map(|(i, c)| CubeEntry {
                cx: c.center[0],
                cy: c.center.get(1).copied().unwrap_or(0.0),
                side: c.side,
                color: self.colors[i],
                norm: cal.map(|c| c.cube_norms[i]),
                budget: cal.map(|c| c.cube_budgets[i]),
            })
            .collect();
        CoveringDocument {
            level: cal.map(|c| c.level),
            rtol: cal.map(|c| c.rtol),
            total_norm: cal.map(|c| c.total_norm),
            cubes,
            multiplicity: self.multiplicity,
            m_bound_rhs: self.m_bound_rhs(),
        }
    }

    /// Rebuilds a two-dimensional covering from its JSON document. The
    /// multiplicity is recounted rather than trusted.
    pub fn from_document(doc: &CoveringDocument) -> Result<Self> {
        let mut cubes = Vec::with_capacity(doc.cubes.len());
        let mut colors = Vec::with_capacity(doc.cubes.len());
        for e in &doc.cubes {
            cubes.push(Cube::new(vec![e.cx, e.cy], e.side)?);
            if e.color == 0 {
                return Err(Error::InvalidArgument("cube colours are 1-based".into()));
            }
            colors.push(e.color);
        }
        let calibration = match (doc.level, doc.rtol, doc.total_norm) {
            (Some(level), Some(rtol), Some(total_norm)) => Some(Calibration {
                level,
                rtol,
                total_norm,
                cube_norms: doc.cubes.iter().map(|e| e.norm.unwrap_or(f64::NAN)).collect(),
                cube_budgets: doc.cubes.iter().map(|e| e.budget.unwrap_or(f64::NAN)).collect(),
            }),
            _ => None,
        };
        let graph = intersection_graph(&cubes);
        let multiplicity = arrangement_depth(&cubes, &graph);
        Ok(Self { dim: 2, cubes, colors, multiplicity, calibration })
    }
}

/// One cube in a [`CoveringDocument`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeEntry {
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
    pub color: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

/// Serialized form of a [`Covering`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringDocument {
    pub level: Option<f64>,
    pub rtol: Option<f64>,
    #[serde(default)]
    pub total_norm: Option<f64>,
    pub cubes: Vec<CubeEntry>,
    pub multiplicity: usize,
    #[serde(rename = "M_bound_rhs")]
    pub m_bound_rhs: Option<f64>,
}

fn check_support(w: &MeasuredField, omega: &DomainMask) -> Result<()> {
    let grid = w
        .grid()
        .ok_or_else(|| Error::InvalidArgument("the potential must live on the domain grid".into()))?;
    if grid != omega.grid() || w.cells() != omega.cells() {
        return Err(Error::InvalidArgument("the potential is not sampled on the cells of the domain".into()));
    }
    Ok(())
}

fn profile(w: &MeasuredField, x: [f64; 2], l: f64) -> Result<(f64, f64)> {
    let (values, measures) = w.cube_entries(x, l)?;
    let budget = measures.iter().sum();
    let norm = amemiya(&ExpLog, &values, &measures).map_or(0.0, |(_, n)| n);
    Ok((norm, budget))
}

/// `j(l)`: the norm of `w` over the open cube `x + l (-1/2, 1/2)^2`
/// intersected with `omega`, cells weighted by their overlap with the cube.
pub fn cube_norm_profile(w: &MeasuredField, omega: &DomainMask, x: [f64; 2], l: f64) -> Result<f64> {
    check_support(w, omega)?;
    ensure_finite(l, "side length")?;
    ensure_finite(x[0], "x")?;
    ensure_finite(x[1], "y")?;
    if l < 0.0 {
        return Err(Error::InvalidArgument(format!("side length must be >= 0, got {l}")));
    }
    Ok(profile(w, x, l)?.0)
}

/// Side of the smallest cube centred at `x` containing every cell of `omega`.
fn saturation_side(omega: &DomainMask, x: [f64; 2]) -> f64 {
    let grid = omega.grid();
    let h = grid.h;
    let reach = omega.cells().iter().fold(0.0_f64, |m, &c| {
        let p = grid.center(c);
        m.max((p[0] - x[0]).abs()).max((p[1] - x[1]).abs())
    });
    (2.0 * reach + h) * (1.0 + 1e-12)
}

fn solve_side(w: &MeasuredField, omega: &DomainMask, x: [f64; 2], level: f64, rtol: f64) -> Result<f64> {
    let hi = saturation_side(omega, x);
    let g = |l: f64| profile(w, x, l).map_or(f64::NAN, |(n, _)| n) - level;
    let ghi = g(hi);
    if !(ghi > 0.0) {
        return Err(Error::LevelUnreachable { level, norm: ghi + level });
    }
    let (lo, _) = bracket_root(g, 0.0, hi, -level, ghi, 1e-13, 300);
    let reached = g(lo) + level;
    if (reached - level).abs() > rtol * level {
        return Err(Error::InvalidArgument(format!(
            "side length at ({}, {}) reaches norm {reached}, not {level} within rtol {rtol}",
            x[0], x[1]
        )));
    }
    Ok(lo)
}

/// The largest side `l` with `j(l) = level`, to relative accuracy `rtol` in
/// the norm. `j` is continuous and nondecreasing, so the bracket search
/// keeps `j(lo) <= level < j(hi)` and returns `lo`.
pub fn solve_side_length(w: &MeasuredField, omega: &DomainMask, x: [f64; 2], level: f64, rtol: f64) -> Result<f64> {
    check_support(w, omega)?;
    ensure_finite(level, "level")?;
    ensure_finite(rtol, "rtol")?;
    if level <= 0.0 {
        return Err(Error::InvalidArgument(format!("level must be positive, got {level}")));
    }
    let total = amemiya(&ExpLog, w.values(), w.measures()).map_or(0.0, |(_, n)| n);
    if level >= total {
        return Err(Error::LevelUnreachable { level, norm: total });
    }
    solve_side(w, omega, x, level, rtol)
}

/// Covering of the cell centres of `omega` by cubes on each of which the
/// norm of `w` equals `level` up to `rtol`.
///
/// A level within `rtol` of the total norm gives a single cube containing
/// the whole domain.
pub fn build_calibrated_covering(w: &MeasuredField, omega: &DomainMask, level: f64, rtol: f64) -> Result<Covering> {
    check_support(w, omega)?;
    ensure_finite(level, "level")?;
    ensure_finite(rtol, "rtol")?;
    if level <= 0.0 || !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::InvalidArgument(format!("need level > 0 and 0 < rtol < 1, got {level}, {rtol}")));
    }
    if w.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("the potential must be nonnegative".into()));
    }
    let total = amemiya(&ExpLog, w.values(), w.measures()).map_or(0.0, |(_, n)| n);
    if total == 0.0 {
        return Err(Error::ZeroField);
    }
    if level > total * (1.0 + rtol) {
        return Err(Error::LevelUnreachable { level, norm: total });
    }
    let grid = omega.grid();
    let centers: Vec<[f64; 2]> = omega.cells().iter().map(|&c| grid.center(c)).collect();
    let degenerate = level >= total * (1.0 - rtol);
    let sides: Vec<f64> = par::map(&centers, |&x| {
        if degenerate {
            Ok(saturation_side(omega, x))
        } else {
            solve_side(w, omega, x, level, rtol)
        }
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let points: Vec<Vec<f64>> = centers.iter().map(|p| p.to_vec()).collect();
    let mut covering = besicovich_cover_with_sides(&points, &sides)?;
    let (cube_norms, cube_budgets): (Vec<f64>, Vec<f64>) = par::map(&covering.cubes, |c| {
        profile(w, [c.center[0], c.center[1]], c.side).unwrap_or((f64::NAN, f64::NAN))
    })
    .into_iter()
    .unzip();
    covering.calibration = Some(Calibration { level, rtol, total_norm: total, cube_norms, cube_budgets });
    Ok(covering)
}

/// Cell centres of `omega` as points for [`Covering::certify`].
pub fn cell_points(omega: &DomainMask) -> Vec<Vec<f64>> {
    let grid = omega.grid();
    omega.cells().iter().map(|&c| grid.center(c).to_vec()).collect()
}

/// Largest relative deviation of the recorded cube norms from the level.
pub fn calibration_error(covering: &Covering) -> Option<f64> {
    let cal = covering.calibration.as_ref()?;
    Some(cal.cube_norms.iter().fold(0.0_f64, |m, &n| m.max((n - cal.level).abs() / cal.level)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Grid, MaskPreset};
    use crate::young::inv_a;

    fn ones_on(omega: &DomainMask) -> MeasuredField {
        MeasuredField::on_mask(omega, vec![1.0; omega.num_inside()]).unwrap()
    }

    fn big_square() -> DomainMask {
        let grid = Grid::new([-2.0, -2.0], 4.0, 64).unwrap();
        DomainMask::from_fn(grid, |_, _| true).unwrap()
    }

    #[test]
    fn profile_examples() {
        let omega = big_square();
        let w = ones_on(&omega);
        assert_eq!(cube_norm_profile(&w, &omega, [0.0, 0.0], 0.0).unwrap(), 0.0);
        let a1 = inv_a(1.0).unwrap();
        for &l in &[0.3, 1.0, 1.7] {
            let j = cube_norm_profile(&w, &omega, [0.01, -0.02], l).unwrap();
            assert!((j - l * l * a1).abs() < 1e-9 * a1, "l = {l}: {j}");
        }
        let total = crate::orlicz::orlicz_norm(&w).unwrap().norm;
        let sat = cube_norm_profile(&w, &omega, [1.9, 1.9], 10.0).unwrap();
        assert!((sat - total).abs() < 1e-9 * total);
    }

    #[test]
    fn side_length_examples() {
        let omega = big_square();
        let w = ones_on(&omega);
        let a1 = inv_a(1.0).unwrap();
        let l = solve_side_length(&w, &omega, [0.0, 0.0], a1, 1e-3).unwrap();
        assert!((l - 1.0).abs() < 1e-6, "{l}");
        let l = solve_side_length(&w, &omega, [0.0, 0.0], 4.0 * a1, 1e-3).unwrap();
        assert!((l - 2.0).abs() < 1e-6, "{l}");
        let total = crate::orlicz::orlicz_norm(&w).unwrap().norm;
        let l = solve_side_length(&w, &omega, [1.0, 1.0], 0.99 * total, 1e-3).unwrap();
        assert!(l > 4.0 && l <= saturation_side(&omega, [1.0, 1.0]));
        assert!(matches!(
            solve_side_length(&w, &omega, [0.0, 0.0], total, 1e-3),
            Err(Error::LevelUnreachable { .. })
        ));
        assert!(solve_side_length(&w, &omega, [0.0, 0.0], 0.0, 1e-3).is_err());
    }

    #[test]
    fn trivial_covers() {
        let c = besicovich_cover(&[vec![0.5, 0.5]], |_| 1.0).unwrap();
        assert_eq!((c.len(), c.multiplicity, c.colors_used()), (1, 1, 1));
        let c = besicovich_cover(&[vec![0.0, 0.0], vec![10.0, 0.0]], |_| 1.0).unwrap();
        assert_eq!((c.len(), c.multiplicity, c.colors_used()), (2, 1, 1));
        assert!(besicovich_cover(&[vec![0.0, 0.0]], |_| 0.0).is_err());
        assert!(besicovich_cover(&[], |_| 1.0).is_err());
    }

    #[test]
    fn grid_cover_with_constant_side() {
        let pts: Vec<Vec<f64>> = (0..2500)
            .map(|i| vec![(i % 50) as f64 / 49.0, (i / 50) as f64 / 49.0])
            .collect();
        let c = besicovich_cover(&pts, |_| 0.11).unwrap();
        let report = c.certify(&pts);
        assert!(report.ok(), "{report:?}");
        // brute force: deepest cell of the common refinement of all faces
        let mut xs: Vec<f64> = c.cubes.iter().flat_map(|q| [q.lower(0), q.upper(0)]).collect();
        let mut ys: Vec<f64> = c.cubes.iter().flat_map(|q| [q.lower(1), q.upper(1)]).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        xs.dedup();
        ys.dedup();
        let mut brute = 0;
        for wx in xs.windows(2) {
            for wy in ys.windows(2) {
                let p = [0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1])];
                brute = brute.max(c.cubes.iter().filter(|q| q.contains(&p)).count());
            }
        }
        assert_eq!(c.multiplicity, brute);
        assert!(c.multiplicity <= 4 && c.colors_used() <= 17);
    }

    #[test]
    fn arrangement_depth_of_nested_and_shifted_cubes() {
        let cubes = vec![
            Cube::new(vec![0.0, 0.0], 2.0).unwrap(),
            Cube::new(vec![0.5, 0.5], 2.0).unwrap(),
            Cube::new(vec![0.9, 0.9], 0.5).unwrap(),
            Cube::new(vec![5.0, 5.0], 1.0).unwrap(),
            Cube::new(vec![0.0, 2.0], 2.0).unwrap(),
        ];
        let g = intersection_graph(&cubes);
        assert_eq!(arrangement_depth(&cubes, &g), 3);
        assert!(g[3].is_empty());
        assert!(!g[0].contains(&4), "touching faces do not intersect");
    }

    #[test]
    fn calibrated_covering_of_constant_field() {
        let omega = DomainMask::preset(MaskPreset::Square, 32).unwrap();
        let w = ones_on(&omega);
        let total = crate::orlicz::orlicz_norm(&w).unwrap().norm;
        let c = build_calibrated_covering(&w, &omega, total / 2.0, 1e-3).unwrap();
        assert!(c.len() >= 2 && c.len() <= 34, "{}", c.len());
        assert!(calibration_error(&c).unwrap() <= 1e-3);
        assert!(c.certify(&cell_points(&omega)).ok());
        let single = build_calibrated_covering(&w, &omega, total, 1e-3).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn document_round_trip() {
        let omega = DomainMask::preset(MaskPreset::Disk, 24).unwrap();
        let w = ones_on(&omega);
        let total = crate::orlicz::orlicz_norm(&w).unwrap().norm;
        let c = build_calibrated_covering(&w, &omega, total / 5.0, 1e-3).unwrap();
        let text = serde_json::to_string(&c.to_document()).unwrap();
        assert!(text.contains("\"M_bound_rhs\""));
        let back = Covering::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
