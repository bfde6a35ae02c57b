//! Inertia of sparse symmetric matrices by envelope `LDL^T` factorization.
//!
//! The matrix is reordered (reverse Cuthill-McKee or the natural order,
//! whichever has the smaller envelope) and factored in place inside its
//! envelope with Bunch-Kaufman `1x1`/`2x2` pivoting; a symmetric interchange
//! only widens the rows it touches. Only the pivots are kept. By Sylvester's
//! law of inertia their signs give the eigenvalue signs of the matrix.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::operator::SparseSymmetricOperator;
use crate::error::{ensure_finite, Error, Result};
use crate::par;

/// Pivots with `|d| <= ZERO_PIVOT_RTOL * max|entry|` count as zero.
pub const ZERO_PIVOT_RTOL: f64 = 1e-12;

/// Bunch-Kaufman threshold `(1 + sqrt 17) / 8`.
const BK_ALPHA: f64 = 0.640_388_203_202_208_4;

/// Largest admissible multiplier magnitude for one elimination step.
const GROWTH_LIMIT: f64 = 1e10;

const MAX_ATTEMPTS: usize = 5;

/// Envelope entries above which the factorization is refused (about 4 GB).
const MAX_ENVELOPE: usize = 1 << 29;

/// Row count from which the trailing update runs on the thread pool.
const PAR_WIDTH: usize = 256;

/// Signs of the eigenvalues of `op - shift I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InertiaReport {
    pub dimension: usize,
    pub n_negative: usize,
    pub n_zero: usize,
    pub n_positive: usize,
    pub shift: f64,
    /// Absolute threshold below which a pivot was declared zero.
    pub pivot_tolerance: f64,
    pub two_by_two_pivots: usize,
    /// Largest multiplier bound over all elimination steps.
    pub max_growth: f64,
    /// Number of orderings tried; 1 unless a factorization broke down.
    pub attempts: usize,
    pub ordering: String,
    pub envelope: usize,
}

/// Inertia of `op - shift I`.
pub fn count_negative(op: &SparseSymmetricOperator, shift: f64) -> Result<InertiaReport> {
    count_negative_seeded(op, shift, 0)
}

/// [`count_negative`] with the seed that drives the randomized orderings
/// tried after a breakdown.
pub fn count_negative_seeded(op: &SparseSymmetricOperator, shift: f64, seed: u64) -> Result<InertiaReport> {
    ensure_finite(shift, "shift")?;
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptySupport);
    }
    let tol = ZERO_PIVOT_RTOL * op.max_abs(shift);
    let mut failures = Vec::new();
    for attempt in 0..MAX_ATTEMPTS {
        let (perm, name) = if attempt == 0 {
            let natural: Vec<usize> = (0..n).collect();
            let rcm = rcm_order(op, None);
            if profile(&envelope(op, &rcm)) < profile(&envelope(op, &natural)) {
                (rcm, "rcm")
            } else {
                (natural, "natural")
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (rcm_order(op, Some(&mut rng)), "randomized-rcm")
        };
        match factor(op, shift, tol, &perm) {
            Ok(mut report) => {
                report.attempts = attempt + 1;
                report.ordering = name.to_string();
                return Ok(report);
            }
            Err(Breakdown::Fatal(e)) => return Err(e),
            Err(Breakdown::Pivot(detail)) => failures.push(format!("{name}: {detail}")),
        }
    }
    Err(Error::FactorizationBreakdown { attempts: MAX_ATTEMPTS, detail: failures.join("; ") })
}

/// Reverse Cuthill-McKee permutation (`perm[new] = old`). Each connected
/// component starts from a pseudo-peripheral node. With `rng`, component
/// seeds and tie-breaks among equal-degree neighbours are shuffled.
pub fn rcm_order(op: &SparseSymmetricOperator, mut rng: Option<&mut ChaCha8Rng>) -> Vec<usize> {
    let n = op.dim();
    let degree = |i: usize| op.row(i).len();
    let mut seeds: Vec<usize> = (0..n).collect();
    if let Some(r) = rng.as_deref_mut() {
        seeds.shuffle(r);
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    for &s in &seeds {
        if visited[s] {
            continue;
        }
        let root = pseudo_peripheral(op, s, &mut level);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = op.row(v).iter().map(|e| e.0).filter(|&u| !visited[u]).collect();
            if let Some(r) = rng.as_deref_mut() {
                next.shuffle(r);
            }
            next.sort_by_key(|&u| degree(u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root`; returns the nodes of the last level and
/// the eccentricity. `level` is scratch space reset on exit.
fn bfs_last_level(op: &SparseSymmetricOperator, root: usize, level: &mut [usize]) -> (Vec<usize>, usize) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &(u, _) in op.row(v) {
                if level[u] == usize::MAX {
                    level[u] = depth + 1;
                    touched.push(u);
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
        depth += 1;
    }
    for v in touched {
        level[v] = usize::MAX;
    }
    (frontier, depth)
}

fn pseudo_peripheral(op: &SparseSymmetricOperator, start: usize, level: &mut [usize]) -> usize {
    let mut root = start;
    let (mut last, mut ecc) = bfs_last_level(op, root, level);
    for _ in 0..16 {
        let cand = *last.iter().min_by_key(|&&v| (op.row(v).len(), v)).expect("nonempty level");
        let (l, e) = bfs_last_level(op, cand, level);
        if e <= ecc {
            break;
        }
        root = cand;
        last = l;
        ecc = e;
    }
    root
}

/// First stored column of each row of the permuted matrix, made
/// nondecreasing so that fill stays inside the envelope.
pub fn envelope(op: &SparseSymmetricOperator, perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut first: Vec<usize> = (0..n)
        .map(|i| op.row(perm[i]).iter().map(|&(j, _)| inv[j]).filter(|&j| j < i).min().unwrap_or(i))
        .collect();
    for i in (0..n.saturating_sub(1)).rev() {
        first[i] = first[i].min(first[i + 1]);
    }
    first
}

/// Number of strictly lower envelope entries.
pub fn profile(first: &[usize]) -> usize {
    first.iter().enumerate().map(|(i, &f)| i - f).sum()
}

enum Breakdown {
    Pivot(String),
    Fatal(Error),
}

fn classify(x: f64, tol: f64, counts: &mut [usize; 3]) {
    if x.abs() <= tol {
        counts[1] += 1;
    } else if x < 0.0 {
        counts[0] += 1;
    } else {
        counts[2] += 1;
    }
}

/// Envelope storage of the active matrix: row `i` holds columns
/// `first[i]..=i`, with `first` nondecreasing.
struct Envelope {
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Envelope {
    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if j >= self.first[i] {
            self.rows[i][j - self.first[i]]
        } else {
            0.0
        }
    }

    fn slot(&mut self, i: usize, j: usize) -> &mut f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        &mut self.rows[i][j - self.first[i]]
    }

    /// Last row whose envelope reaches column `c`.
    fn last(&self, c: usize) -> usize {
        (self.first.partition_point(|&f| f <= c) - 1).max(c)
    }

    fn size(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Symmetric interchange of rows and columns `p < m` of the active
    /// block `k..`, where `k <= p` and `first[m] <= k`. Rows between `p` and
    /// `m` already reach column `k`; rows below `m` that reach column `m` are
    /// widened to reach `p`.
    fn swap(&mut self, k: usize, p: usize, m: usize) {
        debug_assert!(k <= p && p < m && self.first[m] <= k);
        let n = self.rows.len();
        let end = self.first.partition_point(|&f| f <= m);
        for i in m + 1..end.max(m + 1).min(n) {
            if self.first[i] > p {
                let pad = self.first[i] - p;
                let mut row = vec![0.0; pad + self.rows[i].len()];
                row[pad..].copy_from_slice(&self.rows[i]);
                self.rows[i] = row;
                self.first[i] = p;
            }
            let (fp, fm) = (p - self.first[i], m - self.first[i]);
            self.rows[i].swap(fp, fm);
        }
        let (dp, dm) = (self.get(p, p), self.get(m, m));
        *self.slot(p, p) = dm;
        *self.slot(m, m) = dp;
        for j in k..p {
            let (x, y) = (self.get(p, j), self.get(m, j));
            *self.slot(p, j) = y;
            *self.slot(m, j) = x;
        }
        for j in p + 1..m {
            let (x, y) = (self.get(j, p), self.get(m, j));
            *self.slot(j, p) = y;
            *self.slot(m, j) = x;
        }
    }

    /// Subtracts `sum_t l_t(i) c_t(j)` from rows `from..=to` for columns
    /// `from..=i`, where the `c_t` are the pivot columns restricted to those
    /// rows and `l = c E^{-1}`.
    fn update(&mut self, from: usize, to: usize, cols: &[Vec<f64>], inv: &[[f64; 2]; 2]) {
        if from > to {
            return;
        }
        let first = &self.first;
        let update = |off: usize, row: &mut Vec<f64>| {
            let i = from + off;
            let start = from - first[i];
            let stop = i - first[i];
            let target = &mut row[start..=stop];
            if cols.len() == 1 {
                let li = cols[0][off] * inv[0][0];
                if li != 0.0 {
                    for (x, &cj) in target.iter_mut().zip(&cols[0][..=off]) {
                        *x -= li * cj;
                    }
                }
            } else {
                let (u, v) = (cols[0][off], cols[1][off]);
                let l0 = u * inv[0][0] + v * inv[1][0];
                let l1 = u * inv[0][1] + v * inv[1][1];
                if l0 != 0.0 || l1 != 0.0 {
                    for ((x, &uj), &vj) in target.iter_mut().zip(&cols[0][..=off]).zip(&cols[1][..=off]) {
                        *x -= l0 * uj + l1 * vj;
                    }
                }
            }
        };
        let rows = &mut self.rows[from..=to];
        if rows.len() >= PAR_WIDTH {
            par::for_each_mut(rows, update);
        } else {
            rows.iter_mut().enumerate().for_each(|(o, row)| update(o, row));
        }
    }
}

fn factor(op: &SparseSymmetricOperator, shift: f64, tol: f64, perm: &[usize]) -> std::result::Result<InertiaReport, Breakdown> {
    let n = perm.len();
    let first = envelope(op, perm);
    let size = profile(&first) + n;
    if size > MAX_ENVELOPE {
        return Err(Breakdown::Fatal(Error::InvalidArgument(format!(
            "envelope of {size} entries exceeds the limit of {MAX_ENVELOPE}"
        ))));
    }
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; i - first[i] + 1];
            row[i - first[i]] = op.diag()[perm[i]] - shift;
            for &(j, v) in op.row(perm[i]) {
                let j = inv[j];
                if j < i {
                    row[j - first[i]] = v;
                }
            }
            row
        })
        .collect();
    let mut env = Envelope { first, rows };

    let mut counts = [0usize; 3];
    let mut two_by_two = 0;
    let mut max_growth = 0.0_f64;
    let mut k = 0;
    while k < n {
        let end = env.last(k);
        let (mut r, mut lambda) = (k, 0.0_f64);
        for i in k + 1..=end {
            let x = env.get(i, k).abs();
            if x > lambda {
                r = i;
                lambda = x;
            }
        }
        let d = env.get(k, k);
        if lambda <= tol && d.abs() <= tol {
            counts[1] += 1;
            k += 1;
            continue;
        }
        let mut two = false;
        if d.abs() < BK_ALPHA * lambda {
            let end_r = env.last(r);
            let sigma = (k..=end_r).filter(|&i| i != r).fold(0.0_f64, |m, i| m.max(env.get(i, r).abs()));
            if d.abs() * sigma >= BK_ALPHA * lambda * lambda {
                // keep the 1x1 pivot at k
            } else if env.get(r, r).abs() >= BK_ALPHA * sigma {
                env.swap(k, k, r);
            } else {
                if r != k + 1 {
                    env.swap(k, k + 1, r);
                }
                two = true;
            }
        }
        if !two {
            let d = env.get(k, k);
            let end = env.last(k);
            let col: Vec<f64> = (k + 1..=end).map(|i| env.get(i, k)).collect();
            let lambda = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let growth = if lambda == 0.0 { 0.0 } else { lambda / d.abs() };
            if !(growth <= GROWTH_LIMIT) {
                return Err(Breakdown::Pivot(format!("pivot {k}: |d| = {d:e} against column max {lambda:e}")));
            }
            max_growth = max_growth.max(growth);
            classify(d, tol, &mut counts);
            if lambda > 0.0 {
                env.update(k + 1, end, &[col], &[[1.0 / d, 0.0], [0.0, 0.0]]);
            }
            k += 1;
        } else {
            let (a, e, c) = (env.get(k, k), env.get(k + 1, k), env.get(k + 1, k + 1));
            let det = a * c - e * e;
            let end = env.last(k + 1);
            let u: Vec<f64> = (k + 2..=end).map(|i| env.get(i, k)).collect();
            let v: Vec<f64> = (k + 2..=end).map(|i| env.get(i, k + 1)).collect();
            let einv = [[c / det, -e / det], [-e / det, a / det]];
            let growth = u.iter().zip(&v).fold(0.0_f64, |m, (&x, &y)| {
                m.max((x * einv[0][0] + y * einv[1][0]).abs() + (x * einv[0][1] + y * einv[1][1]).abs())
            });
            if !(growth <= GROWTH_LIMIT) || det == 0.0 {
                return Err(Breakdown::Pivot(format!("pivots {k},{}: 2x2 block growth {growth:e}", k + 1)));
            }
            max_growth = max_growth.max(growth);
            two_by_two += 1;
            let t = 0.5 * (a + c);
            let s = (0.25 * (a - c) * (a - c) + e * e).sqrt();
            classify(t - s, tol, &mut counts);
            classify(t + s, tol, &mut counts);
            env.update(k + 2, end, &[u, v], &einv);
            k += 2;
        }
    }
    Ok(InertiaReport {
        dimension: n,
        n_negative: counts[0],
        n_zero: counts[1],
        n_positive: counts[2],
        shift,
        pivot_tolerance: tol,
        two_by_two_pivots: two_by_two,
        max_growth,
        attempts: 1,
        ordering: String::new(),
        envelope: env.size(),
    })
}
