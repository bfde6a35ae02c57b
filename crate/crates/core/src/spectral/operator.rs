use crate::domain::DomainMask;
use crate::error::{ensure_finite, Error, Result};
use crate::orlicz::MeasuredField;

/// Real symmetric matrix stored as its diagonal plus, per row, the
/// off-diagonal entries sorted by column. Both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricOperator {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymmetricOperator {
    /// Builds the operator from its diagonal and the upper-triangle entries
    /// `(i, j, value)` with `i < j`. Repeated entries are summed.
    pub fn new(diag: Vec<f64>, upper: &[(usize, usize, f64)]) -> Result<Self> {
        let n = diag.len();
        for &d in &diag {
            ensure_finite(d, "diagonal entry")?;
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in upper {
            ensure_finite(v, "off-diagonal entry")?;
            if i >= j || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) is not strictly upper in a {n}x{n} matrix")));
            }
            rows[i].push((j, v));
            rows[j].push((i, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *row = merged;
        }
        Ok(Self { diag, rows })
    }

    /// Symmetric operator from a dense square matrix; only the upper
    /// triangle is read.
    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut upper = Vec::new();
        let mut diag = Vec::with_capacity(n);
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch { expected: n, got: row.len() });
            }
            diag.push(row[i]);
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v != 0.0 {
                    upper.push((i, j, v));
                }
            }
        }
        Self::new(diag, &upper)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.diag.len() + self.rows.iter().map(Vec::len).sum::<usize>()
    }

    /// Largest absolute entry of `self - shift I`.
    pub fn max_abs(&self, shift: f64) -> f64 {
        let d = self.diag.iter().fold(0.0_f64, |m, &d| m.max((d - shift).abs()));
        self.rows.iter().flatten().fold(d, |m, &(_, v)| m.max(v.abs()))
    }

    /// `self + diag(values)`.
    pub fn add_diagonal(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), got: values.len() });
        }
        let mut out = self.clone();
        for (d, &v) in out.diag.iter_mut().zip(values) {
            ensure_finite(v, "diagonal term")?;
            *d += v;
        }
        Ok(out)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                a[i][j] = v;
            }
        }
        a
    }
}

/// The 5-point Dirichlet Laplacian `h^-2 (4 u_i - sum of neighbours)` on
/// the inside cells of `mask`, unknowns ordered like `mask.cells()`.
pub fn dirichlet_laplacian(mask: &DomainMask) -> Result<SparseSymmetricOperator> {
    if mask.num_inside() == 0 {
        return Err(Error::EmptySupport);
    }
    let grid = mask.grid();
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let dof = mask.dof_map();
    let mut upper = Vec::with_capacity(2 * mask.num_inside());
    for (i, &c) in mask.cells().iter().enumerate() {
        for nb in grid.neighbors(c).into_iter().flatten() {
            if mask.is_inside(nb) && dof[nb] > i {
                upper.push((i, dof[nb], -inv_h2));
            }
        }
    }
    SparseSymmetricOperator::new(vec![4.0 * inv_h2; mask.num_inside()], &upper)
}

/// `-Laplacian + V` with `V` sampled on the inside cells of `mask`.
pub fn schrodinger(mask: &DomainMask, v: &MeasuredField) -> Result<SparseSymmetricOperator> {
    if v.len() != mask.num_inside() {
        return Err(Error::ShapeMismatch { expected: mask.num_inside(), got: v.len() });
    }
    if let Some(grid) = v.grid() {
        if grid != mask.grid() || v.cells() != mask.cells() {
            return Err(Error::InvalidArgument("potential is sampled on a different domain".into()));
        }
    }
    dirichlet_laplacian(mask)?.add_diagonal(v.values())
}
