use std::f64::consts::PI;

use serde::Serialize;

use super::inertia::count_negative;
use super::operator::schrodinger;
use crate::domain::DomainMask;
use crate::error::{ensure_finite, Error, Result};
use crate::orlicz::MeasuredField;
use crate::par;

/// One coupling value of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylRow {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_zero: usize,
    #[serde(rename = "N_over_alpha")]
    pub n_over_alpha: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylSweep {
    pub rows: Vec<WeylRow>,
    /// `(1/4 pi) int V_-`.
    pub target: f64,
    pub warnings: Vec<String>,
}

impl WeylSweep {
    /// CSV with header `alpha,N,N_over_alpha,target`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(["alpha", "N", "N_over_alpha", "target"])?;
        for r in &self.rows {
            w.write_record([r.alpha.to_string(), r.n.to_string(), r.n_over_alpha.to_string(), r.target.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }
}

/// `(1/4 pi) int V_-` by the midpoint rule on the cells.
pub fn weyl_target(v: &MeasuredField) -> f64 {
    v.values().iter().zip(v.measures()).map(|(&x, &m)| m * (-x).max(0.0)).sum::<f64>() / (4.0 * PI)
}

/// Warning when the local wavelength of `-Laplacian + alpha V` at the bottom
/// of the well is under-resolved, `sqrt(alpha max V_-) h > pi / 4`.
pub fn resolution_warning(mask: &DomainMask, v: &MeasuredField, alpha: f64) -> Option<String> {
    let depth = v.values().iter().fold(0.0_f64, |m, &x| m.max(-x));
    let k = (alpha * depth).sqrt() * mask.h();
    (k > PI / 4.0).then(|| {
        format!("alpha = {alpha}: sqrt(alpha max V_-) h = {k:.3} exceeds pi/4; the grid under-resolves the well and N may be undercounted")
    })
}

/// `N(-Laplacian + alpha V)` for each `alpha`, with `N / alpha` and the
/// semiclassical target.
pub fn weyl_sweep(mask: &DomainMask, v: &MeasuredField, alphas: &[f64]) -> Result<WeylSweep> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("no coupling values".into()));
    }
    for &a in alphas {
        ensure_finite(a, "alpha")?;
        if a <= 0.0 {
            return Err(Error::InvalidArgument(format!("coupling values must be positive, got {a}")));
        }
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("coupling values must be increasing".into()));
    }
    let target = weyl_target(v);
    let counts = par::map(alphas, |&a| -> Result<(usize, usize)> {
        let r = count_negative(&schrodinger(mask, &v.scaled(a)?)?, 0.0)?;
        Ok((r.n_negative, r.n_zero))
    });
    let mut rows = Vec::with_capacity(alphas.len());
    for (&alpha, c) in alphas.iter().zip(counts) {
        let (n, n_zero) = c?;
        rows.push(WeylRow { alpha, n, n_zero, n_over_alpha: n as f64 / alpha, target });
    }
    let mut warnings: Vec<String> = resolution_warning(mask, v, alphas[alphas.len() - 1]).into_iter().collect();
    if v.values().iter().all(|&x| x <= 0.0) && rows.windows(2).any(|w| w[1].n < w[0].n) {
        warnings.push("N decreased with alpha for a nonpositive potential".into());
    }
    Ok(WeylSweep { rows, target, warnings })
}
