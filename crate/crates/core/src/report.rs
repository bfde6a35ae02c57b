//! JSON run reports.

use serde::Serialize;

use crate::domain::DomainMask;
use crate::error::Result;
use crate::orlicz::{orlicz_norm, MeasuredField};
use crate::spectral::inertia::count_negative;
use crate::spectral::operator::schrodinger;
use crate::spectral::weyl::{resolution_warning, weyl_target};

/// Result of counting the negative eigenvalues of `-Laplacian + alpha V`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub domain_id: String,
    pub grid_n: usize,
    pub h: f64,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_zero: usize,
    /// Norm of `(alpha V)_-`.
    #[serde(rename = "norm_B")]
    pub norm_b: f64,
    /// `N / norm_B`, absent when `V_- = 0`.
    pub ratio: Option<f64>,
    /// `(alpha / 4 pi) int V_-`.
    pub weyl_target: f64,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl RunReport {
    pub fn compute(domain_id: &str, mask: &DomainMask, v: &MeasuredField, alpha: f64, seed: u64) -> Result<Self> {
        let scaled = v.scaled(alpha)?;
        let r = count_negative(&schrodinger(mask, &scaled)?, 0.0)?;
        let norm_b = orlicz_norm(&scaled.negative_part())?.norm;
        let mut warnings: Vec<String> = resolution_warning(mask, v, alpha).into_iter().collect();
        if r.n_zero > 0 {
            warnings.push(format!(
                "{} pivot(s) classified as zero; N lies in [{}, {}]",
                r.n_zero,
                r.n_negative,
                r.n_negative + r.n_zero
            ));
        }
        Ok(Self {
            domain_id: domain_id.to_string(),
            grid_n: mask.n(),
            h: mask.h(),
            alpha,
            n: r.n_negative,
            n_zero: r.n_zero,
            norm_b,
            ratio: (norm_b > 0.0).then(|| r.n_negative as f64 / norm_b),
            weyl_target: weyl_target(&scaled),
            warnings,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::MaskPreset;

    #[test]
    fn square_well_report() {
        let mask = DomainMask::preset(MaskPreset::Square, 64).unwrap();
        let v = MeasuredField::on_mask(&mask, vec![-50.0; mask.num_inside()]).unwrap();
        let r = RunReport::compute("square", &mask, &v, 1.0, 0).unwrap();
        assert_eq!((r.n, r.n_zero, r.grid_n), (3, 0, 64));
        assert!((r.weyl_target - 50.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-9);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["domain_id", "grid_n", "h", "alpha", "N", "n_zero", "norm_B", "ratio", "weyl_target", "warnings", "seed"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
