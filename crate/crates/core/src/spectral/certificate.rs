use serde::Serialize;

use super::inertia::count_negative;
use super::operator::schrodinger;
use super::trudinger::trudinger_root;
use crate::covering::{build_calibrated_covering, cell_points, color_bound, Covering};
use crate::domain::{DomainMask, MaskPreset};
use crate::error::{Error, Result};
use crate::orlicz::{orlicz_norm, MeasuredField};
use crate::par;
use crate::potential::PotentialSpec;

/// Default for the mean-zero Trudinger constant `S_2'`. The exact value
/// depends on an unspecified cutoff function; this default passed the
/// randomized mean-zero checks and is not a proven bound.
pub const DEFAULT_S2_PRIME: f64 = 1.0;

/// `N`, `||V_-||` and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_zero: usize,
    #[serde(rename = "norm_B")]
    pub norm_b: f64,
    /// `N / ||V_-||`, absent when `V_- = 0`.
    pub ratio: Option<f64>,
}

/// Negative eigenvalue count of `-Laplacian + V` against the norm of `V_-`.
pub fn bound_check(mask: &DomainMask, v: &MeasuredField) -> Result<BoundCheck> {
    let r = count_negative(&schrodinger(mask, v)?, 0.0)?;
    let norm_b = orlicz_norm(&v.negative_part())?.norm;
    let ratio = (norm_b > 0.0).then(|| r.n_negative as f64 / norm_b);
    Ok(BoundCheck { n: r.n_negative, n_zero: r.n_zero, norm_b, ratio })
}

/// A named `(domain, potential)` pair.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub mask: DomainMask,
    pub potential: MeasuredField,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusRow {
    pub id: String,
    #[serde(flatten)]
    pub check: BoundCheck,
}

/// Bound checks over a corpus and the empirical constant
/// `C_hat = max N / ||V_-||`.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    pub c_hat: f64,
}

pub fn bound_corpus(entries: &[CorpusEntry]) -> Result<CorpusSummary> {
    let checks = par::map(entries, |e| bound_check(&e.mask, &e.potential));
    let mut rows = Vec::with_capacity(entries.len());
    let mut c_hat = 0.0_f64;
    for (e, c) in entries.iter().zip(checks) {
        let check = c?;
        if let Some(r) = check.ratio {
            c_hat = c_hat.max(r);
        }
        rows.push(CorpusRow { id: e.id.clone(), check });
    }
    Ok(CorpusSummary { rows, c_hat })
}

/// Every mask preset with constant, Gaussian and checker wells of three
/// depths, on an `n x n` grid: 45 instances.
pub fn standard_corpus(n: usize) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for preset in MaskPreset::ALL {
        let mask = DomainMask::preset(preset, n)?;
        for depth in [30.0, 300.0, 1500.0] {
            for spec in [
                PotentialSpec::ConstantWell { depth },
                PotentialSpec::GaussianWell { depth: 2.0 * depth, width: 0.2 },
                PotentialSpec::Checker { depth },
            ] {
                let (potential, _) = spec.sample(&mask)?;
                out.push(CorpusEntry { id: format!("{}/{spec:?}", preset.name()), mask: mask.clone(), potential });
            }
        }
    }
    Ok(out)
}

/// The two Trudinger constants the certificate argument rests on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateConstants {
    /// Root of `C_alpha = 1`.
    pub s2: f64,
    /// Mean-zero constant; configured, not derived.
    pub s2_prime: f64,
}

impl Default for CertificateConstants {
    fn default() -> Self {
        Self { s2: trudinger_root(), s2_prime: DEFAULT_S2_PRIME }
    }
}

impl CertificateConstants {
    /// Largest admissible covering level `min(S_2'/4, S_2)`.
    pub fn level(&self) -> f64 {
        (0.25 * self.s2_prime).min(self.s2)
    }

    /// `17 max(4/S_2', 1/S_2)`.
    pub fn count_factor(&self) -> f64 {
        color_bound(2) as f64 * (4.0 / self.s2_prime).max(1.0 / self.s2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `||V_-|| <= S_2`: the form is nonnegative and `N = 0`.
    Subcritical,
    /// Otherwise `N` is at most the number of cubes of a calibrated covering.
    Covering,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub branch: Branch,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_zero: usize,
    #[serde(rename = "norm_B")]
    pub norm_b: f64,
    pub constants: CertificateConstants,
    pub level: Option<f64>,
    pub rtol: Option<f64>,
    /// Cube count `M`.
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub multiplicity: Option<usize>,
    /// `17 max(4/S_2', 1/S_2) ||V_-||`.
    pub chain_rhs: f64,
    /// `N = 0` in the subcritical branch, `N <= M` otherwise.
    pub count_bound_holds: bool,
    /// `M <= chain_rhs (1 + rtol)`; true in the subcritical branch.
    pub chain_holds: bool,
    /// Coverage, colouring and multiplicity re-derived from scratch.
    pub covering_certified: bool,
    /// Cube norms are taken with budget `|Q_m cap Omega|`, the measure of
    /// the set each norm is restricted to.
    pub budget_sets: &'static str,
    /// Cell layers next to the boundary on which admissible test functions
    /// vanish.
    pub boundary_layers: usize,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.count_bound_holds && self.chain_holds && self.covering_certified
    }
}

/// Calibrated covering for `V_-` at the admissible level.
pub fn certificate_covering(mask: &DomainMask, v: &MeasuredField, constants: &CertificateConstants, rtol: f64) -> Result<Covering> {
    build_calibrated_covering(&v.negative_part(), mask, constants.level(), rtol)
}

/// Computes `N(-Laplacian + V)` and checks it against the bound the
/// covering argument gives. Builds the covering when none is passed and
/// the potential is above the subcritical threshold.
pub fn certificate_verify(
    mask: &DomainMask,
    v: &MeasuredField,
    covering: Option<&Covering>,
    constants: &CertificateConstants,
    rtol: f64,
) -> Result<CertificateReport> {
    let r = count_negative(&schrodinger(mask, v)?, 0.0)?;
    let w = v.negative_part();
    let norm_b = orlicz_norm(&w)?.norm;
    let chain_rhs = constants.count_factor() * norm_b;
    let mut report = CertificateReport {
        branch: Branch::Subcritical,
        n: r.n_negative,
        n_zero: r.n_zero,
        norm_b,
        constants: *constants,
        level: None,
        rtol: None,
        m: None,
        multiplicity: None,
        chain_rhs,
        count_bound_holds: r.n_negative == 0,
        chain_holds: true,
        covering_certified: true,
        budget_sets: "Q_m cap Omega",
        boundary_layers: 1,
    };
    if norm_b <= constants.s2 {
        return Ok(report);
    }
    let built;
    let covering = match covering {
        Some(c) => c,
        None => {
            built = certificate_covering(mask, v, constants, rtol)?;
            &built
        }
    };
    let cal = covering
        .calibration
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the covering carries no calibration level".into()))?;
    let max = constants.level();
    if cal.level > max * (1.0 + 1e-12) {
        return Err(Error::LevelTooLarge { level: cal.level, max });
    }
    let m = covering.len();
    let cert = covering.certify(&cell_points(mask));
    report.branch = Branch::Covering;
    report.level = Some(cal.level);
    report.rtol = Some(cal.rtol);
    report.m = Some(m);
    report.multiplicity = Some(cert.max_depth);
    report.count_bound_holds = r.n_negative <= m;
    report.chain_holds = m as f64 <= color_bound(2) as f64 * norm_b / cal.level * (1.0 + cal.rtol);
    report.covering_certified = cert.ok();
    Ok(report)
}
