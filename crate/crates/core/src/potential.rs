//! Potential presets and the log-singular norm frontier.

use std::f64::consts::{E, PI};
use std::path::Path;

use serde::Serialize;

use crate::domain::DomainMask;
use crate::error::{ensure_finite, Error, Result};
use crate::orlicz::{orlicz_norm, MeasuredField};

/// A potential given by name and parameters, or by a CSV file of grid
/// values.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V = -depth`.
    ConstantWell { depth: f64 },
    /// `V = -depth exp(-|x - c|^2 / width^2)` with `c` the centre of the grid.
    GaussianWell { depth: f64, width: f64 },
    /// `V = -depth` on alternate squares of a 4x4 checkerboard, 0 elsewhere.
    Checker { depth: f64 },
    /// `V = -r^-2 (ln 1/r)^-2 (ln ln 1/r)^(-1/q)` for `cutoff <= r < e^-e`,
    /// `r` the distance to the grid centre, 0 elsewhere.
    LogSingular { q: f64, cutoff: f64 },
    /// Grid values, one CSV row per grid row.
    File(String),
}

fn params(name: &str, rest: &str, count: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = rest
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("{name} takes {count} numeric parameter(s), got '{rest}'")))?;
    if vals.len() != count {
        return Err(Error::InvalidArgument(format!("{name} takes {count} parameter(s), got {}", vals.len())));
    }
    for &v in &vals {
        ensure_finite(v, name)?;
    }
    Ok(vals)
}

impl PotentialSpec {
    /// Parses `name:p1,p2` for the presets; anything else is taken as a
    /// path to a CSV file.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let out = match name {
            "constant-well" => Self::ConstantWell { depth: params(name, rest, 1)?[0] },
            "gaussian-well" => {
                let p = params(name, rest, 2)?;
                if p[1] <= 0.0 {
                    return Err(Error::InvalidArgument("gaussian-well width must be positive".into()));
                }
                Self::GaussianWell { depth: p[0], width: p[1] }
            }
            "checker" => Self::Checker { depth: params(name, rest, 1)?[0] },
            "log-singular" => {
                let p = params(name, rest, 2)?;
                if p[0] <= 0.0 || !(p[1] > 0.0 && p[1] < (-E).exp()) {
                    return Err(Error::InvalidArgument(format!(
                        "log-singular needs q > 0 and 0 < cutoff < e^-e, got {}, {}",
                        p[0], p[1]
                    )));
                }
                Self::LogSingular { q: p[0], cutoff: p[1] }
            }
            _ if rest.is_empty() && Path::new(spec).extension().is_some_and(|e| e == "csv") => Self::File(spec.to_string()),
            _ => return Err(Error::InvalidArgument(format!("unknown potential '{spec}'"))),
        };
        Ok(out)
    }

    /// Samples the potential at the cell centres of `mask`. Returns the
    /// field and notes about truncation.
    pub fn sample(&self, mask: &DomainMask) -> Result<(MeasuredField, Vec<String>)> {
        let grid = *mask.grid();
        let c = [grid.origin[0] + 0.5 * grid.side(), grid.origin[1] + 0.5 * grid.side()];
        let mut notes = Vec::new();
        let field = match *self {
            Self::ConstantWell { depth } => MeasuredField::sample(mask, |_, _| -depth)?,
            Self::GaussianWell { depth, width } => MeasuredField::sample(mask, |x, y| {
                -depth * (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (width * width)).exp()
            })?,
            Self::Checker { depth } => MeasuredField::sample(mask, |x, y| {
                let bx = ((x - grid.origin[0]) / grid.side() * 4.0).floor() as i64;
                let by = ((y - grid.origin[1]) / grid.side() * 4.0).floor() as i64;
                if (bx + by) % 2 == 0 {
                    -depth
                } else {
                    0.0
                }
            })?,
            Self::LogSingular { q, cutoff } => {
                let field =
                    MeasuredField::sample(mask, |x, y| log_singular(q, cutoff, ((x - c[0]).powi(2) + (y - c[1]).powi(2)).sqrt()))?;
                let truncated = mask
                    .cells()
                    .iter()
                    .filter(|&&cell| {
                        let p = grid.center(cell);
                        ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() < cutoff
                    })
                    .count();
                notes.push(format!(
                    "log-singular potential truncated to 0 for r < {cutoff:e} ({truncated} cell(s)) and for r >= e^-e"
                ));
                field
            }
            Self::File(ref path) => {
                let text = std::fs::read_to_string(path)?;
                let grid_values = parse_grid_csv(&text, grid.n, path)?;
                let values = mask.cells().iter().map(|&c| grid_values[c]).collect();
                MeasuredField::on_mask(mask, values)?
            }
        };
        Ok((field, notes))
    }
}

/// `-r^-2 (ln 1/r)^-2 (ln ln 1/r)^(-1/q)` on `cutoff <= r < e^-e`, else 0.
pub fn log_singular(q: f64, cutoff: f64, r: f64) -> f64 {
    if r < cutoff || r >= (-E).exp() {
        return 0.0;
    }
    let t = (1.0 / r).ln();
    -(r * r).recip() / (t * t) * t.ln().powf(-1.0 / q)
}

/// Reads an `n x n` grid of values, one CSV row per grid row.
pub fn parse_grid_csv(text: &str, n: usize, source_name: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::with_capacity(n * n);
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |msg: String| Error::Parse { source_name: source_name.to_string(), line, msg };
        if record.len() != n {
            return Err(parse_err(format!("expected {n} values, found {}", record.len())));
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| parse_err(format!("'{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value '{field}'")));
            }
            out.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { source_name: source_name.to_string(), line: rows, msg: format!("expected {n} rows, found {rows}") });
    }
    Ok(out)
}

/// Cutoffs `10^-2, 10^-4, ..., 10^-32`; each refinement adds `ln 2` to
/// `ln ln 1/cutoff`.
pub const FRONTIER_CUTOFFS: [f64; 5] = [1e-2, 1e-4, 1e-8, 1e-16, 1e-32];

/// Radial profile of the log-singular potential centred in a domain of
/// measure `domain_measure` containing the disk of radius `e^-e`, resolved
/// in `t = ln 1/r` by thin annuli of width `dt` plus one cell for
/// the rest of the domain, where the potential vanishes.
pub fn radial_shell_field(q: f64, cutoff: f64, domain_measure: f64, dt: f64) -> Result<MeasuredField> {
    let t0 = E;
    let t1 = (1.0 / cutoff).ln();
    let disk = PI * (-2.0 * t0).exp();
    if !(t1 > t0) || !(domain_measure > disk) || !(dt > 0.0) || !(q > 0.0) {
        return Err(Error::InvalidArgument("need 0 < cutoff < e^-e, q > 0, dt > 0 and a domain holding the disk".into()));
    }
    let shells = ((t1 - t0) / dt).ceil() as usize;
    let step = (t1 - t0) / shells as f64;
    let mut values = Vec::with_capacity(shells + 1);
    let mut measures = Vec::with_capacity(shells + 1);
    for i in 0..shells {
        let (ta, tb) = (t0 + i as f64 * step, t0 + (i + 1) as f64 * step);
        let tm = 0.5 * (ta + tb);
        values.push((2.0 * tm).exp() / (tm * tm) * tm.ln().powf(-1.0 / q));
        // pi (r_a^2 - r_b^2) with r = e^-t
        measures.push(PI * (-2.0 * ta).exp() * -(-2.0 * (tb - ta)).exp_m1());
    }
    values.push(0.0);
    measures.push(domain_measure - disk);
    MeasuredField::new(values, measures)
}

/// Norm of the log-singular potential against the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierReport {
    pub q: f64,
    pub cutoffs: Vec<f64>,
    pub norms: Vec<f64>,
    /// Norm increments between consecutive cutoffs.
    pub increments: Vec<f64>,
    /// `p` in the fit `increment ~ s^-p`, `s = ln ln 1/cutoff`.
    pub decay_exponent: f64,
    pub monotone: bool,
    /// Increments summable (`p > 1`): the norm stays bounded as the cutoff
    /// goes to 0.
    pub bounded: bool,
    /// Extrapolated limit of the norm when `bounded`.
    pub limit_estimate: Option<f64>,
}

/// Sweeps the cutoffs for the log-singular potential in a unit-measure
/// domain and classifies the growth of the norm.
pub fn norm_frontier(q: f64, cutoffs: &[f64]) -> Result<FrontierReport> {
    if cutoffs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three cutoffs".into()));
    }
    let norms: Vec<f64> = crate::par::map(cutoffs, |&c| radial_shell_field(q, c, 1.0, 0.005).and_then(|f| orlicz_norm(&f)).map(|r| r.norm))
        .into_iter()
        .collect::<Result<_>>()?;
    let increments: Vec<f64> = norms.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = increments.iter().all(|&d| d > 0.0);
    let s: Vec<f64> = cutoffs[1..].iter().map(|c| (1.0 / c).ln().ln().ln()).collect();
    let y: Vec<f64> = increments.iter().map(|d| d.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let m = s.len() as f64;
    let (sx, sy) = (s.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let cov: f64 = s.iter().zip(&y).map(|(a, b)| (a - sx) * (b - sy)).sum();
    let var: f64 = s.iter().map(|a| (a - sx).powi(2)).sum();
    let decay_exponent = -cov / var;
    let bounded = monotone && decay_exponent > 1.0;
    let limit_estimate = bounded.then(|| {
        // increments c s^-p per ln 2 of s: tail ~ c s^(1-p) / ((p - 1) ln 2)
        let p = decay_exponent;
        let s_last = (1.0 / cutoffs[cutoffs.len() - 1]).ln().ln();
        let c = increments[increments.len() - 1] * s_last.powf(p);
        norms[norms.len() - 1] + c * s_last.powf(1.0 - p) / ((p - 1.0) * 2f64.ln())
    });
    Ok(FrontierReport { q, cutoffs: cutoffs.to_vec(), norms, increments, decay_exponent, monotone, bounded, limit_estimate })
}
