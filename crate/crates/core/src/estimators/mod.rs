//! Dixmier trace estimators.
//!
//! * E1: sorted singular-value partial sums over `log N` ([`singular_spectrum`], [`alpha_sequence`]).
//! * E2: the Connes–Moscovici limit `(p-1) Tr(A^p)` as `p -> 1` ([`cm_trace`], [`cm_limit`]).
//! * E3: partial sums of `d Tr|σ(ξ)|` by weight cutoff ([`symbol_l1inf_norm`],
//!   [`variable_trace`], [`general_trace`]).

pub mod aggregate;
mod cm;
mod norm;
mod spectrum;
pub mod tails;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use cm::{cm_histogram, cm_limit, cm_limit_from, cm_trace, cm_trace_from, TailMode};
pub use norm::{general_trace, symbol_l1inf_norm, variable_trace, NormOptions};
pub use spectrum::{alpha_sequence, singular_spectrum, SingularSpectrum, SpectrumProvenance};

/// Default number of trailing checkpoints in the `c + b/log N` fit.
pub const DEFAULT_FIT_POINTS: usize = 4;

/// Relative growth of `|α|` between the last two checkpoints that marks divergence.
pub const GROWTH_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    E1,
    E2,
    E3,
    Residue,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::E1 => "e1",
            EstimatorKind::E2 => "e2",
            EstimatorKind::E3 => "e3",
            EstimatorKind::Residue => "residue",
        })
    }
}

/// Whether partial sums are divided by `log(index count)` or `log(weight cutoff)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Normalization {
    #[default]
    Index,
    Weight,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Index => "index",
            Normalization::Weight => "weight",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "index" => Ok(Normalization::Index),
            "weight" => Ok(Normalization::Weight),
            other => Err(Error::Config(format!("normalization must be 'index' or 'weight', got '{other}'"))),
        }
    }
}

/// One point of a convergence sequence. For E1/E3 `n` is the checkpoint
/// (index count or weight cutoff); for E2 it is the exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPoint {
    pub n: f64,
    pub alpha: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub c: Complex64,
    pub b: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    pub value: Complex64,
    pub alpha_sequence: Vec<AlphaPoint>,
    pub fit: Fit,
    pub estimator: EstimatorKind,
    pub normalization: Normalization,
}

impl TraceEstimate {
    /// Scale every number by `c` (used for exact homogeneity checks).
    pub fn scaled(&self, c: f64) -> TraceEstimate {
        let mut out = self.clone();
        out.value *= c;
        out.fit.c *= c;
        out.fit.b *= c;
        out.fit.residual *= c.abs();
        for p in &mut out.alpha_sequence {
            p.alpha *= c;
        }
        out
    }
}

/// Checkpoint schedule for E1 (index counts) and E3 (weight cutoffs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `N₀·2^j` for `j = 0..count`.
    Geometric { start: f64, count: usize },
    /// `top/2^(count-1-j)` where `top` is the largest available checkpoint;
    /// checkpoints that would fall below 2 are dropped.
    Auto { count: usize },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Auto { count: 8 }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// `N0,k` or `auto` / `auto:k`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(Schedule::default());
        }
        if let Some(k) = s.strip_prefix("auto:") {
            let count = k
                .parse()
                .map_err(|_| Error::Config(format!("invalid checkpoint count '{k}'")))?;
            return Ok(Schedule::Auto { count });
        }
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("cutoff schedule must be 'N0,k' or 'auto', got '{s}'")))?;
        let start: f64 = a
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid N0 '{a}'")))?;
        let count: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid checkpoint count '{b}'")))?;
        Ok(Schedule::Geometric { start, count })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Geometric { start, count } => write!(f, "{start},{count}"),
            Schedule::Auto { count } => write!(f, "auto:{count}"),
        }
    }
}

impl Schedule {
    /// Checkpoints as reals, all `<= top`.
    pub fn checkpoints(&self, top: f64) -> Result<Vec<f64>> {
        let pts: Vec<f64> = match *self {
            Schedule::Geometric { start, count } => {
                if !(start > 0.0) || count == 0 {
                    return Err(Error::Config(format!("invalid geometric schedule {self}")));
                }
                (0..count).map(|j| start * 2f64.powi(j as i32)).collect()
            }
            Schedule::Auto { count } => {
                if count == 0 {
                    return Err(Error::Config("auto schedule needs at least one checkpoint".into()));
                }
                let fit = (top / 2.0).log2().floor().max(0.0) as usize + 1;
                let count = count.min(fit);
                (0..count).map(|j| top / 2f64.powi((count - 1 - j) as i32)).collect()
            }
        };
        if let Some(&last) = pts.last() {
            if last > top * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "checkpoint {last} exceeds the available range {top}"
                )));
            }
        }
        Ok(pts)
    }

    /// Integer index-count checkpoints, all `<= top`.
    pub fn index_checkpoints(&self, top: u64) -> Result<Vec<u64>> {
        Ok(self
            .checkpoints(top as f64)?
            .into_iter()
            .map(|v| (v.floor() as u64).min(top))
            .collect())
    }
}

/// Least-squares fit of `α_N = c + b/log N` over the last `k` points.
pub fn fit_alpha(points: &[AlphaPoint], k: usize) -> Result<Fit> {
    if k < 2 || points.len() < 2 {
        return Err(Error::Config(format!(
            "fit needs at least 2 points, got {} (window {k})",
            points.len()
        )));
    }
    let tail = &points[points.len().saturating_sub(k)..];
    let xs: Vec<f64> = tail.iter().map(|p| 1.0 / p.n.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = tail.iter().map(|p| p.alpha).sum::<Complex64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: Complex64 = xs.iter().zip(tail).map(|(x, p)| (p.alpha - ybar) * (x - xbar)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numeric("fit checkpoints are not distinct".into()));
    }
    let b = sxy / sxx;
    let c = ybar - b * xbar;
    let ss: f64 = xs
        .iter()
        .zip(tail)
        .map(|(x, p)| (p.alpha - c - b * x).norm_sqr())
        .sum();
    Ok(Fit {
        c,
        b,
        residual: (ss / m).sqrt(),
    })
}

/// Error when `|α|` still grows by more than [`GROWTH_TOLERANCE`] at the end.
pub fn check_growth(points: &[AlphaPoint], what: &str) -> Result<()> {
    if let [.., a, b] = points {
        let (pa, pb) = (a.alpha.norm(), b.alpha.norm());
        if pb > pa * (1.0 + GROWTH_TOLERANCE) && pb - pa > 1e-300 {
            return Err(Error::NotDixmierClass(format!(
                "{what}: |alpha| grows from {pa:.6e} at N={} to {pb:.6e} at N={}",
                a.n, b.n
            )));
        }
    }
    Ok(())
}

/// Extrapolate an α-sequence to `N -> ∞`.
pub fn dixmier_limit(
    points: Vec<AlphaPoint>,
    fit_points: usize,
    estimator: EstimatorKind,
    normalization: Normalization,
) -> Result<TraceEstimate> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "Dixmier limit needs at least 3 checkpoints, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| !(w[1].n > w[0].n)) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    check_growth(&points, "alpha sequence")?;
    let fit = fit_alpha(&points, fit_points.min(points.len()))?;
    Ok(TraceEstimate {
        value: fit.c,
        alpha_sequence: points,
        fit,
        estimator,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(f: impl Fn(f64) -> f64, ns: &[f64]) -> Vec<AlphaPoint> {
        ns.iter()
            .map(|&n| AlphaPoint { n, alpha: Complex64::new(f(n), 0.0) })
            .collect()
    }

    #[test]
    fn exact_model_recovery() {
        let ns: Vec<f64> = (3..=6).map(|e| 10f64.powi(e)).collect();
        let est = dixmier_limit(seq(|n| 2.0 + 3.0 / n.ln(), &ns), 4, EstimatorKind::E1, Normalization::Index).unwrap();
        assert!((est.value.re - 2.0).abs() < 1e-10);
        assert!((est.fit.b.re - 3.0).abs() < 1e-9);
        assert!(est.fit.residual < 1e-12);
        assert_eq!(est.value, est.fit.c);
    }

    #[test]
    fn growth_is_rejected() {
        let ns = [1e3, 2e3, 4e3, 8e3];
        let err = dixmier_limit(seq(|n| n.sqrt() / n.ln(), &ns), 4, EstimatorKind::E1, Normalization::Index).unwrap_err();
        assert!(matches!(err, Error::NotDixmierClass(_)));
    }

    #[test]
    fn too_few_checkpoints() {
        let err = dixmier_limit(seq(|_| 1.0, &[10.0, 20.0]), 4, EstimatorKind::E1, Normalization::Index).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn schedules() {
        let s: Schedule = "1000,4".parse().unwrap();
        assert_eq!(s.index_checkpoints(10_000).unwrap(), vec![1000, 2000, 4000, 8000]);
        assert!(s.index_checkpoints(5000).is_err());
        let a: Schedule = "auto:3".parse().unwrap();
        assert_eq!(a.index_checkpoints(1000).unwrap(), vec![250, 500, 1000]);
        assert!("12".parse::<Schedule>().is_err());
        assert_eq!(Schedule::Auto { count: 8 }.checkpoints(20.0).unwrap(), vec![2.5, 5.0, 10.0, 20.0]);
    }
}
