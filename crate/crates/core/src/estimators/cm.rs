use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::aggregate::{histogram, Histogram};
use super::tails::power_tail;
use super::{AlphaPoint, EstimatorKind, Fit, Normalization, TraceEstimate};
use crate::error::{Error, Result};
use crate::group::{CutoffMode, DualSlice, GroupDescriptor};
use crate::summation::KahanSum;
use crate::symbols::{MatrixSymbol, PowerLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    HardCutoff,
    #[default]
    PowerTail,
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMode::HardCutoff => "hard_cutoff",
            TailMode::PowerTail => "power_tail",
        })
    }
}

impl FromStr for TailMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hard_cutoff" | "hard" => Ok(TailMode::HardCutoff),
            "power_tail" | "power" => Ok(TailMode::PowerTail),
            other => Err(Error::Config(format!("unknown tail mode '{other}'"))),
        }
    }
}

/// Eigenvalues of the positive invariant operator over the slice, with
/// multiplicity `d` per block eigenvalue.
pub fn cm_histogram(sigma: &MatrixSymbol, group: &GroupDescriptor, cutoff: f64, mode: CutoffMode) -> Result<Histogram> {
    if !sigma.is_invariant() {
        return Err(Error::Contract("Connes–Moscovici trace needs an invariant symbol".into()));
    }
    let slice = DualSlice::new(group, cutoff, mode)?;
    histogram(&slice, 0.0, |e| {
        let d = e.d as u64;
        Ok(sigma
            .eval(group, None, e)?
            .psd_eigenvalues()?
            .into_iter()
            .map(|(v, m)| (v, m * d))
            .collect())
    })
}

fn resolve_law(sigma: &MatrixSymbol, tail: TailMode) -> Result<Option<PowerLaw>> {
    match tail {
        TailMode::HardCutoff => Ok(None),
        TailMode::PowerTail => sigma.power_law().map(Some).ok_or_else(|| {
            Error::Unsupported(format!("power_tail needs a builtin power-law symbol, got {sigma}"))
        }),
    }
}

/// `(p-1)·(Σ d Tr σ^p + tail)` from a precomputed histogram.
pub fn cm_trace_from(hist: &Histogram, law: Option<&PowerLaw>, group: &GroupDescriptor, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("Connes–Moscovici trace needs p > 1, got {p}")));
    }
    let mut acc = KahanSum::new();
    for &(v, m) in hist.entries.iter().rev() {
        acc.add(m as f64 * v.powf(p));
    }
    if let Some(law) = law {
        acc.add(power_tail(law, group, &hist.extent, p)?);
    }
    Ok((p - 1.0) * acc.value())
}

pub fn cm_trace(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    p: f64,
    tail: TailMode,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("Connes–Moscovici trace needs p > 1, got {p}")));
    }
    let law = resolve_law(sigma, tail)?;
    let hist = cm_histogram(sigma, group, cutoff, mode)?;
    cm_trace_from(&hist, law.as_ref(), group, p)
}

/// Evaluate at `p_k = 1 + 2^{-k}`, `k = 1..=levels`, and extrapolate linearly
/// in `p - 1` from the last two levels.
pub fn cm_limit_from(hist: &Histogram, law: Option<&PowerLaw>, group: &GroupDescriptor, levels: usize) -> Result<TraceEstimate> {
    if levels < 3 {
        return Err(Error::Config(format!("p-schedule needs at least 3 levels, got {levels}")));
    }
    let mut seq = Vec::with_capacity(levels);
    for k in 1..=levels {
        let p = 1.0 + 2f64.powi(-(k as i32));
        seq.push(AlphaPoint {
            n: p,
            alpha: Complex64::new(cm_trace_from(hist, law, group, p)?, 0.0),
        });
    }
    let f = |i: usize| seq[i].alpha;
    let rich = |i: usize| f(i) * 2.0 - f(i - 1);
    let last = levels - 1;
    let c = rich(last);
    let fit = Fit {
        c,
        b: (f(last) - f(last - 1)) / (seq[last].n - seq[last - 1].n),
        residual: (c - rich(last - 1)).norm(),
    };
    Ok(TraceEstimate {
        value: c,
        alpha_sequence: seq,
        fit,
        estimator: EstimatorKind::E2,
        normalization: Normalization::Index,
    })
}

pub fn cm_limit(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    levels: usize,
    tail: TailMode,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<TraceEstimate> {
    let law = resolve_law(sigma, tail)?;
    let hist = cm_histogram(sigma, group, cutoff, mode)?;
    cm_limit_from(&hist, law.as_ref(), group, levels)
}
