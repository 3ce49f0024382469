//! Fredholm determinants of invariant block operators and their Dixmier
//! regularisations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimators::aggregate::Histogram;
use crate::estimators::tails::power_tail;
use crate::estimators::{cm_histogram, TraceEstimate};
use crate::group::{CutoffMode, DualSlice, GroupDescriptor, GroupKind};
use crate::summation::ComplexKahanSum;
use crate::symbols::{calculus, CMatrix, MatrixSymbol, PowerLaw, PowerLawKind};

/// How block multiplicities were assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Fourier multiplier blocks: `σ(ξ)` acts `d_ξ` times.
    Group,
    /// Orthogonal decomposition `H = ⊕ H_j`: each block once.
    Abstract,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<(CMatrix, u64)>,
    convention: Convention,
}

impl BlockOperator {
    pub fn new(blocks: Vec<(CMatrix, u64)>, convention: Convention) -> Result<Self> {
        for (m, mult) in &blocks {
            if m.nrows() != m.ncols() {
                return Err(Error::Config(format!("block is {}x{}, not square", m.nrows(), m.ncols())));
            }
            if *mult == 0 {
                return Err(Error::Config("block multiplicity must be positive".into()));
            }
            if convention == Convention::Abstract && *mult != 1 {
                return Err(Error::Config(format!(
                    "abstract convention uses multiplicity 1, got {mult}"
                )));
            }
        }
        Ok(Self { blocks, convention })
    }

    /// Blocks of an invariant symbol over a dual slice, multiplicity `d_ξ`.
    pub fn from_symbol(sigma: &MatrixSymbol, group: &GroupDescriptor, cutoff: f64, mode: CutoffMode) -> Result<Self> {
        if !sigma.is_invariant() {
            return Err(Error::Contract("block operators need an invariant symbol".into()));
        }
        let slice = DualSlice::new(group, cutoff, mode)?;
        let mut blocks = Vec::new();
        for i in 0..slice.chunk_count() {
            for e in slice.chunk_elements(i) {
                blocks.push((sigma.eval(group, None, &e)?.to_dense(), e.d as u64));
            }
        }
        Self::new(blocks, Convention::Group)
    }

    pub fn blocks(&self) -> &[(CMatrix, u64)] {
        &self.blocks
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Blocks of both operators; conventions must match.
    pub fn disjoint_union(&self, other: &BlockOperator) -> Result<BlockOperator> {
        if self.convention != other.convention {
            return Err(Error::Contract("cannot join block operators with different conventions".into()));
        }
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        Ok(BlockOperator { blocks, convention: self.convention })
    }

    /// `Σ mult · Tr|σ(ℓ)|`, the trace-class certificate.
    pub fn trace_norm(&self) -> Result<f64> {
        let mut total = 0.0;
        for (m, mult) in &self.blocks {
            total += *mult as f64 * calculus::singular_values(m)?.iter().sum::<f64>();
        }
        Ok(total)
    }

    /// Largest block operator norm, an upper bound for the spectral radius.
    pub fn radius_bound(&self) -> Result<f64> {
        let mut r: f64 = 0.0;
        for (m, _) in &self.blocks {
            if let Some(s) = calculus::singular_values(m)?.first() {
                r = r.max(*s);
            }
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetMethod {
    Series(usize),
    Product,
}

impl fmt::Display for DetMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetMethod::Series(m) => write!(f, "series:{m}"),
            DetMethod::Product => f.write_str("product"),
        }
    }
}

impl FromStr for DetMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "product" {
            return Ok(DetMethod::Product);
        }
        if let Some(m) = s.strip_prefix("series:") {
            return m
                .parse()
                .map(DetMethod::Series)
                .map_err(|_| Error::Config(format!("invalid series length '{m}'")));
        }
        Err(Error::Config(format!("determinant method must be 'series:M' or 'product', got '{s}'")))
    }
}

/// Largest `|λ|·r` accepted by the series method.
pub const SERIES_RADIUS: f64 = 0.9;

/// `det(I + λT)` by the Plemelj–Smithies series or the block product.
pub fn det_fredholm(t: &BlockOperator, lambda: Complex64, method: DetMethod) -> Result<Complex64> {
    let norm = t.trace_norm()?;
    if !norm.is_finite() {
        return Err(Error::Contract(format!("operator has no trace-class certificate (trace norm {norm})")));
    }
    match method {
        DetMethod::Product => {
            let mut det = Complex64::new(1.0, 0.0);
            for (m, mult) in &t.blocks {
                let d = m.nrows();
                let block = CMatrix::identity(d, d) + m * lambda;
                det *= block.determinant().powu(*mult as u32);
            }
            Ok(det)
        }
        DetMethod::Series(terms) => {
            if terms == 0 {
                return Err(Error::Config("series needs at least one term".into()));
            }
            let r = t.radius_bound()?;
            if lambda.norm() * r > SERIES_RADIUS {
                return Err(Error::Domain(format!(
                    "|λ|·r = {:.4} exceeds the series radius {SERIES_RADIUS}",
                    lambda.norm() * r
                )));
            }
            // traces of powers: Σ mult Tr(σ^m), m = 1..terms
            let mut traces = vec![ComplexKahanSum::new(); terms];
            for (m, mult) in &t.blocks {
                let mut power = m.clone();
                for tr in traces.iter_mut() {
                    tr.add(power.trace() * *mult as f64);
                    power = &power * m;
                }
            }
            let mut log = ComplexKahanSum::new();
            let mut lam_m = Complex64::new(1.0, 0.0);
            for (k, tr) in traces.iter().enumerate() {
                let m = (k + 1) as f64;
                lam_m *= lambda;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                log.add(lam_m * tr.value() * (sign / m));
            }
            Ok(log.value().exp())
        }
    }
}

/// `det_fredholm` for the abstract convention.
pub fn manifold_invariant_det(t: &BlockOperator, lambda: Complex64, method: DetMethod) -> Result<Complex64> {
    if t.convention != Convention::Abstract {
        return Err(Error::Contract("manifold_invariant_det needs the abstract convention".into()));
    }
    det_fredholm(t, lambda, method)
}

/// Power law of `σ` after checking it sits exactly at order `-Q`.
fn order_certificate(sigma: &MatrixSymbol, group: &GroupDescriptor) -> Result<PowerLaw> {
    let law = sigma.power_law().ok_or_else(|| {
        Error::Unsupported(format!(
            "regularised determinants need a builtin power-law symbol (order certificate), got {sigma}"
        ))
    })?;
    let critical = match (&law.kind, &group.kind) {
        (PowerLawKind::SubBessel, GroupKind::Su2 { sub: true }) => group.hausdorff_dim as f64,
        (_, GroupKind::Torus(n)) => *n as f64,
        (_, GroupKind::Su2 { .. }) => 3.0,
        _ => return Err(Error::Unsupported(format!("no order certificate on {group}"))),
    };
    if (law.s + critical).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "symbol has order {} but the certificate needs order -{critical}",
            law.s
        )));
    }
    Ok(law)
}

/// `log det(I + λσ^p)` over the slice histogram plus the analytic tail.
fn log_det_p(hist: &Histogram, law: &PowerLaw, group: &GroupDescriptor, p: f64, lambda: Complex64) -> Result<Complex64> {
    let top = hist.entries.first().map_or(0.0, |e| e.0);
    if lambda.norm() * top.powf(p) >= 1.0 {
        return Err(Error::Domain(format!(
            "|λ| = {} is outside the series disc of σ^p (sup {})",
            lambda.norm(),
            top.powf(p)
        )));
    }
    let mut acc = ComplexKahanSum::new();
    for &(v, m) in hist.entries.iter().rev() {
        acc.add((Complex64::new(1.0, 0.0) + lambda * v.powf(p)).ln() * m as f64);
    }
    // log(1 + λt) = Σ (-1)^{m+1} λ^m t^m / m over the tail values
    let mut lam_m = Complex64::new(1.0, 0.0);
    for m in 1..=40 {
        lam_m *= lambda;
        let tail = power_tail(law, group, &hist.extent, p * m as f64)?;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = lam_m * tail * (sign / m as f64);
        acc.add(term);
        if term.norm() < 1e-18 * acc.value().norm().max(1e-300) {
            break;
        }
    }
    let log = acc.value();
    if log.im.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "det(I + λσ^p) leaves the half-plane Re > 0 (arg {:.4})",
            log.im
        )));
    }
    Ok(log)
}

/// `(det(I + λσ^p))^{p-1}` over the full dual (slice plus analytic tail).
pub fn det_p_omega(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    p: f64,
    lambda: Complex64,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<Complex64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("det_p_omega needs p in (1, 2], got {p}")));
    }
    let law = order_certificate(sigma, group)?;
    let hist = cm_histogram(sigma, group, cutoff, mode)?;
    Ok((log_det_p(&hist, &law, group, p, lambda)? * (p - 1.0)).exp())
}

/// `(p-1)·log det(I + λσ^p)`.
pub fn log_det_p_omega(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    p: f64,
    lambda: Complex64,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<Complex64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("det_p_omega needs p in (1, 2], got {p}")));
    }
    let law = order_certificate(sigma, group)?;
    let hist = cm_histogram(sigma, group, cutoff, mode)?;
    Ok(log_det_p(&hist, &law, group, p, lambda)? * (p - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetLimit {
    pub value: Complex64,
    /// `(p_k, det^{p_k - 1})`.
    pub sequence: Vec<(f64, Complex64)>,
    /// Difference between the last two extrapolants.
    pub residual: f64,
}

/// `(det(I + λσ^{p_k}))^{p_k - 1}` at `p_k = 1 + 2^{-k}`, extrapolated to `p = 1`.
pub fn det_p_omega_limit(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    lambda: Complex64,
    levels: usize,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<DetLimit> {
    if levels < 3 {
        return Err(Error::Config(format!("p-schedule needs at least 3 levels, got {levels}")));
    }
    let law = order_certificate(sigma, group)?;
    let hist = cm_histogram(sigma, group, cutoff, mode)?;
    let mut sequence = Vec::with_capacity(levels);
    for k in 1..=levels {
        let p = 1.0 + 2f64.powi(-(k as i32));
        sequence.push((p, (log_det_p(&hist, &law, group, p, lambda)? * (p - 1.0)).exp()));
    }
    let rich = |i: usize| sequence[i].1 * 2.0 - sequence[i - 1].1;
    let value = rich(levels - 1);
    Ok(DetLimit {
        value,
        residual: (value - rich(levels - 2)).norm(),
        sequence,
    })
}

/// Default relative residual above which a trace estimate counts as unconverged.
pub const DEFAULT_MAX_RESIDUAL: f64 = 1e-2;

fn converged_trace(trace: &TraceEstimate, max_residual: f64) -> Result<Complex64> {
    let scale = trace.value.norm().max(1.0);
    if !(trace.fit.residual <= max_residual * scale) {
        return Err(Error::Numeric(format!(
            "trace estimate not converged: residual {:.3e} > {:.1e} (value {}, {} {})",
            trace.fit.residual, max_residual, trace.value, trace.estimator, trace.normalization
        )));
    }
    Ok(trace.value)
}

/// `Tr_ω(A)·λ`, the logarithm of `Det_ω`.
pub fn det_omega_log(trace: &TraceEstimate, lambda: Complex64, max_residual: f64) -> Result<Complex64> {
    Ok(converged_trace(trace, max_residual)? * lambda)
}

/// `exp(Tr_ω(A)·λ)`.
pub fn det_omega(trace: &TraceEstimate, lambda: Complex64, max_residual: f64) -> Result<Complex64> {
    Ok(det_omega_log(trace, lambda, max_residual)?.exp())
}

/// `exp(Tr_ω(A))`.
pub fn det_omega_one_plus(trace: &TraceEstimate, max_residual: f64) -> Result<Complex64> {
    det_omega(trace, Complex64::new(1.0, 0.0), max_residual)
}
