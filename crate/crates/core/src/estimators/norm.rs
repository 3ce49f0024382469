use num_complex::Complex64;

use super::aggregate::{weight_profile, WeightProfile};
use super::{check_growth, dixmier_limit, AlphaPoint, EstimatorKind, Normalization, Schedule, TraceEstimate, DEFAULT_FIT_POINTS};
use crate::error::{Error, Result};
use crate::group::{CutoffMode, DualSlice, GroupDescriptor};
use crate::quadrature::HaarGrid;
use crate::summation::KahanSum;
use crate::symbols::MatrixSymbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    /// Weight-cutoff checkpoints.
    pub schedule: Schedule,
    pub normalization: Normalization,
    pub fit_points: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::Auto { count: 6 },
            normalization: Normalization::Index,
            fit_points: DEFAULT_FIT_POINTS,
        }
    }
}

/// `α` per channel at each weight checkpoint.
fn channel_alphas<const K: usize>(
    profile: &WeightProfile<K>,
    checkpoints: &[f64],
    normalization: Normalization,
) -> Result<Vec<[f64; K]>> {
    checkpoints
        .iter()
        .map(|&n| {
            let (sums, slots) = match profile.position(n) {
                Some(i) => (profile.cum_sums[i], profile.cum_slots[i]),
                None => ([0.0; K], 0),
            };
            let denom = match normalization {
                Normalization::Weight => n.ln(),
                Normalization::Index => (slots as f64).ln(),
            };
            if !(denom > 0.0) {
                return Err(Error::Config(format!(
                    "checkpoint at weight {n} has a non-positive log normaliser ({normalization} mode, {slots} values)"
                )));
            }
            let mut out = [0.0; K];
            for c in 0..K {
                out[c] = sums[c] / denom;
            }
            Ok(out)
        })
        .collect()
}

type WeightedPoint<'a> = (Option<&'a [f64]>, f64);

fn grid_points<'a>(sigma: &MatrixSymbol, group: &GroupDescriptor, grid: &'a HaarGrid) -> Result<Vec<WeightedPoint<'a>>> {
    if sigma.is_invariant() {
        // an invariant symbol has the same norm at every point; total mass is one
        return Ok(vec![(None, 1.0)]);
    }
    if grid.is_empty() {
        return Err(Error::Config("empty Haar grid".into()));
    }
    for p in &grid.points {
        if p.len() != group.dim {
            return Err(Error::Config(format!(
                "grid point has {} coordinates, {group} needs {}",
                p.len(),
                group.dim
            )));
        }
    }
    Ok(grid.points.iter().map(|p| Some(p.as_slice())).zip(grid.weights.iter().copied()).collect())
}

/// Haar-weighted α per channel: `Σ_x w_x α_x`, checking per-point growth.
fn weighted_alphas<const K: usize, F>(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    grid: &HaarGrid,
    cutoff: f64,
    mode: CutoffMode,
    opts: &NormOptions,
    emit: F,
) -> Result<(Vec<f64>, Vec<[f64; K]>)>
where
    F: Fn(&crate::symbols::Block, usize) -> Result<[f64; K]> + Sync + Send,
{
    let slice = DualSlice::new(group, cutoff, mode)?;
    let checkpoints = opts.schedule.checkpoints(cutoff)?;
    let points = grid_points(sigma, group, grid)?;
    let mut acc = vec![[KahanSum::new(); K]; checkpoints.len()];
    for (x, w) in points {
        let profile = weight_profile::<K, _, _>(
            &slice,
            |e| e.cutoff_weight(group, mode),
            |e| emit(&sigma.eval(group, x, e)?, e.d),
        )?;
        let alphas = channel_alphas(&profile, &checkpoints, opts.normalization)?;
        for c in 0..K {
            let seq: Vec<AlphaPoint> = checkpoints
                .iter()
                .zip(&alphas)
                .map(|(&n, a)| AlphaPoint { n, alpha: Complex64::new(a[c], 0.0) })
                .collect();
            check_growth(&seq, "symbol norm partial sums")?;
        }
        for (row, a) in acc.iter_mut().zip(&alphas) {
            for c in 0..K {
                row[c].add(w * a[c]);
            }
        }
    }
    let values = acc
        .iter()
        .map(|row| {
            let mut out = [0.0; K];
            for c in 0..K {
                out[c] = row[c].value();
            }
            out
        })
        .collect();
    Ok((checkpoints, values))
}

fn finish(
    checkpoints: &[f64],
    alphas: impl Iterator<Item = Complex64>,
    opts: &NormOptions,
    estimator: EstimatorKind,
) -> Result<TraceEstimate> {
    let points = checkpoints
        .iter()
        .zip(alphas)
        .map(|(&n, alpha)| AlphaPoint { n, alpha })
        .collect();
    dixmier_limit(points, opts.fit_points, estimator, opts.normalization)
}

/// E3: partial sums of `d_ξ Tr|σ(ξ)|` over `⟨ξ⟩ <= N`, divided by `log N`
/// (weight) or by the log of the number of singular values (index).
pub fn symbol_l1inf_norm(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    cutoff: f64,
    mode: CutoffMode,
    opts: &NormOptions,
) -> Result<TraceEstimate> {
    if !sigma.is_invariant() {
        return Err(Error::Contract("symbol_l1inf_norm needs an invariant symbol".into()));
    }
    variable_trace(sigma, group, &HaarGrid::trivial(), cutoff, mode, opts)
}

/// `∫_G ‖σ(x, ·)‖ dx` as a Haar-weighted sum of per-point E3 sequences.
pub fn variable_trace(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    grid: &HaarGrid,
    cutoff: f64,
    mode: CutoffMode,
    opts: &NormOptions,
) -> Result<TraceEstimate> {
    let (checkpoints, alphas) = weighted_alphas::<1, _>(sigma, group, grid, cutoff, mode, opts, |b, d| {
        b.psd_eigenvalues()?;
        Ok([d as f64 * b.trace_abs()?])
    })?;
    finish(
        &checkpoints,
        alphas.iter().map(|a| Complex64::new(a[0], 0.0)),
        opts,
        EstimatorKind::E3,
    )
}

/// Complex trace `[Re⁺ − Re⁻] + i[Im⁺ − Im⁻]`, the four signed parts taken
/// blockwise from the same slice and schedule; each must converge.
pub fn general_trace(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    grid: &HaarGrid,
    cutoff: f64,
    mode: CutoffMode,
    opts: &NormOptions,
) -> Result<TraceEstimate> {
    let (checkpoints, alphas) = weighted_alphas::<4, _>(sigma, group, grid, cutoff, mode, opts, |b, d| {
        let (re, im) = b.hermitian_parts()?;
        let (rp, rm) = re.signed_parts()?;
        let (ip, imm) = im.signed_parts()?;
        let d = d as f64;
        Ok([
            d * rp.trace_abs()?,
            d * rm.trace_abs()?,
            d * ip.trace_abs()?,
            d * imm.trace_abs()?,
        ])
    })?;
    finish(
        &checkpoints,
        alphas.iter().map(|a| Complex64::new(a[0] - a[1], a[2] - a[3])),
        opts,
        EstimatorKind::E3,
    )
}
