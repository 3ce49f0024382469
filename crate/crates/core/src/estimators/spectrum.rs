use num_complex::Complex64;

use super::aggregate::{histogram, SliceExtent};
use super::AlphaPoint;
use crate::error::{Error, Result};
use crate::group::{CutoffMode, DualSlice, GroupDescriptor};
use crate::summation::KahanSum;
use crate::symbols::MatrixSymbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumProvenance {
    pub mode: CutoffMode,
    pub cutoff: f64,
    /// Values below this were dropped because larger ones may lie outside the
    /// slice; `None` when the symbol gives no tail bound (everything kept).
    pub threshold: Option<f64>,
}

/// Singular values in descending order with multiplicities and compensated
/// prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    entries: Vec<(f64, u64)>,
    cum_counts: Vec<u64>,
    cum_sums: Vec<f64>,
    provenance: SpectrumProvenance,
    extent: SliceExtent,
}

impl SingularSpectrum {
    /// Build from unordered `(value, multiplicity)` pairs; equal values merge,
    /// non-positive and zero-multiplicity entries are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (f64, u64)>>(pairs: I, provenance: SpectrumProvenance) -> Result<Self> {
        let mut entries: Vec<(f64, u64)> = Vec::new();
        for (v, m) in pairs {
            if !v.is_finite() {
                return Err(Error::Numeric(format!("non-finite singular value {v}")));
            }
            if v > 0.0 && m > 0 {
                entries.push((v, m));
            }
        }
        entries.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, u64)> = Vec::with_capacity(entries.len());
        for (v, m) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += m,
                _ => merged.push((v, m)),
            }
        }
        Ok(Self::from_sorted(merged, provenance, SliceExtent::default()))
    }

    fn from_sorted(entries: Vec<(f64, u64)>, provenance: SpectrumProvenance, extent: SliceExtent) -> Self {
        let mut cum_counts = Vec::with_capacity(entries.len());
        let mut cum_sums = Vec::with_capacity(entries.len());
        let mut count = 0u64;
        let mut acc = KahanSum::new();
        for &(v, m) in &entries {
            count += m;
            acc.add(v * m as f64);
            cum_counts.push(count);
            cum_sums.push(acc.value());
        }
        Self {
            entries,
            cum_counts,
            cum_sums,
            provenance,
            extent,
        }
    }

    pub fn entries(&self) -> &[(f64, u64)] {
        &self.entries
    }

    pub fn provenance(&self) -> SpectrumProvenance {
        self.provenance
    }

    /// Shape of the dual slice the spectrum was taken from.
    pub fn extent(&self) -> SliceExtent {
        self.extent
    }

    /// Total number of singular values counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.cum_counts.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the `j` largest singular values.
    pub fn prefix_sum(&self, j: u64) -> Result<f64> {
        if j > self.len() {
            return Err(Error::Config(format!(
                "prefix of {j} values requested from a spectrum of {}",
                self.len()
            )));
        }
        if j == 0 {
            return Ok(0.0);
        }
        let g = self.cum_counts.partition_point(|&c| c < j);
        let (before_count, before_sum) = if g == 0 {
            (0, 0.0)
        } else {
            (self.cum_counts[g - 1], self.cum_sums[g - 1])
        };
        if j == self.cum_counts[g] {
            return Ok(self.cum_sums[g]);
        }
        Ok(before_sum + (j - before_count) as f64 * self.entries[g].0)
    }

    /// Raw cumulative arrays, for persistence.
    pub fn parts(&self) -> (&[(f64, u64)], &[u64], &[f64]) {
        (&self.entries, &self.cum_counts, &self.cum_sums)
    }

    /// Rebuild from persisted parts, checking consistency.
    pub fn from_parts(
        entries: Vec<(f64, u64)>,
        cum_counts: Vec<u64>,
        cum_sums: Vec<f64>,
        provenance: SpectrumProvenance,
        extent: SliceExtent,
    ) -> Result<Self> {
        let rebuilt = Self::from_sorted(entries, provenance, extent);
        if rebuilt.cum_counts != cum_counts || rebuilt.cum_sums.iter().map(|v| v.to_bits()).ne(cum_sums.iter().map(|v| v.to_bits())) {
            return Err(Error::Numeric("persisted prefix sums do not match their entries".into()));
        }
        if rebuilt.entries.windows(2).any(|w| !(w[0].0 > w[1].0)) {
            return Err(Error::Numeric("persisted entries are not strictly descending".into()));
        }
        Ok(rebuilt)
    }
}

/// Singular values of the invariant operator with symbol `σ` over the dual
/// slice, each block value carrying multiplicity `d`.
pub fn singular_spectrum(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    cutoff: f64,
    mode: CutoffMode,
) -> Result<SingularSpectrum> {
    if !sigma.is_invariant() {
        return Err(Error::Contract("singular_spectrum needs an invariant symbol".into()));
    }
    let slice = DualSlice::new(group, cutoff, mode)?;
    let threshold = sigma.tail_sup(group, cutoff, mode);
    let keep = threshold.map_or(0.0, |t| t * (1.0 - 1e-12));
    let hist = histogram(&slice, keep, |e| {
        let block = sigma.eval(group, None, e)?;
        let d = e.d as u64;
        Ok(block.singular_values()?.into_iter().map(|(s, m)| (s, m * d)).collect())
    })?;
    let provenance = SpectrumProvenance { mode, cutoff, threshold };
    Ok(SingularSpectrum::from_sorted(hist.entries, provenance, hist.extent))
}

/// `(N, prefix_N / log N)` at each checkpoint.
pub fn alpha_sequence(spectrum: &SingularSpectrum, checkpoints: &[u64]) -> Result<Vec<AlphaPoint>> {
    checkpoints
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::Config(format!("checkpoint N={n} is invalid (log N must be positive)")));
            }
            let s = spectrum.prefix_sum(n)?;
            Ok(AlphaPoint {
                n: n as f64,
                alpha: Complex64::new(s / (n as f64).ln(), 0.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    fn prov() -> SpectrumProvenance {
        SpectrumProvenance { mode: CutoffMode::Elliptic, cutoff: 1.0, threshold: None }
    }

    #[test]
    fn torus_example_values() {
        let g = make_group("torus:1").unwrap();
        let s = singular_spectrum(&MatrixSymbol::bessel_power(-1.0), &g, 5f64.sqrt(), CutoffMode::Elliptic).unwrap();
        let e = s.entries();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0], (1.0, 1));
        assert!((e[1].0 - 0.5f64.sqrt()).abs() < 1e-15 && e[1].1 == 2);
        assert!((e[2].0 - 0.2f64.sqrt()).abs() < 1e-15 && e[2].1 == 2);
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn su2_example_values() {
        let g = make_group("su2").unwrap();
        let s = singular_spectrum(&MatrixSymbol::bessel_power(-3.0), &g, 2.0, CutoffMode::Elliptic).unwrap();
        let e = s.entries();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0], (1.0, 1));
        assert!((e[1].0 - 1.75f64.powf(-1.5)).abs() < 1e-15 && e[1].1 == 4);
        assert!((e[2].0 - 3f64.powf(-1.5)).abs() < 1e-15 && e[2].1 == 9);
    }

    #[test]
    fn zero_symbol_is_empty() {
        let g = make_group("torus:2").unwrap();
        let s = singular_spectrum(&MatrixSymbol::zero(), &g, 10.0, CutoffMode::Elliptic).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn cutoff_below_one() {
        let g = make_group("torus:1").unwrap();
        let err = singular_spectrum(&MatrixSymbol::bessel_power(-1.0), &g, 0.5, CutoffMode::Elliptic).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn alpha_arithmetic() {
        let s = SingularSpectrum::from_pairs([(1.0, 1), (0.5, 1), (1.0 / 3.0, 1), (0.25, 1)], prov()).unwrap();
        let a = alpha_sequence(&s, &[4]).unwrap();
        assert!((a[0].alpha.re - 25.0 / 12.0 / 4f64.ln()).abs() < 1e-15);
        assert!((a[0].alpha.re - 1.50280).abs() < 1e-5);
        assert!(alpha_sequence(&s, &[1]).is_err());
        assert!(alpha_sequence(&s, &[5]).is_err());
    }

    #[test]
    fn prefix_inside_a_multiplicity_run() {
        let s = SingularSpectrum::from_pairs([(0.5, 3), (1.0, 2), (0.5, 1)], prov()).unwrap();
        assert_eq!(s.entries(), &[(1.0, 2), (0.5, 4)]);
        assert_eq!(s.prefix_sum(3).unwrap(), 2.5);
        assert_eq!(s.prefix_sum(6).unwrap(), 4.0);
    }
}
