//! Wodzicki residues on the torus and their comparison with Dixmier traces.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{
    alpha_sequence, dixmier_limit, general_trace, singular_spectrum, EstimatorKind, NormOptions, Normalization,
    Schedule, TraceEstimate, DEFAULT_FIT_POINTS,
};
use crate::group::{CutoffMode, GroupDescriptor};
use crate::quadrature::{haar_grid, sphere_integral, HaarGrid};
use crate::symbols::MatrixSymbol;

pub type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

const HOMOGENEITY_TOL: f64 = 1e-10;

/// Principal part `σ_{-n}(x, ξ) = profile(x) · f(ξ)` of a classical symbol on
/// `𝕋ⁿ`, with `f` homogeneous of degree `-n`.
#[derive(Clone)]
pub struct ClassicalSymbol {
    n: usize,
    name: String,
    homogeneous: RealFn,
    x_profile: Option<RealFn>,
}

impl fmt::Debug for ClassicalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassicalSymbol({}, n = {})", self.name, self.n)
    }
}

impl ClassicalSymbol {
    /// Wrap `f`, checking `f(tξ) = t^{-n} f(ξ)` on random rays.
    pub fn new(n: usize, name: &str, f: RealFn) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Unsupported(format!("torus residues for n = 1..3, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
        for _ in 0..16 {
            let xi: Vec<f64> = loop {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 0.1 && r <= 1.0 {
                    break v.iter().map(|x| x / r).collect();
                }
            };
            let base = f(&xi);
            for t in [0.5, 2.0, 3.7, 11.0] {
                let scaled: Vec<f64> = xi.iter().map(|x| t * x).collect();
                let want = t.powi(-(n as i32)) * base;
                let got = f(&scaled);
                if (got - want).abs() > HOMOGENEITY_TOL * want.abs().max(f64::MIN_POSITIVE) {
                    return Err(Error::Contract(format!(
                        "{name} is not homogeneous of degree -{n}: f({t}ξ) = {got:e}, expected {want:e}"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            name: name.into(),
            homogeneous: f,
            x_profile: None,
        })
    }

    /// `q(ξ)^{-n/2}` for a symmetric positive definite `n × n` form.
    pub fn quadratic_form(form: DMatrix<f64>) -> Result<Self> {
        let n = form.nrows();
        if form.ncols() != n {
            return Err(Error::Config("quadratic form must be square".into()));
        }
        let name = format!("quadratic form {:?}", form.as_slice());
        let f: RealFn = Arc::new(move |x: &[f64]| {
            let mut q = 0.0;
            for i in 0..n {
                for j in 0..n {
                    q += form[(i, j)] * x[i] * x[j];
                }
            }
            q.powf(-0.5 * n as f64)
        });
        Self::new(n, &name, f)
    }

    /// `|ξ|^{-n}`.
    pub fn inverse_norm(n: usize) -> Result<Self> {
        Self::quadratic_form(DMatrix::identity(n, n))
    }

    pub fn with_profile(mut self, profile: RealFn) -> Self {
        self.x_profile = Some(profile);
        self
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let f = self.homogeneous.clone();
        let mut out = Self::new(self.n, &format!("{c}*{}", self.name), Arc::new(move |x: &[f64]| c * f(x)))?;
        out.x_profile = self.x_profile.clone();
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        (self.homogeneous)(xi)
    }
}

/// Quadrature resolutions for the residue integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueRules {
    pub sphere_res: usize,
    pub torus_res: usize,
}

impl Default for ResidueRules {
    fn default() -> Self {
        Self { sphere_res: 512, torus_res: 32 }
    }
}

/// `(1/(n(2π)ⁿ)) ∫_{𝕋ⁿ} profile dx ∫_{|ξ|=1} σ_{-n}(ξ) dξ` with the
/// unnormalised volume on `𝕋ⁿ`.
pub fn wodzicki_residue_torus(c: &ClassicalSymbol, rules: &ResidueRules) -> Result<f64> {
    let n = c.n;
    let res = if n == 3 { rules.sphere_res.min(128) } else { rules.sphere_res };
    let sphere = sphere_integral(|x| c.eval(x), n, res)?;
    let mean = match &c.x_profile {
        None => 1.0,
        Some(p) => haar_grid(&GroupDescriptor::torus(n)?, rules.torus_res)?.integrate(|x| p(x)),
    };
    // ∫ profile d(vol) = (2π)ⁿ · Haar mean
    let volume = (2.0 * PI).powi(n as i32);
    Ok(volume * mean * sphere / (n as f64 * volume))
}

/// Residue as the index-normalised four-term symbol-norm trace.
pub fn residue_via_symbol_norm(
    sigma: &MatrixSymbol,
    group: &GroupDescriptor,
    grid: &HaarGrid,
    cutoff: f64,
    schedule: Schedule,
) -> Result<TraceEstimate> {
    if group.has_sub_system() {
        return Err(Error::Contract(format!(
            "residue_via_symbol_norm needs an elliptic setting, {group} carries a sub-Laplacian"
        )));
    }
    let opts = NormOptions {
        schedule,
        normalization: Normalization::Index,
        fit_points: DEFAULT_FIT_POINTS,
    };
    let mut est = general_trace(sigma, group, grid, cutoff, CutoffMode::Elliptic, &opts)?;
    est.estimator = EstimatorKind::Residue;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub residue: f64,
    pub dixmier: TraceEstimate,
    /// `|Tr_Dix - res| / |res|`.
    pub gap: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Compare the torus residue of `c` with the index-mode Dixmier trace of its
/// lattice restriction `σ`.
pub fn connes_consistency(
    c: &ClassicalSymbol,
    sigma: &MatrixSymbol,
    cutoff: f64,
    schedule: Schedule,
    rules: &ResidueRules,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    let residue = wodzicki_residue_torus(c, rules)?;
    let group = GroupDescriptor::torus(c.n)?;
    let dixmier = if sigma.is_invariant() {
        let spectrum = singular_spectrum(sigma, &group, cutoff, CutoffMode::Elliptic)?;
        let checkpoints = schedule.index_checkpoints(spectrum.len())?;
        dixmier_limit(
            alpha_sequence(&spectrum, &checkpoints)?,
            DEFAULT_FIT_POINTS,
            EstimatorKind::E1,
            Normalization::Index,
        )?
    } else {
        let grid = haar_grid(&group, rules.torus_res)?;
        residue_via_symbol_norm(sigma, &group, &grid, cutoff, schedule)?
    };
    let gap = (dixmier.value.re - residue).abs() / residue.abs().max(f64::MIN_POSITIVE);
    Ok(ConsistencyReport {
        residue,
        passes: gap <= tolerance,
        dixmier,
        gap,
        tolerance,
    })
}
