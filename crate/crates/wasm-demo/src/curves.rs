use nalgebra::DMatrix;
use nctrace::determinants::det_p_omega_limit;
use nctrace::estimators::{alpha_sequence, dixmier_limit, singular_spectrum, EstimatorKind, Normalization, Schedule};
use nctrace::residue::{connes_consistency, ClassicalSymbol, ResidueRules};
use nctrace::{make_group, CutoffMode, Error, GroupDescriptor, MatrixSymbol, Result};
use num_complex::Complex64;

const FIT_POINTS: usize = 4;

fn setup(group: &str, symbol: &str) -> Result<(GroupDescriptor, MatrixSymbol, CutoffMode)> {
    let g = make_group(group)?;
    let s = MatrixSymbol::parse(symbol, &g)?;
    let mode = if g.has_sub_system() { CutoffMode::Subelliptic } else { CutoffMode::Elliptic };
    Ok((g, s, mode))
}

/// `[limit, n_0, α_0, n_1, α_1, ...]`, sorted-spectrum estimator, index normalisation.
pub fn alpha_curve(group: &str, symbol: &str, cutoff: f64) -> Result<Vec<f64>> {
    let (g, s, mode) = setup(group, symbol)?;
    if !s.is_invariant() {
        return Err(Error::Unsupported("the demo only plots invariant symbols".into()));
    }
    let spectrum = singular_spectrum(&s, &g, cutoff, mode)?;
    let checkpoints = Schedule::default().index_checkpoints(spectrum.len())?;
    let est = dixmier_limit(
        alpha_sequence(&spectrum, &checkpoints)?,
        FIT_POINTS,
        EstimatorKind::E1,
        Normalization::Index,
    )?;
    let mut out = vec![est.value.re];
    for p in &est.alpha_sequence {
        out.extend([p.n, p.alpha.re]);
    }
    Ok(out)
}

/// `[residue, dixmier, gap]` for `q(ξ)^{-1}` on the 2-torus, `q = [[a11, a12], [a12, a22]]`.
pub fn form_residue(form: [f64; 3], cutoff: f64) -> Result<Vec<f64>> {
    let [a11, a12, a22] = form;
    if !(a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0) {
        return Err(Error::Config("the form must be positive definite".into()));
    }
    let c = ClassicalSymbol::quadratic_form(DMatrix::from_row_slice(2, 2, &[a11, a12, a12, a22]))?;
    let g = make_group("torus:2")?;
    let s = MatrixSymbol::parse(&format!("aniso:{a11:?},{a12:?},{a22:?}:-2"), &g)?;
    let r = connes_consistency(&c, &s, cutoff, Schedule::default(), &ResidueRules::default(), 1.0)?;
    Ok(vec![r.residue, r.dixmier.value.re, r.gap])
}

/// `[limit_re, limit_im, p_1, re_1, im_1, ...]` for `det(I + λσ^p)^{p-1}`, `p_k = 1 + 2^{-k}`.
pub fn det_curve(group: &str, symbol: &str, lambda: [f64; 2], cutoff: f64, levels: usize) -> Result<Vec<f64>> {
    let (g, s, mode) = setup(group, symbol)?;
    let d = det_p_omega_limit(&s, &g, Complex64::new(lambda[0], lambda[1]), levels, cutoff, mode)?;
    let mut out = vec![d.value.re, d.value.im];
    for (p, z) in &d.sequence {
        out.extend([*p, z.re, z.im]);
    }
    Ok(out)
}
