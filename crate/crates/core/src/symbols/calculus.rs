//! Functional calculus on small dense complex matrices: `|M|`, real and
//! imaginary parts, positive and negative parts, Hermitian powers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative threshold below which negative eigenvalues are treated as zero.
pub const CLIP_TOL: f64 = 1e-10;

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Contract(format!(
            "{what} needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(format!("{what}: matrix has non-finite entries")));
    }
    Ok(())
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Singular values, in the order returned by the SVD (descending).
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    check_finite(m, "singular_values")?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = m.clone().try_svd(false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric(format!("SVD did not converge for {}x{} block", m.nrows(), m.ncols())))?;
    Ok(svd.singular_values.iter().cloned().collect())
}

/// `|M| = sqrt(M* M)`, computed as `V Σ V*` from the SVD `M = U Σ V*`.
pub fn matrix_abs(m: &CMatrix) -> Result<CMatrix> {
    check_square(m, "matrix_abs")?;
    check_finite(m, "matrix_abs")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    let svd = m
        .clone()
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| {
            Error::Numeric(format!(
                "SVD did not converge in matrix_abs (n = {n}, |M|_F = {:e})",
                frobenius(m)
            ))
        })?;
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = CMatrix::from_diagonal(&svd.singular_values.map(|s| Complex64::new(s, 0.0)));
    Ok(hermitize(v_t.adjoint() * sigma * v_t))
}

/// `(Re M, Im M) = ((M + M*)/2, (M - M*)/(2i))`, both Hermitian.
pub fn hermitian_parts(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    check_square(m, "hermitian_parts")?;
    let adj = m.adjoint();
    let re = (m + &adj) * Complex64::new(0.5, 0.0);
    let im = (m - &adj) * Complex64::new(0.0, -0.5);
    Ok((re, im))
}

pub fn is_hermitian(h: &CMatrix, rel_tol: f64) -> bool {
    let scale = frobenius(h);
    frobenius(&(h - h.adjoint())) <= rel_tol * scale
}

/// Real eigenvalues and eigenvectors of a Hermitian matrix, with eigenvalues in
/// `[-CLIP_TOL·|H|, 0)` clipped to zero.
fn hermitian_eigen(h: &CMatrix, what: &str) -> Result<(Vec<f64>, CMatrix, f64)> {
    check_square(h, what)?;
    check_finite(h, what)?;
    if !is_hermitian(h, CLIP_TOL) {
        return Err(Error::Contract(format!(
            "{what} requires a Hermitian matrix (|H - H*| = {:e}, |H| = {:e})",
            frobenius(&(h - h.adjoint())),
            frobenius(h)
        )));
    }
    let norm = frobenius(h);
    let eig = SymmetricEigen::new(hermitize(h.clone()));
    let vals = eig
        .eigenvalues
        .iter()
        .map(|&v| if v < 0.0 && v >= -CLIP_TOL * norm { 0.0 } else { v })
        .collect();
    Ok((vals, eig.eigenvectors, norm))
}

fn reassemble(vectors: &CMatrix, values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let v = Complex64::new(values[j], 0.0);
        for i in 0..n {
            scaled[(i, j)] *= v;
        }
    }
    hermitize(scaled * vectors.adjoint())
}

/// `(H⁺, H⁻) = ((|H| + H)/2, (|H| - H)/2)` for Hermitian `H`.
pub fn signed_parts(h: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((h.clone(), h.clone()));
    }
    let (vals, vecs, _) = hermitian_eigen(h, "signed_parts")?;
    let pos: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let neg: Vec<f64> = vals.iter().map(|&v| (-v).max(0.0)).collect();
    let pos_zero = pos.iter().all(|&v| v == 0.0);
    let neg_zero = neg.iter().all(|&v| v == 0.0);
    // semi-definite inputs pass through unchanged
    match (pos_zero, neg_zero) {
        (true, true) => Ok((CMatrix::zeros(n, n), CMatrix::zeros(n, n))),
        (false, true) => Ok((h.clone(), CMatrix::zeros(n, n))),
        (true, false) => Ok((CMatrix::zeros(n, n), -h.clone())),
        (false, false) => Ok((reassemble(&vecs, &pos), reassemble(&vecs, &neg))),
    }
}

/// Eigenvalues of a Hermitian positive semi-definite matrix (clipped at zero).
pub fn psd_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let (vals, _, norm) = hermitian_eigen(h, "psd_eigenvalues")?;
    check_nonnegative(&vals, norm)?;
    Ok(vals)
}

fn check_nonnegative(vals: &[f64], norm: f64) -> Result<()> {
    if let Some(v) = vals.iter().find(|&&v| v < 0.0) {
        return Err(Error::Positivity(format!(
            "eigenvalue {v:e} below clipping threshold {:e}",
            -CLIP_TOL * norm
        )));
    }
    Ok(())
}

/// `H^p` for Hermitian positive semi-definite `H` and real `p > 0`.
pub fn hermitian_power(h: &CMatrix, p: f64) -> Result<CMatrix> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("matrix power needs p > 0, got {p}")));
    }
    if h.is_empty() {
        return Ok(h.clone());
    }
    let (vals, vecs, norm) = hermitian_eigen(h, "hermitian_power")?;
    check_nonnegative(&vals, norm)?;
    let powered: Vec<f64> = vals.iter().map(|&v| v.powf(p)).collect();
    Ok(reassemble(&vecs, &powered))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let diff = frobenius(&(a - b));
        assert!(diff <= tol, "difference {diff:e} exceeds {tol:e}\n{a}\n{b}");
    }

    #[test]
    fn abs_examples() {
        let m = CMatrix::from_row_slice(2, 2, &[c(-2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let expect = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        assert_close(&matrix_abs(&m).unwrap(), &expect, 1e-14);

        let nil = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let expect = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_close(&matrix_abs(&nil).unwrap(), &expect, 1e-14);

        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_close(&matrix_abs(&swap).unwrap(), &CMatrix::identity(2, 2), 1e-14);
    }

    #[test]
    fn abs_rejects_rectangular() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(matrix_abs(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn signed_parts_examples() {
        let h = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let (hp, hm) = signed_parts(&h).unwrap();
        assert_close(&hp, &CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]), 1e-14);
        assert_close(&hm, &CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]), 1e-14);

        let (zp, zm) = signed_parts(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(frobenius(&zp), 0.0);
        assert_eq!(frobenius(&zm), 0.0);

        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let (hp, hm) = signed_parts(&h).unwrap();
        // rank-one projections
        assert_close(&(&hp * &hp), &hp, 1e-14);
        assert_close(&(&hm * &hm), &hm, 1e-14);
        assert!(frobenius(&(&hp * &hm)) < 1e-14);
        assert!((hp.trace().re - 1.0).abs() < 1e-14);
        assert_close(&(&hp - &hm), &h, 1e-14);
    }

    #[test]
    fn signed_parts_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(signed_parts(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn hermitian_parts_of_diagonal_complex() {
        let m = CMatrix::from_row_slice(1, 1, &[c(2.0, -3.0)]);
        let (re, im) = hermitian_parts(&m).unwrap();
        assert_eq!(re[(0, 0)], c(2.0, 0.0));
        assert_eq!(im[(0, 0)], c(-3.0, 0.0));
    }

    #[test]
    fn power_examples() {
        let h = CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(9.0, 0.0)]);
        let r = hermitian_power(&h, 0.5).unwrap();
        assert_close(&r, &CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]), 1e-14);
        let id = CMatrix::identity(3, 3);
        assert_close(&hermitian_power(&id, 7.3).unwrap(), &id, 1e-14);
        let neg = CMatrix::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        assert!(matches!(hermitian_power(&neg, 2.0), Err(Error::Positivity(_))));
        assert!(matches!(hermitian_power(&id, 0.0), Err(Error::Domain(_))));
    }
}
