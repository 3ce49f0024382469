use nalgebra::DVector;
use num_complex::Complex64;

use super::calculus::{self, CMatrix, CLIP_TOL};
use crate::error::{Error, Result};

/// The value `σ(x, [ξ])` of a symbol at one dual element: a `d × d` complex
/// matrix, stored compactly when it is a multiple of the identity or diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Scalar { value: Complex64, dim: usize },
    Diagonal(Vec<Complex64>),
    Dense(CMatrix),
}

impl Block {
    pub fn zero(dim: usize) -> Self {
        Block::Scalar {
            value: Complex64::new(0.0, 0.0),
            dim,
        }
    }

    pub fn real_scalar(value: f64, dim: usize) -> Self {
        Block::Scalar {
            value: Complex64::new(value, 0.0),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Block::Scalar { dim, .. } => *dim,
            Block::Diagonal(v) => v.len(),
            Block::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Block::Scalar { value, dim } => CMatrix::identity(*dim, *dim) * *value,
            Block::Diagonal(v) => CMatrix::from_diagonal(&DVector::from_column_slice(v)),
            Block::Dense(m) => m.clone(),
        }
    }

    /// Singular values paired with how many times each occurs in the block.
    pub fn singular_values(&self) -> Result<Vec<(f64, u64)>> {
        match self {
            Block::Scalar { value, dim } => Ok(vec![(value.norm(), *dim as u64)]),
            Block::Diagonal(v) => Ok(v.iter().map(|z| (z.norm(), 1)).collect()),
            Block::Dense(m) => Ok(calculus::singular_values(m)?.into_iter().map(|s| (s, 1)).collect()),
        }
    }

    /// `Tr |σ|`, the sum of singular values.
    pub fn trace_abs(&self) -> Result<f64> {
        match self {
            Block::Scalar { value, dim } => Ok(value.norm() * *dim as f64),
            Block::Diagonal(v) => Ok(v.iter().map(|z| z.norm()).sum()),
            Block::Dense(m) => Ok(calculus::singular_values(m)?.iter().sum()),
        }
    }

    pub fn trace(&self) -> Complex64 {
        match self {
            Block::Scalar { value, dim } => *value * *dim as f64,
            Block::Diagonal(v) => v.iter().sum(),
            Block::Dense(m) => m.trace(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Block {
        match self {
            Block::Scalar { value, dim } => Block::Scalar {
                value: *value * c,
                dim: *dim,
            },
            Block::Diagonal(v) => Block::Diagonal(v.iter().map(|z| z * c).collect()),
            Block::Dense(m) => Block::Dense(m * c),
        }
    }

    pub fn scale_real(&self, c: f64) -> Block {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &Block) -> Result<Block> {
        if self.dim() != other.dim() {
            return Err(Error::Contract(format!(
                "cannot add blocks of size {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(match (self, other) {
            (Block::Scalar { value: a, dim }, Block::Scalar { value: b, .. }) => Block::Scalar {
                value: a + b,
                dim: *dim,
            },
            (Block::Diagonal(_), _) | (_, Block::Diagonal(_))
                if !matches!(self, Block::Dense(_)) && !matches!(other, Block::Dense(_)) =>
            {
                let a = self.diagonal_entries();
                let b = other.diagonal_entries();
                Block::Diagonal(a.iter().zip(&b).map(|(x, y)| x + y).collect())
            }
            _ => Block::Dense(self.to_dense() + other.to_dense()),
        })
    }

    fn diagonal_entries(&self) -> Vec<Complex64> {
        match self {
            Block::Scalar { value, dim } => vec![*value; *dim],
            Block::Diagonal(v) => v.clone(),
            Block::Dense(m) => m.diagonal().iter().cloned().collect(),
        }
    }

    /// `(Re σ, Im σ)`.
    pub fn hermitian_parts(&self) -> Result<(Block, Block)> {
        match self {
            Block::Scalar { value, dim } => Ok((
                Block::real_scalar(value.re, *dim),
                Block::real_scalar(value.im, *dim),
            )),
            Block::Diagonal(v) => Ok((
                Block::Diagonal(v.iter().map(|z| Complex64::new(z.re, 0.0)).collect()),
                Block::Diagonal(v.iter().map(|z| Complex64::new(z.im, 0.0)).collect()),
            )),
            Block::Dense(m) => {
                let (re, im) = calculus::hermitian_parts(m)?;
                Ok((Block::Dense(re), Block::Dense(im)))
            }
        }
    }

    /// `(H⁺, H⁻)` for a Hermitian block.
    pub fn signed_parts(&self) -> Result<(Block, Block)> {
        let split = |z: &Complex64, scale: f64| -> Result<(Complex64, Complex64)> {
            if z.im.abs() > CLIP_TOL * scale.max(z.norm()) {
                return Err(Error::Contract(format!(
                    "signed_parts requires a Hermitian block, found diagonal entry {z}"
                )));
            }
            Ok((
                Complex64::new(z.re.max(0.0), 0.0),
                Complex64::new((-z.re).max(0.0), 0.0),
            ))
        };
        match self {
            Block::Scalar { value, dim } => {
                let (p, m) = split(value, value.norm())?;
                Ok((
                    Block::Scalar { value: p, dim: *dim },
                    Block::Scalar { value: m, dim: *dim },
                ))
            }
            Block::Diagonal(v) => {
                let scale = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let mut pos = Vec::with_capacity(v.len());
                let mut neg = Vec::with_capacity(v.len());
                for z in v {
                    let (p, m) = split(z, scale)?;
                    pos.push(p);
                    neg.push(m);
                }
                Ok((Block::Diagonal(pos), Block::Diagonal(neg)))
            }
            Block::Dense(m) => {
                let (p, n) = calculus::signed_parts(m)?;
                Ok((Block::Dense(p), Block::Dense(n)))
            }
        }
    }

    /// Eigenvalues of a positive semi-definite block with their multiplicities.
    pub fn psd_eigenvalues(&self) -> Result<Vec<(f64, u64)>> {
        let check = |v: f64, scale: f64| -> Result<f64> {
            if v < -CLIP_TOL * scale {
                Err(Error::Positivity(format!("block eigenvalue {v:e} is negative")))
            } else {
                Ok(v.max(0.0))
            }
        };
        match self {
            Block::Scalar { value, dim } => {
                if value.im.abs() > CLIP_TOL * value.norm() {
                    return Err(Error::Positivity(format!("scalar block {value} is not real")));
                }
                Ok(vec![(check(value.re, value.norm())?, *dim as u64)])
            }
            Block::Diagonal(v) => {
                let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                v.iter()
                    .map(|z| {
                        if z.im.abs() > CLIP_TOL * scale.max(z.norm()) {
                            return Err(Error::Positivity(format!("diagonal entry {z} is not real")));
                        }
                        Ok((check(z.re, scale)?, 1))
                    })
                    .collect()
            }
            Block::Dense(m) => match calculus::psd_eigenvalues(m) {
                Ok(v) => Ok(v.into_iter().map(|x| (x, 1)).collect()),
                Err(Error::Contract(msg)) => Err(Error::Positivity(msg)),
                Err(e) => Err(e),
            },
        }
    }

    /// Blockwise Hermitian power of a positive semi-definite block.
    pub fn power(&self, p: f64) -> Result<Block> {
        if !(p > 0.0) {
            return Err(Error::Domain(format!("symbol power needs p > 0, got {p}")));
        }
        match self {
            Block::Scalar { dim, .. } => {
                let (v, _) = self.psd_eigenvalues()?[0];
                Ok(Block::real_scalar(v.powf(p), *dim))
            }
            Block::Diagonal(_) => Ok(Block::Diagonal(
                self.psd_eigenvalues()?
                    .into_iter()
                    .map(|(v, _)| Complex64::new(v.powf(p), 0.0))
                    .collect(),
            )),
            Block::Dense(m) => match calculus::hermitian_power(m, p) {
                Ok(r) => Ok(Block::Dense(r)),
                Err(Error::Contract(msg)) => Err(Error::Positivity(msg)),
                Err(e) => Err(e),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Block::Scalar { value, .. } => *value == Complex64::new(0.0, 0.0),
            Block::Diagonal(v) => v.iter().all(|z| *z == Complex64::new(0.0, 0.0)),
            Block::Dense(m) => m.iter().all(|z| *z == Complex64::new(0.0, 0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_block_singular_values_carry_dimension() {
        let b = Block::real_scalar(-0.5, 3);
        assert_eq!(b.singular_values().unwrap(), vec![(0.5, 3)]);
        assert_eq!(b.trace_abs().unwrap(), 1.5);
    }

    #[test]
    fn compact_and_dense_agree() {
        let diag = Block::Diagonal(vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)]);
        let dense = Block::Dense(diag.to_dense());
        assert!((diag.trace_abs().unwrap() - dense.trace_abs().unwrap()).abs() < 1e-14);
        let (re_d, im_d) = diag.hermitian_parts().unwrap();
        let (re_m, im_m) = dense.hermitian_parts().unwrap();
        assert!(calculus::frobenius(&(re_d.to_dense() - re_m.to_dense())) < 1e-15);
        assert!(calculus::frobenius(&(im_d.to_dense() - im_m.to_dense())) < 1e-15);
    }

    #[test]
    fn signed_parts_of_scalar() {
        let (p, m) = Block::real_scalar(-2.0, 2).signed_parts().unwrap();
        assert_eq!(p, Block::real_scalar(0.0, 2));
        assert_eq!(m, Block::real_scalar(2.0, 2));
        assert!(Block::Scalar { value: Complex64::new(1.0, 1.0), dim: 1 }.signed_parts().is_err());
    }

    #[test]
    fn add_mixed_blocks() {
        let a = Block::real_scalar(1.0, 2);
        let b = Block::Diagonal(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
        assert_eq!(
            a.add(&b).unwrap(),
            Block::Diagonal(vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)])
        );
        assert!(a.add(&Block::zero(3)).is_err());
    }
}
