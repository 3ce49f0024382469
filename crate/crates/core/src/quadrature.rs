//! Normalised Haar grids on `G` and surface rules on `S^{n-1}`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupKind};
use crate::summation::KahanSum;

/// Product quadrature for the normalised Haar measure.
///
/// Torus points are angle vectors in `[0, 2π)^n`. SU(2) points are Euler
/// angles `(α, β, γ)` of `g = e^{αZ} e^{βY} e^{γZ}` with `α ∈ [0, 2π)`,
/// `β ∈ [0, π]`, `γ ∈ [0, 4π)`. Product points concatenate factor coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl HaarGrid {
    /// A single point of mass one, for invariant symbols.
    pub fn trivial() -> Self {
        Self {
            points: vec![Vec::new()],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

fn uniform(period: f64, resolution: usize) -> Vec<(f64, f64)> {
    (0..resolution)
        .map(|j| (period * j as f64 / resolution as f64, 1.0 / resolution as f64))
        .collect()
}

fn gauss_legendre(resolution: usize) -> Result<Vec<(f64, f64)>> {
    GaussLegendre::new(resolution)
        .map(|q| q.as_node_weight_pairs().to_vec())
        .map_err(|e| Error::Numeric(format!("Gauss-Legendre rule of degree {resolution}: {e}")))
}

fn tensor(a: &HaarGrid, b: &HaarGrid) -> HaarGrid {
    let mut points = Vec::with_capacity(a.len() * b.len());
    let mut weights = Vec::with_capacity(a.len() * b.len());
    for (pa, wa) in a.points.iter().zip(&a.weights) {
        for (pb, wb) in b.points.iter().zip(&b.weights) {
            let mut p = pa.clone();
            p.extend_from_slice(pb);
            points.push(p);
            weights.push(wa * wb);
        }
    }
    HaarGrid { points, weights }
}

pub fn haar_grid(group: &GroupDescriptor, resolution: usize) -> Result<HaarGrid> {
    if resolution < 2 {
        return Err(Error::Config(format!("Haar grid resolution must be >= 2, got {resolution}")));
    }
    match &group.kind {
        GroupKind::Torus(n) => {
            let axis = uniform(2.0 * PI, resolution);
            let mut grid = HaarGrid::trivial();
            for _ in 0..*n {
                let line = HaarGrid {
                    points: axis.iter().map(|(x, _)| vec![*x]).collect(),
                    weights: axis.iter().map(|(_, w)| *w).collect(),
                };
                grid = tensor(&grid, &line);
            }
            Ok(grid)
        }
        GroupKind::Su2 { .. } => {
            let alpha = uniform(2.0 * PI, resolution);
            let gamma = uniform(4.0 * PI, resolution);
            // Haar density sin β dβ / 2 = du / 2 with u = cos β
            let beta: Vec<(f64, f64)> = gauss_legendre(resolution)?
                .into_iter()
                .map(|(u, w)| (u.clamp(-1.0, 1.0).acos(), 0.5 * w))
                .collect();
            let mut points = Vec::with_capacity(resolution.pow(3));
            let mut weights = Vec::with_capacity(resolution.pow(3));
            for (a, wa) in &alpha {
                for (b, wb) in &beta {
                    for (c, wc) in &gamma {
                        points.push(vec![*a, *b, *c]);
                        weights.push(wa * wb * wc);
                    }
                }
            }
            Ok(HaarGrid { points, weights })
        }
        GroupKind::Product(fs) => {
            let mut grid = HaarGrid::trivial();
            for f in fs {
                grid = tensor(&grid, &haar_grid(f, resolution)?);
            }
            Ok(grid)
        }
    }
}

/// Character of the spin-1/2 representation at Euler angles `(α, β, γ)`.
pub fn su2_half_character(x: &[f64]) -> f64 {
    2.0 * (0.5 * x[1]).cos() * (0.5 * (x[0] + x[2])).cos()
}

/// Nodes on `S^{n-1}` with weights summing to the surface area.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Surface area of `S^{n-1}` for `n = 1, 2, 3`.
pub fn sphere_area(n: usize) -> Result<f64> {
    match n {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::Unsupported(format!("sphere integrals only for n = 1..3, got {n}"))),
    }
}

impl SphereRule {
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        sphere_area(n)?;
        if resolution < 2 && n > 1 {
            return Err(Error::Config(format!("sphere resolution must be >= 2, got {resolution}")));
        }
        let (nodes, weights) = match n {
            1 => (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]),
            2 => {
                let h = 2.0 * PI / resolution as f64;
                (0..resolution)
                    .map(|j| {
                        let t = h * j as f64;
                        (vec![t.cos(), t.sin()], h)
                    })
                    .unzip()
            }
            _ => {
                let h = 2.0 * PI / resolution as f64;
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                for (u, wu) in gauss_legendre(resolution)? {
                    let r = (1.0 - u * u).max(0.0).sqrt();
                    for j in 0..resolution {
                        let phi = h * j as f64;
                        nodes.push(vec![r * phi.cos(), r * phi.sin(), u]);
                        weights.push(wu * h);
                    }
                }
                (nodes, weights)
            }
        };
        Ok(Self { n, nodes, weights })
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

pub fn sphere_integral<F: FnMut(&[f64]) -> f64>(f: F, n: usize, resolution: usize) -> Result<f64> {
    Ok(SphereRule::new(n, resolution)?.integrate(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    #[test]
    fn torus_grid_integrates_trig_polynomials() {
        let g = make_group("torus:1").unwrap();
        for res in 3..8 {
            let grid = haar_grid(&g, res).unwrap();
            let v = grid.integrate(|x| x[0].cos().powi(2));
            assert!((v - 0.5).abs() < 1e-15, "res {res}: {v}");
        }
        let g2 = make_group("torus:2").unwrap();
        let grid = haar_grid(&g2, 8).unwrap();
        assert!((grid.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(grid.integrate(|x| (x[0] + 2.0 * x[1]).cos()).abs() < 1e-15);
    }

    #[test]
    fn torus_translation_invariance() {
        let g = make_group("torus:1").unwrap();
        let res = 16;
        let grid = haar_grid(&g, res).unwrap();
        let f = |t: f64| (3.0 + t.cos() + 0.3 * (5.0 * t).sin()).ln();
        let base = grid.integrate(|x| f(x[0]));
        for shift in 1..res {
            let a = 2.0 * PI * shift as f64 / res as f64;
            let shifted = grid.integrate(|x| f(x[0] + a));
            assert!((shifted - base).abs() < 1e-14);
        }
    }

    #[test]
    fn su2_normalisation_and_schur() {
        let g = make_group("su2").unwrap();
        let grid = haar_grid(&g, 32).unwrap();
        assert!((grid.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let norm = grid.integrate(|x| su2_half_character(x).powi(2));
        assert!((norm - 1.0).abs() < 1e-8, "{norm}");
        let mean = grid.integrate(su2_half_character);
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn sphere_examples() {
        assert!((sphere_integral(|_| 1.0, 2, 16).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_integral(|_| 1.0, 3, 16).unwrap() - 4.0 * PI).abs() < 1e-10);
        assert_eq!(sphere_integral(|x| 1.0 / x[0].abs(), 1, 0).unwrap(), 2.0);
        let v = sphere_integral(|x| 1.0 / (1.0 + x[1] * x[1]), 2, 512).unwrap();
        assert!((v - 2.0 * PI / 2f64.sqrt()).abs() < 1e-10);
        assert!(matches!(sphere_integral(|_| 1.0, 4, 8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sphere_s2_second_moment() {
        // ∫ z² dS = 4π/3
        let v = sphere_integral(|x| x[2] * x[2], 3, 8).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_resolution_is_stable_for_smooth_integrands() {
        let f = |x: &[f64]| (1.0 + 0.5 * x[0]).recip();
        let a = sphere_integral(f, 2, 64).unwrap();
        let b = sphere_integral(f, 2, 128).unwrap();
        assert!((a - b).abs() < 1e-8);
    }
}
