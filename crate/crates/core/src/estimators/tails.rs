//! Analytic completion of `Σ d Tr(σ(ξ)^p)` beyond a dual slice for the
//! builtin power-law families, by integral comparison.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::aggregate::SliceExtent;
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupKind};
use crate::quadrature::{sphere_area, sphere_integral};
use crate::symbols::{PowerLaw, PowerLawKind};

/// `∫_X^∞ x^γ (1 + b/x²)^a dx` by the binomial series, for `γ < -1`, `b < X²`.
pub fn binomial_tail(x: f64, gamma: f64, a: f64, b: f64) -> Result<f64> {
    if !(gamma + 1.0 < 0.0) {
        return Err(Error::Domain(format!("tail integral diverges (exponent {gamma} >= -1)")));
    }
    let ratio = b / (x * x);
    if !(ratio < 0.8) {
        return Err(Error::Domain(format!(
            "cutoff too small for the analytic tail (b/X² = {ratio:.3})"
        )));
    }
    let mut coef = 1.0;
    let mut total = 0.0;
    for j in 0..400 {
        let jf = j as f64;
        let term = coef * b.powi(j) * x.powf(gamma + 1.0 - 2.0 * jf) / (2.0 * jf - gamma - 1.0);
        total += term;
        if term.abs() <= 1e-17 * total.abs() {
            break;
        }
        coef *= (a - jf) / (jf + 1.0);
    }
    Ok(total)
}

/// `λ(e) = Σ_{j>=0} (2j+1)^{-e}` for `e > 1`.
pub fn dirichlet_lambda(e: f64) -> Result<f64> {
    if !(e > 1.0) {
        return Err(Error::Domain(format!("odd zeta sum diverges for exponent {e}")));
    }
    const J: usize = 2000;
    let mut head = 0.0;
    // smallest terms first
    for j in (0..J).rev() {
        head += (2.0 * j as f64 + 1.0).powf(-e);
    }
    let y = 2.0 * J as f64 + 1.0;
    let f = y.powf(-e);
    let integral = y.powf(1.0 - e) / (2.0 * (e - 1.0));
    let d1 = -2.0 * e * y.powf(-e - 1.0);
    let d3 = -8.0 * e * (e + 1.0) * (e + 2.0) * y.powf(-e - 3.0);
    Ok(head + integral + 0.5 * f - d1 / 12.0 + d3 / 720.0)
}

fn ball_volume(n: usize) -> Result<f64> {
    match n {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::Unsupported(format!("analytic tails only on torus(1..3), got n = {n}"))),
    }
}

/// Radius of the ball whose volume equals the number of lattice points kept.
fn matched_radius(n: usize, count: u64) -> Result<f64> {
    Ok((count as f64 / ball_volume(n)?).powf(1.0 / n as f64))
}

fn quadratic(form: &DMatrix<f64>, x: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            q += form[(i, j)] * x[i] * x[j];
        }
    }
    q
}

/// `Σ d Tr(σ(ξ)^p)` over the dual elements outside a slice of shape `extent`,
/// where `σ` follows `law`.
pub fn power_tail(law: &PowerLaw, group: &GroupDescriptor, extent: &SliceExtent, p: f64) -> Result<f64> {
    let scale = law.coefficient.powf(p);
    let a = 0.5 * law.s * p;
    match (&law.kind, &group.kind) {
        (PowerLawKind::Bessel, GroupKind::Torus(n)) | (PowerLawKind::SubBessel, GroupKind::Torus(n)) => {
            let r = matched_radius(*n, extent.slots)?;
            let gamma = *n as f64 - 1.0 + 2.0 * a;
            Ok(scale * sphere_area(*n)? * binomial_tail(r, gamma, a, 1.0)?)
        }
        (PowerLawKind::Bessel, GroupKind::Su2 { .. }) | (PowerLawKind::SubBessel, GroupKind::Su2 { sub: false }) => {
            let two_l = extent
                .max_two_l
                .ok_or_else(|| Error::Contract("SU(2) tail needs the largest spin of the slice".into()))?;
            // d = 2l+1 runs over D+1, D+2, ...; midpoint comparison from D + 1/2
            let x = f64::from(two_l) + 1.5;
            Ok(scale * 4f64.powf(-a) * binomial_tail(x, 2.0 + 2.0 * a, a, 3.0)?)
        }
        (PowerLawKind::SubBessel, GroupKind::Su2 { sub: true }) => {
            let two_l = extent
                .max_two_l
                .ok_or_else(|| Error::Contract("SU(2) tail needs the largest spin of the slice".into()))?;
            let e = -a;
            if !(e > 2.0) {
                return Err(Error::Domain(format!(
                    "subelliptic tail diverges for exponent s·p = {}",
                    law.s * p
                )));
            }
            // ν² = (2j+1)l - j² + O(1) near m = ±(l-j); Σ_m ≈ 2λ(e) l^{-e},
            // summed over l in steps of 1/2 with weight d = 2l + 1
            let lam = dirichlet_lambda(e)?;
            let l0 = 0.5 * f64::from(two_l) + 0.25;
            Ok(scale * (8.0 * lam * l0.powf(2.0 - e) / (e - 2.0) + 4.0 * lam * l0.powf(1.0 - e) / (e - 1.0)))
        }
        (PowerLawKind::Aniso(form), GroupKind::Torus(n)) => {
            let r = matched_radius(*n, extent.slots)?;
            let k = *n as f64 + 2.0 * a;
            if !(k < 0.0) {
                return Err(Error::Domain(format!("anisotropic tail diverges (n + s·p = {k})")));
            }
            let res = if *n == 3 { 96 } else { 1024 };
            let angular = sphere_integral(|x| quadratic(form, x).powf(a), *n, res)?;
            Ok(scale * r.powf(k) / -k * angular)
        }
        (kind, _) => Err(Error::Unsupported(format!(
            "no analytic tail for {kind:?} on {group}"
        ))),
    }
}
