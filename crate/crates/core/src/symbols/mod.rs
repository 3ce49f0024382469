//! Matrix-valued symbols `σ(x, [ξ])` on `G × Ĝ`.
//!
//! A [`MatrixSymbol`] evaluates to a [`Block`] at every dual element, optionally
//! depending on a point `x` of the group (given in the coordinates of
//! [`crate::quadrature::HaarGrid`]). The builtin families are the weights of the
//! Laplacian and sub-Laplacian, anisotropic lattice powers, separable variable
//! symbols, tabulated blocks and their sums, scalings and powers.

pub mod block;
pub mod calculus;
pub mod tabulated;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use block::Block;
pub use calculus::{hermitian_parts, matrix_abs, signed_parts, CMatrix};
pub use tabulated::TabulatedSymbol;

use crate::error::{Error, Result};
use crate::group::{CutoffMode, DualElement, GroupDescriptor, Label};

pub type ProfileFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type BlockFn = Arc<dyn Fn(Option<&[f64]>, &DualElement) -> Block + Send + Sync>;

/// Scalar function of the group point for separable symbols `f(x) τ(ξ)`.
#[derive(Clone)]
pub enum Profile {
    Constant(Complex64),
    /// `a + b cos(x₁)`.
    CosShift { a: f64, b: f64 },
    /// `sin²(x₁)`.
    SinSquared,
    Custom { name: String, f: ProfileFn },
}

impl Profile {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let x1 = x.first().copied().unwrap_or(0.0);
        match self {
            Profile::Constant(c) => *c,
            Profile::CosShift { a, b } => Complex64::new(a + b * x1.cos(), 0.0),
            Profile::SinSquared => Complex64::new(x1.sin().powi(2), 0.0),
            Profile::Custom { f, .. } => f(x),
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "const:{:?},{:?}", c.re, c.im),
            Profile::CosShift { a, b } => write!(f, "cos:{a:?},{b:?}"),
            Profile::SinSquared => f.write_str("sin2"),
            Profile::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

#[derive(Clone)]
pub enum Family {
    Zero,
    /// `<ξ>^s I_d`, the symbol of `(1 + L_G)^{s/2}`.
    BesselPower { s: f64 },
    /// `M(ξ)^s = diag((1 + nu_ii²)^{s/2})`.
    SubBesselPower { s: f64 },
    /// `q(k)^{s/2}` for a positive quadratic form `q` on the torus lattice, 0 at `k = 0`.
    AnisoTorus { form: DMatrix<f64>, s: f64, min_eigenvalue: f64 },
    Profile { profile: Profile, inner: Box<MatrixSymbol> },
    Scaled { factor: Complex64, inner: Box<MatrixSymbol> },
    Sum(Vec<MatrixSymbol>),
    /// Blockwise Hermitian power of a positive symbol.
    Power { base: Box<MatrixSymbol>, p: f64 },
    Tabulated(Arc<TabulatedSymbol>),
    Custom { name: String, eval: BlockFn, invariant: bool },
}

/// A global symbol with its declared decay order.
#[derive(Clone)]
pub struct MatrixSymbol {
    family: Family,
    order: f64,
}

impl fmt::Debug for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixSymbol({self}, order {})", self.order)
    }
}

/// Known power-law structure of a positive invariant symbol: the singular
/// values are `coefficient · (family weight)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub kind: PowerLawKind,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PowerLawKind {
    Bessel,
    SubBessel,
    Aniso(DMatrix<f64>),
}

impl MatrixSymbol {
    pub fn zero() -> Self {
        Self { family: Family::Zero, order: f64::NEG_INFINITY }
    }

    pub fn bessel_power(s: f64) -> Self {
        Self { family: Family::BesselPower { s }, order: s }
    }

    pub fn sub_bessel_power(s: f64) -> Self {
        Self { family: Family::SubBesselPower { s }, order: s }
    }

    /// `q(k)^{s/2}` with `q(k) = kᵀ A k`; `A` must be symmetric positive definite.
    pub fn aniso_torus(form: DMatrix<f64>, s: f64) -> Result<Self> {
        if form.nrows() != form.ncols() || form.nrows() == 0 {
            return Err(Error::Config("quadratic form must be a non-empty square matrix".into()));
        }
        if (&form - form.transpose()).abs().max() > 1e-14 * form.abs().max() {
            return Err(Error::Config("quadratic form must be symmetric".into()));
        }
        let min_eigenvalue = SymmetricEigen::new(form.clone()).eigenvalues.min();
        if !(min_eigenvalue > 0.0) {
            return Err(Error::Config(format!(
                "quadratic form is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            )));
        }
        Ok(Self {
            family: Family::AnisoTorus { form, s, min_eigenvalue },
            order: s,
        })
    }

    /// Separable variable symbol `f(x) τ(ξ)`.
    pub fn with_profile(profile: Profile, inner: MatrixSymbol) -> Self {
        let order = inner.order;
        Self {
            family: Family::Profile { profile, inner: Box::new(inner) },
            order,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            family: Family::Scaled { factor, inner: Box::new(self.clone()) },
            order: self.order,
        }
    }

    pub fn sum(terms: Vec<MatrixSymbol>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("sum of zero symbols".into()));
        }
        let order = terms.iter().map(|t| t.order).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { family: Family::Sum(terms), order })
    }

    pub fn tabulated(table: TabulatedSymbol) -> Self {
        let order = table.order();
        Self { family: Family::Tabulated(Arc::new(table)), order }
    }

    pub fn load_tabulated(group: &GroupDescriptor, path: &Path) -> Result<Self> {
        Ok(Self::tabulated(TabulatedSymbol::load(group, path)?))
    }

    pub fn custom(name: &str, order: f64, invariant: bool, eval: BlockFn) -> Self {
        Self {
            family: Family::Custom { name: name.to_string(), eval, invariant },
            order,
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn declared_order(&self) -> f64 {
        self.order
    }

    pub fn is_invariant(&self) -> bool {
        match &self.family {
            Family::Profile { profile, inner } => {
                matches!(profile, Profile::Constant(_)) && inner.is_invariant()
            }
            Family::Scaled { inner, .. } => inner.is_invariant(),
            Family::Power { base, .. } => base.is_invariant(),
            Family::Sum(ts) => ts.iter().all(|t| t.is_invariant()),
            Family::Custom { invariant, .. } => *invariant,
            _ => true,
        }
    }

    /// `σ(x, ξ)`; invariant symbols ignore `x`.
    pub fn eval(&self, group: &GroupDescriptor, x: Option<&[f64]>, e: &DualElement) -> Result<Block> {
        match &self.family {
            Family::Zero => Ok(Block::zero(e.d)),
            Family::BesselPower { s } => Ok(Block::real_scalar((1.0 + e.lambda).powf(0.5 * s), e.d)),
            Family::SubBesselPower { s } => Ok(Block::Diagonal(
                e.sub_diagonal(group)
                    .into_iter()
                    .map(|nu| Complex64::new((1.0 + nu).powf(0.5 * s), 0.0))
                    .collect(),
            )),
            Family::AnisoTorus { form, s, .. } => {
                let k = match &e.label {
                    Label::Lattice(k) if k.len() == form.nrows() => k,
                    other => {
                        return Err(Error::Config(format!(
                            "anisotropic lattice symbol of dimension {} evaluated at {other}",
                            form.nrows()
                        )))
                    }
                };
                if k.iter().all(|&v| v == 0) {
                    return Ok(Block::zero(1));
                }
                let mut q = 0.0;
                for i in 0..k.len() {
                    for j in 0..k.len() {
                        q += form[(i, j)] * (k[i] * k[j]) as f64;
                    }
                }
                Ok(Block::real_scalar(q.powf(0.5 * s), 1))
            }
            Family::Profile { profile, inner } => {
                let b = inner.eval(group, x, e)?;
                match x {
                    Some(x) => Ok(b.scale(profile.eval(x))),
                    None if matches!(profile, Profile::Constant(_)) => Ok(b.scale(profile.eval(&[]))),
                    None => Err(Error::Contract(
                        "variable symbol evaluated without a group point".into(),
                    )),
                }
            }
            Family::Scaled { factor, inner } => Ok(inner.eval(group, x, e)?.scale(*factor)),
            Family::Sum(ts) => {
                let mut acc = ts[0].eval(group, x, e)?;
                for t in &ts[1..] {
                    acc = acc.add(&t.eval(group, x, e)?)?;
                }
                Ok(acc)
            }
            Family::Power { base, p } => base.eval(group, x, e)?.power(*p),
            Family::Tabulated(t) => Ok(Block::Dense(t.block(&e.label)?.clone())),
            Family::Custom { eval, .. } => {
                let b = eval(x, e);
                if b.dim() != e.d {
                    return Err(Error::Contract(format!(
                        "custom symbol returned a {}x{} block at {} (d = {})",
                        b.dim(),
                        b.dim(),
                        e.label,
                        e.d
                    )));
                }
                Ok(b)
            }
        }
    }

    /// Power-law description for builtin positive families (and their positive
    /// scalings and powers).
    pub fn power_law(&self) -> Option<PowerLaw> {
        match &self.family {
            Family::BesselPower { s } => Some(PowerLaw { coefficient: 1.0, kind: PowerLawKind::Bessel, s: *s }),
            Family::SubBesselPower { s } => Some(PowerLaw { coefficient: 1.0, kind: PowerLawKind::SubBessel, s: *s }),
            Family::AnisoTorus { form, s, .. } => Some(PowerLaw {
                coefficient: 1.0,
                kind: PowerLawKind::Aniso(form.clone()),
                s: *s,
            }),
            Family::Scaled { factor, inner } if factor.im == 0.0 && factor.re > 0.0 => {
                inner.power_law().map(|mut law| {
                    law.coefficient *= factor.re;
                    law
                })
            }
            Family::Power { base, p } => base.power_law().map(|law| PowerLaw {
                coefficient: law.coefficient.powf(*p),
                kind: law.kind,
                s: law.s * p,
            }),
            _ => None,
        }
    }

    /// Upper bound on every singular value of blocks whose cutoff weight
    /// exceeds `cutoff`, when one is known.
    pub fn tail_sup(&self, group: &GroupDescriptor, cutoff: f64, mode: CutoffMode) -> Option<f64> {
        match &self.family {
            Family::Zero => Some(0.0),
            // nu_ii² <= lambda, so a subelliptic cutoff bounds <ξ> from below as well
            Family::BesselPower { s } if *s < 0.0 => Some(cutoff.powf(*s)),
            Family::SubBesselPower { s } if *s < 0.0 && mode == CutoffMode::Subelliptic => {
                Some(cutoff.powf(*s))
            }
            Family::SubBesselPower { s } if *s < 0.0 && !group.has_sub_system() => {
                Some(cutoff.powf(*s))
            }
            Family::AnisoTorus { s, min_eigenvalue, .. } if *s < 0.0 => {
                let r2 = cutoff * cutoff - 1.0;
                if r2 <= 0.0 {
                    None
                } else {
                    Some((min_eigenvalue * r2).powf(0.5 * s))
                }
            }
            Family::Scaled { factor, inner } => inner.tail_sup(group, cutoff, mode).map(|v| v * factor.norm()),
            Family::Power { base, p } => base.tail_sup(group, cutoff, mode).map(|v| v.powf(*p)),
            Family::Sum(ts) => ts
                .iter()
                .map(|t| t.tail_sup(group, cutoff, mode))
                .sum::<Option<f64>>(),
            _ => None,
        }
    }

    /// Parse a symbol description.
    ///
    /// Grammar: `zero`, `bessel:s`, `sub:s`, `aniso:a11,a12,a22:s` (upper
    /// triangle, row-major; 1, 3 or 6 entries), `tab:path`, and the prefixes
    /// `scale:re,im*X`, `pow:p*X`, `cos:a,b*X`, `sin2*X`; terms joined with `&` are
    /// summed.
    pub fn parse(spec: &str, group: &GroupDescriptor) -> Result<Self> {
        let spec = spec.trim();
        if spec.contains('&') {
            let terms = spec
                .split('&')
                .map(|t| Self::parse(t, group))
                .collect::<Result<Vec<_>>>()?;
            return Self::sum(terms);
        }
        let bad = |why: &str| Error::Config(format!("invalid symbol '{spec}': {why}"));
        let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number"))) };
        let pair = |s: &str| -> Result<(f64, f64)> {
            let (a, b) = s.split_once(',').ok_or_else(|| bad("expected two comma-separated numbers"))?;
            Ok((num(a)?, num(b)?))
        };
        if let Some((head, inner)) = spec.split_once('*') {
            let inner = Self::parse(inner, group)?;
            if let Some(v) = head.strip_prefix("scale:") {
                let (re, im) = pair(v)?;
                return Ok(inner.scaled(Complex64::new(re, im)));
            }
            if let Some(v) = head.strip_prefix("pow:") {
                return symbol_power(&inner, num(v)?);
            }
            if let Some(v) = head.strip_prefix("cos:") {
                let (a, b) = pair(v)?;
                return Ok(Self::with_profile(Profile::CosShift { a, b }, inner));
            }
            if head == "sin2" {
                return Ok(Self::with_profile(Profile::SinSquared, inner));
            }
            return Err(bad("unknown modifier"));
        }
        if spec == "zero" {
            return Ok(Self::zero());
        }
        if let Some(v) = spec.strip_prefix("bessel:") {
            return Ok(Self::bessel_power(num(v)?));
        }
        if let Some(v) = spec.strip_prefix("sub:") {
            return Ok(Self::sub_bessel_power(num(v)?));
        }
        if let Some(v) = spec.strip_prefix("aniso:") {
            let (entries, s) = v.rsplit_once(':').ok_or_else(|| bad("expected aniso:FORM:s"))?;
            let upper = entries.split(',').map(num).collect::<Result<Vec<_>>>()?;
            let n = match upper.len() {
                1 => 1,
                3 => 2,
                6 => 3,
                _ => return Err(bad("form needs 1, 3 or 6 upper-triangle entries")),
            };
            let mut form = DMatrix::zeros(n, n);
            let mut it = upper.into_iter();
            for i in 0..n {
                for j in i..n {
                    let v = it.next().unwrap();
                    form[(i, j)] = v;
                    form[(j, i)] = v;
                }
            }
            return Self::aniso_torus(form, num(s)?);
        }
        if let Some(path) = spec.strip_prefix("tab:") {
            return Self::load_tabulated(group, Path::new(path));
        }
        Err(bad("unknown family"))
    }
}

impl fmt::Display for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Zero => f.write_str("zero"),
            Family::BesselPower { s } => write!(f, "bessel:{s:?}"),
            Family::SubBesselPower { s } => write!(f, "sub:{s:?}"),
            Family::AnisoTorus { form, s, .. } => {
                f.write_str("aniso:")?;
                let n = form.nrows();
                let mut first = true;
                for i in 0..n {
                    for j in i..n {
                        if !first {
                            f.write_str(",")?;
                        }
                        first = false;
                        write!(f, "{:?}", form[(i, j)])?;
                    }
                }
                write!(f, ":{s:?}")
            }
            Family::Profile { profile, inner } => match profile {
                Profile::CosShift { .. } | Profile::SinSquared => write!(f, "{profile}*{inner}"),
                _ => write!(f, "[{profile}]*{inner}"),
            },
            Family::Scaled { factor, inner } => write!(f, "scale:{:?},{:?}*{inner}", factor.re, factor.im),
            Family::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("&")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Family::Power { base, p } => write!(f, "pow:{p:?}*{base}"),
            Family::Tabulated(t) => write!(f, "tab:{}", t.source()),
            Family::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

/// Blockwise Hermitian power `σ^p` of a positive invariant symbol.
pub fn symbol_power(sigma: &MatrixSymbol, p: f64) -> Result<MatrixSymbol> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("symbol power needs finite p > 0, got {p}")));
    }
    Ok(MatrixSymbol {
        family: Family::Power { base: Box::new(sigma.clone()), p },
        order: sigma.order * p,
    })
}

/// `σ ~ Σ_k σ_k` with strictly decreasing orders.
#[derive(Debug, Clone)]
pub struct HomogeneousExpansion {
    components: Vec<(f64, MatrixSymbol)>,
}

impl HomogeneousExpansion {
    pub fn new(components: Vec<(f64, MatrixSymbol)>) -> Result<Self> {
        for w in components.windows(2) {
            if !(w[1].0 < w[0].0) {
                return Err(Error::Config(format!(
                    "expansion orders must strictly decrease, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, MatrixSymbol)] {
        &self.components
    }

    /// The full symbol: sum of all components.
    pub fn full_symbol(&self) -> Result<MatrixSymbol> {
        MatrixSymbol::sum(self.components.iter().map(|(_, s)| s.clone()).collect())
    }
}

/// The leading (principal) component, unchanged.
pub fn principal_component(e: &HomogeneousExpansion) -> Result<MatrixSymbol> {
    e.components
        .first()
        .map(|(_, s)| s.clone())
        .ok_or_else(|| Error::Config("principal component of an empty expansion".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_dual, make_group};

    fn element(g: &GroupDescriptor, label: &str, mode: CutoffMode) -> DualElement {
        g.element(g.parse_label(label).unwrap(), mode)
    }

    #[test]
    fn bessel_on_torus() {
        let g = make_group("torus:1").unwrap();
        let b = MatrixSymbol::bessel_power(-1.0).eval(&g, None, &element(&g, "2", CutoffMode::Elliptic)).unwrap();
        match b {
            Block::Scalar { value, dim } => {
                assert_eq!(dim, 1);
                assert!((value.re - 0.447213595499958).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sub_bessel_on_su2() {
        let g = make_group("su2:sub").unwrap();
        for mode in [CutoffMode::Elliptic, CutoffMode::Subelliptic] {
            let b = MatrixSymbol::sub_bessel_power(-4.0).eval(&g, None, &element(&g, "1", mode)).unwrap();
            let expect = [0.25, 1.0 / 9.0, 0.25];
            match b {
                Block::Diagonal(v) => {
                    for (z, e) in v.iter().zip(expect) {
                        assert!((z.re - e).abs() < 1e-15);
                    }
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn aniso_examples() {
        let g = make_group("torus:2").unwrap();
        let sym = MatrixSymbol::parse("aniso:1,0,2:-2", &g).unwrap();
        let b = sym.eval(&g, None, &element(&g, "1,1", CutoffMode::Elliptic)).unwrap();
        assert!((b.trace().re - 1.0 / 3.0).abs() < 1e-15);
        let origin = sym.eval(&g, None, &element(&g, "0,0", CutoffMode::Elliptic)).unwrap();
        assert!(origin.is_zero());
        assert!(MatrixSymbol::parse("aniso:1,2,1:-2", &g).is_err());
        let wrong_dim = make_group("torus:1").unwrap();
        let e = element(&wrong_dim, "1", CutoffMode::Elliptic);
        assert!(sym.eval(&wrong_dim, None, &e).is_err());
    }

    #[test]
    fn power_matches_family_exponent() {
        let g = make_group("su2").unwrap();
        let sq = symbol_power(&MatrixSymbol::bessel_power(-1.0), 2.0).unwrap();
        let direct = MatrixSymbol::bessel_power(-2.0);
        assert_eq!(sq.declared_order(), -2.0);
        for e in enumerate_dual(&g, 6.0, CutoffMode::Elliptic).unwrap() {
            let a = sq.eval(&g, None, &e).unwrap().to_dense();
            let b = direct.eval(&g, None, &e).unwrap().to_dense();
            assert!(calculus::frobenius(&(a - b)) < 1e-14);
        }
        let neg = MatrixSymbol::bessel_power(-1.0).scaled(Complex64::new(-1.0, 0.0));
        let e = element(&g, "0", CutoffMode::Elliptic);
        assert!(matches!(symbol_power(&neg, 2.0).unwrap().eval(&g, None, &e), Err(Error::Positivity(_))));
    }

    #[test]
    fn spec_strings_round_trip() {
        let g = make_group("torus:2").unwrap();
        for s in ["bessel:-1.0", "sub:-4.0", "scale:-1.0,0.0*bessel:-2.0", "cos:2.0,1.0*bessel:-1.0", "bessel:-2.0&bessel:-3.0", "aniso:1.0,0.0,2.0:-2.0", "pow:0.5*bessel:-2.0"] {
            let sym = MatrixSymbol::parse(s, &g).unwrap();
            assert_eq!(sym.to_string(), s);
        }
        assert!(MatrixSymbol::parse("gauss:1", &g).is_err());
        assert!(!MatrixSymbol::parse("sin2*bessel:-1", &g).unwrap().is_invariant());
    }

    #[test]
    fn principal_component_examples() {
        let e = HomogeneousExpansion::new(vec![
            (-2.0, MatrixSymbol::bessel_power(-2.0)),
            (-3.0, MatrixSymbol::bessel_power(-3.0)),
        ])
        .unwrap();
        assert_eq!(principal_component(&e).unwrap().declared_order(), -2.0);
        let single = HomogeneousExpansion::new(vec![(-4.0, MatrixSymbol::sub_bessel_power(-4.0))]).unwrap();
        assert_eq!(principal_component(&single).unwrap().to_string(), "sub:-4.0");
        let empty = HomogeneousExpansion::new(vec![]).unwrap();
        assert!(matches!(principal_component(&empty), Err(Error::Config(_))));
        assert!(HomogeneousExpansion::new(vec![
            (-3.0, MatrixSymbol::bessel_power(-3.0)),
            (-2.0, MatrixSymbol::bessel_power(-2.0)),
        ])
        .is_err());
    }

    #[test]
    fn power_law_tracks_scaling() {
        let s = symbol_power(&MatrixSymbol::bessel_power(-1.0).scaled(Complex64::new(2.0, 0.0)), 1.5).unwrap();
        let law = s.power_law().unwrap();
        assert!((law.coefficient - 2f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(law.s, -1.5);
        assert!(MatrixSymbol::bessel_power(-1.0).scaled(Complex64::new(-1.0, 0.0)).power_law().is_none());
    }
}
