//! Compact groups and their unitary duals.
//!
//! Supported groups are tori `T^n = R^n / 2πZ^n`, `SU(2)` (optionally with the
//! two-generator sub-Riemannian system `{X1, X2}`), and finite products of
//! those. Every representation class carries its dimension `d`, the Laplace
//! eigenvalue `lambda`, and the elliptic weight `sqrt(1 + lambda)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Torus(usize),
    /// `sub = true` attaches the system `{X1, X2}` (sub-Laplacian `-X1² - X2²`).
    Su2 { sub: bool },
    Product(Vec<GroupDescriptor>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    pub kind: GroupKind,
    pub dim: usize,
    pub hausdorff_dim: usize,
}

/// Which weight the dual cutoff `N` is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CutoffMode {
    /// `<xi> = sqrt(1 + lambda) <= N`.
    #[default]
    Elliptic,
    /// `min_i sqrt(1 + nu_ii²) <= N`, the smallest diagonal entry of `M(xi)`.
    Subelliptic,
}

impl FromStr for CutoffMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(CutoffMode::Elliptic),
            "subelliptic" | "sub" => Ok(CutoffMode::Subelliptic),
            other => Err(Error::Config(format!("unknown cutoff mode '{other}'"))),
        }
    }
}

impl fmt::Display for CutoffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutoffMode::Elliptic => "elliptic",
            CutoffMode::Subelliptic => "subelliptic",
        })
    }
}

impl GroupDescriptor {
    pub fn torus(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("torus dimension must be at least 1".into()));
        }
        Ok(Self {
            kind: GroupKind::Torus(n),
            dim: n,
            hausdorff_dim: n,
        })
    }

    pub fn su2() -> Self {
        Self {
            kind: GroupKind::Su2 { sub: false },
            dim: 3,
            hausdorff_dim: 3,
        }
    }

    /// SU(2) with the Hörmander system `{X1, X2}`: step 2, so
    /// `Q = dim H¹ + 2 (dim H² - dim H¹) = 2 + 2 = 4`.
    pub fn su2_sub() -> Self {
        let (h1, h2) = (2, 3);
        Self {
            kind: GroupKind::Su2 { sub: true },
            dim: 3,
            hausdorff_dim: h1 + 2 * (h2 - h1),
        }
    }

    pub fn product(factors: Vec<GroupDescriptor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("product needs at least one factor".into()));
        }
        // flatten nested products
        let mut flat = Vec::new();
        for f in factors {
            match f.kind {
                GroupKind::Product(inner) => flat.extend(inner),
                _ => flat.push(f),
            }
        }
        if flat.len() == 1 {
            return Ok(flat.pop().unwrap());
        }
        let dim = flat.iter().map(|f| f.dim).sum();
        let hausdorff_dim = flat.iter().map(|f| f.hausdorff_dim).sum();
        Ok(Self {
            kind: GroupKind::Product(flat),
            dim,
            hausdorff_dim,
        })
    }

    /// True when a sub-Riemannian system is attached somewhere (Q > dim).
    pub fn has_sub_system(&self) -> bool {
        match &self.kind {
            GroupKind::Torus(_) => false,
            GroupKind::Su2 { sub } => *sub,
            GroupKind::Product(fs) => fs.iter().any(|f| f.has_sub_system()),
        }
    }

    /// Diagonal of the sub-Laplacian symbol at `label`. Groups without an
    /// attached system use the Laplacian, so every entry equals `lambda`.
    pub fn sub_weight_sq(&self, label: &Label) -> Vec<f64> {
        match (&self.kind, label) {
            (GroupKind::Torus(_), Label::Lattice(k)) => vec![lattice_norm_sq(k)],
            (GroupKind::Su2 { sub }, Label::Spin(two_l)) => {
                let d = *two_l as usize + 1;
                let lambda = spin_casimir(*two_l);
                if *sub {
                    su2_sub_weight_sq(*two_l)
                } else {
                    vec![lambda; d]
                }
            }
            (GroupKind::Product(fs), Label::Product(ls)) => {
                let mut acc = vec![0.0];
                for (f, l) in fs.iter().zip(ls) {
                    let part = f.sub_weight_sq(l);
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for b in &part {
                            next.push(a + b);
                        }
                    }
                    acc = next;
                }
                acc
            }
            _ => panic!("label {label} does not belong to group {self}"),
        }
    }

    pub fn parse_label(&self, s: &str) -> Result<Label> {
        let s = s.trim();
        let bad = || Error::Config(format!("invalid label '{s}' for group {self}"));
        match &self.kind {
            GroupKind::Torus(n) => {
                let k: std::result::Result<Vec<i64>, _> =
                    s.split(',').map(|t| t.trim().parse::<i64>()).collect();
                let k = k.map_err(|_| bad())?;
                if k.len() != *n {
                    return Err(bad());
                }
                Ok(Label::Lattice(k))
            }
            GroupKind::Su2 { .. } => {
                let two_l = if let Some((num, den)) = s.split_once('/') {
                    let num: u32 = num.trim().parse().map_err(|_| bad())?;
                    if den.trim() != "2" || num.is_multiple_of(2) {
                        return Err(bad());
                    }
                    num
                } else {
                    let l: u32 = s.parse().map_err(|_| bad())?;
                    2 * l
                };
                Ok(Label::Spin(two_l))
            }
            GroupKind::Product(fs) => {
                let parts: Vec<&str> = s.split('|').collect();
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                let labels = fs
                    .iter()
                    .zip(parts)
                    .map(|(f, p)| f.parse_label(p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Label::Product(labels))
            }
        }
    }

    /// Whether `label` indexes a representation of this group.
    pub fn owns_label(&self, label: &Label) -> bool {
        match (&self.kind, label) {
            (GroupKind::Torus(n), Label::Lattice(k)) => k.len() == *n,
            (GroupKind::Su2 { .. }, Label::Spin(_)) => true,
            (GroupKind::Product(fs), Label::Product(ls)) => {
                fs.len() == ls.len() && fs.iter().zip(ls).all(|(f, l)| f.owns_label(l))
            }
            _ => false,
        }
    }

    /// Build the dual element for a label (no cutoff check).
    pub fn element(&self, label: Label, mode: CutoffMode) -> DualElement {
        let (d, lambda) = self.dim_and_lambda(&label);
        let sub_weight_sq = match mode {
            CutoffMode::Elliptic => None,
            CutoffMode::Subelliptic => Some(self.sub_weight_sq(&label)),
        };
        DualElement {
            label,
            d,
            lambda,
            weight: (1.0 + lambda).sqrt(),
            sub_weight_sq,
        }
    }

    fn dim_and_lambda(&self, label: &Label) -> (usize, f64) {
        match (&self.kind, label) {
            (GroupKind::Torus(_), Label::Lattice(k)) => (1, lattice_norm_sq(k)),
            (GroupKind::Su2 { .. }, Label::Spin(two_l)) => {
                (*two_l as usize + 1, spin_casimir(*two_l))
            }
            (GroupKind::Product(fs), Label::Product(ls)) => {
                fs.iter().zip(ls).fold((1, 0.0), |(d, lam), (f, l)| {
                    let (df, lf) = f.dim_and_lambda(l);
                    (d * df, lam + lf)
                })
            }
            _ => panic!("label {label} does not belong to group {self}"),
        }
    }

    /// Smallest cutoff-weight squared minus one, i.e. `lambda` (elliptic) or
    /// `min_i nu_ii²` (subelliptic), computed without materialising the diagonal.
    fn cutoff_lambda(&self, label: &Label, mode: CutoffMode) -> f64 {
        match (&self.kind, label, mode) {
            (_, _, CutoffMode::Elliptic) => self.dim_and_lambda(label).1,
            (GroupKind::Torus(_), Label::Lattice(k), _) => lattice_norm_sq(k),
            (GroupKind::Su2 { sub }, Label::Spin(two_l), _) => {
                if *sub {
                    0.5 * f64::from(*two_l)
                } else {
                    spin_casimir(*two_l)
                }
            }
            (GroupKind::Product(fs), Label::Product(ls), _) => fs
                .iter()
                .zip(ls)
                .map(|(f, l)| f.cutoff_lambda(l, mode))
                .sum(),
            _ => panic!("label {label} does not belong to group {self}"),
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroupKind::Torus(n) => write!(f, "torus:{n}"),
            GroupKind::Su2 { sub: false } => f.write_str("su2"),
            GroupKind::Su2 { sub: true } => f.write_str("su2:sub"),
            GroupKind::Product(fs) => {
                f.write_str("product:")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    /// Accepts `torus:n`, `su2`, `su2:sub` and `product:spec,spec,...`.
    fn from_str(s: &str) -> Result<Self> {
        make_group(s)
    }
}

pub fn make_group(spec: &str) -> Result<GroupDescriptor> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("product:") {
        let factors = rest
            .split(',')
            .map(make_group)
            .collect::<Result<Vec<_>>>()?;
        return GroupDescriptor::product(factors);
    }
    match spec {
        "su2" => Ok(GroupDescriptor::su2()),
        "su2:sub" => Ok(GroupDescriptor::su2_sub()),
        _ => {
            if let Some(n) = spec.strip_prefix("torus:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid torus dimension in '{spec}'")))?;
                GroupDescriptor::torus(n)
            } else {
                Err(Error::Config(format!("unsupported group '{spec}'")))
            }
        }
    }
}

/// Index of a point of the dual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// `k ∈ Z^n`, character `e^{i k·x}`.
    Lattice(Vec<i64>),
    /// Twice the spin, so half-integers stay exact.
    Spin(u32),
    Product(Vec<Label>),
}

impl Label {
    pub fn spin(&self) -> Option<f64> {
        match self {
            Label::Spin(two_l) => Some(0.5 * f64::from(*two_l)),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Lattice(k) => {
                for (i, v) in k.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Label::Spin(two_l) if two_l % 2 == 0 => write!(f, "{}", two_l / 2),
            Label::Spin(two_l) => write!(f, "{two_l}/2"),
            Label::Product(ls) => {
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "{l}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualElement {
    pub label: Label,
    pub d: usize,
    pub lambda: f64,
    /// `sqrt(1 + lambda)`.
    pub weight: f64,
    /// Diagonal `nu_ii²` of the sub-Laplacian symbol; filled in subelliptic mode.
    pub sub_weight_sq: Option<Vec<f64>>,
}

impl DualElement {
    /// The weight the cutoff is compared against in `mode`.
    pub fn cutoff_weight(&self, group: &GroupDescriptor, mode: CutoffMode) -> f64 {
        match mode {
            CutoffMode::Elliptic => self.weight,
            CutoffMode::Subelliptic => match &self.sub_weight_sq {
                Some(nu) => (1.0 + nu.iter().cloned().fold(f64::INFINITY, f64::min)).sqrt(),
                None => (1.0 + group.cutoff_lambda(&self.label, mode)).sqrt(),
            },
        }
    }

    /// Diagonal of the sub-Laplacian symbol, computing it when not cached.
    pub fn sub_diagonal(&self, group: &GroupDescriptor) -> Vec<f64> {
        match &self.sub_weight_sq {
            Some(v) => v.clone(),
            None => group.sub_weight_sq(&self.label),
        }
    }
}

/// `l(l+1)` for spin `l = two_l / 2`, exact in binary floating point.
pub fn spin_casimir(two_l: u32) -> f64 {
    let t = f64::from(two_l);
    t * (t + 2.0) / 4.0
}

/// `l(l+1) - m²` for `m = -l, ..., l`.
pub fn su2_sub_weight_sq(two_l: u32) -> Vec<f64> {
    let casimir = spin_casimir(two_l);
    (0..=two_l)
        .map(|j| {
            let two_m = 2.0 * f64::from(j) - f64::from(two_l);
            casimir - two_m * two_m / 4.0
        })
        .collect()
}

fn lattice_norm_sq(k: &[i64]) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum()
}

/// A fixed partition of the dual slice `{cutoff weight <= N}` into chunks.
///
/// Chunks are listed in ascending lexicographic label order of their first
/// coordinate; reductions that fold chunk results in this order are
/// deterministic regardless of thread count.
type ProductParts = (Vec<DualElement>, Vec<DualElement>, GroupDescriptor);

#[derive(Debug, Clone)]
pub struct DualSlice {
    group: GroupDescriptor,
    cutoff: f64,
    mode: CutoffMode,
    chunks: Vec<Chunk>,
    /// Factor slices for product groups: first factor and the remaining product.
    product_parts: Option<Box<ProductParts>>,
}

#[derive(Debug, Clone, Copy)]
enum Chunk {
    /// Torus: all lattice points with first coordinate in `[lo, hi]`.
    Lattice { lo: i64, hi: i64 },
    /// SU(2): spins with `two_l` in `[lo, hi]`.
    Spins { lo: u32, hi: u32 },
    /// Product: first-factor element `index` combined with the rest.
    ProductHead { index: usize },
}

const SPIN_CHUNK: u32 = 64;
const LINE_CHUNK: i64 = 4096;

impl DualSlice {
    pub fn new(group: &GroupDescriptor, cutoff: f64, mode: CutoffMode) -> Result<Self> {
        if !(cutoff >= 1.0) || !cutoff.is_finite() {
            return Err(Error::Config(format!("dual cutoff must be a finite number >= 1, got {cutoff}")));
        }
        // every element has cutoff weight >= 1; lambda bound is N² - 1
        let lambda_max = cutoff * cutoff - 1.0;
        let mut product_parts = None;
        let chunks = match &group.kind {
            GroupKind::Torus(n) => {
                let kmax = lambda_max.sqrt().floor() as i64 + 1;
                if *n == 1 {
                    let mut v = Vec::new();
                    let mut lo = -kmax;
                    while lo <= kmax {
                        let hi = (lo + LINE_CHUNK - 1).min(kmax);
                        v.push(Chunk::Lattice { lo, hi });
                        lo = hi + 1;
                    }
                    v
                } else {
                    (-kmax..=kmax).map(|k| Chunk::Lattice { lo: k, hi: k }).collect()
                }
            }
            GroupKind::Su2 { sub } => {
                let two_l_max = match (mode, sub) {
                    (CutoffMode::Subelliptic, true) => (2.0 * lambda_max).floor() as u32 + 1,
                    _ => (2.0 * lambda_max.sqrt()).floor() as u32 + 1,
                };
                let mut v = Vec::new();
                let mut lo = 0;
                while lo <= two_l_max {
                    let hi = (lo + SPIN_CHUNK - 1).min(two_l_max);
                    v.push(Chunk::Spins { lo, hi });
                    lo = hi + 1;
                }
                v
            }
            GroupKind::Product(fs) => {
                let mut head = enumerate_dual(&fs[0], cutoff, mode)?;
                let rest_group = GroupDescriptor::product(fs[1..].to_vec())?;
                let mut rest = enumerate_dual(&rest_group, cutoff, mode)?;
                head.sort_by(|a, b| a.label.cmp(&b.label));
                rest.sort_by(|a, b| a.label.cmp(&b.label));
                let chunks = (0..head.len()).map(|index| Chunk::ProductHead { index }).collect();
                product_parts = Some(Box::new((head, rest, rest_group)));
                chunks
            }
        };
        Ok(Self {
            group: group.clone(),
            cutoff,
            mode,
            chunks,
            product_parts,
        })
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn mode(&self) -> CutoffMode {
        self.mode
    }

    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    /// Elements of chunk `i`, lexicographic by label, all within the cutoff.
    pub fn chunk_elements(&self, i: usize) -> Vec<DualElement> {
        let mut out = Vec::new();
        self.visit_chunk(i, |e| out.push(e));
        out
    }

    /// Stream the elements of chunk `i` in lexicographic label order.
    pub fn visit_chunk<F: FnMut(DualElement)>(&self, i: usize, mut f: F) {
        let g = &self.group;
        let accept = |e: &DualElement| e.cutoff_weight(g, self.mode) <= self.cutoff;
        match self.chunks[i] {
            Chunk::Lattice { lo, hi } => {
                let n = match g.kind {
                    GroupKind::Torus(n) => n,
                    _ => unreachable!(),
                };
                let budget = self.cutoff * self.cutoff - 1.0;
                let mut k = vec![0i64; n];
                for first in lo..=hi {
                    k[0] = first;
                    let used = (first * first) as f64;
                    if used > budget + 1.0 {
                        continue;
                    }
                    visit_lattice(&mut k, 1, used, budget, &mut |k| {
                        let e = g.element(Label::Lattice(k.to_vec()), self.mode);
                        if accept(&e) {
                            f(e);
                        }
                    });
                }
            }
            Chunk::Spins { lo, hi } => {
                for two_l in lo..=hi {
                    let label = Label::Spin(two_l);
                    let w = (1.0 + g.cutoff_lambda(&label, self.mode)).sqrt();
                    if w <= self.cutoff {
                        f(g.element(label, self.mode));
                    }
                }
            }
            Chunk::ProductHead { index } => {
                let parts = self.product_parts.as_ref().expect("product slice");
                let (head, rest, rest_group) = (&parts.0, &parts.1, &parts.2);
                let h = &head[index];
                for r in rest {
                    let mut labels = vec![h.label.clone()];
                    match &r.label {
                        Label::Product(ls) if matches!(rest_group.kind, GroupKind::Product(_)) => {
                            labels.extend(ls.iter().cloned())
                        }
                        other => labels.push(other.clone()),
                    }
                    let label = Label::Product(labels);
                    let w = (1.0 + g.cutoff_lambda(&label, self.mode)).sqrt();
                    if w <= self.cutoff {
                        f(g.element(label, self.mode));
                    }
                }
            }
        }
    }
}

fn visit_lattice<F: FnMut(&[i64])>(k: &mut [i64], pos: usize, used: f64, budget: f64, f: &mut F) {
    if pos == k.len() {
        f(k);
        return;
    }
    let room = (budget - used).max(0.0);
    let kmax = room.sqrt().floor() as i64 + 1;
    for v in -kmax..=kmax {
        let u = used + (v * v) as f64;
        if u > budget + 1.0 {
            continue;
        }
        k[pos] = v;
        visit_lattice(k, pos + 1, u, budget, f);
    }
}

fn order_elements(a: &DualElement, b: &DualElement, g: &GroupDescriptor, mode: CutoffMode) -> Ordering {
    a.cutoff_weight(g, mode)
        .total_cmp(&b.cutoff_weight(g, mode))
        .then_with(|| a.label.cmp(&b.label))
}

/// All dual elements within the cutoff, ascending by (cutoff weight, label).
pub fn enumerate_dual(group: &GroupDescriptor, cutoff: f64, mode: CutoffMode) -> Result<Vec<DualElement>> {
    let slice = DualSlice::new(group, cutoff, mode)?;
    let mut out = Vec::new();
    for i in 0..slice.chunk_count() {
        slice.visit_chunk(i, |e| out.push(e));
    }
    out.sort_by(|a, b| order_elements(a, b, group, mode));
    Ok(out)
}

/// Number of singular-value slots `sum d²` over the elliptic slice `<xi> <= N`.
pub fn dual_count(group: &GroupDescriptor, cutoff: f64) -> Result<u64> {
    let slice = DualSlice::new(group, cutoff, CutoffMode::Elliptic)?;
    let mut total = 0u64;
    for i in 0..slice.chunk_count() {
        slice.visit_chunk(i, |e| total += (e.d * e.d) as u64);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_examples() {
        let t2 = make_group("torus:2").unwrap();
        assert_eq!((t2.dim, t2.hausdorff_dim), (2, 2));
        let s = make_group("su2:sub").unwrap();
        assert_eq!((s.dim, s.hausdorff_dim), (3, 4));
        let p = make_group("product:torus:1,su2").unwrap();
        assert_eq!(p.dim, 4);
        assert_eq!(p.to_string(), "product:torus:1,su2");
        assert!(make_group("so3").unwrap_err().is_config());
        assert!(make_group("torus:0").is_err());
    }

    #[test]
    fn torus1_slice() {
        let g = make_group("torus:1").unwrap();
        let els = enumerate_dual(&g, 2.0, CutoffMode::Elliptic).unwrap();
        let labels: Vec<String> = els.iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["0", "-1", "1"]);
        assert!((els[1].weight - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn su2_slice() {
        let g = GroupDescriptor::su2();
        let els = enumerate_dual(&g, 2.0, CutoffMode::Elliptic).unwrap();
        let spins: Vec<f64> = els.iter().map(|e| e.label.spin().unwrap()).collect();
        assert_eq!(spins, [0.0, 0.5, 1.0]);
        let dims: Vec<usize> = els.iter().map(|e| e.d).collect();
        assert_eq!(dims, [1, 2, 3]);
    }

    #[test]
    fn su2_sub_diagonal() {
        assert_eq!(su2_sub_weight_sq(2), vec![1.0, 2.0, 1.0]);
        for two_l in 0..40u32 {
            let nu = su2_sub_weight_sq(two_l);
            let d = (two_l + 1) as f64;
            let sum: f64 = nu.iter().sum();
            assert!(nu.iter().all(|&v| v >= 0.0));
            assert!((sum - 2.0 / 3.0 * d * spin_casimir(two_l)).abs() < 1e-9 * (1.0 + sum));
        }
    }

    #[test]
    fn counts() {
        assert_eq!(dual_count(&make_group("torus:1").unwrap(), 2.0).unwrap(), 3);
        assert_eq!(dual_count(&GroupDescriptor::su2(), 2.0).unwrap(), 14);
        assert_eq!(dual_count(&make_group("torus:2").unwrap(), 2.0).unwrap(), 9);
    }

    #[test]
    fn subelliptic_su2_cutoff_uses_min_diagonal() {
        let g = GroupDescriptor::su2_sub();
        // sqrt(1 + l) <= 2  <=>  l <= 3
        let els = enumerate_dual(&g, 2.0, CutoffMode::Subelliptic).unwrap();
        assert_eq!(els.last().unwrap().label, Label::Spin(6));
        assert_eq!(els.len(), 7);
        assert!(els.iter().all(|e| e.sub_weight_sq.as_ref().unwrap().len() == e.d));
    }

    #[test]
    fn product_elements_combine() {
        let g = make_group("product:torus:1,su2").unwrap();
        let els = enumerate_dual(&g, 2.0, CutoffMode::Elliptic).unwrap();
        for e in &els {
            assert!(e.weight <= 2.0);
            assert!((e.weight * e.weight - 1.0 - e.lambda).abs() < 1e-12);
        }
        // lambda(±1, 1/2) = 1.75, lambda(1, 1) = 3 sits on the boundary
        let labels: Vec<String> = els.iter().map(|e| e.label.to_string()).collect();
        assert!(labels.contains(&"-1|1/2".to_string()));
        assert!(labels.contains(&"1|1".to_string()));
        assert!(!labels.contains(&"0|3/2".to_string()));
    }

    #[test]
    fn label_round_trip() {
        let g = make_group("product:torus:2,su2").unwrap();
        let l = g.parse_label("1,-2|3/2").unwrap();
        assert_eq!(l.to_string(), "1,-2|3/2");
        assert!(g.parse_label("1|3/2").is_err());
        assert!(GroupDescriptor::su2().parse_label("2/2").is_err());
    }
}
