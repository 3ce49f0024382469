use std::f64::consts::PI;

use nctrace::estimators::*;
use nctrace::quadrature::{haar_grid, HaarGrid};
use nctrace::symbols::MatrixSymbol;
use nctrace::{make_group, CutoffMode, Error};
use num_complex::Complex64;

fn sym(spec: &str, group: &str) -> (MatrixSymbol, nctrace::GroupDescriptor) {
    let g = make_group(group).unwrap();
    (MatrixSymbol::parse(spec, &g).unwrap(), g)
}

fn e1(spec: &str, group: &str, cutoff: f64, mode: CutoffMode) -> TraceEstimate {
    let (s, g) = sym(spec, group);
    let sp = singular_spectrum(&s, &g, cutoff, mode).unwrap();
    let cps = Schedule::default().index_checkpoints(sp.len()).unwrap();
    dixmier_limit(alpha_sequence(&sp, &cps).unwrap(), DEFAULT_FIT_POINTS, EstimatorKind::E1, Normalization::Index).unwrap()
}

fn e3(spec: &str, group: &str, cutoff: f64, mode: CutoffMode, normalization: Normalization) -> TraceEstimate {
    let (s, g) = sym(spec, group);
    let opts = NormOptions { normalization, ..Default::default() };
    symbol_l1inf_norm(&s, &g, cutoff, mode, &opts).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn harmonic_spectrum_has_unit_trace() {
    let prov = SpectrumProvenance { mode: CutoffMode::Elliptic, cutoff: 1.0, threshold: None };
    let sp = SingularSpectrum::from_pairs((1..=1_000_000u64).map(|j| (1.0 / j as f64, 1)), prov).unwrap();
    let cps: Vec<u64> = (0..8).map(|k| 1_000_000 >> (7 - k)).collect();
    let est = dixmier_limit(alpha_sequence(&sp, &cps).unwrap(), 4, EstimatorKind::E1, Normalization::Index).unwrap();
    assert!((est.value.re - 1.0).abs() < 0.01, "{}", est.value);

    let sq = SingularSpectrum::from_pairs((1..=1_000_000u64).map(|j| ((j as f64).powi(-2), 1)), prov).unwrap();
    let est = dixmier_limit(alpha_sequence(&sq, &cps).unwrap(), 4, EstimatorKind::E1, Normalization::Index).unwrap();
    assert!(est.value.re.abs() < 0.05, "{}", est.value);
}

#[test]
fn torus1_all_estimators_near_two() {
    let a = e1("bessel:-1", "torus:1", 1e5, CutoffMode::Elliptic);
    assert!(rel(a.value.re, 2.0) < 0.01, "{}", a.value);
    for norm in [Normalization::Index, Normalization::Weight] {
        let b = e3("bessel:-1", "torus:1", 1e5, CutoffMode::Elliptic, norm);
        assert!(rel(b.value.re, 2.0) < 0.01, "{norm}: {}", b.value);
        assert_eq!(b.normalization, norm);
    }
    let (s, g) = sym("bessel:-1", "torus:1");
    let c = cm_limit(&s, &g, 10, TailMode::PowerTail, 1000.0, CutoffMode::Elliptic).unwrap();
    assert!(rel(c.value.re, 2.0) < 0.02, "{}", c.value);
    assert_eq!(c.estimator, EstimatorKind::E2);
}

#[test]
fn cm_trace_closed_form_at_p2() {
    // Σ (1 + k²)^{-1} = π coth π
    let (s, g) = sym("bessel:-1", "torus:1");
    let v = cm_trace(&s, &g, 2.0, TailMode::PowerTail, 1e4, CutoffMode::Elliptic).unwrap();
    assert!((v - PI / PI.tanh()).abs() < 1e-8, "{v}");
    let hard = cm_trace(&s, &g, 2.0, TailMode::HardCutoff, 1e4, CutoffMode::Elliptic).unwrap();
    assert!(hard < v && v - hard < 3e-4);
}

#[test]
fn cm_errors_and_finite_rank() {
    let (s, g) = sym("bessel:-1", "torus:1");
    let err = cm_trace(&s, &g, 1.0, TailMode::PowerTail, 100.0, CutoffMode::Elliptic).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let (neg, _) = sym("scale:-1,0*bessel:-1", "torus:1");
    let err = cm_trace(&neg, &g, 2.0, TailMode::HardCutoff, 100.0, CutoffMode::Elliptic).unwrap_err();
    assert!(matches!(err, Error::Positivity(_)));

    // a single block: (p-1) c^p -> 0
    let g = make_group("torus:1").unwrap();
    let block = MatrixSymbol::custom(
        "single",
        -1.0,
        true,
        std::sync::Arc::new(|_, e| {
            let v = if e.lambda == 0.0 { 0.7 } else { 0.0 };
            nctrace::symbols::Block::real_scalar(v, 1)
        }),
    );
    let est = cm_limit(&block, &g, 10, TailMode::HardCutoff, 5.0, CutoffMode::Elliptic).unwrap();
    assert!(est.value.re.abs() < 1e-5, "{}", est.value);
    let p = 1.25;
    let v = cm_trace(&block, &g, p, TailMode::HardCutoff, 5.0, CutoffMode::Elliptic).unwrap();
    assert!((v - 0.25 * 0.7f64.powf(p)).abs() < 1e-15);
}

#[test]
fn torus2_normalization_ratio() {
    let idx = e1("bessel:-2", "torus:2", 600.0, CutoffMode::Elliptic);
    let wt = e3("bessel:-2", "torus:2", 600.0, CutoffMode::Elliptic, Normalization::Weight);
    assert!(rel(idx.value.re, PI) < 0.02, "{}", idx.value);
    assert!(rel(wt.value.re, 2.0 * PI) < 0.02, "{}", wt.value);
    assert!(rel(wt.value.re / idx.value.re, 2.0) < 0.03);
}

#[test]
fn su2_constants() {
    let idx = e1("bessel:-3", "su2", 1000.0, CutoffMode::Elliptic);
    assert!(rel(idx.value.re, 8.0 / 3.0) < 0.02, "{}", idx.value);
    let wt = e3("bessel:-3", "su2", 1000.0, CutoffMode::Elliptic, Normalization::Weight);
    assert!(rel(wt.value.re, 8.0) < 0.02, "{}", wt.value);
    let (s, g) = sym("bessel:-3", "su2");
    let cm = cm_limit(&s, &g, 10, TailMode::PowerTail, 200.0, CutoffMode::Elliptic).unwrap();
    assert!(rel(cm.value.re, idx.value.re) < 0.02);
}

#[test]
fn subelliptic_su2_estimators_agree() {
    let n = 1000f64.sqrt();
    let idx = e1("sub:-4", "su2:sub", n, CutoffMode::Subelliptic);
    let (s, g) = sym("sub:-4", "su2:sub");
    let cm = cm_limit(&s, &g, 10, TailMode::PowerTail, 300f64.sqrt(), CutoffMode::Subelliptic).unwrap();
    assert!(rel(idx.value.re, cm.value.re) < 0.02, "{} vs {}", idx.value, cm.value);
    let wt = e3("sub:-4", "su2:sub", n, CutoffMode::Subelliptic, Normalization::Weight);
    assert!(rel(wt.value.re / idx.value.re, 4.0) < 0.05, "{}", wt.value.re / idx.value.re);
}

#[test]
fn vanishing_below_critical_order() {
    let a = e1("bessel:-3", "torus:2", 400.0, CutoffMode::Elliptic);
    assert!(a.value.re.abs() <= 0.05, "{}", a.value);
    let b = e1("bessel:-2", "torus:1", 1e4, CutoffMode::Elliptic);
    assert!(b.value.re.abs() <= 0.05, "{}", b.value);
}

#[test]
fn growth_above_critical_order_is_diagnosed() {
    let (s, g) = sym("bessel:-0.5", "torus:1");
    let sp = singular_spectrum(&s, &g, 1e4, CutoffMode::Elliptic).unwrap();
    let cps = Schedule::default().index_checkpoints(sp.len()).unwrap();
    let err = dixmier_limit(alpha_sequence(&sp, &cps).unwrap(), 4, EstimatorKind::E1, Normalization::Index).unwrap_err();
    assert!(matches!(err, Error::NotDixmierClass(_)));
    let err = symbol_l1inf_norm(&s, &g, 1e4, CutoffMode::Elliptic, &NormOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NotDixmierClass(_)));
}

#[test]
fn zero_symbol_traces_vanish() {
    let g = make_group("torus:1").unwrap();
    let est = symbol_l1inf_norm(&MatrixSymbol::zero(), &g, 1e3, CutoffMode::Elliptic, &NormOptions::default()).unwrap();
    assert_eq!(est.value, Complex64::new(0.0, 0.0));
}

#[test]
fn variable_symbols() {
    let g = make_group("torus:1").unwrap();
    let grid = haar_grid(&g, 8).unwrap();
    let opts = NormOptions::default();
    let shifted = MatrixSymbol::parse("cos:2,1*bessel:-1", &g).unwrap();
    let v = variable_trace(&shifted, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    assert!(rel(v.value.re, 4.0) < 0.02, "{}", v.value);
    let sin2 = MatrixSymbol::parse("sin2*bessel:-1", &g).unwrap();
    let v = variable_trace(&sin2, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    assert!(rel(v.value.re, 1.0) < 0.02, "{}", v.value);

    // invariant symbol: the grid is irrelevant
    let b = MatrixSymbol::parse("bessel:-1", &g).unwrap();
    let a = variable_trace(&b, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    let n = symbol_l1inf_norm(&b, &g, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    assert_eq!(a, n);
}

#[test]
fn general_trace_signed_parts() {
    let g = make_group("torus:1").unwrap();
    let grid = HaarGrid::trivial();
    let opts = NormOptions::default();
    let neg = MatrixSymbol::parse("scale:-1,0*bessel:-1", &g).unwrap();
    let v = general_trace(&neg, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    assert!(rel(v.value.re, -2.0) < 0.02 && v.value.im == 0.0, "{}", v.value);
    let imag = MatrixSymbol::parse("scale:0,1*bessel:-1", &g).unwrap();
    let v = general_trace(&imag, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).unwrap();
    assert!(rel(v.value.im, 2.0) < 0.02 && v.value.re == 0.0, "{}", v.value);
    assert!(variable_trace(&neg, &g, &grid, 2e4, CutoffMode::Elliptic, &opts).is_err());
}

#[test]
fn general_reduces_to_variable_on_positive_symbols() {
    let g = make_group("torus:1").unwrap();
    let grid = haar_grid(&g, 6).unwrap();
    let opts = NormOptions::default();
    for spec in ["bessel:-1", "cos:2,1*bessel:-1", "sin2*bessel:-1", "scale:3,0*bessel:-1"] {
        let s = MatrixSymbol::parse(spec, &g).unwrap();
        let v = variable_trace(&s, &g, &grid, 5e3, CutoffMode::Elliptic, &opts).unwrap();
        let gt = general_trace(&s, &g, &grid, 5e3, CutoffMode::Elliptic, &opts).unwrap();
        assert_eq!(v.alpha_sequence, gt.alpha_sequence, "{spec}");
        assert_eq!(v.value, gt.value);
    }
}
