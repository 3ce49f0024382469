use std::collections::HashMap;

use nctrace::determinants::{det_fredholm, BlockOperator, Convention, DetMethod};
use nctrace::estimators::*;
use nctrace::group::enumerate_dual;
use nctrace::symbols::calculus::{frobenius, matrix_abs, signed_parts, singular_values};
use nctrace::symbols::{CMatrix, MatrixSymbol, TabulatedSymbol};
use nctrace::{make_group, CutoffMode, GroupDescriptor, Label};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    random_matrix(rng, d, 1.0).qr().q()
}

fn random_table(rng: &mut ChaCha8Rng, g: &GroupDescriptor, cutoff: f64) -> HashMap<Label, CMatrix> {
    enumerate_dual(g, cutoff, CutoffMode::Elliptic)
        .unwrap()
        .into_iter()
        .map(|e| (e.label.clone(), random_matrix(rng, e.d, 1.0)))
        .collect()
}

/// All singular values with multiplicity `d`, sorted descending: the brute-force oracle.
fn brute_force_prefix(table: &HashMap<Label, CMatrix>) -> Vec<f64> {
    let mut all = Vec::new();
    for m in table.values() {
        for s in singular_values(m).unwrap() {
            all.extend(std::iter::repeat_n(s, m.nrows()));
        }
    }
    all.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0];
    for s in all {
        out.push(out.last().unwrap() + s);
    }
    out
}

fn tabulated(g: &GroupDescriptor, table: HashMap<Label, CMatrix>) -> MatrixSymbol {
    MatrixSymbol::tabulated(TabulatedSymbol::new(g, table, -3.0).unwrap())
}

const SLICE: f64 = 2.2; // spins 0..3/2, d <= 4

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ky_fan_subadditivity(seed in any::<u64>()) {
        let g = make_group("su2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_table(&mut rng, &g, SLICE);
        let b = random_table(&mut rng, &g, SLICE);
        let sum: HashMap<Label, CMatrix> = a.iter().map(|(l, m)| (l.clone(), m + &b[l])).collect();
        let (oa, ob, os) = (brute_force_prefix(&a), brute_force_prefix(&b), brute_force_prefix(&sum));
        let sa = singular_spectrum(&tabulated(&g, a), &g, SLICE, CutoffMode::Elliptic).unwrap();
        let sb = singular_spectrum(&tabulated(&g, b), &g, SLICE, CutoffMode::Elliptic).unwrap();
        let ss = singular_spectrum(&tabulated(&g, sum), &g, SLICE, CutoffMode::Elliptic).unwrap();
        prop_assert_eq!(ss.len() as usize, os.len() - 1);
        for n in 1..os.len() as u64 {
            let (pa, pb, ps) = (sa.prefix_sum(n).unwrap(), sb.prefix_sum(n).unwrap(), ss.prefix_sum(n).unwrap());
            prop_assert!((ps - os[n as usize]).abs() <= 1e-12 * os[n as usize]);
            prop_assert!((pa - oa[n as usize]).abs() <= 1e-12 * oa[n as usize]);
            prop_assert!((pb - ob[n as usize]).abs() <= 1e-12 * ob[n as usize]);
            prop_assert!(ps <= pa + pb + 1e-12 * (pa + pb));
        }
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>()) {
        let g = make_group("su2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_table(&mut rng, &g, SLICE);
        let conj: HashMap<Label, CMatrix> = a
            .iter()
            .map(|(l, m)| {
                let u = random_unitary(&mut rng, m.nrows());
                let v = random_unitary(&mut rng, m.nrows());
                (l.clone(), &u * m * v.adjoint())
            })
            .collect();
        let s1 = singular_spectrum(&tabulated(&g, a), &g, SLICE, CutoffMode::Elliptic).unwrap();
        let s2 = singular_spectrum(&tabulated(&g, conj), &g, SLICE, CutoffMode::Elliptic).unwrap();
        prop_assert_eq!(s1.len(), s2.len());
        for n in 1..=s1.len() {
            let (x, y) = (s1.prefix_sum(n).unwrap(), s2.prefix_sum(n).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn enumeration_prefix_monotone(group in prop::sample::select(vec!["torus:1", "torus:2", "su2", "su2:sub", "product:torus:1,su2"]),
                                   n1 in 1.0f64..12.0, extra in 0.0f64..8.0) {
        let g = make_group(group).unwrap();
        for mode in [CutoffMode::Elliptic, CutoffMode::Subelliptic] {
            let small = enumerate_dual(&g, n1, mode).unwrap();
            let large = enumerate_dual(&g, n1 + extra, mode).unwrap();
            prop_assert!(small.len() <= large.len());
            prop_assert_eq!(&large[..small.len()], &small[..]);
        }
    }

    #[test]
    fn homogeneity_is_exact_for_dyadic_scalings(k in -3i32..4, spec in prop::sample::select(vec!["bessel:-1", "bessel:-2", "aniso:1,0.5,2:-2"])) {
        let c = 2f64.powi(k);
        let g = make_group(if spec == "bessel:-1" { "torus:1" } else { "torus:2" }).unwrap();
        let s = MatrixSymbol::parse(spec, &g).unwrap();
        let cs = s.scaled(Complex64::new(c, 0.0));
        let cutoff = if spec == "bessel:-1" { 5000.0 } else { 60.0 };

        let sp = singular_spectrum(&s, &g, cutoff, CutoffMode::Elliptic).unwrap();
        let csp = singular_spectrum(&cs, &g, cutoff, CutoffMode::Elliptic).unwrap();
        let cps = Schedule::default().index_checkpoints(sp.len()).unwrap();
        let a = alpha_sequence(&sp, &cps).unwrap();
        let ca = alpha_sequence(&csp, &cps).unwrap();
        for (x, y) in a.iter().zip(&ca) {
            prop_assert_eq!(x.alpha * c, y.alpha);
        }
        let e = dixmier_limit(a, 4, EstimatorKind::E1, Normalization::Index).unwrap();
        let ce = dixmier_limit(ca, 4, EstimatorKind::E1, Normalization::Index).unwrap();
        prop_assert_eq!(e.scaled(c), ce);

        for normalization in [Normalization::Index, Normalization::Weight] {
            let opts = NormOptions { normalization, ..Default::default() };
            let e = symbol_l1inf_norm(&s, &g, cutoff, CutoffMode::Elliptic, &opts).unwrap();
            let ce = symbol_l1inf_norm(&cs, &g, cutoff, CutoffMode::Elliptic, &opts).unwrap();
            prop_assert_eq!(e.scaled(c), ce);
        }
    }

    #[test]
    fn series_matches_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nblocks = rng.random_range(1..=5);
        let blocks: Vec<(CMatrix, u64)> = (0..nblocks)
            .map(|_| {
                let d = rng.random_range(1..=4);
                let m = random_matrix(&mut rng, d, 1.0);
                let r = singular_values(&m).unwrap()[0];
                (m * Complex64::new(rng.random_range(0.05..0.5) / r, 0.0), rng.random_range(1..=3))
            })
            .collect();
        let t = BlockOperator::new(blocks, Convention::Group).unwrap();
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let lambda = Complex64::from_polar(rng.random_range(0.0..0.9), theta);
        let series = det_fredholm(&t, lambda, DetMethod::Series(50)).unwrap();
        let product = det_fredholm(&t, lambda, DetMethod::Product).unwrap();
        prop_assert!((series - product).norm() <= 1e-8 * product.norm(), "{} vs {}", series, product);
    }

    #[test]
    fn product_determinant_is_multiplicative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut op = |n: usize| {
            let blocks = (0..n).map(|_| {
                let d = rng.random_range(1..=3);
                (random_matrix(&mut rng, d, 0.3), 1)
            }).collect();
            BlockOperator::new(blocks, Convention::Abstract).unwrap()
        };
        let a = op(3);
        let b = op(2);
        let lambda = Complex64::new(0.7, -0.2);
        let joint = det_fredholm(&a.disjoint_union(&b).unwrap(), lambda, DetMethod::Product).unwrap();
        let split = det_fredholm(&a, lambda, DetMethod::Product).unwrap() * det_fredholm(&b, lambda, DetMethod::Product).unwrap();
        prop_assert!((joint - split).norm() <= 1e-14 * split.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn functional_calculus_identities(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, d, 1.0);
        let r = matrix_abs(&m).unwrap();
        let scale = frobenius(&m).powi(2).max(1.0);
        prop_assert!(frobenius(&(&r * &r - m.adjoint() * &m)) <= 1e-12 * scale);
        prop_assert!(frobenius(&(&r - r.adjoint())) <= 1e-12 * scale);

        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let (hp, hm) = signed_parts(&h).unwrap();
        let hs = frobenius(&h).max(1.0);
        prop_assert!(frobenius(&(&hp - &hm - &h)) <= 1e-12 * hs);
        prop_assert!(frobenius(&(&hp * &hm)) <= 1e-12 * hs * hs);
        prop_assert!(frobenius(&(&hm * &hp)) <= 1e-12 * hs * hs);
    }
}

#[test]
fn exponential_law_of_det_omega() {
    use nctrace::determinants::{det_omega, det_omega_log};
    let g = make_group("torus:1").unwrap();
    let s = MatrixSymbol::bessel_power(-1.0);
    let sp = singular_spectrum(&s, &g, 1e4, CutoffMode::Elliptic).unwrap();
    let cps = Schedule::default().index_checkpoints(sp.len()).unwrap();
    let tr = dixmier_limit(alpha_sequence(&sp, &cps).unwrap(), 4, EstimatorKind::E1, Normalization::Index).unwrap();
    for (a, b) in [(0.25, 0.5), (-1.0, 0.125), (0.5, 2.0)] {
        let (l1, l2) = (Complex64::new(a, b), Complex64::new(b, -a));
        let joint = det_omega_log(&tr, l1 + l2, 1e-2).unwrap();
        let split = det_omega_log(&tr, l1, 1e-2).unwrap() + det_omega_log(&tr, l2, 1e-2).unwrap();
        assert_eq!(joint, split);
        let v = det_omega(&tr, l1 + l2, 1e-2).unwrap();
        let w = det_omega(&tr, l1, 1e-2).unwrap() * det_omega(&tr, l2, 1e-2).unwrap();
        assert!((v - w).norm() <= 4.0 * f64::EPSILON * v.norm());
    }
}
