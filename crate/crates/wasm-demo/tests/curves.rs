use std::f64::consts::PI;

use nctrace_wasm::curves::{alpha_curve, det_curve, form_residue};

#[test]
fn alpha_curve_layout() {
    let v = alpha_curve("torus:1", "bessel:-1", 2e4).unwrap();
    assert_eq!(v.len(), 1 + 2 * 8);
    assert!((v[0] - 2.0).abs() < 1e-3, "{}", v[0]);
    let ns: Vec<f64> = v[1..].iter().step_by(2).copied().collect();
    assert!(ns.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn form_residue_matches_closed_form() {
    let v = form_residue([1.0, 0.0, 2.0], 600.0).unwrap();
    assert!((v[0] - PI / 2f64.sqrt()).abs() < 1e-10);
    assert!(v[2] < 0.02, "gap {}", v[2]);
    assert!(form_residue([1.0, 2.0, 1.0], 100.0).unwrap_err().is_config());
}

#[test]
fn det_curve_layout() {
    let v = det_curve("torus:1", "bessel:-1", [0.1, 0.0], 4.0, 6).unwrap();
    assert_eq!(v.len(), 2 + 3 * 6);
    assert!((v[0] - 0.2f64.exp()).abs() < 0.05 * 0.2f64.exp());
    assert_eq!(v[2], 1.5);
}

#[test]
fn bad_input_is_rejected() {
    assert!(alpha_curve("torus:1", "cos:2,1*bessel:-1", 100.0).is_err());
    assert!(alpha_curve("sl3", "bessel:-1", 100.0).is_err());
    assert!(det_curve("torus:1", "bessel:-1", [0.1, 0.0], 4.0, 2).is_err());
}
