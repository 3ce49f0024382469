//! Browser bindings. Each export returns a flat `Float64Array`; the layout is
//! given on the plain Rust function it wraps.

use wasm_bindgen::prelude::*;

pub mod curves;

fn js(e: nctrace::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = alphaCurve)]
pub fn alpha_curve(group: &str, symbol: &str, cutoff: f64) -> Result<Vec<f64>, JsError> {
    curves::alpha_curve(group, symbol, cutoff).map_err(js)
}

#[wasm_bindgen(js_name = formResidue)]
pub fn form_residue(a11: f64, a12: f64, a22: f64, cutoff: f64) -> Result<Vec<f64>, JsError> {
    curves::form_residue([a11, a12, a22], cutoff).map_err(js)
}

#[wasm_bindgen(js_name = detCurve)]
pub fn det_curve(group: &str, symbol: &str, re: f64, im: f64, cutoff: f64, levels: usize) -> Result<Vec<f64>, JsError> {
    curves::det_curve(group, symbol, [re, im], cutoff, levels).map_err(js)
}
