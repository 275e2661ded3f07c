//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Results are returned as flat `Float64Array`s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demo;

use wasm_bindgen::prelude::*;

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Cavity transmission `T_c` on `count` laser frequencies.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn transmission(
    g: f64,
    mu: f64,
    kappa: f64,
    gamma: f64,
    eta: f64,
    omega_min: f64,
    omega_max: f64,
    count: usize,
    polariton: bool,
) -> Result<Vec<f64>, JsError> {
    demo::transmission(g, mu, kappa, gamma, eta, omega_min, omega_max, count, polariton).map_err(js_err)
}

/// Flat rows of `[g, Γ+, Γ-, ω+, ω-]`.
#[wasm_bindgen]
pub fn polariton_curves(mu: f64, kappa: f64, gamma: f64, g_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    demo::polariton_curves(mu, kappa, gamma, g_max, count).map_err(js_err)
}

#[wasm_bindgen]
pub fn dipole_image(
    width: usize,
    height: usize,
    xi_max: f64,
    dissipative: bool,
    clamp: bool,
) -> Result<Vec<f64>, JsError> {
    demo::dipole_image(width, height, xi_max, dissipative, clamp).map_err(js_err)
}
