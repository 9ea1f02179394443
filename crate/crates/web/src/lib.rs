//! Browser bindings: contour of the fully entangled fraction, fidelity curves
//! and single teleportation runs, all on a Werner-weighted base resource.

use noisy_teleport::channels::{damp_pair, DampingFamily};
use noisy_teleport::entanglement::fef;
use noisy_teleport::harness::{damped_resource, AliceMethod};
use noisy_teleport::state::{state_fidelity, werner_state, AxialState};
use noisy_teleport::teleport::teleport;
use noisy_teleport::tomography::{composite_teleport_fidelity, ProcessMode};
use noisy_teleport::DensityMatrix;
use wasm_bindgen::prelude::*;

fn js_err(e: noisy_teleport::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn base(v: f64) -> Result<DensityMatrix, JsValue> {
    werner_state(v).map_err(js_err)
}

fn family(name: &str) -> Result<DampingFamily, JsValue> {
    match name {
        "adc" => Ok(DampingFamily::Adc),
        "pdc" => Ok(DampingFamily::Pdc),
        _ => Err(JsValue::from_str("family must be adc or pdc")),
    }
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Row-major `n x n` values of `f` with amplitude damping on both sides;
/// rows run over `p_a`, columns over `p_b`.
#[wasm_bindgen]
pub fn fef_grid(n: usize, werner_v: f64) -> Result<Vec<f64>, JsValue> {
    if n < 2 {
        return Err(JsValue::from_str("need at least 2 points"));
    }
    let rho = base(werner_v)?;
    let axis = grid(n);
    let mut out = Vec::with_capacity(n * n);
    for &a in &axis {
        for &b in &axis {
            let damped = damp_pair(&rho, (DampingFamily::Adc, a), (DampingFamily::Adc, b)).map_err(js_err)?;
            out.push(fef(&damped).map_err(js_err)?.f);
        }
    }
    Ok(out)
}

/// Teleportation fidelity against `p_b` on `n` points, with amplitude
/// damping `p_a` on Alice and `bob_family` on Bob.
#[wasm_bindgen]
pub fn fidelity_curve(bob_family: &str, p_a: f64, n: usize, werner_v: f64) -> Result<Vec<f64>, JsValue> {
    if n < 2 {
        return Err(JsValue::from_str("need at least 2 points"));
    }
    let fam = family(bob_family)?;
    let rho = base(werner_v)?;
    grid(n)
        .into_iter()
        .map(|b| {
            let damped = damped_resource(&rho, false, AliceMethod::Direct, p_a, (fam, b)).map_err(js_err)?;
            composite_teleport_fidelity(&damped, ProcessMode::Exact).map_err(js_err)
        })
        .collect()
}

/// Flat `[probability, fidelity]` pairs for the outcomes 0H, 0V, 1H, 1V when
/// teleporting the axial state `input` through the damped resource.
#[wasm_bindgen]
pub fn teleport_outcomes(input: char, p_a: f64, p_b: f64, werner_v: f64) -> Result<Vec<f64>, JsValue> {
    let state = AxialState::from_char(input).ok_or_else(|| JsValue::from_str("input must be one of HVDARL"))?;
    let rho_in = state.state().density();
    let resource = damp_pair(&base(werner_v)?, (DampingFamily::Adc, p_a), (DampingFamily::Adc, p_b)).map_err(js_err)?;
    let mut out = Vec::with_capacity(8);
    for o in teleport(&rho_in, &resource).map_err(js_err)? {
        out.push(o.probability);
        out.push(if o.probability > 0.0 { state_fidelity(&rho_in, &o.bob_corrected).map_err(js_err)? } else { f64::NAN });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_corners() {
        let g = fef_grid(3, 1.0).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[8] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curves_start_at_the_undamped_value() {
        for fam in ["adc", "pdc"] {
            let c = fidelity_curve(fam, 0.0, 5, 0.8).unwrap();
            assert!((c[0] - 0.9).abs() < 1e-10);
        }
    }

    #[test]
    fn outcomes_are_normalized() {
        let o = teleport_outcomes('R', 0.3, 0.4, 1.0).unwrap();
        let total: f64 = o.iter().step_by(2).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
