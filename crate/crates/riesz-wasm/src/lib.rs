//! Browser bindings for the interactive demo page.
//!
//! Three operations, each returning a JSON payload the page plots on a
//! canvas: equilibrium density + potential curves for the two closed
//! families, Euler-Lagrange residual/margin scans, and the half-space
//! profile G(x) - G(0) with the threshold summary.

use riesz_core::el_verify::{default_inside_grid, default_outside_grid, el_check};
use riesz_core::halfspace;
use riesz_core::potentials::PotentialSpec;
use riesz_core::sequences::{
    power_measure_coeffs, power_potential_coeffs, RadialDensity, RieszParams,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Serialize)]
struct CurvesOut {
    curves: Vec<Curve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct ErrorOut {
    error: String,
}

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::to_string(&ErrorOut {
        error: msg.to_string(),
    })
    .unwrap()
}

fn pair(
    family: &str,
    d: u32,
    s: f64,
    param: f64,
) -> Result<(RadialDensity, PotentialSpec, String), String> {
    let params = RieszParams::new(d, s).map_err(|e| e.to_string())?;
    match family {
        "power-measure" => {
            let alpha = param;
            let seq = power_measure_coeffs(alpha, &params, 400).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((
                rd,
                PotentialSpec::power_measure_closed(alpha, params),
                format!("(1-r^2)^{alpha:.3} measure"),
            ))
        }
        "soft-edge" => {
            let m = param.max(0.0).round() as u32;
            let alpha = (s - d as f64) / 2.0 + 2.0 * m as f64 + 1.0;
            let seq = power_measure_coeffs(alpha, &params, 400).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((
                rd,
                PotentialSpec::soft_edge(m, params),
                format!("soft edge m={m}"),
            ))
        }
        "power-potential" => {
            let p = param.max(1.0).round() as u32;
            let seq = power_potential_coeffs(p, &params, 400).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((
                rd,
                PotentialSpec::pure_power(p, params),
                format!("|x|^{} trap", 2 * p),
            ))
        }
        other => Err(format!("unknown family `{other}`")),
    }
}

/// Density mu(r) and potential V(r) curves for a family pair.
#[wasm_bindgen]
pub fn density_curve(family: &str, d: u32, s: f64, param: f64, n: usize) -> String {
    let (rd, spec, label) = match pair(family, d, s, param) {
        Ok(v) => v,
        Err(e) => return err_json(e),
    };
    let n = n.clamp(16, 2048);
    let mut xs = Vec::with_capacity(n + 1);
    let mut mu = Vec::with_capacity(n + 1);
    let mut pot_x = Vec::new();
    let mut pot = Vec::new();
    for i in 0..=n {
        let r = 1.2 * i as f64 / n as f64;
        xs.push(r);
        mu.push(rd.density_exact(r));
        if let Ok(v) = spec.evaluate(r) {
            if v.is_finite() {
                pot_x.push(r);
                pot.push(v);
            }
        }
    }
    let out = CurvesOut {
        curves: vec![
            Curve {
                label: format!("density, {label}"),
                x: xs,
                y: mu,
            },
            Curve {
                label: "potential".into(),
                x: pot_x,
                y: pot,
            },
        ],
        note: None,
    };
    serde_json::to_string(&out).unwrap()
}

/// Euler-Lagrange residuals (inside) and margins (outside) for a family pair.
#[wasm_bindgen]
pub fn el_scan(family: &str, d: u32, s: f64, param: f64) -> String {
    let (rd, spec, label) = match pair(family, d, s, param) {
        Ok(v) => v,
        Err(e) => return err_json(e),
    };
    let report = match el_check(
        &rd,
        &spec,
        &default_inside_grid(),
        &default_outside_grid(),
        1e-6,
    ) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let out = CurvesOut {
        curves: vec![
            Curve {
                label: format!("equality residual, {label}"),
                x: report.equality_residuals.iter().map(|p| p.0).collect(),
                y: report.equality_residuals.iter().map(|p| p.1).collect(),
            },
            Curve {
                label: "inequality margin".into(),
                x: report.inequality_margins.iter().map(|p| p.0).collect(),
                y: report.inequality_margins.iter().map(|p| p.1).collect(),
            },
        ],
        note: Some(format!(
            "Robin constant {:.6}; max |residual| {:.2e}; min margin {}",
            report.robin_constant,
            report.max_equality_residual(),
            report
                .min_margin
                .map(|m| format!("{m:.2e}"))
                .unwrap_or_else(|| "n/a (hard wall)".into())
        )),
    };
    serde_json::to_string(&out).unwrap()
}

/// Half-space profile G(x) - G(0) at wall distance t, plus vertical margins
/// and the critical-position summary.
#[wasm_bindgen]
pub fn halfspace_curves(d: u32, t: f64, a: f64) -> String {
    if d < 2 {
        return err_json("profiles need d >= 2 (d in {0, 1} are the classical cases)");
    }
    let g0 = match halfspace::g_profile(d, t, 0.0, 1e-8) {
        Ok(v) => v,
        Err(e) => return err_json(e),
    };
    let n = 120;
    let mut xs = Vec::with_capacity(n + 1);
    let mut gs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = 2.5 * i as f64 / n as f64;
        if let Ok(g) = halfspace::g_profile(d, t, x, 1e-8) {
            xs.push(x);
            gs.push(g - g0);
        }
    }
    let prob = match halfspace::HalfspaceProblem::new(d, a, 2.0) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let t_grid: Vec<f64> = (0..=60).map(|i| 4.0 * i as f64 / 60.0).collect();
    let vertical = match halfspace::vertical_check(&prob, &t_grid) {
        Ok(v) => v,
        Err(e) => return err_json(e),
    };
    let summary = halfspace::summary(&prob);
    let out = CurvesOut {
        curves: vec![
            Curve {
                label: format!("G(x) - G(0) at t = {t:.3}, d = {d}"),
                x: xs,
                y: gs,
            },
            Curve {
                label: format!("vertical margin F(t,0) - F(0,0), a = {a:.3}"),
                x: vertical.iter().map(|p| p.0).collect(),
                y: vertical.iter().map(|p| p.1).collect(),
            },
        ],
        note: Some(format!(
            "a_cri = {:.6}, R = {:.6}, C(a;d) = {:.6}, rate exponent {:.4}",
            summary.a_cri, summary.big_r, summary.c_rate, summary.n_exponent
        )),
    };
    serde_json::to_string(&out).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_payload_parses() {
        let json = density_curve("power-potential", 2, 1.0, 3.0, 64);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["curves"].as_array().unwrap().len() == 2);
        assert!(v.get("error").is_none());
    }

    #[test]
    fn el_scan_payload_reports_pass() {
        let json = el_scan("soft-edge", 1, 0.5, 0.0);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let note = v["note"].as_str().unwrap();
        assert!(note.contains("Robin constant"));
    }

    #[test]
    fn halfspace_payload_has_threshold() {
        let json = halfspace_curves(3, 0.5, 2.0);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["note"].as_str().unwrap().contains("a_cri"));
    }

    #[test]
    fn bad_family_is_an_error_payload() {
        let json = density_curve("nonsense", 2, 1.0, 1.0, 64);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["error"].as_str().unwrap().contains("nonsense"));
    }
}
