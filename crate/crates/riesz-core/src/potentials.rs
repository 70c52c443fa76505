//! External potential synthesis: the general series construction from a
//! coefficient sequence, the closed hypergeometric and polynomial families,
//! the Coulomb branch, and the hard-wall wrapper.

use crate::error::{Error, Result};
use crate::sequences::{CoefficientSequence, RieszParams};
use crate::series::{radial_sum, Branch};
use crate::specfun::{gamma_prod, hyp2f1, SeriesControl};
use serde::{Deserialize, Serialize};

/// The shapes of external potential this artifact works with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// General series synthesised from a coefficient sequence.
    Series { seq: CoefficientSequence },
    /// Closed 2F1 form for the (1-|x|^2)^alpha measure family.
    PowerMeasureClosed { alpha: f64 },
    /// Odd-degree polynomial sum b_1 |x|^2 + ... + b_{2m+1} |x|^{2(2m+1)}.
    SoftEdgePoly { m: u32, coeffs: Vec<f64> },
    /// prefactor * |x|^{2p}.
    PurePower { p: u32, prefactor: f64 },
    /// Coulomb branch, s = d-2, from Laplacian inversion.
    CoulombSeries { seq: CoefficientSequence },
}

/// A radially symmetric external potential, optionally walled at |x| = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub params: RieszParams,
    pub hard_wall: bool,
}

impl PotentialSpec {
    pub fn series(seq: CoefficientSequence, params: RieszParams) -> Self {
        PotentialSpec {
            kind: PotentialKind::Series { seq },
            params,
            hard_wall: false,
        }
    }

    pub fn power_measure_closed(alpha: f64, params: RieszParams) -> Self {
        PotentialSpec {
            kind: PotentialKind::PowerMeasureClosed { alpha },
            params,
            hard_wall: false,
        }
    }

    pub fn soft_edge(m: u32, params: RieszParams) -> Self {
        let coeffs = soft_edge_coeffs(m, &params);
        PotentialSpec {
            kind: PotentialKind::SoftEdgePoly { m, coeffs },
            params,
            hard_wall: false,
        }
    }

    /// The family prefactor Gamma((d-s)/2) Gamma(s/2+p) / Gamma(d/2+p) * (2p+s)/(2p).
    pub fn pure_power(p: u32, params: RieszParams) -> Self {
        let (d, s) = (params.df(), params.s());
        let pf = p as f64;
        let prefactor = gamma_prod(&[(d - s) / 2.0, s / 2.0 + pf], &[d / 2.0 + pf])
            .expect("gamma arguments positive on [d-2, d)")
            * (2.0 * pf + s)
            / (2.0 * pf);
        PotentialSpec {
            kind: PotentialKind::PurePower { p, prefactor },
            params,
            hard_wall: false,
        }
    }

    /// A power potential with an explicitly chosen prefactor (harmonic traps
    /// and log-gas limits where the family formula does not apply).
    pub fn pure_power_with_prefactor(p: u32, prefactor: f64, params: RieszParams) -> Self {
        PotentialSpec {
            kind: PotentialKind::PurePower { p, prefactor },
            params,
            hard_wall: false,
        }
    }

    pub fn coulomb_series(seq: CoefficientSequence, params: RieszParams) -> Self {
        PotentialSpec {
            kind: PotentialKind::CoulombSeries { seq },
            params,
            hard_wall: false,
        }
    }

    pub fn with_hard_wall(mut self, wall: bool) -> Self {
        self.hard_wall = wall;
        self
    }

    /// V(r); +infinity beyond the wall when `hard_wall` is set.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if self.hard_wall && r > 1.0 {
            return Ok(f64::INFINITY);
        }
        let ctrl = SeriesControl::default();
        match &self.kind {
            PotentialKind::Series { seq } => potential_from_coeffs(seq, &self.params, r, &ctrl),
            PotentialKind::PowerMeasureClosed { alpha } => {
                potential_power_measure(*alpha, &self.params, r)
            }
            PotentialKind::SoftEdgePoly { coeffs, .. } => Ok(eval_even_poly(coeffs, r)),
            PotentialKind::PurePower { p, prefactor } => {
                Ok(prefactor * r.powi(2 * *p as i32))
            }
            PotentialKind::CoulombSeries { seq } => {
                Ok(potential_coulomb(seq, self.params.d(), r))
            }
        }
    }

    /// dV/dr, used by the particle simulator; the hard wall is handled by
    /// projection there, not through the gradient.
    pub fn evaluate_derivative(&self, r: f64) -> Result<f64> {
        let ctrl = SeriesControl::default();
        let params = &self.params;
        match &self.kind {
            PotentialKind::Series { seq } => {
                if params.is_coulomb() {
                    return Ok(coulomb_derivative(seq, params.d(), r));
                }
                if r == 0.0 {
                    return Ok(0.0);
                }
                let (d, s) = (params.df(), params.s());
                let v = radial_sum(seq, params, r, Branch::Inside, true, true, &ctrl)?;
                Ok(-(2.0 * d / s) * v / r)
            }
            PotentialKind::PowerMeasureClosed { alpha } => {
                let (d, s) = (params.df(), params.s());
                let (a, b, c) = (s / 2.0, (s - d) / 2.0 - alpha, d / 2.0);
                if a * b == 0.0 {
                    return Ok(0.0);
                }
                let pre = gamma_prod(
                    &[*alpha + 1.0 + d / 2.0, (d - s) / 2.0],
                    &[d / 2.0 + 1.0, *alpha + 1.0 + (d - s) / 2.0],
                )?;
                let f = hyp2f1(a + 1.0, b + 1.0, c + 1.0, r * r, &ctrl)?;
                Ok(-(d / s) * pre * (a * b / c) * f * 2.0 * r)
            }
            PotentialKind::SoftEdgePoly { coeffs, .. } => {
                let r2 = r * r;
                let mut acc = 0.0;
                for (i, &b) in coeffs.iter().enumerate().rev() {
                    let k = (i + 1) as f64;
                    acc = acc * r2 + 2.0 * k * b;
                }
                Ok(acc * r)
            }
            PotentialKind::PurePower { p, prefactor } => {
                Ok(2.0 * *p as f64 * prefactor * r.powi(2 * *p as i32 - 1))
            }
            PotentialKind::CoulombSeries { seq } => Ok(coulomb_derivative(seq, params.d(), r)),
        }
    }
}

fn eval_even_poly(coeffs: &[f64], r: f64) -> f64 {
    // coeffs[i] multiplies r^{2(i+1)}
    let r2 = r * r;
    let mut acc = 0.0;
    for &b in coeffs.iter().rev() {
        acc = (acc + b) * r2;
    }
    acc
}

/// The general construction: V(r) = (2d/s) sum_{n>=1} T_n
/// (sum_k a_k/(2n+s-2k-d)) r^{2n}, with V(0) = 0.
///
/// Sequences within 1e-8 of the Coulomb endpoint are routed to the Coulomb
/// branch, where the inner denominators would collapse to Kronecker deltas.
pub fn potential_from_coeffs(
    seq: &CoefficientSequence,
    params: &RieszParams,
    r: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    if params.is_coulomb() {
        return Ok(potential_coulomb(seq, params.d(), r));
    }
    let (d, s) = (params.df(), params.s());
    if s == 0.0 {
        return Err(Error::InvalidParams(
            "the series potential requires s != 0 (log-gas kernel out of scope)".into(),
        ));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    // sum_k a_k/(2n+s-2k-d) = -S_n^in, so V = -(2d/s) * sum_{n>=1} T_n S_n^in r^{2n}.
    let v = radial_sum(seq, params, r, Branch::Inside, true, false, ctrl)?;
    Ok(-(2.0 * d / s) * v)
}

/// Closed form for the potential of the (1-|x|^2)^alpha family. Terminates
/// to the exact polynomial when alpha = (s-d)/2 + n for integer n >= 0.
pub fn potential_power_measure(alpha: f64, params: &RieszParams, r: f64) -> Result<f64> {
    let (d, s) = (params.df(), params.s());
    if s == 0.0 {
        return Err(Error::InvalidParams(
            "closed power-measure potential requires s != 0".into(),
        ));
    }
    let pre = gamma_prod(
        &[alpha + 1.0 + d / 2.0, (d - s) / 2.0],
        &[d / 2.0 + 1.0, alpha + 1.0 + (d - s) / 2.0],
    )?;
    let f = hyp2f1(
        s / 2.0,
        (s - d) / 2.0 - alpha,
        d / 2.0,
        r * r,
        &SeriesControl::default(),
    )?;
    Ok(-(d / s) * pre * (f - 1.0))
}

/// Coefficients b_1..b_{2m+1} of the soft-edge polynomial potential.
pub fn soft_edge_coeffs(m: u32, params: &RieszParams) -> Vec<f64> {
    let (d, s) = (params.df(), params.s());
    let mf = m as f64;
    let deg = 2 * m + 1;
    let mut out = Vec::with_capacity(deg as usize);
    for k in 1..=deg {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let b = sign
            * gamma_prod(
                &[(d - s) / 2.0, 2.0 * mf + 2.0 + s / 2.0, s / 2.0 + kf],
                &[kf + d / 2.0, s / 2.0 + 1.0],
            )
            .expect("gamma arguments positive")
            / (factorial(k) * factorial(deg - k));
        out.push(b);
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// Coulomb-case potential from Laplacian inversion:
/// V(r) = (d/2) sum_n a_n r^{2n+2} / ((n + d/2)(n + 1)).
pub fn potential_coulomb(seq: &CoefficientSequence, d: u32, r: f64) -> f64 {
    let df = d as f64;
    let r2 = r * r;
    let mut acc = 0.0;
    for (n, &a) in seq.coeffs().iter().enumerate().rev() {
        let nf = n as f64;
        acc = acc * r2 + a / ((nf + df / 2.0) * (nf + 1.0));
    }
    df / 2.0 * acc * r2
}

fn coulomb_derivative(seq: &CoefficientSequence, d: u32, r: f64) -> f64 {
    let df = d as f64;
    let r2 = r * r;
    let mut acc = 0.0;
    for (n, &a) in seq.coeffs().iter().enumerate().rev() {
        let nf = n as f64;
        acc = acc * r2 + a * (2.0 * nf + 2.0) / ((nf + df / 2.0) * (nf + 1.0));
    }
    df / 2.0 * acc * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{power_measure_coeffs, power_potential_coeffs, CoefficientSequence};
    use crate::specfun::gamma;
    use approx::assert_relative_eq;

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn series_potential_vanishes_at_origin() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_measure_coeffs(0.7, &params, 256).unwrap();
        assert_eq!(
            potential_from_coeffs(&seq, &params, 0.0, &ctrl()).unwrap(),
            0.0
        );
    }

    #[test]
    fn quadratic_soft_edge_from_series() {
        // alpha = (s-d)/2 + 1 at d=1, s=0.5: V(1) equals the m=0 coefficient
        // b_1 = Gamma((d-s)/2) Gamma(2+s/2) / Gamma(d/2+1).
        let params = RieszParams::new(1, 0.5).unwrap();
        let alpha = (params.s() - params.df()) / 2.0 + 1.0;
        let seq = power_measure_coeffs(alpha, &params, 64).unwrap();
        let v1 = potential_from_coeffs(&seq, &params, 1.0, &ctrl()).unwrap();
        let b1 = gamma(0.25) * gamma(2.25) / gamma(1.5);
        assert_relative_eq!(v1, b1, max_relative = 1e-10);
        // and matches the soft-edge coefficient list
        let coeffs = soft_edge_coeffs(0, &params);
        assert_eq!(coeffs.len(), 1);
        assert_relative_eq!(coeffs[0], b1, max_relative = 1e-13);
    }

    #[test]
    fn power_potential_series_is_pure_power() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_potential_coeffs(2, &params, 64).unwrap();
        let spec = PotentialSpec::pure_power(2, params);
        let prefactor = match spec.kind {
            PotentialKind::PurePower { prefactor, .. } => prefactor,
            _ => unreachable!(),
        };
        let r = 0.7f64;
        let v = potential_from_coeffs(&seq, &params, r, &ctrl()).unwrap();
        assert_relative_eq!(v, prefactor * r.powi(4), epsilon = 1e-8);
    }

    #[test]
    fn pure_power_prefactor_value() {
        // p=1, d=2, s=1: Gamma(1/2)Gamma(3/2)/Gamma(2) * 3/2 = 3 pi / 4,
        // which equals the m=0 quadratic coefficient Gamma(1/2)Gamma(5/2)/Gamma(2).
        let params = RieszParams::new(2, 1.0).unwrap();
        let spec = PotentialSpec::pure_power(1, params);
        let v = spec.evaluate(1.0).unwrap();
        assert_relative_eq!(v, 3.0 * std::f64::consts::PI / 4.0, max_relative = 1e-13);
        assert_relative_eq!(
            v,
            gamma(0.5) * gamma(2.5) / gamma(2.0),
            max_relative = 1e-13
        );
        // p=1 coincides with the m=0 soft-edge quadratic for every (d, s)
        for &(d, s) in &[(1u32, 0.5), (3, 1.5), (3, 2.5)] {
            let params = RieszParams::new(d, s).unwrap();
            let pp = PotentialSpec::pure_power(1, params).evaluate(1.0).unwrap();
            let se = soft_edge_coeffs(0, &params)[0];
            assert_relative_eq!(pp, se, max_relative = 1e-12);
        }
    }

    #[test]
    fn box_potential_vanishes() {
        // alpha = (s-d)/2: V is identically zero (the box potential).
        let params = RieszParams::new(2, 1.0).unwrap();
        let alpha = (params.s() - params.df()) / 2.0;
        for &r in &[0.0, 0.3, 0.8, 1.0] {
            let v = potential_power_measure(alpha, &params, r).unwrap();
            assert!(v.abs() < 1e-12, "box potential should vanish, got {v:e}");
        }
    }

    #[test]
    fn m1_polynomial_matches_displayed_coefficients() {
        // The m=1 polynomial with coefficient pattern
        // (1, -3(d+4)/(s+4), 3(d+2)(d+4)/((s+2)(s+4))) times the stated scale.
        let params = RieszParams::new(2, 1.0).unwrap();
        let (d, s) = (params.df(), params.s());
        let scale = gamma((d - s) / 2.0) * gamma(4.0 + s / 2.0) / gamma(d / 2.0 + 1.0)
            * (s + 2.0)
            * (s + 4.0)
            / (6.0 * (d + 2.0) * (d + 4.0));
        let expect = |r: f64| {
            let x2 = r * r;
            scale
                * (x2.powi(3) - 3.0 * (d + 4.0) / (s + 4.0) * x2.powi(2)
                    + 3.0 * (d + 2.0) * (d + 4.0) / ((s + 2.0) * (s + 4.0)) * x2)
        };
        // soft-edge coefficients route
        let coeffs = soft_edge_coeffs(1, &params);
        // terminating 2F1 route at alpha = (s-d)/2 + 3
        let alpha = (s - d) / 2.0 + 3.0;
        for &r in &[0.2, 0.5, 0.9, 1.0, 1.7] {
            assert_relative_eq!(eval_even_poly(&coeffs, r), expect(r), max_relative = 1e-12);
            let closed = potential_power_measure(alpha, &params, r).unwrap();
            assert_relative_eq!(closed, expect(r), max_relative = 1e-11);
        }
    }

    #[test]
    fn soft_edge_leading_coefficient_positive() {
        for &(d, s) in &[(1u32, 0.5), (2, 1.0), (3, 1.5), (3, 2.5)] {
            let params = RieszParams::new(d, s).unwrap();
            for m in 0..4u32 {
                let coeffs = soft_edge_coeffs(m, &params);
                assert_eq!(coeffs.len(), (2 * m + 1) as usize);
                assert!(*coeffs.last().unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn soft_edge_low_s_limit() {
        // m=0, d=1, s -> 0: b_1 -> 2 (V ~ 2 x^2).
        let params = RieszParams::new(1, 1e-8).unwrap();
        let coeffs = soft_edge_coeffs(0, &params);
        assert_relative_eq!(coeffs[0], 2.0, epsilon = 1e-6);
    }

    #[test]
    fn coulomb_uniform_disk() {
        // a = {1}, d = 2: V(r) = r^2, and V(0) = 0.
        let seq = CoefficientSequence::explicit(vec![1.0]);
        assert_relative_eq!(potential_coulomb(&seq, 2, 1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(potential_coulomb(&seq, 2, 0.5), 0.25, max_relative = 1e-14);
        assert_eq!(potential_coulomb(&seq, 2, 0.0), 0.0);
    }

    #[test]
    fn coulomb_poisson_residual() {
        // radial Laplacian of V equals 2d sum a_n r^{2n}, via 5-point finite
        // differences at h = 1e-4, within 1e-5 relative on [0.1, 0.9].
        for (d, coeffs) in [
            (2u32, vec![1.0]),
            (2, vec![2.0, -2.0]),
            (3, vec![1.5, -0.5, 0.25]),
        ] {
            let seq = CoefficientSequence::explicit(coeffs.clone());
            let df = d as f64;
            let h = 1e-4;
            let mut r = 0.1;
            while r <= 0.9 {
                let v = |x: f64| potential_coulomb(&seq, d, x);
                // five-point second derivative and first derivative
                let d2 = (-v(r + 2.0 * h) + 16.0 * v(r + h) - 30.0 * v(r)
                    + 16.0 * v(r - h)
                    - v(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = (-v(r + 2.0 * h) + 8.0 * v(r + h) - 8.0 * v(r - h) + v(r - 2.0 * h))
                    / (12.0 * h);
                let lap = d2 + (df - 1.0) * d1 / r;
                let r2 = r * r;
                let rhs: f64 =
                    2.0 * df * coeffs.iter().rev().fold(0.0, |acc, &a| acc * r2 + a);
                assert_relative_eq!(lap, rhs, max_relative = 1e-5);
                r += 0.1;
            }
        }
    }

    #[test]
    fn family_consistency_series_vs_closed() {
        // potential_from_coeffs on power-measure coefficients agrees with the
        // closed 2F1 form within 1e-8 on [0, 1], non-integer alpha.
        for &(d, s, alpha) in &[
            (2u32, 1.0, 0.6),
            (1, 0.5, 0.75),
            (3, 1.5, 1.3),
            (3, 2.5, 0.35),
        ] {
            let params = RieszParams::new(d, s).unwrap();
            let seq = power_measure_coeffs(alpha, &params, 64).unwrap();
            let mut r = 0.0;
            while r <= 1.0 {
                let series = potential_from_coeffs(&seq, &params, r, &ctrl()).unwrap();
                let closed = potential_power_measure(alpha, &params, r).unwrap();
                assert!(
                    (series - closed).abs() <= 1e-8 * (1.0 + closed.abs()),
                    "d={d} s={s} alpha={alpha} r={r}: series {series:.12e} closed {closed:.12e}"
                );
                r += 0.125;
            }
        }
    }

    #[test]
    fn coulomb_limit_continuity() {
        // s = d-2+eps converges pointwise to the Coulomb branch at rate O(eps).
        let d = 3u32;
        let seq = CoefficientSequence::explicit(vec![1.5, -0.5]);
        for &eps in &[1e-2, 1e-3] {
            let params = RieszParams::new(d, d as f64 - 2.0 + eps).unwrap();
            let mut worst: f64 = 0.0;
            let mut r = 0.1;
            while r <= 1.0 {
                let v_riesz = potential_from_coeffs(&seq, &params, r, &ctrl()).unwrap();
                let v_coulomb = potential_coulomb(&seq, d, r);
                worst = worst.max((v_riesz - v_coulomb).abs());
                r += 0.1;
            }
            assert!(worst < 10.0 * eps, "eps {eps:e}: worst gap {worst:e}");
        }
        // within 1e-8 of the endpoint the Coulomb branch is used directly
        let params = RieszParams::new(d, d as f64 - 2.0 + 1e-10).unwrap();
        let v = potential_from_coeffs(&seq, &params, 0.5, &ctrl()).unwrap();
        assert_relative_eq!(v, potential_coulomb(&seq, d, 0.5), max_relative = 1e-12);
    }

    #[test]
    fn hard_wall_sentinel() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let spec = PotentialSpec::pure_power(1, params).with_hard_wall(true);
        assert_eq!(spec.evaluate(1.5).unwrap(), f64::INFINITY);
        assert!(spec.evaluate(0.5).unwrap().is_finite());
    }

    #[test]
    fn series_divergence_reported_outside() {
        // Non-terminating sequence evaluated at r > 1: divergence error.
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_measure_coeffs(0.6, &params, 64).unwrap();
        assert!(matches!(
            potential_from_coeffs(&seq, &params, 1.3, &ctrl()),
            Err(Error::Divergence { .. })
        ));
        // Terminating (integer-collision) sequences continue fine.
        let alpha = (params.s() - params.df()) / 2.0 + 2.0;
        let seq = power_measure_coeffs(alpha, &params, 64).unwrap();
        let v = potential_from_coeffs(&seq, &params, 1.3, &ctrl()).unwrap();
        let closed = potential_power_measure(alpha, &params, 1.3).unwrap();
        assert_relative_eq!(v, closed, max_relative = 1e-10);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let specs = vec![
            PotentialSpec::pure_power(2, params),
            PotentialSpec::soft_edge(1, params),
            PotentialSpec::power_measure_closed(0.6, params),
            PotentialSpec::series(power_measure_coeffs(0.6, &params, 64).unwrap(), params),
        ];
        let h = 1e-6;
        for spec in &specs {
            for &r in &[0.2, 0.5, 0.8] {
                let d_analytic = spec.evaluate_derivative(r).unwrap();
                let d_fd =
                    (spec.evaluate(r + h).unwrap() - spec.evaluate(r - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(d_analytic, d_fd, max_relative = 1e-5, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let spec = PotentialSpec::soft_edge(1, params).with_hard_wall(true);
        let json = serde_json::to_string(&spec).unwrap();
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
