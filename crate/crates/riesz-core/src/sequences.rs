//! Admissible coefficient sequences {a_k} and the radial densities they
//! define: mu(x) = (d/c_d) sum_k a_k |x|^{2k} on the unit ball, with
//! normalisation sum_k a_k/(2k+d) = 1/d.
//!
//! Two closed families are provided: the coefficients of (1-|x|^2)^alpha
//! (power-type equilibrium measure) and the sequence generated by a purely
//! power-type external potential |x|^{2p}.

use crate::error::{Error, Result};
use crate::specfun::{gamma_prod, gamma_ratio, hyp2f1, is_gamma_pole, sin_pi, SeriesControl};
use serde::{Deserialize, Serialize};

/// Dimension and interaction exponent, with the derived surface constant
/// c_d = 2 pi^{d/2} / Gamma(d/2). Serialises as the plain pair {d, s}; the
/// constant is rederived on the way in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsWire", into = "ParamsWire")]
pub struct RieszParams {
    d: u32,
    s: f64,
    c_d: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsWire {
    d: u32,
    s: f64,
}

impl TryFrom<ParamsWire> for RieszParams {
    type Error = Error;
    fn try_from(w: ParamsWire) -> Result<Self> {
        RieszParams::new_extended(w.d, w.s)
    }
}

impl From<RieszParams> for ParamsWire {
    fn from(p: RieszParams) -> Self {
        ParamsWire { d: p.d, s: p.s }
    }
}

impl RieszParams {
    /// Standard domain: s in [d-2, d), the Coulomb endpoint included.
    pub fn new(d: u32, s: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams("dimension d must be >= 1".into()));
        }
        let df = d as f64;
        if !(s >= df - 2.0 && s < df) {
            return Err(Error::InvalidParams(format!(
                "s = {s} outside [d-2, d) = [{}, {}) for d = {d}",
                df - 2.0,
                df
            )));
        }
        Ok(Self::unchecked(d, s))
    }

    /// Extended domain s in (d-4, d) for the formal continuations of the
    /// power-potential density (the s = d-3 closed forms). Most operations
    /// still require the standard domain.
    pub fn new_extended(d: u32, s: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams("dimension d must be >= 1".into()));
        }
        let df = d as f64;
        if !(s > df - 4.0 && s < df) {
            return Err(Error::InvalidParams(format!(
                "s = {s} outside (d-4, d) for d = {d}"
            )));
        }
        Ok(Self::unchecked(d, s))
    }

    /// Kernel-only parameters for the finite-N simulator, where the
    /// Hamiltonian is defined for any exponent and no equilibrium theory is
    /// invoked. Requires s < d so the confined minimiser stays nondegenerate.
    pub fn kernel_only(d: u32, s: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams("dimension d must be >= 1".into()));
        }
        if !s.is_finite() {
            return Err(Error::InvalidParams("s must be finite".into()));
        }
        Ok(Self::unchecked(d, s))
    }

    fn unchecked(d: u32, s: f64) -> Self {
        let df = d as f64;
        let c_d = 2.0 * std::f64::consts::PI.powf(df / 2.0) / crate::specfun::gamma(df / 2.0);
        RieszParams { d, s, c_d }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn df(&self) -> f64 {
        self.d as f64
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    /// Is s at (or within 1e-8 of) the Coulomb endpoint s = d-2?
    pub fn is_coulomb(&self) -> bool {
        (self.s - (self.df() - 2.0)).abs() <= 1e-8
    }
}

/// Where a coefficient sequence came from; closed families carry their
/// parameter so that downstream series can use exact inner sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    PowerMeasure { alpha: f64 },
    PowerPotential { p: u32 },
    Custom,
}

/// Truncated sequence {a_0, ..., a_K} with a recorded tail magnitude.
///
/// `tail_bound` estimates the discarded part of sum_k |a_k| x^{2k} at the
/// resolution radius x* = 1 - 1/(4K); radii closer to the edge than the
/// truncation scale are not resolved by the stored list anyway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSequence {
    coeffs: Vec<f64>,
    tail_bound: f64,
    provenance: Provenance,
}

/// Binomial prefactor Gamma(alpha+1+d/2) / (Gamma(alpha+1) Gamma(d/2+1)).
pub(crate) fn power_measure_prefactor(alpha: f64, params: &RieszParams) -> f64 {
    gamma_prod(
        &[alpha + 1.0 + params.df() / 2.0],
        &[alpha + 1.0, params.df() / 2.0 + 1.0],
    )
    .expect("alpha > -1 keeps all gamma arguments positive")
}

/// First K+1 coefficients of the density proportional to (1-|x|^2)^alpha.
pub fn power_measure_coeffs(
    alpha: f64,
    params: &RieszParams,
    k_max: usize,
) -> Result<CoefficientSequence> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidParams(format!(
            "power measure exponent alpha = {alpha} must exceed -1"
        )));
    }
    let c = power_measure_prefactor(alpha, params);
    let terminates = alpha >= 0.0 && (alpha - alpha.round()).abs() < 1e-12;
    let len = if terminates {
        (alpha.round() as usize + 1).min(k_max + 1)
    } else {
        k_max + 1
    };
    let mut coeffs = Vec::with_capacity(len);
    let mut a = c;
    for k in 0..len {
        coeffs.push(a);
        a *= (k as f64 - alpha) / (k as f64 + 1.0);
    }
    let tail_bound = if terminates {
        0.0
    } else {
        tail_magnitude(a, |k| (k - alpha) / (k + 1.0), len)
    };
    Ok(CoefficientSequence {
        coeffs,
        tail_bound,
        provenance: Provenance::PowerMeasure { alpha },
    })
}

/// Coefficient sequence generated by the purely power-type external
/// potential |x|^{2p}. Defined for (d-s)/2 not an integer; the Coulomb
/// endpoint s = d-2 (and s = d-4) makes the sine prefactor vanish and must
/// be handled by the dedicated Coulomb branch instead.
pub fn power_potential_coeffs(
    p: u32,
    params: &RieszParams,
    k_max: usize,
) -> Result<CoefficientSequence> {
    if p < 1 {
        return Err(Error::InvalidParams("power exponent p must be >= 1".into()));
    }
    let (d, s) = (params.df(), params.s());
    let t = (d - s) / 2.0;
    let sine = sin_pi(t);
    if sine.abs() < 1e-12 {
        return Err(Error::CoulombEndpoint(format!(
            "sin(pi (d-s)/2) vanishes at s = {s}; use the Coulomb branch"
        )));
    }
    let pf = p as f64;
    let a0 = -sine / std::f64::consts::PI
        * gamma_ratio(1.0 + s / 2.0, d / 2.0)
        * (2.0 * pf + s)
        / d
        * crate::specfun::gamma(t)
        / (t - pf);
    let ratio = move |k: f64| (k + t) * (k + t - pf) / ((k + 1.0 + t - pf) * (k + 1.0));
    let mut coeffs = Vec::with_capacity(k_max + 1);
    let mut a = a0;
    for k in 0..=k_max {
        coeffs.push(a);
        a *= ratio(k as f64);
    }
    let tail_bound = tail_magnitude(a, ratio, k_max + 1);
    Ok(CoefficientSequence {
        coeffs,
        tail_bound,
        provenance: Provenance::PowerPotential { p },
    })
}

/// Sum of |a_k| x*^{2k} for k >= first, continuing the recurrence
/// a_{k+1} = a_k * ratio(k), at the resolution radius x* = 1 - 1/(4 first).
fn tail_magnitude(a_first: f64, ratio: impl Fn(f64) -> f64, first: usize) -> f64 {
    let x_star: f64 = 1.0 - 1.0 / (4.0 * first.max(1) as f64);
    let w = x_star * x_star;
    let mut weight = w.powi(first as i32);
    let mut a = a_first;
    let mut sum = 0.0;
    for k in first..first + 400_000 {
        let term = a.abs() * weight;
        sum += term;
        if term < 1e-18 * sum.max(1e-300) && k > first + 16 {
            break;
        }
        a *= ratio(k as f64);
        weight *= w;
    }
    sum
}

impl CoefficientSequence {
    /// An explicitly given (finite, exact) coefficient list.
    pub fn explicit(coeffs: Vec<f64>) -> Self {
        CoefficientSequence {
            coeffs,
            tail_bound: 0.0,
            provenance: Provenance::Explicit,
        }
    }

    /// A custom truncated list with a caller-estimated tail magnitude.
    pub fn custom(coeffs: Vec<f64>, tail_bound: f64) -> Self {
        CoefficientSequence {
            coeffs,
            tail_bound,
            provenance: Provenance::Custom,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncation_k(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// sum_k a_k x^{2k} over the stored coefficients.
    pub fn power_sum(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut acc = 0.0;
        for &a in self.coeffs.iter().rev() {
            acc = acc * x2 + a;
        }
        acc
    }

    /// sum_k a_k / (2k + d) - 1/d; zero for an exactly normalised sequence.
    pub fn normalization_residual(&self, params: &RieszParams) -> f64 {
        let d = params.df();
        let mut s = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate().rev() {
            s += a / (2.0 * k as f64 + d);
        }
        s - 1.0 / d
    }

    /// Minimum of the stored power sum over a Chebyshev grid on [0, 1].
    pub fn nonnegativity_margin(&self) -> f64 {
        let n = 4096usize;
        let mut min = f64::INFINITY;
        for j in 0..=n {
            let x = 0.5 * (1.0 + (std::f64::consts::PI * j as f64 / n as f64).cos());
            min = min.min(self.power_sum(x));
        }
        min.min(self.power_sum(0.0)).min(self.power_sum(1.0))
    }

    /// Geometric majorant of the discarded tail at radius x, from the last
    /// stored coefficient. Radii at the very edge cannot be certified for a
    /// truncated non-terminating series and get an infinite allowance.
    fn pointwise_tail(&self, x: f64) -> f64 {
        if self.tail_bound == 0.0 {
            return 0.0;
        }
        let x2 = x * x;
        if x2 >= 1.0 - 1e-12 {
            return f64::INFINITY;
        }
        let last = self.coeffs.last().copied().unwrap_or(0.0).abs();
        last * x2.powi(self.coeffs.len() as i32) / (1.0 - x2)
    }

    /// Reject sequences whose density dips below the truncation allowance
    /// anywhere on the check grid in [0, 1].
    pub fn validate_nonnegative(&self) -> Result<()> {
        let n = 4096usize;
        for j in 0..=n {
            let x = 0.5 * (1.0 + (std::f64::consts::PI * j as f64 / n as f64).cos());
            let v = self.power_sum(x);
            let allowed = self.pointwise_tail(x) + 1e-12 * (1.0 + v.abs());
            if v < -allowed {
                return Err(Error::InvalidMeasure {
                    min: v,
                    allowed,
                });
            }
        }
        Ok(())
    }
}

/// Serialisable record pairing a sequence with its gas parameters.
/// Field names are the wire format used by the command-line tools.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub d: u32,
    pub s: f64,
    pub coeffs: Vec<f64>,
    pub provenance: Provenance,
}

impl SequenceRecord {
    pub fn new(params: &RieszParams, seq: &CoefficientSequence) -> Self {
        SequenceRecord {
            d: params.d(),
            s: params.s(),
            coeffs: seq.coeffs.clone(),
            provenance: seq.provenance,
        }
    }

    pub fn into_parts(self) -> Result<(RieszParams, CoefficientSequence)> {
        let params = RieszParams::new_extended(self.d, self.s)?;
        let tail_bound = match self.provenance {
            Provenance::PowerMeasure { alpha } => {
                return Ok((
                    params,
                    power_measure_coeffs(alpha, &params, self.coeffs.len().saturating_sub(1))?,
                ))
            }
            Provenance::PowerPotential { p } => {
                return Ok((
                    params,
                    power_potential_coeffs(p, &params, self.coeffs.len().saturating_sub(1))?,
                ))
            }
            _ => 0.0,
        };
        Ok((
            params,
            CoefficientSequence {
                coeffs: self.coeffs,
                tail_bound,
                provenance: self.provenance,
            },
        ))
    }
}

/// A probability density on the ball of `support_radius`, defined by a
/// coefficient sequence: mu(x) = (d/c_d) sum_k a_k |x/R|^{2k} / R^d.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    seq: CoefficientSequence,
    params: RieszParams,
    support_radius: f64,
}

impl RadialDensity {
    /// Validates nonnegativity on construction; invalid sequences are
    /// rejected here so the EL machinery never sees them.
    pub fn new(seq: CoefficientSequence, params: RieszParams) -> Result<Self> {
        seq.validate_nonnegative()?;
        Ok(RadialDensity {
            seq,
            params,
            support_radius: 1.0,
        })
    }

    pub fn with_support_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams("support radius must be positive".into()));
        }
        self.support_radius = radius;
        Ok(self)
    }

    pub fn seq(&self) -> &CoefficientSequence {
        &self.seq
    }

    pub fn params(&self) -> &RieszParams {
        &self.params
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// mu(r) from the stored series; zero outside the support.
    pub fn density_at(&self, r: f64) -> f64 {
        let rad = self.support_radius;
        if r > rad {
            return 0.0;
        }
        let u = r / rad;
        self.params.df() / self.params.c_d() * self.seq.power_sum(u) / rad.powi(self.params.d() as i32)
    }

    /// mu(r) through the provenance closed form where one exists. This is
    /// the high-accuracy route near the edge of the support, where the
    /// truncated series loses resolution.
    pub fn density_exact(&self, r: f64) -> f64 {
        let rad = self.support_radius;
        if r > rad {
            return 0.0;
        }
        let u = r / rad;
        let scale = rad.powi(self.params.d() as i32);
        match self.seq.provenance {
            Provenance::PowerMeasure { alpha } => {
                let c = power_measure_prefactor(alpha, &self.params)
                    * gamma_ratio(self.params.df() / 2.0 + 1.0, 1.0)
                    / std::f64::consts::PI.powf(self.params.df() / 2.0);
                let one_minus = (1.0 - u) * (1.0 + u);
                c * one_minus.powf(alpha) / scale
            }
            Provenance::PowerPotential { p } => {
                density_power_potential_closed(p, &self.params, u)
                    .map(|v| v / scale)
                    .unwrap_or(f64::INFINITY)
            }
            _ => self.density_at(r),
        }
    }

    /// Radial density f(r) = c_d r^{d-1} mu(r); integrates to one over
    /// [0, support_radius].
    pub fn radial_density(&self, r: f64) -> f64 {
        self.params.c_d() * r.powi(self.params.d() as i32 - 1) * self.density_at(r)
    }

    /// Radial density through the provenance closed form.
    pub fn radial_density_exact(&self, r: f64) -> f64 {
        self.params.c_d() * r.powi(self.params.d() as i32 - 1) * self.density_exact(r)
    }
}

/// Closed-form density of the equilibrium measure for the potential
/// |x|^{2p}: a Gauss hypergeometric profile (up to the stated prefactor).
pub fn density_power_potential_closed(p: u32, params: &RieszParams, r: f64) -> Result<f64> {
    let (d, s) = (params.df(), params.s());
    let t = (d - s) / 2.0;
    if is_gamma_pole(1.0 + (s - d) / 2.0) {
        return Err(Error::CoulombEndpoint(format!(
            "density closed form undefined at s = {s} (Gamma(1+(s-d)/2) pole)"
        )));
    }
    let pf = p as f64;
    let pref = gamma_ratio(1.0 + s / 2.0, 1.0 + (s - d) / 2.0) * (2.0 * pf + s)
        / (2.0 * pf - d + s)
        / std::f64::consts::PI.powf(d / 2.0);
    let f = hyp2f1(t, t - pf, t + 1.0 - pf, r * r, &SeriesControl::default())?;
    Ok(pref * f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_relative_eq;

    #[test]
    fn params_domain_and_constant() {
        let p = RieszParams::new(2, 1.0).unwrap();
        assert_relative_eq!(p.c_d(), 2.0 * std::f64::consts::PI, max_relative = 1e-15);
        let p3 = RieszParams::new(3, 1.5).unwrap();
        assert_relative_eq!(p3.c_d(), 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        let p1 = RieszParams::new(1, 0.5).unwrap();
        assert_relative_eq!(p1.c_d(), 2.0, max_relative = 1e-15);
        assert!(RieszParams::new(2, 2.0).is_err());
        assert!(RieszParams::new(2, -0.5).is_err());
        assert!(RieszParams::new_extended(3, 0.0).is_ok());
        assert!(RieszParams::new(3, 1.0).unwrap().is_coulomb());
    }

    #[test]
    fn uniform_measure_is_trivial_sequence() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_measure_coeffs(0.0, &params, 50).unwrap();
        assert_eq!(seq.coeffs().len(), 1);
        assert_relative_eq!(seq.coeffs()[0], 1.0, max_relative = 1e-14);
        assert_eq!(seq.tail_bound(), 0.0);
        assert!(seq.normalization_residual(&params).abs() < 1e-14);
    }

    #[test]
    fn alpha_one_d_two_coefficients() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_measure_coeffs(1.0, &params, 50).unwrap();
        assert_eq!(seq.coeffs().len(), 2);
        assert_relative_eq!(seq.coeffs()[0], 2.0, max_relative = 1e-13);
        assert_relative_eq!(seq.coeffs()[1], -2.0, max_relative = 1e-13);
        assert!(seq.normalization_residual(&params).abs() < 1e-13);
    }

    #[test]
    fn box_measure_normalization_within_tail() {
        // alpha = (s-d)/2 for d=2, s=1: slowly decaying binomial tail; the
        // truncation residual must stay within the recorded bound.
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_measure_coeffs((1.0 - 2.0) / 2.0, &params, 2000).unwrap();
        let resid = seq.normalization_residual(&params).abs();
        assert!(
            resid <= 10.0 * seq.tail_bound().max(1e-12),
            "residual {resid:e} vs tail bound {:e}",
            seq.tail_bound()
        );
    }

    #[test]
    fn normalization_by_accelerated_direct_sum() {
        // p=1, d=2, s=1: verify sum a_k/(2k+d) = 1/d to 1e-9 by direct
        // summation of the analytic a_k continued well past the stored K,
        // with a p-series remainder estimate.
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_potential_coeffs(1, &params, 400).unwrap();
        let (d, s) = (2.0, 1.0);
        let t = (d - s) / 2.0;
        let mut a = seq.coeffs()[0];
        let mut sum = 0.0;
        let n_far = 4_000_000usize;
        for k in 0..n_far {
            let kf = k as f64;
            sum += a / (2.0 * kf + d);
            a *= (kf + t) * (kf + t - 1.0) / ((kf + 1.0 + t - 1.0) * (kf + 1.0));
        }
        // |a_k| ~ C k^{t-2}: remainder of sum |a_k|/(2k+d) ~ |a_N| N /(2(2-t-1)N)...
        let remainder = (a / (2.0 * n_far as f64)).abs() * n_far as f64 / (2.0 - t);
        assert!(remainder < 1e-9, "remainder estimate {remainder:e}");
        assert_relative_eq!(sum, 1.0 / d, epsilon = 1e-9);
    }

    #[test]
    fn density_values() {
        // uniform, d=2: the circular law value 1/pi.
        let params = RieszParams::new(2, 1.0).unwrap();
        let rd = RadialDensity::new(power_measure_coeffs(0.0, &params, 10).unwrap(), params)
            .unwrap();
        assert_relative_eq!(rd.density_at(0.5), 1.0 / std::f64::consts::PI, max_relative = 1e-14);
        assert_eq!(rd.density_at(1.5), 0.0);

        // semicircle peak 2/pi at the origin: alpha = 1/2, d = 1.
        let params = RieszParams::new(1, 0.5).unwrap();
        let rd = RadialDensity::new(power_measure_coeffs(0.5, &params, 800).unwrap(), params)
            .unwrap();
        assert_relative_eq!(rd.density_at(0.0), 2.0 / std::f64::consts::PI, max_relative = 1e-13);
        // series and closed form agree away from the edge
        for &r in &[0.1, 0.5, 0.9, 0.99] {
            assert_relative_eq!(rd.density_at(r), rd.density_exact(r), max_relative = 1e-9);
        }
    }

    #[test]
    fn radial_density_values_and_mass() {
        // f(1) = 3 for the uniform ball in d = 3.
        let params = RieszParams::new(3, 1.5).unwrap();
        let rd = RadialDensity::new(power_measure_coeffs(0.0, &params, 10).unwrap(), params)
            .unwrap();
        assert_relative_eq!(rd.radial_density(1.0), 3.0, max_relative = 1e-13);

        // f == 1 for the uniform case in d = 1.
        let params = RieszParams::new(1, 0.5).unwrap();
        let rd = RadialDensity::new(power_measure_coeffs(0.0, &params, 10).unwrap(), params)
            .unwrap();
        assert_relative_eq!(rd.radial_density(0.3), 1.0, max_relative = 1e-14);

        // integral of f over [0,1] is 1 (adaptive quadrature oracle).
        let params = RieszParams::new(2, 1.0).unwrap();
        let rd = RadialDensity::new(power_measure_coeffs(0.5, &params, 400).unwrap(), params)
            .unwrap();
        let q = quad::integrate(|r| rd.radial_density_exact(r), 0.0, 1.0, 1e-12);
        assert_relative_eq!(q.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn power_potential_density_closed_vs_series() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_potential_coeffs(3, &params, 4000).unwrap();
        let rd = RadialDensity::new(seq, params).unwrap();
        let closed = density_power_potential_closed(3, &params, 0.5).unwrap();
        assert_relative_eq!(rd.density_at(0.5), closed, epsilon = 1e-8);
        // vanishes at the edge for d-2 < s < d
        let edge = density_power_potential_closed(3, &params, 1.0).unwrap();
        assert!(edge.abs() < 1e-12);
    }

    #[test]
    fn power_potential_low_s_limit_matches_power_measure() {
        // p=1, d=1, s -> 0+: the density approaches the alpha = (s+1)/2
        // power-measure profile.
        let s = 1e-6;
        let params = RieszParams::new(1, s).unwrap();
        let alpha = (s + 1.0) / 2.0;
        let pm = power_measure_coeffs(alpha, &params, 2000).unwrap();
        let rd_pm = RadialDensity::new(pm, params).unwrap();
        for &r in &[0.0, 0.3, 0.6, 0.9] {
            let a = density_power_potential_closed(1, &params, r).unwrap();
            let b = rd_pm.density_exact(r);
            assert_relative_eq!(a, b, epsilon = 1e-3);
        }
    }

    #[test]
    fn sdm3_closed_form_inverse_sqrt() {
        // p=1 at s = d-3 (formal extension): the density collapses to
        // Gamma((1+d)/2)/pi^{(1+d)/2} / sqrt(1-r^2).
        for d in [2u32, 3, 4] {
            let s = d as f64 - 3.0;
            let params = RieszParams::new_extended(d, s).unwrap();
            let pref = crate::specfun::gamma((1.0 + d as f64) / 2.0)
                / std::f64::consts::PI.powf((1.0 + d as f64) / 2.0);
            for &r in &[0.0, 0.4, 0.8] {
                let v = density_power_potential_closed(1, &params, r).unwrap();
                let expect = pref / (1.0 - r * r).sqrt();
                assert_relative_eq!(v, expect, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn sdm3_p2_fails_nonnegativity() {
        // p=2 at s = d-3 gives a density proportional to (2x^2-1)/sqrt(1-x^2),
        // negative on |x| < sqrt(2)/2; the sequence must be flagged.
        let params = RieszParams::new_extended(3, 0.0).unwrap();
        let seq = power_potential_coeffs(2, &params, 2000).unwrap();
        assert!(seq.nonnegativity_margin() < -0.1);
        assert!(matches!(
            RadialDensity::new(seq, params),
            Err(Error::InvalidMeasure { .. })
        ));
        // and the closed form is indeed negative at the centre
        let v = density_power_potential_closed(2, &params, 0.1).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn coulomb_endpoint_rejected_for_power_potential() {
        let params = RieszParams::new(3, 1.0).unwrap();
        assert!(matches!(
            power_potential_coeffs(1, &params, 100),
            Err(Error::CoulombEndpoint(_))
        ));
    }

    #[test]
    fn edge_exponent_of_power_potential_density() {
        // log mu vs log(1-r^2) slope tends to 1 - (d-s)/2 at the edge.
        for &(d, s, p) in &[(2u32, 1.0, 1u32), (3, 1.5, 2), (3, 2.5, 3)] {
            let params = RieszParams::new(d, s).unwrap();
            let expect = 1.0 - (d as f64 - s) / 2.0;
            let rs = [0.99, 0.995, 0.999, 0.9995, 0.9999];
            let pts: Vec<(f64, f64)> = rs
                .iter()
                .map(|&r| {
                    let mu = density_power_potential_closed(p, &params, r).unwrap();
                    ((1.0 - r * r).ln(), mu.ln())
                })
                .collect();
            // least-squares slope
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(
                (slope - expect).abs() < 0.05,
                "edge slope {slope} vs {expect} at d={d}, s={s}, p={p}"
            );
        }
    }

    #[test]
    fn sequence_record_round_trip() {
        let params = RieszParams::new(2, 1.0).unwrap();
        let seq = power_potential_coeffs(2, &params, 64).unwrap();
        let rec = SequenceRecord::new(&params, &seq);
        let json = serde_json::to_string(&rec).unwrap();
        let back: SequenceRecord = serde_json::from_str(&json).unwrap();
        let (params2, seq2) = back.into_parts().unwrap();
        assert_eq!(params2, params);
        assert_eq!(seq2.coeffs(), seq.coeffs());
        assert_eq!(seq2.provenance(), seq.provenance());
    }
}
