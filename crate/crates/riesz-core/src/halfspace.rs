//! Coulomb gas in d+1 dimensions, harmonically confined and pushed against
//! the hard wall x_0 > a. Above a critical wall position the equilibrium
//! measure collapses onto the boundary hyperplane, where it becomes a Riesz
//! gas with exponent s = d-1; this module computes the threshold, the
//! confined measure, the effective-potential profiles F and G whose
//! positivity certifies the collapse, and the large-deviation rate constant.

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{gamma_prod, hyp2f1, hyp2f1_one_minus, ln_abs_gamma, SeriesControl};
use serde::{Deserialize, Serialize};

/// Wall position and inverse temperature for the (d+1)-dimensional problem;
/// d is the dimension of the boundary hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceProblem {
    pub d: u32,
    pub a: f64,
    pub beta: f64,
}

impl HalfspaceProblem {
    pub fn new(d: u32, a: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParams("beta must be positive".into()));
        }
        Ok(HalfspaceProblem { d, a, beta })
    }
}

/// Minimal complex arithmetic with the principal branch (cut on the negative
/// real axis), enough for the d = 1 Stieltjes transform and the d = 3 closed
/// form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cx {
    pub re: f64,
    pub im: f64,
}

impl Cx {
    pub fn new(re: f64, im: f64) -> Self {
        Cx { re, im }
    }

    pub fn mul(self, o: Cx) -> Cx {
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    pub fn sub_re(self, x: f64) -> Cx {
        Cx::new(self.re - x, self.im)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Principal square root.
    #[allow(dead_code)] // exercised by the d = 1 branch checks in tests
    pub fn sqrt(self) -> Cx {
        let m = self.abs();
        if m == 0.0 {
            return Cx::new(0.0, 0.0);
        }
        let p = ((m + self.re) / 2.0).max(0.0).sqrt();
        let q = ((m - self.re) / 2.0).max(0.0).sqrt();
        if self.im >= 0.0 {
            Cx::new(p, q)
        } else {
            Cx::new(p, -q)
        }
    }

    /// Principal w^{3/2}.
    pub fn pow_3_2(self) -> Cx {
        let m = self.abs();
        if m == 0.0 {
            return Cx::new(0.0, 0.0);
        }
        let arg = self.im.atan2(self.re);
        let r = m.powf(1.5);
        let phi = 1.5 * arg;
        Cx::new(r * phi.cos(), r * phi.sin())
    }
}

/// Critical wall position a_cri(d) = (d+1) (Gamma(d/2+1)/(sqrt(pi) Gamma((d+3)/2)))^{d/(d+1)}.
pub fn a_critical(d: u32) -> f64 {
    let df = d as f64;
    let ratio = ln_abs_gamma(df / 2.0 + 1.0)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_abs_gamma((df + 3.0) / 2.0);
    (df + 1.0) * (ratio * df / (df + 1.0)).exp()
}

/// Support radius R(d) = (sqrt(pi) Gamma((d+3)/2)/Gamma(d/2+1))^{1/(d+1)}.
pub fn support_radius(d: u32) -> f64 {
    let df = d as f64;
    let ratio = 0.5 * std::f64::consts::PI.ln() + ln_abs_gamma((df + 3.0) / 2.0)
        - ln_abs_gamma(df / 2.0 + 1.0);
    (ratio / (df + 1.0)).exp()
}

/// Density of the confined equilibrium measure on the hyperplane:
/// (2R/pi) (1 - |x/R|^2)^{1/2} Gamma(d/2+1)/pi^{d/2} inside |x| <= R.
pub fn confined_density(d: u32, x_norm: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParams(
            "confined density needs d >= 1 (d = 0 is the Dirac case)".into(),
        ));
    }
    let big_r = support_radius(d);
    if x_norm > big_r {
        return Ok(0.0);
    }
    let df = d as f64;
    let u = x_norm / big_r;
    Ok(2.0 * big_r / std::f64::consts::PI
        * ((1.0 - u) * (1.0 + u)).sqrt()
        * gamma_prod(&[df / 2.0 + 1.0], &[]).unwrap()
        / std::f64::consts::PI.powf(df / 2.0))
}

/// Rate constant C(a; d) in the tail probability
/// log P[x_0 >= a] ~ -(beta/2) C(a;d) N^{(d+3)/(d+1)}.
/// d = 1 is the removable singularity with exact value a^2 + (log 2)/2.
pub fn rate_constant(a: f64, d: u32) -> f64 {
    if d == 1 {
        return a * a + 0.5 * std::f64::consts::LN_2;
    }
    let df = d as f64;
    let r2 = support_radius(d).powi(2);
    a * a + (r2 * df * (df + 1.0) - (df + 1.0).powi(2)) / ((df - 1.0) * (df + 3.0))
}

/// Large-deviation data: the rate -(beta/2) C(a; d) and the N-exponent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LdExponent {
    pub rate: f64,
    pub n_exponent: f64,
    pub c_value: f64,
}

pub fn ld_exponent(prob: &HalfspaceProblem) -> LdExponent {
    let c = rate_constant(prob.a, prob.d);
    LdExponent {
        rate: -(prob.beta / 2.0) * c,
        n_exponent: (prob.d as f64 + 3.0) / (prob.d as f64 + 1.0),
        c_value: c,
    }
}

/// Kernel 2F1((d-1)/2, (d-1)/2; d-1; 1 - omx), with fast closed forms for
/// d = 2 (complete elliptic integral via AGM) and d = 3 (logarithm).
fn zonal_kernel(d: u32, omx: f64, ctrl: &SeriesControl) -> Result<f64> {
    match d {
        2 => {
            // 2F1(1/2,1/2;1;m) = 1/agm(1, sqrt(1-m)); the kernel diverges
            // logarithmically as omx -> 0 and underflowed distances would
            // stall the iteration.
            if omx <= 0.0 {
                return Ok(f64::INFINITY);
            }
            let mut a = 1.0_f64;
            let mut b = omx.sqrt();
            for _ in 0..64 {
                if (a - b).abs() <= 1e-16 * a {
                    break;
                }
                let an = 0.5 * (a + b);
                b = (a * b).sqrt();
                a = an;
            }
            Ok(1.0 / a)
        }
        3 => {
            // 2F1(1,1;2;z) = -ln(1-z)/z
            let z = 1.0 - omx;
            if z.abs() < 1e-8 {
                Ok(1.0 + z / 2.0 + z * z / 3.0)
            } else {
                Ok(-omx.ln() / z)
            }
        }
        _ => {
            let df = d as f64;
            hyp2f1_one_minus((df - 1.0) / 2.0, (df - 1.0) / 2.0, df - 1.0, omx, ctrl)
        }
    }
}

/// G(x) = script-G(x) + x^2 at fixed t, the R = 1 profile whose monotone
/// growth implies full confinement. Computed by adaptive quadrature with the
/// kernel's unit-argument distance formed exactly.
pub fn g_profile(d: u32, t: f64, x: f64, tol: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParams(
            "the G profile reduction needs d >= 2".into(),
        ));
    }
    let df = d as f64;
    let ctrl = SeriesControl::default();
    if x.abs() < 1e-12 {
        return Ok(g_on_axis(d, t)? + x * x);
    }
    let pref = 4.0 * df / (df - 1.0) / std::f64::consts::PI;
    let integrand = |r: f64, diff: f64| -> f64 {
        let sum2 = t * t + (x + r) * (x + r);
        let omx = (t * t + diff * diff) / sum2;
        let k = match zonal_kernel(d, omx, &ctrl) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        sum2.powf(-(df - 1.0) / 2.0) * k * ((1.0 - r) * (1.0 + r)).sqrt() * r.powi(d as i32 - 1)
    };
    let q = if x > 0.0 && x < 1.0 {
        let left = quad::tanh_sinh(|r, _da, db| integrand(r, db), 0.0, x, tol / 2.0);
        let right = quad::tanh_sinh(|r, da, _db| integrand(r, da), x, 1.0, tol / 2.0);
        quad::Quad {
            value: left.value + right.value,
            err: left.err + right.err,
            evals: left.evals + right.evals,
        }
    } else {
        quad::tanh_sinh(|r, _da, _db| integrand(r, x - r), 0.0, 1.0, tol)
    };
    if !(q.err <= tol.max(1e-14 * q.value.abs()) * 4.0) {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: q.err,
        });
    }
    Ok(pref * q.value + x * x)
}

/// On-axis value of the R = 1 profile,
/// script-G_t(0) = (2/(d-1)) t^{1-d} 2F1((d-1)/2, d/2; (d+3)/2; -1/t^2)
///                 * Gamma(d/2+1)/(sqrt(pi) Gamma((d+3)/2)).
/// The last factor is R^{-(d+1)}: it cancels against the measure
/// normalisation only in the R-scaled form of the identity.
fn g_on_axis(d: u32, t: f64) -> Result<f64> {
    let df = d as f64;
    if t == 0.0 {
        return Ok(df / (df - 1.0));
    }
    let ctrl = SeriesControl::default();
    let f = hyp2f1(
        (df - 1.0) / 2.0,
        df / 2.0,
        (df + 3.0) / 2.0,
        -1.0 / (t * t),
        &ctrl,
    )?;
    let norm = gamma_prod(&[df / 2.0 + 1.0], &[(df + 3.0) / 2.0])?
        / std::f64::consts::PI.sqrt();
    Ok(2.0 / (df - 1.0) * t.powf(1.0 - df) * f * norm)
}

/// Closed form of G at d = 3: G = 3t^2 + 3/2 + Re[(z^2-1)^{3/2}]/x, z = x + it.
/// The x -> 0 limit is 3t^2 + 3/2 - 3t sqrt(t^2+1).
pub fn g_closed_d3(t: f64, x: f64) -> f64 {
    if x.abs() < 1e-14 {
        return 3.0 * t * t + 1.5 - 3.0 * t * (t * t + 1.0).sqrt();
    }
    let z = Cx::new(x, t);
    let w = z.mul(z).sub_re(1.0);
    3.0 * t * t + 1.5 + w.pow_3_2().re / x
}

/// Arctangent representation of the same closed form (t > 0, x > 0).
pub fn g_closed_d3_arctan(t: f64, x: f64) -> f64 {
    let q = (t * t - x * x + 1.0).powi(2) + 4.0 * t * t * x * x;
    3.0 * t * t + 1.5
        - q.powf(0.75) / x
            * (std::f64::consts::FRAC_PI_4
                + 1.5 * ((t * t - x * x + 1.0) / (2.0 * t * x)).atan())
            .sin()
}

/// Effective potential profile F(t, x) of the confined measure: the Riesz
/// potential of mu_W plus the harmonic term, at height t above the wall and
/// hyperplane radius x. Scales to the R = 1 profile via
/// F(t, x) = R^2 G_{t/R}(x/R) + (a+t)^2.
pub fn f_profile(prob: &HalfspaceProblem, t: f64, x: f64, tol: f64) -> Result<f64> {
    if prob.d == 0 {
        return Err(Error::InvalidParams(
            "F profile unsupported at d = 0 (Dirac case); use rate_constant".into(),
        ));
    }
    if prob.d == 1 {
        return f_profile_d1(prob, t, x, tol);
    }
    let big_r = support_radius(prob.d);
    let g = g_profile(prob.d, t / big_r, x / big_r, tol / (big_r * big_r))?;
    let at = prob.a + t;
    Ok(big_r * big_r * (g - (x / big_r) * (x / big_r)) + at * at + x * x)
}

/// F(0, 0) = a^2 + d R^2/(d-1) for d >= 2; 1 + log 2 + a^2 at d = 1.
pub fn f_zero_zero(prob: &HalfspaceProblem) -> Result<f64> {
    let df = prob.d as f64;
    match prob.d {
        0 => Err(Error::InvalidParams("d = 0 unsupported".into())),
        1 => Ok(1.0 + std::f64::consts::LN_2 + prob.a * prob.a),
        _ => {
            let r2 = support_radius(prob.d).powi(2);
            Ok(prob.a * prob.a + df / (df - 1.0) * r2)
        }
    }
}

/// d = 1: the two-dimensional log-kernel route with the semicircle on
/// [-sqrt(2), sqrt(2)].
fn f_profile_d1(prob: &HalfspaceProblem, t: f64, x: f64, tol: f64) -> Result<f64> {
    let big_r = 2.0f64.sqrt();
    let rho = |y: f64| (2.0 - y * y).max(0.0).sqrt() / std::f64::consts::PI;
    let integrand = |y: f64, dist: f64| -> f64 { -rho(y) * (t * t + dist * dist).ln() };
    let q = if x.abs() < big_r {
        let left = quad::tanh_sinh(|y, _da, db| integrand(y, db), -big_r, x, tol / 2.0);
        let right = quad::tanh_sinh(|y, da, _db| integrand(y, da), x, big_r, tol / 2.0);
        quad::Quad {
            value: left.value + right.value,
            err: left.err + right.err,
            evals: left.evals + right.evals,
        }
    } else {
        quad::tanh_sinh(
            |y, _da, _db| integrand(y, x - y),
            -big_r,
            big_r,
            tol,
        )
    };
    if !(q.err <= tol.max(1e-14 * q.value.abs()) * 4.0) {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: q.err,
        });
    }
    let at = prob.a + t;
    Ok(q.value + at * at + x * x)
}

/// Vertical-axis margins F(t,0) - F(0,0) = t f(t) with
/// f(t) = (d+1) t + 2a - (2(d+1)/R^d) 2F1(d/2, -1/2; 3/2; -t^2/R^2).
/// Nonnegative for all t >= 0 precisely when a >= a_cri.
pub fn vertical_check(prob: &HalfspaceProblem, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if prob.d == 0 {
        return Err(Error::InvalidParams(
            "vertical margins unsupported at d = 0".into(),
        ));
    }
    let df = prob.d as f64;
    let big_r = support_radius(prob.d);
    let ctrl = SeriesControl::default();
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t < 0.0 {
            return Err(Error::InvalidParams("t grid must be nonnegative".into()));
        }
        let f2 = hyp2f1(df / 2.0, -0.5, 1.5, -(t * t) / (big_r * big_r), &ctrl)?;
        let f_t = (df + 1.0) * t + 2.0 * prob.a
            - 2.0 * (df + 1.0) / big_r.powi(prob.d as i32) * f2;
        out.push((t, t * f_t));
    }
    Ok(out)
}

/// Result of a grid scan of F(t, x) - F(0, 0).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub min_margin: f64,
    pub argmin: (f64, f64),
    pub baseline: f64,
}

/// Scan the conjectured inequality F(t,x) >= F(0,0) over a grid. Supports the
/// full confinement numerically; a definite negative margin disproves it for
/// the given wall position.
pub fn conjecture_scan(
    d: u32,
    a: f64,
    t_grid: &[f64],
    x_grid: &[f64],
    tol: f64,
) -> Result<ScanReport> {
    if d < 2 {
        return Err(Error::InvalidParams("conjecture scan needs d >= 2".into()));
    }
    let prob = HalfspaceProblem::new(d, a, 2.0)?;
    let baseline = f_zero_zero(&prob)?;
    let mut min_margin = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    for &t in t_grid {
        for &x in x_grid {
            let f = if t == 0.0 && x <= support_radius(d) {
                baseline
            } else {
                f_profile(&prob, t, x, tol)?
            };
            let margin = f - baseline;
            if margin < min_margin {
                min_margin = margin;
                argmin = (t, x);
            }
        }
    }
    Ok(ScanReport {
        min_margin,
        argmin,
        baseline,
    })
}

/// Default scan grids: t geometric on [1e-3, 10] (33 points, plus t = 0),
/// x linear on [0, 3R] (61 points).
pub fn default_scan_grids(d: u32) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0];
    let n_t = 33;
    for i in 0..n_t {
        t.push(1e-3 * (10.0f64 / 1e-3).powf(i as f64 / (n_t - 1) as f64));
    }
    let big_r = support_radius(d);
    let n_x = 61;
    let x = (0..n_x)
        .map(|i| 3.0 * big_r * i as f64 / (n_x - 1) as f64)
        .collect();
    (t, x)
}

/// Summary record for reports: thresholds, radius, rate data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceSummary {
    pub d: u32,
    pub a: f64,
    pub a_cri: f64,
    pub big_r: f64,
    pub c_rate: f64,
    pub rate: f64,
    pub n_exponent: f64,
}

pub fn summary(prob: &HalfspaceProblem) -> HalfspaceSummary {
    let ld = ld_exponent(prob);
    HalfspaceSummary {
        d: prob.d,
        a: prob.a,
        a_cri: a_critical(prob.d),
        big_r: support_radius(prob.d),
        c_rate: ld.c_value,
        rate: ld.rate,
        n_exponent: ld.n_exponent,
    }
}
