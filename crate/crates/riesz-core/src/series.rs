//! Shared engine for the radial series
//!
//!   sum_n T_n S_n r^{2n}          (inside the support)
//!   sum_n T_n S_n r^{-2n}         (outside, the r^{-s} factor applied by callers)
//!
//! with T_n = (s/2)_n ((s-d)/2+1)_n / ((d/2)_n n!) and the inner sums
//!
//!   S_n^in  = sum_k a_k / (2k + d - 2n - s),
//!   S_n^out = sum_k a_k / (2k + d + 2n).
//!
//! Closed families carry exact inner sums (with pole-free continuations to
//! real n, so Euler-Maclaurin can complete the outer sum at the edge of the
//! support, where convergence is only polynomial); explicit lists use the
//! finite sums directly.

use crate::error::{Error, Result};
use crate::sequences::{CoefficientSequence, Provenance, RieszParams};
use crate::specfun::{
    digamma, euler_maclaurin_tail, gamma_prod, sin_pi, SeriesControl,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Branch {
    Inside,
    Outside,
}

/// Inner sum S_n for integer n.
pub(crate) fn inner_sum(
    seq: &CoefficientSequence,
    params: &RieszParams,
    branch: Branch,
    n: usize,
) -> Result<f64> {
    let (d, s) = (params.df(), params.s());
    let nf = n as f64;
    match seq.provenance() {
        Provenance::PowerMeasure { alpha } => {
            let t = (d - s) / 2.0;
            let pre2 = gamma_prod(&[alpha + 1.0 + d / 2.0], &[d / 2.0 + 1.0])?;
            Ok(match branch {
                // (pre2/2) Gamma(t-n) / Gamma(t-n+alpha+1)
                Branch::Inside => {
                    0.5 * pre2 * gamma_prod(&[t - nf], &[t - nf + alpha + 1.0])?
                }
                Branch::Outside => {
                    0.5 * pre2 * gamma_prod(&[nf + d / 2.0], &[nf + d / 2.0 + alpha + 1.0])?
                }
            })
        }
        Provenance::PowerPotential { p } => {
            let t = (d - s) / 2.0;
            let pf = p as f64;
            let base = gamma_prod(&[1.0 + s / 2.0], &[d / 2.0])? * (2.0 * pf + s) / d;
            Ok(match branch {
                Branch::Inside => {
                    if n == 0 {
                        base * crate::specfun::gamma(t) / (2.0 * pf)
                    } else if n == p as usize {
                        // limit value of the vanishing-difference quotient
                        let mut fact = 1.0;
                        for j in 1..p {
                            fact *= j as f64;
                        }
                        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                        -base * crate::specfun::gamma(t - pf) * fact * sign / 2.0
                    } else {
                        0.0
                    }
                }
                Branch::Outside => {
                    base * gamma_prod(&[nf + d / 2.0], &[nf + 1.0 + s / 2.0])?
                        / (2.0 * nf + 2.0 * pf + s)
                }
            })
        }
        _ => inner_sum_direct(seq.coeffs(), params, branch, nf),
    }
}

fn inner_sum_direct(
    coeffs: &[f64],
    params: &RieszParams,
    branch: Branch,
    x: f64,
) -> Result<f64> {
    let (d, s) = (params.df(), params.s());
    let mut sum = 0.0;
    for (k, &a) in coeffs.iter().enumerate().rev() {
        let kf = k as f64;
        let den = match branch {
            Branch::Inside => 2.0 * kf + d - 2.0 * x - s,
            Branch::Outside => 2.0 * kf + d + 2.0 * x,
        };
        if den.abs() < 1e-12 {
            return Err(Error::DenominatorPole {
                n: x.round() as usize,
                k,
            });
        }
        sum += a / den;
    }
    Ok(sum)
}

/// Outer-series evaluation: sum over n >= n_start of T_n S_n rho^n, with
/// rho = r^2 (inside) or r^{-2} (outside), optionally weighted by 2n for the
/// radial derivative. Polynomially decaying tails at |rho| -> 1 are completed
/// by Euler-Maclaurin.
pub(crate) fn radial_sum(
    seq: &CoefficientSequence,
    params: &RieszParams,
    r: f64,
    branch: Branch,
    skip_n0: bool,
    deriv: bool,
    ctrl: &SeriesControl,
) -> Result<f64> {
    let (d, s) = (params.df(), params.s());
    let rho = match branch {
        Branch::Inside => r * r,
        Branch::Outside => {
            if r == 0.0 {
                return Err(Error::InvalidParams(
                    "outside branch undefined at r = 0".into(),
                ));
            }
            1.0 / (r * r)
        }
    };

    // Exact short form for the power-potential inner sums: only n = 0 and
    // n = p survive inside.
    if let (Provenance::PowerPotential { p }, Branch::Inside) = (seq.provenance(), branch) {
        let mut total = 0.0;
        if !skip_n0 {
            total += inner_sum(seq, params, branch, 0)?;
        }
        let s_p = inner_sum(seq, params, branch, p as usize)?;
        let mut t_n = 1.0;
        for j in 0..p {
            let jf = j as f64;
            t_n *= (s / 2.0 + jf) * ((s - d) / 2.0 + 1.0 + jf) / ((d / 2.0 + jf) * (jf + 1.0));
        }
        let weight = if deriv { 2.0 * p as f64 } else { 1.0 };
        total += t_n * s_p * rho.powi(p as i32) * weight;
        return Ok(total);
    }

    let n_em = em_switch_point(seq, params);
    let mut t_n = 1.0_f64; // T_n
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut rho_pow = 1.0_f64;
    let mut last_mag = f64::INFINITY;
    let mut grow_streak = 0usize;
    let mut small_streak = 0usize;
    let mut term = 0.0_f64;

    let n_cap = n_em.min(ctrl.max_terms);
    for n in 0..=n_cap {
        let s_n = inner_sum(seq, params, branch, n)?;
        let weight = if deriv { 2.0 * n as f64 } else { 1.0 };
        term = t_n * s_n * rho_pow * weight;
        if !(skip_n0 && n == 0) {
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }

        let mag = term.abs();
        if n > 4 {
            if mag <= ctrl.abs_tol * 1e-2 && mag <= ctrl.rel_tol * 1e-2 * sum.abs().max(1e-300) {
                small_streak += 1;
                if small_streak >= 3 {
                    return Ok(sum);
                }
            } else {
                small_streak = 0;
            }
            if rho > 1.0 {
                if mag > last_mag && mag > ctrl.abs_tol {
                    grow_streak += 1;
                    if grow_streak >= 4 {
                        return Err(Error::Divergence {
                            r,
                            reason: "outer series terms grow; r is outside the \
                                     disk of convergence"
                                .into(),
                        });
                    }
                } else {
                    grow_streak = 0;
                }
            }
        }
        last_mag = mag;

        let nf = n as f64;
        t_n *= (s / 2.0 + nf) * ((s - d) / 2.0 + 1.0 + nf) / ((d / 2.0 + nf) * (nf + 1.0));
        rho_pow *= rho;
    }

    if rho > 1.0 {
        return Err(Error::Divergence {
            r,
            reason: "series not terminated within the convergence budget".into(),
        });
    }
    if n_em >= ctrl.max_terms {
        return Err(Error::BudgetExceeded {
            terms: ctrl.max_terms,
            last_term: term,
        });
    }

    // The loop above ran through n_em inclusive and left `term` = t(n_em);
    // subtract it from the sum and fold it into the tail instead.
    let t0 = term;
    sum -= t0;
    let tail = outer_tail(seq, params, branch, rho, deriv, t0, n_em as f64)?;
    Ok(sum + tail)
}

fn em_switch_point(seq: &CoefficientSequence, params: &RieszParams) -> usize {
    let base = 320usize;
    match seq.provenance() {
        Provenance::PowerMeasure { alpha } => {
            let t = (params.df() - params.s()) / 2.0;
            base.max((t + alpha).ceil() as usize + 8)
        }
        Provenance::PowerPotential { .. } => base,
        _ => base.max(seq.coeffs().len() + 2),
    }
}

/// Euler-Maclaurin completion of the outer sum from n0 (= em switch point).
fn outer_tail(
    seq: &CoefficientSequence,
    params: &RieszParams,
    branch: Branch,
    rho: f64,
    deriv: bool,
    t0: f64,
    n0: f64,
) -> Result<f64> {
    if t0 == 0.0 {
        return Ok(0.0);
    }
    let (d, s) = (params.df(), params.s());
    let ln_rho = rho.ln();
    let t = (d - s) / 2.0;

    // ln |T(x) S(x)| as a stable combined gamma-ratio sum, plus rational and
    // sign bookkeeping per provenance.
    let (num, den): (Vec<f64>, Vec<f64>) = match (seq.provenance(), branch) {
        (Provenance::PowerMeasure { alpha }, Branch::Inside) => (
            vec![s / 2.0, (s - d) / 2.0 + 1.0, -t - alpha],
            vec![d / 2.0, 1.0, 1.0 - t],
        ),
        (Provenance::PowerMeasure { alpha }, Branch::Outside) => (
            vec![s / 2.0, (s - d) / 2.0 + 1.0, d / 2.0],
            vec![d / 2.0, 1.0, d / 2.0 + alpha + 1.0],
        ),
        (Provenance::PowerPotential { .. }, Branch::Outside) => (
            vec![s / 2.0, (s - d) / 2.0 + 1.0, d / 2.0],
            vec![d / 2.0, 1.0, 1.0 + s / 2.0],
        ),
        (Provenance::PowerPotential { .. }, Branch::Inside) => unreachable!("handled exactly"),
        _ => (
            vec![s / 2.0, (s - d) / 2.0 + 1.0],
            vec![d / 2.0, 1.0],
        ),
    };

    let p_rational = match (seq.provenance(), branch) {
        (Provenance::PowerPotential { p }, Branch::Outside) => Some(2.0 * p as f64 + s),
        _ => None,
    };
    let explicit = matches!(
        seq.provenance(),
        Provenance::Explicit | Provenance::Custom
    );

    let ln_gamma_part = |x: f64| crate::specfun::ln_gamma_ratio_sum(&num, &den, x);
    let ln_g0 = ln_gamma_part(n0);

    let coeffs = seq.coeffs().to_vec();
    let params_c = *params;
    let rel = move |x: f64| -> f64 {
        let mut ln = ln_gamma_part(x) - ln_g0 + (x - n0) * ln_rho;
        if deriv {
            ln += (x / n0).ln();
        }
        if let Some(shift) = p_rational {
            ln += ((2.0 * n0 + shift) / (2.0 * x + shift)).ln();
        }
        let mut v = ln.exp();
        if explicit {
            // signed, slowly varying inner-sum factor
            let s_x = inner_sum_direct(&coeffs, &params_c, branch, x).unwrap_or(0.0);
            let s_0 = inner_sum_direct(&coeffs, &params_c, branch, n0).unwrap_or(1.0);
            v *= s_x / s_0;
        }
        v
    };

    let mut dln = 0.0;
    for &p in &num {
        dln += digamma(p + n0);
    }
    for &p in &den {
        dln -= digamma(p + n0);
    }
    dln += ln_rho;
    if deriv {
        dln += 1.0 / n0;
    }
    if let Some(shift) = p_rational {
        dln -= 2.0 / (2.0 * n0 + shift);
    }
    if explicit {
        // numerical log-derivative of the inner-sum factor
        let h = 1e-4 * n0;
        let sp = inner_sum_direct(seq.coeffs(), params, branch, n0 + h)?;
        let sm = inner_sum_direct(seq.coeffs(), params, branch, n0 - h)?;
        let s0 = inner_sum_direct(seq.coeffs(), params, branch, n0)?;
        dln += (sp - sm) / (2.0 * h * s0);
    }

    Ok(euler_maclaurin_tail(t0, rel, dln, n0))
}

/// Constant-in-n sine factor of the pole-free continuation of the
/// power-measure inside inner sums; zero exactly when the family terminates.
#[allow(dead_code)]
pub(crate) fn power_measure_kappa(alpha: f64, params: &RieszParams) -> f64 {
    let t = (params.df() - params.s()) / 2.0;
    sin_pi(t + alpha + 1.0) / sin_pi(t)
}
