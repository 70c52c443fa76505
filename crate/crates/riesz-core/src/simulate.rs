//! Small-N particle oracle: deterministic minimisation of the discrete
//! Hamiltonian
//!
//!   H(X) = sum_{i != j} g(x_i - x_j) + N sum_i V(x_i),
//!   g(x) = |x|^{-s}/s  (s != 0),  -log|x|  (s = 0),
//!
//! by projected gradient descent with backtracking, plus empirical radial
//! statistics against predicted equilibrium densities.

use crate::el_verify::CdfTable;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::rng::SplitMix64;
use crate::sequences::{RadialDensity, RieszParams};
use serde::{Deserialize, Serialize};

/// N points in R^d with their gas parameters and external potential.
#[derive(Debug, Clone)]
pub struct ParticleConfiguration {
    positions: Vec<f64>,
    n: usize,
    params: RieszParams,
    potential: PotentialSpec,
    /// optional half-space constraint: first coordinate >= a
    half_space: Option<f64>,
}

/// Descent schedule; the optional annealing block runs seeded Langevin
/// sweeps before the deterministic descent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    pub max_iters: usize,
    pub step_init: f64,
    pub backtrack: f64,
    pub grad_tol: f64,
    pub anneal: Option<Anneal>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Anneal {
    pub beta_sequence: Vec<f64>,
    pub steps_per_beta: usize,
    pub seed: u64,
}

impl Schedule {
    pub fn new(max_iters: usize, step_init: f64, backtrack: f64, grad_tol: f64) -> Result<Self> {
        if !(step_init > 0.0) || !(grad_tol > 0.0) || !(backtrack > 0.0 && backtrack < 1.0) {
            return Err(Error::InvalidParams(
                "schedule needs step_init > 0, grad_tol > 0, backtrack in (0,1)".into(),
            ));
        }
        Ok(Schedule {
            max_iters,
            step_init,
            backtrack,
            grad_tol,
            anneal: None,
        })
    }

    pub fn with_anneal(mut self, anneal: Anneal) -> Self {
        self.anneal = Some(anneal);
        self
    }
}

/// Outcome of a minimisation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeStats {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub energy: f64,
}

impl ParticleConfiguration {
    pub fn from_positions(
        positions: Vec<f64>,
        params: RieszParams,
        potential: PotentialSpec,
    ) -> Result<Self> {
        let d = params.d() as usize;
        if positions.is_empty() || positions.len() % d != 0 {
            return Err(Error::InvalidParams(format!(
                "positions length {} is not a positive multiple of d = {d}",
                positions.len()
            )));
        }
        let cfg = ParticleConfiguration {
            n: positions.len() / d,
            positions,
            params,
            potential,
            half_space: None,
        };
        cfg.check_distinct()?;
        Ok(cfg)
    }

    /// Seeded i.i.d. start, uniform in the unit ball.
    pub fn random_in_ball(
        n: usize,
        params: RieszParams,
        potential: PotentialSpec,
        seed: u64,
    ) -> Result<Self> {
        let d = params.d() as usize;
        let mut rng = SplitMix64::new(seed);
        let mut positions = vec![0.0; n * d];
        let mut dir = vec![0.0; d];
        for i in 0..n {
            let radius = rng.next_f64().powf(1.0 / d as f64);
            if d == 1 {
                let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
                positions[i] = sign * radius;
            } else {
                rng.unit_direction(&mut dir);
                for j in 0..d {
                    positions[i * d + j] = dir[j] * radius;
                }
            }
        }
        Self::from_positions(positions, params, potential)
    }

    pub fn with_half_space(mut self, a: f64) -> Self {
        self.half_space = Some(a);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.params.d() as usize
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn params(&self) -> &RieszParams {
        &self.params
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    fn check_distinct(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let mut dist2 = 0.0;
                for k in 0..d {
                    let dx = self.positions[i * d + k] - self.positions[j * d + k];
                    dist2 += dx * dx;
                }
                if dist2 == 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "coincident particles {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Radii |x_i|.
    pub fn radii(&self) -> Vec<f64> {
        let d = self.dim();
        (0..self.n)
            .map(|i| {
                self.positions[i * d..(i + 1) * d]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// CSV snapshot, one row per particle.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        out.push_str(
            &(0..d)
                .map(|j| format!("x{j}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = (0..d)
                .map(|j| format!("{:.17e}", self.positions[i * d + j]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn kernel_energy(s: f64, dist2: f64) -> f64 {
    if s == 0.0 {
        -0.5 * dist2.ln()
    } else if s == 1.0 {
        1.0 / dist2.sqrt()
    } else {
        dist2.powf(-s / 2.0) / s
    }
}

#[inline]
fn kernel_force_weight(s: f64, dist2: f64) -> f64 {
    // |x|^{-s-2} as a function of the squared distance
    if s == 0.0 {
        1.0 / dist2
    } else if s == 1.0 {
        1.0 / (dist2 * dist2.sqrt())
    } else {
        dist2.powf(-(s + 2.0) / 2.0)
    }
}

/// g(new) - g(old) for squared distances, in cancellation-free form: near a
/// minimum the line search must certify energy decreases far below the
/// rounding scale of the total energy.
#[inline]
fn kernel_energy_diff(s: f64, old2: f64, new2: f64) -> f64 {
    let log_ratio = ((new2 - old2) / old2).ln_1p();
    if s == 0.0 {
        -0.5 * log_ratio
    } else {
        kernel_energy(s, old2) * (-(s / 2.0) * log_ratio).exp_m1()
    }
}

/// H(trial) - H(current), accumulated pairwise so that the result is
/// accurate relative to its own (possibly tiny) magnitude rather than to the
/// magnitude of H.
fn hamiltonian_diff(
    cfg: &ParticleConfiguration,
    old: &[f64],
    new: &[f64],
) -> Result<f64> {
    let d = cfg.dim();
    let s = cfg.params.s();
    let n = cfg.n;
    let mut acc = 0.0_f64;
    let mut comp = 0.0_f64;
    let add = |x: f64, acc: &mut f64, comp: &mut f64| {
        let y = x - *comp;
        let t = *acc + y;
        *comp = (t - *acc) - y;
        *acc = t;
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let mut o2 = 0.0;
            let mut n2 = 0.0;
            for k in 0..d {
                let dxo = old[i * d + k] - old[j * d + k];
                let dxn = new[i * d + k] - new[j * d + k];
                o2 += dxo * dxo;
                n2 += dxn * dxn;
            }
            if n2 == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "coincident particles {i} and {j}"
                )));
            }
            add(2.0 * kernel_energy_diff(s, o2, n2), &mut acc, &mut comp);
        }
    }
    for i in 0..n {
        let ro = old[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = new[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let dv = cfg.potential.evaluate(rn)? - cfg.potential.evaluate(ro)?;
        if !dv.is_finite() {
            return Err(Error::InvalidParams(
                "trial point has infinite potential".into(),
            ));
        }
        add(n as f64 * dv, &mut acc, &mut comp);
    }
    Ok(acc)
}

/// The Hamiltonian value; both orders of each pair are counted. Kahan
/// compensation keeps the O(N^2)-term sum resolvable near a minimum, where
/// line searches must certify decreases at the rounding scale.
pub fn hamiltonian(cfg: &ParticleConfiguration) -> Result<f64> {
    let d = cfg.dim();
    let s = cfg.params.s();
    let n = cfg.n;
    let p = &cfg.positions;
    let mut pair = 0.0_f64;
    let mut comp = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut dist2 = 0.0;
            for k in 0..d {
                let dx = p[i * d + k] - p[j * d + k];
                dist2 += dx * dx;
            }
            if dist2 == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "coincident particles {i} and {j}"
                )));
            }
            let y = 2.0 * kernel_energy(s, dist2) - comp;
            let t = pair + y;
            comp = (t - pair) - y;
            pair = t;
        }
    }
    let mut pot = 0.0_f64;
    let mut comp_p = 0.0_f64;
    for i in 0..n {
        let r = p[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = cfg.potential.evaluate(r)?;
        if !v.is_finite() {
            return Err(Error::InvalidParams(format!(
                "particle {i} at radius {r} has infinite potential"
            )));
        }
        let y = v - comp_p;
        let t = pot + y;
        comp_p = (t - pot) - y;
        pot = t;
    }
    Ok(pair + n as f64 * pot)
}

/// Analytic gradient: dH/dx_i = -2 sum_{j != i} (x_i - x_j) |x_i - x_j|^{-s-2}
/// + N V'(|x_i|) x_i/|x_i| (the same expression covers s = 0).
pub fn gradient(cfg: &ParticleConfiguration) -> Result<Vec<f64>> {
    let d = cfg.dim();
    let s = cfg.params.s();
    let n = cfg.n;
    let p = &cfg.positions;
    let mut g = vec![0.0; n * d];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut dist2 = 0.0;
            for k in 0..d {
                let dx = p[i * d + k] - p[j * d + k];
                dist2 += dx * dx;
            }
            if dist2 == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "coincident particles {i} and {j}"
                )));
            }
            let w = -2.0 * kernel_force_weight(s, dist2);
            for k in 0..d {
                let dx = p[i * d + k] - p[j * d + k];
                g[i * d + k] += w * dx;
                g[j * d + k] -= w * dx;
            }
        }
    }
    for i in 0..n {
        let r = p[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.0 {
            let dv = cfg.potential.evaluate_derivative(r)?;
            let w = n as f64 * dv / r;
            for k in 0..d {
                g[i * d + k] += w * p[i * d + k];
            }
        }
    }
    Ok(g)
}

fn project(cfg: &ParticleConfiguration, x: &mut [f64]) {
    let d = cfg.dim();
    if cfg.potential.hard_wall {
        for i in 0..cfg.n {
            let r2: f64 = x[i * d..(i + 1) * d].iter().map(|v| v * v).sum();
            if r2 > 1.0 {
                let inv = r2.sqrt().recip();
                for v in x[i * d..(i + 1) * d].iter_mut() {
                    *v *= inv;
                }
            }
        }
    }
    if let Some(a) = cfg.half_space {
        for i in 0..cfg.n {
            if x[i * d] < a {
                x[i * d] = a;
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projected gradient descent with backtracking line search (monotone in the
/// energy), preceded by seeded Langevin sweeps when annealing is configured.
pub fn minimize(cfg: &ParticleConfiguration, sched: &Schedule) -> Result<(ParticleConfiguration, MinimizeStats)> {
    let mut work = cfg.clone();
    project(cfg, &mut work.positions);

    if let Some(anneal) = &sched.anneal {
        let d = work.dim();
        let eta = sched.step_init;
        let mut counter = 0u64;
        for &beta in &anneal.beta_sequence {
            let noise = (2.0 * eta / beta).sqrt();
            for _ in 0..anneal.steps_per_beta {
                let g = gradient(&work)?;
                for i in 0..work.n {
                    let mut rng = SplitMix64::stream(anneal.seed, counter);
                    counter += 1;
                    for k in 0..d {
                        let (g1, _) = rng.next_normal_pair();
                        work.positions[i * d + k] -= eta * g[i * d + k] - noise * g1;
                    }
                }
                let snapshot = work.positions.clone();
                project(cfg, &mut work.positions);
                let _ = snapshot;
            }
        }
        // annealing may park particles on top of each other in pathological
        // cases; nudge any exact coincidences apart deterministically
        if work.check_distinct().is_err() {
            let mut rng = SplitMix64::stream(anneal.seed, u64::MAX);
            for v in work.positions.iter_mut() {
                *v += 1e-9 * (rng.next_f64() - 0.5);
            }
        }
    }

    // validates distinctness of the start as a side effect
    hamiltonian(&work)?;
    let mut grad = gradient(&work)?;
    let mut iters = 0;
    let mut gnorm = norm(&grad);
    // Barzilai-Borwein trial steps, safeguarded by Armijo backtracking. The
    // sufficient-decrease test uses the pairwise energy *difference*, which
    // stays accurate when the decrease is far below the rounding scale of
    // the total energy, so the iteration is monotone all the way down.
    let mut step = sched.step_init;
    let mut prev_x: Option<Vec<f64>> = None;
    let mut prev_g: Option<Vec<f64>> = None;
    let mut last_accepted_step = sched.step_init;
    while iters < sched.max_iters && gnorm > sched.grad_tol {
        if let (Some(px), Some(pg)) = (&prev_x, &prev_g) {
            let mut sy = 0.0;
            let mut ss = 0.0;
            for i in 0..grad.len() {
                let dx = work.positions[i] - px[i];
                let dg = grad[i] - pg[i];
                sy += dx * dg;
                ss += dx * dx;
            }
            step = if sy > 0.0 && ss > 0.0 {
                (ss / sy).clamp(1e-14, 1e3)
            } else {
                last_accepted_step * 2.0
            };
        }
        let mut accepted = false;
        while step >= 1e-17 {
            let mut trial = work.positions.clone();
            for (t, g) in trial.iter_mut().zip(&grad) {
                *t -= step * g;
            }
            project(&work, &mut trial);
            let decrease: f64 = work
                .positions
                .iter()
                .zip(&trial)
                .zip(&grad)
                .map(|((x, t), g)| (x - t) * g)
                .sum();
            if !(decrease > 0.0) {
                break; // projection ate the whole step
            }
            match hamiltonian_diff(&work, &work.positions, &trial) {
                Ok(diff) if diff <= -1e-4 * decrease => {
                    prev_x = Some(std::mem::replace(&mut work.positions, trial));
                    last_accepted_step = step;
                    accepted = true;
                    break;
                }
                _ => step *= sched.backtrack,
            }
        }
        if !accepted {
            break;
        }
        prev_g = Some(grad);
        grad = gradient(&work)?;
        gnorm = norm(&grad);
        iters += 1;
    }
    let energy = hamiltonian(&work)?;

    let stats = MinimizeStats {
        iterations: iters,
        final_grad_norm: gnorm,
        energy,
    };
    Ok((work, stats))
}

/// Empirical radial CDF against a predicted density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdfReport {
    pub ks_distance: f64,
    /// sorted (radius, empirical CDF just after the jump)
    pub empirical: Vec<(f64, f64)>,
}

/// Kolmogorov-Smirnov distance between the empirical radial distribution of
/// the configuration and the predicted equilibrium CDF.
pub fn radial_cdf(cfg: &ParticleConfiguration, predicted: &RadialDensity) -> CdfReport {
    let mut radii = cfg.radii();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let table = CdfTable::new(predicted, 1024);
    ks_against_table(&radii, &table)
}

pub(crate) fn ks_against_table(sorted_radii: &[f64], table: &CdfTable) -> CdfReport {
    let n = sorted_radii.len() as f64;
    let mut ks = 0.0f64;
    let mut empirical = Vec::with_capacity(sorted_radii.len());
    for (i, &r) in sorted_radii.iter().enumerate() {
        let f = table.eval(r);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        ks = ks.max((f - lo).abs()).max((hi - f).abs());
        empirical.push((r, hi));
    }
    CdfReport {
        ks_distance: ks,
        empirical,
    }
}
