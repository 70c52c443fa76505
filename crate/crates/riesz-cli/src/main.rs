//! `riesz` - equilibrium measures and external potentials for rotationally
//! symmetric Riesz gases, verified and explored from the command line.
//!
//! Commands: identity, density, potential, verify, energy, halfspace,
//! simulate. Scans emit CSV (17 significant digits); scalar results and
//! reports emit JSON with stable key order. Every flag can also be supplied
//! through a JSON config file (`--config file`); explicit flags win.

use clap::{Parser, Subcommand, ValueEnum};
use riesz_core::el_verify::{
    default_inside_grid, default_outside_grid, el_check, energy, robin_constant, CdfTable,
};
use riesz_core::halfspace;
use riesz_core::potentials::PotentialSpec;
use riesz_core::rng::SplitMix64;
use riesz_core::sequences::{
    density_power_potential_closed, power_measure_coeffs, power_potential_coeffs, RadialDensity,
    RieszParams, SequenceRecord,
};
use riesz_core::simulate::{minimize, radial_cdf, ParticleConfiguration, Schedule};
use riesz_core::specfun::{riesz_identity_residual, SeriesControl};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "riesz", version, about = "Riesz gas equilibrium toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// dimension d
    #[arg(long, global = true)]
    d: Option<u32>,
    /// interaction exponent s
    #[arg(long, global = true)]
    s: Option<f64>,
    /// output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// output format; scans default to csv, reports to json
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON config file with defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for stochastic commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// tolerance for verification / quadrature
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    PowerMeasure,
    PowerPotential,
    SoftEdge,
    Coulomb,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residuals of the unit-argument summation identity over k = 0..kmax
    Identity {
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Equilibrium density profile of a closed family
    Density {
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rmax: Option<f64>,
    },
    /// External potential profile of a closed family or a sequence file
    Potential {
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        /// JSON sequence record {d, s, coeffs, provenance}
        #[arg(long)]
        seq: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rmax: Option<f64>,
    },
    /// Euler-Lagrange verification of a (measure, potential) family pair
    Verify {
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        hard_wall: bool,
    },
    /// Energy of a family pair: Robin route and closed form
    Energy {
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Half-space Coulomb gas: thresholds, rate constants, profile scans
    Halfspace {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// scan F(t,x) - F(0,0) over the default grids
        #[arg(long)]
        scan: bool,
        /// wall distance for the csv G-profile curve
        #[arg(long)]
        t: Option<f64>,
    },
    /// Minimise the N-particle Hamiltonian and compare radial statistics
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        grad_tol: Option<f64>,
    },
}

/// Defaults loaded from --config; explicit flags override.
struct Defaults(serde_json::Map<String, serde_json::Value>);

impl Defaults {
    fn load(path: &Option<PathBuf>) -> Result<Self, String> {
        let map = match path {
            None => serde_json::Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str::<serde_json::Value>(&text)
                    .map_err(|e| format!("config is not valid JSON: {e}"))?
                    .as_object()
                    .cloned()
                    .ok_or("config must be a JSON object".to_string())?
            }
        };
        Ok(Defaults(map))
    }

    fn f64(&self, key: &str, flag: Option<f64>, fallback: Option<f64>) -> Result<f64, String> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_f64()))
            .or(fallback)
            .ok_or(format!("missing required parameter `{key}`"))
    }

    fn u64(&self, key: &str, flag: Option<u64>, fallback: Option<u64>) -> Result<u64, String> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_u64()))
            .or(fallback)
            .ok_or(format!("missing required parameter `{key}`"))
    }

    fn family(&self, flag: Option<Family>) -> Result<Family, String> {
        if let Some(f) = flag {
            return Ok(f);
        }
        match self.0.get("family").and_then(|v| v.as_str()) {
            Some("power-measure") => Ok(Family::PowerMeasure),
            Some("power-potential") => Ok(Family::PowerPotential),
            Some("soft-edge") => Ok(Family::SoftEdge),
            Some("coulomb") => Ok(Family::Coulomb),
            Some(other) => Err(format!("unknown family `{other}` in config")),
            None => Err("missing required parameter `family`".into()),
        }
    }
}

fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            let obj = ErrorObject {
                error: ErrorBody {
                    kind: "error",
                    message: msg,
                },
            };
            eprintln!("{}", serde_json::to_string(&obj).unwrap());
            ExitCode::from(1)
        }
    }
}

fn params_from(cfg: &Defaults, cli_d: Option<u32>, cli_s: Option<f64>) -> Result<RieszParams, String> {
    let d = cfg.u64("d", cli_d.map(u64::from), None)? as u32;
    let s = cfg.f64("s", cli_s, None)?;
    RieszParams::new_extended(d, s).map_err(|e| e.to_string())
}

/// (density, potential, label) for a named family pair.
fn family_pair(
    family: Family,
    alpha: Option<f64>,
    p: Option<u32>,
    m: Option<u32>,
    params: RieszParams,
) -> Result<(RadialDensity, PotentialSpec, String), String> {
    let k_default = 400;
    match family {
        Family::PowerMeasure => {
            let alpha = alpha.ok_or("power-measure family needs --alpha")?;
            let seq = power_measure_coeffs(alpha, &params, k_default).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((
                rd,
                PotentialSpec::power_measure_closed(alpha, params),
                format!("power-measure alpha={alpha}"),
            ))
        }
        Family::SoftEdge => {
            let m = m.ok_or("soft-edge family needs --m")?;
            let alpha = (params.s() - params.df()) / 2.0 + 2.0 * m as f64 + 1.0;
            let seq = power_measure_coeffs(alpha, &params, k_default).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((rd, PotentialSpec::soft_edge(m, params), format!("soft-edge m={m}")))
        }
        Family::PowerPotential => {
            let p = p.ok_or("power-potential family needs --p")?;
            let seq = power_potential_coeffs(p, &params, k_default).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
            Ok((rd, PotentialSpec::pure_power(p, params), format!("power-potential p={p}")))
        }
        Family::Coulomb => {
            let alpha = alpha.unwrap_or(0.0);
            let seq = power_measure_coeffs(alpha, &params, k_default).map_err(|e| e.to_string())?;
            let rd = RadialDensity::new(seq.clone(), params).map_err(|e| e.to_string())?;
            Ok((
                rd,
                PotentialSpec::coulomb_series(seq, params).with_hard_wall(true),
                format!("coulomb alpha={alpha}"),
            ))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let cfg = Defaults::load(&cli.config)?;
    let tol = cfg.f64("tol", cli.tol, Some(1e-6))?;
    let seed = cfg.u64("seed", cli.seed, Some(1))?;

    match cli.command {
        Command::Identity { kmax } => {
            let params = params_from(&cfg, cli.d, cli.s)?;
            let kmax = cfg.u64("kmax", kmax.map(u64::from), Some(10))? as u32;
            let ctrl = SeriesControl::default();
            let mut csv = String::from("k,residual\n");
            for k in 0..=kmax {
                let r = riesz_identity_residual(params.d(), params.s(), k, &ctrl)
                    .map_err(|e| e.to_string())?;
                csv.push_str(&format!("{k},{}\n", fmt17(r)));
            }
            emit(&cli.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Density {
            family,
            alpha,
            p,
            grid,
            rmax,
        } => {
            let params = params_from(&cfg, cli.d, cli.s)?;
            let family = cfg.family(family)?;
            let grid = cfg.u64("grid", grid.map(|g| g as u64), Some(200))? as usize;
            let rmax = cfg.f64("rmax", rmax, Some(1.0))?;
            let mut csv = String::from("r,mu,f\n");
            for i in 0..=grid {
                let r = rmax * i as f64 / grid as f64;
                let (mu, f) = match family {
                    Family::PowerPotential => {
                        let p = cfg.u64("p", p.map(u64::from), None)? as u32;
                        let mu = if r <= 1.0 {
                            density_power_potential_closed(p, &params, r)
                                .map_err(|e| e.to_string())?
                        } else {
                            0.0
                        };
                        (mu, params.c_d() * r.powi(params.d() as i32 - 1) * mu)
                    }
                    _ => {
                        let alpha = cfg.f64("alpha", alpha, Some(0.0))?;
                        let seq = power_measure_coeffs(alpha, &params, 400)
                            .map_err(|e| e.to_string())?;
                        let rd = RadialDensity::new(seq, params).map_err(|e| e.to_string())?;
                        (rd.density_exact(r), rd.radial_density_exact(r))
                    }
                };
                csv.push_str(&format!("{},{},{}\n", fmt17(r), fmt17(mu), fmt17(f)));
            }
            emit(&cli.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Potential {
            family,
            alpha,
            p,
            m,
            seq,
            grid,
            rmax,
        } => {
            let grid = cfg.u64("grid", grid.map(|g| g as u64), Some(200))? as usize;
            let rmax = cfg.f64("rmax", rmax, Some(1.0))?;
            let (spec, params) = if let Some(path) = seq {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                let rec: SequenceRecord =
                    serde_json::from_str(&text).map_err(|e| e.to_string())?;
                let (params, sequence) = rec.into_parts().map_err(|e| e.to_string())?;
                let spec = if params.is_coulomb() {
                    PotentialSpec::coulomb_series(sequence, params)
                } else {
                    PotentialSpec::series(sequence, params)
                };
                (spec, params)
            } else {
                let params = params_from(&cfg, cli.d, cli.s)?;
                let family = cfg.family(family)?;
                let spec = match family {
                    Family::PowerMeasure => {
                        let alpha = cfg.f64("alpha", alpha, None)?;
                        PotentialSpec::power_measure_closed(alpha, params)
                    }
                    Family::SoftEdge => {
                        let m = cfg.u64("m", m.map(u64::from), Some(0))? as u32;
                        PotentialSpec::soft_edge(m, params)
                    }
                    Family::PowerPotential => {
                        let p = cfg.u64("p", p.map(u64::from), None)? as u32;
                        PotentialSpec::pure_power(p, params)
                    }
                    Family::Coulomb => {
                        let alpha = cfg.f64("alpha", alpha, Some(0.0))?;
                        let seq = power_measure_coeffs(alpha, &params, 400)
                            .map_err(|e| e.to_string())?;
                        PotentialSpec::coulomb_series(seq, params)
                    }
                };
                (spec, params)
            };
            let _ = params;
            let mut csv = String::from("r,V\n");
            for i in 0..=grid {
                let r = rmax * i as f64 / grid as f64;
                let v = spec.evaluate(r).map_err(|e| e.to_string())?;
                csv.push_str(&format!("{},{}\n", fmt17(r), fmt17(v)));
            }
            emit(&cli.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            family,
            alpha,
            p,
            m,
            hard_wall,
        } => {
            let params = params_from(&cfg, cli.d, cli.s)?;
            let family = cfg.family(family)?;
            let (rd, spec, label) = family_pair(family, alpha, p, m, params)?;
            let wall = hard_wall || spec.hard_wall;
            let spec = spec.with_hard_wall(wall);
            let report = el_check(
                &rd,
                &spec,
                &default_inside_grid(),
                &default_outside_grid(),
                tol,
            )
            .map_err(|e| e.to_string())?;
            let passed = report.passes(tol, 1e-8_f64.max(tol * 1e-2));
            match cli.format {
                Some(Format::Csv) => emit(&cli.out, &report.to_csv())?,
                _ => {
                    #[derive(Serialize)]
                    struct VerifyOut<'a> {
                        d: u32,
                        s: f64,
                        pair: &'a str,
                        passed: bool,
                        report: &'a riesz_core::ElReport,
                    }
                    let out = VerifyOut {
                        d: params.d(),
                        s: params.s(),
                        pair: &label,
                        passed,
                        report: &report,
                    };
                    emit(
                        &cli.out,
                        &format!("{}\n", serde_json::to_string_pretty(&out).unwrap()),
                    )?;
                }
            }
            if passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }

        Command::Energy { family, alpha, p, m } => {
            let params = params_from(&cfg, cli.d, cli.s)?;
            let family = cfg.family(family)?;
            let (rd, spec, label) = family_pair(family, alpha, p, m, params)?;
            let rep = energy(&rd, &spec).map_err(|e| e.to_string())?;
            let c = robin_constant(rd.seq(), &params).map_err(|e| e.to_string())?;
            #[derive(Serialize)]
            struct EnergyOut<'a> {
                d: u32,
                s: f64,
                pair: &'a str,
                robin_constant: f64,
                energy: &'a riesz_core::EnergyReport,
            }
            let out = EnergyOut {
                d: params.d(),
                s: params.s(),
                pair: &label,
                robin_constant: c,
                energy: &rep,
            };
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&out).unwrap()),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Halfspace { a, beta, scan, t } => {
            let d = cfg.u64("d", cli.d.map(u64::from), None)? as u32;
            let a_cri = halfspace::a_critical(d);
            let a = cfg.f64("a", a, Some(a_cri))?;
            let beta = cfg.f64("beta", beta, Some(2.0))?;
            let prob = halfspace::HalfspaceProblem::new(d, a, beta).map_err(|e| e.to_string())?;

            if cli.format == Some(Format::Csv) {
                // profile curves: vertical margin and, for d >= 2, G(x) - G(0)
                let t_val = cfg.f64("t", t, Some(0.3))?;
                let mut csv = String::from("kind,t,x,value\n");
                let (t_grid, x_grid) = halfspace::default_scan_grids(d.max(1));
                for (tv, margin) in
                    halfspace::vertical_check(&prob, &t_grid).map_err(|e| e.to_string())?
                {
                    csv.push_str(&format!("vertical,{},0,{}\n", fmt17(tv), fmt17(margin)));
                }
                if d >= 2 {
                    let g0 = halfspace::g_profile(d, t_val, 0.0, 1e-9).map_err(|e| e.to_string())?;
                    for &x in &x_grid {
                        let g = halfspace::g_profile(d, t_val, x, 1e-9)
                            .map_err(|e| e.to_string())?;
                        csv.push_str(&format!(
                            "g_profile,{},{},{}\n",
                            fmt17(t_val),
                            fmt17(x),
                            fmt17(g - g0)
                        ));
                    }
                }
                emit(&cli.out, &csv)?;
                return Ok(ExitCode::SUCCESS);
            }

            #[derive(Serialize)]
            struct HalfspaceOut {
                #[serde(flatten)]
                summary: halfspace::HalfspaceSummary,
                #[serde(skip_serializing_if = "Option::is_none")]
                scan: Option<halfspace::ScanReport>,
            }
            let scan_report = if scan {
                let (t_grid, x_grid) = halfspace::default_scan_grids(d);
                Some(
                    halfspace::conjecture_scan(d, a, &t_grid, &x_grid, tol.min(1e-8))
                        .map_err(|e| e.to_string())?,
                )
            } else {
                None
            };
            let out = HalfspaceOut {
                summary: halfspace::summary(&prob),
                scan: scan_report,
            };
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&out).unwrap()),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            n,
            family,
            alpha,
            p,
            m,
            iters,
            step,
            grad_tol,
        } => {
            let params = params_from(&cfg, cli.d, cli.s)?;
            let family = cfg.family(family)?;
            let n = cfg.u64("n", n.map(|v| v as u64), Some(200))? as usize;
            let iters = cfg.u64("iters", iters.map(|v| v as u64), Some(20_000))? as usize;
            let step = cfg.f64("step", step, Some(2e-4))?;
            let grad_tol = cfg.f64("grad_tol", grad_tol, Some(1e-6 * n as f64))?;
            let (rd, spec, label) = family_pair(family, alpha, p, m, params)?;

            // start from the predicted law, seeded
            let table = CdfTable::new(&rd, 1024);
            let dim = params.d() as usize;
            let mut rng = SplitMix64::new(seed);
            let mut pos = vec![0.0; n * dim];
            let mut dir = vec![0.0; dim];
            for i in 0..n {
                let r = table.quantile(rng.next_f64());
                if dim == 1 {
                    let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
                    pos[i] = sign * r;
                } else {
                    rng.unit_direction(&mut dir);
                    for k in 0..dim {
                        pos[i * dim + k] = dir[k] * r;
                    }
                }
            }
            let cfg0 = ParticleConfiguration::from_positions(pos, params, spec)
                .map_err(|e| e.to_string())?;
            let sched = Schedule::new(iters, step, 0.5, grad_tol).map_err(|e| e.to_string())?;
            let (out_cfg, stats) = minimize(&cfg0, &sched).map_err(|e| e.to_string())?;
            let ks = radial_cdf(&out_cfg, &rd);

            #[derive(Serialize)]
            struct SimMeta<'a> {
                d: u32,
                s: f64,
                pair: &'a str,
                n: usize,
                seed: u64,
                stats: &'a riesz_core::simulate::MinimizeStats,
                ks_distance: f64,
            }
            let meta = SimMeta {
                d: params.d(),
                s: params.s(),
                pair: &label,
                n,
                seed,
                stats: &stats,
                ks_distance: ks.ks_distance,
            };
            let meta_json = format!("{}\n", serde_json::to_string_pretty(&meta).unwrap());
            let csv = out_cfg.to_csv();
            match &cli.out {
                Some(_) => {
                    emit(&cli.out, &csv)?;
                    print!("{meta_json}");
                }
                None => {
                    print!("{csv}");
                    eprint!("{meta_json}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
