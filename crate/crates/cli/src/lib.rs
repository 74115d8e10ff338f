//! Batch front end: `spectrum`, `rates`, `steady`, `sweep` and `validate`.
//!
//! Every run prints a `# ` comment line with the resolved configuration
//! (reparseable as a config file) followed by CSV with a header row. Floats
//! use 17 significant digits. Exit codes: 0 success, 2 invalid
//! configuration, 3 regime or convergence failure.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::{Arg, ArgAction, ArgMatches, Command};
use polaron_lasing::rates::{selfconsistent_rates, RateOptions};
use polaron_lasing::steadystate::build_chain_from;
use polaron_lasing::{
    build_sd, build_sp, solve_steady, stationary_joint, total_variation, ModelParams, SteadyOptions, SteadyState,
};
use rayon::prelude::*;

pub use config::{ConfigError, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_REGIME: u8 = 3;

/// A failed run: exit code plus the diagnostic for the error stream.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match &e {
            ConfigError::Model(inner) if inner.is_regime() => EXIT_REGIME,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<polaron_lasing::Error> for Failure {
    fn from(e: polaron_lasing::Error) -> Self {
        let code = if e.is_regime() { EXIT_REGIME } else { EXIT_CONFIG };
        Self { code, message: e.to_string() }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { code: EXIT_REGIME, message: format!("write failed: {e}") }
}

fn command() -> Command {
    let mut cmd = Command::new("plasing")
        .about("Stationary photon statistics of a polaron-dressed single-emitter laser")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .global(true)
                .value_name("FILE")
                .help("key=value configuration file; flags override it"),
        );
    for key in config::all_keys() {
        cmd = cmd.arg(
            Arg::new(key)
                .long(key)
                .global(true)
                .value_name("VALUE")
                .action(ArgAction::Set)
                .allow_negative_numbers(true)
                .hide(true),
        );
    }
    cmd.subcommand(Command::new("spectrum").about("S_P and S_D on the frequency grid"))
        .subcommand(Command::new("rates").about("per-level photon and emitter rates and the chain coefficients"))
        .subcommand(Command::new("steady").about("stationary photon distribution and its summary"))
        .subcommand(Command::new("sweep").about("steady-state summary across one parameter"))
        .subcommand(Command::new("validate").about("product form against the joint master-equation solve"))
        .after_help("Every configuration key is also accepted as a flag, e.g. --kappa 2e-6 --n_max 800.")
}

fn resolve(matches: &ArgMatches) -> Result<RunConfig, Failure> {
    let mut pairs = Vec::new();
    if let Some(path) = matches.get_one::<String>("config") {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.clone(), reason: e.to_string() })?;
        pairs.extend(config::tokenize(&text)?);
    }
    for key in config::all_keys() {
        if let Some(value) = matches.get_one::<String>(key) {
            pairs.push((key.to_string(), value.clone()));
        }
    }
    Ok(RunConfig::default().apply(&pairs)?)
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let result = resolve(sub).and_then(|cfg| {
        let mut body = Vec::new();
        writeln!(body, "# {}", cfg.echo()).map_err(io_failure)?;
        let status = match name {
            "spectrum" => spectrum(&cfg, &mut body),
            "rates" => rates(&cfg, &mut body),
            "steady" => steady(&cfg, &mut body),
            "sweep" => sweep(&cfg, &mut body),
            "validate" => validate(&cfg, &mut body),
            _ => unreachable!("clap rejects unknown subcommands"),
        };
        match &cfg.output {
            Some(path) => fs::write(path, &body).map_err(io_failure)?,
            None => out.write_all(&body).map_err(io_failure)?,
        }
        status
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn rate_options(cfg: &RunConfig) -> RateOptions {
    RateOptions {
        series_tol: cfg.series_tol,
        matrix_elements: cfg.matrix_elements,
        selfconsistency: cfg.selfconsistency,
        fixed_point_tol: cfg.fixed_point_tol,
        max_iterations: cfg.max_iterations,
        pump_broadening: cfg.pump_broadening,
    }
}

fn steady_options(cfg: &RunConfig) -> SteadyOptions {
    SteadyOptions { rates: rate_options(cfg), source: cfg.rate_source, tail_bound: cfg.tail_bound, n_max: cfg.n_max }
}

fn solve(cfg: &RunConfig, params: &ModelParams) -> Result<SteadyState, Failure> {
    Ok(solve_steady(params, &steady_options(cfg))?)
}

fn spectrum(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), Failure> {
    let p = &cfg.params;
    let sp = build_sp(p, cfg.series_tol)?;
    // S_D vanishes identically without longitudinal coupling
    let sd = if p.cos2_theta() == 0.0 { None } else { Some(build_sd(p, cfg.series_tol)?) };
    let w = |out: &mut Vec<u8>, s: String| out.extend_from_slice(s.as_bytes());
    w(out, if sd.is_some() { "omega,S_P,S_D\n".into() } else { "omega,S_P\n".into() });
    for omega in cfg.grid.values() {
        match &sd {
            Some(sd) => {
                let (value, negative) = sd.eval_flagged(omega);
                if negative {
                    return Err(polaron_lasing::Error::NegativeSpectrum {
                        omega,
                        value,
                        threshold: -sd.tol() * sd.peak(),
                    }
                    .into());
                }
                w(out, format!("{},{},{}\n", fmt(omega), fmt(sp.eval(omega)), fmt(value)));
            }
            None => w(out, format!("{},{}\n", fmt(omega), fmt(sp.eval(omega)))),
        }
    }
    Ok(())
}

fn rates(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), Failure> {
    let p = &cfg.params;
    // a fixed truncation is reported as is, without the tail-mass check
    let (t, chain) = match cfg.n_max {
        Some(n_max) => {
            let t = selfconsistent_rates(p, n_max, &rate_options(cfg))?;
            let chain = build_chain_from(&t, p, cfg.rate_source)?;
            (t, chain)
        }
        None => {
            let s = solve(cfg, p)?;
            (s.rates, s.chain)
        }
    };
    writeln!(
        out,
        "n,gamma_up,gamma_down,gamma_up_sc,gamma_down_sc,gamma_total,excitation,relaxation,chain_up,chain_down,converged"
    )
    .map_err(io_failure)?;
    for n in 0..=t.n_max {
        writeln!(
            out,
            "{n},{},{},{},{},{},{},{},{},{},{}",
            fmt(t.gamma_ph_up[n]),
            fmt(t.gamma_ph_down[n]),
            fmt(t.gamma_up_sc[n]),
            fmt(t.gamma_down_sc[n]),
            fmt(t.gamma_total[n]),
            fmt(t.excitation(p, n)),
            fmt(t.relaxation(p, n)),
            fmt(chain.gamma_up[n]),
            fmt(chain.gamma_down[n]),
            !t.diverged.contains(&n),
        )
        .map_err(io_failure)?;
    }
    Ok(())
}

fn roots_field(s: &SteadyState) -> String {
    s.semiclassical
        .roots
        .iter()
        .map(|c| format!("{}{}", fmt(c.n), if c.stable { "" } else { "(unstable)" }))
        .collect::<Vec<_>>()
        .join(";")
}

const SUMMARY_HEADER: &str = "mean_n,fano,tail_mass,n_max,semiclassical_n,below_threshold,roots";

fn summary_fields(s: &SteadyState) -> String {
    let d = &s.distribution;
    format!(
        "{},{},{},{},{},{},{}",
        fmt(d.mean_n),
        fmt(d.fano),
        fmt(d.tail_mass),
        s.rates.n_max,
        fmt(s.semiclassical.mean_n),
        s.semiclassical.below_threshold,
        roots_field(s)
    )
}

fn steady(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), Failure> {
    let s = solve(cfg, &cfg.params)?;
    if !s.rates.converged() {
        let levels = &s.rates.diverged;
        return Err(Failure {
            code: EXIT_REGIME,
            message: format!(
                "self-consistent fixed point hit the {}-iteration cap at {} levels (first n = {})",
                cfg.max_iterations,
                levels.len(),
                levels[0]
            ),
        });
    }
    writeln!(out, "n,rho").map_err(io_failure)?;
    for (n, r) in s.distribution.rho.iter().enumerate() {
        writeln!(out, "{n},{}", fmt(*r)).map_err(io_failure)?;
    }
    writeln!(out, "\n{SUMMARY_HEADER}\n{}", summary_fields(&s)).map_err(io_failure)
}

fn sweep(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), Failure> {
    let key = cfg.sweep.key.as_str();
    let points: Vec<Result<ModelParams, Failure>> = cfg
        .sweep
        .values()
        .into_iter()
        .map(|x| {
            let mut v = cfg.values();
            v.set(key, x);
            ModelParams::new(v).map_err(Failure::from)
        })
        .collect();
    let rows: Vec<(f64, Result<SteadyState, Failure>)> = points
        .into_par_iter()
        .zip(cfg.sweep.values())
        .map(|(p, x)| (x, p.and_then(|p| solve(cfg, &p))))
        .collect();
    writeln!(out, "{key},status,{SUMMARY_HEADER}").map_err(io_failure)?;
    let mut first_failure = None;
    for (x, row) in rows {
        match row {
            Ok(s) => writeln!(out, "{},ok,{}", fmt(x), summary_fields(&s)),
            Err(f) => {
                let line = writeln!(out, "{},error,,,,,,,", fmt(x));
                first_failure.get_or_insert(Failure { code: f.code, message: format!("{key}={x}: {}", f.message) });
                line
            }
        }
        .map_err(io_failure)?;
    }
    first_failure.map_or(Ok(()), Err)
}

type Edit = fn(&mut polaron_lasing::ParamValues);

fn validation_set(base: &ModelParams) -> Result<Vec<(&'static str, ModelParams)>, Failure> {
    let v = base.values();
    let edits: [(&'static str, Edit); 6] = [
        ("base", |_| {}),
        ("kappa*2", |v| v.kappa *= 2.0),
        ("pump_up*2", |v| v.pump_up *= 2.0),
        ("g*1.4", |v| v.g *= 1.4),
        ("kT*2", |v| v.kt *= 2.0),
        ("delta_E-0.01", |v| v.delta_e -= 0.01),
    ];
    edits
        .into_iter()
        .map(|(name, edit)| {
            let mut w = v;
            edit(&mut w);
            Ok((name, ModelParams::new(w)?))
        })
        .collect()
}

fn validate(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), Failure> {
    let set = validation_set(&cfg.params)?;
    let rows: Vec<Result<(f64, f64, usize), Failure>> = set
        .par_iter()
        .map(|(_, p)| {
            let s = solve(cfg, p)?;
            let joint = stationary_joint(&s.rates, p, cfg.rate_source)?;
            let tv = total_variation(&s.distribution.rho, &joint.photon_marginal());
            let separation = (s.rates.excitation(p, 0) + s.rates.relaxation(p, 0)) / (p.kappa() * s.distribution.mean_n);
            Ok((tv, separation, s.rates.n_max))
        })
        .collect();
    writeln!(out, "case,n_max,separation,total_variation,tolerance,pass").map_err(io_failure)?;
    let mut failed = Vec::new();
    for ((name, _), row) in set.iter().zip(rows) {
        let (tv, separation, n_max) = row?;
        let pass = tv <= cfg.validation_tol;
        if !pass {
            failed.push(*name);
        }
        writeln!(out, "{name},{n_max},{},{},{},{pass}", fmt(separation), fmt(tv), fmt(cfg.validation_tol))
            .map_err(io_failure)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_REGIME, message: format!("validation failed for {}", failed.join(", ")) })
    }
}
