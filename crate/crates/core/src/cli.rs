// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Settings come from an optional config file (TOML, JSON, or the first-line
//! header of a CSV this tool wrote) and are overridden by flags. Unknown keys,
//! and keys that do not apply to the chosen command, are rejected. Every CSV
//! echoes its fully resolved settings on the first line, so feeding a CSV
//! back through `--config` reproduces it.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analytics::critical_field;
use crate::error::Error;
use crate::experiments::presets::{preset, Preset, PresetKind};
use crate::experiments::sweep::{Axis, Ensemble, Observable, Parameter, Scale, SweepSpec};
use crate::experiments::{
    conductance_vs_dephasing, current_and_conductance, disorder_study, format_value, n_scaling_comparison,
    optimal_field_search, run_sweep, transfer_time, SweepResult,
};
use crate::liouvillian::{propagate_populations, transfer_time_integrate, transfer_time_liouville, IntegrateOptions};
use crate::model::{build_initial_state, default_realization, ChainParams, Disorder, InitialState};
use crate::nonhermitian::{effective_spectrum, locate_st_default, superradiance_diagnostics, transfer_time_spectral};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit status 2.
    Usage(String),
    /// The computation itself failed; exit status 1.
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) => 1,
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Solver(e) => (e.kind(), e.to_string()),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "chaintransport", version, about = "Transfer times of a tilted, dephased chain coupled to a sink")]
pub struct Cli {
    /// Worker threads for sweeps and ensembles (default: available parallelism).
    #[arg(long, env = "CHAINTRANSPORT_JOBS", global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Widths, energies and participation ratios of the effective Hamiltonian.
    Spectrum(ChainArgs),
    /// Average transfer time of one configuration.
    TransferTime {
        #[command(flatten)]
        chain: ChainArgs,
        /// auto | liouville | nonhermitian | integrate
        #[arg(long)]
        method: Option<String>,
    },
    /// Site populations over time.
    Trajectory {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of output times, including t = 0.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Generic one- or two-parameter sweep.
    Sweep {
        #[command(flatten)]
        chain: ChainArgs,
        /// PARAM:linear|log:LO:HI:N, PARAM:symlog:MAX:NLOG:NLIN, or PARAM:values|logvalues:V1,V2,...
        #[arg(long)]
        axis1: Option<String>,
        #[arg(long)]
        axis2: Option<String>,
        /// tau | delta_gamma | pr_super | pr_sub | current
        #[arg(long)]
        observable: Option<String>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Grid search for the transfer-time-minimizing field.
    OptimalField {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, allow_hyphen_values = true)]
        e0_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        e0_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Disorder-averaged transfer time over width × dephasing at zero field.
    Disorder {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        dephasing: Option<Vec<f64>>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Charge current over a symmetric field grid and the fitted conductance.
    Current {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        e0_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        fit_window: Option<f64>,
    },
    /// Regenerate a named figure study.
    Preset {
        name: String,
        /// Output CSV; multi-panel presets append `_<panel>` to the file stem.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    /// TOML/JSON config file, or a CSV previously written by this tool.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of chain sites N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub hopping: Option<f64>,
    /// Field step E₀ per site.
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub gamma_out: Option<f64>,
    #[arg(long)]
    pub gamma_phi: Option<f64>,
    #[arg(long)]
    pub disorder_width: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace gamma_out by the located superradiant transition.
    #[arg(long)]
    pub locate_st: bool,
    /// localized:N | flat | gaussian:CENTER[,WIDTH[,MOMENTUM]]
    #[arg(long)]
    pub state: Option<String>,
}

/// Flat key-value settings shared by every command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_out: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locate_st: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SweepSpec>,
}

const CHAIN_KEYS: [&str; 9] = [
    "command",
    "n",
    "hopping",
    "e0",
    "gamma_out",
    "gamma_phi",
    "disorder_width",
    "seed",
    "locate_st",
];

fn allowed_keys(command: &str) -> Vec<&'static str> {
    let extra: &[&str] = match command {
        "spectrum" => &[],
        "transfer-time" => &["state", "method"],
        "trajectory" => &["state", "t_max", "steps"],
        "sweep" => &["state", "axis1", "axis2", "observable", "realizations", "spec"],
        "optimal-field" => &["state", "e0_min", "e0_max", "points"],
        "disorder" => &["state", "widths", "dephasing", "realizations"],
        "current" => &["state", "e0_max", "points", "fit_window"],
        _ => &[],
    };
    CHAIN_KEYS.iter().chain(extra).copied().collect()
}

impl Settings {
    /// Fields of `over` take precedence.
    fn overlay(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, n, hopping, e0, gamma_out, gamma_phi, disorder_width, seed, locate_st, state, method, t_max,
            steps, e0_min, e0_max, points, fit_window, widths, dephasing, realizations, axis1, axis2, observable,
            spec
        )
    }

    fn check_keys(&self, command: &str) -> CliResult<()> {
        let value = serde_json::to_value(self).map_err(usage)?;
        let allowed = allowed_keys(command);
        for key in value.as_object().into_iter().flat_map(|m| m.keys()) {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("key {key:?} does not apply to '{command}'")));
            }
        }
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Usage(format!("config is for '{c}', not '{command}'")));
            }
        }
        Ok(())
    }

    fn to_json(&self) -> String {
        serde_json::to_string(self).expect("settings serialize")
    }
}

/// Reads settings from a TOML or JSON file, or from the echoed header of a
/// CSV written by this tool (`# config: …` or `# spec: …`).
pub fn load_config(path: &Path) -> CliResult<Settings> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or("");
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("{}: {e}", path.display()));
    if let Some(json) = first.strip_prefix("# config: ") {
        return serde_json::from_str(json).map_err(|e| bad(&e));
    }
    if let Some(json) = first.strip_prefix("# spec: ") {
        let spec: SweepSpec = serde_json::from_str(json).map_err(|e| bad(&e))?;
        return Ok(Settings {
            spec: Some(spec),
            ..Settings::default()
        });
    }
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| bad(&e))
    } else {
        toml::from_str(&text).map_err(|e| bad(&e))
    }
}

fn chain_settings(a: &ChainArgs) -> Settings {
    Settings {
        n: a.n,
        hopping: a.hopping,
        e0: a.e0,
        gamma_out: a.gamma_out,
        gamma_phi: a.gamma_phi,
        disorder_width: a.disorder_width,
        seed: a.seed,
        locate_st: a.locate_st.then_some(true),
        state: a.state.clone(),
        ..Settings::default()
    }
}

fn merged(command: &str, chain: &ChainArgs, extra: Settings) -> CliResult<Settings> {
    let file = match &chain.config {
        Some(p) => load_config(p)?,
        None => Settings::default(),
    };
    file.check_keys(command)?;
    let flags = chain_settings(chain).overlay(extra);
    flags.check_keys(command)?;
    Ok(file.overlay(flags))
}

/// Resolves chain parameters, filling defaults into `s` and replacing
/// `locate_st` by the located coupling.
fn resolve_chain(s: &mut Settings) -> CliResult<ChainParams> {
    let mut p = ChainParams::new(s.n.unwrap_or(10));
    p.hopping = s.hopping.unwrap_or(1.0);
    p.field_step = s.e0.unwrap_or(0.0);
    p.sink_rate = s.gamma_out.unwrap_or(2.0);
    p.dephasing_rate = s.gamma_phi.unwrap_or(0.0);
    if let Some(w) = s.disorder_width {
        p.disorder = Some(Disorder {
            width: w,
            seed: s.seed.unwrap_or(0),
        });
    }
    p.validate().map_err(usage)?;
    if s.locate_st.unwrap_or(false) {
        let eps = default_realization(&p);
        p.sink_rate = locate_st_default(&p, eps.as_deref())?.gamma_st;
    }
    s.n = Some(p.n_sites);
    s.hopping = Some(p.hopping);
    s.e0 = Some(p.field_step);
    s.gamma_out = Some(p.sink_rate);
    s.gamma_phi = Some(p.dephasing_rate);
    s.locate_st = None;
    Ok(p)
}

fn resolve_state(s: &mut Settings, default: InitialState, n: usize) -> CliResult<InitialState> {
    let state = match &s.state {
        Some(text) => text.parse::<InitialState>().map_err(usage)?,
        None => default,
    };
    build_initial_state(&state, n).map_err(usage)?;
    s.state = Some(state.to_string());
    Ok(state)
}

/// `PARAM:linear|log:LO:HI:N`, `PARAM:symlog:MAX:NLOG:NLIN`, `PARAM:values|logvalues:V1,V2,...`.
pub fn parse_axis(text: &str) -> crate::Result<Axis> {
    let bad = || Error::InvalidSweep(format!("cannot parse axis {text:?}"));
    let mut parts = text.splitn(3, ':');
    let param: Parameter = parts.next().ok_or_else(bad)?.parse()?;
    let kind = parts.next().ok_or_else(bad)?;
    let rest = parts.next().ok_or_else(bad)?;
    let nums = |sep: char| -> crate::Result<Vec<f64>> {
        rest.split(sep).map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    match kind {
        "linear" | "log" | "symlog" => {
            let v = nums(':')?;
            if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 1.0 {
                return Err(bad());
            }
            match kind {
                "linear" => Axis::linear(param, v[0], v[1], v[2] as usize),
                "log" => Axis::log(param, v[0], v[1], v[2] as usize),
                _ => {
                    if v[1].fract() != 0.0 || v[1] < 0.0 {
                        return Err(bad());
                    }
                    Axis::symmetric_log(param, v[0], v[1] as usize, v[2] as usize)
                }
            }
        }
        "values" => Axis::new(param, nums(',')?, Scale::Linear),
        "logvalues" => Axis::new(param, nums(',')?, Scale::Log),
        _ => Err(bad()),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Lines for stdout.
    pub summary: Vec<String>,
    /// Lines for stderr (provenance, warnings).
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn write_text(path: &Path, text: &str, outcome: &mut Outcome) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Solver(Error::Io(format!("{}: {e}", path.display()))))?;
    outcome.files.push(path.to_path_buf());
    Ok(())
}

/// CSV text with a leading `# <tag>: <json>` line.
fn csv_with_header(tag: &str, json: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut buf = Vec::new();
    writeln!(buf, "# {tag}: {json}").expect("in-memory write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(Error::from)?;
        for r in rows {
            w.write_record(r).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
    }
    Ok(String::from_utf8(buf).expect("utf-8"))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(format_value).unwrap_or_default()
}

fn run_spectrum(chain: &ChainArgs) -> CliResult<Outcome> {
    let mut s = merged("spectrum", chain, Settings::default())?;
    let p = resolve_chain(&mut s)?;
    s.command = Some("spectrum".into());
    let eps = default_realization(&p);
    let spec = effective_spectrum(&p, eps.as_deref())?;
    let sum: f64 = spec.widths.iter().sum();
    let mut out = Outcome::default();
    out.summary.push(format!(
        "states = {}, sum_width = {} [Omega], gamma_out = {} [Omega]",
        spec.len(),
        format_value(sum),
        format_value(p.sink_rate)
    ));
    if let Ok(d) = superradiance_diagnostics(&spec, p.sink_rate) {
        out.summary.push(format!(
            "gamma_max = {}, gamma_sub_mean = {}, delta_gamma = {}, pr_super = {}, pr_sub_mean = {}",
            format_value(d.gamma_max),
            format_value(d.gamma_avg_sub),
            d.normalized_gap.map_or("undefined".into(), format_value),
            format_value(d.pr_super),
            format_value(d.pr_sub_avg)
        ));
    }
    if let Some(path) = &chain.out {
        let rows: Vec<Vec<String>> = (0..spec.len())
            .map(|k| {
                vec![
                    k.to_string(),
                    format_value(spec.eigenvalues[k].re),
                    format_value(spec.widths[k]),
                    format_value(spec.participation[k]),
                ]
            })
            .collect();
        let header = ["index", "re_energy", "width", "participation"].map(String::from);
        let mut text = csv_with_header("config", &s.to_json(), &header, &rows)?;
        text.push_str(&format!(
            "# check: sum_width = {}, gamma_out = {}\n",
            format_value(sum),
            format_value(p.sink_rate)
        ));
        write_text(path, &text, &mut out)?;
    }
    Ok(out)
}

fn run_transfer_time(chain: &ChainArgs, method: Option<String>) -> CliResult<Outcome> {
    let mut s = merged(
        "transfer-time",
        chain,
        Settings {
            method,
            ..Settings::default()
        },
    )?;
    let p = resolve_chain(&mut s)?;
    let state = resolve_state(&mut s, InitialState::reference_gaussian(), p.n_sites)?;
    let method = s.method.clone().unwrap_or_else(|| "auto".into());
    s.method = Some(method.clone());
    s.command = Some("transfer-time".into());
    let psi = build_initial_state(&state, p.n_sites)?;
    let eps = default_realization(&p);
    let eps = eps.as_deref();
    let (tau, used) = match method.as_str() {
        "auto" => (transfer_time(&p, eps, &psi)?, "auto".to_string()),
        "liouville" => {
            let t = transfer_time_liouville(&p, eps, &psi)?;
            (t.tau, format!("liouville/{}", serde_json::to_value(t.method).unwrap().as_str().unwrap_or("")))
        }
        "nonhermitian" => {
            if p.dephasing_rate != 0.0 {
                return Err(CliError::Usage("the nonhermitian method requires gamma_phi = 0".into()));
            }
            let spec = effective_spectrum(&p, eps)?;
            (transfer_time_spectral(&spec, &psi, p.sink_rate)?, "nonhermitian".to_string())
        }
        "integrate" => {
            let r = transfer_time_integrate(&p, eps, &psi, &IntegrateOptions::default())?;
            (r.tau, "integrate".to_string())
        }
        other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
    };
    let mut out = Outcome::default();
    out.summary.push(format!("tau = {} [hbar/Omega]", format_value(tau)));
    if let Some(path) = &chain.out {
        let header = ["tau", "method"].map(String::from);
        let text = csv_with_header("config", &s.to_json(), &header, &[vec![format_value(tau), used]])?;
        write_text(path, &text, &mut out)?;
    }
    Ok(out)
}

fn trajectory_csv(json: &str, sample: &crate::liouvillian::TrajectorySample) -> CliResult<String> {
    let n = sample.populations.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|j| format!("p{j}")));
    let rows: Vec<Vec<String>> = sample
        .times
        .iter()
        .zip(&sample.populations)
        .map(|(t, pops)| std::iter::once(format_value(*t)).chain(pops.iter().map(|x| format_value(*x))).collect())
        .collect();
    csv_with_header("config", json, &header, &rows)
}

fn run_trajectory(chain: &ChainArgs, t_max: Option<f64>, steps: Option<usize>) -> CliResult<Outcome> {
    let mut s = merged(
        "trajectory",
        chain,
        Settings {
            t_max,
            steps,
            ..Settings::default()
        },
    )?;
    let p = resolve_chain(&mut s)?;
    let state = resolve_state(&mut s, InitialState::reference_gaussian(), p.n_sites)?;
    let t_max = s.t_max.unwrap_or(40.0);
    let steps = s.steps.unwrap_or(401);
    if !(t_max > 0.0) || steps < 2 {
        return Err(CliError::Usage("trajectory needs t_max > 0 and steps >= 2".into()));
    }
    s.t_max = Some(t_max);
    s.steps = Some(steps);
    s.command = Some("trajectory".into());
    let psi = build_initial_state(&state, p.n_sites)?;
    let eps = default_realization(&p);
    let sample = propagate_populations(&p, eps.as_deref(), &psi, &linspace(0.0, t_max, steps))?;
    let mut out = Outcome::default();
    out.summary.push(match sample.tau {
        Some(t) => format!("tau = {} [hbar/Omega]", format_value(t)),
        None => "tau = undefined (no sink)".to_string(),
    });
    if let Some(path) = &chain.out {
        write_text(path, &trajectory_csv(&s.to_json(), &sample)?, &mut out)?;
    }
    Ok(out)
}

fn sweep_summary(r: &SweepResult, out: &mut Outcome) {
    out.summary.push(format!("cells = {}, failed = {}", r.cells.len(), r.cells.iter().filter(|c| c.value.is_none()).count()));
    out.notes.push(format!("# provenance: {}", serde_json::to_string(&r.provenance).unwrap_or_default()));
    for f in &r.failures {
        out.notes.push(format!(
            "# failure at ({}, {}){}: {}",
            format_value(f.axis1),
            fmt_opt(f.axis2),
            f.realization.map(|k| format!(" realization {k}")).unwrap_or_default(),
            f.error
        ));
    }
}

fn run_sweep_command(chain: &ChainArgs, extra: Settings) -> CliResult<Outcome> {
    let mut s = merged("sweep", chain, extra)?;
    let spec = match s.spec.take() {
        Some(mut spec) => {
            let b = &mut spec.base;
            macro_rules! set {
                ($key:ident, $field:ident) => {
                    if let Some(v) = s.$key {
                        b.$field = v;
                    }
                };
            }
            set!(n, n_sites);
            set!(hopping, hopping);
            set!(e0, field_step);
            set!(gamma_out, sink_rate);
            set!(gamma_phi, dephasing_rate);
            if let Some(w) = s.disorder_width {
                b.disorder = Some(Disorder { width: w, seed: 0 });
            }
            if s.locate_st == Some(true) {
                b.sink_rate = locate_st_default(b, None)?.gamma_st;
            }
            if let Some(st) = &s.state {
                spec.initial_state = st.parse().map_err(usage)?;
            }
            if let Some(a) = &s.axis1 {
                spec.axis1 = parse_axis(a).map_err(usage)?;
            }
            if let Some(a) = &s.axis2 {
                spec.axis2 = Some(parse_axis(a).map_err(usage)?);
            }
            if let Some(o) = &s.observable {
                spec.observable = o.parse().map_err(usage)?;
            }
            if s.realizations.is_some() || s.seed.is_some() {
                let e = spec.ensemble.unwrap_or(Ensemble {
                    n_realizations: 100,
                    seed: 0,
                });
                spec.ensemble = Some(Ensemble {
                    n_realizations: s.realizations.unwrap_or(e.n_realizations),
                    seed: s.seed.unwrap_or(e.seed),
                });
            }
            spec
        }
        None => {
            let seed = s.seed.take();
            let width = s.disorder_width.take();
            let base = resolve_chain(&mut s)?;
            let state = resolve_state(&mut s, InitialState::reference_gaussian(), base.n_sites)?;
            let axis1 = parse_axis(s.axis1.as_deref().ok_or_else(|| CliError::Usage("sweep needs axis1".into()))?)
                .map_err(usage)?;
            let axis2 = s.axis2.as_deref().map(parse_axis).transpose().map_err(usage)?;
            let observable: Observable = s.observable.as_deref().unwrap_or("tau").parse().map_err(usage)?;
            let w_swept = [Some(&axis1), axis2.as_ref()]
                .into_iter()
                .flatten()
                .any(|a| a.parameter == Parameter::W && a.grid.iter().any(|w| *w > 0.0));
            let disordered = w_swept || width.is_some_and(|w| w > 0.0);
            SweepSpec {
                base: ChainParams {
                    disorder: width.filter(|w| *w > 0.0).map(|w| Disorder { width: w, seed: 0 }),
                    ..base
                },
                initial_state: state,
                axis1,
                axis2,
                observable,
                ensemble: disordered.then(|| Ensemble {
                    n_realizations: s.realizations.unwrap_or(100),
                    seed: seed.unwrap_or(0),
                }),
            }
        }
    };
    spec.validate().map_err(usage)?;
    let result = run_sweep(&spec)?;
    let mut out = Outcome::default();
    sweep_summary(&result, &mut out);
    if let Some(path) = &chain.out {
        write_text(path, &result.to_csv_string(), &mut out)?;
    }
    Ok(out)
}

fn run_optimal_field(chain: &ChainArgs, extra: Settings) -> CliResult<Outcome> {
    let mut s = merged("optimal-field", chain, extra)?;
    let p = resolve_chain(&mut s)?;
    let state = resolve_state(&mut s, InitialState::reference_gaussian(), p.n_sites)?;
    let ec = critical_field(p.n_sites, p.hopping);
    let lo = s.e0_min.unwrap_or(-2.0 * ec);
    let hi = s.e0_max.unwrap_or(2.0 * ec);
    let points = s.points.unwrap_or(81);
    if !(hi > lo) || points < 3 {
        return Err(CliError::Usage("optimal-field needs e0_max > e0_min and points >= 3".into()));
    }
    s.e0_min = Some(lo);
    s.e0_max = Some(hi);
    s.points = Some(points);
    s.e0 = None;
    s.command = Some("optimal-field".into());
    let psi = build_initial_state(&state, p.n_sites)?;
    let eps = default_realization(&p);
    if eps.is_some() {
        return Err(CliError::Usage("optimal-field does not support disorder".into()));
    }
    let r = optimal_field_search(&p, &psi, &linspace(lo, hi, points))?;
    let mut out = Outcome::default();
    out.summary.push(format!(
        "e0_opt = {}, tau_min = {} [hbar/Omega], plateau = [{}, {}], estimator = {}, estimator_left = {}, unbracketed = {}",
        format_value(r.e0_opt),
        format_value(r.tau_min),
        format_value(r.plateau.0),
        format_value(r.plateau.1),
        format_value(r.estimator_e0),
        fmt_opt(r.estimator_e0_left),
        r.unbracketed
    ));
    if let Some(path) = &chain.out {
        let header = ["e0", "tau", "objective_right", "objective_left"].map(String::from);
        let rows: Vec<Vec<String>> = r
            .taus
            .iter()
            .zip(&r.estimator_objective)
            .map(|((e, t), (_, right, left))| {
                vec![format_value(*e), fmt_opt(*t), format_value(*right), fmt_opt(left.is_finite().then_some(*left))]
            })
            .collect();
        write_text(path, &csv_with_header("config", &s.to_json(), &header, &rows)?, &mut out)?;
    }
    Ok(out)
}

fn run_disorder(chain: &ChainArgs, extra: Settings) -> CliResult<Outcome> {
    let mut s = merged("disorder", chain, extra)?;
    if s.disorder_width.is_some() {
        return Err(CliError::Usage("disorder takes --widths, not --disorder-width".into()));
    }
    let p = resolve_chain(&mut s)?;
    let state = resolve_state(&mut s, InitialState::reference_gaussian(), p.n_sites)?;
    let widths = s.widths.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 3.2, 5.0]);
    let dephasing = s.dephasing.clone().unwrap_or_else(|| vec![p.dephasing_rate.max(1e-3)]);
    let realizations = s.realizations.unwrap_or(200);
    let seed = s.seed.unwrap_or(0);
    if p.field_step != 0.0 {
        return Err(CliError::Usage("disorder study requires e0 = 0".into()));
    }
    let result = disorder_study(&p, state, &widths, &dephasing, realizations, seed).map_err(|e| match e {
        Error::InvalidSweep(_) | Error::InvalidParameter(_) => usage(e),
        e => CliError::Solver(e),
    })?;
    let mut out = Outcome::default();
    sweep_summary(&result, &mut out);
    if let Some(path) = &chain.out {
        write_text(path, &result.to_csv_string(), &mut out)?;
    }
    Ok(out)
}

fn run_current(chain: &ChainArgs, extra: Settings) -> CliResult<Outcome> {
    let mut s = merged("current", chain, extra)?;
    let p = resolve_chain(&mut s)?;
    let state = resolve_state(&mut s, InitialState::centered_gaussian(p.n_sites), p.n_sites)?;
    let e_max = s.e0_max.unwrap_or(2.0);
    let points = s.points.unwrap_or(81);
    if !(e_max > 0.0) || points < 2 {
        return Err(CliError::Usage("current needs e0_max > 0 and points >= 2".into()));
    }
    s.e0_max = Some(e_max);
    s.points = Some(points);
    s.e0 = None;
    s.command = Some("current".into());
    if default_realization(&p).is_some() {
        return Err(CliError::Usage("current does not support disorder".into()));
    }
    let psi = build_initial_state(&state, p.n_sites)?;
    let r = current_and_conductance(&p, &psi, &linspace(-e_max, e_max, points), s.fit_window)?;
    let mut out = Outcome::default();
    out.summary.push(format!(
        "g = {} [e^2/hbar], fit_window = {}, fit_points = {}, residual = {}",
        format_value(r.conductance),
        format_value(r.fit_window),
        r.fit_points,
        format_value(r.residual)
    ));
    if let Some(path) = &chain.out {
        let header = ["e0", "current"].map(String::from);
        let rows: Vec<Vec<String>> = r.e0_grid.iter().zip(&r.current).map(|(e, i)| vec![format_value(*e), fmt_opt(*i)]).collect();
        write_text(path, &csv_with_header("config", &s.to_json(), &header, &rows)?, &mut out)?;
    }
    Ok(out)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}

/// Runs a preset, writing one CSV per panel.
pub fn run_preset(p: &Preset, path: &Path) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let header_json = serde_json::to_string(p).expect("preset serializes");
    out.notes.push(format!("# preset {}: {}", p.name, p.description));
    match &p.kind {
        PresetKind::Sweep { spec } => {
            let r = run_sweep(spec)?;
            sweep_summary(&r, &mut out);
            write_text(path, &r.to_csv_string(), &mut out)?;
        }
        PresetKind::Panels { panels } => {
            for (suffix, spec) in panels {
                let r = run_sweep(spec)?;
                sweep_summary(&r, &mut out);
                write_text(&with_suffix(path, suffix), &r.to_csv_string(), &mut out)?;
            }
        }
        PresetKind::OptimalField {
            base,
            initial_state,
            sizes,
            grid_points,
        } => {
            let mut rows = Vec::new();
            for &n in sizes {
                let params = ChainParams { n_sites: n, ..base.clone() };
                let psi = build_initial_state(initial_state, n)?;
                let ec = critical_field(n, params.hopping);
                let r = optimal_field_search(&params, &psi, &linspace(-2.0 * ec, 2.0 * ec, *grid_points))?;
                rows.push(vec![
                    n.to_string(),
                    format_value(r.e0_opt),
                    format_value(r.tau_min),
                    format_value(r.plateau.0),
                    format_value(r.plateau.1),
                    format_value(r.estimator_e0),
                    fmt_opt(r.estimator_e0_left),
                    r.unbracketed.to_string(),
                ]);
            }
            let header = ["n", "e0_opt", "tau_min", "plateau_lo", "plateau_hi", "estimator", "estimator_left", "unbracketed"]
                .map(String::from);
            write_text(path, &csv_with_header("preset", &header_json, &header, &rows)?, &mut out)?;
            out.summary.push(format!("rows = {}", rows.len()));
        }
        PresetKind::Scaling {
            base,
            states,
            sizes,
            grid_points,
        } => {
            let table = n_scaling_comparison(base, sizes, states, *grid_points)?;
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| {
                    vec![
                        r.n_sites.to_string(),
                        r.state.to_string(),
                        format_value(r.e0),
                        format_value(r.tau_min),
                        fmt_opt(r.heuristic),
                    ]
                })
                .collect();
            let header = ["n", "state", "e0", "tau_min", "heuristic"].map(String::from);
            write_text(path, &csv_with_header("preset", &header_json, &header, &rows)?, &mut out)?;
            out.summary.push(format!("rows = {}", rows.len()));
        }
        PresetKind::Trajectories {
            base,
            initial_state,
            fields,
            dephasing,
            times,
        } => {
            let psi = build_initial_state(initial_state, base.n_sites)?;
            for (i, &e0) in fields.iter().enumerate() {
                for (j, &gp) in dephasing.iter().enumerate() {
                    let params = base.clone().with_field(e0).with_dephasing(gp);
                    let sample = propagate_populations(&params, None, &psi, times)?;
                    let settings = Settings {
                        command: Some("trajectory".into()),
                        n: Some(params.n_sites),
                        hopping: Some(params.hopping),
                        e0: Some(e0),
                        gamma_out: Some(params.sink_rate),
                        gamma_phi: Some(gp),
                        state: Some(initial_state.to_string()),
                        t_max: times.last().copied(),
                        steps: Some(times.len()),
                        ..Settings::default()
                    };
                    let file = with_suffix(path, &format!("e{i}_g{j}"));
                    write_text(&file, &trajectory_csv(&settings.to_json(), &sample)?, &mut out)?;
                    out.summary.push(format!(
                        "e0 = {}, gamma_phi = {}: tau = {} [hbar/Omega]",
                        format_value(e0),
                        format_value(gp),
                        fmt_opt(sample.tau)
                    ));
                }
            }
        }
        PresetKind::Conductance {
            base,
            initial_state,
            dephasing,
            e0_grid,
        } => {
            let psi = build_initial_state(initial_state, base.n_sites)?;
            let g = conductance_vs_dephasing(base, &psi, dephasing, e0_grid, None)?;
            let rows: Vec<Vec<String>> = g.iter().map(|(gp, g)| vec![format_value(*gp), format_value(*g)]).collect();
            let header = ["gamma_phi", "conductance"].map(String::from);
            write_text(path, &csv_with_header("preset", &header_json, &header, &rows)?, &mut out)?;
            out.summary.push(format!("rows = {}", rows.len()));
        }
    }
    Ok(out)
}

fn dispatch(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Spectrum(chain) => run_spectrum(&chain),
        Command::TransferTime { chain, method } => run_transfer_time(&chain, method),
        Command::Trajectory { chain, t_max, steps } => run_trajectory(&chain, t_max, steps),
        Command::Sweep {
            chain,
            axis1,
            axis2,
            observable,
            realizations,
        } => run_sweep_command(
            &chain,
            Settings {
                axis1,
                axis2,
                observable,
                realizations,
                ..Settings::default()
            },
        ),
        Command::OptimalField {
            chain,
            e0_min,
            e0_max,
            points,
        } => run_optimal_field(
            &chain,
            Settings {
                e0_min,
                e0_max,
                points,
                ..Settings::default()
            },
        ),
        Command::Disorder {
            chain,
            widths,
            dephasing,
            realizations,
        } => run_disorder(
            &chain,
            Settings {
                widths,
                dephasing,
                realizations,
                ..Settings::default()
            },
        ),
        Command::Current {
            chain,
            e0_max,
            points,
            fit_window,
        } => run_current(
            &chain,
            Settings {
                e0_max,
                points,
                fit_window,
                ..Settings::default()
            },
        ),
        Command::Preset { name, out } => {
            let p = preset(&name).map_err(usage)?;
            run_preset(&p, &out)
        }
    }
}

/// Parses `args`, runs the command on a pool of `--jobs` threads, and
/// returns the result.
pub fn run<I, T>(args: I) -> std::result::Result<CliResult<Outcome>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    if cli.jobs == Some(0) {
        return Ok(Err(CliError::Usage("--jobs must be at least 1".into())));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return Ok(Err(CliError::Usage(e.to_string()))),
    };
    Ok(pool.install(|| dispatch(cli.command)))
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            code
        }
        Ok(Ok(outcome)) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for line in &outcome.summary {
                let _ = writeln!(lock, "{line}");
            }
            for line in &outcome.notes {
                eprintln!("{line}");
            }
            0
        }
        Ok(Err(e)) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_syntax() {
        let a = parse_axis("E0:linear:-1:1:5").unwrap();
        assert_eq!(a.grid, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let b = parse_axis("gamma_out:log:0.1:10:3").unwrap();
        assert_eq!(b.scale, Scale::Log);
        assert!((b.grid[1] - 1.0).abs() < 1e-12);
        assert_eq!(parse_axis("E0:symlog:10:4:3").unwrap().len(), 11);
        assert_eq!(parse_axis("W:values:0,0.5,1").unwrap().grid, vec![0.0, 0.5, 1.0]);
        assert!(parse_axis("E0:cubic:0:1:3").is_err());
        assert!(parse_axis("Q:linear:0:1:3").is_err());
        assert!(parse_axis("E0:linear:0:1:2.5").is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = Settings {
            n: Some(4),
            e0: Some(0.3),
            ..Settings::default()
        };
        let flags = Settings {
            e0: Some(-0.1),
            ..Settings::default()
        };
        let m = file.overlay(flags);
        assert_eq!(m.n, Some(4));
        assert_eq!(m.e0, Some(-0.1));
    }

    #[test]
    fn keys_are_checked_per_command() {
        let s = Settings {
            axis1: Some("E0:linear:0:1:2".into()),
            ..Settings::default()
        };
        assert!(s.check_keys("sweep").is_ok());
        assert!(matches!(s.check_keys("spectrum"), Err(CliError::Usage(_))));
        let c = Settings {
            command: Some("current".into()),
            ..Settings::default()
        };
        assert!(c.check_keys("spectrum").is_err());
    }

    #[test]
    fn unknown_toml_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "n = 4\nbogus = 1\n").unwrap();
        assert!(matches!(load_config(&path), Err(CliError::Usage(_))));
        fs::write(&path, "n = 4\ngamma_out = 1.5\n").unwrap();
        let s = load_config(&path).unwrap();
        assert_eq!((s.n, s.gamma_out), (Some(4), Some(1.5)));
    }

    #[test]
    fn suffix_paths() {
        assert_eq!(with_suffix(Path::new("/tmp/fig5.csv"), "sub"), PathBuf::from("/tmp/fig5_sub.csv"));
        assert_eq!(with_suffix(Path::new("out"), "n1"), PathBuf::from("out_n1"));
    }
}
