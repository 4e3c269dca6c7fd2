// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! One- and two-dimensional parameter sweeps with optional disorder ensembles.
//!
//! Cells are evaluated concurrently on the ambient rayon pool; ensemble means
//! are reduced sequentially in realization order, so output is bit-identical
//! across thread counts.

use std::io::{BufRead, Write};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{format_value, transfer_time};
use crate::error::{Error, Result};
use crate::model::{build_initial_state, sample_disorder, ChainParams, Disorder, InitialState};
use crate::nonhermitian::{effective_spectrum, superradiance_diagnostics};

/// Half-width of the linear window of symmetric-log field grids.
pub const LINEAR_WINDOW: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "E0")]
    E0,
    #[serde(rename = "gamma_out")]
    GammaOut,
    #[serde(rename = "gamma_phi")]
    GammaPhi,
    #[serde(rename = "W")]
    W,
    #[serde(rename = "N")]
    N,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::E0 => "E0",
            Parameter::GammaOut => "gamma_out",
            Parameter::GammaPhi => "gamma_phi",
            Parameter::W => "W",
            Parameter::N => "N",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            Parameter::E0 => v.is_finite(),
            Parameter::GammaOut | Parameter::GammaPhi | Parameter::W => v.is_finite() && v >= 0.0,
            Parameter::N => v.fract() == 0.0 && v >= 2.0 && v <= 4096.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSweep(format!("{} cannot take the value {v}", self.name())))
        }
    }

    fn apply(self, params: &mut ChainParams, v: f64) {
        match self {
            Parameter::E0 => params.field_step = v,
            Parameter::GammaOut => params.sink_rate = v,
            Parameter::GammaPhi => params.dephasing_rate = v,
            Parameter::W => {
                let seed = params.disorder.map_or(0, |d| d.seed);
                params.disorder = Some(Disorder { width: v, seed });
            }
            Parameter::N => params.n_sites = v as usize,
        }
    }
}

impl std::str::FromStr for Parameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "E0" | "e0" => Parameter::E0,
            "gamma_out" | "gamma-out" => Parameter::GammaOut,
            "gamma_phi" | "gamma-phi" => Parameter::GammaPhi,
            "W" | "w" => Parameter::W,
            "N" | "n" => Parameter::N,
            _ => return Err(Error::InvalidSweep(format!("unknown parameter {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
    /// Logarithmic in |x| outside ±[`LINEAR_WINDOW`], linear inside.
    SymmetricLog,
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            "symmetric_log" | "symlog" | "symmetric-log" => Ok(Scale::SymmetricLog),
            _ => Err(Error::InvalidSweep(format!("unknown scale {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub scale: Scale,
}

impl Axis {
    pub fn new(parameter: Parameter, grid: Vec<f64>, scale: Scale) -> Result<Self> {
        let axis = Self { parameter, grid, scale };
        axis.validate()?;
        Ok(axis)
    }

    pub fn linear(parameter: Parameter, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Self::new(parameter, grid, Scale::Linear)
    }

    pub fn log(parameter: Parameter, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(parameter, crate::nonhermitian::log_grid(lo, hi, n), Scale::Log)
    }

    /// `n_log` log-spaced points on each side beyond ±0.01 out to ±`max_abs`,
    /// plus `n_linear` evenly spaced points across [−0.01, 0.01].
    pub fn symmetric_log(parameter: Parameter, max_abs: f64, n_log: usize, n_linear: usize) -> Result<Self> {
        if !(max_abs > LINEAR_WINDOW) || n_linear < 2 {
            return Err(Error::InvalidSweep("symmetric-log axis needs max_abs > 0.01 and n_linear >= 2".into()));
        }
        let outer = crate::nonhermitian::log_grid(LINEAR_WINDOW, max_abs, n_log + 1);
        let mut grid: Vec<f64> = outer[1..].iter().rev().map(|x| -x).collect();
        grid.extend((0..n_linear).map(|i| -LINEAR_WINDOW + 2.0 * LINEAR_WINDOW * i as f64 / (n_linear - 1) as f64));
        grid.extend_from_slice(&outer[1..]);
        Self::new(parameter, grid, Scale::SymmetricLog)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep(format!("{} grid is empty", self.parameter.name())));
        }
        for &v in &self.grid {
            self.parameter.check(v)?;
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSweep(format!(
                "{} grid must be strictly increasing",
                self.parameter.name()
            )));
        }
        if self.scale == Scale::Log && self.grid[0] <= 0.0 {
            return Err(Error::InvalidSweep(format!(
                "log-scaled {} grid must be positive",
                self.parameter.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Average transfer time.
    Tau,
    /// Normalized width gap (Γ_max − ⟨Γ⟩_sub)/γ_out.
    DeltaGamma,
    /// Participation ratio of the widest state.
    PrSuper,
    /// Mean participation ratio of the remaining states.
    PrSub,
    /// 1/τ(−E₀) − 1/τ(E₀).
    Current,
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Observable::Tau),
            "delta_gamma" => Ok(Observable::DeltaGamma),
            "pr_super" => Ok(Observable::PrSuper),
            "pr_sub" => Ok(Observable::PrSub),
            "current" => Ok(Observable::Current),
            _ => Err(Error::InvalidSweep(format!("unknown observable {s:?}"))),
        }
    }
}

/// Disorder ensemble: realization k is drawn from stream k of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub n_realizations: usize,
    pub seed: u64,
}

/// A full sweep description. Disorder realizations come from `ensemble`;
/// any seed inside `base.disorder` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ChainParams,
    pub initial_state: InitialState,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub observable: Observable,
    #[serde(default)]
    pub ensemble: Option<Ensemble>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.parameter == self.axis1.parameter {
                return Err(Error::InvalidSweep("both axes sweep the same parameter".into()));
            }
        }
        let axes = std::iter::once(&self.axis1).chain(self.axis2.as_ref());
        let swept = |p: Parameter| axes.clone().any(|a| a.parameter == p);
        let disordered = if swept(Parameter::W) {
            axes.clone()
                .filter(|a| a.parameter == Parameter::W)
                .any(|a| a.grid.iter().any(|w| *w > 0.0))
        } else {
            self.base.disorder_width() > 0.0
        };
        match (&self.ensemble, disordered) {
            (None, true) => return Err(Error::InvalidSweep("disorder W > 0 requires an ensemble".into())),
            (Some(_), false) => return Err(Error::InvalidSweep("ensemble given but no disorder W > 0".into())),
            (Some(e), true) if e.n_realizations == 0 => {
                return Err(Error::InvalidSweep("ensemble needs at least one realization".into()))
            }
            _ => {}
        }
        let mut probe = self.base.clone();
        for a in axes.clone() {
            a.parameter.apply(&mut probe, a.grid[0]);
        }
        probe.validate().map_err(|e| Error::InvalidSweep(format!("base parameters: {e}")))?;
        if !swept(Parameter::N) {
            build_initial_state(&self.initial_state, self.base.n_sites)
                .map_err(|e| Error::InvalidSweep(format!("initial state: {e}")))?;
        }
        Ok(())
    }

    /// Canonical single-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sweep spec serializes")
    }

    pub fn n_cells(&self) -> usize {
        self.axis1.len() * self.axis2.as_ref().map_or(1, Axis::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Ensemble mean over the surviving realizations; the count failed.
    Dropped(usize),
    /// No value; carries the error kind.
    Failed(&'static str),
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellStatus::Ok => write!(f, "ok"),
            CellStatus::Dropped(k) => write!(f, "dropped:{k}"),
            CellStatus::Failed(kind) => write!(f, "failed:{kind}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub value: Option<f64>,
    /// Standard error of the ensemble mean; 0 without disorder.
    pub stderr: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub axis1: f64,
    pub axis2: Option<f64>,
    /// Realization index for dropped ensemble members.
    pub realization: Option<usize>,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub code_version: String,
    /// Seconds since the Unix epoch at completion.
    pub timestamp: u64,
    /// Summed per-cell evaluation time across worker threads.
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Axis1-major: cell (i, j) is at `i * len2 + j`.
    pub cells: Vec<Cell>,
    pub failures: Vec<CellFailure>,
    pub provenance: Provenance,
}

impl SweepResult {
    fn len2(&self) -> usize {
        self.spec.axis2.as_ref().map_or(1, Axis::len)
    }

    pub fn cell(&self, i1: usize, i2: usize) -> &Cell {
        &self.cells[i1 * self.len2() + i2]
    }

    pub fn value(&self, i1: usize, i2: usize) -> Option<f64> {
        self.cell(i1, i2).value
    }

    /// `values[i1][i2]`.
    pub fn values(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.chunks(self.len2()).map(|row| row.iter().map(|c| c.value).collect()).collect()
    }

    /// Header `# spec: <json>`, then `axis1,axis2,value,stderr,status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_sweep_csv(out, &self.spec.to_json(), &self.cells)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_value).unwrap_or_default()
}

fn write_sweep_csv<W: Write>(mut out: W, spec_json: &str, cells: &[Cell]) -> Result<()> {
    writeln!(out, "# spec: {spec_json}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis1", "axis2", "value", "stderr", "status"])?;
    for c in cells {
        w.write_record([
            format_value(c.axis1),
            opt(c.axis2),
            opt(c.value),
            opt(c.stderr),
            c.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed sweep CSV: the echoed spec and the rows as (axis1, axis2, value, stderr, status).
pub type CsvRow = (f64, Option<f64>, Option<f64>, Option<f64>, String);

pub fn read_sweep_csv<R: BufRead>(mut input: R) -> Result<(SweepSpec, Vec<CsvRow>)> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let json = first
        .trim_end()
        .strip_prefix("# spec: ")
        .ok_or_else(|| Error::Io("missing '# spec:' header".into()))?;
    let spec: SweepSpec = serde_json::from_str(json).map_err(|e| Error::Io(format!("bad spec header: {e}")))?;
    let mut r = csv::Reader::from_reader(input);
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::Io(format!("bad number {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Io(format!("expected 5 columns, got {}", rec.len())));
        }
        let a1 = parse(&rec[0])?.ok_or_else(|| Error::Io("missing axis1 value".into()))?;
        rows.push((a1, parse(&rec[1])?, parse(&rec[2])?, parse(&rec[3])?, rec[4].to_string()));
    }
    Ok((spec, rows))
}

/// Observable for one parameter set and one disorder realization.
pub fn observe(
    observable: Observable,
    params: &ChainParams,
    disorder: Option<&[f64]>,
    state: &InitialState,
) -> Result<f64> {
    let psi = build_initial_state(state, params.n_sites)?;
    match observable {
        Observable::Tau => transfer_time(params, disorder, &psi),
        Observable::Current => {
            if params.field_step == 0.0 {
                transfer_time(params, disorder, &psi)?;
                return Ok(0.0);
            }
            let minus = params.clone().with_field(-params.field_step);
            Ok(1.0 / transfer_time(&minus, disorder, &psi)? - 1.0 / transfer_time(params, disorder, &psi)?)
        }
        Observable::DeltaGamma | Observable::PrSuper | Observable::PrSub => {
            let spec = effective_spectrum(params, disorder)?;
            let d = superradiance_diagnostics(&spec, params.sink_rate)?;
            match observable {
                Observable::DeltaGamma => d
                    .normalized_gap
                    .ok_or_else(|| Error::InvalidParameter("normalized gap undefined at gamma_out = 0".into())),
                Observable::PrSuper => Ok(d.pr_super),
                _ => Ok(d.pr_sub_avg),
            }
        }
    }
}

struct Evaluated {
    cell: Cell,
    failures: Vec<CellFailure>,
    seconds: f64,
}

fn evaluate_cell(spec: &SweepSpec, a1: f64, a2: Option<f64>) -> Evaluated {
    let start = Instant::now();
    let mut params = spec.base.clone();
    spec.axis1.parameter.apply(&mut params, a1);
    if let (Some(axis), Some(v)) = (&spec.axis2, a2) {
        axis.parameter.apply(&mut params, v);
    }
    let width = params.disorder_width();
    params.disorder = None;

    let fail = |error: Error, realization: Option<usize>| CellFailure {
        axis1: a1,
        axis2: a2,
        realization,
        error,
    };

    let (cell, failures) = match (spec.ensemble, width > 0.0) {
        (Some(ens), true) => {
            let outcomes: Vec<Result<f64>> = (0..ens.n_realizations)
                .into_par_iter()
                .map(|k| {
                    let eps = sample_disorder(width, ens.seed, k as u64, params.n_sites);
                    observe(spec.observable, &params, Some(&eps), &spec.initial_state)
                })
                .collect();
            let mut values = Vec::with_capacity(outcomes.len());
            let mut failures = Vec::new();
            for (k, o) in outcomes.into_iter().enumerate() {
                match o {
                    Ok(v) if v.is_finite() => values.push(v),
                    Ok(v) => failures.push(fail(Error::Consistency(format!("non-finite value {v}")), Some(k))),
                    Err(e) => failures.push(fail(e, Some(k))),
                }
            }
            let cell = if values.is_empty() {
                let kind = failures.first().map_or("consistency", |f| f.error.kind());
                Cell {
                    axis1: a1,
                    axis2: a2,
                    value: None,
                    stderr: None,
                    status: CellStatus::Failed(kind),
                }
            } else {
                let (mean, se) = mean_and_stderr(&values);
                Cell {
                    axis1: a1,
                    axis2: a2,
                    value: Some(mean),
                    stderr: Some(se),
                    status: if failures.is_empty() {
                        CellStatus::Ok
                    } else {
                        CellStatus::Dropped(failures.len())
                    },
                }
            };
            (cell, failures)
        }
        _ => match observe(spec.observable, &params, None, &spec.initial_state) {
            Ok(v) if v.is_finite() => (
                Cell {
                    axis1: a1,
                    axis2: a2,
                    value: Some(v),
                    stderr: Some(0.0),
                    status: CellStatus::Ok,
                },
                Vec::new(),
            ),
            other => {
                let e = match other {
                    Ok(v) => Error::Consistency(format!("non-finite value {v}")),
                    Err(e) => e,
                };
                (
                    Cell {
                        axis1: a1,
                        axis2: a2,
                        value: None,
                        stderr: None,
                        status: CellStatus::Failed(e.kind()),
                    },
                    vec![fail(e, None)],
                )
            }
        },
    };
    Evaluated {
        cell,
        failures,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Sequential mean and standard error of the mean (sample variance).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    let mean = sum / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Evaluates every cell; individual failures are recorded, never fatal.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let points: Vec<(f64, Option<f64>)> = spec
        .axis1
        .grid
        .iter()
        .flat_map(|&a1| match &spec.axis2 {
            Some(ax) => ax.grid.iter().map(|&a2| (a1, Some(a2))).collect::<Vec<_>>(),
            None => vec![(a1, None)],
        })
        .collect();
    let evaluated: Vec<Evaluated> = points.par_iter().map(|&(a1, a2)| evaluate_cell(spec, a1, a2)).collect();

    let mut cells = Vec::with_capacity(evaluated.len());
    let mut failures = Vec::new();
    let mut cpu_seconds = 0.0;
    for e in evaluated {
        cells.push(e.cell);
        failures.extend(e.failures);
        cpu_seconds += e.seconds;
    }
    Ok(SweepResult {
        spec: spec.clone(),
        cells,
        failures,
        provenance: Provenance {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            cpu_seconds,
        },
    })
}

/// Ensemble-averaged τ over disorder width × dephasing at zero field.
pub fn disorder_study(
    params: &ChainParams,
    initial_state: InitialState,
    widths: &[f64],
    dephasing: &[f64],
    n_realizations: usize,
    seed: u64,
) -> Result<SweepResult> {
    if params.field_step != 0.0 {
        return Err(Error::InvalidParameter("disorder study requires E0 = 0".into()));
    }
    let log_ok = dephasing.first().is_some_and(|g| *g > 0.0);
    let spec = SweepSpec {
        base: ChainParams {
            disorder: None,
            ..params.clone()
        },
        initial_state,
        axis1: Axis::new(Parameter::W, widths.to_vec(), Scale::Linear)?,
        axis2: Some(Axis::new(
            Parameter::GammaPhi,
            dephasing.to_vec(),
            if log_ok { Scale::Log } else { Scale::Linear },
        )?),
        observable: Observable::Tau,
        ensemble: widths.iter().any(|w| *w > 0.0).then_some(Ensemble { n_realizations, seed }),
    };
    run_sweep(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau_spec() -> SweepSpec {
        SweepSpec {
            base: ChainParams::new(4).with_sink_rate(2.0).with_dephasing(0.01),
            initial_state: InitialState::gaussian(2.0, 1.0, 0.0),
            axis1: Axis::linear(Parameter::E0, -0.5, 0.5, 3).unwrap(),
            axis2: Some(Axis::log(Parameter::GammaOut, 0.5, 5.0, 2).unwrap()),
            observable: Observable::Tau,
            ensemble: None,
        }
    }

    #[test]
    fn symmetric_log_grid_shape() {
        let a = Axis::symmetric_log(Parameter::E0, 10.0, 4, 3).unwrap();
        assert_eq!(a.len(), 11);
        assert_eq!(a.grid[5], 0.0);
        assert!((a.grid[0] + 10.0).abs() < 1e-12 && (a.grid[10] - 10.0).abs() < 1e-12);
        assert!((a.grid[4] + 0.01).abs() < 1e-15);
        for i in 0..11 {
            assert!((a.grid[i] + a.grid[10 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(Parameter::E0, vec![], Scale::Linear).is_err());
        assert!(Axis::new(Parameter::E0, vec![1.0, 1.0], Scale::Linear).is_err());
        assert!(Axis::new(Parameter::GammaOut, vec![0.0, 1.0], Scale::Log).is_err());
        assert!(Axis::new(Parameter::GammaPhi, vec![-1.0], Scale::Linear).is_err());
        assert!(Axis::new(Parameter::N, vec![2.5], Scale::Linear).is_err());
        assert!(Axis::new(Parameter::N, vec![2.0, 3.0], Scale::Linear).is_ok());
    }

    #[test]
    fn ensemble_required_iff_disorder() {
        let mut spec = tau_spec();
        spec.axis2 = Some(Axis::new(Parameter::W, vec![0.0, 1.0], Scale::Linear).unwrap());
        assert!(spec.validate().is_err());
        spec.ensemble = Some(Ensemble { n_realizations: 3, seed: 1 });
        assert!(spec.validate().is_ok());
        let mut clean = tau_spec();
        clean.ensemble = Some(Ensemble { n_realizations: 3, seed: 1 });
        assert!(clean.validate().is_err());
    }

    #[test]
    fn degenerate_grid_matches_direct_call() {
        let spec = SweepSpec {
            axis1: Axis::new(Parameter::E0, vec![-0.2], Scale::Linear).unwrap(),
            axis2: None,
            ..tau_spec()
        };
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.cells.len(), 1);
        let p = spec.base.clone().with_field(-0.2);
        let psi = build_initial_state(&spec.initial_state, 4).unwrap();
        assert_eq!(r.value(0, 0), Some(transfer_time(&p, None, &psi).unwrap()));
    }

    #[test]
    fn csv_round_trip() {
        let r = run_sweep(&tau_spec()).unwrap();
        let text = r.to_csv_string();
        assert!(text.starts_with("# spec: {"));
        let (spec, rows) = read_sweep_csv(text.as_bytes()).unwrap();
        assert_eq!(spec, tau_spec());
        assert_eq!(rows.len(), 6);
        for (row, cell) in rows.iter().zip(&r.cells) {
            let v = row.2.unwrap();
            assert!((v / cell.value.unwrap() - 1.0).abs() < 1e-8);
            assert_eq!(row.4, "ok");
        }
        assert_eq!(text, run_sweep(&tau_spec()).unwrap().to_csv_string());
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let spec = SweepSpec {
            base: ChainParams::new(4),
            initial_state: InitialState::localized(1),
            axis1: Axis::new(Parameter::GammaOut, vec![0.0, 1.0], Scale::Linear).unwrap(),
            axis2: None,
            observable: Observable::DeltaGamma,
            ensemble: None,
        };
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.cells[0].value, None);
        assert_eq!(r.cells[0].status, CellStatus::Failed("invalid_parameter"));
        assert!(r.cells[1].value.is_some());
        assert_eq!(r.failures.len(), 1);
        assert!(r.to_csv_string().contains("failed:invalid_parameter"));
    }

    #[test]
    fn zero_width_cells_equal_clean_value() {
        let base = ChainParams::new(5).with_sink_rate(2.0);
        let r = disorder_study(&base, InitialState::localized(2), &[0.0, 1.0], &[0.01], 4, 7).unwrap();
        let psi = build_initial_state(&InitialState::localized(2), 5).unwrap();
        let clean = transfer_time(&base.clone().with_dephasing(0.01), None, &psi).unwrap();
        assert_eq!(r.value(0, 0), Some(clean));
        assert!(r.cell(1, 0).stderr.unwrap() > 0.0);
        assert!(disorder_study(&base.with_field(0.1), InitialState::localized(2), &[0.0], &[0.01], 4, 7).is_err());
    }

    #[test]
    fn mean_and_stderr_values() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn current_is_odd_and_vanishes_at_zero_field() {
        let spec = SweepSpec {
            base: ChainParams::new(4).with_sink_rate(2.0),
            initial_state: InitialState::gaussian(2.5, 1.0, 0.0),
            axis1: Axis::new(Parameter::E0, vec![-0.1, 0.0, 0.1], Scale::Linear).unwrap(),
            axis2: None,
            observable: Observable::Current,
            ensemble: None,
        };
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.value(1, 0), Some(0.0));
        assert_eq!(r.value(0, 0).unwrap(), -r.value(2, 0).unwrap());
    }
}
