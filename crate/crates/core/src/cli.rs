//! Command-line front end: parameter sweeps, optimization, the verification
//! suite and single-mode analysis.
//!
//! Every command resolves its flags into a [`RunConfig`], which is echoed at
//! the top of each output so a run can be reproduced from its own file.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::correlations::{gamma_analytic, Detector, Direction};
use crate::efficiency::{
    port_probabilities, splitting_efficiency_analytic_entangled, splitting_efficiency_analytic_unentangled,
    splitting_efficiency_numeric, Provenance,
};
use crate::interferometer::{mzi_matrix, Port};
use crate::model::{build_basis, build_generator, build_jump_operators_with, CollapseConvention, SystemKind};
use crate::optimizer::{grid_scan, refine, Axis, RefineSettings};
use crate::quadrature::QuadratureSettings;
use crate::singlemode::{amplitude_11, max_split_probability, s_max, split_probability, TwoPhotonState};
use crate::{Mzi, Params};

/// Numeric spot checks must agree with the closed forms to this level.
const SPOT_CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 for anything the user can fix by changing the invocation, 1 for
    /// failures of the computation itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                crate::Error::InvalidParameter { .. }
                | crate::Error::InvalidConfig(_)
                | crate::Error::NegativeTime(_)
                | crate::Error::Unnormalized(_)
                | crate::Error::ZeroState => 2,
                _ => 1,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    InvariantFailure,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::InvariantFailure => 1,
        }
    }
}

/// `start:end:points` (inclusive on both ends) or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl RangeSpec {
    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            end: value,
            points: 1,
        }
    }

    pub fn is_single(&self) -> bool {
        self.points == 1
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if !self.start.is_finite() || !self.end.is_finite() {
            return Err(CliError::Config(format!("--{name}: bounds must be finite")));
        }
        match self.points {
            0 => Err(CliError::Config(format!("--{name}: need at least one point"))),
            1 if self.start != self.end => Err(CliError::Config(format!("--{name}: a single point needs start = end"))),
            1 => Ok(()),
            _ if self.end <= self.start => Err(CliError::Config(format!("--{name}: end must exceed start"))),
            _ => Ok(()),
        }
    }

    fn axis(&self) -> Axis<f64> {
        if self.is_single() {
            Axis::fixed(self.start)
        } else {
            Axis::closed(self.start, self.end, self.points)
        }
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let number = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Self::single(number(v)?)),
            [a, b, n] => Ok(Self {
                start: number(a)?,
                end: number(b)?,
                points: n.trim().parse().map_err(|e| format!("bad point count {n:?}: {e}"))?,
            }),
            _ => Err(format!("expected <start:end:points> or a single value, got {s:?}")),
        }
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.end, self.points)
        }
    }
}

/// Complex amplitude given as `re` or `re,im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let number = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
        match s.split_once(',') {
            Some((re, im)) => Ok(Self(Complex64::new(number(re)?, number(im)?))),
            None => Ok(Self(Complex64::new(number(s)?, 0.0))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    #[default]
    Unentangled,
    Entangled,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Unentangled => SystemKind::Unentangled,
            KindArg::Entangled => SystemKind::Entangled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Collapse-operator weighting used by `verify`'s completeness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseArg {
    #[default]
    Consistent,
    /// Atom term weighted with the cavity rate, `√(2κ)σ`.
    Printed,
}

impl From<CollapseArg> for CollapseConvention {
    fn from(c: CollapseArg) -> Self {
        match c {
            CollapseArg::Consistent => CollapseConvention::Consistent,
            CollapseArg::Printed => CollapseConvention::AtomAtCavityRate,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pairsplit",
    version,
    about = "Splitting photon pairs with a 1D atom and a Mach-Zehnder interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Splitting efficiency over a γ × ω grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Recompute this many evenly spaced rows numerically and compare.
        #[arg(long, default_value_t = 0)]
        spot_checks: usize,
    },
    /// Splitting efficiency along γ at a single ω.
    Slice {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Grid scan followed by simplex refinement of S.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the invariant and analytic-vs-numeric checks.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t)]
        collapse: CollapseArg,
    },
    /// Split probability of a single-mode state d|11⟩ + e|20⟩ + f|02⟩.
    Singlemode {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        d: ComplexArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        e: ComplexArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        f: ComplexArg,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value_t)]
    pub kind: KindArg,
    /// γ/κ as start:end:points or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<RangeSpec>,
    /// ω as start:end:points or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<RangeSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// δ/κ of the entangled source.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta: f64,
    /// χ/κ for the numeric entangled path.
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub chi: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-7, allow_hyphen_values = true)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Sweep,
    Slice,
    Optimize,
    Verify,
    Singlemode,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub kind: KindArg,
    pub gamma: RangeSpec,
    pub omega: RangeSpec,
    /// `None` leaves φ free during optimization.
    pub phi: Option<f64>,
    pub delta: f64,
    pub chi: f64,
    pub tol: f64,
    pub spot_checks: usize,
    pub collapse: CollapseArg,
    /// Single-mode amplitudes `[d, e, f]` as `(re, im)` pairs.
    pub state: Option<[(f64, f64); 3]>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Default γ/κ axis: 200 points on (0, 3].
pub fn default_gamma() -> RangeSpec {
    RangeSpec {
        start: 0.015,
        end: 3.0,
        points: 200,
    }
}

/// Default ω axis: 200 points on [0, π/2).
pub fn default_omega() -> RangeSpec {
    RangeSpec {
        start: 0.0,
        end: FRAC_PI_2 * 199.0 / 200.0,
        points: 200,
    }
}

impl RunConfig {
    pub fn from_command(command: Command) -> Self {
        let (name, common, spot_checks, collapse, state) = match command {
            Command::Sweep { common, spot_checks } => {
                (CommandName::Sweep, common, spot_checks, CollapseArg::default(), None)
            }
            Command::Slice { common } => (CommandName::Slice, common, 0, CollapseArg::default(), None),
            Command::Optimize { common } => (CommandName::Optimize, common, 0, CollapseArg::default(), None),
            Command::Verify { common, collapse } => (CommandName::Verify, common, 0, collapse, None),
            Command::Singlemode { common, d, e, f } => {
                let pair = |z: ComplexArg| (z.0.re, z.0.im);
                (
                    CommandName::Singlemode,
                    common,
                    0,
                    CollapseArg::default(),
                    Some([pair(d), pair(e), pair(f)]),
                )
            }
        };
        let omega_default = match name {
            CommandName::Slice => RangeSpec::single(0.0),
            _ => default_omega(),
        };
        RunConfig {
            command: name,
            kind: common.kind,
            gamma: common.gamma.unwrap_or_else(default_gamma),
            omega: common.omega.unwrap_or(omega_default),
            phi: common.phi,
            delta: common.delta,
            chi: common.chi,
            tol: common.tol,
            spot_checks,
            collapse,
            state,
            out: common.out,
            format: common.format,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.gamma.validate("gamma")?;
        self.omega.validate("omega")?;
        if self.command != CommandName::Singlemode && self.gamma.start <= 0.0 {
            return Err(CliError::Config("--gamma: γ/κ must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Config(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(CliError::Config(format!(
                "--delta must be non-negative, got {}",
                self.delta
            )));
        }
        if !(self.chi.is_finite() && self.chi >= 0.0) {
            return Err(CliError::Config(format!(
                "--chi must be non-negative, got {}",
                self.chi
            )));
        }
        if let Some(phi) = self.phi {
            if !phi.is_finite() {
                return Err(CliError::Config("--phi must be finite".into()));
            }
            if self.kind == KindArg::Entangled && phi != 0.0 && self.command != CommandName::Singlemode {
                return Err(CliError::Config(
                    "the entangled closed form is defined at φ = 0 only".into(),
                ));
            }
        }
        if self.command == CommandName::Slice && !self.omega.is_single() {
            return Err(CliError::Config("slice takes a single --omega value".into()));
        }
        Ok(())
    }

    fn quadrature(&self) -> QuadratureSettings<f64> {
        QuadratureSettings::default().with_rel_tol(self.tol)
    }

    fn phi_or_zero(&self) -> f64 {
        self.phi.unwrap_or(0.0)
    }

    fn analytic(&self, gamma: f64, omega: f64, phi: f64) -> f64 {
        match self.kind {
            KindArg::Unentangled => splitting_efficiency_analytic_unentangled(gamma, &Mzi::new(omega, phi)),
            KindArg::Entangled => splitting_efficiency_analytic_entangled(gamma, self.delta, omega),
        }
    }

    fn params(&self, gamma: f64) -> Params {
        match self.kind {
            KindArg::Unentangled => Params::unentangled(gamma),
            KindArg::Entangled => Params::entangled(gamma, self.delta, self.chi),
        }
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round_sig12(x: f64) -> f64 {
    format_sig12(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_sig12(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(round_sig12(*x)),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

const EFFICIENCY_COLUMNS: [&str; 6] = ["gamma_over_kappa", "omega", "phi", "delta", "S", "provenance"];

fn efficiency_row(gamma: f64, omega: f64, phi: f64, delta: f64, s: f64, provenance: Provenance) -> Vec<Cell> {
    vec![
        Cell::Num(gamma),
        Cell::Num(omega),
        Cell::Num(phi),
        Cell::Num(delta),
        Cell::Num(s),
        Cell::Text(provenance.to_string()),
    ]
}

/// The finished output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    /// Command-specific summary, embedded next to the config.
    pub summary: Value,
    pub outcome: Outcome,
}

impl Report {
    pub fn render(&self, config: &RunConfig) -> String {
        let config_json = serde_json::to_value(config).expect("config serializes");
        match config.format {
            Format::Csv => {
                let mut out = format!("# pairsplit {}\n", env!("CARGO_PKG_VERSION"));
                out += &format!("# config: {config_json}\n");
                out += &format!("# summary: {}\n", self.summary);
                out += &self.table.columns.join(",");
                out.push('\n');
                for row in &self.table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    out += &cells.join(",");
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .table
                    .rows
                    .iter()
                    .map(|row| {
                        let record: Map<String, Value> = self
                            .table
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(name, cell)| (name.to_string(), cell.to_json()))
                            .collect();
                        Value::Object(record)
                    })
                    .collect();
                let doc = json!({
                    "generator": format!("pairsplit {}", env!("CARGO_PKG_VERSION")),
                    "config": config_json,
                    "summary": self.summary,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
                text.push('\n');
                text
            }
        }
    }
}

/// Resolves, validates and executes one command.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    match config.command {
        CommandName::Sweep | CommandName::Slice => sweep(config),
        CommandName::Optimize => optimize(config),
        CommandName::Verify => verify(config),
        CommandName::Singlemode => singlemode(config),
    }
}

fn sweep(config: &RunConfig) -> Result<Report, CliError> {
    let gammas = config.gamma.values();
    let omegas = config.omega.values();
    let phi = config.phi_or_zero();
    let width = omegas.len();
    let analytic: Vec<f64> = (0..gammas.len() * width)
        .into_par_iter()
        .map(|i| config.analytic(gammas[i / width], omegas[i % width], phi))
        .collect();

    let mut rows: Vec<Vec<Cell>> = analytic
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            efficiency_row(
                gammas[i / width],
                omegas[i % width],
                phi,
                config.delta,
                s,
                Provenance::Analytic,
            )
        })
        .collect();

    let (best_index, best) =
        analytic.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, s)| if s > acc.1 { (i, s) } else { acc },
        );
    let mut summary = json!({
        "rows": analytic.len(),
        "max_S": round_sig12(best),
        "argmax": {
            "gamma_over_kappa": round_sig12(gammas[best_index / width]),
            "omega": round_sig12(omegas[best_index % width]),
        },
    });

    let mut outcome = Outcome::Success;
    if config.spot_checks > 0 {
        if config.kind == KindArg::Entangled && config.delta <= 0.0 {
            return Err(CliError::Config("numeric spot checks need --delta > 0".into()));
        }
        let picks = spot_check_indices(analytic.len(), config.spot_checks);
        let quad = config.quadrature();
        let numeric: Vec<f64> = picks
            .par_iter()
            .map(|&i| {
                let mzi = Mzi::new(omegas[i % width], phi);
                splitting_efficiency_numeric(&config.params(gammas[i / width]), &mzi, &quad).map(|r| r.s)
            })
            .collect::<crate::Result<_>>()?;
        let mut worst = 0.0f64;
        for (&i, &s) in picks.iter().zip(&numeric) {
            worst = worst.max((s - analytic[i]).abs());
            rows.push(efficiency_row(
                gammas[i / width],
                omegas[i % width],
                phi,
                config.delta,
                s,
                Provenance::Numeric,
            ));
        }
        if worst > SPOT_CHECK_TOLERANCE {
            outcome = Outcome::InvariantFailure;
        }
        summary["spot_checks"] = json!({
            "count": picks.len(),
            "max_deviation": round_sig12(worst),
            "tolerance": SPOT_CHECK_TOLERANCE,
            "passed": outcome == Outcome::Success,
        });
    }

    Ok(Report {
        table: Table {
            columns: EFFICIENCY_COLUMNS.to_vec(),
            rows,
        },
        summary,
        outcome,
    })
}

fn spot_check_indices(total: usize, wanted: usize) -> Vec<usize> {
    let count = wanted.min(total);
    if count <= 1 {
        return vec![total / 2];
    }
    let mut picks: Vec<usize> = (0..count).map(|k| k * (total - 1) / (count - 1)).collect();
    picks.dedup();
    picks
}

fn optimize(config: &RunConfig) -> Result<Report, CliError> {
    let phi_axis = match (config.kind, config.phi) {
        (_, Some(phi)) => Axis::fixed(phi),
        (KindArg::Unentangled, None) => Axis::closed(-PI, PI, 41),
        (KindArg::Entangled, None) => Axis::fixed(0.0),
    };
    let axes = [config.gamma.axis(), config.omega.axis(), phi_axis];
    let objective = |p: &[f64]| -> crate::Result<f64> { Ok(config.analytic(p[0], p[1], p[2])) };
    let grid = grid_scan(objective, &axes)?;
    let settings = RefineSettings::default();
    let best = refine(objective, &grid.point, &axes, &settings)?;
    let (gamma, omega, phi) = (best.point[0], best.point[1], best.point[2]);

    let summary = json!({
        "grid_best": {
            "gamma_over_kappa": round_sig12(grid.point[0]),
            "omega": round_sig12(grid.point[1]),
            "phi": round_sig12(grid.point[2]),
            "S": round_sig12(grid.value),
        },
        "grid_evaluations": grid.evaluated,
        "grid_failures": grid.failures,
        "refine_evaluations": best.evaluations,
        "refine_iterations": best.iterations,
        "converged": best.converged,
        "simplex_diameter": best.diameter,
    });
    Ok(Report {
        table: Table {
            columns: EFFICIENCY_COLUMNS.to_vec(),
            rows: vec![efficiency_row(
                gamma,
                omega,
                phi,
                config.delta,
                best.s,
                Provenance::Analytic,
            )],
        },
        summary,
        // An unconverged simplex still returns its best vertex.
        outcome: Outcome::Success,
    })
}

fn singlemode(config: &RunConfig) -> Result<Report, CliError> {
    let [d, e, f] = config.state.expect("singlemode config carries a state");
    let c = |(re, im): (f64, f64)| Complex64::new(re, im);
    let state = TwoPhotonState::new(c(d), c(e), c(f));
    let phi = config.phi_or_zero();
    let omegas = config.omega.values();
    let rows: Vec<Vec<Cell>> = omegas
        .iter()
        .map(|&omega| {
            let p = split_probability(&state, &Mzi::new(omega, phi))?;
            Ok(vec![Cell::Num(omega), Cell::Num(phi), Cell::Num(p)])
        })
        .collect::<crate::Result<_>>()?;
    let scan_max = rows
        .iter()
        .filter_map(|r| match r[2] {
            Cell::Num(p) => Some(p),
            Cell::Text(_) => None,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let ceiling = max_split_probability(&state)?;
    // At φ = 0 no grid point may beat the closed-form maximum.
    let outcome = if phi == 0.0 && scan_max > ceiling + 1e-12 {
        Outcome::InvariantFailure
    } else {
        Outcome::Success
    };
    Ok(Report {
        table: Table {
            columns: vec!["omega", "phi", "S"],
            rows,
        },
        summary: json!({
            "max_S_over_omega_at_phi0": round_sig12(ceiling),
            "max_S_on_grid": round_sig12(scan_max),
        }),
        outcome,
    })
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation observed.
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, deviation: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: deviation <= tolerance,
            deviation,
            tolerance,
            detail,
        }
    }
}

/// Tracks the largest deviation and where it happened.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::from("-"),
        }
    }

    fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        // NaN counts as a failure.
        if !(value <= self.value) {
            self.value = if value.is_nan() { f64::INFINITY } else { value };
            self.at = at();
        }
    }
}

fn check_completeness_unentangled(convention: CollapseConvention) -> crate::Result<Check> {
    let mut worst = Worst::new();
    for gamma in [0.1, 0.55, 0.92, 2.5] {
        let params = Params::unentangled(gamma);
        let k = build_generator(&params)?;
        let flux = build_jump_operators_with(&params, convention)?.total_flux();
        let defect = (&(&k + &k.adjoint()) - &flux).max_abs();
        worst.update(defect, || format!("γ/κ={gamma}"));
    }
    Ok(Check::new(
        "channel_completeness_unentangled",
        worst.value,
        1e-12,
        format!("max |K+K†−ΣJ†J| at {}", worst.at),
    ))
}

fn check_completeness_entangled(convention: CollapseConvention) -> crate::Result<Check> {
    let mut worst = Worst::new();
    let basis = build_basis(SystemKind::Entangled);
    let a = basis.cavity_lowering::<f64>();
    let a_dag = a.adjoint();
    let pair = a_dag.matmul(&a_dag).matmul(&a).matmul(&a);
    for (gamma, delta, chi) in [(0.55, 0.1, 0.01), (0.92, 0.5, 0.2), (2.0, 1e-3, 1.0)] {
        let params = Params::entangled(gamma, delta, chi);
        let k = build_generator(&params)?;
        let flux = build_jump_operators_with(&params, convention)?.total_flux();
        let residual = &(&k + &k.adjoint()) - &flux;
        let expected = pair.scale_real(-2.0 * chi);
        let defect = (&residual - &expected).max_abs();
        worst.update(defect, || format!("γ/κ={gamma}, δ/κ={delta}, χ/κ={chi}"));
    }
    Ok(Check::new(
        "channel_completeness_entangled",
        worst.value,
        1e-12,
        format!("max |K+K†−ΣJ†J+2χ(a†)²a²| at {}", worst.at),
    ))
}

fn check_unitarity() -> Check {
    let mut worst = Worst::new();
    for i in 0..16 {
        for j in 0..16 {
            let mzi = Mzi::new(i as f64 * 0.41, -PI + j as f64 * 0.39);
            worst.update(mzi_matrix(&mzi).unitarity_defect(), || {
                format!("ω={}, φ={}", mzi.omega, mzi.phi)
            });
        }
    }
    Check::new(
        "mzi_unitarity",
        worst.value,
        1e-12,
        format!("max |U†U−I| at {}", worst.at),
    )
}

fn check_normalization(quad: &QuadratureSettings<f64>) -> crate::Result<Check> {
    let cases = [(0.92, 0.303, 0.0), (0.3, 1.1, 2.0), (2.2, 0.7, -1.0)];
    let totals = cases
        .par_iter()
        .map(|&(g, w, p)| port_probabilities(&Params::unentangled(g), &Mzi::new(w, p), quad).map(|ports| ports.total()))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut worst = Worst::new();
    for (&(g, w, p), total) in cases.iter().zip(totals) {
        worst.update((total - 1.0).abs(), || format!("γ/κ={g}, ω={w}, φ={p}"));
    }
    Ok(Check::new(
        "total_detection_probability",
        worst.value,
        1e-8,
        format!("max |ΣP_xy − 1| at {}", worst.at),
    ))
}

fn check_periodicity() -> Check {
    let mut worst = Worst::new();
    for i in 0..40 {
        let omega = i as f64 * 0.04;
        for gamma in [0.2, 0.92, 2.7] {
            let s = splitting_efficiency_analytic_unentangled(gamma, &Mzi::new(omega, 0.0));
            let shifted = splitting_efficiency_analytic_unentangled(gamma, &Mzi::new(omega + FRAC_PI_2, 0.0));
            worst.update((s - shifted).abs(), || format!("γ/κ={gamma}, ω={omega}"));
            let e = splitting_efficiency_analytic_entangled(gamma, 0.2, omega);
            let e_shifted = splitting_efficiency_analytic_entangled(gamma, 0.2, omega + FRAC_PI_2);
            worst.update((e - e_shifted).abs(), || format!("entangled γ/κ={gamma}, ω={omega}"));
        }
    }
    Check::new(
        "omega_period_pi_over_2",
        worst.value,
        1e-12,
        format!("max |S(ω+π/2)−S(ω)| at {}", worst.at),
    )
}

fn check_weak_coupling_ceiling() -> Check {
    let mut worst = Worst::new();
    for i in 0..=2000 {
        let omega = i as f64 * FRAC_PI_2 / 2000.0;
        let s = splitting_efficiency_analytic_unentangled(1e-9, &Mzi::new(omega, 0.0));
        worst.update(s - 0.5, || format!("ω={omega}"));
    }
    Check::new(
        "weak_coupling_ceiling",
        worst.value.max(0.0),
        1e-9,
        format!("max S − 1/2 at γ/κ=1e-9, worst at {}", worst.at),
    )
}

fn check_unentangled_equivalence(quad: &QuadratureSettings<f64>) -> crate::Result<Vec<Check>> {
    let cases = [
        (0.92, 0.303, 0.0),
        (0.5, 0.25, 0.0),
        (0.25, 0.9, 1.3),
        (1.7, 1.2, -2.4),
        (0.5, 0.4, 2.0),
    ];
    let numeric = cases
        .par_iter()
        .map(|&(g, w, p)| splitting_efficiency_numeric(&Params::unentangled(g), &Mzi::new(w, p), quad).map(|r| r.s))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut worst_s = Worst::new();
    let mut worst_gamma = Worst::new();
    for (&(g, w, p), s) in cases.iter().zip(numeric) {
        let mzi = Mzi::new(w, p);
        let analytic = splitting_efficiency_analytic_unentangled(g, &mzi);
        worst_s.update((s - analytic).abs(), || format!("γ/κ={g}, ω={w}, φ={p}"));

        let detector = Detector::new(&Params::unentangled(g), &mzi)?;
        let initial = detector.initial_state();
        for i in 0..6 {
            for j in 0..6 {
                let (t, tau) = (i as f64 * 0.6, j as f64 * 0.6);
                for (x, y, dir) in [(Port::C, Port::D, Direction::CD), (Port::D, Port::C, Direction::DC)] {
                    let num = detector.correlation(x, y, &initial, t, tau)?;
                    let ana = gamma_analytic(g, &mzi, dir, t, tau)?;
                    worst_gamma.update((num - ana).abs(), || {
                        format!("γ/κ={g}, ω={w}, φ={p}, t={t}, τ={tau}, {dir:?}")
                    });
                }
            }
        }
    }
    Ok(vec![
        Check::new(
            "analytic_numeric_S_unentangled",
            worst_s.value,
            1e-6,
            format!("max |S_num − S_closed| at {}", worst_s.at),
        ),
        Check::new(
            "analytic_numeric_correlation",
            worst_gamma.value,
            1e-9,
            format!("max |Γ_num − Γ_closed| at {}", worst_gamma.at),
        ),
    ])
}

fn check_entangled_equivalence(quad: &QuadratureSettings<f64>, chi: f64) -> crate::Result<Check> {
    let chi = if chi > 0.0 { chi } else { 1e-3 };
    let cases = [(0.55, 1e-6, 0.283), (0.9, 0.3, 0.1)];
    let numeric = cases
        .par_iter()
        .map(|&(g, d, w)| {
            splitting_efficiency_numeric(&Params::entangled(g, d, chi), &Mzi::new(w, 0.0), quad).map(|r| r.s)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut worst = Worst::new();
    for (&(g, d, w), s) in cases.iter().zip(numeric) {
        let analytic = splitting_efficiency_analytic_entangled(g, d, w);
        worst.update((s - analytic).abs(), || format!("γ/κ={g}, δ/κ={d}, ω={w}, χ/κ={chi}"));
    }
    Ok(Check::new(
        "analytic_numeric_S_entangled",
        worst.value,
        5e-3,
        format!("max |S_num − S_closed| (post-selected, χ→0) at {}", worst.at),
    ))
}

fn check_single_mode() -> crate::Result<Vec<Check>> {
    let hom = amplitude_11(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        &Mzi::new(FRAC_PI_4, 0.0),
    )?
    .norm();
    let states = [
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)),
        (Complex64::new(0.5, 0.5), Complex64::new(-0.5, 0.5)),
        (Complex64::new(0.3, 0.0), Complex64::new(0.2, -(1.0f64 - 0.13).sqrt())),
    ];
    let mut worst = Worst::new();
    for (d, g) in states {
        let closed = s_max(d, g)?;
        let mut scan = f64::NEG_INFINITY;
        for i in 0..10_000 {
            let omega = i as f64 * FRAC_PI_2 / 10_000.0;
            scan = scan.max(amplitude_11(d, g, &Mzi::new(omega, 0.0))?.norm_sqr());
        }
        worst.update((closed - scan).abs(), || format!("d={d}, g={g}"));
    }
    Ok(vec![
        Check::new("hong_ou_mandel_dip", hom, 1e-15, "|⟨11|U|11⟩| at ω=π/4".into()),
        Check::new(
            "single_mode_max_vs_scan",
            worst.value,
            1e-6,
            format!("max |S_max − scan| at {}", worst.at),
        ),
    ])
}

/// Maximum of the ω = φ = 0 closed form over γ: the no-interferometer
/// baseline.
fn baseline_note() -> crate::Result<Value> {
    let axes = [Axis::open_low(0.0, 3.0, 300), Axis::fixed(0.0), Axis::fixed(0.0)];
    let objective = |p: &[f64]| Ok(splitting_efficiency_analytic_unentangled(p[0], &Mzi::new(p[1], p[2])));
    let grid = grid_scan(objective, &axes)?;
    let best = refine(objective, &grid.point, &axes, &RefineSettings::default())?;
    Ok(json!({
        "baseline_without_interferometer": {
            "max_S": round_sig12(best.s),
            "gamma_over_kappa": round_sig12(best.point[0]),
            "note": format!(
                "the omega = 0 baseline peaks at {:.1}%; a quoted 66% baseline is inconsistent with it, 64% is consistent",
                100.0 * best.s
            ),
        }
    }))
}

fn verify(config: &RunConfig) -> Result<Report, CliError> {
    let quad = config.quadrature();
    let convention = CollapseConvention::from(config.collapse);
    let mut checks = vec![
        check_completeness_unentangled(convention)?,
        check_completeness_entangled(convention)?,
        check_unitarity(),
        check_normalization(&quad)?,
        check_periodicity(),
        check_weak_coupling_ceiling(),
    ];
    checks.extend(check_unentangled_equivalence(&quad)?);
    checks.push(check_entangled_equivalence(&quad, config.chi)?);
    checks.extend(check_single_mode()?);

    let first_failure = checks
        .iter()
        .find(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail));
    let outcome = if first_failure.is_some() {
        Outcome::InvariantFailure
    } else {
        Outcome::Success
    };
    let mut summary = baseline_note()?;
    summary["passed"] = json!(checks.iter().filter(|c| c.passed).count());
    summary["failed"] = json!(checks.iter().filter(|c| !c.passed).count());
    summary["first_failure"] = json!(first_failure);

    let rows = checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.to_string()),
                Cell::Text(if c.passed { "PASS" } else { "FAIL" }.to_string()),
                Cell::Num(c.deviation),
                Cell::Num(c.tolerance),
                Cell::Text(format!("\"{}\"", c.detail.replace('"', "'"))),
            ]
        })
        .collect();
    Ok(Report {
        table: Table {
            columns: vec!["check", "status", "deviation", "tolerance", "detail"],
            rows,
        },
        summary,
        outcome,
    })
}

/// Writes the rendered report to `--out` or stdout.
pub fn emit(config: &RunConfig, report: &Report) -> Result<(), CliError> {
    let text = report.render(config);
    match &config.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = RunConfig::from_command(cli.command);
    let result = execute(&config).and_then(|report| emit(&config, &report).map(|()| report.outcome));
    match result {
        Ok(outcome) => {
            if outcome == Outcome::InvariantFailure {
                eprintln!("pairsplit: invariant check failed");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("pairsplit: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("pairsplit").chain(args.iter().copied())).unwrap();
        RunConfig::from_command(cli.command)
    }

    #[test]
    fn range_parsing() {
        assert_eq!(
            "0.1:2:5".parse::<RangeSpec>().unwrap().values(),
            vec![0.1, 0.575, 1.05, 1.525, 2.0]
        );
        assert_eq!("0.3".parse::<RangeSpec>().unwrap(), RangeSpec::single(0.3));
        assert!("1:2".parse::<RangeSpec>().is_err());
        assert!("a:2:3".parse::<RangeSpec>().is_err());
    }

    #[test]
    fn default_grids_cover_the_figure_ranges() {
        let g = default_gamma().values();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.015).abs() < 1e-15 && (g[199] - 3.0).abs() < 1e-15);
        let w = default_omega().values();
        assert_eq!(w[0], 0.0);
        assert!((w[1] - FRAC_PI_2 / 200.0).abs() < 1e-15);
        assert!(w[199] < FRAC_PI_2);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig12(0.7500384938534754), "0.750038493853");
        assert_eq!(format_sig12(3.0), "3");
        assert_eq!(format_sig12(-1.5e-9), "-1.5e-9");
        assert_eq!(format_sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig12(0.0), "0");
    }

    #[test]
    fn zero_tolerance_is_a_config_error() {
        let err = execute(&config(&["verify", "--tol", "0"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn slice_needs_one_omega() {
        assert!(config(&["slice"]).validate().is_ok());
        assert_eq!(
            config(&["slice", "--omega", "0:1:3"])
                .validate()
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn entangled_rejects_nonzero_phi() {
        assert!(config(&["sweep", "--kind", "entangled", "--phi", "0.3"])
            .validate()
            .is_err());
    }

    #[test]
    fn slice_peaks_at_the_baseline() {
        let report = execute(&config(&["slice", "--gamma", "0.01:3:300"])).unwrap();
        assert_eq!(report.table.rows.len(), 300);
        let max = report.summary["max_S"].as_f64().unwrap();
        assert!((max - 0.6408).abs() < 1e-3);
    }

    #[test]
    fn csv_echoes_config() {
        let cfg = config(&["slice", "--gamma", "0.5:1:3"]);
        let text = execute(&cfg).unwrap().render(&cfg);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("# config: {"));
        let echoed: RunConfig = serde_json::from_str(lines[1].trim_start_matches("# config: ")).unwrap();
        assert_eq!(echoed, cfg);
        assert_eq!(lines[3], "gamma_over_kappa,omega,phi,delta,S,provenance");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn json_rows_use_csv_field_names() {
        let cfg = config(&["slice", "--gamma", "0.5:1:2", "--format", "json"]);
        let doc: Value = serde_json::from_str(&execute(&cfg).unwrap().render(&cfg)).unwrap();
        let row = &doc["rows"][0];
        for key in EFFICIENCY_COLUMNS {
            assert!(row.get(key).is_some(), "missing {key}");
        }
        assert_eq!(row["provenance"], "analytic");
    }

    #[test]
    fn singlemode_hom_state() {
        let cfg = config(&["singlemode", "--omega", "0:1.5:31"]);
        let report = execute(&cfg).unwrap();
        assert_eq!(report.outcome, Outcome::Success);
        assert!((report.summary["max_S_over_omega_at_phi0"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_single_mode_state_is_rejected() {
        let err = execute(&config(&["singlemode", "--d", "0.5"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
