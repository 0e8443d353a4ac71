//! Command-line surface: flag and config-file resolution, the subcommand
//! drivers, and CSV/JSON output.
//!
//! Every output is a deterministic function of the resolved [`RunConfig`].
//! Complex numbers appear as adjacent `re,im` columns in CSV and as
//! `{"re": .., "im": ..}` objects in JSON.

use crate::cx::Cx;
use crate::ensemble::{
    conjecture_region, fit_radius_law, mean_radius, radius_abscissa, reduced_radius, run_ensemble, symbol_curve,
    varpi, winding_number, FilterStats, DEFAULT_CURVE_SAMPLES,
};
use crate::error::{Error, Result};
use crate::exact_oracle::{
    blocks_from_ranks, exact_chain_check, exact_charpoly, rank_sequence, ExactParams, RationalComplex, MAX_ORACLE_N,
};
use crate::jordan::{
    assemble_similarity, condition_numbers_exact, jordan_basis, kappa0_bound, kappa0_zero_b, ChainDiagnostics,
};
use crate::model::{build_matrix, ModelParams, Multiplicities};
use crate::resolvent::{
    enclosure_disks, pseudospectrum_grid, GridGeometry, PseudoGrid, Region,
};
use crate::spectrum::{char_poly, nonzero_eigenvalues, PolyForm, DEFAULT_ROOT_TOL};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(name = "pseudodyn", version, about = "Spectra, Jordan chains, pseudospectra and perturbation ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Non-zero eigenvalues from the closed-form characteristic factor.
    Spectrum(Flags),
    /// Jordan chains of the zero eigenvalue and condition numbers.
    Jordan(Flags),
    /// σ_min grid and enclosure disks.
    Pseudospec(Flags),
    /// Gaussian-perturbation eigenvalue clouds and the mean-radius fit.
    Ensemble(Flags),
    /// Symbol curves and the size-reduced curve region.
    Symbol(Flags),
    /// Fit `log R̄ = c1 (t+1)/(n+t+1) + c2` to a table of mean radii.
    Fit(Flags),
    /// Exact rational cross-check of multiplicities, polynomial and chains.
    OracleCheck(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Jordan(_) => "jordan",
            Command::Pseudospec(_) => "pseudospec",
            Command::Ensemble(_) => "ensemble",
            Command::Symbol(_) => "symbol",
            Command::Fit(_) => "fit",
            Command::OracleCheck(_) => "oracle-check",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Spectrum(f)
            | Command::Jordan(f)
            | Command::Pseudospec(f)
            | Command::Ensemble(f)
            | Command::Symbol(f)
            | Command::Fit(f)
            | Command::OracleCheck(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Flat `key = value` file using the long flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Real `b_1`, shorthand for `--b-re`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Real parts of `b_1, b_2, …` (repeatable or comma separated).
    #[arg(long = "b-re", allow_hyphen_values = true, value_delimiter = ',')]
    pub b_re: Vec<f64>,
    #[arg(long = "b-im", allow_hyphen_values = true, value_delimiter = ',')]
    pub b_im: Vec<f64>,
    /// Real δ, shorthand for `--delta-re`.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long = "delta-re", allow_hyphen_values = true)]
    pub delta_re: Option<f64>,
    #[arg(long = "delta-im", allow_hyphen_values = true)]
    pub delta_im: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long = "tilde-delta", allow_hyphen_values = true)]
    pub tilde_delta: Option<f64>,
    #[arg(long = "tilde-delta-im", allow_hyphen_values = true)]
    pub tilde_delta_im: Option<f64>,
    /// ε levels (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// `nx,ny`, or a single count for a square grid.
    #[arg(long)]
    pub resolution: Option<String>,
    /// Extra `t:n` points for the mean-radius table, comma separated.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Relative tolerance of the outer-eigenvalue filter.
    #[arg(long = "match-tol")]
    pub match_tol: Option<f64>,
    /// Mean-radius table read by `fit`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
}

const CONFIG_KEYS: &[&str] = &[
    "n",
    "t",
    "b",
    "b-re",
    "b-im",
    "delta",
    "delta-re",
    "delta-im",
    "seed",
    "samples",
    "tilde-delta",
    "tilde-delta-im",
    "eps",
    "region",
    "resolution",
    "sweep",
    "match-tol",
    "input",
    "out",
    "format",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let key = k.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

/// Fully resolved run settings: flags, then config file, then defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub n: usize,
    pub t: usize,
    #[serde(with = "crate::cx::vec")]
    pub b: Vec<Complex64>,
    #[serde(with = "crate::cx")]
    pub delta: Complex64,
    pub seed: u64,
    pub samples: usize,
    #[serde(with = "crate::cx")]
    pub tilde_delta: Complex64,
    pub eps: Vec<f64>,
    pub region: Option<Region>,
    pub resolution: (usize, usize),
    pub sweep: Vec<(usize, usize)>,
    pub match_tol: f64,
    #[serde(skip)]
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
}

struct Source {
    config: BTreeMap<String, String>,
}

impl Source {
    fn scalar<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("{key} = {v:?}: {e}"))))
            .transpose()
    }

    fn list(&self, flag: &[f64], key: &str) -> Result<Vec<f64>> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        match self.config.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("{key} = {v:?}: {e}"))))
                .collect(),
        }
    }

    fn text(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.config.get(key).cloned())
    }
}

fn parse_pair(text: &str, what: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Config(format!("{what} {text:?}: {e}")));
    match parts.as_slice() {
        [a] => {
            let v = num(a)?;
            Ok((v, v))
        }
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(Error::Config(format!("{what} {text:?}: expected one or two counts"))),
    }
}

fn parse_region(text: &str) -> Result<Region> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("region {text:?}: {e}"))))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        &[x_min, x_max, y_min, y_max] => {
            let r = Region { x_min, x_max, y_min, y_max };
            r.validate().map_err(|e| Error::Config(e.to_string()))?;
            Ok(r)
        }
        _ => Err(Error::Config(format!("region {text:?}: expected x_min,x_max,y_min,y_max"))),
    }
}

fn parse_sweep(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (t, n) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("sweep item {item:?}: expected t:n")))?;
            let p = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Config(format!("sweep item {item:?}: {e}")));
            Ok((p(t)?, p(n)?))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(subcommand: &str, flags: &Flags) -> Result<Self> {
        let config = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let src = Source { config };
        let n = src.scalar(flags.n, "n")?.unwrap_or(20);
        let t = src.scalar(flags.t, "t")?.unwrap_or(1);
        let b_re = match src.scalar(flags.b, "b")? {
            Some(b) if flags.b_re.is_empty() => vec![b],
            _ => src.list(&flags.b_re, "b-re")?,
        };
        let b_im = src.list(&flags.b_im, "b-im")?;
        let len = b_re.len().max(b_im.len());
        let b = (0..len)
            .map(|j| Complex64::new(b_re.get(j).copied().unwrap_or(0.0), b_im.get(j).copied().unwrap_or(0.0)))
            .collect();
        let delta_re = match src.scalar(flags.delta_re, "delta-re")? {
            Some(v) => v,
            None => src.scalar(flags.delta, "delta")?.unwrap_or(1e-2),
        };
        let delta = Complex64::new(delta_re, src.scalar(flags.delta_im, "delta-im")?.unwrap_or(0.0));
        let tilde_delta = Complex64::new(
            src.scalar(flags.tilde_delta, "tilde-delta")?.unwrap_or(1e-10),
            src.scalar(flags.tilde_delta_im, "tilde-delta-im")?.unwrap_or(0.0),
        );
        let eps = match src.list(&flags.eps, "eps")? {
            e if e.is_empty() => vec![1e-10],
            e => e,
        };
        let region = src.text(&flags.region, "region").map(|r| parse_region(&r)).transpose()?;
        let resolution = match src.text(&flags.resolution, "resolution") {
            Some(r) => parse_pair(&r, "resolution")?,
            None => (200, 200),
        };
        let sweep = match src.text(&flags.sweep, "sweep") {
            Some(s) => parse_sweep(&s)?,
            None => Vec::new(),
        };
        let cfg = RunConfig {
            subcommand: subcommand.to_string(),
            n,
            t,
            b,
            delta,
            seed: src.scalar(flags.seed, "seed")?.unwrap_or(0),
            samples: src.scalar(flags.samples, "samples")?.unwrap_or(20),
            tilde_delta,
            eps,
            region,
            resolution,
            sweep,
            match_tol: src.scalar(flags.match_tol, "match-tol")?.unwrap_or(crate::ensemble::DEFAULT_MATCH_TOL),
            input: src.scalar(flags.input.clone(), "input")?,
            out: src.scalar(flags.out.clone(), "out")?.unwrap_or_else(|| PathBuf::from(".")),
            format: src.scalar(flags.format, "format")?.unwrap_or(Format::Csv),
        };
        cfg.check_finite()?;
        Ok(cfg)
    }

    fn check_finite(&self) -> Result<()> {
        let mut values = vec![self.delta.re, self.delta.im, self.tilde_delta.re, self.tilde_delta.im, self.match_tol];
        values.extend(self.b.iter().flat_map(|c| [c.re, c.im]));
        values.extend(&self.eps);
        if values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("all numeric settings must be finite".into()))
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.t, self.b.clone(), self.delta)
    }

    fn region_for(&self, params: &ModelParams) -> Region {
        self.region.unwrap_or_else(|| Region::default_for(params))
    }
}

/// One table cell. Complex cells expand to two CSV columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Complex(Complex64),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Complex64> for Cell {
    fn from(v: Complex64) -> Self {
        Cell::Complex(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Shortest representation that parses back to the same bits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_float(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        Value::String(format_float(x))
    }
}

/// A named column set; a complex column named `z` becomes `re,im` in CSV,
/// any other complex column `c` becomes `c_re,c_im`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let first = self.rows.first();
        let mut head = Vec::new();
        for (k, name) in self.header.iter().enumerate() {
            match first.map(|r| &r[k]) {
                Some(Cell::Complex(_)) if name == "z" => head.extend(["re".to_string(), "im".to_string()]),
                Some(Cell::Complex(_)) => head.extend([format!("{name}_re"), format!("{name}_im")]),
                _ => head.push(name.clone()),
            }
        }
        w.write_record(&head).map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(head.len());
            for cell in row {
                match cell {
                    Cell::Int(v) => rec.push(v.to_string()),
                    Cell::Float(v) => rec.push(format_float(*v)),
                    Cell::Complex(c) => rec.extend([format_float(c.re), format_float(c.im)]),
                    Cell::Bool(b) => rec.push(b.to_string()),
                }
            }
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    fn json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (name, cell) in self.header.iter().zip(row) {
                        let v = match cell {
                            Cell::Int(v) => serde_json::json!(v),
                            Cell::Float(v) => json_float(*v),
                            Cell::Complex(c) => serde_json::json!({ "re": json_float(c.re), "im": json_float(c.im) }),
                            Cell::Bool(b) => Value::Bool(*b),
                        };
                        obj.insert(name.clone(), v);
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Collects the files of one command under its output directory.
pub struct Output {
    dir: PathBuf,
    format: Format,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    fn write(&mut self, file: String, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        self.write(format!("{name}.json"), text.as_bytes())
    }

    /// Writes a table in the configured format.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        match self.format {
            Format::Csv => {
                let bytes = table.csv_bytes()?;
                self.write(format!("{name}.csv"), &bytes)
            }
            Format::Json => self.json(name, &table.json_value()),
        }
    }

    /// Headerless numeric matrix, one line per row.
    pub fn matrix(&mut self, name: &str, rows: &[Vec<f64>]) -> Result<()> {
        let mut text = String::new();
        for r in rows {
            text.push_str(&r.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(","));
            text.push('\n');
        }
        self.write(format!("{name}.csv"), text.as_bytes())
    }
}

/// Runs a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = RunConfig::resolve(cli.command.name(), cli.command.flags())?;
    run_config(&cli.command, &cfg)
}

pub fn run_config(command: &Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut out = Output::new(&cfg.out, cfg.format)?;
    match command {
        Command::Spectrum(_) => cmd_spectrum(cfg, &mut out)?,
        Command::Jordan(_) => cmd_jordan(cfg, &mut out)?,
        Command::Pseudospec(_) => cmd_pseudospec(cfg, &mut out)?,
        Command::Ensemble(_) => cmd_ensemble(cfg, &mut out)?,
        Command::Symbol(_) => cmd_symbol(cfg, &mut out)?,
        Command::Fit(_) => cmd_fit(cfg, &mut out)?,
        Command::OracleCheck(_) => cmd_oracle_check(cfg, &mut out)?,
    }
    Ok(out.written)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SpectrumFile {
    pub multiplicities: Multiplicities,
    pub polynomial_form: String,
    /// Ascending, monic.
    pub polynomial: Vec<Cx>,
    pub roots: Vec<Cx>,
    pub residuals: Vec<f64>,
    pub outlier: Cx,
    pub iterations: usize,
    pub trace_error: f64,
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let params = cfg.params()?;
    let report = nonzero_eigenvalues(&params, DEFAULT_ROOT_TOL)?;
    let body = SpectrumFile {
        multiplicities: report.multiplicities.clone(),
        polynomial_form: match report.polynomial.form {
            PolyForm::General => "general".into(),
            PolyForm::ZeroB => "zero_b".into(),
        },
        polynomial: report.polynomial.coeffs.iter().map(|&c| c.into()).collect(),
        roots: report.nonzero_eigenvalues.iter().map(|&c| c.into()).collect(),
        residuals: report.residuals.clone(),
        outlier: report.outlier.into(),
        iterations: report.iterations,
        trace_error: report.trace_error,
    };
    out.json("spectrum", &WithConfig { config: cfg, body })?;
    let mut roots = Table::new(&["z"]);
    for &z in &report.nonzero_eigenvalues {
        roots.push(vec![z.into()]);
    }
    out.table("roots", &roots)
}

#[derive(Serialize)]
struct ZeroBReference {
    /// `√(2(ξ-1)/ξ)` when `ξ = n mod (t+1) ≥ 2`.
    kappa0_remainder_form: Option<f64>,
    kappa0_bound: f64,
    /// `√(2t(t-1))`.
    t_kappa0_reference: f64,
}

#[derive(Serialize)]
struct SimilarityReport {
    inverse_residual: f64,
    similarity_residual: f64,
    condition: f64,
    warning: Option<String>,
}

#[derive(Serialize)]
struct JordanFile {
    multiplicities: Multiplicities,
    kappa0_per_block: Vec<(usize, f64)>,
    kappa0: f64,
    t_kappa0: f64,
    zero_b: Option<ZeroBReference>,
    diagnostics: ChainDiagnostics,
    similarity: Option<SimilarityReport>,
    similarity_error: Option<String>,
}

fn chain_table(chain: &[Vec<Complex64>]) -> Table {
    let n = chain.first().map_or(0, Vec::len);
    let mut names = vec!["q".to_string()];
    names.extend((1..=n).map(|i| format!("v{i}")));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut table = Table::new(&refs);
    for (q, v) in chain.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(q + 1).into()];
        row.extend(v.iter().map(|&c| Cell::from(c)));
        table.push(row);
    }
    table
}

pub fn cmd_jordan(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let params = cfg.params()?;
    let basis = jordan_basis(&params)?;
    let kappa = condition_numbers_exact(&params)?;
    let t = params.t;
    let zero_b = params.h_is_zero().then(|| ZeroBReference {
        kappa0_remainder_form: kappa0_zero_b(params.n, t),
        kappa0_bound: kappa0_bound(t),
        t_kappa0_reference: (2.0 * t as f64 * (t as f64 - 1.0)).max(0.0).sqrt(),
    });
    let (similarity, similarity_error) = match nonzero_eigenvalues(&params, DEFAULT_ROOT_TOL)
        .and_then(|spec| assemble_similarity(&params, &basis, &spec))
    {
        Ok(s) => (
            Some(SimilarityReport {
                inverse_residual: s.inverse_residual,
                similarity_residual: s.similarity_residual,
                condition: s.condition,
                warning: s.warning,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let body = JordanFile {
        multiplicities: params.multiplicities(),
        kappa0_per_block: kappa.per_block.clone(),
        kappa0: kappa.kappa0,
        t_kappa0: t as f64 * kappa.kappa0,
        zero_b,
        diagnostics: basis.diagnostics(&params),
        similarity,
        similarity_error,
    };
    out.json("jordan", &WithConfig { config: cfg, body })?;
    for (l, (right, left)) in basis.right_chains.iter().zip(&basis.left_chains).enumerate() {
        out.table(&format!("right_chain_{}", l + 1), &chain_table(right))?;
        out.table(&format!("left_chain_{}", l + 1), &chain_table(left))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EnclosureLevel {
    epsilon: f64,
    grid_nodes_inside: usize,
    zero_disk_radius: f64,
    c0: f64,
    kappa0: f64,
    exponent: f64,
    zero_component_nodes: usize,
    zero_component_max_distance: f64,
    zero_component_within_disk: bool,
    eigen_disks: Vec<crate::resolvent::Disk>,
}

#[derive(Serialize)]
struct PseudospecFile {
    geometry: GridGeometry,
    cell_diagonal: f64,
    enclosure: Vec<EnclosureLevel>,
    enclosure_error: Option<String>,
}

pub fn cmd_pseudospec(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let params = cfg.params()?;
    let m = build_matrix(&params)?;
    let grid: PseudoGrid = pseudospectrum_grid(&m, cfg.region_for(&params), cfg.resolution)?;
    let g = grid.geometry;
    let mut enclosure = Vec::new();
    let mut enclosure_error = None;
    match nonzero_eigenvalues(&params, DEFAULT_ROOT_TOL) {
        Ok(spec) => {
            let origin = Complex64::new(0.0, 0.0);
            for &eps in &cfg.eps {
                let d = enclosure_disks(&params, &spec, eps)?;
                let comp = grid.component(eps, origin);
                let max_distance = comp.iter().map(|&(i, j)| g.node(i, j).norm()).fold(0.0, f64::max);
                enclosure.push(EnclosureLevel {
                    epsilon: eps,
                    grid_nodes_inside: grid.count_inside(eps),
                    zero_disk_radius: d.zero_disk.radius,
                    c0: d.c0,
                    kappa0: d.kappa0,
                    exponent: d.exponent,
                    zero_component_nodes: comp.len(),
                    zero_component_max_distance: max_distance,
                    zero_component_within_disk: max_distance <= d.zero_disk.radius + g.cell_diagonal(),
                    eigen_disks: d.eigen_disks,
                });
            }
        }
        Err(e) => enclosure_error = Some(e.to_string()),
    }
    let body = PseudospecFile { geometry: g, cell_diagonal: g.cell_diagonal(), enclosure, enclosure_error };
    out.json("pseudospec", &WithConfig { config: cfg, body })?;
    let mut table = Table::new(&["x", "y", "sigma_min"]);
    for j in 0..g.ny {
        for i in 0..g.nx {
            table.push(vec![g.x(i).into(), g.y(j).into(), grid.value(i, j).into()]);
        }
    }
    out.table("sigma_grid", &table)?;
    let rows: Vec<Vec<f64>> = (0..g.ny).map(|j| (0..g.nx).map(|i| grid.value(i, j)).collect()).collect();
    out.matrix("sigma_matrix", &rows)
}

#[derive(Serialize)]
struct EnsembleFile {
    samples: usize,
    points: usize,
    failures: Vec<(usize, String)>,
    outer_eigenvalues: usize,
    filter: FilterStats,
    mean_radius: f64,
    reduced_radius: Option<f64>,
    varpi: usize,
    sweep: Vec<RadiusRow>,
    fit: Option<crate::ensemble::RadiusFit>,
    fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct RadiusRow {
    t: usize,
    n: usize,
    x: f64,
    mean_radius: f64,
    count: usize,
}

fn outer_spectrum(params: &ModelParams) -> Result<Vec<Complex64>> {
    if params.delta == Complex64::new(0.0, 0.0) {
        return Ok(Vec::new());
    }
    Ok(nonzero_eigenvalues(params, DEFAULT_ROOT_TOL)?.nonzero_eigenvalues)
}

pub fn cmd_ensemble(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let params = cfg.params()?;
    let outer = outer_spectrum(&params)?;
    let mut cloud = run_ensemble(&params, cfg.tilde_delta, cfg.samples, cfg.seed)?;
    let main = mean_radius(&mut cloud, &outer, cfg.match_tol)?;
    let mut rows = vec![RadiusRow {
        t: params.t,
        n: params.n,
        x: radius_abscissa(params.n, params.t),
        mean_radius: main.mean,
        count: main.count,
    }];
    for &(t, n) in &cfg.sweep {
        let p = ModelParams::new(n, t, cfg.b.clone(), cfg.delta)?;
        let outer_p = outer_spectrum(&p)?;
        let mut c = run_ensemble(&p, cfg.tilde_delta, cfg.samples, cfg.seed)?;
        let r = mean_radius(&mut c, &outer_p, cfg.match_tol)?;
        rows.push(RadiusRow { t, n, x: radius_abscissa(n, t), mean_radius: r.mean, count: r.count });
    }
    let points: Vec<(usize, usize, f64)> = rows.iter().map(|r| (r.t, r.n, r.mean_radius)).collect();
    let (fit, fit_error) = match fit_radius_law(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let eps = cfg.eps[0];
    let reduced = reduced_radius(params.n, params.t, eps).ok();
    let body = EnsembleFile {
        samples: cfg.samples,
        points: cloud.points.len(),
        failures: cloud.failures.clone(),
        outer_eigenvalues: outer.len(),
        filter: main.filter.clone(),
        mean_radius: main.mean,
        reduced_radius: reduced,
        varpi: varpi(params.n, params.t)?,
        sweep: rows.clone(),
        fit,
        fit_error,
    };
    out.json("ensemble", &WithConfig { config: cfg, body })?;
    if let Some(f) = fit {
        out.json("fit", &f)?;
    }
    let mut table = Table::new(&["sample", "z", "filtered"]);
    for p in &cloud.points {
        table.push(vec![p.sample.into(), p.value.into(), p.filtered.into()]);
    }
    out.table("cloud", &table)?;
    let mut table = Table::new(&["t", "n", "x", "mean_radius", "count"]);
    for r in &rows {
        table.push(vec![r.t.into(), r.n.into(), r.x.into(), r.mean_radius.into(), r.count.into()]);
    }
    out.table("mean_radius", &table)?;
    let mut radii = vec![1.0];
    radii.extend(reduced);
    out.table("symbol_curve", &curve_table(&params, &radii)?)
}

fn curve_table(params: &ModelParams, radii: &[f64]) -> Result<Table> {
    let mut table = Table::new(&["radius", "theta", "z"]);
    for &r in radii {
        let curve = symbol_curve(params.t, &params.b_coeffs, r, DEFAULT_CURVE_SAMPLES)?;
        for (th, z) in curve.theta.iter().zip(&curve.points) {
            table.push(vec![r.into(), (*th).into(), (*z).into()]);
        }
    }
    Ok(table)
}

#[derive(Serialize)]
struct SymbolLevel {
    epsilon: f64,
    radius: f64,
    theta0: f64,
    region_nodes_inside: usize,
}

#[derive(Serialize)]
struct SymbolFile {
    varpi: usize,
    theta0_full: Option<f64>,
    winding_at_origin: Option<i64>,
    levels: Vec<SymbolLevel>,
    geometry: GridGeometry,
}

pub fn cmd_symbol(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let params = cfg.params()?;
    let full = symbol_curve(params.t, &params.b_coeffs, 1.0, DEFAULT_CURVE_SAMPLES)?;
    let region = cfg.region_for(&params);
    let geometry = GridGeometry::new(region, cfg.resolution.0, cfg.resolution.1)?;
    let mut levels = Vec::new();
    let mut radii = vec![1.0];
    let mut grid = Table::new(&["epsilon", "x", "y", "winding"]);
    for &eps in &cfg.eps {
        let r = conjecture_region(&params, eps, region, cfg.resolution)?;
        radii.push(r.radius);
        for j in 0..geometry.ny {
            for i in 0..geometry.nx {
                grid.push(vec![eps.into(), geometry.x(i).into(), geometry.y(j).into(), r.winding[j * geometry.nx + i].into()]);
            }
        }
        levels.push(SymbolLevel { epsilon: eps, radius: r.radius, theta0: r.theta0, region_nodes_inside: r.count_inside() });
    }
    let body = SymbolFile {
        varpi: varpi(params.n, params.t)?,
        theta0_full: full.theta0,
        winding_at_origin: winding_number(&full.points, Complex64::new(0.0, 0.0)).ok(),
        levels,
        geometry,
    };
    out.json("symbol", &WithConfig { config: cfg, body })?;
    out.table("symbol_curve", &curve_table(&params, &radii)?)?;
    out.table("conjecture_region", &grid)
}

/// Reads `(t, n, mean_radius)` rows from a CSV with those headers or a JSON
/// array of objects.
pub fn read_radius_table(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    #[derive(serde::Deserialize)]
    struct Row {
        t: usize,
        n: usize,
        mean_radius: f64,
    }
    let rows: Vec<Row> = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    Ok(rows.into_iter().map(|r| (r.t, r.n, r.mean_radius)).collect())
}

#[derive(Serialize)]
struct FitFile {
    points: Vec<(usize, usize, f64)>,
    #[serde(flatten)]
    fit: crate::ensemble::RadiusFit,
    /// `e^{c1}`, comparable to the perturbation size.
    epsilon_estimate: f64,
}

pub fn cmd_fit(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let path = cfg.input.as_ref().ok_or_else(|| Error::Config("fit needs --input".into()))?;
    let points = read_radius_table(path)?;
    let fit = fit_radius_law(&points)?;
    out.json("fit", &FitFile { points, fit, epsilon_estimate: fit.c1.exp() })
}

#[derive(Serialize)]
struct OracleFile {
    zero_root_count: usize,
    a0: usize,
    kernel_dimension: usize,
    g0: usize,
    rank_blocks: Vec<usize>,
    partition: Vec<usize>,
    polynomial_match: Option<bool>,
    chain_check: Option<Vec<String>>,
    passed: bool,
}

fn exact(c: Complex64) -> Result<RationalComplex> {
    RationalComplex::from_f64(c.re, c.im).ok_or_else(|| Error::Config(format!("{c} is not finite")))
}

pub fn cmd_oracle_check(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    if cfg.n > MAX_ORACLE_N {
        return Err(Error::Precondition(format!("oracle-check needs n <= {MAX_ORACLE_N}, got {}", cfg.n)));
    }
    let b = cfg.b.iter().map(|&c| exact(c)).collect::<Result<Vec<_>>>()?;
    let ep = ExactParams::new(cfg.n, cfg.t, b, exact(cfg.delta)?)?;
    let mult = ep.multiplicities();
    let charpoly = exact_charpoly(&ep)?;
    let ranks = rank_sequence(&ep, cfg.n)?;
    let polynomial_match = match char_poly(&ep) {
        Ok(p) => Some(p.coeffs == charpoly.nonzero_factor()),
        Err(e) if e.is_usage() => None,
        Err(e) => return Err(e),
    };
    let chain_check = if cfg.n <= 10 {
        let basis = jordan_basis(&ep)?;
        Some(exact_chain_check(&ep, &basis)?.violations.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>())
    } else {
        None
    };
    let body = OracleFile {
        zero_root_count: charpoly.zero_root_count(),
        a0: mult.a0,
        kernel_dimension: cfg.n - ranks[1],
        g0: mult.g0,
        rank_blocks: blocks_from_ranks(&ranks),
        partition: mult.block_sizes.clone(),
        polynomial_match,
        chain_check,
        passed: false,
    };
    let passed = body.zero_root_count == body.a0
        && body.kernel_dimension == body.g0
        && body.rank_blocks == body.partition
        && body.polynomial_match != Some(false)
        && body.chain_check.as_ref().map_or(true, Vec::is_empty);
    out.json("oracle", &WithConfig { config: cfg, body: OracleFile { passed, ..body } })?;
    if passed {
        Ok(())
    } else {
        Err(Error::OracleMismatch(format!("see {}", cfg.out.join("oracle.json").display())))
    }
}

/// Process exit code for a result: 0 success, 1 usage, 2 numerical or I/O.
pub fn exit_code(result: &Result<Vec<PathBuf>>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(e) if e.is_usage() => 1,
        Err(_) => 2,
    }
}
