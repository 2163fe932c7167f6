//! Run configuration, snapshots, time-series CSV and JSONL reports.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{config, GtError, Result};
use crate::evolution::SolverParams;
use crate::experiments::SweepSpec;
use crate::initial_data::{self, GaussianParams, InflationParams};
use crate::nonlinearity::{validate_gamma, validate_power, GTConfig, Variant};
use crate::spectral::{make_grid, Field, Grid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    pub n: Vec<usize>,
    pub l: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            d: 1,
            n: vec![256],
            l: vec![64.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    pub p: u32,
    pub gamma: f64,
    pub variant: Variant,
    /// Sigma interval length; `1` for the equation itself.
    pub lambda: f64,
    /// Multiplies the default number of sigma panels.
    pub sigma_refine: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            p: 2,
            gamma: 1.0,
            variant: Variant::AveragedUnit,
            lambda: 1.0,
            sigma_refine: 1,
        }
    }
}

/// Initial data family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Gaussian { a: f64, sigma: f64 },
    /// `a e^{i k . x}`.
    Plane { a: f64, k: Vec<f64> },
    FreqBox { n: f64, delta: f64, s: f64 },
    Annulus { n: f64, horizon: f64 },
    /// A snapshot file written by [`write_snapshot`].
    Snapshot { path: PathBuf },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Gaussian { a: 1.0, sigma: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardSpec {
    pub horizon: f64,
    pub depth: usize,
    pub nodes: usize,
    /// Times at which partial sums are written.
    pub sample_times: Vec<f64>,
}

impl Default for PicardSpec {
    fn default() -> Self {
        PicardSpec {
            horizon: 0.5,
            depth: 4,
            nodes: 16,
            sample_times: vec![0.5],
        }
    }
}

/// Everything a CLI run needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: ModelSpec,
    pub solver: SolverParams,
    pub data: DataSpec,
    pub picard: PicardSpec,
    pub experiment: Option<SweepSpec>,
    pub out_dir: PathBuf,
    /// Seed for randomized property runs only; deterministic paths ignore it.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            model: ModelSpec::default(),
            solver: SolverParams::new(0.01, 1.0),
            data: DataSpec::default(),
            picard: PicardSpec::default(),
            experiment: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        validate_power(self.model.p)?;
        validate_gamma(self.model.gamma)?;
        if self.grid.n.len() != self.grid.d || self.grid.l.len() != self.grid.d {
            return config("grid.n and grid.l need one entry per dimension");
        }
        if self.model.sigma_refine == 0 {
            return config("sigma_refine must be at least 1");
        }
        if self.seed > i64::MAX as u64 {
            return config("seed must fit in a TOML integer (at most 2^63 - 1)");
        }
        self.solver.validate()
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.grid.d, &self.grid.n, &self.grid.l)
    }

    pub fn gt_config(&self, grid: &Grid) -> Result<GTConfig> {
        let m = &self.model;
        let cfg = GTConfig::with_variant(grid, m.p, m.gamma, m.variant, m.lambda)?;
        if m.sigma_refine > 1 {
            cfg.refined(grid, m.sigma_refine)
        } else {
            Ok(cfg)
        }
    }

    /// Initial data on `grid`; snapshot data must match the grid.
    pub fn initial_data(&self, grid: &Grid) -> Result<Field> {
        match &self.data {
            DataSpec::Gaussian { a, sigma } => initial_data::gaussian_data(grid, &GaussianParams { a: *a, sigma: *sigma }),
            DataSpec::Plane { a, k } => {
                if k.len() != grid.d() {
                    return config("plane-wave k needs one entry per dimension");
                }
                Ok(Field::from_fn(grid, |x| {
                    let ph: f64 = x.iter().zip(k).map(|(xi, ki)| xi * ki).sum();
                    Complex64::from_polar(*a, ph)
                }))
            }
            DataSpec::FreqBox { n, delta, s } => {
                Ok(initial_data::freq_box_data(grid, &InflationParams::from_n_delta(*n, *delta, *s))?.0)
            }
            DataSpec::Annulus { n, horizon } => initial_data::annulus_bump(grid, *n, *horizon),
            DataSpec::Snapshot { path } => {
                let snap = read_snapshot(path)?;
                snap.field.check_same(&Field::zeros(grid))?;
                Ok(snap.field)
            }
        }
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    // Anything TOML accepts as a value keeps its type; the rest is a bare string.
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `key.path=value` overrides to a parsed table.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| GtError::Config(format!("override `{item}` is not key=value")))?;
        let parts: Vec<&str> = key.trim().split('.').collect();
        let mut cur = &mut *table;
        for part in &parts[..parts.len() - 1] {
            let entry = cur
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| GtError::Config(format!("override `{key}`: `{part}` is not a table")))?;
        }
        cur.insert(parts[parts.len() - 1].to_string(), parse_scalar(raw.trim()));
    }
    Ok(())
}

/// Lays `top` over `base`. A tagged table whose tag changes replaces the base wholesale.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => {
                let retagged = ["kind", "id"]
                    .iter()
                    .any(|tag| t.get(*tag).is_some_and(|x| b.get(*tag) != Some(x)));
                if retagged {
                    *b = t;
                } else {
                    merge(b, t);
                }
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses and validates TOML text with overrides applied; absent keys keep their defaults.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let user: toml::Table = text.parse().map_err(|e: toml::de::Error| GtError::Config(e.to_string()))?;
    let mut table = toml::Table::try_from(RunConfig::default()).map_err(|e| GtError::Format(e.to_string()))?;
    merge(&mut table, user);
    let mut patch = toml::Table::new();
    apply_overrides(&mut patch, overrides)?;
    merge(&mut table, patch);
    let cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| GtError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a TOML run configuration; missing keys take their defaults, unknown keys fail.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_config_with(path, &[])
}

pub fn load_config_with(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text, overrides).map_err(|e| match e {
        GtError::Config(m) => GtError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn config_to_toml(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    toml::to_string(cfg).map_err(|e| GtError::Format(e.to_string()))
}

const MAGIC: &[u8; 4] = b"GTS1";
const VERSION: u32 = 1;

/// Contents of a snapshot file.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub field: Field,
    pub t: f64,
    pub gamma: f64,
    pub p: u32,
}

/// Binary snapshot: header, then samples as little-endian `(re, im)` pairs, row-major.
pub fn write_snapshot(u: &Field, t: f64, gamma: f64, p: u32, path: &Path) -> Result<()> {
    let grid = u.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.d() as u32).to_le_bytes())?;
    for &n in grid.n() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in grid.l() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&t.to_le_bytes())?;
    w.write_all(&gamma.to_le_bytes())?;
    w.write_all(&p.to_le_bytes())?;
    for z in u.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.buf.len() {
            return Err(GtError::Format(format!("snapshot truncated while reading {what}")));
        }
        let mut out = [0u8; N];
        out.copy_from_slice(&self.buf[self.pos..end]);
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if &c.take::<4>("magic")? != MAGIC {
        return Err(GtError::Format("not a GTS1 snapshot".into()));
    }
    let version = c.u32("version")?;
    if version != VERSION {
        return Err(GtError::Format(format!("unsupported snapshot version {version}")));
    }
    let d = c.u32("dimension")? as usize;
    if !(1..=3).contains(&d) {
        return Err(GtError::Format(format!("snapshot dimension {d} out of range")));
    }
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        dims.push(c.u64("dims")? as usize);
    }
    let mut ls = Vec::with_capacity(d);
    for _ in 0..d {
        ls.push(c.f64("lengths")?);
    }
    let t = c.f64("time")?;
    let gamma = c.f64("gamma")?;
    let p = c.u32("power")?;
    let grid = make_grid(d, &dims, &ls).map_err(|e| GtError::Format(format!("snapshot grid: {e}")))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = c.f64("samples")?;
        let im = c.f64("samples")?;
        values.push(Complex64::new(re, im));
    }
    if c.pos != buf.len() {
        return Err(GtError::Format(format!("{} trailing bytes after samples", buf.len() - c.pos)));
    }
    Ok(Snapshot {
        field: Field::new(grid, values)?,
        t,
        gamma,
        p,
    })
}

const FIXED_COLUMNS: [&str; 9] = [
    "t",
    "mass",
    "kinetic",
    "potential",
    "energy",
    "variance",
    "vdot1",
    "equip_ratio",
    "boundary_frac",
];

fn fmt_float(v: f64) -> String {
    // Shortest round-trip digits; `Debug` switches to exponent form for tiny and huge values.
    format!("{v:?}")
}

/// Time-series CSV; `s_list` fixes the `hs_norm_<s>` columns.
pub fn write_records(records: &[DiagnosticsRecord], s_list: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(s_list.iter().map(|s| format!("hs_norm_{s}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            fmt_float(r.t),
            fmt_float(r.mass),
            fmt_float(r.kinetic),
            fmt_float(r.potential),
            fmt_float(r.energy),
            fmt_float(r.variance),
            fmt_float(r.vdot1),
            r.equip_ratio.map(fmt_float).unwrap_or_default(),
            fmt_float(r.boundary_frac),
        ];
        for s in s_list {
            let v = r
                .hs_norms
                .iter()
                .find(|h| h.s == *s)
                .ok_or_else(|| GtError::Config(format!("record at t = {} lacks the H^{s} norm", r.t)))?;
            row.push(fmt_float(v.value));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row: the fixed columns (empty `equip_ratio` as `None`) and the norms.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordRow {
    pub values: [Option<f64>; 9],
    pub hs_norms: Vec<(f64, f64)>,
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < FIXED_COLUMNS.len() || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
        return Err(GtError::Format("unexpected CSV header".into()));
    }
    let s_list = header
        .iter()
        .skip(FIXED_COLUMNS.len())
        .map(|h| {
            h.strip_prefix("hs_norm_")
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| GtError::Format(format!("bad column `{h}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| GtError::Format(format!("bad number `{s}`")))
        }
    };
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let mut values = [None; 9];
        for (i, v) in values.iter_mut().enumerate() {
            *v = parse(&row[i])?;
        }
        let mut hs_norms = Vec::new();
        for (k, s) in s_list.iter().enumerate() {
            let v = parse(&row[FIXED_COLUMNS.len() + k])?
                .ok_or_else(|| GtError::Format("missing norm value".into()))?;
            hs_norms.push((*s, v));
        }
        out.push(RecordRow { values, hs_norms });
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> GtError {
    GtError::Format(format!("csv: {e}"))
}

/// Appends one JSON line.
pub fn append_jsonl<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let line = serde_json::to_string(value).map_err(|e| GtError::Format(e.to_string()))?;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}
