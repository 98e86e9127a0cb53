//! File formats: CSV fields and traces (exact), 16-bit PGM images (for
//! viewing) and the flat `key = value` run configuration.
//!
//! Every CSV starts with a `#` version line. Numbers are written with Rust's
//! shortest round-trip formatting, so reading a file back reproduces every
//! bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;

use crate::boundary::{BoundarySpec, BoundaryTrace, GammaPreset, LambdaProfile};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, DEFAULT_DT_FACTOR};
use crate::norms::Subspace;
use crate::phantom::{self, BumpSpec};
use crate::recon::ReconConfig;

pub const FIELD_TAG: &str = "# cavity-pat field v1";
pub const TRACE_TAG: &str = "# cavity-pat trace v1";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Data lines with their 1-based line numbers; `#` lines and blank lines are
/// skipped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_row(path: &Path, line: usize, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: `{}`", tok.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(path, line, format!("non-finite value `{}`", tok.trim())))
            }
        })
        .collect()
}

fn push_row<'a>(out: &mut String, values: impl IntoIterator<Item = &'a f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

/// All `(n+2)²` node values, one array row per line.
pub fn field_to_csv(f: &ScalarField) -> String {
    let g = f.grid();
    let mut out = format!("{FIELD_TAG} n={} dx={} dt={}\n", g.n(), g.dx(), g.dt());
    for row in f.values().rows() {
        push_row(&mut out, row.iter());
    }
    out
}

pub fn write_field_csv(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    write_bytes(path.as_ref(), field_to_csv(f).as_bytes())
}

/// Reads a field written by [`write_field_csv`] onto `grid`.
pub fn read_field_csv(path: impl AsRef<Path>, grid: &Grid2D) -> Result<ScalarField> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let side = grid.side();
    let mut values = Vec::with_capacity(side * side);
    let mut rows = 0;
    for (line, l) in data_lines(&text) {
        let row = parse_row(path, line, l)?;
        if row.len() != side {
            return Err(parse_err(path, line, format!("expected {side} values, found {}", row.len())));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != side {
        return Err(Error::Dimension {
            expected: side,
            found: rows,
        });
    }
    let arr = Array2::from_shape_vec((side, side), values).expect("row lengths checked");
    ScalarField::from_array(grid, arr)
}

/// Interior values as a 16-bit binary PGM. The affine map from `[min, max]`
/// is stored in a comment; image rows run from `y = 1` down to `y = −1`.
pub fn field_to_pgm(f: &ScalarField) -> Vec<u8> {
    let n = f.grid().n();
    let v = f.values();
    let interior = v.slice(ndarray::s![1..=n, 1..=n]);
    let lo = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n# min={lo} max={hi}\n{n} {n}\n65535\n").into_bytes();
    out.reserve(2 * n * n);
    for j in (1..=n).rev() {
        for i in 1..=n {
            let p = if span > 0.0 {
                ((v[[i, j]] - lo) / span * 65535.0).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
    out
}

pub fn write_field_pgm(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    write_bytes(path.as_ref(), &field_to_pgm(f))
}

/// Decoded 16-bit graymap.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    /// Value range recorded in the header comment, if any.
    pub range: Option<(f64, f64)>,
    /// Row-major pixels, top row first.
    pub pixels: Vec<u16>,
}

impl Pgm {
    /// Pixels mapped back to field values through the recorded range.
    pub fn values(&self) -> Option<Vec<f64>> {
        let (lo, hi) = self.range?;
        Some(self.pixels.iter().map(|&p| lo + (hi - lo) * p as f64 / 65535.0).collect())
    }
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(path, &bytes)
}

fn parse_pgm(path: &Path, bytes: &[u8]) -> Result<Pgm> {
    // header: magic, width, height, maxval, interleaved with comment lines
    let mut pos = 0;
    let mut line = 1;
    let mut tokens = Vec::new();
    let mut range = None;
    while tokens.len() < 4 {
        let Some(&b) = bytes.get(pos) else {
            return Err(parse_err(path, line, "truncated header"));
        };
        if b == b'#' {
            let end = bytes[pos..].iter().position(|&c| c == b'\n').map_or(bytes.len(), |e| pos + e);
            let comment = String::from_utf8_lossy(&bytes[pos + 1..end]);
            range = range.or_else(|| parse_range(&comment));
            pos = end;
        } else if b.is_ascii_whitespace() {
            if b == b'\n' {
                line += 1;
            }
            pos += 1;
        } else {
            let end = bytes[pos..]
                .iter()
                .position(|c| c.is_ascii_whitespace())
                .map_or(bytes.len(), |e| pos + e);
            tokens.push((line, String::from_utf8_lossy(&bytes[pos..end]).into_owned()));
            pos = end;
        }
    }
    // exactly one whitespace byte separates maxval from the raster
    pos += 1;
    if tokens[0].1 != "P5" {
        return Err(parse_err(path, tokens[0].0, format!("expected P5, found `{}`", tokens[0].1)));
    }
    let num = |k: usize| -> Result<usize> {
        tokens[k]
            .1
            .parse()
            .map_err(|_| parse_err(path, tokens[k].0, format!("bad header value `{}`", tokens[k].1)))
    };
    let (width, height, maxval) = (num(1)?, num(2)?, num(3)?);
    if maxval != 65535 {
        return Err(parse_err(path, tokens[3].0, format!("expected maxval 65535, found {maxval}")));
    }
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != 2 * width * height {
        return Err(Error::Dimension {
            expected: 2 * width * height,
            found: raster.len(),
        });
    }
    let pixels = raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    Ok(Pgm {
        width,
        height,
        range,
        pixels,
    })
}

fn parse_range(comment: &str) -> Option<(f64, f64)> {
    let mut lo = None;
    let mut hi = None;
    for tok in comment.split_whitespace() {
        if let Some(v) = tok.strip_prefix("min=") {
            lo = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("max=") {
            hi = v.parse().ok();
        }
    }
    Some((lo?, hi?))
}

/// Header `t,node_0,…` then one row per time level.
pub fn trace_to_csv(g: &BoundaryTrace) -> String {
    let grid = g.grid();
    let len = grid.boundary_len();
    let mut out = format!("{TRACE_TAG} n={} dx={} dt={}\nt", grid.n(), grid.dx(), grid.dt());
    for k in 0..len {
        write!(out, ",node_{k}").unwrap();
    }
    out.push('\n');
    for j in 0..g.n_times() {
        let t = j as f64 * grid.dt();
        push_row(&mut out, std::iter::once(&t).chain(g.row(j)));
    }
    out
}

pub fn write_trace(path: impl AsRef<Path>, g: &BoundaryTrace) -> Result<()> {
    write_bytes(path.as_ref(), trace_to_csv(g).as_bytes())
}

/// Reads a trace onto `grid`. The `t` column is informational and ignored.
pub fn read_trace(path: impl AsRef<Path>, grid: &Grid2D) -> Result<BoundaryTrace> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let len = grid.boundary_len();
    let mut lines = data_lines(&text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "missing header row"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(parse_err(path, hline, "header must start with `t`"));
    }
    if cols.len() - 1 != len {
        return Err(Error::Dimension {
            expected: len,
            found: cols.len() - 1,
        });
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (line, l) in lines {
        let row = parse_row(path, line, l)?;
        if row.len() != len + 1 {
            return Err(parse_err(path, line, format!("expected {} values, found {}", len + 1, row.len())));
        }
        values.extend_from_slice(&row[1..]);
        rows += 1;
    }
    let arr = Array2::from_shape_vec((rows, len), values).expect("row lengths checked");
    BoundaryTrace::from_samples(grid, arr)
}

/// Measurement surface as named in the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaChoice {
    Full,
    LeftBottom,
    Nodes,
}

/// Everything a run needs, with documented defaults (see [`RunConfig::KEYS`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub dt_factor: f64,
    /// Shrink `dt` so that `T` is a whole number of steps.
    pub fit_dt: bool,
    pub t_final: f64,
    pub gamma: GammaChoice,
    pub gamma_nodes: Vec<usize>,
    pub lambda: f64,
    /// Taper arc length; 0 disables the taper.
    pub lambda_taper: f64,
    /// Preset name, or `custom` to use `bumps`.
    pub phantom: String,
    pub bumps: Vec<BumpSpec>,
    pub noise: f64,
    pub seed: u64,
    pub iterations: usize,
    pub subspace: Subspace,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 257,
            dt_factor: DEFAULT_DT_FACTOR,
            fit_dt: false,
            t_final: 5.0,
            gamma: GammaChoice::Full,
            gamma_nodes: Vec::new(),
            lambda: 1.0,
            lambda_taper: 0.0,
            phantom: phantom::PAPER_SIX.to_string(),
            bumps: Vec::new(),
            noise: 0.0,
            seed: 0,
            iterations: 1,
            subspace: Subspace::H1,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("expected {what}, found `{value}`")))
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_value(key, value, "a number")?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(key, format!("must be positive, found {value}")));
    }
    Ok(v)
}

fn parse_nonnegative(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_value(key, value, "a number")?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::config(key, format!("must be non-negative, found {value}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Recognised keys in file order.
    pub const KEYS: [&'static str; 15] = [
        "n",
        "dt_factor",
        "fit_dt",
        "T",
        "gamma",
        "gamma_nodes",
        "lambda",
        "lambda_taper",
        "phantom",
        "bumps",
        "noise",
        "seed",
        "iterations",
        "subspace",
        "out",
    ];

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n" => {
                let n: i64 = parse_value(key, value, "an integer")?;
                if !(4..=8192).contains(&n) {
                    return Err(Error::config(key, format!("must be in 4..=8192, found {n}")));
                }
                self.n = n as usize;
            }
            "dt_factor" => {
                let f = parse_positive(key, value)?;
                if f > std::f64::consts::FRAC_1_SQRT_2 {
                    return Err(Error::config(key, format!("{f} violates the CFL bound 1/sqrt(2)")));
                }
                self.dt_factor = f;
            }
            "fit_dt" => self.fit_dt = parse_value(key, value, "true or false")?,
            "T" => self.t_final = parse_positive(key, value)?,
            "gamma" => {
                self.gamma = match value {
                    "full" => GammaChoice::Full,
                    "left_bottom" => GammaChoice::LeftBottom,
                    "nodes" => GammaChoice::Nodes,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected full, left_bottom or nodes, found `{value}`"),
                        ))
                    }
                }
            }
            "gamma_nodes" => {
                self.gamma_nodes = value
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse_value(key, t.trim(), "a boundary node index"))
                    .collect::<Result<_>>()?;
            }
            "lambda" => self.lambda = parse_positive(key, value)?,
            "lambda_taper" => self.lambda_taper = parse_nonnegative(key, value)?,
            "phantom" => {
                if value != "custom" && phantom::preset(value).is_none() {
                    return Err(Error::config(
                        key,
                        format!("unknown preset `{value}` (expected {} or custom)", phantom::PAPER_SIX),
                    ));
                }
                self.phantom = value.to_string();
            }
            "bumps" => {
                self.bumps = value
                    .split(';')
                    .filter(|b| !b.trim().is_empty())
                    .enumerate()
                    .map(|(i, b)| {
                        let nums: Vec<f64> = b
                            .split_whitespace()
                            .map(|t| parse_value(key, t, "a number"))
                            .collect::<Result<_>>()?;
                        let [x, y, r, a] = nums[..] else {
                            return Err(Error::config(key, format!("bump {i}: expected `x y radius amplitude`")));
                        };
                        let spec = BumpSpec::new((x, y), r, a);
                        spec.validate().map_err(|e| Error::config(key, format!("bump {i}: {e}")))?;
                        Ok(spec)
                    })
                    .collect::<Result<_>>()?;
            }
            "noise" => self.noise = parse_nonnegative(key, value)?,
            "seed" => self.seed = parse_value(key, value, "a non-negative integer")?,
            "iterations" => self.iterations = parse_value(key, value, "a non-negative integer")?,
            "subspace" => {
                self.subspace = value
                    .parse()
                    .map_err(|_| Error::config(key, format!("expected H0 or H1, found `{value}`")))?
            }
            "out" if value.is_empty() => return Err(Error::config(key, "path must not be empty")),
            "out" => self.out = PathBuf::from(value),
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values. Cross-key
    /// consistency is left to [`RunConfig::check`].
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (line, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                path: PathBuf::new(),
                line: line + 1,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Cross-key consistency.
    pub fn check(&self) -> Result<()> {
        if self.gamma == GammaChoice::Nodes && self.gamma_nodes.is_empty() {
            return Err(Error::config("gamma_nodes", "required when gamma = nodes"));
        }
        if self.phantom == "custom" && self.bumps.is_empty() {
            return Err(Error::config("bumps", "required when phantom = custom"));
        }
        if self.phantom != "custom" && !self.bumps.is_empty() {
            return Err(Error::config("bumps", "only allowed with phantom = custom"));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = if self.fit_dt {
            Grid2D::fitted(self.n, self.dt_factor, self.t_final)?
        } else {
            Grid2D::with_dt_factor(self.n, self.dt_factor)?
        };
        g.steps_for(self.t_final).map_err(|e| {
            Error::config("T", format!("{e}; set fit_dt = true to adjust dt"))
        })?;
        Ok(g)
    }

    pub fn gamma_preset(&self) -> GammaPreset {
        match self.gamma {
            GammaChoice::Full => GammaPreset::Full,
            GammaChoice::LeftBottom => GammaPreset::LeftBottom,
            GammaChoice::Nodes => GammaPreset::Nodes(self.gamma_nodes.clone()),
        }
    }

    pub fn lambda_profile(&self) -> LambdaProfile {
        LambdaProfile {
            value: self.lambda,
            taper: (self.lambda_taper > 0.0).then_some(self.lambda_taper),
        }
    }

    pub fn boundary_spec(&self, grid: &Grid2D) -> Result<BoundarySpec> {
        BoundarySpec::from_preset(grid, &self.gamma_preset(), self.lambda_profile())
            .map_err(|e| Error::config("gamma_nodes", e.to_string()))
    }

    pub fn bump_list(&self) -> Vec<BumpSpec> {
        phantom::preset(&self.phantom).unwrap_or_else(|| self.bumps.clone())
    }

    pub fn recon_config(&self, bspec: &BoundarySpec) -> ReconConfig {
        ReconConfig::new(bspec, self.t_final)
            .with_iterations(self.iterations)
            .with_subspace(self.subspace)
    }

    /// The configuration as a file that [`RunConfig::from_text`] reads back
    /// to an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("n", self.n.to_string());
        kv("dt_factor", self.dt_factor.to_string());
        kv("fit_dt", self.fit_dt.to_string());
        kv("T", self.t_final.to_string());
        kv(
            "gamma",
            match self.gamma {
                GammaChoice::Full => "full",
                GammaChoice::LeftBottom => "left_bottom",
                GammaChoice::Nodes => "nodes",
            }
            .to_string(),
        );
        if !self.gamma_nodes.is_empty() {
            let nodes: Vec<String> = self.gamma_nodes.iter().map(usize::to_string).collect();
            kv("gamma_nodes", nodes.join(","));
        }
        kv("lambda", self.lambda.to_string());
        kv("lambda_taper", self.lambda_taper.to_string());
        kv("phantom", self.phantom.clone());
        if !self.bumps.is_empty() {
            let bumps: Vec<String> = self
                .bumps
                .iter()
                .map(|b| format!("{} {} {} {}", b.center.0, b.center.1, b.radius, b.amplitude))
                .collect();
            kv("bumps", bumps.join("; "));
        }
        kv("noise", self.noise.to_string());
        kv("seed", self.seed.to_string());
        kv("iterations", self.iterations.to_string());
        kv("subspace", self.subspace.name().to_string());
        kv("out", self.out.display().to_string());
        out
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, msg, .. } => parse_err(path, line, msg),
        other => other,
    }
}

/// Reads a configuration file; parse errors carry the path.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    RunConfig::from_text(&read_text(path)?).map_err(|e| with_path(path, e))
}

/// Layers a configuration file over `cfg` without the final consistency
/// check.
pub fn apply_config_file(cfg: &mut RunConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    cfg.apply_text(&read_text(path)?).map_err(|e| with_path(path, e))
}
