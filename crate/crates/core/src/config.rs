//! Flat `key = value` experiment description.
//!
//! ```text
//! model = nonlocal          # nonlocal | local | ks-limit
//! uq = gpc                  # gpc | collocation | deterministic
//! eps = 0.1
//! alpha = 1+0.5z
//! t_end = 0.003
//! peaks = 4@80@0          # ampExpr@width@center[@centerZ], ';'-separated
//! snapshot_times = 0.001, 0.003
//! ```

use std::collections::HashSet;
use std::path::PathBuf;

use crate::chaos::RandomCoefficient;
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VelocityQuad};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Nonlocal,
    Local,
    KsLimit,
}

impl Model {
    pub fn is_kinetic(self) -> bool {
        !matches!(self, Model::KsLimit)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Nonlocal => "nonlocal",
            Model::Local => "local",
            Model::KsLimit => "ks-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqMode {
    Gpc,
    Collocation,
    Deterministic,
}

/// One Gaussian bump `(amp0 + amp1 z) 4 sqrt(5 pi) exp(-width (x - center0 - center1 z)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub amp0: f64,
    pub amp1: f64,
    pub width: f64,
    pub center0: f64,
    pub center1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: Model,
    pub uq: UqMode,
    pub eps: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub v_max: f64,
    pub n_v: usize,
    pub gpc_order: usize,
    pub colloc_nodes: usize,
    pub alpha: RandomCoefficient,
    pub lambda_cfl: f64,
    pub t_end: f64,
    pub peaks: Vec<Peak>,
    pub output_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
}

impl SimConfig {
    /// Defaults for everything except `model`, `eps`, `t_end` and `peaks`.
    pub fn with_defaults(model: Model, eps: f64, t_end: f64, peaks: Vec<Peak>) -> Self {
        Self {
            model,
            uq: UqMode::Gpc,
            eps,
            x_max: 1.0,
            n_cells: 400,
            v_max: 1.0,
            n_v: 8,
            gpc_order: 4,
            colloc_nodes: 20,
            alpha: RandomCoefficient { a0: 1.0, a1: 0.0 },
            lambda_cfl: 0.02,
            t_end,
            peaks,
            output_dir: PathBuf::from("output"),
            snapshot_times: Vec::new(),
        }
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_max, self.n_cells)
    }

    pub fn velocity(&self) -> Result<VelocityQuad> {
        VelocityQuad::new(self.n_v, self.v_max)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.n_cells as f64
    }

    pub fn dt(&self) -> f64 {
        self.lambda_cfl * self.dx()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt()).round() as usize
    }

    /// Checks every invariant that does not need a line number.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.model.is_kinetic() {
            self.velocity()?;
        }
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return bad(format!("eps must be >= 0, got {}", self.eps));
        }
        if self.model.is_kinetic() && self.eps == 0.0 {
            return bad("eps must be > 0 for kinetic models (use model = ks-limit)".into());
        }
        if !(self.v_max > 0.0) || !self.v_max.is_finite() {
            return bad(format!("v_max must be > 0, got {}", self.v_max));
        }
        if !(self.lambda_cfl > 0.0) || !self.lambda_cfl.is_finite() {
            return bad(format!("lambda_cfl must be > 0, got {}", self.lambda_cfl));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if self.colloc_nodes == 0 {
            return bad("colloc_nodes must be at least 1".into());
        }
        if !(self.alpha.a0 - self.alpha.a1.abs() > 0.0) {
            return bad(format!(
                "alpha = {} + {} z must be positive on [-1, 1]",
                self.alpha.a0, self.alpha.a1
            ));
        }
        if self.peaks.is_empty() {
            return bad("peaks must list at least one peak".into());
        }
        for (p, peak) in self.peaks.iter().enumerate() {
            check_peak(peak).map_err(|m| Error::Config(format!("peak {}: {m}", p + 1)))?;
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end * (1.0 + 1e-12)) {
                return bad(format!("snapshot time {t} outside [0, t_end = {}]", self.t_end));
            }
        }
        Ok(())
    }
}

fn check_peak(p: &Peak) -> std::result::Result<(), String> {
    if !(p.width > 0.0) {
        return Err(format!("width must be > 0, got {}", p.width));
    }
    if p.amp0 - p.amp1.abs() < 0.0 {
        return Err(format!(
            "amplitude {} + {} z is negative for some z in [-1, 1]",
            p.amp0, p.amp1
        ));
    }
    Ok(())
}

/// Parses `c0`, `c1 z` or sums of such terms, e.g. `1.5+0.5z`, `2-z`, `0.3`.
pub fn parse_affine(text: &str) -> std::result::Result<(f64, f64), String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty expression".into());
    }
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'+' | b'-') {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);
    let (mut c0, mut c1) = (0.0, 0.0);
    for term in terms {
        if let Some(coef) = term.strip_suffix('z') {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            c1 += match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other.parse::<f64>().map_err(|_| format!("bad coefficient `{other}`"))?,
            };
        } else {
            c0 += term
                .parse::<f64>()
                .map_err(|_| format!("bad number `{term}`"))?;
        }
    }
    if !(c0.is_finite() && c1.is_finite()) {
        return Err("non-finite coefficient".into());
    }
    Ok((c0, c1))
}

fn parse_peak(text: &str) -> std::result::Result<Peak, String> {
    let parts: Vec<&str> = text.split('@').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(format!(
            "peak `{text}` must look like ampExpr@width@center[@centerZ]"
        ));
    }
    let (amp0, amp1) = parse_affine(parts[0])?;
    let num = |s: &str, what: &str| -> std::result::Result<f64, String> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("bad {what} `{s}`"))
    };
    let peak = Peak {
        amp0,
        amp1,
        width: num(parts[1], "width")?,
        center0: num(parts[2], "center")?,
        center1: if parts.len() == 4 {
            num(parts[3], "center z-coefficient")?
        } else {
            0.0
        },
    };
    check_peak(&peak)?;
    Ok(peak)
}

const KEYS: &[&str] = &[
    "model",
    "uq",
    "eps",
    "x_max",
    "n_cells",
    "v_max",
    "n_v",
    "gpc_order",
    "colloc_nodes",
    "alpha",
    "lambda_cfl",
    "t_end",
    "peaks",
    "output_dir",
    "snapshot_times",
];

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::with_defaults(Model::Nonlocal, f64::NAN, f64::NAN, Vec::new());
    let mut seen: HashSet<&'static str> = HashSet::new();
    let mut lines_of = std::collections::HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            key: content.to_string(),
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let err = |msg: String| Error::Parse {
            line,
            key: key.to_string(),
            msg,
        };
        let known = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err("unknown key".into()))?;
        if !seen.insert(known) {
            return Err(err("duplicate key".into()));
        }
        lines_of.insert(known, line);
        let real = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| err(format!("malformed number `{v}`")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| err(format!("malformed count `{v}`")))
        };
        match known {
            "model" => {
                cfg.model = match value {
                    "nonlocal" => Model::Nonlocal,
                    "local" => Model::Local,
                    "ks-limit" => Model::KsLimit,
                    other => return Err(err(format!("unknown model `{other}`"))),
                }
            }
            "uq" => {
                cfg.uq = match value {
                    "gpc" => UqMode::Gpc,
                    "collocation" => UqMode::Collocation,
                    "deterministic" => UqMode::Deterministic,
                    other => return Err(err(format!("unknown uq mode `{other}`"))),
                }
            }
            "eps" => {
                let e = real(value)?;
                if e < 0.0 {
                    return Err(err("eps must be >= 0".into()));
                }
                cfg.eps = e;
            }
            "x_max" => cfg.x_max = real(value)?,
            "n_cells" => cfg.n_cells = count(value)?,
            "v_max" => cfg.v_max = real(value)?,
            "n_v" => cfg.n_v = count(value)?,
            "gpc_order" => cfg.gpc_order = count(value)?,
            "colloc_nodes" => cfg.colloc_nodes = count(value)?,
            "alpha" => {
                let (a0, a1) = parse_affine(value).map_err(err)?;
                cfg.alpha = RandomCoefficient::new(a0, a1).map_err(|e| err(e.to_string()))?;
            }
            "lambda_cfl" => cfg.lambda_cfl = real(value)?,
            "t_end" => cfg.t_end = real(value)?,
            "peaks" => {
                cfg.peaks = value
                    .split(';')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(parse_peak)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(err)?;
            }
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "snapshot_times" => {
                cfg.snapshot_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(real)
                    .collect::<Result<_>>()?;
            }
            _ => unreachable!("every known key is handled"),
        }
    }

    for required in ["model", "t_end", "peaks"] {
        if !seen.contains(required) {
            return Err(Error::Parse {
                line: 0,
                key: required.into(),
                msg: "missing required key".into(),
            });
        }
    }
    if cfg.model.is_kinetic() && !seen.contains("eps") {
        return Err(Error::Parse {
            line: 0,
            key: "eps".into(),
            msg: "missing required key for kinetic models".into(),
        });
    }
    if !seen.contains("eps") {
        cfg.eps = 0.0;
    }
    cfg.validate().map_err(|e| match e {
        Error::Config(msg) => {
            let key = KEYS
                .iter()
                .find(|k| msg.starts_with(**k) || msg.contains(&format!("{} ", k)))
                .copied()
                .unwrap_or("config");
            Error::Parse {
                line: lines_of.get(key).copied().unwrap_or(0),
                key: key.into(),
                msg,
            }
        }
        other => other,
    })?;
    Ok(cfg)
}
