//! Plain-text model files.
//!
//! ```text
//! format = tacmm-regressor
//! version = 1
//! input_dim = 42
//! hidden = 64
//! outputs = 2
//! feature_mean = v0 v1 ...
//! feature_std = ...
//! target_mean = ...
//! target_std = ...
//! w1 = ...        # hidden × input_dim, row-major
//! b1 = ...
//! w2 = ...        # outputs × hidden, row-major
//! b2 = ...
//! ```
//!
//! Floats use the shortest representation that parses back to the same bits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::network::{Network, RegressorModel, Standardizer, OUTPUTS};
use crate::error::{Error, Result};

pub const FORMAT: &str = "tacmm-regressor";
pub const VERSION: u32 = 1;

fn join(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 20);
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x:?}").unwrap();
    }
    s
}

pub fn to_text(model: &RegressorModel) -> String {
    let net = &model.network;
    let (d, h) = (net.input_dim, net.hidden);
    let p = &net.params;
    let (b1, w2, b2) = (h * d, h * d + h, h * d + h + OUTPUTS * h);
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        writeln!(out, "{k} = {v}").unwrap();
    };
    kv("format", FORMAT.into());
    kv("version", VERSION.to_string());
    kv("input_dim", d.to_string());
    kv("hidden", h.to_string());
    kv("outputs", OUTPUTS.to_string());
    kv("feature_mean", join(&model.features.mean));
    kv("feature_std", join(&model.features.std));
    kv("target_mean", join(&model.targets.mean));
    kv("target_std", join(&model.targets.std));
    kv("w1", join(&p[..b1]));
    kv("b1", join(&p[b1..w2]));
    kv("w2", join(&p[w2..b2]));
    kv("b2", join(&p[b2..]));
    out
}

pub fn from_text(text: &str) -> Result<RegressorModel> {
    let mut map: HashMap<&str, &str> = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ModelFormat(format!("line {}: expected `key = value`", n + 1)))?;
        map.insert(k.trim(), v.trim());
    }
    let get = |k: &str| map.get(k).copied().ok_or_else(|| Error::ModelFormat(format!("missing key `{k}`")));
    if get("format")? != FORMAT {
        return Err(Error::ModelFormat("not a tacmm regressor file".into()));
    }
    let version: u32 = get("version")?
        .parse()
        .map_err(|_| Error::ModelFormat("bad version".into()))?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let int = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::ModelFormat(format!("`{k}` is not an integer")))
    };
    let floats = |k: &str, n: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> = get(k)?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::ModelFormat(format!("`{k}` has a non-numeric entry")))?;
        if v.len() != n {
            return Err(Error::ModelFormat(format!("`{k}` has {} values, expected {n}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::ModelFormat(format!("`{k}` has a non-finite value")));
        }
        Ok(v)
    };
    let (d, h) = (int("input_dim")?, int("hidden")?);
    if int("outputs")? != OUTPUTS {
        return Err(Error::ModelFormat(format!("only {OUTPUTS} outputs are supported")));
    }
    let mut params = floats("w1", h * d)?;
    params.extend(floats("b1", h)?);
    params.extend(floats("w2", OUTPUTS * h)?);
    params.extend(floats("b2", OUTPUTS)?);
    let features = Standardizer {
        mean: floats("feature_mean", d)?,
        std: floats("feature_std", d)?,
    };
    let targets = Standardizer {
        mean: floats("target_mean", OUTPUTS)?,
        std: floats("target_std", OUTPUTS)?,
    };
    if features.std.iter().chain(&targets.std).any(|s| *s <= 0.0) {
        return Err(Error::ModelFormat("normalization std must be positive".into()));
    }
    Ok(RegressorModel {
        network: Network {
            input_dim: d,
            hidden: h,
            params,
        },
        features,
        targets,
    })
}

pub fn save(model: &RegressorModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<RegressorModel> {
    from_text(&std::fs::read_to_string(path)?)
}
