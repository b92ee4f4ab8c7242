//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments win,
//! so `--set` overrides are appended after the file contents.

use num_complex::Complex64 as C64;
use qtransfer::transfer::ChainSpec;
use qtransfer::{Error, ModelParams, Result};

pub const KEYS: &[&str] = &[
    "hbar_re", "hbar_im", "s0", "s1", "phi_re", "phi_im", "n", "v", "fock_dim", "verma_dim", "tol_check", "tol_series",
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ModelParams,
    pub chain: ChainSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { params: ModelParams::default(), chain: ChainSpec::homogeneous(2) }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, val: &str) -> Result<T> {
    val.parse().map_err(|_| Error::Parse(format!("bad value for {key}: {val:?}")))
}

/// Splits `key=value`, trimming both sides.
pub fn split_assignment(line: &str) -> Result<(&str, &str)> {
    let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
    Ok((k.trim(), v.trim()))
}

impl RunConfig {
    /// Applies assignments on top of the defaults. The result is validated.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut p = ModelParams::default();
        let mut n: Option<usize> = None;
        let mut v: Option<Vec<f64>> = None;
        for (key, val) in pairs {
            match key {
                "hbar_re" => p.hbar.re = parse_num(key, val)?,
                "hbar_im" => p.hbar.im = parse_num(key, val)?,
                "phi_re" => p.phi.re = parse_num(key, val)?,
                "phi_im" => p.phi.im = parse_num(key, val)?,
                "s0" => p.s0 = parse_num(key, val)?,
                "s1" => p.s1 = parse_num(key, val)?,
                "fock_dim" => p.fock_dim = parse_num(key, val)?,
                "verma_dim" => p.verma_dim = parse_num(key, val)?,
                "tol_check" => p.tol_check = parse_num(key, val)?,
                "tol_series" => p.tol_series = parse_num(key, val)?,
                "n" => n = Some(parse_num(key, val)?),
                "v" => {
                    let list = if val.is_empty() {
                        Vec::new()
                    } else {
                        val.split(',').map(|x| parse_num(key, x.trim())).collect::<Result<Vec<f64>>>()?
                    };
                    v = Some(list);
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}; expected one of {}", KEYS.join(", ")))),
            }
        }
        let chain = match (n, v) {
            (Some(n), Some(v)) if v.len() != n => {
                return Err(Error::InvalidParams(format!("n = {n} but v has {} entries", v.len())))
            }
            (_, Some(v)) => ChainSpec::from_real(&v)?,
            (Some(n), None) => ChainSpec::homogeneous(n),
            (None, None) => ChainSpec::homogeneous(2),
        };
        if chain.n() == 0 {
            return Err(Error::InvalidParams("chain needs at least one site".into()));
        }
        p.validate()?;
        Ok(Self { params: p, chain })
    }

    /// Parses a config file body followed by override assignments.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut pairs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            pairs.push(split_assignment(line)?);
        }
        for o in overrides {
            pairs.push(split_assignment(o)?);
        }
        Self::from_pairs(pairs)
    }
}

/// Parses `RE` or `RE,IM`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let mut it = s.split(',').map(str::trim);
    let re = parse_num("u", it.next().unwrap_or(""))?;
    let im = match it.next() {
        Some(x) => parse_num("u", x)?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(Error::Parse(format!("expected RE[,IM], got {s:?}")));
    }
    Ok(C64::new(re, im))
}
