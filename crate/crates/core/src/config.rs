//! TOML system description.
//!
//! ```toml
//! R = 4                        # or: ratio = "1/4"
//! digits = [0, 1, 2, 3]        # integers j mean j/R^2; strings are rationals
//! probs = ["1/4", "1/4", "1/4", "1/4"]
//!
//! [construction]               # optional
//! kind = "multipoint"
//! R = 4
//! block_probs = ["1/164", "2/164", "1/164"]
//! p_star = "20/164"            # optional
//! ```
//!
//! A file may hold only the `[construction]` table; the system is then
//! generated from it. When both are present they must agree.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::constructions::{
    multiinterval, multipoint, ConstructionError, ConstructionKind, ConstructionSpec,
};
use crate::ifs::{IfsSpec, ValidationError, WeightedIfs};
use crate::rational::{fmt_rat, frac, parse_rat, ParseRatError, Rat};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("IoError: cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("SyntaxError: {0}")]
    Syntax(String),
    #[error("{0}")]
    Rational(#[from] ParseRatError),
    #[error("MissingField: {0}")]
    Missing(&'static str),
    #[error("InvalidConfig: {0}")]
    Invalid(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Value {
    Int(i64),
    Str(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstruction {
    kind: String,
    #[serde(rename = "R")]
    r: u64,
    block_probs: Vec<Value>,
    p_star: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "R")]
    r: Option<u64>,
    ratio: Option<String>,
    digits: Option<Vec<Value>>,
    probs: Option<Vec<Value>>,
    construction: Option<RawConstruction>,
}

/// A validated system, plus its construction partition when one is given.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub ifs: WeightedIfs,
    pub construction: Option<ConstructionSpec>,
}

fn rational(v: &Value) -> Result<Rat, ConfigError> {
    match v {
        Value::Int(n) => Ok(frac(*n, 1)),
        Value::Str(s) => Ok(parse_rat(s)?),
    }
}

impl SystemConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;

        let construction = match &raw.construction {
            None => None,
            Some(c) => {
                let kind = ConstructionKind::parse(&c.kind)
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown construction kind {:?}", c.kind)))?;
                let probs: Vec<Rat> = c.block_probs.iter().map(rational).collect::<Result<_, _>>()?;
                let p_star = c.p_star.as_ref().map(rational).transpose()?;
                Some(match kind {
                    ConstructionKind::Multipoint => multipoint(c.r, &probs, p_star)?,
                    ConstructionKind::Multiinterval => multiinterval(c.r, &probs, p_star)?,
                })
            }
        };

        let explicit = if raw.digits.is_some() || raw.probs.is_some() {
            Some(explicit_system(&raw)?)
        } else {
            None
        };

        match (explicit, construction) {
            (Some(spec), None) => Ok(SystemConfig {
                ifs: spec.validate()?,
                construction: None,
            }),
            (None, Some((ifs, spec))) => Ok(SystemConfig {
                ifs,
                construction: Some(spec),
            }),
            (Some(given), Some((ifs, spec))) => {
                if &given != ifs.spec() {
                    return Err(ConfigError::Invalid(
                        "digits/probs disagree with the [construction] table".into(),
                    ));
                }
                Ok(SystemConfig {
                    ifs,
                    construction: Some(spec),
                })
            }
            (None, None) => Err(ConfigError::Missing("digits")),
        }
    }
}

fn explicit_system(raw: &RawConfig) -> Result<IfsSpec, ConfigError> {
    let ratio = match (&raw.r, &raw.ratio) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid("give either R or ratio, not both".into()))
        }
        (Some(r), None) => {
            if *r < 2 {
                return Err(ConfigError::Invalid(format!("R must be at least 2, got {r}")));
            }
            frac(1, *r as i64)
        }
        (None, Some(s)) => parse_rat(s)?,
        (None, None) => return Err(ConfigError::Missing("R or ratio")),
    };
    let r_inv = crate::rational::is_unit_fraction(&ratio);
    let digits = raw
        .digits
        .as_ref()
        .ok_or(ConfigError::Missing("digits"))?
        .iter()
        .map(|v| match v {
            Value::Int(j) => {
                let r = r_inv.ok_or_else(|| {
                    ConfigError::Invalid("integer digits need a ratio of the form 1/R".into())
                })?;
                Ok(frac(*j, (r * r) as i64))
            }
            Value::Str(s) => Ok(parse_rat(s)?),
        })
        .collect::<Result<Vec<Rat>, ConfigError>>()?;
    let probs = raw
        .probs
        .as_ref()
        .ok_or(ConfigError::Missing("probs"))?
        .iter()
        .map(rational)
        .collect::<Result<Vec<Rat>, ConfigError>>()?;
    Ok(IfsSpec {
        ratio,
        digits,
        probs,
    })
}

fn quoted(values: &[Rat]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("\"{}\"", fmt_rat(v))).collect();
    format!("[{}]", items.join(", "))
}

/// Config text for a system, readable by [`SystemConfig::from_toml`].
pub fn render(ifs: &WeightedIfs, construction: Option<&ConstructionSpec>) -> String {
    let mut s = format!(
        "ratio = \"{}\"\ndigits = {}\nprobs = {}\n",
        fmt_rat(ifs.ratio()),
        quoted(ifs.digits()),
        quoted(ifs.probs())
    );
    if let Some(c) = construction {
        s.push_str(&format!(
            "\n[construction]\nkind = \"{}\"\nR = {}\nblock_probs = {}\np_star = \"{}\"\n",
            c.kind.name(),
            c.r_inv,
            quoted(&c.block_probs()),
            fmt_rat(&c.p_star)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_digits_are_lattice_indices() {
        let cfg = SystemConfig::from_toml(
            "R = 2\ndigits = [0, 2]\nprobs = [\"1/2\", \"1/2\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.ifs.digits(), &[frac(0, 1), frac(1, 2)]);
    }

    #[test]
    fn rational_strings_and_ratio() {
        let cfg = SystemConfig::from_toml(
            "ratio = \"1/3\"\ndigits = [\"0\", \"1/3\", \"2/3\"]\nprobs = [\"1/4\", \"1/2\", \"1/4\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.ifs.alphabet_size(), 3);
        assert!(cfg.construction.is_none());
    }

    #[test]
    fn integer_digits_need_unit_ratio() {
        let err = SystemConfig::from_toml(
            "ratio = \"2/5\"\ndigits = [0, 3]\nprobs = [\"1/2\", \"1/2\"]\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn construction_only_and_round_trip() {
        let text = "[construction]\nkind = \"multipoint\"\nR = 4\nblock_probs = [\"1/164\", \"2/164\", \"1/164\"]\n";
        let cfg = SystemConfig::from_toml(text).unwrap();
        let spec = cfg.construction.as_ref().unwrap();
        assert_eq!(spec.p_star, frac(20, 164));
        let again = SystemConfig::from_toml(&render(&cfg.ifs, Some(spec))).unwrap();
        assert_eq!(again.ifs, cfg.ifs);
        assert_eq!(again.construction.as_ref(), Some(spec));
    }

    #[test]
    fn disagreement_is_rejected() {
        let text = "R = 4\ndigits = [0, 12]\nprobs = [\"1/2\", \"1/2\"]\n[construction]\nkind = \"multipoint\"\nR = 4\nblock_probs = [\"1/164\", \"2/164\", \"1/164\"]\n";
        assert!(matches!(
            SystemConfig::from_toml(text),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            SystemConfig::from_toml("R = 2\ndigits = [0, 2]\nprobs = [\"1/2\", \"1/2\"]\nfoo = 1\n"),
            Err(ConfigError::Syntax(_))
        ));
    }
}
