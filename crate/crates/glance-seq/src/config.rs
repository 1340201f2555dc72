//! `key = value` config files layered under command-line flags.
//!
//! Resolution order is flag, then file, then built-in default. Every key
//! corresponds to exactly one documented config field; unknown keys are
//! errors so typos cannot silently fall back to defaults. `#` starts a
//! comment, blank lines are ignored.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

/// Optional overrides read from a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub metric: Option<String>,
    pub train_fraction: Option<f64>,
    pub min_epochs: Option<usize>,
    pub hidden: Option<String>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub restarts: Option<usize>,
    pub floor: Option<f64>,
    pub k_neighbors: Option<usize>,
    pub step_ms: Option<u64>,
    pub threshold: Option<f64>,
}

pub fn parse_overrides(text: &str) -> Result<Overrides, ConfigError> {
    let mut out = Overrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: line_no,
                message: format!("expected `key = value`, got {raw:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let bad_value = |message: String| ConfigError { line: line_no, message };
        macro_rules! parse {
            ($field:ident, $ty:ty) => {
                out.$field = Some(value.parse::<$ty>().map_err(|_| {
                    bad_value(format!("bad value {value:?} for {key}"))
                })?)
            };
        }
        match key {
            "seed" => parse!(seed, u64),
            "repeats" => parse!(repeats, usize),
            "metric" => out.metric = Some(value.to_owned()),
            "train_fraction" => parse!(train_fraction, f64),
            "min_epochs" => parse!(min_epochs, usize),
            "hidden" => out.hidden = Some(value.to_owned()),
            "max_iters" => parse!(max_iters, usize),
            "rel_tol" => parse!(rel_tol, f64),
            "restarts" => parse!(restarts, usize),
            "floor" => parse!(floor, f64),
            "k_neighbors" => parse!(k_neighbors, usize),
            "step_ms" => parse!(step_ms, u64),
            "threshold" => parse!(threshold, f64),
            _ => {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("unknown key {key:?}"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let text = "\n# harness\nseed = 7\nrepeats = 4  # ten is overkill here\nmetric = raw\nthreshold = inf\n";
        let o = parse_overrides(text).expect("parses");
        assert_eq!(o.seed, Some(7));
        assert_eq!(o.repeats, Some(4));
        assert_eq!(o.metric.as_deref(), Some("raw"));
        assert_eq!(o.threshold, Some(f64::INFINITY));
        assert_eq!(o.hidden, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert_eq!(
            parse_overrides("sneed = 1").expect_err("unknown").line,
            1
        );
        assert!(parse_overrides("seed = banana").is_err());
        assert!(parse_overrides("just some words").is_err());
    }
}
