//! Plain-text experiment configs.
//!
//! One `key = value` per line, lists written `key = [a, b, c]`, `#` starts a
//! comment. Example:
//!
//! ```text
//! # high-fee scenario
//! gamma = 0.96
//! sigma = 0.4
//! lambda = 50
//! n_paths = 100
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CfmError, Result};
use crate::sim::{Grid, SimConfig};

pub const KNOWN_KEYS: &[&str] = &[
    "s0",
    "x1_0",
    "x2_0",
    "theta",
    "gamma",
    "sigma",
    "lambda",
    "p",
    "size_std",
    "r",
    "horizon",
    "n_steps",
    "n_paths",
    "master_seed",
];

/// Keys that must appear in every config; everything else has a default.
pub const REQUIRED_KEYS: &[&str] = &["gamma", "sigma", "lambda"];

/// Keys that may hold a list in a sweep config.
pub const GRID_KEYS: &[&str] = &["gamma", "sigma", "lambda"];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, Value>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = parse_assignment(line)
                .ok_or_else(|| CfmError::config(format!("line {}", idx + 1), format!("expected `key = value`, got `{line}`")))?;
            if map.entries.contains_key(&key) {
                return Err(CfmError::config(key, "appears more than once"));
            }
            map.insert(key, value)?;
        }
        Ok(map)
    }

    /// Applies a `KEY=VALUE` override, replacing any existing entry.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = parse_assignment(assignment)
            .ok_or_else(|| CfmError::config(assignment, "override must look like KEY=VALUE"))?;
        self.insert(key, value)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        self.insert(key.to_string(), Value::Scalar(value.to_string()))
    }

    fn insert(&mut self, key: String, value: Value) -> Result<()> {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CfmError::config(key, "unknown key"));
        }
        if matches!(value, Value::List(_)) && !GRID_KEYS.contains(&key.as_str()) {
            return Err(CfmError::config(key, "does not accept a list"));
        }
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    fn scalar(&self, key: &str) -> Result<Option<&str>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(Value::Scalar(s)) => Ok(Some(s)),
            Some(Value::List(_)) => Err(CfmError::config(key, "expected a single value, got a list")),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.scalar(key)? {
            None => Ok(default),
            Some(text) => parse_f64(key, text),
        }
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.scalar(key)? {
            None => Ok(default),
            Some(text) => text
                .parse()
                .map_err(|_| CfmError::config(key, format!("expected a non-negative integer, got `{text}`"))),
        }
    }

    /// A grid axis: either a list or a single value.
    pub fn axis(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(Value::Scalar(s)) => Ok(Some(vec![parse_f64(key, s)?])),
            Some(Value::List(items)) => {
                if items.is_empty() {
                    return Err(CfmError::config(key, "list is empty"));
                }
                items.iter().map(|s| parse_f64(key, s)).collect::<Result<Vec<_>>>().map(Some)
            }
        }
    }

    pub fn require(&self, keys: &[&str]) -> Result<()> {
        for key in keys {
            if !self.contains(key) {
                return Err(CfmError::config(*key, "required key is missing"));
            }
        }
        Ok(())
    }

    /// Builds and validates a single-scenario config.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        self.require(REQUIRED_KEYS)?;
        let cfg = self.base_config(None)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a sweep: grid axes from `gamma`, `sigma`, `lambda` and a base
    /// config for everything else.
    pub fn to_sweep(&self) -> Result<(Grid, SimConfig)> {
        self.require(REQUIRED_KEYS)?;
        let axis = |key: &str| self.axis(key).map(|v| v.unwrap_or_default());
        let grid = Grid {
            gammas: axis("gamma")?,
            sigmas: axis("sigma")?,
            lambdas: axis("lambda")?,
        };
        let base = self.base_config(Some(&grid))?;
        for (gamma, sigma, lambda) in grid.cells() {
            SimConfig {
                gamma,
                sigma,
                lambda,
                ..base.clone()
            }
            .validate()?;
        }
        Ok((grid, base))
    }

    fn base_config(&self, grid: Option<&Grid>) -> Result<SimConfig> {
        let d = SimConfig::default();
        let grid_value = |key: &str, default: f64| -> Result<f64> {
            match grid {
                Some(g) => Ok(match key {
                    "gamma" => g.gammas.first(),
                    "sigma" => g.sigmas.first(),
                    _ => g.lambdas.first(),
                }
                .copied()
                .unwrap_or(default)),
                None => self.f64_or(key, default),
            }
        };
        Ok(SimConfig {
            s0: self.f64_or("s0", d.s0)?,
            x1_0: self.f64_or("x1_0", d.x1_0)?,
            x2_0: self.f64_or("x2_0", d.x2_0)?,
            theta: self.f64_or("theta", d.theta)?,
            gamma: grid_value("gamma", d.gamma)?,
            sigma: grid_value("sigma", d.sigma)?,
            lambda: grid_value("lambda", d.lambda)?,
            p: self.f64_or("p", d.p)?,
            size_std: self.f64_or("size_std", d.size_std)?,
            r: self.f64_or("r", d.r)?,
            horizon: self.f64_or("horizon", d.horizon)?,
            n_steps: self.parse_or("n_steps", d.n_steps)?,
            n_paths: self.parse_or("n_paths", d.n_paths)?,
            master_seed: self.parse_or("master_seed", d.master_seed)?,
        })
    }
}

fn parse_assignment(line: &str) -> Option<(String, Value)> {
    let (key, value) = line.split_once('=')?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() || value.is_empty() || key.contains(char::is_whitespace) {
        return None;
    }
    let value = if let Some(inner) = value.strip_prefix('[') {
        let inner = inner.strip_suffix(']')?.trim();
        if inner.is_empty() {
            Value::List(Vec::new())
        } else {
            Value::List(inner.split(',').map(|s| s.trim().to_string()).collect())
        }
    } else {
        Value::Scalar(value.to_string())
    };
    Some((key.to_string(), value))
}

fn parse_f64(key: &str, text: &str) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CfmError::config(key, format!("expected a number, got `{text}`")))
}

fn join(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Every resolved parameter of a single-scenario config, in config syntax.
/// Floats use the shortest representation that parses back to the same value.
pub fn render_sim_config(cfg: &SimConfig) -> String {
    render(cfg, None)
}

pub fn render_sweep_config(grid: &Grid, base: &SimConfig) -> String {
    render(base, Some(grid))
}

fn render(cfg: &SimConfig, grid: Option<&Grid>) -> String {
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    line("s0", cfg.s0.to_string());
    line("x1_0", cfg.x1_0.to_string());
    line("x2_0", cfg.x2_0.to_string());
    line("theta", cfg.theta.to_string());
    match grid {
        Some(g) => {
            line("gamma", join(&g.gammas));
            line("sigma", join(&g.sigmas));
            line("lambda", join(&g.lambdas));
        }
        None => {
            line("gamma", cfg.gamma.to_string());
            line("sigma", cfg.sigma.to_string());
            line("lambda", cfg.lambda.to_string());
        }
    }
    line("p", cfg.p.to_string());
    line("size_std", cfg.size_std.to_string());
    line("r", cfg.r.to_string());
    line("horizon", cfg.horizon.to_string());
    line("n_steps", cfg.n_steps.to_string());
    line("n_paths", cfg.n_paths.to_string());
    line("master_seed", cfg.master_seed.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_comments() {
        let map = ConfigMap::parse(
            "# scenario\n\ngamma = [0.96, 0.98 ,1.0]\nsigma=0.4  # vol\nlambda = 50\nn_paths = 7\n",
        )
        .unwrap();
        assert_eq!(map.axis("gamma").unwrap().unwrap(), vec![0.96, 0.98, 1.0]);
        let (grid, base) = map.to_sweep().unwrap();
        assert_eq!(grid.sigmas, vec![0.4]);
        assert_eq!(base.n_paths, 7);
        assert_eq!(base.s0, 10.0);
    }

    #[test]
    fn missing_required_key_is_named() {
        let map = ConfigMap::parse("gamma = 0.96\nlambda = 50\n").unwrap();
        match map.to_sim_config() {
            Err(CfmError::Config { key, .. }) => assert_eq!(key, "sigma"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(matches!(ConfigMap::parse("volatility = 0.3"), Err(CfmError::Config { key, .. }) if key == "volatility"));
        assert!(matches!(ConfigMap::parse("sigma = 0.3\nsigma = 0.4"), Err(CfmError::Config { key, .. }) if key == "sigma"));
        assert!(matches!(ConfigMap::parse("sigma 0.3"), Err(CfmError::Config { key, .. }) if key == "line 1"));
        assert!(matches!(ConfigMap::parse("n_paths = [1, 2]"), Err(CfmError::Config { key, .. }) if key == "n_paths"));
        let map = ConfigMap::parse("gamma = 0.9\nsigma = abc\nlambda = 1").unwrap();
        assert!(matches!(map.to_sim_config(), Err(CfmError::Config { key, .. }) if key == "sigma"));
        let map = ConfigMap::parse("gamma = 1.5\nsigma = 0.2\nlambda = 1").unwrap();
        assert!(matches!(map.to_sim_config(), Err(CfmError::Config { key, .. }) if key == "gamma"));
        let map = ConfigMap::parse("gamma = []\nsigma = 0.2\nlambda = 1").unwrap();
        assert!(matches!(map.to_sweep(), Err(CfmError::Config { key, .. }) if key == "gamma"));
    }

    #[test]
    fn overrides_replace_entries() {
        let mut map = ConfigMap::parse("gamma = 0.96\nsigma = 0.4\nlambda = 50").unwrap();
        map.apply_override("sigma=0.8").unwrap();
        map.apply_override("gamma=[0.97, 0.99]").unwrap();
        assert_eq!(map.axis("sigma").unwrap().unwrap(), vec![0.8]);
        assert_eq!(map.axis("gamma").unwrap().unwrap(), vec![0.97, 0.99]);
        assert!(map.apply_override("nonsense").is_err());
        assert!(map.apply_override("bogus=1").is_err());
    }

    #[test]
    fn rendered_config_round_trips() {
        let cfg = SimConfig {
            gamma: 0.965,
            sigma: 0.1 + 0.2,
            lambda: 75.0,
            master_seed: u64::MAX,
            ..SimConfig::default()
        };
        let back = ConfigMap::parse(&render_sim_config(&cfg)).unwrap().to_sim_config().unwrap();
        assert_eq!(back, cfg);

        let grid = Grid::paper();
        let text = render_sweep_config(&grid, &cfg);
        let (grid_back, base_back) = ConfigMap::parse(&text).unwrap().to_sweep().unwrap();
        assert_eq!(grid_back, grid);
        assert_eq!(base_back.n_paths, cfg.n_paths);
        assert_eq!(base_back.master_seed, cfg.master_seed);
    }
}
