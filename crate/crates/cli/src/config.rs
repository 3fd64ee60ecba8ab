use std::path::{Path, PathBuf};

use nabounds_core::linprog::DEFAULT_MAX_BASES;
use nabounds_core::market::{enumerate_level, prefix_from_index, validate_params};
use nabounds_core::payoffs::DEFAULT_MAX_FIBRE_BITS;
use nabounds_core::pricer::{DEFAULT_MAX_TERMS, DEFAULT_MAX_TREE_BITS};
use nabounds_core::{MarketParams, MarketSpec, NodeId, Payoff};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lp,
    Closed,
    Both,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Nodes {
    Root,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Cap on `m n` for anything that walks the full event tree.
    pub max_tree_bits: u32,
    /// Cap on summands of a path-dependent closed form.
    pub max_terms: u64,
    /// Cap on `m n` for exhaustive fibre checks.
    pub max_fibre_bits: u32,
    /// Cap on feasible bases visited by vertex enumeration.
    pub max_bases: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_tree_bits: DEFAULT_MAX_TREE_BITS,
            max_terms: DEFAULT_MAX_TERMS as u64,
            max_fibre_bits: DEFAULT_MAX_FIBRE_BITS,
            max_bases: DEFAULT_MAX_BASES,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    market: MarketSpec,
    payoff: Value,
    #[serde(default = "default_method")]
    method: Method,
    #[serde(default = "default_nodes")]
    nodes: Nodes,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default)]
    budget: Budget,
}

fn default_method() -> Method {
    Method::Auto
}

fn default_nodes() -> Nodes {
    Nodes::Root
}

fn default_tolerance() -> f64 {
    1e-9
}

/// A validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub market: MarketParams,
    pub payoff: Payoff,
    pub method: Method,
    pub nodes: Nodes,
    pub tolerance: f64,
    pub budget: Budget,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    /// Parses a config document. Relative table CSV paths resolve against
    /// `base_dir`.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let market = validate_params(raw.market).map_err(|e| CliError::Config(e.to_string()))?;
        if !(raw.tolerance > 0.0 && raw.tolerance.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be positive, got {}", raw.tolerance)));
        }
        let payoff = parse_payoff(raw.payoff, &market, base_dir)?;
        payoff.validate(&market).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            market,
            payoff,
            method: raw.method,
            nodes: raw.nodes,
            tolerance: raw.tolerance,
            budget: raw.budget,
        })
    }
}

fn parse_payoff(mut value: Value, market: &MarketParams, base_dir: Option<&Path>) -> Result<Payoff, CliError> {
    let kind = value.get("kind").and_then(Value::as_str).unwrap_or_default().to_string();
    if let Some(obj) = value.as_object_mut() {
        if let Some(csv_path) = obj.remove("csv") {
            let rel = csv_path
                .as_str()
                .ok_or_else(|| CliError::Config("payoff.csv must be a path string".into()))?;
            let path = match base_dir {
                Some(dir) => dir.join(rel),
                None => PathBuf::from(rel),
            };
            let values = match kind.as_str() {
                "table_terminal" => read_table(&path, market, "up_counts")?,
                "table_path" => read_table(&path, market, "prefix")?,
                _ => return Err(CliError::Config(format!("payoff.csv is only valid for table kinds, got {kind:?}"))),
            };
            obj.insert("values".into(), values.into());
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("payoff: {e}")))
}

/// Reads a table payoff. The value column is `value`, or the last column if
/// no column has that name. With a `key` column (`up_counts` or `prefix`)
/// rows may come in any order; without one they must follow the canonical
/// node or scenario order.
fn read_table(path: &Path, market: &MarketParams, key: &str) -> Result<Vec<f64>, CliError> {
    let err = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(err)?;
    let headers = reader.headers().map_err(err)?.clone();
    let value_col = headers
        .iter()
        .position(|h| h.trim() == "value")
        .unwrap_or(headers.len().saturating_sub(1));
    let key_col = headers.iter().position(|h| h.trim() == key);

    let labels: Vec<String> = if key == "up_counts" {
        enumerate_level(market, market.num_steps())
            .map_err(|e| CliError::Config(e.to_string()))?
            .iter()
            .map(NodeId::label)
            .collect()
    } else {
        let (m, n) = (market.num_assets(), market.num_steps());
        if m * n > 24 {
            return Err(CliError::Config(format!("path table needs 2^{} rows", m * n)));
        }
        (0..1usize << (m * n)).map(|i| prefix_label(&prefix_from_index(i, m, n))).collect()
    };
    let mut values = vec![None; labels.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(err)?;
        let raw = record.get(value_col).unwrap_or("").trim();
        let v: f64 = raw
            .parse()
            .map_err(|_| CliError::Config(format!("{} row {}: bad value {raw:?}", path.display(), row + 1)))?;
        let slot = match key_col {
            Some(c) => {
                let label = record.get(c).unwrap_or("").trim();
                labels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| CliError::Config(format!("{} row {}: unknown {key} {label:?}", path.display(), row + 1)))?
            }
            None => row,
        };
        if slot >= values.len() {
            return Err(CliError::Config(format!("{}: expected {} rows", path.display(), labels.len())));
        }
        values[slot] = Some(v);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::Config(format!("{}: missing {key} {}", path.display(), labels[i]))))
        .collect()
}

/// Column indices `j` (1-based) along a path, dash-joined.
pub fn prefix_label(prefix: &[nabounds_core::Column]) -> String {
    prefix.iter().map(|c| c.index().to_string()).collect::<Vec<_>>().join("-")
}
