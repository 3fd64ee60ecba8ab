//! Contingent-claim payoffs and their supermodularity certificates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{level_nodes, prefix_from_index, price_from_counts, Column, MarketParams, NodeId};
use crate::supermodular::{fibrewise_violation, FibreWitness};

/// Tolerance on weight rows summing to one.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Default cap on `m n` for exhaustive fibre checks (`2^(mn)` tabulated paths).
pub const DEFAULT_MAX_FIBRE_BITS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    /// `(sum_i a_i S_i(n) - K)^+`
    BasketCall { weights: Vec<f64>, strike: f64 },
    /// `(K - sum_i a_i S_i(n))^+`
    BasketPut { weights: Vec<f64>, strike: f64 },
    /// `((1/n) sum_t sum_i a_ti S_i(t) - K)^+`, averaging over `t = 1..n`.
    AsianArithCall { weights: Vec<Vec<f64>>, strike: f64 },
    AsianArithPut { weights: Vec<Vec<f64>>, strike: f64 },
    /// Basket call at `lower_strike` minus basket call at `upper_strike`.
    Spread {
        weights: Vec<f64>,
        lower_strike: f64,
        upper_strike: f64,
    },
    /// One value per terminal node, in `enumerate_level(n)` order.
    TableTerminal { values: Vec<f64> },
    /// One value per scenario, in scenario-index order.
    TablePath { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Supermodular,
    Submodular,
    /// Both super- and submodular.
    Modular,
    Neither(FibreWitness),
    Unknown { required_bits: u32, cap_bits: u32 },
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Certificate::Supermodular => "Supermodular",
            Certificate::Submodular => "Submodular",
            Certificate::Modular => "Modular",
            Certificate::Neither(_) => "Neither",
            Certificate::Unknown { .. } => "Unknown",
        }
    }

    pub fn is_supermodular(&self) -> bool {
        matches!(self, Certificate::Supermodular | Certificate::Modular)
    }

    pub fn is_submodular(&self) -> bool {
        matches!(self, Certificate::Submodular | Certificate::Modular)
    }
}

pub(crate) fn basket_level(weights: &[f64], price: impl Fn(usize) -> f64) -> f64 {
    weights.iter().enumerate().map(|(i, a)| a * price(i)).sum()
}

fn check_weights(row: &[f64], m: usize, what: &str) -> Result<()> {
    if row.len() != m {
        return Err(Error::WeightError(format!("{what}: expected {m} weights, got {}", row.len())));
    }
    if row.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::WeightError(format!("{what}: weights must be nonnegative")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightError(format!("{what}: weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn check_strike(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidPayoff(format!("strike must be finite and nonnegative, got {k}")));
    }
    Ok(())
}

impl Payoff {
    pub fn is_path_dependent(&self) -> bool {
        matches!(
            self,
            Payoff::AsianArithCall { .. } | Payoff::AsianArithPut { .. } | Payoff::TablePath { .. }
        )
    }

    /// Checks the descriptor against a market: weight shapes and sums,
    /// strikes, table lengths.
    pub fn validate(&self, params: &MarketParams) -> Result<()> {
        let m = params.num_assets();
        let n = params.num_steps();
        match self {
            Payoff::BasketCall { weights, strike } | Payoff::BasketPut { weights, strike } => {
                check_weights(weights, m, "basket")?;
                check_strike(*strike)
            }
            Payoff::AsianArithCall { weights, strike } | Payoff::AsianArithPut { weights, strike } => {
                if weights.len() != n {
                    return Err(Error::WeightError(format!(
                        "asian: expected {n} weight rows, got {}",
                        weights.len()
                    )));
                }
                for (t, row) in weights.iter().enumerate() {
                    check_weights(row, m, &format!("asian row {}", t + 1))?;
                }
                check_strike(*strike)
            }
            Payoff::Spread {
                weights,
                lower_strike,
                upper_strike,
            } => {
                check_weights(weights, m, "spread")?;
                check_strike(*lower_strike)?;
                check_strike(*upper_strike)?;
                if !(lower_strike < upper_strike) {
                    return Err(Error::InvalidPayoff(format!(
                        "spread needs lower strike < upper strike, got {lower_strike} and {upper_strike}"
                    )));
                }
                Ok(())
            }
            Payoff::TableTerminal { values } => {
                let expected = (n + 1).pow(m as u32);
                if values.len() != expected {
                    return Err(Error::InvalidPayoff(format!(
                        "terminal table needs {expected} values, got {}",
                        values.len()
                    )));
                }
                finite(values)
            }
            Payoff::TablePath { values } => {
                let bits = m * n;
                if bits >= usize::BITS as usize || values.len() != 1usize << bits {
                    return Err(Error::InvalidPayoff(format!(
                        "path table needs 2^{bits} values, got {}",
                        values.len()
                    )));
                }
                finite(values)
            }
        }
    }

    /// Value at a terminal node; path-dependent kinds are rejected.
    pub fn evaluate_terminal(&self, params: &MarketParams, node: &NodeId) -> Result<f64> {
        if node.level != params.num_steps() || node.up_counts.len() != params.num_assets() {
            return Err(Error::IndexOutOfRange(format!("{node:?} is not a terminal node")));
        }
        let price = |i: usize| price_from_counts(params.asset(i), node.level, node.up_counts[i]);
        Ok(match self {
            Payoff::BasketCall { weights, strike } => (basket_level(weights, price) - strike).max(0.0),
            Payoff::BasketPut { weights, strike } => (strike - basket_level(weights, price)).max(0.0),
            Payoff::Spread {
                weights,
                lower_strike,
                upper_strike,
            } => {
                let s = basket_level(weights, price);
                (s - lower_strike).max(0.0) - (s - upper_strike).max(0.0)
            }
            Payoff::TableTerminal { values } => values[node.level_position()],
            Payoff::AsianArithCall { .. } | Payoff::AsianArithPut { .. } | Payoff::TablePath { .. } => {
                return Err(Error::KindMismatch(
                    "terminal evaluation requested for a path-dependent payoff".into(),
                ))
            }
        })
    }

    /// Value on a full path of `n` columns.
    pub fn evaluate_path(&self, params: &MarketParams, path: &[Column]) -> Result<f64> {
        let m = params.num_assets();
        let n = params.num_steps();
        if path.len() != n {
            return Err(Error::PrefixLevelMismatch {
                expected: n,
                found: path.len(),
            });
        }
        match self {
            Payoff::AsianArithCall { weights, strike } | Payoff::AsianArithPut { weights, strike } => {
                let mut ups = vec![0u32; m];
                let mut total = 0.0;
                for (t, col) in path.iter().enumerate() {
                    for (i, u) in ups.iter_mut().enumerate() {
                        *u += col.is_up(i) as u32;
                    }
                    total += basket_level(&weights[t], |i| price_from_counts(params.asset(i), t + 1, ups[i]));
                }
                let avg = total / n as f64;
                Ok(match self {
                    Payoff::AsianArithCall { .. } => (avg - strike).max(0.0),
                    _ => (strike - avg).max(0.0),
                })
            }
            Payoff::TablePath { values } => Ok(values[crate::market::prefix_index(path)]),
            _ => self.evaluate_terminal(params, &NodeId::from_prefix(path, m)),
        }
    }

    /// Terminal table reproducing this (path-independent) payoff.
    pub fn tabulate_terminal(&self, params: &MarketParams) -> Result<Payoff> {
        let values = level_nodes(params.num_assets(), params.num_steps())
            .iter()
            .map(|node| self.evaluate_terminal(params, node))
            .collect::<Result<_>>()?;
        Ok(Payoff::TableTerminal { values })
    }

    /// Path table reproducing this payoff; `2^(mn)` entries.
    pub fn tabulate_path(&self, params: &MarketParams, max_bits: u32) -> Result<Payoff> {
        Ok(Payoff::TablePath {
            values: scenario_values(self, params, max_bits)?,
        })
    }
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidPayoff("table values must be finite".into()))
    }
}

/// Payoff on every scenario, scenario-index order.
pub fn scenario_values(payoff: &Payoff, params: &MarketParams, max_bits: u32) -> Result<Vec<f64>> {
    let m = params.num_assets();
    let n = params.num_steps();
    let bits = (m * n) as u32;
    if bits > max_bits {
        return Err(Error::BudgetExceeded {
            what: "scenario enumeration",
            required: 1u128 << bits,
            cap: 1u128 << max_bits,
        });
    }
    if let Payoff::TablePath { values } = payoff {
        return Ok(values.clone());
    }
    (0..1usize << bits)
        .map(|idx| payoff.evaluate_path(params, &prefix_from_index(idx, m, n)))
        .collect()
}

/// Classifies a payoff as fibrewise super-, sub- or modular.
///
/// Basket and arithmetic-Asian kinds are convex functions of nonnegative
/// (call) or nonpositive (put) combinations of prices and are certified
/// supermodular without enumeration. Tables and spreads are checked
/// exhaustively over every fibre; `Unknown` is returned when `m n` exceeds
/// `max_bits`.
pub fn certify(payoff: &Payoff, params: &MarketParams, tol: f64, max_bits: u32) -> Certificate {
    match payoff {
        Payoff::BasketCall { .. }
        | Payoff::BasketPut { .. }
        | Payoff::AsianArithCall { .. }
        | Payoff::AsianArithPut { .. } => Certificate::Supermodular,
        Payoff::Spread { .. } | Payoff::TableTerminal { .. } | Payoff::TablePath { .. } => {
            certify_exhaustive(payoff, params, tol, max_bits)
        }
    }
}

/// Exhaustive fibre classification, ignoring any structural shortcut.
pub fn certify_exhaustive(payoff: &Payoff, params: &MarketParams, tol: f64, max_bits: u32) -> Certificate {
    let m = params.num_assets();
    let n = params.num_steps();
    let values = match scenario_values(payoff, params, max_bits) {
        Ok(v) => v,
        Err(_) => {
            return Certificate::Unknown {
                required_bits: (m * n) as u32,
                cap_bits: max_bits,
            }
        }
    };
    let super_witness = fibrewise_violation(&values, m, n, tol);
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    let sub_witness = fibrewise_violation(&negated, m, n, tol);
    match (super_witness, sub_witness) {
        (None, None) => Certificate::Modular,
        (None, Some(_)) => Certificate::Supermodular,
        (Some(_), None) => Certificate::Submodular,
        (Some(w), Some(_)) => Certificate::Neither(w),
    }
}
