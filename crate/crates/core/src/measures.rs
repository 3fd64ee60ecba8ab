//! Single-step measures, the martingale constraint system and conditional
//! expectations on the lattice.
//!
//! Multi-step measures are represented as one single-step measure per node.
//! Product measures `p^n` use the same `p` everywhere; [`ScenarioMeasure`]
//! materializes a measure over all `2^(mn)` paths and exists for small
//! instances and cross-checks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::market::{columns, prefix_index, Column, MarketParams, NodeId, MAX_ASSETS};
use crate::payoffs::Payoff;

pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Default cap on `m (n - k)` when enumerating path completions.
pub const DEFAULT_MAX_COMPLETION_BITS: u32 = 24;

/// Probability vector over the `2^m` single-step columns, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    /// Validates and, when the total is within [`NORMALIZATION_TOL`] of one,
    /// renormalizes. Entries in `[-tol, 0)` are clamped to zero.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        check_width(weights.len())?;
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -NORMALIZATION_TOL {
                return Err(Error::InvalidMeasure(format!("negative or non-finite weight {w}")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        if total != 1.0 {
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        Ok(Self { weights })
    }

    /// Builds a measure from masses that are exact by construction (vertex
    /// measures, LP vertices); only sign and width are checked.
    pub(crate) fn from_exact(weights: Vec<f64>) -> Self {
        debug_assert!(check_width(weights.len()).is_ok());
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        Self { weights }
    }

    pub fn dirac(col: Column) -> Self {
        let mut weights = vec![0.0; 1 << col.width()];
        weights[col.position()] = 1.0;
        Self { weights }
    }

    pub fn uniform(m: usize) -> Self {
        let n = 1usize << m;
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_assets(&self) -> usize {
        self.weights.len().trailing_zeros() as usize
    }

    pub fn mass(&self, col: Column) -> f64 {
        self.weights[col.position()]
    }

    /// `<X, p>` summed in column order.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, x)| w * x).sum()
    }

    /// Columns carrying positive mass, in column order.
    pub fn support(&self) -> Vec<(Column, f64)> {
        let m = self.num_assets();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(p, &w)| (Column::from_position(p, m), w))
            .collect()
    }

    /// `E(l_i)`: probability that asset `i` moves up.
    pub fn up_probabilities(&self) -> Vec<f64> {
        let m = self.num_assets();
        (0..m)
            .map(|i| {
                columns(m)
                    .zip(&self.weights)
                    .filter(|(c, _)| c.is_up(i))
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect()
    }

    pub fn approx_eq(&self, other: &Measure, tol: f64) -> bool {
        self.weights.len() == other.weights.len()
            && self.weights.iter().zip(&other.weights).all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn check_width(len: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() || len.trailing_zeros() as usize > MAX_ASSETS {
        return Err(Error::InvalidMeasure(format!("length {len} is not 2^m for 1 <= m <= {MAX_ASSETS}")));
    }
    Ok(())
}

/// `Psi[i][j]`: gross return of asset `i` on column `j`, either `U_i` or `D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl PsiMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, asset: usize, position: usize) -> f64 {
        self.entries[asset * self.cols + position]
    }

    pub fn column(&self, col: Column) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col.position())).collect()
    }
}

pub fn build_psi(params: &MarketParams) -> PsiMatrix {
    let m = params.num_assets();
    let n = params.num_columns();
    let mut entries = Vec::with_capacity(m * n);
    for (i, a) in params.assets().iter().enumerate() {
        entries.extend(columns(m).map(|c| if c.is_up(i) { a.up_ratio } else { a.down_ratio }));
    }
    PsiMatrix {
        rows: m,
        cols: n,
        entries,
    }
}

/// `|Psi p - R|_inf <= tol`. Certifies the product `p^n` as an `n`-step
/// martingale measure as well.
pub fn is_martingale(p: &Measure, params: &MarketParams, tol: f64) -> Result<bool> {
    if p.num_assets() != params.num_assets() {
        return Err(Error::DimensionMismatch {
            expected: params.num_assets(),
            found: p.num_assets(),
        });
    }
    let psi = build_psi(params);
    let r = params.growth_factor();
    Ok((0..psi.rows()).all(|i| {
        let e: f64 = (0..psi.cols()).map(|j| psi.get(i, j) * p.weights[j]).sum();
        (e - r).abs() <= tol
    }))
}

/// `(m+1) x 2^m` system whose nonnegative solutions are the single-step
/// martingale measures: `Psi` rows with rhs `R`, then the all-ones row with rhs 1.
pub fn martingale_constraints(params: &MarketParams) -> (DMatrix<f64>, Vec<f64>) {
    let m = params.num_assets();
    let psi = build_psi(params);
    let a = DMatrix::from_fn(m + 1, psi.cols(), |i, j| if i < m { psi.get(i, j) } else { 1.0 });
    let mut d = vec![params.growth_factor(); m];
    d.push(1.0);
    (a, d)
}

/// Undiscounted `E(X | node)` under `p^(n-k)` for a path-independent payoff,
/// folding back the sub-lattice below `node`.
pub fn conditional_expectation_at_node(
    params: &MarketParams,
    payoff: &Payoff,
    node: &NodeId,
    p: &Measure,
) -> Result<f64> {
    if payoff.is_path_dependent() {
        return Err(Error::KindMismatch("path-dependent payoff needs an explicit prefix".into()));
    }
    check_node(params, node)?;
    check_measure(params, p)?;
    fold_node(params, node, p, |n| payoff.evaluate_terminal(params, n))
}

pub(crate) fn fold_node<F>(params: &MarketParams, node: &NodeId, p: &Measure, mut terminal: F) -> Result<f64>
where
    F: FnMut(&NodeId) -> Result<f64>,
{
    let m = params.num_assets();
    let h = params.num_steps() - node.level;
    let cols: Vec<Column> = columns(m).collect();

    // offsets w with 0 <= w_i <= j, mixed radix base j+1, first asset most significant
    let mut values = Vec::with_capacity((h + 1).pow(m as u32));
    for w in crate::market::level_nodes(m, h) {
        let up_counts = node.up_counts.iter().zip(&w.up_counts).map(|(u, o)| u + o).collect();
        values.push(terminal(&NodeId {
            level: params.num_steps(),
            up_counts,
        })?);
    }
    for j in (0..h).rev() {
        let base_next = j + 2;
        let offsets = crate::market::level_nodes(m, j);
        let mut next = Vec::with_capacity(offsets.len());
        for w in &offsets {
            let mut acc = 0.0;
            for (col, &mass) in cols.iter().zip(&p.weights) {
                let pos = w
                    .up_counts
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &o)| acc * base_next + (o + col.is_up(i) as u32) as usize);
                acc += mass * values[pos];
            }
            next.push(acc);
        }
        values = next;
    }
    Ok(values[0])
}

/// Undiscounted `E(X | prefix)` under `p^(n-k)`, summing over all
/// `2^(m(n-k))` completions of the prefix.
pub fn conditional_expectation_at_prefix(
    params: &MarketParams,
    payoff: &Payoff,
    prefix: &[Column],
    p: &Measure,
    max_bits: u32,
) -> Result<f64> {
    check_measure(params, p)?;
    check_prefix(params, prefix)?;
    let m = params.num_assets();
    let h = params.num_steps() - prefix.len();
    let bits = (m * h) as u32;
    if bits > max_bits {
        return Err(Error::BudgetExceeded {
            what: "path completions",
            required: 1u128 << bits,
            cap: 1u128 << max_bits,
        });
    }
    let mut path = prefix.to_vec();
    path.resize(params.num_steps(), Column::all_up(m));
    let mut total = 0.0;
    for idx in 0..1usize << bits {
        let mut weight = 1.0;
        let mut rest = idx;
        for slot in (prefix.len()..params.num_steps()).rev() {
            let col = Column::from_position(rest & ((1 << m) - 1), m);
            rest >>= m;
            weight *= p.mass(col);
            path[slot] = col;
        }
        if weight != 0.0 {
            total += weight * payoff.evaluate_path(params, &path)?;
        }
    }
    Ok(total)
}

/// Measure on all `2^(mn)` scenarios, indexed by [`crate::market::Scenario::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMeasure {
    num_assets: usize,
    num_steps: usize,
    weights: Vec<f64>,
}

impl ScenarioMeasure {
    pub fn new(num_assets: usize, num_steps: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = 1usize << (num_assets * num_steps);
        if weights.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= -NORMALIZATION_TOL)) {
            return Err(Error::InvalidMeasure("negative scenario weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!("scenario weights sum to {total}")));
        }
        Ok(Self {
            num_assets,
            num_steps,
            weights,
        })
    }

    /// `p^n`.
    pub fn product(p: &Measure, num_steps: usize) -> Self {
        Self::from_conditionals(p.num_assets(), num_steps, |_| p.clone())
    }

    /// Rebuilds a path measure from per-node single-step measures:
    /// `P(w) = prod_j P_{prefix(j-1)}(w^j)`.
    pub fn from_conditionals<F>(num_assets: usize, num_steps: usize, mut node_measure: F) -> Self
    where
        F: FnMut(&[Column]) -> Measure,
    {
        let n_cols = 1usize << num_assets;
        let mut weights = vec![1.0];
        let mut prefixes: Vec<Vec<Column>> = vec![Vec::new()];
        for _ in 0..num_steps {
            let mut next_w = Vec::with_capacity(weights.len() * n_cols);
            let mut next_p = Vec::with_capacity(weights.len() * n_cols);
            for (w, prefix) in weights.iter().zip(&prefixes) {
                let q = node_measure(prefix);
                for col in columns(num_assets) {
                    next_w.push(w * q.mass(col));
                    let mut p = prefix.clone();
                    p.push(col);
                    next_p.push(p);
                }
            }
            weights = next_w;
            prefixes = next_p;
        }
        Self {
            num_assets,
            num_steps,
            weights,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability of the event "path starts with `prefix`".
    pub fn prefix_mass(&self, prefix: &[Column]) -> f64 {
        let block = 1usize << (self.num_assets * (self.num_steps - prefix.len()));
        let start = prefix_index(prefix) * block;
        self.weights[start..start + block].iter().sum()
    }
}

/// Conditional single-step measure after `prefix`:
/// `P(prefix, col) / P(prefix)` for each column.
pub fn single_step_conditionals(p_multi: &ScenarioMeasure, prefix: &[Column]) -> Result<Measure> {
    if prefix.len() >= p_multi.num_steps {
        return Err(Error::PrefixLevelMismatch {
            expected: p_multi.num_steps - 1,
            found: prefix.len(),
        });
    }
    if prefix.iter().any(|c| c.width() != p_multi.num_assets) {
        return Err(Error::DimensionMismatch {
            expected: p_multi.num_assets,
            found: prefix.first().map(|c| c.width()).unwrap_or(0),
        });
    }
    let total = p_multi.prefix_mass(prefix);
    if total <= 0.0 {
        return Err(Error::ZeroMassEvent);
    }
    let mut extended = prefix.to_vec();
    extended.push(Column::all_up(p_multi.num_assets));
    let weights = columns(p_multi.num_assets)
        .map(|col| {
            *extended.last_mut().unwrap() = col;
            p_multi.prefix_mass(&extended) / total
        })
        .collect();
    Measure::new(weights)
}

fn check_measure(params: &MarketParams, p: &Measure) -> Result<()> {
    if p.num_assets() != params.num_assets() {
        return Err(Error::DimensionMismatch {
            expected: params.num_assets(),
            found: p.num_assets(),
        });
    }
    Ok(())
}

pub(crate) fn check_node(params: &MarketParams, node: &NodeId) -> Result<()> {
    if node.up_counts.len() != params.num_assets() {
        return Err(Error::DimensionMismatch {
            expected: params.num_assets(),
            found: node.up_counts.len(),
        });
    }
    if node.level > params.num_steps() || node.up_counts.iter().any(|&u| u as usize > node.level) {
        return Err(Error::IndexOutOfRange(format!("node {node:?}")));
    }
    Ok(())
}

pub(crate) fn check_prefix(params: &MarketParams, prefix: &[Column]) -> Result<()> {
    if prefix.len() > params.num_steps() {
        return Err(Error::PrefixLevelMismatch {
            expected: params.num_steps(),
            found: prefix.len(),
        });
    }
    if let Some(c) = prefix.iter().find(|c| c.width() != params.num_assets()) {
        return Err(Error::DimensionMismatch {
            expected: params.num_assets(),
            found: c.width(),
        });
    }
    Ok(())
}
