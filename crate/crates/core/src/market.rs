//! Market definition, the single-step column space and lattice indexing.
//!
//! A single step of the market is described by a [`Column`]: one up/down bit
//! per asset. Columns are indexed `1..=2^m` in reverse-lexicographic order, so
//! index 1 is the all-up column and index `2^m` the all-down column. A full
//! price path is a [`Scenario`] of `n` columns. Paths that agree on the number
//! of up-moves of every asset reach the same price vector and collapse to one
//! vertex ([`NodeId`]) of the recombinant lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of assets. Column codes are stored in a `u32` and
/// dense per-column vectors have `2^m` entries.
pub const MAX_ASSETS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    pub initial_price: f64,
    pub up_ratio: f64,
    pub down_ratio: f64,
}

impl Asset {
    pub fn new(initial_price: f64, up_ratio: f64, down_ratio: f64) -> Self {
        Self {
            initial_price,
            up_ratio,
            down_ratio,
        }
    }
}

/// Unvalidated market description, as read from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub growth_factor: f64,
    pub num_steps: usize,
    pub assets: Vec<Asset>,
}

/// A validated `m`-asset, `n`-step binomial market with one-period riskless
/// growth factor `R = 1 + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    assets: Vec<Asset>,
    num_steps: usize,
    growth_factor: f64,
}

impl MarketParams {
    pub fn new(assets: Vec<Asset>, num_steps: usize, growth_factor: f64) -> Result<Self> {
        validate_params(MarketSpec {
            growth_factor,
            num_steps,
            assets,
        })
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn growth_factor(&self) -> f64 {
        self.growth_factor
    }

    /// Riskless one-period rate `r = R - 1`.
    pub fn rate(&self) -> f64 {
        self.growth_factor - 1.0
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn asset(&self, i: usize) -> &Asset {
        &self.assets[i]
    }

    /// Number of single-step columns, `2^m`.
    pub fn num_columns(&self) -> usize {
        1 << self.assets.len()
    }

    /// Same market with a different horizon.
    pub fn with_steps(&self, num_steps: usize) -> Result<Self> {
        Self::new(self.assets.clone(), num_steps, self.growth_factor)
    }

    pub fn to_spec(&self) -> MarketSpec {
        MarketSpec {
            growth_factor: self.growth_factor,
            num_steps: self.num_steps,
            assets: self.assets.clone(),
        }
    }
}

pub fn validate_params(raw: MarketSpec) -> Result<MarketParams> {
    let m = raw.assets.len();
    if !(1..=MAX_ASSETS).contains(&m) {
        return Err(Error::DimensionError(format!(
            "number of assets must be in 1..={MAX_ASSETS}, got {m}"
        )));
    }
    if raw.num_steps < 1 {
        return Err(Error::DimensionError("number of steps must be at least 1".into()));
    }
    let r = raw.growth_factor;
    if !r.is_finite() {
        return Err(Error::DimensionError(format!("growth factor must be finite, got {r}")));
    }
    for (i, a) in raw.assets.iter().enumerate() {
        if !(a.initial_price > 0.0) || !a.initial_price.is_finite() {
            return Err(Error::NonpositivePrice {
                asset: i,
                price: a.initial_price,
            });
        }
        let ordered = 0.0 < a.down_ratio && a.down_ratio < r && r < a.up_ratio && a.up_ratio.is_finite();
        if !ordered {
            return Err(Error::ArbitrageViolation {
                asset: i,
                down: a.down_ratio,
                growth: r,
                up: a.up_ratio,
            });
        }
    }
    Ok(MarketParams {
        assets: raw.assets,
        num_steps: raw.num_steps,
        growth_factor: raw.growth_factor,
    })
}

/// Per-asset single-step risk-neutral probabilities `b_i = (R - D_i)/(U_i - D_i)`
/// together with the stable permutation sorting them in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskNeutralWeights {
    pub b: Vec<f64>,
    /// `order[r]` is the asset holding the `r`-th largest weight.
    pub order: Vec<usize>,
}

impl RiskNeutralWeights {
    pub fn sorted(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.b[i]).collect()
    }

    pub fn sum(&self) -> f64 {
        self.b.iter().sum()
    }
}

pub fn risk_neutral_weights(params: &MarketParams) -> RiskNeutralWeights {
    let r = params.growth_factor;
    let b: Vec<f64> = params
        .assets
        .iter()
        .map(|a| (r - a.down_ratio) / (a.up_ratio - a.down_ratio))
        .collect();
    RiskNeutralWeights {
        order: sorted_order(&b),
        b,
    }
}

/// Stable permutation sorting `values` in non-increasing order.
pub fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable: equal values keep input order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// One step of the market: bit `i` is set when asset `i` moves up.
///
/// Internally the bits are kept as the binary number read top to bottom
/// (asset 0 is the most significant bit), which makes the reverse-lexicographic
/// position a subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    code: u32,
    width: u8,
}

impl Column {
    pub fn from_bits(bits: &[bool]) -> Self {
        assert!(!bits.is_empty() && bits.len() <= MAX_ASSETS);
        let code = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Self {
            code,
            width: bits.len() as u8,
        }
    }

    /// Column whose up-moves are exactly the assets in `mask` (asset `i` at bit `i`).
    pub fn from_subset(mask: u32, width: usize) -> Self {
        let mut code = 0;
        for i in 0..width {
            if mask >> i & 1 == 1 {
                code |= 1 << (width - 1 - i);
            }
        }
        Self {
            code,
            width: width as u8,
        }
    }

    /// Column at 0-based position `p` in reverse-lexicographic order.
    pub fn from_position(position: usize, width: usize) -> Self {
        let n = 1usize << width;
        debug_assert!(position < n);
        Self {
            code: (n - 1 - position) as u32,
            width: width as u8,
        }
    }

    pub fn all_up(width: usize) -> Self {
        Self::from_position(0, width)
    }

    pub fn all_down(width: usize) -> Self {
        Self::from_position((1 << width) - 1, width)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn is_up(&self, asset: usize) -> bool {
        (self.code >> (self.width as usize - 1 - asset)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.width()).map(|i| self.is_up(i)).collect()
    }

    /// 0-based position in reverse-lexicographic order.
    pub fn position(&self) -> usize {
        (1usize << self.width) - 1 - self.code as usize
    }

    /// 1-based index `j`; the bits read top to bottom spell `2^m - j`.
    pub fn index(&self) -> usize {
        self.position() + 1
    }

    /// Set of assets moving up, asset `i` at bit `i`.
    pub fn subset_mask(&self) -> u32 {
        (0..self.width())
            .filter(|&i| self.is_up(i))
            .fold(0, |acc, i| acc | 1 << i)
    }

    pub fn up_count(&self) -> u32 {
        self.code.count_ones()
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.width() {
            f.write_str(if self.is_up(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn column_of_index(j: usize, m: usize) -> Result<Column> {
    if !(1..=MAX_ASSETS).contains(&m) {
        return Err(Error::IndexOutOfRange(format!("column width {m}")));
    }
    if j < 1 || j > 1 << m {
        return Err(Error::IndexOutOfRange(format!("column index {j} not in 1..={}", 1 << m)));
    }
    Ok(Column::from_position(j - 1, m))
}

pub fn index_of_column(col: &Column) -> usize {
    col.index()
}

/// All `2^m` columns in index order.
pub fn columns(m: usize) -> impl ExactSizeIterator<Item = Column> + Clone {
    (0..1usize << m).map(move |p| Column::from_position(p, m))
}

/// A full price path: `n` columns, one per step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    columns: Vec<Column>,
}

impl Scenario {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.width != first.width) {
                return Err(Error::DimensionError("columns of a scenario must share one width".into()));
            }
        }
        Ok(Self { columns })
    }

    /// Scenario at `index` in the lexicographic order of column positions
    /// (the first column is the most significant digit, base `2^m`).
    pub fn from_index(index: usize, m: usize, n: usize) -> Self {
        Self {
            columns: prefix_from_index(index, m, n),
        }
    }

    pub fn index(&self) -> usize {
        prefix_index(&self.columns)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

impl std::ops::Deref for Scenario {
    type Target = [Column];

    fn deref(&self) -> &[Column] {
        &self.columns
    }
}

/// Decode a length-`len` column sequence from its lexicographic index.
pub fn prefix_from_index(mut index: usize, m: usize, len: usize) -> Vec<Column> {
    let base = 1usize << m;
    let mut cols = vec![Column::all_up(m); len];
    for slot in cols.iter_mut().rev() {
        *slot = Column::from_position(index % base, m);
        index /= base;
    }
    cols
}

pub fn prefix_index(cols: &[Column]) -> usize {
    cols.iter().fold(0usize, |acc, c| (acc << c.width) | c.position())
}

/// Vertex of the recombinant lattice: level `k` and per-asset up-move counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: usize,
    pub up_counts: Vec<u32>,
}

impl NodeId {
    pub fn root(m: usize) -> Self {
        Self {
            level: 0,
            up_counts: vec![0; m],
        }
    }

    pub fn new(level: usize, up_counts: Vec<u32>) -> Result<Self> {
        if up_counts.iter().any(|&u| u as usize > level) {
            return Err(Error::IndexOutOfRange(format!(
                "up counts {up_counts:?} exceed level {level}"
            )));
        }
        Ok(Self { level, up_counts })
    }

    /// Node reached by a path prefix.
    pub fn from_prefix(prefix: &[Column], m: usize) -> Self {
        let mut up_counts = vec![0u32; m];
        for col in prefix {
            for (i, u) in up_counts.iter_mut().enumerate() {
                *u += col.is_up(i) as u32;
            }
        }
        Self {
            level: prefix.len(),
            up_counts,
        }
    }

    pub fn down_count(&self, asset: usize) -> u32 {
        self.level as u32 - self.up_counts[asset]
    }

    /// Position within `enumerate_level(level)`.
    pub fn level_position(&self) -> usize {
        let base = self.level + 1;
        self.up_counts.iter().fold(0, |acc, &u| acc * base + u as usize)
    }

    /// Dash-joined up counts, e.g. `1-0-2`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.up_counts.iter().map(|u| u.to_string()).collect();
        parts.join("-")
    }
}

/// `S_i(0) U_i^u D_i^(k-u)`, computed from exponents so every path into a node
/// yields the same bits.
pub fn price_from_counts(asset: &Asset, level: usize, ups: u32) -> f64 {
    let downs = level as i32 - ups as i32;
    asset.initial_price * asset.up_ratio.powi(ups as i32) * asset.down_ratio.powi(downs)
}

pub fn asset_price(params: &MarketParams, node: &NodeId, asset: usize) -> Result<f64> {
    if asset >= params.num_assets() {
        return Err(Error::IndexOutOfRange(format!(
            "asset {asset} in a {}-asset market",
            params.num_assets()
        )));
    }
    if node.up_counts.len() != params.num_assets() || node.level > params.num_steps() {
        return Err(Error::IndexOutOfRange(format!("node {node:?} not in this market")));
    }
    Ok(price_from_counts(
        &params.assets[asset],
        node.level,
        node.up_counts[asset],
    ))
}

pub fn node_successor(params: &MarketParams, node: &NodeId, col: Column) -> Result<NodeId> {
    if node.level >= params.num_steps() {
        return Err(Error::LevelOverflow {
            level: node.level,
            steps: params.num_steps(),
        });
    }
    if col.width() != node.up_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: node.up_counts.len(),
            found: col.width(),
        });
    }
    let up_counts = node
        .up_counts
        .iter()
        .enumerate()
        .map(|(i, &u)| u + col.is_up(i) as u32)
        .collect();
    Ok(NodeId {
        level: node.level + 1,
        up_counts,
    })
}

/// The `(k+1)^m` nodes of level `k`, lexicographic in `up_counts`.
pub fn enumerate_level(params: &MarketParams, k: usize) -> Result<Vec<NodeId>> {
    if k > params.num_steps() {
        return Err(Error::IndexOutOfRange(format!(
            "level {k} beyond horizon {}",
            params.num_steps()
        )));
    }
    Ok(level_nodes(params.num_assets(), k))
}

pub(crate) fn level_nodes(m: usize, k: usize) -> Vec<NodeId> {
    let base = k + 1;
    let total = base.pow(m as u32);
    (0..total)
        .map(|mut p| {
            let mut up_counts = vec![0u32; m];
            for slot in up_counts.iter_mut().rev() {
                *slot = (p % base) as u32;
                p /= base;
            }
            NodeId { level: k, up_counts }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread_market(r: f64) -> MarketParams {
        MarketParams::new(
            vec![Asset::new(100.0, 1.2, 0.8), Asset::new(90.0, 1.15, 0.9)],
            2,
            r,
        )
        .unwrap()
    }

    #[test]
    fn validation_accepts_textbook_and_spread_markets() {
        assert!(MarketParams::new(vec![Asset::new(100.0, 1.2, 0.9)], 1, 1.1).is_ok());
        assert!(MarketParams::new(
            vec![Asset::new(100.0, 1.2, 0.8), Asset::new(90.0, 1.15, 0.9)],
            2,
            1.0
        )
        .is_ok());
    }

    #[test]
    fn validation_errors() {
        let err = MarketParams::new(vec![Asset::new(100.0, 1.2, 0.9)], 1, 1.3).unwrap_err();
        assert!(matches!(err, Error::ArbitrageViolation { asset: 0, .. }));
        let err = MarketParams::new(vec![Asset::new(100.0, 1.2, 1.1)], 1, 1.1).unwrap_err();
        assert!(matches!(err, Error::ArbitrageViolation { .. }));
        let err = MarketParams::new(vec![Asset::new(100.0, 1.2, 0.0)], 1, 1.1).unwrap_err();
        assert!(matches!(err, Error::ArbitrageViolation { .. }));
        let err = MarketParams::new(vec![], 1, 1.1).unwrap_err();
        assert!(matches!(err, Error::DimensionError(_)));
        let err = MarketParams::new(vec![Asset::new(100.0, 1.2, 0.9)], 0, 1.1).unwrap_err();
        assert!(matches!(err, Error::DimensionError(_)));
        let err = MarketParams::new(vec![Asset::new(-1.0, 1.2, 0.9)], 1, 1.1).unwrap_err();
        assert!(matches!(err, Error::NonpositivePrice { asset: 0, .. }));
    }

    #[test]
    fn weights_and_order() {
        let w = risk_neutral_weights(&spread_market(1.02));
        assert!((w.b[0] - 0.55).abs() < 1e-12);
        assert!((w.b[1] - 0.48).abs() < 1e-12);
        assert_eq!(w.order, vec![0, 1]);

        let sym = MarketParams::new(vec![Asset::new(10.0, 1.3, 0.8); 3], 1, 1.0).unwrap();
        let w = risk_neutral_weights(&sym);
        assert!(w.b.iter().all(|&b| b == w.b[0]));
        assert_eq!(w.order, vec![0, 1, 2]);

        let rev = MarketParams::new(
            vec![Asset::new(90.0, 1.15, 0.9), Asset::new(100.0, 1.2, 0.8)],
            1,
            1.02,
        )
        .unwrap();
        assert_eq!(risk_neutral_weights(&rev).order, vec![1, 0]);
    }

    #[test]
    fn column_indexing() {
        assert_eq!(column_of_index(1, 2).unwrap().bits(), vec![true, true]);
        assert_eq!(column_of_index(2, 2).unwrap().bits(), vec![true, false]);
        assert_eq!(column_of_index(4, 2).unwrap().bits(), vec![false, false]);
        assert_eq!(column_of_index(2, 3).unwrap().bits(), vec![true, true, false]);
        assert!(matches!(column_of_index(0, 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(column_of_index(5, 2), Err(Error::IndexOutOfRange(_))));
        for m in 1..=10 {
            for j in 1..=1usize << m {
                assert_eq!(index_of_column(&column_of_index(j, m).unwrap()), j);
            }
        }
    }

    #[test]
    fn subset_mask_round_trip() {
        for m in 1..=5 {
            for mask in 0..1u32 << m {
                assert_eq!(Column::from_subset(mask, m).subset_mask(), mask);
            }
        }
        assert_eq!(Column::from_bits(&[true, false]).subset_mask(), 0b01);
    }

    #[test]
    fn prices_at_spread_nodes() {
        let p = spread_market(1.0);
        let up_up = NodeId::new(1, vec![1, 1]).unwrap();
        assert!((asset_price(&p, &up_up, 0).unwrap() - 120.0).abs() < 1e-12);
        assert!((asset_price(&p, &up_up, 1).unwrap() - 103.5).abs() < 1e-12);
        let n = NodeId::new(2, vec![0, 1]).unwrap();
        assert!((asset_price(&p, &n, 0).unwrap() - 64.0).abs() < 1e-12);
        assert!((asset_price(&p, &n, 1).unwrap() - 93.15).abs() < 1e-12);
        assert_eq!(asset_price(&p, &NodeId::root(2), 1).unwrap(), 90.0);
        assert!(asset_price(&p, &NodeId::root(2), 2).is_err());
    }

    #[test]
    fn successors() {
        let p = spread_market(1.0);
        let root = NodeId::root(2);
        let s = node_successor(&p, &root, Column::from_bits(&[true, true])).unwrap();
        assert_eq!(s, NodeId::new(1, vec![1, 1]).unwrap());
        let a = NodeId::new(1, vec![1, 0]).unwrap();
        let s = node_successor(&p, &a, Column::from_bits(&[false, true])).unwrap();
        assert_eq!(s, NodeId::new(2, vec![1, 1]).unwrap());
        assert!(matches!(
            node_successor(&p, &s, Column::all_up(2)),
            Err(Error::LevelOverflow { level: 2, steps: 2 })
        ));

        let one = MarketParams::new(vec![Asset::new(1.0, 1.1, 0.9)], 2, 1.0).unwrap();
        let up = Column::from_bits(&[true]);
        let down = Column::from_bits(&[false]);
        let r = NodeId::root(1);
        let ud = node_successor(&one, &node_successor(&one, &r, up).unwrap(), down).unwrap();
        let du = node_successor(&one, &node_successor(&one, &r, down).unwrap(), up).unwrap();
        assert_eq!(ud, du);
    }

    #[test]
    fn level_sizes_and_order() {
        let p = MarketParams::new(vec![Asset::new(1.0, 1.1, 0.9); 3], 4, 1.0).unwrap();
        assert_eq!(enumerate_level(&p, 0).unwrap().len(), 1);
        assert_eq!(enumerate_level(&p, 4).unwrap().len(), 125);
        assert!(enumerate_level(&p, 5).is_err());
        let lvl = enumerate_level(&spread_market(1.0), 2).unwrap();
        assert_eq!(lvl.len(), 9);
        for (pos, node) in lvl.iter().enumerate() {
            assert_eq!(node.level_position(), pos);
        }
        assert!(lvl.windows(2).all(|w| w[0].up_counts < w[1].up_counts));
    }

    #[test]
    fn scenario_index_round_trip() {
        for idx in 0..64 {
            let s = Scenario::from_index(idx, 2, 3);
            assert_eq!(s.index(), idx);
        }
        assert_eq!(Scenario::from_index(0, 2, 2)[0], Column::all_up(2));
    }
}
