//! No-arbitrage price bounds.
//!
//! Three routes are provided:
//!
//! * per-node linear programs folded backwards over the recombinant lattice
//!   (path-independent claims) or the full event tree (path-dependent
//!   claims), valid for any European claim;
//! * product-measure closed forms for fibrewise super/submodular claims,
//!   summing over completions drawn from the `m + 1` support columns of an
//!   extremal single-step measure;
//! * the explicit two-asset interval and basket formulas.
//!
//! Bounds at level `k` are discounted to time `k`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linprog::{FeasibleTableau, Sense, DEFAULT_TOL};
use crate::market::{
    columns, level_nodes, prefix_from_index, price_from_counts, risk_neutral_weights, Column, MarketParams, NodeId,
};
use crate::measures::{check_node, check_prefix, martingale_constraints, Measure};
use crate::payoffs::{basket_level, scenario_values, Certificate, Payoff};
use crate::supermodular::{lower_vertex_support, upper_vertex_support};

/// Default cap on `2^(mn)` for full-tree induction, as a bit count.
pub const DEFAULT_MAX_TREE_BITS: u32 = 24;

/// Default cap on the number of summands in a path-dependent closed form.
pub const DEFAULT_MAX_TERMS: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceInterval {
    pub lower: f64,
    pub upper: f64,
    /// Single-step measure attaining the upper bound at this node; `None`
    /// at terminal nodes or when measures were not retained.
    pub argmax_measure: Option<Measure>,
    pub argmin_measure: Option<Measure>,
}

/// Single-step LP over the martingale polytope, phase one solved once.
#[derive(Debug, Clone)]
pub struct SingleStepSolver {
    tableau: FeasibleTableau,
    growth: f64,
}

impl SingleStepSolver {
    pub fn new(params: &MarketParams, tol: f64) -> Result<Self> {
        let (a, d) = martingale_constraints(params);
        Ok(Self {
            tableau: FeasibleTableau::new(&a, &d, tol)?,
            growth: params.growth_factor(),
        })
    }

    /// `R^-1 max <upper, P>` and `R^-1 min <lower, P>` over single-step
    /// martingale measures `P`.
    pub fn bounds(&self, upper_values: &[f64], lower_values: &[f64]) -> Result<PriceInterval> {
        let hi = self.tableau.optimize(upper_values, Sense::Maximize)?;
        let lo = self.tableau.optimize(lower_values, Sense::Minimize)?;
        Ok(PriceInterval {
            lower: lo.value / self.growth,
            upper: hi.value / self.growth,
            argmax_measure: Some(Measure::from_exact(hi.point)),
            argmin_measure: Some(Measure::from_exact(lo.point)),
        })
    }
}

pub fn single_step_bounds(params: &MarketParams, payoff_vector: &[f64]) -> Result<PriceInterval> {
    if payoff_vector.len() != params.num_columns() {
        return Err(Error::DimensionMismatch {
            expected: params.num_columns(),
            found: payoff_vector.len(),
        });
    }
    SingleStepSolver::new(params, DEFAULT_TOL)?.bounds(payoff_vector, payoff_vector)
}

/// The two-asset martingale polytope is the segment
/// `Q(t) = (t, p1 - t, p2 - t, 1 - p1 - p2 + t)` in column order
/// `(11), (10), (01), (00)`, for `t` in `[max(p1 + p2 - 1, 0), min(p1, p2)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoAssetInterval {
    pub p: [f64; 2],
    pub t_min: f64,
    pub t_max: f64,
    pub at_min: Measure,
    pub at_max: Measure,
}

impl TwoAssetInterval {
    pub fn point(&self, t: f64) -> Result<Measure> {
        if t < self.t_min - 1e-12 || t > self.t_max + 1e-12 {
            return Err(Error::OutOfRange(t));
        }
        Ok(q_of_t(self.p, t.clamp(self.t_min, self.t_max)))
    }
}

fn q_of_t(p: [f64; 2], t: f64) -> Measure {
    let w = [t, p[0] - t, p[1] - t, 1.0 - p[0] - p[1] + t];
    Measure::from_exact(w.iter().map(|v| v.max(0.0)).collect())
}

pub fn two_asset_interval(params: &MarketParams) -> Result<TwoAssetInterval> {
    if params.num_assets() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: params.num_assets(),
        });
    }
    let b = risk_neutral_weights(params).b;
    let p = [b[0], b[1]];
    let t_min = (p[0] + p[1] - 1.0).max(0.0);
    let t_max = p[0].min(p[1]);
    Ok(TwoAssetInterval {
        p,
        t_min,
        t_max,
        at_min: q_of_t(p, t_min),
        at_max: q_of_t(p, t_max),
    })
}

/// Support columns and masses of the single-step measure whose product
/// attains the bound of a fibrewise supermodular claim.
///
/// Upper: the chain measure on `mu_0..mu_m`. Lower: the singleton measure on
/// `nu_0..nu_m` when `sum b <= 1`; with two assets and `sum b > 1` the other
/// endpoint `Q(t_min)` of the segment, supported on `(11), (10), (01)`.
pub fn extremal_support(params: &MarketParams, which: Bound) -> Result<Vec<(Column, f64)>> {
    let w = risk_neutral_weights(params);
    match which {
        Bound::Upper => upper_vertex_support(&w.b, &w.order),
        Bound::Lower => {
            let m = params.num_assets();
            if m == 2 && w.sum() > 1.0 {
                let iv = two_asset_interval(params)?;
                let q = &iv.at_min;
                Ok(vec![
                    (Column::from_bits(&[true, true]), q.weights()[0]),
                    (Column::from_bits(&[true, false]), q.weights()[1]),
                    (Column::from_bits(&[false, true]), q.weights()[2]),
                ])
            } else {
                lower_vertex_support(&w.b)
            }
        }
    }
}

pub fn extremal_measure(params: &MarketParams, which: Bound) -> Result<Measure> {
    let support = extremal_support(params, which)?;
    let mut weights = vec![0.0; params.num_columns()];
    for (c, w) in support {
        weights[c.position()] += w;
    }
    Ok(Measure::from_exact(weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// `(k+1)^m` nodes per level, indexed by [`NodeId::level_position`].
    Recombinant,
    /// `2^(mk)` nodes per level, indexed by prefix index.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductionOptions {
    pub tol: f64,
    pub max_tree_bits: u32,
    /// Run on the full tree even for path-independent payoffs.
    pub full_tree: bool,
    /// Keep per-node extremal measures.
    pub keep_measures: bool,
}

impl Default for InductionOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_tree_bits: DEFAULT_MAX_TREE_BITS,
            full_tree: false,
            keep_measures: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Empty at the terminal level or when measures were not retained.
    pub argmax: Vec<Measure>,
    pub argmin: Vec<Measure>,
}

impl LevelBounds {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn interval(&self, idx: usize) -> PriceInterval {
        PriceInterval {
            lower: self.lower[idx],
            upper: self.upper[idx],
            argmax_measure: self.argmax.get(idx).cloned(),
            argmin_measure: self.argmin.get(idx).cloned(),
        }
    }
}

/// Bounds at every node of the lattice, levels `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSurface {
    lattice: Lattice,
    num_assets: usize,
    levels: Vec<LevelBounds>,
}

impl BoundsSurface {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn num_steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &LevelBounds {
        &self.levels[k]
    }

    pub fn root(&self) -> PriceInterval {
        self.levels[0].interval(0)
    }

    pub fn at_node(&self, node: &NodeId) -> Option<PriceInterval> {
        match self.lattice {
            Lattice::Recombinant => {
                let level = self.levels.get(node.level)?;
                let idx = node.level_position();
                (idx < level.len()).then(|| level.interval(idx))
            }
            Lattice::Tree => None,
        }
    }

    pub fn at_prefix(&self, prefix: &[Column]) -> Option<PriceInterval> {
        match self.lattice {
            Lattice::Tree => {
                let level = self.levels.get(prefix.len())?;
                Some(level.interval(crate::market::prefix_index(prefix)))
            }
            Lattice::Recombinant => self.at_node(&NodeId::from_prefix(prefix, self.num_assets)),
        }
    }

    /// Lattice node reached by entry `idx` of level `k`, plus the column path
    /// for tree surfaces.
    pub fn node_of(&self, k: usize, idx: usize) -> (NodeId, Option<Vec<Column>>) {
        match self.lattice {
            Lattice::Recombinant => {
                let base = k + 1;
                let mut up_counts = vec![0u32; self.num_assets];
                let mut rest = idx;
                for slot in up_counts.iter_mut().rev() {
                    *slot = (rest % base) as u32;
                    rest /= base;
                }
                (NodeId { level: k, up_counts }, None)
            }
            Lattice::Tree => {
                let path = prefix_from_index(idx, self.num_assets, k);
                (NodeId::from_prefix(&path, self.num_assets), Some(path))
            }
        }
    }
}

/// Backward induction of per-node LP bounds. At each node the upper bound is
/// the discounted single-step maximum over the successors' upper bounds, the
/// lower bound the minimum over their lower bounds.
pub fn backward_induction_bounds(
    params: &MarketParams,
    payoff: &Payoff,
    opts: &InductionOptions,
) -> Result<BoundsSurface> {
    payoff.validate(params)?;
    let m = params.num_assets();
    let n = params.num_steps();
    let tree = opts.full_tree || payoff.is_path_dependent();
    let solver = SingleStepSolver::new(params, opts.tol)?;
    let cols: Vec<Column> = columns(m).collect();

    let terminal: Vec<f64> = if tree {
        scenario_values(payoff, params, opts.max_tree_bits)?
    } else {
        level_nodes(m, n)
            .par_iter()
            .map(|node| payoff.evaluate_terminal(params, node))
            .collect::<Result<_>>()?
    };
    let mut levels = vec![LevelBounds::default(); n + 1];
    levels[n] = LevelBounds {
        lower: terminal.clone(),
        upper: terminal,
        ..Default::default()
    };

    for k in (0..n).rev() {
        let next = &levels[k + 1];
        let count = if tree {
            1usize << (m * k)
        } else {
            (k + 1).pow(m as u32)
        };
        let successor = |idx: usize, col: &Column| -> usize {
            if tree {
                (idx << m) | col.position()
            } else {
                // decode idx at base k+1, re-encode the shifted counts at base k+2
                let base = k + 1;
                let mut rest = idx;
                let mut digits = vec![0usize; m];
                for d in digits.iter_mut().rev() {
                    *d = rest % base;
                    rest /= base;
                }
                digits
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, &d)| acc * (base + 1) + d + col.is_up(i) as usize)
            }
        };
        let results: Vec<PriceInterval> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let mut up = Vec::with_capacity(cols.len());
                let mut lo = Vec::with_capacity(cols.len());
                for col in &cols {
                    let s = successor(idx, col);
                    up.push(next.upper[s]);
                    lo.push(next.lower[s]);
                }
                solver.bounds(&up, &lo)
            })
            .collect::<Result<_>>()?;
        let mut level = LevelBounds {
            lower: results.iter().map(|r| r.lower).collect(),
            upper: results.iter().map(|r| r.upper).collect(),
            ..Default::default()
        };
        if opts.keep_measures {
            for r in results {
                level.argmax.extend(r.argmax_measure);
                level.argmin.extend(r.argmin_measure);
            }
        }
        levels[k] = level;
    }

    Ok(BoundsSurface {
        lattice: if tree { Lattice::Tree } else { Lattice::Recombinant },
        num_assets: m,
        levels,
    })
}

/// Role of the extremal measures: supermodular claims take their maximum at
/// the chain measure, submodular claims their minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modularity {
    Super,
    Sub,
}

fn support_for(params: &MarketParams, which: Bound, kind: Modularity) -> Result<Vec<(Column, f64)>> {
    let measure_bound = match (kind, which) {
        (Modularity::Super, b) => b,
        (Modularity::Sub, Bound::Upper) => Bound::Lower,
        (Modularity::Sub, Bound::Lower) => Bound::Upper,
    };
    extremal_support(params, measure_bound)
}

/// Closed-form bound at a path prefix for a fibrewise supermodular claim:
/// `R^-h sum_{i in I^h} P(c_i1)...P(c_ih) X(prefix c_i1 ... c_ih)` over the
/// `m + 1` support columns of the extremal measure.
pub fn product_bounds_path_dependent(
    params: &MarketParams,
    payoff: &Payoff,
    prefix: &[Column],
    which: Bound,
    max_terms: u128,
) -> Result<f64> {
    let support = support_for(params, which, Modularity::Super)?;
    path_sum(params, payoff, prefix, &support, max_terms)
}

fn path_sum(
    params: &MarketParams,
    payoff: &Payoff,
    prefix: &[Column],
    support: &[(Column, f64)],
    max_terms: u128,
) -> Result<f64> {
    check_prefix(params, prefix)?;
    let n = params.num_steps();
    let h = n - prefix.len();
    let terms = (support.len() as u128).checked_pow(h as u32).unwrap_or(u128::MAX);
    if terms > max_terms {
        return Err(Error::BudgetExceeded {
            what: "closed-form summands",
            required: terms,
            cap: max_terms,
        });
    }
    let mut path = prefix.to_vec();
    path.resize(n, Column::all_up(params.num_assets()));
    let mut total = 0.0;
    accumulate_paths(params, payoff, support, &mut path, prefix.len(), 1.0, &mut total)?;
    Ok(total / params.growth_factor().powi(h as i32))
}

fn accumulate_paths(
    params: &MarketParams,
    payoff: &Payoff,
    support: &[(Column, f64)],
    path: &mut Vec<Column>,
    slot: usize,
    weight: f64,
    total: &mut f64,
) -> Result<()> {
    if slot == path.len() {
        *total += weight * payoff.evaluate_path(params, path)?;
        return Ok(());
    }
    for &(col, mass) in support {
        if mass == 0.0 {
            continue;
        }
        path[slot] = col;
        accumulate_paths(params, payoff, support, path, slot + 1, weight * mass, total)?;
    }
    Ok(())
}

/// Closed-form bound at a lattice node for a path-independent, fibrewise
/// supermodular claim. Completions differing only in column order share a
/// terminal node, so the sum runs over counts `(k_0..k_m)` with
/// `k_0 + ... + k_m = h = n - level`, weighted by `h!/(k_0!...k_m!)`.
pub fn product_bounds_path_independent(
    params: &MarketParams,
    payoff: &Payoff,
    node: &NodeId,
    which: Bound,
) -> Result<f64> {
    let support = support_for(params, which, Modularity::Super)?;
    multinomial_sum(params, payoff, node, &support)
}

fn multinomial_sum(params: &MarketParams, payoff: &Payoff, node: &NodeId, support: &[(Column, f64)]) -> Result<f64> {
    if payoff.is_path_dependent() {
        return Err(Error::KindMismatch("multinomial aggregation needs a path-independent payoff".into()));
    }
    check_node(params, node)?;
    let m = params.num_assets();
    let n = params.num_steps();
    let h = n - node.level;
    let mut total = 0.0;
    let mut terminal = NodeId {
        level: n,
        up_counts: vec![0; m],
    };
    for counts in compositions(h, support.len()) {
        let weight = composition_weight(h, &counts, support.iter().map(|(_, w)| *w));
        if weight == 0.0 {
            continue;
        }
        for i in 0..m {
            let extra: u32 = counts
                .iter()
                .zip(support)
                .filter(|(_, (c, _))| c.is_up(i))
                .map(|(k, _)| *k as u32)
                .sum();
            terminal.up_counts[i] = node.up_counts[i] + extra;
        }
        total += weight * payoff.evaluate_terminal(params, &terminal)?;
    }
    Ok(total / params.growth_factor().powi(h as i32))
}

/// `h!/(k_0!...k_m!) * prod_j mass_j^k_j`.
fn composition_weight(h: usize, counts: &[usize], masses: impl Iterator<Item = f64>) -> f64 {
    let mut weight = multinomial(h, counts);
    for (k, mass) in counts.iter().zip(masses) {
        weight *= mass.powi(*k as i32);
    }
    weight
}

/// All `(k_0, ..., k_{parts-1})` of nonnegative integers summing to `total`,
/// in lexicographic order.
pub fn compositions(total: usize, parts: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if parts == 0 {
        None
    } else {
        let mut first = vec![0; parts];
        first[parts - 1] = total;
        Some(first)
    };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        // advance: find the rightmost position before the last that can grow
        let mut next = out.clone();
        let last = parts - 1;
        let mut advanced = false;
        for i in (0..last).rev() {
            let tail: usize = next[i + 1..].iter().sum();
            if tail > 0 {
                next[i] += 1;
                for slot in next[i + 1..].iter_mut() {
                    *slot = 0;
                }
                next[last] = tail - 1;
                advanced = true;
                break;
            }
        }
        current = advanced.then_some(next);
        Some(out)
    })
}

/// `h!/(k_0!...k_m!)` as a product of binomials.
pub fn multinomial(h: usize, counts: &[usize]) -> f64 {
    debug_assert_eq!(counts.iter().sum::<usize>(), h);
    let mut coef = 1.0;
    let mut running = 0;
    for &k in counts {
        running += k;
        coef *= binomial(running, k);
    }
    coef
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        match acc.checked_mul(n as u128 - k as u128 + i) {
            Some(v) => acc = v / i,
            None => {
                // fall back to floating point for very large coefficients
                return (1..=k).fold(1.0, |c, i| c * (n - k + i) as f64 / i as f64);
            }
        }
    }
    acc as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasketKind {
    Call,
    Put,
}

/// Basket call/put bounds by the explicit exponent formulas: with the chain
/// measure the asset at sorted rank `r` moves down `k_0 + ... + k_r` times
/// and up `k_{r+1} + ... + k_m` times; with the singleton measure asset `i`
/// moves up `k_i` times; with the two-asset endpoint `Q(t_min)` asset 1 moves
/// up `k_0 + k_1` and asset 2 `k_0 + k_2` times.
pub fn basket_bounds(
    params: &MarketParams,
    weights: &[f64],
    strike: f64,
    node: &NodeId,
    kind: BasketKind,
    which: Bound,
) -> Result<f64> {
    let payoff = match kind {
        BasketKind::Call => Payoff::BasketCall {
            weights: weights.to_vec(),
            strike,
        },
        BasketKind::Put => Payoff::BasketPut {
            weights: weights.to_vec(),
            strike,
        },
    };
    payoff.validate(params)?;
    check_node(params, node)?;
    let m = params.num_assets();
    let n = params.num_steps();
    let h = n - node.level;
    let w = risk_neutral_weights(params);
    let support = extremal_support(params, which)?;
    let masses: Vec<f64> = support.iter().map(|(_, q)| *q).collect();
    let two_asset_endpoint = which == Bound::Lower && m == 2 && w.sum() > 1.0;

    let mut rank = vec![0usize; m];
    for (r, &i) in w.order.iter().enumerate() {
        rank[i] = r;
    }

    let mut total = 0.0;
    for counts in compositions(h, m + 1) {
        let weight = composition_weight(h, &counts, masses.iter().copied());
        if weight == 0.0 {
            continue;
        }
        let ups = |i: usize| -> u32 {
            let extra: usize = match which {
                Bound::Upper => counts[rank[i] + 1..].iter().sum(),
                Bound::Lower if two_asset_endpoint => counts[0] + counts[1 + i],
                Bound::Lower => counts[i + 1],
            };
            node.up_counts[i] + extra as u32
        };
        let level = basket_level(weights, |i| price_from_counts(params.asset(i), n, ups(i)));
        let value = match kind {
            BasketKind::Call => (level - strike).max(0.0),
            BasketKind::Put => (strike - level).max(0.0),
        };
        total += weight * value;
    }
    Ok(total / params.growth_factor().powi(h as i32))
}

/// Where a closed form is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Location<'a> {
    Node(&'a NodeId),
    Prefix(&'a [Column]),
}

/// Bounds for a fibrewise submodular claim: the chain measure now gives the
/// lower bound and the singleton (or two-asset endpoint) measure the upper.
pub fn submodular_bounds(
    params: &MarketParams,
    payoff: &Payoff,
    at: Location<'_>,
    which: Bound,
    max_terms: u128,
) -> Result<f64> {
    let support = support_for(params, which, Modularity::Sub)?;
    match at {
        Location::Node(node) => multinomial_sum(params, payoff, node, &support),
        Location::Prefix(prefix) => path_sum(params, payoff, prefix, &support, max_terms),
    }
}

/// Closed-form bounds at every node, choosing measure roles from the
/// certificate. Fails for uncertified payoffs and when the lower measure is
/// undefined.
pub fn closed_form_surface(
    params: &MarketParams,
    payoff: &Payoff,
    certificate: &Certificate,
    max_terms: u128,
    max_tree_bits: u32,
) -> Result<BoundsSurface> {
    payoff.validate(params)?;
    let kind = match certificate {
        Certificate::Supermodular | Certificate::Modular => Modularity::Super,
        Certificate::Submodular => Modularity::Sub,
        other => {
            return Err(Error::InvalidPayoff(format!(
                "closed form needs a super- or submodular certificate, got {}",
                other.name()
            )))
        }
    };
    let upper_support = support_for(params, Bound::Upper, kind)?;
    let lower_support = support_for(params, Bound::Lower, kind)?;
    let to_measure = |s: &[(Column, f64)]| {
        let mut w = vec![0.0; params.num_columns()];
        for (c, q) in s {
            w[c.position()] += q;
        }
        Measure::from_exact(w)
    };
    let argmax = to_measure(&upper_support);
    let argmin = to_measure(&lower_support);

    let m = params.num_assets();
    let n = params.num_steps();
    let tree = payoff.is_path_dependent();
    if tree && (m * n) as u32 > max_tree_bits {
        return Err(Error::BudgetExceeded {
            what: "tree nodes",
            required: 1u128 << (m * n),
            cap: 1u128 << max_tree_bits,
        });
    }
    let mut levels = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let pairs: Vec<(f64, f64)> = if tree {
            (0..1usize << (m * k))
                .into_par_iter()
                .map(|idx| {
                    let prefix = prefix_from_index(idx, m, k);
                    Ok((
                        path_sum(params, payoff, &prefix, &lower_support, max_terms)?,
                        path_sum(params, payoff, &prefix, &upper_support, max_terms)?,
                    ))
                })
                .collect::<Result<_>>()?
        } else {
            level_nodes(m, k)
                .par_iter()
                .map(|node| {
                    Ok((
                        multinomial_sum(params, payoff, node, &lower_support)?,
                        multinomial_sum(params, payoff, node, &upper_support)?,
                    ))
                })
                .collect::<Result<_>>()?
        };
        let len = pairs.len();
        levels.push(LevelBounds {
            lower: pairs.iter().map(|p| p.0).collect(),
            upper: pairs.iter().map(|p| p.1).collect(),
            argmax: if k < n { vec![argmax.clone(); len] } else { Vec::new() },
            argmin: if k < n { vec![argmin.clone(); len] } else { Vec::new() },
        });
    }
    Ok(BoundsSurface {
        lattice: if tree { Lattice::Tree } else { Lattice::Recombinant },
        num_assets: m,
        levels,
    })
}
