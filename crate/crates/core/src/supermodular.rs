//! Supermodularity on the Boolean lattice of asset subsets and the two
//! extremal vertex measures of the single-step martingale polytope.
//!
//! A [`SetFunction`] is indexed by subset masks with asset `i` at bit `i`
//! (so `[f(∅), f({1}), f({2}), f({1,2})]` for two assets), which is a
//! different order from the column order used by [`Measure`].

use crate::error::{Error, Result};
use crate::market::{Column, MAX_ASSETS};
use crate::measures::Measure;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SetFunction {
    num_assets: usize,
    values: Vec<f64>,
}

impl SetFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() || len.trailing_zeros() as usize > MAX_ASSETS {
            return Err(Error::DimensionError(format!("set function length {len} is not 2^m")));
        }
        Ok(Self {
            num_assets: len.trailing_zeros() as usize,
            values,
        })
    }

    /// Reads a payoff vector given in column order.
    pub fn from_column_values(values: &[f64]) -> Result<Self> {
        let m = values.len().trailing_zeros() as usize;
        let f = SetFunction::new(values.to_vec())?;
        let values = (0..1u32 << m)
            .map(|mask| values[Column::from_subset(mask, m).position()])
            .collect();
        Ok(Self { values, ..f })
    }

    pub fn to_column_values(&self) -> Vec<f64> {
        let m = self.num_assets;
        let mut out = vec![0.0; self.values.len()];
        for (mask, v) in self.values.iter().enumerate() {
            out[Column::from_subset(mask as u32, m).position()] = *v;
        }
        out
    }

    /// `f(S) = sum_{i in S} c_i`.
    pub fn modular(coefficients: &[f64]) -> Result<Self> {
        let m = coefficients.len();
        Self::new(
            (0..1u32 << m)
                .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| coefficients[i]).sum())
                .collect(),
        )
    }

    pub fn num_assets(&self) -> usize {
        self.num_assets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    pub fn negated(&self) -> Self {
        Self {
            num_assets: self.num_assets,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

/// A pair `(S, T)` with `f(S ∪ T) + f(S ∩ T) < f(S) + f(T) - tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub s: u32,
    pub t: u32,
    /// `f(S ∪ T) + f(S ∩ T) - f(S) - f(T)`, negative.
    pub slack: f64,
}

pub fn is_supermodular(f: &SetFunction, tol: f64) -> bool {
    supermodular_violation(f, tol).is_none()
}

/// First violating pair in mask order; comparable pairs hold with equality
/// and are skipped. `O(4^m)`.
pub fn supermodular_violation(f: &SetFunction, tol: f64) -> Option<Violation> {
    violation_in(&f.values, tol)
}

fn violation_in(values: &[f64], tol: f64) -> Option<Violation> {
    let n = values.len() as u32;
    for s in 0..n {
        for t in (s + 1)..n {
            let (union, inter) = (s | t, s & t);
            if union == s || union == t {
                continue;
            }
            let slack = values[union as usize] + values[inter as usize] - values[s as usize] - values[t as usize];
            if slack < -tol {
                return Some(Violation { s, t, slack });
            }
        }
    }
    None
}

/// Location of a failing fibre: the step whose column varies, the fixed
/// columns elsewhere (`None` at `step`) and the violating subset pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreWitness {
    pub step: usize,
    pub fixed: Vec<Option<Column>>,
    pub violation: Violation,
}

impl std::fmt::Display for FibreWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fixed: Vec<String> = self
            .fixed
            .iter()
            .map(|c| c.map(|c| c.index().to_string()).unwrap_or_else(|| "*".into()))
            .collect();
        let set = |mask: u32| {
            let members: Vec<String> = (0..32).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", members.join(","))
        };
        write!(
            f,
            "step={} fixed={} S={} T={} slack={}",
            self.step + 1,
            fixed.join("-"),
            set(self.violation.s),
            set(self.violation.t),
            self.violation.slack
        )
    }
}

/// Searches every fibre of a path table (scenario-index order, `m` assets,
/// `n` steps) for a supermodularity violation. Steps are scanned from the
/// last to the first, fixings in scenario-index order.
pub fn fibrewise_violation(values: &[f64], m: usize, n: usize, tol: f64) -> Option<FibreWitness> {
    let n_cols = 1usize << m;
    debug_assert_eq!(values.len(), 1usize << (m * n));
    let mut fibre = vec![0.0; n_cols];
    for step in (0..n).rev() {
        let stride = 1usize << (m * (n - 1 - step));
        for others in 0..1usize << (m * (n - 1)) {
            // splice a zero digit in at `step`
            let low = others % stride;
            let high = others / stride;
            let base = high * stride * n_cols + low;
            for (mask, slot) in fibre.iter_mut().enumerate() {
                let pos = Column::from_subset(mask as u32, m).position();
                *slot = values[base + pos * stride];
            }
            if let Some(violation) = violation_in(&fibre, tol) {
                let path = crate::market::prefix_from_index(base, m, n);
                let fixed = path
                    .into_iter()
                    .enumerate()
                    .map(|(k, c)| if k == step { None } else { Some(c) })
                    .collect();
                return Some(FibreWitness { step, fixed, violation });
            }
        }
    }
    None
}

fn check_unit(b: &[f64]) -> Result<()> {
    if b.is_empty() || b.len() > MAX_ASSETS {
        return Err(Error::DimensionError(format!("{} weights", b.len())));
    }
    if let Some(&v) = b.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange(v));
    }
    Ok(())
}

fn check_sorted(b: &[f64]) -> Result<()> {
    check_unit(b)?;
    if b.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::NotSorted);
    }
    Ok(())
}

/// Chain columns `mu_0 ⊂ mu_1 ⊂ ... ⊂ mu_m` (`mu_i`: first `i` assets up)
/// with masses `b_i - b_{i+1}`, where `b_0 = 1` and `b_{m+1} = 0`.
fn chain(b: &[f64]) -> Vec<(Column, f64)> {
    let m = b.len();
    (0..=m)
        .map(|i| {
            let hi = if i == 0 { 1.0 } else { b[i - 1] };
            let lo = if i == m { 0.0 } else { b[i] };
            (Column::from_subset(((1u64 << i) - 1) as u32, m), hi - lo)
        })
        .collect()
}

fn measure_from_support(m: usize, support: &[(Column, f64)]) -> Measure {
    let mut weights = vec![0.0; 1 << m];
    for (c, w) in support {
        weights[c.position()] += w;
    }
    Measure::from_exact(weights)
}

/// Upper supermodular vertex measure for `b` sorted non-increasing.
pub fn upper_vertex_measure(b: &[f64]) -> Result<Measure> {
    check_sorted(b)?;
    Ok(measure_from_support(b.len(), &chain(b)))
}

/// Upper vertex measure for arbitrary `b`: the chain follows the stable
/// non-increasing order of `b`. Returned as `(column, mass)` pairs,
/// `mu_0` first.
pub fn upper_vertex_support(b: &[f64], order: &[usize]) -> Result<Vec<(Column, f64)>> {
    let sorted: Vec<f64> = order.iter().map(|&i| b[i]).collect();
    check_sorted(&sorted)?;
    let m = b.len();
    Ok(chain(&sorted)
        .into_iter()
        .map(|(c, w)| {
            // bit r of the sorted chain belongs to asset order[r]
            let mask = (0..m).filter(|&r| c.is_up(r)).fold(0u32, |acc, r| acc | 1 << order[r]);
            (Column::from_subset(mask, m), w)
        })
        .collect())
}

/// Lower supermodular vertex measure: mass `b_i` on the singleton `{i}` and
/// `1 - sum b` on the empty column. Requires `sum b <= 1`.
pub fn lower_vertex_measure(b: &[f64]) -> Result<Measure> {
    Ok(measure_from_support(b.len(), &lower_vertex_support(b)?))
}

/// `(column, mass)` pairs of the lower vertex measure, `nu_0` (all down) first.
pub fn lower_vertex_support(b: &[f64]) -> Result<Vec<(Column, f64)>> {
    check_unit(b)?;
    let m = b.len();
    let sum: f64 = b.iter().sum();
    if sum > 1.0 + 1e-12 {
        return Err(Error::MassOverflow { sum });
    }
    let mut support = vec![(Column::all_down(m), (1.0 - sum).max(0.0))];
    support.extend(b.iter().enumerate().map(|(i, &bi)| (Column::from_subset(1 << i, m), bi)));
    Ok(support)
}

/// Lovász extension of `f` at sorted `b`: `sum_i (b_i - b_{i+1}) f(mu_i)`,
/// accumulated in column order so it matches `<f, q*>` term for term.
pub fn lovasz_value(f: &SetFunction, b: &[f64]) -> Result<f64> {
    check_sorted(b)?;
    if b.len() != f.num_assets {
        return Err(Error::DimensionMismatch {
            expected: f.num_assets,
            found: b.len(),
        });
    }
    let mut terms: Vec<(usize, f64)> = chain(b)
        .into_iter()
        .map(|(c, w)| (c.position(), w * f.get(c.subset_mask())))
        .collect();
    terms.sort_by_key(|(p, _)| *p);
    Ok(terms.into_iter().map(|(_, t)| t).sum())
}
