#![allow(dead_code)]

use nabounds_core::linprog::{enumerate_vertices_capped, solve, LpProblem, Sense};
use nabounds_core::market::{prefix_from_index, Asset, MarketParams};
use nabounds_core::Result;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Admissible market with `D_i < R < U_i` for every asset.
pub fn random_market(rng: &mut impl Rng, m: usize, n: usize) -> MarketParams {
    let growth = rng.gen_range(1.0..1.05);
    let assets = (0..m)
        .map(|_| {
            let down = rng.gen_range(0.6..0.97);
            let up = rng.gen_range(1.07..1.45);
            Asset::new(rng.gen_range(50.0..150.0), up, down)
        })
        .collect();
    MarketParams::new(assets, n, growth).unwrap()
}

/// Random point of the simplex.
pub fn random_weights(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Strike near the forward basket level.
pub fn random_strike(rng: &mut impl Rng, params: &MarketParams, weights: &[f64]) -> f64 {
    let spot: f64 = weights
        .iter()
        .zip(params.assets())
        .map(|(a, s)| a * s.initial_price)
        .sum();
    spot * rng.gen_range(0.8..1.2)
}

/// Martingale conditions on the joint law of all `2^(mn)` scenarios: for
/// every prefix of length `k < n` and every asset,
/// `sum_{w through prefix} (psi_i(w^{k+1}) - R) P(w) = 0`, plus total mass 1.
pub fn global_martingale_system(params: &MarketParams) -> (DMatrix<f64>, Vec<f64>) {
    let m = params.num_assets();
    let n = params.num_steps();
    let r = params.growth_factor();
    let scenarios = 1usize << (m * n);
    let prefixes: usize = (0..n).map(|k| 1usize << (m * k)).sum();
    let rows = prefixes * m + 1;
    let mut a = DMatrix::zeros(rows, scenarios);
    let mut row = 0;
    for k in 0..n {
        let block = 1usize << (m * (n - k));
        for p in 0..1usize << (m * k) {
            for i in 0..m {
                for w in p * block..(p + 1) * block {
                    let col = prefix_from_index(w, m, n)[k];
                    let asset = params.asset(i);
                    let ratio = if col.is_up(i) { asset.up_ratio } else { asset.down_ratio };
                    a[(row, w)] = ratio - r;
                }
                row += 1;
            }
        }
    }
    for w in 0..scenarios {
        a[(row, w)] = 1.0;
    }
    let mut d = vec![0.0; rows];
    d[rows - 1] = 1.0;
    (a, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRoute {
    Vertices,
    Simplex,
}

/// Root bounds `R^-n (min, max) E_P(X)` over every martingale measure on the
/// scenario space. Enumerates the vertices of the global polytope when that
/// fits in `max_bases`, otherwise optimizes the same system directly.
pub fn global_bounds(params: &MarketParams, scenario_values: &[f64], max_bases: usize) -> Result<(f64, f64, OracleRoute)> {
    let (a, d) = global_martingale_system(params);
    let disc = params.growth_factor().powi(params.num_steps() as i32);
    match enumerate_vertices_capped(&a, &d, 1e-10, max_bases) {
        Ok(vertices) => {
            let values = vertices
                .iter()
                .map(|v| v.iter().zip(scenario_values).map(|(p, x)| p * x).sum::<f64>());
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            Ok((lo / disc, hi / disc, OracleRoute::Vertices))
        }
        Err(nabounds_core::Error::BudgetExceeded { .. }) => {
            let hi = solve(&LpProblem::new(scenario_values.to_vec(), a.clone(), d.clone(), Sense::Maximize)?, 1e-10)?;
            let lo = solve(&LpProblem::new(scenario_values.to_vec(), a, d, Sense::Minimize)?, 1e-10)?;
            Ok((lo.value / disc, hi.value / disc, OracleRoute::Simplex))
        }
        Err(e) => Err(e),
    }
}

/// Random supermodular set function on `m` assets: a nonnegative combination
/// of monomials `prod_{i in A} x_i` (indicators of `A subset S`) plus a
/// random modular part.
pub fn random_supermodular(rng: &mut impl Rng, m: usize) -> nabounds_core::SetFunction {
    let size = 1usize << m;
    let mut values = vec![0.0; size];
    let terms = rng.gen_range(1..=2 * m);
    for _ in 0..terms {
        let a = rng.gen_range(1..size) as u32;
        let c = rng.gen_range(0.0..3.0);
        for (s, v) in values.iter_mut().enumerate() {
            if s as u32 & a == a {
                *v += c;
            }
        }
    }
    let modular: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let offset = rng.gen_range(-1.0..1.0);
    for (s, v) in values.iter_mut().enumerate() {
        *v += offset + (0..m).filter(|i| s >> i & 1 == 1).map(|i| modular[i]).sum::<f64>();
    }
    nabounds_core::SetFunction::new(values).unwrap()
}

/// Single-step market whose risk-neutral weights are already sorted.
pub fn random_sorted_market(rng: &mut impl Rng, m: usize) -> MarketParams {
    let p = random_market(rng, m, 1);
    let w = nabounds_core::market::risk_neutral_weights(&p);
    let assets = w.order.iter().map(|&i| *p.asset(i)).collect();
    MarketParams::new(assets, 1, p.growth_factor()).unwrap()
}

/// Random martingale measure: a random convex combination of polytope vertices.
pub fn random_martingale(rng: &mut impl Rng, params: &MarketParams) -> nabounds_core::Measure {
    let (a, d) = nabounds_core::measures::martingale_constraints(params);
    let vertices = nabounds_core::linprog::enumerate_vertices(&a, &d, 1e-10).unwrap();
    let lambda = random_weights(rng, vertices.len());
    let mut w = vec![0.0; params.num_columns()];
    for (v, l) in vertices.iter().zip(&lambda) {
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi += l * vi;
        }
    }
    nabounds_core::Measure::new(w).unwrap()
}

/// Market whose single-step risk-neutral weights are the given `b`.
pub fn market_with_weights(rng: &mut impl Rng, b: &[f64], n: usize) -> MarketParams {
    let growth = rng.gen_range(1.0..1.05);
    let assets = b
        .iter()
        .map(|&bi| {
            let down = growth - rng.gen_range(0.05..0.3);
            let up = down + (growth - down) / bi;
            Asset::new(rng.gen_range(50.0..150.0), up, down)
        })
        .collect();
    MarketParams::new(assets, n, growth).unwrap()
}
