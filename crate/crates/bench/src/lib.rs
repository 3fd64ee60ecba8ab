//! Deterministic fixtures shared by the benchmarks.

use nabounds_core::{Asset, MarketParams, Payoff};

/// `m` assets with spread-out volatilities and growth 1.02; the risk-neutral
/// up-probabilities sum to at most 1 for `m <= 5`.
pub fn market(m: usize, n: usize) -> MarketParams {
    let assets = (0..m)
        .map(|i| {
            let s = i as f64 / m.max(1) as f64;
            Asset::new(80.0 + 40.0 * s, 1.25 + 0.2 * s, 0.98 - 0.1 * s)
        })
        .collect();
    MarketParams::new(assets, n, 1.02).expect("fixture market is admissible")
}

pub fn equal_weights(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

pub fn spot(params: &MarketParams, weights: &[f64]) -> f64 {
    weights.iter().zip(params.assets()).map(|(w, a)| w * a.initial_price).sum()
}

/// At-the-money basket call on [`market`].
pub fn basket_call(params: &MarketParams) -> Payoff {
    let weights = equal_weights(params.num_assets());
    let strike = spot(params, &weights);
    Payoff::BasketCall { weights, strike }
}

/// Arithmetic Asian call with equal weights at every date.
pub fn asian_call(params: &MarketParams) -> Payoff {
    let m = params.num_assets();
    let weights = vec![equal_weights(m); params.num_steps()];
    let strike = params.assets().iter().map(|a| a.initial_price).sum::<f64>() / m as f64;
    Payoff::AsianArithCall { weights, strike }
}

/// Call spread with strikes 5% either side of the spot basket.
pub fn spread(params: &MarketParams) -> Payoff {
    let weights = equal_weights(params.num_assets());
    let spot = spot(params, &weights);
    Payoff::Spread {
        weights,
        lower_strike: 0.95 * spot,
        upper_strike: 1.05 * spot,
    }
}
