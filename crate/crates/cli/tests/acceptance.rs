//! Acceptance suite. Every criterion runs in order and prints one
//! `PASS`/`FAIL` line; the test fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::sync::mpsc;
use std::time::{Duration, Instant};

use nabounds_cli::{cmd_vertices, RunConfig};
use nabounds_core::linprog::enumerate_vertices;
use nabounds_core::market::{columns, enumerate_level, prefix_from_index, risk_neutral_weights, Asset, Column, NodeId};
use nabounds_core::measures::{
    conditional_expectation_at_node, conditional_expectation_at_prefix, is_martingale, martingale_constraints,
};
use nabounds_core::payoffs::{certify, scenario_values};
use nabounds_core::pricer::{
    backward_induction_bounds, extremal_measure, product_bounds_path_dependent, product_bounds_path_independent,
    single_step_bounds, two_asset_interval, DEFAULT_MAX_TERMS,
};
use nabounds_core::supermodular::{is_supermodular, lower_vertex_measure, upper_vertex_measure};
use nabounds_core::{Bound, Certificate, InductionOptions, MarketParams, Measure, Payoff};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spread_market(n: usize) -> MarketParams {
    MarketParams::new(vec![Asset::new(100.0, 1.2, 0.8), Asset::new(90.0, 1.15, 0.9)], n, 1.02).unwrap()
}

fn lower_defined(p: &MarketParams) -> bool {
    p.num_assets() == 2 || risk_neutral_weights(p).sum() <= 1.0
}

fn spread_regression() -> Outcome {
    let params = spread_market(2);
    let x = Payoff::Spread {
        weights: vec![0.5, 0.5],
        lower_strike: 100.0,
        upper_strike: 110.0,
    };
    let mut worst: f64 = 0.0;
    let cases = [
        (Column::all_up(2), [10.0, 10.0, 7.5125, 0.0]),
        (Column::from_bits(&[true, false]), [10.0, 8.45, 0.0, 0.0]),
    ];
    for (first, expected) in cases {
        for (col, e) in columns(2).zip(expected) {
            let v = x.evaluate_path(&params, &[first, col]).unwrap();
            worst = worst.max((v - e).abs());
        }
    }
    let cert = certify(&x, &params, 1e-9, 20);
    let neither = matches!(cert, Certificate::Neither(_));
    outcome(
        worst <= 1e-12 && neither,
        format!("max fibre error {worst:.1e}, certificate {}", cert.name()),
    )
}

fn two_asset_closed_form() -> Outcome {
    let mut rng = common::rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let params = common::random_market(&mut rng, 2, 1);
        let iv = two_asset_interval(&params).unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..20.0)).collect();
        let r = params.growth_factor();
        let a = iv.at_min.expectation(&x) / r;
        let b = iv.at_max.expectation(&x) / r;
        let lp = single_step_bounds(&params, &x).unwrap();
        worst = worst.max((lp.upper - a.max(b)).abs()).max((lp.lower - a.min(b)).abs());
        for q in [&iv.at_min, &iv.at_max] {
            if !is_martingale(q, &params, 1e-9).unwrap() {
                return outcome(false, "interval endpoint is not a martingale measure");
            }
        }
    }
    outcome(worst <= 1e-9, format!("200 markets, max endpoint error {worst:.1e}"))
}

fn up_moment(q: &Measure, i: usize) -> f64 {
    columns(q.num_assets()).filter(|c| c.is_up(i)).map(|c| q.mass(c)).sum()
}

fn vertex_moments() -> Outcome {
    let mut rng = common::rng(3);
    let mut worst: f64 = 0.0;
    let mut lower_checked = 0;
    for trial in 0..500 {
        let m = rng.gen_range(1..=8);
        let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.99)).collect();
        if trial % 2 == 0 {
            // push half of the draws into the sum b <= 1 regime
            let s: f64 = b.iter().sum::<f64>() * rng.gen_range(1.0..1.5);
            if s > 1.0 {
                b.iter_mut().for_each(|x| *x /= s);
            }
        }
        b.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let params = common::market_with_weights(&mut rng, &b, 1);
        // weights as the market reproduces them
        let b = risk_neutral_weights(&params).b;
        let upper = upper_vertex_measure(&b).unwrap();
        for (i, bi) in b.iter().enumerate() {
            worst = worst.max((up_moment(&upper, i) - bi).abs());
        }
        if !is_martingale(&upper, &params, 1e-9).unwrap() {
            return outcome(false, format!("q* not a martingale at trial {trial}"));
        }
        if b.iter().sum::<f64>() <= 1.0 {
            let lower = lower_vertex_measure(&b).unwrap();
            for (i, bi) in b.iter().enumerate() {
                worst = worst.max((up_moment(&lower, i) - bi).abs());
            }
            if !is_martingale(&lower, &params, 1e-9).unwrap() {
                return outcome(false, format!("q_* not a martingale at trial {trial}"));
            }
            lower_checked += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!("500 vectors ({lower_checked} with sum b <= 1), max moment error {worst:.1e}"),
    )
}

fn catalog(rng: &mut impl Rng, params: &MarketParams) -> Vec<Payoff> {
    let m = params.num_assets();
    let n = params.num_steps();
    let w = common::random_weights(rng, m);
    let k = common::random_strike(rng, params, &w);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| common::random_weights(rng, m)).collect();
    vec![
        Payoff::BasketCall {
            weights: w.clone(),
            strike: k,
        },
        Payoff::BasketPut { weights: w, strike: k },
        Payoff::AsianArithCall { weights: rows, strike: k },
    ]
}

fn route_agreement() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for m in [2, 3] {
        for n in 1..=4 {
            for draw in 0..3 {
                let params = if draw == 0 && m == 3 {
                    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..0.33)).collect();
                    common::market_with_weights(&mut rng, &b, n)
                } else {
                    common::random_market(&mut rng, m, n)
                };
                let with_lower = lower_defined(&params);
                for x in catalog(&mut rng, &params) {
                    let surface = backward_induction_bounds(&params, &x, &InductionOptions::default()).unwrap();
                    for level in 0..=n {
                        if x.is_path_dependent() {
                            for idx in 0..1usize << (m * level) {
                                let prefix = prefix_from_index(idx, m, level);
                                let lp = surface.at_prefix(&prefix).unwrap();
                                let up = product_bounds_path_dependent(&params, &x, &prefix, Bound::Upper, DEFAULT_MAX_TERMS)
                                    .unwrap();
                                worst = worst.max((up - lp.upper).abs());
                                compared += 1;
                                if with_lower {
                                    let lo = product_bounds_path_dependent(&params, &x, &prefix, Bound::Lower, DEFAULT_MAX_TERMS)
                                        .unwrap();
                                    worst = worst.max((lo - lp.lower).abs());
                                    compared += 1;
                                }
                            }
                        } else {
                            for node in enumerate_level(&params, level).unwrap() {
                                let lp = surface.at_node(&node).unwrap();
                                let up = product_bounds_path_independent(&params, &x, &node, Bound::Upper).unwrap();
                                worst = worst.max((up - lp.upper).abs());
                                compared += 1;
                                if with_lower {
                                    let lo = product_bounds_path_independent(&params, &x, &node, Bound::Lower).unwrap();
                                    worst = worst.max((lo - lp.lower).abs());
                                    compared += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("{compared} node bounds compared, max |closed - lp| {worst:.1e}"))
}

fn supermodular_vertex_optimality() -> Outcome {
    let mut rng = common::rng(5);
    let mut functions = 0;
    let mut vertices_seen = 0usize;
    for m in 1..=5 {
        for _ in 0..4 {
            let params = common::random_sorted_market(&mut rng, m);
            let b = risk_neutral_weights(&params).b;
            let (a, d) = martingale_constraints(&params);
            let vertices = enumerate_vertices(&a, &d, 1e-10).unwrap();
            let upper = upper_vertex_measure(&b).unwrap();
            let lower = lower_vertex_measure(&b).ok();
            for _ in 0..10 {
                let f = common::random_supermodular(&mut rng, m);
                if !is_supermodular(&f, 1e-12) {
                    return outcome(false, "generator produced a non-supermodular function");
                }
                let x = f.to_column_values();
                let hi = upper.expectation(&x);
                let lo = lower.as_ref().map(|q| q.expectation(&x));
                for v in &vertices {
                    let e: f64 = v.iter().zip(&x).map(|(p, x)| p * x).sum();
                    if hi < e - 1e-9 || lo.is_some_and(|lo| lo > e + 1e-9) {
                        return outcome(false, format!("vertex beats an extremal measure (m = {m})"));
                    }
                }
                functions += 1;
                vertices_seen += vertices.len();
            }
        }
    }
    outcome(true, format!("{functions} functions, {vertices_seen} vertex comparisons"))
}

fn global_measure_consistency() -> Outcome {
    let mut rng = common::rng(6);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for m in 1..=3 {
        for n in 1..=3 {
            let params = common::random_market(&mut rng, m, n);
            let upper = extremal_measure(&params, Bound::Upper).unwrap();
            let lower = extremal_measure(&params, Bound::Lower).ok();
            for x in catalog(&mut rng, &params) {
                if !certify(&x, &params, 1e-9, 20).is_supermodular() {
                    return outcome(false, "catalog payoff not certified");
                }
                let surface = backward_induction_bounds(&params, &x, &InductionOptions::default()).unwrap();
                for level in 0..=n {
                    let disc = params.growth_factor().powi((n - level) as i32);
                    let mut check = |e: f64, bound: f64| {
                        worst = worst.max((e / disc - bound).abs());
                        compared += 1;
                    };
                    if x.is_path_dependent() {
                        for idx in 0..1usize << (m * level) {
                            let prefix = prefix_from_index(idx, m, level);
                            let lp = surface.at_prefix(&prefix).unwrap();
                            check(conditional_expectation_at_prefix(&params, &x, &prefix, &upper, 24).unwrap(), lp.upper);
                            if let Some(q) = &lower {
                                check(conditional_expectation_at_prefix(&params, &x, &prefix, q, 24).unwrap(), lp.lower);
                            }
                        }
                    } else {
                        for node in enumerate_level(&params, level).unwrap() {
                            let lp = surface.at_node(&node).unwrap();
                            check(conditional_expectation_at_node(&params, &x, &node, &upper).unwrap(), lp.upper);
                            if let Some(q) = &lower {
                                check(conditional_expectation_at_node(&params, &x, &node, q).unwrap(), lp.lower);
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("{compared} node bounds, max error {worst:.1e}"))
}

fn brute_force_oracle() -> Outcome {
    let mut rng = common::rng(7);
    let mut worst: f64 = 0.0;
    let (mut by_vertices, mut by_simplex) = (Vec::new(), Vec::new());
    for m in 1..=8usize {
        for n in 1..=8 / m {
            let params = common::random_market(&mut rng, m, n);
            for x in catalog(&mut rng, &params).into_iter().take(if m * n <= 4 { 3 } else { 1 }) {
                let values = scenario_values(&x, &params, 24).unwrap();
                let (lo, hi, route) = common::global_bounds(&params, &values, 50_000).unwrap();
                let root = backward_induction_bounds(&params, &x, &InductionOptions::default()).unwrap().root();
                worst = worst.max((lo - root.lower).abs()).max((hi - root.upper).abs());
                let tag = format!("{m}x{n}");
                match route {
                    common::OracleRoute::Vertices => by_vertices.push(tag),
                    common::OracleRoute::Simplex => by_simplex.push(tag),
                }
            }
        }
    }
    by_vertices.dedup();
    by_simplex.dedup();
    outcome(
        worst <= 1e-8,
        format!(
            "max root error {worst:.1e}; vertex enumeration for {}; global simplex for {}",
            by_vertices.join(" "),
            by_simplex.join(" ")
        ),
    )
}

fn multinomial_normalization() -> Outcome {
    let mut rng = common::rng(8);
    let mut worst: f64 = 0.0;
    let mut dyadic_exact = true;
    let mut runs = 0;
    for m in 1..=4usize {
        for h in 0..=10usize {
            for dyadic in [true, false] {
                let b: Vec<f64> = if dyadic {
                    // multiples of 1/16 with sum <= 1 so both measures apply
                    (0..m).map(|_| rng.gen_range(1..=4) as f64 / 16.0).collect()
                } else {
                    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.99)).collect();
                    let s: f64 = raw.iter().sum::<f64>().max(1.0);
                    raw.iter().map(|x| x / s).collect()
                };
                // R = 1 so the returned value is the undiscounted sum
                let assets: Vec<Asset> = b.iter().map(|&bi| Asset::new(1.0, 1.0 + (1.0 - bi) / bi * 0.25, 0.75)).collect();
                let params = MarketParams::new(assets, h.max(1), 1.0).unwrap();
                let b_market = risk_neutral_weights(&params).b;
                let node = if h == 0 {
                    NodeId::new(1, vec![0; m]).unwrap()
                } else {
                    NodeId::root(m)
                };
                let ones = Payoff::TableTerminal {
                    values: vec![1.0; (params.num_steps() + 1).pow(m as u32)],
                };
                for which in [Bound::Upper, Bound::Lower] {
                    let v = product_bounds_path_independent(&params, &ones, &node, which).unwrap();
                    worst = worst.max((v - 1.0).abs());
                    let exact_b = b_market.iter().zip(&b).all(|(x, y)| x == y);
                    if dyadic && exact_b && v != 1.0 {
                        dyadic_exact = false;
                    }
                    runs += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-12 && dyadic_exact,
        format!("{runs} sums, max |sum - 1| {worst:.1e}, dyadic weights exact: {dyadic_exact}"),
    )
}

fn vertex_config(m: usize) -> RunConfig {
    let assets: Vec<String> = (0..m)
        .map(|i| {
            let up = 1.1 + 0.02 * i as f64;
            let down = 0.9 - 0.01 * i as f64;
            format!(r#"{{"initial_price": 100, "up_ratio": {up}, "down_ratio": {down}}}"#)
        })
        .collect();
    let weights = vec![format!("{}", 1.0 / m as f64); m];
    let json = format!(
        r#"{{"market": {{"growth_factor": 1.01, "num_steps": 1, "assets": [{}]}},
            "payoff": {{"kind": "basket_call", "weights": [{}], "strike": 100}}}}"#,
        assets.join(","),
        weights.join(",")
    );
    RunConfig::from_json(&json, None).unwrap()
}

fn scale_vertices() -> Outcome {
    let cfg = vertex_config(12);
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(cmd_vertices(&cfg));
    });
    match rx.recv_timeout(Duration::from_secs(60)) {
        Ok(Ok(csv)) => outcome(true, format!("m = 12: {} vertices", csv.lines().count() - 1)),
        Ok(Err(e)) => outcome(false, format!("m = 12: {e}")),
        Err(_) => outcome(false, "m = 12: vertex enumeration still running at the 60 s deadline"),
    }
}

fn scale_induction() -> Outcome {
    let mut rng = common::rng(9);
    let params = common::random_market(&mut rng, 5, 8);
    let w = common::random_weights(&mut rng, 5);
    let x = Payoff::BasketCall {
        strike: common::random_strike(&mut rng, &params, &w),
        weights: w,
    };
    let opts = InductionOptions {
        keep_measures: false,
        ..Default::default()
    };
    match backward_induction_bounds(&params, &x, &opts) {
        Ok(s) => {
            let nodes: usize = (0..=8).map(|k| s.level(k).len()).sum();
            let root = s.root();
            outcome(root.lower <= root.upper, format!("m = 5, n = 8: {nodes} nodes"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, &'static str, Option<f64>, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("1", "spread fibres and certificate", Some(1.0), spread_regression),
        ("2", "two-asset interval vs single-step LP", Some(5.0), two_asset_closed_form),
        ("3", "vertex-measure moments", Some(5.0), vertex_moments),
        ("4", "closed form vs LP backward induction", Some(60.0), route_agreement),
        ("5", "supermodular vertex optimality", Some(30.0), supermodular_vertex_optimality),
        ("6", "global extremal measure reproduces node bounds", None, global_measure_consistency),
        ("7", "global brute-force oracle vs backward induction", None, brute_force_oracle),
        ("8", "multinomial normalization", None, multinomial_normalization),
        ("9b", "LP backward induction, m = 5, n = 8", Some(60.0), scale_induction),
        ("9a", "vertex listing, m = 12, n = 1", Some(60.0), scale_vertices),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l);
        let pass = out.pass && in_time;
        let budget = limit.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
        println!(
            "criterion {id:<3} {} {name}: {} [{secs:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
