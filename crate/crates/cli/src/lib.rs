//! Command-line front end: JSON run configurations in, CSV bound surfaces,
//! certificates and vertex lists out.

mod config;
pub mod format;

use nabounds_core::linprog::enumerate_vertices_capped;
use nabounds_core::market::columns;
use nabounds_core::measures::martingale_constraints;
use nabounds_core::payoffs::certify;
use nabounds_core::pricer::{
    backward_induction_bounds, closed_form_surface, extremal_measure, product_bounds_path_dependent,
    product_bounds_path_independent, submodular_bounds, Location,
};
use nabounds_core::{Bound, BoundsSurface, Certificate, Error, InductionOptions, NodeId};

pub use config::{prefix_label, Budget, Method, Nodes, RunConfig};
use format::num;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("certification failure: {0}")]
    Certification(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Certification(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// One output row: bounds at a lattice node (and, on the full tree, a path).
#[derive(Debug, Clone, PartialEq)]
struct Row {
    level: usize,
    up_counts: String,
    prefix: Option<String>,
    lower: f64,
    upper: f64,
}

fn surface_rows(surface: &BoundsSurface, nodes: Nodes) -> Vec<Row> {
    let last = match nodes {
        Nodes::Root => 0,
        Nodes::All => surface.num_steps(),
    };
    let mut rows = Vec::new();
    for k in 0..=last {
        let level = surface.level(k);
        for idx in 0..level.len() {
            let (node, path) = surface.node_of(k, idx);
            rows.push(Row {
                level: k,
                up_counts: node.label(),
                prefix: path.map(|p| prefix_label(&p)),
                lower: level.lower[idx],
                upper: level.upper[idx],
            });
        }
    }
    rows
}

fn lp_rows(cfg: &RunConfig, nodes: Nodes) -> Result<Vec<Row>, CliError> {
    let opts = InductionOptions {
        tol: cfg.tolerance,
        max_tree_bits: cfg.budget.max_tree_bits,
        full_tree: false,
        keep_measures: false,
    };
    let surface = backward_induction_bounds(&cfg.market, &cfg.payoff, &opts)?;
    Ok(surface_rows(&surface, nodes))
}

fn closed_rows(cfg: &RunConfig, certificate: &Certificate, nodes: Nodes) -> Result<Vec<Row>, CliError> {
    let max_terms = cfg.budget.max_terms as u128;
    match nodes {
        Nodes::All => {
            let surface = closed_form_surface(
                &cfg.market,
                &cfg.payoff,
                certificate,
                max_terms,
                cfg.budget.max_tree_bits,
            )?;
            Ok(surface_rows(&surface, nodes))
        }
        Nodes::Root => {
            let m = cfg.market.num_assets();
            let root = NodeId::root(m);
            let path_dependent = cfg.payoff.is_path_dependent();
            let bound = |which: Bound| -> Result<f64, Error> {
                if certificate.is_supermodular() {
                    if path_dependent {
                        product_bounds_path_dependent(&cfg.market, &cfg.payoff, &[], which, max_terms)
                    } else {
                        product_bounds_path_independent(&cfg.market, &cfg.payoff, &root, which)
                    }
                } else {
                    let at = if path_dependent {
                        Location::Prefix(&[])
                    } else {
                        Location::Node(&root)
                    };
                    submodular_bounds(&cfg.market, &cfg.payoff, at, which, max_terms)
                }
            };
            Ok(vec![Row {
                level: 0,
                up_counts: root.label(),
                prefix: path_dependent.then(String::new),
                lower: bound(Bound::Lower)?,
                upper: bound(Bound::Upper)?,
            }])
        }
    }
}

/// Certificate check and closed-form evaluation; failures here are
/// certification failures unless a budget ran out.
fn closed_route(cfg: &RunConfig, nodes: Nodes) -> Result<Vec<Row>, CliError> {
    let certificate = certify(&cfg.payoff, &cfg.market, cfg.tolerance, cfg.budget.max_fibre_bits);
    if !(certificate.is_supermodular() || certificate.is_submodular()) {
        let detail = match &certificate {
            Certificate::Neither(w) => format!("payoff is {} ({})", certificate.name(), witness_line(w)),
            other => format!("payoff is {}", other.name()),
        };
        return Err(CliError::Certification(detail));
    }
    closed_rows(cfg, &certificate, nodes).map_err(|e| match e {
        CliError::Config(msg) => CliError::Certification(format!("closed form unavailable: {msg}")),
        other => other,
    })
}

fn witness_line(w: &nabounds_core::FibreWitness) -> String {
    let fixed: Vec<String> = w
        .fixed
        .iter()
        .map(|c| c.map(|c| c.index().to_string()).unwrap_or_else(|| "*".into()))
        .collect();
    let set = |mask: u32| {
        let members: Vec<String> = (0..32).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", members.join(" "))
    };
    format!(
        "step={} fixed={} S={} T={} slack={}",
        w.step + 1,
        fixed.join("-"),
        set(w.violation.s),
        set(w.violation.t),
        num(w.violation.slack)
    )
}

fn write_csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    out.write_record(header).expect("in-memory write");
    for r in rows {
        out.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(out.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Bound surface as CSV. `method`/`nodes` override the config values.
pub fn cmd_price(cfg: &RunConfig, method: Option<Method>, nodes: Option<Nodes>) -> Result<String, CliError> {
    let method = method.unwrap_or(cfg.method);
    let nodes = nodes.unwrap_or(cfg.nodes);
    let tree = cfg.payoff.is_path_dependent();
    let mut header: Vec<String> = ["level", "up_counts", "c_min", "c_max", "method_used"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if tree {
        header.push("prefix".into());
    }
    let base = |r: &Row, used: &str| {
        let mut v = vec![r.level.to_string(), r.up_counts.clone(), num(r.lower), num(r.upper), used.to_string()];
        if let Some(p) = &r.prefix {
            v.push(p.clone());
        }
        v
    };

    let (rows, used) = match method {
        Method::Lp => (lp_rows(cfg, nodes)?, "lp"),
        Method::Closed => (closed_route(cfg, nodes)?, "closed"),
        Method::Auto => match closed_route(cfg, nodes) {
            Ok(rows) => (rows, "closed"),
            Err(CliError::Budget(_)) | Err(CliError::Certification(_)) => (lp_rows(cfg, nodes)?, "lp"),
            Err(e) => return Err(e),
        },
        Method::Both => {
            let lp = lp_rows(cfg, nodes)?;
            let closed = closed_route(cfg, nodes)?;
            header.extend(["c_min_closed", "c_max_closed", "abs_diff"].iter().map(|s| s.to_string()));
            let body = lp.iter().zip(&closed).map(|(a, b)| {
                let mut v = base(a, "both");
                let diff = (a.lower - b.lower).abs().max((a.upper - b.upper).abs());
                v.extend([num(b.lower), num(b.upper), num(diff)]);
                v
            });
            return Ok(write_csv(&header, body.collect::<Vec<_>>()));
        }
    };
    Ok(write_csv(&header, rows.iter().map(|r| base(r, used))))
}

/// Certificate report: a `certificate:` line, plus a `witness:` line when the
/// payoff is neither super- nor submodular.
pub fn cmd_certify(cfg: &RunConfig) -> Result<String, CliError> {
    let certificate = certify(&cfg.payoff, &cfg.market, cfg.tolerance, cfg.budget.max_fibre_bits);
    let mut out = format!("certificate: {}\n", certificate.name());
    match &certificate {
        Certificate::Neither(w) => {
            out.push_str(&format!("witness: {}\n", witness_line(w)));
        }
        Certificate::Unknown { required_bits, cap_bits } => {
            out.push_str(&format!("reason: m*n = {required_bits} exceeds fibre check cap {cap_bits}\n"));
        }
        _ => {}
    }
    Ok(out)
}

/// Vertices of the single-step martingale polytope as CSV, one row per
/// vertex, with flags marking the upper and lower extremal measures.
pub fn cmd_vertices(cfg: &RunConfig) -> Result<String, CliError> {
    let market = cfg.market.with_steps(1)?;
    let (a, d) = martingale_constraints(&market);
    let vertices = enumerate_vertices_capped(&a, &d, cfg.tolerance, cfg.budget.max_bases)?;
    let upper = extremal_measure(&market, Bound::Upper)?;
    let lower = extremal_measure(&market, Bound::Lower).ok();
    let flag_tol = cfg.tolerance.max(1e-9);
    let close = |v: &[f64], q: &[f64]| v.iter().zip(q).all(|(x, y)| (x - y).abs() <= flag_tol);

    let mut header = vec!["vertex".to_string()];
    header.extend(columns(market.num_assets()).map(|c| format!("p_{c}")));
    header.extend(["is_upper".to_string(), "is_lower".to_string()]);
    let rows = vertices.iter().enumerate().map(|(i, v)| {
        let mut row = vec![(i + 1).to_string()];
        row.extend(v.iter().map(|x| num(*x)));
        row.push(close(v, upper.weights()).to_string());
        row.push(lower.as_ref().is_some_and(|q| close(v, q.weights())).to_string());
        row
    });
    Ok(write_csv(&header, rows.collect::<Vec<_>>()))
}
