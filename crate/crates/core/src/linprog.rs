//! Dense primal simplex for small equality-form programs
//! `optimize c·x  s.t.  A x = d, x >= 0`, plus vertex enumeration of the
//! feasible polytope.
//!
//! Pivoting follows Bland's rule: the entering column is the lowest-index
//! column with an improving reduced cost, and ratio-test ties go to the basic
//! variable with the lowest index. Results are therefore deterministic for
//! identical input.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Pivot elements below this trigger a refactorization before use.
const SMALL_PIVOT: f64 = 1e-7;
/// Pivots between scheduled refactorizations.
const REFACTOR_EVERY: usize = 32;

/// Largest negative basic value still treated as feasible during enumeration.
const FEASIBILITY_SLACK: f64 = 1e-7;

/// Default cap on the number of feasible bases visited by [`enumerate_vertices`].
pub const DEFAULT_MAX_BASES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: DMatrix<f64>,
    pub rhs: Vec<f64>,
    pub sense: Sense,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraints: DMatrix<f64>, rhs: Vec<f64>, sense: Sense) -> Result<Self> {
        if constraints.ncols() != objective.len() {
            return Err(Error::DimensionMismatch {
                expected: constraints.ncols(),
                found: objective.len(),
            });
        }
        if constraints.nrows() != rhs.len() {
            return Err(Error::DimensionMismatch {
                expected: constraints.nrows(),
                found: rhs.len(),
            });
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
            sense,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
    /// Basic column indices, ascending.
    pub basis: Vec<usize>,
}

pub fn solve(problem: &LpProblem, tol: f64) -> Result<LpSolution> {
    if problem.constraints.ncols() != problem.objective.len() || problem.constraints.nrows() != problem.rhs.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.constraints.ncols(),
            found: problem.objective.len(),
        });
    }
    FeasibleTableau::new(&problem.constraints, &problem.rhs, tol)?.optimize(&problem.objective, problem.sense)
}

/// A simplex tableau holding a basic feasible solution of `A x = d, x >= 0`.
///
/// Phase one runs once in [`FeasibleTableau::new`]; each call to
/// [`FeasibleTableau::optimize`] starts phase two from that basis on a copy,
/// so one instance serves any number of objectives over the same constraints
/// and may be shared between threads.
#[derive(Debug, Clone)]
pub struct FeasibleTableau {
    num_cols: usize,
    /// Row-major, `rows x (num_cols + 1)`; the last entry of a row is its rhs.
    tab: Vec<f64>,
    basis: Vec<usize>,
    /// Sign-normalized `[A | d]` restricted to the kept rows, same layout as `tab`.
    orig: Vec<f64>,
    /// Original constraint rows that survived redundancy elimination.
    kept_rows: Vec<usize>,
    tol: f64,
}

impl FeasibleTableau {
    pub fn new(a: &DMatrix<f64>, d: &[f64], tol: f64) -> Result<Self> {
        let rows = a.nrows();
        let n = a.ncols();
        if d.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: d.len(),
            });
        }
        let width = n + rows + 1;
        let mut tab = vec![0.0; rows * width];
        for i in 0..rows {
            let sign = if d[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                tab[i * width + j] = sign * a[(i, j)];
            }
            tab[i * width + n + i] = 1.0;
            tab[i * width + width - 1] = sign * d[i];
        }
        let mut basis: Vec<usize> = (n..n + rows).collect();
        let orig_full = tab.clone();
        let mut orig_cost = vec![0.0; width];
        orig_cost[n..n + rows].fill(1.0);

        // phase one: minimize the sum of artificials
        let mut cost = vec![0.0; width];
        for i in 0..rows {
            for j in 0..width {
                if j < n || j == width - 1 {
                    cost[j] -= tab[i * width + j];
                }
            }
        }
        let mut t = Tableau {
            tab: &mut tab,
            width,
            rows,
            basis: &mut basis,
            tol,
            orig: &orig_full,
            orig_cost: &orig_cost,
            pivots: 0,
        };
        t.run(&mut cost, n, tol)?;

        let infeasibility = -cost[width - 1];
        let scale = d.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > tol * scale {
            return Err(Error::Infeasible);
        }

        // drive artificials out of the basis; rows where that is impossible are redundant
        let mut redundant = Vec::new();
        for i in 0..rows {
            if t.basis[i] < n {
                continue;
            }
            let entering = (0..n)
                .filter(|j| !t.basis.contains(j))
                .map(|j| (j, t.tab[i * width + j].abs()))
                .filter(|&(_, v)| v > tol)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(j, _)| j);
            match entering {
                Some(j) => t.pivot(i, j, None),
                None => redundant.push(i),
            }
        }

        let kept_rows: Vec<usize> = (0..rows).filter(|i| !redundant.contains(i)).collect();
        let mut compact = Vec::with_capacity(kept_rows.len() * (n + 1));
        let mut orig = Vec::with_capacity(kept_rows.len() * (n + 1));
        for &i in &kept_rows {
            let row = &tab[i * width..(i + 1) * width];
            compact.extend_from_slice(&row[..n]);
            compact.push(row[width - 1].max(0.0));
            let row = &orig_full[i * width..(i + 1) * width];
            orig.extend_from_slice(&row[..n]);
            orig.push(row[width - 1]);
        }
        let mut basis: Vec<usize> = kept_rows.iter().map(|&i| basis[i]).collect();
        let zero_cost = vec![0.0; n + 1];
        let mut t = Tableau {
            tab: &mut compact,
            width: n + 1,
            rows: kept_rows.len(),
            basis: &mut basis,
            tol,
            orig: &orig,
            orig_cost: &zero_cost,
            pivots: 0,
        };
        t.refactor(None);
        for i in 0..kept_rows.len() {
            let v = &mut compact[i * (n + 1) + n];
            *v = v.max(0.0);
        }
        Ok(Self {
            num_cols: n,
            tab: compact,
            basis,
            orig,
            kept_rows,
            tol,
        })
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    /// Basic columns of the stored feasible basis, one per kept row.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn kept_rows(&self) -> &[usize] {
        &self.kept_rows
    }

    pub fn optimize(&self, objective: &[f64], sense: Sense) -> Result<LpSolution> {
        let n = self.num_cols;
        if objective.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: objective.len(),
            });
        }
        let rows = self.basis.len();
        let width = n + 1;
        let mut tab = self.tab.clone();
        let mut basis = self.basis.clone();

        let sign = match sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let scale = objective.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };

        // reduced costs of the minimization form; last slot holds -value
        let mut cost: Vec<f64> = objective.iter().map(|c| sign * c).collect();
        cost.push(0.0);
        let orig_cost = cost.clone();
        for i in 0..rows {
            let cb = cost[basis[i]];
            if cb != 0.0 {
                for j in 0..width {
                    cost[j] -= cb * tab[i * width + j];
                }
            }
        }
        let mut t = Tableau {
            tab: &mut tab,
            width,
            rows,
            basis: &mut basis,
            tol: self.tol,
            orig: &self.orig,
            orig_cost: &orig_cost,
            pivots: 0,
        };
        t.run(&mut cost, n, self.tol * scale)?;

        let mut point = vec![0.0; n];
        for i in 0..rows {
            let v = tab[i * width + n];
            point[basis[i]] = if v.abs() <= self.tol { 0.0 } else { v };
        }
        let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        basis.sort_unstable();
        Ok(LpSolution { value, point, basis })
    }
}

struct Tableau<'a> {
    tab: &'a mut [f64],
    width: usize,
    rows: usize,
    basis: &'a mut [usize],
    tol: f64,
    /// Initial tableau, used to recompute the current one from scratch.
    orig: &'a [f64],
    orig_cost: &'a [f64],
    pivots: usize,
}

impl Tableau<'_> {
    /// Bland-rule pivoting on a minimization tableau until no column below
    /// `limit` has reduced cost under `-threshold`.
    fn run(&mut self, cost: &mut [f64], limit: usize, threshold: f64) -> Result<()> {
        loop {
            let Some(j) = (0..limit).find(|&j| cost[j] < -threshold && !self.basis.contains(&j)) else {
                return Ok(());
            };
            let Some(mut i) = self.leaving_row(j) else {
                return Err(Error::Unbounded);
            };
            if self.tab[i * self.width + j] < SMALL_PIVOT && self.refactor(Some(cost)) {
                if cost[j] >= -threshold {
                    continue;
                }
                match self.leaving_row(j) {
                    Some(k) => i = k,
                    None => return Err(Error::Unbounded),
                }
            }
            self.pivot(i, j, Some(cost));
            self.pivots += 1;
            if self.pivots.is_multiple_of(REFACTOR_EVERY) {
                self.refactor(Some(cost));
            }
        }
    }

    /// Rebuilds the tableau (and reduced costs) as `B^-1` times the initial
    /// one. Returns false, leaving everything untouched, if the basis matrix
    /// is numerically singular.
    fn refactor(&mut self, cost: Option<&mut [f64]>) -> bool {
        let (r, w) = (self.rows, self.width);
        if r == 0 {
            return false;
        }
        let b = DMatrix::from_fn(r, r, |i, k| self.orig[i * w + self.basis[k]]);
        let lu = b.lu();
        let u = lu.u();
        let diag = u.diagonal().map(f64::abs);
        if diag.min() <= 1e-12 * diag.max().max(1.0) {
            return false;
        }
        let rhs = DMatrix::from_row_slice(r, w, self.orig);
        let Some(sol) = lu.solve(&rhs) else {
            return false;
        };
        for i in 0..r {
            for j in 0..w {
                self.tab[i * w + j] = sol[(i, j)];
            }
        }
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..r {
                self.tab[i * w + j] = if i == k { 1.0 } else { 0.0 };
            }
        }
        if let Some(cost) = cost {
            cost.copy_from_slice(self.orig_cost);
            for (i, &bj) in self.basis.iter().enumerate() {
                let cb = self.orig_cost[bj];
                if cb != 0.0 {
                    for (c, t) in cost.iter_mut().zip(&self.tab[i * w..(i + 1) * w]) {
                        *c -= cb * t;
                    }
                }
            }
            for &j in self.basis.iter() {
                cost[j] = 0.0;
            }
        }
        true
    }

    fn leaving_row(&self, j: usize) -> Option<usize> {
        let rhs = self.width - 1;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.tab[i * self.width + j];
            if a <= self.tol {
                continue;
            }
            let ratio = self.tab[i * self.width + rhs].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((k, r)) => {
                    if ratio < r - self.tol || ((ratio - r).abs() <= self.tol && self.basis[i] < self.basis[k]) {
                        Some((i, ratio.min(r)))
                    } else {
                        Some((k, r))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize, cost: Option<&mut [f64]>) {
        let w = self.width;
        let p = self.tab[row * w + col];
        for v in &mut self.tab[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.tab[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.tab[i * w + col];
            if f != 0.0 {
                for (v, pr) in self.tab[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.tab[i * w + col] = 0.0;
            }
        }
        if let Some(cost) = cost {
            let f = cost[col];
            if f != 0.0 {
                for (v, pr) in cost.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                cost[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

pub fn enumerate_vertices(a: &DMatrix<f64>, d: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    enumerate_vertices_capped(a, d, tol, DEFAULT_MAX_BASES)
}

/// All vertices of `{x >= 0 : A x = d}`, found by breadth-first search over
/// feasible bases connected by simplex pivots (degenerate ties explore every
/// leaving row). Vertices are keyed by support and returned in descending
/// lexicographic order.
pub fn enumerate_vertices_capped(a: &DMatrix<f64>, d: &[f64], tol: f64, max_bases: usize) -> Result<Vec<Vec<f64>>> {
    let start = FeasibleTableau::new(a, d, tol)?;
    let n = a.ncols();
    let rows = &start.kept_rows;
    let r = rows.len();
    let a_red = DMatrix::from_fn(r, n, |i, j| a[(rows[i], j)]);
    let d_red = DVector::from_iterator(r, rows.iter().map(|&i| d[i]));

    let mut first = start.basis.clone();
    first.sort_unstable();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(first.clone());
    queue.push_back(first);

    let mut vertices: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut col = vec![0.0; r];

    while let Some(basis) = queue.pop_front() {
        let b = DMatrix::from_fn(r, r, |i, k| a_red[(i, basis[k])]);
        let lu = b.lu();
        let diag = lu.u().diagonal().map(f64::abs);
        if r > 0 && diag.min() <= 1e-12 * diag.max().max(1.0) {
            continue;
        }
        let Some(b_inv) = lu.try_inverse() else {
            continue;
        };
        let x_b = &b_inv * &d_red;
        if x_b.iter().any(|&v| v < -FEASIBILITY_SLACK) {
            continue;
        }

        let mut point = vec![0.0; n];
        for (k, &j) in basis.iter().enumerate() {
            point[j] = if x_b[k].abs() <= tol { 0.0 } else { x_b[k] };
        }
        let support: Vec<usize> = (0..n).filter(|&j| point[j] > tol).collect();
        vertices.entry(support).or_insert(point);

        for j in 0..n {
            if basis.binary_search(&j).is_ok() {
                continue;
            }
            for (i, c) in col.iter_mut().enumerate() {
                *c = (0..r).map(|k| b_inv[(i, k)] * a_red[(k, j)]).sum();
            }
            let mut min_ratio = f64::INFINITY;
            for k in 0..r {
                if col[k] > tol {
                    min_ratio = min_ratio.min(x_b[k].max(0.0) / col[k]);
                }
            }
            if !min_ratio.is_finite() {
                continue;
            }
            for k in 0..r {
                if col[k] > tol && (x_b[k].max(0.0) / col[k] - min_ratio).abs() <= tol {
                    let mut next = basis.clone();
                    next[k] = j;
                    next.sort_unstable();
                    if seen.insert(next.clone()) {
                        if seen.len() > max_bases {
                            return Err(Error::BudgetExceeded {
                                what: "vertex enumeration bases",
                                required: seen.len() as u128,
                                cap: max_bases as u128,
                            });
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
    }

    if vertices.is_empty() {
        return Err(Error::InvalidMeasure("simplex phase one ended on a singular basis".into()));
    }
    let mut out: Vec<Vec<f64>> = vertices.into_values().collect();
    out.sort_by(|x, y| {
        for (a, b) in x.iter().zip(y) {
            match b.total_cmp(a) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(out)
}
