//! Basis factorization: sparse LU at reinversion, product-form etas for updates.
//!
//! `B⁻¹ = E_k ⋯ E_1 U⁻¹ L⁻¹`. Pivots are singletons first, then the
//! Markowitz choice under threshold pivoting, which keeps the
//! near-triangular bases of energy-system LPs almost free of fill.
//! Solutions are indexed by pivot row: `x[row]` is the weight of the basis
//! column pivoted on `row`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// `(index, value)` pairs.
type SparseVec = Vec<(usize, f64)>;

/// One elimination step of the LU factorization.
#[derive(Debug, Clone)]
struct Pivot {
    row: usize,
    value: f64,
    /// Multipliers `(i, l_i)` eliminating the pivot column from row `i`.
    lower: Vec<(usize, f64)>,
    /// Off-pivot entries of the pivot row, keyed by the pivot row of their column.
    upper: Vec<(usize, f64)>,
}

/// Elementary column transform with pivot row `row`.
#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    pivot: f64,
    /// Off-pivot entries `(i, alpha_i)` of the transformed column.
    entries: Vec<(usize, f64)>,
}

/// Outcome of a reinversion.
pub(crate) struct Reinversion {
    pub factor: Factor,
    /// `head[row] = k`: basis column `k` pivots on `row`; `None` marks rows
    /// left to their unit (slack) column.
    pub head: Vec<Option<usize>>,
    /// Basis columns that were numerically dependent and left out.
    pub rejected: Vec<usize>,
}

pub(crate) struct Factor {
    m: usize,
    pivots: Vec<Pivot>,
    updates: Vec<Eta>,
    update_nnz: usize,
    drop_tol: f64,
}

const NONE: usize = usize::MAX;
/// Relative threshold for non-singleton pivots.
const THRESHOLD: f64 = 0.1;
/// Columns examined per Markowitz search.
const SEARCH: usize = 4;

/// Active submatrix during elimination, with lazy min-count heaps.
struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    col_rows: Vec<Vec<usize>>,
    row_count: Vec<usize>,
    col_count: Vec<usize>,
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    row_heap: BinaryHeap<Reverse<(usize, usize)>>,
    col_heap: BinaryHeap<Reverse<(usize, usize)>>,
}

impl Active {
    fn new(m: usize, columns: &[&[(usize, f64)]]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); columns.len()];
        for (k, col) in columns.iter().enumerate() {
            for &(i, v) in col.iter() {
                if v != 0.0 {
                    rows[i].push((k, v));
                    col_rows[k].push(i);
                }
            }
        }
        let row_count: Vec<usize> = rows.iter().map(Vec::len).collect();
        let col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
        let row_heap = row_count.iter().enumerate().map(|(i, &c)| Reverse((c, i))).collect();
        let col_heap = col_count.iter().enumerate().map(|(k, &c)| Reverse((c, k))).collect();
        Active {
            rows,
            col_rows,
            row_count,
            col_count,
            row_done: vec![false; m],
            col_done: vec![false; columns.len()],
            row_heap,
            col_heap,
        }
    }

    fn value(&self, i: usize, k: usize) -> Option<f64> {
        self.rows[i].iter().find(|e| e.0 == k).map(|e| e.1)
    }

    /// Live entries of column `k`.
    fn column(&self, k: usize) -> Vec<(usize, f64)> {
        self.col_rows[k]
            .iter()
            .filter(|&&i| !self.row_done[i])
            .filter_map(|&i| self.value(i, k).map(|v| (i, v)))
            .collect()
    }

    fn col_max(&self, k: usize) -> f64 {
        self.column(k).iter().fold(0.0f64, |a, e| a.max(e.1.abs()))
    }

    fn min_col(&mut self) -> Option<(usize, usize)> {
        while let Some(&Reverse((c, k))) = self.col_heap.peek() {
            if self.col_done[k] || self.col_count[k] != c {
                self.col_heap.pop();
                continue;
            }
            return Some((c, k));
        }
        None
    }

    fn min_row(&mut self) -> Option<(usize, usize)> {
        while let Some(&Reverse((c, i))) = self.row_heap.peek() {
            if self.row_done[i] || self.row_count[i] != c {
                self.row_heap.pop();
                continue;
            }
            return Some((c, i));
        }
        None
    }

    fn set_col_count(&mut self, k: usize, c: usize) {
        self.col_count[k] = c;
        self.col_heap.push(Reverse((c, k)));
    }

    fn set_row_count(&mut self, i: usize, c: usize) {
        self.row_count[i] = c;
        self.row_heap.push(Reverse((c, i)));
    }

    /// Drops column `k` from the active submatrix.
    fn remove_column(&mut self, k: usize) {
        self.col_done[k] = true;
        for idx in 0..self.col_rows[k].len() {
            let i = self.col_rows[k][idx];
            if self.row_done[i] {
                continue;
            }
            if let Some(p) = self.rows[i].iter().position(|e| e.0 == k) {
                self.rows[i].swap_remove(p);
                let c = self.row_count[i] - 1;
                self.set_row_count(i, c);
            }
        }
    }

    /// Markowitz search over the sparsest columns.
    fn markowitz(&mut self) -> Option<(usize, usize, f64)> {
        let mut cands = Vec::with_capacity(SEARCH);
        while cands.len() < SEARCH {
            let Some((_, k)) = self.min_col() else { break };
            self.col_heap.pop();
            cands.push(k);
        }
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for &k in &cands {
            let entries = self.column(k);
            let cmax = entries.iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
            for &(i, v) in &entries {
                if v.abs() < THRESHOLD * cmax {
                    continue;
                }
                let cost = (self.row_count[i] - 1) * (self.col_count[k] - 1);
                let better = match best {
                    None => true,
                    Some((bc, _, _, bv)) => cost < bc || (cost == bc && v.abs() > bv.abs()),
                };
                if better {
                    best = Some((cost, i, k, v));
                }
            }
        }
        for &k in &cands {
            self.col_heap.push(Reverse((self.col_count[k], k)));
        }
        best.map(|(_, i, k, v)| (i, k, v))
    }

    /// Eliminates column `k` with pivot row `r`; returns the L and U parts.
    fn eliminate(&mut self, r: usize, k: usize, v: f64) -> (SparseVec, SparseVec) {
        self.row_done[r] = true;
        self.col_done[k] = true;
        let prow: Vec<(usize, f64)> = self.rows[r].iter().copied().filter(|e| e.0 != k).collect();
        for &(c, _) in &prow {
            let n = self.col_count[c] - 1;
            self.set_col_count(c, n);
        }
        let mut lower = Vec::new();
        for idx in 0..self.col_rows[k].len() {
            let i = self.col_rows[k][idx];
            if self.row_done[i] {
                continue;
            }
            let Some(p) = self.rows[i].iter().position(|e| e.0 == k) else {
                continue;
            };
            let l = self.rows[i][p].1 / v;
            self.rows[i].swap_remove(p);
            let mut count = self.row_count[i] - 1;
            for &(c, u) in &prow {
                match self.rows[i].iter_mut().find(|e| e.0 == c) {
                    Some(e) => e.1 -= l * u,
                    None => {
                        self.rows[i].push((c, -l * u));
                        self.col_rows[c].push(i);
                        count += 1;
                        let n = self.col_count[c] + 1;
                        self.set_col_count(c, n);
                    }
                }
            }
            self.set_row_count(i, count);
            lower.push((i, l));
        }
        (lower, prow)
    }
}

impl Factor {
    /// Factorizes the basis whose `k`-th column is `columns[k]`.
    ///
    /// Columns with no acceptable pivot are rejected and their rows are
    /// covered by unit columns, so the result is always nonsingular.
    pub fn reinvert(m: usize, columns: &[&[(usize, f64)]], pivot_tol: f64) -> Reinversion {
        let mut a = Active::new(m, columns);
        let mut head: Vec<Option<usize>> = vec![None; m];
        let mut row_of_col = vec![NONE; columns.len()];
        let mut rejected = Vec::new();
        let mut steps = Vec::with_capacity(m);

        while let Some((cc, k)) = a.min_col() {
            let choice = match cc {
                0 => {
                    a.col_heap.pop();
                    a.col_done[k] = true;
                    rejected.push(k);
                    continue;
                }
                1 => {
                    let (i, v) = a.column(k)[0];
                    Some((i, k, v))
                }
                _ => match a.min_row() {
                    Some((0, i)) => {
                        a.row_heap.pop();
                        a.row_done[i] = true;
                        continue;
                    }
                    Some((1, i)) => {
                        let (k, v) = a.rows[i][0];
                        if v.abs() >= THRESHOLD * a.col_max(k) {
                            Some((i, k, v))
                        } else {
                            a.markowitz()
                        }
                    }
                    _ => a.markowitz(),
                },
            };
            let Some((r, k, v)) = choice else { break };
            if v.abs() < pivot_tol {
                a.remove_column(k);
                rejected.push(k);
                continue;
            }
            let (lower, prow) = a.eliminate(r, k, v);
            row_of_col[k] = r;
            head[r] = Some(k);
            steps.push((r, v, lower, prow));
        }

        for k in 0..columns.len() {
            if !a.col_done[k] {
                rejected.push(k);
            }
        }
        rejected.sort_unstable();
        rejected.dedup();

        let pivots = steps
            .into_iter()
            .map(|(row, value, lower, prow)| Pivot {
                row,
                value,
                lower,
                upper: prow
                    .into_iter()
                    .filter(|&(c, u)| row_of_col[c] != NONE && u != 0.0)
                    .map(|(c, u)| (row_of_col[c], u))
                    .collect(),
            })
            .collect();
        Reinversion {
            factor: Factor {
                m,
                pivots,
                updates: Vec::new(),
                update_nnz: 0,
                drop_tol: 1e-14,
            },
            head,
            rejected,
        }
    }

    /// `x ← B⁻¹ x` for a dense vector.
    pub fn ftran(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.m);
        for p in &self.pivots {
            let t = x[p.row];
            if t != 0.0 {
                for &(i, l) in &p.lower {
                    x[i] -= l * t;
                }
            }
        }
        for p in self.pivots.iter().rev() {
            let mut s = x[p.row];
            for &(r, u) in &p.upper {
                s -= u * x[r];
            }
            x[p.row] = s / p.value;
        }
        for eta in &self.updates {
            let t = x[eta.row];
            if t == 0.0 {
                continue;
            }
            let t = t / eta.pivot;
            x[eta.row] = t;
            for &(i, a) in &eta.entries {
                x[i] -= a * t;
            }
        }
    }

    /// `x ← B⁻¹ a` for a sparse column `a`; `x` must be zero on entry.
    pub fn ftran_sparse(&self, a: &[(usize, f64)], x: &mut [f64]) {
        for &(i, v) in a {
            x[i] += v;
        }
        self.ftran(x);
    }

    /// `y ← yᵀ B⁻¹` for a dense row vector.
    pub fn btran(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.m);
        for eta in self.updates.iter().rev() {
            let mut s = y[eta.row];
            for &(i, a) in &eta.entries {
                s -= a * y[i];
            }
            y[eta.row] = s / eta.pivot;
        }
        for p in &self.pivots {
            let w = y[p.row] / p.value;
            y[p.row] = w;
            if w != 0.0 {
                for &(r, u) in &p.upper {
                    y[r] -= u * w;
                }
            }
        }
        for p in self.pivots.iter().rev() {
            let mut s = y[p.row];
            for &(i, l) in &p.lower {
                s -= l * y[i];
            }
            y[p.row] = s;
        }
    }

    /// Records the basis change that pivots the transformed column `alpha` on `row`.
    pub fn update(&mut self, row: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, a)| i != row && a.abs() > self.drop_tol)
            .map(|(i, &a)| (i, a))
            .collect();
        self.update_nnz += entries.len() + 1;
        self.updates.push(Eta {
            row,
            pivot: alpha[row],
            entries,
        });
    }

    pub fn num_updates(&self) -> usize {
        self.updates.len()
    }

    pub fn update_nnz(&self) -> usize {
        self.update_nnz
    }
}
