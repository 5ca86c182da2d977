//! Bounded-variable primal revised simplex on the scaled problem.
//!
//! Every row carries a logical column `r_i` so that `A x + r = b`; the
//! relation of the row becomes a bound on `r_i`. Artificial columns are only
//! created for rows whose logical cannot absorb the initial residual.

use super::factor::Factor;
use super::{Basis, BasisStatus, Scaled, SolverError, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free column resting at zero.
    Zero,
}

pub(super) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded { entering: usize, direction: f64 },
}

pub(super) struct Simplex<'a> {
    p: &'a Scaled,
    opts: &'a SolverOptions,
    m: usize,
    /// All columns: structurals, then logicals, then artificials.
    cols: Vec<Vec<(usize, f64)>>,
    /// Row-wise copy of `cols`.
    rows: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    pub x: Vec<f64>,
    state: Vec<State>,
    /// `head[row]` = column basic in that position.
    pub head: Vec<usize>,
    factor: Factor,
    first_artificial: usize,
    pub iterations: usize,
    degenerate_run: usize,
    bland: bool,
    /// Scratch for transformed columns.
    alpha: Vec<f64>,
    /// Devex reference weights.
    weights: Vec<f64>,
}

impl<'a> Simplex<'a> {
    pub fn new(p: &'a Scaled, opts: &'a SolverOptions) -> Self {
        let m = p.m;
        let n = p.n;
        let mut cols: Vec<Vec<(usize, f64)>> = p.cols.clone();
        let mut lo = p.lo.clone();
        let mut hi = p.hi.clone();
        let mut cost = p.cost.clone();
        let mut x = vec![0.0; n];
        let mut state = vec![State::Lower; n];
        for j in 0..n {
            if lo[j].is_finite() {
                x[j] = lo[j];
                state[j] = State::Lower;
            } else if hi[j].is_finite() {
                x[j] = hi[j];
                state[j] = State::Upper;
            } else {
                state[j] = State::Zero;
            }
        }
        let mut residual = p.b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for &(i, a) in &cols[j] {
                    residual[i] -= a * x[j];
                }
            }
        }

        let mut head = vec![0; m];
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
            lo.push(p.row_lo[i]);
            hi.push(p.row_hi[i]);
            cost.push(0.0);
        }
        let first_artificial = n + m;
        for i in 0..m {
            let j = n + i;
            let r = residual[i];
            if r >= lo[j] && r <= hi[j] {
                x.push(r);
                state.push(State::Basic);
                head[i] = j;
            } else {
                let (v, st) = if r < lo[j] {
                    (lo[j], State::Lower)
                } else {
                    (hi[j], State::Upper)
                };
                x.push(v);
                state.push(st);
            }
        }
        for i in 0..m {
            let j = n + i;
            if state[j] != State::Basic {
                let gap = residual[i] - x[j];
                let a = cols.len();
                cols.push(vec![(i, gap.signum())]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                cost.push(0.0);
                x.push(gap.abs());
                state.push(State::Basic);
                head[i] = a;
            }
        }
        let total = cols.len();
        let refs: Vec<&[(usize, f64)]> = head.iter().map(|&j| cols[j].as_slice()).collect();
        let r = Factor::reinvert(m, &refs, opts.singular_tol);
        debug_assert!(r.rejected.is_empty());
        let head: Vec<usize> = r.head.iter().map(|h| head[h.expect("unit basis")]).collect();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                rows[i].push((j, a));
            }
        }
        Simplex {
            p,
            opts,
            m,
            cols,
            rows,
            lo,
            hi,
            cost,
            x,
            state: {
                debug_assert_eq!(state.len(), total);
                state
            },
            head,
            factor: r.factor,
            first_artificial,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            alpha: vec![0.0; m],
            weights: vec![1.0; total],
        }
    }

    /// Starts from a previous basis over structural and logical columns.
    pub fn warm(p: &'a Scaled, opts: &'a SolverOptions, basis: &Basis) -> Self {
        let (m, n) = (p.m, p.n);
        let mut cols = p.cols.clone();
        let mut lo = p.lo.clone();
        let mut hi = p.hi.clone();
        let mut cost = p.cost.clone();
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
            lo.push(p.row_lo[i]);
            hi.push(p.row_hi[i]);
            cost.push(0.0);
        }
        let total = cols.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                rows[i].push((j, a));
            }
        }
        let mut spx = Simplex {
            p,
            opts,
            m,
            cols,
            rows,
            lo,
            hi,
            cost,
            x: vec![0.0; total],
            state: vec![State::Lower; total],
            head: Vec::new(),
            factor: Factor::reinvert(m, &[], opts.singular_tol).factor,
            first_artificial: n + m,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            alpha: vec![0.0; m],
            weights: vec![1.0; total],
        };
        let mut basics = Vec::with_capacity(m);
        for (j, &st) in basis.status.iter().enumerate() {
            let (l, h) = (spx.lo[j], spx.hi[j]);
            let (v, s) = match st {
                BasisStatus::Basic if basics.len() < m => {
                    basics.push(j);
                    (0.0, State::Basic)
                }
                BasisStatus::Lower if l.is_finite() => (l, State::Lower),
                BasisStatus::Upper if h.is_finite() => (h, State::Upper),
                BasisStatus::Free if !l.is_finite() && !h.is_finite() => (0.0, State::Zero),
                _ => spx.nearest_bound(j),
            };
            spx.x[j] = v;
            spx.state[j] = s;
        }
        spx.install(&basics);
        spx
    }

    /// Snapshot of the current basis over structural and logical columns.
    pub fn basis(&self) -> Basis {
        let n = self.p.n;
        let mut status: Vec<BasisStatus> = self.state[..self.first_artificial]
            .iter()
            .map(|s| match s {
                State::Basic => BasisStatus::Basic,
                State::Lower => BasisStatus::Lower,
                State::Upper => BasisStatus::Upper,
                State::Zero => BasisStatus::Free,
            })
            .collect();
        // A basic artificial stands in for its row's logical.
        for &j in &self.head {
            if j >= self.first_artificial {
                status[n + self.cols[j][0].0] = BasisStatus::Basic;
            }
        }
        Basis { status }
    }

    /// Whether every basic value lies within its bounds.
    pub fn primal_feasible(&self) -> bool {
        let tol = self.opts.feasibility_tol;
        self.head
            .iter()
            .all(|&j| self.x[j] >= self.lo[j] - tol && self.x[j] <= self.hi[j] + tol)
    }

    /// Dual simplex on the phase-two costs until the basis is primal feasible.
    ///
    /// Returns `None` when the starting basis is not dual feasible.
    pub fn dual_phase(&mut self) -> Result<Option<Outcome>, SolverError> {
        let costs = self.cost.clone();
        let total = self.cols.len();
        let mut d = vec![0.0; total];
        self.price_all(&costs, &mut d);
        self.bland = false;
        if self.price(&d).is_some() {
            return Ok(None);
        }
        let ftol = self.opts.feasibility_tol;
        let otol = self.opts.optimality_tol;
        let mut rho = vec![0.0; self.m];
        let mut row = vec![0.0; total];
        let mut touched = Vec::new();
        let mut stale = false;
        let limit = self.opts.max_iterations.min(self.iterations + 4 * total);
        loop {
            if self.iterations >= limit {
                return Err(SolverError::IterationLimit(limit));
            }
            if self.factor.num_updates() >= self.opts.refactor_interval || self.factor.update_nnz() > 16 * self.m + 1000
            {
                self.refresh();
                stale = true;
            }
            if stale {
                self.price_all(&costs, &mut d);
                stale = false;
            }

            // Leaving row: largest bound violation.
            let mut leave: Option<(usize, bool)> = None;
            let mut worst = ftol;
            for (r, &j) in self.head.iter().enumerate() {
                let below = self.lo[j] - self.x[j];
                let above = self.x[j] - self.hi[j];
                if below > worst {
                    worst = below;
                    leave = Some((r, false));
                } else if above > worst {
                    worst = above;
                    leave = Some((r, true));
                }
            }
            let Some((r, to_upper)) = leave else {
                return Ok(Some(Outcome::Optimal));
            };

            self.pivot_row(r, &mut rho, &mut row, &mut touched);
            // Entering column: dual ratio test with a Harris pass.
            let sense = if to_upper { 1.0 } else { -1.0 };
            let eligible = |j: usize, a: f64| -> Option<f64> {
                if self.state[j] == State::Basic || self.lo[j] == self.hi[j] || a.abs() <= self.opts.pivot_tol {
                    return None;
                }
                let dj = d[j];
                match self.state[j] {
                    State::Lower if sense * a > 0.0 => Some(dj.max(0.0)),
                    State::Upper if sense * a < 0.0 => Some((-dj).max(0.0)),
                    State::Zero => Some(dj.abs()),
                    _ => None,
                }
            };
            let mut bound = f64::INFINITY;
            for &j in &touched {
                if let Some(dj) = eligible(j, row[j]) {
                    bound = bound.min((dj + otol) / row[j].abs());
                }
            }
            let mut enter: Option<(usize, f64)> = None;
            for &j in &touched {
                let a = row[j];
                if let Some(dj) = eligible(j, a) {
                    if dj / a.abs() <= bound && enter.is_none_or(|(_, ba)| a.abs() > ba) {
                        enter = Some((j, a.abs()));
                    }
                }
            }
            let Some((q, _)) = enter else {
                touched.iter().for_each(|&j| row[j] = 0.0);
                touched.clear();
                return Ok(Some(Outcome::Infeasible));
            };

            self.alpha.iter_mut().for_each(|v| *v = 0.0);
            self.factor.ftran_sparse(&self.cols[q], &mut self.alpha);
            let piv = self.alpha[r];
            if (piv - row[q]).abs() > 1e-7 * (1.0 + piv.abs()) && self.factor.num_updates() > 0 {
                // Row and column disagree: refactorize and retry.
                touched.iter().for_each(|&j| row[j] = 0.0);
                touched.clear();
                self.refresh();
                stale = true;
                continue;
            }

            let leaving = self.head[r];
            let target = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
            let delta = (self.x[leaving] - target) / piv;
            self.x[q] += delta;
            for (k, &j) in self.head.iter().enumerate() {
                let a = self.alpha[k];
                if a != 0.0 {
                    self.x[j] -= a * delta;
                }
            }
            self.x[leaving] = target;
            self.state[leaving] = if to_upper { State::Upper } else { State::Lower };

            let theta = d[q] / piv;
            for &j in &touched {
                let a = row[j];
                row[j] = 0.0;
                if j != q && self.state[j] != State::Basic {
                    d[j] -= theta * a;
                }
            }
            touched.clear();
            d[leaving] = -theta;
            d[q] = 0.0;
            self.state[q] = State::Basic;
            self.head[r] = q;
            self.factor.update(r, &self.alpha);
            self.iterations += 1;
        }
    }

    pub fn has_artificials(&self) -> bool {
        self.cols.len() > self.first_artificial
    }

    /// Minimizes the sum of artificials; `Infeasible` when it stays positive.
    pub fn phase_one(&mut self) -> Result<Outcome, SolverError> {
        let costs: Vec<f64> = (0..self.cols.len())
            .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
            .collect();
        match self.run(&costs)? {
            Outcome::Optimal => {}
            Outcome::Unbounded { .. } => unreachable!("phase one objective is bounded below"),
            Outcome::Infeasible => return Ok(Outcome::Infeasible),
        }
        let infeasibility: f64 = (self.first_artificial..self.cols.len()).map(|j| self.x[j]).sum();
        let scale = 1.0 + self.p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeasibility > self.opts.feasibility_tol * scale {
            return Ok(Outcome::Infeasible);
        }
        for j in self.first_artificial..self.cols.len() {
            self.hi[j] = 0.0;
            if self.state[j] != State::Basic {
                self.x[j] = 0.0;
                self.state[j] = State::Lower;
            }
        }
        Ok(Outcome::Optimal)
    }

    pub fn phase_two(&mut self) -> Result<Outcome, SolverError> {
        let costs = self.cost.clone();
        self.run(&costs)
    }

    /// Dual values `y = c_Bᵀ B⁻¹` for the given costs.
    pub fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.head.iter().map(|&j| costs[j]).collect();
        self.factor.btran(&mut y);
        y
    }

    pub fn phase_one_costs(&self) -> Vec<f64> {
        (0..self.cols.len())
            .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn phase_two_costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn reduced_cost(&self, y: &[f64], costs: &[f64], j: usize) -> f64 {
        costs[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    /// Transformed column `B⁻¹ a_j`, indexed by basis position.
    pub fn transformed(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        self.factor.ftran_sparse(&self.cols[j], &mut a);
        a
    }

    /// Largest bound violation over all columns, in scaled units.
    pub fn max_bound_violation(&self) -> f64 {
        (0..self.cols.len())
            .map(|j| (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Refactorizes the current basis and recomputes basic values from scratch.
    pub fn refresh(&mut self) {
        let basics = self.head.clone();
        self.install(&basics);
    }

    /// Factorizes the given basic columns; dependent ones go to a bound and
    /// uncovered rows take their logical.
    fn install(&mut self, basics: &[usize]) {
        let refs: Vec<&[(usize, f64)]> = basics.iter().map(|&j| self.cols[j].as_slice()).collect();
        let r = Factor::reinvert(self.m, &refs, self.opts.singular_tol);
        for &k in &r.rejected {
            let j = basics[k];
            let (v, st) = self.nearest_bound(j);
            self.x[j] = v;
            self.state[j] = st;
            log::warn!("basis column {j} dependent at reinversion; replaced by a logical");
        }
        let n = self.p.n;
        self.head = r
            .head
            .iter()
            .enumerate()
            .map(|(row, h)| match h {
                Some(k) => basics[*k],
                None => {
                    let j = n + row;
                    self.state[j] = State::Basic;
                    j
                }
            })
            .collect();
        self.factor = r.factor;
        self.recompute_basics();
    }

    fn nearest_bound(&self, j: usize) -> (f64, State) {
        let (l, h, v) = (self.lo[j], self.hi[j], self.x[j]);
        match (l.is_finite(), h.is_finite()) {
            (true, true) => {
                if v - l <= h - v {
                    (l, State::Lower)
                } else {
                    (h, State::Upper)
                }
            }
            (true, false) => (l, State::Lower),
            (false, true) => (h, State::Upper),
            (false, false) => (0.0, State::Zero),
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = self.p.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in col {
                    rhs[i] -= a * self.x[j];
                }
            }
        }
        self.factor.ftran(&mut rhs);
        for (r, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[r];
        }
    }

    /// Reduced costs of all nonbasic columns from scratch; zero for basics.
    fn price_all(&self, costs: &[f64], d: &mut [f64]) {
        let mut y: Vec<f64> = self.head.iter().map(|&j| costs[j]).collect();
        self.factor.btran(&mut y);
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = if self.state[j] == State::Basic {
                0.0
            } else {
                self.reduced_cost(&y, costs, j)
            };
        }
    }

    /// Row `r` of `B⁻¹A` scattered into `row`, with its support in `touched`.
    fn pivot_row(&self, r: usize, rho: &mut [f64], row: &mut [f64], touched: &mut Vec<usize>) {
        rho.iter_mut().for_each(|v| *v = 0.0);
        rho[r] = 1.0;
        self.factor.btran(rho);
        for (i, &ri) in rho.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for &(j, a) in &self.rows[i] {
                if row[j] == 0.0 {
                    touched.push(j);
                }
                row[j] += ri * a;
            }
        }
    }

    fn run(&mut self, costs: &[f64]) -> Result<Outcome, SolverError> {
        let total = self.cols.len();
        let mut d = vec![0.0; total];
        let mut rho = vec![0.0; self.m];
        let mut pivot_row = vec![0.0; total];
        let mut touched = Vec::new();
        self.weights.iter_mut().for_each(|w| *w = 1.0);
        let mut stale = true;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(SolverError::IterationLimit(self.opts.max_iterations));
            }
            if self.factor.num_updates() >= self.opts.refactor_interval || self.factor.update_nnz() > 16 * self.m + 1000
            {
                self.refresh();
                stale = true;
            }
            let fresh = stale;
            if fresh {
                self.price_all(costs, &mut d);
                stale = false;
            }
            let Some((q, dir)) = self.price(&d) else {
                if fresh {
                    return Ok(Outcome::Optimal);
                }
                // Confirm optimality on exact reduced costs.
                stale = true;
                continue;
            };
            self.alpha.iter_mut().for_each(|v| *v = 0.0);
            self.factor.ftran_sparse(&self.cols[q], &mut self.alpha);
            let (step, leave) = self.ratio_test(q, dir);
            if step.is_infinite() {
                if !fresh {
                    stale = true;
                    continue;
                }
                return Ok(Outcome::Unbounded {
                    entering: q,
                    direction: dir,
                });
            }
            self.iterations += 1;
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > self.opts.degenerate_limit {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }

            if step != 0.0 {
                self.x[q] += dir * step;
                for (r, &j) in self.head.iter().enumerate() {
                    let a = self.alpha[r];
                    if a != 0.0 {
                        self.x[j] -= dir * step * a;
                    }
                }
            }
            let Some((r, to_upper)) = leave else {
                // Bound flip.
                if dir > 0.0 {
                    self.x[q] = self.hi[q];
                    self.state[q] = State::Upper;
                } else {
                    self.x[q] = self.lo[q];
                    self.state[q] = State::Lower;
                }
                continue;
            };

            // Pivot row of the current basis, for reduced costs and devex weights.
            self.pivot_row(r, &mut rho, &mut pivot_row, &mut touched);
            let piv = self.alpha[r];
            let theta = d[q] / piv;
            let wq = self.weights[q];
            let mut reset = false;
            for &j in &touched {
                let a = pivot_row[j];
                pivot_row[j] = 0.0;
                if j == q || self.state[j] == State::Basic || a == 0.0 {
                    continue;
                }
                d[j] -= theta * a;
                let w = (a / piv).powi(2) * wq;
                if w > self.weights[j] {
                    self.weights[j] = w;
                    reset |= w > 1e8;
                }
            }
            touched.clear();

            let leaving = self.head[r];
            if to_upper {
                self.x[leaving] = self.hi[leaving];
                self.state[leaving] = State::Upper;
            } else {
                self.x[leaving] = self.lo[leaving];
                self.state[leaving] = State::Lower;
            }
            d[leaving] = -theta;
            d[q] = 0.0;
            self.weights[leaving] = (wq / (piv * piv)).max(1.0);
            if reset {
                self.weights.iter_mut().for_each(|w| *w = 1.0);
            }
            self.state[q] = State::Basic;
            self.head[r] = q;
            self.factor.update(r, &self.alpha);
        }
    }

    /// Chooses an entering column and its direction (+1 increase, -1 decrease)
    /// by devex pricing, or the first eligible column under Bland's rule.
    fn price(&self, d: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            let st = self.state[j];
            if st == State::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let dir = match st {
                State::Lower if dj < -tol => 1.0,
                State::Upper if dj > tol => -1.0,
                State::Zero if dj.abs() > tol => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = dj * dj / self.weights[j];
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    /// Returns the step length and the leaving position with the bound it hits;
    /// `None` as leaving means the entering column flips to its other bound.
    fn ratio_test(&self, q: usize, dir: f64) -> (f64, Option<(usize, bool)>) {
        let piv = self.opts.pivot_tol;
        let flip = self.hi[q] - self.lo[q];
        let candidates = self.head.iter().enumerate().filter_map(|(r, &j)| {
            let a = self.alpha[r];
            if a.abs() <= piv {
                return None;
            }
            let rate = -dir * a;
            if rate < 0.0 {
                self.lo[j]
                    .is_finite()
                    .then(|| (r, j, a, (self.x[j] - self.lo[j]).max(0.0) / -rate, false))
            } else {
                self.hi[j]
                    .is_finite()
                    .then(|| (r, j, a, (self.hi[j] - self.x[j]).max(0.0) / rate, true))
            }
        });

        if self.bland {
            let mut best: Option<(usize, usize, f64, bool)> = None;
            for (r, j, _a, ratio, up) in candidates {
                match best {
                    Some((_, bj, bt, _)) if ratio > bt || (ratio == bt && j > bj) => {}
                    _ => best = Some((r, j, ratio, up)),
                }
            }
            return match best {
                Some((r, _, t, up)) if t <= flip => (t, Some((r, up))),
                _ => (flip, None),
            };
        }

        // Harris two-pass: bound with a small relaxation, then take the
        // largest pivot among rows blocking within it.
        let cands: Vec<_> = candidates.collect();
        let tol = self.opts.feasibility_tol;
        let mut relaxed = f64::INFINITY;
        for &(r, j, a, _, up) in &cands {
            let rate = (dir * a).abs();
            let room = if up {
                self.hi[j] - self.x[j]
            } else {
                self.x[j] - self.lo[j]
            };
            let _ = r;
            relaxed = relaxed.min((room.max(0.0) + tol) / rate);
        }
        if flip <= relaxed {
            return (flip, None);
        }
        let mut best: Option<(usize, f64, f64, bool)> = None;
        for &(r, _, a, ratio, up) in &cands {
            if ratio <= relaxed {
                match best {
                    Some((_, ba, _, _)) if a.abs() <= ba => {}
                    _ => best = Some((r, a.abs(), ratio, up)),
                }
            }
        }
        match best {
            Some((r, _, t, up)) => (t, Some((r, up))),
            None => (f64::INFINITY, None),
        }
    }

    /// Ray of the unbounded direction, per column, in scaled space.
    pub fn ray(&self, entering: usize, direction: f64) -> Vec<f64> {
        let mut ray = vec![0.0; self.cols.len()];
        ray[entering] = direction;
        let alpha = self.transformed(entering);
        for (r, &j) in self.head.iter().enumerate() {
            ray[j] = -direction * alpha[r];
        }
        ray
    }
}
