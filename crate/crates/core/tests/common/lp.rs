//! Small dense LPs with a brute-force vertex-enumeration oracle.

use eroi_core::lp::{LpProblem, Relation, Row};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Dense {
    pub a: Vec<Vec<f64>>,
    pub rel: Vec<Relation>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub c: Vec<f64>,
}

impl Dense {
    pub fn to_lp(&self) -> LpProblem {
        let mut lp = LpProblem::new();
        for j in 0..self.c.len() {
            lp.add_column(self.lo[j], self.hi[j], self.c[j]);
        }
        for (i, row) in self.a.iter().enumerate() {
            let coeffs = row.iter().copied().enumerate().collect();
            lp.add_row(Row::new(format!("r{i}"), coeffs, self.rel[i], self.b[i]));
        }
        lp
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        let n = x.len();
        if (0..n).any(|j| x[j] < self.lo[j] - tol || x[j] > self.hi[j] + tol) {
            return false;
        }
        self.a.iter().zip(&self.rel).zip(&self.b).all(|((row, rel), &b)| {
            let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            match rel {
                Relation::Le => ax <= b + tol,
                Relation::Ge => ax >= b - tol,
                Relation::Eq => (ax - b).abs() <= tol,
            }
        })
    }

    /// Minimum objective over all feasible vertices, or `None` if there are none.
    pub fn oracle(&self) -> Option<f64> {
        let n = self.c.len();
        // Every constraint as a hyperplane `g·x = h`.
        let mut planes: Vec<(Vec<f64>, f64)> = self.a.iter().cloned().zip(self.b.iter().copied()).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e.clone(), self.lo[j]));
            planes.push((e, self.hi[j]));
        }
        let mut best: Option<f64> = None;
        let mut pick: Vec<usize> = (0..n).collect();
        loop {
            let g = DMatrix::from_fn(n, n, |r, c| planes[pick[r]].0[c]);
            let h = DVector::from_fn(n, |r, _| planes[pick[r]].1);
            if let Some(x) = g.lu().solve(&h) {
                let x: Vec<f64> = x.iter().copied().collect();
                if x.iter().all(|v| v.is_finite()) && self.feasible(&x, 1e-7) {
                    let z: f64 = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(z, |b: f64| b.min(z)));
                }
            }
            // Next n-combination of the planes.
            let k = planes.len();
            let mut i = n;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if pick[i] < k - n + i {
                    break;
                }
            }
            pick[i] += 1;
            for t in i + 1..n {
                pick[t] = pick[t - 1] + 1;
            }
        }
    }
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> Dense {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=8);
    // Half-integer coefficients make degenerate vertices common.
    let coef = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| f64::from(rng.random_range(lo..=hi)) * 0.5;
    let a = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { coef(rng, -8, 8) })
                .collect()
        })
        .collect();
    let rel = (0..m)
        .map(|_| match rng.random_range(0..10) {
            0 => Relation::Eq,
            1..=3 => Relation::Ge,
            _ => Relation::Le,
        })
        .collect();
    let b = (0..m).map(|_| coef(rng, -10, 20)).collect();
    let lo: Vec<f64> = (0..n).map(|_| coef(rng, -6, 2)).collect();
    let hi = lo.iter().map(|l| l + coef(rng, 0, 12)).collect();
    let c = (0..n).map(|_| coef(rng, -6, 6)).collect();
    Dense { a, rel, b, lo, hi, c }
}
