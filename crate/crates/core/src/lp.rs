//! Dense two-phase simplex for small equality-form linear programs
//!
//! ```text
//! maximize c'x  subject to  A x = b,  x >= 0,  b >= 0
//! ```
//!
//! with Bland's rule. Returns the primal solution together with the dual
//! vector `y = c_B' B^-1`, which the domain test uses as a certificate.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal { x: DVector<f64>, y: DVector<f64>, value: f64 },
    /// Phase I could not reach zero infeasibility. `y` is the Farkas vector:
    /// `y'A >= 0` column-wise and `y'b < 0`.
    Infeasible { y: DVector<f64> },
    Unbounded,
}

struct Tableau {
    /// `m x (ncols + m + 1)`; artificial block, then right-hand side.
    t: DMatrix<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.ncols + self.t.nrows()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.t.ncols();
        let p = self.t[(row, col)];
        for j in 0..width {
            self.t[(row, j)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(row, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut r = cost[j];
        for (i, &b) in self.basis.iter().enumerate() {
            r -= cost[b] * self.t[(i, j)];
        }
        r
    }

    fn duals(&self, cost: &[f64]) -> DVector<f64> {
        let m = self.t.nrows();
        DVector::from_fn(m, |k, _| {
            self.basis
                .iter()
                .enumerate()
                .map(|(i, &b)| cost[b] * self.t[(i, self.ncols + k)])
                .sum()
        })
    }

    /// Runs simplex iterations for `cost` over columns `0..allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> bool {
        let m = self.t.nrows();
        let rhs = self.rhs();
        let max_iter = 50 * (allowed + m);
        for _ in 0..max_iter {
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j) > 1e-12);
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(i, rhs)] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-15
                                || ((ratio - br).abs() <= 1e-15 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
        // Bland's rule cannot cycle; running out means numerical trouble.
        true
    }
}

pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> LpOutcome {
    let (m, ncols) = a.shape();
    debug_assert!(b.iter().all(|v| *v >= 0.0));
    let width = ncols + m + 1;
    let mut t = DMatrix::zeros(m, width);
    t.view_mut((0, 0), (m, ncols)).copy_from(a);
    for i in 0..m {
        t[(i, ncols + i)] = 1.0;
        t[(i, width - 1)] = b[i];
    }
    let mut tab = Tableau { t, basis: (ncols..ncols + m).collect(), ncols };

    // Phase I: maximize -(sum of artificials).
    let mut phase1 = vec![0.0; ncols + m];
    phase1[ncols..].iter_mut().for_each(|v| *v = -1.0);
    tab.optimize(&phase1, ncols + m);
    let infeasibility: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bidx)| bidx >= ncols)
        .map(|(i, _)| tab.t[(i, width - 1)])
        .sum();
    let scale = 1.0 + b.amax();
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible { y: tab.duals(&phase1) };
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= ncols {
            if let Some(col) =
                (0..ncols).find(|&j| !tab.basis.contains(&j) && tab.t[(i, j)].abs() > PIVOT_TOL)
            {
                tab.pivot(i, col);
            }
        }
    }

    // Phase II on the original columns only.
    let mut cost = vec![0.0; ncols + m];
    cost[..ncols].copy_from_slice(c.as_slice());
    if !tab.optimize(&cost, ncols) {
        return LpOutcome::Unbounded;
    }
    let mut x = DVector::zeros(ncols);
    for (i, &bidx) in tab.basis.iter().enumerate() {
        if bidx < ncols {
            x[bidx] = tab.t[(i, width - 1)];
        }
    }
    let value = c.dot(&x);
    LpOutcome::Optimal { x, y: tab.duals(&cost), value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_problem() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        let c = DVector::from_vec(vec![3.0, 2.0, 0.0, 0.0]);
        match solve(&a, &b, &c) {
            LpOutcome::Optimal { x, y, value } => {
                assert!((value - 12.0).abs() < 1e-12);
                assert!((x[0] - 4.0).abs() < 1e-12);
                // strong duality
                assert!((y.dot(&b) - value).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let c = DVector::from_vec(vec![1.0, 0.0]);
        match solve(&a, &b, &c) {
            LpOutcome::Infeasible { y } => {
                assert!(y.dot(&b) < 0.0);
                for j in 0..2 {
                    assert!(a.column(j).dot(&y) >= -1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness() {
        // max x1 s.t. x1 - x2 = 1
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let c = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(solve(&a, &b, &c), LpOutcome::Unbounded));
    }
}
