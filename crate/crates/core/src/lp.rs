//! Revised simplex solver for two-player zero-sum matrix games.
//!
//! With the payoff shifted to be strictly positive, the column player's
//! problem `max Σy  s.t.  A y ≤ 1, y ≥ 0` is feasible at the origin, so a
//! single phase suffices; the row strategy is the dual solution. Population
//! payoff tables are low-rank and full of near-duplicate rows, so the basis
//! is refactored from the original data every iteration. Columns enter by
//! largest reduced cost; Bland's rule, which stalls on rounding noise in such
//! tables, only takes over as an anti-cycling fallback on very long runs.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;

const COST_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 20_000;

pub(crate) struct LpSolution {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

/// LU factorization with partial pivoting of a square matrix.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(mut a: Vec<Vec<f64>>) -> Self {
        let m = a.len();
        let mut perm: Vec<usize> = (0..m).collect();
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| abs(a[x][c]).total_cmp(&abs(a[y][c])))
                .unwrap_or(c);
            a.swap(c, p);
            perm.swap(c, p);
            let pv = a[c][c];
            if pv == 0.0 {
                continue;
            }
            for r in c + 1..m {
                let f = a[r][c] / pv;
                a[r][c] = f;
                if f != 0.0 {
                    for k in c + 1..m {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        Lu { lu: a, perm }
    }

    /// Solves `B x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..m {
            for k in 0..r {
                x[r] -= self.lu[r][k] * x[k];
            }
        }
        for r in (0..m).rev() {
            for k in r + 1..m {
                x[r] -= self.lu[r][k] * x[k];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }

    /// Solves `Bᵀ y = c`.
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let m = self.lu.len();
        // Bᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = c, then Lᵀ w = z, then y = Pᵀ w.
        let mut z = c.to_vec();
        for r in 0..m {
            for k in 0..r {
                z[r] -= self.lu[k][r] * z[k];
            }
            z[r] /= self.lu[r][r];
        }
        for r in (0..m).rev() {
            for k in r + 1..m {
                z[r] -= self.lu[k][r] * z[k];
            }
        }
        let mut y = vec![0.0; m];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

/// Solves `max_x min_y xᵀ M y` for a row-major `rows × cols` matrix.
pub(crate) fn solve_zero_sum(matrix: &[Vec<f64>]) -> LpSolution {
    let m = matrix.len();
    let n = matrix[0].len();
    let min = matrix.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let shifted: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
    // Column j of [A | I]: structural for j < n, slack otherwise.
    let column = |j: usize| -> Vec<f64> {
        if j < n {
            shifted.iter().map(|r| r[j]).collect()
        } else {
            (0..m).map(|i| if i == j - n { 1.0 } else { 0.0 }).collect()
        }
    };
    let cost = |j: usize| if j < n { 1.0 } else { 0.0 };
    let ones = vec![1.0; m];
    let bland_after = 10 * (n + m);

    let factor = |basis: &[usize]| {
        let cols: Vec<Vec<f64>> = basis.iter().map(|&j| column(j)).collect();
        Lu::new((0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
    };

    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut in_basis = vec![false; n + m];
    basis.iter().for_each(|&j| in_basis[j] = true);
    for iteration in 0..MAX_PIVOTS {
        let lu = factor(&basis);
        let x = lu.solve(&ones);
        let c_b: Vec<f64> = basis.iter().map(|&j| cost(j)).collect();
        let y = lu.solve_transposed(&c_b);
        let reduced = |j: usize| -> f64 {
            if j < n {
                1.0 - (0..m).map(|i| y[i] * shifted[i][j]).sum::<f64>()
            } else {
                -y[j - n]
            }
        };
        let mut candidates = (0..n + m).filter(|&j| !in_basis[j]).map(|j| (j, reduced(j)));
        let enter = if iteration < bland_after {
            candidates.fold(None, |best: Option<(usize, f64)>, (j, r)| match best {
                Some((_, br)) if br >= r => best,
                _ if r > COST_EPS => Some((j, r)),
                _ => best,
            })
        } else {
            candidates.find(|&(_, r)| r > COST_EPS)
        };
        let Some((enter, _)) = enter else {
            break;
        };
        let d = lu.solve(&column(enter));
        let mut leave: Option<(f64, usize)> = None;
        for i in 0..m {
            if d[i] <= PIVOT_EPS {
                continue;
            }
            let ratio = x[i].max(0.0) / d[i];
            leave = match leave {
                Some((best, k)) if ratio > best || (ratio == best && basis[k] < basis[i]) => Some((best, k)),
                _ => Some((ratio, i)),
            };
        }
        // Bounded: A > 0 so every column has a positive entry.
        let Some((_, r)) = leave else { break };
        in_basis[basis[r]] = false;
        in_basis[enter] = true;
        basis[r] = enter;
    }

    let lu = factor(&basis);
    let x = lu.solve(&ones);
    let c_b: Vec<f64> = basis.iter().map(|&j| cost(j)).collect();
    let y = lu.solve_transposed(&c_b);
    let mut col = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            col[b] = x[i].max(0.0);
        }
    }
    let mut row: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    normalize(&mut col);
    normalize(&mut row);
    LpSolution { row, col }
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        let u = 1.0 / v.len() as f64;
        v.fill(u);
    }
}
