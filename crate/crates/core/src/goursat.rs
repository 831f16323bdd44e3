//! Transmutation kernel via the Goursat problem, on a characteristic grid.
//!
//! The kernel solves `K_xx - K_tt = q(x) K` on the triangle `0 <= t <= x <= a`
//! with `K(x,x) = h + (1/2) integral of q` and `K_t(x,0) = 0`. Extending `K`
//! evenly in `t` turns this into a Goursat problem with data on both
//! characteristics `t = x` and `t = -x`. In characteristic coordinates
//! `xi = x+t`, `eta = x-t` the scheme below integrates the equivalent
//! integral equation cell by cell; writing `A = 1 - (delta^2/16) q` and
//! `B = 1 + (delta^2/16) q` at the cell corners, each cell satisfies
//!
//! `A L(p,r) + A L(p-1,r-1) = B L(p-1,r) + B L(p,r-1)`,
//!
//! which is solved for the high corner when marching forward (kernel from a
//! known potential) and for the low corner when marching backward from the
//! edge `x = a` (potential recovery). The two directions are exact algebraic
//! inverses of each other on the same grid.

use num_complex::Complex64;

use crate::cauchy::CauchyData;
use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, Grid};
use crate::problem::{cubic_interp, RobinReggeProblem};

/// Kernel values on the characteristic grid.
///
/// Node `(p, r)` sits at `xi = p*delta`, `eta = r*delta`, i.e.
/// `x = (p+r) delta/2`, `t = (p-r) delta/2`, for `0 <= r <= p`,
/// `p + r <= 2m`. `delta` equals the potential-grid spacing, so the edge
/// `x = a` lands exactly on the potential grid in `t`.
#[derive(Debug, Clone)]
pub struct GoursatKernel {
    a: f64,
    delta: f64,
    m: usize,
    rows: Vec<Vec<Complex64>>,
    omega: Complex64,
}

fn row_len(m: usize, p: usize) -> usize {
    p.min(2 * m - p) + 1
}

fn alloc_rows(m: usize) -> Vec<Vec<Complex64>> {
    (0..=2 * m)
        .map(|p| vec![Complex64::new(0.0, 0.0); row_len(m, p)])
        .collect()
}

impl GoursatKernel {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn panels(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// Kernel value at characteristic node `(p, r)`.
    pub fn value(&self, p: usize, r: usize) -> Complex64 {
        self.rows[p][r]
    }

    /// `K(a, k*delta)` for `k = 0..=m`.
    pub fn edge_values(&self) -> Vec<Complex64> {
        (0..=self.m)
            .map(|k| self.rows[self.m + k][self.m - k])
            .collect()
    }

    /// Diagonal `K(x, x)` on the half-spaced grid `x = s*delta/2`.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..=2 * self.m).map(|s| self.rows[s][0]).collect()
    }

    /// `phi(a, lambda)` reconstructed from the edge row of the kernel:
    /// `cos(lambda a) + integral of K(a,t) cos(lambda t) dt`.
    pub fn phi_from_edge(&self, lambda: Complex64) -> Complex64 {
        let edge = self.edge_values();
        let vals: Vec<Complex64> = edge
            .iter()
            .enumerate()
            .map(|(k, &e)| e * (lambda * (k as f64 * self.delta)).cos())
            .collect();
        (lambda * self.a).cos() + crate::grid::trapezoid(&vals, self.delta)
    }

    /// One-sided second-order edge derivatives: returns the Cauchy data
    /// `{K_t(a,.), K_x(a,.), omega}` on the potential grid.
    pub fn extract_cauchy_data(&self) -> Result<CauchyData> {
        let m = self.m;
        let d = self.delta;
        let edge = self.edge_values();

        let mut k1 = vec![Complex64::new(0.0, 0.0); m + 1];
        for k in 1..m {
            k1[k] = (edge[k + 1] - edge[k - 1]) / (2.0 * d);
        }
        k1[m] = (edge[m] * 3.0 - edge[m - 1] * 4.0 + edge[m - 2]) / (2.0 * d);
        // k1[0] = K_t(a, 0) = 0 by even symmetry in t

        let mut k2 = vec![Complex64::new(0.0, 0.0); m + 1];
        for k in 0..=m {
            let lxi = if k == 0 {
                // corner t = 0: L_xi = L_eta by symmetry
                (self.rows[m][m] * 3.0 - self.rows[m][m - 1] * 4.0 + self.rows[m][m - 2])
                    / (2.0 * d)
            } else {
                let p = m + k;
                let r = m - k;
                (self.rows[p][r] * 3.0 - self.rows[p - 1][r] * 4.0 + self.rows[p - 2][r])
                    / (2.0 * d)
            };
            k2[k] = lxi * 2.0 - k1[k];
        }

        let grid = Grid::half(self.a, m + 1)?;
        Ok(CauchyData::new(
            ComplexSignal::new(grid.clone(), k1)?,
            ComplexSignal::new(grid, k2)?,
            self.omega,
        )?)
    }
}

/// Cell coefficients `A`, `B` per level `s` (`x = s*delta/2`).
fn cell_coefficients(q: &ComplexSignal, m: usize, delta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let quarter = delta * delta / 16.0;
    let mut av = Vec::with_capacity(2 * m + 1);
    let mut bv = Vec::with_capacity(2 * m + 1);
    for s in 0..=2 * m {
        let x = s as f64 * delta / 2.0;
        let qx = cubic_interp(q, x);
        av.push(Complex64::new(1.0, 0.0) - qx * quarter);
        bv.push(Complex64::new(1.0, 0.0) + qx * quarter);
    }
    (av, bv)
}

/// Diagonal data `G(x) = h + (1/2) integral_0^x q` at `x = s*delta/2`.
fn diagonal_data(q: &ComplexSignal, h: Complex64, m: usize, delta: f64) -> Vec<Complex64> {
    let qv = q.values();
    let mut g_nodes = vec![Complex64::new(0.0, 0.0); m + 1];
    for k in 1..=m {
        g_nodes[k] = g_nodes[k - 1] + (qv[k - 1] + qv[k]) * (0.25 * delta);
    }
    let mut out = Vec::with_capacity(2 * m + 1);
    for s in 0..=2 * m {
        if s % 2 == 0 {
            out.push(h + g_nodes[s / 2]);
        } else {
            let k = s / 2;
            let x_mid = (s as f64) * delta / 2.0;
            let q_mid = cubic_interp(q, x_mid);
            out.push(h + g_nodes[k] + (qv[k] + q_mid) * (0.125 * delta));
        }
    }
    out
}

/// Solve the Goursat problem for the transmutation kernel of a problem.
///
/// Successive-approximation sweeps over the triangle; each sweep updates
/// nodes in dependency order, so the first sweep already lands on the fixed
/// point and the second confirms it. Residual history is kept for the
/// divergence contract.
pub fn goursat_kernel(problem: &RobinReggeProblem) -> Result<GoursatKernel> {
    let q = problem.q();
    let m = q.grid().n_points() - 1;
    if m < 4 {
        return Err(Error::InvalidArgument(
            "potential grid too coarse for kernel computation".into(),
        ));
    }
    let delta = q.grid().spacing();
    let (av, bv) = cell_coefficients(q, m, delta);
    for a in &av {
        if a.norm() < 0.5 {
            return Err(Error::InvalidArgument(
                "grid too coarse for this potential (cell coefficient near zero)".into(),
            ));
        }
    }
    let g = diagonal_data(q, problem.h(), m, delta);

    let mut rows = alloc_rows(m);
    for (p, row) in rows.iter_mut().enumerate() {
        row[0] = g[p];
    }

    let scale = 1.0 + g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    for _sweep in 0..100 {
        let mut change = 0.0f64;
        for s in 2..=2 * m {
            let p_lo = s.div_ceil(2);
            for p in p_lo..s {
                let r = s - p;
                // reflected source when the eta-neighbor crosses t = 0
                let src_eta = if r > p - 1 {
                    rows[p][p - 1]
                } else {
                    rows[p - 1][r]
                };
                let new = (bv[s - 1] * (src_eta + rows[p][r - 1]) - av[s - 2] * rows[p - 1][r - 1])
                    / av[s];
                let delta_val = (new - rows[p][r]).norm();
                if delta_val > change {
                    change = delta_val;
                }
                rows[p][r] = new;
            }
        }
        history.push(change);
        if change <= 1e-12 * scale {
            converged = true;
            break;
        }
        let k = history.len();
        if k >= 4 && history[k - 1] > history[k - 2] && history[k - 2] > history[k - 3] {
            return Err(Error::SweepDivergence { history });
        }
    }
    if !converged {
        return Err(Error::SweepDivergence { history });
    }

    let omega = rows[2 * m][0];
    Ok(GoursatKernel {
        a: problem.a(),
        delta,
        m,
        rows,
        omega,
    })
}

/// Kernel recovered by marching the cell scheme backward from the edge
/// `x = a`.
#[derive(Debug, Clone)]
pub struct BackwardKernel {
    pub delta: f64,
    pub m: usize,
    pub rows: Vec<Vec<Complex64>>,
}

impl BackwardKernel {
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..=2 * self.m).map(|s| self.rows[s][0]).collect()
    }
}

/// March the kernel backward from edge values `K(a, k delta)` and the normal
/// derivative `K_x(a, k delta)`, using the potential `q`.
///
/// The start-up level next to the edge comes from a Taylor step unless
/// `seed_level` supplies it directly (the forward kernel's own values make
/// the backward march its exact algebraic inverse).
pub fn backward_march(
    q: &ComplexSignal,
    edge: &[Complex64],
    k_x_edge: &[Complex64],
    seed_level: Option<&[Complex64]>,
    q_at_a: Complex64,
) -> Result<BackwardKernel> {
    let m = q.grid().n_points() - 1;
    if edge.len() != m + 1 || k_x_edge.len() != m + 1 {
        return Err(Error::GridMismatch(format!(
            "edge data of length {} on a potential grid with {} nodes",
            edge.len(),
            m + 1
        )));
    }
    let delta = q.grid().spacing();
    let (av, bv) = cell_coefficients(q, m, delta);
    for a in &av {
        if a.norm() < 0.5 {
            return Err(Error::InvalidArgument(
                "grid too coarse for this potential (cell coefficient near zero)".into(),
            ));
        }
    }

    let mut rows = alloc_rows(m);
    // level 2m: the edge, t = k delta at (m+k, m-k)
    for k in 0..=m {
        rows[m + k][m - k] = edge[k];
    }

    // level 2m-1: nodes (p, r), p + r = 2m-1, at x = a - delta/2 and
    // half-integer t
    let grid_edge = Grid::half(q.grid().a(), m + 1)?;
    let edge_sig = ComplexSignal::new(grid_edge.clone(), edge.to_vec())?;
    let kx_sig = ComplexSignal::new(grid_edge, k_x_edge.to_vec())?;
    let mut edge_tt = vec![Complex64::new(0.0, 0.0); m + 1];
    for k in 1..m {
        edge_tt[k] = (edge[k + 1] - edge[k] * 2.0 + edge[k - 1]) / (delta * delta);
    }
    edge_tt[0] = edge_tt[1];
    edge_tt[m] = edge_tt[m - 1];
    let grid_edge2 = Grid::half(q.grid().a(), m + 1)?;
    let tt_sig = ComplexSignal::new(grid_edge2, edge_tt)?;

    match seed_level {
        Some(level) => {
            let expect = row_len(m, m - 1).min(usize::MAX);
            if level.len() != expect {
                return Err(Error::GridMismatch(format!(
                    "seed level of length {}, expected {}",
                    level.len(),
                    expect
                )));
            }
            // caller supplies L(p, r) for p + r = 2m - 1 ordered by r
            for (r, &v) in level.iter().enumerate() {
                let p = 2 * m - 1 - r;
                rows[p][r] = v;
            }
        }
        None => {
            for r in 0..row_len(m, m - 1) {
                let p = 2 * m - 1 - r;
                let t = (p as f64 - r as f64) * delta / 2.0;
                let e = cubic_interp(&edge_sig, t);
                let kx = cubic_interp(&kx_sig, t);
                let tt = cubic_interp(&tt_sig, t);
                rows[p][r] =
                    e - kx * (0.5 * delta) + (tt + q_at_a * e) * (delta * delta / 8.0);
            }
        }
    }

    for s in (0..=2 * m - 2).rev() {
        for r in 0..=s / 2 {
            let p = s - r;
            let src_eta = if r + 1 > p {
                rows[p + 1][p]
            } else {
                rows[p][r + 1]
            };
            rows[p][r] = (bv[s + 1] * (src_eta + rows[p + 1][r]) - av[s + 2] * rows[p + 1][r + 1])
                / av[s];
        }
    }

    Ok(BackwardKernel { delta, m, rows })
}

/// Smoothing five-point least-squares first derivative on a uniform grid
/// (quadratic fit; asymmetric windows at the ends).
pub fn smoothed_derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    assert!(n >= 5, "need at least 5 samples");
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        out[i] = (values[i - 2] * -2.0 - values[i - 1] + values[i + 1] + values[i + 2] * 2.0)
            / (10.0 * h);
    }
    // ends: fit a quadratic to the nearest 5 points and differentiate there
    let edge = |w: &[Complex64], s: f64| -> Complex64 {
        // normal equations for sum((a0 + a1 s + a2 s^2 - y)^2), s = 0..4
        let (s0, s1, s2, s3, s4) = (5.0, 10.0, 30.0, 100.0, 354.0);
        let mut b = [Complex64::new(0.0, 0.0); 3];
        for (k, &y) in w.iter().enumerate() {
            let sk = k as f64;
            b[0] += y;
            b[1] += y * sk;
            b[2] += y * sk * sk;
        }
        let mut mat: [[f64; 3]; 3] = [[s0, s1, s2], [s1, s2, s3], [s2, s3, s4]];
        let mut rhs = b;
        // tiny Gaussian elimination
        for col in 0..3 {
            let mut piv = col;
            for row in col + 1..3 {
                if mat[row][col].abs() > mat[piv][col].abs() {
                    piv = row;
                }
            }
            mat.swap(col, piv);
            rhs.swap(col, piv);
            for row in col + 1..3 {
                let f = mat[row][col] / mat[col][col];
                for cc in col..3 {
                    mat[row][cc] -= f * mat[col][cc];
                }
                rhs[row] = rhs[row] - rhs[col] * f;
            }
        }
        let mut sol = [Complex64::new(0.0, 0.0); 3];
        for row in (0..3).rev() {
            let mut acc = rhs[row];
            for cc in row + 1..3 {
                acc -= sol[cc] * mat[row][cc];
            }
            sol[row] = acc / mat[row][row];
        }
        sol[1] + sol[2] * (2.0 * s)
    };
    for i in 0..2 {
        out[i] = edge(&values[0..5], i as f64) / h;
    }
    for i in n - 2..n {
        out[i] = edge(&values[n - 5..n], (i - (n - 5)) as f64) / h;
    }
    out
}
