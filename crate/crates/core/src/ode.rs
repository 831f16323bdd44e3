//! Initial-value integration of `-y'' + q y = lambda^2 y` from 0 to `a`.
//!
//! Classical fixed-step RK4 on the potential grid; stage values of `q` at
//! midpoints come from cubic interpolation so the scheme keeps its fourth
//! order for smooth potentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::RobinReggeProblem;

/// Boundary traces of the regularized solution at `x = a`:
/// `phi(a, lambda)` and `phi'(a, lambda)` for the solution with
/// `phi(0) = 1`, `phi'(0) = h`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryTrace {
    pub lambda: Complex64,
    pub phi: Complex64,
    pub phi_prime: Complex64,
}

const OVERFLOW_GUARD: f64 = 1e150;

/// Integrate the problem's ODE and return the boundary trace at `x = a`.
pub fn boundary_trace(problem: &RobinReggeProblem, lambda: Complex64) -> Result<BoundaryTrace> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidArgument("non-finite lambda".into()));
    }
    let grid = problem.q().grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let lam2 = lambda * lambda;

    let mut y = Complex64::new(1.0, 0.0);
    let mut v = problem.h();

    // q at nodes comes straight from the samples; midpoints are interpolated
    let q_vals = problem.q().values();
    for i in 0..n - 1 {
        let x = grid.node(i);
        let q0 = q_vals[i];
        let qm = problem.q_at(x + 0.5 * h);
        let q1 = q_vals[i + 1];

        let f = |q: Complex64, y: Complex64| (q - lam2) * y;

        let k1y = v;
        let k1v = f(q0, y);
        let k2y = v + k1v * (0.5 * h);
        let k2v = f(qm, y + k1y * (0.5 * h));
        let k3y = v + k2v * (0.5 * h);
        let k3v = f(qm, y + k2y * (0.5 * h));
        let k4y = v + k3v * h;
        let k4v = f(q1, y + k3y * h);

        y += (k1y + (k2y + k3y) * 2.0 + k4y) * (h / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);

        if y.norm() > OVERFLOW_GUARD || v.norm() > OVERFLOW_GUARD {
            return Err(Error::Overflow {
                re: lambda.re,
                im: lambda.im,
            });
        }
    }

    Ok(BoundaryTrace {
        lambda,
        phi: y,
        phi_prime: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexSignal, Grid};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_problem(h: Complex64, n: usize) -> RobinReggeProblem {
        let g = Grid::half(1.0, n).unwrap();
        let q = ComplexSignal::zeros(g);
        RobinReggeProblem::new(q, h, 3.0, c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn free_equation_at_pi() {
        let p = free_problem(c(0.0, 0.0), 1025);
        let tr = boundary_trace(&p, c(PI, 0.0)).unwrap();
        assert!((tr.phi - c(-1.0, 0.0)).norm() < 1e-10);
        assert!(tr.phi_prime.norm() < 1e-10);
    }

    #[test]
    fn robin_initial_data_closed_form() {
        // phi = cos(lambda x) + h sin(lambda x)/lambda
        let p = free_problem(c(2.0, 0.0), 513);
        let tr = boundary_trace(&p, c(PI, 0.0)).unwrap();
        assert!((tr.phi - c(-1.0, 0.0)).norm() < 1e-9);
        assert!((tr.phi_prime - c(-2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn constant_shift_closed_form() {
        // q = const c: phi(a) = cos(mu a) with mu^2 = lambda^2 - c, h = 0
        let g = Grid::half(1.0, 513).unwrap();
        let qc = c(0.8, -0.3);
        let q = ComplexSignal::from_fn(g, |_| qc);
        let p = RobinReggeProblem::new(q, c(0.0, 0.0), 3.0, c(0.0, 0.0)).unwrap();
        let lambda = c(2.0, 0.4);
        let mu = (lambda * lambda - qc).sqrt();
        let tr = boundary_trace(&p, lambda).unwrap();
        assert!(
            (tr.phi - mu.cos()).norm() < 1e-9,
            "phi={} want={}",
            tr.phi,
            mu.cos()
        );
        assert!((tr.phi_prime + mu * mu.sin()).norm() < 1e-8);
    }

    #[test]
    fn complex_lambda_against_closed_form() {
        let p = free_problem(c(0.0, 0.0), 1025);
        let lambda = c(4.0, 0.6);
        let tr = boundary_trace(&p, lambda).unwrap();
        assert!((tr.phi - lambda.cos()).norm() < 1e-10 * lambda.cos().norm().max(1.0));
        assert!((tr.phi_prime + lambda * lambda.sin()).norm() < 1e-9);
    }

    #[test]
    fn overflow_reported() {
        let p = free_problem(c(0.0, 0.0), 65);
        let r = boundary_trace(&p, c(0.0, 800.0));
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }
}

