//! Characteristic function and the potential-free background function.
//!
//! `delta(lambda) = phi'(a,lambda) + (i lambda alpha + beta) phi(a,lambda)`
//! vanishes exactly at the eigenvalues. Splitting off the kernel integrals
//! leaves the background
//! `f(lambda) = -lambda (sin - i alpha cos)(lambda a)
//!            + (omega + beta) cos(lambda a) + i alpha omega sin(lambda a)`,
//! whose lambda-derivatives are available in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::boundary_trace;
use crate::problem::RobinReggeProblem;

/// Characteristic function via the ODE boundary trace.
pub fn char_delta(problem: &RobinReggeProblem, lambda: Complex64) -> Result<Complex64> {
    let tr = boundary_trace(problem, lambda)?;
    let coef = Complex64::i() * lambda * problem.alpha() + problem.beta();
    Ok(tr.phi_prime + coef * tr.phi)
}

/// Parameters of the background function.
#[derive(Debug, Clone, Copy)]
pub struct Background {
    pub a: f64,
    pub alpha: f64,
    pub beta: Complex64,
    pub omega: Complex64,
}

impl Background {
    pub fn new(a: f64, alpha: f64, beta: Complex64, omega: Complex64) -> Self {
        Background {
            a,
            alpha,
            beta,
            omega,
        }
    }

    pub fn for_problem(problem: &RobinReggeProblem) -> Self {
        Background {
            a: problem.a(),
            alpha: problem.alpha(),
            beta: problem.beta(),
            omega: problem.omega(),
        }
    }

    /// `nu`-th derivative of `f` at `lambda`, analytic forms (`nu <= 4`).
    ///
    /// Writing `f = A(lambda) sin(lambda a) + B(lambda) cos(lambda a)` with
    /// `A = -lambda + i alpha omega` and `B = i alpha lambda + omega + beta`,
    /// the Leibniz rule collapses to two extra terms because `A`, `B` are
    /// affine.
    pub fn eval(&self, lambda: Complex64, nu: u32) -> Result<Complex64> {
        if nu > 4 {
            return Err(Error::UnsupportedOrder(nu));
        }
        let a = self.a;
        let i = Complex64::i();
        let big_a = -lambda + i * self.alpha * self.omega;
        let big_b = i * self.alpha * lambda + self.omega + self.beta;
        let x = lambda * a;
        let apow = a.powi(nu as i32);
        let mut out = big_a * apow * sin_deriv(nu, x) + big_b * apow * cos_deriv(nu, x);
        if nu >= 1 {
            let apow1 = a.powi(nu as i32 - 1) * nu as f64;
            out += (-sin_deriv(nu - 1, x) + i * self.alpha * cos_deriv(nu - 1, x)) * apow1;
        }
        Ok(out)
    }

    pub fn value(&self, lambda: Complex64) -> Complex64 {
        self.eval(lambda, 0).expect("order 0 always supported")
    }
}

fn sin_deriv(nu: u32, x: Complex64) -> Complex64 {
    match nu % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

fn cos_deriv(nu: u32, x: Complex64) -> Complex64 {
    match nu % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexSignal, Grid};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_problem(alpha: f64) -> RobinReggeProblem {
        let g = Grid::half(1.0, 4097).unwrap();
        RobinReggeProblem::new(ComplexSignal::zeros(g), c(0.0, 0.0), alpha, c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn closed_form_zero_of_free_delta() {
        // alpha = 3, a = 1: lambda = pi/2 + (i/2) ln 2 solves e^{2 i lambda} = -1/2
        let p = free_problem(3.0);
        let lambda = c(PI / 2.0, 0.5 * 2.0f64.ln());
        let d = char_delta(&p, lambda).unwrap();
        assert!(d.norm() < 1e-9, "|delta| = {}", d.norm());
    }

    #[test]
    fn delta_at_origin_vanishes_for_free_problem() {
        let p = free_problem(3.0);
        let d = char_delta(&p, c(0.0, 0.0)).unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn background_matches_delta_for_free_problem() {
        // q = 0, h = 0: kernel vanishes, so delta == f with omega = 0
        let p = free_problem(3.0);
        let f = Background::for_problem(&p);
        let mut worst = 0.0f64;
        for k in 0..200 {
            let lambda = c(-10.0 + 0.1 * k as f64, 0.3);
            let d = char_delta(&p, lambda).unwrap();
            let fv = f.value(lambda);
            worst = worst.max((d - fv).norm());
        }
        assert!(worst < 1e-9, "max |delta - f| = {worst}");
    }

    #[test]
    fn background_derivative_against_finite_differences() {
        let f = Background::new(1.0, 3.0, c(0.1, -0.2), c(0.4, 0.25));
        let lambda = c(1.3, 0.2);
        let h = 1e-5;
        for nu in 1..=4u32 {
            let lo = f.eval(lambda - h, nu - 1).unwrap();
            let hi = f.eval(lambda + h, nu - 1).unwrap();
            let fd = (hi - lo) / (2.0 * h);
            let an = f.eval(lambda, nu).unwrap();
            assert!(
                (fd - an).norm() < 1e-6 * (1.0 + an.norm()),
                "nu={nu} fd={fd} analytic={an}"
            );
        }
        // spec's pinned point: omega = beta = 0, alpha = 3, a = 1 gives f'(0) = 3i
        let f0 = Background::new(1.0, 3.0, c(0.0, 0.0), c(0.0, 0.0));
        assert!(f0.value(c(0.0, 0.0)).norm() < 1e-15);
        let d1 = f0.eval(c(0.0, 0.0), 1).unwrap();
        assert!((d1 - c(0.0, 3.0)).norm() < 1e-12);
        let fd = (f0.value(c(1e-5, 0.0)) - f0.value(c(-1e-5, 0.0))) / 2e-5;
        assert!((fd - d1).norm() < 1e-6);
    }

    #[test]
    fn order_five_rejected() {
        let f = Background::new(1.0, 3.0, c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            f.eval(c(0.0, 0.0), 5),
            Err(Error::UnsupportedOrder(5))
        ));
    }
}
