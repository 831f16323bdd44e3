//! Exponential polynomials `sum c * (it)^nu * e^{i lambda t}` with exact
//! integrals over `[-a, a]`.
//!
//! Moment-system basis functions (plain exponentials, their confluent
//! `(it)^nu` variants, and Hermite-repaired combinations) all live in this
//! class, and every inner product the moment solver needs reduces to
//! derivatives of `sin(x)/x`. Evaluating those in closed form keeps the Gram
//! matrix free of quadrature error.

use num_complex::Complex64;

use crate::grid::{ComplexSignal, Grid};

/// nu-th derivative of `sin(x)/x`, entire in `x`.
///
/// Power series for small |x|, Leibniz expansion of `sin(x) * x^{-1}`
/// otherwise. The switch point keeps the series free of heavy cancellation
/// and the Leibniz form away from the removable singularity.
pub fn sinc_derivative(nu: u32, x: Complex64) -> Complex64 {
    if x.norm() <= 8.0 {
        sinc_derivative_series(nu, x)
    } else {
        sinc_derivative_leibniz(nu, x)
    }
}

fn sinc_derivative_series(nu: u32, x: Complex64) -> Complex64 {
    let nu = nu as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let k0 = (nu + 1) / 2;
    for k in k0..=90 {
        let p = 2 * k - nu;
        // falling factorial (2k)(2k-1)...(2k-nu+1)
        let mut fall = 1.0f64;
        for j in 0..nu {
            fall *= (2 * k - j) as f64;
        }
        if fall == 0.0 {
            continue;
        }
        let mut fact = 1.0f64; // (2k+1)!
        for j in 2..=(2 * k + 1) {
            fact *= j as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut xp = Complex64::new(1.0, 0.0);
        for _ in 0..p {
            xp *= x;
        }
        let term = xp * (sign * fall / fact);
        sum += term;
        if term.norm() < 1e-18 * (sum.norm() + 1e-30) && 2 * k > nu + 8 {
            break;
        }
    }
    sum
}

fn sinc_derivative_leibniz(nu: u32, x: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut binom = 1.0f64;
    for i in 0..=nu {
        if i > 0 {
            binom = binom * (nu - i + 1) as f64 / i as f64;
        }
        let s = match i % 4 {
            0 => x.sin(),
            1 => x.cos(),
            2 => -x.sin(),
            _ => -x.cos(),
        };
        let m = nu - i;
        let mut mfact = 1.0f64;
        for j in 2..=m {
            mfact *= j as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let xpow = x.powi(-(m as i32) - 1);
        sum += s * xpow * (binom * sign * mfact);
    }
    sum
}

/// `sin(lambda t) / lambda` evaluated stably for any complex `lambda`
/// (including 0, where it equals `t`).
pub fn sin_over_lambda(lambda: Complex64, t: f64) -> Complex64 {
    sinc_derivative(0, lambda * t) * t
}

/// Exact integral of `(it)^nu e^{i mu t}` over `[-a, a]`.
pub fn moment_integral(nu: u32, mu: Complex64, a: f64) -> Complex64 {
    let scale = 2.0 * a.powi(nu as i32 + 1);
    sinc_derivative(nu, mu * a) * scale
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub coeff: Complex64,
    pub power: u32,
    pub freq: Complex64,
}

/// A finite sum of terms `coeff * (it)^power * e^{i freq t}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    /// Single term `(it)^power e^{i freq t}`.
    pub fn exponential(freq: Complex64, power: u32) -> Self {
        ExpPoly {
            terms: vec![ExpPolyTerm {
                coeff: Complex64::new(1.0, 0.0),
                power,
                freq,
            }],
        }
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| ExpPolyTerm {
                    coeff: t.coeff * s,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &ExpPoly) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        ExpPoly { terms }.compacted()
    }

    pub fn sub(&self, other: &ExpPoly) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Merge terms sharing (power, freq). Keeps term lists short through
    /// repeated divided-difference arithmetic.
    fn compacted(mut self) -> Self {
        self.terms.sort_by(|x, y| {
            x.power.cmp(&y.power).then(
                x.freq
                    .re
                    .partial_cmp(&y.freq.re)
                    .unwrap()
                    .then(x.freq.im.partial_cmp(&y.freq.im).unwrap()),
            )
        });
        let mut out: Vec<ExpPolyTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if let Some(last) = out.last_mut() {
                if last.power == t.power && (last.freq - t.freq).norm() == 0.0 {
                    last.coeff += t.coeff;
                    continue;
                }
            }
            out.push(t);
        }
        out.retain(|t| t.coeff.norm() != 0.0);
        ExpPoly { terms: out }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let it = Complex64::new(0.0, t);
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..term.power {
                p *= it;
            }
            acc += term.coeff * p * (Complex64::i() * term.freq * t).exp();
        }
        acc
    }

    pub fn sample(&self, grid: &Grid) -> ComplexSignal {
        ComplexSignal::from_fn(grid.clone(), |t| self.eval(t))
    }

    /// Exact `integral over [-a,a] of conj(self(t)) * other(t) dt`;
    /// conjugation on the first argument, matching the signal inner product.
    pub fn inner(&self, other: &ExpPoly, a: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t1 in &self.terms {
            // conj(c (it)^p e^{i f t}) = conj(c) (-1)^p (it)^p e^{-i conj(f) t}
            let sign = if t1.power % 2 == 0 { 1.0 } else { -1.0 };
            let c1 = t1.coeff.conj() * sign;
            let f1 = -t1.freq.conj();
            for t2 in &other.terms {
                acc += c1
                    * t2.coeff
                    * moment_integral(t1.power + t2.power, f1 + t2.freq, a);
            }
        }
        acc
    }

    /// Exact `integral of conj(self) * e^{i mu t}` over `[-a, a]`.
    pub fn inner_with_exponential(&self, mu: Complex64, a: f64) -> Complex64 {
        self.inner(&ExpPoly::exponential(mu, 0), a)
    }

    pub fn norm(&self, a: f64) -> f64 {
        self.inner(self, a).re.max(0.0).sqrt()
    }

    /// Sup norm on `[-a, a]` measured on a sampling grid (tests only need a
    /// coarse bound).
    pub fn sup_norm_sampled(&self, a: f64, n: usize) -> f64 {
        let mut best = 0.0f64;
        for i in 0..n {
            let t = -a + 2.0 * a * i as f64 / (n - 1) as f64;
            best = best.max(self.eval(t).norm());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, Grid};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sinc_derivative_zeroth_is_sinc() {
        let x = Complex64::new(2.3, 0.4);
        let want = x.sin() / x;
        let got = sinc_derivative(0, x);
        assert!((want - got).norm() < 1e-14);
        // removable singularity
        assert_relative_eq!(
            sinc_derivative(0, Complex64::new(0.0, 0.0)).re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sinc_derivative_series_matches_leibniz_at_switch() {
        for nu in 0..=8u32 {
            for &x in &[
                Complex64::new(7.9, 0.3),
                Complex64::new(8.1, -0.2),
                Complex64::new(-8.0, 0.5),
            ] {
                let s = sinc_derivative_series(nu, x);
                let l = sinc_derivative_leibniz(nu, x);
                assert!(
                    (s - l).norm() <= 1e-11 * (1.0 + l.norm()),
                    "nu={nu} x={x} series={s} leibniz={l}"
                );
            }
        }
    }

    #[test]
    fn sinc_derivative_matches_finite_differences() {
        // central differences on sin(x)/x as an independent check
        let f = |x: Complex64| x.sin() / x;
        let x = Complex64::new(3.7, 0.9);
        let h = 1e-5;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        assert!((sinc_derivative(1, x) - d1).norm() < 1e-9);
        let d2 = (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h);
        assert!((sinc_derivative(2, x) - d2).norm() < 1e-5);
    }

    #[test]
    fn moment_integral_against_quadrature() {
        let a = 1.3;
        let g = Grid::symmetric(a, 8193).unwrap();
        for nu in 0..=3u32 {
            for &mu in &[
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.3),
                Complex64::new(-PI, 0.35),
            ] {
                let p = ExpPoly::exponential(mu, nu);
                let sig = p.sample(&g);
                let one = ExpPoly::exponential(Complex64::new(0.0, 0.0), 0).sample(&g);
                let quad = inner_product(&sig.conj(), &one).unwrap();
                let exact = moment_integral(nu, mu, a);
                assert!(
                    (quad - exact).norm() < 2e-6 * (1.0 + exact.norm()),
                    "nu={nu} mu={mu} quad={quad} exact={exact}"
                );
            }
        }
    }

    #[test]
    fn exp_poly_inner_matches_quadrature() {
        let a = 1.0;
        let g = Grid::symmetric(a, 16385).unwrap();
        let p = ExpPoly::exponential(Complex64::new(1.5, 0.2), 1)
            .add(&ExpPoly::exponential(Complex64::new(-0.7, 0.1), 0).scale(Complex64::new(0.3, -0.4)));
        let q = ExpPoly::exponential(Complex64::new(2.5, -0.3), 2);
        let exact = p.inner(&q, a);
        let quad = inner_product(&p.sample(&g), &q.sample(&g)).unwrap();
        assert!((exact - quad).norm() < 1e-6 * (1.0 + exact.norm()));
    }

    #[test]
    fn sin_over_lambda_small_argument() {
        let t = 0.8;
        let lam = Complex64::new(1e-9, 1e-9);
        assert!((sin_over_lambda(lam, t) - Complex64::new(t, 0.0)).norm() < 1e-12);
        let lam = Complex64::new(2.0, 0.5);
        let want = (lam * t).sin() / lam;
        assert!((sin_over_lambda(lam, t) - want).norm() < 1e-13);
    }
}
