//! Uniform grids and complex sampled functions.
//!
//! Everything downstream (kernels, Cauchy data, moment solves) works with
//! [`ComplexSignal`]s: complex values sampled on a uniform [`Grid`] that is
//! either a half grid on `[0, a]` or a symmetric grid on `[-a, a]`.
//! Symmetric grids always have an odd number of nodes so that `t = 0` is a
//! node and the reflection `t -> -t` is an exact index map.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Nodes on `[0, a]`.
    Half,
    /// Nodes on `[-a, a]`, odd count, containing 0.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    n_points: usize,
    kind: GridKind,
}

impl Grid {
    pub fn half(a: f64, n_points: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("interval length a = {a}")));
        }
        if n_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid {
            a,
            n_points,
            kind: GridKind::Half,
        })
    }

    pub fn symmetric(a: f64, n_points: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("interval length a = {a}")));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "symmetric grid needs an odd node count >= 3, got {n_points}"
            )));
        }
        Ok(Grid {
            a,
            n_points,
            kind: GridKind::Symmetric,
        })
    }

    /// Symmetric grid on `[-a, a]` sharing the node spacing of a half grid
    /// with `n_half` points: `2*n_half - 1` nodes.
    pub fn symmetric_from_half(a: f64, n_half: usize) -> Result<Self> {
        Grid::symmetric(a, 2 * n_half - 1)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn start(&self) -> f64 {
        match self.kind {
            GridKind::Half => 0.0,
            GridKind::Symmetric => -self.a,
        }
    }

    pub fn span(&self) -> f64 {
        match self.kind {
            GridKind::Half => self.a,
            GridKind::Symmetric => 2.0 * self.a,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.span() / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start() + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Index of the node `-t_i` on a symmetric grid.
    pub fn reflect_index(&self, i: usize) -> usize {
        debug_assert_eq!(self.kind, GridKind::Symmetric);
        self.n_points - 1 - i
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "signal contains a non-finite value".into(),
            ));
        }
        Ok(ComplexSignal { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_points();
        ComplexSignal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: Grid, mut f: F) -> Self {
        let values = grid.nodes().map(&mut f).collect();
        ComplexSignal { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> Self {
        ComplexSignal {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Pointwise combination of two signals on the same grid.
    pub fn zip_with<F: FnMut(Complex64, Complex64) -> Complex64>(
        &self,
        other: &ComplexSignal,
        mut f: F,
    ) -> Result<Self> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(ComplexSignal {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Composite trapezoid integral of the signal.
    pub fn integrate(&self) -> Complex64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    /// Cumulative trapezoid from the right endpoint: returns `I(t) = integral
    /// from t to the last node`.
    pub fn cumulative_from_right(&self) -> Vec<Complex64> {
        let h = self.grid.spacing();
        let n = self.values.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n - 1).rev() {
            out[i] = out[i + 1] + (self.values[i] + self.values[i + 1]) * (0.5 * h);
        }
        out
    }
}

pub(crate) fn check_same_grid(g1: &ComplexSignal, g2: &ComplexSignal) -> Result<()> {
    if g1.grid != g2.grid {
        return Err(Error::GridMismatch(format!(
            "{:?}/{} points vs {:?}/{} points",
            g1.grid.kind(),
            g1.grid.n_points(),
            g2.grid.kind(),
            g2.grid.n_points()
        )));
    }
    Ok(())
}

/// `integral of g(t) e^{i lambda t}` over the sampled range, treating `g` as
/// piecewise linear between nodes (Filon-type rule). The panel weights are
/// exact for linear `g`, so the error stays `O(spacing^2)` uniformly in
/// `lambda` instead of degrading like `(lambda * spacing)^2`.
pub fn filon_exp(
    values: &[Complex64],
    spacing: f64,
    t_start: f64,
    lambda: Complex64,
) -> Complex64 {
    let n = values.len();
    debug_assert!(n >= 2);
    let w = Complex64::i() * lambda * spacing;
    // E1 = (e^w - 1)/w, E2 = (e^w (w - 1) + 1)/w^2, stable near w = 0
    let (e1, e2) = if w.norm() < 1e-4 {
        (
            Complex64::new(1.0, 0.0) + w / 2.0 + w * w / 6.0 + w * w * w / 24.0,
            Complex64::new(0.5, 0.0) + w / 3.0 + w * w / 8.0 + w * w * w / 30.0,
        )
    } else {
        let ew = w.exp();
        (
            (ew - 1.0) / w,
            (ew * (w - 1.0) + 1.0) / (w * w),
        )
    };
    let w_node = e1 * spacing - e2 * spacing; // weight of g_k within its panel
    let v_node = e2 * spacing; // weight of g_{k+1}
    let ratio = (Complex64::i() * lambda * spacing).exp();
    let mut phase = (Complex64::i() * lambda * t_start).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n - 1 {
        acc += phase * (values[k] * w_node + values[k + 1] * v_node);
        phase *= ratio;
    }
    acc
}

/// `integral of g(t) cos(lambda t)` via two Filon transforms.
pub fn filon_cos(
    values: &[Complex64],
    spacing: f64,
    t_start: f64,
    lambda: Complex64,
) -> Complex64 {
    (filon_exp(values, spacing, t_start, lambda) + filon_exp(values, spacing, t_start, -lambda))
        * 0.5
}

/// `integral of g(t) sin(lambda t)` via two Filon transforms.
pub fn filon_sin(
    values: &[Complex64],
    spacing: f64,
    t_start: f64,
    lambda: Complex64,
) -> Complex64 {
    (filon_exp(values, spacing, t_start, lambda) - filon_exp(values, spacing, t_start, -lambda))
        / (2.0 * Complex64::i())
}

pub(crate) fn trapezoid(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    let mut acc = (values[0] + values[n - 1]) * 0.5;
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc * h
}

/// `integral of conj(g1) * g2` over the common grid, trapezoid rule.
/// Conjugation sits on the first argument.
pub fn inner_product(g1: &ComplexSignal, g2: &ComplexSignal) -> Result<Complex64> {
    check_same_grid(g1, g2)?;
    let prod: Vec<Complex64> = g1
        .values()
        .iter()
        .zip(g2.values())
        .map(|(&x, &y)| x.conj() * y)
        .collect();
    Ok(trapezoid(&prod, g1.grid().spacing()))
}

/// `sqrt(integral |u|^2)` by the trapezoid rule.
pub fn l2_norm(u: &ComplexSignal) -> f64 {
    let sq: Vec<Complex64> = u
        .values()
        .iter()
        .map(|v| Complex64::new(v.norm_sqr(), 0.0))
        .collect();
    trapezoid(&sq, u.grid().spacing()).re.max(0.0).sqrt()
}

/// L2 distance of two signals on one grid.
pub fn l2_distance(u: &ComplexSignal, v: &ComplexSignal) -> Result<f64> {
    let diff = u.zip_with(v, |x, y| x - y)?;
    Ok(l2_norm(&diff))
}

/// Raw parity parts of a signal on a symmetric grid:
/// `even(t) = u(t) + u(-t)`, `odd(t) = u(t) - u(-t)`, so `even/2 + odd/2 = u`
/// exactly at every node.
pub fn parity_split(u: &ComplexSignal) -> Result<(ComplexSignal, ComplexSignal)> {
    if u.grid().kind() != GridKind::Symmetric {
        return Err(Error::AsymmetricGrid);
    }
    let n = u.len();
    let mut even = Vec::with_capacity(n);
    let mut odd = Vec::with_capacity(n);
    for i in 0..n {
        let v = u.values()[i];
        let w = u.values()[u.grid().reflect_index(i)];
        even.push(v + w);
        odd.push(v - w);
    }
    Ok((
        ComplexSignal {
            grid: u.grid().clone(),
            values: even,
        },
        ComplexSignal {
            grid: u.grid().clone(),
            values: odd,
        },
    ))
}

/// Restriction of a symmetric-grid signal to `[0, a]`.
pub fn restrict_to_half(u: &ComplexSignal) -> Result<ComplexSignal> {
    if u.grid().kind() != GridKind::Symmetric {
        return Err(Error::AsymmetricGrid);
    }
    let n_half = (u.len() + 1) / 2;
    let grid = Grid::half(u.grid().a(), n_half)?;
    let values = u.values()[n_half - 1..].to_vec();
    ComplexSignal::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_constant_one() {
        let g = Grid::symmetric(1.0, 101).unwrap();
        let one = ComplexSignal::from_fn(g, |_| c(1.0, 0.0));
        let ip = inner_product(&one, &one).unwrap();
        assert_relative_eq!(ip.re, 2.0, max_relative = 1e-14);
        assert_relative_eq!(ip.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_product_conjugates_first_argument() {
        let g = Grid::symmetric(1.0, 101).unwrap();
        let gi = ComplexSignal::from_fn(g.clone(), |_| c(0.0, 1.0));
        let one = ComplexSignal::from_fn(g, |_| c(1.0, 0.0));
        let ip = inner_product(&gi, &one).unwrap();
        assert_relative_eq!(ip.im, -2.0, max_relative = 1e-14);
        assert_relative_eq!(ip.re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_product_unit_exponential() {
        // integral of |e^{i pi t}|^2 over [-1,1] is exactly 2
        let g = Grid::symmetric(1.0, 2049).unwrap();
        let e = ComplexSignal::from_fn(g, |t| (Complex64::i() * PI * t).exp());
        let ip = inner_product(&e, &e).unwrap();
        assert!((ip - c(2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let g1 = Grid::symmetric(1.0, 101).unwrap();
        let g2 = Grid::symmetric(1.0, 103).unwrap();
        let u = ComplexSignal::zeros(g1);
        let v = ComplexSignal::zeros(g2);
        assert!(matches!(
            inner_product(&u, &v),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn l2_norm_examples() {
        let g = Grid::half(1.0, 101).unwrap();
        let zero = ComplexSignal::zeros(g.clone());
        assert_eq!(l2_norm(&zero), 0.0);

        let one = ComplexSignal::from_fn(g, |_| c(1.0, 0.0));
        assert_relative_eq!(l2_norm(&one), 1.0, max_relative = 1e-14);

        // |sin(pi t)| on [0,1]: L2 norm 1/sqrt(2)
        let g = Grid::half(1.0, 1025).unwrap();
        let s = ComplexSignal::from_fn(g, |t| c((PI * t).sin(), 0.0));
        assert!((l2_norm(&s) - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn parity_split_examples() {
        let g = Grid::symmetric(1.0, 201).unwrap();
        // u(t) = t: pure odd
        let u = ComplexSignal::from_fn(g.clone(), |t| c(t, 0.0));
        let (even, odd) = parity_split(&u).unwrap();
        for (i, t) in g.nodes().enumerate() {
            assert!(even.values()[i].norm() < 1e-15);
            assert_relative_eq!(odd.values()[i].re, 2.0 * t, epsilon = 1e-14);
        }
        // u(t) = t^2: pure even
        let u = ComplexSignal::from_fn(g.clone(), |t| c(t * t, 0.0));
        let (even, odd) = parity_split(&u).unwrap();
        for (i, t) in g.nodes().enumerate() {
            assert_relative_eq!(even.values()[i].re, 2.0 * t * t, epsilon = 1e-14);
            assert!(odd.values()[i].norm() < 1e-15);
        }
        // u(t) = 1 + i t
        let u = ComplexSignal::from_fn(g.clone(), |t| c(1.0, t));
        let (even, odd) = parity_split(&u).unwrap();
        for (i, t) in g.nodes().enumerate() {
            assert!((even.values()[i] - c(2.0, 0.0)).norm() < 1e-15);
            assert!((odd.values()[i] - c(0.0, 2.0 * t)).norm() < 1e-14);
        }
    }

    #[test]
    fn parity_split_requires_symmetric_grid() {
        let g = Grid::half(1.0, 11).unwrap();
        let u = ComplexSignal::zeros(g);
        assert!(matches!(parity_split(&u), Err(Error::AsymmetricGrid)));
    }

    #[test]
    fn quadrature_order_two() {
        // halving the spacing shrinks the error on a smooth integrand by >= 3.9
        let exact = 4.0 / PI; // integral of cos(pi t / 2) over [-1,1]
        let err = |n: usize| {
            let g = Grid::symmetric(1.0, n).unwrap();
            let u = ComplexSignal::from_fn(g, |t| c((PI * t / 2.0).cos(), 0.0));
            (u.integrate().re - exact).abs()
        };
        let e1 = err(129);
        let e2 = err(257);
        assert!(e1 / e2 >= 3.9, "ratio {}", e1 / e2);
    }

    #[test]
    fn filon_matches_closed_forms() {
        let g = Grid::half(1.0, 513).unwrap();
        let vals: Vec<Complex64> = g.nodes().map(|t| c(t, 0.0)).collect();
        for &lam in &[c(0.0, 0.0), c(1e-6, 0.0), c(40.0, 0.3), c(-120.0, 0.5)] {
            let got = filon_exp(&vals, g.spacing(), 0.0, lam);
            // integral of t e^{i lam t} over [0,1]
            let w = Complex64::i() * lam;
            let want = if lam.norm() < 1e-3 {
                c(0.5, 0.0) + w / 3.0 + w * w / 8.0 + w * w * w / 30.0
            } else {
                let e = w.exp();
                e / w - (e - 1.0) / (w * w)
            };
            assert!(
                (got - want).norm() < 2e-6,
                "lam={lam} got={got} want={want}"
            );
        }
        // uniform accuracy in lambda: linear integrand is exact
        let ones: Vec<Complex64> = g.nodes().map(|_| c(1.0, 0.0)).collect();
        let lam = c(300.0, 0.0);
        let got = filon_exp(&ones, g.spacing(), 0.0, lam);
        let i = Complex64::i();
        let want = ((i * lam).exp() - 1.0) / (i * lam);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn cumulative_from_right_matches_full_integral() {
        let g = Grid::half(1.0, 513).unwrap();
        let u = ComplexSignal::from_fn(g, |t| c(t, -t * t));
        let cum = u.cumulative_from_right();
        assert!((cum[0] - u.integrate()).norm() < 1e-14);
        assert_eq!(cum[512], c(0.0, 0.0));
    }
}
