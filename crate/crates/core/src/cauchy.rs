//! Cauchy data `{K_t(a,.), K_x(a,.), omega}` and everything built from it:
//! the synthesized boundary traces eta1/eta2, zeros and residues of the Weyl
//! function, perturbation metrics, and the fixed-point recovery of the
//! potential.

use num_complex::Complex64;

use crate::delta::Background;
use crate::error::{Error, Result};
use crate::exppoly::sin_over_lambda;
use crate::goursat::{backward_march, smoothed_derivative};
use crate::grid::{
    check_same_grid, filon_cos, filon_sin, l2_distance, trapezoid, ComplexSignal, GridKind,
};

/// Edge traces of the transmutation kernel: `K1 = K_t(a,.)`,
/// `K2 = K_x(a,.)` on `[0,a]`, plus `omega = K(a,a)`.
#[derive(Debug, Clone)]
pub struct CauchyData {
    k1: ComplexSignal,
    k2: ComplexSignal,
    omega: Complex64,
}

impl CauchyData {
    pub fn new(k1: ComplexSignal, k2: ComplexSignal, omega: Complex64) -> Result<Self> {
        if k1.grid().kind() != GridKind::Half {
            return Err(Error::InvalidArgument(
                "Cauchy data must live on a half grid [0, a]".into(),
            ));
        }
        check_same_grid(&k1, &k2)?;
        if !omega.re.is_finite() || !omega.im.is_finite() {
            return Err(Error::InvalidArgument("non-finite omega".into()));
        }
        Ok(CauchyData { k1, k2, omega })
    }

    pub fn k1(&self) -> &ComplexSignal {
        &self.k1
    }

    pub fn k2(&self) -> &ComplexSignal {
        &self.k2
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn a(&self) -> f64 {
        self.k1.grid().a()
    }

    /// Edge values `K(a, t) = omega - integral_t^a K1` on the data grid.
    pub fn edge_values(&self) -> Vec<Complex64> {
        self.k1
            .cumulative_from_right()
            .into_iter()
            .map(|v| self.omega - v)
            .collect()
    }

    /// Synthesized boundary traces:
    /// `eta1 = cos(lambda a) + omega sin(lambda a)/lambda
    ///        - integral K1(t) sin(lambda t)/lambda dt`,
    /// `eta2 = -lambda sin(lambda a) + omega cos(lambda a)
    ///        + integral K2(t) cos(lambda t) dt`.
    pub fn eta(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let a = self.a();
        let h = self.k1.grid().spacing();
        let nodes: Vec<f64> = self.k1.grid().nodes().collect();

        let int1: Vec<Complex64> = self
            .k1
            .values()
            .iter()
            .zip(&nodes)
            .map(|(&k, &t)| k * sin_over_lambda(lambda, t))
            .collect();
        let int2: Vec<Complex64> = self
            .k2
            .values()
            .iter()
            .zip(&nodes)
            .map(|(&k, &t)| k * (lambda * t).cos())
            .collect();

        let eta1 = (lambda * a).cos() + self.omega * sin_over_lambda(lambda, a)
            - trapezoid(&int1, h);
        let eta2 = -lambda * (lambda * a).sin()
            + self.omega * (lambda * a).cos()
            + trapezoid(&int2, h);
        (eta1, eta2)
    }

    /// `d eta2 / d lambda`, closed form.
    pub fn eta2_prime_lambda(&self, lambda: Complex64) -> Complex64 {
        let a = self.a();
        let h = self.k1.grid().spacing();
        let nodes: Vec<f64> = self.k1.grid().nodes().collect();
        let int: Vec<Complex64> = self
            .k2
            .values()
            .iter()
            .zip(&nodes)
            .map(|(&k, &t)| k * t * (lambda * t).sin())
            .collect();
        -(lambda * a).sin() - lambda * a * (lambda * a).cos()
            - self.omega * a * (lambda * a).sin()
            - trapezoid(&int, h)
    }

    /// `d eta2 / d z` in the `z = lambda^2` variable. A short `z`-series
    /// covers the removable division near `lambda = 0`.
    pub fn eta2_prime_z(&self, z: Complex64) -> Complex64 {
        let lambda = z.sqrt();
        if lambda.norm() >= 1e-4 {
            return self.eta2_prime_lambda(lambda) / (2.0 * lambda);
        }
        let a = self.a();
        let h = self.k1.grid().spacing();
        let nodes: Vec<f64> = self.k1.grid().nodes().collect();
        // series in z: -lambda sin(lambda a) = -a z + a^3 z^2/6 - ..., etc.
        let term1 = Complex64::new(-a, 0.0) + z * a.powi(3) / 3.0;
        let term2 = self.omega * (Complex64::new(-a * a / 2.0, 0.0) + z * a.powi(4) / 12.0);
        let int: Vec<Complex64> = self
            .k2
            .values()
            .iter()
            .zip(&nodes)
            .map(|(&k, &t)| k * (-t * t / 2.0 + z * t.powi(4) / 12.0))
            .collect();
        term1 + term2 + trapezoid(&int, h)
    }

    /// Weyl function `M(z) = eta1 / eta2`.
    pub fn weyl_value(&self, z: Complex64) -> Complex64 {
        let (e1, e2) = self.eta(z.sqrt());
        e1 / e2
    }
}

/// Zeros of `eta2` in the `z`-plane with ordering and separation metadata.
#[derive(Debug, Clone)]
pub struct WeylZeros {
    /// Zeros sorted by modulus, repeated per multiplicity.
    pub zeros: Vec<Complex64>,
    /// Principal square roots `rho_n = sqrt(z_n)`.
    pub rho: Vec<Complex64>,
    /// Multiplicity of each listed zero.
    pub multiplicities: Vec<u32>,
    /// First index from which zeros are simple and modulus-separated.
    pub n1: usize,
    /// Radius of the disk separating head from tail.
    pub gamma0_radius: f64,
}

fn newton_zero<F>(mut f: F, seed: Complex64, tol: f64, max_iter: usize) -> Result<Complex64>
where
    F: FnMut(Complex64) -> (Complex64, Complex64),
{
    let mut x = seed;
    for _ in 0..max_iter {
        let (v, d) = f(x);
        if d.norm() < 1e-300 {
            break;
        }
        let step = v / d;
        x -= step;
        if step.norm() <= tol * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    Err(Error::NewtonDivergence {
        re: seed.re,
        im: seed.im,
    })
}

/// Winding number of `f` along a circle; adaptive phase tracking keeps each
/// sampled phase step below pi/2.
fn winding_circle<F>(mut f: F, center: Complex64, radius: f64) -> Result<i64>
where
    F: FnMut(Complex64) -> Complex64,
{
    for attempt in 0..5 {
        let r = radius * (1.0 + 0.1 * attempt as f64);
        let mut n = 64usize;
        'refine: loop {
            let mut total = 0.0f64;
            let mut prev = f(center + Complex64::new(r, 0.0));
            if prev.norm() < 1e-8 * (1.0 + r) {
                break 'refine; // too close to a zero, dilate
            }
            let mut ok = true;
            for j in 1..=n {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let zp = center + Complex64::from_polar(r, th);
                let cur = f(zp);
                if cur.norm() < 1e-8 * (1.0 + r) {
                    ok = false;
                    break;
                }
                let step = (cur / prev).arg();
                if step.abs() > std::f64::consts::FRAC_PI_2 {
                    if n >= 1 << 16 {
                        ok = false;
                        break;
                    }
                    n *= 2;
                    continue 'refine;
                }
                total += step;
                prev = cur;
            }
            if !ok {
                break 'refine;
            }
            let w = total / (2.0 * std::f64::consts::PI);
            if (w - w.round()).abs() > 1e-3 {
                if n < 1 << 16 {
                    n *= 2;
                    continue 'refine;
                }
                break 'refine;
            }
            return Ok(w.round() as i64);
        }
    }
    Err(Error::ContourRetryLimit)
}

/// Locate the first `count` zeros of `eta2(z)` (by modulus), their
/// multiplicities, the separation index `n1`, and the head/tail disk radius.
pub fn eta2_zeros(data: &CauchyData, count: usize) -> Result<WeylZeros> {
    if count < 4 {
        return Err(Error::InvalidArgument(
            "zero count must be at least 4".into(),
        ));
    }
    let a = data.a();
    let base = std::f64::consts::PI / a;
    let mut found: Vec<Complex64> = Vec::new();
    let dedupe_tol = 1e-7 * base * base;
    for k in 0..=(count + 3) {
        let seed = Complex64::new((k as f64 * base).powi(2), 0.0);
        let zero = newton_zero(
            |z| {
                let (_, e2) = data.eta(z.sqrt());
                (e2, data.eta2_prime_z(z))
            },
            seed,
            1e-13,
            60,
        );
        if let Ok(z) = zero {
            if !found.iter().any(|f| (f - z).norm() < dedupe_tol * (1.0 + z.norm())) {
                found.push(z);
            }
        }
    }
    found.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    if found.len() < count {
        return Err(Error::ContourInconsistency {
            expected: count,
            located: found.len(),
        });
    }
    found.truncate(count + 2);

    // multiplicities by small-circle winding
    let mut mults: Vec<u32> = Vec::with_capacity(found.len());
    for (i, &z) in found.iter().enumerate() {
        let gap = found
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &w)| (w - z).norm())
            .fold(f64::INFINITY, f64::min)
            .min(base * base);
        let radius = (0.25 * gap).max(1e-9 * (1.0 + z.norm()));
        let w = winding_circle(
            |zz| {
                let (_, e2) = data.eta(zz.sqrt());
                e2
            },
            z,
            radius,
        )?;
        if w < 1 {
            return Err(Error::ContourInconsistency {
                expected: 1,
                located: w.max(0) as usize,
            });
        }
        mults.push(w as u32);
    }

    // expand multiplicity into repeated listing, re-truncate to `count`
    let mut zeros: Vec<Complex64> = Vec::new();
    let mut multiplicities: Vec<u32> = Vec::new();
    for (z, m) in found.iter().zip(&mults) {
        for _ in 0..*m {
            zeros.push(*z);
            multiplicities.push(*m);
        }
    }
    zeros.truncate(count);
    multiplicities.truncate(count);

    // head-count consistency: winding on a mid-radius circle must agree with
    // the listing
    let r_check = if count >= 2 {
        0.5 * (zeros[count - 1].norm() + zeros[count - 2].norm()).max(1e-6)
    } else {
        zeros[count - 1].norm() + 1.0
    };
    let inside = zeros.iter().filter(|z| z.norm() < r_check).count();
    let w = winding_circle(
        |zz| {
            let (_, e2) = data.eta(zz.sqrt());
            e2
        },
        Complex64::new(0.0, 0.0),
        r_check,
    )?;
    if w as usize != inside {
        return Err(Error::ContourInconsistency {
            expected: inside,
            located: w.max(0) as usize,
        });
    }

    // n1: all zeros from n1 on are simple and modulus-separated from below
    let mut n1 = None;
    for n in 1..zeros.len() {
        let simple_tail = (n..zeros.len()).all(|k| multiplicities[k] == 1);
        let separated = zeros[n].norm() > zeros[n - 1].norm() + 1e-9 * (1.0 + zeros[n].norm());
        if simple_tail && separated {
            n1 = Some(n);
            break;
        }
    }
    let n1 = n1.ok_or_else(|| {
        Error::OutOfRange("no separation index n1 found among computed zeros".into())
    })?;
    let gamma0_radius = 0.5 * (zeros[n1].norm() + zeros[n1 - 1].norm());

    let rho = zeros.iter().map(|z| z.sqrt()).collect();
    Ok(WeylZeros {
        zeros,
        rho,
        multiplicities,
        n1,
        gamma0_radius,
    })
}

/// Residues and boundary samples of the Weyl function.
#[derive(Debug, Clone)]
pub struct WeylDiagnostics {
    pub zeros: WeylZeros,
    /// `M_n = eta1(z_n)/eta2'(z_n)` for each simple zero index `n >= n1`.
    pub residues: Vec<Complex64>,
    /// Generalized residues for head indices `n < n1`: for each distinct head
    /// zero, orders `v = 0..k_n-1` by small-circle quadrature.
    pub head_residues: Vec<Vec<Complex64>>,
    /// `M(z)` sampled at 256 equi-angular points of the separating circle.
    pub weyl_samples: Vec<Complex64>,
}

/// Compute residues `M_n` for the simple range and `M(z)` samples on the
/// separating circle.
pub fn weyl_residues(data: &CauchyData, zeros: &WeylZeros) -> Result<WeylDiagnostics> {
    let mut residues = Vec::new();
    for n in zeros.n1..zeros.zeros.len() {
        let z = zeros.zeros[n];
        let d = data.eta2_prime_z(z);
        if d.norm() < 1e-12 {
            return Err(Error::NearMultipleZero(d.norm()));
        }
        let (e1, _) = data.eta(z.sqrt());
        residues.push(e1 / d);
    }

    // distinct head zeros with their multiplicities
    let mut head_residues = Vec::new();
    let mut n = 0usize;
    while n < zeros.n1 {
        let z = zeros.zeros[n];
        let k_n = zeros.multiplicities[n] as usize;
        let gap = zeros
            .zeros
            .iter()
            .filter(|w| (*w - z).norm() > 1e-12 * (1.0 + z.norm()))
            .map(|w| (w - z).norm())
            .fold(f64::INFINITY, f64::min)
            .min(zeros.gamma0_radius);
        let radius = 1e-3 * gap;
        let npts = 128usize;
        let mut orders = Vec::with_capacity(k_n);
        for v in 0..k_n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..npts {
                let th = 2.0 * std::f64::consts::PI * j as f64 / npts as f64;
                let zz = z + Complex64::from_polar(radius, th);
                let mut p = Complex64::new(1.0, 0.0);
                for _ in 0..v {
                    p *= zz - z;
                }
                acc += data.weyl_value(zz) * p * Complex64::from_polar(radius, th);
            }
            orders.push(acc / npts as f64);
        }
        head_residues.push(orders);
        n += k_n;
    }

    let mut weyl_samples = Vec::with_capacity(256);
    for j in 0..256 {
        let th = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
        let z = Complex64::from_polar(zeros.gamma0_radius, th);
        weyl_samples.push(data.weyl_value(z));
    }

    Ok(WeylDiagnostics {
        zeros: zeros.clone(),
        residues,
        head_residues,
        weyl_samples,
    })
}

/// Distance metrics between two Cauchy-data sets.
#[derive(Debug, Clone)]
pub struct PerturbationMetrics {
    /// Max of the two L2 distances of `K1`, `K2`.
    pub xi: f64,
    /// Combined Weyl-data distance.
    pub omega_metric: f64,
    /// Per-index `xi_n = |rho_n - rho~_n| + |M_n - M~_n|`, `n >= n1`.
    pub xi_n: Vec<(usize, f64)>,
}

/// Compute `Xi`, `Omega`, and the tail sequence `xi_n`, with Weyl sums
/// truncated at `count` computed zeros.
pub fn perturbation_metrics(
    base: &CauchyData,
    tilde: &CauchyData,
    count: usize,
) -> Result<PerturbationMetrics> {
    let xi = l2_distance(base.k1(), tilde.k1())?.max(l2_distance(base.k2(), tilde.k2())?);

    let zeros_base = eta2_zeros(base, count)?;
    let zeros_tilde = eta2_zeros(tilde, count)?;
    let diag_base = weyl_residues(base, &zeros_base)?;
    let diag_tilde = weyl_residues(tilde, &zeros_tilde)?;

    let n1 = zeros_base.n1;
    let mut xi_n = Vec::new();
    let mut tail_sq = 0.0f64;
    for n in n1..count.min(zeros_tilde.zeros.len()) {
        let drho = (zeros_base.rho[n] - zeros_tilde.rho[n]).norm();
        let dres = if n - n1 < diag_base.residues.len() && n - n1 < diag_tilde.residues.len() {
            (diag_base.residues[n - n1] - diag_tilde.residues[n - n1]).norm()
        } else {
            0.0
        };
        let v = drho + dres;
        xi_n.push((n, v));
        tail_sq += (n as f64 * v).powi(2);
    }

    // sup over the base separating circle of |M - M~|
    let mut sup = 0.0f64;
    for j in 0..256 {
        let th = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
        let z = Complex64::from_polar(zeros_base.gamma0_radius, th);
        sup = sup.max((base.weyl_value(z) - tilde.weyl_value(z)).norm());
    }

    Ok(PerturbationMetrics {
        xi,
        omega_metric: sup.max(tail_sq.sqrt()),
        xi_n,
    })
}

/// Result of the fixed-point potential recovery.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub q: ComplexSignal,
    pub h: Complex64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Recover `(q, h)` from Cauchy data by fixed-point iteration: march the
/// kernel backward from the edge with the current potential, read the new
/// diagonal `D`, set `q <- 2 dD/dx` and `h <- omega - (1/2) integral q`.
pub fn reconstruct_from_cauchy(
    data: &CauchyData,
    max_iter: usize,
    tol: f64,
) -> Result<Reconstruction> {
    let grid = data.k1().grid().clone();
    let edge = data.edge_values();
    let mut q = ComplexSignal::zeros(grid.clone());
    let mut residuals: Vec<f64> = Vec::new();
    let mut increases = 0usize;

    for iter in 1..=max_iter {
        let q_at_a = *q.values().last().unwrap();
        let kernel = backward_march(&q, &edge, data.k2().values(), None, q_at_a)?;
        let diag = kernel.diagonal();
        let half_step = grid.spacing() / 2.0;
        let deriv = smoothed_derivative(&diag, half_step);
        // diagonal lives on the half-spaced grid; the potential grid is every
        // second node
        let q_next_values: Vec<Complex64> = (0..grid.n_points())
            .map(|k| deriv[2 * k] * 2.0)
            .collect();
        let q_next = ComplexSignal::new(grid.clone(), q_next_values)?;

        let res = l2_distance(&q_next, &q)?;
        if let Some(&prev) = residuals.last() {
            if res > prev {
                increases += 1;
                if increases >= 3 {
                    residuals.push(res);
                    return Err(Error::Divergence {
                        iterations: iter,
                        history: residuals,
                    });
                }
            } else {
                increases = 0;
            }
        }
        residuals.push(res);
        q = q_next;

        if res < tol {
            let h = data.omega() - q.integrate() * 0.5;
            return Ok(Reconstruction {
                q,
                h,
                iterations: iter,
                residuals,
            });
        }
    }

    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// Characteristic function synthesized from Cauchy data:
/// `delta(lambda) = f(lambda)
///   + integral (K2 + beta K(a,.)) cos(lambda t) dt
///   - i alpha integral K1 sin(lambda t) dt`.
///
/// Integrals use the Filon rule so accuracy does not degrade at the large
/// `|lambda|` reached during eigenvalue searches.
#[derive(Debug, Clone)]
pub struct SynthesizedDelta {
    background: Background,
    alpha: f64,
    spacing: f64,
    combo: Vec<Complex64>,
    combo_t: Vec<Complex64>,
    k1: Vec<Complex64>,
    k1_t: Vec<Complex64>,
}

impl SynthesizedDelta {
    pub fn new(data: &CauchyData, alpha: f64, beta: Complex64) -> Self {
        let edge = data.edge_values();
        let nodes: Vec<f64> = data.k1().grid().nodes().collect();
        let combo: Vec<Complex64> = data
            .k2()
            .values()
            .iter()
            .zip(&edge)
            .map(|(&k2, &e)| k2 + beta * e)
            .collect();
        let combo_t: Vec<Complex64> = combo.iter().zip(&nodes).map(|(&c, &t)| c * t).collect();
        let k1 = data.k1().values().to_vec();
        let k1_t: Vec<Complex64> = k1.iter().zip(&nodes).map(|(&k, &t)| k * t).collect();
        SynthesizedDelta {
            background: Background::new(data.a(), alpha, beta, data.omega()),
            alpha,
            spacing: data.k1().grid().spacing(),
            combo,
            combo_t,
            k1,
            k1_t,
        }
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn value(&self, lambda: Complex64) -> Complex64 {
        self.background.value(lambda)
            + filon_cos(&self.combo, self.spacing, 0.0, lambda)
            - Complex64::i() * self.alpha * filon_sin(&self.k1, self.spacing, 0.0, lambda)
    }

    pub fn derivative(&self, lambda: Complex64) -> Complex64 {
        self.background.eval(lambda, 1).expect("order 1 supported")
            - filon_sin(&self.combo_t, self.spacing, 0.0, lambda)
            - Complex64::i() * self.alpha * filon_cos(&self.k1_t, self.spacing, 0.0, lambda)
    }
}

/// Ratio of the free-trace values, used as the null Cauchy data in tests.
pub fn zero_data(a: f64, n_points: usize, omega: Complex64) -> Result<CauchyData> {
    let grid = crate::grid::Grid::half(a, n_points)?;
    CauchyData::new(
        ComplexSignal::zeros(grid.clone()),
        ComplexSignal::zeros(grid),
        omega,
    )
}
