//! Eigenvalue computation: zeros of the characteristic function in the
//! horizontal strip dictated by the asymptotics, found by lattice-seeded
//! Newton iteration for the tails and argument-principle rectangle sweeps
//! for the middle, then indexed over the branch index set.
//!
//! The spectrum's tails sit near lattice sites `(|n| - (j+1)/2) pi/a sgn n`
//! shifted up by `i c`, `c = ln|(alpha+1)/(1-alpha)| / (2a)`. A full strip
//! always carries exactly one more zero than the data index set has slots
//! (the set omits index 1), so after anchoring both tails the middle is left
//! with one surplus zero, which is dropped. For the potential-free problem
//! this drops the zero at the origin and every kept eigenvalue lies on the
//! closed-form lattice.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::cauchy::SynthesizedDelta;
use crate::error::{Error, Result};
use crate::goursat::goursat_kernel;
use crate::problem::{Branch, RobinReggeProblem, Spectrum};

/// Tunables for the search; the defaults implement the documented choices.
#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    /// Half-height of the search strip around `Im = c`; default
    /// `|c| + 2 + L1 norm of q`.
    pub strip_margin: Option<f64>,
    /// Distance below which refined zeros are considered one zero
    /// (multiplicity clustering); default `1e-6 * pi / a`.
    pub cluster_tol: Option<f64>,
    /// Half-width of the middle region swept with rectangles; default
    /// `3 pi / a`.
    pub middle_halfwidth: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            strip_margin: None,
            cluster_tol: None,
            middle_halfwidth: None,
        }
    }
}

/// Strip center height for given `alpha`.
pub fn strip_center(alpha: f64, a: f64) -> f64 {
    ((alpha + 1.0) / (1.0 - alpha)).abs().ln() / (2.0 * a)
}

#[derive(Debug, Clone, Copy)]
struct LocatedZero {
    z: Complex64,
    mult: u32,
}

/// Newton iteration with the provided value/derivative pair.
fn newton<F>(mut f: F, seed: Complex64, tol: f64, max_iter: usize) -> Result<Complex64>
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

/// Winding number of `f` along the rectangle `[lo.re, hi.re] x [lo.im,
/// hi.im]`, with phase-tracked boundary sampling. When the boundary passes
/// within `1e-8`-scale of a zero the rectangle is dilated by 10% about its
/// center and retried, up to five times. Returns the count together with
/// the bounds actually used, so callers localize within the counted region.
fn winding_rectangle<F>(
    f: &mut F,
    lo: Complex64,
    hi: Complex64,
) -> Result<(i64, Complex64, Complex64)>
where
    F: FnMut(Complex64) -> Complex64,
{
    let center = (lo + hi) * 0.5;
    for attempt in 0..5 {
        let s = 1.0 + 0.1 * attempt as f64;
        let half = (hi - lo) * 0.5 * s;
        let (ulo, uhi) = (center - half, center + half);
        let corners = [
            Complex64::new(ulo.re, ulo.im),
            Complex64::new(uhi.re, ulo.im),
            Complex64::new(uhi.re, uhi.im),
            Complex64::new(ulo.re, uhi.im),
        ];
        match winding_polygon(f, &corners) {
            Ok(Some(w)) => return Ok((w, ulo, uhi)),
            Ok(None) => continue, // boundary grazed a zero, dilate
            Err(e) => return Err(e),
        }
    }
    Err(Error::ContourRetryLimit)
}

/// Phase-tracked winding along a closed polygon. Returns `None` when the
/// boundary passes too close to a zero.
fn winding_polygon<F>(f: &mut F, corners: &[Complex64]) -> Result<Option<i64>>
where
    F: FnMut(Complex64) -> Complex64,
{
    let scale: f64 = corners.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut total = 0.0f64;
    for i in 0..corners.len() {
        let a = corners[i];
        let b = corners[(i + 1) % corners.len()];
        let mut n = 16usize;
        'seg: loop {
            let mut seg_total = 0.0f64;
            let mut prev = f(a);
            if prev.norm() < 1e-8 * scale {
                return Ok(None);
            }
            for j in 1..=n {
                let zp = a + (b - a) * (j as f64 / n as f64);
                let cur = f(zp);
                if cur.norm() < 1e-8 * scale {
                    return Ok(None);
                }
                let step = (cur / prev).arg();
                if step.abs() > std::f64::consts::FRAC_PI_2 {
                    if n >= 1 << 15 {
                        return Ok(None);
                    }
                    n *= 2;
                    continue 'seg;
                }
                seg_total += step;
                prev = cur;
            }
            total += seg_total;
            break;
        }
    }
    let w = total / (2.0 * std::f64::consts::PI);
    if (w - w.round()).abs() > 1e-3 {
        return Ok(None);
    }
    Ok(Some(w.round() as i64))
}

/// Recursively localize all zeros inside a rectangle. Rectangles that still
/// report more than one zero below the clustering tolerance are recorded as
/// a multiple zero at their center.
#[allow(clippy::too_many_arguments)]
fn sweep_rectangle<F, G>(
    f: &mut F,
    fprime: &mut G,
    lo: Complex64,
    hi: Complex64,
    cluster_tol: f64,
    out: &mut Vec<LocatedZero>,
    depth: usize,
) -> Result<()>
where
    F: FnMut(Complex64) -> Complex64,
    G: FnMut(Complex64) -> Complex64,
{
    let (count, lo, hi) = winding_rectangle(f, lo, hi)?;
    if count <= 0 {
        return Ok(());
    }
    let diag = (hi - lo).norm();
    if diag < cluster_tol || depth > 48 {
        out.push(LocatedZero {
            z: (lo + hi) * 0.5,
            mult: count as u32,
        });
        return Ok(());
    }
    if count == 1 {
        let center = (lo + hi) * 0.5;
        if let Ok(z) = newton(|x| (f(x), fprime(x)), center, 1e-13, 50) {
            if z.re >= lo.re - 1e-12 && z.re <= hi.re + 1e-12 && z.im >= lo.im - 1e-12
                && z.im <= hi.im + 1e-12
            {
                out.push(LocatedZero { z, mult: 1 });
                return Ok(());
            }
        }
        // Newton escaped the box: contour-shrinking fallback below
    }
    let mid = (lo + hi) * 0.5;
    let quads = [
        (lo, mid),
        (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
        (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
        (mid, hi),
    ];
    for (qlo, qhi) in quads {
        sweep_rectangle(f, fprime, qlo, qhi, cluster_tol, out, depth + 1)?;
    }
    Ok(())
}

/// Assign branch indices to located zeros (sorted by real part, multiple
/// zeros repeated). Anchors both tails on the asymptotic lattice, then drops
/// the single surplus zero left over in the middle: the leftmost one on
/// branch 0 (index 0 keeps the other), the only one on branch 1.
fn assign_indices(
    zeros: &[LocatedZero],
    branch: Branch,
    a: f64,
    n_max: i32,
) -> Result<BTreeMap<i32, Complex64>> {
    let mut flat: Vec<Complex64> = Vec::new();
    for z in zeros {
        for _ in 0..z.mult {
            flat.push(z.z);
        }
    }
    flat.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    if flat.len() < 6 {
        return Err(Error::ContourInconsistency {
            expected: 6,
            located: flat.len(),
        });
    }
    let shift = (branch.as_u8() as f64 + 1.0) / 2.0;
    let pi_a = std::f64::consts::PI / a;
    // top anchor: index of the rightmost zero per the positive-tail lattice
    let n_top = (flat.last().unwrap().re / pi_a + shift).round() as i32;
    let n_bot = (flat.first().unwrap().re / pi_a - shift).round() as i32;
    if n_top < 2 || n_bot > -1 {
        return Err(Error::OutOfRange(format!(
            "tail anchors n_top={n_top}, n_bot={n_bot} leave no room for the middle"
        )));
    }

    let mut entries: BTreeMap<i32, Complex64> = BTreeMap::new();
    let mut right = flat.len();
    let mut n = n_top;
    while n >= 2 {
        if right == 0 {
            return Err(Error::ContourInconsistency {
                expected: (n_top - 1) as usize,
                located: flat.len(),
            });
        }
        right -= 1;
        entries.insert(n, flat[right]);
        n -= 1;
    }
    let mut left = 0usize;
    let mut n = n_bot;
    while n <= -1 {
        if left >= right {
            return Err(Error::ContourInconsistency {
                expected: n_bot.unsigned_abs() as usize,
                located: flat.len(),
            });
        }
        entries.insert(n, flat[left]);
        left += 1;
        n += 1;
    }

    let leftover = right - left;
    match branch {
        Branch::J0 => {
            if leftover != 2 {
                return Err(Error::ContourInconsistency {
                    expected: 2,
                    located: leftover,
                });
            }
            // drop the leftmost leftover; the other becomes index 0
            entries.insert(0, flat[left + 1]);
        }
        Branch::J1 => {
            if leftover != 1 {
                return Err(Error::ContourInconsistency {
                    expected: 1,
                    located: leftover,
                });
            }
            // single surplus zero: dropped
        }
    }

    entries.retain(|&k, _| k.abs() <= n_max);
    Ok(entries)
}

/// Compute the spectrum of a problem up to index `n_max`.
pub fn compute_spectrum(problem: &RobinReggeProblem, n_max: u32) -> Result<Spectrum> {
    compute_spectrum_with(problem, n_max, &SpectrumOptions::default())
}

pub fn compute_spectrum_with(
    problem: &RobinReggeProblem,
    n_max: u32,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    let a = problem.a();
    let alpha = problem.alpha();
    let branch = problem.branch();
    let c = strip_center(alpha, a);
    if !c.is_finite() {
        return Err(Error::OutOfRange(format!(
            "strip center undefined for alpha = {alpha}"
        )));
    }
    let pi_a = std::f64::consts::PI / a;
    let strip_h = options
        .strip_margin
        .unwrap_or_else(|| c.abs() + 2.0 + problem.q_l1());
    let cluster_tol = options.cluster_tol.unwrap_or(1e-6 * pi_a);
    // off both half-integer and integer lattices, so rectangle edges stay
    // away from the free-problem zeros
    let middle_r = options.middle_halfwidth.unwrap_or(3.25 * pi_a);
    let re_max = (n_max as f64 + 1.0) * pi_a;

    let kernel = goursat_kernel(problem)?;
    let data = kernel.extract_cauchy_data()?;
    let synth = SynthesizedDelta::new(&data, alpha, problem.beta());

    let mut value = |z: Complex64| synth.value(z);
    let mut deriv = |z: Complex64| synth.derivative(z);

    // middle: rectangle sweep
    let mut middle: Vec<LocatedZero> = Vec::new();
    {
        let n_cols = (2.0 * middle_r / (pi_a / 2.0)).ceil() as usize;
        let n_rows = (2.0 * strip_h / (pi_a / 2.0)).ceil() as usize;
        let dx = 2.0 * middle_r / n_cols as f64;
        let dy = 2.0 * strip_h / n_rows as f64;
        for i in 0..n_cols {
            for j in 0..n_rows {
                let lo = Complex64::new(-middle_r + i as f64 * dx, c - strip_h + j as f64 * dy);
                let hi = Complex64::new(lo.re + dx, lo.im + dy);
                sweep_rectangle(&mut value, &mut deriv, lo, hi, cluster_tol, &mut middle, 0)?;
            }
        }
    }

    // tails: Newton from lattice seeds
    let mut tails: Vec<LocatedZero> = Vec::new();
    let k_hi = n_max as i32 + 2;
    for k in -k_hi..=k_hi {
        let site = match branch {
            Branch::J0 => (k as f64 - 0.5) * pi_a,
            Branch::J1 => k as f64 * pi_a,
        };
        if site.abs() <= middle_r {
            continue; // middle owns this region
        }
        if site.abs() > re_max + pi_a {
            continue;
        }
        let seed = Complex64::new(site, c);
        let z = newton(|x| (value(x), deriv(x)), seed, 1e-13, 50)?;
        if z.re.abs() > re_max + 0.5 * pi_a || (z.im - c).abs() > strip_h {
            continue;
        }
        if (z.re - site).abs() > 0.5 * pi_a {
            return Err(Error::ContourInconsistency {
                expected: 1,
                located: 0,
            });
        }
        tails.push(LocatedZero { z, mult: 1 });
    }

    // merge, deduping zeros seen both by an edge rectangle (after dilation)
    // and by a tail seed; the structural leftover check in assign_indices
    // then validates the global count
    let mut all = middle;
    all.extend(tails);
    all.sort_by(|x, y| {
        x.z.re
            .partial_cmp(&y.z.re)
            .unwrap()
            .then(x.z.im.partial_cmp(&y.z.im).unwrap())
    });
    let mut deduped: Vec<LocatedZero> = Vec::new();
    for z in all {
        if let Some(last) = deduped.last_mut() {
            if (last.z - z.z).norm() < 3.0 * cluster_tol {
                last.mult = last.mult.max(z.mult);
                continue;
            }
        }
        deduped.push(z);
    }
    let entries = assign_indices(&deduped, branch, a, n_max as i32)?;
    Spectrum::new(branch, entries, cluster_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexSignal, Grid};
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_problem(alpha: f64, n: usize) -> RobinReggeProblem {
        let g = Grid::half(1.0, n).unwrap();
        RobinReggeProblem::new(ComplexSignal::zeros(g), c64(0.0, 0.0), alpha, c64(0.0, 0.0))
            .unwrap()
    }

    #[test]
    fn free_spectrum_alpha_three_on_lattice() {
        // every kept eigenvalue satisfies e^{2 i lambda} = (1-alpha)/(1+alpha) = -1/2
        let p = free_problem(3.0, 257);
        let s = compute_spectrum(&p, 12).unwrap();
        assert_eq!(s.branch(), Branch::J0);
        assert_eq!(s.len(), Branch::J0.window(12).len());
        let target = c64(-0.5, 0.0);
        for (&n, &lam) in s.entries() {
            let e = (Complex64::i() * lam * 2.0).exp();
            assert!(
                (e - target).norm() < 1e-12,
                "n={n} lambda={lam} e^{{2 i lambda}}={e}"
            );
        }
        // constant strip height, P = 0
        let cc = strip_center(3.0, 1.0);
        assert!((cc - 0.5 * 2.0f64.ln()).abs() < 1e-15);
        for (&n, &lam) in s.entries() {
            assert!((lam.im - cc).abs() < 1e-10, "n={n} Im={}", lam.im);
        }
        // tail indexing matches the lattice on the positive side
        for n in 2..=12 {
            let lam = s.value(n).unwrap();
            assert!((lam.re - (n as f64 - 0.5) * PI).abs() < 1e-10);
        }
        // negative side sits one lattice step up: Re lambda_n = (n + 1/2) pi
        for n in -12..=-1 {
            let lam = s.value(n).unwrap();
            assert!((lam.re - (n as f64 + 0.5) * PI).abs() < 1e-10);
        }
        // index 0 holds the remaining middle zero at pi/2
        let lam0 = s.value(0).unwrap();
        assert!((lam0.re - 0.5 * PI).abs() < 1e-10);
    }

    #[test]
    fn free_spectrum_alpha_third_j1_pattern() {
        let p = free_problem(1.0 / 3.0, 257);
        let s = compute_spectrum(&p, 10).unwrap();
        assert_eq!(s.branch(), Branch::J1);
        assert_eq!(s.len(), Branch::J1.window(10).len());
        let cc = strip_center(1.0 / 3.0, 1.0);
        for (&n, &lam) in s.entries() {
            // pattern n pi + i c: real part on the integer lattice
            let k = (lam.re / PI).round();
            assert!(
                (lam.re - k * PI).abs() < 1e-10 && (lam.im - cc).abs() < 1e-10,
                "n={n} lambda={lam}"
            );
        }
        // the j=1 middle: index -1 holds the zero at i c (k = 0)
        let lam_m1 = s.value(-1).unwrap();
        assert!(lam_m1.re.abs() < 1e-10);
    }

    #[test]
    fn eigenvalue_spacing_free_problem() {
        let p = free_problem(3.0, 257);
        let s = compute_spectrum(&p, 8).unwrap();
        for n in 2..8 {
            let gap = s.value(n + 1).unwrap().re - s.value(n).unwrap().re;
            assert!((gap - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_problem_zeros_of_delta() {
        // computed eigenvalues make delta vanish (checked against the ODE form)
        let g = Grid::half(1.0, 513).unwrap();
        let q = ComplexSignal::from_fn(g, |x| c64(1.0, 0.5) * (PI * x).sin());
        let p = RobinReggeProblem::new(q, c64(0.2, -0.1), 3.0, c64(0.1, 0.0)).unwrap();
        let s = compute_spectrum(&p, 8).unwrap();
        assert_eq!(s.len(), Branch::J0.window(8).len());
        for (&n, &lam) in s.entries() {
            let d = crate::delta::char_delta(&p, lam).unwrap();
            // scale by the derivative size ~ alpha a |lambda|
            let tol = 1e-4 * (1.0 + lam.norm());
            assert!(d.norm() < tol, "n={n} lambda={lam} |delta|={}", d.norm());
        }
    }

    #[test]
    fn asymptotic_residuals_bounded() {
        let g = Grid::half(1.0, 513).unwrap();
        let q = ComplexSignal::from_fn(g, |x| c64(1.0, 0.5) * (PI * x).sin());
        let p = RobinReggeProblem::new(q, c64(0.2, -0.1), 3.0, c64(0.1, 0.0)).unwrap();
        let s = compute_spectrum(&p, 24).unwrap();
        let cc = strip_center(3.0, 1.0);
        let mut bound = 0.0f64;
        for (&n, &lam) in s.entries() {
            if n.abs() < 4 {
                continue;
            }
            let lead = c64(Branch::J0.lattice_re(n, 1.0), cc);
            let resid = (lam - lead) * c64(n as f64, 0.0);
            bound = bound.max(resid.norm());
        }
        // n (lambda_n - leading) stays bounded (here by a modest constant)
        assert!(bound < 2.0, "residual bound {bound}");
    }
}
