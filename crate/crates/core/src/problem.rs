//! Problem and spectrum containers shared by the forward and inverse sides.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, GridKind};

/// Spectral branch: `J0` for `alpha > 1`, `J1` for `alpha < 1`.
///
/// The full index set is all integers for `J0` and the nonzero integers for
/// `J1`; in both cases the data for the inverse problem omits index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    J0,
    J1,
}

impl Branch {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || alpha == 1.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive and != 1, got {alpha}"
            )));
        }
        Ok(if alpha > 1.0 { Branch::J0 } else { Branch::J1 })
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Branch::J0 => 0,
            Branch::J1 => 1,
        }
    }

    pub fn from_u8(j: u8) -> Result<Self> {
        match j {
            0 => Ok(Branch::J0),
            1 => Ok(Branch::J1),
            _ => Err(Error::InvalidArgument(format!("branch must be 0 or 1, got {j}"))),
        }
    }

    /// True when `n` belongs to the data index set (full set minus the
    /// excluded index 1, and minus 0 on the `J1` branch).
    pub fn contains(self, n: i32) -> bool {
        match self {
            Branch::J0 => n != 1,
            Branch::J1 => n != 0 && n != 1,
        }
    }

    /// Indices `|n| <= n_max` of the data index set, ascending.
    pub fn window(self, n_max: i32) -> Vec<i32> {
        (-n_max..=n_max).filter(|&n| self.contains(n)).collect()
    }

    /// Leading real part of the eigenvalue at index `n` (tail asymptotics):
    /// `(|n| - (j+1)/2) * pi/a * sgn n`.
    pub fn lattice_re(self, n: i32, a: f64) -> f64 {
        let shift = (self.as_u8() as f64 + 1.0) / 2.0;
        let n_abs = n.unsigned_abs() as f64;
        (n_abs - shift) * std::f64::consts::PI / a * (n.signum() as f64)
    }
}

/// The forward object: interval, sampled complex potential, Robin constant
/// `h`, boundary coefficients `alpha` (positive, != 1) and `beta`.
#[derive(Debug, Clone)]
pub struct RobinReggeProblem {
    a: f64,
    q: ComplexSignal,
    h: Complex64,
    alpha: f64,
    beta: Complex64,
}

impl RobinReggeProblem {
    pub fn new(q: ComplexSignal, h: Complex64, alpha: f64, beta: Complex64) -> Result<Self> {
        if q.grid().kind() != GridKind::Half {
            return Err(Error::InvalidArgument(
                "potential must be sampled on a half grid [0, a]".into(),
            ));
        }
        Branch::from_alpha(alpha)?;
        Ok(RobinReggeProblem {
            a: q.grid().a(),
            q,
            h,
            alpha,
            beta,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> &ComplexSignal {
        &self.q
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn branch(&self) -> Branch {
        if self.alpha > 1.0 {
            Branch::J0
        } else {
            Branch::J1
        }
    }

    /// `omega = h + (1/2) integral of q`: the kernel's corner value.
    pub fn omega(&self) -> Complex64 {
        self.h + self.q.integrate() * 0.5
    }

    /// L1 norm of the potential (used for search-strip sizing).
    pub fn q_l1(&self) -> f64 {
        let abs = self.q.map(|v| Complex64::new(v.norm(), 0.0));
        abs.integrate().re
    }

    /// Potential value at arbitrary `x` by cubic interpolation of the samples
    /// (exact at nodes, 4th-order between them).
    pub fn q_at(&self, x: f64) -> Complex64 {
        cubic_interp(&self.q, x)
    }
}

/// 4-point (cubic) Lagrange interpolation on a uniform grid, clamped at the
/// ends. Exact at nodes.
pub(crate) fn cubic_interp(sig: &ComplexSignal, x: f64) -> Complex64 {
    let g = sig.grid();
    let h = g.spacing();
    let n = g.n_points();
    let s = (x - g.start()) / h;
    let i = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
    let frac = s - i as f64;
    if frac.abs() < 1e-14 {
        return sig.values()[i];
    }
    if n < 4 {
        // linear fallback for tiny grids
        let v0 = sig.values()[i];
        let v1 = sig.values()[i + 1];
        return v0 + (v1 - v0) * frac;
    }
    let i0 = i.saturating_sub(1).min(n - 4);
    let u = s - i0 as f64;
    let v = &sig.values()[i0..i0 + 4];
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &vk) in v.iter().enumerate() {
        let mut w = 1.0f64;
        for m in 0..4 {
            if m != k {
                w *= (u - m as f64) / (k as f64 - m as f64);
            }
        }
        acc += vk * w;
    }
    acc
}

/// Indexed eigenvalue data over a finite window of the branch index set.
///
/// Equal values occupy consecutive indices; `reps` maps each block's first
/// index to the block multiplicity. `tail_index` is the smallest `n0 >= 1`
/// with all multiplicities 1 for `|n| >= n0`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    branch: Branch,
    entries: BTreeMap<i32, Complex64>,
    reps: BTreeMap<i32, u32>,
    tail_index: i32,
}

impl Spectrum {
    /// Build from indexed entries, detecting blocks of exactly-equal
    /// neighboring values (tolerance `coincide_tol`).
    pub fn new(
        branch: Branch,
        entries: BTreeMap<i32, Complex64>,
        coincide_tol: f64,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        for (&n, v) in &entries {
            if !branch.contains(n) {
                return Err(Error::IndexMismatch(format!(
                    "index {n} is outside the branch-{} data set",
                    branch.as_u8()
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite eigenvalue at index {n}"
                )));
            }
        }
        let idx: Vec<i32> = entries.keys().copied().collect();
        let mut reps: BTreeMap<i32, u32> = BTreeMap::new();
        let mut i = 0;
        while i < idx.len() {
            let n = idx[i];
            let v = entries[&n];
            let mut m = 1u32;
            while i + (m as usize) < idx.len() {
                let nn = idx[i + m as usize];
                // blocks must be index-consecutive (assumption on neighboring
                // multiple values)
                if nn != idx[i + m as usize - 1] + 1 {
                    break;
                }
                if (entries[&nn] - v).norm() <= coincide_tol {
                    m += 1;
                } else {
                    break;
                }
            }
            reps.insert(n, m);
            i += m as usize;
        }
        let tail_index = reps
            .iter()
            .filter(|(_, &m)| m > 1)
            .map(|(&n, &m)| (n.abs()).max((n + m as i32 - 1).abs()) + 1)
            .max()
            .unwrap_or(1);
        Ok(Spectrum {
            branch,
            entries,
            reps,
            tail_index,
        })
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn entries(&self) -> &BTreeMap<i32, Complex64> {
        &self.entries
    }

    pub fn value(&self, n: i32) -> Option<Complex64> {
        self.entries.get(&n).copied()
    }

    /// Representative indices (first index of each equal-value block) with
    /// multiplicities.
    pub fn representatives(&self) -> &BTreeMap<i32, u32> {
        &self.reps
    }

    pub fn tail_index(&self) -> i32 {
        self.tail_index
    }

    pub fn n_max(&self) -> i32 {
        self.entries
            .keys()
            .map(|n| n.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest distance between distinct eigenvalues; `None` when all values
    /// coincide.
    pub fn min_gap(&self) -> Option<f64> {
        let vals: Vec<Complex64> = self.reps.keys().map(|n| self.entries[n]).collect();
        let mut best: Option<f64> = None;
        for i in 0..vals.len() {
            for j in (i + 1)..vals.len() {
                let d = (vals[i] - vals[j]).norm();
                if d > 0.0 {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }
}

/// Constants recovered from eigenvalue asymptotics.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub alpha_hat: f64,
    pub branch_hat: Branch,
    /// Fitted strip height `Im lambda_n -> c`.
    pub c_hat: f64,
    pub p_hat: Complex64,
    pub omega_hat: Complex64,
    /// Residual sequence `gamma_n = n (lambda_n - leading) - P` over the tail.
    pub residuals: Vec<(i32, Complex64)>,
}

impl AsymptoticFit {
    pub fn residual_l2(&self) -> f64 {
        self.residuals
            .iter()
            .map(|(_, g)| g.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_window_excludes_indices() {
        assert_eq!(Branch::J0.window(2), vec![-2, -1, 0, 2]);
        assert_eq!(Branch::J1.window(2), vec![-2, -1, 2]);
    }

    #[test]
    fn spectrum_detects_blocks() {
        let mut entries = BTreeMap::new();
        entries.insert(-1, c(-1.0, 0.3));
        entries.insert(0, c(0.5, 0.3));
        entries.insert(2, c(2.0, 0.3));
        entries.insert(3, c(2.0, 0.3));
        entries.insert(4, c(4.0, 0.3));
        let s = Spectrum::new(Branch::J0, entries, 1e-9).unwrap();
        assert_eq!(s.representatives()[&2], 2);
        assert_eq!(s.representatives()[&0], 1);
        assert_eq!(s.tail_index(), 4);
    }

    #[test]
    fn spectrum_rejects_excluded_index() {
        let mut entries = BTreeMap::new();
        entries.insert(1, c(1.0, 0.0));
        assert!(Spectrum::new(Branch::J0, entries, 1e-9).is_err());
    }

    #[test]
    fn cubic_interp_exact_at_nodes_and_cubics() {
        let g = Grid::half(1.0, 33).unwrap();
        let f = |x: f64| c(x * x * x - 0.5 * x, 2.0 * x * x);
        let sig = ComplexSignal::from_fn(g.clone(), f);
        for x in [0.0, 0.1234, 0.5, 0.77, 1.0] {
            assert!((cubic_interp(&sig, x) - f(x)).norm() < 1e-13);
        }
    }
}
