//! Truncated Dirichlet spectra with sampled eigenfunctions and a tail model.

use std::fmt;

use crate::bases::Sampler;
use crate::error::{invalid, Result};

/// One eigenpair; the eigenfunction is evaluated at Cartesian points.
#[derive(Clone)]
pub struct EigenMode {
    pub lambda: f64,
    pub phi: Sampler,
    /// Sup norm of the eigenfunction, as sampled.
    pub sup_norm: f64,
    /// Free-form identifier such as `m=1,j=0,cos`.
    pub label: String,
}

impl fmt::Debug for EigenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenMode")
            .field("lambda", &self.lambda)
            .field("sup_norm", &self.sup_norm)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Bound on the omitted part of the spectrum.
///
/// Every omitted eigenvalue is at least `floor`, the `k`-th eigenvalue is at
/// least `weyl_c·k^weyl_q` (a Li–Yau type lower bound), and every omitted
/// eigenfunction satisfies `‖φ_k‖²_∞ ≤ sup_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub floor: f64,
    pub weyl_c: f64,
    pub weyl_q: f64,
    pub sup_sq: f64,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub modes: Vec<EigenMode>,
    pub tail: TailModel,
}

impl Spectrum {
    pub fn new(mut modes: Vec<EigenMode>, tail: TailModel) -> Result<Self> {
        if modes.is_empty() {
            return invalid("a spectrum needs at least one mode");
        }
        if tail.weyl_q < 1.0 || tail.weyl_c <= 0.0 {
            return invalid("tail model needs weyl_q ≥ 1 and weyl_c > 0");
        }
        modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Ok(Self { modes, tail })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.modes[k].lambda
    }

    /// First eigenvalue strictly above `λ₁` (up to a relative 1e−9), i.e. the
    /// second distinct level.
    pub fn second_level(&self) -> Option<f64> {
        let l1 = self.modes[0].lambda;
        self.modes.iter().map(|m| m.lambda).find(|&l| l > l1 * (1.0 + 1e-9) + 1e-12)
    }

    /// All eigenfunction values at `x`.
    pub fn mode_values(&self, x: &[f64]) -> Vec<f64> {
        self.modes.iter().map(|m| (m.phi)(x)).collect()
    }

    /// Upper bound for `Σ_{k>K} e^{−λ_k t} ‖φ_k‖²_∞`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        self.tail_bound_scaled(t, 0.0)
    }

    /// `e^{shift·t}` times [`Spectrum::tail_bound`], without overflow.
    pub fn tail_bound_scaled(&self, t: f64, shift: f64) -> f64 {
        let tm = &self.tail;
        let k_count = self.modes.len() as f64;
        // Indices whose Weyl bound is still below the floor.
        let k_star = (tm.floor / tm.weyl_c).powf(1.0 / tm.weyl_q).floor();
        let flat = (k_star - k_count).max(0.0);
        let k0 = k_count.max(k_star) + 1.0;
        let e0 = (t * (shift - tm.weyl_c * k0.powf(tm.weyl_q))).exp();
        // Σ_{k≥k0} e^{−tck^q} ≤ e^{−tck0^q}(1 + 1/(tcq k0^{q−1})) by convexity of k^q.
        let slope = t * tm.weyl_c * tm.weyl_q * k0.powf(tm.weyl_q - 1.0);
        let rest = if slope > 0.0 { e0 * (1.0 + 1.0 / slope) } else { f64::INFINITY };
        tm.sup_sq * (flat * (t * (shift - tm.floor)).exp() + rest)
    }
}
