//! The radial Sturm–Liouville problem of separated annular domains and the
//! product spectra built from it.
//!
//! With `f̃ = r^{(n−1)/2} f` the radial equation
//! `−f″ − (n−1)/r f′ + λ₀/r² f = λ f` becomes `−f̃″ + (α+λ₀)/r² f̃ = λ f̃`
//! with `α = (n−3)(n−1)/4`, which discretizes to a symmetric tridiagonal
//! matrix with no mass matrix.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bases::{base_spectrum, BaseDomain};
use crate::error::{invalid, Result};
use crate::numerics::{tridiag_smallest_eigenpairs, TridiagonalOperator};
use crate::spectrum::{EigenMode, Spectrum, TailModel};

/// `U = (a, b) × U₀ ⊂ ℝⁿ` in polar coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularDomainSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub base: BaseDomain,
}

impl AnnularDomainSpec {
    pub fn new(n: usize, a: f64, b: f64, base: BaseDomain) -> Result<Self> {
        let spec = Self { n, a, b, base };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("dimension must be ≥ 2, got {}", self.n));
        }
        if !(self.a > 0.0 && self.b > self.a && self.b.is_finite()) {
            return invalid(format!("need 0 < a < b < ∞, got a={}, b={}", self.a, self.b));
        }
        self.base.validate()?;
        if self.base.ambient_dim() != self.n {
            return invalid(format!(
                "base {:?} lives in ℝ^{}, domain dimension is {}",
                self.base,
                self.base.ambient_dim(),
                self.n
            ));
        }
        Ok(())
    }

    /// The thin regime `b/a ≤ 2`.
    pub fn is_thin(&self) -> bool {
        self.b / self.a <= 2.0
    }

    pub fn thickness(&self) -> f64 {
        self.b - self.a
    }

    /// The same base over `(c·a, c·b)`.
    pub fn dilate(&self, c: f64) -> Self {
        Self { a: c * self.a, b: c * self.b, ..self.clone() }
    }

    /// Polar coordinates `(r, ω)` of a Cartesian point.
    pub fn polar(x: &[f64]) -> (f64, Vec<f64>) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        (r, x.iter().map(|v| v / r).collect())
    }
}

/// `α = (n−3)(n−1)/4`.
pub fn alpha(n: usize) -> f64 {
    (n as f64 - 3.0) * (n as f64 - 1.0) / 4.0
}

/// One radial eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialEigenResult {
    pub n: usize,
    /// Richardson-extrapolated eigenvalue.
    pub lambda: f64,
    /// Discrete eigenvalues on the `N` and `2N` grids.
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    /// Radii `a = r_0 < … < r_{2N} = b`.
    pub grid: Vec<f64>,
    /// `f` with `∫ f² r^{n−1} dr = 1`.
    pub f: Vec<f64>,
    /// `f̃ = r^{(n−1)/2} f` with `∫ f̃² dr = 1`.
    pub ftilde: Vec<f64>,
    pub alpha: f64,
}

impl RadialEigenResult {
    /// `f(r)` by cubic Lagrange interpolation on the grid; zero outside `[a, b]`.
    pub fn eval_f(&self, r: f64) -> f64 {
        let ft = interpolate_cubic(&self.grid, &self.ftilde, r);
        ft * r.powf(-0.5 * (self.n as f64 - 1.0))
    }

    /// `f̃(r)` by cubic Lagrange interpolation; zero outside `[a, b]`.
    pub fn eval_ftilde(&self, r: f64) -> f64 {
        interpolate_cubic(&self.grid, &self.ftilde, r)
    }

    pub fn sup_f(&self) -> f64 {
        self.f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Cubic interpolation on a uniform grid.
pub(crate) fn interpolate_cubic(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let m = grid.len() - 1;
    let (a, b) = (grid[0], grid[m]);
    if !(x >= a && x <= b) {
        return 0.0;
    }
    let h = (b - a) / m as f64;
    let s = (x - a) / h;
    let i = (s.floor() as usize).min(m - 1);
    let i0 = i.saturating_sub(1).min(m.saturating_sub(3));
    let xs = [i0, i0 + 1, i0 + 2, i0 + 3];
    let mut out = 0.0;
    for (p, &ip) in xs.iter().enumerate() {
        let mut l = 1.0;
        for (q, &iq) in xs.iter().enumerate() {
            if p != q {
                l *= (s - iq as f64) / (ip as f64 - iq as f64);
            }
        }
        out += l * values[ip];
    }
    out
}

fn radial_operator(n: usize, a: f64, b: f64, lambda0: f64, m: usize) -> (TridiagonalOperator, Vec<f64>, f64) {
    let h = (b - a) / m as f64;
    let pot: Vec<f64> = (1..m)
        .map(|i| {
            let r = a + i as f64 * h;
            (alpha(n) + lambda0) / (r * r)
        })
        .collect();
    let diag = pot.iter().map(|v| 2.0 / (h * h) + v).collect();
    let op = TridiagonalOperator::new(diag, vec![-1.0 / (h * h); m - 2]).expect("valid radial operator");
    (op, pot, h)
}

/// Rayleigh quotient in energy form `Σ (v_{i+1}−v_i)²/h² + Σ V_i v_i²`,
/// which avoids the cancellation of `vᵀTv` when `1/h²` dwarfs `λ`.
fn energy_rayleigh(v: &[f64], pot: &[f64], h: f64) -> f64 {
    let m = v.len();
    let mut grad = v[0] * v[0] + v[m - 1] * v[m - 1];
    for i in 0..m - 1 {
        grad += (v[i + 1] - v[i]).powi(2);
    }
    let potential: f64 = v.iter().zip(pot).map(|(x, p)| p * x * x).sum();
    let norm: f64 = v.iter().map(|x| x * x).sum();
    (grad / (h * h) + potential) / norm
}

fn check_radial(a: f64, b: f64, lambda0: f64, big_n: usize, k: usize) -> Result<()> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return invalid(format!("radial interval needs 0 < a < b, got ({a}, {b})"));
    }
    if !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return invalid(format!("base eigenvalue must be ≥ 0, got {lambda0}"));
    }
    if big_n < 64 {
        return invalid(format!("radial grid too coarse: N = {big_n} < 64"));
    }
    if k == 0 || k >= big_n {
        return invalid(format!("cannot extract {k} eigenpairs from an N = {big_n} grid"));
    }
    Ok(())
}

/// The `k` smallest radial eigenpairs on `(a, b)` for base eigenvalue `λ₀`.
///
/// Eigenvalues are Richardson-extrapolated over the `N` and `2N` grids;
/// eigenfunctions are sampled on the `2N` grid.
pub fn solve_radial(n: usize, a: f64, b: f64, lambda0: f64, big_n: usize, k: usize) -> Result<Vec<RadialEigenResult>> {
    if n < 2 {
        return invalid(format!("dimension must be ≥ 2, got {n}"));
    }
    check_radial(a, b, lambda0, big_n, k)?;
    let (coarse_op, coarse_pot, hc) = radial_operator(n, a, b, lambda0, big_n);
    let coarse = tridiag_smallest_eigenpairs(&coarse_op, k)?;
    let m = 2 * big_n;
    let (fine_op, fine_pot, h) = radial_operator(n, a, b, lambda0, m);
    let fine = tridiag_smallest_eigenpairs(&fine_op, k)?;
    let grid: Vec<f64> = (0..=m).map(|i| if i == m { b } else { a + i as f64 * h }).collect();
    let half_power = 0.5 * (n as f64 - 1.0);
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, fpair)| {
            let lc = energy_rayleigh(&c.vector, &coarse_pot, hc);
            let lf = energy_rayleigh(&fpair.vector, &fine_pot, h);
            let scale = 1.0 / h.sqrt();
            let mut ftilde = vec![0.0; m + 1];
            for i in 1..m {
                ftilde[i] = fpair.vector[i - 1] * scale;
            }
            let f = grid.iter().zip(&ftilde).map(|(r, v)| v * r.powf(-half_power)).collect();
            RadialEigenResult {
                n,
                lambda: (4.0 * lf - lc) / 3.0,
                lambda_coarse: lc,
                lambda_fine: lf,
                grid: grid.clone(),
                f,
                ftilde,
                alpha: alpha(n),
            }
        })
        .collect())
}

/// Eigenvalues of the radial problem discretized directly in the weighted
/// form `−(r^{n−1} f′)′/r^{n−1} + λ₀ f/r² = λ f`, symmetrized with the weight
/// `r^{n−1}`. Independent of the transform used by [`solve_radial`].
pub fn solve_radial_weighted(n: usize, a: f64, b: f64, lambda0: f64, big_n: usize, k: usize) -> Result<Vec<f64>> {
    check_radial(a, b, lambda0, big_n, k)?;
    let p = n as f64 - 1.0;
    let discrete = |m: usize| -> Result<Vec<f64>> {
        let h = (b - a) / m as f64;
        let r = |i: f64| a + i * h;
        let w: Vec<f64> = (1..m).map(|i| r(i as f64).powf(p)).collect();
        let diag: Vec<f64> = (1..m)
            .map(|i| {
                let fi = i as f64;
                (r(fi + 0.5).powf(p) + r(fi - 0.5).powf(p)) / (h * h) / w[i - 1] + lambda0 / r(fi).powi(2)
            })
            .collect();
        let off: Vec<f64> = (1..m - 1)
            .map(|i| -r(i as f64 + 0.5).powf(p) / (h * h) / (w[i - 1] * w[i]).sqrt())
            .collect();
        let op = TridiagonalOperator::new(diag, off)?;
        let pairs = tridiag_smallest_eigenpairs(&op, k)?;
        Ok(pairs
            .iter()
            .map(|pair| {
                let g: Vec<f64> = pair.vector.iter().zip(&w).map(|(v, wi)| v / wi.sqrt()).collect();
                let mut grad = 0.0;
                for i in 0..=g.len() {
                    let left = if i == 0 { 0.0 } else { g[i - 1] };
                    let right = if i == g.len() { 0.0 } else { g[i] };
                    grad += r(i as f64 + 0.5).powf(p) * (right - left).powi(2);
                }
                let pot: f64 = g.iter().enumerate().map(|(i, gi)| lambda0 * r(i as f64 + 1.0).powf(p - 2.0) * gi * gi).sum();
                let mass: f64 = g.iter().zip(&w).map(|(gi, wi)| wi * gi * gi).sum();
                (grad / (h * h) + pot) / mass
            })
            .collect())
    };
    let lc = discrete(big_n)?;
    let lf = discrete(2 * big_n)?;
    Ok(lc.iter().zip(&lf).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

/// Principal eigenvalue of `A_{a,b} × U₀`, i.e. [`solve_radial`] with `k = 1`.
pub fn principal_radial_eigenvalue(n: usize, a: f64, b: f64, lambda0: f64, big_n: usize) -> Result<f64> {
    Ok(solve_radial(n, a, b, lambda0, big_n, 1)?[0].lambda)
}

/// Radial grid used by [`assemble_spectrum`].
pub const ASSEMBLY_GRID: usize = 512;

/// Product spectrum `λ_{m,j}`, `f_{m,j}(r) g_m(ω)` of an annular domain with a
/// one-dimensional base.
///
/// Uses `m_base` base levels and `k_radial` radial modes per level. Modes are
/// kept only below the smallest eigenvalue that was not fully enumerated, so
/// the result is a complete bottom part of the spectrum; that cut is the
/// floor of the tail model.
pub fn assemble_spectrum(spec: &AnnularDomainSpec, m_base: usize, k_radial: usize) -> Result<Spectrum> {
    assemble_spectrum_with_grid(spec, m_base, k_radial, ASSEMBLY_GRID)
}

pub fn assemble_spectrum_with_grid(spec: &AnnularDomainSpec, m_base: usize, k_radial: usize, big_n: usize) -> Result<Spectrum> {
    spec.validate()?;
    if k_radial == 0 {
        return invalid("need at least one radial mode per level");
    }
    let levels = base_spectrum(&spec.base, m_base + 1)?;
    let mut modes = Vec::new();
    let mut cut = f64::INFINITY;
    let mut sup_sq = 0.0f64;
    for (m, level) in levels.iter().enumerate() {
        if m == m_base {
            let next = solve_radial(spec.n, spec.a, spec.b, level.lambda0, big_n, 1)?;
            cut = cut.min(next[0].lambda);
            break;
        }
        let radial = solve_radial(spec.n, spec.a, spec.b, level.lambda0, big_n, k_radial + 1)?;
        cut = cut.min(radial[k_radial].lambda);
        let g_sup = level_sup(&spec.base, m);
        for (j, rad) in radial.into_iter().take(k_radial).enumerate() {
            let rad = Arc::new(rad);
            for (idx, g) in level.eigenfunctions.iter().enumerate() {
                let (rad, g) = (rad.clone(), g.clone());
                let sup = rad.sup_f() * g_sup;
                sup_sq = sup_sq.max(sup * sup);
                modes.push(EigenMode {
                    lambda: rad.lambda,
                    phi: Arc::new(move |x: &[f64]| {
                        let (r, w) = AnnularDomainSpec::polar(x);
                        rad.eval_f(r) * g(&w)
                    }),
                    sup_norm: sup,
                    label: format!("m={m},j={j},i={idx}"),
                });
            }
        }
    }
    modes.retain(|md| md.lambda < cut);
    let area = base_measure_1d(&spec.base) * (spec.b * spec.b - spec.a * spec.a) / 2.0;
    Spectrum::new(
        modes,
        TailModel {
            floor: cut,
            weyl_c: 2.0 * PI / area,
            weyl_q: 1.0,
            // Higher radial modes have the same sine-like envelope; the factor
            // 2 is headroom over the largest sampled sup.
            sup_sq: 2.0 * sup_sq,
        },
    )
}

fn base_measure_1d(base: &BaseDomain) -> f64 {
    match *base {
        BaseDomain::CircleArc { theta1 } => theta1,
        _ => 2.0 * PI,
    }
}

fn level_sup(base: &BaseDomain, m: usize) -> f64 {
    match *base {
        BaseDomain::CircleArc { theta1 } => (2.0 / theta1).sqrt(),
        _ => {
            if m == 0 {
                1.0 / (2.0 * PI).sqrt()
            } else {
                1.0 / PI.sqrt()
            }
        }
    }
}
