//! Spherical base domains `U₀ ⊆ S^{n−1}` and their principal Dirichlet eigendata.
//!
//! Base points are unit vectors in `ℝⁿ`. On `S²` the coordinates are the
//! azimuth `θ ∈ [0, 2π)` and the polar angle `φ ∈ [0, π]` measured from the
//! north pole, so `x = (sin φ cos θ, sin φ sin θ, cos φ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{csr_smallest_eigenpairs, gauss_legendre_on, CsrMatrix};
use crate::specfun::log_gamma_unchecked;

/// Pointwise evaluation of a function on base or domain points.
pub type Sampler = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDomain {
    /// The whole sphere `S^{n−1}`.
    FullSphere { n: usize },
    /// `{x ∈ S^{n−1} : x₁, …, x_k > 0}`.
    OrthantIntersection { n: usize, k: usize },
    /// The arc `θ ∈ (0, θ₁)` of `S¹`.
    CircleArc { theta1: f64 },
    /// The lune `θ ∈ (0, α)` on `S²`.
    SphereWedge { alpha: f64 },
    /// The coordinate rectangle `θ ∈ (0, θ₁)`, `φ ∈ (φ_lo, φ_hi)` on `S²`.
    SphereRectangle { theta1: f64, phi_lo: f64, phi_hi: f64 },
}

impl BaseDomain {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseDomain::FullSphere { n } if n < 2 => invalid(format!("FullSphere needs n ≥ 2, got {n}")),
            BaseDomain::OrthantIntersection { n, k } if n < 2 || k < 1 || k > n => {
                invalid(format!("OrthantIntersection needs 2 ≤ n and 1 ≤ k ≤ n, got n={n}, k={k}"))
            }
            BaseDomain::CircleArc { theta1 } if !(theta1 > 0.0 && theta1 <= 2.0 * PI) => {
                invalid(format!("CircleArc needs 0 < θ₁ ≤ 2π, got {theta1}"))
            }
            BaseDomain::SphereWedge { alpha } if !(alpha > 0.0 && alpha <= 2.0 * PI) => {
                invalid(format!("SphereWedge needs 0 < α ≤ 2π, got {alpha}"))
            }
            BaseDomain::SphereRectangle { theta1, phi_lo, phi_hi }
                if !(theta1 > 0.0 && theta1 < 2.0 * PI && phi_lo >= 0.0 && phi_lo < phi_hi && phi_hi <= PI) =>
            {
                invalid(format!(
                    "SphereRectangle needs 0 < θ₁ < 2π and 0 ≤ φ_lo < φ_hi ≤ π, got θ₁={theta1}, φ=({phi_lo},{phi_hi})"
                ))
            }
            _ => Ok(()),
        }
    }

    /// Dimension `n` of the ambient space `ℝⁿ ⊃ S^{n−1}`.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            BaseDomain::FullSphere { n } | BaseDomain::OrthantIntersection { n, .. } => n,
            BaseDomain::CircleArc { .. } => 2,
            BaseDomain::SphereWedge { .. } | BaseDomain::SphereRectangle { .. } => 3,
        }
    }

    /// Whether the unit vector `w` lies in the (open) base.
    pub fn contains(&self, w: &[f64]) -> bool {
        match *self {
            BaseDomain::FullSphere { .. } => true,
            BaseDomain::OrthantIntersection { k, .. } => w[..k].iter().all(|&x| x > 0.0),
            BaseDomain::CircleArc { theta1 } => {
                let t = circle_angle(w);
                t > 0.0 && t < theta1
            }
            BaseDomain::SphereWedge { alpha } => {
                let (t, p) = sphere_angles(w);
                t > 0.0 && t < alpha && p > 0.0 && p < PI
            }
            BaseDomain::SphereRectangle { theta1, phi_lo, phi_hi } => {
                let (t, p) = sphere_angles(w);
                t > 0.0 && t < theta1 && p > phi_lo && p < phi_hi
            }
        }
    }

    /// Intrinsic distance between two base points: arc length along the arc
    /// for `CircleArc`, the great-circle distance otherwise.
    pub fn intrinsic_distance(&self, w1: &[f64], w2: &[f64]) -> f64 {
        match *self {
            BaseDomain::CircleArc { .. } => (circle_angle(w1) - circle_angle(w2)).abs(),
            _ => {
                let d: f64 = w1.iter().zip(w2).map(|(a, b)| a * b).sum();
                d.clamp(-1.0, 1.0).acos()
            }
        }
    }

    /// Product Gauss–Legendre quadrature over the base with `q` nodes per
    /// angular direction. For `SphereRectangle` this is the node set of the
    /// `q×q` eigensolver grid with its own weights.
    pub fn quadrature(&self, q: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        self.validate()?;
        match *self {
            BaseDomain::FullSphere { n } => Ok(hyperspherical_quadrature(n, 0, q)),
            BaseDomain::OrthantIntersection { n, k } => Ok(hyperspherical_quadrature(n, k, q)),
            BaseDomain::CircleArc { theta1 } => {
                let (t, w) = gauss_legendre_on(0.0, theta1, q);
                Ok(t.into_iter().zip(w).map(|(t, w)| (circle_point(t), w)).collect())
            }
            BaseDomain::SphereWedge { alpha } => Ok(sphere_box_quadrature(0.0, alpha, 0.0, PI, q)),
            BaseDomain::SphereRectangle { theta1, phi_lo, phi_hi } => {
                let sol = solve_sphere_rectangle(theta1, (phi_lo, phi_hi), q)?;
                Ok(sol.grid_quadrature())
            }
        }
    }
}

/// Angle of a point of `S¹` in `[0, 2π)`.
pub fn circle_angle(w: &[f64]) -> f64 {
    let t = w[1].atan2(w[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

pub fn circle_point(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// `(θ, φ)` of a point of `S²`, with `θ ∈ [0, 2π)`, `φ ∈ [0, π]`.
pub fn sphere_angles(w: &[f64]) -> (f64, f64) {
    let phi = w[2].clamp(-1.0, 1.0).acos();
    let theta = if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { circle_angle(w) };
    (theta, phi)
}

pub fn sphere_point(theta: f64, phi: f64) -> Vec<f64> {
    vec![phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()]
}

/// Surface measure `σ_{n−1}(S^{n−1}) = 2π^{n/2}/Γ(n/2)`.
pub fn sphere_measure(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    (2.0f64.ln() + h * PI.ln() - log_gamma_unchecked(h)).exp()
}

/// Riemannian distance from a point of `S^{n−1}` to the equator `{x_i = 0}`.
pub fn dist_to_equator(w: &[f64], i: usize) -> f64 {
    w[i].abs().min(1.0).asin()
}

/// Hyperspherical product quadrature on `S^{n−1}`, restricted to the orthant
/// `x₁, …, x_k > 0` (`k = 0` for the whole sphere).
fn hyperspherical_quadrature(n: usize, k: usize, q: usize) -> Vec<(Vec<f64>, f64)> {
    // Polar angles φ_0..φ_{n−3} ∈ [0, π] (halved when x_{j+1} > 0 is imposed);
    // the last angle runs over the circle of (x_{n−1}, x_n).
    let mut ranges: Vec<(f64, f64)> = (0..n.saturating_sub(2))
        .map(|j| if j < k { (0.0, PI / 2.0) } else { (0.0, PI) })
        .collect();
    let last = if k + 1 < n {
        (0.0, 2.0 * PI)
    } else if k + 1 == n {
        (-PI / 2.0, PI / 2.0)
    } else {
        (0.0, PI / 2.0)
    };
    ranges.push(last);
    let rules: Vec<(Vec<f64>, Vec<f64>)> = ranges
        .iter()
        .enumerate()
        .map(|(j, &(a, b))| {
            let m = if j + 1 == ranges.len() && b - a > PI { 2 * q } else { q };
            gauss_legendre_on(a, b, m)
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; ranges.len()];
    loop {
        let angles: Vec<f64> = idx.iter().enumerate().map(|(j, &i)| rules[j].0[i]).collect();
        let mut weight: f64 = idx.iter().enumerate().map(|(j, &i)| rules[j].1[i]).product();
        let mut x = vec![0.0; n];
        let mut s = 1.0;
        for j in 0..n - 1 {
            x[j] = s * angles[j].cos();
            if j + 2 < n {
                weight *= angles[j].sin().powi((n - 2 - j) as i32);
            }
            s *= angles[j].sin();
        }
        x[n - 1] = s;
        out.push((x, weight));
        let mut d = 0;
        loop {
            if d == idx.len() {
                return out;
            }
            idx[d] += 1;
            if idx[d] < rules[d].0.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn sphere_box_quadrature(t0: f64, t1: f64, p0: f64, p1: f64, q: usize) -> Vec<(Vec<f64>, f64)> {
    let (ts, tw) = gauss_legendre_on(t0, t1, q);
    let (ps, pw) = gauss_legendre_on(p0, p1, q);
    let mut out = Vec::with_capacity(q * q);
    for (p, wp) in ps.iter().zip(&pw) {
        for (t, wt) in ts.iter().zip(&tw) {
            out.push((sphere_point(*t, *p), wt * wp * p.sin()));
        }
    }
    out
}

/// Principal Dirichlet eigendata of a base.
#[derive(Clone)]
pub struct BaseEigenData {
    pub lambda0: f64,
    /// L²(U₀)-normalized principal eigenfunction on unit vectors, zero outside U₀.
    pub phi0: Sampler,
    pub measure: f64,
    pub diam_lower: f64,
    /// Multiplier applied to the raw eigenfunction formula to normalize it.
    pub normalization: f64,
}

impl fmt::Debug for BaseEigenData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseEigenData")
            .field("lambda0", &self.lambda0)
            .field("measure", &self.measure)
            .field("diam_lower", &self.diam_lower)
            .field("normalization", &self.normalization)
            .finish_non_exhaustive()
    }
}

/// Grid resolution used for `SphereRectangle` bases.
pub const SPHERE_RECTANGLE_GRID: usize = 64;

pub fn base_eigendata(base: &BaseDomain) -> Result<BaseEigenData> {
    base.validate()?;
    match *base {
        BaseDomain::FullSphere { n } => {
            let measure = sphere_measure(n);
            let c = 1.0 / measure.sqrt();
            Ok(BaseEigenData {
                lambda0: 0.0,
                phi0: Arc::new(move |_| c),
                measure,
                diam_lower: PI,
                normalization: c,
            })
        }
        BaseDomain::OrthantIntersection { n, k } => {
            if n > 5 {
                return Err(Error::Unsupported(format!(
                    "OrthantIntersection eigenfunction normalization is computed for n ≤ 5 only (got n={n})"
                )));
            }
            let raw = move |w: &[f64]| -> f64 {
                if w[..k].iter().all(|&x| x > 0.0) {
                    w[..k].iter().product()
                } else {
                    0.0
                }
            };
            let q = if n <= 3 { 48 } else { 24 };
            let nodes = hyperspherical_quadrature(n, k, q);
            let norm_sq: f64 = nodes.iter().map(|(x, w)| w * raw(x).powi(2)).sum();
            let c = 1.0 / norm_sq.sqrt();
            Ok(BaseEigenData {
                lambda0: (k * (k + n - 2)) as f64,
                phi0: Arc::new(move |w| c * raw(w)),
                measure: sphere_measure(n) / 2f64.powi(k as i32),
                diam_lower: PI / 2.0,
                normalization: c,
            })
        }
        BaseDomain::CircleArc { theta1 } => {
            let c = (2.0 / theta1).sqrt();
            Ok(BaseEigenData {
                lambda0: (PI / theta1).powi(2),
                phi0: Arc::new(move |w| {
                    let t = circle_angle(w);
                    if t > 0.0 && t < theta1 {
                        c * (PI * t / theta1).sin()
                    } else {
                        0.0
                    }
                }),
                measure: theta1,
                diam_lower: theta1.min(PI),
                normalization: c,
            })
        }
        BaseDomain::SphereWedge { alpha } => {
            let k = PI / alpha;
            // ∫ sin²(kθ) dθ over (0, α) is α/2; the polar factor by quadrature.
            let (ps, pw) = gauss_legendre_on(0.0, PI, 200);
            let polar: f64 = ps.iter().zip(&pw).map(|(p, w)| w * p.sin().powf(2.0 * k + 1.0)).sum();
            let c = 1.0 / (0.5 * alpha * polar).sqrt();
            Ok(BaseEigenData {
                lambda0: k * (k + 1.0),
                phi0: Arc::new(move |w| {
                    let (t, p) = sphere_angles(w);
                    if t > 0.0 && t < alpha {
                        c * (k * t).sin() * p.sin().powf(k)
                    } else {
                        0.0
                    }
                }),
                measure: 2.0 * alpha,
                diam_lower: PI,
                normalization: c,
            })
        }
        BaseDomain::SphereRectangle { theta1, phi_lo, phi_hi } => {
            let sol = Arc::new(solve_sphere_rectangle(theta1, (phi_lo, phi_hi), SPHERE_RECTANGLE_GRID)?);
            let lambda0 = sol.lambda0;
            let s = sol.clone();
            Ok(BaseEigenData {
                lambda0,
                phi0: Arc::new(move |w| {
                    let (t, p) = sphere_angles(w);
                    s.eval(t, p)
                }),
                measure: theta1 * (phi_lo.cos() - phi_hi.cos()),
                diam_lower: phi_hi - phi_lo,
                normalization: 1.0,
            })
        }
    }
}

/// One eigenvalue level of a base with an orthonormal basis of its eigenspace.
#[derive(Clone)]
pub struct BaseMode {
    pub lambda0: f64,
    pub multiplicity: usize,
    pub eigenfunctions: Vec<Sampler>,
}

impl fmt::Debug for BaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseMode")
            .field("lambda0", &self.lambda0)
            .field("multiplicity", &self.multiplicity)
            .finish_non_exhaustive()
    }
}

/// The first `count` eigenvalue levels of a one-dimensional base.
pub fn base_spectrum(base: &BaseDomain, count: usize) -> Result<Vec<BaseMode>> {
    base.validate()?;
    if count == 0 {
        return invalid("base_spectrum needs count ≥ 1");
    }
    match *base {
        BaseDomain::FullSphere { n: 2 } => Ok((0..count)
            .map(|m| {
                let mf = m as f64;
                if m == 0 {
                    let c = 1.0 / (2.0 * PI).sqrt();
                    BaseMode { lambda0: 0.0, multiplicity: 1, eigenfunctions: vec![Arc::new(move |_: &[f64]| c)] }
                } else {
                    let c = 1.0 / PI.sqrt();
                    BaseMode {
                        lambda0: mf * mf,
                        multiplicity: 2,
                        eigenfunctions: vec![
                            Arc::new(move |w: &[f64]| c * (mf * circle_angle(w)).cos()),
                            Arc::new(move |w: &[f64]| c * (mf * circle_angle(w)).sin()),
                        ],
                    }
                }
            })
            .collect()),
        BaseDomain::CircleArc { theta1 } => Ok((1..=count)
            .map(|j| {
                let jf = j as f64;
                let c = (2.0 / theta1).sqrt();
                BaseMode {
                    lambda0: (jf * PI / theta1).powi(2),
                    multiplicity: 1,
                    eigenfunctions: vec![Arc::new(move |w: &[f64]| {
                        let t = circle_angle(w);
                        if t > 0.0 && t < theta1 {
                            c * (jf * PI * t / theta1).sin()
                        } else {
                            0.0
                        }
                    })],
                }
            })
            .collect()),
        _ => Err(Error::Unsupported(format!("spectrum unavailable for base {base:?}"))),
    }
}

/// Principal Dirichlet eigenpair of a coordinate rectangle on `S²`.
#[derive(Debug, Clone)]
pub struct SphereRectangleSolution {
    pub lambda0: f64,
    /// `N+1` azimuth nodes including both edges.
    pub theta: Vec<f64>,
    /// `N+1` polar nodes including both edges.
    pub phi: Vec<f64>,
    /// Values at `(theta[i], phi[j])`, stored at `j·(N+1) + i`; zero on the edges.
    pub values: Vec<f64>,
}

impl SphereRectangleSolution {
    /// Bilinear interpolation; zero outside the rectangle.
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let n = self.theta.len() - 1;
        let (t0, t1) = (self.theta[0], self.theta[n]);
        let (p0, p1) = (self.phi[0], self.phi[n]);
        if !(theta > t0 && theta < t1 && phi > p0 && phi < p1) {
            return 0.0;
        }
        let ft = (theta - t0) / (t1 - t0) * n as f64;
        let fp = (phi - p0) / (p1 - p0) * n as f64;
        let i = (ft.floor() as usize).min(n - 1);
        let j = (fp.floor() as usize).min(n - 1);
        let (a, b) = (ft - i as f64, fp - j as f64);
        let v = |i: usize, j: usize| self.values[j * (n + 1) + i];
        (1.0 - a) * (1.0 - b) * v(i, j) + a * (1.0 - b) * v(i + 1, j) + (1.0 - a) * b * v(i, j + 1) + a * b * v(i + 1, j + 1)
    }

    /// Interior grid nodes with the weights `sin φ hθ hφ` used for normalization.
    pub fn grid_quadrature(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.theta.len() - 1;
        let ht = self.theta[1] - self.theta[0];
        let hp = self.phi[1] - self.phi[0];
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for j in 1..n {
            for i in 1..n {
                out.push((sphere_point(self.theta[i], self.phi[j]), self.phi[j].sin() * ht * hp));
            }
        }
        out
    }
}

/// Smallest Dirichlet eigenpair of `−Δ_{S²}` on `(0, θ₁) × (φ_lo, φ_hi)`.
///
/// Second-order finite differences on an `N×N` cell grid. The `φ` direction
/// uses the self-adjoint form with `sin φ` at half-nodes; the generalized
/// problem `K u = λ diag(sin φ) u` is symmetrized before solving.
pub fn solve_sphere_rectangle(theta1: f64, phi_range: (f64, f64), n: usize) -> Result<SphereRectangleSolution> {
    let (phi_lo, phi_hi) = phi_range;
    BaseDomain::SphereRectangle { theta1, phi_lo, phi_hi }.validate()?;
    if n < 16 {
        return invalid(format!("sphere rectangle grid too coarse: N = {n} < 16"));
    }
    let ht = theta1 / n as f64;
    let hp = (phi_hi - phi_lo) / n as f64;
    let m = n - 1;
    let phi_at = |j: f64| phi_lo + j * hp;
    let idx = |i: usize, j: usize| (j - 1) * m + (i - 1);
    let mut trip = Vec::with_capacity(5 * m * m);
    for j in 1..n {
        let s = phi_at(j as f64).sin();
        let s_up = phi_at(j as f64 + 0.5).sin();
        let s_dn = phi_at(j as f64 - 0.5).sin();
        for i in 1..n {
            let a = idx(i, j);
            trip.push((a, a, ((s_up + s_dn) / (hp * hp) + 2.0 / (s * ht * ht)) / s));
            if i > 1 {
                trip.push((a, idx(i - 1, j), -1.0 / (s * ht * ht) / s));
            }
            if i + 1 < n {
                trip.push((a, idx(i + 1, j), -1.0 / (s * ht * ht) / s));
            }
            if j > 1 {
                let s2 = phi_at(j as f64 - 1.0).sin();
                trip.push((a, idx(i, j - 1), -s_dn / (hp * hp) / (s * s2).sqrt()));
            }
            if j + 1 < n {
                let s2 = phi_at(j as f64 + 1.0).sin();
                trip.push((a, idx(i, j + 1), -s_up / (hp * hp) / (s * s2).sqrt()));
            }
        }
    }
    let mat = CsrMatrix::from_triplets(m * m, trip)?;
    let pair = csr_smallest_eigenpairs(&mat, 1, 0.0)?.remove(0);
    let mut values = vec![0.0; (n + 1) * (n + 1)];
    let mut norm = 0.0;
    for j in 1..n {
        let s = phi_at(j as f64).sin();
        for i in 1..n {
            let u = pair.vector[idx(i, j)] / s.sqrt();
            values[j * (n + 1) + i] = u;
            norm += u * u * s * ht * hp;
        }
    }
    let c = 1.0 / norm.sqrt();
    values.iter_mut().for_each(|v| *v *= c);
    Ok(SphereRectangleSolution {
        lambda0: pair.value,
        theta: (0..=n).map(|i| i as f64 * ht).collect(),
        phi: (0..=n).map(|j| phi_at(j as f64)).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn norm_sq(base: &BaseDomain, q: usize) -> f64 {
        let data = base_eigendata(base).unwrap();
        base.quadrature(q).unwrap().iter().map(|(x, w)| w * (data.phi0)(x).powi(2)).sum()
    }

    fn catalog() -> Vec<BaseDomain> {
        vec![
            BaseDomain::FullSphere { n: 2 },
            BaseDomain::FullSphere { n: 3 },
            BaseDomain::FullSphere { n: 5 },
            BaseDomain::OrthantIntersection { n: 2, k: 1 },
            BaseDomain::OrthantIntersection { n: 2, k: 2 },
            BaseDomain::OrthantIntersection { n: 3, k: 1 },
            BaseDomain::OrthantIntersection { n: 3, k: 2 },
            BaseDomain::OrthantIntersection { n: 3, k: 3 },
            BaseDomain::OrthantIntersection { n: 4, k: 2 },
            BaseDomain::OrthantIntersection { n: 5, k: 3 },
            BaseDomain::CircleArc { theta1: PI },
            BaseDomain::CircleArc { theta1: 0.75 * PI },
            BaseDomain::SphereWedge { alpha: PI / 2.0 },
            BaseDomain::SphereWedge { alpha: PI / 3.0 },
        ]
    }

    #[test]
    fn eigendata_examples() {
        let full = base_eigendata(&BaseDomain::FullSphere { n: 3 }).unwrap();
        assert_eq!(full.lambda0, 0.0);
        assert_relative_eq!(full.measure, 4.0 * PI, max_relative = 1e-13);
        let arc = base_eigendata(&BaseDomain::CircleArc { theta1: 0.75 * PI }).unwrap();
        assert_relative_eq!(arc.lambda0, 16.0 / 9.0, max_relative = 1e-14);
        let orth = base_eigendata(&BaseDomain::OrthantIntersection { n: 3, k: 2 }).unwrap();
        assert_eq!(orth.lambda0, 6.0);
        let wedge = base_eigendata(&BaseDomain::SphereWedge { alpha: PI / 2.0 }).unwrap();
        assert_relative_eq!(wedge.lambda0, 6.0, max_relative = 1e-14);
    }

    #[test]
    fn catalog_eigenfunctions_are_normalized() {
        for base in catalog() {
            let v = norm_sq(&base, 40);
            assert!((v - 1.0).abs() <= 1e-6, "{base:?}: ∫φ₀² = {v}");
        }
        let rect = BaseDomain::SphereRectangle { theta1: 1.0, phi_lo: 0.5, phi_hi: 1.5 };
        let sol = solve_sphere_rectangle(1.0, (0.5, 1.5), SPHERE_RECTANGLE_GRID).unwrap();
        let v: f64 = sol.grid_quadrature().iter().map(|(x, w)| {
            let (t, p) = sphere_angles(x);
            w * sol.eval(t, p).powi(2)
        }).sum();
        assert!((v - 1.0).abs() <= 1e-6);
        assert!((norm_sq(&rect, SPHERE_RECTANGLE_GRID) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn orthant_normalization_matches_monomial_integral() {
        // ∫_{S^{n−1}} ∏ x_i² over the first k coordinates is
        // 2 Γ(3/2)^k Γ(1/2)^{n−k} / Γ(n/2 + k); the orthant holds 2^{−k} of it.
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 2), (5, 3), (5, 5)] {
            let lg = log_gamma_unchecked;
            let log_full = 2f64.ln() + k as f64 * lg(1.5) + (n - k) as f64 * lg(0.5) - lg(0.5 * n as f64 + k as f64);
            let exact = (log_full - k as f64 * 2f64.ln()).exp();
            let data = base_eigendata(&BaseDomain::OrthantIntersection { n, k }).unwrap();
            assert_relative_eq!(data.normalization, 1.0 / exact.sqrt(), max_relative = 1e-9);
        }
    }

    #[test]
    fn eigendata_positive_inside() {
        for base in catalog() {
            let data = base_eigendata(&base).unwrap();
            for (x, _) in base.quadrature(12).unwrap() {
                if base.contains(&x) {
                    assert!((data.phi0)(&x) > 0.0, "{base:?} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn orthant_profile_comparable_to_equator_distances() {
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 2), (4, 4)] {
            let base = BaseDomain::OrthantIntersection { n, k };
            let data = base_eigendata(&base).unwrap();
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (x, _) in base.quadrature(10).unwrap() {
                let d: f64 = (0..k).map(|i| dist_to_equator(&x, i)).product();
                if d < 1e-6 {
                    continue;
                }
                let r = (data.phi0)(&x) / d;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            assert!(hi / lo <= 10.0, "n={n} k={k}: spread {}", hi / lo);
        }
    }

    #[test]
    fn spectra_of_one_dimensional_bases() {
        let full = base_spectrum(&BaseDomain::FullSphere { n: 2 }, 3).unwrap();
        let got: Vec<(f64, usize)> = full.iter().map(|m| (m.lambda0, m.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (1.0, 2), (4.0, 2)]);
        let arc = base_spectrum(&BaseDomain::CircleArc { theta1: PI }, 2).unwrap();
        assert_relative_eq!(arc[1].lambda0, 4.0, max_relative = 1e-14);
        let arc34 = base_spectrum(&BaseDomain::CircleArc { theta1: 0.75 * PI }, 1).unwrap();
        assert_relative_eq!(arc34[0].lambda0, 16.0 / 9.0, max_relative = 1e-14);
        assert!(base_spectrum(&BaseDomain::FullSphere { n: 3 }, 2).is_err());
    }

    #[test]
    fn circle_modes_are_orthonormal() {
        let modes = base_spectrum(&BaseDomain::FullSphere { n: 2 }, 4).unwrap();
        let fs: Vec<&Sampler> = modes.iter().flat_map(|m| m.eigenfunctions.iter()).collect();
        let quad = BaseDomain::FullSphere { n: 2 }.quadrature(64).unwrap();
        for (i, f) in fs.iter().enumerate() {
            for (j, g) in fs.iter().enumerate() {
                let v: f64 = quad.iter().map(|(x, w)| w * f(x) * g(x)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_rectangle_reproduces_orthant_and_wedge() {
        let orth32 = solve_sphere_rectangle(PI, (0.0, PI / 2.0), 32).unwrap().lambda0;
        let orth64 = solve_sphere_rectangle(PI, (0.0, PI / 2.0), 64).unwrap().lambda0;
        assert!((orth64 - 6.0).abs() < 2e-2, "orthant λ = {orth64}");
        let ratio = (orth32 - 6.0).abs() / (orth64 - 6.0).abs();
        assert!((3.0..=5.0).contains(&ratio), "refinement ratio {ratio}");
        let wedge = solve_sphere_rectangle(PI / 2.0, (0.0, PI), 64).unwrap().lambda0;
        assert!((wedge - 6.0).abs() < 2e-2, "wedge λ = {wedge}");
        assert!(solve_sphere_rectangle(PI, (0.0, 1.0), 8).is_err());
    }

    #[test]
    fn validation() {
        assert!(BaseDomain::FullSphere { n: 1 }.validate().is_err());
        assert!(BaseDomain::OrthantIntersection { n: 3, k: 4 }.validate().is_err());
        assert!(BaseDomain::CircleArc { theta1: 7.0 }.validate().is_err());
        assert!(base_eigendata(&BaseDomain::OrthantIntersection { n: 6, k: 2 }).is_err());
    }
}
