//! Caricature functions, eigenvalue bounds, and checks that confront them with
//! computed eigendata.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bases::{base_eigendata, sphere_measure, BaseDomain, Sampler};
use crate::error::{invalid, Result};
use crate::radial::{alpha, solve_radial};
use crate::spectral2d::GridSpectrum;

/// Radial profile of the thin annular product caricature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinProfile {
    /// `√(2/(b−a)) cos(π(r − (a+b)/2)/(b−a))`.
    Cosine,
    /// `min{r−a, b−r}/(b−a)^{3/2}`.
    Tent,
}

/// Prefactor of the thin annular product caricature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialWeight {
    /// The constant `a^{−(n−1)/2}`.
    Inner,
    /// The local `r^{−(n−1)/2}`, which turns the cosine form into the exact
    /// radial eigenfunction when `n = 3`.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaricatureKind {
    ThinAnnulus { n: usize, a: f64, b: f64 },
    NonThinAnnulusN3plus { n: usize, a: f64, b: f64 },
    NonThinAnnulusN2 { a: f64, b: f64 },
    /// `∏ (1/√a_i) cos(π x_i / 2a_i)` on `∏ (−a_i, a_i)`.
    Box { half_widths: Vec<f64> },
    ThinAnnularProduct { n: usize, a: f64, b: f64, base: BaseDomain, profile: ThinProfile, weight: RadialWeight },
    /// `∏_{i≤k} dist(θ, E_i)` on the sphere.
    OrthantProduct { n: usize, k: usize },
    /// The triangle profile on `S²`, for the triangle with these vertices.
    SphericalTriangle { vertices: [[f64; 3]; 3] },
}

/// An evaluable caricature; base eigenfunctions are prepared once.
#[derive(Clone)]
pub struct CaricatureFn {
    pub kind: CaricatureKind,
    base: Option<Sampler>,
    triangle: Option<TriangleData>,
}

impl std::fmt::Debug for CaricatureFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaricatureFn").field("kind", &self.kind).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy)]
struct TriangleData {
    /// Inward unit normal of the side opposite each vertex.
    normals: [[f64; 3]; 3],
    angles: [f64; 3],
    diam: f64,
}

fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn dot3(u: &[f64; 3], v: &[f64]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = dot3(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn triangle_data(vertices: &[[f64; 3]; 3]) -> Result<TriangleData> {
    let v = vertices.map(unit);
    let mut normals = [[0.0; 3]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let c = cross(&v[j], &v[k]);
        let norm = dot3(&c, &c).sqrt();
        if norm < 1e-12 {
            return invalid("spherical triangle has collinear vertices");
        }
        let mut nrm = c.map(|x| x / norm);
        if dot3(&nrm, &v[i]) < 0.0 {
            nrm = nrm.map(|x| -x);
        }
        normals[i] = nrm;
    }
    let mut angles = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        angles[i] = PI - dot3(&normals[j], &normals[k]).clamp(-1.0, 1.0).acos();
    }
    let mut diam = 0.0f64;
    for i in 0..3 {
        for j in 0..i {
            diam = diam.max(dot3(&v[i], &v[j]).clamp(-1.0, 1.0).acos());
        }
    }
    Ok(TriangleData { normals, angles, diam })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_radii(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return invalid(format!("need 0 < a < b, got a={a}, b={b}"));
    }
    Ok(())
}

impl CaricatureFn {
    pub fn new(kind: CaricatureKind) -> Result<Self> {
        let mut base = None;
        let mut triangle = None;
        match &kind {
            CaricatureKind::ThinAnnulus { n, a, b } => {
                check_radii(*a, *b)?;
                if *n < 2 {
                    return invalid("dimension must be ≥ 2");
                }
            }
            CaricatureKind::NonThinAnnulusN3plus { n, a, b } => {
                check_radii(*a, *b)?;
                if *n < 3 {
                    return invalid(format!("the n ≥ 3 non-thin caricature needs n ≥ 3, got {n}"));
                }
            }
            CaricatureKind::NonThinAnnulusN2 { a, b } => check_radii(*a, *b)?,
            CaricatureKind::Box { half_widths } => {
                if half_widths.is_empty() || half_widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                    return invalid("box half widths must be positive");
                }
            }
            CaricatureKind::ThinAnnularProduct { n, a, b, base: b0, .. } => {
                check_radii(*a, *b)?;
                if b0.ambient_dim() != *n {
                    return invalid(format!("base lives in ℝ^{}, caricature in ℝ^{n}", b0.ambient_dim()));
                }
                base = Some(base_eigendata(b0)?.phi0);
            }
            CaricatureKind::OrthantProduct { n, k } => {
                if *k == 0 || k > n {
                    return invalid(format!("orthant product needs 1 ≤ k ≤ n, got n={n}, k={k}"));
                }
            }
            CaricatureKind::SphericalTriangle { vertices } => triangle = Some(triangle_data(vertices)?),
        }
        Ok(Self { kind, base, triangle })
    }

    /// Interior angles of a spherical triangle caricature.
    pub fn triangle_angles(&self) -> Option<[f64; 3]> {
        self.triangle.map(|t| t.angles)
    }

    /// Value at a Cartesian point (a unit vector for the spherical kinds).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        caricature_eval(self, x)
    }
}

fn outside<T>(what: &str, x: &[f64]) -> Result<T> {
    invalid(format!("point {x:?} lies outside the {what} caricature's domain"))
}

fn radial_check(n: usize, x: &[f64], a: f64, b: f64, what: &str) -> Result<f64> {
    if x.len() != n {
        return invalid(format!("expected a point of ℝ^{n}, got {} coordinates", x.len()));
    }
    let r = norm(x);
    let slack = 1e-12 * b;
    if r < a - slack || r > b + slack {
        return outside(what, x);
    }
    Ok(r.clamp(a, b))
}

pub fn caricature_eval(f: &CaricatureFn, x: &[f64]) -> Result<f64> {
    match &f.kind {
        &CaricatureKind::ThinAnnulus { n, a, b } => {
            let r = radial_check(n, x, a, b, "thin annulus")?;
            Ok(a.powf(-(n as f64) / 2.0 - 1.0) * (r - a).min(b - r) / (b / a - 1.0).powf(1.5))
        }
        &CaricatureKind::NonThinAnnulusN3plus { n, a, b } => {
            let r = radial_check(n, x, a, b, "non-thin annulus")?;
            Ok(b.powf(-(n as f64) / 2.0) * (1.0 - (a / r).powi(n as i32 - 2)) * (1.0 - r / b))
        }
        &CaricatureKind::NonThinAnnulusN2 { a, b } => {
            let r = radial_check(2, x, a, b, "planar non-thin annulus")?;
            Ok((r / a).ln() * (1.0 - r / b) / (b * (1.0 + b / (4.0 * a)).ln()))
        }
        CaricatureKind::Box { half_widths } => {
            if x.len() != half_widths.len() {
                return invalid(format!("expected {} coordinates, got {}", half_widths.len(), x.len()));
            }
            let mut v = 1.0;
            for (xi, ai) in x.iter().zip(half_widths) {
                if xi.abs() > *ai * (1.0 + 1e-12) {
                    return outside("box", x);
                }
                v *= (PI * xi / (2.0 * ai)).cos().max(0.0) / ai.sqrt();
            }
            Ok(v)
        }
        &CaricatureKind::ThinAnnularProduct { n, a, b, profile, weight, .. } => {
            let r = radial_check(n, x, a, b, "annular product")?;
            let w: Vec<f64> = x.iter().map(|v| v / r).collect();
            let g = (f.base.as_ref().expect("prepared base"))(&w);
            let radial = match profile {
                ThinProfile::Cosine => (2.0 / (b - a)).sqrt() * (PI * (r - 0.5 * (a + b)) / (b - a)).cos().max(0.0),
                ThinProfile::Tent => (r - a).min(b - r) / (b - a).powf(1.5),
            };
            let pref = match weight {
                RadialWeight::Inner => a,
                RadialWeight::Local => r,
            }
            .powf(-0.5 * (n as f64 - 1.0));
            Ok(pref * radial * g)
        }
        &CaricatureKind::OrthantProduct { n, k } => {
            if x.len() != n {
                return invalid(format!("expected a point of S^{}, got {} coordinates", n - 1, x.len()));
            }
            let r = norm(x);
            let mut v = 1.0;
            for xi in &x[..k] {
                let s = xi / r;
                if s < -1e-12 {
                    return outside("orthant", x);
                }
                v *= s.clamp(0.0, 1.0).asin();
            }
            Ok(v)
        }
        CaricatureKind::SphericalTriangle { .. } => {
            let t = f.triangle.as_ref().expect("prepared triangle");
            if x.len() != 3 {
                return invalid("spherical triangle caricature takes points of S²");
            }
            let r = norm(x);
            let mut d = [0.0; 3];
            for i in 0..3 {
                let s = dot3(&t.normals[i], x) / r;
                if s < -1e-12 {
                    return outside("spherical triangle", x);
                }
                d[i] = s.clamp(0.0, 1.0).asin();
            }
            let e = t.angles.map(|al| PI / al - 2.0);
            let num = d[0] * d[1] * d[2] * (d[0] + d[2]).powf(e[1]) * (d[1] + d[2]).powf(e[0]) * (d[0] + d[1]).powf(e[2]);
            Ok(num / t.diam.powf(e[0] + e[1] + e[2] + 4.0))
        }
    }
}

/// An eigenfunction sample for comparability audits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSample {
    pub point: Vec<f64>,
    pub value: f64,
    /// Relative interior depth in `[0, ½]`: 0 on the boundary, ½ at the deepest point.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparability {
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub samples: usize,
}

impl Comparability {
    /// `sup/inf`, the empirical two-sided constant.
    pub fn spread(&self) -> f64 {
        self.sup_ratio / self.inf_ratio
    }
}

/// `max` and `min` of `φ/Φ` over samples at depth at least `interior_margin`.
pub fn comparability_audit(samples: &[ProfileSample], caricature: &CaricatureFn, interior_margin: f64) -> Result<Comparability> {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut count = 0;
    for s in samples.iter().filter(|s| s.depth >= interior_margin) {
        let c = caricature.eval(&s.point)?;
        if !(c > 0.0) {
            continue;
        }
        let q = s.value / c;
        sup = sup.max(q);
        inf = inf.min(q);
        count += 1;
    }
    if count == 0 {
        return invalid(format!("no samples left after excluding depth < {interior_margin}"));
    }
    Ok(Comparability { sup_ratio: sup, inf_ratio: inf, samples: count })
}

/// Samples of the principal eigenfunction of the spherical shell `A_{a,b} ⊂ ℝⁿ`
/// along the first coordinate axis (the eigenfunction is radial).
pub fn annulus_profile_samples(n: usize, a: f64, b: f64, grid: usize) -> Result<Vec<ProfileSample>> {
    let res = solve_radial(n, a, b, 0.0, grid, 1)?.remove(0);
    let g = 1.0 / sphere_measure(n).sqrt();
    Ok(res
        .grid
        .iter()
        .zip(&res.f)
        .map(|(&r, &f)| {
            let mut point = vec![0.0; n];
            point[0] = r;
            ProfileSample { point, value: f * g, depth: (r - a).min(b - r) / (b - a) }
        })
        .collect())
}

/// Node samples of one mode of a grid solution. Nodes within two cells of the
/// boundary are dropped; depth is measured in cells relative to the deepest node.
pub fn grid_profile_samples(sol: &GridSpectrum, mode: usize) -> Vec<ProfileSample> {
    let deepest = *sol.boundary_cells.iter().max().unwrap_or(&1) as f64;
    (0..sol.active.len())
        .filter(|&u| sol.boundary_cells[u] > 2)
        .map(|u| ProfileSample {
            point: sol.point(u).to_vec(),
            value: sol.modes[mode][u],
            depth: 0.5 * sol.boundary_cells[u] as f64 / deepest,
        })
        .collect()
}

/// `[C₁(n,x), C₂(n,x)]` for `x = b/a`.
pub fn c1_c2(n: usize, x: f64) -> (f64, f64) {
    let nf = n as f64;
    let am = alpha(n);
    let inner = (1.0 - 1.0 / x).powi(2);
    let outer = (x - 1.0).powi(2);
    let first = nf * PI * PI / 4.0 * inner;
    if n >= 3 {
        (first.max(PI * PI + am * inner), (nf * PI).powi(2).min(PI * PI + am * outer))
    } else {
        (first.max(PI * PI + am * outer), (nf * PI).powi(2).min(PI * PI + am * inner))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueInterval {
    pub c1: f64,
    pub c2: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided bound on `λ(A_{a,b})`: `[C₁, C₂](n, b/a)/(b−a)²`.
pub fn annulus_eigenvalue_bounds(n: usize, a: f64, b: f64) -> Result<EigenvalueInterval> {
    check_radii(a, b)?;
    if n < 2 {
        return invalid("dimension must be ≥ 2");
    }
    let (c1, c2) = c1_c2(n, b / a);
    let d2 = (b - a).powi(2);
    Ok(EigenvalueInterval { c1, c2, lower: c1 / d2, upper: c2 / d2 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub quantity: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    pub slack: f64,
    /// Report-only quantities attached to the check.
    pub recorded: Vec<(String, f64)>,
}

impl BoundsReport {
    pub fn new(quantity: impl Into<String>, value: f64, lower: f64, upper: f64, slack: f64) -> Self {
        let pass = lower - slack <= value && value <= upper + slack;
        Self { quantity: quantity.into(), value, lower, upper, pass, slack, recorded: Vec::new() }
    }
}

/// The sandwich `λ ∈ [C₁, C₂]/(b−a)²` with the additive slack `1e−6·λ`.
pub fn annulus_sandwich_check(n: usize, a: f64, b: f64, lambda: f64) -> Result<BoundsReport> {
    let iv = annulus_eigenvalue_bounds(n, a, b)?;
    Ok(BoundsReport::new(format!("lambda(A_{{{a},{b}}}), n={n}"), lambda, iv.lower, iv.upper, 1e-6 * lambda))
}

/// `1/|U| ≤ ‖φ‖²_∞`, recording `‖φ‖²_∞/λ^{n/2}`.
pub fn supnorm_bounds_check(n: usize, lambda: f64, volume: f64, phi_sup: f64) -> Result<BoundsReport> {
    if !(lambda > 0.0 && volume > 0.0 && phi_sup > 0.0) {
        return invalid("sup-norm check needs positive λ, |U| and sup");
    }
    let sq = phi_sup * phi_sup;
    let mut rep = BoundsReport::new("sup_norm_squared", sq, 1.0 / volume, f64::INFINITY, 0.0);
    rep.recorded.push(("sup_sq_over_lambda_pow".into(), sq / lambda.powf(n as f64 / 2.0)));
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HadamardRow {
    pub t: f64,
    pub phi1: f64,
    pub derivative: f64,
    /// `t³·|Φ₁′(t)|`.
    pub normalized: f64,
}

/// Radial grid used by [`hadamard_scan`].
pub const HADAMARD_GRID: usize = 2048;

/// `Φ₁(t) = λ(A_{1,1+t})` and `t³|Φ₁′(t)|` by central differences with step `t/100`.
pub fn hadamard_scan(n: usize, t_grid: &[f64]) -> Result<Vec<HadamardRow>> {
    let phi = |t: f64| -> Result<f64> { Ok(solve_radial(n, 1.0, 1.0 + t, 0.0, HADAMARD_GRID, 1)?[0].lambda) };
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t <= 1.0) {
                return invalid(format!("Hadamard scan needs t in (0, 1], got {t}"));
            }
            let dt = t / 100.0;
            let derivative = (phi(t + dt)? - phi(t - dt)?) / (2.0 * dt);
            Ok(HadamardRow { t, phi1: phi(t)?, derivative, normalized: t.powi(3) * derivative.abs() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigengap {
    pub eps: f64,
    pub lambda_inner: f64,
    pub lambda_outer: f64,
    pub gap: f64,
}

/// `λ(A_{1,1+ε}) − λ(A_{1−a_ε, 1+ε+b_ε})`.
pub fn eigengap(n: usize, eps: f64, a_eps: f64, b_eps: f64) -> Result<Eigengap> {
    if !(eps > 0.0 && a_eps >= 0.0 && b_eps >= 0.0 && a_eps < 1.0) {
        return invalid(format!("eigengap needs ε > 0 and 0 ≤ a_ε < 1, got ε={eps}, a_ε={a_eps}"));
    }
    let inner = solve_radial(n, 1.0, 1.0 + eps, 0.0, HADAMARD_GRID, 1)?[0].lambda;
    let outer = solve_radial(n, 1.0 - a_eps, 1.0 + eps + b_eps, 0.0, HADAMARD_GRID, 1)?[0].lambda;
    Ok(Eigengap { eps, lambda_inner: inner, lambda_outer: outer, gap: inner - outer })
}
