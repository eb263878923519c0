//! Spectral Dirichlet heat kernels, equilibration audits, exact box kernels and
//! Gaussian two-sided fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::bases::BaseDomain;
use crate::error::{invalid, Error, Result};
use crate::geometry::{surrogate_distance, MetricDomain, QuadGrid, WeightFunction};
use crate::radial::{assemble_spectrum, principal_radial_eigenvalue, AnnularDomainSpec};
use crate::spectrum::{EigenMode, Spectrum, TailModel};

/// Relative tail tolerance of [`kernel_eval`].
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Truncated spectral sum and a certified bound on the omitted part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("time must be positive, got {t}"));
    }
    Ok(())
}

/// `p(t,x,y) = Σ e^{−λ_k t} φ_k(x) φ_k(y)`, failing when the tail bound
/// exceeds `1e−8·|p|`.
pub fn kernel_eval(spectrum: &Spectrum, t: f64, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    check_time(t)?;
    let value: f64 = spectrum.modes.iter().map(|m| (-m.lambda * t).exp() * (m.phi)(x) * (m.phi)(y)).sum();
    let tail_bound = spectrum.tail_bound(t);
    certify(value, tail_bound, t)?;
    Ok(KernelValue { value, tail_bound })
}

fn certify(value: f64, tail_bound: f64, t: f64) -> Result<()> {
    if !(tail_bound <= TAIL_TOLERANCE * value.abs()) {
        return Err(Error::Numerical(format!(
            "insufficient spectrum at t = {t:e}: tail bound {tail_bound:.3e} against kernel value {value:.3e}"
        )));
    }
    Ok(())
}

/// Doob-normalized kernel `p̃ = e^{λ₁t} p(t,x,y)/(φ₁(x)φ₁(y))`, summed in
/// shifted form so that large `t` does not overflow.
pub fn normalized_kernel(spectrum: &Spectrum, t: f64, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    check_time(t)?;
    let l1 = spectrum.lambda(0);
    let (px, py) = ((spectrum.modes[0].phi)(x), (spectrum.modes[0].phi)(y));
    if !(px > 0.0 && py > 0.0) {
        return invalid("normalized kernel needs points where φ₁ > 0");
    }
    let raw: f64 = spectrum.modes.iter().map(|m| (-(m.lambda - l1) * t).exp() * (m.phi)(x) * (m.phi)(y)).sum();
    let value = raw / (px * py);
    let tail_bound = spectrum.tail_bound_scaled(t, l1) / (px * py);
    certify(value, tail_bound, t)?;
    Ok(KernelValue { value, tail_bound })
}

/// Mode values at a fixed sample set, for repeated kernel sums.
struct SampledModes {
    lambdas: Vec<f64>,
    /// `values[s][k] = φ_k(x_s)`.
    values: Vec<Vec<f64>>,
}

impl SampledModes {
    fn new(spectrum: &Spectrum, points: &[Vec<f64>]) -> Result<Self> {
        let values: Vec<Vec<f64>> = points.iter().map(|p| spectrum.mode_values(p)).collect();
        if values.iter().any(|v| !(v[0] > 0.0)) {
            return invalid("equilibration samples must lie where φ₁ > 0");
        }
        Ok(Self { lambdas: spectrum.modes.iter().map(|m| m.lambda).collect(), values })
    }

    fn normalized(&self, t: f64, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.values[i], &self.values[j]);
        let l1 = self.lambdas[0];
        let s: f64 = self.lambdas.iter().zip(a.iter().zip(b)).map(|(l, (u, v))| (-(l - l1) * t).exp() * u * v).sum();
        s / (a[0] * b[0])
    }
}

/// Dirichlet spectrum of `(lo, hi)`: `λ_k = (kπ/L)²`, `φ_k = √(2/L) sin(kπ(x−lo)/L)`.
pub fn interval_spectrum(lo: f64, hi: f64, count: usize) -> Result<Spectrum> {
    if !(hi > lo) || count == 0 {
        return invalid("interval spectrum needs lo < hi and count ≥ 1");
    }
    let len = hi - lo;
    let c = (2.0 / len).sqrt();
    let modes = (1..=count)
        .map(|k| {
            let w = k as f64 * PI / len;
            EigenMode {
                lambda: w * w,
                phi: Arc::new(move |x: &[f64]| c * (w * (x[0] - lo)).sin()),
                sup_norm: c,
                label: format!("k={k}"),
            }
        })
        .collect();
    let base = (PI / len).powi(2);
    Spectrum::new(modes, TailModel { floor: base * ((count + 1) * (count + 1)) as f64, weyl_c: base, weyl_q: 2.0, sup_sq: 2.0 / len })
}

/// Dirichlet spectrum of the box `∏(−a_i, a_i)` below `cut`, for one or two
/// dimensions.
pub fn box_spectrum(half_widths: &[f64], cut: f64) -> Result<Spectrum> {
    if half_widths.iter().any(|&a| !(a > 0.0)) {
        return invalid("box half-widths must be positive");
    }
    match half_widths.len() {
        1 => {
            let a = half_widths[0];
            let count = ((cut.max(0.0)).sqrt() * 2.0 * a / PI).floor().max(1.0) as usize;
            interval_spectrum(-a, a, count)
        }
        2 => {
            let (a1, a2) = (half_widths[0], half_widths[1]);
            let w = |k: usize, a: f64| k as f64 * PI / (2.0 * a);
            let c = 1.0 / (a1 * a2).sqrt();
            let mut modes = Vec::new();
            let mut k1 = 1;
            while w(k1, a1).powi(2) + w(1, a2).powi(2) < cut {
                let mut k2 = 1;
                while w(k1, a1).powi(2) + w(k2, a2).powi(2) < cut {
                    let (w1, w2) = (w(k1, a1), w(k2, a2));
                    modes.push(EigenMode {
                        lambda: w1 * w1 + w2 * w2,
                        phi: Arc::new(move |x: &[f64]| c * (w1 * (x[0] + a1)).sin() * (w2 * (x[1] + a2)).sin()),
                        sup_norm: c,
                        label: format!("k1={k1},k2={k2}"),
                    });
                    k2 += 1;
                }
                k1 += 1;
            }
            if modes.is_empty() {
                return invalid(format!("cut {cut} lies below the principal eigenvalue"));
            }
            // Li–Yau in the plane: λ_k ≥ 2πk/|B|.
            Spectrum::new(modes, TailModel { floor: cut, weyl_c: 2.0 * PI / (4.0 * a1 * a2), weyl_q: 1.0, sup_sq: c * c })
        }
        n => Err(Error::Unsupported(format!("box heat kernels are enumerated in one or two dimensions, got {n}"))),
    }
}

/// Product spectrum of a planar annular domain complete up to roughly
/// `λ₁ + 40/t_min`, so that [`kernel_eval`] certifies down to `t_min`.
pub fn annulus_heat_spectrum(spec: &AnnularDomainSpec, t_min: f64) -> Result<Spectrum> {
    check_time(t_min)?;
    spec.validate()?;
    let l1 = principal_radial_eigenvalue(spec.n, spec.a, spec.b, crate::bases::base_eigendata(&spec.base)?.lambda0, 512)?;
    let target = l1 + 40.0 / t_min;
    let root = target.sqrt();
    let m_base = match spec.base {
        BaseDomain::FullSphere { n: 2 } => (spec.b * root).ceil() as usize + 2,
        BaseDomain::CircleArc { theta1 } => (theta1 * spec.b * root / PI).ceil() as usize + 2,
        _ => return Err(Error::Unsupported("heat-kernel spectra are enumerated for circle and arc bases only".into())),
    };
    // Radial modes grow at least like (jπ/(b−a))² − 1/(4a²).
    let k_radial = ((spec.thickness() * (target + 0.25 / (spec.a * spec.a)).sqrt() / PI).ceil() as usize + 1).max(2);
    assemble_spectrum(spec, m_base, k_radial)
}

/// Method-of-images Dirichlet kernel on `(lo, hi)`.
pub fn images_kernel_interval(lo: f64, hi: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    let len = hi - lo;
    let (x, y) = (x - lo, y - lo);
    let g = |z: f64| (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    // Images beyond this shift are below e^{−40} relative to the leading term.
    let reach = ((160.0 * t).sqrt() / (2.0 * len)).ceil() as i64 + 2;
    Ok((-reach..=reach).map(|n| {
        let s = 2.0 * n as f64 * len;
        g(x - y + s) - g(x + y + s)
    }).sum())
}

/// `|∫ p(t,x,z) p(s,z,y) dz − p(t+s,x,y)|` on an interval, Lebesgue measure.
pub fn chapman_kolmogorov_defect(spectrum: &Spectrum, lo: f64, hi: f64, t: f64, s: f64, x: f64, y: f64) -> Result<f64> {
    let (zs, ws) = crate::numerics::gauss_legendre_on(lo, hi, 200);
    let mut integral = 0.0;
    for (z, w) in zs.iter().zip(&ws) {
        integral += w * kernel_sum(spectrum, t, &[x], &[*z]) * kernel_sum(spectrum, s, &[*z], &[y]);
    }
    Ok((integral - kernel_eval(spectrum, t + s, &[x], &[y])?.value).abs())
}

fn kernel_sum(spectrum: &Spectrum, t: f64, x: &[f64], y: &[f64]) -> f64 {
    spectrum.modes.iter().map(|m| (-m.lambda * t).exp() * (m.phi)(x) * (m.phi)(y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibrationRow {
    pub t: f64,
    /// `sup |p̃(t,x,y) − 1|` over sample pairs.
    pub sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibrationReport {
    pub rows: Vec<EquilibrationRow>,
    pub fitted_rate: f64,
    /// `λ₂ − λ₁` of the spectrum used.
    pub spectral_gap: f64,
    pub rate_rel_error: f64,
    /// Times entering the log-linear fit.
    pub fit_window: (f64, f64),
    pub metadata: BTreeMap<String, String>,
}

/// Deviations inside this window are above rounding and past the transient.
const FIT_FLOOR: f64 = 1e-10;
const FIT_CEIL: f64 = 1e-1;

/// Per `t`, the sup over sample pairs of `|p̃ − 1|`, with a log-linear fit of
/// the decay rate over the later part of the grid.
pub fn equilibration_audit(spectrum: &Spectrum, samples: &[Vec<f64>], t_grid: &[f64]) -> Result<EquilibrationReport> {
    if samples.is_empty() || t_grid.len() < 3 {
        return invalid("equilibration audit needs samples and at least three times");
    }
    let gap = spectrum.second_level().ok_or_else(|| Error::Validation("spectrum has a single level".into()))? - spectrum.lambda(0);
    let sm = SampledModes::new(spectrum, samples)?;
    let l1 = spectrum.lambda(0);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        check_time(t)?;
        let min_phi = sm.values.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let tail = spectrum.tail_bound_scaled(t, l1) / (min_phi * min_phi);
        if tail > TAIL_TOLERANCE {
            return Err(Error::Numerical(format!("insufficient spectrum at t = {t:e}: normalized tail bound {tail:.3e}")));
        }
        let mut dev = 0.0f64;
        for i in 0..samples.len() {
            for j in i..samples.len() {
                dev = dev.max((sm.normalized(t, i, j) - 1.0).abs());
            }
        }
        rows.push(EquilibrationRow { t, sup_deviation: dev });
    }
    let usable: Vec<&EquilibrationRow> = rows.iter().filter(|r| r.sup_deviation >= FIT_FLOOR && r.sup_deviation <= FIT_CEIL).collect();
    if usable.len() < 3 {
        return Err(Error::Numerical("too few times inside the decay-fit window".into()));
    }
    let tail = &usable[(usable.len() / 2).min(usable.len() - 3)..];
    let slope = least_squares_slope(tail.iter().map(|r| (r.t, r.sup_deviation.ln())));
    let fitted_rate = -slope;
    let mut metadata = BTreeMap::new();
    metadata.insert("modes".into(), spectrum.len().to_string());
    metadata.insert("samples".into(), samples.len().to_string());
    Ok(EquilibrationReport {
        fit_window: (tail[0].t, tail[tail.len() - 1].t),
        rows,
        fitted_rate,
        spectral_gap: gap,
        rate_rel_error: (fitted_rate - gap).abs() / gap,
        metadata,
    })
}

fn least_squares_slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Interior sample points of a planar annular domain: five radii by sixteen
/// angles (clipped to the arc).
pub fn annulus_samples(spec: &AnnularDomainSpec) -> Vec<Vec<f64>> {
    let d = spec.thickness();
    let (t0, span) = match spec.base {
        BaseDomain::CircleArc { theta1 } => (theta1 / 32.0, theta1 * 15.0 / 16.0),
        _ => (0.0, 2.0 * PI * 15.0 / 16.0),
    };
    let mut out = Vec::new();
    for f in [0.125, 0.25, 0.5, 0.75, 0.875] {
        let r = spec.a + f * d;
        for j in 0..16 {
            let th = t0 + span * j as f64 / 15.0;
            out.push(vec![r * th.cos(), r * th.sin()]);
        }
    }
    out
}

/// Cell-centered sample points of `∏(−a_i, a_i)`, `per_dim` per coordinate.
pub fn box_samples(half_widths: &[f64], per_dim: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = half_widths
        .iter()
        .map(|&a| (0..per_dim).map(|i| -a + (i as f64 + 0.5) * 2.0 * a / per_dim as f64).collect())
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out.iter().flat_map(|p| axis.iter().map(move |&v| {
            let mut q = p.clone();
            q.push(v);
            q
        })).collect();
    }
    out
}

/// Exact `e^{λt}p/(φ₁φ₁)` on `(−a, a)`, through `φ_j/φ₁ = U_{j−1}(cos θ)`.
pub fn interval_normalized_exact(a: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    if !(x.abs() < a && y.abs() < a) {
        return invalid("points must lie inside the interval");
    }
    let (cx, cy) = ((PI * (x + a) / (2.0 * a)).cos(), (PI * (y + a) / (2.0 * a)).cos());
    let rate = (PI / (2.0 * a)).powi(2) * t;
    // Chebyshev recurrences U_{j} = 2c U_{j−1} − U_{j−2}, |U_{j−1}| ≤ j.
    let (mut ux, mut ux_prev, mut uy, mut uy_prev) = (1.0, 0.0, 1.0, 0.0);
    let mut sum = 1.0;
    let mut j = 1usize;
    loop {
        let (nx, ny) = (2.0 * cx * ux - ux_prev, 2.0 * cy * uy - uy_prev);
        (ux_prev, ux, uy_prev, uy) = (ux, nx, uy, ny);
        j += 1;
        let jf = j as f64;
        let w = (-(jf * jf - 1.0) * rate).exp();
        sum += w * ux * uy;
        if w * jf * jf < 1e-18 * sum.abs() && jf * jf * rate > 1.0 {
            break;
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxKernelRow {
    pub t: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `∏ (1 + (a_i/√t)³)`.
    pub upper_envelope: f64,
    /// `∏ (1 − (a_i/√t)³)` when `t ≥ max a_i²`.
    pub lower_envelope: Option<f64>,
    pub sup_deviation: f64,
    /// `∏ (1 + (a_i/√t)³) − 1`, which is `(a/√t)³` in one dimension.
    pub deviation_envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxKernelReport {
    pub half_widths: Vec<f64>,
    pub rows: Vec<BoxKernelRow>,
    /// Smallest `C` with `max ratio ≤ C·upper envelope` on every row.
    pub c_upper: f64,
    /// Largest `c` with `min ratio ≥ c·lower envelope` where the envelope is positive.
    pub c_lower: Option<f64>,
    /// Smallest `C` with `sup deviation ≤ C·deviation envelope` for `t ≥ max a_i²`.
    pub c_deviation: Option<f64>,
}

/// Both box envelopes against exact one-dimensional sums, using the product
/// identity for the normalized kernel.
pub fn box_kernel_bounds_check(half_widths: &[f64], t_grid: &[f64], per_dim: usize) -> Result<BoxKernelReport> {
    if half_widths.is_empty() || half_widths.iter().any(|&a| !(a > 0.0)) || per_dim == 0 {
        return invalid("box kernel check needs positive half-widths and samples");
    }
    let a_max = half_widths.iter().copied().fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (mut hi, mut lo) = (1.0, 1.0);
        for &a in half_widths {
            let pts = box_samples(&[a], per_dim);
            let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
            for p in &pts {
                for q in &pts {
                    let r = interval_normalized_exact(a, t, p[0], q[0])?;
                    mx = mx.max(r);
                    mn = mn.min(r);
                }
            }
            hi *= mx;
            lo *= mn;
        }
        let cube = |a: f64| (a / t.sqrt()).powi(3);
        let upper_envelope: f64 = half_widths.iter().map(|&a| 1.0 + cube(a)).product();
        let lower_envelope = (t >= a_max * a_max).then(|| half_widths.iter().map(|&a| 1.0 - cube(a)).product());
        rows.push(BoxKernelRow {
            t,
            max_ratio: hi,
            min_ratio: lo,
            upper_envelope,
            lower_envelope,
            sup_deviation: (hi - 1.0).abs().max((lo - 1.0).abs()),
            deviation_envelope: upper_envelope - 1.0,
        });
    }
    let c_upper = rows.iter().map(|r| r.max_ratio / r.upper_envelope).fold(0.0, f64::max);
    let lower: Vec<f64> = rows.iter().filter_map(|r| r.lower_envelope.filter(|&e| e > 0.0).map(|e| r.min_ratio / e)).collect();
    let dev: Vec<f64> = rows.iter().filter(|r| r.t >= a_max * a_max).map(|r| r.sup_deviation / r.deviation_envelope).collect();
    Ok(BoxKernelReport {
        half_widths: half_widths.to_vec(),
        rows,
        c_upper,
        c_lower: (!lower.is_empty()).then(|| lower.iter().copied().fold(f64::INFINITY, f64::min)),
        c_deviation: (!dev.is_empty()).then(|| dev.iter().copied().fold(0.0, f64::max)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HkeRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Surrogate distance.
    pub sigma: f64,
    /// `σ²/t`.
    pub u: f64,
    pub p_tilde: f64,
    pub v_x: f64,
    pub v_y: f64,
    /// `p̃ √(V(x,√t) V(y,√t))`.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HkeFit {
    pub rows: Vec<HkeRow>,
    pub c_lo: f64,
    pub c_hi: f64,
    pub c2: f64,
    pub c4: f64,
    /// Set when a constant could not be pinned by the sample.
    pub degenerate: Option<String>,
}

/// Largest `σ²/t` in the pair design.
pub const HKE_MAX_U: f64 = 20.0;
const HKE_U_LADDER: [f64; 7] = [0.0, 0.25, 1.0, 2.0, 5.0, 10.0, HKE_MAX_U];

/// Pairs `(x, y)` at time `t`: two interior radii for `x`, angular offsets
/// realizing the `σ²/t` ladder, and radial offsets across the thickness.
pub fn hke_pairs(spec: &AnnularDomainSpec, t: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = spec.thickness();
    let theta_max = match spec.base {
        BaseDomain::CircleArc { theta1 } => theta1,
        _ => PI,
    };
    let theta0 = match spec.base {
        BaseDomain::CircleArc { theta1 } => theta1 / 8.0,
        _ => 0.0,
    };
    let pt = |r: f64, th: f64| vec![r * th.cos(), r * th.sin()];
    let mut out = Vec::new();
    for fx in [0.25, 0.5] {
        let rx = spec.a + fx * d;
        let x = pt(rx, theta0);
        for u in HKE_U_LADDER {
            let dth = (u * t).sqrt() / spec.a;
            if theta0 + dth <= theta0 + theta_max * 0.75 {
                out.push((x.clone(), pt(rx, theta0 + dth)));
            }
        }
        for fy in [0.125, 0.75, 0.875] {
            out.push((x.clone(), pt(spec.a + fy * d, theta0)));
        }
    }
    out
}

/// Fits `c_lo e^{−u/c₂} ≤ R ≤ c_hi e^{−u/c₄}` with `u = σ²/t` over the pair
/// design on a log-spaced time grid.
///
/// `c_hi` is twice the largest `R`; `c_lo` is half the smallest `R` with
/// `u ≤ 1`; `c₂` and `c₄` are then the smallest constants that make each side hold.
pub fn gaussian_hke_audit(spec: &AnnularDomainSpec, t_grid: &[f64], ball_grid: (usize, usize)) -> Result<HkeFit> {
    if t_grid.is_empty() {
        return invalid("HKE audit needs at least one time");
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let spectrum = annulus_heat_spectrum(spec, t_min)?;
    let weight = WeightFunction::dirichlet(spec)?;
    let domain = MetricDomain::annular(spec.clone())?;
    let grid = QuadGrid::new(domain.clone(), &weight, ball_grid.0, ball_grid.1)?;
    let total = grid.total_mass();
    let vol = |x: &[f64], r: f64| grid.ball_measure_chart(domain.chart(x), r) / total;
    let mut rows = Vec::new();
    for &t in t_grid {
        for (x, y) in hke_pairs(spec, t) {
            let p = normalized_kernel(&spectrum, t, &x, &y)?.value;
            let sigma = surrogate_distance(&x, &y, spec)?;
            let (v_x, v_y) = (vol(&x, t.sqrt()), vol(&y, t.sqrt()));
            rows.push(HkeRow { t, sigma, u: sigma * sigma / t, p_tilde: p, v_x, v_y, r: p * (v_x * v_y).sqrt(), x, y });
        }
    }
    if rows.iter().any(|r| !(r.r > 0.0 && r.r.is_finite())) {
        return Err(Error::Numerical("nonpositive normalized kernel in the HKE sample".into()));
    }
    let c_hi = 2.0 * rows.iter().map(|r| r.r).fold(0.0, f64::max);
    let c_lo = 0.5 * rows.iter().filter(|r| r.u <= 1.0).map(|r| r.r).fold(f64::INFINITY, f64::min);
    let c4 = rows.iter().filter(|r| r.u > 0.0).map(|r| r.u / (c_hi / r.r).ln()).fold(0.0, f64::max);
    let c2 = rows.iter().filter(|r| r.u > 0.0 && r.r < c_lo).map(|r| r.u / (c_lo / r.r).ln()).fold(0.0, f64::max);
    let degenerate = if !c_lo.is_finite() {
        Some("no near-diagonal pairs".into())
    } else if c2 == 0.0 {
        Some("lower Gaussian side is never active".into())
    } else if c4 == 0.0 {
        Some("no off-diagonal pairs".into())
    } else {
        None
    };
    Ok(HkeFit { rows, c_lo, c_hi, c2, c4, degenerate })
}

/// Log-spaced times from `t0` to `t1`.
pub fn log_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t0];
    }
    (0..count).map(|i| t0 * (t1 / t0).powf(i as f64 / (count - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn thin(eps: f64) -> AnnularDomainSpec {
        AnnularDomainSpec::new(2, 1.0, 1.0 + eps, BaseDomain::FullSphere { n: 2 }).unwrap()
    }

    #[test]
    fn images_oracle_matches_spectral_sum() {
        let spec = interval_spectrum(-1.0, 1.0, 60).unwrap();
        for (x, y) in [(0.0, 0.0), (0.3, -0.5), (0.9, 0.95), (-0.99, 0.2)] {
            let s = kernel_eval(&spec, 0.1, &[x], &[y]).unwrap().value;
            let i = images_kernel_interval(-1.0, 1.0, 0.1, x, y).unwrap();
            assert!((s - i).abs() <= 1e-10 * i.abs().max(1e-3), "{x},{y}: {s} vs {i}");
        }
    }

    #[test]
    fn chapman_kolmogorov_on_interval() {
        let spec = interval_spectrum(0.0, 1.0, 80).unwrap();
        for (x, y) in [(0.2, 0.7), (0.5, 0.5), (0.05, 0.9)] {
            assert!(chapman_kolmogorov_defect(&spec, 0.0, 1.0, 0.02, 0.03, x, y).unwrap() < 1e-6);
        }
    }

    #[test]
    fn spectral_dominance_at_large_time() {
        let spec = interval_spectrum(0.0, 2.0, 30).unwrap();
        let gap = spec.lambda(1) - spec.lambda(0);
        let t = 20.0 / gap;
        let (x, y) = (0.4, 1.3);
        let p = kernel_eval(&spec, t, &[x], &[y]).unwrap().value;
        let phi = &spec.modes[0].phi;
        let target = phi(&[x]) * phi(&[y]);
        assert_relative_eq!((spec.lambda(0) * t).exp() * p, target, max_relative = 1e-6);
    }

    #[test]
    fn insufficient_spectrum_is_reported() {
        let spec = interval_spectrum(0.0, 1.0, 3).unwrap();
        assert!(matches!(kernel_eval(&spec, 1e-4, &[0.5], &[0.5]), Err(Error::Numerical(_))));
        assert!(kernel_eval(&spec, 0.0, &[0.5], &[0.5]).is_err());
    }

    #[test]
    fn box_ratio_is_a_product_of_interval_ratios() {
        let spec = box_spectrum(&[1.0, 0.5], 3000.0).unwrap();
        for t in [0.2, 0.5, 1.0] {
            for (x, y) in [([0.1, 0.2], [-0.4, 0.3]), ([0.9, -0.45], [0.8, 0.4])] {
                let whole = normalized_kernel(&spec, t, &x, &y).unwrap().value;
                let prod = interval_normalized_exact(1.0, t, x[0], y[0]).unwrap() * interval_normalized_exact(0.5, t, x[1], y[1]).unwrap();
                assert!((whole - prod).abs() <= 1e-12 * prod, "t = {t}: {whole} vs {prod}");
            }
        }
    }

    #[test]
    fn box_envelopes() {
        let rep = box_kernel_bounds_check(&[1.0], &[0.01, 0.1, 1.0, 2.0, 10.0], 40).unwrap();
        let row = rep.rows.iter().find(|r| r.t == 1.0).unwrap();
        assert!(row.max_ratio <= 1.0 + 2.0 && row.min_ratio >= 1.0 - 2.0);
        assert!(rep.c_deviation.unwrap() <= 2.0);
        assert!(rep.c_upper <= 10.0 && rep.c_lower.unwrap() > 0.0);
        let late = rep.rows.last().unwrap();
        assert!((late.max_ratio - 1.0).abs() < 1e-10 && (late.min_ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn box_equilibration_rate() {
        let spec = box_spectrum(&[1.0], 4000.0).unwrap();
        let rep = equilibration_audit(&spec, &box_samples(&[1.0], 12), &log_times(0.05, 4.0, 24)).unwrap();
        assert!(rep.rate_rel_error < 0.05, "{rep:?}");
        let spec2 = box_spectrum(&[1.0, 0.6], 2500.0).unwrap();
        let rep2 = equilibration_audit(&spec2, &box_samples(&[1.0, 0.6], 6), &log_times(0.05, 4.0, 24)).unwrap();
        assert!(rep2.rate_rel_error < 0.05, "{rep2:?}");
    }

    #[test]
    fn thin_annulus_equilibrates_after_diameter_scale() {
        let spec = thin(0.1);
        let s = annulus_heat_spectrum(&spec, 0.5).unwrap();
        let ts = log_times(0.5, 30.0, 20);
        let rep = equilibration_audit(&s, &annulus_samples(&spec), &ts).unwrap();
        assert!(rep.rate_rel_error < 0.05, "{rep:?}");
        let diam2 = PI * PI;
        let at = rep.rows.iter().find(|r| r.t >= diam2).unwrap();
        assert!(at.sup_deviation < 1.0);
        assert!(1.0 / s.lambda(0) < 0.01 * diam2);
    }

    #[test]
    fn diagonal_ratio_decreases() {
        let mut prev = f64::INFINITY;
        for t in log_times(0.05, 5.0, 30) {
            let r = interval_normalized_exact(1.0, t, 0.7, 0.7).unwrap();
            assert!(r <= prev && r >= 1.0);
            prev = r;
        }
    }

    #[test]
    fn hke_diagonal_pairs_need_no_gaussian() {
        let spec = thin(0.1);
        let fit = gaussian_hke_audit(&spec, &log_times(0.01, PI * PI, 6), (32, 2048)).unwrap();
        assert!(fit.degenerate.is_none(), "{:?}", fit.degenerate);
        for r in fit.rows.iter().filter(|r| r.u == 0.0) {
            assert!(r.r >= fit.c_lo && r.r <= fit.c_hi);
        }
        assert!(fit.c_lo > 0.0 && fit.c2 > 0.0 && fit.c4 > 0.0 && fit.c_hi.is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn kernel_is_symmetric_positive_sub_markov(x in 0.01f64..0.99, y in 0.01f64..0.99, t in 0.01f64..1.0) {
            let spec = interval_spectrum(0.0, 1.0, 80).unwrap();
            let pxy = kernel_eval(&spec, t, &[x], &[y]).unwrap().value;
            let pyx = kernel_eval(&spec, t, &[y], &[x]).unwrap().value;
            prop_assert!((pxy - pyx).abs() <= 1e-12 * pxy.abs().max(1e-300));
            prop_assert!(pxy > 0.0);
            let (zs, ws) = crate::numerics::gauss_legendre_on(0.0, 1.0, 200);
            let mass: f64 = zs.iter().zip(&ws).map(|(z, w)| w * kernel_sum(&spec, t, &[x], &[*z])).sum();
            prop_assert!(mass <= 1.0 + 1e-10);
        }
    }
}
