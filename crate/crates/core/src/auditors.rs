//! Empirical volume-doubling and Poincaré audits, and the sector counterexample.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bases::BaseDomain;
use crate::error::{invalid, Error, Result};
use crate::geometry::{build_net, MetricDomain, QuadGrid, WeightFunction, WeightedNet};
use crate::numerics::{csr_smallest_eigenpairs, gauss_legendre_on, CsrMatrix};
use crate::specfun::{bessel_j_log, first_positive_zero, BesselOrder};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub center: Vec<f64>,
    pub r: f64,
    pub statistic: f64,
    /// Set when the row is excluded from the summary.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditSummary {
    pub max: f64,
    pub min: f64,
    /// `max/min`.
    pub spread: f64,
    pub rows_used: usize,
    pub rows_flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub name: String,
    pub rows: Vec<AuditRow>,
    pub summary: AuditSummary,
    pub config: BTreeMap<String, String>,
}

impl AuditReport {
    pub fn new(name: impl Into<String>, rows: Vec<AuditRow>, config: BTreeMap<String, String>) -> Result<Self> {
        let used: Vec<f64> = rows.iter().filter(|r| r.flag.is_none()).map(|r| r.statistic).collect();
        if used.is_empty() {
            return Err(Error::Numerical("every audit row was flagged".into()));
        }
        let max = used.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = used.iter().copied().fold(f64::INFINITY, f64::min);
        let summary = AuditSummary { max, min, spread: max / min, rows_used: used.len(), rows_flagged: rows.len() - used.len() };
        Ok(Self { name: name.into(), rows, summary, config })
    }

    /// One line per row: `center…,r,statistic,flag`.
    pub fn to_csv(&self) -> String {
        let dim = self.rows.first().map_or(0, |r| r.center.len());
        let mut s = String::new();
        let cols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        let _ = writeln!(s, "{}{}r,statistic,flag", cols.join(","), if dim > 0 { "," } else { "" });
        for row in &self.rows {
            for c in &row.center {
                let _ = write!(s, "{c:.16e},");
            }
            let _ = writeln!(s, "{:.16e},{:.16e},{}", row.r, row.statistic, row.flag.as_deref().unwrap_or(""));
        }
        s
    }
}

fn config_of(domain: &MetricDomain, tag: &str, extra: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut cfg = BTreeMap::new();
    cfg.insert("metric".into(), domain.metric_tag().into());
    cfg.insert("weight".into(), tag.into());
    for (k, v) in extra {
        cfg.insert((*k).into(), v.clone());
    }
    cfg
}

/// `ε/8, ε/4, …` while not above `diam`, then `diam` itself.
pub fn ladder_radii(eps: f64, diam: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = eps / 8.0;
    while r < diam * (1.0 - 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    out.push(diam);
    out
}

/// Boundary and interior centers of a planar annular domain or interval.
pub fn standard_centers(domain: &MetricDomain) -> Vec<Vec<f64>> {
    match domain {
        MetricDomain::Interval { lo, hi } => {
            let l = hi - lo;
            vec![vec![*lo], vec![lo + 0.25 * l], vec![lo + 0.5 * l]]
        }
        MetricDomain::Annular(s) => {
            let t = match s.base {
                BaseDomain::CircleArc { theta1 } => 0.5 * theta1,
                _ => 0.0,
            };
            let d = s.b - s.a;
            [s.a, s.a + 0.125 * d, s.a + 0.5 * d, s.b]
                .iter()
                .map(|&r| domain.cartesian((r, t)))
                .collect()
        }
    }
}

/// `V(x, 2r)/V(x, r)` per (center, radius); summary max is `D̂`.
pub fn doubling_profile(grid: &QuadGrid, centers: &[Vec<f64>], radii: &[f64]) -> Result<AuditReport> {
    let diam = grid.domain.diameter();
    if radii.iter().any(|&r| !(r > 0.0 && r <= diam * (1.0 + 1e-12))) {
        return invalid(format!("doubling radii must lie in (0, {diam}]"));
    }
    let mut rows = Vec::new();
    for c in centers {
        let cc = grid.domain.chart(c);
        for &r in radii {
            let small = grid.ball_measure_chart(cc, r);
            let big = grid.ball_measure_chart(cc, 2.0 * r);
            let (statistic, flag) = if small > 0.0 { (big / small, None) } else { (f64::NAN, Some("empty_ball".into())) };
            rows.push(AuditRow { center: c.clone(), r, statistic, flag });
        }
    }
    let (h1, h2) = grid.steps();
    AuditReport::new(
        "doubling",
        rows,
        config_of(&grid.domain, grid.tag.as_str(), &[("grid", format!("{}x{}", grid.n1, grid.n2)), ("steps", format!("{h1:e},{h2:e}"))]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoincareMode {
    /// Weighted Neumann operator on a per-ball grid; `P̂ = 1/(r²μ₂)`.
    ContinuousGrid,
    /// Weighted graph Laplacian on `m`-hop balls of an ε-net, `m = max(1, round(r/2ε))`;
    /// `P̂ = 1/(m²μ₂)`.
    DiscreteNet { epsilon: f64, grid: (usize, usize) },
}

/// Cells per direction of the continuous-mode ball grids.
pub const BALL_GRID: usize = 24;
/// Angular cells when a ball wraps the whole circle.
pub const BALL_GRID_PERIODIC: usize = 64;
/// Cells of the continuous-mode grids on intervals.
pub const BALL_GRID_INTERVAL: usize = 400;

/// Finite-volume weighted Neumann problem: masses and face conductances.
struct NeumannProblem {
    mass: Vec<f64>,
    faces: Vec<(usize, usize, f64)>,
}

impl NeumannProblem {
    fn matrix(&self) -> Result<CsrMatrix> {
        let n = self.mass.len();
        let mut diag = vec![0.0; n];
        let mut t = Vec::with_capacity(2 * self.faces.len() + n);
        for &(i, j, c) in &self.faces {
            diag[i] += c;
            diag[j] += c;
            let s = -c / (self.mass[i] * self.mass[j]).sqrt();
            t.push((i, j, s));
            t.push((j, i, s));
        }
        for (i, d) in diag.iter().enumerate() {
            t.push((i, i, d / self.mass[i]));
        }
        CsrMatrix::from_triplets(n, t)
    }

    /// Smallest two eigenvalues of `L f = μ M f`.
    fn bottom_pair(&self) -> Result<(f64, f64)> {
        let a = self.matrix()?;
        let n = self.mass.len();
        let mean_diag = (0..n).map(|i| a.row(i).filter(|&(j, _)| j == i).map(|(_, v)| v).sum::<f64>()).sum::<f64>() / n as f64;
        let pairs = csr_smallest_eigenpairs(&a, 2, -1e-3 * mean_diag)?;
        Ok((pairs[0].value, pairs[1].value))
    }
}

/// Continuous-mode grid of the ball `B(c, r)` clipped to the domain.
fn ball_problem(domain: &MetricDomain, weight: &WeightFunction, c: (f64, f64), r: f64) -> Option<NeumannProblem> {
    match domain {
        MetricDomain::Interval { lo, hi } => {
            let (x0, x1) = ((c.0 - r).max(*lo), (c.0 + r).min(*hi));
            if x1 - x0 <= 1e-14 * (hi - lo) {
                return None;
            }
            let n = BALL_GRID_INTERVAL;
            let h = (x1 - x0) / n as f64;
            let w: Vec<f64> = (0..n).map(|i| weight.eval(&[x0 + (i as f64 + 0.5) * h])).collect();
            let mass = w.iter().map(|wi| wi * h).collect();
            let faces = (0..n - 1).map(|i| (i, i + 1, weight.eval(&[x0 + (i + 1) as f64 * h]) / h)).collect();
            Some(NeumannProblem { mass, faces })
        }
        MetricDomain::Annular(s) => {
            let (r0, r1) = ((c.0 - r).max(s.a), (c.0 + r).min(s.b));
            if r1 - r0 <= 1e-14 * (s.b - s.a) {
                return None;
            }
            let half = r / s.a;
            let (t0, t1, periodic) = match s.base {
                BaseDomain::CircleArc { theta1 } => ((c.1 - half).max(0.0), (c.1 + half).min(theta1), false),
                _ if half >= PI => (0.0, 2.0 * PI, true),
                _ => (c.1 - half, c.1 + half, false),
            };
            let nr = BALL_GRID;
            let nt = if periodic { BALL_GRID_PERIODIC } else { BALL_GRID };
            let (hr, ht) = ((r1 - r0) / nr as f64, (t1 - t0) / nt as f64);
            let rad = |i: f64| r0 + i * hr;
            let ang = |j: f64| t0 + j * ht;
            let w_at = |rr: f64, tt: f64| weight.eval(&domain.cartesian((rr, tt)));
            let idx = |i: usize, j: usize| i * nt + j;
            let mut mass = vec![0.0; nr * nt];
            let mut faces = Vec::with_capacity(2 * nr * nt);
            for i in 0..nr {
                let rc = rad(i as f64 + 0.5);
                for j in 0..nt {
                    let tc = ang(j as f64 + 0.5);
                    mass[idx(i, j)] = w_at(rc, tc) * rc * hr * ht;
                    if i + 1 < nr {
                        let rf = rad(i as f64 + 1.0);
                        faces.push((idx(i, j), idx(i + 1, j), w_at(rf, tc) * rf * ht / hr));
                    }
                    if j + 1 < nt || periodic {
                        let tf = ang(j as f64 + 1.0);
                        faces.push((idx(i, j), idx(i, (j + 1) % nt), w_at(rc, tf) * hr / (rc * ht)));
                    }
                }
            }
            if mass.iter().any(|&m| !(m > 0.0)) {
                return None;
            }
            Some(NeumannProblem { mass, faces })
        }
    }
}

/// `μ₂` of the weighted graph Laplacian `Σ_{x∼y} (m_x + m_y)(f_x − f_y)²` against
/// `Σ m_x f_x²` on a vertex subset.
pub fn graph_neumann_gap(net: &WeightedNet, vertices: &[usize]) -> Result<f64> {
    let n = vertices.len();
    if n < 2 {
        return invalid("a graph ball needs at least two vertices");
    }
    let mut local = vec![usize::MAX; net.len()];
    for (k, &v) in vertices.iter().enumerate() {
        local[v] = k;
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(i, j) in &net.edges {
        let (a, b) = (local[i], local[j]);
        if a == usize::MAX || b == usize::MAX {
            continue;
        }
        let c = net.weights[i] + net.weights[j];
        l[(a, a)] += c;
        l[(b, b)] += c;
        l[(a, b)] -= c;
        l[(b, a)] -= c;
    }
    let s: Vec<f64> = vertices.iter().map(|&v| 1.0 / net.weights[v].sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| l[(i, j)] * s[i] * s[j]);
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev[1])
}

/// Empirical Poincaré constants `P̂(x, r)` per (center, radius).
pub fn poincare_profile(
    domain: &MetricDomain,
    weight: &WeightFunction,
    centers: &[Vec<f64>],
    radii: &[f64],
    mode: PoincareMode,
) -> Result<AuditReport> {
    let mut rows = Vec::new();
    match mode {
        PoincareMode::ContinuousGrid => {
            for c in centers {
                let cc = domain.chart(c);
                for &r in radii {
                    let row = match ball_problem(domain, weight, cc, r) {
                        None => AuditRow { center: c.clone(), r, statistic: f64::NAN, flag: Some("unresolved_ball".into()) },
                        Some(p) => {
                            let (_, mu2) = p.bottom_pair()?;
                            AuditRow { center: c.clone(), r, statistic: 1.0 / (r * r * mu2), flag: None }
                        }
                    };
                    rows.push(row);
                }
            }
            AuditReport::new(
                "poincare_continuous",
                rows,
                config_of(domain, weight.tag.as_str(), &[("ball_grid", BALL_GRID.to_string())]),
            )
        }
        PoincareMode::DiscreteNet { epsilon, grid: (n1, n2) } => {
            let qg = QuadGrid::new(domain.clone(), weight, n1, n2)?;
            let net = build_net(&qg, epsilon)?;
            for c in centers {
                let cc = domain.chart(c);
                let v = nearest_vertex(&net, domain, cc);
                for &r in radii {
                    let m = ((r / (2.0 * epsilon)).round() as usize).max(1);
                    let ball = net.graph_ball(v, m);
                    let row = if ball.len() < 2 {
                        AuditRow { center: c.clone(), r, statistic: f64::NAN, flag: Some("single_vertex_ball".into()) }
                    } else {
                        let mu2 = graph_neumann_gap(&net, &ball)?;
                        AuditRow { center: c.clone(), r, statistic: 1.0 / ((m * m) as f64 * mu2), flag: None }
                    };
                    rows.push(row);
                }
            }
            AuditReport::new(
                "poincare_discrete",
                rows,
                config_of(domain, weight.tag.as_str(), &[("epsilon", epsilon.to_string()), ("net_size", net.len().to_string())]),
            )
        }
    }
}

/// Continuous-mode `P̂` of one ball, or `None` when the ball is degenerate.
pub fn poincare_ball(domain: &MetricDomain, weight: &WeightFunction, center: &[f64], r: f64) -> Result<Option<f64>> {
    match ball_problem(domain, weight, domain.chart(center), r) {
        None => Ok(None),
        Some(p) => Ok(Some(1.0 / (r * r * p.bottom_pair()?.1))),
    }
}

/// Smallest eigenvalue of a continuous-mode ball problem; zero up to rounding
/// since constants are in the kernel.
pub fn neumann_ground_value(domain: &MetricDomain, weight: &WeightFunction, center: &[f64], r: f64) -> Result<f64> {
    let p = ball_problem(domain, weight, domain.chart(center), r).ok_or_else(|| Error::Validation("degenerate ball".into()))?;
    Ok(p.bottom_pair()?.0)
}

pub fn nearest_vertex(net: &WeightedNet, domain: &MetricDomain, c: (f64, f64)) -> usize {
    (0..net.len())
        .min_by(|&i, &j| domain.chart_distance(net.points[i], c).total_cmp(&domain.chart_distance(net.points[j], c)))
        .unwrap_or(0)
}

/// One β of the sector counterexample; logs are natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorRow {
    pub beta: f64,
    pub nu: f64,
    /// First positive zero of `J_ν`.
    pub alpha: f64,
    pub log_v_full: f64,
    pub log_v_half: f64,
    /// `log[β⁴/(2πJ²_{ν+1}(α)) (eβ/2)^{2/β}]`.
    pub log_pred_full: f64,
    /// `log[β⁴/(8πJ²_{ν+1}(α)) (eβ/4)^{2/β}]`.
    pub log_pred_half: f64,
    /// `log[β⁵/8 (eβ/2)^{2/β}]`, the closing constant of the unnormalized integral.
    pub log_pred_alt: f64,
    pub ratio: f64,
    /// `4·2^{2/β}`.
    pub predicted_ratio: f64,
    /// Relative change of `log V(0, 1/α)` under node doubling.
    pub refinement_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorAudit {
    pub rows: Vec<SectorRow>,
    pub nodes: usize,
}

/// Nodes of the sector quadrature; refined once to `2×` as a check.
pub const SECTOR_NODES: usize = 4096;

/// `log ∫₀^{upper} J_ν²(z) z dz` by composite 16-point Gauss–Legendre, in log space.
fn log_bessel_moment(order: BesselOrder, upper: f64, nodes: usize) -> Result<f64> {
    let panels = nodes / 16;
    let h = upper / panels as f64;
    let mut logs = Vec::with_capacity(nodes);
    for p in 0..panels {
        let (zs, ws) = gauss_legendre_on(p as f64 * h, (p + 1) as f64 * h, 16);
        for (z, w) in zs.iter().zip(&ws) {
            let j = bessel_j_log(order, *z)?;
            if j.sign != 0.0 {
                logs.push(2.0 * j.log_abs + z.ln() + w.ln());
            }
        }
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Numerical("sector integrand vanished everywhere".into()));
    }
    Ok(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
}

/// Weighted volumes of the vertex balls `B(0, 1/α)` and `B(0, 1/2α)` of the
/// sector `{0 < r < 1, 0 < θ < πβ}`, with the asymptotic predictions.
pub fn sector_counterexample(betas: &[f64]) -> Result<SectorAudit> {
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        if !(beta > 0.0 && beta <= 0.5) {
            return invalid(format!("β must lie in (0, 1/2], got {beta}"));
        }
        let nu = 1.0 / beta;
        let order = BesselOrder::new(nu)?;
        let alpha = first_positive_zero(order)?;
        let log_jnext = bessel_j_log(BesselOrder::new(nu + 1.0)?, alpha)?.log_abs;
        // V(0, ρ) = 2∫₀^{αρ} J_ν²(z) z dz / (α² J²_{ν+1}(α)).
        let norm = 2f64.ln() - 2.0 * alpha.ln() - 2.0 * log_jnext;
        let full = log_bessel_moment(order, 1.0, SECTOR_NODES)?;
        let full_fine = log_bessel_moment(order, 1.0, 2 * SECTOR_NODES)?;
        let half = log_bessel_moment(order, 0.5, SECTOR_NODES)?;
        let refinement_change = ((full_fine - full) / full_fine).abs();
        if refinement_change > 1e-8 {
            return Err(Error::NoConvergence { what: "sector quadrature", iterations: 1, residual: refinement_change });
        }
        let log_v_full = norm + full_fine;
        let log_v_half = norm + half;
        let e = 1f64.exp();
        let log_pred_full = 4.0 * beta.ln() - (2.0 * PI).ln() - 2.0 * log_jnext + 2.0 / beta * (e * beta / 2.0).ln();
        let log_pred_half = 4.0 * beta.ln() - (8.0 * PI).ln() - 2.0 * log_jnext + 2.0 / beta * (e * beta / 4.0).ln();
        let log_pred_alt = 5.0 * beta.ln() - 8f64.ln() + 2.0 / beta * (e * beta / 2.0).ln();
        rows.push(SectorRow {
            beta,
            nu,
            alpha,
            log_v_full,
            log_v_half,
            log_pred_full,
            log_pred_half,
            log_pred_alt,
            ratio: (log_v_full - log_v_half).exp(),
            predicted_ratio: 4.0 * 2f64.powf(2.0 / beta),
            refinement_change,
        });
    }
    Ok(SectorAudit { rows, nodes: SECTOR_NODES })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightTag;
    use crate::numerics::adaptive_gauss_legendre;
    use crate::radial::AnnularDomainSpec;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn thin(eps: f64) -> (MetricDomain, WeightFunction) {
        let spec = AnnularDomainSpec::new(2, 1.0, 1.0 + eps, BaseDomain::FullSphere { n: 2 }).unwrap();
        let w = WeightFunction::dirichlet(&spec).unwrap();
        (MetricDomain::annular(spec).unwrap(), w)
    }

    #[test]
    fn interval_doubling_matches_brute_force() {
        let w = WeightFunction::interval_dirichlet(1.0);
        let g = QuadGrid::new(MetricDomain::Interval { lo: 0.0, hi: 1.0 }, &w, 4000, 1).unwrap();
        let centers = vec![vec![0.0], vec![0.25], vec![0.5]];
        let radii = [0.5, 0.25, 0.125, 0.0625];
        let rep = doubling_profile(&g, &centers, &radii).unwrap();
        let v = |c: f64, r: f64| {
            adaptive_gauss_legendre(|x| 2.0 * (PI * x).sin().powi(2), (c - r).max(0.0), (c + r).min(1.0), 1e-14).0
        };
        let mut brute = 0.0f64;
        for c in [0.0, 0.25, 0.5] {
            for r in radii {
                brute = brute.max(v(c, 2.0 * r) / v(c, r));
            }
        }
        assert_relative_eq!(rep.summary.max, brute, max_relative = 2e-2);
        assert!(rep.summary.max <= 16.0);
        assert!(rep.rows.iter().all(|r| r.statistic >= 1.0));
    }

    #[test]
    fn uniform_interior_ratio_tends_to_four() {
        let spec = AnnularDomainSpec::new(2, 1.0, 2.0, BaseDomain::FullSphere { n: 2 }).unwrap();
        let g = QuadGrid::new(MetricDomain::annular(spec).unwrap(), &WeightFunction::uniform(3.0 * PI), 400, 2048).unwrap();
        let rep = doubling_profile(&g, &[vec![1.5, 0.0]], &[0.01]).unwrap();
        assert_relative_eq!(rep.rows[0].statistic, 4.0, max_relative = 2e-2);
    }

    #[test]
    fn thin_annulus_doubling_is_stable() {
        let mut prev = None;
        for eps in [0.2, 0.1] {
            let (d, w) = thin(eps);
            let n2 = (64.0 * 2.0 * PI / eps).ceil() as usize;
            let g = QuadGrid::new(d.clone(), &w, 64, n2).unwrap();
            let rep = doubling_profile(&g, &standard_centers(&d), &ladder_radii(eps, d.diameter())).unwrap();
            assert!(rep.summary.max < 64.0);
            if let Some(p) = prev {
                let change: f64 = (rep.summary.max - p) / p;
                assert!(change.abs() < 0.25, "{change}");
            }
            prev = Some(rep.summary.max);
        }
    }

    #[test]
    fn empty_balls_are_flagged() {
        let w = WeightFunction::interval_dirichlet(1.0);
        let g = QuadGrid::new(MetricDomain::Interval { lo: 0.0, hi: 1.0 }, &w, 100, 1).unwrap();
        let rep = doubling_profile(&g, &[vec![2.0], vec![0.5]], &[0.1]).unwrap();
        assert_eq!(rep.summary.rows_flagged, 1);
        assert!(doubling_profile(&g, &[vec![0.5]], &[2.0]).is_err());
    }

    #[test]
    fn interval_neumann_gap() {
        let d = MetricDomain::Interval { lo: 0.0, hi: 1.0 };
        let uniform = WeightFunction::uniform(1.0);
        let p = poincare_ball(&d, &uniform, &[0.5], 0.5).unwrap().unwrap();
        // Ball of radius 1/2 is the whole interval: P̂ = 1/(r²π²) with r = 1/2.
        assert_relative_eq!(p * 0.25, 1.0 / (PI * PI), max_relative = 1e-4);
        assert!(neumann_ground_value(&d, &uniform, &[0.5], 0.5).unwrap().abs() < 1e-8);
    }

    /// Rayleigh–Ritz with the cosine basis as an independent oracle for the
    /// weighted Neumann gap on (0,1).
    fn cosine_oracle(weight: impl Fn(f64) -> f64, modes: usize) -> f64 {
        let (xs, ws) = gauss_legendre_on(0.0, 1.0, 400);
        let k = DMatrix::<f64>::from_fn(modes, modes, |i, j| {
            xs.iter().zip(&ws).map(|(x, w)| {
                let (fi, fj) = (i as f64 * PI, j as f64 * PI);
                w * weight(*x) * fi * (fi * x).sin() * fj * (fj * x).sin()
            }).sum::<f64>()
        });
        let m = DMatrix::<f64>::from_fn(modes, modes, |i, j| {
            xs.iter().zip(&ws).map(|(x, w)| w * weight(*x) * (i as f64 * PI * x).cos() * (j as f64 * PI * x).cos()).sum::<f64>()
        });
        let l = m.cholesky().unwrap();
        let linv = l.l().try_inverse().unwrap();
        let a: DMatrix<f64> = &linv * k * linv.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev[1]
    }

    #[test]
    fn weighted_interval_gap_matches_oracle() {
        let d = MetricDomain::Interval { lo: 0.0, hi: 1.0 };
        let w = WeightFunction::interval_dirichlet(1.0);
        let mu_oracle = cosine_oracle(|x| 2.0 * (PI * x).sin().powi(2), 40);
        let p = poincare_ball(&d, &w, &[0.5], 0.5).unwrap().unwrap();
        assert_relative_eq!(1.0 / (0.25 * p), mu_oracle, max_relative = 2e-2);
    }

    #[test]
    fn continuous_kernel_holds_constants() {
        let (d, w) = thin(0.1);
        for r in [0.05, 0.5, 4.0] {
            let g = neumann_ground_value(&d, &w, &[1.05, 0.0], r).unwrap();
            let p = poincare_ball(&d, &w, &[1.05, 0.0], r).unwrap().unwrap();
            assert!(g.abs() * p * r * r < 1e-8, "r = {r}: μ₁ = {g}");
        }
    }

    #[test]
    fn thin_annulus_poincare_window() {
        let (d, w) = thin(0.1);
        let rep = poincare_profile(&d, &w, &standard_centers(&d), &[0.05, 0.1, 0.5, 1.0, 3.0], PoincareMode::ContinuousGrid).unwrap();
        assert!(rep.summary.spread <= 10.0, "{:?}", rep.summary);
        assert_eq!(rep.config["weight"], WeightTag::DirichletPhiSquared.as_str());
    }

    #[test]
    fn discrete_and_continuous_agree_on_matched_balls() {
        let eps = 0.1;
        let (d, w) = thin(eps);
        let mode = PoincareMode::DiscreteNet { epsilon: eps, grid: (12, 760) };
        let c = vec![vec![1.05, 0.0]];
        for m in [1usize, 2, 4, 8] {
            let r = 2.0 * eps * m as f64;
            let disc = poincare_profile(&d, &w, &c, &[r], mode).unwrap().rows[0].statistic;
            let cont = poincare_ball(&d, &w, &c[0], r).unwrap().unwrap();
            let q = disc / cont;
            assert!((0.25..=4.0).contains(&q), "m = {m}: discrete {disc}, continuous {cont}");
        }
    }

    #[test]
    fn sector_doubling_blows_up() {
        let audit = sector_counterexample(&[1.0 / 3.0, 0.25, 0.2]).unwrap();
        let mut last = 0.0;
        for row in &audit.rows {
            assert!(row.ratio >= 0.5 * row.predicted_ratio, "{row:?}");
            assert!(row.ratio > last);
            last = row.ratio;
        }
        assert!(sector_counterexample(&[0.7]).is_err());
    }

    #[test]
    fn sector_volume_tracks_asymptotic() {
        let row = sector_counterexample(&[0.125]).unwrap().rows[0];
        assert!(((row.log_v_full - row.log_pred_full) / row.log_pred_full).abs() <= 0.25, "{row:?}");
        assert!(row.log_v_half < row.log_v_full && row.log_v_full < 0.0);
    }

    #[test]
    fn csv_has_a_row_per_entry() {
        let w = WeightFunction { sampler: Arc::new(|_| 1.0), tag: WeightTag::Uniform };
        let g = QuadGrid::new(MetricDomain::Interval { lo: 0.0, hi: 1.0 }, &w, 100, 1).unwrap();
        let rep = doubling_profile(&g, &[vec![0.5]], &[0.1, 0.2]).unwrap();
        assert_eq!(rep.to_csv().lines().count(), 3);
    }
}
