//! Surrogate distances, weighted balls, ε-nets and their graphs.
//!
//! The surrogate `σ(x, y) = max(a·d_{U₀}(x̂, ŷ), | |x| − |y| |)` stands in for
//! the intrinsic distance of an annular domain `(a, b) × U₀` (the two are
//! comparable with constant 4 when `b/a ≤ 2`), so balls are coordinate
//! rectangles in `(r, θ)`. The factor `a` makes σ dilation covariant; nets on
//! `(1, 1+ε)` see the plain `max(d_{U₀}, |Δr|)`. Quadrature is the midpoint rule
//! on a polar product grid; planar annular domains and intervals are supported.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::bases::{base_eigendata, circle_angle, BaseDomain, Sampler};
use crate::error::{invalid, Error, Result};
use crate::radial::{solve_radial, AnnularDomainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTag {
    DirichletPhiSquared,
    Uniform,
}

impl WeightTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightTag::DirichletPhiSquared => "dirichlet_phi_squared",
            WeightTag::Uniform => "uniform",
        }
    }
}

/// A nonnegative density on the domain, evaluated at Cartesian points.
#[derive(Clone)]
pub struct WeightFunction {
    pub sampler: Sampler,
    pub tag: WeightTag,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFunction").field("tag", &self.tag).finish_non_exhaustive()
    }
}

/// Radial grid behind [`WeightFunction::dirichlet`].
pub const WEIGHT_RADIAL_GRID: usize = 512;

impl WeightFunction {
    /// The constant `1/|U|`: the square of the first Neumann eigenfunction.
    pub fn uniform(volume: f64) -> Self {
        let c = 1.0 / volume;
        Self { sampler: Arc::new(move |_| c), tag: WeightTag::Uniform }
    }

    /// `φ_U²` for an annular domain, from the radial solver and the base eigenfunction.
    pub fn dirichlet(spec: &AnnularDomainSpec) -> Result<Self> {
        spec.validate()?;
        let base = base_eigendata(&spec.base)?;
        let radial = Arc::new(solve_radial(spec.n, spec.a, spec.b, base.lambda0, WEIGHT_RADIAL_GRID, 1)?.remove(0));
        let g = base.phi0;
        Ok(Self {
            sampler: Arc::new(move |x: &[f64]| {
                let (r, w) = AnnularDomainSpec::polar(x);
                (radial.eval_f(r) * g(&w)).powi(2)
            }),
            tag: WeightTag::DirichletPhiSquared,
        })
    }

    /// `2 sin²(πx/L)/L` on `(0, L)`.
    pub fn interval_dirichlet(len: f64) -> Self {
        Self {
            sampler: Arc::new(move |x: &[f64]| 2.0 / len * (PI * x[0] / len).sin().powi(2)),
            tag: WeightTag::DirichletPhiSquared,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.sampler)(x)
    }
}

fn base_closure_contains(base: &BaseDomain, w: &[f64]) -> bool {
    match *base {
        BaseDomain::FullSphere { .. } => true,
        BaseDomain::CircleArc { theta1 } => {
            let t = circle_angle(w);
            t <= theta1 + 1e-12 || t >= 2.0 * PI - 1e-12
        }
        _ => base.contains(w),
    }
}

/// `σ(x, y) = max(a·d_{U₀}(x̂, ŷ), | |x| − |y| |)` for points of the closed domain.
pub fn surrogate_distance(x: &[f64], y: &[f64], spec: &AnnularDomainSpec) -> Result<f64> {
    for p in [x, y] {
        if p.len() != spec.n {
            return invalid(format!("expected a point of ℝ^{}, got {} coordinates", spec.n, p.len()));
        }
        let (r, w) = AnnularDomainSpec::polar(p);
        let tol = 1e-12 * spec.b;
        if r < spec.a - tol || r > spec.b + tol || !base_closure_contains(&spec.base, &w) {
            return invalid(format!("point {p:?} lies outside the closed domain"));
        }
    }
    let (rx, wx) = AnnularDomainSpec::polar(x);
    let (ry, wy) = AnnularDomainSpec::polar(y);
    Ok((spec.a * spec.base.intrinsic_distance(&wx, &wy)).max((rx - ry).abs()))
}

/// Domains with a midpoint product grid.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricDomain {
    /// `(lo, hi) ⊂ ℝ`; the metric is `|x − y|`.
    Interval { lo: f64, hi: f64 },
    /// A planar annular domain over a full circle or an arc.
    Annular(AnnularDomainSpec),
}

impl MetricDomain {
    pub fn annular(spec: AnnularDomainSpec) -> Result<Self> {
        spec.validate()?;
        match spec.base {
            BaseDomain::FullSphere { n: 2 } | BaseDomain::CircleArc { .. } => Ok(Self::Annular(spec)),
            _ => Err(Error::Unsupported(format!(
                "metric grids cover planar annular domains only, got base {:?}",
                spec.base
            ))),
        }
    }

    pub fn metric_tag(&self) -> &'static str {
        match self {
            MetricDomain::Interval { .. } => "euclidean_interval",
            MetricDomain::Annular(_) => "surrogate_max_base_radial",
        }
    }

    /// Surrogate diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            MetricDomain::Interval { lo, hi } => hi - lo,
            MetricDomain::Annular(s) => {
                let base = match s.base {
                    BaseDomain::CircleArc { theta1 } => theta1.min(PI),
                    _ => PI,
                };
                (s.a * base).max(s.b - s.a)
            }
        }
    }

    /// Length of one radian of base distance: `a` for annular domains.
    pub fn angular_scale(&self) -> f64 {
        match self {
            MetricDomain::Interval { .. } => 1.0,
            MetricDomain::Annular(s) => s.a,
        }
    }

    /// Chart coordinates `(r, θ)` or `(x, 0)` of a Cartesian point.
    pub fn chart(&self, x: &[f64]) -> (f64, f64) {
        match self {
            MetricDomain::Interval { .. } => (x[0], 0.0),
            MetricDomain::Annular(_) => (x[0].hypot(x[1]), circle_angle(x)),
        }
    }

    pub fn cartesian(&self, c: (f64, f64)) -> Vec<f64> {
        match self {
            MetricDomain::Interval { .. } => vec![c.0],
            MetricDomain::Annular(_) => vec![c.0 * c.1.cos(), c.0 * c.1.sin()],
        }
    }

    fn periodic(&self) -> bool {
        matches!(self, MetricDomain::Annular(AnnularDomainSpec { base: BaseDomain::FullSphere { .. }, .. }))
    }

    /// Distance between chart coordinates.
    pub fn chart_distance(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        let dr = (p.0 - q.0).abs();
        match self {
            MetricDomain::Interval { .. } => dr,
            MetricDomain::Annular(_) => {
                let mut dt = (p.1 - q.1).abs();
                if self.periodic() {
                    dt = dt.min(2.0 * PI - dt);
                }
                (self.angular_scale() * dt).max(dr)
            }
        }
    }
}

/// Weighted midpoint quadrature on a product grid, `θ` fastest.
#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub domain: MetricDomain,
    pub n1: usize,
    pub n2: usize,
    lo1: f64,
    h1: f64,
    lo2: f64,
    h2: f64,
    /// Weight × cell measure per node.
    pub masses: Vec<f64>,
    pub tag: WeightTag,
}

impl QuadGrid {
    /// `n1` cells in `r` (or `x`) and `n2` in `θ` (ignored for intervals).
    pub fn new(domain: MetricDomain, weight: &WeightFunction, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 {
            return invalid("quadrature grid needs at least 2 cells per direction");
        }
        let (lo1, hi1, lo2, hi2, n2) = match &domain {
            MetricDomain::Interval { lo, hi } => {
                if !(hi > lo) {
                    return invalid(format!("empty interval ({lo}, {hi})"));
                }
                (*lo, *hi, 0.0, 1.0, 1)
            }
            MetricDomain::Annular(s) => {
                if n2 < 2 {
                    return invalid("quadrature grid needs at least 2 cells per direction");
                }
                let span = match s.base {
                    BaseDomain::CircleArc { theta1 } => theta1,
                    _ => 2.0 * PI,
                };
                (s.a, s.b, 0.0, span, n2)
            }
        };
        let h1 = (hi1 - lo1) / n1 as f64;
        let h2 = (hi2 - lo2) / n2 as f64;
        let mut grid = Self { domain, n1, n2, lo1, h1, lo2, h2, masses: Vec::new(), tag: weight.tag };
        grid.masses = (0..n1 * n2)
            .map(|k| {
                let c = grid.node(k);
                let cell = match grid.domain {
                    MetricDomain::Interval { .. } => h1,
                    MetricDomain::Annular(_) => c.0 * h1 * h2,
                };
                weight.eval(&grid.domain.cartesian(c)) * cell
            })
            .collect();
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> (f64, f64) {
        (self.h1, self.h2)
    }

    /// Chart coordinates of node `k`.
    pub fn node(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.n2, k % self.n2);
        (self.lo1 + (i as f64 + 0.5) * self.h1, self.lo2 + (j as f64 + 0.5) * self.h2)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Index ranges and per-cell coverage fractions of the ball around `c`.
    fn ball_cells(&self, c: (f64, f64), r: f64) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        fn axis(lo: f64, h: f64, n: usize, c: f64, r: f64, periodic: bool) -> Vec<(usize, f64)> {
            if periodic && r >= PI {
                return (0..n).map(|j| (j, 1.0)).collect();
            }
            let k0 = ((c - r - lo) / h).floor() as i64;
            let k1 = ((c + r - lo) / h).ceil() as i64;
            let (k0, k1) = if periodic { (k0, k1) } else { (k0.max(0), k1.min(n as i64)) };
            (k0..k1)
                .filter_map(|k| {
                    let a = lo + k as f64 * h;
                    let frac = ((c + r).min(a + h) - (c - r).max(a)).max(0.0) / h;
                    (frac > 0.0).then(|| (k.rem_euclid(n as i64) as usize, frac))
                })
                .collect()
        }
        let periodic = self.domain.periodic();
        let rows = axis(self.lo1, self.h1, self.n1, c.0, r, false);
        let cols = match self.domain {
            MetricDomain::Interval { .. } => vec![(0, 1.0)],
            MetricDomain::Annular(_) => axis(self.lo2, self.h2, self.n2, c.1, r / self.domain.angular_scale(), periodic),
        };
        (rows, cols)
    }

    /// Weighted measure of `{y : σ(c, y) < r}` in chart coordinates, with
    /// fractional coverage of boundary cells.
    pub fn ball_measure_chart(&self, c: (f64, f64), r: f64) -> f64 {
        let (rows, cols) = self.ball_cells(c, r);
        let mut total = 0.0;
        for &(i, fi) in &rows {
            let row = &self.masses[i * self.n2..(i + 1) * self.n2];
            total += fi * cols.iter().map(|&(j, fj)| fj * row[j]).sum::<f64>();
        }
        total
    }

    /// Nodes of the ball around `c` with their coverage-weighted masses.
    pub fn ball_nodes(&self, c: (f64, f64), r: f64) -> Vec<(usize, f64)> {
        let (rows, cols) = self.ball_cells(c, r);
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &(i, fi) in &rows {
            for &(j, fj) in &cols {
                let k = i * self.n2 + j;
                out.push((k, fi * fj * self.masses[k]));
            }
        }
        out
    }
}

/// Weighted measure of the surrogate ball `B(center, r)`.
pub fn ball_measure(grid: &QuadGrid, center: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return invalid(format!("ball radius must be positive, got {r}"));
    }
    Ok(grid.ball_measure_chart(grid.domain.chart(center), r))
}

/// A maximal ε-separated node set with its graph.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedNet {
    /// Chart coordinates `(r, θ)` or `(x, 0)`.
    pub points: Vec<(f64, f64)>,
    pub epsilon: f64,
    /// Pairs `i < j` with `σ ≤ 2ε`.
    pub edges: Vec<(usize, usize)>,
    /// `m(x_i)`: weighted measure of `B(x_i, ε)`.
    pub weights: Vec<f64>,
    pub metric: &'static str,
    pub weight_tag: WeightTag,
    /// Largest distance from a grid node to the net.
    pub covering_radius: f64,
}

impl WeightedNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.points.len()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Graph distances from vertex `v`.
    pub fn hops_from(&self, v: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.len()];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.hops_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Vertices within `m` hops of `v`.
    pub fn graph_ball(&self, v: usize, m: usize) -> Vec<usize> {
        self.hops_from(v).iter().enumerate().filter(|(_, &d)| d <= m).map(|(i, _)| i).collect()
    }

    /// Edge-list text: a header, one `v index c1 c2 weight` line per vertex and
    /// one `e i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# epsilon {:e} metric {} weight {}", self.epsilon, self.metric, self.weight_tag.as_str());
        for (i, (p, w)) in self.points.iter().zip(&self.weights).enumerate() {
            let _ = writeln!(s, "v {i} {:.16e} {:.16e} {:.16e}", p.0, p.1, w);
        }
        for (i, j) in &self.edges {
            let _ = writeln!(s, "e {i} {j}");
        }
        s
    }
}

/// Greedy maximal ε-separated subset of the grid nodes in lexicographic order.
pub fn build_net(grid: &QuadGrid, epsilon: f64) -> Result<WeightedNet> {
    if !(epsilon > 0.0) {
        return invalid(format!("net scale must be positive, got {epsilon}"));
    }
    let (h1, h2) = grid.steps();
    let extent1 = h1 * grid.n1 as f64;
    if h1 > epsilon.min(extent1) / 6.0 * (1.0 + 1e-12) {
        return invalid(format!("quadrature grid too coarse: radial step {h1} exceeds ε/6 for ε = {epsilon}"));
    }
    if let MetricDomain::Annular(_) = grid.domain {
        let (h2, extent2) = (h2 * grid.domain.angular_scale(), h2 * grid.n2 as f64 * grid.domain.angular_scale());
        if h2 > epsilon.min(extent2) / 6.0 * (1.0 + 1e-12) {
            return invalid(format!("quadrature grid too coarse: angular step {h2} exceeds ε/6 for ε = {epsilon}"));
        }
    }
    let d = &grid.domain;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for k in 0..grid.len() {
        let c = grid.node(k);
        if points.iter().all(|&p| d.chart_distance(p, c) >= epsilon) {
            points.push(c);
        }
    }
    let covering_radius = (0..grid.len())
        .map(|k| {
            let c = grid.node(k);
            points.iter().map(|&p| d.chart_distance(p, c)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if d.chart_distance(points[i], points[j]) <= 2.0 * epsilon {
                edges.push((i, j));
            }
        }
    }
    let weights = points.iter().map(|&p| grid.ball_measure_chart(p, epsilon)).collect();
    Ok(WeightedNet { points, epsilon, edges, weights, metric: d.metric_tag(), weight_tag: grid.tag, covering_radius })
}

/// The relaxed separation and covering properties of the projected base net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YNetCheck {
    /// Smallest base distance between distinct projections.
    pub min_separation: f64,
    /// Largest base distance from a base grid node to the projections.
    pub covering: f64,
    /// Separation at least ε/4.
    pub y1: bool,
    /// Covering radius at most ε.
    pub y2: bool,
}

/// Projects the net to the base and checks separation `ε/4` and covering `ε`.
pub fn verify_ynet(net: &WeightedNet, grid: &QuadGrid) -> Result<YNetCheck> {
    let MetricDomain::Annular(_) = grid.domain else {
        return invalid("base nets exist for annular domains only");
    };
    let scale = grid.domain.angular_scale();
    let base_dist = |s: f64, t: f64| grid.domain.chart_distance((0.0, s), (0.0, t)) / scale;
    let ys: Vec<f64> = net.points.iter().map(|p| p.1).collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..ys.len() {
        for j in 0..i {
            min_sep = min_sep.min(base_dist(ys[i], ys[j]));
        }
    }
    let covering = (0..grid.n2)
        .map(|j| {
            let t = grid.node(j).1;
            ys.iter().map(|&y| base_dist(y, t)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(YNetCheck {
        min_separation: min_sep,
        covering,
        y1: min_sep >= net.epsilon / 4.0,
        y2: covering <= net.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::circle_point;
    use crate::numerics::gauss_legendre_on;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn annulus(a: f64, b: f64) -> AnnularDomainSpec {
        AnnularDomainSpec::new(2, a, b, BaseDomain::FullSphere { n: 2 }).unwrap()
    }

    fn pt(r: f64, t: f64) -> Vec<f64> {
        circle_point(t).iter().map(|v| r * v).collect()
    }

    fn phi_grid(a: f64, b: f64, n1: usize, n2: usize) -> QuadGrid {
        let spec = annulus(a, b);
        let w = WeightFunction::dirichlet(&spec).unwrap();
        QuadGrid::new(MetricDomain::annular(spec).unwrap(), &w, n1, n2).unwrap()
    }

    #[test]
    fn surrogate_examples() {
        let s = annulus(1.0, 1.1);
        assert_relative_eq!(surrogate_distance(&pt(1.05, 0.0), &pt(1.02, PI / 2.0), &s).unwrap(), PI / 2.0, max_relative = 1e-12);
        assert_relative_eq!(surrogate_distance(&pt(1.05, 1.0), &pt(1.02, 1.0), &s).unwrap(), 0.03, max_relative = 1e-9);
        assert!(surrogate_distance(&pt(1.5, 0.0), &pt(1.02, 1.0), &s).is_err());
        let arc = AnnularDomainSpec::new(2, 1.0, 2.0, BaseDomain::CircleArc { theta1: 1.0 }).unwrap();
        assert!(surrogate_distance(&pt(1.5, 2.0), &pt(1.5, 0.5), &arc).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn surrogate_triangle_inequality(r in proptest::array::uniform3(1.0f64..1.1), t in proptest::array::uniform3(0.0f64..2.0 * PI)) {
            let s = annulus(1.0, 1.1);
            let (x, y, z) = (pt(r[0], t[0]), pt(r[1], t[1]), pt(r[2], t[2]));
            let xy = surrogate_distance(&x, &y, &s).unwrap();
            let yz = surrogate_distance(&y, &z, &s).unwrap();
            let xz = surrogate_distance(&x, &z, &s).unwrap();
            prop_assert!(xz <= xy + yz + 1e-12);
        }
    }

    #[test]
    fn huge_scale_gives_single_vertex() {
        // The surrogate diameter of (1,2)×S¹ is π.
        let g = phi_grid(1.0, 2.0, 24, 96);
        let net = build_net(&g, 3.2).unwrap();
        assert_eq!(net.len(), 1);
        assert_relative_eq!(net.weights[0], 1.0, max_relative = 1e-3);
    }

    #[test]
    fn thin_annulus_net_size_and_connectivity() {
        let g = phi_grid(1.0, 1.1, 12, 760);
        let net = build_net(&g, 0.05).unwrap();
        let expected = 2.0 * PI / 0.05;
        let ratio = net.len() as f64 / expected;
        assert!((0.25..=4.0).contains(&ratio), "size {}", net.len());
        assert!(net.is_connected());
        assert!(net.covering_radius < 0.05);
        assert!(net.weights.iter().all(|&w| w > 0.0));
        for i in 0..net.len() {
            for j in 0..i {
                assert!(g.domain.chart_distance(net.points[i], net.points[j]) >= 0.05);
            }
        }
    }

    #[test]
    fn projected_net_satisfies_relaxed_separation() {
        for eps in [0.2, 0.1, 0.05] {
            let n2 = (6.0 * 2.0 * PI / eps).ceil() as usize;
            let g = phi_grid(1.0, 1.0 + eps, 12, n2);
            let y = verify_ynet(&build_net(&g, eps).unwrap(), &g).unwrap();
            assert!(y.y1 && y.y2, "ε = {eps}: {y:?}");
        }
    }

    #[test]
    fn neighbour_count_bounded() {
        for eps in [0.4f64, 0.2, 0.1, 0.05] {
            let n1 = ((6.0 * 0.1 / eps.min(0.1)).ceil() as usize).max(2);
            let n2 = (6.0 * 2.0 * PI / eps).ceil() as usize;
            let net = build_net(&phi_grid(1.0, 1.1, n1, n2), eps).unwrap();
            assert!(net.max_degree() <= 20, "ε = {eps}: {}", net.max_degree());
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(build_net(&phi_grid(1.0, 1.1, 12, 100), 0.05).is_err());
    }

    #[test]
    fn ball_measure_properties() {
        let g = phi_grid(1.0, 2.0, 64, 256);
        let c = pt(1.5, 1.0);
        assert_relative_eq!(ball_measure(&g, &c, 10.0).unwrap(), g.total_mass(), max_relative = 1e-12);
        assert_relative_eq!(g.total_mass(), 1.0, max_relative = 1e-3);
        let mut last = 0.0;
        for k in 1..40 {
            let v = ball_measure(&g, &c, 0.05 * k as f64).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn uniform_small_balls_scale_like_area() {
        let spec = annulus(1.0, 2.0);
        let w = WeightFunction::uniform(PI * 3.0);
        let g = QuadGrid::new(MetricDomain::annular(spec).unwrap(), &w, 400, 2048).unwrap();
        let c = pt(1.5, 0.3);
        let r = 0.02;
        let q = ball_measure(&g, &c, 2.0 * r).unwrap() / ball_measure(&g, &c, r).unwrap();
        assert_relative_eq!(q, 4.0, max_relative = 1e-2);
    }

    #[test]
    fn thin_ball_factorizes() {
        let g = phi_grid(1.0, 1.1, 48, 1024);
        let rad = solve_radial(2, 1.0, 1.1, 0.0, WEIGHT_RADIAL_GRID, 1).unwrap().remove(0);
        let (rc, tc, rho) = (1.03, 2.0, 0.05);
        let (rs, rw) = gauss_legendre_on(1.0, rc + rho, 80);
        let radial: f64 = rs.iter().zip(&rw).map(|(r, w)| w * r * rad.eval_f(*r).powi(2)).sum();
        let base = 2.0 * rho / (2.0 * PI);
        let v = ball_measure(&g, &pt(rc, tc), rho).unwrap();
        assert_relative_eq!(v, radial * base, max_relative = 0.1);
    }

    #[test]
    fn dilation_invariance() {
        let g1 = phi_grid(1.0, 1.5, 32, 128);
        let g2 = phi_grid(3.0, 4.5, 32, 128);
        for rho in [0.05, 0.2, 1.0] {
            let v1 = ball_measure(&g1, &pt(1.2, 0.7), rho).unwrap();
            let v2 = ball_measure(&g2, &pt(3.6, 0.7), 3.0 * rho).unwrap();
            assert_relative_eq!(v1, v2, max_relative = 1e-10);
        }
    }

    #[test]
    fn interval_grid() {
        let w = WeightFunction::interval_dirichlet(1.0);
        let g = QuadGrid::new(MetricDomain::Interval { lo: 0.0, hi: 1.0 }, &w, 1000, 1).unwrap();
        assert_relative_eq!(g.total_mass(), 1.0, max_relative = 1e-6);
        let v = ball_measure(&g, &[0.5], 0.25).unwrap();
        // ∫_{1/4}^{3/4} 2 sin²(πx) dx = 1/2 + 1/π.
        assert_relative_eq!(v, 0.5 + 1.0 / PI, max_relative = 1e-6);
    }

    #[test]
    fn edge_list_export() {
        let net = build_net(&phi_grid(1.0, 1.1, 12, 400), 0.1).unwrap();
        let text = net.to_edge_list();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), net.len());
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), net.edges.len());
    }
}
