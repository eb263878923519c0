//! Grid Dirichlet eigensolvers for planar domains.
//!
//! Both solvers mask the nodes of a regular lattice (polar or Cartesian) and
//! assemble a symmetric 5-point operator on the active nodes; inactive nodes
//! carry the Dirichlet condition. The boundary is therefore a staircase.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{csr_smallest_eigenpairs, CsrMatrix};
use crate::spectrum::{EigenMode, Spectrum, TailModel};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Indicator = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

/// Angular extent of a polar domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularWindow {
    FullCircle,
    Window { lo: f64, hi: f64 },
}

/// `{(r, θ) : r_min(θ) < r < r_max(θ), θ in the window}`.
#[derive(Clone)]
pub struct PolarDomain2D {
    pub r_min: RadialFn,
    pub r_max: RadialFn,
    pub window: AngularWindow,
}

impl fmt::Debug for PolarDomain2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarDomain2D").field("window", &self.window).finish_non_exhaustive()
    }
}

impl PolarDomain2D {
    pub fn new(r_min: RadialFn, r_max: RadialFn, window: AngularWindow) -> Self {
        Self { r_min, r_max, window }
    }

    pub fn annulus(a: f64, b: f64) -> Self {
        Self::new(Arc::new(move |_| a), Arc::new(move |_| b), AngularWindow::FullCircle)
    }

    pub fn sector(a: f64, b: f64, lo: f64, hi: f64) -> Self {
        Self::new(Arc::new(move |_| a), Arc::new(move |_| b), AngularWindow::Window { lo, hi })
    }

    /// The domain scaled by `c` about the origin.
    pub fn dilate(&self, c: f64) -> Self {
        let (lo, hi) = (self.r_min.clone(), self.r_max.clone());
        Self::new(Arc::new(move |t| c * lo(t)), Arc::new(move |t| c * hi(t)), self.window)
    }

    pub fn theta_range(&self) -> (f64, f64) {
        match self.window {
            AngularWindow::FullCircle => (0.0, 2.0 * PI),
            AngularWindow::Window { lo, hi } => (lo, hi),
        }
    }

    fn probe(&self, samples: usize) -> Vec<(f64, f64, f64)> {
        let (lo, hi) = self.theta_range();
        (0..=samples)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / samples as f64;
                (t, (self.r_min)(t), (self.r_max)(t))
            })
            .collect()
    }

    /// Smallest lattice covering the domain with `nr × nθ` cells.
    pub fn bounding_grid(&self, nr: usize, ntheta: usize) -> Result<PolarGrid> {
        let probe = self.probe(4096);
        let mut r_lo = f64::INFINITY;
        let mut r_hi = 0.0f64;
        for &(t, lo, hi) in &probe {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return invalid(format!("radial bounds invalid at θ = {t}: r_min = {lo}, r_max = {hi}"));
            }
            r_lo = r_lo.min(lo);
            r_hi = r_hi.max(hi);
        }
        let (theta_lo, theta_hi) = self.theta_range();
        PolarGrid::new(r_lo, r_hi, nr, theta_lo, theta_hi, ntheta, self.window == AngularWindow::FullCircle)
    }

    pub fn contains_polar(&self, r: f64, theta: f64) -> bool {
        let t = match self.window {
            AngularWindow::FullCircle => theta.rem_euclid(2.0 * PI),
            AngularWindow::Window { lo, hi } => {
                let t = lo + (theta - lo).rem_euclid(2.0 * PI);
                if !(t > lo && t < hi) {
                    return false;
                }
                t
            }
        };
        r > (self.r_min)(t) && r < (self.r_max)(t)
    }

    /// Node mask on `grid`, plus a check that the grid resolves the domain.
    pub fn mask(&self, grid: &PolarGrid) -> Result<Vec<bool>> {
        let thin = self
            .probe(4096)
            .iter()
            .map(|&(_, lo, hi)| hi - lo)
            .fold(f64::INFINITY, f64::min);
        if thin < 8.0 * grid.hr() * (1.0 - 1e-12) {
            return invalid(format!(
                "radial grid too coarse: minimum thickness {thin} spans fewer than 8 cells of width {}",
                grid.hr()
            ));
        }
        if let AngularWindow::Window { lo, hi } = self.window {
            if hi - lo < 8.0 * grid.htheta() * (1.0 - 1e-12) {
                return invalid("angular grid too coarse: window spans fewer than 8 cells");
            }
        }
        Ok(grid
            .nodes()
            .map(|(_, _, r, t)| self.contains_polar(r, t))
            .collect())
    }
}

/// Node lattice in `(r, θ)`; `θ` is the fastest index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub r_lo: f64,
    pub r_hi: f64,
    /// Cells in `r`; nodes `r_lo + i·h_r`, `i = 0..=nr`.
    pub nr: usize,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Cells in `θ`; a periodic grid has `nθ` nodes, otherwise `nθ + 1`.
    pub ntheta: usize,
    pub periodic: bool,
}

impl PolarGrid {
    pub fn new(r_lo: f64, r_hi: f64, nr: usize, theta_lo: f64, theta_hi: f64, ntheta: usize, periodic: bool) -> Result<Self> {
        if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
            return invalid(format!("polar grid needs 0 < r_lo < r_hi, got ({r_lo}, {r_hi})"));
        }
        if !(theta_hi > theta_lo && theta_hi - theta_lo <= 2.0 * PI + 1e-12) {
            return invalid(format!("angular range ({theta_lo}, {theta_hi}) is not a window of the circle"));
        }
        if nr < 8 || ntheta < 8 {
            return invalid(format!("polar grid needs at least 8 cells per direction, got {nr}×{ntheta}"));
        }
        Ok(Self { r_lo, r_hi, nr, theta_lo, theta_hi, ntheta, periodic })
    }

    pub fn hr(&self) -> f64 {
        (self.r_hi - self.r_lo) / self.nr as f64
    }

    pub fn htheta(&self) -> f64 {
        (self.theta_hi - self.theta_lo) / self.ntheta as f64
    }

    pub fn rows(&self) -> usize {
        self.nr + 1
    }

    pub fn cols(&self) -> usize {
        if self.periodic {
            self.ntheta
        } else {
            self.ntheta + 1
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i == self.nr {
            self.r_hi
        } else {
            self.r_lo + i as f64 * self.hr()
        }
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.theta_lo + j as f64 * self.htheta()
    }

    /// `(i, j, r, θ)` for every lattice node, row-major.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        let cols = self.cols();
        (0..self.rows() * cols).map(move |k| {
            let (i, j) = (k / cols, k % cols);
            (i, j, self.radius(i), self.angle(j))
        })
    }
}

/// Cartesian domain given by a membership predicate inside a bounding box.
#[derive(Clone)]
pub struct CartesianDomain2D {
    pub indicator: Indicator,
    /// `[x_lo, x_hi, y_lo, y_hi]`.
    pub bbox: [f64; 4],
}

impl fmt::Debug for CartesianDomain2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CartesianDomain2D").field("bbox", &self.bbox).finish_non_exhaustive()
    }
}

impl CartesianDomain2D {
    pub fn new(indicator: Indicator, bbox: [f64; 4]) -> Self {
        Self { indicator, bbox }
    }

    /// The open box `(x_lo, x_hi) × (y_lo, y_hi)`.
    pub fn rectangle(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Self::new(
            Arc::new(move |x, y| x > x_lo && x < x_hi && y > y_lo && y < y_hi),
            [x_lo, x_hi, y_lo, y_hi],
        )
    }

    /// `(−a₁, a₁) × (−a₂, a₂)`.
    pub fn centered_box(a1: f64, a2: f64) -> Self {
        Self::rectangle(-a1, a1, -a2, a2)
    }

    /// Lattice on the bounding box with a whole number of cells per side, each
    /// at most `h` wide.
    pub fn lattice(&self, h: f64) -> Result<GridGeometry> {
        let [x_lo, x_hi, y_lo, y_hi] = self.bbox;
        if !(x_hi > x_lo && y_hi > y_lo) {
            return invalid(format!("degenerate bounding box {:?}", self.bbox));
        }
        if !(h > 0.0) {
            return invalid(format!("mesh width must be positive, got {h}"));
        }
        let nx = ((x_hi - x_lo) / h - 1e-9).ceil() as usize;
        let ny = ((y_hi - y_lo) / h - 1e-9).ceil() as usize;
        if nx < 8 || ny < 8 {
            return invalid(format!("mesh width {h} resolves the domain with fewer than 8 cells ({nx}×{ny})"));
        }
        Ok(GridGeometry::Cartesian { x_lo, y_lo, hx: (x_hi - x_lo) / nx as f64, hy: (y_hi - y_lo) / ny as f64, nx, ny })
    }

    /// Membership of every node of a Cartesian lattice, row-major.
    pub fn node_mask(&self, geometry: &GridGeometry) -> Vec<bool> {
        let (rows, cols, _) = geometry.shape();
        (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| {
                let p = geometry.point(i, j);
                (self.indicator)(p[0], p[1])
            })
            .collect()
    }
}

/// Where the nodes of a grid solution live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridGeometry {
    Polar(PolarGrid),
    /// Nodes `(x_lo + i·hx, y_lo + j·hy)`, `i = 0..=nx`, `j = 0..=ny`; `y` fastest.
    Cartesian { x_lo: f64, y_lo: f64, hx: f64, hy: f64, nx: usize, ny: usize },
}

impl GridGeometry {
    /// Node rows, node columns and periodicity of the lattice.
    pub fn shape(&self) -> (usize, usize, bool) {
        match *self {
            GridGeometry::Polar(g) => (g.rows(), g.cols(), g.periodic),
            GridGeometry::Cartesian { nx, ny, .. } => (nx + 1, ny + 1, false),
        }
    }

    /// Cartesian position of lattice node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        match *self {
            GridGeometry::Polar(g) => {
                let (r, t) = (g.radius(i), g.angle(j));
                [r * t.cos(), r * t.sin()]
            }
            GridGeometry::Cartesian { x_lo, y_lo, hx, hy, .. } => [x_lo + i as f64 * hx, y_lo + j as f64 * hy],
        }
    }

    /// Area element attached to node `(i, j)`.
    pub fn cell_measure(&self, i: usize, _j: usize) -> f64 {
        match *self {
            GridGeometry::Polar(g) => g.radius(i) * g.hr() * g.htheta(),
            GridGeometry::Cartesian { hx, hy, .. } => hx * hy,
        }
    }

    /// Fractional lattice coordinates of a Cartesian point.
    fn lattice_coords(&self, x: &[f64]) -> (f64, f64) {
        match *self {
            GridGeometry::Polar(g) => {
                let r = x[0].hypot(x[1]);
                let t = g.theta_lo + (x[1].atan2(x[0]) - g.theta_lo).rem_euclid(2.0 * PI);
                ((r - g.r_lo) / g.hr(), (t - g.theta_lo) / g.htheta())
            }
            GridGeometry::Cartesian { x_lo, y_lo, hx, hy, .. } => ((x[0] - x_lo) / hx, (x[1] - y_lo) / hy),
        }
    }
}

/// Eigenpairs of a grid solve, with the node data audits need.
#[derive(Debug, Clone)]
pub struct GridSpectrum {
    pub geometry: GridGeometry,
    /// Lattice index of each unknown.
    pub active: Vec<(usize, usize)>,
    /// Unknown index per lattice node, row-major; `usize::MAX` when masked.
    pub lookup: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Node values per mode, normalized in `L²` of the grid measure.
    pub modes: Vec<Vec<f64>>,
    /// Lattice distance (in cells, 4-neighbour) from each unknown to the nearest masked node.
    pub boundary_cells: Vec<usize>,
}

impl GridSpectrum {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn point(&self, unknown: usize) -> [f64; 2] {
        let (i, j) = self.active[unknown];
        self.geometry.point(i, j)
    }

    pub fn weight(&self, unknown: usize) -> f64 {
        let (i, j) = self.active[unknown];
        self.geometry.cell_measure(i, j)
    }

    /// Total measure of the active nodes.
    pub fn area(&self) -> f64 {
        (0..self.active.len()).map(|u| self.weight(u)).sum()
    }

    /// Bilinear interpolant of a mode; masked nodes count as zero.
    pub fn eval(&self, mode: usize, x: &[f64]) -> f64 {
        interpolate(&self.geometry, &self.lookup, &self.modes[mode], x)
    }

    /// Wrap as a [`Spectrum`] with interpolated eigenfunctions.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let shared = Arc::new((self.geometry, self.lookup.clone()));
        let mut sup_sq = 0.0f64;
        let modes = self
            .lambdas
            .iter()
            .zip(&self.modes)
            .enumerate()
            .map(|(k, (&lambda, values))| {
                let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                sup_sq = sup_sq.max(sup * sup);
                let values = Arc::new(values.clone());
                let shared = shared.clone();
                EigenMode {
                    lambda,
                    phi: Arc::new(move |x: &[f64]| interpolate(&shared.0, &shared.1, &values, x)),
                    sup_norm: sup,
                    label: format!("k={k}"),
                }
            })
            .collect();
        let floor = *self.lambdas.last().expect("nonempty");
        Spectrum::new(
            modes,
            TailModel { floor, weyl_c: 2.0 * PI / self.area(), weyl_q: 1.0, sup_sq: 2.0 * sup_sq },
        )
    }
}

fn interpolate(geometry: &GridGeometry, lookup: &[usize], values: &[f64], x: &[f64]) -> f64 {
    let (rows, cols, periodic) = geometry.shape();
    let (s, t) = geometry.lattice_coords(x);
    if !(s >= 0.0 && s <= (rows - 1) as f64 && t >= 0.0) {
        return 0.0;
    }
    let limit = if periodic { cols as f64 } else { (cols - 1) as f64 };
    if t > limit {
        return 0.0;
    }
    let i0 = (s.floor() as usize).min(rows - 2);
    let j0 = (t.floor() as usize).min(if periodic { cols - 1 } else { cols - 2 });
    let (fs, ft) = (s - i0 as f64, t - j0 as f64);
    let value = |i: usize, j: usize| {
        let j = if periodic { j % cols } else { j };
        let u = lookup[i * cols + j];
        if u == usize::MAX {
            0.0
        } else {
            values[u]
        }
    };
    (1.0 - fs) * (1.0 - ft) * value(i0, j0)
        + fs * (1.0 - ft) * value(i0 + 1, j0)
        + (1.0 - fs) * ft * value(i0, j0 + 1)
        + fs * ft * value(i0 + 1, j0 + 1)
}

/// Node order that keeps the matrix bandwidth near the shorter lattice side.
///
/// Periodic columns are visited as `0, c−1, 1, c−2, …` so that wrap-around
/// neighbours stay within two columns of each other.
fn band_order(rows: usize, cols: usize, periodic: bool) -> Vec<(usize, usize)> {
    let col_order: Vec<usize> = if periodic {
        let mut v: Vec<usize> = (0..cols).collect();
        v.sort_by_key(|&j| if j < cols - j { 2 * j } else { 2 * (cols - j) - 1 });
        v
    } else {
        (0..cols).collect()
    };
    let col_span = if periodic { 2 * rows } else { rows };
    if col_span < cols {
        col_order.iter().flat_map(|&j| (0..rows).map(move |i| (i, j))).collect()
    } else {
        (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect()
    }
}

/// Active unknowns, lookup table and boundary distances; errors on empty or
/// disconnected masks.
fn index_mask(rows: usize, cols: usize, periodic: bool, mask: &[bool]) -> Result<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> {
    if mask.len() != rows * cols {
        return invalid(format!("mask has {} nodes, lattice has {}", mask.len(), rows * cols));
    }
    let mut lookup = vec![usize::MAX; rows * cols];
    let mut active = Vec::new();
    for (i, j) in band_order(rows, cols, periodic) {
        if mask[i * cols + j] {
            lookup[i * cols + j] = active.len();
            active.push((i, j));
        }
    }
    if active.is_empty() {
        return Err(Error::Validation("grid domain is empty".into()));
    }
    let neighbours = |i: usize, j: usize| {
        let mut out = Vec::with_capacity(4);
        if i > 0 {
            out.push(Some((i - 1, j)));
        } else {
            out.push(None);
        }
        out.push(if i + 1 < rows { Some((i + 1, j)) } else { None });
        if j > 0 {
            out.push(Some((i, j - 1)));
        } else {
            out.push(if periodic { Some((i, cols - 1)) } else { None });
        }
        if j + 1 < cols {
            out.push(Some((i, j + 1)));
        } else {
            out.push(if periodic { Some((i, 0)) } else { None });
        }
        out
    };
    // Flood fill from the first unknown.
    let mut seen = vec![false; active.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        let (i, j) = active[u];
        for (ni, nj) in neighbours(i, j).into_iter().flatten() {
            let v = lookup[ni * cols + nj];
            if v != usize::MAX && !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    if reached != active.len() {
        return Err(Error::Validation(format!(
            "grid domain is disconnected: flood fill reached {reached} of {} nodes",
            active.len()
        )));
    }
    // Multi-source BFS from unknowns adjacent to masked nodes or the frame.
    let mut dist = vec![usize::MAX; active.len()];
    let mut queue = VecDeque::new();
    for (u, &(i, j)) in active.iter().enumerate() {
        let touches = neighbours(i, j)
            .into_iter()
            .any(|n| n.map_or(true, |(ni, nj)| lookup[ni * cols + nj] == usize::MAX));
        if touches {
            dist[u] = 1;
            queue.push_back(u);
        }
    }
    while let Some(u) = queue.pop_front() {
        let (i, j) = active[u];
        for (ni, nj) in neighbours(i, j).into_iter().flatten() {
            let v = lookup[ni * cols + nj];
            if v != usize::MAX && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok((active, lookup, dist))
}

fn finish(
    geometry: GridGeometry,
    matrix: CsrMatrix,
    mass: Vec<f64>,
    active: Vec<(usize, usize)>,
    lookup: Vec<usize>,
    boundary_cells: Vec<usize>,
    k: usize,
) -> Result<GridSpectrum> {
    if k > active.len() {
        return invalid(format!("requested {k} eigenpairs of a {}-node grid", active.len()));
    }
    let pairs = csr_smallest_eigenpairs(&matrix, k, 0.0)?;
    let mut lambdas = Vec::with_capacity(k);
    let mut modes = Vec::with_capacity(k);
    for pair in pairs {
        // The symmetrized unknowns are √m·u; Σ m u² = Σ v² = 1.
        let u: Vec<f64> = pair.vector.iter().zip(&mass).map(|(v, m)| v / m.sqrt()).collect();
        lambdas.push(pair.value);
        modes.push(u);
    }
    Ok(GridSpectrum { geometry, active, lookup, lambdas, modes, boundary_cells })
}

/// The `k` smallest Dirichlet eigenpairs of a polar domain on an `nr × nθ` grid.
pub fn solve_polar(domain: &PolarDomain2D, nr: usize, ntheta: usize, k: usize) -> Result<GridSpectrum> {
    let grid = domain.bounding_grid(nr, ntheta)?;
    solve_polar_on(domain, &grid, k)
}

/// Like [`solve_polar`] on a caller-chosen lattice, so several domains can share nodes.
pub fn solve_polar_on(domain: &PolarDomain2D, grid: &PolarGrid, k: usize) -> Result<GridSpectrum> {
    let mask = domain.mask(grid)?;
    solve_polar_mask(grid, &mask, k)
}

/// Polar solve on an explicit node mask.
///
/// Discretizes `−(1/r)∂_r(r ∂_r u) − (1/r²)∂²_θ u` as a symmetric stiffness
/// matrix with diagonal mass `r_i h_r h_θ`, symmetrized by the mass.
pub fn solve_polar_mask(grid: &PolarGrid, mask: &[bool], k: usize) -> Result<GridSpectrum> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let (active, lookup, dist) = index_mask(rows, cols, grid.periodic, mask)?;
    let (hr, ht) = (grid.hr(), grid.htheta());
    let mass: Vec<f64> = active.iter().map(|&(i, _)| grid.radius(i) * hr * ht).collect();
    let mut triplets = Vec::with_capacity(5 * active.len());
    for (u, &(i, j)) in active.iter().enumerate() {
        let r = grid.radius(i);
        let r_out = r + 0.5 * hr;
        let r_in = r - 0.5 * hr;
        // Stiffness scaled by h_r h_θ: radial fluxes r_{i±½} h_θ/h_r, angular h_r/(r h_θ).
        let kr_out = r_out * ht / hr;
        let kr_in = r_in * ht / hr;
        let kt = hr / (r * ht);
        triplets.push((u, u, kr_out + kr_in + 2.0 * kt));
        let mut link = |ni: usize, nj: usize, w: f64| {
            let v = lookup[ni * cols + nj];
            if v != usize::MAX {
                triplets.push((u, v, -w / (mass[u] * mass[v]).sqrt()));
            }
        };
        if i > 0 {
            link(i - 1, j, kr_in);
        }
        if i + 1 < rows {
            link(i + 1, j, kr_out);
        }
        if j > 0 {
            link(i, j - 1, kt);
        } else if grid.periodic {
            link(i, cols - 1, kt);
        }
        if j + 1 < cols {
            link(i, j + 1, kt);
        } else if grid.periodic {
            link(i, 0, kt);
        }
    }
    for t in triplets.iter_mut().filter(|t| t.0 == t.1) {
        t.2 /= mass[t.0];
    }
    let matrix = CsrMatrix::from_triplets(active.len(), triplets)?;
    finish(GridGeometry::Polar(*grid), matrix, mass, active, lookup, dist, k)
}

/// The `k` smallest Dirichlet eigenpairs of a Cartesian domain with mesh width about `h`.
///
/// The bounding box is split into a whole number of cells in each direction,
/// so the actual widths are at most `h`.
pub fn solve_cartesian(domain: &CartesianDomain2D, h: f64, k: usize) -> Result<GridSpectrum> {
    let geometry = domain.lattice(h)?;
    solve_cartesian_mask(geometry, &domain.node_mask(&geometry), k)
}

/// Cartesian solve on an explicit node mask of a [`GridGeometry::Cartesian`] lattice.
pub fn solve_cartesian_mask(geometry: GridGeometry, mask: &[bool], k: usize) -> Result<GridSpectrum> {
    let GridGeometry::Cartesian { hx, hy, nx, ny, .. } = geometry else {
        return invalid("expected a Cartesian lattice");
    };
    let (rows, cols) = (nx + 1, ny + 1);
    let (active, lookup, dist) = index_mask(rows, cols, false, mask)?;
    let (wx, wy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let mut triplets = Vec::with_capacity(5 * active.len());
    for (u, &(i, j)) in active.iter().enumerate() {
        triplets.push((u, u, 2.0 * wx + 2.0 * wy));
        let mut link = |ni: usize, nj: usize, w: f64| {
            let v = lookup[ni * cols + nj];
            if v != usize::MAX {
                triplets.push((u, v, -w));
            }
        };
        if i > 0 {
            link(i - 1, j, wx);
        }
        if i + 1 < rows {
            link(i + 1, j, wx);
        }
        if j > 0 {
            link(i, j - 1, wy);
        }
        if j + 1 < cols {
            link(i, j + 1, wy);
        }
    }
    let matrix = CsrMatrix::from_triplets(active.len(), triplets)?;
    let mass = vec![hx * hy; active.len()];
    finish(geometry, matrix, mass, active, lookup, dist, k)
}

/// `(4λ_fine − λ_coarse)/3` for second-order grid errors.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// A polar node mask in a plain text format.
///
/// The first line is `Nr Nθ r_lo r_hi θ_lo θ_hi`: the number of node rows and
/// columns and the lattice extent. `Nr` lines of `Nθ` characters `0`/`1`
/// follow (whitespace between characters is ignored). A range of `2π` in `θ`
/// is read as a periodic lattice, whose last node sits one step before `θ_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshMask {
    pub grid: PolarGrid,
    pub cells: Vec<bool>,
}

impl MeshMask {
    pub fn from_domain(domain: &PolarDomain2D, grid: PolarGrid) -> Result<Self> {
        Ok(Self { cells: domain.mask(&grid)?, grid })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("mesh mask is empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!("mask header needs 6 fields, found {}", fields.len())));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("bad count {s:?}: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")));
        let (rows, cols) = (count(fields[0])?, count(fields[1])?);
        let (r_lo, r_hi, t_lo, t_hi) = (real(fields[2])?, real(fields[3])?, real(fields[4])?, real(fields[5])?);
        let periodic = ((t_hi - t_lo) - 2.0 * PI).abs() < 1e-9;
        if rows < 2 || cols < 2 {
            return Err(Error::Parse(format!("mask needs at least 2×2 nodes, got {rows}×{cols}")));
        }
        let grid = PolarGrid::new(r_lo, r_hi, rows - 1, t_lo, t_hi, if periodic { cols } else { cols - 1 }, periodic)?;
        let mut cells = Vec::with_capacity(rows * cols);
        for (ln, line) in lines.enumerate() {
            let row: Vec<bool> = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::Parse(format!("mask row {}: unexpected character {other:?}", ln + 1))),
                })
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::Parse(format!("mask row {} has {} entries, expected {cols}", ln + 1, row.len())));
            }
            cells.extend(row);
        }
        if cells.len() != rows * cols {
            return Err(Error::Parse(format!("mask has {} rows, expected {rows}", cells.len() / cols)));
        }
        Ok(Self { grid, cells })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn solve(&self, k: usize) -> Result<GridSpectrum> {
        solve_polar_mask(&self.grid, &self.cells, k)
    }
}

impl fmt::Display for MeshMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.grid;
        writeln!(f, "{} {} {:e} {:e} {:e} {:e}", g.rows(), g.cols(), g.r_lo, g.r_hi, g.theta_lo, g.theta_hi)?;
        for row in self.cells.chunks(g.cols()) {
            let line: String = row.iter().map(|&c| if c { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
