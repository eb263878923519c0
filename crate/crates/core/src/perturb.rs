//! Domain-perturbation laboratory: box and annulus sandwiches `A ⊆ U ⊆ B`
//! solved on a shared lattice, with eigenfunction-ratio audits.
//!
//! All three domains of a scenario are masks of one lattice, so the discrete
//! operators are nested principal submatrices and the eigenvalue ordering
//! `λ(B) ≤ λ(U) ≤ λ(A)` holds exactly for the grid eigenvalues.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimates::BoundsReport;
use crate::spectral2d::{
    solve_cartesian_mask, solve_polar_mask, AngularWindow, CartesianDomain2D, GridGeometry, GridSpectrum, PolarDomain2D,
    PolarGrid,
};

/// Both box hypotheses for `B₁ = ∏(−a_i, a_i) ⊆ B₂ = ∏(−b_i, b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxConditions {
    /// `max_i (1/a_i² − 1/b_i²)·max_i b_i²` against `C₁`.
    pub eigenvalue_condition: BoundsReport,
    /// `max_i b_i/a_i` against `C₂`.
    pub aspect_condition: BoundsReport,
    /// `√(C₁ + 1)`.
    pub implied_c2: f64,
    /// Whether `a_i ≥ b_i/√(C₁+1)` for all `i` whenever the first condition holds.
    pub implication_holds: bool,
}

pub fn check_box_conditions(a: &[f64], b: &[f64], c1: f64, c2: f64) -> Result<BoxConditions> {
    if a.len() != b.len() || a.is_empty() {
        return invalid("box dimensions must have equal, nonzero length");
    }
    if a.iter().zip(b).any(|(&ai, &bi)| !(ai > 0.0 && ai <= bi)) {
        return invalid("need 0 < a_i ≤ b_i in every coordinate");
    }
    if !(c1 >= 0.0 && c2 >= 1.0) {
        return invalid("need C₁ ≥ 0 and C₂ ≥ 1");
    }
    let bmax2 = b.iter().map(|x| x * x).fold(0.0, f64::max);
    let required_c1 = a.iter().zip(b).map(|(ai, bi)| (1.0 / (ai * ai) - 1.0 / (bi * bi)) * bmax2).fold(0.0, f64::max);
    let required_c2 = a.iter().zip(b).map(|(ai, bi)| bi / ai).fold(1.0, f64::max);
    let eigenvalue_condition = BoundsReport::new("box eigenvalue condition C1", required_c1, 0.0, c1, 1e-12 * c1.max(1.0));
    let aspect_condition = BoundsReport::new("box aspect condition C2", required_c2, 1.0, c2, 1e-12 * c2);
    let implied_c2 = (c1 + 1.0).sqrt();
    let implication_holds = !eigenvalue_condition.pass || required_c2 <= implied_c2 * (1.0 + 1e-12);
    Ok(BoxConditions { eigenvalue_condition, aspect_condition, implied_c2, implication_holds })
}

/// How the sandwiched box `U` sits between `B₁` and `B₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SandwichedBox {
    Inner,
    Outer,
    /// `B₂` minus the four corner blocks `|x| > b₁ − f(b₁−a₁)`, `|y| > b₂ − f(b₂−a₂)`.
    Notched { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxScenario {
    pub inner: [f64; 2],
    pub outer: [f64; 2],
    pub sandwiched: SandwichedBox,
    pub c1: f64,
    pub c2: f64,
}

/// A truncated Fourier series `c₀ + Σ a_k cos kθ + b_k sin kθ`, clamped to `[0, 1]`
/// when used as a relative offset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl RadialProfile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let c: f64 = self.cos.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * theta).cos()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * theta).sin()).sum();
        (self.constant + c + s).clamp(0.0, 1.0)
    }

    /// `(1 + sin kθ)/2` or `(1 + cos kθ)/2`.
    pub fn bump(k: usize, sine: bool) -> Self {
        let mut coeffs = vec![0.0; k];
        coeffs[k - 1] = 0.5;
        if sine {
            Self { constant: 0.5, cos: Vec::new(), sin: coeffs }
        } else {
            Self { constant: 0.5, cos: coeffs, sin: Vec::new() }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnulusBase {
    Full,
    Arc { theta1: f64 },
}

/// Annular sandwich `A = (1, 1+ε)×A₀`, `B = (1−a_ε, 1+ε+b_ε)×A₀(η)`, with `U`
/// between them given by radial offsets `r_min = 1 − a_ε·inner(θ)`,
/// `r_max = 1 + ε + b_ε·outer(θ)` and angular margin `window·η`, all scaled by
/// `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusScenario {
    pub eps: f64,
    pub a_eps: f64,
    pub b_eps: f64,
    #[serde(default)]
    pub eta: f64,
    pub base: AnnulusBase,
    #[serde(default)]
    pub inner: RadialProfile,
    #[serde(default)]
    pub outer: RadialProfile,
    #[serde(default)]
    pub window: f64,
    /// `(C₁, C₂)` with `a_ε ≤ C₁ε³`, `b_ε ≤ C₂ε³` asserted.
    pub regime: Option<(f64, f64)>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl AnnulusScenario {
    /// `U = A = B`.
    pub fn identity(eps: f64, base: AnnulusBase) -> Self {
        Self {
            eps,
            a_eps: 0.0,
            b_eps: 0.0,
            eta: 0.0,
            base,
            inner: RadialProfile::zero(),
            outer: RadialProfile::zero(),
            window: 0.0,
            regime: Some((1.0, 1.0)),
            scale: 1.0,
        }
    }

    /// Full circle, `a_ε = b_ε = ε³`, `U` with sixfold bumps on both sides.
    pub fn bumpy(eps: f64) -> Self {
        let e3 = eps.powi(3);
        Self {
            eps,
            a_eps: e3,
            b_eps: e3,
            eta: 0.0,
            base: AnnulusBase::Full,
            inner: RadialProfile::bump(6, true),
            outer: RadialProfile::bump(6, false),
            window: 0.0,
            regime: Some((1.0, 1.0)),
            scale: 1.0,
        }
    }

    /// Arc `(0, 3π/4)` with `a_ε = b_ε = ε³`, widened by `η` in `B`; `U`
    /// takes half the angular margin and bumps radially.
    pub fn arc_example(eps: f64, eta: f64) -> Self {
        Self {
            eta,
            base: AnnulusBase::Arc { theta1: 0.75 * PI },
            window: 0.5,
            ..Self::bumpy(eps)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return invalid(format!("ε must lie in (0, 1), got {}", self.eps));
        }
        if !(self.a_eps >= 0.0 && self.b_eps >= 0.0 && self.a_eps < 1.0) {
            return invalid("need 0 ≤ a_ε < 1 and b_ε ≥ 0");
        }
        if !(self.eta >= 0.0 && (0.0..=1.0).contains(&self.window) && self.scale > 0.0) {
            return invalid("need η ≥ 0, window fraction in [0, 1] and a positive scale");
        }
        if let AnnulusBase::Arc { theta1 } = self.base {
            if !(theta1 > 0.0 && theta1 + 2.0 * self.eta < 2.0 * PI) {
                return invalid("arc base must satisfy 0 < θ₁ and θ₁ + 2η < 2π");
            }
        }
        let Some((c1, c2)) = self.regime else {
            return Err(Error::Validation("annulus scenarios need regime constants (C₁, C₂)".into()));
        };
        let e3 = self.eps.powi(3);
        if self.a_eps > c1 * e3 * (1.0 + 1e-12) || self.b_eps > c2 * e3 * (1.0 + 1e-12) {
            return invalid(format!(
                "regime violated: a_ε = {}, b_ε = {} against C₁ε³ = {}, C₂ε³ = {}",
                self.a_eps,
                self.b_eps,
                c1 * e3,
                c2 * e3
            ));
        }
        Ok(())
    }

    fn window(&self, margin: f64) -> AngularWindow {
        match self.base {
            AnnulusBase::Full => AngularWindow::FullCircle,
            AnnulusBase::Arc { theta1 } => AngularWindow::Window { lo: -margin, hi: theta1 + margin },
        }
    }

    /// `(A, U, B)`.
    pub fn domains(&self) -> (PolarDomain2D, PolarDomain2D, PolarDomain2D) {
        let (s, e) = (self.scale, self.eps);
        let a = PolarDomain2D::new(Arc::new(move |_| s), Arc::new(move |_| s * (1.0 + e)), self.window(0.0));
        let (inner, outer) = (self.inner.clone(), self.outer.clone());
        let (ae, be) = (self.a_eps, self.b_eps);
        let u = PolarDomain2D::new(
            Arc::new(move |t| s * (1.0 - ae * inner.eval(t))),
            Arc::new(move |t| s * (1.0 + e + be * outer.eval(t))),
            self.window(self.window * self.eta),
        );
        let b = PolarDomain2D::new(
            Arc::new(move |_| s * (1.0 - ae)),
            Arc::new(move |_| s * (1.0 + e + be)),
            self.window(self.eta),
        );
        (a, u, b)
    }

    /// `min{r−1, 1+ε−r}/ε^{3/2} · φ_{A₀}(θ)` in unscaled coordinates.
    pub fn caricature(&self, r: f64, theta: f64) -> f64 {
        let r = r / self.scale;
        let radial = (r - 1.0).min(1.0 + self.eps - r).max(0.0) / self.eps.powf(1.5);
        let angular = match self.base {
            AnnulusBase::Full => 1.0 / (2.0 * PI).sqrt(),
            AnnulusBase::Arc { theta1 } => (2.0 / theta1).sqrt() * (PI * theta / theta1).sin().max(0.0),
        };
        radial * angular
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationScenario {
    Box(BoxScenario),
    Annulus(AnnulusScenario),
}

/// Top-level layout of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub scenario: PerturbationScenario,
    /// Mesh width for boxes.
    pub h: Option<f64>,
    /// `(Nr, Nθ)` for annuli.
    pub grid: Option<(usize, usize)>,
    /// Assumption metadata recorded verbatim, not verified.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("scenario file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("scenario serialization: {e}")))
    }

    pub fn run(&self) -> Result<PerturbationReport> {
        match &self.scenario {
            PerturbationScenario::Box(b) => {
                let h = self.h.ok_or_else(|| Error::Validation("box scenarios need a mesh width h".into()))?;
                box_perturbation_audit(b, h)
            }
            PerturbationScenario::Annulus(a) => {
                let (nr, nt) = self.grid.ok_or_else(|| Error::Validation("annulus scenarios need grid = [Nr, Nθ]".into()))?;
                annulus_perturbation_audit(a, nr, nt)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    /// Grid eigenvalues of the outer, sandwiched and inner domains.
    pub lambda_outer: f64,
    pub lambda_sandwiched: f64,
    pub lambda_inner: f64,
    pub ordering_holds: bool,
    /// `max_U φ_U/φ_B`.
    pub upper_ratio: f64,
    /// `min φ_U/φ_A` over the trimmed inner domain.
    pub lower_ratio: f64,
    /// `sup/inf` of `φ_U/Φ` on the trimmed core, for annuli.
    pub core_spread: Option<f64>,
    pub conditions: Option<BoxConditions>,
    pub nodes: usize,
    pub grid: String,
}

impl PerturbationReport {
    /// Smallest `C` with `upper ≤ C`, `lower ≥ 1/C` and `core spread ≤ C`.
    pub fn constant(&self) -> f64 {
        self.upper_ratio.max(1.0 / self.lower_ratio).max(self.core_spread.unwrap_or(1.0))
    }
}

fn principal(sol: &GridSpectrum) -> Vec<f64> {
    let v = &sol.modes[0];
    if v.iter().sum::<f64>() < 0.0 {
        v.iter().map(|x| -x).collect()
    } else {
        v.clone()
    }
}

fn check_nested(inner: &[bool], outer: &[bool], what: &str) -> Result<()> {
    if inner.iter().zip(outer).any(|(&i, &o)| i && !o) {
        return Err(Error::Validation(format!("sandwich violated on the grid: {what}")));
    }
    Ok(())
}

/// Analytic `φ` of `(−a₁, a₁) × (−a₂, a₂)`.
pub fn box_phi(a: [f64; 2], x: [f64; 2]) -> f64 {
    let f = |ai: f64, xi: f64| if xi.abs() < ai { (PI * xi / (2.0 * ai)).cos() / ai.sqrt() } else { 0.0 };
    f(a[0], x[0]) * f(a[1], x[1])
}

/// `φ_U` on a lattice aligned with `B₂`, compared with the analytic box
/// eigenfunctions: `max_U φ_U/φ_{B₂}` and `min φ_U/φ_{B₁}` over `B₁` trimmed by
/// two cells.
pub fn box_perturbation_audit(scenario: &BoxScenario, h: f64) -> Result<PerturbationReport> {
    let (a, b) = (scenario.inner, scenario.outer);
    let conditions = check_box_conditions(&a, &b, scenario.c1, scenario.c2)?;
    let outer = CartesianDomain2D::centered_box(b[0], b[1]);
    let inner = CartesianDomain2D::centered_box(a[0], a[1]);
    let u = match scenario.sandwiched {
        SandwichedBox::Inner => inner.clone(),
        SandwichedBox::Outer => outer.clone(),
        SandwichedBox::Notched { fraction } => {
            if !(0.0..=1.0).contains(&fraction) {
                return invalid("notch fraction must lie in [0, 1]");
            }
            let (cx, cy) = (b[0] - fraction * (b[0] - a[0]), b[1] - fraction * (b[1] - a[1]));
            CartesianDomain2D::new(
                Arc::new(move |x, y| x.abs() < b[0] && y.abs() < b[1] && !(x.abs() > cx && y.abs() > cy)),
                outer.bbox,
            )
        }
    };
    let geometry = outer.lattice(h)?;
    let GridGeometry::Cartesian { hx, hy, .. } = geometry else { unreachable!() };
    let masks = [inner.node_mask(&geometry), u.node_mask(&geometry), outer.node_mask(&geometry)];
    check_nested(&masks[0], &masks[1], "B₁ ⊄ U")?;
    check_nested(&masks[1], &masks[2], "U ⊄ B₂")?;
    let sols: Vec<GridSpectrum> = masks.iter().map(|m| solve_cartesian_mask(geometry, m, 1)).collect::<Result<_>>()?;
    let (sol_a, sol_u, sol_b) = (&sols[0], &sols[1], &sols[2]);
    let phi_u = principal(sol_u);
    let mut upper = 0.0f64;
    let mut lower = f64::INFINITY;
    for (k, &v) in phi_u.iter().enumerate() {
        let p = sol_u.point(k);
        upper = upper.max(v / box_phi(b, p));
        if p[0].abs() < a[0] - 2.0 * hx && p[1].abs() < a[1] - 2.0 * hy {
            lower = lower.min(v / box_phi(a, p));
        }
    }
    if !lower.is_finite() {
        return invalid("trimmed inner box contains no grid nodes");
    }
    let (la, lu, lb) = (sol_a.lambdas[0], sol_u.lambdas[0], sol_b.lambdas[0]);
    Ok(PerturbationReport {
        lambda_outer: lb,
        lambda_sandwiched: lu,
        lambda_inner: la,
        ordering_holds: lb <= lu && lu <= la,
        upper_ratio: upper,
        lower_ratio: lower,
        core_spread: None,
        conditions: Some(conditions),
        nodes: sol_u.active.len(),
        grid: format!("cartesian h = {h}"),
    })
}

/// Solves `A`, `U`, `B` on one polar lattice spanning `B` and reports the
/// upper ratio over `U`, the lower ratio over `A` trimmed by two cells plus
/// `ε³` (scaled), and the caricature spread on the trimmed core
/// `(1+a_ε, 1+ε−b_ε) × (η, θ₁−η)`.
pub fn annulus_perturbation_audit(scenario: &AnnulusScenario, nr: usize, ntheta: usize) -> Result<PerturbationReport> {
    scenario.validate()?;
    let (dom_a, dom_u, dom_b) = scenario.domains();
    let grid: PolarGrid = dom_b.bounding_grid(nr, ntheta)?;
    let masks = [dom_a.mask(&grid)?, dom_u.mask(&grid)?, dom_b.mask(&grid)?];
    check_nested(&masks[0], &masks[1], "A ⊄ U")?;
    check_nested(&masks[1], &masks[2], "U ⊄ B")?;
    let sols: Vec<GridSpectrum> = masks.iter().map(|m| solve_polar_mask(&grid, m, 1)).collect::<Result<_>>()?;
    let phis: Vec<Vec<f64>> = sols.iter().map(principal).collect();
    let (sol_a, sol_u, sol_b) = (&sols[0], &sols[1], &sols[2]);
    let cols = grid.cols();
    let (s, e) = (scenario.scale, scenario.eps);
    let (hr, ht) = (grid.hr(), grid.htheta());
    let e3 = s * e.powi(3);
    let (theta1, eta) = match scenario.base {
        AnnulusBase::Full => (2.0 * PI, 0.0),
        AnnulusBase::Arc { theta1 } => (theta1, scenario.eta),
    };
    let full = matches!(scenario.base, AnnulusBase::Full);
    let mut upper = 0.0f64;
    let mut lower = f64::INFINITY;
    let (mut core_hi, mut core_lo) = (0.0f64, f64::INFINITY);
    for (k, &(i, j)) in sol_u.active.iter().enumerate() {
        let node = i * cols + j;
        let v = phis[1][k];
        upper = upper.max(v / phis[2][sol_b.lookup[node]]);
        let (r, t) = (grid.radius(i), grid.angle(j));
        let inside = |lo: f64, hi: f64, tlo: f64, thi: f64| r > lo && r < hi && (full || (t > tlo && t < thi));
        if inside(s + 2.0 * hr + e3, s * (1.0 + e) - 2.0 * hr - e3, 2.0 * ht, theta1 - 2.0 * ht) {
            let ua = sol_a.lookup[node];
            if ua != usize::MAX {
                lower = lower.min(v / phis[0][ua]);
            }
        }
        let (c_lo, c_hi) = (s * (1.0 + scenario.a_eps) + 2.0 * hr, s * (1.0 + e - scenario.b_eps) - 2.0 * hr);
        if inside(c_lo, c_hi, eta + 2.0 * ht, theta1 - eta - 2.0 * ht) {
            let q = v / scenario.caricature(r, t);
            core_hi = core_hi.max(q);
            core_lo = core_lo.min(q);
        }
    }
    if !lower.is_finite() || !core_lo.is_finite() {
        return invalid("trimmed regions contain no grid nodes; refine the grid");
    }
    let (la, lu, lb) = (sol_a.lambdas[0], sol_u.lambdas[0], sol_b.lambdas[0]);
    Ok(PerturbationReport {
        lambda_outer: lb,
        lambda_sandwiched: lu,
        lambda_inner: la,
        ordering_holds: lb <= lu && lu <= la,
        upper_ratio: upper,
        lower_ratio: lower,
        core_spread: Some(core_hi / core_lo),
        conditions: None,
        nodes: sol_u.active.len(),
        grid: format!("polar {nr}x{ntheta}"),
    })
}

/// One `(ε, p)` cell of the exploratory sweep with `a_ε = b_ε = ε^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub p: f64,
    pub upper_ratio: f64,
    pub lower_ratio: f64,
    pub core_spread: f64,
}

/// Bumpy full-circle scenarios with `a_ε = b_ε = ε^p`; report-only.
pub fn epsilon_power_sweep(eps_list: &[f64], powers: &[f64], cells_across: usize, ntheta: usize) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &eps in eps_list {
        for &p in powers {
            let off = eps.powf(p);
            let c = off / eps.powi(3);
            let sc = AnnulusScenario { a_eps: off, b_eps: off, regime: Some((c, c)), ..AnnulusScenario::bumpy(eps) };
            let nr = ((eps + 2.0 * off) / eps * cells_across as f64).ceil() as usize;
            let rep = annulus_perturbation_audit(&sc, nr, ntheta)?;
            rows.push(SweepRow {
                eps,
                p,
                upper_ratio: rep.upper_ratio,
                lower_ratio: rep.lower_ratio,
                core_spread: rep.core_spread.unwrap_or(f64::NAN),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::eigengap;
    use approx::assert_relative_eq;

    #[test]
    fn identical_boxes_need_no_constant() {
        let c = check_box_conditions(&[1.0, 2.0], &[1.0, 2.0], 0.0, 1.0).unwrap();
        assert!(c.eigenvalue_condition.pass && c.aspect_condition.pass);
        assert_eq!(c.eigenvalue_condition.value, 0.0);
    }

    #[test]
    fn box_condition_example() {
        let c = check_box_conditions(&[1.0, 1.0], &[1.05, 1.05], 0.1025, 1.05).unwrap();
        assert_relative_eq!(c.eigenvalue_condition.value, 0.1025, epsilon = 1e-12);
        assert_relative_eq!(c.implied_c2, 1.05, epsilon = 1e-12);
        assert!(c.eigenvalue_condition.pass && c.aspect_condition.pass && c.implication_holds);
        let lhs: f64 = 1.0 - 1.0 / 1.1025;
        assert!((lhs - 0.0930).abs() < 1e-4);
        assert!(!check_box_conditions(&[1.0, 1.0], &[1.05, 1.05], 0.1, 1.05).unwrap().eigenvalue_condition.pass);
        assert!(check_box_conditions(&[1.1, 1.0], &[1.05, 1.05], 0.1, 1.05).is_err());
    }

    #[test]
    fn identity_box_gives_unit_ratios() {
        let sc = BoxScenario { inner: [1.0, 0.5], outer: [1.0, 0.5], sandwiched: SandwichedBox::Outer, c1: 0.0, c2: 1.0 };
        let rep = box_perturbation_audit(&sc, 1.0 / 32.0).unwrap();
        assert!((rep.upper_ratio - 1.0).abs() < 1e-6 && (rep.lower_ratio - 1.0).abs() < 1e-6, "{rep:?}");
        assert!(rep.ordering_holds);
    }

    #[test]
    fn notched_box_is_sandwiched() {
        let sc = BoxScenario { inner: [1.0, 1.0], outer: [1.05, 1.05], sandwiched: SandwichedBox::Notched { fraction: 1.0 }, c1: 0.1025, c2: 1.05 };
        let rep = box_perturbation_audit(&sc, 1.0 / 48.0).unwrap();
        assert!(rep.ordering_holds && rep.lambda_outer < rep.lambda_inner);
        assert!(rep.upper_ratio <= 3.0 && rep.lower_ratio >= 1.0 / 3.0, "{rep:?}");
    }

    #[test]
    fn lower_ratio_collapses_without_aspect_condition() {
        let mut last = f64::INFINITY;
        for a1 in [0.5, 0.25, 0.125] {
            let sc = BoxScenario { inner: [a1, 1.0], outer: [1.0, 1.0], sandwiched: SandwichedBox::Outer, c1: 1e3, c2: 1e3 };
            let rep = box_perturbation_audit(&sc, 1.0 / 64.0).unwrap();
            assert!(rep.lower_ratio < last);
            last = rep.lower_ratio;
        }
        assert!(last < 0.5);
    }

    #[test]
    fn sandwich_and_regime_violations_are_rejected() {
        assert!(check_nested(&[true, true], &[true, false], "test").is_err());
        assert!(check_nested(&[false, true], &[true, true], "test").is_ok());
        let no_regime = AnnulusScenario { regime: None, ..AnnulusScenario::bumpy(0.3) };
        assert!(annulus_perturbation_audit(&no_regime, 48, 256).is_err());
        let too_wide = AnnulusScenario { a_eps: 0.1, ..AnnulusScenario::bumpy(0.3) };
        assert!(annulus_perturbation_audit(&too_wide, 48, 256).is_err());
    }

    #[test]
    fn identity_annulus_gives_unit_ratios() {
        let rep = annulus_perturbation_audit(&AnnulusScenario::identity(0.3, AnnulusBase::Full), 48, 256).unwrap();
        assert!((rep.upper_ratio - 1.0).abs() < 1e-9 && (rep.lower_ratio - 1.0).abs() < 1e-9);
        assert!(rep.ordering_holds);
    }

    #[test]
    fn bumpy_annulus_ratios_are_bounded() {
        let rep = annulus_perturbation_audit(&AnnulusScenario::bumpy(0.3), 64, 360).unwrap();
        assert!(rep.ordering_holds, "{rep:?}");
        assert!(rep.constant() <= 10.0, "{rep:?}");
    }

    #[test]
    fn ratios_are_dilation_invariant() {
        let sc = AnnulusScenario::arc_example(0.3, 0.05);
        let r1 = annulus_perturbation_audit(&sc, 48, 160).unwrap();
        let r2 = annulus_perturbation_audit(&AnnulusScenario { scale: 2.5, ..sc }, 48, 160).unwrap();
        assert_relative_eq!(r1.upper_ratio, r2.upper_ratio, max_relative = 1e-8);
        assert_relative_eq!(r1.lower_ratio, r2.lower_ratio, max_relative = 1e-8);
        assert_relative_eq!(r1.core_spread.unwrap(), r2.core_spread.unwrap(), max_relative = 1e-8);
        assert_relative_eq!(r1.lambda_inner, 6.25 * r2.lambda_inner, max_relative = 1e-8);
    }

    #[test]
    fn eigengap_stays_bounded_on_the_ladder() {
        for eps in [0.1, 0.2, 0.3] {
            let g = eigengap(2, eps, eps.powi(3), eps.powi(3)).unwrap();
            assert!(g.gap > 0.0 && g.gap < 60.0, "{g:?}");
        }
    }

    #[test]
    fn scenario_file_round_trip() {
        let file = ScenarioFile {
            name: "arc".into(),
            scenario: PerturbationScenario::Annulus(AnnulusScenario::arc_example(0.3, 0.05)),
            h: None,
            grid: Some((48, 160)),
            notes: vec!["volume growth assumed".into()],
        };
        let text = file.to_toml().unwrap();
        assert_eq!(ScenarioFile::parse(&text).unwrap(), file);
        assert!(matches!(ScenarioFile::parse("name = 3"), Err(Error::Parse(_))));
    }
}
