use std::f64::consts::PI;

use serde_json::{json, Value};

use annspec::auditors::{
    doubling_profile, ladder_radii, poincare_profile, sector_counterexample, standard_centers, AuditReport, PoincareMode,
};
use annspec::bases::base_eigendata;
use annspec::estimates::{
    annulus_eigenvalue_bounds, annulus_profile_samples, annulus_sandwich_check, comparability_audit, hadamard_scan,
    CaricatureFn, CaricatureKind, RadialWeight, ThinProfile,
};
use annspec::geometry::{QuadGrid, WeightFunction};
use annspec::heatkernel::{
    annulus_heat_spectrum, annulus_samples, box_kernel_bounds_check, box_samples, box_spectrum, equilibration_audit,
    gaussian_hke_audit, log_times,
};
use annspec::perturb::{
    annulus_perturbation_audit, box_perturbation_audit, epsilon_power_sweep, AnnulusBase, AnnulusScenario, BoxScenario,
    PerturbationReport, PerturbationScenario, SandwichedBox, ScenarioFile,
};
use annspec::radial::{alpha, solve_radial};
use annspec::{AnnularDomainSpec, BaseDomain, Error, MetricDomain, Result};

use crate::args::*;
use crate::output::{Artifact, Check, Table};

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Internal(format!("JSON encoding: {e}")))
}

fn thin_annulus(a: f64, eps: f64) -> Result<AnnularDomainSpec> {
    AnnularDomainSpec::new(2, a, a + eps, BaseDomain::FullSphere { n: 2 })
}

fn weight_for(spec: &AnnularDomainSpec, w: WeightArg) -> Result<WeightFunction> {
    match w {
        WeightArg::Phi2 => WeightFunction::dirichlet(spec),
        WeightArg::Uniform => Ok(WeightFunction::uniform(PI * (spec.b * spec.b - spec.a * spec.a))),
    }
}

fn angular_cells(per_eps: f64, a: f64, eps: f64) -> usize {
    (per_eps * 2.0 * PI * a / eps).ceil() as usize
}

pub fn solve(args: &SolveArgs) -> Result<Artifact> {
    let base = match args.base {
        BaseArg::Full => BaseDomain::FullSphere { n: args.n },
        BaseArg::Arc => BaseDomain::CircleArc { theta1: args.theta1 },
        BaseArg::Orthant => BaseDomain::OrthantIntersection { n: args.n, k: args.k },
    };
    let spec = AnnularDomainSpec::new(args.n, args.a, args.b, base.clone())?;
    let lambda0 = base_eigendata(&base)?.lambda0;
    let modes = solve_radial(args.n, args.a, args.b, lambda0, args.grid, args.modes)?;
    let mut table = Table::new(&["index", "lambda"]);
    for (i, m) in modes.iter().enumerate() {
        table.push(vec![i.into(), m.lambda.into()]);
    }
    let lambda = modes[0].lambda;
    let mut checks = Vec::new();
    if args.base == BaseArg::Full {
        let rep = annulus_sandwich_check(args.n, args.a, args.b, lambda)?;
        checks.push(Check::bound("shell eigenvalue sandwich", Some(2), lambda, rep.pass, format!("[{:e}, {:e}]", rep.lower, rep.upper)));
        if args.n == 3 {
            let exact = (PI / (args.b - args.a)).powi(2);
            let err = (lambda - exact).abs() / exact;
            checks.push(Check::bound("n=3 closed form pi^2/(b-a)^2", Some(1), err, err <= 1e-8, "relative error <= 1e-8"));
        }
    } else {
        let la = solve_radial(args.n, args.a, args.b, 0.0, args.grid, 1)?[0].lambda;
        let (lo, hi) = (la + lambda0 / (args.b * args.b), la + lambda0 / (args.a * args.a));
        let slack = 1e-6 * lambda;
        let ok = lo - slack <= lambda && lambda <= hi + slack;
        checks.push(Check::bound("base decomposition sandwich", Some(3), lambda, ok, format!("[{lo:e}, {hi:e}]")));
    }
    let results = json!({
        "lambda": lambda,
        "lambdas": modes.iter().map(|m| m.lambda).collect::<Vec<_>>(),
        "lambda0": lambda0,
        "alpha": alpha(args.n),
        "thin": spec.is_thin(),
    });
    Ok(Artifact { table, results, checks })
}

pub fn bounds(args: &BoundsArgs) -> Result<Artifact> {
    let iv = annulus_eigenvalue_bounds(args.n, args.a, args.b)?;
    let lambda = solve_radial(args.n, args.a, args.b, 0.0, args.grid, 1)?[0].lambda;
    let rep = annulus_sandwich_check(args.n, args.a, args.b, lambda)?;
    let mut table = Table::new(&["c1", "c2", "lower", "upper", "lambda"]);
    table.push(vec![iv.c1.into(), iv.c2.into(), iv.lower.into(), iv.upper.into(), lambda.into()]);
    let checks = vec![Check::bound("shell eigenvalue sandwich", Some(2), lambda, rep.pass, format!("[{:e}, {:e}]", iv.lower, iv.upper))];
    let results = json!({ "interval": [iv.lower, iv.upper], "c1": iv.c1, "c2": iv.c2, "lambda": lambda });
    Ok(Artifact { table, results, checks })
}

pub fn caricature(args: &CaricatureArgs) -> Result<Artifact> {
    let (n, a, b) = (args.n, args.a, args.b);
    let kind = match args.kind {
        CaricatureArg::Thin => CaricatureKind::ThinAnnulus { n, a, b },
        CaricatureArg::NonThin if n == 2 => CaricatureKind::NonThinAnnulusN2 { a, b },
        CaricatureArg::NonThin => CaricatureKind::NonThinAnnulusN3plus { n, a, b },
        CaricatureArg::Cosine => CaricatureKind::ThinAnnularProduct {
            n,
            a,
            b,
            base: BaseDomain::FullSphere { n },
            profile: ThinProfile::Cosine,
            weight: RadialWeight::Local,
        },
    };
    let car = CaricatureFn::new(kind)?;
    let samples = annulus_profile_samples(n, a, b, args.grid)?;
    let comp = comparability_audit(&samples, &car, args.margin)?;
    let mut table = Table::new(&["r", "phi", "caricature", "ratio"]).with_plot("r", "ratio", "lin-lin");
    for s in samples.iter().filter(|s| s.depth >= args.margin) {
        let c = car.eval(&s.point)?;
        table.push(vec![s.point[0].into(), s.value.into(), c.into(), (s.value / c).into()]);
    }
    let spread = comp.spread();
    let mut checks = vec![Check::bound("comparability spread", Some(5), spread, spread <= 10.0, "<= 10")];
    if args.kind == CaricatureArg::Cosine && n == 3 {
        let dev = (comp.sup_ratio - 1.0).abs().max((comp.inf_ratio - 1.0).abs());
        checks.push(Check::bound("cosine form identity", Some(5), dev, dev <= 1e-3, "|ratio - 1| <= 1e-3"));
    }
    Ok(Artifact { table, results: to_value(&comp)?, checks })
}

pub fn hadamard(args: &HadamardArgs) -> Result<Artifact> {
    let rows = hadamard_scan(args.n, &args.t)?;
    let mut table = Table::new(&["t", "phi1", "derivative", "normalized"]).with_plot("t", "normalized", "log-lin");
    let mut checks = Vec::new();
    for r in &rows {
        table.push(vec![r.t.into(), r.phi1.into(), r.derivative.into(), r.normalized.into()]);
        let name = format!("t^3 |Phi1'| at t={}", r.t);
        checks.push(match args.n {
            3 => {
                let err = ((r.normalized - 2.0 * PI * PI) / (2.0 * PI * PI)).abs();
                Check::bound(name, Some(6), r.normalized, err <= 1e-2, "2 pi^2 +- 1%")
            }
            2 => Check::bound(name, Some(6), r.normalized, (10.0..=40.0).contains(&r.normalized), "[10, 40]"),
            _ => Check::report(name, None, r.normalized),
        });
    }
    Ok(Artifact { table, results: to_value(&rows)?, checks })
}

fn audit_table(rep: &AuditReport) -> Table {
    let mut table = Table::new(&["x0", "x1", "r", "statistic", "flag"]).with_plot("r", "statistic", "log-log");
    for row in &rep.rows {
        let x1 = row.center.get(1).copied();
        let flag = row.flag.as_deref().unwrap_or("");
        table.push(vec![row.center[0].into(), x1.into(), row.r.into(), row.statistic.into(), flag.into()]);
    }
    table
}

fn audit_results(rep: &AuditReport) -> Result<Value> {
    Ok(json!({ "summary": to_value(&rep.summary)?, "audit_config": to_value(&rep.config)? }))
}

pub fn vd_audit(args: &VdArgs) -> Result<Artifact> {
    if !(args.eps > 0.0) {
        return invalid(format!("eps must be positive, got {}", args.eps));
    }
    let grid = match args.domain {
        MetricArg::Annulus => {
            let spec = thin_annulus(args.a, args.eps)?;
            let w = weight_for(&spec, args.weight)?;
            let n2 = args.n2.unwrap_or_else(|| angular_cells(64.0, args.a, args.eps));
            QuadGrid::new(MetricDomain::annular(spec)?, &w, args.n1.unwrap_or(64), n2)?
        }
        MetricArg::Interval => {
            let w = match args.weight {
                WeightArg::Phi2 => WeightFunction::interval_dirichlet(args.length),
                WeightArg::Uniform => WeightFunction::uniform(args.length),
            };
            QuadGrid::new(MetricDomain::Interval { lo: 0.0, hi: args.length }, &w, args.n1.unwrap_or(4000), 1)?
        }
    };
    let radii = ladder_radii(args.eps, grid.domain.diameter());
    let rep = doubling_profile(&grid, &standard_centers(&grid.domain), &radii)?;
    let d = rep.summary.max;
    let checks = vec![Check::bound("doubling constant", Some(8), d, d < 64.0, "< 64")];
    Ok(Artifact { table: audit_table(&rep), results: audit_results(&rep)?, checks })
}

pub fn pi_audit(args: &PiArgs) -> Result<Artifact> {
    let spec = thin_annulus(args.a, args.eps)?;
    let w = weight_for(&spec, args.weight)?;
    let domain = MetricDomain::annular(spec)?;
    let centers = standard_centers(&domain);
    let (rep, name) = match args.mode {
        PiModeArg::Continuous => {
            let radii: Vec<f64> = ladder_radii(args.eps, domain.diameter()).into_iter().filter(|&r| r >= 0.5 * args.eps).collect();
            (poincare_profile(&domain, &w, &centers, &radii, PoincareMode::ContinuousGrid)?, "Poincare window")
        }
        PiModeArg::Discrete => {
            let radii: Vec<f64> = (0..)
                .map(|k| 2.0 * args.eps * f64::from(1u32 << k))
                .take_while(|&r| r <= domain.diameter())
                .collect();
            let mode = PoincareMode::DiscreteNet { epsilon: args.eps, grid: (12, angular_cells(12.0, args.a, args.eps)) };
            (poincare_profile(&domain, &w, &centers, &radii, mode)?, "discrete Poincare window")
        }
    };
    let spread = rep.summary.spread;
    let checks = vec![Check::bound(name, Some(9), spread, spread <= 10.0, "max/min <= 10")];
    Ok(Artifact { table: audit_table(&rep), results: audit_results(&rep)?, checks })
}

pub fn heat_kernel(args: &HeatKernelArgs) -> Result<Artifact> {
    let (spectrum, samples, defaults) = match args.domain {
        KernelDomainArg::Box => {
            (box_spectrum(&args.half_widths, args.cut)?, box_samples(&args.half_widths, args.per_dim), (0.05, 4.0, 24))
        }
        KernelDomainArg::Annulus => {
            let spec = thin_annulus(1.0, args.eps)?;
            let t0 = args.t0.unwrap_or(0.5);
            (annulus_heat_spectrum(&spec, t0)?, annulus_samples(&spec), (0.5, 30.0, 20))
        }
    };
    let times = log_times(args.t0.unwrap_or(defaults.0), args.t1.unwrap_or(defaults.1), args.count.unwrap_or(defaults.2));
    let rep = equilibration_audit(&spectrum, &samples, &times)?;
    let mut table = Table::new(&["t", "sup_deviation"]).with_plot("t", "sup_deviation", "lin-log");
    for r in &rep.rows {
        table.push(vec![r.t.into(), r.sup_deviation.into()]);
    }
    let checks = vec![
        Check::bound("decay rate vs spectral gap", Some(12), rep.rate_rel_error, rep.rate_rel_error <= 0.05, "relative error <= 5%"),
        Check::report("fitted rate", None, rep.fitted_rate),
    ];
    Ok(Artifact { table, results: to_value(&rep)?, checks })
}

pub fn box_kernel(args: &BoxKernelArgs) -> Result<Artifact> {
    let rep = box_kernel_bounds_check(&args.half_widths, &log_times(args.t0, args.t1, args.count), args.per_dim)?;
    let mut table = Table::new(&[
        "t",
        "max_ratio",
        "min_ratio",
        "upper_envelope",
        "lower_envelope",
        "sup_deviation",
        "deviation_envelope",
    ])
    .with_plot("t", "sup_deviation", "log-log");
    for r in &rep.rows {
        table.push(vec![
            r.t.into(),
            r.max_ratio.into(),
            r.min_ratio.into(),
            r.upper_envelope.into(),
            r.lower_envelope.into(),
            r.sup_deviation.into(),
            r.deviation_envelope.into(),
        ]);
    }
    let mut checks = vec![Check::report("upper envelope constant", None, rep.c_upper)];
    match rep.c_deviation {
        Some(c) => checks.push(Check::bound("deviation envelope constant", Some(12), c, c <= 10.0, "<= 10 for t >= a^2")),
        None => checks.push(Check::report("deviation envelope constant (no t >= a^2)", Some(12), f64::NAN)),
    }
    if let Some(c) = rep.c_lower {
        checks.push(Check::report("lower envelope constant", None, c));
    }
    Ok(Artifact { table, results: to_value(&rep)?, checks })
}

pub fn hke_fit(args: &HkeArgs) -> Result<Artifact> {
    let spec = thin_annulus(1.0, args.eps)?;
    let times = log_times(args.t0.unwrap_or(args.eps * args.eps), args.t1.unwrap_or(PI * PI), args.count);
    let n2 = args.n2.unwrap_or_else(|| angular_cells(64.0, 1.0, args.eps));
    let fit = gaussian_hke_audit(&spec, &times, (args.n1, n2))?;
    let mut table = Table::new(&["t", "x0", "x1", "y0", "y1", "sigma", "u", "p_tilde", "v_x", "v_y", "r"]).with_plot("u", "r", "lin-log");
    for r in &fit.rows {
        table.push(vec![
            r.t.into(),
            r.x[0].into(),
            r.x[1].into(),
            r.y[0].into(),
            r.y[1].into(),
            r.sigma.into(),
            r.u.into(),
            r.p_tilde.into(),
            r.v_x.into(),
            r.v_y.into(),
            r.r.into(),
        ]);
    }
    let mut checks = Vec::new();
    for (name, c) in [("c_lo", fit.c_lo), ("c_hi", fit.c_hi), ("c2", fit.c2), ("c4", fit.c4)] {
        let ok = c.is_finite() && c > 0.0 && fit.degenerate.is_none();
        checks.push(Check::bound(name, Some(13), c, ok, "finite, positive"));
    }
    let results = json!({
        "c_lo": fit.c_lo,
        "c_hi": fit.c_hi,
        "c2": fit.c2,
        "c4": fit.c4,
        "degenerate": fit.degenerate,
        "pairs": fit.rows.len(),
    });
    Ok(Artifact { table, results, checks })
}

pub fn sector(args: &SectorArgs) -> Result<Artifact> {
    let audit = sector_counterexample(&args.beta)?;
    let mut table = Table::new(&[
        "beta",
        "nu",
        "alpha",
        "log_v_full",
        "log_v_half",
        "log_pred_full",
        "log_pred_half",
        "log_pred_alt",
        "ratio",
        "predicted_ratio",
        "refinement_change",
    ])
    .with_plot("beta", "ratio", "log-log");
    let mut checks = Vec::new();
    for r in &audit.rows {
        table.push(vec![
            r.beta.into(),
            r.nu.into(),
            r.alpha.into(),
            r.log_v_full.into(),
            r.log_v_half.into(),
            r.log_pred_full.into(),
            r.log_pred_half.into(),
            r.log_pred_alt.into(),
            r.ratio.into(),
            r.predicted_ratio.into(),
            r.refinement_change.into(),
        ]);
        let q = r.ratio / r.predicted_ratio;
        checks.push(Check::bound(format!("doubling ratio / prediction at beta={}", r.beta), Some(10), q, q >= 0.5, ">= 0.5"));
        let err = ((r.log_v_full - r.log_pred_full) / r.log_pred_full).abs();
        checks.push(if (r.beta - 0.125).abs() < 1e-12 {
            Check::bound("log V relative error at beta=1/8", Some(10), err, err <= 0.25, "<= 25%")
        } else {
            Check::report(format!("log V relative error at beta={}", r.beta), None, err)
        });
    }
    let mut by_beta: Vec<_> = audit.rows.iter().collect();
    by_beta.sort_by(|x, y| y.beta.total_cmp(&x.beta));
    let increasing = by_beta.windows(2).all(|w| w[1].ratio > w[0].ratio);
    if by_beta.len() > 1 {
        checks.push(Check::bound("ratio increases as beta decreases", Some(10), f64::NAN, increasing, "strict"));
    }
    Ok(Artifact { table, results: to_value(&audit)?, checks })
}

fn perturbation_artifact(rep: &PerturbationReport, identity: bool) -> Result<Artifact> {
    let mut table = Table::new(&[
        "lambda_outer",
        "lambda_sandwiched",
        "lambda_inner",
        "upper_ratio",
        "lower_ratio",
        "core_spread",
        "constant",
        "nodes",
    ]);
    table.push(vec![
        rep.lambda_outer.into(),
        rep.lambda_sandwiched.into(),
        rep.lambda_inner.into(),
        rep.upper_ratio.into(),
        rep.lower_ratio.into(),
        rep.core_spread.into(),
        rep.constant().into(),
        rep.nodes.into(),
    ]);
    let mut checks = vec![Check::bound("eigenvalue ordering", Some(14), rep.lambda_sandwiched, rep.ordering_holds, "lambda(B) <= lambda(U) <= lambda(A)")];
    if identity {
        let dev = (rep.upper_ratio - 1.0).abs().max((rep.lower_ratio - 1.0).abs());
        checks.push(Check::bound("identity ratios", Some(14), dev, dev <= 2e-2, "|ratio - 1| <= 2e-2"));
    } else {
        let c = rep.constant();
        checks.push(Check::bound("sandwich constant", Some(14), c, c.is_finite() && c <= 10.0, "<= 10"));
    }
    Ok(Artifact { table, results: to_value(rep)?, checks })
}

fn load_scenario(path: &std::path::Path) -> Result<ScenarioFile> {
    ScenarioFile::load(path)
}

fn is_identity_box(sc: &BoxScenario) -> bool {
    sc.inner == sc.outer
}

fn is_identity_annulus(sc: &AnnulusScenario) -> bool {
    sc.a_eps == 0.0 && sc.b_eps == 0.0 && sc.eta == 0.0
}

pub fn perturb_box(args: &PerturbBoxArgs) -> Result<Artifact> {
    let (sc, h) = match &args.scenario {
        Some(path) => {
            let file = load_scenario(path)?;
            match file.scenario {
                PerturbationScenario::Box(b) => {
                    let h = file.h.ok_or_else(|| Error::Validation("box scenarios need a mesh width h".into()))?;
                    (b, h)
                }
                PerturbationScenario::Annulus(_) => return invalid("perturb-box needs a box scenario"),
            }
        }
        None => {
            let pair = |v: &[f64], what: &str| -> Result<[f64; 2]> {
                match v {
                    [x, y] => Ok([*x, *y]),
                    _ => invalid(format!("--{what} needs two half-widths")),
                }
            };
            let sandwiched = match args.sandwich {
                SandwichArg::Inner => SandwichedBox::Inner,
                SandwichArg::Outer => SandwichedBox::Outer,
                SandwichArg::Notched => SandwichedBox::Notched { fraction: args.fraction },
            };
            let sc = BoxScenario { inner: pair(&args.inner, "inner")?, outer: pair(&args.outer, "outer")?, sandwiched, c1: args.c1, c2: args.c2 };
            (sc, args.h)
        }
    };
    let rep = box_perturbation_audit(&sc, h)?;
    perturbation_artifact(&rep, is_identity_box(&sc))
}

pub fn perturb_annulus(args: &PerturbAnnulusArgs) -> Result<Artifact> {
    let (sc, nr, nt) = match &args.scenario {
        Some(path) => {
            let file = load_scenario(path)?;
            match file.scenario {
                PerturbationScenario::Annulus(a) => {
                    let (nr, nt) = file.grid.ok_or_else(|| Error::Validation("annulus scenarios need grid = [Nr, Ntheta]".into()))?;
                    (a, nr, nt)
                }
                PerturbationScenario::Box(_) => return invalid("perturb-annulus needs an annulus scenario"),
            }
        }
        None => {
            let sc = match args.preset {
                PresetArg::Identity => AnnulusScenario::identity(args.eps, AnnulusBase::Full),
                PresetArg::Bumpy => AnnulusScenario::bumpy(args.eps),
                PresetArg::Arc => AnnulusScenario::arc_example(args.eps, args.eta),
            };
            (sc, args.nr, args.ntheta)
        }
    };
    let rep = annulus_perturbation_audit(&sc, nr, nt)?;
    let mut artifact = perturbation_artifact(&rep, is_identity_annulus(&sc))?;
    if args.sweep {
        let rows = epsilon_power_sweep(&args.sweep_eps, &args.sweep_powers, 48, args.ntheta)?;
        for r in &rows {
            let c = r.upper_ratio.max(1.0 / r.lower_ratio).max(r.core_spread);
            artifact.checks.push(Check::report(format!("eps^p sweep constant at eps={}, p={}", r.eps, r.p), None, c));
        }
        if let Value::Object(map) = &mut artifact.results {
            map.insert("sweep".into(), to_value(&rows)?);
        }
    }
    Ok(artifact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_full_shell_matches_closed_form() {
        let args = SolveArgs { n: 3, a: 1.0, b: 2.0, base: BaseArg::Full, theta1: PI, k: 1, grid: 4096, modes: 2 };
        let art = solve(&args).unwrap();
        let lambda = art.results["lambda"].as_f64().unwrap();
        assert!((lambda - PI * PI).abs() < 1e-7 * PI * PI);
        assert_eq!(art.table.rows.len(), 2);
        assert!(art.checks.iter().all(|c| c.status == crate::output::Status::Pass));
    }

    #[test]
    fn arc_base_uses_decomposition_check() {
        let args = SolveArgs { n: 2, a: 1.0, b: 2.0, base: BaseArg::Arc, theta1: PI, k: 1, grid: 1024, modes: 1 };
        let art = solve(&args).unwrap();
        assert_eq!(art.checks[0].criterion, Some(3));
        assert!((art.results["lambda0"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bad_pairs_are_validation_errors() {
        let args = PerturbBoxArgs {
            scenario: None,
            inner: vec![1.0],
            outer: vec![1.0, 1.0],
            sandwich: SandwichArg::Outer,
            fraction: 1.0,
            c1: 0.0,
            c2: 1.0,
            h: 0.1,
        };
        assert!(matches!(perturb_box(&args), Err(e) if e.is_validation()));
    }
}
