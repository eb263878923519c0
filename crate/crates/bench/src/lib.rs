//! Fixtures shared by the benchmark targets.

use annspec::perturb::{BoxScenario, SandwichedBox};
use annspec::{AnnularDomainSpec, BaseDomain};

/// `(1, 1+ε) × S¹`.
pub fn thin_annulus(eps: f64) -> AnnularDomainSpec {
    AnnularDomainSpec::new(2, 1.0, 1.0 + eps, BaseDomain::FullSphere { n: 2 }).expect("valid annulus")
}

/// `(−1,1)²` inside `(−1.05,1.05)²` with corner notches.
pub fn notched_box() -> BoxScenario {
    BoxScenario {
        inner: [1.0, 1.0],
        outer: [1.05, 1.05],
        sandwiched: SandwichedBox::Notched { fraction: 1.0 },
        c1: 0.1025,
        c2: 1.05,
    }
}
