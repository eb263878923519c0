//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use super::{normalize_sign, EigenPair};
use crate::error::{invalid, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.len() < 2 {
            return invalid(format!("tridiagonal operator needs N ≥ 2, got {}", diag.len()));
        }
        if offdiag.len() + 1 != diag.len() {
            return invalid(format!(
                "off-diagonal length {} does not match N−1 = {}",
                offdiag.len(),
                diag.len() - 1
            ));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return invalid("tridiagonal entries must be finite");
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.offdiag[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn pivmin(&self) -> f64 {
        let emax = self.offdiag.iter().fold(0.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE.max(emax * f64::MIN_POSITIVE * 1e10)
    }

    /// The `j`-th smallest eigenvalue (0-based) by bisection.
    fn bisect_eigenvalue(&self, j: usize) -> f64 {
        let (gl, gu) = self.gershgorin();
        let span = (gu - gl).max(f64::MIN_POSITIVE);
        let mut lo = gl - 1e-14 * span - f64::MIN_POSITIVE;
        let mut hi = gu + 1e-14 * span + f64::MIN_POSITIVE;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `(T − shift·I) x = b` by Gaussian elimination with partial pivoting.
    /// Near-zero pivots are replaced by a tiny multiple of ‖T‖ so the solve is
    /// usable for inverse iteration at an eigenvalue.
    fn solve_shifted(&self, shift: f64, b: &mut [f64]) {
        let n = self.dim();
        let (gl, gu) = self.gershgorin();
        let tiny = f64::EPSILON * gl.abs().max(gu.abs()).max(f64::MIN_POSITIVE);
        let mut dd: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut dl = self.offdiag.clone();
        let mut du = self.offdiag.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i].abs() < tiny {
                    dd[i] = tiny;
                }
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if dd[n - 1].abs() < tiny {
            dd[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= dd[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
        }
    }
}

/// The `k` smallest eigenvalues in increasing order, without eigenvectors.
pub fn tridiag_smallest_eigenvalues(op: &TridiagonalOperator, k: usize) -> Result<Vec<f64>> {
    check_count(op, k)?;
    Ok((0..k).map(|j| op.bisect_eigenvalue(j)).collect())
}

/// The `k` smallest eigenpairs of a symmetric tridiagonal matrix.
///
/// Eigenvalues come from Sturm bisection, eigenvectors from inverse
/// iteration with reorthogonalization against the previously computed
/// vectors (which takes care of clustered and repeated eigenvalues).
/// Vectors have unit Euclidean norm and their largest-magnitude component
/// is positive.
pub fn tridiag_smallest_eigenpairs(op: &TridiagonalOperator, k: usize) -> Result<Vec<EigenPair>> {
    let values = tridiag_smallest_eigenvalues(op, k)?;
    let n = op.dim();
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(k);
    for (j, &lambda) in values.iter().enumerate() {
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * (((i * 7919 + j * 104729) % 997) as f64 / 997.0))
            .collect();
        for _ in 0..4 {
            orthogonalize_against(&mut x, &pairs);
            normalize(&mut x);
            op.solve_shifted(lambda, &mut x);
            orthogonalize_against(&mut x, &pairs);
            normalize(&mut x);
        }
        normalize_sign(&mut x);
        pairs.push(EigenPair { value: lambda, vector: x });
    }
    Ok(pairs)
}

fn check_count(op: &TridiagonalOperator, k: usize) -> Result<()> {
    if k == 0 || k > op.dim() {
        return invalid(format!("requested {k} eigenpairs of a {}×{} matrix", op.dim(), op.dim()));
    }
    Ok(())
}

fn orthogonalize_against(x: &mut [f64], pairs: &[EigenPair]) {
    for p in pairs {
        let c: f64 = x.iter().zip(&p.vector).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(&p.vector) {
            *xi -= c * vi;
        }
    }
}

fn normalize(x: &mut [f64]) {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm > 0.0 && nrm.is_finite() {
        x.iter_mut().for_each(|v| *v /= nrm);
    } else {
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale.is_finite() && scale > 0.0 {
            x.iter_mut().for_each(|v| *v /= scale);
            normalize(x);
        }
    }
}
