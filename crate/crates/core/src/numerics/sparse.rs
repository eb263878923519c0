//! Sparse symmetric operators and a shift-invert subspace eigensolver.
//!
//! The eigensolver runs block inverse iteration on `(A − σI)⁻¹` with a
//! Rayleigh–Ritz projection against `A` after every sweep. The inner solves
//! are pluggable: Jacobi-preconditioned conjugate gradients work for any
//! operator, while a banded Cholesky factorization is much faster for the
//! grid Laplacians whose bandwidth is known.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tridiag::TridiagonalOperator;
use super::{dot, normalize_sign, EigenPair};
use crate::error::{invalid, Error, Result};

/// A real symmetric linear map given by its action on vectors.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` has length `dim()` and is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Diagonal entries if cheaply available (used for Jacobi preconditioning).
    fn diagonal(&self) -> Option<Vec<f64>> {
        None
    }
}

impl SymmetricOperator for TridiagonalOperator {
    fn dim(&self) -> usize {
        TridiagonalOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        TridiagonalOperator::apply(self, x, y)
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some(self.diag().to_vec())
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble an `n×n` matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return invalid(format!("triplet ({i},{j}) outside a {n}×{n} matrix"));
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let t = self.row(j).find(|(c, _)| *c == i).map(|(_, w)| w).unwrap_or(0.0);
                worst = worst.max((v - t).abs() / scale);
            }
        }
        worst
    }
}

impl SymmetricOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some(
            (0..self.n)
                .map(|i| self.row(i).find(|(j, _)| *j == i).map(|(_, v)| v).unwrap_or(0.0))
                .collect(),
        )
    }
}

/// Kronecker sum `A ⊗ I + I ⊗ B` of two operators, acting on `dim(A)·dim(B)` vectors
/// laid out with the `B` index fastest.
pub struct KroneckerSum<'a> {
    pub a: &'a dyn SymmetricOperator,
    pub b: &'a dyn SymmetricOperator,
}

impl SymmetricOperator for KroneckerSum<'_> {
    fn dim(&self) -> usize {
        self.a.dim() * self.b.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (na, nb) = (self.a.dim(), self.b.dim());
        let mut tmp_in = vec![0.0; na.max(nb)];
        let mut tmp_out = vec![0.0; na.max(nb)];
        for i in 0..na {
            self.b.apply(&x[i * nb..(i + 1) * nb], &mut y[i * nb..(i + 1) * nb]);
        }
        for j in 0..nb {
            for i in 0..na {
                tmp_in[i] = x[i * nb + j];
            }
            self.a.apply(&tmp_in[..na], &mut tmp_out[..na]);
            for i in 0..na {
                y[i * nb + j] += tmp_out[i];
            }
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        let da = self.a.diagonal()?;
        let db = self.b.diagonal()?;
        Some(da.iter().flat_map(|x| db.iter().map(move |y| x + y)).collect())
    }
}

/// Worst relative self-adjointness defect `|⟨Av,w⟩−⟨v,Aw⟩| / (‖A‖‖v‖‖w‖)` over random probes,
/// with `‖A‖` estimated by a few power-iteration steps.
pub fn self_adjointness_defect(op: &dyn SymmetricOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let mut v = rand_vec(&mut rng);
    let mut av = vec![0.0; n];
    let mut norm_est = 0.0f64;
    for _ in 0..20 {
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        op.apply(&v, &mut av);
        norm_est = dot(&av, &av).sqrt();
        std::mem::swap(&mut v, &mut av);
    }
    let mut worst = 0.0f64;
    let mut aw = vec![0.0; n];
    for _ in 0..probes {
        let v = rand_vec(&mut rng);
        let w = rand_vec(&mut rng);
        op.apply(&v, &mut av);
        op.apply(&w, &mut aw);
        let defect = (dot(&av, &w) - dot(&v, &aw)).abs();
        let scale = norm_est * dot(&v, &v).sqrt() * dot(&w, &w).sqrt();
        worst = worst.max(defect / scale.max(f64::MIN_POSITIVE));
    }
    worst
}

/// Solver for `(A − σI) x = b` with `σ` fixed at construction.
pub trait ShiftedSolver {
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()>;
}

/// Jacobi-preconditioned conjugate gradients on `A − σI`.
pub struct ConjugateGradient<'a> {
    op: &'a dyn SymmetricOperator,
    shift: f64,
    inv_diag: Vec<f64>,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl<'a> ConjugateGradient<'a> {
    pub fn new(op: &'a dyn SymmetricOperator, shift: f64) -> Self {
        let n = op.dim();
        let inv_diag = match op.diagonal() {
            Some(d) => d
                .iter()
                .map(|v| {
                    let s = v - shift;
                    if s > 0.0 { 1.0 / s } else { 1.0 }
                })
                .collect(),
            None => vec![1.0; n],
        };
        Self { op, shift, inv_diag, rel_tol: 1e-10, max_iter: 20 * n.max(1) }
    }
}

impl ShiftedSolver for ConjugateGradient<'_> {
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        let n = b.len();
        x.iter_mut().for_each(|v| *v = 0.0);
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return Ok(());
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut rnorm = bnorm;
        for _ in 0..self.max_iter {
            self.op.apply(&p, &mut ap);
            for (api, pi) in ap.iter_mut().zip(&p) {
                *api -= self.shift * pi;
            }
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::Numerical(format!(
                    "conjugate gradients met a non-positive curvature {pap:.3e}; the shift is not below the spectrum"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= self.rel_tol * bnorm {
                return Ok(());
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NoConvergence {
            what: "conjugate gradients",
            iterations: self.max_iter,
            residual: rnorm / bnorm,
        })
    }
}

/// Cholesky factor of a banded SPD matrix `A − σI`, stored row-wise in the lower band.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(matrix: &CsrMatrix, shift: f64) -> Result<Self> {
        let n = matrix.dim();
        let bw = matrix.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                if j <= i {
                    l[i * w + (j + bw - i)] += v;
                }
            }
            l[i * w + bw] -= shift;
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                // Both rows i and j store columns max(lo, j−bw)..j contiguously.
                let k0 = lo.max(j.saturating_sub(bw));
                let len = j - k0;
                let ri = i * w + (k0 + bw - i);
                let rj = j * w + (k0 + bw - j);
                let s: f64 = l[ri..ri + len].iter().zip(&l[rj..rj + len]).map(|(a, b)| a * b).sum();
                let idx = i * w + (j + bw - i);
                let v = l[idx] - s;
                if i == j {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(Error::Numerical(format!(
                            "banded Cholesky: matrix minus shift {shift} is not positive definite (pivot {v:.3e} at row {i})"
                        )));
                    }
                    l[idx] = v.sqrt();
                } else {
                    l[idx] = v / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }
}

impl ShiftedSolver for BandedCholesky {
    fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        x.copy_from_slice(b);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            let s: f64 = row.iter().zip(&x[lo..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= self.l[i * w + bw];
            let xi = x[i];
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            for (xj, lij) in x[lo..i].iter_mut().zip(row) {
                *xj -= lij * xi;
            }
        }
        Ok(())
    }
}

/// Knobs of the subspace eigensolver.
#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual target `‖Av − λv‖ ≤ tol·max(|λ|, |σ|)`.
    pub tol: f64,
    /// Outer iteration cap.
    pub max_iter: usize,
    /// Extra block vectors beyond the requested count.
    pub guard_vectors: usize,
    /// Seed of the starting block.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 400, guard_vectors: 6, seed: 0x5eed }
    }
}

/// The `k` smallest eigenpairs of `op`, assumed to have its spectrum above `shift`,
/// using conjugate-gradient inner solves.
pub fn sparse_smallest_eigenpairs(op: &dyn SymmetricOperator, k: usize, shift: f64) -> Result<Vec<EigenPair>> {
    let cg = ConjugateGradient::new(op, shift);
    sparse_smallest_eigenpairs_with(op, k, shift, &cg, &EigenOptions::default())
}

/// Same as [`sparse_smallest_eigenpairs`] but with a banded Cholesky factorization
/// of the assembled matrix for the inner solves.
pub fn csr_smallest_eigenpairs(matrix: &CsrMatrix, k: usize, shift: f64) -> Result<Vec<EigenPair>> {
    let chol = BandedCholesky::factor(matrix, shift)?;
    sparse_smallest_eigenpairs_with(matrix, k, shift, &chol, &EigenOptions::default())
}

/// Shift-invert subspace iteration with Rayleigh–Ritz against `op`.
pub fn sparse_smallest_eigenpairs_with(
    op: &dyn SymmetricOperator,
    k: usize,
    shift: f64,
    solver: &dyn ShiftedSolver,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if k == 0 || k > n {
        return invalid(format!("requested {k} eigenpairs of a dimension-{n} operator"));
    }
    let p = (k + opts.guard_vectors.max(k)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut block, &mut rng);

    let mut last_residual = f64::INFINITY;
    let mut y = vec![0.0; n];
    for _ in 0..opts.max_iter {
        let mut next = Vec::with_capacity(p);
        for v in &block {
            solver.solve(v, &mut y)?;
            next.push(y.clone());
        }
        block = next;
        orthonormalize(&mut block, &mut rng);

        let images: Vec<Vec<f64>> = block
            .iter()
            .map(|v| {
                let mut av = vec![0.0; n];
                op.apply(v, &mut av);
                av
            })
            .collect();
        let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&block[i], &images[j]) + dot(&block[j], &images[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut ritz = Vec::with_capacity(p);
        let mut converged = true;
        last_residual = 0.0;
        for (rank, &c) in order.iter().enumerate() {
            let theta = eig.eigenvalues[c];
            let mut u = vec![0.0; n];
            let mut au = vec![0.0; n];
            for j in 0..p {
                let s = eig.eigenvectors[(j, c)];
                for i in 0..n {
                    u[i] += s * block[j][i];
                    au[i] += s * images[j][i];
                }
            }
            if rank < k {
                let res = au.iter().zip(&u).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
                let scale = theta.abs().max(shift.abs()).max(f64::MIN_POSITIVE);
                last_residual = last_residual.max(res / scale);
                if res > opts.tol * scale {
                    converged = false;
                }
            }
            ritz.push((theta, u));
        }
        if converged {
            return Ok(ritz
                .into_iter()
                .take(k)
                .map(|(value, mut vector)| {
                    normalize_sign(&mut vector);
                    EigenPair { value, vector }
                })
                .collect());
        }
        block = ritz.into_iter().map(|(_, u)| u).collect();
    }
    Err(Error::NoConvergence {
        what: "shift-invert subspace iteration",
        iterations: opts.max_iter,
        residual: last_residual,
    })
}

/// Modified Gram–Schmidt, applied twice; columns that collapse are replaced by
/// fresh random vectors.
fn orthonormalize(block: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..block.len() {
        for attempt in 0..3 {
            let orig = dot(&block[j], &block[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let (head, tail) = block.split_at_mut(j);
                    let c = dot(&tail[0], &head[i]);
                    for (a, b) in tail[0].iter_mut().zip(&head[i]) {
                        *a -= c * b;
                    }
                }
            }
            let nrm = dot(&block[j], &block[j]).sqrt();
            if nrm > 1e-10 * orig && nrm.is_finite() && nrm > 0.0 {
                block[j].iter_mut().for_each(|v| *v /= nrm);
                break;
            }
            if attempt < 2 {
                for v in block[j].iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::tridiag::tridiag_smallest_eigenpairs;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn laplacian_1d(m: usize, len: f64) -> TridiagonalOperator {
        let h = len / (m + 1) as f64;
        TridiagonalOperator::new(vec![2.0 / (h * h); m], vec![-1.0 / (h * h); m - 1]).unwrap()
    }

    fn laplacian_2d(m: usize) -> CsrMatrix {
        let h = 1.0 / (m + 1) as f64;
        let idx = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0 / (h * h)));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0 / (h * h)));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0 / (h * h)));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -1.0 / (h * h)));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0 / (h * h)));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, t).unwrap()
    }

    #[test]
    fn wrapped_tridiagonal_matches_tridiagonal_solver() {
        let op = laplacian_1d(120, 1.0);
        let direct = tridiag_smallest_eigenpairs(&op, 3).unwrap();
        let sparse = sparse_smallest_eigenpairs(&op, 3, 0.0).unwrap();
        for (d, s) in direct.iter().zip(&sparse) {
            assert_relative_eq!(d.value, s.value, max_relative = 1e-10);
            let dot: f64 = d.vector.iter().zip(&s.vector).map(|(a, b)| a * b).sum();
            assert_relative_eq!(dot.abs(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn unit_square_cg_and_banded_agree() {
        let a = laplacian_2d(63);
        let closed = 2.0 * 64.0f64.powi(2) * 4.0 * (PI / 128.0).sin().powi(2);
        let cg = sparse_smallest_eigenpairs(&a, 1, 0.0).unwrap();
        let chol = csr_smallest_eigenpairs(&a, 1, 0.0).unwrap();
        assert_relative_eq!(cg[0].value, closed, max_relative = 1e-10);
        assert_relative_eq!(chol[0].value, closed, max_relative = 1e-10);
        // O(h²) distance from the continuum value 2π².
        let rel = (cg[0].value - 2.0 * PI * PI) / (2.0 * PI * PI);
        assert!(rel < 0.0 && rel.abs() < 1e-3);
    }

    #[test]
    fn kronecker_sum_adds_smallest_eigenvalues() {
        let a = laplacian_1d(30, 1.0);
        let b = laplacian_1d(17, 0.5);
        let ks = KroneckerSum { a: &a, b: &b };
        let l = sparse_smallest_eigenpairs(&ks, 1, 0.0).unwrap()[0].value;
        let la = tridiag_smallest_eigenpairs(&a, 1).unwrap()[0].value;
        let lb = tridiag_smallest_eigenpairs(&b, 1).unwrap()[0].value;
        assert_relative_eq!(l, la + lb, max_relative = 1e-9);
    }

    #[test]
    fn residuals_meet_target() {
        let a = laplacian_2d(20);
        let pairs = csr_smallest_eigenpairs(&a, 4, 0.0).unwrap();
        let mut y = vec![0.0; a.dim()];
        for p in &pairs {
            a.apply(&p.vector, &mut y);
            let r: f64 = y.iter().zip(&p.vector).map(|(u, v)| (u - p.value * v).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-8 * p.value);
        }
        // λ₂ = λ₃ on the square: degenerate pair must both be found.
        assert_relative_eq!(pairs[1].value, pairs[2].value, max_relative = 1e-9);
    }

    #[test]
    fn self_adjointness_probe() {
        let a = laplacian_2d(10);
        assert!(self_adjointness_defect(&a, 5, 1) <= 1e-10);
        assert!(a.asymmetry() == 0.0);
        assert_eq!(a.bandwidth(), 10);
    }

    #[test]
    fn cholesky_rejects_indefinite_shift() {
        let a = laplacian_2d(5);
        assert!(BandedCholesky::factor(&a, 1e6).is_err());
    }
}
