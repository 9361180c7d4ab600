//! Self-contained dense complex linear algebra: operator norms by power
//! iteration, Hermitian spectra by cyclic Jacobi rotations, and simultaneous
//! block diagonalization of *-closed matrix algebras through their commutant.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalars::C64;

/// The default seed for the commutant probe.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Central tolerance record; one knob per analytic comparison.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Relative stopping tolerance of the power iteration.
    pub power_rel: f64,
    pub power_max_iter: usize,
    /// Off-diagonal Frobenius mass target for the Jacobi sweep (relative).
    pub jacobi_off: f64,
    /// Maximal Hermitian deviation accepted by the eigensolver.
    pub hermitian_check: f64,
    /// Kernel threshold for rank decisions (relative).
    pub rank: f64,
    /// Initial eigenvalue clustering width for the commutant probe (relative).
    pub cluster: f64,
    /// Generic comparison tolerance for norm identities.
    pub compare: f64,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            power_rel: 1e-12,
            power_max_iter: 100_000,
            jacobi_off: 1e-12,
            hermitian_check: 1e-12,
            rank: 1e-9,
            cluster: 1e-6,
            compare: 1e-8,
            seed: DEFAULT_SEED,
        }
    }
}

impl Tolerances {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_compare(mut self, tol: f64) -> Self {
        self.compare = tol;
        self
    }
}

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("matrix is not hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("jacobi sweep did not reach the off-diagonal target")]
    JacobiStalled,
    #[error("basis is not closed under adjoints and products (residual {0:.3e})")]
    NotStarClosed(f64),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x += *y;
        }
        out
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x -= *y;
        }
        out
    }

    pub fn scale(&self, z: C64) -> ComplexMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= z;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Column selection: returns self · sel where sel has orthonormal columns.
    pub fn compress(&self, basis: &ComplexMatrix) -> ComplexMatrix {
        basis.adjoint().mul(&self.mul(basis))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value via power iteration on M*M, all-ones start vector.
///
/// The converged Rayleigh quotient is certified against the column-norm lower
/// bound of M*M; when the deterministic start happens to lie in a
/// non-dominant invariant subspace the iteration restarts from the violating
/// basis vector, and the Jacobi eigensolver is the final fallback.
pub fn operator_norm(m: &ComplexMatrix, cfg: &Tolerances) -> Result<f64, MatrixError> {
    if m.rows == 0 || m.cols == 0 {
        return Ok(0.0);
    }
    let a = m.adjoint().mul(m);
    let n = a.rows;
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    // Lower bound: λ_max(A) ≥ max_j ‖A e_j‖ for Hermitian PSD A.
    let mut lb = 0.0f64;
    let mut lb_col = 0usize;
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            s += a[(i, j)].norm_sqr();
        }
        let s = s.sqrt();
        if s > lb {
            lb = s;
            lb_col = j;
        }
    }
    let run = |start: Vec<C64>| -> Result<f64, MatrixError> {
        let mut v = start;
        let nv = norm2(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        let mut prev = f64::NAN;
        let mut stable = 0usize;
        for _ in 0..cfg.power_max_iter {
            let w = a.apply(&v);
            let lam = dot(&v, &w).re;
            let nw = norm2(&w);
            if nw <= f64::MIN_POSITIVE * n as f64 {
                return Ok(0.0);
            }
            v = w;
            for x in v.iter_mut() {
                *x /= nw;
            }
            if prev.is_finite() && (lam - prev).abs() <= cfg.power_rel * lam.abs().max(1e-300) {
                stable += 1;
                if stable >= 3 {
                    return Ok(lam.max(0.0));
                }
            } else {
                stable = 0;
            }
            prev = lam;
        }
        Err(MatrixError::NonConvergence(cfg.power_max_iter))
    };
    let ones = vec![C64::new(1.0, 0.0); n];
    let mut lam = match run(ones) {
        Ok(l) => l,
        Err(e) if n > 256 => return Err(e),
        Err(_) => 0.0,
    };
    if lam < lb * (1.0 - 1e-9) {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[lb_col] = C64::new(1.0, 0.0);
        lam = lam.max(run(e)?);
    }
    // The all-ones vector can be an exact non-dominant eigenvector (circulant
    // matrices are the standard offender), which no cheap lower bound
    // detects. At the sizes this kernel serves, certify with the Jacobi
    // spectrum and keep the larger value.
    if n <= 256 {
        let (evals, _) = hermitian_eig(&a, cfg)?;
        lam = lam.max(evals.last().copied().unwrap_or(0.0).max(0.0));
    }
    Ok(lam.sqrt())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_spectrum(m: &ComplexMatrix, cfg: &Tolerances) -> Result<Vec<f64>, MatrixError> {
    hermitian_eig(m, cfg).map(|(vals, _)| vals)
}

/// Full Hermitian eigendecomposition by cyclic Jacobi rotations; the returned
/// matrix holds orthonormal eigenvectors as columns, ordered with the
/// ascending eigenvalues.
pub fn hermitian_eig(
    m: &ComplexMatrix,
    cfg: &Tolerances,
) -> Result<(Vec<f64>, ComplexMatrix), MatrixError> {
    if m.rows != m.cols {
        return Err(MatrixError::Shape(format!("{}x{}", m.rows, m.cols)));
    }
    let dev = m.hermitian_deviation();
    let fro = m.frobenius_norm();
    if dev > cfg.hermitian_check * fro.max(1.0) {
        return Err(MatrixError::NotHermitian(dev));
    }
    let n = m.rows;
    // Work on the exact Hermitian average to kill representation noise.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let target = cfg.jacobi_off * fro.max(1.0);
    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };
    let mut sweeps = 0usize;
    while off(&a) > target {
        sweeps += 1;
        if sweeps > 60 {
            return Err(MatrixError::JacobiStalled);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= target / (n as f64 * n as f64) {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← J^H A J with J[p][p]=c, J[p][q]=s·phase,
                // J[q][p]=−s·conj(phase), J[q][q]=c.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * phase.conj();
                    a[(k, q)] = akp * s * phase + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * phase;
                    a[(q, k)] = apk * s * phase.conj() + aqk * c;
                }
                // Clean the eliminated entries exactly.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * phase.conj();
                    v[(k, q)] = vkp * s * phase + vkq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((vals, vecs))
}

/// Multiset of irreducible block dimensions of a *-closed matrix algebra,
/// with isomorphic blocks counted once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockProfile {
    pub sizes: Vec<usize>,
}

/// Result of simultaneous block diagonalization.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Orthonormal bases (columns) of all irreducible invariant subspaces.
    pub blocks: Vec<ComplexMatrix>,
    /// Index of an arbitrary representative block per isomorphism class.
    pub class_reps: Vec<usize>,
    /// Isomorphism class of each block.
    pub class_of: Vec<usize>,
    pub profile: BlockProfile,
}

fn vec_of(m: &ComplexMatrix) -> Vec<C64> {
    m.data.clone()
}

/// Orthonormalizes a list of vectors by modified Gram-Schmidt, dropping
/// numerically dependent ones.
fn gram_schmidt(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let orig = norm2(&w).max(1e-300);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b.iter()) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm2(&w);
        if n > tol * orig.max(1.0) {
            for x in w.iter_mut() {
                *x /= n;
            }
            basis.push(w);
        }
    }
    basis
}

fn residual_outside_span(basis: &[Vec<C64>], v: &[C64]) -> f64 {
    let mut w = v.to_vec();
    for b in basis {
        let c = dot(b, &w);
        for (wi, bi) in w.iter_mut().zip(b.iter()) {
            *wi -= c * bi;
        }
    }
    norm2(&w)
}

/// Hermitian PSD operator whose kernel is the commutant of the given family,
/// as an n²×n² matrix acting on vectorized (row-major) matrices.
fn commutant_gram(mats: &[ComplexMatrix]) -> ComplexMatrix {
    let n = mats[0].rows;
    let nn = n * n;
    let mut t = ComplexMatrix::zeros(nn, nn);
    for b in mats {
        // ad(X) = BX − XB; column (r,c) of ad holds vec(B E_rc − E_rc B).
        let mut ad = ComplexMatrix::zeros(nn, nn);
        for r in 0..n {
            for c in 0..n {
                let col = r * n + c;
                for i in 0..n {
                    ad[(i * n + c, col)] += b[(i, r)];
                }
                for j in 0..n {
                    ad[(r * n + j, col)] -= b[(c, j)];
                }
            }
        }
        t = t.add(&ad.adjoint().mul(&ad));
    }
    t
}

/// Orthonormal basis of the commutant of a family of n×n matrices.
pub fn commutant_basis(
    mats: &[ComplexMatrix],
    cfg: &Tolerances,
) -> Result<Vec<ComplexMatrix>, MatrixError> {
    let n = mats[0].rows;
    let t = commutant_gram(mats);
    let (vals, vecs) = hermitian_eig(&t, cfg)?;
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut out = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cfg.rank * top {
            let col: Vec<C64> = (0..n * n).map(|i| vecs[(i, k)]).collect();
            out.push(ComplexMatrix {
                rows: n,
                cols: n,
                data: col,
            });
        }
    }
    Ok(out)
}

fn star_closure_residual(basis: &[ComplexMatrix]) -> f64 {
    let vecs: Vec<Vec<C64>> = basis.iter().map(vec_of).collect();
    let ortho = gram_schmidt(&vecs, 1e-12);
    let mut worst = 0.0f64;
    for b in basis {
        let scale = b.frobenius_norm().max(1.0);
        worst = worst.max(residual_outside_span(&ortho, &vec_of(&b.adjoint())) / scale);
    }
    for a in basis {
        for b in basis {
            let p = a.mul(b);
            let scale = p.frobenius_norm().max(1.0);
            worst = worst.max(residual_outside_span(&ortho, &vec_of(&p)) / scale);
        }
    }
    worst
}

fn split_invariant(
    mats: &[ComplexMatrix],
    space: ComplexMatrix,
    cfg: &Tolerances,
    seed: u64,
    depth: usize,
    out: &mut Vec<ComplexMatrix>,
) -> Result<(), MatrixError> {
    let d = space.cols;
    if d == 0 {
        return Ok(());
    }
    if depth > 64 {
        return Err(MatrixError::JacobiStalled);
    }
    let restricted: Vec<ComplexMatrix> = mats.iter().map(|b| b.compress(&space)).collect();
    let comm = commutant_basis(&restricted, cfg)?;
    if comm.len() <= 1 || d == 1 {
        out.push(space);
        return Ok(());
    }
    // Random Hermitian element of the commutant.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = ComplexMatrix::zeros(d, d);
    for k in &comm {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        h = h.add(&k.scale(z));
    }
    h = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
    let (vals, vecs) = hermitian_eig(&h, cfg)?;
    let spread = (vals.last().unwrap() - vals.first().unwrap()).abs().max(1.0);
    // Cluster eigenvalues, widening the tolerance until every cluster spans an
    // invariant subspace.
    let mut width = cfg.cluster * spread;
    'retry: for _ in 0..8 {
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0usize;
        for i in 1..=vals.len() {
            if i == vals.len() || vals[i] - vals[i - 1] > width {
                groups.push((start, i));
                start = i;
            }
        }
        if groups.len() == 1 {
            // Probe failed to separate anything; try a new seed.
            return split_invariant(
                mats,
                space,
                cfg,
                seed.wrapping_add(0x9E3779B9),
                depth + 1,
                out,
            );
        }
        let mut subspaces = Vec::new();
        for &(lo, hi) in &groups {
            let cols = hi - lo;
            let sub = ComplexMatrix::from_fn(d, cols, |i, j| vecs[(i, lo + j)]);
            // Invariance check against the restricted algebra.
            for c in &restricted {
                let img = c.mul(&sub);
                let proj = sub.mul(&sub.adjoint().mul(&img));
                let res = img.sub(&proj).frobenius_norm();
                if res > 1e-7 * img.frobenius_norm().max(1.0) {
                    width *= 10.0;
                    continue 'retry;
                }
            }
            subspaces.push(sub);
        }
        for (k, sub) in subspaces.into_iter().enumerate() {
            let lifted = space.mul(&sub);
            split_invariant(
                mats,
                lifted,
                cfg,
                seed.wrapping_mul(6364136223846793005)
                    .wrapping_add(k as u64 + depth as u64),
                depth + 1,
                out,
            )?;
        }
        return Ok(());
    }
    Err(MatrixError::JacobiStalled)
}

/// Simultaneous block diagonalization of the *-algebra spanned by `basis`.
///
/// Splits the carrier space into irreducible invariant subspaces by
/// spectral-decomposing seeded Hermitian probes of the commutant, refining
/// until each restricted commutant is scalar, then removes multiplicity by
/// grouping blocks with equal characters.
pub fn block_decompose(
    basis: &[ComplexMatrix],
    cfg: &Tolerances,
) -> Result<BlockDecomposition, MatrixError> {
    assert!(!basis.is_empty());
    let n = basis[0].rows;
    for b in basis {
        if b.rows != n || b.cols != n {
            return Err(MatrixError::Shape("basis matrices must be square".into()));
        }
    }
    let res = star_closure_residual(basis);
    if res > 1e-8 {
        return Err(MatrixError::NotStarClosed(res));
    }
    let mut blocks = Vec::new();
    split_invariant(
        basis,
        ComplexMatrix::identity(n),
        cfg,
        cfg.seed,
        0,
        &mut blocks,
    )?;
    blocks.sort_by_key(|b| b.cols);
    // Characters of the restricted representations classify the blocks.
    let chars: Vec<Vec<C64>> = blocks
        .iter()
        .map(|q| basis.iter().map(|b| b.compress(q).trace()).collect())
        .collect();
    let scale = chars
        .iter()
        .flat_map(|c| c.iter().map(|z| z.norm()))
        .fold(1.0f64, f64::max);
    let mut class_of = vec![usize::MAX; blocks.len()];
    let mut class_reps: Vec<usize> = Vec::new();
    for i in 0..blocks.len() {
        for &r in &class_reps {
            if blocks[r].cols != blocks[i].cols {
                continue;
            }
            let close = chars[r]
                .iter()
                .zip(chars[i].iter())
                .all(|(a, b)| (a - b).norm() <= 1e-6 * scale);
            if close {
                class_of[i] = class_of[r];
                break;
            }
        }
        if class_of[i] == usize::MAX {
            class_of[i] = class_reps.len();
            class_reps.push(i);
        }
    }
    let mut sizes: Vec<usize> = class_reps.iter().map(|&r| blocks[r].cols).collect();
    sizes.sort();
    Ok(BlockDecomposition {
        blocks,
        class_reps,
        class_of,
        profile: BlockProfile { sizes },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cfg() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn operator_norm_examples() {
        let id = ComplexMatrix::identity(3);
        assert!((operator_norm(&id, &cfg()).unwrap() - 1.0).abs() < 1e-9);
        let ones = ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert!((operator_norm(&ones, &cfg()).unwrap() - 2.0).abs() < 1e-9);
        let zero = ComplexMatrix::zeros(4, 4);
        assert_eq!(operator_norm(&zero, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_survives_degenerate_start() {
        // The all-ones vector is annihilated here; the certified restart must
        // still find the true norm 2.
        let m = ComplexMatrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(-1.0, 0.0) });
        assert!((operator_norm(&m, &cfg()).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn spectrum_examples() {
        let d = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                c((i + 1) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let vals = hermitian_spectrum(&d, &cfg()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);

        let ones = ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0));
        let vals = hermitian_spectrum(&ones, &cfg()).unwrap();
        assert!(vals[0].abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);

        let swap = ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let vals = hermitian_spectrum(&swap, &cfg()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 1.0));
        assert!(matches!(
            hermitian_spectrum(&m, &cfg()),
            Err(MatrixError::NotHermitian(_))
        ));
    }

    #[test]
    fn complex_hermitian_eig_reconstructs() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            let base = [
                [c(2.0, 0.0), c(1.0, 1.0), c(0.0, -2.0)],
                [c(1.0, -1.0), c(0.5, 0.0), c(3.0, 0.5)],
                [c(0.0, 2.0), c(3.0, -0.5), c(-1.0, 0.0)],
            ];
            base[i][j]
        });
        let (vals, vecs) = hermitian_eig(&m, &cfg()).unwrap();
        // Trace is conserved.
        let tr: f64 = vals.iter().sum();
        assert!((tr - 1.5).abs() < 1e-10);
        // M·v = λ·v for every column.
        for k in 0..3 {
            let v: Vec<C64> = (0..3).map(|i| vecs[(i, k)]).collect();
            let mv = m.apply(&v);
            for i in 0..3 {
                assert!((mv[i] - v[i] * vals[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn norm_of_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let entries: Vec<C64> = (0..16)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let m = ComplexMatrix {
                rows: 4,
                cols: 4,
                data: entries,
            };
            let n1 = operator_norm(&m, &cfg()).unwrap();
            let n2 = operator_norm(&m.adjoint().mul(&m), &cfg()).unwrap();
            assert!((n2 - n1 * n1).abs() <= 1e-8 * n2.max(1.0));
        }
    }

    #[test]
    fn block_profiles() {
        // Regular representation of Z/2: diag blocks {1,1}.
        let e = ComplexMatrix::identity(2);
        let s = ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let dec = block_decompose(&[e.clone(), s], &cfg()).unwrap();
        assert_eq!(dec.profile.sizes, vec![1, 1]);

        // The full 2×2 matrix algebra is already irreducible.
        let mut basis = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                basis.push(ComplexMatrix::from_fn(2, 2, |r, c_| {
                    if (r, c_) == (i, j) {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                }));
            }
        }
        let dec = block_decompose(&basis, &cfg()).unwrap();
        assert_eq!(dec.profile.sizes, vec![2]);

        // Scalars inside 3×3: a single class of 1-dimensional blocks.
        let dec = block_decompose(&[ComplexMatrix::identity(3)], &cfg()).unwrap();
        assert_eq!(dec.profile.sizes, vec![1]);
        assert_eq!(dec.blocks.len(), 3);
    }

    #[test]
    fn block_decompose_is_deterministic_and_rejects_non_star() {
        let e = ComplexMatrix::identity(2);
        let s = ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let a = block_decompose(&[e.clone(), s.clone()], &cfg()).unwrap();
        let b = block_decompose(&[e, s], &cfg()).unwrap();
        assert_eq!(a.profile, b.profile);
        for (x, y) in a.blocks.iter().zip(b.blocks.iter()) {
            assert_eq!(x.data, y.data);
        }
        // A nilpotent one-dimensional family is not *-closed.
        let nil = ComplexMatrix::from_fn(2, 2, |i, j| {
            if (i, j) == (0, 1) {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(matches!(
            block_decompose(&[nil], &cfg()),
            Err(MatrixError::NotStarClosed(_))
        ));
    }
}
