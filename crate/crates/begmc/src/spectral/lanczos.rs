//! Lanczos iteration with full reorthogonalization for extreme eigenvalues
//! of large sparse symmetric operators.
//!
//! Kernels are symmetrized once (s_ij = sqrt(P_ij P_ji), exactly symmetric
//! for reversible P), and eigenvalue 1 with eigenvector sqrt(pi) is known a
//! priori, so the second-largest eigenvalue is the top of the deflated
//! operator. Deterministic start vectors keep results reproducible.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{sc, Scalar};

/// A symmetric linear operator.
pub trait SymOp<T> {
    fn dim(&self) -> usize;
    /// y = A x.
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Sparse symmetric matrix in row form.
pub struct SparseSym<T> {
    pub rows: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> SymOp<T> for SparseSym<T> {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = T::zero();
            for &(j, v) in row {
                acc += v * x[j as usize];
            }
            y[i] = acc;
        }
    }
}

/// Product A_1 A_2 ... A_k of symmetric factors, itself symmetric when the
/// factor sequence is palindromic (used for symmetrized Q P Q composites).
pub struct ProductOp<'a, T> {
    pub factors: Vec<&'a dyn SymOp<T>>,
    scratch: std::cell::RefCell<Vec<T>>,
}

impl<'a, T: Scalar> ProductOp<'a, T> {
    pub fn new(factors: Vec<&'a dyn SymOp<T>>) -> Self {
        let dim = factors[0].dim();
        Self { factors, scratch: std::cell::RefCell::new(vec![T::zero(); dim]) }
    }
}

impl<T: Scalar> SymOp<T> for ProductOp<'_, T> {
    fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let mut tmp = self.scratch.borrow_mut();
        y.copy_from_slice(x);
        for f in self.factors.iter().rev() {
            tmp.copy_from_slice(y);
            f.apply(&tmp, y);
        }
    }
}

/// A (I - sum v v^T) A (I - sum v v^T): projects the known eigenvectors out.
pub struct DeflatedOp<'a, T> {
    pub inner: &'a dyn SymOp<T>,
    pub deflate: Vec<Vec<T>>,
}

impl<T: Scalar> SymOp<T> for DeflatedOp<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let mut xp = x.to_vec();
        project_out(&mut xp, &self.deflate);
        self.inner.apply(&xp, y);
        project_out(y, &self.deflate);
    }
}

/// y = -A x.
pub struct NegatedOp<'a, T>(pub &'a dyn SymOp<T>);

impl<T: Scalar> SymOp<T> for NegatedOp<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.0.apply(x, y);
        for v in y.iter_mut() {
            *v = -*v;
        }
    }
}

fn project_out<T: Scalar>(x: &mut [T], basis: &[Vec<T>]) {
    for v in basis {
        let dot: T = v.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum();
        for (xi, &vi) in x.iter_mut().zip(v) {
            *xi -= dot * vi;
        }
    }
}

fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

#[derive(Debug, Clone)]
pub struct LanczosResult<T> {
    /// Ritz values, descending.
    pub values: Vec<T>,
    /// Residual bounds |beta_m * (last component of Ritz vector)|.
    pub residuals: Vec<T>,
    pub iterations: usize,
    /// The wanted Ritz values stopped moving (below 1e-13) across
    /// consecutive convergence checks. Under eigenvalue clustering the
    /// vector residual can stall while the values - which converge
    /// monotonically from below - are long settled; this flag records that
    /// situation.
    pub values_stabilized: bool,
}

/// Largest `want` eigenvalues of `op`. Full reorthogonalization against the
/// stored basis; deterministic seeded start vector.
pub fn lanczos_top<T: Scalar>(
    op: &dyn SymOp<T>,
    want: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> LanczosResult<T> {
    let n = op.dim();
    let m_max = max_iter.min(n);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m_max);
    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();

    // deterministic pseudo-random start
    let mut v0 = vec![T::zero(); n];
    let mut state = seed ^ 0x9e3779b97f4a7c15;
    for x in v0.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *x = sc::<T>((state >> 11) as f64 / (1u64 << 53) as f64) - sc(0.5);
    }
    let nv = norm(&v0);
    for x in v0.iter_mut() {
        *x /= nv;
    }
    basis.push(v0);

    let mut w = vec![T::zero(); n];
    let mut iterations = 0usize;
    let mut prev_vals: Option<Vec<T>> = None;
    let mut stable_checks = 0usize;
    for it in 0..m_max {
        iterations = it + 1;
        op.apply(&basis[it], &mut w);
        let alpha: T = basis[it].iter().zip(&w).map(|(&a, &b)| a * b).sum();
        alphas.push(alpha);
        // w -= alpha v_it + beta v_{it-1}, then full reorthogonalization
        for (wi, &vi) in w.iter_mut().zip(&basis[it]) {
            *wi -= alpha * vi;
        }
        if it > 0 {
            let b = betas[it - 1];
            for (wi, &vi) in w.iter_mut().zip(&basis[it - 1]) {
                *wi -= b * vi;
            }
        }
        for _ in 0..2 {
            for v in &basis {
                let d: T = v.iter().zip(&w).map(|(&a, &b)| a * b).sum();
                if d != T::zero() {
                    for (wi, &vi) in w.iter_mut().zip(v) {
                        *wi -= d * vi;
                    }
                }
            }
        }
        let b = norm(&w);
        // convergence check on the wanted Ritz pairs (every few steps: the
        // tridiagonal eigensolve is the expensive part at large depth)
        let check_now = it + 1 >= want && (b <= sc(1e-14) || (it + 1) % 8 == 0);
        if check_now {
            let (vals, resid) = ritz(&alphas, &betas, b, want);
            let moved = prev_vals.as_ref().is_none_or(|pv| {
                pv.iter()
                    .zip(&vals)
                    .any(|(&a, &b)| (a - b).abs() > sc::<T>(1e-13) * b.abs().max(T::one()))
            });
            stable_checks = if moved { 0 } else { stable_checks + 1 };
            prev_vals = Some(vals.clone());
            let stabilized = stable_checks >= 2;
            if resid.iter().all(|&r| r <= sc(tol)) || b <= sc(1e-14) || stabilized {
                return LanczosResult {
                    values: vals,
                    residuals: resid,
                    iterations,
                    values_stabilized: stabilized,
                };
            }
        }
        if b <= sc(1e-14) {
            break; // invariant subspace
        }
        betas.push(b);
        let mut v_next = w.clone();
        for x in v_next.iter_mut() {
            *x /= b;
        }
        basis.push(v_next);
    }
    let b_last = if betas.len() == alphas.len() { *betas.last().unwrap() } else { T::zero() };
    let (vals, resid) = ritz(&alphas, &betas, b_last, want);
    LanczosResult { values: vals, residuals: resid, iterations, values_stabilized: false }
}

/// Ritz values (descending) of the current tridiagonal, with residual
/// estimates for the top `want`.
fn ritz<T: Scalar>(alphas: &[T], betas: &[T], beta_next: T, want: usize) -> (Vec<T>, Vec<T>) {
    let k = alphas.len();
    let mut tri = DMatrix::<T>::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alphas[i];
        if i + 1 < k {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let eig = tri.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let take = want.min(k);
    let mut vals = Vec::with_capacity(take);
    let mut resid = Vec::with_capacity(take);
    for &i in order.iter().take(take) {
        vals.push(eig.eigenvalues[i]);
        resid.push((beta_next * eig.eigenvectors[(k - 1, i)]).abs());
    }
    (vals, resid)
}

/// Rayleigh-quotient residual ||A v - lambda v|| for an explicit vector.
pub fn residual_norm<T: Scalar>(op: &dyn SymOp<T>, v: &DVector<T>, lambda: T) -> T {
    let x: Vec<T> = v.iter().copied().collect();
    let mut y = vec![T::zero(); x.len()];
    op.apply(&x, &mut y);
    y.iter().zip(&x).map(|(&yi, &xi)| (yi - lambda * xi) * (yi - lambda * xi)).sum::<T>().sqrt()
}
