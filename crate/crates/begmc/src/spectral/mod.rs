//! Exact spectral gaps, conductance, Dirichlet-form comparisons, and the
//! aggregation/restriction calculus for reversible kernels.
//!
//! Gap(P) = 1 - max{|lambda| : lambda an eigenvalue, lambda != 1}. All
//! computations run on the symmetrized matrix s_ij = sqrt(P_ij P_ji), which
//! equals D^{1/2} P D^{-1/2} exactly for reversible P and is symmetric by
//! construction. sqrt(pi) is its known top eigenvector, so the second
//! eigenvalue is the top of the deflated operator. Dense eigensolves below a
//! size threshold, deflated Lanczos above; both report residuals.
//! Reversibility is a checked precondition, not an assumption.

pub mod lanczos;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{Kernel, StateLabels};
use crate::scalar::{log_sum_exp, sc, Scalar};
use lanczos::{DeflatedOp, NegatedOp, ProductOp, SparseSym, SymOp};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("kernel violates reversibility: {0}")]
    NotReversible(String),
    #[error("eigensolver did not converge: residual {residual} > {tol}")]
    NoConvergence { residual: f64, tol: f64 },
    #[error("subset must be nonempty and proper")]
    BadSubset,
    #[error("partition invalid: {0}")]
    BadPartition(String),
    #[error("operator not positive semidefinite: eigenvalue {0}")]
    NotPositive(f64),
    #[error("path uses edge ({0}, {1}) outside the kernel support")]
    BadPathEdge(usize, usize),
    #[error("path for pair ({0}, {1}) repeats an edge")]
    RepeatedEdge(usize, usize),
    #[error("state spaces do not match: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error("stationary laws differ at state {0}")]
    DifferentStationaryLaw(usize),
    #[error("mixing profile exceeded the step cap {0}")]
    StepCap(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Dense,
    SparseIterative,
}

/// Result of a spectral-gap computation.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport<T> {
    pub gap: T,
    pub second_eigenvalue_modulus: T,
    pub method: Method,
    /// ||S v - lambda v|| for the reported second eigenpair.
    pub residual: T,
    /// Set when the iterative path converged by Ritz-value stabilization
    /// rather than by the vector residual (eigenvalue clustering keeps the
    /// vector residual large while the value, which converges monotonically
    /// from below, is settled).
    pub value_stabilized: bool,
    /// Second-largest eigenvalue (signed) and smallest eigenvalue, when
    /// computed (the smallest is skipped for operators known positive).
    pub lambda_2: T,
    pub lambda_min: Option<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOpts {
    /// Dense eigensolve at or below this many states.
    pub dense_threshold: usize,
    pub max_lanczos: usize,
    /// Ritz residual target.
    pub tol: f64,
    /// Skip the bottom-of-spectrum solve (valid for lazy/PSD operators).
    pub assume_psd: bool,
}

impl Default for SpectralOpts {
    fn default() -> Self {
        Self { dense_threshold: 4_000, max_lanczos: 600, tol: 1e-10, assume_psd: false }
    }
}

impl SpectralOpts {
    pub fn iterative() -> Self {
        Self { dense_threshold: 0, ..Self::default() }
    }
}

/// Symmetrized sparse rows s_ij = sqrt(P_ij P_ji).
fn symmetrized_rows<T: Scalar>(k: &Kernel<T>) -> Vec<Vec<(u32, T)>> {
    k.rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|&(j, v)| {
                    if j as usize == i {
                        (j, v)
                    } else {
                        (j, (v * k.entry(j as usize, i)).sqrt())
                    }
                })
                .collect()
        })
        .collect()
}

fn sqrt_pi<T: Scalar>(k: &Kernel<T>) -> Vec<T> {
    k.log_pi().iter().map(|&l| (l / sc(2.0)).exp()).collect()
}

/// Spectral gap with default options.
pub fn spectral_gap<T: Scalar>(kernel: &Kernel<T>) -> Result<GapReport<T>, SpectralError> {
    spectral_gap_with(kernel, &SpectralOpts::default())
}

pub fn spectral_gap_with<T: Scalar>(
    kernel: &Kernel<T>,
    opts: &SpectralOpts,
) -> Result<GapReport<T>, SpectralError> {
    kernel
        .check_detailed_balance(1e-9)
        .map_err(|e| SpectralError::NotReversible(e.to_string()))?;
    let n = kernel.n_states();
    if n == 1 {
        return Ok(GapReport {
            gap: T::one(),
            second_eigenvalue_modulus: T::zero(),
            method: Method::Dense,
            residual: T::zero(),
            value_stabilized: false,
            lambda_2: T::zero(),
            lambda_min: Some(T::zero()),
        });
    }
    if n <= opts.dense_threshold {
        dense_gap(kernel, opts)
    } else {
        let sym = SparseSym { rows: symmetrized_rows(kernel) };
        let psd = opts.assume_psd || kernel.is_lazy();
        iterative_gap(&sym, &sqrt_pi(kernel), psd, opts)
    }
}

/// Gap of a palindromic product (e.g. Q P Q) without materializing it: the
/// symmetrized factors are applied in sequence. All factors must share the
/// stationary law of the first.
pub fn gap_of_product<T: Scalar>(
    factors: &[&Kernel<T>],
    opts: &SpectralOpts,
) -> Result<GapReport<T>, SpectralError> {
    assert!(!factors.is_empty());
    let n = factors[0].n_states();
    for f in factors {
        if f.n_states() != n {
            return Err(SpectralError::Mismatch(n, f.n_states()));
        }
        f.check_detailed_balance(1e-9)
            .map_err(|e| SpectralError::NotReversible(e.to_string()))?;
    }
    let syms: Vec<SparseSym<T>> =
        factors.iter().map(|f| SparseSym { rows: symmetrized_rows(f) }).collect();
    let ops: Vec<&dyn SymOp<T>> = syms.iter().map(|s| s as &dyn SymOp<T>).collect();
    let prod = ProductOp::new(ops);
    let psd = opts.assume_psd || factors.iter().all(|f| f.is_lazy());
    iterative_gap(&prod, &sqrt_pi(factors[0]), psd, opts)
}

fn dense_gap<T: Scalar>(
    kernel: &Kernel<T>,
    _opts: &SpectralOpts,
) -> Result<GapReport<T>, SpectralError> {
    let n = kernel.n_states();
    let mut s = DMatrix::<T>::zeros(n, n);
    for (i, row) in symmetrized_rows(kernel).iter().enumerate() {
        for &(j, v) in row {
            s[(i, j as usize)] = v;
        }
    }
    let eig = s.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let top = eig.eigenvalues[order[0]];
    if (top - T::one()).abs() > sc(1e-8) {
        return Err(SpectralError::NoConvergence {
            residual: (top - T::one()).abs().f64(),
            tol: 1e-8,
        });
    }
    let lambda_2 = eig.eigenvalues[order[1]];
    let lambda_min = eig.eigenvalues[order[n - 1]];
    let modulus = lambda_2.abs().max(lambda_min.abs());
    // symmetric eigenvalues are perfectly conditioned, but the eigenvectors
    // of clustered pairs can mix; certify the eigenvalue set globally
    // through the trace identities instead of a per-vector residual
    let (mut sum, mut sum_sq) = (T::zero(), T::zero());
    for &l in eig.eigenvalues.iter() {
        sum += l;
        sum_sq += l * l;
    }
    let (mut tr, mut frob_sq) = (T::zero(), T::zero());
    for i in 0..n {
        tr += s[(i, i)];
        for j in 0..n {
            frob_sq += s[(i, j)] * s[(i, j)];
        }
    }
    let nn = sc::<T>(n as f64);
    let residual = ((sum - tr).abs() / nn).max((sum_sq - frob_sq).abs() / nn);
    if residual > sc(1e-8) {
        return Err(SpectralError::NoConvergence { residual: residual.f64(), tol: 1e-8 });
    }
    Ok(GapReport {
        gap: T::one() - modulus,
        second_eigenvalue_modulus: modulus,
        method: Method::Dense,
        residual,
        value_stabilized: false,
        lambda_2,
        lambda_min: Some(lambda_min),
    })
}

fn iterative_gap<T: Scalar>(
    op: &dyn SymOp<T>,
    sqrt_pi: &[T],
    psd: bool,
    opts: &SpectralOpts,
) -> Result<GapReport<T>, SpectralError> {
    let defl = DeflatedOp { inner: op, deflate: vec![sqrt_pi.to_vec()] };
    let top = lanczos::lanczos_top(&defl, 1, opts.max_lanczos, opts.tol, 0x51ab);
    let lambda_2 = top.values[0];
    let mut residual = top.residuals[0];
    let mut converged = top.values_stabilized || residual <= sc(1e-8);
    let lambda_min = if psd {
        None
    } else {
        let neg = NegatedOp(op);
        let bot = lanczos::lanczos_top(&neg, 1, opts.max_lanczos, opts.tol, 0x51ac);
        residual = residual.max(bot.residuals[0]);
        converged &= bot.values_stabilized || bot.residuals[0] <= sc(1e-8);
        Some(-bot.values[0])
    };
    if !converged {
        return Err(SpectralError::NoConvergence { residual: residual.f64(), tol: 1e-8 });
    }
    let modulus = lambda_min.map_or(lambda_2.abs(), |lm: T| lambda_2.abs().max(lm.abs()));
    Ok(GapReport {
        gap: T::one() - modulus,
        second_eigenvalue_modulus: modulus,
        method: Method::SparseIterative,
        residual,
        value_stabilized: residual > sc(1e-8),
        lambda_2,
        lambda_min,
    })
}

/// Conductance of a subset: Phi_S = sum_{x in S, y not in S} pi(x) P(x,y)
/// divided by pi(S).
pub fn conductance<T: Scalar>(kernel: &Kernel<T>, subset: &[usize]) -> Result<T, SpectralError> {
    let n = kernel.n_states();
    if subset.is_empty() || subset.len() >= n {
        return Err(SpectralError::BadSubset);
    }
    let mut in_s = vec![false; n];
    for &x in subset {
        in_s[x] = true;
    }
    let pi = kernel.pi();
    let mut flow = T::zero();
    let mut mass = T::zero();
    for &x in subset {
        mass += pi[x];
        for &(y, v) in kernel.row(x) {
            if !in_s[y as usize] {
                flow += pi[x] * v;
            }
        }
    }
    Ok(flow / mass)
}

/// Assignment of states to blocks.
#[derive(Debug, Clone)]
pub struct PartitionSpec {
    pub assignment: Vec<usize>,
    pub blocks: usize,
}

impl PartitionSpec {
    pub fn new(assignment: Vec<usize>, blocks: usize) -> Result<Self, SpectralError> {
        let mut seen = vec![false; blocks];
        for &b in &assignment {
            if b >= blocks {
                return Err(SpectralError::BadPartition(format!("block {b} out of range")));
            }
            seen[b] = true;
        }
        if let Some(b) = seen.iter().position(|&s| !s) {
            return Err(SpectralError::BadPartition(format!("block {b} empty")));
        }
        Ok(Self { assignment, blocks })
    }
}

/// Aggregated chain: Qbar(i,j) = (1/pi(S_i)) sum_{x in S_i, y in S_j}
/// pi(x) Q(x,y); reversible with respect to the block masses.
pub fn aggregate<T: Scalar>(kernel: &Kernel<T>, parts: &PartitionSpec) -> Kernel<T> {
    assert_eq!(parts.assignment.len(), kernel.n_states());
    let b = parts.blocks;
    // block masses in log domain for stability
    let mut block_logs: Vec<Vec<T>> = vec![Vec::new(); b];
    for (x, &bx) in parts.assignment.iter().enumerate() {
        block_logs[bx].push(kernel.log_pi()[x]);
    }
    let log_mass: Vec<T> = block_logs.iter().map(|v| log_sum_exp(v)).collect();
    let pi = kernel.pi();
    let mut flux = vec![vec![T::zero(); b]; b];
    for (x, row) in kernel.rows().iter().enumerate() {
        let bx = parts.assignment[x];
        for &(y, v) in row {
            flux[bx][parts.assignment[y as usize]] += pi[x] * v;
        }
    }
    let rows: Vec<Vec<(u32, T)>> = (0..b)
        .map(|i| {
            let mass = log_mass[i].exp();
            (0..b)
                .filter(|&j| flux[i][j] > T::zero())
                .map(|j| (j as u32, flux[i][j] / mass))
                .collect()
        })
        .collect();
    Kernel::new(rows, log_mass, StateLabels::Plain, kernel.is_lazy())
}

/// Restriction to a block by rejecting jumps that leave it:
/// P_B(x, y) = P(x, y) for y in B, plus the escaping mass on the diagonal.
/// States are renumbered in the order given.
pub fn restrict<T: Scalar>(kernel: &Kernel<T>, block: &[usize]) -> Kernel<T> {
    assert!(!block.is_empty());
    let mut new_index = vec![usize::MAX; kernel.n_states()];
    for (ni, &x) in block.iter().enumerate() {
        new_index[x] = ni;
    }
    let mut rows = Vec::with_capacity(block.len());
    let mut log_pi = Vec::with_capacity(block.len());
    for (ni, &x) in block.iter().enumerate() {
        log_pi.push(kernel.log_pi()[x]);
        let mut escape = T::zero();
        let mut row: Vec<(u32, T)> = Vec::new();
        for &(y, v) in kernel.row(x) {
            let ny = new_index[y as usize];
            if ny == usize::MAX {
                escape += v;
            } else {
                row.push((ny as u32, v));
            }
        }
        if escape > T::zero() {
            row.push((ni as u32, escape));
        }
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Plain, kernel.is_lazy())
}

/// Positive square root of a kernel as an operator on L^2(pi): the unique
/// symmetric-in-pi R with R^2 = P. Returned as a dense matrix in the
/// original basis. Fails if the symmetrized spectrum dips below -1e-10;
/// tiny negative eigenvalues are clipped to zero.
pub fn positive_sqrt<T: Scalar>(kernel: &Kernel<T>) -> Result<DMatrix<T>, SpectralError> {
    kernel
        .check_detailed_balance(1e-9)
        .map_err(|e| SpectralError::NotReversible(e.to_string()))?;
    let n = kernel.n_states();
    let mut s = DMatrix::<T>::zeros(n, n);
    for (i, row) in symmetrized_rows(kernel).iter().enumerate() {
        for &(j, v) in row {
            s[(i, j as usize)] = v;
        }
    }
    let eig = s.symmetric_eigen();
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -sc::<T>(1e-10) {
            return Err(SpectralError::NotPositive(v.f64()));
        }
        *v = v.max(T::zero()).sqrt();
    }
    // R_sym = V diag(sqrt(lambda)) V^T, then undo the similarity transform
    let vt = eig.eigenvectors.transpose();
    let mut scaled = eig.eigenvectors.clone();
    for (c, &r) in roots.iter().enumerate() {
        scaled.column_mut(c).scale_mut(r);
    }
    let r_sym = scaled * vt;
    let half_log: Vec<T> = kernel.log_pi().iter().map(|&l| (l / sc(2.0)).exp()).collect();
    let mut out = r_sym;
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = out[(i, j)] * half_log[j] / half_log[i];
        }
    }
    Ok(out)
}

/// A family of canonical paths: one vertex sequence per (source, target)
/// pair, used by the Poincare and comparison bounds.
#[derive(Debug, Clone, Default)]
pub struct PathFamily {
    /// (z1, z2, vertices from z1 to z2 inclusive).
    pub paths: Vec<(usize, usize, Vec<usize>)>,
}

/// Poincare bound: A = max over support edges of
/// (1/(pi(x) P(x,y))) sum_{paths through the edge} |path| pi(z1) pi(z2),
/// guaranteeing Gap >= 1/A. Paths must use support edges and not repeat an
/// edge within a path.
pub fn poincare_bound<T: Scalar>(
    kernel: &Kernel<T>,
    paths: &PathFamily,
) -> Result<T, SpectralError> {
    let pi = kernel.pi();
    // accumulate sum |gamma| pi(z1) pi(z2) per undirected edge (a path may
    // traverse an edge in either direction; the load is shared)
    let mut load: std::collections::HashMap<(usize, usize), T> = std::collections::HashMap::new();
    for (z1, z2, verts) in &paths.paths {
        debug_assert_eq!(verts.first(), Some(z1));
        debug_assert_eq!(verts.last(), Some(z2));
        let len = sc::<T>((verts.len() - 1) as f64);
        let weight = len * pi[*z1] * pi[*z2];
        let mut seen = std::collections::HashSet::new();
        for e in verts.windows(2) {
            let (a, b) = (e[0], e[1]);
            if kernel.entry(a, b) <= T::zero() || kernel.entry(b, a) <= T::zero() {
                return Err(SpectralError::BadPathEdge(a, b));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(SpectralError::RepeatedEdge(*z1, *z2));
            }
            *load.entry(key).or_insert_with(T::zero) += weight;
        }
    }
    let mut a_max = T::zero();
    for (&(x, y), &l) in &load {
        let denom = pi[x] * kernel.entry(x, y);
        a_max = a_max.max(l / denom);
    }
    Ok(a_max)
}

/// Canonical paths routed through the stationary mode along the
/// bottleneck-optimal (widest) tree: the route from any state to the peak
/// maximizes the minimum weight it visits. On a unimodal landscape these are
/// the monotone ascent paths; small lattice plateaus are crossed at their
/// highest saddle. Pairs are joined through the peak and trimmed at the
/// first common vertex.
pub fn widest_path_family<T: Scalar>(kernel: &Kernel<T>) -> Result<PathFamily, SpectralError> {
    let n = kernel.n_states();
    let lp = kernel.log_pi();
    let peak = (0..n).max_by(|&a, &b| lp[a].partial_cmp(&lp[b]).unwrap()).unwrap();
    let neg_inf = sc::<T>(f64::NEG_INFINITY);
    let mut key = vec![neg_inf; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    key[peak] = lp[peak];
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = neg_inf;
        for x in 0..n {
            if !done[x] && key[x] > best {
                best = key[x];
                u = x;
            }
        }
        if u == usize::MAX {
            return Err(SpectralError::NotReversible("support graph disconnected".into()));
        }
        done[u] = true;
        for &(v, p) in kernel.row(u) {
            let v = v as usize;
            if p <= T::zero() || done[v] {
                continue;
            }
            let cand = key[u].min(lp[v]);
            if cand > key[v] {
                key[v] = cand;
                parent[v] = u;
            }
        }
    }
    let chain_to_peak = |mut x: usize| -> Vec<usize> {
        let mut path = vec![x];
        while x != peak {
            x = parent[x];
            path.push(x);
            debug_assert!(path.len() <= n + 1, "tree cycle");
        }
        path
    };
    let mut paths = Vec::new();
    for z1 in 0..n {
        let up1 = chain_to_peak(z1);
        for z2 in z1 + 1..n {
            let up2 = chain_to_peak(z2);
            // trim at the first common vertex
            let pos: std::collections::HashMap<usize, usize> =
                up1.iter().copied().enumerate().map(|(i, v)| (v, i)).collect();
            let (mut i2, mut meet) = (0usize, usize::MAX);
            for (k, &v) in up2.iter().enumerate() {
                if let Some(&i1) = pos.get(&v) {
                    i2 = k;
                    meet = i1;
                    break;
                }
            }
            let mut verts: Vec<usize> = up1[..=meet].to_vec();
            verts.extend(up2[..i2].iter().rev());
            paths.push((z1, z2, verts));
        }
    }
    Ok(PathFamily { paths })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletComparison<T> {
    /// Dirichlet comparison constant: E_tilde <= A E.
    pub big_a: T,
    /// Measure ratio: a pi <= pi_tilde.
    pub a: T,
    pub gap: T,
    pub gap_tilde: T,
    /// Gap(P_tilde) <= (A/a) Gap(P), checked numerically.
    pub holds: bool,
}

/// Comparison of Dirichlet forms: routes each support edge of `p_tilde`
/// through paths in the support of `p` and checks
/// Gap(p_tilde) <= (A/a) Gap(p).
pub fn dirichlet_comparison<T: Scalar>(
    p_tilde: &Kernel<T>,
    p: &Kernel<T>,
    paths: &PathFamily,
    opts: &SpectralOpts,
) -> Result<DirichletComparison<T>, SpectralError> {
    let n = p.n_states();
    if p_tilde.n_states() != n {
        return Err(SpectralError::Mismatch(p_tilde.n_states(), n));
    }
    let pi = p.pi();
    let pi_t = p_tilde.pi();
    // a = min pi_tilde / pi
    let a = pi
        .iter()
        .zip(&pi_t)
        .map(|(&x, &y)| y / x)
        .fold(sc::<T>(f64::INFINITY), |acc, v| acc.min(v));
    // A = max over p-edges of (1/(pi P)) sum_{tilde-edges routed through}
    //     |gamma| pi_t(x) P_tilde(x, y)
    let mut routed: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut load: std::collections::HashMap<(usize, usize), T> = std::collections::HashMap::new();
    for (z1, z2, verts) in &paths.paths {
        let v_t = p_tilde.entry(*z1, *z2);
        if v_t <= T::zero() {
            continue;
        }
        routed.insert((*z1, *z2));
        routed.insert((*z2, *z1));
        let len = sc::<T>((verts.len() - 1) as f64);
        // the pair (z1, z2) loads the path edges forward; (z2, z1) loads the
        // reversed edges with its own flux
        let w_fwd = len * pi_t[*z1] * v_t;
        let w_rev = len * pi_t[*z2] * p_tilde.entry(*z2, *z1);
        for e in verts.windows(2) {
            let (x, y) = (e[0], e[1]);
            if p.entry(x, y) <= T::zero() || p.entry(y, x) <= T::zero() {
                return Err(SpectralError::BadPathEdge(x, y));
            }
            *load.entry((x, y)).or_insert_with(T::zero) += w_fwd;
            *load.entry((y, x)).or_insert_with(T::zero) += w_rev;
        }
    }
    // every off-diagonal tilde edge must be routed
    for (x, row) in p_tilde.rows().iter().enumerate() {
        for &(y, v) in row {
            let y = y as usize;
            if y != x && v > T::zero() && !routed.contains(&(x, y)) {
                return Err(SpectralError::BadPartition(format!(
                    "support edge ({x}, {y}) of the compared chain has no path"
                )));
            }
        }
    }
    let mut big_a = T::zero();
    for (&(x, y), &l) in &load {
        big_a = big_a.max(l / (pi[x] * p.entry(x, y)));
    }
    let gap = spectral_gap_with(p, opts)?.gap;
    let gap_tilde = spectral_gap_with(p_tilde, opts)?.gap;
    let holds = gap_tilde <= big_a / a * gap + sc(1e-9);
    Ok(DirichletComparison { big_a, a, gap, gap_tilde, holds })
}

/// Gap(P) >= Gap(P^m) / m, within 1e-10.
pub fn power_gap_check<T: Scalar>(
    kernel: &Kernel<T>,
    m: usize,
    opts: &SpectralOpts,
) -> Result<bool, SpectralError> {
    assert!(m >= 1);
    let gap = spectral_gap_with(kernel, opts)?.gap;
    let mut power = kernel.clone();
    for _ in 1..m {
        power = power.compose(kernel).map_err(|e| SpectralError::NotReversible(e.to_string()))?;
    }
    let gap_m = spectral_gap_with(&power, opts)?.gap;
    Ok(gap >= gap_m / sc(m as f64) - sc(1e-10))
}

/// Gap(A B A) >= Gap(B) for kernels reversible w.r.t. the same law.
pub fn aba_check<T: Scalar>(
    a: &Kernel<T>,
    b: &Kernel<T>,
    opts: &SpectralOpts,
) -> Result<bool, SpectralError> {
    if a.n_states() != b.n_states() {
        return Err(SpectralError::Mismatch(a.n_states(), b.n_states()));
    }
    for (i, (&la, &lb)) in a.log_pi().iter().zip(b.log_pi()).enumerate() {
        if (la - lb).abs() > sc(1e-9) {
            return Err(SpectralError::DifferentStationaryLaw(i));
        }
    }
    let aba = a
        .compose(b)
        .and_then(|ab| ab.compose(a))
        .map_err(|e| SpectralError::NotReversible(e.to_string()))?;
    let gap_aba = spectral_gap_with(&aba, opts)?.gap;
    let gap_b = spectral_gap_with(b, opts)?.gap;
    Ok(gap_aba >= gap_b - sc(1e-10))
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingProfile<T> {
    /// First time the TV distance to pi drops to eps.
    pub tau: usize,
    pub tv_curve: Vec<T>,
    /// (1/Gap) log(1/(pi_min eps)), the spectral upper bound on tau.
    pub tau_bound: T,
}

/// Iterates a point mass and records total-variation distance to pi.
pub fn mixing_profile<T: Scalar>(
    kernel: &Kernel<T>,
    start: usize,
    eps: T,
    step_cap: usize,
    opts: &SpectralOpts,
) -> Result<MixingProfile<T>, SpectralError> {
    let n = kernel.n_states();
    let pi = kernel.pi();
    let gap = spectral_gap_with(kernel, opts)?.gap;
    let pi_min = pi.iter().copied().fold(sc::<T>(f64::INFINITY), |a, b| a.min(b));
    let tau_bound = (T::one() / (pi_min * eps)).ln() / gap;
    let mut mu = vec![T::zero(); n];
    mu[start] = T::one();
    let mut next = vec![T::zero(); n];
    let mut tv_curve = Vec::new();
    for step in 0..=step_cap {
        let tv: T =
            mu.iter().zip(&pi).map(|(&m, &p)| (m - p).abs()).sum::<T>() / sc(2.0);
        tv_curve.push(tv);
        if tv <= eps {
            return Ok(MixingProfile { tau: step, tv_curve, tau_bound });
        }
        kernel.push_dist(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
    }
    Err(SpectralError::StepCap(step_cap))
}


/// The rung-uniform product chain: P = (1/(M+1)) sum_i I x ... x P_i x ... x I
/// on the product of the component spaces (component 0 least significant).
pub fn product_chain<T: Scalar>(components: &[&Kernel<T>]) -> Kernel<T> {
    let sizes: Vec<usize> = components.iter().map(|k| k.n_states()).collect();
    let n_states: usize = sizes.iter().product();
    let m1 = sc::<T>(components.len() as f64);
    let mut stride = vec![1usize; sizes.len()];
    for i in 1..sizes.len() {
        stride[i] = stride[i - 1] * sizes[i - 1];
    }
    let decode = |mut x: usize| -> Vec<usize> {
        sizes
            .iter()
            .map(|&s| {
                let c = x % s;
                x /= s;
                c
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(n_states);
    let mut log_pi = Vec::with_capacity(n_states);
    for x in 0..n_states {
        let comps = decode(x);
        log_pi.push(
            comps.iter().zip(components).map(|(&c, k)| k.log_pi()[c]).sum::<T>(),
        );
        let mut row: Vec<(u32, T)> = Vec::new();
        for (i, k) in components.iter().enumerate() {
            let base = x - comps[i] * stride[i];
            for &(j, v) in k.row(comps[i]) {
                row.push(((base + j as usize * stride[i]) as u32, v / m1));
            }
        }
        rows.push(row);
    }
    Kernel::new(rows, log_pi, StateLabels::Plain, false)
}
