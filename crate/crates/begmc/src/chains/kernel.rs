//! Finite row-stochastic kernels with log-domain stationary weights.
//!
//! Every chain in this crate reduces to this type for exact analysis. A
//! kernel keeps its transition rows sparse (sorted by column), its stationary
//! law as normalized log-probabilities, and a label scheme mapping state
//! indices back to semantic states.

use thiserror::Error;

use crate::model::MacroSpace;
use crate::scalar::{log_sum_exp, sc, Scalar};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("row {state} sums to {sum}, not 1")]
    RowSum { state: usize, sum: f64 },
    #[error("detailed balance violated at ({x}, {y}): |log flux difference| = {violation}")]
    DetailedBalance { x: usize, y: usize, violation: f64 },
    #[error("support graph not strongly connected: state {unreached} unreached")]
    NotIrreducible { unreached: usize },
    #[error("kernel flagged lazy but diagonal at {state} is {diag} < 1/2")]
    NotLazy { state: usize, diag: f64 },
    #[error("state space of {states} states exceeds the configured cap {cap}; use simulation mode")]
    SizeExceeded { states: usize, cap: usize },
    #[error("kernels are not composable: {0} vs {1} states")]
    ShapeMismatch(usize, usize),
}

/// Maps state indices to semantic states, for exports and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateLabels {
    /// Anonymous indices.
    Plain,
    /// Macrostates of [`MacroSpace::new`](crate::model::MacroSpace) order.
    Macro { n: usize },
    /// Macrostates restricted to the s >= 0 half-space, same relative order.
    HalfMacro { n: usize },
    /// (macrostate, ladder rung): index = rung * n_macrostates + macro index.
    MacroRung { n: usize, m: usize },
    /// Rung indices 0..=m (sign-aggregated walk, binomial walk).
    Rung { m: usize },
    /// Microstates of {-1,0,1}^n as base-3 codes.
    Micro { n: usize },
    /// Tuples over the macrostate space: index = sum_i c_i * C^i (component 0
    /// least significant), for m+1 components.
    MacroTuple { n: usize, m: usize },
    /// Bit vectors over the free trace coordinates i_c..=m.
    TraceBits { m: usize, i_c: usize },
}

impl StateLabels {
    /// Human-readable label of one state index.
    pub fn describe(&self, idx: usize) -> String {
        match self {
            StateLabels::Plain => format!("{idx}"),
            StateLabels::Macro { n } => {
                let m = MacroSpace::new(*n).state(idx);
                format!("(s={}, r={})", m.s, m.r)
            }
            StateLabels::HalfMacro { n } => {
                let states = half_space_states(*n);
                let (s, r) = states[idx];
                format!("(s={s}, r={r})")
            }
            StateLabels::MacroRung { n, .. } => {
                let space = MacroSpace::new(*n);
                let c = space.len();
                let m = space.state(idx % c);
                format!("(s={}, r={}, rung={})", m.s, m.r, idx / c)
            }
            StateLabels::Rung { .. } => format!("rung {idx}"),
            StateLabels::Micro { n } => {
                let mut code = idx;
                let spins: Vec<i8> = (0..*n)
                    .map(|_| {
                        let v = (code % 3) as i8 - 1;
                        code /= 3;
                        v
                    })
                    .collect();
                format!("{spins:?}")
            }
            StateLabels::MacroTuple { n, m } => {
                let space = MacroSpace::new(*n);
                let c = space.len();
                let mut rest = idx;
                let comps: Vec<String> = (0..=*m)
                    .map(|_| {
                        let st = space.state(rest % c);
                        rest /= c;
                        format!("(s={},r={})", st.s, st.r)
                    })
                    .collect();
                comps.join("x")
            }
            StateLabels::TraceBits { m, i_c } => {
                let bits: String =
                    (0..=(m - i_c)).map(|b| if idx >> b & 1 == 1 { '1' } else { '0' }).collect();
                format!("t[{i_c}..={m}]={bits}")
            }
        }
    }
}

/// Index of (|s|, r) in the [`half_space_states`] order.
pub fn half_space_index(s: i64, r: i64) -> usize {
    let s = s.abs();
    debug_assert!(s <= r && (r - s) % 2 == 0);
    let base: usize = (0..r as usize).map(|rp| rp / 2 + 1).sum();
    base + ((s - (r % 2)) / 2) as usize
}

/// (s, r) pairs of the s >= 0 half-space, r ascending then s ascending.
pub fn half_space_states(n: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for r in 0..=n as i64 {
        let mut s = if r % 2 == 0 { 0 } else { 1 };
        while s <= r {
            out.push((s, r));
            s += 2;
        }
    }
    out
}

/// A reversible row-stochastic matrix bundled with its stationary law.
#[derive(Debug, Clone)]
pub struct Kernel<T> {
    rows: Vec<Vec<(u32, T)>>,
    /// Normalized log stationary probabilities.
    log_pi: Vec<T>,
    labels: StateLabels,
    lazy: bool,
}

impl<T: Scalar> Kernel<T> {
    /// Builds a kernel; `log_pi` may be unnormalized and is normalized here.
    pub fn new(rows: Vec<Vec<(u32, T)>>, log_pi: Vec<T>, labels: StateLabels, lazy: bool) -> Self {
        assert_eq!(rows.len(), log_pi.len());
        let mut rows = rows;
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            // merge duplicate columns
            let mut merged: Vec<(u32, T)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                if let Some(last) = merged.last_mut() {
                    if last.0 == j {
                        last.1 += v;
                        continue;
                    }
                }
                merged.push((j, v));
            }
            *row = merged;
        }
        let lz = log_sum_exp(&log_pi);
        let log_pi = log_pi.into_iter().map(|w| w - lz).collect();
        Self { rows, log_pi, labels, lazy }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(u32, T)>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .binary_search_by_key(&(j as u32), |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn log_pi(&self) -> &[T] {
        &self.log_pi
    }

    pub fn pi(&self) -> Vec<T> {
        self.log_pi.iter().map(|&w| w.exp()).collect()
    }

    pub fn labels(&self) -> &StateLabels {
        &self.labels
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Mutable row access for corruption in negative-control tests.
    pub(crate) fn rows_mut(&mut self) -> &mut Vec<Vec<(u32, T)>> {
        &mut self.rows
    }

    pub fn check_row_sums(&self, tol: f64) -> Result<(), KernelError> {
        for (i, row) in self.rows.iter().enumerate() {
            let sum: T = row.iter().map(|&(_, v)| v).sum();
            if (sum - T::one()).abs() > sc(tol) {
                return Err(KernelError::RowSum { state: i, sum: sum.f64() });
            }
            if row.iter().any(|&(_, v)| v < -sc::<T>(tol)) {
                return Err(KernelError::RowSum { state: i, sum: sum.f64() });
            }
        }
        Ok(())
    }

    /// |log pi(x) + log P(x,y) - log pi(y) - log P(y,x)| <= tol on every
    /// stored pair (equivalently, flux symmetry in log domain).
    pub fn check_detailed_balance(&self, tol: f64) -> Result<(), KernelError> {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                let j = j as usize;
                if j <= i || v == T::zero() {
                    continue;
                }
                let back = self.entry(j, i);
                if back <= T::zero() {
                    if v > sc(tol) {
                        return Err(KernelError::DetailedBalance {
                            x: i,
                            y: j,
                            violation: f64::INFINITY,
                        });
                    }
                    continue;
                }
                let lhs = self.log_pi[i] + v.ln();
                let rhs = self.log_pi[j] + back.ln();
                if (lhs - rhs).abs() > sc(tol) {
                    return Err(KernelError::DetailedBalance {
                        x: i,
                        y: j,
                        violation: (lhs - rhs).abs().f64(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Strong connectivity of the support graph (BFS both ways; for
    /// reversible kernels the support is symmetric and one pass suffices,
    /// but the check does not assume it).
    pub fn check_irreducible(&self) -> Result<(), KernelError> {
        let n = self.n_states();
        if n == 0 {
            return Ok(());
        }
        let reach = |forward: bool| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            // reverse adjacency built on demand for the backward pass
            let mut radj: Vec<Vec<u32>> = Vec::new();
            if !forward {
                radj = vec![Vec::new(); n];
                for (i, row) in self.rows.iter().enumerate() {
                    for &(j, v) in row {
                        if v > T::zero() {
                            radj[j as usize].push(i as u32);
                        }
                    }
                }
            }
            while let Some(u) = stack.pop() {
                if forward {
                    for &(j, v) in &self.rows[u] {
                        if v > T::zero() && !seen[j as usize] {
                            seen[j as usize] = true;
                            stack.push(j as usize);
                        }
                    }
                } else {
                    for &j in &radj[u] {
                        if !seen[j as usize] {
                            seen[j as usize] = true;
                            stack.push(j as usize);
                        }
                    }
                }
            }
            seen
        };
        for pass in [true, false] {
            let seen = reach(pass);
            if let Some(u) = seen.iter().position(|&s| !s) {
                return Err(KernelError::NotIrreducible { unreached: u });
            }
        }
        Ok(())
    }

    pub fn check_lazy(&self) -> Result<(), KernelError> {
        if !self.lazy {
            return Ok(());
        }
        for i in 0..self.n_states() {
            let d = self.entry(i, i);
            if d < sc::<T>(0.5) - sc::<T>(1e-12) {
                return Err(KernelError::NotLazy { state: i, diag: d.f64() });
            }
        }
        Ok(())
    }

    /// Full contract: row sums (1e-12), detailed balance (1e-9),
    /// irreducibility, and laziness where flagged.
    pub fn validate(&self) -> Result<(), KernelError> {
        self.check_row_sums(1e-12)?;
        self.check_detailed_balance(1e-9)?;
        self.check_irreducible()?;
        self.check_lazy()
    }

    /// Sparse matrix product self * other (both row-stochastic on the same
    /// space). The stationary law of `self` is carried over.
    pub fn compose(&self, other: &Kernel<T>) -> Result<Kernel<T>, KernelError> {
        let n = self.n_states();
        if other.n_states() != n {
            return Err(KernelError::ShapeMismatch(n, other.n_states()));
        }
        let mut rows = Vec::with_capacity(n);
        let mut acc: Vec<T> = vec![T::zero(); n];
        let mut touched: Vec<u32> = Vec::new();
        for i in 0..n {
            for &(k, v) in &self.rows[i] {
                for &(j, w) in &other.rows[k as usize] {
                    if acc[j as usize] == T::zero() {
                        touched.push(j);
                    }
                    acc[j as usize] += v * w;
                }
            }
            touched.sort_unstable();
            let row: Vec<(u32, T)> =
                touched.iter().map(|&j| (j, acc[j as usize])).collect();
            for &j in &touched {
                acc[j as usize] = T::zero();
            }
            touched.clear();
            rows.push(row);
        }
        Ok(Kernel {
            rows,
            log_pi: self.log_pi.clone(),
            labels: self.labels.clone(),
            lazy: false,
        })
    }

    /// mu' = mu P (distribution row-vector push-forward).
    pub fn push_dist(&self, mu: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|x| *x = T::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let m = mu[i];
            if m == T::zero() {
                continue;
            }
            for &(j, v) in row {
                out[j as usize] += m * v;
            }
        }
    }

    /// Dense copy (small kernels only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<T> {
        let n = self.n_states();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j as usize)] += v;
            }
        }
        m
    }
}
