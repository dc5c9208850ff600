//! Critical-point analysis of the free-energy density, critical curves, and
//! the stripe sets used by the conductance bounds.
//!
//! Everything here works in the (r, t) chart of the simplex:
//! a_1 = r t, a_{-1} = (1-r) t, a_0 = 1 - t, in which the negated free energy
//! F(r, t) = beta t (1 - K t (1-2r)^2) + t H(r) + H(t)
//! (H the binary entropy) has stationarity conditions
//!
//!   (eins)  4 beta K t (2r - 1) = log(r / (1-r))
//!   (zwei)  1/t - 1 = e^beta sqrt(r (1-r))
//!
//! Off-center roots are isolated in the logit variable y = log(r/(1-r)),
//! which stays well-conditioned even when 1 - r underflows (large beta).
//! The structure of the problem guarantees at most two off-center roots on
//! r > 1/2; the sign-scan grid is a safety net on top of that fact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MacroSpace, PhasePoint, TypeVector};
use crate::scalar::{log_factorials, log_sum_exp, sc, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error("beta = {0} outside the domain of the second-order curve (0, log 4]")]
    BetaOutOfRange(f64),
    #[error("k = {0} outside the invertible range of the requested curve")]
    KOutOfRange(f64),
    #[error("beta = {0} must exceed log 4 for the first-order curve")]
    BetaBelowTricritical(f64),
    #[error("no bracket for the equal-height condition at beta = {beta}: height difference is {lo} .. {hi}")]
    NoBracket { beta: f64, lo: f64, hi: f64 },
    #[error("more than two off-center stationary points detected (numerical noise?)")]
    TooManyRoots,
    #[error("no discontinuous jump detected: K = {0} lies outside the first-order window")]
    NoJump(f64),
    #[error("no epsilon satisfies stripe unimodality for k = {0}")]
    NoUnimodalStripe(f64),
}

/// Classification of a stationary point of f (not of F; signs are flipped
/// relative to the Hessian of F).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    /// Local maximum of f (local minimum of F).
    Maximum,
    Saddle,
    /// Local minimum of f.
    Minimum,
}

/// Transition order associated with a multimodal phase point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionOrder {
    None,
    First,
    Second,
}

/// A stationary point of the free energy in (r, t) coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub r: T,
    pub t: T,
    /// logit(r); the primary unknown, exact even where r rounds to 1.
    pub logit_r: T,
    pub a: TypeVector<T>,
    pub f_value: T,
    pub kind: PointKind,
    /// |eins residual| after polishing.
    pub residual: T,
}

impl<T: Scalar> CriticalPoint<T> {
    /// a_1 - a_{-1} >= 0 for the r >= 1/2 representative.
    pub fn z(&self) -> T {
        self.a.z()
    }

    /// Mirror image (r, t) -> (1-r, t); same f-value and kind.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.r = T::one() - self.r;
        m.logit_r = -self.logit_r;
        m.a = self.a.mirrored();
        m
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseClassification<T> {
    pub n_maxima: usize,
    pub order: TransitionOrder,
    /// Maxima only, off-center ones listed with their mirror images.
    pub maxima: Vec<CriticalPoint<T>>,
    /// Set when (beta, K) coincides with the tricritical point.
    pub tricritical: bool,
}

/// Central tolerance record; defaults reproduce the reported digits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LandscapeTols {
    /// Target residual for polished roots of eins.
    pub root_residual: f64,
    /// Bisection tolerance for the critical curves (in K or beta).
    pub bisection: f64,
    /// Sign-scan grid size for off-center roots (spec floor: 1e4).
    pub scan_points: usize,
    /// Grid used when scanning boundary lines of a stripe.
    pub boundary_scan: usize,
}

impl Default for LandscapeTols {
    fn default() -> Self {
        Self { root_residual: 1e-12, bisection: 1e-9, scan_points: 20_000, boundary_scan: 4_001 }
    }
}

/// Second-order critical curve K_c^(2)(beta) = (e^beta + 2) / (4 beta),
/// defined for 0 < beta <= log 4. At beta = log 4 this is the tricritical
/// coupling 3 / (2 log 4).
pub fn k2_critical<T: Scalar>(beta: T) -> Result<T, LandscapeError> {
    if beta <= T::zero() || beta > beta_tricritical::<T>() + sc(1e-12) {
        return Err(LandscapeError::BetaOutOfRange(beta.f64()));
    }
    Ok((beta.exp() + sc(2.0)) / (sc::<T>(4.0) * beta))
}

/// beta_c = log 4.
pub fn beta_tricritical<T: Scalar>() -> T {
    sc::<T>(4.0).ln()
}

/// K_c = K_c^(2)(log 4) = 3 / (2 log 4).
pub fn k_tricritical<T: Scalar>() -> T {
    sc::<T>(3.0) / (sc::<T>(2.0) * beta_tricritical::<T>())
}

/// Inverse of the second-order curve on (0, log 4]: the beta at which a given
/// K > K_c crosses from unimodal to bimodal. K_c^(2) is strictly decreasing
/// there, so bisection applies.
pub fn beta_c2_of_k<T: Scalar>(k: T) -> Result<T, LandscapeError> {
    let kc = k_tricritical::<T>();
    if k < kc {
        return Err(LandscapeError::KOutOfRange(k.f64()));
    }
    let mut lo = sc::<T>(1e-12);
    let mut hi = beta_tricritical::<T>();
    // g(beta) = K_c^(2)(beta) - k, decreasing from +inf to K_c - k <= 0
    for _ in 0..200 {
        let mid = (lo + hi) / sc(2.0);
        let g = (mid.exp() + sc(2.0)) / (sc::<T>(4.0) * mid) - k;
        if g > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < sc(1e-15) {
            break;
        }
    }
    Ok((lo + hi) / sc(2.0))
}

// ---- the (r, t) chart -------------------------------------------------

/// sqrt(r (1-r)) from the logit y, stable for |y| large.
#[inline]
fn w_of_y<T: Scalar>(y: T) -> T {
    // r(1-r) = e^{-y} / (1 + e^{-y})^2; evaluate at -|y| for stability
    let e = (-y.abs()).exp();
    e.sqrt() / (T::one() + e)
}

#[inline]
fn t_of_y<T: Scalar>(y: T, beta: T) -> T {
    T::one() / (T::one() + beta.exp() * w_of_y(y))
}

/// Type vector of the stationary point with logit y (r >= 1/2 side for y >= 0).
/// a_0 is computed as u/(1+u) with u = e^beta w rather than 1 - t, which
/// stays positive even where t rounds to 1.
fn typevec_of_y<T: Scalar>(y: T, beta: T) -> TypeVector<T> {
    let u = beta.exp() * w_of_y(y);
    let t = T::one() / (T::one() + u);
    let em = (-y).exp();
    // r = 1/(1+e^{-y}), 1-r = e^{-y}/(1+e^{-y})
    let r = T::one() / (T::one() + em);
    let one_minus_r = em / (T::one() + em);
    TypeVector { a_minus: one_minus_r * t, a_zero: u / (T::one() + u), a_plus: r * t }
}

/// eins residual g(y) = y - 4 beta K tanh(y/2) / (1 + e^beta w(y)).
#[inline]
fn eins_gap<T: Scalar>(y: T, p: &PhasePoint<T>) -> T {
    let phi = sc::<T>(4.0) * p.beta * p.k * (y / sc(2.0)).tanh()
        / (T::one() + p.beta.exp() * w_of_y(y));
    y - phi
}

/// Nominator of det(Hessian of F) at a stationary point; its sign classifies.
#[inline]
fn det_nominator<T: Scalar>(w: T, p: &PhasePoint<T>) -> T {
    let eb = p.beta.exp();
    T::one()
        + sc::<T>(2.0) * eb * w * (T::one() - p.beta * p.k)
        + w * w * ((sc::<T>(2.0) * p.beta).exp() - sc::<T>(8.0) * p.beta * p.k)
}

/// Sign of d^2F/dr^2 at a stationary point: 1 + e^beta w - 8 beta K w^2
/// (positive factor t^2/w^2 dropped).
#[inline]
fn d2r_sign_term<T: Scalar>(w: T, p: &PhasePoint<T>) -> T {
    T::one() + p.beta.exp() * w - sc::<T>(8.0) * p.beta * p.k * w * w
}

fn classify_off_center<T: Scalar>(y: T, p: &PhasePoint<T>) -> PointKind {
    let w = w_of_y(y);
    let det = det_nominator(w, p);
    if det < T::zero() {
        PointKind::Saddle
    } else if d2r_sign_term(w, p) > T::zero() {
        // positive definite Hessian of F: minimum of F = maximum of f
        PointKind::Maximum
    } else {
        PointKind::Minimum
    }
}

fn point_from_y<T: Scalar>(y: T, p: &PhasePoint<T>, kind: PointKind, residual: T) -> CriticalPoint<T> {
    let a = typevec_of_y(y, p.beta);
    let t = t_of_y(y, p.beta);
    let em = (-y).exp();
    CriticalPoint {
        r: T::one() / (T::one() + em),
        t,
        logit_r: y,
        f_value: crate::model::free_energy(&a, p),
        a,
        kind,
        residual,
    }
}

/// Whether r = 1/2 is a local maximum of f: exactly the predicate
/// 4 beta K <= 2 + e^beta.
pub fn center_is_maximum<T: Scalar>(p: &PhasePoint<T>) -> bool {
    sc::<T>(4.0) * p.beta * p.k <= sc::<T>(2.0) + p.beta.exp()
}

/// All stationary points of f at the given phase point: the r = 1/2
/// candidate with t = 2/(2+e^beta), plus every off-center root of eins on
/// r in (1/2, 1), each mirrored to 1 - r.
pub fn critical_points<T: Scalar>(p: &PhasePoint<T>) -> Result<Vec<CriticalPoint<T>>, LandscapeError> {
    critical_points_with(p, &LandscapeTols::default())
}

pub fn critical_points_with<T: Scalar>(
    p: &PhasePoint<T>,
    tols: &LandscapeTols,
) -> Result<Vec<CriticalPoint<T>>, LandscapeError> {
    let mut out = Vec::new();

    // center candidate
    let t0 = sc::<T>(2.0) / (sc::<T>(2.0) + p.beta.exp());
    let a0 = TypeVector { a_minus: t0 / sc(2.0), a_zero: T::one() - t0, a_plus: t0 / sc(2.0) };
    let kind = if center_is_maximum(p) { PointKind::Maximum } else { PointKind::Saddle };
    out.push(CriticalPoint {
        r: sc(0.5),
        t: t0,
        logit_r: T::zero(),
        f_value: crate::model::free_energy(&a0, p),
        a: a0,
        kind,
        residual: T::zero(),
    });

    // off-center roots: sign scan in y over (0, 4 beta K], then bisection
    let y_max = sc::<T>(4.0) * p.beta * p.k + T::one();
    let n = tols.scan_points.max(10_000);
    let step = y_max / sc(n as f64);
    let mut roots: Vec<T> = Vec::new();
    let mut y_prev = step / sc(1e6);
    let mut g_prev = eins_gap(y_prev, p);
    for i in 1..=n {
        let y = step * sc(i as f64);
        let g = eins_gap(y, p);
        if g_prev == T::zero() {
            roots.push(y_prev);
        } else if g_prev * g < T::zero() {
            // bisection polish
            let (mut lo, mut hi) = (y_prev, y);
            let (mut glo, _) = (g_prev, g);
            for _ in 0..200 {
                let mid = (lo + hi) / sc(2.0);
                let gm = eins_gap(mid, p);
                if gm.abs() <= sc(tols.root_residual) {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if glo * gm < T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
                if hi - lo <= lo.abs() * sc(1e-16) {
                    break;
                }
            }
            roots.push((lo + hi) / sc(2.0));
        }
        y_prev = y;
        g_prev = g;
    }
    if roots.len() > 2 {
        return Err(LandscapeError::TooManyRoots);
    }
    for y in roots {
        let kind = classify_off_center(y, p);
        let cp = point_from_y(y, p, kind, eins_gap(y, p).abs());
        out.push(cp.mirrored());
        out.push(cp);
    }
    Ok(out)
}

/// Runs the solver and labels the result. The order is read off the curve
/// that applies at this beta: second-order for beta <= log 4, first-order
/// above; unimodal points carry no order.
pub fn classify_phase<T: Scalar>(p: &PhasePoint<T>) -> Result<PhaseClassification<T>, LandscapeError> {
    let pts = critical_points(p)?;
    let maxima: Vec<CriticalPoint<T>> =
        pts.into_iter().filter(|c| c.kind == PointKind::Maximum).collect();
    let n_maxima = maxima.len();
    let order = if n_maxima <= 1 {
        TransitionOrder::None
    } else if p.beta <= beta_tricritical::<T>() {
        TransitionOrder::Second
    } else {
        TransitionOrder::First
    };
    let tricritical = (p.beta - beta_tricritical::<T>()).abs() <= sc(1e-9)
        && (p.k - k_tricritical::<T>()).abs() <= sc(1e-9);
    Ok(PhaseClassification { n_maxima, order, maxima, tricritical })
}

/// f(off-center max) - f(center max), the equal-height functional behind the
/// first-order curve. +inf when the center is unstable, -inf when no
/// off-center maximum exists. Strictly increasing in K where finite (the
/// envelope derivative is beta z^2).
fn height_diff<T: Scalar>(p: &PhasePoint<T>, tols: &LandscapeTols) -> Result<T, LandscapeError> {
    let pts = critical_points_with(p, tols)?;
    let center = pts.iter().find(|c| c.logit_r == T::zero()).expect("center always present");
    let best_off = pts
        .iter()
        .filter(|c| c.kind == PointKind::Maximum && c.logit_r > T::zero())
        .map(|c| c.f_value)
        .fold(None::<T>, |acc, v| Some(acc.map_or(v, |a| if v > a { v } else { a })));
    match (center.kind == PointKind::Maximum, best_off) {
        (true, Some(f_off)) => Ok(f_off - center.f_value),
        (true, None) => Ok(sc(f64::NEG_INFINITY)),
        (false, Some(_)) => Ok(sc(f64::INFINITY)),
        (false, None) => Err(LandscapeError::NoBracket {
            beta: p.beta.f64(),
            lo: f64::NAN,
            hi: f64::NAN,
        }),
    }
}

/// First-order critical coupling K_c^(1)(beta) for beta > log 4: the K at
/// which the center maximum and the symmetric off-center maxima have equal
/// f-values. Found by bisection in log10(K - 1), which resolves the
/// exponentially fast approach of the curve to its large-beta limit.
///
/// When even K = 1 + 1e-14 already puts the off-center maxima on top, the
/// curve has numerically saturated at its limit and that lower edge is
/// returned.
pub fn k1_critical<T: Scalar>(beta: T) -> Result<T, LandscapeError> {
    k1_critical_with(beta, &LandscapeTols::default())
}

pub fn k1_critical_with<T: Scalar>(beta: T, tols: &LandscapeTols) -> Result<T, LandscapeError> {
    if beta <= beta_tricritical::<T>() {
        return Err(LandscapeError::BetaBelowTricritical(beta.f64()));
    }
    let k_of = |u: T| T::one() + sc::<T>(10.0).powf(u);
    let mut lo_u = sc::<T>(-14.0);
    let mut hi_u = sc::<T>(0.3f64.log10());
    let d_lo = height_diff(&PhasePoint { beta, k: k_of(lo_u) }, tols)?;
    if d_lo >= T::zero() {
        // saturated at the numeric resolution of K - 1
        return Ok(k_of(lo_u));
    }
    let d_hi = height_diff(&PhasePoint { beta, k: k_of(hi_u) }, tols)?;
    if d_hi <= T::zero() {
        return Err(LandscapeError::NoBracket { beta: beta.f64(), lo: d_lo.f64(), hi: d_hi.f64() });
    }
    for _ in 0..200 {
        let mid = (lo_u + hi_u) / sc(2.0);
        let d = height_diff(&PhasePoint { beta, k: k_of(mid) }, tols)?;
        if d < T::zero() {
            lo_u = mid;
        } else {
            hi_u = mid;
        }
        if k_of(hi_u) - k_of(lo_u) <= sc::<T>(tols.bisection) * sc(1e-1) {
            break;
        }
    }
    Ok(k_of((lo_u + hi_u) / sc(2.0)))
}

/// Inverse of the first-order curve: the beta at which K_c^(1)(beta) = k.
/// Valid only on the image of the curve (K_low, K_c); K_low is estimated by
/// evaluating the curve at beta = 50.
pub fn beta_c1_of_k<T: Scalar>(k: T) -> Result<T, LandscapeError> {
    beta_c1_of_k_with(k, &LandscapeTols::default())
}

pub fn beta_c1_of_k_with<T: Scalar>(k: T, tols: &LandscapeTols) -> Result<T, LandscapeError> {
    let k_low_est = k1_critical_with(sc::<T>(50.0), tols)?;
    if k <= k_low_est || k >= k_tricritical::<T>() {
        return Err(LandscapeError::KOutOfRange(k.f64()));
    }
    // k1 is nonincreasing in beta: bracket then bisect
    let mut lo = beta_tricritical::<T>() + sc(1e-9);
    let mut hi = sc::<T>(2.0);
    while k1_critical_with(hi, tols)? > k {
        lo = hi;
        hi *= sc(1.5);
        if hi > sc(64.0) {
            return Err(LandscapeError::KOutOfRange(k.f64()));
        }
    }
    for _ in 0..100 {
        let mid = (lo + hi) / sc(2.0);
        if k1_critical_with(mid, tols)? > k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= sc(tols.bisection) {
            break;
        }
    }
    Ok((lo + hi) / sc(2.0))
}

/// The equilibrium mode locations: the central mode
/// a_max(0) = (e^-beta, 1, e^-beta) / (1 + 2 e^-beta), and the off-center
/// pair when the phase is bimodal or trimodal.
#[derive(Debug, Clone)]
pub struct AMaxPoints<T> {
    pub center: TypeVector<T>,
    pub pair: Option<(TypeVector<T>, TypeVector<T>)>,
}

impl<T: Scalar> AMaxPoints<T> {
    /// z_alpha = a_plus - a_minus >= 0 of the off-center maximum.
    pub fn z_alpha(&self) -> Option<T> {
        self.pair.as_ref().map(|(_, plus)| plus.z())
    }
}

pub fn a_max_points<T: Scalar>(p: &PhasePoint<T>) -> Result<AMaxPoints<T>, LandscapeError> {
    let eb = (-p.beta).exp();
    let c = T::one() + sc::<T>(2.0) * eb;
    let center = TypeVector { a_minus: eb / c, a_zero: T::one() / c, a_plus: eb / c };
    let pts = critical_points(p)?;
    let best = pts
        .iter()
        .filter(|c| c.kind == PointKind::Maximum && c.logit_r > T::zero())
        .max_by(|a, b| a.f_value.partial_cmp(&b.f_value).unwrap());
    let pair = best.map(|cp| (cp.a.mirrored(), cp.a));
    Ok(AMaxPoints { center, pair })
}

/// Options for the stripe-width selection.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonOpts {
    /// Upper end of the beta grid, as a multiple of beta_c^(1)(K).
    pub beta_max_factor: f64,
    /// Grid resolution in beta.
    pub grid: usize,
}

impl Default for EpsilonOpts {
    fn default() -> Self {
        Self { beta_max_factor: 3.0, grid: 50 }
    }
}

/// Deterministic stripe half-width for the first-order window: half the
/// minimum over a beta grid of the |a_1 - a_{-1}| jump of the off-center
/// maximum, then clamped until stripe unimodality holds on the grid.
pub fn choose_epsilon<T: Scalar>(k: T, opts: &EpsilonOpts) -> Result<T, LandscapeError> {
    if k >= k_tricritical::<T>() {
        // continuous transition: the jump vanishes as beta decreases to the
        // critical curve, there is no uniform gap
        return Err(LandscapeError::NoJump(k.f64()));
    }
    let b1 = beta_c1_of_k(k)?;
    let bmax = b1 * sc(opts.beta_max_factor);
    let mut min_jump: Option<T> = None;
    let grid = opts.grid.max(2);
    for i in 0..grid {
        let frac = sc::<T>(i as f64) / sc((grid - 1) as f64);
        let beta = b1 + (bmax - b1) * frac;
        let p = PhasePoint { beta, k };
        let am = a_max_points(&p)?;
        match am.z_alpha() {
            Some(z) => {
                min_jump = Some(min_jump.map_or(z, |m| if z < m { z } else { m }));
            }
            None => return Err(LandscapeError::NoJump(k.f64())),
        }
    }
    let mut eps = min_jump.unwrap() / sc(2.0);
    // clamp until the stripe is unimodal across the grid
    'outer: for _ in 0..60 {
        for i in 0..grid {
            let frac = sc::<T>(i as f64) / sc((grid - 1) as f64);
            let beta = b1 + (bmax - b1) * frac;
            if !stripe_unimodal(&PhasePoint { beta, k }, eps) {
                eps *= sc(0.9);
                continue 'outer;
            }
        }
        return Ok(eps);
    }
    Err(LandscapeError::NoUnimodalStripe(k.f64()))
}

/// d f / d z along the magnetization coordinate at fixed t,
/// where a_{+/-1} = (t +/- z)/2.
fn df_dz<T: Scalar>(z: T, t: T, p: &PhasePoint<T>) -> T {
    sc::<T>(2.0) * p.beta * p.k * z - ((t + z) / (t - z)).ln() / sc(2.0)
}

fn f_on_line<T: Scalar>(z: T, t: T, p: &PhasePoint<T>) -> T {
    let a = TypeVector { a_minus: (t - z) / sc(2.0), a_zero: T::one() - t, a_plus: (t + z) / sc(2.0) };
    crate::model::free_energy(&a, p)
}

/// True iff f restricted to {|a_1 - a_{-1}| <= eps} has exactly one local
/// maximum. Checked on the restricted critical-point set (the diagonal mode
/// at a_1 = e^-beta/(1+2e^-beta), interior off-center maxima with |z| < eps)
/// plus a scan of the boundary line z = eps for one-sided maxima.
pub fn stripe_unimodal<T: Scalar>(p: &PhasePoint<T>, eps: T) -> bool {
    stripe_unimodal_with(p, eps, &LandscapeTols::default())
}

pub fn stripe_unimodal_with<T: Scalar>(p: &PhasePoint<T>, eps: T, tols: &LandscapeTols) -> bool {
    if eps <= T::zero() || eps >= T::one() {
        return false;
    }
    let mut modes = 0usize;

    // the diagonal ridge mode survives iff the center is stable in z
    if center_is_maximum(p) {
        modes += 1;
    }

    // interior off-center maxima inside the stripe
    if let Ok(pts) = critical_points_with(p, tols) {
        for c in &pts {
            if c.kind == PointKind::Maximum && c.logit_r > T::zero() && c.z() < eps {
                modes += 2; // the point and its mirror image
            }
        }
    } else {
        return false;
    }

    // boundary line z = eps: a local max along the line with f not
    // increasing inward counts as a restricted mode (its mirror too)
    let n = tols.boundary_scan.max(101);
    let mut prev_val: Option<T> = None;
    let mut vals: Vec<T> = Vec::with_capacity(n);
    let lo = eps + sc::<T>(1e-12);
    for i in 0..n {
        let t = lo + (T::one() - sc::<T>(1e-12) - lo) * sc::<T>(i as f64) / sc((n - 1) as f64);
        vals.push(f_on_line(eps, t, p));
        prev_val = Some(vals[i]);
    }
    let _ = prev_val;
    for i in 1..n - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let t = lo + (T::one() - sc::<T>(1e-12) - lo) * sc::<T>(i as f64) / sc((n - 1) as f64);
            if df_dz(eps, t, p) >= sc(-1e-12) {
                modes += 2;
            }
        }
    }
    modes == 1
}

/// Exact pi_beta(N_edge) / pi_beta(N) from the lumped weights, where
/// N = {|S_N| <= N eps} and N_edge = {N eps - 1 <= |S_N| <= N eps}.
/// Always <= 1 (the edge is contained in the stripe).
pub fn stripe_mass_ratio<T: Scalar>(p: &PhasePoint<T>, n: usize, eps: T) -> T {
    let space = MacroSpace::new(n);
    let lf = log_factorials::<T>(n);
    let cut = sc::<T>(n as f64) * eps;
    let mut stripe = Vec::new();
    let mut edge = Vec::new();
    for m in space.states() {
        let abs_s = sc::<T>(m.s.unsigned_abs() as f64);
        if abs_s <= cut {
            let lw = crate::model::log_class_weight(m, p, &lf);
            stripe.push(lw);
            if abs_s >= cut - T::one() {
                edge.push(lw);
            }
        }
    }
    (log_sum_exp(&edge) - log_sum_exp(&stripe)).exp()
}
