//! Fundamental pair of the edge operator and the Hill discriminant half.
//!
//! On one edge the spectral equation is `-y'' + q(x) y = lambda y` for
//! `x` in `[0, a]`.  The cosine-like and sine-like solutions are fixed by
//!
//! ```text
//! C(0) = 1, C'(0) = 0        S(0) = 0, S'(0) = 1
//! ```
//!
//! and satisfy the Wronskian identity `C S' - S C' = 1` for every `lambda`.
//! For an even potential (`q(x) = q(a - x)`) the quantity
//! `phi(lambda) = S'(a, lambda)` is half the Hill discriminant of the
//! `a`-periodic extension of `q`, and the transfer matrix over `[0, a]`
//! factors through the midpoint:
//!
//! ```text
//! C(a)  = 2 C(a/2) S'(a/2) - 1 = 1 + 2 S(a/2) C'(a/2)
//! S(a)  = 2 S(a/2) S'(a/2)
//! C'(a) = 2 C(a/2) C'(a/2)
//! S'(a) = C(a)
//! ```
//!
//! A variant of the third identity that circulates with `S'(a/2)` in place of
//! `C'(a/2)` is wrong for general even `q` (it collapses to the first identity
//! and evaluates to `C(a) + 1`); [`half_identities`] reports both versions so
//! the failure stays visible.  See CALIBRATION.md.
//!
//! For `q = 0` the pair is `C = cos(rho x)`, `S = sin(rho x)/rho` with
//! `lambda = rho^2` (hyperbolic for `lambda < 0`), and the solver always uses
//! these closed forms.  For general `q` the two initial value problems are
//! integrated as one first-order system; the default method is fixed-step
//! classical RK4 with segment boundaries aligned to potential breakpoints, so
//! discontinuities never degrade the order.

use serde::{Deserialize, Serialize};

use crate::potentials::{PotentialKind, PotentialSpec};
use crate::{Error, Result};

/// Values of the fundamental pair at one evaluation point.
///
/// `a` records the evaluation point (the edge length for full-edge bases).
/// Synthetic bases produced by the randomized oracle carry `lambda = 0`,
/// `a = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeBasis {
    pub lambda: f64,
    pub a: f64,
    /// `C(a)`
    pub c: f64,
    /// `S(a)`
    pub s: f64,
    /// `C'(a)`
    pub cp: f64,
    /// `S'(a)`
    pub sp: f64,
}

impl EdgeBasis {
    pub fn from_values(lambda: f64, a: f64, c: f64, s: f64, cp: f64, sp: f64) -> Self {
        Self { lambda, a, c, s, cp, sp }
    }

    /// Defect of the Wronskian identity, `|c sp - s cp - 1|`.
    pub fn wronskian_residual(&self) -> f64 {
        (self.c * self.sp - self.s * self.cp - 1.0).abs()
    }

    pub(crate) fn unpack(&self) -> (f64, f64, f64, f64) {
        (self.c, self.s, self.cp, self.sp)
    }
}

/// Integration method for general potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Closed trigonometric/hyperbolic forms; zero potential only.
    ClosedFormZeroQ,
    /// Classical fixed-step RK4 (default).
    FixedStepRk4,
    /// Embedded Fehlberg 4(5) pair with local error control.
    AdaptiveRk,
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Step count over the full edge for the fixed-step method.
    pub step_count: usize,
    /// Local error tolerance for the adaptive method.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { method: SolverMethod::FixedStepRk4, step_count: 4096, tolerance: 1e-10 }
    }
}

/// `phi(lambda) = S'(a, lambda)` together with the evenness caveat.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiResult {
    pub value: f64,
    /// Set when `q` failed the symmetry check: `phi` is still `S'(a)` but
    /// loses its meaning as half the Hill discriminant.
    pub even_warning: bool,
}

/// Residuals of the half-interval identities at one `lambda`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalfIdentityReport {
    pub full: EdgeBasis,
    pub half: EdgeBasis,
    /// `|C(a) - (2 C(a/2) S'(a/2) - 1)|`
    pub a_product_form: f64,
    /// `|C(a) - (1 + 2 S(a/2) C'(a/2))|`
    pub a_sum_form: f64,
    /// `|S(a) - 2 S(a/2) S'(a/2)|`
    pub b: f64,
    /// Published variant `|C'(a) - 2 C(a/2) S'(a/2)|`; wrong in general,
    /// evaluates to `|C'(a) - C(a) - 1|`.
    pub c_published: f64,
    /// Corrected variant `|C'(a) - 2 C(a/2) C'(a/2)|`.
    pub c_corrected: f64,
    /// `|S'(a) - C(a)|`
    pub d: f64,
}

/// Six-component state: `[c, cp, s, sp, i1, i2]` where `i1 = int S^2` and
/// `i2 = int C S` feed the `lambda`-derivative of `phi` via
/// `d(S'(a))/d lambda = C'(a) i1 - S'(a) i2`.
type State = [f64; 6];

/// Solve both IVPs on `[0, a]`.
pub fn solve_basis(q: &PotentialSpec, lambda: f64, cfg: &SolverConfig) -> Result<EdgeBasis> {
    solve_basis_at(q, lambda, q.a(), cfg)
}

/// Solve both IVPs on `[0, x]` for `0 <= x <= a`.
pub fn solve_basis_at(
    q: &PotentialSpec,
    lambda: f64,
    x: f64,
    cfg: &SolverConfig,
) -> Result<EdgeBasis> {
    let st = solve_state(q, lambda, x, cfg)?;
    Ok(EdgeBasis { lambda, a: x, c: st[0], s: st[2], cp: st[1], sp: st[3] })
}

/// `phi(lambda) = S'(a)` with the evenness warning flag.
pub fn phi(q: &PotentialSpec, lambda: f64, cfg: &SolverConfig) -> Result<PhiResult> {
    let basis = solve_basis(q, lambda, cfg)?;
    Ok(PhiResult { value: basis.sp, even_warning: !q.is_even() })
}

/// `phi` and `d phi / d lambda`, via closed forms for the zero potential and
/// the variation-of-parameters quadrature otherwise.
pub fn phi_with_derivative(
    q: &PotentialSpec,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    if matches!(q.kind(), PotentialKind::Zero) {
        let a = q.a();
        return Ok((zero_q_phi(lambda, a), zero_q_dphi(lambda, a)));
    }
    let st = solve_state(q, lambda, q.a(), cfg)?;
    Ok((st[3], st[1] * st[4] - st[3] * st[5]))
}

/// Basis values and `d phi / d lambda` from a single integration pass;
/// the derivative feeds Hermite interpolation of spectral scans.
pub fn basis_with_dphi(
    q: &PotentialSpec,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<(EdgeBasis, f64)> {
    if matches!(q.kind(), PotentialKind::Zero) {
        let a = q.a();
        let (c, s, cp, sp) = zero_q_basis(lambda, a);
        return Ok((EdgeBasis { lambda, a, c, s, cp, sp }, zero_q_dphi(lambda, a)));
    }
    let st = solve_state(q, lambda, q.a(), cfg)?;
    let basis = EdgeBasis { lambda, a: q.a(), c: st[0], s: st[2], cp: st[1], sp: st[3] };
    Ok((basis, st[1] * st[4] - st[3] * st[5]))
}

/// Residuals of the half-interval identities at `lambda`.
pub fn half_identities(
    q: &PotentialSpec,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<HalfIdentityReport> {
    let a = q.a();
    let full = solve_basis_at(q, lambda, a, cfg)?;
    let half = solve_basis_at(q, lambda, a / 2.0, cfg)?;
    Ok(HalfIdentityReport {
        full,
        half,
        a_product_form: (full.c - (2.0 * half.c * half.sp - 1.0)).abs(),
        a_sum_form: (full.c - (1.0 + 2.0 * half.s * half.cp)).abs(),
        b: (full.s - 2.0 * half.s * half.sp).abs(),
        c_published: (full.cp - 2.0 * half.c * half.sp).abs(),
        c_corrected: (full.cp - 2.0 * half.c * half.cp).abs(),
        d: (full.sp - full.c).abs(),
    })
}

// ----------------------------------------------------------------- internals

fn solve_state(q: &PotentialSpec, lambda: f64, x: f64, cfg: &SolverConfig) -> Result<State> {
    if !lambda.is_finite() {
        return Err(Error::Numeric(format!("non-finite lambda {lambda}")));
    }
    if !(0.0..=q.a() * (1.0 + 1e-12)).contains(&x) {
        return Err(Error::Domain { x, a: q.a() });
    }
    if matches!(q.kind(), PotentialKind::Zero) {
        return Ok(zero_q_state(lambda, x));
    }
    if cfg.method == SolverMethod::ClosedFormZeroQ {
        return Err(Error::Unsupported(
            "closed-form solver requires the zero potential".into(),
        ));
    }
    let mut state: State = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    for seg in segments(q, x) {
        let len = seg.x1 - seg.x0;
        if len <= 0.0 {
            continue;
        }
        match cfg.method {
            SolverMethod::FixedStepRk4 => {
                let frac = len / x;
                let n = ((cfg.step_count as f64 * frac).ceil() as usize).max(2);
                rk4_segment(q, &seg, lambda, n, &mut state)?;
            }
            SolverMethod::AdaptiveRk => {
                rkf45_segment(q, &seg, lambda, cfg.tolerance, &mut state)?;
            }
            SolverMethod::ClosedFormZeroQ => unreachable!(),
        }
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "integration diverged at lambda = {lambda}"
        )));
    }
    Ok(state)
}

struct Segment {
    x0: f64,
    x1: f64,
    /// Constant potential value on the segment, when known exactly.
    q_const: Option<f64>,
}

/// Split `[0, x]` along potential breakpoints so no RK step straddles a jump.
fn segments(q: &PotentialSpec, x: f64) -> Vec<Segment> {
    match q.kind() {
        PotentialKind::PiecewiseConstant { breakpoints, values } => {
            let mut segs = Vec::new();
            for (k, v) in values.iter().enumerate() {
                let lo = breakpoints[k];
                let hi = breakpoints[k + 1].min(x);
                if hi > lo {
                    segs.push(Segment { x0: lo, x1: hi, q_const: Some(*v) });
                }
                if breakpoints[k + 1] >= x {
                    break;
                }
            }
            segs
        }
        _ => vec![Segment { x0: 0.0, x1: x, q_const: None }],
    }
}

fn q_at(q: &PotentialSpec, seg: &Segment, x: f64) -> f64 {
    match seg.q_const {
        Some(v) => v,
        // clamp guards against roundoff just past the segment end
        None => q.evaluate(x.clamp(0.0, q.a())).unwrap_or(0.0),
    }
}

fn deriv(w: f64, y: &State) -> State {
    // w = q - lambda;  y = [c, cp, s, sp, i1, i2]
    [y[1], w * y[0], y[3], w * y[2], y[2] * y[2], y[0] * y[2]]
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    let mut out = *y;
    for i in 0..6 {
        out[i] += h * k[i];
    }
    out
}

fn rk4_segment(
    q: &PotentialSpec,
    seg: &Segment,
    lambda: f64,
    n: usize,
    state: &mut State,
) -> Result<()> {
    let h = (seg.x1 - seg.x0) / n as f64;
    for i in 0..n {
        let x0 = seg.x0 + i as f64 * h;
        let w0 = q_at(q, seg, x0) - lambda;
        let wm = q_at(q, seg, x0 + 0.5 * h) - lambda;
        let w1 = q_at(q, seg, x0 + h) - lambda;
        let k1 = deriv(w0, state);
        let k2 = deriv(wm, &axpy(state, 0.5 * h, &k1));
        let k3 = deriv(wm, &axpy(state, 0.5 * h, &k2));
        let k4 = deriv(w1, &axpy(state, h, &k3));
        for j in 0..6 {
            state[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(())
}

fn rkf45_segment(
    q: &PotentialSpec,
    seg: &Segment,
    lambda: f64,
    tol: f64,
    state: &mut State,
) -> Result<()> {
    let tol = tol.max(1e-14);
    let mut x = seg.x0;
    let mut h = (seg.x1 - seg.x0) / 16.0;
    let h_min = (seg.x1 - seg.x0) * 1e-12;
    let mut evals = 0usize;
    while x < seg.x1 {
        if evals > 4_000_000 {
            return Err(Error::Numeric("adaptive integrator stalled".into()));
        }
        h = h.min(seg.x1 - x);
        let f = |xx: f64, y: &State| deriv(q_at(q, seg, xx) - lambda, y);
        let k1 = f(x, state);
        let k2 = f(x + h / 4.0, &axpy(state, h / 4.0, &k1));
        let y3 = {
            let mut y = *state;
            for i in 0..6 {
                y[i] += h * (3.0 * k1[i] + 9.0 * k2[i]) / 32.0;
            }
            y
        };
        let k3 = f(x + 3.0 * h / 8.0, &y3);
        let y4 = {
            let mut y = *state;
            for i in 0..6 {
                y[i] += h * (1932.0 * k1[i] - 7200.0 * k2[i] + 7296.0 * k3[i]) / 2197.0;
            }
            y
        };
        let k4 = f(x + 12.0 * h / 13.0, &y4);
        let y5 = {
            let mut y = *state;
            for i in 0..6 {
                y[i] += h
                    * (439.0 / 216.0 * k1[i] - 8.0 * k2[i] + 3680.0 / 513.0 * k3[i]
                        - 845.0 / 4104.0 * k4[i]);
            }
            y
        };
        let k5 = f(x + h, &y5);
        let y6 = {
            let mut y = *state;
            for i in 0..6 {
                y[i] += h
                    * (-8.0 / 27.0 * k1[i] + 2.0 * k2[i] - 3544.0 / 2565.0 * k3[i]
                        + 1859.0 / 4104.0 * k4[i]
                        - 11.0 / 40.0 * k5[i]);
            }
            y
        };
        let k6 = f(x + h / 2.0, &y6);
        evals += 6;

        let mut err: f64 = 0.0;
        let mut y_next = *state;
        for i in 0..6 {
            let hi = h
                * (16.0 / 135.0 * k1[i] + 6656.0 / 12825.0 * k3[i]
                    + 28561.0 / 56430.0 * k4[i]
                    - 9.0 / 50.0 * k5[i]
                    + 2.0 / 55.0 * k6[i]);
            let lo = h
                * (25.0 / 216.0 * k1[i] + 1408.0 / 2565.0 * k3[i] + 2197.0 / 4104.0 * k4[i]
                    - 1.0 / 5.0 * k5[i]);
            y_next[i] += hi;
            err = err.max((hi - lo).abs() / (1.0 + y_next[i].abs()));
        }
        if err <= tol || h <= h_min {
            *state = y_next;
            x += h;
        }
        let scale = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
        h = (h * scale.clamp(0.2, 5.0)).max(h_min);
    }
    Ok(())
}

// ------------------------------------------------------- zero-q closed forms

/// `|lambda| a^2` below which the series branch replaces trig/hyperbolic.
const SERIES_SWITCH: f64 = 1e-8;

fn zero_q_state(lambda: f64, x: f64) -> State {
    let (c, s, cp, sp) = zero_q_basis(lambda, x);
    // i1 = int_0^x S^2, i2 = int_0^x C S; only the dphi combination
    // cp*i1 - sp*i2 is consumed, so mild cancellation here is harmless.
    let (i1, i2) = if lambda.abs() * x * x < SERIES_SWITCH {
        (x * x * x / 3.0, x * x / 2.0)
    } else if lambda > 0.0 {
        let r = lambda.sqrt();
        let (sn, cn) = (r * x).sin_cos();
        ((x / 2.0 - sn * cn / (2.0 * r)) / lambda, sn * sn / (2.0 * lambda))
    } else {
        let k = (-lambda).sqrt();
        let sh = (k * x).sinh();
        let ch = (k * x).cosh();
        ((sh * ch / (2.0 * k) - x / 2.0) / (k * k), sh * sh / (2.0 * k * k))
    };
    [c, cp, s, sp, i1, i2]
}

/// Closed-form fundamental pair for `q = 0` at position `x`.
pub fn zero_q_basis(lambda: f64, x: f64) -> (f64, f64, f64, f64) {
    if lambda.abs() * x * x < SERIES_SWITCH {
        // C = cos(rho x), S = sin(rho x)/rho expanded around lambda = 0;
        // C' = -lambda S and S' = C hold exactly for q = 0.
        let u = lambda * x * x;
        let c = 1.0 - u / 2.0 * (1.0 - u / 12.0 * (1.0 - u / 30.0));
        let s = x * (1.0 - u / 6.0 * (1.0 - u / 20.0 * (1.0 - u / 42.0)));
        (c, s, -lambda * s, c)
    } else if lambda > 0.0 {
        let r = lambda.sqrt();
        let (sn, cn) = (r * x).sin_cos();
        (cn, sn / r, -r * sn, cn)
    } else {
        let k = (-lambda).sqrt();
        let sh = (k * x).sinh();
        let ch = (k * x).cosh();
        (ch, sh / k, k * sh, ch)
    }
}

pub(crate) fn zero_q_phi(lambda: f64, a: f64) -> f64 {
    zero_q_basis(lambda, a).3
}

pub(crate) fn zero_q_dphi(lambda: f64, a: f64) -> f64 {
    if lambda.abs() * a * a < SERIES_SWITCH {
        let a2 = a * a;
        -a2 / 2.0 * (1.0 - lambda * a2 / 6.0 * (1.0 - lambda * a2 * 3.0 / 40.0))
    } else if lambda > 0.0 {
        let r = lambda.sqrt();
        -a * (r * a).sin() / (2.0 * r)
    } else {
        let k = (-lambda).sqrt();
        -a * (k * a).sinh() / (2.0 * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;
    use std::f64::consts::PI;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn zero_basis_at_pi_squared() {
        let q = PotentialSpec::zero(1.0).unwrap();
        let b = solve_basis(&q, PI * PI, &cfg()).unwrap();
        assert!((b.c + 1.0).abs() < 1e-14);
        assert!(b.s.abs() < 1e-15);
        assert!(b.cp.abs() < 1e-14);
        assert!((b.sp + 1.0).abs() < 1e-14);
        assert!(b.wronskian_residual() < 1e-14);
    }

    #[test]
    fn phi_at_zero_lambda_is_one() {
        let q = PotentialSpec::zero(1.0).unwrap();
        let p = phi(&q, 0.0, &cfg()).unwrap();
        assert!((p.value - 1.0).abs() < 1e-15);
        assert!(!p.even_warning);
    }

    #[test]
    fn series_branch_is_continuous_with_trig_branch() {
        for &x in &[0.3, 1.0, 1.43] {
            for &l in &[1e-8, -1e-8, 9.9e-9, -9.9e-9] {
                let (c, s, cp, sp) = zero_q_basis(l, x);
                let r = num_complex::Complex64::new(l, 0.0).sqrt();
                let z = r * x;
                let c_ref = z.cos().re;
                let s_ref = if l >= 0.0 {
                    (z.sin() / r).re
                } else {
                    ((z.sin()) / r).re
                };
                assert!((c - c_ref).abs() < 1e-13);
                assert!((s - s_ref).abs() < 1e-13);
                assert!((cp + l * s).abs() < 1e-13);
                assert!((sp - c).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_shift_matches_closed_form() {
        // phi for constant potential c is phi_0(lambda - c)
        let c = -3.0;
        let q = PotentialSpec::piecewise_constant(1.0, vec![0.0, 1.0], vec![c], true).unwrap();
        for &l in &[-10.0, -2.9, 0.0, 4.0, 30.0, 200.0] {
            let got = phi(&q, l, &cfg()).unwrap().value;
            let want = zero_q_phi(l - c, 1.0);
            assert!((got - want).abs() < 1e-10, "lambda={l}: {got} vs {want}");
        }
    }

    #[test]
    fn rk4_wronskian_stays_small_for_graphene() {
        let q = PotentialSpec::graphene_with_bond(1.43, 1.43).unwrap();
        for &l in &[-50.0, -1.0, 3.0, 77.0, 500.0] {
            let b = solve_basis(&q, l, &cfg()).unwrap();
            assert!(b.wronskian_residual() < 1e-9, "lambda={l}");
        }
    }

    #[test]
    fn adaptive_agrees_with_fixed_step() {
        let q = PotentialSpec::graphene_with_bond(1.43, 1.43).unwrap();
        let fixed = cfg();
        let adaptive = SolverConfig {
            method: SolverMethod::AdaptiveRk,
            tolerance: 1e-12,
            ..fixed
        };
        for &l in &[-5.0, 2.0, 60.0] {
            let b1 = solve_basis(&q, l, &fixed).unwrap();
            let b2 = solve_basis(&q, l, &adaptive).unwrap();
            assert!((b1.c - b2.c).abs() < 1e-8);
            assert!((b1.s - b2.s).abs() < 1e-8);
            assert!((b1.cp - b2.cp).abs() < 1e-7);
            assert!((b1.sp - b2.sp).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_method_rejects_nonzero_potential() {
        let q = PotentialSpec::graphene(1.0).unwrap();
        let bad = SolverConfig { method: SolverMethod::ClosedFormZeroQ, ..cfg() };
        assert!(matches!(
            solve_basis(&q, 1.0, &bad),
            Err(crate::Error::Unsupported(_))
        ));
    }

    #[test]
    fn half_identities_hold_for_even_potentials() {
        let q = PotentialSpec::piecewise_constant(
            1.0,
            vec![0.0, 0.3, 0.7, 1.0],
            vec![2.0, -1.5, 2.0],
            true,
        )
        .unwrap();
        for &l in &[-8.0, 0.5, 12.0, 90.0] {
            let r = half_identities(&q, l, &cfg()).unwrap();
            assert!(r.a_product_form < 1e-9, "a1 lambda={l}");
            assert!(r.a_sum_form < 1e-9, "a2 lambda={l}");
            assert!(r.b < 1e-9, "b lambda={l}");
            assert!(r.c_corrected < 1e-9, "c' lambda={l}");
            assert!(r.d < 1e-9, "d lambda={l}");
        }
    }

    #[test]
    fn published_c_variant_fails_at_zero_q() {
        // At q = 0, lambda = 2: the published variant evaluates to
        // |C'(a) - C(a) - 1|, far from zero.
        let q = PotentialSpec::zero(1.0).unwrap();
        let r = half_identities(&q, 2.0, &cfg()).unwrap();
        let expected = (r.full.cp - r.full.c - 1.0).abs();
        assert!((r.c_published - expected).abs() < 1e-12);
        assert!(r.c_published > 0.1);
        assert!(r.c_corrected < 1e-12);
    }

    #[test]
    fn dphi_matches_finite_difference() {
        let q = PotentialSpec::graphene_with_bond(1.43, 1.43).unwrap();
        let h = 1e-6;
        for &l in &[-4.0, 1.0, 25.0] {
            let (_, d) = phi_with_derivative(&q, l, &cfg()).unwrap();
            let hi = phi(&q, l + h, &cfg()).unwrap().value;
            let lo = phi(&q, l - h, &cfg()).unwrap().value;
            let fd = (hi - lo) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6, "lambda={l}: {d} vs {fd}");
        }
    }
}
