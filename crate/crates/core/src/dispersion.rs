//! Reduced dispersion relations for identical even potentials.
//!
//! With every edge carrying the same even potential, `S' = C` collapses the
//! characteristic determinant of each tiling to
//!
//! ```text
//! S(a)^p  *  poly(S'(a), Theta)  [ * (2 S'(a) + 1) for the trihexagonal ]
//! ```
//!
//! up to the unimodular prefactor and a constant (see
//! [`crate::chardet::even_reduction_scale`]).  Everything here is a pure
//! function of the two scalars `s = S(a)`, `sp = S'(a)` and the
//! quasimomentum; no differential equation is solved.
//!
//! The recurring coefficient is
//! `kappa = cos(theta1/2) cos(theta2/2) cos((theta1 - theta2)/2)`, tied to
//! the other trigonometric forms by [`triple_cos_identity`]:
//! `|1 + e^{i theta1} + e^{i theta2}|^2 = 3 + 2 Sigma cos = 1 + 8 kappa`.

use serde::Serialize;

use crate::chardet::{Quasimomentum, TilingId};
use crate::tolerances::TANGENT_ROOT_ACCEPT_TOL;
use crate::{Error, Result};

/// `cos(theta1/2) cos(theta2/2) cos((theta1 - theta2)/2)`.
pub fn kappa(theta: Quasimomentum) -> f64 {
    let (t1, t2) = (theta.theta1(), theta.theta2());
    (0.5 * t1).cos() * (0.5 * t2).cos() * (0.5 * (t1 - t2)).cos()
}

/// The three equivalent forms of `|1 + e^{i theta1} + e^{i theta2}|^2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleCosine {
    pub modulus_sq: f64,
    pub cosine_sum_form: f64,
    pub half_angle_form: f64,
}

impl TripleCosine {
    pub fn max_spread(&self) -> f64 {
        let lo = self.modulus_sq.min(self.cosine_sum_form).min(self.half_angle_form);
        let hi = self.modulus_sq.max(self.cosine_sum_form).max(self.half_angle_form);
        hi - lo
    }
}

/// Evaluate `|1 + e^{i theta1} + e^{i theta2}|^2` three ways.
pub fn triple_cos_identity(theta: Quasimomentum) -> TripleCosine {
    let (t1, t2) = (theta.theta1(), theta.theta2());
    let re = 1.0 + t1.cos() + t2.cos();
    let im = t1.sin() + t2.sin();
    TripleCosine {
        modulus_sq: re * re + im * im,
        cosine_sum_form: 3.0 + 2.0 * (t1.cos() + t2.cos() + (t1 - t2).cos()),
        half_angle_form: 1.0 + 8.0 * kappa(theta),
    }
}

/// The polynomial-in-`S'` factor of the reduced relation (the published
/// display form, without the `S` power and without the trihexagonal flat
/// factor).
pub fn band_poly(tiling: TilingId, sp: f64, theta: Quasimomentum) -> f64 {
    let (t1, t2) = (theta.theta1(), theta.theta2());
    match tiling {
        TilingId::Triangular => 3.0 * sp + 1.0 - 4.0 * kappa(theta),
        TilingId::ElongatedTriangular => {
            let c1 = t1.cos();
            25.0 * sp * sp - 20.0 * c1 * sp - 8.0 * kappa(theta) + 4.0 * c1 * c1 - 1.0
        }
        TilingId::TruncatedSquare => {
            let (c1, c2) = (t1.cos(), t2.cos());
            81.0 * sp.powi(4) - 54.0 * sp * sp - 12.0 * sp * (c1 + c2) + 1.0 - 4.0 * c1 * c2
        }
        TilingId::Trihexagonal => 2.0 * sp * sp - sp - kappa(theta),
        TilingId::Square => {
            let h = (0.5 * t1).cos() * (0.5 * t2).cos();
            sp * sp - h * h
        }
        TilingId::Hexagonal => 9.0 * sp * sp - 1.0 - 8.0 * kappa(theta),
    }
}

/// The extra `2 S' + 1` factor, present only for the trihexagonal tiling.
pub fn flat_factor(tiling: TilingId, sp: f64) -> Option<f64> {
    tiling.has_flat_band_factor().then(|| 2.0 * sp + 1.0)
}

/// One evaluation point of a reduced relation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReducedRelation {
    pub tiling: TilingId,
    /// `S(a)`
    pub s: f64,
    /// `S'(a)`
    pub sp: f64,
    pub theta: Quasimomentum,
}

/// Factor-by-factor breakdown of the reduced relation value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualParts {
    /// `s^p` with the tiling's `S` multiplicity.
    pub s_factor: f64,
    /// The polynomial factor [`band_poly`].
    pub poly_factor: f64,
    /// `2 sp + 1` where applicable.
    pub flat_factor: Option<f64>,
    /// Product of all factors, sign preserved.
    pub signed_product: f64,
    /// `|signed_product|`; zero exactly on the Bloch variety.
    pub residual: f64,
}

/// Evaluate the reduced relation and expose its factors separately.
pub fn reduced_residual(r: &ReducedRelation) -> ResidualParts {
    let s_factor = r.s.powi(r.tiling.s_power() as i32);
    let poly_factor = band_poly(r.tiling, r.sp, r.theta);
    let flat = flat_factor(r.tiling, r.sp);
    let signed_product = s_factor * poly_factor * flat.unwrap_or(1.0);
    ResidualParts {
        s_factor,
        poly_factor,
        flat_factor: flat,
        signed_product,
        residual: signed_product.abs(),
    }
}

/// Absolutely continuous spectrum membership: `sp` in the closed interval
/// `[m, 1]` with the tiling's lower bound `m`.
pub fn ac_membership(tiling: TilingId, sp: f64) -> bool {
    (tiling.band_floor()..=1.0).contains(&sp)
}

/// A quasimomentum at which the polynomial factor vanishes for the given
/// `sp`, or `None` when `sp` lies outside `[m, 1]`.
///
/// Construction follows the diagonal (`theta1 = theta2`) or antidiagonal
/// (`theta2 = -theta1`) one-parameter families on which the polynomial
/// factors through a single cosine:
///
/// * triangular (antidiagonal): `1 + 8 kappa = (2 cos theta + 1)^2`, so
///   `3 sp + 1 = 4 kappa` at `cos theta = (sqrt(6 sp + 3) - 1) / 2`;
/// * elongated triangular (antidiagonal): `sp` is a root exactly when
///   `cos theta1 = (5 sp - 1) / 4`; that family bottoms out at `-3/5`, so
///   below it the aligned family `theta2 = theta1 / 2` takes over, where
///   with `x = cos(theta1 / 2)` the lower root is `(4 x^2 - 2 x - 3) / 5`
///   and `x = (1 + sqrt(13 + 20 sp)) / 4` reaches down to `-13/20`;
/// * truncated square (diagonal): the quartic splits into two quadratics,
///   giving `cos theta = (9 sp^2 - 6 sp - 1) / 2` for `sp >= -1/3` and
///   `cos theta = -(9 sp^2 + 6 sp - 1) / 2` below;
/// * trihexagonal (antidiagonal): roots `(1 +/- |2 cos theta + 1|) / 4`,
///   inverted by `cos theta = 2 sp - 1` (upper) or `-2 sp` (lower);
/// * square (diagonal): `cos^2(theta/2) = |sp|`;
/// * hexagonal (antidiagonal): `|3 sp| = |2 cos theta + 1|`.
pub fn witness_theta(tiling: TilingId, sp: f64) -> Option<Quasimomentum> {
    if !ac_membership(tiling, sp) {
        return None;
    }
    let acos = |v: f64| v.clamp(-1.0, 1.0).acos();
    match tiling {
        TilingId::Triangular => {
            let t = acos((((6.0 * sp + 3.0).max(0.0)).sqrt() - 1.0) / 2.0);
            Some(Quasimomentum::new(t, -t))
        }
        TilingId::ElongatedTriangular => {
            if sp >= -0.6 {
                let t = acos((5.0 * sp - 1.0) / 4.0);
                Some(Quasimomentum::new(t, -t))
            } else {
                let x = (1.0 + (13.0 + 20.0 * sp).max(0.0).sqrt()) / 4.0;
                let t1 = 2.0 * acos(x);
                Some(Quasimomentum::new(t1, t1 / 2.0))
            }
        }
        TilingId::TruncatedSquare => {
            let c = if sp >= -1.0 / 3.0 {
                (9.0 * sp * sp - 6.0 * sp - 1.0) / 2.0
            } else {
                -(9.0 * sp * sp + 6.0 * sp - 1.0) / 2.0
            };
            let t = acos(c);
            Some(Quasimomentum::new(t, t))
        }
        TilingId::Trihexagonal => {
            let c = if sp >= 0.25 { 2.0 * sp - 1.0 } else { -2.0 * sp };
            let t = acos(c);
            Some(Quasimomentum::new(t, -t))
        }
        TilingId::Square => {
            let t = 2.0 * acos(sp.abs().sqrt());
            Some(Quasimomentum::new(t, t))
        }
        TilingId::Hexagonal => {
            let t = acos((3.0 * sp.abs() - 1.0) / 2.0);
            Some(Quasimomentum::new(t, -t))
        }
    }
}

/// A root of the polynomial factor in the `sp` variable at fixed `Theta`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpRoot {
    pub sp: f64,
    /// Double root: the polynomial touches zero without changing sign.
    pub tangent: bool,
}

/// All real roots of `band_poly(tiling, ., theta)`, ascending.
///
/// Closed forms everywhere except the truncated-square quartic, whose
/// stationary points have the exact parameterization
/// `sp_k = (2/3) cos((1/3) arccos((cos theta1 + cos theta2)/2) - 2 pi k/3)`;
/// the quartic is then bisected on the monotone intervals between them.
/// All roots lie in `[-1, 1]`: outside, the quartic equals
/// `(9 sp^2 - 1)^2 - 4 (3 sp + cos theta1)(3 sp + cos theta2) > 0`.
pub fn poly_roots_in_sp(tiling: TilingId, theta: Quasimomentum) -> Vec<SpRoot> {
    let (t1, t2) = (theta.theta1(), theta.theta2());
    match tiling {
        TilingId::Triangular => {
            vec![SpRoot { sp: (4.0 * kappa(theta) - 1.0) / 3.0, tangent: false }]
        }
        TilingId::ElongatedTriangular => {
            let r = (1.0 + 8.0 * kappa(theta)).max(0.0).sqrt();
            let c1 = t1.cos();
            quadratic_pair((2.0 * c1 - r) / 5.0, (2.0 * c1 + r) / 5.0)
        }
        TilingId::TruncatedSquare => quartic_roots(t1.cos(), t2.cos()),
        TilingId::Trihexagonal => {
            let r = (1.0 + 8.0 * kappa(theta)).max(0.0).sqrt();
            quadratic_pair((1.0 - r) / 4.0, (1.0 + r) / 4.0)
        }
        TilingId::Square => {
            let h = ((0.5 * t1).cos() * (0.5 * t2).cos()).abs();
            quadratic_pair(-h, h)
        }
        TilingId::Hexagonal => {
            let r = (1.0 + 8.0 * kappa(theta)).max(0.0).sqrt() / 3.0;
            quadratic_pair(-r, r)
        }
    }
}

fn quadratic_pair(lo: f64, hi: f64) -> Vec<SpRoot> {
    if (hi - lo).abs() < 1e-12 {
        vec![SpRoot { sp: 0.5 * (lo + hi), tangent: true }]
    } else {
        vec![SpRoot { sp: lo, tangent: false }, SpRoot { sp: hi, tangent: false }]
    }
}

fn quartic_roots(c1: f64, c2: f64) -> Vec<SpRoot> {
    let p = |sp: f64| {
        81.0 * sp * sp * sp * sp - 54.0 * sp * sp - 12.0 * sp * (c1 + c2) + 1.0 - 4.0 * c1 * c2
    };
    // stationary points of the quartic, descending: local min, max, min
    let psi = (((c1 + c2) / 2.0).clamp(-1.0, 1.0)).acos() / 3.0;
    let mut ext = [0.0f64; 3];
    for (k, e) in ext.iter_mut().enumerate() {
        *e = 2.0 / 3.0 * (psi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
    }
    ext.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bound = 1.0 + 1e-9;
    let nodes = [-bound, ext[0], ext[1], ext[2], bound];
    let mut roots: Vec<SpRoot> = Vec::new();
    let mut push = |sp: f64, tangent: bool| {
        if roots.iter().all(|r| (r.sp - sp).abs() > 1e-9) {
            roots.push(SpRoot { sp, tangent });
        }
    };
    for w in nodes.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let (mut flo, fhi) = (p(lo), p(hi));
        if flo == 0.0 {
            push(lo, false);
            continue;
        }
        if flo.signum() != fhi.signum() {
            // monotone interval: plain bisection
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = p(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), false);
        }
    }
    // tangencies: a stationary value within the acceptance tolerance is a
    // double root the sign scan cannot see
    for e in ext {
        if p(e).abs() <= TANGENT_ROOT_ACCEPT_TOL {
            push(e, true);
        }
    }
    roots.sort_by(|a, b| a.sp.partial_cmp(&b.sp).unwrap());
    roots
}

/// Reduced relations exist for all six tilings; matrix-backed verification
/// does not.  Guard for callers that need the full dual route.
pub fn require_matrix_backed(tiling: TilingId) -> Result<()> {
    if tiling.matrix_dim().is_some() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{tiling} carries only a reduced relation, no vertex-condition matrix"
        )))
    }
}
