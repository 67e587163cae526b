//! Edge potentials: the scalar field `q` on the metric edge `[0, a]`.
//!
//! Every edge of a tiling carries the same potential, and all of the reduced
//! dispersion theory additionally assumes the mirror symmetry
//! `q(x) = q(a - x)`.  Symmetry is therefore not trusted: a declared-even
//! potential is verified on a symmetric grid at construction time.
//!
//! Piecewise-constant potentials are evaluated right-continuously; the
//! integrator treats their breakpoints as segment boundaries so a jump is
//! never sampled from the wrong side.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tolerances::EVENNESS_TOL;
use crate::{Error, Result};

/// Interpolation rule for [`PotentialKind::SampledGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationOrder {
    Linear,
    /// Local 4-point Lagrange cubic with the stencil clamped at the ends.
    Cubic,
}

/// Structural description of the potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `q = 0`; the fundamental pair is known in closed form.
    Zero,
    /// Constant value `values[k]` on `[breakpoints[k], breakpoints[k+1])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Uniform samples over `[0, a]`, interpolated.
    SampledGrid {
        samples: Vec<f64>,
        order: InterpolationOrder,
    },
    /// Graphene-like well `-0.85 + (d/1.34) sin^2(pi x / d)` with bond
    /// length `d` (defaults to the edge length).
    BuiltinGraphene { d: f64 },
}

const GRAPHENE_DEPTH: f64 = -0.85;
const GRAPHENE_BOND_SCALE: f64 = 1.34;

/// A potential together with the edge length and its declared symmetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    kind: PotentialKind,
    a: f64,
    even_declared: bool,
    even_verified: bool,
}

impl PotentialSpec {
    /// The zero potential on `[0, a]`.
    pub fn zero(a: f64) -> Result<Self> {
        Self::new(PotentialKind::Zero, a, true)
    }

    /// The graphene well with bond length equal to the edge length.
    pub fn graphene(a: f64) -> Result<Self> {
        Self::graphene_with_bond(a, a)
    }

    /// The graphene well with an explicit bond length `d`.
    ///
    /// Even on `[0, a]` exactly when `a` is an integer multiple of `d`; the
    /// declared symmetry is determined by the grid check, not assumed.
    pub fn graphene_with_bond(a: f64, d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "graphene bond length must be positive, got {d}"
            )));
        }
        let mut spec = Self::raw(PotentialKind::BuiltinGraphene { d }, a, false)?;
        spec.even_verified = spec.check_even(EVENNESS_TOL);
        spec.even_declared = spec.even_verified;
        Ok(spec)
    }

    /// A piecewise-constant potential.  `breakpoints` must start at `0`, end
    /// at `a`, increase strictly, and bracket exactly `values.len()` pieces.
    pub fn piecewise_constant(
        a: f64,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        even_declared: bool,
    ) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints cannot delimit {} pieces",
                breakpoints.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidPotential("no pieces".into()));
        }
        if breakpoints[0] != 0.0 || (breakpoints[breakpoints.len() - 1] - a).abs() > 1e-12 * a {
            return Err(Error::InvalidPotential(
                "breakpoints must span [0, a] exactly".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential(
                "breakpoints must increase strictly".into(),
            ));
        }
        if breakpoints.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite entry".into()));
        }
        Self::new(PotentialKind::PiecewiseConstant { breakpoints, values }, a, even_declared)
    }

    /// A potential given by uniform samples over `[0, a]`.
    pub fn sampled(
        a: f64,
        samples: Vec<f64>,
        order: InterpolationOrder,
        even_declared: bool,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPotential(
                "sampled potential needs at least two samples".into(),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        Self::new(PotentialKind::SampledGrid { samples, order }, a, even_declared)
    }

    /// General constructor; verifies a declared symmetry.
    pub fn new(kind: PotentialKind, a: f64, even_declared: bool) -> Result<Self> {
        let mut spec = Self::raw(kind, a, even_declared)?;
        spec.even_verified = spec.check_even(EVENNESS_TOL);
        if spec.even_declared && !spec.even_verified {
            return Err(Error::Consistency(
                "potential declared even but fails the symmetry check".into(),
            ));
        }
        Ok(spec)
    }

    fn raw(kind: PotentialKind, a: f64, even_declared: bool) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "edge length must be positive, got {a}"
            )));
        }
        Ok(Self { kind, a, even_declared, even_verified: false })
    }

    /// A random even piecewise-constant potential: `half_cuts` mirrored cut
    /// positions and mirrored values drawn from `[-amplitude, amplitude]`.
    pub fn random_even_piecewise(
        rng: &mut impl Rng,
        a: f64,
        half_cuts: usize,
        amplitude: f64,
    ) -> Result<Self> {
        let h = half_cuts.max(1);
        let mut cuts: Vec<f64>;
        loop {
            cuts = (0..h).map(|_| rng.gen_range(0.05..0.45) * a).collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if cuts.windows(2).all(|w| w[1] - w[0] > 0.02 * a) {
                break;
            }
        }
        let mut breakpoints = vec![0.0];
        breakpoints.extend(cuts.iter().copied());
        breakpoints.extend(cuts.iter().rev().map(|c| a - c));
        breakpoints.push(a);
        let half_vals: Vec<f64> =
            (0..=h).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
        let mut values = half_vals.clone();
        values.extend(half_vals.iter().rev().skip(1));
        Self::piecewise_constant(a, breakpoints, values, true)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn even_declared(&self) -> bool {
        self.even_declared
    }

    /// Result of the symmetry check performed at construction time.
    pub fn is_even(&self) -> bool {
        self.even_verified
    }

    /// Evaluate `q(x)`.  `x` must lie in `[0, a]` up to roundoff slack.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let slack = 1e-9 * self.a.max(1.0);
        if !(x >= -slack && x <= self.a + slack) {
            return Err(Error::Domain { x, a: self.a });
        }
        let x = x.clamp(0.0, self.a);
        Ok(match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PiecewiseConstant { breakpoints, values } => {
                // right-continuous: x == breakpoints[k] selects piece k
                let k = breakpoints.partition_point(|b| *b <= x);
                values[k.saturating_sub(1).min(values.len() - 1)]
            }
            PotentialKind::SampledGrid { samples, order } => {
                interpolate(samples, *order, x / self.a)
            }
            PotentialKind::BuiltinGraphene { d } => {
                let s = (std::f64::consts::PI * x / d).sin();
                GRAPHENE_DEPTH + (d / GRAPHENE_BOND_SCALE) * s * s
            }
        })
    }

    /// Sup-norm symmetry defect `|q(x) - q(a - x)|` over a 1024-point grid.
    ///
    /// The grid has 1023 subintervals, so dyadic breakpoints never land on a
    /// grid node and piecewise potentials are compared away from their jumps.
    pub fn check_even(&self, tol: f64) -> bool {
        const N: usize = 1024;
        let mut sup: f64 = 0.0;
        for i in 0..N {
            let x = self.a * i as f64 / (N - 1) as f64;
            let fwd = self.evaluate(x).unwrap_or(f64::NAN);
            let bwd = self.evaluate(self.a - x).unwrap_or(f64::NAN);
            sup = sup.max((fwd - bwd).abs());
        }
        sup.is_finite() && sup <= tol
    }

    /// Greatest lower bound of `q` over the edge (exact for all kinds except
    /// cubic interpolants, where it is the sample minimum).
    pub fn inf_value(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PiecewiseConstant { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            PotentialKind::SampledGrid { samples, .. } => {
                samples.iter().copied().fold(f64::INFINITY, f64::min)
            }
            // q(0) attains the well bottom regardless of d
            PotentialKind::BuiltinGraphene { .. } => GRAPHENE_DEPTH,
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            PotentialKind::Zero => "zero".to_string(),
            PotentialKind::PiecewiseConstant { values, .. } => {
                format!("piecewise-constant[{}]", values.len())
            }
            PotentialKind::SampledGrid { samples, order } => {
                format!("sampled[{}, {:?}]", samples.len(), order)
            }
            PotentialKind::BuiltinGraphene { d } => format!("graphene[d={d}]"),
        }
    }
}

/// Interpolate uniform samples at normalized position `t` in `[0, 1]`.
fn interpolate(samples: &[f64], order: InterpolationOrder, t: f64) -> f64 {
    let n = samples.len();
    let pos = t * (n - 1) as f64;
    let j = (pos.floor() as usize).min(n - 2);
    let u = pos - j as f64;
    match order {
        InterpolationOrder::Linear => samples[j] * (1.0 - u) + samples[j + 1] * u,
        InterpolationOrder::Cubic => {
            if n < 4 {
                return samples[j] * (1.0 - u) + samples[j + 1] * u;
            }
            // 4-point Lagrange stencil [j0, j0+3] containing [j, j+1]
            let j0 = j.saturating_sub(1).min(n - 4);
            let s = pos - j0 as f64;
            let mut acc = 0.0;
            for (k, &yk) in samples[j0..j0 + 4].iter().enumerate() {
                let mut w = 1.0;
                for m in 0..4 {
                    if m != k {
                        w *= (s - m as f64) / (k as f64 - m as f64);
                    }
                }
                acc += w * yk;
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_potential_rejects_out_of_domain() {
        let q = PotentialSpec::zero(1.0).unwrap();
        assert!(matches!(q.evaluate(1.2), Err(Error::Domain { .. })));
        assert_eq!(q.evaluate(0.3).unwrap(), 0.0);
    }

    #[test]
    fn graphene_matches_well_depth_at_origin() {
        let q = PotentialSpec::graphene_with_bond(1.43, 1.43).unwrap();
        assert!((q.evaluate(0.0).unwrap() - (-0.85)).abs() < 1e-15);
        assert!(q.is_even());
        // mid-edge value: -0.85 + (1.43/1.34) sin^2(pi/2)
        let mid = q.evaluate(1.43 / 2.0).unwrap();
        assert!((mid - (-0.85 + 1.43 / 1.34)).abs() < 1e-12);
    }

    #[test]
    fn graphene_with_incommensurate_bond_is_not_even() {
        let q = PotentialSpec::graphene_with_bond(1.0, 0.7).unwrap();
        assert!(!q.is_even());
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let q = PotentialSpec::piecewise_constant(
            1.0,
            vec![0.0, 0.25, 1.0],
            vec![2.0, -1.0],
            false,
        )
        .unwrap();
        assert_eq!(q.evaluate(0.25).unwrap(), -1.0);
        assert_eq!(q.evaluate(0.2499999).unwrap(), 2.0);
        assert_eq!(q.evaluate(1.0).unwrap(), -1.0);
        assert_eq!(q.inf_value(), -1.0);
    }

    #[test]
    fn declared_even_but_asymmetric_is_rejected() {
        let res = PotentialSpec::piecewise_constant(
            1.0,
            vec![0.0, 0.25, 1.0],
            vec![2.0, -1.0],
            true,
        );
        assert!(matches!(res, Err(Error::Consistency(_))));
    }

    #[test]
    fn mirrored_piecewise_passes_even_check() {
        let q = PotentialSpec::piecewise_constant(
            2.0,
            vec![0.0, 0.3, 1.7, 2.0],
            vec![1.0, -0.5, 1.0],
            true,
        )
        .unwrap();
        assert!(q.is_even());
    }

    #[test]
    fn random_even_piecewise_is_even() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let q = PotentialSpec::random_even_piecewise(&mut rng, 1.0, 3, 3.0).unwrap();
            assert!(q.is_even());
        }
    }

    #[test]
    fn sampled_cubic_reproduces_cubic_polynomials() {
        // Lagrange-4 interpolation is exact on cubics.
        let f = |x: f64| 0.5 * x * x * x - x * x + 2.0 * x - 0.3;
        let samples: Vec<f64> = (0..9).map(|i| f(i as f64 / 8.0)).collect();
        let q = PotentialSpec::sampled(1.0, samples, InterpolationOrder::Cubic, false).unwrap();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert!((q.evaluate(x).unwrap() - f(x)).abs() < 1e-12, "x={x}");
        }
    }
}
