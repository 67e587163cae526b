//! Spectra of the periodic operators: absolutely continuous bands from the
//! range condition on `phi(lambda) = S'(a, lambda)`, point spectrum from the
//! `S` and `2 S' + 1` factors of the reduced relations, eigenvalue branches
//! at fixed quasimomentum, and the closed-form zero-potential reference
//! bands.
//!
//! Every search runs against a [`PhiTable`]: a single integration sweep
//! caches `phi`, `d phi / d lambda`, and `S(a, .)` on a uniform `lambda`
//! grid, plus the refined interior extrema of `phi` and the Dirichlet roots
//! of `S`.  Band edges and point eigenvalues are polished by bisection
//! against the exact solver; the dense per-quasimomentum level crossings
//! reuse the cached cubic Hermite model of `phi`, whose interpolation error
//! is fourth order in the cell width and sits far below every tolerance in
//! play.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::chardet::{Quasimomentum, TilingId};
use crate::dispersion;
use crate::hill::{self, SolverConfig};
use crate::potentials::PotentialSpec;
use crate::tolerances::{
    BAND_EDGE_LAMBDA_TOL, POINT_ROOT_LAMBDA_TOL, ROOT_DEDUPE_TOL, TANGENCY_MATCH_TOL,
    TANGENT_GAP_PHI_TOL,
};
use crate::{Error, Result};

/// Default number of scan nodes; resolves the first dozen bands of a
/// unit-length edge out to `lambda ~ 500`.
pub const DEFAULT_SCAN_POINTS: usize = 4000;

/// One closed spectral band `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, lambda: f64) -> bool {
        (self.lo..=self.hi).contains(&lambda)
    }

    /// Distance from `lambda` to the band; zero inside.
    pub fn distance(&self, lambda: f64) -> f64 {
        if lambda < self.lo {
            self.lo - lambda
        } else if lambda > self.hi {
            lambda - self.hi
        } else {
            0.0
        }
    }
}

/// Which factor of the reduced relation produced a point eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointTag {
    /// Root of `S(a, lambda)`: Dirichlet eigenfunctions supported on single
    /// edges exist on every tiling.
    DirichletS,
    /// Root of `2 S'(a, lambda) + 1`: the trihexagonal flat band.
    FlatBandSpMinusHalf,
}

/// A point eigenvalue with the residual of its defining equation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointEigenvalue {
    pub lambda: f64,
    pub tag: PointTag,
    pub residual: f64,
}

/// Scan-resolution metadata embedded in reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridMeta {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

/// Bands and point spectrum of one tiling under one potential.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub tiling: TilingId,
    pub ac_bands: Vec<Band>,
    pub point_eigenvalues: Vec<PointEigenvalue>,
    pub lambda_max: f64,
    pub grid: GridMeta,
}

/// A refined interior extremum of `phi`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extremum {
    pub lambda: f64,
    pub phi: f64,
}

/// Cached discriminant scan over `[lambda_min, lambda_max]`.
pub struct PhiTable {
    q: PotentialSpec,
    cfg: SolverConfig,
    lambdas: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    s: Vec<f64>,
    extrema: Vec<Extremum>,
    /// `(lambda, |S(a, lambda)|)` at the refined Dirichlet roots.
    s_roots: Vec<(f64, f64)>,
}

/// Scan floor `min(0, inf q - 1)`: low enough to capture any spectrum a
/// negative potential pushes below zero.
fn scan_floor(q: &PotentialSpec) -> f64 {
    (q.inf_value() - 1.0).min(0.0)
}

fn require_even(q: &PotentialSpec) -> Result<()> {
    if q.is_even() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "spectral scans require an even potential (q(x) = q(a - x))".into(),
        ))
    }
}

/// Bisection on an exact (solver-backed) function with `f(lo) = flo` and a
/// sign change against `hi`; stops at interval width `width`.
fn bisect_direct(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    width: f64,
) -> Result<f64> {
    if flo == 0.0 {
        return Ok(lo);
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on an infallible (interpolated) function.
fn bisect_plain(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, width: f64) -> f64 {
    if flo == 0.0 {
        return lo;
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One membership/crossing sample: a scan node or a refined extremum.
#[derive(Clone, Copy)]
struct Sample {
    lambda: f64,
    phi: f64,
    /// Index of the grid cell this sample belongs to (an extremum lies
    /// strictly inside its cell; a node opens the cell to its right).
    cell: usize,
    is_extremum: bool,
}

impl PhiTable {
    /// Sweep `[scan_floor(q), lambda_max]` with `points` uniform nodes.
    pub fn build(
        q: &PotentialSpec,
        lambda_max: f64,
        points: usize,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let lambda_min = scan_floor(q);
        if !(lambda_max.is_finite() && lambda_max > lambda_min) {
            return Err(Error::Precondition(format!(
                "lambda_max {lambda_max} must exceed the scan floor {lambda_min}"
            )));
        }
        if points < 16 {
            return Err(Error::Precondition(format!(
                "scan needs at least 16 points, got {points}"
            )));
        }
        let h = (lambda_max - lambda_min) / (points - 1) as f64;
        let lambdas: Vec<f64> = (0..points).map(|i| lambda_min + h * i as f64).collect();
        let rows: Vec<(f64, f64, f64)> = lambdas
            .par_iter()
            .map(|&l| {
                let (basis, dphi) = hill::basis_with_dphi(q, l, cfg)?;
                Ok((basis.sp, dphi, basis.s))
            })
            .collect::<Result<_>>()?;
        let mut table = Self {
            q: q.clone(),
            cfg: *cfg,
            lambdas,
            phi: rows.iter().map(|r| r.0).collect(),
            dphi: rows.iter().map(|r| r.1).collect(),
            s: rows.iter().map(|r| r.2).collect(),
            extrema: Vec::new(),
            s_roots: Vec::new(),
        };
        table.extrema = table.locate_extrema()?;
        table.s_roots = table.locate_dirichlet_roots()?;
        Ok(table)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }

    pub fn q(&self) -> &PotentialSpec {
        &self.q
    }

    pub fn grid_meta(&self) -> GridMeta {
        GridMeta {
            lambda_min: self.lambda_min(),
            lambda_max: self.lambda_max(),
            points: self.lambdas.len(),
        }
    }

    pub fn extrema(&self) -> &[Extremum] {
        &self.extrema
    }

    /// Refined Dirichlet roots `(lambda, |S(a, lambda)|)`.
    pub fn dirichlet_roots(&self) -> &[(f64, f64)] {
        &self.s_roots
    }

    /// Exact `phi(lambda)` through the solver.
    pub fn phi_direct(&self, lambda: f64) -> Result<f64> {
        Ok(hill::solve_basis(&self.q, lambda, &self.cfg)?.sp)
    }

    fn s_direct(&self, lambda: f64) -> Result<f64> {
        Ok(hill::solve_basis(&self.q, lambda, &self.cfg)?.s)
    }

    fn dphi_direct(&self, lambda: f64) -> Result<f64> {
        Ok(hill::phi_with_derivative(&self.q, lambda, &self.cfg)?.1)
    }

    /// Interior extrema of `phi` from sign changes of the exact derivative.
    fn locate_extrema(&self) -> Result<Vec<Extremum>> {
        let mut out = Vec::new();
        for i in 0..self.lambdas.len() - 1 {
            let (da, db) = (self.dphi[i], self.dphi[i + 1]);
            if da == 0.0 {
                if i > 0 {
                    out.push(Extremum { lambda: self.lambdas[i], phi: self.phi[i] });
                }
            } else if da * db < 0.0 {
                let lam = bisect_direct(
                    |l| self.dphi_direct(l),
                    self.lambdas[i],
                    self.lambdas[i + 1],
                    da,
                    BAND_EDGE_LAMBDA_TOL * 0.1,
                )?;
                out.push(Extremum { lambda: lam, phi: self.phi_direct(lam)? });
            }
        }
        Ok(out)
    }

    fn locate_dirichlet_roots(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for i in 0..self.lambdas.len() - 1 {
            let (sa, sb) = (self.s[i], self.s[i + 1]);
            let root = if sa == 0.0 {
                if i == 0 {
                    continue;
                }
                Some(self.lambdas[i])
            } else if sa * sb < 0.0 {
                Some(bisect_direct(
                    |l| self.s_direct(l),
                    self.lambdas[i],
                    self.lambdas[i + 1],
                    sa,
                    POINT_ROOT_LAMBDA_TOL,
                )?)
            } else {
                None
            };
            if let Some(lam) = root {
                out.push((lam, self.s_direct(lam)?.abs()));
            }
        }
        Ok(out)
    }

    /// Scan nodes and refined extrema, merged in `lambda` order.
    fn samples(&self) -> Vec<Sample> {
        let n = self.lambdas.len();
        let mut out = Vec::with_capacity(n + self.extrema.len());
        let mut ext = self.extrema.iter().peekable();
        for i in 0..n {
            out.push(Sample {
                lambda: self.lambdas[i],
                phi: self.phi[i],
                cell: i.min(n - 2),
                is_extremum: false,
            });
            while let Some(e) = ext.peek() {
                if i + 1 < n && e.lambda < self.lambdas[i + 1] {
                    if e.lambda > self.lambdas[i] {
                        out.push(Sample {
                            lambda: e.lambda,
                            phi: e.phi,
                            cell: i,
                            is_extremum: true,
                        });
                    }
                    ext.next();
                } else {
                    break;
                }
            }
        }
        out
    }

    /// Cubic Hermite model of `phi` on cell `idx`.
    fn hermite(&self, idx: usize, lambda: f64) -> f64 {
        let (l0, l1) = (self.lambdas[idx], self.lambdas[idx + 1]);
        let h = l1 - l0;
        let t = (lambda - l0) / h;
        let (p0, p1) = (self.phi[idx], self.phi[idx + 1]);
        let (m0, m1) = (self.dphi[idx] * h, self.dphi[idx + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + p1 * (3.0 * t2 - 2.0 * t3)
            + m1 * (t3 - t2)
    }

    /// All `lambda` with `phi(lambda) = target`, transversal crossings via
    /// the Hermite model plus tangencies at matching extrema.
    fn phi_level_crossings(&self, target: f64) -> Vec<f64> {
        let samples = self.samples();
        let mut crossings = Vec::new();
        for w in samples.windows(2) {
            let (sa, sb) = (&w[0], &w[1]);
            let fa = sa.phi - target;
            let fb = sb.phi - target;
            if fa == 0.0 {
                crossings.push(sa.lambda);
            } else if fa * fb < 0.0 {
                let g = |l: f64| self.hermite(sa.cell, l) - target;
                // re-seed the bracket from the interpolant itself so the
                // signs the bisection sees are self-consistent
                let (ga, gb) = (g(sa.lambda), g(sb.lambda));
                if ga == 0.0 || (ga > 0.0) != (fa > 0.0) {
                    crossings.push(sa.lambda);
                } else if gb == 0.0 || (gb > 0.0) != (fb > 0.0) {
                    crossings.push(sb.lambda);
                } else {
                    let width = 1e-13 * sa.lambda.abs().max(1.0);
                    crossings.push(bisect_plain(g, sa.lambda, sb.lambda, ga, width));
                }
            }
        }
        if let Some(last) = samples.last() {
            if last.phi == target {
                crossings.push(last.lambda);
            }
        }
        let mut out = crossings.clone();
        // a tangency counts only when its flanking window produced no
        // transversal crossing, else a near-double root is triple-counted
        for (j, s) in samples.iter().enumerate() {
            if s.is_extremum && (s.phi - target).abs() <= TANGENCY_MATCH_TOL {
                let lo = samples[j - 1].lambda;
                let hi = samples[j + 1].lambda;
                if !crossings.iter().any(|&x| x >= lo && x <= hi) {
                    out.push(s.lambda);
                }
            }
        }
        out
    }

    /// Roots of `2 phi + 1` (the flat-band condition), solver-refined.
    fn flat_band_roots(&self) -> Result<Vec<(f64, f64)>> {
        let samples = self.samples();
        let target = -0.5;
        let mut crossings = Vec::new();
        for w in samples.windows(2) {
            let (sa, sb) = (&w[0], &w[1]);
            let fa = sa.phi - target;
            let fb = sb.phi - target;
            if fa == 0.0 {
                crossings.push(sa.lambda);
            } else if fa * fb < 0.0 {
                crossings.push(bisect_direct(
                    |l| Ok(self.phi_direct(l)? - target),
                    sa.lambda,
                    sb.lambda,
                    fa,
                    POINT_ROOT_LAMBDA_TOL,
                )?);
            }
        }
        let mut all = crossings.clone();
        for (j, s) in samples.iter().enumerate() {
            if s.is_extremum && (s.phi - target).abs() <= TANGENCY_MATCH_TOL {
                let lo = samples[j - 1].lambda;
                let hi = samples[j + 1].lambda;
                if !crossings.iter().any(|&x| x >= lo && x <= hi) {
                    all.push(s.lambda);
                }
            }
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = Vec::with_capacity(all.len());
        for lam in all {
            let residual = (2.0 * self.phi_direct(lam)? + 1.0).abs();
            out.push((lam, residual));
        }
        Ok(out)
    }
}

/// Bisect `phi = v` between two samples; degenerate brackets (both sides on
/// one side of `v` within the tangency tolerance) collapse to the endpoint
/// nearer the level.
fn phi_boundary(table: &PhiTable, la: f64, fa: f64, lb: f64, fb: f64, v: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(la);
    }
    if fb == 0.0 {
        return Ok(lb);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Ok(if fa.abs() <= fb.abs() { la } else { lb });
    }
    bisect_direct(|l| Ok(table.phi_direct(l)? - v), la, lb, fa, BAND_EDGE_LAMBDA_TOL)
}

/// Absolutely continuous bands: the closure of
/// `{lambda in [scan floor, lambda_max] : phi(lambda) in [m, 1]}` with the
/// tiling's band floor `m`, as disjoint sorted intervals.
///
/// Scan samples violating a boundary by less than [`TANGENT_GAP_PHI_TOL`]
/// are treated as tangential contacts, not gap openings; gaps whose interior
/// excursion beyond `[m, 1]` stays below that tolerance are therefore
/// reported as closed.
pub fn ac_bands(
    tiling: TilingId,
    q: &PotentialSpec,
    lambda_max: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Band>> {
    let table = PhiTable::build(q, lambda_max, DEFAULT_SCAN_POINTS, cfg)?;
    ac_bands_from_table(tiling, &table)
}

/// [`ac_bands`] against a prebuilt scan table.
pub fn ac_bands_from_table(tiling: TilingId, table: &PhiTable) -> Result<Vec<Band>> {
    require_even(table.q())?;
    let m = tiling.band_floor();
    let inside = |p: f64| p >= m - TANGENT_GAP_PHI_TOL && p <= 1.0 + TANGENT_GAP_PHI_TOL;
    let samples = table.samples();
    let mut bands: Vec<Band> = Vec::new();
    let mut open: Option<f64> = None;
    if inside(samples[0].phi) {
        open = Some(samples[0].lambda);
    }
    for w in samples.windows(2) {
        let (sa, sb) = (&w[0], &w[1]);
        let (ia, ib) = (inside(sa.phi), inside(sb.phi));
        if ia == ib {
            if !ia {
                let high_a = sa.phi > 1.0;
                let high_b = sb.phi > 1.0;
                if high_a != high_b {
                    // phi swept across the whole membership window between
                    // two samples: a thin band hides here
                    let va = if high_a { 1.0 } else { m };
                    let vb = if high_b { 1.0 } else { m };
                    let lo = phi_boundary(table, sa.lambda, sa.phi - va, sb.lambda, sb.phi - va, va)?;
                    let hi = phi_boundary(table, sa.lambda, sa.phi - vb, sb.lambda, sb.phi - vb, vb)?;
                    if hi >= lo {
                        bands.push(Band { lo, hi });
                    }
                }
            }
            continue;
        }
        let outside_phi = if ia { sb.phi } else { sa.phi };
        let v = if outside_phi > 1.0 { 1.0 } else { m };
        let edge = phi_boundary(table, sa.lambda, sa.phi - v, sb.lambda, sb.phi - v, v)?;
        if ia {
            let lo = open.take().unwrap_or(sa.lambda);
            if edge >= lo {
                bands.push(Band { lo, hi: edge });
            }
        } else {
            open = Some(edge);
        }
    }
    if let Some(lo) = open {
        bands.push(Band { lo, hi: table.lambda_max() });
    }
    // merge contacts produced by adjacent edge bisections
    let mut merged: Vec<Band> = Vec::with_capacity(bands.len());
    for b in bands {
        match merged.last_mut() {
            Some(prev) if b.lo - prev.hi <= 4.0 * BAND_EDGE_LAMBDA_TOL => {
                prev.hi = prev.hi.max(b.hi);
            }
            _ => merged.push(b),
        }
    }
    Ok(merged)
}

/// Point spectrum: Dirichlet roots of `S(a, .)` on every tiling, flat-band
/// roots of `2 S' + 1` on the trihexagonal tiling.
pub fn point_spectrum(
    tiling: TilingId,
    q: &PotentialSpec,
    lambda_max: f64,
    cfg: &SolverConfig,
) -> Result<Vec<PointEigenvalue>> {
    let table = PhiTable::build(q, lambda_max, DEFAULT_SCAN_POINTS, cfg)?;
    point_spectrum_from_table(tiling, &table)
}

/// [`point_spectrum`] against a prebuilt scan table.
pub fn point_spectrum_from_table(
    tiling: TilingId,
    table: &PhiTable,
) -> Result<Vec<PointEigenvalue>> {
    require_even(table.q())?;
    let mut out: Vec<PointEigenvalue> = table
        .dirichlet_roots()
        .iter()
        .map(|&(lambda, residual)| PointEigenvalue {
            lambda,
            tag: PointTag::DirichletS,
            residual,
        })
        .collect();
    if tiling.has_flat_band_factor() {
        for (lambda, residual) in table.flat_band_roots()? {
            out.push(PointEigenvalue { lambda, tag: PointTag::FlatBandSpMinusHalf, residual });
        }
    }
    out.sort_by(|x, y| {
        x.lambda
            .partial_cmp(&y.lambda)
            .unwrap()
            .then_with(|| (x.tag == PointTag::FlatBandSpMinusHalf).cmp(&(y.tag == PointTag::FlatBandSpMinusHalf)))
    });
    Ok(out)
}

/// Eigenvalue branches at fixed quasimomentum: the zero set of the reduced
/// relation, merged over its factors (`S`, the band polynomial at each of its
/// `sp` roots, and the trihexagonal flat factor), sorted and deduplicated.
pub fn band_functions(
    tiling: TilingId,
    q: &PotentialSpec,
    theta: Quasimomentum,
    lambda_max: f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let table = PhiTable::build(q, lambda_max, DEFAULT_SCAN_POINTS, cfg)?;
    band_functions_from_table(tiling, &table, theta)
}

/// [`band_functions`] against a prebuilt scan table.
pub fn band_functions_from_table(
    tiling: TilingId,
    table: &PhiTable,
    theta: Quasimomentum,
) -> Result<Vec<f64>> {
    require_even(table.q())?;
    let mut roots: Vec<f64> = table.dirichlet_roots().iter().map(|r| r.0).collect();
    let mut targets: Vec<f64> =
        dispersion::poly_roots_in_sp(tiling, theta).iter().map(|r| r.sp).collect();
    if tiling.has_flat_band_factor() {
        targets.push(-0.5);
    }
    for sp in targets {
        roots.extend(table.phi_level_crossings(sp));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|b, a| (*b - *a).abs() <= ROOT_DEDUPE_TOL * b.abs().max(1.0));
    Ok(roots)
}

/// Discrepancy report for the Floquet union property: the union of the
/// fixed-quasimomentum zero sets over a grid against `ac_bands` plus
/// `point_spectrum`.
#[derive(Debug, Clone, Serialize)]
pub struct UnionCheck {
    pub tiling: TilingId,
    pub theta_grid_n: usize,
    pub grid: GridMeta,
    pub band_count: usize,
    pub point_count: usize,
    pub sampled_root_count: usize,
    /// Sup over sampled roots of the distance to the band/point reference.
    pub root_to_reference: f64,
    /// Sup over reference samples of the distance to the sampled roots.
    pub reference_to_root: f64,
    /// Coverage scale `2 (lambda_max - lambda_min) / (n - 1)`; zero for a
    /// single-slice grid, where no coverage is claimed.
    pub resolution_bound: f64,
    pub within_bound: bool,
}

/// Sample `band_functions` on an `n x n` inclusive quasimomentum grid over
/// `[-pi, pi]^2` (`n = 1` uses the single slice `(0, 0)`) and compare the
/// union of roots against the direct band/point computation.
pub fn union_check(
    tiling: TilingId,
    q: &PotentialSpec,
    lambda_max: f64,
    theta_grid_n: usize,
    cfg: &SolverConfig,
) -> Result<UnionCheck> {
    let table = PhiTable::build(q, lambda_max, DEFAULT_SCAN_POINTS, cfg)?;
    union_check_from_table(tiling, &table, theta_grid_n)
}

/// [`union_check`] against a prebuilt scan table.
pub fn union_check_from_table(
    tiling: TilingId,
    table: &PhiTable,
    theta_grid_n: usize,
) -> Result<UnionCheck> {
    if theta_grid_n == 0 {
        return Err(Error::Precondition("theta grid needs at least one node".into()));
    }
    require_even(table.q())?;
    let bands = ac_bands_from_table(tiling, table)?;
    let points = point_spectrum_from_table(tiling, table)?;
    let thetas: Vec<f64> = if theta_grid_n == 1 {
        vec![0.0]
    } else {
        let h = 2.0 * PI / (theta_grid_n - 1) as f64;
        (0..theta_grid_n).map(|i| -PI + h * i as f64).collect()
    };
    let n = theta_grid_n;
    let per_theta: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|k| band_functions_from_table(tiling, table, Quasimomentum::new(thetas[k / n], thetas[k % n])))
        .collect::<Result<_>>()?;
    let mut roots: Vec<f64> = per_theta.into_iter().flatten().collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|b, a| (*b - *a).abs() <= ROOT_DEDUPE_TOL * b.abs().max(1.0));

    let to_reference = |lambda: f64| -> f64 {
        let db = bands.iter().map(|b| b.distance(lambda)).fold(f64::INFINITY, f64::min);
        let dp = points
            .iter()
            .map(|p| (p.lambda - lambda).abs())
            .fold(f64::INFINITY, f64::min);
        db.min(dp)
    };
    let root_to_reference = roots.iter().map(|&l| to_reference(l)).fold(0.0, f64::max);

    let range = table.lambda_max() - table.lambda_min();
    let resolution_bound =
        if theta_grid_n == 1 { 0.0 } else { 2.0 * range / (theta_grid_n - 1) as f64 };
    let step = (resolution_bound / 8.0).max(range * 1e-5);
    let mut reference_to_root = 0.0f64;
    for b in &bands {
        let k = ((b.width() / step).ceil() as usize).max(1);
        for j in 0..=k {
            let x = b.lo + b.width() * j as f64 / k as f64;
            reference_to_root = reference_to_root.max(nearest_distance(&roots, x));
        }
    }
    for p in &points {
        reference_to_root = reference_to_root.max(nearest_distance(&roots, p.lambda));
    }
    Ok(UnionCheck {
        tiling,
        theta_grid_n,
        grid: table.grid_meta(),
        band_count: bands.len(),
        point_count: points.len(),
        sampled_root_count: roots.len(),
        root_to_reference,
        reference_to_root,
        resolution_bound,
        within_bound: root_to_reference <= resolution_bound
            && reference_to_root <= resolution_bound,
    })
}

fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    if sorted.is_empty() {
        return f64::INFINITY;
    }
    match sorted.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(_) => 0.0,
        Err(i) => {
            let mut d = f64::INFINITY;
            if i < sorted.len() {
                d = d.min(sorted[i] - x);
            }
            if i > 0 {
                d = d.min(x - sorted[i - 1]);
            }
            d
        }
    }
}

/// Analytic zero-potential bands.
///
/// With `eta = arccos(m)` for band floor `m > -1`, the bands are
/// `[0, (eta/a)^2]` and `[((2 pi n - eta)/a)^2, ((2 pi n + eta)/a)^2]`.
/// Tilings with `m = -1` (truncated square, square, hexagonal) have no gaps:
/// the single band `[0, +inf)` is returned and callers clip it.
///
/// For the elongated-triangular tiling this uses the corrected floor
/// `-13/20`, giving a first band edge `arccos(-13/20)^2 ~ 5.1888` where the
/// published derivations state `arccos(-3/5)^2 ~ 4.9031`; see
/// CALIBRATION.md for the discrepancy analysis.
pub fn q0_reference_bands(tiling: TilingId, a: f64, count: usize) -> Result<Vec<Band>> {
    if count == 0 {
        return Err(Error::Precondition("reference band count must be at least 1".into()));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Precondition(format!("edge length must be positive, got {a}")));
    }
    let m = tiling.band_floor();
    if m <= -1.0 {
        return Ok(vec![Band { lo: 0.0, hi: f64::INFINITY }]);
    }
    let eta = m.acos();
    let mut out = vec![Band { lo: 0.0, hi: (eta / a).powi(2) }];
    for n in 1..count {
        let w = 2.0 * PI * n as f64;
        out.push(Band { lo: ((w - eta) / a).powi(2), hi: ((w + eta) / a).powi(2) });
    }
    Ok(out)
}

/// Bands and point spectrum from one shared scan.
pub fn spectrum_report(
    tiling: TilingId,
    q: &PotentialSpec,
    lambda_max: f64,
    cfg: &SolverConfig,
) -> Result<SpectrumReport> {
    let table = PhiTable::build(q, lambda_max, DEFAULT_SCAN_POINTS, cfg)?;
    Ok(SpectrumReport {
        tiling,
        ac_bands: ac_bands_from_table(tiling, &table)?,
        point_eigenvalues: point_spectrum_from_table(tiling, &table)?,
        lambda_max,
        grid: table.grid_meta(),
    })
}
