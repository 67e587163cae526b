//! The eight subcommands.  Each returns `Outcome::Pass` or
//! `Outcome::ToleranceExceeded` (exit 1); configuration and input problems
//! surface as `CliError` (exit 2, or 1 for numeric failures).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use archi_core::chardet::{verify_closed_form, Quasimomentum};
use archi_core::dispersion::{ac_membership, witness_theta};
use archi_core::hill;
use archi_core::potentials::PotentialSpec;
use archi_core::spectrum::{self, PhiTable, PointTag};
use archi_core::tolerances::HILL_IDENTITY_TOL;
use archi_core::Error as CoreError;

use crate::config::{OutputFormat, RunConfig};
use crate::output::{band_diagram_svg, csv_num, emit, heatmap_svg, with_stem_suffix};
use crate::{CliError, Outcome};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn scan_start(q: &PotentialSpec) -> f64 {
    (q.inf_value() - 1.0).min(0.0)
}

fn json_out(cfg: &RunConfig, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    emit(cfg.out.as_deref(), &text)
}

fn reject_format(format: OutputFormat, supported: &str, command: &str) -> CliError {
    CliError::Config(format!("{command} supports only {supported} output, not {format:?}"))
}

/// Parse a `start:end:count` sweep description.
fn parse_sweep(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Config(format!("bad sweep {spec:?} (expected start:end:count)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) || count < 2 {
        return Err(CliError::Config(format!(
            "bad sweep {spec:?}: need finite start < end and count >= 2"
        )));
    }
    Ok((lo, hi, count))
}

pub fn cmd_basis(cfg: &RunConfig, sweep: Option<&str>) -> Result<Outcome, CliError> {
    let format = cfg.format_or(OutputFormat::Csv);
    if format != OutputFormat::Csv {
        return Err(reject_format(format, "csv", "basis"));
    }
    let (lo, hi, count) = match sweep {
        Some(spec) => parse_sweep(spec)?,
        None => (0.0, cfg.lambda_max, cfg.lambda_grid),
    };
    let rows: Vec<_> = linspace(lo, hi, count)
        .into_par_iter()
        .map(|lambda| hill::solve_basis(&cfg.potential, lambda, &cfg.solver).map(|b| (lambda, b)))
        .collect::<Result<_, _>>()?;
    let mut text = String::from("lambda,c,s,cp,sp,wronskian_residual\n");
    for (lambda, b) in rows {
        for v in [b.c, b.s, b.cp, b.sp] {
            if !v.is_finite() {
                return Err(CliError::Core(CoreError::Numeric(format!(
                    "non-finite fundamental solution at lambda = {lambda}"
                ))));
            }
        }
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_num(lambda),
            csv_num(b.c),
            csv_num(b.s),
            csv_num(b.cp),
            csv_num(b.sp),
            csv_num(b.wronskian_residual())
        ));
    }
    emit(cfg.out.as_deref(), &text)?;
    Ok(Outcome::Pass)
}

pub fn cmd_verify_char(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let format = cfg.format_or(OutputFormat::Json);
    if format != OutputFormat::Json {
        return Err(reject_format(format, "json", "verify-char"));
    }
    let tiling = cfg.require_tiling()?;
    let report = verify_closed_form(tiling, cfg.trials, cfg.seed)?;
    json_out(cfg, &report)?;
    if report.passed() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::ToleranceExceeded(format!(
            "{} determinant vs closed form: max rel err {:.3e} exceeds {:.0e}",
            tiling.name(),
            report.max_rel_err,
            report.tolerance
        )))
    }
}

pub fn cmd_dispersion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tiling = cfg.require_tiling()?;
    if !cfg.potential.is_even() {
        return Err(CliError::Core(CoreError::Precondition(
            "dispersion relations hold for even potentials only".into(),
        )));
    }
    let lambdas = linspace(scan_start(&cfg.potential), cfg.lambda_max, cfg.lambda_grid);
    let rows: Vec<_> = lambdas
        .into_par_iter()
        .map(|lambda| {
            hill::solve_basis(&cfg.potential, lambda, &cfg.solver).map(|b| {
                let witness = witness_theta(tiling, b.sp);
                (lambda, b.sp, ac_membership(tiling, b.sp), witness)
            })
        })
        .collect::<Result<_, _>>()?;
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from("lambda,phi,member,witness_theta1,witness_theta2\n");
            for (lambda, phi, member, witness) in rows {
                let (t1, t2) = match witness {
                    Some(th) => (csv_num(th.theta1()), csv_num(th.theta2())),
                    None => (String::new(), String::new()),
                };
                text.push_str(&format!(
                    "{},{},{},{t1},{t2}\n",
                    csv_num(lambda),
                    csv_num(phi),
                    member as u8
                ));
            }
            emit(cfg.out.as_deref(), &text)?;
        }
        OutputFormat::Json => {
            let entries: Vec<_> = rows
                .iter()
                .map(|(lambda, phi, member, witness)| {
                    json!({
                        "lambda": lambda,
                        "phi": phi,
                        "member": member,
                        "witness": witness.map(|th| [th.theta1(), th.theta2()]),
                    })
                })
                .collect();
            json_out(cfg, &json!({ "tiling": tiling.name(), "sweep": entries }))?;
        }
        other => return Err(reject_format(other, "csv or json", "dispersion")),
    }
    Ok(Outcome::Pass)
}

pub fn cmd_bands(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tiling = cfg.require_tiling()?;
    let mut report = spectrum::spectrum_report(tiling, &cfg.potential, cfg.lambda_max, &cfg.solver)?;
    // serde_json renders non-finite floats as null; clip before emitting
    for b in &mut report.ac_bands {
        if !b.hi.is_finite() {
            b.hi = cfg.lambda_max;
        }
    }
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from("band,lo,hi,width\n");
            for (i, b) in report.ac_bands.iter().enumerate() {
                text.push_str(&format!(
                    "{i},{},{},{}\n",
                    csv_num(b.lo),
                    csv_num(b.hi),
                    csv_num(b.width())
                ));
            }
            emit(cfg.out.as_deref(), &text)?;
        }
        OutputFormat::Json => json_out(cfg, &report)?,
        OutputFormat::Svg => {
            let title = format!(
                "{} bands, {} on [{:.3}, {:.3}]",
                tiling.name(),
                cfg.potential.describe(),
                report.grid.lambda_min,
                report.lambda_max
            );
            let svg = band_diagram_svg(
                &title,
                &report.ac_bands,
                &report.point_eigenvalues,
                report.grid.lambda_min,
                report.lambda_max,
            );
            emit(cfg.out.as_deref(), &svg)?;
        }
    }
    Ok(Outcome::Pass)
}

pub fn cmd_point_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tiling = cfg.require_tiling()?;
    let points = spectrum::point_spectrum(tiling, &cfg.potential, cfg.lambda_max, &cfg.solver)?;
    let tag_name = |tag: PointTag| match tag {
        PointTag::DirichletS => "dirichlet-s",
        PointTag::FlatBandSpMinusHalf => "flat-band-sp-minus-half",
    };
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from("lambda,tag,residual\n");
            for p in &points {
                text.push_str(&format!(
                    "{},{},{}\n",
                    csv_num(p.lambda),
                    tag_name(p.tag),
                    csv_num(p.residual)
                ));
            }
            emit(cfg.out.as_deref(), &text)?;
        }
        OutputFormat::Json => json_out(
            cfg,
            &json!({
                "tiling": tiling.name(),
                "lambda-max": cfg.lambda_max,
                "points": points,
            }),
        )?,
        other => return Err(reject_format(other, "csv or json", "point-spectrum")),
    }
    let worst = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    if worst > cfg.tolerances.residual {
        return Ok(Outcome::ToleranceExceeded(format!(
            "point eigenvalue residual {worst:.3e} exceeds {:.0e}",
            cfg.tolerances.residual
        )));
    }
    Ok(Outcome::Pass)
}

pub fn cmd_surface(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tiling = cfg.require_tiling()?;
    let table = PhiTable::build(&cfg.potential, cfg.lambda_max, cfg.lambda_grid, &cfg.solver)?;
    let n = cfg.theta_grid;
    let thetas = linspace(-PI, PI, n);
    let per_point: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|flat| {
            let th = Quasimomentum::new(thetas[flat / n], thetas[flat % n]);
            spectrum::band_functions_from_table(tiling, &table, th)
        })
        .collect::<Result<_, _>>()?;
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from("theta1,theta2,branch,lambda\n");
            for (flat, roots) in per_point.iter().enumerate() {
                let (t1, t2) = (thetas[flat / n], thetas[flat % n]);
                for (branch, lambda) in roots.iter().enumerate() {
                    text.push_str(&format!(
                        "{},{},{branch},{}\n",
                        csv_num(t1),
                        csv_num(t2),
                        csv_num(*lambda)
                    ));
                }
            }
            emit(cfg.out.as_deref(), &text)?;
        }
        OutputFormat::Json => {
            let entries: Vec<_> = per_point
                .iter()
                .enumerate()
                .flat_map(|(flat, roots)| {
                    let (t1, t2) = (thetas[flat / n], thetas[flat % n]);
                    roots.iter().enumerate().map(move |(branch, lambda)| {
                        json!({"theta1": t1, "theta2": t2, "branch": branch, "lambda": lambda})
                    })
                })
                .collect();
            json_out(cfg, &json!({"tiling": tiling.name(), "surface": entries}))?;
        }
        OutputFormat::Svg => {
            let out = cfg.out.as_deref().ok_or_else(|| {
                CliError::Config("surface --format svg writes one file per branch; pass --out".into())
            })?;
            let branches = per_point.iter().map(Vec::len).max().unwrap_or(0);
            for branch in 0..branches {
                let values: Vec<Option<f64>> =
                    per_point.iter().map(|roots| roots.get(branch).copied()).collect();
                let title = format!(
                    "{} band function {branch}, theta in [-pi, pi]^2",
                    tiling.name()
                );
                let svg = heatmap_svg(&title, &values, n);
                emit(Some(&with_stem_suffix(out, &format!("branch-{branch}"))), &svg)?;
            }
        }
    }
    Ok(Outcome::Pass)
}

pub fn cmd_union_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let format = cfg.format_or(OutputFormat::Json);
    if format != OutputFormat::Json {
        return Err(reject_format(format, "json", "union-check"));
    }
    let tiling = cfg.require_tiling()?;
    let report = spectrum::union_check(
        tiling,
        &cfg.potential,
        cfg.lambda_max,
        cfg.theta_grid,
        &cfg.solver,
    )?;
    json_out(cfg, &report)?;
    if report.within_bound {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::ToleranceExceeded(format!(
            "{}: union of fixed-Theta spectra deviates from bands + point spectrum by \
             {:.3e}/{:.3e} against bound {:.3e}",
            tiling.name(),
            report.root_to_reference,
            report.reference_to_root,
            report.resolution_bound
        )))
    }
}

pub fn cmd_identity_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let even = cfg.potential.is_even();
    let lambdas = linspace(scan_start(&cfg.potential), cfg.lambda_max, cfg.lambda_grid);
    struct Row {
        lambda: f64,
        wronskian: f64,
        identities: Option<[f64; 6]>,
    }
    let rows: Vec<Row> = lambdas
        .into_par_iter()
        .map(|lambda| -> Result<Row, CoreError> {
            let basis = hill::solve_basis(&cfg.potential, lambda, &cfg.solver)?;
            let identities = if even {
                let rep = hill::half_identities(&cfg.potential, lambda, &cfg.solver)?;
                Some([
                    rep.a_product_form,
                    rep.a_sum_form,
                    rep.b,
                    rep.c_corrected,
                    rep.d,
                    rep.c_published,
                ])
            } else {
                None
            };
            Ok(Row { lambda, wronskian: basis.wronskian_residual(), identities })
        })
        .collect::<Result<_, _>>()?;
    let max_wronskian = rows.iter().map(|r| r.wronskian).fold(0.0, f64::max);
    // the published variant of the C' identity is reported but not enforced:
    // it fails for every potential, including q = 0
    let max_identity = rows
        .iter()
        .filter_map(|r| r.identities.as_ref())
        .flat_map(|ids| ids[..5].iter().copied())
        .fold(0.0, f64::max);
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut text = String::from(
                "lambda,wronskian,a_product,a_sum,b,c_corrected,d,c_published_variant\n",
            );
            for r in &rows {
                let ids = match &r.identities {
                    Some(ids) => {
                        let f: Vec<String> = ids.iter().map(|v| csv_num(*v)).collect();
                        format!("{},{},{},{},{},{}", f[0], f[1], f[2], f[3], f[4], f[5])
                    }
                    None => ",,,,,".to_string(),
                };
                text.push_str(&format!("{},{},{ids}\n", csv_num(r.lambda), csv_num(r.wronskian)));
            }
            emit(cfg.out.as_deref(), &text)?;
        }
        OutputFormat::Json => json_out(
            cfg,
            &json!({
                "potential": cfg.potential.describe(),
                "even": even,
                "points": rows.len(),
                "max-wronskian-residual": max_wronskian,
                "max-identity-residual": if even { Some(max_identity) } else { None },
                "wronskian-tolerance": cfg.tolerances.wronskian,
                "identity-tolerance": HILL_IDENTITY_TOL,
            }),
        )?,
        other => return Err(reject_format(other, "csv or json", "identity-check")),
    }
    if max_wronskian > cfg.tolerances.wronskian {
        return Ok(Outcome::ToleranceExceeded(format!(
            "Wronskian residual {max_wronskian:.3e} exceeds {:.0e}",
            cfg.tolerances.wronskian
        )));
    }
    if even && max_identity > HILL_IDENTITY_TOL {
        return Ok(Outcome::ToleranceExceeded(format!(
            "half-interval identity residual {max_identity:.3e} exceeds {HILL_IDENTITY_TOL:.0e}"
        )));
    }
    Ok(Outcome::Pass)
}
