//! Artifact emission: CSV/JSON text sinks and static SVG figures.
//!
//! All numeric CSV fields use `{:.16e}` (17 significant digits, '.' decimal)
//! so that identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use archi_core::spectrum::{Band, PointEigenvalue};

use crate::CliError;

/// Format a float for CSV.
pub fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Append `-suffix` to the file stem, keeping directory and extension.
pub fn with_stem_suffix(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("svg");
    path.with_file_name(format!("{stem}-{suffix}.{ext}"))
}

fn svg_x(lambda: f64, lo: f64, hi: f64) -> f64 {
    40.0 + 720.0 * (lambda - lo) / (hi - lo)
}

/// Band diagram: fixed 800x200 viewBox, filled bands over a hatched gap
/// background, vertical ticks for point eigenvalues.
pub fn band_diagram_svg(
    title: &str,
    bands: &[Band],
    points: &[PointEigenvalue],
    lambda_min: f64,
    lambda_max: f64,
) -> String {
    let lo = lambda_min.min(0.0);
    let hi = lambda_max.max(lo + 1.0);
    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 200\">\n");
    s.push_str(
        "  <defs><pattern id=\"gap-hatch\" width=\"8\" height=\"8\" patternUnits=\"userSpaceOnUse\" \
         patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" \
         stroke=\"#c9c9c9\" stroke-width=\"2\"/></pattern></defs>\n",
    );
    s.push_str(&format!("  <text x=\"40\" y=\"36\" font-size=\"15\" font-family=\"sans-serif\">{title}</text>\n"));
    // gap background across the whole lambda range
    s.push_str("  <rect x=\"40\" y=\"70\" width=\"720\" height=\"54\" fill=\"url(#gap-hatch)\" stroke=\"#888\" stroke-width=\"1\"/>\n");
    for b in bands {
        let x0 = svg_x(b.lo.max(lo), lo, hi);
        let x1 = svg_x(b.hi.min(hi), lo, hi);
        s.push_str(&format!(
            "  <rect x=\"{:.4}\" y=\"70\" width=\"{:.4}\" height=\"54\" fill=\"#3b6ea5\"/>\n",
            x0,
            (x1 - x0).max(0.5)
        ));
    }
    for p in points {
        let x = svg_x(p.lambda, lo, hi);
        s.push_str(&format!(
            "  <line x1=\"{x:.4}\" y1=\"58\" x2=\"{x:.4}\" y2=\"136\" stroke=\"#b03030\" stroke-width=\"2\"/>\n"
        ));
    }
    // axis with endpoint labels
    s.push_str("  <line x1=\"40\" y1=\"150\" x2=\"760\" y2=\"150\" stroke=\"#222\" stroke-width=\"1\"/>\n");
    for (lambda, anchor) in [(lo, "start"), (hi, "end")] {
        let x = svg_x(lambda, lo, hi);
        s.push_str(&format!(
            "  <line x1=\"{x:.4}\" y1=\"150\" x2=\"{x:.4}\" y2=\"156\" stroke=\"#222\" stroke-width=\"1\"/>\n"
        ));
        s.push_str(&format!(
            "  <text x=\"{x:.4}\" y=\"172\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"{anchor}\">{lambda:.3}</text>\n"
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn ramp(t: f64) -> (u8, u8, u8) {
    // two-stop dark-violet -> yellow ramp; monotone in t
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

/// Heatmap of one band function lambda_j(theta1, theta2) on an n x n grid.
/// `values[i * n + j]` is the value at (theta1_i, theta2_j); `None` marks a
/// grid point where the branch does not exist below the lambda cutoff.
pub fn heatmap_svg(title: &str, values: &[Option<f64>], n: usize) -> String {
    let finite: Vec<f64> = values.iter().flatten().copied().collect();
    let vmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (vmax - vmin).max(1e-12);
    let cell = 360.0 / n as f64;
    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 470 420\">\n");
    s.push_str(&format!("  <text x=\"20\" y=\"24\" font-size=\"14\" font-family=\"sans-serif\">{title}</text>\n"));
    for i in 0..n {
        for j in 0..n {
            let x = 20.0 + cell * i as f64;
            // theta2 increases upward
            let y = 40.0 + cell * (n - 1 - j) as f64;
            match values[i * n + j] {
                Some(v) => {
                    let (r, g, b) = ramp((v - vmin) / span);
                    s.push_str(&format!(
                        "  <rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{cell:.3}\" height=\"{cell:.3}\" fill=\"rgb({r},{g},{b})\"/>\n"
                    ));
                }
                None => s.push_str(&format!(
                    "  <rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{cell:.3}\" height=\"{cell:.3}\" fill=\"#ffffff\"/>\n"
                )),
            }
        }
    }
    // color bar with range labels
    for k in 0..72 {
        let (r, g, b) = ramp(1.0 - k as f64 / 71.0);
        s.push_str(&format!(
            "  <rect x=\"400\" y=\"{:.3}\" width=\"18\" height=\"5\" fill=\"rgb({r},{g},{b})\"/>\n",
            40.0 + 5.0 * k as f64
        ));
    }
    s.push_str(&format!(
        "  <text x=\"422\" y=\"48\" font-size=\"11\" font-family=\"sans-serif\">{vmax:.3}</text>\n"
    ));
    s.push_str(&format!(
        "  <text x=\"422\" y=\"400\" font-size=\"11\" font-family=\"sans-serif\">{vmin:.3}</text>\n"
    ));
    s.push_str("</svg>\n");
    s
}
