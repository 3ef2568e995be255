//! CSV and SVG output for a simulation report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{SigmaReport, SimulationReport};
use crate::error::Result;
use crate::matio::fmt_f64;

const BINS: usize = 20;
const RANGE: f64 = 4.0;
const COORDS: [&str; 3] = ["a", "b", "c"];

/// σ rounded to 1e-12 and printed in shortest form, for file names.
pub fn sigma_label(sigma: f64) -> String {
    format!("{}", (sigma * 1e12).round() / 1e12)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn draws_csv(r: &SigmaReport) -> String {
    let mut s = String::from("index,a,b,c,xi_a,xi_b,xi_c\n");
    for (i, e) in r.euler.iter().enumerate() {
        let xi = r.whitened.get(i);
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{}",
            fmt_f64(e.a),
            fmt_f64(e.b),
            fmt_f64(e.c),
            opt(xi.map(|x| x[0])),
            opt(xi.map(|x| x[1])),
            opt(xi.map(|x| x[2])),
        );
    }
    s
}

fn summary_csv(report: &SimulationReport) -> String {
    let mut s = String::from("sigma,p_a,p_b,p_c\n");
    for r in &report.sigmas {
        let p = r.p_values();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(r.sigma),
            opt(p.map(|p| p[0])),
            opt(p.map(|p| p[1])),
            opt(p.map(|p| p[2])),
        );
    }
    s
}

fn histogram_svg(r: &SigmaReport, coord: usize) -> String {
    let (w, h, pad) = (480.0, 320.0, 30.0);
    let width = 2.0 * RANGE / BINS as f64;
    let mut counts = [0usize; BINS];
    for x in &r.whitened {
        let v = x[coord];
        if (-RANGE..RANGE).contains(&v) {
            counts[((v + RANGE) / width) as usize] += 1;
        }
    }
    let n = r.whitened.len().max(1) as f64;
    let peak = 0.5_f64;
    let sx = |x: f64| pad + (x + RANGE) / (2.0 * RANGE) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / peak * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let p =
        r.ks.map(|k| format!("{:.3}", k[coord].p_value))
            .unwrap_or_else(|| "n/a".into());
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="18" font-family="sans-serif" font-size="13">sigma = {}, xi_{}, KS p = {p}</text>"#,
        sigma_label(r.sigma),
        COORDS[coord]
    );
    for (i, &c) in counts.iter().enumerate() {
        let x0 = -RANGE + i as f64 * width;
        let density = (c as f64 / (n * width)).min(peak);
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#9bb7d4" stroke="#34577a"/>"##,
            sx(x0),
            sy(density),
            sx(x0 + width) - sx(x0),
            sy(0.0) - sy(density)
        );
    }
    let pts: Vec<String> = (0..=160)
        .map(|i| {
            let x = -RANGE + i as f64 * 2.0 * RANGE / 160.0;
            let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            format!("{:.3},{:.3}", sx(x), sy(phi))
        })
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#c0392b" stroke-width="2" points="{}"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        s,
        r##"<line x1="{pad}" y1="{0:.3}" x2="{1:.3}" y2="{0:.3}" stroke="#000"/>"##,
        sy(0.0),
        w - pad
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `draws_sigma_{σ}.csv` per σ, `ks_summary.csv`, and one histogram
/// `hist_sigma_{σ}_{a,b,c}.svg` per σ and coordinate. Returns the paths written.
pub fn emit_artifacts(report: &SimulationReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("ks_summary.csv".into(), summary_csv(report))?;
    for r in &report.sigmas {
        let label = sigma_label(r.sigma);
        put(format!("draws_sigma_{label}.csv"), draws_csv(r))?;
        for (c, name) in COORDS.iter().enumerate() {
            put(
                format!("hist_sigma_{label}_{name}.svg"),
                histogram_svg(r, c),
            )?;
        }
    }
    Ok(written)
}
