//! Density-matrix bar charts in the usual tomography style.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::report::RunReport;
use super::{report_matrices, write_file};
use crate::error::{Error, Result};
use crate::linalg::Mat4;

const LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];
const CELL: f64 = 28.0;
const HEIGHT: f64 = 150.0;
const PANEL_W: f64 = 330.0;

#[derive(serde::Serialize)]
struct BarRow {
    part: &'static str,
    row: usize,
    col: usize,
    height: f64,
}

/// Bar heights as CSV: one line per bar, real part first, full precision.
pub fn bar_heights_csv(rho: &Mat4) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (part, get) in [
        ("re", (|z: crate::linalg::C64| z.re) as fn(_) -> f64),
        ("im", |z| z.im),
    ] {
        for row in 0..4 {
            for col in 0..4 {
                w.serialize(BarRow {
                    part,
                    row,
                    col,
                    height: get(rho[(row, col)]),
                })?;
            }
        }
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn iso(x: f64, y: f64, z: f64, origin: (f64, f64)) -> (f64, f64) {
    let c = 30f64.to_radians().cos();
    let s = 30f64.to_radians().sin();
    (origin.0 + (x - y) * c, origin.1 + (x + y) * s - z)
}

fn polygon(svg: &mut String, pts: &[(f64, f64)], fill: &str) {
    let pts: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        svg,
        r##"<polygon points="{}" fill="{fill}" stroke="#333" stroke-width="0.5"/>"##,
        pts.join(" ")
    );
}

fn shade(hex: (u8, u8, u8), k: f64) -> String {
    let f = |c: u8| (c as f64 * k).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", f(hex.0), f(hex.1), f(hex.2))
}

fn panel(svg: &mut String, values: &[[f64; 4]; 4], title: &str, x0: f64) {
    let origin = (x0 + PANEL_W / 2.0, 190.0);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        origin.0
    );
    // Floor grid.
    let n = 4.0 * CELL;
    for k in 0..=4 {
        let t = k as f64 * CELL;
        for (a, b) in [((t, 0.0), (t, n)), ((0.0, t), (n, t))] {
            let p = iso(a.0, a.1, 0.0, origin);
            let q = iso(b.0, b.1, 0.0, origin);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-width="0.5"/>"##,
                p.0, p.1, q.0, q.1
            );
        }
    }
    for (k, label) in LABELS.iter().enumerate() {
        let t = (k as f64 + 0.5) * CELL;
        let p = iso(n + 10.0, t, 0.0, origin);
        let q = iso(t, n + 10.0, 0.0, origin);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="9">{label}</text>"#,
            p.0,
            p.1 + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="end">{label}</text>"#,
            q.0,
            q.1 + 4.0
        );
    }
    // Painter's order: back rows first.
    let mut cells: Vec<(usize, usize)> = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).collect();
    cells.sort_by_key(|&(r, c)| r + c);
    for (row, col) in cells {
        let h = values[row][col] * HEIGHT;
        let base = if h >= 0.0 {
            (40, 110, 200)
        } else {
            (210, 80, 60)
        };
        let (x, y) = (col as f64 * CELL + 4.0, row as f64 * CELL + 4.0);
        let w = CELL - 8.0;
        let (lo, hi) = if h >= 0.0 { (0.0, h) } else { (h, 0.0) };
        let top = [
            iso(x, y, hi, origin),
            iso(x + w, y, hi, origin),
            iso(x + w, y + w, hi, origin),
            iso(x, y + w, hi, origin),
        ];
        let right = [
            iso(x + w, y, lo, origin),
            iso(x + w, y + w, lo, origin),
            iso(x + w, y + w, hi, origin),
            iso(x + w, y, hi, origin),
        ];
        let front = [
            iso(x, y + w, lo, origin),
            iso(x + w, y + w, lo, origin),
            iso(x + w, y + w, hi, origin),
            iso(x, y + w, hi, origin),
        ];
        polygon(svg, &right, &shade(base, 0.7));
        polygon(svg, &front, &shade(base, 0.85));
        polygon(svg, &top, &shade(base, 1.0));
    }
}

/// SVG with the real and imaginary parts side by side.
pub fn render_svg(rho: &Mat4, title: &str) -> String {
    let re: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| rho[(r, c)].re));
    let im: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| rho[(r, c)].im));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="340" viewBox="0 0 {w} 340">"#,
        w = 2.0 * PANEL_W
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, "<title>{title}</title>");
    panel(&mut svg, &re, &format!("Re({title})"), 0.0);
    panel(&mut svg, &im, &format!("Im({title})"), PANEL_W);
    svg.push_str("</svg>\n");
    svg
}

/// Writes `<stem>.svg` and `<stem>.csv` under `dir`.
pub fn emit_plots(rho: &Mat4, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let svg = dir.join(format!("{stem}.svg"));
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&svg, render_svg(rho, stem).as_bytes())?;
    write_file(&csv, &bar_heights_csv(rho)?)?;
    Ok(vec![svg, csv])
}

/// Plots every matrix in a saved report into `plots/` next to it.
pub fn plot_report(report_path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(report_path).map_err(|e| Error::io(report_path, e))?;
    let report: RunReport = serde_json::from_str(&text)?;
    let dir = report_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("plots");
    let mut written = Vec::new();
    for (name, matrix) in report_matrices(&report) {
        let rho: Mat4 = matrix.to_matrix()?;
        written.extend(emit_plots(&rho, &dir, &name)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperstate::{phi_plus, TwoQubitState};

    fn rows(csv: &[u8]) -> Vec<(String, usize, usize, f64)> {
        let mut r = csv::Reader::from_reader(csv);
        r.deserialize().map(|x| x.unwrap()).collect()
    }

    #[test]
    fn maximally_mixed_has_four_diagonal_bars() {
        let rho = *TwoQubitState::maximally_mixed().matrix();
        let bars = rows(&bar_heights_csv(&rho).unwrap());
        assert_eq!(bars.len(), 32);
        let nonzero: Vec<_> = bars.iter().filter(|b| b.3 != 0.0).collect();
        assert_eq!(nonzero.len(), 4);
        assert!(nonzero
            .iter()
            .all(|b| b.0 == "re" && b.1 == b.2 && b.3 == 0.25));
    }

    #[test]
    fn bell_state_has_corner_pattern() {
        let rho = *TwoQubitState::from_pure(&phi_plus()).unwrap().matrix();
        let bars = rows(&bar_heights_csv(&rho).unwrap());
        let mut corners: Vec<(usize, usize)> = bars
            .iter()
            .filter(|b| (b.3 - 0.5).abs() < 1e-15)
            .map(|b| (b.1, b.2))
            .collect();
        corners.sort();
        assert_eq!(corners, vec![(0, 0), (0, 3), (3, 0), (3, 3)]);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let rho = *TwoQubitState::from_pure(&phi_plus()).unwrap().matrix();
        let svg = render_svg(&rho, "rho");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 2 * 16 * 3);
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_plots(&Mat4::identity(), &blocker, "m").unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
