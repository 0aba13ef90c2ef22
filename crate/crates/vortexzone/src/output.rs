//! Output emission: CSV data files, JSON manifests and dependency-free SVG
//! figures. Numbers are written with shortest round-trip formatting so
//! emitted files re-ingest losslessly and identical runs produce identical
//! bytes.

use crate::blob::Trajectory;
use crate::curve::{ClosedCurve, PeriodicGrid, ScalarField};
use crate::{Complex, Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Curve CSV: columns s, x, y.
pub fn curve_csv(curve: &ClosedCurve) -> String {
    let mut out = String::from("s,x,y\n");
    for (s, p) in curve.grid().nodes().zip(curve.points()) {
        let _ = writeln!(out, "{s},{},{}", p.re, p.im);
    }
    out
}

pub fn parse_curve_csv(text: &str, length: f64) -> Result<ClosedCurve> {
    let mut points = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let _s = cols.next();
        let x: f64 = parse_col(cols.next(), "x")?;
        let y: f64 = parse_col(cols.next(), "y")?;
        points.push(Complex::new(x, y));
    }
    let grid = PeriodicGrid::new(length, points.len())?;
    ClosedCurve::new(grid, points)
}

/// Field CSV: columns s, value.
pub fn field_csv(field: &ScalarField) -> String {
    let mut out = String::from("s,value\n");
    for (s, v) in field.grid().nodes().zip(field.values()) {
        let _ = writeln!(out, "{s},{v}");
    }
    out
}

pub fn parse_field_csv(text: &str, length: f64) -> Result<ScalarField> {
    let mut values = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let _s = cols.next();
        values.push(parse_col(cols.next(), "value")?);
    }
    let grid = PeriodicGrid::new(length, values.len())?;
    ScalarField::new(grid, values)
}

fn parse_col(col: Option<&str>, name: &str) -> Result<f64> {
    col.and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| Error::Config(vec![format!("CSV column '{name}' missing or not a number")]))
}

/// Trajectory CSV: columns t, node, x, y, decimated by the given strides.
pub fn trajectory_csv(traj: &Trajectory, step_stride: usize, node_stride: usize) -> String {
    let mut out = String::from("t,node,x,y\n");
    for (k, state) in traj.states.iter().enumerate() {
        if k % step_stride.max(1) != 0 && k != traj.states.len() - 1 {
            continue;
        }
        for (j, p) in state.positions.iter().enumerate() {
            if j % node_stride.max(1) != 0 {
                continue;
            }
            let _ = writeln!(out, "{},{j},{},{}", state.time, p.re, p.im);
        }
    }
    out
}

/// Diagnostics CSV: t, circulation, impulse_x, impulse_y, energy (blank
/// when not sampled at that step).
pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,circulation,impulse_x,impulse_y,energy\n");
    for d in &traj.diagnostics {
        let energy = d.energy.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{energy}",
            d.time, d.circulation, d.impulse.re, d.impulse.im
        );
    }
    out
}

/// Samples of a vector field: x, y, vx, vy.
pub fn vector_field_csv(points: &[Complex], values: &[Complex]) -> String {
    let mut out = String::from("x,y,vx,vy\n");
    for (p, v) in points.iter().zip(values) {
        let _ = writeln!(out, "{},{},{},{}", p.re, p.im, v.re, v.im);
    }
    out
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// One file of the run inventory.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub kind: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes files into the output directory and records their digests.
pub struct OutputSink {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputSink {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            files: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn emit(&mut self, name: &str, kind: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            kind: kind.to_string(),
            bytes: contents.len(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

/// Minimal SVG scene builder: polyline paths grouped under `curves`, an
/// optional quiver group and a legend group. The only run-dependent
/// non-data byte is the build-version comment.
pub struct SvgFigure {
    width: f64,
    height: f64,
    min: Complex,
    max: Complex,
    curves: Vec<(String, String, Vec<Complex>)>,
    quiver: Vec<(Complex, Complex)>,
    markers: Vec<(String, Vec<Complex>)>,
}

impl SvgFigure {
    pub fn new(min: Complex, max: Complex) -> Self {
        Self {
            width: 640.0,
            height: 640.0,
            min,
            max,
            curves: Vec::new(),
            quiver: Vec::new(),
            markers: Vec::new(),
        }
    }

    /// Bounding box covering a set of point collections with 10% padding.
    pub fn fit(point_sets: &[&[Complex]]) -> Self {
        let mut min = Complex::new(f64::INFINITY, f64::INFINITY);
        let mut max = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for set in point_sets {
            for p in *set {
                min.re = min.re.min(p.re);
                min.im = min.im.min(p.im);
                max.re = max.re.max(p.re);
                max.im = max.im.max(p.im);
            }
        }
        if !min.re.is_finite() {
            min = Complex::new(-1.0, -1.0);
            max = Complex::new(1.0, 1.0);
        }
        let pad = 0.1 * ((max.re - min.re).max(max.im - min.im)).max(1e-9);
        Self::new(
            Complex::new(min.re - pad, min.im - pad),
            Complex::new(max.re + pad, max.im + pad),
        )
    }

    fn map(&self, p: Complex) -> (f64, f64) {
        let sx = self.width / (self.max.re - self.min.re);
        let sy = self.height / (self.max.im - self.min.im);
        (
            (p.re - self.min.re) * sx,
            // SVG y grows downward.
            self.height - (p.im - self.min.im) * sy,
        )
    }

    pub fn add_curve(&mut self, label: &str, color: &str, points: &[Complex]) {
        self.curves
            .push((label.to_string(), color.to_string(), points.to_vec()));
    }

    pub fn add_quiver(&mut self, points: &[Complex], values: &[Complex], scale: f64) {
        for (p, v) in points.iter().zip(values) {
            self.quiver.push((*p, p + scale * v));
        }
    }

    pub fn add_markers(&mut self, color: &str, points: &[Complex]) {
        self.markers.push((color.to_string(), points.to_vec()));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">",
            self.width, self.height
        );
        let _ = writeln!(s, "<!-- vortexzone {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
            self.width, self.height
        );
        let _ = writeln!(s, "<g id=\"curves\" fill=\"none\" stroke-width=\"1.5\">");
        for (label, color, points) in &self.curves {
            let mut d = String::new();
            for (k, p) in points.iter().enumerate() {
                let (x, y) = self.map(*p);
                let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
            }
            d.push('Z');
            let _ = writeln!(
                s,
                "<path d=\"{d}\" stroke=\"{color}\"><title>{label}</title></path>"
            );
        }
        let _ = writeln!(s, "</g>");
        if !self.quiver.is_empty() {
            let _ = writeln!(s, "<g id=\"quiver\" stroke=\"#444444\" stroke-width=\"0.8\">");
            for (a, b) in &self.quiver {
                let (x1, y1) = self.map(*a);
                let (x2, y2) = self.map(*b);
                let _ = writeln!(
                    s,
                    "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\"/>"
                );
                // Arrowhead: a dot at the tip keeps the file small.
                let _ = writeln!(s, "<circle cx=\"{x2:.3}\" cy=\"{y2:.3}\" r=\"1.2\"/>");
            }
            let _ = writeln!(s, "</g>");
        }
        for (color, points) in &self.markers {
            let _ = writeln!(s, "<g fill=\"{color}\" stroke=\"none\">");
            for p in points {
                let (x, y) = self.map(*p);
                let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2.5\"/>");
            }
            let _ = writeln!(s, "</g>");
        }
        let _ = writeln!(s, "<g id=\"legend\" font-family=\"monospace\" font-size=\"13\">");
        for (k, (label, color, _)) in self.curves.iter().enumerate() {
            let y = 20.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                "<rect x=\"12\" y=\"{:.1}\" width=\"14\" height=\"4\" fill=\"{color}\"/>",
                y - 4.0
            );
            let _ = writeln!(s, "<text x=\"32\" y=\"{y:.1}\">{label}</text>");
        }
        let _ = writeln!(s, "</g>");
        s.push_str("</svg>\n");
        s
    }
}

/// Simple xy line chart (used for rate-vs-c style figures).
pub struct SvgChart {
    width: f64,
    height: f64,
    series: Vec<(String, String, Vec<(f64, f64)>)>,
}

impl SvgChart {
    pub fn new() -> Self {
        Self {
            width: 640.0,
            height: 420.0,
            series: Vec::new(),
        }
    }

    pub fn add_series(&mut self, label: &str, color: &str, points: Vec<(f64, f64)>) {
        self.series.push((label.into(), color.into(), points));
    }

    pub fn render(&self) -> String {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (_, _, pts) in &self.series {
            for (x, y) in pts {
                xmin = xmin.min(*x);
                xmax = xmax.max(*x);
                ymin = ymin.min(*y);
                ymax = ymax.max(*y);
            }
        }
        if !xmin.is_finite() {
            (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
        }
        let padx = 0.08 * (xmax - xmin).max(1e-12);
        let pady = 0.08 * (ymax - ymin).max(1e-12);
        xmin -= padx;
        xmax += padx;
        ymin -= pady;
        ymax += pady;
        let map = |x: f64, y: f64| -> (f64, f64) {
            (
                (x - xmin) / (xmax - xmin) * self.width,
                self.height - (y - ymin) / (ymax - ymin) * self.height,
            )
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">",
            self.width, self.height
        );
        let _ = writeln!(s, "<!-- vortexzone {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
            self.width, self.height
        );
        // Zero axes when in range.
        let _ = writeln!(s, "<g stroke=\"#cccccc\" stroke-width=\"1\">");
        if ymin < 0.0 && ymax > 0.0 {
            let (x1, y) = map(xmin, 0.0);
            let (x2, _) = map(xmax, 0.0);
            let _ = writeln!(s, "<line x1=\"{x1:.1}\" y1=\"{y:.1}\" x2=\"{x2:.1}\" y2=\"{y:.1}\"/>");
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, "<g id=\"curves\" fill=\"none\" stroke-width=\"1.5\">");
        for (label, color, pts) in &self.series {
            let mut d = String::new();
            for (k, (x, y)) in pts.iter().enumerate() {
                let (px, py) = map(*x, *y);
                let _ = write!(d, "{}{px:.3} {py:.3} ", if k == 0 { "M" } else { "L" });
            }
            let _ = writeln!(
                s,
                "<path d=\"{d}\" stroke=\"{color}\"><title>{label}</title></path>"
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, "<g id=\"legend\" font-family=\"monospace\" font-size=\"13\">");
        for (k, (label, color, _)) in self.series.iter().enumerate() {
            let y = 20.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                "<rect x=\"12\" y=\"{:.1}\" width=\"14\" height=\"4\" fill=\"{color}\"/>",
                y - 4.0
            );
            let _ = writeln!(s, "<text x=\"32\" y=\"{y:.1}\">{label}</text>");
        }
        let _ = writeln!(s, "</g>");
        s.push_str("</svg>\n");
        s
    }
}

impl Default for SvgChart {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn curve_csv_roundtrip_exact() {
        let z = ClosedCurve::circle(1.0, 64).unwrap();
        let text = curve_csv(&z);
        let back = parse_curve_csv(&text, TAU).unwrap();
        for (a, b) in z.points().iter().zip(back.points()) {
            assert_eq!(a, b); // shortest round-trip formatting is lossless
        }
    }

    #[test]
    fn field_csv_roundtrip_exact() {
        let grid = PeriodicGrid::new(TAU, 32).unwrap();
        let f = ScalarField::from_fn(grid, |s| (1.0 / 3.0) * (5.0 * s).sin()).unwrap();
        let back = parse_field_csv(&field_csv(&f), TAU).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn svg_structure() {
        let z = ClosedCurve::circle(1.0, 32).unwrap();
        let e = ClosedCurve::circle(0.5, 32).unwrap();
        let mut fig = SvgFigure::fit(&[z.points(), e.points()]);
        fig.add_curve("outer", "#1f77b4", z.points());
        fig.add_curve("inner", "#2ca02c", e.points());
        let svg = fig.render();
        assert_eq!(svg.matches("<path ").count(), 2);
        assert!(svg.contains("id=\"legend\""));
        assert!(svg.contains("id=\"curves\""));
    }

    #[test]
    fn digests_change_with_content() {
        let a = sha256_hex(b"data");
        let b = sha256_hex(b"datb");
        assert_ne!(a, b);
        assert_eq!(a, sha256_hex(b"data"));
    }
}
