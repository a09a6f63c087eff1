use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrices::Histogram;

use super::{ExperimentConfig, ExperimentKind, SizeSpec};

pub const SUMMARY_HEADER: &str = "experiment,p,n,b,k,l,sample_value,target_value,se,z,pass";

/// One `(size, statistic)` line of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub experiment: &'static str,
    pub size: SizeSpec,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub sample_value: f64,
    pub target_value: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

impl SummaryRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.size.p,
            self.size.n,
            self.size.b,
            opt(self.k),
            opt(self.l),
            format_value(self.sample_value),
            format_value(self.target_value),
            format_value(self.se),
            format_value(self.z),
            self.pass
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramRow {
    pub size: SizeSpec,
    pub bin_left: f64,
    pub bin_right: f64,
    pub empirical_mass: f64,
    pub reference_mass: f64,
}

/// Empirical and reference spectral histograms for one size.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPanel {
    pub size: SizeSpec,
    pub empirical: Histogram,
    pub reference: Histogram,
}

impl SpectrumPanel {
    /// Bin rows plus one underflow and one overflow row at `∓∞`.
    pub fn rows(&self) -> Vec<HistogramRow> {
        let e = &self.empirical;
        let r = &self.reference;
        let mut rows = Vec::with_capacity(e.bins() + 2);
        let lo = e.edges[0];
        let hi = *e.edges.last().unwrap();
        rows.push(HistogramRow {
            size: self.size,
            bin_left: f64::NEG_INFINITY,
            bin_right: lo,
            empirical_mass: e.underflow,
            reference_mass: r.underflow,
        });
        for i in 0..e.bins() {
            rows.push(HistogramRow {
                size: self.size,
                bin_left: e.edges[i],
                bin_right: e.edges[i + 1],
                empirical_mass: e.mass[i],
                reference_mass: r.mass[i],
            });
        }
        rows.push(HistogramRow {
            size: self.size,
            bin_left: hi,
            bin_right: f64::INFINITY,
            empirical_mass: e.overflow,
            reference_mass: r.overflow,
        });
        rows
    }
}

/// What every experiment report exposes to the file writers.
pub trait ExperimentReport {
    fn kind(&self) -> ExperimentKind;
    fn summary_rows(&self) -> Vec<SummaryRow>;
    fn spectrum_panels(&self) -> Vec<SpectrumPanel> {
        Vec::new()
    }
    fn warnings(&self) -> &[String];
    fn runtime_seconds(&self) -> f64;
    /// Free-text remarks recorded in the manifest.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
    fn passed(&self) -> bool {
        self.summary_rows().iter().all(|r| r.pass)
    }
}

/// Stable text form of a real: plain decimals in `[1e−4, 1e15)`, scientific
/// notation otherwise.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedFiles {
    pub summary: PathBuf,
    pub histograms: PathBuf,
    pub spectrum: PathBuf,
    pub manifest: PathBuf,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `summary.csv`, `histograms.tsv`, `spectrum.svg` and `manifest.txt`
/// into `dir`, creating it if needed.
pub fn emit_reports(report: &dyn ExperimentReport, config: &ExperimentConfig, dir: &Path) -> Result<EmittedFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for row in report.summary_rows() {
        summary.push_str(&row.csv_line());
        summary.push('\n');
    }

    let panels = report.spectrum_panels();
    let mut tsv = String::from("p\tn\tb\tbin_left\tbin_right\tempirical_mass\treference_mass\n");
    for panel in &panels {
        for r in panel.rows() {
            writeln!(
                tsv,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.size.p,
                r.size.n,
                r.size.b,
                format_value(r.bin_left),
                format_value(r.bin_right),
                format_value(r.empirical_mass),
                format_value(r.reference_mass)
            )
            .unwrap();
        }
    }

    let mut manifest = String::new();
    writeln!(manifest, "bandspectra {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(manifest, "experiment: {}", report.kind().name()).unwrap();
    writeln!(manifest, "seed: {}", config.seed).unwrap();
    writeln!(manifest, "workers: {}", config.workers).unwrap();
    writeln!(manifest, "runtime_seconds: {:.3}", report.runtime_seconds()).unwrap();
    writeln!(manifest, "outcome: {}", if report.passed() { "pass" } else { "fail" }).unwrap();
    writeln!(manifest, "warnings:").unwrap();
    for w in report.warnings() {
        writeln!(manifest, "  - {w}").unwrap();
    }
    writeln!(manifest, "notes:").unwrap();
    for n in report.notes() {
        writeln!(manifest, "  - {n}").unwrap();
    }
    writeln!(manifest, "config:").unwrap();
    writeln!(manifest, "{}", config.to_json()).unwrap();

    Ok(EmittedFiles {
        summary: write(dir.join("summary.csv"), &summary)?,
        histograms: write(dir.join("histograms.tsv"), &tsv)?,
        spectrum: write(dir.join("spectrum.svg"), &render_spectrum_svg(&panels))?,
        manifest: write(dir.join("manifest.txt"), &manifest)?,
    })
}

const SVG_WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 34.0;
const EMPIRICAL_COLOR: &str = "#3b6ea8";
const REFERENCE_COLOR: &str = "#e08a2c";

/// Side-by-side bars of empirical and reference mass per bin, one panel per
/// size. Each bin is split in half so both series stay visible even when one
/// of them is a point mass.
pub fn render_spectrum_svg(panels: &[SpectrumPanel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{height}" viewBox="0 0 {SVG_WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if panels.is_empty() {
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">no spectral histograms for this experiment</text>"#,
            SVG_WIDTH / 2.0,
            height / 2.0
        )
        .unwrap();
    }
    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    for (idx, panel) in panels.iter().enumerate() {
        let top = idx as f64 * PANEL_HEIGHT;
        let base_y = top + MARGIN_TOP + plot_h;
        let e = &panel.empirical;
        let r = &panel.reference;
        let lo = e.edges[0];
        let hi = *e.edges.last().unwrap();
        let peak = e.mass.iter().chain(&r.mass).fold(0.0f64, |a, &b| a.max(b));
        let peak = if peak > 0.0 { peak } else { 1.0 };
        let x_of = |v: f64| MARGIN_LEFT + (v - lo) / (hi - lo) * plot_w;
        writeln!(
            s,
            r#"<text x="{MARGIN_LEFT}" y="{:.1}" font-size="13">p = {}, n = {}, b = {}</text>"#,
            top + 20.0,
            panel.size.p,
            panel.size.n,
            panel.size.b
        )
        .unwrap();
        for i in 0..e.bins() {
            let x0 = x_of(e.edges[i]);
            let x1 = x_of(e.edges[i + 1]);
            let half = (x1 - x0) / 2.0;
            for (offset, mass, color) in [(0.0, e.mass[i], EMPIRICAL_COLOR), (half, r.mass[i], REFERENCE_COLOR)] {
                if mass <= 0.0 {
                    continue;
                }
                let h = mass / peak * plot_h;
                writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                    x0 + offset,
                    base_y - h,
                    half.max(0.5),
                    h
                )
                .unwrap();
            }
        }
        writeln!(
            s,
            r#"<line x1="{MARGIN_LEFT}" y1="{base_y:.2}" x2="{:.2}" y2="{base_y:.2}" stroke="black"/>"#,
            MARGIN_LEFT + plot_w
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{MARGIN_LEFT}" y1="{:.2}" x2="{MARGIN_LEFT}" y2="{base_y:.2}" stroke="black"/>"#,
            top + MARGIN_TOP
        )
        .unwrap();
        for (v, anchor) in [(lo, "start"), (hi, "end")] {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{:.3}</text>"#,
                x_of(v),
                base_y + 16.0,
                v
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN_LEFT - 6.0,
            top + MARGIN_TOP + 4.0,
            peak
        )
        .unwrap();
        let legend_x = SVG_WIDTH - MARGIN_RIGHT - 190.0;
        for (j, (label, color)) in [("eigenvalues (mean)", EMPIRICAL_COLOR), ("limit density", REFERENCE_COLOR)]
            .iter()
            .enumerate()
        {
            let y = top + 10.0 + 14.0 * j as f64;
            writeln!(s, r#"<rect x="{legend_x}" y="{y}" width="10" height="10" fill="{color}"/>"#).unwrap();
            writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, legend_x + 14.0, y + 9.0).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(2.5), "2.5");
        assert_eq!(format_value(1e-7), "1e-7");
        assert_eq!(format_value(f64::NAN), "nan");
        assert_eq!(format_value(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn summary_line_layout() {
        let row = SummaryRow {
            experiment: "clt_cov",
            size: SizeSpec::new(4, 8, 1),
            k: Some(1),
            l: None,
            sample_value: 1.5,
            target_value: 2.0,
            se: 0.25,
            z: -2.0,
            pass: true,
        };
        assert_eq!(row.csv_line(), "clt_cov,4,8,1,1,,1.5,2,0.25,-2,true");
        assert_eq!(row.csv_line().split(',').count(), SUMMARY_HEADER.split(',').count());
    }

    #[test]
    fn svg_draws_both_series_for_point_masses() {
        let edges = Histogram::uniform_edges(0.0, 2.0, 4).unwrap();
        let panel = SpectrumPanel {
            size: SizeSpec::new(4, 8, 1),
            empirical: Histogram::from_values(&[0.9, 1.1, 0.2, 1.9], edges.clone()).unwrap(),
            reference: Histogram::from_values(&[1.0], edges).unwrap(),
        };
        let svg = render_spectrum_svg(std::slice::from_ref(&panel));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(EMPIRICAL_COLOR) && svg.contains(REFERENCE_COLOR));
        assert_eq!(svg.matches(&format!(r#"fill="{REFERENCE_COLOR}"/>"#)).count(), 2);
        assert_eq!(panel.rows().len(), 6);
        let total: f64 = panel.rows().iter().map(|r| r.empirical_mass).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(render_spectrum_svg(&[]).contains("no spectral histograms"));
    }
}
