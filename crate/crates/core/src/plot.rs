//! Static SVG figures.
//!
//! Figures are plain strings built from coordinates rounded to 0.01 px, with
//! generic font families and no external resources, so equal inputs always
//! give equal bytes.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{align, FeatureTable, OutcomeVector};
use crate::error::{Error, Result};
use crate::oracle::AnalyticPoint;
use crate::report::AnalysisReport;
use crate::rng::{stream, Domain};
use crate::stats::neg_log10;
use crate::summarize::{quantile_sorted, significance_order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    UCurve,
    RankTraces,
    FragilityBars,
    CoverageDots,
    AbundanceDots,
    AnalyticCurves,
}

impl PlotKind {
    /// Figures that need nothing beyond a report.
    pub const REPORT: [PlotKind; 4] = [
        PlotKind::UCurve,
        PlotKind::RankTraces,
        PlotKind::FragilityBars,
        PlotKind::CoverageDots,
    ];

    pub fn file_stem(&self) -> &'static str {
        match self {
            PlotKind::UCurve => "ucurve",
            PlotKind::RankTraces => "traces",
            PlotKind::FragilityBars => "fragility",
            PlotKind::CoverageDots => "coverage",
            PlotKind::AbundanceDots => "abundance",
            PlotKind::AnalyticCurves => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Size {
    pub width: u32,
    pub height: u32,
}

impl Default for Size {
    fn default() -> Self {
        Self { width: 720, height: 480 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub size: Size,
    pub path: PathBuf,
}

impl PlotSpec {
    /// `<dir>/<stem>.svg` at the default size.
    pub fn in_dir(kind: PlotKind, dir: &Path) -> Self {
        Self {
            kind,
            size: Size::default(),
            path: dir.join(format!("{}.svg", kind.file_stem())),
        }
    }

    /// Renders a report figure and writes it to `path`.
    pub fn render_report(&self, report: &AnalysisReport, top_m: usize) -> Result<String> {
        let svg = match self.kind {
            PlotKind::UCurve => ucurve_svg(report, self.size)?,
            PlotKind::RankTraces => traces_svg(report, top_m, self.size)?,
            PlotKind::FragilityBars => fragility_svg(report, top_m, self.size)?,
            PlotKind::CoverageDots => coverage_svg(report, top_m, self.size)?,
            PlotKind::AbundanceDots | PlotKind::AnalyticCurves => {
                return Err(Error::Invalid(format!("{:?} is not drawn from a report", self.kind)))
            }
        };
        fs::write(&self.path, &svg)?;
        Ok(svg)
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const OBSERVED: &str = "#d62728";
const GRID: &str = "#dddddd";

/// Coordinate rounded to 0.01, without a negative zero.
fn n(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Svg {
    buf: String,
}

impl Svg {
    fn new(size: Size, title: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            w = size.width,
            h = size.height
        );
        let _ = writeln!(buf, "<title>{}</title>", escape(title));
        let _ = writeln!(buf, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, size.width, size.height);
        Self { buf }
    }

    #[allow(clippy::too_many_arguments)]
    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{extra}/>"#,
            n(x1),
            n(y1),
            n(x2),
            n(y2),
            n(width)
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"{extra}/>"#,
            n(x),
            n(y),
            n(w.max(0.0)),
            n(h.max(0.0))
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" stroke="{stroke}"{extra}/>"#,
            n(cx),
            n(cy),
            n(r)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, extra: &str) {
        let pts: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", n(x), n(y))).collect();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{extra}/>"#,
            pts.join(" "),
            n(width)
        );
    }

    fn triangle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<polygon points="{},{} {},{} {},{}" fill="{fill}"{extra}/>"#,
            n(cx),
            n(cy - r),
            n(cx - r),
            n(cy + r * 0.8),
            n(cx + r),
            n(cy + r * 0.8)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="{}">{}</text>"#,
            n(x),
            n(y),
            n(size),
            escape(content)
        );
    }

    fn vtext(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="{}" transform="rotate(-90 {x} {y})">{}</text>"#,
            n(size),
            escape(content),
            x = n(x),
            y = n(y)
        );
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Data-to-pixel mapping for one plotting area.
struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(size: Size, margins: (f64, f64, f64, f64), x: (f64, f64), y: (f64, f64)) -> Self {
        let (l, r, t, b) = margins;
        Self {
            left: l,
            right: size.width as f64 - r,
            top: t,
            bottom: size.height as f64 - b,
            x,
            y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.bottom - self.top)
    }
}

/// Round tick positions covering `[lo, hi]` at a 1-2-5 step.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, f64) {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), step)
}

fn tick_label(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if step < 1e-3 || v.abs() >= 1e5 {
        return format!("{v:.1e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

/// Upper axis limit: `hi` padded by 5% and rounded up to a tick.
fn nice_max(hi: f64, floor: f64) -> f64 {
    let hi = (hi * 1.05).max(floor);
    let (_, step) = nice_ticks(0.0, hi, 5);
    (hi / step).ceil() * step
}

fn axes(svg: &mut Svg, f: &Frame, xlabel: &str, ylabel: &str, xticks: bool) {
    let (yt, ys) = nice_ticks(f.y.0, f.y.1, 5);
    for v in yt {
        let y = f.py(v);
        svg.line(f.left, y, f.right, y, GRID, 1.0, "");
        svg.text(f.left - 6.0, y + 4.0, "end", 11.0, &tick_label(v, ys));
    }
    if xticks {
        let (xt, xs) = nice_ticks(f.x.0, f.x.1, 5);
        for v in xt {
            let x = f.px(v);
            svg.line(x, f.bottom, x, f.bottom + 5.0, "black", 1.0, "");
            svg.text(x, f.bottom + 18.0, "middle", 11.0, &tick_label(v, xs));
        }
    }
    svg.line(f.left, f.bottom, f.right, f.bottom, "black", 1.0, "");
    svg.line(f.left, f.top, f.left, f.bottom, "black", 1.0, "");
    svg.text((f.left + f.right) / 2.0, f.bottom + 36.0, "middle", 12.0, xlabel);
    svg.vtext(f.left - 44.0, (f.top + f.bottom) / 2.0, "middle", 12.0, ylabel);
}

fn dashed_hline(svg: &mut Svg, f: &Frame, y: f64, label: &str) {
    if y < f.y.0 || y > f.y.1 {
        return;
    }
    let py = f.py(y);
    svg.line(f.left, py, f.right, py, "#888888", 1.0, r#" stroke-dasharray="4 3""#);
    svg.text(f.right - 4.0, py - 4.0, "end", 10.0, label);
}

fn legend(svg: &mut Svg, x: f64, y: f64, lines: &[String]) {
    let w = 8.0 + 6.5 * lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
    svg.rect(x - w, y, w, 8.0 + 15.0 * lines.len() as f64, "white", r##" stroke="#999999" class="legend""##);
    for (i, l) in lines.iter().enumerate() {
        svg.text(x - w + 6.0, y + 18.0 + 15.0 * i as f64, "start", 11.0, l);
    }
}

fn need_points(report: &AnalysisReport) -> Result<()> {
    if report.scenarios.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            have: report.scenarios.len(),
        });
    }
    Ok(())
}

/// Proportion of significant features against the proportion of mixing.
pub fn emit_ucurve_plot(report: &AnalysisReport) -> Result<String> {
    ucurve_svg(report, Size::default())
}

fn ucurve_svg(report: &AnalysisReport, size: Size) -> Result<String> {
    need_points(report)?;
    let p = report.features.len() as f64;
    let alpha = report.config.alpha;
    let top = report
        .scenarios
        .iter()
        .map(|s| s.nsig_q975 / p)
        .fold(alpha, f64::max);
    let f = Frame::new(size, (64.0, 24.0, 24.0, 52.0), (0.0, 1.0), (0.0, nice_max(top, 0.1).min(1.0)));
    let mut svg = Svg::new(size, "U-curve");
    axes(&mut svg, &f, "proportion of mixing k/K", "proportion of significant features", true);
    dashed_hline(&mut svg, &f, alpha, "alpha");
    for s in &report.scenarios {
        let x = f.px(s.mixing);
        svg.line(x, f.py(s.nsig_q025 / p), x, f.py(s.nsig_q975 / p), "black", 1.2, r#" class="band""#);
    }
    for s in &report.scenarios {
        let (x, y) = (f.px(s.mixing), f.py(s.nsig_median / p));
        let attrs = format!(r#" class="point" data-k="{}""#, s.k);
        if s.k == 0 {
            svg.triangle(x, y, 7.0, OBSERVED, &attrs);
        } else {
            svg.circle(x, y, 3.5, "black", "none", &attrs);
        }
    }
    let lines = match (&report.metrics, &report.metrics_unavailable) {
        (Some(m), _) => vec![
            format!("AOI {:.3}", m.aoi),
            format!("AUMC {:.3}", m.aumc),
            format!("slope0 {:.3}", m.slope0),
            format!("slope1 {:.3}", m.slope1),
        ],
        (None, reason) => vec![format!("metrics unavailable: {}", reason.as_deref().unwrap_or("?"))],
    };
    legend(&mut svg, f.right - 6.0, f.top + 6.0, &lines);
    Ok(svg.finish())
}

/// Median `-log10 p` of the `top_m` most significant features per scenario.
pub fn emit_rank_traces_plot(report: &AnalysisReport, top_m: usize) -> Result<String> {
    traces_svg(report, top_m, Size::default())
}

fn traces_svg(report: &AnalysisReport, top_m: usize, size: Size) -> Result<String> {
    need_points(report)?;
    let t = report.traces()?;
    let rows = top_m.clamp(1, t.features.len().max(1)).min(t.features.len());
    let cut = neg_log10(report.config.alpha);
    let hi = t.values[..rows].iter().flatten().copied().fold(cut, f64::max);
    let f = Frame::new(size, (64.0, 24.0, 24.0, 52.0), (0.0, 1.0), (0.0, nice_max(hi, 1.0)));
    let mut svg = Svg::new(size, "rank traces");
    axes(&mut svg, &f, "proportion of mixing k/K", "median -log10 p", true);
    dashed_hline(&mut svg, &f, cut, "alpha");
    for (i, (name, row)) in t.features.iter().zip(&t.values).take(rows).enumerate().rev() {
        let pts: Vec<(f64, f64)> = t.mixing.iter().zip(row).map(|(&m, &v)| (f.px(m), f.py(v))).collect();
        let attrs = format!(r#" class="trace" data-feature="{}""#, escape(name));
        svg.polyline(&pts, PALETTE[i % PALETTE.len()], 1.2, &attrs);
    }
    Ok(svg.finish())
}

/// Observed `-log10 p` against the full-mix quantile band for the `top_m`
/// most significant features. Identified features are drawn filled red.
pub fn emit_coverage_plot(report: &AnalysisReport, top_m: usize) -> Result<String> {
    coverage_svg(report, top_m, Size::default())
}

fn coverage_svg(report: &AnalysisReport, top_m: usize, size: Size) -> Result<String> {
    let full = report.full_mix_scenario()?;
    let order = significance_order(&report.observed_p, &report.features);
    let rows = &order[..top_m.clamp(1, order.len().max(1)).min(order.len())];
    let identified: HashSet<&str> = report.identified.iter().map(|f| f.feature.as_str()).collect();
    let cut = neg_log10(report.config.alpha);
    let hi = rows
        .iter()
        .flat_map(|&j| [neg_log10(report.observed_p[j]), neg_log10(full.q025_p[j])])
        .fold(cut, f64::max);
    let size = Size {
        width: size.width,
        height: size.height.max(80 + 12 * rows.len() as u32),
    };
    let f = Frame::new(size, (120.0, 24.0, 24.0, 52.0), (0.0, nice_max(hi, 1.0)), (0.0, rows.len() as f64));
    let mut svg = Svg::new(size, "full-mix coverage");
    let (xt, xs) = nice_ticks(f.x.0, f.x.1, 5);
    for v in xt {
        let x = f.px(v);
        svg.line(x, f.top, x, f.bottom, GRID, 1.0, "");
        svg.text(x, f.bottom + 18.0, "middle", 11.0, &tick_label(v, xs));
    }
    svg.line(f.left, f.bottom, f.right, f.bottom, "black", 1.0, "");
    svg.text((f.left + f.right) / 2.0, f.bottom + 36.0, "middle", 12.0, "-log10 p");
    let cx = f.px(cut);
    svg.line(cx, f.top, cx, f.bottom, "#888888", 1.0, r#" stroke-dasharray="4 3""#);
    for (i, &j) in rows.iter().enumerate() {
        let y = f.py(rows.len() as f64 - i as f64 - 0.5);
        let name = &report.features[j];
        let flagged = identified.contains(name.as_str());
        svg.text(f.left - 6.0, y + 3.5, "end", 9.0, name);
        svg.line(
            f.px(neg_log10(full.q975_p[j])),
            y,
            f.px(neg_log10(full.q025_p[j])),
            y,
            "#9e9e9e",
            4.0,
            &format!(r#" class="row" data-feature="{}""#, escape(name)),
        );
        let x = f.px(neg_log10(report.observed_p[j]));
        if flagged {
            svg.circle(x, y, 3.5, OBSERVED, OBSERVED, r#" class="observed identified""#);
        } else {
            svg.circle(x, y, 3.5, "white", "black", r#" class="observed""#);
        }
    }
    Ok(svg.finish())
}

/// Fragility index of the `top_m` most significant features, tallest first
/// (ties by name). The right axis reads the same bars as scaled FI.
pub fn emit_fragility_plot(report: &AnalysisReport, top_m: usize) -> Result<String> {
    fragility_svg(report, top_m, Size::default())
}

fn fragility_svg(report: &AnalysisReport, top_m: usize, size: Size) -> Result<String> {
    if report.fragility.is_empty() {
        return Err(Error::MissingFullMixScenario(report.full_mix));
    }
    let take = top_m.clamp(1, report.fragility.len());
    let mut bars: Vec<_> = report.fragility[..take].iter().collect();
    bars.sort_by(|a, b| b.fi.cmp(&a.fi).then_with(|| a.feature.cmp(&b.feature)));
    let kf = report.full_mix.max(1) as f64;
    let size = Size {
        width: size.width.max(120 + 12 * bars.len() as u32),
        height: size.height,
    };
    let f = Frame::new(size, (64.0, 56.0, 24.0, 96.0), (0.0, bars.len() as f64), (0.0, kf));
    let mut svg = Svg::new(size, "fragility index");
    axes(&mut svg, &f, "", "fragility index", false);
    svg.line(f.right, f.top, f.right, f.bottom, "black", 1.0, "");
    for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = f.py(v * kf);
        svg.line(f.right, y, f.right + 5.0, y, "black", 1.0, "");
        svg.text(f.right + 8.0, y + 4.0, "start", 11.0, &format!("{v:.2}"));
    }
    svg.vtext(f.right + 46.0, (f.top + f.bottom) / 2.0, "middle", 12.0, "scaled fragility index");
    let slot = (f.right - f.left) / bars.len() as f64;
    for (i, b) in bars.iter().enumerate() {
        let x = f.left + slot * i as f64;
        let top = f.py(b.fi as f64);
        let attrs = format!(
            r#" class="bar" data-feature="{}" data-fi="{}" data-sfi="{}""#,
            escape(&b.feature),
            b.fi,
            b.sfi
        );
        svg.rect(x + slot * 0.1, top, slot * 0.8, f.bottom - top, PALETTE[0], &attrs);
        if bars.len() <= 100 {
            let lx = x + slot / 2.0 + 3.0;
            svg.vtext(lx, f.bottom + 6.0, "end", 8.0, &b.feature);
        }
    }
    let mean = bars.iter().map(|b| b.fi as f64).sum::<f64>() / bars.len() as f64;
    dashed_hline(&mut svg, &f, mean, &format!("mean FI {mean:.2}"));
    Ok(svg.finish())
}

/// Jittered abundances of one feature per group, with the group median
/// (horizontal tick) and quartiles (vertical whisker). Jitter comes from
/// `seed` and the feature's column index.
pub fn emit_abundance_plot(table: &FeatureTable, outcome: &OutcomeVector, feature: &str, seed: u64) -> Result<String> {
    abundance_svg(table, outcome, feature, seed, Size::default())
}

fn abundance_svg(table: &FeatureTable, outcome: &OutcomeVector, feature: &str, seed: u64, size: Size) -> Result<String> {
    let j = table
        .feature_index(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
    let (table, outcome) = align(table, outcome)?;
    let (labels, levels) = match &outcome.values {
        crate::data::OutcomeValues::Binary { labels, levels } => (labels, levels),
        _ => return Err(Error::Invalid("abundance plots need a binary outcome".into())),
    };
    let col = table.column(j);
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo {
        (hi - lo) * 0.05
    } else if hi != 0.0 {
        hi.abs() * 0.1
    } else {
        1.0
    };
    let f = Frame::new(size, (80.0, 24.0, 24.0, 52.0), (0.0, 2.0), (lo - pad, hi + pad));
    let mut svg = Svg::new(size, &format!("abundance of {feature}"));
    axes(&mut svg, &f, "", &format!("{feature} abundance"), false);
    let mut rng = stream(seed, Domain::Jitter, j as u64, 0);
    let slot = f.px(1.0) - f.px(0.0);
    for (i, (&v, &l)) in col.iter().zip(labels.iter()).enumerate() {
        let jitter: f64 = rng.random::<f64>() - 0.5;
        let x = f.px(l as f64 - 0.5) + jitter * slot * 0.5;
        let attrs = format!(r#" class="dot" data-group="{l}" data-sample="{}""#, escape(&outcome.sample_ids[i]));
        svg.circle(x, f.py(v), 3.0, PALETTE[(l - 1) as usize], "none", &attrs);
    }
    for g in 1..=2u8 {
        let mut vals: Vec<f64> = col.iter().zip(labels.iter()).filter(|(_, &l)| l == g).map(|(&v, _)| v).collect();
        let cx = f.px(g as f64 - 0.5);
        svg.text(cx, f.bottom + 20.0, "middle", 12.0, &format!("{} (n={})", levels[g as usize - 1], vals.len()));
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        let (q1, med, q3) = (
            quantile_sorted(&vals, 0.25),
            quantile_sorted(&vals, 0.5),
            quantile_sorted(&vals, 0.75),
        );
        let x = cx + slot * 0.32;
        svg.line(x, f.py(q1), x, f.py(q3), "black", 1.5, r#" class="whisker""#);
        svg.line(x - 8.0, f.py(med), x + 8.0, f.py(med), "black", 2.5, r#" class="median""#);
    }
    Ok(svg.finish())
}

/// Closed-form `-log10 p` curves, one per labelled series.
pub fn emit_analytic_plot(series: &[(String, Vec<AnalyticPoint>)], alpha: f64) -> Result<String> {
    analytic_svg(series, alpha, Size::default())
}

fn analytic_svg(series: &[(String, Vec<AnalyticPoint>)], alpha: f64, size: Size) -> Result<String> {
    let have = series.iter().map(|(_, c)| c.len()).min().unwrap_or(0);
    if have < 2 {
        return Err(Error::TooFewPoints { needed: 2, have });
    }
    let cut = neg_log10(alpha);
    let hi = series.iter().flat_map(|(_, c)| c.iter().map(|p| p.neg_log10_p)).fold(cut, f64::max);
    let f = Frame::new(size, (64.0, 24.0, 24.0, 52.0), (0.0, 1.0), (0.0, nice_max(hi, 1.0)));
    let mut svg = Svg::new(size, "analytic p-value curves");
    axes(&mut svg, &f, "proportion of mixing k/K", "-log10 p", true);
    dashed_hline(&mut svg, &f, cut, "alpha");
    for (i, (label, curve)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve.iter().map(|p| (f.px(p.mixing), f.py(p.neg_log10_p))).collect();
        svg.polyline(&pts, color, 1.5, &format!(r#" class="series" data-label="{}""#, escape(label)));
        for &(x, y) in &pts {
            svg.circle(x, y, 2.5, color, "none", "");
        }
    }
    let labels: Vec<String> = series.iter().map(|(l, _)| l.clone()).collect();
    legend(&mut svg, f.right - 6.0, f.top + 6.0, &labels);
    for (i, _) in series.iter().enumerate() {
        let w = 8.0 + 6.5 * labels.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
        let y = f.top + 6.0 + 14.0 + 15.0 * i as f64;
        svg.line(f.right - 6.0 - w - 22.0, y, f.right - 6.0 - w - 4.0, y, PALETTE[i % PALETTE.len()], 2.5, "");
    }
    Ok(svg.finish())
}

/// Writes the report figures to `dir` and returns their paths.
pub fn write_report_svgs(report: &AnalysisReport, top_m: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for kind in PlotKind::REPORT {
        let spec = PlotSpec::in_dir(kind, dir);
        spec.render_report(report, top_m)?;
        out.push(spec.path);
    }
    Ok(out)
}

/// File-name-safe form of a feature name.
pub fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Writes `abundance_<feature>.svg` to `dir`.
pub fn write_abundance_svg(
    table: &FeatureTable,
    outcome: &OutcomeVector,
    feature: &str,
    seed: u64,
    dir: &Path,
) -> Result<PathBuf> {
    let svg = emit_abundance_plot(table, outcome, feature, seed)?;
    let path = dir.join(format!("abundance_{}.svg", file_safe(feature)));
    fs::write(&path, svg)?;
    Ok(path)
}
