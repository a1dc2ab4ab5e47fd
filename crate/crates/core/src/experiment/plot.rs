//! Minimal SVG line charts: one thin gray line per replicate, a thick mean
//! line and an optional chance line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

pub struct PlotSeries {
    pub replicates: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub chance: Option<Vec<f64>>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

/// Round tick step covering `span` in about five intervals.
fn tick_step(span: f64) -> f64 {
    if span <= 0.0 {
        return 1.0;
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

pub fn render_curve_plot(title: &str, series: &PlotSeries) -> String {
    let k = series.mean.len().max(1);
    let all = series
        .replicates
        .iter()
        .flatten()
        .chain(&series.mean)
        .chain(series.chance.iter().flatten());
    let (mut lo, mut hi) = all.fold((0.0_f64, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let step = tick_step(hi - lo);
    lo = (lo / step).floor() * step;
    hi = (hi / step).ceil() * step;
    let x = |i: usize| LEFT + (W - LEFT - RIGHT) * if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
    let y = |v: f64| TOP + (H - TOP - BOTTOM) * (hi - v) / (hi - lo);
    let path = |vals: &[f64]| {
        let mut d = String::new();
        for (i, v) in vals.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x(i), y(*v));
        }
        d
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let mut t = lo;
    while t <= hi + step * 1e-9 {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y(t) + 4.0,
            trim_number(t),
            y = y(t)
        );
        t += step;
    }
    let kstep = tick_step(k as f64) as usize;
    for kk in std::iter::once(1).chain((kstep.max(1)..=k).step_by(kstep.max(1))) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{kk}</text>"#,
            x(kk - 1),
            H - BOTTOM + 16.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for r in &series.replicates {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#b0b0b0" stroke-width="0.8"/>"##, path(r));
    }
    if let Some(c) = &series.chance {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#1f4fd1" stroke-width="2"/>"##, path(c));
    }
    let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#000" stroke-width="2.5"/>"##, path(&series.mean));
    s.push_str("</svg>\n");
    s
}

fn trim_number(v: f64) -> String {
    let r = format!("{v:.3}");
    r.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_curve_plot(path: &Path, title: &str, series: &PlotSeries) -> Result<()> {
    std::fs::write(path, render_curve_plot(title, series))?;
    Ok(())
}
