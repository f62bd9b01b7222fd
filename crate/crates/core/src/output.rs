//! CSV, SVG and JSON writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::runner::{ComparisonReport, Trajectories};

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(tr: &Trajectories) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for s in &tr.series {
        cols.extend((1..=tr.dim).map(|n| format!("P{n}_{}", s.scheme)));
    }
    for s in &tr.series {
        for n in 1..=tr.dim {
            cols.push(format!("q{n}_{}", s.scheme));
            cols.push(format!("p{n}_{}", s.scheme));
        }
    }
    cols
}

pub fn csv_string(tr: &Trajectories) -> String {
    let mut out = csv_header(tr).join(",");
    out.push('\n');
    for (k, &t) in tr.times.iter().enumerate() {
        let mut row = vec![fmt_float(t)];
        for s in &tr.series {
            row.extend(s.populations[k].iter().map(|&x| fmt_float(x)));
        }
        for s in &tr.series {
            for (q, p) in s.q[k].iter().zip(&s.p[k]) {
                row.push(fmt_float(*q));
                row.push(fmt_float(*p));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(tr: &Trajectories, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, csv_string(tr))?;
    Ok(())
}

/// Header and numeric rows of a CSV written by [`emit_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    parse_csv(&fs::read_to_string(path)?)
}

pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty CSV".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(k, l)| {
            let row: Vec<f64> = l
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: k + 2,
                    msg: e.to_string(),
                })?;
            if row.len() != header.len() {
                return Err(Error::Parse {
                    line: k + 2,
                    msg: format!("expected {} columns, got {}", header.len(), row.len()),
                });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn report_json(report: &ComparisonReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &ComparisonReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report_json(report)?)?;
    Ok(())
}

const COLORS: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];
const PANEL_W: f64 = 300.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 45.0;

type Curve<'a> = (String, &'a str, Vec<(f64, f64)>);

struct Panel<'a> {
    title: String,
    curves: Vec<Curve<'a>>,
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn draw_panel(svg: &mut String, x0: f64, y0: f64, p: &Panel<'_>) {
    let (tmin, tmax) = axis_range(p.curves.iter().flat_map(|c| c.2.iter().map(|xy| xy.0)));
    let (ymin, ymax) = axis_range(p.curves.iter().flat_map(|c| c.2.iter().map(|xy| xy.1)));
    let (ymin, ymax) = (ymin.min(0.0), ymax);
    let (w, h) = (PANEL_W - MARGIN - 10.0, PANEL_H - MARGIN - 25.0);
    let (left, top) = (x0 + MARGIN, y0 + 25.0);
    let sx = |t: f64| left + (t - tmin) / (tmax - tmin) * w;
    let sy = |v: f64| top + h - (v - ymin) / (ymax - ymin) * h;
    let _ = writeln!(
        svg,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        left + w / 2.0,
        y0 + 16.0,
        p.title
    );
    for (v, anchor_y) in [(ymin, sy(ymin)), (ymax, sy(ymax))] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            left - 4.0,
            anchor_y + 3.0,
            tick(v)
        );
    }
    for t in [tmin, tmax] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            sx(t),
            top + h + 13.0,
            tick(t)
        );
    }
    for (k, (label, color, pts)) in p.curves.iter().enumerate() {
        let path: Vec<String> = pts.iter().map(|&(t, v)| format!("{:.2},{:.2}", sx(t), sy(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{label}</text>"#,
            left + 6.0,
            top + 12.0 + 12.0 * k as f64
        );
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn svg_document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// Population curves, one panel per scheme, plus a panel with the absolute
/// difference of each scheme from the first one. Gate scenarios render a bar
/// chart of the final basis-state populations instead.
pub fn svg_string(tr: &Trajectories, report: &ComparisonReport) -> String {
    if tr.is_gate() {
        return bar_chart(tr, report);
    }
    let mut panels = Vec::new();
    for s in &tr.series {
        panels.push(Panel {
            title: format!("{} ({})", tr.scenario, s.scheme),
            curves: (0..tr.dim)
                .map(|n| {
                    (
                        format!("P{}", n + 1),
                        COLORS[n % COLORS.len()],
                        tr.times.iter().zip(&s.populations).map(|(&t, p)| (t, p[n])).collect(),
                    )
                })
                .collect(),
        });
    }
    if let Some((reference, rest)) = tr.series.split_first() {
        if !rest.is_empty() {
            let mut curves = Vec::new();
            for (k, s) in rest.iter().enumerate() {
                for n in 0..tr.dim {
                    curves.push((
                        format!("P{} {}-{}", n + 1, s.scheme, reference.scheme),
                        COLORS[(k * tr.dim + n) % COLORS.len()],
                        tr.times
                            .iter()
                            .enumerate()
                            .map(|(i, &t)| (t, (s.populations[i][n] - reference.populations[i][n]).abs()))
                            .collect(),
                    ));
                }
            }
            panels.push(Panel {
                title: "difference".into(),
                curves,
            });
        }
    }
    let mut body = String::new();
    for (k, p) in panels.iter().enumerate() {
        draw_panel(&mut body, k as f64 * PANEL_W, 0.0, p);
    }
    svg_document(PANEL_W * panels.len() as f64, PANEL_H, &body)
}

fn bar_chart(tr: &Trajectories, report: &ComparisonReport) -> String {
    let labels = tr.labels.clone().unwrap_or_default();
    let groups = labels.len().max(1) as f64;
    let width = (80.0 * groups).max(PANEL_W) + MARGIN;
    let (left, top, h) = (MARGIN, 30.0, PANEL_H - 70.0);
    let w = width - MARGIN - 10.0;
    let slot = w / groups;
    let n = tr.series.len().max(1) as f64;
    let mut body = String::new();
    let _ = writeln!(
        body,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{} final populations</text>"#,
        left + w / 2.0,
        report.scenario
    );
    let _ = writeln!(
        body,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#333"/>"##
    );
    for (j, s) in tr.series.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let fin = s.populations.last().cloned().unwrap_or_default();
        for (k, p) in fin.iter().enumerate() {
            let bw = slot * 0.8 / n;
            let x = left + k as f64 * slot + slot * 0.1 + j as f64 * bw;
            let bh = p.clamp(0.0, 1.0) * h;
            let _ = writeln!(
                body,
                r#"<rect x="{x:.2}" y="{:.2}" width="{bw:.2}" height="{bh:.2}" fill="{color}"/>"#,
                top + h - bh
            );
        }
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{}</text>"#,
            left + 6.0,
            top + 12.0 + 12.0 * j as f64,
            s.scheme
        );
    }
    for (k, l) in labels.iter().enumerate() {
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{l}</text>"#,
            left + (k as f64 + 0.5) * slot,
            top + h + 14.0
        );
    }
    svg_document(width, PANEL_H, &body)
}

pub fn emit_plot(tr: &Trajectories, report: &ComparisonReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, svg_string(tr, report))?;
    Ok(())
}
