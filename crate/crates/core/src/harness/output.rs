use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::runner::AggregateCurve;
use super::HarnessError;
use crate::env::RunTrace;

pub const CSV_HEADER: &str = "t,algorithm,mean_regret,stderr,runs";

/// `%g` with 6 significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render_csv(curve: &AggregateCurve) -> String {
    let mut out = String::with_capacity(curve.points.len() * 40);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.t,
            p.algorithm,
            format_sig6(p.mean_regret),
            format_sig6(p.stderr),
            p.runs
        );
    }
    out
}

pub fn render_trace_csv(labels: &[&str], traces: &[Vec<RunTrace>]) -> String {
    let mut out = String::from("run,algorithm,t,user,true_type,arm,reward,regret_increment\n");
    for (label, runs) in labels.iter().zip(traces) {
        for (r, trace) in runs.iter().enumerate() {
            for s in &trace.steps {
                let _ = writeln!(
                    out,
                    "{r},{label},{},{},{},{},{},{}",
                    s.t,
                    s.user,
                    s.true_type,
                    s.arm,
                    s.reward,
                    format_sig6(s.regret_increment)
                );
            }
        }
    }
    out
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Line chart of mean regret with a ±2 stderr band per algorithm.
pub fn render_svg(curve: &AggregateCurve, title: &str) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 190.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let t_max = curve.points.iter().map(|p| p.t).max().unwrap_or(1).max(1) as f64;
    let y_max = curve
        .points
        .iter()
        .map(|p| p.mean_regret + 2.0 * p.stderr)
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let sx = |t: f64| left + pw * t / t_max;
    let sy = |y: f64| top + ph * (1.0 - y.max(0.0) / y_max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (x, y) = (left + pw * f, top + ph * (1.0 - f));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#333"/><text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 5.0,
            top + ph + 19.0,
            format_sig6((t_max * f).round())
        );
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="#333"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            format_sig6(round_tick(y_max * f))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">cumulative regret</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (i, name) in curve.algorithms().into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<_> = curve.series(name).collect();
        let mut band = String::new();
        for p in &pts {
            let _ = write!(band, "{:.1},{:.1} ", sx(p.t as f64), sy(p.mean_regret + 2.0 * p.stderr));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "{:.1},{:.1} ", sx(p.t as f64), sy(p.mean_regret - 2.0 * p.stderr));
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.t as f64), sy(p.mean_regret)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = top + 10.0 + 20.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn round_tick(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(v.abs().log10().floor() as i32 - 2);
    (v / scale).round() * scale
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `regret.csv` and `regret.svg` into `dir`.
pub fn write_artifacts(dir: &Path, curve: &AggregateCurve, title: &str) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("regret.csv"), render_csv(curve))?;
    fs::write(dir.join("regret.svg"), render_svg(curve, title))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runner::CurvePoint;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (123.456789, "123.457"),
            (0.000123456789, "0.000123457"),
            (0.0000123456, "1.23456e-05"),
            (1234567.0, "1.23457e+06"),
            (999999.5, "1e+06"),
            (-2.5, "-2.5"),
            (300.0, "300"),
            (19600.0, "19600"),
            (0.1 + 0.2, "0.3"),
        ];
        for (v, want) in cases {
            assert_eq!(format_sig6(v), want, "{v}");
        }
    }

    #[test]
    fn csv_layout() {
        let curve = AggregateCurve {
            points: vec![CurvePoint {
                t: 100,
                algorithm: "ucb".into(),
                mean_regret: 4.25,
                stderr: 0.125,
                runs: 3,
            }],
        };
        assert_eq!(render_csv(&curve), "t,algorithm,mean_regret,stderr,runs\n100,ucb,4.25,0.125,3\n");
        let svg = render_svg(&curve, "x");
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
