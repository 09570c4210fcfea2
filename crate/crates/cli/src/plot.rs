//! `plot`: SVG of a trace. Top panel: real and imaginary parts of the
//! eigenvalue estimate; bottom panel: log10 of the residual.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{ensure, Result};
use biortho::io::IoError;
use clap::ValueEnum;

use crate::trace::{self, TraceRecord};
use crate::EXIT_OK;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TICKS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Abscissa {
    /// Integration time (flow) or iteration (power).
    T,
    /// Record index.
    Step,
}

#[derive(clap::Args)]
pub struct Args {
    /// JSON-lines trace written by `solve` or `experiment`.
    trace: PathBuf,
    /// Output SVG; default is the trace path with `.svg`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Abscissa::T)]
    x: Abscissa,
    #[arg(long)]
    title: Option<String>,
}

pub fn run(args: &Args) -> Result<u8> {
    let records = trace::read(&args.trace)?;
    ensure!(!records.is_empty(), "{} holds no records", args.trace.display());
    let title = args.title.clone().unwrap_or_else(|| args.trace.display().to_string());
    let svg = render(&records, args.x, &title);
    let out = args.out.clone().unwrap_or_else(|| args.trace.with_extension("svg"));
    fs::write(&out, svg).map_err(|source| IoError::Io { path: out.clone(), source })?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{v:.2e}")
    }
}

struct Panel {
    top: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn frame(&self, svg: &mut String, y_label: &str, x_label: &str) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (self.top, self.top + self.height);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            x1 - x0,
            self.height
        );
        for k in 0..=TICKS {
            let f = k as f64 / TICKS as f64;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{y1}" stroke="#ddd"/><text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"##,
                y1 + 14.0,
                label(xv)
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{x0}" y1="{py:.1}" x2="{x1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"##,
                x0 - 4.0,
                py + 4.0,
                label(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.1}" font-size="12" transform="rotate(-90 16 {:.1})" text-anchor="middle">{y_label}</text>"#,
            y0 + self.height / 2.0,
            y0 + self.height / 2.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{x_label}</text>"#,
            (x0 + x1) / 2.0,
            y1 + 30.0
        );
    }

    fn polyline(&self, svg: &mut String, pts: &[(f64, f64)], colour: &str) {
        let mut s = String::new();
        for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = write!(s, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            s.trim_end()
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(records: &[TraceRecord], abscissa: Abscissa, title: &str) -> String {
    let xs: Vec<f64> = records
        .iter()
        .map(|r| match abscissa {
            Abscissa::T => r.t,
            Abscissa::Step => r.step as f64,
        })
        .collect();
    let x_label = match abscissa {
        Abscissa::T => "t",
        Abscissa::Step => "step",
    };
    let re: Vec<(f64, f64)> = xs.iter().zip(records).map(|(&x, r)| (x, r.lambda_re)).collect();
    let im: Vec<(f64, f64)> = xs.iter().zip(records).map(|(&x, r)| (x, r.lambda_im)).collect();
    let res: Vec<(f64, f64)> =
        xs.iter().zip(records).map(|(&x, r)| (x, r.residual.max(1e-300).log10())).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let x = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let lam = Panel { top: 40.0, height: 260.0, x, y: range(re.iter().chain(&im).map(|p| p.1)) };
    let resid = Panel { top: 350.0, height: 160.0, x, y: range(res.iter().map(|p| p.1)) };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    lam.frame(&mut svg, "eigenvalue estimate", x_label);
    lam.polyline(&mut svg, &re, "#1f77b4");
    lam.polyline(&mut svg, &im, "#d62728");
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="58" font-size="12" fill="#1f77b4" text-anchor="end">Re λ</text><text x="{:.1}" y="74" font-size="12" fill="#d62728" text-anchor="end">Im λ</text>"##,
        WIDTH - RIGHT - 8.0,
        WIDTH - RIGHT - 8.0
    );
    resid.frame(&mut svg, "log10 residual", x_label);
    resid.polyline(&mut svg, &res, "#2ca02c");
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: u64, t: f64, re: f64, im: f64, residual: f64) -> TraceRecord {
        TraceRecord { step, t, lambda_re: re, lambda_im: im, residual }
    }

    #[test]
    fn svg_has_three_curves() {
        let rs: Vec<_> = (0..20)
            .map(|k| rec(k, 0.1 * k as f64, 1.0 - 0.5f64.powi(k as i32), -0.3, 10f64.powi(-(k as i32))))
            .collect();
        let svg = render(&rs, Abscissa::T, "a < b");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn single_record_does_not_divide_by_zero() {
        let svg = render(&[rec(0, 0.0, 1.0, 0.0, 0.0)], Abscissa::Step, "one");
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn labels() {
        assert_eq!(label(0.5), "0.5");
        assert_eq!(label(2.0), "2");
        assert_eq!(label(-0.0), "0");
        assert_eq!(label(1.5e-7), "1.50e-7");
    }
}
