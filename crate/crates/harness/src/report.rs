//! Text tables and SVG plots from emitted CSVs.

use std::fmt::Write as _;

use crate::csvio;
use crate::lift::LiftSuiteReport;
use crate::sweep::{SweepCell, SweepReport};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Sweep(SweepReport),
    Lift(LiftSuiteReport),
}

/// Detects the CSV kind from its header and parses it.
pub fn parse_csv(text: &str, origin: &str) -> Result<Parsed> {
    let head = csvio::header(text);
    if head.starts_with("initial_angle_deg") {
        Ok(Parsed::Sweep(SweepReport::from_csv(text, origin)?))
    } else if head.starts_with("scenario") {
        Ok(Parsed::Lift(LiftSuiteReport::from_csv(text, origin)?))
    } else {
        Err(HarnessError::Csv {
            origin: origin.to_string(),
            row: 0,
            message: if head.is_empty() {
                "empty file".into()
            } else {
                format!("unrecognised header {head:?}")
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rendered {
    pub text: String,
    /// File name and SVG document.
    pub plots: Vec<(String, String)>,
}

/// Renders every input; fails before producing anything if any input is
/// malformed.
pub fn render(inputs: &[(String, String)]) -> Result<Rendered> {
    let parsed: Vec<(String, Parsed)> = inputs
        .iter()
        .map(|(origin, text)| Ok((origin.clone(), parse_csv(text, origin)?)))
        .collect::<Result<_>>()?;
    let mut out = Rendered::default();
    for (i, (origin, p)) in parsed.iter().enumerate() {
        writeln!(out.text, "== {origin}").unwrap();
        match p {
            Parsed::Sweep(s) => {
                out.text.push_str(&sweep_table(s));
                out.plots.push((format!("sweep_{i}.svg"), sweep_svg(s)));
            }
            Parsed::Lift(l) => {
                out.text.push_str(&lift_table(l));
                out.plots.push((format!("lift_{i}.svg"), lift_svg(l)));
            }
        }
    }
    Ok(out)
}

pub fn sweep_table(report: &SweepReport) -> String {
    let mut s = String::new();
    for (mode, strategy) in report.series_keys() {
        writeln!(s, "\n{strategy} / {mode} ({} folds)", report.folds()).unwrap();
        writeln!(s, "{:>9}  {:>12}  {:>12}", "angle", "MAE theta", "MAE D (mm)").unwrap();
        for c in report.series(&mode, &strategy) {
            writeln!(
                s,
                "{:>9.1}  {:>12.3}  {:>12.3}",
                c.initial_angle_deg, c.mae_angle_deg, c.mae_distance_mm
            )
            .unwrap();
        }
    }
    s
}

fn pct(r: Option<f64>) -> String {
    r.map_or("-".to_string(), |v| format!("{:.0}%", v * 100.0))
}

pub fn lift_table(report: &LiftSuiteReport) -> String {
    let rates = report.rates();
    let width = rates.iter().map(|r| r.scenario.len()).max().unwrap_or(0).max(24);
    let mut s = String::new();
    writeln!(s, "\n{:<width$}  {:>8}  {:>8}", "scenario", "tactile", "vision").unwrap();
    for r in &rates {
        writeln!(s, "{:<width$}  {:>8}  {:>8}", r.scenario, pct(r.tactile), pct(r.vision)).unwrap();
    }
    let (t, v) = report.aggregate();
    writeln!(s, "{:<width$}  {:>8}  {:>8}", "average", pct(t), pct(v)).unwrap();
    s
}

const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

/// Two panels: angle MAE and distance MAE against initial angle.
pub fn sweep_svg(report: &SweepReport) -> String {
    let keys = report.series_keys();
    let cells = report.cells();
    let (pw, ph, m) = (360.0, 240.0, 45.0);
    let mut s = svg_open(2.0 * pw + 3.0 * m, ph + 2.0 * m + 16.0 * keys.len() as f64);
    let (amin, amax) = cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.initial_angle_deg), hi.max(c.initial_angle_deg))
        });
    let span = (amax - amin).max(1e-9);
    let panels: [(&str, fn(&SweepCell) -> f64); 2] =
        [("MAE theta (deg)", |c| c.mae_angle_deg), ("MAE D (mm)", |c| c.mae_distance_mm)];
    for (p, (title, value)) in panels.iter().enumerate() {
        let x0 = m + p as f64 * (pw + m);
        let ymax = cells.iter().map(value).fold(0.0, f64::max).max(1e-9) * 1.1;
        let _ = writeln!(
            s,
            "<rect x=\"{x0}\" y=\"{m}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{title}</text>\n\
             <text x=\"{x0}\" y=\"{}\">{ymax:.2}</text>\n\
             <text x=\"{x0}\" y=\"{}\">{amin}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{amax}</text>",
            x0 + pw / 2.0,
            m - 8.0,
            m - 2.0,
            m + ph + 14.0,
            x0 + pw,
            m + ph + 14.0,
        );
        for (k, (mode, strategy)) in keys.iter().enumerate() {
            let pts: Vec<String> = report
                .series(mode, strategy)
                .iter()
                .map(|c| {
                    let x = x0 + (c.initial_angle_deg - amin) / span * pw;
                    let y = m + ph - value(c) / ymax * ph;
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                pts.join(" "),
                COLOURS[k % COLOURS.len()]
            );
        }
    }
    for (k, (mode, strategy)) in keys.iter().enumerate() {
        let y = m + ph + 32.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{m}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\"/>\
             <text x=\"{}\" y=\"{}\">{strategy} / {mode}</text>",
            m + 20.0,
            COLOURS[k % COLOURS.len()],
            m + 26.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bars of tactile and vision success rates per scenario.
pub fn lift_svg(report: &LiftSuiteReport) -> String {
    let rates = report.rates();
    let (m, ph, group) = (45.0, 220.0, 70.0);
    let w = 2.0 * m + group * rates.len() as f64;
    let mut s = svg_open(w, ph + 2.0 * m + 40.0);
    let _ = writeln!(
        s,
        "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<text x=\"4\" y=\"{}\">100%</text>",
        m + ph,
        w - m,
        m + ph,
        m + 4.0
    );
    for (i, r) in rates.iter().enumerate() {
        let gx = m + group * i as f64 + 10.0;
        for (j, rate) in [r.tactile, r.vision].into_iter().enumerate() {
            let v = rate.unwrap_or(0.0);
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"22\" height=\"{:.1}\" fill=\"{}\"/>",
                gx + 24.0 * j as f64,
                m + ph - v * ph,
                v * ph,
                COLOURS[j]
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{gx}\" y=\"{}\" transform=\"rotate(30 {gx} {})\">{}</text>",
            m + ph + 14.0,
            m + ph + 14.0,
            r.scenario
        );
    }
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"8\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"17\">tactile</text>\
         <rect x=\"{}\" y=\"8\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"17\">vision</text>",
        COLOURS[0],
        m + 14.0,
        m + 70.0,
        COLOURS[1],
        m + 84.0
    );
    s.push_str("</svg>\n");
    s
}
