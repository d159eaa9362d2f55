//! Minimal hand-rolled SVG output. CSV files are the contract; these
//! plots are a convenience mirror of them.

use crate::analyze::AngleAnalysis;
use crate::sweep::SummaryRow;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let x0 = MARGIN;
    let y0 = HEIGHT - MARGIN;
    let x1 = WIDTH - MARGIN;
    let y1 = MARGIN;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{x_label}</text>",
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_label}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

/// Accuracy-versus-K line plot, one series per (condition, regime),
/// solid mean line over a shaded ±std band.
pub fn accuracy_plot(summary: &[SummaryRow]) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    axes(&mut out, "captures K", "test accuracy");

    let ks: Vec<usize> = {
        let mut v: Vec<usize> = summary.iter().map(|s| s.k).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    if ks.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (k_min, k_max) = (*ks.first().unwrap() as f64, *ks.last().unwrap() as f64);
    let x_of = |k: f64| {
        if k_max > k_min {
            MARGIN + (k - k_min) / (k_max - k_min) * (WIDTH - 2.0 * MARGIN)
        } else {
            WIDTH / 2.0
        }
    };
    let y_of = |acc: f64| HEIGHT - MARGIN - acc.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    for k in &ks {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{k}</text>",
            x_of(*k as f64),
            HEIGHT - MARGIN + 18.0
        );
    }
    for tick in 0..=5 {
        let acc = tick as f64 / 5.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{acc:.1}</text>",
            MARGIN - 8.0,
            y_of(acc) + 4.0
        );
    }

    let mut series: Vec<(String, Vec<&SummaryRow>)> = Vec::new();
    for row in summary {
        let key = format!("{} {}", row.condition.label(), row.regime.label());
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(row),
            None => series.push((key, vec![row])),
        }
    }

    for (idx, (name, mut rows)) in series.into_iter().enumerate() {
        rows.sort_by_key(|r| r.k);
        let color = PALETTE[idx % PALETTE.len()];
        let mut band = String::new();
        for r in &rows {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                x_of(r.k as f64),
                y_of(r.mean_accuracy + r.std_accuracy)
            );
        }
        for r in rows.iter().rev() {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                x_of(r.k as f64),
                y_of(r.mean_accuracy - r.std_accuracy)
            );
        }
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
            band.trim_end()
        );
        let line: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", x_of(r.k as f64), y_of(r.mean_accuracy)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            line.join(" ")
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * (idx as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter of optimized QWP angle pairs, axes in degrees over [0, 180).
pub fn angle_scatter_plot(analysis: &AngleAnalysis) -> String {
    let mut out = String::new();
    svg_open(&mut out);
    axes(
        &mut out,
        "generator QWP angle (deg)",
        "analyzer QWP angle (deg)",
    );
    let scale = |deg: f64, span: f64| deg / 180.0 * span;
    for step in (0..=180).step_by(45) {
        let x = MARGIN + scale(step as f64, WIDTH - 2.0 * MARGIN);
        let y = HEIGHT - MARGIN - scale(step as f64, HEIGHT - 2.0 * MARGIN);
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{step}</text>",
            HEIGHT - MARGIN + 18.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{y:.2}\" font-size=\"12\" text-anchor=\"end\">{step}</text>",
            MARGIN - 8.0
        );
    }
    for r in &analysis.records {
        let x = MARGIN + scale(r.theta_qg.to_degrees(), WIDTH - 2.0 * MARGIN);
        let y = HEIGHT - MARGIN - scale(r.theta_qa.to_degrees(), HEIGHT - 2.0 * MARGIN);
        let color = PALETTE[r.rank % PALETTE.len()];
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.7\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use learn::Regime;
    use polarimeter::ConditionTag;

    #[test]
    fn plot_contains_one_series_per_condition_regime() {
        let summary = vec![
            SummaryRow {
                condition: ConditionTag::Qwp,
                regime: Regime::Optimized,
                k: 2,
                mean_accuracy: 0.6,
                std_accuracy: 0.05,
                n_trials: 10,
            },
            SummaryRow {
                condition: ConditionTag::Qwp,
                regime: Regime::Optimized,
                k: 3,
                mean_accuracy: 0.7,
                std_accuracy: 0.04,
                n_trials: 10,
            },
            SummaryRow {
                condition: ConditionTag::Qwp,
                regime: Regime::Random,
                k: 2,
                mean_accuracy: 0.5,
                std_accuracy: 0.1,
                n_trials: 10,
            },
        ];
        let svg = accuracy_plot(&summary);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains("QWP Optimized"));
    }

    #[test]
    fn empty_summary_still_renders_a_frame() {
        let svg = accuracy_plot(&[]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
