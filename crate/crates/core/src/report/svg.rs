use std::fmt::Write as _;

use super::RateSummary;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn edge(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.3}").trim_end_matches('0').trim_end_matches('.').to_string())
}

/// Horizontal bar chart: one bar per summary row, with the Wilson interval
/// drawn as a whisker.
pub fn render_rates_svg(summary: &RateSummary, title: &str) -> String {
    let (label_w, plot_w, row_h, top) = (260.0, 400.0, 22.0, 40.0);
    let height = top + row_h * summary.rows.len() as f64 + 30.0;
    let width = label_w + plot_w + 80.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    let x0 = label_w;
    for (i, r) in summary.rows.iter().enumerate() {
        let y = top + row_h * i as f64;
        let label = if r.factor == "overall" {
            format!("{} overall", r.model_id)
        } else {
            format!("{} {} [{}, {}]", r.model_id, r.factor, edge(r.lower_edge), edge(r.upper_edge))
        };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 14.0, escape(&label));
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{}" width="{:.2}" height="{}" fill="#4c72b0"/>"##,
            y + 3.0,
            r.rate * plot_w,
            row_h - 6.0
        );
        let (a, b) = (x0 + r.ci_lower * plot_w, x0 + r.ci_upper * plot_w);
        let _ = writeln!(
            s,
            r##"<path d="M{a:.2} {ym:.2}H{b:.2}M{a:.2} {y1:.2}V{y2:.2}M{b:.2} {y1:.2}V{y2:.2}" stroke="#222" fill="none"/>"##,
            ym = y + row_h / 2.0,
            y1 = y + 6.0,
            y2 = y + row_h - 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}">{:.1}% ({}/{})</text>"#,
            b + 6.0,
            y + 14.0,
            r.rate * 100.0,
            r.k,
            r.n
        );
    }
    let axis_y = top + row_h * summary.rows.len() as f64 + 4.0;
    let _ = writeln!(s, r##"<path d="M{x0} {axis_y}H{}" stroke="#222"/>"##, x0 + plot_w);
    for t in 0..=4 {
        let x = x0 + plot_w * t as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{}%</text>"#, axis_y + 16.0, t * 25);
    }
    s.push_str("</svg>\n");
    s
}
