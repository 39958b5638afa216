//! Minimal SVG line plot of `P_c` against `p`.

use std::fmt::Write as _;

use qsw_core::{SchemeId, SweepRecord};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn color(s: SchemeId) -> &'static str {
    match s {
        SchemeId::A => "#d4a017",
        SchemeId::B => "#1f4fd1",
        SchemeId::C => "#d62728",
        SchemeId::D => "#2ca02c",
    }
}

fn marker(out: &mut String, s: SchemeId, x: f64, y: f64) {
    let c = color(s);
    let _ = match s {
        SchemeId::A => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="{c}"/>"#,
            x - 4.0,
            y - 4.0
        ),
        SchemeId::B => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#,
            x,
            y - 5.0,
            x - 5.0,
            y + 4.0,
            x + 5.0,
            y + 4.0
        ),
        SchemeId::C => writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4.5" fill="white" stroke="{c}" stroke-width="1.5"/>"#
        ),
        SchemeId::D => writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4.5" fill="{c}"/>"#
        ),
    };
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the records at `tau` (one polyline per scheme) with an optional
/// dashed line at `bound`. Non-finite points are left out.
pub fn render_sweep_svg(
    records: &[SweepRecord],
    schemes: &[SchemeId],
    tau: f64,
    bound: Option<f64>,
    title: &str,
) -> String {
    let at_tau: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.tau == tau && r.pc.is_finite())
        .collect();

    let mut lo = at_tau.iter().map(|r| r.pc).fold(f64::INFINITY, f64::min);
    let mut hi = at_tau
        .iter()
        .map(|r| r.pc)
        .fold(f64::NEG_INFINITY, f64::max);
    if let Some(b) = bound {
        lo = lo.min(b);
        hi = hi.max(b);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let mut y_min = ((lo * 10.0).floor() / 10.0).clamp(0.0, 0.9);
    let mut y_max = ((hi * 10.0).ceil() / 10.0).clamp(0.1, 1.0);
    if y_max - y_min < 0.1 {
        y_max = (y_min + 0.1).min(1.0);
        y_min = y_max - 0.1;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |p: f64| LEFT + p * plot_w;
    let sy = |v: f64| TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="x-ticks">"#);
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let x = sx(p);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{p:.1}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(out, "</g>");

    let n_y = ((y_max - y_min) / 0.05).round() as usize;
    let _ = writeln!(out, r#"<g class="y-ticks">"#);
    for k in 0..=n_y {
        let v = y_min + k as f64 * 0.05;
        let y = sy(v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">p</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">probability of correct detection</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    if let Some(b) = bound {
        let y = sy(b);
        let _ = writeln!(
            out,
            r##"<line class="bound" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
            LEFT + plot_w
        );
    }

    for &s in schemes {
        let mut pts: Vec<(f64, f64)> = at_tau
            .iter()
            .filter(|r| r.scheme == s)
            .map(|r| (r.p, r.pc))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let _ = writeln!(out, r#"<g class="scheme-{}">"#, s.letter());
        let coords: Vec<String> = pts
            .iter()
            .map(|&(p, v)| format!("{:.2},{:.2}", sx(p), sy(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            coords.join(" "),
            color(s)
        );
        for &(p, v) in &pts {
            marker(&mut out, s, sx(p), sy(v));
        }
        let _ = writeln!(out, "</g>");
    }

    let lx = LEFT + plot_w + 20.0;
    let _ = writeln!(out, r#"<g class="legend">"#);
    let mut ly = TOP + 10.0;
    for &s in schemes {
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="1.5"/>"#,
            lx + 30.0,
            color(s)
        );
        marker(&mut out, s, lx + 15.0, ly);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">scheme ({})</text>"#,
            lx + 38.0,
            ly + 4.0,
            s.letter()
        );
        ly += 22.0;
    }
    if bound.is_some() {
        let _ = writeln!(
            out,
            r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
            lx + 30.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">optimal bound</text>"#,
            lx + 38.0,
            ly + 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
