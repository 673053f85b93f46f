//! Minimal self-contained SVG histogram emitter.

use std::fmt::Write;

pub const WIDTH: f64 = 480.0;
pub const HEIGHT: f64 = 300.0;
pub const PLOT_LEFT: f64 = 56.0;
pub const PLOT_TOP: f64 = 36.0;
pub const PLOT_WIDTH: f64 = 400.0;
pub const PLOT_HEIGHT: f64 = 220.0;

/// One histogram bin: `(lower, upper, proportion)`.
pub type Bin = (f64, f64, f64);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Vertical scale shared by both series, rounded up to a tidy value.
pub fn y_max(scores: &[Bin], reference: &[Bin]) -> f64 {
    let top = scores.iter().chain(reference).map(|b| b.2).fold(0.0, f64::max);
    if top <= 0.0 {
        return 1.0;
    }
    ((top * 20.0).ceil() / 20.0).min(1.0)
}

/// Score histogram as filled bars with the reference histogram drawn as a
/// step outline on top. Bar heights are `proportion / y_max · PLOT_HEIGHT`.
pub fn histogram_svg(title: &str, scores: &[Bin], reference: &[Bin]) -> String {
    let ymax = y_max(scores, reference);
    let x = |v: f64| PLOT_LEFT + v * PLOT_WIDTH;
    let y = |p: f64| PLOT_TOP + PLOT_HEIGHT - p / ymax * PLOT_HEIGHT;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"##,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r##"<g class="scores" fill="#4a7ab5" fill-opacity="0.7">"##);
    for &(lo, hi, p) in scores {
        let h = p / ymax * PLOT_HEIGHT;
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{h:.3}" data-proportion="{p}"/>"##,
            x(lo),
            y(p),
            (hi - lo) * PLOT_WIDTH
        );
    }
    let _ = writeln!(s, "</g>");
    if !reference.is_empty() {
        let mut pts = vec![format!("{:.3},{:.3}", x(reference[0].0), y(0.0))];
        for &(lo, hi, p) in reference {
            pts.push(format!("{:.3},{:.3}", x(lo), y(p)));
            pts.push(format!("{:.3},{:.3}", x(hi), y(p)));
        }
        pts.push(format!("{:.3},{:.3}", x(reference[reference.len() - 1].1), y(0.0)));
        let _ = writeln!(
            s,
            r##"<polyline class="reference" fill="none" stroke="#c0392b" stroke-width="1.5" points="{}"/>"##,
            pts.join(" ")
        );
    }
    // axes and ticks
    let base = PLOT_TOP + PLOT_HEIGHT;
    let _ = writeln!(
        s,
        r##"<path d="M{PLOT_LEFT},{PLOT_TOP} V{base} H{}" fill="none" stroke="black"/>"##,
        PLOT_LEFT + PLOT_WIDTH
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{}" text-anchor="middle">{v}</text>"##,
            x(v),
            base + 16.0
        );
        let p = ymax * v;
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{:.3}" text-anchor="end">{:.2}</text>"##,
            PLOT_LEFT - 6.0,
            y(p) + 4.0,
            p
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle">score</text>"##,
        PLOT_LEFT + PLOT_WIDTH / 2.0,
        HEIGHT - 6.0
    );
    let _ = writeln!(
        s,
        r##"<g font-size="10"><rect x="{}" y="42" width="10" height="10" fill="#4a7ab5" fill-opacity="0.7"/><text x="{}" y="51">scores</text><line x1="{}" y1="62" x2="{}" y2="62" stroke="#c0392b" stroke-width="1.5"/><text x="{}" y="66">reference</text></g>"##,
        PLOT_LEFT + PLOT_WIDTH - 80.0,
        PLOT_LEFT + PLOT_WIDTH - 66.0,
        PLOT_LEFT + PLOT_WIDTH - 80.0,
        PLOT_LEFT + PLOT_WIDTH - 70.0,
        PLOT_LEFT + PLOT_WIDTH - 66.0
    );
    s.push_str("</svg>\n");
    s
}
