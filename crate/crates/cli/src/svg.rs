//! Minimal stand-alone SVG stem plots of one-sided spectra.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
/// Dynamic range shown on a log ordinate, in decades.
const LOG_DECADES: f64 = 16.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Plots `pairs` as stems, skipping the 0 Hz bin. The abscissa runs to 1.5x
/// the highest mirror frequency (or Nyquist) and mirror frequencies are
/// marked with dashed lines.
pub fn stem_plot(title: &str, pairs: &[[f64; 2]], mirrors: &[(String, f64)], log: bool) -> String {
    let nyquist = pairs.last().map(|p| p[0]).unwrap_or(1.0);
    let top_mirror = mirrors.iter().map(|m| m.1).fold(0.0, f64::max);
    let f_max = if top_mirror > 0.0 {
        (1.5 * top_mirror).min(nyquist)
    } else {
        nyquist
    };
    let shown: Vec<[f64; 2]> = pairs
        .iter()
        .copied()
        .filter(|p| p[0] > 0.0 && p[0] <= f_max)
        .collect();
    let v_max = shown.iter().map(|p| p[1]).fold(0.0, f64::max);
    let (plot_w, plot_h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |f: f64| MARGIN + plot_w * f / f_max;
    let y = |v: f64| {
        let frac = if v_max <= 0.0 {
            0.0
        } else if log {
            let lo = v_max.log10() - LOG_DECADES;
            ((v.max(f64::MIN_POSITIVE).log10() - lo) / LOG_DECADES).clamp(0.0, 1.0)
        } else {
            v / v_max
        };
        HEIGHT - MARGIN - plot_h * frac
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let base = HEIGHT - MARGIN;
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN} {MARGIN} V{base} H{}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">frequency (Hz)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" text-anchor="end">0</text>"#,
        base + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{f_max:.0}</text>"#,
        WIDTH - MARGIN,
        base + 16.0
    );
    let scale = if log {
        format!("log, max {v_max:.3e}")
    } else {
        format!("max {v_max:.3e}")
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" >{scale}</text>"#,
        MARGIN + 4.0,
        MARGIN - 6.0
    );
    for (name, f) in mirrors {
        if *f <= f_max {
            let _ = writeln!(
                s,
                r##"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{base}" stroke="#bbb" stroke-dasharray="4 3"/><text x="{0:.2}" y="{1}" text-anchor="middle" fill="#555">{2}</text>"##,
                x(*f),
                MARGIN - 20.0,
                escape(name)
            );
        }
    }
    let _ = write!(s, r##"<path fill="none" stroke="#1f5fa8" d=""##);
    for [f, v] in &shown {
        let top = y(*v);
        if top < base {
            let _ = write!(s, "M{:.2} {base}V{top:.2}", x(*f));
        }
    }
    let _ = writeln!(s, r#""/>"#);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_bin_is_not_drawn() {
        let pairs = [[0.0, 100.0], [1.0, 1.0], [2.0, 0.5]];
        let svg = stem_plot("t", &pairs, &[("A".into(), 1.0)], false);
        assert!(svg.contains("max 1.000e0"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn escapes_labels() {
        let svg = stem_plot(
            "a<b",
            &[[0.0, 0.0], [1.0, 1.0]],
            &[("x&y".into(), 1.0)],
            true,
        );
        assert!(svg.contains("a&lt;b") && svg.contains("x&amp;y"));
    }
}
