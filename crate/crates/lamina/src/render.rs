//! Deterministic SVG rendering of chord sets.
//!
//! Output is a standalone SVG document: the unit circle plus one straight
//! segment per chord, in the order given. Rendering is a pure function of
//! the input: floats are printed with a fixed format, so equal inputs give
//! byte-identical documents.

use crate::geometry::Chord;

/// Rendering options. Out-of-range values are clamped to sane minima, so
/// rendering never fails.
#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Canvas edge in pixels.
    pub size: f64,
    /// Chord stroke width in pixels.
    pub stroke_width: f64,
    /// Color chords by their rank in the input sequence (for a figela
    /// trajectory the sequence order is the birth order).
    pub color_by_time: bool,
    /// Draw dots at the n-th roots of unity.
    pub vertex_marks: Option<u32>,
}

impl Default for RenderOptions {
    fn default() -> RenderOptions {
        RenderOptions {
            size: 800.0,
            stroke_width: 1.0,
            color_by_time: false,
            vertex_marks: None,
        }
    }
}

/// Early-to-late color ramp endpoints (RGB).
const RAMP_LO: (u8, u8, u8) = (31, 119, 180);
const RAMP_HI: (u8, u8, u8) = (214, 39, 40);
const INK: &str = "#1a1a1a";

fn ramp(q: f64) -> String {
    let ch = |lo: u8, hi: u8| (lo as f64 + q * (hi as f64 - lo as f64)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(RAMP_LO.0, RAMP_HI.0),
        ch(RAMP_LO.1, RAMP_HI.1),
        ch(RAMP_LO.2, RAMP_HI.2)
    )
}

/// Renders chords of the unit disk as an SVG document.
pub fn render_svg(chords: &[Chord], opts: &RenderOptions) -> String {
    let size = if opts.size.is_finite() {
        opts.size.max(16.0)
    } else {
        800.0
    };
    let stroke = if opts.stroke_width.is_finite() {
        opts.stroke_width.clamp(0.05, size)
    } else {
        1.0
    };
    let c = size / 2.0;
    let r = c - 0.04 * size;
    let px = |x: f64| c + r * x;
    // SVG y grows downward; flip so angles run counterclockwise on screen.
    let py = |y: f64| c - r * y;

    let mut s = String::new();
    let mut w = |line: &str| {
        s.push_str(line);
        s.push('\n');
    };
    w(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    w(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.3}" height="{size:.3}" viewBox="0 0 {size:.3} {size:.3}">"#
    ));
    w(&format!(
        r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{INK}" stroke-width="{:.3}"/>"#,
        c,
        c,
        r,
        stroke.max(0.75)
    ));
    let denom = (chords.len().saturating_sub(1)).max(1) as f64;
    for (i, chord) in chords.iter().enumerate() {
        let ((x1, y1), (x2, y2)) = chord.endpoints_xy();
        let color = if opts.color_by_time {
            ramp(i as f64 / denom)
        } else {
            INK.to_string()
        };
        w(&format!(
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="{stroke:.3}" stroke-linecap="round"/>"#,
            px(x1),
            py(y1),
            px(x2),
            py(y2)
        ));
    }
    if let Some(n) = opts.vertex_marks {
        let dot = (0.004 * size).max(1.0);
        for k in 0..n {
            let (x, y) = crate::geometry::Angle::new(k as f64 / n.max(1) as f64).to_xy();
            w(&format!(
                r#"<circle cx="{:.3}" cy="{:.3}" r="{dot:.3}" fill="{INK}"/>"#,
                px(x),
                py(y)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_is_circle_only() {
        let svg = render_svg(&[], &RenderOptions::default());
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<line"));
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn diameter_chord_is_horizontal() {
        // Feet at angles 0 and 1/2 are the points (1,0) and (-1,0); with
        // size 800 and 4% margin they land at x = 768 and x = 32, y = 400.
        let svg = render_svg(&[Chord::from_values(0.0, 0.5)], &RenderOptions::default());
        assert!(svg.contains(r#"x1="768.000" y1="400.000" x2="32.000" y2="400.000""#));
    }

    #[test]
    fn byte_deterministic() {
        let chords = vec![
            Chord::from_values(0.1, 0.4),
            Chord::from_values(0.5, 0.9),
            Chord::from_values(0.55, 0.8),
        ];
        let opts = RenderOptions {
            color_by_time: true,
            ..RenderOptions::default()
        };
        let a = render_svg(&chords, &opts);
        let b = render_svg(&chords, &opts);
        assert_eq!(a, b);
    }

    #[test]
    fn time_ramp_runs_blue_to_red() {
        let chords = vec![
            Chord::from_values(0.1, 0.4),
            Chord::from_values(0.5, 0.9),
            Chord::from_values(0.55, 0.8),
        ];
        let opts = RenderOptions {
            color_by_time: true,
            ..RenderOptions::default()
        };
        let svg = render_svg(&chords, &opts);
        assert!(svg.contains("#1f77b4"));
        assert!(svg.contains("#d62728"));
        // Middle chord gets the midpoint color.
        assert!(svg.contains(ramp(0.5).as_str()));
    }

    #[test]
    fn vertex_marks_add_one_dot_per_vertex() {
        let opts = RenderOptions {
            vertex_marks: Some(5),
            ..RenderOptions::default()
        };
        let svg = render_svg(&[], &opts);
        assert_eq!(svg.matches("<circle").count(), 6);
    }

    #[test]
    fn monochrome_by_default() {
        let svg = render_svg(&[Chord::from_values(0.0, 0.25)], &RenderOptions::default());
        assert!(svg.contains(INK));
        assert!(!svg.contains("#1f77b4"));
    }

    #[test]
    fn silly_options_are_clamped_not_fatal() {
        let opts = RenderOptions {
            size: -3.0,
            stroke_width: f64::NAN,
            ..RenderOptions::default()
        };
        let svg = render_svg(&[Chord::from_values(0.0, 0.5)], &opts);
        assert!(svg.contains("<line"));
    }
}
