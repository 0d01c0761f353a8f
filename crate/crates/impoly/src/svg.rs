//! SVG plot emission.
//!
//! Maps are drawn through an orthogonal projection onto two chosen
//! coordinates, one polyline per domain edge per map: the primary map
//! solid, an optional reference map dashed. Axis labels are color coded by
//! the sign their coordinate carries in the Minkowski form. Output is
//! SVG 1.1, emitted deterministically.

use std::fmt::Write as _;

use crate::forms::PLMap;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Renders `main` (solid) and optionally `reference` (dashed) projected
/// onto coordinates `(i, j)`.
pub fn render_plot(main: &PLMap, reference: Option<&PLMap>, proj: (usize, usize)) -> String {
    let (ci, cj) = proj;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut scan = |map: &PLMap| {
        for im in map.images() {
            lo[0] = lo[0].min(im[ci]);
            hi[0] = hi[0].max(im[ci]);
            lo[1] = lo[1].min(im[cj]);
            hi[1] = hi[1].max(im[cj]);
        }
    };
    scan(main);
    if let Some(r) = reference {
        scan(r);
    }
    for k in 0..2 {
        if !(hi[k] - lo[k] > 0.0) {
            lo[k] -= 0.5;
            hi[k] += 0.5;
        }
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (hi[0] - lo[0]);
    let sy = (HEIGHT - 2.0 * MARGIN) / (hi[1] - lo[1]);
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN + (x - lo[0]) * sx,
            HEIGHT - MARGIN - (y - lo[1]) * sy,
        )
    };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );

    let axis_color = |positive: bool| if positive { "#1f6fb4" } else { "#c4392f" };
    let sig = main.signature;
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"{:.1}\" fill=\"{}\" font-size=\"14\">x{} ({})</text>",
        WIDTH - MARGIN,
        HEIGHT - MARGIN / 3.0,
        axis_color(ci < sig.p),
        ci,
        if ci < sig.p { "+" } else { "-" },
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"{:.1}\" fill=\"{}\" font-size=\"14\">x{} ({})</text>",
        MARGIN / 4.0,
        MARGIN / 2.0,
        axis_color(cj < sig.p),
        cj,
        if cj < sig.p { "+" } else { "-" },
    );

    let mut draw = |map: &PLMap, class: &str, style: &str| {
        for (u, w) in map.complex.edges() {
            let (x1, y1) = to_px(map.image(u)[ci], map.image(u)[cj]);
            let (x2, y2) = to_px(map.image(w)[ci], map.image(w)[cj]);
            let _ = writeln!(
                out,
                "  <polyline class=\"{class}\" points=\"{x1:.6},{y1:.6} {x2:.6},{y2:.6}\" fill=\"none\" {style}/>"
            );
        }
    };
    if let Some(r) = reference {
        draw(r, "reference", "stroke=\"#9a9a9a\" stroke-width=\"1\" stroke-dasharray=\"6,4\"");
    }
    draw(main, "map", "stroke=\"#101010\" stroke-width=\"1.5\"");

    out.push_str("</svg>\n");
    out
}

/// Number of polylines of a given class in rendered output, for checks.
pub fn count_polylines(svg: &str, class: &str) -> usize {
    let needle = format!("<polyline class=\"{class}\"");
    svg.matches(&needle).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::forms::MinkowskiSignature;

    #[test]
    fn one_polyline_per_edge_per_map() {
        let x = build_complex(&[0, 1, 2], &[vec![0, 1], vec![1, 2]]).unwrap();
        let f = PLMap::new(
            x.clone(),
            MinkowskiSignature::new(2, 0).unwrap(),
            vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![2.0, -0.1]],
        )
        .unwrap();
        let svg = render_plot(&f, Some(&f), (0, 1));
        assert_eq!(count_polylines(&svg, "map"), 2);
        assert_eq!(count_polylines(&svg, "reference"), 2);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("</svg>"));
        // deterministic output
        assert_eq!(svg, render_plot(&f, Some(&f), (0, 1)));
    }

    #[test]
    fn axis_labels_carry_block_signs() {
        let x = build_complex(&[0, 1], &[vec![0, 1]]).unwrap();
        let f = PLMap::new(
            x,
            MinkowskiSignature::new(1, 1).unwrap(),
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let svg = render_plot(&f, None, (0, 1));
        assert!(svg.contains("x0 (+)"));
        assert!(svg.contains("x1 (-)"));
    }
}
