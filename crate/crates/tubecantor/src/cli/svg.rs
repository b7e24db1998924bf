//! Static SVG rendering of a planar generation: one `<rect>` per cube on a
//! 1000 by 1000 canvas, with an optional worst-tube overlay drawn as a wide
//! stroked line. Output is built from fixed-precision strings only, so the
//! bytes are a pure function of the input.

use crate::geometry::{Cube, Tube};
use crate::Real;

const CANVAS: Real = 1000.0;

fn px(x: Real) -> String {
    format!("{:.4}", x * CANVAS)
}

/// Maps a unit-square point to canvas coordinates (y axis flipped).
fn map_point(x: Real, y: Real) -> (String, String) {
    (px(x), px(1.0 - y))
}

pub fn render_svg(cubes: &[Cube<Real>], overlay: Option<&Tube<Real>>) -> String {
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" \
         viewBox=\"0 0 1000 1000\">\n",
    );
    out.push_str(
        "<path d=\"M0 0H1000V1000H0Z\" fill=\"#ffffff\" stroke=\"#444444\" \
         stroke-width=\"1\"/>\n",
    );
    if let Some(tube) = overlay {
        // Endpoints 2 units out along the axis cross the whole square from
        // any interior anchor.
        let (ax, ay) = (tube.anchor.coords[0], tube.anchor.coords[1]);
        let (dx, dy) = (tube.direction[0], tube.direction[1]);
        let (x1, y1) = map_point(ax - 2.0 * dx, ay - 2.0 * dy);
        let (x2, y2) = map_point(ax + 2.0 * dx, ay + 2.0 * dy);
        out.push_str(&format!(
            "<path d=\"M{x1} {y1}L{x2} {y2}\" stroke=\"#c0392b\" stroke-opacity=\"0.35\" \
             stroke-width=\"{}\" fill=\"none\"/>\n",
            px(tube.width)
        ));
    }
    for cube in cubes {
        let (x, y) = map_point(cube.lo(0), cube.hi(1));
        out.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{w}\" fill=\"#20609f\"/>\n",
            w = px(cube.side)
        ));
    }
    out.push_str("</svg>\n");
    out
}
