//! Deterministic SVG rendering of a billiard scene: caustic, table,
//! polygon, contact points, and optionally the grid of side intersections.
//!
//! Everything is emitted in a fixed order with Rust's shortest-roundtrip
//! float formatting, so the same scene always produces the same bytes.

use poncelet::billiard::{Billiard, GridConic, PonceletGrid, ProjPoint};
use std::fmt::Write;

const STYLE: &str = "\
  .table { fill: none; stroke: #1f4e79; }\n\
  .caustic { fill: none; stroke: #b33c00; }\n\
  .polygon { fill: none; stroke: #222222; }\n\
  .grid-ellipse { fill: none; stroke: #4d8f4d; }\n\
  .grid-point { fill: #4d8f4d; stroke: none; }\n\
  .contact { fill: #b33c00; stroke: none; }\n\
  .vertex { fill: #222222; stroke: none; }\n\
  .infinity-ray { fill: none; stroke: #4d8f4d; stroke-dasharray: 4 3; }\n";

/// Renders the scene.  The view box is the bounding box of the outermost
/// finite grid ellipse (the table when no grid is drawn), padded by 5%.
pub fn render_scene(billiard: &Billiard, grid: Option<&PonceletGrid>) -> String {
    let table = billiard.table();
    let fam = billiard.family();
    let mut hx = table.a_e();
    let mut hy = table.b_e();
    if let Some(g) = grid {
        for level in &g.levels {
            if level.j == 0 {
                continue;
            }
            if let GridConic::Ellipse(e) = &level.conic {
                hx = hx.max(e.a_e());
                hy = hy.max(e.b_e());
            }
        }
    }
    hx *= 1.05;
    hy *= 1.05;
    let height = (800.0 * hy / hx).round();
    let major = hx.max(hy);
    let stroke = 0.004 * major;
    let dash = 0.008 * major;
    let dot = 0.012 * major;
    // Long enough to leave the padded view box from any interior point.
    let ray = 4.0 * (hx + hy);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"{height}\" \
         viewBox=\"{} {} {} {}\">",
        -hx,
        -hy,
        2.0 * hx,
        2.0 * hy
    );
    let _ = writeln!(s, "<style>");
    s.push_str(STYLE);
    let _ = writeln!(
        s,
        "  .table, .caustic, .polygon, .grid-ellipse, .infinity-ray \
         {{ stroke-width: {stroke}; }}"
    );
    let _ = writeln!(
        s,
        "  .infinity-ray {{ stroke-dasharray: {dash} {}; }}",
        0.75 * dash
    );
    let _ = writeln!(s, "</style>");
    // Flip the y axis so mathematical coordinates render upright.
    let _ = writeln!(s, "<g transform=\"scale(1,-1)\">");

    let _ = writeln!(
        s,
        "<ellipse class=\"caustic\" cx=\"0\" cy=\"0\" rx=\"{}\" ry=\"{}\"/>",
        fam.a_c(),
        fam.b_c()
    );
    let _ = writeln!(
        s,
        "<ellipse class=\"table\" cx=\"0\" cy=\"0\" rx=\"{}\" ry=\"{}\"/>",
        table.a_e(),
        table.b_e()
    );

    if let Some(g) = grid {
        for level in &g.levels {
            if level.j == 0 {
                continue;
            }
            if let GridConic::Ellipse(e) = &level.conic {
                let _ = writeln!(
                    s,
                    "<ellipse class=\"grid-ellipse\" cx=\"0\" cy=\"0\" rx=\"{}\" ry=\"{}\"/>",
                    e.a_e(),
                    e.b_e()
                );
            }
        }
    }

    let verts = billiard.vertices();
    if !verts.is_empty() {
        let mut d = String::new();
        let _ = write!(d, "M {} {}", verts[0].x, verts[0].y);
        for p in &verts[1..] {
            let _ = write!(d, " L {} {}", p.x, p.y);
        }
        if billiard.is_closed() {
            d.push_str(" Z");
        }
        let _ = writeln!(s, "<path class=\"polygon\" d=\"{d}\"/>");
    }

    if let Some(g) = grid {
        for level in &g.levels {
            if level.j == 0 {
                continue;
            }
            for p in &level.points {
                match p {
                    ProjPoint::Finite(q) => {
                        let _ = writeln!(
                            s,
                            "<circle class=\"grid-point\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                            q.x, q.y, 0.6 * dot
                        );
                    }
                    ProjPoint::AtInfinity(dir) => {
                        let _ = writeln!(
                            s,
                            "<line class=\"infinity-ray\" x1=\"0\" y1=\"0\" x2=\"{}\" y2=\"{}\"/>",
                            ray * dir.x,
                            ray * dir.y
                        );
                    }
                }
            }
        }
    }

    for p in billiard.contacts() {
        let _ = writeln!(
            s,
            "<circle class=\"contact\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            p.x, p.y, 0.7 * dot
        );
    }
    for p in verts {
        let _ = writeln!(
            s,
            "<circle class=\"vertex\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            p.x, p.y, dot
        );
    }

    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}
