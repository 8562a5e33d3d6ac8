//! SVG trajectory drawings.

use std::fmt::Write as _;

use crate::error::Result;
use crate::geometry::{all_pair_params, HeadingVector, Instance, PairState, DEFAULT_EPS_V};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Coordinates rounded to a fixed number of decimals keep the output
/// byte-identical across platforms.
fn f(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Draw initial positions, nominal trajectories (dashed), deviated
/// trajectories (solid) and safety circles of radius `d/2`.
///
/// For each aircraft a dashed circle marks its position at the closest
/// approach of its tightest pair; two such circles overlap exactly when that
/// pair loses separation.
pub fn plot_svg(inst: &Instance, theta: &HeadingVector) -> Result<String> {
    theta.check_bounds(inst)?;
    let ac = inst.aircraft();
    let n = ac.len() as f64;
    let (cx, cy) = (
        ac.iter().map(|a| a.x0).sum::<f64>() / n,
        ac.iter().map(|a| a.y0).sum::<f64>() / n,
    );
    let radius = ac.iter().map(|a| (a.x0 - cx).hypot(a.y0 - cy)).fold(inst.d(), f64::max);
    let v_min = ac.iter().map(|a| a.v).fold(f64::INFINITY, f64::min);
    let t_end = 2.0 * radius / v_min;
    let half_d = 0.5 * inst.d();

    // Tightest converging encounter per aircraft: (miss distance, time).
    let mut tightest: Vec<Option<(f64, f64)>> = vec![None; ac.len()];
    for pg in all_pair_params(inst) {
        let st = PairState::new(inst, &pg, theta.0[pg.i], theta.0[pg.j]);
        if let crate::geometry::Approach::Converging(t) = st.approach(DEFAULT_EPS_V) {
            if t > t_end {
                continue;
            }
            let miss = st.miss_distance(DEFAULT_EPS_V);
            for k in [pg.i, pg.j] {
                if tightest[k].is_none_or(|(m, _)| miss < m) {
                    tightest[k] = Some((miss, t));
                }
            }
        }
    }

    let reach = ac
        .iter()
        .zip(&theta.0)
        .flat_map(|(a, &t)| [a.position_at(0.0, t_end), a.position_at(t, t_end)])
        .map(|[x, y]| (x - cx).hypot(y - cy))
        .fold(radius, f64::max);
    let extent = 1.05 * (reach + half_d);
    let size = 2.0 * extent;
    let stroke = size / 600.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="600">"#,
        f(cx - extent),
        f(-cy - extent),
        f(size),
        f(size)
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(inst.id()));
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff"/>"##,
        f(cx - extent),
        f(-cy - extent),
        f(size),
        f(size)
    );

    for (k, a) in ac.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let [nx, ny] = a.position_at(0.0, t_end);
        let [dx, dy] = a.position_at(theta.0[k], t_end);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999999" stroke-width="{}" stroke-dasharray="{} {}"/>"##,
            f(a.x0),
            f(-a.y0),
            f(nx),
            f(-ny),
            f(stroke),
            f(4.0 * stroke),
            f(3.0 * stroke)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{}"/>"#,
            f(a.x0),
            f(-a.y0),
            f(dx),
            f(-dy),
            f(1.5 * stroke)
        );
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="{}"/>"#,
            f(a.x0),
            f(-a.y0),
            f(half_d),
            f(stroke)
        );
        if let Some((_, t)) = tightest[k] {
            let [px, py] = a.position_at(theta.0[k], t);
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="{color}" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
                f(px),
                f(-py),
                f(half_d),
                f(stroke),
                f(2.0 * stroke),
                f(2.0 * stroke)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="{}" fill="{color}">{}</text>"#,
            f(a.x0 + half_d),
            f(-a.y0 - half_d),
            f(12.0 * stroke),
            k + 1
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
