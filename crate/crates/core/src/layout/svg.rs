//! SVG pictures of packings. Planar and torus packings are drawn directly
//! (tori with the neighbouring lattice copies); spheres are drawn by
//! orthographic projection onto the xy-plane, hidden arcs dashed.

use super::{Geometry, Packing};
use std::f64::consts::PI;
use std::fmt::Write as _;

struct Canvas {
    body: String,
    min: [f64; 2],
    max: [f64; 2],
}

impl Canvas {
    fn new() -> Self {
        Self {
            body: String::new(),
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    fn extend(&mut self, x: f64, y: f64, pad: f64) {
        self.min = [self.min[0].min(x - pad), self.min[1].min(y - pad)];
        self.max = [self.max[0].max(x + pad), self.max[1].max(y + pad)];
    }

    fn circle(&mut self, c: [f64; 2], r: f64, style: &str) {
        self.extend(c[0], c[1], r);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.9}" cy="{:.9}" r="{:.9}" {style}/>"#,
            c[0], -c[1], r
        );
    }

    fn polyline(&mut self, pts: &[[f64; 2]], closed: bool, style: &str) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            self.extend(p[0], p[1], 0.0);
            let _ = write!(d, "{}{:.9} {:.9} ", if i == 0 { "M" } else { "L" }, p[0], -p[1]);
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(self.body, r#"<path d="{}" {style}/>"#, d.trim_end());
    }

    fn finish(self) -> String {
        let w = (self.max[0] - self.min[0]).max(1e-9);
        let h = (self.max[1] - self.min[1]).max(1e-9);
        let m = 0.02 * w.max(h);
        let stroke = 0.002 * w.max(h);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.9} {:.9} {:.9} {:.9}\" \
             stroke-width=\"{stroke:.9}\">\n{}</svg>\n",
            self.min[0] - m,
            -self.max[1] - m,
            w + 2.0 * m,
            h + 2.0 * m,
            self.body
        )
    }
}

const CIRCLE: &str = r#"fill="none" stroke="black""#;
const GHOST: &str = r#"fill="none" stroke="grey""#;
const EDGE: &str = r#"fill="none" stroke="steelblue""#;
const HIDDEN: &str = r#"fill="none" stroke="grey" stroke-dasharray="0.02 0.02""#;

fn plane_point(p: &[f64]) -> [f64; 2] {
    [p[0], p[1]]
}

/// Render a packing as an SVG document.
pub fn render_svg(packing: &Packing) -> String {
    let mut cv = Canvas::new();
    match packing.geometry {
        Geometry::Plane | Geometry::TorusLattice => {
            let shifts: Vec<[f64; 2]> = match packing.lattice {
                Some([a, b]) => {
                    let mut v = Vec::new();
                    for i in -1..=1 {
                        for j in -1..=1 {
                            let (i, j) = (i as f64, j as f64);
                            v.push([i * a[0] + j * b[0], i * a[1] + j * b[1]]);
                        }
                    }
                    v
                }
                None => vec![[0.0, 0.0]],
            };
            for face in &packing.faces {
                let pts: Vec<[f64; 2]> = face.points.iter().map(|p| plane_point(p)).collect();
                cv.polyline(&pts, true, EDGE);
            }
            for shift in &shifts {
                let style = if shift == &[0.0, 0.0] { CIRCLE } else { GHOST };
                for c in &packing.circles {
                    cv.circle([c.center[0] + shift[0], c.center[1] + shift[1]], c.radius, style);
                }
            }
            if let Some([a, b]) = packing.lattice {
                let o = plane_point(&packing.circles[0].center);
                let cell = [
                    o,
                    [o[0] + a[0], o[1] + a[1]],
                    [o[0] + a[0] + b[0], o[1] + a[1] + b[1]],
                    [o[0] + b[0], o[1] + b[1]],
                ];
                cv.polyline(&cell, true, EDGE);
            }
        }
        Geometry::Sphere => {
            cv.circle([0.0, 0.0], 1.0, GHOST);
            for c in &packing.circles {
                let u = [c.center[0], c.center[1], c.center[2]];
                // Orthonormal frame (e1, e2) perpendicular to the cap centre.
                let helper = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let d = helper[0] * u[0] + helper[1] * u[1] + helper[2] * u[2];
                let e1 = [helper[0] - d * u[0], helper[1] - d * u[1], helper[2] - d * u[2]];
                let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
                let e1 = e1.map(|x| x / n1);
                let e2 = [
                    u[1] * e1[2] - u[2] * e1[1],
                    u[2] * e1[0] - u[0] * e1[2],
                    u[0] * e1[1] - u[1] * e1[0],
                ];
                let (s, co) = c.radius.sin_cos();
                let mut run: Vec<[f64; 2]> = Vec::new();
                let mut visible = None;
                for k in 0..=96 {
                    let t = 2.0 * PI * k as f64 / 96.0;
                    let (st, ct) = t.sin_cos();
                    let p: Vec<f64> = (0..3).map(|i| co * u[i] + s * (ct * e1[i] + st * e2[i])).collect();
                    let vis = p[2] >= 0.0;
                    if visible.is_some() && visible != Some(vis) {
                        cv.polyline(&run, false, if visible == Some(true) { CIRCLE } else { HIDDEN });
                        run = run.split_off(run.len() - 1);
                    }
                    visible = Some(vis);
                    run.push([p[0], p[1]]);
                }
                cv.polyline(&run, false, if visible == Some(true) { CIRCLE } else { HIDDEN });
            }
        }
    }
    cv.finish()
}
