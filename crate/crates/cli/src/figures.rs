//! Layered SVG rendering of planar instances: the ball set, the family of
//! level sets, and the shrinking/growing sequences at the farthest distance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ballpoly::{element_at, farthest_2d, qset_radii_sq, Instance, Point, SequenceError};
use thiserror::Error;

/// Indices drawn when none are given.
pub const DEFAULT_FIGURE_INDICES: [i64; 5] = [-30, -10, -3, 0, 2];
/// Fractions of `r0` at which family members are drawn.
pub const FAMILY_FRACTIONS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;

const STYLE: &str = "circle { fill: none; stroke-width: 1.5; }\n\
    .q { stroke: #1a9641; stroke-width: 2.5; }\n\
    .family { stroke: #2c7bb6; }\n\
    .r0-member { stroke: #d01c8b; stroke-width: 3; }\n\
    .r0-sphere { stroke: #777777; stroke-dasharray: 6 4; }\n\
    .backward { stroke: #e66101; }\n\
    .forward { stroke: #5e3c99; }\n\
    .maximizer { fill: #d7191c; stroke: none; }\n\
    .c0 { fill: #000000; stroke: none; }\n\
    text { font-family: sans-serif; font-size: 14px; }";

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("figures need a planar instance, got dimension {0}")]
    DimensionUnsupported(usize),
    #[error("r0 must be finite and positive, got {0}")]
    InvalidRadius(f64),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One drawable circle with its role and optional data tags.
#[derive(Debug, Clone)]
struct Circle {
    center: [f64; 2],
    radius: f64,
    class: &'static str,
    tags: Vec<(&'static str, String)>,
}

#[derive(Debug, Clone)]
struct Layer {
    id: &'static str,
    caption: Option<String>,
    circles: Vec<Circle>,
    markers: Vec<([f64; 2], &'static str)>,
}

impl Layer {
    fn new(id: &'static str) -> Self {
        Self { id, caption: None, circles: Vec::new(), markers: Vec::new() }
    }
}

fn xy(p: &Point) -> [f64; 2] {
    [p.coords[0], p.coords[1]]
}

/// World-to-canvas map fitted to a set of layers.
struct Frame {
    min: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(layers: &[&Layer]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let discs = layers.iter().flat_map(|l| l.circles.iter().map(|c| (c.center, c.radius)).chain(l.markers.iter().map(|m| (m.0, 0.0))));
        for (c, r) in discs {
            for a in 0..2 {
                lo[a] = lo[a].min(c[a] - r);
                hi[a] = hi[a].max(c[a] + r);
            }
        }
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let min = [lo[0] - pad, lo[1] - pad];
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]) + 2.0 * pad;
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Self { min, scale, height: (hi[1] - lo[1] + 2.0 * pad) * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.min[0]) * self.scale, self.height - MARGIN - (p[1] - self.min[1]) * self.scale)
    }
}

fn render(frame: &Frame, title: &str, r0: f64, layers: &[&Layer]) -> String {
    let mut s = String::new();
    let h = frame.height;
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{h:.3}" viewBox="0 0 {CANVAS} {h:.3}" data-r0="{r0:e}">"#).unwrap();
    writeln!(s, "<title>{title}</title>\n<style>\n{STYLE}\n</style>").unwrap();
    for layer in layers {
        writeln!(s, r#"<g id="layer-{}">"#, layer.id).unwrap();
        for c in &layer.circles {
            let (x, y) = frame.map(c.center);
            write!(s, r#"  <circle class="{}" cx="{x:.4}" cy="{y:.4}" r="{:.4}" data-cx="{:e}" data-cy="{:e}" data-r="{:e}""#, c.class, c.radius * frame.scale, c.center[0], c.center[1], c.radius).unwrap();
            for (k, v) in &c.tags {
                write!(s, r#" data-{k}="{v}""#).unwrap();
            }
            s.push_str("/>\n");
        }
        for (p, class) in &layer.markers {
            let (x, y) = frame.map(*p);
            writeln!(s, r#"  <circle class="{class}" cx="{x:.4}" cy="{y:.4}" r="4" data-cx="{:e}" data-cy="{:e}"/>"#, p[0], p[1]).unwrap();
        }
        s.push_str("</g>\n");
    }
    let captions: Vec<&String> = layers.iter().filter_map(|l| l.caption.as_ref()).collect();
    for (j, cap) in captions.iter().rev().enumerate() {
        writeln!(s, r#"<text x="{MARGIN}" y="{:.1}">{cap}</text>"#, h - 6.0 - 18.0 * j as f64).unwrap();
    }
    writeln!(s, r#"<text x="{MARGIN}" y="16">R0 = {r0:.6}</text>"#).unwrap();
    s.push_str("</svg>\n");
    s
}

fn q_layer(inst: &Instance) -> Layer {
    let mut l = Layer::new("q");
    for (k, b) in inst.q.balls().iter().enumerate() {
        l.circles.push(Circle { center: xy(&b.center), radius: b.radius, class: "q", tags: vec![("k", k.to_string())] });
    }
    l
}

/// `C0` and the farthest points, drawn last so nothing covers them.
fn points_layer(inst: &Instance, maximizers: &[Point]) -> Layer {
    let mut l = Layer::new("points");
    l.markers.push((xy(&inst.c0), "c0"));
    l.markers.extend(maximizers.iter().map(|p| (xy(p), "maximizer")));
    l
}

/// Circles of the level-set member at `r_sq`; balls with non-positive squared radius are omitted.
fn member_circles(inst: &Instance, r_sq: f64, class: &'static str, r: f64) -> Vec<Circle> {
    qset_radii_sq(inst, r_sq)
        .into_iter()
        .zip(inst.q.balls())
        .enumerate()
        .filter(|(_, (rs, _))| *rs > 0.0)
        .map(|(k, (rs, b))| Circle {
            center: xy(&b.center),
            radius: rs.sqrt(),
            class,
            tags: vec![("k", k.to_string()), ("big-r", format!("{r:e}"))],
        })
        .collect()
}

fn family_layers(inst: &Instance, r0: f64) -> (Layer, Layer) {
    let mut fam = Layer::new("family");
    for f in FAMILY_FRACTIONS {
        let r = f * r0;
        fam.circles.extend(member_circles(inst, r * r, "family", r));
    }
    let mut top = Layer::new("r0-member");
    top.circles = member_circles(inst, r0 * r0, "r0-member", r0);
    (fam, top)
}

fn sequence_layer(inst: &Instance, r0: f64, indices: &[i64], id: &'static str, class: &'static str) -> Result<Layer, SequenceError> {
    let mut l = Layer::new(id);
    for &i in indices {
        let e = element_at(inst, i, r0 * r0)?;
        for (k, (c, rs)) in e.centers.iter().zip(&e.radii_sq).enumerate() {
            if *rs > 0.0 {
                l.circles.push(Circle { center: xy(c), radius: rs.sqrt(), class, tags: vec![("index", i.to_string()), ("k", k.to_string())] });
            }
        }
    }
    Ok(l)
}

fn sphere_layer(inst: &Instance, r0: f64) -> Layer {
    let mut l = Layer::new("r0-sphere");
    l.circles.push(Circle { center: xy(&inst.c0), radius: r0, class: "r0-sphere", tags: Vec::new() });
    l
}

fn write(path: &Path, body: &str) -> Result<(), FigureError> {
    std::fs::write(path, body).map_err(|source| FigureError::Io { path: path.display().to_string(), source })
}

/// Renders a standalone picture of the ball set with `C0` and the given maximizers.
pub fn q_svg(inst: &Instance, r0: f64, maximizers: &[Point]) -> Result<String, FigureError> {
    check(inst, r0)?;
    let q = q_layer(inst);
    let pts = points_layer(inst, maximizers);
    Ok(render(&Frame::fit(&[&q, &sphere_layer(inst, r0)]), "Ball set and farthest points", r0, &[&q, &pts]))
}

/// Renders the sequence elements at radius `r` for the given indices over the ball set.
pub fn sequence_svg(inst: &Instance, r: f64, indices: &[i64]) -> Result<String, FigureError> {
    check(inst, r)?;
    let back: Vec<i64> = indices.iter().copied().filter(|&i| i < 0).collect();
    let fwd: Vec<i64> = indices.iter().copied().filter(|&i| i >= 0).collect();
    let layers = [
        q_layer(inst),
        sequence_layer(inst, r, &back, "backward", "backward")?,
        sequence_layer(inst, r, &fwd, "forward", "forward")?,
        points_layer(inst, &[]),
    ];
    let frame = Frame::fit(&[&layers[0], &layers[1], &sphere_layer(inst, r)]);
    Ok(render(&frame, "Sequence elements", r, &layers.iter().collect::<Vec<_>>()))
}

fn check(inst: &Instance, r0: f64) -> Result<(), FigureError> {
    if inst.dim() != 2 {
        return Err(FigureError::DimensionUnsupported(inst.dim()));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(FigureError::InvalidRadius(r0));
    }
    Ok(())
}

/// Writes the figure set into `out_dir` and returns the written paths.
///
/// Negative indices go to the backward layer, the others to the forward layer.
/// Farthest points from the planar oracle are marked when it succeeds.
pub fn emit_figures(inst: &Instance, r0: f64, indices: &[i64], out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    check(inst, r0)?;
    let maximizers = farthest_2d(inst).map(|o| o.maximizers).unwrap_or_default();
    let q = q_layer(inst);
    let pts = points_layer(inst, &maximizers);
    let (fam, top) = family_layers(inst, r0);
    let back_idx: Vec<i64> = indices.iter().copied().filter(|&i| i < 0).collect();
    let fwd_idx: Vec<i64> = indices.iter().copied().filter(|&i| i >= 0).collect();
    let mut back = sequence_layer(inst, r0, &back_idx, "backward", "backward")?;
    back.caption = Some("The obtained ball is Q_{R0}^{-inf}".into());
    let sphere = sphere_layer(inst, r0);
    let mut fwd = sequence_layer(inst, r0, &fwd_idx, "forward", "forward")?;
    fwd.caption = Some("The formed polytope is Q_{R0}^{inf}".into());
    // Forward circles grow without bound, so the frame ignores them.
    let frame = Frame::fit(&[&q, &fam, &top, &sphere, &back]);

    let figures: [(&str, &str, Vec<&Layer>); 5] = [
        ("fig_q.svg", "Ball set and farthest points", vec![&q, &pts]),
        ("fig_family.svg", "Level-set family with the member at R0", vec![&fam, &top, &q, &pts]),
        ("fig_backward.svg", "Backward sequence at R0", vec![&q, &back, &sphere, &pts]),
        ("fig_forward.svg", "Forward sequence at R0", vec![&q, &top, &fwd, &pts]),
        ("figures.svg", "All layers", vec![&fam, &top, &q, &back, &sphere, &fwd, &pts]),
    ];
    let mut out = Vec::with_capacity(figures.len());
    for (name, title, layers) in figures {
        let path = out_dir.join(name);
        write(&path, &render(&frame, title, r0, &layers))?;
        out.push(path);
    }
    Ok(out)
}
