//! File emitters: SVG phase portraits on the Poincaré disc, JSON
//! equilibrium and ray atlases, CSV trajectories and basin grids.
//!
//! Everything here is deterministic: fixed numeric formatting, no
//! timestamps, no hash-order leakage. Identical inputs produce
//! byte-identical output.

use std::fmt::Write as _;

use flagflow_core::analysis::{invariant_rays, named_equilibria, Classification, Equilibrium};
use flagflow_core::flow::{
    integrate_compactified, BasinGrid, FlowError, IntegrationConfig, Trajectory, Verdict,
};
use flagflow_core::models::FlagModel;
use flagflow_core::Rational;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortraitOptions {
    pub width_px: u32,
    pub n_stream_seeds: u32,
    pub draw_rays: bool,
    pub draw_equator: bool,
    pub labels: bool,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            width_px: 800,
            n_stream_seeds: 24,
            draw_rays: true,
            draw_equator: true,
            labels: true,
        }
    }
}

/// 17 significant digits: round-trips f64 exactly.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0" leaking sign noise into outputs.
        return String::from("0.0000000000000000e0");
    }
    format!("{x:.16e}")
}

fn rational_str(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Replace ASCII exponents with superscripts for terminal output.
pub fn pretty_poly(p: &flagflow_core::Poly2) -> String {
    p.to_string()
        .replace("^2", "\u{00b2}")
        .replace("^3", "\u{00b3}")
        .replace("^4", "\u{2074}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn poly_terms_json(p: &flagflow_core::Poly2) -> String {
    let terms: Vec<String> = p
        .terms()
        .map(|(i, j, c)| {
            format!(
                "{{\"i\":{i},\"j\":{j},\"coeff\":\"{}\"}}",
                json_escape(&rational_str(c))
            )
        })
        .collect();
    format!("[{}]", terms.join(","))
}

/// JSON description of a model: parameters, the polynomial system's
/// exact coefficients, ray slopes, and fibration metadata.
pub fn export_model(model: &FlagModel) -> String {
    let vf = model.polynomial_field();
    let (s1, s2) = model.invariant_ray_slopes();
    let fib = model.fibration_info();
    let warnings: Vec<String> = model
        .warnings()
        .iter()
        .map(|w| format!("\"{}\"", json_escape(w)))
        .collect();
    format!(
        concat!(
            "{{\"family\":\"{family}\",\"m\":{m},\"k\":{k},\"n\":{n},",
            "\"strict\":{strict},\"warnings\":[{warnings}],",
            "\"p1\":{p1},\"p2\":{p2},",
            "\"ray_slopes\":[\"{s1}\",\"{s2}\"],",
            "\"fibration\":{{\"dim_m1\":{d1},\"dim_m2\":{d2},",
            "\"fiber\":\"{fiber}\",\"base\":\"{base}\",\"total\":\"{total}\"}}}}\n"
        ),
        family = model.family(),
        m = model.m(),
        k = model.k(),
        n = model.n(),
        strict = model.is_strict(),
        warnings = warnings.join(","),
        p1 = poly_terms_json(vf.p1()),
        p2 = poly_terms_json(vf.p2()),
        s1 = json_escape(&rational_str(&s1)),
        s2 = json_escape(&rational_str(&s2)),
        d1 = fib.dim_m1,
        d2 = fib.dim_m2,
        fiber = json_escape(&fib.fiber_label),
        base = json_escape(&fib.base_label),
        total = json_escape(&fib.total_label),
    )
}

/// Plain-text description of a model for the terminal.
pub fn describe_model(model: &FlagModel) -> String {
    let vf = model.polynomial_field();
    let (s1, s2) = model.invariant_ray_slopes();
    let fib = model.fibration_info();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "family {}  m={}  k={}  n={}",
        model.family(),
        model.m(),
        model.k(),
        model.n()
    );
    let _ = writeln!(out, "space: {}", fib.total_label);
    let _ = writeln!(
        out,
        "fibration: {} -> {} -> {}",
        fib.fiber_label, fib.total_label, fib.base_label
    );
    let _ = writeln!(
        out,
        "isotropy summand dimensions: dim m1 = {}, dim m2 = {}",
        fib.dim_m1, fib.dim_m2
    );
    for w in model.warnings() {
        let _ = writeln!(out, "warning: {w}");
    }
    let _ = writeln!(out, "raw system (original time):");
    let _ = writeln!(out, "  \u{1e8b} = [{}] / y\u{00b2}", pretty_poly(vf.p1()));
    let _ = writeln!(out, "  \u{1e8f} = [{}] / y\u{00b2}", pretty_poly(vf.p2()));
    let _ = writeln!(out, "polynomial system (rescaled time):");
    let _ = writeln!(out, "  \u{1e8b} = {}", pretty_poly(vf.p1()));
    let _ = writeln!(out, "  \u{1e8f} = {}", pretty_poly(vf.p2()));
    let _ = writeln!(
        out,
        "invariant ray slopes x/y: gamma1 = {}, gamma2 = {}",
        rational_str(&s1),
        rational_str(&s2)
    );
    out
}

fn equilibrium_json(eq: &Equilibrium) -> String {
    format!(
        concat!(
            "{{\"name\":\"{name}\",\"chart\":\"{chart}\",\"z1\":{z1},",
            "\"sphere\":[{y1},{y2},{y3}],\"disc\":[{u},{v}],",
            "\"eigenvalues\":[{{\"re\":{e0r},\"im\":{e0i}}},{{\"re\":{e1r},\"im\":{e1i}}}],",
            "\"class\":\"{class}\"}}"
        ),
        name = json_escape(eq.name.as_deref().unwrap_or("")),
        chart = eq.chart,
        z1 = sig17(eq.z1),
        y1 = sig17(eq.sphere.y1),
        y2 = sig17(eq.sphere.y2),
        y3 = sig17(eq.sphere.y3),
        u = sig17(eq.disc.u),
        v = sig17(eq.disc.v),
        e0r = sig17(eq.eigenvalues[0].re),
        e0i = sig17(eq.eigenvalues[0].im),
        e1r = sig17(eq.eigenvalues[1].re),
        e1i = sig17(eq.eigenvalues[1].im),
        class = eq.classification,
    )
}

/// JSON atlas of the infinity equilibria, ordered by disc angle
/// descending (p1, p2, p3).
pub fn export_equilibria(model: &FlagModel) -> Result<String, FlowError> {
    let named = named_equilibria(model)?;
    let records: Vec<String> = named.all().iter().map(|e| equilibrium_json(e)).collect();
    Ok(format!("[{}]\n", records.join(",")))
}

pub fn describe_equilibria(model: &FlagModel) -> Result<String, FlowError> {
    let named = named_equilibria(model)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<4} {:<5} {:>12} {:>24} {:>26} {:<12}",
        "name", "chart", "z1", "disc (u, v)", "eigenvalues", "class"
    );
    for eq in named.all() {
        let _ = writeln!(
            out,
            "{:<4} {:<5} {:>12.8} ({:>10.7}, {:>10.7}) ({:>11.8}, {:>11.8}) {:<12}",
            eq.name.as_deref().unwrap_or(""),
            eq.chart.to_string(),
            eq.z1,
            eq.disc.u,
            eq.disc.v,
            eq.eigenvalues[0].re,
            eq.eigenvalues[1].re,
            eq.classification.to_string()
        );
    }
    Ok(out)
}

struct NamedRay {
    label: &'static str,
    a: f64,
    b: f64,
    slope: Option<Rational>,
    target: &'static str,
}

fn labeled_rays(model: &FlagModel) -> Vec<NamedRay> {
    let (s1, s2) = model.invariant_ray_slopes();
    invariant_rays(&model.polynomial_field())
        .into_iter()
        .map(|r| {
            let (label, target) = match &r.slope {
                None => ("gamma3", "p3"),
                Some(s) if *s == s2 => ("gamma2", "p2"),
                Some(s) if *s == s1 => ("gamma1", "p1"),
                Some(_) => ("extra", "?"),
            };
            NamedRay { label, a: r.a, b: r.b, slope: r.slope, target }
        })
        .collect()
}

/// JSON atlas of the invariant rays, ordered by increasing angle from
/// the x-axis.
pub fn export_rays(model: &FlagModel) -> String {
    let records: Vec<String> = labeled_rays(model)
        .iter()
        .map(|r| {
            let slope = match &r.slope {
                Some(s) => format!("\"{}\"", json_escape(&rational_str(s))),
                None => String::from("null"),
            };
            format!(
                concat!(
                    "{{\"name\":\"{}\",\"slope\":{},\"direction\":[{},{}],",
                    "\"endpoint\":[{},{}],\"omega_limit\":\"{}\"}}"
                ),
                r.label,
                slope,
                sig17(r.a),
                sig17(r.b),
                sig17(r.a),
                sig17(r.b),
                r.target
            )
        })
        .collect();
    format!("[{}]\n", records.join(","))
}

pub fn describe_rays(model: &FlagModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<7} {:>10} {:>24} {:<6}",
        "name", "slope x/y", "disc endpoint", "omega"
    );
    for r in labeled_rays(model) {
        let slope = match &r.slope {
            Some(s) => rational_str(s),
            None => String::from("x-axis"),
        };
        let _ = writeln!(
            out,
            "{:<7} {:>10} ({:>10.7}, {:>10.7}) {:<6}",
            r.label, slope, r.a, r.b, r.target
        );
    }
    out
}

/// CSV export of a trajectory. Compactified trajectories carry chart
/// coordinates; raw trajectories append the plane coordinates.
pub fn export_trajectory(traj: &Trajectory, raw: bool) -> String {
    let mut out = String::new();
    if raw {
        out.push_str("t,u,v,chart,z1,z2,x,y\n");
    } else {
        out.push_str("t,u,v,chart,z1,z2\n");
    }
    for s in &traj.samples {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            sig17(s.t),
            sig17(s.disc.u),
            sig17(s.disc.v),
            s.chart,
            sig17(s.z.0),
            sig17(s.z.1)
        );
        if raw {
            let (x, y) = s.xy.unwrap_or((f64::NAN, f64::NAN));
            let _ = write!(out, ",{},{}", sig17(x), sig17(y));
        }
        out.push('\n');
    }
    out
}

fn verdict_str(v: &Verdict) -> String {
    match v {
        Verdict::Converged(name) => name.clone(),
        Verdict::MaxTime => String::from("max_time"),
        Verdict::StepLimit => String::from("step_limit"),
    }
}

/// CSV export of a basin sweep, row-major over the seed grid.
pub fn export_basin(grid: &BasinGrid) -> String {
    let mut out = String::new();
    out.push_str("x,y,region,predicted,outcome,final_u,final_v,final_distance,consistent\n");
    for cell in &grid.cells {
        match cell {
            Ok(c) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    sig17(c.x),
                    sig17(c.y),
                    c.geometric,
                    c.geometric.predicted_target(),
                    verdict_str(&c.dynamic.verdict),
                    sig17(c.dynamic.final_disc.u),
                    sig17(c.dynamic.final_disc.v),
                    sig17(c.dynamic.final_distance),
                    c.consistent
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,error: {e},,,,false");
            }
        }
    }
    out
}

fn class_color(c: Classification) -> &'static str {
    match c {
        Classification::StableNode | Classification::StableFocus => "#1a9850",
        Classification::Saddle => "#d73027",
        Classification::UnstableNode | Classification::UnstableFocus => "#7b3294",
        _ => "#888888",
    }
}

fn fmt9(x: f64) -> String {
    // Fixed 9 decimals; normalize negative zero for stable bytes.
    let s = format!("{x:.9}");
    if s == "-0.000000000" {
        String::from("0.000000000")
    } else {
        s
    }
}

/// Deterministic streamline seeds: first-quadrant plane points on two
/// arcs, interleaved by angle.
fn stream_seeds(n: u32) -> Vec<(f64, f64)> {
    let radii = [0.7f64, 2.8];
    let mut out = Vec::with_capacity(n as usize);
    for i in 0..n {
        let ring = (i % 2) as usize;
        let idx = i / 2;
        let per_ring = n.div_ceil(2);
        let theta =
            (idx as f64 + 0.5) / per_ring as f64 * core::f64::consts::FRAC_PI_2;
        out.push((radii[ring] * theta.cos(), radii[ring] * theta.sin()));
    }
    out
}

/// SVG phase portrait of the compactified field restricted to the
/// closed first quadrant of the Poincaré disc.
pub fn render_portrait(
    model: &FlagModel,
    opts: &PortraitOptions,
    cfg: &IntegrationConfig,
) -> Result<String, FlowError> {
    let named = named_equilibria(model)?;
    let w = opts.width_px as f64;
    // Disc coordinates live in [0, 1]^2; leave a margin for labels.
    let margin = 0.08 * w;
    let scale = w - 2.0 * margin;
    let px = |u: f64| margin + u * scale;
    let py = |v: f64| w - margin - v * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        opts.width_px
    );
    let _ = writeln!(
        svg,
        "<!-- phase portrait, family {} m={} k={} -->",
        model.family(),
        model.m(),
        model.k()
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"white\"/>",
        opts.width_px
    );

    // Axes of the quadrant.
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        fmt9(px(0.0)),
        fmt9(py(0.0)),
        fmt9(px(1.0)),
        fmt9(py(0.0))
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        fmt9(px(0.0)),
        fmt9(py(0.0)),
        fmt9(px(0.0)),
        fmt9(py(1.0))
    );

    if opts.draw_equator {
        // Quarter of the unit circle, the image of infinity.
        let _ = writeln!(
            svg,
            "<path d=\"M {} {} A {} {} 0 0 0 {} {}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>",
            fmt9(px(1.0)),
            fmt9(py(0.0)),
            fmt9(scale),
            fmt9(scale),
            fmt9(px(0.0)),
            fmt9(py(1.0))
        );
    }

    if opts.draw_rays {
        // Ray images are straight radial segments from the origin to
        // the equator endpoint in the ray's direction.
        for r in labeled_rays(model) {
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#2166ac\" stroke-width=\"1.2\" stroke-dasharray=\"6 3\"><title>{}</title></line>",
                fmt9(px(0.0)),
                fmt9(py(0.0)),
                fmt9(px(r.a)),
                fmt9(py(r.b)),
                r.label
            );
        }
    }

    // Streamlines: forward orbits from deterministic seeds.
    for (i, (x0, y0)) in stream_seeds(opts.n_stream_seeds).into_iter().enumerate() {
        match integrate_compactified(model, x0, y0, cfg) {
            Ok(traj) => {
                let pts = &traj.samples;
                let stride = (pts.len() / 300).max(1);
                let mut path = String::new();
                for (j, s) in pts.iter().enumerate() {
                    if j % stride != 0 && j + 1 != pts.len() {
                        continue;
                    }
                    let _ = write!(
                        path,
                        "{}{},{}",
                        if path.is_empty() { "" } else { " " },
                        fmt9(px(s.disc.u)),
                        fmt9(py(s.disc.v))
                    );
                }
                let _ = writeln!(
                    svg,
                    "<polyline points=\"{path}\" fill=\"none\" stroke=\"#666666\" stroke-width=\"0.8\"/>"
                );
            }
            Err(e) => {
                let _ = writeln!(svg, "<!-- streamline {i} omitted: {e} -->");
            }
        }
    }

    // Equilibrium markers, colored by classification.
    for eq in named.all() {
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"6\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"1\"><title>{} ({:.4}, {:.4}) {}</title></circle>",
            fmt9(px(eq.disc.u)),
            fmt9(py(eq.disc.v)),
            class_color(eq.classification),
            eq.name.as_deref().unwrap_or(""),
            eq.disc.u,
            eq.disc.v,
            eq.classification
        );
        if opts.labels {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\">{}</text>",
                fmt9(px(eq.disc.u) + 10.0),
                fmt9(py(eq.disc.v) - 10.0),
                eq.name.as_deref().unwrap_or("")
            );
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
