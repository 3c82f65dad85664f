//! Poincare compactification of planar polynomial vector fields:
//! central projection to the unit sphere, disc projection, the six
//! coordinate charts, and per-chart polynomial pullbacks with the
//! common positive factor dropped.

use core::fmt;

use num_traits::Float;

use crate::algebra::{Poly2, Rational, Var};

/// Tolerance below which a sphere coordinate no longer defines a chart;
/// keeps divisions away from chart seams.
pub const CHART_DOMAIN_EPS: f64 = 1e-9;

/// Planar polynomial vector field (P1, P2) with its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    p1: Poly2,
    p2: Poly2,
    degree: u32,
}

impl VectorField {
    pub fn new(p1: Poly2, p2: Poly2) -> Self {
        let degree = p1.degree().max(p2.degree()).max(0) as u32;
        VectorField { p1, p2, degree }
    }

    pub fn p1(&self) -> &Poly2 {
        &self.p1
    }
    pub fn p2(&self) -> &Poly2 {
        &self.p2
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> (f64, f64) {
        (self.p1.eval_f64(x, y), self.p2.eval_f64(x, y))
    }

    pub fn eval_rational(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        (self.p1.eval_rational(x, y), self.p2.eval_rational(x, y))
    }

    /// Jacobian matrix entries [[d1p1, d2p1], [d1p2, d2p2]] as exact
    /// polynomials.
    pub fn jacobian(&self) -> [[Poly2; 2]; 2] {
        [
            [self.p1.diff(Var::X), self.p1.diff(Var::Y)],
            [self.p2.diff(Var::X), self.p2.diff(Var::Y)],
        ]
    }
}

/// The six coordinate neighborhoods of the sphere: Ui where yi > 0,
/// Vi where yi < 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    U1,
    U2,
    U3,
    V1,
    V2,
    V3,
}

impl Chart {
    /// Index of the defining coordinate (0-based) and its sign.
    fn axis_sign(self) -> (usize, f64) {
        match self {
            Chart::U1 => (0, 1.0),
            Chart::U2 => (1, 1.0),
            Chart::U3 => (2, 1.0),
            Chart::V1 => (0, -1.0),
            Chart::V2 => (1, -1.0),
            Chart::V3 => (2, -1.0),
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Chart::U1 => "U1",
            Chart::U2 => "U2",
            Chart::U3 => "U3",
            Chart::V1 => "V1",
            Chart::V2 => "V2",
            Chart::V3 => "V3",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartError {
    /// The point's sphere image does not satisfy the chart's sign
    /// condition (|y_i| too small or wrong sign).
    OutsideChartDomain { chart: Chart, coordinate: f64 },
    /// Disc projection requires the closed north hemisphere.
    SouthHemisphere { y3: f64 },
}

impl fmt::Display for ChartError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartError::OutsideChartDomain { chart, coordinate } => {
                write!(f, "point outside domain of chart {chart} (defining coordinate {coordinate})")
            }
            ChartError::SouthHemisphere { y3 } => {
                write!(f, "disc projection needs y3 >= 0, got {y3}")
            }
        }
    }
}

/// Point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl SpherePoint {
    pub fn norm(&self) -> f64 {
        Float::sqrt(self.y1 * self.y1 + self.y2 * self.y2 + self.y3 * self.y3)
    }

    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let (a, b, c) = (self.y1 - other.y1, self.y2 - other.y2, self.y3 - other.y3);
        Float::sqrt(a * a + b * b + c * c)
    }
}

/// Point of the Poincare disc (orthogonal projection of the north
/// hemisphere); the boundary circle is the infinity of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscPoint {
    pub u: f64,
    pub v: f64,
}

impl DiscPoint {
    pub fn norm(&self) -> f64 {
        Float::sqrt(self.u * self.u + self.v * self.v)
    }

    pub fn distance(&self, other: &DiscPoint) -> f64 {
        let (a, b) = (self.u - other.u, self.v - other.v);
        Float::sqrt(a * a + b * b)
    }
}

/// Chart-local coordinates; on U1/U2 the equator (infinity) is z2 = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub z1: f64,
    pub z2: f64,
}

/// Central projection of a finite plane point to the north hemisphere:
/// (x, y, 1) / sqrt(1 + x^2 + y^2).
pub fn central_projection(x: f64, y: f64) -> SpherePoint {
    let delta = Float::sqrt(1.0 + x * x + y * y);
    SpherePoint {
        y1: x / delta,
        y2: y / delta,
        y3: 1.0 / delta,
    }
}

/// Orthogonal projection of the (closed) north hemisphere to the disc.
pub fn disc_projection(s: &SpherePoint) -> Result<DiscPoint, ChartError> {
    if s.y3 < -1e-12 {
        return Err(ChartError::SouthHemisphere { y3: s.y3 });
    }
    Ok(DiscPoint { u: s.y1, v: s.y2 })
}

/// Chart coordinates of a sphere point: z = (y_j / y_i, y_k / y_i) with
/// j < k the non-defining indices.
pub fn chart_coords(s: &SpherePoint, chart: Chart) -> Result<ChartPoint, ChartError> {
    let (axis, sign) = chart.axis_sign();
    let coords = [s.y1, s.y2, s.y3];
    let denom = coords[axis];
    if denom * sign <= CHART_DOMAIN_EPS {
        return Err(ChartError::OutsideChartDomain {
            chart,
            coordinate: denom,
        });
    }
    let (j, k) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    Ok(ChartPoint {
        chart,
        z1: coords[j] / denom,
        z2: coords[k] / denom,
    })
}

/// Unique sphere point with the chart's sign mapping to the given
/// chart coordinates.
pub fn chart_to_sphere(c: &ChartPoint) -> SpherePoint {
    let norm = Float::sqrt(1.0 + c.z1 * c.z1 + c.z2 * c.z2);
    let (axis, sign) = c.chart.axis_sign();
    let (w_axis, w1, w2) = (sign / norm, sign * c.z1 / norm, sign * c.z2 / norm);
    match axis {
        0 => SpherePoint { y1: w_axis, y2: w1, y3: w2 },
        1 => SpherePoint { y1: w1, y2: w_axis, y3: w2 },
        _ => SpherePoint { y1: w1, y2: w2, y3: w_axis },
    }
}

/// Transition between charts through the sphere.
pub fn chart_transition(c: &ChartPoint, target: Chart) -> Result<ChartPoint, ChartError> {
    chart_coords(&chart_to_sphere(c), target)
}

/// z2^d * P(1/z2, z1/z2) for the U1 pullback: x^i y^j -> z1^j z2^(d-i-j).
fn pullback_u1(p: &Poly2, d: u32) -> Poly2 {
    Poly2::from_terms(p.terms().map(|(i, j, c)| (j, d - i - j, c.clone())))
}

/// z2^d * P(z1/z2, 1/z2) for the U2 pullback: x^i y^j -> z1^i z2^(d-i-j).
fn pullback_u2(p: &Poly2, d: u32) -> Poly2 {
    Poly2::from_terms(p.terms().map(|(i, j, c)| (i, d - i - j, c.clone())))
}

/// Polynomial expression of the compactified field in a chart, with the
/// common positive factor 1/Delta^(d-1) dropped (a time rescaling that
/// preserves orbits and equilibrium types). U3 returns the field
/// unchanged; V charts are the U expressions times (-1)^(d-1).
pub fn compactified_field(vf: &VectorField, chart: Chart) -> VectorField {
    let d = vf.degree();
    let (uz1, uz2) = match chart {
        Chart::U1 | Chart::V1 => {
            let a1 = pullback_u1(vf.p1(), d);
            let a2 = pullback_u1(vf.p2(), d);
            let z1 = Poly2::x();
            let z2 = Poly2::y();
            (z1.mul(&a1).neg().add(&a2), z2.mul(&a1).neg())
        }
        Chart::U2 | Chart::V2 => {
            let a1 = pullback_u2(vf.p1(), d);
            let a2 = pullback_u2(vf.p2(), d);
            let z1 = Poly2::x();
            let z2 = Poly2::y();
            (z1.mul(&a2).neg().add(&a1), z2.mul(&a2).neg())
        }
        Chart::U3 | Chart::V3 => (vf.p1().clone(), vf.p2().clone()),
    };
    let negate = matches!(chart, Chart::V1 | Chart::V2 | Chart::V3) && d % 2 == 0;
    if negate {
        VectorField::new(uz1.neg(), uz2.neg())
    } else {
        VectorField::new(uz1, uz2)
    }
}
