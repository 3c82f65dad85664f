//! Equilibria at infinity and invariant rays: root isolation on the
//! equator restriction, Jacobian linearization, stability classes, and
//! the closed-form coordinates cross-checked against root-finding.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::algebra::{rat_int, Poly1, Poly2, Rational};
use crate::compactify::{
    chart_to_sphere, compactified_field, disc_projection, Chart, ChartPoint, DiscPoint,
    SpherePoint, VectorField,
};
use crate::models::{Family, FlagModel};

/// Width target for exact bisection refinement of isolated roots.
fn root_tol() -> Rational {
    // 1e-20 as a rational
    Rational::new(1.into(), num_bigint::BigInt::from(10u64).pow(20))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    StableNode,
    UnstableNode,
    Saddle,
    StableFocus,
    UnstableFocus,
    LinearCenter,
    Degenerate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::StableNode => "stable_node",
            Classification::UnstableNode => "unstable_node",
            Classification::Saddle => "saddle",
            Classification::StableFocus => "stable_focus",
            Classification::UnstableFocus => "unstable_focus",
            Classification::LinearCenter => "linear_center",
            Classification::Degenerate => "degenerate",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Classification::StableNode | Classification::StableFocus)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// Complex number pair for eigenvalues (re, im).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub name: Option<String>,
    pub chart: Chart,
    pub z1: f64,
    pub sphere: SpherePoint,
    pub disc: DiscPoint,
    pub eigenvalues: [Eigenvalue; 2],
    pub classification: Classification,
}

/// Unit direction (a, b) in the closed first quadrant along which the
/// field is parallel to the position vector.
#[derive(Clone, Debug, PartialEq)]
pub struct RayDirection {
    pub a: f64,
    pub b: f64,
    /// Exact slope x/y when the direction is interior (b > 0).
    pub slope: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    /// The field does not vanish at the proposed point.
    NotAnEquilibrium { residual: f64 },
    /// Closed-form coordinates and root isolation disagree.
    Inconsistent { what: &'static str, delta: f64 },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::NotAnEquilibrium { residual } => {
                write!(f, "field norm {residual} at candidate equilibrium exceeds 1e-8")
            }
            AnalysisError::Inconsistent { what, delta } => {
                write!(f, "closed form vs root isolation mismatch for {what}: {delta}")
            }
        }
    }
}

/// Eigenvalues of a real 2x2 matrix.
pub fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> [Eigenvalue; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = Float::sqrt(disc);
        [
            Eigenvalue { re: 0.5 * (tr - s), im: 0.0 },
            Eigenvalue { re: 0.5 * (tr + s), im: 0.0 },
        ]
    } else {
        let s = Float::sqrt(-disc);
        [
            Eigenvalue { re: 0.5 * tr, im: -0.5 * s },
            Eigenvalue { re: 0.5 * tr, im: 0.5 * s },
        ]
    }
}

fn classify_eigenvalues(eig: &[Eigenvalue; 2]) -> Classification {
    let near_zero = |e: &Eigenvalue| Float::abs(e.re) < 1e-10 && Float::abs(e.im) < 1e-10;
    if near_zero(&eig[0]) || near_zero(&eig[1]) {
        return Classification::Degenerate;
    }
    if eig[0].im != 0.0 {
        return if Float::abs(eig[0].re) < 1e-10 {
            Classification::LinearCenter
        } else if eig[0].re < 0.0 {
            Classification::StableFocus
        } else {
            Classification::UnstableFocus
        };
    }
    match (eig[0].re < 0.0, eig[1].re < 0.0) {
        (true, true) => Classification::StableNode,
        (false, false) => Classification::UnstableNode,
        _ => Classification::Saddle,
    }
}

/// Linearize a chart field at a claimed equilibrium: exact Jacobian
/// polynomials evaluated at the point, then 2x2 eigenvalues.
pub fn classify_equilibrium(
    vf_chart: &VectorField,
    point: (f64, f64),
) -> Result<([Eigenvalue; 2], Classification), AnalysisError> {
    let (f1, f2) = vf_chart.eval_f64(point.0, point.1);
    let residual = Float::sqrt(f1 * f1 + f2 * f2);
    if residual > 1e-8 {
        return Err(AnalysisError::NotAnEquilibrium { residual });
    }
    let jac = vf_chart.jacobian();
    let j = |p: &Poly2| p.eval_f64(point.0, point.1);
    let eig = eigenvalues_2x2(j(&jac[0][0]), j(&jac[0][1]), j(&jac[1][0]), j(&jac[1][1]));
    Ok((eig, classify_eigenvalues(&eig)))
}

/// Equilibria on the first-quadrant equator arc of a degree-2 field:
/// real roots z1 >= 0 of the U1 z1'-component at z2 = 0, plus the U2
/// origin (the vertical direction at infinity) when it is a zero.
/// Points visible in both charts are deduplicated by sphere distance.
pub fn infinity_equilibria(vf: &VectorField) -> Vec<Equilibrium> {
    let u1 = compactified_field(vf, Chart::U1);
    let u2 = compactified_field(vf, Chart::U2);
    let restriction = u1.p1().restrict_y_zero();
    let mut points: Vec<(Chart, f64)> = Vec::new();
    for root in restriction.real_roots(&root_tol()) {
        if root.is_negative() {
            continue;
        }
        let mut z1 = root.to_f64().unwrap();
        z1 = polish_root(&restriction, z1);
        points.push((Chart::U1, z1));
    }
    // Vertical direction (0, 1, 0): origin of U2.
    let u2_restriction = u2.p1().restrict_y_zero();
    if u2_restriction.eval(&Rational::zero()).is_zero() {
        points.push((Chart::U2, 0.0));
    }

    let mut out: Vec<Equilibrium> = Vec::new();
    for (chart, z1) in points {
        let sphere = chart_to_sphere(&ChartPoint { chart, z1, z2: 0.0 });
        if out.iter().any(|e| e.sphere.distance(&sphere) < 1e-9) {
            continue;
        }
        let field = match chart {
            Chart::U1 => &u1,
            _ => &u2,
        };
        let (eigenvalues, classification) =
            classify_equilibrium(field, (z1, 0.0)).expect("root of the restriction");
        let disc = disc_projection(&sphere).expect("equator point");
        out.push(Equilibrium {
            name: None,
            chart,
            z1,
            sphere,
            disc,
            eigenvalues,
            classification,
        });
    }
    // Order by disc angle descending (from the vertical axis toward the
    // horizontal one), matching the p1, p2, p3 listing.
    out.sort_by(|a, b| {
        let ta = Float::atan2(a.disc.v, a.disc.u);
        let tb = Float::atan2(b.disc.v, b.disc.u);
        tb.partial_cmp(&ta).unwrap()
    });
    out
}

/// A couple of Newton steps in f64 to polish a bisected root.
fn polish_root(p: &Poly1, x0: f64) -> f64 {
    let dp = p.derivative();
    let mut x = x0;
    for _ in 0..3 {
        let d = dp.eval_f64(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval_f64(x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Invariant ray directions of a homogeneous quadratic field in the
/// closed first quadrant: root directions of the homogeneous cubic
/// W(a, b) = a P2(a, b) - b P1(a, b), unit-normalized, ordered by
/// increasing angle (so the x-axis ray, when invariant, comes first).
pub fn invariant_rays(vf: &VectorField) -> Vec<RayDirection> {
    let w = Poly2::x()
        .mul(vf.p2())
        .sub(&Poly2::y().mul(vf.p1()));
    let mut out: Vec<RayDirection> = Vec::new();
    if w.is_zero() {
        return out;
    }
    // Axis directions first: (1, 0) is invariant iff y | W fails... i.e.
    // iff W(1, 0) = 0; (0, 1) iff W(0, 1) = 0.
    if w.eval_rational(&rat_int(1), &rat_int(0)).is_zero() {
        out.push(RayDirection { a: 1.0, b: 0.0, slope: None });
    }
    // Interior and vertical directions: roots r = a/b of W(r, 1).
    let dehom = dehomogenize_in_x(&w);
    for slope in dehom.real_roots(&root_tol()) {
        if slope.is_negative() {
            continue;
        }
        let s = slope.to_f64().unwrap();
        let norm = Float::sqrt(s * s + 1.0);
        out.push(RayDirection {
            a: s / norm,
            b: 1.0 / norm,
            slope: Some(slope),
        });
    }
    if w.eval_rational(&rat_int(0), &rat_int(1)).is_zero()
        && !out.iter().any(|r| r.a == 0.0)
    {
        out.push(RayDirection { a: 0.0, b: 1.0, slope: None });
    }
    out.sort_by(|p, q| Float::atan2(p.b, p.a).partial_cmp(&Float::atan2(q.b, q.a)).unwrap());
    out
}

/// W(x, 1) as a univariate polynomial in x.
fn dehomogenize_in_x(w: &Poly2) -> Poly1 {
    let deg = w.terms().map(|(i, _, _)| i).max().unwrap_or(0);
    let mut coeffs = alloc::vec![Rational::zero(); deg as usize + 1];
    for (i, _, c) in w.terms() {
        coeffs[i as usize] += c.clone();
    }
    Poly1::new(coeffs)
}

/// The three named equilibria of a model, evaluated from their exact
/// closed forms and cross-checked against `infinity_equilibria`.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedEquilibria {
    pub p1: Equilibrium,
    pub p2: Equilibrium,
    pub p3: Equilibrium,
}

impl NamedEquilibria {
    pub fn all(&self) -> [&Equilibrium; 3] {
        [&self.p1, &self.p2, &self.p3]
    }

    pub fn by_name(&self, name: &str) -> Option<&Equilibrium> {
        match name {
            "p1" => Some(&self.p1),
            "p2" => Some(&self.p2),
            "p3" => Some(&self.p3),
            _ => None,
        }
    }
}

/// Exact closed-form sphere coordinates of p1, p2, p3 for a model, as
/// (unnormalized direction, squared norm) pairs in the equator plane.
pub fn closed_form_directions(model: &FlagModel) -> [(Rational, Rational); 3] {
    let (m, k) = (model.m() as i64, model.k() as i64);
    match model.family() {
        Family::TypeI => [
            (rat_int(2 * (m - 1)), rat_int(m + 2 * k)),
            (rat_int(2), rat_int(1)),
            (rat_int(1), rat_int(0)),
        ],
        Family::TypeII => [
            (rat_int(4 * (m + 1)), rat_int(4 * k + 2 * m + 1)),
            (rat_int(2), rat_int(1)),
            (rat_int(1), rat_int(0)),
        ],
    }
}

/// Locate, classify, and name p1, p2, p3. Errors if the closed forms and
/// the root-isolated equilibria disagree beyond 1e-10 on the sphere.
pub fn named_equilibria(model: &FlagModel) -> Result<NamedEquilibria, AnalysisError> {
    let vf = model.polynomial_field();
    let found = infinity_equilibria(&vf);
    let dirs = closed_form_directions(model);
    let names = ["p1", "p2", "p3"];
    let mut resolved: Vec<Equilibrium> = Vec::new();
    for (idx, (dx, dy)) in dirs.iter().enumerate() {
        let (fx, fy) = (dx.to_f64().unwrap(), dy.to_f64().unwrap());
        let norm = Float::sqrt(fx * fx + fy * fy);
        let target = SpherePoint { y1: fx / norm, y2: fy / norm, y3: 0.0 };
        let best = found
            .iter()
            .map(|e| (e, e.sphere.distance(&target)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        match best {
            Some((e, d)) if d <= 1e-10 => {
                let mut e = e.clone();
                e.name = Some(String::from(names[idx]));
                resolved.push(e);
            }
            Some((_, d)) => {
                return Err(AnalysisError::Inconsistent { what: names[idx], delta: d })
            }
            None => {
                return Err(AnalysisError::Inconsistent { what: names[idx], delta: f64::INFINITY })
            }
        }
    }
    let p3 = resolved.pop().unwrap();
    let p2 = resolved.pop().unwrap();
    let p1 = resolved.pop().unwrap();
    Ok(NamedEquilibria { p1, p2, p3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn model(family: Family, m: u32, k: u32) -> FlagModel {
        FlagModel::new(family, m, k, true).unwrap()
    }

    #[test]
    fn infinity_equilibria_type_one() {
        let vf = model(Family::TypeI, 2, 2).polynomial_field();
        let eqs = infinity_equilibria(&vf);
        assert_eq!(eqs.len(), 3);
        // Ordered by disc angle descending: z1 = 3 (p1), 1/2 (p2), 0 (p3).
        assert!((eqs[0].z1 - 3.0).abs() < 1e-12);
        assert!((eqs[1].z1 - 0.5).abs() < 1e-12);
        assert!(eqs[2].z1.abs() < 1e-12);
        assert_eq!(
            [eqs[0].classification, eqs[1].classification, eqs[2].classification],
            [Classification::StableNode, Classification::Saddle, Classification::StableNode]
        );
        for e in &eqs {
            assert!((e.sphere.norm() - 1.0).abs() < 1e-12);
            assert!(e.sphere.y3.abs() < 1e-12);
            assert!((e.disc.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infinity_equilibria_type_two_disc_points() {
        let vf = model(Family::TypeII, 1, 3).polynomial_field();
        let eqs = infinity_equilibria(&vf);
        assert_eq!(eqs.len(), 3);
        let expect = [
            (8.0 / 17.0, 15.0 / 17.0),
            (2.0 / 5.0f64.sqrt(), 1.0 / 5.0f64.sqrt()),
            (1.0, 0.0),
        ];
        for (e, (u, v)) in eqs.iter().zip(expect) {
            assert!((e.disc.u - u).abs() < 1e-12, "{} vs {u}", e.disc.u);
            assert!((e.disc.v - v).abs() < 1e-12);
        }
    }

    #[test]
    fn classification_eigenvalues_type_one() {
        let vf = model(Family::TypeI, 2, 2).polynomial_field();
        let u1 = compactified_field(&vf, Chart::U1);
        let cases = [
            (0.5, [5.0 / 14.0, -3.0 / 7.0], Classification::Saddle),
            (3.0, [-41.0 / 14.0, -15.0 / 7.0], Classification::StableNode),
            (0.0, [-3.0 / 7.0, -5.0 / 14.0], Classification::StableNode),
        ];
        for (z1, mut expect, class) in cases {
            let (eig, c) = classify_equilibrium(&u1, (z1, 0.0)).unwrap();
            assert_eq!(c, class);
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut got = [eig[0].re, eig[1].re];
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, e) in got.iter().zip(expect) {
                assert!((g - e).abs() < 1e-12, "{g} vs {e}");
                assert_eq!(eig[0].im, 0.0);
            }
        }
    }

    #[test]
    fn classify_rejects_non_equilibrium() {
        let vf = model(Family::TypeI, 2, 2).polynomial_field();
        assert!(matches!(
            classify_equilibrium(&vf, (1.0, 1.0)),
            Err(AnalysisError::NotAnEquilibrium { .. })
        ));
    }

    #[test]
    fn invariant_rays_type_one() {
        let vf = model(Family::TypeI, 2, 2).polynomial_field();
        let rays = invariant_rays(&vf);
        assert_eq!(rays.len(), 3);
        // Increasing angle: x-axis, slope x/y = 2, slope x/y = 1/3.
        assert_eq!((rays[0].a, rays[0].b), (1.0, 0.0));
        assert_eq!(rays[1].slope.as_ref().unwrap(), &rat_int(2));
        assert_eq!(rays[2].slope.as_ref().unwrap(), &rat(1, 3));
        for r in &rays {
            let (p1v, p2v) = vf.eval_f64(r.a, r.b);
            assert!(Float::abs(r.a * p2v - r.b * p1v) < 1e-12);
        }
    }

    #[test]
    fn invariant_rays_type_two() {
        let vf = model(Family::TypeII, 1, 3).polynomial_field();
        let rays = invariant_rays(&vf);
        assert_eq!(rays.len(), 3);
        assert_eq!(rays[1].slope.as_ref().unwrap(), &rat_int(2));
        assert_eq!(rays[2].slope.as_ref().unwrap(), &rat(8, 15));
    }

    #[test]
    fn invariant_rays_symmetric_field() {
        // (x^2, y^2): rays (1,0), diagonal, (0,1).
        let vf = VectorField::new(
            Poly2::monomial(2, 0, rat_int(1)),
            Poly2::monomial(0, 2, rat_int(1)),
        );
        let rays = invariant_rays(&vf);
        assert_eq!(rays.len(), 3);
        assert_eq!((rays[0].a, rays[0].b), (1.0, 0.0));
        assert!((rays[1].a - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((rays[1].b - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!((rays[2].a, rays[2].b), (0.0, 1.0));
    }

    #[test]
    fn named_equilibria_cross_check() {
        let named = named_equilibria(&model(Family::TypeI, 2, 2)).unwrap();
        assert!((named.p1.disc.u - 2.0 / 40.0f64.sqrt()).abs() < 1e-12);
        assert!((named.p1.disc.v - 6.0 / 40.0f64.sqrt()).abs() < 1e-12);
        assert_eq!((named.p3.disc.u, named.p3.disc.v), (1.0, 0.0));
        assert_eq!(named.p2.classification, Classification::Saddle);

        let named2 = named_equilibria(&model(Family::TypeII, 1, 3)).unwrap();
        assert!((named2.p1.disc.u - 8.0 / 17.0).abs() < 1e-12);
        assert!((named2.p1.disc.v - 15.0 / 17.0).abs() < 1e-12);
        assert_eq!(named2.p1.classification, Classification::StableNode);
    }

    #[test]
    fn equilibrium_pattern_across_parameters() {
        // Exactly 3 equator equilibria, pattern (stable, saddle, stable)
        // ordered by angle, for all strict parameters with m + k <= 12.
        for m in 1..=11u32 {
            for k in 0..=11u32 {
                if m + k > 12 {
                    continue;
                }
                for family in [Family::TypeI, Family::TypeII] {
                    let Ok(md) = FlagModel::new(family, m, k, true) else {
                        continue;
                    };
                    let eqs = infinity_equilibria(&md.polynomial_field());
                    assert_eq!(eqs.len(), 3, "{family:?} m={m} k={k}");
                    assert_eq!(
                        [
                            eqs[0].classification,
                            eqs[1].classification,
                            eqs[2].classification
                        ],
                        [
                            Classification::StableNode,
                            Classification::Saddle,
                            Classification::StableNode
                        ],
                        "{family:?} m={m} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn ray_endpoints_match_equilibria() {
        // The disc limit of each interior invariant ray equals the
        // matching equilibrium's disc point: evaluate the projected ray
        // parametrization at t = 1e6.
        for md in [model(Family::TypeI, 3, 2), model(Family::TypeII, 2, 4)] {
            let vf = md.polynomial_field();
            let rays = invariant_rays(&vf);
            let named = named_equilibria(&md).unwrap();
            let t = 1e6;
            for (ray, eq) in [(&rays[2], &named.p1), (&rays[1], &named.p2)] {
                let (x, y) = (ray.a * t, ray.b * t);
                let s = crate::compactify::central_projection(x, y);
                let d = disc_projection(&s).unwrap();
                assert!(d.distance(&eq.disc) < 1e-10);
            }
        }
    }

    #[test]
    fn saddle_eigenvectors_align_with_separatrix() {
        // At p2 the unstable direction is tangent to the equator and the
        // stable one points into the disc (the gamma2 separatrix).
        let vf = model(Family::TypeI, 2, 2).polynomial_field();
        let u1 = compactified_field(&vf, Chart::U1);
        let jac = u1.jacobian();
        let at = |p: &Poly2| p.eval_f64(0.5, 0.0);
        let (a, b, c, d) = (at(&jac[0][0]), at(&jac[0][1]), at(&jac[1][0]), at(&jac[1][1]));
        // Lower-left is zero at z2 = 0 (equator invariant), matrix is
        // triangular: eigenvector of a (unstable) is (1, 0), of d
        // (stable) has nonzero z2 component.
        assert!(c.abs() < 1e-14);
        assert!(a > 0.0 && d < 0.0);
        let _ = b;
    }
}
