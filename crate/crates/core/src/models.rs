//! The two flag-manifold families with two isotropy summands:
//! parameter validation, Ricci tensor components, the raw rational flow
//! systems, their degree-2 polynomializations, the Einstein defect, and
//! fibration metadata.
//!
//! The invariant metric is a pair (lambda1, lambda2) of positive scalars
//! against the negative Cartan-Killing form; lambda1 scales the
//! horizontal summand (tangent to the base of the natural fibration),
//! lambda2 the vertical one.
//!
//! Sign conventions: with `r = (r1, r2)` the Ricci components, the flow
//! systems integrated here are `(x', y') = (-r1, -r2)`, i.e. the Ricci
//! flow `-2 r` with time rescaled by a positive constant. Orbits and
//! every qualitative statement are unchanged by that rescaling.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::ToPrimitive;

use crate::algebra::{rat_int, Poly2, Rational};
use crate::compactify::VectorField;

/// Family selector for the two manifold classes:
/// type I is SO(2n+1)/(U(m) x SO(2k+1)), type II is Sp(n)/(U(m) x Sp(k)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    TypeI,
    TypeII,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::TypeI => write!(f, "I"),
            Family::TypeII => write!(f, "II"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParameterError {
    /// m out of range for the family (strict mode).
    MOutOfRange { family: Family, m: u32 },
    /// k out of range for the family (strict mode).
    KOutOfRange { family: Family, k: u32 },
    /// m must be at least 1 regardless of mode.
    MZero,
}

impl fmt::Display for ParameterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParameterError::MOutOfRange { family: Family::TypeI, .. } => {
                write!(f, "parameter m>1 required (strict mode)")
            }
            ParameterError::MOutOfRange { family: Family::TypeII, m } => {
                write!(f, "parameter m>=1 required (strict mode), got m={m}")
            }
            ParameterError::KOutOfRange { family: Family::TypeI, .. } => {
                write!(f, "parameter k != 1 required for family I (strict mode)")
            }
            ParameterError::KOutOfRange { family: Family::TypeII, k } => {
                write!(f, "parameter k >= 3 required for family II (strict mode), got k={k}")
            }
            ParameterError::MZero => write!(f, "parameter m must be positive"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainError {
    /// Raw systems are defined on the open first quadrant only.
    NonPositiveCoordinate { x: f64, y: f64 },
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::NonPositiveCoordinate { x, y } => {
                write!(f, "raw flow needs x > 0 and y > 0, got ({x}, {y})")
            }
        }
    }
}

/// A validated model instance: family plus the integers (m, k), with
/// n = m + k derived.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlagModel {
    family: Family,
    m: u32,
    k: u32,
    n: u32,
    strict: bool,
    warnings: Vec<String>,
}

impl FlagModel {
    /// Validate parameters and build a model. Strict mode enforces the
    /// per-family ranges (type I: m > 1 and k != 1; type II: m >= 1 and
    /// k >= 3); non-strict mode accepts out-of-range values but records
    /// a warning.
    pub fn new(family: Family, m: u32, k: u32, strict: bool) -> Result<FlagModel, ParameterError> {
        if m == 0 {
            return Err(ParameterError::MZero);
        }
        let mut warnings = Vec::new();
        match family {
            Family::TypeI => {
                if m <= 1 {
                    if strict {
                        return Err(ParameterError::MOutOfRange { family, m });
                    }
                    warnings.push(format!("family I expects m > 1, got m={m}"));
                }
                if k == 1 {
                    if strict {
                        return Err(ParameterError::KOutOfRange { family, k });
                    }
                    warnings.push(String::from("family I excludes k = 1"));
                }
            }
            Family::TypeII => {
                if k < 3 {
                    if strict {
                        return Err(ParameterError::KOutOfRange { family, k });
                    }
                    warnings.push(format!("family II expects k >= 3, got k={k}"));
                }
            }
        }
        Ok(FlagModel {
            family,
            m,
            k,
            n: m + k,
            strict,
            warnings,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn is_strict(&self) -> bool {
        self.strict
    }
    /// Non-strict parameter warnings recorded at construction.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn mi(&self) -> i64 {
        self.m as i64
    }
    fn ki(&self) -> i64 {
        self.k as i64
    }
    fn ni(&self) -> i64 {
        self.n as i64
    }

    /// Ricci tensor components (r1, r2) at an exact rational metric.
    ///
    /// The components depend only on the ratio lambda1/lambda2.
    pub fn ricci_components_exact(&self, l1: &Rational, l2: &Rational) -> (Rational, Rational) {
        let (m, k, n) = (self.mi(), self.ki(), self.ni());
        let ratio = l1 / l2;
        match self.family {
            Family::TypeI => {
                let r1 = -Rational::new((2 * (m - 1)).into(), (2 * n - 1).into())
                    - Rational::new((1 + 2 * k).into(), (2 * (2 * n - 1)).into())
                        * &ratio
                        * &ratio;
                let diff = l1 - l2;
                let r2 = -Rational::new((n + k).into(), (2 * n - 1).into())
                    - Rational::new((m - 1).into(), (2 * (2 * n - 1)).into())
                        * (l2 * l2 - &diff * &diff)
                        / (l1 * l2);
                (r1, r2)
            }
            Family::TypeII => {
                let r1 = -Rational::new((2 + 2 * m).into(), (2 * n + 2).into())
                    - Rational::new((2 * k).into(), (4 * n + 4).into()) * &ratio * &ratio;
                let r2 = -Rational::new((4 * m + 4 * k + 3).into(), (4 * n + 4).into())
                    + Rational::new((4 * m + 2).into(), (16 * n + 16).into()) * &ratio;
                (r1, r2)
            }
        }
    }

    /// Ricci components at a floating metric. The inputs are converted
    /// to exact rationals (every finite f64 is rational), so this is the
    /// exact computation rounded once on output.
    pub fn ricci_components(&self, metric: &Metric) -> RicciComponents {
        let l1 = Rational::from_float(metric.lambda1).expect("finite lambda1");
        let l2 = Rational::from_float(metric.lambda2).expect("finite lambda2");
        let (r1, r2) = self.ricci_components_exact(&l1, &l2);
        RicciComponents {
            r1: r1.to_f64().unwrap(),
            r2: r2.to_f64().unwrap(),
        }
    }

    /// Right-hand side of the raw (rational) flow system at an exact
    /// point of the open first quadrant. Equal to -(r1, r2).
    pub fn raw_rhs_exact(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        let (m, k, n) = (self.mi(), self.ki(), self.ni());
        match self.family {
            Family::TypeI => {
                let dx = Rational::new((2 * (m - 1)).into(), (2 * n - 1).into())
                    + Rational::new((1 + 2 * k).into(), (2 * (2 * n - 1)).into()) * (x * x)
                        / (y * y);
                let diff = x - y;
                let dy = Rational::new((n + k).into(), (2 * n - 1).into())
                    + Rational::new((m - 1).into(), (2 * (2 * n - 1)).into())
                        * (y * y - &diff * &diff)
                        / (x * y);
                (dx, dy)
            }
            Family::TypeII => {
                let dx = Rational::new((2 + 2 * m).into(), (2 * n + 2).into())
                    + Rational::new((2 * k).into(), (4 * n + 4).into()) * (x * x) / (y * y);
                let dy = Rational::new((4 * m + 4 * k + 3).into(), (4 * n + 4).into())
                    - Rational::new((4 * m + 2).into(), (16 * n + 16).into()) * x / y;
                (dx, dy)
            }
        }
    }

    /// Floating raw right-hand side; errors outside the open first
    /// quadrant (the type I system divides by x*y, both divide by y).
    pub fn raw_rhs(&self, x: f64, y: f64) -> Result<(f64, f64), DomainError> {
        if !(x > 0.0 && y > 0.0) {
            return Err(DomainError::NonPositiveCoordinate { x, y });
        }
        let (m, k, n) = (self.mi() as f64, self.ki() as f64, self.ni() as f64);
        Ok(match self.family {
            Family::TypeI => {
                let dx = 2.0 * (m - 1.0) / (2.0 * n - 1.0)
                    + (1.0 + 2.0 * k) / (2.0 * (2.0 * n - 1.0)) * (x * x) / (y * y);
                let d = x - y;
                let dy = (n + k) / (2.0 * n - 1.0)
                    + (m - 1.0) / (2.0 * (2.0 * n - 1.0)) * (y * y - d * d) / (x * y);
                (dx, dy)
            }
            Family::TypeII => {
                let dx = (2.0 + 2.0 * m) / (2.0 * n + 2.0)
                    + (2.0 * k) / (4.0 * n + 4.0) * (x * x) / (y * y);
                let dy = (4.0 * m + 4.0 * k + 3.0) / (4.0 * n + 4.0)
                    - (4.0 * m + 2.0) / (16.0 * n + 16.0) * x / y;
                (dx, dy)
            }
        })
    }

    /// The degree-2 polynomial field equivalent to the raw system on the
    /// open first quadrant: the raw right-hand side multiplied by y^2.
    /// The x-axis ray (t, 0) becomes invariant for this field.
    pub fn polynomial_field(&self) -> VectorField {
        let (m, k, n) = (self.mi(), self.ki(), self.ni());
        let (p1, p2) = match self.family {
            Family::TypeI => {
                let p1 = Poly2::from_terms([
                    (2, 0, Rational::new((2 + 4 * k).into(), (8 * n - 4).into())),
                    (0, 2, Rational::new((2 * m - 2).into(), (2 * n - 1).into())),
                ]);
                let p2 = Poly2::from_terms([
                    (1, 1, Rational::new((2 - 2 * m).into(), (8 * n - 4).into())),
                    (0, 2, Rational::new((n + k + m - 1).into(), (2 * n - 1).into())),
                ]);
                (p1, p2)
            }
            Family::TypeII => {
                let p1 = Poly2::from_terms([
                    (2, 0, Rational::new((2 * k).into(), (4 * n + 4).into())),
                    (0, 2, Rational::new((2 + 2 * m).into(), (2 * n + 2).into())),
                ]);
                let p2 = Poly2::from_terms([
                    (1, 1, -Rational::new((4 * m + 2).into(), (16 * n + 16).into())),
                    (0, 2, Rational::new((4 * m + 4 * k + 3).into(), (4 * n + 4).into())),
                ]);
                (p1, p2)
            }
        };
        VectorField::new(p1, p2)
    }

    /// Einstein defect r1*lambda2 - r2*lambda1: zero exactly on the rays
    /// where the Ricci tensor is proportional to the metric, and
    /// homogeneous of degree 1 under metric scaling.
    pub fn einstein_defect_exact(&self, l1: &Rational, l2: &Rational) -> Rational {
        let (r1, r2) = self.ricci_components_exact(l1, l2);
        r1 * l2 - r2 * l1
    }

    pub fn einstein_defect(&self, metric: &Metric) -> f64 {
        let l1 = Rational::from_float(metric.lambda1).expect("finite lambda1");
        let l2 = Rational::from_float(metric.lambda2).expect("finite lambda2");
        self.einstein_defect_exact(&l1, &l2).to_f64().unwrap()
    }

    /// Zeros of the Einstein defect on the open quarter circle, found by
    /// sign changes on an angular grid refined by bisection. Directions
    /// are returned as unit vectors (lambda1, lambda2), increasing angle.
    pub fn einstein_directions(&self, grid: usize) -> Vec<(f64, f64)> {
        use num_traits::Float;
        let defect = |theta: f64| {
            let m = Metric::new(Float::cos(theta), Float::sin(theta)).unwrap();
            self.einstein_defect(&m)
        };
        let eps = 1e-9;
        let lo = eps;
        let hi = core::f64::consts::FRAC_PI_2 - eps;
        let mut out = Vec::new();
        let mut prev_t = lo;
        let mut prev_v = defect(prev_t);
        for i in 1..=grid {
            let t = lo + (hi - lo) * i as f64 / grid as f64;
            let v = defect(t);
            if prev_v == 0.0 {
                out.push(prev_t);
            } else if prev_v * v < 0.0 {
                let (mut a, mut b, mut fa) = (prev_t, t, prev_v);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = defect(mid);
                    if fm == 0.0 || (b - a) < 1e-15 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (fm > 0.0) == (fa > 0.0) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev_t = t;
            prev_v = v;
        }
        out.iter()
            .map(|&t| (Float::cos(t), Float::sin(t)))
            .collect()
    }

    /// Submodule dimensions and fibration labels for the natural
    /// presentation over a symmetric space.
    pub fn fibration_info(&self) -> FibrationInfo {
        let (m, k, n) = (self.m as u64, self.k as u64, self.n as u64);
        match self.family {
            Family::TypeI => FibrationInfo {
                dim_m1: 2 * m * (2 * k + 1),
                dim_m2: m * (m - 1),
                fiber_label: format!("SO({})/U({})", 2 * m, m),
                base_label: format!("SO({})/(SO({})xSO({}))", 2 * n + 1, 2 * m, 2 * k + 1),
                total_label: format!("SO({})/(U({})xSO({}))", 2 * n + 1, m, 2 * k + 1),
            },
            Family::TypeII => FibrationInfo {
                dim_m1: 4 * m * k,
                dim_m2: m * (m + 1),
                fiber_label: format!("Sp({m})/U({m})"),
                base_label: format!("Sp({n})/(Sp({m})xSp({k}))"),
                total_label: format!("Sp({n})/(U({m})xSp({k}))"),
            },
        }
    }

    /// Slopes x/y of the two interior invariant rays, exact, in
    /// increasing order (gamma1 then gamma2).
    pub fn invariant_ray_slopes(&self) -> (Rational, Rational) {
        let (m, k) = (self.mi(), self.ki());
        match self.family {
            Family::TypeI => (
                Rational::new((2 * (m - 1)).into(), (m + 2 * k).into()),
                rat_int(2),
            ),
            Family::TypeII => (
                Rational::new((4 * (m + 1)).into(), (4 * k + 2 * m + 1).into()),
                rat_int(2),
            ),
        }
    }
}

/// Invariant metric parameters: lambda1 horizontal (base), lambda2
/// vertical (fiber); both positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Metric {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Metric, DomainError> {
        if !(lambda1 > 0.0 && lambda2 > 0.0) {
            return Err(DomainError::NonPositiveCoordinate {
                x: lambda1,
                y: lambda2,
            });
        }
        Ok(Metric { lambda1, lambda2 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicciComponents {
    pub r1: f64,
    pub r2: f64,
}

/// Dimensions of the irreducible isotropy summands plus the labels of
/// the fibration fiber -> total -> base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationInfo {
    pub dim_m1: u64,
    pub dim_m2: u64,
    pub fiber_label: String,
    pub base_label: String,
    pub total_label: String,
}
