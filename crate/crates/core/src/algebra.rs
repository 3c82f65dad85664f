//! Exact bivariate polynomial arithmetic over arbitrary-precision
//! rationals, plus univariate Sturm-sequence root isolation.
//!
//! Coefficients are exact rationals throughout: the chart pullbacks and
//! equilibrium coordinates downstream are rational or algebraic, so
//! identities like "this field equals that one" become decidable
//! equality tests instead of tolerance checks.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational. Always in lowest terms, denominator > 0
/// (maintained by `num_rational`).
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for n/d.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Variable selector for partial derivatives and exact division.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// Sparse bivariate polynomial: exponent pair (i, j) -> nonzero rational
/// coefficient. The systems handled here have at most four terms.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant(c: Rational) -> Self {
        Poly2::monomial(0, 0, c)
    }

    /// c * x^i * y^j. A zero coefficient yields the zero polynomial.
    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly2 { terms }
    }

    pub fn x() -> Self {
        Poly2::monomial(1, 0, Rational::one())
    }

    pub fn y() -> Self {
        Poly2::monomial(0, 1, Rational::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Rational)>) -> Self {
        let mut p = Poly2::zero();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Rational)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; the zero polynomial reports the -1 sentinel.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|&(i, j)| (i + j) as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|&(i, j)| i + j == d)
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly2 {
        if c.is_zero() {
            return Poly2::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(&k, v)| (k, v * c)).collect(),
        }
    }

    /// Exact partial derivative.
    pub fn diff(&self, var: Var) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            match var {
                Var::X if i > 0 => out.add_term(i - 1, j, c * rat_int(i as i64)),
                Var::Y if j > 0 => out.add_term(i, j - 1, c * rat_int(j as i64)),
                _ => {}
            }
        }
        out
    }

    /// p(u(z1,z2), v(z1,z2)), expanded exactly.
    pub fn substitute(&self, u: &Poly2, v: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            let mut term = Poly2::constant(c.clone());
            for _ in 0..i {
                term = term.mul(u);
            }
            for _ in 0..j {
                term = term.mul(v);
            }
            out = out.add(&term);
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, x: &Rational, y: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(i, j), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..i {
                t *= x;
            }
            for _ in 0..j {
                t *= y;
            }
            acc += t;
        }
        acc
    }

    /// Floating evaluation with Horner accumulation per variable
    /// (outer in x over inner-Horner rows in y).
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let max_i = self.terms.keys().map(|&(i, _)| i).max().unwrap() as usize;
        let max_j = self.terms.keys().map(|&(_, j)| j).max().unwrap() as usize;
        let mut rows = alloc::vec![alloc::vec![0.0f64; max_j + 1]; max_i + 1];
        for (&(i, j), c) in &self.terms {
            rows[i as usize][j as usize] = c.to_f64().unwrap_or(f64::NAN);
        }
        let mut acc = 0.0;
        for row in rows.iter().rev() {
            let mut row_val = 0.0;
            for c in row.iter().rev() {
                row_val = row_val * y + c;
            }
            acc = acc * x + row_val;
        }
        acc
    }

    /// Exact division by the variable `var` (x or y). Returns `None`
    /// unless every term carries the variable.
    pub fn div_exact_var(&self, var: Var) -> Option<Poly2> {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            match var {
                Var::X => {
                    if i == 0 {
                        return None;
                    }
                    out.add_term(i - 1, j, c.clone());
                }
                Var::Y => {
                    if j == 0 {
                        return None;
                    }
                    out.add_term(i, j - 1, c.clone());
                }
            }
        }
        Some(out)
    }

    /// Restriction to the x-axis (y = 0) as a univariate polynomial in x.
    pub fn restrict_y_zero(&self) -> Poly1 {
        let deg = self
            .terms
            .keys()
            .filter(|&&(_, j)| j == 0)
            .map(|&(i, _)| i)
            .max();
        let mut coeffs = alloc::vec![Rational::zero(); deg.map_or(0, |d| d as usize + 1)];
        for (&(i, j), c) in &self.terms {
            if j == 0 {
                coeffs[i as usize] = c.clone();
            }
        }
        Poly1::new(coeffs)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first, then lexicographic in (i, j).
        let mut keys: Vec<(u32, u32)> = self.terms.keys().cloned().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        let mut first = true;
        for (i, j) in keys {
            let c = &self.terms[&(i, j)];
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !mag.is_one() || (i == 0 && j == 0);
            if show_coeff {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "({}/{})", mag.numer(), mag.denom())?;
                }
            }
            let var = |f: &mut fmt::Formatter<'_>, name: &str, e: u32| -> fmt::Result {
                match e {
                    0 => Ok(()),
                    1 => write!(f, "{name}"),
                    _ => write!(f, "{name}^{e}"),
                }
            };
            var(f, "x", i)?;
            var(f, "y", j)?;
        }
        Ok(())
    }
}

/// Display with custom variable names (charts use z1, z2).
pub fn format_poly(p: &Poly2, xname: &str, yname: &str) -> String {
    use alloc::string::ToString;
    let s = p.to_string();
    // Poly2's Display uses single-letter placeholders, safe to remap.
    s.replace('x', xname).replace('y', yname)
}

/// Dense univariate polynomial over exact rationals; coefficients
/// ascending by degree. Used for root isolation of axis restrictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly1 {
    coeffs: Vec<Rational>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::new(Vec::new());
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * rat_int(k as i64))
            .collect();
        Poly1::new(coeffs)
    }

    /// Remainder of self / divisor (exact polynomial long division).
    fn rem(&self, divisor: &Poly1) -> Poly1 {
        assert!(!divisor.is_zero());
        let mut r = self.coeffs.clone();
        let d = divisor.coeffs.len();
        let lead = divisor.coeffs.last().unwrap();
        while r.len() >= d {
            let q = r.last().unwrap() / lead;
            let shift = r.len() - d;
            for (k, c) in divisor.coeffs.iter().enumerate() {
                let v = &r[shift + k] - &q * c;
                r[shift + k] = v;
            }
            // Leading term cancels exactly.
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly1::new(r)
    }

    /// Square-free part: self / gcd(self, self').
    pub fn square_free(&self) -> Poly1 {
        let g = gcd(self.clone(), self.derivative());
        if g.degree() <= 0 {
            return self.clone();
        }
        self.div_exact(&g)
    }

    fn div_exact(&self, divisor: &Poly1) -> Poly1 {
        let mut r = self.coeffs.clone();
        let d = divisor.coeffs.len();
        let lead = divisor.coeffs.last().unwrap();
        let mut q = alloc::vec![Rational::zero(); r.len() + 1 - d];
        while r.len() >= d {
            let qc = r.last().unwrap() / lead;
            let shift = r.len() - d;
            q[shift] = qc.clone();
            for (k, c) in divisor.coeffs.iter().enumerate() {
                let v = &r[shift + k] - &qc * c;
                r[shift + k] = v;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly1::new(q)
    }

    /// Sturm chain of the square-free part.
    fn sturm_chain(&self) -> Vec<Poly1> {
        let p = self.square_free();
        let mut chain = alloc::vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Poly1 {
                coeffs: r.coeffs.iter().map(|c| -c).collect(),
            });
        }
        chain
    }

    /// Cauchy bound on the magnitude of real roots.
    fn root_bound(&self) -> Rational {
        let lead = self.coeffs.last().unwrap();
        let mut m = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let v = (c / lead).abs();
            if v > m {
                m = v;
            }
        }
        m + Rational::one()
    }

    /// Isolating intervals (lo, hi] for every distinct real root, in
    /// increasing order, each narrower than `width`. Exact roots may
    /// land on interval endpoints; both ends bracket the root sign-wise
    /// on the square-free part.
    pub fn isolate_real_roots(&self, width: &Rational) -> Vec<(Rational, Rational)> {
        if self.degree() <= 0 {
            return Vec::new();
        }
        let chain = self.sturm_chain();
        let variations = |x: &Rational| -> u32 {
            let mut count = 0;
            let mut last = 0i8;
            for p in &chain {
                let v = p.eval(x);
                let s = if v.is_zero() {
                    continue;
                } else if v.is_positive() {
                    1
                } else {
                    -1
                };
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
            count
        };
        let bound = self.root_bound();
        let mut out = Vec::new();
        let mut stack = alloc::vec![(-bound.clone(), bound)];
        while let Some((lo, hi)) = stack.pop() {
            let n = variations(&lo).saturating_sub(variations(&hi));
            if n == 0 {
                continue;
            }
            if n == 1 && (&hi - &lo) < *width {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / rat_int(2);
            // Nudge off an exact root so variation counts stay clean.
            let mid = if self.eval(&mid).is_zero() {
                (&lo + &mid * rat_int(3)) / rat_int(4)
            } else {
                mid
            };
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Isolate roots and refine each to a point by bisection on the
    /// square-free part, to interval width `tol` (exact arithmetic).
    /// Rational roots are recovered exactly: the simplest rational in
    /// each refined interval is tested for exact vanishing.
    pub fn real_roots(&self, tol: &Rational) -> Vec<Rational> {
        let sf = self.square_free();
        let mut roots = Vec::new();
        for (mut lo, mut hi) in self.isolate_real_roots(tol) {
            let flo = sf.eval(&lo);
            if flo.is_zero() {
                roots.push(lo);
                continue;
            }
            if sf.eval(&hi).is_zero() {
                roots.push(hi);
                continue;
            }
            let neg_lo = flo.is_negative();
            let mut exact = None;
            while (&hi - &lo) > *tol {
                let mid = (&lo + &hi) / rat_int(2);
                let fm = sf.eval(&mid);
                if fm.is_zero() {
                    exact = Some(mid);
                    break;
                }
                if fm.is_negative() == neg_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if exact.is_none() {
                let candidate = simplest_rational_in(&lo, &hi);
                if sf.eval(&candidate).is_zero() {
                    exact = Some(candidate);
                }
            }
            roots.push(exact.unwrap_or_else(|| (&lo + &hi) / rat_int(2)));
        }
        roots
    }
}

/// The rational with the smallest denominator in the open interval
/// (lo, hi), by the Stern-Brocot / continued-fraction construction.
pub fn simplest_rational_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo < hi);
    let n = lo.floor() + Rational::one();
    if n < *hi {
        // An integer lies strictly inside; the smallest-magnitude one
        // closest to lo is n (n > lo always since n = floor(lo) + 1).
        return n;
    }
    // The interval sits inside (f, f+1]; shift to (a, b) in (0, 1] and
    // recurse on the reciprocal interval.
    let f = lo.floor();
    let a = lo - &f;
    let b = hi - &f;
    if a.is_zero() {
        // (f, hi) with hi <= f + 1: the simplest interior point of
        // (0, b) is 1/ceil(1/b + 1)-style; recurse via reciprocal with
        // an artificial lower bound just above zero is unnecessary --
        // 1/q for the smallest q with 1/q < b works.
        let q = (Rational::one() / &b).floor() + Rational::one();
        return f + Rational::one() / q;
    }
    f + Rational::one() / simplest_rational_in(&(Rational::one() / b), &(Rational::one() / a))
}

fn gcd(a: Poly1, b: Poly1) -> Poly1 {
    let (mut a, mut b) = (a, b);
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    // Normalize monic.
    if let Some(lead) = a.coeffs.last().cloned() {
        a = Poly1::new(a.coeffs.iter().map(|c| c / &lead).collect());
    }
    a
}
