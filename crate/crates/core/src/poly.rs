//! Dense univariate real polynomials: arithmetic, complex evaluation and a
//! strict Routh-Hurwitz stability test.
//!
//! Coefficients are stored in ascending order, `coeffs[k]` multiplying
//! `s^k`. Exact trailing zeros are trimmed at construction; the zero
//! polynomial is represented as the single coefficient `0`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for Routh pivot decisions.
pub const DEFAULT_ROUTH_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("coefficient list is empty")]
    Empty,
    #[error("the zero polynomial has no stability classification")]
    ZeroPolynomial,
    #[error("operation requires degree >= 1")]
    ConstantPolynomial,
}

/// Reason a polynomial failed the Routh test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouthFailure {
    /// Leading coefficient below the relative tolerance.
    ZeroLeading,
    /// A first-column entry within tolerance of zero (imaginary-axis roots).
    ZeroPivot,
    /// A first-column sign change (open right-half-plane roots).
    NegativePivot,
}

impl fmt::Display for RouthFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouthFailure::ZeroLeading => write!(f, "zero_leading"),
            RouthFailure::ZeroPivot => write!(f, "zero_pivot"),
            RouthFailure::NegativePivot => write!(f, "negative_pivot"),
        }
    }
}

/// Outcome of the strict Hurwitz test. Imaginary-axis roots are reported
/// as not stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hurwitz {
    Stable,
    NotStable(RouthFailure),
}

impl Hurwitz {
    pub fn is_stable(self) -> bool {
        matches!(self, Hurwitz::Stable)
    }

    pub fn failure(self) -> Option<RouthFailure> {
        match self {
            Hurwitz::Stable => None,
            Hurwitz::NotStable(r) => Some(r),
        }
    }
}

/// Real polynomial in one variable, ascending coefficient order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = PolyError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Vec<f64> {
        p.coeffs
    }
}

impl Polynomial {
    /// Build from ascending coefficients, trimming exact trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if coeffs.is_empty() {
            return Err(PolyError::Empty);
        }
        for (index, c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(PolyError::NonFinite { index });
            }
        }
        Ok(Self::trimmed(coeffs))
    }

    fn trimmed(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c * s^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::trimmed(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree after trimming; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::trimmed(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Self::trimmed(coeffs)
    }

    /// Convolution product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::trimmed(coeffs)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::trimmed(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Cauchy bound: all roots lie in `|z| < 1 + max_{k<d} |c_k / c_d|`.
    pub fn cauchy_root_bound(&self) -> Result<f64, PolyError> {
        if self.degree() == 0 {
            return Err(PolyError::ConstantPolynomial);
        }
        let lead = self.leading().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs() / lead));
        Ok(1.0 + m)
    }

    /// Strict Hurwitz test by the Routh array. The polynomial is first
    /// sign-normalized so the leading coefficient is positive; it is stable
    /// iff every first-column entry exceeds `tol * max_abs_coeff`. No
    /// epsilon-substitution for singular rows: zero pivots (imaginary-axis
    /// roots) report not stable.
    pub fn is_hurwitz(&self, tol: f64) -> Result<Hurwitz, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let thr = tol * self.max_abs_coeff();
        if self.leading().abs() <= thr {
            return Ok(Hurwitz::NotStable(RouthFailure::ZeroLeading));
        }
        let d = self.degree();
        if d == 0 {
            return Ok(Hurwitz::Stable);
        }
        let sign = self.leading().signum();
        let c = |k: usize| sign * self.coeff(k);

        // First two rows in descending powers: c_d, c_{d-2}, ... / c_{d-1}, ...
        let mut r0: Vec<f64> = (0..).map_while(|i| (2 * i <= d).then(|| c(d - 2 * i))).collect();
        let mut r1: Vec<f64> = (0..)
            .map_while(|i| (2 * i + 1 <= d).then(|| c(d - 1 - 2 * i)))
            .collect();
        while !r1.is_empty() {
            let pivot = r1[0];
            if pivot <= thr {
                return Ok(Hurwitz::NotStable(if pivot < -thr {
                    RouthFailure::NegativePivot
                } else {
                    RouthFailure::ZeroPivot
                }));
            }
            if r0.len() <= 1 {
                break;
            }
            let next: Vec<f64> = (0..r0.len() - 1)
                .map(|j| {
                    let a = r0.get(j + 1).copied().unwrap_or(0.0);
                    let b = r1.get(j + 1).copied().unwrap_or(0.0);
                    (pivot * a - r0[0] * b) / pivot
                })
                .collect();
            r0 = std::mem::replace(&mut r1, next);
        }
        Ok(Hurwitz::Stable)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1.0 {
                        write!(f, "{a}")?;
                    }
                    if k == 1 {
                        write!(f, "s")?;
                    } else {
                        write!(f, "s^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn construction_trims_exact_trailing_zeros() {
        assert_eq!(p(&[1.0, 2.0, 0.0, 0.0]).coeffs(), &[1.0, 2.0]);
        assert_eq!(p(&[0.0, 0.0]).coeffs(), &[0.0]);
        assert!(p(&[0.0]).is_zero());
        assert!(Polynomial::new(vec![]).is_err());
        assert!(Polynomial::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn mul_difference_of_squares() {
        // (1+s)(1-s) = 1 - s^2
        let prod = p(&[1.0, 1.0]).mul(&p(&[1.0, -1.0]));
        assert_eq!(prod.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn mul_cube_expansion() {
        // (s+1)(s^2+2s+1) = (s+1)^3 = s^3 + 3s^2 + 3s + 1, expanded by hand
        let prod = p(&[1.0, 1.0]).mul(&p(&[1.0, 2.0, 1.0]));
        assert_eq!(prod.coeffs(), &[1.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn add_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let q: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            let q = p(&q);
            assert_eq!(q.add(&Polynomial::zero()), q);
        }
    }

    #[test]
    fn eval_examples() {
        let i = Complex64::new(0.0, 1.0);
        // s^2 + 1 at j
        assert!(p(&[1.0, 0.0, 1.0]).eval(i).norm() < 1e-15);
        // constant term at 0
        assert_eq!(p(&[4.0, 2.0, 7.0]).eval(Complex64::new(0.0, 0.0)), Complex64::new(4.0, 0.0));
        // (j+1)^3 = -2 + 2j by hand expansion
        let v = p(&[1.0, 3.0, 3.0, 1.0]).eval(i);
        assert!((v - Complex64::new(-2.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn hurwitz_examples() {
        let tol = DEFAULT_ROUTH_TOL;
        assert_eq!(p(&[1.0, 1.0]).is_hurwitz(tol).unwrap(), Hurwitz::Stable);
        assert_eq!(
            p(&[1.0, 0.0, 1.0]).is_hurwitz(tol).unwrap(),
            Hurwitz::NotStable(RouthFailure::ZeroPivot)
        );
        // (s+1)(s+2)(s^2+s+3): factors verified stable by hand, product expanded below
        let prod = p(&[1.0, 1.0]).mul(&p(&[2.0, 1.0])).mul(&p(&[3.0, 1.0, 1.0]));
        assert_eq!(prod.coeffs(), &[6.0, 11.0, 8.0, 4.0, 1.0]);
        assert_eq!(prod.is_hurwitz(tol).unwrap(), Hurwitz::Stable);
        // (s-1)(s+2)(s+3) has the RHP root +1
        let bad = p(&[-1.0, 1.0]).mul(&p(&[2.0, 1.0])).mul(&p(&[3.0, 1.0]));
        assert_eq!(bad.coeffs(), &[-6.0, 1.0, 4.0, 1.0]);
        assert!(!bad.is_hurwitz(tol).unwrap().is_stable());
        // s^3 + s has imaginary-axis roots
        assert_eq!(
            p(&[0.0, 1.0, 0.0, 1.0]).is_hurwitz(tol).unwrap(),
            Hurwitz::NotStable(RouthFailure::ZeroPivot)
        );
        // negated stable polynomial is sign-normalized first
        assert_eq!(p(&[-6.0, -11.0, -8.0, -4.0, -1.0]).is_hurwitz(tol).unwrap(), Hurwitz::Stable);
        assert!(Polynomial::zero().is_hurwitz(tol).is_err());
        assert_eq!(p(&[5.0]).is_hurwitz(tol).unwrap(), Hurwitz::Stable);
    }

    #[test]
    fn cauchy_bound_examples() {
        assert_eq!(p(&[1.0, 1.0]).cauchy_root_bound().unwrap(), 2.0);
        assert_eq!(p(&[4.0, 0.0, 1.0]).cauchy_root_bound().unwrap(), 5.0);
        // (s+1)^3: all roots at -1, bound 1 + 3 = 4
        let b = p(&[1.0, 3.0, 3.0, 1.0]).cauchy_root_bound().unwrap();
        assert_eq!(b, 4.0);
        assert!(b > 1.0);
        assert!(p(&[3.0]).cauchy_root_bound().is_err());
    }

    /// Random stable polynomial as a product of factors (s+a), (s^2+bs+c)
    /// with a, b, c > 0.01.
    fn random_stable(rng: &mut ChaCha8Rng, max_factors: usize) -> Polynomial {
        let nf = rng.random_range(1..=max_factors);
        let mut out = Polynomial::one();
        for _ in 0..nf {
            if rng.random_bool(0.5) {
                let a = rng.random_range(0.01..4.0);
                out = out.mul(&p(&[a, 1.0]));
            } else {
                let b = rng.random_range(0.01..3.0);
                let c = rng.random_range(0.01..6.0);
                out = out.mul(&p(&[c, b, 1.0]));
            }
        }
        out
    }

    #[test]
    fn random_stable_products_are_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let q = random_stable(&mut rng, 4);
            assert_eq!(q.is_hurwitz(DEFAULT_ROUTH_TOL).unwrap(), Hurwitz::Stable, "{q}");
        }
    }

    #[test]
    fn rhp_factor_destroys_stability() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let r = rng.random_range(0.01..3.0);
            let q = random_stable(&mut rng, 3).mul(&p(&[-r, 1.0]));
            assert!(!q.is_hurwitz(DEFAULT_ROUTH_TOL).unwrap().is_stable(), "{q}");
        }
    }

    #[test]
    fn product_stability_iff_both_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..100 {
            let a = random_stable(&mut rng, 3);
            let b = if rng.random_bool(0.5) {
                random_stable(&mut rng, 2)
            } else {
                random_stable(&mut rng, 2).mul(&p(&[-rng.random_range(0.05..2.0), 1.0]))
            };
            let expect = a.is_hurwitz(DEFAULT_ROUTH_TOL).unwrap().is_stable()
                && b.is_hurwitz(DEFAULT_ROUTH_TOL).unwrap().is_stable();
            assert_eq!(a.mul(&b).is_hurwitz(DEFAULT_ROUTH_TOL).unwrap().is_stable(), expect);
        }
    }

    #[test]
    fn no_roots_on_cauchy_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..50 {
            let q = random_stable(&mut rng, 4);
            if q.degree() == 0 {
                continue;
            }
            let radius = q.cauchy_root_bound().unwrap();
            for k in 0..64 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                let z = Complex64::from_polar(radius, theta);
                assert!(q.eval(z).norm() > 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn eval_is_multiplicative(
            a in proptest::collection::vec(-3.0f64..3.0, 1..=9),
            b in proptest::collection::vec(-3.0f64..3.0, 1..=9),
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
        ) {
            let pa = Polynomial::new(a).unwrap();
            let pb = Polynomial::new(b).unwrap();
            let z = Complex64::new(re, im);
            let lhs = pa.mul(&pb).eval(z);
            let rhs = pa.eval(z) * pb.eval(z);
            let scale = 1.0_f64.max(lhs.norm()).max(rhs.norm());
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        #[test]
        fn add_then_sub_roundtrips(
            a in proptest::collection::vec(-3.0f64..3.0, 1..=8),
            b in proptest::collection::vec(-3.0f64..3.0, 1..=8),
        ) {
            let pa = Polynomial::new(a).unwrap();
            let pb = Polynomial::new(b).unwrap();
            let back = pa.add(&pb).sub(&pb);
            for k in 0..=pa.degree().max(back.degree()) {
                prop_assert!((back.coeff(k) - pa.coeff(k)).abs() <= 1e-12);
            }
        }
    }
}
