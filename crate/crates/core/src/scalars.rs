//! Exact scalar types shared by every module.
//!
//! All measure-theoretic data (Haar weights, cocycles, measures) is kept as
//! arbitrary-precision rationals so that algebraic identities can be checked
//! exactly; analytic quantities (norms, spectra) are computed in `f64` after
//! an explicit cast.

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Rat = BigRational;
/// Gaussian rational: complex number with exact rational parts.
pub type CRat = Complex<Rat>;
/// Double-precision complex scalar used by the matrix kernel.
pub type C64 = Complex<f64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FractionError {
    #[error("empty fraction string")]
    Empty,
    #[error("invalid fraction `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn crat(re: Rat, im: Rat) -> CRat {
    Complex::new(re, im)
}

pub fn crat_int(re: i64, im: i64) -> CRat {
    Complex::new(rat_int(re), rat_int(im))
}

pub fn crat_zero() -> CRat {
    Complex::new(Rat::zero(), Rat::zero())
}

pub fn crat_one() -> CRat {
    Complex::new(Rat::one(), Rat::zero())
}

pub fn conj(z: &CRat) -> CRat {
    Complex::new(z.re.clone(), -z.im.clone())
}

/// |z|^2, exact.
pub fn abs2(z: &CRat) -> Rat {
    &z.re * &z.re + &z.im * &z.im
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of approximations; only reachable for
        // numerators/denominators beyond f64 range, which the fixtures never
        // produce.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn crat_to_c64(z: &CRat) -> C64 {
    Complex::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// |z| as f64, computed from the exact |z|^2.
pub fn abs_f64(z: &CRat) -> f64 {
    rat_to_f64(&abs2(z)).sqrt()
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_fraction(text: &str) -> Result<Rat, FractionError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(FractionError::Empty);
    }
    let (num_s, den_s) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|_| FractionError::Invalid(text.to_string()))?;
    let den: BigInt = den_s
        .parse()
        .map_err(|_| FractionError::Invalid(text.to_string()))?;
    if den.is_zero() {
        return Err(FractionError::ZeroDenominator(text.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Canonical fraction string (`"p"` for integers, `"p/q"` otherwise, reduced).
pub fn format_fraction(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// sqrt of a positive rational as f64 (exact when the root is rational).
pub fn rat_sqrt_f64(r: &Rat) -> f64 {
    match rat_sqrt_exact(r) {
        Some(s) => rat_to_f64(&s),
        None => rat_to_f64(r).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_round_trip() {
        let r = parse_fraction("-6/4").unwrap();
        assert_eq!(r, rat(-3, 2));
        assert_eq!(format_fraction(&r), "-3/2");
        assert_eq!(parse_fraction("7").unwrap(), rat_int(7));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x").is_err());
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rat_sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt_exact(&rat(2, 1)), None);
        assert_eq!(rat_sqrt_exact(&rat(-1, 1)), None);
    }

    #[test]
    fn gaussian_modulus() {
        let z = crat_int(3, 4);
        assert_eq!(abs2(&z), rat_int(25));
        assert_eq!(abs_f64(&z), 5.0);
    }
}
