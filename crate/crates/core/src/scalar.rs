//! Exact Gaussian rationals `a + b·i` with arbitrary-precision rational parts.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// An element of ℚ(i). All arithmetic is exact; `BigRational` keeps both
/// parts reduced with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn integer(v: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    /// `num/den` as a real number. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn imaginary(im: BigRational) -> Self {
        Self::new(BigRational::zero(), im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|²`, always a non-negative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    /// `i^k` for any integer power.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::integer(-1),
            _ => -Self::i(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    pub fn scale_int(&self, k: i64) -> Self {
        if k == 1 {
            return self.clone();
        }
        let r = BigRational::from_integer(BigInt::from(k));
        self.scale(&r)
    }

    /// Division by a nonzero integer.
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero");
        if k == 1 {
            return self.clone();
        }
        let r = BigRational::new(BigInt::one(), BigInt::from(k));
        self.scale(&r)
    }
}

impl From<i64> for GaussianRational {
    fn from(v: i64) -> Self {
        Self::integer(v)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(v: BigRational) -> Self {
        Self::real(v)
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign for GaussianRational {
    fn add_assign(&mut self, rhs: GaussianRational) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &GaussianRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

fn mul_parts(a: &GaussianRational, b: &GaussianRational) -> GaussianRational {
    // Most coefficients in practice are purely real or purely imaginary.
    match (a.im.is_zero(), b.im.is_zero()) {
        (true, true) => GaussianRational::real(&a.re * &b.re),
        (true, false) => GaussianRational::new(&a.re * &b.re, &a.re * &b.im),
        (false, true) => GaussianRational::new(&a.re * &b.re, &a.im * &b.re),
        (false, false) => GaussianRational::new(
            &a.re * &b.re - &a.im * &b.im,
            &a.re * &b.im + &a.im * &b.re,
        ),
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        mul_parts(&self, &rhs)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        mul_parts(self, rhs)
    }
}

impl Div for GaussianRational {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.inv().expect("division by zero");
        mul_parts(&self, &inv)
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inv().expect("division by zero");
        mul_parts(self, &inv)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders as `p/q`, `r/s*i` or `p/q+r/s*i` (imaginary unit coefficient
/// written as bare `i`).
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im = if self.im.is_one() {
            "i".to_string()
        } else if (-&self.im).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", fmt_rational(&self.im))
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{im}"),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{}{}", fmt_rational(&self.re), im)
                } else {
                    write!(f, "{}+{}", fmt_rational(&self.re), im)
                }
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad integer `{num}`"))?;
    let den: BigInt = den.parse().map_err(|_| format!("bad integer `{den}`"))?;
    if den.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(num, den))
}

fn parse_imag(s: &str) -> Result<BigRational, String> {
    let body = s
        .trim()
        .strip_suffix('i')
        .ok_or_else(|| format!("imaginary part `{s}` must end in i"))?
        .trim();
    let body = body.strip_suffix('*').unwrap_or(body).trim();
    match body {
        "" | "+" => Ok(BigRational::one()),
        "-" => Ok(-BigRational::one()),
        _ => parse_rational(body),
    }
}

/// Accepts `p`, `p/q`, `r/s i`, `r/s*i`, `i`, and `p/q+r/s i` (also with `-`).
impl FromStr for GaussianRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |msg: String| Error::Parse {
            context: format!("coefficient `{s}`"),
            message: msg,
        };
        let t = s.trim();
        if !t.ends_with('i') {
            return parse_rational(t).map(Self::real).map_err(bad);
        }
        // Split at the last sign that is not the leading character.
        let split = t
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        match split {
            Some(k) => {
                let re = parse_rational(&t[..k]).map_err(bad)?;
                let im = parse_imag(&t[k..]).map_err(bad)?;
                Ok(Self::new(re, im))
            }
            None => parse_imag(t).map(Self::imaginary).map_err(bad),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn reduced_with_positive_denominator() {
        let z = GaussianRational::new(q(2, -4), q(6, 9));
        assert_eq!(z.re, q(-1, 2));
        assert_eq!(z.im.denom(), &BigInt::from(3));
        assert!(z.re.denom() > &BigInt::zero());
    }

    #[test]
    fn field_ops() {
        let a: GaussianRational = "1/2+3i".parse().unwrap();
        let b: GaussianRational = "-2/3*i".parse().unwrap();
        let p = &a * &b;
        assert_eq!(p, GaussianRational::new(q(2, 1), q(-1, 3)));
        assert_eq!(&(&p / &b), &a);
        assert_eq!(GaussianRational::i() * GaussianRational::i(), GaussianRational::integer(-1));
        assert_eq!(GaussianRational::i_pow(-1), -GaussianRational::i());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "7", "-1/2", "i", "-i", "1/2*i", "3/4+i", "3/4-5/7*i", "-1-i"] {
            let z: GaussianRational = s.parse().unwrap();
            assert_eq!(z.to_string(), s, "render of {s}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!("1/0".parse::<GaussianRational>().is_err());
        assert!("abc".parse::<GaussianRational>().is_err());
        assert!("".parse::<GaussianRational>().is_err());
    }
}
