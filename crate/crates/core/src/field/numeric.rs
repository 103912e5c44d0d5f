//! Real embeddings: exact signs by interval refinement, decimal approximations
//! and fast f64 evaluation.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::Repr;
use super::{rational_to_f64, DomainKind, FieldError, QPoly, RootEnclosure, Scalar, Sign};

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Interval {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn add_scalar(&self, c: &BigRational) -> Interval {
        Interval { lo: &self.lo + c, hi: &self.hi + c }
    }

    fn mul(&self, other: &Interval) -> Interval {
        let products = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// Enclosure of `p(x)` for all `x` in `self` (interval Horner scheme).
    pub fn eval_poly(&self, p: &QPoly) -> Interval {
        let mut acc = Interval::point(BigRational::zero());
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add_scalar(c);
        }
        acc
    }
}

/// A rational approximation with a guaranteed absolute error bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximation {
    pub value: BigRational,
    pub error: BigRational,
    pub digits: u32,
}

impl Approximation {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    /// Decimal string with `digits` digits after the point, rounded half away from zero.
    pub fn to_decimal(&self) -> String {
        decimal_string(&self.value, self.digits)
    }
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

pub(crate) fn decimal_string(q: &BigRational, digits: u32) -> String {
    let scaled = q * BigRational::from_integer(pow10(digits));
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let mut s = rounded.abs().to_string();
    if digits > 0 {
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits as usize, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

/// Parses `-12.345`, `7`, `3/4` or `1e-3` into an exact rational.
pub fn parse_decimal(text: &str) -> Result<BigRational, FieldError> {
    let t = text.trim();
    let err = || FieldError::Syntax { position: 0, message: format!("`{text}` is not a decimal number") };
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| err())?;
    let mut value = BigRational::new(digits, pow10(frac_part.len() as u32 + 1));
    let scale = BigRational::from_integer(pow10(exponent.unsigned_abs()));
    value = if exponent >= 0 { value * scale } else { value / scale };
    Ok(if negative { -value } else { value })
}

/// Isolating interval for the real root of `p` nearest `approx`, narrowed by
/// Sturm-guided bisection.
pub(crate) fn isolate_root(p: &QPoly, approx: &BigRational) -> Result<RootEnclosure, FieldError> {
    let sturm = p.sturm_sequence();
    let count = |lo: &BigRational, hi: &BigRational| -> Result<usize, FieldError> {
        if p.eval(lo).is_zero() || p.eval(hi).is_zero() {
            return Err(FieldError::InvalidDomain("minimal polynomial has a rational root near the embedding".into()));
        }
        Ok(p.count_roots(lo, hi))
    };
    let ten = BigRational::from_integer(10.into());
    let mut delta = BigRational::new(BigInt::one(), pow10(6));
    let mut found = None;
    for _ in 0..60 {
        let lo = approx - &delta;
        let hi = approx + &delta;
        match count(&lo, &hi)? {
            1 => {
                found = Some(Interval { lo, hi });
                break;
            }
            0 => {
                if delta > BigRational::from_integer(pow10(6)) {
                    break;
                }
                delta *= &ten;
            }
            _ => delta /= &ten,
        }
    }
    let mut interval = found
        .ok_or_else(|| FieldError::InvalidDomain("no real root of the minimal polynomial near the embedding".into()))?;
    let target = BigRational::new(BigInt::one(), BigInt::one() << 128);
    while interval.width() > target {
        bisect(&sturm, &mut interval);
    }
    let approx = rational_to_f64(&interval.midpoint());
    Ok(RootEnclosure { sturm, interval, approx })
}

/// Halves an isolating interval, keeping the half that holds the root.
fn bisect(sturm: &[QPoly], interval: &mut Interval) {
    let mid = interval.midpoint();
    if sturm[0].eval(&mid).is_zero() {
        // Exact rational root: the degenerate interval is still correct.
        *interval = Interval::point(mid);
        return;
    }
    let left = QPoly::sturm_variations(sturm, &interval.lo).saturating_sub(QPoly::sturm_variations(sturm, &mid));
    if left >= 1 {
        interval.hi = mid;
    } else {
        interval.lo = mid;
    }
}

impl Scalar {
    fn sample_value(&self, sample: Option<&BigRational>) -> Result<BigRational, FieldError> {
        let s = sample.or(self.domain().default_sample()).ok_or(FieldError::MissingSample)?;
        Ok(self.specialize(s)?.as_rational().unwrap())
    }

    /// Enclosures of the value that shrink on every iteration (number fields).
    fn refine_enclosures(&self, mut accept: impl FnMut(&Interval) -> bool) -> Interval {
        let p = self.polynomial().expect("number-field scalar");
        let root = self.domain().root().expect("number field has an embedding");
        let mut iv = root.interval.clone();
        loop {
            let enc = iv.eval_poly(p);
            if accept(&enc) {
                return enc;
            }
            bisect(&root.sturm, &mut iv);
            if iv.width().is_zero() {
                return iv.eval_poly(p);
            }
        }
    }

    /// Exact sign under the designated embedding. Over a parameter field the
    /// sign is decided only when numerator and denominator have coefficients of
    /// one sign each and the parameter is declared positive.
    pub fn sign(&self) -> Result<Sign, FieldError> {
        if self.is_zero() {
            return Ok(Sign::Zero);
        }
        match self.repr() {
            Repr::Rational(q) => Ok(Sign::of_rational(q)),
            Repr::Algebraic(_) => {
                let enc = self.refine_enclosures(|e| !e.contains_zero());
                Ok(if enc.lo.is_positive() { Sign::Positive } else { Sign::Negative })
            }
            Repr::Fraction { num, den } => {
                let indeterminate = || FieldError::IndeterminateSign { value: self.pretty() };
                if !self.domain().positive_parameter() {
                    return Err(indeterminate());
                }
                match (num.coefficient_sign(), den.coefficient_sign()) {
                    (Some(a), Some(b)) if a != 0 && b != 0 => Ok(if a == b { Sign::Positive } else { Sign::Negative }),
                    _ => Err(indeterminate()),
                }
            }
        }
    }

    /// Exact sign after substituting `sample` for the parameter (rational functions),
    /// otherwise the same as [`sign`](Self::sign).
    pub fn sign_at(&self, sample: &BigRational) -> Result<Sign, FieldError> {
        match self.kind() {
            DomainKind::RationalFunction => Ok(Sign::of_rational(&self.sample_value(Some(sample))?)),
            _ => self.sign(),
        }
    }

    /// Decimal approximation with relative error below `10^-precision`.
    pub fn eval_numeric(&self, precision: u32, sample: Option<&BigRational>) -> Result<Approximation, FieldError> {
        let exact = |value: BigRational| Approximation { value, error: BigRational::zero(), digits: precision };
        if self.is_zero() {
            return Ok(exact(BigRational::zero()));
        }
        match self.repr() {
            Repr::Rational(q) => Ok(exact(q.clone())),
            Repr::Fraction { .. } => Ok(exact(self.sample_value(sample)?)),
            Repr::Algebraic(_) => {
                let rel = BigRational::new(BigInt::one(), pow10(precision + 1));
                let enc = self.refine_enclosures(|e| {
                    if e.contains_zero() {
                        return false;
                    }
                    let magnitude = e.lo.abs().min(e.hi.abs());
                    e.width() < &rel * magnitude
                });
                Ok(Approximation { value: enc.midpoint(), error: enc.width(), digits: precision })
            }
        }
    }

    /// Fast f64 value. Parameter fields use `sample`, falling back to the
    /// domain's default sample.
    pub fn to_f64(&self, sample: Option<f64>) -> Result<f64, FieldError> {
        match self.repr() {
            Repr::Rational(q) => Ok(rational_to_f64(q)),
            Repr::Algebraic(p) => Ok(p.eval_f64(self.domain().embedding().unwrap())),
            Repr::Fraction { num, den } => {
                let s = match sample {
                    Some(s) => s,
                    None => rational_to_f64(self.domain().default_sample().ok_or(FieldError::MissingSample)?),
                };
                let d = den.eval_f64(s);
                if d == 0.0 {
                    return Err(FieldError::SingularSample);
                }
                Ok(num.eval_f64(s) / d)
            }
        }
    }
}
