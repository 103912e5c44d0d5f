use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Domain, DomainKind, FieldError, QPoly};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Repr {
    Rational(BigRational),
    Algebraic(QPoly),
    Fraction { num: QPoly, den: QPoly },
}

/// An element of a [`Domain`], always in canonical form.
#[derive(Debug, Clone)]
pub struct Scalar {
    domain: Domain,
    repr: Repr,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && self.domain == other.domain
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.repr.hash(state);
    }
}

fn canonical_fraction(num: QPoly, den: QPoly) -> Repr {
    if num.is_zero() {
        return Repr::Fraction { num, den: QPoly::one() };
    }
    let g = QPoly::gcd(&num, &den);
    let (mut num, mut den) = if g.is_one() { (num, den) } else { (num.div_rem(&g).0, den.div_rem(&g).0) };
    let lead = den.leading().expect("nonzero denominator").clone();
    if !lead.is_one() {
        let inv = lead.recip();
        num = num.scale(&inv);
        den = den.scale(&inv);
    }
    Repr::Fraction { num, den }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Neg,
    Inv,
}

/// Field operation dispatcher; binary operations require `y`.
pub fn arith(op: ArithOp, x: &Scalar, y: Option<&Scalar>) -> Result<Scalar, FieldError> {
    let rhs = || y.ok_or_else(|| FieldError::Syntax { position: 0, message: format!("{op:?} needs two operands") });
    match op {
        ArithOp::Add => x.try_add(rhs()?),
        ArithOp::Sub => x.try_sub(rhs()?),
        ArithOp::Mul => x.try_mul(rhs()?),
        ArithOp::Neg => Ok(-x),
        ArithOp::Inv => x.inv(),
    }
}

impl Scalar {
    pub(crate) fn from_repr(domain: Domain, repr: Repr) -> Scalar {
        let repr = match repr {
            Repr::Algebraic(p) => {
                let m = domain.min_poly().expect("number field without minimal polynomial");
                if p.degree().is_some_and(|d| d >= m.degree().unwrap()) {
                    Repr::Algebraic(p.rem(m))
                } else {
                    Repr::Algebraic(p)
                }
            }
            Repr::Fraction { num, den } => canonical_fraction(num, den),
            r => r,
        };
        Scalar { domain, repr }
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rational(q) => q.is_zero(),
            Repr::Algebraic(p) => p.is_zero(),
            Repr::Fraction { num, .. } => num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The value as a rational number, when it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rational(q) => Some(q.clone()),
            Repr::Algebraic(p) => p.as_constant(),
            Repr::Fraction { num, den } => {
                if den.is_one() {
                    num.as_constant()
                } else {
                    None
                }
            }
        }
    }

    /// The value as an integer, when it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn is_integer(&self) -> bool {
        self.as_integer().is_some()
    }

    /// Coordinates in the power basis `1, x, …, x^(deg-1)` (number fields),
    /// or `[q]` over ℚ. Rational functions have no finite coordinate vector.
    pub fn coordinates(&self) -> Option<Vec<BigRational>> {
        match &self.repr {
            Repr::Rational(q) => Some(vec![q.clone()]),
            Repr::Algebraic(p) => Some((0..self.domain.degree()).map(|i| p.coeff(i)).collect()),
            Repr::Fraction { .. } => None,
        }
    }

    /// Numerator and denominator polynomials (rational functions only).
    pub fn fraction_parts(&self) -> Option<(&QPoly, &QPoly)> {
        match &self.repr {
            Repr::Fraction { num, den } => Some((num, den)),
            _ => None,
        }
    }

    /// Polynomial representative (number fields only).
    pub fn polynomial(&self) -> Option<&QPoly> {
        match &self.repr {
            Repr::Algebraic(p) => Some(p),
            _ => None,
        }
    }

    fn check_domain(&self, other: &Scalar) -> Result<(), FieldError> {
        if self.domain == other.domain {
            Ok(())
        } else {
            Err(FieldError::DomainMismatch)
        }
    }

    fn combine(&self, other: &Scalar, f: impl Fn(&Repr, &Repr) -> Repr) -> Scalar {
        Scalar::from_repr(self.domain.clone(), f(&self.repr, &other.repr))
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_domain(other)?;
        Ok(self.combine(other, |a, b| match (a, b) {
            (Repr::Rational(x), Repr::Rational(y)) => Repr::Rational(x + y),
            (Repr::Algebraic(x), Repr::Algebraic(y)) => Repr::Algebraic(x + y),
            (Repr::Fraction { num: a, den: b }, Repr::Fraction { num: c, den: d }) => {
                if b == d {
                    Repr::Fraction { num: a + c, den: b.clone() }
                } else {
                    Repr::Fraction { num: &(a * d) + &(c * b), den: b * d }
                }
            }
            _ => unreachable!("representation does not match domain"),
        }))
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_domain(other)?;
        Ok(self.combine(other, |a, b| match (a, b) {
            (Repr::Rational(x), Repr::Rational(y)) => Repr::Rational(x * y),
            (Repr::Algebraic(x), Repr::Algebraic(y)) => Repr::Algebraic(x * y),
            (Repr::Fraction { num: a, den: b }, Repr::Fraction { num: c, den: d }) => {
                Repr::Fraction { num: a * c, den: b * d }
            }
            _ => unreachable!("representation does not match domain"),
        }))
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_domain(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rational(q) => Repr::Rational(q.recip()),
            Repr::Algebraic(p) => {
                let m = self.domain.min_poly().unwrap();
                Repr::Algebraic(p.inverse_mod(m).ok_or(FieldError::ZeroDivisor)?)
            }
            Repr::Fraction { num, den } => Repr::Fraction { num: den.clone(), den: num.clone() },
        };
        Ok(Scalar::from_repr(self.domain.clone(), repr))
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, exp: i64) -> Result<Scalar, FieldError> {
        let base = if exp < 0 { self.inv()? } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = self.domain.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Substitutes a rational value for the parameter of a rational-function
    /// scalar, producing a scalar over ℚ. Other domains map constants only.
    pub fn specialize(&self, value: &BigRational) -> Result<Scalar, FieldError> {
        let q = match &self.repr {
            Repr::Fraction { num, den } => {
                let d = den.eval(value);
                if d.is_zero() {
                    return Err(FieldError::SingularSample);
                }
                num.eval(value) / d
            }
            _ => self
                .as_rational()
                .ok_or_else(|| FieldError::InvalidDomain("only rational-function scalars can be specialized".into()))?,
        };
        Ok(Domain::rational().from_rational(q))
    }

    /// Same value, transported to a structurally equal domain (e.g. one
    /// carrying extra aliases).
    pub fn rehome(&self, domain: &Domain) -> Result<Scalar, FieldError> {
        if *domain != self.domain {
            return Err(FieldError::DomainMismatch);
        }
        Ok(Scalar { domain: domain.clone(), repr: self.repr.clone() })
    }

    pub fn kind(&self) -> DomainKind {
        self.domain.kind()
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    /// Panics on domain mismatch; use [`Scalar::try_add`] for untrusted operands.
    fn add(self, rhs: &Scalar) -> Scalar {
        self.try_add(rhs).expect("scalar domain mismatch")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.try_sub(rhs).expect("scalar domain mismatch")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.try_mul(rhs).expect("scalar domain mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rational(q) => Repr::Rational(-q),
            Repr::Algebraic(p) => Repr::Algebraic(-p),
            Repr::Fraction { num, den } => Repr::Fraction { num: -num, den: den.clone() },
        };
        Scalar { domain: self.domain.clone(), repr }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}
