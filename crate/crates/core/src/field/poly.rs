//! Dense univariate polynomials with rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Polynomial over ℚ, coefficients stored in ascending degree with no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    /// The monomial `c * x^deg`.
    pub fn monomial(c: BigRational, deg: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        coeffs[deg] = c;
        QPoly::from_coeffs(coeffs)
    }

    pub fn x() -> Self {
        QPoly::monomial(BigRational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, deg: usize) -> BigRational {
        self.coeffs.get(deg).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// Constant term if the polynomial has degree ≤ 0.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => QPoly::zero(),
            Some(l) => {
                let inv = l.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn derivative(&self) -> Self {
        QPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rational_to_f64(c);
        }
        acc
    }

    /// Euclidean division; panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead_inv = divisor.coeffs[dd].recip();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (QPoly::zero(), QPoly::zero());
        };
        if nd < dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (QPoly::from_coeffs(quot), QPoly::from_coeffs(rem))
    }

    pub fn rem(&self, divisor: &QPoly) -> QPoly {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Inverse of `self` modulo `modulus`, if `gcd(self, modulus) = 1`.
    pub fn inverse_mod(&self, modulus: &QPoly) -> Option<QPoly> {
        // Extended Euclid tracking only the coefficient of `self`.
        let mut r0 = modulus.clone();
        let mut r1 = self.rem(modulus);
        let mut t0 = QPoly::zero();
        let mut t1 = QPoly::one();
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let t = &t0 - &(&q * &t1);
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        let c = r0.as_constant()?;
        if c.is_zero() {
            return None;
        }
        Some(t0.scale(&c.recip()).rem(modulus))
    }

    /// Sign variations of the Sturm sequence at `x`; `x` must not be a root.
    pub(crate) fn sturm_variations(seq: &[QPoly], x: &BigRational) -> usize {
        let signs: Vec<i8> = seq
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn sturm_sequence(&self) -> Vec<QPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-&r);
        }
        seq
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &BigRational, hi: &BigRational) -> usize {
        let seq = self.sturm_sequence();
        Self::sturm_variations(&seq, lo).saturating_sub(Self::sturm_variations(&seq, hi))
    }

    /// Coefficients all ≥ 0, or all ≤ 0 (ignores zero coefficients).
    pub fn coefficient_sign(&self) -> Option<i8> {
        let pos = self.coeffs.iter().any(|c| c.is_positive());
        let neg = self.coeffs.iter().any(|c| c.is_negative());
        match (pos, neg) {
            (true, false) => Some(1),
            (false, true) => Some(-1),
            (false, false) => Some(0),
            (true, true) => None,
        }
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        // Numerator or denominator beyond f64 range: scale both down.
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}
