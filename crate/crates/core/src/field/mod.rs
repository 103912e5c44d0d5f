//! Exact scalar arithmetic over ℚ, simple number fields ℚ[x]/(p) with a
//! designated real embedding, and rational functions in one positive parameter.
//!
//! Every [`Scalar`] is kept in canonical form, so equality is structural:
//!
//! * rationals are reduced with a positive denominator,
//! * number-field elements are polynomials of degree `< deg p`,
//! * rational functions have coprime numerator and monic denominator.

mod format;
mod numeric;
mod parse;
mod poly;
mod scalar;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use format::is_atomic;
pub use numeric::{parse_decimal, Approximation, Interval};
pub use poly::QPoly;
pub use scalar::{arith, ArithOp, Scalar};

pub(crate) use poly::rational_to_f64;
use scalar::Repr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{symbol}` at position {position}")]
    UnknownSymbol { symbol: String, position: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible (minimal polynomial is reducible?)")]
    ZeroDivisor,
    #[error("operands belong to different scalar domains")]
    DomainMismatch,
    #[error("sign of `{value}` is not determined by the positivity of the parameter; substitute a sample value")]
    IndeterminateSign { value: String },
    #[error("numeric evaluation needs a parameter sample")]
    MissingSample,
    #[error("parameter sample makes a denominator vanish")]
    SingularSample,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_rational(q: &BigRational) -> Sign {
        if q.is_zero() {
            Sign::Zero
        } else if q.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn is_nonnegative(self) -> bool {
        self != Sign::Negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Rational,
    NumberField,
    RationalFunction,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Rational => "rational",
            DomainKind::NumberField => "number_field",
            DomainKind::RationalFunction => "rational_function",
        })
    }
}

/// Designated real root of the minimal polynomial: an isolating interval
/// (exactly one root, by Sturm count) narrowed to width below 2⁻¹²⁸.
#[derive(Debug, Clone)]
pub(crate) struct RootEnclosure {
    pub(crate) sturm: Vec<QPoly>,
    pub(crate) interval: Interval,
    pub(crate) approx: f64,
}

#[derive(Debug, Clone)]
struct DomainInner {
    kind: DomainKind,
    symbol: String,
    min_poly: Option<QPoly>,
    root: Option<RootEnclosure>,
    positive_parameter: bool,
    default_sample: Option<BigRational>,
    aliases: Vec<(String, Repr)>,
}

/// A scalar domain. Cheap to clone; immutable once built.
#[derive(Debug, Clone)]
pub struct Domain(Arc<DomainInner>);

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        let (a, b) = (&*self.0, &*other.0);
        a.kind == b.kind
            && a.symbol == b.symbol
            && a.min_poly == b.min_poly
            && a.positive_parameter == b.positive_parameter
            && a.root.as_ref().map(|r| r.approx.to_bits()) == b.root.as_ref().map(|r| r.approx.to_bits())
    }
}

impl Eq for Domain {}

fn valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Domain {
    pub fn rational() -> Domain {
        Domain(Arc::new(DomainInner {
            kind: DomainKind::Rational,
            symbol: String::new(),
            min_poly: None,
            root: None,
            positive_parameter: false,
            default_sample: None,
            aliases: Vec::new(),
        }))
    }

    /// ℚ[x]/(p) with the real root of `p` closest to `embedding_approx`.
    ///
    /// `p` must be monic of degree ≥ 2. Irreducibility is not checked; a
    /// reducible `p` shows up later as [`FieldError::ZeroDivisor`].
    pub fn number_field(symbol: &str, min_poly: QPoly, embedding_approx: &BigRational) -> Result<Domain, FieldError> {
        if !valid_symbol(symbol) {
            return Err(FieldError::InvalidDomain(format!("bad generator symbol `{symbol}`")));
        }
        if !min_poly.is_monic() || min_poly.degree().unwrap_or(0) < 2 {
            return Err(FieldError::InvalidDomain("minimal polynomial must be monic of degree >= 2".into()));
        }
        let root = numeric::isolate_root(&min_poly, embedding_approx)?;
        if min_poly.eval_f64(root.approx).abs() >= 1e-8 {
            return Err(FieldError::InvalidDomain(
                "refined embedding does not annihilate the minimal polynomial".into(),
            ));
        }
        Ok(Domain(Arc::new(DomainInner {
            kind: DomainKind::NumberField,
            symbol: symbol.to_string(),
            min_poly: Some(min_poly),
            root: Some(root),
            positive_parameter: false,
            default_sample: None,
            aliases: Vec::new(),
        })))
    }

    /// ℚ(symbol): rational functions in one real parameter.
    pub fn rational_function(
        symbol: &str,
        positive: bool,
        default_sample: Option<BigRational>,
    ) -> Result<Domain, FieldError> {
        if !valid_symbol(symbol) {
            return Err(FieldError::InvalidDomain(format!("bad parameter symbol `{symbol}`")));
        }
        if positive && default_sample.as_ref().is_some_and(|s| !s.is_positive()) {
            return Err(FieldError::InvalidDomain("default sample must be positive for a positive parameter".into()));
        }
        Ok(Domain(Arc::new(DomainInner {
            kind: DomainKind::RationalFunction,
            symbol: symbol.to_string(),
            min_poly: None,
            root: None,
            positive_parameter: positive,
            default_sample,
            aliases: Vec::new(),
        })))
    }

    /// Adds a named abbreviation (e.g. `phi := alpha^2 - 2`). Aliases are
    /// accepted by the parser and preferred by [`Scalar::pretty`] when shorter.
    pub fn with_alias(&self, name: &str, definition: &str) -> Result<Domain, FieldError> {
        if !valid_symbol(name) || name == self.0.symbol || self.0.aliases.iter().any(|(n, _)| n == name) {
            return Err(FieldError::InvalidDomain(format!("alias `{name}` is not a fresh symbol")));
        }
        let value = self.parse(definition)?;
        let mut inner = (*self.0).clone();
        inner.aliases.push((name.to_string(), value.repr().clone()));
        Ok(Domain(Arc::new(inner)))
    }

    pub fn kind(&self) -> DomainKind {
        self.0.kind
    }

    pub fn symbol(&self) -> &str {
        &self.0.symbol
    }

    pub fn min_poly(&self) -> Option<&QPoly> {
        self.0.min_poly.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.0.min_poly.as_ref().and_then(|p| p.degree()).unwrap_or(1)
    }

    /// f64 value of the designated root (number fields only).
    pub fn embedding(&self) -> Option<f64> {
        self.0.root.as_ref().map(|r| r.approx)
    }

    pub(crate) fn root(&self) -> Option<&RootEnclosure> {
        self.0.root.as_ref()
    }

    pub fn positive_parameter(&self) -> bool {
        self.0.positive_parameter
    }

    pub fn default_sample(&self) -> Option<&BigRational> {
        self.0.default_sample.as_ref()
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&str, Scalar)> + '_ {
        self.0.aliases.iter().map(move |(n, r)| (n.as_str(), Scalar::from_repr(self.clone(), r.clone())))
    }

    pub(crate) fn lookup_symbol(&self, name: &str) -> Option<Scalar> {
        if self.0.kind != DomainKind::Rational && name == self.0.symbol {
            return self.generator();
        }
        self.0.aliases.iter().find(|(n, _)| n == name).map(|(_, r)| Scalar::from_repr(self.clone(), r.clone()))
    }

    pub fn zero(&self) -> Scalar {
        self.from_rational(BigRational::zero())
    }

    pub fn one(&self) -> Scalar {
        self.from_rational(BigRational::one())
    }

    pub fn from_integer(&self, n: i64) -> Scalar {
        self.from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_rational(&self, q: BigRational) -> Scalar {
        let repr = match self.0.kind {
            DomainKind::Rational => Repr::Rational(q),
            DomainKind::NumberField => Repr::Algebraic(QPoly::constant(q)),
            DomainKind::RationalFunction => Repr::Fraction { num: QPoly::constant(q), den: QPoly::one() },
        };
        Scalar::from_repr(self.clone(), repr)
    }

    /// The field generator or parameter; `None` over ℚ.
    pub fn generator(&self) -> Option<Scalar> {
        let repr = match self.0.kind {
            DomainKind::Rational => return None,
            DomainKind::NumberField => Repr::Algebraic(QPoly::x().rem(self.0.min_poly.as_ref().unwrap())),
            DomainKind::RationalFunction => Repr::Fraction { num: QPoly::x(), den: QPoly::one() },
        };
        Some(Scalar::from_repr(self.clone(), repr))
    }

    /// Parses a scalar in the text grammar (see [`parse`](Self::parse) rules in the crate docs).
    pub fn parse(&self, text: &str) -> Result<Scalar, FieldError> {
        parse::parse(text, self)
    }
}

#[cfg(test)]
mod tests;
