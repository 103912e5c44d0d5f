//! Scalar printing. Every string produced here parses back to the same value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::Repr;
use super::{QPoly, Scalar};

fn rational_text(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn power_text(symbol: &str, k: usize) -> String {
    if k == 1 {
        symbol.to_string()
    } else {
        format!("{symbol}^{k}")
    }
}

/// `q * symbol^k` written without redundant unit factors.
fn scaled_power(q: &BigRational, symbol: &str, k: usize) -> String {
    let p = power_text(symbol, k);
    let (n, d) = (q.numer(), q.denom());
    let mut s = if n.is_one() {
        p
    } else if *n == -BigInt::one() {
        format!("-{p}")
    } else {
        format!("{n}*{p}")
    };
    if !d.is_one() {
        s = format!("{s}/{d}");
    }
    s
}

/// `q / symbol^k`.
fn scaled_inverse_power(q: &BigRational, symbol: &str, k: usize) -> String {
    let p = power_text(symbol, k);
    if q.denom().is_one() {
        format!("{}/{p}", q.numer())
    } else {
        format!("{}/({}*{p})", q.numer(), q.denom())
    }
}

fn join_terms(terms: Vec<String>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, t) in terms.into_iter().enumerate() {
        if i == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

/// Polynomial text in `symbol`, highest degree first.
pub(crate) fn poly_text(p: &QPoly, symbol: &str) -> String {
    let terms = p
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| if k == 0 { rational_text(c) } else { scaled_power(c, symbol, k) })
        .collect();
    join_terms(terms)
}

fn term_count(p: &QPoly) -> usize {
    p.coeffs().iter().filter(|c| !c.is_zero()).count()
}

/// Numerator and denominator scaled to coprime integer coefficients.
fn integral_parts(num: &QPoly, den: &QPoly) -> (QPoly, QPoly) {
    let lcm = num.coeffs().iter().chain(den.coeffs()).fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scale = BigRational::from_integer(lcm);
    let (n, d) = (num.scale(&scale), den.scale(&scale));
    let content = n.coeffs().iter().chain(d.coeffs()).fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
    if content.is_zero() || content.is_one() {
        return (n, d);
    }
    let inv = BigRational::new(BigInt::one(), content);
    (n.scale(&inv), d.scale(&inv))
}

fn fraction_text(num: &QPoly, den: &QPoly, symbol: &str) -> String {
    if den.is_one() {
        return poly_text(num, symbol);
    }
    let (n, d) = integral_parts(num, den);
    let ntext = poly_text(&n, symbol);
    let dtext = poly_text(&d, symbol);
    let n_wrapped = if term_count(&n) > 1 { format!("({ntext})") } else { ntext };
    // A bare atom (`a`, `a^2`, `3`) can follow `/` unparenthesized.
    let bare = dtext.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^');
    let d_wrapped = if bare { dtext } else { format!("({dtext})") };
    format!("{n_wrapped}/{d_wrapped}")
}

impl Scalar {
    /// Canonical text: written in the generator only, never in aliases.
    pub fn canonical_text(&self) -> String {
        let symbol = self.domain().symbol();
        match self.repr() {
            Repr::Rational(q) => rational_text(q),
            Repr::Algebraic(p) => poly_text(p, symbol),
            Repr::Fraction { num, den } => fraction_text(num, den, symbol),
        }
    }

    /// Shortest of several equivalent renderings, using domain aliases and
    /// small (inverse) powers; ties go to the canonical text.
    pub fn pretty(&self) -> String {
        let mut best = self.canonical_text();
        if self.as_rational().is_some() {
            return best;
        }
        let mut consider = |s: String| {
            if s.len() < best.len() {
                best = s;
            }
        };
        let domain = self.domain().clone();
        let mut symbols: Vec<(String, Scalar)> =
            domain.generator().map(|g| (domain.symbol().to_string(), g)).into_iter().collect();
        symbols.extend(domain.aliases().map(|(n, v)| (n.to_string(), v)));
        for (name, value) in &symbols {
            let mut power = domain.one();
            for k in 1..=3usize {
                power = &power * value;
                if let Some(q) = self.try_div(&power).ok().and_then(|r| r.as_rational()) {
                    consider(scaled_power(&q, name, k));
                }
                if let Some(q) = self.try_mul(&power).ok().and_then(|r| r.as_rational()) {
                    consider(scaled_inverse_power(&q, name, k));
                }
            }
            // Affine in the symbol: self = p + q*value.
            if let (Some(x), Some(v)) = (self.coordinates(), value.coordinates()) {
                if let Some(i) = (1..v.len()).find(|&i| !v[i].is_zero()) {
                    let q = &x[i] / &v[i];
                    let p = &x[0] - &q * &v[0];
                    let candidate = &domain.from_rational(p.clone()) + &(&domain.from_rational(q.clone()) * value);
                    if candidate == *self {
                        consider(poly_text(&QPoly::from_coeffs(vec![p, q]), name));
                    }
                }
            }
        }
        best
    }
}

/// True if `s` can be used as an exponent or operand without parentheses.
pub fn is_atomic(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}
