use num_rational::BigRational;
use proptest::prelude::*;

use super::*;

fn qq(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn golden() -> Domain {
    Domain::number_field("phi", QPoly::from_i64s(&[-1, -1, 1]), &qq(1618, 1000)).unwrap()
}

fn quartic() -> Domain {
    Domain::number_field("alpha", QPoly::from_i64s(&[5, 0, -5, 0, 1]), &parse_decimal("1.902113").unwrap())
        .unwrap()
        .with_alias("phi", "alpha^2 - 2")
        .unwrap()
}

fn param() -> Domain {
    Domain::rational_function("a", true, Some(parse_decimal("1.4142135623730951").unwrap())).unwrap()
}

/// Independent oracle: plain f64 bisection of x² − x − 1 on [1, 2].
fn bisect_golden_ratio() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid - mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn parse_zero() {
    for d in [Domain::rational(), golden(), quartic(), param()] {
        assert!(d.parse("0").unwrap().is_zero());
    }
}

#[test]
fn golden_ratio_identities() {
    let d = golden();
    assert_eq!(d.parse("1 + 1/phi").unwrap(), d.parse("phi").unwrap());
    assert_eq!(d.parse("phi^2").unwrap(), d.parse("phi + 1").unwrap());
    let phi = d.generator().unwrap();
    let inv = phi.inv().unwrap();
    assert_eq!(inv, d.parse("phi - 1").unwrap());
    assert!((&phi * &inv).is_one());
}

#[test]
fn quartic_field_contains_golden_ratio() {
    let d = quartic();
    assert!(d.parse("(alpha^2-2)^2 - (alpha^2-2) - 1").unwrap().is_zero());
    // α² = 2 + φ, so α is √(2+φ).
    assert_eq!(d.parse("alpha^2").unwrap(), d.parse("2 + phi").unwrap());
    assert_eq!(d.parse("1/phi").unwrap().canonical_text(), "alpha^2 - 3");
    assert_eq!(d.parse("1/phi").unwrap().pretty(), "1/phi");
    assert_eq!(d.parse("-1/phi").unwrap().pretty(), "-1/phi");
}

#[test]
fn inverses() {
    assert!(Domain::rational().one().inv().unwrap().is_one());
    let d = param();
    let a = d.generator().unwrap();
    let inv = a.inv().unwrap();
    assert_eq!(inv.canonical_text(), "1/a");
    assert_eq!(inv, d.parse("1/a").unwrap());
    assert_eq!(d.zero().inv(), Err(FieldError::DivisionByZero));
}

#[test]
fn reducible_polynomial_gives_zero_divisors() {
    // x² − 1 has rational roots; the isolating interval finder rejects an
    // embedding on top of one, but x⁴ − 2 factors over ℚ(√2) style products
    // only via a rational-coefficient factor: use (x² − 2)(x² − 3).
    let d = Domain::number_field("t", QPoly::from_i64s(&[6, 0, -5, 0, 1]), &qq(1414, 1000)).unwrap();
    let f = d.parse("t^2 - 2").unwrap();
    assert!(!f.is_zero());
    assert_eq!(f.inv(), Err(FieldError::ZeroDivisor));
}

#[test]
fn parse_errors() {
    let d = golden();
    assert!(matches!(d.parse("1 +"), Err(FieldError::Syntax { position: 3, .. })));
    assert!(matches!(d.parse("2 $ 3"), Err(FieldError::Syntax { position: 2, .. })));
    assert!(matches!(d.parse("a + 1"), Err(FieldError::UnknownSymbol { position: 0, .. })));
    assert_eq!(d.parse("1/(phi - phi)"), Err(FieldError::DivisionByZero));
    assert!(matches!(Domain::rational().parse("x"), Err(FieldError::UnknownSymbol { .. })));
    assert!(matches!(d.parse("(1 + phi"), Err(FieldError::Syntax { .. })));
    assert!(matches!(d.parse("phi phi"), Err(FieldError::Syntax { .. })));
}

#[test]
fn domain_mismatch_is_reported() {
    let x = golden().one();
    let y = param().one();
    assert_eq!(x.try_add(&y), Err(FieldError::DomainMismatch));
    assert_eq!(arith(ArithOp::Mul, &x, Some(&y)), Err(FieldError::DomainMismatch));
}

#[test]
fn arith_dispatch() {
    let d = golden();
    let phi = d.generator().unwrap();
    assert_eq!(arith(ArithOp::Inv, &phi, None).unwrap(), d.parse("phi - 1").unwrap());
    assert_eq!(arith(ArithOp::Neg, &phi, None).unwrap(), d.parse("-phi").unwrap());
    assert_eq!(arith(ArithOp::Sub, &phi, Some(&phi)).unwrap(), d.zero());
}

#[test]
fn numeric_golden_ratio_matches_bisection_oracle() {
    let oracle = bisect_golden_ratio();
    let d = golden();
    let phi = d.generator().unwrap();
    let approx = phi.eval_numeric(12, None).unwrap();
    assert_eq!(approx.to_decimal(), "1.618033988750");
    assert!((approx.to_f64() - oracle).abs() < 1e-12);
    let inv = phi.inv().unwrap().eval_numeric(12, None).unwrap();
    assert_eq!(inv.to_decimal(), "0.618033988750");
    assert!((inv.to_f64() - (oracle - 1.0)).abs() < 1e-12);
    assert_eq!(Domain::rational().parse("1/2").unwrap().eval_numeric(5, None).unwrap().to_decimal(), "0.50000");
}

#[test]
fn high_precision_evaluation() {
    let d = golden();
    let approx = d.generator().unwrap().eval_numeric(40, None).unwrap();
    assert_eq!(approx.to_decimal(), "1.6180339887498948482045868343656381177203");
}

#[test]
fn signs() {
    let d = golden();
    assert_eq!(d.zero().sign().unwrap(), Sign::Zero);
    assert_eq!(d.parse("phi - 1").unwrap().sign().unwrap(), Sign::Positive);
    assert_eq!(d.parse("1 - phi").unwrap().sign().unwrap(), Sign::Negative);
    // φ − 1.618034 < 0 because φ = 1.6180339887…
    assert_eq!(d.parse("phi - 809017/500000").unwrap().sign().unwrap(), Sign::Negative);
    let p = param();
    assert!(matches!(p.parse("a - 1").unwrap().sign(), Err(FieldError::IndeterminateSign { .. })));
    assert_eq!(p.parse("(a + 1)/(a^2 + 3)").unwrap().sign().unwrap(), Sign::Positive);
    assert_eq!(p.parse("-1/a").unwrap().sign().unwrap(), Sign::Negative);
    assert_eq!(p.parse("a - 1").unwrap().sign_at(&qq(1, 2)).unwrap(), Sign::Negative);
    assert_eq!(p.parse("a - 1").unwrap().sign_at(&qq(3, 2)).unwrap(), Sign::Positive);
}

#[test]
fn quartic_embedding_is_sqrt_two_plus_phi() {
    let d = quartic();
    let alpha = d.generator().unwrap().to_f64(None).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((alpha - (2.0 + phi).sqrt()).abs() < 1e-14);
    assert!((d.parse("phi").unwrap().to_f64(None).unwrap() - phi).abs() < 1e-14);
}

#[test]
fn invalid_domains() {
    assert!(Domain::number_field("x", QPoly::from_i64s(&[1, 2]), &qq(0, 1)).is_err());
    assert!(Domain::number_field("x", QPoly::from_i64s(&[-2, 0, 2]), &qq(1, 1)).is_err());
    // x² + 1 has no real root.
    assert!(Domain::number_field("x", QPoly::from_i64s(&[1, 0, 1]), &qq(1, 1)).is_err());
    assert!(Domain::rational_function("a", true, Some(qq(-1, 1))).is_err());
    assert!(Domain::rational_function("1a", true, None).is_err());
}

#[test]
fn specialization() {
    let d = param();
    let x = d.parse("(a^2 + 1)/(a - 2)").unwrap();
    assert_eq!(x.specialize(&qq(1, 1)).unwrap(), Domain::rational().parse("-2").unwrap());
    assert_eq!(x.specialize(&qq(2, 1)), Err(FieldError::SingularSample));
}

#[test]
fn text_forms() {
    let p = param();
    assert_eq!(p.parse("-a").unwrap().pretty(), "-a");
    assert_eq!(p.parse("1/(2*a)").unwrap().canonical_text(), "1/(2*a)");
    assert_eq!(p.parse("(a+1)/(a-1)").unwrap().canonical_text(), "(a + 1)/(a - 1)");
    assert_eq!(p.parse("-3*a^2/(a+1)").unwrap().canonical_text(), "-3*a^2/(a + 1)");
    let g = golden();
    assert_eq!(g.parse("-1/phi").unwrap().pretty(), "-1/phi");
    assert_eq!(g.parse("3/2*phi - 7").unwrap().canonical_text(), "3*phi/2 - 7");
    assert_eq!(Domain::rational().parse("-6/4").unwrap().canonical_text(), "-3/2");
}

#[test]
fn decimal_parsing() {
    assert_eq!(parse_decimal("1.25").unwrap(), qq(5, 4));
    assert_eq!(parse_decimal("-0.5").unwrap(), qq(-1, 2));
    assert_eq!(parse_decimal("2e-3").unwrap(), qq(1, 500));
    assert_eq!(parse_decimal("3/4").unwrap(), qq(3, 4));
    assert!(parse_decimal("1.2.3").is_err());
    assert!(parse_decimal("").is_err());
}

// Random canonical scalars, built from small rational coordinates.

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| qq(n, d))
}

fn scalar_in(domain: Domain) -> BoxedStrategy<Scalar> {
    match domain.kind() {
        DomainKind::Rational => small_rational().prop_map(move |q| domain.from_rational(q)).boxed(),
        DomainKind::NumberField => {
            let deg = domain.degree();
            proptest::collection::vec(small_rational(), deg)
                .prop_map(move |c| {
                    let g = domain.generator().unwrap();
                    c.into_iter().rev().fold(domain.zero(), |acc, q| &(&acc * &g) + &domain.from_rational(q))
                })
                .boxed()
        }
        DomainKind::RationalFunction => {
            (proptest::collection::vec(small_rational(), 1..4), proptest::collection::vec(small_rational(), 1..3))
                .prop_filter_map("zero denominator", move |(n, dcoef)| {
                    let a = domain.generator().unwrap();
                    let poly = |c: Vec<BigRational>| {
                        c.into_iter().rev().fold(domain.zero(), |acc, q| &(&acc * &a) + &domain.from_rational(q))
                    };
                    poly(n).try_div(&poly(dcoef)).ok()
                })
                .boxed()
        }
    }
}

fn domains() -> &'static [Domain; 4] {
    static DOMAINS: std::sync::OnceLock<[Domain; 4]> = std::sync::OnceLock::new();
    DOMAINS.get_or_init(|| [Domain::rational(), golden(), quartic(), param()])
}

fn one_per_domain() -> impl Strategy<Value = [Scalar; 4]> {
    let d = domains();
    (scalar_in(d[0].clone()), scalar_in(d[1].clone()), scalar_in(d[2].clone()), scalar_in(d[3].clone()))
        .prop_map(|(a, b, c, e)| [a, b, c, e])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn field_axioms(xs in one_per_domain(), ys in one_per_domain(), zs in one_per_domain()) {
        for ((x, y), z) in xs.iter().zip(&ys).zip(&zs) {
            prop_assert_eq!(&(x + y) + z, x + &(y + z));
            prop_assert_eq!(&(x * y) * z, x * &(y * z));
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!(x + y, y + x);
            prop_assert_eq!(x * &(y + z), &(x * y) + &(x * z));
            if !x.is_zero() {
                prop_assert!((x * &x.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn numeric_evaluation_is_multiplicative(xs in one_per_domain(), ys in one_per_domain()) {
        let ev = |v: &Scalar| v.eval_numeric(12, None).unwrap().to_f64();
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((ev(&(x * y)) - ev(x) * ev(y)).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_parse_roundtrip(xs in one_per_domain()) {
        for (x, d) in xs.iter().zip(domains()) {
            prop_assert_eq!(&d.parse(&x.canonical_text()).unwrap(), x);
            prop_assert_eq!(&d.parse(&x.pretty()).unwrap(), x);
        }
    }
}
