//! The four numeric types and their mixed-type arithmetic.
//!
//! Integers are unbounded (a machine word until it overflows), rationals are
//! kept normalised, and bounded reals are outward-rounded intervals. Mixed
//! operations coerce up the lattice Int -> Rat -> Breal and Int -> Float ->
//! Breal; a rational meeting a float gives a float.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::interval::{Interval, IntervalError};
use crate::Breal;

#[derive(Clone, Debug)]
pub enum Number {
    Int(BigInt),
    Rat(BigRational),
    Float(f64),
    Breal(Breal),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NumError {
    #[error("division by zero")]
    ZeroDivision,
    #[error("expected {0}")]
    Type(&'static str),
    #[error("comparison of overlapping bounded reals is undecidable")]
    Uncertain,
    #[error("undefined arithmetic result: {0}")]
    Undefined(&'static str),
}

pub type NumResult<T> = Result<T, NumError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumRel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

/// Builds a normalised rational; `den` must be non-zero.
pub fn mk_rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> NumResult<BigRational> {
    let den = den.into();
    if den.is_zero() {
        return Err(NumError::ZeroDivision);
    }
    Ok(BigRational::new(num.into(), den))
}

/// Exact value of a finite float.
pub fn float_to_rational(f: f64) -> Option<BigRational> {
    BigRational::from_float(f)
}

/// Tightest interval of doubles containing the rational `r`.
pub fn rational_to_interval(r: &BigRational) -> Breal {
    let approx = rational_to_f64(r);
    if approx.is_infinite() {
        return if approx > 0.0 {
            Interval::new(f64::MAX, f64::INFINITY).unwrap()
        } else {
            Interval::new(f64::NEG_INFINITY, f64::MIN).unwrap()
        };
    }
    let exact = float_to_rational(approx).expect("finite");
    match exact.cmp(r) {
        Ordering::Equal => Interval::point(approx),
        Ordering::Less => Interval::new(approx, approx.next_up()).unwrap(),
        Ordering::Greater => Interval::new(approx.next_down(), approx).unwrap(),
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }
    })
}

/// Largest double `<= r`.
pub fn rational_floor_f64(r: &BigRational) -> f64 {
    rational_to_interval(r).lo()
}

/// Smallest double `>= r`.
pub fn rational_ceil_f64(r: &BigRational) -> f64 {
    rational_to_interval(r).hi()
}

fn int_to_rat(i: &BigInt) -> BigRational {
    BigRational::from_integer(i.clone())
}

impl Number {
    pub fn int(i: i64) -> Number {
        Number::Int(BigInt::from(i))
    }

    /// Rank used to break ties in the standard order and to pick the
    /// coercion target.
    pub fn type_rank(&self) -> u8 {
        match self {
            Number::Int(_) => 0,
            Number::Rat(_) => 1,
            Number::Float(_) => 2,
            Number::Breal(_) => 3,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Number::Int(_) => "integer",
            Number::Rat(_) => "rational",
            Number::Float(_) => "float",
            Number::Breal(_) => "breal",
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Number::Int(_))
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Number::Int(i) => i.to_i64(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Int(i) => i.to_f64().unwrap_or(if i.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }),
            Number::Rat(r) => rational_to_f64(r),
            Number::Float(f) => *f,
            Number::Breal(b) => (b.lo() + b.hi()) / 2.0,
        }
    }

    /// Exact rational value, when there is one.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Number::Int(i) => Some(int_to_rat(i)),
            Number::Rat(r) => Some(r.clone()),
            Number::Float(f) => float_to_rational(*f),
            Number::Breal(_) => None,
        }
    }

    pub fn to_interval(&self) -> Breal {
        match self {
            Number::Int(i) => rational_to_interval(&int_to_rat(i)),
            Number::Rat(r) => rational_to_interval(r),
            Number::Float(f) => Interval::point(*f),
            Number::Breal(b) => *b,
        }
    }

    fn to_float(&self) -> f64 {
        self.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Int(i) => i.is_zero(),
            Number::Rat(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
            Number::Breal(b) => b.lo() == 0.0 && b.hi() == 0.0,
        }
    }

    /// Identical type and value: the test unification uses.
    pub fn same(&self, other: &Number) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (Number::Rat(a), Number::Rat(b)) => a == b,
            (Number::Float(a), Number::Float(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Number::Breal(a), Number::Breal(b)) => a == b,
            _ => false,
        }
    }
}

enum Coerced {
    Int(BigInt, BigInt),
    Rat(BigRational, BigRational),
    Float(f64, f64),
    Breal(Breal, Breal),
}

fn coerce(a: &Number, b: &Number) -> Coerced {
    use Number::*;
    match (a, b) {
        (Int(x), Int(y)) => Coerced::Int(x.clone(), y.clone()),
        (Breal(_), _) | (_, Breal(_)) => Coerced::Breal(a.to_interval(), b.to_interval()),
        (Float(_), _) | (_, Float(_)) => Coerced::Float(a.to_float(), b.to_float()),
        _ => Coerced::Rat(a.to_rational().unwrap(), b.to_rational().unwrap()),
    }
}

fn breal_err(e: IntervalError) -> NumError {
    match e {
        IntervalError::ZeroDivisor => NumError::ZeroDivision,
        IntervalError::Malformed => NumError::Undefined("malformed interval"),
    }
}

impl Number {
    pub fn neg(&self) -> Number {
        match self {
            Number::Int(i) => Number::Int(-i),
            Number::Rat(r) => Number::Rat(-r),
            Number::Float(f) => Number::Float(-f),
            Number::Breal(b) => Number::Breal(b.neg()),
        }
    }

    pub fn abs(&self) -> Number {
        match self {
            Number::Int(i) => Number::Int(i.abs()),
            Number::Rat(r) => Number::Rat(r.abs()),
            Number::Float(f) => Number::Float(f.abs()),
            Number::Breal(b) => Number::Breal(b.abs()),
        }
    }

    pub fn sign(&self) -> Number {
        match self {
            Number::Int(i) => Number::Int(i.signum()),
            Number::Rat(r) => Number::Rat(r.signum()),
            Number::Float(f) => Number::Float(if *f == 0.0 { 0.0 } else { f.signum() }),
            Number::Breal(b) => {
                let s = |x: f64| if x == 0.0 { 0.0 } else { x.signum() };
                Number::Breal(Interval::new(s(b.lo()), s(b.hi())).unwrap())
            }
        }
    }

    pub fn add(&self, other: &Number) -> NumResult<Number> {
        Ok(match coerce(self, other) {
            Coerced::Int(a, b) => Number::Int(a + b),
            Coerced::Rat(a, b) => Number::Rat(a + b),
            Coerced::Float(a, b) => Number::Float(a + b),
            Coerced::Breal(a, b) => Number::Breal(a.add(&b)),
        })
    }

    pub fn sub(&self, other: &Number) -> NumResult<Number> {
        Ok(match coerce(self, other) {
            Coerced::Int(a, b) => Number::Int(a - b),
            Coerced::Rat(a, b) => Number::Rat(a - b),
            Coerced::Float(a, b) => Number::Float(a - b),
            Coerced::Breal(a, b) => Number::Breal(a.sub(&b)),
        })
    }

    pub fn mul(&self, other: &Number) -> NumResult<Number> {
        Ok(match coerce(self, other) {
            Coerced::Int(a, b) => Number::Int(a * b),
            Coerced::Rat(a, b) => Number::Rat(a * b),
            Coerced::Float(a, b) => Number::Float(a * b),
            Coerced::Breal(a, b) => Number::Breal(a.mul(&b)),
        })
    }

    /// `/`: exact on integers and rationals (an inexact integer quotient is
    /// a rational).
    pub fn div(&self, other: &Number) -> NumResult<Number> {
        match coerce(self, other) {
            Coerced::Int(a, b) => {
                if b.is_zero() {
                    return Err(NumError::ZeroDivision);
                }
                let (q, r) = a.div_rem(&b);
                if r.is_zero() {
                    Ok(Number::Int(q))
                } else {
                    Ok(Number::Rat(BigRational::new(a, b)))
                }
            }
            Coerced::Rat(a, b) => {
                if b.is_zero() {
                    return Err(NumError::ZeroDivision);
                }
                Ok(Number::Rat(a / b))
            }
            Coerced::Float(a, b) => {
                if b == 0.0 {
                    return Err(NumError::ZeroDivision);
                }
                Ok(Number::Float(a / b))
            }
            Coerced::Breal(a, b) => a.div(&b).map(Number::Breal).map_err(breal_err),
        }
    }

    fn int_pair<'a>(&'a self, other: &'a Number) -> NumResult<(&'a BigInt, &'a BigInt)> {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => Ok((a, b)),
            _ => Err(NumError::Type("integer")),
        }
    }

    /// `//`: truncating integer division.
    pub fn int_div(&self, other: &Number) -> NumResult<Number> {
        let (a, b) = self.int_pair(other)?;
        if b.is_zero() {
            return Err(NumError::ZeroDivision);
        }
        Ok(Number::Int(a / b))
    }

    pub fn rem(&self, other: &Number) -> NumResult<Number> {
        let (a, b) = self.int_pair(other)?;
        if b.is_zero() {
            return Err(NumError::ZeroDivision);
        }
        Ok(Number::Int(a % b))
    }

    pub fn modulo(&self, other: &Number) -> NumResult<Number> {
        let (a, b) = self.int_pair(other)?;
        if b.is_zero() {
            return Err(NumError::ZeroDivision);
        }
        Ok(Number::Int(a.mod_floor(b)))
    }

    pub fn min(&self, other: &Number) -> NumResult<Number> {
        if let Coerced::Breal(a, b) = coerce(self, other) {
            return Ok(Number::Breal(a.min(&b)));
        }
        Ok(if compare(self, other)? == Ordering::Greater { other.clone() } else { self.clone() })
    }

    pub fn max(&self, other: &Number) -> NumResult<Number> {
        if let Coerced::Breal(a, b) = coerce(self, other) {
            return Ok(Number::Breal(a.max(&b)));
        }
        Ok(if compare(self, other)? == Ordering::Less { other.clone() } else { self.clone() })
    }

    pub fn pow(&self, exp: &Number) -> NumResult<Number> {
        match (self, exp) {
            (Number::Float(_), _) | (_, Number::Float(_)) => {
                Ok(Number::Float(self.to_float().powf(exp.to_float())))
            }
            (Number::Int(base), Number::Int(e)) => {
                let mag = e.abs().to_u32().ok_or(NumError::Undefined("exponent too large"))?;
                let p = num_traits::pow(base.clone(), mag as usize);
                if e.is_negative() {
                    if p.is_zero() {
                        return Err(NumError::ZeroDivision);
                    }
                    Number::Int(BigInt::one()).div(&Number::Int(p))
                } else {
                    Ok(Number::Int(p))
                }
            }
            (Number::Rat(base), Number::Int(e)) => {
                let mag = e.abs().to_u32().ok_or(NumError::Undefined("exponent too large"))?;
                let p = num_traits::pow(base.clone(), mag as usize);
                if e.is_negative() {
                    if p.is_zero() {
                        return Err(NumError::ZeroDivision);
                    }
                    Ok(Number::Rat(p.recip()))
                } else {
                    Ok(Number::Rat(p))
                }
            }
            (Number::Breal(b), Number::Int(e)) => {
                let n = e.to_u32().ok_or(NumError::Type("non-negative integer exponent"))?;
                Ok(Number::Breal(b.powi(n)))
            }
            _ => Err(NumError::Type("integer exponent")),
        }
    }

    pub fn to_float_number(&self) -> Number {
        Number::Float(self.to_float())
    }

    pub fn to_breal(&self) -> Number {
        Number::Breal(self.to_interval())
    }

    pub fn to_rat_number(&self) -> NumResult<Number> {
        match self {
            Number::Breal(_) => Err(NumError::Type("exact number")),
            n => n
                .to_rational()
                .map(Number::Rat)
                .ok_or(NumError::Undefined("non-finite float")),
        }
    }

    /// Rounds with `f` (floor/ceil/trunc/round) to an integer.
    pub fn to_integer_with(&self, f: fn(&BigRational) -> BigRational) -> NumResult<Number> {
        match self {
            Number::Int(_) => Ok(self.clone()),
            Number::Breal(_) => Err(NumError::Type("exact number or float")),
            n => {
                let r = n.to_rational().ok_or(NumError::Undefined("non-finite float"))?;
                Ok(Number::Int(f(&r).to_integer()))
            }
        }
    }
}

/// Exact numeric ordering across types. Bounded reals order only when the
/// intervals decide it.
pub fn compare(a: &Number, b: &Number) -> NumResult<Ordering> {
    match coerce(a, b) {
        Coerced::Int(x, y) => Ok(x.cmp(&y)),
        Coerced::Rat(x, y) => Ok(x.cmp(&y)),
        // mixed rational/float comparisons must not round
        Coerced::Float(x, y) => match (a.to_rational(), b.to_rational()) {
            (Some(ra), Some(rb)) => Ok(ra.cmp(&rb)),
            _ => x.partial_cmp(&y).ok_or(NumError::Undefined("nan")),
        },
        Coerced::Breal(x, y) => {
            if x.hi() < y.lo() {
                Ok(Ordering::Less)
            } else if x.lo() > y.hi() {
                Ok(Ordering::Greater)
            } else if x.is_point() && y.is_point() && x.lo() == y.lo() {
                Ok(Ordering::Equal)
            } else {
                Err(NumError::Uncertain)
            }
        }
    }
}

/// Evaluates an arithmetic comparison. Overlapping bounded reals give
/// [`NumError::Uncertain`] unless the relation holds or fails for every
/// pair of points.
pub fn compare_rel(rel: NumRel, a: &Number, b: &Number) -> NumResult<bool> {
    if let Coerced::Breal(x, y) = coerce(a, b) {
        let decided = match rel {
            NumRel::Lt => decide(x.hi() < y.lo(), x.lo() >= y.hi()),
            NumRel::Le => decide(x.hi() <= y.lo(), x.lo() > y.hi()),
            NumRel::Gt => decide(x.lo() > y.hi(), x.hi() <= y.lo()),
            NumRel::Ge => decide(x.lo() >= y.hi(), x.hi() < y.lo()),
            NumRel::Eq | NumRel::Ne => {
                let eq = decide(
                    x.is_point() && y.is_point() && x.lo() == y.lo(),
                    !x.overlaps(&y),
                );
                if rel == NumRel::Ne { eq.map(|v| !v) } else { eq }
            }
        };
        return decided.ok_or(NumError::Uncertain);
    }
    let ord = compare(a, b)?;
    Ok(match rel {
        NumRel::Lt => ord == Ordering::Less,
        NumRel::Le => ord != Ordering::Greater,
        NumRel::Gt => ord == Ordering::Greater,
        NumRel::Ge => ord != Ordering::Less,
        NumRel::Eq => ord == Ordering::Equal,
        NumRel::Ne => ord != Ordering::Equal,
    })
}

fn decide(yes: bool, no: bool) -> Option<bool> {
    if yes {
        Some(true)
    } else if no {
        Some(false)
    } else {
        None
    }
}

/// Exact value of a decimal literal such as `0.99`, `1.5e-3` or `inf`.
pub fn decimal_to_rational(text: &str) -> Option<BigRational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits: BigInt = format!("{}{}", int_part, frac).parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if neg { -r } else { r })
}

/// Text for a breal bound that reads back as exactly `x` under the outward
/// rounding applied to bounded-real literals.
pub fn format_breal_bound(x: f64, upper: bool) -> String {
    let plain = format_float(x);
    if !x.is_finite() || x == 0.0 {
        return plain;
    }
    let reads_back = |s: &str| {
        decimal_to_rational(s).is_some_and(|r| {
            let back = if upper { rational_ceil_f64(&r) } else { rational_floor_f64(&r) };
            back == x
        })
    };
    if reads_back(&plain) {
        return plain;
    }
    // the shortest form lies on the wrong side: cut the exact value
    // towards the inside at growing precision
    if (1e-5..1e16).contains(&x.abs()) {
        if let Some(exact) = float_to_rational(x) {
            for digits in 1..40u32 {
                let scale = BigRational::from_integer(BigInt::from(10).pow(digits));
                let scaled = &exact * &scale;
                let cut = if upper { scaled.floor() } else { scaled.ceil() };
                let text = decimal_text(cut.to_integer(), digits as usize);
                if reads_back(&text) {
                    return text;
                }
            }
        }
    }
    (17..800)
        .map(|prec| format!("{:.*e}", prec, x))
        .find(|s| reads_back(s))
        .unwrap_or(plain)
}

// `n / 10^digits` in positional notation, trailing zeros trimmed.
fn decimal_text(n: BigInt, digits: usize) -> String {
    let neg = n.is_negative();
    let mut d = n.abs().to_string();
    if d.len() <= digits {
        d = "0".repeat(digits + 1 - d.len()) + &d;
    }
    let (int, frac) = d.split_at(d.len() - digits);
    let frac = frac.trim_end_matches('0');
    let frac = if frac.is_empty() { "0" } else { frac };
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// Formats a double the way the reader accepts it back.
pub fn format_float(f: f64) -> String {
    if f.is_infinite() {
        return if f > 0.0 { "1.0Inf".into() } else { "-1.0Inf".into() };
    }
    if f.is_nan() {
        return "1.0NaN".into();
    }
    let s = format!("{:?}", f);
    if let Some(pos) = s.find('e') {
        let (mant, exp) = s.split_at(pos);
        if mant.contains('.') {
            s
        } else {
            format!("{}.0{}", mant, exp)
        }
    } else if s.contains('.') {
        s
    } else {
        format!("{}.0", s)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{}", i),
            Number::Rat(r) => write!(f, "{}_{}", r.numer(), r.denom()),
            Number::Float(x) => f.write_str(&format_float(*x)),
            Number::Breal(b) => write!(f, "{}__{}", format_breal_bound(b.lo(), false), format_breal_bound(b.hi(), true)),
        }
    }
}
