//! Arithmetic evaluation over the numeric tower, array subscripts and
//! `dim/2`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::atom::Atom;
use crate::number::{compare_rel, NumError, NumRel, Number};
use crate::store::Store;
use crate::term::{Term, TermError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("instantiation error in arithmetic")]
    Instantiation,
    #[error("type error: {0} is not an evaluable")]
    NotEvaluable(String),
    #[error("{0}")]
    Num(#[from] NumError),
    #[error("range error: index {index} outside 1..{arity}")]
    Range { index: i64, arity: usize },
    #[error("type error: {0}")]
    Type(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl From<TermError> for ArithError {
    fn from(e: TermError) -> Self {
        match e {
            TermError::Range { index, arity } => ArithError::Range { index, arity },
            other => ArithError::Type(other.to_string()),
        }
    }
}

pub type ArithResult<T> = Result<T, ArithError>;

fn rat_floor(r: &BigRational) -> BigRational {
    r.floor()
}

fn rat_ceil(r: &BigRational) -> BigRational {
    r.ceil()
}

fn rat_round(r: &BigRational) -> BigRational {
    r.round()
}

fn rat_trunc(r: &BigRational) -> BigRational {
    r.trunc()
}

/// Evaluates an arithmetic expression.
pub fn eval(store: &Store, t: &Term) -> ArithResult<Number> {
    let t = store.deref(t);
    if let Some(n) = t.to_number() {
        return Ok(n);
    }
    match &t {
        Term::Var(_) => return Err(ArithError::Instantiation),
        Term::Atom(a) => {
            return match a.name() {
                "pi" => Ok(Number::Float(std::f64::consts::PI)),
                "e" => Ok(Number::Float(std::f64::consts::E)),
                "inf" | "infinity" => Ok(Number::Float(f64::INFINITY)),
                "max_tagged" => Ok(Number::int(i64::MAX)),
                _ => Err(ArithError::NotEvaluable(format!("{}/0", a))),
            }
        }
        Term::Struct(_) => {}
        other => return Err(ArithError::NotEvaluable(format!("{}", other))),
    }
    let (name, arity) = t.functor().unwrap();
    let arg = |i: i64| -> ArithResult<Number> { eval(store, &t.arg_at(i)?) };
    Ok(match (name.name(), arity) {
        ("+", 2) => arg(1)?.add(&arg(2)?)?,
        ("-", 2) => arg(1)?.sub(&arg(2)?)?,
        ("*", 2) => arg(1)?.mul(&arg(2)?)?,
        ("/", 2) => arg(1)?.div(&arg(2)?)?,
        ("//", 2) => arg(1)?.int_div(&arg(2)?)?,
        ("rem", 2) => arg(1)?.rem(&arg(2)?)?,
        ("mod", 2) => arg(1)?.modulo(&arg(2)?)?,
        ("min", 2) => arg(1)?.min(&arg(2)?)?,
        ("max", 2) => arg(1)?.max(&arg(2)?)?,
        ("^", 2) | ("**", 2) => arg(1)?.pow(&arg(2)?)?,
        ("-", 1) => arg(1)?.neg(),
        ("+", 1) => arg(1)?,
        ("abs", 1) => arg(1)?.abs(),
        ("sign", 1) => arg(1)?.sign(),
        ("float", 1) => arg(1)?.to_float_number(),
        ("breal", 1) => arg(1)?.to_breal(),
        ("rational", 1) | ("rationalize", 1) => arg(1)?.to_rat_number()?,
        ("floor", 1) => arg(1)?.to_integer_with(rat_floor)?,
        ("ceiling", 1) => arg(1)?.to_integer_with(rat_ceil)?,
        ("round", 1) => arg(1)?.to_integer_with(rat_round)?,
        ("truncate", 1) | ("integer", 1) => arg(1)?.to_integer_with(rat_trunc)?,
        ("sqrt", 1) => float_fn(arg(1)?, f64::sqrt)?,
        ("exp", 1) => float_fn(arg(1)?, f64::exp)?,
        ("log", 1) => float_fn(arg(1)?, f64::ln)?,
        ("sin", 1) => float_fn(arg(1)?, f64::sin)?,
        ("cos", 1) => float_fn(arg(1)?, f64::cos)?,
        ("eval", 1) => arg(1)?,
        ("subscript", 2) => {
            let e = subscript(store, &t.arg_at(1)?, &t.arg_at(2)?)?;
            eval(store, &e)?
        }
        ("sum", 1) => {
            let items = store.list_items(&t.arg_at(1)?).ok_or_else(|| ArithError::Type("list expected in sum/1".into()))?;
            let mut acc = Number::int(0);
            for i in items {
                acc = acc.add(&eval(store, &i)?)?;
            }
            acc
        }
        _ => return Err(ArithError::NotEvaluable(format!("{}/{}", name, arity))),
    })
}

fn float_fn(n: Number, f: fn(f64) -> f64) -> ArithResult<Number> {
    if let Number::Breal(_) = n {
        return Err(ArithError::Type("only +, -, *, /, min, max, abs and integer powers are defined on bounded reals".into()));
    }
    let r = f(n.to_f64());
    if r.is_nan() {
        return Err(ArithError::Num(NumError::Undefined("result is not a number")));
    }
    Ok(Number::Float(r))
}

/// `X =:= Y` and friends.
pub fn compare(store: &Store, rel: NumRel, a: &Term, b: &Term) -> ArithResult<bool> {
    Ok(compare_rel(rel, &eval(store, a)?, &eval(store, b)?)?)
}

fn index_value(store: &Store, t: &Term) -> ArithResult<i64> {
    match eval(store, t)? {
        Number::Int(i) => i64::try_from(&i).map_err(|_| ArithError::Type("index too large".into())),
        other => Err(ArithError::Type(format!("integer index expected, found {}", other))),
    }
}

/// Element of a (possibly nested) array at an index list, e.g.
/// `subscript([]([](a,b),[](c,d)), [2,1])` is `c`.
pub fn subscript(store: &Store, array: &Term, indices: &Term) -> ArithResult<Term> {
    let idx = store.list_items(indices).ok_or(ArithError::Instantiation)?;
    let mut cur = store.deref(array);
    for i in idx {
        let i = index_value(store, &i)?;
        cur = match &cur {
            Term::Var(_) => return Err(ArithError::Instantiation),
            Term::Struct(_) => store.deref(&cur.arg_at(i)?),
            other => return Err(ArithError::Type(format!("array expected, found {}", other))),
        };
    }
    Ok(cur)
}

/// Creates a nested `[]/N` array of fresh variables.
pub fn dim_create(store: &mut Store, dims: &[usize]) -> Term {
    match dims.split_first() {
        None => store.new_var(),
        Some((&n, rest)) => {
            let items = (0..n).map(|_| dim_create(store, rest)).collect();
            Term::compound(Atom::NIL, items)
        }
    }
}

/// Dimensions of a regular array, following first elements.
pub fn dim_inspect(store: &Store, t: &Term) -> Option<Vec<usize>> {
    let mut dims = Vec::new();
    let mut cur = store.deref(t);
    while let Term::Struct(c) = &cur {
        if c.name() != Atom::NIL {
            break;
        }
        dims.push(c.arity());
        cur = store.deref(&c.arg(0));
    }
    (!dims.is_empty()).then_some(dims)
}

/// Dimension list from a term, checking positivity.
pub fn dims_of(store: &Store, t: &Term) -> ArithResult<Vec<usize>> {
    let items = store.list_items(t).ok_or(ArithError::Instantiation)?;
    if items.is_empty() {
        return Err(ArithError::Domain("empty dimension list".into()));
    }
    items
        .iter()
        .map(|i| {
            let n = index_value(store, i)?;
            if n < 1 {
                Err(ArithError::Domain(format!("dimension {} is not positive", n)))
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

/// Integer value of a term that must already be an integer.
pub fn int_of(store: &Store, t: &Term) -> ArithResult<BigInt> {
    match store.deref(t) {
        Term::Var(_) => Err(ArithError::Instantiation),
        other => match other.to_number() {
            Some(Number::Int(i)) => Ok(i),
            _ => Err(ArithError::Type(format!("integer expected, found {}", other))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::{read_term, OpTable};

    fn ev(s: &str) -> ArithResult<Number> {
        let store = Store::new();
        eval(&store, &read_term(s, &OpTable::default()).unwrap().term)
    }

    #[test]
    fn basics() {
        assert_eq!(ev("1+2*3").unwrap().to_string(), "7");
        assert_eq!(ev("3+1_2").unwrap().to_string(), "7_2");
        assert_eq!(ev("7/2").unwrap().to_string(), "7_2");
        assert_eq!(ev("6/2").unwrap().to_string(), "3");
        assert_eq!(ev("-7//2").unwrap().to_string(), "-3");
        assert!(matches!(ev("foo+1"), Err(ArithError::NotEvaluable(_))));
        let mut s = Store::new();
        let t = read_term("X+1", &OpTable::default()).unwrap().term;
        let t = s.instantiate(&t, &mut Vec::new());
        assert!(matches!(eval(&s, &t), Err(ArithError::Instantiation)));
    }

    #[test]
    fn breal_sum_contains_exact() {
        let Number::Breal(b) = ev("0.99__1.01 + 1").unwrap() else { panic!() };
        assert!(b.lo() <= 1.99 && b.hi() >= 2.01);
    }

    #[test]
    fn uncertain_comparison() {
        let s = Store::new();
        let p = |x: &str| read_term(x, &OpTable::default()).unwrap().term;
        assert_eq!(compare(&s, NumRel::Lt, &p("1.0__2.0"), &p("3.0")), Ok(true));
        assert_eq!(compare(&s, NumRel::Lt, &p("1.0__2.0"), &p("1.5")), Err(ArithError::Num(NumError::Uncertain)));
        assert_eq!(compare(&s, NumRel::Eq, &p("3"), &p("3.0")), Ok(true));
    }

    #[test]
    fn subscripts_and_dims() {
        let mut s = Store::new();
        let p = |x: &str| read_term(x, &OpTable::default()).unwrap().term;
        assert_eq!(subscript(&s, &p("[](a,b,c)"), &p("[2]")).unwrap(), Term::atom("b"));
        assert_eq!(subscript(&s, &p("[]([](a,b),[](c,d))"), &p("[2,1]")).unwrap(), Term::atom("c"));
        assert!(matches!(subscript(&s, &p("[](a)"), &p("[2]")), Err(ArithError::Range { index: 2, arity: 1 })));
        let m = dim_create(&mut s, &[2, 3]);
        assert_eq!(dim_inspect(&s, &m), Some(vec![2, 3]));
        assert!(matches!(dims_of(&s, &p("[0]")), Err(ArithError::Domain(_))));
    }
}
