//! Linear constraints: normalization to `Σ cᵢ·xᵢ + k REL 0` and bounds
//! propagation over exact rationals.
//!
//! The internal goal form is `ic_lin_con(Op, K, [C1*X1, ...])` where `Op`
//! is `#=<`, `#=`, `#\=` (integral) or `$=<`, `$=`, `$\=` (real).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{bounds, exclude, impose_integrality, impose_max, impose_min, IcError};
use crate::atom::Atom;
use crate::number::{float_to_rational, rational_ceil_f64, rational_floor_f64, Number};
use crate::store::Store;
use crate::susp::Cond;
use crate::term::{SuspId, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinCon {
    pub rel: Rel,
    pub integral: bool,
    pub konst: BigRational,
    /// Coefficient and variable; no zero coefficients, no repeated variable.
    pub terms: Vec<(BigRational, Term)>,
}

/// What normalization needs from its surroundings.
pub trait LinEnv {
    fn deref(&self, t: &Term) -> Term;
    /// Element of an array for `subscript(Array, Index)`; `Ok(None)` when
    /// it cannot be determined yet.
    fn subscript(&self, _array: &Term, _index: &Term) -> Result<Option<Term>, IcError> {
        Ok(None)
    }
}

/// Terms read from source: no bindings, no arrays.
pub struct Static;

impl LinEnv for Static {
    fn deref(&self, t: &Term) -> Term {
        t.clone()
    }
}

impl LinEnv for Store {
    fn deref(&self, t: &Term) -> Term {
        Store::deref(self, t)
    }

    fn subscript(&self, array: &Term, index: &Term) -> Result<Option<Term>, IcError> {
        match crate::arith::subscript(self, array, index) {
            Ok(t) => Ok(Some(t)),
            Err(crate::arith::ArithError::Instantiation) => Err(IcError::Instantiation),
            Err(e) => Err(IcError::Type(e.to_string())),
        }
    }
}

/// Constraint operators and how they normalize: (relation, integral,
/// flip sides, strict).
pub fn constraint_op(name: &str) -> Option<(Rel, bool, bool, bool)> {
    let (integral, rest) = match name.as_bytes().first()? {
        b'#' => (true, &name[1..]),
        b'$' => (false, &name[1..]),
        _ => return None,
    };
    Some(match rest {
        "=" => (Rel::Eq, integral, false, false),
        "\\=" => (Rel::Ne, integral, false, false),
        "=<" => (Rel::Le, integral, false, false),
        "<" => (Rel::Le, integral, false, true),
        ">=" => (Rel::Le, integral, true, false),
        ">" => (Rel::Le, integral, true, true),
        _ => return None,
    })
}

fn exact(n: &Number) -> Result<BigRational, IcError> {
    match n {
        Number::Breal(_) => Err(IcError::Unsupported("bounded real in linear constraint".into())),
        other => other.to_rational().ok_or_else(|| IcError::Type(format!("finite number expected, found {}", other))),
    }
}

struct Acc {
    konst: BigRational,
    terms: Vec<(BigRational, Term)>,
}

impl Acc {
    fn add_var(&mut self, c: BigRational, v: Term) {
        match self.terms.iter_mut().find(|(_, x)| x.as_var() == v.as_var()) {
            Some(slot) => slot.0 += c,
            None => self.terms.push((c, v)),
        }
    }

    fn is_const(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_zero())
    }
}

fn lin(env: &dyn LinEnv, t: &Term, mult: &BigRational, acc: &mut Acc) -> Result<(), IcError> {
    let t = env.deref(t);
    if let Some(n) = t.to_number() {
        acc.konst += mult * exact(&n)?;
        return Ok(());
    }
    if t.is_var() {
        acc.add_var(mult.clone(), t);
        return Ok(());
    }
    let nonlinear = || IcError::Unsupported(format!("nonlinear or non-arithmetic term {}", t));
    let Some((name, arity)) = t.functor() else { return Err(nonlinear()) };
    let a = |i| t.arg_at(i).unwrap();
    match (name.name(), arity) {
        ("+", 2) => {
            lin(env, &a(1), mult, acc)?;
            lin(env, &a(2), mult, acc)
        }
        ("-", 2) => {
            lin(env, &a(1), mult, acc)?;
            lin(env, &a(2), &-mult, acc)
        }
        ("-", 1) => lin(env, &a(1), &-mult, acc),
        ("+", 1) => lin(env, &a(1), mult, acc),
        ("*", 2) => {
            let (mut l, mut r) = (Acc { konst: Zero::zero(), terms: vec![] }, Acc { konst: Zero::zero(), terms: vec![] });
            lin(env, &a(1), &One::one(), &mut l)?;
            lin(env, &a(2), &One::one(), &mut r)?;
            let (k, other) = match (l.is_const(), r.is_const()) {
                (true, _) => (l.konst, r),
                (_, true) => (r.konst, l),
                _ => return Err(nonlinear()),
            };
            let m = mult * k;
            acc.konst += &m * other.konst;
            for (c, v) in other.terms {
                acc.add_var(&m * c, v);
            }
            Ok(())
        }
        ("/", 2) => {
            let mut r = Acc { konst: Zero::zero(), terms: vec![] };
            lin(env, &a(2), &One::one(), &mut r)?;
            if !r.is_const() {
                return Err(nonlinear());
            }
            if r.konst.is_zero() {
                return Err(IcError::Type("division by zero in constraint".into()));
            }
            lin(env, &a(1), &(mult / r.konst), acc)
        }
        ("sum", 1) => {
            let mut cur = env.deref(&a(1));
            loop {
                if cur.as_atom() == Some(Atom::NIL) {
                    return Ok(());
                }
                if !cur.is_functor(Atom::DOT, 2) {
                    return Err(IcError::Type(format!("list expected in sum/1, found {}", cur)));
                }
                lin(env, &cur.arg_at(1).unwrap(), mult, acc)?;
                cur = env.deref(&cur.arg_at(2).unwrap());
            }
        }
        ("subscript", 2) => match env.subscript(&a(1), &a(2))? {
            Some(e) => lin(env, &e, mult, acc),
            None => Err(IcError::Unsupported("subscript of an unknown array".into())),
        },
        ("eval", 1) => lin(env, &a(1), mult, acc),
        _ => Err(nonlinear()),
    }
}

/// Normalizes `lhs OP rhs`. Integral constraints are scaled to integer
/// coefficients so that strict inequalities can add one.
pub fn normalize(env: &dyn LinEnv, op: &str, lhs: &Term, rhs: &Term) -> Result<LinCon, IcError> {
    let (rel, integral, flip, strict) =
        constraint_op(op).ok_or_else(|| IcError::Type(format!("unknown constraint {}", op)))?;
    let mut acc = Acc { konst: Zero::zero(), terms: vec![] };
    let one: BigRational = One::one();
    lin(env, lhs, &one, &mut acc)?;
    lin(env, rhs, &-one, &mut acc)?;
    let mut con = LinCon {
        rel,
        integral,
        konst: acc.konst,
        terms: acc.terms.into_iter().filter(|(c, _)| !c.is_zero()).collect(),
    };
    if flip {
        con.konst = -con.konst;
        for (c, _) in &mut con.terms {
            *c = -c.clone();
        }
    }
    if integral {
        let l = con
            .terms
            .iter()
            .map(|(c, _)| c.denom().clone())
            .fold(con.konst.denom().clone(), |a, d| num_integer::Integer::lcm(&a, &d));
        let l = BigRational::from_integer(l);
        con.konst *= &l;
        for (c, _) in &mut con.terms {
            *c *= &l;
        }
    }
    if strict && integral {
        con.konst += BigRational::one();
    }
    Ok(con)
}

fn number_term(r: &BigRational) -> Term {
    if r.is_integer() {
        Term::from_bigint(r.to_integer())
    } else {
        Term::Rat(std::rc::Rc::new(r.clone()))
    }
}

fn op_name(rel: Rel, integral: bool) -> String {
    let p = if integral { '#' } else { '$' };
    match rel {
        Rel::Le => format!("{}=<", p),
        Rel::Eq => format!("{}=", p),
        Rel::Ne => format!("{}\\=", p),
    }
}

impl LinCon {
    /// `ic_lin_con(Op, K, [C*X, ...])`
    pub fn to_term(&self) -> Term {
        let terms = self
            .terms
            .iter()
            .map(|(c, x)| Term::compound(Atom::STAR, vec![number_term(c), x.clone()]));
        Term::app(
            "ic_lin_con",
            vec![Term::atom(&op_name(self.rel, self.integral)), number_term(&self.konst), Term::list(terms.collect::<Vec<_>>())],
        )
    }

    /// Reads back an `ic_lin_con/3` goal; variables that have meanwhile
    /// been bound are folded in (expressions are renormalized).
    pub fn from_term(env: &dyn LinEnv, t: &Term) -> Result<LinCon, IcError> {
        let bad = || IcError::Type(format!("malformed linear constraint {}", t));
        let op = env.deref(&t.arg_at(1).map_err(|_| bad())?);
        let op = op.as_atom().ok_or_else(bad)?;
        let (rel, integral, _, _) = constraint_op(op.name()).ok_or_else(bad)?;
        let k = env.deref(&t.arg_at(2).map_err(|_| bad())?).to_number().ok_or_else(bad)?;
        let mut acc = Acc { konst: exact(&k)?, terms: vec![] };
        let mut cur = env.deref(&t.arg_at(3).map_err(|_| bad())?);
        while cur.is_functor(Atom::DOT, 2) {
            let item = env.deref(&cur.arg_at(1).unwrap());
            if !item.is_functor(Atom::STAR, 2) {
                return Err(bad());
            }
            let c = env.deref(&item.arg_at(1).unwrap()).to_number().ok_or_else(bad)?;
            lin(env, &item.arg_at(2).unwrap(), &exact(&c)?, &mut acc)?;
            cur = env.deref(&cur.arg_at(2).unwrap());
        }
        Ok(LinCon { rel, integral, konst: acc.konst, terms: acc.terms.into_iter().filter(|(c, _)| !c.is_zero()).collect() })
    }

    /// Readable form used when printing delayed goals:
    /// `4*X - 5*Y #=< 2`.
    pub fn readable(&self) -> Term {
        let mut sum: Option<Term> = None;
        for (c, x) in &self.terms {
            // later negative terms are subtracted
            let (neg, mag) = match &sum {
                Some(_) if c.is_negative() => (true, -c.clone()),
                _ => (false, c.clone()),
            };
            let mono = if mag.is_one() {
                x.clone()
            } else if (-mag.clone()).is_one() {
                Term::compound(Atom::MINUS, vec![x.clone()])
            } else {
                Term::compound(Atom::STAR, vec![number_term(&mag), x.clone()])
            };
            sum = Some(match sum {
                None => mono,
                Some(s) => Term::compound(if neg { Atom::MINUS } else { Atom::PLUS }, vec![s, mono]),
            });
        }
        let lhs = sum.unwrap_or_else(|| Term::int(0));
        let rhs = number_term(&-self.konst.clone());
        Term::compound(Atom::new(&op_name(self.rel, self.integral)), vec![lhs, rhs])
    }
}

pub enum Outcome {
    Fail,
    Entailed,
    Pending,
}

fn var_bounds(store: &Store, x: &Term) -> (Option<BigRational>, Option<BigRational>) {
    let (lo, hi) = bounds(store, x);
    (float_to_rational(lo), float_to_rational(hi))
}

// c·x extremes for c ≠ 0; None is an infinite extreme
fn term_range(c: &BigRational, lo: &Option<BigRational>, hi: &Option<BigRational>) -> (Option<BigRational>, Option<BigRational>) {
    let m = |b: &Option<BigRational>| b.as_ref().map(|b| c * b);
    if c.is_positive() {
        (m(lo), m(hi))
    } else {
        (m(hi), m(lo))
    }
}

fn significant(new: f64, old: f64, integral: bool) -> bool {
    integral || !old.is_finite() || (new - old).abs() > 1e-9 * old.abs().max(new.abs()).max(1.0)
}

/// One pass of `Σ c·x + k =< 0`. Returns whether anything narrowed.
fn narrow_le(store: &mut Store, konst: &BigRational, terms: &[(BigRational, Term)]) -> Result<(bool, Outcome), ()> {
    let ranges: Vec<_> = terms
        .iter()
        .map(|(c, x)| {
            let (lo, hi) = var_bounds(store, x);
            term_range(c, &lo, &hi)
        })
        .collect();
    let inf_min = ranges.iter().filter(|r| r.0.is_none()).count();
    let inf_max = ranges.iter().filter(|r| r.1.is_none()).count();
    let sum_min: BigRational = ranges.iter().filter_map(|r| r.0.clone()).sum::<BigRational>() + konst;
    let sum_max: BigRational = ranges.iter().filter_map(|r| r.1.clone()).sum::<BigRational>() + konst;
    if inf_min == 0 && sum_min.is_positive() {
        return Err(());
    }
    if inf_max == 0 && !sum_max.is_positive() {
        return Ok((false, Outcome::Entailed));
    }
    let mut changed = false;
    for (i, (c, x)) in terms.iter().enumerate() {
        let rest = match (&ranges[i].0, inf_min) {
            (Some(m), 0) => &sum_min - m,
            (None, 1) => sum_min.clone(),
            _ => continue,
        };
        // c·x ≤ -rest
        let b = -rest / c;
        let x = store.deref(x);
        let integral = matches!(&x, Term::Var(v) if super::domain(store, *v).is_some_and(|d| d.integral))
            || x.is_integer();
        let (lo, hi) = bounds(store, &x);
        let ok = if c.is_positive() {
            let nb = if integral { rational_floor_f64(&b.floor()) } else { rational_ceil_f64(&b) };
            if nb < hi && significant(nb, hi, integral) {
                changed = true;
                impose_max(store, &x, nb)
            } else {
                true
            }
        } else {
            let nb = if integral { rational_ceil_f64(&b.ceil()) } else { rational_floor_f64(&b) };
            if nb > lo && significant(nb, lo, integral) {
                changed = true;
                impose_min(store, &x, nb)
            } else {
                true
            }
        };
        if !ok {
            return Err(());
        }
    }
    Ok((changed, Outcome::Pending))
}

fn fold(store: &Store, con: &LinCon) -> Result<LinCon, IcError> {
    let mut out = LinCon { rel: con.rel, integral: con.integral, konst: con.konst.clone(), terms: vec![] };
    let mut acc = Acc { konst: Zero::zero(), terms: vec![] };
    for (c, x) in &con.terms {
        lin(store, x, c, &mut acc)?;
    }
    out.konst += acc.konst;
    out.terms = acc.terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
    Ok(out)
}

/// Propagates `con` to a local fixpoint.
pub fn propagate(store: &mut Store, con: &LinCon) -> Result<Outcome, IcError> {
    if con.integral {
        for (_, x) in &con.terms {
            if !impose_integrality(store, x) {
                return Ok(Outcome::Fail);
            }
        }
    }
    for _ in 0..1000 {
        let c = fold(store, con)?;
        match c.rel {
            Rel::Ne => return Ok(propagate_ne(store, &c)),
            Rel::Le => match narrow_le(store, &c.konst, &c.terms) {
                Err(()) => return Ok(Outcome::Fail),
                Ok((_, Outcome::Entailed)) => return Ok(Outcome::Entailed),
                Ok((true, _)) => continue,
                Ok((false, o)) => return Ok(if c.terms.len() <= 1 { Outcome::Entailed } else { o }),
            },
            Rel::Eq => {
                let neg: Vec<_> = c.terms.iter().map(|(k, x)| (-k.clone(), x.clone())).collect();
                let a = narrow_le(store, &c.konst, &c.terms);
                let Ok((ca, oa)) = a else { return Ok(Outcome::Fail) };
                let Ok((cb, ob)) = narrow_le(store, &-c.konst.clone(), &neg) else { return Ok(Outcome::Fail) };
                if matches!((oa, ob), (Outcome::Entailed, Outcome::Entailed)) {
                    return Ok(Outcome::Entailed);
                }
                if !(ca || cb) {
                    return Ok(if c.terms.len() <= 1 { Outcome::Entailed } else { Outcome::Pending });
                }
            }
        }
    }
    Ok(Outcome::Pending)
}

fn propagate_ne(store: &mut Store, c: &LinCon) -> Outcome {
    match c.terms.len() {
        0 => {
            if c.konst.is_zero() {
                Outcome::Fail
            } else {
                Outcome::Entailed
            }
        }
        1 => {
            let (k, x) = &c.terms[0];
            let v = -&c.konst / k;
            let x = store.deref(x);
            let integral = matches!(&x, Term::Var(w) if super::domain(store, *w).is_some_and(|d| d.integral));
            if integral {
                if v.is_integer() {
                    match num_traits::ToPrimitive::to_i64(&v.to_integer()) {
                        Some(i) if !exclude(store, &x, i) => return Outcome::Fail,
                        _ => {}
                    }
                }
                Outcome::Entailed
            } else {
                Outcome::Pending
            }
        }
        _ => Outcome::Pending,
    }
}

/// Runs a linear constraint goal. With `me` set the goal is running as its
/// own demon; otherwise a demon is created when the constraint stays
/// undecided.
pub fn run(store: &mut Store, goal: &Term, me: Option<SuspId>) -> Result<bool, IcError> {
    let con = LinCon::from_term(store, goal)?;
    post(store, &con, me)
}

pub fn post(store: &mut Store, con: &LinCon, me: Option<SuspId>) -> Result<bool, IcError> {
    match propagate(store, con)? {
        Outcome::Fail => Ok(false),
        Outcome::Entailed => {
            if let Some(id) = me {
                store.kill(id);
            }
            Ok(true)
        }
        Outcome::Pending => {
            if me.is_none() {
                let c = fold(store, con)?;
                let goal = c.to_term();
                let id = store
                    .make_suspension(goal, Atom::IC, 5, true)
                    .map_err(|e| IcError::Type(e.to_string()))?;
                for (k, x) in &c.terms {
                    let Term::Var(v) = store.deref(x) else { continue };
                    // instantiation also wakes it, so that entailment on
                    // full instantiation kills the demon
                    store.attach(v, Cond::Inst, id);
                    match c.rel {
                        Rel::Ne => {}
                        Rel::Le if k.is_positive() => store.attach(v, Cond::Min, id),
                        Rel::Le => store.attach(v, Cond::Max, id),
                        Rel::Eq => {
                            store.attach(v, Cond::Min, id);
                            store.attach(v, Cond::Max, id);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic::{register, Domain};
    use crate::reader::{read_term, OpTable};

    fn parse(s: &str) -> Term {
        read_term(s, &OpTable::default()).unwrap().term
    }

    fn norm(s: &str) -> LinCon {
        let t = parse(s);
        let (name, _) = t.functor().unwrap();
        normalize(&Static, name.name(), &t.arg_at(1).unwrap(), &t.arg_at(2).unwrap()).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn normalizes_the_textbook_example() {
        let c = norm("X #>= 5*(X+Y)+2");
        assert_eq!(c.rel, Rel::Le);
        assert_eq!(c.konst, r(2));
        assert_eq!(c.terms.iter().map(|(k, _)| k.clone()).collect::<Vec<_>>(), vec![r(4), r(5)]);
        let e = norm("X #= Y");
        assert_eq!((e.rel, e.konst.clone()), (Rel::Eq, r(0)));
        assert_eq!(e.terms.len(), 2);
        let t = parse("X*Y #= 1");
        assert!(matches!(
            normalize(&Static, "#=", &t.arg_at(1).unwrap(), &t.arg_at(2).unwrap()),
            Err(IcError::Unsupported(_))
        ));
        // strict integral: X < Y  ~>  X - Y + 1 =< 0
        assert_eq!(norm("X #< Y").konst, r(1));
        // rational coefficients are scaled away
        let h = norm("X/2 #=< 3");
        assert_eq!((h.konst.clone(), h.terms[0].0.clone()), (r(-6), r(1)));
    }

    #[test]
    fn readable_form() {
        let c = norm("X #>= 5*(X+Y)+2");
        assert_eq!(format!("{}", c.readable()), "4 * _0 + 5 * _1 #=< -2");
    }

    fn var_in(s: &mut Store, lo: f64, hi: f64) -> Term {
        let x = s.new_var();
        assert!(crate::ic::impose_domain(s, &x, &Domain::integer(lo, hi)));
        x
    }

    #[test]
    fn le_propagation_and_failure() {
        let mut s = Store::new();
        register(&mut s);
        let x = var_in(&mut s, 0.0, 10.0);
        let y = var_in(&mut s, 0.0, 10.0);
        // 4X + 5Y + 2 =< 0 cannot hold
        let con = LinCon { rel: Rel::Le, integral: true, konst: r(2), terms: vec![(r(4), x.clone()), (r(5), y.clone())] };
        assert!(!post(&mut s, &con, None).unwrap());
    }

    #[test]
    fn geq_example() {
        let mut s = Store::new();
        register(&mut s);
        let x = var_in(&mut s, 1.0, 5.0);
        let y = var_in(&mut s, 3.0, 8.0);
        // X >= Y  ~>  Y - X =< 0
        let con = LinCon { rel: Rel::Le, integral: true, konst: r(0), terms: vec![(r(1), y.clone()), (r(-1), x.clone())] };
        assert!(post(&mut s, &con, None).unwrap());
        assert_eq!(bounds(&s, &x), (3.0, 5.0));
        assert_eq!(bounds(&s, &y), (3.0, 5.0));
        assert_eq!(s.delayed_goals().len(), 1);
    }

    #[test]
    fn eq_with_constant_instantiates() {
        let mut s = Store::new();
        register(&mut s);
        let x = var_in(&mut s, 0.0, 10.0);
        let con = LinCon { rel: Rel::Eq, integral: true, konst: r(-3), terms: vec![(r(1), x.clone())] };
        assert!(post(&mut s, &con, None).unwrap());
        assert_eq!(s.deref(&x), Term::int(3));
    }

    #[test]
    fn ne_excludes_last_value() {
        let mut s = Store::new();
        register(&mut s);
        let x = var_in(&mut s, 1.0, 5.0);
        let y = s.new_var();
        // X \= Y + 1 with Y = 2
        let con = LinCon { rel: Rel::Ne, integral: true, konst: r(-1), terms: vec![(r(1), x.clone()), (r(-1), y.clone())] };
        assert!(post(&mut s, &con, None).unwrap());
        assert!(crate::attvar::unify(&mut s, &y, &Term::int(2)));
        let id = s.delayed_goals()[0];
        let goal = s.suspension(id).goal.clone();
        assert!(run(&mut s, &goal, Some(id)).unwrap());
        assert!(crate::ic::domain(&s, x.as_var().unwrap()).unwrap().holes.contains(&3));
        assert!(s.delayed_goals().is_empty());
    }
}
