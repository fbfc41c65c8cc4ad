//! Term representation, construction, inspection and the standard order.

use std::cell::{Ref, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::atom::Atom;
use crate::number::Number;
use crate::Breal;

/// Index of a variable cell in a store (or of a local variable in a
/// clause template).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuspId(pub u32);

#[derive(Clone)]
pub enum Term {
    Var(VarId),
    Atom(Atom),
    /// Integers that fit a machine word. Larger ones are `BigInt`; the two
    /// never overlap.
    Int(i64),
    BigInt(Rc<BigInt>),
    Rat(Rc<BigRational>),
    Float(f64),
    Breal(Breal),
    Str(Rc<str>),
    Struct(Rc<Compound>),
    Susp(SuspId),
}

/// A compound term. Arguments sit behind a `RefCell` so that `setarg/3`
/// can update them in place; every other path treats them as immutable.
pub struct Compound {
    name: Atom,
    args: RefCell<Vec<Term>>,
    // per-argument timestamp of the last trailing, allocated on first setarg
    stamps: RefCell<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("structure needs at least one argument")]
    Arity,
    #[error("argument index {index} out of range 1..{arity}")]
    Range { index: i64, arity: usize },
    #[error("expected {0}")]
    Type(&'static str),
}

impl Compound {
    pub fn name(&self) -> Atom {
        self.name
    }

    pub fn arity(&self) -> usize {
        self.args.borrow().len()
    }

    /// Zero-based argument access.
    pub fn arg(&self, i: usize) -> Term {
        self.args.borrow()[i].clone()
    }

    pub fn args(&self) -> Ref<'_, Vec<Term>> {
        self.args.borrow()
    }

    pub(crate) fn replace_arg(&self, i: usize, t: Term) -> Term {
        std::mem::replace(&mut self.args.borrow_mut()[i], t)
    }

    pub(crate) fn stamp(&self, i: usize) -> u64 {
        self.stamps.borrow().get(i).copied().unwrap_or(0)
    }

    pub(crate) fn set_stamp(&self, i: usize, stamp: u64) {
        let mut stamps = self.stamps.borrow_mut();
        if stamps.is_empty() {
            stamps.resize(self.arity(), 0);
        }
        stamps[i] = stamp;
    }
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Atom::new(name))
    }

    pub fn nil() -> Term {
        Term::Atom(Atom::NIL)
    }

    pub fn int(i: i64) -> Term {
        Term::Int(i)
    }

    pub fn string(s: &str) -> Term {
        Term::Str(Rc::from(s))
    }

    pub fn from_bigint(i: BigInt) -> Term {
        match i.to_i64() {
            Some(small) => Term::Int(small),
            None => Term::BigInt(Rc::new(i)),
        }
    }

    pub fn from_number(n: Number) -> Term {
        match n {
            Number::Int(i) => Term::from_bigint(i),
            Number::Rat(r) => Term::Rat(Rc::new(r)),
            Number::Float(f) => Term::Float(f),
            Number::Breal(b) => Term::Breal(b),
        }
    }

    pub fn to_number(&self) -> Option<Number> {
        Some(match self {
            Term::Int(i) => Number::Int(BigInt::from(*i)),
            Term::BigInt(i) => Number::Int((**i).clone()),
            Term::Rat(r) => Number::Rat((**r).clone()),
            Term::Float(f) => Number::Float(*f),
            Term::Breal(b) => Number::Breal(*b),
            _ => return None,
        })
    }

    /// Builds `name(args...)`. Fails for an empty argument list.
    pub fn mk_struct(name: Atom, args: Vec<Term>) -> Result<Term, TermError> {
        if args.is_empty() {
            return Err(TermError::Arity);
        }
        Ok(Term::compound(name, args))
    }

    /// Like [`Term::mk_struct`] for callers that know `args` is non-empty.
    pub fn compound(name: Atom, args: Vec<Term>) -> Term {
        debug_assert!(!args.is_empty());
        Term::Struct(Rc::new(Compound {
            name,
            args: RefCell::new(args),
            stamps: RefCell::new(Vec::new()),
        }))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::compound(Atom::new(name), args)
    }

    /// `name` itself when `args` is empty, otherwise the compound.
    pub fn functor_term(name: Atom, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(name)
        } else {
            Term::compound(name, args)
        }
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(Atom::DOT, vec![head, tail])
    }

    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(
        items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>,
        tail: Term,
    ) -> Term {
        items.into_iter().rev().fold(tail, |acc, x| Term::cons(x, acc))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, Term::Var(_) | Term::Struct(_))
    }

    pub fn is_number(&self) -> bool {
        matches!(
            self,
            Term::Int(_) | Term::BigInt(_) | Term::Rat(_) | Term::Float(_) | Term::Breal(_)
        )
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Term::Int(_) | Term::BigInt(_))
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Struct(_))
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Term::Atom(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_struct(&self) -> Option<&Rc<Compound>> {
        match self {
            Term::Struct(s) => Some(s),
            _ => None,
        }
    }

    /// Name and arity of an atom or compound.
    pub fn functor(&self) -> Option<(Atom, usize)> {
        match self {
            Term::Atom(a) => Some((*a, 0)),
            Term::Struct(s) => Some((s.name, s.arity())),
            _ => None,
        }
    }

    pub fn is_functor(&self, name: Atom, arity: usize) -> bool {
        match self {
            Term::Struct(s) => s.name == name && s.arity() == arity,
            Term::Atom(a) => arity == 0 && *a == name,
            _ => false,
        }
    }

    /// Arguments of a compound (empty for anything else).
    pub fn args(&self) -> Vec<Term> {
        match self {
            Term::Struct(s) => s.args().clone(),
            _ => Vec::new(),
        }
    }

    /// One-based argument access with range checking.
    pub fn arg_at(&self, i: i64) -> Result<Term, TermError> {
        let s = self.as_struct().ok_or(TermError::Type("compound"))?;
        let arity = s.arity();
        if i < 1 || i as usize > arity {
            return Err(TermError::Range { index: i, arity });
        }
        Ok(s.arg(i as usize - 1))
    }

    /// Same object for compounds, same value for everything else.
    pub fn ptr_eq(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Struct(a), Term::Struct(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Dereferencing used by order and variant checks. Store-free terms use
/// [`Detached`].
pub trait Resolver {
    fn resolve(&self, t: &Term) -> Term;
}

/// Treats every variable as unbound.
pub struct Detached;

impl Resolver for Detached {
    fn resolve(&self, t: &Term) -> Term {
        t.clone()
    }
}

fn order_class(t: &Term) -> u8 {
    match t {
        Term::Var(_) => 0,
        Term::Int(_) | Term::BigInt(_) | Term::Rat(_) | Term::Float(_) | Term::Breal(_) => 1,
        Term::Atom(_) => 3,
        Term::Str(_) => 4,
        Term::Susp(_) => 5,
        Term::Struct(_) => 6,
    }
}

fn compare_numbers(a: &Number, b: &Number) -> Ordering {
    let by_value = match crate::number::compare(a, b) {
        Ok(o) => o,
        // undecided breals: order by lower then upper bound
        Err(_) => {
            let (x, y) = (a.to_interval(), b.to_interval());
            x.lo()
                .partial_cmp(&y.lo())
                .unwrap_or(Ordering::Equal)
                .then(x.hi().partial_cmp(&y.hi()).unwrap_or(Ordering::Equal))
        }
    };
    by_value.then(a.type_rank().cmp(&b.type_rank())).then_with(|| {
        // same value and type: only breals of different width can get here
        let (x, y) = (a.to_interval(), b.to_interval());
        x.lo()
            .partial_cmp(&y.lo())
            .unwrap_or(Ordering::Equal)
            .then(x.hi().partial_cmp(&y.hi()).unwrap_or(Ordering::Equal))
    })
}

/// Standard order of terms: Var < Number < Atom < String < Struct.
/// Numbers of equal value are ordered int < rat < float < breal.
pub fn compare_terms(a: &Term, b: &Term, r: &dyn Resolver) -> Ordering {
    let a = r.resolve(a);
    let b = r.resolve(b);
    let (ca, cb) = (order_class(&a), order_class(&b));
    if ca != cb {
        return ca.cmp(&cb);
    }
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) => x.cmp(y),
        (Term::Atom(x), Term::Atom(y)) => x.name().cmp(y.name()),
        (Term::Str(x), Term::Str(y)) => x.cmp(y),
        (Term::Susp(x), Term::Susp(y)) => x.cmp(y),
        (Term::Struct(x), Term::Struct(y)) => {
            if Rc::ptr_eq(x, y) {
                return Ordering::Equal;
            }
            let ord = x
                .arity()
                .cmp(&y.arity())
                .then_with(|| x.name.name().cmp(y.name.name()));
            if ord != Ordering::Equal {
                return ord;
            }
            let (xa, ya) = (x.args().clone(), y.args().clone());
            for (p, q) in xa.iter().zip(ya.iter()) {
                let o = compare_terms(p, q, r);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        }
        _ => compare_numbers(&a.to_number().unwrap(), &b.to_number().unwrap()),
    }
}

/// True when `a` and `b` are equal up to a consistent renaming of variables.
pub fn is_variant(a: &Term, b: &Term, r: &dyn Resolver) -> bool {
    let mut fwd = std::collections::HashMap::new();
    let mut bwd = std::collections::HashMap::new();
    variant_rec(a, b, r, &mut fwd, &mut bwd)
}

fn variant_rec(
    a: &Term,
    b: &Term,
    r: &dyn Resolver,
    fwd: &mut std::collections::HashMap<VarId, VarId>,
    bwd: &mut std::collections::HashMap<VarId, VarId>,
) -> bool {
    let a = r.resolve(a);
    let b = r.resolve(b);
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) => {
            let f = *fwd.entry(*x).or_insert(*y);
            let g = *bwd.entry(*y).or_insert(*x);
            f == *y && g == *x
        }
        (Term::Struct(x), Term::Struct(y)) => {
            x.name == y.name
                && x.arity() == y.arity()
                && x.args()
                    .clone()
                    .iter()
                    .zip(y.args().clone().iter())
                    .all(|(p, q)| variant_rec(p, q, r, fwd, bwd))
        }
        (Term::Var(_), _) | (_, Term::Var(_)) | (Term::Struct(_), _) | (_, Term::Struct(_)) => {
            false
        }
        _ => atomic_identical(&a, &b),
    }
}

/// Identity of atomic terms: same type and same value.
pub fn atomic_identical(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::BigInt(x), Term::BigInt(y)) => x == y,
        (Term::Rat(x), Term::Rat(y)) => x == y,
        (Term::Float(x), Term::Float(y)) => x == y || (x.is_nan() && y.is_nan()),
        (Term::Breal(x), Term::Breal(y)) => x == y,
        (Term::Str(x), Term::Str(y)) => x == y,
        (Term::Susp(x), Term::Susp(y)) => x == y,
        (Term::Var(x), Term::Var(y)) => x == y,
        _ => false,
    }
}

/// Structural equality without dereferencing: variables are equal only to
/// themselves.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Struct(x), Term::Struct(y)) => {
                Rc::ptr_eq(x, y)
                    || (x.name == y.name && *x.args() == *y.args())
            }
            _ => atomic_identical(self, other),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::reader::writer::write_detached(self, true))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::reader::writer::write_detached(self, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mk_struct_requires_args() {
        assert_eq!(Term::mk_struct(Atom::new("f"), vec![]).unwrap_err(), TermError::Arity);
        let t = Term::mk_struct(Atom::new("f"), vec![Term::atom("a"), Term::atom("b")]).unwrap();
        assert_eq!(t.functor(), Some((Atom::new("f"), 2)));
    }

    #[test]
    fn arg_at_bounds() {
        let days: Vec<Term> = ["mo", "tu", "we", "th", "fr", "sa", "su"]
            .iter()
            .map(|d| Term::atom(d))
            .collect();
        let wd = Term::app("wd", days);
        assert_eq!(wd.arg_at(2).unwrap(), Term::atom("tu"));
        let f = Term::app("f", vec![Term::atom("a"), Term::atom("b"), Term::atom("c")]);
        assert_eq!(f.arg_at(4).unwrap_err(), TermError::Range { index: 4, arity: 3 });
        assert_eq!(Term::atom("a").arg_at(1).unwrap_err(), TermError::Type("compound"));
        let x = Term::Var(VarId(7));
        assert_eq!(Term::app("f", vec![x.clone()]).arg_at(1).unwrap(), x);
    }

    #[test]
    fn list_construction() {
        let l = Term::list(vec![Term::int(1)]);
        assert_eq!(l, Term::compound(Atom::DOT, vec![Term::int(1), Term::nil()]));
    }

    #[test]
    fn standard_order_basics() {
        let d = Detached;
        assert_eq!(compare_terms(&Term::atom("a"), &Term::atom("b"), &d), Ordering::Less);
        assert_eq!(compare_terms(&Term::int(3), &Term::Float(3.0), &d), Ordering::Less);
        let f1 = Term::app("f", vec![Term::int(1)]);
        let f1b = Term::app("f", vec![Term::int(1)]);
        assert_eq!(compare_terms(&f1, &f1b, &d), Ordering::Equal);
        assert_eq!(compare_terms(&Term::Var(VarId(0)), &Term::int(0), &d), Ordering::Less);
        assert_eq!(compare_terms(&Term::atom("z"), &Term::string("a"), &d), Ordering::Less);
        assert_eq!(compare_terms(&Term::string("a"), &f1, &d), Ordering::Less);
    }

    #[test]
    fn variants() {
        let d = Detached;
        let x = Term::Var(VarId(0));
        let y = Term::Var(VarId(1));
        let a = Term::app("f", vec![x.clone(), x.clone()]);
        let b = Term::app("f", vec![y.clone(), y.clone()]);
        let c = Term::app("f", vec![x.clone(), y.clone()]);
        assert!(is_variant(&a, &b, &d));
        assert!(!is_variant(&a, &c, &d));
    }
}
