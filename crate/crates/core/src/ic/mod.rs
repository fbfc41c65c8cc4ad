//! Interval and finite-domain solver.
//!
//! A domain is a pair of float bounds, an integrality flag and, for
//! integral domains, a set of holes. Narrowing never widens and never
//! empties a domain: an empty result is a failure. Every narrowing wakes
//! the matching solver list and the generic constrained list.

pub mod linear;
pub mod props;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::atom::Atom;
use crate::attvar::{self, AttrSpec, AttrValue};
use crate::number::{format_float, Number};
use crate::store::Store;
use crate::susp::Cond;
use crate::term::{SuspId, Term, VarId};

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub integral: bool,
    /// Removed values strictly between `lo` and `hi`.
    pub holes: BTreeSet<i64>,
    pub min: Vec<SuspId>,
    pub max: Vec<SuspId>,
    pub hole: Vec<SuspId>,
    pub typ: Vec<SuspId>,
}

impl Domain {
    pub fn real(lo: f64, hi: f64) -> Domain {
        Domain { lo, hi, integral: false, holes: BTreeSet::new(), min: vec![], max: vec![], hole: vec![], typ: vec![] }
    }

    pub fn integer(lo: f64, hi: f64) -> Domain {
        Domain { integral: true, ..Domain::real(lo, hi) }
    }

    pub fn unbounded() -> Domain {
        Domain::real(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn list(&self, cond: Cond) -> &[SuspId] {
        match cond {
            Cond::Min => &self.min,
            Cond::Max => &self.max,
            Cond::Hole => &self.hole,
            Cond::Type => &self.typ,
            _ => &[],
        }
    }

    pub fn list_mut(&mut self, cond: Cond) -> &mut Vec<SuspId> {
        match cond {
            Cond::Min => &mut self.min,
            Cond::Max => &mut self.max,
            Cond::Hole => &mut self.hole,
            Cond::Type => &mut self.typ,
            _ => panic!("not a solver list: {:?}", cond),
        }
    }

    /// Same values, no suspensions.
    pub fn bare(&self) -> Domain {
        Domain { lo: self.lo, hi: self.hi, integral: self.integral, holes: self.holes.clone(), ..Domain::unbounded() }
    }

    pub fn contains(&self, n: &Number) -> bool {
        if self.integral {
            let Number::Int(i) = n else { return false };
            let f = crate::number::rational_to_f64(&num_rational::BigRational::from_integer(i.clone()));
            if f < self.lo || f > self.hi {
                return false;
            }
            !n.as_i64().is_some_and(|k| self.holes.contains(&k))
        } else {
            let iv = n.to_interval();
            iv.hi() >= self.lo && iv.lo() <= self.hi
        }
    }

    /// Number of values of a finite integral domain.
    pub fn size(&self) -> Option<u64> {
        if !self.integral || !self.lo.is_finite() || !self.hi.is_finite() {
            return None;
        }
        Some((self.hi - self.lo) as u64 + 1 - self.holes.len() as u64)
    }

    /// Values of a finite integral domain in ascending order.
    pub fn values(&self) -> Option<Vec<i64>> {
        self.size()?;
        Some((self.lo as i64..=self.hi as i64).filter(|v| !self.holes.contains(v)).collect())
    }

    /// `{1..5}`, `{[1..2, 4..5]}` or `{1.0..2.5}`.
    pub fn display(&self) -> String {
        let b = |x: f64| {
            if self.integral && x.is_finite() {
                format!("{}", x as i64)
            } else {
                format_float(x)
            }
        };
        if self.holes.is_empty() {
            return format!("{{{}..{}}}", b(self.lo), b(self.hi));
        }
        let mut ranges: Vec<(i64, i64)> = Vec::new();
        let mut start = self.lo as i64;
        for &h in &self.holes {
            if h > start {
                ranges.push((start, h - 1));
            }
            start = h + 1;
        }
        ranges.push((start, self.hi as i64));
        let mut s = String::from("{[");
        for (i, (a, z)) in ranges.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            if a == z {
                let _ = write!(s, "{}", a);
            } else {
                let _ = write!(s, "{}..{}", a, z);
            }
        }
        s.push_str("]}");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IcError {
    #[error("type error: {0}")]
    Type(String),
    #[error("instantiation error")]
    Instantiation,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub fn domain(store: &Store, v: VarId) -> Option<&Domain> {
    store.attrs(v)?.domain()
}

/// Domain of `v` for modification, creating an unbounded real domain when
/// there is none. The attribute block is trailed.
pub(crate) fn domain_mut(store: &mut Store, v: VarId) -> &mut Domain {
    let a = store.attrs_mut(v);
    if a.domain().is_none() {
        a.set(Atom::IC, AttrValue::Domain(Box::new(Domain::unbounded())));
    }
    match a.get_mut(Atom::IC) {
        Some(AttrValue::Domain(d)) => d,
        _ => unreachable!(),
    }
}

/// Domain of a term viewed as an ic variable: numbers have point domains.
pub fn bounds(store: &Store, t: &Term) -> (f64, f64) {
    match store.deref(t) {
        Term::Var(v) => domain(store, v).map_or((f64::NEG_INFINITY, f64::INFINITY), |d| (d.lo, d.hi)),
        other => match other.to_number() {
            Some(n) => {
                let iv = n.to_interval();
                (iv.lo(), iv.hi())
            }
            None => (f64::NEG_INFINITY, f64::INFINITY),
        },
    }
}

fn value_of(d: &Domain, x: f64) -> Term {
    if d.integral {
        Term::int(x as i64)
    } else {
        Term::Float(x)
    }
}

// Binds a variable whose domain has collapsed to one value.
fn settle(store: &mut Store, v: VarId) -> bool {
    let d = domain(store, v).unwrap();
    if d.lo == d.hi && (d.integral || d.lo.is_finite()) {
        let val = value_of(d, d.lo);
        return attvar::unify(store, &Term::Var(v), &val);
    }
    true
}

/// Raises the lower bound. Integral domains round `b` up; holes at the
/// new bound are skipped.
pub fn impose_min(store: &mut Store, t: &Term, b: f64) -> bool {
    match store.deref(t) {
        Term::Var(v) => {
            let (cur, integral, hi) = match domain(store, v) {
                Some(d) => (d.lo, d.integral, d.hi),
                None => (f64::NEG_INFINITY, false, f64::INFINITY),
            };
            let mut nb = if integral { b.ceil() } else { b };
            if nb.is_nan() || nb <= cur {
                return true;
            }
            if integral {
                if let Some(d) = domain(store, v) {
                    while nb <= hi && d.holes.contains(&(nb as i64)) {
                        nb += 1.0;
                    }
                }
            }
            if nb > hi {
                return false;
            }
            let d = domain_mut(store, v);
            d.lo = nb;
            if d.integral {
                d.holes = d.holes.split_off(&(nb as i64 + 1));
            }
            store.wake(v, Cond::Min);
            store.notify_constrained(v);
            settle(store, v)
        }
        other => match other.to_number() {
            Some(n) => n.to_interval().hi() >= b,
            None => false,
        },
    }
}

/// Lowers the upper bound; the mirror image of [`impose_min`].
pub fn impose_max(store: &mut Store, t: &Term, b: f64) -> bool {
    match store.deref(t) {
        Term::Var(v) => {
            let (cur, integral, lo) = match domain(store, v) {
                Some(d) => (d.hi, d.integral, d.lo),
                None => (f64::INFINITY, false, f64::NEG_INFINITY),
            };
            let mut nb = if integral { b.floor() } else { b };
            if nb.is_nan() || nb >= cur {
                return true;
            }
            if integral {
                if let Some(d) = domain(store, v) {
                    while nb >= lo && d.holes.contains(&(nb as i64)) {
                        nb -= 1.0;
                    }
                }
            }
            if nb < lo {
                return false;
            }
            let d = domain_mut(store, v);
            d.hi = nb;
            if d.integral {
                d.holes.split_off(&(nb as i64));
            }
            store.wake(v, Cond::Max);
            store.notify_constrained(v);
            settle(store, v)
        }
        other => match other.to_number() {
            Some(n) => n.to_interval().lo() <= b,
            None => false,
        },
    }
}

/// Removes an integer from an integral domain. Real domains and values
/// outside the domain are left alone; numbers are checked.
pub fn exclude(store: &mut Store, t: &Term, k: i64) -> bool {
    match store.deref(t) {
        Term::Var(v) => {
            let Some(d) = domain(store, v) else { return true };
            let kf = k as f64;
            if !d.integral || kf < d.lo || kf > d.hi || d.holes.contains(&k) {
                return true;
            }
            if kf == d.lo {
                return impose_min(store, t, kf + 1.0);
            }
            if kf == d.hi {
                return impose_max(store, t, kf - 1.0);
            }
            domain_mut(store, v).holes.insert(k);
            store.wake(v, Cond::Hole);
            store.notify_constrained(v);
            true
        }
        other => other.as_int() != Some(k),
    }
}

/// Restricts a domain to integers, rounding the bounds inward.
pub fn impose_integrality(store: &mut Store, t: &Term) -> bool {
    match store.deref(t) {
        Term::Var(v) => {
            let (lo, hi) = match domain(store, v) {
                Some(d) if d.integral => return true,
                Some(d) => (d.lo, d.hi),
                None => (f64::NEG_INFINITY, f64::INFINITY),
            };
            let (nlo, nhi) = (lo.ceil(), hi.floor());
            if nlo > nhi {
                return false;
            }
            let d = domain_mut(store, v);
            d.integral = true;
            d.lo = nlo;
            d.hi = nhi;
            store.wake(v, Cond::Type);
            if nlo != lo {
                store.wake(v, Cond::Min);
            }
            if nhi != hi {
                store.wake(v, Cond::Max);
            }
            store.notify_constrained(v);
            settle(store, v)
        }
        other => other.is_integer(),
    }
}

/// Intersects the domain of `t` with `d`.
pub fn impose_domain(store: &mut Store, t: &Term, d: &Domain) -> bool {
    if let Some(n) = store.deref(t).to_number() {
        return d.contains(&n);
    }
    if !store.deref(t).is_var() {
        return false;
    }
    if d.integral && !impose_integrality(store, t) {
        return false;
    }
    if !impose_min(store, t, d.lo) || !impose_max(store, t, d.hi) {
        return false;
    }
    d.holes.iter().all(|h| exclude(store, t, *h))
}

// ---- attribute handlers ----

fn unify_handler(store: &mut Store, _v: VarId, payload: &AttrValue, other: &Term) -> bool {
    let AttrValue::Domain(d) = payload else { return true };
    match other {
        Term::Var(s) => {
            let s = *s;
            let survivor = Term::Var(s);
            if domain(store, s).is_none() {
                let mut nd = d.bare();
                nd.min = d.min.clone();
                nd.max = d.max.clone();
                nd.hole = d.hole.clone();
                nd.typ = d.typ.clone();
                store.attrs_mut(s).set(Atom::IC, AttrValue::Domain(Box::new(nd)));
                return true;
            }
            if !impose_domain(store, &survivor, &d.bare()) {
                return false;
            }
            // wake the dying variable's lists by what changed for it
            let (lo, hi) = bounds(store, &survivor);
            let now = store.deref(&survivor);
            let (integral, holes) = match &now {
                Term::Var(w) => {
                    let nd = domain(store, *w).unwrap();
                    (nd.integral, nd.holes.len())
                }
                _ => (true, 0),
            };
            if lo > d.lo {
                store.schedule_all(&d.min);
            }
            if hi < d.hi {
                store.schedule_all(&d.max);
            }
            if integral && !d.integral {
                store.schedule_all(&d.typ);
            }
            if holes > d.holes.len() {
                store.schedule_all(&d.hole);
            }
            if let Term::Var(w) = now {
                let nd = domain_mut(store, w);
                nd.min.extend(d.min.iter().copied());
                nd.max.extend(d.max.iter().copied());
                nd.hole.extend(d.hole.iter().copied());
                nd.typ.extend(d.typ.iter().copied());
            } else {
                store.schedule_all(&d.min);
                store.schedule_all(&d.max);
            }
            true
        }
        value => {
            let Some(n) = value.to_number() else { return false };
            if !d.contains(&n) {
                return false;
            }
            let iv = n.to_interval();
            if iv.lo() != d.lo || iv.hi() != d.lo {
                store.schedule_all(&d.min);
            }
            if iv.lo() != d.hi || iv.hi() != d.hi {
                store.schedule_all(&d.max);
            }
            true
        }
    }
}

fn copy_handler(v: &AttrValue) -> Option<AttrValue> {
    match v {
        AttrValue::Domain(d) => Some(AttrValue::Domain(Box::new(d.bare()))),
        AttrValue::Term(_) => None,
    }
}

fn bounds_get(v: &AttrValue) -> (f64, f64) {
    match v {
        AttrValue::Domain(d) => (d.lo, d.hi),
        AttrValue::Term(_) => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

fn bounds_set(store: &mut Store, v: VarId, lo: f64, hi: f64) -> bool {
    let t = Term::Var(v);
    impose_min(store, &t, lo) && impose_max(store, &t, hi)
}

/// Registers the `ic` attribute with its handlers.
pub fn register(store: &mut Store) {
    let mut spec = AttrSpec::new(Atom::IC);
    spec.unify = Some(unify_handler);
    spec.copy = Some(copy_handler);
    spec.bounds_get = Some(bounds_get);
    spec.bounds_set = Some(bounds_set);
    // a second registration is harmless
    let _ = store.register_attribute(spec);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susp::SuspState;

    fn setup() -> (Store, Term, VarId) {
        let mut s = Store::new();
        register(&mut s);
        let x = s.new_var();
        let v = x.as_var().unwrap();
        assert!(impose_domain(&mut s, &x, &Domain::integer(1.0, 5.0)));
        (s, x, v)
    }

    fn lists(s: &mut Store, v: VarId) -> Vec<(Cond, SuspId)> {
        [Cond::Inst, Cond::Bound, Cond::Constrained, Cond::Min, Cond::Max, Cond::Hole, Cond::Type]
            .into_iter()
            .map(|c| {
                let id = s.make_suspension(Term::atom("g"), Atom::USER, 5, false).unwrap();
                s.attach(v, c, id);
                (c, id)
            })
            .collect()
    }

    fn woken(s: &Store, l: &[(Cond, SuspId)]) -> Vec<Cond> {
        l.iter().filter(|(_, id)| s.susp_state(*id) == SuspState::Scheduled).map(|(c, _)| *c).collect()
    }

    #[test]
    fn impose_min_wakes_min_only() {
        let (mut s, x, v) = setup();
        let l = lists(&mut s, v);
        assert!(impose_min(&mut s, &x, 3.0));
        assert_eq!(bounds(&s, &x), (3.0, 5.0));
        assert_eq!(woken(&s, &l), vec![Cond::Constrained, Cond::Min]);
        assert!(impose_min(&mut s, &x, 0.0));
        assert!(!impose_min(&mut s, &x, 6.0));
    }

    #[test]
    fn exclude_interior_and_bound() {
        let (mut s, x, v) = setup();
        let l = lists(&mut s, v);
        assert!(exclude(&mut s, &x, 3));
        assert_eq!(woken(&s, &l), vec![Cond::Constrained, Cond::Hole]);
        assert!(exclude(&mut s, &x, 1));
        assert_eq!(bounds(&s, &x), (2.0, 5.0));
        assert!(exclude(&mut s, &x, 2));
        // 3 is a hole, so the bound jumps to 4
        assert_eq!(bounds(&s, &x), (4.0, 5.0));
        assert!(exclude(&mut s, &x, 5));
        assert_eq!(s.deref(&x), Term::int(4));
        assert!(!exclude(&mut s, &x, 4));
    }

    #[test]
    fn integrality_rounds_inward() {
        let mut s = Store::new();
        register(&mut s);
        let x = s.new_var();
        assert!(impose_domain(&mut s, &x, &Domain::real(1.5, 3.2)));
        let l = lists(&mut s, x.as_var().unwrap());
        assert!(impose_integrality(&mut s, &x));
        assert_eq!(bounds(&s, &x), (2.0, 3.0));
        assert_eq!(woken(&s, &l), vec![Cond::Constrained, Cond::Min, Cond::Max, Cond::Type]);
        let y = s.new_var();
        assert!(impose_domain(&mut s, &y, &Domain::real(2.1, 2.9)));
        assert!(!impose_integrality(&mut s, &y));
    }

    #[test]
    fn membership_on_binding() {
        let (mut s, x, _) = setup();
        let m = s.push_choicepoint();
        assert!(!attvar::unify(&mut s, &x, &Term::int(7)));
        s.backtrack_to(m).unwrap();
        assert!(!attvar::unify(&mut s, &x, &Term::Float(3.0)));
        s.backtrack_to(m).unwrap();
        assert!(attvar::unify(&mut s, &x, &Term::int(3)));
    }

    #[test]
    fn var_var_intersection() {
        let (mut s, x, _) = setup();
        let y = s.new_var();
        assert!(impose_domain(&mut s, &y, &Domain::integer(3.0, 9.0)));
        assert!(attvar::unify(&mut s, &x, &y));
        assert_eq!(bounds(&s, &x), (3.0, 5.0));
        assert_eq!(bounds(&s, &y), (3.0, 5.0));
    }

    #[test]
    fn copy_keeps_domain() {
        let (mut s, x, _) = setup();
        let c = s.copy_term(&x);
        assert_ne!(c.as_var(), x.as_var());
        assert_eq!(bounds(&s, &c), (1.0, 5.0));
    }

    #[test]
    fn display_forms() {
        let mut d = Domain::integer(1.0, 5.0);
        assert_eq!(d.display(), "{1..5}");
        d.holes.insert(3);
        assert_eq!(d.display(), "{[1..2, 4..5]}");
        assert_eq!(Domain::real(1.0, 2.5).display(), "{1.0..2.5}");
    }
}
