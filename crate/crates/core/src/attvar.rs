//! Attributed variables.
//!
//! Attributes live in the variable cell, next to the three generic
//! suspension lists. Unification is structural first; afterwards every
//! attributed variable that got bound is processed: its generic lists are
//! woken according to the event, then each attribute's unify handler runs
//! in registration order. Handlers see the variable already bound.

use crate::atom::Atom;
use crate::ic::Domain;
use crate::store::Store;
use crate::susp::Cond;
use crate::term::{atomic_identical, SuspId, Term, VarId};

#[derive(Clone, Debug)]
pub enum AttrValue {
    Term(Term),
    Domain(Box<Domain>),
}

#[derive(Clone, Debug, Default)]
pub struct Attrs {
    pub inst: Vec<SuspId>,
    pub bound: Vec<SuspId>,
    pub constrained: Vec<SuspId>,
    pub entries: Vec<(Atom, AttrValue)>,
}

impl Attrs {
    pub fn get(&self, name: Atom) -> Option<&AttrValue> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn get_mut(&mut self, name: Atom) -> Option<&mut AttrValue> {
        self.entries.iter_mut().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn set(&mut self, name: Atom, value: AttrValue) {
        match self.get_mut(name) {
            Some(slot) => *slot = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn domain(&self) -> Option<&Domain> {
        match self.get(Atom::IC) {
            Some(AttrValue::Domain(d)) => Some(d),
            _ => None,
        }
    }
}

/// Called after `var` (carrying `payload`) was bound to `other`, which is
/// either a non-variable or the surviving variable.
pub type UnifyHandler = fn(&mut Store, VarId, &AttrValue, &Term) -> bool;
/// Payload for the copy of a variable, or `None` to leave it out.
pub type CopyHandler = fn(&AttrValue) -> Option<AttrValue>;
pub type BoundsGet = fn(&AttrValue) -> (f64, f64);
pub type BoundsSet = fn(&mut Store, VarId, f64, f64) -> bool;

#[derive(Clone, Debug)]
pub struct AttrSpec {
    pub name: Atom,
    pub unify: Option<UnifyHandler>,
    /// Predicate `Name(Value, Payload)` run as a goal after unification;
    /// used for attributes defined by programs.
    pub unify_goal: Option<(Atom, Atom)>,
    pub copy: Option<CopyHandler>,
    pub bounds_get: Option<BoundsGet>,
    pub bounds_set: Option<BoundsSet>,
}

impl AttrSpec {
    pub fn new(name: Atom) -> Self {
        AttrSpec { name, unify: None, unify_goal: None, copy: None, bounds_get: None, bounds_set: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AttrError {
    #[error("attribute {0} is already registered")]
    Duplicate(String),
    #[error("instantiation error: attribute target is bound")]
    Bound,
    #[error("variable has no attribute supporting bounds")]
    NoBounds,
}

impl Store {
    pub fn register_attribute(&mut self, spec: AttrSpec) -> Result<(), AttrError> {
        if self.attr_specs.iter().any(|s| s.name == spec.name) {
            return Err(AttrError::Duplicate(spec.name.name().to_string()));
        }
        self.attr_specs.push(spec);
        Ok(())
    }

    pub fn attr_spec(&self, name: Atom) -> Option<&AttrSpec> {
        self.attr_specs.iter().find(|s| s.name == name)
    }

    pub fn add_attr(&mut self, v: &Term, name: Atom, value: Term) -> Result<(), AttrError> {
        let Term::Var(v) = self.deref(v) else { return Err(AttrError::Bound) };
        self.attrs_mut(v).set(name, AttrValue::Term(value));
        Ok(())
    }

    pub fn get_attr(&self, v: &Term, name: Atom) -> Option<AttrValue> {
        let Term::Var(v) = self.deref(v) else { return None };
        self.attrs(v)?.get(name).cloned()
    }

    /// Schedules the constrained list of `v`. Every operation that narrows
    /// an attribute must call this.
    pub fn notify_constrained(&mut self, v: VarId) {
        self.wake(v, Cond::Constrained);
    }

    /// Intersection of the bounds of every bounds-capable attribute.
    pub fn get_var_bounds(&self, t: &Term) -> (f64, f64) {
        match self.deref(t) {
            Term::Var(v) => {
                let mut b = (f64::NEG_INFINITY, f64::INFINITY);
                if let Some(a) = self.attrs(v) {
                    for spec in &self.attr_specs {
                        if let (Some(get), Some(val)) = (spec.bounds_get, a.get(spec.name)) {
                            let (lo, hi) = get(val);
                            b = (b.0.max(lo), b.1.min(hi));
                        }
                    }
                }
                b
            }
            other => match other.to_number() {
                Some(n) => {
                    let iv = n.to_interval();
                    (iv.lo(), iv.hi())
                }
                None => (f64::NEG_INFINITY, f64::INFINITY),
            },
        }
    }

    /// Broadcasts new bounds to every bounds-capable attribute. `Ok(false)`
    /// means the bounds emptied a domain.
    pub fn set_var_bounds(&mut self, t: &Term, lo: f64, hi: f64) -> Result<bool, AttrError> {
        let v = match self.deref(t) {
            Term::Var(v) => v,
            other => {
                let (a, b) = self.get_var_bounds(&other);
                return Ok(lo <= b && a <= hi);
            }
        };
        let setters: Vec<BoundsSet> = match self.attrs(v) {
            Some(a) => self
                .attr_specs
                .iter()
                .filter(|s| a.get(s.name).is_some())
                .filter_map(|s| s.bounds_set)
                .collect(),
            None => Vec::new(),
        };
        if setters.is_empty() {
            return Err(AttrError::NoBounds);
        }
        for set in setters {
            let cur = self.deref(&Term::Var(v));
            match cur {
                Term::Var(v) => {
                    if !set(self, v, lo, hi) {
                        return Ok(false);
                    }
                }
                other => {
                    let (a, b) = self.get_var_bounds(&other);
                    return Ok(lo <= b && a <= hi);
                }
            }
        }
        Ok(true)
    }

    /// Fresh-variable copy; attributed variables keep whatever their copy
    /// handlers return. Suspension lists are not copied.
    pub fn copy_term(&mut self, t: &Term) -> Term {
        let mut map: Vec<(VarId, Term)> = Vec::new();
        self.copy_rec(t, &mut map)
    }

    fn copy_rec(&mut self, t: &Term, map: &mut Vec<(VarId, Term)>) -> Term {
        match self.deref(t) {
            Term::Var(v) => {
                if let Some((_, c)) = map.iter().find(|(x, _)| *x == v) {
                    return c.clone();
                }
                let nv = self.new_var_id();
                let copied: Vec<(Atom, AttrValue)> = match self.attrs(v) {
                    Some(a) => a
                        .entries
                        .iter()
                        .filter_map(|(name, val)| {
                            let copy = self.attr_spec(*name).and_then(|s| s.copy)?;
                            Some((*name, copy(val)?))
                        })
                        .collect(),
                    None => Vec::new(),
                };
                if !copied.is_empty() {
                    let a = self.attrs_mut(nv);
                    for (n, val) in copied {
                        a.set(n, val);
                    }
                }
                map.push((v, Term::Var(nv)));
                Term::Var(nv)
            }
            Term::Struct(c) => {
                let args: Vec<Term> = c.args().clone();
                let args = args.iter().map(|a| self.copy_rec(a, map)).collect();
                Term::compound(c.name(), args)
            }
            other => other,
        }
    }

    /// Takes the goals queued by program-defined unify handlers.
    pub fn take_pending_goals(&mut self) -> Vec<Term> {
        std::mem::take(&mut self.pending_goals)
    }
}

struct BindEvent {
    var: VarId,
    other: Term,
}

/// Full unification with attribute processing. On failure the store may
/// hold partial bindings; the caller backtracks.
pub fn unify(store: &mut Store, a: &Term, b: &Term) -> bool {
    let mut events = Vec::new();
    if !unify_structural(store, a, b, &mut events) {
        return false;
    }
    events.into_iter().all(|ev| process_event(store, ev))
}

fn unify_structural(store: &mut Store, a: &Term, b: &Term, events: &mut Vec<BindEvent>) -> bool {
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = store.deref(&a);
        let b = store.deref(&b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) => {
                if x == y {
                    continue;
                }
                let (hx, hy) = (store.has_attrs(*x), store.has_attrs(*y));
                let (young, old) = if x > y { (*x, *y) } else { (*y, *x) };
                match (hx, hy) {
                    (true, true) => {
                        store.bind(young, Term::Var(old));
                        events.push(BindEvent { var: young, other: Term::Var(old) });
                    }
                    (true, false) => store.bind(*y, a.clone()),
                    (false, true) => store.bind(*x, b.clone()),
                    (false, false) => store.bind(young, Term::Var(old)),
                }
            }
            (Term::Var(x), _) => {
                store.bind(*x, b.clone());
                if store.has_attrs(*x) {
                    events.push(BindEvent { var: *x, other: b.clone() });
                }
            }
            (_, Term::Var(y)) => {
                store.bind(*y, a.clone());
                if store.has_attrs(*y) {
                    events.push(BindEvent { var: *y, other: a.clone() });
                }
            }
            (Term::Struct(s), Term::Struct(t)) => {
                if std::rc::Rc::ptr_eq(s, t) {
                    continue;
                }
                if s.name() != t.name() || s.arity() != t.arity() {
                    return false;
                }
                let (xs, ys) = (s.args(), t.args());
                for (x, y) in xs.iter().zip(ys.iter()).rev() {
                    stack.push((x.clone(), y.clone()));
                }
            }
            _ => {
                if !atomic_identical(&a, &b) {
                    return false;
                }
            }
        }
    }
    true
}

fn process_event(store: &mut Store, ev: BindEvent) -> bool {
    let Some(attrs) = store.attrs(ev.var).cloned() else { return true };
    let other = store.deref(&ev.other);
    match &other {
        Term::Var(survivor) => {
            store.schedule_all(&attrs.bound);
            store.schedule_all(&attrs.constrained);
            store.wake(*survivor, Cond::Bound);
            store.wake(*survivor, Cond::Constrained);
            let s = store.attrs_mut(*survivor);
            s.inst.extend(attrs.inst.iter().copied());
            s.bound.extend(attrs.bound.iter().copied());
            s.constrained.extend(attrs.constrained.iter().copied());
        }
        _ => {
            store.schedule_all(&attrs.inst);
            store.schedule_all(&attrs.bound);
            store.schedule_all(&attrs.constrained);
        }
    }
    let specs = store.attr_specs.clone();
    for spec in &specs {
        let Some(payload) = attrs.get(spec.name) else { continue };
        if let Some(h) = spec.unify {
            if !h(store, ev.var, payload, &other) {
                return false;
            }
        } else if let Some((module, pred)) = spec.unify_goal {
            let value = match payload {
                AttrValue::Term(t) => t.clone(),
                AttrValue::Domain(_) => continue,
            };
            let goal = Term::compound(pred, vec![other.clone(), value]);
            store.pending_goals.push(Term::compound(Atom::COLON, vec![Term::Atom(module), goal]));
        }
    }
    true
}
