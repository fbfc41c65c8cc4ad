//! Mutable engine state: variable cells, the trail, choicepoint marks and
//! the suspension table.
//!
//! Every choicepoint push takes a fresh value from a monotone clock. A
//! value-trailed location remembers the stamp current when it was last
//! trailed; an update finding a stamp no older than the top choicepoint's
//! skips the trail. Stamps left by choicepoints removed by a cut are newer
//! still, so they count as the surviving segment. Undo closures are never
//! deduplicated.

use std::collections::VecDeque;
use std::rc::Rc;

use crate::attvar::Attrs;
use crate::susp::{SuspState, Suspension, PRIORITIES};
use crate::term::{Compound, Resolver, SuspId, Term, TermError, VarId};

#[derive(Clone, Default)]
pub(crate) struct VarCell {
    pub(crate) value: Option<Term>,
    pub(crate) attrs: Option<Box<Attrs>>,
    attr_stamp: u64,
}

pub type UndoFn = Box<dyn FnOnce(&mut Store)>;

enum TrailEntry {
    Bind(VarId),
    Attrs { var: VarId, old: Option<Box<Attrs>>, old_stamp: u64 },
    Arg { s: Rc<Compound>, idx: usize, old: Term, old_stamp: u64 },
    Susp { id: SuspId, old: SuspState, old_stamp: u64 },
    Undo { f: UndoFn, #[allow(dead_code)] stamp: u64 },
}

pub(crate) type Queue = [VecDeque<SuspId>; PRIORITIES];

struct MarkRec {
    trail_len: usize,
    var_len: usize,
    susp_len: usize,
    stamp: u64,
    queue: Option<Box<Queue>>,
}

/// Handle for a pushed choicepoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mark {
    depth: usize,
    stamp: u64,
}

impl Mark {
    pub fn stamp(&self) -> u64 {
        self.stamp
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("internal error: choicepoint is no longer live")]
    DeadMark,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrailCounts {
    pub bindings: usize,
    pub values: usize,
    pub undos: usize,
}

#[derive(Default)]
pub struct Store {
    pub(crate) vars: Vec<VarCell>,
    trail: Vec<TrailEntry>,
    marks: Vec<MarkRec>,
    clock: u64,
    pub(crate) susps: Vec<Suspension>,
    pub(crate) queue: Queue,
    pub(crate) attr_specs: Vec<crate::attvar::AttrSpec>,
    pub(crate) pending_goals: Vec<Term>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    // ---- variables ----

    pub fn new_var_id(&mut self) -> VarId {
        self.vars.push(VarCell::default());
        VarId(self.vars.len() as u32 - 1)
    }

    pub fn new_var(&mut self) -> Term {
        Term::Var(self.new_var_id())
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn binding(&self, v: VarId) -> Option<&Term> {
        self.vars[v.0 as usize].value.as_ref()
    }

    /// Follows bindings until an unbound variable or a non-variable.
    pub fn deref(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(v) = t {
            match &self.vars[v.0 as usize].value {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    fn older_than_top(&self, v: VarId) -> bool {
        self.marks.last().is_some_and(|m| (v.0 as usize) < m.var_len)
    }

    /// Binds an unbound variable. No attribute processing happens here.
    pub fn bind(&mut self, v: VarId, t: Term) {
        debug_assert!(self.vars[v.0 as usize].value.is_none());
        if self.older_than_top(v) {
            self.trail.push(TrailEntry::Bind(v));
        }
        self.vars[v.0 as usize].value = Some(t);
    }

    pub fn attrs(&self, v: VarId) -> Option<&Attrs> {
        self.vars[v.0 as usize].attrs.as_deref()
    }

    pub fn has_attrs(&self, v: VarId) -> bool {
        self.vars[v.0 as usize].attrs.is_some()
    }

    fn trail_attrs(&mut self, v: VarId) {
        let now = self.timestamp();
        let cell = &self.vars[v.0 as usize];
        if !self.older_than_top(v) || cell.attr_stamp >= now {
            return;
        }
        let old = cell.attrs.clone();
        let old_stamp = cell.attr_stamp;
        self.trail.push(TrailEntry::Attrs { var: v, old, old_stamp });
        self.vars[v.0 as usize].attr_stamp = now;
    }

    /// Mutable attribute block of `v`, created empty if absent. The old
    /// block is value-trailed once per choicepoint segment.
    pub fn attrs_mut(&mut self, v: VarId) -> &mut Attrs {
        self.trail_attrs(v);
        self.vars[v.0 as usize].attrs.get_or_insert_with(Default::default)
    }

    /// Replaces the attribute block (trailed).
    pub fn set_attrs(&mut self, v: VarId, attrs: Option<Box<Attrs>>) {
        self.trail_attrs(v);
        self.vars[v.0 as usize].attrs = attrs;
    }

    // ---- destructive assignment ----

    /// `setarg/3`: 1-based index.
    pub fn set_arg(&mut self, i: i64, s: &Term, new: Term) -> Result<(), TermError> {
        let s = match self.deref(s) {
            Term::Struct(c) => c,
            _ => return Err(TermError::Type("compound")),
        };
        if i < 1 || i as usize > s.arity() {
            return Err(TermError::Range { index: i, arity: s.arity() });
        }
        let idx = i as usize - 1;
        let now = self.timestamp();
        let old_stamp = s.stamp(idx);
        if !self.marks.is_empty() && old_stamp < now {
            let old = s.arg(idx);
            self.trail.push(TrailEntry::Arg { s: s.clone(), idx, old, old_stamp });
            s.set_stamp(idx, now);
        }
        s.replace_arg(idx, new);
        Ok(())
    }

    pub fn register_undo(&mut self, f: impl FnOnce(&mut Store) + 'static) {
        if self.marks.is_empty() {
            return;
        }
        let stamp = self.timestamp();
        self.trail.push(TrailEntry::Undo { f: Box::new(f), stamp });
    }

    pub(crate) fn set_susp_state(&mut self, id: SuspId, state: SuspState) {
        let now = self.timestamp();
        let older = self.marks.last().is_some_and(|m| (id.0 as usize) < m.susp_len);
        let s = &mut self.susps[id.0 as usize];
        if older && s.stamp < now {
            self.trail.push(TrailEntry::Susp { id, old: s.state, old_stamp: s.stamp });
            s.stamp = now;
        }
        s.state = state;
    }

    // ---- choicepoints ----

    /// Stamp of the most recent live choicepoint (0 when there is none).
    pub fn timestamp(&self) -> u64 {
        self.marks.last().map_or(0, |m| m.stamp)
    }

    pub fn push_choicepoint(&mut self) -> Mark {
        self.clock += 1;
        let queue = if self.queue.iter().all(|b| b.is_empty()) {
            None
        } else {
            Some(Box::new(self.queue.clone()))
        };
        self.marks.push(MarkRec {
            trail_len: self.trail.len(),
            var_len: self.vars.len(),
            susp_len: self.susps.len(),
            stamp: self.clock,
            queue,
        });
        Mark { depth: self.marks.len() - 1, stamp: self.clock }
    }

    pub fn is_live(&self, m: Mark) -> bool {
        self.marks.get(m.depth).is_some_and(|r| r.stamp == m.stamp)
    }

    pub fn choicepoint_count(&self) -> usize {
        self.marks.len()
    }

    /// Undoes everything done since `m` was pushed. `m` stays live and
    /// every choicepoint above it is discarded.
    pub fn backtrack_to(&mut self, m: Mark) -> Result<(), StoreError> {
        if !self.is_live(m) {
            return Err(StoreError::DeadMark);
        }
        self.marks.truncate(m.depth + 1);
        let rec = &self.marks[m.depth];
        let (trail_len, var_len, susp_len) = (rec.trail_len, rec.var_len, rec.susp_len);
        while self.trail.len() > trail_len {
            match self.trail.pop().unwrap() {
                TrailEntry::Bind(v) => self.vars[v.0 as usize].value = None,
                TrailEntry::Attrs { var, old, old_stamp } => {
                    let cell = &mut self.vars[var.0 as usize];
                    cell.attrs = old;
                    cell.attr_stamp = old_stamp;
                }
                TrailEntry::Arg { s, idx, old, old_stamp } => {
                    s.replace_arg(idx, old);
                    s.set_stamp(idx, old_stamp);
                }
                TrailEntry::Susp { id, old, old_stamp } => {
                    let s = &mut self.susps[id.0 as usize];
                    s.state = old;
                    s.stamp = old_stamp;
                }
                TrailEntry::Undo { f, .. } => f(self),
            }
        }
        self.vars.truncate(var_len);
        self.susps.truncate(susp_len);
        self.pending_goals.clear();
        self.queue = match &self.marks[m.depth].queue {
            Some(q) => (**q).clone(),
            None => Default::default(),
        };
        Ok(())
    }

    /// Backtracks to `m` and removes it.
    pub fn pop_choicepoint(&mut self, m: Mark) -> Result<(), StoreError> {
        self.backtrack_to(m)?;
        self.marks.pop();
        Ok(())
    }

    /// Discards `m` and every choicepoint above it without undoing
    /// anything (cut). Trail entries stay for older choicepoints; with
    /// none left nothing can be undone, so the trail is dropped.
    pub fn cut_to(&mut self, m: Mark) -> Result<(), StoreError> {
        if !self.is_live(m) {
            return Err(StoreError::DeadMark);
        }
        self.marks.truncate(m.depth);
        if self.marks.is_empty() {
            self.trail.clear();
        }
        Ok(())
    }

    /// Backtracks to the most recent choicepoint, or reports an empty stack.
    pub fn backtrack_top(&mut self) -> Result<(), StoreError> {
        let m = self
            .marks
            .last()
            .map(|r| Mark { depth: self.marks.len() - 1, stamp: r.stamp })
            .ok_or(StoreError::DeadMark)?;
        self.backtrack_to(m)
    }

    // ---- introspection ----

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn trail_counts(&self) -> TrailCounts {
        let mut c = TrailCounts::default();
        for e in &self.trail {
            match e {
                TrailEntry::Bind(_) => c.bindings += 1,
                TrailEntry::Undo { .. } => c.undos += 1,
                _ => c.values += 1,
            }
        }
        c
    }

    /// Value entries pushed since the most recent choicepoint, as
    /// (location kind, identity) pairs; used to check deduplication.
    pub fn value_locations_since_top(&self) -> Vec<(u8, usize, usize)> {
        let from = self.marks.last().map_or(0, |m| m.trail_len);
        self.trail[from..]
            .iter()
            .filter_map(|e| match e {
                TrailEntry::Attrs { var, .. } => Some((0, var.0 as usize, 0)),
                TrailEntry::Arg { s, idx, .. } => Some((1, Rc::as_ptr(s) as usize, *idx)),
                TrailEntry::Susp { id, .. } => Some((2, id.0 as usize, 0)),
                _ => None,
            })
            .collect()
    }

    // ---- term utilities ----

    /// Fully dereferenced copy of `t` that shares no variables with `self`:
    /// unbound variables are numbered from 0 in order of appearance.
    pub fn detach(&self, t: &Term) -> (Term, Vec<VarId>) {
        let mut map = Vec::new();
        let out = self.detach_with(t, &mut map);
        (out, map)
    }

    pub fn detach_with(&self, t: &Term, map: &mut Vec<VarId>) -> Term {
        match self.deref(t) {
            Term::Var(v) => {
                let i = match map.iter().position(|x| *x == v) {
                    Some(i) => i,
                    None => {
                        map.push(v);
                        map.len() - 1
                    }
                };
                Term::Var(VarId(i as u32))
            }
            Term::Struct(c) => {
                let args = c.args().iter().map(|a| self.detach_with(a, map)).collect();
                Term::compound(c.name(), args)
            }
            other => other,
        }
    }

    /// Instantiates a term whose variables are locals `0..n` with fresh
    /// store variables (or with the given bindings).
    pub fn instantiate(&mut self, t: &Term, env: &mut Vec<Option<Term>>) -> Term {
        match t {
            Term::Var(v) => {
                let i = v.0 as usize;
                if i >= env.len() {
                    env.resize(i + 1, None);
                }
                if let Some(x) = &env[i] {
                    return x.clone();
                }
                let x = self.new_var();
                env[i] = Some(x.clone());
                x
            }
            Term::Struct(c) => {
                let args = c.args().iter().map(|a| self.instantiate(a, env)).collect();
                Term::compound(c.name(), args)
            }
            other => other.clone(),
        }
    }

    /// Fully dereferenced term (variables stay, bindings are substituted).
    pub fn resolve_deep(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Struct(c) => {
                let args = c.args().iter().map(|a| self.resolve_deep(a)).collect();
                Term::compound(c.name(), args)
            }
            other => other,
        }
    }

    /// Distinct unbound variables of `t` in depth-first order.
    pub fn term_vars(&self, t: &Term) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(t, &mut out);
        out
    }

    fn collect_vars(&self, t: &Term, out: &mut Vec<VarId>) {
        match self.deref(t) {
            Term::Var(v) => {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            Term::Struct(c) => {
                for a in c.args().iter() {
                    self.collect_vars(a, out);
                }
            }
            _ => {}
        }
    }

    pub fn is_ground(&self, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(_) => false,
            Term::Struct(c) => c.args().iter().all(|a| self.is_ground(a)),
            _ => true,
        }
    }

    /// Elements of a proper list, or `None`.
    pub fn list_items(&self, t: &Term) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        let mut cur = self.deref(t);
        loop {
            match &cur {
                Term::Atom(crate::Atom::NIL) => return Some(out),
                Term::Struct(c) if c.name() == crate::Atom::DOT && c.arity() == 2 => {
                    out.push(c.arg(0));
                    cur = self.deref(&c.arg(1));
                }
                _ => return None,
            }
        }
    }
}

impl Resolver for Store {
    fn resolve(&self, t: &Term) -> Term {
        self.deref(t)
    }
}
