//! Source transformations applied while loading: struct syntax, `of/2`,
//! `update_struct/4`, do-loops and goal expansion.
//!
//! Everything here works on clause templates, i.e. terms whose variables
//! are local numbers `Var(0..n)`; fresh variables come from a [`VarGen`].

pub mod goals;
pub mod loops;

use std::collections::HashMap;

use crate::atom::Atom;
use crate::term::{Term, VarId};

pub use goals::{expand_body, GoalHost};
pub use loops::expand_do;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExpandError {
    #[error("unknown structure {0}")]
    UnknownStruct(String),
    #[error("structure {st} has no field {field}")]
    UnknownField { field: String, st: String },
    #[error("duplicate field {0} in structure declaration")]
    DuplicateField(String),
    #[error("field {0} is updated twice")]
    DuplicateUpdate(String),
    #[error("unknown loop iterator {0}")]
    UnknownIterator(String),
    #[error("malformed {0}")]
    Malformed(String),
    /// Raised by a user transformation.
    #[error("{0}")]
    Hook(String),
}

pub type ExpandResult<T> = Result<T, ExpandError>;

#[derive(Clone, Debug, PartialEq)]
pub struct StructDecl {
    pub name: Atom,
    pub fields: Vec<Atom>,
}

impl StructDecl {
    /// From a prototype such as `emp(name,age,salary)`.
    pub fn from_term(t: &Term) -> ExpandResult<StructDecl> {
        let bad = || ExpandError::Malformed(format!("structure declaration {}", t));
        let Some((name, arity)) = t.functor() else { return Err(bad()) };
        let mut fields = Vec::with_capacity(arity);
        for a in t.args() {
            let f = a.as_atom().ok_or_else(bad)?;
            if fields.contains(&f) {
                return Err(ExpandError::DuplicateField(f.name().to_string()));
            }
            fields.push(f);
        }
        Ok(StructDecl { name, fields })
    }

    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    /// 1-based position of a field.
    pub fn index(&self, field: Atom) -> ExpandResult<usize> {
        self.fields.iter().position(|f| *f == field).map(|i| i + 1).ok_or_else(|| ExpandError::UnknownField {
            field: field.name().to_string(),
            st: self.name.name().to_string(),
        })
    }
}

/// Where struct declarations are looked up.
pub trait StructScope {
    fn lookup_struct(&self, name: Atom) -> Option<StructDecl>;
}

impl StructScope for HashMap<Atom, StructDecl> {
    fn lookup_struct(&self, name: Atom) -> Option<StructDecl> {
        self.get(&name).cloned()
    }
}

/// Hands out template variables above those already in use.
#[derive(Clone, Copy, Debug)]
pub struct VarGen {
    pub next: u32,
}

impl VarGen {
    pub fn new(next: u32) -> Self {
        VarGen { next }
    }

    pub fn fresh(&mut self) -> Term {
        let v = Term::Var(VarId(self.next));
        self.next += 1;
        v
    }
}

fn lookup(scope: &dyn StructScope, name: Atom) -> ExpandResult<StructDecl> {
    scope.lookup_struct(name).ok_or_else(|| ExpandError::UnknownStruct(name.name().to_string()))
}

/// `Field of Struct` → field number.
pub fn expand_of(scope: &dyn StructScope, field: Atom, name: Atom) -> ExpandResult<usize> {
    lookup(scope, name)?.index(field)
}

fn field_pairs(list: &Term) -> ExpandResult<Vec<(Atom, Term)>> {
    let bad = || ExpandError::Malformed(format!("field list {}", list));
    let mut out = Vec::new();
    let mut cur = list.clone();
    while cur.is_functor(Atom::DOT, 2) {
        let item = cur.arg_at(1).unwrap();
        if !item.is_functor(Atom::COLON, 2) {
            return Err(bad());
        }
        let f = item.arg_at(1).unwrap().as_atom().ok_or_else(bad)?;
        if out.iter().any(|(g, _)| *g == f) {
            return Err(ExpandError::DuplicateUpdate(f.name().to_string()));
        }
        out.push((f, item.arg_at(2).unwrap()));
        cur = cur.arg_at(2).unwrap();
    }
    if cur.as_atom() != Some(Atom::NIL) {
        return Err(bad());
    }
    Ok(out)
}

/// `name{f:V, ...}` (read as `with(name, [f:V, ...])`) → `name(_, V, _)`.
pub fn expand_with(scope: &dyn StructScope, name: Atom, fields: &Term, gen: &mut VarGen) -> ExpandResult<Term> {
    let decl = lookup(scope, name)?;
    let mut args: Vec<Option<Term>> = vec![None; decl.arity()];
    for (f, v) in field_pairs(fields)? {
        args[decl.index(f)? - 1] = Some(v);
    }
    Ok(build(name, args, gen))
}

fn build(name: Atom, args: Vec<Option<Term>>, gen: &mut VarGen) -> Term {
    let args: Vec<Term> = args.into_iter().map(|a| a.unwrap_or_else(|| gen.fresh())).collect();
    if args.is_empty() {
        Term::Atom(name)
    } else {
        Term::compound(name, args)
    }
}

/// `update_struct(Name, [f:V,...], Old, New)` →
/// `Old = name(A1,..), New = name(A1,..,V,..)`.
pub fn expand_update_struct(
    scope: &dyn StructScope,
    name: Atom,
    updates: &Term,
    old: &Term,
    new: &Term,
    gen: &mut VarGen,
) -> ExpandResult<Term> {
    let decl = lookup(scope, name)?;
    let mut old_args: Vec<Option<Term>> = vec![None; decl.arity()];
    let mut new_args: Vec<Option<Term>> = vec![None; decl.arity()];
    for (f, v) in field_pairs(updates)? {
        new_args[decl.index(f)? - 1] = Some(v);
    }
    for i in 0..decl.arity() {
        if new_args[i].is_none() {
            let shared = gen.fresh();
            old_args[i] = Some(shared.clone());
            new_args[i] = Some(shared);
        }
    }
    Ok(Term::compound(
        Atom::COMMA,
        vec![
            Term::compound(Atom::EQ, vec![old.clone(), build(name, old_args, gen)]),
            Term::compound(Atom::EQ, vec![new.clone(), build(name, new_args, gen)]),
        ],
    ))
}

/// Rebuilds `t` bottom-up, offering every compound (after its arguments)
/// to `f`.
pub fn rewrite_bottom_up<E>(t: &Term, f: &mut dyn FnMut(Term) -> Result<Term, E>) -> Result<Term, E> {
    match t {
        Term::Struct(c) => {
            let args: Vec<Term> = c.args().iter().map(|a| rewrite_bottom_up(a, f)).collect::<Result<_, _>>()?;
            f(Term::compound(c.name(), args))
        }
        other => Ok(other.clone()),
    }
}

/// The built-in term macros: `with/2` struct syntax and `of/2`.
pub fn expand_struct_syntax(t: &Term, scope: &dyn StructScope, gen: &mut VarGen) -> ExpandResult<Term> {
    rewrite_bottom_up(t, &mut |t| struct_node(t, scope, gen))
}

fn struct_node(t: Term, scope: &dyn StructScope, gen: &mut VarGen) -> ExpandResult<Term> {
    if t.is_functor(Atom::WITH, 2) {
        if let Some(name) = t.arg_at(1).unwrap().as_atom() {
            return expand_with(scope, name, &t.arg_at(2).unwrap(), gen);
        }
    } else if t.is_functor(Atom::OF, 2) {
        if let (Some(f), Some(s)) = (t.arg_at(1).unwrap().as_atom(), t.arg_at(2).unwrap().as_atom()) {
            return Ok(Term::int(expand_of(scope, f, s)? as i64));
        }
    }
    Ok(t)
}

/// Variables of a template in order of first occurrence.
pub fn template_vars(t: &Term) -> Vec<VarId> {
    let mut out = Vec::new();
    collect_vars(t, &mut out);
    out
}

fn collect_vars(t: &Term, out: &mut Vec<VarId>) {
    match t {
        Term::Var(v) => {
            if !out.contains(v) {
                out.push(*v)
            }
        }
        Term::Struct(c) => c.args().iter().for_each(|a| collect_vars(a, out)),
        _ => {}
    }
}

/// Occurrence count of every variable.
pub fn var_occurrences(t: &Term, counts: &mut HashMap<VarId, usize>) {
    match t {
        Term::Var(v) => *counts.entry(*v).or_default() += 1,
        Term::Struct(c) => c.args().iter().for_each(|a| var_occurrences(a, counts)),
        _ => {}
    }
}

/// Renumbers template variables densely from 0; returns the count.
pub fn compact(t: &Term) -> (Term, u32) {
    let vars = template_vars(t);
    let map: HashMap<VarId, u32> = vars.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
    (renumber(t, &map), vars.len() as u32)
}

fn renumber(t: &Term, map: &HashMap<VarId, u32>) -> Term {
    match t {
        Term::Var(v) => Term::Var(VarId(map[v])),
        Term::Struct(c) => Term::compound(c.name(), c.args().iter().map(|a| renumber(a, map)).collect()),
        other => other.clone(),
    }
}

/// Splits a comma conjunction.
pub fn conjuncts(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut cur = t.clone();
    while cur.is_functor(Atom::COMMA, 2) {
        out.push(cur.arg_at(1).unwrap());
        cur = cur.arg_at(2).unwrap();
    }
    out.push(cur);
    out
}

/// Joins goals into a conjunction; `true` when empty.
pub fn conjoin(goals: Vec<Term>) -> Term {
    goals
        .into_iter()
        .rev()
        .reduce(|acc, g| Term::compound(Atom::COMMA, vec![g, acc]))
        .unwrap_or(Term::Atom(Atom::TRUE))
}
