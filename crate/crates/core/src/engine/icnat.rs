//! Natives of the `ic` module.

use std::collections::BTreeSet;

use super::builtins::{int_arg, list_arg, ok, unify};
use super::{Ctx, Engine, EngineError, EngineResult, NativeFn, Outcome};
use crate::arith;
use crate::atom::Atom;
use crate::ic::{self, linear, props, Domain, IcError};
use crate::number::Number;
use crate::susp::Cond;
use crate::term::Term;

type R = EngineResult<Outcome>;

/// Variables and numbers of a var, list, array or nested mix of those.
fn flatten(e: &Engine, t: &Term, out: &mut Vec<Term>) -> EngineResult<()> {
    let t = e.store.deref(t);
    match &t {
        Term::Var(_) => out.push(t),
        n if n.is_number() => out.push(t),
        Term::Atom(Atom::NIL) => {}
        Term::Struct(c) if c.name() == Atom::NIL => {
            for a in c.args().iter() {
                flatten(e, a, out)?;
            }
        }
        Term::Struct(c) if c.name() == Atom::DOT && c.arity() == 2 => {
            let items = list_arg(e, &t)?;
            for a in &items {
                flatten(e, a, out)?;
            }
        }
        other => return Err(EngineError::Type(format!("variable or number expected, found {}", other))),
    }
    Ok(())
}

fn eval_bound(e: &Engine, t: &Term) -> EngineResult<Number> {
    Ok(arith::eval(&e.store, t)?)
}

fn range(e: &Engine, t: &Term) -> EngineResult<Option<(Number, Number)>> {
    let t = e.store.deref(t);
    if t.is_functor(Atom::new(".."), 2) {
        let (l, h) = (eval_bound(e, &t.arg_at(1).unwrap())?, eval_bound(e, &t.arg_at(2).unwrap())?);
        return Ok(Some((l, h)));
    }
    Ok(None)
}

fn as_i64(n: &Number) -> EngineResult<i64> {
    n.as_i64().ok_or_else(|| EngineError::Type(format!("integer expected in domain, found {}", Term::from_number(n.clone()))))
}

/// Parses `Lo..Hi` or a list of integers and integer ranges.
fn parse_domain(e: &Engine, t: &Term) -> EngineResult<Domain> {
    if let Some((l, h)) = range(e, t)? {
        let integral = l.is_integer() && h.is_integer();
        let (lo, hi) = (l.to_interval().lo(), h.to_interval().hi());
        return Ok(if integral { Domain::integer(lo, hi) } else { Domain::real(lo, hi) });
    }
    let items = match e.store.list_items(t) {
        Some(items) if !items.is_empty() => items,
        _ => return Err(EngineError::Type(format!("domain expected, found {}", e.store.resolve_deep(t)))),
    };
    let mut values = BTreeSet::new();
    for i in &items {
        match range(e, i)? {
            Some((l, h)) => {
                values.extend(as_i64(&l)?..=as_i64(&h)?);
            }
            None => {
                values.insert(as_i64(&eval_bound(e, i)?)?);
            }
        }
    }
    let (Some(&lo), Some(&hi)) = (values.first(), values.last()) else {
        return Ok(Domain::integer(1.0, 0.0));
    };
    let mut d = Domain::integer(lo as f64, hi as f64);
    d.holes = (lo..=hi).filter(|x| !values.contains(x)).collect();
    Ok(d)
}

fn b_domain(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let d = parse_domain(e, &a[1])?;
    let mut vs = Vec::new();
    flatten(e, &a[0], &mut vs)?;
    for v in vs {
        if !ic::impose_domain(&mut e.store, &v, &d) {
            return Ok(Outcome::Fail);
        }
    }
    Ok(Outcome::True)
}

fn b_integers(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let mut vs = Vec::new();
    flatten(e, &a[0], &mut vs)?;
    for v in vs {
        if !ic::impose_integrality(&mut e.store, &v) {
            return Ok(Outcome::Fail);
        }
    }
    Ok(Outcome::True)
}

fn b_reals(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let mut vs = Vec::new();
    flatten(e, &a[0], &mut vs)?;
    for v in vs {
        if let Term::Var(x) = e.store.deref(&v) {
            if ic::domain(&e.store, x).is_none() {
                ic::domain_mut(&mut e.store, x);
            }
        }
    }
    Ok(Outcome::True)
}

/// Posts `Lhs Op Rhs`. Constraints that are not linear yet wait until
/// enough of their variables are known.
fn post_constraint(e: &mut Engine, op: &str, a: &[Term], ctx: &Ctx) -> R {
    match linear::normalize(&e.store, op, &a[0], &a[1]) {
        Ok(con) => ok(linear::post(&mut e.store, &con, ctx.demon())?),
        Err(IcError::Unsupported(_)) | Err(IcError::Instantiation) => {
            let goal = Term::app(op, vec![a[0].clone(), a[1].clone()]);
            let vars = e.store.term_vars(&goal);
            if vars.is_empty() {
                return Err(EngineError::Unsupported(format!("cannot handle constraint {}", e.store.resolve_deep(&goal))));
            }
            let id = e
                .store
                .make_suspension(goal, Atom::IC, 5, false)
                .map_err(|err| EngineError::Internal(err.to_string()))?;
            for v in vars {
                e.store.attach(v, Cond::Inst, id);
            }
            Ok(Outcome::True)
        }
        Err(err) => Err(err.into()),
    }
}

macro_rules! constraints {
    ($($name:ident = $op:expr),* $(,)?) => {
        $(fn $name(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
            post_constraint(e, $op, a, ctx)
        })*
        const CONSTRAINTS: &[(&str, NativeFn)] = &[$(($op, $name)),*];
    };
}

constraints! {
    c_int_eq = "#=",
    c_int_ne = "#\\=",
    c_int_lt = "#<",
    c_int_le = "#=<",
    c_int_gt = "#>",
    c_int_ge = "#>=",
    c_real_eq = "$=",
    c_real_ne = "$\\=",
    c_real_lt = "$<",
    c_real_le = "$=<",
    c_real_gt = "$>",
    c_real_ge = "$>=",
}

fn b_lin_con(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    let g = Term::app("ic_lin_con", a.to_vec());
    ok(linear::run(&mut e.store, &g, ctx.demon())?)
}

fn b_alldifferent(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    let mut vs = Vec::new();
    flatten(e, &a[0], &mut vs)?;
    ok(props::alldifferent(&mut e.store, &Term::list(vs), ctx.demon())?)
}

fn bound_arg(e: &Engine, t: &Term) -> EngineResult<f64> {
    let n = eval_bound(e, t)?;
    Ok(n.to_f64())
}

fn b_impose_min(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let b = bound_arg(e, &a[1])?;
    ok(ic::impose_min(&mut e.store, &a[0], b))
}

fn b_impose_max(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let b = bound_arg(e, &a[1])?;
    ok(ic::impose_max(&mut e.store, &a[0], b))
}

fn b_exclude(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let k = int_arg(e, &a[1])?;
    ok(ic::exclude(&mut e.store, &a[0], k))
}

fn is_integral(e: &Engine, t: &Term) -> bool {
    match e.store.deref(t) {
        Term::Var(v) => ic::domain(&e.store, v).is_some_and(|d| d.integral),
        other => other.is_integer(),
    }
}

fn bound_value(integral: bool, x: f64) -> Term {
    if integral && x.is_finite() {
        Term::int(x as i64)
    } else {
        Term::Float(x)
    }
}

fn b_get_min(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (lo, _) = ic::bounds(&e.store, &a[0]);
    let t = bound_value(is_integral(e, &a[0]), lo);
    unify(e, &a[1], &t)
}

fn b_get_max(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (_, hi) = ic::bounds(&e.store, &a[0]);
    let t = bound_value(is_integral(e, &a[0]), hi);
    unify(e, &a[1], &t)
}

fn b_get_bounds(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (lo, hi) = ic::bounds(&e.store, &a[0]);
    let i = is_integral(e, &a[0]);
    let (l, h) = (bound_value(i, lo), bound_value(i, hi));
    ok(crate::attvar::unify(&mut e.store, &a[1], &l) && crate::attvar::unify(&mut e.store, &a[2], &h))
}

fn size_of(e: &Engine, t: &Term) -> Option<u64> {
    match e.store.deref(t) {
        Term::Var(v) => ic::domain(&e.store, v).and_then(|d| d.size()),
        n if n.is_number() => Some(1),
        _ => None,
    }
}

fn b_get_domain_size(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    match size_of(e, &a[0]) {
        Some(n) => unify(e, &a[1], &Term::int(n as i64)),
        None => Err(EngineError::Type(format!("finite integer domain expected for {}", e.store.resolve_deep(&a[0])))),
    }
}

fn b_is_solver_var(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(matches!(e.store.deref(&a[0]), Term::Var(v) if ic::domain(&e.store, v).is_some()))
}

/// `'$ic_values'(X, Values)`: the values of a finite integer domain.
fn b_values(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let vals = match e.store.deref(&a[0]) {
        Term::Var(v) => ic::domain(&e.store, v).and_then(|d| d.values()),
        Term::Int(i) => Some(vec![i]),
        _ => None,
    };
    match vals {
        Some(vs) => unify(e, &a[1], &Term::list(vs.into_iter().map(Term::int).collect::<Vec<_>>())),
        None => Err(EngineError::Unsupported(format!(
            "cannot enumerate {}: not a finite integer domain",
            e.store.resolve_deep(&a[0])
        ))),
    }
}

/// `'$select_var'(Vars, X, Rest)`: the unbound variable with the smallest
/// domain (first one on ties) and the other unbound ones.
fn b_select_var(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let vars: Vec<Term> = list_arg(e, &a[0])?.into_iter().filter(|t| e.store.deref(t).is_var()).collect();
    let mut best: Option<(usize, u64)> = None;
    for (i, v) in vars.iter().enumerate() {
        let s = size_of(e, v).unwrap_or(u64::MAX);
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    let Some((i, _)) = best else { return Ok(Outcome::Fail) };
    let mut rest = vars;
    let x = rest.remove(i);
    ok(crate::attvar::unify(&mut e.store, &a[1], &x) && crate::attvar::unify(&mut e.store, &a[2], &Term::list(rest)))
}

fn b_ic_vars(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let mut vs = Vec::new();
    flatten(e, &a[0], &mut vs)?;
    unify(e, &a[1], &Term::list(vs))
}

fn b_bad_selection(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    Err(EngineError::Domain(format!("unknown variable selection {}", e.store.resolve_deep(&a[0]))))
}

pub(super) fn install(e: &mut Engine) {
    let table: &[(&str, usize, NativeFn)] = &[
        ("::", 2, b_domain),
        ("integers", 1, b_integers),
        ("reals", 1, b_reals),
        ("ic_lin_con", 3, b_lin_con),
        ("alldifferent", 1, b_alldifferent),
        ("impose_min", 2, b_impose_min),
        ("impose_max", 2, b_impose_max),
        ("exclude", 2, b_exclude),
        ("get_min", 2, b_get_min),
        ("get_max", 2, b_get_max),
        ("get_bounds", 3, b_get_bounds),
        ("get_domain_size", 2, b_get_domain_size),
        ("is_solver_var", 1, b_is_solver_var),
        ("$ic_values", 2, b_values),
        ("$select_var", 3, b_select_var),
        ("$ic_vars", 2, b_ic_vars),
        ("$ic_bad_selection", 1, b_bad_selection),
    ];
    for (name, arity, f) in table {
        e.register_native(Atom::IC, name, *arity, *f);
    }
    for (op, f) in CONSTRAINTS {
        e.register_native(Atom::IC, op, 2, *f);
    }
}
