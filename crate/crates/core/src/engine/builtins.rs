//! Built-in predicates of the `system` module.

use std::cmp::Ordering;

use super::{Ctx, Engine, EngineError, EngineResult, NativeFn, Outcome};
use crate::arith;
use crate::atom::Atom;
use crate::attvar::{self, AttrSpec, AttrValue};
use crate::number::{NumRel, Number};
use crate::reader::WriteOpts;
use crate::susp::{parse_cond, Cond, SuspState};
use crate::term::{compare_terms, Term};

type R = EngineResult<Outcome>;

pub(super) fn ok(b: bool) -> R {
    Ok(if b { Outcome::True } else { Outcome::Fail })
}

pub(super) fn unify(e: &mut Engine, a: &Term, b: &Term) -> R {
    ok(attvar::unify(&mut e.store, a, b))
}

fn type_err(what: &str, t: &Term) -> EngineError {
    EngineError::Type(format!("{} expected, found {}", what, t))
}

pub(super) fn atom_arg(e: &Engine, t: &Term) -> EngineResult<Atom> {
    match e.store.deref(t) {
        Term::Atom(a) => Ok(a),
        Term::Var(_) => Err(EngineError::Instantiation("atom argument".into())),
        other => Err(type_err("atom", &other)),
    }
}

pub(super) fn int_arg(e: &Engine, t: &Term) -> EngineResult<i64> {
    match e.store.deref(t) {
        Term::Int(i) => Ok(i),
        Term::Var(_) => Err(EngineError::Instantiation("integer argument".into())),
        other => Err(type_err("integer", &other)),
    }
}

pub(super) fn list_arg(e: &Engine, t: &Term) -> EngineResult<Vec<Term>> {
    e.store.list_items(t).ok_or_else(|| match e.store.deref(t) {
        Term::Var(_) => EngineError::Instantiation("list argument".into()),
        other => type_err("list", &other),
    })
}

/// Runs `f` inside a temporary choicepoint and undoes its effects.
fn probe(e: &mut Engine, f: impl FnOnce(&mut Engine) -> bool) -> bool {
    let m = e.store.push_choicepoint();
    let r = f(e);
    e.store.pop_choicepoint(m).expect("fresh mark");
    r
}

fn cmp(e: &Engine, a: &Term, b: &Term) -> Ordering {
    compare_terms(a, b, &e.store)
}

// ---- unification and comparison ----

fn b_unify(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    unify(e, &a[0], &a[1])
}

fn b_not_unify(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(!probe(e, |e| attvar::unify(&mut e.store, &a[0], &a[1])))
}

fn b_identical(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) == Ordering::Equal)
}

fn b_not_identical(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) != Ordering::Equal)
}

fn b_lt(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) == Ordering::Less)
}

fn b_gt(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) == Ordering::Greater)
}

fn b_le(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) != Ordering::Greater)
}

fn b_ge(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    ok(cmp(e, &a[0], &a[1]) != Ordering::Less)
}

fn b_compare(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let o = match cmp(e, &a[1], &a[2]) {
        Ordering::Less => "<",
        Ordering::Equal => "=",
        Ordering::Greater => ">",
    };
    unify(e, &a[0], &Term::atom(o))
}

// ---- type tests ----

macro_rules! type_test {
    ($name:ident, |$t:ident, $e:ident| $body:expr) => {
        fn $name($e: &mut Engine, a: &[Term], _: &Ctx) -> R {
            let $t = $e.store.deref(&a[0]);
            ok($body)
        }
    };
}

type_test!(b_var, |t, e| t.is_var());
type_test!(b_nonvar, |t, e| !t.is_var());
type_test!(b_atom, |t, e| t.as_atom().is_some());
type_test!(b_number, |t, e| t.is_number());
type_test!(b_integer, |t, e| t.is_integer());
type_test!(b_float, |t, e| matches!(t, Term::Float(_)));
type_test!(b_rational, |t, e| matches!(t, Term::Rat(_)) || t.is_integer());
type_test!(b_breal, |t, e| matches!(t, Term::Breal(_)));
type_test!(b_atomic, |t, e| t.is_atomic());
type_test!(b_compound, |t, e| matches!(t, Term::Struct(_)));
type_test!(b_callable, |t, e| t.is_callable());
type_test!(b_string, |t, e| matches!(t, Term::Str(_)));
type_test!(b_is_list, |t, e| e.store.list_items(&t).is_some());
type_test!(b_ground, |t, e| e.store.is_ground(&t));
type_test!(b_is_suspension, |t, e| matches!(t, Term::Susp(_)));

// ---- term construction and inspection ----

fn b_functor(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    match e.store.deref(&a[0]) {
        Term::Var(_) => {
            let n = int_arg(e, &a[2])?;
            let name = e.store.deref(&a[1]);
            let t = if n == 0 {
                if !name.is_atomic() {
                    return Err(type_err("atomic", &name));
                }
                name
            } else if n < 0 {
                return Err(EngineError::Domain(format!("negative arity {}", n)));
            } else {
                let f = atom_arg(e, &name)?;
                let args = (0..n).map(|_| e.store.new_var()).collect();
                Term::compound(f, args)
            };
            unify(e, &a[0], &t)
        }
        Term::Struct(c) => {
            let (n, ar) = (Term::Atom(c.name()), Term::int(c.arity() as i64));
            ok(attvar::unify(&mut e.store, &a[1], &n) && attvar::unify(&mut e.store, &a[2], &ar))
        }
        other => ok(attvar::unify(&mut e.store, &a[1], &other) && attvar::unify(&mut e.store, &a[2], &Term::int(0))),
    }
}

fn b_arg(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let n = int_arg(e, &a[0])?;
    let t = e.store.deref(&a[1]);
    match &t {
        Term::Struct(_) => {
            let x = t.arg_at(n).map_err(|err| EngineError::Range(err.to_string()))?;
            unify(e, &a[2], &x)
        }
        Term::Var(_) => Err(EngineError::Instantiation("arg/3".into())),
        other => Err(type_err("compound", other)),
    }
}

fn b_univ(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    match e.store.deref(&a[0]) {
        Term::Var(_) => {
            let items = list_arg(e, &a[1])?;
            let Some((f, args)) = items.split_first() else {
                return Err(EngineError::Domain("non-empty list expected in =..".into()));
            };
            let f = e.store.deref(f);
            let t = if args.is_empty() {
                f
            } else {
                Term::compound(atom_arg(e, &f)?, args.to_vec())
            };
            unify(e, &a[0], &t)
        }
        Term::Struct(c) => {
            let mut items = vec![Term::Atom(c.name())];
            items.extend(c.args().iter().cloned());
            unify(e, &a[1], &Term::list(items))
        }
        other => unify(e, &a[1], &Term::list(vec![other])),
    }
}

fn b_copy_term(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let c = e.store.copy_term(&a[0]);
    unify(e, &a[1], &c)
}

fn b_setarg(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let n = int_arg(e, &a[0])?;
    let s = e.store.deref(&a[1]);
    if s.is_var() {
        return Err(EngineError::Instantiation("setarg/3".into()));
    }
    let v = e.store.deref(&a[2]);
    e.store.set_arg(n, &s, v).map_err(|err| match err {
        crate::term::TermError::Range { .. } => EngineError::Range(err.to_string()),
        other => EngineError::Type(other.to_string()),
    })?;
    Ok(Outcome::True)
}

fn b_term_variables(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let vs = e.store.term_vars(&a[0]).into_iter().map(Term::Var).collect::<Vec<_>>();
    unify(e, &a[1], &Term::list(vs))
}

// ---- arithmetic ----

fn b_is(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let n = arith::eval(&e.store, &a[1])?;
    unify(e, &a[0], &Term::from_number(n))
}

macro_rules! num_cmp {
    ($name:ident, $rel:expr) => {
        fn $name(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
            ok(arith::compare(&e.store, $rel, &a[0], &a[1])?)
        }
    };
}

num_cmp!(b_num_eq, NumRel::Eq);
num_cmp!(b_num_ne, NumRel::Ne);
num_cmp!(b_num_lt, NumRel::Lt);
num_cmp!(b_num_le, NumRel::Le);
num_cmp!(b_num_gt, NumRel::Gt);
num_cmp!(b_num_ge, NumRel::Ge);

fn eval_int(e: &Engine, t: &Term) -> EngineResult<i64> {
    match arith::eval(&e.store, t)? {
        Number::Int(i) => i64::try_from(&i).map_err(|_| EngineError::Range("loop bound too large".into())),
        other => Err(EngineError::Type(format!("integer loop bound expected, found {}", Term::from_number(other)))),
    }
}

/// `'$for_init'(From, To, Step, First, StepVal, Stop)`: evaluates the
/// bounds of an integer loop once and computes where it stops.
fn b_for_init(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (f, t, s) = (eval_int(e, &a[0])?, eval_int(e, &a[1])?, eval_int(e, &a[2])?);
    if s == 0 {
        return Err(EngineError::Domain("loop step must not be zero".into()));
    }
    let n = (num_integer::Integer::div_floor(&(t - f), &s) + 1).max(0);
    let stop = f + n * s;
    let st = &mut e.store;
    ok(attvar::unify(st, &a[3], &Term::int(f))
        && attvar::unify(st, &a[4], &Term::int(s))
        && attvar::unify(st, &a[5], &Term::int(stop)))
}

fn b_succ_or_fail(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    // plus/3 in the one mode loops need
    let (x, y) = (arith::eval(&e.store, &a[0])?, arith::eval(&e.store, &a[1])?);
    unify(e, &a[2], &Term::from_number(x.add(&y).map_err(|err| EngineError::Eval(err.to_string()))?))
}

// ---- arrays ----

fn b_dim(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let t = e.store.deref(&a[0]);
    if t.is_var() {
        let dims = arith::dims_of(&e.store, &a[1])?;
        let arr = arith::dim_create(&mut e.store, &dims);
        return unify(e, &a[0], &arr);
    }
    match arith::dim_inspect(&e.store, &t) {
        Some(dims) => {
            let l = Term::list(dims.into_iter().map(|d| Term::int(d as i64)).collect::<Vec<_>>());
            unify(e, &a[1], &l)
        }
        None => Err(type_err("array", &t)),
    }
}

fn b_subscript(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let x = arith::subscript(&e.store, &a[0], &a[1])?;
    unify(e, &a[2], &x)
}

// ---- sorting ----

fn sort_items(e: &Engine, t: &Term, key: i64, order: &str) -> EngineResult<Vec<Term>> {
    let items: Vec<Term> = list_arg(e, t)?.iter().map(|x| e.store.deref(x)).collect();
    let keyed = |x: &Term| -> EngineResult<Term> {
        if key == 0 {
            return Ok(x.clone());
        }
        match x {
            Term::Struct(_) => x.arg_at(key).map_err(|err| EngineError::Range(err.to_string())),
            Term::Var(_) => Err(EngineError::Instantiation("sort key".into())),
            other => Err(type_err("compound", other)),
        }
    };
    let mut pairs: Vec<(Term, Term)> = items.into_iter().map(|x| Ok((keyed(&x)?, x))).collect::<EngineResult<_>>()?;
    let (desc, dedup) = match order {
        "@<" | "<" => (false, true),
        "@=<" | "=<" => (false, false),
        "@>" | ">" => (true, true),
        "@>=" | ">=" => (true, false),
        other => return Err(EngineError::Domain(format!("unknown sort order {}", other))),
    };
    pairs.sort_by(|x, y| {
        let o = cmp(e, &x.0, &y.0);
        if desc {
            o.reverse()
        } else {
            o
        }
    });
    if dedup {
        pairs.dedup_by(|x, y| cmp(e, &x.0, &y.0) == Ordering::Equal);
    }
    Ok(pairs.into_iter().map(|(_, x)| x).collect())
}

fn b_sort(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let s = sort_items(e, &a[0], 0, "@<")?;
    unify(e, &a[1], &Term::list(s))
}

fn b_msort(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let s = sort_items(e, &a[0], 0, "@=<")?;
    unify(e, &a[1], &Term::list(s))
}

fn b_sort4(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let key = int_arg(e, &a[0])?;
    let order = atom_arg(e, &a[1])?;
    let s = sort_items(e, &a[2], key, order.name())?;
    unify(e, &a[3], &Term::list(s))
}

fn b_keysort(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    for x in list_arg(e, &a[0])? {
        if !e.store.deref(&x).is_functor(Atom::MINUS, 2) {
            return Err(type_err("Key-Value pair", &x));
        }
    }
    let s = sort_items(e, &a[0], 1, "@=<")?;
    unify(e, &a[1], &Term::list(s))
}

// ---- atoms and text ----

fn text_of(e: &mut Engine, t: &Term) -> EngineResult<String> {
    match e.store.deref(t) {
        Term::Atom(a) => Ok(a.name().to_string()),
        Term::Str(s) => Ok(s.to_string()),
        Term::Var(_) => Err(EngineError::Instantiation("text argument".into())),
        n if n.is_number() => e.format_term(&n, WriteOpts::plain(), Atom::USER),
        other => Err(type_err("atomic", &other)),
    }
}

fn parse_number(e: &Engine, s: &str) -> Option<Term> {
    let rt = crate::reader::read_term(&format!("{} .", s), e.ops(Atom::USER)).ok()?;
    let t = rt.term;
    if t.is_number() {
        return Some(t);
    }
    // a leading minus reads as a negative literal or as -(N)
    if t.is_functor(Atom::MINUS, 1) {
        let n = t.arg_at(1).ok()?.to_number()?;
        return Some(Term::from_number(n.neg()));
    }
    None
}

fn b_atom_length(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let s = text_of(e, &a[0])?;
    unify(e, &a[1], &Term::int(s.chars().count() as i64))
}

fn codes_to_string(e: &Engine, t: &Term, chars: bool) -> EngineResult<String> {
    let mut s = String::new();
    for x in list_arg(e, t)? {
        let x = e.store.deref(&x);
        let c = if chars {
            x.as_atom().and_then(|a| {
                let mut it = a.name().chars();
                let c = it.next()?;
                it.next().is_none().then_some(c)
            })
        } else {
            x.as_int().and_then(|i| char::from_u32(i as u32))
        };
        s.push(c.ok_or_else(|| type_err(if chars { "character" } else { "character code" }, &x))?);
    }
    Ok(s)
}

fn string_to_list(s: &str, chars: bool) -> Term {
    Term::list(
        s.chars()
            .map(|c| if chars { Term::atom(&c.to_string()) } else { Term::int(c as i64) })
            .collect::<Vec<_>>(),
    )
}

fn b_atom_codes(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    atom_list(e, a, false)
}

fn b_atom_chars(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    atom_list(e, a, true)
}

fn atom_list(e: &mut Engine, a: &[Term], chars: bool) -> R {
    if e.store.deref(&a[0]).is_var() {
        let s = codes_to_string(e, &a[1], chars)?;
        unify(e, &a[0], &Term::atom(&s))
    } else {
        let s = text_of(e, &a[0])?;
        unify(e, &a[1], &string_to_list(&s, chars))
    }
}

fn b_number_codes(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    if e.store.deref(&a[0]).is_var() {
        let s = codes_to_string(e, &a[1], false)?;
        match parse_number(e, &s) {
            Some(n) => unify(e, &a[0], &n),
            None => Err(EngineError::Type(format!("number text expected, found \"{}\"", s))),
        }
    } else {
        let s = text_of(e, &a[0])?;
        unify(e, &a[1], &string_to_list(&s, false))
    }
}

fn b_atom_number(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let s = text_of(e, &a[0])?;
    match parse_number(e, &s) {
        Some(n) => unify(e, &a[1], &n),
        None => Ok(Outcome::Fail),
    }
}

fn b_char_code(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    match e.store.deref(&a[0]) {
        Term::Atom(c) => {
            let mut it = c.name().chars();
            match (it.next(), it.next()) {
                (Some(ch), None) => unify(e, &a[1], &Term::int(ch as i64)),
                _ => Err(type_err("character", &a[0])),
            }
        }
        _ => {
            let n = int_arg(e, &a[1])?;
            let c = char::from_u32(n as u32).ok_or_else(|| type_err("character code", &a[1]))?;
            unify(e, &a[0], &Term::atom(&c.to_string()))
        }
    }
}

fn b_atom_concat(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (x, y) = (e.store.deref(&a[0]), e.store.deref(&a[1]));
    if !x.is_var() && !y.is_var() {
        let s = text_of(e, &x)? + &text_of(e, &y)?;
        return unify(e, &a[2], &Term::atom(&s));
    }
    let whole = text_of(e, &a[2])?;
    // enumerate the splits as a disjunction
    let mut alts: Vec<Term> = Vec::new();
    for (i, _) in whole.char_indices().chain(std::iter::once((whole.len(), ' '))) {
        let (p, q) = whole.split_at(i);
        alts.push(Term::compound(
            Atom::COMMA,
            vec![
                Term::compound(Atom::EQ, vec![a[0].clone(), Term::atom(p)]),
                Term::compound(Atom::EQ, vec![a[1].clone(), Term::atom(q)]),
            ],
        ));
    }
    let goal = alts.into_iter().rev().reduce(|acc, g| Term::compound(Atom::SEMI, vec![g, acc])).unwrap();
    Ok(Outcome::Goal(goal))
}

fn b_term_to_atom(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    match e.store.deref(&a[1]) {
        Term::Atom(s) => {
            let rt = crate::reader::read_term(&format!("{} .", s.name()), e.ops(ctx.module))?;
            let t = e.store.instantiate(&rt.term, &mut Vec::new());
            unify(e, &a[0], &t)
        }
        _ => {
            let s = e.format_term(&a[0], WriteOpts::quoted(), ctx.module)?;
            unify(e, &a[1], &Term::atom(&s))
        }
    }
}

// ---- output ----

fn write_with(e: &mut Engine, t: &Term, opts: WriteOpts, ctx: &Ctx) -> R {
    let s = e.format_term(t, opts, ctx.module)?;
    e.write_out(&s);
    Ok(Outcome::True)
}

fn b_write(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    write_with(e, &a[0], WriteOpts::plain(), ctx)
}

fn b_writeln(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    write_with(e, &a[0], WriteOpts::plain(), ctx)?;
    e.write_out("\n");
    Ok(Outcome::True)
}

fn b_writeq(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    write_with(e, &a[0], WriteOpts::quoted(), ctx)
}

fn b_print(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    write_with(e, &a[0], WriteOpts { annotate: true, ..WriteOpts::quoted() }, ctx)
}

fn b_write_canonical(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    write_with(e, &a[0], WriteOpts::canonical(), ctx)
}

fn b_nl(e: &mut Engine, _: &[Term], _: &Ctx) -> R {
    e.write_out("\n");
    Ok(Outcome::True)
}

fn b_tab(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let n = int_arg(e, &a[0])?;
    e.write_out(&" ".repeat(n.max(0) as usize));
    Ok(Outcome::True)
}

// ---- all-solutions ----

/// `findall/3`. A solution of the subgoal that leaves new suspensions
/// behind is an error: its answer would not be a logical consequence.
fn b_findall(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    let start = e.store.suspension_count();
    let template = a[0].clone();
    let mut found = Vec::new();
    e.sub_solve(a[1].clone(), ctx.module, &mut |e| {
        let left = e.delayed_since(start);
        if !left.is_empty() {
            return Err(EngineError::Floundering(e.goal_texts(&left)));
        }
        found.push(e.store.detach(&template).0);
        Ok(true)
    })?;
    let items: Vec<Term> = found.iter().map(|t| e.store.instantiate(t, &mut Vec::new())).collect();
    unify(e, &a[2], &Term::list(items))
}

// ---- suspensions ----

fn prio_arg(e: &Engine, t: &Term) -> EngineResult<i64> {
    int_arg(e, t)
}

/// Strips `M:` qualification, returning the goal and its module.
fn goal_module(e: &Engine, g: &Term, module: Atom) -> EngineResult<(Term, Atom)> {
    let g = e.store.deref(g);
    if g.is_functor(Atom::COLON, 2) {
        let m = atom_arg(e, &g.arg_at(1).unwrap())?;
        return goal_module(e, &g.arg_at(2).unwrap(), m);
    }
    match &g {
        Term::Var(_) => Err(EngineError::Instantiation("suspended goal".into())),
        t if t.is_callable() => Ok((g, module)),
        other => Err(type_err("callable", other)),
    }
}

fn is_demon(e: &Engine, goal: &Term, module: Atom) -> bool {
    let Some(key) = goal.functor() else { return false };
    if e.modules.get(&module).is_some_and(|m| m.demons.contains(&key)) {
        return true;
    }
    matches!(e.resolve(key.0, key.1, module, None), Ok(super::machine::Target::Clauses(_, def))
        if e.modules[&def].demons.contains(&key))
}

fn new_suspension(e: &mut Engine, g: &Term, prio: &Term, ctx: &Ctx) -> EngineResult<crate::term::SuspId> {
    let (goal, module) = goal_module(e, g, ctx.module)?;
    let p = prio_arg(e, prio)?;
    let demon = is_demon(e, &goal, module);
    e.store.make_suspension(goal, module, p, demon).map_err(|err| EngineError::Domain(err.to_string()))
}

fn b_make_suspension(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    let id = new_suspension(e, &a[0], &a[1], ctx)?;
    unify(e, &a[2], &Term::Susp(id))
}

fn susp_arg(e: &Engine, t: &Term) -> EngineResult<crate::term::SuspId> {
    match e.store.deref(t) {
        Term::Susp(id) => Ok(id),
        Term::Var(_) => Err(EngineError::Instantiation("suspension argument".into())),
        other => Err(type_err("suspension", &other)),
    }
}

fn cond_arg(e: &Engine, t: &Term) -> EngineResult<Cond> {
    parse_cond(&e.store.resolve_deep(t)).map_err(|err| EngineError::Domain(err.to_string()))
}

/// Parses `Vars->Cond` or a list of them.
fn waking_spec(e: &Engine, spec: &Term) -> EngineResult<Vec<(Term, Cond)>> {
    let spec = e.store.deref(spec);
    if let Some(items) = e.store.list_items(&spec) {
        let mut out = Vec::new();
        for i in items {
            out.extend(waking_spec(e, &i)?);
        }
        return Ok(out);
    }
    if spec.is_functor(Atom::ARROW, 2) {
        let s = spec.as_struct().unwrap();
        return Ok(vec![(s.arg(0), cond_arg(e, &s.arg(1))?)]);
    }
    Err(type_err("waking specification Vars->Cond", &spec))
}

fn b_insert_suspension(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let id = susp_arg(e, &a[1])?;
    let cond = cond_arg(e, &a[2])?;
    for v in e.store.term_vars(&a[0]) {
        e.store.attach(v, cond, id);
    }
    Ok(Outcome::True)
}

fn suspend(e: &mut Engine, a: &[Term], ctx: &Ctx) -> EngineResult<Option<crate::term::SuspId>> {
    let spec = waking_spec(e, &a[2])?;
    let targets: Vec<(crate::term::VarId, Cond)> =
        spec.iter().flat_map(|(t, c)| e.store.term_vars(t).into_iter().map(move |v| (v, *c))).collect();
    if targets.is_empty() {
        return Ok(None);
    }
    let id = new_suspension(e, &a[0], &a[1], ctx)?;
    for (v, c) in targets {
        e.store.attach(v, c, id);
    }
    Ok(Some(id))
}

/// `suspend(Goal, Prio, Spec)`: with nothing left to wait for, the goal
/// runs at once.
fn b_suspend(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    match suspend(e, a, ctx)? {
        Some(_) => Ok(Outcome::True),
        None => Ok(Outcome::Goal(a[0].clone())),
    }
}

fn b_suspend4(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    match suspend(e, a, ctx)? {
        Some(id) => unify(e, &a[3], &Term::Susp(id)),
        None => Ok(Outcome::Goal(a[0].clone())),
    }
}

fn b_kill_suspension(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let id = susp_arg(e, &a[0])?;
    e.store.kill(id);
    Ok(Outcome::True)
}

fn b_schedule_suspension(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let id = susp_arg(e, &a[0])?;
    e.store.schedule(id);
    Ok(Outcome::True)
}

fn b_suspension_state(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let id = susp_arg(e, &a[0])?;
    let s = match e.store.susp_state(id) {
        SuspState::Suspended => "suspended",
        SuspState::Scheduled => "scheduled",
        SuspState::Executed => "executed",
    };
    unify(e, &a[1], &Term::atom(s))
}

fn b_suspension_goal(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let id = susp_arg(e, &a[0])?;
    let g = e.store.suspension(id).goal.clone();
    unify(e, &a[1], &g)
}

fn b_delayed_goals(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let goals: Vec<Term> = e.store.delayed_goals().into_iter().map(|id| e.store.suspension(id).goal.clone()).collect();
    unify(e, &a[0], &Term::list(goals))
}

fn b_current_suspension(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let ids: Vec<Term> = e.store.delayed_goals().into_iter().map(Term::Susp).collect();
    let goal = Term::app("member", vec![a[0].clone(), Term::list(ids)]);
    Ok(Outcome::Goal(goal))
}

/// Records a term for the host; used to observe execution order.
fn b_log_event(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let t = e.store.detach(&a[0]).0;
    e.events.push(t);
    Ok(Outcome::True)
}

/// `undo(Goal)`: runs `Goal` (for its side effects) when execution
/// backtracks over this point.
fn b_undo(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let g = e.store.detach(&a[0]).0;
    let q = e.undo_queue.clone();
    e.store.register_undo(move |_| q.borrow_mut().push(g));
    Ok(Outcome::True)
}

// ---- attributes ----

fn b_meta_attribute(e: &mut Engine, a: &[Term], ctx: &Ctx) -> R {
    let name = atom_arg(e, &a[0])?;
    let mut spec = AttrSpec::new(name);
    for h in list_arg(e, &a[1])? {
        let h = e.store.deref(&h);
        if h.is_functor(Atom::COLON, 2) && h.arg_at(1).unwrap().as_atom() == Some(Atom::new("unify")) {
            let (p, module) = goal_module(e, &h.arg_at(2).unwrap(), ctx.module)?;
            let p = match &p {
                t if t.is_functor(Atom::SLASH, 2) => atom_arg(e, &t.arg_at(1).unwrap())?,
                t => atom_arg(e, t)?,
            };
            spec.unify_goal = Some((module, p));
        } else {
            return Err(EngineError::Domain(format!("unknown attribute handler {}", h)));
        }
    }
    e.store.register_attribute(spec).map_err(|err| EngineError::Domain(err.to_string()))?;
    Ok(Outcome::True)
}

/// `add_attribute(Var, Value, Name)`
fn b_add_attribute(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let name = atom_arg(e, &a[2])?;
    if e.store.attr_spec(name).is_none() {
        return Err(EngineError::Existence(format!("attribute {}", name)));
    }
    let v = e.store.resolve_deep(&a[1]);
    e.store.add_attr(&a[0], name, v).map_err(|_| EngineError::Instantiation("add_attribute/3".into()))?;
    if let Term::Var(x) = e.store.deref(&a[0]) {
        e.store.notify_constrained(x);
    }
    Ok(Outcome::True)
}

fn b_get_attribute(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let name = atom_arg(e, &a[2])?;
    match e.store.get_attr(&a[0], name) {
        Some(AttrValue::Term(t)) => unify(e, &a[1], &t),
        _ => Ok(Outcome::Fail),
    }
}

fn b_notify_constrained(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    if let Term::Var(v) = e.store.deref(&a[0]) {
        e.store.notify_constrained(v);
    }
    Ok(Outcome::True)
}

fn bound_term(x: f64) -> Term {
    Term::Float(x)
}

fn b_get_var_bounds(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let (lo, hi) = e.store.get_var_bounds(&a[0]);
    ok(attvar::unify(&mut e.store, &a[1], &bound_term(lo)) && attvar::unify(&mut e.store, &a[2], &bound_term(hi)))
}

fn b_set_var_bounds(e: &mut Engine, a: &[Term], _: &Ctx) -> R {
    let lo = arith::eval(&e.store, &a[1])?.to_interval().lo();
    let hi = arith::eval(&e.store, &a[2])?.to_interval().hi();
    match e.store.set_var_bounds(&a[0], lo, hi) {
        Ok(b) => ok(b),
        Err(err) => Err(EngineError::Type(err.to_string())),
    }
}

pub(super) fn install(e: &mut Engine) {
    let table: &[(&str, usize, NativeFn)] = &[
        ("=", 2, b_unify),
        ("\\=", 2, b_not_unify),
        ("==", 2, b_identical),
        ("\\==", 2, b_not_identical),
        ("@<", 2, b_lt),
        ("@>", 2, b_gt),
        ("@=<", 2, b_le),
        ("@>=", 2, b_ge),
        ("compare", 3, b_compare),
        ("var", 1, b_var),
        ("nonvar", 1, b_nonvar),
        ("atom", 1, b_atom),
        ("number", 1, b_number),
        ("integer", 1, b_integer),
        ("float", 1, b_float),
        ("rational", 1, b_rational),
        ("breal", 1, b_breal),
        ("atomic", 1, b_atomic),
        ("compound", 1, b_compound),
        ("callable", 1, b_callable),
        ("string", 1, b_string),
        ("is_list", 1, b_is_list),
        ("ground", 1, b_ground),
        ("is_suspension", 1, b_is_suspension),
        ("functor", 3, b_functor),
        ("arg", 3, b_arg),
        ("=..", 2, b_univ),
        ("copy_term", 2, b_copy_term),
        ("setarg", 3, b_setarg),
        ("term_variables", 2, b_term_variables),
        ("is", 2, b_is),
        ("=:=", 2, b_num_eq),
        ("=\\=", 2, b_num_ne),
        ("<", 2, b_num_lt),
        ("=<", 2, b_num_le),
        (">", 2, b_num_gt),
        (">=", 2, b_num_ge),
        ("$for_init", 6, b_for_init),
        ("plus", 3, b_succ_or_fail),
        ("dim", 2, b_dim),
        ("subscript", 3, b_subscript),
        ("sort", 2, b_sort),
        ("msort", 2, b_msort),
        ("sort", 4, b_sort4),
        ("keysort", 2, b_keysort),
        ("atom_length", 2, b_atom_length),
        ("atom_codes", 2, b_atom_codes),
        ("atom_chars", 2, b_atom_chars),
        ("number_codes", 2, b_number_codes),
        ("atom_number", 2, b_atom_number),
        ("char_code", 2, b_char_code),
        ("atom_concat", 3, b_atom_concat),
        ("term_to_atom", 2, b_term_to_atom),
        ("write", 1, b_write),
        ("writeln", 1, b_writeln),
        ("writeq", 1, b_writeq),
        ("print", 1, b_print),
        ("write_canonical", 1, b_write_canonical),
        ("nl", 0, b_nl),
        ("tab", 1, b_tab),
        ("findall", 3, b_findall),
        ("make_suspension", 3, b_make_suspension),
        ("insert_suspension", 3, b_insert_suspension),
        ("suspend", 3, b_suspend),
        ("suspend", 4, b_suspend4),
        ("kill_suspension", 1, b_kill_suspension),
        ("schedule_suspension", 1, b_schedule_suspension),
        ("suspension_state", 2, b_suspension_state),
        ("suspension_goal", 2, b_suspension_goal),
        ("delayed_goals", 1, b_delayed_goals),
        ("current_suspension", 1, b_current_suspension),
        ("log_event", 1, b_log_event),
        ("undo", 1, b_undo),
        ("meta_attribute", 2, b_meta_attribute),
        ("add_attribute", 3, b_add_attribute),
        ("get_attribute", 3, b_get_attribute),
        ("notify_constrained", 1, b_notify_constrained),
        ("get_var_bounds", 3, b_get_var_bounds),
        ("set_var_bounds", 3, b_set_var_bounds),
    ];
    for (name, arity, f) in table {
        e.register_native(Atom::SYSTEM, name, *arity, *f);
    }
    super::icnat::install(e);
}
