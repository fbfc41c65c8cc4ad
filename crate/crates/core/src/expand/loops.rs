//! `( Specs do Body )` → a call of a fresh tail-recursive predicate:
//!
//! ```text
//! do__N(Last1, Last1, ...) :- !.
//! do__N(In1, Last1, ...) :- Prefix, Body, do__N(Out1, Last1, ...).
//! ```
//!
//! Every iterator contributes argument pairs (or a single argument for
//! invariants), goals to run before the loop, and goals to run at the start
//! of each iteration.

use std::collections::HashSet;

use super::{conjoin, conjuncts, template_vars, ExpandError, ExpandResult, VarGen};
use crate::atom::Atom;
use crate::term::{Term, VarId};

#[derive(Debug, Default)]
struct Parts {
    call: Vec<Term>,
    base: Vec<Term>,
    head: Vec<Term>,
    rec: Vec<Term>,
    pre: Vec<Term>,
    prefix: Vec<Term>,
}

impl Parts {
    fn fromto(&mut self, from: Term, inp: Term, out: Term, to: Term, gen: &mut VarGen) {
        let last = gen.fresh();
        let last2 = gen.fresh();
        self.call.extend([from, to]);
        self.base.extend([last.clone(), last]);
        self.head.extend([inp, last2.clone()]);
        self.rec.extend([out, last2]);
    }

    fn param(&mut self, v: Term, gen: &mut VarGen) {
        self.call.push(v.clone());
        self.base.push(gen.fresh());
        self.head.push(v.clone());
        self.rec.push(v);
    }
}

fn is(lhs: Term, rhs: Term) -> Term {
    Term::app("is", vec![lhs, rhs])
}

fn plus(a: Term, b: Term) -> Term {
    Term::compound(Atom::PLUS, vec![a, b])
}

fn iterator(spec: &Term, parts: &mut Parts, gen: &mut VarGen) -> ExpandResult<()> {
    let unknown = || ExpandError::UnknownIterator(format!("{}", spec));
    let (name, arity) = spec.functor().ok_or_else(unknown)?;
    let a = spec.args();
    match (name.name(), arity) {
        ("fromto", 4) => parts.fromto(a[0].clone(), a[1].clone(), a[2].clone(), a[3].clone(), gen),
        ("foreach", 2) => {
            let tail = gen.fresh();
            let cell = Term::cons(a[0].clone(), tail.clone());
            parts.fromto(a[1].clone(), cell, tail, Term::nil(), gen);
        }
        ("foreacharg", 2) => {
            // the array travels as an invariant, the index as an accumulator
            let (arr, n, stop, i, i1) = (gen.fresh(), gen.fresh(), gen.fresh(), gen.fresh(), gen.fresh());
            parts.pre.push(Term::app("functor", vec![a[1].clone(), gen.fresh(), n.clone()]));
            parts.pre.push(is(stop.clone(), plus(n, Term::int(1))));
            parts.call.push(a[1].clone());
            parts.base.push(gen.fresh());
            parts.head.push(arr.clone());
            parts.rec.push(arr.clone());
            parts.prefix.push(Term::app("arg", vec![i.clone(), arr, a[0].clone()]));
            parts.prefix.push(is(i1.clone(), plus(i.clone(), Term::int(1))));
            parts.fromto(Term::int(1), i, i1, stop, gen);
        }
        ("for", 3) | ("for", 4) => {
            let step = a.get(3).cloned().unwrap_or(Term::int(1));
            let (first, stop, i1) = (gen.fresh(), gen.fresh(), gen.fresh());
            let step_val = if step.is_integer() { step.clone() } else { gen.fresh() };
            parts.pre.push(Term::app(
                "$for_init",
                vec![a[1].clone(), a[2].clone(), step, first.clone(), step_val.clone(), stop.clone()],
            ));
            if step_val.is_var() {
                parts.param(step_val.clone(), gen);
            }
            parts.prefix.push(is(i1.clone(), plus(a[0].clone(), step_val)));
            parts.fromto(first, a[0].clone(), i1, stop, gen);
        }
        ("param", _) => {
            for v in a {
                parts.param(v, gen);
            }
        }
        _ => return Err(unknown()),
    }
    Ok(())
}

/// Result of translating one loop.
#[derive(Debug)]
pub struct Loop {
    /// Replaces the `do/2` goal.
    pub call: Term,
    /// Base and recursive clause of the auxiliary predicate.
    pub clauses: [Term; 2],
    /// Variables shared with the enclosing clause but not passed in.
    pub unshared: Vec<VarId>,
}

/// Translates `(specs do body)`; `body` is expected to be expanded
/// already. `outer` lists the variables occurring outside the loop.
pub fn expand_do(specs: &Term, body: &Term, aux: Atom, gen: &mut VarGen, outer: &HashSet<VarId>) -> ExpandResult<Loop> {
    let mut parts = Parts::default();
    for spec in conjuncts(specs) {
        iterator(&spec, &mut parts, gen)?;
    }
    let spec_vars: HashSet<VarId> = template_vars(specs).into_iter().collect();
    let unshared = template_vars(body).into_iter().filter(|v| outer.contains(v) && !spec_vars.contains(v)).collect();
    let mk = |args: Vec<Term>| if args.is_empty() { Term::Atom(aux) } else { Term::compound(aux, args) };
    let base = Term::compound(Atom::NECK, vec![mk(parts.base), Term::Atom(Atom::CUT)]);
    let mut goals = parts.prefix;
    goals.push(body.clone());
    goals.push(mk(parts.rec));
    let rec = Term::compound(Atom::NECK, vec![mk(parts.head), conjoin(goals)]);
    let mut call = parts.pre;
    call.push(mk(parts.call));
    Ok(Loop { call: conjoin(call), clauses: [base, rec], unshared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::{read_term, write_detached, OpTable};

    fn translate(s: &str) -> (String, String, String) {
        let r = read_term(s, &OpTable::default()).unwrap();
        let mut gen = VarGen::new(r.nvars);
        let t = r.term;
        let l = expand_do(&t.arg_at(1).unwrap(), &t.arg_at(2).unwrap(), Atom::new("do__1"), &mut gen, &HashSet::new())
            .unwrap();
        let [b, rc] = l.clauses;
        (write_detached(&l.call, true), write_detached(&b, true), write_detached(&rc, true))
    }

    #[test]
    fn fromto_matches_the_textbook_mapping() {
        let (call, base, rec) = translate("fromto(From,In,Out,To) do body(In,Out)");
        assert_eq!(call, "do__1(_0, _3)");
        assert_eq!(base, "do__1(_4, _4) :- !");
        assert_eq!(rec, "do__1(_1, _5) :- body(_1, _2), do__1(_2, _5)");
    }

    #[test]
    fn arity_grows_per_accumulator() {
        let (call, _, _) = translate("fromto(a,I1,O1,b), fromto(c,I2,O2,d), param(P) do true");
        let r = read_term(&call, &OpTable::default()).unwrap().term;
        assert_eq!(r.functor().unwrap().1, 5);
    }

    #[test]
    fn unknown_iterator() {
        let t = read_term("bogus(X) do true", &OpTable::default()).unwrap().term;
        let mut gen = VarGen::new(1);
        let e = expand_do(&t.arg_at(1).unwrap(), &t.arg_at(2).unwrap(), Atom::new("do__1"), &mut gen, &HashSet::new());
        assert!(matches!(e, Err(ExpandError::UnknownIterator(_))));
    }

    #[test]
    fn unshared_outer_variables_are_reported() {
        let t = read_term("foreach(X,L) do p(X,Y)", &OpTable::default()).unwrap().term;
        let mut gen = VarGen::new(3);
        let outer: HashSet<VarId> = [VarId(1), VarId(2)].into();
        let l = expand_do(&t.arg_at(1).unwrap(), &t.arg_at(2).unwrap(), Atom::new("do__1"), &mut gen, &outer).unwrap();
        assert_eq!(l.unshared, vec![VarId(2)]);
    }
}
