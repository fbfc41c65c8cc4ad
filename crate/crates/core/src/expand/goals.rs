//! Clause-body expansion: do-loops, `update_struct/4`, inline linear
//! constraints and user goal expansions.

use std::collections::{HashMap, HashSet};

use super::{expand_do, expand_update_struct, var_occurrences, ExpandResult, StructScope, VarGen};
use crate::atom::Atom;
use crate::ic::linear::{constraint_op, normalize, Static};
use crate::term::{Term, VarId};

/// What body expansion needs from the loader.
pub trait GoalHost: StructScope {
    /// Whether constraint operators resolve to the ic solver, for an
    /// unqualified goal (`None`) or one qualified with a module.
    fn ic_visible(&self, qual: Option<Atom>) -> bool;
    /// A user-declared goal expansion, if one applies.
    fn user_expansion(&mut self, goal: &Term, qual: Option<Atom>, gen: &mut VarGen) -> ExpandResult<Option<Term>>;
    /// A fresh auxiliary predicate name.
    fn aux_name(&mut self) -> Atom;
    fn add_aux(&mut self, clause: Term) -> ExpandResult<()>;
    fn warn_unshared(&mut self, vars: &[VarId]);
}

/// Expands the body of `clause` (the whole clause is needed to tell which
/// variables a loop shares with its surroundings).
pub fn expand_body(host: &mut dyn GoalHost, body: &Term, clause: &Term, gen: &mut VarGen) -> ExpandResult<Term> {
    let mut counts = HashMap::new();
    var_occurrences(clause, &mut counts);
    expand(host, body, None, gen, &counts)
}

fn expand(
    host: &mut dyn GoalHost,
    g: &Term,
    qual: Option<Atom>,
    gen: &mut VarGen,
    counts: &HashMap<VarId, usize>,
) -> ExpandResult<Term> {
    let Some((name, arity)) = g.functor() else { return Ok(g.clone()) };
    if !g.is_callable() || g.as_atom().is_some() {
        return Ok(g.clone());
    }
    let args = g.args();
    let rebuild = |idx: &[usize], host: &mut dyn GoalHost, gen: &mut VarGen| -> ExpandResult<Term> {
        let mut out = args.clone();
        for &i in idx {
            out[i] = expand(host, &args[i], qual, gen, counts)?;
        }
        Ok(Term::compound(name, out))
    };
    match (name.name(), arity) {
        (",", 2) | (";", 2) | ("->", 2) | ("*->", 2) | ("forall", 2) => rebuild(&[0, 1], host, gen),
        ("\\+", 1) | ("once", 1) | ("ignore", 1) => rebuild(&[0], host, gen),
        ("findall", 3) => rebuild(&[1], host, gen),
        (":", 2) => match args[0].as_atom() {
            Some(m) => {
                let inner = expand(host, &args[1], Some(m), gen, counts)?;
                Ok(Term::compound(Atom::COLON, vec![args[0].clone(), inner]))
            }
            None => Ok(g.clone()),
        },
        ("do", 2) => {
            let body = expand(host, &args[1], None, gen, counts)?;
            let mut inside = HashMap::new();
            var_occurrences(g, &mut inside);
            let outer: HashSet<VarId> =
                inside.iter().filter(|(v, n)| counts.get(v).copied().unwrap_or(0) > **n).map(|(v, _)| *v).collect();
            let aux = host.aux_name();
            let lp = expand_do(&args[0], &body, aux, gen, &outer)?;
            if !lp.unshared.is_empty() {
                host.warn_unshared(&lp.unshared);
            }
            for c in lp.clauses {
                host.add_aux(c)?;
            }
            Ok(lp.call)
        }
        ("update_struct", 4) => match (args[0].as_atom(), proper_list(&args[1])) {
            (Some(st), true) => expand_update_struct(&*host, st, &args[1], &args[2], &args[3], gen),
            _ => Ok(g.clone()),
        },
        (op, 2) if constraint_op(op).is_some() && host.ic_visible(qual) => {
            match normalize(&Static, op, &args[0], &args[1]) {
                Ok(con) => Ok(Term::compound(Atom::COLON, vec![Term::Atom(Atom::IC), con.to_term()])),
                // left for the runtime, which knows arrays and bindings
                Err(_) => Ok(g.clone()),
            }
        }
        _ => Ok(host.user_expansion(g, qual, gen)?.unwrap_or_else(|| g.clone())),
    }
}

fn proper_list(t: &Term) -> bool {
    let mut cur = t.clone();
    while cur.is_functor(Atom::DOT, 2) {
        cur = cur.arg_at(2).unwrap();
    }
    cur.as_atom() == Some(Atom::NIL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::StructDecl;
    use crate::reader::{read_term, write_detached, OpTable};

    #[derive(Default)]
    struct Host {
        aux: Vec<Term>,
        n: usize,
        warned: Vec<VarId>,
    }

    impl StructScope for Host {
        fn lookup_struct(&self, name: Atom) -> Option<StructDecl> {
            (name.name() == "emp").then(|| StructDecl { name, fields: ["name", "age", "salary"].map(Atom::new).to_vec() })
        }
    }

    impl GoalHost for Host {
        fn ic_visible(&self, qual: Option<Atom>) -> bool {
            qual.is_none() || qual == Some(Atom::IC)
        }
        fn user_expansion(&mut self, _: &Term, _: Option<Atom>, _: &mut VarGen) -> ExpandResult<Option<Term>> {
            Ok(None)
        }
        fn aux_name(&mut self) -> Atom {
            self.n += 1;
            Atom::new(&format!("do__{}", self.n))
        }
        fn add_aux(&mut self, clause: Term) -> ExpandResult<()> {
            self.aux.push(clause);
            Ok(())
        }
        fn warn_unshared(&mut self, vars: &[VarId]) {
            self.warned.extend_from_slice(vars);
        }
    }

    fn run(clause: &str) -> (String, Host) {
        let r = read_term(clause, &OpTable::default()).unwrap();
        let mut gen = VarGen::new(r.nvars);
        let mut host = Host::default();
        let body = r.term.arg_at(2).unwrap();
        let b = expand_body(&mut host, &body, &r.term, &mut gen).unwrap();
        (write_detached(&b, true), host)
    }

    #[test]
    fn nested_loops_innermost_first() {
        let src = "q(N, Board) :- ( for(I,1,N), param(Board,N) do ( for(J,I+1,N), param(Board,I) do Board[I] #\\= Board[J] ) )";
        let (call, host) = run(src);
        assert!(call.contains("do__2"), "{}", call);
        assert_eq!(host.aux.len(), 4);
        // the inner loop is generated first
        assert!(write_detached(&host.aux[1], true).contains("do__1"));
        assert!(host.warned.is_empty());
    }

    #[test]
    fn constraints_become_linear_forms() {
        let (b, _) = run("p(X,Y) :- X #>= 5*(X+Y)+2");
        assert_eq!(b, "ic:ic_lin_con(#=<, 2, [4 * _0, 5 * _1])");
        let (b, _) = run("p(X,Y) :- lib:(X #= Y)");
        assert_eq!(b, "lib:(_0 #= _1)");
        let (b, _) = run("p(X,Y) :- X*Y #= 1");
        assert_eq!(b, "_0 * _1 #= 1");
    }

    #[test]
    fn update_struct_in_body() {
        let (b, _) = run("p(O,N,S) :- update_struct(emp, [salary:S], O, N)");
        assert_eq!(b, "_0 = emp(_3, _4, _5), _1 = emp(_3, _4, _2)");
    }

    #[test]
    fn warns_about_unshared_variables() {
        let (_, host) = run("p(L, Y) :- ( foreach(X,L) do q(X, Y) )");
        assert_eq!(host.warned, vec![VarId(1)]);
    }
}
