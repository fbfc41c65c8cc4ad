//! The resolution loop. The active resolvent is a persistent list of
//! frames; choicepoints capture the list together with a store mark, so
//! backtracking is "restore the mark, take the saved continuation".
//!
//! Before every step the scheduler runs: goals queued by attribute hooks
//! first, then the most urgent scheduled suspension whose priority beats
//! the priority of the running computation.

use std::rc::Rc;

use super::{loader, Clause, Ctx, Engine, EngineError, EngineResult, Key, Outcome, TOP_PRIO};
use crate::atom::Atom;
use crate::attvar;
use crate::store::Mark;
use crate::term::{SuspId, Term};

pub(crate) struct Node {
    frame: Frame,
    next: Cont,
}

pub(crate) type Cont = Option<Rc<Node>>;

pub(crate) fn push(frame: Frame, next: Cont) -> Cont {
    Some(Rc::new(Node { frame, next }))
}

pub(crate) enum Frame {
    Goal { goal: Term, module: Atom, cutb: usize, susp: Option<SuspId>, woken: bool },
    RestorePrio(u8),
    /// Remove choicepoints from this height on (if-then-else commit).
    CutTo(usize),
    /// Retire the choicepoint at this height, keeping those above it.
    Disable(usize),
}

pub(crate) enum Alt {
    Barrier,
    Dead,
    Goal { goal: Term, module: Atom, cutb: usize, susp: Option<SuspId> },
    Clauses { goal: Term, module: Atom, clauses: Rc<Vec<Rc<Clause>>>, next: usize, susp: Option<SuspId> },
}

pub(crate) struct Choice {
    pub mark: Mark,
    pub alt: Alt,
    pub cont: Cont,
    pub prio: u8,
}

pub(crate) enum Target {
    Clauses(Rc<Vec<Rc<Clause>>>, Atom),
    Native(super::Native),
}

fn goal_frame(goal: Term, module: Atom, cutb: usize, susp: Option<SuspId>) -> Frame {
    Frame::Goal { goal, module, cutb, susp, woken: false }
}

fn first_key(goal: &Term, eng: &Engine) -> Option<Key> {
    match goal {
        Term::Struct(c) => Key::of(&eng.store.deref(&c.arg(0))),
        _ => None,
    }
}

fn next_match(clauses: &[Rc<Clause>], from: usize, key: &Option<Key>) -> Option<usize> {
    (from..clauses.len()).find(|&i| match (&clauses[i].key, key) {
        (Some(a), Some(b)) => a.matches(b),
        _ => true,
    })
}

pub(crate) fn indicator(name: Atom, arity: usize) -> String {
    format!("{}/{}", crate::reader::writer::atom_text(name, true), arity)
}

fn callable_type_error(t: &Term) -> EngineError {
    EngineError::Type(format!("callable expected, found {}", t))
}

impl Engine {
    /// Runs `cont` until the resolvent is empty (`true`) or every
    /// choicepoint above `base` is exhausted (`false`).
    pub(crate) fn run(&mut self, mut cont: Cont, base: usize) -> EngineResult<bool> {
        loop {
            let pending = self.store.take_pending_goals();
            if pending.is_empty() {
                if let Some(id) = self.store.pop_scheduled(self.prio) {
                    let s = self.store.suspension(id);
                    let (goal, module, p) = (s.goal.clone(), s.module, s.priority);
                    cont = push(Frame::RestorePrio(self.prio), cont);
                    let cutb = self.choices.len();
                    cont = push(Frame::Goal { goal, module, cutb, susp: Some(id), woken: true }, cont);
                    self.prio = p;
                }
            } else {
                let cutb = self.choices.len();
                for g in pending.into_iter().rev() {
                    cont = push(goal_frame(g, Atom::USER, cutb, None), cont);
                }
            }
            let Some(node) = cont else { return Ok(true) };
            cont = node.next.clone();
            let next = match &node.frame {
                Frame::RestorePrio(p) => {
                    self.prio = *p;
                    Some(cont)
                }
                Frame::CutTo(h) => {
                    self.cut(*h);
                    Some(cont)
                }
                Frame::Disable(h) => {
                    if let Some(c) = self.choices.get_mut(*h) {
                        c.alt = Alt::Dead;
                    }
                    Some(cont)
                }
                Frame::Goal { goal, module, cutb, susp, woken } => {
                    self.step(goal, *module, *cutb, *susp, *woken, cont)?
                }
            };
            cont = match next {
                Some(c) => c,
                None => match self.backtrack(base)? {
                    Some(c) => c,
                    None => return Ok(false),
                },
            };
        }
    }

    /// Backtracks into the most recent choicepoint and runs on.
    pub(crate) fn resume(&mut self, base: usize) -> EngineResult<bool> {
        match self.backtrack(base)? {
            Some(c) => self.run(c, base),
            None => Ok(false),
        }
    }

    /// Continuation of the most recent live alternative above `base`.
    fn backtrack(&mut self, base: usize) -> EngineResult<Option<Cont>> {
        while self.choices.len() > base {
            let top = self.choices.len() - 1;
            let mark = self.choices[top].mark;
            self.store.backtrack_to(mark).map_err(|e| EngineError::Internal(e.to_string()))?;
            self.prio = self.choices[top].prio;
            self.run_undo_goals()?;
            let ch = self.choices.pop().unwrap();
            self.store.pop_choicepoint(ch.mark).map_err(|e| EngineError::Internal(e.to_string()))?;
            match ch.alt {
                Alt::Barrier => return Err(EngineError::Internal("backtracked into a barrier".into())),
                Alt::Dead => {}
                Alt::Goal { goal, module, cutb, susp } => {
                    return Ok(Some(push(goal_frame(goal, module, cutb, susp), ch.cont)));
                }
                Alt::Clauses { goal, module, clauses, next, susp } => {
                    if let Some(c) = self.try_clauses(goal, module, clauses, next, susp, ch.cont) {
                        return Ok(Some(c));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Removes every choicepoint at height `h` and above.
    pub(crate) fn cut(&mut self, h: usize) {
        if self.choices.len() > h {
            let m = self.choices[h].mark;
            self.store.cut_to(m).expect("choicepoints and store marks agree");
            self.choices.truncate(h);
        }
    }

    /// Drops choicepoints from `h` on and undoes everything since `mark`
    /// (which belongs to the choicepoint at `h`).
    pub(crate) fn unwind_to(&mut self, h: usize, mark: Mark) {
        self.choices.truncate(h);
        if self.store.is_live(mark) {
            let _ = self.store.pop_choicepoint(mark);
        }
        let _ = self.run_undo_goals();
    }

    fn run_undo_goals(&mut self) -> EngineResult<()> {
        loop {
            let goals = std::mem::take(&mut *self.undo_queue.borrow_mut());
            if goals.is_empty() {
                return Ok(());
            }
            for g in goals {
                let g = self.store.instantiate(&g, &mut Vec::new());
                self.sub_solve(g, Atom::USER, &mut |_| Ok(false))?;
            }
        }
    }

    pub(crate) fn push_choice(&mut self, alt: Alt, cont: Cont) {
        let mark = self.store.push_choicepoint();
        self.choices.push(Choice { mark, alt, cont, prio: self.prio });
    }

    /// Runs `goal` in isolation: behind a barrier, at toplevel priority,
    /// with the current scheduler queue hidden. `f` sees each solution and
    /// returns whether to look for another. Everything is undone afterwards.
    pub(crate) fn sub_solve(
        &mut self,
        goal: Term,
        module: Atom,
        f: &mut dyn FnMut(&mut Engine) -> EngineResult<bool>,
    ) -> EngineResult<()> {
        let saved = self.prio;
        let h = self.choices.len();
        self.push_choice(Alt::Barrier, None);
        let mark = self.choices[h].mark;
        self.store.clear_queue();
        self.prio = TOP_PRIO;
        let start = push(goal_frame(goal, module, h + 1, None), None);
        let mut r = self.run(start, h + 1);
        let res = loop {
            match r {
                Ok(true) => match f(self) {
                    Ok(true) => r = self.resume(h + 1),
                    Ok(false) => break Ok(()),
                    Err(e) => break Err(e),
                },
                Ok(false) => break Ok(()),
                Err(e) => break Err(e),
            }
        };
        self.unwind_to(h, mark);
        self.prio = saved;
        res
    }

    fn try_clauses(
        &mut self,
        goal: Term,
        module: Atom,
        clauses: Rc<Vec<Rc<Clause>>>,
        from: usize,
        susp: Option<SuspId>,
        cont: Cont,
    ) -> Option<Cont> {
        let key = first_key(&goal, self);
        let mut i = next_match(&clauses, from, &key)?;
        loop {
            let next = next_match(&clauses, i + 1, &key);
            let h = self.choices.len();
            if let Some(j) = next {
                let alt = Alt::Clauses { goal: goal.clone(), module, clauses: clauses.clone(), next: j, susp };
                self.push_choice(alt, cont.clone());
            }
            let c = clauses[i].clone();
            let mut env = vec![None; c.nvars as usize];
            let head = self.store.instantiate(&c.head, &mut env);
            if attvar::unify(&mut self.store, &head, &goal) {
                if c.body.as_atom() == Some(Atom::TRUE) {
                    return Some(cont);
                }
                let body = self.store.instantiate(&c.body, &mut env);
                return Some(push(goal_frame(body, module, h, susp), cont));
            }
            let j = next?;
            let ch = self.choices.pop().unwrap();
            self.store.pop_choicepoint(ch.mark).ok()?;
            i = j;
        }
    }

    /// Finds what a call of `name/arity` in `module` (optionally qualified
    /// with `qual`) refers to.
    pub(crate) fn resolve(&self, name: Atom, arity: usize, module: Atom, qual: Option<Atom>) -> EngineResult<Target> {
        let key = (name, arity);
        let missing = |m: Atom| EngineError::Existence(format!("procedure {}:{}", m, indicator(name, arity)));
        let lookup = match qual {
            Some(q) if q != module => q,
            _ => module,
        };
        let qualified = qual.is_some_and(|q| q != module);
        let Some(m) = self.modules.get(&lookup) else { return Err(missing(lookup)) };
        if let Some(p) = m.preds.get(&key) {
            if !qualified || m.exports.contains(&key) || lookup == Atom::SYSTEM {
                return Ok(Target::Clauses(p.clauses.clone(), lookup));
            }
            return Err(EngineError::Existence(format!("procedure {}:{} (not exported)", lookup, indicator(name, arity))));
        }
        if let Some(n) = self.natives.get(&key) {
            let visible = n.owner == Atom::SYSTEM
                || n.owner == lookup
                || (!qualified && m.imports.contains(&n.owner));
            if visible {
                return Ok(Target::Native(*n));
            }
        }
        if let Some(p) = self.modules[&Atom::SYSTEM].preds.get(&key) {
            return Ok(Target::Clauses(p.clauses.clone(), Atom::SYSTEM));
        }
        if !qualified {
            for i in &m.imports {
                if let Some(im) = self.modules.get(i) {
                    if let (Some(p), true) = (im.preds.get(&key), im.exports.contains(&key)) {
                        return Ok(Target::Clauses(p.clauses.clone(), *i));
                    }
                }
            }
        }
        Err(missing(lookup))
    }

    fn call_pred(
        &mut self,
        goal: Term,
        module: Atom,
        qual: Option<Atom>,
        susp: Option<SuspId>,
        woken: bool,
        cont: Cont,
    ) -> EngineResult<Option<Cont>> {
        let (name, arity) = goal.functor().ok_or_else(|| callable_type_error(&goal))?;
        match self.resolve(name, arity, module, qual)? {
            Target::Clauses(clauses, def) => Ok(self.try_clauses(goal, def, clauses, 0, susp, cont)),
            Target::Native(n) => {
                let args = goal.args();
                let ctx = Ctx { module: qual.unwrap_or(module), susp, woken };
                match (n.f)(self, &args, &ctx)? {
                    Outcome::Fail => Ok(None),
                    Outcome::True => Ok(Some(cont)),
                    Outcome::Goal(g) => {
                        let cutb = self.choices.len();
                        Ok(Some(push(goal_frame(g, ctx.module, cutb, susp), cont)))
                    }
                }
            }
        }
    }

    /// One resolution step. `None` means failure.
    fn step(
        &mut self,
        goal: &Term,
        module: Atom,
        cutb: usize,
        susp: Option<SuspId>,
        woken: bool,
        cont: Cont,
    ) -> EngineResult<Option<Cont>> {
        let goal = self.store.deref(goal);
        let (name, arity) = match &goal {
            Term::Var(_) => return Err(EngineError::Instantiation("call".into())),
            Term::Atom(a) => (*a, 0),
            Term::Struct(c) => (c.name(), c.arity()),
            other => return Err(callable_type_error(other)),
        };
        let arg = |i: usize| goal.as_struct().unwrap().arg(i);
        let here = |g: Term, c: Cont| push(goal_frame(g, module, cutb, susp), c);
        match (name.name(), arity) {
            ("true", 0) => Ok(Some(cont)),
            ("fail", 0) | ("false", 0) => Ok(None),
            ("!", 0) => {
                self.cut(cutb);
                Ok(Some(cont))
            }
            (",", 2) => Ok(Some(here(arg(0), here(arg(1), cont)))),
            (";", 2) => {
                let lhs = self.store.deref(&arg(0));
                let h = self.choices.len();
                let alt = Alt::Goal { goal: arg(1), module, cutb, susp };
                if lhs.is_functor(Atom::ARROW, 2) {
                    let c = lhs.as_struct().unwrap();
                    self.push_choice(alt, cont.clone());
                    let then = push(Frame::CutTo(h), here(c.arg(1), cont));
                    Ok(Some(push(goal_frame(c.arg(0), module, h + 1, susp), then)))
                } else if lhs.is_functor(Atom::new("*->"), 2) {
                    let c = lhs.as_struct().unwrap();
                    self.push_choice(alt, cont.clone());
                    let then = push(Frame::Disable(h), here(c.arg(1), cont));
                    Ok(Some(push(goal_frame(c.arg(0), module, h + 1, susp), then)))
                } else {
                    self.push_choice(alt, cont.clone());
                    Ok(Some(here(lhs, cont)))
                }
            }
            ("->", 2) => {
                let h = self.choices.len();
                self.push_choice(Alt::Goal { goal: Term::Atom(Atom::FAIL), module, cutb, susp }, cont.clone());
                let then = push(Frame::CutTo(h), here(arg(1), cont));
                Ok(Some(push(goal_frame(arg(0), module, h + 1, susp), then)))
            }
            ("*->", 2) => Ok(Some(push(goal_frame(arg(0), module, self.choices.len(), susp), here(arg(1), cont)))),
            ("\\+", 1) => {
                let h = self.choices.len();
                self.push_choice(Alt::Goal { goal: Term::Atom(Atom::TRUE), module, cutb, susp }, cont);
                let fail = push(Frame::CutTo(h), here(Term::Atom(Atom::FAIL), None));
                Ok(Some(push(goal_frame(arg(0), module, h + 1, susp), fail)))
            }
            ("call", n) if n >= 1 => {
                let mut g = self.store.deref(&arg(0));
                if n > 1 {
                    let extra: Vec<Term> = (1..n).map(arg).collect();
                    g = add_args(&g, extra)?;
                }
                Ok(Some(push(goal_frame(g, module, self.choices.len(), susp), cont)))
            }
            ("once", 1) => {
                let g = Term::compound(Atom::ARROW, vec![arg(0), Term::Atom(Atom::TRUE)]);
                Ok(Some(here(Term::compound(Atom::SEMI, vec![g, Term::Atom(Atom::FAIL)]), cont)))
            }
            ("ignore", 1) => {
                let g = Term::compound(Atom::ARROW, vec![arg(0), Term::Atom(Atom::TRUE)]);
                Ok(Some(here(Term::compound(Atom::SEMI, vec![g, Term::Atom(Atom::TRUE)]), cont)))
            }
            ("not", 1) => Ok(Some(here(Term::compound(Atom::NOT, vec![arg(0)]), cont))),
            ("forall", 2) => {
                let inner = Term::compound(Atom::COMMA, vec![arg(0), Term::compound(Atom::NOT, vec![arg(1)])]);
                Ok(Some(here(Term::compound(Atom::NOT, vec![inner]), cont)))
            }
            (":", 2) => self.qualified(arg(0), arg(1), module, cutb, susp, woken, cont),
            ("do", 2) | ("update_struct", 4) => {
                let g = loader::expand_at_runtime(self, &goal, module)?;
                Ok(Some(push(goal_frame(g, module, self.choices.len(), susp), cont)))
            }
            _ => self.call_pred(goal, module, None, susp, woken, cont),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn qualified(
        &mut self,
        q: Term,
        g: Term,
        module: Atom,
        cutb: usize,
        susp: Option<SuspId>,
        woken: bool,
        cont: Cont,
    ) -> EngineResult<Option<Cont>> {
        let q = self.store.deref(&q);
        if let Some(items) = self.store.list_items(&q) {
            if items.is_empty() {
                return Err(EngineError::Domain("empty module list in qualified call".into()));
            }
            let mut c = cont;
            for m in items.into_iter().rev() {
                let qg = Term::compound(Atom::COLON, vec![m, g.clone()]);
                c = push(goal_frame(qg, module, cutb, susp), c);
            }
            return Ok(Some(c));
        }
        let m = match q {
            Term::Var(_) => return Err(EngineError::Instantiation("qualified call".into())),
            Term::Atom(a) => a,
            other => return Err(EngineError::Type(format!("module name expected, found {}", other))),
        };
        let g = self.store.deref(&g);
        let control = match g.functor() {
            Some((n, a)) => matches!(
                (n.name(), a),
                (",", 2) | (";", 2) | ("->", 2) | ("*->", 2) | ("\\+", 1) | ("call", _) | (":", 2) | ("do", 2)
                    | ("once", 1) | ("ignore", 1) | ("not", 1) | ("forall", 2)
            ),
            None => return Err(EngineError::Instantiation("qualified call".into())),
        };
        if control {
            // control constructs switch the context module
            return Ok(Some(push(goal_frame(g, m, self.choices.len(), susp), cont)));
        }
        if g.as_atom() == Some(Atom::CUT) {
            self.cut(cutb);
            return Ok(Some(cont));
        }
        self.call_pred(g, module, Some(m), susp, woken, cont)
    }
}

/// `call/N`: extends a goal with extra arguments.
pub(crate) fn add_args(g: &Term, extra: Vec<Term>) -> EngineResult<Term> {
    match g {
        Term::Atom(a) => Ok(Term::compound(*a, extra)),
        Term::Struct(c) if c.name() == Atom::COLON && c.arity() == 2 => {
            Ok(Term::compound(Atom::COLON, vec![c.arg(0), add_args(&c.arg(1), extra)?]))
        }
        Term::Struct(c) => {
            let mut args = c.args().clone();
            args.extend(extra);
            Ok(Term::compound(c.name(), args))
        }
        Term::Var(_) => Err(EngineError::Instantiation("call".into())),
        other => Err(callable_type_error(other)),
    }
}
