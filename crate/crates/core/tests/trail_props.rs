use std::cell::Cell;
use std::collections::HashSet;
use std::rc::Rc;

use clp_kernel::store::{Mark, Store};
use clp_kernel::term::Term;
use proptest::prelude::*;

const VARS: usize = 4;
const ARGS: usize = 3;

#[derive(Debug, Clone)]
enum Op {
    Bind(usize, i64),
    SetArg(usize, i64),
    Undo,
    Push,
    Backtrack,
    Cut,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..VARS, 0i64..100).prop_map(|(v, x)| Op::Bind(v, x)),
        4 => (0..ARGS, 0i64..100).prop_map(|(i, x)| Op::SetArg(i, x)),
        1 => Just(Op::Undo),
        3 => Just(Op::Push),
        2 => Just(Op::Backtrack),
        1 => Just(Op::Cut),
    ]
}

struct World {
    store: Store,
    vars: Vec<Term>,
    s: Term,
    counter: Rc<Cell<i64>>,
}

impl World {
    fn snapshot(&self) -> String {
        let vars: Vec<String> = self.vars.iter().map(|v| format!("{:?}", self.store.resolve_deep(v))).collect();
        format!("{:?} {:?} {}", vars, self.store.resolve_deep(&self.s), self.counter.get())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn backtracking_restores_every_snapshot(ops in prop::collection::vec(op(), 1..60)) {
        let mut store = Store::new();
        let vars: Vec<Term> = (0..VARS).map(|_| store.new_var()).collect();
        let s = Term::app("s", (0..ARGS as i64).map(Term::int).collect());
        let mut w = World { store, vars, s, counter: Rc::new(Cell::new(0)) };
        // the flag records a cut merging younger segments into this one
        let mut marks: Vec<(Mark, String, bool)> = Vec::new();
        for op in ops {
            match op {
                Op::Bind(v, x) => {
                    if let Some(id) = w.store.deref(&w.vars[v]).as_var() {
                        w.store.bind(id, Term::int(x));
                    }
                }
                Op::SetArg(i, x) => w.store.set_arg(i as i64 + 1, &w.s, Term::int(x)).unwrap(),
                Op::Undo => {
                    if !marks.is_empty() {
                        w.counter.set(w.counter.get() + 1);
                        let c = w.counter.clone();
                        w.store.register_undo(move |_| c.set(c.get() - 1));
                    }
                }
                Op::Push => {
                    let snap = w.snapshot();
                    marks.push((w.store.push_choicepoint(), snap, false));
                }
                Op::Backtrack => {
                    if let Some((m, snap, _)) = marks.pop() {
                        w.store.pop_choicepoint(m).unwrap();
                        prop_assert_eq!(w.snapshot(), snap);
                    }
                }
                Op::Cut => {
                    if let Some((m, _, _)) = marks.pop() {
                        w.store.cut_to(m).unwrap();
                        if let Some(top) = marks.last_mut() {
                            top.2 = true;
                        }
                    }
                }
            }
            // one value entry per location per segment
            if marks.last().is_some_and(|m| m.2) {
                continue;
            }
            let locs = w.store.value_locations_since_top();
            let distinct: HashSet<_> = locs.iter().collect();
            prop_assert_eq!(distinct.len(), locs.len());
        }
        while let Some((m, snap, _)) = marks.pop() {
            w.store.pop_choicepoint(m).unwrap();
            prop_assert_eq!(w.snapshot(), snap);
        }
    }
}

#[test]
fn repeated_setarg_trails_once_per_segment() {
    let mut store = Store::new();
    let s = Term::app("s", vec![Term::int(0)]);
    // nothing to restore without a choicepoint
    store.set_arg(1, &s, Term::int(1)).unwrap();
    assert_eq!(store.trail_len(), 0);
    let m = store.push_choicepoint();
    for i in 0..5 {
        store.set_arg(1, &s, Term::int(10 + i)).unwrap();
    }
    assert_eq!(store.trail_counts().values, 1);
    let m2 = store.push_choicepoint();
    store.set_arg(1, &s, Term::int(99)).unwrap();
    store.set_arg(1, &s, Term::int(98)).unwrap();
    assert_eq!(store.trail_counts().values, 2);
    store.pop_choicepoint(m2).unwrap();
    assert_eq!(format!("{:?}", store.resolve_deep(&s)), format!("{:?}", Term::app("s", vec![Term::int(14)])));
    // the older segment still dedups after the inner one is gone
    store.set_arg(1, &s, Term::int(7)).unwrap();
    assert_eq!(store.trail_counts().values, 1);
    store.pop_choicepoint(m).unwrap();
    assert_eq!(format!("{:?}", store.resolve_deep(&s)), format!("{:?}", Term::app("s", vec![Term::int(1)])));
}

#[test]
fn cut_keeps_stamps_of_the_merged_segment() {
    let mut store = Store::new();
    let s = Term::app("s", vec![Term::int(0)]);
    let m = store.push_choicepoint();
    let inner = store.push_choicepoint();
    store.set_arg(1, &s, Term::int(1)).unwrap();
    store.cut_to(inner).unwrap();
    // already trailed on behalf of the surviving segment
    store.set_arg(1, &s, Term::int(2)).unwrap();
    assert_eq!(store.trail_counts().values, 1);
    store.pop_choicepoint(m).unwrap();
    assert_eq!(format!("{:?}", store.resolve_deep(&s)), format!("{:?}", Term::app("s", vec![Term::int(0)])));
    let last = store.push_choicepoint();
    store.set_arg(1, &s, Term::int(3)).unwrap();
    store.cut_to(last).unwrap();
    assert_eq!(store.trail_len(), 0);
}

#[test]
fn undo_closures_are_never_merged() {
    let mut store = Store::new();
    let hits = Rc::new(Cell::new(0));
    let m = store.push_choicepoint();
    for _ in 0..3 {
        let h = hits.clone();
        store.register_undo(move |_| h.set(h.get() + 1));
    }
    assert_eq!(store.trail_counts().undos, 3);
    store.pop_choicepoint(m).unwrap();
    assert_eq!(hits.get(), 3);
}
