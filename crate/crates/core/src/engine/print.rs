//! Answer formatting and output transformations.

use std::collections::HashMap;
use std::fmt;

use super::{loader, Engine, EngineResult};
use crate::atom::Atom;
use crate::expand::rewrite_bottom_up;
use crate::ic::linear::LinCon;
use crate::reader::{write_term, OpTable, WriteCtx, WriteOpts};
use crate::store::Store;
use crate::susp::Cond;
use crate::term::{SuspId, Term, VarId};

/// One answer of a toplevel query.
#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    /// Query variables and their values, detached from the engine; all
    /// values share one variable numbering.
    pub values: Vec<(String, Term)>,
    /// `Name = Value` lines as the toplevel prints them.
    pub lines: Vec<String>,
    /// The suspended resolvent at answer time.
    pub delayed: Vec<Delayed>,
}

/// A goal left in the suspended resolvent.
#[derive(Clone, Debug, PartialEq)]
pub struct Delayed {
    pub goal: String,
    pub priority: u8,
    /// Waking conditions, e.g. `[X, Y]->bound`.
    pub waking: Vec<String>,
}

impl fmt::Display for Delayed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t% priority {}", self.goal, self.priority)?;
        if !self.waking.is_empty() {
            write!(f, ", wakes on {}", self.waking.join(", "))?;
        }
        Ok(())
    }
}

impl Answer {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Texts of the delayed goals.
    pub fn delayed_goals(&self) -> Vec<&str> {
        self.delayed.iter().map(|d| d.goal.as_str()).collect()
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{}", l)?;
        }
        if !self.delayed.is_empty() {
            writeln!(f, "Delayed goals:")?;
            for d in &self.delayed {
                writeln!(f, "\t{}", d)?;
            }
        }
        Ok(())
    }
}

/// Writes store terms: variables are named from a table, anonymous
/// singletons print as `_`, domains are appended when asked for.
pub(crate) struct PrintCtx<'a> {
    pub store: &'a Store,
    pub ops: &'a OpTable,
    pub names: HashMap<VarId, String>,
    pub counts: HashMap<VarId, usize>,
    pub annotate: bool,
}

impl WriteCtx for PrintCtx<'_> {
    fn ops(&self) -> &OpTable {
        self.ops
    }

    fn deref(&self, t: &Term) -> Term {
        self.store.deref(t)
    }

    fn var_name(&self, v: VarId) -> String {
        if let Some(n) = self.names.get(&v) {
            return n.clone();
        }
        if self.counts.get(&v).copied().unwrap_or(0) == 1 {
            "_".to_string()
        } else {
            format!("_G{}", v.0)
        }
    }

    fn var_annotation(&self, v: VarId) -> Option<String> {
        if !self.annotate {
            return None;
        }
        crate::ic::domain(self.store, v).map(|d| d.display())
    }

    fn susp_text(&self, s: SuspId) -> String {
        format!("'SUSP-{}'", s.0)
    }
}

const CONDS: [Cond; 7] = [Cond::Inst, Cond::Bound, Cond::Constrained, Cond::Min, Cond::Max, Cond::Hole, Cond::Type];

/// Where suspension `id` hangs among the variables of `goal`, grouped by
/// condition.
fn waking_of(store: &Store, id: SuspId, goal: &Term) -> Vec<(Cond, Vec<VarId>)> {
    let vars = store.term_vars(goal);
    let mut out = Vec::new();
    for c in CONDS {
        let on: Vec<VarId> = vars
            .iter()
            .copied()
            .filter(|v| {
                let Some(a) = store.attrs(*v) else { return false };
                match c {
                    Cond::Inst => a.inst.contains(&id),
                    Cond::Bound => a.bound.contains(&id),
                    Cond::Constrained => a.constrained.contains(&id),
                    _ => a.domain().is_some_and(|d| d.list(c).contains(&id)),
                }
            })
            .collect();
        if !on.is_empty() {
            out.push((c, on));
        }
    }
    out
}

fn count_vars(store: &Store, t: &Term, counts: &mut HashMap<VarId, usize>) {
    match store.deref(t) {
        Term::Var(v) => *counts.entry(v).or_default() += 1,
        Term::Struct(c) => c.args().iter().for_each(|a| count_vars(store, a, counts)),
        _ => {}
    }
}

impl Engine {
    /// Applies output transformations: linear constraints in readable form
    /// and user `write` macros.
    pub(crate) fn output_transform(&mut self, t: &Term, module: Atom) -> EngineResult<Term> {
        let t = self.store.resolve_deep(t);
        let lin = Atom::new("ic_lin_con");
        rewrite_bottom_up(&t, &mut |node: Term| {
            let Some(key) = node.functor() else { return Ok(node) };
            if key == (lin, 3) {
                if let Ok(c) = LinCon::from_term(&self.store, &node) {
                    return Ok(c.readable());
                }
            }
            if key == (Atom::COLON, 2) && node.arg_at(2).unwrap().functor() == Some((lin, 3)) {
                if let Ok(c) = LinCon::from_term(&self.store, &node.arg_at(2).unwrap()) {
                    return Ok(c.readable());
                }
            }
            if let Some(tr) = self.write_macro(key, module) {
                let out = self.store.new_var();
                let r = loader::run_transformer(self, tr, node.clone(), out, module, &mut |eng, o| {
                    eng.store.resolve_deep(o)
                })?;
                return Ok(r.unwrap_or(node));
            }
            Ok(node)
        })
    }

    /// Text of a term as `write/1` (or `writeq/1`, ...) prints it.
    pub(crate) fn format_term(&mut self, t: &Term, opts: WriteOpts, module: Atom) -> EngineResult<String> {
        let t = if opts.transforms { self.output_transform(t, module)? } else { t.clone() };
        let ctx = PrintCtx {
            store: &self.store,
            ops: self.ops(module),
            names: HashMap::new(),
            counts: HashMap::new(),
            annotate: opts.annotate,
        };
        Ok(write_term(&t, &ctx, opts))
    }

    /// Suspensions created at or after index `from` that are still pending.
    pub(crate) fn delayed_since(&self, from: usize) -> Vec<SuspId> {
        self.store.delayed_goals().into_iter().filter(|id| id.0 as usize >= from).collect()
    }

    pub(crate) fn goal_texts(&mut self, ids: &[SuspId]) -> Vec<String> {
        let mut out = Vec::new();
        for id in ids {
            let s = self.store.suspension(*id);
            let (g, m) = (s.goal.clone(), s.module);
            let text = self.format_term(&g, WriteOpts::quoted(), m);
            out.push(text.unwrap_or_else(|e| e.to_string()));
        }
        out
    }

    pub(crate) fn answer(&mut self, names: &[(String, Term)]) -> EngineResult<Answer> {
        let mut map = Vec::new();
        let values = names.iter().map(|(n, t)| (n.clone(), self.store.detach_with(t, &mut map))).collect();
        let delayed_ids = self.store.delayed_goals();
        let mut var_names: HashMap<VarId, String> = HashMap::new();
        let mut lines = Vec::new();
        let mut pending: Vec<(String, Term)> = Vec::new();
        for (n, t) in names {
            let d = self.store.deref(t);
            match &d {
                Term::Var(v) => match var_names.get(v) {
                    Some(first) => lines.push((n.clone(), None, Some(first.clone()))),
                    None => {
                        var_names.insert(*v, n.clone());
                        if crate::ic::domain(&self.store, *v).is_some() {
                            lines.push((n.clone(), Some(d.clone()), None));
                        }
                    }
                },
                _ => {
                    let t = self.output_transform(&d, Atom::USER)?;
                    pending.push((n.clone(), t.clone()));
                    lines.push((n.clone(), Some(t), None));
                }
            }
        }
        let mut goals = Vec::new();
        for id in &delayed_ids {
            let s = self.store.suspension(*id);
            let (g, m, p) = (s.goal.clone(), s.module, s.priority);
            let waking = waking_of(&self.store, *id, &g);
            goals.push((self.output_transform(&g, m)?, p, waking));
        }
        let mut counts = HashMap::new();
        for (_, t) in &pending {
            count_vars(&self.store, t, &mut counts);
        }
        for (g, _, w) in &goals {
            count_vars(&self.store, g, &mut counts);
            for v in w.iter().flat_map(|(_, vs)| vs) {
                count_vars(&self.store, &Term::Var(*v), &mut counts);
            }
        }
        let ctx = PrintCtx { store: &self.store, ops: self.ops(Atom::USER), names: var_names, counts, annotate: true };
        let opts = if self.canonical { WriteOpts::canonical() } else { WriteOpts::quoted() };
        let opts = WriteOpts { annotate: !self.canonical, ..opts };
        let mut out = Vec::new();
        for (n, val, alias) in lines {
            match (val, alias) {
                (_, Some(first)) => out.push(format!("{} = {}", n, first)),
                (Some(Term::Var(v)), None) => {
                    let dom = crate::ic::domain(&self.store, v).map(|d| d.display()).unwrap_or_default();
                    out.push(format!("{} = _{}", n, dom));
                }
                (Some(t), None) => out.push(format!("{} = {}", n, write_term(&t, &ctx, opts))),
                (None, None) => {}
            }
        }
        let plain = WriteOpts { annotate: false, ..opts };
        let delayed = goals
            .iter()
            .map(|(g, p, w)| Delayed {
                goal: write_term(g, &ctx, opts),
                priority: *p,
                waking: w
                    .iter()
                    .map(|(c, vs)| {
                        let vs: Vec<Term> = vs.iter().map(|v| Term::Var(*v)).collect();
                        let t = if vs.len() == 1 { vs[0].clone() } else { Term::list(vs) };
                        format!("{}->{}", write_term(&t, &ctx, plain), c.name())
                    })
                    .collect(),
            })
            .collect();
        Ok(Answer { values, lines: out, delayed })
    }
}
