//! Program loading: directives, the three macro categories, body
//! expansion and clause storage.

use std::collections::HashMap;
use std::rc::Rc;

use super::machine::indicator;
use super::{Clause, Engine, EngineError, EngineResult, Key, Transformer};
use crate::atom::Atom;
use crate::expand::{
    compact, expand_body, expand_struct_syntax, rewrite_bottom_up, ExpandError, ExpandResult, GoalHost, StructDecl,
    StructScope, VarGen,
};
use crate::reader::{write_term, OpTable, ReadTerm, TermReader, WriteCtx, WriteOpts};
use crate::term::{Term, VarId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Category {
    Term,
    Clause,
    Goal,
    Write,
}

/// Applies a transformation predicate to a template. Variables of the
/// template keep their numbers; new ones are numbered from `gen`.
fn transform_template(
    eng: &mut Engine,
    tr: Transformer,
    t: &Term,
    gen: &mut VarGen,
    module: Atom,
) -> EngineResult<Option<Term>> {
    let mut env: Vec<Option<Term>> = (0..gen.next).map(|_| Some(eng.store.new_var())).collect();
    let inst = eng.store.instantiate(t, &mut env);
    let mut map: Vec<VarId> = env.iter().map(|v| v.as_ref().unwrap().as_var().unwrap()).collect();
    let out = eng.store.new_var();
    let result = run_transformer(eng, tr, inst, out, module, &mut |eng, out| eng.store.detach_with(out, &mut map))?;
    gen.next = gen.next.max(map.len() as u32);
    Ok(result)
}

/// Runs `Trans(In, Out[, Module])` once and hands `Out` to `take` while
/// the bindings are still in place.
pub(crate) fn run_transformer(
    eng: &mut Engine,
    tr: Transformer,
    input: Term,
    out: Term,
    module: Atom,
    take: &mut dyn FnMut(&mut Engine, &Term) -> Term,
) -> EngineResult<Option<Term>> {
    // a transformer that is not defined yet (e.g. while its own clauses
    // are being read) leaves terms alone
    if eng.resolve(tr.pred, tr.arity, tr.module, None).is_err() {
        return Ok(None);
    }
    let mut args = vec![input, out.clone()];
    if tr.arity == 3 {
        args.push(Term::Atom(module));
    }
    let goal = Term::compound(Atom::COLON, vec![Term::Atom(tr.module), Term::compound(tr.pred, args)]);
    let mut result = None;
    eng.sub_solve(goal, tr.module, &mut |eng| {
        result = Some(take(eng, &out));
        Ok(false)
    })?;
    Ok(result)
}

impl Engine {
    /// The transformation of `key` in a category, as seen from `module`.
    fn find_macro(&self, cat: Category, key: (Atom, usize), module: Atom, qual: Option<Atom>) -> Option<Transformer> {
        let table = |m: Atom| {
            let mods = self.modules.get(&m)?;
            let t = match cat {
                Category::Term => &mods.macros.term,
                Category::Clause => &mods.macros.clause,
                Category::Goal => &mods.macros.goal,
                Category::Write => &mods.macros.write,
            };
            t.get(&key).copied()
        };
        // a goal expansion is as visible as the predicate it belongs to
        let exported = |m: Atom, tr: &Transformer| {
            tr.exported || (cat == Category::Goal && self.modules[&m].exports.contains(&key))
        };
        match qual {
            Some(q) if q != module => table(q).filter(|tr| exported(q, tr)),
            _ => table(module).or_else(|| {
                let imports = self.modules.get(&module)?.imports.clone();
                imports.into_iter().find_map(|i| table(i).filter(|tr| exported(i, tr)))
            }),
        }
    }

    pub(crate) fn write_macro(&self, key: (Atom, usize), module: Atom) -> Option<Transformer> {
        self.find_macro(Category::Write, key, module, None)
            .or_else(|| self.find_macro(Category::Write, key, Atom::USER, None))
    }

    fn has_macros(&self, cat: Category, module: Atom) -> bool {
        let any = |m: &super::Module| match cat {
            Category::Term => !m.macros.term.is_empty(),
            Category::Clause => !m.macros.clause.is_empty(),
            _ => true,
        };
        let Some(m) = self.modules.get(&module) else { return false };
        any(m) || m.imports.iter().any(|i| self.modules.get(i).is_some_and(any))
    }

    fn add_clause(&mut self, module: Atom, clause: &Term, consult: u32) -> EngineResult<()> {
        let (clause, nvars) = compact(clause);
        let (head, body) = if clause.is_functor(Atom::NECK, 2) {
            (clause.arg_at(1).unwrap(), clause.arg_at(2).unwrap())
        } else {
            (clause.clone(), Term::Atom(Atom::TRUE))
        };
        let (name, arity) = match &head {
            Term::Atom(a) => (*a, 0),
            Term::Struct(c) => (c.name(), c.arity()),
            Term::Var(_) => return Err(EngineError::Instantiation("clause head".into())),
            other => return Err(EngineError::Type(format!("callable clause head expected, found {}", other))),
        };
        if matches!((name.name(), arity), (",", 2) | (";", 2) | ("->", 2) | ("!", 0) | (":-", 1) | ("\\+", 1)) {
            return Err(EngineError::Type(format!("cannot redefine control construct {}", indicator(name, arity))));
        }
        let key = match &head {
            Term::Struct(c) => Key::of(&c.arg(0)),
            _ => None,
        };
        let redefined = {
            let pred = self.module_mut(module).preds.entry((name, arity)).or_default();
            let stale = pred.consult != consult && !pred.clauses.is_empty();
            if stale {
                pred.clauses = Rc::new(Vec::new());
            }
            pred.consult = consult;
            Rc::make_mut(&mut pred.clauses).push(Rc::new(Clause { head, body, nvars, key }));
            stale
        };
        if redefined {
            self.warn(format!("redefining {}:{}", module, indicator(name, arity)));
        }
        Ok(())
    }
}

/// What body expansion sees of the loading engine.
struct Host<'a> {
    eng: &'a mut Engine,
    module: Atom,
    consult: u32,
    names: &'a [(String, VarId)],
    err: Option<EngineError>,
    /// Collects auxiliary clauses instead of defining them.
    aux: Option<Vec<Term>>,
}

impl StructScope for Host<'_> {
    fn lookup_struct(&self, name: Atom) -> Option<StructDecl> {
        self.eng.visible_struct(self.module, name)
    }
}

impl GoalHost for Host<'_> {
    fn ic_visible(&self, qual: Option<Atom>) -> bool {
        match qual {
            Some(q) => q == Atom::IC,
            None => {
                let m = &self.eng.modules[&self.module];
                self.module == Atom::IC || m.imports.contains(&Atom::IC)
            }
        }
    }

    fn user_expansion(&mut self, goal: &Term, qual: Option<Atom>, gen: &mut VarGen) -> ExpandResult<Option<Term>> {
        let Some(key) = goal.functor() else { return Ok(None) };
        let Some(tr) = self.eng.find_macro(Category::Goal, key, self.module, qual) else { return Ok(None) };
        transform_template(self.eng, tr, goal, gen, self.module).map_err(|e| ExpandError::Hook(e.to_string()))
    }

    fn aux_name(&mut self) -> Atom {
        let m = self.eng.module_mut(self.module);
        m.aux_count += 1;
        Atom::new(&format!("do__{}", m.aux_count))
    }

    fn add_aux(&mut self, clause: Term) -> ExpandResult<()> {
        if let Some(aux) = &mut self.aux {
            aux.push(clause);
            return Ok(());
        }
        if let Err(e) = self.eng.add_clause(self.module, &clause, self.consult) {
            self.err = Some(e);
        }
        Ok(())
    }

    fn warn_unshared(&mut self, vars: &[VarId]) {
        let names: Vec<String> = vars
            .iter()
            .map(|v| match self.names.iter().find(|(_, w)| w == v) {
                Some((n, _)) => n.clone(),
                None => format!("_{}", v.0),
            })
            .collect();
        self.eng.warn(format!("variables {} are used inside a loop but not passed as param", names.join(", ")));
    }
}

fn expand_goal(
    eng: &mut Engine,
    module: Atom,
    body: &Term,
    clause: &Term,
    gen: &mut VarGen,
    names: &[(String, VarId)],
) -> EngineResult<Term> {
    expand_goal_in(eng, module, body, clause, gen, names, None).map(|(t, _)| t)
}

fn expand_goal_in(
    eng: &mut Engine,
    module: Atom,
    body: &Term,
    clause: &Term,
    gen: &mut VarGen,
    names: &[(String, VarId)],
    aux: Option<Vec<Term>>,
) -> EngineResult<(Term, Option<Vec<Term>>)> {
    let consult = eng.consult_id;
    let mut host = Host { eng, module, consult, names, err: None, aux };
    let out = expand_body(&mut host, body, clause, gen)?;
    match host.err {
        Some(e) => Err(e),
        None => Ok((out, host.aux)),
    }
}

/// Term macros: built-in struct syntax, then user macros bottom-up.
fn apply_term_macros(eng: &mut Engine, t: &Term, module: Atom, gen: &mut VarGen) -> EngineResult<Term> {
    let scope = ModuleScope { eng, module };
    let t = expand_struct_syntax(t, &scope, gen)?;
    if !eng.has_macros(Category::Term, module) {
        return Ok(t);
    }
    rewrite_bottom_up(&t, &mut |node: Term| {
        let Some(key) = node.functor() else { return Ok(node) };
        match eng.find_macro(Category::Term, key, module, None) {
            Some(tr) => Ok(transform_template(eng, tr, &node, gen, module)?.unwrap_or(node)),
            None => Ok(node),
        }
    })
}

struct ModuleScope<'a> {
    eng: &'a Engine,
    module: Atom,
}

impl StructScope for ModuleScope<'_> {
    fn lookup_struct(&self, name: Atom) -> Option<StructDecl> {
        self.eng.visible_struct(self.module, name)
    }
}

fn comma_items(t: &Term) -> Vec<Term> {
    if let Some(items) = list_template(t) {
        return items;
    }
    crate::expand::conjuncts(t)
}

fn list_template(t: &Term) -> Option<Vec<Term>> {
    let mut out = Vec::new();
    let mut cur = t.clone();
    while cur.is_functor(Atom::DOT, 2) {
        out.push(cur.arg_at(1).unwrap());
        cur = cur.arg_at(2).unwrap();
    }
    (cur.as_atom() == Some(Atom::NIL)).then_some(out)
}

fn pred_spec(t: &Term) -> EngineResult<(Atom, usize)> {
    if t.is_functor(Atom::SLASH, 2) {
        if let (Some(n), Some(a)) = (t.arg_at(1).unwrap().as_atom(), t.arg_at(2).unwrap().as_int()) {
            if a >= 0 {
                return Ok((n, a as usize));
            }
        }
    }
    Err(EngineError::Type(format!("predicate indicator expected, found {}", t)))
}

struct Loading {
    module: Atom,
    consult: u32,
    errors: Vec<String>,
}

impl Loading {
    fn declare_macro(&self, eng: &mut Engine, args: &[Term], exported: bool, portray: bool) -> EngineResult<()> {
        let key = pred_spec(&args[0])?;
        let (pred, arity) = pred_spec(&args[1])?;
        if arity != 2 && arity != 3 {
            return Err(EngineError::Domain(format!("transformation predicate must have arity 2 or 3: {}", args[1])));
        }
        let opts = args.get(2).and_then(list_template).unwrap_or_default();
        let has = |n: &str| opts.iter().any(|o| o.as_atom() == Some(Atom::new(n)));
        let tr = Transformer { pred, arity, module: self.module, exported };
        let m = &mut eng.module_mut(self.module).macros;
        let table = if portray || has("write") {
            &mut m.write
        } else if has("goal") {
            &mut m.goal
        } else if has("clause") {
            &mut m.clause
        } else {
            &mut m.term
        };
        table.insert(key, tr);
        Ok(())
    }

    /// `local`/`export` declarations.
    fn visibility(&mut self, eng: &mut Engine, spec: &Term, exported: bool) -> EngineResult<()> {
        for item in comma_items(spec) {
            match item.functor().map(|(n, a)| (n.name(), a)) {
                Some(("/", 2)) => {
                    let key = pred_spec(&item)?;
                    let m = eng.module_mut(self.module);
                    if exported {
                        m.exports.insert(key);
                    } else {
                        m.exports.remove(&key);
                    }
                }
                Some(("struct", 1)) => {
                    let decl = StructDecl::from_term(&item.arg_at(1).unwrap())?;
                    eng.module_mut(self.module).structs.insert(decl.name, (decl, exported));
                }
                Some(("macro", 3)) => self.declare_macro(eng, &item.args(), exported, false)?,
                Some(("portray", 3)) | Some(("portray", 2)) => self.declare_macro(eng, &item.args(), exported, true)?,
                Some(("op", 3)) => self.op(eng, &item)?,
                Some(("domain", 1)) => {}
                _ => return Err(EngineError::Domain(format!("unknown declaration {}", item))),
            }
        }
        Ok(())
    }

    fn op(&self, eng: &mut Engine, t: &Term) -> EngineResult<()> {
        let a = t.args();
        let (Some(p), Some(typ)) = (a[0].as_int(), a[1].as_atom()) else {
            return Err(EngineError::Type(format!("malformed operator declaration {}", t)));
        };
        let names = list_template(&a[2]).unwrap_or_else(|| vec![a[2].clone()]);
        for n in names {
            let n = n.as_atom().ok_or_else(|| EngineError::Type(format!("atom expected in {}", t)))?;
            eng.module_mut(self.module).ops.declare(p, typ.name(), n).map_err(|e| EngineError::Domain(e.to_string()))?;
        }
        Ok(())
    }

    fn import(&self, eng: &mut Engine, m: &Term) -> EngineResult<()> {
        let m = match m.functor() {
            Some((n, 1)) if n.name() == "library" => m.arg_at(1).unwrap(),
            _ => m.clone(),
        };
        let m = m.as_atom().ok_or_else(|| EngineError::Type(format!("module name expected, found {}", m)))?;
        let cur = eng.module_mut(self.module);
        if m != self.module && !cur.imports.contains(&m) {
            cur.imports.push(m);
        }
        eng.module_mut(m);
        Ok(())
    }

    /// Handles `:- D`. Returns whether `D` was a declaration.
    fn directive(&mut self, eng: &mut Engine, d: &Term, rt: &ReadTerm, gen: &mut VarGen) -> EngineResult<()> {
        let fa = d.functor().map(|(n, a)| (n.name(), a));
        match fa {
            Some(("module", 1)) | Some(("module", 2)) => {
                let m = d.arg_at(1).unwrap().as_atom().ok_or_else(|| EngineError::Type("module name expected".into()))?;
                eng.modules.entry(m).or_insert_with(|| super::Module::new(vec![Atom::IC]));
                self.module = m;
                if let Ok(exports) = d.arg_at(2) {
                    self.visibility(eng, &exports, true)?;
                }
            }
            Some(("export", 1)) => self.visibility(eng, &d.arg_at(1).unwrap(), true)?,
            Some(("local", 1)) => self.visibility(eng, &d.arg_at(1).unwrap(), false)?,
            Some(("import", 1)) | Some(("lib", 1)) | Some(("use_module", 1)) => {
                for m in comma_items(&d.arg_at(1).unwrap()) {
                    self.import(eng, &m)?;
                }
            }
            Some(("op", 3)) => self.op(eng, d)?,
            Some(("inline", 2)) => {
                let key = pred_spec(&d.arg_at(1).unwrap())?;
                let (pred, arity) = pred_spec(&d.arg_at(2).unwrap())?;
                if arity != 2 && arity != 3 {
                    return Err(EngineError::Domain("inline transformation must have arity 2 or 3".into()));
                }
                let tr = Transformer { pred, arity, module: self.module, exported: false };
                eng.module_mut(self.module).macros.goal.insert(key, tr);
            }
            Some(("demon", 1)) => {
                for s in comma_items(&d.arg_at(1).unwrap()) {
                    let key = pred_spec(&s)?;
                    eng.module_mut(self.module).demons.insert(key);
                }
            }
            Some(("dynamic", 1)) | Some(("discontiguous", 1)) => {}
            _ => {
                let goal = match fa {
                    Some(("initialization", 1)) => d.arg_at(1).unwrap(),
                    _ => d.clone(),
                };
                let goal = expand_goal(eng, self.module, &goal, &goal, gen, &rt.var_names)?;
                let mut env = Vec::new();
                let goal = eng.store.instantiate(&goal, &mut env);
                let mut ok = false;
                eng.sub_solve(goal, self.module, &mut |_| {
                    ok = true;
                    Ok(false)
                })?;
                if !ok {
                    eng.warn(format!("{}: directive failed: {}", rt.pos, crate::reader::write_detached(d, true)));
                }
            }
        }
        Ok(())
    }

    fn clause(&mut self, eng: &mut Engine, rt: &ReadTerm) -> EngineResult<()> {
        let mut gen = VarGen::new(rt.nvars);
        let mut t = apply_term_macros(eng, &rt.term, self.module, &mut gen)?;
        if t.is_functor(Atom::NECK, 1) {
            let d = t.arg_at(1).unwrap();
            return self.directive(eng, &d, rt, &mut gen);
        }
        if t.is_functor(Atom::QUERY, 1) {
            let d = t.arg_at(1).unwrap();
            return self.directive(eng, &d, rt, &mut gen);
        }
        if eng.has_macros(Category::Clause, self.module) {
            if let Some(key) = t.functor() {
                if let Some(tr) = eng.find_macro(Category::Clause, key, self.module, None) {
                    if let Some(nt) = transform_template(eng, tr, &t, &mut gen, self.module)? {
                        t = nt;
                    }
                }
            }
        }
        // a clause macro may produce a list of clauses
        let clauses = list_template(&t).unwrap_or_else(|| vec![t]);
        for c in clauses {
            let c = if c.is_functor(Atom::NECK, 2) {
                let body = c.arg_at(2).unwrap();
                let body = expand_goal(eng, self.module, &body, &c, &mut gen, &rt.var_names)?;
                Term::compound(Atom::NECK, vec![c.arg_at(1).unwrap(), body])
            } else {
                c
            };
            eng.add_clause(self.module, &c, self.consult)?;
        }
        Ok(())
    }
}

pub(crate) fn consult(eng: &mut Engine, text: &str, file: &str) -> EngineResult<()> {
    eng.consult_id += 1;
    let mut reader = TermReader::with_file(text, Some(file))?;
    let mut ld = Loading { module: Atom::USER, consult: eng.consult_id, errors: Vec::new() };
    loop {
        let ops = eng.ops(ld.module).clone();
        let rt = match reader.next_term(&ops) {
            Ok(Some(rt)) => rt,
            Ok(None) => break,
            Err(e) => {
                ld.errors.push(e.to_string());
                continue;
            }
        };
        if rt.term.as_atom() == Some(Atom::END_OF_FILE) {
            break;
        }
        if let Err(e) = ld.clause(eng, &rt) {
            ld.errors.push(format!("{}: {}", rt.pos, e));
        }
    }
    if ld.errors.is_empty() {
        Ok(())
    } else {
        Err(EngineError::Load(ld.errors))
    }
}

/// Reads exactly one term; the final full stop is optional.
fn read_one(eng: &Engine, text: &str, module: Atom) -> EngineResult<ReadTerm> {
    use crate::reader::{SourcePos, SyntaxError};
    let text = if text.ends_with('.') { format!("{}\n", text) } else { format!("{} .\n", text) };
    let mut reader = TermReader::new(&text)?;
    let ops = eng.ops(module).clone();
    let rt = reader
        .next_term(&ops)?
        .ok_or_else(|| EngineError::Syntax(SyntaxError { message: "empty input".into(), pos: SourcePos::new(1, 1) }))?;
    if !reader.at_eof() {
        return Err(EngineError::Syntax(SyntaxError { message: "text after the end of the term".into(), pos: rt.pos.clone() }));
    }
    Ok(rt)
}

/// Writes a clause template with its source variable names; variables
/// introduced by expansion print as `_` when single, `_N` otherwise.
struct NamedCtx<'a> {
    ops: &'a OpTable,
    names: HashMap<VarId, String>,
}

impl WriteCtx for NamedCtx<'_> {
    fn ops(&self) -> &OpTable {
        self.ops
    }

    fn var_name(&self, v: VarId) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("_{}", v.0))
    }
}

/// Expands a clause as consulting would, without adding it; auxiliary
/// clauses of loops follow the clause itself.
pub(crate) fn expand_clause(eng: &mut Engine, text: &str, module: Atom) -> EngineResult<Vec<String>> {
    let rt = read_one(eng, text.trim(), module)?;
    let mut gen = VarGen::new(rt.nvars);
    let mut t = apply_term_macros(eng, &rt.term, module, &mut gen)?;
    if let Some(key) = t.functor() {
        if let Some(tr) = eng.find_macro(Category::Clause, key, module, None) {
            if let Some(nt) = transform_template(eng, tr, &t, &mut gen, module)? {
                t = nt;
            }
        }
    }
    let mut clauses = Vec::new();
    for c in list_template(&t).unwrap_or_else(|| vec![t]) {
        if c.is_functor(Atom::NECK, 2) {
            let (body, aux) =
                expand_goal_in(eng, module, &c.arg_at(2).unwrap(), &c, &mut gen, &rt.var_names, Some(Vec::new()))?;
            clauses.push(Term::compound(Atom::NECK, vec![c.arg_at(1).unwrap(), body]));
            clauses.extend(aux.unwrap_or_default());
        } else {
            clauses.push(c);
        }
    }
    let mut out = Vec::new();
    for c in clauses {
        let mut names: HashMap<VarId, String> = rt.var_names.iter().map(|(n, v)| (*v, n.clone())).collect();
        let mut counts: HashMap<VarId, usize> = HashMap::new();
        for v in template_vars_all(&c) {
            *counts.entry(v).or_default() += 1;
        }
        for (v, n) in counts {
            names.entry(v).or_insert_with(|| if n == 1 { "_".into() } else { format!("_{}", v.0) });
        }
        let ctx = NamedCtx { ops: eng.ops(module), names };
        let opts = WriteOpts { transforms: false, ..WriteOpts::quoted() };
        out.push(write_term(&c, &ctx, opts));
    }
    Ok(out)
}

/// Every variable occurrence in a template, repeats included.
fn template_vars_all(t: &Term) -> Vec<VarId> {
    let mut out = Vec::new();
    let mut stack = vec![t.clone()];
    while let Some(t) = stack.pop() {
        match t {
            Term::Var(v) => out.push(v),
            Term::Struct(c) => stack.extend(c.args().iter().cloned()),
            _ => {}
        }
    }
    out
}

/// Reads and expands a query; returns the goal and its named variables.
pub(crate) fn read_query(eng: &mut Engine, text: &str) -> EngineResult<(Term, Vec<(String, Term)>)> {
    let trimmed = text.trim();
    let trimmed = trimmed.strip_prefix("?-").unwrap_or(trimmed);
    let rt = read_one(eng, trimmed, Atom::USER)?;
    let mut gen = VarGen::new(rt.nvars);
    let t = apply_term_macros(eng, &rt.term, Atom::USER, &mut gen)?;
    let goal = expand_goal(eng, Atom::USER, &t, &t, &mut gen, &rt.var_names)?;
    let mut env = Vec::new();
    let goal = eng.store.instantiate(&goal, &mut env);
    // names used only inside a loop body are gone from the expanded goal
    let mut names = Vec::new();
    for (n, v) in rt.var_names.iter().filter(|(n, _)| !n.starts_with('_')) {
        let t = match env.get(v.0 as usize).cloned().flatten() {
            Some(t) => t,
            None => eng.store.new_var(),
        };
        names.push((n.clone(), t));
    }
    Ok((goal, names))
}

/// Expands a do-loop or `update_struct/4` met at run time.
pub(crate) fn expand_at_runtime(eng: &mut Engine, goal: &Term, module: Atom) -> EngineResult<Term> {
    let (t, vars) = eng.store.detach(goal);
    let mut gen = VarGen::new(vars.len() as u32);
    let expanded = expand_goal(eng, module, &t, &t, &mut gen, &[])?;
    if expanded.is_functor(Atom::new("update_struct"), 4) {
        return Err(EngineError::Instantiation("update_struct/4".into()));
    }
    let mut env: Vec<Option<Term>> = vars.into_iter().map(|v| Some(Term::Var(v))).collect();
    Ok(eng.store.instantiate(&expanded, &mut env))
}
