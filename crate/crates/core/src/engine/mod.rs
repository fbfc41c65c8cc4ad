//! The resolution engine: clause database with module-lite scoping, an AST
//! interpreter with a priority-driven suspension scheduler, and the
//! toplevel query interface.

mod builtins;
mod icnat;
mod loader;
mod machine;
mod print;

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::arith::ArithError;
use crate::atom::Atom;
use crate::expand::{ExpandError, StructDecl};
use crate::ic::IcError;
use crate::reader::{OpTable, SyntaxError};
use crate::store::{Mark, Store};
use crate::term::{SuspId, Term};

pub use print::{Answer, Delayed};

use machine::{Alt, Choice, Cont, Frame};

/// Scheduler limit while no suspension is running: every priority may run.
pub(crate) const TOP_PRIO: u8 = 13;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("existence error: unknown {0}")]
    Existence(String),
    #[error("instantiation error in {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("arithmetic error: {0}")]
    Eval(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("floundering: goals left delayed: {}", .0.join(", "))]
    Floundering(Vec<String>),
    #[error("expansion error{}: {msg}", .at.as_ref().map(|p| format!(" at {}", p)).unwrap_or_default())]
    Expansion { msg: String, at: Option<String> },
    #[error("{}", .0.join("\n"))]
    Load(Vec<String>),
    #[error("uncaught exception: {0}")]
    Thrown(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<ArithError> for EngineError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::Instantiation => EngineError::Instantiation("arithmetic".into()),
            ArithError::Range { .. } => EngineError::Range(e.to_string()),
            ArithError::Domain(m) => EngineError::Domain(m),
            ArithError::Type(m) => EngineError::Type(m),
            ArithError::NotEvaluable(m) => EngineError::Type(format!("{} is not evaluable", m)),
            ArithError::Num(n) => EngineError::Eval(n.to_string()),
        }
    }
}

impl From<IcError> for EngineError {
    fn from(e: IcError) -> Self {
        match e {
            IcError::Instantiation => EngineError::Instantiation("constraint".into()),
            IcError::Type(m) => EngineError::Type(m),
            IcError::Unsupported(m) => EngineError::Unsupported(m),
        }
    }
}

impl From<ExpandError> for EngineError {
    fn from(e: ExpandError) -> Self {
        EngineError::Expansion { msg: e.to_string(), at: None }
    }
}

pub type EngineResult<T> = Result<T, EngineError>;

/// Execution context handed to native predicates.
#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    /// Context module of the call.
    pub module: Atom,
    /// The suspension whose woken goal (transitively) issued this call.
    pub susp: Option<SuspId>,
    /// True when this very goal is the woken goal of `susp`.
    pub woken: bool,
}

impl Ctx {
    /// The suspension a native demon runs as, if any.
    pub fn demon(&self) -> Option<SuspId> {
        if self.woken {
            self.susp
        } else {
            None
        }
    }
}

/// What a native predicate asks the machine to do next.
pub enum Outcome {
    Fail,
    True,
    /// Continue with this goal, as if by `call/1`.
    Goal(Term),
}

pub type NativeFn = fn(&mut Engine, &[Term], &Ctx) -> EngineResult<Outcome>;

#[derive(Clone, Copy)]
pub(crate) struct Native {
    pub f: NativeFn,
    pub owner: Atom,
}

/// First-argument index key.
#[derive(Clone, Debug)]
pub(crate) enum Key {
    Atom(Atom),
    Int(i64),
    Functor(Atom, usize),
    Other(Term),
}

impl Key {
    pub fn of(t: &Term) -> Option<Key> {
        Some(match t {
            Term::Var(_) => return None,
            Term::Atom(a) => Key::Atom(*a),
            Term::Int(i) => Key::Int(*i),
            Term::Struct(c) => Key::Functor(c.name(), c.arity()),
            other => Key::Other(other.clone()),
        })
    }

    pub fn matches(&self, other: &Key) -> bool {
        match (self, other) {
            (Key::Atom(a), Key::Atom(b)) => a == b,
            (Key::Int(a), Key::Int(b)) => a == b,
            (Key::Functor(f, n), Key::Functor(g, m)) => f == g && n == m,
            (Key::Other(a), Key::Other(b)) => crate::term::atomic_identical(a, b),
            _ => false,
        }
    }
}

/// A stored clause template.
#[derive(Debug)]
pub(crate) struct Clause {
    pub head: Term,
    pub body: Term,
    pub nvars: u32,
    pub key: Option<Key>,
}

#[derive(Default)]
pub(crate) struct Pred {
    pub clauses: Rc<Vec<Rc<Clause>>>,
    /// Load run that last (re)defined the predicate.
    pub consult: u32,
}

/// A predicate used to transform terms, goals or output.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Transformer {
    pub pred: Atom,
    pub arity: usize,
    pub module: Atom,
    pub exported: bool,
}

#[derive(Default)]
pub(crate) struct Macros {
    pub term: HashMap<(Atom, usize), Transformer>,
    pub clause: HashMap<(Atom, usize), Transformer>,
    pub goal: HashMap<(Atom, usize), Transformer>,
    pub write: HashMap<(Atom, usize), Transformer>,
}

pub(crate) struct Module {
    pub preds: HashMap<(Atom, usize), Pred>,
    pub exports: HashSet<(Atom, usize)>,
    pub imports: Vec<Atom>,
    pub demons: HashSet<(Atom, usize)>,
    pub ops: OpTable,
    pub structs: HashMap<Atom, (StructDecl, bool)>,
    pub macros: Macros,
    pub aux_count: usize,
}

impl Module {
    fn new(imports: Vec<Atom>) -> Module {
        Module {
            preds: HashMap::new(),
            exports: HashSet::new(),
            imports,
            demons: HashSet::new(),
            ops: OpTable::default(),
            structs: HashMap::new(),
            macros: Macros::default(),
            aux_count: 0,
        }
    }
}

pub struct Engine {
    pub store: Store,
    pub(crate) modules: HashMap<Atom, Module>,
    pub(crate) natives: HashMap<(Atom, usize), Native>,
    pub(crate) choices: Vec<Choice>,
    pub(crate) prio: u8,
    out: String,
    warnings: Vec<String>,
    events: Vec<Term>,
    undo_queue: Rc<RefCell<Vec<Term>>>,
    consult_id: u32,
    canonical: bool,
}

const SYSTEM_PRELUDE: &str = include_str!("prelude.pl");
const IC_PRELUDE: &str = include_str!("ic.pl");

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Engine {
        let mut store = Store::new();
        crate::ic::register(&mut store);
        let mut modules = HashMap::new();
        modules.insert(Atom::SYSTEM, Module::new(vec![]));
        modules.insert(Atom::IC, Module::new(vec![]));
        modules.insert(Atom::USER, Module::new(vec![Atom::IC]));
        let mut eng = Engine {
            store,
            modules,
            natives: HashMap::new(),
            choices: Vec::new(),
            prio: TOP_PRIO,
            out: String::new(),
            warnings: Vec::new(),
            events: Vec::new(),
            undo_queue: Rc::new(RefCell::new(Vec::new())),
            consult_id: 0,
            canonical: false,
        };
        builtins::install(&mut eng);
        eng.consult_str(SYSTEM_PRELUDE, "prelude.pl").expect("system prelude loads");
        eng.consult_str(IC_PRELUDE, "ic.pl").expect("ic prelude loads");
        eng.warnings.clear();
        eng
    }

    /// Registers a native predicate owned by `module` (`system` natives are
    /// visible everywhere).
    pub fn register_native(&mut self, module: Atom, name: &str, arity: usize, f: NativeFn) {
        self.natives.insert((Atom::new(name), arity), Native { f, owner: module });
    }

    /// Loads program text. Loading starts in module `user`; `:- module(M)`
    /// switches. All syntax and expansion errors of the text are collected.
    pub fn consult_str(&mut self, text: &str, file: &str) -> EngineResult<()> {
        loader::consult(self, text, file)
    }

    pub fn consult_file(&mut self, path: &std::path::Path) -> EngineResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Io(format!("{}: {}", path.display(), e)))?;
        self.consult_str(&text, &path.display().to_string())
    }

    /// Starts a query in module `user`. Answers are produced lazily; dropping
    /// the iterator undoes all of the query's bindings.
    pub fn query(&mut self, text: &str) -> EngineResult<Solutions<'_>> {
        let (goal, names) = loader::read_query(self, text)?;
        Ok(Solutions::new(self, goal, names, false))
    }

    /// Like [`Engine::query`], but an answer that leaves suspensions behind
    /// is a floundering error.
    pub fn query_strict(&mut self, text: &str) -> EngineResult<Solutions<'_>> {
        let (goal, names) = loader::read_query(self, text)?;
        Ok(Solutions::new(self, goal, names, true))
    }

    /// The clauses `text` stands for after all compile-time expansion,
    /// as read in `module`, loop auxiliaries included. Nothing is added
    /// to the program.
    pub fn expand_clause(&mut self, text: &str, module: &str) -> EngineResult<Vec<String>> {
        loader::expand_clause(self, text, Atom::new(module))
    }

    /// First answer of a query, if any.
    pub fn once(&mut self, text: &str) -> EngineResult<Option<Answer>> {
        self.query(text)?.next().transpose()
    }

    /// Whether a query succeeds at least once.
    pub fn succeeds(&mut self, text: &str) -> EngineResult<bool> {
        Ok(self.once(text)?.is_some())
    }

    /// Number of answers; floundering answers are an error.
    pub fn count_solutions(&mut self, text: &str) -> EngineResult<usize> {
        let mut sols = self.query_strict(text)?;
        let mut n = 0;
        while sols.advance()? {
            n += 1;
        }
        Ok(n)
    }

    /// Answers print in canonical syntax: quoted, no operators, no output
    /// transformations.
    pub fn set_canonical(&mut self, on: bool) {
        self.canonical = on;
    }

    /// Text written by `write/1` and friends since the last call.
    pub fn take_output(&mut self) -> String {
        std::mem::take(&mut self.out)
    }

    /// Load-time warnings since the last call.
    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    /// Terms recorded by `log_event/1` since the last call.
    pub fn take_events(&mut self) -> Vec<Term> {
        std::mem::take(&mut self.events)
    }

    pub(crate) fn write_out(&mut self, s: &str) {
        self.out.push_str(s);
    }

    pub(crate) fn warn(&mut self, s: String) {
        self.warnings.push(s);
    }

    pub(crate) fn module_mut(&mut self, m: Atom) -> &mut Module {
        self.modules.entry(m).or_insert_with(|| Module::new(vec![]))
    }

    /// Operator table used for reading and writing in module `m`.
    pub fn ops(&self, m: Atom) -> &OpTable {
        &self.modules.get(&m).unwrap_or(&self.modules[&Atom::USER]).ops
    }

    /// Structure declaration visible in module `m`.
    pub(crate) fn visible_struct(&self, m: Atom, name: Atom) -> Option<StructDecl> {
        let module = self.modules.get(&m)?;
        if let Some((d, _)) = module.structs.get(&name) {
            return Some(d.clone());
        }
        module.imports.iter().find_map(|i| match self.modules.get(i)?.structs.get(&name) {
            Some((d, true)) => Some(d.clone()),
            _ => None,
        })
    }
}

/// Lazily enumerated answers of a toplevel query.
pub struct Solutions<'e> {
    eng: &'e mut Engine,
    names: Vec<(String, Term)>,
    start: Option<Cont>,
    base: usize,
    mark: Mark,
    strict: bool,
    first_susp: usize,
    done: bool,
}

impl<'e> Solutions<'e> {
    fn new(eng: &'e mut Engine, goal: Term, names: Vec<(String, Term)>, strict: bool) -> Self {
        eng.prio = TOP_PRIO;
        let mark = eng.store.push_choicepoint();
        eng.choices.push(Choice { mark, alt: Alt::Barrier, cont: None, prio: TOP_PRIO });
        let base = eng.choices.len();
        let first_susp = eng.store.suspension_count();
        let start = machine::push(
            Frame::Goal { goal, module: Atom::USER, cutb: base, susp: None, woken: false },
            None,
        );
        Solutions { eng, names, start: Some(start), base, mark, strict, first_susp, done: false }
    }

    /// The engine, e.g. to inspect the store at the current answer.
    pub fn engine(&mut self) -> &mut Engine {
        self.eng
    }

    /// Moves to the next solution without formatting it.
    pub fn advance(&mut self) -> EngineResult<bool> {
        if self.done {
            return Ok(false);
        }
        let r = match self.start.take() {
            Some(c) => self.eng.run(c, self.base),
            None => self.eng.resume(self.base),
        };
        if !matches!(r, Ok(true)) {
            self.done = true;
            return r;
        }
        if self.strict {
            let left = self.eng.delayed_since(self.first_susp);
            if !left.is_empty() {
                self.done = true;
                return Err(EngineError::Floundering(self.eng.goal_texts(&left)));
            }
        }
        Ok(true)
    }

    /// Query variables and their current values.
    pub fn bindings(&self) -> &[(String, Term)] {
        &self.names
    }
}

impl Iterator for Solutions<'_> {
    type Item = EngineResult<Answer>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.advance() {
            Ok(true) => Some(self.eng.answer(&self.names)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

impl Drop for Solutions<'_> {
    fn drop(&mut self) {
        self.eng.unwind_to(self.base - 1, self.mark);
        self.eng.prio = TOP_PRIO;
        self.eng.undo_queue.borrow_mut().clear();
    }
}

/// Variables of a query, by name, for programmatic inspection.
pub fn binding<'a>(names: &'a [(String, Term)], name: &str) -> Option<&'a Term> {
    names.iter().find(|(n, _)| n == name).map(|(_, t)| t)
}
