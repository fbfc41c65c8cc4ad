//! Term output. Everything the writer needs from a running engine comes in
//! through [`WriteCtx`], so detached terms print without one.

use super::ops::OpTable;
use crate::atom::Atom;
use crate::number::Number;
use crate::term::{SuspId, Term, VarId};

pub trait WriteCtx {
    fn ops(&self) -> &OpTable;

    /// Follows variable bindings.
    fn deref(&self, t: &Term) -> Term {
        t.clone()
    }

    fn var_name(&self, v: VarId) -> String {
        format!("_{}", v.0)
    }

    /// Text printed right after the variable name, e.g. a domain `{1..5}`.
    fn var_annotation(&self, _v: VarId) -> Option<String> {
        None
    }

    /// Output transformation applied to a subterm before it is written.
    fn transform(&self, _t: &Term) -> Option<Term> {
        None
    }

    fn susp_text(&self, s: SuspId) -> String {
        format!("'SUSP-{}'", s.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WriteOpts {
    pub quoted: bool,
    pub ignore_ops: bool,
    pub transforms: bool,
    pub annotate: bool,
}

impl WriteOpts {
    /// `write/1`
    pub fn plain() -> Self {
        WriteOpts { quoted: false, ignore_ops: false, transforms: true, annotate: false }
    }

    /// `writeq/1` and answer printing.
    pub fn quoted() -> Self {
        WriteOpts { quoted: true, ignore_ops: false, transforms: true, annotate: false }
    }

    /// `write_canonical/1`: no operators, no transformations.
    pub fn canonical() -> Self {
        WriteOpts { quoted: true, ignore_ops: true, transforms: false, annotate: false }
    }
}

struct DetachedCtx(OpTable);

impl WriteCtx for DetachedCtx {
    fn ops(&self) -> &OpTable {
        &self.0
    }
}

thread_local! {
    static DEFAULT_OPS: DetachedCtx = DetachedCtx(OpTable::default());
}

/// Writes a term that is not attached to any store, using the default
/// operator table.
pub fn write_detached(t: &Term, quoted: bool) -> String {
    let opts = if quoted { WriteOpts::quoted() } else { WriteOpts::plain() };
    DEFAULT_OPS.with(|ctx| write_term(t, ctx, opts))
}

pub fn write_term(t: &Term, ctx: &dyn WriteCtx, opts: WriteOpts) -> String {
    let mut w = Writer { ctx, opts, out: String::new() };
    w.term(t, 1200);
    w.out
}

fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

fn is_alnum(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Whether an atom can be written without quotes.
pub fn atom_is_bare(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        None => false,
        Some(c) if c.is_lowercase() => s.chars().all(is_alnum),
        Some(_) if matches!(s, "[]" | "{}" | "!" | ";" | "|") => s != "|",
        Some(_) => s.chars().all(is_symbol_char) && s != "." && !s.starts_with("/*"),
    }
}

pub fn quote_atom(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    escape_into(&mut out, s, '\'');
    out.push('\'');
    out
}

fn escape_into(out: &mut String, s: &str, q: char) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
}

pub fn atom_text(a: Atom, quoted: bool) -> String {
    let s = a.name();
    if quoted && !atom_is_bare(s) {
        quote_atom(s)
    } else {
        s.to_string()
    }
}

struct Writer<'a> {
    ctx: &'a dyn WriteCtx,
    opts: WriteOpts,
    out: String,
}

impl Writer<'_> {
    /// Appends `s`, inserting a space where it would otherwise fuse with
    /// the previous token.
    fn emit(&mut self, s: &str) {
        if let (Some(prev), Some(next)) = (self.out.chars().last(), s.chars().next()) {
            let glue = (is_symbol_char(prev) && is_symbol_char(next))
                || (is_alnum(prev) && is_alnum(next))
                || (prev == ',' && next == ',');
            if glue {
                self.out.push(' ');
            }
        }
        self.out.push_str(s);
    }

    fn atom(&mut self, a: Atom) {
        let s = atom_text(a, self.opts.quoted);
        self.emit(&s);
    }

    fn number(&mut self, n: &Number) {
        let s = n.to_string();
        self.emit(&s);
    }

    fn term(&mut self, t: &Term, max: u16) {
        let mut t = self.ctx.deref(t);
        if self.opts.transforms {
            if let Some(t2) = self.ctx.transform(&t) {
                t = self.ctx.deref(&t2);
            }
        }
        match &t {
            Term::Var(v) => {
                let mut s = self.ctx.var_name(*v);
                if self.opts.annotate {
                    if let Some(a) = self.ctx.var_annotation(*v) {
                        s.push_str(&a);
                    }
                }
                self.emit(&s);
            }
            Term::Atom(a) => {
                let ops = self.ctx.ops();
                let op_pri = [ops.prefix(*a), ops.infix(*a), ops.postfix(*a)]
                    .into_iter()
                    .flatten()
                    .map(|d| d.priority)
                    .max();
                if !self.opts.ignore_ops && op_pri.is_some_and(|p| p > max) {
                    self.emit("(");
                    self.atom(*a);
                    self.emit(")");
                } else {
                    self.atom(*a);
                }
            }
            Term::Int(_) | Term::BigInt(_) | Term::Rat(_) | Term::Float(_) | Term::Breal(_) => {
                self.number(&t.to_number().unwrap())
            }
            Term::Str(s) => {
                if self.opts.quoted {
                    let mut q = String::from("\"");
                    escape_into(&mut q, s, '"');
                    q.push('"');
                    self.emit(&q);
                } else {
                    self.emit(s);
                }
            }
            Term::Susp(s) => {
                let s = self.ctx.susp_text(*s);
                self.emit(&s);
            }
            Term::Struct(c) => {
                let name = c.name();
                let args = c.args().clone();
                self.compound(&t, name, &args, max);
            }
        }
    }

    fn args(&mut self, args: &[Term]) {
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.term(a, 999);
        }
    }

    fn list(&mut self, t: &Term) {
        self.emit("[");
        let mut cur = t.clone();
        let mut first = true;
        loop {
            match &cur {
                Term::Struct(c) if c.name() == Atom::DOT && c.arity() == 2 => {
                    if !first {
                        self.out.push_str(", ");
                    }
                    first = false;
                    self.term(&c.arg(0), 999);
                    cur = self.ctx.deref(&c.arg(1));
                }
                Term::Atom(Atom::NIL) => break,
                _ => {
                    self.out.push('|');
                    self.term(&cur, 999);
                    break;
                }
            }
        }
        self.out.push(']');
    }

    fn is_proper_list(&self, t: &Term) -> bool {
        let mut cur = self.ctx.deref(t);
        loop {
            match &cur {
                Term::Atom(Atom::NIL) => return true,
                Term::Struct(c) if c.name() == Atom::DOT && c.arity() == 2 => {
                    cur = self.ctx.deref(&c.arg(1));
                }
                _ => return false,
            }
        }
    }

    fn compound(&mut self, t: &Term, name: Atom, args: &[Term], max: u16) {
        if name == Atom::DOT && args.len() == 2 {
            return self.list(t);
        }
        if !self.opts.ignore_ops {
            if name == Atom::CURLY && args.len() == 1 {
                self.emit("{");
                self.term(&args[0], 1200);
                self.out.push('}');
                return;
            }
            if self.opts.transforms
                && name == Atom::SUBSCRIPT
                && args.len() == 2
                && self.ctx.deref(&args[0]).is_var()
                && self.is_proper_list(&args[1])
            {
                self.term(&args[0], 0);
                let idx = self.ctx.deref(&args[1]);
                self.list(&idx);
                return;
            }
            let ops = self.ctx.ops();
            if args.len() == 2 {
                if let Some(def) = ops.infix(name) {
                    let (la, ra) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.term(&args[0], la);
                    match name.name() {
                        "," => self.out.push_str(", "),
                        ":" => self.atom(name),
                        _ => {
                            self.out.push(' ');
                            self.atom(name);
                            self.out.push(' ');
                        }
                    }
                    self.term(&args[1], ra);
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
            }
            if args.len() == 1 {
                if let Some(def) = ops.prefix(name) {
                    let (_, ra) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.atom(name);
                    let arg = self.ctx.deref(&args[0]);
                    let tight = matches!(name.name(), "-" | "+" | "\\")
                        && !arg.is_number()
                        && !arg.is_functor(Atom::COMMA, 2)
                        && !arg.as_atom().is_some_and(|a| ops.is_op(a));
                    if !tight {
                        self.out.push(' ');
                    }
                    // an operator atom as operand always gets brackets
                    match arg.as_atom() {
                        Some(a) if ops.is_op(a) => {
                            self.out.push('(');
                            self.atom(a);
                            self.out.push(')');
                        }
                        _ => self.term(&arg, ra),
                    }
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
                if let Some(def) = ops.postfix(name) {
                    let (la, _) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.term(&args[0], la);
                    self.atom(name);
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
            }
        }
        self.atom(name);
        self.out.push('(');
        self.args(args);
        self.out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::parser::read_term;

    fn show(s: &str) -> String {
        write_detached(&read_term(s, &OpTable::default()).unwrap().term, true)
    }

    #[test]
    fn operators_and_lists() {
        assert_eq!(show("1+2*3"), "1 + 2 * 3");
        assert_eq!(show("(1+2)*3"), "(1 + 2) * 3");
        assert_eq!(show("a-(b-c)"), "a - (b - c)");
        assert_eq!(show("[a,b|T]"), "[a, b|_2]".replace("_2", "_0"));
        assert_eq!(show("f((a,b))"), "f((a, b))");
        assert_eq!(show("- 1"), "- 1");
        assert_eq!(show("-a"), "-a");
        assert_eq!(show("- (-1)"), "- -1");
        assert_eq!(show("\\+a"), "\\+ a");
        assert_eq!(show("f(:-)"), "f((:-))");
        assert_eq!(show("a:b:c"), "a:b:c");
    }

    #[test]
    fn quoting() {
        assert_eq!(show("'hello world'"), "'hello world'");
        assert_eq!(show("'A'"), "'A'");
        assert_eq!(show("[]"), "[]");
        assert_eq!(show("'don''t'"), "'don\\'t'");
        assert_eq!(show("\"str\""), "\"str\"");
    }

    #[test]
    fn sugar_forms() {
        assert_eq!(show("M[3,4]"), "_0[3, 4]");
        assert_eq!(show("[](a,b,c)"), "[](a, b, c)");
        assert_eq!(show("{a,b}"), "{a, b}");
        let t = read_term("a+b", &OpTable::default()).unwrap().term;
        assert_eq!(write_term(&t, &DetachedCtx(OpTable::default()), WriteOpts::canonical()), "+(a, b)");
    }

    #[test]
    fn numbers() {
        assert_eq!(show("1_3"), "1_3");
        assert_eq!(show("2.5"), "2.5");
        assert_eq!(show("3.0__3.0"), "3.0__3.0");
        assert_eq!(show("1 - -1"), "1 - -1");
    }
}
