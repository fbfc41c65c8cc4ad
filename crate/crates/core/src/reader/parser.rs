//! Operator-precedence term parser.
//!
//! Extensions over standard syntax, none of which overlaps with terms that
//! were valid before:
//! - `Var[I,J]` (no layout before `[`) reads as `subscript(Var, [I,J])`;
//! - `name{F:V,...}` (no layout before `{`) reads as `with(name, [F:V,...])`;
//! - `[](a,b)` is the array functor `[]/2`.
//!
//! Variables are numbered locally from 0 in order of first occurrence.

use num_rational::BigRational;

use super::lexer::{tokenize_file, SourcePos, SyntaxError, Tok, Token};
use super::ops::OpTable;
use crate::atom::Atom;
use crate::interval::Interval;
use crate::number::{decimal_to_rational, rational_ceil_f64, rational_floor_f64};
use crate::term::{Term, VarId};

/// A term as read, with variables numbered `0..nvars`.
#[derive(Clone, Debug)]
pub struct ReadTerm {
    pub term: Term,
    pub var_names: Vec<(String, VarId)>,
    pub singletons: Vec<String>,
    pub nvars: u32,
    pub pos: SourcePos,
}

/// Reads successive clauses from a token stream. Operator tables may change
/// between calls.
pub struct TermReader {
    tokens: Vec<Token>,
    i: usize,
}

impl TermReader {
    pub fn new(text: &str) -> Result<TermReader, SyntaxError> {
        Self::with_file(text, None)
    }

    pub fn with_file(text: &str, file: Option<&str>) -> Result<TermReader, SyntaxError> {
        Ok(TermReader { tokens: tokenize_file(text, file)?, i: 0 })
    }

    pub fn at_eof(&self) -> bool {
        self.i >= self.tokens.len()
    }

    /// Next clause, or `None` at end of input. After an error the reader
    /// skips past the next end token.
    pub fn next_term(&mut self, ops: &OpTable) -> Result<Option<ReadTerm>, SyntaxError> {
        if self.at_eof() {
            return Ok(None);
        }
        let mut p = Parser::new(&self.tokens[self.i..], ops);
        match p.clause() {
            Ok(rt) => {
                self.i += p.i;
                Ok(Some(rt))
            }
            Err(e) => {
                while self.i < self.tokens.len() {
                    let end = self.tokens[self.i].tok == Tok::End;
                    self.i += 1;
                    if end {
                        break;
                    }
                }
                Err(e)
            }
        }
    }
}

/// Parses one clause terminated by an end token.
pub fn parse_term(tokens: &[Token], ops: &OpTable) -> Result<(ReadTerm, usize), SyntaxError> {
    let mut p = Parser::new(tokens, ops);
    let rt = p.clause()?;
    Ok((rt, p.i))
}

/// Convenience: tokenizes and parses a single clause. The final `.` may be
/// omitted.
pub fn read_term(text: &str, ops: &OpTable) -> Result<ReadTerm, SyntaxError> {
    let mut tokens = tokenize_file(text, None)?;
    if tokens.last().map(|t| &t.tok) != Some(&Tok::End) {
        let pos = tokens.last().map(|t| t.pos.clone()).unwrap_or(SourcePos::new(1, 1));
        tokens.push(Token { tok: Tok::End, pos, layout_before: true });
    }
    let (rt, used) = parse_term(&tokens, ops)?;
    if used != tokens.len() {
        return Err(SyntaxError { message: "text after end of clause".into(), pos: tokens[used].pos.clone() });
    }
    Ok(rt)
}

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    ops: &'a OpTable,
    vars: Vec<(String, VarId, u32)>,
    nvars: u32,
    // inside an argument or list element: bare `,` and `|` are separators
    in_arg: bool,
}

fn is_term_end(t: &Tok) -> bool {
    matches!(t, Tok::End | Tok::Punct(")" | "]" | "}" | "," | "|"))
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], ops: &'a OpTable) -> Self {
        Parser { toks, i: 0, ops, vars: Vec::new(), nvars: 0, in_arg: false }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.i)
    }

    fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn peek_adjacent(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), layout_before: false, .. }) if *q == p)
    }

    fn here(&self) -> SourcePos {
        self.peek()
            .or_else(|| self.toks.last())
            .map(|t| t.pos.clone())
            .unwrap_or(SourcePos::new(1, 1))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { message: msg.into(), pos: self.here() })
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        match self.peek_tok() {
            Some(Tok::Punct(q)) if *q == p => {
                self.i += 1;
                Ok(())
            }
            Some(Tok::End) | None => self.err(format!("expected `{}` before end of clause", p)),
            Some(_) => self.err(format!("expected `{}`", p)),
        }
    }

    fn clause(&mut self) -> Result<ReadTerm, SyntaxError> {
        let pos = self.here();
        if self.peek().is_none() {
            return self.err("unexpected end of input");
        }
        let (term, _) = self.parse(1200)?;
        match self.peek_tok() {
            Some(Tok::End) => self.i += 1,
            Some(Tok::Name { .. }) => return self.err("operator priority clash"),
            Some(_) => return self.err("unexpected token after term"),
            None => return self.err("missing end of clause"),
        }
        let var_names = self
            .vars
            .iter()
            .filter(|(n, _, _)| n != "_")
            .map(|(n, v, _)| (n.clone(), *v))
            .collect();
        let singletons = self
            .vars
            .iter()
            .filter(|(n, _, c)| *c == 1 && !n.starts_with('_'))
            .map(|(n, _, _)| n.clone())
            .collect();
        Ok(ReadTerm { term, var_names, singletons, nvars: self.nvars, pos })
    }

    fn var(&mut self, name: &str) -> Term {
        if name != "_" {
            if let Some(entry) = self.vars.iter_mut().find(|(n, _, _)| n == name) {
                entry.2 += 1;
                return Term::Var(entry.1);
            }
        }
        let v = VarId(self.nvars);
        self.nvars += 1;
        self.vars.push((name.to_string(), v, 1));
        Term::Var(v)
    }

    fn parse(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let (mut left, mut left_pri) = self.primary(max)?;
        while let Some(tok) = self.peek() {
            match &tok.tok {
                Tok::Name { text, .. } => {
                    let name = Atom::new(text);
                    if let Some(def) = self.ops.infix(name) {
                        let (la, ra) = def.arg_priorities();
                        if def.priority <= max && left_pri <= la {
                            self.i += 1;
                            let (right, _) = self.parse(ra)?;
                            left = Term::compound(name, vec![left, right]);
                            left_pri = def.priority;
                            continue;
                        }
                    }
                    if let Some(def) = self.ops.postfix(name) {
                        let (la, _) = def.arg_priorities();
                        if def.priority <= max && left_pri <= la {
                            self.i += 1;
                            left = Term::compound(name, vec![left]);
                            left_pri = def.priority;
                            continue;
                        }
                    }
                    break;
                }
                Tok::Punct(",") if !self.in_arg && max >= 1000 && left_pri <= 999 => {
                    self.i += 1;
                    let (right, _) = self.parse(1000)?;
                    left = Term::compound(Atom::COMMA, vec![left, right]);
                    left_pri = 1000;
                }
                Tok::Punct("|") if !self.in_arg && max >= 1100 && left_pri <= 1099 => {
                    self.i += 1;
                    let (right, _) = self.parse(1100)?;
                    left = Term::compound(Atom::SEMI, vec![left, right]);
                    left_pri = 1100;
                }
                _ => break,
            }
        }
        Ok((left, left_pri))
    }

    /// Parses with `,` and `|` either as operators or as separators.
    fn nested(&mut self, max: u16, in_arg: bool) -> Result<(Term, u16), SyntaxError> {
        let saved = std::mem::replace(&mut self.in_arg, in_arg);
        let r = self.parse(max);
        self.in_arg = saved;
        r
    }

    // Arguments accept operators above 999 (e.g. `[X,Y]->bound`); a bare
    // comma still separates them.
    fn arglist(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.nested(1200, true)?.0];
        while matches!(self.peek_tok(), Some(Tok::Punct(","))) {
            self.i += 1;
            args.push(self.nested(1200, true)?.0);
        }
        Ok(args)
    }

    // after the opening `[`
    fn list_rest(&mut self) -> Result<Term, SyntaxError> {
        let items = self.arglist()?;
        let tail = if matches!(self.peek_tok(), Some(Tok::Punct("|"))) {
            self.i += 1;
            self.nested(1200, true)?.0
        } else {
            Term::nil()
        };
        self.expect("]")?;
        Ok(Term::list_with_tail(items, tail))
    }

    fn primary(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let Some(tok) = self.peek() else {
            return self.err("unexpected end of input");
        };
        self.i += 1;
        match &tok.tok {
            Tok::Int(_) | Tok::Float(_) | Tok::Rat(..) | Tok::Breal(..) => {
                Ok((number_term(&tok.tok, false, &tok.pos)?, 0))
            }
            Tok::Str(s) => Ok((Term::string(s), 0)),
            Tok::Var(name) => {
                let mut t = self.var(name);
                while self.peek_adjacent("[") {
                    self.i += 1;
                    let idx = self.list_rest()?;
                    t = Term::compound(Atom::SUBSCRIPT, vec![t, idx]);
                }
                Ok((t, 0))
            }
            Tok::Punct("(") => {
                let (t, _) = self.nested(1200, false)?;
                self.expect(")")?;
                Ok((t, 0))
            }
            Tok::Punct("[") => {
                if matches!(self.peek_tok(), Some(Tok::Punct("]"))) {
                    self.i += 1;
                    return self.after_name(Atom::NIL, false, max);
                }
                Ok((self.list_rest()?, 0))
            }
            Tok::Punct("{") => {
                if matches!(self.peek_tok(), Some(Tok::Punct("}"))) {
                    self.i += 1;
                    return self.after_name(Atom::CURLY, false, max);
                }
                let (t, _) = self.nested(1200, false)?;
                self.expect("}")?;
                Ok((Term::compound(Atom::CURLY, vec![t]), 0))
            }
            Tok::Name { text, quoted } => {
                if text == "-" && !quoted {
                    if let Some(Token { tok: num, layout_before: false, pos }) = self.peek() {
                        if matches!(num, Tok::Int(_) | Tok::Float(_) | Tok::Rat(..) | Tok::Breal(..)) {
                            self.i += 1;
                            return Ok((number_term(num, true, pos)?, 0));
                        }
                    }
                }
                self.after_name(Atom::new(text), *quoted, max)
            }
            Tok::Punct(p) => {
                self.i -= 1;
                self.err(format!("unexpected `{}`", p))
            }
            Tok::End => {
                self.i -= 1;
                self.err("unexpected end of clause")
            }
        }
    }

    fn after_name(&mut self, name: Atom, quoted: bool, max: u16) -> Result<(Term, u16), SyntaxError> {
        if self.peek_adjacent("(") {
            self.i += 1;
            let args = self.arglist()?;
            self.expect(")")?;
            return Ok((Term::compound(name, args), 0));
        }
        if !quoted && name != Atom::NIL && name != Atom::CURLY && self.peek_adjacent("{") {
            self.i += 1;
            let fields = if matches!(self.peek_tok(), Some(Tok::Punct("}"))) {
                Vec::new()
            } else {
                self.arglist()?
            };
            self.expect("}")?;
            return Ok((Term::compound(Atom::WITH, vec![Term::Atom(name), Term::list(fields)]), 0));
        }
        if let Some(def) = self.ops.prefix(name) {
            let next = self.peek_tok();
            let next_is_infix = match next {
                Some(Tok::Name { text, .. }) => {
                    let n = Atom::new(text);
                    (self.ops.infix(n).is_some() || self.ops.postfix(n).is_some())
                        && self.ops.prefix(n).is_none()
                        && !self.toks.get(self.i + 1).is_some_and(|t| t.tok == Tok::Punct("(") && !t.layout_before)
                }
                _ => false,
            };
            if next.is_none() || next.is_some_and(is_term_end) || next_is_infix {
                return Ok((Term::Atom(name), 0));
            }
            let (_, arg_max) = def.arg_priorities();
            let (pri, arg_max) = if def.priority > max {
                (max, arg_max.min(max))
            } else {
                (def.priority, arg_max)
            };
            let (arg, _) = self.parse(arg_max)?;
            return Ok((Term::compound(name, vec![arg]), pri));
        }
        Ok((Term::Atom(name), 0))
    }
}

fn bound_value(text: &str, negate: bool, upper: bool) -> Option<f64> {
    let t = text.trim_start_matches('-');
    let text_neg = text.starts_with('-') != negate;
    if t == "inf" {
        return Some(if text_neg { f64::NEG_INFINITY } else { f64::INFINITY });
    }
    let mut r = decimal_to_rational(t)?;
    if text_neg {
        r = -r;
    }
    Some(if upper { rational_ceil_f64(&r) } else { rational_floor_f64(&r) })
}

fn number_term(tok: &Tok, negate: bool, pos: &SourcePos) -> Result<Term, SyntaxError> {
    let bad = |m: &str| SyntaxError { message: m.to_string(), pos: pos.clone() };
    Ok(match tok {
        Tok::Int(i) => Term::from_bigint(if negate { -i } else { i.clone() }),
        Tok::Float(f) => Term::Float(if negate { -f } else { *f }),
        Tok::Rat(n, d) => {
            let r = BigRational::new(n.clone(), d.clone());
            Term::Rat(std::rc::Rc::new(if negate { -r } else { r }))
        }
        Tok::Breal(lo, hi) => {
            let l = bound_value(lo, negate, false).ok_or_else(|| bad("bad bounded real"))?;
            let h = bound_value(hi, false, true).ok_or_else(|| bad("bad bounded real"))?;
            Term::Breal(Interval::new(l, h).map_err(|_| bad("bounded real with lower bound above upper bound"))?)
        }
        _ => unreachable!("not a number token"),
    })
}
