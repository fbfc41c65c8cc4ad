//! Tokenizer.
//!
//! Besides the usual Prolog tokens this recognises rational literals
//! (`1_3`) and bounded-real literals (`0.99__1.01`), and records for every
//! token whether layout preceded it. The parser needs that flag for
//! `f(...)`, `X[...]` and `name{...}`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Num;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourcePos {
    pub file: Option<std::rc::Rc<str>>,
    pub line: u32,
    pub column: u32,
}

impl SourcePos {
    pub fn new(line: u32, column: u32) -> Self {
        SourcePos { file: None, line, column }
    }
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{}:{}:{}", file, self.line, self.column),
            None => write!(f, "{}:{}", self.line, self.column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("syntax error at {pos}: {message}")]
pub struct SyntaxError {
    pub message: String,
    pub pos: SourcePos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// An atom name. `quoted` atoms never take part in `name{...}` sugar.
    Name { text: String, quoted: bool },
    Var(String),
    Int(BigInt),
    Float(f64),
    /// Numerator and denominator text of `N_D`.
    Rat(BigInt, BigInt),
    /// Bound texts of `L__H`; rounding happens once the sign is known.
    Breal(String, String),
    Str(String),
    Punct(&'static str),
    End,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: SourcePos,
    pub layout_before: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

fn is_alnum(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Lexer<'a> {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    file: Option<std::rc::Rc<str>>,
    _src: &'a str,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    tokenize_file(text, None)
}

pub fn tokenize_file(text: &str, file: Option<&str>) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
        file: file.map(std::rc::Rc::from),
        _src: text,
    };
    let mut out = Vec::new();
    loop {
        let layout = lx.skip_layout()?;
        if lx.i >= lx.chars.len() {
            break;
        }
        let pos = lx.pos();
        let tok = lx.token()?;
        out.push(Token { tok, pos, layout_before: layout });
    }
    Ok(out)
}

impl Lexer<'_> {
    fn pos(&self) -> SourcePos {
        SourcePos { file: self.file.clone(), line: self.line, column: self.col }
    }

    fn err<T>(&self, pos: SourcePos, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { message: msg.into(), pos })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_layout(&mut self) -> Result<bool, SyntaxError> {
        let start = self.i;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let pos = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return self.err(pos, "unterminated block comment"),
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(self.i > start)
    }

    fn token(&mut self) -> Result<Tok, SyntaxError> {
        let pos = self.pos();
        let c = self.peek().unwrap();
        if c.is_ascii_digit() {
            return self.number();
        }
        if c == '_' || c.is_uppercase() {
            let mut s = String::new();
            while let Some(c) = self.peek().filter(|c| is_alnum(*c)) {
                s.push(c);
                self.bump();
            }
            return Ok(Tok::Var(s));
        }
        if c.is_alphabetic() {
            let mut s = String::new();
            while let Some(c) = self.peek().filter(|c| is_alnum(*c)) {
                s.push(c);
                self.bump();
            }
            return Ok(Tok::Name { text: s, quoted: false });
        }
        match c {
            '(' | ')' | '[' | ']' | '{' | '}' | ',' | '|' => {
                self.bump();
                let p = match c {
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    '{' => "{",
                    '}' => "}",
                    ',' => ",",
                    _ => "|",
                };
                if p == "|" && self.peek() == Some('|') {
                    self.bump();
                    return Ok(Tok::Name { text: "||".into(), quoted: false });
                }
                Ok(Tok::Punct(p))
            }
            '!' | ';' => {
                self.bump();
                Ok(Tok::Name { text: c.to_string(), quoted: false })
            }
            '\'' => {
                self.bump();
                let s = self.quoted('\'', pos)?;
                Ok(Tok::Name { text: s, quoted: true })
            }
            '"' => {
                self.bump();
                let s = self.quoted('"', pos)?;
                Ok(Tok::Str(s))
            }
            '.' if matches!(self.peek_at(1), None | Some('%')) || self.peek_at(1).is_some_and(char::is_whitespace) => {
                self.bump();
                Ok(Tok::End)
            }
            c if is_symbol_char(c) => {
                let mut s = String::new();
                while let Some(c) = self.peek().filter(|c| is_symbol_char(*c)) {
                    s.push(c);
                    self.bump();
                }
                Ok(Tok::Name { text: s, quoted: false })
            }
            _ => self.err(pos, format!("unexpected character {:?}", c)),
        }
    }

    fn quoted(&mut self, q: char, pos: SourcePos) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return self.err(pos, "unterminated quoted item"),
                Some(c) if c == q => {
                    if self.peek() == Some(q) {
                        self.bump();
                        s.push(q);
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => {
                    let esc_pos = self.pos();
                    match self.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('r') => s.push('\r'),
                        Some('a') => s.push('\x07'),
                        Some('b') => s.push('\x08'),
                        Some('f') => s.push('\x0c'),
                        Some('v') => s.push('\x0b'),
                        Some('0') => s.push('\0'),
                        Some('e') => s.push('\x1b'),
                        Some('\\') => s.push('\\'),
                        Some('\'') => s.push('\''),
                        Some('"') => s.push('"'),
                        Some('`') => s.push('`'),
                        Some('\n') => {}
                        Some('x') => {
                            let mut hex = String::new();
                            while let Some(c) = self.peek().filter(char::is_ascii_hexdigit) {
                                hex.push(c);
                                self.bump();
                            }
                            if self.peek() == Some('\\') {
                                self.bump();
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32);
                            match ch {
                                Some(ch) => s.push(ch),
                                None => return self.err(esc_pos, "bad hex escape"),
                            }
                        }
                        _ => return self.err(esc_pos, "unknown escape sequence"),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn digits(&mut self, radix: u32) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_digit(radix)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        let pos = self.pos();
        if self.peek() == Some('0') {
            match self.peek_at(1) {
                Some('\'') => {
                    self.bump();
                    self.bump();
                    let c = match self.bump() {
                        Some('\\') => match self.bump() {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\\') => '\\',
                            Some('\'') => '\'',
                            Some(c) => c,
                            None => return self.err(pos, "unterminated character code"),
                        },
                        Some('\'') if self.peek() == Some('\'') => {
                            self.bump();
                            '\''
                        }
                        Some(c) => c,
                        None => return self.err(pos, "unterminated character code"),
                    };
                    return Ok(Tok::Int(BigInt::from(c as u32)));
                }
                Some(r @ ('x' | 'o' | 'b')) => {
                    let radix = match r {
                        'x' => 16,
                        'o' => 8,
                        _ => 2,
                    };
                    if self.peek_at(2).is_some_and(|c| c.is_digit(radix)) {
                        self.bump();
                        self.bump();
                        let d = self.digits(radix);
                        return Ok(Tok::Int(BigInt::from_str_radix(&d, radix).unwrap()));
                    }
                }
                _ => {}
            }
        }
        let int_part = self.digits(10);
        let mut text = int_part.clone();
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            text.push('.');
            text.push_str(&self.digits(10));
            is_float = true;
            self.exponent(&mut text);
            if self.looking_at("Inf") {
                self.advance(3);
                text = "inf".into();
            } else if self.looking_at("NaN") {
                self.advance(3);
                text = "NaN".into();
            }
        }
        if self.looking_at("__") {
            let save = (self.i, self.line, self.col);
            self.advance(2);
            if let Some(hi) = self.breal_bound() {
                return Ok(Tok::Breal(text, hi));
            }
            (self.i, self.line, self.col) = save;
        }
        if !is_float && self.peek() == Some('_') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            let den = self.digits(10);
            let num: BigInt = int_part.parse().unwrap();
            let den: BigInt = den.parse().unwrap();
            if den == BigInt::from(0) {
                return self.err(pos, "zero denominator in rational");
            }
            return Ok(Tok::Rat(num, den));
        }
        if is_float {
            let f: f64 = text.parse().map_err(|_| SyntaxError {
                message: format!("bad float {}", text),
                pos: pos.clone(),
            })?;
            Ok(Tok::Float(f))
        } else {
            Ok(Tok::Int(int_part.parse().unwrap()))
        }
    }

    fn exponent(&mut self, text: &mut String) {
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let first_digit = if sign { self.peek_at(2) } else { self.peek_at(1) };
            if first_digit.is_some_and(|c| c.is_ascii_digit()) {
                text.push('e');
                self.bump();
                if sign {
                    text.push(self.bump().unwrap());
                }
                text.push_str(&self.digits(10));
            }
        }
    }

    // upper bound of a breal literal: optional sign, digits, optional fraction
    fn breal_bound(&mut self) -> Option<String> {
        let mut s = String::new();
        if self.peek() == Some('-') {
            s.push('-');
            self.bump();
        }
        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return None;
        }
        s.push_str(&self.digits(10));
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            s.push('.');
            s.push_str(&self.digits(10));
            self.exponent(&mut s);
            if self.looking_at("Inf") {
                self.advance(3);
                s = if s.starts_with('-') { "-inf".into() } else { "inf".into() };
            }
        }
        Some(s)
    }

    fn looking_at(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(k, c)| self.peek_at(k) == Some(c))
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn rational_literal() {
        assert_eq!(toks("1_3."), vec![Tok::Rat(1.into(), 3.into()), Tok::End]);
    }

    #[test]
    fn breal_literal() {
        assert_eq!(toks("0.99__1.01."), vec![Tok::Breal("0.99".into(), "1.01".into()), Tok::End]);
        assert_eq!(toks("1__-1.0"), vec![Tok::Breal("1".into(), "-1.0".into())]);
    }

    #[test]
    fn subscript_adjacency() {
        let t = tokenize("X[3,4]").unwrap();
        assert_eq!(t[0].tok, Tok::Var("X".into()));
        assert_eq!(t[1].tok, Tok::Punct("["));
        assert!(!t[1].layout_before);
        assert_eq!(t[2].tok, Tok::Int(3.into()));
        assert_eq!(t[3].tok, Tok::Punct(","));
        assert_eq!(t[4].tok, Tok::Int(4.into()));
        assert_eq!(t[5].tok, Tok::Punct("]"));
        let spaced = tokenize("X [3]").unwrap();
        assert!(spaced[1].layout_before);
    }

    #[test]
    fn unterminated_items_report_position() {
        let e = tokenize("a.\n  'abc").unwrap_err();
        assert_eq!((e.pos.line, e.pos.column), (2, 3));
        let e = tokenize("/* no end").unwrap_err();
        assert_eq!((e.pos.line, e.pos.column), (1, 1));
    }

    #[test]
    fn floats_and_ends() {
        assert_eq!(toks("1.5e3."), vec![Tok::Float(1500.0), Tok::End]);
        assert_eq!(toks("X = 1.0Inf"), vec![Tok::Var("X".into()), Tok::Name { text: "=".into(), quoted: false }, Tok::Float(f64::INFINITY)]);
        assert_eq!(toks("a. % c\n"), vec![Tok::Name { text: "a".into(), quoted: false }, Tok::End]);
        assert_eq!(toks("0'a"), vec![Tok::Int(97.into())]);
    }
}
