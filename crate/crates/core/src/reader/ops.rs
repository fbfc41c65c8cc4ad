use std::collections::HashMap;

use crate::atom::Atom;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixity {
    Prefix,
    Infix,
    Postfix,
}

impl OpType {
    pub fn parse(s: &str) -> Option<OpType> {
        Some(match s {
            "xfx" => OpType::Xfx,
            "xfy" => OpType::Xfy,
            "yfx" => OpType::Yfx,
            "fy" => OpType::Fy,
            "fx" => OpType::Fx,
            "xf" => OpType::Xf,
            "yf" => OpType::Yf,
            _ => return None,
        })
    }

    pub fn fixity(self) -> Fixity {
        match self {
            OpType::Xfx | OpType::Xfy | OpType::Yfx => Fixity::Infix,
            OpType::Fy | OpType::Fx => Fixity::Prefix,
            OpType::Xf | OpType::Yf => Fixity::Postfix,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub typ: OpType,
}

impl OpDef {
    /// Maximum priorities of the (left, right) arguments.
    pub fn arg_priorities(&self) -> (u16, u16) {
        let p = self.priority;
        match self.typ {
            OpType::Xfx => (p - 1, p - 1),
            OpType::Xfy => (p - 1, p),
            OpType::Yfx => (p, p - 1),
            OpType::Fy => (0, p),
            OpType::Fx => (0, p - 1),
            OpType::Xf => (p - 1, 0),
            OpType::Yf => (p, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error("operator priority {0} outside 0..1200")]
    Priority(i64),
    #[error("unknown operator type {0}")]
    Type(String),
    #[error("cannot redefine {0} as an operator")]
    Reserved(String),
}

/// Operator definitions. A name has at most one prefix definition and one
/// infix-or-postfix definition.
#[derive(Clone, Debug)]
pub struct OpTable {
    prefix: HashMap<Atom, OpDef>,
    infix: HashMap<Atom, OpDef>,
    postfix: HashMap<Atom, OpDef>,
}

impl Default for OpTable {
    fn default() -> Self {
        let mut t = OpTable { prefix: HashMap::new(), infix: HashMap::new(), postfix: HashMap::new() };
        let defaults: &[(u16, OpType, &[&str])] = &[
            (1200, OpType::Xfx, &[":-", "-->"]),
            (1200, OpType::Fx, &[":-", "?-"]),
            (1150, OpType::Fx, &["dynamic", "demon", "local", "export", "import", "inline", "discontiguous", "initialization"]),
            (1100, OpType::Xfy, &[";", "|"]),
            (1100, OpType::Xfy, &["do"]),
            (1050, OpType::Xfy, &["->", "*->"]),
            (1000, OpType::Xfy, &[","]),
            (900, OpType::Fy, &["\\+"]),
            (
                700,
                OpType::Xfx,
                &[
                    "=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is", "=:=", "=\\=",
                    "<", ">", "=<", ">=", "::", "#=", "#\\=", "#<", "#>", "#=<", "#>=", "$=",
                    "$\\=", "$<", "$>", "$=<", "$>=", "~=",
                ],
            ),
            (650, OpType::Xfx, &["of"]),
            (600, OpType::Xfy, &[":"]),
            (600, OpType::Xfx, &[".."]),
            (500, OpType::Yfx, &["+", "-", "/\\", "\\/", "xor"]),
            (400, OpType::Yfx, &["*", "/", "//", "rem", "mod", "div", "<<", ">>"]),
            (200, OpType::Xfx, &["**"]),
            (200, OpType::Xfy, &["^"]),
            (200, OpType::Fy, &["-", "+", "\\"]),
        ];
        for (p, typ, names) in defaults {
            for name in *names {
                t.insert(Atom::new(name), OpDef { priority: *p, typ: *typ });
            }
        }
        t
    }
}

impl OpTable {
    fn insert(&mut self, name: Atom, def: OpDef) {
        match def.typ.fixity() {
            Fixity::Prefix => {
                self.prefix.insert(name, def);
            }
            Fixity::Infix => {
                self.postfix.remove(&name);
                self.infix.insert(name, def);
            }
            Fixity::Postfix => {
                self.infix.remove(&name);
                self.postfix.insert(name, def);
            }
        }
    }

    /// `op/3`: priority 0 removes the definition.
    pub fn declare(&mut self, priority: i64, typ: &str, name: Atom) -> Result<(), OpError> {
        if !(0..=1200).contains(&priority) {
            return Err(OpError::Priority(priority));
        }
        let typ = OpType::parse(typ).ok_or_else(|| OpError::Type(typ.to_string()))?;
        if matches!(name.name(), "," | "[]" | "{}") {
            return Err(OpError::Reserved(name.name().to_string()));
        }
        if priority == 0 {
            match typ.fixity() {
                Fixity::Prefix => {
                    self.prefix.remove(&name);
                }
                _ => {
                    self.infix.remove(&name);
                    self.postfix.remove(&name);
                }
            }
            return Ok(());
        }
        self.insert(name, OpDef { priority: priority as u16, typ });
        Ok(())
    }

    pub fn prefix(&self, name: Atom) -> Option<OpDef> {
        self.prefix.get(&name).copied()
    }

    pub fn infix(&self, name: Atom) -> Option<OpDef> {
        self.infix.get(&name).copied()
    }

    pub fn postfix(&self, name: Atom) -> Option<OpDef> {
        self.postfix.get(&name).copied()
    }

    pub fn is_op(&self, name: Atom) -> bool {
        self.prefix.contains_key(&name) || self.infix.contains_key(&name) || self.postfix.contains_key(&name)
    }
}
