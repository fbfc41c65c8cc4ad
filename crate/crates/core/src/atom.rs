//! Interned atom names.
//!
//! Atoms are process-wide and never freed. The first few slots are reserved
//! for names the engine looks at on every step so they can be matched as
//! constants.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

struct Interner {
    names: Vec<&'static str>,
    index: HashMap<&'static str, u32>,
}

macro_rules! predefined {
    ($($konst:ident = $text:expr),* $(,)?) => {
        const PREDEFINED: &[&str] = &[$($text),*];
        #[allow(non_camel_case_types, clippy::upper_case_acronyms, dead_code)]
        enum Slot { $($konst),* }
        impl Atom {
            $(pub const $konst: Atom = Atom(Slot::$konst as u32);)*
        }
    };
}

predefined! {
    NIL = "[]",
    DOT = ".",
    COMMA = ",",
    SEMI = ";",
    ARROW = "->",
    TRUE = "true",
    FAIL = "fail",
    FALSE = "false",
    CUT = "!",
    NOT = "\\+",
    CALL = "call",
    COLON = ":",
    CURLY = "{}",
    MINUS = "-",
    PLUS = "+",
    STAR = "*",
    SLASH = "/",
    EQ = "=",
    SUBSCRIPT = "subscript",
    WITH = "with",
    OF = "of",
    DO = "do",
    NECK = ":-",
    QUERY = "?-",
    BAR = "|",
    FINDALL = "findall",
    END_OF_FILE = "end_of_file",
    USER = "user",
    SYSTEM = "system",
    IC = "ic",
    EMPTY = "",
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        let mut names = Vec::with_capacity(256);
        let mut index = HashMap::with_capacity(256);
        for (i, name) in PREDEFINED.iter().enumerate() {
            names.push(*name);
            index.insert(*name, i as u32);
        }
        RwLock::new(Interner { names, index })
    })
}

impl Atom {
    pub fn new(name: &str) -> Atom {
        if let Some(&i) = interner().read().unwrap().index.get(name) {
            return Atom(i);
        }
        let mut guard = interner().write().unwrap();
        if let Some(&i) = guard.index.get(name) {
            return Atom(i);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let i = guard.names.len() as u32;
        guard.names.push(leaked);
        guard.index.insert(leaked, i);
        Atom(i)
    }

    pub fn name(self) -> &'static str {
        interner().read().unwrap().names[self.0 as usize]
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Atom {
        Atom::new(s)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        assert_eq!(Atom::new("foo"), Atom::new("foo"));
        assert_ne!(Atom::new("foo"), Atom::new("bar"));
        assert_eq!(Atom::new("[]"), Atom::NIL);
        assert_eq!(Atom::COMMA.name(), ",");
    }
}
