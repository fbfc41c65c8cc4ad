//! Symbolic constraints.

use super::{exclude, impose_integrality, IcError};
use crate::atom::Atom;
use crate::store::Store;
use crate::susp::Cond;
use crate::term::{SuspId, Term};

/// Forward-checking `alldifferent/1`: every instantiated member's value is
/// removed from all other members. The demon runs at priority 4 on the
/// instantiation lists of the members.
pub fn alldifferent(store: &mut Store, list: &Term, me: Option<SuspId>) -> Result<bool, IcError> {
    let items = store.list_items(list).ok_or(IcError::Instantiation)?;
    let items: Vec<Term> = items.iter().map(|t| store.deref(t)).collect();
    if me.is_none() {
        for t in &items {
            if !t.is_var() && !t.is_integer() {
                return Err(IcError::Type(format!("integer or variable expected, found {}", t)));
            }
            if t.is_var() && !impose_integrality(store, t) {
                return Ok(false);
            }
        }
    }
    // exclusion can instantiate further members, so repeat until stable
    let mut seen: Vec<i64> = Vec::new();
    loop {
        let vals: Vec<i64> = items.iter().filter_map(|t| store.deref(t).as_int()).collect();
        if vals.len() == seen.len() {
            break;
        }
        let mut sorted = vals.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(false);
        }
        for v in vals.iter().filter(|v| !seen.contains(v)) {
            for t in &items {
                if store.deref(t).is_var() && !exclude(store, t, *v) {
                    return Ok(false);
                }
            }
        }
        seen = vals;
    }
    let open: Vec<_> = items.iter().filter_map(|t| store.deref(t).as_var()).collect();
    if open.len() <= 1 {
        if let Some(id) = me {
            store.kill(id);
        }
        return Ok(true);
    }
    if me.is_none() {
        let goal = Term::app("alldifferent", vec![Term::list(items.clone())]);
        let id = store.make_suspension(goal, Atom::IC, 4, true).map_err(|e| IcError::Type(e.to_string()))?;
        for v in open {
            store.attach(v, Cond::Inst, id);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic::{bounds, domain, impose_domain, register, Domain};

    #[test]
    fn ground_cases() {
        let mut s = Store::new();
        register(&mut s);
        let l = Term::list(vec![Term::int(1), Term::int(2), Term::int(3)]);
        assert!(alldifferent(&mut s, &l, None).unwrap());
        let l = Term::list(vec![Term::int(1), Term::int(1)]);
        assert!(!alldifferent(&mut s, &l, None).unwrap());
    }

    #[test]
    fn excludes_known_values() {
        let mut s = Store::new();
        register(&mut s);
        let x = s.new_var();
        assert!(impose_domain(&mut s, &x, &Domain::integer(1.0, 3.0)));
        let l = Term::list(vec![x.clone(), Term::int(2)]);
        assert!(alldifferent(&mut s, &l, None).unwrap());
        assert_eq!(bounds(&s, &x), (1.0, 3.0));
        assert!(domain(&s, x.as_var().unwrap()).unwrap().holes.contains(&2));
    }
}
