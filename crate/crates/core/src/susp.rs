//! Suspensions and the priority scheduler.
//!
//! A suspension is registered in the suspended resolvent the moment it is
//! created. Waking is two-stage: scheduling moves a suspended suspension
//! into its priority bucket (once, however many lists it sits on), and the
//! engine later dequeues and runs it.

use crate::atom::Atom;
use crate::store::Store;
use crate::term::{SuspId, Term, VarId};

pub const PRIORITIES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuspState {
    Suspended,
    Scheduled,
    Executed,
}

#[derive(Clone, Debug)]
pub struct Suspension {
    pub goal: Term,
    pub module: Atom,
    pub priority: u8,
    pub state: SuspState,
    pub demon: bool,
    pub(crate) stamp: u64,
}

/// The generic waking conditions plus the solver lists held in an ic
/// domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    Inst,
    Bound,
    Constrained,
    Min,
    Max,
    Hole,
    Type,
}

impl Cond {
    pub fn is_generic(self) -> bool {
        matches!(self, Cond::Inst | Cond::Bound | Cond::Constrained)
    }

    pub fn name(self) -> &'static str {
        match self {
            Cond::Inst => "inst",
            Cond::Bound => "bound",
            Cond::Constrained => "constrained",
            Cond::Min => "ic:min",
            Cond::Max => "ic:max",
            Cond::Hole => "ic:hole",
            Cond::Type => "ic:type",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SuspError {
    #[error("priority {0} outside 1..12")]
    Priority(i64),
    #[error("unknown suspension list {0}")]
    UnknownList(String),
    #[error("suspension is not suspended")]
    NotSuspended,
}

impl Store {
    pub fn make_suspension(&mut self, goal: Term, module: Atom, priority: i64, demon: bool) -> Result<SuspId, SuspError> {
        if !(1..=PRIORITIES as i64).contains(&priority) {
            return Err(SuspError::Priority(priority));
        }
        self.susps.push(Suspension {
            goal,
            module,
            priority: priority as u8,
            state: SuspState::Suspended,
            demon,
            stamp: 0,
        });
        Ok(SuspId(self.susps.len() as u32 - 1))
    }

    pub fn suspension(&self, id: SuspId) -> &Suspension {
        &self.susps[id.0 as usize]
    }

    pub fn susp_state(&self, id: SuspId) -> SuspState {
        self.susps[id.0 as usize].state
    }

    pub fn suspension_count(&self) -> usize {
        self.susps.len()
    }

    /// Moves a suspended suspension into its bucket; anything else is left
    /// alone.
    pub fn schedule(&mut self, id: SuspId) {
        if self.susp_state(id) != SuspState::Suspended {
            return;
        }
        self.set_susp_state(id, SuspState::Scheduled);
        let p = self.susps[id.0 as usize].priority as usize;
        self.queue[p - 1].push_back(id);
    }

    pub fn schedule_all(&mut self, ids: &[SuspId]) {
        for id in ids {
            self.schedule(*id);
        }
    }

    /// Marks the suspension executed (trailed). Idempotent.
    pub fn kill(&mut self, id: SuspId) {
        if self.susp_state(id) != SuspState::Executed {
            self.set_susp_state(id, SuspState::Executed);
        }
    }

    /// Dequeues the most urgent scheduled suspension whose priority number
    /// is below `limit`. Non-demons become executed, demons go back to
    /// suspended.
    pub fn pop_scheduled(&mut self, limit: u8) -> Option<SuspId> {
        for p in 1..(limit as usize).min(PRIORITIES + 1) {
            while let Some(id) = self.queue[p - 1].pop_front() {
                if self.susp_state(id) != SuspState::Scheduled {
                    continue;
                }
                let next = if self.susps[id.0 as usize].demon { SuspState::Suspended } else { SuspState::Executed };
                self.set_susp_state(id, next);
                return Some(id);
            }
        }
        None
    }

    /// Empties the scheduler queue; a later backtrack to an older mark
    /// brings the old contents back.
    pub(crate) fn clear_queue(&mut self) {
        self.queue = Default::default();
    }

    pub fn has_scheduled(&self) -> bool {
        self.queue.iter().flatten().any(|id| self.susp_state(*id) == SuspState::Scheduled)
    }

    /// Everything in the suspended resolvent, oldest first.
    pub fn delayed_goals(&self) -> Vec<SuspId> {
        (0..self.susps.len() as u32)
            .map(SuspId)
            .filter(|id| self.susp_state(*id) != SuspState::Executed)
            .collect()
    }

    /// Appends `id` to a suspension list of `v`. Solver lists create an
    /// unbounded real ic domain on a variable that has none.
    pub fn attach(&mut self, v: VarId, cond: Cond, id: SuspId) {
        if cond.is_generic() {
            let a = self.attrs_mut(v);
            let list = match cond {
                Cond::Inst => &mut a.inst,
                Cond::Bound => &mut a.bound,
                _ => &mut a.constrained,
            };
            list.retain(|s| *s != id);
            list.push(id);
        } else {
            let d = crate::ic::domain_mut(self, v);
            let list = d.list_mut(cond);
            list.retain(|s| *s != id);
            list.push(id);
        }
    }

    /// Schedules the suspensions on one list of `v`.
    pub fn wake(&mut self, v: VarId, cond: Cond) {
        let ids: Vec<SuspId> = match self.attrs(v) {
            None => return,
            Some(a) => match cond {
                Cond::Inst => a.inst.clone(),
                Cond::Bound => a.bound.clone(),
                Cond::Constrained => a.constrained.clone(),
                _ => match a.domain() {
                    Some(d) => d.list(cond).to_vec(),
                    None => return,
                },
            },
        };
        self.schedule_all(&ids);
    }
}

/// Parses a condition name as used by `suspend/3` and friends.
pub fn parse_cond(t: &Term) -> Result<Cond, SuspError> {
    let bad = || SuspError::UnknownList(format!("{}", t));
    if let Some(a) = t.as_atom() {
        return match a.name() {
            "inst" => Ok(Cond::Inst),
            "bound" => Ok(Cond::Bound),
            "constrained" => Ok(Cond::Constrained),
            "min" => Ok(Cond::Min),
            "max" => Ok(Cond::Max),
            "hole" => Ok(Cond::Hole),
            "type" => Ok(Cond::Type),
            _ => Err(bad()),
        };
    }
    if t.is_functor(Atom::COLON, 2) {
        let (m, l) = (t.arg_at(1).unwrap(), t.arg_at(2).unwrap());
        if m.as_atom() == Some(Atom::IC) {
            let c = parse_cond(&l)?;
            if !c.is_generic() {
                return Ok(c);
            }
        }
    }
    Err(bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn susp(s: &mut Store, name: &str, prio: i64, demon: bool) -> SuspId {
        s.make_suspension(Term::atom(name), Atom::USER, prio, demon).unwrap()
    }

    #[test]
    fn priority_range() {
        let mut s = Store::new();
        assert_eq!(s.make_suspension(Term::atom("p"), Atom::USER, 0, false), Err(SuspError::Priority(0)));
        assert!(s.make_suspension(Term::atom("p"), Atom::USER, 12, false).is_ok());
        assert_eq!(s.delayed_goals().len(), 1);
    }

    #[test]
    fn dequeue_order() {
        let mut s = Store::new();
        let a = susp(&mut s, "a", 3, false);
        let b = susp(&mut s, "b", 1, false);
        let c = susp(&mut s, "c", 3, false);
        s.schedule_all(&[a, b, c, a]);
        let order: Vec<_> = std::iter::from_fn(|| s.pop_scheduled(13)).collect();
        assert_eq!(order, vec![b, a, c]);
        assert!(s.delayed_goals().is_empty());
    }

    #[test]
    fn limit_respected() {
        let mut s = Store::new();
        let a = susp(&mut s, "a", 5, false);
        s.schedule(a);
        assert_eq!(s.pop_scheduled(5), None);
        assert_eq!(s.pop_scheduled(6), Some(a));
    }

    #[test]
    fn demons_resuspend_and_kill_is_trailed() {
        let mut s = Store::new();
        let d = susp(&mut s, "d", 2, true);
        for _ in 0..5 {
            s.schedule(d);
            assert_eq!(s.pop_scheduled(13), Some(d));
            assert_eq!(s.susp_state(d), SuspState::Suspended);
        }
        let m = s.push_choicepoint();
        s.kill(d);
        s.kill(d);
        assert!(s.delayed_goals().is_empty());
        s.backtrack_to(m).unwrap();
        assert_eq!(s.delayed_goals(), vec![d]);
    }

    #[test]
    fn queue_restored_on_backtrack() {
        let mut s = Store::new();
        let a = susp(&mut s, "a", 4, false);
        s.schedule(a);
        let m = s.push_choicepoint();
        assert_eq!(s.pop_scheduled(13), Some(a));
        s.backtrack_to(m).unwrap();
        assert_eq!(s.susp_state(a), SuspState::Scheduled);
        assert_eq!(s.pop_scheduled(13), Some(a));
    }

    #[test]
    fn condition_names() {
        let c = crate::reader::read_term("ic:min", &Default::default()).unwrap().term;
        assert_eq!(parse_cond(&c), Ok(Cond::Min));
        assert!(parse_cond(&Term::atom("nosuch")).is_err());
    }
}
