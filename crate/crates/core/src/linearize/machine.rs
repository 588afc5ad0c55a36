use std::collections::VecDeque;
use std::fmt;

use crate::checker::SpecKind;
use crate::history::{EventKind, Output};

/// Abstract state of one sequential object.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MachineState {
    /// Top of stack last.
    Stack(Vec<i64>),
    /// Head at the front.
    Queue(VecDeque<i64>),
    RwLock { writer: bool, readers: u64 },
    SimpleLock(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepRefusal {
    /// The operation does not belong to this object.
    WrongKind(EventKind),
    /// No transition for the operation from the current state.
    Disabled(EventKind),
    MissingInput(EventKind),
}

impl fmt::Display for StepRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRefusal::WrongKind(k) => write!(f, "{k:?} is not an operation of this object"),
            StepRefusal::Disabled(k) => write!(f, "{k:?} is not enabled in this state"),
            StepRefusal::MissingInput(k) => write!(f, "{k:?} needs an input value"),
        }
    }
}

/// Sequential specification as a state machine. Every step is
/// deterministic: the state fixes the output.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeqMachine {
    spec: SpecKind,
    state: MachineState,
}

impl SeqMachine {
    pub fn new(spec: SpecKind) -> SeqMachine {
        let state = match spec {
            SpecKind::Stack => MachineState::Stack(Vec::new()),
            SpecKind::Queue => MachineState::Queue(VecDeque::new()),
            SpecKind::RwLock => MachineState::RwLock { writer: false, readers: 0 },
            SpecKind::SimpleLock => MachineState::SimpleLock(false),
        };
        SeqMachine { spec, state }
    }

    pub fn spec(&self) -> SpecKind {
        self.spec
    }

    pub fn state(&self) -> &MachineState {
        &self.state
    }

    pub fn step(&mut self, kind: EventKind, input: Option<i64>) -> Result<Output, StepRefusal> {
        use EventKind::*;
        use MachineState as M;
        let need = |input: Option<i64>| input.ok_or(StepRefusal::MissingInput(kind));
        match (&mut self.state, kind) {
            (M::Stack(s), Push) => {
                s.push(need(input)?);
                Ok(Output::Unit)
            }
            (M::Stack(s), Pop) => Ok(s.pop().map_or(Output::Empty, Output::Value)),
            (M::Queue(q), Enq) => {
                q.push_back(need(input)?);
                Ok(Output::Unit)
            }
            (M::Queue(q), Deq) => Ok(q.pop_front().map_or(Output::Empty, Output::Value)),
            (M::RwLock { writer, readers }, Lock) if !*writer && *readers == 0 => {
                *writer = true;
                Ok(Output::Unit)
            }
            (M::RwLock { writer, .. }, Unlock) if *writer => {
                *writer = false;
                Ok(Output::Unit)
            }
            (M::RwLock { writer, readers }, Reg) if !*writer => {
                *readers += 1;
                Ok(Output::Unit)
            }
            (M::RwLock { readers, .. }, Dereg) if *readers > 0 => {
                *readers -= 1;
                Ok(Output::Unit)
            }
            (M::SimpleLock(held), Lock) if !*held => {
                *held = true;
                Ok(Output::Unit)
            }
            (M::SimpleLock(held), Unlock) if *held => {
                *held = false;
                Ok(Output::Unit)
            }
            (M::RwLock { .. }, Lock | Unlock | Reg | Dereg) | (M::SimpleLock(_), Lock | Unlock) => {
                Err(StepRefusal::Disabled(kind))
            }
            _ => Err(StepRefusal::WrongKind(kind)),
        }
    }
}
