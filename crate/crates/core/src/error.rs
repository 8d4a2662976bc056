use thiserror::Error;

use crate::model::{Diagnostic, EventId, ParticipantId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{operation} requires a conflict-free contract")]
    Conflicted { operation: &'static str },

    #[error("set {{{}}} is not conflict-free", crate::model::join(.0, " "))]
    SetNotConflictFree(Vec<EventId>),

    #[error("unknown event {0}")]
    UnknownEvent(EventId),

    #[error("unknown participant {0}")]
    UnknownParticipant(ParticipantId),

    #[error("invalid play: cannot append {event} to [{}]: {reason}", crate::model::join(.prefix, " "))]
    InvalidPlay {
        prefix: Vec<EventId>,
        event: EventId,
        reason: &'static str,
    },

    #[error("strategy of {participant} offered {event} after [{}]: {reason}", crate::model::join(.prefix, " "))]
    StrategyViolation {
        participant: ParticipantId,
        prefix: Vec<EventId>,
        event: EventId,
        reason: &'static str,
    },

    #[error("expected exactly one strategy for {0}")]
    StrategyCount(ParticipantId),

    #[error("no payoff declared for {0}")]
    MissingPayoff(ParticipantId),

    #[error("atom {0} collides with a reserved tagged spelling")]
    ReservedAtom(EventId),

    #[error("oracle size guard exceeded: {actual} events, limit {limit}")]
    SizeGuard { limit: usize, actual: usize },

    #[error("{} diagnostic(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
}
