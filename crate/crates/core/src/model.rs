//! Domain types shared by every other module: events, participants, clauses,
//! payoffs, plays and the contract specification itself.
//!
//! A [`ContractSpec`] is a finite event structure with circular causality
//! together with per-participant payoffs. When it has no conflicts it doubles
//! as a Horn theory: standard clauses are `α → a`, circular clauses `α ↠ a`.
//! Enabling relations are stored as the clauses given by the user; saturation
//! (every conflict-free superset of an enabling set also enables) is realized
//! by subset tests, never by materializing supersets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Error;

/// Name prefixes reserved for the tagged atoms produced by the urgency encoding.
pub const RESERVED_PREFIXES: [&str; 2] = ["R$", "U$"];
/// Character reserved for "already happened" atoms of the urgency encoding.
pub const RESERVED_CHAR: char = '!';

/// Returns true when `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Returns true when `name` uses a spelling reserved for tagged atoms.
pub fn is_reserved(name: &str) -> bool {
    name.contains(RESERVED_CHAR) || RESERVED_PREFIXES.iter().any(|p| name.starts_with(p))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(String);

impl EventId {
    pub fn new(name: impl Into<String>) -> Self {
        EventId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticipantId(String);

impl ParticipantId {
    pub fn new(name: impl Into<String>) -> Self {
        ParticipantId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ParticipantId {
    fn from(s: &str) -> Self {
        ParticipantId::new(s)
    }
}

pub type EventSet = BTreeSet<EventId>;

/// Builds an [`EventSet`] from string names.
pub fn event_set<I, S>(names: I) -> EventSet
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names
        .into_iter()
        .map(|n| EventId::new(n.as_ref()))
        .collect()
}

/// Standard clauses (`α → a`, enabling `X ⊢ e`) versus circular clauses
/// (`α ↠ a`, circular enabling `X ⊩ e`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseKind {
    Standard,
    Circular,
}

impl ClauseKind {
    pub fn arrow(self) -> &'static str {
        match self {
            ClauseKind::Standard => "<-",
            ClauseKind::Circular => "<<-",
        }
    }
}

/// A Horn clause. Field order gives the canonical `(head, kind, body)` ordering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub head: EventId,
    pub kind: ClauseKind,
    pub body: EventSet,
}

impl Clause {
    pub fn new(kind: ClauseKind, body: EventSet, head: EventId) -> Self {
        Clause { head, kind, body }
    }

    pub fn standard<I, S>(body: I, head: &str) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Clause::new(ClauseKind::Standard, event_set(body), EventId::new(head))
    }

    pub fn circular<I, S>(body: I, head: &str) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Clause::new(ClauseKind::Circular, event_set(body), EventId::new(head))
    }

    /// `⊤ → a`.
    pub fn fact(head: &str) -> Self {
        Clause::new(ClauseKind::Standard, EventSet::new(), EventId::new(head))
    }

    pub fn atoms(&self) -> impl Iterator<Item = &EventId> {
        self.body.iter().chain(std::iter::once(&self.head))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = if self.body.is_empty() {
            "true".to_string()
        } else {
            join(&self.body, ", ")
        };
        write!(f, "{} {} {}", self.head, self.kind.arrow(), body)
    }
}

/// Order-insensitive payoff: a predicate over the set of fired events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payoff {
    /// Positive iff every goal event has fired.
    Goal(EventSet),
    /// Positive iff every completed offer has its request completed, and at
    /// least one request is completed.
    OfferRequest(Vec<(EventSet, EventSet)>),
}

impl Payoff {
    pub fn holds(&self, fired: &EventSet) -> bool {
        match self {
            Payoff::Goal(goal) => goal.is_subset(fired),
            Payoff::OfferRequest(pairs) => {
                pairs
                    .iter()
                    .all(|(offer, request)| !offer.is_subset(fired) || request.is_subset(fired))
                    && pairs.iter().any(|(_, request)| request.is_subset(fired))
            }
        }
    }

    pub fn events(&self) -> impl Iterator<Item = &EventId> {
        let sets: Vec<&EventSet> = match self {
            Payoff::Goal(goal) => vec![goal],
            Payoff::OfferRequest(pairs) => pairs.iter().flat_map(|(o, r)| [o, r]).collect(),
        };
        sets.into_iter().flatten()
    }
}

/// Finite event structure with circular causality plus payoffs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractSpec {
    pub events: EventSet,
    pub participants: BTreeSet<ParticipantId>,
    /// π: every event belongs to exactly one participant.
    pub owner: BTreeMap<EventId, ParticipantId>,
    /// Unordered conflict pairs, stored with the smaller name first.
    pub conflicts: BTreeSet<(EventId, EventId)>,
    pub clauses: BTreeSet<Clause>,
    pub payoffs: BTreeMap<ParticipantId, Payoff>,
}

impl ContractSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a participant owning the given events.
    pub fn with_agent<I, S>(mut self, name: &str, events: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let participant = ParticipantId::new(name);
        for e in events {
            let e = EventId::new(e.as_ref());
            self.events.insert(e.clone());
            self.owner.insert(e, participant.clone());
        }
        self.participants.insert(participant);
        self
    }

    pub fn with_clause(mut self, clause: Clause) -> Self {
        self.clauses.insert(clause);
        self
    }

    pub fn with_conflict(mut self, a: &str, b: &str) -> Self {
        self.add_conflict(EventId::new(a), EventId::new(b));
        self
    }

    pub fn with_payoff(mut self, participant: &str, payoff: Payoff) -> Self {
        self.payoffs.insert(ParticipantId::new(participant), payoff);
        self
    }

    /// Inserts a conflict pair in canonical orientation.
    pub fn add_conflict(&mut self, a: EventId, b: EventId) {
        if a <= b {
            self.conflicts.insert((a, b));
        } else {
            self.conflicts.insert((b, a));
        }
    }

    pub fn in_conflict(&self, a: &EventId, b: &EventId) -> bool {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.conflicts.contains(&key)
    }

    pub fn is_conflict_free_set<'a>(&self, set: impl IntoIterator<Item = &'a EventId>) -> bool {
        let items: Vec<&EventId> = set.into_iter().collect();
        items
            .iter()
            .enumerate()
            .all(|(i, a)| items[i + 1..].iter().all(|b| !self.in_conflict(a, b)))
    }

    pub fn owner_of(&self, e: &EventId) -> Option<&ParticipantId> {
        self.owner.get(e)
    }

    /// π⁻¹(A).
    pub fn events_of(&self, participant: &ParticipantId) -> EventSet {
        self.owner
            .iter()
            .filter(|(_, p)| *p == participant)
            .map(|(e, _)| e.clone())
            .collect()
    }
}

/// True iff the conflict relation is empty.
pub fn is_conflict_free(spec: &ContractSpec) -> bool {
    spec.conflicts.is_empty()
}

/// A finite play: duplicate-free, conflict-free sequence of known events.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Play(Vec<EventId>);

impl Play {
    pub fn empty() -> Self {
        Play(Vec::new())
    }

    /// Checks the play invariants against `spec`.
    pub fn new(spec: &ContractSpec, events: Vec<EventId>) -> Result<Self, Error> {
        let mut play = Play::empty();
        for e in events {
            play = play.extended(spec, e)?;
        }
        Ok(play)
    }

    pub fn from_names<I, S>(spec: &ContractSpec, names: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Play::new(
            spec,
            names
                .into_iter()
                .map(|n| EventId::new(n.as_ref()))
                .collect(),
        )
    }

    /// `σ e`, rejecting unknown, repeated or conflicting events.
    pub fn extended(&self, spec: &ContractSpec, e: EventId) -> Result<Self, Error> {
        let reason = if !spec.events.contains(&e) {
            Some("unknown event")
        } else if self.0.contains(&e) {
            Some("event already occurred")
        } else if self.0.iter().any(|x| spec.in_conflict(x, &e)) {
            Some("event conflicts with the play")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidPlay {
                prefix: self.0.clone(),
                event: e,
                reason,
            });
        }
        let mut seq = self.0.clone();
        seq.push(e);
        Ok(Play(seq))
    }

    pub fn events(&self) -> &[EventId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `[σ]`.
    pub fn set(&self) -> EventSet {
        self.0.iter().cloned().collect()
    }

    /// `σ_i`: the first `i` events.
    pub fn prefix(&self, i: usize) -> Play {
        Play(self.0[..i].to_vec())
    }
}

impl fmt::Display for Play {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("(empty)")
        } else {
            f.write_str(&join(&self.0, " "))
        }
    }
}

/// A strategy for one participant: the set of its events it is willing to fire
/// next after a given play.
pub trait Strategy {
    fn participant(&self) -> &ParticipantId;
    fn choose(&self, play: &Play) -> EventSet;
}

/// Strategy backed by a closure.
pub struct FnStrategy<F> {
    participant: ParticipantId,
    choose: F,
}

impl<F> FnStrategy<F>
where
    F: Fn(&Play) -> EventSet,
{
    pub fn new(participant: ParticipantId, choose: F) -> Self {
        FnStrategy {
            participant,
            choose,
        }
    }
}

impl<F> Strategy for FnStrategy<F>
where
    F: Fn(&Play) -> EventSet,
{
    fn participant(&self) -> &ParticipantId {
        &self.participant
    }

    fn choose(&self, play: &Play) -> EventSet {
        (self.choose)(play)
    }
}

/// Machine-readable diagnostic categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagCode {
    Syntax,
    BadIdentifier,
    ReservedName,
    ReflexiveConflict,
    AsymmetricConflict,
    UnknownEvent,
    UndeclaredOwner,
    ConflictingOwner,
    BodyConflict,
    DuplicateClause,
    UnknownParticipant,
    PayoffForm,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::Syntax => "syntax",
            DiagCode::BadIdentifier => "bad-identifier",
            DiagCode::ReservedName => "reserved-name",
            DiagCode::ReflexiveConflict => "reflexive-conflict",
            DiagCode::AsymmetricConflict => "asymmetric-conflict",
            DiagCode::UnknownEvent => "unknown-event",
            DiagCode::UndeclaredOwner => "undeclared-owner",
            DiagCode::ConflictingOwner => "conflicting-owner",
            DiagCode::BodyConflict => "body-conflict",
            DiagCode::DuplicateClause => "duplicate-clause",
            DiagCode::UnknownParticipant => "unknown-participant",
            DiagCode::PayoffForm => "payoff-form",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub message: String,
    /// 1-based source position, when the diagnostic comes from a file.
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl Diagnostic {
    pub fn new(code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            line: None,
            column: None,
        }
    }

    pub fn at(mut self, line: usize, column: usize) -> Self {
        self.line = Some(line);
        self.column = Some(column);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{l}:{c}: {}: {}", self.code, self.message),
            _ => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

/// Checks every structural invariant of `spec`. Empty result means well formed.
///
/// `allow_tagged` admits the reserved spellings used by encoded theories.
pub fn validate_with(spec: &ContractSpec, allow_tagged: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let check_name = |name: &str, what: &str, out: &mut Vec<Diagnostic>| {
        if is_reserved(name) {
            if !allow_tagged {
                out.push(Diagnostic::new(
                    DiagCode::ReservedName,
                    format!("{what} name `{name}` uses a reserved spelling"),
                ));
            }
        } else if !is_identifier(name) {
            out.push(Diagnostic::new(
                DiagCode::BadIdentifier,
                format!("{what} name `{name}` is not an identifier"),
            ));
        }
    };
    for e in &spec.events {
        check_name(e.as_str(), "event", &mut out);
    }
    for p in &spec.participants {
        check_name(p.as_str(), "participant", &mut out);
    }

    for e in &spec.events {
        match spec.owner.get(e) {
            None => out.push(Diagnostic::new(
                DiagCode::UndeclaredOwner,
                format!("undeclared owner for {e}"),
            )),
            Some(p) if !spec.participants.contains(p) => out.push(Diagnostic::new(
                DiagCode::UnknownParticipant,
                format!("owner {p} of {e} is not a declared participant"),
            )),
            Some(_) => {}
        }
    }
    for e in spec.owner.keys() {
        if !spec.events.contains(e) {
            out.push(Diagnostic::new(
                DiagCode::UnknownEvent,
                format!("owned event {e} is not declared"),
            ));
        }
    }

    for (a, b) in &spec.conflicts {
        if a == b {
            out.push(Diagnostic::new(
                DiagCode::ReflexiveConflict,
                format!("conflict must be irreflexive: {a} # {a}"),
            ));
        } else if a > b {
            out.push(Diagnostic::new(
                DiagCode::AsymmetricConflict,
                format!("conflict {a} # {b} is not stored in canonical orientation"),
            ));
        }
        for e in [a, b] {
            if !spec.events.contains(e) {
                out.push(Diagnostic::new(
                    DiagCode::UnknownEvent,
                    format!("conflict mentions unknown event {e}"),
                ));
            }
        }
    }

    for clause in &spec.clauses {
        for e in clause.atoms() {
            if !spec.events.contains(e) {
                out.push(Diagnostic::new(
                    DiagCode::UnknownEvent,
                    format!("clause `{clause}` mentions unknown event {e}"),
                ));
            }
        }
        if !spec.is_conflict_free_set(&clause.body) {
            out.push(Diagnostic::new(
                DiagCode::BodyConflict,
                format!("clause body not conflict-free: `{clause}`"),
            ));
        }
    }

    for (p, payoff) in &spec.payoffs {
        if !spec.participants.contains(p) {
            out.push(Diagnostic::new(
                DiagCode::UnknownParticipant,
                format!("payoff declared for unknown participant {p}"),
            ));
        }
        for e in payoff.events() {
            if !spec.events.contains(e) {
                out.push(Diagnostic::new(
                    DiagCode::UnknownEvent,
                    format!("payoff of {p} mentions unknown event {e}"),
                ));
            }
        }
    }
    out
}

pub fn validate(spec: &ContractSpec) -> Vec<Diagnostic> {
    validate_with(spec, false)
}

pub(crate) fn join<'a, T: fmt::Display + 'a>(
    items: impl IntoIterator<Item = &'a T>,
    sep: &str,
) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}
