//! Line-oriented `.ces` text format.
//!
//! ```text
//! agent A owns a
//! agent B owns b
//! clause b <- a
//! clause a <<- b
//! conflict b c
//! payoff A goal {b}
//! payoff B offers {b} requests {a}
//! ```
//!
//! `#` starts a comment. A clause head with no explicit owner belongs to the
//! most recent `agent` line above it; every other event must be owned
//! explicitly. `↠` is accepted for `<<-`.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    is_identifier, is_reserved, validate_with, Clause, ClauseKind, ContractSpec, DiagCode,
    Diagnostic, EventId, EventSet, ParticipantId, Payoff,
};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `!a`, `R$a`, `U$a` atoms, as produced by the urgency encoding.
    pub allow_tagged: bool,
}

type Names = Vec<(String, Pos)>;

#[derive(Clone, Debug)]
struct Token {
    text: String,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut current: Option<Token> = None;
    for (i, c) in line.chars().enumerate() {
        let column = i + 1;
        if c.is_whitespace() || matches!(c, '{' | '}' | ',') {
            out.extend(current.take());
            if !c.is_whitespace() {
                out.push(Token {
                    text: c.to_string(),
                    column,
                });
            }
        } else {
            current
                .get_or_insert_with(|| Token {
                    text: String::new(),
                    column,
                })
                .text
                .push(c);
        }
    }
    out.extend(current);
    out
}

struct Pos {
    line: usize,
    column: usize,
}

enum Stmt {
    Agent {
        name: (String, Pos),
        owns: Names,
    },
    Clause {
        head: (String, Pos),
        kind: ClauseKind,
        body: Names,
    },
    Conflict {
        a: (String, Pos),
        b: (String, Pos),
    },
    Goal {
        name: (String, Pos),
        goal: Names,
    },
    Offer {
        name: (String, Pos),
        offers: Names,
        requests: Names,
    },
}

struct Parser {
    options: ParseOptions,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn error(&mut self, code: DiagCode, pos: &Pos, message: impl Into<String>) {
        self.diags
            .push(Diagnostic::new(code, message).at(pos.line, pos.column));
    }

    fn name(&mut self, line: usize, tok: &Token, what: &str) -> Option<(String, Pos)> {
        let pos = Pos {
            line,
            column: tok.column,
        };
        let text = tok.text.as_str();
        if is_reserved(text) {
            if !self.options.allow_tagged {
                self.error(
                    DiagCode::ReservedName,
                    &pos,
                    format!("{what} name `{text}` uses a reserved spelling"),
                );
                return None;
            }
        } else if !is_identifier(text) {
            self.error(
                DiagCode::BadIdentifier,
                &pos,
                format!("expected {what} name, found `{text}`"),
            );
            return None;
        }
        Some((text.to_string(), pos))
    }

    fn names(&mut self, line: usize, toks: &[Token], what: &str) -> Option<Names> {
        let mut out = Vec::new();
        let mut ok = true;
        for t in toks.iter().filter(|t| t.text != ",") {
            match self.name(line, t, what) {
                Some(n) => out.push(n),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    /// `{ e1 e2 … }` at the front of `toks`; returns the names and the rest.
    fn braced<'t>(&mut self, line: usize, toks: &'t [Token]) -> Option<(Names, &'t [Token])> {
        let Some(open) = toks.first() else {
            self.syntax(line, toks, "expected `{`");
            return None;
        };
        if open.text != "{" {
            self.syntax(line, toks, "expected `{`");
            return None;
        }
        let Some(close) = toks.iter().position(|t| t.text == "}") else {
            self.syntax(line, &[], "missing `}`");
            return None;
        };
        let names = self.names(line, &toks[1..close], "event")?;
        Some((names, &toks[close + 1..]))
    }

    fn syntax(&mut self, line: usize, at: &[Token], message: &str) {
        let column = at.first().map_or(1, |t| t.column);
        self.error(DiagCode::Syntax, &Pos { line, column }, message);
    }

    fn statement(&mut self, line: usize, toks: &[Token]) -> Option<Stmt> {
        let (keyword, rest) = toks.split_first()?;
        match keyword.text.as_str() {
            "agent" => {
                let (name, rest) = rest.split_first().or_else(|| {
                    self.syntax(line, &[], "expected participant name");
                    None
                })?;
                let name = self.name(line, name, "participant")?;
                let owns = match rest.split_first() {
                    None => Vec::new(),
                    Some((kw, events)) if kw.text == "owns" => self.names(line, events, "event")?,
                    Some(_) => {
                        self.syntax(line, rest, "expected `owns`");
                        return None;
                    }
                };
                Some(Stmt::Agent { name, owns })
            }
            "clause" => {
                let (head, rest) = rest.split_first().or_else(|| {
                    self.syntax(line, &[], "expected clause head");
                    None
                })?;
                let head = self.name(line, head, "event")?;
                let (kind, body) = match rest.split_first() {
                    None => (ClauseKind::Standard, &[][..]),
                    Some((arrow, body)) => match arrow.text.as_str() {
                        "<-" => (ClauseKind::Standard, body),
                        "<<-" | "↠" => (ClauseKind::Circular, body),
                        _ => {
                            self.syntax(line, rest, "expected `<-` or `<<-`");
                            return None;
                        }
                    },
                };
                if rest.len() == 1 {
                    self.syntax(line, rest, "expected clause body or `true`");
                    return None;
                }
                let body = if body.len() == 1 && body[0].text == "true" {
                    Vec::new()
                } else {
                    self.names(line, body, "event")?
                };
                Some(Stmt::Clause { head, kind, body })
            }
            "conflict" => {
                if rest.len() != 2 {
                    self.syntax(line, rest, "expected exactly two events");
                    return None;
                }
                let a = self.name(line, &rest[0], "event");
                let b = self.name(line, &rest[1], "event");
                Some(Stmt::Conflict { a: a?, b: b? })
            }
            "payoff" => {
                let (name, rest) = rest.split_first().or_else(|| {
                    self.syntax(line, &[], "expected participant name");
                    None
                })?;
                let name = self.name(line, name, "participant")?;
                let (form, rest) = rest.split_first().or_else(|| {
                    self.syntax(line, &[], "expected `goal` or `offers`");
                    None
                })?;
                match form.text.as_str() {
                    "goal" => {
                        let (goal, rest) = self.braced(line, rest)?;
                        if !rest.is_empty() {
                            self.syntax(line, rest, "unexpected trailing input");
                            return None;
                        }
                        Some(Stmt::Goal { name, goal })
                    }
                    "offers" => {
                        let (offers, rest) = self.braced(line, rest)?;
                        match rest.split_first() {
                            Some((kw, rest)) if kw.text == "requests" => {
                                let (requests, rest) = self.braced(line, rest)?;
                                if !rest.is_empty() {
                                    self.syntax(line, rest, "unexpected trailing input");
                                    return None;
                                }
                                Some(Stmt::Offer {
                                    name,
                                    offers,
                                    requests,
                                })
                            }
                            _ => {
                                self.syntax(line, rest, "expected `requests`");
                                None
                            }
                        }
                    }
                    _ => {
                        self.syntax(line, &toks[2..], "expected `goal` or `offers`");
                        None
                    }
                }
            }
            other => {
                self.syntax(line, toks, &format!("unknown statement `{other}`"));
                None
            }
        }
    }
}

/// Parses a `.ces` file with default options.
pub fn parse(text: &str) -> Result<ContractSpec, Vec<Diagnostic>> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<ContractSpec, Vec<Diagnostic>> {
    let mut p = Parser {
        options,
        diags: Vec::new(),
    };
    let stmts: Vec<Stmt> = text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let toks = tokenize(line.strip_suffix('\r').unwrap_or(line));
            p.statement(i + 1, &toks)
        })
        .collect();

    let mut spec = ContractSpec::new();

    // explicit ownership first, wherever it appears
    for stmt in &stmts {
        if let Stmt::Agent { name, owns } = stmt {
            let who = ParticipantId::new(&name.0);
            spec.participants.insert(who.clone());
            for (e, pos) in owns {
                let e = EventId::new(e);
                match spec.owner.get(&e) {
                    Some(prev) if *prev != who => p.error(
                        DiagCode::ConflictingOwner,
                        pos,
                        format!("{e} is owned by both {prev} and {who}"),
                    ),
                    _ => {
                        spec.events.insert(e.clone());
                        spec.owner.insert(e, who.clone());
                    }
                }
            }
        }
    }

    // clause heads default to the closest agent line above
    let mut current: Option<ParticipantId> = None;
    for stmt in &stmts {
        match stmt {
            Stmt::Agent { name, .. } => current = Some(ParticipantId::new(&name.0)),
            Stmt::Clause { head, .. } => {
                let e = EventId::new(&head.0);
                if !spec.owner.contains_key(&e) {
                    if let Some(who) = &current {
                        spec.events.insert(e.clone());
                        spec.owner.insert(e, who.clone());
                    }
                }
            }
            _ => {}
        }
    }

    let mut reported: BTreeSet<EventId> = BTreeSet::new();
    let mut known = |p: &mut Parser, spec: &ContractSpec, (e, pos): &(String, Pos)| {
        let e = EventId::new(e);
        let ok = spec.events.contains(&e);
        if !ok && reported.insert(e.clone()) {
            p.error(
                DiagCode::UndeclaredOwner,
                pos,
                format!("undeclared owner for {e}"),
            );
        }
        ok.then_some(e)
    };

    let mut clause_lines: Vec<(Clause, usize, usize)> = Vec::new();
    let mut offers: BTreeMap<ParticipantId, (Vec<(EventSet, EventSet)>, usize)> = BTreeMap::new();
    let mut goals: BTreeMap<ParticipantId, usize> = BTreeMap::new();
    for stmt in &stmts {
        match stmt {
            Stmt::Agent { .. } => {}
            Stmt::Clause { head, kind, body } => {
                let body: Vec<Option<EventId>> =
                    body.iter().map(|b| known(&mut p, &spec, b)).collect();
                let h = known(&mut p, &spec, head);
                let (Some(h), Some(body)) = (h, body.into_iter().collect::<Option<EventSet>>())
                else {
                    continue;
                };
                let clause = Clause::new(*kind, body, h);
                if clause_lines.iter().any(|(c, _, _)| *c == clause) {
                    p.error(
                        DiagCode::DuplicateClause,
                        &head.1,
                        format!("duplicate clause `{clause}`"),
                    );
                } else {
                    clause_lines.push((clause, head.1.line, head.1.column));
                }
            }
            Stmt::Conflict { a, b } => {
                let (ea, eb) = (known(&mut p, &spec, a), known(&mut p, &spec, b));
                if a.0 == b.0 {
                    p.error(
                        DiagCode::ReflexiveConflict,
                        &b.1,
                        format!("conflict must be irreflexive: {} # {}", a.0, b.0),
                    );
                } else if let (Some(ea), Some(eb)) = (ea, eb) {
                    spec.add_conflict(ea, eb);
                }
            }
            Stmt::Goal { name, goal } => {
                let who = ParticipantId::new(&name.0);
                if !spec.participants.contains(&who) {
                    p.error(
                        DiagCode::UnknownParticipant,
                        &name.1,
                        format!("payoff declared for unknown participant {who}"),
                    );
                    continue;
                }
                let set: Option<EventSet> = goal
                    .iter()
                    .map(|g| known(&mut p, &spec, g))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect();
                if goals.contains_key(&who) || offers.contains_key(&who) {
                    p.error(
                        DiagCode::PayoffForm,
                        &name.1,
                        format!("{who} already has a payoff"),
                    );
                    continue;
                }
                goals.insert(who.clone(), name.1.line);
                if let Some(set) = set {
                    spec.payoffs.insert(who, Payoff::Goal(set));
                }
            }
            Stmt::Offer {
                name,
                offers: o,
                requests: r,
            } => {
                let who = ParticipantId::new(&name.0);
                if !spec.participants.contains(&who) {
                    p.error(
                        DiagCode::UnknownParticipant,
                        &name.1,
                        format!("payoff declared for unknown participant {who}"),
                    );
                    continue;
                }
                let o: Option<EventSet> = o
                    .iter()
                    .map(|g| known(&mut p, &spec, g))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect();
                let r: Option<EventSet> = r
                    .iter()
                    .map(|g| known(&mut p, &spec, g))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect();
                if goals.contains_key(&who) {
                    p.error(
                        DiagCode::PayoffForm,
                        &name.1,
                        format!("{who} mixes goal and offer-request payoffs"),
                    );
                    continue;
                }
                let entry = offers.entry(who).or_insert((Vec::new(), name.1.line));
                if let (Some(o), Some(r)) = (o, r) {
                    entry.0.push((o, r));
                }
            }
        }
    }
    for (who, (pairs, _)) in offers {
        spec.payoffs.insert(who, Payoff::OfferRequest(pairs));
    }

    for (clause, line, column) in &clause_lines {
        if !spec.is_conflict_free_set(&clause.body) {
            p.error(
                DiagCode::BodyConflict,
                &Pos {
                    line: *line,
                    column: *column,
                },
                format!("clause body not conflict-free: `{clause}`"),
            );
        }
    }
    spec.clauses = clause_lines.into_iter().map(|(c, _, _)| c).collect();

    if p.diags.is_empty() {
        // anything the statement checks missed is reported against line 1
        p.diags = validate_with(&spec, options.allow_tagged)
            .into_iter()
            .map(|d| d.at(1, 1))
            .collect();
    }
    if p.diags.is_empty() {
        Ok(spec)
    } else {
        Err(p.diags)
    }
}

fn braces(set: &EventSet) -> String {
    format!("{{{}}}", crate::model::join(set, " "))
}

/// Canonical text of a contract: agents by name, clauses by head, kind and
/// body, then conflicts, then payoffs by participant.
pub fn print(spec: &ContractSpec) -> String {
    let mut out = String::new();
    for who in &spec.participants {
        let events = spec.events_of(who);
        if events.is_empty() {
            out.push_str(&format!("agent {who}\n"));
        } else {
            out.push_str(&format!(
                "agent {who} owns {}\n",
                crate::model::join(&events, " ")
            ));
        }
    }
    for c in &spec.clauses {
        match (c.kind, c.body.is_empty()) {
            (ClauseKind::Standard, true) => out.push_str(&format!("clause {}\n", c.head)),
            _ => out.push_str(&format!("clause {c}\n")),
        }
    }
    for (a, b) in &spec.conflicts {
        out.push_str(&format!("conflict {a} {b}\n"));
    }
    for (who, payoff) in &spec.payoffs {
        match payoff {
            Payoff::Goal(goal) => out.push_str(&format!("payoff {who} goal {}\n", braces(goal))),
            Payoff::OfferRequest(pairs) => {
                for (o, r) in pairs {
                    out.push_str(&format!(
                        "payoff {who} offers {} requests {}\n",
                        braces(o),
                        braces(r)
                    ));
                }
            }
        }
    }
    out
}
