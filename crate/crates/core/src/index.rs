//! Dense, bitset-indexed form of a contract used by the polynomial algorithms.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::Error;
use crate::model::{Clause, ClauseKind, ContractSpec, EventId, EventSet};

pub(crate) type Bits = FixedBitSet;

#[derive(Clone, Debug)]
struct IndexedClause {
    body: Bits,
    body_len: usize,
    head: usize,
}

/// Events in canonical order plus clauses as bitsets. Conflicts are kept only
/// to check sets handed in by callers.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    names: Vec<EventId>,
    index: HashMap<EventId, usize>,
    standard: Vec<IndexedClause>,
    circular: Vec<IndexedClause>,
    standard_by_head: Vec<Vec<usize>>,
    circular_by_head: Vec<Vec<usize>>,
    /// atom -> standard clauses having it in the body
    watchers: Vec<Vec<usize>>,
    circular_heads: Bits,
    conflicts: Vec<Bits>,
}

impl Compiled {
    pub(crate) fn new(spec: &ContractSpec) -> Result<Self, Error> {
        Compiled::from_parts(&spec.events, &spec.clauses, &spec.conflicts)
    }

    pub(crate) fn from_parts(
        events: &EventSet,
        clauses: &BTreeSet<Clause>,
        conflicts: &BTreeSet<(EventId, EventId)>,
    ) -> Result<Self, Error> {
        let mut events: EventSet = events.clone();
        for c in clauses {
            events.extend(c.atoms().cloned());
        }
        let names: Vec<EventId> = events.into_iter().collect();
        let n = names.len();
        let index: HashMap<EventId, usize> = names
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let mut compiled = Compiled {
            standard: Vec::new(),
            circular: Vec::new(),
            standard_by_head: vec![Vec::new(); n],
            circular_by_head: vec![Vec::new(); n],
            watchers: vec![Vec::new(); n],
            circular_heads: Bits::with_capacity(n),
            conflicts: vec![Bits::with_capacity(n); n],
            names,
            index,
        };
        for clause in clauses {
            let body = compiled.bits(&clause.body)?;
            let head = compiled.id(&clause.head)?;
            let ic = IndexedClause {
                body_len: body.count_ones(..),
                body,
                head,
            };
            match clause.kind {
                ClauseKind::Standard => {
                    let k = compiled.standard.len();
                    for a in ic.body.ones() {
                        compiled.watchers[a].push(k);
                    }
                    compiled.standard_by_head[head].push(k);
                    compiled.standard.push(ic);
                }
                ClauseKind::Circular => {
                    compiled.circular_by_head[head].push(compiled.circular.len());
                    compiled.circular_heads.insert(head);
                    compiled.circular.push(ic);
                }
            }
        }
        for (a, b) in conflicts {
            let (a, b) = (compiled.id(a)?, compiled.id(b)?);
            compiled.conflicts[a].insert(b);
            compiled.conflicts[b].insert(a);
        }
        Ok(compiled)
    }

    /// Adds `⊤ → e`.
    pub(crate) fn add_fact(&mut self, e: usize) {
        self.standard_by_head[e].push(self.standard.len());
        self.standard.push(IndexedClause {
            body: self.empty(),
            body_len: 0,
            head: e,
        });
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn empty(&self) -> Bits {
        Bits::with_capacity(self.len())
    }

    pub(crate) fn id(&self, e: &EventId) -> Result<usize, Error> {
        self.index
            .get(e)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(e.clone()))
    }

    pub(crate) fn name(&self, i: usize) -> &EventId {
        &self.names[i]
    }

    pub(crate) fn bits<'a>(
        &self,
        set: impl IntoIterator<Item = &'a EventId>,
    ) -> Result<Bits, Error> {
        let mut b = self.empty();
        for e in set {
            b.insert(self.id(e)?);
        }
        Ok(b)
    }

    pub(crate) fn names_of(&self, bits: &Bits) -> EventSet {
        bits.ones().map(|i| self.names[i].clone()).collect()
    }

    pub(crate) fn is_conflict_free(&self, x: &Bits) -> bool {
        x.ones().all(|i| self.conflicts[i].is_disjoint(x))
    }

    pub(crate) fn has_conflicts(&self) -> bool {
        self.conflicts.iter().any(|c| !c.is_clear())
    }

    /// Some clause of `kind` with head `e` has its body inside `x`.
    pub(crate) fn enables(&self, x: &Bits, e: usize, kind: ClauseKind) -> bool {
        let (clauses, by_head) = match kind {
            ClauseKind::Standard => (&self.standard, &self.standard_by_head),
            ClauseKind::Circular => (&self.circular, &self.circular_by_head),
        };
        by_head[e].iter().any(|&k| clauses[k].body.is_subset(x))
    }

    /// Least superset of `start` closed under the standard clauses, by
    /// counter-based forward chaining (linear in the size of the clauses).
    pub(crate) fn standard_closure(&self, start: &Bits) -> Bits {
        let mut closed = start.clone();
        let mut missing: Vec<usize> = self.standard.iter().map(|c| c.body_len).collect();
        let mut queue: Vec<usize> = start.ones().collect();
        for c in &self.standard {
            if c.body_len == 0 && !closed.contains(c.head) {
                closed.insert(c.head);
                queue.push(c.head);
            }
        }
        while let Some(a) = queue.pop() {
            for &k in &self.watchers[a] {
                missing[k] -= 1;
                if missing[k] == 0 {
                    let h = self.standard[k].head;
                    if !closed.contains(h) {
                        closed.insert(h);
                        queue.push(h);
                    }
                }
            }
        }
        closed
    }

    /// Events reachable with past `x` without leaving new credits.
    ///
    /// Starts from every circular head as a candidate, closes under the
    /// standard clauses, and discards candidates the closure does not
    /// circular-enable, until the candidate set is stable.
    pub(crate) fn reachable(&self, x: &Bits) -> Bits {
        let mut candidates = self.circular_heads.clone();
        loop {
            let mut start = x.clone();
            start.union_with(&candidates);
            let closure = self.standard_closure(&start);
            let kept: Bits = candidates
                .ones()
                .filter(|&e| self.enables(&closure, e, ClauseKind::Circular))
                .collect_with_len(self.len());
            if kept == candidates {
                let mut out = closure;
                out.difference_with(x);
                return out;
            }
            candidates = kept;
        }
    }

    /// Events prudent after any play with event set `x`.
    pub(crate) fn prudent(&self, x: &Bits) -> Bits {
        let mut horizon = self.reachable(x);
        horizon.union_with(x);
        (0..self.len())
            .filter(|&e| {
                !x.contains(e)
                    && (self.enables(x, e, ClauseKind::Standard)
                        || self.enables(&horizon, e, ClauseKind::Circular))
            })
            .collect_with_len(self.len())
    }

    /// Iterates `X ↦ X ∪ PR(X)` from the empty set.
    pub(crate) fn provable(&self) -> Bits {
        let mut x = self.empty();
        loop {
            let step = self.prudent(&x);
            if step.is_clear() {
                return x;
            }
            x.union_with(&step);
        }
    }

    /// Credit set of every prefix of `seq`, from the empty prefix to `seq` itself.
    pub(crate) fn credits(&self, seq: &[usize]) -> Vec<Bits> {
        (0..=seq.len())
            .map(|k| self.credits_of(&seq[..k]))
            .collect()
    }

    pub(crate) fn credits_of(&self, seq: &[usize]) -> Bits {
        let whole: Bits = seq.iter().copied().collect_with_len(self.len());
        let mut past = self.empty();
        let mut credit = self.empty();
        for &e in seq {
            if !self.enables(&past, e, ClauseKind::Standard)
                && !self.enables(&whole, e, ClauseKind::Circular)
            {
                credit.insert(e);
            }
            past.insert(e);
        }
        credit
    }
}

pub(crate) trait CollectBits {
    fn collect_with_len(self, len: usize) -> Bits;
}

impl<I: Iterator<Item = usize>> CollectBits for I {
    fn collect_with_len(self, len: usize) -> Bits {
        let mut b = Bits::with_capacity(len);
        for i in self {
            b.insert(i);
        }
        b
    }
}
