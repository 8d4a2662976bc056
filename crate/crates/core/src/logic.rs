//! Horn fragment of propositional contract logic: provable atoms, proof
//! traces, right-deduplicating interleaving, urgent atoms and the urgency
//! encoding over tagged atoms.
//!
//! A Horn theory is the same thing as a conflict-free contract without
//! ownership. Provability, urgency and trace enumeration all go through the
//! polynomial game fixpoints of [`crate::index::Compiled`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::Error;
use crate::index::{Bits, Compiled};
use crate::model::{
    is_reserved, Clause, ClauseKind, ContractSpec, EventId, EventSet, ParticipantId,
};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HornTheory {
    pub atoms: EventSet,
    pub clauses: BTreeSet<Clause>,
}

impl HornTheory {
    /// Theory whose atoms are exactly those mentioned by `clauses`.
    pub fn new(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let clauses: BTreeSet<Clause> = clauses.into_iter().collect();
        let atoms = clauses.iter().flat_map(|c| c.atoms().cloned()).collect();
        HornTheory { atoms, clauses }
    }

    pub fn with_atoms<I, S>(mut self, atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.atoms
            .extend(atoms.into_iter().map(|a| EventId::new(a.as_ref())));
        self
    }

    /// `Δ, a`: adds `a` as a fact.
    pub fn with_fact(mut self, a: &EventId) -> Self {
        self.atoms.insert(a.clone());
        self.clauses.insert(Clause::new(
            ClauseKind::Standard,
            EventSet::new(),
            a.clone(),
        ));
        self
    }

    /// The theory of a conflict-free contract.
    pub fn from_spec(spec: &ContractSpec) -> Result<Self, Error> {
        if !spec.conflicts.is_empty() {
            return Err(Error::Conflicted {
                operation: "theory of a contract",
            });
        }
        let mut atoms = spec.events.clone();
        atoms.extend(spec.clauses.iter().flat_map(|c| c.atoms().cloned()));
        Ok(HornTheory {
            atoms,
            clauses: spec.clauses.clone(),
        })
    }

    /// The conflict-free contract of this theory, every event owned by `owner`.
    pub fn to_spec(&self, owner: &ParticipantId) -> ContractSpec {
        self.to_spec_with(|_| owner.clone())
    }

    pub fn to_spec_with(&self, owner: impl Fn(&EventId) -> ParticipantId) -> ContractSpec {
        let owners: BTreeMap<EventId, ParticipantId> =
            self.atoms.iter().map(|a| (a.clone(), owner(a))).collect();
        ContractSpec {
            events: self.atoms.clone(),
            participants: owners.values().cloned().collect(),
            owner: owners,
            conflicts: BTreeSet::new(),
            clauses: self.clauses.clone(),
            payoffs: BTreeMap::new(),
        }
    }

    pub(crate) fn compile(&self) -> Compiled {
        Compiled::from_parts(&self.atoms, &self.clauses, &BTreeSet::new())
            .expect("clause atoms are always indexed")
    }
}

/// A duplicate-free sequence of atoms. Ordered shortlex: by length, then
/// lexicographically on atom names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace(Vec<EventId>);

impl Trace {
    pub fn new(seq: Vec<EventId>) -> Self {
        Trace(seq)
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Trace(
            names
                .into_iter()
                .map(|n| EventId::new(n.as_ref()))
                .collect(),
        )
    }

    /// Parses `"abc"`-style traces of single-character atoms, as in worked examples.
    pub fn chars(s: &str) -> Self {
        Trace(s.chars().map(|c| EventId::new(c.to_string())).collect())
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

    pub fn set(&self) -> EventSet {
        self.0.iter().cloned().collect()
    }

    /// Keeps only the first occurrence of every atom.
    pub fn dedup_right(&self) -> Trace {
        let mut seen = BTreeSet::new();
        Trace(self.0.iter().filter(|e| seen.insert(*e)).cloned().collect())
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("(empty)")
        } else {
            f.write_str(&crate::model::join(&self.0, " "))
        }
    }
}

/// `s1 | s2`: every interleaving of the two sequences, where both operands and
/// every result drop repeated atoms from the right.
pub fn interleave(s1: &Trace, s2: &Trace) -> BTreeSet<Trace> {
    fn go(left: &[EventId], right: &[EventId], acc: &mut Vec<EventId>, out: &mut BTreeSet<Trace>) {
        if left.is_empty() && right.is_empty() {
            out.insert(Trace(acc.clone()).dedup_right());
            return;
        }
        if let Some((x, rest)) = left.split_first() {
            acc.push(x.clone());
            go(rest, right, acc, out);
            acc.pop();
        }
        if let Some((x, rest)) = right.split_first() {
            acc.push(x.clone());
            go(left, rest, acc, out);
            acc.pop();
        }
    }
    let (a, b) = (s1.dedup_right(), s2.dedup_right());
    let mut out = BTreeSet::new();
    go(&a.0, &b.0, &mut Vec::new(), &mut out);
    out
}

/// `{a : Δ ⊢ a}`, as the fixpoint of `X ↦ X ∪ PR(X)` from the empty set.
pub fn provable_atoms(theory: &HornTheory) -> EventSet {
    let compiled = theory.compile();
    compiled.names_of(&compiled.provable())
}

/// Lazy enumeration of the proof traces of a theory in shortlex order.
///
/// A sequence is a proof trace exactly when each atom is urgent after the set
/// of its predecessors and the whole sequence leaves no credit. The iterator
/// grows urgent prefixes one length at a time and yields the credit-free ones,
/// so callers can stop after any number of traces.
pub struct ProofTraces {
    compiled: Compiled,
    prudent: HashMap<Bits, Bits>,
    level: Vec<(Vec<usize>, Bits)>,
    pending: std::vec::IntoIter<Trace>,
}

impl ProofTraces {
    fn new(theory: &HornTheory) -> Self {
        let compiled = theory.compile();
        let root = (Vec::new(), compiled.empty());
        ProofTraces {
            compiled,
            prudent: HashMap::new(),
            level: vec![root],
            pending: Vec::new().into_iter(),
        }
    }

    fn advance(&mut self) -> bool {
        if self.level.is_empty() {
            return false;
        }
        let ready: Vec<Trace> = self
            .level
            .iter()
            .filter(|(seq, _)| self.compiled.credits_of(seq).is_clear())
            .map(|(seq, _)| Trace(seq.iter().map(|&i| self.compiled.name(i).clone()).collect()))
            .collect();
        let mut next = Vec::new();
        for (seq, set) in &self.level {
            let compiled = &self.compiled;
            let pr = self
                .prudent
                .entry(set.clone())
                .or_insert_with(|| compiled.prudent(set));
            for e in pr.ones() {
                let mut s = seq.clone();
                s.push(e);
                let mut b = set.clone();
                b.insert(e);
                next.push((s, b));
            }
        }
        self.level = next;
        self.pending = ready.into_iter();
        true
    }
}

impl Iterator for ProofTraces {
    type Item = Trace;

    fn next(&mut self) -> Option<Trace> {
        loop {
            if let Some(t) = self.pending.next() {
                return Some(t);
            }
            if !self.advance() {
                return None;
            }
        }
    }
}

/// Streams `[[Δ]]` in shortlex order.
pub fn proof_trace_iter(theory: &HornTheory) -> ProofTraces {
    ProofTraces::new(theory)
}

/// `[[Δ]]`, truncated to the first `max_count` traces in shortlex order when given.
pub fn proof_traces(theory: &HornTheory, max_count: Option<usize>) -> Vec<Trace> {
    let iter = proof_trace_iter(theory);
    match max_count {
        Some(n) => iter.take(n).collect(),
        None => iter.collect(),
    }
}

pub fn is_proof_trace(theory: &HornTheory, seq: &Trace) -> bool {
    let compiled = theory.compile();
    let mut ids = Vec::with_capacity(seq.len());
    let mut past = compiled.empty();
    for e in seq.events() {
        let Ok(i) = compiled.id(e) else {
            return false;
        };
        if past.contains(i) || !compiled.prudent(&past).contains(i) {
            return false;
        }
        past.insert(i);
        ids.push(i);
    }
    compiled.credits_of(&ids).is_clear()
}

/// Tags of the urgency encoding: `!a` (already happened), `Ua` (urgent),
/// `Ra` (reachable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Bang,
    Reach,
    Urgent,
}

impl Tag {
    fn prefix(self) -> &'static str {
        match self {
            Tag::Bang => "!",
            Tag::Reach => "R$",
            Tag::Urgent => "U$",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedAtom {
    pub base: EventId,
    pub tag: Tag,
}

impl TaggedAtom {
    pub fn new(tag: Tag, base: &EventId) -> Self {
        TaggedAtom {
            base: base.clone(),
            tag,
        }
    }

    pub fn to_event(&self) -> EventId {
        EventId::new(format!("{}{}", self.tag.prefix(), self.base))
    }

    pub fn parse(e: &EventId) -> Option<Self> {
        [Tag::Bang, Tag::Reach, Tag::Urgent]
            .into_iter()
            .find_map(|tag| {
                e.as_str()
                    .strip_prefix(tag.prefix())
                    .map(|base| TaggedAtom {
                        base: EventId::new(base),
                        tag,
                    })
            })
    }
}

fn tagged(tag: Tag, e: &EventId) -> EventId {
    TaggedAtom::new(tag, e).to_event()
}

fn tagged_set(tag: Tag, set: &EventSet) -> EventSet {
    set.iter().map(|e| tagged(tag, e)).collect()
}

/// Projects the atoms carrying `tag` back to their base atoms.
pub fn untag(tag: Tag, set: &EventSet) -> EventSet {
    set.iter()
        .filter_map(TaggedAtom::parse)
        .filter(|t| t.tag == tag)
        .map(|t| t.base)
        .collect()
}

/// The urgency encoding `[[Δ]]_U`.
///
/// `α → a` becomes `!α → Ua` and `Rα → Ra`; `α ↠ a` becomes `Rα ↠ Ua`; every
/// atom `a` occurring in a clause adds `!a → Ua` and `Ua → Ra`.
pub fn encode_u(theory: &HornTheory) -> Result<HornTheory, Error> {
    if let Some(a) = theory.atoms.iter().find(|a| is_reserved(a.as_str())) {
        return Err(Error::ReservedAtom(a.clone()));
    }
    let mut clauses = BTreeSet::new();
    let mut mentioned = EventSet::new();
    for c in &theory.clauses {
        match c.kind {
            ClauseKind::Standard => {
                clauses.insert(Clause::new(
                    ClauseKind::Standard,
                    tagged_set(Tag::Bang, &c.body),
                    tagged(Tag::Urgent, &c.head),
                ));
                clauses.insert(Clause::new(
                    ClauseKind::Standard,
                    tagged_set(Tag::Reach, &c.body),
                    tagged(Tag::Reach, &c.head),
                ));
            }
            ClauseKind::Circular => {
                clauses.insert(Clause::new(
                    ClauseKind::Circular,
                    tagged_set(Tag::Reach, &c.body),
                    tagged(Tag::Urgent, &c.head),
                ));
            }
        }
        mentioned.extend(c.atoms().cloned());
    }
    for a in &mentioned {
        clauses.insert(Clause::new(
            ClauseKind::Standard,
            [tagged(Tag::Bang, a)].into(),
            tagged(Tag::Urgent, a),
        ));
        clauses.insert(Clause::new(
            ClauseKind::Standard,
            [tagged(Tag::Urgent, a)].into(),
            tagged(Tag::Reach, a),
        ));
    }
    Ok(HornTheory::new(clauses))
}

/// The encoding of a conflict-free contract, each tagged atom owned by the
/// owner of its base event. Payoffs are not carried over.
pub fn encode_u_spec(spec: &ContractSpec) -> Result<ContractSpec, Error> {
    let theory = HornTheory::from_spec(spec)?;
    let encoded = encode_u(&theory)?;
    let mut out = encoded.to_spec_with(|e| {
        let base = TaggedAtom::parse(e)
            .map(|t| t.base)
            .unwrap_or_else(|| e.clone());
        spec.owner
            .get(&base)
            .cloned()
            .unwrap_or_else(|| ParticipantId::new("_"))
    });
    out.participants.extend(spec.participants.iter().cloned());
    Ok(out)
}

/// The urgency encoding of a theory, compiled once for repeated queries.
pub struct Urgency {
    atoms: Vec<EventId>,
    compiled: Compiled,
    /// Per base atom, the index of its `!`, `U` and `R` atoms in the encoding.
    slots: Vec<[Option<usize>; 3]>,
}

impl Urgency {
    pub fn new(theory: &HornTheory) -> Result<Self, Error> {
        let compiled = encode_u(theory)?.compile();
        let atoms: Vec<EventId> = theory.atoms.iter().cloned().collect();
        let slots = atoms
            .iter()
            .map(|a| [Tag::Bang, Tag::Urgent, Tag::Reach].map(|t| compiled.id(&tagged(t, a)).ok()))
            .collect();
        Ok(Urgency {
            atoms,
            compiled,
            slots,
        })
    }

    fn base(&self, e: &EventId) -> Result<usize, Error> {
        self.atoms
            .binary_search(e)
            .map_err(|_| Error::UnknownEvent(e.clone()))
    }

    /// `U_Δ(X)`: the `U`-tagged atoms provable from the encoding plus `!x`
    /// for every `x ∈ X`, minus `X`.
    pub fn urgent(&self, past: &EventSet) -> Result<EventSet, Error> {
        let mut with_facts = self.compiled.clone();
        let mut inside = vec![false; self.atoms.len()];
        for x in past {
            let i = self.base(x)?;
            inside[i] = true;
            if let Some(bang) = self.slots[i][0] {
                with_facts.add_fact(bang);
            }
        }
        let provable = with_facts.provable();
        Ok(self.project(&provable, 1, &inside))
    }

    /// Atoms whose `R`-tagged atom is provable from the encoding.
    pub fn reach(&self) -> EventSet {
        self.project(&self.compiled.provable(), 2, &vec![false; self.atoms.len()])
    }

    fn project(&self, provable: &Bits, slot: usize, skip: &[bool]) -> EventSet {
        self.atoms
            .iter()
            .zip(&self.slots)
            .zip(skip)
            .filter(|((_, s), &skip)| !skip && s[slot].is_some_and(|i| provable.contains(i)))
            .map(|((a, _), _)| a.clone())
            .collect()
    }
}

/// `U_Δ(X)`: atoms that may come next in a proof trace of `Δ, X` right after
/// a linearization of `X`.
///
/// Computed by proving `U`-tagged atoms in the encoding with `!x` facts for
/// every `x ∈ X`.
pub fn urgent_atoms(theory: &HornTheory, past: &EventSet) -> Result<EventSet, Error> {
    if let Some(x) = past.iter().find(|x| !theory.atoms.contains(*x)) {
        return Err(Error::UnknownEvent(x.clone()));
    }
    Urgency::new(theory)?.urgent(past)
}

/// Atoms occurring in some proof trace, via the `R`-tagged atoms of the encoding.
pub fn reach_atoms(theory: &HornTheory) -> Result<EventSet, Error> {
    Ok(Urgency::new(theory)?.reach())
}

/// Every atom of `seq` is urgent after the set of its predecessors.
pub fn is_urgent_sequence(theory: &HornTheory, seq: &[EventId]) -> bool {
    let compiled = theory.compile();
    let mut past = compiled.empty();
    for e in seq {
        let Ok(i) = compiled.id(e) else {
            return false;
        };
        if !compiled.prudent(&past).contains(i) {
            return false;
        }
        past.insert(i);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::event_set;

    fn traces(list: &[&str]) -> Vec<Trace> {
        let mut v: Vec<Trace> = list.iter().map(|s| Trace::chars(s)).collect();
        v.sort();
        v
    }

    pub(crate) fn delta1() -> HornTheory {
        HornTheory::new([Clause::standard(["a"], "b"), Clause::fact("a")])
    }
    pub(crate) fn delta2() -> HornTheory {
        HornTheory::new([Clause::standard(["a"], "b"), Clause::standard(["b"], "a")])
    }
    pub(crate) fn delta3() -> HornTheory {
        HornTheory::new([Clause::standard(["a"], "b"), Clause::circular(["b"], "a")])
    }
    pub(crate) fn delta4() -> HornTheory {
        HornTheory::new([Clause::circular(["a"], "b"), Clause::circular(["b"], "a")])
    }

    #[test]
    fn interleave_worked_example() {
        let got = interleave(&Trace::chars("aba"), &Trace::chars("ca"));
        assert_eq!(got, traces(&["abc", "acb", "cab"]).into_iter().collect());
        assert_eq!(got, interleave(&Trace::chars("ab"), &Trace::chars("ca")));
    }

    #[test]
    fn interleave_identity_and_collapse() {
        let s = Trace::chars("abc");
        assert_eq!(interleave(&s, &Trace::default()), [s.clone()].into());
        assert_eq!(interleave(&Trace::default(), &s), [s].into());
        // all six raw interleavings of ab with ab: abab aabb aabb abab aabb abab
        // -> ab after right-deduplication
        assert_eq!(
            interleave(&Trace::chars("ab"), &Trace::chars("ab")),
            [Trace::chars("ab")].into()
        );
    }

    #[test]
    fn shortlex_order() {
        let mut v = traces(&["ba", "", "b", "ab", "a"]);
        v.sort();
        let shown: Vec<String> = v.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["(empty)", "a", "b", "a b", "b a"]);
    }

    #[test]
    fn proof_trace_fixtures() {
        assert_eq!(proof_traces(&delta1(), None), traces(&["", "a", "ab"]));
        assert_eq!(proof_traces(&delta2(), None), traces(&[""]));
        assert_eq!(proof_traces(&delta3(), None), traces(&["", "ab"]));
        assert_eq!(proof_traces(&delta4(), None), traces(&["", "ab", "ba"]));
        assert_eq!(proof_traces(&delta4(), Some(2)), traces(&["", "ab"]));
        assert_eq!(proof_traces(&HornTheory::default(), None), traces(&[""]));
    }

    #[test]
    fn membership() {
        assert!(is_proof_trace(&delta3(), &Trace::chars("ab")));
        assert!(!is_proof_trace(&delta3(), &Trace::chars("ba")));
        assert!(!is_proof_trace(&delta3(), &Trace::chars("a")));
        assert!(is_proof_trace(&delta2(), &Trace::default()));
        assert!(!is_proof_trace(&delta1(), &Trace::chars("aa")));
        assert!(!is_proof_trace(&delta1(), &Trace::chars("z")));
    }

    #[test]
    fn provable_fixtures() {
        assert_eq!(provable_atoms(&delta1()), event_set(["a", "b"]));
        assert!(provable_atoms(&delta2()).is_empty());
        assert_eq!(provable_atoms(&delta3()), event_set(["a", "b"]));
        assert_eq!(provable_atoms(&delta4()), event_set(["a", "b"]));
        assert!(provable_atoms(&HornTheory::default()).is_empty());
    }

    #[test]
    fn encoding_of_delta3() {
        let enc = encode_u(&delta3()).unwrap();
        let t = |s: &str| EventId::new(s);
        let expected: BTreeSet<Clause> = [
            Clause::new(ClauseKind::Standard, [t("!a")].into(), t("U$b")),
            Clause::new(ClauseKind::Standard, [t("R$a")].into(), t("R$b")),
            Clause::new(ClauseKind::Circular, [t("R$b")].into(), t("U$a")),
            Clause::new(ClauseKind::Standard, [t("!a")].into(), t("U$a")),
            Clause::new(ClauseKind::Standard, [t("!b")].into(), t("U$b")),
            Clause::new(ClauseKind::Standard, [t("U$a")].into(), t("R$a")),
            Clause::new(ClauseKind::Standard, [t("U$b")].into(), t("R$b")),
        ]
        .into();
        assert_eq!(enc.clauses, expected);

        let provable = provable_atoms(&enc);
        assert!(provable.contains(&t("U$a")));
        assert!(!provable.contains(&t("U$b")));
        let with_a = provable_atoms(&enc.with_fact(&t("!a")));
        assert!(with_a.contains(&t("U$b")));
    }

    #[test]
    fn encoding_edge_cases() {
        assert_eq!(
            encode_u(&HornTheory::default()).unwrap(),
            HornTheory::default()
        );
        let fact = encode_u(&HornTheory::new([Clause::fact("a")])).unwrap();
        let provable = provable_atoms(&fact);
        assert!(provable.contains(&EventId::new("U$a")));
        assert!(provable.contains(&EventId::new("R$a")));
        assert!(fact.clauses.contains(&Clause::new(
            ClauseKind::Standard,
            EventSet::new(),
            EventId::new("U$a")
        )));

        let bad = HornTheory::new([Clause::fact("R$a")]);
        assert!(matches!(encode_u(&bad), Err(Error::ReservedAtom(_))));
    }

    #[test]
    fn urgent_fixtures() {
        let u = |th: &HornTheory, x: &[&str]| urgent_atoms(th, &event_set(x)).unwrap();
        assert_eq!(u(&delta1(), &[]), event_set(["a"]));
        assert_eq!(u(&delta1(), &["a"]), event_set(["b"]));
        assert_eq!(u(&delta1(), &["b"]), event_set(["a"]));
        assert!(u(&delta1(), &["a", "b"]).is_empty());
        assert_eq!(u(&delta3(), &[]), event_set(["a"]));
        assert_eq!(u(&delta3(), &["a"]), event_set(["b"]));
        assert!(matches!(
            urgent_atoms(&delta1(), &event_set(["z"])),
            Err(Error::UnknownEvent(_))
        ));
    }

    #[test]
    fn reach_fixtures() {
        assert_eq!(reach_atoms(&delta3()).unwrap(), event_set(["a", "b"]));
        assert!(reach_atoms(&delta2()).unwrap().is_empty());
    }

    #[test]
    fn tagged_atoms_round_trip() {
        let a = EventId::new("a");
        for tag in [Tag::Bang, Tag::Reach, Tag::Urgent] {
            let t = TaggedAtom::new(tag, &a);
            assert_eq!(TaggedAtom::parse(&t.to_event()), Some(t));
        }
        assert_eq!(TaggedAtom::parse(&a), None);
    }

    #[test]
    fn urgent_sequences() {
        assert!(is_urgent_sequence(&delta3(), &[EventId::new("a")]));
        assert!(!is_urgent_sequence(&delta3(), &[EventId::new("b")]));
    }
}
