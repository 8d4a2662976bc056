//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here shares code with [`crate::index`]: clauses are re-indexed
//! locally and every definition is applied as literally as practical.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::Error;
use crate::logic::{HornTheory, Trace};
use crate::model::{Clause, ClauseKind, ContractSpec, EventId, EventSet, ParticipantId, Play};

/// Largest theory accepted by [`traces_bruteforce`] and [`urgent_bruteforce`].
pub const TRACE_LIMIT: usize = 8;
/// Largest contract accepted by [`prudence_bruteforce`].
pub const PRUDENCE_LIMIT: usize = 6;

fn guard(limit: usize, actual: usize) -> Result<(), Error> {
    if actual > limit {
        Err(Error::SizeGuard { limit, actual })
    } else {
        Ok(())
    }
}

struct Local {
    atoms: Vec<EventId>,
    clauses: Vec<(ClauseKind, Vec<usize>, usize, Clause)>,
}

impl Local {
    fn new(atoms: &EventSet, clauses: &BTreeSet<Clause>) -> Self {
        let mut all = atoms.clone();
        all.extend(clauses.iter().flat_map(|c| c.atoms().cloned()));
        let atoms: Vec<EventId> = all.into_iter().collect();
        let pos = |e: &EventId| atoms.binary_search(e).expect("atom indexed");
        let clauses = clauses
            .iter()
            .map(|c| {
                (
                    c.kind,
                    c.body.iter().map(pos).collect(),
                    pos(&c.head),
                    c.clone(),
                )
            })
            .collect();
        Local { atoms, clauses }
    }

    fn of(theory: &HornTheory) -> Self {
        Local::new(&theory.atoms, &theory.clauses)
    }

    fn id(&self, e: &EventId) -> Option<usize> {
        self.atoms.binary_search(e).ok()
    }
}

// ---------------------------------------------------------------------------
// Natural deduction

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Id,
    AndI,
    AndE1,
    AndE2,
    ArrowE,
    CArrowE,
}

/// Formula proved at a node. Horn proofs only ever conclude atoms,
/// conjunctions of atoms, or clauses taken from the theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    Atom(EventId),
    Conj(Vec<EventId>),
    Clause(Clause),
}

impl Goal {
    fn of_body(body: &[EventId]) -> Goal {
        match body {
            [a] => Goal::Atom(a.clone()),
            _ => Goal::Conj(body.to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub goal: Goal,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
    pub assumptions: EventSet,
}

impl Derivation {
    /// Audits every node: the rule is instantiated correctly from its premises.
    pub fn check(&self, theory: &HornTheory) -> bool {
        self.check_node(theory) && self.premises.iter().all(|p| p.check(theory))
    }

    fn check_node(&self, theory: &HornTheory) -> bool {
        let same = |p: &Derivation| p.assumptions == self.assumptions;
        match (self.rule, &self.goal, self.premises.as_slice()) {
            (Rule::Id, Goal::Atom(a), []) => self.assumptions.contains(a),
            (Rule::Id, Goal::Clause(c), []) => theory.clauses.contains(c),
            (Rule::AndI, Goal::Conj(v), [l, r]) if v.len() >= 2 => {
                same(l)
                    && same(r)
                    && l.goal == Goal::Atom(v[0].clone())
                    && r.goal == Goal::of_body(&v[1..])
            }
            (Rule::AndE1, Goal::Atom(a), [p]) => {
                same(p) && matches!(&p.goal, Goal::Conj(v) if v.len() >= 2 && v[0] == *a)
            }
            (Rule::AndE2, goal, [p]) => {
                same(p)
                    && matches!(&p.goal, Goal::Conj(v) if v.len() >= 2 && Goal::of_body(&v[1..]) == *goal)
            }
            (Rule::ArrowE | Rule::CArrowE, Goal::Atom(a), [clause, rest @ ..]) => {
                let kind = if self.rule == Rule::ArrowE {
                    ClauseKind::Standard
                } else {
                    ClauseKind::Circular
                };
                let Goal::Clause(c) = &clause.goal else {
                    return false;
                };
                if c.kind != kind || c.head != *a || !same(clause) {
                    return false;
                }
                let body: Vec<EventId> = c.body.iter().cloned().collect();
                let mut under = self.assumptions.clone();
                if kind == ClauseKind::Circular {
                    under.insert(a.clone());
                }
                match rest {
                    [] => body.is_empty(),
                    [p] => {
                        !body.is_empty() && p.goal == Goal::of_body(&body) && p.assumptions == under
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }
}

#[derive(Clone, Copy)]
enum Why {
    Assumed,
    Clause(usize),
}

struct NdSearch<'a> {
    local: &'a Local,
    memo: HashMap<FixedBitSet, Vec<Option<Why>>>,
}

impl NdSearch<'_> {
    /// Least set derivable under `s`, each atom with the first rule that added it.
    fn closure(&mut self, s: &FixedBitSet) -> Vec<Option<Why>> {
        if let Some(hit) = self.memo.get(s) {
            return hit.clone();
        }
        let n = self.local.atoms.len();
        let mut why: Vec<Option<Why>> = (0..n)
            .map(|i| s.contains(i).then_some(Why::Assumed))
            .collect();
        loop {
            let mut changed = false;
            for (k, (kind, body, head, _)) in self.local.clauses.iter().enumerate() {
                if why[*head].is_some() {
                    continue;
                }
                let fires = match kind {
                    ClauseKind::Standard => body.iter().all(|&b| why[b].is_some()),
                    ClauseKind::Circular => {
                        let mut bigger = s.clone();
                        bigger.insert(*head);
                        let inner = self.closure(&bigger);
                        body.iter().all(|&b| inner[b].is_some())
                    }
                };
                if fires {
                    why[*head] = Some(Why::Clause(k));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.memo.insert(s.clone(), why.clone());
        why
    }

    fn build(&mut self, s: &FixedBitSet, atom: usize) -> Derivation {
        let why = self.closure(s);
        let assumptions: EventSet = s.ones().map(|i| self.local.atoms[i].clone()).collect();
        let goal = Goal::Atom(self.local.atoms[atom].clone());
        match why[atom].expect("atom derivable") {
            Why::Assumed => Derivation {
                goal,
                rule: Rule::Id,
                premises: vec![],
                assumptions,
            },
            Why::Clause(k) => {
                let (kind, body, head, clause) = &self.local.clauses[k];
                let mut under = s.clone();
                let rule = match kind {
                    ClauseKind::Standard => Rule::ArrowE,
                    ClauseKind::Circular => {
                        under.insert(*head);
                        Rule::CArrowE
                    }
                };
                let mut premises = vec![Derivation {
                    goal: Goal::Clause(clause.clone()),
                    rule: Rule::Id,
                    premises: vec![],
                    assumptions: assumptions.clone(),
                }];
                if !body.is_empty() {
                    let body = body.clone();
                    premises.push(self.build_conj(&under, &body));
                }
                Derivation {
                    goal,
                    rule,
                    premises,
                    assumptions,
                }
            }
        }
    }

    fn build_conj(&mut self, s: &FixedBitSet, atoms: &[usize]) -> Derivation {
        if let [a] = atoms {
            return self.build(s, *a);
        }
        let names: Vec<EventId> = atoms.iter().map(|&i| self.local.atoms[i].clone()).collect();
        let left = self.build(s, atoms[0]);
        let right = self.build_conj(s, &atoms[1..]);
        Derivation {
            goal: Goal::Conj(names),
            rule: Rule::AndI,
            assumptions: left.assumptions.clone(),
            premises: vec![left, right],
        }
    }
}

/// Decides `Δ, assumptions ⊢ atom` by memoized natural-deduction search and
/// returns a derivation when one exists.
///
/// An atom is derivable when assumed, when some `α → a` has all of `α`
/// derivable, or when some `α ↠ a` has all of `α` derivable with `a` added to
/// the assumptions.
pub fn nd_provable(
    theory: &HornTheory,
    atom: &EventId,
    assumptions: &EventSet,
) -> (bool, Option<Derivation>) {
    let mut atoms = theory.atoms.clone();
    atoms.insert(atom.clone());
    atoms.extend(assumptions.iter().cloned());
    let local = Local::new(&atoms, &theory.clauses);
    let mut s = FixedBitSet::with_capacity(local.atoms.len());
    for a in assumptions {
        s.insert(local.id(a).expect("assumption indexed"));
    }
    let target = local.id(atom).expect("goal indexed");
    let mut search = NdSearch {
        local: &local,
        memo: HashMap::new(),
    };
    if search.closure(&s)[target].is_some() {
        let d = search.build(&s, target);
        (true, Some(d))
    } else {
        (false, None)
    }
}

/// `{a : Δ ⊢ a}` by natural-deduction search on every atom.
pub fn nd_provable_atoms(theory: &HornTheory) -> EventSet {
    let local = Local::of(theory);
    let mut search = NdSearch {
        local: &local,
        memo: HashMap::new(),
    };
    let why = search.closure(&FixedBitSet::with_capacity(local.atoms.len()));
    local
        .atoms
        .iter()
        .zip(why)
        .filter(|(_, w)| w.is_some())
        .map(|(a, _)| a.clone())
        .collect()
}

// ---------------------------------------------------------------------------
// Proof traces by saturation

type Seq = Vec<u8>;

fn mask(seq: &[u8]) -> u64 {
    seq.iter().fold(0, |m, &i| m | 1 << i)
}

/// Duplicate-free sequence of at most [`TRACE_LIMIT`] atom indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Packed {
    len: u8,
    items: [u8; TRACE_LIMIT],
}

impl Packed {
    const EMPTY: Packed = Packed {
        len: 0,
        items: [0; TRACE_LIMIT],
    };

    fn as_slice(&self) -> &[u8] {
        &self.items[..self.len as usize]
    }

    fn mask(&self) -> u64 {
        mask(self.as_slice())
    }

    /// Appends `a` unless already present.
    fn push(mut self, a: u8) -> Packed {
        if self.mask() & 1 << a == 0 {
            self.items[self.len as usize] = a;
            self.len += 1;
        }
        self
    }

    /// `σ | a`: `a` inserted at every position, repeats dropped from the right.
    fn interleave(self, a: u8) -> impl Iterator<Item = Packed> {
        (0..=self.len as usize).map(move |pos| {
            let mut out = Packed::EMPTY;
            for (i, &x) in self.as_slice().iter().enumerate() {
                if i == pos {
                    out = out.push(a);
                }
                out = out.push(x);
            }
            out.push(a)
        })
    }
}

/// Memoized trace sets of `Δ` extended by fact sets.
struct Saturation<'a> {
    local: &'a Local,
    /// Indexed by fact set.
    memo: Vec<Option<BTreeSet<Packed>>>,
}

impl<'a> Saturation<'a> {
    fn new(local: &'a Local) -> Self {
        Saturation {
            local,
            memo: vec![None; 1 << local.atoms.len()],
        }
    }

    /// Traces of `Δ` extended with every atom of `facts` as a fact.
    ///
    /// Rule (↠) for a head outside `facts` reads the traces of the larger
    /// theory; for a head already a fact it reads the set being built.
    fn traces(&mut self, facts: u64) -> &BTreeSet<Packed> {
        let slot = facts as usize;
        if self.memo[slot].is_none() {
            let set = self.saturate(facts);
            self.memo[slot] = Some(set);
        }
        self.memo[slot].as_ref().expect("just filled")
    }

    fn saturate(&mut self, facts: u64) -> BTreeSet<Packed> {
        let n = self.local.atoms.len();
        let rules: Vec<(ClauseKind, u64, u8)> = self
            .local
            .clauses
            .iter()
            .map(|(k, b, h, _)| (*k, b.iter().fold(0, |m, &i| m | 1 << i), *h as u8))
            .chain(
                (0..n as u8)
                    .filter(|i| facts & 1 << i != 0)
                    .map(|i| (ClauseKind::Standard, 0, i)),
            )
            .collect();

        let mut set: BTreeSet<Packed> = BTreeSet::new();
        let mut queue: Vec<Packed> = vec![Packed::EMPTY];
        for &(kind, body, head) in &rules {
            if kind == ClauseKind::Circular && facts & 1 << head == 0 {
                for sigma in self.traces(facts | 1 << head) {
                    if body & !sigma.mask() == 0 {
                        queue.extend(sigma.interleave(head));
                    }
                }
            }
        }
        while let Some(sigma) = queue.pop() {
            if !set.insert(sigma) {
                continue;
            }
            let m = sigma.mask();
            // heads fired by (→), and by (↠) reading the set being built
            let (mut forward, mut circular) = (0u64, 0u64);
            for &(kind, body, head) in &rules {
                if body & !m == 0 {
                    match kind {
                        ClauseKind::Standard => forward |= 1 << head,
                        ClauseKind::Circular if facts & 1 << head != 0 => circular |= 1 << head,
                        ClauseKind::Circular => {}
                    }
                }
            }
            for head in 0..n as u8 {
                if forward & !m & 1 << head != 0 {
                    queue.push(sigma.push(head));
                }
                if circular & 1 << head != 0 {
                    queue.extend(sigma.interleave(head).filter(|t| !set.contains(t)));
                }
            }
        }
        set
    }
}

fn to_trace(local: &Local, seq: &[u8]) -> Trace {
    Trace::new(
        seq.iter()
            .map(|&i| local.atoms[i as usize].clone())
            .collect(),
    )
}

/// `[[Δ]]` by applying the three trace rules until nothing new appears.
pub fn traces_bruteforce(theory: &HornTheory) -> Result<BTreeSet<Trace>, Error> {
    let local = Local::of(theory);
    guard(TRACE_LIMIT, local.atoms.len())?;
    let mut sat = Saturation::new(&local);
    Ok(sat
        .traces(0)
        .iter()
        .map(|s| to_trace(&local, s.as_slice()))
        .collect())
}

fn urgent_from(sat: &mut Saturation, x: u64) -> EventSet {
    let k = x.count_ones() as usize;
    let local = sat.local;
    sat.traces(x)
        .iter()
        .map(Packed::as_slice)
        .filter(|s| s.len() > k && mask(&s[..k]) == x)
        .map(|s| local.atoms[s[k] as usize].clone())
        .collect()
}

/// `U_Δ(X)` read off its definition: atoms `a ∉ X` such that some trace of
/// `Δ, X` starts with a linearization of `X` immediately followed by `a`.
pub fn urgent_bruteforce(theory: &HornTheory, past: &EventSet) -> Result<EventSet, Error> {
    let local = Local::of(theory);
    guard(TRACE_LIMIT, local.atoms.len())?;
    let mut x = 0u64;
    for e in past {
        let i = local.id(e).ok_or_else(|| Error::UnknownEvent(e.clone()))?;
        x |= 1 << i;
    }
    Ok(urgent_from(&mut Saturation::new(&local), x))
}

/// [`urgent_bruteforce`] for every subset of the atoms, sharing one saturation.
pub fn urgent_bruteforce_table(theory: &HornTheory) -> Result<Vec<(EventSet, EventSet)>, Error> {
    let local = Local::of(theory);
    guard(TRACE_LIMIT, local.atoms.len())?;
    let mut sat = Saturation::new(&local);
    Ok((0..1u64 << local.atoms.len())
        .map(|x| {
            let past = (0..local.atoms.len())
                .filter(|i| x & 1 << i != 0)
                .map(|i| local.atoms[i].clone())
                .collect();
            (past, urgent_from(&mut sat, x))
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Prudence on the play tree

struct Tree {
    seqs: Vec<Seq>,
    masks: Vec<u64>,
    children: Vec<Vec<(u8, usize)>>,
    credits: Vec<u64>,
}

impl Tree {
    fn build(local: &Local, conflicts: &[u64]) -> Tree {
        let n = local.atoms.len();
        let mut tree = Tree {
            seqs: vec![Seq::new()],
            masks: vec![0],
            children: vec![Vec::new()],
            credits: Vec::new(),
        };
        let mut i = 0;
        while i < tree.seqs.len() {
            let m = tree.masks[i];
            for e in 0..n as u8 {
                if m & 1 << e != 0 || conflicts[e as usize] & m != 0 {
                    continue;
                }
                let mut s = tree.seqs[i].clone();
                s.push(e);
                tree.children[i].push((e, tree.seqs.len()));
                tree.seqs.push(s);
                tree.masks.push(m | 1 << e);
                tree.children.push(Vec::new());
            }
            i += 1;
        }
        tree.credits = tree.seqs.iter().map(|s| credit_mask(local, s)).collect();
        tree
    }
}

/// Events of `seq` fired neither after a standard enabling set nor inside a
/// circular enabling set of the whole sequence.
fn credit_mask(local: &Local, seq: &[u8]) -> u64 {
    let whole = mask(seq);
    let mut past = 0u64;
    let mut credit = 0u64;
    for &e in seq {
        let justified = local.clauses.iter().any(|(kind, body, head, _)| {
            *head == e as usize
                && match kind {
                    ClauseKind::Standard => body.iter().all(|&b| past & 1 << b != 0),
                    ClauseKind::Circular => body.iter().all(|&b| whole & 1 << b != 0),
                }
        });
        if !justified {
            credit |= 1 << e;
        }
        past |= 1 << e;
    }
    credit
}

/// Prudent events at every play of a small contract.
///
/// Starts with every valid move tentatively prudent and repeatedly keeps an
/// event only if its owner can guarantee, against arbitrary moves of the
/// others, that every fair completion either reaches a point with no credit
/// of its own beyond those it already had, or ends with another participant
/// still holding a prudent move. Stops when nothing changes.
pub fn prudence_table(spec: &ContractSpec) -> Result<Vec<(Play, EventSet)>, Error> {
    let local = Local::new(&spec.events, &spec.clauses);
    let n = local.atoms.len();
    guard(PRUDENCE_LIMIT, n)?;

    let mut conflicts = vec![0u64; n];
    for (a, b) in &spec.conflicts {
        let (a, b) = (
            local.id(a).ok_or_else(|| Error::UnknownEvent(a.clone()))?,
            local.id(b).ok_or_else(|| Error::UnknownEvent(b.clone()))?,
        );
        conflicts[a] |= 1 << b;
        conflicts[b] |= 1 << a;
    }
    // unowned events are grouped under one anonymous participant
    let mut parties: BTreeMap<Option<&ParticipantId>, u64> = BTreeMap::new();
    for (i, e) in local.atoms.iter().enumerate() {
        *parties.entry(spec.owner.get(e)).or_default() |= 1 << i;
    }
    let parties: Vec<u64> = parties.into_values().collect();

    let tree = Tree::build(&local, &conflicts);
    let nodes = tree.seqs.len();
    let valid = |node: usize| {
        tree.children[node]
            .iter()
            .fold(0u64, |m, &(e, _)| m | 1 << e)
    };
    let mut prudent: Vec<u64> = (0..nodes).map(valid).collect();

    let mut memo = Memo {
        stamp: vec![0; nodes],
        value: vec![false; nodes],
        round: 0,
    };
    loop {
        let mut next = vec![0u64; nodes];
        for root in 0..nodes {
            for &own in &parties {
                if valid(root) & own == 0 {
                    continue;
                }
                let game = OwnerGame {
                    tree: &tree,
                    prudent: &prudent,
                    own,
                    before: tree.credits[root] & own,
                };
                memo.round += 1;
                let others_ok = tree.children[root]
                    .iter()
                    .filter(|(e, _)| own & 1 << e == 0)
                    .all(|&(_, c)| game.safe(c, &mut memo));
                if !others_ok {
                    continue;
                }
                for &(e, c) in &tree.children[root] {
                    if own & 1 << e != 0 && game.safe(c, &mut memo) {
                        next[root] |= 1 << e;
                    }
                }
            }
        }
        if next == prudent {
            break;
        }
        prudent = next;
    }

    let mut rows = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let seq: Vec<EventId> = tree.seqs[node]
            .iter()
            .map(|&i| local.atoms[i as usize].clone())
            .collect();
        let set: EventSet = (0..n)
            .filter(|i| prudent[node] & 1 << i != 0)
            .map(|i| local.atoms[i].clone())
            .collect();
        rows.push((Play::new(spec, seq)?, set));
    }
    Ok(rows)
}

/// Per-root memo of [`OwnerGame::value`]; bumping `round` invalidates it.
struct Memo {
    stamp: Vec<u64>,
    value: Vec<bool>,
    round: u64,
}

struct OwnerGame<'a> {
    tree: &'a Tree,
    prudent: &'a [u64],
    own: u64,
    before: u64,
}

impl OwnerGame<'_> {
    /// No credit of the owner beyond those present at the root.
    fn good(&self, node: usize) -> bool {
        self.tree.credits[node] & self.own & !self.before == 0
    }

    fn safe(&self, node: usize, memo: &mut Memo) -> bool {
        self.good(node) || self.value(node, memo)
    }

    /// Owner wins from `node` while its fresh credits are still open.
    fn value(&self, node: usize, memo: &mut Memo) -> bool {
        if memo.stamp[node] == memo.round {
            return memo.value[node];
        }
        let children = &self.tree.children[node];
        let v = children
            .iter()
            .filter(|(e, _)| self.own & 1 << e == 0)
            .all(|&(_, c)| self.safe(c, memo))
            && (self.culprit(node)
                || children
                    .iter()
                    .filter(|(e, _)| self.own & 1 << e != 0)
                    .any(|&(_, c)| self.safe(c, memo)));
        memo.stamp[node] = memo.round;
        memo.value[node] = v;
        v
    }

    /// Some other participant still has a prudent move here.
    fn culprit(&self, node: usize) -> bool {
        self.prudent[node] & !self.own != 0
    }
}

/// Prudent events after `past`, by the play-tree fixpoint of [`prudence_table`].
pub fn prudence_bruteforce(spec: &ContractSpec, past: &Play) -> Result<EventSet, Error> {
    let rows = prudence_table(spec)?;
    rows.into_iter()
        .find(|(p, _)| p.events() == past.events())
        .map(|(_, s)| s)
        .ok_or_else(|| {
            let (prefix, event) = match past.events().split_last() {
                Some((last, rest)) => (rest.to_vec(), last.clone()),
                None => (Vec::new(), EventId::new("")),
            };
            Error::InvalidPlay {
                prefix,
                event,
                reason: "not a play of the contract",
            }
        })
}

/// Instance families for the equivalence suites.
pub mod families {
    use std::collections::{BTreeMap, BTreeSet};

    use rand::Rng;

    use crate::logic::HornTheory;
    use crate::model::{
        Clause, ClauseKind, ContractSpec, EventId, EventSet, ParticipantId, Payoff,
    };

    pub const THREE_ATOMS: [&str; 3] = ["a", "b", "c"];

    fn antichains(pool: &[EventSet]) -> Vec<Vec<EventSet>> {
        let mut out = Vec::new();
        for pick in 0u32..1 << pool.len() {
            let chosen: Vec<&EventSet> = (0..pool.len())
                .filter(|i| pick & 1 << i != 0)
                .map(|i| &pool[i])
                .collect();
            let free = chosen.iter().all(|x| {
                chosen
                    .iter()
                    .all(|y| std::ptr::eq(*x, *y) || !x.is_subset(y))
            });
            if free {
                out.push(chosen.into_iter().cloned().collect());
            }
        }
        out
    }

    fn bodies(atoms: &[&str], max: usize) -> Vec<EventSet> {
        let mut out = Vec::new();
        for pick in 0u32..1 << atoms.len() {
            if pick.count_ones() as usize <= max {
                out.push(
                    (0..atoms.len())
                        .filter(|i| pick & 1 << i != 0)
                        .map(|i| EventId::new(atoms[i]))
                        .collect(),
                );
            }
        }
        out
    }

    /// Every Horn theory over `a b c` with bodies of at most two atoms, up to
    /// clauses that cannot change any answer.
    ///
    /// For each head and kind the bodies form an antichain, since a clause
    /// whose body includes the body of another clause with the same head and
    /// kind is subsumed. Standard clauses never have their head in the body,
    /// as such a clause can never fire. Circular clauses may, e.g. `a <<- a`.
    pub struct ThreeAtomFamily {
        choices: Vec<Vec<Vec<Clause>>>,
        next: usize,
        total: usize,
    }

    impl ThreeAtomFamily {
        pub fn new() -> Self {
            let mut choices = Vec::new();
            for head in THREE_ATOMS {
                let others: Vec<&str> =
                    THREE_ATOMS.iter().copied().filter(|a| *a != head).collect();
                for (kind, pool) in [
                    (ClauseKind::Standard, bodies(&others, 2)),
                    (ClauseKind::Circular, bodies(&THREE_ATOMS, 2)),
                ] {
                    choices.push(
                        antichains(&pool)
                            .into_iter()
                            .map(|bs| {
                                bs.into_iter()
                                    .map(|b| Clause::new(kind, b, EventId::new(head)))
                                    .collect()
                            })
                            .collect(),
                    );
                }
            }
            let total = choices.iter().map(Vec::len).product();
            ThreeAtomFamily {
                choices,
                next: 0,
                total,
            }
        }

        pub fn total(&self) -> usize {
            self.total
        }

        /// The `index`-th theory of the enumeration.
        pub fn get(&self, mut index: usize) -> HornTheory {
            let mut clauses = BTreeSet::new();
            for slot in &self.choices {
                clauses.extend(slot[index % slot.len()].iter().cloned());
                index /= slot.len();
            }
            HornTheory {
                atoms: THREE_ATOMS.iter().map(|a| EventId::new(*a)).collect(),
                clauses,
            }
        }
    }

    impl Default for ThreeAtomFamily {
        fn default() -> Self {
            Self::new()
        }
    }

    impl Iterator for ThreeAtomFamily {
        type Item = HornTheory;

        fn next(&mut self) -> Option<HornTheory> {
            (self.next < self.total).then(|| {
                self.next += 1;
                self.get(self.next - 1)
            })
        }
    }

    /// `theory` with every atom renamed through `map`; atoms missing from
    /// `map` keep their name.
    pub fn renamed(theory: &HornTheory, map: &BTreeMap<EventId, EventId>) -> HornTheory {
        let r = |e: &EventId| map.get(e).cloned().unwrap_or_else(|| e.clone());
        HornTheory {
            atoms: theory.atoms.iter().map(r).collect(),
            clauses: theory
                .clauses
                .iter()
                .map(|c| Clause::new(c.kind, c.body.iter().map(r).collect(), r(&c.head)))
                .collect(),
        }
    }

    pub fn rename_set(set: &EventSet, map: &BTreeMap<EventId, EventId>) -> EventSet {
        set.iter()
            .map(|e| map.get(e).cloned().unwrap_or_else(|| e.clone()))
            .collect()
    }

    /// The six renamings of `a b c` onto itself.
    pub fn three_atom_renamings() -> Vec<BTreeMap<EventId, EventId>> {
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        perms
            .iter()
            .map(|p| {
                (0..3)
                    .map(|i| {
                        (
                            EventId::new(THREE_ATOMS[i]),
                            EventId::new(THREE_ATOMS[p[i]]),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Least renaming of `theory` (by clause set) and the map taking it back
    /// to `theory`.
    pub fn canonical(
        theory: &HornTheory,
        renamings: &[BTreeMap<EventId, EventId>],
    ) -> (HornTheory, BTreeMap<EventId, EventId>) {
        renamings
            .iter()
            .map(|m| {
                let back: BTreeMap<EventId, EventId> =
                    m.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
                (renamed(theory, m), back)
            })
            .min_by(|x, y| x.0.clauses.cmp(&y.0.clauses))
            .expect("at least one renaming")
    }

    /// A random well-formed contract over up to `max_events` events with up
    /// to three participants, conflicts and payoffs.
    pub fn random_spec(rng: &mut impl Rng, max_events: usize) -> ContractSpec {
        let n = rng.gen_range(0..=max_events);
        let names: Vec<EventId> = (0..n).map(|i| EventId::new(format!("e{i}"))).collect();
        let parties: Vec<ParticipantId> = (0..rng.gen_range(1..=3))
            .map(|i| ParticipantId::new(format!("P{i}")))
            .collect();
        let mut spec = ContractSpec::new();
        spec.participants.extend(parties.iter().cloned());
        for e in &names {
            spec.events.insert(e.clone());
            spec.owner
                .insert(e.clone(), parties[rng.gen_range(0..parties.len())].clone());
        }
        if n >= 2 {
            for _ in 0..rng.gen_range(0..=n / 2) {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if a != b {
                    spec.add_conflict(names[a].clone(), names[b].clone());
                }
            }
        }
        if n > 0 {
            for _ in 0..rng.gen_range(0..=2 * n) {
                let head = names[rng.gen_range(0..n)].clone();
                let kind = if rng.gen_bool(0.5) {
                    ClauseKind::Standard
                } else {
                    ClauseKind::Circular
                };
                let mut body = EventSet::new();
                for _ in 0..rng.gen_range(0..=3.min(n)) {
                    let e = names[rng.gen_range(0..n)].clone();
                    if body.iter().all(|b| !spec.in_conflict(b, &e)) {
                        body.insert(e);
                    }
                }
                spec.clauses.insert(Clause::new(kind, body, head));
            }
        }
        let pick = |rng: &mut dyn rand::RngCore| -> EventSet {
            names
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .cloned()
                .collect()
        };
        for p in &parties {
            match rng.gen_range(0..3) {
                0 => {}
                1 => {
                    let goal = pick(rng);
                    spec.payoffs.insert(p.clone(), Payoff::Goal(goal));
                }
                _ => {
                    let pairs = (0..rng.gen_range(1..=3))
                        .map(|_| (pick(rng), pick(rng)))
                        .collect();
                    spec.payoffs.insert(p.clone(), Payoff::OfferRequest(pairs));
                }
            }
        }
        spec
    }

    /// A random theory over `1..=max_atoms` atoms named `x0, x1, …`. Bodies
    /// have up to three atoms and may contain the head.
    pub fn random_theory(rng: &mut impl Rng, max_atoms: usize) -> HornTheory {
        let n = rng.gen_range(1..=max_atoms);
        let names: Vec<EventId> = (0..n).map(|i| EventId::new(format!("x{i}"))).collect();
        let count = rng.gen_range(0..=2 * n);
        let mut clauses = BTreeSet::new();
        for _ in 0..count {
            let head = names[rng.gen_range(0..n)].clone();
            let kind = if rng.gen_bool(0.5) {
                ClauseKind::Standard
            } else {
                ClauseKind::Circular
            };
            let size = rng.gen_range(0..=3.min(n));
            let body = (0..size)
                .map(|_| names[rng.gen_range(0..n)].clone())
                .collect();
            clauses.insert(Clause::new(kind, body, head));
        }
        HornTheory {
            atoms: names.into_iter().collect(),
            clauses,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{event_set, ContractSpec};

    fn delta3() -> HornTheory {
        HornTheory::new([Clause::standard(["a"], "b"), Clause::circular(["b"], "a")])
    }

    fn chars(list: &[&str]) -> BTreeSet<Trace> {
        list.iter().map(|s| Trace::chars(s)).collect()
    }

    #[test]
    fn nd_examples() {
        let a = EventId::new("a");
        let (ok, d) = nd_provable(&delta3(), &a, &EventSet::new());
        assert!(ok);
        let d = d.unwrap();
        assert!(d.check(&delta3()));
        assert_eq!(d.rule, Rule::CArrowE);
        assert_eq!(d.premises[1].rule, Rule::ArrowE);
        assert_eq!(d.premises[1].assumptions, event_set(["a"]));

        let delta2 = HornTheory::new([Clause::standard(["a"], "b"), Clause::standard(["b"], "a")]);
        assert_eq!(nd_provable(&delta2, &a, &EventSet::new()), (false, None));
        let (ok, d) = nd_provable(&delta2, &a, &event_set(["a"]));
        assert!(ok && d.unwrap().rule == Rule::Id);
    }

    #[test]
    fn derivation_audit_rejects_tampering() {
        let th = HornTheory::new([
            Clause::standard(["a", "b"], "c"),
            Clause::fact("a"),
            Clause::fact("b"),
        ]);
        let (_, d) = nd_provable(&th, &EventId::new("c"), &EventSet::new());
        let d = d.unwrap();
        assert!(d.check(&th));
        assert_eq!(d.premises[1].rule, Rule::AndI);

        let mut bad = d.clone();
        bad.rule = Rule::CArrowE;
        assert!(!bad.check(&th));
        let mut bad = d.clone();
        bad.premises[1].premises.swap(0, 1);
        assert!(!bad.check(&th));
        let mut bad = d;
        bad.premises[0].goal = Goal::Clause(Clause::standard(["a"], "c"));
        assert!(!bad.check(&th));
    }

    #[test]
    fn projections_audit() {
        let th = HornTheory::default();
        let conj = Derivation {
            goal: Goal::Conj(vec!["a".into(), "b".into()]),
            rule: Rule::AndI,
            assumptions: event_set(["a", "b"]),
            premises: vec![
                Derivation {
                    goal: Goal::Atom("a".into()),
                    rule: Rule::Id,
                    premises: vec![],
                    assumptions: event_set(["a", "b"]),
                },
                Derivation {
                    goal: Goal::Atom("b".into()),
                    rule: Rule::Id,
                    premises: vec![],
                    assumptions: event_set(["a", "b"]),
                },
            ],
        };
        let left = Derivation {
            goal: Goal::Atom("a".into()),
            rule: Rule::AndE1,
            assumptions: event_set(["a", "b"]),
            premises: vec![conj.clone()],
        };
        let right = Derivation {
            goal: Goal::Atom("b".into()),
            rule: Rule::AndE2,
            assumptions: event_set(["a", "b"]),
            premises: vec![conj],
        };
        assert!(left.check(&th));
        assert!(right.check(&th));
        let mut wrong = right;
        wrong.goal = Goal::Atom("a".into());
        assert!(!wrong.check(&th));
    }

    #[test]
    fn saturation_fixtures() {
        let d1 = HornTheory::new([Clause::standard(["a"], "b"), Clause::fact("a")]);
        let d2 = HornTheory::new([Clause::standard(["a"], "b"), Clause::standard(["b"], "a")]);
        let d4 = HornTheory::new([Clause::circular(["a"], "b"), Clause::circular(["b"], "a")]);
        assert_eq!(traces_bruteforce(&d1).unwrap(), chars(&["", "a", "ab"]));
        assert_eq!(traces_bruteforce(&d2).unwrap(), chars(&[""]));
        assert_eq!(traces_bruteforce(&delta3()).unwrap(), chars(&["", "ab"]));
        assert_eq!(traces_bruteforce(&d4).unwrap(), chars(&["", "ab", "ba"]));
    }

    #[test]
    fn saturation_guard() {
        let th = HornTheory::default().with_atoms((0..9).map(|i| format!("x{i}")));
        assert!(matches!(
            traces_bruteforce(&th),
            Err(Error::SizeGuard {
                limit: 8,
                actual: 9
            })
        ));
    }

    #[test]
    fn urgent_by_definition() {
        let d1 = HornTheory::new([Clause::standard(["a"], "b"), Clause::fact("a")]);
        let u = |x: &[&str]| urgent_bruteforce(&d1, &event_set(x)).unwrap();
        assert_eq!(u(&[]), event_set(["a"]));
        assert_eq!(u(&["a"]), event_set(["b"]));
        assert_eq!(u(&["b"]), event_set(["a"]));
        assert!(u(&["a", "b"]).is_empty());
    }

    fn owned(spec: ContractSpec) -> ContractSpec {
        spec.with_agent("A", ["a"]).with_agent("B", ["b", "c"])
    }

    fn e5() -> ContractSpec {
        owned(ContractSpec::new())
            .with_clause(Clause::standard(["a"], "b"))
            .with_clause(Clause::circular(["b"], "a"))
            .with_clause(Clause::standard(["a"], "c"))
            .with_clause(Clause::standard(["c"], "a"))
            .with_conflict("b", "c")
    }

    #[test]
    fn prudence_fixtures() {
        let spec = e5();
        let at = |names: &[&str]| {
            prudence_bruteforce(&spec, &Play::from_names(&spec, names).unwrap()).unwrap()
        };
        assert!(at(&[]).is_empty());
        assert_eq!(at(&["b"]), event_set(["a"]));
        assert_eq!(at(&["a"]), event_set(["b", "c"]));

        let e3 = owned(ContractSpec::new())
            .with_clause(Clause::standard(["a"], "b"))
            .with_clause(Clause::circular(["b"], "a"));
        assert_eq!(
            prudence_bruteforce(&e3, &Play::empty()).unwrap(),
            event_set(["a"])
        );
    }

    #[test]
    fn three_atom_family_size() {
        let family = families::ThreeAtomFamily::new();
        assert_eq!(family.total(), 1_481_544);
        assert!(family.get(0).clauses.is_empty());
        let last = family.get(family.total() - 1);
        assert!(last.clauses.iter().all(|c| c.body.len() <= 2));
    }

    #[test]
    fn prudence_guard() {
        let spec = (0..7).fold(ContractSpec::new(), |s, i| {
            s.with_agent("A", [format!("x{i}")])
        });
        assert!(matches!(
            prudence_table(&spec),
            Err(Error::SizeGuard { .. })
        ));
    }
}
