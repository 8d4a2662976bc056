//! Game semantics of contracts: credits, enabling, reachability and prudence
//! fixpoints, innocence, winning plays, agreement, strategy synthesis and
//! fair simulation.
//!
//! The fast path here assumes a conflict-free contract wherever prudence is
//! involved; contracts with conflicts are only served by
//! [`crate::oracle::prudence_bruteforce`].

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::index::{Bits, Compiled};
use crate::model::{ClauseKind, ContractSpec, EventId, EventSet, ParticipantId, Play, Strategy};

/// Credits per prefix of a play: `per_prefix[i]` is Γ(σ_i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CreditLedger {
    pub per_prefix: Vec<EventSet>,
    pub final_credits: EventSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParticipantVerdict {
    pub innocent: bool,
    pub credit_free: bool,
    /// `None` when the participant has no payoff.
    pub wins: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameVerdict {
    pub play: Play,
    pub participants: BTreeMap<ParticipantId, ParticipantVerdict>,
}

impl GameVerdict {
    pub fn everyone_wins(&self) -> bool {
        self.participants.values().all(|v| v.wins == Some(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementReport {
    pub agreement: bool,
    /// Atoms provable in the Horn theory of the contract.
    pub provable: EventSet,
    /// Participants whose payoff the provable set does not satisfy.
    pub failing: Vec<ParticipantId>,
}

/// A contract compiled for repeated queries.
#[derive(Clone, Debug)]
pub struct Game<'a> {
    spec: &'a ContractSpec,
    compiled: Arc<Compiled>,
}

impl<'a> Game<'a> {
    pub fn new(spec: &'a ContractSpec) -> Result<Self, Error> {
        Ok(Game {
            spec,
            compiled: Arc::new(Compiled::new(spec)?),
        })
    }

    pub fn spec(&self) -> &'a ContractSpec {
        self.spec
    }

    fn require_conflict_free(&self, operation: &'static str) -> Result<(), Error> {
        if self.compiled.has_conflicts() {
            Err(Error::Conflicted { operation })
        } else {
            Ok(())
        }
    }

    fn conflict_free_bits(&self, x: &EventSet) -> Result<Bits, Error> {
        let bits = self.compiled.bits(x)?;
        if !self.compiled.is_conflict_free(&bits) {
            return Err(Error::SetNotConflictFree(x.iter().cloned().collect()));
        }
        Ok(bits)
    }

    fn play_ids(&self, play: &Play) -> Result<Vec<usize>, Error> {
        // Re-checks the play against this spec; a Play may come from elsewhere.
        let mut checked = Play::empty();
        for e in play.events() {
            checked = checked.extended(self.spec, e.clone())?;
        }
        play.events().iter().map(|e| self.compiled.id(e)).collect()
    }

    fn check_participant(&self, participant: &ParticipantId) -> Result<(), Error> {
        if self.spec.participants.contains(participant) {
            Ok(())
        } else {
            Err(Error::UnknownParticipant(participant.clone()))
        }
    }

    fn owned_bits(&self, participant: &ParticipantId) -> Bits {
        let mut bits = self.compiled.empty();
        for e in self.spec.events_of(participant) {
            if let Ok(i) = self.compiled.id(&e) {
                bits.insert(i);
            }
        }
        bits
    }

    pub fn enables(&self, x: &EventSet, e: &EventId, kind: ClauseKind) -> Result<bool, Error> {
        let bits = self.conflict_free_bits(x)?;
        Ok(self.compiled.enables(&bits, self.compiled.id(e)?, kind))
    }

    pub fn credits(&self, play: &Play) -> Result<CreditLedger, Error> {
        let ids = self.play_ids(play)?;
        let per_prefix: Vec<EventSet> = self
            .compiled
            .credits(&ids)
            .iter()
            .map(|b| self.compiled.names_of(b))
            .collect();
        let final_credits = per_prefix.last().cloned().unwrap_or_default();
        Ok(CreditLedger {
            per_prefix,
            final_credits,
        })
    }

    /// Events reachable with past `x` while keeping every new credit honoured.
    pub fn reachable(&self, x: &EventSet) -> Result<EventSet, Error> {
        self.require_conflict_free("reachable")?;
        let bits = self.compiled.bits(x)?;
        Ok(self.compiled.names_of(&self.compiled.reachable(&bits)))
    }

    /// `PR(X)`: events standard-enabled by `x`, or circular-enabled by `x`
    /// together with everything reachable from it.
    pub fn prudent_events(&self, x: &EventSet) -> Result<EventSet, Error> {
        self.require_conflict_free("prudent_events")?;
        let bits = self.compiled.bits(x)?;
        Ok(self.compiled.names_of(&self.compiled.prudent(&bits)))
    }

    pub fn is_prudent_play(&self, play: &Play) -> Result<bool, Error> {
        self.require_conflict_free("is_prudent_play")?;
        let ids = self.play_ids(play)?;
        let mut past = self.compiled.empty();
        for e in ids {
            if !self.compiled.prudent(&past).contains(e) {
                return Ok(false);
            }
            past.insert(e);
        }
        Ok(true)
    }

    /// Atoms provable in the Horn theory of the contract.
    pub fn provable(&self) -> Result<EventSet, Error> {
        self.require_conflict_free("provable_atoms")?;
        Ok(self.compiled.names_of(&self.compiled.provable()))
    }

    pub fn innocent(&self, participant: &ParticipantId, play: &Play) -> Result<bool, Error> {
        self.require_conflict_free("innocent")?;
        self.check_participant(participant)?;
        let ids = self.play_ids(play)?;
        let past: Bits = ids.iter().copied().collect();
        let mut pr = self.compiled.prudent(&grow(past, self.compiled.len()));
        pr.intersect_with(&self.owned_bits(participant));
        Ok(pr.is_clear())
    }

    pub fn credit_free(&self, participant: &ParticipantId, play: &Play) -> Result<bool, Error> {
        self.check_participant(participant)?;
        let ids = self.play_ids(play)?;
        let mut credit = self.compiled.credits_of(&ids);
        credit.intersect_with(&self.owned_bits(participant));
        Ok(credit.is_clear())
    }

    pub fn wins(&self, participant: &ParticipantId, play: &Play) -> Result<bool, Error> {
        let payoff = self
            .spec
            .payoffs
            .get(participant)
            .ok_or_else(|| Error::MissingPayoff(participant.clone()))?;
        self.check_participant(participant)?;
        let innocence = self.innocence(play)?;
        let mine = innocence[participant];
        let all_innocent = innocence.values().all(|&i| i);
        let other_culpable = innocence.iter().any(|(p, &i)| p != participant && !i);
        Ok(
            (payoff.holds(&play.set()) && self.credit_free(participant, play)? && all_innocent)
                || (mine && other_culpable),
        )
    }

    fn innocence(&self, play: &Play) -> Result<BTreeMap<ParticipantId, bool>, Error> {
        self.spec
            .participants
            .iter()
            .map(|p| Ok((p.clone(), self.innocent(p, play)?)))
            .collect()
    }

    pub fn verdict(&self, play: &Play) -> Result<GameVerdict, Error> {
        let mut participants = BTreeMap::new();
        for p in &self.spec.participants {
            let wins = if self.spec.payoffs.contains_key(p) {
                Some(self.wins(p, play)?)
            } else {
                None
            };
            participants.insert(
                p.clone(),
                ParticipantVerdict {
                    innocent: self.innocent(p, play)?,
                    credit_free: self.credit_free(p, play)?,
                    wins,
                },
            );
        }
        Ok(GameVerdict {
            play: play.clone(),
            participants,
        })
    }

    pub fn agreement_report(&self) -> Result<AgreementReport, Error> {
        for p in &self.spec.participants {
            if !self.spec.payoffs.contains_key(p) {
                return Err(Error::MissingPayoff(p.clone()));
            }
        }
        self.agreement_by(|p, set| self.spec.payoffs[p].holds(set))
    }

    /// Agreement against arbitrary order-insensitive payoffs given as a callback.
    pub fn agreement_by<F>(&self, payoff: F) -> Result<AgreementReport, Error>
    where
        F: Fn(&ParticipantId, &EventSet) -> bool,
    {
        let provable = self.provable()?;
        let failing: Vec<ParticipantId> = self
            .spec
            .participants
            .iter()
            .filter(|p| !payoff(p, &provable))
            .cloned()
            .collect();
        Ok(AgreementReport {
            agreement: failing.is_empty(),
            provable,
            failing,
        })
    }

    /// The strategy offering, after σ, the participant's events that are
    /// urgent (equivalently prudent) after `[σ]`.
    pub fn synthesize_strategy(
        &self,
        participant: &ParticipantId,
    ) -> Result<SynthesizedStrategy<'a>, Error> {
        self.require_conflict_free("synthesize_strategy")?;
        self.check_participant(participant)?;
        Ok(SynthesizedStrategy {
            owned: self.owned_bits(participant),
            participant: participant.clone(),
            game: self.clone(),
        })
    }

    /// Runs the strategies to quiescence under a FIFO-fair scheduler.
    ///
    /// Among the offered events the one offered continuously for the longest
    /// time fires next; ties are broken by a ChaCha draw seeded with `seed`.
    pub fn simulate(&self, strategies: &[&dyn Strategy], seed: u64) -> Result<Simulation, Error> {
        let mut by_participant: BTreeMap<&ParticipantId, &dyn Strategy> = BTreeMap::new();
        for s in strategies {
            self.check_participant(s.participant())?;
            if by_participant.insert(s.participant(), *s).is_some() {
                return Err(Error::StrategyCount(s.participant().clone()));
            }
        }
        if let Some(p) = self
            .spec
            .participants
            .iter()
            .find(|p| !by_participant.contains_key(p))
        {
            return Err(Error::StrategyCount(p.clone()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut play = Play::empty();
        let mut offered_since: BTreeMap<EventId, usize> = BTreeMap::new();
        for step in 0.. {
            let mut offered = BTreeSet::new();
            for (participant, strategy) in &by_participant {
                for e in strategy.choose(&play) {
                    self.check_offer(participant, &play, &e)?;
                    offered.insert(e);
                }
            }
            offered_since.retain(|e, _| offered.contains(e));
            for e in &offered {
                offered_since.entry(e.clone()).or_insert(step);
            }
            let Some(&oldest) = offered_since.values().min() else {
                break;
            };
            let candidates: Vec<&EventId> = offered_since
                .iter()
                .filter(|(_, &since)| since == oldest)
                .map(|(e, _)| e)
                .collect();
            let pick = candidates[rng.gen_range(0..candidates.len())].clone();
            offered_since.remove(&pick);
            play = play.extended(self.spec, pick)?;
        }
        let verdict = self.verdict(&play)?;
        Ok(Simulation { play, verdict })
    }

    fn check_offer(
        &self,
        participant: &ParticipantId,
        play: &Play,
        e: &EventId,
    ) -> Result<(), Error> {
        let violation = |reason| Error::StrategyViolation {
            participant: participant.clone(),
            prefix: play.events().to_vec(),
            event: e.clone(),
            reason,
        };
        match self.spec.owner_of(e) {
            None => return Err(violation("unknown event")),
            Some(owner) if owner != participant => {
                return Err(violation("event belongs to another participant"))
            }
            Some(_) => {}
        }
        play.extended(self.spec, e.clone())
            .map(|_| ())
            .map_err(|err| match err {
                Error::InvalidPlay { reason, .. } => violation(reason),
                other => other,
            })
    }
}

fn grow(mut bits: Bits, len: usize) -> Bits {
    bits.grow(len);
    bits
}

#[derive(Clone, Debug)]
pub struct SynthesizedStrategy<'a> {
    game: Game<'a>,
    participant: ParticipantId,
    owned: Bits,
}

impl Strategy for SynthesizedStrategy<'_> {
    fn participant(&self) -> &ParticipantId {
        &self.participant
    }

    fn choose(&self, play: &Play) -> EventSet {
        let compiled = &self.game.compiled;
        let Ok(ids) = self.game.play_ids(play) else {
            return EventSet::new();
        };
        let past = grow(ids.into_iter().collect(), compiled.len());
        let mut pr = compiled.prudent(&past);
        pr.intersect_with(&self.owned);
        compiled.names_of(&pr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simulation {
    pub play: Play,
    pub verdict: GameVerdict,
}

pub fn enables(
    spec: &ContractSpec,
    x: &EventSet,
    e: &EventId,
    kind: ClauseKind,
) -> Result<bool, Error> {
    Game::new(spec)?.enables(x, e, kind)
}

pub fn credits(spec: &ContractSpec, play: &Play) -> Result<CreditLedger, Error> {
    Game::new(spec)?.credits(play)
}

pub fn reachable(spec: &ContractSpec, x: &EventSet) -> Result<EventSet, Error> {
    Game::new(spec)?.reachable(x)
}

pub fn prudent_events(spec: &ContractSpec, x: &EventSet) -> Result<EventSet, Error> {
    Game::new(spec)?.prudent_events(x)
}

pub fn is_prudent_play(spec: &ContractSpec, play: &Play) -> Result<bool, Error> {
    Game::new(spec)?.is_prudent_play(play)
}

pub fn innocent(
    spec: &ContractSpec,
    participant: &ParticipantId,
    play: &Play,
) -> Result<bool, Error> {
    Game::new(spec)?.innocent(participant, play)
}

pub fn credit_free(
    spec: &ContractSpec,
    participant: &ParticipantId,
    play: &Play,
) -> Result<bool, Error> {
    Game::new(spec)?.credit_free(participant, play)
}

pub fn wins(spec: &ContractSpec, participant: &ParticipantId, play: &Play) -> Result<bool, Error> {
    Game::new(spec)?.wins(participant, play)
}

pub fn verdict(spec: &ContractSpec, play: &Play) -> Result<GameVerdict, Error> {
    Game::new(spec)?.verdict(play)
}

pub fn agreement(spec: &ContractSpec) -> Result<bool, Error> {
    Ok(Game::new(spec)?.agreement_report()?.agreement)
}

pub fn synthesize_strategy<'a>(
    spec: &'a ContractSpec,
    participant: &ParticipantId,
) -> Result<SynthesizedStrategy<'a>, Error> {
    Game::new(spec)?.synthesize_strategy(participant)
}

/// Simulates the contract with every participant following its synthesized strategy.
pub fn simulate_synthesized(spec: &ContractSpec, seed: u64) -> Result<Simulation, Error> {
    let game = Game::new(spec)?;
    let strategies = spec
        .participants
        .iter()
        .map(|p| game.synthesize_strategy(p))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&dyn Strategy> = strategies.iter().map(|s| s as &dyn Strategy).collect();
    game.simulate(&refs, seed)
}

pub fn simulate(
    spec: &ContractSpec,
    strategies: &[&dyn Strategy],
    seed: u64,
) -> Result<Simulation, Error> {
    Game::new(spec)?.simulate(strategies, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{event_set, Clause, FnStrategy, Payoff};

    fn with_owners(spec: ContractSpec) -> ContractSpec {
        spec.with_agent("A", ["a"]).with_agent("B", ["b"])
    }

    fn goals(spec: ContractSpec) -> ContractSpec {
        spec.with_payoff("A", Payoff::Goal(event_set(["b"])))
            .with_payoff("B", Payoff::Goal(event_set(["a"])))
    }

    fn e1() -> ContractSpec {
        with_owners(ContractSpec::new())
            .with_clause(Clause::fact("a"))
            .with_clause(Clause::standard(["a"], "b"))
    }
    fn e2() -> ContractSpec {
        with_owners(ContractSpec::new())
            .with_clause(Clause::standard(["b"], "a"))
            .with_clause(Clause::standard(["a"], "b"))
    }
    fn e3() -> ContractSpec {
        with_owners(ContractSpec::new())
            .with_clause(Clause::circular(["b"], "a"))
            .with_clause(Clause::standard(["a"], "b"))
    }
    fn e4() -> ContractSpec {
        with_owners(ContractSpec::new())
            .with_clause(Clause::circular(["b"], "a"))
            .with_clause(Clause::circular(["a"], "b"))
    }

    fn play(spec: &ContractSpec, names: &str) -> Play {
        Play::from_names(spec, names.chars().map(|c| c.to_string())).unwrap()
    }

    fn ledger(spec: &ContractSpec, names: &str) -> Vec<EventSet> {
        credits(spec, &play(spec, names)).unwrap().per_prefix
    }

    fn sets(list: &[&[&str]]) -> Vec<EventSet> {
        list.iter().map(|s| event_set(s.iter())).collect()
    }

    #[test]
    fn credit_computations() {
        assert_eq!(ledger(&e1(), "ab"), sets(&[&[], &[], &[]]));
        assert_eq!(ledger(&e1(), "ba"), sets(&[&[], &["b"], &["b"]]));
        assert_eq!(ledger(&e2(), "ab"), sets(&[&[], &["a"], &["a"]]));
        assert_eq!(ledger(&e2(), "ba"), sets(&[&[], &["b"], &["b"]]));
        assert_eq!(ledger(&e3(), "ab"), sets(&[&[], &["a"], &[]]));
        assert_eq!(ledger(&e3(), "ba"), sets(&[&[], &["b"], &["b"]]));
        assert_eq!(ledger(&e4(), "ab"), sets(&[&[], &["a"], &[]]));
        assert_eq!(ledger(&e4(), "ba"), sets(&[&[], &["b"], &[]]));
        let l = credits(&e3(), &play(&e3(), "ab")).unwrap();
        assert!(l.final_credits.is_empty());
    }

    #[test]
    fn prudent_events_per_structure() {
        let pr = |spec: &ContractSpec, x: &[&str]| prudent_events(spec, &event_set(x)).unwrap();
        assert_eq!(pr(&e1(), &[]), event_set(["a"]));
        assert_eq!(pr(&e1(), &["a"]), event_set(["b"]));
        assert!(pr(&e1(), &["a", "b"]).is_empty());
        assert!(pr(&e2(), &[]).is_empty());
        assert_eq!(pr(&e2(), &["b"]), event_set(["a"]));
        assert_eq!(pr(&e2(), &["a"]), event_set(["b"]));
        assert!(pr(&e2(), &["a", "b"]).is_empty());
        assert_eq!(pr(&e3(), &[]), event_set(["a"]));
        assert_eq!(pr(&e3(), &["a"]), event_set(["b"]));
        assert_eq!(pr(&e4(), &[]), event_set(["a", "b"]));
    }

    #[test]
    fn reachable_sets() {
        assert_eq!(
            reachable(&e3(), &EventSet::new()).unwrap(),
            event_set(["a", "b"])
        );
        assert!(reachable(&e2(), &EventSet::new()).unwrap().is_empty());
        assert_eq!(
            reachable(&e1(), &event_set(["a"])).unwrap(),
            event_set(["b"])
        );
        assert!(reachable(&e1(), &event_set(["a", "b"])).unwrap().is_empty());
    }

    #[test]
    fn innocence_differs_from_credit_freedom() {
        let spec = e3();
        let a = ParticipantId::new("A");
        let check = |names: &str| {
            let p = play(&spec, names);
            (
                innocent(&spec, &a, &p).unwrap(),
                credit_free(&spec, &a, &p).unwrap(),
            )
        };
        assert_eq!(check(""), (false, true));
        assert_eq!(check("a"), (true, false));
        assert_eq!(check("ab"), (true, true));
    }

    #[test]
    fn winning_plays() {
        let spec = goals(e1());
        let a = ParticipantId::new("A");
        let b = ParticipantId::new("B");
        // B owes b after a; A is innocent and B culpable
        assert!(wins(&spec, &a, &play(&spec, "a")).unwrap());
        assert!(!wins(&spec, &b, &play(&spec, "a")).unwrap());
        assert!(!wins(&spec, &a, &Play::empty()).unwrap());
        let v = verdict(&spec, &play(&spec, "ab")).unwrap();
        assert!(v.everyone_wins());

        let no_payoff = e1().with_payoff("A", Payoff::Goal(event_set(["b"])));
        let v = verdict(&no_payoff, &play(&no_payoff, "ab")).unwrap();
        assert_eq!(v.participants[&b].wins, None);
        assert!(matches!(
            wins(&no_payoff, &b, &Play::empty()),
            Err(Error::MissingPayoff(_))
        ));
    }

    #[test]
    fn agreement_on_small_contracts() {
        assert!(agreement(&goals(e1())).unwrap());
        assert!(!agreement(&goals(e2())).unwrap());
        assert!(agreement(&goals(e3())).unwrap());
        assert!(agreement(&goals(e4())).unwrap());
        let report = Game::new(&goals(e2())).unwrap().agreement_report().unwrap();
        assert_eq!(
            report.failing,
            vec![ParticipantId::new("A"), ParticipantId::new("B")]
        );
        assert!(matches!(agreement(&e1()), Err(Error::MissingPayoff(_))));

        let conflicted = goals(e3()).with_agent("B", ["c"]).with_conflict("b", "c");
        assert!(matches!(
            agreement(&conflicted),
            Err(Error::Conflicted { .. })
        ));
    }

    #[test]
    fn agreement_by_callback() {
        let spec = e4();
        let game = Game::new(&spec).unwrap();
        let r = game.agreement_by(|_, set| set.len() == 2).unwrap();
        assert!(r.agreement);
        let r = game
            .agreement_by(|p, set| p.as_str() == "A" || set.is_empty())
            .unwrap();
        assert_eq!(r.failing, vec![ParticipantId::new("B")]);
    }

    #[test]
    fn synthesized_runs() {
        for spec in [goals(e1()), goals(e3())] {
            for seed in 0..5 {
                let run = simulate_synthesized(&spec, seed).unwrap();
                assert_eq!(run.play.to_string(), "a b");
                assert!(run.verdict.everyone_wins());
            }
        }
        let spec = goals(e4());
        let plays: BTreeSet<String> = (0..32)
            .map(|seed| simulate_synthesized(&spec, seed).unwrap().play.to_string())
            .collect();
        assert_eq!(plays, ["a b".to_string(), "b a".to_string()].into());
        let run = simulate_synthesized(&goals(e2()), 0).unwrap();
        assert!(run.play.is_empty());
        assert!(!run.verdict.everyone_wins());
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = goals(e4());
        for seed in [0, 7, 99] {
            assert_eq!(
                simulate_synthesized(&spec, seed).unwrap(),
                simulate_synthesized(&spec, seed).unwrap()
            );
        }
    }

    #[test]
    fn strategy_contract_is_enforced() {
        let spec = goals(e1());
        let game = Game::new(&spec).unwrap();
        let a = game.synthesize_strategy(&ParticipantId::new("A")).unwrap();
        let cheat = FnStrategy::new(ParticipantId::new("B"), |_: &Play| event_set(["a"]));
        let err = game.simulate(&[&a, &cheat], 0).unwrap_err();
        assert!(matches!(err, Error::StrategyViolation { .. }));

        let b = game.synthesize_strategy(&ParticipantId::new("B")).unwrap();
        let lazy = FnStrategy::new(ParticipantId::new("A"), |_: &Play| EventSet::new());
        let run = game.simulate(&[&lazy, &b], 0).unwrap();
        assert!(run.play.is_empty());
        assert!(!run.verdict.participants[&ParticipantId::new("A")].innocent);
        assert!(run.verdict.participants[&ParticipantId::new("B")].wins == Some(true));

        assert!(matches!(
            game.simulate(&[&a], 0),
            Err(Error::StrategyCount(_))
        ));
        assert!(matches!(
            game.simulate(&[&a, &a, &b], 0),
            Err(Error::StrategyCount(_))
        ));
    }

    #[test]
    fn preconditions() {
        let spec = e3().with_agent("B", ["c"]).with_conflict("b", "c");
        assert!(matches!(
            prudent_events(&spec, &EventSet::new()),
            Err(Error::Conflicted { .. })
        ));
        assert!(matches!(
            enables(
                &spec,
                &event_set(["b", "c"]),
                &EventId::new("a"),
                ClauseKind::Circular
            ),
            Err(Error::SetNotConflictFree(_))
        ));
        assert!(enables(
            &spec,
            &event_set(["b"]),
            &EventId::new("a"),
            ClauseKind::Circular
        )
        .unwrap());
        assert!(matches!(
            prudent_events(&e3(), &event_set(["z"])),
            Err(Error::UnknownEvent(_))
        ));
        assert!(matches!(
            innocent(&e3(), &ParticipantId::new("Z"), &Play::empty()),
            Err(Error::UnknownParticipant(_))
        ));
        // credits are defined on conflicted structures too
        let l = credits(&spec, &play(&spec, "ac")).unwrap();
        assert_eq!(l.final_credits, event_set(["a", "c"]));
    }

    #[test]
    fn prudent_plays() {
        let spec = e3();
        assert!(is_prudent_play(&spec, &play(&spec, "ab")).unwrap());
        assert!(!is_prudent_play(&spec, &play(&spec, "ba")).unwrap());
    }
}
