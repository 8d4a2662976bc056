//! Parametric contract families.

use std::collections::BTreeSet;

use ces_pcl::model::{Clause, ClauseKind, ContractSpec, EventId, EventSet, ParticipantId, Payoff};

/// Which grid cells use circular enabling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircularCells {
    All,
    None,
    /// 1-based `(row, column)` cells.
    Cells(BTreeSet<(usize, usize)>),
}

impl CircularCells {
    pub fn contains(&self, cell: (usize, usize)) -> bool {
        match self {
            CircularCells::All => true,
            CircularCells::None => false,
            CircularCells::Cells(cells) => cells.contains(&cell),
        }
    }

    /// Parses `all`, `none` or a list like `1:2,3:3`.
    pub fn parse(text: &str, n: usize) -> Result<Self, String> {
        match text.trim() {
            "all" => return Ok(CircularCells::All),
            "none" | "" => return Ok(CircularCells::None),
            _ => {}
        }
        let mut cells = BTreeSet::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (i, j) = item
                .split_once(':')
                .ok_or_else(|| format!("expected ROW:COL, got {item:?}"))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|v| (1..=n).contains(v))
                    .ok_or_else(|| format!("cell {item:?} outside 1..{n}"))
            };
            cells.insert((parse(i)?, parse(j)?));
        }
        Ok(CircularCells::Cells(cells))
    }
}

pub fn dancer_event(i: usize, j: usize) -> EventId {
    EventId::new(format!("e_{i}_{j}"))
}

pub fn dancer(i: usize, j: usize) -> ParticipantId {
    ParticipantId::new(format!("A_{i}_{j}"))
}

/// The up-to-8 cells around `(i, j)` inside an `n`×`n` grid.
pub fn neighborhood(n: usize, i: usize, j: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for p in i.saturating_sub(1).max(1)..=(i + 1).min(n) {
        for q in j.saturating_sub(1).max(1)..=(j + 1).min(n) {
            if (p, q) != (i, j) {
                cells.push((p, q));
            }
        }
    }
    cells
}

fn pairs(cells: &[(usize, usize)]) -> Vec<EventSet> {
    let mut out = Vec::new();
    for (k, &(p, q)) in cells.iter().enumerate() {
        for &(r, s) in &cells[k + 1..] {
            out.push(
                [dancer_event(p, q), dancer_event(r, s)]
                    .into_iter()
                    .collect(),
            );
        }
    }
    out
}

/// Each guest dances once two neighbours dance (before, or eventually for
/// circular cells), and wants at least two neighbours dancing.
pub fn shy_dancers(n: usize, circular: &CircularCells) -> ContractSpec {
    let mut spec = ContractSpec::new();
    for i in 1..=n {
        for j in 1..=n {
            let e = dancer_event(i, j);
            let agent = dancer(i, j);
            spec.events.insert(e.clone());
            spec.participants.insert(agent.clone());
            spec.owner.insert(e.clone(), agent.clone());
            let kind = if circular.contains((i, j)) {
                ClauseKind::Circular
            } else {
                ClauseKind::Standard
            };
            let around = pairs(&neighborhood(n, i, j));
            for body in &around {
                spec.clauses
                    .insert(Clause::new(kind, body.clone(), e.clone()));
            }
            let payoff =
                Payoff::OfferRequest(around.iter().map(|x| (x.clone(), x.clone())).collect());
            spec.payoffs.insert(agent, payoff);
        }
    }
    spec
}

/// Whether two distinct circular cells share the neighbourhood of some cell.
pub fn circular_pair_in_some_neighborhood(n: usize, circular: &CircularCells) -> bool {
    (1..=n).any(|i| {
        (1..=n).any(|j| {
            neighborhood(n, i, j)
                .into_iter()
                .filter(|&c| circular.contains(c))
                .count()
                >= 2
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhoods_are_clipped() {
        assert_eq!(neighborhood(3, 1, 1), vec![(1, 2), (2, 1), (2, 2)]);
        assert_eq!(neighborhood(3, 2, 2).len(), 8);
        assert_eq!(neighborhood(4, 1, 3).len(), 5);
    }

    #[test]
    fn cell_lists() {
        assert_eq!(CircularCells::parse("all", 3), Ok(CircularCells::All));
        assert_eq!(CircularCells::parse("none", 3), Ok(CircularCells::None));
        let cells = CircularCells::parse("1:2, 3:3", 3).unwrap();
        assert!(cells.contains((1, 2)) && cells.contains((3, 3)) && !cells.contains((2, 2)));
        assert!(CircularCells::parse("4:1", 3).is_err());
        assert!(CircularCells::parse("12", 3).is_err());
    }

    #[test]
    fn grid_contract_shape() {
        let spec = shy_dancers(3, &CircularCells::None);
        assert_eq!(spec.events.len(), 9);
        // corner: 3 neighbours, edge: 5, centre: 8
        assert_eq!(spec.clauses.len(), 4 * 3 + 4 * 10 + 28);
        assert!(ces_pcl::model::validate(&spec).is_empty());
    }

    #[test]
    fn neighbourhood_condition() {
        let far = CircularCells::parse("1:1,1:4", 4).unwrap();
        assert!(!circular_pair_in_some_neighborhood(4, &far));
        let near = CircularCells::parse("1:1,1:3", 4).unwrap();
        assert!(circular_pair_in_some_neighborhood(4, &near));
        assert!(!circular_pair_in_some_neighborhood(
            3,
            &CircularCells::parse("2:2", 3).unwrap()
        ));
    }
}
