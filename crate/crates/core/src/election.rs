//! Election input, rule sets and threshold eligibility.

use serde::{Deserialize, Serialize};

use crate::apportion::{DivisorSequence, Ratio, TieRule, MAX_HOUSE, MAX_VOTES};
use crate::error::{Error, Result};

/// A vote matrix: one row per constituency, one column per party, plus the
/// number of entitled voters per constituency.
///
/// Entitled voters drive the distribution of permanent seats; they are not
/// required to bound the cast votes (turnout above 100% is rejected nowhere,
/// theoretical inputs often assume exactly 100%).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionInput {
    parties: Vec<String>,
    constituencies: Vec<String>,
    votes: Vec<Vec<u64>>,
    entitled: Vec<u64>,
}

impl ElectionInput {
    pub fn new(
        parties: Vec<String>,
        constituencies: Vec<String>,
        votes: Vec<Vec<u64>>,
        entitled: Vec<u64>,
    ) -> Result<Self> {
        if parties.is_empty() || constituencies.is_empty() {
            return Err(Error::InvalidInput(
                "need at least one party and one constituency".into(),
            ));
        }
        if votes.len() != constituencies.len() || entitled.len() != constituencies.len() {
            return Err(Error::InvalidInput(
                "row count does not match constituency count".into(),
            ));
        }
        for (i, row) in votes.iter().enumerate() {
            if row.len() != parties.len() {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} columns, expected {}",
                    i,
                    row.len(),
                    parties.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v > MAX_VOTES) {
                return Err(Error::InputTooLarge(format!("vote count {v}")));
            }
        }
        for (i, &e) in entitled.iter().enumerate() {
            if e == 0 {
                return Err(Error::InvalidInput(format!(
                    "constituency {:?} has zero entitled voters",
                    constituencies[i]
                )));
            }
            if e > MAX_VOTES {
                return Err(Error::InputTooLarge(format!("entitled count {e}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for label in parties.iter().chain(constituencies.iter()) {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate label {label:?}")));
            }
        }
        Ok(ElectionInput {
            parties,
            constituencies,
            votes,
            entitled,
        })
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn constituencies(&self) -> &[String] {
        &self.constituencies
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn n_constituencies(&self) -> usize {
        self.constituencies.len()
    }

    pub fn votes(&self) -> &[Vec<u64>] {
        &self.votes
    }

    pub fn vote(&self, constituency: usize, party: usize) -> u64 {
        self.votes[constituency][party]
    }

    pub fn entitled(&self) -> &[u64] {
        &self.entitled
    }

    /// National vote total per party.
    pub fn national_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.n_parties()];
        for row in &self.votes {
            for (j, &v) in row.iter().enumerate() {
                totals[j] += v;
            }
        }
        totals
    }

    /// All cast votes in one constituency.
    pub fn row_total(&self, constituency: usize) -> u64 {
        self.votes[constituency].iter().sum()
    }

    /// All cast votes nationwide.
    pub fn total_votes(&self) -> u64 {
        self.votes.iter().flatten().sum()
    }

    pub fn column(&self, party: usize) -> Vec<u64> {
        self.votes.iter().map(|row| row[party]).collect()
    }

    pub fn party_index(&self, label: &str) -> Result<usize> {
        self.parties
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownLabel(format!("party {label:?}")))
    }

    pub fn constituency_index(&self, label: &str) -> Result<usize> {
        self.constituencies
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(format!("constituency {label:?}")))
    }

    /// A copy with signed vote deltas applied. Entitled voters are kept.
    pub fn with_deltas(&self, deltas: &[VoteDelta]) -> Result<Self> {
        let mut votes = self.votes.clone();
        for d in deltas {
            let cell = &mut votes[d.constituency][d.party];
            let new = i128::from(*cell) + i128::from(d.delta);
            if new < 0 {
                return Err(Error::NegativeVotes {
                    constituency: self.constituencies[d.constituency].clone(),
                    party: self.parties[d.party].clone(),
                });
            }
            if new > i128::from(MAX_VOTES) {
                return Err(Error::InputTooLarge(format!("vote count {new}")));
            }
            *cell = new as u64;
        }
        ElectionInput::new(
            self.parties.clone(),
            self.constituencies.clone(),
            votes,
            self.entitled.clone(),
        )
    }
}

/// A signed vote change for one (constituency, party) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteDelta {
    pub constituency: usize,
    pub party: usize,
    pub delta: i64,
}

/// How the ordered constituency list is generated in the dynamic method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListMethod {
    /// Highest-averages order over entitled voters. Prefix-invariant: the
    /// list length never changes the ordering.
    HighestAverages,
    /// Incremental largest-remainder order: entry k is the constituency
    /// that gains when the house grows from k-1 to k. Fails whenever a
    /// house increment takes a seat away from some constituency, which is
    /// exactly why it is not the default.
    HamiltonIncrement,
}

/// Complete rule set for one election.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionRules {
    pub house_size: u32,
    /// Seats pre-distributed to constituencies (current system only).
    pub permanent_seats: u32,
    pub national_threshold: Ratio,
    pub constituency_threshold: Ratio,
    /// Divisors for seats awarded inside a constituency row.
    pub within_constituency_divisors: DivisorSequence,
    /// Divisors for adjustment seats awarded down a party column.
    pub adjustment_divisors: DivisorSequence,
    /// Divisors for the nationwide reference distribution.
    pub national_divisors: DivisorSequence,
    /// Divisors for the ordered constituency list of the dynamic method.
    pub list_divisors: DivisorSequence,
    pub list_method: ListMethod,
    pub tie: TieRule,
}

impl ElectionRules {
    /// Swedish national rules as of 2010: 349 seats of which 310 permanent,
    /// 4%/12% thresholds, modified odd-number method within constituencies
    /// and the pure method everywhere else.
    pub fn swedish() -> Self {
        ElectionRules {
            house_size: 349,
            permanent_seats: 310,
            national_threshold: Ratio { num: 4, den: 100 },
            constituency_threshold: Ratio { num: 12, den: 100 },
            within_constituency_divisors: DivisorSequence::modified(),
            adjustment_divisors: DivisorSequence::pure(),
            national_divisors: DivisorSequence::pure(),
            list_divisors: DivisorSequence::pure(),
            list_method: ListMethod::HighestAverages,
            tie: TieRule::LowestIndex,
        }
    }

    /// Thresholdless rules with pure divisors everywhere, for theoretical
    /// constructions.
    pub fn theoretical(house_size: u32) -> Self {
        ElectionRules {
            house_size,
            permanent_seats: 0,
            national_threshold: Ratio { num: 0, den: 1 },
            constituency_threshold: Ratio { num: 0, den: 1 },
            within_constituency_divisors: DivisorSequence::pure(),
            adjustment_divisors: DivisorSequence::pure(),
            national_divisors: DivisorSequence::pure(),
            list_divisors: DivisorSequence::pure(),
            list_method: ListMethod::HighestAverages,
            tie: TieRule::LowestIndex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.house_size == 0 || self.house_size > MAX_HOUSE {
            return Err(Error::InvalidRules(format!(
                "house size {} out of range",
                self.house_size
            )));
        }
        if self.permanent_seats > self.house_size {
            return Err(Error::InvalidRules(format!(
                "permanent seats {} exceed house size {}",
                self.permanent_seats, self.house_size
            )));
        }
        for (name, t) in [
            ("national threshold", self.national_threshold),
            ("constituency threshold", self.constituency_threshold),
        ] {
            if t.den == 0 || t.num >= t.den && t.num != 0 {
                return Err(Error::InvalidRules(format!(
                    "{name} {}/{} not in [0, 1)",
                    t.num, t.den
                )));
            }
        }
        Ok(())
    }
}

/// Extra knobs for the dynamic method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicOptions {
    /// Keep distributing permanent seats until at least this many are out,
    /// even if the stop condition fires earlier.
    pub min_permanent: Option<u32>,
    /// Give every constituency this many permanent seats before the
    /// ordered list is consumed.
    pub constituency_floor: Option<u32>,
}

impl DynamicOptions {
    pub fn validate(&self, rules: &ElectionRules, n_constituencies: usize) -> Result<()> {
        if let Some(m) = self.min_permanent {
            if m > rules.house_size {
                return Err(Error::InfeasibleFloor(format!(
                    "minimum permanent seats {m} exceed house size {}",
                    rules.house_size
                )));
            }
        }
        if let Some(f) = self.constituency_floor {
            let need = u64::from(f) * n_constituencies as u64;
            if need > u64::from(rules.house_size) {
                return Err(Error::InfeasibleFloor(format!(
                    "floor of {f} seats for {n_constituencies} constituencies needs {need} seats, \
                     house has {}",
                    rules.house_size
                )));
            }
        }
        Ok(())
    }
}

/// Which of the two complete systems to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Current,
    Dynamic,
}

/// Threshold eligibility masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eligibility {
    /// Party passed the national threshold.
    pub national: Vec<bool>,
    /// Party may take seats in a given constituency: nationally eligible or
    /// above the constituency threshold there. Indexed `[constituency][party]`.
    pub local: Vec<Vec<bool>>,
}

impl Eligibility {
    /// True if the party competes only via a constituency threshold.
    pub fn local_only(&self, constituency: usize, party: usize) -> bool {
        self.local[constituency][party] && !self.national[party]
    }
}

/// Threshold comparison is exact: share >= num/den is evaluated as
/// `votes * den >= num * total` in 128-bit integers. Shares at exactly the
/// threshold count as eligible. With zero total votes nothing is eligible.
pub fn eligibility(input: &ElectionInput, rules: &ElectionRules) -> Eligibility {
    let at_least = |votes: u64, total: u64, t: Ratio| -> bool {
        total > 0 && u128::from(votes) * u128::from(t.den) >= u128::from(t.num) * u128::from(total)
    };
    let totals = input.national_totals();
    let all_votes = input.total_votes();
    let national: Vec<bool> = totals
        .iter()
        .map(|&v| at_least(v, all_votes, rules.national_threshold))
        .collect();
    let local = (0..input.n_constituencies())
        .map(|i| {
            let row_total = input.row_total(i);
            (0..input.n_parties())
                .map(|j| {
                    national[j]
                        || at_least(input.vote(i, j), row_total, rules.constituency_threshold)
                })
                .collect()
        })
        .collect();
    Eligibility { national, local }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(votes: Vec<Vec<u64>>) -> ElectionInput {
        ElectionInput::new(
            vec!["A".into(), "B".into()],
            vec!["I".into(), "II".into()],
            votes,
            vec![100, 100],
        )
        .unwrap()
    }

    #[test]
    fn monopoly_and_zero_votes() {
        let input = two_by_two(vec![vec![50, 0], vec![50, 0]]);
        let elig = eligibility(&input, &ElectionRules::swedish());
        assert_eq!(elig.national, vec![true, false]);
    }

    #[test]
    fn exactly_four_percent_is_eligible() {
        // 4 of 100 votes nationwide: the comparison is >=, not >.
        let input = two_by_two(vec![vec![48, 2], vec![48, 2]]);
        let elig = eligibility(&input, &ElectionRules::swedish());
        assert!(elig.national[1]);
        // One vote less and the party drops out.
        let input = two_by_two(vec![vec![48, 2], vec![49, 1]]);
        let elig = eligibility(&input, &ElectionRules::swedish());
        assert!(!elig.national[1]);
    }

    #[test]
    fn twelve_percent_local_eligibility() {
        // Party B: 3% nationwide but 15% in constituency I.
        let input = ElectionInput::new(
            vec!["A".into(), "B".into()],
            vec!["I".into(), "II".into()],
            vec![vec![85, 15], vec![885, 15]],
            vec![100, 900],
        )
        .unwrap();
        let elig = eligibility(&input, &ElectionRules::swedish());
        assert!(!elig.national[1]);
        assert!(elig.local[0][1]);
        assert!(!elig.local[1][1]);
        assert!(elig.local_only(0, 1));
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(ElectionInput::new(
            vec!["A".into()],
            vec!["I".into()],
            vec![vec![1, 2]],
            vec![10],
        )
        .is_err());
        assert!(ElectionInput::new(
            vec!["A".into()],
            vec!["I".into()],
            vec![vec![1]],
            vec![0],
        )
        .is_err());
        assert!(ElectionInput::new(
            vec!["A".into(), "A".into()],
            vec!["I".into()],
            vec![vec![1, 2]],
            vec![10],
        )
        .is_err());
    }

    #[test]
    fn deltas_apply_and_reject_negatives() {
        let input = two_by_two(vec![vec![50, 10], vec![50, 10]]);
        let out = input
            .with_deltas(&[VoteDelta {
                constituency: 0,
                party: 1,
                delta: -10,
            }])
            .unwrap();
        assert_eq!(out.vote(0, 1), 0);
        let err = input
            .with_deltas(&[VoteDelta {
                constituency: 0,
                party: 1,
                delta: -11,
            }])
            .unwrap_err();
        assert!(matches!(err, Error::NegativeVotes { .. }));
    }
}
