//! One-dimensional apportionment primitives.
//!
//! Everything here is integer-exact: comparison numbers are compared by
//! 128-bit cross multiplication, never as floats. Seats are handed out one
//! at a time to the entity with the largest comparison number (votes
//! divided by the current divisor), which yields both totals and the order
//! in which seats were won.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vote count accepted by the allocation routines.
pub const MAX_VOTES: u64 = 1 << 40;
/// Largest numerator/denominator accepted in a divisor or threshold ratio.
pub const MAX_RATIO_PART: u64 = 1 << 20;
/// Largest house size accepted.
pub const MAX_HOUSE: u32 = 1 << 20;

/// An exact nonnegative rational, used for divisors and thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRules("ratio denominator is zero".into()));
        }
        if num > MAX_RATIO_PART || den > MAX_RATIO_PART {
            return Err(Error::InputTooLarge(format!(
                "ratio {num}/{den} exceeds {MAX_RATIO_PART}"
            )));
        }
        Ok(Ratio { num, den })
    }

    pub const ONE: Ratio = Ratio { num: 1, den: 1 };
}

/// Divisor sequence of a highest-averages method: a configurable first
/// divisor followed by the odd numbers 3, 5, 7, ...
///
/// The first divisor is an exact rational; the statutory 1.4 is 7/5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorSequence {
    first: Ratio,
}

impl DivisorSequence {
    pub fn new(first: Ratio) -> Result<Self> {
        if first.num == 0 {
            return Err(Error::InvalidRules("first divisor must be positive".into()));
        }
        Ok(DivisorSequence { first })
    }

    /// Standard odd-number sequence 1, 3, 5, ...
    pub fn pure() -> Self {
        DivisorSequence { first: Ratio::ONE }
    }

    /// Modified odd-number sequence 1.4, 3, 5, ... (first divisor 7/5).
    pub fn modified() -> Self {
        DivisorSequence {
            first: Ratio { num: 7, den: 5 },
        }
    }

    pub fn first(&self) -> Ratio {
        self.first
    }

    /// Divisor applied to an entity that already holds `seats` seats.
    pub fn divisor(&self, seats: u32) -> Ratio {
        if seats == 0 {
            self.first
        } else {
            Ratio {
                num: 2 * u64::from(seats) + 1,
                den: 1,
            }
        }
    }
}

/// A comparison number: `votes / divisor`, kept in exact form.
#[derive(Clone, Copy, Debug)]
pub struct Quotient {
    pub votes: u64,
    pub divisor: Ratio,
}

/// Exact ordering of two comparison numbers by cross multiplication.
///
/// With votes below `MAX_VOTES` and ratio parts below `MAX_RATIO_PART`
/// every cross product fits comfortably in 128 bits.
pub fn compare_quotients(a: &Quotient, b: &Quotient) -> Ordering {
    let lhs = u128::from(a.votes) * u128::from(a.divisor.den) * u128::from(b.divisor.num);
    let rhs = u128::from(b.votes) * u128::from(b.divisor.den) * u128::from(a.divisor.num);
    lhs.cmp(&rhs)
}

/// How to resolve equal comparison numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// The entity with the lowest index wins. Fully order-dependent but
    /// reproducible without any random state.
    LowestIndex,
    /// Seeded lot draw, reproducible bit-for-bit for a given seed. Models
    /// the practice of drawing lots without sacrificing replay.
    SeededLot { seed: u64 },
}

impl Default for TieRule {
    fn default() -> Self {
        TieRule::LowestIndex
    }
}

/// Stateful tie resolver for one allocation run.
///
/// For `SeededLot` the draws consume a ChaCha8 stream seeded from the rule's
/// seed; identical inputs produce the identical sequence of tie events and
/// therefore identical draws.
pub struct TieBreaker {
    rng: Option<ChaCha8Rng>,
}

impl TieBreaker {
    pub fn new(rule: TieRule) -> Self {
        let rng = match rule {
            TieRule::LowestIndex => None,
            TieRule::SeededLot { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        TieBreaker { rng }
    }

    /// Pick one winner among `tied` (sorted ascending, nonempty).
    pub fn pick(&mut self, tied: &[usize]) -> usize {
        debug_assert!(!tied.is_empty());
        match &mut self.rng {
            None => tied[0],
            Some(rng) => tied[rng.gen_range(0..tied.len())],
        }
    }
}

/// One seat award: which entity won it and whether a tie had to be broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Award {
    pub entity: usize,
    pub tied: bool,
}

#[derive(Clone, Debug)]
struct HeapEntry {
    quotient: Quotient,
    entity: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Max-heap on the quotient; equal quotients surface lowest index first
    // so tied groups pop in ascending entity order.
    fn cmp(&self, other: &Self) -> Ordering {
        compare_quotients(&self.quotient, &other.quotient)
            .then_with(|| other.entity.cmp(&self.entity))
    }
}

fn check_bounds(votes: &[u64], n_awards: u32, divisors: &DivisorSequence) -> Result<()> {
    if let Some(&v) = votes.iter().find(|&&v| v > MAX_VOTES) {
        return Err(Error::InputTooLarge(format!(
            "vote count {v} exceeds {MAX_VOTES}"
        )));
    }
    if n_awards > MAX_HOUSE {
        return Err(Error::InputTooLarge(format!(
            "house size {n_awards} exceeds {MAX_HOUSE}"
        )));
    }
    // Ratio::new already bounds the first divisor; subsequent divisors are
    // 2k+1 <= 2*MAX_HOUSE+1 which is within range.
    let _ = divisors;
    Ok(())
}

/// Award `n_awards` seats one at a time, starting from per-entity seat
/// counts `initial` (used to continue a distribution, e.g. adjustment
/// seats on top of permanent seats).
///
/// Returns the full ordered award list. Entities with zero votes never
/// receive a seat; if every entity has zero votes the input is degenerate
/// and an error is returned rather than awarding by lot.
pub fn award_sequence_from(
    votes: &[u64],
    initial: &[u32],
    n_awards: u32,
    divisors: &DivisorSequence,
    tie: TieRule,
) -> Result<Vec<Award>> {
    assert_eq!(votes.len(), initial.len());
    check_bounds(votes, n_awards, divisors)?;
    if n_awards == 0 {
        return Ok(Vec::new());
    }
    if votes.iter().all(|&v| v == 0) {
        return Err(Error::AllZeroVotes(n_awards));
    }

    let mut breaker = TieBreaker::new(tie);
    let mut counts: Vec<u32> = initial.to_vec();
    let mut heap: BinaryHeap<HeapEntry> = votes
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > 0)
        .map(|(i, &v)| HeapEntry {
            quotient: Quotient {
                votes: v,
                divisor: divisors.divisor(counts[i]),
            },
            entity: i,
        })
        .collect();

    let mut awards = Vec::with_capacity(n_awards as usize);
    for _ in 0..n_awards {
        let top = heap.pop().expect("nonempty: positive-vote entities remain");
        let top_quotient = top.quotient;
        let top_entity = top.entity;
        // Gather the whole tied group so lot draws see every candidate.
        let mut tied = vec![top];
        while let Some(peek) = heap.peek() {
            if compare_quotients(&peek.quotient, &top_quotient) == Ordering::Equal {
                tied.push(heap.pop().unwrap());
            } else {
                break;
            }
        }
        let was_tie = tied.len() > 1;
        let winner = if was_tie {
            let ids: Vec<usize> = tied.iter().map(|e| e.entity).collect();
            breaker.pick(&ids)
        } else {
            top_entity
        };
        for entry in tied {
            if entry.entity == winner {
                counts[winner] += 1;
                heap.push(HeapEntry {
                    quotient: Quotient {
                        votes: entry.quotient.votes,
                        divisor: divisors.divisor(counts[winner]),
                    },
                    entity: winner,
                });
            } else {
                heap.push(entry);
            }
        }
        awards.push(Award {
            entity: winner,
            tied: was_tie,
        });
    }
    Ok(awards)
}

/// Award `n_awards` seats from scratch. See [`award_sequence_from`].
pub fn award_sequence(
    votes: &[u64],
    n_awards: u32,
    divisors: &DivisorSequence,
    tie: TieRule,
) -> Result<Vec<Award>> {
    award_sequence_from(votes, &vec![0; votes.len()], n_awards, divisors, tie)
}

/// Highest-averages totals: the seat counts reached by [`award_sequence`].
pub fn highest_averages_allocate(
    votes: &[u64],
    house_size: u32,
    divisors: &DivisorSequence,
    tie: TieRule,
) -> Result<Vec<u32>> {
    let awards = award_sequence(votes, house_size, divisors, tie)?;
    let mut seats = vec![0u32; votes.len()];
    for a in &awards {
        seats[a.entity] += 1;
    }
    Ok(seats)
}

/// Largest-remainder (Hamilton) apportionment.
///
/// Each entity receives the floor of its exact quota; the seats left over
/// go to the largest fractional remainders, ties broken by `tie` on the
/// remainder-sorted order. Remainders share the denominator `sum(weights)`
/// so they compare as plain integers.
pub fn hamilton_allocate(weights: &[u64], house_size: u32, tie: TieRule) -> Result<Vec<u32>> {
    check_bounds(weights, house_size, &DivisorSequence::pure())?;
    let total: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    if total == 0 {
        if house_size == 0 {
            return Ok(vec![0; weights.len()]);
        }
        return Err(Error::AllZeroVotes(house_size));
    }

    let mut seats = vec![0u32; weights.len()];
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    let mut assigned: u64 = 0;
    for (i, &w) in weights.iter().enumerate() {
        let scaled = u128::from(w) * u128::from(house_size);
        seats[i] = (scaled / total) as u32;
        assigned += u64::from(seats[i]);
        remainders.push((scaled % total, i));
    }
    let mut leftover = u64::from(house_size) - assigned;
    if leftover == 0 {
        return Ok(seats);
    }

    // Descending remainder, index ascending inside equal groups.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut breaker = TieBreaker::new(tie);
    let mut pos = 0;
    while leftover > 0 {
        let group_rem = remainders[pos].0;
        let mut end = pos;
        while end < remainders.len() && remainders[end].0 == group_rem {
            end += 1;
        }
        let group_len = (end - pos) as u64;
        if group_len <= leftover {
            for item in &remainders[pos..end] {
                seats[item.1] += 1;
            }
            leftover -= group_len;
        } else {
            // Boundary group larger than the seats left: draw winners.
            let mut candidates: Vec<usize> = remainders[pos..end].iter().map(|r| r.1).collect();
            while leftover > 0 {
                let winner = breaker.pick(&candidates);
                seats[winner] += 1;
                candidates.retain(|&c| c != winner);
                leftover -= 1;
            }
        }
        pos = end;
    }
    Ok(seats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entities(awards: &[Award]) -> Vec<usize> {
        awards.iter().map(|a| a.entity).collect()
    }

    fn totals(awards: &[Award], n: usize) -> Vec<u32> {
        let mut t = vec![0u32; n];
        for a in awards {
            t[a.entity] += 1;
        }
        t
    }

    #[test]
    fn quotient_comparisons_are_exact() {
        let q = |votes, num, den| Quotient {
            votes,
            divisor: Ratio { num, den },
        };
        assert_eq!(compare_quotients(&q(97, 1, 1), &q(98, 1, 1)), Ordering::Less);
        // 300/3 = 100 < 299/1
        assert_eq!(compare_quotients(&q(300, 3, 1), &q(299, 1, 1)), Ordering::Less);
        // 7/(7/5) = 5 = 5/1
        assert_eq!(compare_quotients(&q(7, 7, 5), &q(5, 1, 1)), Ordering::Equal);
    }

    #[test]
    fn award_order_two_parties() {
        let awards =
            award_sequence(&[300, 299], 3, &DivisorSequence::pure(), TieRule::LowestIndex)
                .unwrap();
        assert_eq!(entities(&awards), vec![0, 1, 0]);
        assert_eq!(totals(&awards, 2), vec![2, 1]);
    }

    #[test]
    fn award_order_three_constituencies() {
        // Entitled voters 195, 201, 203: seats go out largest first.
        let awards =
            award_sequence(&[195, 201, 203], 3, &DivisorSequence::pure(), TieRule::LowestIndex)
                .unwrap();
        assert_eq!(entities(&awards), vec![2, 1, 0]);
    }

    #[test]
    fn lopsided_two_party_totals() {
        let seats = highest_averages_allocate(
            &[63000, 3010],
            208,
            &DivisorSequence::pure(),
            TieRule::LowestIndex,
        )
        .unwrap();
        assert_eq!(seats, vec![199, 9]);
    }

    #[test]
    fn zero_vote_entity_never_wins() {
        let awards =
            award_sequence(&[100, 0], 5, &DivisorSequence::pure(), TieRule::LowestIndex).unwrap();
        assert_eq!(entities(&awards), vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn all_zero_votes_is_an_error() {
        let err = award_sequence(&[0, 0], 1, &DivisorSequence::pure(), TieRule::LowestIndex)
            .unwrap_err();
        assert!(matches!(err, Error::AllZeroVotes(1)));
        assert!(award_sequence(&[0, 0], 0, &DivisorSequence::pure(), TieRule::LowestIndex)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn national_totals_2010() {
        let votes = [
            1_791_766u64, 390_804, 420_524, 333_696, 1_827_497, 334_053, 437_435, 339_610,
        ];
        let seats =
            highest_averages_allocate(&votes, 349, &DivisorSequence::pure(), TieRule::LowestIndex)
                .unwrap();
        assert_eq!(seats, vec![106, 23, 25, 20, 109, 20, 26, 20]);
        // The modified first divisor only affects an entity's first seat;
        // at these magnitudes the totals are identical.
        let seats_mod = highest_averages_allocate(
            &votes,
            349,
            &DivisorSequence::modified(),
            TieRule::LowestIndex,
        )
        .unwrap();
        assert_eq!(seats_mod, vec![106, 23, 25, 20, 109, 20, 26, 20]);
    }

    #[test]
    fn symmetric_tie_lowest_index() {
        let seats =
            highest_averages_allocate(&[1, 1, 1], 3, &DivisorSequence::pure(), TieRule::LowestIndex)
                .unwrap();
        assert_eq!(seats, vec![1, 1, 1]);
        let awards =
            award_sequence(&[1, 1, 1], 3, &DivisorSequence::pure(), TieRule::LowestIndex).unwrap();
        assert_eq!(entities(&awards), vec![0, 1, 2]);
        // The last award is not a tie: entity 2 at 1/1 beats the others at 1/3.
        assert_eq!(
            awards.iter().map(|a| a.tied).collect::<Vec<_>>(),
            vec![true, true, false]
        );
    }

    #[test]
    fn seeded_lot_is_reproducible() {
        let tie = TieRule::SeededLot { seed: 99 };
        let a = award_sequence(&[5, 5, 5, 5], 7, &DivisorSequence::pure(), tie).unwrap();
        let b = award_sequence(&[5, 5, 5, 5], 7, &DivisorSequence::pure(), tie).unwrap();
        assert_eq!(a, b);
        let c =
            award_sequence(&[5, 5, 5, 5], 7, &DivisorSequence::pure(), TieRule::SeededLot { seed: 100 })
                .unwrap();
        // Different seed is allowed to differ (and does for this input).
        assert_ne!(entities(&a), entities(&c));
    }

    #[test]
    fn hamilton_even_split() {
        assert_eq!(
            hamilton_allocate(&[1, 1], 2, TieRule::LowestIndex).unwrap(),
            vec![1, 1]
        );
    }

    #[test]
    fn hamilton_remainder_seats() {
        // Quotas 4.706, 3.529, 1.176, 0.588 for house 10: the two leftover
        // seats go to the remainders .706 and .588.
        let seats = hamilton_allocate(&[40, 30, 10, 5], 10, TieRule::LowestIndex).unwrap();
        assert_eq!(seats.iter().sum::<u32>(), 10);
        assert_eq!(seats, vec![5, 3, 1, 1]);
    }

    #[test]
    fn hamilton_boundary_tie_by_rule() {
        // Quotas 1.5, 1.5, 1.0 for house 4: one leftover seat, two tied.
        let seats = hamilton_allocate(&[3, 3, 2], 4, TieRule::LowestIndex).unwrap();
        assert_eq!(seats, vec![2, 1, 1]);
        let lot = hamilton_allocate(&[3, 3, 2], 4, TieRule::SeededLot { seed: 7 }).unwrap();
        assert_eq!(lot.iter().sum::<u32>(), 4);
        assert_eq!(lot[2], 1);
    }

    #[test]
    fn adjustment_continuation_uses_initial_counts() {
        // Entity 0 already holds 2 seats, so its next divisor is 5.
        let awards = award_sequence_from(
            &[100, 60],
            &[2, 0],
            2,
            &DivisorSequence::pure(),
            TieRule::LowestIndex,
        )
        .unwrap();
        // 60/1 beats 100/5, then 100/5 beats 60/3.
        assert_eq!(entities(&awards), vec![1, 0]);
    }

    #[test]
    fn oversized_votes_rejected() {
        let err = award_sequence(
            &[MAX_VOTES + 1],
            1,
            &DivisorSequence::pure(),
            TieRule::LowestIndex,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InputTooLarge(_)));
    }
}
