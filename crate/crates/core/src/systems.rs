//! The two complete electoral systems over a constituency × party vote
//! matrix: the current Swedish system (fixed 310/39 split with the
//! keep-your-excess exception) and the dynamic-adjustment variant (the
//! permanent/adjustment split is decided by the votes).
//!
//! Both produce a [`SeatOutcome`] with per-seat provenance: every seat in
//! the award log records where it went, in which phase, and whether a tie
//! had to be broken.

use serde::{Deserialize, Serialize};

use crate::apportion::{
    award_sequence, award_sequence_from, compare_quotients, hamilton_allocate, Award,
    DivisorSequence, Quotient, TieBreaker, TieRule,
};
use crate::election::{
    eligibility, DynamicOptions, ElectionInput, ElectionRules, Eligibility, ListMethod,
    SystemKind, VoteDelta,
};
use crate::error::{Error, Result};

/// Tie-stream salts so that sub-allocations under a seeded-lot rule draw
/// from distinct reproducible streams.
mod salt {
    pub const CONSTITUENCY_SEATS: u64 = 1 << 32;
    pub const ROW: u64 = 2 << 32;
    pub const NATIONAL: u64 = 3 << 32;
    pub const ADJUSTMENT: u64 = 4 << 32;
    pub const LIST: u64 = 5 << 32;
    pub const WALK: u64 = 6 << 32;
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 step
    let mut z = seed ^ salt;
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn derive_tie(tie: TieRule, salt: u64) -> TieRule {
    match tie {
        TieRule::LowestIndex => TieRule::LowestIndex,
        TieRule::SeededLot { seed } => TieRule::SeededLot {
            seed: mix(seed, salt),
        },
    }
}

/// Seat-award phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Permanent,
    Adjustment,
}

/// One seat in the award log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatAward {
    /// 1-based seat number in placement order, permanent phase first.
    pub seat: u32,
    pub constituency: usize,
    pub party: usize,
    pub phase: Phase,
    /// A tie among comparison numbers had to be broken for this seat.
    pub tied: bool,
    /// The seat went to a party that is eligible only through the
    /// constituency threshold. Flagged for manual review.
    pub local_only: bool,
}

/// Complete result of an allocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatOutcome {
    /// Permanent seats per `[constituency][party]`.
    pub permanent: Vec<Vec<u32>>,
    /// Adjustment seats per `[constituency][party]`.
    pub adjustment: Vec<Vec<u32>>,
    /// First-pass nationwide proportional distribution (zero for parties
    /// below the national threshold).
    pub reference: Vec<u32>,
    /// Effective per-party seat totals the allocation was bound to. Equals
    /// `reference` unless the keep-your-excess rule or a locally eligible
    /// party changed it.
    pub targets: Vec<u32>,
    pub award_log: Vec<SeatAward>,
    /// Parties that kept more permanent seats than their reference share
    /// (current system only), in party order.
    pub but_parties: Vec<usize>,
    /// Number of permanent seats handed out.
    pub stop_index: u32,
    pub adjustment_count: u32,
}

impl SeatOutcome {
    pub fn n_constituencies(&self) -> usize {
        self.permanent.len()
    }

    pub fn n_parties(&self) -> usize {
        self.permanent.first().map_or(0, |r| r.len())
    }

    pub fn cell_total(&self, constituency: usize, party: usize) -> u32 {
        self.permanent[constituency][party] + self.adjustment[constituency][party]
    }

    /// Final seats per party (permanent + adjustment column sums).
    pub fn party_totals(&self) -> Vec<u32> {
        let mut totals = vec![0u32; self.n_parties()];
        for i in 0..self.n_constituencies() {
            for (j, t) in totals.iter_mut().enumerate() {
                *t += self.cell_total(i, j);
            }
        }
        totals
    }

    /// Final seats per constituency (row sums).
    pub fn constituency_totals(&self) -> Vec<u32> {
        (0..self.n_constituencies())
            .map(|i| (0..self.n_parties()).map(|j| self.cell_total(i, j)).sum())
            .collect()
    }

    pub fn permanent_party_totals(&self) -> Vec<u32> {
        let mut totals = vec![0u32; self.n_parties()];
        for row in &self.permanent {
            for (j, t) in totals.iter_mut().enumerate() {
                *t += row[j];
            }
        }
        totals
    }

    pub fn total_seats(&self) -> u32 {
        self.party_totals().iter().sum()
    }
}

/// Highest-averages allocation over the entities selected by `include`,
/// scattered back to full length (excluded entities get zero).
fn allocate_masked(
    votes: &[u64],
    include: &[bool],
    house: u32,
    divisors: &DivisorSequence,
    tie: TieRule,
) -> Result<Vec<u32>> {
    let awards = award_list_masked(votes, include, house, divisors, tie)?;
    let mut seats = vec![0u32; votes.len()];
    for a in &awards {
        seats[a.entity] += 1;
    }
    Ok(seats)
}

/// As [`allocate_masked`] but returning the ordered award list with
/// entities mapped back to full-length indices.
fn award_list_masked(
    votes: &[u64],
    include: &[bool],
    house: u32,
    divisors: &DivisorSequence,
    tie: TieRule,
) -> Result<Vec<Award>> {
    let idx: Vec<usize> = (0..votes.len()).filter(|&j| include[j]).collect();
    if idx.is_empty() {
        return Err(Error::NoEligibleParties);
    }
    let sub: Vec<u64> = idx.iter().map(|&j| votes[j]).collect();
    let awards = award_sequence(&sub, house, divisors, tie)?;
    Ok(awards
        .into_iter()
        .map(|a| Award {
            entity: idx[a.entity],
            tied: a.tied,
        })
        .collect())
}

/// Nationwide proportional reference distribution: the whole house over
/// the national vote totals of parties above the national threshold.
pub fn national_reference(input: &ElectionInput, rules: &ElectionRules) -> Result<Vec<u32>> {
    rules.validate()?;
    let elig = eligibility(input, rules);
    allocate_masked(
        &input.national_totals(),
        &elig.national,
        rules.house_size,
        &rules.national_divisors,
        derive_tie(rules.tie, salt::NATIONAL),
    )
}

/// Tie rule of the national computation, for callers replaying it.
pub(crate) fn national_tie(rules: &ElectionRules) -> TieRule {
    derive_tie(rules.tie, salt::NATIONAL)
}

/// Ordered national award list behind [`national_reference`].
pub fn national_award_list(input: &ElectionInput, rules: &ElectionRules) -> Result<Vec<Award>> {
    let elig = eligibility(input, rules);
    award_list_masked(
        &input.national_totals(),
        &elig.national,
        rules.house_size,
        &rules.national_divisors,
        derive_tie(rules.tie, salt::NATIONAL),
    )
}

/// Per-row award state for seats handed out one constituency at a time.
struct Rows<'a> {
    input: &'a ElectionInput,
    elig: &'a Eligibility,
    divisors: &'a DivisorSequence,
    counts: Vec<Vec<u32>>,
}

impl<'a> Rows<'a> {
    fn new(input: &'a ElectionInput, elig: &'a Eligibility, divisors: &'a DivisorSequence) -> Self {
        Rows {
            input,
            elig,
            divisors,
            counts: vec![vec![0; input.n_parties()]; input.n_constituencies()],
        }
    }

    /// Leading party of row `i` among candidates accepted by `admit`:
    /// largest comparison number, ties broken by `breaker`.
    fn leader_where(
        &self,
        i: usize,
        breaker: &mut TieBreaker,
        mut admit: impl FnMut(usize) -> bool,
    ) -> Option<(usize, bool)> {
        let mut best: Option<Quotient> = None;
        let mut tied: Vec<usize> = Vec::new();
        for j in 0..self.input.n_parties() {
            let v = self.input.vote(i, j);
            if v == 0 || !self.elig.local[i][j] || !admit(j) {
                continue;
            }
            let q = Quotient {
                votes: v,
                divisor: self.divisors.divisor(self.counts[i][j]),
            };
            match &best {
                None => {
                    best = Some(q);
                    tied = vec![j];
                }
                Some(b) => match compare_quotients(&q, b) {
                    std::cmp::Ordering::Greater => {
                        best = Some(q);
                        tied = vec![j];
                    }
                    std::cmp::Ordering::Equal => tied.push(j),
                    std::cmp::Ordering::Less => {}
                },
            }
        }
        best?;
        let was_tie = tied.len() > 1;
        let winner = if was_tie { breaker.pick(&tied) } else { tied[0] };
        Some((winner, was_tie))
    }

    fn leader(&self, i: usize, breaker: &mut TieBreaker) -> Option<(usize, bool)> {
        self.leader_where(i, breaker, |_| true)
    }
}

/// Incremental largest-remainder list: entry k is the constituency gaining
/// the k-th seat as the house grows. Errors out when an increment takes a
/// seat away from a constituency, because then no consistent order exists.
fn hamilton_increment_list(weights: &[u64], house: u32, tie: TieRule) -> Result<Vec<Award>> {
    let mut prev = vec![0u32; weights.len()];
    let mut list = Vec::with_capacity(house as usize);
    for k in 1..=house {
        let cur = hamilton_allocate(weights, k, tie)?;
        let mut gained: Option<usize> = None;
        for (i, (&c, &p)) in cur.iter().zip(prev.iter()).enumerate() {
            if c < p {
                return Err(Error::ListConstruction(format!(
                    "largest-remainder order is inconsistent: constituency {i} loses a seat \
                     when the house grows to {k}"
                )));
            }
            if c > p {
                if gained.is_some() {
                    return Err(Error::ListConstruction(format!(
                        "largest-remainder order is inconsistent: two constituencies gain \
                         at house size {k}"
                    )));
                }
                gained = Some(i);
            }
        }
        let entity = gained.ok_or_else(|| {
            Error::ListConstruction(format!("no constituency gains at house size {k}"))
        })?;
        list.push(Award {
            entity,
            tied: false,
        });
        prev = cur;
    }
    Ok(list)
}

/// The current Swedish system.
///
/// 1. Permanent seats go to constituencies by largest remainders over
///    entitled voters, then to parties within each row by the
///    within-constituency divisors over locally eligible parties.
/// 2. The nationwide reference distribution fixes each party's total.
/// 3. A party whose permanent seats already exceed its reference total
///    keeps them all and is removed (votes and seats) from a redone
///    reference computation; repeated until no party exceeds.
/// 4. Adjustment seats top each remaining party column up to its target,
///    continuing the divisor sequence from the permanent counts.
pub fn allocate_current(input: &ElectionInput, rules: &ElectionRules) -> Result<SeatOutcome> {
    rules.validate()?;
    let np = input.n_parties();
    let nc = input.n_constituencies();
    let elig = eligibility(input, rules);

    let const_seats = hamilton_allocate(
        input.entitled(),
        rules.permanent_seats,
        derive_tie(rules.tie, salt::CONSTITUENCY_SEATS),
    )?;

    let mut permanent = vec![vec![0u32; np]; nc];
    let mut log: Vec<SeatAward> = Vec::with_capacity(rules.house_size as usize);
    for i in 0..nc {
        if const_seats[i] == 0 {
            continue;
        }
        let masked: Vec<u64> = (0..np)
            .map(|j| if elig.local[i][j] { input.vote(i, j) } else { 0 })
            .collect();
        let awards = award_sequence(
            &masked,
            const_seats[i],
            &rules.within_constituency_divisors,
            derive_tie(rules.tie, salt::ROW + i as u64),
        )
        .map_err(|e| match e {
            Error::AllZeroVotes(n) => Error::InvalidInput(format!(
                "constituency {:?} holds {n} permanent seat(s) but no eligible votes",
                input.constituencies()[i]
            )),
            other => other,
        })?;
        for a in awards {
            permanent[i][a.entity] += 1;
            log.push(SeatAward {
                seat: log.len() as u32 + 1,
                constituency: i,
                party: a.entity,
                phase: Phase::Permanent,
                tied: a.tied,
                local_only: elig.local_only(i, a.entity),
            });
        }
    }

    let mut col = vec![0u32; np];
    for row in &permanent {
        for (j, c) in col.iter_mut().enumerate() {
            *c += row[j];
        }
    }
    // Seats held by parties below the national threshold stay theirs and
    // shrink the house available for the nationwide computation.
    let outside: u32 = (0..np).filter(|&j| !elig.national[j]).map(|j| col[j]).sum();
    let natl = input.national_totals();
    let reference = allocate_masked(
        &natl,
        &elig.national,
        rules.house_size - outside,
        &rules.national_divisors,
        derive_tie(rules.tie, salt::NATIONAL),
    )?;

    // Keep-your-excess fixpoint: freeze every party over its target, redo
    // the reference over the rest with the frozen votes and seats removed.
    let mut frozen = vec![false; np];
    let mut targets = reference.clone();
    let mut but_parties: Vec<usize> = Vec::new();
    loop {
        let newly: Vec<usize> = (0..np)
            .filter(|&j| elig.national[j] && !frozen[j] && col[j] > targets[j])
            .collect();
        if newly.is_empty() {
            break;
        }
        for &j in &newly {
            frozen[j] = true;
        }
        but_parties.extend(newly);
        let frozen_seats: u32 = (0..np).filter(|&j| frozen[j]).map(|j| col[j]).sum();
        let include: Vec<bool> = (0..np).map(|j| elig.national[j] && !frozen[j]).collect();
        if include.iter().all(|&b| !b) {
            return Err(Error::Internal(
                "every eligible party exceeded its national total".into(),
            ));
        }
        targets = allocate_masked(
            &natl,
            &include,
            rules.house_size - outside - frozen_seats,
            &rules.national_divisors,
            derive_tie(rules.tie, salt::NATIONAL),
        )?;
    }
    but_parties.sort_unstable();

    let effective: Vec<u32> = (0..np)
        .map(|j| {
            if !elig.national[j] || frozen[j] {
                col[j]
            } else {
                targets[j]
            }
        })
        .collect();
    if effective.iter().map(|&t| u64::from(t)).sum::<u64>() != u64::from(rules.house_size) {
        return Err(Error::Internal(
            "effective party totals do not sum to the house size".into(),
        ));
    }

    let mut adjustment = vec![vec![0u32; np]; nc];
    for j in 0..np {
        if !elig.national[j] || frozen[j] {
            continue;
        }
        let deficit = effective[j] - col[j];
        if deficit == 0 {
            continue;
        }
        let column = input.column(j);
        let initial: Vec<u32> = (0..nc).map(|i| permanent[i][j]).collect();
        let awards = award_sequence_from(
            &column,
            &initial,
            deficit,
            &rules.adjustment_divisors,
            derive_tie(rules.tie, salt::ADJUSTMENT + j as u64),
        )?;
        for a in awards {
            adjustment[a.entity][j] += 1;
            log.push(SeatAward {
                seat: log.len() as u32 + 1,
                constituency: a.entity,
                party: j,
                phase: Phase::Adjustment,
                tied: a.tied,
                local_only: false,
            });
        }
    }

    Ok(SeatOutcome {
        permanent,
        adjustment,
        reference,
        targets: effective,
        award_log: log,
        but_parties,
        stop_index: rules.permanent_seats,
        adjustment_count: rules.house_size - rules.permanent_seats,
    })
}

/// The dynamic-adjustment system.
///
/// Seats are handed to constituencies in the order of a precomputed list
/// and filled by the leading party of each row, until one more seat would
/// push some party past its nationwide total; every remaining seat becomes
/// an adjustment seat. Column sums are hard constraints, so every party
/// ends exactly on its target.
pub fn allocate_dynamic(
    input: &ElectionInput,
    rules: &ElectionRules,
    opts: &DynamicOptions,
) -> Result<SeatOutcome> {
    rules.validate()?;
    opts.validate(rules, input.n_constituencies())?;
    let np = input.n_parties();
    let nc = input.n_constituencies();
    let house = rules.house_size;
    let elig = eligibility(input, rules);

    let natl_awards = national_award_list(input, rules)?;
    let mut reference = vec![0u32; np];
    for a in &natl_awards {
        reference[a.entity] += 1;
    }
    let mut targets = reference.clone();

    let floor = opts.constituency_floor.unwrap_or(0);
    let min_perm = opts.min_permanent.unwrap_or(0);

    let mut rows = Rows::new(input, &elig, &rules.within_constituency_divisors);
    let mut col = vec![0u32; np];
    let mut log: Vec<SeatAward> = Vec::with_capacity(house as usize);
    let mut placed: u32 = 0;
    let mut breaker = TieBreaker::new(derive_tie(rules.tie, salt::WALK));
    // Pointer into the tail of the national award list; each seat taken by
    // a locally-eligible-only party consumes (decrements) one tail award.
    let mut natl_tail = natl_awards.len();

    macro_rules! place {
        ($i:expr, $j:expr, $tied:expr, $local_only:expr) => {{
            rows.counts[$i][$j] += 1;
            col[$j] += 1;
            placed += 1;
            log.push(SeatAward {
                seat: placed,
                constituency: $i,
                party: $j,
                phase: Phase::Permanent,
                tied: $tied,
                local_only: $local_only,
            });
        }};
    }

    // A placement that must not push any party past its target: the best
    // under-target nationally eligible party of the row.
    macro_rules! forced_leader {
        ($i:expr) => {
            rows.leader_where($i, &mut breaker, |j| {
                elig.national[j] && col[j] < targets[j]
            })
        };
    }

    // Floor seats are granted before the list is consumed.
    for i in 0..nc {
        for _ in 0..floor {
            match forced_leader!(i) {
                Some((j, tied)) => place!(i, j, tied, false),
                None => {
                    return Err(Error::InfeasibleFloor(format!(
                        "constituency {:?} cannot absorb its floor seat without pushing a \
                         party past its national total",
                        input.constituencies()[i]
                    )))
                }
            }
        }
    }

    let list: Vec<Award> = match rules.list_method {
        ListMethod::HighestAverages => {
            let initial = vec![floor; nc];
            // The list only ever needs house - placed entries when nothing
            // is skipped; skipped entries (possible under a forced minimum)
            // consume extra ones, so generate a full house worth.
            award_sequence_from(
                input.entitled(),
                &initial,
                house,
                &rules.list_divisors,
                derive_tie(rules.tie, salt::LIST),
            )?
        }
        ListMethod::HamiltonIncrement => {
            hamilton_increment_list(input.entitled(), house, derive_tie(rules.tie, salt::LIST))?
        }
    };

    let mut list_iter = list.into_iter();
    let mut exceedance_seen = false;
    while placed < house {
        // Once the stop condition has fired inside the forced zone, the
        // permanent phase ends at exactly the forced minimum.
        if exceedance_seen && placed >= min_perm {
            break;
        }
        let Some(entry) = list_iter.next() else {
            if exceedance_seen {
                break;
            }
            return Err(Error::Internal("ordered constituency list exhausted".into()));
        };
        let i = entry.entity;
        let Some((j, tied)) = rows.leader(i, &mut breaker) else {
            return Err(Error::InvalidInput(format!(
                "constituency {:?} is next in line but has no eligible votes",
                input.constituencies()[i]
            )));
        };

        let would_stop = if elig.national[j] {
            col[j] + 1 > targets[j]
        } else {
            // A party above only the constituency threshold takes the seat
            // if the holder of the last national award can pay for it.
            if natl_tail == 0 {
                true
            } else {
                let t = natl_awards[natl_tail - 1].entity;
                if col[t] >= targets[t] {
                    // The paying party has all its seats placed already: it
                    // keeps them and the permanent phase ends here.
                    true
                } else {
                    targets[t] -= 1;
                    natl_tail -= 1;
                    place!(i, j, tied, true);
                    continue;
                }
            }
        };

        if would_stop {
            if placed < min_perm {
                exceedance_seen = true;
                // Forced zone: the seat may go to the best under-target
                // party of the row; if none exists the entry is passed over.
                if let Some((k, tied2)) = forced_leader!(i) {
                    place!(i, k, tied2, false);
                }
                continue;
            }
            break; // the stop for permanent seats
        }
        place!(i, j, tied, false);
    }

    let stop_index = placed;
    let permanent = rows.counts;

    let mut adjustment = vec![vec![0u32; np]; nc];
    for j in 0..np {
        if !elig.national[j] {
            continue;
        }
        debug_assert!(col[j] <= targets[j]);
        let deficit = targets[j] - col[j];
        if deficit == 0 {
            continue;
        }
        let column = input.column(j);
        let initial: Vec<u32> = (0..nc).map(|i| permanent[i][j]).collect();
        let awards = award_sequence_from(
            &column,
            &initial,
            deficit,
            &rules.adjustment_divisors,
            derive_tie(rules.tie, salt::ADJUSTMENT + j as u64),
        )?;
        for a in awards {
            adjustment[a.entity][j] += 1;
            placed += 1;
            log.push(SeatAward {
                seat: placed,
                constituency: a.entity,
                party: j,
                phase: Phase::Adjustment,
                tied: a.tied,
                local_only: false,
            });
        }
    }
    if placed != house {
        return Err(Error::Internal(format!(
            "placed {placed} seats in a house of {house}"
        )));
    }

    Ok(SeatOutcome {
        permanent,
        adjustment,
        reference,
        targets,
        award_log: log,
        but_parties: Vec::new(),
        stop_index,
        adjustment_count: house - stop_index,
    })
}

/// Run the selected system.
pub fn allocate(
    input: &ElectionInput,
    rules: &ElectionRules,
    system: SystemKind,
    opts: &DynamicOptions,
) -> Result<SeatOutcome> {
    match system {
        SystemKind::Current => allocate_current(input, rules),
        SystemKind::Dynamic => allocate_dynamic(input, rules, opts),
    }
}

/// Seat change at one cell between two outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDiff {
    pub constituency: usize,
    pub party: usize,
    pub permanent_before: u32,
    pub adjustment_before: u32,
    pub permanent_after: u32,
    pub adjustment_after: u32,
}

impl CellDiff {
    pub fn total_change(&self) -> i64 {
        i64::from(self.permanent_after + self.adjustment_after)
            - i64::from(self.permanent_before + self.adjustment_before)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub before: SeatOutcome,
    pub after: SeatOutcome,
    /// Every cell whose seat count changed, row-major.
    pub diff: Vec<CellDiff>,
}

/// Re-run the chosen system with signed vote deltas applied and report
/// every cell whose seat count changed. Eligibility is recomputed from the
/// modified votes, so thresholds may flip.
pub fn what_if(
    input: &ElectionInput,
    rules: &ElectionRules,
    system: SystemKind,
    opts: &DynamicOptions,
    deltas: &[VoteDelta],
) -> Result<WhatIfResult> {
    let before = allocate(input, rules, system, opts)?;
    let modified = input.with_deltas(deltas)?;
    let after = allocate(&modified, rules, system, opts)?;
    let mut diff = Vec::new();
    for i in 0..input.n_constituencies() {
        for j in 0..input.n_parties() {
            if before.cell_total(i, j) != after.cell_total(i, j) {
                diff.push(CellDiff {
                    constituency: i,
                    party: j,
                    permanent_before: before.permanent[i][j],
                    adjustment_before: before.adjustment[i][j],
                    permanent_after: after.permanent[i][j],
                    adjustment_after: after.adjustment[i][j],
                });
            }
        }
    }
    Ok(WhatIfResult { before, after, diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::ElectionRules;

    fn example2_first() -> ElectionInput {
        ElectionInput::new(
            vec!["A".into(), "B".into()],
            vec!["I".into(), "II".into(), "III".into()],
            vec![vec![97, 98], vec![101, 100], vec![102, 101]],
            vec![195, 201, 203],
        )
        .unwrap()
    }

    fn example2_second() -> ElectionInput {
        ElectionInput::new(
            vec!["A".into(), "B".into()],
            vec!["I".into(), "II".into(), "III".into()],
            vec![vec![96, 99], vec![101, 100], vec![102, 101]],
            vec![195, 201, 203],
        )
        .unwrap()
    }

    #[test]
    fn dynamic_three_seat_example_before() {
        let input = example2_first();
        let rules = ElectionRules::theoretical(3);
        let out = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        assert_eq!(out.reference, vec![2, 1]);
        // A wins III and II, B wins I; every seat is permanent.
        assert_eq!(out.permanent, vec![vec![0, 1], vec![1, 0], vec![1, 0]]);
        assert_eq!(out.adjustment_count, 0);
        assert_eq!(out.stop_index, 3);
        let order: Vec<(usize, usize)> = out
            .award_log
            .iter()
            .map(|a| (a.constituency, a.party))
            .collect();
        assert_eq!(order, vec![(2, 0), (1, 0), (0, 1)]);
    }

    #[test]
    fn dynamic_three_seat_example_after_one_vote_moves() {
        let input = example2_second();
        let rules = ElectionRules::theoretical(3);
        let out = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        assert_eq!(out.reference, vec![1, 2]);
        // A takes III, the stop occurs, B gets adjustment seats in III and II.
        assert_eq!(out.stop_index, 1);
        assert_eq!(out.adjustment_count, 2);
        assert_eq!(out.permanent, vec![vec![0, 0], vec![0, 0], vec![1, 0]]);
        assert_eq!(out.adjustment, vec![vec![0, 0], vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn what_if_one_vote_costs_the_candidate_her_seat() {
        let input = example2_first();
        let rules = ElectionRules::theoretical(3);
        let deltas = [
            VoteDelta {
                constituency: 0,
                party: 0,
                delta: -1,
            },
            VoteDelta {
                constituency: 0,
                party: 1,
                delta: 1,
            },
        ];
        let result = what_if(&input, &rules, SystemKind::Dynamic, &DynamicOptions::default(), &deltas)
            .unwrap();
        // B loses I, gains II and III; A loses II.
        let changes: Vec<(usize, usize, i64)> = result
            .diff
            .iter()
            .map(|d| (d.constituency, d.party, d.total_change()))
            .collect();
        assert_eq!(changes, vec![(0, 1, -1), (1, 0, -1), (1, 1, 1), (2, 1, 1)]);
        assert!(what_if(
            &input,
            &rules,
            SystemKind::Dynamic,
            &DynamicOptions::default(),
            &[]
        )
        .unwrap()
        .diff
        .is_empty());
    }

    #[test]
    fn dynamic_lopsided_example() {
        // 110 constituencies; B leads in the first ten small ones.
        let mut votes = Vec::new();
        let mut entitled = Vec::new();
        let mut names = Vec::new();
        for i in 0..110 {
            names.push(format!("C{}", i + 1));
            if i < 10 {
                votes.push(vec![300u64, 301]);
                entitled.push(601);
            } else {
                votes.push(vec![600, 0]);
                entitled.push(600);
            }
        }
        let input =
            ElectionInput::new(vec!["A".into(), "B".into()], names, votes, entitled).unwrap();
        let rules = ElectionRules::theoretical(208);
        let out = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        assert_eq!(out.reference, vec![199, 9]);
        assert_eq!(out.stop_index, 9);
        assert_eq!(out.adjustment_count, 199);
        assert_eq!(out.party_totals(), vec![199, 9]);
        // The nine permanent seats are B's, in the first nine constituencies.
        for a in out.award_log.iter().take(9) {
            assert_eq!(a.party, 1);
            assert!(a.constituency < 9);
            assert_eq!(a.phase, Phase::Permanent);
        }
    }

    #[test]
    fn single_constituency_current_is_a_row_allocation() {
        // Halland 2006 as a stand-alone ten-seat contest.
        let input = ElectionInput::new(
            vec![
                "M".into(),
                "C".into(),
                "FP".into(),
                "KD".into(),
                "S".into(),
                "VP".into(),
                "MP".into(),
            ],
            vec!["Hallands län".into()],
            vec![vec![53257, 18589, 13798, 11987, 56747, 7110, 7236]],
            vec![168724],
        )
        .unwrap();
        let mut rules = ElectionRules::swedish();
        rules.house_size = 10;
        rules.permanent_seats = 10;
        let out = allocate_current(&input, &rules).unwrap();
        assert_eq!(out.permanent[0], vec![3, 1, 1, 1, 4, 0, 0]);
        assert_eq!(out.adjustment_count, 0);

        // With 1337 fewer votes the first-seat bar is no longer cleared and
        // the last seat goes to M instead.
        let result = what_if(
            &input,
            &rules,
            SystemKind::Current,
            &DynamicOptions::default(),
            &[VoteDelta {
                constituency: 0,
                party: 3,
                delta: -1337,
            }],
        )
        .unwrap();
        assert_eq!(result.after.permanent[0], vec![4, 1, 1, 0, 4, 0, 0]);
        let changes: Vec<(usize, i64)> = result
            .diff
            .iter()
            .map(|d| (d.party, d.total_change()))
            .collect();
        assert_eq!(changes, vec![(0, 1), (3, -1)]);
    }

    #[test]
    fn dynamic_respects_min_permanent() {
        let input = example2_second();
        let rules = ElectionRules::theoretical(3);
        let opts = DynamicOptions {
            min_permanent: Some(2),
            constituency_floor: None,
        };
        let out = allocate_dynamic(&input, &rules, &opts).unwrap();
        // Without the minimum the stop lands after one seat; the forced
        // zone places a second permanent seat and ends exactly there.
        assert_eq!(out.stop_index, 2);
        assert_eq!(out.party_totals(), vec![1, 2]);
        assert_eq!(out.targets, vec![1, 2]);
    }

    #[test]
    fn dynamic_constituency_floor_pre_grants() {
        let input = example2_first();
        let rules = ElectionRules::theoretical(3);
        let opts = DynamicOptions {
            min_permanent: None,
            constituency_floor: Some(1),
        };
        let out = allocate_dynamic(&input, &rules, &opts).unwrap();
        // Every constituency holds exactly its floor seat: B leads I,
        // A leads II and III, which happens to match the reference totals.
        assert_eq!(out.permanent, vec![vec![0, 1], vec![1, 0], vec![1, 0]]);
        assert_eq!(out.party_totals(), vec![2, 1]);
        let err = allocate_dynamic(
            &input,
            &rules,
            &DynamicOptions {
                min_permanent: None,
                constituency_floor: Some(2),
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleFloor(_)));
    }

    #[test]
    fn twelve_percent_party_takes_a_permanent_seat_and_pays_for_it() {
        // Party L is below 4% nationally but above 12% in constituency I,
        // which is first in line. The holder of the last national award
        // pays with one seat from its total.
        let input = ElectionInput::new(
            vec!["A".into(), "B".into(), "L".into()],
            vec!["I".into(), "II".into()],
            vec![vec![50, 30, 20], vec![970, 30, 0]],
            vec![100, 1000],
        )
        .unwrap();
        let mut rules = ElectionRules::theoretical(4);
        rules.national_threshold = crate::apportion::Ratio { num: 4, den: 100 };
        rules.constituency_threshold = crate::apportion::Ratio { num: 12, den: 100 };
        let out = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        // National reference over A and B only: A 1020, B 60 of 4 seats.
        assert_eq!(out.reference, vec![4, 0, 0]);
        // II leads the list and A sweeps it; L never leads a row, so no
        // flagged award appears and the totals are bound by the targets.
        assert!(out.award_log.iter().all(|a| !a.local_only));
        assert_eq!(out.party_totals().iter().sum::<u32>(), 4);
        assert_eq!(out.targets.iter().sum::<u32>(), 4);

        // Make L the leader of I outright, with I first in the list.
        let input = ElectionInput::new(
            vec!["A".into(), "B".into(), "L".into()],
            vec!["I".into(), "II".into()],
            vec![vec![10, 30, 60], vec![1970, 130, 0]],
            vec![2300, 2000],
        )
        .unwrap();
        let out = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        // L holds 60 of 2200 votes (2.7%) nationally but 60% in I: it takes
        // I's seat and the last national award holder (A) pays for it.
        assert_eq!(out.reference, vec![4, 0, 0]);
        assert_eq!(out.targets, vec![3, 0, 0]);
        assert_eq!(out.party_totals(), vec![3, 0, 1]);
        let first = &out.award_log[0];
        assert!(first.local_only && first.party == 2 && first.constituency == 0);
    }
}
