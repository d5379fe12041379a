//! Disproportionality measures.
//!
//! Two indices over vote shares vs seat shares:
//!
//! * `LH` — half the percentage-point sum of absolute share gaps,
//!   `50 * sum |v_i/V - s_i/S|`.
//! * `SL` — share-weighted squared gaps, `100 * sum (V/v_i) * (v_i/V - s_i/S)^2`,
//!   the measure the odd-number method itself minimizes. A given absolute
//!   gap weighs more for a smaller entity.
//!
//! Both are accumulated as exact rationals and only rendered to decimals at
//! the edge.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::election::{eligibility, ElectionInput, ElectionRules};
use crate::error::{Error, Result};
use crate::systems::SeatOutcome;

/// Entity labels with raw weights (votes or seats) over a positive basis.
/// The basis is always the sum of the included entities' weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareVector {
    labels: Vec<String>,
    weights: Vec<u64>,
    basis: u64,
}

impl ShareVector {
    pub fn new(labels: Vec<String>, weights: Vec<u64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::MismatchedEntities(format!(
                "{} labels, {} weights",
                labels.len(),
                weights.len()
            )));
        }
        let basis: u64 = weights.iter().sum();
        if basis == 0 {
            return Err(Error::ZeroBasis("share vector sums to zero"));
        }
        Ok(ShareVector {
            labels,
            weights,
            basis,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn basis(&self) -> u64 {
        self.basis
    }

    fn share(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.weights[i]), BigInt::from(self.basis))
    }
}

fn check_matching(votes: &ShareVector, seats: &ShareVector) -> Result<()> {
    if votes.labels != seats.labels {
        return Err(Error::MismatchedEntities(
            "vote and seat vectors cover different entities".into(),
        ));
    }
    Ok(())
}

/// Per-entity terms of the LH measure; their sum is the measure.
pub fn lh_contributions(votes: &ShareVector, seats: &ShareVector) -> Result<Vec<BigRational>> {
    check_matching(votes, seats)?;
    let fifty = BigRational::from_integer(BigInt::from(50));
    Ok((0..votes.labels.len())
        .map(|i| &fifty * (votes.share(i) - seats.share(i)).abs())
        .collect())
}

pub fn lh_measure(votes: &ShareVector, seats: &ShareVector) -> Result<BigRational> {
    Ok(lh_contributions(votes, seats)?.into_iter().sum())
}

/// Per-entity terms of the SL measure; their sum is the measure.
///
/// Entities with zero votes and zero seats contribute nothing; zero votes
/// with seats is a singular term and rejected.
pub fn sl_contributions(votes: &ShareVector, seats: &ShareVector) -> Result<Vec<BigRational>> {
    check_matching(votes, seats)?;
    let hundred = BigRational::from_integer(BigInt::from(100));
    let mut terms = Vec::with_capacity(votes.labels.len());
    for i in 0..votes.labels.len() {
        if votes.weights[i] == 0 {
            if seats.weights[i] != 0 {
                return Err(Error::SingularTerm {
                    entity: votes.labels[i].clone(),
                    seats: seats.weights[i] as u32,
                });
            }
            terms.push(BigRational::zero());
            continue;
        }
        let vote_share = votes.share(i);
        let gap = &vote_share - seats.share(i);
        terms.push(&hundred * (&gap * &gap) / vote_share);
    }
    Ok(terms)
}

pub fn sl_measure(votes: &ShareVector, seats: &ShareVector) -> Result<BigRational> {
    Ok(sl_contributions(votes, seats)?.into_iter().sum())
}

/// Render an exact rational to `places` decimals, rounding halves away
/// from zero.
pub fn render_decimal(value: &BigRational, places: u32) -> String {
    let negative = value.is_negative();
    let scale = BigInt::from(10u32).pow(places);
    let scaled = value.abs() * BigRational::from_integer(scale.clone());
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let mut q = &num / &den;
    let rem = &num % &den;
    if &rem * 2 >= den {
        q += 1;
    }
    let whole = &q / &scale;
    let frac = &q % &scale;
    let sign = if negative && !q.is_zero() { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>width$}", width = places as usize)
    }
}

/// Which entities the shares range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    /// Parties above the national threshold.
    Party,
    /// All constituencies.
    Constituency,
    /// All (constituency, party) cells of parties above the national
    /// threshold.
    Pair,
}

/// Basis of the constituency category: entitled-voter counts (default) or
/// the cast votes of the listed parties.
///
/// In this category the seat distribution acts as the reference of the SL
/// measure (its shares sit in the weight position), which together with the
/// entitled basis is the reading that reproduces the historical values for
/// the bundled 2010 dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstituencyBasis {
    CastVotes,
    #[default]
    Entitled,
}

/// One measure, carried exactly and rendered two ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    /// Exact value as `numerator/denominator`.
    pub exact: String,
    pub value: f64,
    /// Two-decimal rendering, halves away from zero.
    pub rounded: String,
}

impl MeasureValue {
    fn from_rational(r: &BigRational) -> Self {
        MeasureValue {
            exact: format!("{}/{}", r.numer(), r.denom()),
            value: r.to_f64().unwrap_or(f64::NAN),
            rounded: render_decimal(r, 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub label: String,
    pub vote_share: f64,
    pub seat_share: f64,
    pub lh: f64,
    pub sl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisproportionalityReport {
    pub category: Category,
    pub lh: MeasureValue,
    pub sl: MeasureValue,
    pub contributions: Vec<Contribution>,
}

/// Build both measures plus per-entity contributions for one category of
/// one allocation outcome.
pub fn report(
    input: &ElectionInput,
    rules: &ElectionRules,
    outcome: &SeatOutcome,
    category: Category,
    basis: ConstituencyBasis,
) -> Result<DisproportionalityReport> {
    if outcome.n_constituencies() != input.n_constituencies()
        || outcome.n_parties() != input.n_parties()
    {
        return Err(Error::MismatchedEntities(
            "outcome shape does not match the input".into(),
        ));
    }
    let elig = eligibility(input, rules);
    let (votes, seats) = match category {
        Category::Party => {
            let totals = input.national_totals();
            let party_seats = outcome.party_totals();
            let mut labels = Vec::new();
            let mut v = Vec::new();
            let mut s = Vec::new();
            for j in 0..input.n_parties() {
                if elig.national[j] {
                    labels.push(input.parties()[j].clone());
                    v.push(totals[j]);
                    s.push(u64::from(party_seats[j]));
                }
            }
            (
                ShareVector::new(labels.clone(), v)?,
                ShareVector::new(labels, s)?,
            )
        }
        Category::Constituency => {
            let labels: Vec<String> = input.constituencies().to_vec();
            let v: Vec<u64> = match basis {
                ConstituencyBasis::CastVotes => (0..input.n_constituencies())
                    .map(|i| input.row_total(i))
                    .collect(),
                ConstituencyBasis::Entitled => input.entitled().to_vec(),
            };
            let s: Vec<u64> = outcome
                .constituency_totals()
                .iter()
                .map(|&x| u64::from(x))
                .collect();
            (
                ShareVector::new(labels.clone(), v)?,
                ShareVector::new(labels, s)?,
            )
        }
        Category::Pair => {
            let mut labels = Vec::new();
            let mut v = Vec::new();
            let mut s = Vec::new();
            for i in 0..input.n_constituencies() {
                for j in 0..input.n_parties() {
                    if elig.national[j] {
                        labels.push(format!(
                            "{} / {}",
                            input.constituencies()[i],
                            input.parties()[j]
                        ));
                        v.push(input.vote(i, j));
                        s.push(u64::from(outcome.cell_total(i, j)));
                    }
                }
            }
            (
                ShareVector::new(labels.clone(), v)?,
                ShareVector::new(labels, s)?,
            )
        }
    };

    let lh_terms = lh_contributions(&votes, &seats)?;
    // Constituency category: seat shares are the SL reference weight.
    let sl_terms = match category {
        Category::Constituency => sl_contributions(&seats, &votes)?,
        Category::Party | Category::Pair => sl_contributions(&votes, &seats)?,
    };
    let lh: BigRational = lh_terms.iter().cloned().sum();
    let sl: BigRational = sl_terms.iter().cloned().sum();
    let contributions = (0..votes.labels.len())
        .map(|i| Contribution {
            label: votes.labels[i].clone(),
            vote_share: votes.share(i).to_f64().unwrap_or(f64::NAN),
            seat_share: seats.share(i).to_f64().unwrap_or(f64::NAN),
            lh: lh_terms[i].to_f64().unwrap_or(f64::NAN),
            sl: sl_terms[i].to_f64().unwrap_or(f64::NAN),
        })
        .collect();
    Ok(DisproportionalityReport {
        category,
        lh: MeasureValue::from_rational(&lh),
        sl: MeasureValue::from_rational(&sl),
        contributions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{DynamicOptions, SystemKind};
    use crate::systems::allocate;

    fn shares(labels: &[&str], weights: &[u64]) -> ShareVector {
        ShareVector::new(
            labels.iter().map(|s| s.to_string()).collect(),
            weights.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn proportional_seats_measure_zero() {
        let votes = shares(&["A", "B"], &[300, 100]);
        let seats = shares(&["A", "B"], &[3, 1]);
        assert!(lh_measure(&votes, &seats).unwrap().is_zero());
        assert!(sl_measure(&votes, &seats).unwrap().is_zero());
    }

    #[test]
    fn measures_are_scale_invariant_in_votes() {
        let seats = shares(&["A", "B", "C"], &[5, 3, 2]);
        let v1 = shares(&["A", "B", "C"], &[52, 31, 17]);
        let v7 = shares(&["A", "B", "C"], &[52 * 7, 31 * 7, 17 * 7]);
        assert_eq!(lh_measure(&v1, &seats).unwrap(), lh_measure(&v7, &seats).unwrap());
        assert_eq!(sl_measure(&v1, &seats).unwrap(), sl_measure(&v7, &seats).unwrap());
    }

    #[test]
    fn sl_weighs_small_entities_harder() {
        // Both gaps are one percentage point; the 5% entity weighs double.
        let votes = shares(&["small", "large", "rest"], &[5, 10, 85]);
        let seats = shares(&["small", "large", "rest"], &[6, 11, 83]);
        let terms = sl_contributions(&votes, &seats).unwrap();
        assert!(terms[0] > terms[1]);
        let ratio = &terms[0] / &terms[1];
        assert_eq!(ratio, BigRational::from_integer(2.into()));
    }

    #[test]
    fn singular_term_is_rejected() {
        let votes = shares(&["A", "B"], &[100, 0]);
        let seats = shares(&["A", "B"], &[3, 1]);
        assert!(matches!(
            sl_measure(&votes, &seats),
            Err(Error::SingularTerm { .. })
        ));
        // Zero votes with zero seats is fine and contributes nothing.
        let seats = shares(&["A", "B"], &[4, 0]);
        assert!(sl_measure(&votes, &seats).unwrap().is_zero());
        assert!(lh_measure(&votes, &seats).unwrap().is_zero());
    }

    #[test]
    fn mismatched_entities_are_rejected() {
        let votes = shares(&["A", "B"], &[100, 50]);
        let seats = shares(&["A", "C"], &[2, 1]);
        assert!(matches!(
            lh_measure(&votes, &seats),
            Err(Error::MismatchedEntities(_))
        ));
    }

    #[test]
    fn decimal_rendering_rounds_half_away_from_zero() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(render_decimal(&r(201, 200), 2), "1.01"); // 1.005
        assert_eq!(render_decimal(&r(-201, 200), 2), "-1.01");
        assert_eq!(render_decimal(&r(2449, 10000), 2), "0.24");
        assert_eq!(render_decimal(&r(1, 3), 4), "0.3333");
        assert_eq!(render_decimal(&r(999, 1000), 0), "1");
        assert_eq!(render_decimal(&r(115, 100), 2), "1.15");
    }

    #[test]
    fn pair_category_degenerates_to_party_on_single_constituency() {
        let input = ElectionInput::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec!["only".into()],
            vec![vec![500, 300, 200]],
            vec![1000],
        )
        .unwrap();
        let rules = ElectionRules::theoretical(10);
        let outcome =
            allocate(&input, &rules, SystemKind::Dynamic, &DynamicOptions::default()).unwrap();
        let party =
            report(&input, &rules, &outcome, Category::Party, ConstituencyBasis::CastVotes)
                .unwrap();
        let pair = report(&input, &rules, &outcome, Category::Pair, ConstituencyBasis::CastVotes)
            .unwrap();
        assert_eq!(party.lh.exact, pair.lh.exact);
        assert_eq!(party.sl.exact, pair.sl.exact);
    }
}
