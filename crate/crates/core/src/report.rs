//! Report documents: one serializable structure per command, with human
//! table renderings derived from the structure (never computed separately).

use serde::{Deserialize, Serialize};

use crate::election::{ElectionInput, SystemKind, VoteDelta};
use crate::metrics::{ConstituencyBasis, DisproportionalityReport};
use crate::montecarlo::{BatchStats, NonMonoTally, PerturbationConfig};
use crate::systems::{Phase, SeatOutcome, WhatIfResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AwardEntry {
    pub seat: u32,
    pub constituency: String,
    pub party: String,
    pub phase: Phase,
    pub tied: bool,
    pub local_only: bool,
}

/// Full allocation result with labels resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub system: SystemKind,
    pub house_size: u32,
    pub parties: Vec<String>,
    pub constituencies: Vec<String>,
    /// First-pass nationwide proportional totals per party.
    pub reference: Vec<u32>,
    /// Effective totals the allocation was bound to.
    pub targets: Vec<u32>,
    pub permanent: Vec<Vec<u32>>,
    pub adjustment: Vec<Vec<u32>>,
    pub party_totals: Vec<u32>,
    pub constituency_totals: Vec<u32>,
    pub but_parties: Vec<String>,
    pub stop_index: u32,
    pub adjustment_count: u32,
    pub ties_broken: u32,
    pub award_log: Vec<AwardEntry>,
}

impl AllocationReport {
    pub fn new(input: &ElectionInput, system: SystemKind, outcome: &SeatOutcome) -> Self {
        AllocationReport {
            system,
            house_size: outcome.total_seats(),
            parties: input.parties().to_vec(),
            constituencies: input.constituencies().to_vec(),
            reference: outcome.reference.clone(),
            targets: outcome.targets.clone(),
            permanent: outcome.permanent.clone(),
            adjustment: outcome.adjustment.clone(),
            party_totals: outcome.party_totals(),
            constituency_totals: outcome.constituency_totals(),
            but_parties: outcome
                .but_parties
                .iter()
                .map(|&j| input.parties()[j].clone())
                .collect(),
            stop_index: outcome.stop_index,
            adjustment_count: outcome.adjustment_count,
            ties_broken: outcome.award_log.iter().filter(|a| a.tied).count() as u32,
            award_log: outcome
                .award_log
                .iter()
                .map(|a| AwardEntry {
                    seat: a.seat,
                    constituency: input.constituencies()[a.constituency].clone(),
                    party: input.parties()[a.party].clone(),
                    phase: a.phase,
                    tied: a.tied,
                    local_only: a.local_only,
                })
                .collect(),
        }
    }

    /// Seat matrix as text: one row per constituency, cells `perm+adj`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let name_width = self
            .constituencies
            .iter()
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(0)
            .max("constituency".len());
        let col_width = self
            .parties
            .iter()
            .map(|p| p.chars().count())
            .max()
            .unwrap_or(0)
            .max(5);

        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
        out.push_str(&pad("constituency", name_width));
        for p in &self.parties {
            out.push_str(&format!("  {}", pad(p, col_width)));
        }
        out.push_str("  total\n");
        for (i, c) in self.constituencies.iter().enumerate() {
            out.push_str(&pad(c, name_width));
            for j in 0..self.parties.len() {
                let cell = match self.adjustment[i][j] {
                    0 => format!("{}", self.permanent[i][j]),
                    a => format!("{}+{}", self.permanent[i][j], a),
                };
                out.push_str(&format!("  {}", pad(&cell, col_width)));
            }
            out.push_str(&format!("  {}\n", self.constituency_totals[i]));
        }
        out.push_str(&pad("total", name_width));
        for (j, _) in self.parties.iter().enumerate() {
            let perm: u32 = (0..self.constituencies.len())
                .map(|i| self.permanent[i][j])
                .sum();
            let adj: u32 = (0..self.constituencies.len())
                .map(|i| self.adjustment[i][j])
                .sum();
            let cell = if adj == 0 {
                format!("{perm}")
            } else {
                format!("{perm}+{adj}")
            };
            out.push_str(&format!("  {}", pad(&cell, col_width)));
        }
        out.push_str(&format!("  {}\n", self.house_size));

        out.push_str(&pad("reference", name_width));
        for (j, _) in self.parties.iter().enumerate() {
            out.push_str(&format!("  {}", pad(&self.reference[j].to_string(), col_width)));
        }
        out.push('\n');
        out.push_str(&pad("final", name_width));
        for (j, _) in self.parties.iter().enumerate() {
            out.push_str(&format!(
                "  {}",
                pad(&self.party_totals[j].to_string(), col_width)
            ));
        }
        out.push('\n');
        match self.system {
            SystemKind::Current => {
                if self.but_parties.is_empty() {
                    out.push_str("no party kept excess permanent seats\n");
                } else {
                    out.push_str(&format!(
                        "kept excess permanent seats: {}\n",
                        self.but_parties.join(", ")
                    ));
                }
            }
            SystemKind::Dynamic => {
                out.push_str(&format!(
                    "stop for permanent seats after {} seat(s); {} adjustment seat(s)\n",
                    self.stop_index, self.adjustment_count
                ));
            }
        }
        if self.ties_broken > 0 {
            out.push_str(&format!("ties broken: {}\n", self.ties_broken));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub system: SystemKind,
    pub basis: ConstituencyBasis,
    #[serde(flatten)]
    pub measures: DisproportionalityReport,
}

impl MetricsReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "category {:?}, system {:?}: LH = {}, SL = {}\n",
            self.measures.category, self.system, self.measures.lh.rounded, self.measures.sl.rounded
        ));
        out.push_str(&format!(
            "exact: LH = {} ({}), SL = {} ({})\n",
            self.measures.lh.exact, self.measures.lh.value,
            self.measures.sl.exact, self.measures.sl.value
        ));
        for c in &self.measures.contributions {
            out.push_str(&format!(
                "  {:<30} votes {:>8.4}%  seats {:>8.4}%  lh {:>8.5}  sl {:>8.5}\n",
                c.label,
                c.vote_share * 100.0,
                c.seat_share * 100.0,
                c.lh,
                c.sl
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfCell {
    pub constituency: String,
    pub party: String,
    pub permanent_before: u32,
    pub adjustment_before: u32,
    pub permanent_after: u32,
    pub adjustment_after: u32,
    pub change: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfReport {
    pub system: SystemKind,
    pub deltas: Vec<(String, String, i64)>,
    pub changed_cells: Vec<WhatIfCell>,
    pub before: AllocationReport,
    pub after: AllocationReport,
}

impl WhatIfReport {
    pub fn new(
        input: &ElectionInput,
        system: SystemKind,
        deltas: &[VoteDelta],
        result: &WhatIfResult,
    ) -> Self {
        WhatIfReport {
            system,
            deltas: deltas
                .iter()
                .map(|d| {
                    (
                        input.constituencies()[d.constituency].clone(),
                        input.parties()[d.party].clone(),
                        d.delta,
                    )
                })
                .collect(),
            changed_cells: result
                .diff
                .iter()
                .map(|d| WhatIfCell {
                    constituency: input.constituencies()[d.constituency].clone(),
                    party: input.parties()[d.party].clone(),
                    permanent_before: d.permanent_before,
                    adjustment_before: d.adjustment_before,
                    permanent_after: d.permanent_after,
                    adjustment_after: d.adjustment_after,
                    change: d.total_change(),
                })
                .collect(),
            before: AllocationReport::new(input, system, &result.before),
            after: AllocationReport::new(input, system, &result.after),
        }
    }

    /// Only the changed cells.
    pub fn render(&self) -> String {
        if self.changed_cells.is_empty() {
            return "no seat changes\n".to_string();
        }
        let mut out = String::new();
        for c in &self.changed_cells {
            out.push_str(&format!(
                "{} / {}: {}+{} -> {}+{} ({}{})\n",
                c.constituency,
                c.party,
                c.permanent_before,
                c.adjustment_before,
                c.permanent_after,
                c.adjustment_after,
                if c.change >= 0 { "+" } else { "" },
                c.change
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub config: PerturbationConfig,
    pub threads: usize,
    pub mean_adjustment: f64,
    pub max_adjustment: u32,
    pub stddev_adjustment: f64,
    pub histogram: Vec<(u32, u32)>,
    pub but_count: u32,
    pub but_rate: f64,
    pub lh_dynamic_mean: f64,
    pub lh_current_mean: f64,
    pub sl_dynamic_mean: f64,
    pub sl_current_mean: f64,
    pub nonmono: NonMonoTally,
}

impl SimulateReport {
    pub fn new(config: &PerturbationConfig, threads: usize, stats: &BatchStats) -> Self {
        let n = stats.records.len() as f64;
        let mean = |f: fn(&crate::montecarlo::ReplicationRecord) -> f64| {
            stats.records.iter().map(f).sum::<f64>() / n
        };
        SimulateReport {
            config: *config,
            threads,
            mean_adjustment: stats.mean_adjustment,
            max_adjustment: stats.max_adjustment,
            stddev_adjustment: stats.stddev_adjustment,
            histogram: stats.histogram.clone(),
            but_count: stats.but_count,
            but_rate: f64::from(stats.but_count) / n,
            lh_dynamic_mean: mean(|r| r.lh_dynamic),
            lh_current_mean: mean(|r| r.lh_current),
            sl_dynamic_mean: mean(|r| r.sl_dynamic),
            sl_current_mean: mean(|r| r.sl_current),
            nonmono: stats.nonmono.clone(),
        }
    }

    /// Histogram as plain `bin<TAB>count` rows for plotting.
    pub fn histogram_rows(&self) -> String {
        let mut out = String::from("bin\tcount\n");
        for &(bin, count) in &self.histogram {
            out.push_str(&format!("{bin}-{}\t{count}\n", bin + 9));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} replications, factors in ({}, {}), seed {}\n",
            self.config.n_replications, self.config.factor_low, self.config.factor_high,
            self.config.seed
        ));
        out.push_str(&format!(
            "adjustment seats: mean {:.1}, max {}, stddev {:.1}\n",
            self.mean_adjustment, self.max_adjustment, self.stddev_adjustment
        ));
        for &(bin, count) in &self.histogram {
            out.push_str(&format!("  {:>3}-{:<3} {count}\n", bin, bin + 9));
        }
        out.push_str(&format!(
            "current system kept excess seats in {} replications ({:.1}%)\n",
            self.but_count,
            self.but_rate * 100.0
        ));
        out.push_str(&format!(
            "constituency LH mean: dynamic {:.2}, current {:.2}; SL mean: dynamic {:.2}, current {:.2}\n",
            self.lh_dynamic_mean, self.lh_current_mean, self.sl_dynamic_mean, self.sl_current_mean
        ));
        out.push_str(&format!(
            "non-monotonicity: {} triples; concentrated {} lost permanent, {} regained, {} candidates lost; \
             proportional {} candidates lost\n",
            self.nonmono.triples,
            self.nonmono.concentrated.lost_permanent,
            self.nonmono.concentrated.regained_adjustment,
            self.nonmono.concentrated.candidate_lost,
            self.nonmono.proportional.candidate_lost
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{DynamicOptions, ElectionRules};
    use crate::systems::allocate;

    #[test]
    fn allocation_report_round_trips_as_json() {
        let input = ElectionInput::new(
            vec!["A".into(), "B".into()],
            vec!["I".into(), "II".into(), "III".into()],
            vec![vec![97, 98], vec![101, 100], vec![102, 101]],
            vec![195, 201, 203],
        )
        .unwrap();
        let rules = ElectionRules::theoretical(3);
        let outcome =
            allocate(&input, &rules, SystemKind::Dynamic, &DynamicOptions::default()).unwrap();
        let report = AllocationReport::new(&input, SystemKind::Dynamic, &outcome);
        let json = serde_json::to_string(&report).unwrap();
        let back: AllocationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        let table = report.render();
        assert!(table.contains("stop for permanent seats after 3 seat(s)"));
        assert!(table.contains("III"));
    }
}
