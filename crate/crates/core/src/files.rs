//! On-disk formats.
//!
//! Elections travel as comma-separated text: a header of party labels with
//! a reserved final `entitled` column, one row per constituency, `#` for
//! comment lines. Rules travel as a TOML document with named divisor
//! presets and explicit rational overrides. Both formats round-trip.

use serde::{Deserialize, Serialize};

use crate::apportion::{DivisorSequence, Ratio, TieRule};
use crate::election::{DynamicOptions, ElectionInput, ElectionRules, ListMethod};
use crate::error::{Error, Result};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parse election text. Line and column numbers in errors are 1-based;
/// the column points at the start of the offending field.
pub fn parse_election(text: &str) -> Result<ElectionInput> {
    // (line number, field values with their 1-based start columns)
    let mut rows: Vec<(usize, Vec<(usize, &str)>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let mut fields = Vec::new();
        let mut col = 1usize;
        for piece in raw.split(',') {
            let trimmed = piece.trim();
            let offset = piece.chars().count() - piece.trim_start().chars().count();
            fields.push((col + offset, trimmed));
            col += piece.chars().count() + 1;
        }
        rows.push((line_no, fields));
    }
    let Some((header_line, header)) = rows.first() else {
        return Err(parse_err(1, 1, "empty election file"));
    };
    if header.len() < 3 {
        return Err(parse_err(
            *header_line,
            1,
            "header needs a constituency column, at least one party and `entitled`",
        ));
    }
    let (last_col, last_name) = header[header.len() - 1];
    if last_name != "entitled" {
        return Err(parse_err(
            *header_line,
            last_col,
            format!("last header column must be `entitled`, found {last_name:?}"),
        ));
    }
    let parties: Vec<String> = header[1..header.len() - 1]
        .iter()
        .map(|&(col, name)| {
            if name.is_empty() {
                Err(parse_err(*header_line, col, "empty party label"))
            } else {
                Ok(name.to_string())
            }
        })
        .collect::<Result<_>>()?;

    let mut constituencies = Vec::new();
    let mut votes = Vec::new();
    let mut entitled = Vec::new();
    for (line_no, fields) in &rows[1..] {
        if fields.len() != header.len() {
            return Err(parse_err(
                *line_no,
                1,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        let (col, label) = fields[0];
        if label.is_empty() {
            return Err(parse_err(*line_no, col, "empty constituency label"));
        }
        constituencies.push(label.to_string());
        let mut row = Vec::with_capacity(parties.len());
        for &(col, value) in &fields[1..] {
            let n: u64 = value.parse().map_err(|_| {
                parse_err(*line_no, col, format!("expected a nonnegative integer, found {value:?}"))
            })?;
            row.push(n);
        }
        entitled.push(row.pop().expect("entitled column present"));
        votes.push(row);
    }
    if constituencies.is_empty() {
        return Err(parse_err(*header_line, 1, "no constituency rows"));
    }
    ElectionInput::new(parties, constituencies, votes, entitled)
}

/// Serialize an election; `parse_election` of the output is the identity.
pub fn serialize_election(input: &ElectionInput) -> String {
    let mut out = String::new();
    out.push_str("constituency,");
    out.push_str(&input.parties().join(","));
    out.push_str(",entitled\n");
    for (i, label) in input.constituencies().iter().enumerate() {
        out.push_str(label);
        for j in 0..input.n_parties() {
            out.push_str(&format!(",{}", input.vote(i, j)));
        }
        out.push_str(&format!(",{}\n", input.entitled()[i]));
    }
    out
}

/// Divisor sequence in a rules document: a named preset or an explicit
/// first-divisor rational.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DivisorSpec {
    Preset(String),
    Explicit { num: u64, den: u64 },
}

impl DivisorSpec {
    fn to_sequence(&self) -> Result<DivisorSequence> {
        match self {
            DivisorSpec::Preset(name) => match name.as_str() {
                "pure" => Ok(DivisorSequence::pure()),
                "modified-1.4" => Ok(DivisorSequence::modified()),
                other => Err(Error::InvalidRules(format!(
                    "unknown divisor preset {other:?} (use `pure`, `modified-1.4` or {{ num, den }})"
                ))),
            },
            DivisorSpec::Explicit { num, den } => {
                DivisorSequence::new(Ratio::new(*num, *den)?)
            }
        }
    }

    fn from_sequence(seq: &DivisorSequence) -> Self {
        if *seq == DivisorSequence::pure() {
            DivisorSpec::Preset("pure".into())
        } else if *seq == DivisorSequence::modified() {
            DivisorSpec::Preset("modified-1.4".into())
        } else {
            let first = seq.first();
            DivisorSpec::Explicit {
                num: first.num,
                den: first.den,
            }
        }
    }
}

/// Threshold in a rules document: `"4/100"` or `{ num = 4, den = 100 }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdSpec {
    Text(String),
    Explicit { num: u64, den: u64 },
}

impl ThresholdSpec {
    fn to_ratio(&self) -> Result<Ratio> {
        match self {
            ThresholdSpec::Explicit { num, den } => Ratio::new(*num, *den),
            ThresholdSpec::Text(s) => {
                let (num, den) = s
                    .split_once('/')
                    .ok_or_else(|| Error::InvalidRules(format!("threshold {s:?} is not `n/d`")))?;
                let num = num.trim().parse().map_err(|_| {
                    Error::InvalidRules(format!("threshold numerator {num:?} is not an integer"))
                })?;
                let den = den.trim().parse().map_err(|_| {
                    Error::InvalidRules(format!("threshold denominator {den:?} is not an integer"))
                })?;
                Ratio::new(num, den)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DivisorsDoc {
    within_constituency: DivisorSpec,
    adjustment: DivisorSpec,
    national: DivisorSpec,
    list: DivisorSpec,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct DynamicDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    min_permanent: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constituency_floor: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RulesDoc {
    house_size: u32,
    #[serde(default)]
    permanent_seats: u32,
    national_threshold: ThresholdSpec,
    constituency_threshold: ThresholdSpec,
    tie: TieRule,
    #[serde(default)]
    list_method: Option<ListMethod>,
    divisors: DivisorsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dynamic: Option<DynamicDoc>,
}

/// Parse a rules document.
pub fn parse_rules(text: &str) -> Result<(ElectionRules, DynamicOptions)> {
    let doc: RulesDoc = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| offset_to_line_col(text, span.start))
            .unwrap_or((1, 1));
        parse_err(line, column, e.message().to_string())
    })?;
    let rules = ElectionRules {
        house_size: doc.house_size,
        permanent_seats: doc.permanent_seats,
        national_threshold: doc.national_threshold.to_ratio()?,
        constituency_threshold: doc.constituency_threshold.to_ratio()?,
        within_constituency_divisors: doc.divisors.within_constituency.to_sequence()?,
        adjustment_divisors: doc.divisors.adjustment.to_sequence()?,
        national_divisors: doc.divisors.national.to_sequence()?,
        list_divisors: doc.divisors.list.to_sequence()?,
        list_method: doc.list_method.unwrap_or(ListMethod::HighestAverages),
        tie: doc.tie,
    };
    rules.validate()?;
    let opts = match doc.dynamic {
        Some(d) => DynamicOptions {
            min_permanent: d.min_permanent,
            constituency_floor: d.constituency_floor,
        },
        None => DynamicOptions::default(),
    };
    Ok((rules, opts))
}

/// Serialize rules; `parse_rules` of the output is the identity.
pub fn serialize_rules(rules: &ElectionRules, opts: &DynamicOptions) -> String {
    let doc = RulesDoc {
        house_size: rules.house_size,
        permanent_seats: rules.permanent_seats,
        national_threshold: ThresholdSpec::Text(format!(
            "{}/{}",
            rules.national_threshold.num, rules.national_threshold.den
        )),
        constituency_threshold: ThresholdSpec::Text(format!(
            "{}/{}",
            rules.constituency_threshold.num, rules.constituency_threshold.den
        )),
        tie: rules.tie,
        list_method: Some(rules.list_method),
        divisors: DivisorsDoc {
            within_constituency: DivisorSpec::from_sequence(&rules.within_constituency_divisors),
            adjustment: DivisorSpec::from_sequence(&rules.adjustment_divisors),
            national: DivisorSpec::from_sequence(&rules.national_divisors),
            list: DivisorSpec::from_sequence(&rules.list_divisors),
        },
        dynamic: if *opts == DynamicOptions::default() {
            None
        } else {
            Some(DynamicDoc {
                min_permanent: opts.min_permanent,
                constituency_floor: opts.constituency_floor,
            })
        },
    };
    toml::to_string_pretty(&doc).expect("rules document serializes")
}

fn offset_to_line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in text.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}
