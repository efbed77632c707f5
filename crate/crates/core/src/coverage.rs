//! Coverage counts by sub-function kind and by pillar, threshold findings,
//! and the cross-ecosystem prediction check.

use crate::error::Result;
use crate::fraction::Fraction;
use crate::scoring::{Scenario, ScoreSheet};
use crate::taxonomy::{Function, SlotId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// `present` out of `total`, with the exact share and its display percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub present: u32,
    pub total: u32,
    pub share: Fraction,
    pub pct: i64,
}

impl Tally {
    pub fn new(present: u32, total: u32) -> Tally {
        let share = Fraction::new(i64::from(present), i64::from(total));
        Tally {
            present,
            total,
            share,
            pct: share.percent_rounded(),
        }
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}%)", self.present, self.pct)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: Scenario,
    pub by_type: BTreeMap<Function, Tally>,
    pub by_pillar: BTreeMap<Function, Tally>,
    pub total: Tally,
}

impl CoverageReport {
    pub fn kind(&self, f: Function) -> Tally {
        self.by_type[&f]
    }

    pub fn pillar(&self, f: Function) -> Tally {
        self.by_pillar[&f]
    }
}

pub fn compute_coverage(sheet: &ScoreSheet, scenario: Scenario) -> Result<CoverageReport> {
    let values = sheet.values()?;
    let mut by_type = [0u32; 4];
    let mut by_pillar = [0u32; 4];
    for slot in SlotId::all().filter(|s| values[s.index()].is_present()) {
        by_type[slot.kind.index()] += 1;
        by_pillar[slot.pillar().index()] += 1;
    }
    let tallies = |counts: [u32; 4]| Function::ALL.iter().map(|f| (*f, Tally::new(counts[f.index()], 16))).collect();
    Ok(CoverageReport {
        scenario,
        by_type: tallies(by_type),
        by_pillar: tallies(by_pillar),
        total: Tally::new(by_type.iter().sum(), 64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingCode {
    PillarUnderserved,
    NoSocialSystem,
    NoNormativeGrounding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    /// A pillar code, or `"global"`.
    pub subject: String,
    pub detail: String,
}

fn quarter() -> Fraction {
    Fraction::new(1, 4)
}

fn half() -> Fraction {
    Fraction::new(1, 2)
}

/// Threshold findings. Comparisons use exact shares; exactly 25% is not underserved.
pub fn interpret(report: &CoverageReport) -> Vec<Finding> {
    let mut out = Vec::new();
    for (pillar, t) in &report.by_pillar {
        if t.share < quarter() {
            out.push(Finding {
                code: FindingCode::PillarUnderserved,
                subject: pillar.to_string(),
                detail: format!("pillar {pillar} has {}/{} slots present ({}%), below 25%", t.present, t.total, t.pct),
            });
        }
    }
    if report.kind(Function::I).present == 0 {
        out.push(Finding {
            code: FindingCode::NoSocialSystem,
            subject: "global".to_string(),
            detail: "no inter-cell coordination sub-function is present in any cell".to_string(),
        });
    }
    if report.kind(Function::L).present == 0 {
        out.push(Finding {
            code: FindingCode::NoNormativeGrounding,
            subject: "global".to_string(),
            detail: "no normative grounding sub-function is present in any cell".to_string(),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignClass {
    #[default]
    Undesigned,
    Designed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Weakened,
    Falsified,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcosystemCoverage {
    pub ecosystem_id: String,
    pub design_class: DesignClass,
    pub report: CoverageReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionVerdict {
    pub ecosystem_id: String,
    pub design_class: DesignClass,
    pub l_pct: Fraction,
    pub g_pct: Fraction,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudySummary {
    pub undesigned: usize,
    pub holds: usize,
    pub weakened: usize,
    pub falsified: usize,
    /// Set only when exactly four undesigned ecosystems were supplied.
    pub prediction_holds: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub verdicts: Vec<PredictionVerdict>,
    pub summary: StudySummary,
}

/// Verdict from exact L and G shares.
pub fn classify(design_class: DesignClass, l: Fraction, g: Fraction) -> Verdict {
    if design_class == DesignClass::Designed {
        Verdict::NotApplicable
    } else if l > half() && g > half() {
        Verdict::Falsified
    } else if l < quarter() && g < quarter() {
        Verdict::Holds
    } else {
        Verdict::Weakened
    }
}

pub fn evaluate_prediction(reports: &[EcosystemCoverage]) -> Result<PredictionOutcome> {
    if reports.is_empty() {
        return Err(crate::error::AuditError::validation("prediction needs at least one ecosystem report"));
    }
    let verdicts: Vec<PredictionVerdict> = reports
        .iter()
        .map(|r| {
            let l = r.report.pillar(Function::L).share;
            let g = r.report.pillar(Function::G).share;
            PredictionVerdict {
                ecosystem_id: r.ecosystem_id.clone(),
                design_class: r.design_class,
                l_pct: l * Fraction::from_int(100),
                g_pct: g * Fraction::from_int(100),
                verdict: classify(r.design_class, l, g),
            }
        })
        .collect();
    let count = |v: Verdict| verdicts.iter().filter(|p| p.verdict == v).count();
    let undesigned = verdicts.iter().filter(|p| p.design_class == DesignClass::Undesigned).count();
    let holds = count(Verdict::Holds);
    let (prediction_holds, note) = if undesigned == 4 {
        let ok = holds >= 3;
        (
            Some(ok),
            format!("{holds} of 4 undesigned ecosystems show L and G below 25%; the prediction {}", if ok { "holds" } else { "does not hold" }),
        )
    } else {
        (
            None,
            format!("{holds} of {undesigned} undesigned ecosystems show L and G below 25%; a study verdict needs exactly four"),
        )
    };
    Ok(PredictionOutcome {
        summary: StudySummary {
            undesigned,
            holds,
            weakened: count(Verdict::Weakened),
            falsified: count(Verdict::Falsified),
            prediction_holds,
            note,
        },
        verdicts,
    })
}
