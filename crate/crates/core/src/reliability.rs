//! Two-rater agreement on binary slot scores: the 2×2 matrix, observed and
//! chance agreement, Cohen's κ and PABAK.

use crate::error::{AuditError, Result};
use crate::evidence::Presence;
use crate::fraction::Fraction;
use crate::scoring::ScoreSheet;
use crate::taxonomy::{Function, SlotId};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub both_present: u32,
    pub a_only: u32,
    pub b_only: u32,
    pub both_absent: u32,
}

impl AgreementMatrix {
    pub fn n(&self) -> u32 {
        self.both_present + self.a_only + self.b_only + self.both_absent
    }

    pub fn add(&mut self, a: Presence, b: Presence) {
        match (a.is_present(), b.is_present()) {
            (true, true) => self.both_present += 1,
            (true, false) => self.a_only += 1,
            (false, true) => self.b_only += 1,
            (false, false) => self.both_absent += 1,
        }
    }

    pub fn transposed(&self) -> AgreementMatrix {
        AgreementMatrix {
            a_only: self.b_only,
            b_only: self.a_only,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum Kappa {
    Defined(Fraction),
    /// Chance agreement is 1, so κ has a zero denominator.
    Undefined,
}

impl Kappa {
    pub fn value(&self) -> Option<Fraction> {
        match self {
            Kappa::Defined(k) => Some(*k),
            Kappa::Undefined => None,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Defined(k) => f.write_str(&k.to_decimal(6)),
            Kappa::Undefined => f.write_str("undefined"),
        }
    }
}

/// Landis–Koch bands. A value sitting exactly on a cut point takes the higher band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
    Undefined,
}

impl AgreementBand {
    pub fn for_kappa(kappa: Kappa) -> AgreementBand {
        let Some(k) = kappa.value() else {
            return AgreementBand::Undefined;
        };
        let cut = |n| Fraction::new(n, 100);
        if k < Fraction::zero() {
            AgreementBand::Poor
        } else if k < cut(20) {
            AgreementBand::Slight
        } else if k < cut(40) {
            AgreementBand::Fair
        } else if k < cut(60) {
            AgreementBand::Moderate
        } else if k < cut(80) {
            AgreementBand::Substantial
        } else {
            AgreementBand::AlmostPerfect
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgreementBand::Poor => "poor",
            AgreementBand::Slight => "slight",
            AgreementBand::Fair => "fair",
            AgreementBand::Moderate => "moderate",
            AgreementBand::Substantial => "substantial",
            AgreementBand::AlmostPerfect => "almost perfect",
            AgreementBand::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityStats {
    pub filter: SlotFilter,
    pub matrix: AgreementMatrix,
    pub n: u32,
    pub p_o: Fraction,
    pub p_e: Fraction,
    pub kappa: Kappa,
    pub pabak: Fraction,
    pub interpretation_label: AgreementBand,
}

/// Which slots enter the matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", content = "code", rename_all = "lowercase")]
pub enum SlotFilter {
    #[default]
    All,
    /// Slots in cells whose parent is this pillar.
    Pillar(Function),
    /// Slots of this sub-function kind across all cells.
    Kind(Function),
}

impl SlotFilter {
    pub fn admits(self, slot: SlotId) -> bool {
        match self {
            SlotFilter::All => true,
            SlotFilter::Pillar(p) => slot.cell.parent == p,
            SlotFilter::Kind(k) => slot.kind == k,
        }
    }
}

impl fmt::Display for SlotFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotFilter::All => f.write_str("all"),
            SlotFilter::Pillar(p) => write!(f, "pillar {p}"),
            SlotFilter::Kind(k) => write!(f, "{k}-sub"),
        }
    }
}

pub fn stats_from_matrix(matrix: AgreementMatrix, filter: SlotFilter) -> Result<ReliabilityStats> {
    let n = matrix.n();
    if n == 0 {
        return Err(AuditError::validation(format!("no slots match filter {filter}")));
    }
    let n_i = i64::from(n);
    let p_o = Fraction::new(i64::from(matrix.both_present + matrix.both_absent), n_i);
    let a_present = i64::from(matrix.both_present + matrix.a_only);
    let b_present = i64::from(matrix.both_present + matrix.b_only);
    let p_e = Fraction::new(a_present * b_present + (n_i - a_present) * (n_i - b_present), n_i * n_i);
    let kappa = if p_e == Fraction::one() {
        Kappa::Undefined
    } else {
        Kappa::Defined((p_o - p_e) / (Fraction::one() - p_e))
    };
    Ok(ReliabilityStats {
        filter,
        matrix,
        n,
        p_o,
        p_e,
        kappa,
        pabak: Fraction::from_int(2) * p_o - Fraction::one(),
        interpretation_label: AgreementBand::for_kappa(kappa),
    })
}

pub fn agreement_matrix(a: &ScoreSheet, b: &ScoreSheet, filter: SlotFilter) -> Result<AgreementMatrix> {
    if a.audit_id != b.audit_id {
        return Err(AuditError::validation(format!(
            "sheets belong to different audits ({:?} vs {:?})",
            a.audit_id, b.audit_id
        )));
    }
    let va = a.values()?;
    let vb = b.values()?;
    let mut m = AgreementMatrix::default();
    for slot in SlotId::all().filter(|s| filter.admits(*s)) {
        m.add(va[slot.index()], vb[slot.index()]);
    }
    Ok(m)
}

pub fn reliability_stats(a: &ScoreSheet, b: &ScoreSheet, filter: SlotFilter) -> Result<ReliabilityStats> {
    stats_from_matrix(agreement_matrix(a, b, filter)?, filter)
}

/// Overall, per-pillar and per-kind statistics for a rater pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityBreakdown {
    pub rater_a: String,
    pub rater_b: String,
    pub overall: ReliabilityStats,
    pub by_pillar: Vec<ReliabilityStats>,
    pub by_kind: Vec<ReliabilityStats>,
}

pub fn reliability_breakdown(a: &ScoreSheet, b: &ScoreSheet) -> Result<ReliabilityBreakdown> {
    let per = |wrap: fn(Function) -> SlotFilter| -> Result<Vec<ReliabilityStats>> {
        Function::ALL.into_iter().map(|f| reliability_stats(a, b, wrap(f))).collect()
    };
    Ok(ReliabilityBreakdown {
        rater_a: a.rater_id.clone(),
        rater_b: b.rater_id.clone(),
        overall: reliability_stats(a, b, SlotFilter::All)?,
        by_pillar: per(SlotFilter::Pillar)?,
        by_kind: per(SlotFilter::Kind)?,
    })
}

/// Published κ values for the OpenClaw case. The underlying rater sheets were
/// never released, so these are cited for reference and never recomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedKappa {
    pub scope: String,
    pub kappa: String,
    #[serde(default = "cited_marker")]
    pub marker: String,
}

fn cited_marker() -> String {
    "cited, not computed".to_string()
}

pub fn cited_reference_kappas() -> Vec<CitedKappa> {
    [("overall", "0.82"), ("pillar A", "0.84"), ("pillar G", "0.76"), ("pillar I", "0.83"), ("pillar L", "0.88")]
        .into_iter()
        .map(|(scope, k)| CitedKappa {
            scope: scope.to_string(),
            kappa: k.to_string(),
            marker: cited_marker(),
        })
        .collect()
}
