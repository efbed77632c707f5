//! Interchange media: asserted pathway statuses, the minimum viable cell
//! configuration each pathway needs, and the four-step correction loop.

use crate::error::{AuditError, Diagnostic, Result};
use crate::evidence::Presence;
use crate::scoring::ScoreSheet;
use crate::taxonomy::{BoundaryMap, CellId, Function, PathwayId, SlotId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediaStatus {
    Absent,
    ProtoFunctional,
    Functional,
}

impl MediaStatus {
    pub fn label(self) -> &'static str {
        match self {
            MediaStatus::Absent => "absent",
            MediaStatus::ProtoFunctional => "proto-functional",
            MediaStatus::Functional => "functional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayStatus {
    pub pathway: PathwayId,
    pub status: MediaStatus,
    /// Finer wording pooled under the status, e.g. "proto-emergent".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flavor: Option<String>,
    #[serde(default)]
    pub evidence_note: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaAggregate {
    pub functional: u32,
    pub proto: u32,
    pub absent: u32,
}

/// Duplicate pathways are errors; missing pathways are reported separately so
/// that a partially entered assessment can still be stored.
pub fn validate_assessment(assessment: &[PathwayStatus]) -> Vec<Diagnostic> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for s in assessment {
        if seen.insert(s.pathway, ()).is_some() {
            out.push(Diagnostic::error(
                "duplicate-pathway",
                format!("pathway {} is assessed more than once", s.pathway),
            ));
        }
    }
    out
}

pub fn missing_pathways(assessment: &[PathwayStatus]) -> Vec<PathwayId> {
    PathwayId::all()
        .filter(|p| !assessment.iter().any(|s| s.pathway == *p))
        .collect()
}

pub fn aggregate_media(assessment: &[PathwayStatus]) -> Result<MediaAggregate> {
    let diags = validate_assessment(assessment);
    if !diags.is_empty() {
        return Err(AuditError::with_diagnostics("media assessment is malformed", diags));
    }
    let missing = missing_pathways(assessment);
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(|p| p.to_string()).collect();
        return Err(AuditError::validation(format!(
            "media assessment is missing pathways: {}",
            list.join(", ")
        )));
    }
    let mut agg = MediaAggregate::default();
    for s in assessment {
        match s.status {
            MediaStatus::Functional => agg.functional += 1,
            MediaStatus::ProtoFunctional => agg.proto += 1,
            MediaStatus::Absent => agg.absent += 1,
        }
    }
    Ok(agg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedReason {
    pub slot: SlotId,
    pub cell: CellId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityResult {
    pub pathway: PathwayId,
    pub producer_cell: CellId,
    pub receiver_cell: CellId,
    pub capable: bool,
    pub blocked_reasons: Vec<BlockedReason>,
}

/// Minimum viable configuration per pathway: infrastructure and operative
/// mechanisms in both the producer and receiver cell, coordination in at
/// least one of them, and normative grounding in the receiver.
///
/// Both directions of a boundary use the boundary's own producer and
/// receiver cells.
pub fn capability_check(sheet: &ScoreSheet, boundary_map: &BoundaryMap) -> Result<Vec<CapabilityResult>> {
    let values = sheet.values()?;
    let present = |s: SlotId| values[s.index()] == Presence::Present;
    Ok(PathwayId::all()
        .map(|pathway| {
            let cells = boundary_map.cells(pathway.boundary());
            let (p, r) = (cells.producer_cell, cells.receiver_cell);
            let mut needed = vec![p.slot(Function::A), p.slot(Function::G), r.slot(Function::A), r.slot(Function::G)];
            if !present(p.slot(Function::I)) && !present(r.slot(Function::I)) {
                needed.push(p.slot(Function::I));
                needed.push(r.slot(Function::I));
            }
            needed.push(r.slot(Function::L));
            let mut blocked_reasons: Vec<BlockedReason> = Vec::new();
            for slot in needed.into_iter().filter(|s| !present(*s)) {
                if !blocked_reasons.iter().any(|b| b.slot == slot) {
                    blocked_reasons.push(BlockedReason { slot, cell: slot.cell });
                }
            }
            CapabilityResult {
                pathway,
                producer_cell: p,
                receiver_cell: r,
                capable: blocked_reasons.is_empty(),
                blocked_reasons,
            }
        })
        .collect())
}

/// Warns where a pathway is asserted functional but its cells cannot carry it.
pub fn consistency_warnings(assessment: &[PathwayStatus], capability: &[CapabilityResult]) -> Vec<Diagnostic> {
    assessment
        .iter()
        .filter(|s| s.status == MediaStatus::Functional)
        .filter_map(|s| {
            let c = capability.iter().find(|c| c.pathway == s.pathway)?;
            (!c.capable).then(|| {
                let missing: Vec<String> = c.blocked_reasons.iter().map(|b| b.slot.to_string()).collect();
                Diagnostic::warning(
                    "status-exceeds-capability",
                    format!("pathway {} is asserted functional but lacks {}", s.pathway, missing.join(", ")),
                )
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub date: String,
}

/// Analyst judgments on whether a cell is an operative institution. Reported
/// beside the loop; the verdict itself uses the G-sub score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperativeAnnotation {
    pub cell: CellId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforceable_membership: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_rule_change: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sanctionable_noncompliance: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepReadiness {
    Executable,
    Partial,
    Blocked,
}

impl StepReadiness {
    pub fn label(self) -> &'static str {
        match self {
            StepReadiness::Executable => "executable",
            StepReadiness::Partial => "partial",
            StepReadiness::Blocked => "blocked",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStatus {
    pub step: u8,
    pub name: String,
    pub required_cells: Vec<CellId>,
    pub ready_cells: Vec<CellId>,
    pub status: StepReadiness,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<OperativeAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopReport {
    pub incident: IncidentRecord,
    pub steps: Vec<StepStatus>,
}

pub const LOOP_STEPS: [(&str, &[&str]); 4] = [
    ("Value-level classification", &["L-L"]),
    ("Normative enforcement", &["I-G", "I-L"]),
    ("Political response", &["G-L"]),
    ("Economic sanctioning", &["A-A"]),
];

pub fn correction_loop(sheet: &ScoreSheet, incident: &IncidentRecord) -> Result<LoopReport> {
    correction_loop_annotated(sheet, incident, &[])
}

pub fn correction_loop_annotated(
    sheet: &ScoreSheet,
    incident: &IncidentRecord,
    annotations: &[OperativeAnnotation],
) -> Result<LoopReport> {
    let values = sheet.values()?;
    let steps = LOOP_STEPS
        .iter()
        .zip(1u8..)
        .map(|((name, cells), step)| {
            let required_cells: Vec<CellId> = cells.iter().map(|c| c.parse().expect("static cell id")).collect();
            let ready_cells: Vec<CellId> = required_cells
                .iter()
                .copied()
                .filter(|c| values[c.slot(Function::G).index()].is_present())
                .collect();
            let status = if ready_cells.len() == required_cells.len() {
                StepReadiness::Executable
            } else if ready_cells.is_empty() {
                StepReadiness::Blocked
            } else {
                StepReadiness::Partial
            };
            StepStatus {
                step,
                name: name.to_string(),
                annotations: annotations
                    .iter()
                    .filter(|a| required_cells.contains(&a.cell))
                    .cloned()
                    .collect(),
                required_cells,
                ready_cells,
                status,
            }
        })
        .collect();
    Ok(LoopReport {
        incident: incident.clone(),
        steps,
    })
}
