//! The persistent audit document, its single validation choke point, the
//! analysis pipeline, and the storage and HTTP layers built on them.

pub mod http;
pub mod store;

use crate::coverage::{compute_coverage, interpret, DesignClass};
use crate::datasets::DatasetSource;
use crate::error::{AuditError, Diagnostic, Result};
use crate::evidence::{validate_corpus, CriterionPolicy, EvidenceCorpus};
use crate::frameworks::{collective_coverage, summarize, FrameworkCoverage};
use crate::media::{
    aggregate_media, capability_check, consistency_warnings, correction_loop_annotated, missing_pathways,
    validate_assessment, IncidentRecord, OperativeAnnotation, PathwayStatus,
};
use crate::reliability::{reliability_breakdown, CitedKappa};
use crate::reporting::{
    heatmap_matrix, FrameworkSection, MediaSection, ReconciliationSummary, ReliabilitySection, ReportBundle,
    ScenarioReport,
};
use crate::scoring::{
    apply_scenario, reconcile_with_trace, validate_registry, BorderlineCase, ReconciliationRecord, Scenario,
    ScoreEntry, ScoreSheet, CONSENSUS_RATER,
};
use crate::taxonomy::{BoundaryCells, BoundaryId, BoundaryMap, CellId, SlotId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

pub use store::FileStore;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ecosystem {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub design_class: DesignClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditDocument {
    pub schema_version: String,
    pub audit_id: String,
    pub revision: u64,
    pub ecosystem: Ecosystem,
    #[serde(default)]
    pub criterion_policy: CriterionPolicy,
    #[serde(default)]
    pub corpus: EvidenceCorpus,
    #[serde(default)]
    pub sheets: Vec<ScoreSheet>,
    #[serde(default)]
    pub reconciliations: Vec<ReconciliationRecord>,
    #[serde(default)]
    pub borderline_registry: Vec<BorderlineCase>,
    #[serde(default)]
    pub media_assessment: Vec<PathwayStatus>,
    #[serde(default)]
    pub framework_refs: Vec<String>,
    #[serde(default)]
    pub incidents: Vec<IncidentRecord>,
    #[serde(default)]
    pub operative_annotations: Vec<OperativeAnnotation>,
    #[serde(default)]
    pub boundary_overrides: BTreeMap<BoundaryId, BoundaryCells>,
    /// Published reliability figures carried for reference only.
    #[serde(default)]
    pub cited_reliability: Vec<CitedKappa>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewAudit {
    #[serde(default)]
    pub audit_id: Option<String>,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub design_class: DesignClass,
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.trim().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

pub fn valid_audit_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// A fresh revision-1 document. Not persisted.
pub fn create_audit(meta: NewAudit) -> Result<AuditDocument> {
    if meta.name.trim().is_empty() {
        return Err(AuditError::validation("ecosystem name must not be empty"));
    }
    let audit_id = meta.audit_id.unwrap_or_else(|| slug(&meta.name));
    let doc = AuditDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        audit_id,
        revision: 1,
        ecosystem: Ecosystem {
            name: meta.name,
            description: meta.description,
            design_class: meta.design_class,
        },
        criterion_policy: CriterionPolicy::default(),
        corpus: EvidenceCorpus::default(),
        sheets: Vec::new(),
        reconciliations: Vec::new(),
        borderline_registry: Vec::new(),
        media_assessment: Vec::new(),
        framework_refs: Vec::new(),
        incidents: Vec::new(),
        operative_annotations: Vec::new(),
        boundary_overrides: BTreeMap::new(),
        cited_reliability: Vec::new(),
    };
    require_valid(&doc)?;
    Ok(doc)
}

fn known_framework_ids() -> &'static BTreeSet<String> {
    static IDS: OnceLock<BTreeSet<String>> = OnceLock::new();
    IDS.get_or_init(|| {
        DatasetSource::embedded()
            .framework_catalog()
            .expect("shipped framework data is valid")
            .into_iter()
            .map(|f| f.framework_id)
            .collect()
    })
}

impl AuditDocument {
    pub fn sheet(&self, rater_id: &str) -> Option<&ScoreSheet> {
        self.sheets.iter().find(|s| s.rater_id == rater_id)
    }

    pub fn boundary_map(&self) -> BoundaryMap {
        BoundaryMap::with_overrides(&self.boundary_overrides)
    }

    /// Adds or replaces entries in the rater's sheet, creating it if needed.
    pub fn submit_entries(&mut self, rater_id: &str, entries: Vec<ScoreEntry>) -> Result<()> {
        if rater_id.trim().is_empty() {
            return Err(AuditError::validation("rater id must not be empty"));
        }
        let audit_id = self.audit_id.clone();
        let sheet = match self.sheets.iter_mut().position(|s| s.rater_id == rater_id) {
            Some(i) => &mut self.sheets[i],
            None => {
                self.sheets.push(ScoreSheet::empty(rater_id, &audit_id));
                self.sheets.last_mut().expect("just pushed")
            }
        };
        for e in entries {
            sheet.upsert(e);
        }
        Ok(())
    }

    /// Adds or replaces the record for its slot.
    pub fn record_reconciliation(&mut self, record: ReconciliationRecord) {
        match self.reconciliations.iter_mut().find(|r| r.slot_id == record.slot_id) {
            Some(r) => *r = record,
            None => self.reconciliations.push(record),
        }
    }

    /// The two rater sheets, when the document holds exactly two.
    pub fn rater_pair(&self) -> Option<(&ScoreSheet, &ScoreSheet)> {
        match self.sheets.as_slice() {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }
}

/// Every check a document must pass before a write. Errors block the write;
/// warnings travel with the report.
pub fn validate_document(doc: &AuditDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if doc.schema_version != SCHEMA_VERSION {
        out.push(Diagnostic::error(
            "unsupported-schema",
            format!("schema version {:?} is not supported (expected {SCHEMA_VERSION:?})", doc.schema_version),
        ));
    }
    if !valid_audit_id(&doc.audit_id) {
        out.push(Diagnostic::error(
            "invalid-audit-id",
            format!("audit id {:?} must be 1-128 characters of [A-Za-z0-9._-] and not start with '.'", doc.audit_id),
        ));
    }
    if doc.ecosystem.name.trim().is_empty() {
        out.push(Diagnostic::error("empty-name", "ecosystem name must not be empty"));
    }
    if doc.revision == 0 {
        out.push(Diagnostic::error("invalid-revision", "revision must be positive"));
    }
    out.extend(validate_corpus(&doc.corpus));

    let evidence_ids: BTreeSet<&str> = doc.corpus.items.iter().map(|i| i.id.as_str()).collect();
    let mut raters = BTreeSet::new();
    for sheet in &doc.sheets {
        if sheet.audit_id != doc.audit_id {
            out.push(Diagnostic::error(
                "wrong-audit",
                format!("sheet of rater {:?} belongs to audit {:?}", sheet.rater_id, sheet.audit_id),
            ));
        }
        if !raters.insert(sheet.rater_id.as_str()) {
            out.push(Diagnostic::error("duplicate-rater", format!("rater {:?} has two sheets", sheet.rater_id)));
        }
        out.extend(sheet.structural_diagnostics());
        for e in &sheet.entries {
            for id in e.evidence_ids.iter().filter(|id| !evidence_ids.contains(id.as_str())) {
                out.push(Diagnostic::warning(
                    "unknown-evidence",
                    format!("{} in rater {:?}'s sheet cites unknown evidence {id:?}", e.slot_id, sheet.rater_id),
                ));
            }
        }
    }
    if doc.sheets.len() > 2 {
        out.push(Diagnostic::error("too-many-sheets", "an audit holds at most two rater sheets"));
    }
    if doc.sheets.len() == 2 && raters.contains(CONSENSUS_RATER) {
        out.push(Diagnostic::error(
            "reserved-rater",
            format!("rater id {CONSENSUS_RATER:?} is reserved for single-sheet audits"),
        ));
    }
    out.extend(record_diagnostics(doc));
    out.extend(validate_registry(&doc.borderline_registry));
    out.extend(validate_assessment(&doc.media_assessment));
    for r in &doc.framework_refs {
        if !known_framework_ids().contains(r) {
            out.push(Diagnostic::error("unknown-framework", format!("framework {r:?} is not in the shipped catalog")));
        }
    }
    let mut incidents = BTreeSet::new();
    for i in &doc.incidents {
        if !incidents.insert(i.id.as_str()) {
            out.push(Diagnostic::error("duplicate-id", format!("incident id {:?} is used twice", i.id)));
        }
    }
    let mut annotated = BTreeSet::new();
    for a in &doc.operative_annotations {
        if !annotated.insert(a.cell) {
            out.push(Diagnostic::error("duplicate-annotation", format!("{} is annotated twice", a.cell)));
        }
    }
    out
}

/// Records must target slots both raters scored differently. Slots not yet
/// scored by both are allowed while sheets are still being filled.
fn record_diagnostics(doc: &AuditDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if doc.reconciliations.is_empty() {
        return out;
    }
    let Some((a, b)) = doc.rater_pair() else {
        out.push(Diagnostic::error("no-rater-pair", "reconciliation records need exactly two rater sheets"));
        return out;
    };
    let mut seen = BTreeSet::new();
    for r in &doc.reconciliations {
        if !seen.insert(r.slot_id) {
            out.push(Diagnostic::error("duplicate-record", format!("{} has more than one reconciliation record", r.slot_id)));
        }
        let (va, vb) = (a.value(r.slot_id), b.value(r.slot_id));
        if let (Some(x), Some(y)) = (va, vb) {
            if x == y {
                out.push(Diagnostic::error(
                    "not-disputed",
                    format!("{} is not a disagreement between {:?} and {:?}", r.slot_id, a.rater_id, b.rater_id),
                ));
            }
        }
        for (rater, value) in &r.rater_values {
            let actual = if *rater == a.rater_id {
                va
            } else if *rater == b.rater_id {
                vb
            } else {
                out.push(Diagnostic::error("unknown-rater", format!("record for {} cites unknown rater {rater:?}", r.slot_id)));
                continue;
            };
            if actual.is_some_and(|v| v != *value) {
                out.push(Diagnostic::error(
                    "rater-value-mismatch",
                    format!("record for {} misstates the value of rater {rater:?}", r.slot_id),
                ));
            }
        }
    }
    out
}

pub fn require_valid(doc: &AuditDocument) -> Result<Vec<Diagnostic>> {
    let (errors, warnings): (Vec<Diagnostic>, Vec<Diagnostic>) =
        validate_document(doc).into_iter().partition(Diagnostic::is_error);
    if errors.is_empty() {
        Ok(warnings)
    } else {
        Err(AuditError::with_diagnostics(
            format!("audit {:?} failed validation", doc.audit_id),
            errors,
        ))
    }
}

/// Disagreements on slots both raters have already scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisagreementView {
    pub slot_id: SlotId,
    pub values: BTreeMap<String, crate::evidence::Presence>,
    pub rationales: BTreeMap<String, String>,
    pub resolved: Option<ReconciliationRecord>,
}

pub fn disagreements(doc: &AuditDocument) -> Vec<DisagreementView> {
    let Some((a, b)) = doc.rater_pair() else {
        return Vec::new();
    };
    SlotId::all()
        .filter_map(|slot| {
            let (ea, eb) = (a.entry(slot)?, b.entry(slot)?);
            (ea.value != eb.value).then(|| DisagreementView {
                slot_id: slot,
                values: [(a.rater_id.clone(), ea.value), (b.rater_id.clone(), eb.value)].into(),
                rationales: [(a.rater_id.clone(), ea.rationale.clone()), (b.rater_id.clone(), eb.rationale.clone())].into(),
                resolved: doc.reconciliations.iter().find(|r| r.slot_id == slot).cloned(),
            })
        })
        .collect()
}

/// The document as `rater` may see it during blind scoring: another rater's
/// entry for a slot is withheld until `rater` has scored that slot too, and
/// reconciliation records are withheld on the same terms.
pub fn redact_for_rater(doc: &AuditDocument, rater: &str) -> AuditDocument {
    let mine: BTreeSet<SlotId> = doc
        .sheet(rater)
        .map(|s| s.entries.iter().map(|e| e.slot_id).collect())
        .unwrap_or_default();
    let mut out = doc.clone();
    for sheet in out.sheets.iter_mut().filter(|s| s.rater_id != rater) {
        sheet.entries.retain(|e| mine.contains(&e.slot_id));
    }
    out.reconciliations.retain(|r| mine.contains(&r.slot_id));
    out
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub generated_at: String,
    pub primary_scenario: Scenario,
    pub datasets: DatasetSource,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            generated_at: String::new(),
            primary_scenario: Scenario::Baseline,
            datasets: DatasetSource::embedded(),
        }
    }
}

pub fn referenced_frameworks(doc: &AuditDocument, datasets: &DatasetSource) -> Result<Vec<FrameworkCoverage>> {
    let catalog = datasets.framework_catalog()?;
    doc.framework_refs
        .iter()
        .map(|id| {
            catalog
                .iter()
                .find(|f| f.framework_id == *id)
                .cloned()
                .ok_or_else(|| AuditError::validation(format!("framework {id:?} is not in the catalog")))
        })
        .collect()
}

/// Consensus sheet of the document and, for a rater pair, how it was reached.
pub fn consensus_of(doc: &AuditDocument) -> Result<(ScoreSheet, Option<ReconciliationSummary>)> {
    match doc.sheets.as_slice() {
        [] => Err(AuditError::Precondition(format!("audit {:?} has no score sheets", doc.audit_id))),
        [only] => {
            only.require_complete()?;
            Ok((only.clone(), None))
        }
        [a, b] => {
            if !a.is_complete() || !b.is_complete() {
                return Err(AuditError::Precondition(format!(
                    "rater sheets {:?} and {:?} must both cover all 64 slots",
                    a.rater_id, b.rater_id
                )));
            }
            let trace = reconcile_with_trace(a, b, &doc.reconciliations)?;
            Ok((
                trace.consensus,
                Some(ReconciliationSummary {
                    rater_a: a.rater_id.clone(),
                    rater_b: b.rater_id.clone(),
                    disagreements: trace.disagreements,
                    resolved_by_record: trace.resolved_by_record,
                    conservative_defaults: trace.conservative_defaults,
                    borderline_asymmetries: trace.borderline_asymmetries,
                }),
            ))
        }
        _ => Err(AuditError::validation("an audit holds at most two rater sheets")),
    }
}

/// Consensus, scenarios, coverage and findings, reliability, media, the
/// correction loop and framework summaries, in that order. Pure in the
/// document apart from `generated_at`.
pub fn run_pipeline(doc: &AuditDocument, opts: &PipelineOptions) -> Result<ReportBundle> {
    let warnings = require_valid(doc)?;
    let (consensus, reconciliation) = consensus_of(doc)?;

    let mut scenarios = Vec::new();
    let mut primary_sheet = consensus.clone();
    for s in Scenario::ALL {
        let sheet = apply_scenario(&consensus, &doc.borderline_registry, s)?;
        let coverage = compute_coverage(&sheet, s)?;
        scenarios.push(ScenarioReport {
            scenario: s,
            findings: interpret(&coverage),
            coverage,
        });
        if s == opts.primary_scenario {
            primary_sheet = sheet;
        }
    }

    let computed = match doc.rater_pair() {
        Some((a, b)) => Some(reliability_breakdown(a, b)?),
        None => None,
    };

    let capability = capability_check(&primary_sheet, &doc.boundary_map())?;
    let media = MediaSection {
        aggregate: if missing_pathways(&doc.media_assessment).is_empty() {
            Some(aggregate_media(&doc.media_assessment)?)
        } else {
            None
        },
        capable: capability.iter().filter(|c| c.capable).count() as u32,
        warnings: consistency_warnings(&doc.media_assessment, &capability),
        assessment: doc.media_assessment.clone(),
        capability,
    };

    let unspecified = [IncidentRecord {
        id: "unspecified".to_string(),
        description: "no incident recorded".to_string(),
        date: String::new(),
    }];
    let incidents: &[IncidentRecord] = if doc.incidents.is_empty() { &unspecified } else { &doc.incidents };
    let correction_loop = incidents
        .iter()
        .map(|i| correction_loop_annotated(&primary_sheet, i, &doc.operative_annotations))
        .collect::<Result<Vec<_>>>()?;

    let referenced = referenced_frameworks(doc, &opts.datasets)?;
    let frameworks = FrameworkSection {
        summaries: referenced.iter().map(summarize).collect(),
        collective: if referenced.is_empty() { None } else { Some(collective_coverage(&referenced)?) },
    };

    Ok(ReportBundle {
        audit_id: doc.audit_id.clone(),
        ecosystem_name: doc.ecosystem.name.clone(),
        design_class: doc.ecosystem.design_class,
        revision: doc.revision,
        generated_at: opts.generated_at.clone(),
        criterion_policy: doc.criterion_policy,
        primary_scenario: opts.primary_scenario,
        heatmap: heatmap_matrix(&primary_sheet)?,
        consensus,
        reconciliation,
        scenarios,
        reliability: ReliabilitySection {
            computed,
            cited: doc.cited_reliability.clone(),
        },
        media,
        correction_loop,
        frameworks,
        diagnostics: warnings,
    })
}

/// Cells that appear in operative annotations; exposed for callers building views.
pub fn annotated_cells(doc: &AuditDocument) -> Vec<CellId> {
    doc.operative_annotations.iter().map(|a| a.cell).collect()
}
