//! Per-rater score sheets, dual-rater reconciliation, the borderline-case
//! registry and strict/baseline/generous scenarios.

use crate::error::{AuditError, Diagnostic, Result};
use crate::evidence::Presence;
use crate::taxonomy::SlotId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub const CONSENSUS_RATER: &str = "consensus";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub slot_id: SlotId,
    pub value: Presence,
    #[serde(default)]
    pub rationale: String,
    #[serde(default)]
    pub borderline: bool,
    #[serde(default)]
    pub evidence_ids: Vec<String>,
}

impl ScoreEntry {
    pub fn new(slot_id: SlotId, value: Presence) -> Self {
        ScoreEntry {
            slot_id,
            value,
            rationale: String::new(),
            borderline: false,
            evidence_ids: Vec::new(),
        }
    }
}

/// One rater's judgments. A sheet may be filled incrementally; operations
/// that compare or aggregate sheets require all 64 entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSheet {
    pub rater_id: String,
    pub audit_id: String,
    pub entries: Vec<ScoreEntry>,
}

impl ScoreSheet {
    pub fn empty(rater_id: &str, audit_id: &str) -> Self {
        ScoreSheet {
            rater_id: rater_id.to_string(),
            audit_id: audit_id.to_string(),
            entries: Vec::new(),
        }
    }

    /// A complete sheet with every slot at `value`.
    pub fn uniform(rater_id: &str, audit_id: &str, value: Presence) -> Self {
        ScoreSheet::from_present(rater_id, audit_id, SlotId::all().filter(|_| value.is_present()))
    }

    /// A complete sheet with exactly the given slots present.
    pub fn from_present(rater_id: &str, audit_id: &str, present: impl IntoIterator<Item = SlotId>) -> Self {
        let present: BTreeSet<SlotId> = present.into_iter().collect();
        ScoreSheet {
            rater_id: rater_id.to_string(),
            audit_id: audit_id.to_string(),
            entries: SlotId::all()
                .map(|s| ScoreEntry::new(s, Presence::from_bool(present.contains(&s))))
                .collect(),
        }
    }

    pub fn entry(&self, slot: SlotId) -> Option<&ScoreEntry> {
        self.entries.iter().find(|e| e.slot_id == slot)
    }

    pub fn value(&self, slot: SlotId) -> Option<Presence> {
        self.entry(slot).map(|e| e.value)
    }

    pub fn is_present(&self, slot: SlotId) -> bool {
        self.value(slot) == Some(Presence::Present)
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == 64 && self.structural_diagnostics().is_empty()
    }

    /// Duplicate-slot findings; slot ids are already typed so they always resolve.
    pub fn structural_diagnostics(&self) -> Vec<Diagnostic> {
        let mut seen = BTreeSet::new();
        self.entries
            .iter()
            .filter(|e| !seen.insert(e.slot_id))
            .map(|e| {
                Diagnostic::error(
                    "duplicate-slot",
                    format!("sheet of rater {:?} scores {} more than once", self.rater_id, e.slot_id),
                )
            })
            .collect()
    }

    pub fn require_complete(&self) -> Result<()> {
        let diags = self.structural_diagnostics();
        if !diags.is_empty() {
            return Err(AuditError::with_diagnostics("score sheet has duplicate entries", diags));
        }
        if self.entries.len() != 64 {
            let scored: BTreeSet<SlotId> = self.entries.iter().map(|e| e.slot_id).collect();
            let missing: Vec<String> = SlotId::all().filter(|s| !scored.contains(s)).map(|s| s.to_string()).collect();
            return Err(AuditError::validation(format!(
                "score sheet of rater {:?} is incomplete: {} of 64 slots scored, missing {}",
                self.rater_id,
                self.entries.len(),
                missing.join(", ")
            )));
        }
        Ok(())
    }

    /// Values indexed by slot position. Requires a complete sheet.
    pub fn values(&self) -> Result<[Presence; 64]> {
        self.require_complete()?;
        let mut out = [Presence::Absent; 64];
        for e in &self.entries {
            out[e.slot_id.index()] = e.value;
        }
        Ok(out)
    }

    pub fn present_set(&self) -> BTreeSet<SlotId> {
        self.entries.iter().filter(|e| e.value.is_present()).map(|e| e.slot_id).collect()
    }

    pub fn present_count(&self) -> usize {
        self.entries.iter().filter(|e| e.value.is_present()).count()
    }

    /// Insert or replace the entry for `entry.slot_id`, keeping canonical order.
    pub fn upsert(&mut self, entry: ScoreEntry) {
        match self.entries.iter_mut().find(|e| e.slot_id == entry.slot_id) {
            Some(e) => *e = entry,
            None => self.entries.push(entry),
        }
        self.entries.sort_by_key(|e| e.slot_id.index());
    }

    pub fn set_value(&mut self, slot: SlotId, value: Presence) {
        match self.entries.iter_mut().find(|e| e.slot_id == slot) {
            Some(e) => e.value = value,
            None => self.upsert(ScoreEntry::new(slot, value)),
        }
    }

    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|e| e.slot_id.index());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Strict,
    Baseline,
    Generous,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Strict, Scenario::Baseline, Scenario::Generous];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Strict => "strict",
            Scenario::Baseline => "baseline",
            Scenario::Generous => "generous",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Scenario::Strict),
            "baseline" => Ok(Scenario::Baseline),
            "generous" => Ok(Scenario::Generous),
            other => Err(AuditError::validation(format!(
                "unknown scenario {other:?} (expected strict, baseline or generous)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorderlineCase {
    pub slot_id: SlotId,
    pub baseline_value: Presence,
    pub strict_value: Presence,
    pub generous_value: Presence,
    #[serde(default)]
    pub rationale: String,
}

impl BorderlineCase {
    pub fn value(&self, scenario: Scenario) -> Presence {
        match scenario {
            Scenario::Strict => self.strict_value,
            Scenario::Baseline => self.baseline_value,
            Scenario::Generous => self.generous_value,
        }
    }
}

/// strict ≤ baseline ≤ generous per case, and at most one case per slot.
pub fn validate_registry(registry: &[BorderlineCase]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for case in registry {
        if !seen.insert(case.slot_id) {
            out.push(Diagnostic::error(
                "duplicate-slot",
                format!("borderline registry lists {} more than once", case.slot_id),
            ));
        }
        if !(case.strict_value <= case.baseline_value && case.baseline_value <= case.generous_value) {
            out.push(Diagnostic::error(
                "scenario-order",
                format!("borderline case {} violates strict <= baseline <= generous", case.slot_id),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionCited {
    C1,
    C2,
    C3,
    #[serde(rename = "conservative-default")]
    ConservativeDefault,
}

impl FromStr for CriterionCited {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(CriterionCited::C1),
            "C2" | "C2A" | "C2B" => Ok(CriterionCited::C2),
            "C3" => Ok(CriterionCited::C3),
            "CONSERVATIVE-DEFAULT" => Ok(CriterionCited::ConservativeDefault),
            _ => Err(AuditError::validation(format!("unknown criterion {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconciliationRecord {
    pub slot_id: SlotId,
    #[serde(default)]
    pub rater_values: BTreeMap<String, Presence>,
    pub resolved_value: Presence,
    pub criterion_cited: CriterionCited,
    #[serde(default)]
    pub discussion_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub slot_id: SlotId,
    pub a_value: Presence,
    pub b_value: Presence,
    pub a_rationale: String,
    pub b_rationale: String,
}

fn check_pair(a: &ScoreSheet, b: &ScoreSheet) -> Result<([Presence; 64], [Presence; 64])> {
    if a.audit_id != b.audit_id {
        return Err(AuditError::validation(format!(
            "sheets belong to different audits ({:?} vs {:?})",
            a.audit_id, b.audit_id
        )));
    }
    Ok((a.values()?, b.values()?))
}

pub fn diff_sheets(a: &ScoreSheet, b: &ScoreSheet) -> Result<Vec<Disagreement>> {
    let (va, vb) = check_pair(a, b)?;
    Ok(SlotId::all()
        .filter(|s| va[s.index()] != vb[s.index()])
        .map(|s| Disagreement {
            slot_id: s,
            a_value: va[s.index()],
            b_value: vb[s.index()],
            a_rationale: a.entry(s).map(|e| e.rationale.clone()).unwrap_or_default(),
            b_rationale: b.entry(s).map(|e| e.rationale.clone()).unwrap_or_default(),
        })
        .collect())
}

/// Consensus sheet plus how each disputed slot was settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reconciliation {
    pub consensus: ScoreSheet,
    pub disagreements: Vec<SlotId>,
    pub resolved_by_record: Vec<SlotId>,
    pub conservative_defaults: Vec<SlotId>,
    /// Slots one rater flagged borderline and the other did not.
    pub borderline_asymmetries: Vec<SlotId>,
}

fn merge_text(a: &str, b: &str, a_rater: &str, b_rater: &str) -> String {
    if a == b {
        a.to_string()
    } else if a.is_empty() {
        b.to_string()
    } else if b.is_empty() {
        a.to_string()
    } else {
        format!("{a_rater}: {a} | {b_rater}: {b}")
    }
}

/// Checks that `records` only touch disputed slots of the pair.
pub fn validate_records(a: &ScoreSheet, b: &ScoreSheet, records: &[ReconciliationRecord]) -> Result<()> {
    let disputed: BTreeSet<SlotId> = diff_sheets(a, b)?.into_iter().map(|d| d.slot_id).collect();
    let mut seen = BTreeSet::new();
    let mut diags = Vec::new();
    for r in records {
        if !seen.insert(r.slot_id) {
            diags.push(Diagnostic::error("duplicate-record", format!("{} has more than one reconciliation record", r.slot_id)));
        }
        if !disputed.contains(&r.slot_id) {
            diags.push(Diagnostic::error(
                "not-disputed",
                format!("{} is not a disagreement between {:?} and {:?}", r.slot_id, a.rater_id, b.rater_id),
            ));
            continue;
        }
        for (rater, value) in &r.rater_values {
            let actual = if *rater == a.rater_id {
                a.value(r.slot_id)
            } else if *rater == b.rater_id {
                b.value(r.slot_id)
            } else {
                diags.push(Diagnostic::error("unknown-rater", format!("record for {} cites unknown rater {rater:?}", r.slot_id)));
                continue;
            };
            if actual != Some(*value) {
                diags.push(Diagnostic::error(
                    "rater-value-mismatch",
                    format!("record for {} misstates the value of rater {rater:?}", r.slot_id),
                ));
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(AuditError::with_diagnostics("reconciliation records do not match the sheets", diags))
    }
}

pub fn reconcile_with_trace(a: &ScoreSheet, b: &ScoreSheet, records: &[ReconciliationRecord]) -> Result<Reconciliation> {
    validate_records(a, b, records)?;
    let by_slot: BTreeMap<SlotId, &ReconciliationRecord> = records.iter().map(|r| (r.slot_id, r)).collect();
    let mut consensus = ScoreSheet::empty(CONSENSUS_RATER, &a.audit_id);
    let mut trace = Reconciliation {
        consensus: ScoreSheet::empty(CONSENSUS_RATER, &a.audit_id),
        disagreements: Vec::new(),
        resolved_by_record: Vec::new(),
        conservative_defaults: Vec::new(),
        borderline_asymmetries: Vec::new(),
    };
    for slot in SlotId::all() {
        let ea = a.entry(slot).expect("complete sheet");
        let eb = b.entry(slot).expect("complete sheet");
        if ea.borderline != eb.borderline {
            trace.borderline_asymmetries.push(slot);
        }
        let mut evidence_ids = ea.evidence_ids.clone();
        for id in &eb.evidence_ids {
            if !evidence_ids.contains(id) {
                evidence_ids.push(id.clone());
            }
        }
        let (value, rationale) = if ea.value == eb.value {
            (ea.value, merge_text(&ea.rationale, &eb.rationale, &a.rater_id, &b.rater_id))
        } else {
            trace.disagreements.push(slot);
            match by_slot.get(&slot) {
                Some(r) => {
                    trace.resolved_by_record.push(slot);
                    let criterion = serde_json::to_value(r.criterion_cited).expect("plain enum");
                    let note = if r.discussion_note.is_empty() {
                        String::new()
                    } else {
                        format!(": {}", r.discussion_note)
                    };
                    (r.resolved_value, format!("resolved ({}){note}", criterion.as_str().unwrap_or_default()))
                }
                None => {
                    trace.conservative_defaults.push(slot);
                    (Presence::Absent, "conservative default: unresolved disagreement".to_string())
                }
            }
        };
        consensus.entries.push(ScoreEntry {
            slot_id: slot,
            value,
            rationale,
            borderline: ea.borderline || eb.borderline,
            evidence_ids,
        });
    }
    trace.consensus = consensus;
    Ok(trace)
}

/// Agreed slots keep their value, recorded disputes take the resolved value,
/// anything else disputed falls to absent.
pub fn reconcile(a: &ScoreSheet, b: &ScoreSheet, records: &[ReconciliationRecord]) -> Result<ScoreSheet> {
    Ok(reconcile_with_trace(a, b, records)?.consensus)
}

pub fn apply_scenario(consensus: &ScoreSheet, registry: &[BorderlineCase], scenario: Scenario) -> Result<ScoreSheet> {
    consensus.require_complete()?;
    let diags = validate_registry(registry);
    if !diags.is_empty() {
        return Err(AuditError::with_diagnostics("borderline registry is invalid", diags));
    }
    let mut out = consensus.clone();
    let mut mismatches = Vec::new();
    for case in registry {
        let current = consensus.value(case.slot_id).expect("complete sheet");
        if current != case.baseline_value {
            mismatches.push(Diagnostic::error(
                "registry-out-of-sync",
                format!(
                    "borderline case {} expects baseline {:?} but the consensus scores {:?}",
                    case.slot_id, case.baseline_value, current
                ),
            ));
            continue;
        }
        out.set_value(case.slot_id, case.value(scenario));
    }
    if !mismatches.is_empty() {
        return Err(AuditError::with_diagnostics("borderline registry is out of sync with the consensus", mismatches));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot(s: &str) -> SlotId {
        s.parse().unwrap()
    }

    fn sheet(rater: &str, present: &[&str]) -> ScoreSheet {
        ScoreSheet::from_present(rater, "audit", present.iter().map(|s| slot(s)))
    }

    #[test]
    fn diff_identical_is_empty() {
        let a = sheet("a", &["A-A/A", "G-G/G"]);
        assert!(diff_sheets(&a, &a.clone()).unwrap().is_empty());
    }

    #[test]
    fn diff_single_slot() {
        let a = sheet("a", &["A-A/A"]);
        let b = sheet("b", &["A-A/A", "G-A/A"]);
        let d = diff_sheets(&a, &b).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].slot_id, slot("G-A/A"));
        assert_eq!(d[0].a_value, Presence::Absent);
        assert_eq!(d[0].b_value, Presence::Present);
    }

    #[test]
    fn diff_complementary_is_everything() {
        let a = ScoreSheet::uniform("a", "audit", Presence::Present);
        let b = ScoreSheet::uniform("b", "audit", Presence::Absent);
        assert_eq!(diff_sheets(&a, &b).unwrap().len(), 64);
    }

    #[test]
    fn diff_rejects_incomplete_and_foreign_sheets() {
        let a = sheet("a", &[]);
        let mut b = sheet("b", &[]);
        b.entries.pop();
        assert!(matches!(diff_sheets(&a, &b), Err(AuditError::Validation { .. })));
        let c = ScoreSheet::from_present("c", "other", []);
        assert!(diff_sheets(&a, &c).is_err());
    }

    #[test]
    fn record_resolves_to_absent() {
        let a = sheet("a", &["L-I/A", "L-I/G"]);
        let b = sheet("b", &["L-I/A"]);
        let rec = ReconciliationRecord {
            slot_id: slot("L-I/G"),
            rater_values: [("a".to_string(), Presence::Present), ("b".to_string(), Presence::Absent)].into(),
            resolved_value: Presence::Absent,
            criterion_cited: CriterionCited::C1,
            discussion_note: "C1 and C3 not satisfied".into(),
        };
        let c = reconcile(&a, &b, &[rec]).unwrap();
        assert_eq!(c.value(slot("L-I/G")), Some(Presence::Absent));
        assert_eq!(c.value(slot("L-I/A")), Some(Presence::Present));
        assert_eq!(c.rater_id, CONSENSUS_RATER);
    }

    #[test]
    fn record_can_retain_presence() {
        let a = sheet("a", &["G-I/A"]);
        let b = sheet("b", &[]);
        let rec = ReconciliationRecord {
            slot_id: slot("G-I/A"),
            rater_values: BTreeMap::new(),
            resolved_value: Presence::Present,
            criterion_cited: CriterionCited::C1,
            discussion_note: String::new(),
        };
        assert!(reconcile(&a, &b, &[rec]).unwrap().is_present(slot("G-I/A")));
    }

    #[test]
    fn unrecorded_disagreement_defaults_to_absent() {
        let a = sheet("a", &["I-G/I"]);
        let b = sheet("b", &[]);
        let t = reconcile_with_trace(&a, &b, &[]).unwrap();
        assert_eq!(t.consensus.value(slot("I-G/I")), Some(Presence::Absent));
        assert_eq!(t.conservative_defaults, vec![slot("I-G/I")]);
    }

    #[test]
    fn reconcile_identical_is_identity() {
        let mut a = sheet("consensus", &["A-A/A", "G-G/A"]);
        a.entries[0].rationale = "x402".into();
        a.entries[0].borderline = true;
        assert_eq!(reconcile(&a, &a, &[]).unwrap(), a);
    }

    #[test]
    fn record_on_agreed_slot_is_rejected() {
        let a = sheet("a", &["A-A/A"]);
        let rec = ReconciliationRecord {
            slot_id: slot("A-A/A"),
            rater_values: BTreeMap::new(),
            resolved_value: Presence::Absent,
            criterion_cited: CriterionCited::C3,
            discussion_note: String::new(),
        };
        let err = reconcile(&a, &a.clone(), &[rec]).unwrap_err();
        assert_eq!(err.diagnostics()[0].code, "not-disputed");
    }

    #[test]
    fn borderline_flags_are_unioned() {
        let mut a = sheet("a", &[]);
        let b = sheet("b", &[]);
        a.entries[5].borderline = true;
        let t = reconcile_with_trace(&a, &b, &[]).unwrap();
        assert!(t.consensus.entries[5].borderline);
        assert_eq!(t.borderline_asymmetries, vec![SlotId::from_index(5)]);
    }

    fn case(s: &str, strict: bool, base: bool, generous: bool) -> BorderlineCase {
        BorderlineCase {
            slot_id: slot(s),
            strict_value: Presence::from_bool(strict),
            baseline_value: Presence::from_bool(base),
            generous_value: Presence::from_bool(generous),
            rationale: String::new(),
        }
    }

    #[test]
    fn scenarios_touch_only_registry_slots() {
        let c = sheet("consensus", &["G-I/A", "A-A/A"]);
        let reg = vec![case("G-I/A", false, true, true), case("L-I/G", false, false, true)];
        let strict = apply_scenario(&c, &reg, Scenario::Strict).unwrap();
        let generous = apply_scenario(&c, &reg, Scenario::Generous).unwrap();
        assert_eq!(strict.present_set(), [slot("A-A/A")].into());
        assert_eq!(generous.present_set(), [slot("A-A/A"), slot("G-I/A"), slot("L-I/G")].into());
        assert_eq!(apply_scenario(&c, &reg, Scenario::Baseline).unwrap(), c);
        for sc in Scenario::ALL {
            assert_eq!(apply_scenario(&c, &[], sc).unwrap(), c);
        }
    }

    #[test]
    fn registry_out_of_sync_is_rejected() {
        let c = sheet("consensus", &[]);
        let err = apply_scenario(&c, &[case("G-I/A", false, true, true)], Scenario::Strict).unwrap_err();
        assert_eq!(err.diagnostics()[0].code, "registry-out-of-sync");
    }

    #[test]
    fn registry_order_is_checked() {
        let d = validate_registry(&[case("A-A/G", true, false, true)]);
        assert_eq!(d[0].code, "scenario-order");
    }

    #[test]
    fn partial_sheet_upsert_keeps_order() {
        let mut s = ScoreSheet::empty("a", "audit");
        s.upsert(ScoreEntry::new(slot("L-L/L"), Presence::Absent));
        s.upsert(ScoreEntry::new(slot("A-A/A"), Presence::Present));
        s.upsert(ScoreEntry::new(slot("A-A/A"), Presence::Absent));
        assert_eq!(s.entries.len(), 2);
        assert_eq!(s.entries[0].slot_id, slot("A-A/A"));
        assert!(!s.is_complete());
        assert!(s.values().is_err());
    }
}
