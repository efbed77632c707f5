//! Governance mechanisms, their evidence, and slot presence under the
//! C1/C2/C3 criteria.

use crate::error::{AuditError, Diagnostic, Result};
use crate::taxonomy::SlotId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanism {
    pub id: String,
    pub name: String,
    pub slot_ids: Vec<SlotId>,
    #[serde(default)]
    pub description: String,
}

/// Observed criterion flags. C2a and C2b are recorded independently.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionFlags {
    #[serde(default)]
    pub c1: bool,
    #[serde(default)]
    pub c2a: bool,
    #[serde(default)]
    pub c2b: bool,
    #[serde(default)]
    pub c3: bool,
}

impl CriterionFlags {
    fn union(self, other: CriterionFlags) -> CriterionFlags {
        CriterionFlags {
            c1: self.c1 || other.c1,
            c2a: self.c2a || other.c2a,
            c2b: self.c2b || other.c2b,
            c3: self.c3 || other.c3,
        }
    }

    pub fn satisfies(self, policy: CriterionPolicy) -> bool {
        let invoked = match policy.invocation_tier {
            InvocationTier::C2bRequired => self.c2b,
            InvocationTier::C2aAccepted => self.c2a || self.c2b,
        };
        self.c1 && invoked && self.c3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub id: String,
    pub mechanism_id: String,
    #[serde(default)]
    pub source_citation: String,
    pub criteria: CriterionFlags,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvocationTier {
    #[default]
    C2bRequired,
    C2aAccepted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionPolicy {
    pub invocation_tier: InvocationTier,
}

impl CriterionPolicy {
    pub const C2B_REQUIRED: CriterionPolicy = CriterionPolicy {
        invocation_tier: InvocationTier::C2bRequired,
    };
    pub const C2A_ACCEPTED: CriterionPolicy = CriterionPolicy {
        invocation_tier: InvocationTier::C2aAccepted,
    };
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceCorpus {
    #[serde(default)]
    pub mechanisms: Vec<Mechanism>,
    #[serde(default)]
    pub items: Vec<EvidenceItem>,
    #[serde(default)]
    pub project_survey_note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presence {
    Absent,
    Present,
}

impl Presence {
    pub fn from_bool(present: bool) -> Presence {
        if present {
            Presence::Present
        } else {
            Presence::Absent
        }
    }

    pub fn is_present(self) -> bool {
        self == Presence::Present
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Presence::Present => "✓",
            Presence::Absent => "×",
        }
    }
}

impl std::str::FromStr for Presence {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "present" | "1" | "true" => Ok(Presence::Present),
            "absent" | "0" | "false" => Ok(Presence::Absent),
            other => Err(AuditError::validation(format!("unknown presence value {other:?} (expected present or absent)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MechanismDetail {
    pub mechanism_id: String,
    pub criteria: CriterionFlags,
    pub satisfies: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PresenceEvaluation {
    pub slot_id: SlotId,
    pub policy: CriterionPolicy,
    pub value: Presence,
    pub satisfying_mechanisms: Vec<String>,
    pub criterion_detail: Vec<MechanismDetail>,
}

impl EvidenceCorpus {
    /// Joint criterion flags per mechanism, across all of its evidence items.
    fn joint_flags(&self) -> BTreeMap<&str, CriterionFlags> {
        let mut flags: BTreeMap<&str, CriterionFlags> = BTreeMap::new();
        for item in &self.items {
            let entry = flags.entry(item.mechanism_id.as_str()).or_default();
            *entry = entry.union(item.criteria);
        }
        flags
    }

    pub fn mechanisms_for(&self, slot: SlotId) -> impl Iterator<Item = &Mechanism> {
        self.mechanisms.iter().filter(move |m| m.slot_ids.contains(&slot))
    }

    /// Slots that at least one mechanism claims.
    pub fn claimed_slots(&self) -> BTreeSet<SlotId> {
        self.mechanisms.iter().flat_map(|m| m.slot_ids.iter().copied()).collect()
    }

    /// Merge another corpus fragment in; ids already present are replaced.
    pub fn merge(&mut self, other: EvidenceCorpus) {
        for m in other.mechanisms {
            match self.mechanisms.iter_mut().find(|x| x.id == m.id) {
                Some(slot) => *slot = m,
                None => self.mechanisms.push(m),
            }
        }
        for item in other.items {
            match self.items.iter_mut().find(|x| x.id == item.id) {
                Some(slot) => *slot = item,
                None => self.items.push(item),
            }
        }
        if !other.project_survey_note.is_empty() {
            self.project_survey_note = other.project_survey_note;
        }
    }
}

/// A slot is present when some mechanism claiming it has evidence that jointly
/// establishes C1, C3 and the invocation tier the policy requires.
pub fn evaluate_presence(corpus: &EvidenceCorpus, slot: SlotId, policy: CriterionPolicy) -> PresenceEvaluation {
    let flags = corpus.joint_flags();
    let mut detail: Vec<MechanismDetail> = corpus
        .mechanisms_for(slot)
        .map(|m| {
            let criteria = flags.get(m.id.as_str()).copied().unwrap_or_default();
            MechanismDetail {
                mechanism_id: m.id.clone(),
                criteria,
                satisfies: criteria.satisfies(policy),
            }
        })
        .collect();
    detail.sort_by(|a, b| a.mechanism_id.cmp(&b.mechanism_id));
    detail.dedup_by(|a, b| a.mechanism_id == b.mechanism_id);
    let satisfying: Vec<String> = detail
        .iter()
        .filter(|d| d.satisfies)
        .map(|d| d.mechanism_id.clone())
        .collect();
    PresenceEvaluation {
        slot_id: slot,
        policy,
        value: Presence::from_bool(!satisfying.is_empty()),
        satisfying_mechanisms: satisfying,
        criterion_detail: detail,
    }
}

/// Parses the slot id first so callers handing in raw text get a validation error.
pub fn evaluate_presence_str(corpus: &EvidenceCorpus, slot: &str, policy: CriterionPolicy) -> Result<PresenceEvaluation> {
    let slot: SlotId = slot.parse()?;
    Ok(evaluate_presence(corpus, slot, policy))
}

pub fn validate_corpus(corpus: &EvidenceCorpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for m in &corpus.mechanisms {
        if !seen.insert(m.id.as_str()) {
            out.push(Diagnostic::error("duplicate-id", format!("mechanism id {:?} is used more than once", m.id)));
        }
        if m.slot_ids.is_empty() {
            out.push(Diagnostic::error("no-slots", format!("mechanism {:?} claims no slot", m.id)));
        }
    }
    let mut seen_items = BTreeSet::new();
    for item in &corpus.items {
        if !seen_items.insert(item.id.as_str()) {
            out.push(Diagnostic::error("duplicate-id", format!("evidence item id {:?} is used more than once", item.id)));
        }
        if !seen.contains(item.mechanism_id.as_str()) {
            out.push(Diagnostic::error(
                "dangling-reference",
                format!("evidence item {:?} references missing mechanism {:?}", item.id, item.mechanism_id),
            ));
        }
    }
    let evidenced: BTreeSet<&str> = corpus.items.iter().map(|i| i.mechanism_id.as_str()).collect();
    for m in &corpus.mechanisms {
        if !evidenced.contains(m.id.as_str()) {
            out.push(Diagnostic::warning("no-evidence", format!("mechanism {:?} has no evidence items", m.id)));
        }
    }
    out
}
