//! Coverage matrices of external frameworks over the sixteen cells, and
//! principle-to-cell mappings.

use crate::error::{AuditError, Diagnostic, Result};
use crate::taxonomy::{CellId, Function};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageLevel {
    None,
    Partial,
    Strong,
}

impl CoverageLevel {
    pub fn symbol(self) -> &'static str {
        match self {
            CoverageLevel::None => "□",
            CoverageLevel::Partial => "◐",
            CoverageLevel::Strong => "■",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    A,
    B,
    C,
    #[default]
    Unclassified,
}

/// How directly a data set follows its source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    #[default]
    PaperExplicit,
    EditorInterpreted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkCoverage {
    pub framework_id: String,
    #[serde(default)]
    pub name: String,
    pub levels: BTreeMap<CellId, CoverageLevel>,
    #[serde(default)]
    pub declared_tier: Tier,
    /// Strong count printed alongside the source matrix, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_strong_count: Option<u32>,
    #[serde(default)]
    pub confidence: Confidence,
}

impl FrameworkCoverage {
    pub fn uniform(id: &str, level: CoverageLevel) -> Self {
        FrameworkCoverage {
            framework_id: id.to_string(),
            name: id.to_string(),
            levels: CellId::all().map(|c| (c, level)).collect(),
            declared_tier: Tier::Unclassified,
            declared_strong_count: None,
            confidence: Confidence::PaperExplicit,
        }
    }

    pub fn level(&self, cell: CellId) -> CoverageLevel {
        self.levels.get(&cell).copied().unwrap_or(CoverageLevel::None)
    }

    pub fn count(&self, level: CoverageLevel) -> u32 {
        self.levels.values().filter(|l| **l == level).count() as u32
    }
}

pub fn strong_count(fc: &FrameworkCoverage) -> u32 {
    fc.count(CoverageLevel::Strong)
}

/// Missing cells are errors. A tier-c framework without strong L-L and a
/// declared strong count that disagrees with the matrix are warnings.
pub fn validate_framework(fc: &FrameworkCoverage) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let missing: Vec<String> = CellId::all()
        .filter(|c| !fc.levels.contains_key(c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        out.push(Diagnostic::error(
            "missing-cell",
            format!("framework {} has no level for {}", fc.framework_id, missing.join(", ")),
        ));
    }
    let ll = CellId::new(Function::L, Function::L);
    if fc.declared_tier == Tier::C && fc.level(ll) != CoverageLevel::Strong {
        out.push(Diagnostic::warning(
            "tier-c-without-strong-l-l",
            format!("framework {} is declared tier c but L-L is not strong", fc.framework_id),
        ));
    }
    if let Some(declared) = fc.declared_strong_count {
        let counted = strong_count(fc);
        if declared != counted {
            out.push(Diagnostic::warning(
                "strong-count-mismatch",
                format!(
                    "framework {} declares {declared} strong cells but its matrix has {counted}",
                    fc.framework_id
                ),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectiveCoverage {
    pub framework_ids: Vec<String>,
    pub covered_cells: BTreeSet<CellId>,
    pub universal_gaps: BTreeSet<CellId>,
}

pub fn collective_coverage(set: &[FrameworkCoverage]) -> Result<CollectiveCoverage> {
    if set.is_empty() {
        return Err(AuditError::validation("collective coverage needs at least one framework"));
    }
    let covered_cells: BTreeSet<CellId> = CellId::all()
        .filter(|c| set.iter().any(|f| f.level(*c) != CoverageLevel::None))
        .collect();
    Ok(CollectiveCoverage {
        framework_ids: set.iter().map(|f| f.framework_id.clone()).collect(),
        universal_gaps: CellId::all().filter(|c| !covered_cells.contains(c)).collect(),
        covered_cells,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleMapping {
    pub principle_id: String,
    #[serde(default)]
    pub name: String,
    pub mapped_cells: Vec<CellId>,
    #[serde(default)]
    pub note: String,
}

pub fn validate_mappings(mappings: &[PrincipleMapping]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for m in mappings {
        if m.mapped_cells.is_empty() {
            out.push(Diagnostic::error(
                "no-cells",
                format!("principle {} maps to no cell", m.principle_id),
            ));
        }
        if !seen.insert(m.principle_id.as_str()) {
            out.push(Diagnostic::error(
                "duplicate-id",
                format!("principle {} is listed more than once", m.principle_id),
            ));
        }
    }
    out
}

/// Cells no principle maps to.
pub fn principle_gaps(mappings: &[PrincipleMapping]) -> BTreeSet<CellId> {
    let mapped: BTreeSet<CellId> = mappings.iter().flat_map(|m| m.mapped_cells.iter().copied()).collect();
    CellId::all().filter(|c| !mapped.contains(c)).collect()
}

/// Per-framework line for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkSummary {
    pub framework_id: String,
    pub name: String,
    pub declared_tier: Tier,
    pub strong: u32,
    pub partial: u32,
    pub none: u32,
    pub confidence: Confidence,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

pub fn summarize(fc: &FrameworkCoverage) -> FrameworkSummary {
    FrameworkSummary {
        framework_id: fc.framework_id.clone(),
        name: fc.name.clone(),
        declared_tier: fc.declared_tier,
        strong: fc.count(CoverageLevel::Strong),
        partial: fc.count(CoverageLevel::Partial),
        none: fc.count(CoverageLevel::None) + (16 - fc.levels.len() as u32),
        confidence: fc.confidence,
        diagnostics: validate_framework(fc),
    }
}
