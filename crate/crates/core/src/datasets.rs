//! Shipped reference data from the OpenClaw case study and the framework
//! comparisons. Files live under `data/reference/<dataset_id>.json` and are
//! embedded at build time; a directory of same-named files can override them.

use crate::error::{AuditError, Diagnostic, Result};
use crate::frameworks::{validate_framework, validate_mappings, Confidence, FrameworkCoverage, PrincipleMapping};
use crate::media::{missing_pathways, validate_assessment, PathwayStatus};
use crate::scoring::{validate_registry, BorderlineCase, ScoreSheet};
use crate::service::{validate_document, AuditDocument};
use crate::taxonomy::{CellId, PatternVariableProfile};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DatasetId {
    OpenclawBaselineSheet,
    BorderlineRegistryC2,
    Table9Media,
    Table2aFrameworks,
    HaipFramework,
    Table11aOstrom,
    Table12Layers,
    PatternVariableRequirements,
    OpenclawAudit,
}

impl DatasetId {
    pub const ALL: [DatasetId; 9] = [
        DatasetId::OpenclawBaselineSheet,
        DatasetId::BorderlineRegistryC2,
        DatasetId::Table9Media,
        DatasetId::Table2aFrameworks,
        DatasetId::HaipFramework,
        DatasetId::Table11aOstrom,
        DatasetId::Table12Layers,
        DatasetId::PatternVariableRequirements,
        DatasetId::OpenclawAudit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::OpenclawBaselineSheet => "openclaw-baseline-sheet",
            DatasetId::BorderlineRegistryC2 => "borderline-registry-c2",
            DatasetId::Table9Media => "table9-media",
            DatasetId::Table2aFrameworks => "table2a-frameworks",
            DatasetId::HaipFramework => "haip-framework",
            DatasetId::Table11aOstrom => "table11a-ostrom",
            DatasetId::Table12Layers => "table12-layers",
            DatasetId::PatternVariableRequirements => "pattern-variable-requirements",
            DatasetId::OpenclawAudit => "openclaw-audit",
        }
    }

    fn embedded(self) -> &'static str {
        match self {
            DatasetId::OpenclawBaselineSheet => include_str!("../data/reference/openclaw-baseline-sheet.json"),
            DatasetId::BorderlineRegistryC2 => include_str!("../data/reference/borderline-registry-c2.json"),
            DatasetId::Table9Media => include_str!("../data/reference/table9-media.json"),
            DatasetId::Table2aFrameworks => include_str!("../data/reference/table2a-frameworks.json"),
            DatasetId::HaipFramework => include_str!("../data/reference/haip-framework.json"),
            DatasetId::Table11aOstrom => include_str!("../data/reference/table11a-ostrom.json"),
            DatasetId::Table12Layers => include_str!("../data/reference/table12-layers.json"),
            DatasetId::PatternVariableRequirements => {
                include_str!("../data/reference/pattern-variable-requirements.json")
            }
            DatasetId::OpenclawAudit => include_str!("../data/reference/openclaw-audit.json"),
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        DatasetId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| AuditError::NotFound(format!("unknown dataset {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDataset<T> {
    pub dataset_id: String,
    pub source_ref: String,
    pub confidence: Confidence,
    pub payload: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementProfile {
    pub cell: CellId,
    pub requirement: PatternVariableProfile,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ReferencePayload {
    Sheet(ScoreSheet),
    Registry(Vec<BorderlineCase>),
    Media(Vec<PathwayStatus>),
    Frameworks(Vec<FrameworkCoverage>),
    Principles(Vec<PrincipleMapping>),
    Requirements(Vec<RequirementProfile>),
    Audit(Box<AuditDocument>),
}

/// Where dataset text comes from: an explicit file for that id, else a
/// directory whose `<dataset_id>.json` exists, else the embedded copy.
#[derive(Debug, Clone, Default)]
pub struct DatasetSource {
    pub override_dir: Option<PathBuf>,
    pub files: BTreeMap<DatasetId, PathBuf>,
}

impl DatasetSource {
    pub fn embedded() -> Self {
        DatasetSource::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        DatasetSource {
            override_dir: Some(dir.into()),
            files: BTreeMap::new(),
        }
    }

    pub fn with_file(mut self, id: DatasetId, path: impl Into<PathBuf>) -> Self {
        self.files.insert(id, path.into());
        self
    }

    pub fn text(&self, id: DatasetId) -> Result<String> {
        if let Some(path) = self.files.get(&id) {
            return Ok(std::fs::read_to_string(path)?);
        }
        if let Some(dir) = &self.override_dir {
            let path = dir.join(format!("{id}.json"));
            if path.exists() {
                return Ok(std::fs::read_to_string(path)?);
            }
        }
        Ok(id.embedded().to_string())
    }

    fn typed<T: DeserializeOwned>(&self, id: DatasetId) -> Result<ReferenceDataset<T>> {
        parse_envelope(&self.text(id)?, id)
    }

    pub fn baseline_sheet(&self) -> Result<ReferenceDataset<ScoreSheet>> {
        let d = self.typed::<ScoreSheet>(DatasetId::OpenclawBaselineSheet)?;
        check(DatasetId::OpenclawBaselineSheet, d.payload.structural_diagnostics())?;
        d.payload.require_complete()?;
        Ok(d)
    }

    pub fn borderline_registry(&self) -> Result<ReferenceDataset<Vec<BorderlineCase>>> {
        let d = self.typed::<Vec<BorderlineCase>>(DatasetId::BorderlineRegistryC2)?;
        check(DatasetId::BorderlineRegistryC2, validate_registry(&d.payload))?;
        Ok(d)
    }

    pub fn media_assessment(&self) -> Result<ReferenceDataset<Vec<PathwayStatus>>> {
        let d = self.typed::<Vec<PathwayStatus>>(DatasetId::Table9Media)?;
        let mut diags = validate_assessment(&d.payload);
        for p in missing_pathways(&d.payload) {
            diags.push(Diagnostic::error("missing-pathway", format!("pathway {p} is not assessed")));
        }
        check(DatasetId::Table9Media, diags)?;
        Ok(d)
    }

    fn framework_set(&self, id: DatasetId) -> Result<ReferenceDataset<Vec<FrameworkCoverage>>> {
        let d = self.typed::<Vec<FrameworkCoverage>>(id)?;
        check(id, d.payload.iter().flat_map(validate_framework).collect())?;
        Ok(d)
    }

    pub fn table2a_frameworks(&self) -> Result<ReferenceDataset<Vec<FrameworkCoverage>>> {
        self.framework_set(DatasetId::Table2aFrameworks)
    }

    pub fn haip_framework(&self) -> Result<ReferenceDataset<Vec<FrameworkCoverage>>> {
        self.framework_set(DatasetId::HaipFramework)
    }

    pub fn layer_matrix(&self) -> Result<ReferenceDataset<Vec<FrameworkCoverage>>> {
        self.framework_set(DatasetId::Table12Layers)
    }

    pub fn ostrom_mapping(&self) -> Result<ReferenceDataset<Vec<PrincipleMapping>>> {
        let d = self.typed::<Vec<PrincipleMapping>>(DatasetId::Table11aOstrom)?;
        check(DatasetId::Table11aOstrom, validate_mappings(&d.payload))?;
        Ok(d)
    }

    pub fn requirement_profiles(&self) -> Result<ReferenceDataset<Vec<RequirementProfile>>> {
        let d = self.typed::<Vec<RequirementProfile>>(DatasetId::PatternVariableRequirements)?;
        let mut seen = BTreeSet::new();
        let diags = d
            .payload
            .iter()
            .filter(|r| !seen.insert(r.cell))
            .map(|r| Diagnostic::error("duplicate-cell", format!("requirement for {} is listed twice", r.cell)))
            .collect();
        check(DatasetId::PatternVariableRequirements, diags)?;
        Ok(d)
    }

    pub fn openclaw_audit(&self) -> Result<ReferenceDataset<AuditDocument>> {
        let d = self.typed::<AuditDocument>(DatasetId::OpenclawAudit)?;
        check(DatasetId::OpenclawAudit, validate_document(&d.payload))?;
        Ok(d)
    }

    /// Every framework-shaped matrix shipped: the five compared frameworks,
    /// HAIP and the infrastructure layers.
    pub fn framework_catalog(&self) -> Result<Vec<FrameworkCoverage>> {
        let mut all = self.table2a_frameworks()?.payload;
        all.extend(self.haip_framework()?.payload);
        all.extend(self.layer_matrix()?.payload);
        Ok(all)
    }

    pub fn load(&self, id: DatasetId) -> Result<ReferenceDataset<ReferencePayload>> {
        fn wrap<T>(d: ReferenceDataset<T>, f: impl FnOnce(T) -> ReferencePayload) -> ReferenceDataset<ReferencePayload> {
            ReferenceDataset {
                dataset_id: d.dataset_id,
                source_ref: d.source_ref,
                confidence: d.confidence,
                payload: f(d.payload),
            }
        }
        Ok(match id {
            DatasetId::OpenclawBaselineSheet => wrap(self.baseline_sheet()?, ReferencePayload::Sheet),
            DatasetId::BorderlineRegistryC2 => wrap(self.borderline_registry()?, ReferencePayload::Registry),
            DatasetId::Table9Media => wrap(self.media_assessment()?, ReferencePayload::Media),
            DatasetId::Table2aFrameworks => wrap(self.table2a_frameworks()?, ReferencePayload::Frameworks),
            DatasetId::HaipFramework => wrap(self.haip_framework()?, ReferencePayload::Frameworks),
            DatasetId::Table12Layers => wrap(self.layer_matrix()?, ReferencePayload::Frameworks),
            DatasetId::Table11aOstrom => wrap(self.ostrom_mapping()?, ReferencePayload::Principles),
            DatasetId::PatternVariableRequirements => wrap(self.requirement_profiles()?, ReferencePayload::Requirements),
            DatasetId::OpenclawAudit => wrap(self.openclaw_audit()?, |d| ReferencePayload::Audit(Box::new(d))),
        })
    }
}

fn parse_envelope<T: DeserializeOwned>(text: &str, id: DatasetId) -> Result<ReferenceDataset<T>> {
    let d: ReferenceDataset<T> = serde_json::from_str(text)
        .map_err(|e| AuditError::validation(format!("dataset {id} does not parse: {e}")))?;
    if d.dataset_id != id.as_str() {
        return Err(AuditError::validation(format!(
            "dataset file for {id} declares id {:?}",
            d.dataset_id
        )));
    }
    Ok(d)
}

fn check(id: DatasetId, diags: Vec<Diagnostic>) -> Result<()> {
    let errors: Vec<Diagnostic> = diags.into_iter().filter(Diagnostic::is_error).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(AuditError::with_diagnostics(format!("dataset {id} is invalid"), errors))
    }
}

/// Loads a shipped dataset by id, validated.
pub fn load_reference(dataset_id: &str) -> Result<ReferenceDataset<ReferencePayload>> {
    DatasetSource::embedded().load(dataset_id.parse()?)
}

/// Loads a dataset file from an explicit path; the envelope's id selects the kind.
pub fn load_reference_file(path: &Path) -> Result<ReferenceDataset<ReferencePayload>> {
    #[derive(Deserialize)]
    struct Head {
        dataset_id: String,
    }
    let head: Head = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let id: DatasetId = head.dataset_id.parse()?;
    DatasetSource::embedded().with_file(id, path).load(id)
}
