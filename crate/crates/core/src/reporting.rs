//! Report bundle, heatmap grid, Markdown tables and canonical JSON export.

use crate::coverage::{CoverageReport, DesignClass, Finding};
use crate::error::{Diagnostic, Result};
use crate::evidence::CriterionPolicy;
use crate::frameworks::{CollectiveCoverage, FrameworkSummary};
use crate::media::{CapabilityResult, LoopReport, MediaAggregate, PathwayStatus};
use crate::reliability::{CitedKappa, ReliabilityBreakdown, ReliabilityStats};
use crate::scoring::{Scenario, ScoreSheet};
use crate::taxonomy::{taxonomy, CellId, Function, SlotId};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub rows: Vec<CellId>,
    pub columns: Vec<Function>,
    pub grid: Vec<[u8; 4]>,
    pub total: u32,
}

impl HeatmapMatrix {
    pub fn row(&self, cell: CellId) -> [u8; 4] {
        self.grid[cell.index()]
    }

    pub fn sum(&self) -> u32 {
        self.grid.iter().flatten().map(|v| u32::from(*v)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,A,G,I,L\n");
        for (cell, row) in self.rows.iter().zip(&self.grid) {
            let _ = writeln!(out, "{cell},{},{},{},{}", row[0], row[1], row[2], row[3]);
        }
        out
    }
}

pub fn heatmap_matrix(sheet: &ScoreSheet) -> Result<HeatmapMatrix> {
    let values = sheet.values()?;
    let grid: Vec<[u8; 4]> = CellId::all()
        .map(|c| Function::ALL.map(|k| u8::from(values[c.slot(k).index()].is_present())))
        .collect();
    let total = grid.iter().flatten().map(|v| u32::from(*v)).sum();
    Ok(HeatmapMatrix {
        rows: CellId::all().collect(),
        columns: Function::ALL.to_vec(),
        grid,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub coverage: CoverageReport,
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconciliationSummary {
    pub rater_a: String,
    pub rater_b: String,
    pub disagreements: Vec<SlotId>,
    pub resolved_by_record: Vec<SlotId>,
    pub conservative_defaults: Vec<SlotId>,
    pub borderline_asymmetries: Vec<SlotId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilitySection {
    /// Present only when the audit holds two rater sheets.
    pub computed: Option<ReliabilityBreakdown>,
    pub cited: Vec<CitedKappa>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaSection {
    pub assessment: Vec<PathwayStatus>,
    /// Present only for a complete 12-pathway assessment.
    pub aggregate: Option<MediaAggregate>,
    pub capability: Vec<CapabilityResult>,
    pub capable: u32,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkSection {
    pub summaries: Vec<FrameworkSummary>,
    pub collective: Option<CollectiveCoverage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub audit_id: String,
    pub ecosystem_name: String,
    pub design_class: DesignClass,
    pub revision: u64,
    pub generated_at: String,
    pub criterion_policy: CriterionPolicy,
    /// Scenario used for the slot table, type table and heatmap.
    pub primary_scenario: Scenario,
    pub consensus: ScoreSheet,
    pub reconciliation: Option<ReconciliationSummary>,
    pub scenarios: Vec<ScenarioReport>,
    pub reliability: ReliabilitySection,
    pub media: MediaSection,
    pub correction_loop: Vec<LoopReport>,
    pub frameworks: FrameworkSection,
    pub heatmap: HeatmapMatrix,
    pub diagnostics: Vec<Diagnostic>,
}

impl ReportBundle {
    pub fn scenario(&self, s: Scenario) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|r| r.scenario == s)
    }

    pub fn primary(&self) -> &ScenarioReport {
        self.scenario(self.primary_scenario)
            .expect("bundle carries its primary scenario")
    }
}

/// Keys sorted, no insignificant whitespace.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&v)?)
}

pub fn export_bundle(bundle: &ReportBundle) -> Result<String> {
    canonical_json(bundle)
}

pub fn import_bundle(text: &str) -> Result<ReportBundle> {
    Ok(serde_json::from_str(text)?)
}

fn pillar_label(f: Function) -> &'static str {
    match f {
        Function::A => "Economic (A)",
        Function::G => "Political (G)",
        Function::I => "Integration (I)",
        Function::L => "Fiduciary (L)",
    }
}

fn stats_row(out: &mut String, scope: &str, s: &ReliabilityStats) {
    let m = &s.matrix;
    let _ = writeln!(
        out,
        "| {scope} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
        m.both_present,
        m.a_only,
        m.b_only,
        m.both_absent,
        s.n,
        s.p_o.to_decimal(6),
        s.p_e.to_decimal(6),
        s.kappa,
        s.pabak.to_decimal(6),
        s.interpretation_label.label()
    );
}

pub fn render_markdown(bundle: &ReportBundle) -> String {
    let tax = taxonomy();
    let primary = bundle.primary();
    let mut out = String::new();
    let _ = writeln!(out, "# Governance coverage audit: {}\n", bundle.ecosystem_name);
    let _ = writeln!(out, "- Audit: `{}` (revision {})", bundle.audit_id, bundle.revision);
    if !bundle.generated_at.is_empty() {
        let _ = writeln!(out, "- Generated: {}", bundle.generated_at);
    }
    let tier = serde_json::to_value(bundle.criterion_policy.invocation_tier).unwrap_or_default();
    let _ = writeln!(out, "- Invocation tier: {}", tier.as_str().unwrap_or_default());
    let _ = writeln!(out, "- Scenario shown in slot and type tables: {}\n", bundle.primary_scenario);

    let _ = writeln!(out, "## Sub-function scores\n");
    out.push_str("| Cell | Institution | A (Infra.) | G (Operative) | I (Coord.) | L (Normative) | Score |\n");
    out.push_str("|---|---|:-:|:-:|:-:|:-:|:-:|\n");
    for (cell, row) in bundle.heatmap.rows.iter().zip(&bundle.heatmap.grid) {
        let marks: Vec<&str> = row.iter().map(|v| if *v == 1 { "✓" } else { "×" }).collect();
        let score: u8 = row.iter().sum();
        let _ = writeln!(
            out,
            "| {cell} | {} | {} | {}/4 |",
            tax.cell(*cell).institution_name,
            marks.join(" | "),
            score
        );
    }
    let total = primary.coverage.total;
    let _ = writeln!(
        out,
        "\n**Aggregate: {}/{} sub-functions present ({}% coverage)**\n",
        total.present, total.total, total.pct
    );

    let _ = writeln!(out, "## Coverage by sub-function type\n");
    out.push_str("| Sub-function type | Present | Total | Coverage |\n|---|---|---|---|\n");
    for (kind, t) in &primary.coverage.by_type {
        let _ = writeln!(
            out,
            "| {kind} ({}) | {} | {} | {}% |",
            kind.sub_function_label(),
            t.present,
            t.total,
            t.pct
        );
    }

    let _ = writeln!(out, "\n## Coverage by pillar\n");
    let order = [Scenario::Baseline, Scenario::Strict, Scenario::Generous];
    out.push_str("| Pillar | Baseline | Strict | Generous | Total |\n|---|:-:|:-:|:-:|:-:|\n");
    let reports: Vec<&ScenarioReport> = order.iter().filter_map(|s| bundle.scenario(*s)).collect();
    for f in Function::ALL {
        let cells: Vec<String> = reports.iter().map(|r| r.coverage.pillar(f).to_string()).collect();
        let _ = writeln!(out, "| {} | {} | 16 |", pillar_label(f), cells.join(" | "));
    }
    let totals: Vec<String> = reports.iter().map(|r| r.coverage.total.to_string()).collect();
    let _ = writeln!(out, "| Total | {} | 64 |", totals.join(" | "));

    let _ = writeln!(out, "\n## Interchange media\n");
    out.push_str("| Boundary | Pathway | Medium | Required flow | Status | Capable | Missing slots |\n");
    out.push_str("|---|---|---|---|---|:-:|---|\n");
    for b in tax.boundaries() {
        for p in &b.pathways {
            let status = bundle.media.assessment.iter().find(|s| s.pathway == p.id);
            let status_text = match status {
                Some(s) => match &s.flavor {
                    Some(fl) => format!("{} ({fl})", s.status.label()),
                    None => s.status.label().to_string(),
                },
                None => "not assessed".to_string(),
            };
            let cap = bundle.media.capability.iter().find(|c| c.pathway == p.id);
            let (capable, missing) = match cap {
                Some(c) => (
                    if c.capable { "yes" } else { "no" },
                    c.blocked_reasons.iter().map(|r| r.slot.to_string()).collect::<Vec<_>>().join(", "),
                ),
                None => ("n/a", String::new()),
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {status_text} | {capable} | {missing} |",
                b.id,
                p.id,
                p.medium.label(),
                p.required_flow
            );
        }
    }
    match bundle.media.aggregate {
        Some(a) => {
            let _ = writeln!(
                out,
                "\n**Aggregate: {} of 12 interchange pathways are functional; {} are proto-functional; {} are absent.** Capable under current scores: {} of 12.",
                a.functional, a.proto, a.absent, bundle.media.capable
            );
        }
        None => {
            let _ = writeln!(
                out,
                "\nMedia assessment incomplete. Capable under current scores: {} of 12.",
                bundle.media.capable
            );
        }
    }
    for w in &bundle.media.warnings {
        let _ = writeln!(out, "\n- {w}");
    }

    let _ = writeln!(out, "\n## Correction loop\n");
    for lr in &bundle.correction_loop {
        let _ = writeln!(out, "Incident `{}`: {}\n", lr.incident.id, lr.incident.description);
        out.push_str("| Step | Response | Required cells | Ready (G-sub present) | Status |\n|:-:|---|---|---|---|\n");
        for s in &lr.steps {
            let join = |v: &[CellId]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                s.step,
                s.name,
                join(&s.required_cells),
                join(&s.ready_cells),
                s.status.label()
            );
        }
        let annotated: Vec<_> = lr.steps.iter().flat_map(|s| &s.annotations).collect();
        if !annotated.is_empty() {
            out.push_str("\nOperative-institution annotations (informational):\n\n");
            let yn = |v: Option<bool>| match v {
                Some(true) => "yes",
                Some(false) => "no",
                None => "?",
            };
            for a in annotated {
                let _ = writeln!(
                    out,
                    "- {}: enforceable membership {}, binding rule change {}, sanctionable non-compliance {}",
                    a.cell,
                    yn(a.enforceable_membership),
                    yn(a.binding_rule_change),
                    yn(a.sanctionable_noncompliance)
                );
            }
        }
        out.push('\n');
    }

    let _ = writeln!(out, "## Findings\n");
    for r in &reports {
        let _ = writeln!(out, "### {}\n", r.scenario);
        if r.findings.is_empty() {
            out.push_str("No threshold findings.\n\n");
        }
        for f in &r.findings {
            let code = serde_json::to_value(f.code).unwrap_or_default();
            let _ = writeln!(out, "- `{}` ({}): {}", code.as_str().unwrap_or_default(), f.subject, f.detail);
        }
        if !r.findings.is_empty() {
            out.push('\n');
        }
    }

    let _ = writeln!(out, "## Reliability\n");
    match &bundle.reliability.computed {
        Some(b) => {
            let _ = writeln!(out, "Raters `{}` and `{}`.\n", b.rater_a, b.rater_b);
            out.push_str("| Scope | Both present | A only | B only | Both absent | N | p_o | p_e | κ | PABAK | Band |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
            stats_row(&mut out, "all", &b.overall);
            for s in b.by_pillar.iter().chain(&b.by_kind) {
                stats_row(&mut out, &s.filter.to_string(), s);
            }
            out.push('\n');
        }
        None => out.push_str("Computed reliability: absent (fewer than two rater sheets).\n\n"),
    }
    if !bundle.reliability.cited.is_empty() {
        out.push_str("| Scope | κ | Note |\n|---|---|---|\n");
        for c in &bundle.reliability.cited {
            let _ = writeln!(out, "| {} | {} | {} |", c.scope, c.kappa, c.marker);
        }
        out.push('\n');
    }
    if let Some(r) = &bundle.reconciliation {
        let _ = writeln!(
            out,
            "Reconciliation: {} disagreements, {} resolved by record, {} conservative defaults.\n",
            r.disagreements.len(),
            r.resolved_by_record.len(),
            r.conservative_defaults.len()
        );
    }

    let _ = writeln!(out, "## Frameworks\n");
    if bundle.frameworks.summaries.is_empty() {
        out.push_str("No frameworks referenced.\n");
    } else {
        out.push_str("| Framework | Tier | Strong | Partial | None | Confidence |\n|---|---|---|---|---|---|\n");
        for s in &bundle.frameworks.summaries {
            let tier = serde_json::to_value(s.declared_tier).unwrap_or_default();
            let conf = serde_json::to_value(s.confidence).unwrap_or_default();
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                s.name,
                tier.as_str().unwrap_or_default(),
                s.strong,
                s.partial,
                s.none,
                conf.as_str().unwrap_or_default()
            );
        }
        if let Some(c) = &bundle.frameworks.collective {
            let list = |v: &std::collections::BTreeSet<CellId>| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
            let _ = writeln!(
                out,
                "\nCollectively covered ({}): {}\n\nUniversal gaps: {}",
                c.covered_cells.len(),
                list(&c.covered_cells),
                if c.universal_gaps.is_empty() { "none".to_string() } else { list(&c.universal_gaps) }
            );
        }
        for d in bundle.frameworks.summaries.iter().flat_map(|s| &s.diagnostics) {
            let _ = writeln!(out, "\n- {d}");
        }
    }
    if !bundle.diagnostics.is_empty() {
        let _ = writeln!(out, "\n## Diagnostics\n");
        for d in &bundle.diagnostics {
            let _ = writeln!(out, "- {d}");
        }
    }
    out
}
