use agil_audit::coverage::{compute_coverage, evaluate_prediction, DesignClass, EcosystemCoverage};
use agil_audit::datasets::DatasetSource;
use agil_audit::error::{AuditError, Result};
use agil_audit::evidence::{evaluate_presence, EvidenceCorpus, Presence};
use agil_audit::frameworks::{collective_coverage, principle_gaps, summarize, FrameworkCoverage};
use agil_audit::reliability::{reliability_breakdown, ReliabilityStats};
use agil_audit::reporting::{canonical_json, export_bundle, render_markdown};
use agil_audit::scoring::{
    apply_scenario, CriterionCited, ReconciliationRecord, Scenario, ScoreEntry, ScoreSheet,
};
use agil_audit::service::http::{serve, AppState};
use agil_audit::service::{
    consensus_of, create_audit, run_pipeline, AuditDocument, FileStore, NewAudit, PipelineOptions,
};
use agil_audit::taxonomy::{derive_cell_profile, taxonomy, SlotId};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "agil", version, about = "Governance-coverage audits over the AGIL sub-function grid")]
struct Cli {
    /// Directory holding one JSON document per audit.
    #[arg(long, global = true, env = "AGIL_DATA_DIR", default_value = "./data")]
    data_dir: PathBuf,
    /// Directory whose <dataset_id>.json files replace the shipped reference data.
    #[arg(long, global = true)]
    reference_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create, inspect and move audit documents.
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Manage the evidence corpus.
    #[command(subcommand)]
    Evidence(EvidenceCmd),
    /// Enter or import rater scores.
    #[command(subcommand)]
    Score(ScoreCmd),
    /// Record reconciliation decisions and show the consensus trace.
    Reconcile(ReconcileArgs),
    /// Agreement matrix, kappa and PABAK between two rater sheets.
    Kappa(KappaArgs),
    /// Full report as Markdown, JSON bundle and heatmap CSV.
    Report(ReportArgs),
    /// Coverage totals under the strict, baseline and generous scenarios.
    Sensitivity(TargetArgs),
    /// Interchange media assessment and capability check.
    Media(TargetArgs),
    /// Correction-loop readiness per incident.
    Loop(TargetArgs),
    /// Framework coverage summaries and collective gaps.
    Frameworks(FrameworksArgs),
    /// Evaluate the undesigned-ecosystem prediction over several audits.
    Predict(PredictArgs),
    /// Introspect the embedded taxonomy.
    #[command(subcommand)]
    Taxonomy(TaxonomyCmd),
    /// Serve the HTTP/JSON API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct TargetArgs {
    /// Audit id in the data directory.
    #[arg(required_unless_present = "document")]
    audit: Option<String>,
    /// Read a standalone audit document instead of the store.
    #[arg(long, conflicts_with = "audit")]
    document: Option<PathBuf>,
    /// Primary scenario.
    #[arg(long, default_value = "baseline")]
    scenario: Scenario,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Create an empty audit.
    New {
        #[arg(long)]
        name: String,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long)]
        designed: bool,
    },
    /// Summarize a stored audit.
    Show {
        audit: String,
    },
    /// List stored audit ids.
    List,
    /// Write the canonical document JSON.
    Export {
        audit: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Store a document file; `--replace` overwrites an existing audit.
    Import {
        file: PathBuf,
        #[arg(long)]
        replace: bool,
    },
}

#[derive(Subcommand)]
enum EvidenceCmd {
    /// Merge mechanisms and items from a corpus JSON file.
    Add {
        audit: String,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// List mechanisms, or evaluate the presence rule for one slot.
    List {
        audit: String,
        #[arg(long)]
        slot: Option<SlotId>,
    },
}

#[derive(Subcommand)]
enum ScoreCmd {
    /// Import a sheet JSON file as the given rater's entries.
    Import {
        audit: String,
        file: PathBuf,
        #[arg(long)]
        rater: Option<String>,
    },
    /// Set one slot.
    Enter {
        audit: String,
        #[arg(long)]
        rater: String,
        #[arg(long)]
        slot: SlotId,
        #[arg(long)]
        value: Presence,
        #[arg(long, default_value = "")]
        rationale: String,
        #[arg(long)]
        borderline: bool,
        #[arg(long, value_delimiter = ',')]
        evidence: Vec<String>,
    },
}

#[derive(Args)]
struct ReconcileArgs {
    audit: String,
    /// JSON file with one record or a list of records.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, requires_all = ["value", "criterion"])]
    slot: Option<SlotId>,
    #[arg(long)]
    value: Option<Presence>,
    #[arg(long)]
    criterion: Option<CriterionCited>,
    #[arg(long, default_value = "")]
    note: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(required_unless_present_all = ["sheet_a", "sheet_b"])]
    audit: Option<String>,
    /// First rater sheet file (with --sheet-b, bypasses the store).
    #[arg(long, requires = "sheet_b", conflicts_with = "audit")]
    sheet_a: Option<PathBuf>,
    #[arg(long, requires = "sheet_a")]
    sheet_b: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Audit id in the data directory.
    #[arg(required_unless_present = "document")]
    audit: Option<String>,
    /// Read a standalone audit document instead of the store.
    #[arg(long, conflicts_with = "audit")]
    document: Option<PathBuf>,
    /// Scenario used for the slot and type tables.
    #[arg(long, default_value = "baseline")]
    scenario: Scenario,
    /// Markdown output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bundle JSON output path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Heatmap CSV output path.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Timestamp recorded in the bundle; pin it for reproducible output.
    #[arg(long, default_value = "")]
    generated_at: String,
}

#[derive(Args)]
struct FrameworksArgs {
    /// Framework coverage files (a list or a reference dataset); the shipped
    /// comparison matrix when absent.
    #[arg(long)]
    file: Vec<PathBuf>,
    /// Start from every shipped matrix, including the interpreted ones.
    #[arg(long, conflicts_with = "file")]
    all: bool,
    /// Restrict to these framework ids.
    #[arg(long, value_delimiter = ',')]
    ids: Vec<String>,
    /// Also print cells no design principle maps to.
    #[arg(long)]
    principles: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Audit ids in the data directory.
    audits: Vec<String>,
    /// Standalone audit document files.
    #[arg(long)]
    document: Vec<PathBuf>,
    #[arg(long, default_value = "baseline")]
    scenario: Scenario,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum TaxonomyCmd {
    /// Pillars, cells, slots and boundaries as JSON.
    Dump,
    /// Derived role profiles for the shipped requirement profiles.
    Profiles,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "AGIL_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            for d in e.diagnostics() {
                eprintln!("  {d}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

struct Ctx {
    data_dir: PathBuf,
    datasets: DatasetSource,
}

impl Ctx {
    fn store(&self) -> Result<FileStore> {
        FileStore::open(&self.data_dir)
    }

    fn target(&self, t: &TargetArgs) -> Result<AuditDocument> {
        match (&t.document, &t.audit) {
            (Some(p), _) => read_document(p),
            (None, Some(id)) => self.store()?.get(id),
            (None, None) => Err(AuditError::validation("an audit id or --document is required")),
        }
    }

    fn options(&self, scenario: Scenario, generated_at: &str) -> PipelineOptions {
        PipelineOptions {
            generated_at: generated_at.to_string(),
            primary_scenario: scenario,
            datasets: self.datasets.clone(),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Reads an audit document, unwrapping a reference-dataset envelope if present.
fn read_document(path: &Path) -> Result<AuditDocument> {
    let mut v: serde_json::Value = read_json(path)?;
    if v.get("schema_version").is_none() {
        if let Some(p) = v.get_mut("payload") {
            v = p.take();
        }
    }
    Ok(serde_json::from_value(v)?)
}

/// Accepts either a bare list or a single value.
fn read_one_or_many<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let v: serde_json::Value = read_json(path)?;
    if v.is_array() {
        Ok(serde_json::from_value(v)?)
    } else {
        Ok(vec![serde_json::from_value(v)?])
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let v = serde_json::to_value(value)?;
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        data_dir: cli.data_dir,
        datasets: match cli.reference_dir {
            Some(d) => DatasetSource::with_dir(d),
            None => DatasetSource::embedded(),
        },
    };
    match cli.command {
        Command::Audit(c) => audit(&ctx, c),
        Command::Evidence(c) => evidence(&ctx, c),
        Command::Score(c) => score(&ctx, c),
        Command::Reconcile(a) => reconcile(&ctx, a),
        Command::Kappa(a) => kappa(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Sensitivity(t) => sensitivity(&ctx, t),
        Command::Media(t) => media(&ctx, t),
        Command::Loop(t) => correction_loop(&ctx, t),
        Command::Frameworks(a) => frameworks(&ctx, a),
        Command::Predict(a) => predict(&ctx, a),
        Command::Taxonomy(TaxonomyCmd::Dump) => print_json(taxonomy()),
        Command::Taxonomy(TaxonomyCmd::Profiles) => {
            let profiles: Vec<_> = ctx
                .datasets
                .requirement_profiles()?
                .payload
                .iter()
                .map(|r| derive_cell_profile(r.cell, &r.requirement))
                .collect();
            print_json(&profiles)
        }
        Command::Serve(a) => serve_cmd(ctx, a),
    }
}

fn audit(ctx: &Ctx, c: AuditCmd) -> Result<()> {
    let store = ctx.store()?;
    match c {
        AuditCmd::New {
            name,
            id,
            description,
            designed,
        } => {
            let doc = store.create(create_audit(NewAudit {
                audit_id: id,
                name,
                description,
                design_class: if designed { DesignClass::Designed } else { DesignClass::Undesigned },
            })?)?;
            println!("created audit {} (revision {})", doc.audit_id, doc.revision);
        }
        AuditCmd::Show { audit } => {
            let d = store.get(&audit)?;
            println!("{} ({}) revision {}", d.ecosystem.name, d.audit_id, d.revision);
            println!("design class: {:?}", d.ecosystem.design_class);
            println!("mechanisms: {}, evidence items: {}", d.corpus.mechanisms.len(), d.corpus.items.len());
            for s in &d.sheets {
                println!(
                    "sheet {}: {}/64 slots scored, {} present",
                    s.rater_id,
                    s.entries.len(),
                    s.present_count()
                );
            }
            println!("reconciliation records: {}", d.reconciliations.len());
            println!("borderline cases: {}", d.borderline_registry.len());
            println!("media pathways assessed: {}/12", d.media_assessment.len());
            println!("frameworks: {}", d.framework_refs.join(", "));
        }
        AuditCmd::List => {
            for id in store.list()? {
                println!("{id}");
            }
        }
        AuditCmd::Export { audit, out } => {
            let text = canonical_json(&store.get(&audit)?)?;
            match out {
                Some(p) => write_out(&p, &text)?,
                None => println!("{text}"),
            }
        }
        AuditCmd::Import { file, replace } => {
            let mut doc = read_document(&file)?;
            let doc = match store.get(&doc.audit_id) {
                Ok(existing) if replace => {
                    doc.revision = existing.revision;
                    store.put(doc)?
                }
                Ok(_) => store.create(doc)?,
                Err(AuditError::NotFound(_)) => {
                    doc.revision = 1;
                    store.create(doc)?
                }
                Err(e) => return Err(e),
            };
            println!("imported audit {} (revision {})", doc.audit_id, doc.revision);
        }
    }
    Ok(())
}

fn evidence(ctx: &Ctx, c: EvidenceCmd) -> Result<()> {
    let store = ctx.store()?;
    match c {
        EvidenceCmd::Add { audit, corpus } => {
            let extra: EvidenceCorpus = read_json(&corpus)?;
            let d = store.update(&audit, None, |d| {
                d.corpus.merge(extra);
                Ok(())
            })?;
            println!(
                "audit {} now has {} mechanisms and {} evidence items (revision {})",
                d.audit_id,
                d.corpus.mechanisms.len(),
                d.corpus.items.len(),
                d.revision
            );
        }
        EvidenceCmd::List { audit, slot } => {
            let d = store.get(&audit)?;
            match slot {
                Some(s) => print_json(&evaluate_presence(&d.corpus, s, d.criterion_policy))?,
                None => {
                    for m in &d.corpus.mechanisms {
                        let slots: Vec<String> = m.slot_ids.iter().map(|s| s.to_string()).collect();
                        let items = d.corpus.items.iter().filter(|i| i.mechanism_id == m.id).count();
                        println!("{}  {}  [{}]  {items} item(s)", m.id, m.name, slots.join(", "));
                    }
                }
            }
        }
    }
    Ok(())
}

fn score(ctx: &Ctx, c: ScoreCmd) -> Result<()> {
    let store = ctx.store()?;
    let (audit, rater, entries) = match c {
        ScoreCmd::Import { audit, file, rater } => {
            let sheet: ScoreSheet = read_json(&file)?;
            (audit, rater.unwrap_or(sheet.rater_id), sheet.entries)
        }
        ScoreCmd::Enter {
            audit,
            rater,
            slot,
            value,
            rationale,
            borderline,
            evidence,
        } => {
            let entry = ScoreEntry {
                slot_id: slot,
                value,
                rationale,
                borderline,
                evidence_ids: evidence,
            };
            (audit, rater, vec![entry])
        }
    };
    let n = entries.len();
    let d = store.update(&audit, None, |d| d.submit_entries(&rater, entries))?;
    let scored = d.sheet(&rater).map_or(0, |s| s.entries.len());
    println!("{n} entr{} recorded for {rater}: {scored}/64 scored (revision {})", if n == 1 { "y" } else { "ies" }, d.revision);
    Ok(())
}

fn reconcile(ctx: &Ctx, a: ReconcileArgs) -> Result<()> {
    let store = ctx.store()?;
    let mut records = match &a.records {
        Some(p) => read_one_or_many::<ReconciliationRecord>(p)?,
        None => Vec::new(),
    };
    if let (Some(slot), Some(value), Some(criterion)) = (a.slot, a.value, a.criterion) {
        records.push(ReconciliationRecord {
            slot_id: slot,
            rater_values: Default::default(),
            resolved_value: value,
            criterion_cited: criterion,
            discussion_note: a.note.clone(),
        });
    }
    let doc = if records.is_empty() {
        store.get(&a.audit)?
    } else {
        store.update(&a.audit, None, |d| {
            for mut r in records {
                if r.rater_values.is_empty() {
                    if let Some((x, y)) = d.rater_pair() {
                        for s in [x, y] {
                            if let Some(v) = s.value(r.slot_id) {
                                r.rater_values.insert(s.rater_id.clone(), v);
                            }
                        }
                    }
                }
                d.record_reconciliation(r);
            }
            Ok(())
        })?
    };
    let (consensus, trace) = consensus_of(&doc)?;
    let Some(trace) = trace else {
        return Err(AuditError::Precondition("reconciliation needs two rater sheets".into()));
    };
    if a.json {
        return print_json(&trace);
    }
    println!("raters: {} vs {}", trace.rater_a, trace.rater_b);
    println!("disagreements: {}", trace.disagreements.len());
    for slot in &trace.disagreements {
        let how = if trace.resolved_by_record.contains(slot) {
            "resolved by record"
        } else {
            "conservative default"
        };
        let v = consensus.value(*slot).unwrap_or(Presence::Absent);
        let raters: Vec<&str> = doc
            .sheets
            .iter()
            .map(|s| s.value(*slot).unwrap_or(Presence::Absent).symbol())
            .collect();
        println!("  {slot}  {} -> {}  ({how})", raters.join("/"), v.symbol());
    }
    println!("consensus: {}/64 present", consensus.present_count());
    Ok(())
}

fn print_stats(s: &ReliabilityStats) {
    println!(
        "{:<10} n={:<3} p_o={} p_e={} kappa={} pabak={} ({})",
        s.filter.to_string(),
        s.n,
        s.p_o.to_decimal(6),
        s.p_e.to_decimal(6),
        s.kappa,
        s.pabak.to_decimal(6),
        s.interpretation_label.label()
    );
}

fn kappa(ctx: &Ctx, a: KappaArgs) -> Result<()> {
    let (x, y) = match (&a.sheet_a, &a.sheet_b, &a.audit) {
        (Some(p), Some(q), _) => (read_json::<ScoreSheet>(p)?, read_json::<ScoreSheet>(q)?),
        (_, _, Some(id)) => {
            let d = ctx.store()?.get(id)?;
            let (x, y) = d
                .rater_pair()
                .ok_or_else(|| AuditError::Precondition(format!("audit {id:?} does not have two rater sheets")))?;
            (x.clone(), y.clone())
        }
        _ => return Err(AuditError::validation("an audit id or both --sheet-a and --sheet-b are required")),
    };
    let b = reliability_breakdown(&x, &y)?;
    if a.json {
        return print_json(&b);
    }
    let m = b.overall.matrix;
    println!("{} vs {}", b.rater_a, b.rater_b);
    println!("                 {:>12} {:>12}", "b present", "b absent");
    println!("a present        {:>12} {:>12}", m.both_present, m.a_only);
    println!("a absent         {:>12} {:>12}", m.b_only, m.both_absent);
    println!();
    print_stats(&b.overall);
    for s in b.by_pillar.iter().chain(&b.by_kind) {
        print_stats(s);
    }
    Ok(())
}

fn report(ctx: &Ctx, a: ReportArgs) -> Result<()> {
    let doc = ctx.target(&TargetArgs {
        audit: a.audit,
        document: a.document,
        scenario: a.scenario,
        json: false,
    })?;
    let bundle = run_pipeline(&doc, &ctx.options(a.scenario, &a.generated_at))?;
    if let Some(p) = &a.json {
        write_out(p, &export_bundle(&bundle)?)?;
    }
    if let Some(p) = &a.heatmap {
        write_out(p, &bundle.heatmap.to_csv())?;
    }
    let md = render_markdown(&bundle);
    match &a.out {
        Some(p) => write_out(p, &md),
        None => {
            print!("{md}");
            Ok(())
        }
    }
}

fn sensitivity(ctx: &Ctx, t: TargetArgs) -> Result<()> {
    let doc = ctx.target(&t)?;
    let (consensus, _) = consensus_of(&doc)?;
    let mut reports = Vec::new();
    for s in Scenario::ALL {
        let sheet = apply_scenario(&consensus, &doc.borderline_registry, s)?;
        reports.push(compute_coverage(&sheet, s)?);
    }
    if t.json {
        return print_json(&reports);
    }
    println!("{:<10} {:>10} {:>10} {:>10} {:>10} {:>12}", "scenario", "A", "G", "I", "L", "total");
    for r in &reports {
        use agil_audit::taxonomy::Function::*;
        println!(
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>12}",
            r.scenario.as_str(),
            r.pillar(A).to_string(),
            r.pillar(G).to_string(),
            r.pillar(I).to_string(),
            r.pillar(L).to_string(),
            r.total.to_string()
        );
    }
    Ok(())
}

fn media(ctx: &Ctx, t: TargetArgs) -> Result<()> {
    let doc = ctx.target(&t)?;
    let bundle = run_pipeline(&doc, &ctx.options(t.scenario, ""))?;
    let m = &bundle.media;
    if t.json {
        return print_json(m);
    }
    for c in &m.capability {
        let status = m
            .assessment
            .iter()
            .find(|p| p.pathway == c.pathway)
            .map_or("unassessed", |p| p.status.label());
        let missing: Vec<String> = c.blocked_reasons.iter().map(|r| r.slot.to_string()).collect();
        println!(
            "{:<6} {:<18} capable={:<5} missing: {}",
            c.pathway.to_string(),
            status,
            c.capable,
            if missing.is_empty() { "-".to_string() } else { missing.join(", ") }
        );
    }
    if let Some(agg) = &m.aggregate {
        println!(
            "functional {}, proto-functional {}, absent {}; capable {} of 12",
            agg.functional, agg.proto, agg.absent, m.capable
        );
    }
    for w in &m.warnings {
        println!("{w}");
    }
    Ok(())
}

fn correction_loop(ctx: &Ctx, t: TargetArgs) -> Result<()> {
    let doc = ctx.target(&t)?;
    let bundle = run_pipeline(&doc, &ctx.options(t.scenario, ""))?;
    if t.json {
        return print_json(&bundle.correction_loop);
    }
    for l in &bundle.correction_loop {
        println!("incident {}: {}", l.incident.id, l.incident.description);
        for s in &l.steps {
            let req: Vec<String> = s.required_cells.iter().map(|c| c.to_string()).collect();
            let ready: Vec<String> = s.ready_cells.iter().map(|c| c.to_string()).collect();
            println!(
                "  step {} {:<28} needs [{}] ready [{}] -> {}",
                s.step,
                s.name,
                req.join(", "),
                ready.join(", "),
                s.status.label()
            );
        }
    }
    Ok(())
}

fn read_frameworks(path: &Path) -> Result<Vec<FrameworkCoverage>> {
    let v: serde_json::Value = read_json(path)?;
    let payload = v.get("payload").cloned().unwrap_or(v);
    if payload.is_array() {
        Ok(serde_json::from_value(payload)?)
    } else {
        Ok(vec![serde_json::from_value(payload)?])
    }
}

fn frameworks(ctx: &Ctx, a: FrameworksArgs) -> Result<()> {
    let mut set = if a.all {
        ctx.datasets.framework_catalog()?
    } else if a.file.is_empty() {
        ctx.datasets.table2a_frameworks()?.payload
    } else {
        let mut all = Vec::new();
        for p in &a.file {
            all.extend(read_frameworks(p)?);
        }
        all
    };
    if !a.ids.is_empty() {
        for id in &a.ids {
            if !set.iter().any(|f| &f.framework_id == id) {
                return Err(AuditError::NotFound(format!("framework {id:?}")));
            }
        }
        set.retain(|f| a.ids.contains(&f.framework_id));
    }
    let summaries: Vec<_> = set.iter().map(summarize).collect();
    let collective = collective_coverage(&set)?;
    let gaps = if a.principles {
        Some(principle_gaps(&ctx.datasets.ostrom_mapping()?.payload))
    } else {
        None
    };
    if a.json {
        return print_json(&serde_json::json!({
            "summaries": summaries,
            "collective": collective,
            "principle_gaps": gaps,
        }));
    }
    println!("{:<28} {:<5} {:>6} {:>7} {:>5}  confidence", "framework", "tier", "strong", "partial", "none");
    for s in &summaries {
        let tier = serde_json::to_value(s.declared_tier)?;
        let conf = serde_json::to_value(s.confidence)?;
        println!(
            "{:<28} {:<5} {:>6} {:>7} {:>5}  {}",
            s.framework_id,
            tier.as_str().unwrap_or_default(),
            s.strong,
            s.partial,
            s.none,
            conf.as_str().unwrap_or_default()
        );
        for d in &s.diagnostics {
            println!("  {d}");
        }
    }
    let join = |cells: &std::collections::BTreeSet<agil_audit::taxonomy::CellId>| {
        cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
    };
    println!("covered ({}): {}", collective.covered_cells.len(), join(&collective.covered_cells));
    println!("universal gaps: {}", join(&collective.universal_gaps));
    if let Some(g) = gaps {
        println!("cells without a design principle ({}): {}", g.len(), join(&g));
    }
    Ok(())
}

fn predict(ctx: &Ctx, a: PredictArgs) -> Result<()> {
    let mut docs = Vec::new();
    if !a.audits.is_empty() {
        let store = ctx.store()?;
        for id in &a.audits {
            docs.push(store.get(id)?);
        }
    }
    for p in &a.document {
        docs.push(read_document(p)?);
    }
    let mut reports = Vec::new();
    for d in &docs {
        let (consensus, _) = consensus_of(d)?;
        let sheet = apply_scenario(&consensus, &d.borderline_registry, a.scenario)?;
        reports.push(EcosystemCoverage {
            ecosystem_id: d.audit_id.clone(),
            design_class: d.ecosystem.design_class,
            report: compute_coverage(&sheet, a.scenario)?,
        });
    }
    let outcome = evaluate_prediction(&reports)?;
    if a.json {
        return print_json(&outcome);
    }
    for v in &outcome.verdicts {
        let verdict = serde_json::to_value(v.verdict)?;
        println!(
            "{:<20} L {:>6}%  G {:>6}%  {}",
            v.ecosystem_id,
            v.l_pct.to_decimal(2),
            v.g_pct.to_decimal(2),
            verdict.as_str().unwrap_or_default()
        );
    }
    println!("{}", outcome.summary.note);
    Ok(())
}

fn serve_cmd(ctx: Ctx, a: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let state = AppState {
        store: ctx.store()?,
        datasets: ctx.datasets,
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.bind.as_str(), a.port)).await?;
        tracing::info!(addr = %listener.local_addr()?, data_dir = %ctx.data_dir.display(), "serving");
        serve(listener, state).await
    })?;
    Ok(())
}
