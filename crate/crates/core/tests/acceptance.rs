//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! The process fails if any criterion fails, except those listed in
//! `SOURCE_CONFLICTS`, whose expected figures disagree with the published
//! matrix they are derived from. For those the engine is still checked
//! against an independent transcription of that matrix.

use agil_audit::coverage::{compute_coverage, CoverageReport};
use agil_audit::datasets::DatasetSource;
use agil_audit::evidence::Presence;
use agil_audit::fraction::Fraction;
use agil_audit::frameworks::{collective_coverage, principle_gaps, strong_count, CoverageLevel, FrameworkCoverage};
use agil_audit::media::{aggregate_media, capability_check, correction_loop, StepReadiness};
use agil_audit::reliability::{stats_from_matrix, reliability_stats, AgreementMatrix, Kappa, SlotFilter};
use agil_audit::reporting::{export_bundle, heatmap_matrix};
use agil_audit::scoring::{apply_scenario, BorderlineCase, Scenario, ScoreSheet};
use agil_audit::service::http::{router, AppState};
use agil_audit::service::{run_pipeline, FileStore, PipelineOptions};
use agil_audit::taxonomy::{
    derive_cell_profile, BoundaryMap, CellId, Classification, Dimension, Function, SlotId,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

const TABLE_REPRO_LIMIT: Duration = Duration::from_secs(1);
const RELIABILITY_LIMIT: Duration = Duration::from_secs(5);
const STRUCTURAL_LIMIT: Duration = Duration::from_secs(10);
const KAPPA_TOLERANCE: f64 = 1e-9;
const RANDOM_CASES: u32 = 1000;
const PINNED_AT: &str = "2026-01-01T00:00:00Z";

/// Criteria whose stated figures contradict the source matrix they cite.
const SOURCE_CONFLICTS: &[&str] = &["framework-matrix"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, failures: Vec<String>, ok_detail: String) -> Outcome {
    Outcome {
        id,
        pass: failures.is_empty(),
        detail: if failures.is_empty() { ok_detail } else { failures.join("; ") },
    }
}

macro_rules! expect {
    ($fails:ident, $cond:expr, $($msg:tt)+) => {
        if !$cond {
            $fails.push(format!($($msg)+));
        }
    };
}

fn data() -> DatasetSource {
    DatasetSource::embedded()
}

fn baseline() -> ScoreSheet {
    data().baseline_sheet().unwrap().payload
}

fn registry() -> Vec<BorderlineCase> {
    data().borderline_registry().unwrap().payload
}

fn pillar_counts(r: &CoverageReport) -> [u32; 4] {
    Function::ALL.map(|f| r.pillar(f).present)
}

fn type_counts(r: &CoverageReport) -> [u32; 4] {
    Function::ALL.map(|f| r.kind(f).present)
}

fn table6_7() -> Outcome {
    let start = Instant::now();
    let doc = data().openclaw_audit().unwrap().payload;
    let bundle = run_pipeline(&doc, &PipelineOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let r = &bundle.primary().coverage;
    let mut f = Vec::new();
    expect!(f, type_counts(r) == [9, 3, 0, 0], "by-type {:?} != [9, 3, 0, 0]", type_counts(r));
    expect!(f, Function::ALL.iter().all(|k| r.kind(*k).total == 16), "type totals not 16");
    expect!(f, (r.total.present, r.total.total) == (12, 64), "total {}/{}", r.total.present, r.total.total);
    expect!(f, r.total.pct == 19, "displayed {}% != 19%", r.total.pct);
    expect!(f, elapsed < TABLE_REPRO_LIMIT, "took {elapsed:?}");
    outcome("slot-and-type-coverage", f, format!("A 9/16, G 3/16, I 0/16, L 0/16, total 12/64 (19%) in {elapsed:?}"))
}

fn table8() -> Outcome {
    let start = Instant::now();
    let (sheet, reg) = (baseline(), registry());
    let reports: Vec<(ScoreSheet, CoverageReport)> = Scenario::ALL
        .iter()
        .map(|s| {
            let sh = apply_scenario(&sheet, &reg, *s).unwrap();
            let r = compute_coverage(&sh, *s).unwrap();
            (sh, r)
        })
        .collect();
    let elapsed = start.elapsed();
    let get = |s: Scenario| reports.iter().find(|(_, r)| r.scenario == s).unwrap();
    let mut f = Vec::new();
    let base = &get(Scenario::Baseline).1;
    expect!(f, pillar_counts(base) == [5, 3, 3, 1], "baseline pillars {:?}", pillar_counts(base));
    let strict = &get(Scenario::Strict).1;
    expect!(f, (strict.total.present, strict.total.pct) == (11, 17), "strict {}", strict.total);
    let generous = &get(Scenario::Generous).1;
    expect!(f, (generous.total.present, generous.total.pct) == (19, 30), "generous {}", generous.total);
    expect!(f, reg.len() == 8, "registry has {} cases", reg.len());
    let registry_slots: BTreeSet<SlotId> = reg.iter().map(|c| c.slot_id).collect();
    for (sh, r) in &reports {
        let moved: Vec<SlotId> = SlotId::all().filter(|s| sh.value(*s) != sheet.value(*s)).collect();
        expect!(
            f,
            moved.iter().all(|s| registry_slots.contains(s)),
            "{} changed slots outside the registry",
            r.scenario.as_str()
        );
    }
    expect!(f, elapsed < TABLE_REPRO_LIMIT, "took {elapsed:?}");
    outcome(
        "scenario-pillar-coverage",
        f,
        format!("baseline A5 G3 I3 L1; strict 11 (17%); generous 19 (30%); registry-only changes; {elapsed:?}"),
    )
}

fn pillar_ordering() -> Outcome {
    let (sheet, reg) = (baseline(), registry());
    let mut f = Vec::new();
    for s in Scenario::ALL {
        let r = compute_coverage(&apply_scenario(&sheet, &reg, s).unwrap(), s).unwrap();
        let [a, g, i, l] = pillar_counts(&r);
        expect!(f, l < a && l < g && l < i, "{}: L={l} not strictly minimal", s.as_str());
        expect!(f, g <= i, "{}: G={g} > I={i}", s.as_str());
    }
    outcome("pillar-ordering", f, "L strictly minimal and G <= I under strict, baseline and generous".into())
}

fn table9() -> Outcome {
    let media = data().media_assessment().unwrap().payload;
    let agg = aggregate_media(&media).unwrap();
    let cap = capability_check(&baseline(), &BoundaryMap::default()).unwrap();
    let mut f = Vec::new();
    expect!(
        f,
        (agg.functional, agg.proto, agg.absent) == (0, 3, 9),
        "aggregate {}/{}/{}",
        agg.functional,
        agg.proto,
        agg.absent
    );
    let capable = cap.iter().filter(|c| c.capable).count();
    expect!(f, capable == 0, "{capable} capable pathways");
    for c in &cap {
        expect!(
            f,
            c.blocked_reasons.iter().any(|r| r.slot.kind == Function::I),
            "{} blocked without a missing I-sub",
            c.pathway
        );
    }
    outcome("media-and-capability", f, "functional 0, proto 3, absent 9; 0/12 capable, every blockage cites an I-sub".into())
}

fn correction_loop_check() -> Outcome {
    let doc = data().openclaw_audit().unwrap().payload;
    let report = correction_loop(&baseline(), &doc.incidents[0]).unwrap();
    let got: Vec<StepReadiness> = report.steps.iter().map(|s| s.status).collect();
    let want = vec![StepReadiness::Blocked, StepReadiness::Partial, StepReadiness::Blocked, StepReadiness::Blocked];
    let mut f = Vec::new();
    expect!(f, got == want, "statuses {:?}", got);
    outcome("correction-loop", f, "step1 blocked, step2 partial, step3 blocked, step4 blocked".into())
}

/// The published comparison matrix, one row per cell in A-A..L-L order, one
/// column per framework: S strong, P partial, N none.
const TABLE_2A: [&str; 16] = [
    "NNNNN", "SSSSS", "SPPSS", "NNPNN", "PSSSS", "SSSSS", "PPNSS", "NNPSS", "NNPPP", "NPPSS", "NNNSS", "NPPSS",
    "PPSSP", "NNNNN", "NPPSP", "NNNSS",
];
const TABLE_2A_IDS: [&str; 5] = ["nist-agent-standards", "berkeley-cltc", "imda-mgf", "cets-225", "eu-ai-act"];

fn framework_matrix() -> Outcome {
    let set: Vec<FrameworkCoverage> = data().table2a_frameworks().unwrap().payload;
    let mut f = Vec::new();
    let mut notes = Vec::new();
    let by_id = |id: &str| set.iter().find(|x| x.framework_id == id).unwrap();

    // Engine versus the independent transcription.
    for (col, id) in TABLE_2A_IDS.iter().enumerate() {
        let fw = by_id(id);
        for (row, cell) in CellId::all().enumerate() {
            let want = match TABLE_2A[row].as_bytes()[col] {
                b'S' => CoverageLevel::Strong,
                b'P' => CoverageLevel::Partial,
                _ => CoverageLevel::None,
            };
            expect!(f, fw.level(cell) == want, "{id} {cell}: shipped {:?}, table {:?}", fw.level(cell), want);
        }
        let literal = TABLE_2A.iter().filter(|r| r.as_bytes()[col] == b'S').count() as u32;
        expect!(f, strong_count(fw) == literal, "{id}: engine {} vs literal {literal}", strong_count(fw));
    }

    let expected_strong = [3, 3, 4, 12, 11];
    for (id, want) in TABLE_2A_IDS.iter().zip(expected_strong) {
        let got = strong_count(by_id(id));
        expect!(f, got == want, "{id} strong {got} != {want}");
        notes.push(format!("{id} {got}"));
    }
    let all = collective_coverage(&set).unwrap();
    let gaps: Vec<String> = all.universal_gaps.iter().map(|c| c.to_string()).collect();
    expect!(f, gaps == ["A-A", "L-G"], "universal gaps {:?}", gaps);
    let pair = collective_coverage(&[by_id("cets-225").clone(), by_id("berkeley-cltc").clone()]).unwrap();
    let pair_gaps: Vec<String> = pair.universal_gaps.iter().map(|c| c.to_string()).collect();
    expect!(f, pair.covered_cells.len() == 14, "CETS+CLTC cover {} cells (gaps {:?})", pair.covered_cells.len(), pair_gaps);
    expect!(f, pair_gaps == ["A-A", "L-G"], "CETS+CLTC gaps {:?}", pair_gaps);
    outcome("framework-matrix", f, format!("strong {}; gaps A-A, L-G; CETS+CLTC 14", notes.join(", ")))
}

fn ostrom() -> Outcome {
    let gaps: Vec<String> = principle_gaps(&data().ostrom_mapping().unwrap().payload).iter().map(|c| c.to_string()).collect();
    let paper = ["A-A", "A-G", "A-L", "I-L", "L-A", "L-G", "L-I", "L-L"];
    let mut f = Vec::new();
    expect!(f, gaps == paper, "gap set {:?}", gaps);
    outcome("principle-gaps", f, format!("gaps {}", paper.join(", ")))
}

fn bits() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 64)
}

fn sheet_of(rater: &str, b: &[bool]) -> ScoreSheet {
    ScoreSheet::from_present(rater, "acc", b.iter().enumerate().filter(|(_, x)| **x).map(|(i, _)| SlotId::from_index(i)))
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: RANDOM_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn reliability() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();

    // (a) hand oracle: p_o = 60/64, p_e = (12*12 + 52*52)/4096.
    let s = stats_from_matrix(
        AgreementMatrix {
            both_present: 10,
            a_only: 2,
            b_only: 2,
            both_absent: 50,
        },
        SlotFilter::All,
    )
    .unwrap();
    let p_o = 60.0 / 64.0;
    let p_e = 2848.0 / 4096.0;
    let k_hand = (p_o - p_e) / (1.0 - p_e);
    let k = s.kappa.value().map_or(f64::NAN, |k| k.to_f64());
    expect!(f, (k - k_hand).abs() < KAPPA_TOLERANCE, "(a) kappa {k} vs {k_hand}");
    expect!(f, (k - 0.794872).abs() < 5e-7, "(a) kappa {k} vs 0.794872");
    expect!(f, (s.pabak.to_f64() - 0.875).abs() < KAPPA_TOLERANCE, "(a) pabak {}", s.pabak.to_f64());

    // (b) identical non-degenerate sheets.
    let present: Vec<SlotId> = SlotId::all().step_by(3).collect();
    let same = reliability_stats(
        &ScoreSheet::from_present("a", "acc", present.clone()),
        &ScoreSheet::from_present("b", "acc", present),
        SlotFilter::All,
    )
    .unwrap();
    expect!(f, same.kappa == Kappa::Defined(Fraction::one()), "(b) kappa {}", same.kappa);

    // (c) all-absent pair.
    let none = reliability_stats(
        &ScoreSheet::uniform("a", "acc", Presence::Absent),
        &ScoreSheet::uniform("b", "acc", Presence::Absent),
        SlotFilter::All,
    )
    .unwrap();
    expect!(f, none.kappa == Kappa::Undefined, "(c) kappa {}", none.kappa);
    expect!(f, none.pabak == Fraction::one(), "(c) pabak {}", none.pabak.to_f64());

    // (d) randomized pairs.
    let result = runner().run(&(bits(), bits()), |(a, b)| {
        let (sa, sb) = (sheet_of("a", &a), sheet_of("b", &b));
        let ab = reliability_stats(&sa, &sb, SlotFilter::All).unwrap();
        let ba = reliability_stats(&sb, &sa, SlotFilter::All).unwrap();
        if let Kappa::Defined(k) = ab.kappa {
            prop_assert!(k >= Fraction::from_int(-1) && k <= Fraction::one());
        }
        prop_assert_eq!(ab.kappa, ba.kappa);
        prop_assert_eq!(ab.pabak, ba.pabak);
        prop_assert_eq!(ab.pabak, Fraction::from_int(2) * ab.p_o - Fraction::one());
        Ok(())
    });
    expect!(f, result.is_ok(), "(d) {:?}", result.err());
    let elapsed = start.elapsed();
    expect!(f, elapsed < RELIABILITY_LIMIT, "took {elapsed:?}");
    outcome(
        "reliability-properties",
        f,
        format!("kappa {k:.6}, PABAK 0.875; identical 1; all-absent undefined/1; {RANDOM_CASES} random pairs in {elapsed:?}"),
    )
}

fn structural() -> Outcome {
    let start = Instant::now();
    let map = BoundaryMap::default();
    let strategy = (bits(), bits(), prop::collection::vec(0u8..4, 64));
    let result = runner().run(&strategy, |(b, extra, reg_choice)| {
        let s = sheet_of("consensus", &b);
        let r = compute_coverage(&s, Scenario::Baseline).unwrap();
        let by_type: u32 = Function::ALL.iter().map(|k| r.kind(*k).present).sum();
        let by_pillar: u32 = Function::ALL.iter().map(|k| r.pillar(*k).present).sum();
        prop_assert_eq!(by_type, r.total.present);
        prop_assert_eq!(by_pillar, r.total.present);

        // Random registry consistent with the sheet: 0 skip, 1..3 pick the
        // non-baseline side.
        let registry: Vec<BorderlineCase> = reg_choice
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(i, c)| {
                let present = b[i];
                let other = *c > 1;
                BorderlineCase {
                    slot_id: SlotId::from_index(i),
                    baseline_value: Presence::from_bool(present),
                    strict_value: if present { Presence::from_bool(other) } else { Presence::Absent },
                    generous_value: if present { Presence::Present } else { Presence::from_bool(other) },
                    rationale: String::new(),
                }
            })
            .collect();
        let totals: Vec<u32> = Scenario::ALL
            .iter()
            .map(|sc| compute_coverage(&apply_scenario(&s, &registry, *sc).unwrap(), *sc).unwrap().total.present)
            .collect();
        prop_assert!(totals[0] <= totals[1] && totals[1] <= totals[2]);

        let union: Vec<bool> = b.iter().zip(&extra).map(|(x, y)| *x || *y).collect();
        let small = capability_check(&s, &map).unwrap();
        let big = capability_check(&sheet_of("consensus", &union), &map).unwrap();
        for (x, y) in small.iter().zip(&big) {
            prop_assert!(!x.capable || y.capable);
        }

        let h = heatmap_matrix(&s).unwrap();
        prop_assert_eq!(h.sum(), r.total.present);
        Ok(())
    });
    let elapsed = start.elapsed();
    let mut f = Vec::new();
    expect!(f, result.is_ok(), "{:?}", result.err());
    expect!(f, elapsed < STRUCTURAL_LIMIT, "took {elapsed:?}");
    outcome(
        "structural-properties",
        f,
        format!("accounting, scenario and capability monotonicity, heatmap sum over {RANDOM_CASES} sheets in {elapsed:?}"),
    )
}

fn dual_source() -> Outcome {
    let profiles = data().requirement_profiles().unwrap().payload;
    let find = |c: &str| {
        let cell: CellId = c.parse().unwrap();
        let r = profiles.iter().find(|p| p.cell == cell).unwrap();
        derive_cell_profile(cell, &r.requirement)
    };
    let aa = find("A-A");
    let ii = find("I-I");
    let mut f = Vec::new();
    expect!(f, aa.classification == Classification::DirectInheritance, "A-A {:?}", aa.classification);
    expect!(f, aa.inverted_dimensions.is_empty(), "A-A inverts {:?}", aa.inverted_dimensions);
    expect!(f, ii.classification == Classification::ProductiveInversion, "I-I {:?}", ii.classification);
    let inverted: BTreeSet<Dimension> = ii.inverted_dimensions.iter().copied().collect();
    let want: BTreeSet<Dimension> = [Dimension::Standard, Dimension::Scope].into();
    expect!(f, inverted == want, "I-I inverts {:?}", inverted);
    outcome(
        "dual-source-classifier",
        f,
        "A-A direct inheritance; I-I inverts universalism<->particularism and specificity<->diffuseness".into(),
    )
}

fn determinism() -> Outcome {
    let doc = data().openclaw_audit().unwrap().payload;
    let opts = PipelineOptions {
        generated_at: PINNED_AT.into(),
        ..PipelineOptions::default()
    };
    let a = export_bundle(&run_pipeline(&doc, &opts).unwrap()).unwrap();
    let b = export_bundle(&run_pipeline(&doc, &opts).unwrap()).unwrap();
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/openclaw-bundle.json"))
        .unwrap_or_default();
    let mut f = Vec::new();
    expect!(f, a == b, "two runs differ");
    expect!(f, a == golden, "bundle differs from golden file");
    outcome("deterministic-export", f, format!("{} identical bytes across runs and golden file", a.len()))
}

async fn service_flow() -> Vec<String> {
    use reqwest::StatusCode;
    use serde_json::{json, Value};
    let mut f = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let state = AppState {
        store: FileStore::open(dir.path()).unwrap(),
        datasets: data(),
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}/api/v1", listener.local_addr().unwrap());
    tokio::spawn(async move { axum::serve(listener, router(Arc::new(state))).await.unwrap() });
    let c = reqwest::Client::new();
    let shipped: Value =
        serde_json::from_str(include_str!("../data/reference/openclaw-audit.json")).unwrap();
    let shipped = &shipped["payload"];

    let r = c.post(format!("{base}/audits")).json(&json!({"audit_id": "oc", "name": "OpenClaw"})).send().await.unwrap();
    expect!(f, r.status() == StatusCode::CREATED, "create {}", r.status());
    let mut doc: Value = c.get(format!("{base}/audits/oc")).send().await.unwrap().json().await.unwrap();
    doc["borderline_registry"] = shipped["borderline_registry"].clone();
    let r = c.put(format!("{base}/audits/oc")).header("If-Match", "1").json(&doc).send().await.unwrap();
    expect!(f, r.status() == StatusCode::OK, "put {}", r.status());

    let mut entries = shipped["sheets"][0]["entries"].as_array().unwrap().clone();
    c.post(format!("{base}/audits/oc/sheets")).json(&json!({"rater_id": "r1", "entries": entries})).send().await.unwrap();
    for e in entries.iter_mut().filter(|e| e["slot_id"] == "A-G/G") {
        e["value"] = json!("absent");
    }
    c.post(format!("{base}/audits/oc/sheets")).json(&json!({"rater_id": "r2", "entries": entries})).send().await.unwrap();

    let r = c.put(format!("{base}/audits/oc")).header("If-Match", "1").json(&doc).send().await.unwrap();
    let status = r.status();
    let body: Value = r.json().await.unwrap();
    expect!(f, status == StatusCode::CONFLICT && body["code"] == "stale-revision", "stale write gave {status} {}", body["code"]);

    let r = c
        .post(format!("{base}/audits/oc/reconciliations"))
        .json(&json!({"slot_id": "A-G/G", "resolved_value": "present", "criterion_cited": "C2"}))
        .send()
        .await
        .unwrap();
    expect!(f, r.status() == StatusCode::OK, "reconcile {}", r.status());

    let report: Value = c.get(format!("{base}/audits/oc/report")).send().await.unwrap().json().await.unwrap();
    let total = |s: &str| {
        report["scenarios"].as_array().unwrap().iter().find(|r| r["scenario"] == s).unwrap()["coverage"]["total"]["present"]
            .as_u64()
            .unwrap()
    };
    expect!(
        f,
        (total("strict"), total("baseline"), total("generous")) == (11, 12, 19),
        "totals {}/{}/{}",
        total("strict"),
        total("baseline"),
        total("generous")
    );
    f
}

fn service() -> Outcome {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let f = rt.block_on(service_flow());
    outcome(
        "service-http-flow",
        f,
        "create, score, stale write -> stale-revision, reconcile, report 11/12/19; no secondary component built".into(),
    )
}

fn main() {
    let outcomes = [
        table6_7(),
        table8(),
        pillar_ordering(),
        table9(),
        correction_loop_check(),
        framework_matrix(),
        ostrom(),
        reliability(),
        structural(),
        dual_source(),
        determinism(),
        service(),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let known = SOURCE_CONFLICTS.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (source conflict)",
            (false, false) => "FAIL",
        };
        println!("{tag:<22} {:<24} {}", o.id, o.detail);
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
