use agil_audit::coverage::compute_coverage;
use agil_audit::evidence::Presence;
use agil_audit::fraction::Fraction;
use agil_audit::media::{capability_check, correction_loop, IncidentRecord, StepReadiness};
use agil_audit::reliability::{reliability_stats, Kappa, SlotFilter};
use agil_audit::reporting::heatmap_matrix;
use agil_audit::scoring::{apply_scenario, BorderlineCase, Scenario, ScoreSheet};
use agil_audit::taxonomy::{BoundaryMap, CellId, Function, SlotId};
use proptest::prelude::*;

fn sheet(rater: &str, bits: &[bool]) -> ScoreSheet {
    ScoreSheet::from_present(
        rater,
        "prop",
        bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| SlotId::from_index(i)),
    )
}

fn bits() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 64)
}

/// A sheet plus a registry whose baselines agree with it and whose cases
/// respect strict <= baseline <= generous.
fn sheet_with_registry() -> impl Strategy<Value = (Vec<bool>, Vec<BorderlineCase>)> {
    (bits(), prop::collection::vec((any::<bool>(), any::<bool>()), 64)).prop_map(|(b, choice)| {
        let registry = b
            .iter()
            .zip(&choice)
            .enumerate()
            .filter(|(_, (_, (include, _)))| *include)
            .map(|(i, (present, (_, other)))| {
                let base = Presence::from_bool(*present);
                let (strict, generous) = if *present {
                    (Presence::from_bool(*other), Presence::Present)
                } else {
                    (Presence::Absent, Presence::from_bool(*other))
                };
                BorderlineCase {
                    slot_id: SlotId::from_index(i),
                    baseline_value: base,
                    strict_value: strict,
                    generous_value: generous,
                    rationale: String::new(),
                }
            })
            .collect();
        (b, registry)
    })
}

fn incident() -> IncidentRecord {
    IncidentRecord {
        id: "i".into(),
        description: String::new(),
        date: String::new(),
    }
}

fn rank(r: StepReadiness) -> u8 {
    match r {
        StepReadiness::Blocked => 0,
        StepReadiness::Partial => 1,
        StepReadiness::Executable => 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn coverage_accounting_identity(b in bits()) {
        let s = sheet("r", &b);
        let r = compute_coverage(&s, Scenario::Baseline).unwrap();
        let by_type: u32 = Function::ALL.iter().map(|f| r.kind(*f).present).sum();
        let by_pillar: u32 = Function::ALL.iter().map(|f| r.pillar(*f).present).sum();
        let expected = b.iter().filter(|x| **x).count() as u32;
        prop_assert_eq!(by_type, expected);
        prop_assert_eq!(by_pillar, expected);
        prop_assert_eq!(r.total.present, expected);
        prop_assert_eq!(r.total.total, 64);
        for f in Function::ALL {
            prop_assert_eq!(r.kind(f).total, 16);
            prop_assert_eq!(r.pillar(f).total, 16);
        }
    }

    #[test]
    fn scenarios_are_monotone((b, registry) in sheet_with_registry()) {
        let s = sheet("consensus", &b);
        let strict = apply_scenario(&s, &registry, Scenario::Strict).unwrap();
        let base = apply_scenario(&s, &registry, Scenario::Baseline).unwrap();
        let generous = apply_scenario(&s, &registry, Scenario::Generous).unwrap();
        prop_assert_eq!(&base, &s);
        for slot in SlotId::all() {
            prop_assert!(strict.value(slot) <= base.value(slot));
            prop_assert!(base.value(slot) <= generous.value(slot));
        }
        let t = |x: &ScoreSheet, sc| compute_coverage(x, sc).unwrap().total.present;
        prop_assert!(t(&strict, Scenario::Strict) <= t(&base, Scenario::Baseline));
        prop_assert!(t(&base, Scenario::Baseline) <= t(&generous, Scenario::Generous));
        // Slots outside the registry never move.
        for slot in SlotId::all().filter(|s| !registry.iter().any(|c| c.slot_id == *s)) {
            prop_assert_eq!(strict.value(slot), s.value(slot));
            prop_assert_eq!(generous.value(slot), s.value(slot));
        }
    }

    #[test]
    fn capability_is_monotone_under_additions(b in bits(), extra in bits()) {
        let small = sheet("r", &b);
        let union: Vec<bool> = b.iter().zip(&extra).map(|(x, y)| *x || *y).collect();
        let big = sheet("r", &union);
        let map = BoundaryMap::default();
        let cs = capability_check(&small, &map).unwrap();
        let cb = capability_check(&big, &map).unwrap();
        prop_assert_eq!(cs.len(), 12);
        for (x, y) in cs.iter().zip(&cb) {
            prop_assert_eq!(x.pathway, y.pathway);
            prop_assert!(!x.capable || y.capable);
            prop_assert_eq!(x.capable, x.blocked_reasons.is_empty());
            for r in &y.blocked_reasons {
                prop_assert!(x.blocked_reasons.contains(r));
            }
        }
        let ls = correction_loop(&small, &incident()).unwrap();
        let lb = correction_loop(&big, &incident()).unwrap();
        for (x, y) in ls.steps.iter().zip(&lb.steps) {
            prop_assert!(rank(x.status) <= rank(y.status));
        }
    }

    #[test]
    fn heatmap_sum_equals_present_count(b in bits()) {
        let s = sheet("r", &b);
        let h = heatmap_matrix(&s).unwrap();
        prop_assert_eq!(h.sum() as usize, s.present_count());
        prop_assert_eq!(h.total as usize, s.present_count());
        prop_assert_eq!(h.grid.len(), 16);
        for cell in CellId::all() {
            for (k, f) in Function::ALL.iter().enumerate() {
                prop_assert_eq!(h.row(cell)[k] == 1, b[cell.slot(*f).index()]);
            }
        }
    }

    #[test]
    fn kappa_bounds_symmetry_and_pabak(a in bits(), b in bits()) {
        let (sa, sb) = (sheet("a", &a), sheet("b", &b));
        let ab = reliability_stats(&sa, &sb, SlotFilter::All).unwrap();
        let ba = reliability_stats(&sb, &sa, SlotFilter::All).unwrap();
        prop_assert_eq!(ab.kappa, ba.kappa);
        prop_assert_eq!(ab.p_o, ba.p_o);
        prop_assert_eq!(ab.p_e, ba.p_e);
        prop_assert_eq!(ab.pabak, ba.pabak);
        prop_assert_eq!(ab.pabak, Fraction::from_int(2) * ab.p_o - Fraction::one());

        // Independent floating-point oracle from the raw ratings.
        let n = 64.0;
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64;
        let pa = a.iter().filter(|x| **x).count() as f64 / n;
        let pb = b.iter().filter(|x| **x).count() as f64 / n;
        let p_o = agree / n;
        let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
        prop_assert!((ab.p_o.to_f64() - p_o).abs() < 1e-12);
        prop_assert!((ab.p_e.to_f64() - p_e).abs() < 1e-12);
        match ab.kappa {
            Kappa::Defined(k) => {
                let k = k.to_f64();
                prop_assert!((-1.0..=1.0).contains(&k));
                prop_assert!((k - (p_o - p_e) / (1.0 - p_e)).abs() < 1e-9);
            }
            Kappa::Undefined => prop_assert!((p_e - 1.0).abs() < 1e-12),
        }
    }

    #[test]
    fn identical_sheets_agree_perfectly(a in bits()) {
        let s = sheet("a", &a);
        let t = sheet("b", &a);
        let st = reliability_stats(&s, &t, SlotFilter::All).unwrap();
        prop_assert_eq!(st.p_o, Fraction::one());
        prop_assert_eq!(st.pabak, Fraction::one());
        let mixed = a.iter().any(|x| *x) && a.iter().any(|x| !*x);
        if mixed {
            prop_assert_eq!(st.kappa, Kappa::Defined(Fraction::one()));
        } else {
            prop_assert_eq!(st.kappa, Kappa::Undefined);
        }
    }
}
