use morphsim::accuracy::{
    measure_state, pair_error, published_pairs, AccuracyError, AccuracyReport, ErrorBasis, LabeledRefs, PointPair,
    PointRef, ReportOptions,
};
use morphsim::grid::{assign_eigenstrains, mesh_design, BendingUnitSpec, GridDesign, MaterialSet, MeshConfig};
use morphsim::material::MaterialCard;
use morphsim::sim::{run_sequential, DeformedState, SolverConfig};
use proptest::prelude::*;

// Two-sided 97.5% Student-t quantiles from printed tables.
fn t975(df: usize) -> f64 {
    match df {
        7 => 2.364_624,
        8 => 2.306_004,
        24 => 2.063_899,
        _ => panic!("no table entry for {df}"),
    }
}

fn oracle_ci(errors_pct: &[f64]) -> (f64, f64) {
    let acc: Vec<f64> = errors_pct.iter().map(|e| 1.0 - e / 100.0).collect();
    let n = acc.len() as f64;
    let m = acc.iter().sum::<f64>() / n;
    let s = (acc.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0)).sqrt();
    let h = t975(acc.len() - 1) * s / n.sqrt();
    (m - h, m + h)
}

fn close(ci: (f64, f64), want: (f64, f64), tol: f64) -> bool {
    (ci.0 - want.0).abs() <= tol && (ci.1 - want.1).abs() <= tol
}

#[test]
fn lamp_interval_matches_oracle_and_published() {
    let errs = [5.38, 0.44, 1.63, 4.81, 0.19, 0.50, 0.80, 0.73, 0.91];
    let oracle = oracle_ci(&errs);
    let r = AccuracyReport::build(&published_pairs(), &ReportOptions::default()).unwrap();
    let ci = r.group("lamp_cover").unwrap().interval.unwrap();
    assert!(close(ci, oracle, 2e-4), "{ci:?} vs {oracle:?}");
    assert!(close(ci, (0.968, 0.998), 0.002), "{ci:?}");
}

#[test]
fn shoe_interval_matches_oracle_and_published() {
    let errs = [2.80, 2.69, 2.21, 2.99, 1.96, 3.67, 0.86, 0.26];
    let oracle = oracle_ci(&errs);
    let r = AccuracyReport::build(&published_pairs(), &ReportOptions::default()).unwrap();
    let ci = r.group("shoe_supporter").unwrap().interval.unwrap();
    assert!(close(ci, oracle, 2e-4), "{ci:?} vs {oracle:?}");
    assert!(close(ci, (0.969, 0.988), 0.002), "{ci:?}");
}

#[test]
fn bottle_and_pooled_on_both_bases() {
    for basis in [ErrorBasis::Recomputed, ErrorBasis::Listed] {
        let opts = ReportOptions { level: 0.95, basis };
        let r = AccuracyReport::build(&published_pairs(), &opts).unwrap();
        let bottle = r.group("bottle_holder").unwrap().interval.unwrap();
        assert!(close(bottle, (0.962, 0.986), 0.002), "{basis:?} {bottle:?}");
        let pooled = r.pooled.interval.unwrap();
        assert!(close(pooled, (0.972, 0.985), 0.002), "{basis:?} {pooled:?}");
        assert_eq!(r.pooled.n, 25);
    }
}

#[test]
fn listed_errors_reproduced_except_e_g() {
    for p in published_pairs() {
        let listed = p.listed_error_pct.unwrap();
        let e = pair_error(&p);
        if p.label == "e-g" {
            assert!((e - 0.71).abs() < 0.005 && (listed - 0.43).abs() < 1e-12, "{e}");
        } else {
            assert!((e - listed).abs() <= 0.01, "{}: {e} vs {listed}", p.label);
        }
    }
}

#[test]
fn interval_narrows_with_level() {
    let r90 = AccuracyReport::build(&published_pairs(), &ReportOptions { level: 0.9, ..Default::default() }).unwrap();
    let r99 = AccuracyReport::build(&published_pairs(), &ReportOptions { level: 0.99, ..Default::default() }).unwrap();
    let w = |r: &AccuracyReport| {
        let (lo, hi) = r.pooled.interval.unwrap();
        hi - lo
    };
    assert!(w(&r90) < w(&r99));
}

fn pla() -> MaterialSet {
    let mut s = MaterialSet::new();
    s.insert("PLA".into(), MaterialCard::pla());
    s
}

fn refs(a: &str, b: &str) -> LabeledRefs {
    LabeledRefs {
        label: format!("{a}-{b}"),
        a: PointRef::parse(a).unwrap(),
        b: PointRef::parse(b).unwrap(),
    }
}

#[test]
fn undeformed_endpoints_give_member_length() {
    let mut d = GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203));
    d.gravity_m_s2 = [0.0; 3];
    let mesh = mesh_design(&d, &MeshConfig::default()).unwrap();
    let s0 = DeformedState::initial(&mesh);
    let got = measure_state(&s0, &mesh, &[refs("n:a", "n:b"), refs("m:u1@0", "m:u1@0.5")]).unwrap();
    assert!((got[0] - 100.0).abs() < 1e-12);
    assert!((got[1] - 50.0).abs() < 1e-9);
}

#[test]
fn unknown_references_are_reported() {
    let d = GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203));
    let mesh = mesh_design(&d, &MeshConfig::default()).unwrap();
    let s0 = DeformedState::initial(&mesh);
    for (a, b) in [("n:a", "n:gone"), ("m:u9@0.5", "n:a")] {
        let err = measure_state(&s0, &mesh, &[refs(a, b)]).unwrap_err();
        assert!(matches!(err, AccuracyError::UnresolvedReference(_)), "{err:?}");
    }
}

#[test]
fn stage_a_chord_two_ways() {
    let mut d = GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203));
    d.gravity_m_s2 = [0.0; 3];
    let r = run_sequential(&d, &pla(), &MeshConfig { n_min: 16 }, &SolverConfig::default()).unwrap();
    let mesh = assign_eigenstrains(&r.mesh, &pla()).unwrap();
    let got = measure_state(&r.stage_a, &mesh, &[refs("n:a", "n:b"), refs("m:u1@0", "m:u1@1")]).unwrap();
    let chord = r.stage_a.member_end_distance(&mesh, "u1").unwrap();
    assert!((got[0] - chord).abs() < 1e-9 && (got[1] - chord).abs() < 1e-9);
}

proptest! {
    #[test]
    fn error_is_scale_invariant(e in 1.0f64..500.0, s in 0.0f64..500.0, c in 0.01f64..100.0) {
        let a = pair_error(&PointPair::new("p", e, s));
        let b = pair_error(&PointPair::new("p", c * e, c * s));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn constant_accuracy_has_zero_width(err in 0.0f64..20.0, n in 2usize..30) {
        let pairs: Vec<PointPair> = (0..n).map(|i| PointPair::new(&format!("p{i}"), 100.0, 100.0 - err)).collect();
        let r = AccuracyReport::build(&pairs, &ReportOptions::default()).unwrap();
        let (lo, hi) = r.pooled.interval.unwrap();
        prop_assert!((hi - lo).abs() < 1e-12);
        prop_assert!((lo - (1.0 - err / 100.0)).abs() < 1e-12);
    }
}
