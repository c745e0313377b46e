mod common;

use common::*;
use dtgeom::linalg::{is_psd, Matrix};
use dtgeom::verify::*;

fn spec(dim: usize, trials: u64, mode: RankMode) -> EnsembleSpec {
    EnsembleSpec::new(dim, trials, 42, mode).unwrap()
}

#[test]
fn draws_are_reproducible_and_psd() {
    let s = spec(4, 10, RankMode::Mixed);
    for t in 0..8 {
        let a = generate_psd(&s, t);
        assert_eq!(a, generate_psd(&s, t));
        assert!(is_psd(&a, 1e-12));
        let rank = na_eigenvalues_desc(&sym_to_na(&a))
            .iter()
            .filter(|&&l| l > 1e-10 * a.frobenius_norm())
            .count();
        // bit 0 of the index selects the deficient branch for the first draw
        assert_eq!(rank, if t % 2 == 1 { 2 } else { 4 }, "trial {t}");
    }
    let other = EnsembleSpec::new(4, 10, 43, RankMode::Mixed).unwrap();
    assert_ne!(generate_psd(&s, 0), generate_psd(&other, 0));
}

#[test]
fn commuting_pairs_commute() {
    let s = spec(5, 10, RankMode::Mixed);
    for t in 0..4 {
        let (a, b) = s.commuting_pair(t);
        let ab = a.matmul(&b.as_matrix());
        let ba = b.matmul(&a.as_matrix());
        assert!((&ab - &ba).frobenius_norm() <= 1e-12 * (1.0 + ab.frobenius_norm()));
    }
}

#[test]
fn orthogonal_draws_are_orthogonal() {
    let s = spec(6, 1, RankMode::Full);
    let q = s.orthogonal(&mut s.rng(0, 3));
    assert!((&q.transpose().matmul(&q) - &Matrix::identity(6)).frobenius_norm() < 1e-13);
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(EnsembleSpec::new(1, 10, 0, RankMode::Full).is_err());
    assert!(EnsembleSpec::new(MAX_DIM + 1, 10, 0, RankMode::Full).is_err());
    assert!(EnsembleSpec::new(3, 0, 0, RankMode::Full).is_err());
    assert!(spec(3, 1, RankMode::Full).with_scale_range(1.0, 0.5).is_err());
    assert!(run_all(&spec(3, 1, RankMode::Full), &[]).is_err());
    assert!(search_extrapolation_counterexamples(&spec(3, 1, RankMode::Full), &[0.5]).is_err());
}

#[test]
fn property_names_round_trip() {
    for p in PropertyId::ALL {
        assert_eq!(p.name().parse::<PropertyId>().unwrap(), p);
    }
    assert_eq!("main-theorem".parse::<PropertyId>().unwrap(), PropertyId::MainTheorem);
    assert!("no-such-thing".parse::<PropertyId>().is_err());
}

#[test]
fn campaigns_are_deterministic() {
    let s = spec(3, 64, RankMode::Mixed);
    let props = [
        PropertyId::MainTheorem,
        PropertyId::LogMajoLemma,
        PropertyId::SwellOrdering,
    ];
    let first: Vec<_> = run_all(&s, &props)
        .unwrap()
        .iter()
        .map(|r| r.without_timing())
        .collect();
    let second: Vec<_> = run_all(&s, &props)
        .unwrap()
        .iter()
        .map(|r| r.without_timing())
        .collect();
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap()
    );
    for r in &first {
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.trials_run, 64);
    }
}

#[test]
fn stored_worst_case_replays_exactly() {
    let s = spec(4, 40, RankMode::Mixed);
    for p in [
        PropertyId::MainTheorem,
        PropertyId::DetGeoMean,
        PropertyId::HiaiLemma,
        PropertyId::ProcrustesMinimality,
    ] {
        let r = run_property(&s, p, &CampaignOptions::default()).unwrap();
        let t = r.worst_trial.unwrap();
        assert_eq!(r.worst_case_inputs.as_ref(), Some(&sample(p, &s, t)));
        assert_eq!(r.replay().unwrap(), r.worst_margin, "{p}");
    }
}

#[test]
fn report_survives_json() {
    let r = run_property(
        &spec(2, 8, RankMode::Full),
        PropertyId::CauchyBinetDet,
        &CampaignOptions::default(),
    )
    .unwrap();
    let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn inverted_main_theorem_fails() {
    let opts = CampaignOptions {
        invert_main_theorem: true,
        ..Default::default()
    };
    let r = run_property(&spec(3, 50, RankMode::Full), PropertyId::MainTheorem, &opts).unwrap();
    assert!(!r.passed());
    assert!(r.inverted);
    assert!(r.failures > 0);
    assert_eq!(r.replay().unwrap(), r.worst_margin);
    // the switch only concerns the main theorem
    let other = run_property(&spec(3, 50, RankMode::Full), PropertyId::DetGeoMean, &opts).unwrap();
    assert!(other.passed() && !other.inverted);
}

#[test]
fn malformed_witness_is_an_error() {
    let w = Witness {
        matrices: vec![],
        params: vec![],
    };
    assert!(evaluate(PropertyId::MainTheorem, &w, false).is_err());
    assert!(evaluate(PropertyId::ScalingIdentity, &w, false).is_err());
}

#[test]
fn extrapolation_finds_both_signs() {
    let s = spec(3, 300, RankMode::Full);
    let r = search_extrapolation_counterexamples(&s, &DEFAULT_EXTRAPOLATION_P).unwrap();
    assert!(r.passed(), "{r:#?}");
    let summary = r.extrapolation.as_ref().unwrap();
    assert!(summary.positive > 0 && summary.negative > 0);
    for w in [&summary.positive_witness, &summary.negative_witness] {
        let w = w.as_ref().unwrap();
        assert!(w.difference.abs() > EXTRAPOLATION_THRESHOLD);
        let replayed = evaluate(PropertyId::ExtrapolationSearch, &w.inputs, false)
            .unwrap()
            .unwrap();
        assert_eq!(replayed, w.difference.abs() - EXTRAPOLATION_THRESHOLD);
    }
}

#[test]
fn convenience_entry_points_pass() {
    let s = spec(3, 50, RankMode::Mixed);
    assert!(verify_main_theorem(&s).unwrap().passed());
    assert!(verify_det_geomean(&s).unwrap().passed());
    assert!(verify_log_majo_lemma(&s).unwrap().passed());
    assert!(verify_det_geomean_commuting(&s).unwrap().passed());
}
