use sturm_core::experiments::{
    self, default_family, embedding_constant, norm_equivalence_probe, separability_probe, series_bounded,
    Example17Config, DEFAULT_BOUNDED_SPREAD,
};
use sturm_core::otelbaev::{build_profile, OtelbaevConfig, Verdict};
use sturm_core::report;
use sturm_core::solver::SolveSetup;
use sturm_core::testfunctions::embedding_witness;
use sturm_core::Coefficient;

fn setup() -> SolveSetup {
    SolveSetup { half_width: 15.0, n_steps: 4000, ..SolveSetup::default() }
}

#[test]
fn solvable_coefficient_has_finite_embedding_constant() {
    let q = Coefficient::constant(1.0).unwrap();
    let profile = build_profile(&q, (-10.0, 10.0), 201, &[1.0], &OtelbaevConfig::default()).unwrap();
    assert_eq!(profile.verdict, Verdict::CorrectlySolvable);
    let c = embedding_constant(&q, 2.0, &default_family(), &setup()).unwrap();
    assert!(c.is_finite() && c > 0.0 && c <= 1.0, "{c}");
}

#[test]
fn vanishing_tail_diverges() {
    let q = Coefficient::tail_vanishing(0.0).unwrap();
    let profile = build_profile(&q, (-10.0, 10.0), 201, &[1.0], &OtelbaevConfig::default()).unwrap();
    assert_eq!(profile.verdict, Verdict::NotSolvable);
    let ratios: Vec<f64> =
        [8.0, 16.0, 32.0, 64.0].iter().map(|&n| embedding_witness(&q, n, 2.0, 8000).unwrap().ratio).collect();
    assert!(ratios.windows(2).all(|w| w[1] > 3.0 * w[0]), "{ratios:?}");
}

#[test]
fn separable_coefficients_have_bounded_bands() {
    for spec in ["constant:1", "constant:4", "example17:1", "example17:1.5"] {
        let q: Coefficient = spec.parse().unwrap();
        let sep: Vec<f64> =
            separability_probe(&q, 2.0, &default_family(), &setup()).unwrap().iter().map(|r| r.ratio).collect();
        let eq: Vec<f64> =
            norm_equivalence_probe(&q, 2.0, &default_family(), &setup()).unwrap().iter().map(|r| r.ratio).collect();
        assert_eq!(sep.len(), 20);
        assert!(sep.iter().all(|&r| r < 5.0), "{spec}: {sep:?}");
        assert!(eq.iter().all(|&r| (0.2..5.0).contains(&r)), "{spec}: {eq:?}");
        let max = sep.iter().copied().fold(0.0, f64::max);
        let min = sep.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min <= DEFAULT_BOUNDED_SPREAD);
    }
}

#[test]
fn bounded_series_detects_growth() {
    let rising: Vec<f64> = (1..20).map(f64::from).collect();
    assert!(!series_bounded(&rising, DEFAULT_BOUNDED_SPREAD));
}

#[test]
fn oscillating_study_is_deterministic_and_split_at_one() {
    let config = Example17Config { thetas: vec![0.5, 2.0], extents: vec![300.0, 3000.0], ..Example17Config::default() };
    let a = experiments::reproduce_example_17(&config).unwrap();
    let b = experiments::reproduce_example_17(&config).unwrap();
    assert_eq!(report::to_json(&a).unwrap(), report::to_json(&b).unwrap());
    assert!(a.rows[0].m_strictly_decreasing && a.rows[0].d_growth);
    assert!(a.rows[1].m_relative_change < 0.05 && !a.rows[1].d_growth);
}

#[test]
fn seeded_family_is_reproducible() {
    let a = experiments::seeded_family(42, 10);
    assert_eq!(a, experiments::seeded_family(42, 10));
    assert!(a.iter().all(|f| f.validate().is_ok() && f.is_nonnegative()));
}
