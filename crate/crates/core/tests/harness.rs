use noisy_teleport::entanglement::{f_adc_both, f_adc_pdc, single_sided_threshold, teleport_fidelity, DampingPair};
use noisy_teleport::harness::{
    enhancement_search, run, GridAxis, ResourceSpec, Series, Statistics, SweepConfig, SweepKind, TiedSeries,
};

fn config(kind: SweepKind) -> SweepConfig {
    SweepConfig::new(kind)
}

fn small(kind: SweepKind, axes: Vec<GridAxis>) -> SweepConfig {
    let mut cfg = config(kind);
    cfg.grid = axes;
    cfg
}

#[test]
fn contour_matches_closed_form_and_schema() {
    let cfg = small(SweepKind::FefContour, vec![GridAxis::new(0.0, 1.0, 11), GridAxis::new(0.0, 1.0, 11)]);
    let result = run(&cfg).unwrap();
    assert_eq!(result.columns, ["p_a", "p_b", "f"]);
    assert_eq!(result.rows.len(), 121);
    for row in &result.rows {
        let (a, b, f) = (row[0].as_f64().unwrap(), row[1].as_f64().unwrap(), row[2].as_f64().unwrap());
        assert!((f - f_adc_both(DampingPair::new(a, b).unwrap()).unwrap()).abs() < 1e-12);
    }
    let csv = result.to_csv_string();
    assert!(csv.starts_with("p_a,p_b,f\n0,0,1\n"));
    assert_eq!(csv.lines().count(), 122);
}

#[test]
fn contour_on_werner_resource_uses_the_numeric_route() {
    let mut cfg = small(SweepKind::FefContour, vec![GridAxis::new(0.0, 1.0, 3), GridAxis::new(0.0, 1.0, 3)]);
    cfg.resource = ResourceSpec::Werner(0.8);
    let result = run(&cfg).unwrap();
    assert!((result.rows[0][2].as_f64().unwrap() - 0.85).abs() < 1e-12);
}

#[test]
fn sensitivity_masks_the_classical_region() {
    let cfg = small(SweepKind::Sensitivity, vec![GridAxis::new(0.0, 1.0, 6), GridAxis::new(0.0, 1.0, 6)]);
    let result = run(&cfg).unwrap();
    assert_eq!(result.columns, ["p_a", "p_b", "f", "dfdpb"]);
    for row in &result.rows {
        let (b, f) = (row[1].as_f64().unwrap(), row[2].as_f64().unwrap());
        assert_eq!(row[3].as_f64().is_some(), f > 0.5 && b < 1.0);
    }
    let contour = result.metadata.extra["f_half_contour"].as_array().unwrap();
    assert_eq!(contour.len(), 6);
    let at_zero = contour[0]["p_b"].as_f64().unwrap();
    assert!((at_zero - single_sided_threshold()).abs() < 1e-8);
}

#[test]
fn pdc_sweep_matches_closed_form() {
    let mut cfg = small(SweepKind::FidelityPdc, vec![GridAxis::new(0.0, 1.0, 11)]);
    cfg.series = Some(vec![Series::Fixed(0.0), Series::Fixed(0.5), Series::Tied(TiedSeries::Diag)]);
    let result = run(&cfg).unwrap();
    assert_eq!(result.columns, ["series", "p_a", "p_b", "F"]);
    assert_eq!(result.rows.len(), 33);
    for row in &result.rows {
        let (a, b, big_f) = (row[1].as_f64().unwrap(), row[2].as_f64().unwrap(), row[3].as_f64().unwrap());
        let f = f_adc_pdc(DampingPair::new(a, b).unwrap()).unwrap();
        assert!((big_f - teleport_fidelity(f, 2).unwrap()).abs() < 1e-10);
    }
    assert!(result.to_csv_string().contains("\np_a=p_b,1,1,"));
    assert!(result.metadata.extra["max_abs_mixture_minus_direct"].as_f64().unwrap() < 1e-10);
}

#[test]
fn ideal_enhancement_search() {
    let report = enhancement_search(&config(SweepKind::EnhancementSearch)).unwrap();
    let p_star = single_sided_threshold();
    assert!((report.p_b_star.unwrap() - p_star).abs() < 1e-6);
    let f_pstar = report.scan_f[report.scan_p_a.iter().position(|&a| (a - 0.6).abs() < 1e-9).unwrap()];
    assert!((f_pstar - 0.6817).abs() < 1e-3, "{f_pstar}");
    assert!(report.F_max.unwrap() >= f_pstar);
    assert!((report.p_a_opt.unwrap() - 0.6).abs() < 0.02);
    assert!((report.F_at_pa0.unwrap() - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn werner_enhancement_search() {
    let mut cfg = config(SweepKind::EnhancementSearch);
    cfg.resource = ResourceSpec::Werner(0.8);
    let report = enhancement_search(&cfg).unwrap();
    assert!((report.p_b_star.unwrap() - 0.75).abs() < 1e-6);
    assert!(report.F_max.unwrap() > report.F_at_pa0.unwrap());
}

#[test]
fn weak_resource_reports_boundary_values() {
    let mut cfg = config(SweepKind::EnhancementSearch);
    cfg.resource = ResourceSpec::Werner(0.2);
    let report = enhancement_search(&cfg).unwrap();
    assert!(report.p_b_star.is_none() && report.F_max.is_none());
    let [f0, _] = report.boundary.unwrap();
    assert!((f0 - 0.6).abs() < 1e-10);
}

#[test]
fn calibration_recovers_theory_in_exact_mode() {
    for kind in [SweepKind::CalibAlice, SweepKind::CalibBob] {
        let result = run(&config(kind)).unwrap();
        let theory = result.column("p_theory").unwrap();
        let est = result.column("p_estimated").unwrap();
        for (t, e) in theory.iter().zip(&est) {
            assert!((t.unwrap() - e.unwrap()).abs() < 1e-3);
        }
    }
}

#[test]
fn counts_mode_is_seeded() {
    let mut cfg = small(SweepKind::FidelityAdc, vec![GridAxis::new(0.0, 0.6, 3)]);
    cfg.series = Some(vec![Series::Fixed(0.0)]);
    cfg.statistics = Statistics::Counts { n_per_setting: 2000, n_resamples: 4, seed: 9 };
    let a = run(&cfg).unwrap();
    assert_eq!(a.columns.last().unwrap(), "F_err");
    assert_eq!(a.metadata.seed, Some(9));
    assert_eq!(a.to_csv_string(), run(&cfg).unwrap().to_csv_string());
    cfg.statistics = cfg.statistics.with_seed(10);
    assert_ne!(a.to_csv_string(), run(&cfg).unwrap().to_csv_string());
}

#[test]
fn counts_mode_rejected_where_undefined() {
    for kind in [SweepKind::FefContour, SweepKind::Sensitivity, SweepKind::EnhancementSearch] {
        let mut cfg = config(kind);
        cfg.statistics = Statistics::Counts { n_per_setting: 10, n_resamples: 2, seed: 0 };
        assert!(run(&cfg).unwrap_err().to_string().contains("exact states only"), "{kind:?}");
    }
}

#[test]
fn config_json_parses_and_rejects_unknown_fields() {
    let cfg = SweepConfig::from_json(
        r#"{"kind":"fidelity_adc","resource":{"werner":0.9},"grid":[{"start":0,"stop":1,"points":5}],
            "statistics":{"counts":{"n_per_setting":100,"n_resamples":3,"seed":4}},"series":[0.2,"diag"]}"#,
    )
    .unwrap();
    assert_eq!(cfg.resource, ResourceSpec::Werner(0.9));
    assert_eq!(cfg.series_or_default().unwrap(), vec![Series::Fixed(0.2), Series::Tied(TiedSeries::Diag)]);
    assert!(SweepConfig::from_json(r#"{"kind":"fef_contour","colour":"red"}"#).is_err());
    assert!(SweepConfig::from_json(r#"{"kind":"teleport_everything"}"#).is_err());
    let mut bad = config(SweepKind::FefContour);
    bad.grid = vec![GridAxis::new(0.0, 1.5, 4), GridAxis::unit()];
    assert!(run(&bad).is_err());
}

#[cfg(feature = "parallel")]
#[test]
fn results_do_not_depend_on_thread_count() {
    let mut cfg = small(SweepKind::FidelityAdc, vec![GridAxis::new(0.0, 1.0, 6)]);
    cfg.statistics = Statistics::Counts { n_per_setting: 1000, n_resamples: 3, seed: 21 };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = single.install(|| run(&cfg)).unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let four = many.install(|| run(&cfg)).unwrap();
    assert_eq!(one.to_csv_string(), four.to_csv_string());
    assert_eq!(one.to_json(), four.to_json());
}
