use matnorm_diag::diagnostics::PlotKind;
use matnorm_diag::simharness::{
    default_suite, generate_data, run_scenario, run_suite, Diagnostic, Generator, Scenario, ScenarioFailure,
    SuiteConfig, DENSE_STRICT_MAX_DIM,
};
use matnorm_diag::Error;

fn scenario(name: &str, generator: Generator, n: usize, c: usize, r: usize, seed: u64) -> Scenario {
    Scenario {
        name: name.into(),
        generator,
        n_samples: n,
        n_rows: c,
        n_cols: r,
        seed,
        diagnostics: Diagnostic::ALL.to_vec(),
    }
}

#[test]
fn infeasible_regime_keeps_only_mhealy() {
    let res = run_scenario(&scenario("c40", Generator::Matnormal, 1000, 40, 40, 1)).unwrap();
    assert_eq!(res.plot_series.keys().copied().collect::<Vec<_>>(), vec![PlotKind::Mhealy]);
    assert_eq!(res.notices.len(), 3);
    for n in &res.notices {
        assert!(n.message.contains("N = 1000") && n.message.contains("c r = 1600"), "{}", n.message);
    }
    assert!(res.alignment[&PlotKind::Mhealy].max_abs_dev < 0.06);
    assert!(res.fit_report.converged);
}

#[test]
fn small_regime_has_every_diagnostic_for_both_generators() {
    for generator in [Generator::Matnormal, Generator::StrictMvn] {
        let res = run_scenario(&scenario("c2", generator, 1000, 2, 2, 2)).unwrap();
        assert_eq!(res.plot_series.len(), 3);
        assert!(res.notices.is_empty());
        let lrt = res.lrt.unwrap();
        assert_eq!(lrt.dof, 5);
        if generator == Generator::StrictMvn {
            assert!(lrt.p_value < 0.01, "{lrt:?}");
        }
        for (kind, series) in &res.plot_series {
            assert_eq!(series.points.len(), 1000, "{kind:?}");
        }
    }
}

#[test]
fn scalar_scenario_reports_degenerate_lrt_as_a_notice() {
    let res = run_scenario(&scenario("scalar", Generator::Matnormal, 50, 1, 1, 3)).unwrap();
    assert!(res.lrt.is_none());
    assert_eq!(res.notices.len(), 1);
    assert_eq!(res.notices[0].diagnostic, Diagnostic::Lrt);
    assert_eq!(res.plot_series.len(), 3);
}

#[test]
fn failures_carry_replay_information() {
    let s = scenario("too_few", Generator::Matnormal, 2, 5, 1, 9);
    let f = run_scenario(&s).unwrap_err();
    assert_eq!((f.name.as_str(), f.seed), ("too_few", 9));
    assert_eq!(f.kind, "invalid_input");
    let json = serde_json::to_string(&f).unwrap();
    assert_eq!(serde_json::from_str::<ScenarioFailure>(&json).unwrap(), f);
    let bad = scenario("../x", Generator::Matnormal, 50, 2, 2, 1);
    assert_eq!(run_scenario(&bad).unwrap_err().kind, "invalid_input");
}

#[test]
fn replay_from_serialized_scenario_is_identical() {
    let s = scenario("replay", Generator::StrictMvn, 60, 3, 2, 77);
    let first = run_scenario(&s).unwrap();
    let again: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(run_scenario(&again).unwrap(), first);
    assert_eq!(generate_data(&s).unwrap(), generate_data(&again).unwrap());
}

#[test]
fn suite_results_do_not_depend_on_parallelism() {
    let suite = vec![
        scenario("a", Generator::Matnormal, 80, 3, 3, 1),
        scenario("b", Generator::StrictMvn, 80, 2, 4, 2),
        scenario("c", Generator::Matnormal, 10, 4, 4, 3),
        scenario("d", Generator::Matnormal, 2, 5, 1, 4),
    ];
    let one = run_suite(&suite, 1).unwrap();
    let three = run_suite(&suite, 3).unwrap();
    assert_eq!(one, three);
    assert_eq!(one, run_suite(&suite, 0).unwrap());
    assert!(one[3].is_err());
    let names: Vec<String> = one[..3].iter().map(|r| r.as_ref().unwrap().scenario.name.clone()).collect();
    assert_eq!(names, ["a", "b", "c"]);
    assert!(run_suite(&[], 2).unwrap().is_empty());
}

#[test]
fn default_suite_layout() {
    let suite = default_suite(100, None);
    assert_eq!(suite.len(), 10);
    assert_eq!(suite[0].name, "matnormal_c2_r2_n1000");
    assert_eq!(suite[3].name, "strict_c30_r30_n1000");
    assert_eq!(suite[9].name, "strict_c200_r200_n1000");
    for (k, s) in suite.iter().enumerate() {
        assert_eq!(s.seed, 100 + k as u64);
        assert_eq!(s.n_samples, 1000);
        assert_eq!(s.diagnostics, Diagnostic::ALL.to_vec());
    }
    assert_eq!(default_suite(1, Some(30)).len(), 4);
}

#[test]
fn strict_generator_switches_construction_above_dense_limit() {
    let c = 50;
    assert!(c * c > DENSE_STRICT_MAX_DIM);
    let data = generate_data(&scenario("big", Generator::StrictMvn, 5, c, c, 1)).unwrap();
    assert_eq!((data.n_samples(), data.n_rows(), data.n_cols()), (5, c, c));
    let small = generate_data(&scenario("small", Generator::StrictMvn, 5, 3, 3, 1)).unwrap();
    assert_eq!(small.n_samples(), 5);
}

#[test]
fn toml_config() {
    let text = r#"
[[scenario]]
name = "first"
generator = "matnormal"
n_samples = 100
n_rows = 2
n_cols = 3
seed = 5

[[scenario]]
name = "second"
generator = "strict_mvn"
n_samples = 20
n_rows = 4
n_cols = 4
seed = 6
diagnostics = ["mhealy", "lrt"]
"#;
    let cfg = SuiteConfig::parse(text).unwrap();
    assert_eq!(cfg.scenarios.len(), 2);
    assert_eq!(cfg.scenarios[0].diagnostics, Diagnostic::ALL.to_vec());
    assert_eq!(cfg.scenarios[1].diagnostics, vec![Diagnostic::Mhealy, Diagnostic::Lrt]);
    assert_eq!(SuiteConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    assert_eq!(SuiteConfig::parse("").unwrap().scenarios.len(), 0);
    let err = SuiteConfig::parse("[[scenario]]\nname = \"x\"\ngenerator = \"other\"\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
}
