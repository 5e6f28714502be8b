use kernel_dpp::approximants::Scheme;
use kernel_dpp::metrics::{
    beta_n, clip_squared, derive_seed, fit_loglog_slope, l2_residual_eigen, mc_error_study, replicate_design, rkhs_residual_oka,
    summarize, write_records, DesignFamily, ErrorRecord, SpectralTails, StudySpec, Summary, TargetSpec, CSV_HEADER,
};
use kernel_dpp::{Error, Model, Target};
use proptest::prelude::*;

fn sobolev() -> Model {
    Model::periodic_sobolev(1, 2000).unwrap()
}

fn spec<'a>(model: &'a Model, design: DesignFamily, scheme: Scheme, target: TargetSpec, grid: &[usize], reps: usize) -> StudySpec<'a, f64> {
    StudySpec {
        model,
        kernel_id: "periodic-sobolev-s1".into(),
        design,
        scheme,
        target,
        n_grid: grid.to_vec(),
        replicates: reps,
        master_seed: 99,
    }
}

fn summaries(pairs: &[(usize, f64)]) -> Vec<Summary> {
    pairs
        .iter()
        .map(|&(n, mean)| Summary {
            n,
            mean,
            stderr: 0.0,
            count: 1,
        })
        .collect()
}

#[test]
fn frozen_beta_values() {
    let tails = SpectralTails::from_model(&sobolev());
    for (n, want) in [
        (1, 3.289_868_133_696_453),
        (5, 3.869_604_401_089_359),
        (10, 3.291_117_223_735_220),
        (50, 3.844_107_135_929_036),
        (200, 3.960_266_645_339_425),
    ] {
        let got = tails.beta(n).unwrap();
        assert!((got - want).abs() < 1e-4 * want, "beta_{n}: {got} vs {want}");
    }
}

#[test]
fn frozen_epsilon_values() {
    let tails = SpectralTails::from_model(&sobolev());
    for (m, n, want) in [
        (1, 1, 0.766_783_872_801_688_5),
        (2, 1, 0.766_783_872_801_688_5),
        (6, 1, 0.108_231_899_664_218_4),
        (1, 5, 0.229_846_397_849_219_8),
        (6, 5, 0.085_099_687_311_851_26),
        (1, 10, 0.078_422_391_611_436_36),
        (6, 10, 0.050_066_001_614_963_61),
    ] {
        let got = tails.eps(m, n).unwrap();
        assert!((got - want).abs() < 1e-10, "eps_{m}({n}): {got} vs {want}");
    }
    assert!(tails.eps(0, 3).is_err());
}

#[test]
fn beta_rejects_out_of_range() {
    assert!(beta_n(&[1.0, 0.5], 0.0, 0).is_err());
    assert!(beta_n(&[1.0, 0.5], 0.0, 2).is_err());
}

#[test]
fn slope_of_exact_power_law() {
    let pts: Vec<(usize, f64)> = [8, 16, 32, 64].iter().map(|&n| (n, 3.0 * (n as f64).powi(-4))).collect();
    let s = fit_loglog_slope(&summaries(&pts), 8..=64).unwrap();
    assert!((s + 4.0).abs() < 1e-10);
    let flat: Vec<(usize, f64)> = [8, 16, 32].iter().map(|&n| (n, 0.5)).collect();
    assert!(fit_loglog_slope(&summaries(&flat), 1..=100).unwrap().abs() < 1e-12);
}

#[test]
fn slope_fit_errors() {
    let two = summaries(&[(8, 1.0), (16, 0.5)]);
    assert!(matches!(fit_loglog_slope(&two, 1..=100), Err(Error::SlopeFit(_))));
    let zero = summaries(&[(8, 1.0), (16, 0.0), (32, 0.1)]);
    assert!(matches!(fit_loglog_slope(&zero, 1..=100), Err(Error::SlopeFit(_))));
    let same = summaries(&[(8, 1.0), (8, 0.5), (8, 0.1)]);
    assert!(matches!(fit_loglog_slope(&same, 1..=100), Err(Error::SlopeFit(_))));
    let out = summaries(&[(8, 1.0), (16, 0.5), (32, 0.1)]);
    assert!(fit_loglog_slope(&out, 9..=100).is_err());
}

#[test]
fn clipping_floor() {
    assert_eq!(clip_squared("x", 0.25).unwrap(), (0.25, false));
    assert_eq!(clip_squared("x", -1e-12).unwrap(), (0.0, true));
    assert!(clip_squared("x", -1e-6).is_err());
}

#[test]
fn eigen_residual_trivial_cases() {
    let f = Target::from_coefficients([(0, 1.0), (3, -2.0)]);
    assert!((l2_residual_eigen(&f, &[]) - 5.0).abs() < 1e-15);
    assert!(l2_residual_eigen(&f, &[1.0, 0.0, 0.0, -2.0]).abs() < 1e-15);
    assert!((l2_residual_eigen(&f, &[1.0, 1.0]) - 5.0).abs() < 1e-15);
}

#[test]
fn summarize_and_write() {
    let rec = |n, value, metric: &str| ErrorRecord {
        kernel: "k".into(),
        design: "dpp".into(),
        scheme: "oka".into(),
        target: "e1".into(),
        n,
        m: None,
        replicate: 0,
        metric: metric.into(),
        value,
        seed: 7,
        clipped: false,
    };
    let records = vec![rec(4, 1.0, "l2_sq"), rec(4, 3.0, "l2_sq"), rec(8, 0.5, "l2_sq"), rec(4, 9.0, "rkhs_sq")];
    let s = summarize(&records, "l2_sq");
    assert_eq!(s.len(), 2);
    assert_eq!((s[0].n, s[0].count), (4, 2));
    assert!((s[0].mean - 2.0).abs() < 1e-15 && (s[0].stderr - 1.0).abs() < 1e-12);
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 4);
}

#[test]
fn seeds_are_distinct_and_stable() {
    assert_eq!(derive_seed(5, 8, 3), derive_seed(5, 8, 3));
    assert_ne!(derive_seed(5, 8, 3), derive_seed(5, 8, 4));
    assert_ne!(derive_seed(5, 8, 3), derive_seed(5, 9, 3));
    assert_ne!(derive_seed(5, 8, 3), derive_seed(6, 8, 3));
}

#[test]
fn study_is_reproducible_from_recorded_seeds() {
    let model = sobolev();
    let target = TargetSpec::Coefficients {
        values: vec![1.0, -0.5, 0.25, 0.0, 0.1],
    };
    let s = spec(&model, DesignFamily::Dpp, Scheme::Oka, target.clone(), &[4, 6], 5);
    let a = mc_error_study(&s).unwrap();
    let b = mc_error_study(&s).unwrap();
    assert_eq!(a.records, b.records);
    assert!(a.failures.is_empty());
    let f = target.resolve(&model, 0).unwrap();
    for r in a.records.iter().filter(|r| r.metric == "rkhs_sq") {
        let design = replicate_design(&model, &DesignFamily::Dpp, r.n, r.seed).unwrap();
        let evals = f.eval_many(&model, &design.nodes).unwrap();
        let v = rkhs_residual_oka(&model, &design.nodes, &evals, f.rkhs_norm_sq(&model).unwrap()).unwrap();
        assert!((v.max(0.0) - r.value).abs() < 1e-12 * (1.0 + r.value));
    }
}

#[test]
fn failure_budget_trips_on_rank_deficient_kernel() {
    let model = Model::sinc_pswf(2.0, 7.0, 128).unwrap();
    let s = spec(
        &model,
        DesignFamily::Dpp,
        Scheme::Oka,
        TargetSpec::Eigenfunction { m: 1, rkhs: true },
        &[8, 20],
        5,
    );
    let out = mc_error_study(&s).unwrap();
    assert_eq!(out.failures_at(8), 0);
    assert!(out.failures_at(20) > 1);
    assert!(matches!(out.check_budget(), Err(Error::StudyFailureBudget { n: 20, .. })));
}

#[test]
fn tels_error_matches_projection_identity() {
    // E‖f - f̂_tELS‖² = ‖f - Π_M f‖² + M ‖f - Π_N f‖² under the DPP
    let model = sobolev();
    let (n, m) = (8, 3);
    let s = spec(
        &model,
        DesignFamily::Dpp,
        Scheme::Tels { m },
        TargetSpec::Eigenfunction { m: n + 1, rkhs: false },
        &[n],
        4000,
    );
    let out = mc_error_study(&s).unwrap();
    let sm = summarize(&out.records, "l2_sq");
    let expected = 1.0 + m as f64;
    assert!((sm[0].mean - expected).abs() < 4.0 * sm[0].stderr, "{:?}", sm[0]);
}

#[test]
fn cvs_rkhs_error_matches_epsilon_two() {
    let model = sobolev();
    let tails = SpectralTails::from_model(&model);
    let n = 6;
    let s = spec(
        &model,
        DesignFamily::Cvs,
        Scheme::Oka,
        TargetSpec::Eigenfunction { m: 2, rkhs: true },
        &[n],
        3000,
    );
    let out = mc_error_study(&s).unwrap();
    let sm = summarize(&out.records, "rkhs_sq");
    let expected = tails.eps(2, n).unwrap();
    assert!((sm[0].mean - expected).abs() < 4.0 * sm[0].stderr, "{:?} vs {expected}", sm[0]);
}

fn esp(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for v in values {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 4..30).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tails_are_non_increasing(s in spectrum()) {
        let t = SpectralTails::new(s.clone(), 0.0, 0.0);
        for n in 0..s.len() {
            prop_assert!(t.r(n + 1) <= t.r(n));
            prop_assert!(t.r2(n + 1) <= t.r2(n));
        }
    }

    #[test]
    fn epsilons_match_direct_symmetric_sums(s in spectrum(), n in 1usize..4) {
        prop_assume!(n < s.len());
        let t = SpectralTails::new(s.clone(), 0.0, 0.0);
        let total = esp(&s, n);
        for m in 0..s.len() {
            let rest: Vec<f64> = s.iter().enumerate().filter(|(i, _)| *i != m).map(|(_, v)| *v).collect();
            let want = s[m] * esp(&rest, n) / total;
            let got = t.eps(m + 1, n).unwrap();
            prop_assert!((got - want).abs() < 1e-10 * (1.0 + want), "{} vs {}", got, want);
            prop_assert!(got <= 1.0 + 1e-12);
        }
        for m in 1..s.len() {
            prop_assert!(t.eps(m + 1, n).unwrap() <= t.eps(m, n).unwrap() + 1e-12);
        }
    }

    #[test]
    fn first_epsilon_within_beta_bound(s in spectrum(), n in 1usize..3) {
        prop_assume!(n + 1 < s.len());
        let t = SpectralTails::new(s.clone(), 0.0, 0.0);
        let bound = s[n] * (1.0 + t.beta(n).unwrap());
        prop_assert!(t.eps(1, n).unwrap() <= bound * (1.0 + 1e-10));
    }
}
