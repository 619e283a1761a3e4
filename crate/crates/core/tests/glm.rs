mod common;

use binreg::design::{build_design, Dataset, DesignMatrix, Observation, VariableSpec};
use binreg::glm::{compare_links, fit, FitOptions, FitWarning};
use binreg::links::LinkKind;
use binreg::Error;
use common::*;

fn opts() -> FitOptions {
    FitOptions::default()
}

fn obs(y: u64, n: u64, levels: &[&str]) -> Observation {
    Observation {
        successes: y,
        trials: n,
        levels: levels.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn intercept_only_recovers_pooled_proportion() {
    let d = DesignMatrix::intercept_only(2);
    let (y, n) = ([3, 1], [4, 4]);
    for kind in LinkKind::ALL {
        let f = fit(&d, &y, &n, kind, &opts()).unwrap();
        assert!(f.converged);
        assert!((f.coefficients[0] - kind.link(0.5)).abs() < 1e-8, "{kind}");
        assert!(f.fitted_probs.iter().all(|p| (p - 0.5).abs() < 1e-8));
    }
    let f = fit(&d, &y, &n, LinkKind::Cloglog, &opts()).unwrap();
    assert!((f.coefficients[0] - (-0.366_512_920_581_664_3)).abs() < 1e-8);
}

#[test]
fn intercept_standard_error_matches_closed_form() {
    // logit: se(β₀) = 1/√(N π(1-π))
    let d = DesignMatrix::intercept_only(3);
    let f = fit(&d, &[2, 5, 3], &[10, 10, 10], LinkKind::Logit, &opts()).unwrap();
    let pi: f64 = 10.0 / 30.0;
    let se = 1.0 / (30.0 * pi * (1.0 - pi)).sqrt();
    assert!((f.std_errors[0] - se).abs() < 1e-10);
}

#[test]
fn saturated_model_has_zero_deviance() {
    let v = VariableSpec::new("g", &["a", "b", "c"], "a").unwrap();
    let data = Dataset::new(
        vec![v],
        vec![obs(2, 7, &["a"]), obs(5, 8, &["b"]), obs(3, 9, &["c"])],
    );
    let d = design_of(&data);
    for kind in LinkKind::ALL {
        let f = fit(&d, &data.successes(), &data.trials(), kind, &opts()).unwrap();
        assert!(f.deviance.abs() <= 1e-6, "{kind}: {}", f.deviance);
        for (p, o) in f.fitted_probs.iter().zip(&data.rows) {
            assert!((p - o.successes as f64 / o.trials as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn deviance_and_aic_identities() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Logit, 300, 1..=8, 11);
    let (y, n) = (data.successes(), data.trials());
    let full = design_of(&data);
    let reduced = build_design(&data, &specs[..1]).unwrap();
    // saturated log-likelihood at the observed proportions
    let sat = saturated_log_likelihood(&y, &n);
    for kind in LinkKind::ALL {
        let a = fit(&full, &y, &n, kind, &opts()).unwrap();
        let b = fit(&reduced, &y, &n, kind, &opts()).unwrap();
        assert!((a.deviance - 2.0 * (sat - a.log_likelihood)).abs() < 1e-8, "{kind}");
        let lhs = b.deviance - a.deviance;
        let rhs = 2.0 * (a.log_likelihood - b.log_likelihood);
        assert!((lhs - rhs).abs() < 1e-8, "{kind}: {lhs} vs {rhs}");
        assert!(lhs >= -1e-8);
        assert_eq!(a.aic, -2.0 * a.log_likelihood + 2.0 * a.n_params() as f64);
    }
}

#[test]
fn score_vanishes_at_estimate() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Probit, 400, 1..=8, 5);
    let (y, n) = (data.successes(), data.trials());
    let d = design_of(&data);
    for kind in LinkKind::ALL {
        let f = fit(&d, &y, &n, kind, &opts()).unwrap();
        // analytic score Σ (y - nμ) μ'/(μ(1-μ)) x
        for j in 0..d.n_cols() {
            let mut s = 0.0;
            for i in 0..d.n_rows() {
                let mu = f.fitted_probs[i];
                let eta = f.linear_predictor[i];
                s += (y[i] as f64 - n[i] as f64 * mu) * kind.mu_eta(eta) / (mu * (1.0 - mu)) * d.matrix[(i, j)];
            }
            assert!(s.abs() <= 1e-4, "{kind} column {j}: {s}");
        }
    }
}

#[test]
fn irls_agrees_with_newton_oracle() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Cloglog, 500, 1..=8, 3);
    let (y, n) = (data.successes(), data.trials());
    let d = design_of(&data);
    for kind in LinkKind::ALL {
        let f = fit(&d, &y, &n, kind, &opts()).unwrap();
        let oracle = newton_oracle(&d.matrix, &y, &n, kind);
        for (a, b) in f.coefficients.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-6, "{kind}: {a} vs {b}");
        }
    }
}

#[test]
fn reference_relabeling_preserves_fit() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Logit, 300, 1..=6, 17);
    let (y, n) = (data.successes(), data.trials());
    let a = design_of(&data);
    let mut other = specs.clone();
    other[1] = other[1].with_reference("Rich").unwrap();
    other[2] = other[2].with_reference("Secondary").unwrap();
    let b = build_design(&data, &other).unwrap();
    for kind in LinkKind::ALL {
        let fa = fit(&a, &y, &n, kind, &opts()).unwrap();
        let fb = fit(&b, &y, &n, kind, &opts()).unwrap();
        assert!((fa.deviance - fb.deviance).abs() < 1e-8, "{kind}");
        for (p, q) in fa.fitted_probs.iter().zip(&fb.fitted_probs) {
            assert!((p - q).abs() < 1e-8);
        }
        // Rich vs Poor contrast flips sign when Rich becomes the reference
        let ab = fa.coefficient("wealth=Rich").unwrap();
        let ba = fb.coefficient("wealth=Poor").unwrap();
        assert!((ab + ba).abs() < 1e-6, "{kind}: {ab} {ba}");
    }
}

#[test]
fn rank_deficiency_names_the_column() {
    // b is constant at its non-reference level whenever a is, so the columns coincide
    let a = VariableSpec::new("a", &["x", "y"], "x").unwrap();
    let b = VariableSpec::new("b", &["u", "v"], "u").unwrap();
    let data = Dataset::new(
        vec![a, b],
        vec![obs(1, 4, &["x", "u"]), obs(2, 4, &["y", "v"]), obs(1, 3, &["x", "u"]), obs(3, 5, &["y", "v"])],
    );
    let d = design_of(&data);
    let err = fit(&d, &data.successes(), &data.trials(), LinkKind::Logit, &opts()).unwrap_err();
    match &err {
        Error::RankDeficient { column, label } => {
            assert_eq!(*column, 2);
            assert_eq!(label.as_deref(), Some("b=v"));
        }
        other => panic!("unexpected {other}"),
    }
    assert!(err.to_string().contains("b=v"), "{err}");
}

#[test]
fn non_convergence_is_reported() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Probit, 200, 1..=8, 2);
    let d = design_of(&data);
    let o = FitOptions {
        max_iter: 1,
        ..FitOptions::default()
    };
    let f = fit(&d, &data.successes(), &data.trials(), LinkKind::Probit, &o).unwrap();
    assert!(!f.converged);
    assert_eq!(f.iterations, 1);
    assert!(matches!(f.warnings[0], FitWarning::NotConverged { iterations: 1 }));
}

#[test]
fn separation_is_flagged() {
    let v = VariableSpec::new("g", &["a", "b"], "a").unwrap();
    let data = Dataset::new(
        vec![v],
        vec![obs(0, 5, &["a"]), obs(0, 6, &["a"]), obs(2, 5, &["b"]), obs(3, 4, &["b"])],
    );
    let d = design_of(&data);
    for kind in LinkKind::ALL {
        let f = fit(&d, &data.successes(), &data.trials(), kind, &opts()).unwrap();
        assert!(
            f.warnings.iter().any(|w| matches!(w, FitWarning::Separation { .. })),
            "{kind}: {:?}",
            f.warnings
        );
        // the observed-outcome group is still fitted
        assert!((f.fitted_probs[2] - 5.0 / 9.0).abs() < 1e-6, "{kind}");
    }
}

#[test]
fn likelihood_never_falls_below_start() {
    for (seed, kind) in [(1, LinkKind::Logit), (2, LinkKind::Probit), (3, LinkKind::Cloglog), (4, LinkKind::Cauchit)] {
        let specs = three_variables();
        let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Logit, 250, 1..=8, seed);
        let f = fit(&design_of(&data), &data.successes(), &data.trials(), kind, &opts()).unwrap();
        assert!(f.log_likelihood >= f.initial_log_likelihood - 1e-9 * (f.initial_log_likelihood.abs() + 1.0));
        assert!(!f.warnings.iter().any(|w| matches!(w, FitWarning::LikelihoodDecreased { .. })));
        for w in f.deviance_trace.windows(2).skip(1) {
            assert!(w[1] <= w[0] + 1e-10 * (w[0].abs() + 1.0), "{kind}: {:?}", f.deviance_trace);
        }
    }
}

#[test]
fn comparison_matches_individual_fits() {
    let specs = three_variables();
    let data = synthetic(&specs, &THREE_VAR_TRUTH, LinkKind::Logit, 300, 1..=8, 9);
    let (y, n) = (data.successes(), data.trials());
    let d = design_of(&data);
    let cmp = compare_links(&d, &y, &n, &LinkKind::ALL, &opts());
    let mut best: Option<(f64, LinkKind)> = None;
    for o in &cmp.outcomes {
        let single = fit(&d, &y, &n, o.link, &opts()).unwrap();
        let f = o.converged_fit().unwrap();
        assert_eq!(f.coefficients, single.coefficients);
        assert_eq!(f.aic, single.aic);
        if best.is_none_or(|(a, _)| f.aic < a) {
            best = Some((f.aic, o.link));
        }
    }
    assert_eq!(cmp.selected, best.map(|b| b.1));

    let one = compare_links(&d, &y, &n, &[LinkKind::Probit], &opts());
    assert_eq!(one.outcomes.len(), 1);
    assert_eq!(one.selected, Some(LinkKind::Probit));

    let dup = compare_links(&d, &y, &n, &[LinkKind::Cauchit, LinkKind::Cauchit], &opts());
    let a = dup.outcomes[0].converged_fit().unwrap();
    let b = dup.outcomes[1].converged_fit().unwrap();
    assert_eq!(a.coefficients, b.coefficients);
    assert_eq!(a.std_errors, b.std_errors);
}
