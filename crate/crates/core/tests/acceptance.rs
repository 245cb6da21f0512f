//! Acceptance suite: twelve criteria, one status line each on stderr.
//!
//! Tolerances and runtime budgets are pinned here rather than taken from
//! `checks::run_all`, so a change to the library defaults cannot silently
//! loosen them.

use bgsemi::checks::{self, CriterionReport};
use std::io::Write;
use std::time::Duration;

// Numerical tolerances.
const GAMMA_REL: f64 = 1e-9;
const EULER_GAMMA_ABS: f64 = 1e-6;
const FUNCTIONAL_EQ_REL: f64 = 1e-10;
const EXPONENTIAL_ABS: f64 = 1e-6;
const BESSEL_ABS: f64 = 1e-5;
const BESSEL_MOMENT_REL: f64 = 1e-4;
const GAUSS_LAGUERRE_ABS: f64 = 1e-5;
const GAUSS_LAGUERRE_W_REL: f64 = 1e-8;
const SERIES_TERMS: usize = 10_000;
const ASYM_RATIO: f64 = 0.05;
const C_PHI_REL: f64 = 0.005;
const SEMIGROUP_ABS: f64 = 1e-4;
const GAUSSIAN_PAIR_ABS: f64 = 1e-10;
const DFOLD_RATIO: f64 = 0.01;
const POWER_ABS: f64 = 2e-5;
const CONJUGACY_REL: f64 = 1e-8;

// Runtime budgets in seconds, criteria 1..=12.
const BUDGETS: [u64; 12] = [5, 30, 10, 20, 20, 1, 5, 60, 30, 10, 10, 5];

fn report(r: &CriterionReport) {
    // written past the test harness capture so the lines always show
    let _ = writeln!(std::io::stderr(), "{r}");
}

#[test]
fn acceptance_criteria() {
    let reports = vec![
        checks::gamma_conformance(GAMMA_REL, EULER_GAMMA_ABS),
        checks::functional_equation(FUNCTIONAL_EQ_REL),
        checks::exponential_oracle(EXPONENTIAL_ABS),
        checks::bessel_oracle(BESSEL_ABS, BESSEL_MOMENT_REL),
        checks::gauss_laguerre_oracle(GAUSS_LAGUERRE_ABS, GAUSS_LAGUERRE_W_REL),
        checks::threshold_table(),
        checks::series_behavior(SERIES_TERMS),
        checks::asymptotic_ratio(ASYM_RATIO, C_PHI_REL),
        checks::semigroup_law(SEMIGROUP_ABS),
        checks::composer(GAUSSIAN_PAIR_ABS, DFOLD_RATIO),
        checks::power_identity(POWER_ABS),
        checks::flatness_suite(CONJUGACY_REL),
    ];
    let mut failed = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        report(r);
        assert_eq!(r.id as usize, i + 1);
        assert_eq!(r.budget, Duration::from_secs(BUDGETS[i]), "budget drift in criterion {}", r.id);
        if !r.pass() {
            failed.push(r.id);
        }
    }
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: {}/{} criteria pass",
        reports.len() - failed.len(),
        reports.len()
    );
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}

#[test]
fn pinned_tolerances_match_library_defaults() {
    let defaults = checks::run_all();
    let bound = |id: usize, name: &str| -> Vec<f64> {
        defaults[id - 1].measures.iter().filter(|m| m.name.starts_with(name)).map(|m| m.bound).collect()
    };
    assert_eq!(bound(1, "W_rel_err"), [GAMMA_REL]);
    assert_eq!(bound(1, "gamma_phi_err"), [EULER_GAMMA_ABS]);
    assert!(defaults[1].measures.iter().all(|m| m.bound == FUNCTIONAL_EQ_REL));
    assert_eq!(bound(3, "abs_err"), [EXPONENTIAL_ABS]);
    assert_eq!(bound(4, "abs_err"), [BESSEL_ABS]);
    assert_eq!(bound(4, "moment_rel_err"), [BESSEL_MOMENT_REL]);
    assert_eq!(bound(5, "abs_err"), [GAUSS_LAGUERRE_ABS]);
    assert_eq!(bound(5, "W_rel_err"), [GAUSS_LAGUERRE_W_REL]);
    assert_eq!(bound(8, "C_phi_rel_err"), [C_PHI_REL]);
    let ratios: Vec<f64> =
        defaults[7].measures.iter().filter(|m| m.name.contains("_x")).map(|m| m.bound).collect();
    assert!(!ratios.is_empty() && ratios.iter().all(|&b| b == ASYM_RATIO));
    assert_eq!(bound(9, "abs_err"), [SEMIGROUP_ABS]);
    assert_eq!(bound(10, "gaussian_pair_err"), [GAUSSIAN_PAIR_ABS]);
    assert_eq!(bound(10, "dfold_ratio_err"), [DFOLD_RATIO]);
    assert_eq!(bound(11, "abs_err"), [POWER_ABS]);
    let conj = bound(12, "conjugacy_");
    assert!(!conj.is_empty() && conj.iter().all(|&b| b == CONJUGACY_REL));
}
