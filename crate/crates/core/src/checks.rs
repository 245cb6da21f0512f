//! Conformance checks shared by the acceptance test target and `bgsemi selftest`.
//!
//! Every check takes its tolerances as arguments; [`run_all`] supplies the
//! standard ones. A check reports each measured quantity next to its
//! tolerance together with its wall-clock time and budget.

use crate::asymptotics::{
    classical_urbanik_log, dfold_log, flatness_check, gaussian_tail_convolve, legendre_data, log_family_display_log,
    self_neglecting_check, AsymptoticModel, TailAsymptotics,
};
use crate::bernstein::{catalog_samples, BernsteinFunction};
use crate::bgamma::{moments, BernsteinGammaEvaluator};
use crate::density::{
    density_grid, gauss_laguerre_density, mellin_barnes_density, power_density, power_density_direct, DensityOptions,
};
use crate::determinacy::{abelian_series, carleman_series, threshold_bounds, Classification};
use crate::error::Result;
use crate::{oracle, quad};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Measure {
    /// Passes when value ≤ bound.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Measure { name: name.into(), value, bound, pass: value <= bound }
    }

    /// A yes/no outcome recorded as 1 (holds) or 0 (fails).
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Measure { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: 1.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub measures: Vec<Measure>,
    pub elapsed: Duration,
    pub budget: Duration,
    /// Set when the check itself could not run to completion.
    pub failure: Option<String>,
}

impl CriterionReport {
    pub fn numerics_pass(&self) -> bool {
        self.failure.is_none() && !self.measures.is_empty() && self.measures.iter().all(|m| m.pass)
    }
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }
    pub fn pass(&self) -> bool {
        self.numerics_pass() && self.within_budget()
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: time {:.2}s/{}s",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )?;
        for m in &self.measures {
            write!(f, "; {}={:.3e} (<= {:.1e}{})", m.name, m.value, m.bound, if m.pass { "" } else { " FAIL" })?;
        }
        if let Some(e) = &self.failure {
            write!(f, "; error: {e}")?;
        }
        Ok(())
    }
}

fn run(id: u8, title: &'static str, budget_s: u64, body: impl FnOnce() -> Result<Vec<Measure>>) -> CriterionReport {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (measures, failure) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    CriterionReport { id, title, measures, elapsed, budget: Duration::from_secs(budget_s), failure }
}

fn evaluator(phi: BernsteinFunction) -> Result<BernsteinGammaEvaluator> {
    BernsteinGammaEvaluator::with_default_tol(phi)
}

/// Worst absolute deviation of an inverted density from a reference on a grid.
fn density_deviation(
    ev: &BernsteinGammaEvaluator,
    t: f64,
    xs: &[f64],
    opts: &DensityOptions,
    exact: impl Fn(f64) -> f64,
) -> Result<f64> {
    let grid = density_grid(ev, t, 0, xs, opts)?;
    if let Some(f) = grid.failures.first() {
        return Err(f.error.clone());
    }
    Ok(grid.points.iter().map(|p| (p.value - exact(p.x)).abs()).fold(0.0, f64::max))
}

/// Criterion 1: W_φ = Γ for φ(u) = u on a 200-point grid in (0,10]×[-20,20]i, and γ_φ = γ.
pub fn gamma_conformance(rel_tol: f64, gamma_tol: f64) -> CriterionReport {
    run(1, "gamma conformance", 5, || {
        let ev = evaluator(BernsteinFunction::identity())?;
        let mut worst = 0.0f64;
        for a in quad::linspace(0.5, 10.0, 10) {
            for b in quad::linspace(-20.0, 20.0, 20) {
                let z = Complex64::new(a, b);
                let w = ev.eval_w(z)?;
                let g = oracle::gamma(z);
                worst = worst.max((w - g).norm() / g.norm());
            }
        }
        let gamma = ev.gamma_phi().value;
        Ok(vec![
            Measure::at_most("W_rel_err", worst, rel_tol),
            Measure::at_most("gamma_phi_err", (gamma - 0.577_215_7).abs(), gamma_tol),
        ])
    })
}

/// Criterion 2: |W(z+1) - φ(z)W(z)| / |W(z+1)| on {a+ib : a ∈ {0.25,0.5,1,2}, b ∈ [-50,50]}.
pub fn functional_equation(rel_tol: f64) -> CriterionReport {
    run(2, "functional equation", 30, || {
        let mut out = Vec::new();
        for phi in catalog_samples() {
            let label = phi.label();
            let ev = evaluator(phi)?;
            let mut worst = 0.0f64;
            for a in [0.25, 0.5, 1.0, 2.0] {
                for b in quad::linspace(-50.0, 50.0, 41) {
                    let z = Complex64::new(a, b);
                    let lhs = ev.eval_w(z + 1.0)?;
                    let rhs = ev.phi().eval_complex(z)? * ev.eval_w(z)?;
                    worst = worst.max((lhs - rhs).norm() / lhs.norm());
                }
            }
            out.push(Measure::at_most(label, worst, rel_tol));
        }
        Ok(out)
    })
}

/// Criterion 3: Identity, t = 1: the inverted density against e^{-x} on 40 points of [0.05, 8].
pub fn exponential_oracle(abs_tol: f64) -> CriterionReport {
    run(3, "exponential oracle", 10, || {
        let ev = evaluator(BernsteinFunction::identity())?;
        let xs = quad::linspace(0.05, 8.0, 40);
        let dev = density_deviation(&ev, 1.0, &xs, &DensityOptions::fixed(abs_tol * 1e-2), |x| (-x).exp())?;
        Ok(vec![Measure::at_most("abs_err", dev, abs_tol)])
    })
}

/// ∫_0^∞ x^n 2K₀(2√x) dx, by quadrature in x = e^w.
fn bessel_moment(n: i32) -> Result<f64> {
    let q = quad::integrate(
        |w: f64| {
            let x = w.exp();
            x.powi(n + 1) * 2.0 * oracle::bessel_k0(2.0 * x.sqrt())
        },
        -40.0,
        9.0,
        0.0,
        1e-12,
    )?;
    Ok(q.value)
}

/// Criterion 4: Identity, t = 2: inversion against 2K₀(2√x) on [0.1, 6]; the moment
/// formula against quadrature moments of the Bessel density for n ≤ 4.
pub fn bessel_oracle(abs_tol: f64, moment_rel_tol: f64) -> CriterionReport {
    run(4, "bessel oracle", 20, || {
        let ev = evaluator(BernsteinFunction::identity())?;
        let xs = quad::linspace(0.1, 6.0, 40);
        let dev = density_deviation(&ev, 2.0, &xs, &DensityOptions::fixed(abs_tol * 1e-2), |x| {
            2.0 * oracle::bessel_k0(2.0 * x.sqrt())
        })?;
        let m = moments(ev.phi(), 2.0, 4)?;
        let mut worst = 0.0f64;
        let mut fact = 1.0;
        for n in 0..=4 {
            if n > 0 {
                fact *= n as f64;
            }
            let q = bessel_moment(n)?;
            worst = worst.max((q / (fact * fact) - 1.0).abs());
            worst = worst.max((m.value(n as usize) / (fact * fact) - 1.0).abs());
        }
        Ok(vec![Measure::at_most("abs_err", dev, abs_tol), Measure::at_most("moment_rel_err", worst, moment_rel_tol)])
    })
}

/// Criterion 5: Gauss-Laguerre α = 0.5, m = 1: inversion against the closed form on
/// [0.1, 3], and W against Γ(z/2+1)/Γ(3/2) on [0.5, 6].
pub fn gauss_laguerre_oracle(abs_tol: f64, w_rel_tol: f64) -> CriterionReport {
    run(5, "gauss-laguerre oracle", 20, || {
        let ev = evaluator(BernsteinFunction::gauss_laguerre(0.5, 1.0)?)?;
        let xs = quad::linspace(0.1, 3.0, 30);
        let dev = density_deviation(&ev, 1.0, &xs, &DensityOptions::fixed(abs_tol * 1e-2), |x| {
            gauss_laguerre_density(0.5, 1.0, x)
        })?;
        let norm = oracle::gamma(Complex64::new(1.5, 0.0)).re;
        let mut worst = 0.0f64;
        for z in quad::linspace(0.5, 6.0, 23) {
            let w = ev.eval_w(Complex64::new(z, 0.0))?.re;
            let g = oracle::gamma(Complex64::new(0.5 * z + 1.0, 0.0)).re / norm;
            worst = worst.max((w / g - 1.0).abs());
        }
        Ok(vec![Measure::at_most("abs_err", dev, abs_tol), Measure::at_most("W_rel_err", worst, w_rel_tol)])
    })
}

/// Criterion 6: Threshold bounds reproduce the catalog table exactly, sharp flags included.
pub fn threshold_table() -> CriterionReport {
    run(6, "threshold table", 1, || {
        let table: Vec<(BernsteinFunction, f64)> = vec![
            (BernsteinFunction::identity(), 2.0),
            (BernsteinFunction::gamma_ratio(1.0, 1.0, 0.3)?, 2.0 / (1.0 - 0.3)),
            (BernsteinFunction::power_shifted(0.5, 0.0)?, 4.0),
            (BernsteinFunction::log(1.0)?, f64::INFINITY),
            (BernsteinFunction::bounded_ratio(), f64::INFINITY),
        ];
        let mut out = Vec::new();
        for (phi, expected) in table {
            let b = threshold_bounds(&phi)?;
            let ok = b.lower.0 == expected && b.upper.0 == expected && b.sharp_at_lower;
            out.push(Measure::holds(phi.label(), ok));
        }
        Ok(out)
    })
}

/// Criterion 7: Carleman bound series for Identity at t = 2 and 2.5, and the Abelian series
/// for every catalog family with a finite upper bound at t = upper·{1.1, 1.5, 2, 3}.
pub fn series_behavior(n: usize) -> CriterionReport {
    run(7, "series behavior", 5, || {
        let id = BernsteinFunction::identity();
        let mut out = vec![
            Measure::holds("carleman_t2_diverges", carleman_series(&id, 2.0, n)?.classification() == Classification::Diverges),
            Measure::holds(
                "carleman_t2.5_converges",
                carleman_series(&id, 2.5, n)?.classification() == Classification::Converges,
            ),
        ];
        for phi in catalog_samples() {
            let Ok(b) = threshold_bounds(&phi) else { continue };
            if !b.upper.is_finite() {
                continue;
            }
            let all = [1.1, 1.5, 2.0, 3.0].iter().try_fold(true, |acc, &f| -> Result<bool> {
                let t = b.upper.0 * f;
                Ok(acc && abelian_series(&phi, t, t / 10.0, n)?.classification == Classification::Converges)
            })?;
            out.push(Measure::holds(format!("abelian_{}", phi.label()), all));
        }
        Ok(out)
    })
}

/// Largest ξ on `grid` whose saddle-contour inversion meets `tol` absolutely
/// and resolves the value to 1e-6 relative, with the inverted value there.
pub fn largest_reliable_point(ev: &BernsteinGammaEvaluator, t: f64, grid: &[f64], tol: f64) -> Option<(f64, f64)> {
    grid.iter()
        .filter_map(|&x| {
            let p = mellin_barnes_density(ev, t, x, 0, &DensityOptions::saddle(tol)).ok()?;
            (p.value > 0.0 && p.abs_error <= tol && p.abs_error <= 1e-6 * p.value).then_some((x, p.value))
        })
        .last()
}

/// Criterion 8: asym/exact at the largest reliable inversion point for Identity t ∈ {1, 2}
/// and Gauss-Laguerre t = 1; C_φ and the classical display for Identity.
pub fn asymptotic_ratio(ratio_tol: f64, c_phi_rel_tol: f64) -> CriterionReport {
    run(8, "asymptotic ratio", 60, || {
        let cases: Vec<(BernsteinFunction, f64, Vec<f64>)> = vec![
            (BernsteinFunction::identity(), 1.0, vec![5.0, 10.0, 20.0, 40.0, 80.0, 160.0]),
            (BernsteinFunction::identity(), 2.0, vec![25.0, 100.0, 400.0, 1600.0, 6400.0]),
            (BernsteinFunction::gauss_laguerre(0.5, 1.0)?, 1.0, vec![2.0, 3.0, 4.0, 6.0, 8.0, 12.0]),
        ];
        let mut out = Vec::new();
        for (phi, t, grid) in cases {
            let label = phi.label();
            let ev = evaluator(phi)?;
            let a = TailAsymptotics::new(&ev)?;
            let Some((x, exact)) = largest_reliable_point(&ev, t, &grid, 1e-10) else {
                out.push(Measure::holds(format!("{label}_t{t}_reliable_point"), false));
                continue;
            };
            let r = (a.log_density(t, x, 0)?.log_abs - exact.ln()).exp();
            out.push(Measure::at_most(format!("{label}_t{t}_x{x}"), (r - 1.0).abs(), ratio_tol));
        }
        let ev = evaluator(BernsteinFunction::identity())?;
        let a = TailAsymptotics::new(&ev)?;
        let root = (2.0 * PI).sqrt();
        out.push(Measure::at_most("C_phi_rel_err", (a.c_phi().value / root - 1.0).abs(), c_phi_rel_tol));
        let exact_c = TailAsymptotics::with_constant(
            BernsteinFunction::identity(),
            crate::bgamma::CPhi { value: root, error_estimate: 0.0 },
        )?;
        let mut worst = 0.0f64;
        for t in [0.5, 1.0, 2.0, 3.0] {
            for xi in [5.0, 50.0, 500.0] {
                let c = classical_urbanik_log(t, xi);
                let v = exact_c.log_density(t, xi, 0)?.log_abs;
                worst = worst.max((v - c).abs() / c.abs().max(1.0));
            }
        }
        out.push(Measure::at_most("classical_display", worst, 1e-12));
        Ok(out)
    })
}

/// Criterion 9: f₂ = f₁ * f₁ for the log-densities f_t(y) = e^y ν_t(e^y) of Identity,
/// by trapezoid convolution on a lattice, for y ∈ [-2, 4].
pub fn semigroup_law(abs_tol: f64) -> CriterionReport {
    run(9, "semigroup law", 30, || {
        let ev = evaluator(BernsteinFunction::identity())?;
        let h = 0.05;
        let (lo, hi) = (-400i64, 110i64); // s ∈ [-20, 5.5]
        let xs: Vec<f64> = (lo..=hi).map(|j| (j as f64 * h).exp()).collect();
        let opts = DensityOptions::fixed(abs_tol * 1e-3);
        let g1 = density_grid(&ev, 1.0, 0, &xs, &opts)?;
        if let Some(f) = g1.failures.first() {
            return Err(f.error.clone());
        }
        let f1: Vec<f64> = g1.points.iter().map(|p| p.x * p.value).collect();
        let at = |j: i64| if (lo..=hi).contains(&j) { f1[(j - lo) as usize] } else { 0.0 };
        let ys: Vec<i64> = (-40..=80).step_by(5).collect(); // y = j h ∈ [-2, 4]
        let y_xs: Vec<f64> = ys.iter().map(|&j| (j as f64 * h).exp()).collect();
        let g2 = density_grid(&ev, 2.0, 0, &y_xs, &opts)?;
        if let Some(f) = g2.failures.first() {
            return Err(f.error.clone());
        }
        let mut worst = 0.0f64;
        for (&jy, p) in ys.iter().zip(&g2.points) {
            let conv: f64 = (lo..=hi).map(|j| at(j) * at(jy - j)).sum::<f64>() * h;
            worst = worst.max((conv - p.x * p.value).abs());
        }
        Ok(vec![Measure::at_most("abs_err", worst, abs_tol)])
    })
}

/// Criterion 10: Gaussian + Gaussian gives the N(0,2) pair; dfold(d = 3) of the Identity
/// t = 1 model against asym_density at t = 3.
pub fn composer(exact_tol: f64, ratio_tol: f64) -> CriterionReport {
    run(10, "composer", 10, || {
        let n = AsymptoticModel::standard_normal();
        let mut worst = 0.0f64;
        for y in [-4.0, -1.0, 0.0, 0.5, 3.0, 7.0] {
            let (psi, eta) = gaussian_tail_convolve(&n, &n, y)?;
            worst = worst.max((psi - y * y / 4.0).abs()).max((eta - 1.0 / (4.0 * PI).sqrt()).abs());
        }
        let ev = evaluator(BernsteinFunction::identity())?;
        let a = TailAsymptotics::new(&ev)?;
        let model = a.log_density_model(1.0)?;
        let mut ratio = 0.0f64;
        for y in [6.0, 9.0, 12.0] {
            let lhs = dfold_log(&model, 3, y)?;
            let rhs = y + a.log_density(3.0, y.exp(), 0)?.log_abs;
            ratio = ratio.max(((lhs - rhs).exp() - 1.0).abs());
        }
        Ok(vec![Measure::at_most("gaussian_pair_err", worst, exact_tol), Measure::at_most("dfold_ratio_err", ratio, ratio_tol)])
    })
}

/// Criterion 11: σ₂ through ν₁ against direct inversion of W(2s - 1), Identity.
pub fn power_identity(abs_tol: f64) -> CriterionReport {
    run(11, "power identity", 10, || {
        let ev = evaluator(BernsteinFunction::identity())?;
        let mut worst = 0.0f64;
        for x in [0.5, 1.0, 2.0] {
            let via = power_density(&ev, 2.0, x, &DensityOptions::fixed(abs_tol * 1e-2))?;
            let direct = power_density_direct(&ev, 2.0, x, abs_tol * 1e-2)?;
            worst = worst.max((via.value - direct.value).abs());
        }
        Ok(vec![Measure::at_most("abs_err", worst, abs_tol)])
    })
}

/// Criterion 12: Legendre conjugacy, scale-function self-neglect, flatness, derivative
/// structure, composer consistency and the Log display; s(u) = u must fail.
pub fn flatness_suite(conjugacy_tol: f64) -> CriterionReport {
    run(12, "flatness and self-neglect", 5, || {
        let mut out = Vec::new();
        let unbounded: Vec<BernsteinFunction> =
            catalog_samples().into_iter().filter(|p| !p.is_constant() && p.phi_infinity().is_infinite()).collect();
        let us = quad::geomspace(1e2, 1e8, 7);
        let ws = [-0.5, 0.5, 1.0, 2.0];
        for phi in &unbounded {
            let l = legendre_data(phi)?;
            let mut worst = 0.0f64;
            for y in quad::linspace(1.0, 20.0, 20) {
                // ϕ(e^y) leaves f64 range for logarithmic φ beyond y ≈ 6.5
                if l.conjugate(y).is_err() {
                    continue;
                }
                worst = worst.max(l.conjugacy_defect(y)?);
            }
            out.push(Measure::at_most(format!("conjugacy_{}", phi.label()), worst, conjugacy_tol));
            let r = self_neglecting_check(|u| l.s_g(u), &us, &ws)?;
            out.push(Measure::holds(format!("s_G_self_neglecting_{}", phi.label()), r.pass));
        }
        let linear = self_neglecting_check(Ok, &us, &[1.0])?;
        out.push(Measure::holds("s(u)=u_fails", !linear.pass));
        let id = evaluator(BernsteinFunction::identity())?;
        let a = TailAsymptotics::new(&id)?;
        let model = a.log_density_model(1.0)?;
        let flat = flatness_check(|u: f64| Ok(u * u), &model, &[2.0, 4.0, 8.0, 16.0], &[1.0, 2.0])?;
        out.push(Measure::holds("u^2_flat", flat.pass));
        // derivative structure, exact by construction
        let mut worst = 0.0f64;
        for (t, xi) in [(1.0, 20.0), (2.0, 100.0), (0.5, 3.0)] {
            let base = a.log_density(t, xi, 0)?.log_abs;
            let u = xi.powf(1.0 / t);
            for n in 1..4u32 {
                let d = a.log_density(t, xi, n)?.log_abs;
                worst = worst.max((d - base - n as f64 * (u.ln() - xi.ln())).abs());
            }
        }
        out.push(Measure::at_most("derivative_structure", worst, 1e-12));
        // composer consistency: Identity and (u)^{1/2}
        let ps = evaluator(BernsteinFunction::power_shifted(0.5, 0.0)?)?;
        let b = TailAsymptotics::new(&ps)?;
        let mut ratio = 0.0f64;
        for (asym, ys) in [(&a, [6.0, 9.0, 12.0]), (&b, [8.0, 11.0, 14.0])] {
            let m = asym.log_density_model(1.0)?;
            for y in ys {
                let lhs = dfold_log(&m, 2, y)?;
                let rhs = y + asym.log_density(2.0, y.exp(), 0)?.log_abs;
                ratio = ratio.max(((lhs - rhs).exp() - 1.0).abs());
            }
        }
        out.push(Measure::at_most("composer_consistency", ratio, 0.01));
        let lg = evaluator(BernsteinFunction::log(1.0)?)?;
        let c = TailAsymptotics::new(&lg)?;
        let x = 15.0f64;
        let v = c.log_density(1.0, x, 0)?.log_abs;
        let d = log_family_display_log(c.c_phi().value, 1.0, 1.0, x, oracle::ei);
        out.push(Measure::at_most("log_display", ((v - d).exp() - 1.0).abs(), 0.01));
        Ok(out)
    })
}

/// All twelve criteria with their standard tolerances.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        gamma_conformance(1e-9, 1e-6),
        functional_equation(1e-10),
        exponential_oracle(1e-6),
        bessel_oracle(1e-5, 1e-4),
        gauss_laguerre_oracle(1e-5, 1e-8),
        threshold_table(),
        series_behavior(10_000),
        asymptotic_ratio(0.05, 0.005),
        semigroup_law(1e-4),
        composer(1e-10, 0.01),
        power_identity(2e-5),
        flatness_suite(1e-8),
    ]
}
