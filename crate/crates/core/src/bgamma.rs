//! Bernstein-gamma functions W_φ, their powers, γ_φ, moments and the
//! Stirling-type constant C_φ.
//!
//! log W_φ(z) = -γ_φ z - log φ(z) + Σ_{k≥1} f(k), with
//! f(r) = log φ(r) - log φ(r+z) + z φ'(r)/φ(r).
//! The sum is truncated at K and the remainder is replaced by the exact
//! integral ∫_{K+1/2}^∞ f plus two midpoint Euler-Maclaurin corrections.

use crate::bernstein::{BernsteinFunction, Family};
use crate::error::{Error, Result};
use crate::quad;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::RwLock;

pub const DEFAULT_TOL: f64 = 1e-12;
const K_MIN: usize = 64;
const K_START_MAX: usize = 4096;
const K_CAP: usize = 16384;
const GAMMA_N: usize = 256;

/// γ_φ with the accuracy it was obtained to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPhi {
    pub value: f64,
    pub error_bound: f64,
}

/// log W_φ(z) on the continuous branch that is real on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogW {
    pub value: Complex64,
    /// Change between the last two truncation levels.
    pub error: f64,
    pub truncation: usize,
    pub shift: usize,
    /// Set when the truncation cap was reached before the tolerance.
    pub precision_warning: bool,
}

/// log φ(k) and φ'(k)/φ(k) at k = 1, 2, ...
#[derive(Debug, Default)]
struct RealCache {
    log_phi: Vec<f64>,
    log_der: Vec<f64>,
}

#[derive(Debug)]
pub struct BernsteinGammaEvaluator {
    phi: BernsteinFunction,
    gamma: GammaPhi,
    tol: f64,
    cache: RwLock<RealCache>,
}

fn fill_cache(phi: &BernsteinFunction, cache: &RwLock<RealCache>, upto: usize) -> Result<()> {
    if cache.read().expect("cache lock").log_phi.len() >= upto {
        return Ok(());
    }
    let mut c = cache.write().expect("cache lock");
    let start = c.log_phi.len() + 1;
    for k in start..=upto {
        let u = k as f64;
        let l = phi.eval(u)?.ln();
        let d = phi.log_derivative(u)?;
        c.log_phi.push(l);
        c.log_der.push(d);
    }
    Ok(())
}

/// Snapshot of cached values for k in 1..=upto, indexed from 0.
fn cached(cache: &RwLock<RealCache>, upto: usize) -> (Vec<f64>, Vec<f64>) {
    let c = cache.read().expect("cache lock");
    (c.log_phi[..upto].to_vec(), c.log_der[..upto].to_vec())
}

fn gamma_at(lp: &[f64], ld: &[f64], n: usize) -> (f64, f64, f64) {
    // indices are k-1
    let g = |k: usize| ld[k - 1];
    let s: f64 = ld[..n].iter().sum();
    let gn = g(n);
    let d1 = (8.0 * (g(n + 1) - g(n - 1)) - (g(n + 2) - g(n - 2))) / 12.0;
    let d3 = (g(n + 2) - 2.0 * g(n + 1) + 2.0 * g(n - 1) - g(n - 2)) / 2.0;
    let em = s - lp[n - 1] - 0.5 * gn - d1 / 12.0 + d3 / 720.0;
    (em, s - lp[n], s - lp[n - 1])
}

/// γ_φ = lim Σ_{k≤n} φ'(k)/φ(k) - log φ(n).
///
/// The partial sums are corrected by the Euler-Maclaurin tail at n and 2n;
/// the result is checked against the monotone bracket
/// [Σ - log φ(n+1), Σ - log φ(n)] and the static bracket at n = 1.
pub fn compute_gamma_phi(phi: &BernsteinFunction, tol: f64) -> Result<GammaPhi> {
    let cache = RwLock::new(RealCache::default());
    gamma_with_cache(phi, tol, &cache)
}

fn gamma_with_cache(phi: &BernsteinFunction, tol: f64, cache: &RwLock<RealCache>) -> Result<GammaPhi> {
    if phi.is_constant() {
        return Err(Error::domain("compute_gamma_phi", "φ is constant"));
    }
    if !(tol > 0.0) {
        return Err(Error::parameter("compute_gamma_phi", "tol must be positive"));
    }
    let mut n = GAMMA_N;
    loop {
        fill_cache(phi, cache, 2 * n + 3)?;
        let (lp, ld) = cached(cache, 2 * n + 3);
        let (g1, _, _) = gamma_at(&lp, &ld, n);
        let (g2, lo, hi) = gamma_at(&lp, &ld, 2 * n);
        let err = (g2 - g1).abs();
        let slack = 1e-13 * (1.0 + g2.abs());
        let static_lo = -lp[0];
        let static_hi = ld[0] - lp[0];
        if g2 < lo - slack || g2 > hi + slack || g2 < static_lo - slack || g2 > static_hi + slack {
            return Err(Error::convergence(
                "compute_gamma_phi",
                err,
                format!("accelerated value {g2} left the bracket [{lo}, {hi}]"),
            ));
        }
        if err <= tol.max(4e-15 * (1.0 + g2.abs())) {
            return Ok(GammaPhi { value: g2, error_bound: err });
        }
        if n >= 8192 {
            return Err(Error::convergence("compute_gamma_phi", err, format!("bracket width at n = {}", 2 * n)));
        }
        n *= 2;
    }
}

fn next_pow2(x: f64) -> usize {
    let mut k = 1usize;
    while (k as f64) < x && k < K_CAP {
        k *= 2;
    }
    k
}

impl BernsteinGammaEvaluator {
    pub fn new(phi: BernsteinFunction, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::parameter("evaluator", "tol must lie in (0, 1)"));
        }
        let cache = RwLock::new(RealCache::default());
        let gamma = if let Family::Constant { k } = phi.family() {
            GammaPhi { value: -k.ln(), error_bound: 0.0 }
        } else if phi.is_constant() {
            GammaPhi { value: -phi.eval(1.0)?.ln(), error_bound: 0.0 }
        } else {
            gamma_with_cache(&phi, tol / 100.0, &cache)?
        };
        Ok(BernsteinGammaEvaluator { phi, gamma, tol, cache })
    }

    pub fn with_default_tol(phi: BernsteinFunction) -> Result<Self> {
        Self::new(phi, DEFAULT_TOL)
    }

    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }
    pub fn gamma_phi(&self) -> GammaPhi {
        self.gamma
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn ln_phi(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            Ok(Complex64::new(self.phi.eval(z.re)?.ln(), 0.0))
        } else {
            self.phi.ln_eval_complex(z)
        }
    }

    /// Σ_{k=from}^{to} f(k) term by term.
    fn partial_sum(&self, z: Complex64, lp: &[f64], ld: &[f64], from: usize, to: usize) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for k in from..=to {
            s += lp[k - 1] - self.ln_phi(z + k as f64)? + z * ld[k - 1];
        }
        Ok(s)
    }

    fn f_at(&self, z: Complex64, lp: &[f64], ld: &[f64], k: usize) -> Result<Complex64> {
        Ok(lp[k - 1] - self.ln_phi(z + k as f64)? + z * ld[k - 1])
    }

    /// Σ_{k>K} f(k) ≈ ∫_{K+1/2}^∞ f + f'(K+1/2)/24 - 7f'''(K+1/2)/5760.
    fn tail(&self, z: Complex64, lp: &[f64], ld: &[f64], k: usize) -> Result<Complex64> {
        let r = k as f64 + 0.5;
        let lr = self.phi.eval(r)?.ln();
        let abs_tol = (1e-3 * self.tol / z.norm().max(1.0)).max(1e-16);
        let seg = quad::integrate(
            |s: f64| self.ln_phi(z * s + r).map(|v| v - lr).unwrap_or(Complex64::new(f64::NAN, 0.0)),
            0.0,
            1.0,
            abs_tol,
            1e-15,
        )
        .map_err(|e| match e {
            Error::Convergence { achieved, detail, .. } => Error::Convergence { op: "eval_W", achieved, detail },
            other => other,
        })?;
        let f = |j: usize| self.f_at(z, lp, ld, j);
        let (fm1, f0, f1, f2) = (f(k - 1)?, f(k)?, f(k + 1)?, f(k + 2)?);
        let d1 = (27.0 * (f1 - f0) - (f2 - fm1)) / 24.0;
        let d3 = f2 - 3.0 * f1 + 3.0 * f0 - fm1;
        Ok(z * seg.value + d1 / 24.0 - d3 * (7.0 / 5760.0))
    }

    fn log_w_shifted(&self, z: Complex64) -> Result<(Complex64, f64, usize, bool)> {
        let mut k = next_pow2(z.norm() / 8.0).clamp(K_MIN, K_START_MAX);
        let base = -self.gamma.value * z - self.ln_phi(z)?;
        fill_cache(&self.phi, &self.cache, 2 * k + 3)?;
        let (mut lp, mut ld) = cached(&self.cache, 2 * k + 3);
        let mut sum = self.partial_sum(z, &lp, &ld, 1, k)?;
        let mut prev = base + sum + self.tail(z, &lp, &ld, k)?;
        loop {
            let k2 = 2 * k;
            fill_cache(&self.phi, &self.cache, k2 + 3)?;
            if lp.len() < k2 + 3 {
                (lp, ld) = cached(&self.cache, k2 + 3);
            }
            sum += self.partial_sum(z, &lp, &ld, k + 1, k2)?;
            let cur = base + sum + self.tail(z, &lp, &ld, k2)?;
            let change = (cur - prev).norm();
            if change < (self.tol / 10.0).max(64.0 * f64::EPSILON * (cur.norm() + z.norm())) {
                return Ok((cur, change, k2, false));
            }
            if k2 >= K_CAP {
                return Ok((cur, change, k2, true));
            }
            prev = cur;
            k = k2;
        }
    }

    /// log W_φ(z) for Re z > 0.
    pub fn log_w(&self, z: Complex64) -> Result<LogW> {
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::domain("eval_W", format!("Re z = {} must be > 0", z.re)));
        }
        if self.phi.is_constant() {
            let lk = self.phi.eval(1.0)?.ln();
            return Ok(LogW { value: (z - 1.0) * lk, error: 0.0, truncation: 0, shift: 0, precision_warning: false });
        }
        let shift = if z.re < 1.0 { (2.0 - z.re).ceil() as usize } else { 0 };
        let (mut v, error, truncation, precision_warning) = self.log_w_shifted(z + shift as f64)?;
        for j in 0..shift {
            v -= self.ln_phi(z + j as f64)?;
        }
        if z.im == 0.0 {
            v.im = 0.0;
        }
        Ok(LogW { value: v, error, truncation, shift, precision_warning })
    }

    pub fn eval_w(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_w(z)?.value.exp())
    }

    /// W_φ^t(z) = exp(t log W_φ(z)).
    pub fn eval_w_power(&self, t: f64, z: Complex64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(Error::parameter("eval_W_power", "t must be >= 0"));
        }
        if t == 0.0 {
            if !(z.re > 0.0) {
                return Err(Error::domain("eval_W_power", format!("Re z = {} must be > 0", z.re)));
            }
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok((self.log_w(z)?.value * t).exp())
    }

    /// Ψ(z) = log W_φ(z + 1) for Re z > -1.
    pub fn psi(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re > -1.0) {
            return Err(Error::domain("psi", format!("Re z = {} must be > -1", z.re)));
        }
        Ok(self.log_w(z + 1.0)?.value)
    }

    /// log W_φ on the real axis.
    pub fn log_w_real(&self, x: f64) -> Result<f64> {
        Ok(self.log_w(Complex64::new(x, 0.0))?.value.re)
    }
}

/// (∏_{k≤n} φ(k))^t for n = 0..=N_max, accumulated in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSequence {
    pub t: f64,
    pub log_values: Vec<f64>,
    /// Direct products, so integer moments stay exact while representable.
    direct: Vec<f64>,
}

impl MomentSequence {
    pub fn value(&self, n: usize) -> f64 {
        self.direct[n]
    }
    pub fn values(&self) -> Vec<f64> {
        self.direct.clone()
    }
    pub fn len(&self) -> usize {
        self.log_values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }
}

pub fn moments(phi: &BernsteinFunction, t: f64, n_max: usize) -> Result<MomentSequence> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::parameter("moments", "t must be finite and >= 0"));
    }
    let mut log_values = Vec::with_capacity(n_max + 1);
    let mut direct = Vec::with_capacity(n_max + 1);
    let (mut acc, mut prod) = (0.0, 1.0);
    log_values.push(0.0);
    direct.push(1.0);
    for k in 1..=n_max {
        let f = phi.eval(k as f64)?;
        acc += f.ln();
        prod *= f;
        log_values.push(t * acc);
        let v = if t == 1.0 { prod } else { prod.powf(t) };
        direct.push(if v.is_finite() && v > 0.0 { v } else { (t * acc).exp() });
    }
    Ok(MomentSequence { t, log_values, direct })
}

/// G(n) = ∫_1^n log φ(r) dr.
pub fn g_integral(phi: &BernsteinFunction, n: f64) -> Result<f64> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::domain("g_integral", "n must be >= 1"));
    }
    let q = quad::integrate(|r: f64| phi.eval(r).map(f64::ln).unwrap_or(f64::NAN), 1.0, n, 1e-14, 1e-15)?;
    Ok(q.value)
}

/// ∫_0^1 log φ(r) dr, taken in r = e^{-w} to absorb a logarithmic end point.
pub fn log_phi_unit_integral(phi: &BernsteinFunction) -> Result<f64> {
    let q = quad::integrate_to_inf(
        |w: f64| {
            let r = (-w).exp();
            if r == 0.0 {
                return 0.0;
            }
            phi.eval(r).map(|v| v.ln() * r).unwrap_or(f64::NAN)
        },
        0.0,
        1e-15,
        1e-14,
    )?;
    Ok(q.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CPhi {
    pub value: f64,
    pub error_estimate: f64,
}

fn require_unbounded(phi: &BernsteinFunction, op: &'static str) -> Result<()> {
    if phi.phi_infinity().is_finite() {
        return Err(Error::domain(op, "φ(∞) < ∞: no Stirling regime"));
    }
    Ok(())
}

/// log of √φ(n) e^{∫_0^n log φ}.
fn stirling_log_scale(phi: &BernsteinFunction, n: f64, unit: f64) -> Result<f64> {
    Ok(0.5 * phi.eval(n)?.ln() + unit + g_integral(phi, n)?)
}

/// C_φ = lim W_φ(n+1) / (√φ(n) e^{∫_0^n log φ}), from n = 20, 40, 80 with
/// two rounds of Richardson extrapolation.
pub fn calibrate_c_phi(ev: &BernsteinGammaEvaluator) -> Result<CPhi> {
    let phi = ev.phi();
    require_unbounded(phi, "calibrate_C_phi")?;
    let unit = log_phi_unit_integral(phi)?;
    let ratio = |n: f64| -> Result<f64> { Ok((ev.log_w_real(n + 1.0)? - stirling_log_scale(phi, n, unit)?).exp()) };
    let (c20, c40, c80) = (ratio(20.0)?, ratio(40.0)?, ratio(80.0)?);
    let r1 = 2.0 * c40 - c20;
    let r2 = 2.0 * c80 - c40;
    let rr = (4.0 * r2 - r1) / 3.0;
    Ok(CPhi { value: rr, error_estimate: (rr - r2).abs() })
}

/// C_φ √φ(n) e^{∫_0^n log φ}, the leading-order approximation of W_φ(n+1).
pub fn stirling_asymptotic(ev: &BernsteinGammaEvaluator, c: &CPhi, n: f64) -> Result<f64> {
    let phi = ev.phi();
    require_unbounded(phi, "stirling_asymptotic")?;
    if !(n >= 1.0) {
        return Err(Error::domain("stirling_asymptotic", "n must be >= 1"));
    }
    let unit = log_phi_unit_integral(phi)?;
    Ok((c.value.ln() + stirling_log_scale(phi, n, unit)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::catalog_samples;
    use crate::oracle;
    use crate::special::EULER_GAMMA;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity() -> BernsteinGammaEvaluator {
        BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::identity()).unwrap()
    }

    #[test]
    fn euler_mascheroni() {
        let g = compute_gamma_phi(&BernsteinFunction::identity(), 1e-14).unwrap();
        assert!((g.value - EULER_GAMMA).abs() < 1e-14, "{}", g.value - EULER_GAMMA);
        assert!(g.error_bound < 1e-14);
    }

    #[test]
    fn gamma_phi_brackets() {
        let p = BernsteinFunction::power_shifted(0.5, 1.0).unwrap();
        let g = compute_gamma_phi(&p, 1e-12).unwrap().value;
        let l = 2f64.sqrt().ln();
        assert!(g >= -l && g <= 0.25 - l);
        let lg = BernsteinFunction::log(1.0).unwrap();
        let g = compute_gamma_phi(&lg, 1e-12).unwrap().value;
        let l2 = 2f64.ln();
        assert!(g >= -l2.ln() && g <= 1.0 / (2.0 * l2) - l2.ln());
        assert!(compute_gamma_phi(&BernsteinFunction::constant(2.0).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn w_examples() {
        let ev = identity();
        assert!((ev.eval_w(c(4.0, 0.0)).unwrap().re - 6.0).abs() < 1e-11);
        assert!((ev.eval_w(c(0.5, 0.0)).unwrap().re - PI.sqrt()).abs() < 1e-11);
        assert!((ev.eval_w(c(1.0, 0.0)).unwrap().re - 1.0).abs() < 1e-12);
        let gl = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::gauss_laguerre(0.5, 1.0).unwrap()).unwrap();
        assert!((gl.eval_w(c(3.0, 0.0)).unwrap().re - 1.5).abs() < 1e-10);
        assert!(ev.eval_w(c(0.0, 1.0)).is_err());
    }

    #[test]
    fn power_examples() {
        let ev = identity();
        assert!((ev.eval_w_power(2.0, c(4.0, 0.0)).unwrap().re - 36.0).abs() < 1e-9);
        assert_eq!(ev.eval_w_power(0.0, c(3.0, 7.0)).unwrap(), c(1.0, 0.0));
        assert!((ev.eval_w_power(0.5, c(0.5, 0.0)).unwrap().re - 1.331_335_3).abs() < 1e-7);
    }

    #[test]
    fn gamma_conformance_on_complex_grid() {
        let ev = identity();
        for a in [0.1, 0.5, 1.0, 3.3, 10.0] {
            for b in [-20.0, -7.5, -1.0, 0.0, 0.3, 4.0, 20.0] {
                let z = c(a, b);
                let w = ev.eval_w(z).unwrap();
                let g = oracle::gamma(z);
                assert!((w - g).norm() <= 1e-9 * g.norm(), "{z}: {w} vs {g}");
            }
        }
    }

    #[test]
    fn functional_equation_catalog() {
        for phi in catalog_samples() {
            let ev = BernsteinGammaEvaluator::with_default_tol(phi.clone()).unwrap();
            for a in [0.25, 0.5, 1.0, 2.0] {
                for b in [-50.0, -13.0, -1.0, 0.0, 2.5, 31.0, 50.0] {
                    let z = c(a, b);
                    let w1 = ev.eval_w(z + 1.0).unwrap();
                    let rhs = phi.eval_complex(z).unwrap() * ev.eval_w(z).unwrap();
                    assert!((w1 - rhs).norm() <= 1e-10 * w1.norm(), "{} z={z}", phi.label());
                    assert!(w1.norm() <= ev.eval_w(c(a + 1.0, 0.0)).unwrap().re * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn integer_consistency_and_moments() {
        for phi in catalog_samples() {
            let ev = BernsteinGammaEvaluator::with_default_tol(phi.clone()).unwrap();
            let m = moments(&phi, 1.0, 30).unwrap();
            for n in [0usize, 1, 5, 17, 30] {
                let w = ev.log_w_real(n as f64 + 1.0).unwrap();
                assert!((w - m.log_values[n]).abs() < 1e-10, "{} n={n}", phi.label());
            }
        }
        let m = moments(&BernsteinFunction::identity(), 1.0, 5).unwrap();
        let v = m.values();
        for (a, b) in v.iter().zip([1.0, 1.0, 2.0, 6.0, 24.0, 120.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert!((moments(&BernsteinFunction::identity(), 2.0, 3).unwrap().value(3) - 36.0).abs() < 1e-12);
        assert!((moments(&BernsteinFunction::bounded_ratio(), 1.0, 4).unwrap().value(4) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let ev = identity();
        assert!((ev.psi(c(3.0, 0.0)).unwrap().re - 6f64.ln()).abs() < 1e-12);
        assert!(ev.psi(c(0.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(ev.psi(c(1.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(ev.psi(c(-1.5, 0.0)).is_err());
    }

    #[test]
    fn branch_is_continuous_along_vertical_lines() {
        let ev = identity();
        let mut prev = ev.log_w(c(0.5, 0.0)).unwrap().value;
        for i in 1..=400 {
            let cur = ev.log_w(c(0.5, i as f64 * 0.25)).unwrap().value;
            assert!((cur.im - prev.im).abs() < 2.0, "jump at b = {}", i as f64 * 0.25);
            prev = cur;
        }
        // |arg Γ(0.5 + 100i)| is far beyond π
        assert!(prev.im.abs() > 100.0);
    }

    #[test]
    fn c_phi_identity_and_g_integral() {
        let ev = identity();
        let cp = calibrate_c_phi(&ev).unwrap();
        assert!((cp.value - (2.0 * PI).sqrt()).abs() < 1e-4, "{cp:?}");
        let g = g_integral(ev.phi(), 10.0).unwrap();
        assert!((g - (10.0 * 10f64.ln() - 9.0)).abs() < 1e-12);
        let b = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::bounded_ratio()).unwrap();
        assert!(matches!(calibrate_c_phi(&b), Err(Error::Domain { .. })));
    }

    #[test]
    fn c_phi_power_shifted_against_direct_ratio() {
        let phi = BernsteinFunction::power_shifted(0.5, 1.0).unwrap();
        let ev = BernsteinGammaEvaluator::with_default_tol(phi.clone()).unwrap();
        let cp = calibrate_c_phi(&ev).unwrap();
        let unit = log_phi_unit_integral(&phi).unwrap();
        let m = moments(&phi, 1.0, 80).unwrap();
        let direct = (m.log_values[80] - stirling_log_scale(&phi, 80.0, unit).unwrap()).exp();
        assert!((cp.value / direct - 1.0).abs() < 1e-2, "{cp:?} {direct}");
        assert!(cp.error_estimate < 1e-4);
        let s = stirling_asymptotic(&ev, &cp, 80.0).unwrap();
        assert!((s / m.value(80) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn unit_integral_of_identity_log() {
        let v = log_phi_unit_integral(&BernsteinFunction::identity()).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }
}
