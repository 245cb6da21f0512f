//! Large-argument behaviour of ν_t and the Gaussian-tail machinery behind it.
//!
//! With ϕ the inverse of φ and x = ξ^{1/t},
//! ν_t(ξ) ~ C_φ^t/√(2πt) · √(ξ^{(1-t)/t} ϕ'(x)) · exp(-t ∫_k^x ϕ(r)/r dr).
//! The exponent integral is always taken in the form ∫_0^{ϕ(x)} uφ'(u)/φ(u) du.

use crate::bernstein::{BernsteinFunction, RegularVariation};
use crate::bgamma::{calibrate_c_phi, BernsteinGammaEvaluator, CPhi};
use crate::error::{Error, Result};
use crate::quad;
use crate::special::EULER_GAMMA;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

const QUAD_REL: f64 = 1e-13;
const QUAD_ABS: f64 = 1e-14;
/// Deviations at or below this count as exactly zero in the monotone-decrease rule.
const ZERO_DEVIATION: f64 = 1e-12;

/// ∫_0^U f(u) du split at 1, the upper piece in the variable u = e^w.
fn head_and_log_tail<F: Fn(f64) -> Result<f64>>(f: F, upper: f64, op: &'static str) -> Result<f64> {
    if !(upper >= 0.0) || !upper.is_finite() {
        return Err(Error::domain(op, format!("upper limit {upper} must be finite and >= 0")));
    }
    let mut failure = None;
    let mut guard = |u: f64| match f(u) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let head = quad::integrate(&mut guard, 0.0, upper.min(1.0), QUAD_ABS, QUAD_REL)?.value;
    let tail = if upper > 1.0 {
        quad::integrate(
            |w: f64| {
                let u = w.exp();
                guard(u) * u
            },
            0.0,
            upper.ln(),
            QUAD_ABS,
            QUAD_REL,
        )?
        .value
    } else {
        0.0
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(head + tail),
    }
}

/// ∫_a^b f over a possibly reversed interval with both limits positive,
/// taken in the logarithmic variable.
fn log_variable_integral<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64) -> Result<f64> {
    let mut failure = None;
    let v = quad::integrate(
        |w: f64| {
            let u = w.exp();
            match f(u) {
                Ok(v) => v * u,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        a.ln(),
        b.ln(),
        QUAD_ABS,
        QUAD_REL,
    )?
    .value;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// ∫_0^U uφ'(u)/φ(u) du = ∫_k^{φ(U)} ϕ(r)/r dr.
pub fn exponent_integral(phi: &BernsteinFunction, upper: f64) -> Result<f64> {
    head_and_log_tail(|u| Ok(u * phi.log_derivative(u)?), upper, "exponent_integral")
}

fn require_unbounded(phi: &BernsteinFunction, op: &'static str) -> Result<()> {
    if phi.is_constant() || phi.phi_infinity().is_finite() {
        return Err(Error::inapplicable(op, "φ(∞) < ∞"));
    }
    Ok(())
}

/// A value carried as sign · e^{log_abs}, since tail densities underflow quickly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }
}

/// Tail asymptotics of the semigroup generated by one Bernstein function, with
/// C_φ calibrated once on construction.
#[derive(Debug, Clone)]
pub struct TailAsymptotics {
    phi: BernsteinFunction,
    c_phi: CPhi,
}

impl TailAsymptotics {
    pub fn new(ev: &BernsteinGammaEvaluator) -> Result<Self> {
        let phi = ev.phi();
        require_unbounded(phi, "asym_density")?;
        if !phi.flags().power_jurek {
            return Err(Error::inapplicable("asym_density", "power_jurek flag not set"));
        }
        let c_phi = calibrate_c_phi(ev)?;
        Ok(TailAsymptotics { phi: phi.clone(), c_phi })
    }

    /// Skips calibration; used when C_φ is known in closed form.
    pub fn with_constant(phi: BernsteinFunction, c_phi: CPhi) -> Result<Self> {
        require_unbounded(&phi, "asym_density")?;
        if !phi.flags().power_jurek {
            return Err(Error::inapplicable("asym_density", "power_jurek flag not set"));
        }
        Ok(TailAsymptotics { phi, c_phi })
    }

    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }

    pub fn c_phi(&self) -> CPhi {
        self.c_phi
    }

    fn tail_point(&self, t: f64, xi: f64, op: &'static str) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::parameter(op, "t must be positive"));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain(op, "ξ must be positive"));
        }
        let x = xi.powf(1.0 / t);
        let floor = self.phi.eval(1.0)?.max(self.phi.killing());
        if !(x > floor) {
            return Err(Error::domain(
                op,
                format!("x = ξ^(1/t) = {x} must exceed max(φ(1), k) = {floor}"),
            ));
        }
        Ok(x)
    }

    fn prefactor_log(&self, t: f64) -> f64 {
        t * self.c_phi.value.ln() - 0.5 * (2.0 * PI * t).ln()
    }

    /// log|ν_t^{(n)}(ξ)| asymptotic, with its sign.
    pub fn log_density(&self, t: f64, xi: f64, n: u32) -> Result<SignedLog> {
        let x = self.tail_point(t, xi, "asym_density")?;
        let u = self.phi.inverse(x)?;
        let dphi = self.phi.derivative(u)?;
        let expo = exponent_integral(&self.phi, u)?;
        let nf = n as f64;
        let log_abs = nf * (u.ln() - xi.ln())
            + self.prefactor_log(t)
            + 0.5 * ((1.0 - t) / t * xi.ln() - dphi.ln())
            - t * expo;
        Ok(SignedLog { sign: parity(n), log_abs })
    }

    pub fn density(&self, t: f64, xi: f64, n: u32) -> Result<f64> {
        Ok(self.log_density(t, xi, n)?.value())
    }

    /// Specialization for φ with drift d > 0, written through E(u) = u - k - dϕ(u).
    pub fn log_density_drift(&self, t: f64, xi: f64, n: u32) -> Result<SignedLog> {
        let d = self.phi.drift();
        if !(self.phi.flags().has_drift && d > 0.0) {
            return Err(Error::inapplicable("asym_density_drift", "φ has no drift"));
        }
        let x = self.tail_point(t, xi, "asym_density_drift")?;
        let k = self.phi.killing();
        let u = self.phi.inverse(x)?;
        let correction = self.drift_correction(u)?;
        let nf = n as f64;
        let lead = if k > 0.0 { t * k / d * (1.0 - k.ln()) } else { 0.0 };
        let log_abs = nf * ((1.0 - t) * x.ln() - d.ln())
            + self.prefactor_log(t)
            - 0.5 * d.ln()
            + lead
            + 0.5 * (1.0 - t) * x.ln()
            + t * k / d * x.ln()
            - t * x / d
            + t / d * correction;
        Ok(SignedLog { sign: parity(n), log_abs })
    }

    pub fn density_drift(&self, t: f64, xi: f64, n: u32) -> Result<f64> {
        Ok(self.log_density_drift(t, xi, n)?.value())
    }

    /// ∫_k^{φ(U)} E(r)/r dr via r = φ(u).
    pub fn drift_correction(&self, upper: f64) -> Result<f64> {
        let (k, d) = (self.phi.killing(), self.phi.drift());
        head_and_log_tail(
            |u| {
                let p = self.phi.eval(u)?;
                Ok((p - k - d * u) * self.phi.derivative(u)? / p)
            },
            upper,
            "asym_density_drift",
        )
    }

    /// Specialization for declared φ(u) ~ C_α u^α, through H(u) = C_α^{-1/α}u^{1/α} - ϕ(u).
    pub fn log_density_regvar(&self, t: f64, xi: f64, n: u32) -> Result<SignedLog> {
        let RegularVariation { alpha, constant } = self
            .phi
            .regular_variation()
            .ok_or_else(|| Error::inapplicable("asym_density_regvar", "no regular-variation declaration"))?;
        let x = self.tail_point(t, xi, "asym_density_regvar")?;
        let k = self.phi.killing();
        let u = self.phi.inverse(x)?;
        let scale = constant.powf(-1.0 / alpha);
        let correction = self.regvar_correction(u)?;
        let nf = n as f64;
        let log_abs = nf * (-constant.ln() / alpha + (1.0 - alpha * t) / alpha * x.ln())
            + self.prefactor_log(t)
            + 0.5 * ((1.0 - t) * x.ln() + (scale / alpha).ln() + (1.0 / alpha - 1.0) * x.ln())
            - t * alpha * scale * (x.powf(1.0 / alpha) - k.powf(1.0 / alpha))
            + t * correction;
        Ok(SignedLog { sign: parity(n), log_abs })
    }

    pub fn density_regvar(&self, t: f64, xi: f64, n: u32) -> Result<f64> {
        Ok(self.log_density_regvar(t, xi, n)?.value())
    }

    /// ∫_k^{φ(U)} H(r)/r dr via r = φ(u).
    pub fn regvar_correction(&self, upper: f64) -> Result<f64> {
        let rv = self
            .phi
            .regular_variation()
            .ok_or_else(|| Error::inapplicable("asym_density_regvar", "no regular-variation declaration"))?;
        let scale = rv.constant.powf(-1.0 / rv.alpha);
        head_and_log_tail(
            |u| {
                let p = self.phi.eval(u)?;
                Ok((scale * p.powf(1.0 / rv.alpha) - u) * self.phi.log_derivative(u)?)
            },
            upper,
            "asym_density_regvar",
        )
    }

    /// Model of the log-density y ↦ e^y ν_t(e^y) in Gaussian-tail form.
    pub fn log_density_model(&self, t: f64) -> Result<AsymptoticModel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::parameter("log_density_model", "t must be positive"));
        }
        let log_pre = self.prefactor_log(t);
        let (p1, p2, p3, p4, p5) = (
            self.phi.clone(),
            self.phi.clone(),
            self.phi.clone(),
            self.phi.clone(),
            self.phi.clone(),
        );
        Ok(AsymptoticModel::new(
            format!("log-density {} t={t}", self.phi.label()),
            move |y| {
                let x = (y / t).exp();
                let u = p1.inverse(x)?;
                Ok((log_pre + 0.5 * y + 0.5 * (x / p1.derivative(u)?).ln()).exp())
            },
            move |y| Ok(t * exponent_integral(&p2, p2.inverse((y / t).exp())?)?),
            move |y| p3.inverse((y / t).exp()),
            move |y| {
                let x = (y / t).exp();
                Ok(x / (t * p4.derivative(p4.inverse(x)?)?))
            },
        )
        .with_psi_prime_inverse(move |u| Ok(t * p5.eval(u)?.ln())))
    }
}

fn parity(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// ν_t^{(n)}(ξ) asymptotic, calibrating C_φ on the way.
pub fn asym_density(ev: &BernsteinGammaEvaluator, t: f64, xi: f64, n: u32) -> Result<f64> {
    TailAsymptotics::new(ev)?.density(t, xi, n)
}

/// log of (2π)^{(t-1)/2} t^{-1/2} ξ^{(1-t)/(2t)} e^{-tξ^{1/t}}, the classical Urbanik tail.
pub fn classical_urbanik_log(t: f64, xi: f64) -> f64 {
    0.5 * (t - 1.0) * (2.0 * PI).ln() - 0.5 * t.ln() + (1.0 - t) / (2.0 * t) * xi.ln() - t * xi.powf(1.0 / t)
}

/// log of the closed-form tail of ν_t(x^t) for φ(u) = log(1 + u/λ), with `ei` supplied by the caller:
/// C_φ^t/√(2πt) · √λ e^{tλγ} · x^{(1-t+2tλ)/2} · exp(-λt Ei(x) + x/2).
pub fn log_family_display_log(c_phi: f64, lambda: f64, t: f64, x: f64, ei: impl Fn(f64) -> f64) -> f64 {
    t * c_phi.ln() - 0.5 * (2.0 * PI * t).ln() + 0.5 * lambda.ln() + t * lambda * EULER_GAMMA
        + 0.5 * (1.0 - t + 2.0 * t * lambda) * x.ln()
        - lambda * t * ei(x)
        + 0.5 * x
}

/// G, its Legendre transform and scale function for one Bernstein function.
#[derive(Debug, Clone)]
pub struct LegendreData {
    phi: BernsteinFunction,
    log_phi_one: f64,
}

pub fn legendre_data(phi: &BernsteinFunction) -> Result<LegendreData> {
    if phi.is_constant() || phi.phi_infinity().is_finite() {
        return Err(Error::domain("legendre_data", "φ must be unbounded and non-constant"));
    }
    Ok(LegendreData { phi: phi.clone(), log_phi_one: phi.eval(1.0)?.ln() })
}

impl LegendreData {
    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }

    /// G(u) = ∫_1^u log φ(r) dr + log φ(1).
    pub fn g(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::domain("legendre_data", "G needs u > 0"));
        }
        let f = |r: f64| Ok(self.phi.eval(r)?.ln());
        let body = if u >= 1.0 {
            log_variable_integral(f, 1.0, u)?
        } else {
            let mut failure = None;
            let v = quad::integrate(
                |r: f64| match f(r) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                1.0,
                u,
                QUAD_ABS,
                QUAD_REL,
            )?
            .value;
            if let Some(e) = failure {
                return Err(e);
            }
            v
        };
        Ok(body + self.log_phi_one)
    }

    /// G'' = φ'/φ.
    pub fn g_second(&self, u: f64) -> Result<f64> {
        self.phi.log_derivative(u)
    }

    /// L_G(y) = ∫_1^{ϕ(e^y)} uφ'(u)/φ(u) du.
    pub fn l_g(&self, y: f64) -> Result<f64> {
        let top = self.conjugate(y)?;
        if !(top > 0.0) {
            return Err(Error::domain("legendre_data", "ϕ(e^y) must be positive"));
        }
        log_variable_integral(|u| Ok(u * self.phi.log_derivative(u)?), 1.0, top)
    }

    /// ϕ(e^y), the maximizer in sup_u {uy - G(u)}.
    pub fn conjugate(&self, y: f64) -> Result<f64> {
        let e = y.exp();
        if !e.is_finite() {
            return Err(Error::domain("legendre_data", "e^y overflows"));
        }
        let u = self.phi.inverse(e)?;
        if !u.is_finite() {
            return Err(Error::domain("legendre_data", format!("ϕ(e^{y}) overflows")));
        }
        Ok(u)
    }

    /// s_G(u) = √(φ(u)/φ'(u)).
    pub fn s_g(&self, u: f64) -> Result<f64> {
        Ok((1.0 / self.phi.log_derivative(u)?).sqrt())
    }

    /// |L_G(y) + G(ϕ(e^y)) - yϕ(e^y)| relative to yϕ(e^y).
    pub fn conjugacy_defect(&self, y: f64) -> Result<f64> {
        let u = self.conjugate(y)?;
        let lhs = self.l_g(y)? + self.g(u)?;
        let rhs = y * u;
        Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
    }
}

pub type Callable = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A density of the form η e^{-ψ} with ψ asymptotically parabolic and η flat.
#[derive(Clone)]
pub struct AsymptoticModel {
    label: String,
    eta: Callable,
    psi: Callable,
    psi_prime: Callable,
    psi_second: Callable,
    psi_prime_inverse: Option<Callable>,
}

impl fmt::Debug for AsymptoticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticModel").field("label", &self.label).finish_non_exhaustive()
    }
}

impl AsymptoticModel {
    pub fn new(
        label: impl Into<String>,
        eta: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        psi: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        psi_prime: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        psi_second: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        AsymptoticModel {
            label: label.into(),
            eta: Arc::new(eta),
            psi: Arc::new(psi),
            psi_prime: Arc::new(psi_prime),
            psi_second: Arc::new(psi_second),
            psi_prime_inverse: None,
        }
    }

    /// Supplies (ψ')^{-1} in closed form so the composer can skip the inner root solve.
    pub fn with_psi_prime_inverse(mut self, inv: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.psi_prime_inverse = Some(Arc::new(inv));
        self
    }

    /// ψ(y) = y²/2, η = 1/√(2π).
    pub fn standard_normal() -> Self {
        Self::gaussian(1.0)
    }

    /// Centred normal with variance σ².
    pub fn gaussian(variance: f64) -> Self {
        let eta = 1.0 / (2.0 * PI * variance).sqrt();
        AsymptoticModel::new(
            format!("N(0,{variance})"),
            move |_| Ok(eta),
            move |y| Ok(0.5 * y * y / variance),
            move |y| Ok(y / variance),
            move |_| Ok(1.0 / variance),
        )
        .with_psi_prime_inverse(move |u| Ok(u * variance))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn eta(&self, y: f64) -> Result<f64> {
        (self.eta)(y)
    }
    pub fn psi(&self, y: f64) -> Result<f64> {
        (self.psi)(y)
    }
    pub fn psi_prime(&self, y: f64) -> Result<f64> {
        (self.psi_prime)(y)
    }
    pub fn psi_second(&self, y: f64) -> Result<f64> {
        (self.psi_second)(y)
    }
    /// s_ψ = 1/√ψ''.
    pub fn s_psi(&self, y: f64) -> Result<f64> {
        Ok(1.0 / self.psi_second(y)?.sqrt())
    }
    /// log(η e^{-ψ}).
    pub fn log_density(&self, y: f64) -> Result<f64> {
        Ok(self.eta(y)?.ln() - self.psi(y)?)
    }

    /// Solves ψ'(q) = u.
    fn conjugate_point(&self, u: f64, guess: f64) -> Result<f64> {
        if let Some(inv) = &self.psi_prime_inverse {
            return inv(u);
        }
        let g = |q: f64| -> Result<f64> { Ok(self.psi_prime(q)? - u) };
        let mut step = guess.abs().max(1.0);
        let (mut lo, mut hi) = (guess, guess);
        for _ in 0..200 {
            if g(lo)? <= 0.0 && g(hi)? >= 0.0 {
                return bisect_result(g, lo, hi);
            }
            if g(lo)? > 0.0 {
                lo -= step;
            }
            if g(hi)? < 0.0 {
                hi += step;
            }
            step *= 2.0;
        }
        Err(Error::domain(
            "gaussian_tail_convolve",
            format!("could not bracket ψ'(q) = {u} in {} over q ∈ [{lo}, {hi}]", self.label),
        ))
    }
}

fn bisect_result<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let mut failure = None;
    let r = quad::bisect(
        |q| match f(q) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        0.0,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Conjugate points (q₁, q₂, u) with ψ₁'(q₁) = ψ₂'(q₂) = u and q₁ + q₂ = y.
pub fn conjugate_split(m1: &AsymptoticModel, m2: &AsymptoticModel, y: f64) -> Result<(f64, f64, f64)> {
    let half = 0.5 * y;
    let (a, b) = (m1.psi_prime(half)?, m2.psi_prime(half)?);
    let (u_lo, u_hi) = (a.min(b), a.max(b));
    let sum = |u: f64| -> Result<f64> { Ok(m1.conjugate_point(u, half)? + m2.conjugate_point(u, half)? - y) };
    let u = if u_lo == u_hi {
        u_lo
    } else {
        let (f_lo, f_hi) = (sum(u_lo)?, sum(u_hi)?);
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(Error::domain(
                "gaussian_tail_convolve",
                format!("conjugate solve does not bracket on u ∈ [{u_lo}, {u_hi}]"),
            ));
        }
        bisect_result(sum, u_lo, u_hi)?
    };
    let q1 = m1.conjugate_point(u, half)?;
    Ok((q1, y - q1, u))
}

/// (ψ₀(y), η₀(y)) for the convolution of two Gaussian-tail densities.
pub fn gaussian_tail_convolve(m1: &AsymptoticModel, m2: &AsymptoticModel, y: f64) -> Result<(f64, f64)> {
    let (q1, q2, _) = conjugate_split(m1, m2, y)?;
    let psi0 = m1.psi(q1)? + m2.psi(q2)?;
    let (s1, s2) = (m1.s_psi(q1)?, m2.s_psi(q2)?);
    let eta0 = (2.0 * PI).sqrt() * s1 * m1.eta(q1)? * s2 * m2.eta(q2)? / (s1 * s1 + s2 * s2).sqrt();
    Ok((psi0, eta0))
}

/// log of the d-fold convolution power: (1/√d)(2π/ψ''(y/d))^{(d-1)/2} f(y/d)^d.
pub fn dfold_log(model: &AsymptoticModel, d: u32, y: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::parameter("dfold", "d must be a positive integer"));
    }
    let df = d as f64;
    let q = y / df;
    let curv = model.psi_second(q)?;
    if !(curv > 0.0) {
        return Err(Error::domain("dfold", format!("ψ''({q}) = {curv} is not positive")));
    }
    Ok(-0.5 * df.ln() + 0.5 * (df - 1.0) * (2.0 * PI / curv).ln() + df * model.log_density(q)?)
}

pub fn dfold(model: &AsymptoticModel, d: u32, y: f64) -> Result<f64> {
    Ok(dfold_log(model, d, y)?.exp())
}

/// Outcome of a self-neglect or flatness check; `deviations[i][j]` belongs to
/// `w_list[i]` and `u_list[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeglectReport {
    pub max_deviation: f64,
    pub pass: bool,
    pub deviations: Vec<Vec<f64>>,
}

fn monotone_report(deviations: Vec<Vec<f64>>) -> NeglectReport {
    let max_deviation = deviations.iter().flatten().fold(0.0f64, |m, &d| m.max(d));
    let pass = deviations
        .iter()
        .all(|row| row.windows(2).all(|p| p[1] <= ZERO_DEVIATION || p[1] < p[0]));
    NeglectReport { max_deviation, pass, deviations }
}

fn sorted(u_list: &[f64]) -> Vec<f64> {
    let mut us = u_list.to_vec();
    us.sort_by(f64::total_cmp);
    us
}

/// |s(u + w s(u))/s(u) - 1| on a grid; passes when it decreases along u for every w.
pub fn self_neglecting_check<S: Fn(f64) -> Result<f64>>(s: S, u_list: &[f64], w_list: &[f64]) -> Result<NeglectReport> {
    let us = sorted(u_list);
    let mut rows = Vec::with_capacity(w_list.len());
    for &w in w_list {
        let mut row = Vec::with_capacity(us.len());
        for &u in &us {
            let su = s(u)?;
            if !(su > 0.0) {
                return Err(Error::domain("self_neglecting_check", format!("s({u}) = {su} is not positive")));
            }
            let shifted = s(u + w * su)?;
            if !(shifted > 0.0) {
                return Err(Error::domain(
                    "self_neglecting_check",
                    format!("s({}) = {shifted} is not positive", u + w * su),
                ));
            }
            row.push((shifted / su - 1.0).abs());
        }
        rows.push(row);
    }
    Ok(monotone_report(rows))
}

/// |h(u + w s_ψ(u))/h(u) - 1| on a grid, with the same pass rule.
pub fn flatness_check<H: Fn(f64) -> Result<f64>>(
    h: H,
    model: &AsymptoticModel,
    u_list: &[f64],
    w_list: &[f64],
) -> Result<NeglectReport> {
    let us = sorted(u_list);
    let mut rows = Vec::with_capacity(w_list.len());
    for &w in w_list {
        let mut row = Vec::with_capacity(us.len());
        for &u in &us {
            let hu = h(u)?;
            if !(hu > 0.0) {
                return Err(Error::domain("flatness_check", format!("h({u}) = {hu} is not positive")));
            }
            let v = u + w * model.s_psi(u)?;
            let hv = h(v)?;
            if !(hv > 0.0) {
                return Err(Error::domain("flatness_check", format!("h({v}) = {hv} is not positive")));
            }
            row.push((hv / hu - 1.0).abs());
        }
        rows.push(row);
    }
    Ok(monotone_report(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::gauss_laguerre_log_density;
    use crate::oracle;

    fn sqrt_2pi() -> CPhi {
        CPhi { value: (2.0 * PI).sqrt(), error_estimate: 0.0 }
    }

    fn identity_exact() -> TailAsymptotics {
        TailAsymptotics::with_constant(BernsteinFunction::identity(), sqrt_2pi()).unwrap()
    }

    #[test]
    fn identity_t1_is_the_exponential() {
        let a = identity_exact();
        let v = a.density(1.0, 10.0, 0).unwrap();
        assert!((v / 4.539_992_976_248_485e-5 - 1.0).abs() < 1e-12, "{v}");
        let d1 = a.density(1.0, 10.0, 1).unwrap();
        assert!((d1 / -4.539_992_976_248_485e-5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_t2_matches_bessel_tail() {
        let a = identity_exact();
        let xi = 25.0;
        let v = a.density(2.0, xi, 0).unwrap();
        let display = PI.sqrt() * xi.powf(-0.25) * (-10.0f64).exp();
        assert!((v / display - 1.0).abs() < 1e-12);
        let exact = 2.0 * oracle::bessel_k0(2.0 * xi.sqrt());
        assert!((v / exact - 1.0).abs() < 0.02, "{}", v / exact);
    }

    #[test]
    fn classical_display_is_algebraic() {
        let a = identity_exact();
        for &t in &[0.5, 1.0, 2.0, 3.5] {
            for &xi in &[5.0, 40.0, 300.0] {
                let v = a.log_density(t, xi, 0).unwrap().log_abs;
                let c = classical_urbanik_log(t, xi);
                assert!((v - c).abs() < 1e-12 * c.abs().max(1.0), "{t} {xi}");
            }
        }
    }

    #[test]
    fn derivative_structure_is_exact() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::power_shifted(0.5, 1.0).unwrap()).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        let (t, xi) = (1.5, 40.0);
        let base = a.log_density(t, xi, 0).unwrap();
        let u = a.phi().inverse(xi.powf(1.0 / t)).unwrap();
        for n in 1..4u32 {
            let d = a.log_density(t, xi, n).unwrap();
            let expected = n as f64 * (u.ln() - xi.ln());
            assert!((d.log_abs - base.log_abs - expected).abs() < 1e-12);
            assert_eq!(d.sign, if n.is_multiple_of(2) { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn drift_specialization() {
        let a = identity_exact();
        for &n in &[0u32, 2] {
            let g = a.density(1.0, 12.0, n).unwrap();
            let d = a.density_drift(1.0, 12.0, n).unwrap();
            assert!((g / d - 1.0).abs() < 1e-12);
        }
        let shifted = BernsteinFunction::from_triplet(crate::bernstein::LevyTriplet::new(1.0, 1.0, vec![]).unwrap()).unwrap();
        let ev = BernsteinGammaEvaluator::with_default_tol(shifted).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        assert!(a.drift_correction(80.0).unwrap().abs() < 1e-10);
        let xi = 60.0;
        let r = a.density(1.0, xi, 0).unwrap() / a.density_drift(1.0, xi, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "{r}");
        let r1 = a.density(1.0, xi, 1).unwrap() / a.density_drift(1.0, xi, 1).unwrap();
        assert!((r1 - 1.0).abs() < 0.02, "{r1}");
        let no_drift = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::log(1.0).unwrap()).unwrap();
        let e = TailAsymptotics::new(&no_drift).unwrap().density_drift(1.0, 50.0, 0).unwrap_err();
        assert!(matches!(e, Error::Inapplicable { .. }));
    }

    #[test]
    fn regvar_specialization() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::power_shifted(0.5, 0.0).unwrap()).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        for &(t, xi, n) in &[(1.0, 30.0, 0u32), (2.0, 200.0, 1), (0.7, 9.0, 2)] {
            let g = a.log_density(t, xi, n).unwrap();
            let r = a.log_density_regvar(t, xi, n).unwrap();
            assert!((g.log_abs - r.log_abs).abs() < 1e-9, "{t} {xi} {n}");
            assert_eq!(g.sign, r.sign);
        }
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::power_shifted(0.5, 1.0).unwrap()).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        // ∫_1^x H(r)/r dr = log x when H ≡ 1
        let x = 30.0;
        let c = a.regvar_correction(a.phi().inverse(x).unwrap()).unwrap();
        assert!((c - x.ln()).abs() < 1e-10, "{c}");
    }

    #[test]
    fn gauss_laguerre_tail_ratio() {
        let phi = BernsteinFunction::gauss_laguerre(0.5, 1.0).unwrap();
        let ev = BernsteinGammaEvaluator::with_default_tol(phi).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        let xi = 100.0;
        let g = a.log_density(1.0, xi, 0).unwrap().log_abs;
        let r = a.log_density_regvar(1.0, xi, 0).unwrap().log_abs;
        let exact = gauss_laguerre_log_density(0.5, 1.0, xi);
        let ratio = (g - exact).exp();
        assert!((0.97..=1.03).contains(&ratio), "{ratio}");
        assert!(((r - exact).exp() - 1.0).abs() < 0.03);
    }

    #[test]
    fn log_family_display_agrees() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::log(1.0).unwrap()).unwrap();
        let a = TailAsymptotics::new(&ev).unwrap();
        for &(lambda, t) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)] {
            let phi = BernsteinFunction::log(lambda).unwrap();
            let ev = BernsteinGammaEvaluator::with_default_tol(phi).unwrap();
            let a_l = TailAsymptotics::new(&ev).unwrap();
            let x = 15.0f64;
            let v = a_l.log_density(t, x.powf(t), 0).unwrap().log_abs;
            let d = log_family_display_log(a_l.c_phi().value, lambda, t, x, oracle::ei);
            assert!(((v - d).exp() - 1.0).abs() < 0.01, "{lambda} {t}: {v} {d}");
        }
        assert!(a.c_phi().value > 0.0);
    }

    #[test]
    fn bounded_and_flagless_are_inapplicable() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::bounded_ratio()).unwrap();
        assert!(matches!(TailAsymptotics::new(&ev).unwrap_err(), Error::Inapplicable { .. }));
        let composed = BernsteinFunction::compose(BernsteinFunction::identity(), BernsteinFunction::log(1.0).unwrap()).unwrap();
        let ev = BernsteinGammaEvaluator::with_default_tol(composed).unwrap();
        assert!(matches!(TailAsymptotics::new(&ev).unwrap_err(), Error::Inapplicable { .. }));
        let a = identity_exact();
        assert!(matches!(a.density(1.0, 0.5, 0).unwrap_err(), Error::Domain { .. }));
        assert!(matches!(a.density_regvar(1.0, 10.0, 0).unwrap_err(), Error::Inapplicable { .. }));
    }

    #[test]
    fn legendre_identity_examples() {
        let l = legendre_data(&BernsteinFunction::identity()).unwrap();
        assert!((l.g(10.0).unwrap() - 14.025_850_929_940_457).abs() < 1e-10);
        assert!((l.l_g(1.0).unwrap() - (1.0f64.exp() - 1.0)).abs() < 1e-12);
        assert!((l.s_g(9.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(l.g(0.5).unwrap().is_finite());
        assert!(legendre_data(&BernsteinFunction::bounded_ratio()).is_err());
    }

    #[test]
    fn conjugacy_on_catalog() {
        for phi in crate::bernstein::catalog_samples() {
            let Ok(l) = legendre_data(&phi) else { continue };
            for &y in &[1.0, 3.0, 6.0, 12.0, 20.0] {
                match l.conjugate(y) {
                    Ok(_) => {
                        let d = l.conjugacy_defect(y).unwrap();
                        assert!(d < 1e-8, "{} y={y}: {d}", phi.label());
                    }
                    Err(_) => assert!(matches!(phi.family(), crate::bernstein::Family::Log { .. }) && y > 6.0),
                }
                if let Ok(u) = l.conjugate(y) {
                    assert!(l.g_second(u.max(1e-3)).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn self_neglect_examples() {
        let us = [1e2, 1e4, 1e6];
        let r = self_neglecting_check(|u: f64| Ok(u.sqrt()), &us, &[1.0]).unwrap();
        let expect = [0.048_808_848_170_151_55, 0.004_987_562_112_089_083, 0.000_499_875_062_460_964_5];
        for (d, e) in r.deviations[0].iter().zip(expect) {
            assert!((d - e).abs() < 1e-12, "{d} {e}");
        }
        assert!(r.pass);
        let c = self_neglecting_check(|_| Ok(1.0), &us, &[1.0, -0.5]).unwrap();
        assert!(c.pass && c.max_deviation == 0.0);
        let lin = self_neglecting_check(Ok, &us, &[1.0]).unwrap();
        assert!(!lin.pass);
        assert!((lin.max_deviation - 1.0).abs() < 1e-15);
        assert!(self_neglecting_check(|u| Ok(-u), &us, &[1.0]).is_err());
    }

    #[test]
    fn flatness_examples() {
        let model = identity_exact().log_density_model(1.0).unwrap();
        let us = [2.0, 4.0, 8.0, 16.0];
        let sq = flatness_check(|u: f64| Ok(u * u), &model, &us, &[1.0, 2.0]).unwrap();
        assert!(sq.pass, "{:?}", sq.deviations);
        let c = flatness_check(|_| Ok(3.0), &model, &us, &[1.0]).unwrap();
        assert_eq!(c.max_deviation, 0.0);
        let exp = flatness_check(|u: f64| Ok(u.exp()), &AsymptoticModel::standard_normal(), &us, &[1.0]).unwrap();
        assert!(!exp.pass);
    }

    #[test]
    fn gaussian_pair_is_n02() {
        let n = AsymptoticModel::standard_normal();
        for &y in &[-3.0, 0.0, 0.7, 5.0] {
            let (psi, eta) = gaussian_tail_convolve(&n, &n, y).unwrap();
            assert!((psi - y * y / 4.0).abs() < 1e-12);
            assert!((eta - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-14);
            let (q1, q2, _) = conjugate_split(&n, &n, y).unwrap();
            assert_eq!(q1, q2);
        }
        assert!((dfold(&n, 4, 0.0).unwrap() - 1.0 / (8.0 * PI).sqrt()).abs() < 1e-15);
        assert!((dfold(&n, 1, 1.3).unwrap() - (-0.845f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!(dfold(&n, 0, 1.0).is_err());
    }

    #[test]
    fn composer_without_closed_inverse() {
        let plain = |v: f64| {
            AsymptoticModel::new(
                "plain",
                move |_| Ok(1.0 / (2.0 * PI * v).sqrt()),
                move |y| Ok(0.5 * y * y / v),
                move |y| Ok(y / v),
                move |_| Ok(1.0 / v),
            )
        };
        let (psi, eta) = gaussian_tail_convolve(&plain(1.0), &plain(2.0), 2.0).unwrap();
        assert!((psi - 4.0 / 6.0).abs() < 1e-12);
        assert!((eta - 1.0 / (6.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dfold_reproduces_longer_times() {
        let a = identity_exact();
        let m1 = a.log_density_model(1.0).unwrap();
        for &(d, y) in &[(3u32, 6.0), (2, 10.0)] {
            let lhs = dfold_log(&m1, d, y).unwrap();
            let rhs = y + a.log_density(d as f64, y.exp(), 0).unwrap().log_abs;
            assert!(((lhs - rhs).exp() - 1.0).abs() < 0.01, "{d} {y}");
        }
        // the two-fold composer agrees with dfold(2)
        let (psi0, eta0) = gaussian_tail_convolve(&m1, &m1, 10.0).unwrap();
        let lhs = eta0.ln() - psi0;
        assert!((lhs - dfold_log(&m1, 2, 10.0).unwrap()).abs() < 1e-9);
    }
}
