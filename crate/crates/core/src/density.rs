//! Mellin-Barnes inversion of W_φ^t and the distributional metadata of ν_t.
//!
//! ν_t^{(n)}(x) = (-1)^n/(2π) ∫ x^{-(c+ib)-n} (c+ib)_n W_φ^t(c+ib) db.
//! The integrand is conjugate-symmetric in b, so only b ≥ 0 is sampled and the
//! trapezoid rule on a uniform b-grid converges geometrically in the step.

use crate::bernstein::BernsteinFunction;
use crate::bgamma::BernsteinGammaEvaluator;
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{ln_gamma_real, rising_factorial, stirling2_row};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const B_START: f64 = 8.0;
const B_MAX: f64 = 8192.0;
const H_START: f64 = 0.5;
const MAX_LEVEL: u32 = 9;
const SADDLE_LO: f64 = 0.25;
const SADDLE_HI: f64 = 60.0;

/// Choice of the abscissa c of the vertical line Re s = c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Contour {
    Fixed(f64),
    /// Per point, c minimizes -(c+n) log x + t log W(c); the tolerance becomes
    /// relative to the integrand size once that drops below one.
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOptions {
    pub tol: f64,
    pub contour: Contour,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { tol: 1e-8, contour: Contour::Fixed(1.0) }
    }
}

impl DensityOptions {
    pub fn fixed(tol: f64) -> Self {
        DensityOptions { tol, contour: Contour::Fixed(1.0) }
    }
    pub fn saddle(tol: f64) -> Self {
        DensityOptions { tol, contour: Contour::Saddle }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub x: f64,
    pub value: f64,
    pub abs_error: f64,
    pub c: f64,
    pub b_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourInfo {
    pub c: f64,
    pub b_used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub x: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub t: f64,
    pub n: u32,
    pub points: Vec<DensityPoint>,
    pub failures: Vec<PointFailure>,
    /// Largest B used; c of the first point (all points share it for fixed contours).
    pub contour: ContourInfo,
}

/// Initial truncation of the b-range.
#[derive(Debug, Clone, Copy)]
struct Start {
    b: f64,
}

const COLD: Start = Start { b: B_START };

#[derive(Debug, Clone, Copy)]
struct Raw {
    /// (1/π) Re ∫_0^B F(b) db
    value: f64,
    error: f64,
    b_used: f64,
}

/// Values of an x-independent log-kernel on b = k h, k = 0..=B/h.
struct NodeTable<'a> {
    log_g: &'a (dyn Fn(Complex64) -> Result<Complex64> + Sync),
    c: f64,
    h: f64,
    nodes: Vec<Complex64>,
}

impl<'a> NodeTable<'a> {
    fn new(log_g: &'a (dyn Fn(Complex64) -> Result<Complex64> + Sync), c: f64, h: f64) -> Self {
        NodeTable { log_g, c, h, nodes: Vec::new() }
    }

    fn extend_to(&mut self, b: f64) -> Result<()> {
        let count = (b / self.h).round() as usize + 1;
        while self.nodes.len() < count {
            let k = self.nodes.len();
            self.nodes.push((self.log_g)(Complex64::new(self.c, k as f64 * self.h))?);
        }
        Ok(())
    }

    fn halve(&mut self) -> Result<()> {
        let h2 = 0.5 * self.h;
        let mut next = Vec::with_capacity(2 * self.nodes.len());
        for (k, &v) in self.nodes.iter().enumerate() {
            if k > 0 {
                next.push((self.log_g)(Complex64::new(self.c, (2 * k - 1) as f64 * h2))?);
            }
            next.push(v);
        }
        self.nodes = next;
        self.h = h2;
        Ok(())
    }

    fn term(&self, k: usize, lx: f64, offset: f64) -> Complex64 {
        let b = k as f64 * self.h;
        (self.nodes[k] - Complex64::new(self.c + offset, b) * lx).exp()
    }

    /// (1/π) h Re[F(0)/2 + Σ_{0<k≤K} F(kh)]
    fn trapezoid(&self, upto: usize, lx: f64, offset: f64) -> f64 {
        let mut s = 0.5 * self.term(0, lx, offset).re;
        for k in 1..=upto {
            s += self.term(k, lx, offset).re;
        }
        s * self.h / PI
    }

    /// (1/π) h Σ_{from<k≤to} |F(kh)|
    fn abs_sum(&self, from: usize, to: usize, lx: f64, offset: f64) -> f64 {
        (from + 1..=to).map(|k| self.term(k, lx, offset).norm()).sum::<f64>() * self.h / PI
    }
}

/// (1/2π) ∫ exp(log_g(c+ib) - (c+ib+offset) log x) db for every x, sharing nodes.
fn contour_integral(
    log_g: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    c: f64,
    offset: f64,
    xs: &[f64],
    thresholds: &[f64],
    start: Start,
) -> Result<Vec<Raw>> {
    let lxs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mut table = NodeTable::new(log_g, c, H_START);
    let mut level = 0;
    let mut b = start.b.max(B_START);
    // truncation: the last dyadic block (B, 2B] must be negligible
    let tails = loop {
        table.extend_to(2.0 * b)?;
        let (kb, k2b) = ((b / table.h).round() as usize, (2.0 * b / table.h).round() as usize);
        let tails: Vec<f64> = lxs.iter().map(|&lx| table.abs_sum(kb, k2b, lx, offset)).collect();
        if tails.iter().zip(thresholds).all(|(t, thr)| *t < thr / 4.0) {
            break tails;
        }
        b *= 2.0;
        if b > B_MAX {
            let worst = tails.iter().cloned().fold(0.0, f64::max);
            return Err(Error::convergence(
                "mellin_barnes_density",
                worst,
                "integrand tail does not decay; the derivative order may exceed n(t)",
            ));
        }
    };
    let b_used = 2.0 * b;
    let mut prev: Vec<f64> = lxs
        .iter()
        .map(|&lx| table.trapezoid((b_used / table.h).round() as usize, lx, offset))
        .collect();
    loop {
        table.halve()?;
        level += 1;
        let k = (b_used / table.h).round() as usize;
        let cur: Vec<f64> = lxs.iter().map(|&lx| table.trapezoid(k, lx, offset)).collect();
        let diffs: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).collect();
        if diffs.iter().zip(thresholds).all(|(d, thr)| *d < thr / 4.0) {
            return Ok(cur
                .iter()
                .zip(diffs.iter().zip(&tails))
                .map(|(&value, (&d, &tail))| Raw { value, error: d + tail, b_used })
                .collect());
        }
        if level >= MAX_LEVEL {
            let worst = diffs.iter().cloned().fold(0.0, f64::max);
            return Err(Error::convergence("mellin_barnes_density", worst, "step refinement exhausted"));
        }
        prev = cur;
    }
}

fn check_t(t: f64, op: &'static str) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::parameter(op, "t must be positive"));
    }
    Ok(())
}

fn check_x(x: f64, op: &'static str) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(op, format!("x = {x} must be positive")));
    }
    Ok(())
}

/// t log W(s) + log (s)_n
fn density_kernel(ev: &BernsteinGammaEvaluator, t: f64, n: u32) -> impl Fn(Complex64) -> Result<Complex64> + Sync + '_ {
    move |s: Complex64| {
        let lw = ev.log_w(s)?.value * t;
        Ok(if n == 0 { lw } else { lw + rising_factorial(s, n).ln() })
    }
}

/// Minimizer of -(c + n) log x + t log W(c) over [0.25, 60] by golden section,
/// together with the minimum.
pub fn saddle_abscissa(ev: &BernsteinGammaEvaluator, t: f64, x: f64, n: u32) -> Result<(f64, f64)> {
    let lx = x.ln();
    let m = |c: f64| -> Result<f64> { Ok(-(c + n as f64) * lx + t * ev.log_w_real(c)?) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (SADDLE_LO, SADDLE_HI);
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    let (mut f1, mut f2) = (m(c1)?, m(c2)?);
    while b - a > 1e-4 {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = m(c1)?;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = m(c2)?;
        }
    }
    let c = 0.5 * (a + b);
    Ok((c, m(c)?))
}

fn gate_order(phi: &BernsteinFunction, t: f64, n: u32) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    if let Ok(s) = smoothness_order(phi, t) {
        if let Some(nt) = s.n_of_t {
            if i64::from(n) > nt {
                return Err(Error::inapplicable(
                    "mellin_barnes_density",
                    format!("order {n} exceeds n(t) = {nt}"),
                ));
            }
        }
    }
    Ok(())
}

fn invert_points(
    ev: &BernsteinGammaEvaluator,
    t: f64,
    xs: &[f64],
    n: u32,
    opts: &DensityOptions,
    start: Start,
) -> Result<Vec<(DensityPoint, Raw)>> {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let kernel = density_kernel(ev, t, n);
    match opts.contour {
        Contour::Fixed(c) => {
            if !(c > 0.0) {
                return Err(Error::parameter("mellin_barnes_density", "contour abscissa must be > 0"));
            }
            let thr = vec![opts.tol; xs.len()];
            let raws = contour_integral(&kernel, c, n as f64, xs, &thr, start)?;
            Ok(xs
                .iter()
                .zip(raws)
                .map(|(&x, r)| (DensityPoint { x, value: sign * r.value, abs_error: r.error, c, b_used: r.b_used }, r))
                .collect())
        }
        Contour::Saddle => xs
            .iter()
            .map(|&x| {
                let (c, m) = saddle_abscissa(ev, t, x, n)?;
                let thr = [opts.tol * m.exp().min(1.0)];
                let r = contour_integral(&kernel, c, n as f64, &[x], &thr, start)?[0];
                Ok((DensityPoint { x, value: sign * r.value, abs_error: r.error, c, b_used: r.b_used }, r))
            })
            .collect(),
    }
}

/// ν_t^{(n)}(x) with an absolute error estimate.
pub fn mellin_barnes_density(
    ev: &BernsteinGammaEvaluator,
    t: f64,
    x: f64,
    n: u32,
    opts: &DensityOptions,
) -> Result<DensityPoint> {
    check_t(t, "mellin_barnes_density")?;
    check_x(x, "mellin_barnes_density")?;
    gate_order(ev.phi(), t, n)?;
    Ok(invert_points(ev, t, &[x], n, opts, COLD)?[0].0)
}

/// Densities at many abscissae sharing one node table (fixed contours only).
pub fn density_table(
    ev: &BernsteinGammaEvaluator,
    t: f64,
    xs: &[f64],
    n: u32,
    tol: f64,
    c: f64,
) -> Result<Vec<DensityPoint>> {
    check_t(t, "density_table")?;
    for &x in xs {
        check_x(x, "density_table")?;
    }
    gate_order(ev.phi(), t, n)?;
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let opts = DensityOptions { tol, contour: Contour::Fixed(c) };
    Ok(invert_points(ev, t, xs, n, &opts, COLD)?.into_iter().map(|p| p.0).collect())
}

fn grid_point(ev: &BernsteinGammaEvaluator, t: f64, x: f64, n: u32, opts: &DensityOptions, start: Start) -> Result<DensityPoint> {
    check_x(x, "density_grid")?;
    Ok(invert_points(ev, t, &[x], n, opts, start)?[0].0)
}

fn assemble(t: f64, n: u32, results: Vec<(f64, Result<DensityPoint>)>) -> DensityGrid {
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (x, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(error) => failures.push(PointFailure { x, error }),
        }
    }
    let contour = ContourInfo {
        c: points.first().map_or(f64::NAN, |p| p.c),
        b_used: points.iter().map(|p| p.b_used).fold(0.0, f64::max),
    };
    DensityGrid { t, n, points, failures, contour }
}

/// The first abscissa is solved cold; its final B and step seed every other
/// point, so results do not depend on evaluation order.
fn pilot(ev: &BernsteinGammaEvaluator, t: f64, xs: &[f64], n: u32, opts: &DensityOptions) -> (Start, Option<Result<DensityPoint>>) {
    match xs.first() {
        None => (COLD, None),
        Some(&x0) => match check_x(x0, "density_grid").and_then(|_| invert_points(ev, t, &[x0], n, opts, COLD)) {
            Ok(v) => {
                let (p, raw) = v[0];
                let start = Start { b: (0.5 * raw.b_used).max(B_START) };
                (start, Some(Ok(p)))
            }
            Err(e) => (COLD, Some(Err(e))),
        },
    }
}

fn grid_prelude(ev: &BernsteinGammaEvaluator, t: f64, n: u32) -> Result<()> {
    check_t(t, "density_grid")?;
    gate_order(ev.phi(), t, n)
}

/// Point-wise inversion on a list of abscissae, one point after another.
pub fn density_grid_seq(ev: &BernsteinGammaEvaluator, t: f64, n: u32, xs: &[f64], opts: &DensityOptions) -> Result<DensityGrid> {
    grid_prelude(ev, t, n)?;
    let (start, first) = pilot(ev, t, xs, n, opts);
    let mut results = Vec::with_capacity(xs.len());
    if let Some(r) = first {
        results.push((xs[0], r));
    }
    for &x in xs.iter().skip(1) {
        results.push((x, grid_point(ev, t, x, n, opts, start)));
    }
    Ok(assemble(t, n, results))
}

/// Same as [`density_grid_seq`] with the points spread over the rayon pool.
#[cfg(feature = "parallel")]
pub fn density_grid_par(ev: &BernsteinGammaEvaluator, t: f64, n: u32, xs: &[f64], opts: &DensityOptions) -> Result<DensityGrid> {
    use rayon::prelude::*;
    grid_prelude(ev, t, n)?;
    let (start, first) = pilot(ev, t, xs, n, opts);
    let mut results = Vec::with_capacity(xs.len());
    if let Some(r) = first {
        results.push((xs[0], r));
    }
    let rest: Vec<(f64, Result<DensityPoint>)> = xs
        .par_iter()
        .skip(1)
        .map(|&x| (x, grid_point(ev, t, x, n, opts, start)))
        .collect();
    results.extend(rest);
    Ok(assemble(t, n, results))
}

pub fn density_grid(ev: &BernsteinGammaEvaluator, t: f64, n: u32, xs: &[f64], opts: &DensityOptions) -> Result<DensityGrid> {
    #[cfg(feature = "parallel")]
    {
        density_grid_par(ev, t, n, xs, opts)
    }
    #[cfg(not(feature = "parallel"))]
    {
        density_grid_seq(ev, t, n, xs, opts)
    }
}

/// P(X_t > x) = (1/2π) ∫ x^{1-s} W^t(s)/(s-1) db on Re s = c > 1.
pub fn survival(ev: &BernsteinGammaEvaluator, t: f64, x: f64, c: f64, tol: f64) -> Result<DensityPoint> {
    check_t(t, "survival")?;
    check_x(x, "survival")?;
    if !(c > 1.0) {
        return Err(Error::parameter("survival", "contour abscissa must exceed 1"));
    }
    let kernel = |s: Complex64| -> Result<Complex64> { Ok(ev.log_w(s)?.value * t - (s - 1.0).ln()) };
    let r = contour_integral(&kernel, c, -1.0, &[x], &[tol], COLD)?[0];
    Ok(DensityPoint { x, value: r.value, abs_error: r.error, c, b_used: r.b_used })
}

/// Density of X^t where X ~ ν_1: σ_t(x) = (1/t) x^{(1-t)/t} ν_1(x^{1/t}).
pub fn power_density(ev: &BernsteinGammaEvaluator, t: f64, x: f64, opts: &DensityOptions) -> Result<DensityPoint> {
    check_t(t, "power_density")?;
    check_x(x, "power_density")?;
    let y = x.powf(1.0 / t);
    let p = mellin_barnes_density(ev, 1.0, y, 0, opts)?;
    let scale = x.powf((1.0 - t) / t) / t;
    Ok(DensityPoint { x, value: scale * p.value, abs_error: scale * p.abs_error, c: p.c, b_used: p.b_used })
}

/// σ_t by direct inversion of its Mellin transform s ↦ W_φ(t s - t + 1).
pub fn power_density_direct(ev: &BernsteinGammaEvaluator, t: f64, x: f64, tol: f64) -> Result<DensityPoint> {
    check_t(t, "power_density")?;
    check_x(x, "power_density")?;
    let kernel = |s: Complex64| -> Result<Complex64> { Ok(ev.log_w(s * t - t + 1.0)?.value) };
    let c = 1.0;
    let r = contour_integral(&kernel, c, 0.0, &[x], &[tol], COLD)?[0];
    Ok(DensityPoint { x, value: r.value, abs_error: r.error, c, b_used: r.b_used })
}

/// Coefficients S(n+1, k+1), k = 0..=n, of d^n/dy^n [e^y ν(e^y)] = Σ_k S(n+1,k+1) e^{(k+1)y} ν^{(k)}(e^y).
pub fn levy_chain_coefficients(n: usize) -> Vec<f64> {
    stirling2_row(n + 1)[1..].to_vec()
}

/// n-th derivative of f_t(y) = e^y ν_t(e^y), the density of log X_t.
///
/// Every chain-rule term e^{(k+1)y} ν^{(k)}(e^y) has the kernel x^{1-s}, so the
/// terms are combined under a single contour integral.
pub fn levy_density(ev: &BernsteinGammaEvaluator, t: f64, y: f64, n: u32, opts: &DensityOptions) -> Result<DensityPoint> {
    Ok(levy_density_grid(ev, t, &[y], n, opts.tol, opts.contour)?[0])
}

/// [`levy_density`] at many y sharing one node table (the contour must be fixed).
pub fn levy_density_grid(
    ev: &BernsteinGammaEvaluator,
    t: f64,
    ys: &[f64],
    n: u32,
    tol: f64,
    contour: Contour,
) -> Result<Vec<DensityPoint>> {
    check_t(t, "levy_density")?;
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::domain("levy_density", "y must be finite"));
    }
    gate_order(ev.phi(), t, n)?;
    if ys.is_empty() {
        return Ok(Vec::new());
    }
    let coeffs = levy_chain_coefficients(n as usize);
    let kernel = |s: Complex64| -> Result<Complex64> {
        let mut q = Complex64::new(0.0, 0.0);
        for (k, &a) in coeffs.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            q += rising_factorial(s, k as u32) * (a * sign);
        }
        Ok(ev.log_w(s)?.value * t + q.ln())
    };
    let xs: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
    let c = match contour {
        Contour::Fixed(c) => c,
        Contour::Saddle => saddle_abscissa(ev, t, xs[xs.len() / 2], 0)?.0,
    };
    let raws = contour_integral(&kernel, c, -1.0, &xs, &vec![tol; xs.len()], COLD)?;
    Ok(ys
        .iter()
        .zip(raws)
        .map(|(&y, r)| DensityPoint { x: y, value: r.value, abs_error: r.error, c, b_used: r.b_used })
        .collect())
}

/// Closed form x^{m+1/α-1} e^{-x^{1/α}} / (α Γ(αm+1)) of ν_1 for the Gauss-Laguerre family.
pub fn gauss_laguerre_density(alpha: f64, m: f64, x: f64) -> f64 {
    gauss_laguerre_log_density(alpha, m, x).exp()
}

pub fn gauss_laguerre_log_density(alpha: f64, m: f64, x: f64) -> f64 {
    (m + 1.0 / alpha - 1.0) * x.ln() - x.powf(1.0 / alpha) - alpha.ln() - ln_gamma_real(alpha * m + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    Bounded,
    Unbounded,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportInfo {
    pub kind: SupportKind,
    /// φ(∞)^t when bounded, the atom k^t when degenerate.
    pub right_endpoint: f64,
}

pub fn support(phi: &BernsteinFunction, t: f64) -> Result<SupportInfo> {
    check_t(t, "support")?;
    if phi.is_constant() {
        return Ok(SupportInfo { kind: SupportKind::Degenerate, right_endpoint: phi.eval(0.0)?.powf(t) });
    }
    let top = phi.phi_infinity();
    Ok(if top.is_finite() {
        SupportInfo { kind: SupportKind::Bounded, right_endpoint: top.powf(t) }
    } else {
        SupportInfo { kind: SupportKind::Unbounded, right_endpoint: f64::INFINITY }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessInfo {
    pub n_phi: f64,
    /// ⌊N_φ t⌋ - 1; `None` stands for ∞.
    pub n_of_t: Option<i64>,
}

pub fn smoothness_order(phi: &BernsteinFunction, t: f64) -> Result<SmoothnessInfo> {
    check_t(t, "smoothness_order")?;
    let fl = phi.flags();
    if phi.is_constant() {
        return Err(Error::inapplicable("smoothness_order", "φ is constant"));
    }
    if fl.has_drift || (fl.v_at_zero.is_infinite() && !fl.is_bounded) {
        return Ok(SmoothnessInfo { n_phi: f64::INFINITY, n_of_t: None });
    }
    if fl.is_bounded && fl.v_at_zero.is_finite() && fl.v_at_zero > 0.0 {
        let n_phi = fl.v_at_zero / phi.phi_infinity();
        let nt = (n_phi * t).floor() as i64 - 1;
        if nt < 0 {
            return Err(Error::inapplicable(
                "smoothness_order",
                format!("t = {t} <= 1/N_φ = {}", 1.0 / n_phi),
            ));
        }
        return Ok(SmoothnessInfo { n_phi, n_of_t: Some(nt) });
    }
    Err(Error::inapplicable("smoothness_order", "φ is outside the class with a finite or infinite N_φ"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorMethod {
    DriftRule,
    RegvarRule,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorInfo {
    pub theta_phi: f64,
    pub method: SectorMethod,
    /// False when the numeric averages were still moving.
    pub converged: bool,
}

impl SectorInfo {
    pub fn sector_at(&self, t: f64) -> f64 {
        (self.theta_phi * t).min(PI)
    }
}

/// Θ_φ from the drift or regular-variation rules, else the running averages
/// (1/B) ∫_0^B arg φ(1+iu) du at B_max/4, B_max/2, B_max.
pub fn theta_phi(phi: &BernsteinFunction, b_max: f64) -> Result<SectorInfo> {
    if phi.flags().has_drift {
        return Ok(SectorInfo { theta_phi: PI / 2.0, method: SectorMethod::DriftRule, converged: true });
    }
    if let Some(rv) = phi.regular_variation() {
        return Ok(SectorInfo { theta_phi: rv.alpha * PI / 2.0, method: SectorMethod::RegvarRule, converged: true });
    }
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(Error::parameter("theta_phi", "B_max must be positive"));
    }
    let arg = |u: f64| phi.eval_complex(Complex64::new(1.0, u)).map(|v| v.arg()).unwrap_or(f64::NAN);
    let mut avgs = [0.0; 3];
    let mut acc = 0.0;
    let mut lo = 0.0;
    for (i, frac) in [0.25, 0.5, 1.0].iter().enumerate() {
        let hi = b_max * frac;
        acc += quad::integrate(arg, lo, hi, 1e-10, 1e-10)?.value;
        avgs[i] = acc / hi;
        lo = hi;
    }
    let theta = avgs.iter().cloned().fold(f64::INFINITY, f64::min).clamp(0.0, PI / 2.0);
    let converged = (avgs[2] - avgs[1]).abs() < 1e-3 && (avgs[1] - avgs[0]).abs() < 1e-3;
    Ok(SectorInfo { theta_phi: theta, method: SectorMethod::Numeric, converged })
}

/// |∫_0^∞ e^{-uy} dy - φ'(u)/φ(u)| for φ(u) = u, where κ is Lebesgue measure.
pub fn kappa_check_identity(phi: &BernsteinFunction, u: f64) -> Result<f64> {
    if !matches!(phi.family(), crate::bernstein::Family::Identity) {
        return Err(Error::unsupported("kappa_check", "κ is only constructed for φ(u) = u"));
    }
    if !(u > 0.0) {
        return Err(Error::domain("kappa_check", "u must be positive"));
    }
    let lap = quad::integrate_to_inf(|y: f64| (-u * y).exp(), 0.0, 1e-14, 1e-14)?.value;
    Ok((lap - phi.log_derivative(u)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::{LevyDensity, LevyTriplet, MeasurePart};
    use crate::oracle;

    fn identity() -> BernsteinGammaEvaluator {
        BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::identity()).unwrap()
    }

    #[test]
    fn exponential_density_examples() {
        let ev = identity();
        let o = DensityOptions::fixed(1e-10);
        let p = mellin_barnes_density(&ev, 1.0, 1.0, 0, &o).unwrap();
        assert!((p.value - (-1f64).exp()).abs() < 1e-9, "{p:?}");
        let d = mellin_barnes_density(&ev, 1.0, 1.0, 1, &o).unwrap();
        assert!((d.value + (-1f64).exp()).abs() < 1e-9);
        let b = mellin_barnes_density(&ev, 2.0, 1.0, 0, &o).unwrap();
        assert!((b.value - 2.0 * oracle::bessel_k0(2.0)).abs() < 1e-9);
    }

    #[test]
    fn gauss_laguerre_example() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::gauss_laguerre(0.5, 1.0).unwrap()).unwrap();
        let p = mellin_barnes_density(&ev, 1.0, 1.0, 0, &DensityOptions::fixed(1e-9)).unwrap();
        let exact = (-1f64).exp() / (0.5 * crate::special::gamma_real(1.5));
        assert!((p.value - exact).abs() < 1e-9, "{p:?}");
        assert!((gauss_laguerre_density(0.5, 1.0, 1.0) - exact).abs() < 1e-15);
        assert!((exact - 0.830_163_4).abs() < 1e-4);
    }

    #[test]
    fn grid_examples_and_determinism() {
        let ev = identity();
        let o = DensityOptions::fixed(1e-9);
        let g = density_grid_seq(&ev, 1.0, 0, &[0.5, 1.0, 2.0], &o).unwrap();
        for (p, e) in g.points.iter().zip([0.606_530_7, 0.367_879_4, 0.135_335_3]) {
            assert!((p.value - e).abs() < 1e-7);
        }
        assert!(density_grid_seq(&ev, 1.0, 0, &[], &o).unwrap().points.is_empty());
        #[cfg(feature = "parallel")]
        {
            let xs = quad::linspace(0.1, 5.0, 17);
            let a = density_grid_seq(&ev, 1.0, 0, &xs, &o).unwrap();
            let b = density_grid_par(&ev, 1.0, 0, &xs, &o).unwrap();
            assert_eq!(a, b);
        }
        let bad = density_grid_seq(&ev, 1.0, 0, &[1.0, -1.0], &o).unwrap();
        assert_eq!(bad.points.len(), 1);
        assert_eq!(bad.failures.len(), 1);
    }

    #[test]
    fn saddle_contour_keeps_relative_accuracy() {
        let ev = identity();
        let p = mellin_barnes_density(&ev, 1.0, 40.0, 0, &DensityOptions::saddle(1e-8)).unwrap();
        assert!((p.value / (-40f64).exp() - 1.0).abs() < 1e-6, "{p:?}");
        assert!(p.c > 10.0);
    }

    #[test]
    fn power_density_examples() {
        let ev = identity();
        let o = DensityOptions::fixed(1e-10);
        for (t, x, e) in [(1.0, 2.0, 0.135_335_3), (2.0, 1.0, 0.183_939_7), (0.5, 1.0, 0.735_758_9)] {
            let p = power_density(&ev, t, x, &o).unwrap();
            assert!((p.value - e).abs() < 1e-7, "t={t}");
        }
        for x in [0.5, 1.0, 2.0] {
            let a = power_density(&ev, 2.0, x, &o).unwrap().value;
            let b = power_density_direct(&ev, 2.0, x, 1e-10).unwrap().value;
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn levy_density_examples() {
        let ev = identity();
        let o = DensityOptions::fixed(1e-10);
        assert!((levy_density(&ev, 1.0, 0.0, 0, &o).unwrap().value - 0.367_879_4).abs() < 1e-7);
        assert!((levy_density(&ev, 1.0, 2f64.ln(), 0, &o).unwrap().value - 0.270_670_6).abs() < 1e-7);
        // f(y) = exp(y - e^y): f' = (1 - e^y) f, f'' = ((1 - e^y)^2 - e^y) f
        let y = 0.3f64;
        let f = (y - y.exp()).exp();
        let d1 = levy_density(&ev, 1.0, y, 1, &o).unwrap().value;
        let d2 = levy_density(&ev, 1.0, y, 2, &o).unwrap().value;
        assert!((d1 - (1.0 - y.exp()) * f).abs() < 1e-8);
        assert!((d2 - ((1.0 - y.exp()).powi(2) - y.exp()) * f).abs() < 1e-8);
    }

    #[test]
    fn chain_rule_coefficients_by_hand() {
        assert_eq!(levy_chain_coefficients(0), vec![1.0]);
        assert_eq!(levy_chain_coefficients(1), vec![1.0, 1.0]);
        assert_eq!(levy_chain_coefficients(2), vec![1.0, 3.0, 1.0]);
        assert_eq!(levy_chain_coefficients(3), vec![1.0, 7.0, 6.0, 1.0]);
        // Σ_k S(n+1,k+1) (-1)^k (s)_k = (1-s)^n
        let s = Complex64::new(0.7, 2.3);
        for n in 0..6usize {
            let q: Complex64 = levy_chain_coefficients(n)
                .iter()
                .enumerate()
                .map(|(k, a)| rising_factorial(s, k as u32) * (a * if k % 2 == 0 { 1.0 } else { -1.0 }))
                .sum();
            assert!((q - (1.0 - s).powu(n as u32)).norm() < 1e-10);
        }
    }

    #[test]
    fn support_examples() {
        let s = support(&BernsteinFunction::bounded_ratio(), 3.0).unwrap();
        assert_eq!((s.kind, s.right_endpoint), (SupportKind::Bounded, 1.0));
        assert_eq!(support(&BernsteinFunction::identity(), 1.0).unwrap().kind, SupportKind::Unbounded);
        let d = support(&BernsteinFunction::constant(2.0).unwrap(), 2.0).unwrap();
        assert_eq!((d.kind, d.right_endpoint), (SupportKind::Degenerate, 4.0));
    }

    #[test]
    fn smoothness_examples() {
        let s = smoothness_order(&BernsteinFunction::identity(), 0.3).unwrap();
        assert!(s.n_phi.is_infinite() && s.n_of_t.is_none());
        let synthetic = BernsteinFunction::from_triplet(
            LevyTriplet::new(0.0, 0.0, vec![MeasurePart::Density(LevyDensity::Exponential { weight: 2.0, rate: 2.0 })])
                .unwrap(),
        )
        .unwrap();
        let s = smoothness_order(&synthetic, 1.6).unwrap();
        assert_eq!((s.n_phi, s.n_of_t), (2.0, Some(2)));
        assert!(matches!(smoothness_order(&synthetic, 0.4), Err(Error::Inapplicable { .. })));
    }

    #[test]
    fn theta_examples() {
        let th = theta_phi(&BernsteinFunction::identity(), 100.0).unwrap();
        assert_eq!(th.theta_phi, PI / 2.0);
        let p = theta_phi(&BernsteinFunction::power_shifted(0.5, 0.0).unwrap(), 100.0).unwrap();
        assert!((p.theta_phi - PI / 4.0).abs() < 1e-15);
        let g = theta_phi(&BernsteinFunction::gamma_ratio(1.0, 1.0, 0.3).unwrap(), 100.0).unwrap();
        assert!((g.theta_phi - 1.099_557_4).abs() < 1e-7);
        let l = theta_phi(&BernsteinFunction::log(1.0).unwrap(), 400.0).unwrap();
        assert_eq!(l.method, SectorMethod::Numeric);
        assert!(l.theta_phi > 0.0 && l.theta_phi < PI / 2.0 && !l.converged);
        assert!((g.sector_at(4.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn kappa_examples() {
        let id = BernsteinFunction::identity();
        for u in [1.0, 10.0, 0.1] {
            assert!(kappa_check_identity(&id, u).unwrap() < 1e-12);
        }
        assert!(matches!(
            kappa_check_identity(&BernsteinFunction::log(1.0).unwrap(), 1.0),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn order_gate_for_bounded_family() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::bounded_ratio()).unwrap();
        let r = mellin_barnes_density(&ev, 1.5, 0.5, 1, &DensityOptions::default());
        assert!(matches!(r, Err(Error::Inapplicable { .. })));
    }

    #[test]
    fn bounded_ratio_has_no_mass_beyond_one() {
        let ev = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::bounded_ratio()).unwrap();
        let s = survival(&ev, 2.0, 1.0, 30.0, 1e-7).unwrap();
        assert!(s.value.abs() <= 1e-6, "{s:?}");
        let inside = survival(&ev, 2.0, 0.5, 2.0, 1e-6).unwrap();
        // ν_2(x) = -log x on (0,1): P(X > 1/2) = (1 - ln 2)/2
        assert!((inside.value - 0.5 * (1.0 - 2f64.ln())).abs() < 1e-6, "{inside:?}");
    }
}
