//! Adaptive Gauss-Kronrod quadrature for real and complex integrands.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Values that can be integrated: closed under addition and real scaling.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

const MAX_INTERVALS: usize = 4000;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite interval.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Quad {
            value: T::zero(),
            error: 0.0,
            evals: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate", "interval endpoints must be finite"));
    }
    if a > b {
        let q = integrate(f, b, a, abs_tol, rel_tol)?;
        return Ok(Quad { value: q.value * -1.0, ..q });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, T, f64)> = vec![(a, b, v, e)];
    let mut evals = 15;
    loop {
        let total = parts.iter().fold(T::zero(), |acc, p| acc + p.2);
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !err.is_finite() || !total.magnitude().is_finite() {
            return Err(Error::convergence("integrate", f64::INFINITY, "non-finite integrand"));
        }
        if err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(Quad {
                value: total,
                error: err,
                evals,
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::convergence(
                "integrate",
                err,
                format!("interval budget exhausted on [{a}, {b}]"),
            ));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::convergence("integrate", err, "interval collapsed to machine precision"));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evals += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Integral over `[a, ∞)` through the map `x = a + s/(1-s)`.
pub fn integrate_to_inf<T, F>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate(
        |s: f64| {
            let om = 1.0 - s;
            let x = a + s / om;
            if !x.is_finite() {
                return T::zero();
            }
            f(x) * (1.0 / (om * om))
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integral of `f` over `(0, ∞)` split at 1, each half taken in the logarithmic variable.
///
/// Suited to integrands with algebraic behaviour at 0 and at ∞ (Lévy-type densities).
pub fn integrate_positive_axis<T, F>(mut f: F, abs_tol: f64, rel_tol: f64) -> Result<Quad<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let lower = integrate_to_inf(
        |w: f64| {
            let y = (-w).exp();
            if y == 0.0 {
                T::zero()
            } else {
                f(y) * y
            }
        },
        0.0,
        0.5 * abs_tol,
        rel_tol,
    )?;
    let upper = integrate_to_inf(
        |w: f64| {
            let y = w.exp();
            if !y.is_finite() {
                T::zero()
            } else {
                f(y) * y
            }
        },
        0.0,
        0.5 * abs_tol,
        rel_tol,
    )?;
    Ok(Quad {
        value: lower.value + upper.value,
        error: lower.error + upper.error,
        evals: lower.evals + upper.evals,
    })
}

/// Root of a function that changes sign on `[lo, hi]`, by bisection to absolute width `xtol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::domain(
            "bisect",
            format!("no sign change on [{lo}, {hi}]"),
        ));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Geometric grid of `count` points spanning `[lo, hi]`.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}
