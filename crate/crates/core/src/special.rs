//! Gamma-type special functions used by the closed-form families.

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// Complex log-gamma (Lanczos, g = 7). The imaginary part is a log of Γ, not
/// necessarily the principal one; callers exponentiate or take differences.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    if z.re > -40.0 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut w = z;
        while w.re < 0.5 {
            acc += w.ln();
            w += 1.0;
        }
        return lanczos(w) - acc;
    }
    let s = (z * PI).sin();
    Complex64::new(PI.ln(), 0.0) - s.ln() - lanczos(1.0 - z)
}

pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

pub fn gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).exp().re
}

/// Digamma on the positive half-line.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x
        - r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))))
}

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// log(1 + q) without cancellation for small |q|.
pub fn ln_1p(q: Complex64) -> Complex64 {
    if q.norm() > 0.1 {
        return (1.0 + q).ln();
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = q;
    for k in 1..40 {
        let term = p / k as f64;
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        p *= q;
    }
    sum
}

/// lnΓ(w + δ) - lnΓ(w), continuous in w off the negative axis and accurate
/// for large |w| where the plain difference of log-gammas cancels.
pub fn ln_gamma_ratio(w: Complex64, delta: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut v = w;
    while v.norm() < 20.0 {
        acc += ln_1p(delta / v);
        v += 1.0;
    }
    // Stirling on both terms, combined analytically
    let q = delta / v;
    let mut s = (v - 0.5) * ln_1p(q) + delta * (v + delta).ln() - delta;
    let (i1, i2) = (1.0 / (v + delta), 1.0 / v);
    let (mut p1, mut p2) = (i1, i2);
    for c in STIRLING {
        s += (p1 - p2) * c;
        p1 *= i1 * i1;
        p2 *= i2 * i2;
    }
    s - acc
}

/// ψ(x + δ) - ψ(x) for x > 0, without the cancellation of a plain difference.
pub fn digamma_diff(x: f64, delta: f64) -> f64 {
    let mut acc = 0.0;
    let mut v = x;
    while v < 20.0 {
        acc += delta / (v * (v + delta));
        v += 1.0;
    }
    let (a, b) = (1.0 / (v + delta), 1.0 / v);
    let (a2, b2) = (a * a, b * b);
    let (mut pa, mut pb) = (a2, b2);
    let mut s = (delta / v).ln_1p() + delta / (2.0 * v * (v + delta));
    for (k, c) in STIRLING.iter().enumerate() {
        s -= c * (2 * k + 1) as f64 * (pa - pb);
        pa *= a2;
        pb *= b2;
    }
    s + acc
}

/// Exponential integral E1(x) = ∫_x^∞ e^{-s}/s ds for x > 0.
pub fn e1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return -EULER_GAMMA - x.ln() + sum;
    }
    // modified Lentz on the continued fraction
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// Exponential integral Ei(x) for x > 0 (principal value).
pub fn ei(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x < 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        return EULER_GAMMA + x.ln() + sum;
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..60 {
        let next = term * k as f64 / x;
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 {
            break;
        }
    }
    x.exp() / x * sum
}

/// Rising factorial (z)_n = z(z+1)...(z+n-1) as an explicit product.
pub fn rising_factorial(z: Complex64, n: u32) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (z + i as f64))
}

/// Row n of the Stirling numbers of the second kind, S(n, 0..=n).
pub fn stirling2_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 1..=n {
        let mut next = vec![0.0; m + 1];
        for k in 1..=m {
            let keep = if k < row.len() { k as f64 * row[k] } else { 0.0 };
            next[k] = keep + row[k - 1];
        }
        row = next;
    }
    row
}
