//! Stieltjes moment determinacy of ν_t and of powers X^t, as a function of t.
//!
//! Decisions come first from structural rules on φ (drift, Blumenthal-Getoor
//! indices, Jurek-class flags); only inside the gap left by those rules are the
//! Carleman and Abelian series consulted numerically.

use crate::bernstein::BernsteinFunction;
use crate::bgamma::moments;
use crate::error::{Error, Result};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Default number of series terms for diagnostics.
pub const SERIES_N: usize = 10_000;
/// Half-width of the undecided band around p = 1.
pub const SERIES_MARGIN: f64 = 0.05;
/// Abelian gate sampling range in y = log x.
const GATE_Y: (f64, f64) = (10.0, 40.0);
const GATE_POINTS: usize = 31;

/// A real number or +∞; serializes ∞ as the string "inf".
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal(v)),
            Repr::Word(w) if w == "inf" => Ok(ExtReal::INFINITY),
            Repr::Word(w) => Err(de::Error::custom(format!("expected a number or \"inf\", got {w:?}"))),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Drift,
    BetaZero,
    PowerJurek,
    RatioDomination,
    NoUpperRule,
}

/// Bounds lower ≤ 𝒯_φ ≤ upper on the threshold index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdBounds {
    pub lower: ExtReal,
    pub upper: ExtReal,
    /// ν_t at t = lower is determinate.
    pub sharp_at_lower: bool,
    pub rule_trace: Vec<Rule>,
}

/// Smallest 2/α over a sweep of α for which φ/(u+m)^α is Bernstein for some m.
pub fn ratio_domination_upper(phi: &BernsteinFunction) -> Option<f64> {
    const ALPHAS: [f64; 6] = [0.5, 0.75, 0.9, 0.99, 0.999, 0.999_999];
    ALPHAS
        .iter()
        .filter(|&&a| phi.ratio_condition(a).map(|r| r.holds).unwrap_or(false))
        .map(|a| 2.0 / a)
        .fold(None, |best: Option<f64>, v| Some(best.map_or(v, |b| b.min(v))))
}

pub fn threshold_bounds(phi: &BernsteinFunction) -> Result<ThresholdBounds> {
    if phi.is_constant() {
        return Err(Error::parameter("threshold_bounds", "φ is constant"));
    }
    let flags = phi.flags();
    if flags.has_drift {
        return Ok(ThresholdBounds {
            lower: ExtReal(2.0),
            upper: ExtReal(2.0),
            sharp_at_lower: true,
            rule_trace: vec![Rule::Drift],
        });
    }
    let (beta, delta) = (phi.beta(), phi.delta());
    if beta == 0.0 {
        return Ok(ThresholdBounds {
            lower: ExtReal::INFINITY,
            upper: ExtReal::INFINITY,
            sharp_at_lower: true,
            rule_trace: vec![Rule::BetaZero],
        });
    }
    let lower = ExtReal((2.0 / beta).max(2.0));
    let sharp_at_lower = phi.limsup_regular();
    if flags.power_jurek {
        let upper = if delta > 0.0 { 2.0 / delta } else { f64::INFINITY };
        return Ok(ThresholdBounds {
            lower,
            upper: ExtReal(upper.max(lower.0)),
            sharp_at_lower,
            rule_trace: vec![Rule::PowerJurek],
        });
    }
    if let Some(upper) = ratio_domination_upper(phi) {
        return Ok(ThresholdBounds {
            lower,
            upper: ExtReal(upper.max(lower.0)),
            sharp_at_lower,
            rule_trace: vec![Rule::RatioDomination],
        });
    }
    Ok(ThresholdBounds { lower, upper: ExtReal::INFINITY, sharp_at_lower, rule_trace: vec![Rule::NoUpperRule] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Diverges,
    Converges,
    Marginal,
}

/// Partial sums of a positive series with a fitted decay exponent p (term ≈ C n^{-p}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    #[serde(skip)]
    pub partial_sums: Vec<f64>,
    pub exponent_estimate: f64,
    pub classification: Classification,
    /// Terms decay like a power of log n rather than of n.
    pub log_scale: bool,
    #[serde(rename = "N")]
    pub n_terms: usize,
}

fn slope_over(log_terms: &[f64], lo: usize, hi: usize) -> f64 {
    let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| log_terms[n - 1]).collect();
    -crate::bernstein::least_squares_slope(&xs, &ys)
}

/// Classifies a series from the logarithms of its terms, indexed from n = 1.
///
/// `harmonic_comparison` lets a marginal fit resolve to divergence when n·term
/// is non-decreasing, i.e. the terms dominate c/n.
pub fn diagnose(log_terms: &[f64], harmonic_comparison: bool) -> Result<SeriesDiagnostics> {
    let n = log_terms.len();
    if n < 10 {
        return Err(Error::parameter("series", "need at least 10 terms"));
    }
    if log_terms.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("series", "NaN term"));
    }
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in log_terms {
        acc += v.exp();
        partial_sums.push(acc);
    }
    let half = n / 2;
    let p = slope_over(log_terms, half, n);
    let mut classification = if p < 1.0 - SERIES_MARGIN {
        Classification::Diverges
    } else if p > 1.0 + SERIES_MARGIN {
        Classification::Converges
    } else {
        Classification::Marginal
    };
    // (log n)^{-q} has p(n) = q/log n: compare constancy of p against that of p·log n.
    let mid = (n as f64).powf(0.75).round() as usize;
    let root = (n as f64).sqrt().round() as usize;
    let mut log_scale = false;
    if classification != Classification::Diverges && root >= 2 && mid > root + 2 && n > mid + 2 {
        let (p1, p2) = (slope_over(log_terms, root, mid), slope_over(log_terms, mid, n));
        let (c1, c2) = (((root * mid) as f64).sqrt().ln(), ((mid * n) as f64).sqrt().ln());
        let power_drift = (p1 / p2 - 1.0).abs();
        let log_drift = ((p1 * c1) / (p2 * c2) - 1.0).abs();
        if p2 > 0.0 && log_drift < power_drift && power_drift > 0.02 {
            log_scale = true;
            classification = Classification::Diverges;
        }
    }
    if classification == Classification::Marginal && harmonic_comparison {
        let ok = (half..n).all(|k| {
            let a = (k as f64).ln() + log_terms[k - 1];
            let b = ((k + 1) as f64).ln() + log_terms[k];
            b >= a - 1e-12 * a.abs().max(1.0)
        });
        if ok {
            classification = Classification::Diverges;
        }
    }
    Ok(SeriesDiagnostics { partial_sums, exponent_estimate: p, classification, log_scale, n_terms: n })
}

fn check_t(t: f64, op: &'static str) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::parameter(op, "t must be positive and finite"));
    }
    Ok(())
}

/// Carleman diagnostics: the bound series Σ φ(n)^{-t/2} decides, the exact
/// series Σ W_φ(n+1)^{-t/(2n)} is reported alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanReport {
    pub bound: SeriesDiagnostics,
    pub exact: SeriesDiagnostics,
}

impl CarlemanReport {
    pub fn classification(&self) -> Classification {
        self.bound.classification
    }
}

pub fn carleman_series(phi: &BernsteinFunction, t: f64, n: usize) -> Result<CarlemanReport> {
    check_t(t, "carleman_series")?;
    if n < 10 {
        return Err(Error::parameter("carleman_series", "N must be >= 10"));
    }
    let bound: Vec<f64> = (1..=n)
        .map(|k| phi.eval(k as f64).map(|v| -0.5 * t * v.ln()))
        .collect::<Result<_>>()?;
    let log_w = moments(phi, 1.0, n)?;
    let exact: Vec<f64> = (1..=n).map(|k| -t * log_w.log_values[k] / (2.0 * k as f64)).collect();
    Ok(CarlemanReport { bound: diagnose(&bound, true)?, exact: diagnose(&exact, true)? })
}

/// Samples of log(G'(y) e^{-y/2}) = log 𝔱 + log ϕ(e^{y/t}) - y/2 on the gate range.
pub fn abelian_gate(phi: &BernsteinFunction, t: f64, c: f64) -> Result<Vec<(f64, f64)>> {
    let frac = (t - c) / t;
    crate::quad::linspace(GATE_Y.0, GATE_Y.1, GATE_POINTS)
        .into_iter()
        .map(|y| {
            let x = (y / t).exp();
            let u = phi
                .inverse(x)
                .map_err(|_| Error::inapplicable("abelian_series", format!("ϕ(e^(y/t)) not representable at y = {y}")))?;
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::inapplicable("abelian_series", format!("ϕ(e^(y/t)) overflows at y = {y}")));
            }
            Ok((y, frac.ln() + u.ln() - 0.5 * y))
        })
        .collect()
}

/// Σ φ(𝔱n)^{-t/2} with 𝔱 = (t-c)/t, the Abelian indeterminacy series.
pub fn abelian_series(phi: &BernsteinFunction, t: f64, c: f64, n: usize) -> Result<SeriesDiagnostics> {
    check_t(t, "abelian_series")?;
    if !(c > 0.0 && c < t) {
        return Err(Error::parameter("abelian_series", "need 0 < c < t"));
    }
    if n < 10 {
        return Err(Error::parameter("abelian_series", "N must be >= 10"));
    }
    if phi.is_constant() || phi.phi_infinity().is_finite() {
        return Err(Error::inapplicable("abelian_series", "φ(∞) < ∞"));
    }
    if !phi.flags().power_jurek {
        return Err(Error::inapplicable("abelian_series", "power_jurek flag not set"));
    }
    let gate = abelian_gate(phi, t, c)?;
    let decreasing = gate
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-9 * w[0].1.abs().max(1.0));
    if !decreasing {
        return Err(Error::inapplicable(
            "abelian_series",
            "G'(y)e^{-y/2} is not non-increasing on y in [10, 40]",
        ));
    }
    let frac = (t - c) / t;
    let terms: Vec<f64> = (1..=n)
        .map(|k| phi.eval(frac * k as f64).map(|v| -0.5 * t * v.ln()))
        .collect::<Result<_>>()?;
    diagnose(&terms, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Determinate,
    Indeterminate,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    ThresholdRule,
    CarlemanDivergence,
    AbelianConvergence,
    RatioDomination,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminacyVerdict {
    pub t: f64,
    pub verdict: Verdict,
    pub basis: Basis,
    pub bounds: ThresholdBounds,
    pub carleman: Option<CarlemanReport>,
    pub abelian: Option<SeriesDiagnostics>,
}

/// Moment determinacy of ν_t.
pub fn verdict(phi: &BernsteinFunction, t: f64) -> Result<DeterminacyVerdict> {
    check_t(t, "verdict")?;
    let bounds = threshold_bounds(phi)?;
    let decided = |verdict, basis| DeterminacyVerdict {
        t,
        verdict,
        basis,
        bounds: bounds.clone(),
        carleman: None,
        abelian: None,
    };
    let lower = bounds.lower.0;
    if t < lower || (t == lower && bounds.sharp_at_lower) {
        return Ok(decided(Verdict::Determinate, Basis::ThresholdRule));
    }
    if t > bounds.upper.0 {
        let basis = if bounds.rule_trace.contains(&Rule::RatioDomination) {
            Basis::RatioDomination
        } else {
            Basis::ThresholdRule
        };
        return Ok(decided(Verdict::Indeterminate, basis));
    }
    let carleman = carleman_series(phi, t, SERIES_N)?;
    let abelian = abelian_series(phi, t, t / 10.0, SERIES_N).ok();
    let (verdict, basis) = if carleman.classification() == Classification::Diverges {
        (Verdict::Determinate, Basis::CarlemanDivergence)
    } else if abelian.as_ref().map(|a| a.classification) == Some(Classification::Converges) {
        (Verdict::Indeterminate, Basis::AbelianConvergence)
    } else {
        (Verdict::Unknown, Basis::Insufficient)
    };
    Ok(DeterminacyVerdict { t, verdict, basis, bounds, carleman: Some(carleman), abelian })
}

/// Moment determinacy of X^t for X ~ ν_1.
pub fn power_verdict(phi: &BernsteinFunction, t: f64) -> Result<DeterminacyVerdict> {
    check_t(t, "power_verdict")?;
    let bounds = threshold_bounds(phi)?;
    let flags = phi.flags();
    let (verdict, basis) = if flags.has_drift {
        if t <= 2.0 {
            (Verdict::Determinate, Basis::ThresholdRule)
        } else {
            (Verdict::Indeterminate, Basis::ThresholdRule)
        }
    } else {
        let (beta, delta) = (phi.beta(), phi.delta());
        let det_edge = if beta > 0.0 { 2.0 / beta } else { f64::INFINITY };
        if t < det_edge || (t == det_edge && phi.limsup_regular()) {
            (Verdict::Determinate, Basis::ThresholdRule)
        } else if flags.in_jurek && delta > 0.0 && t > 2.0 / delta {
            (Verdict::Indeterminate, Basis::ThresholdRule)
        } else if ratio_domination_upper(phi).is_some_and(|u| t > u) {
            (Verdict::Indeterminate, Basis::RatioDomination)
        } else {
            (Verdict::Unknown, Basis::Insufficient)
        }
    };
    Ok(DeterminacyVerdict { t, verdict, basis, bounds, carleman: None, abelian: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinCondition {
    BetaZero,
    Drift,
    JurekPowerRegular,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinStatus {
    pub applies: bool,
    pub condition: LinCondition,
}

/// Which structural condition, if any, makes ν_t and X^t share their determinacy.
pub fn lin_status(phi: &BernsteinFunction) -> LinStatus {
    let flags = phi.flags();
    let condition = if phi.beta() == 0.0 {
        LinCondition::BetaZero
    } else if flags.has_drift {
        LinCondition::Drift
    } else if flags.power_jurek && phi.limsup_regular() && phi.delta() == phi.beta() {
        LinCondition::JurekPowerRegular
    } else {
        LinCondition::None
    };
    LinStatus { applies: condition != LinCondition::None, condition }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub sharp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub exponent: f64,
    pub classification: Classification,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Flat JSON-ready record of a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub family: String,
    pub t: f64,
    pub verdict: Verdict,
    pub basis: Basis,
    pub bounds: BoundsSummary,
    pub series: Option<SeriesSummary>,
}

impl VerdictReport {
    pub fn new(phi: &BernsteinFunction, v: &DeterminacyVerdict) -> Self {
        let series = v
            .carleman
            .as_ref()
            .map(|c| &c.bound)
            .or(v.abelian.as_ref())
            .map(|s| SeriesSummary { exponent: s.exponent_estimate, classification: s.classification, n: s.n_terms });
        VerdictReport {
            family: phi.label(),
            t: v.t,
            verdict: v.verdict,
            basis: v.basis,
            bounds: BoundsSummary { lower: v.bounds.lower, upper: v.bounds.upper, sharp: v.bounds.sharp_at_lower },
            series,
        }
    }
}
