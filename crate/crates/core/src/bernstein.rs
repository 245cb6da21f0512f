//! Bernstein functions φ(u) = k + du + ∫(1 - e^{-uy}) μ(dy): the family
//! catalog, Lévy triplets, class flags and indices.

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{digamma_diff, e1, ln_gamma_ratio, ln_gamma_real};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const QUAD_ABS: f64 = 1e-12;
const QUAD_REL: f64 = 1e-13;
/// Largest |Im z| accepted by quadrature-backed complex evaluation.
pub const TRIPLET_COMPLEX_LIMIT: f64 = 1e3;

/// Built-in Lévy densities, referenced by name from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "v", rename_all = "snake_case")]
pub enum LevyDensity {
    /// e^{-λy}/y
    ExpOverY { lambda: f64 },
    /// w e^{-ry}
    Exponential { weight: f64, rate: f64 },
    /// α/Γ(1-α) e^{-my} y^{-1-α}
    TemperedStable { alpha: f64, m: f64 },
}

impl LevyDensity {
    pub fn name(&self) -> &'static str {
        match self {
            LevyDensity::ExpOverY { .. } => "exp_over_y",
            LevyDensity::Exponential { .. } => "exponential",
            LevyDensity::TemperedStable { .. } => "tempered_stable",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LevyDensity::ExpOverY { lambda } => lambda > 0.0 && lambda.is_finite(),
            LevyDensity::Exponential { weight, rate } => {
                weight >= 0.0 && rate > 0.0 && weight.is_finite() && rate.is_finite()
            }
            LevyDensity::TemperedStable { alpha, m } => alpha > 0.0 && alpha < 1.0 && m >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::parameter("levy_density", format!("bad parameters for {self:?}")))
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.ln_eval(y).exp()
    }

    /// y·v(y), formed in log space.
    pub fn y_times(&self, y: f64) -> f64 {
        (y.ln() + self.ln_eval(y)).exp()
    }

    /// log v(y), finite where v(y) itself may overflow near 0.
    pub fn ln_eval(&self, y: f64) -> f64 {
        match *self {
            LevyDensity::ExpOverY { lambda } => -lambda * y - y.ln(),
            LevyDensity::Exponential { weight, rate } => weight.ln() - rate * y,
            LevyDensity::TemperedStable { alpha, m } => {
                alpha.ln() - ln_gamma_real(1.0 - alpha) - m * y - (1.0 + alpha) * y.ln()
            }
        }
    }

    /// v(0+)
    pub fn at_zero(&self) -> f64 {
        match *self {
            LevyDensity::Exponential { weight, .. } => weight,
            _ => f64::INFINITY,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match *self {
            LevyDensity::Exponential { weight, rate } => weight / rate,
            _ => f64::INFINITY,
        }
    }

    /// Tail μ̄(y) = ∫_y^∞ v(r) dr.
    pub fn tail(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(self.total_mass());
        }
        Ok(match *self {
            LevyDensity::ExpOverY { lambda } => e1(lambda * y),
            LevyDensity::Exponential { weight, rate } => weight / rate * (-rate * y).exp(),
            LevyDensity::TemperedStable { alpha, m: 0.0 } => {
                (-alpha * y.ln() - ln_gamma_real(1.0 - alpha)).exp()
            }
            LevyDensity::TemperedStable { .. } => {
                quad::integrate_to_inf(|w: f64| {
                    let r = y * w.exp();
                    self.eval(r) * r
                }, 0.0, 1e-15, 1e-12)?
                .value
            }
        })
    }

    /// Index of the density's contribution to φ.
    fn index(&self) -> f64 {
        match *self {
            LevyDensity::TemperedStable { alpha, .. } => alpha,
            _ => 0.0,
        }
    }
}

/// One component of a Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasurePart {
    Density(LevyDensity),
    /// Point masses (y_i, w_i).
    Atoms(Vec<(f64, f64)>),
}

/// Killing rate, drift and Lévy measure. An empty measure list means μ = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub killing: f64,
    pub drift: f64,
    pub measure: Vec<MeasurePart>,
}

fn one_minus_exp_neg(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        w * (1.0 - w * (0.5 - w / 6.0 + w * w / 24.0))
    } else {
        1.0 - (-w).exp()
    }
}

impl LevyTriplet {
    pub fn new(killing: f64, drift: f64, measure: Vec<MeasurePart>) -> Result<Self> {
        if !(killing >= 0.0 && killing.is_finite()) || !(drift >= 0.0 && drift.is_finite()) {
            return Err(Error::parameter("levy_triplet", "killing and drift must be finite and non-negative"));
        }
        for part in &measure {
            match part {
                MeasurePart::Density(d) => d.validate()?,
                MeasurePart::Atoms(a) => {
                    if a.iter().any(|&(y, w)| !(y > 0.0 && y.is_finite() && w >= 0.0 && w.is_finite())) {
                        return Err(Error::parameter("levy_triplet", "atoms need y > 0 and w >= 0"));
                    }
                }
            }
        }
        let t = LevyTriplet { killing, drift, measure };
        // ∫(1∧y)μ(dy) < ∞
        let small = t.moment_one_wedge()?;
        if !small.is_finite() {
            return Err(Error::parameter("levy_triplet", "∫(1∧y)μ(dy) diverges"));
        }
        if killing == 0.0 && drift == 0.0 && t.total_mass() == 0.0 {
            return Err(Error::parameter("levy_triplet", "trivial triplet φ ≡ 0"));
        }
        Ok(t)
    }

    fn moment_one_wedge(&self) -> Result<f64> {
        let mut s = 0.0;
        for part in &self.measure {
            match part {
                MeasurePart::Density(d) => {
                    s += quad::integrate_positive_axis(|y: f64| (y.min(1.0).ln() + d.ln_eval(y)).exp(), 1e-10, 1e-10)?.value;
                }
                MeasurePart::Atoms(a) => s += a.iter().map(|&(y, w)| y.min(1.0) * w).sum::<f64>(),
            }
        }
        Ok(s)
    }

    pub fn total_mass(&self) -> f64 {
        self.measure
            .iter()
            .map(|p| match p {
                MeasurePart::Density(d) => d.total_mass(),
                MeasurePart::Atoms(a) => a.iter().map(|x| x.1).sum(),
            })
            .sum()
    }

    /// v(0+) summed over the absolutely continuous parts.
    pub fn v_at_zero(&self) -> f64 {
        self.measure
            .iter()
            .map(|p| match p {
                MeasurePart::Density(d) => d.at_zero(),
                MeasurePart::Atoms(_) => 0.0,
            })
            .sum()
    }

    /// μ̄(y) = μ([y, ∞)).
    pub fn tail(&self, y: f64) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.measure {
            match p {
                MeasurePart::Density(d) => s += d.tail(y)?,
                MeasurePart::Atoms(a) => s += a.iter().filter(|x| x.0 >= y).map(|x| x.1).sum::<f64>(),
            }
        }
        Ok(s)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let mut s = self.killing + self.drift * u;
        for p in &self.measure {
            match p {
                MeasurePart::Density(d) => {
                    s += quad::integrate_positive_axis(|y: f64| -(-u * y).exp_m1() / y * d.y_times(y), QUAD_ABS, QUAD_REL)
                        .map_err(|e| relabel(e, "eval"))?
                        .value;
                }
                MeasurePart::Atoms(a) => s += a.iter().map(|&(y, w)| -w * (-u * y).exp_m1()).sum::<f64>(),
            }
        }
        Ok(s)
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        if z.im.abs() > TRIPLET_COMPLEX_LIMIT {
            return Err(Error::domain(
                "eval_complex",
                format!("|Im z| = {} exceeds {TRIPLET_COMPLEX_LIMIT} for quadrature-backed families", z.im.abs()),
            ));
        }
        let mut s = Complex64::new(self.killing, 0.0) + z * self.drift;
        for p in &self.measure {
            match p {
                MeasurePart::Density(d) => {
                    s += quad::integrate_positive_axis(|y: f64| one_minus_exp_neg(z * y) / y * d.y_times(y), QUAD_ABS, QUAD_REL)
                        .map_err(|e| relabel(e, "eval_complex"))?
                        .value;
                }
                MeasurePart::Atoms(a) => {
                    for &(y, w) in a {
                        s += one_minus_exp_neg(z * y) * w;
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn derivative(&self, u: f64) -> Result<f64> {
        let mut s = self.drift;
        for p in &self.measure {
            match p {
                MeasurePart::Density(d) => {
                    s += quad::integrate_positive_axis(|y: f64| (-u * y).exp() * d.y_times(y), QUAD_ABS, QUAD_REL)
                        .map_err(|e| relabel(e, "derivative"))?
                        .value;
                }
                MeasurePart::Atoms(a) => s += a.iter().map(|&(y, w)| w * y * (-u * y).exp()).sum::<f64>(),
            }
        }
        Ok(s)
    }

    fn merge(parts: &[LevyTriplet]) -> LevyTriplet {
        LevyTriplet {
            killing: parts.iter().map(|p| p.killing).sum(),
            drift: parts.iter().map(|p| p.drift).sum(),
            measure: parts.iter().flat_map(|p| p.measure.iter().cloned()).collect(),
        }
    }
}

fn relabel(e: Error, op: &'static str) -> Error {
    match e {
        Error::Convergence { achieved, detail, .. } => Error::Convergence { op, achieved, detail },
        other => other,
    }
}

/// Class membership of a Bernstein function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub has_drift: bool,
    pub is_bounded: bool,
    pub in_jurek: bool,
    pub power_jurek: bool,
    pub is_complete: bool,
    /// v(0+); NaN when unknown.
    pub v_at_zero: f64,
}

/// Declared φ(u) ~ C u^α at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularVariation {
    pub alpha: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Identity,
    Constant { k: f64 },
    PowerShifted { alpha: f64, m: f64 },
    GammaRatio { alpha: f64, a: f64, b: f64 },
    Log { lambda: f64 },
    BoundedRatio,
    Triplet(LevyTriplet),
    Sum(Vec<BernsteinFunction>),
    Composition { outer: Box<BernsteinFunction>, inner: Box<BernsteinFunction> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinFunction {
    family: Family,
    triplet: Option<LevyTriplet>,
    flags: ClassFlags,
    beta: f64,
    delta: f64,
    /// limsup u^{-β} φ(u) < ∞, declared rather than estimated.
    limsup_regular: bool,
    regvar: Option<RegularVariation>,
    killing: f64,
    drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    Declared,
    Regression,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub beta: f64,
    pub delta: f64,
    pub method: IndexMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCondition {
    pub y_alpha: f64,
    pub m_min: f64,
    pub holds: bool,
}

const CATALOG_FLAGS: ClassFlags = ClassFlags {
    has_drift: false,
    is_bounded: false,
    in_jurek: true,
    power_jurek: true,
    is_complete: true,
    v_at_zero: f64::INFINITY,
};

impl BernsteinFunction {
    pub fn identity() -> Self {
        BernsteinFunction {
            family: Family::Identity,
            triplet: Some(LevyTriplet { killing: 0.0, drift: 1.0, measure: vec![] }),
            flags: ClassFlags { has_drift: true, v_at_zero: 0.0, ..CATALOG_FLAGS },
            beta: 1.0,
            delta: 1.0,
            limsup_regular: true,
            regvar: None,
            killing: 0.0,
            drift: 1.0,
        }
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::parameter("constant", "k must be positive"));
        }
        Ok(BernsteinFunction {
            family: Family::Constant { k },
            triplet: Some(LevyTriplet { killing: k, drift: 0.0, measure: vec![] }),
            flags: ClassFlags { is_bounded: true, v_at_zero: 0.0, ..CATALOG_FLAGS },
            beta: 0.0,
            delta: 0.0,
            limsup_regular: true,
            regvar: None,
            killing: k,
            drift: 0.0,
        })
    }

    /// (u + m)^α with α ∈ (0,1), m ≥ 0.
    pub fn power_shifted(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(m >= 0.0 && m.is_finite()) {
            return Err(Error::parameter("power_shifted", "need alpha in (0,1) and m >= 0"));
        }
        let killing = m.powf(alpha);
        Ok(BernsteinFunction {
            family: Family::PowerShifted { alpha, m },
            triplet: Some(LevyTriplet {
                killing,
                drift: 0.0,
                measure: vec![MeasurePart::Density(LevyDensity::TemperedStable { alpha, m })],
            }),
            flags: CATALOG_FLAGS,
            beta: alpha,
            delta: alpha,
            limsup_regular: true,
            regvar: Some(RegularVariation { alpha, constant: 1.0 }),
            killing,
            drift: 0.0,
        })
    }

    /// Γ(αu + a)/Γ(αu + b) with α ∈ (0,1], 0 ≤ b < a < b + 1.
    pub fn gamma_ratio(alpha: f64, a: f64, b: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !(b >= 0.0 && b < a && a < b + 1.0) {
            return Err(Error::parameter("gamma_ratio", "need alpha in (0,1] and 0 <= b < a < b+1"));
        }
        let killing = if b == 0.0 { 0.0 } else { (ln_gamma_real(a) - ln_gamma_real(b)).exp() };
        let idx = a - b;
        Ok(BernsteinFunction {
            family: Family::GammaRatio { alpha, a, b },
            triplet: None,
            flags: CATALOG_FLAGS,
            beta: idx,
            delta: idx,
            limsup_regular: true,
            regvar: Some(RegularVariation { alpha: idx, constant: alpha.powf(idx) }),
            killing,
            drift: 0.0,
        })
    }

    /// The Γ-ratio member Γ(αu + αm + 1)/Γ(αu + αm + 1 - α) whose Bernstein-gamma
    /// function is Γ(αz + αm + 1 - α)/Γ(αm + 1).
    pub fn gauss_laguerre(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(m >= 0.0) {
            return Err(Error::parameter("gauss_laguerre", "need alpha in (0,1) and m >= 0"));
        }
        let a = alpha * m + 1.0;
        Self::gamma_ratio(alpha, a, a - alpha)
    }

    /// log(1 + u/λ)
    pub fn log(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::parameter("log", "lambda must be positive"));
        }
        Ok(BernsteinFunction {
            family: Family::Log { lambda },
            triplet: Some(LevyTriplet {
                killing: 0.0,
                drift: 0.0,
                measure: vec![MeasurePart::Density(LevyDensity::ExpOverY { lambda })],
            }),
            flags: CATALOG_FLAGS,
            beta: 0.0,
            delta: 0.0,
            limsup_regular: false,
            regvar: None,
            killing: 0.0,
            drift: 0.0,
        })
    }

    /// u/(u + 1)
    pub fn bounded_ratio() -> Self {
        BernsteinFunction {
            family: Family::BoundedRatio,
            triplet: Some(LevyTriplet {
                killing: 0.0,
                drift: 0.0,
                measure: vec![MeasurePart::Density(LevyDensity::Exponential { weight: 1.0, rate: 1.0 })],
            }),
            flags: ClassFlags { is_bounded: true, v_at_zero: 1.0, ..CATALOG_FLAGS },
            beta: 0.0,
            delta: 0.0,
            limsup_regular: true,
            regvar: None,
            killing: 0.0,
            drift: 0.0,
        }
    }

    pub fn from_triplet(t: LevyTriplet) -> Result<Self> {
        let t = LevyTriplet::new(t.killing, t.drift, t.measure)?;
        let has_atoms = t.measure.iter().any(|p| matches!(p, MeasurePart::Atoms(a) if !a.is_empty()));
        let mass = t.total_mass();
        let has_drift = t.drift > 0.0;
        let is_bounded = !has_drift && mass.is_finite();
        let complete = !has_atoms;
        let density_index = t
            .measure
            .iter()
            .map(|p| match p {
                MeasurePart::Density(d) => d.index(),
                MeasurePart::Atoms(_) => 0.0,
            })
            .fold(0.0, f64::max);
        let (beta, limsup_regular) = if has_drift {
            (1.0, true)
        } else if is_bounded {
            (0.0, true)
        } else if density_index > 0.0 {
            (density_index, true)
        } else {
            (0.0, false)
        };
        Ok(BernsteinFunction {
            flags: ClassFlags {
                has_drift,
                is_bounded,
                in_jurek: !has_atoms,
                power_jurek: complete,
                is_complete: complete,
                v_at_zero: t.v_at_zero(),
            },
            beta,
            delta: beta,
            limsup_regular,
            regvar: None,
            killing: t.killing,
            drift: t.drift,
            triplet: Some(t.clone()),
            family: Family::Triplet(t),
        })
    }

    pub fn sum(parts: Vec<BernsteinFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::parameter("sum", "empty sum"));
        }
        let all = |f: fn(&ClassFlags) -> bool| parts.iter().all(|p| f(&p.flags));
        let beta = parts.iter().map(|p| p.beta).fold(0.0, f64::max);
        let delta = parts.iter().map(|p| p.delta).fold(0.0, f64::max);
        let limsup_regular = parts.iter().filter(|p| p.beta == beta).all(|p| p.limsup_regular);
        let triplet = parts
            .iter()
            .map(|p| p.triplet.clone())
            .collect::<Option<Vec<_>>>()
            .map(|ts| LevyTriplet::merge(&ts));
        let complete = all(|f| f.is_complete);
        let flags = ClassFlags {
            has_drift: parts.iter().any(|p| p.flags.has_drift),
            is_bounded: all(|f| f.is_bounded),
            in_jurek: all(|f| f.in_jurek),
            power_jurek: complete,
            is_complete: complete,
            v_at_zero: parts.iter().map(|p| p.flags.v_at_zero).sum(),
        };
        Ok(BernsteinFunction {
            killing: parts.iter().map(|p| p.killing).sum(),
            drift: parts.iter().map(|p| p.drift).sum(),
            family: Family::Sum(parts),
            triplet,
            flags,
            beta,
            delta,
            limsup_regular,
            regvar: None,
        })
    }

    /// u ↦ outer(inner(u)).
    pub fn compose(outer: BernsteinFunction, inner: BernsteinFunction) -> Result<Self> {
        let killing = outer.eval(inner.killing)?;
        let drift = outer.drift * inner.drift;
        let has_drift = outer.flags.has_drift && inner.flags.has_drift;
        let is_bounded = outer.flags.is_bounded || inner.flags.is_bounded;
        let mut f = BernsteinFunction {
            family: Family::Composition { outer: Box::new(outer), inner: Box::new(inner) },
            triplet: None,
            flags: ClassFlags {
                has_drift,
                is_bounded,
                in_jurek: false,
                power_jurek: false,
                is_complete: false,
                v_at_zero: f64::NAN,
            },
            beta: 0.0,
            delta: 0.0,
            limsup_regular: has_drift,
            regvar: None,
            killing,
            drift,
        };
        if has_drift {
            f.beta = 1.0;
            f.delta = 1.0;
        } else if !is_bounded {
            let est = regress_indices(&f, 1e2, 1e8)?;
            f.beta = est.beta.clamp(0.0, 1.0);
            f.delta = est.delta.clamp(0.0, f.beta);
        }
        Ok(f)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }
    pub fn flags(&self) -> ClassFlags {
        self.flags
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn limsup_regular(&self) -> bool {
        self.limsup_regular
    }
    pub fn regular_variation(&self) -> Option<RegularVariation> {
        self.regvar
    }
    pub fn killing(&self) -> f64 {
        self.killing
    }
    pub fn drift(&self) -> f64 {
        self.drift
    }
    /// Executable Lévy triplet; `None` for families whose measure is not explicit.
    pub fn triplet(&self) -> Option<&LevyTriplet> {
        self.triplet.as_ref()
    }

    pub fn is_catalog(&self) -> bool {
        !matches!(self.family, Family::Triplet(_) | Family::Sum(_) | Family::Composition { .. })
    }

    pub fn is_constant(&self) -> bool {
        match &self.family {
            Family::Constant { .. } => true,
            Family::Triplet(t) => t.drift == 0.0 && t.total_mass() == 0.0,
            Family::Sum(p) => p.iter().all(|f| f.is_constant()),
            Family::Composition { outer, inner } => outer.is_constant() || inner.is_constant(),
            _ => false,
        }
    }

    /// Short machine-readable label, e.g. `power_shifted(alpha=0.5,m=1)`.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Identity => "identity".into(),
            Family::Constant { k } => format!("constant(k={k})"),
            Family::PowerShifted { alpha, m } => format!("power_shifted(alpha={alpha},m={m})"),
            Family::GammaRatio { alpha, a, b } => format!("gamma_ratio(alpha={alpha},a={a},b={b})"),
            Family::Log { lambda } => format!("log(lambda={lambda})"),
            Family::BoundedRatio => "bounded_ratio".into(),
            Family::Triplet(t) => {
                let parts: Vec<String> = t
                    .measure
                    .iter()
                    .map(|p| match p {
                        MeasurePart::Density(d) => d.name().to_string(),
                        MeasurePart::Atoms(a) => format!("atoms[{}]", a.len()),
                    })
                    .collect();
                format!("triplet(k={},d={},mu=[{}])", t.killing, t.drift, parts.join(";"))
            }
            Family::Sum(p) => format!("sum({})", p.iter().map(|f| f.label()).collect::<Vec<_>>().join("+")),
            Family::Composition { outer, inner } => format!("compose({},{})", outer.label(), inner.label()),
        }
    }

    /// φ(u) for u ≥ 0.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::domain("eval", format!("u = {u} must be >= 0")));
        }
        Ok(match &self.family {
            Family::Identity => u,
            Family::Constant { k } => *k,
            Family::PowerShifted { alpha, m } => (u + m).powf(*alpha),
            Family::GammaRatio { alpha, a, b } => {
                if *b == 0.0 && u == 0.0 {
                    0.0
                } else {
                    ln_gamma_ratio(Complex64::new(alpha * u + b, 0.0), a - b).re.exp()
                }
            }
            Family::Log { lambda } => (u / lambda).ln_1p(),
            Family::BoundedRatio => u / (u + 1.0),
            Family::Triplet(t) => t.eval(u)?,
            Family::Sum(p) => p.iter().map(|f| f.eval(u)).sum::<Result<f64>>()?,
            Family::Composition { outer, inner } => {
                if u.is_infinite() {
                    return Ok(outer.eval(inner.phi_infinity())?.min(outer.phi_infinity()));
                }
                outer.eval(inner.eval(u)?)?
            }
        })
    }

    /// Analytic extension to Re z > 0.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re > 0.0) {
            return Err(Error::domain("eval_complex", format!("Re z = {} must be > 0", z.re)));
        }
        Ok(match &self.family {
            Family::Identity => z,
            Family::Constant { k } => Complex64::new(*k, 0.0),
            Family::PowerShifted { alpha, m } => (z + m).powf(*alpha),
            Family::GammaRatio { alpha, a, b } => ln_gamma_ratio(z * alpha + b, a - b).exp(),
            Family::Log { lambda } => (1.0 + z / lambda).ln(),
            Family::BoundedRatio => z / (z + 1.0),
            Family::Triplet(t) => t.eval_complex(z)?,
            Family::Sum(p) => {
                let mut s = Complex64::new(0.0, 0.0);
                for f in p {
                    s += f.eval_complex(z)?;
                }
                s
            }
            Family::Composition { outer, inner } => {
                let w = inner.eval_complex(z)?;
                if w.re <= 0.0 {
                    return Err(Error::domain("eval_complex", "inner function left the right half-plane"));
                }
                outer.eval_complex(w)?
            }
        })
    }

    /// Principal log φ(z), continuous on Re z > 0 because Re φ(z) > 0 there.
    pub fn ln_eval_complex(&self, z: Complex64) -> Result<Complex64> {
        match &self.family {
            Family::Identity => {
                if !(z.re > 0.0) {
                    return Err(Error::domain("eval_complex", format!("Re z = {} must be > 0", z.re)));
                }
                Ok(z.ln())
            }
            Family::GammaRatio { alpha, a, b } => {
                if !(z.re > 0.0) {
                    return Err(Error::domain("eval_complex", format!("Re z = {} must be > 0", z.re)));
                }
                let d = ln_gamma_ratio(z * alpha + b, a - b);
                let two_pi = 2.0 * std::f64::consts::PI;
                let im = d.im - two_pi * (d.im / two_pi).round();
                Ok(Complex64::new(d.re, im))
            }
            _ => Ok(self.eval_complex(z)?.ln()),
        }
    }

    pub fn derivative(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::domain("derivative", format!("u = {u} must be >= 0")));
        }
        Ok(match &self.family {
            Family::Identity => 1.0,
            Family::Constant { .. } => 0.0,
            Family::PowerShifted { alpha, m } => alpha * (u + m).powf(alpha - 1.0),
            Family::GammaRatio { alpha, a, b } => {
                if *b == 0.0 && u == 0.0 {
                    // Γ(a)·α near the pole: φ(u) ≈ Γ(a)αu
                    (ln_gamma_real(*a)).exp() * alpha
                } else {
                    self.eval(u)? * alpha * digamma_diff(alpha * u + b, a - b)
                }
            }
            Family::Log { lambda } => 1.0 / (lambda + u),
            Family::BoundedRatio => 1.0 / ((u + 1.0) * (u + 1.0)),
            Family::Triplet(t) => t.derivative(u)?,
            Family::Sum(p) => p.iter().map(|f| f.derivative(u)).sum::<Result<f64>>()?,
            Family::Composition { outer, inner } => outer.derivative(inner.eval(u)?)? * inner.derivative(u)?,
        })
    }

    /// φ'(u)/φ(u)
    pub fn log_derivative(&self, u: f64) -> Result<f64> {
        match &self.family {
            Family::Identity => Ok(1.0 / u),
            Family::PowerShifted { alpha, m } => Ok(alpha / (u + m)),
            Family::GammaRatio { alpha, a, b } if u > 0.0 || *b > 0.0 => {
                Ok(alpha * digamma_diff(alpha * u + b, a - b))
            }
            _ => Ok(self.derivative(u)? / self.eval(u)?),
        }
    }

    /// φ(∞), possibly infinite.
    pub fn phi_infinity(&self) -> f64 {
        match &self.family {
            Family::Constant { k } => *k,
            Family::BoundedRatio => 1.0,
            Family::Triplet(t) => {
                if t.drift > 0.0 {
                    f64::INFINITY
                } else {
                    t.killing + t.total_mass()
                }
            }
            Family::Sum(p) => p.iter().map(|f| f.phi_infinity()).sum(),
            Family::Composition { outer, inner } => {
                let i = inner.phi_infinity();
                if i.is_finite() {
                    outer.eval(i).unwrap_or(f64::NAN)
                } else {
                    outer.phi_infinity()
                }
            }
            _ => f64::INFINITY,
        }
    }

    /// Continuous inverse ϕ on [φ(0), φ(∞)).
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if self.is_constant() {
            return Err(Error::domain("inverse", "φ is constant"));
        }
        let k = self.killing;
        let top = self.phi_infinity();
        if !(y >= k && y < top) {
            return Err(Error::domain(
                "inverse",
                format!("y = {y} outside [k, φ(∞)) = [{k}, {top})"),
            ));
        }
        match &self.family {
            Family::Identity => return Ok(y),
            Family::PowerShifted { alpha, m } => return Ok((y.powf(1.0 / alpha) - m).max(0.0)),
            Family::Log { lambda } => return Ok(lambda * y.exp_m1()),
            Family::BoundedRatio => return Ok(y / (1.0 - y)),
            Family::Triplet(t) if t.measure.is_empty() => return Ok((y - t.killing) / t.drift),
            _ => {}
        }
        if y == k {
            return Ok(0.0);
        }
        let mut hi = 1.0f64;
        while self.eval(hi)? < y {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::convergence("inverse", hi, "failed to bracket the preimage"));
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        while hi - lo > 1e-14 * hi.max(1e-300) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut u = 0.5 * (lo + hi);
        for _ in 0..2 {
            let d = self.derivative(u)?;
            if d > 0.0 {
                let next = u - (self.eval(u)? - y) / d;
                if next.is_finite() && next >= 0.0 {
                    u = next;
                }
            }
        }
        Ok(u)
    }

    /// Blumenthal-Getoor and lower index: declared for catalog families, otherwise
    /// estimated by regression over a geometric grid in [u_lo, u_hi].
    pub fn estimate_indices(&self, u_lo: f64, u_hi: f64) -> Result<IndexEstimate> {
        check_index_grid(u_lo, u_hi)?;
        if self.is_constant() {
            return Err(Error::parameter("estimate_indices", "φ is constant"));
        }
        if self.is_catalog() {
            return Ok(IndexEstimate { beta: self.beta, delta: self.delta, method: IndexMethod::Declared });
        }
        regress_indices(self, u_lo, u_hi)
    }

    /// Sufficient condition for φ/(u+m)^α to be a Bernstein function, for all m ≥ m_min.
    pub fn ratio_condition(&self, alpha: f64) -> Result<RatioCondition> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::parameter("ratio_condition", "alpha must lie in (0,1)"));
        }
        if !self.flags.has_drift {
            return Err(Error::inapplicable("ratio_condition", "φ has no drift"));
        }
        let t = self
            .triplet
            .as_ref()
            .ok_or_else(|| Error::unsupported("ratio_condition", format!("no explicit Lévy tail for {}", self.label())))?;
        let d = t.drift;
        let threshold = d * (1.0 - alpha);
        let q = |y: f64| -> Result<f64> { Ok(y * t.tail(y)?) };
        let grid = quad::geomspace(1e-12, 1e12, 481);
        let mut y_alpha = f64::INFINITY;
        let mut prev = 0.0;
        for &y in &grid {
            if q(y)? > threshold {
                let (mut lo, mut hi) = (prev, y);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if q(mid)? > threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                y_alpha = hi;
                break;
            }
            prev = y;
        }
        let tail_half = if y_alpha.is_infinite() { 0.0 } else { t.tail(0.5 * y_alpha)? };
        let m_min = (tail_half + t.killing) / d;
        Ok(RatioCondition { y_alpha, m_min, holds: m_min.is_finite() })
    }
}

fn check_index_grid(u_lo: f64, u_hi: f64) -> Result<()> {
    if !(u_lo >= 1.0 && u_hi > u_lo * (1.0 + 1e-9) && u_hi.is_finite()) {
        return Err(Error::parameter(
            "estimate_indices",
            format!("degenerate grid [{u_lo}, {u_hi}]; need 1 <= u_lo < u_hi"),
        ));
    }
    Ok(())
}

/// Raw slope estimator of log φ against log u, ignoring declared indices.
///
/// Reports a single value when the local slopes spread less than 0.02 and
/// (max slope, min slope) otherwise.
pub fn regress_indices(phi: &BernsteinFunction, u_lo: f64, u_hi: f64) -> Result<IndexEstimate> {
    check_index_grid(u_lo, u_hi)?;
    let us = quad::geomspace(u_lo, u_hi, 41);
    let xs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
    let ys: Vec<f64> = us.iter().map(|&u| phi.eval(u).map(f64::ln)).collect::<Result<_>>()?;
    let local: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    let max = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = local.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min < 0.02 {
        let slope = least_squares_slope(&xs, &ys);
        Ok(IndexEstimate { beta: slope, delta: slope, method: IndexMethod::Regression })
    } else {
        Ok(IndexEstimate { beta: max, delta: min, method: IndexMethod::Interval })
    }
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Potential density e^{-my} y^{α-1}/Γ(α) of (u + m)^α.
pub fn potential_density_reference(alpha: f64, m: f64, y: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(m >= 0.0) || !(y > 0.0) {
        return Err(Error::parameter("potential_density_reference", "need alpha in (0,1), m >= 0, y > 0"));
    }
    Ok((-m * y + (alpha - 1.0) * y.ln() - ln_gamma_real(alpha)).exp())
}

/// The six closed-form catalog families with representative parameters.
pub fn catalog_samples() -> Vec<BernsteinFunction> {
    vec![
        BernsteinFunction::identity(),
        BernsteinFunction::constant(2.0).unwrap(),
        BernsteinFunction::power_shifted(0.5, 1.0).unwrap(),
        BernsteinFunction::gamma_ratio(1.0, 1.0, 0.3).unwrap(),
        BernsteinFunction::log(1.0).unwrap(),
        BernsteinFunction::bounded_ratio(),
    ]
}

/// Family descriptor in the configuration grammar, e.g.
/// `family = "power_shifted", alpha = 0.5, m = 1.0` or
/// `family = "triplet", d = 1, v = "exp_over_y", lambda = 1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyConfig {
    Identity,
    Constant {
        k: f64,
    },
    PowerShifted {
        alpha: f64,
        #[serde(default)]
        m: f64,
    },
    GaussLaguerre {
        alpha: f64,
        m: f64,
    },
    GammaRatio {
        alpha: f64,
        a: f64,
        b: f64,
    },
    Log {
        lambda: f64,
    },
    BoundedRatio,
    Triplet {
        #[serde(default)]
        k: f64,
        #[serde(default)]
        d: f64,
        #[serde(default)]
        atoms: Vec<(f64, f64)>,
        #[serde(flatten)]
        v: Option<LevyDensity>,
    },
    Sum {
        parts: Vec<FamilyConfig>,
    },
    Composition {
        outer: Box<FamilyConfig>,
        inner: Box<FamilyConfig>,
    },
}

impl FamilyConfig {
    /// Parses either a TOML document or the comma-separated one-line form.
    pub fn parse(text: &str) -> Result<Self> {
        let table = parse_config_table(text)?;
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::parameter("family_config", e.message().to_string()))
    }

    pub fn build(&self) -> Result<BernsteinFunction> {
        match self {
            FamilyConfig::Identity => Ok(BernsteinFunction::identity()),
            FamilyConfig::Constant { k } => BernsteinFunction::constant(*k),
            FamilyConfig::PowerShifted { alpha, m } => BernsteinFunction::power_shifted(*alpha, *m),
            FamilyConfig::GaussLaguerre { alpha, m } => BernsteinFunction::gauss_laguerre(*alpha, *m),
            FamilyConfig::GammaRatio { alpha, a, b } => BernsteinFunction::gamma_ratio(*alpha, *a, *b),
            FamilyConfig::Log { lambda } => BernsteinFunction::log(*lambda),
            FamilyConfig::BoundedRatio => Ok(BernsteinFunction::bounded_ratio()),
            FamilyConfig::Triplet { k, d, atoms, v } => {
                let mut measure: Vec<MeasurePart> = v.iter().cloned().map(MeasurePart::Density).collect();
                if !atoms.is_empty() {
                    measure.push(MeasurePart::Atoms(atoms.clone()));
                }
                BernsteinFunction::from_triplet(LevyTriplet::new(*k, *d, measure)?)
            }
            FamilyConfig::Sum { parts } => {
                BernsteinFunction::sum(parts.iter().map(FamilyConfig::build).collect::<Result<_>>()?)
            }
            FamilyConfig::Composition { outer, inner } => BernsteinFunction::compose(outer.build()?, inner.build()?),
        }
    }
}

/// Reads configuration text as a TOML table. Text that is not a TOML
/// document is retried as the body of an inline table, with newlines
/// acting as separators.
pub fn parse_config_table(text: &str) -> Result<toml::Table> {
    match text.parse::<toml::Table>() {
        Ok(t) => Ok(t),
        Err(first) => {
            let body: Vec<&str> = text
                .lines()
                .map(|l| l.trim().trim_end_matches(','))
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect();
            let wrapped = format!("config = {{ {} }}", body.join(", "));
            match wrapped.parse::<toml::Table>() {
                Ok(mut t) => match t.remove("config") {
                    Some(toml::Value::Table(inner)) => Ok(inner),
                    _ => Err(Error::parameter("parse_config", first.message().to_string())),
                },
                Err(_) => Err(Error::parameter("parse_config", first.message().to_string())),
            }
        }
    }
}
