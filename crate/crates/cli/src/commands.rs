use crate::config::{ContourChoice, Format, RunConfig};
use crate::error::{CliError, Result};
use crate::render::{num, Report, Table};
use bgsemi::asymptotics::{asym_density, log_family_display_log, TailAsymptotics};
use bgsemi::bgamma::{self, calibrate_c_phi, BernsteinGammaEvaluator};
use bgsemi::checks;
use bgsemi::density::{self, Contour, DensityOptions};
use bgsemi::determinacy::{self, lin_status, BoundsSummary, DeterminacyVerdict, VerdictReport};
use bgsemi::{oracle, BernsteinFunction, Error};
use num_complex::Complex64;
use serde_json::json;

const DEFAULT_NMAX: usize = 10;

fn evaluator(cfg: &RunConfig) -> Result<BernsteinGammaEvaluator> {
    Ok(BernsteinGammaEvaluator::with_default_tol(cfg.phi()?)?)
}

fn density_options(cfg: &RunConfig, default: ContourChoice) -> DensityOptions {
    let contour = match cfg.contour().unwrap_or(default) {
        ContourChoice::Saddle => Contour::Saddle,
        ContourChoice::Fixed => Contour::Fixed(cfg.c().unwrap_or(1.0)),
    };
    DensityOptions { tol: cfg.tol(), contour }
}

/// Value or an empty field when the operation has no answer for this family.
fn optional(r: bgsemi::Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain { .. } | Error::Inapplicable { .. } | Error::Unsupported { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// φ, φ' and the inverse ϕ on the grid.
pub fn phi(cfg: &RunConfig) -> Result<Report> {
    let phi = cfg.phi()?;
    let mut table = Table::new(&["u", "phi", "phi_prime", "inverse"]);
    let mut points = Vec::new();
    for u in cfg.grid()? {
        let (f, d) = (phi.eval(u)?, phi.derivative(u)?);
        let inv = optional(phi.inverse(u))?;
        table.push(vec![num(u), num(f), num(d), opt_num(inv)]);
        points.push(json!({ "u": u, "phi": f, "phi_prime": d, "inverse": inv }));
    }
    Ok(Report { table, json: json!({ "family": phi.label(), "points": points }), default_format: Format::Csv })
}

/// W and W^t on the real grid with γ_φ and C_φ.
pub fn wgamma(cfg: &RunConfig) -> Result<Report> {
    let ev = evaluator(cfg)?;
    let t = cfg.t_or(1.0);
    let gamma = ev.gamma_phi();
    let c_phi = match calibrate_c_phi(&ev) {
        Ok(c) => Some(c),
        Err(Error::Domain { .. } | Error::Inapplicable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut table = Table::new(&["z", "W", "log_W", "W_t", "t", "gamma_phi", "C_phi"]);
    let mut points = Vec::new();
    for z in cfg.grid()? {
        let log_w = ev.log_w_real(z)?;
        let w_t = ev.eval_w_power(t, Complex64::new(z, 0.0))?.re;
        table.push(vec![
            num(z),
            num(log_w.exp()),
            num(log_w),
            num(w_t),
            num(t),
            num(gamma.value),
            opt_num(c_phi.map(|c| c.value)),
        ]);
        points.push(json!({ "z": z, "W": log_w.exp(), "log_W": log_w, "W_t": w_t }));
    }
    let json = json!({
        "family": ev.phi().label(),
        "t": t,
        "gamma_phi": gamma,
        "C_phi": c_phi,
        "points": points,
    });
    Ok(Report { table, json, default_format: Format::Csv })
}

/// Integer moments (∏_{k≤n} φ(k))^t for n = 0..=nmax.
pub fn moments(cfg: &RunConfig) -> Result<Report> {
    let phi = cfg.phi()?;
    let t = cfg.t_or(1.0);
    let m = bgamma::moments(&phi, t, cfg.nmax().unwrap_or(DEFAULT_NMAX))?;
    let mut table = Table::new(&["n", "moment", "log_moment"]);
    for (n, &l) in m.log_values.iter().enumerate() {
        table.push(vec![n.to_string(), num(m.value(n)), num(l)]);
    }
    let json = json!({ "family": phi.label(), "t": t, "moments": m.values(), "log_moments": m.log_values });
    Ok(Report { table, json, default_format: Format::Csv })
}

/// Mellin-Barnes inversion of ν_t (n-th derivative) over the grid.
pub fn density(cfg: &RunConfig) -> Result<Report> {
    let ev = evaluator(cfg)?;
    let (t, n) = (cfg.t_or(1.0), cfg.n());
    let grid = density::density_grid(&ev, t, n, &cfg.grid()?, &density_options(cfg, ContourChoice::Fixed))?;
    if let Some(f) = grid.failures.first() {
        return Err(f.error.clone().into());
    }
    let mut table = Table::new(&["x", "t", "n", "value", "abs_error", "contour_c", "contour_B"]);
    for p in &grid.points {
        table.push(vec![num(p.x), num(t), n.to_string(), num(p.value), num(p.abs_error), num(p.c), num(p.b_used)]);
    }
    let json = json!({ "family": ev.phi().label(), "t": t, "n": n, "points": grid.points, "contour": grid.contour });
    Ok(Report { table, json, default_format: Format::Csv })
}

/// Tail asymptotics against the inverted density.
pub fn asym(cfg: &RunConfig) -> Result<Report> {
    let ev = evaluator(cfg)?;
    let (t, n) = (cfg.t_or(1.0), cfg.n());
    let label = ev.phi().label();
    let xs = cfg.grid()?;
    let grid = density::density_grid(&ev, t, n, &xs, &density_options(cfg, ContourChoice::Saddle))?;
    if let Some(f) = grid.failures.first() {
        return Err(f.error.clone().into());
    }
    let tail = TailAsymptotics::new(&ev)?;
    let mut table = Table::new(&["x", "exact", "asymptotic", "ratio", "t", "n", "family"]);
    let mut points = Vec::new();
    for p in &grid.points {
        let a = tail.density(t, p.x, n)?;
        let ratio = a / p.value;
        table.push(vec![num(p.x), num(p.value), num(a), num(ratio), num(t), n.to_string(), label.clone()]);
        points.push(json!({ "x": p.x, "exact": p.value, "asymptotic": a, "ratio": ratio }));
    }
    let json = json!({ "family": label, "t": t, "n": n, "C_phi": tail.c_phi(), "points": points });
    Ok(Report { table, json, default_format: Format::Csv })
}

pub fn threshold(cfg: &RunConfig) -> Result<Report> {
    let b = determinacy::threshold_bounds(&cfg.phi()?)?;
    let summary = BoundsSummary { lower: b.lower, upper: b.upper, sharp: b.sharp_at_lower };
    let mut table = Table::new(&["lower", "upper", "sharp"]);
    table.push(vec![num(b.lower.value()), num(b.upper.value()), b.sharp_at_lower.to_string()]);
    let json = serde_json::to_value(&summary).map_err(|e| CliError::config(e.to_string()))?;
    Ok(Report { table, json, default_format: Format::Json })
}

fn verdict_report(phi: &BernsteinFunction, v: &DeterminacyVerdict) -> Result<Report> {
    let r = VerdictReport::new(phi, v);
    let json = serde_json::to_value(&r).map_err(|e| CliError::config(e.to_string()))?;
    let word = |key: &str| json[key].as_str().unwrap_or_default().to_string();
    let mut table = Table::new(&[
        "family",
        "t",
        "verdict",
        "basis",
        "lower",
        "upper",
        "sharp",
        "series_exponent",
        "series_classification",
        "series_N",
    ]);
    let series = r.series.as_ref();
    table.push(vec![
        r.family.clone(),
        num(r.t),
        word("verdict"),
        word("basis"),
        num(r.bounds.lower.value()),
        num(r.bounds.upper.value()),
        r.bounds.sharp.to_string(),
        series.map(|s| num(s.exponent)).unwrap_or_default(),
        json["series"]["classification"].as_str().unwrap_or_default().to_string(),
        series.map(|s| s.n.to_string()).unwrap_or_default(),
    ]);
    Ok(Report { table, json, default_format: Format::Json })
}

pub fn verdict(cfg: &RunConfig) -> Result<Report> {
    let phi = cfg.phi()?;
    let v = determinacy::verdict(&phi, cfg.require_t()?)?;
    verdict_report(&phi, &v)
}

pub fn power_verdict(cfg: &RunConfig) -> Result<Report> {
    let phi = cfg.phi()?;
    let v = determinacy::power_verdict(&phi, cfg.require_t()?)?;
    verdict_report(&phi, &v)
}

/// Runs the acceptance suite; the text report is the output.
pub fn selftest() -> (Vec<u8>, Result<()>) {
    let reports = checks::run_all();
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!("{r}\n"));
    }
    let failed = reports.iter().filter(|r| !r.pass()).count();
    text.push_str(&format!("{}/{} criteria pass\n", reports.len() - failed, reports.len()));
    let status = if failed == 0 { Ok(()) } else { Err(CliError::Selftest { failed, total: reports.len() }) };
    (text.into_bytes(), status)
}

struct Row {
    example: &'static str,
    family: String,
    quantity: &'static str,
    computed: f64,
    reference: f64,
}

/// Reproduction table for the gamma-ratio and logarithmic families.
pub fn examples(_cfg: &RunConfig) -> Result<Report> {
    let mut rows = Vec::new();

    let gr = BernsteinFunction::gamma_ratio(1.0, 1.0, 0.3)?;
    let b = determinacy::threshold_bounds(&gr)?;
    let sector = density::theta_phi(&gr, 100.0)?;
    for (quantity, computed, reference) in [
        ("threshold_lower", b.lower.value(), 2.0 / 0.7),
        ("threshold_upper", b.upper.value(), 2.0 / 0.7),
        ("sharp", b.sharp_at_lower as u8 as f64, 1.0),
        ("theta_phi", sector.theta_phi, 0.7 * std::f64::consts::FRAC_PI_2),
        ("lin_applies", lin_status(&gr).applies as u8 as f64, 1.0),
    ] {
        rows.push(Row { example: "gamma_ratio", family: gr.label(), quantity, computed, reference });
    }

    let gl = BernsteinFunction::gauss_laguerre(0.5, 1.0)?;
    let ev = BernsteinGammaEvaluator::with_default_tol(gl.clone())?;
    rows.push(Row {
        example: "gamma_ratio",
        family: gl.label(),
        quantity: "W(3)",
        computed: ev.eval_w(Complex64::new(3.0, 0.0))?.re,
        reference: 1.5,
    });
    let xs = [0.5, 1.0, 2.0];
    let grid = density::density_grid(&ev, 1.0, 0, &xs, &DensityOptions::fixed(1e-10))?;
    if let Some(f) = grid.failures.first() {
        return Err(f.error.clone().into());
    }
    for (p, quantity) in grid.points.iter().zip(["density(0.5)", "density(1)", "density(2)"]) {
        rows.push(Row {
            example: "gamma_ratio",
            family: gl.label(),
            quantity,
            computed: p.value,
            reference: density::gauss_laguerre_density(0.5, 1.0, p.x),
        });
    }
    rows.push(Row {
        example: "gamma_ratio",
        family: gl.label(),
        quantity: "threshold_lower",
        computed: determinacy::threshold_bounds(&gl)?.lower.value(),
        reference: 4.0,
    });

    let lg = BernsteinFunction::log(1.0)?;
    let lb = determinacy::threshold_bounds(&lg)?;
    let ev = BernsteinGammaEvaluator::with_default_tol(lg.clone())?;
    let tail = TailAsymptotics::new(&ev)?;
    let x = 15.0;
    let display = log_family_display_log(tail.c_phi().value, 1.0, 1.0, x, oracle::ei);
    let ratio = (tail.log_density(1.0, x, 0)?.log_abs - display).exp();
    for (quantity, computed, reference) in [
        ("threshold_lower", lb.lower.value(), f64::INFINITY),
        ("threshold_upper", lb.upper.value(), f64::INFINITY),
        ("beta", lg.beta(), 0.0),
        ("lin_applies", lin_status(&lg).applies as u8 as f64, 1.0),
        ("asym_over_display(15)", ratio, 1.0),
    ] {
        rows.push(Row { example: "logarithmic", family: lg.label(), quantity, computed, reference });
    }
    // classical case for orientation: ν_1 tail of φ(u) = u is exactly e^{-x}
    let id = BernsteinGammaEvaluator::with_default_tol(BernsteinFunction::identity())?;
    rows.push(Row {
        example: "identity",
        family: id.phi().label(),
        quantity: "asym_density(t=1,x=10)",
        computed: asym_density(&id, 1.0, 10.0, 0)?,
        reference: (-10f64).exp(),
    });

    let mut table = Table::new(&["example", "family", "quantity", "computed", "reference", "abs_diff"]);
    let mut json_rows = Vec::new();
    for r in &rows {
        let diff = if r.computed == r.reference { 0.0 } else { (r.computed - r.reference).abs() };
        table.push(vec![
            r.example.to_string(),
            r.family.clone(),
            r.quantity.to_string(),
            num(r.computed),
            num(r.reference),
            num(diff),
        ]);
        json_rows.push(json!({
            "example": r.example,
            "family": r.family,
            "quantity": r.quantity,
            "computed": num(r.computed),
            "reference": num(r.reference),
            "abs_diff": diff,
        }));
    }
    Ok(Report { table, json: json!({ "rows": json_rows }), default_format: Format::Csv })
}
