//! One function per subcommand. Each returns an [`Outcome`]; printing and exit codes live in `main`.

use serde::Serialize;
use serde_json::{json, Value};

use weiltrace_core::bruhat::ExactLevelFunction;
use weiltrace_core::global::{explicit_formula_check, find_zeros, pnt_check, poisson_check, residual_curve};
use weiltrace_core::measures::vol_subgroup;
use weiltrace_core::trace::local_trace_check;
use weiltrace_core::weil::{
    pv_pairing_finite, pv_pairing_finite_exact, unit_pv_integral_exact, unit_pv_integral_shifted_exact,
    vol_subgroup_exact, LnMultiple,
};
use weiltrace_core::{
    Complex64, CutoffPhi, Error, ErrorClass, HermiteGaussian, LevelFunction, LogProfile, Place, PrimeTable, PvContext,
    UGrid, ZeroTable,
};

use crate::config::{ConfigError, RunConfig};

pub const DEFAULT_LOCAL_PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Core(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Core(e) => match e.class() {
                ErrorClass::Numerical => 2,
                ErrorClass::Config => 3,
                ErrorClass::Integrity => 4,
            },
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

/// Numeric table written by `--emit-csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub pass: bool,
    pub report: Value,
    pub summary: Vec<String>,
    pub csv: Option<CsvTable>,
    /// First failing check, if any.
    pub failure: Option<String>,
}

impl Outcome {
    pub fn json(&self, cfg: &RunConfig) -> Value {
        json!({
            "command": self.command,
            "pass": self.pass,
            "parallel": false,
            "config": cfg,
            "report": self.report,
        })
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn profile(cfg: &RunConfig) -> Result<LogProfile, RunError> {
    Ok(LogProfile::gaussian(cfg.u0, cfg.sigma, cfg.amp)?)
}

fn ln_label(m: LnMultiple, p: u64) -> String {
    match (m.num, m.den) {
        (0, _) => "0".into(),
        (n, 1) => format!("{n} ln {p}"),
        (n, d) => format!("{n}/{d} ln {p}"),
    }
}

#[derive(Serialize)]
struct LocalRow {
    p: u64,
    pairing_one_o: f64,
    vol_one_plus_p: f64,
    unit_pv_integral: f64,
    exact_pairing: LnMultiple,
    exact_vol: LnMultiple,
    exact_unit_integral: LnMultiple,
    exact_unit_integral_shifted: LnMultiple,
}

pub fn verify_local(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let tol = cfg.tolerance_or(1e-12);
    let mut primes = DEFAULT_LOCAL_PRIMES.to_vec();
    for &p in &cfg.primes {
        if !primes.contains(&p) {
            primes.push(p);
        }
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut failure = None;
    for &p in &primes {
        let place = Place::finite(p)?;
        let lp = place.ln_q()?;
        let qm1 = p as f64 - 1.0;
        let pairing = pv_pairing_finite(p, &LevelFunction::xi(p, 0)?)?.re;
        let vol = vol_subgroup(&place, 1)?;
        let shifted: Vec<f64> = (0..p).map(|d| if d == 1 { 0.0 } else { 1.0 }).collect();
        let unit = -pv_pairing_finite(p, &LevelFunction::from_real(p, 0, 1, &shifted)?)?.re + 0.0;

        let exact_pairing = pv_pairing_finite_exact(&ExactLevelFunction::from_integers(p, 0, 0, &[1])?)?;
        let exact_vol = vol_subgroup_exact(p, 1)?;
        let exact_unit = unit_pv_integral_exact(p)?;
        let exact_shifted = unit_pv_integral_shifted_exact(p)?;
        let den = p as i128 - 1;

        let checks = [
            ("<P,1_O> = -ln p/(p-1)", (pairing + lp / qm1).abs() <= tol && exact_pairing == LnMultiple::new(-1, den)),
            ("vol(1+P) = ln p/(p-1)", (vol - lp / qm1).abs() <= tol && exact_vol == LnMultiple::new(1, den)),
            (
                "PV integral over O^x of |x|/|1-x| = 0",
                unit.abs() <= tol && exact_unit == LnMultiple::zero() && exact_shifted == LnMultiple::zero(),
            ),
        ];
        if failure.is_none() {
            if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
                failure = Some(format!("p = {p}: {name}"));
            }
        }
        summary.push(format!(
            "p = {p:>3}  <P,1_O> = {} = {pairing:.15}  vol(1+P) = {} = {vol:.15}  unit PV integral = {} ({unit:.1e})",
            ln_label(exact_pairing, p),
            ln_label(exact_vol, p),
            ln_label(exact_unit, p),
        ));
        rows.push(LocalRow {
            p,
            pairing_one_o: pairing,
            vol_one_plus_p: vol,
            unit_pv_integral: unit,
            exact_pairing,
            exact_vol,
            exact_unit_integral: exact_unit,
            exact_unit_integral_shifted: exact_shifted,
        });
    }
    let csv = CsvTable {
        header: vec!["p", "pairing_one_o", "vol_one_plus_p", "unit_pv_integral"],
        rows: rows.iter().map(|r| vec![r.p as f64, r.pairing_one_o, r.vol_one_plus_p, r.unit_pv_integral]).collect(),
    };
    Ok(Outcome {
        command: "verify-local",
        pass: failure.is_none(),
        report: json!({ "tolerance": tol, "rows": to_value(&rows) }),
        summary,
        csv: Some(csv),
        failure,
    })
}

pub fn verify_trace(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let grid = UGrid::new(cfg.grid_u, cfg.n)?;
    let phi = CutoffPhi::new(cfg.cutoff)?;
    let g = profile(cfg)?;
    let ctx = PvContext::real()?;
    let mut sets = vec![vec![Place::real()]];
    for &p in &cfg.primes {
        sets.push(vec![Place::real(), Place::finite(p)?]);
    }
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    let mut failure = None;
    for places in &sets {
        let label = places
            .iter()
            .map(|v| if v.is_real() { "inf".to_string() } else { v.q().map(|q| q.to_string()).unwrap_or_default() })
            .collect::<Vec<_>>()
            .join(",");
        let tol = cfg.tolerance_or(if places.len() == 1 { 1e-5 } else { 1e-4 });
        let r = local_trace_check(grid, &g, &phi, places, &ctx)?;
        let ok = r.residual <= tol && r.tau_residual <= tol;
        if !ok && failure.is_none() {
            failure = Some(format!("S = {{{label}}}: residual {:.3e} / tau residual {:.3e}", r.residual, r.tau_residual));
        }
        summary.push(format!(
            "S = {{{label}}}  operator trace {:.12}  Weil sum {:.12}  tau route {:.12}  residual {:.2e}  {}",
            r.operator_trace,
            r.weil_sum,
            r.tau_route,
            r.residual.max(r.tau_residual),
            if ok { "PASS" } else { "FAIL" }
        ));
        entries.push(json!({ "places": label, "tolerance": tol, "result": to_value(&r) }));
    }
    Ok(Outcome {
        command: "verify-trace",
        pass: failure.is_none(),
        report: json!({
            "grid": to_value(&grid),
            "cutoff": cfg.cutoff,
            "profile": to_value(&g),
            "sets": entries,
        }),
        summary,
        csv: None,
        failure,
    })
}

/// Load up to `count` zeros from the configured file, computing them when the file is missing or short.
pub fn load_zeros(cfg: &RunConfig, count: usize) -> Result<ZeroTable, RunError> {
    let path = cfg.reference_zeros_path();
    if path.is_file() {
        let table = ZeroTable::load(&path)?;
        if table.ordinates().len() >= count {
            return Ok(table.truncated(count));
        }
        if cfg.zeros_file.is_some() {
            return Err(RunError::Core(Error::Integrity(format!(
                "{} holds {} zeros, {count} requested",
                path.display(),
                table.ordinates().len()
            ))));
        }
    } else if cfg.zeros_file.is_some() {
        return Err(RunError::Core(Error::Io(format!("cannot read {}", path.display()))));
    }
    Ok(find_zeros(count)?)
}

pub fn verify_explicit(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let tol = cfg.tolerance_or(1e-6);
    let g = profile(cfg)?;
    let zeros = load_zeros(cfg, cfg.zeros)?;
    let primes = PrimeTable::new(cfg.xmax);
    let ctx = PvContext::real()?;
    let r = explicit_formula_check(&g, &zeros, &primes, &ctx, tol)?;
    let curve = residual_curve(&g, &zeros, r.geometric.total)?;
    let mut rows = Vec::with_capacity(curve.len());
    let mut spectral = r.spectral.pole_part;
    rows.push(vec![0.0, f64::NAN, 0.0, spectral, curve[0].1]);
    for (k, (gamma, mult)) in zeros.iter().enumerate() {
        let term = mult as f64 * 2.0 * g.laplace_transform(Complex64::new(0.5, gamma))?.re;
        spectral -= term;
        rows.push(vec![(k + 1) as f64, gamma, term, spectral, curve[k + 1].1]);
    }
    let summary = vec![
        format!(
            "geometric side {:.12}  (primes {:.12}, archimedean {:.12}, X = {})",
            r.geometric.total,
            r.geometric.finite_positive + r.geometric.finite_negative,
            r.geometric.archimedean,
            r.geometric.x_max
        ),
        format!(
            "spectral side  {:.12}  (poles {:.12}, {} zeros {:.12})",
            r.spectral.total, r.spectral.pole_part, r.spectral.zero_count, r.spectral.zero_part
        ),
        format!(
            "residual {:.3e}  tolerance {tol:e}  prime tail {:.1e}  zero tail {:.1e}  {}",
            r.residual,
            r.geometric.prime_tail_bound,
            r.spectral.tail_bound,
            if r.pass { "PASS" } else { "FAIL" }
        ),
    ];
    let failure = (!r.pass).then(|| format!("explicit formula residual {:.3e} > {tol:e}", r.residual));
    Ok(Outcome {
        command: "verify-explicit",
        pass: r.pass,
        report: json!({ "zero_source": format!("{:?}", zeros.source()), "result": to_value(&r) }),
        summary,
        csv: Some(CsvTable { header: vec!["zero_count", "ordinate", "zero_term", "spectral_side", "residual"], rows }),
        failure,
    })
}

pub fn poisson(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let tol = cfg.tolerance_or(1e-12);
    let x = cfg.x.unwrap_or(1.0);
    let f = HermiteGaussian::new(cfg.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())?;
    let r = poisson_check(&f, x)?;
    let pass = r.residual < tol;
    Ok(Outcome {
        command: "poisson",
        pass,
        report: json!({ "tolerance": tol, "coeffs": cfg.coeffs, "result": to_value(&r) }),
        summary: vec![format!(
            "x = {x}  sum f(nx) = {:.15}  x^-1 sum Ff(n/x) = {:.15}  residual {:.2e}  {}",
            r.lhs.re,
            r.rhs.re,
            r.residual,
            if pass { "PASS" } else { "FAIL" }
        )],
        csv: None,
        failure: (!pass).then(|| format!("Poisson residual {:.3e} >= {tol:e}", r.residual)),
    })
}

pub fn pnt(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let x = cfg.x.unwrap_or(1e6);
    if !(x >= 2.0) || x > 1e10 {
        return Err(RunError::Config(format!("x must lie in [2, 1e10], got {x}")));
    }
    let x = x as u64;
    let r = pnt_check(x, &PrimeTable::new(x))?;
    // the ratio approaches 1 from above; require the distance to shrink along the series
    let pass = r.series.windows(2).all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs());
    let mut summary = vec![format!("pi({x}) = {}  ratio pi(x) ln x / x = {:.6}", r.pi, r.ratio)];
    summary.extend(r.series.iter().map(|pt| format!("  x = {:>12}  pi = {:>10}  ratio {:.6}", pt.x, pt.pi, pt.ratio)));
    Ok(Outcome {
        command: "pnt",
        pass,
        report: to_value(&r),
        summary,
        csv: Some(CsvTable {
            header: vec!["x", "pi", "ratio"],
            rows: r.series.iter().map(|pt| vec![pt.x as f64, pt.pi as f64, pt.ratio]).collect(),
        }),
        failure: (!pass).then(|| "ratio does not approach 1 monotonically".to_string()),
    })
}

pub fn zeros(cfg: &RunConfig, count: usize, out: Option<&std::path::Path>, check: Option<&std::path::Path>) -> Result<Outcome, RunError> {
    let tol = cfg.tolerance_or(1e-9);
    if let Some(path) = check {
        let table = ZeroTable::load(path)?;
        let fresh = find_zeros(table.ordinates().len())?;
        let worst = table.ordinates().iter().zip(fresh.ordinates()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let pass = worst <= tol;
        return Ok(Outcome {
            command: "zeros",
            pass,
            report: json!({ "checked": path.display().to_string(), "count": table.len(), "max_deviation": worst, "tolerance": tol }),
            summary: vec![format!(
                "{}: {} zeros, max deviation from recomputation {worst:.2e}  {}",
                path.display(),
                table.len(),
                if pass { "PASS" } else { "FAIL" }
            )],
            csv: None,
            failure: (!pass).then(|| format!("zero file deviates by {worst:.3e}")),
        });
    }
    if count == 0 {
        return Err(RunError::Config("--count must be positive".into()));
    }
    let table = find_zeros(count)?;
    if let Some(path) = out {
        table.write(path)?;
    }
    let mut summary: Vec<String> = table.ordinates().iter().take(10).map(|g| format!("{g:.12}")).collect();
    if table.len() > 10 {
        summary.push(format!("... {} zeros, last {:.12}", table.len(), table.ordinates()[table.len() - 1]));
    }
    if let Some(path) = out {
        summary.push(format!("wrote {}", path.display()));
    }
    Ok(Outcome {
        command: "zeros",
        pass: true,
        report: json!({ "count": table.len(), "ordinates": table.ordinates() }),
        summary,
        csv: Some(CsvTable {
            header: vec!["index", "ordinate"],
            rows: table.ordinates().iter().enumerate().map(|(i, &g)| vec![(i + 1) as f64, g]).collect(),
        }),
        failure: None,
    })
}
