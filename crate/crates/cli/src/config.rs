//! Run configuration: command-line flags over a flat `key=value` file over defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

pub const DATA_DIR_ENV: &str = "WEILTRACE_DATA_DIR";
pub const REFERENCE_ZEROS: &str = "zeros_ref.txt";

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Flat key=value file; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_json: Option<PathBuf>,
    /// Write CSV data (plot data or series) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_csv: Option<PathBuf>,
    /// Pass/fail tolerance.
    #[arg(long, visible_alias = "tolerance", global = true)]
    pub tol: Option<f64>,
    /// Centre of the Gaussian test profile in log coordinates.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Width of the Gaussian test profile.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Amplitude of the Gaussian test profile.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub amp: Option<f64>,
    /// Number of zeta zeros used on the spectral side.
    #[arg(long, global = true)]
    pub zeros: Option<usize>,
    /// Zero table to read instead of the reference file.
    #[arg(long, global = true, value_name = "PATH")]
    pub zeros_file: Option<PathBuf>,
    /// Prime cutoff X for the geometric side.
    #[arg(long, global = true)]
    pub xmax: Option<u64>,
    /// Extra finite primes (comma separated or repeated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<u64>,
    /// Evaluation point (poisson) or upper limit (pnt).
    #[arg(long, global = true)]
    pub x: Option<f64>,
    /// Grid size N for the trace engine (power of two).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Grid half width U for the trace engine.
    #[arg(long = "grid-u", global = true)]
    pub grid_u: Option<f64>,
    /// Cutoff parameter a of the φ used in the trace engine.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Hermite coefficients for the Poisson check, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Vec<f64>,
    /// Directory holding reference data.
    #[arg(long, global = true, env = DATA_DIR_ENV, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub tolerance: Option<f64>,
    pub u0: f64,
    pub sigma: f64,
    pub amp: f64,
    pub zeros: usize,
    pub zeros_file: Option<PathBuf>,
    pub xmax: u64,
    pub primes: Vec<u64>,
    pub x: Option<f64>,
    pub n: usize,
    pub grid_u: f64,
    pub cutoff: f64,
    pub coeffs: Vec<f64>,
    pub data_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: None,
            u0: 2.0,
            sigma: 0.2,
            amp: 1.0,
            zeros: 100,
            zeros_file: None,
            xmax: 10_000,
            primes: Vec::new(),
            x: None,
            n: 4096,
            grid_u: 20.0,
            cutoff: 6.0,
            coeffs: vec![1.0],
            data_dir: default_data_dir(),
        }
    }
}

fn default_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError(format!("config line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(out)
}

fn get<T: FromStr>(file: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match file.remove(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| ConfigError(format!("config key {key}: cannot parse {v:?}"))),
    }
}

fn get_list<T: FromStr>(file: &mut BTreeMap<String, String>, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
    match file.remove(key) {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| ConfigError(format!("config key {key}: cannot parse {s:?}"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some),
    }
}

impl RunConfig {
    /// Merge flags over the config file over defaults, then validate.
    pub fn resolve(flags: &Overrides) -> Result<RunConfig, ConfigError> {
        let mut file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let d = RunConfig::default();
        let tol_file = match get::<f64>(&mut file, "tol")? {
            Some(v) => Some(v),
            None => get(&mut file, "tolerance")?,
        };
        let nonempty = |v: &Vec<f64>| (!v.is_empty()).then(|| v.clone());
        let cfg = RunConfig {
            tolerance: flags.tol.or(tol_file),
            u0: flags.u0.or(get(&mut file, "u0")?).unwrap_or(d.u0),
            sigma: flags.sigma.or(get(&mut file, "sigma")?).unwrap_or(d.sigma),
            amp: flags.amp.or(get(&mut file, "amp")?).unwrap_or(d.amp),
            zeros: flags.zeros.or(get(&mut file, "zeros")?).unwrap_or(d.zeros),
            zeros_file: flags.zeros_file.clone().or(get(&mut file, "zeros_file")?),
            xmax: flags.xmax.or(get(&mut file, "xmax")?).unwrap_or(d.xmax),
            primes: {
                let from_file = get_list(&mut file, "p")?;
                if flags.p.is_empty() { from_file.unwrap_or_default() } else { flags.p.clone() }
            },
            x: flags.x.or(get(&mut file, "x")?),
            n: flags.n.or(get(&mut file, "n")?).unwrap_or(d.n),
            grid_u: flags.grid_u.or(get(&mut file, "grid_u")?).unwrap_or(d.grid_u),
            cutoff: flags.cutoff.or(get(&mut file, "cutoff")?).unwrap_or(d.cutoff),
            coeffs: nonempty(&flags.coeffs).or(get_list(&mut file, "coeffs")?).unwrap_or(d.coeffs),
            data_dir: flags.data_dir.clone().or(get(&mut file, "data_dir")?).unwrap_or(d.data_dir),
        };
        if let Some(key) = file.keys().next() {
            return Err(ConfigError(format!("unknown config key {key}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0) || !t.is_finite() {
                return Err(ConfigError(format!("tolerance must be > 0, got {t}")));
            }
        }
        if !(self.sigma > 0.0) {
            return Err(ConfigError(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !self.u0.is_finite() || !self.amp.is_finite() {
            return Err(ConfigError("u0 and amp must be finite".into()));
        }
        if self.xmax < 2 || self.xmax > 10_000_000_000 {
            return Err(ConfigError(format!("xmax must lie in [2, 1e10], got {}", self.xmax)));
        }
        if self.zeros > 100_000 {
            return Err(ConfigError(format!("at most 100000 zeros, got {}", self.zeros)));
        }
        if self.coeffs.is_empty() || self.coeffs.len() > 40 {
            return Err(ConfigError("between 1 and 40 Hermite coefficients are required".into()));
        }
        Ok(())
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    pub fn reference_zeros_path(&self) -> PathBuf {
        match &self.zeros_file {
            Some(p) => p.clone(),
            None => self.data_dir.join(REFERENCE_ZEROS),
        }
    }
}
