//! Run configuration: a JSON file whose fields can each be overridden by a
//! command-line flag.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use tower_dimers::kernels::C64;
use tower_dimers::lattice::parse_rational;

/// Worker-count variable; the only setting read from the environment.
pub const WORKERS_ENV: &str = "TOWERDIMER_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    /// Exact rational as `"p/q"` or an integer.
    pub alpha: String,
    pub beta: String,
    /// `[re, im]`.
    pub z0: Option<[f64; 2]>,
    pub seed: u64,
    pub samples: u64,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            alpha: "1".into(),
            beta: "1".into(),
            z0: None,
            seed: 0,
            samples: 1000,
            tol: 1e-10,
            output: None,
            svg: None,
            csv: None,
        }
    }
}

/// Flag values; `None` keeps the file (or default) value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub z0: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn resolve(file: Option<&Path>, o: Overrides) -> Result<RunConfig> {
        let mut c = match file {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { c.$f = v; } )* };
        }
        take!(n, alpha, beta, seed, samples, tol);
        if o.z0.is_some() {
            c.z0 = o.z0;
        }
        if o.output.is_some() {
            c.output = o.output;
        }
        if o.svg.is_some() {
            c.svg = o.svg;
        }
        if o.csv.is_some() {
            c.csv = o.csv;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("N must be at least 1");
        }
        for (name, v) in [("alpha", self.alpha()?), ("beta", self.beta()?)] {
            if !v.is_positive() {
                bail!("{name} must be positive");
            }
        }
        if let Some([re, im]) = self.z0 {
            if !(re.is_finite() && im.is_finite()) || im < 0.0 {
                bail!("z0 = {re}{im:+}i must lie in the closed upper half plane");
            }
        }
        if !(self.tol > 0.0) {
            bail!("tolerance must be positive");
        }
        Ok(())
    }

    pub fn alpha(&self) -> Result<BigRational> {
        parse_rational(&self.alpha).with_context(|| format!("alpha = {:?}", self.alpha))
    }

    pub fn beta(&self) -> Result<BigRational> {
        parse_rational(&self.beta).with_context(|| format!("beta = {:?}", self.beta))
    }

    pub fn z0(&self) -> Option<C64> {
        self.z0.map(|[re, im]| C64::new(re, im))
    }
}

/// Parse `"a,b"` into two floats.
pub fn parse_pair(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected two comma-separated numbers, got {s:?}");
    }
    Ok([parts[0].parse()?, parts[1].parse()?])
}

/// Parse `"a,b,c"` into three floats.
pub fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("expected three comma-separated numbers, got {s:?}");
    }
    Ok([parts[0].parse()?, parts[1].parse()?, parts[2].parse()?])
}

/// Install the global thread pool from `TOWERDIMER_WORKERS`, if set.
pub fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{WORKERS_ENV}={v:?} is not a count"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    Ok(())
}
