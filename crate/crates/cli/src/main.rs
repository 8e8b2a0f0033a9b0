use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use tower_dimers::interlacing::Matching;
use tower_dimers::isoradial::{embed_patch, isoradiality_report, DualEmbedding};
use tower_dimers::kasteleyn::{build_matrix, inverse, partition_function};
use tower_dimers::kernels::{gibbs_kernel, FiniteKernel, GibbsPoint, C64};
use tower_dimers::lattice::{build_tower, format_rational, rational_to_f64, LatticeCoord};
use tower_dimers::limitshape::{arctic_curve, classify, critical_point, current, limit_height, slopes_of, ArcticCurve};
use tower_dimers::shuffle::sample_tower;
use towerdimer::config::{init_workers, parse_pair, parse_triple, Overrides, RunConfig};
use towerdimer::render::{arctic_svg, embedding_svg, matching_svg, write_svg};
use towerdimer::table::{emit_csv, Table};
use towerdimer::verify::{verify_suite, Level};

#[derive(Parser)]
#[command(name = "towerdimer", version, about = "Dimers on square-hexagon tower graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short = 'n')]
    n: Option<u32>,
    /// Rational "p/q".
    #[arg(long)]
    alpha: Option<String>,
    /// Rational "p/q".
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Complex "re,im".
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let z0 = self.z0.as_deref().map(parse_pair).transpose()?;
        RunConfig::resolve(
            self.config.as_deref(),
            Overrides {
                n: self.n,
                alpha: self.alpha.clone(),
                beta: self.beta.clone(),
                z0,
                seed: self.seed,
                output: self.output.clone(),
                svg: self.svg.clone(),
                csv: self.csv.clone(),
                ..Overrides::default()
            },
        )
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw one tower matching with the shuffling chain.
    Sample {
        #[command(flatten)]
        common: Common,
    },
    /// Partition function and exact edge probabilities.
    Exact {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-N kernel entries, or Gibbs kernel entries when --z0 is given.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// "X,U:X',U'" as (white, black); repeatable.
        #[arg(long = "pair", required = true, allow_hyphen_values = true)]
        pairs: Vec<String>,
        /// Per-entry contours with 128-bit arithmetic.
        #[arg(long)]
        extended: bool,
    },
    /// Critical points, arctic curve, limit height and current.
    Limitshape {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long)]
        arctic: bool,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// "x,u,tau" for the uniform model.
        #[arg(long, allow_hyphen_values = true)]
        height: Option<String>,
        /// "re,im".
        #[arg(long, allow_hyphen_values = true)]
        current: Option<String>,
    },
    /// Dual embedding at z0 with its circumcircle report.
    Isoradial {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        window: i64,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a JSON object written by another subcommand.
    Render {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Matching,
    Arctic,
    Embedding,
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn float_param(s: &str) -> Result<f64> {
    Ok(rational_to_f64(&tower_dimers::lattice::parse_rational(s)?))
}

fn parse_coord_pair(s: &str) -> Result<(LatticeCoord, LatticeCoord)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("expected \"X,U:X',U'\", got {s:?}"))?;
    let c = |t: &str| -> Result<LatticeCoord> {
        let (x, u) = t.split_once(',').ok_or_else(|| anyhow!("expected \"X,U\", got {t:?}"))?;
        Ok(LatticeCoord::new(x.trim().parse()?, u.trim().parse()?))
    };
    Ok((c(a)?, c(b)?))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Sample { common } => {
            let cfg = common.resolve()?;
            let (a, b) = (cfg.alpha()?, cfg.beta()?);
            let m = sample_tower(cfg.n, &a, &b, cfg.seed)?;
            if let Some(p) = &cfg.svg {
                write_svg(&matching_svg(&build_tower(cfg.n, &a, &b)?, &m), p)?;
            }
            emit(&serde_json::to_string_pretty(&m)?, cfg.output.as_deref())?;
        }
        Cmd::Exact { common } => {
            let cfg = common.resolve()?;
            let g = build_tower(cfg.n, &cfg.alpha()?, &cfg.beta()?)?;
            let inv = inverse(&build_matrix(&g))?;
            let mut t = Table::new(["white_x", "white_u", "black_x", "black_u", "probability", "probability_f64"]);
            for e in &g.edges {
                let p = inv.edge_probability(&g, &[e.key()])?;
                t.push(vec![
                    e.white.x.into(),
                    e.white.u.into(),
                    e.black.x.into(),
                    e.black.u.into(),
                    format_rational(&p).into(),
                    rational_to_f64(&p).into(),
                ]);
            }
            println!("Z = {}", format_rational(&partition_function(&g).abs()));
            match &cfg.csv {
                Some(p) => emit_csv(&t, p)?,
                None => print!("{}", t.to_csv_string()?),
            }
        }
        Cmd::Kernel { common, pairs, extended } => {
            let cfg = common.resolve()?;
            let (a, b) = (rational_to_f64(&cfg.alpha()?), rational_to_f64(&cfg.beta()?));
            let mut t = Table::new(["white_x", "white_u", "black_x", "black_u", "re", "im"]);
            let fk = if extended { FiniteKernel::large(cfg.n, a, b)? } else { FiniteKernel::new(cfg.n, a, b)? };
            for s in &pairs {
                let (w, k) = parse_coord_pair(s)?;
                let v: C64 = match cfg.z0() {
                    Some(z) => gibbs_kernel(&GibbsPoint::new(z, a, b)?, w, k)?,
                    None => fk.eval(w, k)?.value,
                };
                t.push(vec![w.x.into(), w.u.into(), k.x.into(), k.u.into(), v.re.into(), v.im.into()]);
            }
            match &cfg.csv {
                Some(p) => emit_csv(&t, p)?,
                None => print!("{}", t.to_csv_string()?),
            }
        }
        Cmd::Limitshape { common, point, arctic, resolution, height, current: cur } => {
            let cfg = common.resolve()?;
            let (a, b) = (float_param(&cfg.alpha)?, float_param(&cfg.beta)?);
            let mut did = false;
            if let Some(p) = point {
                let [x, u] = parse_pair(&p)?;
                let z = critical_point(x, u, a, b)?;
                let label = classify(x, u, a, b)?;
                let (s, t) = slopes_of(&GibbsPoint::new(z, a, b)?);
                println!("{}", serde_json::json!({"x": x, "u": u, "label": label, "z": [z.re, z.im], "s": s, "t": t}));
                did = true;
            }
            if let Some(h) = height {
                let [x, u, tau] = parse_triple(&h)?;
                println!("{}", serde_json::json!({"x": x, "u": u, "tau": tau, "h": limit_height(x, u, tau)?}));
                did = true;
            }
            if let Some(c) = cur {
                let [re, im] = parse_pair(&c)?;
                println!("{}", serde_json::json!({"z0": [re, im], "current": current(&GibbsPoint::new(C64::new(re, im), a, b)?)}));
                did = true;
            }
            if arctic {
                let curve = arctic_curve(a, b, resolution)?;
                if let Some(p) = &cfg.svg {
                    write_svg(&arctic_svg(&curve), p)?;
                }
                let mut t = Table::new(["x", "u"]);
                for &(x, u) in &curve.points {
                    t.push(vec![x.into(), u.into()]);
                }
                if let Some(p) = &cfg.csv {
                    emit_csv(&t, p)?;
                }
                emit(&serde_json::to_string(&curve)?, cfg.output.as_deref())?;
                did = true;
            }
            if !did {
                bail!("nothing to do: pass --point, --arctic, --height or --current");
            }
        }
        Cmd::Isoradial { common, window } => {
            let cfg = common.resolve()?;
            let (a, b) = (float_param(&cfg.alpha)?, float_param(&cfg.beta)?);
            let z = cfg.z0().ok_or_else(|| anyhow!("--z0 is required"))?;
            let gp = GibbsPoint::new(z, a, b)?;
            let e = embed_patch(&gp, -window..=window, -window..=window)?;
            if let Some(p) = &cfg.svg {
                write_svg(&embedding_svg(&e), p)?;
            }
            if let Some(p) = &cfg.output {
                std::fs::write(p, serde_json::to_string(&e)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&isoradiality_report(&gp)?)?);
        }
        Cmd::Verify { level, report } => {
            let r = verify_suite(level);
            for c in &r.criteria {
                eprintln!("{}", c.summary_line());
            }
            let text = serde_json::to_string_pretty(&r)?;
            emit(&text, report.as_deref())?;
            return Ok(r.passed);
        }
        Cmd::Render { kind, input, svg } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let out = match kind {
                Kind::Matching => {
                    let m: Matching = serde_json::from_str(&text)?;
                    let one = num_rational::BigRational::from_integer(1.into());
                    matching_svg(&build_tower(m.n, &one, &one)?, &m)
                }
                Kind::Arctic => arctic_svg(&serde_json::from_str::<ArcticCurve>(&text)?),
                Kind::Embedding => embedding_svg(&serde_json::from_str::<DualEmbedding>(&text)?),
            };
            write_svg(&out, &svg)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_workers().and_then(|_| run(cli));
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
