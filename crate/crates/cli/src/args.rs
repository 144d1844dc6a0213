use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperc_core::percolation::Model;
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "hyperc",
    version,
    about = "Geodesic lines in hyperbolic continuum percolation",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decay exponent α of f(r) for one model
    Alpha(AlphaArgs),
    /// Intensity at which α crosses 1
    Critical(CriticalArgs),
    /// Monte Carlo estimate of f(r) and a fitted exponent
    SimulateF(SimulateArgs),
    /// Surviving ray directions from the disk center
    Rays(RaysArgs),
    /// Search for a line of the set passing near the disk center
    DetectLine(DetectArgs),
    /// Law of the exit time S of the occupied set
    SDist(SDistArgs),
    /// Normalization checks for the invariant line measure
    Grassmann(GrassmannArgs),
    /// Long-range percolation on Z induced by the line process
    Lrp(LrpArgs),
    /// The reflection-group tree and its site percolation
    Tree(TreeArgs),
    /// SVG scene in the disk model
    Render(RenderArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Alpha(_) => "alpha",
            Command::Critical(_) => "critical",
            Command::SimulateF(_) => "simulate-f",
            Command::Rays(_) => "rays",
            Command::DetectLine(_) => "detect-line",
            Command::SDist(_) => "s-dist",
            Command::Grassmann(_) => "grassmann",
            Command::Lrp(_) => "lrp",
            Command::Tree(_) => "tree",
            Command::Render(_) => "render",
        }
    }
}

/// Options shared by every subcommand. Output locations and the worker
/// count do not affect results and are kept out of the echoed config.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// key=value file of defaults; flags on the command line win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// master seed (falls back to HYPERC_SEED, then a fresh one)
    #[arg(long)]
    #[serde(skip)]
    pub seed: Option<u64>,
    /// worker threads; 0 uses all cores, 1 runs sequentially
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// write the JSON summary here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Comma-separated list of numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

impl fmt::Display for FloatList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse()
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct AlphaArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long)]
    pub lambda: f64,
    /// ball radius (ignored by the lines model)
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct CriticalArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    /// explicit segment lengths; otherwise rmin, rmin + rstep, …, rmax
    #[arg(long)]
    pub r_values: Option<FloatList>,
    #[arg(long, default_value_t = 1.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 8.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rstep: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// CSV table `r,f_hat,ci95,trials`
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl SimulateArgs {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.r_values {
            return Ok(list.0.clone());
        }
        float_grid(self.rmin, self.rmax, self.rstep)
    }
}

pub fn float_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!(
            "bad grid: need rmin <= rmax and rstep > 0 (got {lo}, {hi}, {step})"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(CliError::Usage("grid has more than 100000 points".into()));
    }
    // round to step multiples so 0.1 steps print cleanly
    Ok((0..=n)
        .map(|k| {
            let x = lo + k as f64 * step;
            (x * 1e9).round() / 1e9
        })
        .collect())
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct RaysArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    /// ray lengths
    #[arg(long, default_value = "2,4,6,8")]
    pub r_values: FloatList,
    #[arg(long, default_value_t = 4096)]
    pub directions: u32,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// CSV table `r,p_nonempty,ci95,mean_fraction,trials`
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct DetectArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    /// the detected chord must pass within s of the center
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// ray length
    #[arg(long, default_value_t = 10.0)]
    pub r: f64,
    #[arg(long, default_value_t = hyperc_core::percolation::DETECT_DIRECTIONS)]
    pub directions: u32,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SDistArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// number of grid intervals on [0, 2R] for the table
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// CSV table `t,G_empirical,G_analytic`
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct GrassmannArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value = "0.5,1,2")]
    pub r_values: FloatList,
    /// angles for the separating-line measure
    #[arg(long, default_value = "0.5,1,1.5,2,2.5")]
    pub thetas: FloatList,
    /// Monte Carlo trials for f̂(r); 0 skips the simulation
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LrpArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 2)]
    pub nmin: i64,
    #[arg(long, default_value_t = 200)]
    pub nmax: i64,
    /// CSV table `n,measure,prob,n2_times_prob`
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct TreeArgs {
    /// length of the boundary arc A₀, below 2π/3
    #[arg(long, default_value_t = hyperc_core::treecover::DEFAULT_ARC_LENGTH)]
    pub arc_length: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// random paths for the R and R′ estimates
    #[arg(long, default_value_t = 200)]
    pub paths: u64,
    /// reduce this model to site percolation on the tree
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
    /// ball radius around vertices; defaults to the estimated R′
    #[arg(long)]
    pub r_prime: Option<f64>,
    /// samples for the site reduction
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// also render the tree to this SVG file
    #[arg(long)]
    #[serde(skip)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    /// the line process in B(o, rho)
    Lines,
    /// Poisson balls with centers in B(o, rho)
    Balls,
    /// the embedded tree
    Tree,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct RenderArgs {
    #[arg(long, value_enum, default_value_t = SceneKind::Lines)]
    pub scene: SceneKind,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "R", default_value_t = 0.5)]
    #[serde(rename = "R")]
    pub radius: f64,
    /// sampling radius around the disk center
    #[arg(long, default_value_t = 5.0)]
    pub rho: f64,
    /// canvas side in pixels
    #[arg(long, default_value_t = 800.0)]
    pub size: f64,
    #[arg(long, default_value_t = hyperc_core::treecover::DEFAULT_ARC_LENGTH)]
    pub arc_length: f64,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// output SVG path
    #[arg(long)]
    #[serde(skip)]
    pub svg: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Alpha(a) => &a.common,
            Command::Critical(a) => &a.common,
            Command::SimulateF(a) => &a.common,
            Command::Rays(a) => &a.common,
            Command::DetectLine(a) => &a.common,
            Command::SDist(a) => &a.common,
            Command::Grassmann(a) => &a.common,
            Command::Lrp(a) => &a.common,
            Command::Tree(a) => &a.common,
            Command::Render(a) => &a.common,
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                no + 1
            )));
        };
        let k = k.trim();
        if k.is_empty() || k.starts_with('-') || k == "config" {
            return Err(CliError::Usage(format!(
                "{}:{}: bad key `{k}`",
                path.display(),
                no + 1
            )));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(v);
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Insert the pairs of any `--config` file ahead of the command-line flags,
/// so that flags given explicitly override them.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    let mut it = argv.iter().enumerate();
    while let Some((_, a)) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = it.next().map(|(_, p)| PathBuf::from(p));
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        }
    }
    let Some(path) = config else {
        return Ok(argv);
    };
    let pairs = read_config(&path)?;
    // the subcommand is the first argument after the program name
    let Some(sub) = argv
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(argv);
    };
    let sub = sub + 1;
    let mut out: Vec<OsString> = argv[..=sub].to_vec();
    for (k, v) in pairs {
        match v.as_str() {
            "false" => {}
            "true" => out.push(format!("--{k}").into()),
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_lists() {
        assert_eq!(
            "1, 2.5,3".parse::<FloatList>().unwrap().0,
            vec![1.0, 2.5, 3.0]
        );
        assert!("1,x".parse::<FloatList>().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(
            float_grid(2.0, 8.0, 1.0).unwrap(),
            vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
        );
        assert_eq!(float_grid(0.0, 0.3, 0.1).unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert!(float_grid(3.0, 1.0, 1.0).is_err());
    }
}
