//! Job description assembled from flags and an optional JSON file.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use trisheet::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Curve,
    Hyper,
    Genus1,
    SolveR0,
    Gamma,
    Hp,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `c = 0`, `d = -(a^2 + b^2)/3` for input `{a, -a, b, -b}`.
    Symmetric,
    /// `(c, d)` from the double zero at `--r0`.
    Genus1,
    /// Explicit `--c` and `--d`.
    GivenCd,
}

#[derive(Debug, Parser)]
#[command(name = "trisheet", version, about = "Cubic curves with four branch points")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,

    /// Branch points a1 b1 a2 b2 as `re,im` (or `re`).
    #[arg(long = "points", alias = "point", num_args = 1..=4, allow_hyphen_values = true, action = clap::ArgAction::Append)]
    pub points: Vec<String>,

    /// JSON job file; flags override its fields.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<String>,

    /// Double-zero location for genus-1 mode, `re,im` or `re`.
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<String>,

    #[arg(long = "r0-bracket", allow_hyphen_values = true)]
    pub r0_bracket: Option<String>,

    #[arg(long)]
    pub tol: Option<f64>,

    /// Trajectory step for `gamma`; defaults to 1e-3 of the scale.
    #[arg(long)]
    pub step: Option<f64>,

    #[arg(long = "hp-n")]
    pub hp_n: Option<String>,

    #[arg(long = "out-json")]
    pub out_json: Option<PathBuf>,

    #[arg(long = "out-csv")]
    pub out_csv: Option<PathBuf>,

    #[arg(long = "out-svg")]
    pub out_svg: Option<PathBuf>,
}

/// Fields accepted in the JSON job file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub points: Option<Vec<[f64; 2]>>,
    pub mode: Option<Mode>,
    pub c: Option<[f64; 2]>,
    pub d: Option<[f64; 2]>,
    pub r0: Option<[f64; 2]>,
    pub r0_bracket: Option<[f64; 2]>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub hp_n: Option<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: Command,
    pub points: [Complex64; 4],
    pub mode: Mode,
    pub c: Option<Complex64>,
    pub d: Option<Complex64>,
    pub r0: Option<Complex64>,
    pub r0_bracket: Option<(f64, f64)>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub hp_n: (usize, usize),
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("not a number: '{t}' in '{s}'"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected 're,im', got '{s}'")),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("non-finite value '{s}'"))
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|_| format!("bad {what}: '{s}'"))?,
            b.parse().map_err(|_| format!("bad {what}: '{s}'"))?,
        )),
        _ => Err(format!("{what} expects two comma-separated values, got '{s}'")),
    }
}

fn from_pair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl JobSpec {
    pub fn from_args(args: Args) -> Result<JobSpec, String> {
        let file: JobFile = match &args.input {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => JobFile::default(),
        };
        let points: Vec<Complex64> = if !args.points.is_empty() {
            args.points.iter().map(|s| parse_complex(s)).collect::<Result<_, _>>()?
        } else {
            file.points.unwrap_or_default().into_iter().map(from_pair).collect()
        };
        let points: [Complex64; 4] = points
            .try_into()
            .map_err(|v: Vec<Complex64>| format!("exactly four points are required, got {}", v.len()))?;
        let opt = |flag: &Option<String>, json: Option<[f64; 2]>| -> Result<Option<Complex64>, String> {
            match flag {
                Some(s) => parse_complex(s).map(Some),
                None => Ok(json.map(from_pair)),
            }
        };
        let c = opt(&args.c, file.c)?;
        let d = opt(&args.d, file.d)?;
        let r0 = opt(&args.r0, file.r0)?;
        let r0_bracket = match &args.r0_bracket {
            Some(s) => Some(parse_pair::<f64>(s, "--r0-bracket")?),
            None => file.r0_bracket.map(|p| (p[0], p[1])),
        };
        let hp_n = match &args.hp_n {
            Some(s) => parse_pair::<usize>(s, "--hp-n")?,
            None => file.hp_n.map(|p| (p[0], p[1])).unwrap_or((20, 20)),
        };
        let mode = args.mode.or(file.mode).unwrap_or(if c.is_some() || d.is_some() {
            Mode::GivenCd
        } else if r0.is_some() {
            Mode::Genus1
        } else {
            Mode::Symmetric
        });
        let tol = args.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("--tol must be positive, got {t}"));
            }
        }
        let step = args.step.or(file.step);
        if let Some(s) = step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(format!("--step must be positive, got {s}"));
            }
        }
        Ok(JobSpec {
            command: args.command,
            points,
            mode,
            c,
            d,
            r0,
            r0_bracket,
            tol,
            step,
            hp_n,
            out_json: args.out_json,
            out_csv: args.out_csv,
            out_svg: args.out_svg,
        })
    }
}
