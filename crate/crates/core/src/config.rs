//! Experiment configuration from a TOML file and/or command-line flags.
//!
//! File keys match the flag names (`n-sites`, `theta-l`, ...). Angles accept
//! plain numbers or multiples of `pi` such as `"3pi/4"` or `"-pi/2"`.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer};

use crate::dataset::Format;
use crate::error::{invalid, Error, Result};

pub const MAX_SITES: usize = 200;
pub const MAX_SPACING: f64 = 10.0;
pub const MAX_GRID: usize = 4096;
pub const DEFAULT_GRID: (usize, usize) = (64, 64);
pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Intensity,
    IntensityPerp,
    PairIntensity,
    G2Map,
    Overlaps,
    Modes,
    OracleCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Intensity,
        Command::IntensityPerp,
        Command::PairIntensity,
        Command::G2Map,
        Command::Overlaps,
        Command::Modes,
        Command::OracleCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Intensity => "intensity",
            Command::IntensityPerp => "intensity-perp",
            Command::PairIntensity => "pair-intensity",
            Command::G2Map => "g2-map",
            Command::Overlaps => "overlaps",
            Command::Modes => "modes",
            Command::OracleCheck => "oracle-check",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown command '{}'", s.trim())))
    }
}

/// Parses `1.25`, `pi`, `-pi/2`, `3pi/4`, `3*pi/4`, `0.5pi` (also `π`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase()
        .replace('π', "pi");
    let bad = || Error::Parse(format!("invalid angle '{}'", text.trim()));
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let numerator = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => parse_plain(other).ok_or_else(bad)?,
            };
            c * std::f64::consts::PI
        }
        None => parse_plain(num).ok_or_else(bad)?,
    };
    let value = match den {
        Some(d) => {
            let d = parse_plain(d).ok_or_else(bad)?;
            if d == 0.0 {
                return Err(bad());
            }
            numerator / d
        }
        None => numerator,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn parse_plain(s: &str) -> Option<f64> {
    // Rust accepts "inf"/"nan" spellings; angles must be literal numbers.
    if s.is_empty() || s.chars().any(|c| c.is_ascii_alphabetic() && c != 'e') {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses `"64x64"`, `"48x96"` or `"64"` into `(n_theta, n_phi)`.
pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let s = text.trim().to_ascii_lowercase();
    let bad = || Error::Parse(format!("invalid grid '{}' (expected e.g. 64x64)", text.trim()));
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
    let (nt, np) = match s.split_once('x') {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let n = parse(&s)?;
            (n, n)
        }
    };
    check_grid(nt, np)?;
    Ok((nt, np))
}

fn check_grid(nt: usize, np: usize) -> Result<()> {
    if nt < 2 || np < 4 || nt > MAX_GRID || np > MAX_GRID {
        return Err(invalid(format!(
            "grid {nt}x{np} outside 2..={MAX_GRID} polar by 4..={MAX_GRID} azimuthal nodes"
        )));
    }
    Ok(())
}

/// Parses a comma-separated list of pair indices, e.g. `"1,5,10"`.
pub fn parse_p_list(text: &str) -> Result<Vec<usize>> {
    let list = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid pair index '{}'", p.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(Error::Parse("empty pair index list".into()));
    }
    Ok(list)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Number(f64),
    Text(String),
}

fn de_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    match AngleRepr::deserialize(d)? {
        AngleRepr::Number(x) => Ok(Some(x)),
        AngleRepr::Text(s) => parse_angle(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PRepr {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

fn de_p<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    match PRepr::deserialize(d)? {
        PRepr::One(p) => Ok(Some(vec![p])),
        PRepr::Many(v) => Ok(Some(v)),
        PRepr::Text(s) => parse_p_list(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Square(usize),
    Text(String),
}

fn de_grid<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<(usize, usize)>, D::Error> {
    match GridRepr::deserialize(d)? {
        GridRepr::Square(n) => check_grid(n, n).map(|_| Some((n, n))).map_err(serde::de::Error::custom),
        GridRepr::Text(s) => parse_grid(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

fn de_from_str<'de, D, T>(d: D) -> std::result::Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr<Err = Error>,
{
    let s = String::deserialize(d)?;
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

/// Any subset of the settings; a file and the flags each produce one.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default, deserialize_with = "de_from_str")]
    pub command: Option<Command>,
    pub n_sites: Option<usize>,
    pub spacing: Option<f64>,
    #[serde(default, deserialize_with = "de_angle")]
    pub theta_l: Option<f64>,
    #[serde(default, deserialize_with = "de_angle")]
    pub phi_l: Option<f64>,
    #[serde(default, deserialize_with = "de_p")]
    pub p: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "de_grid")]
    pub grid: Option<(usize, usize)>,
    #[serde(default, deserialize_with = "de_angle")]
    pub ref_theta: Option<f64>,
    #[serde(default, deserialize_with = "de_angle")]
    pub ref_phi: Option<f64>,
    #[serde(default, deserialize_with = "de_from_str")]
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub check_against: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            command: over.command.or(self.command),
            n_sites: over.n_sites.or(self.n_sites),
            spacing: over.spacing.or(self.spacing),
            theta_l: over.theta_l.or(self.theta_l),
            phi_l: over.phi_l.or(self.phi_l),
            p: over.p.or(self.p),
            grid: over.grid.or(self.grid),
            ref_theta: over.ref_theta.or(self.ref_theta),
            ref_phi: over.ref_phi.or(self.ref_phi),
            format: over.format.or(self.format),
            out: over.out.or(self.out),
            check_against: over.check_against.or(self.check_against),
            tolerance: over.tolerance.or(self.tolerance),
        }
    }
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n_sites: usize,
    /// Lattice spacing in `λ_L`; unused by `overlaps`.
    pub spacing: f64,
    pub theta_l: f64,
    pub phi_l: f64,
    pub p: Vec<usize>,
    pub grid: (usize, usize),
    /// Explicit `g₂` reference direction; `None` selects the pair-intensity
    /// maximum on the grid.
    pub reference: Option<(f64, f64)>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub check_against: Option<PathBuf>,
    pub tolerance: f64,
}

impl TryFrom<PartialConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(c: PartialConfig) -> Result<Self> {
        let command = c.command.ok_or_else(|| invalid("no command given"))?;
        let n_sites = c.n_sites.ok_or_else(|| invalid("n-sites is required"))?;
        if !(1..=MAX_SITES).contains(&n_sites) {
            return Err(invalid(format!("n-sites = {n_sites} outside 1..={MAX_SITES}")));
        }
        let spacing = match (command, c.spacing) {
            (_, Some(a)) => a,
            (Command::Overlaps, None) => 1.0,
            (_, None) => return Err(invalid("spacing is required")),
        };
        if !(spacing > 0.0 && spacing <= MAX_SPACING) {
            return Err(invalid(format!("spacing = {spacing} outside (0, {MAX_SPACING}]")));
        }
        let theta_l = c.theta_l.unwrap_or(0.0);
        if !(0.0..=std::f64::consts::PI).contains(&theta_l) {
            return Err(invalid(format!("theta-l = {theta_l} outside [0, π]")));
        }
        let phi_l = c.phi_l.unwrap_or(0.0);
        if !phi_l.is_finite() {
            return Err(invalid("phi-l must be finite"));
        }
        let p = c.p.unwrap_or_else(|| vec![1]);
        let uses_pairs = matches!(command, Command::PairIntensity | Command::G2Map | Command::Overlaps);
        if uses_pairs {
            if let Some(bad) = p.iter().find(|&&p| p < 1 || p > n_sites / 2) {
                return Err(invalid(format!("p = {bad} outside 1..={} for N = {n_sites}", n_sites / 2)));
            }
            if command != Command::Overlaps && p.len() != 1 {
                return Err(invalid(format!("{} takes a single p", command.name())));
            }
        }
        let grid = c.grid.unwrap_or(DEFAULT_GRID);
        check_grid(grid.0, grid.1)?;
        let reference = match (c.ref_theta, c.ref_phi) {
            (Some(t), Some(p)) => {
                if !(0.0..=std::f64::consts::PI).contains(&t) || !p.is_finite() {
                    return Err(invalid(format!("reference direction ({t}, {p}) is invalid")));
                }
                Some((t, p))
            }
            (None, None) => None,
            _ => return Err(invalid("ref-theta and ref-phi must be given together")),
        };
        let tolerance = c.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(invalid("tolerance must be positive"));
        }
        Ok(ExperimentConfig {
            command,
            n_sites,
            spacing,
            theta_l,
            phi_l,
            p,
            grid,
            reference,
            format: c.format.unwrap_or(Format::Csv),
            out: c.out,
            check_against: c.check_against,
            tolerance,
        })
    }
}
