//! Run configuration: command-line flags layered over an optional TOML file.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const OUTPUT_DIR_ENV: &str = "IPM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Profile,
    Shoot,
    Evolve,
    Decay,
    Coercivity,
    Spectrum,
    Norms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Shoot => "shoot",
            Command::Evolve => "evolve",
            Command::Decay => "decay",
            Command::Coercivity => "coercivity",
            Command::Spectrum => "spectrum",
            Command::Norms => "norms",
        }
    }

    fn default_nodes(self) -> usize {
        match self {
            Command::Spectrum => 128,
            _ => 256,
        }
    }
}

/// Time frame of an `evolve` run: physical t or logarithmic s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FrameArg {
    T,
    S,
}

#[derive(Debug, Parser)]
#[command(name = "ipm", version, about = "Self-similar blow-up experiments for the 1D inviscid porous medium system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Build the profile (M*, G*) for a given A and write profile.csv.
    Profile(Flags),
    /// Find A whose first root of G is a target L; writes sweep.csv.
    Shoot(Flags),
    /// Evolve profile data in physical (t) or logarithmic (s) time; writes series.csv.
    Evolve(Flags),
    /// Evolve the truncated profile in s and record the perturbation norms; writes decay.csv.
    Decay(Flags),
    /// Certify coercivity of the principal linearized operator; writes coercivity.csv.
    Coercivity(Flags),
    /// Eigenvalues of the linearized operator at two resolutions; writes spectrum.csv.
    Spectrum(Flags),
    /// Weighted norms of the profile and seeded samples; writes norms.csv.
    Norms(Flags),
}

impl CommandArgs {
    pub fn split(self) -> (Command, Flags) {
        match self {
            CommandArgs::Profile(f) => (Command::Profile, f),
            CommandArgs::Shoot(f) => (Command::Shoot, f),
            CommandArgs::Evolve(f) => (Command::Evolve, f),
            CommandArgs::Decay(f) => (Command::Decay, f),
            CommandArgs::Coercivity(f) => (Command::Coercivity, f),
            CommandArgs::Spectrum(f) => (Command::Spectrum, f),
            CommandArgs::Norms(f) => (Command::Norms, f),
        }
    }
}

/// Every flag is optional; unset flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct Flags {
    /// TOML file with the same keys as the flags (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Shape parameter A = −M''(0)/2 of the profile.
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "target-L")]
    pub target_l: Option<f64>,
    /// Grid nodes on [0, L].
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub frame: Option<FrameArg>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long = "s-max")]
    pub s_max: Option<f64>,
    /// Truncation width a (default 0.02·L).
    #[arg(long = "cutoff-a")]
    pub cutoff_a: Option<f64>,
    #[arg(long)]
    pub filter: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long = "bracket-lo")]
    pub bracket_lo: Option<f64>,
    #[arg(long = "bracket-hi")]
    pub bracket_hi: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "target_L")]
    pub target_l: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub frame: Option<FrameArg>,
    pub t_max: Option<f64>,
    pub s_max: Option<f64>,
    pub cutoff_a: Option<f64>,
    pub filter: Option<bool>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

/// Weight-parameter overrides; unset entries take the linked defaults for the computed L.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct WeightOverrides {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
}

/// Fully resolved configuration, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "target_L")]
    pub target_l: f64,
    pub n: usize,
    pub dt: f64,
    pub frame: FrameArg,
    pub t_max: f64,
    pub s_max: f64,
    pub cutoff_a: Option<f64>,
    pub filter: bool,
    pub seed: u64,
    pub samples: usize,
    pub bracket: (f64, f64),
    pub wp: WeightOverrides,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text).map_err(|e| usage(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_config_text(text: &str) -> Result<ConfigFile, UsageError> {
    toml::from_str(text).map_err(|e| usage(e.message().to_string()))
}

/// Layers flags over the file over defaults, then validates.
pub fn resolve(
    command: Command,
    flags: Flags,
    file: ConfigFile,
    env_output: Option<PathBuf>,
) -> Result<RunConfig, UsageError> {
    if let Some(c) = file.command {
        if c != command {
            return Err(usage(format!("config file is for `{}` but `{}` was requested", c.name(), command.name())));
        }
    }
    let cfg = RunConfig {
        command,
        a: flags.a.or(file.a).unwrap_or(1.0),
        target_l: flags.target_l.or(file.target_l).unwrap_or(1.4),
        n: flags.n.or(file.n).unwrap_or(command.default_nodes()),
        dt: flags.dt.or(file.dt).unwrap_or(1e-2),
        frame: flags.frame.or(file.frame).unwrap_or(FrameArg::T),
        t_max: flags.t_max.or(file.t_max).unwrap_or(0.9),
        s_max: flags.s_max.or(file.s_max).unwrap_or(5.0),
        cutoff_a: flags.cutoff_a.or(file.cutoff_a),
        filter: flags.filter.or(file.filter).unwrap_or(true),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        samples: flags.samples.or(file.samples).unwrap_or(200),
        bracket: (
            flags.bracket_lo.or(file.bracket_lo).unwrap_or(ipm_core::shooting::DEFAULT_BRACKET.0),
            flags.bracket_hi.or(file.bracket_hi).unwrap_or(ipm_core::shooting::DEFAULT_BRACKET.1),
        ),
        wp: WeightOverrides {
            l1: flags.l1.or(file.l1),
            l2: flags.l2.or(file.l2),
            k: flags.k.or(file.k),
            b: flags.b.or(file.b),
        },
        output_dir: flags.output_dir.or(file.output_dir).or(env_output).unwrap_or_else(|| PathBuf::from(".")),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn positive(name: &str, v: f64) -> Result<(), UsageError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be positive and finite (got {v})")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), UsageError> {
        if self.command != Command::Shoot {
            positive("A", self.a)?;
        }
        if self.n < 16 {
            return Err(usage(format!("n must be at least 16 (got {})", self.n)));
        }
        let max_n = if self.command == Command::Spectrum { 512 } else { 1024 };
        if self.n > max_n {
            return Err(usage(format!("n must be at most {max_n} for `{}` (got {})", self.command.name(), self.n)));
        }
        match self.command {
            Command::Shoot => {
                if !(self.target_l > 0.0 && self.target_l < FRAC_PI_2) {
                    return Err(usage(format!("target_L must lie in (0, pi/2) (got {})", self.target_l)));
                }
                let (lo, hi) = self.bracket;
                positive("bracket_lo", lo)?;
                positive("bracket_hi", hi)?;
                if lo >= hi {
                    return Err(usage(format!("bracket_lo must be below bracket_hi (got {lo}, {hi})")));
                }
            }
            Command::Evolve | Command::Decay => {
                positive("dt", self.dt)?;
                match (self.command, self.frame) {
                    (Command::Evolve, FrameArg::T) => {
                        if !(self.t_max > 0.0 && self.t_max <= 1.0) {
                            return Err(usage(format!("t_max must lie in (0, 1] (got {})", self.t_max)));
                        }
                    }
                    _ => positive("s_max", self.s_max)?,
                }
                if let Some(a) = self.cutoff_a {
                    if !(a >= 0.0 && a.is_finite()) {
                        return Err(usage(format!("cutoff_a must be nonnegative (got {a})")));
                    }
                }
            }
            Command::Coercivity | Command::Norms => {
                if self.samples == 0 {
                    return Err(usage("samples must be at least 1"));
                }
            }
            _ => {}
        }
        for (name, v) in [("l1", self.wp.l1), ("l2", self.wp.l2), ("K", self.wp.k), ("B", self.wp.b)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        Ok(())
    }
}

/// Parses arguments (program name first) into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let (command, flags) = cli.command.split();
    let file = match &flags.config {
        Some(path) => read_config_file(path).map_err(ParseOutcome::Usage)?,
        None => ConfigFile::default(),
    };
    let env_output = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    resolve(command, flags, file, env_output).map_err(ParseOutcome::Usage)
}

/// Why argument parsing did not produce a configuration.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help, version or malformed flags, as reported by clap.
    Clap(clap::Error),
    Usage(UsageError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ParseOutcome> {
        parse_config(std::iter::once("ipm").chain(args.iter().copied()))
    }

    #[test]
    fn defaults_for_profile() {
        let c = parse(&["profile"]).unwrap();
        assert_eq!(c.a, 1.0);
        assert_eq!(c.n, 256);
        assert_eq!(c.command, Command::Profile);
    }

    #[test]
    fn negative_a_is_rejected() {
        match parse(&["profile", "--A", "-1"]) {
            Err(ParseOutcome::Usage(e)) => assert!(e.0.contains("A must be positive")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flags_beat_file() {
        let file = parse_config_text("A = 2.0\nn = 64\n").unwrap();
        let flags = Flags { a: Some(0.5), ..Flags::default() };
        let c = resolve(Command::Profile, flags, file, None).unwrap();
        assert_eq!(c.a, 0.5);
        assert_eq!(c.n, 64);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config_text("A = 1.0\nbogus = 3\n").unwrap_err();
        assert!(e.0.contains("bogus"), "{}", e.0);
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let file = parse_config_text("command = \"shoot\"\n").unwrap();
        assert!(resolve(Command::Profile, Flags::default(), file, None).is_err());
    }

    #[test]
    fn output_dir_precedence() {
        let file = parse_config_text("output_dir = \"from-file\"\n").unwrap();
        let c = resolve(Command::Profile, Flags::default(), file.clone(), Some("env".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from-file"));
        let c = resolve(Command::Profile, Flags::default(), ConfigFile::default(), Some("env".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("env"));
    }

    #[test]
    fn shoot_target_must_be_below_half_pi() {
        assert!(matches!(parse(&["shoot", "--target-L", "1.6"]), Err(ParseOutcome::Usage(_))));
        assert!(parse(&["shoot", "--target-L", "1.4"]).is_ok());
    }

    #[test]
    fn frame_and_spectrum_defaults() {
        let c = parse(&["evolve", "--frame", "s", "--s-max", "1"]).unwrap();
        assert_eq!(c.frame, FrameArg::S);
        assert_eq!(parse(&["spectrum"]).unwrap().n, 128);
        assert!(matches!(parse(&["spectrum", "--n", "600"]), Err(ParseOutcome::Usage(_))));
    }
}
