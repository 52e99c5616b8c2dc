use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalId;
use crate::harness::{RefineTarget, ScaleSpec};
use crate::inequalities::{TheoremCase, TheoremId};

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "CHRONOSCALE_SEED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad arguments or config; exit code 2.
    Usage(String),
    /// `--help` or `--version` output; exit code 0.
    Info(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Info(msg) => f.write_str(msg),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Sweep,
    Refine,
    Search,
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Refine => "refine",
            Command::Search => "search",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Human,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Human => "human",
        }
    }
}

/// A discrete theorem or one of the continuum statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TargetId {
    Theorem(TheoremId),
    Classical(ClassicalId),
}

impl TargetId {
    pub fn theorem(self) -> Option<TheoremId> {
        match self {
            TargetId::Theorem(id) => Some(id),
            TargetId::Classical(_) => None,
        }
    }

    fn exponent_flag(self) -> &'static str {
        let symbol = match self {
            TargetId::Theorem(id) => id.exponent_symbol(),
            TargetId::Classical(ClassicalId::Krasniqi14) => 't',
            TargetId::Classical(_) => 'p',
        };
        if symbol == 't' {
            "--t"
        } else {
            "--p"
        }
    }

    fn check_exponent(self, e: f64) -> Result<(), CliError> {
        match self {
            TargetId::Theorem(id) => TheoremCase::new(id, e, 0.0, 0.0)
                .map(|_| ())
                .or_else(|err| usage(err.to_string())),
            TargetId::Classical(id) if id.accepts_exponent(e) => Ok(()),
            TargetId::Classical(id) => usage(format!("{id}: exponent {e} outside its domain")),
        }
    }
}

impl From<TargetId> for RefineTarget {
    fn from(id: TargetId) -> Self {
        match id {
            TargetId::Theorem(id) => RefineTarget::Theorem(id),
            TargetId::Classical(id) => RefineTarget::Classical(id),
        }
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetId::Theorem(id) => f.write_str(id.slug()),
            TargetId::Classical(id) => f.write_str(id.slug()),
        }
    }
}

impl FromStr for TargetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<TheoremId>()
            .map(TargetId::Theorem)
            .or_else(|_| s.parse::<ClassicalId>().map(TargetId::Classical))
            .map_err(|_| {
                format!("unknown theorem `{s}`; expected qi-3.1 .. qi-3.7, akkouchi-1.2, krasniqi-1.4 or krasniqi-1.5")
            })
    }
}

impl TryFrom<String> for TargetId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TargetId> for String {
    fn from(id: TargetId) -> Self {
        id.to_string()
    }
}

fn parse_numbers(body: &str, what: &str) -> Result<Vec<f64>, String> {
    body.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what}: `{part}` is not a number"))
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Inline scale syntax: `h:a,b,h`, `q:base,q,kmin,kmax` or `pts:v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScaleArg(pub ScaleSpec);

impl fmt::Display for ScaleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            ScaleSpec::HLattice { a, b, h } => write!(f, "h:{}", join(&[*a, *b, *h])),
            ScaleSpec::QPower {
                base,
                q,
                k_min,
                k_max,
            } => write!(f, "q:{base},{q},{k_min},{k_max}"),
            ScaleSpec::Explicit { points } => write!(f, "pts:{}", join(points)),
            // Random families have no inline form; the JSON config carries them.
            other => write!(f, "{}", serde_json::to_string(other).unwrap_or_default()),
        }
    }
}

impl FromStr for ScaleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s)
                .map(ScaleArg)
                .map_err(|e| format!("scale: {e}"));
        }
        let (kind, body) = s.split_once(':').ok_or_else(|| {
            format!("scale `{s}`: expected h:a,b,h, q:base,q,kmin,kmax or pts:v1,v2,...")
        })?;
        let spec = match kind {
            "h" => match parse_numbers(body, "h-lattice")?[..] {
                [a, b, h] => ScaleSpec::HLattice { a, b, h },
                _ => return Err("h-lattice needs exactly a,b,h".into()),
            },
            "q" => match parse_numbers(body, "q-power")?[..] {
                [base, q, k_min, k_max] if k_min.fract() == 0.0 && k_max.fract() == 0.0 => {
                    ScaleSpec::QPower {
                        base,
                        q,
                        k_min: k_min as i32,
                        k_max: k_max as i32,
                    }
                }
                _ => return Err("q-power needs base,q,kmin,kmax with integer kmin, kmax".into()),
            },
            "pts" => ScaleSpec::Explicit {
                points: parse_numbers(body, "points")?,
            },
            other => {
                return Err(format!(
                    "unknown scale kind `{other}`; expected h, q or pts"
                ))
            }
        };
        Ok(ScaleArg(spec))
    }
}

impl TryFrom<String> for ScaleArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ScaleArg> for String {
    fn from(arg: ScaleArg) -> Self {
        arg.to_string()
    }
}

pub type RealFn = Box<dyn Fn(f64) -> f64>;

/// Function syntax: `zero`, `linear:c0,slope`, `power:k` for `(x - a)^k`,
/// `values:v1,v2,...` or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FunctionSpec {
    Zero,
    Linear { c0: f64, slope: f64 },
    Power { k: f64 },
    Values(Vec<f64>),
    File(PathBuf),
}

impl FunctionSpec {
    /// Closed form and derivative for the named families.
    pub fn closed_form(&self, a: f64) -> Option<(RealFn, RealFn)> {
        match *self {
            FunctionSpec::Zero => Some((Box::new(|_| 0.0), Box::new(|_| 0.0))),
            FunctionSpec::Linear { c0, slope } => {
                Some((Box::new(move |x| c0 + slope * x), Box::new(move |_| slope)))
            }
            FunctionSpec::Power { k } => Some((
                Box::new(move |x| (x - a).powf(k)),
                Box::new(move |x| {
                    if k == 0.0 {
                        0.0
                    } else {
                        k * (x - a).powf(k - 1.0)
                    }
                }),
            )),
            FunctionSpec::Values(_) | FunctionSpec::File(_) => None,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Zero => f.write_str("zero"),
            FunctionSpec::Linear { c0, slope } => write!(f, "linear:{c0},{slope}"),
            FunctionSpec::Power { k } => write!(f, "power:{k}"),
            FunctionSpec::Values(values) => write!(f, "values:{}", join(values)),
            FunctionSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "zero" {
            return Ok(FunctionSpec::Zero);
        }
        let (kind, body) = s.split_once(':').ok_or_else(|| {
            format!("function `{s}`: expected zero, linear:c0,slope, power:k, values:... or file:<path>")
        })?;
        match kind {
            "linear" => match parse_numbers(body, "linear")?[..] {
                [c0, slope] => Ok(FunctionSpec::Linear { c0, slope }),
                _ => Err("linear needs exactly c0,slope".into()),
            },
            "power" => match parse_numbers(body, "power")?[..] {
                [k] => Ok(FunctionSpec::Power { k }),
                _ => Err("power needs exactly one exponent".into()),
            },
            "values" => Ok(FunctionSpec::Values(parse_numbers(body, "values")?)),
            "file" if !body.is_empty() => Ok(FunctionSpec::File(PathBuf::from(body))),
            _ => Err(format!("unknown function kind `{kind}`")),
        }
    }
}

impl TryFrom<String> for FunctionSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FunctionSpec> for String {
    fn from(spec: FunctionSpec) -> Self {
        spec.to_string()
    }
}

/// A validated run. The JSON form is accepted by `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TargetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Refinement steps `2^-lo ..= 2^-hi`.
    #[serde(default = "default_levels")]
    pub levels: (i32, i32),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum_margin: Option<f64>,
}

fn default_trials() -> usize {
    1000
}

fn default_levels() -> (i32, i32) {
    (3, 12)
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            theorem: None,
            exponent: None,
            a: None,
            b: None,
            scale: None,
            function: None,
            seed: 0,
            trials: default_trials(),
            format: Format::Json,
            output: None,
            levels: default_levels(),
            continuum_margin: None,
        }
    }

    /// Checks that each command has what it needs and that the exponent is
    /// inside the theorem's domain.
    pub fn validate(&self) -> Result<(), CliError> {
        let cmd = self.command.name();
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                usage(format!("{cmd} requires {what}"))
            }
        };
        if self.command != Command::Selftest {
            need(self.theorem.is_some(), "--theorem")?;
        }
        if let (Some(id), Some(e)) = (self.theorem, self.exponent) {
            id.check_exponent(e)?;
        }
        if self.trials == 0 {
            return usage("--trials must be at least 1");
        }
        match self.command {
            Command::Verify => {
                need(
                    self.theorem.and_then(TargetId::theorem).is_some(),
                    "a qi-3.x theorem",
                )?;
                need(self.exponent.is_some(), "an exponent (--t or --p)")?;
                need(self.function.is_some(), "--f")?;
                let from_file = matches!(self.function, Some(FunctionSpec::File(_)));
                need(self.scale.is_some() || from_file, "--scale")?;
            }
            Command::Sweep | Command::Search => {
                need(
                    self.theorem.and_then(TargetId::theorem).is_some(),
                    "a qi-3.x theorem",
                )?;
            }
            Command::Refine => {
                need(self.exponent.is_some(), "an exponent (--t or --p)")?;
                need(self.a.is_some() && self.b.is_some(), "--a and --b")?;
                match self.function {
                    Some(ref f) if f.closed_form(0.0).is_some() => {}
                    Some(_) => {
                        return usage("refine needs a closed-form function: zero, linear or power")
                    }
                    None => return usage("refine requires --f"),
                }
                let (lo, hi) = self.levels;
                if !(0 <= lo && lo <= hi && hi <= 40) {
                    return usage("--levels must be lo,hi with 0 <= lo <= hi <= 40");
                }
            }
            Command::Selftest => {}
        }
        if let (Some(a), Some(b)) = (self.a, self.b) {
            let empty = if self.command == Command::Refine {
                !(a < b)
            } else {
                !(a <= b)
            };
            if empty {
                return usage(format!("interval [{a}, {b}] is empty"));
            }
        }
        Ok(())
    }

    /// Command-line arguments that parse back to this config.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![self.command.name().to_string()];
        let mut push = |flag: &str, value: String| {
            args.push(flag.to_string());
            args.push(value);
        };
        if let Some(id) = self.theorem {
            push("--theorem", id.to_string());
            if let Some(e) = self.exponent {
                push(id.exponent_flag(), e.to_string());
            }
        } else if let Some(e) = self.exponent {
            push("--t", e.to_string());
        }
        if let Some(a) = self.a {
            push("--a", a.to_string());
        }
        if let Some(b) = self.b {
            push("--b", b.to_string());
        }
        if let Some(ref scale) = self.scale {
            push("--scale", scale.to_string());
        }
        if let Some(ref f) = self.function {
            push("--f", f.to_string());
        }
        push("--seed", self.seed.to_string());
        push("--trials", self.trials.to_string());
        push("--format", self.format.name().to_string());
        if let Some(ref out) = self.output {
            push("--output", out.display().to_string());
        }
        push("--levels", format!("{},{}", self.levels.0, self.levels.1));
        if let Some(m) = self.continuum_margin {
            push("--continuum-margin", m.to_string());
        }
        args
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "chronoscale",
    version,
    about = "Exact time-scale calculus and inequality verification"
)]
struct Cli {
    /// Read the whole run from a JSON config instead of flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Check one function against one theorem.
    Verify(Flags),
    /// Randomized soundness sweep over generated witnesses.
    Sweep(Flags),
    /// Lattice refinement study toward the continuum statement.
    Refine(Flags),
    /// Search for inadmissible functions whose conclusion fails.
    Search(Flags),
    /// Exact-identity and power-rule self test.
    Selftest(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// qi-3.1 .. qi-3.7, akkouchi-1.2, krasniqi-1.4, krasniqi-1.5.
    #[arg(long)]
    theorem: Option<TargetId>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "p")]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// h:a,b,h | q:base,q,kmin,kmax | pts:v1,v2,...
    #[arg(long)]
    scale: Option<ScaleArg>,
    /// zero | linear:c0,slope | power:k | values:v1,... | file:<path>
    #[arg(long = "f", alias = "function")]
    function: Option<FunctionSpec>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = default_trials())]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Refinement steps 2^-lo ..= 2^-hi, given as lo,hi.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<(i32, i32)>,
    #[arg(long, allow_hyphen_values = true)]
    continuum_margin: Option<f64>,
}

fn parse_levels(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(',').ok_or("levels must be lo,hi")?;
    let parse = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|_| format!("`{v}` is not an integer"))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn parse_seed_env(value: &str) -> Result<u64, CliError> {
    value
        .trim()
        .parse()
        .or_else(|_| usage(format!("{SEED_ENV}=`{value}` is not an unsigned integer")))
}

/// Parses arguments (program name first). `seed_env` is the value of
/// `CHRONOSCALE_SEED`, which overrides any seed from flags or config.
pub fn parse_args_with_env<I, S>(args: I, seed_env: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|err| {
        use clap::error::ErrorKind;
        let text = err.render().to_string();
        match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(text),
            _ => CliError::Usage(text),
        }
    })?;
    let mut config = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return usage("--config cannot be combined with a subcommand"),
        (Some(path), None) => load_config(&path)?,
        (None, Some(sub)) => from_flags(sub),
        (None, None) => return usage("missing command; try `chronoscale --help`"),
    };
    if let Some(value) = seed_env {
        config.seed = parse_seed_env(value)?;
    }
    config.validate()?;
    Ok(config)
}

/// [`parse_args_with_env`] with the seed override read from the process
/// environment.
pub fn parse_args<I, S>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    parse_args_with_env(args, env.as_deref())
}

fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).or_else(|e| usage(format!("config {}: {e}", path.display())))
}

fn from_flags(sub: Sub) -> RunConfig {
    let (command, flags) = match sub {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Refine(f) => (Command::Refine, f),
        Sub::Search(f) => (Command::Search, f),
        Sub::Selftest(f) => (Command::Selftest, f),
    };
    RunConfig {
        command,
        theorem: flags.theorem,
        exponent: flags.t.or(flags.p),
        a: flags.a,
        b: flags.b,
        scale: flags.scale,
        function: flags.function,
        seed: flags.seed.unwrap_or(0),
        trials: flags.trials,
        format: flags.format,
        output: flags.output,
        levels: flags.levels.unwrap_or_else(default_levels),
        continuum_margin: flags.continuum_margin,
    }
}
