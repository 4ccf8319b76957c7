//! The `genea` command line: `sample`, `validate`, `length-scaling` and
//! `export`.
//!
//! Settings come from flags, then from a `key = value` file given with
//! `--config`, then from defaults. Every command is a function of its
//! settings and seed alone; `--threads` changes speed, never output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::BranchingParams;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::lengths::{length_scaling, write_moments, write_summaries};
use crate::rng::{stream_id, RngStream};
use crate::samplers::{
    sample_conditional_tmrca, sample_dynamic_h, sample_dynamic_v, sample_full_ancestral, sample_static,
    sample_static_conditional_z0,
};
use crate::stats::suites::{run_suite, Suite, SuiteConfig};
use crate::tree::{from_json, to_json, to_newick, AncestralProcess};

/// Environment fallback for the seed of `sample`.
pub const SEED_ENV: &str = "GENEA_SEED";
/// Stream tag of `sample`.
pub const TAG_SAMPLE: u32 = 0x5341;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Static,
    DynamicV,
    DynamicH,
    Conditional,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TreeFormat {
    Newick,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "genea", version, about = "Exact genealogies of a stationary branching population")]
pub struct Cli {
    /// Worker threads for replicate loops (output does not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key = value` settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one genealogy, print its length and TMRCA, optionally write it.
    Sample(SampleArgs),
    /// Run a named Monte Carlo suite; exit status 1 if any test fails.
    Validate(ValidateArgs),
    /// Coupled length replicates over a grid of sample sizes.
    LengthScaling(ScalingArgs),
    /// Convert a tree stored as JSON to another format.
    Export(ExportArgs),
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Time-scale parameter (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Population-size parameter, > 0 (default 1).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Master seed; falls back to GENEA_SEED for `sample`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (tree, JSON report, or per-replicate CSV).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: ParamArgs,
    /// Default static.
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerKind>,
    /// Sample size (default 10).
    #[arg(long)]
    pub n: Option<usize>,
    /// Required by the conditional sampler.
    #[arg(long)]
    pub h: Option<f64>,
    /// Truncation depth; required by the full sampler.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Population size (static sampler only).
    #[arg(long)]
    pub z0: Option<f64>,
    /// Format of `--output` (default json).
    #[arg(long, value_enum)]
    pub format: Option<TreeFormat>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: ParamArgs,
    /// One of distributions, stationary, sampler-equality, metric-oracle, eex,
    /// length-moments, laplace, conditional.
    #[arg(long)]
    pub suite: Option<String>,
    /// Replicates (default depends on the suite).
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: ParamArgs,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub ns: Option<String>,
    /// Replicates per sample size (default 10000).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Population size the trees are conditioned on (default 1).
    #[arg(long)]
    pub z0: Option<f64>,
    /// Where to write the second moments of the coupled differences.
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Tree in the JSON format written by `sample`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: TreeFormat,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Settings read from a `--config` file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    /// Lines `key = value`; blank lines and `#` comments are skipped, and
    /// values may be quoted.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected `key = value`, got `{raw}`", i + 1)))?;
            let v = v.trim().trim_matches('"');
            map.insert(k.trim().replace('_', "-"), v.to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key `{key}`: {e}"))),
        }
    }
}

/// Fully resolved settings of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub theta: f64,
    pub n: usize,
    pub h: Option<f64>,
    pub eps: Option<f64>,
    pub z0: Option<f64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub sampler: SamplerKind,
    pub format: TreeFormat,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn params(&self) -> Result<BranchingParams> {
        BranchingParams::new(self.beta, self.theta)
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn resolve_common(c: &ParamArgs, file: &ConfigFile) -> Result<RunConfig> {
    Ok(RunConfig {
        beta: pick(c.beta, file.get("beta")?, 1.0),
        theta: pick(c.theta, file.get("theta")?, 1.0),
        n: file.get("n")?.unwrap_or(10),
        h: file.get("h")?,
        eps: file.get("eps")?,
        z0: file.get("z0")?,
        reps: file.get("reps")?,
        seed: c.seed.or(file.get("seed")?),
        sampler: file.get_enum("sampler")?.unwrap_or(SamplerKind::Static),
        format: file.get_enum("format")?.unwrap_or(TreeFormat::Json),
        output: c.output.clone().or(file.get("output")?),
    })
}

pub fn resolve_sample(a: &SampleArgs, file: &ConfigFile, env_seed: Option<&str>) -> Result<RunConfig> {
    let mut cfg = resolve_common(&a.common, file)?;
    cfg.sampler = a.sampler.unwrap_or(cfg.sampler);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.h = a.h.or(cfg.h);
    cfg.eps = a.eps.or(cfg.eps);
    cfg.z0 = a.z0.or(cfg.z0);
    cfg.format = a.format.unwrap_or(cfg.format);
    if cfg.seed.is_none() {
        cfg.seed = match env_seed {
            Some(s) => Some(
                s.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("{SEED_ENV} = `{s}` is not an unsigned integer")))?,
            ),
            None => None,
        };
    }
    if cfg.seed.is_none() {
        return Err(Error::Precondition(format!("a seed is required: pass --seed, set it in --config, or set {SEED_ENV}")));
    }
    match cfg.sampler {
        SamplerKind::Conditional if cfg.h.is_none() => {
            return Err(Error::Precondition("the conditional sampler requires --h".into()))
        }
        SamplerKind::Full if cfg.eps.is_none() => {
            return Err(Error::Precondition("the full sampler requires --eps".into()))
        }
        SamplerKind::Static => {}
        _ if cfg.z0.is_some() => {
            return Err(Error::Precondition("--z0 is only used by the static sampler".into()))
        }
        _ => {}
    }
    Ok(cfg)
}

/// Draws the tree `cfg` describes on stream `(TAG_SAMPLE, 0)` of its seed.
pub fn sample_tree(cfg: &RunConfig) -> Result<AncestralProcess> {
    let params = cfg.params()?;
    let seed = cfg.seed.ok_or_else(|| Error::Precondition("a seed is required".into()))?;
    let mut rng = RngStream::new(seed, stream_id(TAG_SAMPLE, 0));
    let n = cfg.n;
    Ok(match cfg.sampler {
        SamplerKind::Static => match cfg.z0 {
            Some(z0) => sample_static_conditional_z0(&params, n, z0, &mut rng)?.1,
            None => sample_static(&params, n, &mut rng)?.1,
        },
        SamplerKind::DynamicV => sample_dynamic_v(&params, n, &mut rng)?.last()?,
        SamplerKind::DynamicH => sample_dynamic_h(&params, n, &mut rng)?.last()?,
        SamplerKind::Conditional => {
            let h = cfg.h.expect("checked when resolving");
            sample_conditional_tmrca(&params, n, h, &mut rng)?.1
        }
        SamplerKind::Full => sample_full_ancestral(&params, cfg.eps.expect("checked when resolving"), &mut rng)?,
    })
}

/// The tree in `format`, newline terminated.
pub fn render_tree(params: &BranchingParams, ap: &AncestralProcess, format: TreeFormat) -> Result<String> {
    Ok(match format {
        TreeFormat::Json => to_json(params, ap) + "\n",
        TreeFormat::Newick => to_newick(ap, None)? + "\n",
        TreeFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["u", "zeta"])?;
            for a in ap.atoms() {
                w.write_record([g17(a.u), g17(a.zeta)])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("csv is utf-8")
        }
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sample(a: &SampleArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<i32> {
    let env = std::env::var(SEED_ENV).ok();
    let cfg = resolve_sample(a, file, env.as_deref())?;
    let ap = sample_tree(&cfg)?;
    writeln!(out, "total_length\ttmrca")?;
    writeln!(out, "{}\t{}", g17(ap.total_length()), g17(ap.tmrca()))?;
    if let Some(path) = &cfg.output {
        write_file(path, render_tree(&cfg.params()?, &ap, cfg.format)?.as_bytes())?;
    }
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<i32> {
    let cfg = resolve_common(&a.common, file)?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Precondition("validate requires --seed (no clock seeding)".into()))?;
    let name: String = a
        .suite
        .clone()
        .or(file.get("suite")?)
        .ok_or_else(|| Error::Precondition("validate requires --suite".into()))?;
    let suite: Suite = name.parse()?;
    let reps = a.reps.or(cfg.reps);
    let report = run_suite(suite, &SuiteConfig { params: cfg.params()?, reps }, seed)?;
    write!(out, "{}", report.table())?;
    if let Some(path) = &cfg.output {
        write_file(path, (report.to_json() + "\n").as_bytes())?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn parse_ns(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Parse(format!("sample size `{x}` is not a positive integer")))
        })
        .collect()
}

fn cmd_length_scaling(a: &ScalingArgs, file: &ConfigFile, out: &mut dyn Write) -> Result<i32> {
    let cfg = resolve_common(&a.common, file)?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Precondition("length-scaling requires --seed".into()))?;
    let ns_text: String = a.ns.clone().or(file.get("ns")?).unwrap_or_else(|| "100,1000,10000".into());
    let ns = parse_ns(&ns_text)?;
    let reps = a.reps.or(cfg.reps).unwrap_or(10_000);
    let z0 = a.z0.or(cfg.z0).unwrap_or(1.0);
    let moments_path: Option<PathBuf> = a.moments.clone().or(file.get("moments")?);
    let scaling = length_scaling(&cfg.params()?, z0, &ns, reps, seed, cfg.output.is_some())?;
    let mut table = Vec::new();
    write_moments(&scaling.moments, &mut table)?;
    out.write_all(&table)?;
    if let Some(path) = &moments_path {
        write_file(path, &table)?;
    }
    if let Some(path) = &cfg.output {
        let mut rows = Vec::new();
        write_summaries(&scaling.rows, &mut rows)?;
        write_file(path, &rows)?;
    }
    Ok(0)
}

fn cmd_export(a: &ExportArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", a.input.display())))?;
    let (params, ap) = from_json(&text)?;
    let rendered = render_tree(&params, &ap, a.format)?;
    match &a.output {
        Some(path) => write_file(path, rendered.as_bytes())?,
        None => out.write_all(rendered.as_bytes())?,
    }
    Ok(0)
}

/// Runs a parsed command line, writing human output to `out`. Returns the
/// exit status: 0 on success, 1 when a validation suite fails.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)
            .map_err(|e| Error::Precondition(format!("config file {}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let threads: Option<usize> = cli.threads.or(file.get("threads")?);
    // Output is buffered so the command can run inside a rayon pool.
    let run = || {
        let mut buf: Vec<u8> = Vec::new();
        let code = match &cli.command {
            Command::Sample(a) => cmd_sample(a, &file, &mut buf),
            Command::Validate(a) => cmd_validate(a, &file, &mut buf),
            Command::LengthScaling(a) => cmd_length_scaling(a, &file, &mut buf),
            Command::Export(a) => cmd_export(a, &mut buf),
        };
        (code, buf)
    };
    let (code, buf) = match threads {
        None => run(),
        Some(0) => return Err(Error::Precondition("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start {k} threads: {e}")))?
            .install(run),
    };
    out.write_all(&buf)?;
    code
}

/// Entry point of the binary: parses `args`, runs, reports errors on stderr.
/// Usage and input errors exit with status 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("genea").chain(args.iter().copied())).unwrap()
    }

    fn run(args: &[&str]) -> (Result<i32>, String) {
        let mut buf = Vec::new();
        let code = execute(&parse(args), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse("# comment\nbeta = 2\n theta=\"0.5\" # trailing\n\nsampler = dynamic-v\n").unwrap();
        assert_eq!(f.get::<f64>("beta").unwrap(), Some(2.0));
        assert_eq!(f.get::<f64>("theta").unwrap(), Some(0.5));
        assert_eq!(f.get_enum::<SamplerKind>("sampler").unwrap(), Some(SamplerKind::DynamicV));
        assert!(ConfigFile::parse("no equals sign").is_err());
        assert!(f.get::<usize>("beta").is_ok());
        let bad = ConfigFile::parse("n = ten").unwrap();
        assert!(bad.get::<usize>("n").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = ConfigFile::parse("beta = 2\ntheta = 3\nseed = 9\nn = 4").unwrap();
        let Command::Sample(a) = parse(&["sample", "--beta", "5"]).command else { unreachable!() };
        let cfg = resolve_sample(&a, &file, None).unwrap();
        assert_eq!((cfg.beta, cfg.theta, cfg.seed, cfg.n), (5.0, 3.0, Some(9), 4));
        let Command::Sample(a) = parse(&["sample"]).command else { unreachable!() };
        let cfg = resolve_sample(&a, &ConfigFile::default(), Some("11")).unwrap();
        assert_eq!((cfg.beta, cfg.theta, cfg.seed, cfg.n), (1.0, 1.0, Some(11), 10));
    }

    #[test]
    fn sample_preconditions() {
        let Command::Sample(a) = parse(&["sample", "--seed", "1", "--sampler", "conditional"]).command else {
            unreachable!()
        };
        assert!(resolve_sample(&a, &ConfigFile::default(), None).is_err());
        let Command::Sample(a) = parse(&["sample", "--seed", "1", "--sampler", "full"]).command else {
            unreachable!()
        };
        assert!(resolve_sample(&a, &ConfigFile::default(), None).is_err());
        let Command::Sample(a) = parse(&["sample", "--sampler", "static"]).command else { unreachable!() };
        assert!(resolve_sample(&a, &ConfigFile::default(), None).is_err());
        assert!(run(&["sample", "--seed", "1", "--theta", "0"]).0.is_err());
        assert!(run(&["sample", "--seed", "1", "--n", "0"]).0.is_err());
        let err = run(&["sample", "--seed", "1", "--beta", "-1"]).0.unwrap_err();
        assert!(err.to_string().contains("beta"));
    }

    #[test]
    fn sample_prints_two_columns_and_is_deterministic() {
        let (code, text) = run(&["sample", "--seed", "7", "--n", "5"]);
        assert_eq!(code.unwrap(), 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "total_length\ttmrca");
        assert_eq!(lines[1].split('\t').count(), 2);
        assert_eq!(run(&["sample", "--seed", "7", "--n", "5"]).1, text);
    }

    #[test]
    fn conditional_respects_h() {
        let (code, text) = run(&["sample", "--seed", "3", "--sampler", "conditional", "--h", "1.0", "--n", "8"]);
        assert_eq!(code.unwrap(), 0);
        let tmrca: f64 = text.lines().nth(1).unwrap().split('\t').nth(1).unwrap().parse().unwrap();
        assert!(tmrca <= 1.0);
    }

    #[test]
    fn validate_needs_seed_and_known_suite() {
        assert!(run(&["validate", "--suite", "metric-oracle"]).0.is_err());
        assert!(run(&["validate", "--suite", "bogus", "--seed", "1"]).0.is_err());
        let (code, text) = run(&["validate", "--suite", "metric-oracle", "--seed", "1", "--reps", "10"]);
        assert_eq!(code.unwrap(), 0);
        assert!(text.contains("all tests passed"));
    }

    #[test]
    fn ns_parsing() {
        assert_eq!(parse_ns("10, 100").unwrap(), vec![10, 100]);
        assert!(parse_ns("10,0").is_err());
        assert!(parse_ns("x").is_err());
    }
}
