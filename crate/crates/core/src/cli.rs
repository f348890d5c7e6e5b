//! The `mlump` command-line front end.
//!
//! Exit codes: 0 success, 1 lumping not certified lossless (or an
//! inconsistent check), 2 input validation, 3 resource cap, 4 impossible
//! observation, 5 ambiguous observation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::blockcode::{
    block_analysis, sideinfo_characteristic_graph_direct, sideinfo_characteristic_graph_formula,
    sideinfo_conormal_part, JointBlockSource,
};
use crate::chain::{stationary, entropy_rate_with, spectral_radius, validate_chain};
use crate::error::Error;
use crate::graph::Graph;
use crate::io::{self, AnalyzeReport, BlockAnalysisJson, LossReportJson, LumpingFile, ParseError, PartitionJson};
use crate::jointsource::check_prop1;
use crate::lump::{certify_lossless, dmax_lower_bound, lossy_lump, reconstruct, simulate_chain, DecodeError};
use crate::partition::{solve, Solver};
use crate::Limits;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_IMPOSSIBLE: i32 = 4;
pub const EXIT_AMBIGUOUS: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "mlump", version, about = "Graph-based lumping of finite Markov chains")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Discard transitions of probability <= EPSILON before building the graph.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    /// Block length (the sweep for `block` runs K = 1..=K).
    #[arg(long = "K", short = 'K', global = true)]
    pub k: Option<usize>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,

    /// Output file (for `lump`: where the lumping JSON is written).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure, stationary distribution, entropy rate and degree bounds of a chain.
    Analyze { chain: PathBuf },
    /// Build a lumping from a clique partition of the (ε-)characteristic graph.
    Lump { chain: PathBuf },
    /// Sweep blocked lumpings for K = 1..=K.
    Block { chain: PathBuf },
    /// Reconstruct a trajectory from its first state and lumped symbols.
    Decode {
        chain: PathBuf,
        #[arg(long)]
        lumping: PathBuf,
        /// Lumped symbols of states 2, 3, ...
        #[arg(long)]
        obs: PathBuf,
        /// Initial state (0-based).
        #[arg(long)]
        x1: usize,
    },
    /// Simulate a trajectory and, given a lumping, its lumped observations.
    Simulate {
        chain: PathBuf,
        #[arg(long)]
        lumping: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        length: usize,
    },
    /// Compare graph inclusion with H(X|Y,Z) = 0 for a joint source and channel.
    #[command(name = "check-prop1")]
    CheckProp1 {
        joint: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
    /// Characteristic graph of K-blocks of a chain with side information through a channel.
    Sideinfo {
        chain: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Greedy,
    Auto,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => Solver::Exact,
            SolverArg::Greedy => Solver::Greedy,
            SolverArg::Auto => Solver::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
    /// One `u v` pair per line.
    Edges,
}

/// A failure carrying its exit code and a diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } | Error::NoConvergence { .. } => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

fn parse_failure(path: &Path, e: ParseError) -> Failure {
    Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_chain(path: &Path) -> Result<io::LabelledChain, Failure> {
    io::parse_chain(&read(path)?).map_err(|e| parse_failure(path, e))
}

/// Output of one command: text for stdout and an exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&config) {
        Ok(outcome) => {
            let _ = stdout.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err((partial, failure)) => {
            let _ = stdout.write_all(partial.as_bytes());
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

fn execute(config: &RunConfig) -> Result<Outcome, (String, Failure)> {
    let no_partial = |f: Failure| (String::new(), f);
    if let Some(eps) = config.epsilon {
        if !(0.0..1.0).contains(&eps) {
            return Err(no_partial(Failure::new(EXIT_INPUT, format!("--epsilon {eps} outside [0, 1)"))));
        }
    }
    if config.k == Some(0) {
        return Err(no_partial(Failure::new(EXIT_INPUT, "--K must be at least 1")));
    }
    let limits = Limits::default();
    match &config.command {
        Command::Analyze { chain } => analyze(config, chain, &limits).map_err(no_partial),
        Command::Lump { chain } => lump(config, chain, &limits).map_err(no_partial),
        Command::Block { chain } => block_sweep(config, chain, &limits),
        Command::Decode { chain, lumping, obs, x1 } => decode(config, chain, lumping, obs, *x1).map_err(no_partial),
        Command::Simulate { chain, lumping, length } => {
            simulate(config, chain, lumping.as_deref(), *length).map_err(no_partial)
        }
        Command::CheckProp1 { joint, channel } => prop1(config, joint, channel, &limits).map_err(no_partial),
        Command::Sideinfo { chain, channel } => sideinfo(config, chain, channel, &limits).map_err(no_partial),
    }
    .and_then(|outcome| redirect(config, outcome).map_err(no_partial))
}

/// `--out` replaces stdout for every command except `lump`.
fn redirect(config: &RunConfig, outcome: Outcome) -> Result<Outcome, Failure> {
    match (&config.out, &config.command) {
        (Some(path), cmd) if !matches!(cmd, Command::Lump { .. }) => {
            write_file(path, &outcome.text)?;
            Ok(Outcome {
                text: String::new(),
                code: outcome.code,
            })
        }
        _ => Ok(outcome),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn unsupported(config: &RunConfig, command: &str) -> Failure {
    Failure::new(
        EXIT_INPUT,
        format!("--format {:?} is not supported by `{command}`", config.format).to_lowercase(),
    )
}

fn render_json(config: &RunConfig, value: Value) -> String {
    let mut value = value;
    if config.bits {
        io::to_bits(&mut value);
    }
    let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
    s.push('\n');
    s
}

fn render_ndjson(config: &RunConfig, value: Value) -> String {
    let mut value = value;
    if config.bits {
        io::to_bits(&mut value);
    }
    let mut s = serde_json::to_string(&value).expect("report serializes");
    s.push('\n');
    s
}

fn graph_json(g: &Graph) -> Value {
    json!({
        "vertices": g.len(),
        "edges": g.edges().map(|(u, v)| [u, v]).collect::<Vec<_>>(),
    })
}

fn analyze(config: &RunConfig, path: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let chain = load_chain(path)?;
    let p = &chain.matrix;
    let structure = validate_chain(p);
    if !structure.irreducible {
        return Err(Error::NotIrreducible.into());
    }
    let mu = stationary(p)?;
    let a = p.adjacency(limits.positivity);
    let report = AnalyzeReport {
        n: p.n(),
        irreducible: structure.irreducible,
        aperiodic: structure.aperiodic,
        period: structure.period,
        entropy_rate_nats: entropy_rate_with(p, &mu),
        log_lambda_nats: spectral_radius(&a)?.ln(),
        d_max: dmax_lower_bound(&a),
        mu: mu.into_vec(),
        units: "nats",
    };
    match config.format {
        Format::Json => Ok(Outcome::ok(render_json(config, serde_json::to_value(&report).unwrap()))),
        Format::Csv => {
            let scale = if config.bits { 1.0 / crate::entropy::NATS_PER_BIT } else { 1.0 };
            let unit = if config.bits { "bits" } else { "nats" };
            let mu: Vec<String> = report.mu.iter().map(|m| m.to_string()).collect();
            Ok(Outcome::ok(format!(
                "N,irreducible,aperiodic,period,entropy_rate_{unit},log_lambda_{unit},d_max,mu\n{},{},{},{},{},{},{},{}\n",
                report.n,
                report.irreducible,
                report.aperiodic,
                report.period,
                report.entropy_rate_nats * scale,
                report.log_lambda_nats * scale,
                report.d_max,
                mu.join(";"),
            )))
        }
        _ => Err(unsupported(config, "analyze")),
    }
}

fn lump(config: &RunConfig, path: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let chain = load_chain(path)?;
    let p = &chain.matrix;
    if !validate_chain(p).irreducible {
        return Err(Error::NotIrreducible.into());
    }
    let epsilon = config.epsilon.unwrap_or(0.0);
    let outcome = lossy_lump(p, epsilon, config.solver.into(), limits)?;
    let certificate = certify_lossless(p, &outcome.lumping)?;
    let code = if certificate.lossless { EXIT_OK } else { EXIT_NOT_CERTIFIED };
    let lumping_file = LumpingFile::from(&outcome.lumping);
    if let Some(out) = &config.out {
        let mut text = serde_json::to_string(&lumping_file).expect("lumping serializes");
        text.push('\n');
        write_file(out, &text)?;
    }
    let text = match config.format {
        Format::Json => {
            let violation = certificate.violation.map(|v| {
                json!({"edge": [v.edge.0, v.edge.1], "accessor": v.accessor})
            });
            render_json(
                config,
                json!({
                    "N": p.n(),
                    "M": outcome.lumping.n_out(),
                    "lumping": lumping_file,
                    "partition": PartitionJson::from(&outcome.partition),
                    "exact": outcome.exact,
                    "loss": LossReportJson::from(&outcome.report),
                    "certified_lossless": certificate.lossless,
                    "violation": violation,
                    "d_max": dmax_lower_bound(&p.adjacency(limits.positivity)),
                    "characteristic_graph": graph_json(&outcome.graph),
                }),
            )
        }
        Format::Dot => outcome.graph.to_dot("characteristic", chain.labels.as_deref()),
        Format::Edges => outcome.graph.to_edge_list(),
        Format::Csv => return Err(unsupported(config, "lump")),
    };
    Ok(Outcome { text, code })
}

fn block_sweep(config: &RunConfig, path: &Path, limits: &Limits) -> Result<Outcome, (String, Failure)> {
    let chain = load_chain(path).map_err(|f| (String::new(), f))?;
    let k_max = config.k.unwrap_or(1);
    let mut text = String::new();
    match config.format {
        Format::Json => {}
        Format::Csv => {
            let unit = if config.bits { "bits" } else { "nats" };
            text.push_str(&format!("K,M_K,S_K,rate_{unit},log_lambda_{unit},exact\n"));
        }
        _ => return Err((String::new(), unsupported(config, "block"))),
    }
    for k in 1..=k_max {
        let analysis = match block_analysis(&chain.matrix, k, config.solver.into(), limits) {
            Ok(a) => a,
            Err(e) => return Err((text, e.into())),
        };
        let record = BlockAnalysisJson::from(&analysis);
        match config.format {
            Format::Csv => {
                let scale = if config.bits { 1.0 / crate::entropy::NATS_PER_BIT } else { 1.0 };
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    record.k,
                    record.m_k,
                    record.s_k,
                    record.rate_nats * scale,
                    record.log_lambda_nats * scale,
                    record.exact
                ));
            }
            _ => text.push_str(&render_ndjson(config, serde_json::to_value(&record).unwrap())),
        }
    }
    Ok(Outcome::ok(text))
}

fn decode(config: &RunConfig, chain: &Path, lumping: &Path, obs: &Path, x1: usize) -> Result<Outcome, Failure> {
    let p = load_chain(chain)?.matrix;
    let g = io::parse_lumping_json(&read(lumping)?).map_err(|e| parse_failure(lumping, e))?;
    if g.n_in() != p.n() {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("lumping is defined on {} states but the chain has {}", g.n_in(), p.n()),
        ));
    }
    let y = io::parse_observations(&read(obs)?).map_err(|e| parse_failure(obs, e))?;
    if config.format != Format::Json {
        return Err(unsupported(config, "decode"));
    }
    match reconstruct(&p.support(), &g, x1, &y) {
        Ok(states) => Ok(Outcome::ok(render_json(
            config,
            json!({"length": states.len(), "states": states}),
        ))),
        Err(e @ DecodeError::Impossible { position }) => Err(Failure::new(
            EXIT_IMPOSSIBLE,
            format!("{e}\n{}", json!({"error": "impossible", "position": position})),
        )),
        Err(DecodeError::Ambiguous { position, candidates }) => Err(Failure::new(
            EXIT_AMBIGUOUS,
            format!(
                "observation {position} is ambiguous\n{}",
                json!({"error": "ambiguous", "position": position, "candidates": candidates})
            ),
        )),
        Err(e) => Err(Failure::new(EXIT_INPUT, e.to_string())),
    }
}

fn simulate(config: &RunConfig, chain: &Path, lumping: Option<&Path>, length: usize) -> Result<Outcome, Failure> {
    let p = load_chain(chain)?.matrix;
    if length == 0 {
        return Err(Failure::new(EXIT_INPUT, "--length must be at least 1"));
    }
    let states = simulate_chain(&p, length, config.seed.unwrap_or(0))?;
    let observations = match lumping {
        Some(path) => {
            let g = io::parse_lumping_json(&read(path)?).map_err(|e| parse_failure(path, e))?;
            if g.n_in() != p.n() {
                return Err(Failure::new(EXIT_INPUT, "lumping does not match the chain"));
            }
            Some(states[1..].iter().map(|&x| g.apply(x)).collect::<Vec<_>>())
        }
        None => None,
    };
    match config.format {
        Format::Json => Ok(Outcome::ok(render_json(
            config,
            json!({"x1": states[0], "states": states, "observations": observations}),
        ))),
        // whitespace-separated observations, the format `decode --obs` reads
        Format::Csv => {
            let seq = observations.unwrap_or_else(|| states.clone());
            let words: Vec<String> = seq.iter().map(usize::to_string).collect();
            Ok(Outcome::ok(format!("{}\n", words.join(" "))))
        }
        _ => Err(unsupported(config, "simulate")),
    }
}

fn prop1(config: &RunConfig, joint: &Path, channel: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let q = io::parse_joint_json(&read(joint)?).map_err(|e| parse_failure(joint, e))?;
    let w = io::parse_channel_json(&read(channel)?).map_err(|e| parse_failure(channel, e))?;
    let check = check_prop1(&q, &w, limits.positivity)?;
    if config.format != Format::Json {
        return Err(unsupported(config, "check-prop1"));
    }
    let text = render_json(
        config,
        json!({
            "subset": check.subset,
            "entropy_nats": check.entropy,
            "consistent": check.consistent,
            "units": "nats",
        }),
    );
    Ok(Outcome {
        text,
        code: if check.consistent { EXIT_OK } else { EXIT_NOT_CERTIFIED },
    })
}

fn sideinfo(config: &RunConfig, chain: &Path, channel: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let loaded = load_chain(chain)?;
    let w = io::parse_channel_json(&read(channel)?).map_err(|e| parse_failure(channel, e))?;
    let k = config.k.unwrap_or(1);
    let source = JointBlockSource::new(loaded.matrix, w, k)?;
    let formula = sideinfo_characteristic_graph_formula(&source, limits)?;
    let text = match config.format {
        Format::Json => {
            let conormal = sideinfo_conormal_part(&source, limits)?;
            let direct_agrees = match sideinfo_characteristic_graph_direct(&source, limits) {
                Ok(direct) => Some(direct == formula),
                Err(Error::CapExceeded { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let (partition, exact) = solve(&formula, config.solver.into(), limits.exact_vertices)?;
            render_json(
                config,
                json!({
                    "K": k,
                    "graph": graph_json(&formula),
                    "conormal_edges": conormal.edge_count(),
                    "unrealizable_edges": formula.edge_count() - conormal.edge_count(),
                    "direct_agrees": direct_agrees,
                    "gamma": partition.size(),
                    "exact": exact,
                    "complete": formula.edge_count() == formula.len() * formula.len().saturating_sub(1) / 2,
                }),
            )
        }
        Format::Dot => formula.to_dot("sideinfo", None),
        Format::Edges => formula.to_edge_list(),
        Format::Csv => return Err(unsupported(config, "sideinfo")),
    };
    Ok(Outcome::ok(text))
}
