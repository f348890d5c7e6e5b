//! File formats: chains (JSON or CSV), lumpings, joint distributions,
//! channels and observation sequences, plus the JSON report shapes.
//!
//! Every parser takes untrusted text and returns a [`ParseError`] instead of
//! panicking.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blockcode::BlockAnalysis;
use crate::chain::{StochasticMatrix, TransitionMatrix};
use crate::entropy::NATS_PER_BIT;
use crate::error::Error;
use crate::jointsource::JointDistribution;
use crate::lump::{LossReport, LumpingFunction};
use crate::partition::CliquePartition;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("byte offset {offset}: cannot read {token:?} as a non-negative integer")]
    Token { offset: usize, token: String },
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub states: usize,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// A chain together with its optional state labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledChain {
    pub matrix: TransitionMatrix,
    pub labels: Option<Vec<String>>,
}

pub fn parse_chain_json(text: &str) -> Result<LabelledChain, ParseError> {
    let file: ChainFile = serde_json::from_str(text)?;
    if file.states != file.p.len() {
        return Err(Error::Invalid(format!(
            "\"states\" is {} but \"P\" has {} rows",
            file.states,
            file.p.len()
        ))
        .into());
    }
    if let Some(labels) = &file.labels {
        if labels.len() != file.states {
            return Err(Error::Invalid(format!(
                "{} labels for {} states",
                labels.len(),
                file.states
            ))
            .into());
        }
    }
    Ok(LabelledChain {
        matrix: TransitionMatrix::new(file.p)?,
        labels: file.labels,
    })
}

/// `N` lines of `N` comma-separated probabilities, no header.
pub fn parse_chain_csv(text: &str) -> Result<LabelledChain, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ParseError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| ParseError::Csv {
                    line,
                    message: format!("{field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(LabelledChain {
        matrix: TransitionMatrix::new(rows)?,
        labels: None,
    })
}

/// JSON when the first non-blank character is `{`, CSV otherwise.
pub fn parse_chain(text: &str) -> Result<LabelledChain, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_chain_json(text)
    } else {
        parse_chain_csv(text)
    }
}

pub fn chain_to_json(chain: &TransitionMatrix, labels: Option<&[String]>) -> String {
    let file = ChainFile {
        states: chain.n(),
        p: chain.as_stochastic().to_rows(),
        labels: labels.map(<[String]>::to_vec),
    };
    serde_json::to_string(&file).expect("chain serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LumpingFile {
    pub n_in: usize,
    pub n_out: usize,
    pub map: Vec<usize>,
}

impl From<&LumpingFunction> for LumpingFile {
    fn from(g: &LumpingFunction) -> Self {
        Self {
            n_in: g.n_in(),
            n_out: g.n_out(),
            map: g.map().to_vec(),
        }
    }
}

pub fn parse_lumping_json(text: &str) -> Result<LumpingFunction, ParseError> {
    let file: LumpingFile = serde_json::from_str(text)?;
    lumping_from_file(file)
}

fn lumping_from_file(file: LumpingFile) -> Result<LumpingFunction, ParseError> {
    if file.n_in != file.map.len() {
        return Err(Error::Invalid(format!(
            "\"n_in\" is {} but \"map\" has {} entries",
            file.n_in,
            file.map.len()
        ))
        .into());
    }
    Ok(LumpingFunction::new(file.map, file.n_out)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub nx: usize,
    pub nz: usize,
    pub q: Vec<Vec<f64>>,
}

pub fn parse_joint_json(text: &str) -> Result<JointDistribution, ParseError> {
    let file: JointFile = serde_json::from_str(text)?;
    if file.q.len() != file.nx || file.q.iter().any(|r| r.len() != file.nz) {
        return Err(Error::Invalid(format!(
            "\"q\" does not have shape {}x{}",
            file.nx, file.nz
        ))
        .into());
    }
    Ok(JointDistribution::new(file.q)?)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ChannelFile {
    Matrix {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
    },
    Lumping(LumpingFile),
}

/// `{"W": [[...], ...]}` or a lumping file read as a 0/1 channel.
pub fn parse_channel_json(text: &str) -> Result<StochasticMatrix, ParseError> {
    match serde_json::from_str::<ChannelFile>(text)? {
        ChannelFile::Matrix { w } => Ok(StochasticMatrix::new(w)?),
        ChannelFile::Lumping(file) => Ok(lumping_from_file(file)?.channel()),
    }
}

/// Lumped symbols separated by whitespace or commas, or a JSON array.
pub fn parse_observations(text: &str) -> Result<Vec<usize>, ParseError> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut out = Vec::new();
    let mut start = None;
    let bytes = text.as_bytes();
    for i in 0..=bytes.len() {
        let sep = i == bytes.len() || bytes[i].is_ascii_whitespace() || bytes[i] == b',';
        match (sep, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let token = &text[s..i];
                let value = token.parse::<usize>().map_err(|_| ParseError::Token {
                    offset: s,
                    token: token.to_string(),
                })?;
                out.push(value);
                start = None;
            }
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionJson {
    pub size: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl From<&CliquePartition> for PartitionJson {
    fn from(p: &CliquePartition) -> Self {
        Self {
            size: p.size(),
            blocks: p.blocks().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReportJson {
    pub conditional_entropy: f64,
    pub bound_first: Option<f64>,
    pub bound_second: Option<f64>,
    pub epsilon: f64,
    pub lossless: bool,
    pub units: &'static str,
}

impl From<&LossReport> for LossReportJson {
    fn from(r: &LossReport) -> Self {
        Self {
            conditional_entropy: r.conditional_entropy,
            bound_first: r.bound_first,
            bound_second: r.bound_second,
            epsilon: r.epsilon,
            lossless: r.lossless,
            units: "nats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockAnalysisJson {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M_K")]
    pub m_k: usize,
    #[serde(rename = "S_K")]
    pub s_k: usize,
    pub rate_nats: f64,
    pub log_lambda_nats: f64,
    pub exact: bool,
}

impl From<&BlockAnalysis> for BlockAnalysisJson {
    fn from(a: &BlockAnalysis) -> Self {
        Self {
            k: a.k,
            m_k: a.m_k,
            s_k: a.s_k,
            rate_nats: a.rate,
            log_lambda_nats: a.log_lambda,
            exact: a.exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub irreducible: bool,
    pub aperiodic: bool,
    pub period: usize,
    pub mu: Vec<f64>,
    pub entropy_rate_nats: f64,
    pub log_lambda_nats: f64,
    pub d_max: usize,
    pub units: &'static str,
}

/// Entropy-valued keys without a `_nats` suffix.
const ENTROPY_KEYS: &[&str] = &["conditional_entropy", "bound_first", "bound_second", "entropy"];

/// Rescales every entropy in a JSON report from nats to bits: keys ending in
/// `_nats` become `_bits`, the bare entropy keys are scaled in place and any
/// `units` field is set to `"bits"`.
pub fn to_bits(value: &mut Value) {
    match value {
        Value::Object(map) => {
            let entries: Vec<(String, Value)> = std::mem::take(map).into_iter().collect();
            for (key, mut v) in entries {
                let (key, scale) = match key.strip_suffix("_nats") {
                    Some(stem) => (format!("{stem}_bits"), true),
                    None => {
                        let scale = ENTROPY_KEYS.contains(&key.as_str());
                        (key, scale)
                    }
                };
                if key == "units" {
                    v = Value::from("bits");
                } else if scale {
                    if let Some(x) = v.as_f64() {
                        v = Value::from(x / NATS_PER_BIT);
                    }
                } else {
                    to_bits(&mut v);
                }
                map.insert(key, v);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(to_bits),
        _ => {}
    }
}
