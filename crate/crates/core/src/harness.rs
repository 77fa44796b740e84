//! Monte Carlo experiments: configuration, per-trial simulation, summary
//! statistics and result files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    capacity, classify_regime, compatible_stats, decompose_received, enumerate_compatible, jam,
    leading_rows_transform, lemma_ratios, secrecy_capacity, sweep_assignments, AdversaryPower,
    AdversaryView, AttackStrategy, EdgeAssignment, Knowledge, Regime,
};
use crate::codebook::{Codebook, DecodeOutcome, SamplingMode};
use crate::error::{Error, Result};
use crate::gf::{FieldSpec, Gf};
use crate::network::{LinearNetworkCode, Topology, TopologySpec};
use crate::secrecy::{CosetCode, LEAKAGE_BUDGET};
use crate::subspace::{sample_uniform_subspace, Subspace};

/// Most codeword comparisons the decoder may make per trial.
pub const DECODE_BUDGET: u64 = 1 << 22;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const WORST_CASE_LABEL: &str = "implemented-adversary worst case";

/// Stream id used for the fixed codebook; trial streams never reach it.
const FIXED_CODEBOOK_STREAM: u64 = u64::MAX;

/// A built-in name, a path to a topology file, or an inline topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologyRef {
    Name(String),
    Inline(TopologySpec),
}

impl TopologyRef {
    pub fn resolve(&self) -> Result<Topology> {
        match self {
            TopologyRef::Inline(spec) => Topology::from_spec(spec),
            TopologyRef::Name(name) => {
                if name == "butterfly" || name == "diamond" || name.starts_with("parallel:") {
                    Topology::named(name)
                } else if Path::new(name).exists() {
                    Topology::load(Path::new(name))
                } else {
                    Err(Error::config(format!(
                        "topology {name:?} is neither a built-in nor an existing file"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    #[default]
    Rlnc,
    Identity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig {
    pub n: usize,
    /// Codeword dimension; defaults to the min-cut.
    #[serde(default, alias = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    /// Message count M.
    #[serde(default, alias = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub mode: SamplingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssignmentConfig {
    /// `"sweep"`: every assignment on min-cut edges.
    Keyword(String),
    Explicit(EdgeAssignment),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategyConfig {
    One(AttackStrategy),
    Many(Vec<AttackStrategy>),
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::One(AttackStrategy::NoAttack)
    }
}

impl StrategyConfig {
    pub fn list(&self) -> Vec<AttackStrategy> {
        match self {
            StrategyConfig::One(s) => vec![*s],
            StrategyConfig::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecrecyConfig {
    #[serde(default)]
    pub enabled: bool,
    /// Coset code length.
    #[serde(rename = "L", alias = "l")]
    pub len: usize,
    pub z_r: usize,
    /// Extension degree; must equal the packet length n when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub topology: TopologyRef,
    #[serde(default)]
    pub coding: Coding,
    pub codebook: CodebookConfig,
    #[serde(default)]
    pub fixed_codebook: bool,
    #[serde(default)]
    pub power: AdversaryPower,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<AssignmentConfig>,
    #[serde(default)]
    pub strategy: StrategyConfig,
    /// Decoder radius; defaults to z_w.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder_radius: Option<usize>,
    #[serde(default)]
    pub knowledge: Knowledge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrecy: Option<SecrecyConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|source| Error::Json {
            context: "experiment config".into(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Correct,
    WrongMessage,
    Ambiguous,
    NoneWithinRadius,
    RankDeficient,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::Correct,
        Verdict::WrongMessage,
        Verdict::Ambiguous,
        Verdict::NoneWithinRadius,
        Verdict::RankDeficient,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Correct => "Correct",
            Verdict::WrongMessage => "WrongMessage",
            Verdict::Ambiguous => "Ambiguous",
            Verdict::NoneWithinRadius => "NoneWithinRadius",
            Verdict::RankDeficient => "RankDeficient",
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub message: u64,
    pub verdict: Verdict,
    pub compatible_count: usize,
    pub dim_ro: usize,
    pub dim_u: usize,
    pub dim_jam: usize,
    #[serde(skip)]
    pub decoded: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub trials: usize,
    pub errors: usize,
    pub error_probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub histogram: BTreeMap<String, usize>,
    pub mean_compatible: f64,
    pub regime: Regime,
    pub capacity: usize,
    pub secrecy_capacity: usize,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl SummaryStats {
    pub fn from_trials(results: &[TrialResult], c: usize, power: &AdversaryPower) -> Self {
        let mut histogram: BTreeMap<String, usize> = Verdict::ALL
            .iter()
            .map(|v| (v.name().to_string(), 0))
            .collect();
        for r in results {
            *histogram
                .get_mut(r.verdict.name())
                .expect("all verdicts present") += 1;
        }
        let n = results.len();
        let errors = n - histogram["Correct"];
        let (lo, hi) = wilson_interval(errors, n);
        let mean_compatible = if n == 0 {
            0.0
        } else {
            results
                .iter()
                .map(|r| r.compatible_count as f64)
                .sum::<f64>()
                / n as f64
        };
        Self {
            trials: n,
            errors,
            error_probability: if n == 0 {
                0.0
            } else {
                errors as f64 / n as f64
            },
            wilson_low: lo,
            wilson_high: hi,
            histogram,
            mean_compatible,
            regime: classify_regime(c, power),
            capacity: capacity(c, power),
            secrecy_capacity: secrecy_capacity(c, power),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case: usize,
    pub strategy: AttackStrategy,
    pub assignment: EdgeAssignment,
    pub summary: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub label: String,
    pub case: usize,
    pub strategy: AttackStrategy,
    pub assignment: EdgeAssignment,
    pub error_probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    #[serde(rename = "L")]
    pub len: usize,
    pub z_r: usize,
    pub ell: usize,
    /// Secret symbols per generation, L - z_r.
    pub secret_symbols: usize,
    /// Exact independence of m and every z_r-subset of coset symbols.
    pub perfect_against_z_r: Option<bool>,
    /// Some (z_r + 1)-subset leaks.
    pub leaks_at_z_r_plus_1: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub field: String,
    pub min_cut: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub c_override: bool,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub rate: f64,
    pub codebook_mode: String,
    pub decoder_radius: usize,
    /// Repeated codewords in the fixed codebook, if there is one.
    pub collisions: Option<usize>,
    pub inert_edges: Vec<usize>,
    pub cases: Vec<CaseSummary>,
    pub worst_case: WorstCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrecy: Option<SecrecyReport>,
}

#[derive(Debug, Clone)]
pub struct CaseRun {
    pub case: usize,
    pub strategy: AttackStrategy,
    pub assignment: EdgeAssignment,
    pub trials: Vec<TrialResult>,
    pub summary: SummaryStats,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub cases: Vec<CaseRun>,
}

/// Caller mistakes inside a config are configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::Usage(s) | Error::Dimension(s) | Error::Domain(s) => Error::Config(s),
        other => other,
    }
}

enum Source {
    Fixed(Codebook),
    Fresh { mode: SamplingMode, m: usize },
}

/// A validated experiment, ready to run.
pub struct Experiment {
    cfg: ExperimentConfig,
    field: Gf,
    topology: Topology,
    min_cut: usize,
    c: usize,
    n: usize,
    m: usize,
    radius: usize,
    source: Source,
    identity: Option<LinearNetworkCode>,
    cases: Vec<(AttackStrategy, EdgeAssignment)>,
    secrecy: Option<CosetCode>,
}

impl Experiment {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let field = cfg.field.build().map_err(as_config)?;
        let topology = cfg.topology.resolve().map_err(as_config)?;
        let min_cut = topology.min_cut();
        let n = cfg.codebook.n;

        let loaded = match &cfg.codebook.load {
            Some(path) => {
                let cb = Codebook::load(path).map_err(as_config)?;
                if cb.field() != &field || cb.n() != n {
                    return Err(Error::config(format!(
                        "loaded codebook is over {} with n = {}, config says {field} with n = {n}",
                        cb.field(),
                        cb.n()
                    )));
                }
                Some(cb)
            }
            None => None,
        };
        let c = match &loaded {
            Some(cb) => cb.dim(),
            None => cfg.codebook.c.unwrap_or(min_cut),
        };
        if c == 0 {
            return Err(Error::config(
                "codeword dimension is 0 (no source-sink path?)",
            ));
        }
        if c > n {
            return Err(Error::config(format!(
                "codeword dimension {c} exceeds n = {n}"
            )));
        }

        let secrecy = match &cfg.secrecy {
            Some(s) if s.enabled => {
                if field.e() != 1 {
                    return Err(Error::config("secrecy layer needs a prime base field"));
                }
                if s.ell.is_some_and(|l| l != n) {
                    return Err(Error::config(format!(
                        "secrecy ell must equal the packet length n = {n}"
                    )));
                }
                Some(CosetCode::new(field.p(), n as u32, s.len, s.z_r).map_err(as_config)?)
            }
            _ => None,
        };

        let m = match (&loaded, &secrecy, cfg.codebook.m) {
            (Some(cb), _, _) => cb.len(),
            (None, Some(code), given) => {
                let words = code
                    .word_count()
                    .filter(|&w| w <= DECODE_BUDGET)
                    .ok_or_else(|| Error::budget("coset words exceed the decode budget"))?
                    as usize;
                if given.is_some_and(|g| g != words) {
                    return Err(Error::config(format!(
                        "secrecy pipeline needs M = q^(nL) = {words}"
                    )));
                }
                words
            }
            (None, None, Some(m)) => m,
            (None, None, None) => return Err(Error::config("codebook needs m or load")),
        };
        if m == 0 {
            return Err(Error::config("codebook needs at least one codeword"));
        }
        if let Some(code) = &secrecy {
            if loaded
                .as_ref()
                .is_some_and(|cb| Some(cb.len() as u64) != code.word_count())
            {
                return Err(Error::config(
                    "loaded codebook size does not match the coset code",
                ));
            }
        }
        if m as u64 > DECODE_BUDGET {
            return Err(Error::budget(format!(
                "M = {m} exceeds the decode budget of {DECODE_BUDGET} comparisons per trial"
            )));
        }
        if cfg.codebook.mode == SamplingMode::Distinct && loaded.is_none() {
            let total = crate::subspace::gaussian_coeff(n, c, field.q() as u64)?;
            if BigUint::from(m) > total {
                return Err(Error::config(format!(
                    "{m} distinct codewords requested from a Grassmannian of size {total}"
                )));
            }
        }

        let power = cfg.power;
        if power.z() > topology.num_edges() {
            return Err(Error::config(format!(
                "adversary controls {} edges, topology has {}",
                power.z(),
                topology.num_edges()
            )));
        }
        let assignments = match &cfg.assignment {
            Some(AssignmentConfig::Explicit(a)) => {
                a.validate(&topology, &power).map_err(as_config)?;
                vec![a.clone()]
            }
            Some(AssignmentConfig::Keyword(k)) if k == "sweep" => {
                sweep_assignments(&topology, &power).map_err(as_config)?
            }
            Some(AssignmentConfig::Keyword(k)) => {
                return Err(Error::config(format!("unknown assignment keyword {k:?}")))
            }
            None => {
                let first = sweep_assignments(&topology, &power)
                    .map_err(as_config)?
                    .into_iter()
                    .next()
                    .unwrap_or_default();
                vec![first]
            }
        };
        let strategies = cfg.strategy.list();
        if strategies.is_empty() {
            return Err(Error::config("no strategy given"));
        }
        let cases = assignments
            .iter()
            .flat_map(|a| strategies.iter().map(move |&s| (s, a.clone())))
            .collect();

        let identity = match cfg.coding {
            Coding::Identity => {
                Some(LinearNetworkCode::identity(&topology, &field, c).map_err(as_config)?)
            }
            Coding::Rlnc => None,
        };

        let source = match loaded {
            Some(cb) => Source::Fixed(cb),
            None if cfg.fixed_codebook => {
                let mut rng = stream_rng(cfg.seed, FIXED_CODEBOOK_STREAM);
                Source::Fixed(Codebook::build_random(
                    &field,
                    n,
                    c,
                    m,
                    cfg.codebook.mode,
                    &mut rng,
                )?)
            }
            None => Source::Fresh {
                mode: cfg.codebook.mode,
                m,
            },
        };

        Ok(Self {
            cfg: cfg.clone(),
            field,
            topology,
            min_cut,
            c,
            n,
            m,
            radius: cfg.decoder_radius.unwrap_or(power.z_w()),
            source,
            identity,
            cases,
            secrecy,
        })
    }

    pub fn cases(&self) -> &[(AttackStrategy, EdgeAssignment)] {
        &self.cases
    }

    pub fn codeword_dim(&self) -> usize {
        self.c
    }

    fn codebook_mode(&self) -> &'static str {
        match (&self.source, &self.cfg.codebook.load) {
            (Source::Fixed(_), Some(_)) => "loaded",
            (Source::Fixed(_), None) => "fixed",
            (Source::Fresh { .. }, _) => "fresh",
        }
    }

    /// One trial of case `case`.
    pub fn run_trial(&self, case: usize, trial: usize) -> Result<TrialResult> {
        let (strategy, assignment) = &self.cases[case];
        let mut rng = stream_rng(self.cfg.seed, ((case as u64) << 32) | trial as u64);
        let fresh;
        let cb = match &self.source {
            Source::Fixed(cb) => cb,
            Source::Fresh { mode, m } => {
                fresh = Codebook::build_random(&self.field, self.n, self.c, *m, *mode, &mut rng)?;
                &fresh
            }
        };

        let (message, secret) = match &self.secrecy {
            Some(code) => {
                let sf = code.symbol_field();
                let secret: Vec<u32> = (0..code.secret_len())
                    .map(|_| sf.sample(&mut rng))
                    .collect();
                let s = code.secret_encode(&secret, &mut rng)?;
                (code.word_index(&s)?, Some(secret))
            }
            None => (rng.gen_range(0..self.m as u64), None),
        };
        let x = cb.encode(message as usize)?;

        let sampled;
        let code = match &self.identity {
            Some(code) => code,
            None => {
                sampled =
                    LinearNetworkCode::sample_rlnc(&self.topology, &self.field, self.c, &mut rng);
                &sampled
            }
        };
        let transfer = code.transfer_matrices(assignment)?;
        let view_z = transfer.t_aj.mat_mul(x)?;
        let view = AdversaryView {
            codebook: cb,
            assignment,
            transfer: &transfer,
            z: &view_z,
            knowledge: self.cfg.knowledge,
        };
        let jam_rows = jam(*strategy, &view, &mut rng)?;
        let out = code.transmit(x, assignment, jam_rows.as_ref())?;
        let y = Subspace::from_matrix(&out.y);
        let outcome = cb.decode(&y, self.radius)?;

        let correct = match (outcome, &self.secrecy, &secret) {
            (DecodeOutcome::Unique(i), Some(code), Some(secret)) => {
                code.secret_decode(&code.word_from_index(i as u64))? == *secret
            }
            (DecodeOutcome::Unique(i), _, _) => i as u64 == message,
            _ => false,
        };
        let verdict = if correct {
            Verdict::Correct
        } else if transfer.t_ab.rank() < self.c {
            Verdict::RankDeficient
        } else {
            match outcome {
                DecodeOutcome::Unique(_) => Verdict::WrongMessage,
                DecodeOutcome::Ambiguous => Verdict::Ambiguous,
                DecodeOutcome::NoneWithinRadius => Verdict::NoneWithinRadius,
            }
        };

        let compatible_count = enumerate_compatible(cb, &transfer.t_aj, &view_z)?.len();
        let jam_span = match &jam_rows {
            Some(j) => Subspace::from_matrix(j),
            None => Subspace::zero(&self.field, self.n),
        };
        let d = decompose_received(
            &Subspace::from_matrix(x),
            &y,
            &Subspace::from_matrix(&out.z),
            &jam_span,
        )?;
        Ok(TrialResult {
            trial,
            message,
            verdict,
            compatible_count,
            dim_ro: d.dim_ro,
            dim_u: d.dim_u,
            dim_jam: d.dim_jam,
            decoded: match outcome {
                DecodeOutcome::Unique(i) => Some(i),
                _ => None,
            },
        })
    }

    pub fn run(&self) -> Result<RunOutput> {
        let trials = self.cfg.trials;
        let power = self.cfg.power;
        let mut runs = Vec::with_capacity(self.cases.len());
        for (case, (strategy, assignment)) in self.cases.iter().enumerate() {
            let results = (0..trials)
                .into_par_iter()
                .map(|t| self.run_trial(case, t))
                .collect::<Result<Vec<_>>>()?;
            let summary = SummaryStats::from_trials(&results, self.c, &power);
            runs.push(CaseRun {
                case,
                strategy: *strategy,
                assignment: assignment.clone(),
                trials: results,
                summary,
            });
        }
        let worst = runs
            .iter()
            .fold(None::<&CaseRun>, |best, r| match best {
                Some(b) if b.summary.error_probability >= r.summary.error_probability => Some(b),
                _ => Some(r),
            })
            .expect("at least one case");
        let worst_case = WorstCase {
            label: WORST_CASE_LABEL.to_string(),
            case: worst.case,
            strategy: worst.strategy,
            assignment: worst.assignment.clone(),
            error_probability: worst.summary.error_probability,
            wilson_low: worst.summary.wilson_low,
            wilson_high: worst.summary.wilson_high,
        };
        let secrecy = self.secrecy.as_ref().map(secrecy_report).transpose()?;
        let report = RunReport {
            version: VERSION.to_string(),
            seed: self.cfg.seed,
            config: serde_json::to_value(&self.cfg).expect("config serializes"),
            field: self.field.to_string(),
            min_cut: self.min_cut,
            c: self.c,
            c_override: self.c != self.min_cut,
            n: self.n,
            m: self.m,
            rate: (self.m as f64).ln() / (self.field.q() as f64).ln() / self.n as f64,
            codebook_mode: self.codebook_mode().to_string(),
            decoder_radius: self.radius,
            collisions: match &self.source {
                Source::Fixed(cb) => Some(cb.collisions()),
                Source::Fresh { .. } => None,
            },
            inert_edges: self.topology.inert_edges().to_vec(),
            cases: runs
                .iter()
                .map(|r| CaseSummary {
                    case: r.case,
                    strategy: r.strategy,
                    assignment: r.assignment.clone(),
                    summary: r.summary.clone(),
                })
                .collect(),
            worst_case,
            secrecy,
        };
        Ok(RunOutput {
            report,
            cases: runs,
        })
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn secrecy_report(code: &CosetCode) -> Result<SecrecyReport> {
    let feasible = code.word_count().is_some_and(|w| w <= LEAKAGE_BUDGET);
    let (perfect, leaks) = if feasible {
        let perfect = code.secure_against_all(code.z_r())?;
        let leaks = if code.z_r() < code.len() {
            Some(!code.secure_against_all(code.z_r() + 1)?)
        } else {
            None
        };
        (Some(perfect), leaks)
    } else {
        (None, None)
    };
    Ok(SecrecyReport {
        len: code.len(),
        z_r: code.z_r(),
        ell: code.ell(),
        secret_symbols: code.secret_len(),
        perfect_against_z_r: perfect,
        leaks_at_z_r_plus_1: leaks,
    })
}

/// Validates and runs `cfg`.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<RunOutput> {
    Experiment::prepare(cfg)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Per-case file name: `out.csv` stays as is for a single case and becomes
/// `out-<k>.csv` otherwise.
pub fn case_path(path: &Path, case: usize, cases: usize) -> PathBuf {
    if cases <= 1 {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{case}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{case}"),
    };
    path.with_file_name(name)
}

pub fn write_trials_csv(trials: &[TrialResult], path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record([
        "trial",
        "message",
        "verdict",
        "compatible_count",
        "dim_ro",
        "dim_u",
        "dim_jam",
    ])
    .map_err(csv_err)?;
    for t in trials {
        w.serialize(t).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialResult>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Writes per-case CSVs or the JSON summary to `path`; returns the files written.
pub fn emit_results(out: &RunOutput, path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Csv => out
            .cases
            .iter()
            .map(|c| {
                let p = case_path(path, c.case, out.cases.len());
                write_trials_csv(&c.trials, &p)?;
                Ok(p)
            })
            .collect(),
        OutputFormat::Json => {
            let s = serde_json::to_string_pretty(&out.report).expect("report serializes");
            std::fs::write(path, s + "\n").map_err(|e| Error::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&s).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityRow {
    #[serde(rename = "C")]
    pub c: usize,
    pub z_ro: usize,
    pub z_wo: usize,
    pub z_rw: usize,
    pub regime: Regime,
    pub capacity: usize,
    pub secrecy_capacity: usize,
}

pub fn capacity_table(
    c_range: impl IntoIterator<Item = usize>,
    powers: &[AdversaryPower],
) -> Vec<CapacityRow> {
    c_range
        .into_iter()
        .flat_map(|c| {
            powers.iter().map(move |p| CapacityRow {
                c,
                z_ro: p.z_ro,
                z_wo: p.z_wo,
                z_rw: p.z_rw,
                regime: classify_regime(c, p),
                capacity: capacity(c, p),
                secrecy_capacity: secrecy_capacity(c, p),
            })
        })
        .collect()
}

/// Where the observed codeword comes from in the compatible-count experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    /// Drawn independently of the codebook; the count is Binomial(M, P(Z)).
    #[default]
    Independent,
    /// A uniformly chosen codeword of the book; the count is 1 + Binomial(M-1, P(Z)).
    FromCodebook,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatConfig {
    pub q: u32,
    pub n: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub z_r: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub codebooks: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub observed: Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub config: CompatConfig,
    /// Exact probability an independent uniform codeword matches, as `num/den`.
    pub probability: String,
    pub probability_f64: f64,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub expected_mean: f64,
    /// Standard deviation of the empirical mean.
    pub sigma: f64,
    pub within_3_sigma: bool,
    /// `[n, C-z_r] / [n, C]`.
    pub ratio_n: f64,
    /// `[n-z_r, C-z_r] / [n, C]`.
    pub ratio_n_minus_z_r: f64,
}

pub fn compatible_count_experiment(cfg: &CompatConfig) -> Result<CompatReport> {
    if cfg.m == 0 || cfg.codebooks == 0 {
        return Err(Error::usage("need M >= 1 and at least one codebook"));
    }
    if cfg.m as u64 > DECODE_BUDGET {
        return Err(Error::budget(format!(
            "M = {} exceeds {DECODE_BUDGET}",
            cfg.m
        )));
    }
    let field = Gf::of_order(cfg.q)?;
    let t = leading_rows_transform(&field, cfg.z_r, cfg.c)?;
    let stats = compatible_stats(&field, cfg.n, cfg.c, &t)?;
    let (extra, fixed) = match cfg.observed {
        Observed::Independent => (cfg.m as u64, 0.0),
        Observed::FromCodebook => (cfg.m as u64 - 1, 1.0),
    };
    let (mean, var) = stats.count_moments(extra);
    let counts = (0..cfg.codebooks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k as u64);
            let cb = Codebook::build_random(
                &field,
                cfg.n,
                cfg.c,
                cfg.m,
                SamplingMode::Replacement,
                &mut rng,
            )?;
            let z = match cfg.observed {
                Observed::Independent => {
                    let x0 = sample_uniform_subspace(&field, cfg.n, cfg.c, &mut rng)?;
                    t.mat_mul(x0.basis())?
                }
                Observed::FromCodebook => {
                    let m = rng.gen_range(0..cfg.m);
                    t.mat_mul(cb.encode(m)?)?
                }
            };
            Ok(enumerate_compatible(&cb, &t, &z)?.len())
        })
        .collect::<Result<Vec<usize>>>()?;
    let emp = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let expected = fixed + mean.to_f64().unwrap_or(f64::NAN);
    let sigma = (var.to_f64().unwrap_or(f64::NAN) / cfg.codebooks as f64).sqrt();
    let (ra, rb) = lemma_ratios(cfg.n, cfg.c, cfg.z_r, cfg.q as u64)?;
    Ok(CompatReport {
        config: cfg.clone(),
        probability: stats.p.to_string(),
        probability_f64: stats.p.to_f64().unwrap_or(f64::NAN),
        mean: emp,
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        expected_mean: expected,
        sigma,
        within_3_sigma: (emp - expected).abs() <= 3.0 * sigma,
        ratio_n: ra.to_f64().unwrap_or(f64::NAN),
        ratio_n_minus_z_r: rb.to_f64().unwrap_or(f64::NAN),
    })
}

/// Quick enumeration-oracle checks; one `(name, passed)` per check.
pub fn selftest() -> Vec<(String, bool)> {
    use crate::subspace::{
        decoding_region_bound, gaussian_coeff, grassmannian, injection_distance,
    };
    let mut out = Vec::new();

    let mut ok = true;
    for q in [2u32, 3] {
        let f = Gf::of_order(q).expect("small field");
        for n in 0..=4 {
            for k in 0..=n {
                let listed = grassmannian(&f, n, k).map(|g| g.len()).unwrap_or(0);
                ok &= gaussian_coeff(n, k, q as u64).ok() == Some(BigUint::from(listed));
            }
        }
    }
    out.push(("gaussian coefficients match enumeration".to_string(), ok));

    let f2 = Gf::prime(2).expect("GF(2)");
    let all: Vec<Subspace> = (0..=4)
        .flat_map(|k| grassmannian(&f2, 4, k).expect("small"))
        .collect();
    let mut ok = all.len() == 67;
    for a in &all {
        for b in &all {
            let d = injection_distance(a, b).expect("same ambient");
            ok &= (d == 0) == (a == b) && d == injection_distance(b, a).expect("same ambient");
        }
    }
    out.push((
        "injection distance is a symmetric, definite metric on F_2^4".to_string(),
        ok,
    ));

    let mut ok = (1..=6).all(|c| Topology::parallel(c).ok().map(|t| t.min_cut()) == Some(c));
    ok &= Topology::butterfly().min_cut() == 2 && Topology::diamond().min_cut() == 2;
    out.push(("built-in min-cuts".to_string(), ok));

    let mut ok = true;
    for (c, n) in [(2usize, 3usize), (2, 4), (3, 4)] {
        let y = &grassmannian(&f2, n, c).expect("small")[0];
        let region = grassmannian(&f2, n, c)
            .expect("small")
            .iter()
            .filter(|v| injection_distance(v, y).expect("same ambient") <= 1)
            .count();
        ok &= BigUint::from(region) <= decoding_region_bound(c, n, 1, 2).expect("valid") + 1u32;
    }
    out.push(("decoding region within bound".to_string(), ok));

    let cap = capacity_table([5], &[AdversaryPower::new(0, 1, 0)]);
    out.push((
        "capacity table".to_string(),
        cap[0].regime == Regime::Weak && cap[0].capacity == 4 && cap[0].secrecy_capacity == 4,
    ));

    let ok = CosetCode::new(2, 2, 3, 1)
        .and_then(|c| Ok(c.secure_against_all(1)? && !c.secure_against_all(2)?))
        .unwrap_or(false);
    out.push(("coset code perfect secrecy".to_string(), ok));
    out
}

/// `a..b`, `a..=b`, `a-b` or a single integer.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::config(format!("bad range {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..=") {
        Ok((num(a)?..=num(b)?).collect())
    } else if let Some((a, b)) = s.split_once("..") {
        Ok((num(a)?..num(b)?).collect())
    } else if let Some((a, b)) = s.split_once('-') {
        Ok((num(a)?..=num(b)?).collect())
    } else {
        Ok(vec![num(s)?])
    }
}

/// `z_ro,z_wo,z_rw` tuples separated by `;` or whitespace.
pub fn parse_powers(s: &str) -> Result<Vec<AdversaryPower>> {
    s.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<usize> = t
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config(format!("bad power tuple {t:?}")))?;
            match parts.as_slice() {
                [a, b, c] => Ok(AdversaryPower::new(*a, *b, *c)),
                _ => Err(Error::config(format!(
                    "power tuple {t:?} needs three entries"
                ))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "field": {"p": 2},
                "topology": "parallel:2",
                "coding": "identity",
                "codebook": {"n": 6, "m": 8, "mode": "distinct"},
                "trials": 50,
                "seed": 1
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert!(lo.abs() < 1e-12);
        assert!(hi > 0.003 && hi < 0.004);
        let (lo, hi) = wilson_interval(500, 1000);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn no_attack_identity_is_error_free() {
        let out = run_trials(&base_config()).unwrap();
        let s = &out.cases[0].summary;
        assert_eq!(s.errors, 0);
        assert_eq!(s.histogram.values().sum::<usize>(), 50);
        assert_eq!(out.report.codebook_mode, "fresh");
        assert!(!out.report.c_override);
        for t in &out.cases[0].trials {
            assert_eq!(t.compatible_count, 8);
            assert_eq!(t.dim_ro + t.dim_u + t.dim_jam, 2);
        }
    }

    #[test]
    fn config_errors_have_the_right_kind() {
        let mut cfg = base_config();
        cfg.codebook.m = Some(1 << 23);
        assert!(matches!(Experiment::prepare(&cfg), Err(Error::Budget(_))));
        let mut cfg = base_config();
        cfg.topology = TopologyRef::Name("no-such-topology".into());
        assert!(matches!(Experiment::prepare(&cfg), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.power = AdversaryPower::new(0, 0, 3);
        assert!(matches!(Experiment::prepare(&cfg), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.codebook.m = Some(10_000);
        assert!(matches!(Experiment::prepare(&cfg), Err(Error::Config(_))));
        let mut cfg = base_config();
        cfg.assignment = Some(AssignmentConfig::Keyword("all".into()));
        assert!(matches!(Experiment::prepare(&cfg), Err(Error::Config(_))));
        assert!(matches!(
            ExperimentConfig::from_json("{"),
            Err(Error::Json { .. })
        ));
    }

    #[test]
    fn sweep_builds_cartesian_cases() {
        let mut cfg = base_config();
        cfg.topology = TopologyRef::Name("parallel:4".into());
        cfg.codebook.n = 6;
        cfg.power = AdversaryPower::new(1, 1, 0);
        cfg.assignment = Some(AssignmentConfig::Keyword("sweep".into()));
        cfg.strategy = StrategyConfig::Many(vec![
            AttackStrategy::Symmetrization,
            AttackStrategy::PushTowardCompatible,
        ]);
        let exp = Experiment::prepare(&cfg).unwrap();
        assert_eq!(exp.cases().len(), 24);
    }

    #[test]
    fn override_is_flagged() {
        let mut cfg = base_config();
        cfg.topology = TopologyRef::Name("parallel:3".into());
        cfg.codebook.c = Some(2);
        cfg.coding = Coding::Rlnc;
        let out = run_trials(&cfg).unwrap();
        assert!(out.report.c_override);
        assert_eq!(out.report.c, 2);
    }

    #[test]
    fn secrecy_pipeline_recovers_secret() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "field": {"p": 2},
                "topology": "parallel:3",
                "coding": "identity",
                "codebook": {"n": 3},
                "fixed_codebook": true,
                "secrecy": {"enabled": true, "L": 2, "z_r": 1, "ell": 3},
                "trials": 40,
                "seed": 9
            }"#,
        )
        .unwrap();
        let exp = Experiment::prepare(&cfg).unwrap();
        assert_eq!(exp.m, 64);
        let out = exp.run().unwrap();
        let sec = out.report.secrecy.as_ref().unwrap();
        assert_eq!(sec.perfect_against_z_r, Some(true));
        assert_eq!(sec.leaks_at_z_r_plus_1, Some(true));
        // a fixed book of 64 subspaces of F_2^3 repeats, so only distinct decodes succeed
        for t in &out.cases[0].trials {
            if let Some(i) = t.decoded {
                assert_eq!(t.verdict, Verdict::Correct, "decoded {i}");
            }
        }
    }

    #[test]
    fn capacity_table_examples() {
        let rows = capacity_table([5, 2, 6], &parse_powers("0,1,0;0,0,1;1,0,1").unwrap());
        let get = |c, p: (usize, usize, usize)| {
            *rows
                .iter()
                .find(|r| r.c == c && (r.z_ro, r.z_wo, r.z_rw) == p)
                .unwrap()
        };
        let r = get(5, (0, 1, 0));
        assert_eq!(
            (r.regime, r.capacity, r.secrecy_capacity),
            (Regime::Weak, 4, 4)
        );
        let r = get(2, (0, 0, 1));
        assert_eq!(
            (r.regime, r.capacity, r.secrecy_capacity),
            (Regime::Strong, 0, 0)
        );
        let r = get(6, (1, 0, 1));
        assert_eq!(
            (r.regime, r.capacity, r.secrecy_capacity),
            (Regime::Weak, 5, 3)
        );
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_range("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_range("1..3").unwrap(), vec![1, 2]);
        assert_eq!(parse_range("2-4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("a").is_err());
        assert!(parse_powers("1,2").is_err());
    }

    #[test]
    fn case_paths() {
        let p = Path::new("/tmp/out.csv");
        assert_eq!(case_path(p, 0, 1), PathBuf::from("/tmp/out.csv"));
        assert_eq!(case_path(p, 3, 4), PathBuf::from("/tmp/out-3.csv"));
        assert_eq!(case_path(Path::new("res"), 1, 2), PathBuf::from("res-1"));
    }

    #[test]
    fn compat_trivial_cases() {
        let base = CompatConfig {
            q: 2,
            n: 4,
            c: 2,
            z_r: 0,
            m: 5,
            codebooks: 30,
            seed: 0,
            observed: Observed::FromCodebook,
        };
        let r = compatible_count_experiment(&base).unwrap();
        assert_eq!((r.min, r.max), (5, 5));
        let r = compatible_count_experiment(&CompatConfig {
            z_r: 1,
            m: 1,
            ..base.clone()
        })
        .unwrap();
        assert_eq!((r.min, r.max), (1, 1));
        let r = compatible_count_experiment(&CompatConfig {
            z_r: 0,
            observed: Observed::Independent,
            ..base
        })
        .unwrap();
        assert_eq!((r.min, r.max), (5, 5));
    }

    #[test]
    fn selftest_passes() {
        for (name, ok) in selftest() {
            assert!(ok, "{name}");
        }
    }
}
