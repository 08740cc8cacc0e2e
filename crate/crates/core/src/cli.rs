//! The `qss` command line: dealing, evaluation, audits and the self-test,
//! each emitting one deterministic JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance;
use crate::audit::{self, AdversaryModel, AuditReport};
use crate::backend::Backend;
use crate::circuit::{parse_circuit, Circuit};
use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::evaluation::{self, EvalMode, Transcript};
use crate::protocol::{self, DealerConfig, SharedSecretState, MAGIC_BLOCH};
use crate::serialize::{self, SharedStateDoc};
use crate::sparse::PauliSumState;

pub const SCHEMA_VERSION: u32 = 1;
pub const DISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "qss",
    version,
    about = "Threshold quantum secret sharing with Clifford+T evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Share a secret and emit the shared state.
    Deal(RunArgs),
    /// Share a secret, evaluate a circuit on it and decode.
    Eval(RunArgs),
    /// Run security audits on a dealt (and optionally evaluated) secret.
    Audit(RunArgs),
    /// Run the acceptance suite.
    Selftest(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Sparse,
    Dense,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Sample,
    Enumerate,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Number of parties.
    #[arg(long, default_value_t = 5)]
    pub parties: usize,
    /// Number of secret qubits.
    #[arg(long, default_value_t = 1)]
    pub secret_qubits: usize,
    /// Number of magic states dealt; defaults to the circuit's T-count.
    #[arg(long)]
    pub magic: Option<usize>,
    /// Circuit file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// zero, plus, magic, maximally-mixed, or a coefficient file.
    #[arg(long, default_value = "zero")]
    pub secret: String,
    #[arg(long, value_enum, default_value_t = BackendChoice::Sparse)]
    pub backend: BackendChoice,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeChoice::Sample)]
    pub mode: ModeChoice,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Adversary and audit selection (JSON).
    #[arg(long)]
    pub adversary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    Threshold,
    Form,
    Table,
    SecretIndependence,
    HonestBit,
}

impl AuditKind {
    const ALL: [AuditKind; 5] = [
        AuditKind::Threshold,
        AuditKind::Form,
        AuditKind::Table,
        AuditKind::SecretIndependence,
        AuditKind::HonestBit,
    ];
}

/// Contents of the `--adversary` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default)]
    pub coalition: Option<Vec<usize>>,
    #[serde(default)]
    pub actions: Vec<audit::AdversaryAction>,
    #[serde(default)]
    pub audits: Option<Vec<AuditKind>>,
    #[serde(default)]
    pub mode: Option<ModeChoice>,
}

#[derive(Debug, Clone, Serialize)]
struct Distance {
    name: String,
    metric: &'static str,
    value: f64,
    tolerance: f64,
    passed: bool,
}

impl Distance {
    fn new(name: impl Into<String>, metric: &'static str, value: f64) -> Self {
        Self {
            name: name.into(),
            metric,
            value,
            tolerance: DISTANCE_TOL,
            passed: value <= DISTANCE_TOL,
        }
    }
}

#[derive(Debug, Default)]
struct Report {
    result: Value,
    transcript: Option<Transcript>,
    audits: BTreeMap<String, AuditReport>,
    distances: Vec<Distance>,
    passed: bool,
}

/// Process exit status for an error: 2 for malformed input, 3 for the dense
/// width cap, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WidthCap { .. } => 3,
        Error::Parse { .. }
        | Error::MagicBudget { .. }
        | Error::InvalidCircuit(_)
        | Error::InvalidConfig(_)
        | Error::InvalidPauli(_)
        | Error::InvalidMatrix(_)
        | Error::UnknownGate(_)
        | Error::Unphysical(_)
        | Error::Adversary(_)
        | Error::Unsupported(_)
        | Error::QubitOutOfRange { .. }
        | Error::LengthMismatch { .. }
        | Error::IndexCollision(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::MagicBudget { .. } => "magic_budget",
        Error::WidthCap { .. } => "width_cap",
        Error::InvalidCircuit(_) => "invalid_circuit",
        Error::InvalidConfig(_) => "invalid_config",
        Error::Adversary(_) => "adversary",
        Error::Unsupported(_) => "unsupported",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Integrity(_) => "integrity",
        _ => "invalid_input",
    }
}

pub fn error_object(e: &Error) -> Value {
    let mut obj = json!({
        "kind": error_kind(e),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    match e {
        Error::Parse { line, column, .. } => {
            obj["line"] = json!(line);
            obj["column"] = json!(column);
        }
        Error::WidthCap { width, cap } => {
            obj["width"] = json!(width);
            obj["cap"] = json!(cap);
        }
        Error::MagicBudget { t_count, budget } => {
            obj["t_count"] = json!(t_count);
            obj["budget"] = json!(budget);
        }
        _ => {}
    }
    obj
}

fn version() -> Value {
    json!({ "schema": SCHEMA_VERSION, "tool": env!("CARGO_PKG_VERSION") })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Deal(_) => "deal",
        Command::Eval(_) => "eval",
        Command::Audit(_) => "audit",
        Command::Selftest(_) => "selftest",
    }
}

fn config_echo(command: &str, a: &RunArgs, cfg: Option<&DealerConfig>) -> Value {
    json!({
        "command": command,
        "parties": a.parties,
        "columns": cfg.map(|c| c.columns()),
        "secret_qubits": a.secret_qubits,
        "magic": cfg.map(|c| c.magic).or(a.magic),
        "circuit": a.circuit.as_ref().map(|p| p.display().to_string()),
        "secret": a.secret,
        "backend": a.backend,
        "seed": a.seed,
        "mode": a.mode,
        "adversary": a.adversary.as_ref().map(|p| p.display().to_string()),
    })
}

/// Runs a command and returns the exit status and the JSON report.
pub fn run(cli: &Cli) -> (i32, Value) {
    let (name, args) = match &cli.command {
        Command::Deal(a) | Command::Eval(a) | Command::Audit(a) | Command::Selftest(a) => {
            (command_name(&cli.command), a)
        }
    };
    let outcome = prepare(args).and_then(|inputs| {
        let report = match &cli.command {
            Command::Deal(_) => deal(&inputs),
            Command::Eval(_) => eval(&inputs),
            Command::Audit(_) => audit_cmd(&inputs),
            Command::Selftest(_) => selftest(&inputs),
        }?;
        Ok((inputs, report))
    });
    let (code, value) = match outcome {
        Ok((inputs, report)) => {
            let value = json!({
                "version": version(),
                "config": config_echo(name, args, Some(&inputs.cfg)),
                "result": report.result,
                "transcript": report.transcript,
                "audits": report.audits,
                "distances": report.distances,
            });
            (if report.passed { 0 } else { 1 }, value)
        }
        Err(e) => (
            exit_code(&e),
            json!({
                "version": version(),
                "config": config_echo(name, args, None),
                "error": error_object(&e),
            }),
        ),
    };
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&value).expect("report serializes");
        if let Err(e) = fs::write(path, text + "\n") {
            let e = Error::from(e);
            return (
                exit_code(&e),
                json!({ "version": version(), "error": error_object(&e) }),
            );
        }
    }
    (code, value)
}

struct Inputs {
    args: RunArgs,
    cfg: DealerConfig,
    circuit: Option<Circuit>,
    secret: PauliSumState,
    adversary: AuditConfig,
}

fn prepare(args: &RunArgs) -> Result<Inputs> {
    let circuit = match &args.circuit {
        Some(p) => Some(parse_circuit(&fs::read_to_string(p)?, args.secret_qubits)?),
        None => None,
    };
    let adversary = match &args.adversary {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => AuditConfig::default(),
    };
    if args.secret_qubits == 0 {
        return Err(Error::InvalidConfig(
            "at least one secret qubit is required".into(),
        ));
    }
    let magic = args
        .magic
        .unwrap_or_else(|| circuit.as_ref().map_or(0, Circuit::t_count));
    if let Some(c) = &circuit {
        c.check_budget(magic)?;
    }
    let cfg = DealerConfig::new(args.secret_qubits, magic, args.parties)?;
    if args.backend != BackendChoice::Sparse {
        crate::dense::check_width(cfg.total_qubits())?;
    }
    let secret = named_secret(&args.secret, args.secret_qubits)?;
    Ok(Inputs {
        args: args.clone(),
        cfg,
        circuit,
        secret,
        adversary,
    })
}

fn named_secret(name: &str, qubits: usize) -> Result<PauliSumState> {
    let one = match name {
        "zero" => Some(PauliSumState::qubit_state(0.0, 0.0, 1.0)?),
        "plus" => Some(PauliSumState::qubit_state(1.0, 0.0, 0.0)?),
        "magic" => {
            let [a, b, c] = MAGIC_BLOCH;
            Some(PauliSumState::qubit_state(a, b, c)?)
        }
        "maximally-mixed" => Some(PauliSumState::maximally_mixed(1)),
        _ => None,
    };
    match one {
        Some(q) => Ok((1..qubits).fold(q.clone(), |acc, _| acc.tensor(&q))),
        None => serialize::parse_coefficients(&fs::read_to_string(name)?, qubits),
    }
}

impl Inputs {
    fn cfg(&self) -> &DealerConfig {
        &self.cfg
    }

    fn secret(&self) -> &PauliSumState {
        &self.secret
    }

    fn circuit(&self) -> Circuit {
        self.circuit
            .clone()
            .unwrap_or_else(|| Circuit::empty(self.cfg().secret_qubits))
    }

    fn seed(&self) -> u64 {
        self.args.seed.unwrap_or(0)
    }

    fn mode(&self) -> ModeChoice {
        self.adversary.mode.unwrap_or(self.args.mode)
    }

    fn dense_secret(&self) -> Option<DenseOperator> {
        self.secret().to_dense().ok()
    }
}

fn to_sparse_shared<S: Backend>(shared: &SharedSecretState<S>) -> SharedSecretState<PauliSumState> {
    SharedSecretState {
        state: shared.state.to_sparse(),
        layout: shared.layout.clone(),
        secret_qubits: shared.secret_qubits,
        magic_total: shared.magic_total,
        magic_remaining: shared.magic_remaining,
    }
}

fn deal(inputs: &Inputs) -> Result<Report> {
    let cfg = inputs.cfg();
    let sparse = protocol::deal(inputs.secret(), cfg)?;
    let mut report = Report {
        passed: true,
        ..Report::default()
    };
    match inputs.args.backend {
        BackendChoice::Sparse => {
            report.result = json!({ "shared": SharedStateDoc::from_state(&sparse) });
        }
        BackendChoice::Dense => {
            let dense = protocol::deal(&inputs.secret().to_dense()?, cfg)?;
            report.result =
                json!({ "shared": SharedStateDoc::from_state(&to_sparse_shared(&dense)) });
        }
        BackendChoice::Both => {
            let dense = protocol::deal(&inputs.secret().to_dense()?, cfg)?;
            let lifted = DenseOperator::from_pauli_sum(&sparse.state)?;
            report.distances.push(Distance::new(
                "shared state, sparse vs dense",
                "trace distance",
                lifted.trace_distance(&dense.state)?,
            ));
            report.result = json!({ "shared": SharedStateDoc::from_state(&sparse) });
        }
    }
    report.passed = report.distances.iter().all(|d| d.passed);
    Ok(report)
}

fn decoded_json(state: &PauliSumState) -> Value {
    let mut v = json!({ "terms": serialize::state_terms(state) });
    if let Some(b) = state.bloch() {
        v["bloch"] = json!(b);
    }
    v
}

fn evaluate<S: Backend>(secret: &S, inputs: &Inputs) -> Result<(SharedSecretState<S>, Transcript)> {
    let shared = protocol::deal(secret, inputs.cfg())?;
    let circuit = inputs.circuit();
    match inputs.mode() {
        ModeChoice::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(inputs.seed());
            evaluation::evaluate_circuit(&shared, &circuit, &mut EvalMode::Sample(&mut rng))
        }
        ModeChoice::Enumerate => {
            evaluation::evaluate_circuit(&shared, &circuit, &mut EvalMode::Enumerate)
        }
    }
}

fn eval(inputs: &Inputs) -> Result<Report> {
    let circuit = inputs.circuit();
    let reference = inputs
        .dense_secret()
        .map(|d| evaluation::direct_reference(&d, &circuit))
        .transpose()?;
    let mut report = Report::default();
    let mut results = serde_json::Map::new();
    let mut decoded_states: Vec<(&str, PauliSumState)> = Vec::new();

    if inputs.args.backend != BackendChoice::Dense {
        let (out, transcript) = evaluate(inputs.secret(), inputs)?;
        let decoded = protocol::decode(&out)?;
        results.insert(
            "sparse".into(),
            json!({ "decoded": decoded_json(&decoded) }),
        );
        report.transcript = Some(transcript);
        decoded_states.push(("sparse", decoded));
    }
    if inputs.args.backend != BackendChoice::Sparse {
        let (out, transcript) = evaluate(&inputs.secret().to_dense()?, inputs)?;
        let decoded = protocol::decode(&out)?.to_pauli_sum();
        results.insert("dense".into(), json!({ "decoded": decoded_json(&decoded) }));
        report.transcript.get_or_insert(transcript);
        decoded_states.push(("dense", decoded));
    }
    for (name, decoded) in &decoded_states {
        if let Some(r) = &reference {
            report.distances.push(Distance::new(
                format!("{name} decoded vs direct reference"),
                "trace distance",
                decoded.to_dense()?.trace_distance(r)?,
            ));
        }
    }
    if let [(_, a), (_, b)] = decoded_states.as_slice() {
        report.distances.push(Distance::new(
            "sparse vs dense decoded",
            "trace distance",
            a.to_dense()?.trace_distance(&b.to_dense()?)?,
        ));
    }
    results.insert("t_count".into(), json!(circuit.t_count()));
    report.result = Value::Object(results);
    report.passed = report.distances.iter().all(|d| d.passed);
    Ok(report)
}

fn run_audits<S: Backend>(secret: &S, inputs: &Inputs, report: &mut Report) -> Result<()> {
    let cfg = inputs.cfg();
    let selected: Vec<AuditKind> = inputs
        .adversary
        .audits
        .clone()
        .unwrap_or_else(|| AuditKind::ALL.to_vec());
    let shared = protocol::deal(secret, cfg)?;
    let circuit = inputs.circuit();
    let n = cfg.columns();

    let wants = |k| selected.contains(&k);
    if wants(AuditKind::Threshold) || wants(AuditKind::Form) {
        let mut threshold = AuditReport::default();
        let mut form = AuditReport::default();
        let mut step = |s: &SharedSecretState<S>| -> Result<()> {
            if wants(AuditKind::Threshold) {
                threshold.extend(audit::audit_threshold(s)?);
            }
            if wants(AuditKind::Form) {
                form.extend(audit::audit_form(s)?);
            }
            Ok(())
        };
        step(&shared)?;
        let mut rng = ChaCha8Rng::seed_from_u64(inputs.seed());
        let mut mode = match inputs.mode() {
            ModeChoice::Sample => EvalMode::Sample(&mut rng),
            ModeChoice::Enumerate => EvalMode::Enumerate,
        };
        evaluation::evaluate_circuit_observed(&shared, &circuit, &mut mode, |_, _, s| step(s))?;
        if wants(AuditKind::Threshold) {
            report.audits.insert("threshold".into(), threshold);
        }
        if wants(AuditKind::Form) {
            report.audits.insert("form".into(), form);
        }
    }
    if wants(AuditKind::Table) {
        report.audits.insert("table".into(), audit::audit_table1()?);
    }
    if wants(AuditKind::SecretIndependence) {
        let other = S::maximally_mixed(cfg.secret_qubits)?;
        let other = if other.max_deviation(secret)? == 0.0 {
            let one = S::qubit_state(0.0, 0.0, 1.0)?;
            (1..cfg.secret_qubits).try_fold(one.clone(), |acc, _| acc.tensor(&one))?
        } else {
            other
        };
        let b = protocol::deal(&other, cfg)?;
        report.audits.insert(
            "secret_independence".into(),
            audit::audit_secret_independence(&shared, &b)?,
        );
    }
    if wants(AuditKind::HonestBit) {
        let adv = AdversaryModel {
            coalition: inputs
                .adversary
                .coalition
                .clone()
                .unwrap_or_else(|| (1..n).collect())
                .into_iter()
                .collect(),
            actions: inputs.adversary.actions.clone(),
        };
        let reference = inputs.dense_secret();
        report.audits.insert(
            "honest_bit".into(),
            audit::audit_honest_bit(&shared, reference.as_ref(), &circuit, &adv, inputs.seed())?,
        );
    }
    Ok(())
}

fn audit_cmd(inputs: &Inputs) -> Result<Report> {
    let mut report = Report::default();
    match inputs.args.backend {
        BackendChoice::Sparse => run_audits(inputs.secret(), inputs, &mut report)?,
        BackendChoice::Dense => run_audits(&inputs.secret().to_dense()?, inputs, &mut report)?,
        BackendChoice::Both => {
            run_audits(inputs.secret(), inputs, &mut report)?;
            let mut dense = Report::default();
            run_audits(&inputs.secret().to_dense()?, inputs, &mut dense)?;
            for (k, v) in dense.audits {
                report.audits.insert(format!("{k} (dense)"), v);
            }
        }
    }
    let summary: BTreeMap<&String, bool> =
        report.audits.iter().map(|(k, v)| (k, v.passed())).collect();
    report.result = json!({ "passed": summary });
    report.passed = report.audits.values().all(AuditReport::passed);
    Ok(report)
}

fn selftest(inputs: &Inputs) -> Result<Report> {
    let results = acceptance::run_all(inputs.args.seed.unwrap_or(acceptance::DEFAULT_SEED))?;
    let passed = results.iter().all(|r| r.passed);
    Ok(Report {
        result: json!({ "criteria": results, "passed": passed }),
        passed,
        ..Report::default()
    })
}
