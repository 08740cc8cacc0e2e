//! Executable security checks: threshold secrecy, preservation of the
//! column-replicated form under evaluation, and uniformity of honest
//! broadcast bits under adversarial deviation.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::circuit::{Circuit, Gate};
use crate::dense::{CMatrix, DenseOperator};
use crate::error::{Error, Result};
use crate::evaluation;
use crate::pauli::{conjugate_cnot, Clifford1, CliffordOp, Pauli, PauliString, Phase};
use crate::protocol::{self, DealerConfig, ShareLayout, SharedSecretState};
use crate::sparse::PauliSumState;

/// Tolerance on nontrivial coalition coefficients and honest-bit bias.
pub const SECRECY_TOL: f64 = 1e-12;
/// Tolerance on trace distances between coalition states.
pub const INDEPENDENCE_TOL: f64 = 1e-10;
/// Tolerance on decoded-versus-reference distances.
pub const CORRECTNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub deviation: f64,
    pub tolerance: f64,
    pub witness: String,
    /// Reported but not counted towards [`AuditReport::passed`].
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl AuditCheck {
    pub fn within(
        name: impl Into<String>,
        deviation: f64,
        tolerance: f64,
        witness: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: deviation <= tolerance,
            deviation,
            tolerance,
            witness: witness.into(),
            informational: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn worst_deviation(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.informational)
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed && !c.informational)
    }
}

// ---------------------------------------------------------------------------
// Threshold and form

/// Every coalition of `n − 1` columns must hold the maximally mixed state.
pub fn audit_threshold<S: Backend>(shared: &SharedSecretState<S>) -> Result<AuditReport> {
    let n = shared.layout.columns();
    let mut report = AuditReport::default();
    for honest in 0..n {
        let coalition: Vec<usize> = (0..n).filter(|&c| c != honest).collect();
        let reduced = shared.coalition_state(&coalition)?.to_sparse();
        let (deviation, witness) = reduced.nontrivial_terms().map(|(l, c)| (c.abs(), l)).fold(
            (0.0, None),
            |(best, w), (a, l)| {
                if a > best {
                    (a, Some(l))
                } else {
                    (best, w)
                }
            },
        );
        let witness = match witness {
            Some(letters) => format!("coefficient {:.3e} on {}", deviation, letters_str(letters)),
            None => "maximally mixed".to_string(),
        };
        report.checks.push(AuditCheck::within(
            format!("threshold without column {honest}"),
            deviation,
            SECRECY_TOL,
            witness,
        ));
    }
    Ok(report)
}

/// Every term must carry the same letter in all columns of each row, and
/// unconsumed magic rows may only carry `I`, `X` or `Y`.
pub fn audit_form<S: Backend>(shared: &SharedSecretState<S>) -> Result<AuditReport> {
    let sparse = SharedSecretState {
        state: shared.state.to_sparse(),
        layout: shared.layout.clone(),
        secret_qubits: shared.secret_qubits,
        magic_total: shared.magic_total,
        magic_remaining: shared.magic_remaining,
    };
    let view = sparse.logical_view()?;
    let mut report = AuditReport::default();

    let worst = view
        .violations
        .iter()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    report.checks.push(AuditCheck {
        name: "column replication".into(),
        passed: view.violations.is_empty(),
        deviation: worst.map_or(0.0, |w| w.1.abs()),
        tolerance: 0.0,
        witness: match worst {
            Some((letters, c)) => format!(
                "{} unreplicated term(s), e.g. {c:+.3e} on {}",
                view.violations.len(),
                letters_str(letters)
            ),
            None => format!("{} replicated term(s)", view.replicated.len()),
        },
        informational: false,
    });

    let magic_positions: Vec<usize> = shared
        .layout
        .live_rows()
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r >= shared.secret_qubits)
        .map(|(i, _)| i)
        .collect();
    let bad: Vec<(&Vec<Pauli>, f64)> = view
        .replicated
        .iter()
        .filter(|(key, _)| magic_positions.iter().any(|&i| key[i] == Pauli::Z))
        .map(|(k, &c)| (k, c))
        .collect();
    let worst = bad.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    report.checks.push(AuditCheck {
        name: "magic rows free of Z".into(),
        passed: bad.is_empty(),
        deviation: worst.map_or(0.0, |w| w.1.abs()),
        tolerance: 0.0,
        witness: match worst {
            Some((key, c)) => format!("row letters {} with coefficient {c:+.3e}", letters_str(key)),
            None => format!("{} unconsumed magic row(s)", magic_positions.len()),
        },
        informational: false,
    });
    Ok(report)
}

/// Coalition states for two different secrets must coincide.
pub fn audit_secret_independence<S: Backend>(
    a: &SharedSecretState<S>,
    b: &SharedSecretState<S>,
) -> Result<AuditReport> {
    let n = a.layout.columns();
    let mut report = AuditReport::default();
    for honest in 0..n {
        let coalition: Vec<usize> = (0..n).filter(|&c| c != honest).collect();
        let ra = a.coalition_state(&coalition)?;
        let rb = b.coalition_state(&coalition)?;
        let (distance, metric) = match (ra.to_dense(), rb.to_dense()) {
            (Ok(da), Ok(db)) => (da.trace_distance(&db)?, "trace distance"),
            _ => (
                ra.to_sparse().hs_distance(&rb.to_sparse())?,
                "Hilbert-Schmidt distance",
            ),
        };
        report.checks.push(AuditCheck::within(
            format!("secret independence without column {honest}"),
            distance,
            INDEPENDENCE_TOL,
            metric,
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Adversaries

/// A cell of the share grid, addressed by original row number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deviation {
    Pauli {
        cell: Cell,
        letter: Pauli,
    },
    Clifford {
        cell: Cell,
        gate: Clifford1,
    },
    Cnot {
        control: Cell,
        target: Cell,
    },
    /// Kraus operators as rows of `[re, im]` pairs; dense backend only.
    Channel {
        cells: Vec<Cell>,
        kraus: Vec<Vec<Vec<[f64; 2]>>>,
    },
    /// Broadcast the flipped bit in the `T` round at this gate.
    Lie {
        column: usize,
    },
    /// Skip the entangling CNOTs in the `T` round at this gate.
    Abstain {
        column: usize,
    },
}

impl Deviation {
    fn columns(&self) -> Vec<usize> {
        match self {
            Deviation::Pauli { cell, .. } | Deviation::Clifford { cell, .. } => vec![cell.column],
            Deviation::Cnot { control, target } => vec![control.column, target.column],
            Deviation::Channel { cells, .. } => cells.iter().map(|c| c.column).collect(),
            Deviation::Lie { column } | Deviation::Abstain { column } => vec![*column],
        }
    }

    fn is_round_action(&self) -> bool {
        matches!(self, Deviation::Lie { .. } | Deviation::Abstain { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryAction {
    /// Index of the circuit gate this action precedes (or accompanies, for
    /// round actions).
    pub gate: usize,
    pub deviation: Deviation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryModel {
    pub coalition: BTreeSet<usize>,
    #[serde(default)]
    pub actions: Vec<AdversaryAction>,
}

impl AdversaryModel {
    pub fn passive(coalition: impl IntoIterator<Item = usize>) -> Self {
        Self {
            coalition: coalition.into_iter().collect(),
            actions: Vec::new(),
        }
    }

    pub fn honest_columns(&self, columns: usize) -> Vec<usize> {
        (0..columns)
            .filter(|c| !self.coalition.contains(c))
            .collect()
    }

    pub fn validate(&self, columns: usize, circuit: &Circuit) -> Result<()> {
        if let Some(&c) = self.coalition.iter().find(|&&c| c >= columns) {
            return Err(Error::Adversary(format!(
                "coalition column {c} out of range for {columns} columns"
            )));
        }
        if self.coalition.len() >= columns {
            return Err(Error::Adversary(
                "the coalition covers every column; no honest party remains".into(),
            ));
        }
        for (i, a) in self.actions.iter().enumerate() {
            if a.gate >= circuit.len() {
                return Err(Error::Adversary(format!(
                    "action {i} refers to gate {} of a {}-gate circuit",
                    a.gate,
                    circuit.len()
                )));
            }
            if let Some(c) = a
                .deviation
                .columns()
                .into_iter()
                .find(|c| !self.coalition.contains(c))
            {
                return Err(Error::Adversary(format!(
                    "action {i} touches column {c}, which is not in the coalition"
                )));
            }
            if a.deviation.is_round_action() && !circuit.gates()[a.gate].is_t() {
                return Err(Error::Adversary(format!(
                    "action {i} is a round action but gate {} is not T",
                    a.gate
                )));
            }
        }
        Ok(())
    }

    pub fn is_passive(&self) -> bool {
        self.actions.is_empty()
    }
}

fn kraus_matrices(raw: &[Vec<Vec<[f64; 2]>>]) -> Result<Vec<CMatrix>> {
    raw.iter()
        .map(|rows| {
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidMatrix("Kraus operator is not square".into()));
            }
            Ok(DMatrix::from_fn(d, d, |i, j| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            }))
        })
        .collect()
}

pub fn kraus_to_raw(kraus: &[CMatrix]) -> Vec<Vec<Vec<[f64; 2]>>> {
    kraus
        .iter()
        .map(|k| {
            (0..k.nrows())
                .map(|i| {
                    (0..k.ncols())
                        .map(|j| [k[(i, j)].re, k[(i, j)].im])
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn apply_deviation<S: Backend>(
    shared: &SharedSecretState<S>,
    d: &Deviation,
) -> Result<SharedSecretState<S>> {
    let layout = &shared.layout;
    let q = |c: &Cell| layout.qubit(c.row, c.column);
    let state = match d {
        Deviation::Pauli { cell, letter } => match letter {
            Pauli::I => shared.state.clone(),
            Pauli::X => shared.state.apply_clifford(CliffordOp::Single {
                gate: Clifford1::X,
                qubit: q(cell)?,
            })?,
            Pauli::Y => shared.state.apply_clifford(CliffordOp::Single {
                gate: Clifford1::Y,
                qubit: q(cell)?,
            })?,
            Pauli::Z => shared.state.apply_clifford(CliffordOp::Single {
                gate: Clifford1::Z,
                qubit: q(cell)?,
            })?,
        },
        Deviation::Clifford { cell, gate } => shared.state.apply_clifford(CliffordOp::Single {
            gate: *gate,
            qubit: q(cell)?,
        })?,
        Deviation::Cnot { control, target } => shared.state.apply_clifford(CliffordOp::Cnot {
            control: q(control)?,
            target: q(target)?,
        })?,
        Deviation::Channel { cells, kraus } => {
            let qubits = cells.iter().map(q).collect::<Result<Vec<_>>>()?;
            shared
                .state
                .apply_channel(&kraus_matrices(kraus)?, &qubits)?
        }
        Deviation::Lie { .. } | Deviation::Abstain { .. } => shared.state.clone(),
    };
    Ok(SharedSecretState {
        state,
        ..shared.clone()
    })
}

/// Bias of one honest column's bit after the entangling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonestBit {
    pub column: usize,
    /// `|p(m = 0) − 1/2|`.
    pub marginal_bias: f64,
    /// Largest bias conditioned on any joint outcome of the other columns.
    pub conditional_bias: f64,
    pub conditioned_branches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub gate: usize,
    pub magic_row: usize,
    pub honest: Vec<HonestBit>,
    pub bits: Vec<u8>,
    pub broadcast: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct AdversarialRun<S> {
    pub final_state: SharedSecretState<S>,
    pub rounds: Vec<RoundRecord>,
}

/// Marginal and conditional bias of `honest`'s bit on magic row `row`.
pub fn honest_bit_bias<S: Backend>(
    state: &S,
    layout: &ShareLayout,
    row: usize,
    honest: usize,
) -> Result<HonestBit> {
    let n = layout.columns();
    let start: Vec<usize> = (0..n)
        .map(|c| layout.qubit(row, c))
        .collect::<Result<_>>()?;
    let marginal_bias = (state.probability(start[honest], 0)? - 0.5).abs();

    let mut frontier = vec![(state.clone(), start)];
    for col in (0..n).filter(|&c| c != honest) {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (s, idx) in frontier {
            let q = idx[col];
            let shifted: Vec<usize> = idx.iter().map(|&i| if i > q { i - 1 } else { i }).collect();
            for o in s.measure_both(q)? {
                next.push((o.post_state, shifted.clone()));
            }
        }
        frontier = next;
    }
    let mut conditional_bias: f64 = 0.0;
    for (s, idx) in &frontier {
        conditional_bias = conditional_bias.max((s.probability(idx[honest], 0)? - 0.5).abs());
    }
    Ok(HonestBit {
        column: honest,
        marginal_bias,
        conditional_bias,
        conditioned_branches: frontier.len(),
    })
}

/// Evaluates `circuit` with the coalition deviating as `adv` prescribes,
/// recording the honest columns' bit biases in every `T` round. Outcomes are
/// sampled from `rng`.
pub fn run_adversarial<S: Backend>(
    shared: &SharedSecretState<S>,
    circuit: &Circuit,
    adv: &AdversaryModel,
    rng: &mut dyn RngCore,
) -> Result<AdversarialRun<S>> {
    let n = shared.layout.columns();
    adv.validate(n, circuit)?;
    if circuit.width() != shared.secret_qubits {
        return Err(Error::InvalidCircuit(format!(
            "circuit acts on {} qubits but the secret has {}",
            circuit.width(),
            shared.secret_qubits
        )));
    }
    circuit.check_budget(shared.magic_remaining)?;
    let honest = adv.honest_columns(n);
    let mut current = shared.clone();
    let mut rounds = Vec::new();
    for (i, gate) in circuit.gates().iter().enumerate() {
        let here: Vec<&Deviation> = adv
            .actions
            .iter()
            .filter(|a| a.gate == i)
            .map(|a| &a.deviation)
            .collect();
        for d in here.iter().filter(|d| !d.is_round_action()) {
            current = apply_deviation(&current, d)?;
        }
        current = match *gate {
            Gate::T { qubit } => {
                let abstaining: BTreeSet<usize> = here
                    .iter()
                    .filter_map(|d| match d {
                        Deviation::Abstain { column } => Some(*column),
                        _ => None,
                    })
                    .collect();
                let acting: Vec<usize> = (0..n).filter(|c| !abstaining.contains(c)).collect();
                let (entangled, row) = evaluation::entangle_columns(&current, qubit, &acting)?;
                let biases = honest
                    .iter()
                    .map(|&h| honest_bit_bias(&entangled.state, &entangled.layout, row, h))
                    .collect::<Result<Vec<_>>>()?;
                let drawn = evaluation::measure_magic_sample(
                    &entangled.state,
                    &entangled.layout,
                    row,
                    rng,
                )?;
                let mut broadcast = drawn.bits.clone();
                for d in &here {
                    if let Deviation::Lie { column } = d {
                        broadcast[*column] ^= 1;
                    }
                }
                rounds.push(RoundRecord {
                    gate: i,
                    magic_row: row,
                    honest: biases,
                    bits: drawn.bits,
                    broadcast: broadcast.clone(),
                });
                evaluation::finish_round(&entangled, drawn.state, row, qubit, &broadcast)?
            }
            _ => evaluation::apply_clifford_logical(&current, gate)?,
        };
    }
    Ok(AdversarialRun {
        final_state: current,
        rounds,
    })
}

/// Runs `circuit` under `adv` and reports the honest-bit bias of every round.
/// Given the secret, the decoded result is also compared with the direct
/// reference; that check is informational whenever the adversary actually
/// deviates.
pub fn audit_honest_bit<S: Backend>(
    shared: &SharedSecretState<S>,
    secret: Option<&DenseOperator>,
    circuit: &Circuit,
    adv: &AdversaryModel,
    seed: u64,
) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = run_adversarial(shared, circuit, adv, &mut rng)?;
    let mut report = AuditReport::default();
    for (k, r) in run.rounds.iter().enumerate() {
        let worst = r
            .honest
            .iter()
            .max_by(|a, b| {
                a.marginal_bias
                    .max(a.conditional_bias)
                    .total_cmp(&b.marginal_bias.max(b.conditional_bias))
            })
            .expect("at least one honest column");
        report.checks.push(AuditCheck::within(
            format!("honest bit uniform in round {} (gate {})", k + 1, r.gate),
            worst.marginal_bias.max(worst.conditional_bias),
            SECRECY_TOL,
            format!(
                "column {}: marginal bias {:.3e}, conditional bias {:.3e} over {} branch(es)",
                worst.column,
                worst.marginal_bias,
                worst.conditional_bias,
                worst.conditioned_branches
            ),
        ));
    }
    if let Some(secret) = secret {
        let d = protocol::decode(&run.final_state)?.to_dense()?;
        let r = evaluation::direct_reference(secret, circuit)?;
        let mut check = AuditCheck::within(
            "decoded result matches the reference",
            d.trace_distance(&r)?,
            CORRECTNESS_TOL,
            "trace distance; secrecy does not imply correctness under deviation",
        );
        check.informational = !adv.is_passive();
        report.checks.push(check);
    }
    Ok(report)
}

fn pauli_on(state: &PauliSumState, qubit: usize, letter: Pauli) -> Result<PauliSumState> {
    let gate = match letter {
        Pauli::I => return Ok(state.clone()),
        Pauli::X => Clifford1::X,
        Pauli::Y => Clifford1::Y,
        Pauli::Z => Clifford1::Z,
    };
    state.apply_gate(gate, qubit)
}

/// Exhaustive Pauli deviations before the `T` round on `qubit`, for every
/// choice of single honest column.
///
/// Two sweeps run per honest column: all `4^2` Paulis on the two touched
/// cells of each coalition column, checked conditionally on the other
/// outcomes, and all `4^{2(n−1)}` joint assignments over every coalition
/// cell of the two touched rows, checked on the marginal.
pub fn pauli_deviation_sweep(
    shared: &SharedSecretState<PauliSumState>,
    qubit: usize,
) -> Result<AuditReport> {
    let n = shared.layout.columns();
    let row = shared.next_magic_row().ok_or(Error::MagicBudget {
        t_count: 1,
        budget: 0,
    })?;
    let layout = &shared.layout;
    let mut report = AuditReport::default();
    for honest in 0..n {
        let coalition: Vec<usize> = (0..n).filter(|&c| c != honest).collect();

        let mut worst: (f64, String) = (0.0, "no deviation".into());
        let mut cases = 0usize;
        for &c in &coalition {
            let (dq, mq) = (layout.qubit(qubit, c)?, layout.qubit(row, c)?);
            for pd in Pauli::ALL {
                for pm in Pauli::ALL {
                    let state = pauli_on(&pauli_on(&shared.state, dq, pd)?, mq, pm)?;
                    let deviated = SharedSecretState {
                        state,
                        ..shared.clone()
                    };
                    let (entangled, _) = evaluation::entangle_magic(&deviated, qubit)?;
                    let b = honest_bit_bias(&entangled.state, layout, row, honest)?;
                    let bias = b.marginal_bias.max(b.conditional_bias);
                    cases += 1;
                    if bias > worst.0 {
                        worst = (
                            bias,
                            format!("column {c} applies {}{}", pd.as_char(), pm.as_char()),
                        );
                    }
                }
            }
        }
        report.checks.push(AuditCheck::within(
            format!("per-column Pauli sweep, honest column {honest}"),
            worst.0,
            SECRECY_TOL,
            format!("{cases} case(s); worst: {}", worst.1),
        ));

        let cells: Vec<usize> = coalition
            .iter()
            .flat_map(|&c| [layout.qubit(qubit, c), layout.qubit(row, c)])
            .collect::<Result<_>>()?;
        let honest_magic = layout.qubit(row, honest)?;
        let total = 1usize << (2 * cells.len());
        let mut worst: (f64, usize) = (0.0, 0);
        for assignment in 0..total {
            let mut state = shared.state.clone();
            for (k, &q) in cells.iter().enumerate() {
                state = pauli_on(&state, q, Pauli::ALL[(assignment >> (2 * k)) & 3])?;
            }
            let deviated = SharedSecretState {
                state,
                ..shared.clone()
            };
            let (entangled, _) = evaluation::entangle_magic(&deviated, qubit)?;
            let bias = (entangled.state.probability(honest_magic, 0)? - 0.5).abs();
            if bias > worst.0 {
                worst = (bias, assignment);
            }
        }
        report.checks.push(AuditCheck::within(
            format!("joint Pauli sweep, honest column {honest}"),
            worst.0,
            SECRECY_TOL,
            format!("{total} assignment(s); worst assignment index {}", worst.1),
        ));
    }
    Ok(report)
}

/// Kraus operators of a random channel on `qubits` qubits with `rank`
/// operators, cut from a random isometry obtained by QR.
pub fn random_channel(rng: &mut dyn RngCore, qubits: usize, rank: usize) -> Vec<CMatrix> {
    let d = 1usize << qubits;
    let rank = rank.max(1);
    let g = DMatrix::from_fn(d * rank, d, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let q = g.qr().q();
    (0..rank).map(|k| q.rows(k * d, d).into_owned()).collect()
}

/// Applies `channels` random channels, each to a coalition data cell and a
/// coalition magic cell of the next round, and checks every honest bit.
pub fn channel_deviation_sweep(
    shared: &SharedSecretState<DenseOperator>,
    qubit: usize,
    channels: usize,
    seed: u64,
) -> Result<AuditReport> {
    let n = shared.layout.columns();
    let row = shared.next_magic_row().ok_or(Error::MagicBudget {
        t_count: 1,
        budget: 0,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::default();
    for k in 0..channels {
        let honest = k % n;
        let coalition: Vec<usize> = (0..n).filter(|&c| c != honest).collect();
        let a = coalition[rng.random_range(0..coalition.len())];
        let b = coalition[rng.random_range(0..coalition.len())];
        let rank = rng.random_range(1..=4);
        let kraus = random_channel(&mut rng, 2, rank);
        let cells = [shared.layout.qubit(qubit, a)?, shared.layout.qubit(row, b)?];
        let deviated = SharedSecretState {
            state: shared.state.apply_channel(&kraus, &cells)?,
            ..shared.clone()
        };
        let (entangled, _) = evaluation::entangle_magic(&deviated, qubit)?;
        let bit = honest_bit_bias(&entangled.state, &entangled.layout, row, honest)?;
        report.checks.push(AuditCheck::within(
            format!("channel deviation {k}, honest column {honest}"),
            bit.marginal_bias.max(bit.conditional_bias),
            SECRECY_TOL,
            format!("rank-{rank} channel on data cell of column {a} and magic cell of column {b}"),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The two-qubit T-round table

/// Image under `⟨m|·|m⟩` on the second qubit: the first-qubit letter, the
/// constant sign and whether the sign also carries `(−1)^m`.
type Projected = Option<(Pauli, f64, bool)>;

/// Input letters, their signed image, and the projected image.
type TableRow = ((Pauli, Pauli), (f64, Pauli, Pauli), Projected);

const TABLE: [TableRow; 12] = {
    use Pauli::{I, X, Y, Z};
    [
        ((I, I), (1.0, I, I), Some((I, 1.0, false))),
        ((I, X), (1.0, X, X), None),
        ((I, Y), (1.0, Y, X), None),
        ((X, I), (1.0, I, X), None),
        ((X, X), (1.0, X, I), Some((X, 1.0, false))),
        ((X, Y), (1.0, Y, I), Some((Y, 1.0, false))),
        ((Y, I), (1.0, Z, Y), None),
        ((Y, X), (1.0, Y, Z), Some((Y, 1.0, true))),
        ((Y, Y), (-1.0, X, Z), Some((X, -1.0, true))),
        ((Z, I), (1.0, Z, Z), Some((Z, 1.0, true))),
        ((Z, X), (-1.0, Y, Y), None),
        ((Z, Y), (1.0, X, Y), None),
    ]
};

/// `⟨m| P |m⟩` for a single-qubit Pauli `P`.
fn project_letter(letter: Pauli, m: u8) -> f64 {
    match letter {
        Pauli::I => 1.0,
        Pauli::Z => {
            if m == 0 {
                1.0
            } else {
                -1.0
            }
        }
        Pauli::X | Pauli::Y => 0.0,
    }
}

/// Replays the entangling CNOTs on each data/magic letter pair and the
/// honest projection for both outcomes, against the reference table.
pub fn audit_table1() -> Result<AuditReport> {
    let mut report = AuditReport::default();
    for ((sj, tk), (sign, a, b), projected) in TABLE {
        let input = PauliString::new(Phase::ONE, vec![sj, tk]);
        let mid = conjugate_cnot(0, 1, &input)?;
        let out = conjugate_cnot(1, 0, &mid)?;
        let got_sign = out.phase().sign().ok_or_else(|| {
            Error::Integrity(format!(
                "non-real phase {} in the image of {sj:?}{tk:?}",
                out.phase()
            ))
        })?;
        let mut mismatches = Vec::new();
        if out.letters() != [a, b] || got_sign != sign {
            mismatches.push(format!("image {out}"));
        }
        for m in [0u8, 1] {
            let value = got_sign * project_letter(out.letters()[1], m);
            let expected = match projected {
                None => (Pauli::I, 0.0),
                Some((l, s, carries_m)) => (l, if carries_m && m == 1 { -s } else { s }),
            };
            let got = if value == 0.0 {
                (Pauli::I, 0.0)
            } else {
                (out.letters()[0], value)
            };
            if got != expected {
                mismatches.push(format!(
                    "projection for m={m} gives {:+} {}",
                    got.1,
                    got.0.as_char()
                ));
            }
        }
        report.checks.push(AuditCheck {
            name: format!("T-round table row {}{}", sj.as_char(), tk.as_char()),
            passed: mismatches.is_empty(),
            deviation: mismatches.len() as f64,
            tolerance: 0.0,
            witness: if mismatches.is_empty() {
                format!("{}{} -> {out}", sj.as_char(), tk.as_char())
            } else {
                mismatches.join("; ")
            },
            informational: false,
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Negative controls

/// Deals with the `B_x` half of the encoding left out.
pub fn deal_without_b<S: Backend>(secret: &S, cfg: &DealerConfig) -> Result<SharedSecretState<S>> {
    let layout = ShareLayout::for_config(cfg)?;
    let column = protocol::input_column(secret, cfg)?;
    let mut state = column.tensor(&S::maximally_mixed(cfg.rows() * (cfg.columns() - 1))?)?;
    for row in 0..cfg.rows() {
        state = protocol::apply_a(state, &layout, row)?;
    }
    Ok(SharedSecretState {
        state,
        layout,
        secret_qubits: cfg.secret_qubits,
        magic_total: cfg.magic,
        magic_remaining: cfg.magic,
    })
}

/// Deals with `|0⟩` in place of every magic state.
pub fn deal_with_zero_magic<S: Backend>(
    secret: &S,
    cfg: &DealerConfig,
) -> Result<SharedSecretState<S>> {
    let mut extended = secret.clone();
    for _ in 0..cfg.magic {
        extended = extended.tensor(&S::qubit_state(0.0, 0.0, 1.0)?)?;
    }
    let wide = DealerConfig::new(cfg.secret_qubits + cfg.magic, 0, cfg.parties)?;
    let dealt = protocol::deal(&extended, &wide)?;
    Ok(SharedSecretState {
        secret_qubits: cfg.secret_qubits,
        magic_total: cfg.magic,
        magic_remaining: cfg.magic,
        ..dealt
    })
}

/// Applies `gate` to a single cell only. A Pauli here merely flips signs of
/// replicated terms; a basis change such as `H` breaks replication.
pub fn inject_single_cell<S: Backend>(
    shared: &SharedSecretState<S>,
    cell: Cell,
    gate: Clifford1,
) -> Result<SharedSecretState<S>> {
    apply_deviation(shared, &Deviation::Clifford { cell, gate })
}

fn letters_str(letters: &[Pauli]) -> String {
    letters.iter().map(|l| l.as_char()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;

    fn secret() -> PauliSumState {
        PauliSumState::qubit_state(0.3, -0.4, 0.5).unwrap()
    }

    fn dealt() -> SharedSecretState<PauliSumState> {
        protocol::deal(&secret(), &DealerConfig::new(1, 1, 5).unwrap()).unwrap()
    }

    #[test]
    fn table_reproduced() {
        let r = audit_table1().unwrap();
        assert_eq!(r.checks.len(), 12);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn threshold_and_form_on_fresh_deal() {
        let s = dealt();
        let t = audit_threshold(&s).unwrap();
        assert!(t.passed());
        assert_eq!(t.worst_deviation(), 0.0);
        assert!(audit_form(&s).unwrap().passed());
    }

    #[test]
    fn negative_controls_fail() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let broken = deal_without_b(&secret(), &cfg).unwrap();
        let t = audit_threshold(&broken).unwrap();
        assert!(!t.passed());
        assert!(t.worst_deviation() > 0.1);

        let cell = Cell { row: 0, column: 2 };
        let flipped = inject_single_cell(&dealt(), cell, Clifford1::X).unwrap();
        assert!(audit_form(&flipped).unwrap().passed());
        let rotated = inject_single_cell(&dealt(), cell, Clifford1::H).unwrap();
        assert!(!audit_form(&rotated).unwrap().passed());

        let zero = deal_with_zero_magic(&secret(), &cfg).unwrap();
        let (entangled, row) = evaluation::entangle_magic(&zero, 0).unwrap();
        let b = honest_bit_bias(&entangled.state, &entangled.layout, row, 0).unwrap();
        assert!(b.marginal_bias < SECRECY_TOL);
        assert!(b.conditional_bias > 0.1);
    }

    #[test]
    fn coalition_of_everyone_is_rejected() {
        let c = Circuit::new(1, vec![Gate::T { qubit: 0 }]).unwrap();
        let adv = AdversaryModel::passive(0..5);
        assert!(matches!(adv.validate(5, &c), Err(Error::Adversary(_))));
    }

    #[test]
    fn lying_keeps_honest_bits_uniform() {
        let c = Circuit::new(1, vec![Gate::T { qubit: 0 }]).unwrap();
        let adv = AdversaryModel {
            coalition: (1..5).collect(),
            actions: vec![AdversaryAction {
                gate: 0,
                deviation: Deviation::Lie { column: 3 },
            }],
        };
        let s = dealt();
        let d = secret().to_dense().unwrap();
        let r = audit_honest_bit(&s, Some(&d), &c, &adv, 7).unwrap();
        assert!(r.passed());
        let correctness = r.checks.last().unwrap();
        assert!(correctness.informational);
        assert!(!correctness.passed);

        let honest = audit_honest_bit(&s, Some(&d), &c, &AdversaryModel::passive(1..5), 7).unwrap();
        assert!(honest.passed());
        assert!(!honest.checks.last().unwrap().informational);
    }

    #[test]
    fn random_channels_are_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_channel(&mut rng, 2, 3);
        let sum = k
            .iter()
            .fold(CMatrix::zeros(4, 4), |acc, m| acc + m.adjoint() * m);
        assert!(dense::max_abs(&(sum - CMatrix::identity(4, 4))) < 1e-12);
    }
}
