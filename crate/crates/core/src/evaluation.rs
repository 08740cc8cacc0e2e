//! Gate evaluation on the shared secret.
//!
//! Clifford gates are applied transversally: every party applies the gate to
//! its own cells of the affected rows. A `T` gate on logical qubit `j` is a
//! coordinated teleportation through the next logical magic row `m`: in each
//! column `CNOT(j → m)` then `CNOT(m → j)`, a Z measurement of `m` whose bit
//! is broadcast, and `SX` on `j` in every column when the broadcast parity is
//! odd.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::circuit::{Circuit, Gate};
use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::pauli::{Clifford1, CliffordOp};
use crate::protocol::{ShareLayout, SharedSecretState};

pub enum EvalMode<'a> {
    /// Draw each round's joint outcome from the exact outcome distribution.
    Sample(&'a mut dyn RngCore),
    /// Follow every outcome branch and return their (branch-independent)
    /// mixture.
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RoundOutcome {
    Sampled {
        bits: Vec<u8>,
        parity: u8,
    },
    Enumerated {
        branches: usize,
        /// Largest deviation of any corrected branch from the mixture.
        branch_deviation: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRound {
    /// 1-based position of this `T` gate among the circuit's `T` gates.
    pub ordinal: usize,
    pub qubit: usize,
    pub magic_row: usize,
    #[serde(flatten)]
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<TranscriptRound>,
}

pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, b| acc ^ (b & 1))
}

pub fn apply_clifford_logical<S: Backend>(
    shared: &SharedSecretState<S>,
    gate: &Gate,
) -> Result<SharedSecretState<S>> {
    check_logical(shared, gate)?;
    match *gate {
        Gate::Single { gate, qubit } => shared.apply_transversal(gate, qubit),
        Gate::Cnot { control, target } => shared.apply_transversal_cnot(control, target),
        Gate::T { .. } => Err(Error::InvalidCircuit(
            "T is not Clifford; evaluate it by teleportation".into(),
        )),
    }
}

fn check_logical<S>(shared: &SharedSecretState<S>, gate: &Gate) -> Result<()> {
    for q in gate.operands() {
        if q >= shared.secret_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                width: shared.secret_qubits,
            });
        }
    }
    Ok(())
}

/// Steps 1–2 of a `T` round in every column. Returns the entangled state and
/// the magic row it will consume.
pub fn entangle_magic<S: Backend>(
    shared: &SharedSecretState<S>,
    qubit: usize,
) -> Result<(SharedSecretState<S>, usize)> {
    let all: Vec<usize> = (0..shared.layout.columns()).collect();
    entangle_columns(shared, qubit, &all)
}

/// Steps 1–2 of a `T` round performed only by the listed columns.
pub fn entangle_columns<S: Backend>(
    shared: &SharedSecretState<S>,
    qubit: usize,
    columns: &[usize],
) -> Result<(SharedSecretState<S>, usize)> {
    check_logical(shared, &Gate::T { qubit })?;
    let row = shared.next_magic_row().ok_or(Error::MagicBudget {
        t_count: shared.magic_total + 1,
        budget: shared.magic_total,
    })?;
    let layout = &shared.layout;
    let mut state = shared.state.clone();
    for &col in columns {
        let data = layout.qubit(qubit, col)?;
        let magic = layout.qubit(row, col)?;
        state = state.apply_clifford(CliffordOp::Cnot {
            control: data,
            target: magic,
        })?;
        state = state.apply_clifford(CliffordOp::Cnot {
            control: magic,
            target: data,
        })?;
    }
    Ok((
        SharedSecretState {
            state,
            ..shared.clone()
        },
        row,
    ))
}

/// Register index of column `column`'s magic cell after columns `0..column`
/// have already had theirs measured out. Column-major numbering puts every
/// earlier column's cell below it.
pub fn magic_index(layout: &ShareLayout, row: usize, column: usize) -> Result<usize> {
    Ok(layout.qubit(row, column)? - column)
}

/// One joint outcome of the magic-row measurements.
#[derive(Debug, Clone)]
pub struct MeasuredBranch<S> {
    pub bits: Vec<u8>,
    pub probability: f64,
    pub state: S,
}

/// Measures the magic row column by column (column order 0..n), drawing each
/// bit from its conditional distribution; the joint draw therefore follows
/// the exact joint distribution.
pub fn measure_magic_sample<S: Backend>(
    state: &S,
    layout: &ShareLayout,
    row: usize,
    rng: &mut dyn RngCore,
) -> Result<MeasuredBranch<S>> {
    let mut current = state.clone();
    let mut bits = Vec::with_capacity(layout.columns());
    let mut probability = 1.0;
    for col in 0..layout.columns() {
        let o = current.measure_sample(magic_index(layout, row, col)?, rng)?;
        bits.push(o.bit);
        probability *= o.probability;
        current = o.post_state;
    }
    Ok(MeasuredBranch {
        bits,
        probability,
        state: current,
    })
}

/// Every joint outcome with non-negligible probability, in lexicographic
/// order of the bit strings.
pub fn measure_magic_all<S: Backend>(
    state: &S,
    layout: &ShareLayout,
    row: usize,
) -> Result<Vec<MeasuredBranch<S>>> {
    let mut frontier = vec![MeasuredBranch {
        bits: Vec::new(),
        probability: 1.0,
        state: state.clone(),
    }];
    for col in 0..layout.columns() {
        let q = magic_index(layout, row, col)?;
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for b in frontier {
            for o in b.state.measure_both(q)? {
                let mut bits = b.bits.clone();
                bits.push(o.bit);
                next.push(MeasuredBranch {
                    bits,
                    probability: b.probability * o.probability,
                    state: o.post_state,
                });
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Step 4: drops the measured row and applies `SX` to `qubit` in every column
/// when the broadcast parity is odd.
pub fn finish_round<S: Backend>(
    entangled: &SharedSecretState<S>,
    post_state: S,
    row: usize,
    qubit: usize,
    broadcast: &[u8],
) -> Result<SharedSecretState<S>> {
    let mut layout = entangled.layout.clone();
    layout.remove_row(row)?;
    let measured = SharedSecretState {
        state: post_state,
        layout,
        secret_qubits: entangled.secret_qubits,
        magic_total: entangled.magic_total,
        magic_remaining: entangled.magic_remaining - 1,
    };
    if parity(broadcast) == 1 {
        measured.apply_transversal(Clifford1::SX, qubit)
    } else {
        Ok(measured)
    }
}

/// A fully resolved branch of a `T` round.
#[derive(Debug, Clone)]
pub struct TBranch<S> {
    pub bits: Vec<u8>,
    pub probability: f64,
    pub uncorrected: SharedSecretState<S>,
    pub corrected: SharedSecretState<S>,
}

/// Runs a `T` round on `qubit` and returns every measurement branch, before
/// and after the parity correction.
pub fn t_gate_branches<S: Backend>(
    shared: &SharedSecretState<S>,
    qubit: usize,
) -> Result<Vec<TBranch<S>>> {
    let (entangled, row) = entangle_magic(shared, qubit)?;
    measure_magic_all(&entangled.state, &entangled.layout, row)?
        .into_iter()
        .map(|b| {
            let uncorrected = finish_round(&entangled, b.state.clone(), row, qubit, &[])?;
            let corrected = finish_round(&entangled, b.state, row, qubit, &b.bits)?;
            Ok(TBranch {
                bits: b.bits,
                probability: b.probability,
                uncorrected,
                corrected,
            })
        })
        .collect()
}

pub fn apply_t_gate<S: Backend>(
    shared: &SharedSecretState<S>,
    qubit: usize,
    mode: &mut EvalMode<'_>,
) -> Result<(SharedSecretState<S>, TranscriptRound)> {
    let ordinal = shared.magic_total - shared.magic_remaining + 1;
    match mode {
        EvalMode::Sample(rng) => {
            let (entangled, row) = entangle_magic(shared, qubit)?;
            let b = measure_magic_sample(&entangled.state, &entangled.layout, row, &mut **rng)?;
            let out = finish_round(&entangled, b.state, row, qubit, &b.bits)?;
            let round = TranscriptRound {
                ordinal,
                qubit,
                magic_row: row,
                outcome: RoundOutcome::Sampled {
                    parity: parity(&b.bits),
                    bits: b.bits,
                },
            };
            Ok((out, round))
        }
        EvalMode::Enumerate => {
            let row = shared.next_magic_row();
            let branches = t_gate_branches(shared, qubit)?;
            let parts: Vec<(f64, S)> = branches
                .iter()
                .map(|b| (b.probability, b.corrected.state.clone()))
                .collect();
            let mixed = S::mixture(&parts)?;
            let mut branch_deviation: f64 = 0.0;
            for (_, s) in &parts {
                branch_deviation = branch_deviation.max(s.max_deviation(&mixed)?);
            }
            let template = &branches[0].corrected;
            let out = SharedSecretState {
                state: mixed,
                ..template.clone()
            };
            let round = TranscriptRound {
                ordinal,
                qubit,
                magic_row: row.expect("entangle_magic checked the budget"),
                outcome: RoundOutcome::Enumerated {
                    branches: branches.len(),
                    branch_deviation,
                },
            };
            Ok((out, round))
        }
    }
}

/// Evaluates `circuit` gate by gate.
pub fn evaluate_circuit<S: Backend>(
    shared: &SharedSecretState<S>,
    circuit: &Circuit,
    mode: &mut EvalMode<'_>,
) -> Result<(SharedSecretState<S>, Transcript)> {
    evaluate_circuit_observed(shared, circuit, mode, |_, _, _| Ok(()))
}

/// Like [`evaluate_circuit`], calling `observe(index, gate, state)` after
/// every gate.
pub fn evaluate_circuit_observed<S, F>(
    shared: &SharedSecretState<S>,
    circuit: &Circuit,
    mode: &mut EvalMode<'_>,
    mut observe: F,
) -> Result<(SharedSecretState<S>, Transcript)>
where
    S: Backend,
    F: FnMut(usize, &Gate, &SharedSecretState<S>) -> Result<()>,
{
    if circuit.width() != shared.secret_qubits {
        return Err(Error::InvalidCircuit(format!(
            "circuit acts on {} qubits but the secret has {}",
            circuit.width(),
            shared.secret_qubits
        )));
    }
    circuit.check_budget(shared.magic_remaining)?;
    let mut current = shared.clone();
    let mut transcript = Transcript::default();
    for (i, gate) in circuit.gates().iter().enumerate() {
        current = match *gate {
            Gate::T { qubit } => {
                let (next, round) = apply_t_gate(&current, qubit, mode)?;
                transcript.rounds.push(round);
                next
            }
            _ => apply_clifford_logical(&current, gate)?,
        };
        observe(i, gate, &current)?;
    }
    Ok((current, transcript))
}

/// Applies the circuit unitarily to the bare secret.
pub fn direct_reference(secret: &DenseOperator, circuit: &Circuit) -> Result<DenseOperator> {
    crate::dense::check_width(secret.width())?;
    if circuit.width() != secret.width() {
        return Err(Error::LengthMismatch {
            left: circuit.width(),
            right: secret.width(),
        });
    }
    circuit
        .gates()
        .iter()
        .try_fold(secret.clone(), |rho, gate| match *gate {
            Gate::Single { gate, qubit } => rho.apply_gate(gate, qubit),
            Gate::Cnot { control, target } => rho.apply_cnot(control, target),
            Gate::T { qubit } => rho.apply_t(qubit),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::protocol::{deal, decode, DealerConfig};
    use crate::sparse::PauliSumState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: [f64; 3], b: [f64; 3]) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn t_rejected_as_clifford() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let shared = deal(&PauliSumState::maximally_mixed(1), &cfg).unwrap();
        assert!(apply_clifford_logical(&shared, &Gate::T { qubit: 0 }).is_err());
    }

    #[test]
    fn logical_hadamard() {
        let cfg = DealerConfig::new(1, 0, 5).unwrap();
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let shared = deal(&zero, &cfg).unwrap();
        let h = Gate::Single {
            gate: Clifford1::H,
            qubit: 0,
        };
        let out = apply_clifford_logical(&shared, &h).unwrap();
        assert_eq!(decode(&out).unwrap().bloch().unwrap(), [1.0, 0.0, 0.0]);
        let back = apply_clifford_logical(&out, &h).unwrap();
        assert_eq!(decode(&back).unwrap(), zero);
    }

    #[test]
    fn logical_cnot() {
        let cfg = DealerConfig::new(2, 0, 5).unwrap();
        let one = PauliSumState::qubit_state(0.0, 0.0, -1.0).unwrap();
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let shared = deal(&one.tensor(&zero), &cfg).unwrap();
        let cnot = Gate::Cnot {
            control: 0,
            target: 1,
        };
        let out = decode(&apply_clifford_logical(&shared, &cnot).unwrap()).unwrap();
        assert_eq!(out, one.tensor(&one));
    }

    #[test]
    fn t_on_magic_input() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        let shared = deal(&tau, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (out, round) = apply_t_gate(&shared, 0, &mut EvalMode::Sample(&mut rng)).unwrap();
        assert_eq!(round.ordinal, 1);
        assert_eq!(round.magic_row, 1);
        assert_eq!(out.magic_remaining, 0);
        assert_eq!(out.state.width(), 5);
        assert!(close(
            decode(&out).unwrap().bloch().unwrap(),
            [0.0, 1.0, 0.0]
        ));
    }

    #[test]
    fn t_fixes_computational_states() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let shared = deal(&zero, &cfg).unwrap();
        let (out, round) = apply_t_gate(&shared, 0, &mut EvalMode::Enumerate).unwrap();
        assert_eq!(decode(&out).unwrap(), zero);
        match round.outcome {
            RoundOutcome::Enumerated {
                branches,
                branch_deviation,
            } => {
                assert_eq!(branches, 32);
                assert!(branch_deviation < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_branch_before_and_after_correction() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let (a, b, c) = (0.5, -0.3, 0.6);
        let secret = PauliSumState::qubit_state(a, b, c).unwrap();
        let shared = deal(&secret, &cfg).unwrap();
        let even = [(a - b) * R, (a + b) * R, c];
        let odd = [(a + b) * R, (a - b) * R, -c];
        for br in t_gate_branches(&shared, 0).unwrap() {
            assert!((br.probability - 1.0 / 32.0).abs() < 1e-15);
            let raw = decode(&br.uncorrected).unwrap().bloch().unwrap();
            let fixed = decode(&br.corrected).unwrap().bloch().unwrap();
            if parity(&br.bits) == 0 {
                assert!(close(raw, even));
            } else {
                assert!(close(raw, odd));
            }
            assert!(close(fixed, even));
        }
    }

    #[test]
    fn magic_rows_consumed_bottom_up() {
        let cfg = DealerConfig::new(1, 2, 5).unwrap();
        let shared = deal(&PauliSumState::maximally_mixed(1), &cfg).unwrap();
        assert_eq!(shared.next_magic_row(), Some(2));
        let (next, _) = apply_t_gate(&shared, 0, &mut EvalMode::Enumerate).unwrap();
        assert_eq!(next.next_magic_row(), Some(1));
        assert_eq!(next.layout.live_rows(), &[0, 1]);
    }

    #[test]
    fn budget_enforced() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let shared = deal(&PauliSumState::maximally_mixed(1), &cfg).unwrap();
        let c = parse_circuit("T 0\nT 0", 1).unwrap();
        assert!(matches!(
            evaluate_circuit(&shared, &c, &mut EvalMode::Enumerate),
            Err(Error::MagicBudget {
                t_count: 2,
                budget: 1
            })
        ));
        let (spent, _) = apply_t_gate(&shared, 0, &mut EvalMode::Enumerate).unwrap();
        assert!(matches!(
            apply_t_gate(&spent, 0, &mut EvalMode::Enumerate),
            Err(Error::MagicBudget { .. })
        ));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let cfg = DealerConfig::new(1, 0, 5).unwrap();
        let secret = PauliSumState::qubit_state(0.1, 0.2, 0.3).unwrap();
        let shared = deal(&secret, &cfg).unwrap();
        let (out, t) =
            evaluate_circuit(&shared, &Circuit::empty(1), &mut EvalMode::Enumerate).unwrap();
        assert!(t.rounds.is_empty());
        assert_eq!(decode(&out).unwrap(), secret);
    }

    #[test]
    fn direct_reference_basics() {
        let tau = DenseOperator::qubit_state(R, R, 0.0).unwrap();
        assert_eq!(direct_reference(&tau, &Circuit::empty(1)).unwrap(), tau);
        let out = direct_reference(&tau, &parse_circuit("T 0", 1).unwrap()).unwrap();
        assert!(close(out.bloch().unwrap(), [0.0, 1.0, 0.0]));
        let ten = DenseOperator::basis_state(&[1, 0]).unwrap();
        let out = direct_reference(&ten, &parse_circuit("CNOT 0 1", 2).unwrap()).unwrap();
        assert_eq!(out, DenseOperator::basis_state(&[1, 1]).unwrap());
    }

    #[test]
    fn transcript_bits_are_recorded_in_column_order() {
        let cfg = DealerConfig::new(1, 1, 5).unwrap();
        let shared = deal(&PauliSumState::maximally_mixed(1), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = parse_circuit("H 0\nT 0", 1).unwrap();
        let (_, t) = evaluate_circuit(&shared, &c, &mut EvalMode::Sample(&mut rng)).unwrap();
        assert_eq!(t.rounds.len(), 1);
        match &t.rounds[0].outcome {
            RoundOutcome::Sampled { bits, parity: p } => {
                assert_eq!(bits.len(), 5);
                assert_eq!(*p, parity(bits));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
