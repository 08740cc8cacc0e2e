//! The acceptance suite, shared by the `acceptance` test target and the
//! `selftest` command. Every criterion is deterministic given its seed.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::audit::{self, AuditReport};
use crate::backend::Backend;
use crate::circuit::{Circuit, Gate};
use crate::dense::{max_abs, DenseOperator};
use crate::error::{Error, Result};
use crate::evaluation::{self, parity, EvalMode};
use crate::pauli::{Clifford1, CliffordOp, Pauli, PauliString};
use crate::protocol::{self, DealerConfig, ShareLayout};
use crate::sparse::PauliSumState;

pub const DEFAULT_SEED: u64 = 0x5eed_0001;

pub const TRANSVERSALITY_TOL: f64 = 0.0;
pub const TABLE_TOL: f64 = 0.0;
pub const ROUND_TRIP_TOL: f64 = 0.0;
pub const THRESHOLD_TOL: f64 = 1e-12;
pub const T_GATE_TOL: f64 = 1e-9;
pub const CIRCUIT_TOL: f64 = 1e-9;
pub const HONEST_BIT_TOL: f64 = 1e-12;
pub const FORM_TOL: f64 = 0.0;
pub const ENCODING_TOL: f64 = 1e-10;
pub const BACKEND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

impl CriterionResult {
    fn new(
        id: u8,
        name: &'static str,
        deviation: f64,
        tolerance: f64,
        cases: usize,
        detail: String,
    ) -> Self {
        Self {
            id,
            name,
            passed: deviation <= tolerance,
            deviation,
            tolerance,
            cases,
            detail,
        }
    }

    fn from_report(id: u8, name: &'static str, tolerance: f64, report: &AuditReport) -> Self {
        let detail = match report.failures().next() {
            Some(f) => format!("{}: {}", f.name, f.witness),
            None => format!("{} check(s) passed", report.checks.len()),
        };
        Self {
            id,
            name,
            passed: report.passed(),
            deviation: report.worst_deviation(),
            tolerance,
            cases: report.checks.len(),
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {:<32} deviation {:.3e} (tolerance {:.0e}) over {} case(s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.deviation,
            self.tolerance,
            self.cases,
            self.detail
        )
    }
}

// ---------------------------------------------------------------------------
// Random inputs

fn unit_complex(rng: &mut dyn RngCore) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// `G G† / tr(G G†)` for a random `2^q × r` matrix `G` of random rank `r`.
pub fn random_density(rng: &mut dyn RngCore, qubits: usize) -> Result<DenseOperator> {
    let d = 1usize << qubits;
    let rank = rng.random_range(1..=d);
    let g = DMatrix::from_fn(d, rank, |_, _| unit_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut rho = m / tr;
    // Hermitize exactly so the validation tolerance only sees rounding.
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DenseOperator::from_matrix(rho)
}

pub fn random_secret(rng: &mut dyn RngCore, qubits: usize) -> Result<PauliSumState> {
    Ok(random_density(rng, qubits)?.to_pauli_sum())
}

/// Random circuit with `cliffords` Clifford gates and `t_gates` T gates in
/// random positions.
pub fn random_circuit(
    rng: &mut dyn RngCore,
    width: usize,
    cliffords: usize,
    t_gates: usize,
) -> Result<Circuit> {
    let singles = [
        Clifford1::H,
        Clifford1::S,
        Clifford1::X,
        Clifford1::Y,
        Clifford1::Z,
    ];
    let total = cliffords + t_gates;
    let mut t_slots = Vec::new();
    while t_slots.len() < t_gates {
        let k = rng.random_range(0..total);
        if !t_slots.contains(&k) {
            t_slots.push(k);
        }
    }
    let gates = (0..total)
        .map(|k| {
            if t_slots.contains(&k) {
                return Gate::T {
                    qubit: rng.random_range(0..width),
                };
            }
            if width > 1 && rng.random_bool(0.3) {
                let control = rng.random_range(0..width);
                let target = (control + rng.random_range(1..width)) % width;
                Gate::Cnot { control, target }
            } else {
                Gate::Single {
                    gate: singles[rng.random_range(0..singles.len())],
                    qubit: rng.random_range(0..width),
                }
            }
        })
        .collect();
    Circuit::new(width, gates)
}

fn bloch_grid() -> Vec<[f64; 3]> {
    let vals = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 1.0, -1.0];
    let mut out = Vec::new();
    for a in vals {
        for b in vals {
            for c in vals {
                if a * a + b * b + c * c <= 1.0 + 1e-12 {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria

/// 1. Encoding one row at `n = 5` maps `X`, `Y`, `Z` on column 0 to the
///    replicated string with phase +1.
pub fn transversality() -> Result<CriterionResult> {
    let n = 5;
    let layout = ShareLayout::new(1, n, n)?;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
        let state = PauliSumState::from_terms(
            n,
            [
                (PauliString::identity(n), 1.0),
                (PauliString::single(n, 0, letter), 1.0),
            ],
        )?;
        let encoded = protocol::encode_row(state, &layout, 0)?;
        let want = PauliSumState::from_terms(
            n,
            [
                (PauliString::identity(n), 1.0),
                (PauliString::replicated(letter, n), 1.0),
            ],
        )?;
        let dev = encoded.max_coefficient_deviation(&want)?;
        worst = worst.max(dev);
        let image = encoded
            .nontrivial_terms()
            .map(|(l, c)| {
                format!(
                    "{}{}",
                    if c < 0.0 { "-" } else { "+" },
                    crate::serialize::literal(l)
                )
            })
            .collect::<Vec<_>>()
            .join(" ");
        detail.push(format!("{} -> {image}", letter.as_char()));
    }
    Ok(CriterionResult::new(
        1,
        "transversality",
        worst,
        TRANSVERSALITY_TOL,
        3,
        detail.join(", "),
    ))
}

/// 2. The two-qubit `T`-round table.
pub fn table() -> Result<CriterionResult> {
    Ok(CriterionResult::from_report(
        2,
        "T-round table",
        TABLE_TOL,
        &audit::audit_table1()?,
    ))
}

/// 3. `decode ∘ deal` is the identity on coefficients.
pub fn round_trip(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = 120;
    let mut mismatches = 0usize;
    let mut worst: f64 = 0.0;
    for k in 0..cases {
        let s = 1 + k % 2;
        let t = (k / 2) % 2;
        let secret = random_secret(&mut rng, s)?;
        let shared = protocol::deal(&secret, &DealerConfig::new(s, t, 5)?)?;
        let back = protocol::decode(&shared)?;
        if back != secret {
            mismatches += 1;
            worst = worst.max(
                back.max_coefficient_deviation(&secret)?
                    .max(f64::MIN_POSITIVE),
            );
        }
    }
    Ok(CriterionResult::new(
        3,
        "deal/decode round trip",
        worst,
        ROUND_TRIP_TOL,
        cases,
        format!("{mismatches} inexact case(s), s in 1..=2, t in 0..=1, n = 5"),
    ))
}

/// 4. Every `(n−1)`-coalition holds `I/2^k` after dealing and after every
///    gate of a 30-gate mixed circuit.
pub fn threshold(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let secret = random_secret(&mut rng, 2)?;
    let circuit = random_circuit(&mut rng, 2, 28, 2)?;
    let shared = protocol::deal(&secret, &DealerConfig::new(2, 2, 5)?)?;
    let mut report = audit::audit_threshold(&shared)?;
    let mut sample_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    evaluation::evaluate_circuit_observed(
        &shared,
        &circuit,
        &mut EvalMode::Sample(&mut sample_rng),
        |_, _, s| {
            report.extend(audit::audit_threshold(s)?);
            Ok(())
        },
    )?;
    Ok(CriterionResult::from_report(
        4,
        "threshold secrecy",
        THRESHOLD_TOL,
        &report,
    ))
}

fn replicated_row(n: usize, [a, b, c]: [f64; 3]) -> Result<PauliSumState> {
    PauliSumState::from_terms(
        n,
        [
            (PauliString::identity(n), 1.0),
            (PauliString::replicated(Pauli::X, n), a),
            (PauliString::replicated(Pauli::Y, n), b),
            (PauliString::replicated(Pauli::Z, n), c),
        ],
    )
}

/// 5. `T` on a Bloch grid with the dense backend: both parity branches, the
///    uncorrected odd branch, and the corrected output.
pub fn t_gate() -> Result<CriterionResult> {
    let cfg = DealerConfig::new(1, 1, 5)?;
    let n = cfg.columns();
    let grid = bloch_grid();
    let mut worst: f64 = 0.0;
    let mut branches = 0usize;
    let mut parities = [0usize; 2];
    for &[a, b, c] in &grid {
        let secret = DenseOperator::qubit_state(a, b, c)?;
        let shared = protocol::deal(&secret, &cfg)?;
        let even = [(a - b) * FRAC_1_SQRT_2, (a + b) * FRAC_1_SQRT_2, c];
        let odd = [(a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2, -c];
        let even_shared = DenseOperator::from_pauli_sum(&replicated_row(n, even)?)?;
        let odd_shared = DenseOperator::from_pauli_sum(&replicated_row(n, odd)?)?;
        let target = DenseOperator::qubit_state(even[0], even[1], even[2])?;
        for br in evaluation::t_gate_branches(&shared, 0)? {
            branches += 1;
            let p = parity(&br.bits) as usize;
            parities[p] += 1;
            let raw = if p == 0 { &even_shared } else { &odd_shared };
            worst = worst
                .max(br.uncorrected.state.max_deviation(raw)?)
                .max(br.corrected.state.max_deviation(&even_shared)?)
                .max(protocol::decode(&br.corrected)?.trace_distance(&target)?);
        }
    }
    Ok(CriterionResult::new(
        5,
        "T-gate correctness",
        worst,
        T_GATE_TOL,
        branches,
        format!(
            "{} Bloch input(s), {} even and {} odd branch(es)",
            grid.len(),
            parities[0],
            parities[1]
        ),
    ))
}

/// Random circuits shared by criteria 6 and 8.
pub fn circuit_cases(seed: u64) -> Result<Vec<(PauliSumState, Circuit)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..60)
        .map(|k| {
            let secret = random_secret(&mut rng, 2)?;
            let cliffords = rng.random_range(0..=20);
            let circuit = random_circuit(&mut rng, 2, cliffords, k % 3)?;
            Ok((secret, circuit))
        })
        .collect()
}

/// 6 and 8 together: end-to-end equivalence with the direct reference, and
/// the replicated form after every gate.
pub fn circuits(seed: u64) -> Result<(CriterionResult, CriterionResult)> {
    let cases = circuit_cases(seed)?;
    let mut worst: f64 = 0.0;
    let mut form = AuditReport::default();
    let mut t_total = 0;
    for (secret, circuit) in &cases {
        t_total += circuit.t_count();
        let cfg = DealerConfig::new(2, circuit.t_count(), 5)?;
        let shared = protocol::deal(secret, &cfg)?;
        form.extend(audit::audit_form(&shared)?);
        let (out, _) = evaluation::evaluate_circuit_observed(
            &shared,
            circuit,
            &mut EvalMode::Enumerate,
            |_, _, s| {
                form.extend(audit::audit_form(s)?);
                Ok(())
            },
        )?;
        let decoded = protocol::decode(&out)?.to_dense()?;
        let reference = evaluation::direct_reference(&secret.to_dense()?, circuit)?;
        worst = worst.max(decoded.trace_distance(&reference)?);
    }
    let six = CriterionResult::new(
        6,
        "end-to-end circuit equivalence",
        worst,
        CIRCUIT_TOL,
        cases.len(),
        format!("s = 2, n = 5, {t_total} T gate(s) in total, trace distance"),
    );
    let eight = CriterionResult::from_report(8, "induction-form preservation", FORM_TOL, &form);
    Ok((six, eight))
}

/// 7. Honest-bit uniformity: exhaustive Pauli deviations before every `T`
///    round, plus random channels on the dense backend.
pub fn honest_bit(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let secret = random_secret(&mut rng, 1)?;
    let circuit = crate::circuit::parse_circuit("H 0\nT 0\nS 0\nH 0\nT 0\n", 1)?;
    let shared = protocol::deal(&secret, &DealerConfig::new(1, 2, 5)?)?;

    let mut report = AuditReport::default();
    let mut current = shared.clone();
    let mut sample_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7777);
    for gate in circuit.gates() {
        current = match *gate {
            Gate::T { qubit } => {
                report.extend(audit::pauli_deviation_sweep(&current, qubit)?);
                evaluation::apply_t_gate(&current, qubit, &mut EvalMode::Sample(&mut sample_rng))?.0
            }
            _ => evaluation::apply_clifford_logical(&current, gate)?,
        };
    }

    let dense_secret = secret.to_dense()?;
    for column in 1..5 {
        let coalition: Vec<usize> = (0..5).filter(|&c| c != column).collect();
        let lie = audit::AdversaryModel {
            coalition: coalition.iter().copied().collect(),
            actions: vec![audit::AdversaryAction {
                gate: 1,
                deviation: audit::Deviation::Lie {
                    column: coalition[0],
                },
            }],
        };
        report.extend(audit::audit_honest_bit(
            &shared,
            Some(&dense_secret),
            &circuit,
            &lie,
            seed,
        )?);
    }

    let dense_shared = protocol::deal(&dense_secret, &DealerConfig::new(1, 1, 5)?)?;
    report.extend(audit::channel_deviation_sweep(&dense_shared, 0, 12, seed)?);
    Ok(CriterionResult::from_report(
        7,
        "honest-bit uniformity",
        HONEST_BIT_TOL,
        &report,
    ))
}

/// 9. Averaging the encoding over all basis-state ancillas reproduces the
///    `I/2`-ancilla encoding.
pub fn sampled_encoding(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = DealerConfig::new(1, 0, 5)?;
    let mut worst: f64 = 0.0;
    let mut inputs = vec![
        DenseOperator::qubit_state(0.0, 0.0, 1.0)?,
        DenseOperator::qubit_state(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)?,
    ];
    for _ in 0..3 {
        inputs.push(random_density(&mut rng, 1)?);
    }
    let mut averaged = 0;
    for secret in &inputs {
        let eq = protocol::sampled_encoding_equivalence(&cfg, secret)?;
        averaged = eq.cases;
        worst = worst.max(eq.trace_distance);
    }
    Ok(CriterionResult::new(
        9,
        "sampled-encoding equivalence",
        worst,
        ENCODING_TOL,
        inputs.len(),
        format!("{averaged} ancilla assignment(s) per secret, s = 1, t = 0, n = 5"),
    ))
}

fn dense_gap(sparse: &PauliSumState, dense: &DenseOperator) -> Result<f64> {
    let lifted = DenseOperator::from_pauli_sum(sparse)?;
    if lifted.width() != dense.width() {
        return Err(Error::LengthMismatch {
            left: lifted.width(),
            right: dense.width(),
        });
    }
    Ok(max_abs(&(lifted.matrix() - dense.matrix())))
}

/// One randomized comparison of a sparse operation with the dense oracle.
/// Returns the operation name and the gap.
pub fn backend_case(rng: &mut dyn RngCore) -> Result<(&'static str, f64)> {
    let q = rng.random_range(1..=6);
    let dense = random_density(rng, q)?;
    let sparse = dense.to_pauli_sum();
    let base = dense_gap(&sparse, &dense)?;
    let gap = match rng.random_range(0..7) {
        0 => {
            let gate = Clifford1::ALL[rng.random_range(0..Clifford1::ALL.len())];
            let op = CliffordOp::Single {
                gate,
                qubit: rng.random_range(0..q),
            };
            (
                "apply_clifford",
                dense_gap(&sparse.apply_clifford(op)?, &dense.apply_clifford(op)?)?,
            )
        }
        1 if q > 1 => {
            let control = rng.random_range(0..q);
            let target = (control + rng.random_range(1..q)) % q;
            let op = CliffordOp::Cnot { control, target };
            (
                "apply_cnot",
                dense_gap(&sparse.apply_clifford(op)?, &dense.apply_clifford(op)?)?,
            )
        }
        2 => {
            let qubit = rng.random_range(0..q);
            let bit = rng.random_range(0..2u8);
            let ps = sparse.probability(qubit, bit)?;
            let pd = dense.probability(qubit, bit)?;
            let mut gap = (ps - pd).abs();
            if pd > 1e-6 && q > 1 {
                let a = sparse.measure_branch(qubit, bit)?;
                let b = dense.measure_branch(qubit, bit)?;
                gap = gap.max(dense_gap(&a.post_state, &b.post_state)?);
            }
            ("measure_z", gap)
        }
        3 if q > 1 => {
            let keep: Vec<usize> = (0..q).filter(|_| rng.random_bool(0.5)).collect();
            let keep = if keep.is_empty() { vec![0] } else { keep };
            (
                "partial_trace",
                dense_gap(&sparse.partial_trace(&keep)?, &dense.partial_trace(&keep)?)?,
            )
        }
        4 if q < 6 => {
            let extra = rng.random_range(1..=6 - q);
            let other = random_density(rng, extra)?;
            let gap = dense_gap(
                &sparse.tensor(&other.to_pauli_sum()),
                &dense.tensor(&other)?,
            )?;
            ("tensor", gap)
        }
        5 => {
            let other = random_density(rng, q)?;
            let hs_sparse = sparse.hs_distance(&other.to_pauli_sum())?;
            let hs_dense = dense.hs_distance(&other)?;
            ("hs_distance", (hs_sparse - hs_dense).abs())
        }
        _ => {
            let a = rng.random_range(-1.0..1.0f64);
            let b = rng.random_range(-1.0..1.0f64) * (1.0 - a * a).sqrt();
            let c = rng.random_range(-1.0..1.0f64) * (1.0 - a * a - b * b).sqrt();
            let gap = dense_gap(
                &PauliSumState::qubit_state(a, b, c)?,
                &DenseOperator::qubit_state(a, b, c)?,
            )?;
            ("qubit_state", gap)
        }
    };
    Ok((gap.0, gap.1.max(base)))
}

/// 10. Sparse operations agree with the dense oracle.
pub fn backend_agreement(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = 600;
    let mut worst: (f64, &str) = (0.0, "none");
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..cases {
        let (op, gap) = backend_case(&mut rng)?;
        *counts.entry(op).or_insert(0usize) += 1;
        if gap > worst.0 {
            worst = (gap, op);
        }
    }
    let mix = counts
        .iter()
        .map(|(k, v)| format!("{k} x{v}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(CriterionResult::new(
        10,
        "backend agreement",
        worst.0,
        BACKEND_TOL,
        cases,
        format!("worst in {}; {mix}", worst.1),
    ))
}

/// Runs every criterion in order.
pub fn run_all(seed: u64) -> Result<Vec<CriterionResult>> {
    let (six, eight) = circuits(seed.wrapping_add(6))?;
    let mut out = vec![
        transversality()?,
        table()?,
        round_trip(seed.wrapping_add(3))?,
        threshold(seed.wrapping_add(4))?,
        t_gate()?,
        six,
        honest_bit(seed.wrapping_add(7))?,
        eight,
        sampled_encoding(seed.wrapping_add(9))?,
        backend_agreement(seed.wrapping_add(10))?,
    ];
    out.sort_by_key(|c| c.id);
    Ok(out)
}
