//! The dealer's side of the scheme: input, encoding, sharing and decoding on
//! the `N × n` qubit grid.
//!
//! Row `x` holds logical qubit `x`; column `y` is share `y`. The first `s`
//! rows carry the secret and the last `t` rows carry logical magic states,
//! which `T` gates consume from the bottom row upwards. Qubits are numbered
//! column-major (`index = column · live_rows + row_position`), so each share
//! occupies a contiguous block of the register.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::dense::{self, DenseOperator};
use crate::error::{Error, Result};
use crate::pauli::{Clifford1, CliffordOp, Pauli};
use crate::sparse::PauliSumState;

/// Bloch vector of `τ = I/2 + (X + Y)/(2√2)`.
pub const MAGIC_BLOCH: [f64; 3] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
    0.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerConfig {
    pub secret_qubits: usize,
    pub magic: usize,
    pub parties: usize,
}

impl DealerConfig {
    pub fn new(secret_qubits: usize, magic: usize, parties: usize) -> Result<Self> {
        if secret_qubits == 0 {
            return Err(Error::InvalidConfig(
                "at least one secret qubit is required".into(),
            ));
        }
        if parties < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least two parties are required, got {parties}"
            )));
        }
        Ok(Self {
            secret_qubits,
            magic,
            parties,
        })
    }

    /// `N = s + t`.
    pub fn rows(&self) -> usize {
        self.secret_qubits + self.magic
    }

    /// Share count `n`, the smallest value `≥ parties` with `n ≡ 1 (mod 4)`.
    pub fn columns(&self) -> usize {
        4 * (self.parties - 1).div_ceil(4) + 1
    }

    pub fn total_qubits(&self) -> usize {
        self.rows() * self.columns()
    }
}

/// Binds grid cells to register indices and columns to parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareLayout {
    total_rows: usize,
    live_rows: Vec<usize>,
    columns: usize,
    party_of_column: Vec<usize>,
}

impl ShareLayout {
    /// Extra columns beyond `parties` go round-robin to parties `0, 1, …`.
    pub fn new(rows: usize, columns: usize, parties: usize) -> Result<Self> {
        if parties == 0 || parties > columns {
            return Err(Error::InvalidConfig(format!(
                "{parties} parties cannot hold {columns} columns"
            )));
        }
        Ok(Self {
            total_rows: rows,
            live_rows: (0..rows).collect(),
            columns,
            party_of_column: (0..columns).map(|c| c % parties).collect(),
        })
    }

    pub fn for_config(cfg: &DealerConfig) -> Result<Self> {
        Self::new(cfg.rows(), cfg.columns(), cfg.parties)
    }

    /// Consistency of a layout obtained from outside, e.g. by deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.party_of_column.len() != self.columns || self.columns == 0 {
            return Err(Error::InvalidConfig(format!(
                "{} party assignments for {} columns",
                self.party_of_column.len(),
                self.columns
            )));
        }
        if self.live_rows.windows(2).any(|w| w[0] >= w[1])
            || self.live_rows.last().is_some_and(|&r| r >= self.total_rows)
        {
            return Err(Error::InvalidConfig(format!(
                "live rows {:?} are not increasing rows of 0..{}",
                self.live_rows, self.total_rows
            )));
        }
        let parties = self.parties();
        if (0..parties).any(|p| !self.party_of_column.contains(&p)) {
            return Err(Error::InvalidConfig("some party holds no column".into()));
        }
        Ok(())
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn total_rows(&self) -> usize {
        self.total_rows
    }

    pub fn live_rows(&self) -> &[usize] {
        &self.live_rows
    }

    pub fn width(&self) -> usize {
        self.live_rows.len() * self.columns
    }

    pub fn parties(&self) -> usize {
        self.party_of_column.iter().max().map_or(0, |&p| p + 1)
    }

    pub fn party_of_column(&self, column: usize) -> usize {
        self.party_of_column[column]
    }

    pub fn party_columns(&self, party: usize) -> Vec<usize> {
        (0..self.columns)
            .filter(|&c| self.party_of_column[c] == party)
            .collect()
    }

    fn row_position(&self, row: usize) -> Result<usize> {
        self.live_rows
            .iter()
            .position(|&r| r == row)
            .ok_or_else(|| Error::InvalidConfig(format!("row {row} is not live")))
    }

    /// Register index of cell `(row, column)`.
    pub fn qubit(&self, row: usize, column: usize) -> Result<usize> {
        if column >= self.columns {
            return Err(Error::QubitOutOfRange {
                index: column,
                width: self.columns,
            });
        }
        Ok(column * self.live_rows.len() + self.row_position(row)?)
    }

    pub fn row_qubits(&self, row: usize) -> Result<Vec<usize>> {
        (0..self.columns).map(|c| self.qubit(row, c)).collect()
    }

    pub fn column_qubits(&self, column: usize) -> Result<Vec<usize>> {
        self.live_rows
            .iter()
            .map(|&r| self.qubit(r, column))
            .collect()
    }

    pub fn qubits_of_columns(&self, columns: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &c in columns {
            out.extend(self.column_qubits(c)?);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Drops a row whose qubits have been measured out of the register.
    pub fn remove_row(&mut self, row: usize) -> Result<()> {
        let pos = self.row_position(row)?;
        self.live_rows.remove(pos);
        Ok(())
    }
}

/// The dealt state together with its layout and magic-state bookkeeping.
#[derive(Debug, Clone)]
pub struct SharedSecretState<S> {
    pub state: S,
    pub layout: ShareLayout,
    pub secret_qubits: usize,
    pub magic_total: usize,
    pub magic_remaining: usize,
}

impl<S: Backend> SharedSecretState<S> {
    /// Row consumed by the next `T` gate: the `k`-th gate uses row `N − k`.
    pub fn next_magic_row(&self) -> Option<usize> {
        (self.magic_remaining > 0).then(|| self.secret_qubits + self.magic_remaining - 1)
    }

    /// Applies `gate` to the same cell of every column.
    pub fn apply_transversal(&self, gate: Clifford1, row: usize) -> Result<Self> {
        let mut state = self.state.clone();
        for q in self.layout.row_qubits(row)? {
            state = state.apply_clifford(CliffordOp::Single { gate, qubit: q })?;
        }
        Ok(Self {
            state,
            ..self.clone()
        })
    }

    /// Column-wise CNOT between two rows.
    pub fn apply_transversal_cnot(&self, control_row: usize, target_row: usize) -> Result<Self> {
        let mut state = self.state.clone();
        for col in 0..self.layout.columns() {
            let control = self.layout.qubit(control_row, col)?;
            let target = self.layout.qubit(target_row, col)?;
            state = state.apply_clifford(CliffordOp::Cnot { control, target })?;
        }
        Ok(Self {
            state,
            ..self.clone()
        })
    }

    /// Reduced state held by the given columns.
    pub fn coalition_state(&self, columns: &[usize]) -> Result<S> {
        self.state
            .partial_trace(&self.layout.qubits_of_columns(columns)?)
    }
}

/// `A_x`: CNOTs from column 0 onto every other column, ascending.
pub(crate) fn apply_a<S: Backend>(state: S, layout: &ShareLayout, row: usize) -> Result<S> {
    let head = layout.qubit(row, 0)?;
    let mut state = state;
    for col in 1..layout.columns() {
        let target = layout.qubit(row, col)?;
        state = state.apply_clifford(CliffordOp::Cnot {
            control: head,
            target,
        })?;
    }
    Ok(state)
}

/// `B_x`: CNOTs from every other column onto column 0, ascending.
fn apply_b<S: Backend>(state: S, layout: &ShareLayout, row: usize) -> Result<S> {
    let head = layout.qubit(row, 0)?;
    let mut state = state;
    for col in 1..layout.columns() {
        let control = layout.qubit(row, col)?;
        state = state.apply_clifford(CliffordOp::Cnot {
            control,
            target: head,
        })?;
    }
    Ok(state)
}

/// `U_x = B_x A_x` on one row.
pub fn encode_row<S: Backend>(state: S, layout: &ShareLayout, row: usize) -> Result<S> {
    let state = apply_a(state, layout, row)?;
    apply_b(state, layout, row)
}

/// `U_x† = A_x B_x`: `B_x` first, then `A_x`.
pub fn decode_row<S: Backend>(state: S, layout: &ShareLayout, row: usize) -> Result<S> {
    let state = apply_b(state, layout, row)?;
    apply_a(state, layout, row)
}

/// Column-0 input `secret ⊗ τ^{⊗t}` for the first share.
pub(crate) fn input_column<S: Backend>(secret: &S, cfg: &DealerConfig) -> Result<S> {
    if secret.width() != cfg.secret_qubits {
        return Err(Error::LengthMismatch {
            left: secret.width(),
            right: cfg.secret_qubits,
        });
    }
    let [a, b, c] = MAGIC_BLOCH;
    let tau = S::qubit_state(a, b, c)?;
    let mut column = secret.clone();
    for _ in 0..cfg.magic {
        column = column.tensor(&tau)?;
    }
    Ok(column)
}

fn encode_all<S: Backend>(
    state: S,
    cfg: &DealerConfig,
    layout: ShareLayout,
) -> Result<SharedSecretState<S>> {
    let mut state = state;
    for row in 0..cfg.rows() {
        state = encode_row(state, &layout, row)?;
    }
    Ok(SharedSecretState {
        state,
        layout,
        secret_qubits: cfg.secret_qubits,
        magic_total: cfg.magic,
        magic_remaining: cfg.magic,
    })
}

/// Input, encoding and sharing with every ancilla in `I/2`.
pub fn deal<S: Backend>(secret: &S, cfg: &DealerConfig) -> Result<SharedSecretState<S>> {
    let layout = ShareLayout::for_config(cfg)?;
    let column = input_column(secret, cfg)?;
    // Column-major numbering puts column 0 first, so the ancillas of columns
    // 1..n simply follow it.
    let ancillas = S::maximally_mixed(cfg.rows() * (cfg.columns() - 1))?;
    encode_all(column.tensor(&ancillas)?, cfg, layout)
}

/// Like [`deal`] but with ancilla `(row, column)` prepared in
/// `|bits[k]⟩⟨bits[k]|`, `k` running column-major over columns `1..n`.
pub fn deal_with_basis_ancillas<S: Backend>(
    secret: &S,
    cfg: &DealerConfig,
    bits: &[u8],
) -> Result<SharedSecretState<S>> {
    let expected = cfg.rows() * (cfg.columns() - 1);
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            left: bits.len(),
            right: expected,
        });
    }
    let layout = ShareLayout::for_config(cfg)?;
    let mut state = input_column(secret, cfg)?;
    for &b in bits {
        let z = if b == 0 { 1.0 } else { -1.0 };
        state = state.tensor(&S::qubit_state(0.0, 0.0, z)?)?;
    }
    encode_all(state, cfg, layout)
}

/// Reassembles the shares, undoes the encoding row by row and returns the
/// first `s` qubits of column 0.
pub fn decode<S: Backend>(shared: &SharedSecretState<S>) -> Result<S> {
    let layout = &shared.layout;
    let mut state = shared.state.clone();
    for &row in layout.live_rows() {
        state = decode_row(state, layout, row)?;
    }
    let keep = (0..shared.secret_qubits)
        .map(|row| layout.qubit(row, 0))
        .collect::<Result<Vec<_>>>()?;
    let secret = state.partial_trace(&keep)?;
    check_integrity(&secret)?;
    Ok(secret)
}

fn check_integrity<S: Backend>(s: &S) -> Result<()> {
    let sparse = s.to_sparse();
    let worst = sparse.max_abs_nontrivial();
    if worst > 1.0 + 1e-9 {
        return Err(Error::Integrity(format!(
            "Pauli coefficient of magnitude {worst} in the decoded secret"
        )));
    }
    if let Ok(d) = s.to_dense() {
        let tr = d.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Integrity(format!("decoded secret has trace {tr}")));
        }
    }
    Ok(())
}

/// Outcome of averaging the basis-ancilla encodings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingEquivalence {
    pub cases: usize,
    pub trace_distance: f64,
}

impl EncodingEquivalence {
    pub fn holds(&self) -> bool {
        self.trace_distance <= 1e-10
    }
}

/// Averages the encoding over every computational-basis assignment of the
/// ancillas and compares the result with the `I/2`-ancilla encoding.
pub fn sampled_encoding_equivalence(
    cfg: &DealerConfig,
    secret: &DenseOperator,
) -> Result<EncodingEquivalence> {
    dense::check_width(cfg.total_qubits())?;
    let ancillas = cfg.rows() * (cfg.columns() - 1);
    let exact = deal(secret, cfg)?;
    let cases = 1usize << ancillas;
    let mut parts = Vec::with_capacity(cases);
    for assignment in 0..cases {
        let bits: Vec<u8> = (0..ancillas)
            .map(|k| ((assignment >> (ancillas - 1 - k)) & 1) as u8)
            .collect();
        parts.push((1.0, deal_with_basis_ancillas(secret, cfg, &bits)?.state));
    }
    let average = DenseOperator::mixture(&parts)?;
    Ok(EncodingEquivalence {
        cases,
        trace_distance: average.trace_distance(&exact.state)?,
    })
}

/// Terms of a sparse shared state grouped by row letter, for terms that are
/// column-replicated.
#[derive(Debug, Clone, Default)]
pub struct LogicalView {
    /// Row letters (one per live row) → coefficient.
    pub replicated: BTreeMap<Vec<Pauli>, f64>,
    /// Terms whose letters differ between columns on some row.
    pub violations: Vec<(Vec<Pauli>, f64)>,
}

impl SharedSecretState<PauliSumState> {
    pub fn logical_view(&self) -> Result<LogicalView> {
        let layout = &self.layout;
        let rows = layout.live_rows().to_vec();
        let cells = rows
            .iter()
            .map(|&r| layout.row_qubits(r))
            .collect::<Result<Vec<_>>>()?;
        let mut view = LogicalView::default();
        for (letters, c) in self.state.terms() {
            let row_letters: Option<Vec<Pauli>> = cells
                .iter()
                .map(|qs| {
                    let first = letters[qs[0]];
                    qs.iter().all(|&q| letters[q] == first).then_some(first)
                })
                .collect();
            match row_letters {
                Some(key) => {
                    view.replicated.insert(key, c);
                }
                None => view.violations.push((letters.to_vec(), c)),
            }
        }
        Ok(view)
    }
}
