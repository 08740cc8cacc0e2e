//! The operations the protocols need from a state representation, implemented
//! by both the sparse Pauli backend and the dense oracle.

use rand::{Rng, RngCore};

use crate::dense::{CMatrix, DenseOperator};
use crate::error::{Error, Result};
use crate::pauli::CliffordOp;
use crate::sparse::{MeasurementOutcome, PauliSumState};

pub trait Backend: Clone + Sized {
    const NAME: &'static str;

    fn width(&self) -> usize;
    fn maximally_mixed(width: usize) -> Result<Self>;
    fn qubit_state(a: f64, b: f64, c: f64) -> Result<Self>;
    fn tensor(&self, other: &Self) -> Result<Self>;
    fn apply_clifford(&self, op: CliffordOp) -> Result<Self>;
    fn probability(&self, qubit: usize, bit: u8) -> Result<f64>;
    fn measure_branch(&self, qubit: usize, bit: u8) -> Result<MeasurementOutcome<Self>>;
    fn partial_trace(&self, keep: &[usize]) -> Result<Self>;
    fn mixture(parts: &[(f64, Self)]) -> Result<Self>;
    fn to_dense(&self) -> Result<DenseOperator>;
    fn to_sparse(&self) -> PauliSumState;

    /// Largest difference between two states of equal width, in the metric
    /// native to the backend (coefficient max-norm or matrix max-norm).
    fn max_deviation(&self, other: &Self) -> Result<f64>;

    /// Applies an explicit Kraus channel. Only the dense backend can represent
    /// arbitrary channels.
    fn apply_channel(&self, kraus: &[CMatrix], qubits: &[usize]) -> Result<Self> {
        let _ = (kraus, qubits);
        Err(Error::Unsupported(format!(
            "explicit channels need the dense backend, not {}",
            Self::NAME
        )))
    }

    fn measure_sample(
        &self,
        qubit: usize,
        rng: &mut dyn RngCore,
    ) -> Result<MeasurementOutcome<Self>> {
        let p0 = self.probability(qubit, 0)?;
        let bit = if rng.random::<f64>() < p0 { 0 } else { 1 };
        self.measure_branch(qubit, bit)
    }

    fn measure_both(&self, qubit: usize) -> Result<Vec<MeasurementOutcome<Self>>> {
        let mut out = Vec::with_capacity(2);
        for bit in [0, 1] {
            if self.probability(qubit, bit)? >= crate::sparse::MIN_PROBABILITY {
                out.push(self.measure_branch(qubit, bit)?);
            }
        }
        Ok(out)
    }
}

impl Backend for PauliSumState {
    const NAME: &'static str = "sparse";

    fn width(&self) -> usize {
        PauliSumState::width(self)
    }

    fn maximally_mixed(width: usize) -> Result<Self> {
        Ok(PauliSumState::maximally_mixed(width))
    }

    fn qubit_state(a: f64, b: f64, c: f64) -> Result<Self> {
        PauliSumState::qubit_state(a, b, c)
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(PauliSumState::tensor(self, other))
    }

    fn apply_clifford(&self, op: CliffordOp) -> Result<Self> {
        PauliSumState::apply_clifford(self, op)
    }

    fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        PauliSumState::probability(self, qubit, bit)
    }

    fn measure_branch(&self, qubit: usize, bit: u8) -> Result<MeasurementOutcome<Self>> {
        PauliSumState::measure_branch(self, qubit, bit)
    }

    fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        PauliSumState::partial_trace(self, keep)
    }

    fn mixture(parts: &[(f64, Self)]) -> Result<Self> {
        PauliSumState::mixture(parts)
    }

    fn to_dense(&self) -> Result<DenseOperator> {
        DenseOperator::from_pauli_sum(self)
    }

    fn to_sparse(&self) -> PauliSumState {
        self.clone()
    }

    fn max_deviation(&self, other: &Self) -> Result<f64> {
        self.max_coefficient_deviation(other)
    }
}

impl Backend for DenseOperator {
    const NAME: &'static str = "dense";

    fn width(&self) -> usize {
        DenseOperator::width(self)
    }

    fn maximally_mixed(width: usize) -> Result<Self> {
        DenseOperator::maximally_mixed(width)
    }

    fn qubit_state(a: f64, b: f64, c: f64) -> Result<Self> {
        DenseOperator::qubit_state(a, b, c)
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        DenseOperator::tensor(self, other)
    }

    fn apply_clifford(&self, op: CliffordOp) -> Result<Self> {
        DenseOperator::apply_clifford(self, op)
    }

    fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        DenseOperator::probability(self, qubit, bit)
    }

    fn measure_branch(&self, qubit: usize, bit: u8) -> Result<MeasurementOutcome<Self>> {
        DenseOperator::measure_branch(self, qubit, bit)
    }

    fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        DenseOperator::partial_trace(self, keep)
    }

    fn mixture(parts: &[(f64, Self)]) -> Result<Self> {
        DenseOperator::mixture(parts)
    }

    fn to_dense(&self) -> Result<DenseOperator> {
        Ok(self.clone())
    }

    fn apply_channel(&self, kraus: &[CMatrix], qubits: &[usize]) -> Result<Self> {
        DenseOperator::apply_channel(self, kraus, qubits)
    }

    fn to_sparse(&self) -> PauliSumState {
        self.to_pauli_sum()
    }

    fn max_deviation(&self, other: &Self) -> Result<f64> {
        if self.width() != other.width() {
            return Err(Error::LengthMismatch {
                left: self.width(),
                right: other.width(),
            });
        }
        Ok(crate::dense::max_abs(&(self.matrix() - other.matrix())))
    }
}
