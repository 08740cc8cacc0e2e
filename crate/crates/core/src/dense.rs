//! Brute-force dense density matrices, used as the independent oracle for the
//! sparse backend and for direct (unencoded) circuit evaluation.
//!
//! Qubit 0 is the most significant bit of the basis index, so the matrix of a
//! Pauli string `"XZ"` is `kron(X, Z)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Clifford1, CliffordOp, Pauli, PauliString, Phase};
use crate::sparse::{MeasurementOutcome, PauliSumState, MIN_PROBABILITY, PRUNE};

/// Largest register the dense backend accepts.
pub const MAX_DENSE_WIDTH: usize = 12;

const UNITARY_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    width: usize,
    m: CMatrix,
}

pub fn check_width(width: usize) -> Result<()> {
    if width > MAX_DENSE_WIDTH {
        return Err(Error::WidthCap {
            width,
            cap: MAX_DENSE_WIDTH,
        });
    }
    Ok(())
}

/// 2×2 matrix of a single-qubit Clifford.
pub fn clifford_matrix(gate: Clifford1) -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let data = match gate {
        Clifford1::H => [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
        Clifford1::S => [one, z, z, i],
        Clifford1::X => [z, one, one, z],
        Clifford1::Y => [z, -i, i, z],
        Clifford1::Z => [one, z, z, -one],
        // S·X
        Clifford1::SX => [z, one, i, z],
    };
    CMatrix::from_row_slice(2, 2, &data)
}

/// `T = |0⟩⟨0| + e^{iπ/4}|1⟩⟨1|`.
pub fn t_matrix() -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, r)])
}

/// CNOT with the control on the first local qubit.
pub fn cnot_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

pub fn pauli_matrix(letter: Pauli) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let data = match letter {
        Pauli::I => [one, z, z, one],
        Pauli::X => [z, one, one, z],
        Pauli::Y => [z, -i, i, z],
        Pauli::Z => [one, z, z, -one],
    };
    CMatrix::from_row_slice(2, 2, &data)
}

/// Dense matrix of a signed Pauli string via repeated Kronecker products.
pub fn pauli_string_matrix(p: &PauliString) -> CMatrix {
    let phase = match p.phase().exponent() {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    };
    let m = p.letters().iter().fold(CMatrix::identity(1, 1), |acc, &l| {
        acc.kronecker(&pauli_matrix(l))
    });
    m * phase
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deviation of `Σ K†K` from the identity.
fn completeness_deviation(kraus: &[CMatrix]) -> f64 {
    let d = kraus.first().map_or(0, |k| k.ncols());
    let sum = kraus
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    max_abs(&(sum - CMatrix::identity(d, d)))
}

impl DenseOperator {
    /// Wraps an explicit matrix after checking shape, Hermiticity and unit trace.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square power-of-two matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let width = dim.trailing_zeros() as usize;
        check_width(width)?;
        let s = Self { width, m };
        let herm = max_abs(&(&s.m - s.m.adjoint()));
        if herm > 1e-10 {
            return Err(Error::InvalidMatrix(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = s.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidMatrix(format!("trace is {tr}, expected 1")));
        }
        Ok(s)
    }

    pub fn maximally_mixed(width: usize) -> Result<Self> {
        check_width(width)?;
        let dim = 1usize << width;
        Ok(Self {
            width,
            m: CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn unit() -> Self {
        Self {
            width: 0,
            m: CMatrix::identity(1, 1),
        }
    }

    pub fn qubit_state(a: f64, b: f64, cz: f64) -> Result<Self> {
        let norm = (a * a + b * b + cz * cz).sqrt();
        if norm * norm > 1.0 + 1e-12 || !norm.is_finite() {
            return Err(Error::Unphysical(norm));
        }
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                c((1.0 + cz) / 2.0, 0.0),
                c(a / 2.0, -b / 2.0),
                c(a / 2.0, b / 2.0),
                c((1.0 - cz) / 2.0, 0.0),
            ],
        );
        Ok(Self { width: 1, m })
    }

    /// `|bits⟩⟨bits|`, `bits[0]` being qubit 0.
    pub fn basis_state(bits: &[u8]) -> Result<Self> {
        check_width(bits.len())?;
        let dim = 1usize << bits.len();
        let idx = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut m = CMatrix::zeros(dim, dim);
        m[(idx, idx)] = c(1.0, 0.0);
        Ok(Self {
            width: bits.len(),
            m,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        1 << self.width
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.m - self.m.adjoint()))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_width(self.width + other.width)?;
        Ok(Self {
            width: self.width + other.width,
            m: self.m.kronecker(&other.m),
        })
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.width {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.width,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::IndexCollision(q));
            }
        }
        Ok(())
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.width - 1 - qubit)
    }

    /// Full-register indices of the local basis states for every assignment of
    /// the remaining qubits, `local[0]` being the most significant.
    fn local_blocks(&self, qubits: &[usize]) -> Vec<Vec<usize>> {
        let masks: Vec<usize> = qubits.iter().map(|&q| self.bit(q)).collect();
        let all: usize = masks.iter().sum();
        let k = qubits.len();
        (0..self.dim())
            .filter(|base| base & all == 0)
            .map(|base| {
                (0..1usize << k)
                    .map(|l| {
                        masks.iter().enumerate().fold(base, |acc, (i, &m)| {
                            if (l >> (k - 1 - i)) & 1 == 1 {
                                acc | m
                            } else {
                                acc
                            }
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `L ρ L†` for an arbitrary local operator `L` (no unitarity check).
    fn sandwich(&self, local: &CMatrix, qubits: &[usize]) -> CMatrix {
        let blocks = self.local_blocks(qubits);
        let d = local.nrows();
        let dim = self.dim();
        let mut left = CMatrix::zeros(dim, dim);
        let mut buf = vec![Complex64::default(); d];
        for col in 0..dim {
            for idx in &blocks {
                for (a, slot) in buf.iter_mut().enumerate() {
                    *slot = (0..d).map(|b| local[(a, b)] * self.m[(idx[b], col)]).sum();
                }
                for (a, &v) in buf.iter().enumerate() {
                    left[(idx[a], col)] = v;
                }
            }
        }
        let mut out = CMatrix::zeros(dim, dim);
        for row in 0..dim {
            for idx in &blocks {
                for (a, slot) in buf.iter_mut().enumerate() {
                    *slot = (0..d)
                        .map(|b| left[(row, idx[b])] * local[(a, b)].conj())
                        .sum();
                }
                for (a, &v) in buf.iter().enumerate() {
                    out[(row, idx[a])] = v;
                }
            }
        }
        out
    }

    fn check_local(&self, u: &CMatrix, qubits: &[usize]) -> Result<()> {
        self.check_qubits(qubits)?;
        let d = 1usize << qubits.len();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::InvalidMatrix(format!(
                "{}x{} operator on {} qubits",
                u.nrows(),
                u.ncols(),
                qubits.len()
            )));
        }
        Ok(())
    }

    /// `U ρ U†`; rejects `U` whose deviation from unitarity exceeds 1e-10.
    pub fn apply_unitary(&self, u: &CMatrix, qubits: &[usize]) -> Result<Self> {
        self.check_local(u, qubits)?;
        let dev = max_abs(&(u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())));
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            width: self.width,
            m: self.sandwich(u, qubits),
        })
    }

    pub fn apply_clifford(&self, op: CliffordOp) -> Result<Self> {
        match op {
            CliffordOp::Single { gate, qubit } => {
                self.apply_unitary(&clifford_matrix(gate), &[qubit])
            }
            CliffordOp::Cnot { control, target } => self.permute_cnot(control, target),
        }
    }

    /// CNOT is a basis permutation, so conjugation just permutes entries.
    fn permute_cnot(&self, control: usize, target: usize) -> Result<Self> {
        self.check_qubits(&[control, target])?;
        let (c, t) = (self.bit(control), self.bit(target));
        let perm = |i: usize| if i & c != 0 { i ^ t } else { i };
        let dim = self.dim();
        Ok(Self {
            width: self.width,
            m: CMatrix::from_fn(dim, dim, |i, j| self.m[(perm(i), perm(j))]),
        })
    }

    pub fn apply_gate(&self, gate: Clifford1, qubit: usize) -> Result<Self> {
        self.apply_clifford(CliffordOp::Single { gate, qubit })
    }

    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Self> {
        self.apply_clifford(CliffordOp::Cnot { control, target })
    }

    pub fn apply_t(&self, qubit: usize) -> Result<Self> {
        self.apply_unitary(&t_matrix(), &[qubit])
    }

    /// `Σ_k K_k ρ K_k†`; rejects sets with `‖Σ K†K − I‖_max > 1e-10`.
    pub fn apply_channel(&self, kraus: &[CMatrix], qubits: &[usize]) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::NotTracePreserving(1.0));
        }
        for k in kraus {
            self.check_local(k, qubits)?;
        }
        let dev = completeness_deviation(kraus);
        if dev > UNITARY_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let dim = self.dim();
        let m = kraus.iter().fold(CMatrix::zeros(dim, dim), |acc, k| {
            acc + self.sandwich(k, qubits)
        });
        Ok(Self {
            width: self.width,
            m,
        })
    }

    pub fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        self.check_qubits(&[qubit])?;
        let mask = self.bit(qubit);
        let want = if bit == 0 { 0 } else { mask };
        let p: f64 = (0..self.dim())
            .filter(|i| i & mask == want)
            .map(|i| self.m[(i, i)].re)
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Conditions on `bit` and removes the measured qubit.
    pub fn measure_branch(&self, qubit: usize, bit: u8) -> Result<MeasurementOutcome<Self>> {
        let probability = self.probability(qubit, bit)?;
        if probability < MIN_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                qubit,
                bit,
                probability,
            });
        }
        let mask = self.bit(qubit);
        let want = if bit == 0 { 0 } else { mask };
        let low = mask - 1;
        let squeeze = |i: usize| ((i >> 1) & !low) | (i & low);
        let half = self.dim() / 2;
        let mut m = CMatrix::zeros(half, half);
        let idx: Vec<usize> = (0..self.dim()).filter(|i| i & mask == want).collect();
        for &r in &idx {
            for &col in &idx {
                m[(squeeze(r), squeeze(col))] = self.m[(r, col)] / probability;
            }
        }
        Ok(MeasurementOutcome {
            bit,
            probability,
            post_state: Self {
                width: self.width - 1,
                m,
            },
        })
    }

    /// Reduced state on `keep`, ordered by qubit index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        self.check_qubits(&keep)?;
        let kept_mask: usize = keep.iter().map(|&q| self.bit(q)).sum();
        let compress = |i: usize| {
            keep.iter().fold(0usize, |acc, &q| {
                (acc << 1) | ((i & self.bit(q) != 0) as usize)
            })
        };
        let dim_out = 1usize << keep.len();
        let mut m = CMatrix::zeros(dim_out, dim_out);
        let dim = self.dim();
        let reduced: Vec<usize> = (0..dim).map(compress).collect();
        for col in 0..dim {
            for row in 0..dim {
                if (row ^ col) & !kept_mask == 0 {
                    m[(reduced[row], reduced[col])] += self.m[(row, col)];
                }
            }
        }
        Ok(Self {
            width: keep.len(),
            m,
        })
    }

    /// `½‖ρ − σ‖₁` from the eigenvalues of the Hermitian difference.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.width != other.width {
            return Err(Error::LengthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        let diff = &self.m - &other.m;
        let diff = (&diff + diff.adjoint()) * c(0.5, 0.0);
        let eig = SymmetricEigen::new(diff);
        Ok(eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>() / 2.0)
    }

    /// Frobenius-norm distance `‖ρ − σ‖₂`.
    pub fn hs_distance(&self, other: &Self) -> Result<f64> {
        if self.width != other.width {
            return Err(Error::LengthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok((&self.m - &other.m).norm())
    }

    /// Weighted convex mixture.
    pub fn mixture(parts: &[(f64, Self)]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Integrity("empty mixture".into()));
        };
        let width = first.1.width;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let dim = first.1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, s) in parts {
            if s.width != width {
                return Err(Error::LengthMismatch {
                    left: s.width,
                    right: width,
                });
            }
            m += &s.m * c(w / total, 0.0);
        }
        Ok(Self { width, m })
    }

    /// Expands `2^{-q} Σ c_P P` entry by entry using `P|x⟩ = phase(x)|x ⊕ xmask⟩`.
    pub fn from_pauli_sum(s: &PauliSumState) -> Result<Self> {
        let width = s.width();
        check_width(width)?;
        let dim = 1usize << width;
        let norm = 1.0 / dim as f64;
        let mut m = CMatrix::zeros(dim, dim);
        for (letters, coeff) in s.terms() {
            let mut xmask = 0usize;
            for (q, &l) in letters.iter().enumerate() {
                if matches!(l, Pauli::X | Pauli::Y) {
                    xmask |= 1 << (width - 1 - q);
                }
            }
            for x in 0..dim {
                let mut phase = c(coeff * norm, 0.0);
                for (q, &l) in letters.iter().enumerate() {
                    let b = (x >> (width - 1 - q)) & 1;
                    match (l, b) {
                        (Pauli::Z, 1) => phase = -phase,
                        (Pauli::Y, 0) => phase *= c(0.0, 1.0),
                        (Pauli::Y, _) => phase *= c(0.0, -1.0),
                        _ => {}
                    }
                }
                m[(x ^ xmask, x)] += phase;
            }
        }
        Ok(Self { width, m })
    }

    /// `c_P = tr(P ρ)` for every Pauli string, one Walsh–Hadamard transform
    /// per X-mask: `c_{x,z} = i^{|x∧z|} Σ_y (−1)^{z·y} ρ[y, y⊕x]`.
    pub fn to_pauli_sum(&self) -> PauliSumState {
        let width = self.width;
        let dim = self.dim();
        let mut terms = Vec::new();
        for xmask in 0..dim {
            let mut v: Vec<Complex64> = (0..dim).map(|y| self.m[(y, y ^ xmask)]).collect();
            let mut h = 1;
            while h < dim {
                for i in (0..dim).step_by(2 * h) {
                    for j in i..i + h {
                        let (a, b) = (v[j], v[j + h]);
                        v[j] = a + b;
                        v[j + h] = a - b;
                    }
                }
                h *= 2;
            }
            for (zmask, &val) in v.iter().enumerate() {
                let ys = (xmask & zmask).count_ones();
                let value = match ys % 4 {
                    0 => val.re,
                    1 => -val.im,
                    2 => -val.re,
                    _ => val.im,
                };
                if value.abs() < PRUNE && (xmask | zmask) != 0 {
                    continue;
                }
                let letters = (0..width)
                    .map(|q| {
                        let bit = 1 << (width - 1 - q);
                        Pauli::from_bits(xmask & bit != 0, zmask & bit != 0)
                    })
                    .collect();
                terms.push((PauliString::new(Phase::ONE, letters), value));
            }
        }
        // Identity coefficient is tr(ρ); states are normalized upstream.
        let trace = self.trace().re;
        let scaled = terms.into_iter().map(|(p, v)| {
            let v = if p.is_identity() { 1.0 } else { v / trace };
            (p, v)
        });
        PauliSumState::from_terms(width, scaled).expect("coefficients of a unit-trace operator")
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        (self.width == 1).then(|| {
            let off = self.m[(1, 0)];
            [
                2.0 * off.re,
                2.0 * off.im,
                (self.m[(0, 0)] - self.m[(1, 1)]).re,
            ]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn maximally_mixed_is_diagonal() {
        let d = DenseOperator::from_pauli_sum(&PauliSumState::maximally_mixed(1)).unwrap();
        assert_eq!(d.matrix()[(0, 0)], c(0.5, 0.0));
        assert_eq!(d.matrix()[(1, 1)], c(0.5, 0.0));
        assert_eq!(d.matrix()[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn magic_state_entries() {
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        let d = DenseOperator::from_pauli_sum(&tau).unwrap();
        // (X + Y)/(2√2) has ⟨0|·|1⟩ = (1 − i)/(2√2), ⟨1|·|0⟩ = (1 + i)/(2√2).
        let k = 1.0 / (2.0 * 2f64.sqrt());
        assert!((d.matrix()[(1, 0)] - c(k, k)).norm() < 1e-15);
        assert!((d.matrix()[(0, 1)] - c(k, -k)).norm() < 1e-15);
        assert_eq!(d, DenseOperator::qubit_state(R, R, 0.0).unwrap());
    }

    #[test]
    fn t_gate() {
        let zero = DenseOperator::basis_state(&[0]).unwrap();
        assert_eq!(zero.apply_t(0).unwrap(), zero);
        let tau = DenseOperator::qubit_state(R, R, 0.0).unwrap();
        let b = tau.apply_t(0).unwrap().bloch().unwrap();
        assert!(b[0].abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12 && b[2].abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let d = DenseOperator::maximally_mixed(1).unwrap();
        let bad =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            d.apply_unitary(&bad, &[0]),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn channels() {
        let tau = DenseOperator::qubit_state(R, R, 0.0).unwrap();
        let id = tau.apply_channel(&[CMatrix::identity(2, 2)], &[0]).unwrap();
        assert_eq!(id, tau);
        let dephase = [
            CMatrix::identity(2, 2) * c(R, 0.0),
            pauli_matrix(Pauli::Z) * c(R, 0.0),
        ];
        let out = tau.apply_channel(&dephase, &[0]).unwrap();
        for v in out.bloch().unwrap() {
            assert!(v.abs() < 1e-15);
        }
        let lossy = [CMatrix::identity(2, 2) * c(0.5, 0.0)];
        assert!(matches!(
            tau.apply_channel(&lossy, &[0]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn trace_distances() {
        let zero = DenseOperator::basis_state(&[0]).unwrap();
        let one = DenseOperator::basis_state(&[1]).unwrap();
        assert!(zero.trace_distance(&zero).unwrap() < 1e-15);
        assert!((zero.trace_distance(&one).unwrap() - 1.0).abs() < 1e-12);
        let tau = DenseOperator::qubit_state(R, R, 0.0).unwrap();
        let mixed = DenseOperator::maximally_mixed(1).unwrap();
        assert!((tau.trace_distance(&mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn width_cap() {
        assert!(matches!(
            DenseOperator::maximally_mixed(13),
            Err(Error::WidthCap { width: 13, cap: 12 })
        ));
    }

    #[test]
    fn measurement_and_partial_trace() {
        let s = DenseOperator::basis_state(&[1, 0, 1]).unwrap();
        assert_eq!(s.probability(0, 1).unwrap(), 1.0);
        let o = s.measure_branch(1, 0).unwrap();
        assert_eq!(o.post_state, DenseOperator::basis_state(&[1, 1]).unwrap());
        let r = s.partial_trace(&[2, 0]).unwrap();
        assert_eq!(r, DenseOperator::basis_state(&[1, 1]).unwrap());
    }

    #[test]
    fn pauli_string_matrices_are_kronecker_products() {
        let p: PauliString = "-XZ".parse().unwrap();
        let m = pauli_string_matrix(&p);
        let expected = pauli_matrix(Pauli::X).kronecker(&pauli_matrix(Pauli::Z)) * c(-1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn cnot_permutation_matches_matrix_conjugation() {
        let mut rho = DenseOperator::qubit_state(0.3, -0.2, 0.4).unwrap();
        for (a, b, cz) in [(0.1, 0.5, -0.6), (-0.7, 0.0, 0.1)] {
            rho = rho
                .tensor(&DenseOperator::qubit_state(a, b, cz).unwrap())
                .unwrap();
        }
        let rho = rho
            .apply_gate(Clifford1::H, 1)
            .unwrap()
            .apply_gate(Clifford1::S, 1)
            .unwrap();
        for (ctl, tgt) in [(0, 1), (1, 0), (2, 0), (0, 2), (1, 2), (2, 1)] {
            let fast = rho.apply_cnot(ctl, tgt).unwrap();
            let slow = rho.apply_unitary(&cnot_matrix(), &[ctl, tgt]).unwrap();
            assert!(max_abs(&(fast.matrix() - slow.matrix())) < 1e-15);
        }
        assert!(matches!(
            rho.apply_cnot(1, 1),
            Err(Error::IndexCollision(1))
        ));
    }
}
