//! Sparse Pauli-basis density operators.
//!
//! A state on `q` qubits is stored as `ρ = 2^{-q} Σ_P c_P P` with real
//! coefficients keyed by unsigned Pauli strings. The identity coefficient is
//! always exactly 1 and entries with `|c_P| < PRUNE` are never stored.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Clifford1, CliffordOp, Pauli, PauliString, Phase};

/// Coefficients below this magnitude are dropped.
pub const PRUNE: f64 = 1e-12;

/// Probabilities below this are treated as impossible outcomes.
pub const MIN_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliSumState {
    width: usize,
    terms: BTreeMap<Vec<Pauli>, f64>,
}

/// Result of a computational-basis measurement; the measured qubit is removed
/// from `post_state`.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome<S> {
    pub bit: u8,
    pub probability: f64,
    pub post_state: S,
}

impl PauliSumState {
    /// `I / 2^width`.
    pub fn maximally_mixed(width: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![Pauli::I; width], 1.0);
        Self { width, terms }
    }

    /// The zero-qubit state (scalar 1).
    pub fn unit() -> Self {
        Self::maximally_mixed(0)
    }

    /// `(I + aX + bY + cZ) / 2`.
    pub fn qubit_state(a: f64, b: f64, c: f64) -> Result<Self> {
        let norm = (a * a + b * b + c * c).sqrt();
        if norm * norm > 1.0 + 1e-12 || !norm.is_finite() {
            return Err(Error::Unphysical(norm));
        }
        let mut s = Self::maximally_mixed(1);
        for (letter, v) in [(Pauli::X, a), (Pauli::Y, b), (Pauli::Z, c)] {
            s.add(vec![letter], v);
        }
        Ok(s.pruned())
    }

    /// Builds a state from signed strings; real phases are folded into the
    /// coefficient, repeated strings accumulate. The identity coefficient must
    /// come out as 1.
    pub fn from_terms<I>(width: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut out = Self {
            width,
            terms: BTreeMap::new(),
        };
        for (p, c) in terms {
            if p.len() != width {
                return Err(Error::LengthMismatch {
                    left: p.len(),
                    right: width,
                });
            }
            let (phase, letters) = p.into_parts();
            let sign = phase
                .sign()
                .ok_or_else(|| Error::InvalidPauli(format!("non-Hermitian phase {phase}")))?;
            out.add(letters, sign * c);
        }
        let id = out.coefficient(&vec![Pauli::I; width]);
        if (id - 1.0).abs() > 1e-12 {
            return Err(Error::Integrity(format!(
                "identity coefficient is {id}, expected 1"
            )));
        }
        out.terms.insert(vec![Pauli::I; width], 1.0);
        Ok(out.pruned())
    }

    fn add(&mut self, key: Vec<Pauli>, value: f64) {
        *self.terms.entry(key).or_insert(0.0) += value;
    }

    fn pruned(mut self) -> Self {
        let id = vec![Pauli::I; self.width];
        self.terms.retain(|k, v| *k == id || v.abs() >= PRUNE);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored terms, identity included.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, letters: &[Pauli]) -> f64 {
        self.terms.get(letters).copied().unwrap_or(0.0)
    }

    pub fn coefficient_of(&self, p: &PauliString) -> f64 {
        let sign = p.phase().sign().unwrap_or(0.0);
        sign * self.coefficient(p.letters())
    }

    /// Terms in lexicographic order of their letters.
    pub fn terms(&self) -> impl Iterator<Item = (&[Pauli], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Terms other than the identity.
    pub fn nontrivial_terms(&self) -> impl Iterator<Item = (&[Pauli], f64)> {
        self.terms()
            .filter(|(k, _)| k.iter().any(|&p| p != Pauli::I))
    }

    /// `Σ_P c_P²`; equals `2^q tr(ρ²)`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn max_abs_nontrivial(&self) -> f64 {
        self.nontrivial_terms()
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut key = a.clone();
                key.extend_from_slice(b);
                terms.insert(key, ca * cb);
            }
        }
        Self {
            width: self.width + other.width,
            terms,
        }
        .pruned()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.width {
            return Err(Error::QubitOutOfRange {
                index: q,
                width: self.width,
            });
        }
        Ok(())
    }

    /// Conjugates every term by the gate. Clifford conjugation permutes
    /// strings up to sign, so the term count is unchanged.
    pub fn apply_clifford(&self, op: CliffordOp) -> Result<Self> {
        for q in op.qubits() {
            self.check_qubit(q)?;
        }
        let mut terms = BTreeMap::new();
        for (k, &c) in &self.terms {
            let image = op.conjugate(&PauliString::new(Phase::ONE, k.clone()))?;
            let (phase, letters) = image.into_parts();
            let sign = phase
                .sign()
                .expect("Clifford conjugation of a Hermitian string stays Hermitian");
            terms.insert(letters, sign * c);
        }
        Ok(Self {
            width: self.width,
            terms,
        })
    }

    pub fn apply_gate(&self, gate: Clifford1, qubit: usize) -> Result<Self> {
        self.apply_clifford(CliffordOp::Single { gate, qubit })
    }

    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Self> {
        self.apply_clifford(CliffordOp::Cnot { control, target })
    }

    /// Convex mixture `Σ w_i ρ_i / Σ w_i`.
    pub fn mixture(parts: &[(f64, Self)]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Integrity("empty mixture".into()));
        };
        let width = first.1.width;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let mut terms: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for (w, s) in parts {
            if s.width != width {
                return Err(Error::LengthMismatch {
                    left: s.width,
                    right: width,
                });
            }
            for (k, &c) in &s.terms {
                *terms.entry(k.clone()).or_insert(0.0) += w * c / total;
            }
        }
        terms.insert(vec![Pauli::I; width], 1.0);
        Ok(Self { width, terms }.pruned())
    }

    /// Probability of reading `bit` when measuring `qubit` in the Z basis:
    /// `(1 + (−1)^bit c_{Z@qubit}) / 2`.
    pub fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let z = PauliString::single(self.width, qubit, Pauli::Z);
        let cz = self.coefficient(z.letters());
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        Ok(((1.0 + sign * cz) / 2.0).clamp(0.0, 1.0))
    }

    /// Conditions on outcome `bit` and removes the measured qubit.
    pub fn measure_branch(&self, qubit: usize, bit: u8) -> Result<MeasurementOutcome<Self>> {
        let probability = self.probability(qubit, bit)?;
        if probability < MIN_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                qubit,
                bit,
                probability,
            });
        }
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        let mut terms: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for (k, &c) in &self.terms {
            let factor = match k[qubit] {
                Pauli::I => 1.0,
                Pauli::Z => sign,
                Pauli::X | Pauli::Y => continue,
            };
            let mut rest = k.clone();
            rest.remove(qubit);
            *terms.entry(rest).or_insert(0.0) += factor * c;
        }
        for v in terms.values_mut() {
            *v /= 2.0 * probability;
        }
        let width = self.width - 1;
        terms.insert(vec![Pauli::I; width], 1.0);
        Ok(MeasurementOutcome {
            bit,
            probability,
            post_state: Self { width, terms }.pruned(),
        })
    }

    /// Both outcomes that have non-negligible probability.
    pub fn measure_both(&self, qubit: usize) -> Result<Vec<MeasurementOutcome<Self>>> {
        let mut out = Vec::with_capacity(2);
        for bit in [0, 1] {
            if self.probability(qubit, bit)? >= MIN_PROBABILITY {
                out.push(self.measure_branch(qubit, bit)?);
            }
        }
        Ok(out)
    }

    pub fn measure_sample<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<Self>> {
        let p0 = self.probability(qubit, 0)?;
        let bit = if rng.random::<f64>() < p0 { 0 } else { 1 };
        self.measure_branch(qubit, bit)
    }

    /// Reduced state on `keep` (sorted, deduplicated). Terms that are not the
    /// identity outside `keep` are traceless there and vanish.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &q in &keep {
            self.check_qubit(q)?;
        }
        let mut inside = vec![false; self.width];
        for &q in &keep {
            inside[q] = true;
        }
        let mut terms = BTreeMap::new();
        for (k, &c) in &self.terms {
            let traced_trivially = k
                .iter()
                .zip(&inside)
                .all(|(&p, &kept)| kept || p == Pauli::I);
            if traced_trivially {
                terms.insert(keep.iter().map(|&q| k[q]).collect::<Vec<_>>(), c);
            }
        }
        Ok(Self {
            width: keep.len(),
            terms,
        })
    }

    /// Normalized Hilbert–Schmidt distance `‖ρ − σ‖₂ = 2^{-q/2} ‖c − c′‖₂`.
    pub fn hs_distance(&self, other: &Self) -> Result<f64> {
        if self.width != other.width {
            return Err(Error::LengthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        let mut sum = 0.0;
        for (k, &c) in &self.terms {
            let d = c - other.coefficient(k);
            sum += d * d;
        }
        for (k, &c) in &other.terms {
            if !self.terms.contains_key(k) {
                sum += c * c;
            }
        }
        Ok(sum.sqrt() * 2f64.powf(-(self.width as f64) / 2.0))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coefficient_deviation(&self, other: &Self) -> Result<f64> {
        if self.width != other.width {
            return Err(Error::LengthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        let a = self
            .terms
            .iter()
            .map(|(k, &c)| (c - other.coefficient(k)).abs());
        let b = other
            .terms
            .iter()
            .map(|(k, &c)| (c - self.coefficient(k)).abs());
        Ok(a.chain(b).fold(0.0, f64::max))
    }

    /// Bloch vector `(c_X, c_Y, c_Z)` of a single-qubit state.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        (self.width == 1).then(|| {
            [
                self.coefficient(&[Pauli::X]),
                self.coefficient(&[Pauli::Y]),
                self.coefficient(&[Pauli::Z]),
            ]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn letters(s: &str) -> Vec<Pauli> {
        s.parse::<PauliString>().unwrap().letters().to_vec()
    }

    #[test]
    fn qubit_states() {
        let mixed = PauliSumState::qubit_state(0.0, 0.0, 0.0).unwrap();
        assert_eq!(mixed.len(), 1);
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        assert_eq!(tau.bloch().unwrap(), [R, R, 0.0]);
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        assert_eq!(zero.coefficient(&[Pauli::Z]), 1.0);
        assert!(matches!(
            PauliSumState::qubit_state(1.0, 1.0, 0.0),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn tensor_products() {
        let m = PauliSumState::maximally_mixed(1);
        let mm = m.tensor(&m);
        assert_eq!(mm.len(), 1);
        assert_eq!(mm.width(), 2);
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        let tt = tau.tensor(&tau);
        assert_eq!(tt.len(), 9);
        assert!((tt.coefficient(&letters("XY")) - 0.5).abs() < 1e-15);
        assert!((tt.coefficient(&letters("IX")) - R).abs() < 1e-15);
    }

    #[test]
    fn clifford_application() {
        let m = PauliSumState::maximally_mixed(1);
        assert_eq!(m.apply_gate(Clifford1::H, 0).unwrap(), m);
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        let s_tau = tau.apply_gate(Clifford1::S, 0).unwrap();
        assert_eq!(s_tau.bloch().unwrap(), [-R, R, 0.0]);
        let two = PauliSumState::from_terms(
            2,
            [("II".parse().unwrap(), 1.0), ("XI".parse().unwrap(), 0.5)],
        )
        .unwrap();
        let out = two.apply_cnot(0, 1).unwrap();
        assert_eq!(out.coefficient(&letters("XX")), 0.5);
        assert!(two.apply_cnot(0, 2).is_err());
    }

    #[test]
    fn measurement() {
        let m = PauliSumState::maximally_mixed(1);
        for bit in [0, 1] {
            let o = m.measure_branch(0, bit).unwrap();
            assert_eq!(o.probability, 0.5);
            assert_eq!(o.post_state, PauliSumState::unit());
        }
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        assert_eq!(zero.probability(0, 0).unwrap(), 1.0);
        assert_eq!(zero.probability(0, 1).unwrap(), 0.0);
        assert!(matches!(
            zero.measure_branch(0, 1),
            Err(Error::ImpossibleOutcome { .. })
        ));
        assert_eq!(zero.measure_both(0).unwrap().len(), 1);
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        assert_eq!(tau.probability(0, 0).unwrap(), 0.5);
        assert_eq!(tau.probability(0, 1).unwrap(), 0.5);
    }

    #[test]
    fn measurement_conditions_correlations() {
        // (II + ZZ)/4: outcomes perfectly correlated.
        let s = PauliSumState::from_terms(
            2,
            [("II".parse().unwrap(), 1.0), ("ZZ".parse().unwrap(), 1.0)],
        )
        .unwrap();
        let o = s.measure_branch(0, 1).unwrap();
        assert_eq!(o.probability, 0.5);
        assert_eq!(o.post_state.bloch().unwrap(), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn partial_traces() {
        let s = PauliSumState::from_terms(
            3,
            [
                ("III".parse().unwrap(), 1.0),
                ("XXX".parse().unwrap(), 0.5),
                ("ZIZ".parse().unwrap(), 0.25),
            ],
        )
        .unwrap();
        let r = s.partial_trace(&[2, 0]).unwrap();
        assert_eq!(r.width(), 2);
        assert_eq!(r.coefficient(&letters("ZZ")), 0.25);
        assert_eq!(r.coefficient(&letters("XX")), 0.0);
        assert_eq!(s.partial_trace(&[0, 1, 2]).unwrap(), s);
        assert_eq!(s.partial_trace(&[1]).unwrap().len(), 1);
    }

    #[test]
    fn hs_distances() {
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let one = PauliSumState::qubit_state(0.0, 0.0, -1.0).unwrap();
        assert_eq!(zero.hs_distance(&zero).unwrap(), 0.0);
        assert!((zero.hs_distance(&one).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let tau = PauliSumState::qubit_state(R, R, 0.0).unwrap();
        let mixed = PauliSumState::maximally_mixed(1);
        assert!((tau.hs_distance(&mixed).unwrap() - R).abs() < 1e-15);
        assert!(tau.hs_distance(&PauliSumState::maximally_mixed(2)).is_err());
    }

    #[test]
    fn mixtures() {
        let zero = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let one = PauliSumState::qubit_state(0.0, 0.0, -1.0).unwrap();
        let mix = PauliSumState::mixture(&[(0.5, zero), (0.5, one)]).unwrap();
        assert_eq!(mix, PauliSumState::maximally_mixed(1));
    }
}
