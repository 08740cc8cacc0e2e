use proptest::prelude::*;
use qss_core::dense::{max_abs, DenseOperator};
use qss_core::pauli::{Clifford1, CliffordOp, Pauli, PauliString, Phase};
use qss_core::protocol::{deal, decode, DealerConfig};
use qss_core::serialize;
use qss_core::sparse::PauliSumState;

fn letters(width: usize) -> impl Strategy<Value = Vec<Pauli>> {
    proptest::collection::vec(prop::sample::select(Pauli::ALL.to_vec()), width)
}

fn op(width: usize) -> impl Strategy<Value = CliffordOp> {
    let single = (prop::sample::select(Clifford1::ALL.to_vec()), 0..width)
        .prop_map(|(gate, qubit)| CliffordOp::Single { gate, qubit });
    let cnot = (0..width, 1..width).prop_map(move |(c, d)| CliffordOp::Cnot {
        control: c,
        target: (c + d) % width,
    });
    prop_oneof![single, cnot]
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| {
        let n = (a * a + b * b + c * c).sqrt().max(1.0);
        [a / n, b / n, c / n]
    })
}

proptest! {
    #[test]
    fn conjugation_matches_matrices(l in letters(3), o in op(3)) {
        let p = PauliString::new(Phase::ONE, l);
        prop_assume!(!p.is_identity());
        let image = o.conjugate(&p).unwrap();
        prop_assert!(image.phase().is_real());
        // (I + 0.3 P)/8 is a valid state, so the dense oracle can conjugate it.
        let s = PauliSumState::from_terms(3, [(PauliString::identity(3), 1.0), (p.clone(), 0.3)]).unwrap();
        let direct = DenseOperator::from_pauli_sum(&s).unwrap().apply_clifford(o).unwrap();
        let want = PauliSumState::from_terms(3, [(PauliString::identity(3), 1.0), (image.clone(), 0.3)]).unwrap();
        let lifted = DenseOperator::from_pauli_sum(&want).unwrap();
        prop_assert!(max_abs(&(lifted.matrix() - direct.matrix())) < 1e-12);
        // Conjugation preserves commutation with other strings.
        for other in ["XYZ", "ZZX", "IYI"] {
            let q: PauliString = other.parse().unwrap();
            prop_assert_eq!(
                p.commutes(&q).unwrap(),
                image.commutes(&o.conjugate(&q).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn conjugation_is_injective(a in letters(3), b in letters(3), o in op(3)) {
        let pa = PauliString::new(Phase::ONE, a.clone());
        let pb = PauliString::new(Phase::ONE, b.clone());
        let (ia, ib) = (o.conjugate(&pa).unwrap(), o.conjugate(&pb).unwrap());
        prop_assert_eq!(a == b, ia.letters() == ib.letters());
    }

    #[test]
    fn sparse_clifford_matches_dense(v in bloch(), w in bloch(), o in op(2)) {
        let s = PauliSumState::qubit_state(v[0], v[1], v[2]).unwrap()
            .tensor(&PauliSumState::qubit_state(w[0], w[1], w[2]).unwrap());
        let d = DenseOperator::from_pauli_sum(&s).unwrap();
        let lifted = DenseOperator::from_pauli_sum(&s.apply_clifford(o).unwrap()).unwrap();
        let direct = d.apply_clifford(o).unwrap();
        prop_assert!(max_abs(&(lifted.matrix() - direct.matrix())) < 1e-12);
    }

    #[test]
    fn deal_decode_round_trip(v in bloch(), parties in 2usize..7, magic in 0usize..2) {
        let secret = PauliSumState::qubit_state(v[0], v[1], v[2]).unwrap();
        let shared = deal(&secret, &DealerConfig::new(1, magic, parties).unwrap()).unwrap();
        prop_assert_eq!(decode(&shared).unwrap(), secret);
    }

    #[test]
    fn serialization_round_trip(v in bloch(), magic in 0usize..2) {
        let secret = PauliSumState::qubit_state(v[0], v[1], v[2]).unwrap();
        let shared = deal(&secret, &DealerConfig::new(1, magic, 5).unwrap()).unwrap();
        let back = serialize::from_json(&serialize::to_json(&shared).unwrap()).unwrap();
        prop_assert_eq!(&back.state, &shared.state);
        prop_assert_eq!(&back.layout, &shared.layout);
        let text = serialize::format_coefficients(&secret);
        prop_assert_eq!(serialize::parse_coefficients(&text, 1).unwrap(), secret);
    }
}
