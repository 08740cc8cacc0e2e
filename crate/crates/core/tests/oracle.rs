//! Pauli conjugation rules checked against explicit matrices for every gate
//! and every input letter or letter pair.

use num_complex::Complex64;
use qss_core::dense::{
    clifford_matrix, cnot_matrix, max_abs, pauli_string_matrix, t_matrix, CMatrix,
};
use qss_core::pauli::{
    conjugate_cnot, conjugate_gate, tgate_transfer, Clifford1, Pauli, PauliString, Phase,
};

fn string(letters: &[Pauli]) -> PauliString {
    PauliString::new(Phase::ONE, letters.to_vec())
}

fn close(a: &CMatrix, b: &CMatrix) -> bool {
    max_abs(&(a - b)) < 1e-12
}

#[test]
fn single_qubit_gates() {
    for gate in Clifford1::ALL {
        let u = clifford_matrix(gate);
        for letter in Pauli::ALL {
            let p = string(&[letter]);
            let want = &u * pauli_string_matrix(&p) * u.adjoint();
            let got = pauli_string_matrix(&conjugate_gate(gate, 0, &p).unwrap());
            assert!(close(&got, &want), "{gate} on {}", letter.as_char());
        }
    }
}

#[test]
fn cnot_both_orientations() {
    let u = cnot_matrix();
    let swap = {
        let mut m = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    let reversed = &swap * &u * &swap;
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let p = string(&[a, b]);
            let m = pauli_string_matrix(&p);
            let got = pauli_string_matrix(&conjugate_cnot(0, 1, &p).unwrap());
            assert!(close(&got, &(&u * &m * u.adjoint())));
            let got = pauli_string_matrix(&conjugate_cnot(1, 0, &p).unwrap());
            assert!(close(&got, &(&reversed * &m * reversed.adjoint())));
        }
    }
}

#[test]
fn t_transfer() {
    let t = t_matrix();
    for letter in Pauli::ALL {
        let want = &t * pauli_string_matrix(&string(&[letter])) * t.adjoint();
        let got = tgate_transfer(letter)
            .into_iter()
            .fold(CMatrix::zeros(2, 2), |acc, (w, l)| {
                acc + pauli_string_matrix(&string(&[l])) * Complex64::new(w, 0.0)
            });
        assert!(close(&got, &want), "T on {}", letter.as_char());
    }
}
