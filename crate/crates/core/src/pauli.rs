//! Signed Pauli strings and their conjugation by the Clifford gates used in
//! the sharing and evaluation protocols.
//!
//! Letters are ordered left to right by qubit index, so `"XZ"` is `X` on
//! qubit 0 and `Z` on qubit 1. Conjugation always means `g P g†`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Symplectic bits `(x, z)` with `Y = i·X·Z`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Product `self · other` as a phase and a letter.
    pub fn times(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A power of `i`: one of `+1, +i, −1, −i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u8) -> Phase {
        Phase(k % 4)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `±1.0` for real phases, `None` for `±i`.
    pub fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn negate(self) -> Phase {
        self * Phase::MINUS_ONE
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

/// Tensor product of Pauli letters with a phase in `{±1, ±i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Pauli>) -> Self {
        Self { phase, letters }
    }

    pub fn identity(width: usize) -> Self {
        Self::new(Phase::ONE, vec![Pauli::I; width])
    }

    /// `letter` on `site`, identity elsewhere.
    pub fn single(width: usize, site: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; width];
        letters[site] = letter;
        Self::new(Phase::ONE, letters)
    }

    /// The same letter on every site, e.g. the replicated logical operators.
    pub fn replicated(letter: Pauli, width: usize) -> Self {
        Self::new(Phase::ONE, vec![letter; width])
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn into_parts(self) -> (Phase, Vec<Pauli>) {
        (self.phase, self.letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Group product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_len(self.len(), other.len())?;
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, c) = a.times(b);
                phase = phase * p;
                c
            })
            .collect();
        Ok(PauliString::new(phase, letters))
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_len(self.len(), other.len())?;
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|&(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        Ok(clashes % 2 == 0)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.len() {
            return Err(Error::QubitOutOfRange {
                index: site,
                width: self.len(),
            });
        }
        Ok(())
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != Phase::ONE {
            write!(f, "{}", self.phase)?;
        }
        for p in &self.letters {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Parses literals such as `"XXIXZ"`, `"-ZZ"`, `"+iY"`.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(rest) = t.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = t.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = t.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = t.strip_prefix('i') {
            (Phase::I, rest)
        } else {
            (Phase::ONE, t)
        };
        let letters = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::new(phase, letters))
    }
}

/// Single-qubit Clifford gates appearing in circuits and in the parity
/// correction.
///
/// `SX` is the matrix product `S·X`: `X` acts first, then `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clifford1 {
    H,
    S,
    X,
    Y,
    Z,
    SX,
}

impl Clifford1 {
    pub const ALL: [Clifford1; 6] = [
        Clifford1::H,
        Clifford1::S,
        Clifford1::X,
        Clifford1::Y,
        Clifford1::Z,
        Clifford1::SX,
    ];

    /// Images of `X` and `Z` under `g · g†`, as (negated?, letter).
    fn generator_images(self) -> ((bool, Pauli), (bool, Pauli)) {
        use Pauli as P;
        match self {
            Clifford1::H => ((false, P::Z), (false, P::X)),
            Clifford1::S => ((false, P::Y), (false, P::Z)),
            Clifford1::X => ((false, P::X), (true, P::Z)),
            Clifford1::Y => ((true, P::X), (true, P::Z)),
            Clifford1::Z => ((true, P::X), (false, P::Z)),
            Clifford1::SX => ((false, P::Y), (true, P::Z)),
        }
    }

    /// `g L g†` for a single letter.
    pub fn image(self, letter: Pauli) -> (Phase, Pauli) {
        let ((neg_x, img_x), (neg_z, img_z)) = self.generator_images();
        let sign = |neg: bool| if neg { Phase::MINUS_ONE } else { Phase::ONE };
        match letter {
            Pauli::I => (Phase::ONE, Pauli::I),
            Pauli::X => (sign(neg_x), img_x),
            Pauli::Z => (sign(neg_z), img_z),
            // Y = i·X·Z
            Pauli::Y => {
                let (p, l) = img_x.times(img_z);
                (Phase::I * sign(neg_x) * sign(neg_z) * p, l)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Clifford1::H => "H",
            Clifford1::S => "S",
            Clifford1::X => "X",
            Clifford1::Y => "Y",
            Clifford1::Z => "Z",
            Clifford1::SX => "SX",
        }
    }
}

impl FromStr for Clifford1 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(Clifford1::H),
            "S" => Ok(Clifford1::S),
            "X" => Ok(Clifford1::X),
            "Y" => Ok(Clifford1::Y),
            "Z" => Ok(Clifford1::Z),
            "SX" => Ok(Clifford1::SX),
            _ => Err(Error::UnknownGate(s.to_string())),
        }
    }
}

impl fmt::Display for Clifford1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Clifford gate placed on concrete qubits of a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordOp {
    Single { gate: Clifford1, qubit: usize },
    Cnot { control: usize, target: usize },
}

impl CliffordOp {
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        match *self {
            CliffordOp::Single { gate, qubit } => conjugate_gate(gate, qubit, p),
            CliffordOp::Cnot { control, target } => conjugate_cnot(control, target, p),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordOp::Single { qubit, .. } => vec![qubit],
            CliffordOp::Cnot { control, target } => vec![control, target],
        }
    }
}

/// `g P g†` for a single-qubit Clifford acting on `target`.
pub fn conjugate_gate(gate: Clifford1, target: usize, p: &PauliString) -> Result<PauliString> {
    p.check_site(target)?;
    let (phase, letter) = gate.image(p.letters[target]);
    let mut out = p.clone();
    out.letters[target] = letter;
    out.phase = out.phase * phase;
    Ok(out)
}

/// `CNOT P CNOT†` using `X_c → X_c X_t`, `Z_c → Z_c`, `X_t → X_t`,
/// `Z_t → Z_c Z_t`.
pub fn conjugate_cnot(control: usize, target: usize, p: &PauliString) -> Result<PauliString> {
    p.check_site(control)?;
    p.check_site(target)?;
    if control == target {
        return Err(Error::IndexCollision(control));
    }
    let (xc, zc) = p.letters[control].bits();
    let (xt, zt) = p.letters[target].bits();

    // Write the (control, target) pair as i^{xc·zc + xt·zt} X_c^xc Z_c^zc X_t^xt Z_t^zt
    // and multiply the generator images in that order.
    let mut phase = Phase::from_exponent((xc && zc) as u8 + (xt && zt) as u8);
    let (mut lc, mut lt) = (Pauli::I, Pauli::I);
    let mut push = |c: Pauli, t: Pauli| {
        let (p1, a) = lc.times(c);
        let (p2, b) = lt.times(t);
        phase = phase * p1 * p2;
        lc = a;
        lt = b;
    };
    if xc {
        push(Pauli::X, Pauli::X);
    }
    if zc {
        push(Pauli::Z, Pauli::I);
    }
    if xt {
        push(Pauli::I, Pauli::X);
    }
    if zt {
        push(Pauli::Z, Pauli::Z);
    }

    let mut out = p.clone();
    out.letters[control] = lc;
    out.letters[target] = lt;
    out.phase = out.phase * phase;
    Ok(out)
}

/// Real-linear expansion of `T L T†`. `T` is not Clifford, so the image is a
/// weighted sum rather than a single string.
pub fn tgate_transfer(letter: Pauli) -> Vec<(f64, Pauli)> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match letter {
        Pauli::I => vec![(1.0, Pauli::I)],
        Pauli::X => vec![(r, Pauli::X), (r, Pauli::Y)],
        Pauli::Y => vec![(-r, Pauli::X), (r, Pauli::Y)],
        Pauli::Z => vec![(1.0, Pauli::Z)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(ps("X").multiply(&ps("X")).unwrap(), ps("I"));
        assert_eq!(ps("X").multiply(&ps("Y")).unwrap(), ps("iZ"));
        assert_eq!(ps("XZ").multiply(&ps("YZ")).unwrap(), ps("iZI"));
        assert!(matches!(
            ps("X").multiply(&ps("XX")),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn commutation() {
        assert!(ps("X").commutes(&ps("X")).unwrap());
        assert!(!ps("X").commutes(&ps("Z")).unwrap());
        assert!(ps("XZ").commutes(&ps("ZX")).unwrap());
    }

    #[test]
    fn single_qubit_images() {
        assert_eq!(conjugate_gate(Clifford1::S, 0, &ps("X")).unwrap(), ps("Y"));
        assert_eq!(conjugate_gate(Clifford1::H, 0, &ps("Z")).unwrap(), ps("X"));
        assert_eq!(conjugate_gate(Clifford1::SX, 0, &ps("Y")).unwrap(), ps("X"));
        assert_eq!(conjugate_gate(Clifford1::SX, 0, &ps("X")).unwrap(), ps("Y"));
        assert_eq!(
            conjugate_gate(Clifford1::SX, 0, &ps("Z")).unwrap(),
            ps("-Z")
        );
        assert!("T".parse::<Clifford1>().is_err());
    }

    #[test]
    fn cnot_images() {
        assert_eq!(conjugate_cnot(0, 1, &ps("XI")).unwrap(), ps("XX"));
        assert_eq!(conjugate_cnot(0, 1, &ps("IZ")).unwrap(), ps("ZZ"));
        assert_eq!(conjugate_cnot(0, 1, &ps("II")).unwrap(), ps("II"));
        let yy = conjugate_cnot(0, 1, &ps("YY")).unwrap();
        assert_eq!(conjugate_cnot(1, 0, &yy).unwrap(), ps("-XZ"));
        assert!(matches!(
            conjugate_cnot(1, 1, &ps("XX")),
            Err(Error::IndexCollision(1))
        ));
        assert!(conjugate_cnot(0, 2, &ps("XX")).is_err());
    }

    #[test]
    fn literal_round_trip() {
        for s in ["XXIXZ", "-ZZ", "+iY", "-iXY", "I"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn t_transfer() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(tgate_transfer(Pauli::X), vec![(r, Pauli::X), (r, Pauli::Y)]);
        assert_eq!(tgate_transfer(Pauli::Z), vec![(1.0, Pauli::Z)]);
        assert_eq!(tgate_transfer(Pauli::I), vec![(1.0, Pauli::I)]);
    }
}
