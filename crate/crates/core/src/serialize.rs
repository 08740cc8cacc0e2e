//! Versioned JSON form of a shared state and the plain-text coefficient
//! format used for secrets.
//!
//! A shared state is written as
//!
//! ```json
//! {
//!   "format": "qss-shared-state",
//!   "version": 1,
//!   "secret_qubits": 1,
//!   "magic_total": 1,
//!   "magic_remaining": 1,
//!   "layout": { "total_rows": 2, "live_rows": [0, 1], "columns": 5, "party_of_column": [0, 1, 2, 3, 4] },
//!   "terms": [["IIIIIIIIII", 1.0], ["XIXIXIXIXI", 0.3]]
//! }
//! ```
//!
//! where each term is the Pauli coefficient `c_P` of `ρ = 2^{-q} Σ c_P P`,
//! with letters in register order (column-major). A literal may carry a
//! leading `-`, which negates its coefficient.
//!
//! A coefficient file holds one `literal coefficient` pair per line, `#`
//! starting a comment. The identity term may be omitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::protocol::{ShareLayout, SharedSecretState};
use crate::sparse::PauliSumState;

pub const FORMAT: &str = "qss-shared-state";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedStateDoc {
    pub format: String,
    pub version: u32,
    pub secret_qubits: usize,
    pub magic_total: usize,
    pub magic_remaining: usize,
    pub layout: ShareLayout,
    pub terms: Vec<(String, f64)>,
}

pub fn literal(letters: &[Pauli]) -> String {
    letters.iter().map(|l| l.as_char()).collect()
}

pub fn state_terms(state: &PauliSumState) -> Vec<(String, f64)> {
    state.terms().map(|(l, c)| (literal(l), c)).collect()
}

fn parse_terms(width: usize, terms: &[(String, f64)]) -> Result<PauliSumState> {
    let mut parsed = Vec::with_capacity(terms.len() + 1);
    let mut has_identity = false;
    for (lit, c) in terms {
        let p: PauliString = lit.parse()?;
        if !p.phase().is_real() {
            return Err(Error::InvalidPauli(format!("imaginary phase in `{lit}`")));
        }
        has_identity |= p.is_identity();
        parsed.push((p, *c));
    }
    if !has_identity {
        parsed.push((PauliString::identity(width), 1.0));
    }
    PauliSumState::from_terms(width, parsed)
}

impl SharedStateDoc {
    pub fn from_state(shared: &SharedSecretState<PauliSumState>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            secret_qubits: shared.secret_qubits,
            magic_total: shared.magic_total,
            magic_remaining: shared.magic_remaining,
            layout: shared.layout.clone(),
            terms: state_terms(&shared.state),
        }
    }

    pub fn into_state(self) -> Result<SharedSecretState<PauliSumState>> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported document {} v{}, expected {FORMAT} v{VERSION}",
                self.format, self.version
            )));
        }
        self.layout.validate()?;
        if self.magic_remaining > self.magic_total
            || self.layout.total_rows() != self.secret_qubits + self.magic_total
            || self.layout.live_rows().len() != self.secret_qubits + self.magic_remaining
        {
            return Err(Error::InvalidConfig(
                "row bookkeeping disagrees with the layout".into(),
            ));
        }
        let state = parse_terms(self.layout.width(), &self.terms)?;
        Ok(SharedSecretState {
            state,
            layout: self.layout,
            secret_qubits: self.secret_qubits,
            magic_total: self.magic_total,
            magic_remaining: self.magic_remaining,
        })
    }
}

pub fn to_json(shared: &SharedSecretState<PauliSumState>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SharedStateDoc::from_state(
        shared,
    ))?)
}

pub fn from_json(text: &str) -> Result<SharedSecretState<PauliSumState>> {
    serde_json::from_str::<SharedStateDoc>(text)?.into_state()
}

/// Parses a coefficient file for a `width`-qubit state.
pub fn parse_coefficients(text: &str, width: usize) -> Result<PauliSumState> {
    let mut terms = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            column: 1,
            message,
        };
        let mut tokens = line.split_whitespace();
        let (Some(lit), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(err("expected `literal coefficient`".into()));
        };
        let c: f64 = value
            .parse()
            .map_err(|_| err(format!("invalid coefficient `{value}`")))?;
        let p: PauliString = lit.parse().map_err(|e: Error| err(e.to_string()))?;
        if p.len() != width {
            return Err(err(format!(
                "`{lit}` has {} letters, expected {width}",
                p.len()
            )));
        }
        terms.push((lit.to_string(), c));
    }
    parse_terms(width, &terms)
}

/// Writes a state in the coefficient-file format.
pub fn format_coefficients(state: &PauliSumState) -> String {
    state
        .terms()
        .map(|(l, c)| format!("{} {c}\n", literal(l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{deal, DealerConfig};

    #[test]
    fn shared_state_round_trips() {
        let secret = PauliSumState::qubit_state(0.1, 0.2, -0.3).unwrap();
        let shared = deal(&secret, &DealerConfig::new(1, 1, 3).unwrap()).unwrap();
        let back = from_json(&to_json(&shared).unwrap()).unwrap();
        assert_eq!(back.state, shared.state);
        assert_eq!(back.layout, shared.layout);
        assert_eq!(back.magic_remaining, 1);
    }

    #[test]
    fn coefficient_file() {
        let s = parse_coefficients("# a secret\nX 0.5\n-Z 0.25  # negated\n", 1).unwrap();
        assert_eq!(s.bloch(), Some([0.5, 0.0, -0.25]));
        assert_eq!(parse_coefficients(&format_coefficients(&s), 1).unwrap(), s);
        assert!(matches!(
            parse_coefficients("XX 0.5", 1),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_coefficients("I 0.5", 1).is_err());
        assert!(parse_coefficients("Q 0.5", 1).is_err());
    }

    #[test]
    fn rejects_tampered_documents() {
        let secret = PauliSumState::qubit_state(0.0, 0.0, 1.0).unwrap();
        let shared = deal(&secret, &DealerConfig::new(1, 0, 5).unwrap()).unwrap();
        let mut doc = SharedStateDoc::from_state(&shared);
        doc.version = 2;
        assert!(doc.clone().into_state().is_err());
        doc.version = VERSION;
        doc.magic_remaining = 1;
        assert!(doc.into_state().is_err());
    }
}
