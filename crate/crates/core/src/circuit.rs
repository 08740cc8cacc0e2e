//! Public Clifford+T circuits and their text format.
//!
//! One gate per line, whitespace-separated: `H q`, `S q`, `X q`, `Y q`,
//! `Z q`, `T q`, `CNOT c t`. Indices are 0-based logical qubits; `#` starts a
//! comment.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Clifford1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Single { gate: Clifford1, qubit: usize },
    Cnot { control: usize, target: usize },
    T { qubit: usize },
}

impl Gate {
    pub fn is_t(&self) -> bool {
        matches!(self, Gate::T { .. })
    }

    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::Single { qubit, .. } | Gate::T { qubit } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Single { gate, qubit } => write!(f, "{gate} {qubit}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::T { qubit } => write!(f, "T {qubit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize, gates: Vec<Gate>) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            check_gate(g, width).map_err(|m| Error::InvalidCircuit(format!("gate {i}: {m}")))?;
        }
        Ok(Self { width, gates })
    }

    pub fn empty(width: usize) -> Self {
        Self {
            width,
            gates: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_t()).count()
    }

    /// Rejects circuits needing more magic states than were dealt.
    pub fn check_budget(&self, magic: usize) -> Result<()> {
        let t_count = self.t_count();
        if t_count > magic {
            return Err(Error::MagicBudget {
                t_count,
                budget: magic,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn check_gate(g: &Gate, width: usize) -> std::result::Result<(), String> {
    for q in g.operands() {
        if q >= width {
            return Err(format!("qubit {q} out of range for width {width}"));
        }
    }
    if let Gate::Cnot { control, target } = *g {
        if control == target {
            return Err(format!(
                "CNOT operands must be distinct, got {control} twice"
            ));
        }
    }
    Ok(())
}

/// Parses the circuit text format for a secret of `width` qubits.
pub fn parse_circuit(text: &str, width: usize) -> Result<Circuit> {
    let mut gates = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<(usize, &str)> = tokenize(line);
        let Some(&(col, mnemonic)) = tokens.first() else {
            continue;
        };
        let err = |column: usize, message: String| Error::Parse {
            line: lineno + 1,
            column: column + 1,
            message,
        };
        let arity = match mnemonic {
            "CNOT" | "CX" => 2,
            "H" | "S" | "X" | "Y" | "Z" | "T" => 1,
            other => return Err(err(col, format!("unknown mnemonic `{other}`"))),
        };
        if tokens.len() - 1 != arity {
            return Err(err(
                col,
                format!(
                    "`{mnemonic}` takes {arity} operand(s), found {}",
                    tokens.len() - 1
                ),
            ));
        }
        let mut operands = Vec::with_capacity(arity);
        for &(c, tok) in &tokens[1..] {
            let q: usize = tok
                .parse()
                .map_err(|_| err(c, format!("invalid qubit index `{tok}`")))?;
            if q >= width {
                return Err(err(
                    c,
                    format!("qubit {q} out of range for {width} secret qubit(s)"),
                ));
            }
            operands.push(q);
        }
        let gate = match mnemonic {
            "CNOT" | "CX" => {
                if operands[0] == operands[1] {
                    return Err(err(
                        tokens[2].0,
                        format!("CNOT operands must be distinct, got {} twice", operands[0]),
                    ));
                }
                Gate::Cnot {
                    control: operands[0],
                    target: operands[1],
                }
            }
            "T" => Gate::T { qubit: operands[0] },
            m => Gate::Single {
                gate: m.parse()?,
                qubit: operands[0],
            },
        };
        gates.push(gate);
    }
    Circuit::new(width, gates)
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gates() {
        let c = parse_circuit("H 0\nCNOT 0 1", 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.gates()[1],
            Gate::Cnot {
                control: 0,
                target: 1
            }
        );
    }

    #[test]
    fn comments_and_t_count() {
        let c = parse_circuit("T 0\n# comment\nT 0  # trailing\n\n", 1).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.t_count(), 2);
        assert!(matches!(
            c.check_budget(1),
            Err(Error::MagicBudget {
                t_count: 2,
                budget: 1
            })
        ));
        assert!(c.check_budget(2).is_ok());
    }

    #[test]
    fn rejects_bad_lines() {
        match parse_circuit("H 0\nCNOT 0 0", 2) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_circuit("FOO 1", 2),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_circuit("H 3", 2),
            Err(Error::Parse {
                line: 1,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_circuit("  CNOT 1", 2),
            Err(Error::Parse {
                line: 1,
                column: 3,
                ..
            })
        ));
        assert!(parse_circuit("H x", 2).is_err());
    }

    #[test]
    fn display_round_trips() {
        let text = "H 0\nS 1\nCNOT 1 0\nT 0\nZ 1\n";
        let c = parse_circuit(text, 2).unwrap();
        assert_eq!(c.to_string(), text);
    }
}
