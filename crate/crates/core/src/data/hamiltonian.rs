use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::{Observable, Pauli};

/// Parses `<coefficient> <pauli word>` lines. `#` starts a comment.
pub fn parse_hamiltonian(text: &str, source: &str) -> Result<Observable> {
    let err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let mut terms: Vec<(f64, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (Some(c), Some(word), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(line, format!("expected `<coefficient> <word>`, found `{content}`")));
        };
        let coeff: f64 = c
            .parse()
            .map_err(|_| err(line, format!("bad coefficient `{c}`")))?;
        if !coeff.is_finite() {
            return Err(err(line, "non-finite coefficient".into()));
        }
        if let Some(bad) = word.chars().find(|&ch| Pauli::from_char(ch).is_none()) {
            return Err(err(line, format!("illegal Pauli letter `{bad}` in `{word}`")));
        }
        if let Some((_, first)) = terms.first() {
            if first.len() != word.len() {
                return Err(err(
                    line,
                    format!("word `{word}` has length {}, earlier terms have {}", word.len(), first.len()),
                ));
            }
        }
        terms.push((coeff, word.to_string()));
    }
    if terms.is_empty() {
        return Err(err(0, "no Hamiltonian terms".into()));
    }
    Observable::from_words(terms.iter().map(|(c, w)| (*c, w.as_str())))
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<Observable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_hamiltonian(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term() {
        let h = parse_hamiltonian("-1.0 Z\n", "t").unwrap();
        assert_eq!(h.num_qubits(), 1);
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coeff, -1.0);
    }

    #[test]
    fn comments_and_two_terms() {
        let h = parse_hamiltonian("# toy\n0.5 ZI\n\n0.5 IZ  # second\n", "t").unwrap();
        assert_eq!(h.num_qubits(), 2);
        assert_eq!(h.terms().len(), 2);
    }

    #[test]
    fn malformed_files() {
        for bad in ["0.5 ZI\n0.5 ZII\n", "0.5 ZQ\n", "x ZZ\n", "0.5\n", "# nothing\n", "1 Z Z\n"] {
            assert!(parse_hamiltonian(bad, "t").is_err(), "{bad:?}");
        }
        match parse_hamiltonian("1 ZZ\n2 ZZZ\n", "f.ham") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
