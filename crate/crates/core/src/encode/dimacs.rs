//! DIMACS CNF text format.
//!
//! Output starts with one `c map <var> <feature>` line per feature variable in
//! preorder, followed by the `p cnf` header and the clauses.

use std::fmt::Write as _;

use thiserror::Error;

use super::cnf::{CnfClauseSet, Lit};

pub fn write_dimacs(cnf: &CnfClauseSet) -> String {
    let mut out = String::new();
    for (i, f) in cnf.features.iter().enumerate() {
        let _ = writeln!(out, "c map {} {}", i + 1, f);
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// A clause set read back from DIMACS text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsCnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// `(variable, name)` pairs from `c map` comments.
    pub names: Vec<(usize, String)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: missing or malformed `p cnf` header")]
    BadHeader(usize),
    #[error("line {line}: bad literal `{token}`")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count")]
    VariableOutOfRange { line: usize, lit: i64 },
    #[error("declared {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

pub fn read_dimacs(text: &str) -> Result<DimacsCnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut names = Vec::new();
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut parts = rest.split_whitespace();
            if parts.next() == Some("map") {
                if let (Some(v), Some(name)) = (parts.next(), parts.next()) {
                    if let Ok(v) = v.parse() {
                        names.push((v, name.to_string()));
                    }
                }
            }
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] if header.is_none() => {
                    let v = v.parse().map_err(|_| DimacsError::BadHeader(line_no))?;
                    let c = c.parse().map_err(|_| DimacsError::BadHeader(line_no))?;
                    header = Some((v, c));
                }
                _ => return Err(DimacsError::BadHeader(line_no)),
            }
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::BadHeader(line_no))?;
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadLiteral {
                line: line_no,
                token: token.to_string(),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::VariableOutOfRange { line: line_no, lit });
            } else {
                current.push(lit as Lit);
            }
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::BadHeader(text.lines().count() + 1))?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(DimacsCnf {
        num_vars,
        clauses,
        names,
    })
}
