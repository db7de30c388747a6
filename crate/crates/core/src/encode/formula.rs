use std::fmt;

use thiserror::Error;

use crate::model::{Configuration, Decision, FeatureId};

/// Propositional formula over feature variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropFormula {
    Var(FeatureId),
    Const(bool),
    Not(Box<PropFormula>),
    /// At least two operands.
    And(Vec<PropFormula>),
    /// At least two operands.
    Or(Vec<PropFormula>),
    Xor(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
    Iff(Box<PropFormula>, Box<PropFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("feature `{0}` is undecided")]
    UndecidedFeature(FeatureId),
}

impl PropFormula {
    pub fn var(id: impl Into<FeatureId>) -> Self {
        PropFormula::Var(id.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: PropFormula) -> Self {
        PropFormula::Not(Box::new(f))
    }

    /// Conjunction; a single operand is returned as is, none gives `true`.
    pub fn and(mut ops: Vec<PropFormula>) -> Self {
        match ops.len() {
            0 => PropFormula::Const(true),
            1 => ops.pop().unwrap(),
            _ => PropFormula::And(ops),
        }
    }

    /// Disjunction; a single operand is returned as is, none gives `false`.
    pub fn or(mut ops: Vec<PropFormula>) -> Self {
        match ops.len() {
            0 => PropFormula::Const(false),
            1 => ops.pop().unwrap(),
            _ => PropFormula::Or(ops),
        }
    }

    pub fn xor(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Xor(Box::new(a), Box::new(b))
    }

    pub fn implies(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Iff(Box::new(a), Box::new(b))
    }

    /// Evaluates under `assignment`, looking up variables by id.
    pub fn eval_with<E>(&self, lookup: &mut impl FnMut(&FeatureId) -> Result<bool, E>) -> Result<bool, E> {
        Ok(match self {
            PropFormula::Var(id) => lookup(id)?,
            PropFormula::Const(b) => *b,
            PropFormula::Not(f) => !f.eval_with(lookup)?,
            PropFormula::And(fs) => {
                let mut acc = true;
                for f in fs {
                    acc &= f.eval_with(lookup)?;
                }
                acc
            }
            PropFormula::Or(fs) => {
                let mut acc = false;
                for f in fs {
                    acc |= f.eval_with(lookup)?;
                }
                acc
            }
            PropFormula::Xor(a, b) => a.eval_with(lookup)? ^ b.eval_with(lookup)?,
            PropFormula::Implies(a, b) => !a.eval_with(lookup)? | b.eval_with(lookup)?,
            PropFormula::Iff(a, b) => a.eval_with(lookup)? == b.eval_with(lookup)?,
        })
    }

    /// Variables in first-occurrence order, without repeats.
    pub fn variables(&self) -> Vec<FeatureId> {
        fn go(f: &PropFormula, out: &mut Vec<FeatureId>) {
            match f {
                PropFormula::Var(id) => {
                    if !out.contains(id) {
                        out.push(id.clone())
                    }
                }
                PropFormula::Const(_) => {}
                PropFormula::Not(a) => go(a, out),
                PropFormula::And(fs) | PropFormula::Or(fs) => fs.iter().for_each(|f| go(f, out)),
                PropFormula::Xor(a, b) | PropFormula::Implies(a, b) | PropFormula::Iff(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Removes `Const` nodes. The result is either a bare `Const` or contains
    /// no constants at all.
    pub fn fold_constants(&self) -> PropFormula {
        use PropFormula as F;
        match self {
            F::Var(_) | F::Const(_) => self.clone(),
            F::Not(a) => match a.fold_constants() {
                F::Const(b) => F::Const(!b),
                other => F::not(other),
            },
            F::And(fs) => {
                let mut ops = Vec::new();
                for f in fs {
                    match f.fold_constants() {
                        F::Const(false) => return F::Const(false),
                        F::Const(true) => {}
                        other => ops.push(other),
                    }
                }
                F::and(ops)
            }
            F::Or(fs) => {
                let mut ops = Vec::new();
                for f in fs {
                    match f.fold_constants() {
                        F::Const(true) => return F::Const(true),
                        F::Const(false) => {}
                        other => ops.push(other),
                    }
                }
                F::or(ops)
            }
            F::Xor(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (F::Const(x), F::Const(y)) => F::Const(x ^ y),
                (F::Const(c), g) | (g, F::Const(c)) => {
                    if c {
                        negate(g)
                    } else {
                        g
                    }
                }
                (x, y) => F::xor(x, y),
            },
            F::Iff(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (F::Const(x), F::Const(y)) => F::Const(x == y),
                (F::Const(c), g) | (g, F::Const(c)) => {
                    if c {
                        g
                    } else {
                        negate(g)
                    }
                }
                (x, y) => F::iff(x, y),
            },
            F::Implies(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (F::Const(false), _) | (_, F::Const(true)) => F::Const(true),
                (F::Const(true), g) => g,
                (g, F::Const(false)) => negate(g),
                (x, y) => F::implies(x, y),
            },
        }
    }

    /// Renders with the given connective glyphs.
    pub fn render(&self, glyphs: Glyphs) -> String {
        let mut s = String::new();
        self.write(&mut s, glyphs, false);
        s
    }

    fn is_atomic(&self) -> bool {
        matches!(self, PropFormula::Var(_) | PropFormula::Const(_) | PropFormula::Not(_))
    }

    fn write(&self, out: &mut String, g: Glyphs, nested: bool) {
        let paren = nested && !self.is_atomic();
        if paren {
            out.push('(');
        }
        let sep = |out: &mut String, op: &str| {
            out.push(' ');
            out.push_str(op);
            out.push(' ');
        };
        match self {
            PropFormula::Var(id) => out.push_str(id.as_str()),
            PropFormula::Const(b) => out.push_str(if *b { "T" } else { "F" }),
            PropFormula::Not(a) => {
                out.push_str(g.not());
                a.write(out, g, true);
            }
            PropFormula::And(fs) | PropFormula::Or(fs) => {
                let op = if matches!(self, PropFormula::And(_)) {
                    g.and()
                } else {
                    g.or()
                };
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        sep(out, op);
                    }
                    f.write(out, g, true);
                }
            }
            PropFormula::Xor(a, b) | PropFormula::Implies(a, b) | PropFormula::Iff(a, b) => {
                let op = match self {
                    PropFormula::Xor(..) => g.xor(),
                    PropFormula::Implies(..) => g.implies(),
                    _ => g.iff(),
                };
                a.write(out, g, true);
                sep(out, op);
                b.write(out, g, true);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

fn negate(f: PropFormula) -> PropFormula {
    match f {
        PropFormula::Not(inner) => *inner,
        other => PropFormula::not(other),
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Glyphs::Unicode))
    }
}

/// Connective glyph set used when rendering formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Glyphs {
    #[default]
    Unicode,
    Ascii,
}

impl Glyphs {
    fn not(self) -> &'static str {
        match self {
            Glyphs::Unicode => "¬",
            Glyphs::Ascii => "!",
        }
    }
    fn and(self) -> &'static str {
        match self {
            Glyphs::Unicode => "∧",
            Glyphs::Ascii => "&",
        }
    }
    fn or(self) -> &'static str {
        match self {
            Glyphs::Unicode => "∨",
            Glyphs::Ascii => "|",
        }
    }
    fn xor(self) -> &'static str {
        match self {
            Glyphs::Unicode => "⊕",
            Glyphs::Ascii => "^",
        }
    }
    fn implies(self) -> &'static str {
        match self {
            Glyphs::Unicode => "⇒",
            Glyphs::Ascii => "->",
        }
    }
    fn iff(self) -> &'static str {
        match self {
            Glyphs::Unicode => "⇔",
            Glyphs::Ascii => "<->",
        }
    }
}

/// Truth value of `f` under a configuration; every variable of `f` must be
/// decided.
pub fn eval_formula(f: &PropFormula, assignment: &Configuration) -> Result<bool, EvalError> {
    f.eval_with(&mut |id: &FeatureId| match assignment.get(id.as_str()) {
        Decision::Selected => Ok(true),
        Decision::Deselected => Ok(false),
        Decision::Undecided => Err(EvalError::UndecidedFeature(id.clone())),
    })
}
