use crate::encode::{EncodedModel, PropFormula};

/// Model formula over bit positions of a `u64` assignment code.
///
/// Feature `i` (preorder) of an `n`-feature model lives in bit `n - 1 - i`,
/// so counting codes upward visits assignments in lexicographic preorder
/// order with deselected before selected.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Bit(u64),
    Const(bool),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Xor(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Iff(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn model(e: &EncodedModel) -> Compiled {
        let n = e.feature_count();
        let conj = e
            .conjuncts()
            .into_iter()
            .map(|(_, f)| Self::compile(f, e, n))
            .collect();
        Compiled::And(conj)
    }

    fn compile(f: &PropFormula, e: &EncodedModel, n: usize) -> Compiled {
        let c = |g: &PropFormula| Box::new(Self::compile(g, e, n));
        match f {
            PropFormula::Var(id) => {
                let i = e.index_of(id.as_str()).expect("encoded formulas only mention features");
                Compiled::Bit(1 << (n - 1 - i))
            }
            PropFormula::Const(b) => Compiled::Const(*b),
            PropFormula::Not(a) => Compiled::Not(c(a)),
            PropFormula::And(fs) => Compiled::And(fs.iter().map(|g| Self::compile(g, e, n)).collect()),
            PropFormula::Or(fs) => Compiled::Or(fs.iter().map(|g| Self::compile(g, e, n)).collect()),
            PropFormula::Xor(a, b) => Compiled::Xor(c(a), c(b)),
            PropFormula::Implies(a, b) => Compiled::Implies(c(a), c(b)),
            PropFormula::Iff(a, b) => Compiled::Iff(c(a), c(b)),
        }
    }

    pub fn eval(&self, code: u64) -> bool {
        match self {
            Compiled::Bit(m) => code & m != 0,
            Compiled::Const(b) => *b,
            Compiled::Not(a) => !a.eval(code),
            Compiled::And(fs) => fs.iter().all(|f| f.eval(code)),
            Compiled::Or(fs) => fs.iter().any(|f| f.eval(code)),
            Compiled::Xor(a, b) => a.eval(code) ^ b.eval(code),
            Compiled::Implies(a, b) => !a.eval(code) || b.eval(code),
            Compiled::Iff(a, b) => a.eval(code) == b.eval(code),
        }
    }
}

/// Bit of feature `i` in an `n`-feature code.
pub(crate) fn bit(n: usize, i: usize) -> u64 {
    1 << (n - 1 - i)
}
