use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use super::cnf::{to_cnf, CnfClauseSet};
use super::formula::PropFormula;
use crate::model::{
    validate_structure, ConstraintKind, CrossTreeConstraint, FeatureId, FeatureModel, GroupKind,
    StructureDiagnostic,
};

/// Encodes one parent/children relationship.
pub fn encode_group(parent: &FeatureId, kind: GroupKind, children: &[FeatureId]) -> PropFormula {
    use PropFormula as F;
    let p = || F::Var(parent.clone());
    let cs: Vec<PropFormula> = children.iter().cloned().map(F::Var).collect();
    let each_implies_parent = || cs.iter().map(|c| F::implies(c.clone(), p())).collect::<Vec<_>>();
    let pairwise_exclusion = || {
        let mut out = Vec::new();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                out.push(F::not(F::And(vec![cs[i].clone(), cs[j].clone()])));
            }
        }
        out
    };
    match kind {
        GroupKind::Mandatory => F::and(cs.iter().map(|c| F::iff(c.clone(), p())).collect()),
        GroupKind::Optional | GroupKind::OptionalOr => F::and(each_implies_parent()),
        // `(a ⊕ b) ⇔ p` alone admits a and b both selected under a
        // deselected parent, hence the extra exclusion.
        GroupKind::Alternative if cs.len() == 2 => F::and(vec![
            F::iff(F::xor(cs[0].clone(), cs[1].clone()), p()),
            F::not(F::And(cs.clone())),
        ]),
        GroupKind::Alternative => {
            let mut ops = vec![F::iff(F::or(cs.clone()), p())];
            ops.extend(pairwise_exclusion());
            F::and(ops)
        }
        GroupKind::OptionalAlternative => {
            let mut ops = each_implies_parent();
            ops.extend(pairwise_exclusion());
            F::and(ops)
        }
        GroupKind::Or => F::iff(F::or(cs.clone()), p()),
    }
}

/// `a ⇒ b` for requires, `a ⇒ ¬b` for excludes.
pub fn encode_constraint(c: &CrossTreeConstraint) -> PropFormula {
    let src = PropFormula::Var(c.source.clone());
    let tgt = PropFormula::Var(c.target.clone());
    match c.kind {
        ConstraintKind::Requires => PropFormula::implies(src, tgt),
        ConstraintKind::Excludes => PropFormula::implies(src, PropFormula::not(tgt)),
    }
}

/// Where a conjunct of the model formula comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConjunctRef {
    Root {
        feature: FeatureId,
    },
    Group {
        parent: FeatureId,
        kind: GroupKind,
        children: Vec<FeatureId>,
    },
    Dependency {
        constraint: CrossTreeConstraint,
    },
}

impl fmt::Display for ConjunctRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjunctRef::Root { feature } => write!(f, "root: {feature}"),
            ConjunctRef::Group {
                parent,
                kind,
                children,
            } => {
                write!(f, "{kind} group: {parent} {{")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("}")
            }
            ConjunctRef::Dependency { constraint: c } => match c.kind {
                ConstraintKind::Requires => write!(f, "requires: {} -> {}", c.source, c.target),
                ConstraintKind::Excludes => write!(f, "excludes: {} -> !{}", c.source, c.target),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupConjunct {
    pub parent: FeatureId,
    pub kind: GroupKind,
    pub children: Vec<FeatureId>,
    pub formula: PropFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyConjunct {
    pub constraint: CrossTreeConstraint,
    pub formula: PropFormula,
}

#[derive(Debug, Error)]
#[error("model is not structurally valid ({} problem(s)): {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
pub struct StructureError(pub Vec<StructureDiagnostic>);

/// A feature model compiled to propositional logic: the root variable, one
/// conjunct per group and one per cross-tree constraint.
#[derive(Debug)]
pub struct EncodedModel {
    name: String,
    features: Vec<FeatureId>,
    index: HashMap<FeatureId, usize>,
    pub root_conjunct: PropFormula,
    pub group_conjuncts: Vec<GroupConjunct>,
    pub dependency_conjuncts: Vec<DependencyConjunct>,
    cnf: OnceLock<CnfClauseSet>,
}

/// Compiles `model`. Fails only when the model breaks a structural invariant.
pub fn encode_model(model: &FeatureModel) -> Result<EncodedModel, StructureError> {
    let diags = validate_structure(model);
    if !diags.is_empty() {
        return Err(StructureError(diags));
    }
    let nodes = model.walk();
    let features: Vec<FeatureId> = nodes.iter().map(|f| f.id.clone()).collect();
    let index = features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();
    let mut group_conjuncts = Vec::new();
    for node in &nodes {
        for group in &node.groups {
            let children: Vec<FeatureId> = group.children.iter().map(|c| c.id.clone()).collect();
            group_conjuncts.push(GroupConjunct {
                formula: encode_group(&node.id, group.kind, &children),
                parent: node.id.clone(),
                kind: group.kind,
                children,
            });
        }
    }
    let dependency_conjuncts = model
        .constraints
        .iter()
        .map(|c| DependencyConjunct {
            constraint: c.clone(),
            formula: encode_constraint(c),
        })
        .collect();
    Ok(EncodedModel {
        name: model.name.clone(),
        root_conjunct: PropFormula::Var(model.root.id.clone()),
        features,
        index,
        group_conjuncts,
        dependency_conjuncts,
        cnf: OnceLock::new(),
    })
}

impl EncodedModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Feature variables in preorder.
    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn root(&self) -> &FeatureId {
        &self.features[0]
    }

    /// Preorder position of a feature.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Resolves a feature name to its interned id.
    pub fn feature(&self, id: &str) -> Option<&FeatureId> {
        self.index_of(id).map(|i| &self.features[i])
    }

    /// All conjuncts in order: root, groups (preorder of parents), then
    /// dependencies.
    pub fn conjuncts(&self) -> Vec<(ConjunctRef, &PropFormula)> {
        let mut out = vec![(
            ConjunctRef::Root {
                feature: self.root().clone(),
            },
            &self.root_conjunct,
        )];
        for g in &self.group_conjuncts {
            out.push((
                ConjunctRef::Group {
                    parent: g.parent.clone(),
                    kind: g.kind,
                    children: g.children.clone(),
                },
                &g.formula,
            ));
        }
        for d in &self.dependency_conjuncts {
            out.push((
                ConjunctRef::Dependency {
                    constraint: d.constraint.clone(),
                },
                &d.formula,
            ));
        }
        out
    }

    /// The whole model formula as one conjunction.
    pub fn formula(&self) -> PropFormula {
        PropFormula::and(self.conjuncts().into_iter().map(|(_, f)| f.clone()).collect())
    }

    /// Clause form, computed once.
    pub fn cnf(&self) -> &CnfClauseSet {
        self.cnf.get_or_init(|| to_cnf(self))
    }
}
