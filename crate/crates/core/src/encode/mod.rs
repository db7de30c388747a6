//! Propositional encoding of feature models.

mod cnf;
mod dimacs;
mod encoder;
mod formula;

pub use cnf::{formula_to_cnf, to_cnf, CnfClauseSet, Lit};
pub use dimacs::{read_dimacs, write_dimacs, DimacsCnf, DimacsError};
pub use encoder::{
    encode_constraint, encode_group, encode_model, ConjunctRef, DependencyConjunct, EncodedModel,
    GroupConjunct, StructureError,
};
pub use formula::{eval_formula, EvalError, Glyphs, PropFormula};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::model::{Configuration, CrossTreeConstraint, Feature, FeatureId, FeatureModel, GroupKind};

    fn ids(names: &[&str]) -> Vec<FeatureId> {
        names.iter().map(|n| FeatureId::new(n)).collect()
    }

    #[test]
    fn group_encodings_have_expected_shape() {
        let g1 = encode_group(&"v1".into(), GroupKind::Alternative, &ids(&["v1.1", "v1.2"]));
        assert_eq!(g1.to_string(), "((v1.1 ⊕ v1.2) ⇔ v1) ∧ ¬(v1.1 ∧ v1.2)");
        let PropFormula::And(parts) = &g1 else { panic!("conjunction expected") };
        assert_eq!(parts[0].to_string(), "(v1.1 ⊕ v1.2) ⇔ v1");
        let g2 = encode_group(
            &"v2".into(),
            GroupKind::Or,
            &ids(&["v2.1", "v2.2", "v2.3", "v2.4"]),
        );
        assert_eq!(g2.to_string(), "(v2.1 ∨ v2.2 ∨ v2.3 ∨ v2.4) ⇔ v2");
        let m = encode_group(&"p".into(), GroupKind::Mandatory, &ids(&["c"]));
        assert_eq!(m.to_string(), "c ⇔ p");
    }

    #[test]
    fn remaining_group_encodings() {
        let p: FeatureId = "p".into();
        let abc = ids(&["a", "b", "c"]);
        let show = |k| encode_group(&p, k, &abc).to_string();
        assert_eq!(show(GroupKind::Mandatory), "(a ⇔ p) ∧ (b ⇔ p) ∧ (c ⇔ p)");
        assert_eq!(show(GroupKind::Optional), "(a ⇒ p) ∧ (b ⇒ p) ∧ (c ⇒ p)");
        assert_eq!(show(GroupKind::OptionalOr), show(GroupKind::Optional));
        assert_eq!(
            show(GroupKind::Alternative),
            "((a ∨ b ∨ c) ⇔ p) ∧ ¬(a ∧ b) ∧ ¬(a ∧ c) ∧ ¬(b ∧ c)"
        );
        assert_eq!(
            show(GroupKind::OptionalAlternative),
            "(a ⇒ p) ∧ (b ⇒ p) ∧ (c ⇒ p) ∧ ¬(a ∧ b) ∧ ¬(a ∧ c) ∧ ¬(b ∧ c)"
        );
    }

    #[test]
    fn constraint_encodings() {
        let r = encode_constraint(&CrossTreeConstraint::requires("v2.3.1", "v1.1"));
        assert_eq!(r.to_string(), "v2.3.1 ⇒ v1.1");
        let r = encode_constraint(&CrossTreeConstraint::requires("v2.4", "v3.2"));
        assert_eq!(r.to_string(), "v2.4 ⇒ v3.2");
        let x = encode_constraint(&CrossTreeConstraint::excludes("a", "b"));
        assert_eq!(x.to_string(), "a ⇒ ¬b");
    }

    #[test]
    fn model_encodings() {
        let root_only = encode_model(&FeatureModel::new("M", Feature::leaf("root"))).unwrap();
        assert_eq!(root_only.formula(), PropFormula::var("root"));

        let opt = FeatureModel::new(
            "M",
            Feature::leaf("r").with_group(GroupKind::Optional, vec![Feature::leaf("c")]),
        );
        assert_eq!(encode_model(&opt).unwrap().formula().to_string(), "r ∧ (c ⇒ r)");

        let cad = parse_model(include_str!("../../examples/cad_partial.fm")).unwrap();
        let e = encode_model(&cad).unwrap();
        assert_eq!(e.group_conjuncts.len(), 5);
        assert_eq!(e.dependency_conjuncts.len(), 2);
        let parents: Vec<_> = e.group_conjuncts.iter().map(|g| g.parent.to_string()).collect();
        assert_eq!(parents, ["CAD", "v1", "v2", "v2.3", "v3"]);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let bad = FeatureModel::new(
            "M",
            Feature::leaf("r").with_group(GroupKind::Or, vec![Feature::leaf("a")]),
        );
        assert!(encode_model(&bad).is_err());
    }

    #[test]
    fn example_one_conjuncts_all_true() {
        let cad = parse_model(include_str!("../../examples/cad_partial.fm")).unwrap();
        let e = encode_model(&cad).unwrap();
        let cfg = Configuration::full_from_selection(
            e.features(),
            &["CAD", "v1", "v1.1", "v2", "v2.1", "v2.3", "v2.3.1", "v2.4", "v3", "v3.2"],
        );
        for (origin, f) in e.conjuncts() {
            assert_eq!(eval_formula(f, &cfg), Ok(true), "{origin}");
        }
        let deps = PropFormula::and(
            e.dependency_conjuncts.iter().map(|d| d.formula.clone()).collect(),
        );
        assert_eq!(eval_formula(&deps, &cfg), Ok(true));
    }
}
