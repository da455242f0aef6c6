//! The d² = 0 constraint system for constant-coefficient models and the
//! certification of the six homogeneous families.
//!
//! For a model with constant structure coefficients, homogeneity reduces to
//! d(dζ) = 0 for each coframe generator ζ. Expanding d∘d produces, for each
//! of the four generators, four degree-3 monomial coefficients: quadratic
//! polynomials in the six constants and their conjugates. A model is a
//! homogeneous solution exactly when all sixteen residues vanish.
//!
//! # Design Notes
//!
//! The residues are reported per generator and per monomial so a failure
//! pinpoints which Jacobi-type identity broke. The generic system (all six
//! constants free conjugate-pair symbols) is frozen in
//! `fixtures/d2_residues_generic.txt`; a test regenerates it and compares
//! byte for byte, so any change to the wedge or differential conventions is
//! caught immediately.

use crate::error::Result;
use crate::exterior::{mask_name, Generator, Mask, GENERATORS};
use crate::models::{CoframeModel, EngelConstants, FamilyId};
use crate::scalar::{Scalar, SymbolTable};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// One coefficient of d(dζ): the generator ζ, the degree-3 monomial, and
/// the polynomial that must vanish.
#[derive(Debug, Clone)]
pub struct ResidueEntry {
    pub generator: Generator,
    pub monomial: Mask,
    pub residue: Scalar,
}

/// All sixteen d² coefficients of a model (4 generators × 4 degree-3
/// monomials), in a fixed deterministic order.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    entries: Vec<ResidueEntry>,
}

/// The four degree-3 monomial masks in ascending order.
pub fn degree3_masks() -> [Mask; 4] {
    [0b0111, 0b1011, 0b1101, 0b1110]
}

/// Expand d(dζ) for every generator and collect every degree-3 coefficient.
pub fn d2_residues(m: &CoframeModel) -> ConstraintSystem {
    let mut entries = Vec::with_capacity(16);
    for g in GENERATORS {
        let dd = m.d(m.d_generator(g));
        for mask in degree3_masks() {
            entries.push(ResidueEntry {
                generator: g,
                monomial: mask,
                residue: dd.coefficient(mask),
            });
        }
    }
    ConstraintSystem { entries }
}

impl ConstraintSystem {
    pub fn entries(&self) -> &[ResidueEntry] {
        &self.entries
    }

    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|e| e.residue.is_zero())
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.residue.is_zero()).count()
    }

    /// Evaluate every residue at a rational parameter point (see
    /// [`Scalar::eval`] for the binding and circle-parameter rules).
    pub fn eval(
        &self,
        bindings: &BTreeMap<String, crate::scalar::GaussianRational>,
        circle_t: Option<&num::BigRational>,
    ) -> Result<Vec<crate::scalar::GaussianRational>> {
        self.entries
            .iter()
            .map(|e| e.residue.eval(bindings, circle_t))
            .collect()
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "d2({}) [{}] = {}",
                e.generator.name(),
                mask_name(e.monomial),
                e.residue
            )?;
        }
        Ok(())
    }
}

/// True iff the family's structure equation satisfies d² = 0 identically in
/// its parameters (or at its bound parameter point).
pub fn verify_family(id: &FamilyId) -> Result<bool> {
    Ok(d2_residues(&id.model()?).all_zero())
}

/// True iff the constants satisfy d² = 0.
pub fn verify_constants(k: &EngelConstants) -> bool {
    d2_residues(&CoframeModel::from_constants(k)).all_zero()
}

/// Replace one constant (index in the order p1, p2, q1, q2, r1, r2).
pub fn with_constant(k: &EngelConstants, index: usize, value: Scalar) -> EngelConstants {
    let mut out = k.clone();
    match index {
        0 => out.p1 = value,
        1 => out.p2 = value,
        2 => out.q1 = value,
        3 => out.q2 = value,
        4 => out.r1 = value,
        5 => out.r2 = value,
        _ => panic!("constant index out of range: {index}"),
    }
    out
}

/// Add a perturbation to one constant.
pub fn perturb(k: &EngelConstants, index: usize, delta: &Scalar) -> EngelConstants {
    let current = k.as_array()[index].clone();
    with_constant(k, index, current.add(delta))
}

/// The three universal consequences of d² = 0 for the template
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedRelations {
    /// r₂ = p₁q₂ + p₂ − q₂.
    pub r2_relation: bool,
    /// q₁ + q̄₁ = 0 (q₁ pure imaginary).
    pub q1_imaginary: bool,
    /// p₂ − p̄₂ = q₁(p₁ + p̄₁ − 1); writing q₁ = 2i·q₀ this says
    /// Im p₂ = q₀(p₁ + p̄₁ − 1). Stated division-free so it is exact for
    /// symbolic constants.
    pub p2_imaginary_part: bool,
}

impl DerivedRelations {
    pub fn all(&self) -> bool {
        self.r2_relation && self.q1_imaginary && self.p2_imaginary_part
    }
}

/// Check the three derived relations on a constant list.
pub fn check_derived_relations(k: &EngelConstants) -> DerivedRelations {
    let r2_relation = k
        .r2
        .sub(&k.p1.mul(&k.q2).add(&k.p2).sub(&k.q2))
        .is_zero();
    let q1_imaginary = k.q1.add(&k.q1.conjugate()).is_zero();
    let one = Scalar::one(k.table());
    let p2_imaginary_part = k
        .p2
        .sub(&k.p2.conjugate())
        .sub(&k.q1.mul(&k.p1.add(&k.p1.conjugate()).sub(&one)))
        .is_zero();
    DerivedRelations {
        r2_relation,
        q1_imaginary,
        p2_imaginary_part,
    }
}

/// The table of six free conjugate-pair constants used for the generic
/// residue system.
pub fn generic_table() -> Arc<SymbolTable> {
    let mut b = SymbolTable::builder();
    for name in EngelConstants::NAMES {
        b.pair(name, &format!("{name}bar")).expect("fresh builder");
    }
    b.build()
}

/// The template constants as free symbols over [`generic_table`].
pub fn generic_constants(table: &Arc<SymbolTable>) -> Result<EngelConstants> {
    Ok(EngelConstants {
        p1: Scalar::symbol_named(table, "p1")?,
        p2: Scalar::symbol_named(table, "p2")?,
        q1: Scalar::symbol_named(table, "q1")?,
        q2: Scalar::symbol_named(table, "q2")?,
        r1: Scalar::symbol_named(table, "r1")?,
        r2: Scalar::symbol_named(table, "r2")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Binding, FamilyName, FAMILIES};
    use crate::scalar::GaussianRational;
    use num::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn zero_constants_satisfy_d2() {
        let t = SymbolTable::empty();
        assert!(verify_constants(&EngelConstants::zero(&t)));
    }

    #[test]
    fn all_six_families_satisfy_d2_symbolically() {
        for name in FAMILIES {
            let id = FamilyId::symbolic(name);
            assert!(verify_family(&id).unwrap(), "{name}");
        }
    }

    #[test]
    fn lone_p2_constant_violates_d2() {
        // Constants (0, 1, 0, 0, 0, 0). Hand expansion:
        // dω₁ = ω₁∧ω₂, dω₂ = ω₁∧ω̄₁ − ω₂∧ω̄₁ − ω̄₂∧ω₂, so
        // d(dω₁) = −ω₁∧dω₂ = −ω₁∧ω̄₁∧ω₂ − ω₁∧ω₂∧ω̄₂.
        let t = SymbolTable::empty();
        let mut k = EngelConstants::zero(&t);
        k.p2 = Scalar::one(&t);
        let sys = d2_residues(&CoframeModel::from_constants(&k));
        assert!(!sys.all_zero());
        let w1_entries: Vec<_> = sys
            .entries()
            .iter()
            .filter(|e| e.generator == Generator::W1)
            .collect();
        let minus_one = Scalar::one(&t).neg();
        assert_eq!(w1_entries[0].monomial, 0b0111);
        assert_eq!(w1_entries[0].residue, minus_one);
        assert_eq!(w1_entries[2].monomial, 0b1101);
        assert_eq!(w1_entries[2].residue, minus_one);
        assert!(w1_entries[1].residue.is_zero());
        assert!(w1_entries[3].residue.is_zero());
    }

    #[test]
    fn single_constant_mutations_break_every_family() {
        // The one exception is the first family's p₁: adding 1 lands on the
        // same family with its parameter shifted, so it must remain a
        // solution (see the next test).
        for name in FAMILIES {
            let t = name.standard_table();
            let k = name.constants(&t).unwrap();
            for idx in 0..6 {
                if name == FamilyName::C1 && idx == 0 {
                    continue;
                }
                let bad = perturb(&k, idx, &Scalar::one(&t));
                assert!(
                    !verify_constants(&bad),
                    "{name} stayed a solution after bumping {}",
                    EngelConstants::NAMES[idx]
                );
            }
        }
    }

    #[test]
    fn first_family_p1_bump_is_a_parameter_shift() {
        // p₁ = a+ib is the only nonzero constant, so +1 is exactly the
        // reparametrization a ↦ a+1: an equivalent mutant, provably.
        let t = FamilyName::C1.standard_table();
        let k = FamilyName::C1.constants(&t).unwrap();
        let mutant = perturb(&k, 0, &Scalar::one(&t));
        assert!(verify_constants(&mutant));
        let mut bind = BTreeMap::new();
        bind.insert(
            "a".to_string(),
            Scalar::symbol_named(&t, "a").unwrap().add(&Scalar::one(&t)),
        );
        bind.insert("b".to_string(), Scalar::symbol_named(&t, "b").unwrap());
        let shifted = k.substitute(&bind, &t).unwrap();
        assert_eq!(mutant, shifted);
    }

    #[test]
    fn replacing_imaginary_q1_with_real_breaks_second_family() {
        let t = FamilyName::C2.standard_table();
        let k = FamilyName::C2.constants(&t).unwrap();
        let bad = with_constant(&k, 2, Scalar::parse("2*a", &t).unwrap());
        assert!(!verify_constants(&bad));
    }

    #[test]
    fn bumping_r2_breaks_third_family() {
        let t = FamilyName::C3.standard_table();
        let k = FamilyName::C3.constants(&t).unwrap();
        let bad = perturb(&k, 5, &Scalar::one(&t));
        assert!(!verify_constants(&bad));
    }

    #[test]
    fn derived_relations_hold_for_all_families() {
        for name in FAMILIES {
            let t = name.standard_table();
            let k = name.constants(&t).unwrap();
            let rel = check_derived_relations(&k);
            assert!(rel.all(), "{name}: {rel:?}");
        }
    }

    #[test]
    fn third_family_r2_identity_is_exact() {
        // r₂ − (p₁q₂ + p₂ − q₂)
        //   = (b²+¼)(2a+ib) − (½−ib−1)·½(2b+i)(2ia−b) = 0,
        // reducing via (2b+i)(½+ib) = i(2b²+½).
        let t = FamilyName::C3.standard_table();
        let k = FamilyName::C3.constants(&t).unwrap();
        let lhs = k.r2.sub(&k.p1.mul(&k.q2).add(&k.p2).sub(&k.q2));
        assert!(lhs.is_zero());
        let aux = Scalar::parse("(2*b + i)*(1/2 + i*b) - i*(2*b^2 + 1/2)", &t).unwrap();
        assert!(aux.is_zero());
    }

    #[test]
    fn imaginary_p2_without_q1_fails_the_relation() {
        let t = SymbolTable::empty();
        let mut k = EngelConstants::zero(&t);
        k.p2 = Scalar::i(&t);
        let rel = check_derived_relations(&k);
        assert!(rel.q1_imaginary);
        assert!(!rel.p2_imaginary_part);
        assert!(!rel.r2_relation);
    }

    #[test]
    fn generic_residues_match_frozen_fixture() {
        let t = generic_table();
        let k = generic_constants(&t).unwrap();
        let sys = d2_residues(&CoframeModel::from_constants(&k));
        let rendered = sys.to_string();
        let path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/d2_residues_generic.txt"
        );
        if std::env::var_os("ENGEL_REGEN_FIXTURES").is_some() {
            std::fs::write(path, &rendered).unwrap();
        }
        let frozen = std::fs::read_to_string(path).expect("fixture present");
        assert_eq!(rendered, frozen);
    }

    #[test]
    fn families_are_points_of_the_generic_system() {
        // Substituting each family's constants into the generic residues
        // yields zero, tying the frozen system to the per-family checks.
        let gt = generic_table();
        let gk = generic_constants(&gt).unwrap();
        let sys = d2_residues(&CoframeModel::from_constants(&gk));
        for name in FAMILIES {
            let ft = name.standard_table();
            let fk = name.constants(&ft).unwrap();
            let mut bind = BTreeMap::new();
            for (cname, value) in EngelConstants::NAMES.iter().zip(fk.as_array()) {
                bind.insert(cname.to_string(), value.clone());
            }
            for e in sys.entries() {
                let image = e.residue.substitute(&bind, &ft).unwrap();
                assert!(
                    image.is_zero(),
                    "{name}: residue d2({}) [{}] nonzero after substitution",
                    e.generator.name(),
                    mask_name(e.monomial)
                );
            }
        }
    }

    #[test]
    fn residues_commute_with_point_instantiation() {
        // Spot-check at fixed rational points (the randomized 50-point
        // version lives in the property suite).
        let pts = [(rat(2, 3), rat(-1, 7)), (rat(0, 1), rat(5, 2))];
        for name in [FamilyName::C3, FamilyName::C5] {
            let sym = d2_residues(&FamilyId::symbolic(name).model().unwrap());
            for (a, b) in &pts {
                let id = FamilyId::new(
                    name,
                    Binding::Rational {
                        a: a.clone(),
                        b: b.clone(),
                    },
                )
                .unwrap();
                let inst = d2_residues(&id.model().unwrap());
                let mut bind = BTreeMap::new();
                bind.insert(
                    "a".to_string(),
                    GaussianRational::from_rational(a.clone()),
                );
                bind.insert(
                    "b".to_string(),
                    GaussianRational::from_rational(b.clone()),
                );
                let evaluated = sym.eval(&bind, None).unwrap();
                for (e, v) in inst.entries().iter().zip(evaluated) {
                    assert_eq!(e.residue.as_constant().unwrap(), v);
                }
            }
        }
    }
}
