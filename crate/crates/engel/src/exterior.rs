//! Graded exterior algebra over the four coframe generators
//! ω₁, ω̄₁, ω₂, ω̄₂ with [`Scalar`] coefficients.
//!
//! Monomials are subsets of generators in the fixed order
//! w1 < w1bar < w2 < w2bar, encoded as 4-bit masks. The canonical volume
//! monomial is ω₁∧ω̄₁∧ω₂∧ω̄₂ (all four bits). Coefficients are constants
//! on the manifold (parameter polynomials), so the exterior derivative is
//! determined by the generator differentials alone via the graded Leibniz
//! rule.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, SymbolTable};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Coframe generators in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    W1 = 0,
    W1Bar = 1,
    W2 = 2,
    W2Bar = 3,
}

pub const GENERATORS: [Generator; 4] =
    [Generator::W1, Generator::W1Bar, Generator::W2, Generator::W2Bar];

impl Generator {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Generator {
        GENERATORS[i]
    }

    pub fn conj(self) -> Generator {
        match self {
            Generator::W1 => Generator::W1Bar,
            Generator::W1Bar => Generator::W1,
            Generator::W2 => Generator::W2Bar,
            Generator::W2Bar => Generator::W2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::W1 => "w1",
            Generator::W1Bar => "w1bar",
            Generator::W2 => "w2",
            Generator::W2Bar => "w2bar",
        }
    }

    pub fn from_name(name: &str) -> Result<Generator> {
        match name {
            "w1" => Ok(Generator::W1),
            "w1bar" => Ok(Generator::W1Bar),
            "w2" => Ok(Generator::W2),
            "w2bar" => Ok(Generator::W2Bar),
            _ => Err(Error::Usage(format!("unknown generator `{name}`"))),
        }
    }
}

/// Subset of generators encoded in bits 0..4.
pub type Mask = u8;

/// All four generators: the canonical volume monomial.
pub const VOLUME: Mask = 0b1111;

/// Monomial built from a list of generators (with the sign of sorting).
/// Returns None when a generator repeats.
pub fn monomial(gens: &[Generator]) -> Option<(Mask, i8)> {
    let mut mask: Mask = 0;
    let mut sign: i8 = 1;
    for (i, g) in gens.iter().enumerate() {
        let bit = 1u8 << g.index();
        if mask & bit != 0 {
            return None;
        }
        // Count already-placed generators with larger index: each is an
        // inversion relative to the sorted order.
        for h in &gens[..i] {
            if h.index() > g.index() {
                sign = -sign;
            }
        }
        mask |= bit;
    }
    Some((mask, sign))
}

pub fn mask_degree(mask: Mask) -> u32 {
    mask.count_ones()
}

pub fn mask_generators(mask: Mask) -> Vec<Generator> {
    (0..4)
        .filter(|i| mask & (1 << i) != 0)
        .map(Generator::from_index)
        .collect()
}

pub fn mask_name(mask: Mask) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    mask_generators(mask)
        .iter()
        .map(|g| g.name())
        .collect::<Vec<_>>()
        .join("^")
}

/// Sign of wedging two disjoint sorted monomials: (−1)^inversions with an
/// inversion for each pair (x ∈ a, y ∈ b), x > y.
fn merge_sign(a: Mask, b: Mask) -> i8 {
    let mut inversions = 0;
    for y in 0..4 {
        if b & (1 << y) != 0 {
            inversions += (a >> (y + 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Graded element of the exterior algebra (mixed degrees allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    table: Arc<SymbolTable>,
    terms: BTreeMap<Mask, Scalar>,
}

impl Form {
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        Self {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The scalar `c` as a 0-form.
    pub fn from_scalar(c: Scalar) -> Self {
        let table = c.table().clone();
        let mut f = Self::zero(&table);
        f.insert(0, c);
        f
    }

    /// A single generator as a 1-form.
    pub fn generator(table: &Arc<SymbolTable>, g: Generator) -> Self {
        let mut f = Self::zero(table);
        f.insert(1 << g.index(), Scalar::one(table));
        f
    }

    /// A monomial with coefficient, from an unsorted generator list.
    /// Repeated generators produce the zero form.
    pub fn from_monomial(coeff: Scalar, gens: &[Generator]) -> Self {
        let table = coeff.table().clone();
        let mut f = Self::zero(&table);
        if let Some((mask, sign)) = monomial(gens) {
            let c = if sign < 0 { coeff.neg() } else { coeff };
            f.insert(mask, c);
        }
        f
    }

    fn insert(&mut self, mask: Mask, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial (zero scalar when absent).
    pub fn coefficient(&self, mask: Mask) -> Scalar {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(&self.table))
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Scalar)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    /// True when every term has the given degree (the zero form is any
    /// degree).
    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| mask_degree(*m) == degree)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.insert(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut r = Self::zero(&self.table);
        for (m, v) in &self.terms {
            r.insert(*m, v.mul(c));
        }
        r
    }

    /// Wedge product: bilinear, associative, graded-anticommutative.
    pub fn wedge(&self, o: &Self) -> Self {
        let mut r = Self::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(*ma, *mb);
                let c = if sign < 0 {
                    ca.mul(cb).neg()
                } else {
                    ca.mul(cb)
                };
                r.insert(ma | mb, c);
            }
        }
        r
    }

    /// Conjugation: generators swapped with their bars, coefficients
    /// conjugated, and the re-sorting sign applied.
    pub fn conjugate(&self) -> Self {
        let mut r = Self::zero(&self.table);
        for (m, c) in &self.terms {
            let gens: Vec<Generator> = mask_generators(*m).iter().map(|g| g.conj()).collect();
            let (mask, sign) = monomial(&gens).expect("conjugation is a bijection on generators");
            let cc = if sign < 0 {
                c.conjugate().neg()
            } else {
                c.conjugate()
            };
            r.insert(mask, cc);
        }
        r
    }

    /// Replace each generator by a 1-form image (basis change): a monomial
    /// ζ₁∧…∧ζₖ becomes image(ζ₁)∧…∧image(ζₖ).
    pub fn substitute_generators(&self, images: &[Form; 4]) -> Self {
        let mut r = Self::zero(&self.table);
        for (m, c) in &self.terms {
            let mut acc = Self::from_scalar(c.clone());
            for g in mask_generators(*m) {
                acc = acc.wedge(&images[g.index()]);
            }
            r = r.add(&acc);
        }
        r
    }

    /// Exterior derivative with the given generator differentials
    /// (`d_gen[i]` = d of generator i, a 2-form). Coefficients are
    /// constants, so d(c·ζ₁∧…∧ζₖ) = c·Σⱼ(−1)^(j−1) dζⱼ∧(rest); moving the
    /// degree-2 dζⱼ to the front is sign-free.
    pub fn d(&self, d_gen: &[Form; 4]) -> Self {
        let mut r = Self::zero(&self.table);
        for (m, c) in &self.terms {
            let gens = mask_generators(*m);
            for (j, g) in gens.iter().enumerate() {
                let rest = m & !(1 << g.index());
                let mut rest_form = Self::zero(&self.table);
                rest_form.insert(rest, Scalar::one(&self.table));
                let term = d_gen[g.index()].wedge(&rest_form);
                let signed = if j % 2 == 1 { term.neg() } else { term };
                for (mm, cc) in &signed.terms {
                    r.insert(*mm, cc.mul(c));
                }
            }
        }
        r
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if *m == 0 {
                    format!("({c})")
                } else {
                    format!("({c})*{}", mask_name(*m))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;

    fn tbl() -> Arc<SymbolTable> {
        let mut b = SymbolTable::builder();
        b.real("a").unwrap();
        b.real("b").unwrap();
        b.build()
    }

    #[test]
    fn wedge_anticommutes_on_generators() {
        let t = tbl();
        let w1 = Form::generator(&t, Generator::W1);
        let w2 = Form::generator(&t, Generator::W2);
        assert_eq!(w1.wedge(&w2), w2.wedge(&w1).neg());
        assert!(w1.wedge(&w1).is_zero());
    }

    #[test]
    fn volume_monomial_is_canonical_order() {
        let t = tbl();
        let f = Form::from_monomial(
            Scalar::one(&t),
            &[Generator::W1, Generator::W1Bar, Generator::W2, Generator::W2Bar],
        );
        assert_eq!(f.coefficient(VOLUME), Scalar::one(&t));
        // One adjacent transposition flips the sign.
        let g = Form::from_monomial(
            Scalar::one(&t),
            &[Generator::W1, Generator::W2, Generator::W1Bar, Generator::W2Bar],
        );
        assert_eq!(g.coefficient(VOLUME), Scalar::one(&t).neg());
    }

    #[test]
    fn conjugation_is_an_involution() {
        let t = tbl();
        let a = Scalar::symbol_named(&t, "a").unwrap();
        let c = Scalar::constant(&t, GaussianRational::new(
            num::BigRational::new(1.into(), 2.into()),
            num::BigRational::new(3.into(), 1.into()),
        ));
        let f = Form::from_monomial(a.mul(&c), &[Generator::W1, Generator::W2Bar])
            .add(&Form::generator(&t, Generator::W1Bar));
        assert_eq!(f.conjugate().conjugate(), f);
    }

    #[test]
    fn conjugate_distributes_over_wedge() {
        let t = tbl();
        let f = Form::generator(&t, Generator::W1).scale(&Scalar::i(&t));
        let g = Form::generator(&t, Generator::W2Bar);
        assert_eq!(f.wedge(&g).conjugate(), f.conjugate().wedge(&g.conjugate()));
    }
}
