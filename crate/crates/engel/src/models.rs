//! Coframe models: the canonical structure-equation template built from six
//! complex constants, the six named homogeneous families, complex linear
//! basis changes on {ω₁, ω₂}, and the model JSON file format.
//!
//! The template is
//!
//! ```text
//! dω₁ = −(p₁ω₁ + p₂ω₂ + q̄₁ω̄₁ + q̄₂ω̄₂)∧ω₁ − (q₂ω₁ + r̄₁ω̄₁ + r̄₂ω̄₂)∧ω₂
//! dω₂ = (ω₁ − ω₂)∧ω̄₁ − (p₁ω₁ + p₂ω₂ + p̄₁ω̄₁ + p̄₂ω̄₂)∧ω₂
//! ```
//!
//! and dω̄ᵢ is the conjugate of dωᵢ, so every model built here is
//! conjugation-closed by construction.
//!
//! # Design Notes
//!
//! The six family constant lists are stored as parse strings over the
//! family's standard symbol table (reals `a`, `b`; the sixth family swaps
//! `a` for a circle pair `cos_a`, `sin_a`). This keeps the transcription
//! auditable character by character and defers all arithmetic to the exact
//! scalar ring. Numeric instantiation goes through [`Scalar::substitute`],
//! which enforces conjugate consistency and the circle relation; the circle
//! point itself comes from a rational parameter t via
//! (cos, sin) = ((1−t²)/(1+t²), 2t/(1+t²)).

use crate::error::{Error, Result};
use crate::exterior::{Form, Generator};
use crate::scalar::{GaussianRational, Scalar, SymbolKind, SymbolTable};
use num::{BigRational, One};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// The six constants of the canonical structure equation (conjugates are
/// derived, not stored).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngelConstants {
    pub p1: Scalar,
    pub p2: Scalar,
    pub q1: Scalar,
    pub q2: Scalar,
    pub r1: Scalar,
    pub r2: Scalar,
}

impl EngelConstants {
    pub fn table(&self) -> &Arc<SymbolTable> {
        self.p1.table()
    }

    /// All six constants in the fixed order p1, p2, q1, q2, r1, r2.
    pub fn as_array(&self) -> [&Scalar; 6] {
        [&self.p1, &self.p2, &self.q1, &self.q2, &self.r1, &self.r2]
    }

    pub const NAMES: [&'static str; 6] = ["p1", "p2", "q1", "q2", "r1", "r2"];

    /// Zero constants over a table.
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        let z = Scalar::zero(table);
        Self {
            p1: z.clone(),
            p2: z.clone(),
            q1: z.clone(),
            q2: z.clone(),
            r1: z.clone(),
            r2: z,
        }
    }

    /// Substitute symbols in all six constants (see [`Scalar::substitute`]).
    pub fn substitute(
        &self,
        bindings: &BTreeMap<String, Scalar>,
        target: &Arc<SymbolTable>,
    ) -> Result<Self> {
        Ok(Self {
            p1: self.p1.substitute(bindings, target)?,
            p2: self.p2.substitute(bindings, target)?,
            q1: self.q1.substitute(bindings, target)?,
            q2: self.q2.substitute(bindings, target)?,
            r1: self.r1.substitute(bindings, target)?,
            r2: self.r2.substitute(bindings, target)?,
        })
    }
}

/// A coframing model: the four generator differentials, closed under
/// conjugation (d_w1bar = conjugate of d_w1, likewise for w2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoframeModel {
    table: Arc<SymbolTable>,
    /// Indexed by `Generator::index()`.
    d: [Form; 4],
}

impl CoframeModel {
    /// Build the canonical structure-equation template from six constants.
    pub fn from_constants(k: &EngelConstants) -> Self {
        let t = k.table();
        let w1 = Form::generator(t, Generator::W1);
        let w1b = Form::generator(t, Generator::W1Bar);
        let w2 = Form::generator(t, Generator::W2);
        let w2b = Form::generator(t, Generator::W2Bar);

        let first = w1
            .scale(&k.p1)
            .add(&w2.scale(&k.p2))
            .add(&w1b.scale(&k.q1.conjugate()))
            .add(&w2b.scale(&k.q2.conjugate()));
        let second = w1
            .scale(&k.q2)
            .add(&w1b.scale(&k.r1.conjugate()))
            .add(&w2b.scale(&k.r2.conjugate()));
        let d1 = first.wedge(&w1).neg().sub(&second.wedge(&w2));

        let third = w1
            .scale(&k.p1)
            .add(&w2.scale(&k.p2))
            .add(&w1b.scale(&k.p1.conjugate()))
            .add(&w2b.scale(&k.p2.conjugate()));
        let d2 = w1.sub(&w2).wedge(&w1b).sub(&third.wedge(&w2));

        let d1b = d1.conjugate();
        let d2b = d2.conjugate();
        Self {
            table: t.clone(),
            d: [d1, d1b, d2, d2b],
        }
    }

    /// Build a model from explicit dω₁ and dω₂ (the barred differentials are
    /// derived by conjugation). Both must be homogeneous of degree 2.
    pub fn from_d1_d2(d1: Form, d2: Form) -> Result<Self> {
        if !d1.is_homogeneous(2) || !d2.is_homogeneous(2) {
            return Err(Error::Usage(
                "generator differentials must be 2-forms".to_string(),
            ));
        }
        let table = d1.table().clone();
        let d1b = d1.conjugate();
        let d2b = d2.conjugate();
        Ok(Self {
            table,
            d: [d1, d1b, d2, d2b],
        })
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    /// d of a single generator.
    pub fn d_generator(&self, g: Generator) -> &Form {
        &self.d[g.index()]
    }

    pub fn differentials(&self) -> &[Form; 4] {
        &self.d
    }

    /// Exterior derivative of an arbitrary form in this model.
    pub fn d(&self, f: &Form) -> Form {
        f.d(&self.d)
    }

    /// Substitute symbols in all four differentials.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<String, Scalar>,
        target: &Arc<SymbolTable>,
    ) -> Result<Self> {
        let map = |f: &Form| -> Result<Form> {
            let mut out = Form::zero(target);
            for (mask, c) in f.terms() {
                let mut mono = Form::zero(target);
                // Rebuild the monomial over the target table.
                let gens = crate::exterior::mask_generators(mask);
                let mut one = Form::from_scalar(Scalar::one(target));
                for g in gens {
                    one = one.wedge(&Form::generator(target, g));
                }
                mono = mono.add(&one.scale(&c.substitute(bindings, target)?));
                out = out.add(&mono);
            }
            Ok(out)
        };
        Ok(Self {
            table: target.clone(),
            d: [
                map(&self.d[0])?,
                map(&self.d[1])?,
                map(&self.d[2])?,
                map(&self.d[3])?,
            ],
        })
    }
}

/// The six named homogeneous families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyName {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

pub const FAMILIES: [FamilyName; 6] = [
    FamilyName::C1,
    FamilyName::C2,
    FamilyName::C3,
    FamilyName::C4,
    FamilyName::C5,
    FamilyName::C6,
];

impl FamilyName {
    pub fn name(self) -> &'static str {
        match self {
            FamilyName::C1 => "C1",
            FamilyName::C2 => "C2",
            FamilyName::C3 => "C3",
            FamilyName::C4 => "C4",
            FamilyName::C5 => "C5",
            FamilyName::C6 => "C6",
        }
    }

    pub fn from_name(s: &str) -> Result<FamilyName> {
        match s {
            "C1" | "c1" => Ok(FamilyName::C1),
            "C2" | "c2" => Ok(FamilyName::C2),
            "C3" | "c3" => Ok(FamilyName::C3),
            "C4" | "c4" => Ok(FamilyName::C4),
            "C5" | "c5" => Ok(FamilyName::C5),
            "C6" | "c6" => Ok(FamilyName::C6),
            _ => Err(Error::Usage(format!(
                "unknown family `{s}` (expected C1..C6)"
            ))),
        }
    }

    /// The standard symbol table for the family: reals `a` and `b`, except
    /// the sixth family which replaces `a` with the circle pair
    /// (`cos_a`, `sin_a`).
    pub fn standard_table(self) -> Arc<SymbolTable> {
        let mut b = SymbolTable::builder();
        match self {
            FamilyName::C6 => {
                b.circle("cos_a", "sin_a").expect("fresh builder");
                b.real("b").expect("fresh builder");
            }
            _ => {
                b.real("a").expect("fresh builder");
                b.real("b").expect("fresh builder");
            }
        }
        b.build()
    }

    /// The family's constant list over the given table, which must contain
    /// the required parameter symbols with the right kinds (`a`, `b` real;
    /// for the sixth family `b` real plus the circle pair `cos_a`/`sin_a`).
    pub fn constants(self, table: &Arc<SymbolTable>) -> Result<EngelConstants> {
        match self {
            FamilyName::C6 => {
                let c = table
                    .index("cos_a")
                    .ok_or_else(|| Error::UnknownSymbol("cos_a".to_string()))?;
                match table.kind(c) {
                    SymbolKind::CircleCos { sin } if table.name(sin) == "sin_a" => {}
                    _ => {
                        return Err(Error::BadSymbolTable(
                            "`cos_a`/`sin_a` must be a circle pair".to_string(),
                        ))
                    }
                }
                require_real(table, "b")?;
            }
            _ => {
                require_real(table, "a")?;
                require_real(table, "b")?;
            }
        }
        let strings = self.constant_strings();
        Ok(EngelConstants {
            p1: Scalar::parse(strings[0], table)?,
            p2: Scalar::parse(strings[1], table)?,
            q1: Scalar::parse(strings[2], table)?,
            q2: Scalar::parse(strings[3], table)?,
            r1: Scalar::parse(strings[4], table)?,
            r2: Scalar::parse(strings[5], table)?,
        })
    }

    /// The constant list as parse strings (p1, p2, q1, q2, r1, r2).
    pub fn constant_strings(self) -> [&'static str; 6] {
        match self {
            FamilyName::C1 => ["a + i*b", "0", "0", "0", "0", "0"],
            FamilyName::C2 => ["1/2 + i*b", "0", "2*i*a", "0", "0", "0"],
            FamilyName::C3 => [
                "1/2 - i*b",
                "0",
                "2*i*b",
                "1/2*(2*b + i)*(2*i*a - b)",
                "2*b^2 - i*b",
                "(b^2 + 1/4)*(2*a + i*b)",
            ],
            FamilyName::C4 => ["0", "a - i*b", "2*i*b", "a - i*b", "-a - i*b", "0"],
            FamilyName::C5 => [
                "a*(1 - 2*i*b)",
                "1/4*(2*a - 1)*(2*b + i)^2",
                "2*i*b",
                "-1/4*(2*b + i)^2",
                "-1/4*(2*b + 4*a*b + i*(2*a - 1))*(-2*b + i)",
                "1/4*a*(-1 + 2*b*i)*(1 + 4*b^2)",
            ],
            FamilyName::C6 => [
                "1/2*(cos_a + i*sin_a)*(2*b + i)",
                "1/4*(-sin_a + 2*b*cos_a - 1)*(2*b + i)^2",
                "2*i*b",
                "-1/8*(2*i*b*sin_a + i*cos_a - 2*b*cos_a - 2*i*b + sin_a + 1)*(2*b + i)^2",
                "1/4*(1 + 2*b*i)*(2*i*b*sin_a + i*cos_a + 2*b*cos_a - 2*i*b - sin_a - 1)",
                "1/16*(1 + 4*b^2)*(-1 + 2*i*b)*(2*i*b*sin_a + i*cos_a + 2*b*cos_a - 2*i*b - sin_a - 1)",
            ],
        }
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn require_real(table: &Arc<SymbolTable>, name: &str) -> Result<()> {
    let idx = table
        .index(name)
        .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
    if table.kind(idx) != SymbolKind::Real {
        return Err(Error::BadSymbolTable(format!("`{name}` must be real")));
    }
    Ok(())
}

/// Parameter values for instantiating a family at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// Keep the parameters symbolic (the standard table).
    Symbolic,
    /// Rational values for `a` and `b` (first five families).
    Rational { a: BigRational, b: BigRational },
    /// Rational circle parameter t with
    /// (cos, sin) = ((1−t²)/(1+t²), 2t/(1+t²)), plus rational `b`
    /// (sixth family only).
    Circle { t: BigRational, b: BigRational },
}

/// A family together with a parameter binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyId {
    pub name: FamilyName,
    pub binding: Binding,
}

/// The exact rational point ((1−t²)/(1+t²), 2t/(1+t²)) on the unit circle.
pub fn circle_point(t: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let t2 = t * t;
    let den = &one + &t2;
    ((&one - &t2) / &den, (t + t) / &den)
}

impl FamilyId {
    pub fn new(name: FamilyName, binding: Binding) -> Result<Self> {
        match (&name, &binding) {
            (FamilyName::C6, Binding::Rational { .. }) => Err(Error::Usage(
                "the sixth family binds its first parameter through the circle \
                 parameter t, not directly"
                    .to_string(),
            )),
            (FamilyName::C6, _) => Ok(Self { name, binding }),
            (_, Binding::Circle { .. }) => Err(Error::Usage(
                "the circle parameter t applies only to the sixth family".to_string(),
            )),
            _ => Ok(Self { name, binding }),
        }
    }

    pub fn symbolic(name: FamilyName) -> Self {
        Self {
            name,
            binding: Binding::Symbolic,
        }
    }

    /// The instantiated constants. Symbolic bindings live on the standard
    /// table; rational bindings produce constants over the empty table.
    pub fn constants(&self) -> Result<EngelConstants> {
        let table = self.name.standard_table();
        let sym = self.name.constants(&table)?;
        match &self.binding {
            Binding::Symbolic => Ok(sym),
            Binding::Rational { a, b } => {
                let target = SymbolTable::empty();
                let mut bind = BTreeMap::new();
                bind.insert(
                    "a".to_string(),
                    Scalar::constant(&target, GaussianRational::from_rational(a.clone())),
                );
                bind.insert(
                    "b".to_string(),
                    Scalar::constant(&target, GaussianRational::from_rational(b.clone())),
                );
                sym.substitute(&bind, &target)
            }
            Binding::Circle { t, b } => {
                let target = SymbolTable::empty();
                let (c, s) = circle_point(t);
                let mut bind = BTreeMap::new();
                bind.insert(
                    "cos_a".to_string(),
                    Scalar::constant(&target, GaussianRational::from_rational(c)),
                );
                bind.insert(
                    "sin_a".to_string(),
                    Scalar::constant(&target, GaussianRational::from_rational(s)),
                );
                bind.insert(
                    "b".to_string(),
                    Scalar::constant(&target, GaussianRational::from_rational(b.clone())),
                );
                sym.substitute(&bind, &target)
            }
        }
    }

    /// The instantiated coframe model.
    pub fn model(&self) -> Result<CoframeModel> {
        Ok(CoframeModel::from_constants(&self.constants()?))
    }
}

/// Change of basis θᵢ = Σⱼ Mᵢⱼ ωⱼ on the complex block {ω₁, ω₂} (the barred
/// block transforms by the conjugate matrix). The determinant must be a
/// nonzero constant.
pub fn transform(m: &CoframeModel, mat: &[[Scalar; 2]; 2]) -> Result<CoframeModel> {
    let t = m.table();
    let det = mat[0][0].mul(&mat[1][1]).sub(&mat[0][1].mul(&mat[1][0]));
    let det_c = det.as_constant().ok_or(Error::NonConstantDeterminant)?;
    if det_c.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let inv_det = det_c.inv();
    // N = M⁻¹, so ωᵢ = Σⱼ Nᵢⱼ θⱼ.
    let n = [
        [
            mat[1][1].scale(&inv_det),
            mat[0][1].scale(&inv_det).neg(),
        ],
        [
            mat[1][0].scale(&inv_det).neg(),
            mat[0][0].scale(&inv_det),
        ],
    ];
    let th1 = Form::generator(t, Generator::W1);
    let th2 = Form::generator(t, Generator::W2);
    let img_w1 = th1.scale(&n[0][0]).add(&th2.scale(&n[0][1]));
    let img_w2 = th1.scale(&n[1][0]).add(&th2.scale(&n[1][1]));
    let images = [
        img_w1.clone(),
        img_w1.conjugate(),
        img_w2.clone(),
        img_w2.conjugate(),
    ];
    // dθᵢ = Σⱼ Mᵢⱼ dωⱼ, re-expressed in the θ basis.
    let d_th1 = m.d_generator(Generator::W1).scale(&mat[0][0]).add(
        &m.d_generator(Generator::W2).scale(&mat[0][1]),
    );
    let d_th2 = m.d_generator(Generator::W1).scale(&mat[1][0]).add(
        &m.d_generator(Generator::W2).scale(&mat[1][1]),
    );
    CoframeModel::from_d1_d2(
        d_th1.substitute_generators(&images),
        d_th2.substitute_generators(&images),
    )
}

/// True iff the two instantiated constant lists agree as exact scalars.
/// Both sides are substituted into the shared target table first.
pub fn degeneration_check(
    f1: FamilyName,
    bind1: &BTreeMap<String, Scalar>,
    f2: FamilyName,
    bind2: &BTreeMap<String, Scalar>,
    target: &Arc<SymbolTable>,
) -> Result<bool> {
    let c1 = f1
        .constants(&f1.standard_table())?
        .substitute(bind1, target)?;
    let c2 = f2
        .constants(&f2.standard_table())?
        .substitute(bind2, target)?;
    Ok(c1 == c2)
}

/// Serialized symbol declaration in a model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<String>,
}

/// Model file: symbol declarations plus the six constants as scalar
/// expressions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub symbols: Vec<SymbolSpec>,
    pub constants: BTreeMap<String, String>,
}

/// Build a symbol table from serialized declarations.
pub fn table_from_specs(specs: &[SymbolSpec]) -> Result<Arc<SymbolTable>> {
    let mut b = SymbolTable::builder();
    for s in specs {
        match s.kind.as_str() {
            "real" => {
                b.real(&s.name)?;
            }
            "pair" => {
                let partner = s.partner.clone().ok_or_else(|| {
                    Error::BadSymbolTable(format!("pair `{}` needs a partner", s.name))
                })?;
                b.pair(&s.name, &partner)?;
            }
            "circle" => {
                let partner = s.partner.clone().ok_or_else(|| {
                    Error::BadSymbolTable(format!("circle `{}` needs a partner", s.name))
                })?;
                b.circle(&s.name, &partner)?;
            }
            other => {
                return Err(Error::BadSymbolTable(format!(
                    "unknown symbol kind `{other}` (expected real, pair, or circle)"
                )))
            }
        }
    }
    Ok(b.build())
}

/// Parse a model file (JSON text) into a table and constants.
pub fn model_from_json(json: &str) -> Result<(Arc<SymbolTable>, EngelConstants)> {
    let file: ModelFile = serde_json::from_str(json)?;
    let table = table_from_specs(&file.symbols)?;
    let get = |name: &str| -> Result<Scalar> {
        match file.constants.get(name) {
            Some(src) => Scalar::parse(src, &table),
            None => Ok(Scalar::zero(&table)),
        }
    };
    for key in file.constants.keys() {
        if !EngelConstants::NAMES.contains(&key.as_str()) {
            return Err(Error::Usage(format!(
                "unknown constant `{key}` (expected one of p1, p2, q1, q2, r1, r2)"
            )));
        }
    }
    Ok((
        table.clone(),
        EngelConstants {
            p1: get("p1")?,
            p2: get("p2")?,
            q1: get("q1")?,
            q2: get("q2")?,
            r1: get("r1")?,
            r2: get("r2")?,
        },
    ))
}

/// Serialize a table and constants to the model file JSON format.
pub fn model_to_json(constants: &EngelConstants) -> Result<String> {
    let table = constants.table();
    let mut symbols = Vec::new();
    for (idx, name) in table.names().enumerate() {
        match table.kind(idx) {
            SymbolKind::Real => symbols.push(SymbolSpec {
                name: name.to_string(),
                kind: "real".to_string(),
                partner: None,
            }),
            SymbolKind::ConjugatePair { partner } if partner > idx => symbols.push(SymbolSpec {
                name: name.to_string(),
                kind: "pair".to_string(),
                partner: Some(table.name(partner).to_string()),
            }),
            SymbolKind::CircleCos { sin } => symbols.push(SymbolSpec {
                name: name.to_string(),
                kind: "circle".to_string(),
                partner: Some(table.name(sin).to_string()),
            }),
            _ => {}
        }
    }
    let mut constants_map = BTreeMap::new();
    for (name, value) in EngelConstants::NAMES.iter().zip(constants.as_array()) {
        constants_map.insert(name.to_string(), value.to_string());
    }
    let file = ModelFile {
        symbols,
        constants: constants_map,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::VOLUME;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn form(src: &str, table: &Arc<SymbolTable>) -> Form {
        // Tiny helper: src is a sum of `coeff;gen,gen` chunks separated by
        // `|`, e.g. "a + i*b;w1,w2 | -1;w1bar,w2".
        let mut acc = Form::zero(table);
        for chunk in src.split('|') {
            let (coeff, gens) = chunk.split_once(';').expect("chunk has `;`");
            let c = Scalar::parse(coeff.trim(), table).expect("coefficient parses");
            let gens: Vec<Generator> = gens
                .trim()
                .split(',')
                .map(|g| Generator::from_name(g.trim()).expect("generator name"))
                .collect();
            acc = acc.add(&Form::from_monomial(c, &gens));
        }
        acc
    }

    #[test]
    fn zero_constants_give_minimal_structure() {
        let t = SymbolTable::empty();
        let m = CoframeModel::from_constants(&EngelConstants::zero(&t));
        assert!(m.d_generator(Generator::W1).is_zero());
        let expected = form("1;w1,w1bar | -1;w2,w1bar", &t);
        assert_eq!(*m.d_generator(Generator::W2), expected);
    }

    #[test]
    fn first_family_template_matches_display() {
        let name = FamilyName::C1;
        let t = name.standard_table();
        let m = CoframeModel::from_constants(&name.constants(&t).unwrap());
        assert!(m.d_generator(Generator::W1).is_zero());
        // dω₂ = (ω₁−ω₂)∧ω̄₁ − ((a+ib)ω₁ + (a−ib)ω̄₁)∧ω₂
        let expected = form(
            "1;w1,w1bar | -1;w2,w1bar | -(a + i*b);w1,w2 | -(a - i*b);w1bar,w2",
            &t,
        );
        assert_eq!(*m.d_generator(Generator::W2), expected);
    }

    #[test]
    fn fourth_family_template_matches_display() {
        let name = FamilyName::C4;
        let t = name.standard_table();
        let m = CoframeModel::from_constants(&name.constants(&t).unwrap());
        // dω₁ = 2ib ω̄₁∧ω₁ − (a+ib) ω̄₂∧ω₁ + (a−ib) ω̄₁∧ω₂
        let d1 = form(
            "2*i*b;w1bar,w1 | -(a + i*b);w2bar,w1 | a - i*b;w1bar,w2",
            &t,
        );
        assert_eq!(*m.d_generator(Generator::W1), d1);
        // dω₂ = (ω₁−ω₂)∧ω̄₁ − (a+ib) ω̄₂∧ω₂
        let d2 = form(
            "1;w1,w1bar | -1;w2,w1bar | -(a + i*b);w2bar,w2",
            &t,
        );
        assert_eq!(*m.d_generator(Generator::W2), d2);
    }

    #[test]
    fn third_family_template_matches_display() {
        let name = FamilyName::C3;
        let t = name.standard_table();
        let m = CoframeModel::from_constants(&name.constants(&t).unwrap());
        // dω₁ = −[−2ib ω̄₁ + ½(2b−i)(−2ia−b) ω̄₂]∧ω₁
        //       −[½(2b+i)(2ia−b) ω₁ + (2b²+ib) ω̄₁ + (b²+¼)(2a−ib) ω̄₂]∧ω₂
        let d1a = form("-(-2*i*b);w1bar,w1 | -(1/2*(2*b - i)*(-2*i*a - b));w2bar,w1", &t);
        let d1b = form(
            "-(1/2*(2*b + i)*(2*i*a - b));w1,w2 | -(2*b^2 + i*b);w1bar,w2 \
             | -((b^2 + 1/4)*(2*a - i*b));w2bar,w2",
            &t,
        );
        assert_eq!(*m.d_generator(Generator::W1), d1a.add(&d1b));
        // dω₂ = ω₁∧ω̄₁ − (½−ib)(ω₁−ω̄₁)∧ω₂
        let d2 = form(
            "1;w1,w1bar | -(1/2 - i*b);w1,w2 | 1/2 - i*b;w1bar,w2",
            &t,
        );
        assert_eq!(*m.d_generator(Generator::W2), d2);
    }

    #[test]
    fn third_family_theta_differential() {
        // d(ω₁ + (−½+ib)ω₂)
        //   = [(½+ib)(ω̄₁ + (2a−ib)ω̄₂) − (½+2a)ω₁]∧(ω₁ + (−½+ib)ω₂)
        let name = FamilyName::C3;
        let t = name.standard_table();
        let m = CoframeModel::from_constants(&name.constants(&t).unwrap());
        let w1 = Form::generator(&t, Generator::W1);
        let w2 = Form::generator(&t, Generator::W2);
        let theta = w1.add(&w2.scale(&Scalar::parse("-1/2 + i*b", &t).unwrap()));
        let lhs = m
            .d_generator(Generator::W1)
            .add(&m.d_generator(Generator::W2).scale(&Scalar::parse("-1/2 + i*b", &t).unwrap()));
        let factor = Form::generator(&t, Generator::W1Bar)
            .add(&Form::generator(&t, Generator::W2Bar).scale(&Scalar::parse("2*a - i*b", &t).unwrap()))
            .scale(&Scalar::parse("1/2 + i*b", &t).unwrap())
            .sub(&w1.scale(&Scalar::parse("1/2 + 2*a", &t).unwrap()));
        assert_eq!(lhs, factor.wedge(&theta));
    }

    #[test]
    fn all_families_are_conjugation_closed() {
        for name in FAMILIES {
            let t = name.standard_table();
            let m = CoframeModel::from_constants(&name.constants(&t).unwrap());
            assert_eq!(
                *m.d_generator(Generator::W1Bar),
                m.d_generator(Generator::W1).conjugate(),
                "{name}"
            );
            assert_eq!(
                *m.d_generator(Generator::W2Bar),
                m.d_generator(Generator::W2).conjugate(),
                "{name}"
            );
        }
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let t = FamilyName::C3.standard_table();
        let m = CoframeModel::from_constants(&FamilyName::C3.constants(&t).unwrap());
        let one = Scalar::one(&t);
        let zero = Scalar::zero(&t);
        let id = [[one.clone(), zero.clone()], [zero, one]];
        assert_eq!(transform(&m, &id).unwrap(), m);
    }

    #[test]
    fn transform_round_trips_through_the_inverse() {
        let t = FamilyName::C5.standard_table();
        let m = CoframeModel::from_constants(&FamilyName::C5.constants(&t).unwrap());
        // θ₁ = ω₁ + (−½+ib)ω₂, θ₂ = ω₂ has constant determinant 1; its
        // inverse sends θ back.
        let mat = [
            [Scalar::one(&t), Scalar::parse("-1/2 + i*b", &t).unwrap()],
            [Scalar::zero(&t), Scalar::one(&t)],
        ];
        let inv = [
            [Scalar::one(&t), Scalar::parse("1/2 - i*b", &t).unwrap()],
            [Scalar::zero(&t), Scalar::one(&t)],
        ];
        let there = transform(&m, &mat).unwrap();
        let back = transform(&there, &inv).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn first_family_special_point_has_compact_normal_form() {
        // At (a, b) = (½, 0): θ₁ = −ω₁, θ₂ = ω₁ − ½ω₂ gives dθ₁ = 0 and
        // dθ₂ = ½(θ₁ − θ̄₁)∧θ₂.
        let id = FamilyId::new(
            FamilyName::C1,
            Binding::Rational {
                a: rat(1, 2),
                b: rat(0, 1),
            },
        )
        .unwrap();
        let m = id.model().unwrap();
        let t = m.table().clone();
        let mat = [
            [Scalar::from_int(&t, -1), Scalar::zero(&t)],
            [Scalar::one(&t), Scalar::from_ratio(&t, -1, 2)],
        ];
        let mt = transform(&m, &mat).unwrap();
        assert!(mt.d_generator(Generator::W1).is_zero());
        let expected = form("1/2;w1,w2 | -1/2;w1bar,w2", &t);
        assert_eq!(*mt.d_generator(Generator::W2), expected);
    }

    #[test]
    fn singular_transform_is_rejected() {
        let t = FamilyName::C1.standard_table();
        let m = CoframeModel::from_constants(&FamilyName::C1.constants(&t).unwrap());
        let mat = [
            [Scalar::one(&t), Scalar::one(&t)],
            [Scalar::one(&t), Scalar::one(&t)],
        ];
        assert!(matches!(transform(&m, &mat), Err(Error::SingularMatrix)));
        let sym = [
            [Scalar::symbol_named(&t, "a").unwrap(), Scalar::zero(&t)],
            [Scalar::zero(&t), Scalar::one(&t)],
        ];
        assert!(matches!(
            transform(&m, &sym),
            Err(Error::NonConstantDeterminant)
        ));
    }

    #[test]
    fn sixth_family_at_south_pole_degenerates_to_third_family() {
        // (cos, sin) = (0, −1), b symbolic, against the third family at
        // a = b².
        let mut target_b = SymbolTable::builder();
        target_b.real("b").unwrap();
        let target = target_b.build();
        let b_sym = Scalar::symbol_named(&target, "b").unwrap();
        let mut bind6 = BTreeMap::new();
        bind6.insert("cos_a".to_string(), Scalar::zero(&target));
        bind6.insert("sin_a".to_string(), Scalar::from_int(&target, -1));
        bind6.insert("b".to_string(), b_sym.clone());
        let mut bind3 = BTreeMap::new();
        bind3.insert("a".to_string(), b_sym.mul(&b_sym));
        bind3.insert("b".to_string(), b_sym.clone());
        assert!(degeneration_check(
            FamilyName::C6,
            &bind6,
            FamilyName::C3,
            &bind3,
            &target
        )
        .unwrap());
        // A generic circle point does not degenerate.
        let mut bind6_off = bind6.clone();
        bind6_off.insert("cos_a".to_string(), Scalar::from_ratio(&target, 3, 5));
        bind6_off.insert("sin_a".to_string(), Scalar::from_ratio(&target, 4, 5));
        assert!(!degeneration_check(
            FamilyName::C6,
            &bind6_off,
            FamilyName::C3,
            &bind3,
            &target
        )
        .unwrap());
    }

    #[test]
    fn fifth_family_at_zero_degenerates_to_fourth_family() {
        // a = 0 against the fourth family at a = ¼ − b², b shared symbolic.
        let mut target_b = SymbolTable::builder();
        target_b.real("b").unwrap();
        let target = target_b.build();
        let b_sym = Scalar::symbol_named(&target, "b").unwrap();
        let mut bind5 = BTreeMap::new();
        bind5.insert("a".to_string(), Scalar::zero(&target));
        bind5.insert("b".to_string(), b_sym.clone());
        let mut bind4 = BTreeMap::new();
        bind4.insert(
            "a".to_string(),
            Scalar::from_ratio(&target, 1, 4).sub(&b_sym.mul(&b_sym)),
        );
        bind4.insert("b".to_string(), b_sym.clone());
        assert!(degeneration_check(
            FamilyName::C5,
            &bind5,
            FamilyName::C4,
            &bind4,
            &target
        )
        .unwrap());
    }

    #[test]
    fn fourth_family_at_origin_degenerates_to_first_family() {
        let target = SymbolTable::empty();
        let zero = Scalar::zero(&target);
        let mut bind = BTreeMap::new();
        bind.insert("a".to_string(), zero.clone());
        bind.insert("b".to_string(), zero);
        assert!(degeneration_check(
            FamilyName::C4,
            &bind,
            FamilyName::C1,
            &bind.clone(),
            &target
        )
        .unwrap());
    }

    #[test]
    fn model_json_round_trips() {
        let t = FamilyName::C3.standard_table();
        let k = FamilyName::C3.constants(&t).unwrap();
        let json = model_to_json(&k).unwrap();
        let (t2, k2) = model_from_json(&json).unwrap();
        assert_eq!(
            t.names().collect::<Vec<_>>(),
            t2.names().collect::<Vec<_>>()
        );
        for (a, b) in k.as_array().iter().zip(k2.as_array()) {
            assert_eq!(a.to_string(), b.to_string());
        }
    }

    #[test]
    fn sixth_family_rejects_direct_numeric_first_parameter() {
        assert!(FamilyId::new(
            FamilyName::C6,
            Binding::Rational {
                a: rat(1, 1),
                b: rat(0, 1)
            }
        )
        .is_err());
        assert!(FamilyId::new(
            FamilyName::C1,
            Binding::Circle {
                t: rat(1, 1),
                b: rat(0, 1)
            }
        )
        .is_err());
    }

    #[test]
    fn circle_point_lies_on_the_unit_circle() {
        let (c, s) = circle_point(&rat(-1, 1));
        assert_eq!(c, rat(0, 1));
        assert_eq!(s, rat(-1, 1));
        let (c, s) = circle_point(&rat(1, 2));
        assert_eq!(&c * &c + &s * &s, BigRational::one());
    }

    #[test]
    fn volume_is_not_annihilated_by_template() {
        // Sanity: the template keeps ω₁∧ω̄₁∧ω₂∧ω̄₂ a genuine volume class
        // carrier (its d is zero for degree reasons).
        let t = FamilyName::C2.standard_table();
        let m = CoframeModel::from_constants(&FamilyName::C2.constants(&t).unwrap());
        let mut vol = Form::zero(&t);
        vol = vol.add(&Form::from_monomial(
            Scalar::one(&t),
            &[
                Generator::W1,
                Generator::W1Bar,
                Generator::W2,
                Generator::W2Bar,
            ],
        ));
        assert_eq!(vol.coefficient(VOLUME), Scalar::one(&t));
        assert!(m.d(&vol).is_zero());
    }
}
