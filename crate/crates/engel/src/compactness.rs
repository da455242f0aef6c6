//! Compactness obstructions and co-compact lattice certificates.
//!
//! Two mechanisms decide whether a homogeneous family can have compact
//! quotients. The first is a Stokes argument: when an invariant 3-form has
//! exterior derivative equal to a nonzero constant multiple of the volume
//! form, no compact quotient exists, because an exact volume form would
//! integrate to zero over a closed manifold. [`standard_obstructions`]
//! packages such a witness per family together with the constant (the
//! *Stokes factor*) and a note describing where the factor vanishes; those
//! vanishing points are the only parameters where compact quotients can
//! occur. Independently, [`basis_three_forms_closed`] checks closedness of
//! every coframe 3-form through the torsion coefficients, which is
//! equivalent to unimodularity of the realified algebra.
//!
//! The second mechanism is constructive and specific to family C2: the
//! group scales a 3-dimensional abelian factor by a one-parameter dilation,
//! and a co-compact lattice appears when an integer matrix realizes the
//! dilation eigenvalues. [`lattice_search`] scans integer pairs (m, n),
//! attaches the companion matrix with characteristic polynomial
//! x³ − m·x² + n·x − 1, isolates its unique real eigenvalue q exactly, and
//! solves the matching condition
//!
//! ```text
//! c^(−2a + i) = λ        (λ the complex eigenvalue with Im λ > 0)
//! ```
//!
//! for the structure parameter a and the dilation constant c: comparing
//! moduli gives c^(−2a) = |λ| and comparing arguments gives
//! ln c = arg λ + 2kπ. The outcome is a [`LatticeCertificate`] which
//! [`verify_certificate`] rechecks from scratch at doubled precision.
//!
//! # Design notes
//!
//! - Everything that can be exact stays exact. The complex-pair test is an
//!   integer discriminant sign, the real eigenvalue is isolated by rational
//!   bisection with certified endpoint signs, q = 1 is excluded by the
//!   integer test m = n (x = 1 is a root exactly when m = n), and the
//!   companion matrix is integral. Only λ, a and c need transcendental
//!   arithmetic; they are carried as high-precision floats and stored as
//!   decimal strings at the declared precision, next to the exact isolating
//!   interval for q.
//! - Certificates are verified adversarially. The integral fields are
//!   recomputed exactly, the floating fields are recomputed at doubled
//!   precision and compared within 2^−(precision − 8), and the stored
//!   values must satisfy the defining identities on their own
//!   (q·|λ|² = 1, p = m − q, λ = p/2 + i·√(1/q − p²/4), and the
//!   modulus/argument matching). Tampering with any single field trips at
//!   least one check.
//! - Real eigenvalues on both sides of 1 are accepted and labeled with
//!   [`QSide`]; dilations with q > 1 and 0 < q < 1 both occur (the worked
//!   example in the tests has q ≈ 1.3247, its mirror pair q ≈ 0.7549).
//! - The scan runs in ascending (m, n) order; a parallel grid scan would
//!   sort its output to the same list, so the result is deterministic.
//! - For family C1 the translation symmetries admit three lattice
//!   patterns; [`c1_quotient_type`] labels the parameter plane accordingly.
//!   Only a = 1/2, b = 0 yields a compact quotient, and the point (1, 0)
//!   carries a separate label because the generic coordinate chart
//!   degenerates there (its coefficient 1 − a + ib vanishes).

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{Form, Generator, Mask, VOLUME};
use crate::liealg::RealLieAlgebra;
use crate::models::{CoframeModel, FamilyName};
use crate::scalar::Scalar;

/// Rounding mode used for every high-precision operation.
const RM: RoundingMode = RoundingMode::ToEven;

/// Extra working bits on top of the requested precision.
const GUARD_BITS: usize = 32;

/// Minimum certificate precision accepted by search and verification.
pub const MIN_PRECISION: usize = 64;

/// Largest coefficient magnitude accepted for m and n. Keeps the companion
/// matrix arithmetic inside i128 during verification.
const MAX_COEFF: i64 = 1 << 32;

// ---------------------------------------------------------------------------
// Stokes obstructions
// ---------------------------------------------------------------------------

/// The monomial 3-form on the given generators, in the order given (the
/// coefficient picks up the sign of sorting).
pub fn witness_form(model: &CoframeModel, gens: &[Generator; 3]) -> Form {
    Form::from_monomial(Scalar::one(model.table()), gens)
}

/// The constant φ with d(witness) = φ · w1∧w1bar∧w2∧w2bar. Defined for
/// 3-form witnesses; the derivative of a 3-form is automatically a multiple
/// of the volume monomial.
pub fn stokes_factor(model: &CoframeModel, witness: &Form) -> Result<Scalar> {
    for (mask, coeff) in witness.terms() {
        if mask_degree(mask) != 3 && !coeff.is_zero() {
            return Err(Error::Usage(
                "the Stokes factor is defined for degree-three witnesses".to_string(),
            ));
        }
    }
    Ok(model.d(witness).coefficient(VOLUME))
}

fn mask_degree(mask: Mask) -> u32 {
    mask.count_ones()
}

/// Standard exactness witnesses per family, as generator triples in the
/// order their derivative is usually displayed. The unimodular family C3
/// has none: every invariant 3-form there is closed.
pub fn standard_witnesses(name: FamilyName) -> &'static [[Generator; 3]] {
    use Generator::{W1, W1Bar, W2, W2Bar};
    match name {
        FamilyName::C1 => &[[W1, W2, W2Bar]],
        FamilyName::C2 | FamilyName::C4 | FamilyName::C5 => &[[W1, W2Bar, W2]],
        FamilyName::C3 => &[],
        FamilyName::C6 => &[[W1Bar, W2, W2Bar], [W1, W1Bar, W2Bar]],
    }
}

fn family_notes(name: FamilyName) -> &'static [&'static str] {
    match name {
        FamilyName::C1 => &[
            "vanishes exactly at a = 1/2, b = 0, the only parameter point \
             where a compact quotient can exist",
        ],
        FamilyName::C2 => &["vanishes exactly on the line a + b = 0"],
        FamilyName::C3 => &[],
        FamilyName::C4 => &[
            "never vanishes: the real part 1 and the imaginary part 2b \
             cannot both be zero for real b",
        ],
        FamilyName::C5 => &["vanishes exactly on the line a = 1/2"],
        FamilyName::C6 => &[
            "vanishes only at the circle point (cos, sin) = (0, -1)",
            "vanishes on the curve sin + 1 = 2*b*cos; together with the \
             first witness the common zero is exactly (cos, sin) = (0, -1)",
        ],
    }
}

/// One exactness witness with its Stokes factor and a human-readable
/// description of the factor's vanishing locus.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    pub witness: Form,
    pub factor: Scalar,
    pub vanishing_locus_note: String,
}

impl ObstructionReport {
    pub fn new(model: &CoframeModel, gens: &[Generator; 3], note: &str) -> Result<Self> {
        let witness = witness_form(model, gens);
        let factor = stokes_factor(model, &witness)?;
        Ok(Self {
            witness,
            factor,
            vanishing_locus_note: note.to_string(),
        })
    }

    /// Recomputes the factor from the witness against the model.
    pub fn verify(&self, model: &CoframeModel) -> bool {
        match stokes_factor(model, &self.witness) {
            Ok(f) => f.sub(&self.factor).is_zero(),
            Err(_) => false,
        }
    }
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d({}) = ({}) vol; {}",
            self.witness, self.factor, self.vanishing_locus_note
        )
    }
}

/// The standard obstruction reports of a family against a model of it
/// (symbolic or instantiated). Empty exactly for C3.
pub fn standard_obstructions(
    name: FamilyName,
    model: &CoframeModel,
) -> Result<Vec<ObstructionReport>> {
    standard_witnesses(name)
        .iter()
        .zip(family_notes(name))
        .map(|(gens, note)| ObstructionReport::new(model, gens, note))
        .collect()
}

// ---------------------------------------------------------------------------
// Unimodularity through closed 3-forms
// ---------------------------------------------------------------------------

/// Whether the algebra is unimodular (all adjoint maps traceless).
/// Convenience re-statement so the obstruction API covers both sides of the
/// equivalence with [`basis_three_forms_closed`].
pub fn is_unimodular(l: &RealLieAlgebra) -> bool {
    l.is_unimodular()
}

/// Whether all four coframe 3-forms θ^i∧θ^j∧θ^k are closed. Equivalent to
/// unimodularity; computed independently from the torsion coefficients so
/// the two can cross-check each other.
pub fn basis_three_forms_closed(l: &RealLieAlgebra) -> bool {
    three_form_volume_coefficients(l).iter().all(Zero::is_zero)
}

/// Volume coefficient of d(θ^{i₀}∧θ^{i₁}∧θ^{i₂}), indexed by the omitted
/// coframe slot.
fn three_form_volume_coefficients(l: &RealLieAlgebra) -> [BigRational; 4] {
    let t = l.torsion_tensor();
    std::array::from_fn(|omit| {
        let triple: Vec<usize> = (0..4).filter(|&x| x != omit).collect();
        let mut acc = BigRational::zero();
        for (s, &g) in triple.iter().enumerate() {
            // Replacing θ^g by dθ^g, only the θ^omit∧θ^g part of dθ^g
            // survives against the remaining two legs of the triple.
            let (u, v) = if omit < g { (omit, g) } else { (g, omit) };
            let rest: Vec<usize> = triple.iter().copied().filter(|&x| x != g).collect();
            let perm = [u, v, rest[0], rest[1]];
            let sgn = perm_sign(&perm) * if s % 2 == 0 { 1 } else { -1 };
            acc += &t[g][u][v] * BigRational::from_integer(BigInt::from(sgn));
        }
        acc
    })
}

fn perm_sign(p: &[usize; 4]) -> i64 {
    let mut inversions = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------------
// Quotient typing for family C1
// ---------------------------------------------------------------------------

/// Shape of the translation-symmetry lattice of family C1 at a parameter
/// point. Only `Gamma2Compact` admits a compact quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1QuotientType {
    /// a ≠ 1/2: the solution lattice is one-dimensional plus the free w
    /// translations; the quotient is R × S¹ × T².
    Gamma1Noncompact,
    /// a = 1/2, b = 0: the full translation lattice survives and the
    /// quotient is compact.
    Gamma2Compact,
    /// a = 1/2, b ≠ 0: the lattice flattens to real translations only;
    /// the quotient is R × S¹ × T².
    Gamma3Noncompact,
    /// a = 1, b = 0: the generic chart coefficient 1 − a + ib vanishes and
    /// the coframing needs a separate chart.
    SpecialA1B0,
}

impl C1QuotientType {
    pub fn name(self) -> &'static str {
        match self {
            C1QuotientType::Gamma1Noncompact => "GAMMA1_NONCOMPACT",
            C1QuotientType::Gamma2Compact => "GAMMA2_COMPACT",
            C1QuotientType::Gamma3Noncompact => "GAMMA3_NONCOMPACT",
            C1QuotientType::SpecialA1B0 => "SPECIAL_A1B0",
        }
    }
}

/// Classifies the translation lattice of family C1 at (a, b).
pub fn c1_quotient_type(a: &BigRational, b: &BigRational) -> C1QuotientType {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if *a == BigRational::one() && b.is_zero() {
        C1QuotientType::SpecialA1B0
    } else if *a == half && b.is_zero() {
        C1QuotientType::Gamma2Compact
    } else if *a == half {
        C1QuotientType::Gamma3Noncompact
    } else {
        C1QuotientType::Gamma1Noncompact
    }
}

// ---------------------------------------------------------------------------
// Lattice certificates for family C2
// ---------------------------------------------------------------------------

/// Which side of 1 the real eigenvalue q falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSide {
    LessThanOne,
    GreaterThanOne,
}

impl QSide {
    pub fn name(self) -> &'static str {
        match self {
            QSide::LessThanOne => "less_than_one",
            QSide::GreaterThanOne => "greater_than_one",
        }
    }
}

/// A verifiable record of one admissible dilation matrix.
///
/// Exact fields: the integers m, n, k, the characteristic polynomial, the
/// isolating interval for the real eigenvalue (rational endpoints with
/// certified signs) and the companion matrix. Floating fields: q, p = m − q,
/// the complex eigenvalue λ = p/2 + i·√(1/q − p²/4), the structure
/// parameter a and the dilation constant c, all stored as decimal strings
/// rounded to `precision_bits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCertificate {
    pub m: i64,
    pub n: i64,
    pub k: i64,
    pub precision_bits: usize,
    pub char_poly: String,
    pub q_interval: [String; 2],
    pub q_side: QSide,
    pub q: String,
    pub p: String,
    pub lambda_re: String,
    pub lambda_im: String,
    pub a: String,
    pub c: String,
    pub matrix: [[i64; 3]; 3],
}

impl fmt::Display for LatticeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "(m, n, k) = ({}, {}, {})   {}",
            self.m, self.n, self.k, self.char_poly
        )?;
        writeln!(f, "  q = {} ({})", self.q, self.q_side.name())?;
        writeln!(f, "  lambda = {} + {}*i", self.lambda_re, self.lambda_im)?;
        writeln!(f, "  a = {}", self.a)?;
        writeln!(f, "  c = {}", self.c)?;
        write!(
            f,
            "  matrix [{:?}; {:?}; {:?}]",
            self.matrix[0], self.matrix[1], self.matrix[2]
        )
    }
}

/// Companion matrix of x³ − m·x² + n·x − 1.
pub fn companion_matrix(m: i64, n: i64) -> [[i64; 3]; 3] {
    [[0, 0, 1], [1, 0, -n], [0, 1, m]]
}

/// Renders x³ − m·x² + n·x − 1 with zero terms dropped and unit
/// coefficients elided.
pub fn char_poly_string(m: i64, n: i64) -> String {
    let mut s = String::from("x^3");
    append_poly_term(&mut s, m.checked_neg().expect("coefficient in range"), "x^2");
    append_poly_term(&mut s, n, "x");
    append_poly_term(&mut s, -1, "");
    s
}

fn append_poly_term(s: &mut String, coeff: i64, var: &str) {
    if coeff == 0 {
        return;
    }
    s.push_str(if coeff < 0 { " - " } else { " + " });
    let mag = coeff.unsigned_abs();
    if var.is_empty() {
        s.push_str(&mag.to_string());
    } else {
        if mag != 1 {
            s.push_str(&mag.to_string());
            s.push('*');
        }
        s.push_str(var);
    }
}

/// Discriminant of x³ − m·x² + n·x − 1. Negative exactly when the roots
/// are one real number plus a complex-conjugate pair.
pub fn cubic_discriminant(m: i64, n: i64) -> BigInt {
    let m = BigInt::from(m);
    let n = BigInt::from(n);
    BigInt::from(18) * &m * &n - BigInt::from(4) * &m * &m * &m + &m * &m * &n * &n
        - BigInt::from(4) * &n * &n * &n
        - BigInt::from(27)
}

fn cubic_eval(m: i64, n: i64, x: &BigRational) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(m));
    let n = BigRational::from_integer(BigInt::from(n));
    x * x * x - m * x * x + n * x - BigRational::one()
}

/// Brackets the unique positive real root of x³ − m·x² + n·x − 1 by
/// bisection down to width 2^−width_bits. The cubic is negative at 0 and
/// positive past the root; the root is irrational whenever m ≠ n (the only
/// rational candidates ±1 are excluded), so the endpoint signs stay strict.
fn isolate_real_root(m: i64, n: i64, width_bits: usize) -> (BigRational, BigRational) {
    let bound = 1 + m.unsigned_abs().max(n.unsigned_abs()).max(1);
    let mut lo = BigRational::zero();
    let mut hi = BigRational::from_integer(BigInt::from(bound));
    assert!(
        cubic_eval(m, n, &lo).is_negative() && cubic_eval(m, n, &hi).is_positive(),
        "root bracket must have strict signs"
    );
    let two = BigRational::from_integer(BigInt::from(2));
    let width = BigRational::new(BigInt::one(), BigInt::one() << width_bits);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / &two;
        if cubic_eval(m, n, &mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

pub(crate) fn rational_to_float(x: &BigRational, wp: usize, cc: &mut Consts) -> BigFloat {
    let num = BigFloat::parse(&x.numer().to_string(), Radix::Dec, wp, RM, cc);
    let den = BigFloat::parse(&x.denom().to_string(), Radix::Dec, wp, RM, cc);
    num.div(&den, wp, RM)
}

/// The eigenvalue pair and the matched parameters for a given real root.
struct EigenData {
    q: BigFloat,
    p: BigFloat,
    lam_re: BigFloat,
    lam_im: BigFloat,
    a: BigFloat,
    c: BigFloat,
}

fn eigen_data(m: i64, k: i64, q: &BigFloat, wp: usize, cc: &mut Consts) -> Result<EigenData> {
    let two = BigFloat::from_i64(2, wp);
    let four = BigFloat::from_i64(4, wp);
    // λ + λ̄ = m − q and λλ̄ = 1/q (the three roots sum to m and multiply
    // to 1).
    let p = BigFloat::from_i64(m, wp).sub(q, wp, RM);
    let lam_re = p.div(&two, wp, RM);
    let norm = q.reciprocal(wp, RM);
    let lam_im = norm.sub(&lam_re.mul(&lam_re, wp, RM), wp, RM).sqrt(wp, RM);
    let full_arg = upper_half_arg(&lam_re, &lam_im, wp, cc).add(&two_k_pi(k, wp, cc), wp, RM);
    // Modulus matching: c^(−2a) = |λ| with ln |λ| = −½ ln q; argument
    // matching: ln c = arg λ + 2kπ. Eliminating c gives
    // a = ln q / (4 (arg λ + 2kπ)).
    let ln_q = q.ln(wp, RM, cc);
    let a = ln_q.div(&four.mul(&full_arg, wp, RM), wp, RM);
    let half_ln_q = ln_q.div(&two, wp, RM);
    let c = half_ln_q
        .div(&two.mul(&a, wp, RM), wp, RM)
        .exp(wp, RM, cc);
    let data = EigenData {
        q: q.clone(),
        p,
        lam_re,
        lam_im,
        a,
        c,
    };
    for v in [&data.q, &data.p, &data.lam_re, &data.lam_im, &data.a, &data.c] {
        if v.is_nan() {
            return Err(Error::Lattice(
                "eigenvalue evaluation went non-numeric".to_string(),
            ));
        }
    }
    Ok(data)
}

/// arg(re + i·im) for im > 0, branch-split on the sign of re.
fn upper_half_arg(re: &BigFloat, im: &BigFloat, wp: usize, cc: &mut Consts) -> BigFloat {
    let pi = cc.pi(wp, RM);
    if re.is_zero() {
        return pi.div(&BigFloat::from_i64(2, wp), wp, RM);
    }
    let at = im.div(re, wp, RM).atan(wp, RM, cc);
    if re.is_negative() {
        at.add(&pi, wp, RM)
    } else {
        at
    }
}

fn two_k_pi(k: i64, wp: usize, cc: &mut Consts) -> BigFloat {
    cc.pi(wp, RM)
        .mul(&BigFloat::from_i64(k, wp), wp, RM)
        .mul(&BigFloat::from_i64(2, wp), wp, RM)
}

fn decimal_string(x: &BigFloat, precision_bits: usize, cc: &mut Consts) -> Result<String> {
    let mut y = x.clone();
    y.set_precision(precision_bits, RM)
        .map_err(|e| Error::Lattice(format!("precision rounding failed: {e:?}")))?;
    y.format(Radix::Dec, RM, cc)
        .map_err(|e| Error::Lattice(format!("decimal formatting failed: {e:?}")))
}

fn coeff_in_range(x: i64) -> bool {
    x.checked_abs().is_some_and(|v| v <= MAX_COEFF)
}

/// Scans the (m, n) grid for admissible dilation matrices. A pair is
/// admissible when m ≠ n (so q ≠ 1 and |λ| ≠ 1) and the discriminant is
/// negative (so a complex-conjugate eigenvalue pair exists). The output is
/// sorted by (m, n).
pub fn lattice_search(
    m_range: RangeInclusive<i64>,
    n_range: RangeInclusive<i64>,
    k: i64,
    precision_bits: usize,
) -> Result<Vec<LatticeCertificate>> {
    if precision_bits < MIN_PRECISION {
        return Err(Error::Usage(format!(
            "lattice search requires at least {MIN_PRECISION} bits of precision"
        )));
    }
    for edge in [
        *m_range.start(),
        *m_range.end(),
        *n_range.start(),
        *n_range.end(),
    ] {
        if !coeff_in_range(edge) {
            return Err(Error::Usage(
                "search window coefficients exceed the supported magnitude".to_string(),
            ));
        }
    }
    let mut cc = consts_cache()?;
    let mut out = Vec::new();
    for m in m_range {
        for n in n_range.clone() {
            if let Some(cert) = certify_pair(m, n, k, precision_bits, &mut cc)? {
                out.push(cert);
            }
        }
    }
    Ok(out)
}

fn consts_cache() -> Result<Consts> {
    Consts::new().map_err(|e| Error::Lattice(format!("constant cache initialization failed: {e:?}")))
}

fn certify_pair(
    m: i64,
    n: i64,
    k: i64,
    precision_bits: usize,
    cc: &mut Consts,
) -> Result<Option<LatticeCertificate>> {
    if m == n {
        // x = 1 is then a root and the eigenvalue pair sits on the unit
        // circle.
        return Ok(None);
    }
    if !cubic_discriminant(m, n).is_negative() {
        return Ok(None);
    }
    let wp = precision_bits + GUARD_BITS;
    let (lo, hi) = isolate_real_root(m, n, precision_bits + 8);
    let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
    let q = rational_to_float(&mid, wp, cc);
    let data = eigen_data(m, k, &q, wp, cc)?;
    // The cubic at 1 evaluates to n − m, and it is negative exactly left of
    // its unique real root, so q < 1 iff n > m.
    let q_side = if n > m {
        QSide::LessThanOne
    } else {
        QSide::GreaterThanOne
    };
    Ok(Some(LatticeCertificate {
        m,
        n,
        k,
        precision_bits,
        char_poly: char_poly_string(m, n),
        q_interval: [lo.to_string(), hi.to_string()],
        q_side,
        q: decimal_string(&data.q, precision_bits, cc)?,
        p: decimal_string(&data.p, precision_bits, cc)?,
        lambda_re: decimal_string(&data.lam_re, precision_bits, cc)?,
        lambda_im: decimal_string(&data.lam_im, precision_bits, cc)?,
        a: decimal_string(&data.a, precision_bits, cc)?,
        c: decimal_string(&data.c, precision_bits, cc)?,
        matrix: companion_matrix(m, n),
    }))
}

/// Rechecks a certificate from scratch: the integral fields exactly, the
/// floating fields by recomputation at doubled precision, and the stored
/// values against their defining identities. Returns false on any mismatch
/// or malformed field.
pub fn verify_certificate(cert: &LatticeCertificate) -> bool {
    verify_inner(cert).is_some()
}

fn verify_inner(cert: &LatticeCertificate) -> Option<()> {
    let (m, n) = (cert.m, cert.n);
    (cert.precision_bits >= MIN_PRECISION).then_some(())?;
    (coeff_in_range(m) && coeff_in_range(n)).then_some(())?;
    (m != n).then_some(())?;
    cubic_discriminant(m, n).is_negative().then_some(())?;

    // Companion matrix and its characteristic data.
    (cert.matrix == companion_matrix(m, n)).then_some(())?;
    let a = cert.matrix.map(|row| row.map(i128::from));
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minor_sum = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
        - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    (trace == i128::from(m) && minor_sum == i128::from(n) && det == 1).then_some(())?;
    (cert.char_poly == char_poly_string(m, n)).then_some(())?;

    // Isolating interval: strict endpoint signs certify the root exactly.
    let lo = BigRational::from_str(&cert.q_interval[0]).ok()?;
    let hi = BigRational::from_str(&cert.q_interval[1]).ok()?;
    (lo < hi && !lo.is_negative()).then_some(())?;
    (cubic_eval(m, n, &lo).is_negative() && cubic_eval(m, n, &hi).is_positive()).then_some(())?;
    let max_width = BigRational::new(BigInt::one(), BigInt::one() << cert.precision_bits);
    (&hi - &lo <= max_width).then_some(())?;
    let expected_side = if n > m {
        QSide::LessThanOne
    } else {
        QSide::GreaterThanOne
    };
    (cert.q_side == expected_side).then_some(())?;

    // Recompute the floating data at doubled precision.
    let pb = cert.precision_bits;
    let wp = 2 * pb + GUARD_BITS;
    let mut cc = consts_cache().ok()?;
    let (rlo, rhi) = isolate_real_root(m, n, 2 * pb + 8);
    let mid = (&rlo + &rhi) / BigRational::from_integer(BigInt::from(2));
    let q_ref = rational_to_float(&mid, wp, &mut cc);
    let reference = eigen_data(m, cert.k, &q_ref, wp, &mut cc).ok()?;

    let parse = |s: &str, cc: &mut Consts| -> Option<BigFloat> {
        let v = BigFloat::parse(s, Radix::Dec, wp, RM, cc);
        (!v.is_nan()).then_some(v)
    };
    let q = parse(&cert.q, &mut cc)?;
    let p = parse(&cert.p, &mut cc)?;
    let lam_re = parse(&cert.lambda_re, &mut cc)?;
    let lam_im = parse(&cert.lambda_im, &mut cc)?;
    let a_val = parse(&cert.a, &mut cc)?;
    let c_val = parse(&cert.c, &mut cc)?;

    let tol = pow2_neg(pb - 8, wp);
    close_abs(&q, &reference.q, &tol, wp).then_some(())?;
    close_abs(&p, &reference.p, &tol, wp).then_some(())?;
    close_abs(&lam_re, &reference.lam_re, &tol, wp).then_some(())?;
    close_abs(&lam_im, &reference.lam_im, &tol, wp).then_some(())?;
    close_abs(&a_val, &reference.a, &tol, wp).then_some(())?;
    close_rel(&c_val, &reference.c, &tol, wp).then_some(())?;

    // The stored values must satisfy the defining identities on their own.
    let one = BigFloat::from_i64(1, wp);
    let two = BigFloat::from_i64(2, wp);
    let four = BigFloat::from_i64(4, wp);
    // q · |λ|² = 1.
    let norm = lam_re.mul(&lam_re, wp, RM).add(&lam_im.mul(&lam_im, wp, RM), wp, RM);
    close_abs(&q.mul(&norm, wp, RM), &one, &tol, wp).then_some(())?;
    // p = m − q and λ re/im from p and q.
    close_abs(&p, &BigFloat::from_i64(m, wp).sub(&q, wp, RM), &tol, wp).then_some(())?;
    close_abs(&lam_re, &p.div(&two, wp, RM), &tol, wp).then_some(())?;
    let im_sq = q.reciprocal(wp, RM).sub(
        &p.mul(&p, wp, RM).div(&four, wp, RM),
        wp,
        RM,
    );
    close_abs(&lam_im.mul(&lam_im, wp, RM), &im_sq, &tol, wp).then_some(())?;
    // |λ| ≠ 1 numerically (q away from 1; also guaranteed by m ≠ n).
    far_apart(&q, &one, &tol, wp).then_some(())?;
    // Modulus and argument matching: 4a(arg λ + 2kπ) = ln q and
    // ln c = arg λ + 2kπ.
    let full_arg =
        upper_half_arg(&lam_re, &lam_im, wp, &mut cc).add(&two_k_pi(cert.k, wp, &mut cc), wp, RM);
    let ln_q = q.ln(wp, RM, &mut cc);
    let residual = four
        .mul(&a_val, wp, RM)
        .mul(&full_arg, wp, RM)
        .sub(&ln_q, wp, RM);
    close_abs(&residual, &BigFloat::from_i64(0, wp), &tol, wp).then_some(())?;
    (!c_val.is_negative()).then_some(())?;
    let ln_c = c_val.ln(wp, RM, &mut cc);
    close_abs(&ln_c, &full_arg, &tol, wp).then_some(())?;
    Some(())
}

pub(crate) fn pow2_neg(bits: usize, wp: usize) -> BigFloat {
    BigFloat::from_i64(2, wp)
        .powi(bits, wp, RM)
        .reciprocal(wp, RM)
}

// The absolute-value comparisons are spelled out as pairs of signed
// comparisons (|d| ≤ t ⟺ d ≤ t and −d ≤ t for t ≥ 0). NaN anywhere makes
// every signed comparison fail, so NaN never passes a closeness check and
// never counts as "far".

pub(crate) fn signed_le(x: &BigFloat, y: &BigFloat) -> bool {
    x.cmp(y).is_some_and(|s| s <= 0)
}

pub(crate) fn signed_gt(x: &BigFloat, y: &BigFloat) -> bool {
    x.cmp(y).is_some_and(|s| s > 0)
}

fn close_abs(x: &BigFloat, y: &BigFloat, tol: &BigFloat, wp: usize) -> bool {
    let d = x.sub(y, wp, RM);
    signed_le(&d, tol) && signed_le(&d.neg(), tol)
}

fn close_rel(x: &BigFloat, y: &BigFloat, tol: &BigFloat, wp: usize) -> bool {
    let mut bound = tol.mul(y, wp, RM);
    if bound.is_negative() {
        bound = bound.neg();
    }
    let d = x.sub(y, wp, RM);
    signed_le(&d, &bound) && signed_le(&d.neg(), &bound)
}

fn far_apart(x: &BigFloat, y: &BigFloat, tol: &BigFloat, wp: usize) -> bool {
    let d = x.sub(y, wp, RM);
    signed_gt(&d, tol) || signed_gt(&d.neg(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{realify, solvable_g4_10};
    use crate::models::{Binding, FamilyId};
    use std::sync::Arc;

    use crate::scalar::SymbolTable;

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rv(v: [i64; 4]) -> [BigRational; 4] {
        v.map(ri)
    }

    fn symbolic_model(name: FamilyName) -> CoframeModel {
        FamilyId::symbolic(name).model().unwrap()
    }

    fn rational_model(name: FamilyName, a: (i64, i64), b: (i64, i64)) -> CoframeModel {
        FamilyId::new(
            name,
            Binding::Rational {
                a: rq(a.0, a.1),
                b: rq(b.0, b.1),
            },
        )
        .unwrap()
        .model()
        .unwrap()
    }

    fn circle_model(t: (i64, i64), b: (i64, i64)) -> CoframeModel {
        FamilyId::new(
            FamilyName::C6,
            Binding::Circle {
                t: rq(t.0, t.1),
                b: rq(b.0, b.1),
            },
        )
        .unwrap()
        .model()
        .unwrap()
    }

    fn algebra_of(model: &CoframeModel) -> RealLieAlgebra {
        realify(model, None).unwrap().1
    }

    fn parse_in(src: &str, table: &Arc<SymbolTable>) -> Scalar {
        Scalar::parse(src, table).unwrap()
    }

    fn assert_factor(name: FamilyName, expected: &str) -> ObstructionReport {
        let m = symbolic_model(name);
        let reports = standard_obstructions(name, &m).unwrap();
        assert_eq!(reports.len(), 1);
        let want = parse_in(expected, m.table());
        assert!(
            reports[0].factor.sub(&want).is_zero(),
            "factor mismatch for {name:?}: got {}, want {}",
            reports[0].factor,
            want
        );
        assert!(reports[0].verify(&m));
        reports[0].clone()
    }

    #[test]
    fn c1_factor_matches_closed_form() {
        let r = assert_factor(FamilyName::C1, "-(1 - 2*a + 2*i*b)");
        assert!(r.vanishing_locus_note.contains("a = 1/2"));
        // The factor vanishes exactly at (1/2, 0) and nowhere else.
        let at = |a, b| {
            let m = rational_model(FamilyName::C1, a, b);
            standard_obstructions(FamilyName::C1, &m).unwrap()[0]
                .factor
                .is_zero()
        };
        assert!(at((1, 2), (0, 1)));
        assert!(!at((1, 2), (1, 1)));
        assert!(!at((0, 1), (0, 1)));
        let m0 = rational_model(FamilyName::C1, (0, 1), (0, 1));
        let f0 = &standard_obstructions(FamilyName::C1, &m0).unwrap()[0].factor;
        assert!(f0.sub(&parse_in("-1", m0.table())).is_zero());
    }

    #[test]
    fn c2_factor_matches_closed_form() {
        assert_factor(FamilyName::C2, "2*i*(a + b)");
        let m = rational_model(FamilyName::C2, (1, 1), (-1, 1));
        assert!(standard_obstructions(FamilyName::C2, &m).unwrap()[0]
            .factor
            .is_zero());
        let m1 = rational_model(FamilyName::C2, (1, 1), (0, 1));
        let f1 = &standard_obstructions(FamilyName::C2, &m1).unwrap()[0].factor;
        assert!(f1.sub(&parse_in("2*i", m1.table())).is_zero());
    }

    #[test]
    fn c4_factor_never_vanishes() {
        let r = assert_factor(FamilyName::C4, "1 + 2*i*b");
        assert!(r.vanishing_locus_note.contains("never vanishes"));
        // The real component is the constant 1, so no real b kills it.
        let (re, _) = r.factor.real_components();
        let m = symbolic_model(FamilyName::C4);
        assert!(re.sub(&parse_in("1", m.table())).is_zero());
        let m0 = rational_model(FamilyName::C4, (0, 1), (0, 1));
        assert!(!standard_obstructions(FamilyName::C4, &m0).unwrap()[0]
            .factor
            .is_zero());
    }

    #[test]
    fn c5_factor_matches_closed_form() {
        assert_factor(FamilyName::C5, "(1 - 2*a)*(1 + 2*i*b)");
        let m = rational_model(FamilyName::C5, (1, 2), (3, 1));
        assert!(standard_obstructions(FamilyName::C5, &m).unwrap()[0]
            .factor
            .is_zero());
    }

    #[test]
    fn c6_factors_match_closed_forms() {
        let m = symbolic_model(FamilyName::C6);
        let reports = standard_obstructions(FamilyName::C6, &m).unwrap();
        assert_eq!(reports.len(), 2);
        let t = m.table();
        let f1 = parse_in(
            "(sin_a + 1 - 2*b*cos_a) + i*(-cos_a - 2*b*(sin_a + 1))",
            t,
        );
        let f2 = parse_in("1/2*(sin_a + 1 - 2*b*cos_a)*(4*b^2 - 1 + 4*b*i)", t);
        assert!(reports[0].factor.sub(&f1).is_zero());
        assert!(reports[1].factor.sub(&f2).is_zero());
        assert!(reports[0].verify(&m) && reports[1].verify(&m));
    }

    #[test]
    fn c6_witnesses_share_a_single_zero() {
        // Symbolic part: with f1 = r + i·s the identities
        //   s + cos·(1 + 4b²) = −2b·r,
        //   |4b² − 1 + 4bi|² = (4b² + 1)²,
        //   f2 = ½·r·(4b² − 1 + 4bi)
        // show that both factors vanish only if r = 0 and cos = 0, hence
        // sin = −1 on the circle; and (cos, sin) = (0, −1) indeed kills
        // both. That point is t = −1 in the rational parametrization.
        let m = symbolic_model(FamilyName::C6);
        let t = m.table();
        let reports = standard_obstructions(FamilyName::C6, &m).unwrap();
        let (r, s) = reports[0].factor.real_components();
        let id1 = s
            .add(&parse_in("cos_a*(1 + 4*b^2)", t))
            .add(&parse_in("2*b", t).mul(&r));
        assert!(id1.is_zero());
        let z = parse_in("4*b^2 - 1 + 4*b*i", t);
        let id2 = z.mul(&z.conjugate()).sub(&parse_in("(4*b^2 + 1)^2", t));
        assert!(id2.is_zero());
        let id3 = reports[1].factor.sub(&parse_in("1/2", t).mul(&r).mul(&z));
        assert!(id3.is_zero());

        // Instantiations: both zero at t = −1 for several b, not both zero
        // elsewhere.
        for b in [(0, 1), (1, 1), (2, 1), (-3, 2)] {
            let inst = circle_model((-1, 1), b);
            let factors = standard_obstructions(FamilyName::C6, &inst).unwrap();
            assert!(factors.iter().all(|r| r.factor.is_zero()));
        }
        for (t_pt, b) in [((0, 1), (1, 1)), ((1, 1), (2, 1)), ((-2, 1), (1, 1))] {
            let inst = circle_model(t_pt, b);
            let factors = standard_obstructions(FamilyName::C6, &inst).unwrap();
            assert!(!factors.iter().all(|r| r.factor.is_zero()));
        }
    }

    #[test]
    fn c3_carries_no_witness() {
        assert!(standard_witnesses(FamilyName::C3).is_empty());
        let m = symbolic_model(FamilyName::C3);
        assert!(standard_obstructions(FamilyName::C3, &m).unwrap().is_empty());
    }

    #[test]
    fn stokes_factor_rejects_lower_degree() {
        let m = symbolic_model(FamilyName::C1);
        let one_form = Form::from_monomial(Scalar::one(m.table()), &[Generator::W1]);
        assert!(matches!(
            stokes_factor(&m, &one_form),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn witness_orientation_carries_the_sort_sign() {
        use Generator::{W1, W2, W2Bar};
        let m = symbolic_model(FamilyName::C2);
        let displayed = witness_form(&m, &[W1, W2Bar, W2]);
        let sorted = Form::from_monomial(
            parse_in("-1", m.table()),
            &[W1, W2, W2Bar],
        );
        assert_eq!(displayed, sorted);
    }

    #[test]
    fn unimodularity_matches_closed_three_forms_on_samples() {
        let cases: Vec<(RealLieAlgebra, bool)> = vec![
            (algebra_of(&rational_model(FamilyName::C1, (1, 2), (0, 1))), true),
            (algebra_of(&rational_model(FamilyName::C1, (0, 1), (0, 1))), false),
            (algebra_of(&rational_model(FamilyName::C2, (1, 1), (-1, 1))), true),
            (algebra_of(&rational_model(FamilyName::C2, (1, 1), (0, 1))), false),
            (algebra_of(&rational_model(FamilyName::C3, (1, 1), (1, 1))), true),
            (algebra_of(&rational_model(FamilyName::C3, (-1, 4), (1, 1))), true),
            (algebra_of(&rational_model(FamilyName::C3, (4, 1), (2, 1))), true),
            (algebra_of(&rational_model(FamilyName::C4, (0, 1), (0, 1))), false),
            (algebra_of(&rational_model(FamilyName::C4, (1, 4), (0, 1))), false),
            (algebra_of(&rational_model(FamilyName::C5, (1, 2), (3, 1))), true),
            (algebra_of(&rational_model(FamilyName::C5, (0, 1), (1, 1))), false),
            (algebra_of(&circle_model((-1, 1), (1, 1))), true),
            (algebra_of(&circle_model((0, 1), (1, 1))), false),
        ];
        for (l, expected) in cases {
            assert_eq!(is_unimodular(&l), expected);
            assert_eq!(basis_three_forms_closed(&l), expected);
        }
    }

    #[test]
    fn closed_three_forms_see_the_adjoint_traces() {
        // [e0, e1] = e1: tr ad e0 = 1, and the 3-form missing slot 0 is the
        // only non-closed one.
        let affine = RealLieAlgebra::from_brackets(&[(0, 1, rv([0, 1, 0, 0]))]);
        let coeffs = three_form_volume_coefficients(&affine);
        assert_eq!(coeffs, [ri(-1), ri(0), ri(0), ri(0)]);
        assert!(!basis_three_forms_closed(&affine));
        assert!(!is_unimodular(&affine));

        // [e0, e1] = e1, [e0, e2] = −e2: traceless, so the two derivative
        // terms must cancel inside each 3-form.
        let traceless = RealLieAlgebra::from_brackets(&[
            (0, 1, rv([0, 1, 0, 0])),
            (0, 2, rv([0, 0, -1, 0])),
        ]);
        assert!(basis_three_forms_closed(&traceless));
        assert!(is_unimodular(&traceless));

        assert!(basis_three_forms_closed(&RealLieAlgebra::abelian()));
        assert!(!basis_three_forms_closed(&solvable_g4_10()));
        assert!(!is_unimodular(&solvable_g4_10()));
    }

    #[test]
    fn quotient_type_covers_the_parameter_plane() {
        let cases = [
            ((1, 2), (0, 1), C1QuotientType::Gamma2Compact),
            ((1, 2), (1, 1), C1QuotientType::Gamma3Noncompact),
            ((1, 2), (-7, 3), C1QuotientType::Gamma3Noncompact),
            ((0, 1), (0, 1), C1QuotientType::Gamma1Noncompact),
            ((1, 1), (0, 1), C1QuotientType::SpecialA1B0),
            ((1, 1), (2, 1), C1QuotientType::Gamma1Noncompact),
            ((-3, 1), (0, 1), C1QuotientType::Gamma1Noncompact),
        ];
        for ((an, ad), (bn, bd), want) in cases {
            assert_eq!(c1_quotient_type(&rq(an, ad), &rq(bn, bd)), want);
        }
        assert_eq!(C1QuotientType::Gamma2Compact.name(), "GAMMA2_COMPACT");
        assert_eq!(C1QuotientType::Gamma1Noncompact.name(), "GAMMA1_NONCOMPACT");
        assert_eq!(C1QuotientType::Gamma3Noncompact.name(), "GAMMA3_NONCOMPACT");
        assert_eq!(C1QuotientType::SpecialA1B0.name(), "SPECIAL_A1B0");
    }

    #[test]
    fn char_poly_renders_canonically() {
        assert_eq!(char_poly_string(0, -1), "x^3 - x - 1");
        assert_eq!(char_poly_string(-1, 0), "x^3 + x^2 - 1");
        assert_eq!(char_poly_string(6, 5), "x^3 - 6*x^2 + 5*x - 1");
        assert_eq!(char_poly_string(0, 0), "x^3 - 1");
    }

    #[test]
    fn companion_matrix_has_the_right_characteristic_data() {
        for (m, n) in [(0i64, -1i64), (-1, 0), (5, -7), (2, 1)] {
            let a = companion_matrix(m, n).map(|row| row.map(i128::from));
            let trace = a[0][0] + a[1][1] + a[2][2];
            let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            let minor_sum = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
                - a[0][2] * a[2][0]
                + a[1][1] * a[2][2]
                - a[1][2] * a[2][1];
            assert_eq!(trace, i128::from(m));
            assert_eq!(minor_sum, i128::from(n));
            assert_eq!(det, 1);
        }
    }

    #[test]
    fn discriminant_signs_are_frozen() {
        assert_eq!(cubic_discriminant(0, -1), BigInt::from(-23));
        assert_eq!(cubic_discriminant(-1, 0), BigInt::from(-23));
        assert_eq!(cubic_discriminant(3, 3), BigInt::from(0));
        assert_eq!(cubic_discriminant(6, 5), BigInt::from(49));
        assert_eq!(cubic_discriminant(2, 4), BigInt::from(-107));
    }

    #[test]
    fn root_isolation_brackets_the_root() {
        let (lo, hi) = isolate_real_root(0, -1, 80);
        assert!(cubic_eval(0, -1, &lo).is_negative());
        assert!(cubic_eval(0, -1, &hi).is_positive());
        assert!(&hi - &lo <= BigRational::new(BigInt::one(), BigInt::one() << 80));
        assert!(lo > rq(132, 100) && hi < rq(133, 100));
    }

    fn oracle_tolerance(digits: usize) -> BigFloat {
        BigFloat::from_i64(10, 256)
            .powi(digits, 256, RM)
            .reciprocal(256, RM)
    }

    fn parse_dec(s: &str, cc: &mut Consts) -> BigFloat {
        BigFloat::parse(s, Radix::Dec, 256, RM, cc)
    }

    #[test]
    fn example_certificate_matches_frozen_oracle() {
        // Independent oracle: exact rational bisection of x³ − x − 1 plus
        // series evaluation of atan/ln/exp at 50 decimal digits, frozen
        // below.
        let certs = lattice_search(0..=0, -1..=-1, 0, 128).unwrap();
        assert_eq!(certs.len(), 1);
        let cert = &certs[0];
        assert_eq!(cert.char_poly, "x^3 - x - 1");
        assert_eq!(cert.matrix, [[0, 0, 1], [1, 0, 1], [0, 1, 0]]);
        assert_eq!(cert.q_side, QSide::GreaterThanOne);

        let mut cc = consts_cache().unwrap();
        let tol = oracle_tolerance(30);
        let frozen = [
            (&cert.q, "1.32471795724474602596090885447809734073440405690173"),
            (&cert.p, "-1.32471795724474602596090885447809734073440405690173"),
            (
                &cert.lambda_re,
                "-0.66235897862237301298045442723904867036720202845086",
            ),
            (
                &cert.lambda_im,
                "0.56227951206230124389918214490937306149784300289578",
            ),
            (&cert.a, "0.028838202484447117751275895993712870075050095510710"),
            (&cert.c, "11.447082937844542503993809726824065551485742266242"),
        ];
        for (got, want) in frozen {
            let g = parse_dec(got, &mut cc);
            let w = parse_dec(want, &mut cc);
            assert!(
                close_abs(&g, &w, &tol, 256),
                "stored {got} vs oracle {want}"
            );
        }
        // q > 1 here, and the matched exponent comes out positive.
        assert!(!parse_dec(&cert.a, &mut cc).is_negative());
        assert!(verify_certificate(cert));
    }

    #[test]
    fn example_eigenvalue_matches_its_closed_form() {
        // λ = −s/12 − 1/s + i·√3·(s/6 − 2/s)/2 with s = (108 + 12·√69)^(1/3)
        // is the textbook solution of x³ − x − 1 restricted to the upper
        // complex root.
        let certs = lattice_search(0..=0, -1..=-1, 0, 128).unwrap();
        let cert = &certs[0];
        let mut cc = consts_cache().unwrap();
        let wp = 256;
        let s = BigFloat::from_i64(69, wp)
            .sqrt(wp, RM)
            .mul(&BigFloat::from_i64(12, wp), wp, RM)
            .add(&BigFloat::from_i64(108, wp), wp, RM)
            .cbrt(wp, RM);
        let re_cf = s
            .div(&BigFloat::from_i64(12, wp), wp, RM)
            .neg()
            .sub(&s.reciprocal(wp, RM), wp, RM);
        let im_cf = BigFloat::from_i64(3, wp)
            .sqrt(wp, RM)
            .mul(
                &s.div(&BigFloat::from_i64(6, wp), wp, RM).sub(
                    &BigFloat::from_i64(2, wp).div(&s, wp, RM),
                    wp,
                    RM,
                ),
                wp,
                RM,
            )
            .div(&BigFloat::from_i64(2, wp), wp, RM);
        let tol = oracle_tolerance(9);
        let re = parse_dec(&cert.lambda_re, &mut cc);
        let im = parse_dec(&cert.lambda_im, &mut cc);
        assert!(close_abs(&re, &re_cf, &tol, wp));
        assert!(close_abs(&im, &im_cf, &tol, wp));
    }

    #[test]
    fn mirror_pair_sits_below_one() {
        let certs = lattice_search(-1..=-1, 0..=0, 0, 128).unwrap();
        assert_eq!(certs.len(), 1);
        let cert = &certs[0];
        assert_eq!(cert.char_poly, "x^3 + x^2 - 1");
        assert_eq!(cert.q_side, QSide::LessThanOne);
        let mut cc = consts_cache().unwrap();
        let tol = oracle_tolerance(30);
        let q = parse_dec(&cert.q, &mut cc);
        let oracle = parse_dec(
            "0.754877666246692760049508896358528691894606617772793143989284",
            &mut cc,
        );
        assert!(close_abs(&q, &oracle, &tol, 256));
        // This root is the reciprocal of the previous example's root.
        let partner = lattice_search(0..=0, -1..=-1, 0, 128).unwrap();
        let q_partner = parse_dec(&partner[0].q, &mut cc);
        let product = q.mul(&q_partner, 256, RM);
        assert!(close_abs(&product, &BigFloat::from_i64(1, 256), &tol, 256));
        // |λ|² = 1/q > 1 on this side.
        let re = parse_dec(&cert.lambda_re, &mut cc);
        let im = parse_dec(&cert.lambda_im, &mut cc);
        let norm = re.mul(&re, 256, RM).add(&im.mul(&im, 256, RM), 256, RM);
        assert!(far_apart(&norm, &BigFloat::from_i64(1, 256), &tol, 256));
        assert!(norm.cmp(&BigFloat::from_i64(1, 256)).is_some_and(|s| s > 0));
        // a < 0: ln q < 0 while the argument stays in the upper half.
        assert!(parse_dec(&cert.a, &mut cc).is_negative());
        assert!(verify_certificate(cert));
    }

    #[test]
    fn rejected_pairs_produce_no_certificates() {
        assert!(lattice_search(3..=3, 3..=3, 0, 64).unwrap().is_empty());
        assert!(lattice_search(6..=6, 5..=5, 0, 64).unwrap().is_empty());
        assert!(lattice_search(-2..=-2, 0..=0, 0, 64).unwrap().is_empty());
    }

    #[test]
    fn window_scan_is_sorted_deterministic_and_verified() {
        let first = lattice_search(-2..=2, -2..=2, 0, 64).unwrap();
        let second = lattice_search(-2..=2, -2..=2, 0, 64).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.len(), 16);
        let keys: Vec<(i64, i64)> = first.iter().map(|c| (c.m, c.n)).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(keys.contains(&(0, -1)) && keys.contains(&(-1, 0)));
        assert!(first.iter().all(|c| c.m != c.n));
        for cert in &first {
            assert!(verify_certificate(cert), "certificate ({}, {})", cert.m, cert.n);
        }
    }

    #[test]
    fn tampered_certificates_fail_verification() {
        let cert = lattice_search(0..=0, -1..=-1, 0, 128).unwrap().remove(0);
        assert!(verify_certificate(&cert));

        let mut bad = cert.clone();
        bad.matrix[2][2] += 1;
        assert!(!verify_certificate(&bad));

        // Shifting the branch index k without recomputing a breaks the
        // argument matching.
        let mut bad = cert.clone();
        bad.k += 1;
        assert!(!verify_certificate(&bad));

        let mut bad = cert.clone();
        bad.q = bad.q.replacen("32471", "32472", 1);
        assert!(!verify_certificate(&bad));

        let mut bad = cert.clone();
        bad.char_poly = "x^3 - x - 2".to_string();
        assert!(!verify_certificate(&bad));

        let mut bad = cert.clone();
        bad.q_side = QSide::LessThanOne;
        assert!(!verify_certificate(&bad));

        let mut bad = cert.clone();
        bad.precision_bits = 32;
        assert!(!verify_certificate(&bad));

        let mut bad = cert.clone();
        bad.q_interval[1] = bad.q_interval[0].clone();
        assert!(!verify_certificate(&bad));
    }

    #[test]
    fn precision_floor_is_enforced() {
        assert!(matches!(
            lattice_search(0..=0, -1..=-1, 0, 32),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn certificates_serialize_round_trip() {
        let cert = lattice_search(0..=0, -1..=-1, 0, 128).unwrap().remove(0);
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"q_side\":\"greater_than_one\""));
        let back: LatticeCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
        assert!(verify_certificate(&back));
    }
}

