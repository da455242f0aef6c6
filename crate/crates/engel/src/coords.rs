//! Local coordinate charts: exact symbolic scalars and differential forms
//! in chart coordinates, with enough calculus to check that an explicit
//! coframing satisfies a model's structure equations.
//!
//! A [`Chart`] fixes an ordered list of coordinate directions. Holomorphic
//! charts interleave each coordinate with its conjugate (`z`, `conj(z)`,
//! `w`, `conj(w)`), and `∂/∂z`, `∂/∂conj(z)` act as independent
//! derivations; real charts have self-conjugate directions. A
//! [`CoordScalar`] is a finite sum of canonical terms
//!
//! ```text
//! coefficient · monomial · Π pow(base, exponent) · exp(arg) · Π log(arg)
//! ```
//!
//! where the coefficient is a rational function of the model's symbols
//! ([`Ratio`]), the monomial is a Laurent monomial in the directions, pow
//! bases and exp/log arguments are polynomials in the directions with
//! `Ratio` coefficients, and pow exponents are coordinate-free `Ratio`s.
//!
//! # Design Notes
//!
//! - **Normalization first.** Every constructor and operation rewrites into
//!   the canonical term form: exp arguments combine additively, pow factors
//!   with identical bases add exponents, zero coefficients are dropped.
//!   Constant bases with integer exponents fold into the coefficient;
//!   single-monomial bases with integer exponents fold into the Laurent
//!   monomial; small positive integer powers of polynomial bases expand
//!   distributively; remaining integer-exponent bases are made monic (the
//!   leading coefficient folds out exactly — an identity that needs no
//!   branch choice). A factor `pow(λ·B, n)` with integer `n` coexisting
//!   with a factor on base `B` is rebased as `λⁿ·pow(B, n)`, so a
//!   differentiated symbolic power and a product against `1/B` reach the
//!   same normal form.
//! - **Bases stay verbatim under symbolic exponents.** `pow(B, e)` with a
//!   non-integer exponent is a formal factor on the exact polynomial `B` as
//!   written; conjugation maps it to `pow(conj(B), conj(e))` as a formal
//!   rule. Differentiation never rescales a base, so identities such as
//!   `∂conj(z) pow(conj(z)−z, e) = e·pow(conj(z)−z, e−1)` hold structurally.
//!   Two inputs that write the same function with bases differing by a
//!   non-unit constant under a symbolic exponent will not cancel
//!   structurally; the zero test then reports the normal form rather than a
//!   wrong zero.
//! - **Equality of normal forms is sound, not complete.** Each rewrite rule
//!   is a function identity, so structurally equal values are equal
//!   functions. Completeness holds on the factor-free fragment (Laurent
//!   polynomials in the directions with rational-function coefficients in
//!   which denominators arise from the same atoms); beyond it the zero test
//!   falls back to evaluation.
//! - **Zero-test ladder.** Empty term map ⇒ `ZeroNormalForm`. Terms built
//!   only from exactly evaluable factors (integer-exponent polynomial
//!   bases, no exp/log, no symbolic exponents) are evaluated at up to 32
//!   admissible random rational points — holomorphic direction pairs get a
//!   Gaussian rational and its conjugate, symbols get rational values — and
//!   any nonzero exact value is returned as a `Nonzero` witness; 32 zero
//!   samples give `ZeroSampled`. Terms with formal factors on a real chart
//!   are sampled numerically at 192 bits: pow bases and log arguments must
//!   evaluate to rationals ≥ 1/16 (away from branch points and zero), and
//!   the squared residual norm is compared against thresholds scaled by
//!   the sum of squared term magnitudes (terms under symbolic exponents
//!   get astronomically large, so tolerances are relative) — above
//!   2⁻¹⁰⁰·scale counts as nonzero, below 2⁻²⁰⁰·scale as a zero sample,
//!   anything between is discarded as inconclusive. Formal factors on a
//!   complex chart are not evaluated
//!   (complex powers and logarithms need a branch choice); equality there
//!   requires normal-form equality and the fallback verdict is
//!   `NonzeroNormalForm`.
//! - **Coefficient denominators are factor lists.** A [`Ratio`] keeps its
//!   denominator as a sorted list of monic non-constant factors and reduces
//!   by exact division only (no multivariate gcd). Flows that reuse the
//!   same parsed atoms — which is how a coframing check uses them — reduce
//!   canonically; independently written spellings may keep a common factor
//!   and fall back to evaluation.
//! - **Numeric comparisons.** The float layer reuses the crate's convention
//!   of spelling |x| ≤ t as two signed comparisons, since the installed
//!   big-float crate's absolute comparison misbehaves on signs; NaN fails
//!   every signed comparison and so never passes a threshold.
//! - **Determinism.** Sampling uses a fixed-seed ChaCha stream, so verdicts
//!   and reports are reproducible byte for byte.
//!
//! Chart checks do not solve differential equations: a chart file states a
//! candidate coframing and [`check_local_model`] differentiates it and
//! compares against the model's structure equations, reporting a residue
//! verdict per 2-form component.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use astro_float::{BigFloat, Consts, RoundingMode};
use num::bigint::BigInt;
use num::rational::BigRational;
use num_traits::Zero;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compactness::{pow2_neg, rational_to_float, signed_gt, signed_le};
use crate::error::{Error, Result};
use crate::exterior::mask_generators;
use crate::models::{table_from_specs, Binding, CoframeModel, FamilyId, FamilyName, SymbolSpec};
use crate::scalar::{GaussianRational, Scalar, SymbolKind, SymbolTable};

const RM: RoundingMode = RoundingMode::ToEven;

/// Fixed seed for the deterministic sampling stream.
const SAMPLE_SEED: u64 = 0x5a17_9e3d_41c0_0001;

/// Target number of agreeing samples before a sampled verdict is issued.
const SAMPLE_TARGET: u32 = 32;

/// Cap on random draws while looking for admissible sample points.
const DRAW_CAP: u32 = 512;

/// Working precision (bits) for numeric evaluation of formal factors.
const NUMERIC_BITS: usize = 192;

/// Positive integer powers of multi-term bases up to this bound expand
/// distributively; larger ones stay atomic.
const EXPAND_BOUND: i32 = 16;

/// Identifiers with fixed grammar meanings; charts cannot use them as
/// coordinate names.
const RESERVED: [&str; 5] = ["i", "exp", "log", "pow", "conj"];

/// Index of a coordinate direction within a chart.
pub type Dir = usize;

/// Laurent exponent vector over a chart's directions.
type Mono = Vec<i32>;

// ---------------------------------------------------------------------------
// Charts

#[derive(Debug, PartialEq, Eq)]
struct ChartInner {
    real: bool,
    bases: Vec<String>,
    dir_labels: Vec<String>,
    diff_labels: Vec<String>,
    conj: Vec<Dir>,
}

/// An ordered list of coordinate directions with a conjugation involution.
#[derive(Debug, Clone)]
pub struct Chart {
    inner: Arc<ChartInner>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for Chart {}

fn validate_names(names: &[&str]) -> Result<Vec<String>> {
    if names.is_empty() {
        return Err(Error::Chart("a chart needs at least one coordinate".into()));
    }
    let mut seen = BTreeSet::new();
    for name in names {
        let mut chars = name.chars();
        let head_ok = chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Chart(format!(
                "coordinate name `{name}` is not an identifier"
            )));
        }
        if RESERVED.contains(name) {
            return Err(Error::Chart(format!(
                "coordinate name `{name}` is reserved"
            )));
        }
        if name.starts_with('d') {
            return Err(Error::Chart(format!(
                "coordinate name `{name}` starts with `d`, which is reserved \
                 for differentials"
            )));
        }
        if !seen.insert(*name) {
            return Err(Error::Chart(format!("duplicate coordinate `{name}`")));
        }
    }
    Ok(names.iter().map(|s| s.to_string()).collect())
}

impl Chart {
    /// Complex coordinates; each contributes the direction pair
    /// (`z`, `conj(z)`).
    pub fn holomorphic(names: &[&str]) -> Result<Chart> {
        let bases = validate_names(names)?;
        let mut dir_labels = Vec::new();
        let mut diff_labels = Vec::new();
        let mut conj = Vec::new();
        for base in &bases {
            let d = dir_labels.len();
            dir_labels.push(base.clone());
            dir_labels.push(format!("conj({base})"));
            diff_labels.push(format!("d{base}"));
            diff_labels.push(format!("conj(d{base})"));
            conj.push(d + 1);
            conj.push(d);
        }
        Ok(Chart {
            inner: Arc::new(ChartInner {
                real: false,
                bases,
                dir_labels,
                diff_labels,
                conj,
            }),
        })
    }

    /// Real coordinates; every direction is fixed by conjugation.
    pub fn real(names: &[&str]) -> Result<Chart> {
        let bases = validate_names(names)?;
        let dir_labels = bases.clone();
        let diff_labels = bases.iter().map(|b| format!("d{b}")).collect();
        let conj = (0..bases.len()).collect();
        Ok(Chart {
            inner: Arc::new(ChartInner {
                real: true,
                bases,
                dir_labels,
                diff_labels,
                conj,
            }),
        })
    }

    pub fn is_real(&self) -> bool {
        self.inner.real
    }

    pub fn dir_count(&self) -> usize {
        self.inner.dir_labels.len()
    }

    pub fn conj_dir(&self, d: Dir) -> Dir {
        self.inner.conj[d]
    }

    pub fn dir_label(&self, d: Dir) -> &str {
        &self.inner.dir_labels[d]
    }

    pub fn diff_label(&self, d: Dir) -> &str {
        &self.inner.diff_labels[d]
    }

    pub fn base_names(&self) -> impl Iterator<Item = &str> {
        self.inner.bases.iter().map(|s| s.as_str())
    }

    /// Direction of an (unconjugated) coordinate name.
    pub fn base_dir(&self, name: &str) -> Option<Dir> {
        let i = self.inner.bases.iter().position(|b| b == name)?;
        Some(if self.inner.real { i } else { 2 * i })
    }
}

fn same_context(a: &CoordScalar, b: &CoordScalar) {
    assert!(
        a.chart == b.chart && *a.table == *b.table,
        "coordinate scalars use different charts or symbol tables"
    );
}

// ---------------------------------------------------------------------------
// Rational-function coefficients

/// A rational function of the symbol table: an exact polynomial numerator
/// over a sorted list of monic, non-constant factor polynomials. Reduction
/// is by exact division of the numerator by the factors; there is no
/// multivariate gcd, so values whose cancellation needs one keep a common
/// factor (the zero test then falls back to evaluation).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ratio {
    num: Scalar,
    den: Vec<Scalar>,
}

impl Ratio {
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        Ratio {
            num: Scalar::zero(table),
            den: Vec::new(),
        }
    }

    pub fn one(table: &Arc<SymbolTable>) -> Self {
        Ratio::from_scalar(Scalar::from_ratio(table, 1, 1))
    }

    pub fn from_scalar(num: Scalar) -> Self {
        Ratio {
            num,
            den: Vec::new(),
        }
    }

    pub fn from_int(table: &Arc<SymbolTable>, n: i64) -> Self {
        Ratio::from_scalar(Scalar::from_ratio(table, n, 1))
    }

    pub fn from_gaussian(table: &Arc<SymbolTable>, g: GaussianRational) -> Self {
        Ratio::from_scalar(Scalar::constant(table, g))
    }

    fn table(&self) -> &Arc<SymbolTable> {
        self.num.table()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.as_constant() == Some(GaussianRational::one())
    }

    /// Insert a denominator factor, folding its leading coefficient into
    /// the numerator side (factors are kept monic) and collapsing constant
    /// factors entirely.
    fn push_den(num: &mut Scalar, den: &mut Vec<Scalar>, factor: &Scalar) {
        assert!(!factor.is_zero(), "ratio denominator factor is zero");
        if let Some(c) = factor.as_constant() {
            *num = num.mul(&Scalar::constant(num.table(), c.inv()));
            return;
        }
        let lc = factor
            .leading_term()
            .expect("non-constant factor has a leading term")
            .1
            .clone();
        let lc_inv = Scalar::constant(num.table(), lc.inv());
        *num = num.mul(&lc_inv);
        den.push(factor.mul(&lc_inv));
    }

    /// Canonical form: numerator divided exactly by every factor it admits,
    /// factors monic and sorted, zero numerator clears the denominator.
    fn new(num: Scalar, factors: &[Scalar]) -> Self {
        let mut n = num;
        let mut den: Vec<Scalar> = Vec::new();
        for f in factors {
            Self::push_den(&mut n, &mut den, f);
        }
        if n.is_zero() {
            return Ratio {
                num: n,
                den: Vec::new(),
            };
        }
        // Cancel factors that divide the numerator exactly; repeat until
        // stable so multiplicity is consumed.
        let mut changed = true;
        while changed {
            changed = false;
            let mut i = 0;
            while i < den.len() {
                if let Some(q) = n.div_exact(&den[i]) {
                    n = q;
                    den.remove(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
        }
        den.sort();
        Ratio { num: n, den }
    }

    pub fn add(&self, o: &Ratio) -> Ratio {
        // Common denominator by multiset lcm of the factor lists.
        let mut counts: BTreeMap<&Scalar, (usize, usize)> = BTreeMap::new();
        for f in &self.den {
            counts.entry(f).or_insert((0, 0)).0 += 1;
        }
        for f in &o.den {
            counts.entry(f).or_insert((0, 0)).1 += 1;
        }
        let mut lcm: Vec<Scalar> = Vec::new();
        let mut left = self.num.clone();
        let mut right = o.num.clone();
        for (f, (a, b)) in counts {
            let m = a.max(b);
            for _ in 0..m {
                lcm.push(f.clone());
            }
            for _ in a..m {
                left = left.mul(f);
            }
            for _ in b..m {
                right = right.mul(f);
            }
        }
        Ratio::new(left.add(&right), &lcm)
    }

    pub fn sub(&self, o: &Ratio) -> Ratio {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Ratio {
        Ratio {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Ratio) -> Ratio {
        let mut factors = self.den.clone();
        factors.extend(o.den.iter().cloned());
        Ratio::new(self.num.mul(&o.num), &factors)
    }

    /// Multiplicative inverse. Panics on zero (callers guard).
    pub fn inv(&self) -> Ratio {
        assert!(!self.is_zero(), "inverse of zero ratio");
        let table = self.table();
        let mut num = Scalar::from_ratio(table, 1, 1);
        for f in &self.den {
            num = num.mul(f);
        }
        Ratio::new(num, &[self.num.clone()])
    }

    pub fn pow_i32(&self, n: i32) -> Ratio {
        if n == 0 {
            return Ratio::one(self.table());
        }
        let base = if n < 0 { self.inv() } else { self.clone() };
        let k = n.unsigned_abs();
        let num = base.num.pow(k);
        let mut den = Vec::new();
        for f in &base.den {
            for _ in 0..k {
                den.push(f.clone());
            }
        }
        Ratio::new(num, &den)
    }

    pub fn conjugate(&self) -> Ratio {
        Ratio::new(
            self.num.conjugate(),
            &self
                .den
                .iter()
                .map(|f| f.conjugate())
                .collect::<Vec<_>>(),
        )
    }

    /// Constant value when the ratio is symbol-free.
    pub fn as_gaussian(&self) -> Option<GaussianRational> {
        if !self.den.is_empty() {
            return None;
        }
        self.num.as_constant()
    }

    /// Integer value when the ratio is a rational integer constant.
    pub fn as_i32(&self) -> Option<i32> {
        let g = self.as_gaussian()?;
        if !g.im.is_zero() || !g.re.is_integer() {
            return None;
        }
        i32::try_from(g.re.to_integer()).ok()
    }

    fn eval(&self, asg: &Assignment) -> Option<GaussianRational> {
        let mut v = self.num.eval(&asg.point, asg.t.as_ref()).ok()?;
        for f in &self.den {
            let fv = f.eval(&asg.point, asg.t.as_ref()).ok()?;
            if fv.is_zero() {
                return None;
            }
            v = v.mul(&fv.inv());
        }
        Some(v)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "({})", self.num);
        }
        write!(f, "(({})", self.num)?;
        for d in &self.den {
            write!(f, "/({d})")?;
        }
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// Direction polynomials

/// Polynomial in the chart directions with `Ratio` coefficients; the base
/// language for pow bases and exp/log arguments. Exponents are kept ≥ 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Ratio>,
}

impl Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, mono: Mono, coeff: Ratio) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&coeff);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    fn scale(&self, r: &Ratio) -> Poly {
        if r.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul(r)))
                .collect(),
        }
    }

    fn single_term(&self) -> Option<(&Mono, &Ratio)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn leading(&self) -> Option<(&Mono, &Ratio)> {
        self.terms.iter().next_back()
    }

    /// λ with `self = λ·other`, when the polynomials are proportional.
    fn proportional_to(&self, other: &Poly) -> Option<Ratio> {
        if self.terms.len() != other.terms.len() || self.is_zero() {
            return None;
        }
        let (lm, lc) = self.leading()?;
        let oc = other.terms.get(lm)?;
        let lambda = lc.mul(&oc.inv());
        for (m, c) in &self.terms {
            let o = other.terms.get(m)?;
            if o.mul(&lambda) != *c {
                return None;
            }
        }
        Some(lambda)
    }

    fn partial(&self, dir: Dir) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m[dir];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm[dir] -= 1;
            out.insert(dm, c.mul(&Ratio::from_int(c.table(), e as i64)));
        }
        out
    }

    fn conjugate(&self, chart: &Chart) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut cm = vec![0i32; m.len()];
            for (d, &e) in m.iter().enumerate() {
                cm[chart.conj_dir(d)] = e;
            }
            out.insert(cm, c.conjugate());
        }
        out
    }

    fn eval(&self, asg: &Assignment) -> Option<GaussianRational> {
        let mut total = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.eval(asg)?;
            for (d, &e) in m.iter().enumerate() {
                if e != 0 {
                    v = v.mul(&g_pow(&asg.dir_vals[d], e)?);
                }
            }
            total = total.add(&v);
        }
        Some(total)
    }

    fn render(&self, chart: &Chart) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mono = render_mono(chart, m);
            if mono.is_empty() {
                parts.push(c.to_string());
            } else if c.is_one() {
                parts.push(mono);
            } else {
                parts.push(format!("{c}*{mono}"));
            }
        }
        parts.join(" + ")
    }
}

fn render_mono(chart: &Chart, m: &Mono) -> String {
    let mut parts = Vec::new();
    for (d, &e) in m.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if e == 1 {
            parts.push(chart.dir_label(d).to_string());
        } else {
            parts.push(format!("{}^{}", chart.dir_label(d), e));
        }
    }
    parts.join("*")
}

/// Integer power of an exact complex rational; `None` for 0^negative.
fn g_pow(g: &GaussianRational, n: i32) -> Option<GaussianRational> {
    if n == 0 {
        return Some(GaussianRational::one());
    }
    if g.is_zero() {
        return if n > 0 {
            Some(GaussianRational::zero())
        } else {
            None
        };
    }
    let base = if n < 0 { g.inv() } else { g.clone() };
    let mut out = GaussianRational::one();
    for _ in 0..n.unsigned_abs() {
        out = out.mul(&base);
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Canonical terms

/// Base of a formal power factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PowBase {
    /// Coordinate-free constant under a (necessarily non-integer) exponent.
    Constant(Ratio),
    /// Polynomial in the directions, kept exactly as constructed.
    Polynomial(Poly),
}

/// One `pow(base, exponent)` factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PowFactor {
    pub base: PowBase,
    pub exp: Ratio,
}

/// Canonical multiplicative term: Laurent monomial × pow factors × at most
/// one exponential × log factors. The coefficient lives in the enclosing
/// map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    mono: Mono,
    pows: Vec<PowFactor>,
    exp_arg: Poly,
    logs: Vec<Poly>,
}

impl Term {
    fn unit(n_dirs: usize) -> Term {
        Term {
            mono: vec![0; n_dirs],
            pows: Vec::new(),
            exp_arg: Poly::zero(),
            logs: Vec::new(),
        }
    }

    fn is_factor_free(&self) -> bool {
        self.pows.is_empty() && self.exp_arg.is_zero() && self.logs.is_empty()
    }

    /// Whether every factor evaluates exactly at rational points: integer
    /// exponents on polynomial bases, no exp, no log, no formal constants.
    fn is_exact(&self) -> bool {
        self.exp_arg.is_zero()
            && self.logs.is_empty()
            && self.pows.iter().all(|f| {
                matches!(f.base, PowBase::Polynomial(_)) && f.exp.as_i32().is_some()
            })
    }

    fn render(&self, chart: &Chart, coeff: &Ratio) -> String {
        let mut parts = Vec::new();
        let mono = render_mono(chart, &self.mono);
        if !mono.is_empty() {
            parts.push(mono);
        }
        for f in &self.pows {
            let base = match &f.base {
                PowBase::Constant(c) => c.to_string(),
                PowBase::Polynomial(p) => p.render(chart),
            };
            parts.push(format!("pow({}, {})", base, f.exp));
        }
        if !self.exp_arg.is_zero() {
            parts.push(format!("exp({})", self.exp_arg.render(chart)));
        }
        for l in &self.logs {
            parts.push(format!("log({})", l.render(chart)));
        }
        if parts.is_empty() {
            coeff.to_string()
        } else if coeff.is_one() {
            parts.join("*")
        } else {
            format!("{}*{}", coeff, parts.join("*"))
        }
    }
}

/// Accumulates factors of a product term and renormalizes on `finish`.
struct TermBuilder {
    table: Arc<SymbolTable>,
    coeff: Ratio,
    mono: Mono,
    pows: BTreeMap<PowBase, Ratio>,
    exp_arg: Poly,
    logs: Vec<Poly>,
    queue: Vec<Poly>,
}

impl TermBuilder {
    fn new(table: &Arc<SymbolTable>, n_dirs: usize) -> TermBuilder {
        TermBuilder {
            table: table.clone(),
            coeff: Ratio::one(table),
            mono: vec![0; n_dirs],
            pows: BTreeMap::new(),
            exp_arg: Poly::zero(),
            logs: Vec::new(),
            queue: Vec::new(),
        }
    }

    fn from_term(table: &Arc<SymbolTable>, t: &Term, coeff: &Ratio) -> TermBuilder {
        let mut b = TermBuilder::new(table, t.mono.len());
        b.coeff = coeff.clone();
        b.mono = t.mono.clone();
        for f in &t.pows {
            b.push_pow_base(f.base.clone(), &f.exp);
        }
        b.exp_arg = t.exp_arg.clone();
        b.logs = t.logs.clone();
        b
    }

    fn mul_coeff(&mut self, r: &Ratio) {
        self.coeff = self.coeff.mul(r);
    }

    fn mul_mono(&mut self, m: &Mono) {
        for (d, e) in m.iter().enumerate() {
            self.mono[d] += e;
        }
    }

    fn push_pow_base(&mut self, base: PowBase, exp: &Ratio) {
        if exp.is_zero() {
            return;
        }
        match self.pows.entry(base) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(exp.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(exp);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `pow(base, exp)` with a polynomial base as written. Constant bases
    /// are routed to the constant form.
    fn push_pow(&mut self, base: &Poly, exp: &Ratio) {
        assert!(!base.is_zero(), "power of a zero base");
        if let Some((m, c)) = base.single_term() {
            if m.iter().all(|&e| e == 0) {
                self.push_pow_base(PowBase::Constant(c.clone()), exp);
                return;
            }
        }
        self.push_pow_base(PowBase::Polynomial(base.clone()), exp);
    }

    fn push_exp(&mut self, arg: &Poly) {
        self.exp_arg = self.exp_arg.add(arg);
    }

    fn push_log(&mut self, arg: Poly) {
        self.logs.push(arg);
    }

    /// Multiply by a polynomial in the directions (expanded on finish).
    fn push_poly(&mut self, p: Poly) {
        if p.is_zero() {
            self.coeff = Ratio::zero(&self.table);
        } else {
            self.queue.push(p);
        }
    }

    /// Resolve the factor map into canonical form and accumulate the
    /// expanded terms into `out`.
    fn finish(mut self, out: &mut BTreeMap<Term, Ratio>) {
        if self.coeff.is_zero() {
            return;
        }
        let mut entries: Vec<(PowBase, Ratio)> = self.pows.into_iter().collect();

        // Rebase integer-exponent polynomial factors onto proportional
        // partners: pow(λ·B, n) = λⁿ·pow(B, n) is exact for integer n.
        // Earlier entries win, so the pass is deterministic.
        let mut i = 0;
        'outer: while i < entries.len() {
            let mut j = i + 1;
            while j < entries.len() {
                let (lam_ij, int_j) = {
                    let (bi, _) = &entries[i];
                    let (bj, ej) = &entries[j];
                    match (bi, bj) {
                        (PowBase::Polynomial(pi), PowBase::Polynomial(pj)) => {
                            (pj.proportional_to(pi), ej.as_i32())
                        }
                        _ => (None, None),
                    }
                };
                if let Some(lam) = lam_ij {
                    let (_, ej) = entries[j].clone();
                    if let Some(n) = int_j {
                        // Move j onto i's base.
                        self.coeff = self.coeff.mul(&lam.pow_i32(n));
                        let merged = entries[i].1.add(&ej);
                        entries.remove(j);
                        if merged.is_zero() {
                            entries.remove(i);
                            continue 'outer;
                        }
                        entries[i].1 = merged;
                        continue;
                    }
                    if let Some(m) = entries[i].1.as_i32() {
                        // Move i onto j's base: pow(Bi, m) = λ^{−m}·pow(Bj, m).
                        self.coeff = self.coeff.mul(&lam.pow_i32(-m));
                        let merged = entries[j].1.add(&entries[i].1);
                        entries.remove(i);
                        if merged.is_zero() {
                            entries.remove(j - 1);
                        } else {
                            entries[j - 1].1 = merged;
                        }
                        continue 'outer;
                    }
                }
                j += 1;
            }
            i += 1;
        }

        let mut pows: Vec<PowFactor> = Vec::new();
        for (base, exp) in entries {
            if exp.is_zero() {
                continue;
            }
            match base {
                PowBase::Constant(c) => {
                    if c.is_one() {
                        continue;
                    }
                    if let Some(n) = exp.as_i32() {
                        self.coeff = self.coeff.mul(&c.pow_i32(n));
                    } else {
                        pows.push(PowFactor {
                            base: PowBase::Constant(c),
                            exp,
                        });
                    }
                }
                PowBase::Polynomial(p) => {
                    if let Some(n) = exp.as_i32() {
                        if let Some((m, c)) = p.single_term() {
                            // (c·X)^n folds entirely.
                            self.coeff = self.coeff.mul(&c.pow_i32(n));
                            for (d, &e) in m.iter().enumerate() {
                                self.mono[d] += e * n;
                            }
                            continue;
                        }
                        // Monicize: the leading coefficient folds exactly
                        // under an integer exponent.
                        let lc = p.leading().expect("nonzero base").1.clone();
                        let monic = if lc.is_one() {
                            p
                        } else {
                            self.coeff = self.coeff.mul(&lc.pow_i32(n));
                            p.scale(&lc.inv())
                        };
                        if (1..=EXPAND_BOUND).contains(&n) {
                            for _ in 0..n {
                                self.queue.push(monic.clone());
                            }
                        } else {
                            pows.push(PowFactor {
                                base: PowBase::Polynomial(monic),
                                exp,
                            });
                        }
                    } else {
                        pows.push(PowFactor {
                            base: PowBase::Polynomial(p),
                            exp,
                        });
                    }
                }
            }
        }
        if self.coeff.is_zero() {
            return;
        }
        self.logs.sort();

        // Expand queued polynomial multipliers distributively.
        let mut expanded: BTreeMap<Mono, Ratio> = BTreeMap::new();
        expanded.insert(self.mono, self.coeff);
        for p in &self.queue {
            let mut next: BTreeMap<Mono, Ratio> = BTreeMap::new();
            for (m0, c0) in &expanded {
                for (pm, pc) in &p.terms {
                    let mut m = m0.clone();
                    for (d, e) in pm.iter().enumerate() {
                        m[d] += e;
                    }
                    let c = c0.mul(pc);
                    accumulate_term_coeff(&mut next, m, c);
                }
            }
            expanded = next;
        }

        for (m, c) in expanded {
            let term = Term {
                mono: m,
                pows: pows.clone(),
                exp_arg: self.exp_arg.clone(),
                logs: self.logs.clone(),
            };
            accumulate(out, term, c);
        }
    }
}

fn accumulate(out: &mut BTreeMap<Term, Ratio>, term: Term, coeff: Ratio) {
    if coeff.is_zero() {
        return;
    }
    match out.entry(term) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get().add(&coeff);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

fn accumulate_term_coeff(out: &mut BTreeMap<Mono, Ratio>, mono: Mono, coeff: Ratio) {
    if coeff.is_zero() {
        return;
    }
    match out.entry(mono) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get().add(&coeff);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Coordinate scalars

/// A scalar function on a chart in canonical term form.
#[derive(Debug, Clone)]
pub struct CoordScalar {
    chart: Chart,
    table: Arc<SymbolTable>,
    terms: BTreeMap<Term, Ratio>,
}

impl PartialEq for CoordScalar {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && *self.table == *other.table && self.terms == other.terms
    }
}

impl Eq for CoordScalar {}

impl CoordScalar {
    pub fn zero(chart: &Chart, table: &Arc<SymbolTable>) -> CoordScalar {
        CoordScalar {
            chart: chart.clone(),
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: &Chart, table: &Arc<SymbolTable>) -> CoordScalar {
        CoordScalar::constant(chart, table, Ratio::one(table))
    }

    pub fn constant(chart: &Chart, table: &Arc<SymbolTable>, c: Ratio) -> CoordScalar {
        let mut terms = BTreeMap::new();
        accumulate(&mut terms, Term::unit(chart.dir_count()), c);
        CoordScalar {
            chart: chart.clone(),
            table: table.clone(),
            terms,
        }
    }

    pub fn from_scalar(chart: &Chart, c: &Scalar) -> CoordScalar {
        CoordScalar::constant(chart, c.table(), Ratio::from_scalar(c.clone()))
    }

    pub fn coordinate(chart: &Chart, table: &Arc<SymbolTable>, dir: Dir) -> CoordScalar {
        let mut term = Term::unit(chart.dir_count());
        term.mono[dir] = 1;
        let mut terms = BTreeMap::new();
        accumulate(&mut terms, term, Ratio::one(table));
        CoordScalar {
            chart: chart.clone(),
            table: table.clone(),
            terms,
        }
    }

    fn exp_of(chart: &Chart, table: &Arc<SymbolTable>, arg: &Poly) -> CoordScalar {
        let mut out = CoordScalar::zero(chart, table);
        let mut b = TermBuilder::new(table, chart.dir_count());
        b.push_exp(arg);
        b.finish(&mut out.terms);
        out
    }

    fn log_of(chart: &Chart, table: &Arc<SymbolTable>, arg: Poly) -> CoordScalar {
        let mut out = CoordScalar::zero(chart, table);
        let mut b = TermBuilder::new(table, chart.dir_count());
        b.push_log(arg);
        b.finish(&mut out.terms);
        out
    }

    fn pow_of(chart: &Chart, table: &Arc<SymbolTable>, base: &Poly, exp: &Ratio) -> CoordScalar {
        let mut out = CoordScalar::zero(chart, table);
        let mut b = TermBuilder::new(table, chart.dir_count());
        b.push_pow(base, exp);
        b.finish(&mut out.terms);
        out
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &CoordScalar) -> CoordScalar {
        same_context(self, o);
        let mut out = self.clone();
        for (t, c) in &o.terms {
            accumulate(&mut out.terms, t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &CoordScalar) -> CoordScalar {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> CoordScalar {
        CoordScalar {
            chart: self.chart.clone(),
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, r: &Ratio) -> CoordScalar {
        if r.is_zero() {
            return CoordScalar::zero(&self.chart, &self.table);
        }
        let mut out = CoordScalar::zero(&self.chart, &self.table);
        for (t, c) in &self.terms {
            accumulate(&mut out.terms, t.clone(), c.mul(r));
        }
        out
    }

    pub fn mul(&self, o: &CoordScalar) -> CoordScalar {
        same_context(self, o);
        let mut out = CoordScalar::zero(&self.chart, &self.table);
        for (t1, c1) in &self.terms {
            for (t2, c2) in &o.terms {
                let mut b = TermBuilder::from_term(&self.table, t1, &c1.mul(c2));
                b.mul_mono(&t2.mono);
                for f in &t2.pows {
                    b.push_pow_base(f.base.clone(), &f.exp);
                }
                b.push_exp(&t2.exp_arg);
                for l in &t2.logs {
                    b.push_log(l.clone());
                }
                b.finish(&mut out.terms);
            }
        }
        out
    }

    /// Division. The divisor must be a single term without log factors, or
    /// a factor-free polynomial (a Laurent monomial times a polynomial is
    /// inverted as monomial⁻¹·pow(polynomial, −1)).
    pub fn div(&self, o: &CoordScalar) -> Result<CoordScalar> {
        same_context(self, o);
        if o.terms.is_empty() {
            return Err(Error::Chart("division by zero".into()));
        }
        if o.terms.len() == 1 {
            let (t, c) = o.terms.iter().next().expect("single term");
            if !t.logs.is_empty() {
                return Err(Error::Chart(
                    "cannot divide by a term containing log".into(),
                ));
            }
            let mut b = TermBuilder::new(&self.table, self.chart.dir_count());
            b.mul_coeff(&c.inv());
            let neg_mono: Mono = t.mono.iter().map(|e| -e).collect();
            b.mul_mono(&neg_mono);
            for f in &t.pows {
                b.push_pow_base(f.base.clone(), &f.exp.neg());
            }
            if !t.exp_arg.is_zero() {
                b.push_exp(&t.exp_arg.neg());
            }
            let mut inv = CoordScalar::zero(&self.chart, &self.table);
            b.finish(&mut inv.terms);
            return Ok(self.mul(&inv));
        }
        if !o.terms.keys().all(Term::is_factor_free) {
            return Err(Error::Chart(
                "divisor must be a single term or a polynomial in the \
                 coordinates"
                    .into(),
            ));
        }
        // Extract the per-direction minimum exponent so the rest is a
        // genuine polynomial.
        let n = self.chart.dir_count();
        let mut mu = vec![i32::MAX; n];
        for t in o.terms.keys() {
            for d in 0..n {
                mu[d] = mu[d].min(t.mono[d]);
            }
        }
        let mut p = Poly::zero();
        for (t, c) in &o.terms {
            let m: Mono = (0..n).map(|d| t.mono[d] - mu[d]).collect();
            p.insert(m, c.clone());
        }
        let mut b = TermBuilder::new(&self.table, n);
        let neg_mu: Mono = mu.iter().map(|e| -e).collect();
        b.mul_mono(&neg_mu);
        b.push_pow(&p, &Ratio::from_int(&self.table, -1));
        let mut inv = CoordScalar::zero(&self.chart, &self.table);
        b.finish(&mut inv.terms);
        Ok(self.mul(&inv))
    }

    pub fn pow_int(&self, n: i32) -> Result<CoordScalar> {
        if n == 0 {
            return Ok(CoordScalar::one(&self.chart, &self.table));
        }
        if n < 0 {
            let pos = self.pow_int(-n)?;
            return CoordScalar::one(&self.chart, &self.table).div(&pos);
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.mul(self);
        }
        Ok(out)
    }

    pub fn conjugate(&self) -> CoordScalar {
        let mut out = CoordScalar::zero(&self.chart, &self.table);
        for (t, c) in &self.terms {
            let mut b = TermBuilder::new(&self.table, self.chart.dir_count());
            b.mul_coeff(&c.conjugate());
            let mut cm = vec![0i32; t.mono.len()];
            for (d, &e) in t.mono.iter().enumerate() {
                cm[self.chart.conj_dir(d)] = e;
            }
            b.mul_mono(&cm);
            for f in &t.pows {
                match &f.base {
                    PowBase::Constant(cc) => {
                        b.push_pow_base(PowBase::Constant(cc.conjugate()), &f.exp.conjugate());
                    }
                    PowBase::Polynomial(p) => {
                        b.push_pow(&p.conjugate(&self.chart), &f.exp.conjugate());
                    }
                }
            }
            if !t.exp_arg.is_zero() {
                b.push_exp(&t.exp_arg.conjugate(&self.chart));
            }
            for l in &t.logs {
                b.push_log(l.conjugate(&self.chart));
            }
            b.finish(&mut out.terms);
        }
        out
    }

    /// Partial derivative along a chart direction (directions are
    /// independent derivations; on holomorphic charts these are the
    /// Wirtinger operators).
    pub fn partial(&self, dir: Dir) -> CoordScalar {
        assert!(dir < self.chart.dir_count(), "direction out of range");
        let mut out = CoordScalar::zero(&self.chart, &self.table);
        for (t, c) in &self.terms {
            // Monomial factor.
            let e = t.mono[dir];
            if e != 0 {
                let mut b = TermBuilder::from_term(
                    &self.table,
                    t,
                    &c.mul(&Ratio::from_int(&self.table, e as i64)),
                );
                b.mono[dir] -= 1;
                b.finish(&mut out.terms);
            }
            // Power factors.
            for (k, f) in t.pows.iter().enumerate() {
                let PowBase::Polynomial(p) = &f.base else {
                    continue;
                };
                let dp = p.partial(dir);
                if dp.is_zero() {
                    continue;
                }
                let mut b = TermBuilder::new(&self.table, self.chart.dir_count());
                b.mul_coeff(&c.mul(&f.exp));
                b.mul_mono(&t.mono);
                for (k2, f2) in t.pows.iter().enumerate() {
                    if k2 != k {
                        b.push_pow_base(f2.base.clone(), &f2.exp);
                    }
                }
                b.push_pow_base(
                    f.base.clone(),
                    &f.exp.sub(&Ratio::one(&self.table)),
                );
                if !t.exp_arg.is_zero() {
                    b.push_exp(&t.exp_arg);
                }
                for l in &t.logs {
                    b.push_log(l.clone());
                }
                b.push_poly(dp);
                b.finish(&mut out.terms);
            }
            // Exponential factor.
            if !t.exp_arg.is_zero() {
                let darg = t.exp_arg.partial(dir);
                if !darg.is_zero() {
                    let mut b = TermBuilder::from_term(&self.table, t, c);
                    b.push_poly(darg);
                    b.finish(&mut out.terms);
                }
            }
            // Log factors.
            for (k, l) in t.logs.iter().enumerate() {
                let dl = l.partial(dir);
                if dl.is_zero() {
                    continue;
                }
                let mut b = TermBuilder::new(&self.table, self.chart.dir_count());
                b.mul_coeff(c);
                b.mul_mono(&t.mono);
                for f in &t.pows {
                    b.push_pow_base(f.base.clone(), &f.exp);
                }
                if !t.exp_arg.is_zero() {
                    b.push_exp(&t.exp_arg);
                }
                for (k2, l2) in t.logs.iter().enumerate() {
                    if k2 != k {
                        b.push_log(l2.clone());
                    }
                }
                b.push_pow(l, &Ratio::from_int(&self.table, -1));
                b.push_poly(dl);
                b.finish(&mut out.terms);
            }
        }
        out
    }

    /// The value as a direction polynomial, when factor-free with
    /// non-negative exponents.
    fn to_poly(&self) -> Option<Poly> {
        let mut p = Poly::zero();
        for (t, c) in &self.terms {
            if !t.is_factor_free() || t.mono.iter().any(|&e| e < 0) {
                return None;
            }
            p.insert(t.mono.clone(), c.clone());
        }
        Some(p)
    }

    /// The value as a coordinate-free constant, when it is one.
    fn to_constant(&self) -> Option<Ratio> {
        if self.terms.is_empty() {
            return Some(Ratio::zero(&self.table));
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (t, c) = self.terms.iter().next().expect("single term");
        if *t == Term::unit(self.chart.dir_count()) {
            Some(c.clone())
        } else {
            None
        }
    }

    /// Decide whether the value is identically zero. See the module's
    /// Design Notes for the verdict ladder.
    pub fn zero_test(&self) -> Verdict {
        if self.terms.is_empty() {
            return Verdict::ZeroNormalForm;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        if self.terms.keys().all(Term::is_exact) {
            return self.sample_exact(&mut rng);
        }
        if self.chart.is_real() {
            return self.sample_numeric(&mut rng);
        }
        Verdict::NonzeroNormalForm {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| t.render(&self.chart, c))
                .collect(),
        }
    }

    fn sample_exact(&self, rng: &mut ChaCha8Rng) -> Verdict {
        let mut zeros = 0u32;
        for _ in 0..DRAW_CAP {
            if zeros >= SAMPLE_TARGET {
                break;
            }
            let asg = Assignment::draw(&self.chart, &self.table, rng);
            let Some(value) = self.eval_exact(&asg) else {
                continue;
            };
            if !value.is_zero() {
                return Verdict::Nonzero {
                    witness: format!("{}; value = {}", asg.render(&self.chart), value),
                };
            }
            zeros += 1;
        }
        if zeros >= SAMPLE_TARGET {
            Verdict::ZeroSampled { samples: zeros }
        } else {
            Verdict::NonzeroNormalForm {
                terms: self
                    .terms
                    .iter()
                    .map(|(t, c)| t.render(&self.chart, c))
                    .collect(),
            }
        }
    }

    fn eval_exact(&self, asg: &Assignment) -> Option<GaussianRational> {
        let mut total = GaussianRational::zero();
        for (t, c) in &self.terms {
            let mut v = c.eval(asg)?;
            for (d, &e) in t.mono.iter().enumerate() {
                if e != 0 {
                    v = v.mul(&g_pow(&asg.dir_vals[d], e)?);
                }
            }
            for f in &t.pows {
                let PowBase::Polynomial(p) = &f.base else {
                    return None;
                };
                let n = f.exp.as_i32()?;
                let bv = p.eval(asg)?;
                v = v.mul(&g_pow(&bv, n)?);
            }
            total = total.add(&v);
        }
        Some(total)
    }

    fn sample_numeric(&self, rng: &mut ChaCha8Rng) -> Verdict {
        let wp = NUMERIC_BITS;
        let mut cc = Consts::new().expect("constants cache");
        let tau_hi = pow2_neg(100, wp);
        let tau_lo = pow2_neg(200, wp);
        let mut zeros = 0u32;
        for _ in 0..DRAW_CAP {
            if zeros >= SAMPLE_TARGET {
                break;
            }
            let asg = Assignment::draw(&self.chart, &self.table, rng);
            let Some((total, scale2)) = self.eval_numeric(&asg, wp, &mut cc) else {
                continue;
            };
            // Relative thresholds: terms can reach astronomical magnitudes
            // under symbolic exponents, so roundoff is measured against the
            // sum of squared term magnitudes (plus one, for tiny values).
            let one = BigFloat::from_i64(1, wp);
            let rel = scale2.add(&one, wp, RM);
            let norm2 = total.norm_sq(wp);
            if signed_gt(&norm2, &tau_hi.mul(&rel, wp, RM)) {
                return Verdict::Nonzero {
                    witness: format!(
                        "{}; relative residual exceeds 2^-50 at 192-bit \
                         precision",
                        asg.render(&self.chart)
                    ),
                };
            }
            if signed_le(&norm2, &tau_lo.mul(&rel, wp, RM)) {
                zeros += 1;
            }
            // Between the thresholds: inconclusive, discard the point.
        }
        if zeros >= SAMPLE_TARGET {
            Verdict::ZeroSampled { samples: zeros }
        } else {
            Verdict::NonzeroNormalForm {
                terms: self
                    .terms
                    .iter()
                    .map(|(t, c)| t.render(&self.chart, c))
                    .collect(),
            }
        }
    }

    /// Numeric value at an assignment on a real chart, together with the
    /// sum of squared term magnitudes (the scale for relative residual
    /// thresholds); `None` marks the point inadmissible (a pole, a
    /// non-positive base, or a base/argument inside the rejected
    /// neighborhood of zero).
    fn eval_numeric(
        &self,
        asg: &Assignment,
        wp: usize,
        cc: &mut Consts,
    ) -> Option<(CFloat, BigFloat)> {
        let sixteenth = BigRational::new(BigInt::from(1), BigInt::from(16));
        // Admissibility across all terms first, so a rejection is a
        // property of the point rather than of evaluation order.
        for (t, _) in &self.terms {
            for f in &t.pows {
                let integer = f.exp.as_i32().is_some();
                f.exp.eval(asg)?;
                match &f.base {
                    PowBase::Polynomial(p) => {
                        let bv = p.eval(asg)?;
                        if integer {
                            if bv.is_zero() {
                                return None;
                            }
                        } else if !bv.im.is_zero() || bv.re < sixteenth {
                            return None;
                        }
                    }
                    PowBase::Constant(c) => {
                        let cv = c.eval(asg)?;
                        if !cv.im.is_zero() || cv.re < sixteenth {
                            return None;
                        }
                    }
                }
            }
            for l in &t.logs {
                let lv = l.eval(asg)?;
                if !lv.im.is_zero() || lv.re < sixteenth {
                    return None;
                }
            }
        }
        let mut total = CFloat::zero(wp);
        let mut scale2 = BigFloat::from_i64(0, wp);
        for (t, c) in &self.terms {
            // Exact part: coefficient, monomial, integer-exponent powers.
            let mut exact = c.eval(asg)?;
            for (d, &e) in t.mono.iter().enumerate() {
                if e != 0 {
                    exact = exact.mul(&g_pow(&asg.dir_vals[d], e)?);
                }
            }
            let mut v = CFloat::from_gaussian(&exact, wp, cc);
            for f in &t.pows {
                let ev = f.exp.eval(asg)?;
                match (&f.base, f.exp.as_i32()) {
                    (PowBase::Polynomial(p), Some(n)) => {
                        let bv = p.eval(asg)?;
                        let part = CFloat::from_gaussian(&g_pow(&bv, n)?, wp, cc);
                        v = v.mul(&part, wp);
                    }
                    (PowBase::Polynomial(p), None) => {
                        let bv = p.eval(asg)?;
                        let base = rational_to_float(&bv.re, wp, cc);
                        let e = CFloat::from_gaussian(&ev, wp, cc);
                        v = v.mul(&CFloat::pow_pos_base(&base, &e, wp, cc), wp);
                    }
                    (PowBase::Constant(cb), _) => {
                        let cv = cb.eval(asg)?;
                        let base = rational_to_float(&cv.re, wp, cc);
                        let e = CFloat::from_gaussian(&ev, wp, cc);
                        v = v.mul(&CFloat::pow_pos_base(&base, &e, wp, cc), wp);
                    }
                }
            }
            if !t.exp_arg.is_zero() {
                let av = t.exp_arg.eval(asg)?;
                v = v.mul(&CFloat::from_gaussian(&av, wp, cc).exp(wp, cc), wp);
            }
            for l in &t.logs {
                let lv = l.eval(asg)?;
                let lf = rational_to_float(&lv.re, wp, cc).ln(wp, RM, cc);
                v = v.mul(&CFloat::real(lf, wp), wp);
            }
            scale2 = scale2.add(&v.norm_sq(wp), wp, RM);
            total = total.add(&v, wp);
        }
        Some((total, scale2))
    }
}

impl fmt::Display for CoordScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| t.render(&self.chart, c))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Sample assignments

struct Assignment {
    dir_vals: Vec<GaussianRational>,
    point: BTreeMap<String, GaussianRational>,
    t: Option<BigRational>,
}

fn rand_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let mut num = (rng.next_u64() % 4001) as i64 - 2000;
    if num == 0 {
        num = 3;
    }
    let den = (rng.next_u64() % 31 + 1) as i64;
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Assignment {
    fn draw(chart: &Chart, table: &Arc<SymbolTable>, rng: &mut ChaCha8Rng) -> Assignment {
        let n = chart.dir_count();
        let mut dir_vals = vec![GaussianRational::zero(); n];
        if chart.is_real() {
            for v in dir_vals.iter_mut() {
                *v = GaussianRational::new(rand_rational(rng), BigRational::zero());
            }
        } else {
            let mut d = 0;
            while d < n {
                let g = GaussianRational::new(rand_rational(rng), rand_rational(rng));
                dir_vals[d] = g.conj();
                dir_vals[d] = g.clone();
                dir_vals[d + 1] = g.conj();
                d += 2;
            }
        }
        let mut point = BTreeMap::new();
        let mut t = None;
        for idx in 0..table.len() {
            let name = table.name(idx).to_string();
            match table.kind(idx) {
                SymbolKind::Real => {
                    point.insert(
                        name,
                        GaussianRational::new(rand_rational(rng), BigRational::zero()),
                    );
                }
                SymbolKind::ConjugatePair { partner } => {
                    if idx < partner {
                        let g = GaussianRational::new(rand_rational(rng), rand_rational(rng));
                        point.insert(table.name(partner).to_string(), g.conj());
                        point.insert(name, g);
                    }
                }
                SymbolKind::CircleCos { .. } | SymbolKind::CircleSin { .. } => {
                    if t.is_none() {
                        t = Some(rand_rational(rng));
                    }
                }
            }
        }
        Assignment { dir_vals, point, t }
    }

    fn render(&self, chart: &Chart) -> String {
        let mut parts = Vec::new();
        for (d, v) in self.dir_vals.iter().enumerate() {
            parts.push(format!("{} = {}", chart.dir_label(d), v));
        }
        for (name, v) in &self.point {
            parts.push(format!("{name} = {v}"));
        }
        if let Some(t) = &self.t {
            parts.push(format!("t = {t}"));
        }
        parts.join(", ")
    }
}

// ---------------------------------------------------------------------------
// Complex big-float arithmetic for the numeric fallback

struct CFloat {
    re: BigFloat,
    im: BigFloat,
}

impl CFloat {
    fn zero(wp: usize) -> CFloat {
        CFloat {
            re: BigFloat::from_i64(0, wp),
            im: BigFloat::from_i64(0, wp),
        }
    }

    fn real(re: BigFloat, wp: usize) -> CFloat {
        CFloat {
            re,
            im: BigFloat::from_i64(0, wp),
        }
    }

    fn from_gaussian(g: &GaussianRational, wp: usize, cc: &mut Consts) -> CFloat {
        CFloat {
            re: rational_to_float(&g.re, wp, cc),
            im: rational_to_float(&g.im, wp, cc),
        }
    }

    fn add(&self, o: &CFloat, wp: usize) -> CFloat {
        CFloat {
            re: self.re.add(&o.re, wp, RM),
            im: self.im.add(&o.im, wp, RM),
        }
    }

    fn mul(&self, o: &CFloat, wp: usize) -> CFloat {
        CFloat {
            re: self
                .re
                .mul(&o.re, wp, RM)
                .sub(&self.im.mul(&o.im, wp, RM), wp, RM),
            im: self
                .re
                .mul(&o.im, wp, RM)
                .add(&self.im.mul(&o.re, wp, RM), wp, RM),
        }
    }

    /// e^self = e^re·(cos im + i·sin im).
    fn exp(&self, wp: usize, cc: &mut Consts) -> CFloat {
        let m = self.re.exp(wp, RM, cc);
        CFloat {
            re: m.mul(&self.im.cos(wp, RM, cc), wp, RM),
            im: m.mul(&self.im.sin(wp, RM, cc), wp, RM),
        }
    }

    /// base^e for a positive real base: exp(e·ln base).
    fn pow_pos_base(base: &BigFloat, e: &CFloat, wp: usize, cc: &mut Consts) -> CFloat {
        let ln = base.ln(wp, RM, cc);
        CFloat {
            re: e.re.mul(&ln, wp, RM),
            im: e.im.mul(&ln, wp, RM),
        }
        .exp(wp, cc)
    }

    fn norm_sq(&self, wp: usize) -> BigFloat {
        self.re
            .mul(&self.re, wp, RM)
            .add(&self.im.mul(&self.im, wp, RM), wp, RM)
    }
}

// ---------------------------------------------------------------------------
// Verdicts

/// Outcome of a zero test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// The canonical form is empty: identically zero.
    ZeroNormalForm,
    /// Nonempty canonical form, but every admissible sample vanished.
    ZeroSampled { samples: u32 },
    /// A sample point with a nonzero value.
    Nonzero { witness: String },
    /// Nonempty canonical form that the evaluation fallback could not
    /// decide (formal factors on a complex chart, or no admissible
    /// points); reported as nonzero.
    NonzeroNormalForm { terms: Vec<String> },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(
            self,
            Verdict::ZeroNormalForm | Verdict::ZeroSampled { .. }
        )
    }
}

// ---------------------------------------------------------------------------
// Differential forms on a chart

/// A 1-form: one scalar component per direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordForm {
    chart: Chart,
    table: Arc<SymbolTable>,
    comps: Vec<CoordScalar>,
}

impl CoordForm {
    pub fn zero(chart: &Chart, table: &Arc<SymbolTable>) -> CoordForm {
        CoordForm {
            chart: chart.clone(),
            table: table.clone(),
            comps: (0..chart.dir_count())
                .map(|_| CoordScalar::zero(chart, table))
                .collect(),
        }
    }

    pub fn differential(chart: &Chart, table: &Arc<SymbolTable>, dir: Dir) -> CoordForm {
        let mut f = CoordForm::zero(chart, table);
        f.comps[dir] = CoordScalar::one(chart, table);
        f
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn component(&self, dir: Dir) -> &CoordScalar {
        &self.comps[dir]
    }

    fn same_shape(&self, o: &CoordForm) {
        assert!(
            self.chart == o.chart && *self.table == *o.table,
            "forms use different charts or symbol tables"
        );
    }

    pub fn add(&self, o: &CoordForm) -> CoordForm {
        self.same_shape(o);
        CoordForm {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &CoordForm) -> CoordForm {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> CoordForm {
        CoordForm {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps: self.comps.iter().map(CoordScalar::neg).collect(),
        }
    }

    pub fn scale(&self, s: &CoordScalar) -> CoordForm {
        CoordForm {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps: self.comps.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn div(&self, s: &CoordScalar) -> Result<CoordForm> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.div(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoordForm {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps,
        })
    }

    pub fn conjugate(&self) -> CoordForm {
        let mut out = CoordForm::zero(&self.chart, &self.table);
        for (d, c) in self.comps.iter().enumerate() {
            out.comps[self.chart.conj_dir(d)] = c.conjugate();
        }
        out
    }

    /// Exterior derivative: component (i, j) is ∂ᵢfⱼ − ∂ⱼfᵢ.
    pub fn d(&self) -> CoordForm2 {
        let n = self.chart.dir_count();
        let mut comps = BTreeMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                comps.insert(
                    (i, j),
                    self.comps[j].partial(i).sub(&self.comps[i].partial(j)),
                );
            }
        }
        CoordForm2 {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps,
        }
    }
}

impl fmt::Display for CoordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (d, c) in self.comps.iter().enumerate() {
            if !c.is_structurally_zero() {
                parts.push(format!("({})*{}", c, self.chart.diff_label(d)));
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A 2-form: one scalar component per ascending direction pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordForm2 {
    chart: Chart,
    table: Arc<SymbolTable>,
    comps: BTreeMap<(Dir, Dir), CoordScalar>,
}

impl CoordForm2 {
    pub fn zero(chart: &Chart, table: &Arc<SymbolTable>) -> CoordForm2 {
        let n = chart.dir_count();
        let mut comps = BTreeMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                comps.insert((i, j), CoordScalar::zero(chart, table));
            }
        }
        CoordForm2 {
            chart: chart.clone(),
            table: table.clone(),
            comps,
        }
    }

    /// a ∧ b: component (i, j) is aᵢbⱼ − aⱼbᵢ.
    pub fn wedge(a: &CoordForm, b: &CoordForm) -> CoordForm2 {
        a.same_shape(b);
        let mut out = CoordForm2::zero(&a.chart, &a.table);
        for ((i, j), c) in out.comps.iter_mut() {
            *c = a.comps[*i]
                .mul(&b.comps[*j])
                .sub(&a.comps[*j].mul(&b.comps[*i]));
        }
        out
    }

    pub fn add(&self, o: &CoordForm2) -> CoordForm2 {
        assert!(
            self.chart == o.chart && *self.table == *o.table,
            "2-forms use different charts or symbol tables"
        );
        let mut out = self.clone();
        for (k, c) in out.comps.iter_mut() {
            *c = c.add(&o.comps[k]);
        }
        out
    }

    pub fn sub(&self, o: &CoordForm2) -> CoordForm2 {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> CoordForm2 {
        CoordForm2 {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps: self
                .comps
                .iter()
                .map(|(k, c)| (*k, c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &CoordScalar) -> CoordForm2 {
        CoordForm2 {
            chart: self.chart.clone(),
            table: self.table.clone(),
            comps: self
                .comps
                .iter()
                .map(|(k, c)| (*k, c.mul(s)))
                .collect(),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&(Dir, Dir), &CoordScalar)> {
        self.comps.iter()
    }

    /// Exterior derivative of a scalar-weighted sum is not needed here;
    /// d of a 2-form on a 4-direction chart is checked through d∘d = 0 on
    /// its primitives instead.
    pub fn component(&self, i: Dir, j: Dir) -> &CoordScalar {
        &self.comps[&(i, j)]
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n: i64 = text.parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("integer literal `{text}` is out of range"),
                })?;
                toks.push((start, Tok::Int(n)));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(toks)
}

/// A parsed expression: scalar (degree 0) or 1-form (degree 1).
#[derive(Debug, Clone)]
pub enum Parsed {
    Scalar(CoordScalar),
    Form(CoordForm),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    src_len: usize,
    chart: &'a Chart,
    table: &'a Arc<SymbolTable>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, chart: &'a Chart, table: &'a Arc<SymbolTable>) -> Result<Parser<'a>> {
        for base in chart.base_names() {
            if table.index(base).is_some() {
                return Err(Error::Chart(format!(
                    "coordinate `{base}` collides with a model symbol"
                )));
            }
            let diff = format!("d{base}");
            if table.index(&diff).is_some() {
                return Err(Error::Chart(format!(
                    "differential name `{diff}` collides with a model symbol"
                )));
            }
        }
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            src_len: src.len(),
            chart,
            table,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        let pos = self.here();
        match self.bump() {
            Some((_, t)) if t == *tok => Ok(()),
            _ => Err(Error::Parse {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn parse_expr(&mut self) -> Result<Parsed> {
        let mut acc = self.parse_term()?;
        loop {
            let op_pos = self.here();
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = self.combine_add(op_pos, acc, rhs, false)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = self.combine_add(op_pos, acc, rhs, true)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn combine_add(&self, pos: usize, a: Parsed, b: Parsed, negate: bool) -> Result<Parsed> {
        let b = if negate { neg_parsed(b) } else { b };
        match (a, b) {
            (Parsed::Scalar(x), Parsed::Scalar(y)) => Ok(Parsed::Scalar(x.add(&y))),
            (Parsed::Form(x), Parsed::Form(y)) => Ok(Parsed::Form(x.add(&y))),
            _ => self.err(pos, "cannot add a scalar and a 1-form"),
        }
    }

    fn parse_term(&mut self) -> Result<Parsed> {
        let mut acc = self.parse_unary()?;
        loop {
            let op_pos = self.here();
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    acc = match (acc, rhs) {
                        (Parsed::Scalar(x), Parsed::Scalar(y)) => Parsed::Scalar(x.mul(&y)),
                        (Parsed::Scalar(x), Parsed::Form(y)) => Parsed::Form(y.scale(&x)),
                        (Parsed::Form(x), Parsed::Scalar(y)) => Parsed::Form(x.scale(&y)),
                        (Parsed::Form(_), Parsed::Form(_)) => {
                            return self.err(
                                op_pos,
                                "differentials appear linearly; products of \
                                 1-forms are not scalar expressions",
                            )
                        }
                    };
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    let Parsed::Scalar(y) = rhs else {
                        return self.err(op_pos, "cannot divide by a 1-form");
                    };
                    acc = match acc {
                        Parsed::Scalar(x) => Parsed::Scalar(
                            x.div(&y).map_err(|e| self.at(op_pos, e))?,
                        ),
                        Parsed::Form(x) => {
                            Parsed::Form(x.div(&y).map_err(|e| self.at(op_pos, e))?)
                        }
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn at(&self, pos: usize, e: Error) -> Error {
        match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                pos,
                msg: other.to_string(),
            },
        }
    }

    fn parse_unary(&mut self) -> Result<Parsed> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.parse_unary()?;
            return Ok(neg_parsed(inner));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Parsed> {
        let base = self.parse_atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        let op_pos = self.here();
        self.bump();
        let neg = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let exp_pos = self.here();
        let Some((_, Tok::Int(n))) = self.bump() else {
            return self.err(exp_pos, "expected an integer exponent after `^`");
        };
        let n = i32::try_from(if neg { -n } else { n }).map_err(|_| Error::Parse {
            pos: exp_pos,
            msg: "exponent is out of range".to_string(),
        })?;
        match base {
            Parsed::Scalar(s) => Ok(Parsed::Scalar(
                s.pow_int(n).map_err(|e| self.at(op_pos, e))?,
            )),
            Parsed::Form(_) => self.err(op_pos, "cannot raise a 1-form to a power"),
        }
    }

    fn parse_atom(&mut self) -> Result<Parsed> {
        let pos = self.here();
        match self.bump() {
            Some((_, Tok::Int(n))) => Ok(Parsed::Scalar(CoordScalar::constant(
                self.chart,
                self.table,
                Ratio::from_int(self.table, n),
            ))),
            Some((_, Tok::LParen)) => {
                let inner = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((_, Tok::Ident(name))) => self.resolve_ident(pos, name),
            Some((p, t)) => self.err(p, format!("unexpected token `{t:?}`")),
            None => self.err(pos, "unexpected end of input"),
        }
    }

    fn resolve_ident(&mut self, pos: usize, name: String) -> Result<Parsed> {
        if RESERVED.contains(&name.as_str()) && matches!(self.peek(), Some(Tok::LParen)) {
            return self.parse_call(pos, &name);
        }
        if name == "i" {
            return Ok(Parsed::Scalar(CoordScalar::constant(
                self.chart,
                self.table,
                Ratio::from_gaussian(self.table, GaussianRational::i()),
            )));
        }
        if let Some(dir) = self.chart.base_dir(&name) {
            return Ok(Parsed::Scalar(CoordScalar::coordinate(
                self.chart, self.table, dir,
            )));
        }
        if let Some(rest) = name.strip_prefix('d') {
            if let Some(dir) = self.chart.base_dir(rest) {
                return Ok(Parsed::Form(CoordForm::differential(
                    self.chart, self.table, dir,
                )));
            }
        }
        if table_has(self.table, &name) {
            let sym = Scalar::symbol_named(self.table, &name).expect("symbol exists");
            return Ok(Parsed::Scalar(CoordScalar::from_scalar(self.chart, &sym)));
        }
        self.err(pos, format!("unknown identifier `{name}`"))
    }

    fn parse_call(&mut self, pos: usize, name: &str) -> Result<Parsed> {
        self.expect(&Tok::LParen, "`(`")?;
        match name {
            "conj" => {
                let inner = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(match inner {
                    Parsed::Scalar(s) => Parsed::Scalar(s.conjugate()),
                    Parsed::Form(f) => Parsed::Form(f.conjugate()),
                })
            }
            "exp" => {
                let arg_pos = self.here();
                let arg = self.scalar_arg()?;
                self.expect(&Tok::RParen, "`)`")?;
                let Some(p) = arg.to_poly() else {
                    return self.err(
                        arg_pos,
                        "exp takes a polynomial in the coordinates",
                    );
                };
                Ok(Parsed::Scalar(CoordScalar::exp_of(
                    self.chart, self.table, &p,
                )))
            }
            "log" => {
                let arg_pos = self.here();
                let arg = self.scalar_arg()?;
                self.expect(&Tok::RParen, "`)`")?;
                let Some(p) = arg.to_poly() else {
                    return self.err(
                        arg_pos,
                        "log takes a polynomial in the coordinates",
                    );
                };
                if p.is_zero() {
                    return self.err(arg_pos, "log of zero");
                }
                Ok(Parsed::Scalar(CoordScalar::log_of(
                    self.chart,
                    self.table,
                    p,
                )))
            }
            "pow" => {
                let base_pos = self.here();
                let base = self.scalar_arg()?;
                self.expect(&Tok::Comma, "`,` between pow arguments")?;
                let exp_pos = self.here();
                let exp = self.scalar_arg()?;
                self.expect(&Tok::RParen, "`)`")?;
                let Some(p) = base.to_poly() else {
                    return self.err(
                        base_pos,
                        "pow base must be a polynomial in the coordinates",
                    );
                };
                if p.is_zero() {
                    return self.err(base_pos, "pow of a zero base");
                }
                let Some(e) = exp.to_constant() else {
                    return self.err(
                        exp_pos,
                        "pow exponent must be a coordinate-free constant",
                    );
                };
                Ok(Parsed::Scalar(CoordScalar::pow_of(
                    self.chart, self.table, &p, &e,
                )))
            }
            _ => self.err(pos, format!("unknown function `{name}`")),
        }
    }

    fn scalar_arg(&mut self) -> Result<CoordScalar> {
        let pos = self.here();
        match self.parse_expr()? {
            Parsed::Scalar(s) => Ok(s),
            Parsed::Form(_) => self.err(pos, "expected a scalar argument, found a 1-form"),
        }
    }
}

fn table_has(table: &Arc<SymbolTable>, name: &str) -> bool {
    table.index(name).is_some()
}

fn neg_parsed(p: Parsed) -> Parsed {
    match p {
        Parsed::Scalar(s) => Parsed::Scalar(s.neg()),
        Parsed::Form(f) => Parsed::Form(f.neg()),
    }
}

/// Parse an expression over a chart and symbol table.
pub fn parse_expression(src: &str, chart: &Chart, table: &Arc<SymbolTable>) -> Result<Parsed> {
    let mut p = Parser::new(src, chart, table)?;
    let out = p.parse_expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse {
            pos: p.here(),
            msg: "trailing input after expression".to_string(),
        });
    }
    Ok(out)
}

/// Parse a scalar-valued expression.
pub fn parse_scalar(src: &str, chart: &Chart, table: &Arc<SymbolTable>) -> Result<CoordScalar> {
    match parse_expression(src, chart, table)? {
        Parsed::Scalar(s) => Ok(s),
        Parsed::Form(_) => Err(Error::Parse {
            pos: 0,
            msg: "expected a scalar expression, found a 1-form".to_string(),
        }),
    }
}

/// Parse a 1-form-valued expression.
pub fn parse_form(src: &str, chart: &Chart, table: &Arc<SymbolTable>) -> Result<CoordForm> {
    match parse_expression(src, chart, table)? {
        Parsed::Form(f) => Ok(f),
        Parsed::Scalar(_) => Err(Error::Parse {
            pos: 0,
            msg: "expected a 1-form expression, found a scalar".to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Structure-equation residues

/// Zero verdict for one 2-form component of a residue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueComponent {
    /// Wedge monomial label, e.g. `dz^conj(dz)`.
    pub pair: String,
    /// Rendered residue component.
    pub residue: String,
    pub verdict: Verdict,
}

/// Residues of one structure equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueReport {
    /// Which coframe equation: `omega1`, `conj(omega1)`, `omega2`, or
    /// `conj(omega2)`.
    pub equation: String,
    pub components: Vec<ResidueComponent>,
}

impl ResidueReport {
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.verdict.is_zero())
    }
}

/// Check a candidate coframing against a model's structure equations.
///
/// `omega1`, `omega2` live on a 4-direction chart over the model's symbol
/// table. The coframe is completed with the conjugates, nondegeneracy is
/// checked through the coefficient determinant, and for each of the four
/// equations the exterior derivative of the chart form is compared with
/// the model's right-hand side evaluated on the chart forms. One report
/// per equation, one verdict per ascending direction pair.
pub fn check_local_model(
    omega1: &CoordForm,
    omega2: &CoordForm,
    model: &CoframeModel,
) -> Result<Vec<ResidueReport>> {
    omega1.same_shape(omega2);
    let chart = &omega1.chart;
    let table = &omega1.table;
    if chart.dir_count() != 4 {
        return Err(Error::Chart(format!(
            "structure equations need a 4-direction chart, got {}",
            chart.dir_count()
        )));
    }
    if **table != **model.table() {
        return Err(Error::Chart(
            "chart forms and model use different symbol tables".into(),
        ));
    }
    let forms = [
        omega1.clone(),
        omega1.conjugate(),
        omega2.clone(),
        omega2.conjugate(),
    ];

    // Nondegeneracy: the coframe coefficient matrix must be invertible
    // somewhere on the chart.
    let rows: Vec<Vec<CoordScalar>> = forms.iter().map(|f| f.comps.clone()).collect();
    let det = determinant(&rows, chart, table);
    if det.zero_test().is_zero() {
        return Err(Error::DegenerateChart(
            "the coframe coefficient determinant vanishes identically".into(),
        ));
    }

    let labels = ["omega1", "conj(omega1)", "omega2", "conj(omega2)"];
    let mut reports = Vec::new();
    for (k, label) in labels.iter().enumerate() {
        let lhs = forms[k].d();
        let mut rhs = CoordForm2::zero(chart, table);
        for (mask, c) in model.differentials()[k].terms() {
            let gens = mask_generators(mask);
            assert_eq!(gens.len(), 2, "structure equations are 2-forms");
            let (gi, gj) = (gens[0].index(), gens[1].index());
            let wedge = CoordForm2::wedge(&forms[gi], &forms[gj]);
            rhs = rhs.add(&wedge.scale(&CoordScalar::from_scalar(chart, c)));
        }
        let residual = lhs.sub(&rhs);
        let mut components = Vec::new();
        for ((i, j), comp) in residual.components() {
            components.push(ResidueComponent {
                pair: format!("{}^{}", chart.diff_label(*i), chart.diff_label(*j)),
                residue: comp.to_string(),
                verdict: comp.zero_test(),
            });
        }
        reports.push(ResidueReport {
            equation: label.to_string(),
            components,
        });
    }
    Ok(reports)
}

fn determinant(rows: &[Vec<CoordScalar>], chart: &Chart, table: &Arc<SymbolTable>) -> CoordScalar {
    let n = rows.len();
    if n == 1 {
        return rows[0][0].clone();
    }
    let mut det = CoordScalar::zero(chart, table);
    for (j, pivot) in rows[0].iter().enumerate() {
        if pivot.is_structurally_zero() {
            continue;
        }
        let minor: Vec<Vec<CoordScalar>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, c)| c.clone())
                    .collect()
            })
            .collect();
        let cof = pivot.mul(&determinant(&minor, chart, table));
        det = if j % 2 == 0 {
            det.add(&cof)
        } else {
            det.sub(&cof)
        };
    }
    det
}

// ---------------------------------------------------------------------------
// Chart files

fn default_coordinates() -> Vec<String> {
    vec!["z".to_string(), "w".to_string()]
}

/// Parameter binding for a chart file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BindingSpec {
    /// Keep the family parameters symbolic.
    Symbolic,
    /// Rational values for `a` and `b`.
    Rational { a: String, b: String },
    /// Rational circle parameter `t` and rational `b` (sixth family).
    Circle { t: String, b: String },
    /// Bind `a` and `b` to scalar expressions over a custom symbol table
    /// (for charts parameterized along a curve in the parameter plane).
    Custom {
        symbols: Vec<SymbolSpec>,
        a: String,
        b: String,
    },
}

/// A serialized chart: a family with a binding and the two coframe forms
/// as expressions in the chart coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartSpec {
    pub family: String,
    #[serde(default = "default_coordinates")]
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub real: bool,
    pub binding: BindingSpec,
    pub omega1: String,
    pub omega2: String,
    /// Free-text domain notes (e.g. which locus the chart avoids); not
    /// interpreted.
    #[serde(default)]
    pub comment: String,
}

pub fn chart_spec_from_json(json: &str) -> Result<ChartSpec> {
    Ok(serde_json::from_str(json)?)
}

fn parse_big_rational(s: &str) -> Result<BigRational> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| Error::Usage(format!("bad rational `{s}`: {e}")))
}

/// Instantiate the model a chart file claims to satisfy.
pub fn chart_spec_model(spec: &ChartSpec) -> Result<CoframeModel> {
    let name = FamilyName::from_name(&spec.family)?;
    match &spec.binding {
        BindingSpec::Symbolic => FamilyId::symbolic(name).model(),
        BindingSpec::Rational { a, b } => FamilyId::new(
            name,
            Binding::Rational {
                a: parse_big_rational(a)?,
                b: parse_big_rational(b)?,
            },
        )?
        .model(),
        BindingSpec::Circle { t, b } => FamilyId::new(
            name,
            Binding::Circle {
                t: parse_big_rational(t)?,
                b: parse_big_rational(b)?,
            },
        )?
        .model(),
        BindingSpec::Custom { symbols, a, b } => {
            if name == FamilyName::C6 {
                return Err(Error::Usage(
                    "custom bindings substitute `a` and `b`; the sixth family \
                     binds through the circle parameter instead"
                        .into(),
                ));
            }
            let target = table_from_specs(symbols)?;
            let base = FamilyId::symbolic(name).model()?;
            let mut bind = BTreeMap::new();
            bind.insert("a".to_string(), Scalar::parse(a, &target)?);
            bind.insert("b".to_string(), Scalar::parse(b, &target)?);
            base.substitute(&bind, &target)
        }
    }
}

/// Parse and check a chart file: build the bound model, parse the two
/// forms over the chart, and run [`check_local_model`].
pub fn verify_chart_spec(spec: &ChartSpec) -> Result<Vec<ResidueReport>> {
    let model = chart_spec_model(spec)?;
    let names: Vec<&str> = spec.coordinates.iter().map(|s| s.as_str()).collect();
    let chart = if spec.real {
        Chart::real(&names)?
    } else {
        Chart::holomorphic(&names)?
    };
    let omega1 = parse_form(&spec.omega1, &chart, model.table())?;
    let omega2 = parse_form(&spec.omega2, &chart, model.table())?;
    check_local_model(&omega1, &omega2, &model)
}
