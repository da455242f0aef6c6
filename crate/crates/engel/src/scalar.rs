//! Exact scalar arithmetic: multivariate polynomials over the Gaussian
//! rationals, with a conjugation involution and the circle relation.
//!
//! A [`Scalar`] is a polynomial in the symbols of a fixed [`SymbolTable`].
//! Coefficients are [`GaussianRational`] (exact p/q + r/s·i); the imaginary
//! unit lives in the coefficient field and is never a symbol. Symbols carry
//! a conjugation kind:
//!
//! - `Real`: fixed by conjugation,
//! - `ConjugatePair`: swapped with a partner symbol,
//! - `CircleCos`/`CircleSin`: fixed by conjugation and subject to
//!   sin² = 1 − cos², kept canonical by bounding every sin exponent by 1.
//!
//! Zero-testing is decided by the canonical form: a scalar is zero iff its
//! term map is empty after normalization. No radicals, no transcendental
//! constants, no factorization.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Exact complex rational `re + im·i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        let n = &self.re * &self.re + &self.im * &self.im;
        assert!(!n.is_zero(), "inverse of zero");
        Self::new(&self.re / &n, -(&self.im / &n))
    }

    /// Squared modulus re² + im² as an exact rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical forms: `0`, `re`, `im*i` (with `i`/`-i` shorthand), or
    /// `(re+im*i)` when both parts are nonzero. All forms re-parse.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        let im_str = if self.im.is_one() {
            "i".to_string()
        } else if (-self.im.clone()).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", self.im)
        };
        if self.re.is_zero() {
            return write!(f, "{im_str}");
        }
        if self.im.is_negative() {
            // im_str already carries the minus sign.
            write!(f, "({}{})", self.re, im_str)
        } else {
            write!(f, "({}+{})", self.re, im_str)
        }
    }
}

/// Conjugation/reduction behavior of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Fixed by conjugation.
    Real,
    /// Swapped with `partner` under conjugation.
    ConjugatePair { partner: usize },
    /// cos of a circle pair; fixed by conjugation.
    CircleCos { sin: usize },
    /// sin of a circle pair; fixed by conjugation, exponent kept ≤ 1.
    CircleSin { cos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Symbol {
    name: String,
    kind: SymbolKind,
}

/// Immutable, validated symbol table shared by all scalars of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    syms: Vec<Symbol>,
}

/// Reserved words that cannot name symbols (grammar keywords).
const RESERVED: &[&str] = &["i", "conj", "exp", "log", "pow"];

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&name)
}

impl SymbolTable {
    pub fn builder() -> SymbolTableBuilder {
        SymbolTableBuilder { syms: Vec::new() }
    }

    /// Table with no symbols; its scalars are Gaussian-rational constants.
    pub fn empty() -> Arc<SymbolTable> {
        Arc::new(SymbolTable { syms: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.syms[idx].name
    }

    pub fn kind(&self, idx: usize) -> SymbolKind {
        self.syms[idx].kind
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.syms.iter().position(|s| s.name == name)
    }

    /// Index a symbol maps to under conjugation.
    pub fn conj_index(&self, idx: usize) -> usize {
        match self.syms[idx].kind {
            SymbolKind::ConjugatePair { partner } => partner,
            _ => idx,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.syms.iter().map(|s| s.name.as_str())
    }
}

/// Builder validating names and pairings.
pub struct SymbolTableBuilder {
    syms: Vec<Symbol>,
}

impl SymbolTableBuilder {
    fn push(&mut self, name: &str, kind: SymbolKind) -> Result<usize> {
        if !valid_ident(name) {
            return Err(Error::BadSymbolTable(format!(
                "`{name}` is not a valid symbol name"
            )));
        }
        if self.syms.iter().any(|s| s.name == name) {
            return Err(Error::BadSymbolTable(format!("duplicate symbol `{name}`")));
        }
        self.syms.push(Symbol {
            name: name.to_string(),
            kind,
        });
        Ok(self.syms.len() - 1)
    }

    pub fn real(&mut self, name: &str) -> Result<usize> {
        self.push(name, SymbolKind::Real)
    }

    /// Adds a conjugate pair; returns (index of `name`, index of `partner`).
    pub fn pair(&mut self, name: &str, partner: &str) -> Result<(usize, usize)> {
        let a = self.push(name, SymbolKind::Real)?; // kind fixed up below
        let b = self.push(partner, SymbolKind::ConjugatePair { partner: a })?;
        self.syms[a].kind = SymbolKind::ConjugatePair { partner: b };
        Ok((a, b))
    }

    /// Adds a (cos, sin) circle pair; returns (cos index, sin index).
    pub fn circle(&mut self, cos: &str, sin: &str) -> Result<(usize, usize)> {
        let c = self.push(cos, SymbolKind::Real)?; // kind fixed up below
        let s = self.push(sin, SymbolKind::CircleSin { cos: c })?;
        self.syms[c].kind = SymbolKind::CircleCos { sin: s };
        Ok((c, s))
    }

    pub fn build(self) -> Arc<SymbolTable> {
        Arc::new(SymbolTable { syms: self.syms })
    }
}

/// Exponent vector, dense over the symbol table.
type Expt = Vec<u16>;

/// Polynomial over the Gaussian rationals in the symbols of a table.
///
/// Canonical form invariants: no zero coefficients; every `CircleSin`
/// exponent is ≤ 1 (sin² rewritten to 1 − cos²); keys have the table's
/// length. Equality and ordering are on term maps, so two scalars over
/// structurally equal tables compare as expected.
#[derive(Debug, Clone)]
pub struct Scalar {
    table: Arc<SymbolTable>,
    terms: BTreeMap<Expt, GaussianRational>,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.terms.cmp(&other.terms)
    }
}

fn same_table(a: &Scalar, b: &Scalar) {
    assert!(
        Arc::ptr_eq(&a.table, &b.table) || a.table == b.table,
        "scalar operands use different symbol tables"
    );
}

impl Scalar {
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        Self {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(table: &Arc<SymbolTable>, c: GaussianRational) -> Self {
        let mut s = Self::zero(table);
        if !c.is_zero() {
            s.terms.insert(vec![0; table.len()], c);
        }
        s
    }

    pub fn one(table: &Arc<SymbolTable>) -> Self {
        Self::constant(table, GaussianRational::one())
    }

    pub fn i(table: &Arc<SymbolTable>) -> Self {
        Self::constant(table, GaussianRational::i())
    }

    pub fn from_int(table: &Arc<SymbolTable>, n: i64) -> Self {
        Self::constant(table, GaussianRational::from_int(n))
    }

    pub fn from_ratio(table: &Arc<SymbolTable>, num: i64, den: i64) -> Self {
        Self::constant(table, GaussianRational::from_ratio(num, den))
    }

    pub fn symbol(table: &Arc<SymbolTable>, idx: usize) -> Self {
        assert!(idx < table.len(), "symbol index out of range");
        let mut key = vec![0u16; table.len()];
        key[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(key, GaussianRational::one());
        Self {
            table: table.clone(),
            terms,
        }
    }

    pub fn symbol_named(table: &Arc<SymbolTable>, name: &str) -> Result<Self> {
        let idx = table
            .index(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        Ok(Self::symbol(table, idx))
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the scalar has no symbol dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (k, v) = self.terms.iter().next().unwrap();
                if k.iter().all(|&e| e == 0) {
                    Some(v.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expt, &GaussianRational)> {
        self.terms.iter()
    }

    /// Leading term under the internal monomial order (largest exponent
    /// vector). None when zero.
    pub(crate) fn leading_term(&self) -> Option<(&Expt, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    /// Exact multivariate division: `Some(q)` with `self == q·divisor` when
    /// leading-term elimination leaves no remainder, `None` otherwise (and
    /// always `None` for a zero divisor). This is not a gcd; callers that
    /// reduce rational-function coefficients simply leave non-exact ratios
    /// alone.
    pub(crate) fn div_exact(&self, divisor: &Scalar) -> Option<Scalar> {
        same_table(self, divisor);
        let (dk, dc) = {
            let (k, c) = divisor.leading_term()?;
            (k.clone(), c.clone())
        };
        let dc_inv = dc.inv();
        let mut rem = self.clone();
        let mut quot = Scalar::zero(&self.table);
        while !rem.is_zero() {
            let (rk, rc) = {
                let (k, c) = rem.leading_term().unwrap();
                (k.clone(), c.clone())
            };
            let mut qk = vec![0u16; rk.len()];
            for (idx, q) in qk.iter_mut().enumerate() {
                if rk[idx] < dk[idx] {
                    return None;
                }
                *q = rk[idx] - dk[idx];
            }
            let mut step = Scalar::zero(&self.table);
            Self::accumulate(&self.table, &mut step.terms, qk, rc.mul(&dc_inv));
            rem = rem.sub(&step.mul(divisor));
            quot = quot.add(&step);
        }
        Some(quot)
    }

    /// Inserts with sin-power reduction and zero-dropping.
    fn accumulate(table: &SymbolTable, terms: &mut BTreeMap<Expt, GaussianRational>, key: Expt, coeff: GaussianRational) {
        if coeff.is_zero() {
            return;
        }
        // sin² = 1 − cos²: split the first offending exponent and recurse.
        for idx in 0..key.len() {
            if let SymbolKind::CircleSin { cos } = table.kind(idx) {
                if key[idx] >= 2 {
                    let mut base = key.clone();
                    base[idx] -= 2;
                    let mut with_cos = base.clone();
                    with_cos[cos] += 2;
                    Self::accumulate(table, terms, base, coeff.clone());
                    Self::accumulate(table, terms, with_cos, coeff.neg());
                    return;
                }
            }
        }
        match terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        same_table(self, o);
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            Self::accumulate(&self.table, &mut terms, k.clone(), v.clone());
        }
        Self {
            table: self.table.clone(),
            terms,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        same_table(self, o);
        let mut terms = BTreeMap::new();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let key: Expt = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                Self::accumulate(&self.table, &mut terms, key, c1.mul(c2));
            }
        }
        Self {
            table: self.table.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.table);
        }
        Self {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.mul(c)))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(&self.table);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// Complex conjugation: i ↦ −i on coefficients, paired symbols swapped.
    pub fn conjugate(&self) -> Self {
        let n = self.table.len();
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let mut key = vec![0u16; n];
            for (idx, &e) in k.iter().enumerate() {
                key[self.table.conj_index(idx)] += e;
            }
            Self::accumulate(&self.table, &mut terms, key, v.conj());
        }
        Self {
            table: self.table.clone(),
            terms,
        }
    }

    /// Real and imaginary components: `self = re + i·im` with `re`, `im`
    /// fixed by conjugation. Meaningful over tables whose symbols are all
    /// conjugation-fixed (Real/Circle); defined for any table.
    pub fn real_components(&self) -> (Scalar, Scalar) {
        let conj = self.conjugate();
        let half = GaussianRational::from_ratio(1, 2);
        let re = self.add(&conj).scale(&half);
        let minus_half_i = GaussianRational::new(
            BigRational::zero(),
            -BigRational::new(BigInt::from(1), BigInt::from(2)),
        );
        let im = self.sub(&conj).scale(&minus_half_i);
        (re, im)
    }

    /// Substitutes symbols by scalars over `target`.
    ///
    /// Bindings are given by symbol name. A binding `s ↦ v` implies
    /// `s̄ ↦ conjugate(v)` unless the partner is bound explicitly (an
    /// explicit inconsistent partner binding is an error). Binding one
    /// member of a circle pair requires binding the other, and the values
    /// must satisfy cos² + sin² = 1 exactly. Every symbol occurring in
    /// `self` must resolve to a binding.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<String, Scalar>,
        target: &Arc<SymbolTable>,
    ) -> Result<Scalar> {
        let n = self.table.len();
        let mut map: Vec<Option<Scalar>> = vec![None; n];
        for (name, val) in bindings {
            assert!(
                Arc::ptr_eq(val.table(), target) || **val.table() == **target,
                "binding value uses a different table than the target"
            );
            let idx = self
                .table
                .index(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            map[idx] = Some(val.clone());
        }
        // Imply conjugate-partner bindings.
        for idx in 0..n {
            if map[idx].is_none() {
                let pidx = self.table.conj_index(idx);
                if pidx != idx {
                    if let Some(v) = map[pidx].clone() {
                        map[idx] = Some(v.conjugate());
                    }
                }
            }
        }
        // Circle-pair consistency.
        for idx in 0..n {
            if let SymbolKind::CircleCos { sin } = self.table.kind(idx) {
                match (&map[idx], &map[sin]) {
                    (None, None) => {}
                    (Some(c), Some(s)) => {
                        let rel = c.mul(c).add(&s.mul(s)).sub(&Scalar::one(target));
                        if !rel.is_zero() {
                            return Err(Error::InvalidBinding(format!(
                                "circle pair ({}, {}) bound off the unit circle",
                                self.table.name(idx),
                                self.table.name(sin)
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::InvalidBinding(format!(
                            "circle pair ({}, {}) must be bound together",
                            self.table.name(idx),
                            self.table.name(sin)
                        )));
                    }
                }
            }
        }
        // Explicit partner bindings must agree with conjugation.
        for idx in 0..n {
            let pidx = self.table.conj_index(idx);
            if pidx > idx {
                if let (Some(a), Some(b)) = (&map[idx], &map[pidx]) {
                    if a.conjugate() != *b {
                        return Err(Error::InvalidBinding(format!(
                            "bindings for `{}` and `{}` are not conjugate",
                            self.table.name(idx),
                            self.table.name(pidx)
                        )));
                    }
                }
            }
        }
        let mut acc = Scalar::zero(target);
        for (k, coeff) in &self.terms {
            let mut term = Scalar::constant(target, coeff.clone());
            for (idx, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = map[idx].as_ref().ok_or_else(|| {
                    Error::UnboundSymbol(self.table.name(idx).to_string())
                })?;
                term = term.mul(&v.pow(e as u32));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Evaluates at a rational point. Real symbols take real values
    /// (an imaginary part is an error); a conjugate-pair symbol may take
    /// any Gaussian rational, with the partner implied; circle pairs are
    /// evaluated through the parameter `t` as cos = (1−t²)/(1+t²),
    /// sin = 2t/(1+t²). Evaluation is a ring homomorphism.
    pub fn eval(
        &self,
        point: &BTreeMap<String, GaussianRational>,
        t: Option<&BigRational>,
    ) -> Result<GaussianRational> {
        let n = self.table.len();
        let mut vals: Vec<Option<GaussianRational>> = vec![None; n];
        for (name, v) in point {
            let idx = self
                .table
                .index(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            match self.table.kind(idx) {
                SymbolKind::Real => {
                    if !v.is_real() {
                        return Err(Error::NonRealValue(name.clone()));
                    }
                }
                SymbolKind::CircleCos { .. } | SymbolKind::CircleSin { .. } => {
                    return Err(Error::InvalidBinding(format!(
                        "circle symbol `{name}` is evaluated through t, not bound directly"
                    )));
                }
                SymbolKind::ConjugatePair { .. } => {}
            }
            vals[idx] = Some(v.clone());
        }
        for idx in 0..n {
            if vals[idx].is_none() {
                let pidx = self.table.conj_index(idx);
                if pidx != idx {
                    if let Some(v) = vals[pidx].clone() {
                        vals[idx] = Some(v.conj());
                    }
                }
            }
        }
        if let Some(t) = t {
            let t2 = t * t;
            let den = &t2 + BigRational::one();
            let cos = (BigRational::one() - &t2) / &den;
            let sin = (t + t) / &den;
            for idx in 0..n {
                match self.table.kind(idx) {
                    SymbolKind::CircleCos { .. } => {
                        vals[idx] = Some(GaussianRational::from_rational(cos.clone()))
                    }
                    SymbolKind::CircleSin { .. } => {
                        vals[idx] = Some(GaussianRational::from_rational(sin.clone()))
                    }
                    _ => {}
                }
            }
        }
        let mut acc = GaussianRational::zero();
        for (k, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (idx, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = vals[idx].as_ref().ok_or_else(|| {
                    match self.table.kind(idx) {
                        SymbolKind::CircleCos { .. } | SymbolKind::CircleSin { .. } => {
                            Error::MissingCircleParameter
                        }
                        _ => Error::UnboundSymbol(self.table.name(idx).to_string()),
                    }
                })?;
                let mut p = GaussianRational::one();
                for _ in 0..e {
                    p = p.mul(v);
                }
                term = term.mul(&p);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Rational circle parametrization cos = (1−t²)/(1+t²), sin = 2t/(1+t²)
    /// as exact numerators over the common denominator 1+t², for a real
    /// symbol `t` of `target`. The circle identity
    /// (1−t²)² + (2t)² = (1+t²)² makes the parametrization consistent; it
    /// is pinned by a unit test. Returned as (cos_num, sin_num, den).
    pub fn circle_parametrization(
        target: &Arc<SymbolTable>,
        t_name: &str,
    ) -> Result<(Scalar, Scalar, Scalar)> {
        let t = Scalar::symbol_named(target, t_name)?;
        let one = Scalar::one(target);
        let t2 = t.mul(&t);
        let cos_num = one.sub(&t2);
        let sin_num = t.add(&t);
        let den = one.add(&t2);
        Ok((cos_num, sin_num, den))
    }

    /// Parses the scalar grammar: integers, rationals `p/q`, `i`,
    /// identifiers, `+ - * ( )`, `conj(...)`, `^` with non-negative integer
    /// exponents. Whitespace-insensitive. `/` is permitted only inside a
    /// rational literal.
    pub fn parse(src: &str, table: &Arc<SymbolTable>) -> Result<Scalar> {
        let mut p = Parser::new(src, table);
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.bytes.len() {
            return Err(Error::Parse {
                pos: p.pos,
                msg: "trailing input".to_string(),
            });
        }
        Ok(e)
    }
}

impl fmt::Display for Scalar {
    /// Canonical, re-parseable rendering; term order follows the canonical
    /// exponent-vector order, so equal scalars render identically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            let mono: Vec<String> = k
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.table.name(i).to_string()
                    } else {
                        format!("{}^{}", self.table.name(i), e)
                    }
                })
                .collect();
            // Pull an explicit leading sign out of purely real or purely
            // imaginary coefficients so joined terms read naturally.
            let (neg, c_abs) = if c.im.is_zero() && c.re.is_negative() {
                (true, c.neg())
            } else if c.re.is_zero() && c.im.is_negative() {
                (true, c.neg())
            } else {
                (false, c.clone())
            };
            let coeff_str = c_abs.to_string();
            let body = if mono.is_empty() {
                coeff_str
            } else if c_abs == GaussianRational::one() {
                mono.join("*")
            } else {
                format!("{}*{}", coeff_str, mono.join("*"))
            };
            if first {
                if neg {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{body}")?;
                }
                first = false;
            } else if neg {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    table: &'a Arc<SymbolTable>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, table: &'a Arc<SymbolTable>) -> Self {
        Self {
            bytes: src.as_bytes(),
            pos: 0,
            table,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(Error::Parse {
                pos: self.pos,
                msg: format!("expected `{}`", b as char),
            })
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Scalar> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        let mut base = self.primary()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.nat()?;
            base = base.pow(n);
        }
        Ok(base)
    }

    fn nat(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a non-negative integer exponent");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<u32>()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: "exponent out of range".to_string(),
            })
    }

    fn number(&mut self) -> Result<Scalar> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let num: BigInt = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: "bad integer".to_string(),
            })?;
        // `/` only as a rational literal: digits immediately follow.
        let save = self.pos;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let dstart = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if dstart == self.pos {
                // Not a rational literal (e.g. general division in the
                // coordinate grammar); rewind and let the caller decide.
                self.pos = save;
            } else {
                let den: BigInt = std::str::from_utf8(&self.bytes[dstart..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Parse {
                        pos: dstart,
                        msg: "bad denominator".to_string(),
                    })?;
                if den.is_zero() {
                    return Err(Error::Parse {
                        pos: dstart,
                        msg: "zero denominator".to_string(),
                    });
                }
                return Ok(Scalar::constant(
                    self.table,
                    GaussianRational::from_rational(BigRational::new(num, den)),
                ));
            }
        }
        Ok(Scalar::constant(
            self.table,
            GaussianRational::from_rational(BigRational::from_integer(num)),
        ))
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            return None;
        }
        let b = self.bytes[self.pos];
        if !(b.is_ascii_alphabetic() || b == b'_') {
            return None;
        }
        self.pos += 1;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Some(String::from_utf8(self.bytes[start..self.pos].to_vec()).unwrap())
    }

    fn primary(&mut self) -> Result<Scalar> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let pos = self.pos;
                let name = self.ident().unwrap();
                match name.as_str() {
                    "i" => Ok(Scalar::i(self.table)),
                    "conj" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        Ok(e.conjugate())
                    }
                    _ => match self.table.index(&name) {
                        Some(idx) => Ok(Scalar::symbol(self.table, idx)),
                        None => Err(Error::Parse {
                            pos,
                            msg: format!("unknown symbol `{name}`"),
                        }),
                    },
                }
            }
            _ => self.err("expected a number, symbol, `i`, `conj(`, or `(`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tbl_ab() -> Arc<SymbolTable> {
        let mut b = SymbolTable::builder();
        b.real("a").unwrap();
        b.real("b").unwrap();
        b.build()
    }

    fn tbl_pairs() -> Arc<SymbolTable> {
        let mut b = SymbolTable::builder();
        b.pair("p", "pbar").unwrap();
        b.real("a").unwrap();
        b.build()
    }

    fn tbl_circle() -> Arc<SymbolTable> {
        let mut b = SymbolTable::builder();
        b.circle("c", "s").unwrap();
        b.real("b").unwrap();
        b.build()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let t = tbl_ab();
        for src in [
            "1/2*a^2 - 3*b + (2-1/3*i)",
            "a*b - i*a + 7",
            "-(a+b)^2",
            "conj(i*a)",
            "0",
        ] {
            let x = Scalar::parse(src, &t).unwrap();
            let y = Scalar::parse(&x.to_string(), &t).unwrap();
            assert_eq!(x, y, "round trip failed for `{src}`");
        }
    }

    #[test]
    fn conjugate_swaps_pairs_and_flips_i() {
        let t = tbl_pairs();
        let p = Scalar::symbol_named(&t, "p").unwrap();
        let pbar = Scalar::symbol_named(&t, "pbar").unwrap();
        let x = p.mul(&Scalar::i(&t));
        assert_eq!(x.conjugate(), pbar.mul(&Scalar::i(&t)).neg());
        assert_eq!(x.conjugate().conjugate(), x);
    }

    #[test]
    fn sin_squared_reduces() {
        let t = tbl_circle();
        let c = Scalar::symbol_named(&t, "c").unwrap();
        let s = Scalar::symbol_named(&t, "s").unwrap();
        // s² + c² = 1 must normalize to an exact constant.
        let rel = s.mul(&s).add(&c.mul(&c)).sub(&Scalar::one(&t));
        assert!(rel.is_zero());
        // s³ = s − s·c².
        let s3 = s.pow(3);
        let expect = s.sub(&s.mul(&c.pow(2)));
        assert_eq!(s3, expect);
    }

    #[test]
    fn circle_parametrization_identity() {
        let mut b = SymbolTable::builder();
        b.real("t").unwrap();
        let t = b.build();
        let (c, s, d) = Scalar::circle_parametrization(&t, "t").unwrap();
        // (1−t²)² + (2t)² = (1+t²)².
        assert_eq!(c.mul(&c).add(&s.mul(&s)), d.mul(&d));
    }

    #[test]
    fn substitute_rejects_off_circle_binding() {
        let t = tbl_circle();
        let target = tbl_ab();
        let x = Scalar::symbol_named(&t, "c").unwrap();
        let mut bind = BTreeMap::new();
        bind.insert("c".to_string(), Scalar::from_ratio(&target, 1, 2));
        bind.insert("s".to_string(), Scalar::from_ratio(&target, 1, 2));
        bind.insert("b".to_string(), Scalar::zero(&target));
        assert!(matches!(
            x.substitute(&bind, &target),
            Err(Error::InvalidBinding(_))
        ));
        // A rational point on the circle is accepted.
        let mut bind = BTreeMap::new();
        bind.insert("c".to_string(), Scalar::from_ratio(&target, 3, 5));
        bind.insert("s".to_string(), Scalar::from_ratio(&target, 4, 5));
        bind.insert("b".to_string(), Scalar::zero(&target));
        let y = x.substitute(&bind, &target).unwrap();
        assert_eq!(y, Scalar::from_ratio(&target, 3, 5));
    }

    #[test]
    fn eval_through_t_matches_parametrization() {
        let t = tbl_circle();
        let c = Scalar::symbol_named(&t, "c").unwrap();
        let s = Scalar::symbol_named(&t, "s").unwrap();
        let x = c.mul(&c).add(&s.mul(&s));
        let point = BTreeMap::new();
        let tv = BigRational::new(BigInt::from(2), BigInt::from(3));
        let v = x.eval(&point, Some(&tv)).unwrap();
        assert_eq!(v, GaussianRational::one());
    }

    #[test]
    fn eval_rejects_complex_value_for_real_symbol() {
        let t = tbl_ab();
        let x = Scalar::symbol_named(&t, "a").unwrap();
        let mut point = BTreeMap::new();
        point.insert("a".to_string(), GaussianRational::i());
        assert!(matches!(
            x.eval(&point, None),
            Err(Error::NonRealValue(_))
        ));
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let t = tbl_ab();
        let x = Scalar::symbol_named(&t, "a").unwrap();
        assert!(matches!(
            x.eval(&BTreeMap::new(), None),
            Err(Error::UnboundSymbol(_))
        ));
    }

    #[test]
    fn div_exact_recovers_factor() {
        let t = tbl_ab();
        let a = Scalar::symbol_named(&t, "a").unwrap();
        let b = Scalar::symbol_named(&t, "b").unwrap();
        let diff = a.sub(&b);
        let sum = a.add(&b);
        let prod = diff.mul(&sum);
        assert_eq!(prod.div_exact(&diff).unwrap(), sum);
        assert_eq!(prod.div_exact(&sum).unwrap(), diff);
        // 2a / 4 = a/2.
        let two_a = a.mul(&Scalar::from_ratio(&t, 2, 1));
        let four = Scalar::from_ratio(&t, 4, 1);
        assert_eq!(
            two_a.div_exact(&four).unwrap(),
            a.mul(&Scalar::from_ratio(&t, 1, 2))
        );
    }

    #[test]
    fn div_exact_rejects_non_factor_and_zero() {
        let t = tbl_ab();
        let a = Scalar::symbol_named(&t, "a").unwrap();
        let b = Scalar::symbol_named(&t, "b").unwrap();
        let one = Scalar::from_ratio(&t, 1, 1);
        assert!(a.add(&one).div_exact(&b).is_none());
        assert!(a.mul(&a).add(&b).div_exact(&a).is_none());
        assert!(a.div_exact(&Scalar::zero(&t)).is_none());
        // Zero divided by anything nonzero is zero.
        assert_eq!(Scalar::zero(&t).div_exact(&a).unwrap(), Scalar::zero(&t));
    }
}
