//! Mod-2 symbol calculus: canonical square classes, symbol sums, Hilbert
//! symbols and quaternion ramification over Q, tame residues, Faddeev
//! ramification profiles over Q(x), and specialization-based descent.
//!
//! Square classes are kept in canonical form so that symbol sums can be
//! compared as plain data. Class-level questions (triviality, equality over
//! Q(x)) go through [`class_is_trivial`] and [`class_equal_qx`], which answer
//! `true`/`false` on the decidable fragment and say `undecided` otherwise,
//! never guessing.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::poly::{
    factor_bigint, factor_rational, is_prime_u64, legendre, parse_factored, parse_poly,
    parse_rational, smallest_nonresidue, PolyError, QPoly,
};

/// Bound on the number of candidate pairs examined by
/// [`find_quaternion_rep`] before giving up.
pub const QUAT_SEARCH_BUDGET: usize = 65_536;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymCalcError {
    #[error("zero element has no square class")]
    ZeroElement,
    #[error("factor {0} is not monic")]
    NonMonicFactor(String),
    #[error("cannot certify irreducibility of {0}")]
    IrreducibilityUnverifiable(String),
    #[error("integer {0} exceeds the factorization bounds")]
    FactorBoundExceeded(BigInt),
    #[error("residue characteristic 2 is not supported")]
    ResidueCharTwo,
    #[error("{0} is not a unit at the place")]
    NotAUnitAtPlace(String),
    #[error("no representative found within the search budget of {budget} candidate pairs")]
    SearchExhausted { budget: usize },
    #[error("invalid field: {0}")]
    BadField(String),
    #[error("invalid place: {0}")]
    BadPlace(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<PolyError> for SymCalcError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::Parse(src, msg) => SymCalcError::Parse(format!("{src:?}: {msg}")),
            PolyError::FactorBoundExceeded(n) => SymCalcError::FactorBoundExceeded(n),
            PolyError::IrreducibilityUnverifiable(p) => SymCalcError::IrreducibilityUnverifiable(p),
        }
    }
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// The base fields of the calculus: Q, Q(x), F_p with p an odd prime, and
/// Q[x]/(p(x)) for a monic irreducible modulus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldDesc {
    RatQ,
    RatFunQ,
    FinitePrime(u64),
    NumberField(QPoly),
}

impl FieldDesc {
    /// F_p for an odd prime p.
    pub fn finite_prime(p: u64) -> Result<Self, SymCalcError> {
        if p == 2 || !is_prime_u64(p) {
            return Err(SymCalcError::BadField(format!("{p} is not an odd prime")));
        }
        Ok(FieldDesc::FinitePrime(p))
    }

    /// Q[x]/(modulus) for a monic irreducible modulus of degree >= 1.
    /// Degree-1 moduli are accepted; square classes over them canonicalize
    /// into Q.
    pub fn number_field(modulus: &QPoly) -> Result<Self, SymCalcError> {
        if modulus.degree().map_or(true, |d| d == 0) {
            return Err(SymCalcError::BadField("modulus must have degree >= 1".to_string()));
        }
        if !modulus.is_monic() {
            return Err(SymCalcError::NonMonicFactor(modulus.to_string()));
        }
        let (_, factors) = factor_rational(modulus)?;
        if factors.len() != 1 || factors[0].1 != 1 {
            return Err(SymCalcError::BadField(format!("{modulus} is reducible")));
        }
        Ok(FieldDesc::NumberField(modulus.clone()))
    }

    /// Degree-1 number fields are the rationals in disguise; everything else
    /// is itself. Symbol sums always live over a canonical field.
    pub fn canonical(self) -> FieldDesc {
        match self {
            FieldDesc::NumberField(m) if m.degree() == Some(1) => FieldDesc::RatQ,
            other => other,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            FieldDesc::RatQ => json!({"kind": "RatQ"}),
            FieldDesc::RatFunQ => json!({"kind": "RatFunQ"}),
            FieldDesc::FinitePrime(p) => json!({"kind": "FinitePrime", "p": p}),
            FieldDesc::NumberField(m) => {
                json!({"kind": "NumberField", "modulus": m.to_string()})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, SymCalcError> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| SymCalcError::Parse("field needs a \"kind\"".to_string()))?;
        match kind {
            "RatQ" => Ok(FieldDesc::RatQ),
            "RatFunQ" => Ok(FieldDesc::RatFunQ),
            "FinitePrime" => {
                let p = v
                    .get("p")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| SymCalcError::Parse("FinitePrime needs \"p\"".to_string()))?;
                FieldDesc::finite_prime(p)
            }
            "NumberField" => {
                let m = v.get("modulus").and_then(Value::as_str).ok_or_else(|| {
                    SymCalcError::Parse("NumberField needs a \"modulus\"".to_string())
                })?;
                FieldDesc::number_field(&parse_poly(m)?)
            }
            other => Err(SymCalcError::Parse(format!("unknown field kind {other:?}"))),
        }
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDesc::RatQ => f.write_str("Q"),
            FieldDesc::RatFunQ => f.write_str("Q(x)"),
            FieldDesc::FinitePrime(p) => write!(f, "F_{p}"),
            FieldDesc::NumberField(m) => write!(f, "Q[x]/({m})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Square classes
// ---------------------------------------------------------------------------

/// Canonical representative data of a square class, by field kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassRep {
    /// Q: a squarefree integer, sign significant.
    Int(BigInt),
    /// Q(x): a squarefree integer times distinct monic irreducibles, sorted.
    FunQ { c: BigInt, polys: Vec<QPoly> },
    /// F_p: 1 or the smallest nonresidue.
    Fp(u64),
    /// Q[x]/(m), degree >= 2: representative reduced mod m and scaled by the
    /// unique rational square making it an integer polynomial of squarefree
    /// content. Canonical under rational-square scaling only, so equality of
    /// reps implies equality of classes but not conversely.
    Nf(QPoly),
}

/// An element of F*/F*^2 in canonical form. Construct via the
/// `square_class*` functions; the canonical form makes `Eq`/`Ord` meaningful.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SquareClass {
    field: FieldDesc,
    rep: ClassRep,
}

impl SquareClass {
    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn rep(&self) -> &ClassRep {
        &self.rep
    }

    pub fn is_one(&self) -> bool {
        match &self.rep {
            ClassRep::Int(n) => n.is_one(),
            ClassRep::FunQ { c, polys } => c.is_one() && polys.is_empty(),
            ClassRep::Fp(u) => *u == 1,
            ClassRep::Nf(w) => w.degree() == Some(0) && w.coeff(0).is_one(),
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rep {
            ClassRep::Int(n) => write!(f, "{n}"),
            ClassRep::Fp(u) => write!(f, "{u}"),
            ClassRep::Nf(w) => write!(f, "{w}"),
            ClassRep::FunQ { c, polys } => {
                if polys.is_empty() {
                    return write!(f, "{c}");
                }
                let mut parts = Vec::new();
                if !c.is_one() {
                    parts.push(c.to_string());
                }
                for p in polys {
                    parts.push(format!("({p})"));
                }
                f.write_str(&parts.join(" * "))
            }
        }
    }
}

/// Elements as they enter the calculus, by field kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FElem {
    Rat(BigRational),
    Factored(BigRational, Vec<(QPoly, u32)>),
    Fp(BigInt),
    Nf(QPoly),
}

impl fmt::Display for FElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FElem::Rat(r) => write!(f, "{r}"),
            FElem::Fp(n) => write!(f, "{n}"),
            FElem::Nf(p) => write!(f, "{p}"),
            FElem::Factored(c, fs) => {
                if fs.is_empty() {
                    return write!(f, "{c}");
                }
                let mut parts = Vec::new();
                if !c.is_one() {
                    parts.push(c.to_string());
                }
                for (p, e) in fs {
                    if *e == 1 {
                        parts.push(format!("({p})"));
                    } else {
                        parts.push(format!("({p})^{e}"));
                    }
                }
                f.write_str(&parts.join(" * "))
            }
        }
    }
}

/// Canonical square class of a nonzero element of the given field.
pub fn square_class(field: &FieldDesc, elem: &FElem) -> Result<SquareClass, SymCalcError> {
    match (field, elem) {
        (FieldDesc::RatQ, FElem::Rat(r)) => square_class_q(r),
        (FieldDesc::RatFunQ, FElem::Factored(c, fs)) => square_class_qx(c, fs),
        (FieldDesc::RatFunQ, FElem::Rat(r)) => square_class_qx(r, &[]),
        (FieldDesc::FinitePrime(p), FElem::Fp(a)) => square_class_fp(*p, a),
        (FieldDesc::FinitePrime(p), FElem::Rat(r)) => {
            let pb = BigInt::from(*p);
            if (r.denom() % &pb).is_zero() {
                return Err(SymCalcError::BadField(format!(
                    "denominator of {r} is not invertible mod {p}"
                )));
            }
            square_class_fp(*p, &(r.numer() * r.denom()))
        }
        (FieldDesc::NumberField(m), FElem::Nf(v)) => square_class_nf(m, v),
        (FieldDesc::NumberField(m), FElem::Rat(r)) => {
            square_class_nf(m, &QPoly::constant(r.clone()))
        }
        _ => Err(SymCalcError::BadField("element kind does not match the field".to_string())),
    }
}

/// Square class over Q: squarefree signed integer.
pub fn square_class_q(r: &BigRational) -> Result<SquareClass, SymCalcError> {
    if r.is_zero() {
        return Err(SymCalcError::ZeroElement);
    }
    let n = r.numer() * r.denom();
    let mut rep = BigInt::one();
    for (p, e) in factor_bigint(&n)? {
        if e % 2 == 1 {
            rep *= p;
        }
    }
    if n.is_negative() {
        rep = -rep;
    }
    Ok(SquareClass { field: FieldDesc::RatQ, rep: ClassRep::Int(rep) })
}

/// Square class over Q(x) of `c * prod f_i^{e_i}`. Supplied polynomial
/// factors must be monic; they are refined to irreducibles, so reducible
/// factors are welcome as long as their factorization is certifiable.
pub fn square_class_qx(
    c: &BigRational,
    factors: &[(QPoly, u32)],
) -> Result<SquareClass, SymCalcError> {
    if c.is_zero() {
        return Err(SymCalcError::ZeroElement);
    }
    let mut constant = c.clone();
    let mut exps: BTreeMap<QPoly, u32> = BTreeMap::new();
    for (f, e) in factors {
        if f.is_zero() {
            return Err(SymCalcError::ZeroElement);
        }
        if f.is_constant() {
            let mut t = BigRational::one();
            for _ in 0..*e {
                t *= f.coeff(0);
            }
            constant *= t;
            if constant.is_zero() {
                return Err(SymCalcError::ZeroElement);
            }
            continue;
        }
        if !f.is_monic() {
            return Err(SymCalcError::NonMonicFactor(f.to_string()));
        }
        let (_, irr) = factor_rational(f)?;
        for (g, m) in irr {
            *exps.entry(g).or_insert(0) += m * e;
        }
    }
    let base = square_class_q(&constant)?;
    let ClassRep::Int(ci) = base.rep else { unreachable!() };
    let polys: Vec<QPoly> =
        exps.into_iter().filter(|(_, e)| e % 2 == 1).map(|(g, _)| g).collect();
    Ok(SquareClass { field: FieldDesc::RatFunQ, rep: ClassRep::FunQ { c: ci, polys } })
}

/// Square class over F_p (p an odd prime): 1 or the smallest nonresidue.
pub fn square_class_fp(p: u64, a: &BigInt) -> Result<SquareClass, SymCalcError> {
    if p == 2 || !is_prime_u64(p) {
        return Err(SymCalcError::BadField(format!("{p} is not an odd prime")));
    }
    match legendre(a, p) {
        0 => Err(SymCalcError::ZeroElement),
        1 => Ok(SquareClass { field: FieldDesc::FinitePrime(p), rep: ClassRep::Fp(1) }),
        _ => Ok(SquareClass {
            field: FieldDesc::FinitePrime(p),
            rep: ClassRep::Fp(smallest_nonresidue(p)),
        }),
    }
}

/// Square class over Q[x]/(modulus). Degree-1 moduli evaluate into Q;
/// higher degrees keep the formal representative described on
/// [`ClassRep::Nf`].
pub fn square_class_nf(modulus: &QPoly, v: &QPoly) -> Result<SquareClass, SymCalcError> {
    assert!(
        modulus.is_monic() && modulus.degree().is_some_and(|d| d >= 1),
        "number field modulus must be monic of degree >= 1"
    );
    if modulus.degree() == Some(1) {
        let x0 = -modulus.coeff(0);
        let val = v.eval(&x0);
        if val.is_zero() {
            return Err(SymCalcError::ZeroElement);
        }
        return square_class_q(&val);
    }
    let red = v.rem(modulus);
    if red.is_zero() {
        return Err(SymCalcError::ZeroElement);
    }
    let w = nf_canonical_scale(&red)?;
    Ok(SquareClass { field: FieldDesc::NumberField(modulus.clone()), rep: ClassRep::Nf(w) })
}

/// Scales a nonzero rational polynomial by the unique positive rational
/// square that makes it an integer polynomial with squarefree content.
fn nf_canonical_scale(v: &QPoly) -> Result<QPoly, SymCalcError> {
    let (l, ints) = v.clear_denominators();
    // v * l^2 has integer coefficients ints * l and content l * gcd(ints).
    let mut content = BigInt::zero();
    for a in &ints {
        content = content.gcd(a);
    }
    content *= &l;
    let mut s = BigInt::one();
    for (p, e) in factor_bigint(&content)? {
        for _ in 0..(e / 2) {
            s = &s * &p;
        }
    }
    let s2 = &s * &s;
    let coeffs = ints
        .iter()
        .map(|a| BigRational::from_integer((a * &l) / &s2))
        .collect();
    Ok(QPoly::from_coeffs(coeffs))
}

// ---------------------------------------------------------------------------
// Symbol sums
// ---------------------------------------------------------------------------

/// Three-valued answer for class-level decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trilean {
    True,
    False,
    Undecided,
}

impl Trilean {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Trilean::True
        } else {
            Trilean::False
        }
    }
}

impl fmt::Display for Trilean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trilean::True => "true",
            Trilean::False => "false",
            Trilean::Undecided => "undecided",
        })
    }
}

/// A formal sum of degree-`degree` symbols with coefficients mod 2.
///
/// Normalization, applied on every insertion: entries of a term sorted
/// canonically, terms containing the class of 1 dropped, duplicate terms
/// cancelled in pairs, and a term dropped when two of its entries are
/// literally (a, 1 - a) in canonical form. No further symbol relations are
/// applied; class-level questions go through [`class_is_trivial`] and
/// [`class_equal_qx`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSum {
    field: FieldDesc,
    degree: usize,
    terms: BTreeSet<Vec<SquareClass>>,
}

impl SymbolSum {
    pub fn zero(field: FieldDesc, degree: usize) -> Self {
        SymbolSum { field: field.canonical(), degree, terms: BTreeSet::new() }
    }

    /// The sum with the given terms (each a full tuple of classes).
    pub fn from_terms(
        field: FieldDesc,
        degree: usize,
        terms: Vec<Vec<SquareClass>>,
    ) -> Self {
        let mut s = SymbolSum::zero(field, degree);
        for t in terms {
            s.add_term(t);
        }
        s
    }

    /// The single symbol with the given entries.
    pub fn symbol(entries: Vec<SquareClass>) -> Self {
        assert!(!entries.is_empty(), "a symbol needs at least one entry");
        let field = entries[0].field.clone();
        SymbolSum::from_terms(field, entries.len(), vec![entries])
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeSet<Vec<SquareClass>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds one term (mod 2) and renormalizes.
    pub fn add_term(&mut self, mut term: Vec<SquareClass>) {
        assert_eq!(term.len(), self.degree, "term length must equal the sum's degree");
        for e in &term {
            assert_eq!(
                e.field, self.field,
                "term entries must live over the sum's field"
            );
        }
        if term.iter().any(SquareClass::is_one) {
            return;
        }
        term.sort();
        if has_literal_steinberg(&self.field, &term) {
            return;
        }
        if !self.terms.remove(&term) {
            self.terms.insert(term);
        }
    }

    /// Sum of two symbol sums (mod 2).
    pub fn add(&self, other: &SymbolSum) -> SymbolSum {
        assert_eq!(self.field, other.field, "cannot add sums over different fields");
        assert_eq!(self.degree, other.degree, "cannot add sums of different degrees");
        let mut out = self.clone();
        for t in &other.terms {
            out.add_term(t.clone());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field.to_json(),
            "degree": self.degree,
            "terms": self
                .terms
                .iter()
                .map(|t| t.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SymCalcError> {
        let field = FieldDesc::from_json(
            v.get("field")
                .ok_or_else(|| SymCalcError::Parse("symbol sum needs a \"field\"".to_string()))?,
        )?;
        let degree = v
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| SymCalcError::Parse("symbol sum needs a \"degree\"".to_string()))?
            as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| SymCalcError::Parse("symbol sum needs \"terms\"".to_string()))?;
        let mut out = SymbolSum::zero(field.clone(), degree);
        for t in terms {
            let entries = t
                .as_array()
                .ok_or_else(|| SymCalcError::Parse("each term must be an array".to_string()))?;
            if entries.len() != degree {
                return Err(SymCalcError::Parse(format!(
                    "term has {} entries, expected {degree}",
                    entries.len()
                )));
            }
            let mut term = Vec::with_capacity(degree);
            for e in entries {
                let s = e
                    .as_str()
                    .ok_or_else(|| SymCalcError::Parse("entries must be strings".to_string()))?;
                term.push(square_class_from_str(&field, s)?);
            }
            out.add_term(term);
        }
        Ok(out)
    }
}

impl fmt::Display for SymbolSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                t.iter().map(|c| format!("({c})")).collect::<Vec<_>>().join("∪")
            })
            .collect();
        f.write_str(&rendered.join(" + "))
    }
}

/// True when some pair of entries is literally (a, 1 - a) in canonical form.
fn has_literal_steinberg(field: &FieldDesc, term: &[SquareClass]) -> bool {
    for i in 0..term.len() {
        for j in (i + 1)..term.len() {
            if steinberg_pair(field, &term[i], &term[j]) {
                return true;
            }
        }
    }
    false
}

fn steinberg_pair(field: &FieldDesc, a: &SquareClass, b: &SquareClass) -> bool {
    match (&a.rep, &b.rep) {
        (ClassRep::Int(x), ClassRep::Int(y)) => *y == BigInt::one() - x,
        (ClassRep::FunQ { .. }, ClassRep::FunQ { .. }) => {
            let pa = funq_product(&a.rep);
            let pb = funq_product(&b.rep);
            pb == QPoly::one().sub(&pa)
        }
        (ClassRep::Fp(x), ClassRep::Fp(y)) => {
            let FieldDesc::FinitePrime(p) = field else { unreachable!() };
            let t = BigInt::one() - BigInt::from(*x);
            match legendre(&t, *p) {
                0 => false,
                1 => *y == 1,
                _ => *y == smallest_nonresidue(*p),
            }
        }
        (ClassRep::Nf(v), ClassRep::Nf(w)) => {
            let one_minus = QPoly::one().sub(v);
            !one_minus.is_zero()
                && nf_canonical_scale(&one_minus).map_or(false, |canon| canon == *w)
        }
        _ => false,
    }
}

/// The representative of a Q(x) class as a single polynomial c * prod f_i.
fn funq_product(rep: &ClassRep) -> QPoly {
    let ClassRep::FunQ { c, polys } = rep else { unreachable!() };
    let mut p = QPoly::constant(BigRational::from_integer(c.clone()));
    for f in polys {
        p = p.mul(f);
    }
    p
}

// ---------------------------------------------------------------------------
// Places
// ---------------------------------------------------------------------------

/// A place of Q (finite prime or infinity) or of Q(x) (monic irreducible).
/// The place at infinity of Q(x) is deliberately absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Infinity,
    Irreducible(QPoly),
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        use Place::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), _) => Ordering::Less,
            (_, Finite(_)) => Ordering::Greater,
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, Irreducible(_)) => Ordering::Less,
            (Irreducible(_), Infinity) => Ordering::Greater,
            (Irreducible(a), Irreducible(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => f.write_str("inf"),
            Place::Irreducible(q) => write!(f, "{q}"),
        }
    }
}

/// Parses "p=7", "inf", or "p(x)=x^2+1" (the last checked monic irreducible).
pub fn parse_place(s: &str) -> Result<Place, SymCalcError> {
    let t = s.trim();
    if t == "inf" {
        return Ok(Place::Infinity);
    }
    if let Some(rest) = t.strip_prefix("p(x)=") {
        let q = parse_poly(rest)?;
        if !q.is_monic() || q.degree() == Some(0) {
            return Err(SymCalcError::BadPlace(format!("{q} is not monic of degree >= 1")));
        }
        let (_, factors) = factor_rational(&q)?;
        if factors.len() != 1 || factors[0].1 != 1 {
            return Err(SymCalcError::BadPlace(format!("{q} is reducible")));
        }
        return Ok(Place::Irreducible(q));
    }
    if let Some(rest) = t.strip_prefix("p=") {
        let p: u64 = rest
            .trim()
            .parse()
            .map_err(|_| SymCalcError::BadPlace(format!("cannot read a prime from {rest:?}")))?;
        if !is_prime_u64(p) {
            return Err(SymCalcError::BadPlace(format!("{p} is not prime")));
        }
        return Ok(Place::Finite(p));
    }
    Err(SymCalcError::BadPlace(format!(
        "{t:?} (expected \"p=<prime>\", \"inf\", or \"p(x)=<monic irreducible>\")"
    )))
}

/// Parses a square class entry in the grammar of the given field.
pub fn square_class_from_str(
    field: &FieldDesc,
    s: &str,
) -> Result<SquareClass, SymCalcError> {
    match field {
        FieldDesc::RatQ => square_class_q(&parse_rational(s)?),
        FieldDesc::RatFunQ => {
            let (c, fs) = parse_factored(s)?;
            square_class_qx(&c, &fs)
        }
        FieldDesc::FinitePrime(p) => {
            square_class(&FieldDesc::FinitePrime(*p), &FElem::Rat(parse_rational(s)?))
        }
        FieldDesc::NumberField(m) => square_class_nf(m, &parse_poly(s)?),
    }
}

// ---------------------------------------------------------------------------
// Hilbert symbols and quaternion algebras over Q
// ---------------------------------------------------------------------------

fn split_valuation(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut e = 0u32;
    let mut u = n.clone();
    while (&u % p).is_zero() {
        u /= p;
        e += 1;
    }
    (e, u)
}

fn eps_bit(u: &BigInt) -> u32 {
    // (u - 1)/2 mod 2 for odd u: 1 iff u = 3 mod 4.
    (u.mod_floor(&BigInt::from(4)) == BigInt::from(3)) as u32
}

fn omega_bit(u: &BigInt) -> u32 {
    // (u^2 - 1)/8 mod 2 for odd u: 1 iff u = 3 or 5 mod 8.
    let r = u.mod_floor(&BigInt::from(8)).to_u32().unwrap();
    (r == 3 || r == 5) as u32
}

/// The Hilbert symbol (a, b)_v over Q at a finite prime or infinity.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: &Place) -> i32 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol needs nonzero arguments");
    let ai = a.numer() * a.denom();
    let bi = b.numer() * b.denom();
    match place {
        Place::Infinity => {
            if ai.is_negative() && bi.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let two = BigInt::from(2);
            let (alpha, u) = split_valuation(&ai, &two);
            let (beta, w) = split_valuation(&bi, &two);
            let bit = eps_bit(&u) * eps_bit(&w) + alpha * omega_bit(&w) + beta * omega_bit(&u);
            if bit % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let pb = BigInt::from(*p);
            let (alpha, u) = split_valuation(&ai, &pb);
            let (beta, w) = split_valuation(&bi, &pb);
            let mut sign = 1i32;
            if alpha % 2 == 1 && beta % 2 == 1 && (p - 1) / 2 % 2 == 1 {
                sign = -sign;
            }
            if beta % 2 == 1 {
                sign *= legendre(&u, *p);
            }
            if alpha % 2 == 1 {
                sign *= legendre(&w, *p);
            }
            sign
        }
        Place::Irreducible(_) => {
            panic!("hilbert_symbol is a computation at places of Q")
        }
    }
}

/// A quaternion algebra (a, b / Q) with its ramification set cached.
///
/// `ram` is always finite and even-sized (Hilbert reciprocity), and two
/// quaternion algebras over Q are isomorphic exactly when their sets agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatAlg {
    a: BigInt,
    b: BigInt,
    ram: BTreeSet<Place>,
}

impl QuatAlg {
    pub fn new(a: &BigRational, b: &BigRational) -> Result<Self, SymCalcError> {
        let ca = square_class_q(a)?;
        let cb = square_class_q(b)?;
        let (ClassRep::Int(ai), ClassRep::Int(bi)) = (ca.rep, cb.rep) else { unreachable!() };
        let ram = ram_set_of(&ai, &bi)?;
        assert!(ram.len() % 2 == 0, "Hilbert reciprocity: ramification sets have even size");
        Ok(QuatAlg { a: ai, b: bi, ram })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self, SymCalcError> {
        QuatAlg::new(
            &BigRational::from_integer(BigInt::from(a)),
            &BigRational::from_integer(BigInt::from(b)),
        )
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn ram(&self) -> &BTreeSet<Place> {
        &self.ram
    }

    pub fn is_split(&self) -> bool {
        self.ram.is_empty()
    }
}

fn ram_set_of(a: &BigInt, b: &BigInt) -> Result<BTreeSet<Place>, SymCalcError> {
    let mut candidates: BTreeSet<Place> = BTreeSet::from([Place::Finite(2), Place::Infinity]);
    for n in [a, b] {
        for (p, _) in factor_bigint(n)? {
            let p = p.to_u64().expect("factorization only certifies 64-bit primes");
            candidates.insert(Place::Finite(p));
        }
    }
    let ar = BigRational::from_integer(a.clone());
    let br = BigRational::from_integer(b.clone());
    Ok(candidates.into_iter().filter(|v| hilbert_symbol(&ar, &br, v) == -1).collect())
}

/// The set of places of Q where (a, b) ramifies.
pub fn quat_ram_set(
    a: &BigRational,
    b: &BigRational,
) -> Result<BTreeSet<Place>, SymCalcError> {
    Ok(QuatAlg::new(a, b)?.ram)
}

/// Ramification set of the Brauer product D1 . D2 (symmetric difference).
pub fn quat_product_class(d1: &QuatAlg, d2: &QuatAlg) -> BTreeSet<Place> {
    d1.ram() ^ d2.ram()
}

/// Isomorphism over Q: equality of ramification sets.
pub fn quat_iso(d1: &QuatAlg, d2: &QuatAlg) -> bool {
    d1.ram() == d2.ram()
}

/// Finds (a, b) with the prescribed ramification set by a deterministic
/// bounded search: candidate values are signed squarefree products of the
/// primes in the set together with 2, enumerated by increasing height, and
/// pairs are tried in diagonal order.
pub fn find_quaternion_rep(ram: &BTreeSet<Place>) -> Result<(BigInt, BigInt), SymCalcError> {
    let mut primes: BTreeSet<u64> = BTreeSet::from([2]);
    for v in ram {
        match v {
            Place::Finite(p) => {
                primes.insert(*p);
            }
            Place::Infinity => {}
            Place::Irreducible(_) => {
                return Err(SymCalcError::BadPlace(
                    "quaternion ramification sets live over Q".to_string(),
                ));
            }
        }
    }
    let primes: Vec<u64> = primes.into_iter().collect();
    let mut values: Vec<BigInt> = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        let mut v = BigInt::one();
        for (i, p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                v *= BigInt::from(*p);
            }
        }
        values.push(v.clone());
        values.push(-v);
    }
    values.sort_by(|x, y| x.abs().cmp(&y.abs()).then_with(|| y.cmp(x)));
    let places: Vec<Place> = {
        let mut v: Vec<Place> = primes.iter().map(|&p| Place::Finite(p)).collect();
        v.push(Place::Infinity);
        v
    };
    let rationals: Vec<BigRational> =
        values.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    let ram_of = |i: usize, j: usize| -> BTreeSet<Place> {
        places
            .iter()
            .filter(|v| hilbert_symbol(&rationals[i], &rationals[j], v) == -1)
            .cloned()
            .collect()
    };
    let len = values.len();
    let mut tried = 0usize;
    for n in 0..(2 * len).saturating_sub(1) {
        for i in 0..=n {
            let j = n - i;
            if i >= len || j >= len {
                continue;
            }
            tried += 1;
            if tried > QUAT_SEARCH_BUDGET {
                return Err(SymCalcError::SearchExhausted { budget: QUAT_SEARCH_BUDGET });
            }
            if ram_of(i, j) == *ram {
                return Ok((values[i].clone(), values[j].clone()));
            }
        }
    }
    Err(SymCalcError::SearchExhausted { budget: QUAT_SEARCH_BUDGET })
}

// ---------------------------------------------------------------------------
// Tame residues
// ---------------------------------------------------------------------------

/// The tame residue of a symbol sum at a place of odd residue
/// characteristic: entries are split against the uniformizer, the symbol is
/// expanded multilinearly, (pi)∪(pi) is rewritten as (-1)∪(pi), and the
/// all-unit pieces die.
pub fn tame_residue(place: &Place, s: &SymbolSum) -> Result<SymbolSum, SymCalcError> {
    assert!(s.degree >= 1, "residue needs a symbol of degree >= 1");
    match (place, &s.field) {
        (Place::Irreducible(pi), FieldDesc::RatFunQ) => residue_qx(pi, s),
        (Place::Finite(2), FieldDesc::RatQ) => Err(SymCalcError::ResidueCharTwo),
        (Place::Finite(p), FieldDesc::RatQ) => residue_qp(*p, s),
        _ => Err(SymCalcError::BadPlace(format!(
            "cannot take a residue of a symbol over {} at the place {place}",
            s.field
        ))),
    }
}

fn residue_qx(pi: &QPoly, s: &SymbolSum) -> Result<SymbolSum, SymCalcError> {
    let resfield = if pi.degree() == Some(1) {
        FieldDesc::RatQ
    } else {
        FieldDesc::NumberField(pi.clone())
    };
    let minus_one = residue_unit_qx(pi, &BigInt::from(-1), &[])?;
    let mut out = SymbolSum::zero(resfield, s.degree - 1);
    for term in &s.terms {
        let mut pi_slots: Vec<usize> = Vec::new();
        let mut units: Vec<(BigInt, Vec<QPoly>)> = Vec::new();
        for (idx, entry) in term.iter().enumerate() {
            let ClassRep::FunQ { c, polys } = &entry.rep else { unreachable!() };
            let mut rest = polys.clone();
            if let Some(pos) = rest.iter().position(|f| f == pi) {
                rest.remove(pos);
                pi_slots.push(idx);
            }
            units.push((c.clone(), rest));
        }
        for mask in 1u32..(1 << pi_slots.len()) {
            let chosen: Vec<usize> = pi_slots
                .iter()
                .enumerate()
                .filter(|(t, _)| mask & (1 << t) != 0)
                .map(|(_, &idx)| idx)
                .collect();
            let mut rterm: Vec<SquareClass> = Vec::with_capacity(s.degree - 1);
            for _ in 1..chosen.len() {
                rterm.push(minus_one.clone());
            }
            for (idx, (c, rest)) in units.iter().enumerate() {
                if chosen.contains(&idx) {
                    continue;
                }
                rterm.push(residue_unit_qx(pi, c, rest)?);
            }
            out.add_term(rterm);
        }
    }
    Ok(out)
}

/// Residue-field class of the unit c * prod f_i at the place pi.
fn residue_unit_qx(
    pi: &QPoly,
    c: &BigInt,
    polys: &[QPoly],
) -> Result<SquareClass, SymCalcError> {
    if pi.degree() == Some(1) {
        let x0 = -pi.coeff(0);
        let mut val = BigRational::from_integer(c.clone());
        for f in polys {
            val *= f.eval(&x0);
        }
        square_class_q(&val)
    } else {
        let mut v = QPoly::constant(BigRational::from_integer(c.clone()));
        for f in polys {
            v = v.mul(f);
        }
        square_class_nf(pi, &v)
    }
}

fn residue_qp(p: u64, s: &SymbolSum) -> Result<SymbolSum, SymCalcError> {
    let pb = BigInt::from(p);
    let minus_one = square_class_fp(p, &BigInt::from(-1))?;
    let mut out = SymbolSum::zero(FieldDesc::FinitePrime(p), s.degree - 1);
    for term in &s.terms {
        let mut pi_slots: Vec<usize> = Vec::new();
        let mut units: Vec<BigInt> = Vec::new();
        for (idx, entry) in term.iter().enumerate() {
            let ClassRep::Int(a) = &entry.rep else { unreachable!() };
            if (a % &pb).is_zero() {
                pi_slots.push(idx);
                units.push(a / &pb);
            } else {
                units.push(a.clone());
            }
        }
        for mask in 1u32..(1 << pi_slots.len()) {
            let chosen: Vec<usize> = pi_slots
                .iter()
                .enumerate()
                .filter(|(t, _)| mask & (1 << t) != 0)
                .map(|(_, &idx)| idx)
                .collect();
            let mut rterm: Vec<SquareClass> = Vec::with_capacity(s.degree - 1);
            for _ in 1..chosen.len() {
                rterm.push(minus_one.clone());
            }
            for (idx, u) in units.iter().enumerate() {
                if chosen.contains(&idx) {
                    continue;
                }
                rterm.push(square_class_fp(p, u)?);
            }
            out.add_term(rterm);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Faddeev profile, specialization, class decisions
// ---------------------------------------------------------------------------

/// Residues of a Q(x) symbol sum at every monic irreducible dividing one of
/// its entries (all other finite places are automatically unramified).
/// Places with a decidably trivial residue are dropped; the rest carry the
/// triviality verdict (`False` = decidably nontrivial, `Undecided`).
pub fn ramification_profile_qx(
    s: &SymbolSum,
) -> Result<Vec<(QPoly, SymbolSum, Trilean)>, SymCalcError> {
    if s.field != FieldDesc::RatFunQ {
        return Err(SymCalcError::BadField("ramification profile needs a Q(x) symbol".to_string()));
    }
    let mut places: BTreeSet<QPoly> = BTreeSet::new();
    for term in &s.terms {
        for entry in term {
            let ClassRep::FunQ { polys, .. } = &entry.rep else { unreachable!() };
            places.extend(polys.iter().cloned());
        }
    }
    let mut out = Vec::new();
    for pi in places {
        let r = tame_residue(&Place::Irreducible(pi.clone()), s)?;
        let verdict = class_is_trivial(&r);
        if verdict != Trilean::True {
            out.push((pi, r, verdict));
        }
    }
    Ok(out)
}

/// Evaluates a Q(x) symbol sum at x = x0; every entry must be a unit at the
/// place (x - x0).
pub fn specialize(s: &SymbolSum, x0: &BigRational) -> Result<SymbolSum, SymCalcError> {
    if s.field != FieldDesc::RatFunQ {
        return Err(SymCalcError::BadField("specialization needs a Q(x) symbol".to_string()));
    }
    let lin = QPoly::x_minus(x0);
    let mut out = SymbolSum::zero(FieldDesc::RatQ, s.degree);
    for term in &s.terms {
        let mut t = Vec::with_capacity(s.degree);
        for entry in term {
            let ClassRep::FunQ { c, polys } = &entry.rep else { unreachable!() };
            if polys.contains(&lin) {
                return Err(SymCalcError::NotAUnitAtPlace(format!("{entry} at x = {x0}")));
            }
            let mut val = BigRational::from_integer(c.clone());
            for f in polys {
                val *= f.eval(x0);
            }
            t.push(square_class_q(&val)?);
        }
        out.add_term(t);
    }
    Ok(out)
}

/// Decides whether a symbol sum is the trivial class.
///
/// Over Q: degree 1 by the square test, degree 2 by quaternion ramification,
/// degree >= 3 by the real-place sign rule (a term is nontrivial exactly
/// when all entries are negative). Over F_p: degree 1 by the residue symbol,
/// degree >= 2 always trivial. Over number fields of degree >= 2 (and for
/// nonempty sums over Q(x)) the answer is `Undecided`.
pub fn class_is_trivial(s: &SymbolSum) -> Trilean {
    if s.terms.is_empty() {
        return Trilean::True;
    }
    match &s.field {
        FieldDesc::RatQ => trivial_over_q(s),
        FieldDesc::FinitePrime(_) => match s.degree {
            0 | 1 => Trilean::False,
            _ => Trilean::True,
        },
        FieldDesc::RatFunQ => Trilean::Undecided,
        FieldDesc::NumberField(_) => Trilean::Undecided,
    }
}

fn trivial_over_q(s: &SymbolSum) -> Trilean {
    match s.degree {
        0 => Trilean::False,
        1 => {
            let mut prod = BigInt::one();
            for term in &s.terms {
                let ClassRep::Int(a) = &term[0].rep else { unreachable!() };
                prod *= a;
            }
            let c = square_class_q(&BigRational::from_integer(prod))
                .expect("canonical representatives stay factorable");
            Trilean::from_bool(c.is_one())
        }
        2 => {
            let mut total: BTreeSet<Place> = BTreeSet::new();
            for term in &s.terms {
                let (ClassRep::Int(a), ClassRep::Int(b)) = (&term[0].rep, &term[1].rep) else {
                    unreachable!()
                };
                let ram =
                    ram_set_of(a, b).expect("canonical representatives stay factorable");
                total = &total ^ &ram;
            }
            Trilean::from_bool(total.is_empty())
        }
        _ => {
            let mut bit = 0u32;
            for term in &s.terms {
                let all_negative = term.iter().all(|e| {
                    let ClassRep::Int(a) = &e.rep else { unreachable!() };
                    a.is_negative()
                });
                if all_negative {
                    bit ^= 1;
                }
            }
            Trilean::from_bool(bit == 0)
        }
    }
}

/// Decides equality of two Q(x) symbol sums of the same degree via the
/// Faddeev sequence: the difference must have trivial residues everywhere
/// and a trivial specialization at one unramified rational point. Residues
/// into number fields of degree >= 2 can leave the answer `Undecided`.
pub fn class_equal_qx(s1: &SymbolSum, s2: &SymbolSum) -> Result<Trilean, SymCalcError> {
    Ok(class_equal_qx_places(s1, s2)?.0)
}

/// As [`class_equal_qx`], additionally reporting the places whose residue
/// triviality could not be decided.
pub fn class_equal_qx_places(
    s1: &SymbolSum,
    s2: &SymbolSum,
) -> Result<(Trilean, Vec<QPoly>), SymCalcError> {
    if s1.field != FieldDesc::RatFunQ || s2.field != FieldDesc::RatFunQ {
        return Err(SymCalcError::BadField("class_equal_qx compares Q(x) symbols".to_string()));
    }
    if s1.degree != s2.degree {
        return Err(SymCalcError::BadField(format!(
            "cannot compare symbols of degrees {} and {}",
            s1.degree, s2.degree
        )));
    }
    let d = s1.add(s2);
    if d.is_zero() {
        return Ok((Trilean::True, Vec::new()));
    }
    let profile = ramification_profile_qx(&d)?;
    let undecided: Vec<QPoly> = profile
        .iter()
        .filter(|(_, _, v)| *v == Trilean::Undecided)
        .map(|(pi, _, _)| pi.clone())
        .collect();
    if profile.iter().any(|(_, _, v)| *v == Trilean::False) {
        return Ok((Trilean::False, undecided));
    }
    let x0 = specialization_point(&d);
    let c = specialize(&d, &x0)?;
    match class_is_trivial(&c) {
        Trilean::False => Ok((Trilean::False, undecided)),
        Trilean::True if undecided.is_empty() => Ok((Trilean::True, Vec::new())),
        _ => Ok((Trilean::Undecided, undecided)),
    }
}

/// Triviality of a Q(x) sum through the Faddeev route (residues plus one
/// specialization), strictly stronger than the local rules of
/// [`class_is_trivial`]; also reports the places left undecided.
pub fn class_is_trivial_qx(s: &SymbolSum) -> Result<(Trilean, Vec<QPoly>), SymCalcError> {
    let zero = SymbolSum::zero(FieldDesc::RatFunQ, s.degree);
    class_equal_qx_places(s, &zero)
}

/// First x0 in the order 0, 1, -1, 2, -2, ... where every entry of the sum
/// is a unit at (x - x0).
pub fn specialization_point(s: &SymbolSum) -> BigRational {
    let mut forbidden: BTreeSet<BigRational> = BTreeSet::new();
    for term in &s.terms {
        for entry in term {
            let ClassRep::FunQ { polys, .. } = &entry.rep else {
                continue;
            };
            for f in polys {
                if f.degree() == Some(1) {
                    forbidden.insert(-f.coeff(0));
                }
            }
        }
    }
    let mut h = 0i64;
    loop {
        for cand in [h, -h] {
            let x0 = BigRational::from_integer(BigInt::from(cand));
            if !forbidden.contains(&x0) {
                return x0;
            }
            if h == 0 {
                break;
            }
        }
        h += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qr(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn scq(n: i64) -> SquareClass {
        square_class_q(&qr(n)).unwrap()
    }

    fn scx(s: &str) -> SquareClass {
        let (c, fs) = parse_factored(s).unwrap();
        square_class_qx(&c, &fs).unwrap()
    }

    fn sym_q(entries: &[i64]) -> SymbolSum {
        SymbolSum::symbol(entries.iter().map(|&n| scq(n)).collect())
    }

    fn sym_x(entries: &[&str]) -> SymbolSum {
        SymbolSum::symbol(entries.iter().map(|&s| scx(s)).collect())
    }

    fn int_rep(c: &SquareClass) -> BigInt {
        match c.rep() {
            ClassRep::Int(n) => n.clone(),
            other => panic!("expected an integer representative, got {other:?}"),
        }
    }

    #[test]
    fn square_classes_canonicalize() {
        assert_eq!(int_rep(&scq(18)), BigInt::from(2));
        assert_eq!(int_rep(&scq(-12)), BigInt::from(-3));
        assert_eq!(int_rep(&scq(1)), BigInt::from(1));
        assert!(scq(49).is_one());
        assert_eq!(square_class_q(&BigRational::new(BigInt::from(1), BigInt::from(2))), Ok(scq(2)));
        assert_eq!(square_class_q(&qr(0)).unwrap_err(), SymCalcError::ZeroElement);

        let c = scx("x^2 * (x - 1)");
        assert_eq!(c.to_string(), "(x - 1)");
        let refined = scx("(x^2 - 1)");
        assert_eq!(refined.to_string(), "(x - 1) * (x + 1)");
        assert_eq!(scx("12"), scx("3"));
        let bad = square_class_qx(&qr(1), &[(parse_poly("2*x").unwrap(), 1)]);
        assert!(matches!(bad.unwrap_err(), SymCalcError::NonMonicFactor(_)));

        let n7 = square_class_fp(7, &BigInt::from(3)).unwrap();
        assert_eq!(n7.rep(), &ClassRep::Fp(3));
        assert!(square_class_fp(7, &BigInt::from(2)).unwrap().is_one());
        assert_eq!(
            square_class_fp(7, &BigInt::from(14)).unwrap_err(),
            SymCalcError::ZeroElement
        );
        assert!(square_class_fp(9, &BigInt::one()).is_err());
    }

    #[test]
    fn square_class_bilinearity() {
        for (a, b) in [(3i64, 5i64), (-2, 7), (6, 10), (-1, -1)] {
            let prod = square_class_q(&qr(a * b)).unwrap();
            let sum = SymbolSum::from_terms(
                FieldDesc::RatQ,
                1,
                vec![vec![scq(a)], vec![scq(b)], vec![prod]],
            );
            assert_eq!(class_is_trivial(&sum), Trilean::True, "(ab)+(a)+(b) for a={a} b={b}");
        }
        for s in [2i64, 3, 10] {
            assert_eq!(square_class_q(&qr(7 * s * s)).unwrap(), scq(7));
        }
    }

    #[test]
    fn number_field_classes() {
        let m = parse_poly("x^2 + 1").unwrap();
        let field = FieldDesc::number_field(&m).unwrap();
        assert_eq!(field, FieldDesc::NumberField(m.clone()));
        assert!(FieldDesc::number_field(&parse_poly("x^2 - 1").unwrap()).is_err());

        // x^3 reduces to -x mod x^2 + 1.
        let c = square_class_nf(&m, &parse_poly("x^3").unwrap()).unwrap();
        assert_eq!(c.rep(), &ClassRep::Nf(parse_poly("-x").unwrap()));
        // Rational squares scale away, including through denominators.
        let c2 = square_class_nf(&m, &parse_poly("4/9 * x").unwrap()).unwrap();
        assert_eq!(c2.rep(), &ClassRep::Nf(parse_poly("x").unwrap()));
        assert!(square_class_nf(&m, &QPoly::constant(qr(9).recip())).unwrap().is_one());

        // Degree-1 moduli land in Q.
        let lin = parse_poly("x - 3").unwrap();
        let c3 = square_class_nf(&lin, &parse_poly("2*x").unwrap()).unwrap();
        assert_eq!(c3, scq(6));
    }

    #[test]
    fn symbol_sum_normalization() {
        let mut s = SymbolSum::zero(FieldDesc::RatQ, 2);
        s.add_term(vec![scq(3), scq(5)]);
        s.add_term(vec![scq(5), scq(3)]);
        assert!(s.is_zero(), "duplicate terms cancel mod 2");

        let with_one = SymbolSum::from_terms(FieldDesc::RatQ, 2, vec![vec![scq(1), scq(5)]]);
        assert!(with_one.is_zero(), "terms containing 1 drop");

        let steinberg = SymbolSum::from_terms(FieldDesc::RatQ, 2, vec![vec![scq(2), scq(-1)]]);
        assert!(steinberg.is_zero(), "(2, -1) is literally (a, 1-a)");

        let kept = sym_q(&[-1, -1]);
        assert_eq!(kept.terms().len(), 1);

        let x = scx("x");
        let one_minus_x = scx("1 - x");
        let st_x = SymbolSum::from_terms(FieldDesc::RatFunQ, 2, vec![vec![x, one_minus_x]]);
        assert!(st_x.is_zero(), "(x, 1-x) drops over Q(x)");
    }

    #[test]
    fn hilbert_symbol_values() {
        let p3 = Place::Finite(3);
        assert_eq!(hilbert_symbol(&qr(-1), &qr(3), &p3), -1);
        assert_eq!(hilbert_symbol(&qr(-1), &qr(3), &Place::Infinity), 1);
        for b in [2i64, -7, 15] {
            for v in [Place::Finite(2), Place::Finite(5), Place::Infinity] {
                assert_eq!(hilbert_symbol(&qr(1), &qr(b), &v), 1);
            }
        }
        assert_eq!(hilbert_symbol(&qr(-1), &qr(-1), &Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(&qr(-1), &qr(-1), &Place::Infinity), -1);
        assert_eq!(hilbert_symbol(&qr(2), &qr(-1), &Place::Finite(2)), 1);
        // Square-class invariance through rationals.
        assert_eq!(
            hilbert_symbol(&BigRational::new(BigInt::from(-1), BigInt::from(4)), &qr(3), &p3),
            -1
        );
    }

    #[test]
    fn quaternion_ramification() {
        let ram = |a: i64, b: i64| {
            QuatAlg::from_ints(a, b).unwrap().ram().iter().cloned().collect::<Vec<_>>()
        };
        assert_eq!(ram(-1, 3), vec![Place::Finite(2), Place::Finite(3)]);
        assert_eq!(ram(-1, 7), vec![Place::Finite(2), Place::Finite(7)]);
        assert_eq!(ram(-1, 21), vec![Place::Finite(3), Place::Finite(7)]);
        assert_eq!(ram(1, 5), vec![]);
        assert_eq!(ram(-1, -1), vec![Place::Finite(2), Place::Infinity]);

        let d1 = QuatAlg::from_ints(-1, 3).unwrap();
        let d2 = QuatAlg::from_ints(-1, 7).unwrap();
        let d21 = QuatAlg::from_ints(-1, 21).unwrap();
        assert_eq!(quat_product_class(&d1, &d2), d21.ram().clone());
        assert!(quat_product_class(&d1, &d1).is_empty());
        let split = QuatAlg::from_ints(1, 5).unwrap();
        assert_eq!(quat_product_class(&d1, &split), d1.ram().clone());

        assert!(!quat_iso(&d1, &d2));
        let (a, b) = find_quaternion_rep(&quat_product_class(&d1, &d2)).unwrap();
        let rep = QuatAlg::new(
            &BigRational::from_integer(a),
            &BigRational::from_integer(b),
        )
        .unwrap();
        assert!(quat_iso(&d21, &rep));
        let e1 = QuatAlg::from_ints(2, 3).unwrap();
        let e2 = QuatAlg::from_ints(2, 75).unwrap();
        assert!(quat_iso(&e1, &e2));
    }

    #[test]
    fn quaternion_rep_search() {
        assert_eq!(
            find_quaternion_rep(&BTreeSet::new()).unwrap(),
            (BigInt::one(), BigInt::one())
        );
        let hamilton = BTreeSet::from([Place::Finite(2), Place::Infinity]);
        assert_eq!(
            find_quaternion_rep(&hamilton).unwrap(),
            (BigInt::from(-1), BigInt::from(-1))
        );
        for target in [
            BTreeSet::from([Place::Finite(3), Place::Finite(7)]),
            BTreeSet::from([Place::Finite(2), Place::Finite(5)]),
            BTreeSet::from([Place::Finite(3), Place::Infinity]),
        ] {
            let (a, b) = find_quaternion_rep(&target).unwrap();
            let d = QuatAlg::new(
                &BigRational::from_integer(a),
                &BigRational::from_integer(b),
            )
            .unwrap();
            assert_eq!(d.ram(), &target);
        }
    }

    #[test]
    fn hilbert_reciprocity_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(2026);
        let mut checked = 0;
        while checked < 50 {
            let a: i64 = rng.gen_range(-10_000..=10_000);
            let b: i64 = rng.gen_range(-10_000..=10_000);
            if a == 0 || b == 0 {
                continue;
            }
            let d = QuatAlg::from_ints(a, b).unwrap();
            assert_eq!(d.ram().len() % 2, 0, "odd ramification set for ({a}, {b})");
            checked += 1;
        }
    }

    #[test]
    fn tame_residue_examples() {
        let place = Place::Irreducible(parse_poly("x").unwrap());
        // rho_x((x)(a)(b)) = (a-bar)(b-bar) for unit constants.
        let s = sym_x(&["x", "2", "5"]);
        let r = tame_residue(&place, &s).unwrap();
        assert_eq!(r, sym_q(&[2, 5]));
        // All-unit symbols die.
        let s = sym_x(&["3", "5", "7"]);
        assert!(tame_residue(&place, &s).unwrap().is_zero());
        // rho_x((x)(x)(u)) = (-1)(u-bar).
        let s = sym_x(&["x", "x", "7"]);
        let r = tame_residue(&place, &s).unwrap();
        assert_eq!(r, sym_q(&[-1, 7]));
        // Additivity over terms.
        let s1 = sym_x(&["x", "2", "5"]);
        let s2 = sym_x(&["x", "3", "5"]);
        let both = s1.add(&s2);
        let r = tame_residue(&place, &both).unwrap();
        assert_eq!(r, sym_q(&[2, 5]).add(&sym_q(&[3, 5])));
        // char 2 rejected.
        assert_eq!(
            tame_residue(&Place::Finite(2), &sym_q(&[3, 5])).unwrap_err(),
            SymCalcError::ResidueCharTwo
        );
    }

    #[test]
    fn tame_residue_over_q_places() {
        // At p = 3: (3)(−1) has residue (−1 mod 3) = nonresidue class.
        let s = sym_q(&[3, -1]);
        let r = tame_residue(&Place::Finite(3), &s).unwrap();
        assert_eq!(r.field(), &FieldDesc::FinitePrime(3));
        assert_eq!(r.terms().len(), 1);
        assert_eq!(class_is_trivial(&r), Trilean::False);
        // (5)(2) at p = 3 is a unit symbol.
        let s = sym_q(&[5, 2]);
        assert!(tame_residue(&Place::Finite(3), &s).unwrap().is_zero());
    }

    #[test]
    fn residue_into_number_field() {
        let pi = parse_poly("x^2 + 1").unwrap();
        let place = Place::Irreducible(pi.clone());
        let s = sym_x(&["(x^2 + 1)", "x"]);
        let r = tame_residue(&place, &s).unwrap();
        assert_eq!(r.field(), &FieldDesc::NumberField(pi));
        assert_eq!(r.terms().len(), 1);
        assert_eq!(class_is_trivial(&r), Trilean::Undecided);
    }

    #[test]
    fn ramification_profiles() {
        let s = sym_x(&["x", "-1", "-1"]);
        let profile = ramification_profile_qx(&s).unwrap();
        assert_eq!(profile.len(), 1);
        assert_eq!(profile[0].0, parse_poly("x").unwrap());
        assert_eq!(profile[0].1, sym_q(&[-1, -1]));
        assert_eq!(profile[0].2, Trilean::False);

        let s = sym_x(&["x", "2", "-1"]);
        assert!(ramification_profile_qx(&s).unwrap().is_empty());

        let s = sym_x(&["2", "5"]);
        assert!(ramification_profile_qx(&s).unwrap().is_empty());
    }

    #[test]
    fn specialization() {
        let s = sym_x(&["2", "5"]);
        assert_eq!(specialize(&s, &qr(7)).unwrap(), sym_q(&[2, 5]));

        let s = sym_x(&["x", "-1", "-1"]);
        assert_eq!(specialize(&s, &qr(-1)).unwrap(), sym_q(&[-1, -1, -1]));
        assert!(matches!(
            specialize(&s, &qr(0)).unwrap_err(),
            SymCalcError::NotAUnitAtPlace(_)
        ));
        assert_eq!(specialization_point(&s), qr(1));
    }

    #[test]
    fn triviality_decisions() {
        assert_eq!(class_is_trivial(&sym_q(&[-1, -1, -1])), Trilean::False);
        assert_eq!(class_is_trivial(&sym_q(&[2, -1, -1])), Trilean::True);
        assert_eq!(class_is_trivial(&sym_q(&[-1, -1, -1, -1, -1])), Trilean::False);
        assert_eq!(class_is_trivial(&sym_q(&[-1, -1])), Trilean::False);
        assert_eq!(class_is_trivial(&sym_q(&[3, 5]).add(&sym_q(&[3, 5]))), Trilean::True);
        assert_eq!(class_is_trivial(&sym_q(&[7])), Trilean::False);
        assert_eq!(
            class_is_trivial(&SymbolSum::from_terms(
                FieldDesc::RatQ,
                1,
                vec![vec![scq(2)], vec![scq(8)]],
            )),
            Trilean::True
        );
        // Degree >= 2 over a finite field is always trivial.
        let n3 = square_class_fp(3, &BigInt::from(-1)).unwrap();
        let fp_sym = SymbolSum::from_terms(
            FieldDesc::FinitePrime(3),
            2,
            vec![vec![n3.clone(), n3.clone()]],
        );
        assert_eq!(class_is_trivial(&fp_sym), Trilean::True);
    }

    #[test]
    fn class_equality_over_qx() {
        let s1 = sym_x(&["x", "-1", "-1"]);
        let s2 = sym_x(&["x", "-2", "-1"]);
        assert_eq!(class_equal_qx(&s1, &s2).unwrap(), Trilean::True);

        let zero = SymbolSum::zero(FieldDesc::RatFunQ, 3);
        assert_eq!(class_equal_qx(&s1, &zero).unwrap(), Trilean::False);
        assert_eq!(class_equal_qx(&s1, &s1).unwrap(), Trilean::True);
        assert_eq!(class_equal_qx(&s2, &s1).unwrap(), Trilean::True);

        // Constant symbols obey Faddeev exactness: profile empty and any
        // specialization returns the original class.
        let c = sym_x(&["2", "5"]);
        assert!(ramification_profile_qx(&c).unwrap().is_empty());
        for x0 in [0i64, 3, -4] {
            assert_eq!(specialize(&c, &qr(x0)).unwrap(), sym_q(&[2, 5]));
        }

        // The Faddeev route decides triviality where the local rules stay
        // undecided.
        assert_eq!(class_is_trivial(&s1), Trilean::Undecided);
        assert_eq!(class_is_trivial_qx(&s1).unwrap().0, Trilean::False);
        let steiny = sym_x(&["x", "1 - x", "7"]);
        assert_eq!(class_is_trivial_qx(&steiny).unwrap().0, Trilean::True);
        let und = sym_x(&["x^2+1", "3", "5"]);
        let (verdict, places) = class_is_trivial_qx(&und).unwrap();
        assert_eq!(verdict, Trilean::Undecided);
        assert_eq!(places, vec![parse_poly("x^2 + 1").unwrap()]);
    }

    #[test]
    fn place_parsing_and_order() {
        assert_eq!(parse_place("p=7").unwrap(), Place::Finite(7));
        assert_eq!(parse_place("inf").unwrap(), Place::Infinity);
        assert_eq!(
            parse_place("p(x)=x^2+1").unwrap(),
            Place::Irreducible(parse_poly("x^2 + 1").unwrap())
        );
        assert!(parse_place("p=6").is_err());
        assert!(parse_place("p(x)=x^2-1").is_err());
        assert!(parse_place("q=7").is_err());
        let mut places = vec![Place::Infinity, Place::Finite(5), Place::Finite(2)];
        places.sort();
        assert_eq!(places, vec![Place::Finite(2), Place::Finite(5), Place::Infinity]);
    }

    #[test]
    fn json_round_trips() {
        let s = sym_x(&["x", "-1", "-1"]).add(&sym_x(&["(x - 1)", "2", "3"]));
        let v = s.to_json();
        let back = SymbolSum::from_json(&v).unwrap();
        assert_eq!(back, s);

        let q = sym_q(&[-1, -1]);
        assert_eq!(SymbolSum::from_json(&q.to_json()).unwrap(), q);

        let f = FieldDesc::finite_prime(11).unwrap();
        assert_eq!(FieldDesc::from_json(&f.to_json()).unwrap(), f);
        let nf = FieldDesc::number_field(&parse_poly("x^2 + 1").unwrap()).unwrap();
        assert_eq!(FieldDesc::from_json(&nf.to_json()).unwrap(), nf);
    }
}
