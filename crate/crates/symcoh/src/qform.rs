//! Exact quadratic-form arithmetic over Q and Q(x): diagonalization by
//! symmetric congruence, Springer first/second residues at places of odd
//! residue characteristic, the good-reduction criterion for spinor groups,
//! Pfister forms, and classification invariants (discriminant, Hasse symbol,
//! signature) with equivalence over Q_p and Q.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::poly::{factor_bigint, factor_rational, PolyError, QPoly, RatFun};
use crate::symcalc::{
    class_is_trivial, hilbert_symbol, square_class, square_class_fp, square_class_nf,
    square_class_q, ClassRep, FElem, FieldDesc, Place, SquareClass, SymCalcError, SymbolSum,
    Trilean,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QFormError {
    #[error("degenerate form")]
    DegenerateForm,
    #[error("forms need at least one diagonal entry")]
    EmptyForm,
    #[error("invalid field for this operation: {0}")]
    BadField(String),
    #[error("invalid place for this operation: {0}")]
    BadPlace(String),
    #[error(transparent)]
    Sym(#[from] SymCalcError),
}

impl From<PolyError> for QFormError {
    fn from(e: PolyError) -> Self {
        QFormError::Sym(e.into())
    }
}

/// The scaling applied before taking residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    One,
    Pi,
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::One => "1",
            Scaling::Pi => "pi",
        })
    }
}

// ---------------------------------------------------------------------------
// Diagonal forms
// ---------------------------------------------------------------------------

/// A nondegenerate diagonal quadratic form. Entries are kept both as the
/// exact coefficients supplied and as canonical square classes; residue
/// forms live over residue fields (F_p, Q, or a number field) and may be
/// empty, while user-constructed forms are nonempty over Q or Q(x).
#[derive(Debug, Clone)]
pub struct DiagForm {
    field: FieldDesc,
    raw: Vec<FElem>,
    classes: Vec<SquareClass>,
}

impl DiagForm {
    /// A form over Q or Q(x) with the given diagonal coefficients.
    pub fn new(field: FieldDesc, raw: Vec<FElem>) -> Result<Self, QFormError> {
        match field {
            FieldDesc::RatQ | FieldDesc::RatFunQ => {}
            other => {
                return Err(QFormError::BadField(format!(
                    "forms are constructed over Q or Q(x), not {other}"
                )))
            }
        }
        if raw.is_empty() {
            return Err(QFormError::EmptyForm);
        }
        let classes = raw
            .iter()
            .map(|e| square_class(&field, e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DiagForm { field, raw, classes })
    }

    /// A form over Q with the given rational coefficients.
    pub fn new_q(entries: Vec<BigRational>) -> Result<Self, QFormError> {
        DiagForm::new(FieldDesc::RatQ, entries.into_iter().map(FElem::Rat).collect())
    }

    fn residue_form(field: FieldDesc, raw: Vec<FElem>, classes: Vec<SquareClass>) -> Self {
        DiagForm { field, raw, classes }
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn raw(&self) -> &[FElem] {
        &self.raw
    }

    pub fn classes(&self) -> &[SquareClass] {
        &self.classes
    }

    pub fn class_strings(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.to_string()).collect()
    }

    pub fn raw_strings(&self) -> Vec<String> {
        self.raw.iter().map(|e| e.to_string()).collect()
    }

    /// The form scaled entrywise by a nonzero factor of the same field.
    pub fn scaled(&self, factor: &FElem) -> Result<Self, QFormError> {
        let raw = self
            .raw
            .iter()
            .map(|e| match (e, factor) {
                (FElem::Rat(a), FElem::Rat(b)) => Ok(FElem::Rat(a * b)),
                (FElem::Rat(a), FElem::Factored(c, fs)) => {
                    Ok(FElem::Factored(a * c, fs.clone()))
                }
                (FElem::Factored(c, fs), FElem::Rat(b)) => {
                    Ok(FElem::Factored(c * b, fs.clone()))
                }
                (FElem::Factored(c, fs), FElem::Factored(c2, fs2)) => {
                    let mut all = fs.clone();
                    all.extend(fs2.iter().cloned());
                    Ok(FElem::Factored(c * c2, all))
                }
                _ => Err(QFormError::BadField(
                    "scaling factors must match the form's field".to_string(),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        DiagForm::new(self.field.clone(), raw)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field.to_json(),
            "dim": self.dim(),
            "entries": self.raw_strings(),
            "classes": self.class_strings(),
        })
    }
}

/// Parses a comma-separated diagonal form such as "1,1,1,2,x".
pub fn parse_form(field: &FieldDesc, s: &str) -> Result<DiagForm, QFormError> {
    let mut raw = Vec::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(QFormError::Sym(SymCalcError::Parse(
                "empty form entry".to_string(),
            )));
        }
        match field {
            FieldDesc::RatQ => raw.push(FElem::Rat(crate::poly::parse_rational(piece)?)),
            FieldDesc::RatFunQ => {
                let (c, fs) = crate::poly::parse_factored(piece)?;
                raw.push(FElem::Factored(c, fs));
            }
            other => {
                return Err(QFormError::BadField(format!(
                    "forms are parsed over Q or Q(x), not {other}"
                )))
            }
        }
    }
    DiagForm::new(field.clone(), raw)
}

/// Parses a form over Q(x) when any entry mentions x, over Q otherwise.
pub fn parse_form_auto(s: &str) -> Result<DiagForm, QFormError> {
    let field = if s.contains('x') || s.contains('X') {
        FieldDesc::RatFunQ
    } else {
        FieldDesc::RatQ
    };
    parse_form(&field, s)
}

// ---------------------------------------------------------------------------
// Diagonalization by symmetric congruence
// ---------------------------------------------------------------------------

trait SymField: Clone {
    fn fzero() -> Self;
    fn fone() -> Self;
    fn vanishes(&self) -> bool;
    fn fadd(&self, o: &Self) -> Self;
    fn fsub(&self, o: &Self) -> Self;
    fn fmul(&self, o: &Self) -> Self;
    fn fdiv(&self, o: &Self) -> Self;
}

impl SymField for BigRational {
    fn fzero() -> Self {
        Zero::zero()
    }
    fn fone() -> Self {
        One::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn fadd(&self, o: &Self) -> Self {
        self + o
    }
    fn fsub(&self, o: &Self) -> Self {
        self - o
    }
    fn fmul(&self, o: &Self) -> Self {
        self * o
    }
    fn fdiv(&self, o: &Self) -> Self {
        self / o
    }
}

impl SymField for RatFun {
    fn fzero() -> Self {
        RatFun::constant(BigRational::zero())
    }
    fn fone() -> Self {
        RatFun::constant(BigRational::one())
    }
    fn vanishes(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn fadd(&self, o: &Self) -> Self {
        RatFun::add(self, o)
    }
    fn fsub(&self, o: &Self) -> Self {
        RatFun::sub(self, o)
    }
    fn fmul(&self, o: &Self) -> Self {
        RatFun::mul(self, o)
    }
    fn fdiv(&self, o: &Self) -> Self {
        RatFun::div(self, o)
    }
}

/// Symmetric congruence reduction: returns (diagonal, S) with
/// S^T * gram * S equal to the diagonal matrix. Errors on non-symmetric or
/// degenerate input.
fn diagonalize_sym<T: SymField>(gram: &[Vec<T>]) -> Result<(Vec<T>, Vec<Vec<T>>), QFormError> {
    let n = gram.len();
    if n == 0 {
        return Err(QFormError::EmptyForm);
    }
    for row in gram {
        if row.len() != n {
            return Err(QFormError::BadField("Gram matrix must be square".to_string()));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !gram[i][j].fsub(&gram[j][i]).vanishes() {
                return Err(QFormError::BadField("Gram matrix must be symmetric".to_string()));
            }
        }
    }
    let mut a: Vec<Vec<T>> = gram.to_vec();
    let mut s: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::fone() } else { T::fzero() }).collect())
        .collect();
    // Column operation e_i += c * e_j on the basis: A gets the same
    // operation on rows and columns, S on columns only.
    let add_basis = |a: &mut Vec<Vec<T>>, s: &mut Vec<Vec<T>>, i: usize, j: usize, c: &T| {
        for t in 0..n {
            a[i][t] = a[i][t].fadd(&c.fmul(&a[j][t]));
        }
        for t in 0..n {
            a[t][i] = a[t][i].fadd(&c.fmul(&a[t][j]));
        }
        for t in 0..n {
            s[t][i] = s[t][i].fadd(&c.fmul(&s[t][j]));
        }
    };
    let swap_basis = |a: &mut Vec<Vec<T>>, s: &mut Vec<Vec<T>>, i: usize, j: usize| {
        a.swap(i, j);
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in s.iter_mut() {
            row.swap(i, j);
        }
    };
    for k in 0..n {
        if a[k][k].vanishes() {
            if let Some(j) = ((k + 1)..n).find(|&j| !a[j][j].vanishes()) {
                swap_basis(&mut a, &mut s, k, j);
            } else {
                // All trailing diagonal entries vanish; revive one from an
                // off-diagonal entry or conclude the form is degenerate.
                let mut found = None;
                'search: for i in k..n {
                    for j in (i + 1)..n {
                        if !a[i][j].vanishes() {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    return Err(QFormError::DegenerateForm);
                };
                let one = T::fone();
                add_basis(&mut a, &mut s, i, j, &one);
                if i != k {
                    swap_basis(&mut a, &mut s, k, i);
                }
            }
        }
        let d = a[k][k].clone();
        for i in (k + 1)..n {
            if !a[k][i].vanishes() {
                let c = T::fzero().fsub(&a[k][i].fdiv(&d));
                add_basis(&mut a, &mut s, i, k, &c);
            }
        }
    }
    let diag = (0..n).map(|k| a[k][k].clone()).collect();
    Ok((diag, s))
}

/// Diagonalizes a symmetric Gram matrix over Q; returns the diagonal form
/// and the congruence transform S with S^T * gram * S diagonal.
pub fn diagonalize_q(
    gram: &[Vec<BigRational>],
) -> Result<(DiagForm, Vec<Vec<BigRational>>), QFormError> {
    let (diag, s) = diagonalize_sym(gram)?;
    if diag.iter().any(|d| d.is_zero()) {
        return Err(QFormError::DegenerateForm);
    }
    let form = DiagForm::new_q(diag)?;
    Ok((form, s))
}

/// Diagonalizes a symmetric Gram matrix over Q(x).
pub fn diagonalize_qx(
    gram: &[Vec<RatFun>],
) -> Result<(DiagForm, Vec<Vec<RatFun>>), QFormError> {
    let (diag, s) = diagonalize_sym(gram)?;
    let mut raw = Vec::with_capacity(diag.len());
    for d in &diag {
        if d.is_zero() {
            return Err(QFormError::DegenerateForm);
        }
        // num/den and num*den differ by the square den^2.
        let (ln, nm) = d.num().monic();
        let (ld, dm) = d.den().monic();
        let mut fs = Vec::new();
        if !nm.is_constant() {
            fs.push((nm, 1));
        }
        if !dm.is_constant() {
            fs.push((dm, 1));
        }
        raw.push(FElem::Factored(ln * ld, fs));
    }
    let form = DiagForm::new(FieldDesc::RatFunQ, raw)?;
    Ok((form, s))
}

// ---------------------------------------------------------------------------
// Springer residues and good reduction
// ---------------------------------------------------------------------------

/// First and second residues of a form at a place, after scaling by
/// 1 or by the uniformizer.
#[derive(Debug, Clone)]
pub struct ResiduePair {
    pub first: DiagForm,
    pub second: DiagForm,
    pub scaling: Scaling,
}

impl ResiduePair {
    pub fn to_json(&self) -> Value {
        json!({
            "first": self.first.to_json(),
            "second": self.second.to_json(),
            "scaling": self.scaling.to_string(),
        })
    }
}

fn check_place_for_form(q: &DiagForm, place: &Place) -> Result<(), QFormError> {
    match (&q.field, place) {
        (FieldDesc::RatQ, Place::Finite(2)) => Err(QFormError::Sym(SymCalcError::ResidueCharTwo)),
        (FieldDesc::RatQ, Place::Finite(_)) => Ok(()),
        (FieldDesc::RatFunQ, Place::Irreducible(pi)) => {
            if !pi.is_monic() || pi.degree() == Some(0) {
                return Err(QFormError::BadPlace(format!(
                    "{pi} is not monic of degree >= 1"
                )));
            }
            let (_, factors) = factor_rational(pi)?;
            if factors.len() != 1 || factors[0].1 != 1 {
                return Err(QFormError::BadPlace(format!("{pi} is reducible")));
            }
            Ok(())
        }
        (f, v) => Err(QFormError::BadPlace(format!(
            "a form over {f} has no residues at the place {v}"
        ))),
    }
}

/// Springer residues with the default scaling 1.
pub fn springer_residues(q: &DiagForm, place: &Place) -> Result<ResiduePair, QFormError> {
    springer_residues_scaled(q, place, Scaling::One)
}

/// Springer residues of lambda * q at the place, lambda in {1, pi}: each
/// entry is written pi^e * u with u a unit; even e contributes the residue
/// of u to the first form, odd e to the second.
pub fn springer_residues_scaled(
    q: &DiagForm,
    place: &Place,
    scaling: Scaling,
) -> Result<ResiduePair, QFormError> {
    check_place_for_form(q, place)?;
    let scale_bit = matches!(scaling, Scaling::Pi) as u32;
    let mut first_raw = Vec::new();
    let mut first_classes = Vec::new();
    let mut second_raw = Vec::new();
    let mut second_classes = Vec::new();
    let resfield;
    match place {
        Place::Finite(p) => {
            resfield = FieldDesc::FinitePrime(*p);
            let pb = BigInt::from(*p);
            for class in &q.classes {
                let ClassRep::Int(a) = class.rep() else { unreachable!() };
                let (v, u) = if (a % &pb).is_zero() { (1u32, a / &pb) } else { (0u32, a.clone()) };
                let rc = square_class_fp(*p, &u)?;
                let raw = FElem::Fp(u.mod_floor(&pb));
                if (v + scale_bit) % 2 == 0 {
                    first_raw.push(raw);
                    first_classes.push(rc);
                } else {
                    second_raw.push(raw);
                    second_classes.push(rc);
                }
            }
        }
        Place::Irreducible(pi) => {
            for class in &q.classes {
                let ClassRep::FunQ { c, polys } = class.rep() else { unreachable!() };
                let mut rest = polys.clone();
                let v = if let Some(pos) = rest.iter().position(|f| f == pi) {
                    rest.remove(pos);
                    1u32
                } else {
                    0u32
                };
                let (raw, rc) = residue_entry(pi, c, &rest)?;
                if (v + scale_bit) % 2 == 0 {
                    first_raw.push(raw);
                    first_classes.push(rc);
                } else {
                    second_raw.push(raw);
                    second_classes.push(rc);
                }
            }
            resfield = if pi.degree() == Some(1) {
                FieldDesc::RatQ
            } else {
                FieldDesc::NumberField(pi.clone())
            };
        }
        Place::Infinity => unreachable!("rejected by check_place_for_form"),
    }
    Ok(ResiduePair {
        first: DiagForm::residue_form(resfield.clone(), first_raw, first_classes),
        second: DiagForm::residue_form(resfield, second_raw, second_classes),
        scaling,
    })
}

/// Residue of the unit c * prod f_i at the place pi, as an exact value and
/// its square class.
fn residue_entry(
    pi: &QPoly,
    c: &BigInt,
    polys: &[QPoly],
) -> Result<(FElem, SquareClass), QFormError> {
    if pi.degree() == Some(1) {
        let x0 = -pi.coeff(0);
        let mut val = BigRational::from_integer(c.clone());
        for f in polys {
            val *= f.eval(&x0);
        }
        let rc = square_class_q(&val)?;
        Ok((FElem::Rat(val), rc))
    } else {
        let mut v = QPoly::constant(BigRational::from_integer(c.clone()));
        for f in polys {
            v = v.mul(f);
        }
        let red = v.rem(pi);
        let rc = square_class_nf(pi, &red)?;
        Ok((FElem::Nf(red), rc))
    }
}

/// Outcome of the good-reduction test for Spin(q) at a place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodReduction {
    pub good: bool,
    pub witness: Option<Scaling>,
}

impl GoodReduction {
    pub fn to_json(&self) -> Value {
        json!({
            "good_reduction": self.good,
            "witness": self.witness.map(|s| s.to_string()),
        })
    }
}

/// Good reduction holds when some scaling lambda in {1, pi} makes
/// lambda * q a unit form up to squares at the place: the second residue
/// empty gives lambda = 1, the first residue empty gives lambda = pi.
pub fn spin_good_reduction(q: &DiagForm, place: &Place) -> Result<GoodReduction, QFormError> {
    let r = springer_residues(q, place)?;
    if r.second.is_empty() {
        Ok(GoodReduction { good: true, witness: Some(Scaling::One) })
    } else if r.first.is_empty() {
        Ok(GoodReduction { good: true, witness: Some(Scaling::Pi) })
    } else {
        Ok(GoodReduction { good: false, witness: None })
    }
}

// ---------------------------------------------------------------------------
// Pfister forms
// ---------------------------------------------------------------------------

/// The n-fold Pfister form <<a_1, ..., a_n>> over Q: the tensor product of
/// the binary forms <1, -a_i>, with 2^n diagonal entries.
pub fn pfister_q(slots: &[BigRational]) -> Result<DiagForm, QFormError> {
    assert!(slots.len() <= 16, "Pfister forms of more than 16 slots are not supported");
    if slots.is_empty() {
        return Err(QFormError::EmptyForm);
    }
    if slots.iter().any(|a| a.is_zero()) {
        return Err(QFormError::Sym(SymCalcError::ZeroElement));
    }
    let n = slots.len();
    let mut raw = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut v = BigRational::one();
        for (i, a) in slots.iter().enumerate() {
            if mask & (1 << i) != 0 {
                v *= -a;
            }
        }
        raw.push(FElem::Rat(v));
    }
    DiagForm::new(FieldDesc::RatQ, raw)
}

/// The hyperbolic form of dimension 2 * half_dim over Q.
pub fn hyperbolic_q(half_dim: usize) -> DiagForm {
    assert!(half_dim >= 1, "hyperbolic forms have dimension >= 2");
    let mut raw = Vec::with_capacity(2 * half_dim);
    for _ in 0..half_dim {
        raw.push(FElem::Rat(BigRational::one()));
        raw.push(FElem::Rat(-BigRational::one()));
    }
    DiagForm::new(FieldDesc::RatQ, raw).expect("hyperbolic forms are nondegenerate")
}

// ---------------------------------------------------------------------------
// Local invariants and equivalence
// ---------------------------------------------------------------------------

/// Classical invariants of a form over Q, read at one place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalInvariants {
    pub dim: usize,
    pub disc: SquareClass,
    pub hasse: i32,
    pub signature: Option<(usize, usize)>,
}

impl LocalInvariants {
    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "disc": self.disc.to_string(),
            "hasse": self.hasse,
            "signature": self.signature.map(|(p, n)| vec![p, n]),
        })
    }
}

fn int_reps(q: &DiagForm) -> Result<Vec<BigInt>, QFormError> {
    if q.field != FieldDesc::RatQ {
        return Err(QFormError::BadField(format!(
            "local invariants are computed over Q, not {}",
            q.field
        )));
    }
    Ok(q.classes
        .iter()
        .map(|c| {
            let ClassRep::Int(a) = c.rep() else { unreachable!() };
            a.clone()
        })
        .collect())
}

/// dim, discriminant, Hasse symbol at the place, and the signature at
/// infinity for a form over Q.
pub fn invariants_qp(q: &DiagForm, place: &Place) -> Result<LocalInvariants, QFormError> {
    if matches!(place, Place::Irreducible(_)) {
        return Err(QFormError::BadPlace(
            "local invariants live at places of Q".to_string(),
        ));
    }
    let reps = int_reps(q)?;
    let mut prod = BigInt::one();
    for a in &reps {
        prod *= a;
    }
    let disc = square_class_q(&BigRational::from_integer(prod))?;
    let rats: Vec<BigRational> =
        reps.iter().map(|a| BigRational::from_integer(a.clone())).collect();
    let mut hasse = 1i32;
    for i in 0..rats.len() {
        for j in (i + 1)..rats.len() {
            hasse *= hilbert_symbol(&rats[i], &rats[j], place);
        }
    }
    let signature = if *place == Place::Infinity {
        let pos = reps.iter().filter(|a| a.is_positive()).count();
        Some((pos, reps.len() - pos))
    } else {
        None
    };
    Ok(LocalInvariants { dim: q.dim(), disc, hasse, signature })
}

/// The finite places where equivalence must be inspected: 2 and every odd
/// prime dividing an entry of either form.
fn relevant_places(q1: &DiagForm, q2: &DiagForm) -> Result<Vec<Place>, QFormError> {
    let mut primes: BTreeSet<u64> = BTreeSet::from([2]);
    for q in [q1, q2] {
        for a in int_reps(q)? {
            for (p, _) in factor_bigint(&a)? {
                primes.insert(p.to_u64().expect("factorization only certifies 64-bit primes"));
            }
        }
    }
    let mut places: Vec<Place> = primes.into_iter().map(Place::Finite).collect();
    places.push(Place::Infinity);
    Ok(places)
}

/// Equivalence over Q_p (or over R when the place is infinity).
pub fn equivalent_qp(q1: &DiagForm, q2: &DiagForm, place: &Place) -> Result<bool, QFormError> {
    let i1 = invariants_qp(q1, place)?;
    let i2 = invariants_qp(q2, place)?;
    Ok(i1 == i2)
}

/// Equivalence over Q: equal dimensions, signatures, discriminants, and
/// Hasse symbols at 2, infinity, and every prime in the entry supports.
pub fn equivalent_q(q1: &DiagForm, q2: &DiagForm) -> Result<bool, QFormError> {
    if q1.dim() != q2.dim() {
        return Ok(false);
    }
    for place in relevant_places(q1, q2)? {
        if !equivalent_qp(q1, q2, &place)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the 3-Pfister form <<a, b, c>> over Q is hyperbolic, decided by
/// the degree-3 symbol (a)(b)(c): trivial exactly when not all slots are
/// negative.
pub fn pfister_hyperbolic_q(
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
) -> Result<bool, QFormError> {
    let sym = SymbolSum::symbol(vec![
        square_class_q(a)?,
        square_class_q(b)?,
        square_class_q(c)?,
    ]);
    Ok(class_is_trivial(&sym) == Trilean::True)
}

/// Whether the groups G_2(a,b,c) and G_2(a',b',c') over Q are isomorphic:
/// their octonion norm forms are equivalent. Decided independently through
/// form invariants and through the symbol sign rule; the two routes are
/// asserted to agree.
pub fn g2_isomorphic_q(
    g1: &[BigRational; 3],
    g2: &[BigRational; 3],
) -> Result<bool, QFormError> {
    let by_forms = equivalent_q(&pfister_q(g1)?, &pfister_q(g2)?)?;
    let by_signs = pfister_hyperbolic_q(&g1[0], &g1[1], &g1[2])?
        == pfister_hyperbolic_q(&g2[0], &g2[1], &g2[2])?;
    assert_eq!(
        by_forms, by_signs,
        "3-Pfister classification routes disagree for {g1:?} vs {g2:?}"
    );
    Ok(by_forms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, parse_rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qr(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn form_q(entries: &[i64]) -> DiagForm {
        DiagForm::new_q(entries.iter().map(|&n| qr(n)).collect()).unwrap()
    }

    fn place_x() -> Place {
        Place::Irreducible(parse_poly("x").unwrap())
    }

    #[test]
    fn parsing_and_construction() {
        let q = parse_form_auto("1,1,1,2,x").unwrap();
        assert_eq!(q.field(), &FieldDesc::RatFunQ);
        assert_eq!(q.dim(), 5);
        assert_eq!(q.class_strings(), vec!["1", "1", "1", "2", "(x)"]);

        let q = parse_form_auto("3, 5").unwrap();
        assert_eq!(q.field(), &FieldDesc::RatQ);
        assert_eq!(q.class_strings(), vec!["3", "5"]);
        assert_eq!(q.raw_strings(), vec!["3", "5"]);

        assert!(matches!(
            parse_form_auto("0,1").unwrap_err(),
            QFormError::Sym(SymCalcError::ZeroElement)
        ));
        assert!(parse_form_auto("").is_err());
        let q = parse_form_auto("18,1/2").unwrap();
        assert_eq!(q.class_strings(), vec!["2", "2"]);
    }

    #[test]
    fn diagonalize_examples() {
        let hyp = vec![vec![qr(0), qr(1)], vec![qr(1), qr(0)]];
        let (form, s) = diagonalize_q(&hyp).unwrap();
        assert_eq!(form.dim(), 2);
        assert!(equivalent_q(&form, &form_q(&[1, -1])).unwrap());
        check_congruence(&hyp, &s, &form);

        let (form, _) = diagonalize_q(&[vec![qr(3), qr(0)], vec![qr(0), qr(5)]]).unwrap();
        assert_eq!(form.class_strings(), vec!["3", "5"]);

        assert_eq!(
            diagonalize_q(&[vec![qr(1), qr(1)], vec![qr(1), qr(1)]]).unwrap_err(),
            QFormError::DegenerateForm
        );
        assert!(diagonalize_q(&[vec![qr(0), qr(1)], vec![qr(2), qr(0)]]).is_err());
    }

    fn check_congruence(gram: &[Vec<BigRational>], s: &[Vec<BigRational>], form: &DiagForm) {
        let n = gram.len();
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for t in 0..n {
                    for u in 0..n {
                        acc += &s[t][i] * &gram[t][u] * &s[u][j];
                    }
                }
                if i == j {
                    let FElem::Rat(d) = &form.raw()[i] else { panic!("rational diagonal") };
                    assert_eq!(&acc, d, "diagonal mismatch at {i}");
                } else {
                    assert!(acc.is_zero(), "off-diagonal entry at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn diagonalize_random_congruence() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut done = 0;
        while done < 60 {
            let n = rng.gen_range(2..=4);
            let mut gram = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = qr(rng.gen_range(-6..=6));
                    gram[i][j] = v.clone();
                    gram[j][i] = v;
                }
            }
            match diagonalize_q(&gram) {
                Ok((form, s)) => {
                    check_congruence(&gram, &s, &form);
                    done += 1;
                }
                Err(QFormError::DegenerateForm) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn diagonalize_over_qx() {
        let x = RatFun::from_poly(parse_poly("x").unwrap());
        let one = RatFun::constant(BigRational::one());
        let gram = vec![vec![x.clone(), one.clone()], vec![one, x]];
        let (form, _) = diagonalize_qx(&gram).unwrap();
        assert_eq!(form.class_strings(), vec!["(x)", "(x - 1) * (x) * (x + 1)"]);
    }

    #[test]
    fn springer_residue_examples() {
        let q = parse_form_auto("1,1,1,2,x").unwrap();
        let r = springer_residues(&q, &place_x()).unwrap();
        assert_eq!(r.first.class_strings(), vec!["1", "1", "1", "2"]);
        assert_eq!(r.second.class_strings(), vec!["1"]);
        assert_eq!(r.first.field(), &FieldDesc::RatQ);
        assert_eq!(r.scaling, Scaling::One);

        let q = form_q(&[3, 5, 7]);
        let r = springer_residues(&q, &Place::Finite(11)).unwrap();
        assert_eq!(r.first.raw_strings(), vec!["3", "5", "7"]);
        assert_eq!(r.first.class_strings(), vec!["1", "1", "2"]);
        assert!(r.second.is_empty());

        let q = form_q(&[5, 125]);
        let r = springer_residues(&q, &Place::Finite(5)).unwrap();
        assert!(r.first.is_empty());
        assert_eq!(r.second.class_strings(), vec!["1", "1"]);

        assert!(matches!(
            springer_residues(&form_q(&[3, 5]), &Place::Finite(2)).unwrap_err(),
            QFormError::Sym(SymCalcError::ResidueCharTwo)
        ));
        assert!(springer_residues(&form_q(&[3, 5]), &Place::Infinity).is_err());
        assert!(
            springer_residues(&q, &Place::Irreducible(parse_poly("x").unwrap())).is_err(),
            "Q(x) places reject forms over Q"
        );
    }

    #[test]
    fn residues_into_number_fields() {
        let q = parse_form_auto("x^2+1,x,3").unwrap();
        let pi = parse_poly("x^2 + 1").unwrap();
        let r = springer_residues(&q, &Place::Irreducible(pi.clone())).unwrap();
        assert_eq!(r.first.field(), &FieldDesc::NumberField(pi));
        assert_eq!(r.first.dim(), 2);
        assert_eq!(r.second.dim(), 1);
        assert_eq!(r.second.class_strings(), vec!["1"]);
        assert_eq!(r.first.class_strings(), vec!["x", "3"]);
    }

    #[test]
    fn good_reduction_examples() {
        let q = parse_form_auto("1,1,1,2,x").unwrap();
        let g = spin_good_reduction(&q, &place_x()).unwrap();
        assert_eq!(g, GoodReduction { good: false, witness: None });

        let g = spin_good_reduction(&form_q(&[3, 5, 7]), &Place::Finite(11)).unwrap();
        assert_eq!(g, GoodReduction { good: true, witness: Some(Scaling::One) });

        let g = spin_good_reduction(&form_q(&[5, 5, 5]), &Place::Finite(5)).unwrap();
        assert_eq!(g, GoodReduction { good: true, witness: Some(Scaling::Pi) });
    }

    #[test]
    fn residue_dims_and_scaling_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..200 {
            let dim = rng.gen_range(1..=6);
            let entries: Vec<i64> = (0..dim)
                .map(|_| loop {
                    let v = rng.gen_range(-50..=50);
                    if v != 0 {
                        break v;
                    }
                })
                .collect();
            let q = form_q(&entries);
            let p = *[3u64, 5, 7, 11, 13].get(rng.gen_range(0..5)).unwrap();
            let place = Place::Finite(p);
            let r1 = springer_residues_scaled(&q, &place, Scaling::One).unwrap();
            let r2 = springer_residues_scaled(&q, &place, Scaling::Pi).unwrap();
            assert_eq!(r1.first.dim() + r1.second.dim(), q.dim());
            assert_eq!(r2.first.dim() + r2.second.dim(), q.dim());
            assert_eq!(r1.first.class_strings(), r2.second.class_strings());
            assert_eq!(r1.second.class_strings(), r2.first.class_strings());
        }
    }

    #[test]
    fn good_reduction_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(321);
        for _ in 0..50 {
            let dim = rng.gen_range(1..=5);
            let entries: Vec<i64> = (0..dim)
                .map(|_| loop {
                    let v = rng.gen_range(-30..=30);
                    if v != 0 {
                        break v;
                    }
                })
                .collect();
            let q = form_q(&entries);
            let p = *[3u64, 5, 7].get(rng.gen_range(0..3)).unwrap();
            let place = Place::Finite(p);
            let base = spin_good_reduction(&q, &place).unwrap();
            // Scaling by a square or a unit changes nothing.
            let unit = loop {
                let v = rng.gen_range(-20i64..=20);
                if v != 0 && v % (p as i64) != 0 {
                    break v;
                }
            };
            let squared = q.scaled(&FElem::Rat(qr(unit * unit))).unwrap();
            assert_eq!(spin_good_reduction(&squared, &place).unwrap(), base);
            let scaled = q.scaled(&FElem::Rat(qr(unit))).unwrap();
            assert_eq!(spin_good_reduction(&scaled, &place).unwrap().good, base.good);
            // Scaling by pi preserves goodness and flips the witness.
            let by_pi = q.scaled(&FElem::Rat(qr(p as i64))).unwrap();
            let flipped = spin_good_reduction(&by_pi, &place).unwrap();
            assert_eq!(flipped.good, base.good);
            match (base.witness, flipped.witness) {
                (Some(Scaling::One), Some(Scaling::Pi))
                | (Some(Scaling::Pi), Some(Scaling::One))
                | (None, None) => {}
                other => panic!("witness did not flip: {other:?}"),
            }
        }
    }

    #[test]
    fn pfister_forms() {
        let oct = pfister_q(&[qr(-1), qr(-1), qr(-1)]).unwrap();
        assert_eq!(oct.dim(), 8);
        assert!(oct.class_strings().iter().all(|s| s == "1"));

        let p1 = pfister_q(&[qr(7)]).unwrap();
        assert_eq!(p1.class_strings(), vec!["1", "-7"]);

        let split = pfister_q(&[qr(1), qr(2), qr(3)]).unwrap();
        assert!(equivalent_q(&split, &hyperbolic_q(4)).unwrap());
    }

    #[test]
    fn local_invariants() {
        let hyp = form_q(&[1, -1]);
        for place in [Place::Finite(2), Place::Finite(3), Place::Infinity] {
            let inv = invariants_qp(&hyp, &place).unwrap();
            assert_eq!(inv.disc.to_string(), "-1");
            assert_eq!(inv.hasse, 1);
        }
        let inv = invariants_qp(&form_q(&[1, 1]), &Place::Infinity).unwrap();
        assert_eq!(inv.signature, Some((2, 0)));
        let inv = invariants_qp(&form_q(&[2, 3]), &Place::Finite(3)).unwrap();
        assert_eq!(inv.hasse, -1);
    }

    #[test]
    fn equivalence_over_q() {
        assert!(equivalent_q(&form_q(&[1, -1]), &form_q(&[2, -2])).unwrap());
        let oct = pfister_q(&[qr(-1), qr(-1), qr(-1)]).unwrap();
        assert!(!equivalent_q(&oct, &hyperbolic_q(4)).unwrap());
        assert!(equivalent_q(&form_q(&[3, 5, 7]), &form_q(&[7, 3, 5])).unwrap());
        assert!(equivalent_q(&form_q(&[3, 5]), &form_q(&[12, 45])).unwrap());
        assert!(!equivalent_q(&form_q(&[1, 1]), &form_q(&[-1, -1])).unwrap());
        assert!(equivalent_q(&form_q(&[1, 1]), &form_q(&[2, 2])).unwrap());
        assert!(!equivalent_q(&form_q(&[2, 3]), &form_q(&[1, 6])).unwrap());
        assert!(!equivalent_q(&form_q(&[1, 1]), &form_q(&[1, 1, 1])).unwrap());
    }

    #[test]
    fn equivalence_relation_properties() {
        let forms = [
            form_q(&[1, -1]),
            form_q(&[2, -2]),
            form_q(&[1, 1]),
            form_q(&[3, 5]),
            form_q(&[5, 3]),
            form_q(&[2, 3]),
        ];
        for a in &forms {
            assert!(equivalent_q(a, a).unwrap());
            for b in &forms {
                assert_eq!(equivalent_q(a, b).unwrap(), equivalent_q(b, a).unwrap());
                for c in &forms {
                    if equivalent_q(a, b).unwrap() && equivalent_q(b, c).unwrap() {
                        assert!(equivalent_q(a, c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn pfister_hyperbolic_matches_sign_rule() {
        assert!(!pfister_hyperbolic_q(&qr(-1), &qr(-1), &qr(-1)).unwrap());
        assert!(pfister_hyperbolic_q(&qr(1), &qr(-1), &qr(-1)).unwrap());
        assert!(pfister_hyperbolic_q(&qr(2), &qr(-1), &qr(-1)).unwrap());
        let vals = [qr(-1), qr(1), qr(-2), qr(2)];
        for a in &vals {
            for b in &vals {
                for c in &vals {
                    let by_sign = pfister_hyperbolic_q(a, b, c).unwrap();
                    let by_forms = equivalent_q(
                        &pfister_q(&[a.clone(), b.clone(), c.clone()]).unwrap(),
                        &hyperbolic_q(4),
                    )
                    .unwrap();
                    assert_eq!(by_sign, by_forms, "disagreement at ({a}, {b}, {c})");
                }
            }
        }
    }

    #[test]
    fn g2_isomorphism() {
        let g = |a: i64, b: i64, c: i64| [qr(a), qr(b), qr(c)];
        assert!(g2_isomorphic_q(&g(-1, -1, -1), &g(-1, -1, -3)).unwrap());
        assert!(!g2_isomorphic_q(&g(-1, -1, -1), &g(1, 1, 1)).unwrap());
        assert!(g2_isomorphic_q(&g(2, -3, 5), &g(2, -3, 5)).unwrap());
        assert!(g2_isomorphic_q(&g(1, -1, -1), &g(7, 11, -13)).unwrap());
    }

    #[test]
    fn json_shapes() {
        let q = parse_form_auto("1,1,1,2,x").unwrap();
        let v = q.to_json();
        assert_eq!(v["dim"], 5);
        assert_eq!(v["entries"][4], "(x)");
        let g = spin_good_reduction(&q, &place_x()).unwrap().to_json();
        assert_eq!(g["good_reduction"], false);
        assert_eq!(g["witness"], Value::Null);
        let r = springer_residues(&q, &place_x()).unwrap().to_json();
        assert_eq!(r["scaling"], "1");
        assert_eq!(r["first"]["dim"], 4);
        assert_eq!(r["second"]["classes"][0], "1");

        let inv = invariants_qp(&form_q(&[2, 3]), &Place::Finite(3)).unwrap().to_json();
        assert_eq!(inv["hasse"], -1);
        assert_eq!(inv["signature"], Value::Null);

        let rat = parse_rational("4/9").unwrap();
        assert_eq!(FElem::Rat(rat).to_string(), "4/9");
    }
}
