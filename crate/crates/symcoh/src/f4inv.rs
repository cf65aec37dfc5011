//! The mod-2 cohomological invariants f3 and f5 of groups of type F4 with
//! trivial mod-3 invariant, computed from Albert-algebra slots or from
//! admissible-torus data; unramifiedness tests, good-reduction witnesses,
//! and the genus-comparison procedure over Q(x).
//!
//! Everything here lives in the stratum where (f3, f5) is a complete
//! invariant, so comparison verdicts are always "within the g3 = 0
//! stratum"; the mod-3 invariant is out of scope.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

use crate::symcalc::{
    class_equal_qx_places, class_is_trivial, square_class_fp, square_class_from_str,
    square_class_q, tame_residue, ClassRep, FieldDesc, Place, SquareClass, SymCalcError,
    SymbolSum, Trilean,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum F4Error {
    #[error("invalid field for this operation: {0}")]
    BadField(String),
    #[error("invalid place for this operation: {0}")]
    BadPlace(String),
    #[error("inconsistent invariants: f3 is trivial but f5 is not")]
    InconsistentInvariants,
    #[error(transparent)]
    Sym(#[from] SymCalcError),
}

// ---------------------------------------------------------------------------
// Input data
// ---------------------------------------------------------------------------

/// Slots of an Albert-algebra presentation: octonion slots a, b, c and the
/// extra slots d, e, all nonzero, kept as canonical square classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlbertData {
    pub a: SquareClass,
    pub b: SquareClass,
    pub c: SquareClass,
    pub d: SquareClass,
    pub e: SquareClass,
}

impl AlbertData {
    pub fn parse(field: &FieldDesc, slots: [&str; 5]) -> Result<Self, F4Error> {
        let cls = |s| square_class_from_str(field, s).map_err(F4Error::from);
        Ok(AlbertData {
            a: cls(slots[0])?,
            b: cls(slots[1])?,
            c: cls(slots[2])?,
            d: cls(slots[3])?,
            e: cls(slots[4])?,
        })
    }
}

/// Admissible-torus data: the quadratic extension slot a and the four
/// constants c1..c4, all nonzero, kept as canonical square classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusData {
    pub a: SquareClass,
    pub c: [SquareClass; 4],
}

impl TorusData {
    pub fn parse(field: &FieldDesc, a: &str, c: [&str; 4]) -> Result<Self, F4Error> {
        let cls = |s| square_class_from_str(field, s).map_err(F4Error::from);
        Ok(TorusData {
            a: cls(a)?,
            c: [cls(c[0])?, cls(c[1])?, cls(c[2])?, cls(c[3])?],
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "a": self.a.to_string(),
            "c": self.c.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// The invariants
// ---------------------------------------------------------------------------

/// The pair (f3, f5) of mod-2 invariants. f5 is always a multiple of f3,
/// so f3 trivial forces f5 trivial; construction enforces this on the
/// decidable fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F4Invariants {
    f3: SymbolSum,
    f5: SymbolSum,
}

impl F4Invariants {
    /// Assembles invariants from raw sums, validating degrees, fields, and
    /// the consistency requirement on the decidable fragment.
    pub fn from_parts(f3: SymbolSum, f5: SymbolSum) -> Result<Self, F4Error> {
        if f3.degree() != 3 || f5.degree() != 5 {
            return Err(F4Error::BadField(format!(
                "f3 must have degree 3 and f5 degree 5, got {} and {}",
                f3.degree(),
                f5.degree()
            )));
        }
        if f3.field() != f5.field() {
            return Err(F4Error::BadField(
                "f3 and f5 must live over the same field".to_string(),
            ));
        }
        if class_is_trivial(&f3) == Trilean::True && class_is_trivial(&f5) == Trilean::False {
            return Err(F4Error::InconsistentInvariants);
        }
        Ok(F4Invariants { f3, f5 })
    }

    pub fn f3(&self) -> &SymbolSum {
        &self.f3
    }

    pub fn f5(&self) -> &SymbolSum {
        &self.f5
    }

    pub fn field(&self) -> &FieldDesc {
        self.f3.field()
    }

    pub fn to_json(&self) -> Value {
        json!({"f3": self.f3.to_json(), "f5": self.f5.to_json()})
    }

    pub fn from_json(v: &Value) -> Result<Self, F4Error> {
        let f3 = SymbolSum::from_json(
            v.get("f3").ok_or_else(|| F4Error::Sym(SymCalcError::Parse("missing f3".into())))?,
        )?;
        let f5 = SymbolSum::from_json(
            v.get("f5").ok_or_else(|| F4Error::Sym(SymCalcError::Parse("missing f5".into())))?,
        )?;
        F4Invariants::from_parts(f3, f5)
    }
}

/// Extends every term of a sum by the given extra slots (cup product with
/// the symbol of the extras).
fn cup_extend(base: &SymbolSum, extra: &[SquareClass]) -> SymbolSum {
    let mut out = SymbolSum::zero(base.field().clone(), base.degree() + extra.len());
    for t in base.terms() {
        let mut term = t.clone();
        term.extend(extra.iter().cloned());
        out.add_term(term);
    }
    out
}

/// Every term of `ext` must be a sorted slot-extension of a term of `base`.
fn is_slot_extension(base: &SymbolSum, ext: &SymbolSum, extra: &[SquareClass]) -> bool {
    ext.terms().iter().all(|t| {
        base.terms().iter().any(|b| {
            let mut full = b.clone();
            full.extend(extra.iter().cloned());
            full.sort();
            *t == full
        })
    })
}

/// f3 = (a)(b)(c), f5 = (a)(b)(c)(d)(e).
pub fn invariants_from_albert(data: &AlbertData) -> F4Invariants {
    let f3 = SymbolSum::symbol(vec![data.a.clone(), data.b.clone(), data.c.clone()]);
    let extra = [data.d.clone(), data.e.clone()];
    let f5 = cup_extend(&f3, &extra);
    assert!(is_slot_extension(&f3, &f5, &extra), "f5 must extend f3's terms");
    F4Invariants::from_parts(f3, f5).expect("cup products preserve triviality")
}

/// f3 = (a)(c1)(c2), f5 = (a)(c1)(c2)(c3)(c4).
pub fn invariants_from_torus(data: &TorusData) -> F4Invariants {
    let f3 = SymbolSum::symbol(vec![data.a.clone(), data.c[0].clone(), data.c[1].clone()]);
    let extra = [data.c[2].clone(), data.c[3].clone()];
    let f5 = cup_extend(&f3, &extra);
    assert!(is_slot_extension(&f3, &f5, &extra), "f5 must extend f3's terms");
    F4Invariants::from_parts(f3, f5).expect("cup products preserve triviality")
}

// ---------------------------------------------------------------------------
// Unramifiedness and good reduction
// ---------------------------------------------------------------------------

/// Per-invariant unramifiedness verdicts at one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnramifiedReport {
    pub f3: Trilean,
    pub f5: Trilean,
}

impl UnramifiedReport {
    pub fn to_json(&self) -> Value {
        json!({"f3": self.f3.to_string(), "f5": self.f5.to_string()})
    }
}

/// Whether f3 and f5 are unramified at the place: the tame residue of each
/// is taken and tested for triviality.
pub fn unramified_at(inv: &F4Invariants, place: &Place) -> Result<UnramifiedReport, F4Error> {
    let r3 = tame_residue(place, &inv.f3)?;
    let r5 = tame_residue(place, &inv.f5)?;
    Ok(UnramifiedReport { f3: class_is_trivial(&r3), f5: class_is_trivial(&r5) })
}

/// Outcome of the torus good-reduction criterion at a place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusReduction {
    pub good: bool,
    pub reason: Option<String>,
    pub reduced: Option<TorusData>,
}

impl TorusReduction {
    pub fn to_json(&self) -> Value {
        json!({
            "good": self.good,
            "reason": self.reason,
            "reduced": self.reduced.as_ref().map(TorusData::to_json),
        })
    }
}

enum UnitResidue {
    Unit(SquareClass),
    NonUnit,
}

/// Residue class of a canonical square class at a degree-1-residue place,
/// or NonUnit when the uniformizer divides it.
fn unit_residue(class: &SquareClass, place: &Place) -> Result<UnitResidue, F4Error> {
    match (class.rep(), place) {
        (ClassRep::Int(a), Place::Finite(p)) => {
            if *p == 2 {
                return Err(F4Error::Sym(SymCalcError::ResidueCharTwo));
            }
            let pb = BigInt::from(*p);
            if (a % &pb) == BigInt::from(0) {
                Ok(UnitResidue::NonUnit)
            } else {
                Ok(UnitResidue::Unit(square_class_fp(*p, a)?))
            }
        }
        (ClassRep::FunQ { c, polys }, Place::Irreducible(pi)) => {
            if pi.degree() != Some(1) {
                return Err(F4Error::BadPlace(format!(
                    "good reduction is tested at places with degree-1 residue, not {pi}"
                )));
            }
            if polys.contains(pi) {
                return Ok(UnitResidue::NonUnit);
            }
            let x0 = -pi.coeff(0);
            let mut val = BigRational::from_integer(c.clone());
            for f in polys {
                val *= f.eval(&x0);
            }
            Ok(UnitResidue::Unit(square_class_q(&val)?))
        }
        (_, place) => Err(F4Error::BadPlace(format!(
            "torus slots over {} have no reduction at the place {place}",
            class.field()
        ))),
    }
}

/// The good-reduction criterion for an admissible torus: the quadratic
/// extension k(sqrt(a)) must be unramified (even valuation of a) and every
/// constant a unit. On success the reduced torus data over the residue
/// field is returned; on failure the blocking slot is named.
pub fn good_reduction_witness(t: &TorusData, place: &Place) -> Result<TorusReduction, F4Error> {
    let bad = |reason: String| TorusReduction { good: false, reason: Some(reason), reduced: None };
    let a_res = match unit_residue(&t.a, place)? {
        UnitResidue::Unit(r) => r,
        UnitResidue::NonUnit => {
            return Ok(bad(format!(
                "a = {} has odd valuation at {place}: the quadratic extension ramifies",
                t.a
            )))
        }
    };
    let mut c_res = Vec::with_capacity(4);
    for (i, ci) in t.c.iter().enumerate() {
        match unit_residue(ci, place)? {
            UnitResidue::Unit(r) => c_res.push(r),
            UnitResidue::NonUnit => {
                return Ok(bad(format!("c{} = {} is not a unit at {place}", i + 1, ci)))
            }
        }
    }
    let reduced = TorusData {
        a: a_res,
        c: [c_res[0].clone(), c_res[1].clone(), c_res[2].clone(), c_res[3].clone()],
    };
    Ok(TorusReduction { good: true, reason: None, reduced: Some(reduced) })
}

// ---------------------------------------------------------------------------
// Splitness and the genus comparison
// ---------------------------------------------------------------------------

/// Splitness and isotropy of a group with the given invariants over Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIsotropy {
    pub split: bool,
    pub isotropic: bool,
}

impl SplitIsotropy {
    pub fn to_json(&self) -> Value {
        json!({"split": self.split, "isotropic": self.isotropic})
    }
}

/// Over Q both invariants are decidable: the group is split iff f3
/// vanishes and isotropic iff f5 vanishes.
pub fn split_and_isotropy_q(inv: &F4Invariants) -> Result<SplitIsotropy, F4Error> {
    if inv.field() != &FieldDesc::RatQ {
        return Err(F4Error::BadField(format!(
            "splitness is decided over Q, not {}",
            inv.field()
        )));
    }
    let split = class_is_trivial(&inv.f3) == Trilean::True;
    let isotropic = class_is_trivial(&inv.f5) == Trilean::True;
    assert!(!split || isotropic, "f3 trivial must force f5 trivial");
    Ok(SplitIsotropy { split, isotropic })
}

/// Result of comparing two invariant pairs over Q(x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusComparison {
    pub f3: Trilean,
    pub f5: Trilean,
    pub equal: bool,
    pub undecided_at: Vec<Place>,
}

impl GenusComparison {
    pub fn to_json(&self) -> Value {
        json!({
            "equal": self.equal,
            "f3_equal": self.f3.to_string(),
            "f5_equal": self.f5.to_string(),
            "undecided_at": self
                .undecided_at
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>(),
            "stratum": "g3 = 0",
        })
    }
}

impl fmt::Display for GenusComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "equal: {} (f3: {}, f5: {}) within the g3 = 0 stratum",
            self.equal, self.f3, self.f5
        )?;
        if !self.undecided_at.is_empty() {
            let places: Vec<String> =
                self.undecided_at.iter().map(|p| p.to_string()).collect();
            write!(f, "; undecided at {}", places.join(", "))?;
        }
        Ok(())
    }
}

/// Compares (f3, f5) pairs over Q(x) through the Faddeev sequence: residue
/// comparison at every ramified place plus one specialization. `equal` is
/// claimed only when both comparisons decide to true; places whose residue
/// verdict stayed undecided are listed.
pub fn genus_compare_qx(
    inv1: &F4Invariants,
    inv2: &F4Invariants,
) -> Result<GenusComparison, F4Error> {
    let (t3, u3) = class_equal_qx_places(&inv1.f3, &inv2.f3)?;
    let (t5, u5) = class_equal_qx_places(&inv1.f5, &inv2.f5)?;
    let mut undecided: Vec<Place> = u3
        .into_iter()
        .chain(u5.into_iter())
        .map(Place::Irreducible)
        .collect();
    undecided.sort();
    undecided.dedup();
    Ok(GenusComparison {
        f3: t3,
        f5: t5,
        equal: t3 == Trilean::True && t5 == Trilean::True,
        undecided_at: undecided,
    })
}
