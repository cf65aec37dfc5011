//! Irreducible reduced root systems with exact Bourbaki data.
//!
//! A [`RootSystem`] carries the simple roots of the Bourbaki realization as
//! integer vectors, a rational Gram matrix normalized so long roots have
//! squared length 2, the Cartan matrix in the convention
//! `C[i][j] = <alpha_j, alpha_i^vee> = 2(alpha_i, alpha_j)/(alpha_i, alpha_i)`,
//! and the simple reflections as integer matrices on the weight lattice
//! `P = Z^rank` (the weight basis is the canonical coordinate system: the
//! fundamental weight `omega_i` is the standard basis vector `e_i`, and the
//! simple root `alpha_i` is the `i`-th column of the Cartan matrix).

use crate::mat::{cokernel_invariants, det_bareiss, smith, Mat};
use crate::IntMat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::{HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

/// Simple Lie type letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeLabel::A => "A",
            TypeLabel::B => "B",
            TypeLabel::C => "C",
            TypeLabel::D => "D",
            TypeLabel::E => "E",
            TypeLabel::F => "F",
            TypeLabel::G => "G",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootSysError {
    #[error("invalid irreducible type {0}{1}")]
    InvalidType(String, isize),
}

/// Irreducible reduced root system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystem {
    type_label: TypeLabel,
    rank: usize,
    /// Simple roots as integer vectors of the (possibly rescaled) Bourbaki
    /// realization.
    simple_roots: Vec<Vec<BigInt>>,
    /// Rational inner products `(alpha_i, alpha_j)`, long roots squared 2.
    gram: Mat<BigRational>,
    cartan: IntMat,
    /// Simple reflections on the weight lattice: `s_i = I - c_i e_i^T` with
    /// `c_i` the `i`-th Cartan column.
    reflections_weight_basis: Vec<IntMat>,
}

/// Finite abelian group as its ascending chain of invariant factors `>= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FinAbGroup {
    invariant_factors: Vec<u64>,
}

impl FinAbGroup {
    pub fn trivial() -> Self {
        FinAbGroup { invariant_factors: Vec::new() }
    }

    /// Builds the canonical form from any list of factors: ones are dropped,
    /// the divisibility chain is rebuilt if needed.
    pub fn from_factors(mut factors: Vec<u64>) -> Self {
        assert!(factors.iter().all(|&f| f != 0), "infinite factor in FinAbGroup");
        factors.retain(|&f| f > 1);
        factors.sort_unstable();
        let chain_ok = factors.windows(2).all(|w| w[1] % w[0] == 0);
        if !chain_ok {
            // Re-canonicalize via the Smith normal form of the diagonal.
            let n = factors.len();
            let diag = Mat::from_fn(n, n, |i, j| {
                if i == j {
                    BigInt::from(factors[i])
                } else {
                    BigInt::zero()
                }
            });
            let (torsion, _) = cokernel_invariants(&diag);
            factors = torsion.iter().map(|d| d.to_u64().expect("factor exceeds u64")).collect();
        }
        FinAbGroup { invariant_factors: factors }
    }

    pub(crate) fn from_bigint_factors(factors: &[BigInt]) -> Self {
        FinAbGroup::from_factors(
            factors.iter().map(|d| d.to_u64().expect("invariant factor exceeds u64")).collect(),
        )
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        f.write_str(&parts.join(" x "))
    }
}

/// Builds the root system of the given type, with Bourbaki numbering of the
/// simple roots.
pub fn build_root_system(type_label: TypeLabel, rank: usize) -> Result<RootSystem, RootSysError> {
    let valid = match type_label {
        TypeLabel::A => rank >= 1,
        TypeLabel::B | TypeLabel::C => rank >= 2,
        TypeLabel::D => rank >= 3,
        TypeLabel::E => (6..=8).contains(&rank),
        TypeLabel::F => rank == 4,
        TypeLabel::G => rank == 2,
    };
    if !valid {
        return Err(RootSysError::InvalidType(type_label.to_string(), rank as isize));
    }
    let (vectors, scale) = bourbaki_realization(type_label, rank);
    Ok(RootSystem::from_realization(type_label, rank, vectors, scale))
}

/// Simple roots of the Bourbaki realization as integer vectors, plus the
/// rational scale `c` making the inner product `c * (standard dot)` give long
/// roots squared length 2.
fn bourbaki_realization(t: TypeLabel, rank: usize) -> (Vec<Vec<i64>>, BigRational) {
    let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let e = |dim: usize, entries: &[(usize, i64)]| -> Vec<i64> {
        let mut v = vec![0i64; dim];
        for &(i, c) in entries {
            v[i] = c;
        }
        v
    };
    match t {
        TypeLabel::A => {
            let dim = rank + 1;
            let roots = (0..rank).map(|i| e(dim, &[(i, 1), (i + 1, -1)])).collect();
            (roots, rat(1, 1))
        }
        TypeLabel::B => {
            let mut roots: Vec<Vec<i64>> =
                (0..rank - 1).map(|i| e(rank, &[(i, 1), (i + 1, -1)])).collect();
            roots.push(e(rank, &[(rank - 1, 1)]));
            (roots, rat(1, 1))
        }
        TypeLabel::C => {
            let mut roots: Vec<Vec<i64>> =
                (0..rank - 1).map(|i| e(rank, &[(i, 1), (i + 1, -1)])).collect();
            roots.push(e(rank, &[(rank - 1, 2)]));
            (roots, rat(1, 2))
        }
        TypeLabel::D => {
            let mut roots: Vec<Vec<i64>> =
                (0..rank - 1).map(|i| e(rank, &[(i, 1), (i + 1, -1)])).collect();
            roots.push(e(rank, &[(rank - 2, 1), (rank - 1, 1)]));
            (roots, rat(1, 1))
        }
        TypeLabel::E => {
            // Doubled coordinates keep alpha_1 integral; the scale 1/4
            // restores squared length 2.
            let mut roots = Vec::with_capacity(rank);
            roots.push(vec![1, -1, -1, -1, -1, -1, -1, 1]);
            roots.push(e(8, &[(0, 2), (1, 2)]));
            for i in 2..rank {
                roots.push(e(8, &[(i - 2, -2), (i - 1, 2)]));
            }
            (roots, rat(1, 4))
        }
        TypeLabel::F => {
            let roots = vec![
                e(4, &[(1, 2), (2, -2)]),
                e(4, &[(2, 2), (3, -2)]),
                e(4, &[(3, 2)]),
                vec![1, -1, -1, -1],
            ];
            (roots, rat(1, 4))
        }
        TypeLabel::G => {
            let roots = vec![e(3, &[(0, 1), (1, -1)]), e(3, &[(0, -2), (1, 1), (2, 1)])];
            (roots, rat(1, 3))
        }
    }
}

impl RootSystem {
    fn from_realization(
        type_label: TypeLabel,
        rank: usize,
        vectors: Vec<Vec<i64>>,
        scale: BigRational,
    ) -> RootSystem {
        let simple_roots: Vec<Vec<BigInt>> =
            vectors.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let rs = Self::from_integer_roots(type_label, rank, simple_roots, scale);
        debug_assert!(rs.check_invariants());
        rs
    }

    fn from_integer_roots(
        type_label: TypeLabel,
        rank: usize,
        simple_roots: Vec<Vec<BigInt>>,
        scale: BigRational,
    ) -> RootSystem {
        let dot = |a: &[BigInt], b: &[BigInt]| -> BigInt {
            a.iter().zip(b).map(|(x, y)| x * y).sum()
        };
        let gram = Mat::from_fn(rank, rank, |i, j| {
            BigRational::from_integer(dot(&simple_roots[i], &simple_roots[j])) * scale.clone()
        });
        let cartan = Mat::from_fn(rank, rank, |i, j| {
            let v = BigRational::from_integer(BigInt::from(2)) * gram[(i, j)].clone()
                / gram[(i, i)].clone();
            assert!(v.is_integer(), "non-integral Cartan entry");
            v.to_integer()
        });
        let reflections_weight_basis = (0..rank)
            .map(|i| {
                Mat::from_fn(rank, rank, |r, c| {
                    let id = if r == c { BigInt::one() } else { BigInt::zero() };
                    if c == i {
                        id - cartan[(r, i)].clone()
                    } else {
                        id
                    }
                })
            })
            .collect();
        RootSystem { type_label, rank, simple_roots, gram, cartan, reflections_weight_basis }
    }

    fn check_invariants(&self) -> bool {
        let n = self.rank;
        let two = BigInt::from(2);
        for i in 0..n {
            assert_eq!(self.cartan[(i, i)], two, "Cartan diagonal");
            for j in 0..n {
                if i != j {
                    assert!(!self.cartan[(i, j)].is_positive(), "Cartan off-diagonal sign");
                    assert_eq!(
                        self.cartan[(i, j)].is_zero(),
                        self.cartan[(j, i)].is_zero(),
                        "Cartan zero symmetry"
                    );
                }
            }
        }
        let id: IntMat = Mat::identity(n);
        for s in &self.reflections_weight_basis {
            assert_eq!(s.mul(s), id, "reflection does not square to identity");
        }
        true
    }

    pub fn type_label(&self) -> TypeLabel {
        self.type_label
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn simple_roots(&self) -> &[Vec<BigInt>] {
        &self.simple_roots
    }

    pub fn gram(&self) -> &Mat<BigRational> {
        &self.gram
    }

    pub fn cartan(&self) -> &IntMat {
        &self.cartan
    }

    pub fn reflections_weight_basis(&self) -> &[IntMat] {
        &self.reflections_weight_basis
    }

    /// Simple root `alpha_i` in weight coordinates (`i`-th Cartan column).
    pub fn simple_root_weight_coords(&self, i: usize) -> Vec<BigInt> {
        self.cartan.col(i)
    }

    /// Coxeter order `m_ij` of `s_i s_j`, from `C[i][j] * C[j][i]`.
    pub fn coxeter_order(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 1;
        }
        let prod = (self.cartan[(i, j)].clone() * self.cartan[(j, i)].clone())
            .to_u64()
            .expect("Coxeter product out of range");
        match prod {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            other => unreachable!("invalid Cartan product {other}"),
        }
    }

    /// Combined label such as `"F4"`.
    pub fn label(&self) -> String {
        format!("{}{}", self.type_label, self.rank)
    }
}

impl Serialize for RootSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let cartan: Vec<Vec<i64>> = (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| self.cartan[(i, j)].to_i64().expect("Cartan entry out of i64"))
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("RootSystem", 3)?;
        s.serialize_field("type", &self.label())?;
        s.serialize_field("rank", &self.rank)?;
        s.serialize_field("cartan", &cartan)?;
        s.end()
    }
}

/// Parses a spec string like `"A4"`, `"f4"`, `"E8"` (case-insensitive).
pub fn parse_type(spec: &str) -> Result<RootSystem, RootSysError> {
    let spec = spec.trim();
    let err = || RootSysError::InvalidType(spec.to_string(), 0);
    let mut chars = spec.chars();
    let letter = chars.next().ok_or_else(err)?;
    let label = match letter.to_ascii_uppercase() {
        'A' => TypeLabel::A,
        'B' => TypeLabel::B,
        'C' => TypeLabel::C,
        'D' => TypeLabel::D,
        'E' => TypeLabel::E,
        'F' => TypeLabel::F,
        'G' => TypeLabel::G,
        _ => return Err(err()),
    };
    let rank: usize = chars.as_str().parse().map_err(|_| err())?;
    build_root_system(label, rank)
}

/// All roots, in weight coordinates, as the closure of the simple roots under
/// the simple reflections. Deterministic breadth-first order.
pub fn all_roots(rs: &RootSystem) -> Vec<Vec<BigInt>> {
    let mut seen: Vec<Vec<BigInt>> = Vec::new();
    let mut queue: VecDeque<Vec<BigInt>> = VecDeque::new();
    for i in 0..rs.rank() {
        let alpha = rs.simple_root_weight_coords(i);
        if !seen.contains(&alpha) {
            seen.push(alpha.clone());
            queue.push_back(alpha);
        }
    }
    while let Some(v) = queue.pop_front() {
        for s in rs.reflections_weight_basis() {
            let w = s.mul_vec(&v);
            if !seen.contains(&w) {
                seen.push(w.clone());
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Order of the Weyl group, by the classical closed forms.
pub fn weyl_order(rs: &RootSystem) -> u64 {
    let l = rs.rank() as u64;
    let fact = |n: u64| (1..=n).product::<u64>();
    match rs.type_label() {
        TypeLabel::A => fact(l + 1),
        TypeLabel::B | TypeLabel::C => (1u64 << l) * fact(l),
        TypeLabel::D => (1u64 << (l - 1)) * fact(l),
        TypeLabel::E => match l {
            6 => 51_840,
            7 => 2_903_040,
            8 => 696_729_600,
            _ => unreachable!(),
        },
        TypeLabel::F => 1_152,
        TypeLabel::G => 12,
    }
}

/// Explicitly enumerates the Weyl group as weight-basis matrices, breadth
/// first from the identity. Returns `None` when the group exceeds `bound`.
pub fn enumerate_weyl(rs: &RootSystem, bound: usize) -> Option<Vec<IntMat>> {
    let n = rs.rank();
    let id: IntMat = Mat::identity(n);
    let key = |m: &IntMat| -> Vec<BigInt> {
        let mut k = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                k.push(m[(i, j)].clone());
            }
        }
        k
    };
    let mut index: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut elements = vec![id.clone()];
    index.insert(key(&id), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        for s in rs.reflections_weight_basis() {
            let w = s.mul(&elements[t].clone());
            let k = key(&w);
            if !index.contains_key(&k) {
                if elements.len() >= bound {
                    return None;
                }
                index.insert(k, elements.len());
                elements.push(w);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    Some(elements)
}

/// The dual root system. The type label swaps `B <-> C`; the result inherits
/// the input's numbering, so its Cartan matrix is exactly the transpose of
/// the input's. For the self-dual non-simply-laced types (`F4`, `G2`) this
/// reverses the Bourbaki order of the simple roots.
pub fn dual_root_system(rs: &RootSystem) -> RootSystem {
    let label = match rs.type_label() {
        TypeLabel::B => TypeLabel::C,
        TypeLabel::C => TypeLabel::B,
        other => other,
    };
    // Coroot alpha^vee = 2 alpha / (alpha, alpha); the multiplier 2/(a,a) is
    // 1, 2 or 3 for our normalizations, so coroots stay integral.
    let two = BigRational::from_integer(BigInt::from(2));
    let coroots: Vec<Vec<BigInt>> = (0..rs.rank())
        .map(|i| {
            let m = two.clone() / rs.gram()[(i, i)].clone();
            assert!(m.is_integer(), "non-integral coroot multiplier");
            let m = m.to_integer();
            rs.simple_roots()[i].iter().map(|x| x * &m).collect()
        })
        .collect();
    // Rescale the inner product so the longest coroot has squared length 2.
    let dot = |a: &[BigInt], b: &[BigInt]| -> BigInt { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let base_scale = {
        let g = rs.gram();
        // (alpha_i^vee, alpha_j^vee) under the original product equals
        // m_i m_j (alpha_i, alpha_j); recover the ambient scale c from any
        // diagonal entry of the original gram.
        let d0 = dot(&rs.simple_roots()[0], &rs.simple_roots()[0]);
        g[(0, 0)].clone() / BigRational::from_integer(d0)
    };
    let max_len = (0..rs.rank())
        .map(|i| base_scale.clone() * BigRational::from_integer(dot(&coroots[i], &coroots[i])))
        .max()
        .expect("nonempty root system");
    let scale = base_scale * two / max_len;
    RootSystem::from_integer_roots(label, rs.rank(), coroots, scale)
}

/// The fundamental group `P(Phi)/Q(Phi)`: the cokernel of the Cartan matrix.
pub fn fundamental_group(rs: &RootSystem) -> FinAbGroup {
    let (torsion, free) = cokernel_invariants(rs.cartan());
    assert_eq!(free, 0, "Cartan matrix is singular");
    FinAbGroup::from_bigint_factors(&torsion)
}

/// `|det(cartan)|`, the order of `P/Q`.
pub fn cartan_det(rs: &RootSystem) -> u64 {
    det_bareiss(rs.cartan()).abs().to_u64().expect("determinant exceeds u64")
}

/// One intermediate lattice `Q < M < P` (both inclusions strict) in weight
/// coordinates, when one exists, i.e. when `|P/Q|` is composite. Every such
/// lattice is automatically Weyl-invariant because `W` acts trivially on
/// `P/Q`.
pub fn intermediate_lattice_basis(rs: &RootSystem) -> Option<IntMat> {
    let s = smith(rs.cartan());
    let diag = s.diagonal();
    let nontrivial = diag.iter().filter(|d| **d > BigInt::one()).count();
    // The chain is ascending, so the last entry is the largest factor.
    let j = rs.rank() - 1;
    let d = diag[j].to_u64().expect("factor exceeds u64");
    let smallest_prime = |n: u64| (2..=n).find(|p| n % p == 0).unwrap_or(n);
    let gen_mult = if nontrivial >= 2 {
        // Adjoining a full generator of the largest cyclic summand leaves
        // the other summands out, so both inclusions stay strict.
        BigInt::one()
    } else if nontrivial == 1 && smallest_prime(d) < d {
        // Cyclic of composite order d: adjoin an element of prime order p.
        BigInt::from(d / smallest_prime(d))
    } else {
        return None;
    };
    // A generator of the Z/d_j summand of P/Q is the j-th column of U^{-1}.
    let uinv = crate::mat::invert_unimodular(&s.u);
    let gen: Vec<BigInt> =
        (0..rs.rank()).map(|i| uinv[(i, j)].clone() * gen_mult.clone()).collect();
    let aug = rs.cartan().hcat(&Mat::from_col(&gen));
    Some(crate::mat::column_lattice_basis(&aug))
}
