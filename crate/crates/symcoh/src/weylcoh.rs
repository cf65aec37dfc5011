//! First cohomology of Weyl groups on intermediate lattices.
//!
//! For a root system `Phi` and a W-invariant lattice `M` with
//! `Q(Phi) <= M <= P(Phi)`, this module computes `H^1(W(Phi), M)` by three
//! independent routes:
//!
//! 1. [`h1_formula`]: the closed-form route. `Z^1` is freely generated by one
//!    cocycle per simple root, scaled by the minimal `lambda_i` with
//!    `lambda_i * alpha_i` in `M`; the coboundary image is a square integer
//!    matrix `D`, and `H^1` is its cokernel. No group enumeration, so `E8` is
//!    as cheap as `A1`.
//! 2. [`h1_presentation_oracle`]: cocycles as solutions of the integer linear
//!    system imposed by the defining Coxeter relations, quotiented by
//!    coboundaries.
//! 3. [`h1_enumeration_oracle`]: cocycles as functions on the full group,
//!    discovered by breadth-first closure; only for small Weyl groups.
//!
//! The three must agree wherever they are all defined; the test suite and the
//! acceptance suite enforce this.

use crate::mat::{
    self, cokernel_invariants, det_bareiss, kernel_basis, quotient_invariants, solve_integral,
    solve_rational, Mat,
};
use crate::rootsys::{weyl_order, FinAbGroup, RootSystem};
use crate::IntMat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default group-size cap for [`h1_enumeration_oracle`].
pub const DEFAULT_ENUMERATION_BOUND: u64 = 48;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeylCohError {
    #[error("lattice is not between the root lattice and the weight lattice")]
    NotBetweenQAndP,
    #[error("lattice is not Weyl-invariant")]
    NotWInvariant,
    #[error("Weyl group has order {order}, above the enumeration bound {bound}")]
    GroupTooLarge { order: u64, bound: u64 },
    #[error("invalid lattice spec {0:?} (expected \"root\", \"weight\" or \"gen:[[..],..]\")")]
    BadLatticeSpec(String),
}

/// How a lattice is described on the way in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeSpec {
    /// The root lattice `Q(Phi)`.
    Root,
    /// The weight lattice `P(Phi)`.
    Weight,
    /// Explicit generators: columns, in weight coordinates.
    Generators(IntMat),
}

impl FromStr for LatticeSpec {
    type Err = WeylCohError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("root") {
            return Ok(LatticeSpec::Root);
        }
        if t.eq_ignore_ascii_case("weight") {
            return Ok(LatticeSpec::Weight);
        }
        if let Some(body) = t.strip_prefix("gen:") {
            let rows: Vec<Vec<i64>> = serde_json::from_str(body)
                .map_err(|_| WeylCohError::BadLatticeSpec(s.to_string()))?;
            if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
                return Err(WeylCohError::BadLatticeSpec(s.to_string()));
            }
            return Ok(LatticeSpec::Generators(Mat::from_rows_i64(&rows)));
        }
        Err(WeylCohError::BadLatticeSpec(s.to_string()))
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSpec::Root => f.write_str("root"),
            LatticeSpec::Weight => f.write_str("weight"),
            LatticeSpec::Generators(b) => {
                let rows: Vec<Vec<String>> = (0..b.rows())
                    .map(|i| (0..b.cols()).map(|j| b[(i, j)].to_string()).collect())
                    .collect();
                write!(f, "gen:{}", serde_json::to_string(&rows).expect("serialize matrix"))
            }
        }
    }
}

/// W-invariant lattice `M` with `Q <= M <= P`, as a basis matrix whose
/// columns are written in weight coordinates.
#[derive(Clone, Debug)]
pub struct WLattice {
    rs: RootSystem,
    basis: IntMat,
}

impl WLattice {
    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn basis(&self) -> &IntMat {
        &self.basis
    }

    /// Index `[P : M]`.
    pub fn index_in_weight_lattice(&self) -> BigInt {
        det_bareiss(&self.basis).abs()
    }

    /// Simple reflections written in the basis of `M`: `A_i = B^-1 s_i B`.
    /// Integrality is guaranteed by W-invariance, which construction checks.
    pub fn action_matrices(&self) -> Vec<IntMat> {
        self.rs
            .reflections_weight_basis()
            .iter()
            .map(|s| {
                solve_integral(&self.basis, &s.mul(&self.basis))
                    .expect("lattice verified W-invariant at construction")
            })
            .collect()
    }
}

/// Builds and validates a [`WLattice`].
///
/// `M <= P` holds for any integer basis matrix; `Q <= M` and W-invariance are
/// checked by exact solves. (For lattices between `Q` and `P`, W-invariance
/// is automatic because `W` acts trivially on `P/Q`; the check stays because
/// it is cheap and the error type is part of the contract.)
pub fn lattice_from_spec(rs: &RootSystem, spec: &LatticeSpec) -> Result<WLattice, WeylCohError> {
    let n = rs.rank();
    let basis = match spec {
        LatticeSpec::Root => rs.cartan().clone(),
        LatticeSpec::Weight => Mat::identity(n),
        LatticeSpec::Generators(b) => {
            if b.rows() != n || b.cols() != n || det_bareiss(b).is_zero() {
                return Err(WeylCohError::NotBetweenQAndP);
            }
            b.clone()
        }
    };
    if solve_integral(&basis, rs.cartan()).is_none() {
        return Err(WeylCohError::NotBetweenQAndP);
    }
    for s in rs.reflections_weight_basis() {
        if solve_integral(&basis, &s.mul(&basis)).is_none() {
            return Err(WeylCohError::NotWInvariant);
        }
    }
    Ok(WLattice { rs: rs.clone(), basis })
}

/// The minimal positive rational `lambda_i` with `lambda_i * alpha_i` in `M`,
/// i.e. `lambda_i * alpha_i` generates the rank-one lattice `Q alpha_i ∩ M`.
pub fn min_scalar(m: &WLattice, i: usize) -> BigRational {
    let alpha = m.rs.simple_root_weight_coords(i);
    let c = solve_rational(&m.basis, &Mat::from_col(&alpha))
        .expect("simple root lies in M ⊗ Q");
    // c = B^-1 alpha_i. Clear denominators: c = m/L with gcd-content g, then
    // { lambda : lambda c integral } = (L/g) Z.
    let mut l = BigInt::one();
    for k in 0..c.rows() {
        l = l.lcm(c[(k, 0)].denom());
    }
    let mut g = BigInt::zero();
    for k in 0..c.rows() {
        let cleared = (c[(k, 0)].clone() * BigRational::from_integer(l.clone())).to_integer();
        g = g.gcd(&cleared);
    }
    assert!(!g.is_zero(), "simple root is zero");
    BigRational::new(l, g)
}

/// The cocycle data of Lemma-style route 1: the scalars `lambda_i` and the
/// integer coboundary matrix `D` with `D[i][j] = <alpha_i^vee, m_j> / lambda_i`.
#[derive(Clone, Debug)]
pub struct CocycleSpace {
    lambdas: Vec<BigRational>,
    coboundary: IntMat,
}

impl CocycleSpace {
    pub fn new(m: &WLattice) -> CocycleSpace {
        let n = m.rs.rank();
        let lambdas: Vec<BigRational> = (0..n).map(|i| min_scalar(m, i)).collect();
        let one = BigRational::one();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for l in &lambdas {
            assert!(
                *l == one || *l == half,
                "min scalar outside {{1, 1/2}} for a lattice between Q and P"
            );
        }
        // In weight coordinates, <alpha_i^vee, m_j> is the i-th coordinate of
        // the j-th basis column.
        let coboundary = Mat::from_fn(n, n, |i, j| {
            let v = BigRational::from_integer(m.basis[(i, j)].clone()) / lambdas[i].clone();
            assert!(v.is_integer(), "coboundary entry not integral");
            v.to_integer()
        });
        CocycleSpace { lambdas, coboundary }
    }

    pub fn lambdas(&self) -> &[BigRational] {
        &self.lambdas
    }

    pub fn coboundary_matrix(&self) -> &IntMat {
        &self.coboundary
    }
}

/// `H^1(W(Phi), M)` by the closed-form route: the cokernel of the coboundary
/// matrix of [`CocycleSpace`]. Pure linear algebra; works for every type.
pub fn h1_formula(m: &WLattice) -> FinAbGroup {
    let d = CocycleSpace::new(m);
    let (torsion, free) = cokernel_invariants(d.coboundary_matrix());
    assert_eq!(free, 0, "H^1 of a finite group on a lattice is finite");
    FinAbGroup::from_bigint_factors(&torsion)
}

/// `H^1` from the defining Coxeter presentation: one vector unknown per
/// generator, one block of linear constraints per defining relation
/// (`s_i^2 = 1` and the braid relations `(s_i s_j)^{m_ij} = 1`), then the
/// kernel modulo coboundaries.
pub fn h1_presentation_oracle(m: &WLattice) -> FinAbGroup {
    let acts = m.action_matrices();
    let n = m.rs.rank();
    let mut words: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        words.push(vec![i, i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mij = m.rs.coxeter_order(i, j);
            let mut w = Vec::with_capacity(2 * mij);
            for _ in 0..mij {
                w.push(i);
                w.push(j);
            }
            words.push(w);
        }
    }
    let rel = relation_matrix(&acts, &words, n);
    h1_from_relations(&rel, &acts)
}

/// `H^1` by full enumeration of the Weyl group: a cocycle is determined by
/// its values on the generators, and every group element reached twice during
/// the breadth-first closure contributes a consistency constraint. Unlike the
/// presentation oracle this never trusts the Coxeter relations; the group
/// itself generates the constraint set.
pub fn h1_enumeration_oracle(m: &WLattice, bound: u64) -> Result<FinAbGroup, WeylCohError> {
    let order = weyl_order(&m.rs);
    if order > bound {
        return Err(WeylCohError::GroupTooLarge { order, bound });
    }
    let acts = m.action_matrices();
    let n = m.rs.rank();
    let id: IntMat = Mat::identity(n);
    let key = |w: &IntMat| -> Vec<BigInt> {
        let mut k = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                k.push(w[(i, j)].clone());
            }
        }
        k
    };
    // block(i): the n x (n*n_gen) matrix picking out the unknown x_i.
    let block = |i: usize| -> IntMat {
        Mat::from_fn(n, n * n, |r, c| {
            if c == i * n + r {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    };

    let mut elements: Vec<IntMat> = vec![id.clone()];
    let mut exprs: Vec<IntMat> = vec![Mat::zero(n, n * n)];
    let mut index: HashMap<Vec<BigInt>, usize> = HashMap::new();
    index.insert(key(&id), 0);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut constraint_rows: Vec<Vec<BigInt>> = Vec::new();

    while let Some(t) = queue.pop_front() {
        for (i, a) in acts.iter().enumerate() {
            let w = a.mul(&elements[t]);
            let expr = block(i).add(&a.mul(&exprs[t]));
            match index.get(&key(&w)) {
                Some(&idx) => {
                    let diff = exprs[idx].sub(&expr);
                    for r in 0..n {
                        let row: Vec<BigInt> = (0..n * n).map(|c| diff[(r, c)].clone()).collect();
                        if row.iter().any(|x| !x.is_zero()) {
                            constraint_rows.push(row);
                        }
                    }
                }
                None => {
                    assert!((elements.len() as u64) < bound, "enumeration exceeded checked bound");
                    index.insert(key(&w), elements.len());
                    elements.push(w);
                    exprs.push(expr);
                    queue.push_back(elements.len() - 1);
                }
            }
        }
    }
    assert_eq!(elements.len() as u64, order, "closure disagrees with the order formula");
    let rel = Mat::from_rows(constraint_rows, n * n);
    Ok(h1_from_relations(&rel, &acts))
}

/// Constraint matrix of the given relation words: for a word
/// `s_{i_1} ... s_{i_k} = 1` the cocycle identity telescopes to
/// `sum_j (A_{i_1} ... A_{i_{j-1}}) x_{i_j} = 0`.
fn relation_matrix(acts: &[IntMat], words: &[Vec<usize>], n: usize) -> IntMat {
    let r = acts.len();
    let mut rows_out: Vec<Vec<BigInt>> = Vec::new();
    for word in words {
        let mut coeff: Vec<IntMat> = (0..r).map(|_| Mat::zero(n, n)).collect();
        let mut prefix: IntMat = Mat::identity(n);
        for &g in word {
            coeff[g] = coeff[g].add(&prefix);
            prefix = prefix.mul(&acts[g]);
        }
        for k in 0..n {
            let mut row = Vec::with_capacity(r * n);
            for c in &coeff {
                for col in 0..n {
                    row.push(c[(k, col)].clone());
                }
            }
            rows_out.push(row);
        }
    }
    Mat::from_rows(rows_out, r * n)
}

/// Shared quotient step of both oracles: `Z^1` is the saturated integer
/// kernel of the constraint matrix, `B^1` the stacked coboundary columns
/// `(m - A_i m)_i`; the result is the finite quotient.
fn h1_from_relations(rel: &IntMat, acts: &[IntMat]) -> FinAbGroup {
    let n = acts.first().expect("at least one generator").rows();
    let r = acts.len();
    let kernel = kernel_basis(rel);
    let cob = Mat::from_fn(r * n, n, |row, col| {
        let i = row / n;
        let k = row % n;
        let id = if k == col { BigInt::one() } else { BigInt::zero() };
        id - acts[i][(k, col)].clone()
    });
    let torsion = quotient_invariants(&kernel, &cob);
    FinAbGroup::from_bigint_factors(&torsion)
}

/// Smith normal form `U * A * V = D` of an integer matrix, exposed as a
/// triple.
pub fn smith_normal_form(a: &IntMat) -> (IntMat, IntMat, IntMat) {
    let s = mat::smith(a);
    (s.u, s.d, s.v)
}
