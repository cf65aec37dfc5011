//! Exact-arithmetic Weyl-group cohomology and mod-2 symbol calculus.
//!
//! The crate has three layers:
//!
//! - **Lattice linear algebra** ([`mat`]): dense matrices over exact scalars,
//!   Smith normal form with tracked unimodular transforms, saturated kernels,
//!   integral and rational solving. Everything downstream reduces to this.
//! - **Weyl-group cohomology** ([`rootsys`], [`weylcoh`]): irreducible root
//!   systems with Bourbaki data, and `H^1(W(Phi), M)` for any invariant
//!   lattice between the root and weight lattices, computed by a closed-form
//!   route plus two independent oracles.
//! - **Symbol calculus** ([`poly`], [`symcalc`], [`qform`], [`f4inv`]):
//!   canonical square classes, mod-2 symbol sums with tame residues and
//!   Faddeev descent over the rational function field, quaternion
//!   ramification over the rationals, Springer residues and good reduction
//!   for quadratic forms, and the f3/f5 invariants of groups of type F4.
//!
//! All arithmetic is exact (big integers and rationals); nothing is floating
//! point, and every decision procedure either decides or says it cannot.

#![forbid(unsafe_code)]

pub mod f4inv;
pub mod mat;
pub mod poly;
pub mod qform;
pub mod rootsys;
pub mod symcalc;
pub mod weylcoh;

/// Integer matrix used throughout: exact, arbitrary precision.
pub type IntMat = mat::Mat<num_bigint::BigInt>;
/// Rational matrix used for exact solves and Gram data.
pub type RatMat = mat::Mat<num_rational::BigRational>;

pub use f4inv::{AlbertData, F4Invariants, GenusComparison, TorusData};
pub use qform::{DiagForm, GoodReduction, ResiduePair, Scaling};
pub use rootsys::{FinAbGroup, RootSystem};
pub use symcalc::{FieldDesc, Place, QuatAlg, SquareClass, SymbolSum, Trilean};
pub use weylcoh::{CocycleSpace, WLattice};
