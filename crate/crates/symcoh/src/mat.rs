//! Dense exact matrices and the Smith normal form kernel.
//!
//! [`Mat`] is generic over its scalar. Integer-ring scalars (anything
//! satisfying [`Scalar`], e.g. `BigInt` or the machine integers) get the Smith
//! normal form, saturated kernel bases and lattice quotients; field scalars
//! ([`FieldScalar`], e.g. `BigRational`) get Gaussian elimination. The crate
//! root exports the two aliases actually used everywhere, [`crate::IntMat`]
//! and [`crate::RatMat`].
//!
//! All algorithms are exact. The Smith normal form never truncates: with
//! `BigInt` entries there is no overflow to worry about, and the unimodular
//! transforms `U`, `V` are carried along so kernels and cokernels come out of
//! the same decomposition.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};

/// Exact integer-ring scalar: enough structure for Smith normal form.
pub trait Scalar: Integer + Signed + Clone + fmt::Debug {}
impl<T: Integer + Signed + Clone + fmt::Debug> Scalar for T {}

/// Exact field scalar: enough structure for Gaussian elimination.
pub trait FieldScalar: num_traits::Num + Signed + Clone + fmt::Debug {}
impl FieldScalar for BigRational {}

/// Dense row-major matrix over an exact scalar.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hcat: row counts differ");
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// Builds a matrix from equal-length rows. `cols` disambiguates the
    /// zero-row case.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for row in rows {
            assert_eq!(row.len(), cols, "from_rows: ragged row");
            data.extend(row);
        }
        Mat { rows: n, cols, data }
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + Zero> Mat<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn from_col(v: &[T]) -> Self {
        Mat::from_fn(v.len(), 1, |i, _| v[i].clone())
    }
}

impl<T: Clone + Zero + One> Mat<T> {
    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T: Clone + std::ops::Add<Output = T>> Mat<T> {
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shapes differ");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }
}

impl<T: Clone + std::ops::Sub<Output = T>> Mat<T> {
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shapes differ");
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<&T> = (0..self.cols).map(|j| &self.data[i * self.cols + j]).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl<T> Mat<T>
where
    T: Clone + Zero + std::ops::Mul<Output = T> + std::ops::AddAssign,
{
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimensions differ");
        let mut out = Mat::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let term = a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] += term;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    acc += self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }
}

impl Mat<BigInt> {
    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn to_rational(&self) -> Mat<BigRational> {
        self.map(|x| BigRational::from_integer(x.clone()))
    }
}

/// Smith decomposition `U * A * V = D` with `U`, `V` unimodular and `D`
/// diagonal with a divisibility chain `d_1 | d_2 | ...`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition<T = BigInt> {
    pub u: Mat<T>,
    pub d: Mat<T>,
    pub v: Mat<T>,
}

impl<T: Scalar> SmithDecomposition<T> {
    /// Nonnegative diagonal entries of `D` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Smith normal form by exact pivoting.
///
/// The loop invariant is `u * a * v = d` throughout. At step `t` the smallest
/// nonzero entry of the trailing submatrix is moved to the pivot seat and the
/// pivot row and column are reduced; any nonzero remainder strictly shrinks
/// the pivot, so the reduction terminates. Before the step advances, the
/// pivot is forced to divide the whole trailing submatrix, which is what
/// produces the divisibility chain.
pub fn smith<T: Scalar>(a: &Mat<T>) -> SmithDecomposition<T> {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u: Mat<T> = Mat::identity(m);
    let mut v: Mat<T> = Mat::identity(n);

    for t in 0..m.min(n) {
        'pivot: loop {
            let Some((pi, pj)) = min_abs_nonzero(&d, t) else {
                break 'pivot;
            };
            if pi != t {
                swap_rows(&mut d, t, pi);
                swap_rows(&mut u, t, pi);
            }
            if pj != t {
                swap_cols(&mut d, t, pj);
                swap_cols(&mut v, t, pj);
            }

            let mut dirty = false;
            for i in 0..m {
                if i != t && !d[(i, t)].is_zero() {
                    let q = d[(i, t)].div_floor(&d[(t, t)]);
                    row_sub_mul(&mut d, i, t, &q);
                    row_sub_mul(&mut u, i, t, &q);
                    if !d[(i, t)].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in 0..n {
                if j != t && !d[(t, j)].is_zero() {
                    let q = d[(t, j)].div_floor(&d[(t, t)]);
                    col_sub_mul(&mut d, j, t, &q);
                    col_sub_mul(&mut v, j, t, &q);
                    if !d[(t, j)].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue 'pivot;
            }

            for i in t + 1..m {
                for j in t + 1..n {
                    if !d[(i, j)].mod_floor(&d[(t, t)]).is_zero() {
                        row_add(&mut d, t, i);
                        row_add(&mut u, t, i);
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }

        if d[(t, t)].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
    }

    SmithDecomposition { u, d, v }
}

fn min_abs_nonzero<T: Scalar>(d: &Mat<T>, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            if d[(i, j)].is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if d[(bi, bj)].abs() <= d[(i, j)].abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

fn swap_rows<T>(m: &mut Mat<T>, a: usize, b: usize) {
    for j in 0..m.cols {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}

fn swap_cols<T>(m: &mut Mat<T>, a: usize, b: usize) {
    for i in 0..m.rows {
        m.data.swap(i * m.cols + a, i * m.cols + b);
    }
}

/// `row_i -= q * row_t`.
fn row_sub_mul<T: Scalar>(m: &mut Mat<T>, i: usize, t: usize, q: &T) {
    for j in 0..m.cols() {
        let s = m[(t, j)].clone() * q.clone();
        m[(i, j)] = m[(i, j)].clone() - s;
    }
}

/// `col_j -= q * col_t`.
fn col_sub_mul<T: Scalar>(m: &mut Mat<T>, j: usize, t: usize, q: &T) {
    for i in 0..m.rows() {
        let s = m[(i, t)].clone() * q.clone();
        m[(i, j)] = m[(i, j)].clone() - s;
    }
}

/// `row_t += row_i`.
fn row_add<T: Scalar>(m: &mut Mat<T>, t: usize, i: usize) {
    for j in 0..m.cols() {
        let s = m[(i, j)].clone();
        m[(t, j)] = m[(t, j)].clone() + s;
    }
}

fn negate_row<T: Scalar>(m: &mut Mat<T>, i: usize) {
    for j in 0..m.cols() {
        m[(i, j)] = -m[(i, j)].clone();
    }
}

/// Fraction-free determinant (Bareiss). Exact for any integer-ring scalar.
pub fn det_bareiss<T: Scalar>(a: &Mat<T>) -> T {
    assert_eq!(a.rows(), a.cols(), "det of non-square matrix");
    let n = a.rows();
    if n == 0 {
        return T::one();
    }
    let mut m = a.clone();
    let mut sign = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return T::zero();
            };
            swap_rows(&mut m, k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[(k, k)].clone() * m[(i, j)].clone() - m[(i, k)].clone() * m[(k, j)].clone();
                m[(i, j)] = num.div_floor(&prev);
            }
        }
        for i in k + 1..n {
            m[(i, k)] = T::zero();
        }
        prev = m[(k, k)].clone();
    }
    let det = m[(n - 1, n - 1)].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Basis of the integer kernel of `A`, as columns. The basis is saturated
/// (it extends to a basis of the ambient lattice) because it is read off the
/// unimodular `V` of the Smith decomposition.
pub fn kernel_basis(a: &Mat<BigInt>) -> Mat<BigInt> {
    let s = smith(a);
    let (m, n) = (a.rows(), a.cols());
    let cols: Vec<usize> = (0..n).filter(|&j| j >= m || s.d[(j, j)].is_zero()).collect();
    Mat::from_fn(n, cols.len(), |i, k| s.v[(i, cols[k])].clone())
}

/// Invariant factors `>= 2` and the free rank of `Z^m / colspan(A)`.
pub fn cokernel_invariants(a: &Mat<BigInt>) -> (Vec<BigInt>, usize) {
    let s = smith(a);
    let diag = s.diagonal();
    let torsion: Vec<BigInt> = diag.iter().filter(|d| **d >= BigInt::from(2)).cloned().collect();
    let free = a.rows() - diag.iter().filter(|d| !d.is_zero()).count();
    (torsion, free)
}

/// Exact integer solution `X` of `A X = C`, if one exists.
pub fn solve_integral(a: &Mat<BigInt>, c: &Mat<BigInt>) -> Option<Mat<BigInt>> {
    assert_eq!(a.rows(), c.rows(), "solve: row counts differ");
    let s = smith(a);
    let uc = s.u.mul(c);
    let (m, n) = (a.rows(), a.cols());
    let k = c.cols();
    let mut w: Mat<BigInt> = Mat::zero(n, k);
    for i in 0..m {
        let di = if i < n { s.d[(i, i)].clone() } else { BigInt::zero() };
        for j in 0..k {
            let rhs = &uc[(i, j)];
            if di.is_zero() {
                if !rhs.is_zero() {
                    return None;
                }
            } else {
                let (q, r) = rhs.div_mod_floor(&di);
                if !r.is_zero() {
                    return None;
                }
                w[(i, j)] = q;
            }
        }
    }
    Some(s.v.mul(&w))
}

/// Exact rational solution `X` of `A X = C`, if the system is consistent.
pub fn solve_rational(a: &Mat<BigInt>, c: &Mat<BigInt>) -> Option<Mat<BigRational>> {
    assert_eq!(a.rows(), c.rows(), "solve: row counts differ");
    let s = smith(a);
    let uc = s.u.mul(c);
    let (m, n) = (a.rows(), a.cols());
    let k = c.cols();
    let mut w: Mat<BigRational> = Mat::zero(n, k);
    for i in 0..m {
        let di = if i < n { s.d[(i, i)].clone() } else { BigInt::zero() };
        for j in 0..k {
            let rhs = &uc[(i, j)];
            if di.is_zero() {
                if !rhs.is_zero() {
                    return None;
                }
            } else {
                w[(i, j)] = BigRational::new(rhs.clone(), di.clone());
            }
        }
    }
    Some(s.v.to_rational().mul(&w))
}

/// Invariant factors of the finite quotient `Z / B`, where `Z` is the lattice
/// spanned by the columns of `kernel` (a saturated basis) and `B` the
/// sublattice spanned by the columns of `sub`.
///
/// Panics if `sub` is not contained in the span of `kernel` or the quotient
/// is infinite; callers use it only where inclusion is guaranteed.
pub fn quotient_invariants(kernel: &Mat<BigInt>, sub: &Mat<BigInt>) -> Vec<BigInt> {
    let y = solve_integral(kernel, sub)
        .expect("quotient_invariants: subgroup does not lie in the kernel lattice");
    let (torsion, free) = cokernel_invariants(&y);
    assert_eq!(free, 0, "quotient_invariants: quotient has positive rank");
    torsion
}

/// Column-span basis: an `r x r` unimodular-normalized basis of the lattice
/// generated by the columns of `a` (which must have full row rank `r`).
pub fn column_lattice_basis(a: &Mat<BigInt>) -> Mat<BigInt> {
    let s = smith(a);
    let r = a.rows();
    let diag = s.diagonal();
    assert!(
        diag.len() >= r && diag.iter().take(r).all(|d| !d.is_zero()),
        "column_lattice_basis: columns do not have full row rank"
    );
    // colspan(A) = colspan(U^-1 D), and the nonzero part of D is diag(d_i).
    let uinv = invert_unimodular(&s.u);
    Mat::from_fn(r, r, |i, j| uinv[(i, j)].clone() * diag[j].clone())
}

/// Inverse of a unimodular integer matrix, computed exactly.
pub fn invert_unimodular(u: &Mat<BigInt>) -> Mat<BigInt> {
    let n = u.rows();
    assert_eq!(n, u.cols(), "invert_unimodular: not square");
    let sol = solve_integral(u, &Mat::identity(n)).expect("invert_unimodular: matrix is not unimodular");
    sol
}

/// Gaussian elimination over a field: solves `A X = C` exactly, returning
/// `None` when the system is inconsistent. Free variables are set to zero.
pub fn solve_field<T: FieldScalar>(a: &Mat<T>, c: &Mat<T>) -> Option<Mat<T>> {
    assert_eq!(a.rows(), c.rows(), "solve: row counts differ");
    let (m, n) = (a.rows(), a.cols());
    let k = c.cols();
    let mut aug = a.hcat(c);
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m).find(|&i| !aug[(i, col)].is_zero()) else {
            continue;
        };
        swap_rows(&mut aug, row, p);
        let inv = T::one() / aug[(row, col)].clone();
        for j in col..n + k {
            aug[(row, j)] = aug[(row, j)].clone() * inv.clone();
        }
        for i in 0..m {
            if i != row && !aug[(i, col)].is_zero() {
                let f = aug[(i, col)].clone();
                for j in col..n + k {
                    let s = aug[(row, j)].clone() * f.clone();
                    aug[(i, j)] = aug[(i, j)].clone() - s;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    for i in row..m {
        for j in 0..k {
            if !aug[(i, n + j)].is_zero() {
                return None;
            }
        }
    }
    let mut x: Mat<T> = Mat::zero(n, k);
    for (r, &col) in pivot_cols.iter().enumerate() {
        for j in 0..k {
            x[(col, j)] = aug[(r, n + j)].clone();
        }
    }
    Some(x)
}
