//! Polynomials over the rationals and the number-theory toolbox.
//!
//! Everything the symbol calculus needs that is not linear algebra lives
//! here: exact polynomial arithmetic ([`QPoly`]), rational functions
//! ([`RatFun`]), squarefree decomposition and rational-root extraction,
//! irreducibility certification (complete for degree up to 3, sound mod-p
//! certificates above that), deterministic integer factorization with an
//! explicit desk-scale bound, primality testing, Legendre symbols, and the
//! expression parser for the CLI grammars.
//!
//! The factorization routines never guess: when an input is out of reach
//! they return [`PolyError::FactorBoundExceeded`] or
//! [`PolyError::IrreducibilityUnverifiable`] instead of an unverified answer.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// Trial-division bound for integer factorization.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;
/// Any cofactor below this after full trial division is necessarily prime.
pub const COFACTOR_PRIME_BOUND: u64 = 1_000_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse {0:?}: {1}")]
    Parse(String, String),
    #[error("integer {0} exceeds the factorization bounds (trial division to 10^6, cofactors to 10^12 or a 64-bit certified prime)")]
    FactorBoundExceeded(BigInt),
    #[error("cannot certify irreducibility of {0} (degree >= 4 and no small-prime certificate found)")]
    IrreducibilityUnverifiable(String),
}

// ---------------------------------------------------------------------------
// Integer arithmetic: primality, factorization, quadratic residues
// ---------------------------------------------------------------------------

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin over the full 64-bit range (the standard
/// twelve-base witness set).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut p = 2;
        while p * p <= n {
            if sieve[p] {
                let mut q = p * p;
                while q <= n {
                    sieve[q] = false;
                    q += p;
                }
            }
            p += 1;
        }
        (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
    })
}

/// Factors `|n|` into primes with exponents, ascending. Trial division by
/// primes up to 10^6; a surviving cofactor is kept when it is provably prime:
/// either the loop stopped because the square of the trial prime exceeded
/// the cofactor, or the cofactor is below 10^12 (exhaustion: its factors all
/// exceed 10^6), or it passes the deterministic 64-bit primality test.
/// Anything else is refused with [`PolyError::FactorBoundExceeded`].
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(BigInt, u32)>, PolyError> {
    assert!(!n.is_zero(), "factor_bigint: zero input");
    let mut rest = n.abs();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    if rest.is_one() {
        return Ok(out);
    }
    // Fast path entirely in machine words when the value fits.
    if let Some(mut m) = rest.to_u128() {
        let mut proven_prime = false;
        for &p in small_primes() {
            let p128 = p as u128;
            if p128 * p128 > m {
                // Any factor of m below p was already removed, so m is prime.
                proven_prime = m > 1;
                break;
            }
            if m % p128 == 0 {
                let mut e = 0u32;
                while m % p128 == 0 {
                    m /= p128;
                    e += 1;
                }
                out.push((BigInt::from(p), e));
            }
        }
        if m > 1 {
            let small_enough = m < COFACTOR_PRIME_BOUND as u128;
            let certified =
                || u64::try_from(m).is_ok_and(|v| is_prime_u64(v));
            if proven_prime || small_enough || certified() {
                out.push((BigInt::from(m), 1));
            } else {
                return Err(PolyError::FactorBoundExceeded(n.clone()));
            }
        }
        return Ok(out);
    }
    // Big slow path: same policy with arbitrary-precision division.
    let mut proven_prime = false;
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if (&pb * &pb) > rest {
            proven_prime = !rest.is_one();
            break;
        }
        if rest.is_multiple_of(&pb) {
            let mut e = 0u32;
            while rest.is_multiple_of(&pb) {
                rest /= &pb;
                e += 1;
            }
            out.push((pb, e));
        }
        if rest.to_u128().is_some() {
            // Dropped into machine range; finish on the fast path.
            let mut sub =
                factor_bigint(&rest).map_err(|_| PolyError::FactorBoundExceeded(n.clone()))?;
            out.append(&mut sub);
            out.sort();
            return Ok(out);
        }
    }
    if !rest.is_one() {
        if proven_prime {
            out.push((rest, 1));
        } else {
            return Err(PolyError::FactorBoundExceeded(n.clone()));
        }
    }
    out.sort();
    Ok(out)
}

/// Legendre symbol `(a | p)` for an odd prime `p`: `1`, `-1`, or `0` when
/// `p` divides `a`.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    debug_assert!(p > 2 && is_prime_u64(p), "legendre: modulus must be an odd prime");
    let r = a.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits u64");
    if r == 0 {
        return 0;
    }
    let e = powmod_u64(r, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Smallest quadratic nonresidue modulo an odd prime.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| legendre(&BigInt::from(n), p) == -1).expect("odd prime has a nonresidue")
}

// ---------------------------------------------------------------------------
// Polynomials over Q
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over the rationals. Coefficients ascending,
/// never with a trailing zero; the zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    pub fn x() -> Self {
        QPoly::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// `x - r`.
    pub fn x_minus(r: &BigRational) -> Self {
        QPoly::from_coeffs(vec![-r.clone(), BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().expect("leading coefficient of zero polynomial")
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading().is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn neg(&self) -> Self {
        QPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = QPoly::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Euclidean division: `self = q * div + r` with `deg r < deg div`.
    pub fn divrem(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let dd = div.degree().unwrap();
        let lead_inv = BigRational::one() / div.leading();
        let mut rem = self.clone();
        let mut q = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.leading() * &lead_inv;
            let shift = rd - dd;
            q[shift] = c.clone();
            // rem -= c * x^shift * div
            let mut coeffs = rem.coeffs;
            for (i, b) in div.coeffs.iter().enumerate() {
                coeffs[shift + i] -= &c * b;
            }
            rem = QPoly::from_coeffs(coeffs);
        }
        (QPoly::from_coeffs(q), rem)
    }

    pub fn rem(&self, div: &Self) -> Self {
        self.divrem(div).1
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Splits off the leading coefficient: `self = lc * monic`.
    pub fn monic(&self) -> (BigRational, QPoly) {
        assert!(!self.is_zero(), "monic part of zero polynomial");
        let lc = self.leading();
        (lc.clone(), self.scale(&(BigRational::one() / lc)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic().1
        }
    }

    /// Clears denominators: returns `(l, F)` with `F = l * self` having
    /// integer coefficients and content 1 is *not* enforced.
    pub fn clear_denominators(&self) -> (BigInt, Vec<BigInt>) {
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(l.clone())).to_integer())
            .collect();
        (l, ints)
    }

    /// Canonical ordering: by degree, then by coefficients from the top.
    /// Used wherever lists of irreducibles must come out sorted.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| {
                for (a, b) in self.coeffs.iter().rev().zip(other.coeffs.iter().rev()) {
                    let o = a.cmp(b);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for QPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({self})")
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
                first = false;
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let unit = mag.is_one() && i > 0;
            if !unit {
                write!(f, "{mag}")?;
            }
            if i > 0 {
                if !unit {
                    f.write_str("*")?;
                }
                if i == 1 {
                    f.write_str("x")?;
                } else {
                    write!(f, "x^{i}")?;
                }
            }
        }
        Ok(())
    }
}

/// Yun's squarefree decomposition of a monic polynomial: returns pairs
/// `(g, m)` with `self = prod g^m`, the `g` monic, squarefree, pairwise
/// coprime, multiplicities ascending.
pub fn squarefree_decomposition(f: &QPoly) -> Vec<(QPoly, u32)> {
    assert!(f.is_monic(), "squarefree decomposition expects a monic input");
    let mut out = Vec::new();
    let d = f.gcd(&f.derivative());
    if d.is_constant() {
        if f.degree() != Some(0) {
            out.push((f.clone(), 1));
        }
        return out;
    }
    let mut b = f.divrem(&d).0;
    let mut c = f.derivative().divrem(&d).0;
    let mut i = 1u32;
    while !b.is_constant() {
        let delta = c.sub(&b.derivative());
        let g = b.gcd(&delta);
        if !g.is_constant() {
            out.push((g.clone(), i));
        }
        b = b.divrem(&g).0;
        c = delta.divrem(&g).0;
        i += 1;
    }
    out
}

/// All rational roots of a monic polynomial, with the root candidates drawn
/// from exact integer factorizations of the cleared constant and leading
/// coefficients. Errors when those factorizations are out of bounds.
pub fn rational_roots(f: &QPoly) -> Result<Vec<BigRational>, PolyError> {
    assert!(!f.is_zero());
    let mut g = f.clone();
    let mut roots = Vec::new();
    // Strip x | g directly.
    while !g.is_constant() && g.coeff(0).is_zero() {
        g = g.divrem(&QPoly::x()).0;
        roots.push(BigRational::zero());
    }
    if g.is_constant() {
        roots.sort();
        return Ok(roots);
    }
    let (_, ints) = g.clear_denominators();
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    debug_assert!(!a0.is_zero());
    let divisors = |n: &BigInt| -> Result<Vec<BigInt>, PolyError> {
        let mut ds = vec![BigInt::one()];
        for (p, e) in factor_bigint(n)? {
            let mut next = Vec::new();
            for d in &ds {
                let mut pe = BigInt::one();
                for _ in 0..=e {
                    next.push(d * &pe);
                    pe *= &p;
                }
            }
            ds = next;
        }
        Ok(ds)
    };
    let num_divs = divisors(&a0)?;
    let den_divs = divisors(&an)?;
    for u in &num_divs {
        for v in &den_divs {
            for sign in [1i64, -1] {
                let cand = BigRational::new(u * BigInt::from(sign), v.clone());
                if g.eval(&cand).is_zero() && !roots.contains(&cand) {
                    // Divide out every copy (the caller may pass non-squarefree input).
                    loop {
                        let (q, r) = g.divrem(&QPoly::x_minus(&cand));
                        if !r.is_zero() {
                            break;
                        }
                        g = q;
                        roots.push(cand.clone());
                    }
                }
            }
        }
    }
    roots.sort();
    Ok(roots)
}

/// Complete factorization of a nonzero rational polynomial into a constant
/// and monic irreducible factors (sorted, with exponents).
///
/// Completeness is honest: rational roots are extracted exactly, leftover
/// factors of degree 2 or 3 are irreducible outright, and anything of degree
/// 4 and up is accepted only with a sound mod-p irreducibility certificate.
pub fn factor_rational(f: &QPoly) -> Result<(BigRational, Vec<(QPoly, u32)>), PolyError> {
    assert!(!f.is_zero(), "factor_rational: zero polynomial");
    let (lc, monic) = f.monic();
    let mut factors: Vec<(QPoly, u32)> = Vec::new();
    for (g, mult) in squarefree_decomposition(&monic) {
        let mut h = g.clone();
        for r in rational_roots(&g)? {
            h = h.divrem(&QPoly::x_minus(&r)).0;
            merge_factor(&mut factors, QPoly::x_minus(&r), mult);
        }
        match h.degree() {
            None | Some(0) => {}
            Some(1) => merge_factor(&mut factors, h, mult),
            Some(2) | Some(3) => {
                // Rootless of degree 2 or 3 over Q: irreducible.
                merge_factor(&mut factors, h, mult);
            }
            Some(_) => {
                if irreducible_by_modp_certificate(&h) {
                    merge_factor(&mut factors, h, mult);
                } else {
                    return Err(PolyError::IrreducibilityUnverifiable(h.to_string()));
                }
            }
        }
    }
    factors.sort_by(|a, b| a.0.cmp_key(&b.0));
    Ok((lc, factors))
}

fn merge_factor(factors: &mut Vec<(QPoly, u32)>, g: QPoly, mult: u32) {
    if let Some(slot) = factors.iter_mut().find(|(p, _)| *p == g) {
        slot.1 += mult;
    } else {
        factors.push((g, mult));
    }
}

/// Verifies irreducibility over Q of a monic rootless polynomial by finding
/// a prime at which the reduction stays the same degree and is irreducible
/// over the prime field (a sound certificate, never a heuristic).
pub fn irreducible_by_modp_certificate(f: &QPoly) -> bool {
    const CERT_PRIMES: [u64; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97,
    ];
    let (l, ints) = f.clear_denominators();
    for p in CERT_PRIMES {
        if (&l % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = FpPoly::from_bigints(&ints, p);
        if fp.degree() == f.degree() && fp_irreducible(&fp) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Polynomials over prime fields (certificates only)
// ---------------------------------------------------------------------------

/// Dense polynomial over `F_p`, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn from_bigints(coeffs: &[BigInt], p: u64) -> Self {
        let pb = BigInt::from(p);
        let cs = coeffs
            .iter()
            .map(|c| c.mod_floor(&pb).to_u64().expect("residue fits u64"))
            .collect();
        FpPoly { p, coeffs: cs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn x(p: u64) -> Self {
        FpPoly { p, coeffs: vec![0, 1] }
    }

    fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let p = self.p;
        FpPoly {
            p,
            coeffs: (0..n).map(|i| (self.coeff(i) + p - other.coeff(i)) % p).collect(),
        }
        .trimmed()
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return FpPoly { p: self.p, coeffs: Vec::new() };
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod_u64(a, b, p)) % p;
            }
        }
        FpPoly { p, coeffs: out }.trimmed()
    }

    fn rem(&self, div: &Self) -> Self {
        assert!(!div.is_zero());
        let p = self.p;
        let dd = div.degree().unwrap();
        let inv = powmod_u64(*div.coeffs.last().unwrap(), p - 2, p);
        let mut rem = self.clone();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = mulmod_u64(*rem.coeffs.last().unwrap(), inv, p);
            let shift = rd - dd;
            for (i, &b) in div.coeffs.iter().enumerate() {
                let t = mulmod_u64(c, b, p);
                rem.coeffs[shift + i] = (rem.coeffs[shift + i] + p - t) % p;
            }
            rem = rem.trimmed();
        }
        rem
    }

    fn derivative(&self) -> Self {
        let p = self.p;
        if self.coeffs.len() <= 1 {
            return FpPoly { p, coeffs: Vec::new() };
        }
        FpPoly {
            p,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mulmod_u64(c, (i as u64) % p, p))
                .collect(),
        }
        .trimmed()
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// `self^e mod f`.
    fn powmod(&self, mut e: u64, f: &Self) -> Self {
        let mut acc = FpPoly { p: self.p, coeffs: vec![1] };
        let mut base = self.rem(f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(f);
            }
            base = base.mul(&base).rem(f);
            e >>= 1;
        }
        acc
    }
}

/// Rabin's irreducibility test over `F_p`, exact: `f` of degree `n` is
/// irreducible iff `x^(p^n) = x (mod f)` and, for every prime `q | n`,
/// `gcd(x^(p^(n/q)) - x, f) = 1`. The Frobenius powers are built by
/// iterating `h -> h^p mod f`.
pub fn fp_irreducible(f: &FpPoly) -> bool {
    let Some(n) = f.degree() else {
        return false;
    };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if f.gcd(&f.derivative()).degree() != Some(0) {
        return false;
    }
    let p = f.p;
    let x = FpPoly::x(p);
    // frob[k] = x^(p^(k+1)) mod f
    let mut frob = Vec::with_capacity(n);
    let mut cur = x.powmod(p, f);
    frob.push(cur.clone());
    for _ in 1..n {
        cur = cur.powmod(p, f);
        frob.push(cur.clone());
    }
    if frob[n - 1] != x.rem(f) {
        return false;
    }
    let mut m = n;
    let mut q = 2;
    let mut prime_divs = Vec::new();
    while q * q <= m {
        if m % q == 0 {
            prime_divs.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        prime_divs.push(m);
    }
    for q in prime_divs {
        let g = frob[n / q - 1].sub(&x.rem(f)).gcd(f);
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// Reduced rational function over Q: coprime numerator and denominator, the
/// denominator monic (the zero function has numerator 0 and denominator 1).
#[derive(Clone, PartialEq, Eq)]
pub struct RatFun {
    num: QPoly,
    den: QPoly,
}

impl RatFun {
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFun { num, den: QPoly::one() };
        }
        let g = num.gcd(&den);
        let num = num.divrem(&g).0;
        let den = den.divrem(&g).0;
        let (lc, den) = den.monic();
        let num = num.scale(&(BigRational::one() / lc));
        RatFun { num, den }
    }

    pub fn from_poly(p: QPoly) -> Self {
        RatFun { num: p, den: QPoly::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        RatFun::from_poly(QPoly::constant(c))
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Returns the underlying polynomial when the denominator is 1.
    pub fn as_poly(&self) -> Option<&QPoly> {
        if self.den == QPoly::one() {
            Some(&self.num)
        } else {
            None
        }
    }

    /// Returns the underlying constant when the function is one.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.as_poly() {
            Some(p) if p.is_constant() => Some(p.coeff(0)),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        RatFun::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by the zero rational function");
        RatFun::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn pow(&self, e: i64) -> Self {
        let mag = self.num.pow(e.unsigned_abs() as u32);
        let den = self.den.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            RatFun::new(mag, den)
        } else {
            RatFun::new(den, mag)
        }
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({self})")
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == QPoly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    X,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, PolyError> {
    let err = |what: &str| PolyError::Parse(s.to_string(), what.to_string());
    let mut toks = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = s[start..i].parse().expect("digits parse");
                toks.push(Tok::Num(n));
            }
            'x' | 'X' => {
                toks.push(Tok::X);
                i += 1;
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            _ => return Err(err(&format!("unexpected character {c:?}"))),
        }
    }
    if toks.is_empty() {
        return Err(err("empty expression"));
    }
    Ok(toks)
}

struct ExprParser<'a> {
    src: &'a str,
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn err(&self, what: &str) -> PolyError {
        PolyError::Parse(self.src.to_string(), what.to_string())
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RatFun, PolyError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFun, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    if rhs.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = acc.div(&rhs);
                }
                // Juxtaposition: "3x", "2(x+1)", "(x-1)(x+1)".
                Some(Tok::Num(_)) | Some(Tok::X) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RatFun, PolyError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let Some(Tok::Num(e)) = self.next() else {
                return Err(self.err("exponent must be a nonnegative integer"));
            };
            let e = e.to_i64().filter(|&e| (0..=64).contains(&e));
            let Some(e) = e else {
                return Err(self.err("exponent out of range (0..=64)"));
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFun, PolyError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(RatFun::constant(BigRational::from_integer(n))),
            Some(Tok::X) => Ok(RatFun::from_poly(QPoly::x())),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(self.err("missing closing parenthesis"));
                }
                Ok(inner)
            }
            other => Err(self.err(&format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression in `x` (constants, `+ - * / ^`, parentheses,
/// juxtaposition) into a rational function.
pub fn parse_ratfun(s: &str) -> Result<RatFun, PolyError> {
    let toks = tokenize(s)?;
    let mut p = ExprParser { src: s, toks: &toks, pos: 0 };
    let v = p.expr()?;
    if p.pos != toks.len() {
        return Err(PolyError::Parse(s.to_string(), "trailing input".to_string()));
    }
    Ok(v)
}

/// Parses a polynomial (an expression whose denominator is constant).
pub fn parse_poly(s: &str) -> Result<QPoly, PolyError> {
    let r = parse_ratfun(s)?;
    match r.den().degree() {
        Some(0) => Ok(r.num().scale(&(BigRational::one() / r.den().coeff(0)))),
        _ => Err(PolyError::Parse(s.to_string(), "not a polynomial".to_string())),
    }
}

/// Parses a rational constant.
pub fn parse_rational(s: &str) -> Result<BigRational, PolyError> {
    let r = parse_ratfun(s)?;
    r.as_constant().ok_or_else(|| PolyError::Parse(s.to_string(), "not a constant".to_string()))
}

/// Parses the factored-product grammar `c * (poly)^e * ...`, preserving the
/// supplied factor structure. Polynomial factors are normalized to monic
/// (leading coefficients fold into the constant); a plain polynomial
/// expression counts as a single factor with exponent 1.
pub fn parse_factored(s: &str) -> Result<(BigRational, Vec<(QPoly, u32)>), PolyError> {
    let toks = tokenize(s)?;
    // A top-level + (or a non-leading -) means this is one polynomial
    // expression, not a product of factors.
    let mut depth = 0i32;
    let mut is_sum = false;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Plus if depth == 0 => is_sum = true,
            Tok::Minus if depth == 0 && i > 0 => is_sum = true,
            _ => {}
        }
    }
    if depth != 0 {
        return Err(PolyError::Parse(s.to_string(), "unbalanced parentheses".to_string()));
    }
    let mut constant = BigRational::one();
    let mut factors: Vec<(QPoly, u32)> = Vec::new();
    let mut push_poly = |p: QPoly, e: u32, constant: &mut BigRational| {
        if p.is_constant() {
            let mut c = BigRational::one();
            for _ in 0..e {
                c *= p.coeff(0);
            }
            *constant *= c;
            return;
        }
        let (lc, monic) = p.monic();
        let mut c = BigRational::one();
        for _ in 0..e {
            c *= &lc;
        }
        *constant *= c;
        if e > 0 {
            factors.push((monic, e));
        }
    };
    if is_sum {
        let p = parse_poly(s)?;
        if p.is_zero() {
            constant = BigRational::zero();
        } else {
            push_poly(p, 1, &mut constant);
        }
        return Ok((constant, factors));
    }
    // Split the token stream at top-level '*'.
    let mut items: Vec<&[Tok]> = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Star if depth == 0 => {
                items.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&toks[start..]);
    for item in items {
        if item.is_empty() {
            return Err(PolyError::Parse(s.to_string(), "empty factor".to_string()));
        }
        // Peel a top-level trailing ^e off a parenthesized or bare-x base.
        let (base, exp) = match item {
            [head @ .., Tok::Caret, Tok::Num(e)] if !head.is_empty() => {
                let well_formed = matches!(head, [Tok::X])
                    || (head.first() == Some(&Tok::LParen) && head.last() == Some(&Tok::RParen));
                if well_formed {
                    let e = e
                        .to_u32()
                        .ok_or_else(|| PolyError::Parse(s.to_string(), "huge exponent".into()))?;
                    (head, e)
                } else {
                    (item, 1)
                }
            }
            _ => (item, 1),
        };
        let mut p = ExprParser { src: s, toks: base, pos: 0 };
        let v = p.expr()?;
        if p.pos != base.len() {
            return Err(PolyError::Parse(s.to_string(), "trailing input in factor".to_string()));
        }
        let Some(poly) = v.as_poly().cloned() else {
            return Err(PolyError::Parse(s.to_string(), "factor is not a polynomial".to_string()));
        };
        if poly.is_zero() {
            constant = BigRational::zero();
            continue;
        }
        push_poly(poly, exp, &mut constant);
    }
    factors.sort_by(|a, b| a.0.cmp_key(&b.0));
    Ok((constant, factors))
}
