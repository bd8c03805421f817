//! Polynomials over `F_p` for word-sized odd primes, their factorization, and
//! counting of `Z_p` roots of integer polynomials.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;

use crate::arith::{inv_mod, is_prime, mul_mod};
use crate::class_polynomial::IntegerPolynomial;
use crate::error::{Error, Result};

/// Seed for equal-degree splitting; fixed so factorizations are reproducible.
pub const SPLIT_SEED: u64 = 0x5EED_CAFE_F00D_0071;

/// Coefficient vectors, lowest degree first, with no trailing zeros; `[]` is zero.
type Coeffs = Vec<u64>;

#[derive(Clone, Copy, Debug)]
struct Field {
    p: u64,
}

impl Field {
    fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    fn inv(self, a: u64) -> u64 {
        inv_mod(a, self.p).expect("inverse of zero")
    }

    fn trim(mut v: Coeffs) -> Coeffs {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn deg(v: &[u64]) -> isize {
        v.len() as isize - 1
    }

    fn poly_sub(self, a: &[u64], b: &[u64]) -> Coeffs {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| self.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        Self::trim(out)
    }

    fn poly_mul(self, a: &[u64], b: &[u64]) -> Coeffs {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        Self::trim(out)
    }

    /// `(q, r)` with `a = q·b + r`, `deg r < deg b`.
    fn divrem(self, a: &[u64], b: &[u64]) -> (Coeffs, Coeffs) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = a.to_vec();
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = self.inv(*b.last().unwrap());
        let mut q = vec![0u64; r.len() - b.len() + 1];
        for k in (0..q.len()).rev() {
            let c = self.mul(r[k + b.len() - 1], lead_inv);
            q[k] = c;
            if c != 0 {
                for (j, &y) in b.iter().enumerate() {
                    r[k + j] = self.sub(r[k + j], self.mul(c, y));
                }
            }
        }
        r.truncate(b.len() - 1);
        (Self::trim(q), Self::trim(r))
    }

    fn rem(self, a: &[u64], b: &[u64]) -> Coeffs {
        self.divrem(a, b).1
    }

    fn monic(self, a: &[u64]) -> Coeffs {
        match a.last() {
            None => Vec::new(),
            Some(&l) => {
                let inv = self.inv(l);
                a.iter().map(|&c| self.mul(c, inv)).collect()
            }
        }
    }

    fn gcd(self, a: &[u64], b: &[u64]) -> Coeffs {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    fn mulmod(self, a: &[u64], b: &[u64], m: &[u64]) -> Coeffs {
        self.rem(&self.poly_mul(a, b), m)
    }

    fn powmod(self, base: &[u64], mut e: u64, m: &[u64]) -> Coeffs {
        let mut acc = self.rem(&[1], m);
        let mut b = self.rem(base, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulmod(&acc, &b, m);
            }
            b = self.mulmod(&b, &b, m);
            e >>= 1;
        }
        acc
    }

    fn derivative(self, a: &[u64]) -> Coeffs {
        let out = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| self.mul(c, i as u64 % self.p))
            .collect();
        Self::trim(out)
    }

    fn is_one(a: &[u64]) -> bool {
        a == [1]
    }

    /// Square-free decomposition of a monic polynomial: `f = ∏ g_i^{e_i}` with the `g_i` square-free and coprime.
    fn squarefree(self, f: &[u64]) -> Vec<(Coeffs, u32)> {
        let mut out = Vec::new();
        if Self::deg(f) < 1 {
            return out;
        }
        let df = self.derivative(f);
        let mut c = self.gcd(f, &df);
        let mut w = self.divrem(f, &c).0;
        let mut i = 1u32;
        while !Self::is_one(&w) {
            let y = self.gcd(&w, &c);
            let fac = self.divrem(&w, &y).0;
            if !Self::is_one(&fac) {
                out.push((fac, i));
            }
            w = y;
            c = self.divrem(&c, &w).0;
            i += 1;
        }
        if !Self::is_one(&c) {
            // c is a p-th power: take the p-th root of each coefficient's exponent
            let p = self.p as usize;
            let root: Coeffs = c.iter().step_by(p).copied().collect();
            for (g, e) in self.squarefree(&root) {
                out.push((g, e * self.p as u32));
            }
        }
        out
    }

    /// Distinct-degree factorization of a monic square-free polynomial.
    fn distinct_degree(self, f: &[u64]) -> Vec<(Coeffs, usize)> {
        let mut out = Vec::new();
        let mut g = f.to_vec();
        let x = vec![0, 1];
        let mut h = self.rem(&x, &g);
        let mut d = 1;
        while Self::deg(&g) >= 2 * d as isize {
            h = self.powmod(&h, self.p, &g);
            let gd = self.gcd(&g, &self.poly_sub(&h, &x));
            if !Self::is_one(&gd) {
                g = self.divrem(&g, &gd).0;
                h = self.rem(&h, &g);
                out.push((gd, d));
            }
            d += 1;
        }
        if Self::deg(&g) > 0 {
            let n = g.len() - 1;
            out.push((g, n));
        }
        out
    }

    /// Splits a monic square-free product of irreducibles of degree `d` (Cantor-Zassenhaus).
    fn equal_degree(self, f: &[u64], d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Coeffs>) {
        let n = f.len() - 1;
        if n == d {
            out.push(f.to_vec());
            return;
        }
        loop {
            let a: Coeffs = Self::trim((0..n).map(|_| rng.gen_range(0..self.p)).collect());
            if Self::deg(&a) < 1 {
                continue;
            }
            // a^{(p^d − 1)/2} = (a^{1 + p + … + p^{d−1}})^{(p − 1)/2}
            let mut u = a.clone();
            let mut norm = a.clone();
            for _ in 1..d {
                u = self.powmod(&u, self.p, f);
                norm = self.mulmod(&norm, &u, f);
            }
            let b = self.powmod(&norm, (self.p - 1) / 2, f);
            let g = self.gcd(f, &self.poly_sub(&b, &[1]));
            if Self::deg(&g) > 0 && g.len() < f.len() {
                let rest = self.divrem(f, &g).0;
                self.equal_degree(&g, d, rng, out);
                self.equal_degree(&rest, d, rng, out);
                return;
            }
        }
    }
}

/// A monic polynomial over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPolynomial {
    p: u64,
    coeffs: Coeffs,
}

fn check_prime(p: u64) -> Result<()> {
    if !(3..1 << 63).contains(&p) || !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime below 2^63")));
    }
    Ok(())
}

impl FpPolynomial {
    /// Builds a monic polynomial from coefficients (lowest first), reduced into `[0, p)`.
    pub fn new(p: u64, coeffs: &[i64]) -> Result<Self> {
        check_prime(p)?;
        let c: Coeffs = Field::trim(coeffs.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect());
        if c.last() != Some(&1) {
            return Err(Error::InvalidInput("polynomial over F_p must be monic".into()));
        }
        Ok(Self { p, coeffs: c })
    }

    fn from_raw(p: u64, coeffs: Coeffs) -> Self {
        debug_assert_eq!(coeffs.last(), Some(&1));
        Self { p, coeffs }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_raw(self.p, Field { p: self.p }.poly_mul(&self.coeffs, &other.coeffs))
    }

    pub fn eval(&self, x: u64) -> u64 {
        let fp = Field { p: self.p };
        self.coeffs.iter().rev().fold(0, |acc, &c| fp.add(fp.mul(acc, x), c))
    }
}

impl fmt::Display for FpPolynomial {
    /// Lower-case `x`, signs folded into `[0, p)`: `x^2 + 3x + 5`, `x + 23`, `x`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = self.coeffs[k];
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (k, 1) => write!(f, "x^{k}")?,
                (k, c) => write!(f, "{c}x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Monic irreducible factors with multiplicities, sorted by `(degree, coefficients)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpFactorization {
    pub p: u64,
    pub factors: Vec<(FpPolynomial, u32)>,
}

impl FpFactorization {
    pub fn product(&self) -> FpPolynomial {
        let mut acc = FpPolynomial::from_raw(self.p, vec![1]);
        for (g, e) in &self.factors {
            for _ in 0..*e {
                acc = acc.mul(g);
            }
        }
        acc
    }

    pub fn max_degree(&self) -> usize {
        self.factors.iter().map(|(g, _)| g.degree()).max().unwrap_or(0)
    }
}

fn residue(c: &Integer, pz: &Integer) -> u64 {
    let mut r = Integer::from(c % pz);
    if r < 0 {
        r += pz;
    }
    r.to_u64().expect("residue below 2^63")
}

/// Coefficientwise reduction of a monic integer polynomial.
pub fn reduce_mod_p(poly: &IntegerPolynomial, p: u64) -> Result<FpPolynomial> {
    check_prime(p)?;
    let pz = Integer::from(p);
    let coeffs: Coeffs = poly
        .coeffs()
        .iter()
        .map(|c| residue(c, &pz))
        .collect();
    Ok(FpPolynomial::from_raw(p, Field::trim(coeffs)))
}

/// Complete factorization into monic irreducibles.
pub fn factor(f: &FpPolynomial) -> FpFactorization {
    let fp = Field { p: f.p };
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut factors: Vec<(FpPolynomial, u32)> = Vec::new();
    for (g, e) in fp.squarefree(&f.coeffs) {
        for (h, d) in fp.distinct_degree(&g) {
            let mut pieces = Vec::new();
            fp.equal_degree(&h, d, &mut rng, &mut pieces);
            for piece in pieces {
                factors.push((FpPolynomial::from_raw(f.p, piece), e));
            }
        }
    }
    factors.sort_by(|a, b| (a.0.degree(), &a.0.coeffs).cmp(&(b.0.degree(), &b.0.coeffs)));
    // the square-free parts are coprime, so equal factors never occur twice
    FpFactorization { p: f.p, factors }
}

/// Roots in `F_p` with multiplicity, ascending.
pub fn linear_root_multiset(f: &FpPolynomial) -> Vec<u64> {
    let mut roots: Vec<u64> = Vec::new();
    for (g, e) in factor(f).factors {
        if g.degree() == 1 {
            let r = (f.p - g.coeffs[0]) % f.p;
            roots.extend(std::iter::repeat_n(r, e as usize));
        }
    }
    roots.sort_unstable();
    roots
}

/// Distinct roots in `F_p` of a nonzero polynomial given by (not necessarily monic) coefficients.
fn distinct_roots(p: u64, coeffs: &[u64]) -> Vec<u64> {
    let fp = Field { p };
    let f = fp.monic(&Field::trim(coeffs.to_vec()));
    if Field::deg(&f) < 1 {
        return Vec::new();
    }
    let x = vec![0, 1];
    let xp = fp.powmod(&x, p, &f);
    let g = fp.gcd(&f, &fp.poly_sub(&xp, &x));
    if Field::deg(&g) < 1 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut pieces = Vec::new();
    fp.equal_degree(&g, 1, &mut rng, &mut pieces);
    let mut roots: Vec<u64> = pieces.iter().map(|l| (p - l[0]) % p).collect();
    roots.sort_unstable();
    roots
}

/// `f(c + p·y)` as a polynomial in `y`.
fn shift_scale(f: &[Integer], c: u64, p: u64) -> Vec<Integer> {
    // Horner in the variable y with x = c + p·y
    let n = f.len();
    let mut out = vec![Integer::new(); n];
    let lin = [Integer::from(c), Integer::from(p)];
    for coef in f.iter().rev() {
        // out = out·(c + p·y) + coef
        let mut next = vec![Integer::new(); n];
        for (k, o) in out.iter().enumerate() {
            if *o == 0 {
                continue;
            }
            next[k] += Integer::from(o * &lin[0]);
            if k + 1 < n {
                next[k + 1] += Integer::from(o * &lin[1]);
            }
        }
        next[0] += coef;
        out = next;
    }
    out
}

fn count_zp_roots(f: Vec<Integer>, p: u64, depth: u32) -> Result<u32> {
    if depth > 4096 {
        return Err(Error::Inconsistent("Z_p root recursion did not terminate".into()));
    }
    let pz = Integer::from(p);
    // remove the content's p-part
    let mut f = f;
    while f.iter().all(|c| c.is_divisible(&pz)) {
        if f.iter().all(|c| *c == 0) {
            return Err(Error::InvalidInput("zero polynomial".into()));
        }
        for c in f.iter_mut() {
            *c /= &pz;
        }
    }
    let red: Vec<u64> = f.iter().map(|c| residue(c, &pz)).collect();
    let fp = Field { p };
    let dred = fp.derivative(&Field::trim(red.clone()));
    let mut total = 0;
    for c in distinct_roots(p, &red) {
        let dv = dred.iter().rev().fold(0, |acc, &x| fp.add(fp.mul(acc, c), x));
        if dv != 0 {
            total += 1;
        } else {
            total += count_zp_roots(shift_scale(&f, c, p), p, depth + 1)?;
        }
    }
    Ok(total)
}

/// For each root `c` of `poly mod p`, the number of roots of `poly` in `Z_p` that reduce to `c`.
///
/// `poly` must be square-free over `Q`. A simple root mod `p` lifts to exactly one
/// `Z_p` root; a repeated root `c` is examined through `f(c + p·y)/p^v`.
pub fn zp_roots_by_residue(poly: &IntegerPolynomial, p: u64) -> Result<BTreeMap<u64, u32>> {
    check_prime(p)?;
    let f = poly.coeffs().to_vec();
    let reduced = reduce_mod_p(poly, p)?;
    let fp = Field { p };
    let dred = fp.derivative(&reduced.coeffs);
    let mut out = BTreeMap::new();
    for c in distinct_roots(p, &reduced.coeffs) {
        let dv = dred.iter().rev().fold(0, |acc, &x| fp.add(fp.mul(acc, c), x));
        let n = if dv != 0 { 1 } else { count_zp_roots(shift_scale(&f, c, p), p, 1)? };
        out.insert(c, n);
    }
    Ok(out)
}
