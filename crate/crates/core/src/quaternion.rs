//! The quaternion algebra `B = (−p, −q)` with basis `1, α, β, αβ`, Ibukiyama's
//! maximal orders containing `Z[α]`, and the norm forms on `α^⊥`.

use std::fmt;

use rug::{Integer, Rational};

use crate::arith::{gcd, is_prime, kronecker, sqrt_mod_p};
use crate::error::{Error, Result};
use crate::quadratic_orders::ReducedForm;

/// `x0 + x1·α + x2·β + x3·αβ` with `α² = −p`, `β² = −q`, `αβ = −βα`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuaternionElement {
    pub p: i64,
    pub q: i64,
    pub x: [Rational; 4],
}

impl QuaternionElement {
    pub fn new(p: i64, q: i64, x: [Rational; 4]) -> Self {
        Self { p, q, x }
    }

    pub fn from_ints(p: i64, q: i64, x: [i64; 4]) -> Self {
        Self::new(p, q, x.map(Rational::from))
    }

    pub fn one(p: i64, q: i64) -> Self {
        Self::from_ints(p, q, [1, 0, 0, 0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::ContextMismatch(self.p, self.q, other.p, other.q));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let a = Rational::from(-self.p);
        let b = Rational::from(-self.q);
        let ab = Rational::from(&a * &b);
        let [x0, x1, x2, x3] = &self.x;
        let [y0, y1, y2, y3] = &other.x;
        let m = |u: &Rational, v: &Rational| Rational::from(u * v);
        let z0 = m(x0, y0) + m(&a, &m(x1, y1)) + m(&b, &m(x2, y2)) - m(&ab, &m(x3, y3));
        let z1 = m(x0, y1) + m(x1, y0) - m(&b, &m(x2, y3)) + m(&b, &m(x3, y2));
        let z2 = m(x0, y2) + m(x2, y0) + m(&a, &m(x1, y3)) - m(&a, &m(x3, y1));
        let z3 = m(x0, y3) + m(x3, y0) + m(x1, y2) - m(x2, y1);
        Ok(Self::new(self.p, self.q, [z0, z1, z2, z3]))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut x = self.x.clone();
        for (xi, yi) in x.iter_mut().zip(&other.x) {
            *xi += yi;
        }
        Ok(Self::new(self.p, self.q, x))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut x = self.x.clone();
        for (xi, yi) in x.iter_mut().zip(&other.x) {
            *xi -= yi;
        }
        Ok(Self::new(self.p, self.q, x))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.p, self.q, self.x.clone().map(|c| c * k))
    }

    pub fn conj(&self) -> Self {
        let [x0, x1, x2, x3] = self.x.clone();
        Self::new(self.p, self.q, [x0, -x1, -x2, -x3])
    }

    /// Reduced trace `2·x0`.
    pub fn trace(&self) -> Rational {
        Rational::from(&self.x[0] * 2u32)
    }

    /// Reduced norm `x0² + p·x1² + q·x2² + pq·x3²`.
    pub fn norm(&self) -> Rational {
        let [x0, x1, x2, x3] = &self.x;
        let sq = |v: &Rational| Rational::from(v * v);
        sq(x0) + sq(x1) * self.p + sq(x2) * self.q + sq(x3) * (self.p * self.q)
    }

    pub fn is_integral(&self) -> bool {
        *self.trace().denom() == 1 && *self.norm().denom() == 1
    }

    /// The element as a rational scalar, when it is one.
    pub fn as_scalar(&self) -> Option<Rational> {
        (self.x[1] == 0 && self.x[2] == 0 && self.x[3] == 0).then(|| self.x[0].clone())
    }
}

impl fmt::Display for QuaternionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x0, x1, x2, x3] = &self.x;
        write!(f, "{x0} + ({x1})α + ({x2})β + ({x3})αβ")
    }
}

/// A rank 4 lattice in `B` given by a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternionOrder {
    pub p: i64,
    pub q: i64,
    pub basis: [QuaternionElement; 4],
}

impl QuaternionOrder {
    pub fn new(basis: [QuaternionElement; 4]) -> Result<Self> {
        let (p, q) = (basis[0].p, basis[0].q);
        for b in &basis[1..] {
            basis[0].check(b)?;
        }
        Ok(Self { p, q, basis })
    }

    /// `Z⟨1, α, β, αβ⟩`.
    pub fn standard(p: i64, q: i64) -> Self {
        let e = |i: usize| {
            let mut x = [0i64; 4];
            x[i] = 1;
            QuaternionElement::from_ints(p, q, x)
        };
        Self { p, q, basis: [e(0), e(1), e(2), e(3)] }
    }

    /// Inverse of the coordinate matrix (rows are basis vectors).
    fn inverse(&self) -> Result<[[Rational; 4]; 4]> {
        let mut m: Vec<Vec<Rational>> = self.basis.iter().map(|b| b.x.to_vec()).collect();
        let mut inv: Vec<Vec<Rational>> =
            (0..4).map(|i| (0..4).map(|j| Rational::from(u32::from(i == j))).collect()).collect();
        for col in 0..4 {
            let pivot = (col..4).find(|&r| m[r][col] != 0).ok_or(Error::DegenerateLattice)?;
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let pv = m[col][col].clone();
            for j in 0..4 {
                m[col][j] /= &pv;
                inv[col][j] /= &pv;
            }
            for r in 0..4 {
                if r != col && m[r][col] != 0 {
                    let f = m[r][col].clone();
                    for j in 0..4 {
                        let d = Rational::from(&f * &m[col][j]);
                        m[r][j] -= d;
                        let d = Rational::from(&f * &inv[col][j]);
                        inv[r][j] -= d;
                    }
                }
            }
        }
        let mut out: [[Rational; 4]; 4] = Default::default();
        for (i, row) in inv.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                out[i][j] = v;
            }
        }
        Ok(out)
    }

    /// Coordinates of `v` in the basis.
    pub fn coordinates(&self, v: &QuaternionElement) -> Result<[Rational; 4]> {
        let inv = self.inverse()?;
        // v = Σ c_i b_i, i.e. v^T = c^T M, so c^T = v^T M^{-1}
        let mut c: [Rational; 4] = Default::default();
        for (j, cj) in c.iter_mut().enumerate() {
            for i in 0..4 {
                *cj += Rational::from(&v.x[i] * &inv[i][j]);
            }
        }
        Ok(c)
    }

    pub fn contains(&self, v: &QuaternionElement) -> Result<bool> {
        Ok(self.coordinates(v)?.iter().all(|c| *c.denom() == 1))
    }

    /// Gram matrix of the bilinear form `trd(x·ȳ)` on the basis.
    fn trace_gram(&self) -> Result<Vec<Vec<Rational>>> {
        let mut g = vec![vec![Rational::new(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = self.basis[i].multiply(&self.basis[j].conj())?.trace();
            }
        }
        Ok(g)
    }
}

fn det4(m: &[Vec<Rational>]) -> Rational {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::from(1);
    for col in 0..4 {
        let Some(pivot) = (col..4).find(|&r| a[r][col] != 0) else {
            return Rational::new();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..4 {
            let f = Rational::from(&a[r][col] / &a[col][col]);
            for j in col..4 {
                let d = Rational::from(&f * &a[col][j]);
                a[r][j] -= d;
            }
        }
    }
    det
}

/// True iff the lattice contains 1, is closed under multiplication and consists of integral elements.
pub fn is_order(candidate: &QuaternionOrder) -> Result<bool> {
    candidate.inverse()?;
    if !candidate.contains(&QuaternionElement::one(candidate.p, candidate.q))? {
        return Ok(false);
    }
    if !candidate.basis.iter().all(QuaternionElement::is_integral) {
        return Ok(false);
    }
    for x in &candidate.basis {
        for y in &candidate.basis {
            if !candidate.contains(&x.multiply(y)?)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `√|det(trd(b_i·b̄_j))|`.
pub fn reduced_discriminant(order: &QuaternionOrder) -> Result<Integer> {
    let det = det4(&order.trace_gram()?).abs();
    if *det.denom() != 1 {
        return Err(Error::Inconsistent(format!("trace Gram determinant {det} is not an integer")));
    }
    let n = det.numer().clone();
    let (root, rem) = n.clone().sqrt_rem(Integer::new());
    if rem != 0 {
        return Err(Error::Inconsistent(format!("trace Gram determinant {n} is not a square")));
    }
    Ok(root)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// `O(p, q, r, m)` with `r² + p = mq`
    O,
    /// `O′(p, q, r′, m′)` with `r′² + p = 4m′q`
    OPrime,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::O => "O",
            Variant::OPrime => "O'",
        })
    }
}

/// Parameters of an Ibukiyama order; for `O′` the fields `r`, `m` hold `r′`, `m′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IbukiyamaParams {
    pub variant: Variant,
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub m: i64,
}

impl IbukiyamaParams {
    pub fn new(variant: Variant, p: i64, q: i64, r: i64, m: i64) -> Result<Self> {
        let ok = match variant {
            Variant::O => r * r + p == m * q,
            Variant::OPrime => p % 4 == 3 && r * r + p == 4 * m * q,
        };
        if !ok || !is_prime(q as u64) || q % 8 != 3 {
            return Err(Error::InvalidInput(format!("invalid {variant} parameters ({p}, {q}, {r}, {m})")));
        }
        Ok(Self { variant, p, q, r, m })
    }

    /// The binary form `N(yβ + z·δ)` on `α^⊥ = Zβ + Zδ`: `(q, 2r, m)` for `O`, `(q, r′, m′)` for `O′`.
    pub fn perp_form(&self) -> (i64, i64, i64) {
        match self.variant {
            Variant::O => (self.q, 2 * self.r, self.m),
            Variant::OPrime => (self.q, self.r, self.m),
        }
    }
}

impl fmt::Display for IbukiyamaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{},{},{})", self.variant, self.p, self.q, self.r, self.m)
    }
}

/// Search ceiling for `q`.
const Q_LIMIT: i64 = 1_000_000;

/// Admissible `q`: primes `q ≡ 3 (mod 8)` with `(−p/q) = 1`, ascending.
pub fn admissible_qs(p: u64) -> impl Iterator<Item = i64> {
    (3..Q_LIMIT)
        .step_by(8)
        .filter(move |&q| q as u64 != p && is_prime(q as u64) && kronecker(-(p as i64), q).unwrap() == 1)
}

/// Smallest `r ≥ 0` with `r² ≡ −p (mod q)` and `8 | r` (variant `O`) or `r` odd
/// and `r² + p ≡ 0 (mod 4q)` (variant `O′`).
fn smallest_r(p: i64, q: i64, variant: Variant) -> Option<i64> {
    let s = sqrt_mod_p(-p, q as u64).ok()?? as i64;
    let (modulus, want) = match variant {
        Variant::O => (8, 0),
        Variant::OPrime => (2, 1),
    };
    [s, (q - s) % q]
        .into_iter()
        .filter_map(|root| (0..modulus).map(|k| root + k * q).find(|r| r % modulus == want))
        .min()
}

/// Params at a given `q`, without the maximality check.
pub fn params_for_q(p: u64, q: i64, variant: Variant) -> Result<IbukiyamaParams> {
    let pi = p as i64;
    let r = smallest_r(pi, q, variant).ok_or(Error::NoParams(p))?;
    let m = match variant {
        Variant::O => (r * r + pi) / q,
        Variant::OPrime => (r * r + pi) / (4 * q),
    };
    IbukiyamaParams::new(variant, pi, q, r, m)
}

fn check_variant(p: u64, variant: Variant) -> Result<()> {
    if p < 5 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("p = {p} must be a prime ≥ 5")));
    }
    if variant == Variant::OPrime && p % 4 != 3 {
        return Err(Error::InvalidInput(format!("O′ is defined only for p ≡ 3 (mod 4), got p = {p}")));
    }
    Ok(())
}

/// The first admissible parameter sets whose order has reduced discriminant `p`.
pub fn certified_params(p: u64, variant: Variant) -> Result<impl Iterator<Item = IbukiyamaParams>> {
    check_variant(p, variant)?;
    Ok(admissible_qs(p).filter_map(move |q| {
        let params = params_for_q(p, q, variant).ok()?;
        let order = ibukiyama_order(&params);
        (is_order(&order).ok()? && reduced_discriminant(&order).ok()? == p).then_some(params)
    }))
}

/// Smallest admissible `q`, then smallest `r` in the normalization above, certified maximal.
pub fn find_params(p: u64, variant: Variant) -> Result<IbukiyamaParams> {
    let params = certified_params(p, variant)?.next().ok_or(Error::NoParams(p))?;
    if variant == Variant::O {
        // with 8 | r: r² + p = mq forces m ≡ pq (mod 8)
        debug_assert_eq!((params.m - params.p * params.q).rem_euclid(8), 0);
    }
    Ok(params)
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// The order with Ibukiyama's basis:
/// `1, α(1+β)/2, (1+β)/2, (r+α)β/q` or `1, (1+α)/2, β, (r′+α)β/(2q)`.
pub fn ibukiyama_order(params: &IbukiyamaParams) -> QuaternionOrder {
    let (p, q, r) = (params.p, params.q, params.r);
    let e = |x: [Rational; 4]| QuaternionElement::new(p, q, x);
    let z = Rational::new;
    let basis = match params.variant {
        Variant::O => [
            e([rat(1, 1), z(), z(), z()]),
            e([z(), rat(1, 2), z(), rat(1, 2)]),
            e([rat(1, 2), z(), rat(1, 2), z()]),
            e([z(), z(), rat(r, q), rat(1, q)]),
        ],
        Variant::OPrime => [
            e([rat(1, 1), z(), z(), z()]),
            e([rat(1, 2), rat(1, 2), z(), z()]),
            e([z(), z(), rat(1, 1), z()]),
            e([z(), z(), rat(r, 2 * q), rat(1, 2 * q)]),
        ],
    };
    QuaternionOrder { p, q, basis }
}

/// `yβ + z·δ` with `δ = (r+α)β/q` (or `(r′+α)β/(2q)`).
pub fn perp_element(y: i64, z: i64, params: &IbukiyamaParams) -> QuaternionElement {
    let (p, q, r) = (params.p, params.q, params.r);
    let d = match params.variant {
        Variant::O => q,
        Variant::OPrime => 2 * q,
    };
    let x2 = Rational::from(y) + rat(z * r, d);
    QuaternionElement::new(p, q, [Rational::new(), Rational::new(), x2, rat(z, d)])
}

/// The square of `yβ + z·δ`: `−y²q − z²m − 2yzr`, or `−y²q − z²m′ − yzr′`.
pub fn perp_square(y: i64, z: i64, params: &IbukiyamaParams) -> i64 {
    let (a, b, c) = params.perp_form();
    -(a * y * y + b * y * z + c * z * z)
}

/// Which optimal embedding a representation must witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Embedding {
    /// `Z[γ]` with `γ² = −D`, and `(1+γ)/2` not in the order
    Whole,
    /// `Z[(1+γ)/2]` with `γ² = −D`
    Half,
}

/// Whether `(1+γ)/2` lies in the order for `γ = yβ + zδ`: on the `O` side exactly when
/// `y` is odd and `z` even; never on the `O′` side.
fn half_in_order(y: i64, z: i64, variant: Variant) -> bool {
    variant == Variant::O && y % 2 != 0 && z % 2 == 0
}

fn search(params: &IbukiyamaParams, d: i64, bound: u64, kind: Embedding) -> Option<(i64, i64)> {
    let (p, q, r) = (params.p, params.q, params.r);
    // O: q·D = p·z² + (q·y + r·z)²; O′: 4q·D = p·z² + (2q·y + r′·z)²
    let (lhs, lead) = match params.variant {
        Variant::O => (q as i128 * d as i128, q as i128),
        Variant::OPrime => (4 * q as i128 * d as i128, 2 * q as i128),
    };
    let zmax = ((lhs / p as i128) as f64).sqrt() as i128 + 1;
    let zmax = zmax.min(bound as i128);
    let mut hits = Vec::new();
    for z in -zmax..=zmax {
        let rest = lhs - p as i128 * z * z;
        if rest < 0 {
            continue;
        }
        let s = Integer::from(rest).sqrt().to_i128().unwrap();
        if s * s != rest {
            continue;
        }
        for t in [s, -s] {
            let num = t - r as i128 * z;
            if num % lead != 0 {
                continue;
            }
            let y = num / lead;
            if y.unsigned_abs() > bound as u128 {
                continue;
            }
            let (y, z) = (y as i64, z as i64);
            if gcd(y.unsigned_abs(), z.unsigned_abs()) != 1 {
                continue;
            }
            let half = half_in_order(y, z, params.variant);
            if (kind == Embedding::Half) == half {
                hits.push((y, z));
            }
        }
    }
    hits.sort_unstable();
    hits.into_iter().next()
}

/// A coprime `(y, z)` with `|y|, |z| ≤ search_bound` and `perp_square(y, z) = −D`, first in
/// lexicographic order, such that `Z[√−D]` is optimally embedded (on the `O` side this
/// forces `z` odd).
pub fn represents_disc(params: &IbukiyamaParams, d: i64, search_bound: u64) -> Result<Option<(i64, i64)>> {
    if d <= 0 {
        return Err(Error::InvalidInput(format!("D must be positive, got {d}")));
    }
    if search_bound == 0 {
        return Err(Error::InvalidInput("search bound must be at least 1".into()));
    }
    Ok(search(params, d, search_bound, Embedding::Whole))
}

/// Optimal embedding of the order of discriminant `disc` into `α^⊥` of the given order.
///
/// For `disc ≡ 0 (mod 4)` this is [`represents_disc`] with `D = −disc/4`; for
/// `disc ≡ 1 (mod 4)` it looks for `γ` with `γ² = disc` and `(1+γ)/2` in the order.
pub fn represents_order_disc(params: &IbukiyamaParams, disc: i64, search_bound: u64) -> Result<Option<(i64, i64)>> {
    if disc >= 0 || disc.rem_euclid(4) > 1 {
        return Err(Error::NotADiscriminant(disc));
    }
    if disc % 4 == 0 {
        represents_disc(params, -disc / 4, search_bound)
    } else {
        Ok(search(params, -disc, search_bound, Embedding::Half))
    }
}

/// Reduces `(a, b, c)` and tracks the basis: returns the reduced form (with `b ≥ 0`)
/// and the coordinates mod 2 of the original first basis vector in the new basis.
fn reduce_tracking(a: i64, b: i64, c: i64) -> ((i64, i64, i64), (i64, i64)) {
    let (mut a, mut b, mut c) = (a, b, c);
    // columns e1, e2 of the new basis in old coordinates
    let (mut e1, mut e2) = ((1i64, 0i64), (0i64, 1i64));
    loop {
        if b.abs() > a {
            let two_a = 2 * a;
            let mut nb = b.rem_euclid(two_a);
            if nb > a {
                nb -= two_a;
            }
            let k = (nb - b) / two_a;
            c += a * k * k + b * k;
            b = nb;
            e2 = (e2.0 + k * e1.0, e2.1 + k * e1.1);
            continue;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            (e1, e2) = (e2, (-e1.0, -e1.1));
            continue;
        }
        break;
    }
    // old (1, 0) = u·e1 + v·e2; solve with the inverse of the unimodular matrix [e1 e2]
    let det = e1.0 * e2.1 - e2.0 * e1.1;
    let u = e2.1 * det;
    let v = -e1.1 * det;
    ((a, b.abs(), c), (u.rem_euclid(2), v.rem_euclid(2)))
}

/// Isometry invariant of `α^⊥` inside the order: its reduced norm form and, on the `O`
/// side, the class mod 2 of the coset of elements `γ` with `(1+γ)/2` in the order.
fn perp_key(params: &IbukiyamaParams) -> ((i64, i64, i64), Option<(i64, i64)>) {
    let (a, b, c) = params.perp_form();
    let (form, coset) = reduce_tracking(a, b, c);
    (form, (params.variant == Variant::O).then_some(coset))
}

/// Parameter sets over the first `q_count` admissible `q`, one per isometry class of
/// `α^⊥` with its half-integral coset. Representability of a CM order in `α^⊥` only
/// depends on that class, so these suffice to test it for every `q` scanned.
pub fn perp_classes(p: u64, variant: Variant, q_count: usize) -> Result<Vec<IbukiyamaParams>> {
    check_variant(p, variant)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for q in admissible_qs(p).take(q_count) {
        let params = params_for_q(p, q, variant)?;
        if seen.insert(perp_key(&params)) {
            out.push(params);
        }
    }
    Ok(out)
}

/// The reduced `α^⊥` norm form, for display.
pub fn perp_reduced_form(params: &IbukiyamaParams) -> ReducedForm {
    let ((a, b, c), _) = {
        let (a, b, c) = params.perp_form();
        reduce_tracking(a, b, c)
    };
    ReducedForm { a, b, c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(x: [i64; 4]) -> QuaternionElement {
        QuaternionElement::from_ints(71, 3, x)
    }

    #[test]
    fn multiplication_relations() {
        let (a, b, ab) = (el([0, 1, 0, 0]), el([0, 0, 1, 0]), el([0, 0, 0, 1]));
        assert_eq!(a.multiply(&b).unwrap(), ab);
        assert_eq!(a.multiply(&a).unwrap(), el([-71, 0, 0, 0]));
        assert_eq!(b.multiply(&a).unwrap(), el([0, 0, 0, -1]));
        assert_eq!(b.multiply(&b).unwrap(), el([-3, 0, 0, 0]));
        assert_eq!(ab.multiply(&ab).unwrap(), el([-213, 0, 0, 0]));
        let other = QuaternionElement::from_ints(59, 3, [1, 0, 0, 0]);
        assert!(matches!(a.multiply(&other), Err(Error::ContextMismatch(..))));
    }

    #[test]
    fn find_params_examples() {
        let o = find_params(71, Variant::O).unwrap();
        assert_eq!((o.q, o.r, o.m), (3, 8, 45));
        let o2 = find_params(71, Variant::OPrime).unwrap();
        assert_eq!((o2.q, o2.r, o2.m), (3, 1, 6));
        assert!(find_params(41, Variant::OPrime).is_err());
    }

    #[test]
    fn ibukiyama_examples() {
        for params in [
            IbukiyamaParams::new(Variant::O, 71, 3, 16, 109).unwrap(),
            IbukiyamaParams::new(Variant::O, 71, 3, 8, 45).unwrap(),
            IbukiyamaParams::new(Variant::O, 71, 3, 1, 24).unwrap(),
            IbukiyamaParams::new(Variant::OPrime, 71, 3, 1, 6).unwrap(),
        ] {
            let order = ibukiyama_order(&params);
            assert!(is_order(&order).unwrap(), "{params}");
            assert_eq!(reduced_discriminant(&order).unwrap(), 71, "{params}");
        }
    }

    #[test]
    fn standard_lattice() {
        let std = QuaternionOrder::standard(71, 3);
        assert!(is_order(&std).unwrap());
        // the trace Gram matrix is diag(2, 2p, 2q, 2pq)
        assert_eq!(reduced_discriminant(&std).unwrap(), 4 * 71 * 3);
        let mut half = QuaternionOrder::standard(71, 3);
        half.basis[1] = half.basis[1].scale(&rat(1, 2));
        assert!(!is_order(&half).unwrap());
        let mut flat = QuaternionOrder::standard(71, 3);
        flat.basis[3] = flat.basis[2].clone();
        assert!(matches!(is_order(&flat), Err(Error::DegenerateLattice)));
    }

    #[test]
    fn alpha_from_basis() {
        for params in [find_params(71, Variant::O).unwrap(), IbukiyamaParams::new(Variant::O, 71, 3, 1, 24).unwrap()] {
            let order = ibukiyama_order(&params);
            let [one, b1, b2, b3] = &order.basis;
            let q = rat(params.q, 1);
            let r = rat(params.r, 1);
            // 2·α(1+β)/2 − q·(r+α)β/q = α − rβ, and rβ = r·(2·(1+β)/2 − 1)
            let lhs = b1.scale(&rat(2, 1)).sub(&b3.scale(&q)).unwrap();
            let beta = b2.scale(&rat(2, 1)).sub(one).unwrap();
            let alpha = lhs.add(&beta.scale(&r)).unwrap();
            assert_eq!(alpha, el([0, 1, 0, 0]));
            assert!(order.contains(&alpha).unwrap());
            // the form with a constant qr in place of rβ is off by r(β − q)
            let literal = lhs.add(&one.scale(&Rational::from(&q * &r))).unwrap();
            assert_ne!(literal, alpha);
            assert!(order.contains(&literal).unwrap());
        }
    }

    #[test]
    fn perp_square_examples() {
        let o = IbukiyamaParams::new(Variant::O, 71, 3, 16, 109).unwrap();
        assert_eq!(perp_square(1, 0, &o), -3);
        assert_eq!(perp_square(0, 1, &o), -109);
        let o2 = IbukiyamaParams::new(Variant::OPrime, 71, 3, 1, 6).unwrap();
        assert_eq!(perp_square(-1, 1, &o2), -8);
    }

    #[test]
    fn represents_examples() {
        let o2 = IbukiyamaParams::new(Variant::OPrime, 71, 3, 1, 6).unwrap();
        assert_eq!(represents_disc(&o2, 8, 10).unwrap(), Some((-1, 1)));
        let o = IbukiyamaParams::new(Variant::O, 71, 3, 16, 109).unwrap();
        assert_eq!(represents_disc(&o, 8, 50).unwrap(), None);
        assert!(represents_disc(&o, 0, 5).is_err());
        // Δ = −32 is Z[√−8]
        assert_eq!(represents_order_disc(&o2, -32, 10).unwrap(), Some((-1, 1)));
    }

    #[test]
    fn represents_matches_brute_force() {
        for params in [
            IbukiyamaParams::new(Variant::OPrime, 71, 3, 1, 6).unwrap(),
            find_params(71, Variant::O).unwrap(),
            find_params(59, Variant::O).unwrap(),
            find_params(41, Variant::O).unwrap(),
        ] {
            for d in 1..400 {
                let brute = (-30i64..=30)
                    .flat_map(|y| (-30i64..=30).map(move |z| (y, z)))
                    .find(|&(y, z)| {
                        gcd(y.unsigned_abs(), z.unsigned_abs()) == 1
                            && perp_square(y, z, &params) == -d
                            && !half_in_order(y, z, params.variant)
                    });
                assert_eq!(represents_disc(&params, d, 30).unwrap(), brute, "{params} D={d}");
            }
        }
    }

    #[test]
    fn maximal_orders_for_survey_primes() {
        for p in [41u64, 59, 71] {
            let variants: &[Variant] = if p % 4 == 3 { &[Variant::O, Variant::OPrime] } else { &[Variant::O] };
            for &v in variants {
                let found: Vec<_> = certified_params(p, v).unwrap().take(3).collect();
                assert_eq!(found.len(), 3);
                let qs: Vec<i64> = admissible_qs(p).take(3).collect();
                assert_eq!(found.iter().map(|x| x.q).collect::<Vec<_>>(), qs, "p={p} {v}");
            }
        }
    }

    #[test]
    fn perp_classes_are_stable() {
        for (p, v) in [(71u64, Variant::O), (71, Variant::OPrime), (59, Variant::O), (59, Variant::OPrime), (41, Variant::O)] {
            let few = perp_classes(p, v, 100).unwrap();
            let many = perp_classes(p, v, 400).unwrap();
            assert_eq!(few, many, "p={p} {v}");
            for params in &few {
                let f = perp_reduced_form(params);
                let disc = if v == Variant::O { -4 * p as i64 } else { -(p as i64) };
                assert_eq!(f.discriminant(), disc);
            }
        }
    }

    #[test]
    fn tracked_reduction_maps_the_coset() {
        // the coset image must reproduce the original values: Q(β-coset) ≡ Q(image) mod 2 structure
        for q in admissible_qs(71).take(50) {
            let params = params_for_q(71, q, Variant::O).unwrap();
            let (a, b, c) = params.perp_form();
            let ((ra, rb, rc), (u, v)) = reduce_tracking(a, b, c);
            assert_eq!(rb * rb - 4 * ra * rc, b * b - 4 * a * c);
            // β has norm q; any vector in its coset mod 2 has norm ≡ q mod 4
            let n = ra * u * u + rb * u * v + rc * v * v;
            assert_eq!((n - q).rem_euclid(4), 0, "q={q}");
        }
    }

    proptest! {
        #[test]
        fn perp_elements_anticommute_with_alpha(y in -50i64..50, z in -50i64..50, idx in 0usize..4) {
            let params = [
                find_params(71, Variant::O).unwrap(),
                find_params(71, Variant::OPrime).unwrap(),
                find_params(41, Variant::O).unwrap(),
                find_params(59, Variant::OPrime).unwrap(),
            ][idx];
            let g = perp_element(y, z, &params);
            let alpha = QuaternionElement::from_ints(params.p, params.q, [0, 1, 0, 0]);
            prop_assert_eq!(g.trace(), Rational::new());
            let ag = alpha.multiply(&g).unwrap();
            let ga = g.multiply(&alpha).unwrap();
            prop_assert_eq!(ag.add(&ga).unwrap(), QuaternionElement::from_ints(params.p, params.q, [0; 4]));
            let sq = g.multiply(&g).unwrap().as_scalar().unwrap();
            prop_assert_eq!(sq, Rational::from(perp_square(y, z, &params)));
            prop_assert!(ibukiyama_order(&params).contains(&g).unwrap());
        }
    }
}
