//! Imaginary quadratic orders and their reduced binary quadratic forms.
//!
//! An order is stored as its fundamental discriminant `Δ_K < 0` together with
//! its conductor `f`; the order discriminant is `Δ = f²·Δ_K`. Where theorem
//! predicates speak of the positive integer `D = |Δ_K|`, [`QuadOrder::field_d`]
//! provides it.

use std::fmt;

use crate::arith::{factorize, gcd, is_squarefree, kronecker, v2};
use crate::error::{Error, Result};

/// An imaginary quadratic order `Z + f·O_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadOrder {
    fundamental_disc: i64,
    conductor: u64,
}

impl QuadOrder {
    pub fn new(fundamental_disc: i64, conductor: u64) -> Result<Self> {
        if conductor == 0 {
            return Err(Error::InvalidInput("conductor must be positive".into()));
        }
        if !is_fundamental(fundamental_disc)? {
            return Err(Error::InvalidInput(format!(
                "{fundamental_disc} is not a fundamental discriminant"
            )));
        }
        Ok(Self { fundamental_disc, conductor })
    }

    pub fn maximal(fundamental_disc: i64) -> Result<Self> {
        Self::new(fundamental_disc, 1)
    }

    /// Splits a discriminant `Δ` into its fundamental part and conductor.
    pub fn from_discriminant(disc: i64) -> Result<Self> {
        check_discriminant(disc)?;
        let mut fund = disc;
        let mut conductor = 1u64;
        for (q, e) in factorize(disc.unsigned_abs()) {
            if q == 2 {
                continue;
            }
            for _ in 0..e / 2 {
                fund /= (q * q) as i64;
                conductor *= q;
            }
        }
        // Δ/4 is still a discriminant iff it is ≡ 0, 1 (mod 4)
        while fund % 4 == 0 && (fund / 4).rem_euclid(4) <= 1 {
            fund /= 4;
            conductor *= 2;
        }
        Self::new(fund, conductor)
    }

    pub fn fundamental_disc(&self) -> i64 {
        self.fundamental_disc
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn discriminant(&self) -> i64 {
        let f = self.conductor as i64;
        f * f * self.fundamental_disc
    }

    /// `D = |Δ_K|`, the positive integer with `disc(K) = -D`.
    pub fn field_d(&self) -> u64 {
        self.fundamental_disc.unsigned_abs()
    }

    pub fn is_maximal(&self) -> bool {
        self.conductor == 1
    }

    /// Sort key for surveys: `(|Δ|, f)`.
    pub fn survey_key(&self) -> (u64, u64) {
        (self.discriminant().unsigned_abs(), self.conductor)
    }
}

impl Ord for QuadOrder {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.survey_key().cmp(&other.survey_key())
    }
}

impl PartialOrd for QuadOrder {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QuadOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O(ΔK={}, f={})", self.fundamental_disc, self.conductor)
    }
}

/// A reduced, primitive, positive-definite form `ax² + bxy + cy²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl ReducedForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Ambiguous forms are exactly the reduced representatives of classes of order ≤ 2.
    pub fn is_ambiguous(&self) -> bool {
        self.b == 0 || self.a == self.b || self.a == self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

fn check_discriminant(disc: i64) -> Result<()> {
    if disc >= 0 || disc.rem_euclid(4) > 1 {
        return Err(Error::NotADiscriminant(disc));
    }
    Ok(())
}

/// True iff `disc` is a fundamental discriminant.
pub fn is_fundamental(disc: i64) -> Result<bool> {
    check_discriminant(disc)?;
    let n = disc.unsigned_abs();
    Ok(if disc.rem_euclid(4) == 1 {
        is_squarefree(n)
    } else {
        let m = disc / 4;
        matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
    })
}

/// Visits the reduced primitive forms of `disc` in `(a, b)` order; stops early
/// when the visitor returns `false`.
fn for_each_reduced_form(disc: i64, mut visit: impl FnMut(ReducedForm) -> bool) {
    let n = -disc;
    let parity = disc.rem_euclid(2);
    let mut a = 1i64;
    while 3 * a * a <= n {
        let four_a = 4 * a;
        let mut b = -a + 1;
        if (b - parity).rem_euclid(2) != 0 {
            b += 1;
        }
        while b <= a {
            let num = b * b - disc;
            if num % four_a == 0 {
                let c = num / four_a;
                let ok = c >= a && !(b < 0 && a == c);
                if ok && gcd(gcd(a as u64, b.unsigned_abs()), c as u64) == 1 && !visit(ReducedForm { a, b, c }) {
                    return;
                }
            }
            b += 2;
        }
        a += 1;
    }
}

/// All reduced primitive forms of discriminant `disc`, one per class, ordered by `(a, b)`.
pub fn enumerate_reduced_forms(disc: i64) -> Result<Vec<ReducedForm>> {
    check_discriminant(disc)?;
    let mut out = Vec::new();
    for_each_reduced_form(disc, |f| {
        out.push(f);
        true
    });
    Ok(out)
}

/// Outcome of a class number computation with an optional abort bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassCount {
    Exact(u64),
    Exceeded,
}

impl ClassCount {
    pub fn exact(self) -> Option<u64> {
        match self {
            ClassCount::Exact(h) => Some(h),
            ClassCount::Exceeded => None,
        }
    }
}

/// Class number by counting reduced forms, giving up as soon as the count passes `abort_above`.
pub fn class_number(disc: i64, abort_above: Option<u64>) -> Result<ClassCount> {
    check_discriminant(disc)?;
    let limit = abort_above.unwrap_or(u64::MAX);
    let mut h = 0u64;
    let mut exceeded = false;
    for_each_reduced_form(disc, |_| {
        h += 1;
        if h > limit {
            exceeded = true;
            return false;
        }
        true
    });
    Ok(if exceeded { ClassCount::Exceeded } else { ClassCount::Exact(h) })
}

fn exact_class_number(disc: i64) -> Result<u64> {
    Ok(class_number(disc, None)?.exact().expect("no abort bound"))
}

/// Class number of an order from the class number of its field:
/// `h_O = ε·h_K·∏ (q − (Δ_K/q))·q^(a−1)` over `q^a || f`, with `ε = 1/3` for
/// `Δ_K = −3` and `ε = 1/2` for `Δ_K = −4` whenever the product is divisible.
pub fn class_number_formula(order: &QuadOrder) -> Result<u64> {
    let h_k = exact_class_number(order.fundamental_disc)?;
    Ok(formula_from_field(order.fundamental_disc, h_k, order.conductor))
}

fn local_factor(fund: i64, q: u64, a: u32) -> u64 {
    let chi = kronecker(fund, q as i64).expect("q nonzero");
    ((q as i64 - chi as i64) as u64) * q.pow(a - 1)
}

fn formula_from_field(fund: i64, h_k: u64, conductor: u64) -> u64 {
    let mut h = h_k;
    for (q, a) in factorize(conductor) {
        h *= local_factor(fund, q, a);
    }
    if fund == -3 && h.is_multiple_of(3) {
        h /= 3;
    } else if fund == -4 && h.is_multiple_of(2) {
        h /= 2;
    }
    h
}

/// `|Cl(Δ)[2]|`, counted as the ambiguous reduced forms.
pub fn two_torsion_count(disc: i64) -> Result<u64> {
    check_discriminant(disc)?;
    let mut n = 0;
    for_each_reduced_form(disc, |f| {
        if f.is_ambiguous() {
            n += 1;
        }
        true
    });
    Ok(n)
}

/// `|Cl(O)[2]|` from the number `n` of prime divisors of `D·f`, for odd `f`:
/// `2^(n−1)` when `D·f` is odd or `4 || D·f` or `8 || D·f`, `2^(n−2)` when
/// `2 || D·f`, `2^n` when `16 | D·f`.
pub fn two_torsion_halter_koch(order: &QuadOrder) -> Result<u64> {
    if order.conductor.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "{order}: 2 divides the conductor; use two_torsion_count"
        )));
    }
    let df = order.field_d() * order.conductor;
    let n = factorize(df).len() as u32;
    let e = match v2(df as i64) {
        0 | 2 | 3 => n - 1,
        1 => n - 2,
        _ => n,
    };
    Ok(1u64 << e)
}

/// Squarefree integers `d` whose square roots generate the genus field of `order`.
///
/// Every odd prime `q | D·f` contributes `(−1)^((q−1)/2)·q`. When `Δ_K = −8m`
/// (`m` odd) the 2-part contributes `2` or `−2` so that the product of the
/// prime discriminants recovers `Δ_K`; `√2` appears for `D ≡ 4 (mod 8)` with
/// `4 | f` and for odd `D` with `8 | f`; `√−1` appears for `D ≡ 4 (mod 8)`, for
/// `2 | f` with `2 | D`, and for odd `D` with `4 | f`.
pub fn genus_field_generators(order: &QuadOrder) -> Vec<i64> {
    let d = order.field_d();
    let f = order.conductor;
    let mut gens = Vec::new();
    for (q, _) in factorize(d * f) {
        if q != 2 {
            let q = q as i64;
            gens.push(if q % 4 == 1 { q } else { -q });
        }
    }
    let vd = v2(d as i64);
    let vf = v2(f as i64);
    let mut push = |g: i64| {
        if !gens.contains(&g) {
            gens.push(g);
        }
    };
    if vd == 3 {
        // Δ_K = −8m with m odd; the generator is (−1)^((m+1)/2)·2
        let m = (d / 8) as i64;
        push(if m % 4 == 1 { -2 } else { 2 });
    }
    if (vd == 2 && vf >= 2) || (vd == 0 && vf >= 3) {
        push(2);
    }
    if vd == 2 || (vf >= 1 && vd >= 1) || (vd == 0 && vf >= 2) {
        push(-1);
    }
    gens
}

/// The 2-adic shape of `D = |Δ_K|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoAdicDisc {
    /// `2 ∤ D`: 2 unramified in K.
    Odd,
    /// `4 || D`: 2 tamely ramified.
    Tame,
    /// `8 || D`: 2 wildly ramified.
    Wild,
    Any,
}

impl TwoAdicDisc {
    pub fn of(order: &QuadOrder) -> Self {
        match v2(order.fundamental_disc) {
            0 => TwoAdicDisc::Odd,
            2 => TwoAdicDisc::Tame,
            3 => TwoAdicDisc::Wild,
            v => unreachable!("fundamental discriminant with 2-adic valuation {v}"),
        }
    }
}

/// Which integer an atom constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `D = |Δ_K|`
    D,
    /// the conductor
    F,
    /// `D·f`
    Df,
}

impl Target {
    fn value(self, order: &QuadOrder) -> u64 {
        match self {
            Target::D => order.field_d(),
            Target::F => order.conductor,
            Target::Df => order.field_d() * order.conductor,
        }
    }
}

/// One divisibility constraint of a family filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivAtom {
    Odd(Target),
    /// `n || X` for a prime power `n = q^k`: `v_q(X) = k`.
    ExactlyDivides(u64, Target),
    Divides(u64, Target),
    NotDivides(u64, Target),
    /// `v_2(X)` lies in the given set.
    TwoAdicValuationIn(Vec<u32>, Target),
}

impl DivAtom {
    pub fn holds(&self, order: &QuadOrder) -> bool {
        match self {
            DivAtom::Odd(t) => t.value(order) % 2 == 1,
            DivAtom::ExactlyDivides(n, t) => {
                let x = t.value(order);
                let (q, k) = factorize(*n)[0];
                let mut v = 0;
                let mut y = x;
                while y % q == 0 {
                    y /= q;
                    v += 1;
                }
                v == k
            }
            DivAtom::Divides(n, t) => t.value(order) % n == 0,
            DivAtom::NotDivides(n, t) => t.value(order) % n != 0,
            DivAtom::TwoAdicValuationIn(set, t) => set.contains(&(t.value(order).trailing_zeros())),
        }
    }

    /// True when the atom only looks at `D`, so it can be checked before conductors are enumerated.
    fn field_only(&self) -> bool {
        matches!(
            self,
            DivAtom::Odd(Target::D)
                | DivAtom::ExactlyDivides(_, Target::D)
                | DivAtom::Divides(_, Target::D)
                | DivAtom::NotDivides(_, Target::D)
                | DivAtom::TwoAdicValuationIn(_, Target::D)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Parity {
    Odd,
    Even,
    #[default]
    Any,
}

impl Parity {
    pub fn admits(self, h: u64) -> bool {
        match self {
            Parity::Odd => h % 2 == 1,
            Parity::Even => h.is_multiple_of(2),
            Parity::Any => true,
        }
    }
}

/// A bounded family of orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyFilter {
    pub atoms: Vec<DivAtom>,
    /// inclusive bound on the class number
    pub max_class_number: u64,
    /// inclusive bound on `|Δ_K|`
    pub max_fundamental_disc: u64,
    /// inclusive bound on the conductor
    pub max_conductor: u64,
    pub class_number_parity: Parity,
    pub maximal_only: bool,
    /// restrict to a single field
    pub fundamental_disc: Option<i64>,
}

impl FamilyFilter {
    pub fn new(max_class_number: u64, max_fundamental_disc: u64, max_conductor: u64) -> Self {
        Self {
            atoms: Vec::new(),
            max_class_number,
            max_fundamental_disc,
            max_conductor,
            class_number_parity: Parity::Any,
            maximal_only: false,
            fundamental_disc: None,
        }
    }

    pub fn maximal(mut self) -> Self {
        self.maximal_only = true;
        self
    }

    pub fn parity(mut self, parity: Parity) -> Self {
        self.class_number_parity = parity;
        self
    }

    pub fn atom(mut self, atom: DivAtom) -> Self {
        self.atoms.push(atom);
        self
    }

    pub fn field(mut self, fundamental_disc: i64) -> Self {
        self.fundamental_disc = Some(fundamental_disc);
        self
    }

    pub fn two_adic_disc(self, class: TwoAdicDisc) -> Self {
        match class {
            TwoAdicDisc::Odd => self.atom(DivAtom::Odd(Target::D)),
            TwoAdicDisc::Tame => self.atom(DivAtom::ExactlyDivides(4, Target::D)),
            TwoAdicDisc::Wild => self.atom(DivAtom::ExactlyDivides(8, Target::D)),
            TwoAdicDisc::Any => self,
        }
    }

    pub fn conductor_v2(self, allowed: &[u32]) -> Self {
        self.atom(DivAtom::TwoAdicValuationIn(allowed.to_vec(), Target::F))
    }

    fn check_bounded(&self) -> Result<()> {
        if self.max_class_number == 0 || self.max_fundamental_disc < 3 || self.max_conductor == 0 {
            return Err(Error::InvalidInput("family filter is empty or unbounded".into()));
        }
        if self.max_class_number == u64::MAX || self.max_fundamental_disc == u64::MAX {
            return Err(Error::InvalidInput("family filter is unbounded".into()));
        }
        Ok(())
    }

    /// Every constraint except the class number ones.
    pub fn matches_arithmetic(&self, order: &QuadOrder) -> bool {
        (!self.maximal_only || order.is_maximal())
            && order.field_d() <= self.max_fundamental_disc
            && order.conductor <= self.max_conductor
            && self.fundamental_disc.is_none_or(|d| d == order.fundamental_disc)
            && self.atoms.iter().all(|a| a.holds(order))
    }

    pub fn matches(&self, order: &QuadOrder, class_number: u64) -> bool {
        self.matches_arithmetic(order)
            && class_number <= self.max_class_number
            && self.class_number_parity.admits(class_number)
    }
}

/// Conductors `f ≤ max_f` whose order in the field has formula class number at most `max_h`.
fn conductors_within(fund: i64, h_k: u64, max_h: u64, max_f: u64) -> Vec<(u64, u64)> {
    let units = match fund {
        -3 => 3,
        -4 => 2,
        _ => 1,
    };
    let mut out = vec![(1u64, h_k)];
    // product of local factors, bounded by max_h·units/h_k
    let cap = max_h.saturating_mul(units) / h_k.max(1);
    fn dfs(
        fund: i64,
        h_k: u64,
        max_h: u64,
        max_f: u64,
        cap: u64,
        f: u64,
        prod: u64,
        min_q: u64,
        out: &mut Vec<(u64, u64)>,
    ) {
        let mut q = min_q;
        loop {
            if f.checked_mul(q).is_none_or(|x| x > max_f) || prod.saturating_mul(q - 1) > cap {
                break;
            }
            if crate::arith::is_prime(q) {
                let mut fq = f * q;
                let mut a = 1;
                loop {
                    let p2 = prod * local_factor(fund, q, a);
                    if p2 > cap {
                        break;
                    }
                    let h = formula_from_field(fund, h_k, fq);
                    if h <= max_h {
                        out.push((fq, h));
                    }
                    dfs(fund, h_k, max_h, max_f, cap, fq, p2, q + 1, out);
                    match fq.checked_mul(q) {
                        Some(x) if x <= max_f => fq = x,
                        _ => break,
                    }
                    a += 1;
                }
            }
            q += 1;
        }
    }
    dfs(fund, h_k, max_h, max_f, cap, 1, 1, 2, &mut out);
    out.sort_unstable();
    out
}

/// All orders in the family with their class numbers, ordered by `(|Δ|, f)`.
///
/// Fields are screened with an early-abort form count; conductors are pruned
/// with the class number formula and every surviving order is confirmed by a
/// bounded form count.
pub fn enumerate_orders(filter: &FamilyFilter) -> Result<std::vec::IntoIter<(QuadOrder, u64)>> {
    filter.check_bounded()?;
    let max_h = filter.max_class_number;
    let field_atoms: Vec<&DivAtom> = filter.atoms.iter().filter(|a| a.field_only()).collect();
    let max_f = if filter.maximal_only { 1 } else { filter.max_conductor };
    let fields: Vec<i64> = match filter.fundamental_disc {
        Some(d) => {
            if !is_fundamental(d)? {
                return Err(Error::InvalidInput(format!("{d} is not fundamental")));
            }
            vec![d]
        }
        None => (3..=filter.max_fundamental_disc as i64)
            .map(|n| -n)
            .filter(|&d| d.rem_euclid(4) <= 1 && is_fundamental(d).unwrap_or(false))
            .collect(),
    };
    let mut out: Vec<(QuadOrder, u64)> = Vec::new();
    for fund in fields {
        let field = QuadOrder { fundamental_disc: fund, conductor: 1 };
        if field.field_d() > filter.max_fundamental_disc || !field_atoms.iter().all(|a| a.holds(&field)) {
            continue;
        }
        let Some(h_k) = class_number(fund, Some(max_h))?.exact() else {
            continue;
        };
        for (f, h_formula) in conductors_within(fund, h_k, max_h, max_f) {
            let order = QuadOrder { fundamental_disc: fund, conductor: f };
            if !filter.matches_arithmetic(&order) || !filter.class_number_parity.admits(h_formula) {
                continue;
            }
            let h = if f == 1 {
                h_k
            } else {
                match class_number(order.discriminant(), Some(max_h))? {
                    ClassCount::Exact(h) => h,
                    ClassCount::Exceeded => continue,
                }
            };
            if h != h_formula {
                return Err(Error::Inconsistent(format!(
                    "{order}: form count {h} disagrees with class number formula {h_formula}"
                )));
            }
            if filter.matches(&order, h) {
                out.push((order, h));
            }
        }
    }
    out.sort_by_key(|(o, _)| o.survey_key());
    Ok(out.into_iter())
}

/// Gauss composition of primitive forms of the same discriminant, followed by reduction.
/// Used as an independent oracle for the class group structure.
#[cfg(test)]
pub(crate) mod composition {
    use super::ReducedForm;
    use crate::arith::gcd;

    fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
        if b == 0 {
            (a, 1, 0)
        } else {
            let (g, x, y) = egcd(b, a % b);
            (g, y, x - (a / b) * y)
        }
    }

    pub fn reduce(mut a: i64, mut b: i64, mut c: i64) -> ReducedForm {
        loop {
            if b.abs() > a || (b == -a) {
                // normalize b into (−a, a]
                let two_a = 2 * a;
                let mut nb = b.rem_euclid(two_a);
                if nb > a {
                    nb -= two_a;
                }
                let k = (nb - b) / two_a;
                c += a * k * k + b * k;
                b = nb;
                continue;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return ReducedForm { a, b, c };
        }
    }

    /// A properly equivalent form whose first coefficient is coprime to `m`.
    fn coprime_representative(f: ReducedForm, m: i64) -> (i64, i64, i64) {
        for x in 0i64..50 {
            for y in 0i64..50 {
                if gcd(x as u64, y as u64) != 1 {
                    continue;
                }
                let a = f.a * x * x + f.b * x * y + f.c * y * y;
                if gcd(a as u64, m as u64) != 1 {
                    continue;
                }
                // complete (x, y) to a matrix [[x, u], [y, v]] of determinant 1
                let (_, v, t) = egcd(x, y);
                let u = -t;
                let b = 2 * f.a * x * u + f.b * (x * v + y * u) + 2 * f.c * y * v;
                let c = (b * b - f.discriminant()) / (4 * a);
                return (a, b, c);
            }
        }
        unreachable!("primitive forms represent integers coprime to any m")
    }

    /// Dirichlet composition; `b3` is found by direct search, which is fine at test sizes.
    pub fn compose(f: ReducedForm, g: ReducedForm) -> ReducedForm {
        let disc = f.discriminant();
        let (a1, b1) = (f.a, f.b);
        let (a2, b2, _) = coprime_representative(g, a1);
        let a3 = a1 * a2;
        // b3 ≡ b1 (mod 2a1), b3 ≡ b2 (mod 2a2), b3² ≡ Δ (mod 4a3)
        let m = 2 * a3;
        let mut b3 = None;
        for cand in 0..m {
            if (cand - b1).rem_euclid(2 * a1) == 0
                && (cand - b2).rem_euclid(2 * a2) == 0
                && (cand * cand - disc).rem_euclid(4 * a3) == 0
            {
                b3 = Some(cand);
                break;
            }
        }
        let b3 = b3.expect("composition congruences are solvable");
        let c3 = (b3 * b3 - disc) / (4 * a3);
        reduce(a3, b3, c3)
    }
}
