//! Reduction of CM class polynomials at an inert prime: which orders have
//! `Z_p`-linear factors, how many, which supersingular side their roots land
//! on, and the 2-isogeny pairings between root frequencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arith::{factorize, is_prime, kronecker, mod_pow, v2};
use crate::class_polynomial::{class_polynomial, IntegerPolynomial};
use crate::error::{Error, Result};
use crate::fp_poly::{factor, linear_root_multiset, reduce_mod_p, zp_roots_by_residue, FpPolynomial};
use crate::quadratic_orders::{two_torsion_count, FamilyFilter, QuadOrder, TwoAdicDisc};

/// Largest prime accepted by the brute-force supersingular oracle.
pub const ORACLE_MAX_P: u64 = 10_000;

/// Where a supersingular `j ∈ F_p` sits relative to the two maximal orders containing `√−p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootClass {
    /// A root of `P_{Z[√−p]}` mod p.
    OSide,
    /// A root of `P_{Z[(1+√−p)/2]}` mod p.
    OPrimeSide,
    /// Both; only `1728` for `p ≡ 3 (mod 4)`.
    Both,
    NotSupersingular,
}

impl fmt::Display for RootClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootClass::OSide => "O",
            RootClass::OPrimeSide => "O'",
            RootClass::Both => "both",
            RootClass::NotSupersingular => "ordinary",
        })
    }
}

/// Local obstructions to `Z_p`-linear factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// An odd prime `q | D·f` with `(−p/q) = −1`.
    OddPrime(u64),
    /// `p ≡ 1 (mod 4)` and `16 | D·f²`.
    SixteenDividesDf2,
    /// `p ≡ 3 (mod 8)` and `8 | D`.
    EightDividesD,
    /// `p ≡ 3 (mod 8)` and `64 | D·f²`.
    SixtyFourDividesDf2,
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstruction::OddPrime(q) => write!(f, "(-p/{q}) = -1 with {q} | Df"),
            Obstruction::SixteenDividesDf2 => write!(f, "p = 1 mod 4 and 16 | Df^2"),
            Obstruction::EightDividesD => write!(f, "p = 3 mod 8 and 8 | D"),
            Obstruction::SixtyFourDividesDf2 => write!(f, "p = 3 mod 8 and 64 | Df^2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPrediction {
    pub allowed: BTreeSet<RootClass>,
    pub expected_count: u64,
    pub obstruction: Option<Obstruction>,
}

fn check_p(p: u64) -> Result<()> {
    if p < 5 || !is_prime(p) || p > i64::MAX as u64 {
        return Err(Error::InvalidInput(format!("{p} is not a prime ≥ 5")));
    }
    Ok(())
}

/// `(Δ/p) = −1`. Rejects `p | Δ_K·f` and `p < 5`.
pub fn is_inert_setting(order: &QuadOrder, p: u64) -> Result<bool> {
    check_p(p)?;
    if order.field_d().is_multiple_of(p) || order.conductor().is_multiple_of(p) {
        return Err(Error::InvalidInput(format!("{p} divides the discriminant of {order}")));
    }
    Ok(kronecker(order.discriminant(), p as i64)? == -1)
}

fn require_inert(order: &QuadOrder, p: u64) -> Result<()> {
    if !is_inert_setting(order, p)? {
        return Err(Error::InvalidInput(format!("{p} is not inert in {order}")));
    }
    Ok(())
}

/// The first local obstruction that applies, if any.
pub fn obstruction(order: &QuadOrder, p: u64) -> Result<Option<Obstruction>> {
    let d = order.field_d();
    let f = order.conductor();
    for (q, _) in factorize(d * f) {
        if q != 2 && kronecker(-(p as i64), q as i64)? == -1 {
            return Ok(Some(Obstruction::OddPrime(q)));
        }
    }
    // v₂(D·f²)
    let v_df2 = v2(d as i64) + 2 * v2(f as i64);
    Ok(if p % 4 == 1 && v_df2 >= 4 {
        Some(Obstruction::SixteenDividesDf2)
    } else if p % 8 == 3 && d.is_multiple_of(8) {
        Some(Obstruction::EightDividesD)
    } else if p % 8 == 3 && v_df2 >= 6 {
        Some(Obstruction::SixtyFourDividesDf2)
    } else {
        None
    })
}

/// Predicted number of `Z_p`-linear factors of `P_O` and the sides their roots may lie on.
pub fn predict_linear_count(order: &QuadOrder, p: u64) -> Result<LinearPrediction> {
    require_inert(order, p)?;
    let allowed = predict_root_classes(order, p)?;
    let obstruction = obstruction(order, p)?;
    let expected_count = if obstruction.is_some() || allowed.is_empty() {
        0
    } else {
        two_torsion_count(order.discriminant())?
    };
    Ok(LinearPrediction { allowed, expected_count, obstruction })
}

/// One bullet of the side-classification case table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRule {
    pub label: &'static str,
    pub allowed: BTreeSet<RootClass>,
}

fn rule(label: &'static str, sides: &[RootClass]) -> CaseRule {
    CaseRule { label, allowed: sides.iter().copied().collect() }
}

/// Every bullet of the case table whose hypotheses hold for `(order, p)`.
///
/// The table is encoded as written; where two bullets overlap both are returned.
pub fn matching_cases(order: &QuadOrder, p: u64) -> Result<Vec<CaseRule>> {
    use RootClass::{OPrimeSide as P, OSide as O};
    require_inert(order, p)?;
    let v = v2(order.conductor() as i64);
    let ram = TwoAdicDisc::of(order);
    let mut out = Vec::new();
    let mut push = |cond: bool, r: CaseRule| {
        if cond {
            out.push(r);
        }
    };
    match p % 8 {
        7 => match ram {
            TwoAdicDisc::Odd => {
                push(v == 0, rule("p=7 mod 8, 2 unramified, 2∤f", &[O]));
                push((1..3).contains(&v), rule("p=7 mod 8, 2 unramified, 2|f, 8∤f", &[P]));
                push(v >= 3, rule("p=7 mod 8, 2 unramified, 8|f", &[O, P]));
            }
            TwoAdicDisc::Tame => {
                push(v == 0 || v >= 2, rule("p=7 mod 8, 2 tame, 2∤f or 4|f", &[O, P]));
                push(v == 1, rule("p=7 mod 8, 2 tame, 2||f", &[P]));
            }
            TwoAdicDisc::Wild => {
                push(v == 0 || v >= 2, rule("p=7 mod 8, 2 wild, 2∤f or 4|f", &[P]));
                push(v >= 1, rule("p=7 mod 8, 2 wild, 2|f or 4|f", &[O, P]));
            }
            TwoAdicDisc::Any => unreachable!(),
        },
        3 => match ram {
            TwoAdicDisc::Odd => {
                push(v == 0 || v == 2, rule("p=3 mod 8, 2 unramified, 2∤f or 4||f", &[O]));
                push(v == 1, rule("p=3 mod 8, 2 unramified, 2||f", &[P]));
                push(v >= 3, rule("p=3 mod 8, 2 unramified, 8|f", &[]));
            }
            TwoAdicDisc::Tame => {
                push(v == 0, rule("p=3 mod 8, 2 tame, 2∤f", &[O, P]));
                push(v == 1, rule("p=3 mod 8, 2 tame, 2||f", &[O]));
                push(v >= 2, rule("p=3 mod 8, 2 tame, 4|f", &[]));
            }
            TwoAdicDisc::Wild => push(true, rule("p=3 mod 8, 2 wild", &[])),
            TwoAdicDisc::Any => unreachable!(),
        },
        _ => match ram {
            TwoAdicDisc::Odd => {
                push(v < 2, rule("p=1 mod 4, 2 unramified, 4∤f", &[O]));
                push(v >= 2, rule("p=1 mod 4, 2 unramified, 4|f", &[]));
            }
            TwoAdicDisc::Tame => push(true, rule("p=1 mod 4, 2 tame", &[])),
            TwoAdicDisc::Wild => {
                push(v == 0, rule("p=1 mod 4, 2 wild, 2∤f", &[O]));
                push(v >= 1, rule("p=1 mod 4, 2 wild, 2|f", &[]));
            }
            TwoAdicDisc::Any => unreachable!(),
        },
    }
    Ok(out)
}

/// Sides on which a `Z_p` root of `P_O` may reduce; empty means no linear factors.
pub fn predict_root_classes(order: &QuadOrder, p: u64) -> Result<BTreeSet<RootClass>> {
    Ok(matching_cases(order, p)?.into_iter().flat_map(|r| r.allowed).collect())
}

/// Whether an observed root class is permitted by a predicted set.
pub fn conforms(class: RootClass, allowed: &BTreeSet<RootClass>) -> bool {
    match class {
        RootClass::Both => !allowed.is_empty(),
        RootClass::NotSupersingular => false,
        c => allowed.contains(&c),
    }
}

/// `χ(n)` for all `n ∈ F_p`, with `χ(0) = 0`.
fn quadratic_character_table(p: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for x in 1..=(p - 1) / 2 {
        chi[(x * x % p) as usize] = 1;
    }
    chi
}

/// `#E(F_p)` for `y² = x³ + ax + b`.
fn point_count(a: u64, b: u64, p: u64, chi: &[i8]) -> u64 {
    let mut s: i64 = 0;
    for x in 0..p {
        let rhs = ((x * x % p * x % p) + a * x % p + b) % p;
        s += chi[rhs as usize] as i64;
    }
    (p as i64 + 1 + s) as u64
}

/// `(a, b)` of a short Weierstrass curve over `F_p` with invariant `j`.
fn curve_with_j(j: u64, p: u64) -> (u64, u64) {
    let j1728 = 1728 % p;
    if j == 0 {
        (0, 1)
    } else if j == j1728 {
        (1, 0)
    } else {
        // k = j/(1728 − j); y² = x³ + 3k·x + 2k
        let den = (j1728 + p - j) % p;
        let k = j * mod_pow(den as i64, p - 2, p) % p;
        (3 * k % p, 2 * k % p)
    }
}

/// Supersingular `j ∈ F_p` by exhaustive point counting (`5 ≤ p ≤ 10⁴`).
pub fn supersingular_set_fp(p: u64) -> Result<BTreeSet<u64>> {
    check_p(p)?;
    if p > ORACLE_MAX_P {
        return Err(Error::InvalidInput(format!("{p} exceeds the oracle range {ORACLE_MAX_P}")));
    }
    let chi = quadratic_character_table(p);
    Ok((0..p)
        .filter(|&j| {
            let (a, b) = curve_with_j(j, p);
            point_count(a, b, p, &chi) % p == 1
        })
        .collect())
}

/// Distinct roots mod `p` of the class polynomials of `Z[√−p]` and `Z[(1+√−p)/2]`.
#[derive(Clone, Debug)]
pub struct SupersingularSides {
    p: u64,
    o_side: BTreeSet<u64>,
    oprime_side: BTreeSet<u64>,
}

impl SupersingularSides {
    pub fn new(p: u64) -> Result<Self> {
        check_p(p)?;
        let distinct = |poly: &IntegerPolynomial| -> Result<BTreeSet<u64>> {
            Ok(linear_root_multiset(&reduce_mod_p(poly, p)?).into_iter().collect())
        };
        let pi = p as i64;
        let o_side = distinct(&class_polynomial(-4 * pi)?)?;
        let oprime_side = if p % 4 == 3 { distinct(&class_polynomial(-pi)?)? } else { BTreeSet::new() };
        Ok(Self { p, o_side, oprime_side })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn o_side(&self) -> &BTreeSet<u64> {
        &self.o_side
    }

    pub fn oprime_side(&self) -> &BTreeSet<u64> {
        &self.oprime_side
    }

    pub fn all(&self) -> BTreeSet<u64> {
        self.o_side.union(&self.oprime_side).copied().collect()
    }

    pub fn classify(&self, j0: u64) -> RootClass {
        let j0 = j0 % self.p;
        match (self.o_side.contains(&j0), self.oprime_side.contains(&j0)) {
            (true, true) => RootClass::Both,
            (true, false) => RootClass::OSide,
            (false, true) => RootClass::OPrimeSide,
            (false, false) => RootClass::NotSupersingular,
        }
    }
}

/// Side of `j0` among the supersingular invariants. Recomputes both class polynomials;
/// use [`SupersingularSides`] for repeated queries.
pub fn classify_root(j0: u64, p: u64) -> Result<RootClass> {
    Ok(SupersingularSides::new(p)?.classify(j0))
}

/// Whether `P_{−4p} mod p` is `(X − 1728)·∏(X − αᵢ)²` (`p ≡ 3 mod 4`) or `∏(X − αᵢ)²`
/// (`p ≡ 1 mod 4`) with distinct `αᵢ ∈ F_p`.
pub fn minus_4p_shape_holds(p: u64) -> Result<bool> {
    check_p(p)?;
    let reduced = reduce_mod_p(&class_polynomial(-4 * p as i64)?, p)?;
    let j1728 = 1728 % p;
    let mut simple = Vec::new();
    for (g, e) in factor(&reduced).factors {
        if g.degree() != 1 {
            return Ok(false);
        }
        let root = (p - g.coeffs()[0]) % p;
        match e {
            1 => simple.push(root),
            2 => {}
            _ => return Ok(false),
        }
    }
    Ok(if p % 4 == 3 { simple == [j1728] } else { simple.is_empty() })
}

/// Coefficient of `X^i Y^k` in the level-2 classical modular polynomial.
pub const PHI2: [[i64; 4]; 4] = [
    [-157_464_000_000_000, 8_748_000_000, -162_000, 1],
    [8_748_000_000, 40_773_375, 1488, 0],
    [-162_000, 1488, -1, 0],
    [1, 0, 0, 0],
];

/// `Φ₂(X, j0)` over `F_p` as a monic cubic in `X`.
pub fn phi2_at(j0: u64, p: u64) -> Result<FpPolynomial> {
    check_p(p)?;
    let pm = p as i128;
    let y = (j0 % p) as i128;
    let coeffs: Vec<i64> = PHI2
        .iter()
        .map(|row| {
            row.iter().rev().fold(0i128, |acc, &c| (acc * y + c as i128).rem_euclid(pm)) as i64
        })
        .collect();
    FpPolynomial::new(p, &coeffs)
}

/// Roots of `Φ₂(X, j0)` in `F_p` with multiplicity.
pub fn two_isogeny_neighbors(j0: u64, p: u64) -> Result<Vec<u64>> {
    Ok(linear_root_multiset(&phi2_at(j0, p)?))
}

/// `Z_p` roots of `poly` listed by their residue, with multiplicity, ascending.
pub fn zp_linear_roots(poly: &IntegerPolynomial, p: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (c, n) in zp_roots_by_residue(poly, p)? {
        out.extend(std::iter::repeat_n(c, n as usize));
    }
    Ok(out)
}

/// Which pairing statement a family is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingMode {
    /// `p ≡ 7 (mod 8)`, 2 tame in K, `2 ∤ f`: partners lie on opposite sides.
    OppositeSide,
    /// `p ≡ 1 (mod 4)`, 2 wild in K, `2 ∤ f`: one partner map for the whole family.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartnerReport {
    pub p: u64,
    pub mode: Option<PairingMode>,
    pub orders_checked: usize,
    /// Aggregate partner map; each pair appears in both directions.
    pub partner_map: BTreeMap<u64, u64>,
    /// Per-value totals of `Z_p`-linear roots over the checked orders.
    pub frequencies: BTreeMap<u64, u64>,
    pub violations: Vec<String>,
}

impl PartnerReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Maximum bipartite matching size by augmenting paths.
fn max_matching(left: usize, right: usize, edge: impl Fn(usize, usize) -> bool) -> usize {
    fn augment(
        u: usize,
        right: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for v in 0..right {
            if edge(u, v) && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, right, edge, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..left)
        .filter(|&u| {
            let mut seen = vec![false; right];
            augment(u, right, &edge, &mut seen, &mut owner)
        })
        .count()
}

/// An involution `σ` on `values` with `σ(v) ∈ candidates[v]`, found by backtracking.
fn find_involution(values: &[u64], candidates: &BTreeMap<u64, BTreeSet<u64>>) -> Option<BTreeMap<u64, u64>> {
    fn go(
        values: &[u64],
        candidates: &BTreeMap<u64, BTreeSet<u64>>,
        sigma: &mut BTreeMap<u64, u64>,
    ) -> bool {
        let Some(&v) = values.iter().find(|v| !sigma.contains_key(v)) else {
            return true;
        };
        for &w in &candidates[&v] {
            if sigma.contains_key(&w) {
                continue;
            }
            if w != v && !candidates.get(&w).is_some_and(|c| c.contains(&v)) {
                continue;
            }
            sigma.insert(v, w);
            sigma.insert(w, v);
            if go(values, candidates, sigma) {
                return true;
            }
            sigma.remove(&v);
            sigma.remove(&w);
        }
        false
    }
    let mut sigma = BTreeMap::new();
    go(values, candidates, &mut sigma).then_some(sigma)
}

fn multiplicities(roots: &[u64]) -> BTreeMap<u64, u64> {
    let mut m = BTreeMap::new();
    for &r in roots {
        *m.entry(r).or_insert(0) += 1;
    }
    m
}

fn pairing_mode(order: &QuadOrder, p: u64) -> Option<PairingMode> {
    if order.conductor().is_multiple_of(2) {
        return None;
    }
    // for p ≡ 3 (mod 8) the O side has three times as many values and no bijection exists
    match (p % 8, TwoAdicDisc::of(order)) {
        (7, TwoAdicDisc::Tame) => Some(PairingMode::OppositeSide),
        (1 | 5, TwoAdicDisc::Wild) => Some(PairingMode::Constant),
        _ => None,
    }
}

/// Checks the frequency pairings on the orders of `per_order_roots` that lie in `family`.
///
/// `per_order_roots` maps each order to the residues of the `Z_p` roots of its class
/// polynomial, with multiplicity. Orders outside the pairing hypotheses are rejected.
pub fn partner_check(
    per_order_roots: &BTreeMap<QuadOrder, Vec<u64>>,
    p: u64,
    family: &FamilyFilter,
) -> Result<PartnerReport> {
    check_p(p)?;
    let mut report = PartnerReport {
        p,
        mode: None,
        orders_checked: 0,
        partner_map: BTreeMap::new(),
        frequencies: BTreeMap::new(),
        violations: Vec::new(),
    };
    let orders: Vec<(&QuadOrder, &Vec<u64>)> =
        per_order_roots.iter().filter(|(o, _)| family.matches_arithmetic(o)).collect();
    if orders.is_empty() {
        return Ok(report);
    }
    for (order, _) in &orders {
        require_inert(order, p)?;
        let mode = pairing_mode(order, p).ok_or_else(|| {
            Error::InvalidInput(format!("{order} at p = {p} is outside the pairing hypotheses"))
        })?;
        if report.mode.is_some_and(|m| m != mode) {
            return Err(Error::InvalidInput("family mixes pairing modes".into()));
        }
        report.mode = Some(mode);
    }
    let sides = SupersingularSides::new(p)?;
    let j1728 = 1728 % p;
    let mut neighbors: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for j in sides.all() {
        neighbors.insert(j, two_isogeny_neighbors(j, p)?.into_iter().collect());
    }
    for (order, roots) in &orders {
        report.orders_checked += 1;
        for &r in roots.iter() {
            *report.frequencies.entry(r).or_insert(0) += 1;
            if sides.classify(r) == RootClass::NotSupersingular {
                report.violations.push(format!("{order}: root {r} is not supersingular"));
            }
        }
    }
    if !report.violations.is_empty() {
        return Ok(report);
    }
    match report.mode.expect("nonempty family has a mode") {
        PairingMode::OppositeSide => opposite_side_check(&orders, &sides, &neighbors, j1728, &mut report),
        PairingMode::Constant => constant_check(&orders, &sides, &neighbors, &mut report),
    }
    Ok(report)
}

fn opposite_side_check(
    orders: &[(&QuadOrder, &Vec<u64>)],
    sides: &SupersingularSides,
    neighbors: &BTreeMap<u64, BTreeSet<u64>>,
    j1728: u64,
    report: &mut PartnerReport,
) {
    let is_edge = |a: u64, b: u64| neighbors[&a].contains(&b);
    for (order, roots) in orders {
        let left: Vec<u64> =
            roots.iter().copied().filter(|&r| r != j1728 && sides.classify(r) == RootClass::OSide).collect();
        let right: Vec<u64> =
            roots.iter().copied().filter(|&r| r != j1728 && sides.classify(r) == RootClass::OPrimeSide).collect();
        let matched = max_matching(left.len(), right.len(), |u, v| is_edge(left[u], right[v]));
        if left.len() != right.len() || matched != left.len() {
            report.violations.push(format!(
                "{order}: roots {left:?} (O) and {right:?} (O') admit no 2-isogeny pairing"
            ));
        }
    }
    // aggregate: every value with nonzero frequency needs a neighbour of equal frequency opposite
    let freq = |j: u64| report.frequencies.get(&j).copied().unwrap_or(0);
    let left: Vec<u64> = sides.o_side().iter().copied().filter(|&j| j != j1728).collect();
    let right: Vec<u64> = sides.oprime_side().iter().copied().filter(|&j| j != j1728).collect();
    let edge = |u: usize, v: usize| is_edge(left[u], right[v]) && freq(left[u]) == freq(right[v]);
    let busy_left = left.iter().filter(|&&j| freq(j) > 0).count();
    let busy_right = right.iter().filter(|&&j| freq(j) > 0).count();
    let mut owner: Vec<Option<usize>> = vec![None; right.len()];
    let mut matched = 0;
    for u in (0..left.len()).filter(|&u| freq(left[u]) > 0) {
        let mut seen = vec![false; right.len()];
        if augment_from(u, &edge, &mut seen, &mut owner) {
            matched += 1;
        }
    }
    if matched != busy_left || matched != busy_right {
        report.violations.push(format!(
            "aggregate frequencies admit no opposite-side pairing ({matched} matched, {busy_left} O values, {busy_right} O' values)"
        ));
    }
    for (v, u) in owner.iter().enumerate() {
        if let Some(u) = u {
            report.partner_map.insert(left[*u], right[v]);
            report.partner_map.insert(right[v], left[*u]);
        }
    }
}

fn augment_from(
    u: usize,
    edge: &dyn Fn(usize, usize) -> bool,
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for v in 0..owner.len() {
        if edge(u, v) && !seen[v] {
            seen[v] = true;
            if owner[v].is_none_or(|w| augment_from(w, edge, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
    }
    false
}

fn constant_check(
    orders: &[(&QuadOrder, &Vec<u64>)],
    sides: &SupersingularSides,
    neighbors: &BTreeMap<u64, BTreeSet<u64>>,
    report: &mut PartnerReport,
) {
    let values: Vec<u64> = sides.o_side().iter().copied().collect();
    let mut global: BTreeMap<u64, BTreeSet<u64>> = values
        .iter()
        .map(|&j| (j, neighbors[&j].iter().copied().filter(|w| sides.o_side().contains(w)).collect()))
        .collect();
    for (order, roots) in orders {
        let mult = multiplicities(roots);
        let m = |j: u64| mult.get(&j).copied().unwrap_or(0);
        let local: BTreeMap<u64, BTreeSet<u64>> = global
            .iter()
            .map(|(&j, c)| (j, c.iter().copied().filter(|&w| m(w) == m(j)).collect()))
            .collect();
        if find_involution(&values, &local).is_none() {
            report.violations.push(format!("{order}: roots {roots:?} are not invariant under any 2-isogeny pairing"));
        }
        global = local;
    }
    match find_involution(&values, &global) {
        Some(sigma) => report.partner_map = sigma,
        None => report.violations.push("no single partner map serves every order".into()),
    }
}
