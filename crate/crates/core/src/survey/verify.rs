//! Theorem conformance over a scan: linear factor counts, root sides, representability
//! in `α^⊥`, and the frequency pairings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::Result;
use crate::quadratic_orders::{enumerate_orders, FamilyFilter, QuadOrder, TwoAdicDisc};
use crate::quaternion::{perp_classes, represents_order_disc, IbukiyamaParams, Variant};
use crate::reduction_analysis::{
    conforms, matching_cases, partner_check, predict_linear_count, zp_linear_roots, LinearPrediction,
    PartnerReport, RootClass, SupersingularSides,
};
use crate::survey::cache::PolyCache;
use crate::survey::{inert_at, pool};

/// Coordinate bound for representation witnesses.
pub const REPRESENTS_BOUND: u64 = 200;

/// Admissible `q` examined when collecting `α^⊥` classes.
const PERP_Q_COUNT: usize = 64;

#[derive(Clone, Debug)]
pub struct Observation {
    pub order: QuadOrder,
    pub class_number: u64,
    pub prediction: LinearPrediction,
    pub cases: Vec<&'static str>,
    /// residues of the `Z_p` roots, with multiplicity
    pub roots: Vec<u64>,
}

pub fn observe(orders: &[(QuadOrder, u64)], p: u64, cache: &PolyCache, workers: usize) -> Result<Vec<Observation>> {
    let out = pool(workers)?.install(|| {
        orders
            .par_iter()
            .map(|&(order, class_number)| {
                let poly = cache.get_or_compute(order.discriminant())?;
                Ok(Observation {
                    order,
                    class_number,
                    prediction: predict_linear_count(&order, p)?,
                    cases: matching_cases(&order, p)?.into_iter().map(|c| c.label).collect(),
                    roots: zp_linear_roots(&poly, p)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    cache.flush()?;
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub p: u64,
    pub orders: usize,
    pub orders_with_roots: usize,
    pub linear_roots: usize,
    pub count_mismatches: Vec<String>,
    pub side_violations: Vec<String>,
    /// roots per case-table bullet under which they were checked
    pub case_hits: BTreeMap<&'static str, usize>,
    pub represents_checked: usize,
    /// witnesses that exist only beyond the coordinate bound
    pub represents_beyond_bound: Vec<String>,
    /// sides with no witness at all
    pub represents_failures: Vec<String>,
    pub pairing: Option<PartnerReport>,
    /// for `p ≡ 3 (mod 8)`: root frequencies over tame orders with odd conductor, reported only
    pub tame_frequencies: BTreeMap<u64, u64>,
}

impl VerifyReport {
    pub fn violations(&self) -> impl Iterator<Item = &String> {
        let pairing = self.pairing.iter().flat_map(|r| r.violations.iter());
        self.count_mismatches.iter().chain(&self.side_violations).chain(&self.represents_failures).chain(pairing)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p = {}: {} inert orders, {} with Z_p-linear factors, {} linear roots", self.p, self.orders, self.orders_with_roots, self.linear_roots);
        let _ = writeln!(s, "linear count mismatches: {}", self.count_mismatches.len());
        let _ = writeln!(s, "root side violations: {}", self.side_violations.len());
        for (label, n) in &self.case_hits {
            let _ = writeln!(s, "  {label}: {n} roots");
        }
        let _ = writeln!(
            s,
            "alpha-perp witnesses: {} orders checked, {} only beyond the coordinate bound, {} missing",
            self.represents_checked,
            self.represents_beyond_bound.len(),
            self.represents_failures.len()
        );
        match &self.pairing {
            Some(r) => {
                let _ = writeln!(s, "pairing over {} orders: {} violations", r.orders_checked, r.violations.len());
                let pairs: Vec<String> =
                    r.partner_map.iter().filter(|(a, b)| a <= b).map(|(a, b)| format!("{a}<->{b}")).collect();
                let _ = writeln!(s, "  partner map: {}", pairs.join(" "));
            }
            None => {
                let _ = writeln!(s, "pairing: no orders in the pairing family");
            }
        }
        if !self.tame_frequencies.is_empty() {
            let f: Vec<String> = self.tame_frequencies.iter().map(|(j, n)| format!("{j}:{n}")).collect();
            let _ = writeln!(s, "tame odd-conductor root frequencies (not asserted): {}", f.join(" "));
        }
        for v in self.violations() {
            let _ = writeln!(s, "VIOLATION {v}");
        }
        s
    }
}

/// Tame or wild orders with odd conductor, unbounded.
fn odd_conductor_family(ram: TwoAdicDisc) -> FamilyFilter {
    FamilyFilter::new(u64::MAX, u64::MAX, u64::MAX).two_adic_disc(ram).conductor_v2(&[0])
}

struct Witnesses {
    o: Vec<IbukiyamaParams>,
    oprime: Vec<IbukiyamaParams>,
    bound: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Witness {
    Within,
    Beyond,
    Missing,
}

impl Witnesses {
    fn new(p: u64, bound: u64) -> Result<Self> {
        let oprime = if p % 4 == 3 { perp_classes(p, Variant::OPrime, PERP_Q_COUNT)? } else { Vec::new() };
        Ok(Self { o: perp_classes(p, Variant::O, PERP_Q_COUNT)?, oprime, bound })
    }

    fn search(&self, disc: i64, side: Variant, bound: u64) -> Result<bool> {
        let params = if side == Variant::O { &self.o } else { &self.oprime };
        for params in params {
            if represents_order_disc(params, disc, bound)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The search is finite, so an unbounded pass settles existence.
    fn find(&self, disc: i64, sides: &[Variant]) -> Result<Witness> {
        for &side in sides {
            if self.search(disc, side, self.bound)? {
                return Ok(Witness::Within);
            }
        }
        for &side in sides {
            if self.search(disc, side, u64::MAX)? {
                return Ok(Witness::Beyond);
            }
        }
        Ok(Witness::Missing)
    }
}

pub fn verify_observations(
    obs: &[Observation],
    sides: &SupersingularSides,
    represents_bound: Option<u64>,
) -> Result<VerifyReport> {
    let p = sides.p();
    let mut report = VerifyReport { p, orders: obs.len(), ..Default::default() };
    for o in obs {
        let n = o.roots.len() as u64;
        if n != o.prediction.expected_count {
            report.count_mismatches.push(format!(
                "{}: {n} Z_p-linear factors at p = {p}, predicted {}",
                o.order, o.prediction.expected_count
            ));
        }
        if n > 0 {
            report.orders_with_roots += 1;
            report.linear_roots += n as usize;
        }
        for &r in &o.roots {
            let class = sides.classify(r);
            if !conforms(class, &o.prediction.allowed) {
                report.side_violations.push(format!(
                    "{}: root {r} lies on side {class}, allowed {:?} by [{}]",
                    o.order,
                    o.prediction.allowed,
                    o.cases.join("; ")
                ));
            } else {
                for label in &o.cases {
                    *report.case_hits.entry(label).or_insert(0) += 1;
                }
            }
        }
    }
    if let Some(bound) = represents_bound {
        let w = Witnesses::new(p, bound)?;
        let checks: Vec<(QuadOrder, BTreeSet<RootClass>)> = obs
            .iter()
            .filter(|o| !o.roots.is_empty())
            .map(|o| (o.order, o.roots.iter().map(|&r| sides.classify(r)).collect()))
            .collect();
        let results: Vec<Result<Vec<(Witness, String)>>> = checks
            .par_iter()
            .map(|(order, classes)| {
                let disc = order.discriminant();
                let mut out = Vec::new();
                for class in classes {
                    let sides: &[Variant] = match class {
                        RootClass::OSide => &[Variant::O],
                        RootClass::OPrimeSide => &[Variant::OPrime],
                        RootClass::Both => &[Variant::O, Variant::OPrime],
                        RootClass::NotSupersingular => &[],
                    };
                    if sides.is_empty() {
                        continue;
                    }
                    match w.find(disc, sides)? {
                        Witness::Within => {}
                        Witness::Beyond => out.push((
                            Witness::Beyond,
                            format!("{order}: alpha-perp witness on side {class} only beyond {bound}"),
                        )),
                        Witness::Missing => {
                            out.push((Witness::Missing, format!("{order}: no alpha-perp witness on side {class}")))
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        for r in results {
            for (kind, msg) in r? {
                if kind == Witness::Beyond {
                    report.represents_beyond_bound.push(msg);
                } else {
                    report.represents_failures.push(msg);
                }
            }
        }
        report.represents_checked = checks.len();
    }
    let ram = match p % 8 {
        7 | 3 => TwoAdicDisc::Tame,
        _ => TwoAdicDisc::Wild,
    };
    let family = odd_conductor_family(ram);
    let roots: BTreeMap<QuadOrder, Vec<u64>> = obs
        .iter()
        .filter(|o| family.matches_arithmetic(&o.order))
        .map(|o| (o.order, o.roots.clone()))
        .collect();
    if p % 8 == 3 {
        for r in roots.values().flatten() {
            *report.tame_frequencies.entry(*r).or_insert(0) += 1;
        }
    } else if !roots.is_empty() {
        report.pairing = Some(partner_check(&roots, p, &family)?);
    }
    Ok(report)
}

/// Observes and verifies every order of `filter` inert at `p`.
pub fn verify_scan(
    p: u64,
    filter: &FamilyFilter,
    cache: &PolyCache,
    workers: usize,
    represents_bound: Option<u64>,
) -> Result<VerifyReport> {
    let orders: Vec<(QuadOrder, u64)> = enumerate_orders(filter)?.filter(|(o, _)| inert_at(o, p)).collect();
    let obs = observe(&orders, p, cache, workers)?;
    verify_observations(&obs, &SupersingularSides::new(p)?, represents_bound)
}
