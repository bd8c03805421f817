//! Family surveys at a fixed prime: enumerate orders, reduce their class polynomials
//! mod p, and tally the reductions of their `Z_p`-irreducible factors.

mod cache;
mod family;
pub mod fixtures;
mod table;
mod verify;

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;

use crate::arith::{is_prime, kronecker};
use crate::error::{Error, Result};
use crate::fp_poly::{factor, reduce_mod_p, zp_roots_by_residue};
use crate::quadratic_orders::{enumerate_orders, FamilyFilter, QuadOrder};
use crate::reduction_analysis::predict_linear_count;

pub use cache::{decode_record, encode_record, PolyCache};
pub use family::{parse_family, parse_named_family, FamilySpec};
pub use table::{compare_tables, CellDiff, FrequencyTable, RowKey, TableFormat};
pub use verify::{observe, verify_observations, verify_scan, Observation, VerifyReport, REPRESENTS_BOUND};

/// Inclusive bounds on class number, `|Δ_K|` and conductor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_class_number: u64,
    pub max_fundamental_disc: u64,
    pub max_conductor: u64,
}

impl Bounds {
    pub fn filter(&self) -> FamilyFilter {
        FamilyFilter::new(self.max_class_number, self.max_fundamental_disc, self.max_conductor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `h ≤ 40`, `|Δ_K| ≤ 2·10⁴`, `f ≤ 50`
    Desk,
    /// `h < 40`, `|Δ_K| ≤ 10⁷`; the conductor bound never binds below `h = 40`
    Paper,
}

impl Profile {
    pub fn bounds(self) -> Bounds {
        match self {
            Profile::Desk => Bounds { max_class_number: 40, max_fundamental_disc: 20_000, max_conductor: 50 },
            Profile::Paper => Bounds { max_class_number: 39, max_fundamental_disc: 10_000_000, max_conductor: 10_000 },
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::Config(format!("unknown profile `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Column {
    pub name: String,
    pub spec: FamilySpec,
}

#[derive(Clone, Debug)]
pub struct SurveyConfig {
    pub p: u64,
    pub columns: Vec<Column>,
    pub bounds: Bounds,
    pub workers: usize,
}

impl SurveyConfig {
    pub fn new(p: u64, bounds: Bounds) -> Self {
        Self { p, columns: Vec::new(), bounds, workers: 1 }
    }

    /// Adds a column from `name=spec` or a bare spec.
    pub fn column(mut self, arg: &str) -> Result<Self> {
        let (name, spec) = parse_named_family(arg)?;
        if self.columns.iter().any(|c| c.name == name) {
            return Err(Error::Config(format!("duplicate column `{name}`")));
        }
        self.columns.push(Column { name, spec });
        Ok(self)
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 5 || !is_prime(self.p) {
            return Err(Error::Config(format!("p = {} must be a prime ≥ 5", self.p)));
        }
        let b = &self.bounds;
        if b.max_class_number == 0 || b.max_fundamental_disc < 3 || b.max_conductor == 0 {
            return Err(Error::Config("bounds must be positive".into()));
        }
        if self.columns.is_empty() {
            return Err(Error::Config("at least one family column is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        Ok(())
    }

    fn column_filters(&self) -> Vec<FamilyFilter> {
        let b = &self.bounds;
        self.columns
            .iter()
            .map(|c| c.spec.filter(b.max_class_number, b.max_fundamental_disc, b.max_conductor))
            .collect()
    }
}

/// `(Δ/p) = −1` without rejecting `p | Δ`.
pub fn inert_at(order: &QuadOrder, p: u64) -> bool {
    !order.field_d().is_multiple_of(p)
        && !order.conductor().is_multiple_of(p)
        && kronecker(order.discriminant(), p as i64).is_ok_and(|k| k == -1)
}

/// Inert orders within the bounds matching at least one column, in `(|Δ|, f)` order.
pub fn survey_orders(config: &SurveyConfig) -> Result<Vec<(QuadOrder, u64)>> {
    config.validate()?;
    let filters = config.column_filters();
    let mut base = config.bounds.filter();
    base.max_class_number = filters.iter().map(|f| f.max_class_number).max().unwrap_or(0);
    if filters.iter().all(|f| f.maximal_only) {
        base = base.maximal();
    }
    Ok(enumerate_orders(&base)?
        .filter(|(o, h)| inert_at(o, config.p) && filters.iter().any(|f| f.matches(o, *h)))
        .collect())
}

/// How one order's class polynomial reduces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderTally {
    pub order: QuadOrder,
    pub class_number: u64,
    pub counts: BTreeMap<RowKey, u64>,
    pub expected_linear: u64,
    pub violations: Vec<String>,
}

impl OrderTally {
    pub fn linear_count(&self) -> u64 {
        self.counts.iter().filter(|(k, _)| matches!(k, RowKey::Linear(_))).map(|(_, v)| v).sum()
    }
}

/// Splits the factorization of `P_O mod p` into reductions of `Z_p`-irreducible factors.
///
/// A root `−c` of multiplicity `e` mod p with `z` roots above it in `Z_p` yields `z` rows
/// `x + c` and `(e − z)/2` rows `(x + c)²`.
pub fn tally_order(order: &QuadOrder, class_number: u64, p: u64, cache: &PolyCache) -> Result<OrderTally> {
    let poly = cache.get_or_compute(order.discriminant())?;
    let reduced = reduce_mod_p(&poly, p)?;
    let zp = zp_roots_by_residue(&poly, p)?;
    let mut counts: BTreeMap<RowKey, u64> = BTreeMap::new();
    let mut violations = Vec::new();
    for (g, e) in factor(&reduced).factors {
        if g.degree() == 1 {
            let root = (p - g.coeffs()[0]) % p;
            let c = g.coeffs()[0];
            let z = zp.get(&root).copied().unwrap_or(0);
            if z > e || (e - z) % 2 != 0 {
                violations.push(format!("{order}: root {root} has multiplicity {e} but {z} Z_p roots"));
                continue;
            }
            if z > 0 {
                *counts.entry(RowKey::Linear(c)).or_insert(0) += z as u64;
            }
            if e > z {
                *counts.entry(RowKey::Square(c)).or_insert(0) += ((e - z) / 2) as u64;
            }
        } else {
            violations.push(format!("{order}: irreducible factor {g} of degree {} mod {p}", g.degree()));
            *counts.entry(RowKey::Other(g.clone())).or_insert(0) += e as u64;
        }
    }
    let expected_linear = predict_linear_count(order, p)?.expected_count;
    let mut tally = OrderTally { order: *order, class_number, counts, expected_linear, violations };
    let linear = tally.linear_count();
    if linear != expected_linear {
        tally.violations.push(format!("{order}: {linear} Z_p-linear factors, predicted {expected_linear}"));
    }
    let weighted: u64 = tally.counts.iter().map(|(k, v)| k.degree() as u64 * v).sum();
    if weighted != class_number {
        tally.violations.push(format!("{order}: factor degrees sum to {weighted}, class number {class_number}"));
    }
    Ok(tally)
}

pub struct SurveyReport {
    pub table: FrequencyTable,
    pub orders_surveyed: usize,
    /// `Σ h` per column over the orders counted in it
    pub class_number_sums: Vec<u64>,
    pub violations: Vec<String>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs every `(order, column)` tally; totals do not depend on the worker count.
pub fn run_survey(config: &SurveyConfig, cache: &PolyCache) -> Result<SurveyReport> {
    let orders = survey_orders(config)?;
    let tallies: Vec<OrderTally> = pool(config.workers)?.install(|| {
        orders
            .par_iter()
            .map(|(o, h)| tally_order(o, *h, config.p, cache))
            .collect::<Result<_>>()
    })?;
    cache.flush()?;
    let names: Vec<String> = config.columns.iter().map(|c| c.name.clone()).collect();
    let mut table = FrequencyTable::with_supersingular_rows(config.p, names)?;
    let filters = config.column_filters();
    let mut class_number_sums = vec![0; filters.len()];
    let mut violations = Vec::new();
    for t in &tallies {
        violations.extend(t.violations.iter().cloned());
        for (i, f) in filters.iter().enumerate() {
            if f.matches(&t.order, t.class_number) {
                class_number_sums[i] += t.class_number;
                for (k, &v) in &t.counts {
                    table.add(k.clone(), i, v);
                }
            }
        }
    }
    Ok(SurveyReport { table, orders_surveyed: tallies.len(), class_number_sums, violations })
}
