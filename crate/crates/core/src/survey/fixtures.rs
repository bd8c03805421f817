//! Reference tables at large bounds. Every column header is itself a family spec.

use crate::error::{Error, Result};
use crate::survey::table::FrequencyTable;

const FIXTURES: &[(&str, &str)] = &[
    ("p71-parity", include_str!("../../fixtures/p71_parity.csv")),
    ("p71-maximal", include_str!("../../fixtures/p71_maximal.csv")),
    ("p71-orders", include_str!("../../fixtures/p71_orders.csv")),
    ("p59-orders", include_str!("../../fixtures/p59_orders.csv")),
    ("p41-orders", include_str!("../../fixtures/p41_orders.csv")),
];

pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}

pub fn fixture_text(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("unknown fixture `{name}`; known: {}", fixture_names().collect::<Vec<_>>().join(", "))))
}

pub fn fixture(name: &str) -> Result<FrequencyTable> {
    FrequencyTable::parse(fixture_text(name)?)
}
