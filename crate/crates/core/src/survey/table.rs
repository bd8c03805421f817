//! Frequency tables: rows are reductions mod p of `Z_p`-irreducible factors, columns are families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fp_poly::FpPolynomial;
use crate::reduction_analysis::{supersingular_set_fp, ORACLE_MAX_P};

/// Reduction of one irreducible factor over `Z_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RowKey {
    /// `x + c`, from a `Z_p`-linear factor
    Linear(u64),
    /// `(x + c)²`, from an irreducible quadratic whose reduction is a square
    Square(u64),
    /// anything else, by its reduction
    Other(FpPolynomial),
}

impl RowKey {
    pub fn degree(&self) -> usize {
        match self {
            RowKey::Linear(_) => 1,
            RowKey::Square(_) => 2,
            RowKey::Other(g) => g.degree(),
        }
    }

    fn sort_key(&self) -> (usize, u8, Vec<u64>) {
        match self {
            RowKey::Linear(c) | RowKey::Square(c) => (self.degree(), 0, vec![*c]),
            RowKey::Other(g) => (g.degree(), 1, g.coeffs().to_vec()),
        }
    }

    pub fn parse(label: &str, p: u64) -> Result<Self> {
        let bad = || Error::TableParse(format!("bad row label `{label}`"));
        let linear = |s: &str| -> Option<u64> {
            let s = s.trim();
            if s == "x" {
                return Some(0);
            }
            let c: u64 = s.strip_prefix("x + ")?.trim().parse().ok()?;
            (c > 0 && c < p).then_some(c)
        };
        let s = label.trim();
        if s == "x^2" {
            return Ok(RowKey::Square(0));
        }
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(")^2")) {
            return linear(inner).map(RowKey::Square).ok_or_else(bad);
        }
        if let Some(c) = linear(s) {
            return Ok(RowKey::Linear(c));
        }
        parse_poly(s, p).map(RowKey::Other).ok_or_else(bad)
    }
}

/// Inverse of the `FpPolynomial` display: `x^2 + 3x + 5`.
fn parse_poly(s: &str, p: u64) -> Option<FpPolynomial> {
    let mut coeffs: Vec<i64> = Vec::new();
    for term in s.split(" + ") {
        let term = term.trim();
        let (c, k) = match term.split_once('x') {
            None => (term.parse::<i64>().ok()?, 0),
            Some((c, e)) => {
                let c = if c.is_empty() { 1 } else { c.parse().ok()? };
                let k = if e.is_empty() { 1 } else { e.strip_prefix('^')?.parse().ok()? };
                (c, k)
            }
        };
        if c <= 0 || c as u64 >= p {
            return None;
        }
        if coeffs.len() <= k {
            coeffs.resize(k + 1, 0);
        }
        coeffs[k] = c;
    }
    FpPolynomial::new(p, &coeffs).ok().filter(|g| g.to_string() == s)
}

impl Ord for RowKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for RowKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKey::Linear(0) => write!(f, "x"),
            RowKey::Linear(c) => write!(f, "x + {c}"),
            RowKey::Square(0) => write!(f, "x^2"),
            RowKey::Square(c) => write!(f, "(x + {c})^2"),
            RowKey::Other(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
    Tsv,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "tsv" => Ok(TableFormat::Tsv),
            _ => Err(Error::Config(format!("unknown table format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    p: u64,
    columns: Vec<String>,
    rows: BTreeMap<RowKey, Vec<u64>>,
}

impl FrequencyTable {
    pub fn new(p: u64, columns: Vec<String>) -> Self {
        Self { p, columns, rows: BTreeMap::new() }
    }

    /// A table with a zero row `x + c` and `(x + c)²` for every supersingular `−c ∈ F_p`.
    pub fn with_supersingular_rows(p: u64, columns: Vec<String>) -> Result<Self> {
        let mut t = Self::new(p, columns);
        if p <= ORACLE_MAX_P {
            for j in supersingular_set_fp(p)? {
                let c = (p - j) % p;
                t.ensure_row(RowKey::Linear(c));
                t.ensure_row(RowKey::Square(c));
            }
        }
        Ok(t)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> impl Iterator<Item = (&RowKey, &[u64])> {
        self.rows.iter().map(|(k, v)| (k, v.as_slice()))
    }

    fn ensure_row(&mut self, key: RowKey) -> &mut Vec<u64> {
        let n = self.columns.len();
        self.rows.entry(key).or_insert_with(|| vec![0; n])
    }

    pub fn add(&mut self, key: RowKey, column: usize, count: u64) {
        assert!(column < self.columns.len(), "column {column} out of range");
        self.ensure_row(key)[column] += count;
    }

    /// Count in a cell; absent rows or columns read as zero.
    pub fn get(&self, key: &RowKey, column: &str) -> u64 {
        let Some(i) = self.columns.iter().position(|c| c == column) else {
            return 0;
        };
        self.rows.get(key).map_or(0, |r| r[i])
    }

    /// Degree-weighted column sums.
    pub fn weighted_column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.columns.len()];
        for (k, r) in &self.rows {
            for (s, &v) in sums.iter_mut().zip(r) {
                *s += v * k.degree() as u64;
            }
        }
        sums
    }

    pub fn emit(&self, format: TableFormat) -> String {
        let mut out = format!("# p={}\n", self.p);
        match format {
            TableFormat::Csv | TableFormat::Tsv => {
                let delim = if format == TableFormat::Csv { b',' } else { b'\t' };
                let mut w = csv::WriterBuilder::new().delimiter(delim).from_writer(Vec::new());
                let header: Vec<&str> = std::iter::once("factor").chain(self.columns.iter().map(String::as_str)).collect();
                w.write_record(&header).expect("writing to memory");
                for (k, r) in &self.rows {
                    let mut rec = vec![k.to_string()];
                    rec.extend(r.iter().map(u64::to_string));
                    w.write_record(&rec).expect("writing to memory");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8"));
            }
            TableFormat::Markdown => {
                let esc = |s: &str| s.replace('|', "\\|");
                out.push_str("| factor |");
                for c in &self.columns {
                    out.push_str(&format!(" {} |", esc(c)));
                }
                out.push_str("\n|---|");
                out.push_str(&"---:|".repeat(self.columns.len()));
                out.push('\n');
                for (k, r) in &self.rows {
                    out.push_str(&format!("| {} |", esc(&k.to_string())));
                    for v in r {
                        out.push_str(&format!(" {v} |"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Reads any emitted format. Other `#` lines are comments and `-` reads as zero.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = None;
        let mut body = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# p=") {
                p = Some(rest.trim().parse::<u64>().map_err(|_| Error::TableParse(format!("bad prime line `{line}`")))?);
            } else if !line.starts_with('#') && !line.trim().is_empty() {
                body.push(line);
            }
        }
        let p = p.ok_or_else(|| Error::TableParse("missing `# p=` line".into()))?;
        let records: Vec<Vec<String>> = match body.first() {
            None => return Err(Error::TableParse("missing header".into())),
            Some(h) if h.trim_start().starts_with('|') => body
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 1)
                .map(|(_, l)| split_markdown_row(l))
                .collect(),
            Some(h) => {
                let delim = if h.contains('\t') { b'\t' } else { b',' };
                let joined = body.join("\n");
                let mut r = csv::ReaderBuilder::new().delimiter(delim).has_headers(false).from_reader(joined.as_bytes());
                r.records()
                    .map(|rec| rec.map(|rec| rec.iter().map(|s| s.trim().to_string()).collect()))
                    .collect::<std::result::Result<_, _>>()?
            }
        };
        let header = &records[0];
        if header.first().map(String::as_str) != Some("factor") {
            return Err(Error::TableParse("header must start with `factor`".into()));
        }
        let mut t = Self::new(p, header[1..].to_vec());
        for rec in &records[1..] {
            if rec.len() != header.len() {
                return Err(Error::TableParse(format!("row `{}` has {} cells, expected {}", rec[0], rec.len(), header.len())));
            }
            let key = RowKey::parse(&rec[0], p)?;
            if t.rows.contains_key(&key) {
                return Err(Error::TableParse(format!("duplicate row `{key}`")));
            }
            let row = t.ensure_row(key);
            for (cell, v) in rec[1..].iter().zip(row.iter_mut()) {
                *v = match cell.as_str() {
                    "-" => 0,
                    s => s.parse().map_err(|_| Error::TableParse(format!("bad count `{s}`")))?,
                };
            }
        }
        Ok(t)
    }
}

fn split_markdown_row(line: &str) -> Vec<String> {
    let inner = line.trim().trim_start_matches('|');
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    cells.push(cur.trim().to_string());
    cells
}

/// One differing cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    pub row: RowKey,
    pub column: String,
    pub a: u64,
    pub b: u64,
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}: {} vs {}", self.row, self.column, self.a, self.b)
    }
}

/// Cells that differ between two tables over the union of their rows and columns.
pub fn compare_tables(a: &FrequencyTable, b: &FrequencyTable) -> Result<Vec<CellDiff>> {
    if a.p != b.p {
        return Err(Error::PrimeMismatch(a.p, b.p));
    }
    let mut columns = a.columns.clone();
    columns.extend(b.columns.iter().filter(|c| !a.columns.contains(c)).cloned());
    let mut rows: Vec<&RowKey> = a.rows.keys().chain(b.rows.keys()).collect();
    rows.sort();
    rows.dedup();
    let mut out = Vec::new();
    for row in rows {
        for column in &columns {
            let (x, y) = (a.get(row, column), b.get(row, column));
            if x != y {
                out.push(CellDiff { row: row.clone(), column: column.clone(), a: x, b: y });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> FrequencyTable {
        let mut t = FrequencyTable::with_supersingular_rows(71, vec!["maximal,hodd".into(), "a|b".into()]).unwrap();
        t.add(RowKey::Linear(23), 0, 1);
        t.add(RowKey::Square(5), 1, 4);
        t.add(RowKey::Linear(0), 1, 2);
        t
    }

    #[test]
    fn labels_round_trip() {
        for k in [RowKey::Linear(0), RowKey::Linear(23), RowKey::Square(0), RowKey::Square(54)] {
            assert_eq!(RowKey::parse(&k.to_string(), 71).unwrap(), k);
        }
        let g = FpPolynomial::new(71, &[5, 3, 1]).unwrap();
        assert_eq!(RowKey::parse("x^2 + 3x + 5", 71).unwrap(), RowKey::Other(g));
        assert!(RowKey::parse("x + 71", 71).is_err());
        assert!(RowKey::parse("x + 0", 71).is_err());
        assert!(RowKey::parse("y", 71).is_err());
    }

    #[test]
    fn rows_sort_by_degree_then_constant() {
        let t = demo();
        let labels: Vec<String> = t.rows().map(|(k, _)| k.to_string()).collect();
        assert_eq!(
            labels,
            [
                "x", "x + 5", "x + 23", "x + 30", "x + 31", "x + 47", "x + 54", "x^2", "(x + 5)^2", "(x + 23)^2",
                "(x + 30)^2", "(x + 31)^2", "(x + 47)^2", "(x + 54)^2"
            ]
        );
    }

    #[test]
    fn one_cell_csv_has_three_lines() {
        let mut t = FrequencyTable::new(71, vec!["odd".into()]);
        t.add(RowKey::Linear(23), 0, 1);
        assert_eq!(t.emit(TableFormat::Csv), "# p=71\nfactor,odd\nx + 23,1\n");
    }

    #[test]
    fn markdown_layout() {
        let mut t = FrequencyTable::new(71, vec!["a|b".into()]);
        t.add(RowKey::Square(5), 0, 7);
        assert_eq!(t.emit(TableFormat::Markdown), "# p=71\n| factor | a\\|b |\n|---|---:|\n| (x + 5)^2 | 7 |\n");
    }

    #[test]
    fn every_format_parses_back() {
        let t = demo();
        for f in [TableFormat::Csv, TableFormat::Tsv, TableFormat::Markdown] {
            let text = t.emit(f);
            assert_eq!(FrequencyTable::parse(&text).unwrap(), t, "{f:?}");
        }
    }

    #[test]
    fn compare_reports_cells() {
        let t = demo();
        assert!(compare_tables(&t, &t).unwrap().is_empty());
        let mut u = t.clone();
        u.add(RowKey::Linear(30), 1, 3);
        let d = compare_tables(&t, &u).unwrap();
        assert_eq!(d, [CellDiff { row: RowKey::Linear(30), column: "a|b".into(), a: 0, b: 3 }]);
        let other = FrequencyTable::new(59, vec![]);
        assert!(matches!(compare_tables(&t, &other), Err(Error::PrimeMismatch(71, 59))));
        // missing rows and columns read as zero
        let mut v = FrequencyTable::new(71, vec!["maximal,hodd".into()]);
        v.add(RowKey::Linear(23), 0, 1);
        let d = compare_tables(&t, &v).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn dash_reads_as_zero() {
        let t = FrequencyTable::parse("# p=71\n# note\nfactor,a\nx,-\nx + 5,3\n").unwrap();
        assert_eq!(t.get(&RowKey::Linear(0), "a"), 0);
        assert_eq!(t.get(&RowKey::Linear(5), "a"), 3);
        assert!(FrequencyTable::parse("factor,a\n").is_err());
        assert!(FrequencyTable::parse("# p=71\nfactor,a\nx,1,2\n").is_err());
    }
}
