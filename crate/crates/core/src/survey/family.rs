//! The family mini-language: comma-separated atoms such as `maximal,hodd` or `4||D,2!|f`.

use std::fmt;
use std::str::FromStr;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::quadratic_orders::{DivAtom, FamilyFilter, Parity, Target};

/// A parsed family, independent of the survey bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    source: String,
    pub atoms: Vec<DivAtom>,
    pub parity: Parity,
    /// inclusive, from `h<N`
    pub max_class_number: Option<u64>,
    pub maximal: bool,
}

impl FamilySpec {
    /// The spec with the given bounds applied.
    pub fn filter(&self, max_class_number: u64, max_fundamental_disc: u64, max_conductor: u64) -> FamilyFilter {
        let h = self.max_class_number.map_or(max_class_number, |m| m.min(max_class_number));
        let mut f = FamilyFilter::new(h, max_fundamental_disc, max_conductor).parity(self.parity);
        if self.maximal {
            f = f.maximal();
        }
        for a in &self.atoms {
            f = f.atom(a.clone());
        }
        f
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_family(s)
    }
}

fn target(s: &str) -> Option<Target> {
    match s {
        "D" => Some(Target::D),
        "f" => Some(Target::F),
        "Df" => Some(Target::Df),
        _ => None,
    }
}

pub fn parse_family(spec: &str) -> Result<FamilySpec> {
    let bad = |reason: String| Error::FamilySpec { spec: spec.to_string(), reason };
    let mut out = FamilySpec {
        source: spec.trim().to_string(),
        atoms: Vec::new(),
        parity: Parity::Any,
        max_class_number: None,
        maximal: false,
    };
    if spec.trim().is_empty() {
        return Err(bad("empty family".into()));
    }
    let set_parity = |p: Parity, out: &mut FamilySpec| -> Result<()> {
        if out.parity != Parity::Any && out.parity != p {
            return Err(bad("both hodd and heven".into()));
        }
        out.parity = p;
        Ok(())
    };
    for raw in spec.split(',') {
        let atom = raw.trim();
        match atom {
            "" => return Err(bad("empty atom".into())),
            "all" => {}
            "maximal" => out.maximal = true,
            "hodd" => set_parity(Parity::Odd, &mut out)?,
            "heven" => set_parity(Parity::Even, &mut out)?,
            _ => {
                if let Some(n) = atom.strip_prefix("h<") {
                    let n: u64 = n.trim().parse().map_err(|_| bad(format!("bad bound in `{atom}`")))?;
                    if n < 2 {
                        return Err(bad(format!("`{atom}` admits no class number")));
                    }
                    out.max_class_number = Some(out.max_class_number.map_or(n - 1, |m| m.min(n - 1)));
                } else if let Some(inner) = atom.strip_prefix("odd(").and_then(|r| r.strip_suffix(')')) {
                    let t = target(inner.trim()).ok_or_else(|| bad(format!("unknown target in `{atom}`")))?;
                    out.atoms.push(DivAtom::Odd(t));
                } else {
                    out.atoms.push(parse_divisibility(atom).map_err(bad)?);
                }
            }
        }
    }
    Ok(out)
}

/// `n||X`, `n!|X` or `n|X`.
fn parse_divisibility(atom: &str) -> std::result::Result<DivAtom, String> {
    let (n, op, rest) = if let Some((n, rest)) = atom.split_once("||") {
        (n, "||", rest)
    } else if let Some((n, rest)) = atom.split_once("!|") {
        (n, "!|", rest)
    } else if let Some((n, rest)) = atom.split_once('|') {
        (n, "|", rest)
    } else {
        return Err(format!("unknown atom `{atom}`"));
    };
    let n: u64 = n.trim().parse().map_err(|_| format!("bad modulus in `{atom}`"))?;
    if n < 2 {
        return Err(format!("modulus in `{atom}` must be at least 2"));
    }
    let t = target(rest.trim()).ok_or_else(|| format!("unknown target in `{atom}`"))?;
    Ok(match op {
        "||" => {
            if factorize(n).len() != 1 {
                return Err(format!("`{atom}`: exact division needs a prime power"));
            }
            DivAtom::ExactlyDivides(n, t)
        }
        "!|" => DivAtom::NotDivides(n, t),
        _ => DivAtom::Divides(n, t),
    })
}

/// `name=spec` or a bare spec, which then names itself.
pub fn parse_named_family(arg: &str) -> Result<(String, FamilySpec)> {
    match arg.split_once('=') {
        Some((name, spec)) if !name.trim().is_empty() => Ok((name.trim().to_string(), parse_family(spec)?)),
        Some(_) => Err(Error::FamilySpec { spec: arg.to_string(), reason: "empty column name".into() }),
        None => Ok((arg.trim().to_string(), parse_family(arg)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic_orders::QuadOrder;

    #[test]
    fn parses_atoms() {
        let f = parse_family("4||D,2!|f").unwrap();
        assert_eq!(f.atoms, [DivAtom::ExactlyDivides(4, Target::D), DivAtom::NotDivides(2, Target::F)]);
        let f = parse_family(" maximal , hodd , h<40 ").unwrap();
        assert!(f.maximal);
        assert_eq!(f.parity, Parity::Odd);
        assert_eq!(f.max_class_number, Some(39));
        let f = parse_family("odd(D),16|f,7|Df").unwrap();
        assert_eq!(
            f.atoms,
            [DivAtom::Odd(Target::D), DivAtom::Divides(16, Target::F), DivAtom::Divides(7, Target::Df)]
        );
        assert!(parse_family("all").unwrap().atoms.is_empty());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "maximal,", "6||D", "4||g", "1|D", "h<1", "hodd,heven", "odd(x)", "foo", "x|D"] {
            assert!(matches!(parse_family(s), Err(Error::FamilySpec { .. })), "{s:?}");
        }
    }

    #[test]
    fn named_columns() {
        let (name, spec) = parse_named_family("tame=4||D,odd(f)").unwrap();
        assert_eq!(name, "tame");
        assert_eq!(spec.to_string(), "4||D,odd(f)");
        let (name, _) = parse_named_family("maximal,hodd").unwrap();
        assert_eq!(name, "maximal,hodd");
        assert!(parse_named_family("=maximal").is_err());
    }

    #[test]
    fn filter_applies_bounds() {
        let spec = parse_family("maximal,heven,h<10,8||D").unwrap();
        let f = spec.filter(40, 1000, 5);
        assert_eq!(f.max_class_number, 9);
        let o = QuadOrder::maximal(-24).unwrap();
        assert!(f.matches(&o, 2));
        assert!(!f.matches(&o, 3));
        assert!(!f.matches(&QuadOrder::maximal(-20).unwrap(), 2));
    }
}
