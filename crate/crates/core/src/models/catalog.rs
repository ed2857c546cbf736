use super::spec::{FamilySpec, FamilyTerm, Gen, Poly, StructureSpec, Term};
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogEntry {
    Model(StructureSpec),
    Family(FamilySpec),
}

impl CatalogEntry {
    pub fn n(&self) -> usize {
        match self {
            CatalogEntry::Model(s) => s.n,
            CatalogEntry::Family(f) => f.n,
        }
    }

    /// The fibre at `t = 0` for families, the model itself otherwise.
    pub fn base(&self) -> StructureSpec {
        match self {
            CatalogEntry::Model(s) => s.clone(),
            CatalogEntry::Family(f) => f.at(Complex64::new(0.0, 0.0)).expect("0 lies in the disc"),
        }
    }
}

const NAMED: &[&str] = &[
    "iwasawa",
    "primary_kodaira",
    "nilmanifold_e3",
    "iwasawa_family",
    "kodaira_family",
];

/// Names accepted by [`catalog`]; `torus_<n>` is accepted for `1 ≤ n ≤ 4`.
pub fn catalog_names() -> Vec<String> {
    let mut v: Vec<String> = (1..=4).map(|n| format!("torus_{n}")).collect();
    v.extend(NAMED.iter().map(|s| s.to_string()));
    v
}

/// Parses a two-generator monomial such as `12'`.
fn gens(m: &str) -> (Gen, Gen) {
    let mut out = Vec::new();
    let chars: Vec<char> = m.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let index = chars[i].to_digit(10).expect("digit") as usize;
        let bar = chars.get(i + 1) == Some(&'\'');
        out.push(Gen { index, bar });
        i += if bar { 2 } else { 1 };
    }
    assert_eq!(out.len(), 2, "monomial {m}");
    (out[0], out[1])
}

fn term(re: f64, im: f64, m: &str) -> Term {
    let (a, b) = gens(m);
    Term::new(Complex64::new(re, im), a, b)
}

fn fterm(coef: Poly, m: &str) -> FamilyTerm {
    let (a, b) = gens(m);
    FamilyTerm { coef, a, b }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn catalog(name: &str) -> Result<CatalogEntry> {
    if let Some(n) = name.strip_prefix("torus_") {
        if let Ok(n) = n.parse::<usize>() {
            if (1..=4).contains(&n) {
                return Ok(CatalogEntry::Model(StructureSpec::torus(n)));
            }
        }
    }
    let entry = match name {
        "iwasawa" => CatalogEntry::Model(StructureSpec::new(
            3,
            vec![vec![], vec![], vec![term(-1.0, 0.0, "12")]],
        )?),
        "primary_kodaira" => CatalogEntry::Model(StructureSpec::new(
            2,
            vec![vec![], vec![term(1.0, 0.0, "11'")]],
        )?),
        "nilmanifold_e3" => CatalogEntry::Model(StructureSpec::new(
            3,
            vec![vec![], vec![term(1.0, 0.0, "11'")], vec![term(1.0, 0.0, "21'")]],
        )?),
        "iwasawa_family" => CatalogEntry::Family(FamilySpec::new(
            3,
            0.5,
            vec![
                vec![],
                vec![],
                vec![
                    fterm(Poly::constant(c(-1.0, 0.0)), "12"),
                    fterm(
                        Poly {
                            terms: vec![(c(-1.0, 0.0), 1, 0)],
                        },
                        "21'",
                    ),
                ],
            ],
        )?),
        "kodaira_family" => CatalogEntry::Family(FamilySpec::new(
            2,
            0.5,
            vec![
                vec![],
                vec![fterm(
                    Poly {
                        terms: vec![(c(1.0, 0.0), 0, 0), (c(1.0, 0.0), 1, 0)],
                    },
                    "11'",
                )],
            ],
        )?),
        _ => {
            return Err(Error::Lookup {
                name: name.to_string(),
                available: catalog_names(),
            })
        }
    };
    Ok(entry)
}
