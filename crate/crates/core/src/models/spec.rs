use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

/// A coframe generator `φ^i` or `φ̄^i` (1-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Gen {
    pub index: usize,
    pub bar: bool,
}

impl Gen {
    pub fn holo(index: usize) -> Self {
        Gen { index, bar: false }
    }

    pub fn anti(index: usize) -> Self {
        Gen { index, bar: true }
    }

    /// Bit position in the monomial mask.
    pub fn bit(&self, n: usize) -> usize {
        self.index - 1 + if self.bar { n } else { 0 }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index, if self.bar { "'" } else { "" })
    }
}

/// `coef · a ∧ b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub coef: Complex64,
    pub a: Gen,
    pub b: Gen,
}

impl Term {
    pub fn new(coef: Complex64, a: Gen, b: Gen) -> Self {
        Term { coef, a, b }
    }
}

/// Structure equations: `equations[i]` lists the terms of `dφ^{i+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureSpec {
    pub n: usize,
    pub equations: Vec<Vec<Term>>,
}

fn check_gen(g: &Gen, n: usize) -> Result<()> {
    if g.index == 0 || g.index > n {
        return Err(Error::Domain(format!(
            "generator index {} outside 1..={n}",
            g.index
        )));
    }
    Ok(())
}

impl StructureSpec {
    pub fn new(n: usize, equations: Vec<Vec<Term>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("complex dimension must be at least 1".into()));
        }
        if equations.len() != n {
            return Err(Error::Domain(format!(
                "expected {n} structure equations, found {}",
                equations.len()
            )));
        }
        for t in equations.iter().flatten() {
            check_gen(&t.a, n)?;
            check_gen(&t.b, n)?;
        }
        Ok(StructureSpec { n, equations })
    }

    pub fn torus(n: usize) -> Self {
        StructureSpec {
            n,
            equations: vec![Vec::new(); n],
        }
    }

    /// Canonical text in the model-file grammar; stable across runs.
    pub fn to_text(&self) -> String {
        let mut s = format!("n = {}\n", self.n);
        for (i, eq) in self.equations.iter().enumerate() {
            s.push_str(&format!("d{} = ", i + 1));
            if eq.is_empty() {
                s.push('0');
            }
            for (j, t) in eq.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                s.push_str(&format!("+({:e}{:+e}i)*{}{}", t.coef.re, t.coef.im, t.a, t.b));
            }
            s.push('\n');
        }
        s
    }
}

/// Polynomial `Σ c · t^a · t̄^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct Poly {
    pub terms: Vec<(Complex64, u32, u32)>,
}

impl Poly {
    pub fn constant(c: Complex64) -> Self {
        Poly {
            terms: vec![(c, 0, 0)],
        }
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, a, b)| c * t.powu(a) * t.conj().powu(b))
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, a, b)| a == 0 && b == 0)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut terms = Vec::new();
        for &(c1, a1, b1) in &self.terms {
            for &(c2, a2, b2) in &other.terms {
                terms.push((c1 * c2, a1 + a2, b1 + b2));
            }
        }
        Poly { terms }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyTerm {
    pub coef: Poly,
    pub a: Gen,
    pub b: Gen,
}

/// One-parameter family of structure equations over the open disc `|t| < radius`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub n: usize,
    pub radius: f64,
    pub equations: Vec<Vec<FamilyTerm>>,
}

impl FamilySpec {
    pub fn new(n: usize, radius: f64, equations: Vec<Vec<FamilyTerm>>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("disc radius {radius} must be positive")));
        }
        if equations.len() != n {
            return Err(Error::Domain(format!(
                "expected {n} structure equations, found {}",
                equations.len()
            )));
        }
        for t in equations.iter().flatten() {
            check_gen(&t.a, n)?;
            check_gen(&t.b, n)?;
        }
        Ok(FamilySpec {
            n,
            radius,
            equations,
        })
    }

    /// Structure equations of the fibre at `t`.
    pub fn at(&self, t: Complex64) -> Result<StructureSpec> {
        if !(t.norm() < self.radius) {
            return Err(Error::Domain(format!(
                "t = {}{:+}i outside the disc of radius {}",
                t.re, t.im, self.radius
            )));
        }
        let equations = self
            .equations
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|ft| Term::new(ft.coef.eval(t), ft.a, ft.b))
                    .filter(|t| t.coef != Complex64::new(0.0, 0.0))
                    .collect()
            })
            .collect();
        StructureSpec::new(self.n, equations)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n = {}\nfamily t in disc({:e})\n", self.n, self.radius);
        for (i, eq) in self.equations.iter().enumerate() {
            s.push_str(&format!("d{} = ", i + 1));
            if eq.is_empty() {
                s.push('0');
            }
            for (j, ft) in eq.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                s.push('+');
                s.push('(');
                for (k, (c, a, b)) in ft.coef.terms.iter().enumerate() {
                    if k > 0 {
                        s.push('+');
                    }
                    s.push_str(&format!("({:e}{:+e}i)*t^{a}*tbar^{b}", c.re, c.im));
                }
                s.push_str(&format!(")*{}{}", ft.a, ft.b));
            }
            s.push('\n');
        }
        s
    }
}
