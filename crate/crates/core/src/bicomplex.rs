//! Finite bigraded complexes, the deformed differential `d_h = h∂ + ∂̄`,
//! the rescaling `θ_h`, and harmonic cohomology.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cabs, cpow, to_f64, CMat, CVec, Real, Tolerances, C};
use nalgebra::Complex;
use serde::Serialize;

/// Dimensions of the bigraded pieces `C^{p,q}`, `0 ≤ p, q ≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bigrading {
    pub n: usize,
    dims: Vec<Vec<usize>>,
}

/// Placement of one bidegree inside a total-degree vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub p: usize,
    pub q: usize,
    pub offset: usize,
    pub len: usize,
}

impl Bigrading {
    pub fn new(n: usize, dims: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("complex dimension must be at least 1".into()));
        }
        if dims.len() != n + 1 || dims.iter().any(|row| row.len() != n + 1) {
            return Err(Error::Domain(format!(
                "dimension table must be {0}x{0}",
                n + 1
            )));
        }
        Ok(Bigrading { n, dims })
    }

    /// `dim C^{p,q}`; zero outside the square `0 ≤ p, q ≤ n`.
    pub fn dim(&self, p: isize, q: isize) -> usize {
        if p < 0 || q < 0 || p as usize > self.n || q as usize > self.n {
            0
        } else {
            self.dims[p as usize][q as usize]
        }
    }

    pub fn max_degree(&self) -> usize {
        2 * self.n
    }

    /// Bidegrees of total degree `k`, ordered by `p` ascending.
    pub fn layout(&self, k: usize) -> Vec<Slot> {
        let mut out = Vec::new();
        let mut offset = 0;
        if k > 2 * self.n {
            return out;
        }
        let lo = k.saturating_sub(self.n);
        for p in lo..=k.min(self.n) {
            let q = k - p;
            let len = self.dims[p][q];
            out.push(Slot { p, q, offset, len });
            offset += len;
        }
        out
    }

    pub fn total(&self, k: usize) -> usize {
        self.layout(k).iter().map(|s| s.len).sum()
    }

    pub fn slot(&self, p: usize, q: usize) -> Option<Slot> {
        self.layout(p + q).into_iter().find(|s| s.p == p)
    }
}

/// A complex-coefficient form of pure total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<T: Real = f64> {
    pub degree: usize,
    pub coeffs: CVec<T>,
}

impl<T: Real> Form<T> {
    pub fn zero(grading: &Bigrading, degree: usize) -> Self {
        Form {
            degree,
            coeffs: CVec::<T>::zeros(grading.total(degree)),
        }
    }

    /// Embeds a pure-type coefficient vector at `(p,q)`.
    pub fn pure(grading: &Bigrading, p: usize, q: usize, v: &CVec<T>) -> Self {
        let mut f = Form::zero(grading, p + q);
        let s = grading.slot(p, q).expect("bidegree in range");
        assert_eq!(v.len(), s.len, "component length");
        f.coeffs.rows_mut(s.offset, s.len).copy_from(v);
        f
    }

    pub fn component(&self, grading: &Bigrading, p: usize) -> CVec<T> {
        match grading.layout(self.degree).into_iter().find(|s| s.p == p) {
            Some(s) => self.coeffs.rows(s.offset, s.len).into_owned(),
            None => CVec::<T>::zeros(0),
        }
    }

    pub fn norm(&self) -> T {
        self.coeffs.norm()
    }
}

/// Bigraded complex with `∂: (p,q) → (p+1,q)` and `∂̄: (p,q) → (p,q+1)`.
#[derive(Clone, Debug)]
pub struct Bicomplex<T: Real = f64> {
    pub grading: Bigrading,
    del: Vec<Vec<CMat<T>>>,
    delbar: Vec<Vec<CMat<T>>>,
}

/// Which of the three anticommutation identities failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Identity {
    DelSquared,
    DelbarSquared,
    Anticommutator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub identity: Identity,
    /// Source bidegree of the failing composite.
    pub p: usize,
    pub q: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub max_residual: f64,
    pub threshold: f64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CohomologyKind<T: Real = f64> {
    DeRham,
    DH(C<T>),
    DelbarTotal,
}

#[derive(Clone, Debug)]
pub struct CohomologySpace<T: Real = f64> {
    pub kind: CohomologyKind<T>,
    pub degree: usize,
    pub dimension: usize,
    /// Orthonormal harmonic representatives as columns of a total-degree matrix.
    pub basis: CMat<T>,
}

impl<T: Real> CohomologySpace<T> {
    pub fn forms(&self) -> Vec<Form<T>> {
        (0..self.basis.ncols())
            .map(|j| Form {
                degree: self.degree,
                coeffs: self.basis.column(j).into_owned(),
            })
            .collect()
    }
}

impl<T: Real> Bicomplex<T> {
    /// Builds a bicomplex after checking every matrix shape against the grading.
    pub fn new(
        grading: Bigrading,
        del: Vec<Vec<CMat<T>>>,
        delbar: Vec<Vec<CMat<T>>>,
    ) -> Result<Self> {
        let n = grading.n;
        for (name, table, dp, dq) in [("∂", &del, 1isize, 0isize), ("∂̄", &delbar, 0, 1)] {
            if table.len() != n + 1 || table.iter().any(|r| r.len() != n + 1) {
                return Err(Error::Domain(format!("{name} table must be {0}x{0}", n + 1)));
            }
            for p in 0..=n {
                for q in 0..=n {
                    let expected = (
                        grading.dim(p as isize + dp, q as isize + dq),
                        grading.dim(p as isize, q as isize),
                    );
                    let found = table[p][q].shape();
                    if found != expected {
                        return Err(Error::Shape {
                            what: if dp == 1 { "∂" } else { "∂̄" },
                            p,
                            q,
                            expected,
                            found,
                        });
                    }
                }
            }
        }
        Ok(Bicomplex {
            grading,
            del,
            delbar,
        })
    }

    /// Bicomplex with all differentials zero.
    pub fn zero(grading: Bigrading) -> Self {
        let n = grading.n;
        let table = |dp: isize, dq: isize| {
            (0..=n)
                .map(|p| {
                    (0..=n)
                        .map(|q| {
                            let (p, q) = (p as isize, q as isize);
                            CMat::<T>::zeros(grading.dim(p + dp, q + dq), grading.dim(p, q))
                        })
                        .collect()
                })
                .collect()
        };
        let del = table(1, 0);
        let delbar = table(0, 1);
        Bicomplex {
            grading,
            del,
            delbar,
        }
    }

    pub fn n(&self) -> usize {
        self.grading.n
    }

    pub fn dim(&self, p: isize, q: isize) -> usize {
        self.grading.dim(p, q)
    }

    /// `∂` at `(p,q)`; a correctly shaped zero matrix outside the square.
    pub fn del(&self, p: isize, q: isize) -> CMat<T> {
        if self.dim(p, q) == 0 {
            return CMat::<T>::zeros(self.dim(p + 1, q), 0);
        }
        self.del[p as usize][q as usize].clone()
    }

    pub fn delbar(&self, p: isize, q: isize) -> CMat<T> {
        if self.dim(p, q) == 0 {
            return CMat::<T>::zeros(self.dim(p, q + 1), 0);
        }
        self.delbar[p as usize][q as usize].clone()
    }

    pub fn del_mut(&mut self, p: usize, q: usize) -> &mut CMat<T> {
        &mut self.del[p][q]
    }

    pub fn delbar_mut(&mut self, p: usize, q: usize) -> &mut CMat<T> {
        &mut self.delbar[p][q]
    }

    /// Largest operator norm among all `∂`, `∂̄` blocks.
    pub fn max_op_norm(&self) -> T {
        let mut m = T::zero();
        for row in self.del.iter().chain(self.delbar.iter()) {
            for a in row {
                m = m.max(linalg::op_norm(a));
            }
        }
        m
    }

    /// Checks `∂² = 0`, `∂̄² = 0` and `∂∂̄ + ∂̄∂ = 0` in every bidegree.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let n = self.n() as isize;
        let threshold = tol.zero * (1.0 + to_f64(self.max_op_norm()));
        let mut violations = Vec::new();
        let mut max_residual = 0.0f64;
        for p in 0..=n {
            for q in 0..=n {
                let checks = [
                    (Identity::DelSquared, self.del(p + 1, q) * self.del(p, q)),
                    (
                        Identity::DelbarSquared,
                        self.delbar(p, q + 1) * self.delbar(p, q),
                    ),
                    (
                        Identity::Anticommutator,
                        self.del(p, q + 1) * self.delbar(p, q)
                            + self.delbar(p + 1, q) * self.del(p, q),
                    ),
                ];
                for (identity, m) in checks {
                    let r = to_f64(linalg::max_abs(&m));
                    max_residual = max_residual.max(r);
                    if r > threshold {
                        violations.push(Violation {
                            identity,
                            p: p as usize,
                            q: q as usize,
                            residual: r,
                        });
                    }
                }
            }
        }
        ValidationReport {
            valid: violations.is_empty(),
            max_residual,
            threshold,
            violations,
        }
    }

    /// `d_h = h∂ + ∂̄` from total degree `k` to `k+1`.
    pub fn d_h_total(&self, h: C<T>, k: usize) -> Result<CMat<T>> {
        if k > self.grading.max_degree() {
            return Err(Error::Domain(format!(
                "degree {k} outside 0..={}",
                self.grading.max_degree()
            )));
        }
        Ok(self.assemble(k, |p, q| (self.del(p, q).map(|z| z * h), self.delbar(p, q))))
    }

    /// `d_h` with an out-of-range degree mapped to the empty operator.
    pub(crate) fn d_h_or_empty(&self, h: C<T>, k: isize) -> CMat<T> {
        if k < 0 {
            return CMat::<T>::zeros(self.grading.total(0), 0);
        }
        let k = k as usize;
        if k > self.grading.max_degree() {
            return CMat::<T>::zeros(0, self.grading.total(k));
        }
        self.d_h_total(h, k).expect("degree in range")
    }

    /// Total-degree operator `k → k+1` from per-bidegree `(∂-part, ∂̄-part)`.
    pub fn assemble<F>(&self, k: usize, mut parts: F) -> CMat<T>
    where
        F: FnMut(isize, isize) -> (CMat<T>, CMat<T>),
    {
        let src = self.grading.layout(k);
        let tgt = self.grading.layout(k + 1);
        let rows = self.grading.total(k + 1);
        let cols = self.grading.total(k);
        let mut out = CMat::<T>::zeros(rows, cols);
        for s in &src {
            let (a, b) = parts(s.p as isize, s.q as isize);
            for t in &tgt {
                let block = if t.p == s.p + 1 && t.q == s.q {
                    &a
                } else if t.p == s.p && t.q == s.q + 1 {
                    &b
                } else {
                    continue;
                };
                if t.len > 0 && s.len > 0 {
                    out.view_mut((t.offset, s.offset), (t.len, s.len))
                        .copy_from(block);
                }
            }
        }
        out
    }

    /// Block-diagonal total-degree operator from per-bidegree endomorphisms.
    pub fn block_diagonal<F>(&self, k: usize, mut block: F) -> CMat<T>
    where
        F: FnMut(usize, usize) -> CMat<T>,
    {
        let dim = self.grading.total(k);
        let mut out = CMat::<T>::zeros(dim, dim);
        for s in self.grading.layout(k) {
            if s.len > 0 {
                out.view_mut((s.offset, s.offset), (s.len, s.len))
                    .copy_from(&block(s.p, s.q));
            }
        }
        out
    }

    /// Diagonal matrix of `θ_h` on total degree `k`.
    pub fn theta_matrix(&self, h: C<T>, k: usize) -> CMat<T> {
        let dim = self.grading.total(k);
        let mut out = CMat::<T>::zeros(dim, dim);
        for s in self.grading.layout(k) {
            let f = cpow(h, s.p);
            for i in 0..s.len {
                out[(s.offset + i, s.offset + i)] = f;
            }
        }
        out
    }

    /// `θ_h u = Σ h^p u^{p,q}`.
    pub fn theta_h(&self, u: &Form<T>, h: C<T>) -> Form<T> {
        let mut out = u.clone();
        for s in self.grading.layout(u.degree) {
            let f = cpow(h, s.p);
            for i in 0..s.len {
                out.coeffs[s.offset + i] *= f;
            }
        }
        out
    }

    fn kind_h(kind: CohomologyKind<T>) -> C<T> {
        match kind {
            CohomologyKind::DeRham => Complex::new(T::one(), T::zero()),
            CohomologyKind::DH(h) => h,
            CohomologyKind::DelbarTotal => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Harmonic representatives `ker d_h(k) ∩ (Im d_h(k−1))^⊥` in canonical form.
    pub fn cohomology(
        &self,
        kind: CohomologyKind<T>,
        k: usize,
        tol: &Tolerances,
    ) -> Result<CohomologySpace<T>> {
        if k > self.grading.max_degree() {
            return Err(Error::Domain(format!("degree {k} out of range")));
        }
        let h = Self::kind_h(kind);
        let d_out = self.d_h_or_empty(h, k as isize);
        let d_in = self.d_h_or_empty(h, k as isize - 1);
        let stacked = linalg::vcat(&[d_out, d_in.adjoint()], self.grading.total(k));
        let basis = linalg::canonical_basis(&linalg::kernel(&stacked, tol.rank));
        Ok(CohomologySpace {
            kind,
            degree: k,
            dimension: basis.ncols(),
            basis,
        })
    }

    /// Matrix of `[α] ↦ [θ_h α]` from De Rham to `d_h`-cohomology in harmonic bases.
    pub fn theta_h_cohomology_map(&self, h: C<T>, k: usize, tol: &Tolerances) -> Result<CMat<T>> {
        if cabs(h) <= T::zero() {
            return Err(Error::Domain(
                "θ_h is an isomorphism only for h ≠ 0".into(),
            ));
        }
        let dr = self.cohomology(CohomologyKind::DeRham, k, tol)?;
        let dh = self.cohomology(CohomologyKind::DH(h), k, tol)?;
        Ok(dh.basis.adjoint() * self.theta_matrix(h, k) * dr.basis)
    }
}
