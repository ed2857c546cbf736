use super::spec::StructureSpec;
use crate::bicomplex::{Bigrading, Bicomplex, Form};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{from_c64, CMat, Real, Tolerances, C};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Monomial masks of bidegree `(p,q)`: pairs `(I,J)` ordered lexicographically,
/// `I` in bits `0..n`, `J` in bits `n..2n`.
pub fn monomials(n: usize, p: usize, q: usize) -> Vec<u32> {
    let holo = combinations(n, p);
    let anti = combinations(n, q);
    let mut out = Vec::with_capacity(holo.len() * anti.len());
    for &i in &holo {
        for &j in &anti {
            out.push(i | (j << n));
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..n {
            if n - i >= k {
                rec(i + 1, n, k - 1, acc | (1 << i), out);
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, 0, &mut out);
    out
}

/// Sign of `e_a ∧ e_b` relative to the ascending monomial `e_{a∪b}`;
/// `None` when the masks overlap.
pub fn wedge_sign(a: u32, b: u32) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

fn split(mask: u32, n: usize) -> (u32, u32) {
    let low = mask & ((1u32 << n) - 1);
    (low, mask >> n)
}

fn bidegree(mask: u32, n: usize) -> (usize, usize) {
    let (i, j) = split(mask, n);
    (i.count_ones() as usize, j.count_ones() as usize)
}

type Poly = BTreeMap<u32, Complex64>;

fn add_term(acc: &mut Poly, mask: u32, c: Complex64) {
    let e = acc.entry(mask).or_insert(Complex64::new(0.0, 0.0));
    *e += c;
}

/// Conjugate of a monomial: `(I,J) ↦ (J,I)` with sign `(−1)^{pq}`.
fn conj_mask(mask: u32, n: usize) -> (u32, f64) {
    let (i, j) = split(mask, n);
    let sign = if (i.count_ones() * j.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
    (j | (i << n), sign)
}

/// Anti-linear involution `(p,q) → (q,p)` stored as real signed permutations.
#[derive(Clone, Debug)]
pub struct Conjugation<T: Real = f64> {
    /// `c[p][q]` maps coefficient vectors at `(p,q)` to `(q,p)`; apply to `conj(v)`.
    pub c: Vec<Vec<CMat<T>>>,
}

impl<T: Real> Conjugation<T> {
    pub fn at(&self, p: usize, q: usize) -> &CMat<T> {
        &self.c[p][q]
    }

    /// `Ā = C · conj(A) · conj(C)` for `A: (p,q) → (p',q')`, giving `(q,p) → (q',p')`.
    pub fn operator(&self, a: &CMat<T>, src: (usize, usize), tgt: (usize, usize)) -> CMat<T> {
        &self.c[tgt.0][tgt.1] * a.map(|z| z.conj()) * self.c[src.1][src.0].map(|z| z.conj())
    }

    /// Same as [`Conjugation::operator`] but tolerating bidegrees outside the square.
    pub fn operator_ext(
        &self,
        a: &CMat<T>,
        src: (isize, isize),
        tgt: (isize, isize),
    ) -> CMat<T> {
        let n = self.c.len() as isize - 1;
        let inside = |(p, q): (isize, isize)| p >= 0 && q >= 0 && p <= n && q <= n;
        if !inside(src) || !inside(tgt) {
            return CMat::<T>::zeros(a.nrows(), a.ncols());
        }
        self.operator(a, (src.0 as usize, src.1 as usize), (tgt.0 as usize, tgt.1 as usize))
    }

    /// Total-degree conjugation matrix; apply to the complex conjugate of a vector.
    pub fn total(&self, grading: &Bigrading, k: usize) -> CMat<T> {
        let dim = grading.total(k);
        let layout = grading.layout(k);
        let mut out = CMat::<T>::zeros(dim, dim);
        for s in &layout {
            let t = layout.iter().find(|t| t.p == s.q).expect("mirrored slot");
            if s.len > 0 {
                out.view_mut((t.offset, s.offset), (t.len, s.len))
                    .copy_from(&self.c[s.p][s.q]);
            }
        }
        out
    }
}

/// Exterior algebra on `{φ^i, φ̄^i}` with `d` extended by the Leibniz rule.
#[derive(Clone, Debug)]
pub struct ExteriorModel<T: Real = f64> {
    pub spec: StructureSpec,
    pub bicomplex: Bicomplex<T>,
    pub conjugation: Conjugation<T>,
    /// Value of the top monomial under integration.
    pub volume: C<T>,
    basis: Vec<Vec<Vec<u32>>>,
    /// mask → (p, q, index within bidegree)
    position: Vec<(usize, usize, usize)>,
}

impl<T: Real> ExteriorModel<T> {
    pub fn build(spec: &StructureSpec) -> Result<Self> {
        let n = spec.n;
        if n > 8 {
            return Err(Error::Domain(format!("complex dimension {n} too large")));
        }
        // d on the 2n generators, as degree-2 polynomials in masks.
        let mut dgen: Vec<Poly> = vec![Poly::new(); 2 * n];
        for (i, eq) in spec.equations.iter().enumerate() {
            for t in eq {
                let (a, b) = (1u32 << t.a.bit(n), 1u32 << t.b.bit(n));
                if let Some(s) = wedge_sign(a, b) {
                    add_term(&mut dgen[i], a | b, t.coef * s as f64);
                }
            }
            dgen[i].retain(|_, c| c.norm() > 0.0);
            let bad: f64 = dgen[i]
                .iter()
                .filter(|(m, _)| bidegree(**m, n) == (0, 2))
                .map(|(_, c)| c.norm())
                .fold(0.0, f64::max);
            if bad > 0.0 {
                return Err(Error::NonIntegrable {
                    generator: format!("φ^{}", i + 1),
                    reason: "dφ has a (0,2) component".into(),
                    residual: bad,
                });
            }
        }
        for i in 0..n {
            let mut bar = Poly::new();
            for (&m, &c) in &dgen[i] {
                let (cm, s) = conj_mask(m, n);
                add_term(&mut bar, cm, c.conj() * s);
            }
            dgen[n + i] = bar;
        }
        let d_mask = |mask: u32| -> Poly {
            let mut out = Poly::new();
            let mut prefix = 0u32;
            let mut s_sign = 1.0;
            for bit in 0..2 * n {
                if mask & (1 << bit) == 0 {
                    continue;
                }
                let suffix = mask & !((1u32 << (bit + 1)) - 1);
                for (&m, &c) in &dgen[bit] {
                    if let Some(s1) = wedge_sign(prefix, m) {
                        if let Some(s2) = wedge_sign(prefix | m, suffix) {
                            add_term(&mut out, prefix | m | suffix, c * (s_sign * (s1 * s2) as f64));
                        }
                    }
                }
                prefix |= 1 << bit;
                s_sign = -s_sign;
            }
            out
        };
        // d² on generators; d² is a derivation so this suffices.
        for g in 0..n {
            let mut dd = Poly::new();
            for (&m, &c) in &dgen[g] {
                for (m2, c2) in d_mask(m) {
                    add_term(&mut dd, m2, c * c2);
                }
            }
            let residual = dd.values().map(|c| c.norm()).fold(0.0, f64::max);
            let scale = 1.0 + dgen[g].values().map(|c| c.norm()).fold(0.0, f64::max);
            if residual > 1e-12 * scale * scale {
                return Err(Error::NonIntegrable {
                    generator: format!("φ^{}", g + 1),
                    reason: "d² ≠ 0".into(),
                    residual,
                });
            }
        }

        let mut dims = vec![vec![0usize; n + 1]; n + 1];
        let mut basis = vec![vec![Vec::new(); n + 1]; n + 1];
        let mut position = vec![(0, 0, 0); 1usize << (2 * n)];
        for p in 0..=n {
            for q in 0..=n {
                let b = monomials(n, p, q);
                for (idx, &m) in b.iter().enumerate() {
                    position[m as usize] = (p, q, idx);
                }
                dims[p][q] = b.len();
                basis[p][q] = b;
            }
        }
        let grading = Bigrading::new(n, dims.clone())?;
        let mut del = Vec::with_capacity(n + 1);
        let mut delbar = Vec::with_capacity(n + 1);
        let dim = |p: usize, q: usize| if p > n || q > n { 0 } else { dims[p][q] };
        for p in 0..=n {
            let mut drow = Vec::with_capacity(n + 1);
            let mut brow = Vec::with_capacity(n + 1);
            for q in 0..=n {
                let mut dm = CMat::<T>::zeros(dim(p + 1, q), dims[p][q]);
                let mut bm = CMat::<T>::zeros(dim(p, q + 1), dims[p][q]);
                for (col, &m) in basis[p][q].iter().enumerate() {
                    for (m2, c) in d_mask(m) {
                        if c.norm() == 0.0 {
                            continue;
                        }
                        let (p2, q2, row) = position[m2 as usize];
                        if (p2, q2) == (p + 1, q) {
                            dm[(row, col)] += from_c64::<T>(c);
                        } else if (p2, q2) == (p, q + 1) {
                            bm[(row, col)] += from_c64::<T>(c);
                        } else {
                            return Err(Error::NonIntegrable {
                                generator: format!("monomial mask {m:#b}"),
                                reason: format!("d lands in bidegree ({p2},{q2})"),
                                residual: c.norm(),
                            });
                        }
                    }
                }
                drow.push(dm);
                brow.push(bm);
            }
            del.push(drow);
            delbar.push(brow);
        }
        let bicomplex = Bicomplex::new(grading, del, delbar)?;

        let mut c = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut row = Vec::with_capacity(n + 1);
            for q in 0..=n {
                let mut m = CMat::<T>::zeros(dims[q][p], dims[p][q]);
                for (col, &mask) in basis[p][q].iter().enumerate() {
                    let (cm, s) = conj_mask(mask, n);
                    let (_, _, r) = position[cm as usize];
                    m[(r, col)] = from_c64::<T>(Complex64::new(s, 0.0));
                }
                row.push(m);
            }
            c.push(row);
        }

        Ok(ExteriorModel {
            spec: spec.clone(),
            bicomplex,
            conjugation: Conjugation { c },
            volume: C::new(T::one(), T::zero()),
            basis,
            position,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn grading(&self) -> &Bigrading {
        &self.bicomplex.grading
    }

    pub fn monomial_masks(&self, p: usize, q: usize) -> &[u32] {
        &self.basis[p][q]
    }

    /// Position of a mask inside its total-degree vector.
    pub fn total_index(&self, mask: u32) -> (usize, usize) {
        let (p, q, idx) = self.position[mask as usize];
        let slot = self.grading().slot(p, q).expect("bidegree");
        (p + q, slot.offset + idx)
    }

    fn mask_at(&self, degree: usize, index: usize) -> u32 {
        let slot = self
            .grading()
            .layout(degree)
            .into_iter()
            .find(|s| index >= s.offset && index < s.offset + s.len)
            .expect("index in range");
        self.basis[slot.p][slot.q][index - slot.offset]
    }

    /// The form `coef · (ascending monomial)`.
    pub fn monomial(&self, mask: u32, coef: C<T>) -> Form<T> {
        let (k, i) = self.total_index(mask);
        let mut f = Form::zero(self.grading(), k);
        f.coeffs[i] = coef;
        f
    }

    pub fn unit(&self) -> Form<T> {
        self.monomial(0, C::new(T::one(), T::zero()))
    }

    pub fn wedge(&self, u: &Form<T>, v: &Form<T>) -> Result<Form<T>> {
        let k = u.degree + v.degree;
        if k > 2 * self.n() {
            return Err(Error::Domain(format!(
                "wedge of degrees {} and {} exceeds {}",
                u.degree,
                v.degree,
                2 * self.n()
            )));
        }
        let mut out = Form::zero(self.grading(), k);
        let ua: Vec<(u32, C<T>)> = nonzero(self, u);
        let vb: Vec<(u32, C<T>)> = nonzero(self, v);
        for &(a, ca) in &ua {
            for &(b, cb) in &vb {
                if let Some(s) = wedge_sign(a, b) {
                    let (_, idx) = self.total_index(a | b);
                    let prod = ca * cb;
                    out.coeffs[idx] += if s > 0 { prod } else { -prod };
                }
            }
        }
        Ok(out)
    }

    pub fn conjugate(&self, u: &Form<T>) -> Form<T> {
        let m = self.conjugation.total(self.grading(), u.degree);
        Form {
            degree: u.degree,
            coeffs: m * u.coeffs.map(|z| z.conj()),
        }
    }

    /// `d u` in total degree.
    pub fn d(&self, u: &Form<T>) -> Form<T> {
        let one = C::new(T::one(), T::zero());
        let m = self.bicomplex.d_h_or_empty(one, u.degree as isize);
        Form {
            degree: u.degree + 1,
            coeffs: m * &u.coeffs,
        }
    }

    pub fn d_h(&self, u: &Form<T>, h: C<T>) -> Form<T> {
        let m = self.bicomplex.d_h_or_empty(h, u.degree as isize);
        Form {
            degree: u.degree + 1,
            coeffs: m * &u.coeffs,
        }
    }

    pub fn integrate(&self, u: &Form<T>) -> Result<C<T>> {
        if u.degree != 2 * self.n() {
            return Err(Error::Domain(format!(
                "integration needs degree {}, got {}",
                2 * self.n(),
                u.degree
            )));
        }
        Ok(u.coeffs[0] * self.volume)
    }

    /// Checks `C² = id` and `conj∘∂∘conj = ∂̄` on every bidegree; returns the max residual.
    pub fn conjugation_residual(&self) -> T {
        let n = self.n();
        let b = &self.bicomplex;
        let mut r = T::zero();
        for p in 0..=n {
            for q in 0..=n {
                let c2 = self.conjugation.at(q, p) * self.conjugation.at(p, q);
                r = r.max(linalg::max_abs(&(c2 - CMat::<T>::identity(b.dim(p as isize, q as isize), b.dim(p as isize, q as isize)))));
                if p < n {
                    let cd = self.conjugation.operator(&b.del(p as isize, q as isize), (p, q), (p + 1, q));
                    r = r.max(linalg::max_abs(&(cd - b.delbar(q as isize, p as isize))));
                }
            }
        }
        r
    }

    /// Full model self-check used by tests and the `validate` command.
    pub fn check(&self, tol: &Tolerances) -> bool {
        self.bicomplex.validate(tol).valid
            && crate::scalar::to_f64(self.conjugation_residual()) <= tol.zero
    }

    pub(crate) fn mask_of(&self, degree: usize, index: usize) -> u32 {
        self.mask_at(degree, index)
    }
}

fn nonzero<T: Real>(m: &ExteriorModel<T>, u: &Form<T>) -> Vec<(u32, C<T>)> {
    u.coeffs
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != C::new(T::zero(), T::zero()))
        .map(|(i, &z)| (m.mask_of(u.degree, i), z))
        .collect()
}
