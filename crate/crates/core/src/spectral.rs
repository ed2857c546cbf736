//! E_r pages via explicit zigzag systems, the induced differentials `d_r`,
//! the surjection `θ_0` and the type-(1,1) criterion in degree 2.

use crate::bicomplex::{Bicomplex, CohomologyKind, Form};
use crate::error::{Error, Result};
use crate::linalg::{self, BlockMatrix};
use crate::models::ExteriorModel;
use crate::scalar::{lit, to_f64, CMat, CVec, Real, Tolerances, C};
use nalgebra::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

fn one<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Zigzag system for E_r-closedness at `(p,q)`.
///
/// Unknowns `(α, u_1, …, u_{r−1})` with `u_l` at `(p+l, q−l)`; equations
/// `∂̄α = 0`, `∂α − ∂̄u_1 = 0`, `∂u_l − ∂̄u_{l+1} = 0`.
fn closed_system<T: Real>(b: &Bicomplex<T>, p: usize, q: usize, r: usize) -> (CMat<T>, Vec<usize>) {
    let (p, q) = (p as isize, q as isize);
    let var: Vec<(isize, isize)> = (0..r as isize).map(|l| (p + l, q - l)).collect();
    let col_sizes: Vec<usize> = var.iter().map(|&(a, c)| b.dim(a, c)).collect();
    let mut row_bd = vec![(p, q + 1)];
    for l in 0..r as isize - 1 {
        row_bd.push((p + l + 1, q - l));
    }
    let row_sizes: Vec<usize> = row_bd.iter().map(|&(a, c)| b.dim(a, c)).collect();
    let mut m = BlockMatrix::new(&row_sizes, &col_sizes);
    m.add(0, 0, &b.delbar(p, q), one());
    for l in 0..r - 1 {
        let (a, c) = var[l];
        m.add(l + 1, l, &b.del(a, c), one());
        let (a1, c1) = var[l + 1];
        m.add(l + 1, l + 1, &b.delbar(a1, c1), -one::<T>());
    }
    (m.finish(), col_sizes)
}

/// Orthonormal basis of `Z_r^{p,q}`.
pub fn er_closed_space<T: Real>(b: &Bicomplex<T>, p: usize, q: usize, r: usize, tol: &Tolerances) -> CMat<T> {
    assert!(r >= 1, "page index starts at 1");
    let (sys, sizes) = closed_system(b, p, q, r);
    let k = linalg::kernel(&sys, tol.rank);
    linalg::image(&k.rows(0, sizes[0]).into_owned(), tol.rank)
}

/// Orthonormal basis of `B_r^{p,q}`: `∂ζ + ∂̄ξ` with `ζ` at `(p−1,q)` admitting
/// a zigzag `∂̄ζ = ∂v_{r−3}, …, ∂̄v_j = ∂v_{j−1}, …, ∂̄v_0 = 0`.
pub fn er_exact_space<T: Real>(b: &Bicomplex<T>, p: usize, q: usize, r: usize, tol: &Tolerances) -> CMat<T> {
    assert!(r >= 1, "page index starts at 1");
    let (pi, qi) = (p as isize, q as isize);
    let dbar_img = b.delbar(pi, qi - 1);
    if r == 1 {
        return linalg::image(&dbar_img, tol.rank);
    }
    // chain x_s at (p−1−s, q+s), s = 0..r−2, x_0 = ζ
    let len = r - 1;
    let var: Vec<(isize, isize)> = (0..len as isize).map(|s| (pi - 1 - s, qi + s)).collect();
    let col_sizes: Vec<usize> = var.iter().map(|&(a, c)| b.dim(a, c)).collect();
    let row_sizes: Vec<usize> = var.iter().map(|&(a, c)| b.dim(a, c + 1)).collect();
    let mut m = BlockMatrix::new(&row_sizes, &col_sizes);
    for s in 0..len {
        let (a, c) = var[s];
        m.add(s, s, &b.delbar(a, c), one());
        if s + 1 < len {
            let (a1, c1) = var[s + 1];
            m.add(s, s + 1, &b.del(a1, c1), -one::<T>());
        }
    }
    let k = linalg::kernel(&m.finish(), tol.rank);
    let zeta = k.rows(0, col_sizes[0]).into_owned();
    let del_zeta = b.del(pi - 1, qi) * zeta;
    linalg::image(&linalg::hcat(&[del_zeta, dbar_img], b.dim(pi, qi)), tol.rank)
}

/// Potentials exhibiting `α = ∂ζ + ∂̄ξ` as E_r-exact.
#[derive(Clone, Debug)]
pub struct ExactnessWitness<T: Real = f64> {
    pub r: usize,
    /// `ξ` at `(p, q−1)`.
    pub xi: CVec<T>,
    /// `ζ` at `(p−1, q)`; empty when `r = 1`.
    pub zeta: CVec<T>,
    /// Tail `x_1, …, x_{r−2}` with `x_s` at `(p−1−s, q+s)`.
    pub tail: Vec<CVec<T>>,
}

fn exact_system<T: Real>(b: &Bicomplex<T>, p: usize, q: usize, r: usize) -> (CMat<T>, Vec<usize>, usize) {
    let (pi, qi) = (p as isize, q as isize);
    let chain: Vec<(isize, isize)> = (0..r as isize - 1).map(|s| (pi - 1 - s, qi + s)).collect();
    let mut col_sizes = vec![b.dim(pi, qi - 1)];
    col_sizes.extend(chain.iter().map(|&(a, c)| b.dim(a, c)));
    let mut row_sizes = vec![b.dim(pi, qi)];
    row_sizes.extend(chain.iter().map(|&(a, c)| b.dim(a, c + 1)));
    let mut m = BlockMatrix::new(&row_sizes, &col_sizes);
    m.add(0, 0, &b.delbar(pi, qi - 1), one());
    for (s, &(a, c)) in chain.iter().enumerate() {
        if s == 0 {
            m.add(0, 1, &b.del(a, c), one());
        } else {
            m.add(s, s + 1, &b.del(a, c), -one::<T>());
        }
        m.add(s + 1, s + 1, &b.delbar(a, c), one());
    }
    (m.finish(), col_sizes, row_sizes[0])
}

/// Minimum-norm E_r-exactness witness for `α` at `(p,q)` and the residual of
/// `α = ∂ζ + ∂̄ξ` together with the zigzag constraints.
pub fn exact_witness<T: Real>(
    b: &Bicomplex<T>,
    p: usize,
    q: usize,
    r: usize,
    alpha: &CVec<T>,
    tol: &Tolerances,
) -> (ExactnessWitness<T>, f64) {
    assert!(r >= 1, "page index starts at 1");
    let (sys, sizes, top) = exact_system(b, p, q, r);
    let mut rhs = CVec::<T>::zeros(sys.nrows());
    rhs.rows_mut(0, top).copy_from(alpha);
    let x = linalg::lstsq(&sys, &linalg::column_matrix(&rhs), tol.rank);
    let x = linalg::vector_from(&x);
    let mut parts = Vec::new();
    let mut off = 0;
    for &s in &sizes {
        parts.push(x.rows(off, s).into_owned());
        off += s;
    }
    let mut it = parts.into_iter();
    let xi = it.next().expect("ξ block");
    let zeta = it.next().unwrap_or_else(|| CVec::<T>::zeros(0));
    let w = ExactnessWitness {
        r,
        xi,
        zeta,
        tail: it.collect(),
    };
    let res = exact_witness_residual(b, p, q, r, alpha, &w);
    (w, res)
}

/// Residual of a witness checked at level `r` (potentials beyond the witness's
/// own tower are taken to be zero).
pub fn exact_witness_residual<T: Real>(
    b: &Bicomplex<T>,
    p: usize,
    q: usize,
    r: usize,
    alpha: &CVec<T>,
    w: &ExactnessWitness<T>,
) -> f64 {
    let (sys, sizes, top) = exact_system(b, p, q, r);
    let mut x = CVec::<T>::zeros(sys.ncols());
    let mut blocks = vec![w.xi.clone()];
    if r >= 2 {
        blocks.push(if w.zeta.len() == sizes[1] { w.zeta.clone() } else { CVec::<T>::zeros(sizes[1]) });
        for s in 2..sizes.len() {
            let v = w.tail.get(s - 2).cloned().unwrap_or_else(|| CVec::<T>::zeros(sizes[s]));
            blocks.push(v);
        }
    } else if w.zeta.norm() > T::zero() {
        // a genuine ζ cannot be discarded when checking at level 1
        return f64::INFINITY;
    }
    let mut off = 0;
    for (blk, &s) in blocks.iter().zip(&sizes) {
        x.rows_mut(off, s).copy_from(blk);
        off += s;
    }
    let mut rhs = CVec::<T>::zeros(sys.nrows());
    rhs.rows_mut(0, top).copy_from(alpha);
    to_f64((sys * x - rhs).norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct PageCell<T: Real = f64> {
    pub p: usize,
    pub q: usize,
    pub dim: usize,
    /// Orthonormal basis of `Z_r ∩ B_r^⊥`.
    #[serde(skip)]
    pub reps: CMat<T>,
    /// `‖(I − P_Z) B‖`, zero when `B_r ⊆ Z_r`.
    pub containment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PageTable<T: Real = f64> {
    pub r: usize,
    pub n: usize,
    pub cells: Vec<PageCell<T>>,
    pub totals: Vec<usize>,
}

impl<T: Real> PageTable<T> {
    pub fn cell(&self, p: usize, q: usize) -> &PageCell<T> {
        &self.cells[p * (self.n + 1) + q]
    }

    pub fn dim(&self, p: isize, q: isize) -> usize {
        if p < 0 || q < 0 || p as usize > self.n || q as usize > self.n {
            0
        } else {
            self.cell(p as usize, q as usize).dim
        }
    }
}

pub fn page<T: Real>(b: &Bicomplex<T>, r: usize, tol: &Tolerances) -> PageTable<T> {
    let n = b.n();
    let cells: Vec<PageCell<T>> = (0..(n + 1) * (n + 1))
        .into_par_iter()
        .map(|i| {
            let (p, q) = (i / (n + 1), i % (n + 1));
            let z = er_closed_space(b, p, q, r, tol);
            let bb = er_exact_space(b, p, q, r, tol);
            let containment = to_f64(linalg::containment_residual(&z, &bb));
            let reps = linalg::canonical_basis(&linalg::complement_in(&z, &bb, tol.rank));
            PageCell {
                p,
                q,
                dim: reps.ncols(),
                reps,
                containment,
            }
        })
        .collect();
    let mut totals = vec![0; 2 * n + 1];
    for c in &cells {
        totals[c.p + c.q] += c.dim;
    }
    PageTable { r, n, cells, totals }
}

/// Betti numbers `b_k = dim H^k_{DR}`.
pub fn betti<T: Real>(b: &Bicomplex<T>, tol: &Tolerances) -> Vec<usize> {
    (0..=2 * b.n())
        .map(|k| {
            b.cohomology(CohomologyKind::DeRham, k, tol)
                .expect("degree in range")
                .dimension
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Degeneration<T: Real = f64> {
    pub page: usize,
    pub betti: Vec<usize>,
    /// Pages `E_1, …, E_{page}`.
    pub tables: Vec<PageTable<T>>,
}

/// Smallest `r` with `Σ_{p+q=k} dim E_r^{p,q} = b_k` for all `k`.
pub fn degeneration<T: Real>(b: &Bicomplex<T>, tol: &Tolerances) -> Degeneration<T> {
    let betti = betti(b, tol);
    let mut tables = Vec::new();
    for r in 1..=b.n() + 1 {
        let t = page(b, r, tol);
        let done = t.totals == betti;
        tables.push(t);
        if done {
            return Degeneration {
                page: r,
                betti,
                tables,
            };
        }
    }
    let page = tables.len();
    Degeneration {
        page,
        betti,
        tables,
    }
}

/// Minimum-norm witness `(u_1, …, u_{r−1})` of E_r-closedness, with the residual
/// of the zigzag equations.
pub fn closed_witness<T: Real>(
    b: &Bicomplex<T>,
    p: usize,
    q: usize,
    r: usize,
    alpha: &CVec<T>,
    tol: &Tolerances,
) -> (Vec<CVec<T>>, T) {
    let (sys, sizes) = closed_system(b, p, q, r);
    let a0 = sizes[0];
    let rest: usize = sizes[1..].iter().sum();
    let lhs = sys.columns(a0, rest).into_owned();
    let rhs = -(sys.columns(0, a0) * alpha);
    let rhs_m = linalg::column_matrix(&rhs);
    let x = linalg::lstsq(&lhs, &rhs_m, tol.rank);
    let residual = (&lhs * &x - &rhs_m).norm();
    let mut out = Vec::with_capacity(r - 1);
    let mut off = 0;
    for &s in &sizes[1..] {
        out.push(x.column(0).rows(off, s).into_owned());
        off += s;
    }
    (out, residual)
}

/// Kernel of the homogeneous zigzag (α = 0), for witness-independence checks.
fn homogeneous_witnesses<T: Real>(b: &Bicomplex<T>, p: usize, q: usize, r: usize, tol: &Tolerances) -> CMat<T> {
    let (sys, sizes) = closed_system(b, p, q, r);
    let rest: usize = sizes[1..].iter().sum();
    linalg::kernel(&sys.columns(sizes[0], rest).into_owned(), tol.rank)
}

#[derive(Clone, Debug)]
pub struct DrMap<T: Real = f64> {
    pub r: usize,
    pub source: (usize, usize),
    pub target: Option<(usize, usize)>,
    pub matrix: CMat<T>,
    /// Max deviation when the witness is perturbed by a homogeneous solution.
    pub witness_spread: f64,
}

/// `d_r: E_r^{p,q} → E_r^{p+r,q−r+1}` in representative coordinates.
pub fn dr_map<T: Real>(
    b: &Bicomplex<T>,
    pages: &PageTable<T>,
    p: usize,
    q: usize,
    tol: &Tolerances,
    seed: u64,
) -> DrMap<T> {
    let r = pages.r;
    let n = b.n() as isize;
    let src = &pages.cell(p, q).reps;
    let (tp, tq) = (p as isize + r as isize, q as isize - r as isize + 1);
    if tp > n || tq < 0 || tq > n {
        return DrMap {
            r,
            source: (p, q),
            target: None,
            matrix: CMat::<T>::zeros(0, src.ncols()),
            witness_spread: 0.0,
        };
    }
    let tgt = &pages.cell(tp as usize, tq as usize).reps;
    let last = (p as isize + r as isize - 1, q as isize - r as isize + 1);
    let del_last = b.del(last.0, last.1);
    let homog = homogeneous_witnesses(b, p, q, r, tol);
    let mut rng = crate::sampling::rng(seed);
    let mut matrix = CMat::<T>::zeros(tgt.ncols(), src.ncols());
    let mut spread = 0.0f64;
    for j in 0..src.ncols() {
        let alpha = src.column(j).into_owned();
        let u_last = if r == 1 {
            alpha.clone()
        } else {
            closed_witness(b, p, q, r, &alpha, tol).0.pop().expect("r ≥ 2")
        };
        let image = &del_last * &u_last;
        let coords = tgt.adjoint() * &image;
        if r >= 2 && homog.ncols() > 0 {
            let coeff = CVec::<T>::from_fn(homog.ncols(), |_, _| {
                Complex::new(lit(rng.gen_range(-1.0..1.0)), lit(rng.gen_range(-1.0..1.0)))
            });
            let shift = &homog * coeff;
            let off = homog.nrows() - u_last.len();
            let u_alt = &u_last + shift.rows(off, u_last.len());
            let coords_alt = tgt.adjoint() * (&del_last * u_alt);
            spread = spread.max(to_f64((&coords_alt - &coords).norm()));
        }
        matrix.column_mut(j).copy_from(&coords);
    }
    DrMap {
        r,
        source: (p, q),
        target: Some((tp as usize, tq as usize)),
        matrix,
        witness_spread: spread,
    }
}

/// `dim E_{r+1}^{p,q}` from the ranks of `d_r` in and out of `(p,q)`.
pub fn next_page_dims<T: Real>(b: &Bicomplex<T>, pages: &PageTable<T>, tol: &Tolerances, seed: u64) -> Vec<Vec<usize>> {
    let n = b.n();
    let r = pages.r as isize;
    let ranks: Vec<Vec<usize>> = (0..=n)
        .map(|p| {
            (0..=n)
                .map(|q| linalg::rank(&dr_map(b, pages, p, q, tol, seed).matrix, tol.rank))
                .collect()
        })
        .collect();
    let rank_at = |p: isize, q: isize| {
        if p < 0 || q < 0 || p as usize > n || q as usize > n {
            0
        } else {
            ranks[p as usize][q as usize]
        }
    };
    (0..=n)
        .map(|p| {
            (0..=n)
                .map(|q| {
                    let (pi, qi) = (p as isize, q as isize);
                    pages.dim(pi, qi) - rank_at(pi, qi) - rank_at(pi - r, qi + r - 1)
                })
                .collect()
        })
        .collect()
}

/// Matrix of `θ_0: H^k_{DR} → E_∞^{0,k}`, `{α} ↦ {α^{0,k}}`, in harmonic/representative bases.
pub fn theta0_map<T: Real>(b: &Bicomplex<T>, degen: &Degeneration<T>, k: usize, tol: &Tolerances) -> Result<CMat<T>> {
    if k > b.n() {
        // E^{0,k} vanishes for k > n
        let dr = b.cohomology(CohomologyKind::DeRham, k, tol)?;
        return Ok(CMat::<T>::zeros(0, dr.dimension));
    }
    let dr = b.cohomology(CohomologyKind::DeRham, k, tol)?;
    let last = degen.tables.last().expect("at least one page");
    let reps = &last.cell(0, k).reps;
    let slot = b.grading.slot(0, k).expect("bidegree");
    let comp = dr.basis.rows(slot.offset, slot.len).into_owned();
    Ok(reps.adjoint() * comp)
}

#[derive(Clone, Debug)]
pub struct TypeOneOne<T: Real = f64> {
    pub is_type_one_one: bool,
    /// Coordinates of `θ_0{α}` in `E_∞^{0,2}`.
    pub theta0: CVec<T>,
    /// A d-closed pure (1,1) representative `α − du` when the class has type (1,1).
    pub certificate: Option<Form<T>>,
    pub certificate_residual: f64,
}

/// Degree-2 type-(1,1) test for a real d-closed representative `α`.
pub fn is_type_one_one<T: Real>(
    model: &ExteriorModel<T>,
    degen: &Degeneration<T>,
    alpha: &Form<T>,
    tol: &Tolerances,
) -> Result<TypeOneOne<T>> {
    let b = &model.bicomplex;
    let g = &b.grading;
    if alpha.degree != 2 {
        return Err(Error::Domain(format!("expected a 2-form, got degree {}", alpha.degree)));
    }
    let scale = 1.0 + to_f64(alpha.norm());
    let conj_res = to_f64((model.conjugate(alpha).coeffs - &alpha.coeffs).norm());
    if conj_res > tol.zero * scale {
        return Err(Error::Domain(format!("class is not real (residual {conj_res:.3e})")));
    }
    let closed_res = to_f64(model.d(alpha).norm());
    if closed_res > tol.zero * scale * (1.0 + to_f64(b.max_op_norm())) {
        return Err(Error::Domain(format!("representative is not d-closed (residual {closed_res:.3e})")));
    }
    let last = degen.tables.last().expect("at least one page");
    let reps = &last.cell(0, 2).reps;
    let a02 = alpha.component(g, 0);
    let theta0 = reps.adjoint() * &a02;
    if to_f64(theta0.norm()) > tol.subspace * scale {
        return Ok(TypeOneOne {
            is_type_one_one: false,
            theta0,
            certificate: None,
            certificate_residual: 0.0,
        });
    }
    let dbar01 = b.delbar(0, 1);
    let u01 = linalg::vector_from(&linalg::lstsq(&dbar01, &linalg::column_matrix(&a02), tol.rank));
    let u01f = Form::pure(g, 0, 1, &u01);
    let u = Form {
        degree: 1,
        coeffs: &u01f.coeffs + model.conjugate(&u01f).coeffs,
    };
    let cert = Form {
        degree: 2,
        coeffs: &alpha.coeffs - model.d(&u).coeffs,
    };
    let impure = cert.component(g, 0).norm() + cert.component(g, 2).norm();
    let residual = to_f64(impure + model.d(&cert).norm());
    Ok(TypeOneOne {
        is_type_one_one: true,
        theta0,
        certificate: Some(cert),
        certificate_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{catalog, ExteriorModel};

    fn model(name: &str) -> ExteriorModel<f64> {
        ExteriorModel::build(&catalog(name).unwrap().base()).unwrap()
    }

    #[test]
    fn iwasawa_pages() {
        let m = model("iwasawa");
        let tol = Tolerances::default();
        let d = degeneration(&m.bicomplex, &tol);
        assert_eq!(d.page, 2);
        assert_eq!(d.tables[0].totals[1], 5);
        assert_eq!(d.tables[1].totals[1], 4);
        assert_eq!(er_closed_space(&m.bicomplex, 1, 0, 2, &tol).ncols(), 2);
    }

    #[test]
    fn iwasawa_d1_rank_one_at_1_0() {
        let m = model("iwasawa");
        let tol = Tolerances::default();
        let e1 = page(&m.bicomplex, 1, &tol);
        let d1 = dr_map(&m.bicomplex, &e1, 1, 0, &tol, 7);
        assert_eq!(linalg::rank(&d1.matrix, tol.rank), 1);
    }

    #[test]
    fn torus_exact_spaces_vanish() {
        let m = model("torus_2");
        let tol = Tolerances::default();
        for r in 1..4 {
            assert_eq!(er_exact_space(&m.bicomplex, 1, 1, r, &tol).ncols(), 0);
        }
    }
}
