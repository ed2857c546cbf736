//! Dense complex linear algebra on orthonormal bases.
//!
//! Subspaces are always carried as matrices with orthonormal columns.
//! Numerical rank uses the singular-value cutoff `tol · max(1, σ_max)`;
//! the `max(1, ·)` floor keeps rounding-only matrices at rank zero.

use crate::scalar::{lit, CMat, CVec, Real, C};
use nalgebra::{Complex, DMatrix, DVector};

/// Singular values in descending order together with the full right
/// singular basis (columns of `v`) and the thin left basis `u`.
pub struct FullSvd<T: Real> {
    pub sigma: Vec<T>,
    pub u: CMat<T>,
    pub v: CMat<T>,
}

pub fn full_svd<T: Real>(a: &CMat<T>) -> FullSvd<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return FullSvd {
            sigma: Vec::new(),
            u: CMat::<T>::zeros(m, 0),
            v: CMat::<T>::identity(n, n),
        };
    }
    // Pad with zero rows so that the right singular basis is complete.
    let padded = if m < n {
        let mut p = CMat::<T>::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let sigma: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut uu = CMat::<T>::zeros(m, k);
    let mut vv = CMat::<T>::zeros(n, k);
    for (c, &i) in order.iter().enumerate() {
        uu.column_mut(c).copy_from(&u.column(i).rows(0, m));
        vv.column_mut(c).copy_from(&vt.row(i).adjoint());
    }
    FullSvd { sigma, u: uu, v: vv }
}

fn cutoff<T: Real>(sigma: &[T], tol: f64) -> T {
    let smax = sigma.first().copied().unwrap_or_else(T::zero);
    lit::<T>(tol) * smax.max(T::one())
}

pub fn rank<T: Real>(a: &CMat<T>, tol: f64) -> usize {
    let s = full_svd(a);
    let c = cutoff(&s.sigma, tol);
    s.sigma.iter().filter(|&&x| x > c).count()
}

/// Orthonormal basis of the null space.
pub fn kernel<T: Real>(a: &CMat<T>, tol: f64) -> CMat<T> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return CMat::<T>::identity(n, n);
    }
    let s = full_svd(a);
    let c = cutoff(&s.sigma, tol);
    let r = s.sigma.iter().filter(|&&x| x > c).count();
    s.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column space.
pub fn image<T: Real>(a: &CMat<T>, tol: f64) -> CMat<T> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return CMat::<T>::zeros(m, 0);
    }
    let s = full_svd(a);
    let c = cutoff(&s.sigma, tol);
    let r = s.sigma.iter().filter(|&&x| x > c).count();
    s.u.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` (columns of `b` solved independently).
pub fn lstsq<T: Real>(a: &CMat<T>, b: &CMat<T>, tol: f64) -> CMat<T> {
    pinv(a, tol) * b
}

pub fn pinv<T: Real>(a: &CMat<T>, tol: f64) -> CMat<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return CMat::<T>::zeros(n, m);
    }
    let s = full_svd(a);
    let c = cutoff(&s.sigma, tol);
    let mut out = CMat::<T>::zeros(n, m);
    for (i, &sv) in s.sigma.iter().enumerate() {
        if sv > c {
            let ui = s.u.column(i);
            let vi = s.v.column(i);
            out += (vi * ui.adjoint()).map(|z| z / Complex::new(sv, T::zero()));
        }
    }
    out
}

pub fn projector<T: Real>(q: &CMat<T>) -> CMat<T> {
    q * q.adjoint()
}

/// Frobenius distance between the orthogonal projectors onto two subspaces.
pub fn subspace_distance<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    (projector(a) - projector(b)).norm()
}

/// Residual `‖(I − P_outer) inner‖_F`; zero iff `span(inner) ⊆ span(outer)`.
pub fn containment_residual<T: Real>(outer: &CMat<T>, inner: &CMat<T>) -> T {
    if inner.ncols() == 0 {
        return T::zero();
    }
    (inner - outer * (outer.adjoint() * inner)).norm()
}

/// Orthonormal basis of `span(outer) ∩ span(sub)^⊥`, assuming `sub ⊆ outer`.
pub fn complement_in<T: Real>(outer: &CMat<T>, sub: &CMat<T>, tol: f64) -> CMat<T> {
    let rest = outer - sub * (sub.adjoint() * outer);
    image(&rest, tol)
}

/// Orthonormal basis of `span(a) + span(b)`.
pub fn span_sum<T: Real>(a: &CMat<T>, b: &CMat<T>, tol: f64) -> CMat<T> {
    image(&hcat(&[a.clone(), b.clone()], a.nrows()), tol)
}

/// Orthonormal basis of `span(a) ∩ span(b)`.
pub fn intersection<T: Real>(a: &CMat<T>, b: &CMat<T>, tol: f64) -> CMat<T> {
    let d = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return CMat::<T>::zeros(d, 0);
    }
    // x ∈ span(a) with (I − P_b) x = 0
    let pb = projector(b);
    let m = (CMat::<T>::identity(d, d) - pb) * a;
    let k = kernel(&m, tol);
    image(&(a * k), tol)
}

/// Basis-independent representative of a subspace: column-pivoted
/// Gram–Schmidt on the projector's columns, reported in pivot order.
pub fn canonical_basis<T: Real>(q: &CMat<T>) -> CMat<T> {
    let (d, m) = q.shape();
    if m == 0 {
        return CMat::<T>::zeros(d, 0);
    }
    let p = projector(q);
    let mut residual = p.clone();
    let mut chosen: Vec<(usize, CVec<T>)> = Vec::with_capacity(m);
    let mut used = vec![false; d];
    for _ in 0..m {
        let mut best = None;
        let mut best_norm = T::zero();
        for j in 0..d {
            if used[j] {
                continue;
            }
            let nj = residual.column(j).norm();
            if nj > best_norm + lit::<T>(1e-12) {
                best_norm = nj;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        used[j] = true;
        let mut v: CVec<T> = residual.column(j).into_owned();
        // second pass against already chosen vectors
        for (_, w) in &chosen {
            let c = w.dotc(&v);
            v -= w * c;
        }
        let nv = v.norm();
        if nv <= T::zero() {
            break;
        }
        v /= Complex::new(nv, T::zero());
        for c in 0..d {
            let col = residual.column(c).into_owned();
            let coef = v.dotc(&col);
            residual.column_mut(c).axpy(-coef, &v, Complex::new(T::one(), T::zero()));
        }
        chosen.push((j, v));
    }
    chosen.sort_by_key(|(j, _)| *j);
    let mut out = CMat::<T>::zeros(d, chosen.len());
    for (c, (_, v)) in chosen.iter().enumerate() {
        out.column_mut(c).copy_from(v);
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig<T: Real>(a: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::<T>::zeros(0, 0));
    }
    let sym = (a + a.adjoint()).map(|z| z * Complex::new(lit::<T>(0.5), T::zero()));
    let e = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        e.eigenvalues[i]
            .partial_cmp(&e.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = CMat::<T>::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.column_mut(c).copy_from(&e.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Spectral data of a Hermitian PSD operator: kernel basis and Green operator
/// (inverse on the orthogonal complement of the kernel, zero on the kernel).
pub struct Spectral<T: Real> {
    pub eigenvalues: Vec<T>,
    pub kernel: CMat<T>,
    pub green: CMat<T>,
}

pub fn kernel_threshold<T: Real>(eigenvalues: &[T], tol: f64) -> T {
    let lmax = eigenvalues
        .iter()
        .fold(T::zero(), |acc, &x| acc.max(x.abs()));
    lit::<T>(tol) * (T::one() + lmax)
}

pub fn spectral<T: Real>(a: &CMat<T>, tol: f64) -> Spectral<T> {
    let n = a.nrows();
    let (vals, vecs) = herm_eig(a);
    let thr = kernel_threshold(&vals, tol);
    let mut green = CMat::<T>::zeros(n, n);
    let mut kcols = Vec::new();
    for (i, &l) in vals.iter().enumerate() {
        let v = vecs.column(i);
        if l < thr {
            kcols.push(i);
        } else {
            green += (v * v.adjoint()).map(|z| z / Complex::new(l, T::zero()));
        }
    }
    let mut kernel = CMat::<T>::zeros(n, kcols.len());
    for (c, &i) in kcols.iter().enumerate() {
        kernel.column_mut(c).copy_from(&vecs.column(i));
    }
    Spectral {
        eigenvalues: vals,
        kernel,
        green,
    }
}

/// Horizontal concatenation of blocks with a common row count.
pub fn hcat<T: Real>(blocks: &[CMat<T>], rows: usize) -> CMat<T> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::<T>::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((0, off), (rows, b.ncols())).copy_from(b);
        off += b.ncols();
    }
    out
}

/// Vertical concatenation of blocks with a common column count.
pub fn vcat<T: Real>(blocks: &[CMat<T>], cols: usize) -> CMat<T> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::<T>::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, 0), (b.nrows(), cols)).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Block matrix assembled from `(row_block, col_block, matrix)` entries.
pub struct BlockMatrix<T: Real> {
    row_off: Vec<usize>,
    col_off: Vec<usize>,
    mat: CMat<T>,
}

impl<T: Real> BlockMatrix<T> {
    pub fn new(row_sizes: &[usize], col_sizes: &[usize]) -> Self {
        let row_off = offsets(row_sizes);
        let col_off = offsets(col_sizes);
        let mat = CMat::<T>::zeros(*row_off.last().unwrap(), *col_off.last().unwrap());
        BlockMatrix {
            row_off,
            col_off,
            mat,
        }
    }

    /// Adds `scale · block` at block position `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, block: &CMat<T>, scale: C<T>) {
        let (r0, c0) = (self.row_off[i], self.col_off[j]);
        let (h, w) = (self.row_off[i + 1] - r0, self.col_off[j + 1] - c0);
        assert_eq!(block.shape(), (h, w), "block shape");
        let mut v = self.mat.view_mut((r0, c0), (h, w));
        v += block.map(|z| z * scale);
    }

    pub fn finish(self) -> CMat<T> {
        self.mat
    }
}

pub fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    out.push(0);
    for &s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

/// Largest absolute entry (0 for empty matrices).
pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc.max(crate::scalar::cabs(*z)))
}

/// Spectral norm (largest singular value).
pub fn op_norm<T: Real>(a: &CMat<T>) -> T {
    if a.nrows() == 0 || a.ncols() == 0 {
        return T::zero();
    }
    a.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |acc, &x| acc.max(x))
}

pub fn one<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

pub fn zero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn column_matrix<T: Real>(v: &CVec<T>) -> CMat<T> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn vector_from<T: Real>(m: &CMat<T>) -> CVec<T> {
    DVector::from_column_slice(m.column(0).as_slice())
}
