use super::metric::HermitianComplex;
use super::tower::HarmonicTower;
use crate::bicomplex::Bicomplex;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMat, Real, Tolerances, C};

/// `Δ″ = ∂̄∂̄^⋆ + ∂̄^⋆∂̄` at `(p,q)`.
pub fn delbar_laplacian<T: Real>(b: &Bicomplex<T>, p: usize, q: usize) -> CMat<T> {
    let (p, q) = (p as isize, q as isize);
    let inc = b.delbar(p, q - 1);
    let out = b.delbar(p, q);
    &inc * inc.adjoint() + out.adjoint() * &out
}

/// `Δ′ = ∂∂^⋆ + ∂^⋆∂` at `(p,q)`.
pub fn del_laplacian<T: Real>(b: &Bicomplex<T>, p: usize, q: usize) -> CMat<T> {
    let (p, q) = (p as isize, q as isize);
    let inc = b.del(p - 1, q);
    let out = b.del(p, q);
    &inc * inc.adjoint() + out.adjoint() * &out
}

/// `Δ_h = d_h d_h^⋆ + d_h^⋆ d_h` on total degree `k`.
pub fn laplacian_h<T: Real>(b: &Bicomplex<T>, h: C<T>, k: usize) -> CMat<T> {
    let inc = b.d_h_or_empty(h, k as isize - 1);
    let out = b.d_h_or_empty(h, k as isize);
    &inc * inc.adjoint() + out.adjoint() * &out
}

type Block<T> = ((isize, isize), CMat<T>);

/// Operator from total degree `k` to `k+1` assembled from bidegree blocks.
fn total_op<T: Real, F>(b: &Bicomplex<T>, k: isize, parts: F) -> CMat<T>
where
    F: Fn(isize, isize) -> Vec<Block<T>>,
{
    let g = &b.grading;
    let max = g.max_degree() as isize;
    let rows = if k + 1 >= 0 { g.total((k + 1) as usize) } else { 0 };
    if k < 0 || k > max {
        return CMat::<T>::zeros(rows, 0);
    }
    let src = g.layout(k as usize);
    let tgt = g.layout((k + 1) as usize);
    let mut out = CMat::<T>::zeros(rows, g.total(k as usize));
    for s in &src {
        for ((tp, tq), m) in parts(s.p as isize, s.q as isize) {
            if m.nrows() == 0 || m.ncols() == 0 {
                continue;
            }
            let t = tgt
                .iter()
                .find(|t| t.p as isize == tp && t.q as isize == tq)
                .expect("target bidegree in layout");
            let mut v = out.view_mut((t.offset, s.offset), (t.len, s.len));
            v += m;
        }
    }
    out
}

fn kernel_projector<T: Real>(a: &CMat<T>, tol: &Tolerances) -> CMat<T> {
    linalg::projector(&linalg::spectral(a, tol.kernel).kernel)
}

/// `Δ̃_h = (∂p″ + h∂̄p′)(…)^⋆ + (p″∂ + hp′∂̄)^⋆(…) + Δ_h` with `p′`, `p″` from
/// `ker Δ′`, `ker Δ″` directly.
pub fn tilde_laplacian_2_h<T: Real>(b: &Bicomplex<T>, h: C<T>, k: usize, tol: &Tolerances) -> CMat<T> {
    let n = b.n();
    let proj = |lap: fn(&Bicomplex<T>, usize, usize) -> CMat<T>| -> Vec<Vec<CMat<T>>> {
        (0..=n)
            .map(|p| (0..=n).map(|q| kernel_projector(&lap(b, p, q), tol)).collect())
            .collect()
    };
    let pdd = proj(delbar_laplacian);
    let pd = proj(del_laplacian);
    let at = |t: &Vec<Vec<CMat<T>>>, p: isize, q: isize| {
        if p < 0 || q < 0 || p as usize > n || q as usize > n {
            CMat::<T>::zeros(0, 0)
        } else {
            t[p as usize][q as usize].clone()
        }
    };
    let hs = |m: CMat<T>| m.map(|z| z * h);
    let a = total_op(b, k as isize - 1, |p, q| {
        vec![
            ((p + 1, q), b.del(p, q) * at(&pdd, p, q)),
            ((p, q + 1), hs(b.delbar(p, q) * at(&pd, p, q))),
        ]
    });
    let bb = total_op(b, k as isize, |p, q| {
        vec![
            ((p + 1, q), at(&pdd, p + 1, q) * b.del(p, q)),
            ((p, q + 1), hs(at(&pd, p, q + 1) * b.delbar(p, q))),
        ]
    });
    &a * a.adjoint() + bb.adjoint() * &bb + laplacian_h(b, h, k)
}

/// `Δ̃^(r)_h` on total degree `k`: `Δ_h` plus, for `s = 1..r−1`, the terms built
/// from `∂D_{s−1}p_s + h∂̄D̄_{s−1}p̄_s` and `p_s∂D_{s−1} + hp̄_s∂̄D̄_{s−1}`.
pub fn tilde_laplacian_r_h<T: Real>(
    hc: &HermitianComplex<T>,
    tower: &HarmonicTower<T>,
    r: usize,
    h: C<T>,
    k: usize,
) -> Result<CMat<T>> {
    let b = &hc.bicomplex;
    if r == 0 {
        return Err(Error::Domain("tower level starts at 1".into()));
    }
    let mut acc = laplacian_h(b, h, k);
    if r == 1 {
        return Ok(acc);
    }
    let conj = hc.conj()?;
    let hs = |m: CMat<T>| m.map(|z| z * h);
    for s in 1..r {
        let si = s as isize;
        // p̄_s and D̄_{s−1} at (a,b), as conjugates of the mirrored operators
        let pbar = |a: isize, c: isize| {
            conj.operator_ext(&tower.projector(s, c, a), (c, a), (c, a))
        };
        let dbar_op = |a: isize, c: isize| {
            conj.operator_ext(&tower.d_op(s - 1, c, a), (c, a), (c + si - 1, a - si + 1))
        };
        let a_op = total_op(b, k as isize - 1, |p, q| {
            let conj_part = if b.dim(p - si + 1, q + si) > 0 {
                hs(b.delbar(p - si + 1, q + si - 1) * dbar_op(p, q) * pbar(p, q))
            } else {
                CMat::<T>::zeros(0, 0)
            };
            vec![
                ((p + si, q - si + 1), tower.del_d_p(s, p, q)),
                ((p - si + 1, q + si), conj_part),
            ]
        });
        let b_op = total_op(b, k as isize, |p, q| {
            let conj_part = if b.dim(p - si + 1, q + si) > 0 {
                hs(pbar(p - si + 1, q + si) * b.delbar(p - si + 1, q + si - 1) * dbar_op(p, q))
            } else {
                CMat::<T>::zeros(0, 0)
            };
            vec![
                ((p + si, q - si + 1), tower.outgoing(s, p, q)),
                ((p - si + 1, q + si), conj_part),
            ]
        });
        acc += &a_op * a_op.adjoint() + b_op.adjoint() * &b_op;
    }
    Ok(acc)
}
