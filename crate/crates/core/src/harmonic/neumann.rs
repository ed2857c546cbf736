use super::tower::HarmonicTower;
use crate::bicomplex::Bicomplex;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{to_f64, CMat, CVec, Real, Tolerances};
use crate::spectral;

#[derive(Clone, Debug)]
pub struct NeumannSolution<T: Real = f64> {
    /// `u_1, …, u_{r−1}`, `u_l` at `(p+l, q−l)`.
    pub u: Vec<CVec<T>>,
    /// Largest residual of the zigzag equations.
    pub residual: f64,
}

/// `u_l = (Δ̃^(r−l))⁻¹ ∂̄^⋆ ∂ u_{l−1}`, `u_0 = α`, for an E_r-closed `α` at `(p,q)`.
pub fn neumann_tower<T: Real>(
    b: &Bicomplex<T>,
    tower: &HarmonicTower<T>,
    alpha: &CVec<T>,
    p: usize,
    q: usize,
    r: usize,
    tol: &Tolerances,
) -> Result<NeumannSolution<T>> {
    if r == 0 {
        return Err(Error::Domain("page index starts at 1".into()));
    }
    let scale = 1.0 + to_f64(alpha.norm()) * (1.0 + to_f64(b.max_op_norm()));
    let (_, witness_res) = spectral::closed_witness(b, p, q, r, alpha, tol);
    let closed_res = to_f64(witness_res) + to_f64((b.delbar(p as isize, q as isize) * alpha).norm());
    if closed_res > tol.subspace * scale {
        return Err(Error::Precondition {
            what: format!("form at ({p},{q}) is not E_{r}-closed"),
            residual: closed_res,
        });
    }
    let (p, q) = (p as isize, q as isize);
    let mut u: Vec<CVec<T>> = Vec::with_capacity(r.saturating_sub(1));
    let mut prev = alpha.clone();
    for l in 1..r as isize {
        let (a, c) = (p + l, q - l);
        let next = if b.dim(a, c) == 0 {
            CVec::<T>::zeros(0)
        } else {
            let rhs = b.del(a - 1, c + 1) * &prev;
            tower.green(r - l as usize, a, c) * (b.delbar(a, c).adjoint() * rhs)
        };
        u.push(next.clone());
        prev = next;
    }
    let mut residual = 0.0f64;
    let mut prev = alpha.clone();
    for (l, ul) in u.iter().enumerate() {
        let l = l as isize;
        let lhs = b.del(p + l, q - l) * &prev;
        let rhs = b.delbar(p + l + 1, q - l - 1) * ul;
        residual = residual.max(to_f64((lhs - rhs).norm()));
        prev = ul.clone();
    }
    Ok(NeumannSolution { u, residual })
}

/// Orthogonal splitting of `C^{p,q}` at tower level `r`.
#[derive(Clone, Debug)]
pub struct ThreeSpace<T: Real = f64> {
    pub kernel: CMat<T>,
    pub image: CMat<T>,
    pub coimage: CMat<T>,
    /// `‖P_K + P_I + P_C − I‖_F`.
    pub sum_residual: f64,
    /// Largest `‖P_X P_Y‖_F` over distinct pairs.
    pub cross_residual: f64,
    /// Distance between `ker Δ̃^(r+1)` and `ker(p_r∂D_{r−1}) ∩ ker(∂D_{r−1}p_r)^⋆ ∩ ker Δ̃^(r)`.
    pub kernel_identity_residual: f64,
}

impl<T: Real> ThreeSpace<T> {
    pub fn ranks(&self) -> (usize, usize, usize) {
        (self.kernel.ncols(), self.image.ncols(), self.coimage.ncols())
    }
}

/// `ker Δ̃^(r+1) ⊕ (Im ∂̄ + Σ_j Im ∂D_{j−1}p_j) ⊕ (Im ∂̄^⋆ + Σ_j Im (p_j∂D_{j−1})^⋆)`.
pub fn three_space_decomposition<T: Real>(
    b: &Bicomplex<T>,
    tower: &HarmonicTower<T>,
    r: usize,
    p: usize,
    q: usize,
    tol: &Tolerances,
) -> ThreeSpace<T> {
    let (pi, qi) = (p as isize, q as isize);
    let d = b.dim(pi, qi);
    let kernel = tower.harmonic(r + 1, pi, qi);
    let mut img = vec![b.delbar(pi, qi - 1)];
    let mut coimg = vec![b.delbar(pi, qi).adjoint()];
    for j in 1..=r {
        img.push(tower.incoming(j, pi, qi));
        coimg.push(tower.outgoing(j, pi, qi).adjoint());
    }
    let image = linalg::image(&linalg::hcat(&img, d), tol.rank);
    let coimage = linalg::image(&linalg::hcat(&coimg, d), tol.rank);
    let (pk, pim, pco) = (
        linalg::projector(&kernel),
        linalg::projector(&image),
        linalg::projector(&coimage),
    );
    let sum_residual = to_f64((&pk + &pim + &pco - CMat::<T>::identity(d, d)).norm());
    let cross_residual = [(&pk * &pim).norm(), (&pk * &pco).norm(), (&pim * &pco).norm()]
        .into_iter()
        .map(to_f64)
        .fold(0.0, f64::max);
    let kernel_identity_residual = if r == 0 {
        let alt = linalg::kernel(&linalg::vcat(&[b.delbar(pi, qi), b.delbar(pi, qi - 1).adjoint()], d), tol.rank);
        to_f64(linalg::subspace_distance(&kernel, &alt))
    } else {
        let stacked = linalg::vcat(
            &[
                tower.outgoing(r, pi, qi),
                tower.incoming(r, pi, qi).adjoint(),
                tower.lap(r, pi, qi),
            ],
            d,
        );
        let alt = linalg::kernel(&stacked, tol.rank);
        to_f64(linalg::subspace_distance(&kernel, &alt))
    };
    ThreeSpace {
        kernel,
        image,
        coimage,
        sum_residual,
        cross_residual,
        kernel_identity_residual,
    }
}
