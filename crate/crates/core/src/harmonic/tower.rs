use super::laplacian::delbar_laplacian;
use crate::bicomplex::Bicomplex;
use crate::linalg;
use crate::scalar::{CMat, Real, Tolerances};

#[derive(Clone, Debug)]
struct Level<T: Real> {
    lap: Vec<Vec<CMat<T>>>,
    harmonic: Vec<Vec<CMat<T>>>,
    projector: Vec<Vec<CMat<T>>>,
    green: Vec<Vec<CMat<T>>>,
}

/// `H_1 ⊇ H_2 ⊇ … ⊇ H_{r_max}` at `h = 0`, with `p_r`, `D_{r−1}`, `d_r^(ω)`
/// and `Δ̃^(r)` per bidegree.
#[derive(Clone, Debug)]
pub struct HarmonicTower<T: Real = f64> {
    pub n: usize,
    pub r_max: usize,
    /// Set when the requested depth exceeded `n + 1`.
    pub clamped: bool,
    levels: Vec<Level<T>>,
    /// `d_ops[j][p][q] = D_j: (p,q) → (p+j, q−j)`.
    d_ops: Vec<Vec<Vec<CMat<T>>>>,
    del: Vec<Vec<CMat<T>>>,
    dims: Vec<Vec<usize>>,
}

fn inside(n: usize, p: isize, q: isize) -> bool {
    p >= 0 && q >= 0 && p as usize <= n && q as usize <= n
}

impl<T: Real> HarmonicTower<T> {
    pub fn new(b: &Bicomplex<T>, r_max: usize, tol: &Tolerances) -> Self {
        assert!(r_max >= 1, "tower depth starts at 1");
        let n = b.n();
        let clamped = r_max > n + 1;
        let r_max = r_max.min(n + 1);
        let dims: Vec<Vec<usize>> = (0..=n)
            .map(|p| (0..=n).map(|q| b.dim(p as isize, q as isize)).collect())
            .collect();
        let del = (0..=n)
            .map(|p| (0..=n).map(|q| b.del(p as isize, q as isize)).collect())
            .collect();
        let mut tower = HarmonicTower {
            n,
            r_max,
            clamped,
            levels: Vec::with_capacity(r_max),
            d_ops: Vec::with_capacity(r_max),
            del,
            dims,
        };
        let first = tower.grid(|p, q| delbar_laplacian(b, p, q));
        tower.push_level(first, tol);
        tower.d_ops.push(tower.grid(|p, q| {
            let d = b.dim(p as isize, q as isize);
            CMat::<T>::identity(d, d)
        }));
        for r in 1..r_max {
            if r >= 2 {
                let next = tower.next_d_op(b, r);
                tower.d_ops.push(next);
            }
            let lap = tower.grid(|p, q| {
                let (pi, qi) = (p as isize, q as isize);
                let x = tower.incoming(r, pi, qi);
                let y = tower.outgoing(r, pi, qi);
                &x * x.adjoint() + y.adjoint() * &y + tower.lap(r, pi, qi)
            });
            tower.push_level(lap, tol);
        }
        // d_r^(ω) at the top level needs D_{r_max−1}
        if r_max >= 2 {
            let next = tower.next_d_op(b, r_max);
            tower.d_ops.push(next);
        }
        tower
    }

    /// `D_{r−1}(p,q) = D_{r−2}(p+1,q−1) · G_{r−1}(p+1,q−1) ∂̄^⋆ ∂`.
    fn next_d_op(&self, b: &Bicomplex<T>, r: usize) -> Vec<Vec<CMat<T>>> {
        let n = self.n;
        self.grid(|p, q| {
            let (pi, qi) = (p as isize, q as isize);
            if !inside(n, pi + 1, qi - 1) {
                return CMat::<T>::zeros(b.dim(pi + r as isize - 1, qi - r as isize + 1), b.dim(pi, qi));
            }
            let step = self.green(r - 1, pi + 1, qi - 1) * b.delbar(pi + 1, qi - 1).adjoint() * b.del(pi, qi);
            self.d_op(r - 2, pi + 1, qi - 1) * step
        })
    }

    fn grid<F: Fn(usize, usize) -> CMat<T> + Sync>(&self, f: F) -> Vec<Vec<CMat<T>>> {
        use rayon::prelude::*;
        let n = self.n;
        let flat: Vec<CMat<T>> = (0..(n + 1) * (n + 1))
            .into_par_iter()
            .map(|i| f(i / (n + 1), i % (n + 1)))
            .collect();
        let mut it = flat.into_iter();
        (0..=n).map(|_| (0..=n).map(|_| it.next().unwrap()).collect()).collect()
    }

    fn push_level(&mut self, lap: Vec<Vec<CMat<T>>>, tol: &Tolerances) {
        let n = self.n;
        let mut harmonic = Vec::with_capacity(n + 1);
        let mut projector = Vec::with_capacity(n + 1);
        let mut green = Vec::with_capacity(n + 1);
        for row in &lap {
            let mut hr = Vec::new();
            let mut pr = Vec::new();
            let mut gr = Vec::new();
            for a in row {
                let s = linalg::spectral(a, tol.kernel);
                let hb = linalg::canonical_basis(&s.kernel);
                pr.push(linalg::projector(&hb));
                hr.push(hb);
                gr.push(s.green);
            }
            harmonic.push(hr);
            projector.push(pr);
            green.push(gr);
        }
        self.levels.push(Level {
            lap,
            harmonic,
            projector,
            green,
        });
    }

    fn dim(&self, p: isize, q: isize) -> usize {
        if inside(self.n, p, q) {
            self.dims[p as usize][q as usize]
        } else {
            0
        }
    }

    fn level(&self, r: usize) -> &Level<T> {
        assert!(r >= 1, "tower levels start at 1");
        &self.levels[r.min(self.levels.len()) - 1]
    }

    fn pick(&self, table: &[Vec<CMat<T>>], p: isize, q: isize) -> CMat<T> {
        if inside(self.n, p, q) {
            table[p as usize][q as usize].clone()
        } else {
            CMat::<T>::zeros(0, 0)
        }
    }

    /// `Δ̃^(r)` at `(p,q)`.
    pub fn lap(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        self.pick(&self.level(r).lap, p, q)
    }

    /// Orthonormal basis of `H_r^{p,q} = ker Δ̃^(r)`.
    pub fn harmonic(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        if inside(self.n, p, q) {
            self.level(r).harmonic[p as usize][q as usize].clone()
        } else {
            CMat::<T>::zeros(0, 0)
        }
    }

    /// Orthogonal projection `p_r` onto `H_r` at `(p,q)`.
    pub fn projector(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        self.pick(&self.level(r).projector, p, q)
    }

    /// Green operator of `Δ̃^(r)` at `(p,q)`.
    pub fn green(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        self.pick(&self.level(r).green, p, q)
    }

    /// `D_j: (p,q) → (p+j, q−j)`.
    pub fn d_op(&self, j: usize, p: isize, q: isize) -> CMat<T> {
        let (tp, tq) = (p + j as isize, q - j as isize);
        let shape = (self.dim(tp, tq), self.dim(p, q));
        if shape.0 == 0 || shape.1 == 0 {
            return CMat::<T>::zeros(shape.0, shape.1);
        }
        assert!(j < self.d_ops.len(), "D_{j} needs a deeper tower");
        self.d_ops[j][p as usize][q as usize].clone()
    }

    fn del(&self, p: isize, q: isize) -> CMat<T> {
        if inside(self.n, p, q) {
            self.del[p as usize][q as usize].clone()
        } else {
            CMat::<T>::zeros(self.dim(p + 1, q), 0)
        }
    }

    /// `∂ D_{r−1} p_r` from `(p−r, q+r−1)` into `(p,q)`.
    pub fn incoming(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        let (sp, sq) = (p - r as isize, q + r as isize - 1);
        self.del_d_p(r, sp, sq)
    }

    /// `∂ D_{r−1} p_r` out of `(p,q)` into `(p+r, q−r+1)`.
    pub fn del_d_p(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        let (tp, tq) = (p + r as isize, q - r as isize + 1);
        let shape = (self.dim(tp, tq), self.dim(p, q));
        if shape.0 == 0 || shape.1 == 0 {
            return CMat::<T>::zeros(shape.0, shape.1);
        }
        self.del(p + r as isize - 1, q - r as isize + 1) * self.d_op(r - 1, p, q) * self.projector(r, p, q)
    }

    /// `p_r ∂ D_{r−1}` out of `(p,q)` into `(p+r, q−r+1)`.
    pub fn outgoing(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        let (tp, tq) = (p + r as isize, q - r as isize + 1);
        let shape = (self.dim(tp, tq), self.dim(p, q));
        if shape.0 == 0 || shape.1 == 0 {
            return CMat::<T>::zeros(shape.0, shape.1);
        }
        self.projector(r, tp, tq) * self.del(p + r as isize - 1, q - r as isize + 1) * self.d_op(r - 1, p, q)
    }

    /// `d_r^(ω) = p_r ∂ D_{r−1} p_r: (p,q) → (p+r, q−r+1)`.
    pub fn d_omega(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        let o = self.outgoing(r, p, q);
        if o.ncols() == 0 || o.nrows() == 0 {
            return o;
        }
        o * self.projector(r, p, q)
    }

    /// `d_r^(ω)` restricted to `H_r` bases on both sides.
    pub fn d_omega_harmonic(&self, r: usize, p: isize, q: isize) -> CMat<T> {
        let src = self.harmonic(r, p, q);
        let (tp, tq) = (p + r as isize, q - r as isize + 1);
        let tgt = self.harmonic(r, tp, tq);
        if tgt.nrows() == 0 || src.nrows() == 0 {
            return CMat::<T>::zeros(tgt.ncols(), src.ncols());
        }
        tgt.adjoint() * self.d_omega(r, p, q) * src
    }

    pub fn dims(&self, r: usize) -> Vec<Vec<usize>> {
        self.level(r)
            .harmonic
            .iter()
            .map(|row| row.iter().map(|h| h.ncols()).collect())
            .collect()
    }
}
