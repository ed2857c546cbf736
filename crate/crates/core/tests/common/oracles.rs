//! Independent reference computations used only by tests. They work on the
//! total complex with plain SVDs and share no code with the library's
//! zigzag, tower or Green-operator routines.
#![allow(dead_code)]

use hdeform_core::bicomplex::Bicomplex;
use nalgebra::{Complex, DMatrix, DVector};

pub type M = DMatrix<Complex<f64>>;
pub type V = DVector<Complex<f64>>;

const CUT: f64 = 1e-9;

fn svd_parts(a: &M) -> (Vec<f64>, M, M) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (vec![], M::zeros(m, 0), M::identity(n, n));
    }
    let rows = m.max(n);
    let mut pad = M::zeros(rows, n);
    pad.view_mut((0, 0), (m, n)).copy_from(a);
    let s = pad.svd(true, true);
    let mut idx: Vec<usize> = (0..s.singular_values.len()).collect();
    idx.sort_by(|&i, &j| s.singular_values[j].partial_cmp(&s.singular_values[i]).unwrap());
    let u = s.u.unwrap();
    let vt = s.v_t.unwrap();
    let sig = idx.iter().map(|&i| s.singular_values[i]).collect();
    let uu = M::from_fn(m, idx.len(), |r, c| u[(r, idx[c])]);
    let vv = M::from_fn(n, idx.len(), |r, c| vt[(idx[c], r)].conj());
    (sig, uu, vv)
}

fn cutoff(sig: &[f64]) -> f64 {
    CUT * sig.first().copied().unwrap_or(0.0).max(1.0)
}

pub fn rank(a: &M) -> usize {
    let (s, _, _) = svd_parts(a);
    let c = cutoff(&s);
    s.iter().filter(|&&x| x > c).count()
}

pub fn kernel(a: &M) -> M {
    let n = a.ncols();
    if a.nrows() == 0 {
        return M::identity(n, n);
    }
    let (s, _, v) = svd_parts(a);
    let c = cutoff(&s);
    let r = s.iter().filter(|&&x| x > c).count();
    v.columns(r, n - r).into_owned()
}

pub fn orth(a: &M) -> M {
    let (s, u, _) = svd_parts(a);
    let c = cutoff(&s);
    let r = s.iter().filter(|&&x| x > c).count();
    u.columns(0, r).into_owned()
}

pub fn pinv_solve(a: &M, b: &V) -> V {
    let (s, u, v) = svd_parts(a);
    let c = cutoff(&s);
    let mut x = V::zeros(a.ncols());
    for (i, &sv) in s.iter().enumerate() {
        if sv > c {
            let coef = u.column(i).dotc(b) / Complex::new(sv, 0.0);
            x += v.column(i) * coef;
        }
    }
    x
}

fn hstack(a: &M, b: &M) -> M {
    let mut out = M::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Total differential `d: C^k → C^{k+1}` built from the raw bidegree blocks.
pub fn total_d(b: &Bicomplex<f64>, k: usize) -> M {
    let g = &b.grading;
    let src = g.layout(k);
    let tgt = g.layout(k + 1);
    let mut d = M::zeros(g.total(k + 1), g.total(k));
    for s in &src {
        for t in &tgt {
            let blk = if t.p == s.p + 1 {
                b.del(s.p as isize, s.q as isize)
            } else if t.p == s.p {
                b.delbar(s.p as isize, s.q as isize)
            } else {
                continue;
            };
            if blk.nrows() > 0 && blk.ncols() > 0 {
                d.view_mut((t.offset, s.offset), blk.shape()).copy_from(&blk);
            }
        }
    }
    d
}

/// Betti numbers by rank–nullity of the total differential.
pub fn betti(b: &Bicomplex<f64>) -> Vec<usize> {
    let g = &b.grading;
    let top = g.max_degree();
    (0..=top)
        .map(|k| {
            let out = if k < top { rank(&total_d(b, k)) } else { 0 };
            let inc = if k > 0 { rank(&total_d(b, k - 1)) } else { 0 };
            g.total(k) - out - inc
        })
        .collect()
}

/// Columns selecting `F^p C^k = ⊕_{p' ≥ p} C^{p',k−p'}`.
fn filtration(b: &Bicomplex<f64>, k: usize, p: isize) -> M {
    let g = &b.grading;
    let dim = g.total(k);
    let cols: Vec<usize> = g
        .layout(k)
        .iter()
        .filter(|s| s.p as isize >= p)
        .flat_map(|s| s.offset..s.offset + s.len)
        .collect();
    M::from_fn(dim, cols.len(), |r, c| {
        if r == cols[c] { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
    })
}

/// Rows of a degree-`k` vector with filtration index below `p`.
fn below(b: &Bicomplex<f64>, k: usize, p: isize) -> M {
    let g = &b.grading;
    let rows: Vec<usize> = g
        .layout(k)
        .iter()
        .filter(|s| (s.p as isize) < p)
        .flat_map(|s| s.offset..s.offset + s.len)
        .collect();
    M::from_fn(rows.len(), g.total(k), |r, c| {
        if c == rows[r] { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
    })
}

fn d_or_empty(b: &Bicomplex<f64>, k: isize) -> M {
    let g = &b.grading;
    if k < 0 {
        return M::zeros(g.total(0), 0);
    }
    if k as usize >= g.max_degree() {
        return M::zeros(0, g.total(k as usize));
    }
    total_d(b, k as usize)
}

/// Basis (in `C^k` coordinates) of `Z_r^p = {x ∈ F^p C^k : dx ∈ F^{p+r}}`.
fn z_space(b: &Bicomplex<f64>, k: isize, p: isize, r: isize) -> M {
    let g = &b.grading;
    if k < 0 || k as usize > g.max_degree() {
        return M::zeros(0, 0);
    }
    let f = filtration(b, k as usize, p);
    let d = d_or_empty(b, k);
    let cond = if (k as usize) < g.max_degree() {
        below(b, k as usize + 1, p + r) * d * &f
    } else {
        M::zeros(0, f.ncols())
    };
    &f * kernel(&cond)
}

/// `dim E_r^{p,q}` from the filtered total complex:
/// `Z_r^p / (Z_{r−1}^{p+1} + d Z_{r−1}^{p−r+1})`.
pub fn filtration_page_dim(b: &Bicomplex<f64>, r: usize, p: usize, q: usize) -> usize {
    let (k, pi, ri) = ((p + q) as isize, p as isize, r as isize);
    let z = z_space(b, k, pi, ri);
    let z_next = z_space(b, k, pi + 1, ri - 1);
    let prev = z_space(b, k - 1, pi - ri + 1, ri - 1);
    let dz = if prev.ncols() > 0 { d_or_empty(b, k - 1) * prev } else { M::zeros(z.nrows(), 0) };
    let denom = hstack(&z_next, &dz);
    rank(&z) - rank(&denom)
}

/// Sequentially minimal zigzag potentials: for each `l`, the min-norm `u_l`
/// among all choices that still extend to a full solution.
pub fn neumann_oracle(b: &Bicomplex<f64>, alpha: &V, p: usize, q: usize, r: usize) -> Vec<V> {
    let (p, q) = (p as isize, q as isize);
    let mut chain = vec![alpha.clone()];
    for l in 1..r as isize {
        // unknowns u_l..u_{r−1}; equations ∂̄u_l = ∂u_{l−1}, ∂u_j − ∂̄u_{j+1} = 0
        let vars: Vec<(isize, isize)> = (l..r as isize).map(|j| (p + j, q - j)).collect();
        let sizes: Vec<usize> = vars.iter().map(|&(a, c)| b.dim(a, c)).collect();
        let rows: Vec<usize> = vars.iter().map(|&(a, c)| b.dim(a, c + 1)).collect();
        let (nr, nc): (usize, usize) = (rows.iter().sum(), sizes.iter().sum());
        let mut s = M::zeros(nr, nc);
        let mut rhs = V::zeros(nr);
        let mut ro = 0;
        let mut co = 0;
        for (i, &(a, c)) in vars.iter().enumerate() {
            let dbar = b.delbar(a, c);
            if dbar.nrows() > 0 && dbar.ncols() > 0 {
                s.view_mut((ro, co), dbar.shape()).copy_from(&dbar);
            }
            if i == 0 {
                let prev = chain.last().unwrap();
                let dprev = b.del(a - 1, c + 1) * prev;
                if rows[0] > 0 {
                    rhs.rows_mut(0, rows[0]).copy_from(&dprev);
                }
            }
            if i + 1 < vars.len() {
                let (a1, c1) = vars[i + 1];
                let del = b.del(a1 - 1, c1 + 1);
                // next row block: ∂̄u_{i+1} − ∂u_i = 0
                let r1 = ro + rows[i];
                if del.nrows() > 0 && del.ncols() > 0 {
                    let mut v = s.view_mut((r1, co), del.shape());
                    v -= &del;
                }
            }
            ro += rows[i];
            co += sizes[i];
        }
        let x = pinv_solve(&s, &rhs);
        let ul = x.rows(0, sizes[0]).into_owned();
        let homog = kernel(&s);
        let zb = orth(&homog.rows(0, sizes[0]).into_owned());
        let proj = &ul - &zb * (zb.adjoint() * &ul);
        chain.push(proj);
    }
    chain.into_iter().skip(1).collect()
}

/// Whether a d-closed 2-form is cohomologous to a pure (1,1)-form:
/// least-squares residual of `(α + dβ)^{2,0} = (α + dβ)^{0,2} = 0`.
pub fn type_one_one_residual(b: &Bicomplex<f64>, alpha: &V) -> f64 {
    let g = &b.grading;
    let d1 = total_d(b, 1);
    let rows: Vec<usize> = g
        .layout(2)
        .iter()
        .filter(|s| s.p != 1)
        .flat_map(|s| s.offset..s.offset + s.len)
        .collect();
    let sel = M::from_fn(rows.len(), g.total(2), |r, c| {
        if c == rows[r] { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
    });
    let a = &sel * d1;
    let rhs = -(&sel * alpha);
    let x = pinv_solve(&a, &rhs);
    (&a * x - rhs).norm()
}
