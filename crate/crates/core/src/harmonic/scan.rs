use super::laplacian::tilde_laplacian_r_h;
use super::metric::HermitianComplex;
use super::tower::HarmonicTower;
use crate::bicomplex::CohomologyKind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{ExteriorModel, FamilySpec};
use crate::scalar::{to_c64, to_f64, Real, Tolerances, C};
use crate::spectral;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct FavbPoint {
    pub h: Complex64,
    pub kernel_dim: usize,
    /// `b_k`-th smallest eigenvalue of `Δ̃^(r)_h` (0 when `b_k = 0`).
    pub lambda_bk: f64,
    /// `(b_k+1)`-th smallest eigenvalue, if the space is large enough.
    pub lambda_bk_plus_1: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FavbScanReport {
    pub k: usize,
    pub r: usize,
    pub betti: usize,
    pub points: Vec<FavbPoint>,
    /// Grid indices where the kernel dimension differs from `b_k`.
    pub jumps: Vec<usize>,
}

impl FavbScanReport {
    pub fn constant(&self) -> bool {
        self.jumps.is_empty()
    }
}

/// Kernel dimensions and eigen-gap of `Δ̃^(r)_h` across an h-grid.
pub fn favb_scan<T: Real>(
    hc: &HermitianComplex<T>,
    k: usize,
    r: usize,
    grid: &[C<T>],
    tol: &Tolerances,
) -> Result<FavbScanReport> {
    let b = &hc.bicomplex;
    if k > b.grading.max_degree() {
        return Err(Error::Domain(format!("degree {k} out of range")));
    }
    let betti = b.cohomology(CohomologyKind::DeRham, k, tol)?.dimension;
    let tower = HarmonicTower::new(b, r.saturating_sub(1).max(1), tol);
    let points: Vec<Result<FavbPoint>> = grid
        .par_iter()
        .map(|&h| {
            let lap = tilde_laplacian_r_h(hc, &tower, r, h, k)?;
            let s = linalg::spectral(&lap, tol.kernel);
            let ev: Vec<f64> = s.eigenvalues.iter().map(|&x| to_f64(x)).collect();
            Ok(FavbPoint {
                h: to_c64(h),
                kernel_dim: s.kernel.ncols(),
                lambda_bk: if betti == 0 { 0.0 } else { ev[betti - 1] },
                lambda_bk_plus_1: ev.get(betti).copied(),
            })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let jumps = points
        .iter()
        .enumerate()
        .filter(|(_, pt)| pt.kernel_dim != betti)
        .map(|(i, _)| i)
        .collect();
    Ok(FavbScanReport {
        k,
        r,
        betti,
        points,
        jumps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyRow {
    pub t: Complex64,
    pub h: Complex64,
    pub kernel_dim: usize,
    pub degen_page: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyScanReport {
    pub k: usize,
    pub rows: Vec<FamilyRow>,
    /// Hodge numbers `h^{p,q}(t)` per t-grid point.
    pub hodge: Vec<Vec<Vec<usize>>>,
    /// Betti number of the base fibre.
    pub betti: usize,
    pub constant_rank: bool,
    /// `h^{p,q}(0) ≥ h^{p,q}(t)` for all grid points (true when `0` is not on the grid).
    pub upper_semicontinuous: bool,
}

/// Fibre dimensions of the relative bundle over an `(h, t)` grid.
pub fn family_scan(
    fam: &FamilySpec,
    k: usize,
    h_grid: &[Complex64],
    t_grid: &[Complex64],
    tol: &Tolerances,
) -> Result<FamilyScanReport> {
    struct Fibre {
        dims: Vec<usize>,
        page: usize,
        hodge: Vec<Vec<usize>>,
    }
    let fibres: Vec<Result<Fibre>> = t_grid
        .par_iter()
        .map(|&t| {
            let spec = fam.at(t)?;
            let model = ExteriorModel::<f64>::build(&spec).map_err(|e| {
                Error::Domain(format!("family point t = {}{:+}i: {e}", t.re, t.im))
            })?;
            let b = &model.bicomplex;
            let degen = spectral::degeneration(b, tol);
            let last = degen.tables.last().expect("page");
            let e_inf = last.totals[k];
            let dims = h_grid
                .iter()
                .map(|&h| {
                    if h.norm() == 0.0 {
                        Ok(e_inf)
                    } else {
                        Ok(b.cohomology(CohomologyKind::DH(h), k, tol)?.dimension)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let e1 = &degen.tables[0];
            let n = spec.n;
            let hodge = (0..=n)
                .map(|p| (0..=n).map(|q| e1.cell(p, q).dim).collect())
                .collect();
            Ok(Fibre {
                dims,
                page: degen.page,
                hodge,
            })
        })
        .collect();
    let fibres = fibres.into_iter().collect::<Result<Vec<_>>>()?;
    let base = ExteriorModel::<f64>::build(&fam.at(Complex64::new(0.0, 0.0))?)?;
    let betti = base.bicomplex.cohomology(CohomologyKind::DeRham, k, tol)?.dimension;
    let mut rows = Vec::new();
    for (t, f) in t_grid.iter().zip(&fibres) {
        for (h, &d) in h_grid.iter().zip(&f.dims) {
            rows.push(FamilyRow {
                t: *t,
                h: *h,
                kernel_dim: d,
                degen_page: f.page,
            });
        }
    }
    let constant_rank = rows.iter().all(|r| r.kernel_dim == betti);
    let zero = t_grid.iter().position(|t| t.norm() == 0.0);
    let upper_semicontinuous = match zero {
        None => true,
        Some(i0) => fibres.iter().all(|f| {
            f.hodge
                .iter()
                .flatten()
                .zip(fibres[i0].hodge.iter().flatten())
                .all(|(a, b0)| b0 >= a)
        }),
    };
    Ok(FamilyScanReport {
        k,
        rows,
        hodge: fibres.into_iter().map(|f| f.hodge).collect(),
        betti,
        constant_rank,
        upper_semicontinuous,
    })
}
