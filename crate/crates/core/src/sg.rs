//! Gauduchon and E_r-sG tests for invariant Hermitian metrics, the
//! (n−1)-st root of positive (n−1,n−1)-forms, and family scans.

use crate::bicomplex::Form;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{ExteriorModel, FamilySpec};
use crate::scalar::{cabs, lit, to_f64, CMat, CVec, Real, Tolerances, C};
use crate::spectral::{self, ExactnessWitness};
use nalgebra::Complex;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Coefficients of `γ = i Σ g_{jk̄} φ^j ∧ φ̄^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMetric<T: Real = f64> {
    pub g: CMat<T>,
}

impl<T: Real> HermitianMetric<T> {
    pub fn new(g: CMat<T>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Domain("metric matrix must be square".into()));
        }
        let skew = linalg::max_abs(&(&g - g.adjoint()));
        if to_f64(skew) > 1e-9 * (1.0 + to_f64(linalg::max_abs(&g))) {
            return Err(Error::Domain(format!("metric matrix is not Hermitian ({:.3e})", to_f64(skew))));
        }
        Ok(HermitianMetric { g })
    }

    pub fn identity(n: usize) -> Self {
        HermitianMetric {
            g: CMat::<T>::identity(n, n),
        }
    }

    pub fn min_eigenvalue(&self) -> T {
        linalg::herm_eig(&self.g).0.first().copied().unwrap_or_else(T::zero)
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() > T::zero()
    }

    fn require_positive(&self) -> Result<()> {
        let m = self.min_eigenvalue();
        if m > T::zero() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "metric is not positive definite: smallest eigenvalue {:.3e}",
                to_f64(m)
            )))
        }
    }
}

fn i_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Mask of `φ^j ∧ φ̄^k` (0-based indices).
fn mixed_mask(n: usize, j: usize, k: usize) -> u32 {
    (1u32 << j) | (1u32 << (n + k))
}

/// The (1,1)-form of a coefficient matrix.
pub fn form_of<T: Real>(model: &ExteriorModel<T>, g: &CMat<T>) -> Form<T> {
    let n = model.n();
    let mut out = Form::zero(model.grading(), 2);
    for j in 0..n {
        for k in 0..n {
            if g[(j, k)] != Complex::new(T::zero(), T::zero()) {
                let (_, idx) = model.total_index(mixed_mask(n, j, k));
                out.coeffs[idx] += i_unit::<T>() * g[(j, k)];
            }
        }
    }
    out
}

/// `γ^m`, with `γ^0` the unit.
pub fn power<T: Real>(model: &ExteriorModel<T>, gamma: &HermitianMetric<T>, m: usize) -> Result<Form<T>> {
    if m > model.n() {
        return Err(Error::Domain(format!("exponent {m} exceeds {}", model.n())));
    }
    let g = form_of(model, &gamma.g);
    let mut acc = model.unit();
    for _ in 0..m {
        acc = model.wedge(&acc, &g)?;
    }
    Ok(acc)
}

fn scale_of<T: Real>(model: &ExteriorModel<T>, f: &Form<T>) -> f64 {
    (1.0 + to_f64(f.norm())) * (1.0 + to_f64(model.bicomplex.max_op_norm())).powi(2)
}

/// `∂∂̄γ^{n−1}` as a coefficient vector at `(n,n)`, with `∂γ^{n−1}` at `(n,n−1)`.
fn derivatives<T: Real>(model: &ExteriorModel<T>, gamma: &HermitianMetric<T>) -> Result<(CVec<T>, CVec<T>, f64)> {
    let n = model.n() as isize;
    let b = &model.bicomplex;
    let omega = power(model, gamma, model.n() - 1)?;
    let om = omega.component(model.grading(), (n - 1) as usize);
    let ddbar = b.del(n - 1, n) * (b.delbar(n - 1, n - 1) * &om);
    let del = b.del(n - 1, n - 1) * &om;
    Ok((ddbar, del, scale_of(model, &omega)))
}

pub fn is_gauduchon<T: Real>(model: &ExteriorModel<T>, gamma: &HermitianMetric<T>, tol: &Tolerances) -> Result<bool> {
    gamma.require_positive()?;
    let (ddbar, _, scale) = derivatives(model, gamma)?;
    Ok(to_f64(ddbar.norm()) <= tol.zero * scale)
}

#[derive(Clone, Debug)]
pub struct SgReport<T: Real = f64> {
    pub gauduchon: bool,
    /// Smallest `r ≤ 3` with `∂γ^{n−1}` E_r-exact.
    pub level: Option<usize>,
    pub witness: Option<ExactnessWitness<T>>,
    pub witness_residual: f64,
    /// `∂γ^{n−1}` at `(n, n−1)`.
    pub del_gamma: CVec<T>,
}

pub const MAX_SG_LEVEL: usize = 3;

/// E_r-sG level of a Gauduchon metric.
pub fn sg_level<T: Real>(model: &ExteriorModel<T>, gamma: &HermitianMetric<T>, tol: &Tolerances) -> Result<SgReport<T>> {
    gamma.require_positive()?;
    let (ddbar, del, scale) = derivatives(model, gamma)?;
    let ddbar_res = to_f64(ddbar.norm());
    if ddbar_res > tol.zero * scale {
        return Err(Error::Precondition {
            what: "metric is not Gauduchon".into(),
            residual: ddbar_res,
        });
    }
    let n = model.n();
    for r in 1..=MAX_SG_LEVEL {
        let (w, res) = spectral::exact_witness(&model.bicomplex, n, n - 1, r, &del, tol);
        if res <= tol.zero * scale.max(1.0) * 10.0 {
            return Ok(SgReport {
                gauduchon: true,
                level: Some(r),
                witness: Some(w),
                witness_residual: res,
                del_gamma: del,
            });
        }
    }
    Ok(SgReport {
        gauduchon: true,
        level: None,
        witness: None,
        witness_residual: f64::NAN,
        del_gamma: del,
    })
}

/// Newton solve for `γ` with `γ^{n−1} = Ω`.
pub fn root_n_minus_1<T: Real>(model: &ExteriorModel<T>, omega: &Form<T>) -> Result<HermitianMetric<T>> {
    let n = model.n();
    if n < 2 {
        return Err(Error::Domain("the (n−1)-st root needs n ≥ 2".into()));
    }
    if omega.degree != 2 * (n - 1) {
        return Err(Error::Domain(format!(
            "expected a form of degree {}, got {}",
            2 * (n - 1),
            omega.degree
        )));
    }
    let g0 = model.grading();
    let target = omega.component(g0, n - 1);
    let impure = to_f64(omega.norm() - target.norm()).abs();
    if impure > 1e-10 * (1.0 + to_f64(omega.norm())) {
        return Err(Error::Domain("Ω has components outside bidegree (n−1,n−1)".into()));
    }
    let tnorm = to_f64(target.norm()).max(f64::MIN_POSITIVE);
    let slot = g0.slot(n - 1, n - 1).expect("bidegree");
    let eval = |g: &CMat<T>| -> Result<CVec<T>> {
        let f = power(model, &HermitianMetric { g: g.clone() }, n - 1)?;
        Ok(f.coeffs.rows(slot.offset, slot.len).into_owned())
    };
    let mut g = initial_guess(model, &target, &eval)?;
    let mut res = &target - eval(&g)?;
    let mut trace = vec![to_f64(res.norm()) / tnorm];
    for _ in 0..100 {
        if *trace.last().unwrap() <= 1e-10 {
            let herm = (&g + g.adjoint()).map(|z| z * lit::<T>(0.5));
            return Ok(HermitianMetric { g: herm });
        }
        // J δ = (n−1) γ^{n−2} ∧ δ_form
        let base = power(model, &HermitianMetric { g: g.clone() }, n - 2)?;
        let mut jac = CMat::<T>::zeros(slot.len, n * n);
        for j in 0..n {
            for k in 0..n {
                let (_, idx) = model.total_index(mixed_mask(n, j, k));
                let mut e = Form::zero(g0, 2);
                e.coeffs[idx] = i_unit::<T>() * lit::<T>((n - 1) as f64);
                let w = model.wedge(&base, &e)?;
                jac.column_mut(j * n + k).copy_from(&w.coeffs.rows(slot.offset, slot.len));
            }
        }
        let delta = linalg::lstsq(&jac, &linalg::column_matrix(&res), 1e-12);
        let mut step = T::one();
        let current = res.norm();
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &g + CMat::<T>::from_fn(n, n, |j, k| delta[(j * n + k, 0)] * step);
            let tr = &target - eval(&trial)?;
            if tr.norm() < current {
                g = trial;
                res = tr;
                accepted = true;
                break;
            }
            step *= lit::<T>(0.5);
        }
        trace.push(to_f64(res.norm()) / tnorm);
        if !accepted {
            break;
        }
    }
    if *trace.last().unwrap() <= 1e-10 {
        let herm = (&g + g.adjoint()).map(|z| z * lit::<T>(0.5));
        return Ok(HermitianMetric { g: herm });
    }
    Err(Error::NoRoot {
        iterations: trace.len() - 1,
        last: *trace.last().unwrap(),
        trace,
    })
}

/// Exact root among diagonal metrics, or the identity if that is not positive.
fn initial_guess<T: Real, F>(model: &ExteriorModel<T>, target: &CVec<T>, eval: &F) -> Result<CMat<T>>
where
    F: Fn(&CMat<T>) -> Result<CVec<T>>,
{
    let n = model.n();
    let id = CMat::<T>::identity(n, n);
    let unit_power = eval(&id)?;
    let full = (1u32 << n) - 1;
    let slot = model.grading().slot(n - 1, n - 1).expect("bidegree");
    let mut mu = Vec::with_capacity(n);
    for j in 0..n {
        let rest = full & !(1 << j);
        let (_, idx) = model.total_index(rest | (rest << n));
        let i = idx - slot.offset;
        let ratio = target[i] / unit_power[i];
        if ratio.re <= T::zero() || cabs(Complex::new(T::zero(), ratio.im)) > lit::<T>(1e-9) * (T::one() + ratio.re) {
            return Ok(id);
        }
        mu.push(to_f64(ratio.re));
    }
    let p: f64 = mu.iter().product();
    let prod_lambda = p.powf(1.0 / (n as f64 - 1.0));
    let mut g = CMat::<T>::zeros(n, n);
    for (j, m) in mu.iter().enumerate() {
        g[(j, j)] = Complex::new(lit(prod_lambda / m), T::zero());
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct SgPoint {
    pub t: Complex64,
    pub min_eigenvalue: f64,
    pub positive: bool,
    pub gauduchon: bool,
    pub level: Option<usize>,
    pub root_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySgReport {
    /// Level of `γ_0` on the base fibre, used as the target level along the family.
    pub base_level: Option<usize>,
    pub points: Vec<std::result::Result<SgPoint, String>>,
    /// First grid index where positivity or the Gauduchon property fails.
    pub first_failure: Option<usize>,
}

/// Transports `γ_0^{n−1}` along a family by coefficient identification,
/// re-solves for the nearest form whose `∂_t` is E_r-exact, and takes its root.
pub fn family_sg_scan(
    fam: &FamilySpec,
    gamma0: &HermitianMetric<f64>,
    t_grid: &[Complex64],
    tol: &Tolerances,
) -> Result<FamilySgReport> {
    let base = ExteriorModel::<f64>::build(&fam.at(Complex64::new(0.0, 0.0))?)?;
    let base_report = sg_level(&base, gamma0, tol)?;
    let omega0 = power(&base, gamma0, base.n() - 1)?;
    let r = base_report.level.unwrap_or(MAX_SG_LEVEL);
    let exact_target = base_report.level.is_some();
    let points: Vec<std::result::Result<SgPoint, String>> = t_grid
        .par_iter()
        .map(|&t| family_point(fam, &omega0, r, exact_target, t, tol).map_err(|e| e.to_string()))
        .collect();
    let first_failure = points.iter().position(|p| match p {
        Ok(pt) => !pt.positive || !pt.gauduchon,
        Err(_) => true,
    });
    Ok(FamilySgReport {
        base_level: base_report.level,
        points,
        first_failure,
    })
}

fn family_point(
    fam: &FamilySpec,
    omega0: &Form<f64>,
    r: usize,
    exact_target: bool,
    t: Complex64,
    tol: &Tolerances,
) -> Result<SgPoint> {
    let model = ExteriorModel::<f64>::build(&fam.at(t)?)?;
    let n = model.n();
    let b = &model.bicomplex;
    let (ni, mi) = (n as isize, (n - 1) as isize);
    let om = omega0.component(model.grading(), n - 1);
    // Forms whose ∂ lies in B_r (E_r-sG target) or whose ∂∂̄ vanishes (Gauduchon target).
    let constraint = if exact_target {
        let bsp = spectral::er_exact_space(b, n, n - 1, r, tol);
        let d = b.dim(ni, mi);
        (CMat::<f64>::identity(d, d) - linalg::projector(&bsp)) * b.del(mi, mi)
    } else {
        b.del(mi, ni) * b.delbar(mi, mi)
    };
    let space = linalg::kernel(&constraint, tol.rank);
    let proj = &space * (space.adjoint() * &om);
    let mut cand = Form::pure(model.grading(), n - 1, n - 1, &proj);
    let conj = model.conjugate(&cand);
    cand.coeffs = (&cand.coeffs + &conj.coeffs).map(|z| z * 0.5);
    let gamma = root_n_minus_1(&model, &cand)?;
    let back = power(&model, &gamma, n - 1)?;
    let root_residual = (back.coeffs - &cand.coeffs).norm() / (1.0 + cand.norm());
    let min_eigenvalue = gamma.min_eigenvalue();
    let positive = min_eigenvalue > 0.0;
    let (gauduchon, level) = if positive {
        let gd = is_gauduchon(&model, &gamma, tol)?;
        let lvl = if gd { sg_level(&model, &gamma, tol)?.level } else { None };
        (gd, lvl)
    } else {
        (false, None)
    };
    Ok(SgPoint {
        t,
        min_eigenvalue,
        positive,
        gauduchon,
        level,
        root_residual,
    })
}

/// Scalar check used by reports: `‖dγ^{n−1}‖`.
pub fn balanced_residual<T: Real>(model: &ExteriorModel<T>, gamma: &HermitianMetric<T>) -> Result<f64> {
    let f = power(model, gamma, model.n() - 1)?;
    Ok(to_f64(model.d(&f).norm()))
}
