use crate::bicomplex::{Bicomplex, Bigrading};
use crate::error::{Error, Result};
use crate::models::{Conjugation, ExteriorModel};
use crate::linalg;
use crate::scalar::{to_f64, CMat, Real};

/// Hermitian positive-definite Gram matrices, one per bidegree.
#[derive(Clone, Debug)]
pub struct MetricData<T: Real = f64> {
    grams: Vec<Vec<CMat<T>>>,
    /// Lower Cholesky factors `G = L L^H`.
    chol: Vec<Vec<CMat<T>>>,
}

impl<T: Real> MetricData<T> {
    pub fn identity(grading: &Bigrading) -> Self {
        let n = grading.n;
        let grams: Vec<Vec<CMat<T>>> = (0..=n)
            .map(|p| {
                (0..=n)
                    .map(|q| {
                        let d = grading.dim(p as isize, q as isize);
                        CMat::<T>::identity(d, d)
                    })
                    .collect()
            })
            .collect();
        MetricData {
            chol: grams.clone(),
            grams,
        }
    }

    pub fn new(grading: &Bigrading, grams: Vec<Vec<CMat<T>>>) -> Result<Self> {
        let n = grading.n;
        let mut chol = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut row = Vec::with_capacity(n + 1);
            for q in 0..=n {
                let g = &grams[p][q];
                let d = grading.dim(p as isize, q as isize);
                if g.shape() != (d, d) {
                    return Err(Error::Shape {
                        what: "Gram matrix",
                        p,
                        q,
                        expected: (d, d),
                        found: g.shape(),
                    });
                }
                if crate::linalg::max_abs(&(g - g.adjoint())) > T::default_epsilon().sqrt() {
                    return Err(Error::Domain(format!("Gram matrix at ({p},{q}) is not Hermitian")));
                }
                let c = g.clone().cholesky().ok_or_else(|| {
                    Error::Domain(format!("Gram matrix at ({p},{q}) is not positive definite"))
                })?;
                row.push(c.l());
            }
            chol.push(row);
        }
        Ok(MetricData { grams, chol })
    }

    /// Average with the conjugate metric, `(G_{p,q} + C conj(G_{q,p}) C^T) / 2`.
    pub fn symmetrized(&self, grading: &Bigrading, conj: &Conjugation<T>) -> Result<Self> {
        let n = grading.n;
        let half = crate::scalar::cr::<T>(0.5);
        let grams = (0..=n)
            .map(|p| {
                (0..=n)
                    .map(|q| {
                        let c = conj.at(q, p);
                        (&self.grams[p][q] + c * self.grams[q][p].map(|z| z.conj()) * c.transpose()).map(|z| z * half)
                    })
                    .collect()
            })
            .collect();
        MetricData::new(grading, grams)
    }

    pub fn gram(&self, p: usize, q: usize) -> &CMat<T> {
        &self.grams[p][q]
    }

    /// `A^⋆ = G_src⁻¹ A^H G_tgt` for `A: src → tgt`.
    pub fn adjoint(&self, a: &CMat<T>, src: (usize, usize), tgt: (usize, usize)) -> Result<CMat<T>> {
        let gs = &self.grams[src.0][src.1];
        let gt = &self.grams[tgt.0][tgt.1];
        if a.shape() != (gt.nrows(), gs.nrows()) {
            return Err(Error::Shape {
                what: "adjoint operand",
                p: src.0,
                q: src.1,
                expected: (gt.nrows(), gs.nrows()),
                found: a.shape(),
            });
        }
        let gs_inv = gs
            .clone()
            .cholesky()
            .expect("positive definite")
            .inverse();
        Ok(gs_inv * a.adjoint() * gt)
    }

    /// `L_tgt^H A L_src^{-H}`: the operator in coordinates orthonormal for the metric.
    fn whiten_op(&self, a: &CMat<T>, src: (usize, usize), tgt: (usize, usize)) -> CMat<T> {
        let lt = &self.chol[tgt.0][tgt.1];
        let ls = &self.chol[src.0][src.1];
        let ls_inv_h = ls
            .clone()
            .try_inverse()
            .expect("invertible Cholesky factor")
            .adjoint();
        lt.adjoint() * a * ls_inv_h
    }
}

/// A bicomplex in metric-orthonormal coordinates, optionally with conjugation.
#[derive(Clone, Debug)]
pub struct HermitianComplex<T: Real = f64> {
    pub bicomplex: Bicomplex<T>,
    pub conjugation: Option<Conjugation<T>>,
}

impl<T: Real> HermitianComplex<T> {
    /// Orthonormal monomials; keeps the model's conjugation.
    pub fn from_model(model: &ExteriorModel<T>) -> Self {
        HermitianComplex {
            bicomplex: model.bicomplex.clone(),
            conjugation: Some(model.conjugation.clone()),
        }
    }

    /// Abstract bicomplex without conjugation.
    pub fn from_bicomplex(bicomplex: Bicomplex<T>) -> Self {
        HermitianComplex {
            bicomplex,
            conjugation: None,
        }
    }

    /// Re-expresses a model in coordinates orthonormal for `metric`. The metric
    /// must be conjugation-invariant, so the transported conjugation stays unitary.
    pub fn with_metric(model: &ExteriorModel<T>, metric: &MetricData<T>) -> Result<Self> {
        let b = &model.bicomplex;
        let n = b.n();
        let mut out = b.clone();
        for p in 0..=n {
            for q in 0..=n {
                if p < n {
                    *out.del_mut(p, q) = metric.whiten_op(&b.del(p as isize, q as isize), (p, q), (p + 1, q));
                }
                if q < n {
                    *out.delbar_mut(p, q) =
                        metric.whiten_op(&b.delbar(p as isize, q as isize), (p, q), (p, q + 1));
                }
            }
        }
        let c = (0..=n)
            .map(|p| {
                (0..=n)
                    .map(|q| {
                        // x' = L^H x, conj acts on x̄
                        let lt = &metric.chol[q][p];
                        let ls_inv_h = metric.chol[p][q]
                            .clone()
                            .try_inverse()
                            .expect("invertible")
                            .adjoint();
                        lt.adjoint() * model.conjugation.at(p, q) * ls_inv_h.map(|z| z.conj())
                    })
                    .collect()
            })
            .collect::<Vec<Vec<CMat<T>>>>();
        let mut drift = 0.0f64;
        for row in &c {
            for m in row {
                let id = CMat::<T>::identity(m.ncols(), m.ncols());
                drift = drift.max(to_f64(linalg::max_abs(&(m.adjoint() * m - id))));
            }
        }
        if drift > 1e-8 {
            return Err(Error::Precondition {
                what: "metric is not invariant under conjugation".into(),
                residual: drift,
            });
        }
        Ok(HermitianComplex {
            bicomplex: out,
            conjugation: Some(Conjugation { c }),
        })
    }

    pub fn n(&self) -> usize {
        self.bicomplex.n()
    }

    pub(crate) fn conj(&self) -> Result<&Conjugation<T>> {
        self.conjugation.as_ref().ok_or_else(|| {
            Error::Capability("operation needs a conjugation; abstract bicomplexes have none".into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;
    use crate::sampling::{random_vector, rng};

    fn random_pd(n: usize, seed: u64) -> CMat<f64> {
        let mut g = rng(seed);
        let a = CMat::<f64>::from_fn(n, n, |_, _| random_vector::<f64, _>(&mut g, 1)[0]);
        &a * a.adjoint() + CMat::<f64>::identity(n, n)
    }

    #[test]
    fn adjoint_defining_identity() {
        let model = ExteriorModel::<f64>::build(&catalog("iwasawa").unwrap().base()).unwrap();
        let gr = model.grading().clone();
        let grams = (0..=3)
            .map(|p| (0..=3).map(|q| random_pd(gr.dim(p, q), (p * 4 + q) as u64)).collect())
            .collect();
        let m = MetricData::new(&gr, grams).unwrap();
        let a = model.bicomplex.del(1, 0);
        let astar = m.adjoint(&a, (1, 0), (2, 0)).unwrap();
        let mut g = rng(1);
        let u = random_vector::<f64, _>(&mut g, 3);
        let v = random_vector::<f64, _>(&mut g, 3);
        // ⟨Au, v⟩_tgt = ⟨u, A⋆v⟩_src
        let lhs = (v.adjoint() * m.gram(2, 0) * (&a * &u))[0];
        let rhs = ((&astar * &v).adjoint() * m.gram(1, 0) * &u)[0];
        assert!((lhs - rhs).norm() < 1e-10);
        let back = m.adjoint(&astar, (2, 0), (1, 0)).unwrap();
        assert!((back - a).norm() < 1e-10);
    }

    #[test]
    fn identity_metric_adjoint_is_conjugate_transpose() {
        let gr = Bigrading::new(1, vec![vec![1, 1], vec![1, 1]]).unwrap();
        let m = MetricData::<f64>::identity(&gr);
        let a = CMat::<f64>::from_element(1, 1, crate::scalar::cx(0.0, 2.0));
        assert_eq!(m.adjoint(&a, (0, 0), (1, 0)).unwrap(), a.adjoint());
    }

    #[test]
    fn whitened_model_keeps_identities() {
        let model = ExteriorModel::<f64>::build(&catalog("iwasawa").unwrap().base()).unwrap();
        let gr = model.grading().clone();
        let grams = (0..=3)
            .map(|p| (0..=3).map(|q| random_pd(gr.dim(p, q), 100 + (p * 4 + q) as u64)).collect())
            .collect();
        let m = MetricData::new(&gr, grams).unwrap();
        assert!(HermitianComplex::with_metric(&model, &m).is_err());
        let m = m.symmetrized(&gr, &model.conjugation).unwrap();
        let hc = HermitianComplex::with_metric(&model, &m).unwrap();
        let tol = crate::Tolerances::default();
        assert!(hc.bicomplex.validate(&tol).valid);
    }
}
