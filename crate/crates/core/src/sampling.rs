//! Seeded sampling of deformation parameters and random forms.

use crate::bicomplex::{Bigrading, Form};
use crate::scalar::{lit, CVec, Real, C};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` values of `h` in the annulus `lo ≤ |h| ≤ hi`, log-uniform in modulus.
pub fn annulus<T: Real>(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<C<T>> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            let r = (lo.ln() + g.gen::<f64>() * (hi.ln() - lo.ln())).exp();
            let a = g.gen::<f64>() * std::f64::consts::TAU;
            Complex::new(lit(r * a.cos()), lit(r * a.sin()))
        })
        .collect()
}

/// The property-suite sample: 8 values with `0.05 ≤ |h| ≤ 5`.
pub fn h_samples<T: Real>(seed: u64) -> Vec<C<T>> {
    annulus(seed, 8, 0.05, 5.0)
}

pub fn random_vector<T: Real, R: Rng>(g: &mut R, len: usize) -> CVec<T> {
    CVec::<T>::from_fn(len, |_, _| {
        Complex::new(lit(g.gen_range(-1.0..1.0)), lit(g.gen_range(-1.0..1.0)))
    })
}

pub fn random_form<T: Real, R: Rng>(g: &mut R, grading: &Bigrading, degree: usize) -> Form<T> {
    Form {
        degree,
        coeffs: random_vector(g, grading.total(degree)),
    }
}

/// Default scan grid `{0} ∪ {±2^{−j}, ±i·2^{−j} : j = 0..6}`.
pub fn default_h_grid<T: Real>() -> Vec<C<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero())];
    for j in 0..=6 {
        let s = 0.5f64.powi(j);
        for (re, im) in [(s, 0.0), (-s, 0.0), (0.0, s), (0.0, -s)] {
            out.push(Complex::new(lit(re), lit(im)));
        }
    }
    out
}
