//! Scalar plumbing: every numerical routine is generic over the real type
//! underlying the complex coefficients.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar backing the complex coefficient field (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex coefficient over the real scalar `T`.
pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<C<T>>;
pub type CVec<T> = DVector<C<T>>;

/// Literal conversion; every tolerance and constant passes through here.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn cr<T: Real>(re: f64) -> C<T> {
    Complex::new(lit(re), T::zero())
}

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn to_c64<T: Real>(z: C<T>) -> Complex<f64> {
    Complex::new(to_f64(z.re), to_f64(z.im))
}

#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> C<T> {
    Complex::new(lit(z.re), lit(z.im))
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("finite scalar")
}

/// Modulus of a complex scalar.
#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Integer power of a complex scalar, with `z^0 = 1` also for `z = 0`.
pub fn cpow<T: Real>(z: C<T>, e: usize) -> C<T> {
    let mut acc = C::new(T::one(), T::zero());
    for _ in 0..e {
        acc *= z;
    }
    acc
}

/// Numerical tolerances shared by the whole crate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical rank.
    pub rank: f64,
    /// Residual bound for identities that must hold exactly.
    pub zero: f64,
    /// Eigenvalue cutoff (relative to `1 + λ_max`) for Laplacian kernels.
    pub kernel: f64,
    /// Projector Frobenius distance below which two subspaces are equal.
    pub subspace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            zero: 1e-10,
            kernel: 1e-9,
            subspace: 1e-8,
        }
    }
}
