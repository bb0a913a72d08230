//! Scalar abstraction shared by every numeric routine in the crate.

use clarabel::algebra::FloatT;
use num_complex::Complex;

/// Real floating point type the library can be instantiated with (`f32` or `f64`).
///
/// The conic backend is generic over the same bound, so a whole solve pipeline
/// runs in the chosen precision.
pub trait Real: FloatT {}

impl<T: FloatT> Real for T {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target float type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Squared Euclidean norm of a complex slice.
pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Euclidean norm of a complex slice.
pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    norm_sqr(v).sqrt()
}

/// `a^H b` for equal-length complex slices.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}
