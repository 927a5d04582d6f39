//! Orthonormal DCT-II and its inverse.

use std::f64::consts::PI;

use crate::scalar::Real;

pub const DEFAULT_DCT_COEFFS: usize = 10;

/// `cos(π·(2n+1)·k / 2N)` with the integer phase reduced before the call.
#[inline]
fn basis(n: usize, k: usize, len: usize) -> f64 {
    let period = 4 * len;
    let phase = ((2 * n + 1) % period) * (k % period) % period;
    (PI * phase as f64 / (2 * len) as f64).cos()
}

#[inline]
fn scale(k: usize, len: usize) -> f64 {
    if k == 0 {
        (1.0 / len as f64).sqrt()
    } else {
        (2.0 / len as f64).sqrt()
    }
}

/// First `n_coeffs` orthonormal DCT-II coefficients of `x`; positions past `x.len()` are zero.
pub fn dct2_prefix<T: Real>(x: &[T], n_coeffs: usize) -> Vec<T> {
    let len = x.len();
    (0..n_coeffs)
        .map(|k| {
            if k >= len {
                return T::zero();
            }
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(n, v)| v.as_f64() * basis(n, k, len))
                .sum();
            T::lit(scale(k, len) * s)
        })
        .collect()
}

/// Full orthonormal DCT-II.
pub fn dct2<T: Real>(x: &[T]) -> Vec<T> {
    dct2_prefix(x, x.len())
}

/// Orthonormal DCT-III, the inverse of [`dct2`].
pub fn idct2<T: Real>(coeffs: &[T]) -> Vec<T> {
    let len = coeffs.len();
    (0..len)
        .map(|n| {
            let s: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| scale(k, len) * c.as_f64() * basis(n, k, len))
                .sum();
            T::lit(s)
        })
        .collect()
}
