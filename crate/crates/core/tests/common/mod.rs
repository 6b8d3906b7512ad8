//! Reference computations that share no code with the library.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};

pub type C = Complex<f64>;

/// Two-target bound at unit factor from the explicit projector
/// `I - A (A^H A)^{-1} A^H`, with `A` the steering matrix of the selected
/// positions at angles `0` and `dw`.
///
/// `None` when the Gram matrix or the projected Fisher entry is degenerate.
pub fn gram_oracle(positions: &[f64], dw: f64) -> Option<f64> {
    let m = positions.len();
    let omegas = [0.0, dw];
    let a = DMatrix::<C>::from_fn(m, 2, |r, k| C::from_polar(1.0, positions[r] * omegas[k]));
    let d = DMatrix::<C>::from_fn(m, 2, |r, k| {
        C::new(0.0, positions[r]) * C::from_polar(1.0, positions[r] * omegas[k])
    });
    let gram = a.adjoint() * &a;
    let det = (gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)]).re;
    if det <= 1e-10 * gram[(0, 0)].re * gram[(1, 1)].re {
        return None;
    }
    let inv = gram.try_inverse()?;
    let proj = DMatrix::<C>::identity(m, m) - &a * inv * a.adjoint();
    let h = (d.adjoint() * proj * d)[(0, 0)].re;
    let scale: f64 = positions.iter().map(|x| x * x).sum::<f64>().max(1.0);
    if h <= 1e-10 * scale {
        return None;
    }
    Some(1.0 / h)
}

/// `(Σ p e^{j x dw}, Σ p x, Σ p x e^{-j x dw}, Σ p x², Σ p)` by direct summation.
pub fn direct_sums(positions: &[f64], weights: &[f64], dw: f64) -> (C, C, C, f64, f64) {
    let mut out = (
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        0.0,
        0.0,
    );
    for (&x, &p) in positions.iter().zip(weights) {
        out.0 += C::from_polar(p, x * dw);
        out.1 += C::new(p * x, 0.0);
        out.2 += C::from_polar(p * x, -x * dw);
        out.3 += p * x * x;
        out.4 += p;
    }
    out
}

/// Selected positions of a 0/1 flag vector.
pub fn selected_positions(positions: &[f64], flags: &[bool]) -> Vec<f64> {
    positions
        .iter()
        .zip(flags)
        .filter(|(_, &f)| f)
        .map(|(&x, _)| x)
        .collect()
}

/// Every `k`-subset of `0..n` as flag vectors, by bitmask.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<bool>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(1e-300)
}
