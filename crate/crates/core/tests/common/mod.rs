//! Reference computations that share no code with the library.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use std::f64::consts::PI;

pub type C64 = Complex<f64>;

/// Untilted square link with Toeplitz medium, built from the phase formula directly:
/// `H_mn = exp(-j pi eta^2 (m-n)^2 / V) exp(-j 2 pi (sqrt_eps_r - 1) row[|m-n|])`,
/// with `row` in wavelengths.
pub fn textbook_channel(v: usize, eta: f64, sqrt_eps_r: f64, row_lambda: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(v, v, |m, n| {
        let z = m.abs_diff(n);
        let k = (m as f64 - n as f64).powi(2);
        let phase = PI * eta * eta * k / v as f64 + 2.0 * PI * (sqrt_eps_r - 1.0) * row_lambda.get(z).copied().unwrap_or(0.0);
        C64::from_polar(1.0, -phase)
    })
}

/// Ascending eigenvalues of `H^H H` via nalgebra.
pub fn gram_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let g = h.adjoint() * h;
    let mut ev: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn inv_kappa_of(h: &DMatrix<C64>) -> f64 {
    let ev = gram_eigenvalues(h);
    ev[0].max(0.0) / ev[ev.len() - 1]
}

/// `|sum_{k=0}^{m-1} exp(j k x)|` by summation.
pub fn geometric_sum_magnitude(m: usize, x: f64) -> f64 {
    (0..m).map(|k| C64::from_polar(1.0, k as f64 * x)).sum::<C64>().norm()
}

/// Eigenvalues of a 2x2 Hermitian matrix, ascending.
pub fn eig2(a: f64, b: C64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Eigenvalues of a 3x3 Hermitian matrix from the trigonometric solution of its
/// characteristic cubic, ascending.
pub fn eig3(g: &[[C64; 3]; 3]) -> [f64; 3] {
    let a = [g[0][0].re, g[1][1].re, g[2][2].re];
    let p1 = g[0][1].norm_sqr() + g[0][2].norm_sqr() + g[1][2].norm_sqr();
    let q = (a[0] + a[1] + a[2]) / 3.0;
    let p2 = a.iter().map(|x| (x - q) * (x - q)).sum::<f64>() + 2.0 * p1;
    if p2 <= 1e-300 {
        return [q; 3];
    }
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| -> C64 {
        let shift = if i == j { q } else { 0.0 };
        (g[i][j] - shift) / p
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (0.5 * det.re).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut out = [e1, e2, e3];
    out.sort_by(f64::total_cmp);
    out
}

/// Reference free-space `1/kappa` values at `eta = 0.8`, `N = M = 2..20`.
pub const FREE_SPACE_ETA_08: [(usize, f64); 19] = [
    (2, 0.302227299),
    (3, 0.107721657),
    (4, 0.031811777),
    (5, 0.008045181),
    (6, 0.001854766),
    (7, 0.00040401),
    (8, 8.49e-05),
    (9, 1.74e-05),
    (10, 3.51e-06),
    (11, 6.99e-07),
    (12, 1.37e-07),
    (13, 2.68e-08),
    (14, 5.18e-09),
    (15, 9.97e-10),
    (16, 1.91e-10),
    (17, 3.63e-11),
    (18, 6.88e-12),
    (19, 1.3e-12),
    (20, 2.45e-13),
];

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
