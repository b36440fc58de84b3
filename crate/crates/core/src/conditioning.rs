//! Gram matrix spectrum and the inverse squared condition number `1/kappa`.

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest matrix handled by [`hermitian_eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 64;
/// Sweep budget of the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to `||G||_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
/// Allowed `|G - G^H|` before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues down to `-NEGATIVE_CLAMP * lambda_max` are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-9;
/// Ratios below this are dominated by rounding in the Gram product.
pub const FLOOR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningReport {
    /// Gram eigenvalues, ascending, with tiny negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
    /// `lambda_min / lambda_max`.
    pub inv_kappa: f64,
    /// Set when `lambda_min < FLOOR_RATIO * lambda_max`.
    pub numerically_floor_limited: bool,
}

/// `H H^H` when `M <= N`, otherwise `H^H H`; exactly Hermitian.
pub fn gram(h: &ChannelMatrix) -> Matrix<Complex64> {
    let e = h.entries();
    let (m, n) = e.shape();
    let mut g = if m <= n {
        Matrix::from_fn(m, m, |i, j| {
            (0..n).map(|k| e[(i, k)] * e[(j, k)].conj()).sum::<Complex64>()
        })
    } else {
        Matrix::from_fn(n, n, |i, j| {
            (0..m).map(|k| e[(k, i)].conj() * e[(k, j)]).sum::<Complex64>()
        })
    };
    symmetrize(&mut g);
    g
}

fn symmetrize(g: &mut Matrix<Complex64>) {
    let d = g.rows();
    for i in 0..d {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in i + 1..d {
            let avg = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
}

fn frobenius(a: &Matrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &Matrix<Complex64>) -> f64 {
    let d = a.rows();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a Hermitian matrix in ascending order, by cyclic complex Jacobi rotations.
pub fn hermitian_eigenvalues(g: &Matrix<Complex64>) -> Result<Vec<f64>> {
    let d = g.rows();
    if g.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {:?}",
            g.shape()
        )));
    }
    if d > MAX_EIGEN_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut deviation: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            deviation = deviation.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let mut a = g.clone();
    symmetrize(&mut a);
    let tol = OFF_DIAGONAL_TOL * frobenius(&a);

    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            return Ok(sorted_diagonal(&a));
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut a, p, q, sweep);
            }
        }
    }
    if off_diagonal_norm(&a) <= tol {
        return Ok(sorted_diagonal(&a));
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// One unitary rotation in the (p, q) plane that zeroes `a[p][q]`.
fn rotate(a: &mut Matrix<Complex64>, p: usize, q: usize, sweep: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible against both diagonal entries: drop it outright.
    if sweep > 3 && app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = apq / g;
    let e_conj = e.conj();
    let d = a.rows();

    // A <- A J with J_pp = c, J_pq = s, J_qp = -s conj(e), J_qq = c conj(e).
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * e_conj * s;
        a[(k, q)] = akp * s + akq * e_conj * c;
    }
    // A <- J^H A
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * e * s;
        a[(q, k)] = apk * s + aqk * e * c;
    }
    a[(p, p)] = Complex64::new(app - t * g, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * g, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
}

fn sorted_diagonal(a: &Matrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = (0..a.rows()).map(|i| a[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Conditioning of a channel from its Gram spectrum.
pub fn inv_kappa(h: &ChannelMatrix) -> Result<ConditioningReport> {
    if h.m_rx() == 0 || h.n_tx() == 0 {
        return Err(Error::DimensionMismatch("empty channel matrix".into()));
    }
    report_from_eigenvalues(hermitian_eigenvalues(&gram(h))?)
}

pub(crate) fn report_from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<ConditioningReport> {
    let max = eigenvalues.last().copied().unwrap_or(0.0);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::NegativeEigenvalue { value: max, max });
    }
    for ev in eigenvalues.iter_mut() {
        if *ev < 0.0 {
            if *ev < -NEGATIVE_CLAMP * max {
                return Err(Error::NegativeEigenvalue { value: *ev, max });
            }
            *ev = 0.0;
        }
    }
    let min = eigenvalues[0];
    let inv_kappa = (min / max).clamp(0.0, 1.0);
    Ok(ConditioningReport {
        eigenvalues,
        inv_kappa,
        numerically_floor_limited: min < FLOOR_RATIO * max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{h_fs, Provenance};
    use crate::geometry::{path_matrix, spacing_from_factor, ArrayConfig, PathModel};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_space(v: usize, eta: f64) -> ChannelMatrix {
        let cfg = spacing_from_factor(&ArrayConfig::square(v, 10.0, 5e-3), eta).unwrap();
        h_fs(&path_matrix(&cfg, PathModel::Approximate).unwrap(), cfg.lambda0)
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let g = Matrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
        ]);
        assert_eq!(hermitian_eigenvalues(&g).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_correlation() {
        // Columns with correlation rho give eigenvalues M (1 +- |rho|).
        let m = 4.0;
        let rho = c(0.3, -0.4);
        let g = Matrix::from_rows(&[vec![c(m, 0.0), m * rho], vec![m * rho.conj(), c(m, 0.0)]]);
        let ev = hermitian_eigenvalues(&g).unwrap();
        assert!((ev[0] - m * (1.0 - rho.norm())).abs() < 1e-12);
        assert!((ev[1] - m * (1.0 + rho.norm())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Matrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(hermitian_eigenvalues(&g), Err(Error::NotHermitian { .. })));
        let big = Matrix::filled(65, 65, c(0.0, 0.0));
        assert!(matches!(hermitian_eigenvalues(&big), Err(Error::DimensionTooLarge(65))));
        let rect = Matrix::filled(2, 3, c(0.0, 0.0));
        assert!(hermitian_eigenvalues(&rect).is_err());
    }

    #[test]
    fn gram_shapes_and_diagonals() {
        let one = ChannelMatrix::new(Matrix::from_rows(&[vec![c(0.6, 0.8)]]), Provenance::FreeSpace);
        assert_eq!(gram(&one)[(0, 0)], c(1.0, 0.0));

        let h = ChannelMatrix::new(
            Matrix::from_fn(3, 5, |r, k| Complex64::from_polar(1.0, 0.37 * (r * k) as f64 + 0.1 * r as f64)),
            Provenance::FreeSpace,
        );
        let g = gram(&h);
        assert_eq!(g.shape(), (3, 3));
        for i in 0..3 {
            assert!((g[(i, i)].re - 5.0).abs() < 1e-12);
        }
        let tall = ChannelMatrix::new(h.entries().transpose(), Provenance::FreeSpace);
        let gt = gram(&tall);
        assert_eq!(gt.shape(), (3, 3));
        let a = hermitian_eigenvalues(&g).unwrap();
        let b = hermitian_eigenvalues(&gt).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_two_by_two() {
        let h = free_space(2, 1.0);
        let g = gram(&h);
        assert!((g[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!(g[(0, 1)].norm() < 1e-9);
        let r = inv_kappa(&h).unwrap();
        assert!((r.inv_kappa - 1.0).abs() < 1e-9);
        assert!(!r.numerically_floor_limited);
    }

    #[test]
    fn reduced_spacing_two_by_two() {
        let r = inv_kappa(&free_space(2, 0.8)).unwrap();
        assert!((r.inv_kappa - 0.302227).abs() < 1e-4);
        let rho = (PI / 8.0).cos();
        let half = inv_kappa(&free_space(2, 0.5)).unwrap();
        assert!((half.inv_kappa - (1.0 - rho) / (1.0 + rho)).abs() < 1e-10);
        assert!((half.inv_kappa - 0.03957).abs() < 1e-5);
    }

    #[test]
    fn clamping_and_floor_flag() {
        let r = report_from_eigenvalues(vec![-1e-12, 2.0, 4.0]).unwrap();
        assert_eq!(r.eigenvalues[0], 0.0);
        assert_eq!(r.inv_kappa, 0.0);
        assert!(r.numerically_floor_limited);
        assert!(matches!(
            report_from_eigenvalues(vec![-1e-3, 4.0]),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn trace_is_preserved() {
        let h = free_space(7, 0.45);
        let r = inv_kappa(&h).unwrap();
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((sum - 49.0).abs() < 1e-9 * 49.0);
    }
}
