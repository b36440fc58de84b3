//! Free-space, phase-shift and combined line-of-sight channel matrices.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, PathMatrix};
use crate::matrix::Matrix;
use crate::medium::LengthMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FreeSpace,
    PhaseShift,
    Combined,
}

/// `M x N` matrix of unit-magnitude channel coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: Matrix<Complex64>,
    provenance: Provenance,
}

impl ChannelMatrix {
    pub fn new(entries: Matrix<Complex64>, provenance: Provenance) -> Self {
        ChannelMatrix { entries, provenance }
    }

    pub fn entries(&self) -> &Matrix<Complex64> {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn m_rx(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.cols()
    }

    /// Entry `h_mn` using 1-based indices.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m - 1, n - 1)]
    }

    /// Element-wise product with another channel of the same shape.
    pub fn hadamard(&self, other: &ChannelMatrix) -> ChannelMatrix {
        ChannelMatrix {
            entries: self.entries.zip_map(&other.entries, |a, b| a * b),
            provenance: Provenance::Combined,
        }
    }
}

/// Reduces a phase given in cycles to `(-1/2, 1/2]` before scaling by `2 pi`.
#[inline]
pub(crate) fn reduce_cycles(cycles: f64) -> f64 {
    cycles - cycles.round()
}

/// `exp(-j 2 pi cycles)`.
#[inline]
pub(crate) fn phasor(cycles: f64) -> Complex64 {
    let (s, c) = (-TAU * reduce_cycles(cycles)).sin_cos();
    Complex64::new(c, s)
}

/// `h_mn = exp(-j 2 pi r_mn / lambda0)`.
pub fn h_fs(paths: &PathMatrix, lambda0: f64) -> ChannelMatrix {
    ChannelMatrix {
        entries: paths.entries().map(|r| phasor(r / lambda0)),
        provenance: Provenance::FreeSpace,
    }
}

/// `h_mn = exp(-j 2 pi sqrt(eps_r) l_mn / lambda0)`: the full phase of the in-medium segment.
pub fn h_ps(lengths: &LengthMatrix, lambda0: f64, sqrt_eps_r: f64) -> ChannelMatrix {
    ChannelMatrix {
        entries: lengths.entries().map(|l| phasor(sqrt_eps_r * l / lambda0)),
        provenance: Provenance::PhaseShift,
    }
}

/// `h_mn = exp(-j 2 pi (r_mn + (sqrt(eps_r) - 1) l_mn) / lambda0)`.
///
/// Paths with `l_mn > r_mn` are still evaluated but logged as unphysical.
pub fn h_los_combined(
    paths: &PathMatrix,
    lengths: &LengthMatrix,
    lambda0: f64,
    sqrt_eps_r: f64,
) -> Result<ChannelMatrix> {
    if paths.entries().shape() != lengths.entries().shape() {
        return Err(Error::DimensionMismatch(format!(
            "path matrix {:?} vs length matrix {:?}",
            paths.entries().shape(),
            lengths.entries().shape()
        )));
    }
    if paths.entries().iter().zip(lengths.entries().iter()).any(|(r, l)| l > r) {
        log::warn!("in-medium length exceeds the total path length for at least one antenna pair");
    }
    let excess = sqrt_eps_r - 1.0;
    let entries = paths.entries().zip_map(lengths.entries(), |r, l| {
        phasor(reduce_cycles(r / lambda0) + reduce_cycles(excess * l / lambda0))
    });
    Ok(ChannelMatrix {
        entries,
        provenance: Provenance::Combined,
    })
}

/// `<h_k, h_l> = sum_m H(m, k) conj(H(m, l))` over all `M` receive antennas, 1-based columns.
pub fn column_inner_product(h: &ChannelMatrix, k: usize, l: usize) -> Result<Complex64> {
    let n = h.n_tx();
    for idx in [k, l] {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange {
                what: "column",
                index: idx,
                max: n,
            });
        }
    }
    Ok((0..h.m_rx())
        .map(|m| h.entries()[(m, k - 1)] * h.entries()[(m, l - 1)].conj())
        .sum())
}

/// `|sin(M x / 2) / sin(x / 2)|`, the magnitude of an `M`-term geometric series with
/// phase step `x`; equals `M` at `x = 0 (mod 2 pi)`.
pub fn closed_form_inner_product_magnitude(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let wrapped = half - PI * (half / PI).round();
    let den = wrapped.sin();
    if den.abs() < 1e-12 {
        // Removable singularity; the first-order expansion keeps the ratio smooth.
        let mf = m as f64;
        return (mf * (1.0 - (mf * mf - 1.0) * wrapped * wrapped / 6.0)).abs();
    }
    ((m as f64) * wrapped).sin().abs() / den.abs()
}

/// Per-column-step, per-receive-antenna phase increment of the rectangular-medium model:
/// `2 pi / lambda0 (1 + (sqrt(eps_r) - 1) t / R) d_t d_r cos(theta_t) cos(theta_r) / R`.
pub fn approx_phase_step(cfg: &ArrayConfig, sqrt_eps_r: f64, t_over_r: f64) -> f64 {
    TAU / cfg.lambda0 * (1.0 + (sqrt_eps_r - 1.0) * t_over_r) * cfg.d_t * cfg.d_r * cfg.cos_product()
        / cfg.range
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{path_matrix, PathModel};
    use crate::medium::{rectangular_lengths, toeplitz_lengths};

    const LAM: f64 = 5e-3;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn paths_of(rows: &[Vec<f64>]) -> PathMatrix {
        PathMatrix::from_entries(Matrix::from_rows(rows), PathModel::Exact)
    }

    #[test]
    fn free_space_wraps() {
        let h = h_fs(&paths_of(&[vec![LAM, 3.0 * LAM], vec![1000.0 * LAM, LAM]]), LAM);
        assert!(h.entries().iter().all(|&e| close(e, Complex64::new(1.0, 0.0), 1e-12)));
        let half = h_fs(&paths_of(&[vec![0.5 * LAM]]), LAM);
        assert!(close(half.get(1, 1), Complex64::new(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn phase_shift_entries() {
        let zero = LengthMatrix::zeros(2, 3);
        assert!(h_ps(&zero, LAM, 3.0)
            .entries()
            .iter()
            .all(|&e| close(e, Complex64::new(1.0, 0.0), 0.0)));
        let quarter = toeplitz_lengths(&[0.25 * LAM], 1, 1).unwrap();
        assert!(close(h_ps(&quarter, LAM, 2.0).get(1, 1), Complex64::new(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn combined_reduces_to_free_space() {
        let cfg = ArrayConfig::square(4, 10.0, LAM).with_eta(0.7);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        let fs = h_fs(&p, LAM);
        let l = toeplitz_lengths(&[0.1, 0.2, 0.3, 0.4], 4, 4).unwrap();
        let inert = h_los_combined(&p, &l, LAM, 1.0).unwrap();
        let empty = h_los_combined(&p, &LengthMatrix::zeros(4, 4), LAM, 2.5).unwrap();
        for (a, (b, c)) in fs.entries().iter().zip(inert.entries().iter().zip(empty.entries().iter())) {
            assert!(close(*a, *b, 1e-12));
            assert!(close(*a, *c, 1e-12));
        }
        assert_eq!(inert.provenance(), Provenance::Combined);
    }

    #[test]
    fn combined_is_hadamard_of_factors() {
        let cfg = ArrayConfig::new(3, 4, 10.0, LAM).with_eta(0.6).with_tilts(0.1, -0.2);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        let l = rectangular_lengths(&cfg, &p, 3.3).unwrap();
        let combined = h_los_combined(&p, &l, LAM, 1.7).unwrap();
        let free_part = PathMatrix::from_entries(
            p.entries().zip_map(l.entries(), |r, l| r - l),
            PathModel::Exact,
        );
        let split = h_fs(&free_part, LAM).hadamard(&h_ps(&l, LAM, 1.7));
        for (a, b) in combined.entries().iter().zip(split.entries().iter()) {
            assert!(close(*a, *b, 1e-9), "{a} vs {b}");
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = paths_of(&[vec![1.0, 2.0]]);
        assert!(h_los_combined(&p, &LengthMatrix::zeros(2, 2), LAM, 2.0).is_err());
    }

    #[test]
    fn inner_products() {
        let cfg = ArrayConfig::square(2, 10.0, LAM);
        let h = h_fs(&path_matrix(&cfg, PathModel::Approximate).unwrap(), LAM);
        let self_ip = column_inner_product(&h, 1, 1).unwrap();
        assert!(close(self_ip, Complex64::new(2.0, 0.0), 1e-12));
        assert!(column_inner_product(&h, 1, 2).unwrap().norm() <= 1e-9);
        assert!(column_inner_product(&h, 1, 3).is_err());
        assert!(column_inner_product(&h, 0, 1).is_err());
    }

    #[test]
    fn closed_form_special_values() {
        assert_eq!(closed_form_inner_product_magnitude(7, 0.0), 7.0);
        assert!((closed_form_inner_product_magnitude(7, TAU) - 7.0).abs() < 1e-9);
        assert!(closed_form_inner_product_magnitude(2, PI).abs() < 1e-15);
        assert!((closed_form_inner_product_magnitude(1, 0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_step_at_optimal_spacings() {
        let cfg = ArrayConfig::square(4, 10.0, LAM);
        assert!((approx_phase_step(&cfg, 1.0, 0.0) - TAU / 4.0).abs() < 1e-12);
        assert_eq!(approx_phase_step(&cfg, 1.0, 0.7), approx_phase_step(&cfg, 1.0, 0.0));
    }
}
