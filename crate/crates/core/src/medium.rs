//! In-medium length matrices `L` for the supported dielectric medium models.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, PathMatrix};
use crate::matrix::Matrix;

/// Default bound `c` on `max(l) - min(l)`, in free-space wavelengths.
pub const DEFAULT_SPAN_BOUND: f64 = 2.5;

/// Profile `g(z)` used to generate a Toeplitz first row from `l_delta * |g(z)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// `z + 1/2`
    Linear,
    /// `z^2 + 1/2`
    Quadratic,
    /// `exp(-z) + 1/4`
    Exponential,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Linear, ShapeKind::Quadratic, ShapeKind::Exponential];

    pub fn g(self, z: usize) -> f64 {
        let z = z as f64;
        match self {
            ShapeKind::Linear => z + 0.5,
            ShapeKind::Quadratic => z * z + 0.5,
            ShapeKind::Exponential => (-z).exp() + 0.25,
        }
    }

    /// `|g(z)|` for `z = 0..v`.
    pub fn profile(self, v: usize) -> Vec<f64> {
        (0..v).map(|z| self.g(z).abs()).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Linear => "linear",
            ShapeKind::Quadratic => "quadratic",
            ShapeKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ShapeKind::Linear),
            "quadratic" => Ok(ShapeKind::Quadratic),
            "exponential" => Ok(ShapeKind::Exponential),
            other => Err(Error::InvalidMedium(format!(
                "unknown shape function '{other}' (expected linear, quadratic or exponential)"
            ))),
        }
    }
}

/// Geometry of the dielectric between the arrays.
#[derive(Debug, Clone, PartialEq)]
pub enum MediumGeometry {
    /// No medium at all.
    FreeSpace,
    /// Slab of constant thickness parallel to the arrays.
    Rectangular { thickness: f64 },
    /// Symmetric Toeplitz `L` given by its first row (meters).
    ExplicitToeplitz { first_row: Vec<f64> },
    /// First row `l_delta * |g(z)|`.
    ShapeFunction { kind: ShapeKind, l_delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub geometry: MediumGeometry,
    /// Square root of the relative permittivity, `>= 1`.
    pub sqrt_eps_r: f64,
}

impl MediumSpec {
    pub fn free_space() -> Self {
        MediumSpec {
            geometry: MediumGeometry::FreeSpace,
            sqrt_eps_r: 1.0,
        }
    }

    pub fn rectangular(thickness: f64, sqrt_eps_r: f64) -> Self {
        MediumSpec {
            geometry: MediumGeometry::Rectangular { thickness },
            sqrt_eps_r,
        }
    }

    pub fn toeplitz(first_row: Vec<f64>, sqrt_eps_r: f64) -> Self {
        MediumSpec {
            geometry: MediumGeometry::ExplicitToeplitz { first_row },
            sqrt_eps_r,
        }
    }

    pub fn shape(kind: ShapeKind, l_delta: f64, sqrt_eps_r: f64) -> Self {
        MediumSpec {
            geometry: MediumGeometry::ShapeFunction { kind, l_delta },
            sqrt_eps_r,
        }
    }

    pub fn validate(&self, cfg: &ArrayConfig) -> Result<()> {
        check_sqrt_eps_r(self.sqrt_eps_r)?;
        match &self.geometry {
            MediumGeometry::FreeSpace => Ok(()),
            MediumGeometry::Rectangular { thickness } => check_thickness(*thickness, cfg.range),
            MediumGeometry::ExplicitToeplitz { first_row } => {
                check_first_row(first_row, cfg.v())
            }
            MediumGeometry::ShapeFunction { l_delta, .. } => {
                if l_delta.is_finite() && *l_delta >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidMedium(format!("l_delta must be >= 0, got {l_delta}")))
                }
            }
        }
    }

    /// In-medium lengths for this medium on the given link.
    pub fn lengths(&self, cfg: &ArrayConfig, paths: &PathMatrix) -> Result<LengthMatrix> {
        self.validate(cfg)?;
        match &self.geometry {
            MediumGeometry::FreeSpace => Ok(LengthMatrix::zeros(cfg.m_rx, cfg.n_tx)),
            MediumGeometry::Rectangular { thickness } => rectangular_lengths(cfg, paths, *thickness),
            MediumGeometry::ExplicitToeplitz { first_row } => {
                toeplitz_lengths(first_row, cfg.m_rx, cfg.n_tx)
            }
            MediumGeometry::ShapeFunction { kind, l_delta } => {
                shape_lengths(*kind, *l_delta, cfg.m_rx, cfg.n_tx)
            }
        }
    }
}

pub(crate) fn check_sqrt_eps_r(sqrt_eps_r: f64) -> Result<()> {
    if sqrt_eps_r.is_finite() && sqrt_eps_r >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidMedium(format!("sqrt_eps_r must be >= 1, got {sqrt_eps_r}")))
    }
}

pub(crate) fn check_thickness(t: f64, range: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidMedium(format!("thickness must be >= 0, got {t}")));
    }
    if t >= range {
        return Err(Error::InvalidMedium(format!(
            "slab thickness {t} m is not shorter than the link range {range} m"
        )));
    }
    Ok(())
}

fn check_first_row(first_row: &[f64], v: usize) -> Result<()> {
    if first_row.len() != v {
        return Err(Error::DimensionMismatch(format!(
            "Toeplitz first row has {} entries, expected V = {v}",
            first_row.len()
        )));
    }
    if let Some(bad) = first_row.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidMedium(format!("medium lengths must be >= 0, got {bad}")));
    }
    Ok(())
}

/// `M x N` matrix of in-medium lengths `l_mn` in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthMatrix {
    entries: Matrix<f64>,
}

impl LengthMatrix {
    pub fn zeros(m_rx: usize, n_tx: usize) -> Self {
        LengthMatrix {
            entries: Matrix::filled(m_rx, n_tx, 0.0),
        }
    }

    pub fn from_entries(entries: Matrix<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidMedium(format!("medium lengths must be >= 0, got {bad}")));
        }
        Ok(LengthMatrix { entries })
    }

    pub fn entries(&self) -> &Matrix<f64> {
        &self.entries
    }

    /// Entry `l_mn` using 1-based indices.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[(m - 1, n - 1)]
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }
}

/// Lengths through a slab of thickness `t`: `l_mn = t * r_mn / R`.
pub fn rectangular_lengths(cfg: &ArrayConfig, paths: &PathMatrix, t: f64) -> Result<LengthMatrix> {
    check_thickness(t, cfg.range)?;
    if paths.entries().shape() != (cfg.m_rx, cfg.n_tx) {
        return Err(Error::DimensionMismatch(format!(
            "path matrix is {:?}, configuration expects ({}, {})",
            paths.entries().shape(),
            cfg.m_rx,
            cfg.n_tx
        )));
    }
    let scale = t / cfg.range;
    Ok(LengthMatrix {
        entries: paths.entries().map(|r| scale * r),
    })
}

/// `M x N` block of the `V x V` symmetric Toeplitz matrix with the given first row,
/// dropping trailing rows or columns when the arrays differ in size.
pub fn toeplitz_lengths(first_row: &[f64], m_rx: usize, n_tx: usize) -> Result<LengthMatrix> {
    let rows: Vec<usize> = (1..=m_rx).collect();
    let cols: Vec<usize> = (1..=n_tx).collect();
    toeplitz_lengths_selected(first_row, &rows, &cols)
}

/// Like [`toeplitz_lengths`] but keeps an arbitrary set of (1-based) rows and columns
/// of the full `V x V` matrix, where `V = first_row.len()`.
pub fn toeplitz_lengths_selected(first_row: &[f64], rows: &[usize], cols: &[usize]) -> Result<LengthMatrix> {
    let v = rows.len().max(cols.len());
    check_first_row(first_row, v)?;
    for (what, idx) in rows.iter().map(|i| ("row", i)).chain(cols.iter().map(|i| ("column", i))) {
        if *idx == 0 || *idx > v {
            return Err(Error::IndexOutOfRange {
                what: if what == "row" { "row" } else { "column" },
                index: *idx,
                max: v,
            });
        }
    }
    let entries = Matrix::from_fn(rows.len(), cols.len(), |r, c| {
        first_row[rows[r].abs_diff(cols[c])]
    });
    Ok(LengthMatrix { entries })
}

/// First row `l_delta * |g(z)|`, `z = 0..V`.
pub fn shape_first_row(kind: ShapeKind, l_delta: f64, v: usize) -> Vec<f64> {
    kind.profile(v).into_iter().map(|g| l_delta * g).collect()
}

pub fn shape_lengths(kind: ShapeKind, l_delta: f64, m_rx: usize, n_tx: usize) -> Result<LengthMatrix> {
    if !(l_delta.is_finite() && l_delta >= 0.0) {
        return Err(Error::InvalidMedium(format!("l_delta must be >= 0, got {l_delta}")));
    }
    toeplitz_lengths(&shape_first_row(kind, l_delta, m_rx.max(n_tx)), m_rx, n_tx)
}

/// `max(l) - min(l) <= c * lambda0`.
pub fn check_span_constraint(lengths: &LengthMatrix, lambda0: f64, c: f64) -> bool {
    lengths.span() <= c * lambda0
}

/// Span test on a Toeplitz first row, equivalent to testing the full matrix.
pub fn first_row_within_span(first_row: &[f64], lambda0: f64, c: f64) -> bool {
    let max = first_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = first_row.iter().copied().fold(f64::INFINITY, f64::min);
    max - min <= c * lambda0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{path_matrix, PathModel};

    const LAM: f64 = 5e-3;

    #[test]
    fn zero_thickness_and_boresight() {
        let cfg = ArrayConfig::square(3, 10.0, LAM);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        let zero = rectangular_lengths(&cfg, &p, 0.0).unwrap();
        assert!(zero.entries().iter().all(|&l| l == 0.0));
        let slab = rectangular_lengths(&cfg, &p, 2.0).unwrap();
        assert_eq!(slab.get(1, 1), 2.0);
        for m in 1..=3 {
            for n in 1..=3 {
                assert!(slab.get(m, n) <= p.get(m, n));
            }
        }
    }

    #[test]
    fn slab_thicker_than_link_is_rejected() {
        let cfg = ArrayConfig::square(2, 10.0, LAM);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        assert!(matches!(rectangular_lengths(&cfg, &p, 10.0), Err(Error::InvalidMedium(_))));
        assert!(rectangular_lengths(&cfg, &p, -1.0).is_err());
    }

    #[test]
    fn toeplitz_structure() {
        let (a, b, c) = (1.0, 2.0, 3.0);
        let sq = toeplitz_lengths(&[a, b, c], 3, 3).unwrap();
        assert_eq!(
            sq.entries(),
            &Matrix::from_rows(&[vec![a, b, c], vec![b, a, b], vec![c, b, a]])
        );
        let wide = toeplitz_lengths(&[a, b, c], 2, 3).unwrap();
        assert_eq!(wide.entries(), &Matrix::from_rows(&[vec![a, b, c], vec![b, a, b]]));
        let tall = toeplitz_lengths(&[a, b, c], 3, 1).unwrap();
        assert_eq!(tall.entries(), &Matrix::from_rows(&[vec![a], vec![b], vec![c]]));
        let single = toeplitz_lengths(&[LAM], 1, 1).unwrap();
        assert_eq!(single.get(1, 1), LAM);
    }

    #[test]
    fn toeplitz_errors() {
        assert!(matches!(
            toeplitz_lengths(&[1.0, 2.0], 3, 3),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            toeplitz_lengths(&[1.0, -2.0], 2, 2),
            Err(Error::InvalidMedium(_))
        ));
    }

    #[test]
    fn selected_rows_drop_a_middle_antenna() {
        let l = toeplitz_lengths_selected(&[1.0, 2.0, 3.0], &[1, 3], &[1, 2, 3]).unwrap();
        assert_eq!(l.entries(), &Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]));
        assert!(toeplitz_lengths_selected(&[1.0, 2.0, 3.0], &[1, 4], &[1, 2, 3]).is_err());
    }

    #[test]
    fn shape_rows() {
        let q = shape_first_row(ShapeKind::Quadratic, LAM, 3);
        assert_eq!(q, vec![0.5 * LAM, 1.5 * LAM, 4.5 * LAM]);
        let e = shape_first_row(ShapeKind::Exponential, LAM, 2);
        assert!((e[0] - 1.25 * LAM).abs() < 1e-18);
        assert!((e[1] / LAM - 0.617879).abs() < 1e-6);
        let lin = shape_lengths(ShapeKind::Linear, 0.0, 4, 4).unwrap();
        assert!(lin.entries().iter().all(|&l| l == 0.0));
        assert!(shape_lengths(ShapeKind::Linear, -1.0, 2, 2).is_err());
        assert!("cubic".parse::<ShapeKind>().is_err());
        assert_eq!("quadratic".parse::<ShapeKind>().unwrap(), ShapeKind::Quadratic);
    }

    #[test]
    fn quadratic_second_difference_is_constant() {
        let l_delta = 0.37;
        let row = shape_first_row(ShapeKind::Quadratic, l_delta, 12);
        for z in 1..11 {
            let second = (row[z + 1] - row[z]) - (row[z] - row[z - 1]);
            assert!((second - 2.0 * l_delta).abs() < 1e-12);
        }
    }

    #[test]
    fn span_constraint() {
        let flat = toeplitz_lengths(&[LAM; 4], 4, 4).unwrap();
        assert!(check_span_constraint(&flat, LAM, 0.0));
        let rounded = toeplitz_lengths(&[0.50, 0.54, 0.64, 0.82, 1.08].map(|x| x * LAM), 5, 5).unwrap();
        assert!(check_span_constraint(&rounded, LAM, DEFAULT_SPAN_BOUND));
        let wide = toeplitz_lengths(&[0.0, 3.0 * LAM], 2, 2).unwrap();
        assert!(!check_span_constraint(&wide, LAM, DEFAULT_SPAN_BOUND));
    }

    #[test]
    fn medium_spec_dispatch() {
        let cfg = ArrayConfig::square(3, 10.0, LAM);
        let p = path_matrix(&cfg, PathModel::Approximate).unwrap();
        let rect = MediumSpec::rectangular(1.0, 2.0).lengths(&cfg, &p).unwrap();
        assert_eq!(rect, rectangular_lengths(&cfg, &p, 1.0).unwrap());
        assert!(MediumSpec::rectangular(1.0, 0.5).lengths(&cfg, &p).is_err());
        assert!(MediumSpec::toeplitz(vec![1.0], 2.0).lengths(&cfg, &p).is_err());
        let fs = MediumSpec::free_space().lengths(&cfg, &p).unwrap();
        assert_eq!(fs.max(), 0.0);
    }
}
