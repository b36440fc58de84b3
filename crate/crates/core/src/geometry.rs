//! Array scenarios and transmitter-to-receiver path lengths.
//!
//! Antenna indices are 1-based throughout the public API: receive antenna
//! `m = 1..=M`, transmit antenna `n = 1..=N`. Offsets along each array use
//! `(m - 1)` and `(n - 1)` so that the first element of both arrays sits on
//! the boresight axis at separation `range`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Geometry of a link between two uniform linear arrays.
///
/// Lengths are in meters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub n_tx: usize,
    pub m_rx: usize,
    pub d_t: f64,
    pub d_r: f64,
    pub theta_t: f64,
    pub theta_r: f64,
    pub range: f64,
    pub lambda0: f64,
}

impl ArrayConfig {
    /// Untilted link with both spacings set to the free-space optimum.
    pub fn new(n_tx: usize, m_rx: usize, range: f64, lambda0: f64) -> Self {
        let cfg = ArrayConfig {
            n_tx,
            m_rx,
            d_t: 1.0,
            d_r: 1.0,
            theta_t: 0.0,
            theta_r: 0.0,
            range,
            lambda0,
        };
        cfg.with_eta(1.0)
    }

    /// Square `v x v` arrays.
    pub fn square(v: usize, range: f64, lambda0: f64) -> Self {
        Self::new(v, v, range, lambda0)
    }

    pub fn with_spacings(mut self, d_t: f64, d_r: f64) -> Self {
        self.d_t = d_t;
        self.d_r = d_r;
        self
    }

    /// Changes the tilts while keeping the current spacings.
    pub fn with_tilts(mut self, theta_t: f64, theta_r: f64) -> Self {
        self.theta_t = theta_t;
        self.theta_r = theta_r;
        self
    }

    /// Sets `d_t = d_r = eta * d_opt`, see [`spacing_from_factor`].
    pub fn with_eta(self, eta: f64) -> Self {
        let d = eta * self.d_opt();
        self.with_spacings(d, d)
    }

    pub fn with_counts(mut self, n_tx: usize, m_rx: usize) -> Self {
        self.n_tx = n_tx;
        self.m_rx = m_rx;
        self
    }

    /// `V = max(N, M)`.
    pub fn v(&self) -> usize {
        self.n_tx.max(self.m_rx)
    }

    pub fn cos_product(&self) -> f64 {
        self.theta_t.cos() * self.theta_r.cos()
    }

    /// Symmetric free-space optimal spacing `sqrt(lambda0 R / (V cos(theta_t) cos(theta_r)))`.
    pub fn d_opt(&self) -> f64 {
        (self.lambda0 * self.range / (self.v() as f64 * self.cos_product())).sqrt()
    }

    /// Largest element offset along either array.
    pub fn extent(&self) -> f64 {
        let tx = (self.n_tx.saturating_sub(1)) as f64 * self.d_t;
        let rx = (self.m_rx.saturating_sub(1)) as f64 * self.d_r;
        tx.max(rx)
    }

    /// Arrays larger than a tenth of the range break the second-order path expansion.
    pub fn far_field_violated(&self) -> bool {
        self.extent() > self.range / 10.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_tx == 0 || self.m_rx == 0 {
            return bad(format!(
                "antenna counts must be >= 1 (n_tx = {}, m_rx = {})",
                self.n_tx, self.m_rx
            ));
        }
        for (name, value) in [
            ("d_t", self.d_t),
            ("d_r", self.d_r),
            ("range", self.range),
            ("lambda0", self.lambda0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return bad(format!("{name} must be positive and finite, got {value}"));
            }
        }
        for (name, value) in [("theta_t", self.theta_t), ("theta_r", self.theta_r)] {
            if !(value.is_finite() && value.abs() < FRAC_PI_2) {
                return bad(format!("|{name}| must be below pi/2, got {value}"));
            }
        }
        Ok(())
    }

    fn check_indices(&self, m: usize, n: usize) -> Result<()> {
        if m == 0 || m > self.m_rx {
            return Err(Error::IndexOutOfRange {
                what: "m",
                index: m,
                max: self.m_rx,
            });
        }
        if n == 0 || n > self.n_tx {
            return Err(Error::IndexOutOfRange {
                what: "n",
                index: n,
                max: self.n_tx,
            });
        }
        Ok(())
    }

    /// Longitudinal and transverse offsets of the (m, n) path, 1-based.
    fn offsets(&self, m: usize, n: usize) -> (f64, f64) {
        let mo = (m - 1) as f64;
        let no = (n - 1) as f64;
        let along = mo * self.d_r * self.theta_r.sin() - no * self.d_t * self.theta_t.sin();
        let across = mo * self.d_r * self.theta_r.cos() - no * self.d_t * self.theta_t.cos();
        (along, across)
    }
}

/// Which distance formula a [`PathMatrix`] was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PathModel {
    Exact,
    #[default]
    Approximate,
}

impl fmt::Display for PathModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathModel::Exact => "exact",
            PathModel::Approximate => "approx",
        })
    }
}

impl FromStr for PathModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(PathModel::Exact),
            "approx" | "approximate" => Ok(PathModel::Approximate),
            other => Err(format!("unknown path model '{other}' (expected exact or approx)")),
        }
    }
}

/// `M x N` matrix of path lengths `r_mn` in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    entries: Matrix<f64>,
    mode: PathModel,
}

impl PathMatrix {
    pub fn from_entries(entries: Matrix<f64>, mode: PathModel) -> Self {
        PathMatrix { entries, mode }
    }

    pub fn entries(&self) -> &Matrix<f64> {
        &self.entries
    }

    pub fn mode(&self) -> PathModel {
        self.mode
    }

    /// Entry `r_mn` using 1-based indices.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[(m - 1, n - 1)]
    }
}

fn exact_unchecked(cfg: &ArrayConfig, m: usize, n: usize) -> f64 {
    let (along, across) = cfg.offsets(m, n);
    (cfg.range + along).hypot(across)
}

fn approx_unchecked(cfg: &ArrayConfig, m: usize, n: usize) -> f64 {
    let (along, across) = cfg.offsets(m, n);
    cfg.range + along + across * across / (2.0 * cfg.range)
}

/// Planar distance between transmit element `n` and receive element `m`.
pub fn exact_distance(cfg: &ArrayConfig, m: usize, n: usize) -> Result<f64> {
    cfg.check_indices(m, n)?;
    Ok(exact_unchecked(cfg, m, n))
}

/// Second-order (far-field) expansion of [`exact_distance`].
pub fn approx_distance(cfg: &ArrayConfig, m: usize, n: usize) -> Result<f64> {
    cfg.check_indices(m, n)?;
    if cfg.far_field_violated() {
        log::warn!(
            "array extent {:.4e} m exceeds range/10 = {:.4e} m; second-order path model is inaccurate",
            cfg.extent(),
            cfg.range / 10.0
        );
    }
    Ok(approx_unchecked(cfg, m, n))
}

pub fn path_matrix(cfg: &ArrayConfig, mode: PathModel) -> Result<PathMatrix> {
    cfg.validate()?;
    let f = match mode {
        PathModel::Exact => exact_unchecked,
        PathModel::Approximate => {
            if cfg.far_field_violated() {
                log::warn!(
                    "array extent {:.4e} m exceeds range/10 = {:.4e} m; second-order path model is inaccurate",
                    cfg.extent(),
                    cfg.range / 10.0
                );
            }
            approx_unchecked
        }
    };
    let entries = Matrix::from_fn(cfg.m_rx, cfg.n_tx, |r, c| f(cfg, r + 1, c + 1));
    Ok(PathMatrix { entries, mode })
}

/// Copy of `template` with `d_t = d_r = eta * sqrt(lambda0 R / (V cos(theta_t) cos(theta_r)))`.
pub fn spacing_from_factor(template: &ArrayConfig, eta: f64) -> Result<ArrayConfig> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidConfig(format!("spacing factor must be positive, got {eta}")));
    }
    let cfg = template.with_eta(eta);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn untilted(v: usize, d: f64) -> ArrayConfig {
        ArrayConfig::square(v, 10.0, 5e-3).with_spacings(d, d)
    }

    #[test]
    fn boresight_is_range() {
        let cfg = untilted(3, 0.1).with_tilts(0.2, -0.1);
        assert_eq!(exact_distance(&cfg, 1, 1).unwrap(), 10.0);
        assert_eq!(approx_distance(&cfg, 1, 1).unwrap(), 10.0);
    }

    #[test]
    fn pythagoras_and_expansion() {
        let cfg = untilted(2, 0.1);
        let exact = exact_distance(&cfg, 2, 1).unwrap();
        assert!((exact - 10.0004999875).abs() < 1e-10);
        let approx = approx_distance(&cfg, 2, 1).unwrap();
        assert!((approx - 10.0005).abs() < 1e-12);
    }

    #[test]
    fn index_checks() {
        let cfg = untilted(2, 0.1);
        assert!(matches!(
            exact_distance(&cfg, 0, 1),
            Err(Error::IndexOutOfRange { what: "m", .. })
        ));
        assert!(matches!(
            approx_distance(&cfg, 1, 3),
            Err(Error::IndexOutOfRange { what: "n", index: 3, max: 2 })
        ));
    }

    #[test]
    fn exact_symmetry_without_tilt() {
        let cfg = untilted(4, 0.07);
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(
                    exact_distance(&cfg, m, n).unwrap(),
                    exact_distance(&cfg, n, m).unwrap()
                );
            }
        }
    }

    #[test]
    fn single_element_path_matrix() {
        let cfg = ArrayConfig::square(1, 7.5, 1e-2);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        assert_eq!(p.entries().shape(), (1, 1));
        assert_eq!(p.get(1, 1), 7.5);
    }

    #[test]
    fn untilted_path_matrix_is_symmetric_toeplitz() {
        let cfg = untilted(5, 0.05);
        for mode in [PathModel::Exact, PathModel::Approximate] {
            let p = path_matrix(&cfg, mode).unwrap();
            for m in 1usize..=5 {
                for n in 1..=5 {
                    let z = m.abs_diff(n);
                    assert_eq!(p.get(m, n), p.get(1 + z, 1), "{mode} ({m},{n})");
                }
            }
        }
    }

    #[test]
    fn path_matrix_matches_scalar_loop() {
        let cfg = ArrayConfig::new(3, 4, 12.0, 4e-3)
            .with_spacings(0.03, 0.05)
            .with_tilts(0.3, -0.2);
        let p = path_matrix(&cfg, PathModel::Exact).unwrap();
        let q = path_matrix(&cfg, PathModel::Approximate).unwrap();
        for m in 1..=4 {
            for n in 1..=3 {
                assert_eq!(p.get(m, n), exact_distance(&cfg, m, n).unwrap());
                assert_eq!(q.get(m, n), approx_distance(&cfg, m, n).unwrap());
            }
        }
        assert_eq!(p.mode(), PathModel::Exact);
        assert_eq!(path_matrix(&cfg, PathModel::Exact).unwrap(), p);
    }

    #[test]
    fn mixed_term_carries_the_phase_step() {
        let cfg = ArrayConfig::new(3, 5, 10.0, 5e-3).with_spacings(0.04, 0.06);
        let p = path_matrix(&cfg, PathModel::Approximate).unwrap();
        for k in 1..=3 {
            for l in 1..=3 {
                let base = p.get(1, k) - p.get(1, l);
                for m in 1..=5 {
                    let diff = p.get(m, k) - p.get(m, l) - base;
                    let expected = -cfg.d_t * cfg.d_r * (k as f64 - l as f64) * (m as f64 - 1.0) / cfg.range;
                    assert!((diff - expected).abs() < 1e-12, "k={k} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn spacing_factor_scales_the_product() {
        let tpl = ArrayConfig::new(2, 3, 10.0, 5e-3).with_tilts(0.2, 0.1);
        let opt = tpl.lambda0 * tpl.range / (3.0 * tpl.cos_product());
        let one = spacing_from_factor(&tpl, 1.0).unwrap();
        assert!((one.d_t * one.d_r - opt).abs() < 1e-15);
        let half = spacing_from_factor(&tpl, 0.5).unwrap();
        assert!((half.d_t * half.d_r - 0.25 * opt).abs() < 1e-15);
        assert!(spacing_from_factor(&tpl, 0.0).is_err());
        assert!(spacing_from_factor(&tpl, -1.0).is_err());
    }

    #[test]
    fn validation() {
        let ok = ArrayConfig::square(2, 10.0, 5e-3);
        assert!(ok.validate().is_ok());
        assert!(ok.with_counts(0, 2).validate().is_err());
        assert!(ok.with_tilts(FRAC_PI_2, 0.0).validate().is_err());
        assert!(ok.with_spacings(0.0, 1.0).validate().is_err());
        assert!(ArrayConfig { range: -1.0, ..ok }.validate().is_err());
        assert!(ok.with_spacings(2.0, 2.0).far_field_violated());
    }
}
