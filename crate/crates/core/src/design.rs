//! Closed-form spacing design with and without a rectangular dielectric slab.

use crate::error::{Error, Result};
use crate::geometry::ArrayConfig;
use crate::medium::{check_sqrt_eps_r, check_thickness};

/// Inputs a spacing solution was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignAssumptions {
    pub v: usize,
    pub theta_t: f64,
    pub theta_r: f64,
    pub range: f64,
    pub lambda0: f64,
    pub thickness: f64,
    pub sqrt_eps_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingSolution {
    /// `d_t * d_r` in m^2.
    pub d_product: f64,
    /// `sqrt(d_product)`, the spacing when both arrays use the same value.
    pub d_symmetric: f64,
    pub assumptions: DesignAssumptions,
}

impl SpacingSolution {
    /// Splits the product into `(d_t, d_r)` with `d_t / d_r = ratio`.
    pub fn split(&self, ratio: f64) -> (f64, f64) {
        ((self.d_product * ratio).sqrt(), (self.d_product / ratio).sqrt())
    }

    /// The template with symmetric spacings set to this solution.
    pub fn apply(&self, template: &ArrayConfig) -> ArrayConfig {
        template.with_spacings(self.d_symmetric, self.d_symmetric)
    }
}

fn check_template(template: &ArrayConfig) -> Result<()> {
    let cos = template.cos_product();
    if cos.is_nan() || cos <= 0.0 || template.theta_t.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidConfig(format!(
            "tilts ({}, {}) leave no positive cos(theta_t) cos(theta_r)",
            template.theta_t, template.theta_r
        )));
    }
    template.with_spacings(1.0, 1.0).validate()
}

/// `d_t d_r = lambda0 R / (V cos(theta_t) cos(theta_r))`. Spacings in the template are ignored.
pub fn optimal_spacing(template: &ArrayConfig) -> Result<SpacingSolution> {
    medium_optimal_spacing(template, 0.0, 1.0)
}

/// `d_t d_r = lambda0 R^2 / (V (R + t (sqrt(eps_r) - 1)) cos(theta_t) cos(theta_r))`.
pub fn medium_optimal_spacing(template: &ArrayConfig, thickness: f64, sqrt_eps_r: f64) -> Result<SpacingSolution> {
    check_template(template)?;
    check_thickness(thickness, template.range)?;
    check_sqrt_eps_r(sqrt_eps_r)?;
    let r = template.range;
    let d_product = template.lambda0 * r * r
        / (template.v() as f64 * (r + thickness * (sqrt_eps_r - 1.0)) * template.cos_product());
    Ok(SpacingSolution {
        d_product,
        d_symmetric: d_product.sqrt(),
        assumptions: DesignAssumptions {
            v: template.v(),
            theta_t: template.theta_t,
            theta_r: template.theta_r,
            range: r,
            lambda0: template.lambda0,
            thickness,
            sqrt_eps_r,
        },
    })
}

/// Slab thickness that makes `target_d_product` optimal, the smallest non-negative root.
pub fn solve_thickness(template: &ArrayConfig, target_d_product: f64, sqrt_eps_r: f64) -> Result<f64> {
    check_template(template)?;
    if !(sqrt_eps_r.is_finite() && sqrt_eps_r > 1.0) {
        return Err(Error::InvalidMedium(format!(
            "solving for thickness needs sqrt_eps_r > 1, got {sqrt_eps_r}"
        )));
    }
    if !(target_d_product.is_finite() && target_d_product > 0.0) {
        return Err(Error::Infeasible(format!(
            "target spacing product must be positive, got {target_d_product}"
        )));
    }
    let r = template.range;
    let mut t = (template.lambda0 * r * r
        / (template.v() as f64 * target_d_product * template.cos_product())
        - r)
        / (sqrt_eps_r - 1.0);
    if t < 0.0 && t > -1e-12 * r {
        t = 0.0;
    }
    if t < 0.0 {
        return Err(Error::Infeasible(format!(
            "target spacing product {target_d_product:e} m^2 exceeds the free-space optimum"
        )));
    }
    if t >= r * (1.0 - 1e-12) {
        return Err(Error::Infeasible(format!(
            "required slab thickness {t} m is not shorter than the range {r} m"
        )));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tpl() -> ArrayConfig {
        ArrayConfig::square(2, 10.0, 5e-3)
    }

    #[test]
    fn free_space_optimum() {
        let s = optimal_spacing(&tpl()).unwrap();
        assert!((s.d_product - 0.025).abs() < 1e-15);
        assert!((s.d_symmetric - 0.158113883).abs() < 1e-9);
        let far = optimal_spacing(&ArrayConfig { range: 20.0, ..tpl() }).unwrap();
        assert!((far.d_product - 2.0 * s.d_product).abs() < 1e-15);
        let (dt, dr) = s.split(4.0);
        assert!((dt * dr - s.d_product).abs() < 1e-15);
        assert!((dt / dr - 4.0).abs() < 1e-12);
    }

    #[test]
    fn medium_reduces_to_free_space() {
        let base = optimal_spacing(&tpl()).unwrap().d_product;
        assert_eq!(medium_optimal_spacing(&tpl(), 0.0, 3.0).unwrap().d_product, base);
        assert_eq!(medium_optimal_spacing(&tpl(), 7.0, 1.0).unwrap().d_product, base);
    }

    #[test]
    fn half_length_slab() {
        let s = medium_optimal_spacing(&tpl(), 5.0, 3.0).unwrap();
        assert!((s.d_product - 0.0125).abs() < 1e-15);
        assert!(medium_optimal_spacing(&tpl(), 10.0, 3.0).is_err());
        assert!(medium_optimal_spacing(&tpl(), 1.0, 0.9).is_err());
    }

    #[test]
    fn tilt_at_right_angle_is_rejected() {
        let bad = tpl().with_tilts(std::f64::consts::FRAC_PI_2, 0.0);
        assert!(optimal_spacing(&bad).is_err());
    }

    #[test]
    fn thickness_inverse() {
        let free = optimal_spacing(&tpl()).unwrap().d_product;
        assert_eq!(solve_thickness(&tpl(), free, 2.0).unwrap(), 0.0);
        assert!(matches!(solve_thickness(&tpl(), 0.5 * free, 2.0), Err(Error::Infeasible(_))));
        assert!(matches!(solve_thickness(&tpl(), 1.5 * free, 2.0), Err(Error::Infeasible(_))));
        assert!(solve_thickness(&tpl(), 0.8 * free, 1.0).is_err());

        let target = 0.7 * free;
        let t = solve_thickness(&tpl(), target, 2.0).unwrap();
        let back = medium_optimal_spacing(&tpl(), t, 2.0).unwrap().d_product;
        assert!((back - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn monotone_in_thickness_and_permittivity() {
        let mut last = f64::INFINITY;
        for i in 0..10 {
            let d = medium_optimal_spacing(&tpl(), i as f64, 2.0).unwrap().d_product;
            assert!(d < last);
            last = d;
        }
        let mut last = f64::INFINITY;
        for i in 0..10 {
            let d = medium_optimal_spacing(&tpl(), 3.0, 1.0 + 0.5 * i as f64).unwrap().d_product;
            if i > 0 {
                assert!(d < last);
            }
            last = d;
        }
    }
}
