//! Parameter sweeps and searches over medium lengths that maximize `1/kappa`.
//!
//! Every objective evaluation goes through the same pipeline
//! (lengths -> combined channel -> Gram spectrum), so re-evaluating a reported
//! optimum reproduces its value bit for bit.

use rayon::prelude::*;

use crate::channel::h_los_combined;
use crate::conditioning::{inv_kappa, ConditioningReport};
use crate::error::{Error, Result};
use crate::geometry::{path_matrix, ArrayConfig, PathMatrix, PathModel};
use crate::medium::{
    check_sqrt_eps_r, first_row_within_span, shape_first_row, toeplitz_lengths, LengthMatrix,
    MediumSpec, ShapeKind,
};

/// Largest array handled by [`optimize_first_row`].
pub const MAX_FIRST_ROW_V: usize = 6;

/// Link with its path matrix computed once, for repeated evaluation under different media.
#[derive(Debug, Clone)]
pub struct LinkEvaluator {
    cfg: ArrayConfig,
    paths: PathMatrix,
}

impl LinkEvaluator {
    pub fn new(cfg: &ArrayConfig, model: PathModel) -> Result<Self> {
        Ok(LinkEvaluator {
            cfg: *cfg,
            paths: path_matrix(cfg, model)?,
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn paths(&self) -> &PathMatrix {
        &self.paths
    }

    pub fn evaluate_lengths(&self, lengths: &LengthMatrix, sqrt_eps_r: f64) -> Result<ConditioningReport> {
        let h = h_los_combined(&self.paths, lengths, self.cfg.lambda0, sqrt_eps_r)?;
        inv_kappa(&h)
    }

    pub fn evaluate_medium(&self, medium: &MediumSpec) -> Result<ConditioningReport> {
        let lengths = medium.lengths(&self.cfg, &self.paths)?;
        self.evaluate_lengths(&lengths, medium.sqrt_eps_r)
    }

    /// `1/kappa` for a Toeplitz medium with the given first row (meters).
    pub fn inv_kappa_first_row(&self, first_row: &[f64], sqrt_eps_r: f64) -> Result<f64> {
        let lengths = toeplitz_lengths(first_row, self.cfg.m_rx, self.cfg.n_tx)?;
        Ok(self.evaluate_lengths(&lengths, sqrt_eps_r)?.inv_kappa)
    }
}

/// `steps` evenly spaced values from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl LinearGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Self {
        LinearGrid { start, end, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + step * i as f64).collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!("{name} grid needs at least 2 steps")));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.start >= 0.0 && self.end >= self.start) {
            return Err(Error::InvalidConfig(format!(
                "{name} grid [{}, {}] must be non-negative and ordered",
                self.start, self.end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Self {
        Axis {
            name: name.into(),
            unit: unit.into(),
            values,
        }
    }
}

/// Where a sweep came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepScenario {
    pub config: ArrayConfig,
    pub path_model: PathModel,
    pub medium: MediumSpec,
}

/// `1/kappa` over the Cartesian product of the axes, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    pub scenario: SweepScenario,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Value at the given per-axis indices.
    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.axes.len());
        let mut flat = 0;
        for (a, &i) in self.axes.iter().zip(idx) {
            flat = flat * a.values.len() + i;
        }
        self.values[flat]
    }

    /// Axis coordinates of flat entry `flat`.
    pub fn coordinates(&self, mut flat: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.axes.len()];
        for (slot, axis) in coords.iter_mut().zip(&self.axes).rev() {
            let n = axis.values.len();
            *slot = axis.values[flat % n];
            flat /= n;
        }
        coords
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn require_square(cfg: &ArrayConfig, v: usize) -> Result<()> {
    if cfg.n_tx != v || cfg.m_rx != v {
        return Err(Error::DimensionMismatch(format!(
            "this sweep needs a {v}x{v} link, got M = {}, N = {}",
            cfg.m_rx, cfg.n_tx
        )));
    }
    Ok(())
}

/// Two-antenna sweep over `l12` for each `sqrt(eps_r)`, with `l11` fixed.
pub fn sweep_l12(
    cfg: &ArrayConfig,
    model: PathModel,
    sqrt_eps_r_values: &[f64],
    l11: f64,
    l12: LinearGrid,
) -> Result<SweepResult> {
    require_square(cfg, 2)?;
    l12.validate("l12")?;
    for &s in sqrt_eps_r_values {
        check_sqrt_eps_r(s)?;
    }
    let eval = LinkEvaluator::new(cfg, model)?;
    let l12_values = l12.values();
    let points: Vec<(f64, f64)> = sqrt_eps_r_values
        .iter()
        .flat_map(|&s| l12_values.iter().map(move |&l| (s, l)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(s, l)| eval.inv_kappa_first_row(&[l11, l], s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axes: vec![
            Axis::new("sqrt_eps_r", "1", sqrt_eps_r_values.to_vec()),
            Axis::new("l12", "m", l12_values),
        ],
        values,
        scenario: SweepScenario {
            config: *cfg,
            path_model: model,
            medium: MediumSpec::toeplitz(vec![l11, l12.start], sqrt_eps_r_values.first().copied().unwrap_or(1.0)),
        },
    })
}

/// Three-antenna sweep over the `(l12, l13)` plane with `l11` fixed.
pub fn sweep_l12_l13(
    cfg: &ArrayConfig,
    model: PathModel,
    sqrt_eps_r: f64,
    l11: f64,
    l12: LinearGrid,
    l13: LinearGrid,
) -> Result<SweepResult> {
    require_square(cfg, 3)?;
    l12.validate("l12")?;
    l13.validate("l13")?;
    check_sqrt_eps_r(sqrt_eps_r)?;
    let eval = LinkEvaluator::new(cfg, model)?;
    let a = l12.values();
    let b = l13.values();
    let points: Vec<(f64, f64)> = a
        .iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(x, y)| eval.inv_kappa_first_row(&[l11, x, y], sqrt_eps_r))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axes: vec![Axis::new("l12", "m", a), Axis::new("l13", "m", b)],
        values,
        scenario: SweepScenario {
            config: *cfg,
            path_model: model,
            medium: MediumSpec::toeplitz(vec![l11, l12.start, l13.start], sqrt_eps_r),
        },
    })
}

/// Result of a medium-length search.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// Named optimization variables (lengths in meters).
    pub best_params: Vec<(String, f64)>,
    pub best_inv_kappa: f64,
    /// Toeplitz first row of the optimal length matrix, meters.
    pub first_row: Vec<f64>,
    /// True when the optimum sits on the span constraint.
    pub constraint_active: bool,
}

impl Optimum {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.best_params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Maximizes a function on `[a, b]` by golden-section search. Returns `(x, f(x))`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LDeltaOptions {
    /// Points of the coarse grid over the feasible `l_delta` interval.
    pub grid_points: usize,
    /// Bracket width, relative to the interval, at which golden-section refinement stops.
    pub rel_tol: f64,
}

impl Default for LDeltaOptions {
    fn default() -> Self {
        LDeltaOptions {
            grid_points: 4000,
            rel_tol: 1e-12,
        }
    }
}

/// Largest `l_delta` whose first row keeps `max(l) - min(l) <= c lambda0`.
pub fn max_feasible_l_delta(kind: ShapeKind, v: usize, lambda0: f64, c: f64) -> f64 {
    let profile = kind.profile(v);
    let hi = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = profile.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo <= 0.0 {
        0.0
    } else {
        c * lambda0 / (hi - lo)
    }
}

/// Best scale `l_delta` for the shape `kind` under the span bound `c`.
pub fn optimize_l_delta(
    cfg: &ArrayConfig,
    model: PathModel,
    kind: ShapeKind,
    sqrt_eps_r: f64,
    c: f64,
    opts: LDeltaOptions,
) -> Result<Optimum> {
    check_sqrt_eps_r(sqrt_eps_r)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Infeasible(format!("span bound must be positive, got {c}")));
    }
    if opts.grid_points < 2 {
        return Err(Error::InvalidConfig("l_delta grid needs at least 2 points".into()));
    }
    let eval = LinkEvaluator::new(cfg, model)?;
    let v = cfg.v();
    let hi = max_feasible_l_delta(kind, v, cfg.lambda0, c);
    let objective = |l_delta: f64| -> Result<f64> {
        eval.inv_kappa_first_row(&shape_first_row(kind, l_delta, v), sqrt_eps_r)
    };

    let (best_l, best_val) = if hi == 0.0 {
        (0.0, objective(0.0)?)
    } else {
        let step = hi / (opts.grid_points - 1) as f64;
        let grid = (0..opts.grid_points)
            .into_par_iter()
            .map(|i| objective(step * i as f64))
            .collect::<Result<Vec<_>>>()?;
        let (i_best, v_best) = argmax(&grid);
        let lo_b = step * i_best.saturating_sub(1) as f64;
        let hi_b = (step * (i_best + 1) as f64).min(hi);
        let (x, fx) = golden_section_max(
            |x| objective(x).unwrap_or(f64::NEG_INFINITY),
            lo_b,
            hi_b,
            opts.rel_tol * hi,
            500,
        );
        if fx > v_best {
            (x, fx)
        } else {
            (step * i_best as f64, v_best)
        }
    };
    let first_row = shape_first_row(kind, best_l, v);
    let constraint_active = hi > 0.0 && best_l >= hi * (1.0 - 1e-6);
    Ok(Optimum {
        best_params: vec![("l_delta".to_string(), best_l)],
        best_inv_kappa: best_val,
        first_row,
        constraint_active,
    })
}

/// Index of the largest value; ties go to the smallest index.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Box for the free first-row entries `l12..l1V`; `l11` is pinned to `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstRowBounds {
    pub base: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FirstRowBounds {
    /// `l11 = lambda0 / 2`, free entries over `[l11, l11 + min(c lambda0, period)]` where
    /// `period = lambda0 / (sqrt(eps_r) - 1)` is the phase period of a single length.
    pub fn default_for(lambda0: f64, sqrt_eps_r: f64, c: f64) -> Self {
        let base = 0.5 * lambda0;
        let period = if sqrt_eps_r > 1.0 {
            lambda0 / (sqrt_eps_r - 1.0)
        } else {
            f64::INFINITY
        };
        FirstRowBounds {
            base,
            lower: base,
            upper: base + (c * lambda0).min(period),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstRowOptions {
    /// Upper bound on the number of coarse grid points.
    pub coarse_budget: usize,
    pub max_points_per_dim: usize,
    /// Candidates per coordinate line during refinement (odd).
    pub refine_points: usize,
    /// Number of best coarse points refined.
    pub starts: usize,
    /// Refinement stops once the step falls below `tol * lambda0`.
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for FirstRowOptions {
    fn default() -> Self {
        FirstRowOptions {
            coarse_budget: 200_000,
            max_points_per_dim: 24,
            refine_points: 21,
            starts: 8,
            tol: 1e-7,
            max_passes: 400,
        }
    }
}

/// Coarse exhaustive grid followed by coordinate-wise refinement with shrinking steps
/// over the free Toeplitz first-row entries.
pub fn optimize_first_row(
    cfg: &ArrayConfig,
    model: PathModel,
    sqrt_eps_r: f64,
    bounds: FirstRowBounds,
    c: f64,
    opts: FirstRowOptions,
) -> Result<Optimum> {
    check_sqrt_eps_r(sqrt_eps_r)?;
    let v = cfg.v();
    if v > MAX_FIRST_ROW_V {
        return Err(Error::InvalidConfig(format!(
            "first-row search is exhaustive in V - 1 dimensions; V = {v} exceeds {MAX_FIRST_ROW_V}"
        )));
    }
    let lam = cfg.lambda0;
    let FirstRowBounds { base, lower, upper } = bounds;
    if !(base >= 0.0 && lower >= 0.0 && upper >= lower && upper.is_finite()) {
        return Err(Error::Infeasible(format!(
            "bounds base = {base}, [{lower}, {upper}] are not a valid box"
        )));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Infeasible(format!("span bound must be non-negative, got {c}")));
    }
    if (base.clamp(lower, upper) - base).abs() > c * lam {
        return Err(Error::Infeasible("no first row inside the bounds satisfies the span constraint".into()));
    }
    let eval = LinkEvaluator::new(cfg, model)?;
    let names: Vec<String> = (2..=v).map(|k| format!("l1{k}")).collect();
    let build = |free: &[f64]| -> Vec<f64> {
        let mut row = Vec::with_capacity(v);
        row.push(base);
        row.extend_from_slice(free);
        row
    };
    let objective = |free: &[f64]| -> f64 {
        let row = build(free);
        if !first_row_within_span(&row, lam, c) {
            return f64::NEG_INFINITY;
        }
        eval.inv_kappa_first_row(&row, sqrt_eps_r).unwrap_or(f64::NEG_INFINITY)
    };

    if v == 1 {
        let row = vec![base];
        let value = eval.inv_kappa_first_row(&row, sqrt_eps_r)?;
        return Ok(Optimum {
            best_params: Vec::new(),
            best_inv_kappa: value,
            first_row: row,
            constraint_active: false,
        });
    }

    let dims = v - 1;
    let per_dim = ((opts.coarse_budget as f64).powf(1.0 / dims as f64).floor() as usize)
        .clamp(2, opts.max_points_per_dim.max(2));
    let coarse_step = (upper - lower) / (per_dim - 1) as f64;
    let coord = |i: usize| lower + coarse_step * i as f64;
    let total = per_dim.pow(dims as u32);
    let decode = |mut flat: usize| -> Vec<f64> {
        let mut x = vec![0.0; dims];
        for slot in x.iter_mut().rev() {
            *slot = coord(flat % per_dim);
            flat /= per_dim;
        }
        x
    };
    let coarse: Vec<f64> = (0..total).into_par_iter().map(|i| objective(&decode(i))).collect();

    let mut order: Vec<usize> = (0..total).filter(|&i| coarse[i].is_finite()).collect();
    if order.is_empty() {
        return Err(Error::Infeasible("no coarse grid point satisfies the span constraint".into()));
    }
    order.sort_by(|&a, &b| coarse[b].total_cmp(&coarse[a]).then(a.cmp(&b)));
    order.truncate(opts.starts.max(1));

    let refined: Vec<(Vec<f64>, f64)> = order
        .par_iter()
        .map(|&i| {
            refine_coordinates(
                &objective,
                decode(i),
                coarse[i],
                coarse_step.max(f64::MIN_POSITIVE),
                (lower, upper),
                &opts,
                lam,
            )
        })
        .collect();

    let (best_x, best_val) = refined
        .into_iter()
        .reduce(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && lexicographic_less(&b.0, &a.0)) {
                b
            } else {
                a
            }
        })
        .expect("at least one start");
    let first_row = build(&best_x);
    let span = first_row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - first_row.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Optimum {
        best_params: names.into_iter().zip(best_x.iter().copied()).collect(),
        best_inv_kappa: best_val,
        constraint_active: span >= c * lam * (1.0 - 1e-6),
        first_row,
    })
}

fn lexicographic_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn refine_coordinates(
    objective: &(impl Fn(&[f64]) -> f64 + Sync),
    mut x: Vec<f64>,
    mut value: f64,
    mut step: f64,
    (lower, upper): (f64, f64),
    opts: &FirstRowOptions,
    lambda0: f64,
) -> (Vec<f64>, f64) {
    let half = (opts.refine_points.max(3) / 2) as i64;
    for _ in 0..opts.max_passes {
        if step < opts.tol * lambda0 {
            break;
        }
        let mut improved = false;
        for i in 0..x.len() {
            let current = x[i];
            let mut best = (current, value);
            for j in -half..=half {
                if j == 0 {
                    continue;
                }
                let candidate = (current + step * j as f64 / half as f64).clamp(lower, upper);
                if candidate == current {
                    continue;
                }
                x[i] = candidate;
                let f = objective(&x);
                if f > best.1 || (f == best.1 && f > value && candidate < best.0) {
                    best = (candidate, f);
                }
            }
            x[i] = best.0;
            if best.1 > value {
                value = best.1;
                improved = true;
            }
        }
        if !improved {
            step *= 0.25;
        }
    }
    (x, value)
}
