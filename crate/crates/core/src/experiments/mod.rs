//! Scenario files, the experiment runner and CSV output.

mod config;
mod output;
mod presets;

pub use config::{
    num, parse_length, Experiment, GeometrySettings, RawConfig, ScenarioConfig, Section, ShapeChoice, Spacing,
    DEFAULT_LAMBDA0, DEFAULT_RANGE,
};
pub use output::{render_csv, write_csv_atomic, ResultTable};
pub use presets::{preset, FIGURE_NAMES};

use rayon::prelude::*;

use crate::error::{ConfigError, Result};
use crate::medium::MediumSpec;
use crate::optimize::{optimize_first_row, optimize_l_delta, sweep_l12, sweep_l12_l13, FirstRowBounds, LinkEvaluator};

/// Runs the experiment described by `cfg` and tabulates the result.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let g = &cfg.geometry;
    let lam = g.lambda0;
    match &cfg.experiment {
        Experiment::Point => {
            let link = g.array_config()?;
            let report = LinkEvaluator::new(&link, g.path_model)?.evaluate_medium(&cfg.medium)?;
            let mut header = vec!["inv_kappa".to_string(), "floor_limited".to_string()];
            header.extend((1..=report.eigenvalues.len()).map(|i| format!("eigenvalue_{i}")));
            let mut row = vec![num(report.inv_kappa), report.numerically_floor_limited.to_string()];
            row.extend(report.eigenvalues.iter().map(|e| num(*e)));
            Ok(ResultTable::new(header, vec![row]))
        }
        Experiment::SweepL12 {
            sqrt_eps_r_values,
            l11,
            l12,
        } => {
            let link = g.array_config()?;
            let res = sweep_l12(&link, g.path_model, sqrt_eps_r_values, *l11, *l12)?;
            let rows = (0..res.values.len())
                .map(|i| {
                    let c = res.coordinates(i);
                    vec![num(c[0]), num(c[1]), num(c[1] / lam), num(res.values[i])]
                })
                .collect();
            Ok(ResultTable::new(
                ["sqrt_eps_r", "l12_m", "l12_lambda0", "inv_kappa"],
                rows,
            ))
        }
        Experiment::SweepL12L13 { l11, l12, l13 } => {
            let link = g.array_config()?;
            let res = sweep_l12_l13(&link, g.path_model, cfg.medium.sqrt_eps_r, *l11, *l12, *l13)?;
            let rows = (0..res.values.len())
                .map(|i| {
                    let c = res.coordinates(i);
                    vec![num(c[0]), num(c[0] / lam), num(c[1]), num(c[1] / lam), num(res.values[i])]
                })
                .collect();
            Ok(ResultTable::new(
                ["l12_m", "l12_lambda0", "l13_m", "l13_lambda0", "inv_kappa"],
                rows,
            ))
        }
        Experiment::OptimizeLDelta {
            shapes,
            sqrt_eps_r_values,
            eta_values,
            n_min,
            n_max,
            span_bound,
            options,
        } => {
            let etas: Vec<Option<f64>> = match eta_values {
                Some(v) => v.iter().map(|e| Some(*e)).collect(),
                None => vec![None],
            };
            let mut jobs = Vec::new();
            for eta in &etas {
                for &s in sqrt_eps_r_values {
                    for shape in shapes {
                        for n in *n_min..=*n_max {
                            jobs.push((*eta, s, *shape, n));
                        }
                    }
                }
            }
            let rows = jobs
                .par_iter()
                .map(|&(eta, s, shape, n)| -> Result<Vec<String>> {
                    let link = g.array_config_for(n, n, eta)?;
                    let eta_col = match (eta, g.spacing) {
                        (Some(e), _) | (None, Spacing::Eta(e)) => num(e),
                        (None, Spacing::Explicit { .. }) => String::new(),
                    };
                    let shape_name = shape.map_or("free_space".to_string(), |k| k.to_string());
                    match shape {
                        None => {
                            let rep = LinkEvaluator::new(&link, g.path_model)?.evaluate_medium(&MediumSpec::free_space())?;
                            Ok(vec![
                                eta_col,
                                num(s),
                                shape_name,
                                n.to_string(),
                                num(0.0),
                                num(0.0),
                                num(rep.inv_kappa),
                                rep.numerically_floor_limited.to_string(),
                                "false".into(),
                            ])
                        }
                        Some(kind) => {
                            let opt = optimize_l_delta(&link, g.path_model, kind, s, *span_bound, *options)?;
                            let l = opt.param("l_delta").unwrap_or(0.0);
                            let rep = LinkEvaluator::new(&link, g.path_model)?
                                .evaluate_medium(&MediumSpec::toeplitz(opt.first_row.clone(), s))?;
                            Ok(vec![
                                eta_col,
                                num(s),
                                shape_name,
                                n.to_string(),
                                num(l),
                                num(l / lam),
                                num(opt.best_inv_kappa),
                                rep.numerically_floor_limited.to_string(),
                                opt.constraint_active.to_string(),
                            ])
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ResultTable::new(
                [
                    "eta",
                    "sqrt_eps_r",
                    "shape",
                    "n",
                    "l_delta_m",
                    "l_delta_lambda0",
                    "inv_kappa",
                    "floor_limited",
                    "constraint_active",
                ],
                rows,
            ))
        }
        Experiment::OptimizeFirstRow {
            bounds,
            span_bound,
            options,
        } => {
            let link = g.array_config()?;
            let s = cfg.medium.sqrt_eps_r;
            let b = bounds.unwrap_or_else(|| FirstRowBounds::default_for(lam, s, *span_bound));
            let opt = optimize_first_row(&link, g.path_model, s, b, *span_bound, *options)?;
            let mut header = vec!["v".to_string(), "sqrt_eps_r".into(), "inv_kappa".into(), "constraint_active".into()];
            let mut row = vec![
                link.v().to_string(),
                num(s),
                num(opt.best_inv_kappa),
                opt.constraint_active.to_string(),
            ];
            for (k, l) in opt.first_row.iter().enumerate() {
                header.push(format!("l1{}_m", k + 1));
                row.push(num(*l));
            }
            for (k, l) in opt.first_row.iter().enumerate() {
                header.push(format!("l1{}_lambda0", k + 1));
                row.push(num(*l / lam));
            }
            Ok(ResultTable::new(header, vec![row]))
        }
    }
}

/// Loads a named figure preset, applies `section.key=value` overrides and runs it.
pub fn run_figure(name: &str, overrides: &[String]) -> Result<(ScenarioConfig, ResultTable)> {
    let text = preset(name).ok_or_else(|| {
        ConfigError::new(format!("unknown figure '{name}' (expected one of {})", FIGURE_NAMES.join(", ")))
    })?;
    let cfg = ScenarioConfig::parse_with_overrides(text, overrides)?;
    let table = run_scenario(&cfg)?;
    Ok((cfg, table))
}

/// Evaluates many scenarios in parallel, keeping input order.
pub fn run_batch(cfgs: &[ScenarioConfig]) -> Vec<Result<ResultTable>> {
    cfgs.par_iter().map(run_scenario).collect()
}
