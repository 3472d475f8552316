//! The oracle suite behind the `verify` command.
//!
//! Each check compares an operation against an independent closed form or a
//! structural identity and returns a [`CheckOutcome`]. Randomized checks draw
//! from a seeded ChaCha stream, so a given seed always produces the same
//! instances and the same report.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::congruence::{
    integrate_raychaudhuri, monotone_quotient_check, FlrwCell, GeneralizedFlrw, RicciProfile,
    ScaleProfile,
};
use crate::counterexample::{divergence_report, CounterexampleInstance};
use crate::error::Result;
use crate::initial_data::InitialDataSet;
use crate::integral_bounds::{
    area_bound_binomial, area_bound_exact, area_bound_jensen, volume_bound_binomial,
    volume_bound_exact, volume_bound_jensen, AreaBoundReport, VolumeBoundReport,
};
use crate::level_sets::{generalized_area, left_limsup, sandwich_check, AreaHistory, Schedule};
use crate::model_geometry::ModelGeometry;
use crate::numerics::{pairwise_sum, rel_diff};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_INSTANCES: usize = 25;
/// Times at which random instances are compared with their bounds.
pub const CHECK_TIMES: [f64; 3] = [0.1, 1.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    pub step: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            instances: DEFAULT_INSTANCES,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub index: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(index: u8, name: &str, passed: bool, detail: String) -> Self {
        Self {
            index,
            name: name.to_string(),
            passed,
            detail,
        }
    }

    /// `[PASS] 3 ordering-chain: ...`
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {} {}: {}", self.index, self.name, self.detail)
    }
}

/// A random spacetime with nonnegative time-time Ricci curvature: every cell
/// has a linear scale factor positive on `[0, 5]` or a concave power profile.
pub fn random_spacetime(rng: &mut impl Rng) -> Result<GeneralizedFlrw> {
    let n = *[2u32, 3, 4].choose(rng).expect("nonempty");
    let cells = rng.gen_range(1..=50);
    let horizon = CHECK_TIMES[CHECK_TIMES.len() - 1];
    let cells = (0..cells)
        .map(|i| {
            let weight = rng.gen_range(0.05..2.0);
            let intercept = rng.gen_range(0.3..3.0);
            let profile = if rng.gen_bool(0.5) {
                // stay above 10% of the intercept up to the horizon
                let slope = rng.gen_range(-0.9 * intercept / horizon..2.0);
                ScaleProfile::linear(intercept, slope)
            } else {
                ScaleProfile::power(
                    intercept,
                    rng.gen_range(0.0..3.0),
                    rng.gen_range(0.05..=1.0),
                )
            };
            FlrwCell::new(format!("c{i}"), weight, profile)
        })
        .collect();
    GeneralizedFlrw::new(n, cells)
}

/// Adds `|K| = |H|/n · (1 + u)` with `u ∈ [0, 1)` to every cell.
pub fn with_random_k(data: &InitialDataSet, rng: &mut impl Rng) -> Result<InitialDataSet> {
    let nf = f64::from(data.n);
    let cells = data
        .cells
        .iter()
        .map(|c| {
            c.clone()
                .with_k(c.mean_curvature.abs() / nf * (1.0 + rng.gen_range(0.0..1.0)))
        })
        .collect();
    InitialDataSet::new(data.n, cells, data.label.clone())
}

struct Instance {
    spacetime: GeneralizedFlrw,
    data: InitialDataSet,
    /// Part index in `0..3` for every cell.
    parts: Vec<usize>,
}

fn instances(config: &VerifyConfig) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.instances)
        .map(|_| {
            let spacetime = random_spacetime(&mut rng)?;
            let data = with_random_k(&spacetime.induced_data()?, &mut rng)?;
            let parts = (0..data.cells.len()).map(|_| rng.gen_range(0..3)).collect();
            Ok(Instance {
                spacetime,
                data,
                parts,
            })
        })
        .collect()
}

fn sec_grid() -> Vec<f64> {
    (0..=100).map(|i| 0.05 * f64::from(i)).collect()
}

/// Maximum relative error of the flat expanding trajectory against
/// `θ = 3/(τ+1)`, `A = (1+τ)³` on `[0, 2]`.
pub fn model_regression_error(step: f64) -> Result<f64> {
    let traj = integrate_raychaudhuri(3.0, &RicciProfile::Zero, 3, 2.0, step)?;
    Ok(traj
        .samples
        .iter()
        .map(|s| {
            let theta = 3.0 / (s.tau + 1.0);
            let area = (1.0 + s.tau).powi(3);
            rel_diff(s.theta, theta).max(rel_diff(s.area, area))
        })
        .fold(0.0, f64::max))
}

pub fn check_model_regression(config: &VerifyConfig) -> Result<CheckOutcome> {
    let coarse = model_regression_error(config.step)?;
    let fine = model_regression_error(config.step / 2.0)?;
    let ratio = coarse / fine;
    Ok(CheckOutcome::new(
        1,
        "model-regression",
        coarse <= 1e-6 && ratio >= 12.0,
        format!(
            "max rel error {coarse:.3e} at step {}, halving ratio {ratio:.2}",
            config.step
        ),
    ))
}

fn check_area_theorem(insts: &[Instance]) -> Result<CheckOutcome> {
    let mut worst = f64::INFINITY;
    let mut sec_ok = true;
    for inst in insts {
        sec_ok &= inst.spacetime.satisfies_sec(&sec_grid())?;
        for t in CHECK_TIMES {
            let area = inst.spacetime.total_area(t)?;
            let bound = area_bound_exact(&inst.data, t)?;
            worst = worst.min((bound - area) / bound);
        }
    }
    Ok(CheckOutcome::new(
        2,
        "area-theorem",
        sec_ok && worst >= -1e-9,
        format!(
            "{} instances, energy condition {sec_ok}, min relative margin {worst:.3e}",
            insts.len()
        ),
    ))
}

fn check_ordering(insts: &[Instance]) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst_binomial: f64 = 0.0;
    for inst in insts {
        for t in CHECK_TIMES {
            let area = AreaBoundReport::compute(&inst.data, t)?;
            let volume = VolumeBoundReport::compute(&inst.data, t)?;
            for (exact, terms, cert) in [
                (area.exact, &area.binomial_terms, area.certificate),
                (volume.exact, &volume.binomial_terms, volume.certificate),
            ] {
                worst_binomial = worst_binomial.max(rel_diff(pairwise_sum(terms), exact));
                if !(cert.holds() && cert.jensen_le_from_k == Some(true)) {
                    failures += 1;
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        3,
        "ordering-chain",
        failures == 0 && worst_binomial <= 1e-12,
        format!("{failures} ordering failures, max binomial deviation {worst_binomial:.3e}"),
    ))
}

fn check_coarea(insts: &[Instance]) -> Result<CheckOutcome> {
    let mut worst_volume: f64 = 0.0;
    for n in [2, 3, 4, 5] {
        for beta in [0.0, 0.3, 1.0, 3.0, 10.0] {
            let model = ModelGeometry::new(n, beta)?;
            let history =
                AreaHistory::integrand(6.0, move |s| model.area(1.0, s).unwrap_or(f64::NAN))?;
            for t in [0.1, 1.0, 2.5, 6.0] {
                worst_volume =
                    worst_volume.max(rel_diff(history.omega_volume(t)?, model.volume(1.0, t)?));
            }
        }
    }
    let mut worst_derivative: f64 = 0.0;
    for inst in insts {
        for t in CHECK_TIMES {
            let h = 1e-4 * t;
            let fd = (volume_bound_exact(&inst.data, t + h)?
                - volume_bound_exact(&inst.data, t - h)?)
                / (2.0 * h);
            worst_derivative = worst_derivative.max(rel_diff(fd, area_bound_exact(&inst.data, t)?));
        }
    }
    Ok(CheckOutcome::new(
        4,
        "coarea",
        worst_volume <= 1e-9 && worst_derivative <= 1e-6,
        format!("volume deviation {worst_volume:.3e}, derivative deviation {worst_derivative:.3e}"),
    ))
}

fn check_generalized_area() -> Result<CheckOutcome> {
    let mut smooth: Vec<AreaHistory> = Vec::new();
    for (n, beta) in [(2, 0.5), (3, 3.0), (4, 1.0)] {
        smooth.push(AreaHistory::model(ModelGeometry::new(n, beta)?, 1.0, 4.0)?);
    }
    smooth.push(AreaHistory::integrand(4.0, |t| (1.0 + t).powi(2))?);
    smooth.push(AreaHistory::constant(2.0, 4.0)?);
    let mut worst_smooth: f64 = 0.0;
    for history in &smooth {
        for t in [0.5, 1.0, 3.0] {
            let est = generalized_area(history, t, Schedule::default_for(t))?;
            worst_smooth = worst_smooth.max((est.estimate - history.area_at(t)?).abs());
        }
    }

    let (t_jump, left, at) = (1.0, 3.0, 1.0);
    let jump = AreaHistory::exact(
        2.0,
        move |t| if t < t_jump { left } else { at },
        move |t| left * t.min(t_jump) + at * (t - t_jump).max(0.0),
    )?;
    let est = generalized_area(&jump, t_jump, Schedule::default_for(t_jump))?;
    let s_t = jump.area_at(t_jump)?;
    let limsup = left_limsup(&jump, &est)?;
    let verdict = sandwich_check(s_t, &est, limsup, 1e-6)?;
    let jump_ok = s_t < est.estimate && (est.estimate - left).abs() <= 1e-6 && verdict.holds;
    Ok(CheckOutcome::new(
        5,
        "generalized-area",
        worst_smooth <= 1e-4 && jump_ok,
        format!(
            "smooth deviation {worst_smooth:.3e}; jump s_T={s_t}, estimate {:.9}, left limit {left}",
            est.estimate
        ),
    ))
}

/// `|S_3| / 8` for `p = 1, n = 3` from the reduced closed form
/// `((j+1)³ + (3j-1)³/(2j-1)²) / (2j)`.
fn counterexample_ratio_closed_form(j: f64) -> f64 {
    ((j + 1.0).powi(3) + (3.0 * j - 1.0).powi(3) / (2.0 * j - 1.0).powi(2)) / (2.0 * j) / 8.0
}

pub fn check_counterexample() -> Result<CheckOutcome> {
    let mut worst_norm: f64 = 0.0;
    for j in [1, 10, 100, 10_000] {
        for p in [1.0, 1.5, 2.0] {
            worst_norm =
                worst_norm.max((CounterexampleInstance::build(j, p, 3)?.lp_norm()? - 1.0).abs());
        }
    }
    let ratio = divergence_report(1.0, 3, 3.0, &[100])?.rows[0].ratio;
    let ratio_dev = rel_diff(ratio, counterexample_ratio_closed_form(100.0));
    let slope = divergence_report(1.0, 3, 3.0, &[100, 1000, 10_000])?
        .growth_slope
        .unwrap_or(f64::NAN);
    let slope_dev = rel_diff(slope, 2.0);
    Ok(CheckOutcome::new(
        6,
        "counterexample",
        worst_norm <= 1e-12 && ratio_dev <= 0.01 && (ratio - 644.0).abs() <= 0.01 * 644.0 && slope_dev <= 0.05,
        format!("norm deviation {worst_norm:.3e}, ratio {ratio:.3} at j=100, slope {slope:.4} (expected 2)"),
    ))
}

pub fn check_focal_time(config: &VerifyConfig) -> Result<CheckOutcome> {
    let traj = integrate_raychaudhuri(-3.0, &RicciProfile::Zero, 3, 2.0, config.step)?;
    let focal = traj.focal_time;
    let dev = focal.map_or(f64::INFINITY, |f| (f - 1.0).abs());
    Ok(CheckOutcome::new(
        7,
        "focal-time",
        dev <= 1e-6,
        format!("focal time {focal:?}, deviation {dev:.3e}"),
    ))
}

fn check_monotone_quotient(insts: &[Instance], config: &VerifyConfig) -> Result<CheckOutcome> {
    let grid: Vec<f64> = (0..=500).map(|i| 0.01 * f64::from(i)).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for inst in insts {
        let beta = inst.data.max_h_plus();
        let areas = grid
            .iter()
            .map(|&t| inst.spacetime.total_area(t))
            .collect::<Result<Vec<_>>>()?;
        worst =
            worst.max(monotone_quotient_check(&grid, &areas, beta, inst.spacetime.n)?.max_increase);
        checked += 1;
    }
    for (theta0, ricci) in [
        (3.0, RicciProfile::Zero),
        (1.0, RicciProfile::Constant { value: 0.5 }),
        (-0.5, RicciProfile::Constant { value: 2.0 }),
        (
            2.0,
            RicciProfile::Table {
                times: vec![0.0, 1.0, 3.0],
                values: vec![0.0, 1.5, 0.2],
            },
        ),
    ] {
        let traj = integrate_raychaudhuri(theta0, &ricci, 3, 3.0, config.step)?;
        let beta = theta0.max(0.0);
        worst =
            worst.max(monotone_quotient_check(&traj.times(), &traj.areas(), beta, 3)?.max_increase);
        checked += 1;
    }
    Ok(CheckOutcome::new(
        8,
        "monotone-quotient",
        worst <= 1e-9,
        format!("{checked} histories, max relative increase {worst:.3e}"),
    ))
}

fn check_partition(insts: &[Instance]) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut track = |parts: [f64; 3], total: f64| {
        worst =
            worst.max((pairwise_sum(&parts) - total).abs() / total.abs().max(f64::MIN_POSITIVE));
    };
    for inst in insts {
        let part_data: Vec<InitialDataSet> = (0..3)
            .map(|k| {
                let ids: Vec<&str> = inst
                    .data
                    .cells
                    .iter()
                    .zip(&inst.parts)
                    .filter(|(_, &p)| p == k)
                    .map(|(c, _)| c.id.as_str())
                    .collect();
                inst.data.restrict_ids(&ids)
            })
            .collect();
        let part_st: Vec<GeneralizedFlrw> = (0..3)
            .map(|k| {
                let ids: Vec<&str> = part_data[k].cells.iter().map(|c| c.id.as_str()).collect();
                inst.spacetime.restrict(|c| ids.contains(&c.id.as_str()))
            })
            .collect();
        for t in CHECK_TIMES {
            let each = |f: &dyn Fn(&InitialDataSet) -> Result<f64>| -> Result<[f64; 3]> {
                Ok([f(&part_data[0])?, f(&part_data[1])?, f(&part_data[2])?])
            };
            track(
                each(&|d| area_bound_exact(d, t))?,
                area_bound_exact(&inst.data, t)?,
            );
            track(
                each(&|d| volume_bound_exact(d, t))?,
                volume_bound_exact(&inst.data, t)?,
            );
            track(
                each(&|d| area_bound_jensen(d, t, false))?,
                area_bound_jensen(&inst.data, t, false)?,
            );
            track(
                each(&|d| area_bound_jensen(d, t, true))?,
                area_bound_jensen(&inst.data, t, true)?,
            );
            track(
                each(&|d| volume_bound_jensen(d, t, false))?,
                volume_bound_jensen(&inst.data, t, false)?,
            );
            track(
                each(&|d| volume_bound_jensen(d, t, true))?,
                volume_bound_jensen(&inst.data, t, true)?,
            );
            let sum_terms = |d: &InitialDataSet, volume: bool| -> Result<f64> {
                let terms = if volume {
                    volume_bound_binomial(d, t)?
                } else {
                    area_bound_binomial(d, t)?
                };
                Ok(pairwise_sum(&terms))
            };
            track(
                each(&|d| sum_terms(d, false))?,
                sum_terms(&inst.data, false)?,
            );
            track(each(&|d| sum_terms(d, true))?, sum_terms(&inst.data, true)?);
            let evolved = [
                part_st[0].total_area(t)?,
                part_st[1].total_area(t)?,
                part_st[2].total_area(t)?,
            ];
            track(evolved, inst.spacetime.total_area(t)?);
        }
    }
    Ok(CheckOutcome::new(
        9,
        "partition-additivity",
        worst <= 1e-12,
        format!("max relative deviation {worst:.3e}"),
    ))
}

/// Runs all nine checks in order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    let insts = instances(config)?;
    Ok(vec![
        check_model_regression(config)?,
        check_area_theorem(&insts)?,
        check_ordering(&insts)?,
        check_coarea(&insts)?,
        check_generalized_area()?,
        check_counterexample()?,
        check_focal_time(config)?,
        check_monotone_quotient(&insts, config)?,
        check_partition(&insts)?,
    ])
}

/// Initial data of one random instance, for inspection.
pub fn sample_instance(seed: u64) -> Result<(GeneralizedFlrw, InitialDataSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let st = random_spacetime(&mut rng)?;
    let data = with_random_k(&st.induced_data()?, &mut rng)?;
    Ok((st, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::Cell;

    #[test]
    fn random_instances_are_reproducible_and_valid() {
        let (a, da) = sample_instance(3).unwrap();
        let (b, db) = sample_instance(3).unwrap();
        assert_eq!(a, b);
        assert_eq!(da, db);
        assert!(a.satisfies_sec(&sec_grid()).unwrap());
        assert!((1..=50).contains(&a.cells.len()));
        assert!(da.cells.iter().all(|c: &Cell| c.k_norm.is_some()));
    }

    #[test]
    fn ratio_closed_form_matches_exact_value() {
        // (101³ + 299³/199²)/200/8
        let exact = (1_030_301.0 + 26_730_899.0 / 39_601.0) / 200.0 / 8.0;
        assert!(rel_diff(counterexample_ratio_closed_form(100.0), exact) < 1e-15);
    }

    #[test]
    fn all_checks_pass_with_default_config() {
        for outcome in run_all(&VerifyConfig::default()).unwrap() {
            assert!(outcome.passed, "{}", outcome.line());
        }
    }
}
