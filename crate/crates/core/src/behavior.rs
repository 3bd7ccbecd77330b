//! Behavioural distance between two optimizers on one objective: the mean
//! over coordinates of the 1-Wasserstein distance between the empirical
//! distributions of every point each optimizer sampled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Domain;
use crate::optim::{
    self, InitialPopulation, Objective, OptimError, OptimizerConfig, SolutionTrace,
};
use crate::seed::{self, tag};

/// Default tolerance under which two best fitnesses count as equal.
pub const EQUAL_BEST_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("empty sample set")]
    EmptySample,
    #[error("non-finite sample value")]
    NonFinite,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Optimizer(#[from] OptimError),
}

/// 1-Wasserstein distance between two empirical distributions with equal
/// weight per sample, computed as the integral of the absolute difference of
/// their CDFs.
pub fn wasserstein_1d(u: &[f64], v: &[f64]) -> Result<f64, BehaviorError> {
    if u.is_empty() || v.is_empty() {
        return Err(BehaviorError::EmptySample);
    }
    if !u.iter().chain(v).all(|x| x.is_finite()) {
        return Err(BehaviorError::NonFinite);
    }
    let mut u = u.to_vec();
    let mut v = v.to_vec();
    u.sort_by(f64::total_cmp);
    v.sort_by(f64::total_cmp);
    let (nu, nv) = (u.len(), v.len());

    let (mut i, mut j) = (0usize, 0usize);
    let mut x = u[0].min(v[0]);
    let mut total = 0.0;
    loop {
        while i < nu && u[i] <= x {
            i += 1;
        }
        while j < nv && v[j] <= x {
            j += 1;
        }
        let next = match (u.get(i), v.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        let gap = (i as f64 / nu as f64 - j as f64 / nv as f64).abs();
        total += gap * (next - x);
        x = next;
    }
    Ok(total)
}

/// Mean over coordinates of [`wasserstein_1d`] between the projections of
/// two point sets.
pub fn behavioral_distance(u: &[Vec<f64>], v: &[Vec<f64>]) -> Result<f64, BehaviorError> {
    let (first_u, first_v) = match (u.first(), v.first()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(BehaviorError::EmptySample),
    };
    let dim = first_u.len();
    if first_v.len() != dim {
        return Err(BehaviorError::DimensionMismatch(dim, first_v.len()));
    }
    if let Some(bad) = u.iter().chain(v).find(|p| p.len() != dim) {
        return Err(BehaviorError::DimensionMismatch(dim, bad.len()));
    }
    if dim == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for k in 0..dim {
        let pu: Vec<f64> = u.iter().map(|p| p[k]).collect();
        let pv: Vec<f64> = v.iter().map(|p| p[k]).collect();
        sum += wasserstein_1d(&pu, &pv)?;
    }
    Ok(sum / dim as f64)
}

/// How per-repetition traces are turned into one distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Distance per repetition, then the mean over repetitions.
    #[default]
    PerRepetition,
    /// Union of all repetitions' points, then a single distance.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSettings {
    pub repetitions: usize,
    pub mode: DistanceMode,
    pub equal_best_tolerance: f64,
}

impl Default for PairSettings {
    fn default() -> Self {
        PairSettings {
            repetitions: 3,
            mode: DistanceMode::PerRepetition,
            equal_best_tolerance: EQUAL_BEST_TOLERANCE,
        }
    }
}

impl PairSettings {
    pub fn with_repetitions(repetitions: usize) -> Self {
        PairSettings {
            repetitions,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorScore {
    pub d: f64,
    pub best_f1: f64,
    pub best_f2: f64,
    pub equal_best: bool,
    pub valid: bool,
}

/// Runs both optimizers for each repetition and returns the trace pairs.
///
/// Repetition `k` draws one initial population shared by both optimizers
/// (sized for the larger of the two; each takes its own prefix). Each
/// optimizer's RNG stream is derived from the seed, the repetition and the
/// optimizer's configuration fingerprint, so two identical configurations
/// produce identical traces.
pub fn pair_traces(
    h: &dyn Objective,
    opt1: &OptimizerConfig,
    opt2: &OptimizerConfig,
    domain: &Domain,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<(SolutionTrace, SolutionTrace)>, BehaviorError> {
    let size = opt1.population_size.max(opt2.population_size);
    (0..repetitions as u64)
        .map(|k| {
            let mut init_rng = seed::stream(seed, &[tag::INIT, k]);
            let shared = InitialPopulation::sample(&mut init_rng, domain, size);
            let run_one = |cfg: &OptimizerConfig| {
                let init = InitialPopulation {
                    points: shared.points[..cfg.population_size].to_vec(),
                };
                let mut rng = seed::stream(seed, &[tag::OPTIMIZER, k, cfg.fingerprint()]);
                optim::run(cfg, h, domain, &init, &mut rng)
            };
            Ok((run_one(opt1)?, run_one(opt2)?))
        })
        .collect()
}

/// Scores how differently `opt1` and `opt2` behave on `h`.
///
/// The score is marked invalid, with `d = 0`, when a trace holds a
/// non-finite coordinate or an optimizer never saw a finite fitness.
pub fn evaluate_pair(
    h: &dyn Objective,
    opt1: &OptimizerConfig,
    opt2: &OptimizerConfig,
    domain: &Domain,
    settings: &PairSettings,
    seed: u64,
) -> Result<BehaviorScore, BehaviorError> {
    assert!(settings.repetitions >= 1, "need at least one repetition");
    let runs = pair_traces(h, opt1, opt2, domain, settings.repetitions, seed)?;
    Ok(score_traces(&runs, settings))
}

/// Reduces trace pairs to a [`BehaviorScore`] in repetition order.
pub fn score_traces(
    runs: &[(SolutionTrace, SolutionTrace)],
    settings: &PairSettings,
) -> BehaviorScore {
    let best_f1 = runs
        .iter()
        .map(|(a, _)| a.best_fitness)
        .fold(f64::INFINITY, f64::min);
    let best_f2 = runs
        .iter()
        .map(|(_, b)| b.best_fitness)
        .fold(f64::INFINITY, f64::min);
    let finite_points = runs.iter().all(|(a, b)| a.is_finite() && b.is_finite());
    let distance = if finite_points {
        match settings.mode {
            DistanceMode::PerRepetition => runs
                .iter()
                .map(|(a, b)| behavioral_distance(&a.points, &b.points))
                .sum::<Result<f64, _>>()
                .map(|s| s / runs.len() as f64)
                .ok(),
            DistanceMode::Pooled => {
                let u: Vec<Vec<f64>> = runs.iter().flat_map(|(a, _)| a.points.clone()).collect();
                let v: Vec<Vec<f64>> = runs.iter().flat_map(|(_, b)| b.points.clone()).collect();
                behavioral_distance(&u, &v).ok()
            }
        }
    } else {
        None
    };
    let valid = distance.is_some() && best_f1.is_finite() && best_f2.is_finite();
    BehaviorScore {
        d: if valid { distance.unwrap_or(0.0) } else { 0.0 },
        best_f1,
        best_f2,
        equal_best: (best_f1 - best_f2).abs() <= settings.equal_best_tolerance,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprTree;
    use crate::optim::FnObjective;

    fn sorted_mean_abs(u: &[f64], v: &[f64]) -> f64 {
        let mut u = u.to_vec();
        let mut v = v.to_vec();
        u.sort_by(f64::total_cmp);
        v.sort_by(f64::total_cmp);
        u.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum::<f64>() / u.len() as f64
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(
            wasserstein_1d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(wasserstein_1d(&[0.0], &[1.0]).unwrap(), 1.0);
        let oracle = sorted_mean_abs(&[0.0, 0.0], &[0.0, 2.0]);
        assert_eq!(oracle, 1.0);
        assert_eq!(wasserstein_1d(&[0.0, 0.0], &[0.0, 2.0]).unwrap(), oracle);
    }

    #[test]
    fn wasserstein_unequal_sizes() {
        // u = {0, 1}, v = {0}: CDFs differ by 1/2 on [0, 1).
        assert_eq!(wasserstein_1d(&[0.0, 1.0], &[0.0]).unwrap(), 0.5);
        // u = {0, 1, 2}, v = {1}: 1/3 on [0,1) + 1/3 on [1,2).
        let w = wasserstein_1d(&[0.0, 1.0, 2.0], &[1.0]).unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_errors() {
        assert_eq!(wasserstein_1d(&[], &[1.0]), Err(BehaviorError::EmptySample));
        assert_eq!(wasserstein_1d(&[1.0], &[]), Err(BehaviorError::EmptySample));
        assert_eq!(
            wasserstein_1d(&[f64::NAN], &[1.0]),
            Err(BehaviorError::NonFinite)
        );
        assert!(BehaviorError::EmptySample
            .to_string()
            .contains("empty sample set"));
    }

    #[test]
    fn behavioral_distance_examples() {
        let u = vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![0.5, 0.5]];
        assert_eq!(behavioral_distance(&u, &u).unwrap(), 0.0);
        let shift = |dx: f64, dy: f64| {
            u.iter()
                .map(|p| vec![p[0] + dx, p[1] + dy])
                .collect::<Vec<_>>()
        };
        assert!((behavioral_distance(&u, &shift(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((behavioral_distance(&u, &shift(2.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            behavioral_distance(&u, &[vec![1.0]]),
            Err(BehaviorError::DimensionMismatch(2, 1))
        );
        assert_eq!(
            behavioral_distance(&[], &u),
            Err(BehaviorError::EmptySample)
        );
    }

    fn sphere() -> ExprTree {
        "(add (mul x0 x0) (mul x1 x1))".parse().unwrap()
    }

    #[test]
    fn identical_configs_give_zero_distance() {
        let de = OptimizerConfig::preset("de-f05").unwrap();
        let score = evaluate_pair(
            &sphere(),
            &de,
            &de,
            &Domain::default(),
            &PairSettings::default(),
            4,
        )
        .unwrap();
        assert_eq!(score.d, 0.0);
        assert!(score.equal_best && score.valid);
    }

    #[test]
    fn constant_function_has_equal_best() {
        let c: ExprTree = "5".parse().unwrap();
        let a = OptimizerConfig::preset("shade-default").unwrap();
        let b = OptimizerConfig::preset("cmaes-default").unwrap();
        let score =
            evaluate_pair(&c, &a, &b, &Domain::default(), &PairSettings::default(), 1).unwrap();
        assert_eq!(score.best_f1, 5.0);
        assert_eq!(score.best_f2, 5.0);
        assert!(score.equal_best);
    }

    #[test]
    fn per_repetition_mode_averages() {
        let a = OptimizerConfig::preset("de-f05").unwrap().with_budget(100);
        let b = OptimizerConfig::preset("de-f03").unwrap().with_budget(100);
        let domain = Domain::default();
        let h: ExprTree = "(sub (sin (mul 2 x0)) (cos x1))".parse().unwrap();
        let runs = pair_traces(&h, &a, &b, &domain, 3, 8).unwrap();
        let per: Vec<f64> = runs
            .iter()
            .map(|(u, v)| behavioral_distance(&u.points, &v.points).unwrap())
            .collect();
        let score =
            evaluate_pair(&h, &a, &b, &domain, &PairSettings::with_repetitions(3), 8).unwrap();
        assert_eq!(score.d, (per[0] + per[1] + per[2]) / 3.0);

        let pooled = PairSettings {
            mode: DistanceMode::Pooled,
            ..PairSettings::with_repetitions(3)
        };
        let pooled_score = evaluate_pair(&h, &a, &b, &domain, &pooled, 8).unwrap();
        assert!(pooled_score.d >= 0.0);
        assert_eq!(pooled_score.best_f1, score.best_f1);
    }

    #[test]
    fn swapping_optimizers_is_symmetric() {
        let a = OptimizerConfig::preset("shade-default")
            .unwrap()
            .with_budget(120);
        let b = OptimizerConfig::preset("cmaes-default")
            .unwrap()
            .with_budget(120);
        let domain = Domain::default();
        let h: ExprTree = "(add (mul x0 (sin x1)) (sqrt x0))".parse().unwrap();
        let s = PairSettings::with_repetitions(2);
        let ab = evaluate_pair(&h, &a, &b, &domain, &s, 21).unwrap();
        let ba = evaluate_pair(&h, &b, &a, &domain, &s, 21).unwrap();
        assert_eq!(ab.d, ba.d);
        assert_eq!(ab.best_f1, ba.best_f2);
        assert_eq!(ab.best_f2, ba.best_f1);
    }

    #[test]
    fn all_infinite_objective_is_invalid() {
        let obj = FnObjective(|_: &[f64]| f64::INFINITY);
        let a = OptimizerConfig::preset("de-f05").unwrap().with_budget(40);
        let score = evaluate_pair(
            &obj,
            &a,
            &a,
            &Domain::default(),
            &PairSettings::with_repetitions(1),
            0,
        )
        .unwrap();
        assert!(!score.valid);
        assert_eq!(score.d, 0.0);
        assert!(!score.equal_best);
    }

    #[test]
    fn mismatched_population_sizes_share_prefix() {
        let a = OptimizerConfig::de(0.5, 0.9, 10, 10);
        let b = OptimizerConfig::de(0.5, 0.9, 20, 20);
        let runs = pair_traces(&sphere(), &a, &b, &Domain::default(), 1, 3).unwrap();
        assert_eq!(runs[0].0.points[..], runs[0].1.points[..10]);
    }
}
