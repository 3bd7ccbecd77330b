//! Post-hoc validation of evolved functions at higher dimension.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Domain, ExprError, ExprTree};
use crate::optim::{self, InitialPopulation, Objective, OptimError, OptimizerConfig};
use crate::seed::{self, tag};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("lifting needs a 2-D base function: {0}")]
    NotTwoDimensional(ExprError),
    #[error("lifted dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("unknown baseline `{0}`")]
    UnknownBaseline(String),
    #[error(transparent)]
    Optimizer(#[from] OptimError),
}

/// `h^D(x) = 1/(D-1) * sum_{i=0}^{D-2} h(x_i, x_{i+1})` for a 2-D base `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedFunction {
    base: ExprTree,
    dimension: usize,
}

impl LiftedFunction {
    pub fn base(&self) -> &ExprTree {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

pub fn lift(base: ExprTree, dimension: usize) -> Result<LiftedFunction, BenchError> {
    base.check_dimension(2)
        .map_err(BenchError::NotTwoDimensional)?;
    if dimension < 2 {
        return Err(BenchError::DimensionTooSmall(dimension));
    }
    Ok(LiftedFunction { base, dimension })
}

impl Objective for LiftedFunction {
    fn evaluate(&self, x: &[f64]) -> f64 {
        let sum: f64 = x[..self.dimension]
            .windows(2)
            .map(|pair| self.base.evaluate(pair))
            .sum();
        sum / (self.dimension - 1) as f64
    }
}

/// Classic unshifted test functions, each with its minimum 0 at the origin
/// (Rosenbrock: at the all-ones point).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Sphere,
    Rastrigin,
    Ackley,
    Rosenbrock,
    Griewank,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Sphere,
        Baseline::Rastrigin,
        Baseline::Ackley,
        Baseline::Rosenbrock,
        Baseline::Griewank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Sphere => "sphere",
            Baseline::Rastrigin => "rastrigin",
            Baseline::Ackley => "ackley",
            Baseline::Rosenbrock => "rosenbrock",
            Baseline::Griewank => "griewank",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| BenchError::UnknownBaseline(s.to_string()))
    }
}

pub fn baseline(name: &str) -> Result<Baseline, BenchError> {
    name.parse()
}

impl Objective for Baseline {
    fn evaluate(&self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        match self {
            Baseline::Sphere => x.iter().map(|v| v * v).sum(),
            Baseline::Rastrigin => {
                10.0 * n
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Baseline::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            Baseline::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            Baseline::Griewank => {
                let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum - prod + 1.0
            }
        }
    }
}

/// Mean pairwise Euclidean distance between `a` and `b`, normalised by the
/// domain diameter `sqrt(D) * (upper - lower)`.
pub fn delta_x(a: &[Vec<f64>], b: &[Vec<f64>], domain: &Domain) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "best sets must be non-empty"
    );
    let total: f64 = a
        .iter()
        .flat_map(|p| {
            b.iter().map(move |q| {
                p.iter()
                    .zip(q)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
        })
        .sum();
    let diameter = (domain.dimension as f64).sqrt() * domain.width();
    total / (a.len() * b.len()) as f64 / diameter
}

/// Mean pairwise absolute fitness difference between `a` and `b`, normalised
/// by the fitness range of their union; 0 when that range is 0.
pub fn delta_f(a: &[f64], b: &[f64]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "best sets must be non-empty"
    );
    let (lo, hi) = a
        .iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| {
            (lo.min(f), hi.max(f))
        });
    let range = hi - lo;
    if range == 0.0 {
        return 0.0;
    }
    let total: f64 = a
        .iter()
        .flat_map(|fa| b.iter().map(move |fb| (fa - fb).abs()))
        .sum();
    total / (a.len() * b.len()) as f64 / range
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    pub point: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub function: String,
    pub dimension: usize,
    pub repetitions: usize,
    pub budget: usize,
    pub delta_x: f64,
    pub delta_f: f64,
    #[serde(rename = "A")]
    pub a: Vec<BestSolution>,
    #[serde(rename = "B")]
    pub b: Vec<BestSolution>,
}

/// Runs each optimizer `repetitions` times with `budget` evaluations and
/// compares their best solutions.
///
/// Each optimizer draws its own initial population per repetition. Streams
/// are keyed by the optimizer's configuration, so identical configurations
/// reproduce each other exactly.
#[allow(clippy::too_many_arguments)]
pub fn validate(
    function: &dyn Objective,
    label: &str,
    opt1: &OptimizerConfig,
    opt2: &OptimizerConfig,
    domain: &Domain,
    repetitions: usize,
    budget: usize,
    seed: u64,
) -> Result<ValidationReport, BenchError> {
    assert!(repetitions >= 1, "need at least one repetition");
    let opt1 = opt1.with_budget(budget);
    let opt2 = opt2.with_budget(budget);
    let best_set = |cfg: &OptimizerConfig| -> Result<Vec<BestSolution>, BenchError> {
        let key = cfg.fingerprint();
        (0..repetitions as u64)
            .into_par_iter()
            .map(|k| {
                let mut init_rng = seed::stream(seed, &[tag::INIT, k, key]);
                let init = InitialPopulation::sample(&mut init_rng, domain, cfg.population_size);
                let mut rng = seed::stream(seed, &[tag::OPTIMIZER, k, key]);
                let trace = optim::run(cfg, function, domain, &init, &mut rng)?;
                Ok(BestSolution {
                    point: trace.best_point,
                    fitness: trace.best_fitness,
                })
            })
            .collect()
    };
    let a = best_set(&opt1)?;
    let b = best_set(&opt2)?;
    let pa: Vec<Vec<f64>> = a.iter().map(|s| s.point.clone()).collect();
    let pb: Vec<Vec<f64>> = b.iter().map(|s| s.point.clone()).collect();
    let fa: Vec<f64> = a.iter().map(|s| s.fitness).collect();
    let fb: Vec<f64> = b.iter().map(|s| s.fitness).collect();
    Ok(ValidationReport {
        function: label.to_string(),
        dimension: domain.dimension,
        repetitions,
        budget,
        delta_x: delta_x(&pa, &pb, domain),
        delta_f: delta_f(&fa, &fb),
        a,
        b,
    })
}
