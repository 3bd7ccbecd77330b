//! DE, SHADE and CMA-ES run under a fixed evaluation budget. Every evaluated
//! point is recorded in a [`SolutionTrace`]; the behavioural distance is
//! computed from these traces.

mod cmaes;
mod de;
mod shade;

pub use cmaes::{cmaes_step, CmaEsParams, CmaEsState};
pub use de::{binomial_crossover, de_mutant, de_step};
pub use shade::{pbest_pool_size, shade_step, ShadeState};

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Domain, ExprTree};
use crate::seed::StreamRng;

/// A minimisation objective over real vectors.
pub trait Objective: Sync {
    fn evaluate(&self, point: &[f64]) -> f64;
}

impl Objective for ExprTree {
    fn evaluate(&self, point: &[f64]) -> f64 {
        ExprTree::evaluate(self, point)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn evaluate(&self, point: &[f64]) -> f64 {
        (**self).evaluate(point)
    }
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn evaluate(&self, point: &[f64]) -> f64 {
        (self.0)(point)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("initial population has {found} points, config expects {expected}")]
    PopulationSize { expected: usize, found: usize },
    #[error("initial population point outside the domain")]
    PointOutsideDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    /// rand/1/bin differential evolution.
    De { f: f64, cr: f64 },
    /// Success-history adaptive DE with memory size `h`.
    Shade { h: usize, p_max: f64 },
    /// (mu/mu_w, lambda)-CMA-ES with initial step size `sigma0`.
    Cmaes { sigma0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(flatten)]
    pub algorithm: Algorithm,
    pub population_size: usize,
    pub budget: usize,
}

/// Names accepted by [`OptimizerConfig::preset`].
pub const PRESET_NAMES: [&str; 8] = [
    "de-f05",
    "de-f03",
    "shade-default",
    "cmaes-default",
    "de-f05-test",
    "de-f03-test",
    "shade-test",
    "cmaes-test",
];

impl OptimizerConfig {
    pub fn de(f: f64, cr: f64, population_size: usize, budget: usize) -> Self {
        OptimizerConfig {
            algorithm: Algorithm::De { f, cr },
            population_size,
            budget,
        }
    }

    pub fn shade(h: usize, p_max: f64, population_size: usize, budget: usize) -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Shade { h, p_max },
            population_size,
            budget,
        }
    }

    pub fn cmaes(sigma0: f64, population_size: usize, budget: usize) -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Cmaes { sigma0 },
            population_size,
            budget,
        }
    }

    /// Built-in parameter sets. The plain names are the 500-evaluation
    /// training configurations; the `-test` names are the 100000-evaluation
    /// validation configurations.
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "de-f05" => Self::de(0.5, 0.9, 20, 500),
            "de-f03" => Self::de(0.3, 0.9, 20, 500),
            "shade-default" => Self::shade(20, 0.2, 20, 500),
            "cmaes-default" => Self::cmaes(6.0, 20, 500),
            "de-f05-test" => Self::de(0.5, 0.9, 20, 100_000),
            "de-f03-test" => Self::de(0.3, 0.9, 20, 100_000),
            "shade-test" => Self::shade(100, 0.2, 100, 100_000),
            "cmaes-test" => Self::cmaes(6.0, 200, 100_000),
            _ => return None,
        })
    }

    pub fn with_budget(self, budget: usize) -> Self {
        OptimizerConfig { budget, ..self }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |msg: String| Err(OptimError::InvalidConfig(msg));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.budget < self.population_size {
            return bad(format!(
                "budget {} smaller than population_size {}",
                self.budget, self.population_size
            ));
        }
        match self.algorithm {
            Algorithm::De { f, cr } => {
                if self.population_size < 4 {
                    return bad("DE needs population_size >= 4".into());
                }
                if !f.is_finite() {
                    return bad("F must be finite".into());
                }
                if !(0.0..=1.0).contains(&cr) {
                    return bad(format!("CR {cr} not in [0, 1]"));
                }
            }
            Algorithm::Shade { h, p_max } => {
                if self.population_size < 4 {
                    return bad("SHADE needs population_size >= 4".into());
                }
                if h == 0 {
                    return bad("SHADE memory size H must be positive".into());
                }
                if !(p_max > 0.0 && p_max <= 1.0) {
                    return bad(format!("p_max {p_max} not in (0, 1]"));
                }
            }
            Algorithm::Cmaes { sigma0 } => {
                if self.population_size < 2 {
                    return bad("CMA-ES needs population_size >= 2".into());
                }
                if !(sigma0 > 0.0 && sigma0.is_finite()) {
                    return bad(format!("sigma0 {sigma0} must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Stable 64-bit identity of the configuration, used to derive RNG
    /// streams so identical configurations draw identical randomness.
    pub fn fingerprint(&self) -> u64 {
        let text = serde_json::to_string(self).expect("config serialises");
        crate::seed::fingerprint(text.as_bytes())
    }
}

/// Every point an optimizer evaluated, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub points: Vec<Vec<f64>>,
    pub fitnesses: Vec<f64>,
    pub best_point: Vec<f64>,
    pub best_fitness: f64,
}

impl SolutionTrace {
    fn with_capacity(n: usize) -> Self {
        SolutionTrace {
            points: Vec::with_capacity(n),
            fitnesses: Vec::with_capacity(n),
            best_point: Vec::new(),
            best_fitness: f64::INFINITY,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every recorded coordinate is finite.
    pub fn is_finite(&self) -> bool {
        self.points.iter().flatten().all(|x| x.is_finite())
    }

    /// Best fitness seen after each evaluation.
    pub fn running_best(&self) -> Vec<f64> {
        self.fitnesses
            .iter()
            .scan(f64::INFINITY, |best, &f| {
                *best = best.min(f);
                Some(*best)
            })
            .collect()
    }

    /// CSV with header `eval_index,x_0,...,x_{D-1},fitness`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let dim = self.points.first().map_or(0, Vec::len);
        write!(out, "eval_index")?;
        for i in 0..dim {
            write!(out, ",x_{i}")?;
        }
        writeln!(out, ",fitness")?;
        for (i, (p, f)) in self.points.iter().zip(&self.fitnesses).enumerate() {
            write!(out, "{i}")?;
            for x in p {
                write!(out, ",{x}")?;
            }
            writeln!(out, ",{f}")?;
        }
        Ok(())
    }
}

/// Uniform starting points shared by the optimizers of one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPopulation {
    pub points: Vec<Vec<f64>>,
}

impl InitialPopulation {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, domain: &Domain, size: usize) -> Self {
        InitialPopulation {
            points: (0..size).map(|_| domain.sample(rng)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.points.len() as f64;
        let dim = self.points.first().map_or(0, Vec::len);
        (0..dim)
            .map(|j| self.points.iter().map(|p| p[j]).sum::<f64>() / n)
            .collect()
    }
}

/// Budget-limited, recording wrapper around an objective.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    domain: Domain,
    budget: usize,
    trace: SolutionTrace,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, domain: Domain, budget: usize) -> Self {
        Evaluator {
            objective,
            domain,
            budget,
            trace: SolutionTrace::with_capacity(budget),
        }
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.trace.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Clamps `point` into the domain, evaluates and records it. Non-finite
    /// objective values are recorded as `+inf`.
    ///
    /// Panics when the budget is exhausted.
    pub fn evaluate(&mut self, mut point: Vec<f64>) -> f64 {
        assert!(self.remaining() > 0, "evaluation budget exhausted");
        self.domain.clamp_point(&mut point);
        let raw = self.objective.evaluate(&point);
        let fitness = if raw.is_finite() { raw } else { f64::INFINITY };
        if self.trace.is_empty() || fitness < self.trace.best_fitness {
            self.trace.best_fitness = fitness;
            self.trace.best_point = point.clone();
        }
        self.trace.points.push(point);
        self.trace.fitnesses.push(fitness);
        fitness
    }

    pub fn into_trace(self) -> SolutionTrace {
        self.trace
    }
}

/// A population with cached fitness values.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub points: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn evaluate(points: Vec<Vec<f64>>, evaluator: &mut Evaluator<'_>) -> Self {
        let fitness = points
            .iter()
            .map(|p| evaluator.evaluate(p.clone()))
            .collect();
        // Store the clamped coordinates actually evaluated.
        let points = points
            .into_iter()
            .map(|mut p| {
                evaluator.domain().clamp_point(&mut p);
                p
            })
            .collect();
        Population { points, fitness }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Runs one optimizer on `objective` from `init`, spending exactly
/// `config.budget` evaluations.
///
/// DE and SHADE evaluate `init` as their first generation. CMA-ES starts its
/// mean at the centroid of `init` and does not evaluate it.
pub fn run(
    config: &OptimizerConfig,
    objective: &dyn Objective,
    domain: &Domain,
    init: &InitialPopulation,
    rng: &mut StreamRng,
) -> Result<SolutionTrace, OptimError> {
    config.validate()?;
    if init.len() != config.population_size {
        return Err(OptimError::PopulationSize {
            expected: config.population_size,
            found: init.len(),
        });
    }
    if !init.points.iter().all(|p| domain.contains(p)) {
        return Err(OptimError::PointOutsideDomain);
    }
    let mut evaluator = Evaluator::new(objective, *domain, config.budget);
    match config.algorithm {
        Algorithm::De { f, cr } => {
            let mut pop = Population::evaluate(init.points.clone(), &mut evaluator);
            while evaluator.remaining() > 0 {
                pop = de_step(&pop, f, cr, rng, &mut evaluator);
            }
        }
        Algorithm::Shade { h, p_max } => {
            let pop = Population::evaluate(init.points.clone(), &mut evaluator);
            let mut state = ShadeState::new(pop, h, p_max);
            while evaluator.remaining() > 0 {
                state = shade_step(state, rng, &mut evaluator);
            }
        }
        Algorithm::Cmaes { sigma0 } => {
            let mut state = CmaEsState::new(&init.centroid(), sigma0, config.population_size);
            while evaluator.remaining() > 0 {
                state = cmaes_step(state, rng, &mut evaluator);
            }
        }
    }
    Ok(evaluator.into_trace())
}
