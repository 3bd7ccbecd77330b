//! Success-history adaptive DE with current-to-pbest/1 mutation, an external
//! archive of replaced parents, and circular (F, CR) memories.

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use super::de::binomial_crossover;
use super::{Evaluator, Population};

const SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ShadeState {
    pub population: Population,
    pub memory_f: Vec<f64>,
    pub memory_cr: Vec<f64>,
    /// Parents displaced by strictly better trials; capped at population size.
    pub archive: Vec<Vec<f64>>,
    pub next_slot: usize,
    pub p_max: f64,
}

impl ShadeState {
    pub fn new(population: Population, h: usize, p_max: f64) -> Self {
        assert!(h > 0);
        ShadeState {
            population,
            memory_f: vec![0.5; h],
            memory_cr: vec![0.5; h],
            archive: Vec::new(),
            next_slot: 0,
            p_max,
        }
    }
}

/// Size of the top-`p` pool pbest is drawn from.
pub fn pbest_pool_size(p: f64, population: usize) -> usize {
    ((p * population as f64).round() as usize).clamp(1, population)
}

fn sample_f<R: Rng + ?Sized>(rng: &mut R, location: f64) -> f64 {
    let cauchy = Cauchy::new(location, SCALE).expect("positive scale");
    loop {
        let f = cauchy.sample(rng);
        if f > 0.0 {
            return f.min(1.0);
        }
    }
}

fn sample_cr<R: Rng + ?Sized>(rng: &mut R, location: f64) -> f64 {
    Normal::new(location, SCALE)
        .expect("positive scale")
        .sample(rng)
        .clamp(0.0, 1.0)
}

/// One SHADE generation.
pub fn shade_step<R: Rng + ?Sized>(
    mut state: ShadeState,
    rng: &mut R,
    evaluator: &mut Evaluator<'_>,
) -> ShadeState {
    let n = state.population.len();
    assert!(n >= 4, "SHADE needs at least 4 individuals");
    let h = state.memory_f.len();

    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| state.population.fitness[a].total_cmp(&state.population.fitness[b]));
    let p_min = 2.0 / n as f64;

    let mut params = Vec::with_capacity(n);
    let mut trials = Vec::with_capacity(n);
    for i in 0..n {
        let r = rng.random_range(0..h);
        let cr = sample_cr(rng, state.memory_cr[r]);
        let f = sample_f(rng, state.memory_f[r]);
        let p = if state.p_max > p_min {
            rng.random_range(p_min..=state.p_max)
        } else {
            p_min
        };
        let pool = pbest_pool_size(p, n);
        let pbest = ranked[rng.random_range(0..pool)];

        let pts = &state.population.points;
        let r1 = loop {
            let r = rng.random_range(0..n);
            if r != i {
                break r;
            }
        };
        let combined = n + state.archive.len();
        let r2 = loop {
            let r = rng.random_range(0..combined);
            if r != i && r != r1 {
                break r;
            }
        };
        let x_r2 = if r2 < n {
            &pts[r2]
        } else {
            &state.archive[r2 - n]
        };
        let x = &pts[i];
        let mutant: Vec<f64> = (0..x.len())
            .map(|j| x[j] + f * (pts[pbest][j] - x[j]) + f * (pts[r1][j] - x_r2[j]))
            .collect();
        let mut trial = binomial_crossover(x, &mutant, cr, rng);
        evaluator.domain().clamp_point(&mut trial);
        params.push((f, cr));
        trials.push(trial);
    }

    let mut s_f = Vec::new();
    let mut s_cr = Vec::new();
    let mut gains = Vec::new();
    for (i, trial) in trials.into_iter().enumerate() {
        if evaluator.remaining() == 0 {
            break;
        }
        let fitness = evaluator.evaluate(trial.clone());
        let parent = state.population.fitness[i];
        if fitness <= parent {
            if fitness < parent {
                state.archive.push(state.population.points[i].clone());
                s_f.push(params[i].0);
                s_cr.push(params[i].1);
                gains.push(parent - fitness);
            }
            state.population.points[i] = trial;
            state.population.fitness[i] = fitness;
        }
    }

    while state.archive.len() > n {
        let victim = rng.random_range(0..state.archive.len());
        state.archive.swap_remove(victim);
    }

    if !s_f.is_empty() {
        let total: f64 = gains.iter().sum();
        let weights: Vec<f64> = if total.is_finite() && total > 0.0 {
            gains.iter().map(|g| g / total).collect()
        } else {
            vec![1.0 / gains.len() as f64; gains.len()]
        };
        let cr_mean: f64 = weights.iter().zip(&s_cr).map(|(w, c)| w * c).sum();
        let f_num: f64 = weights.iter().zip(&s_f).map(|(w, f)| w * f * f).sum();
        let f_den: f64 = weights.iter().zip(&s_f).map(|(w, f)| w * f).sum();
        state.memory_cr[state.next_slot] = cr_mean;
        state.memory_f[state.next_slot] = f_num / f_den;
        state.next_slot = (state.next_slot + 1) % h;
    }
    state
}
