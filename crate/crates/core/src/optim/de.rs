use rand::Rng;

use super::{Evaluator, Population};

/// `x1 + f * (x2 - x3)`.
pub fn de_mutant(x1: &[f64], x2: &[f64], x3: &[f64], f: f64) -> Vec<f64> {
    x1.iter()
        .zip(x2)
        .zip(x3)
        .map(|((a, b), c)| a + f * (b - c))
        .collect()
}

/// Binomial crossover: each coordinate comes from `donor` with probability
/// `cr`, and one uniformly chosen coordinate always does.
pub fn binomial_crossover<R: Rng + ?Sized>(
    target: &[f64],
    donor: &[f64],
    cr: f64,
    rng: &mut R,
) -> Vec<f64> {
    let forced = rng.random_range(0..target.len());
    target
        .iter()
        .zip(donor)
        .enumerate()
        .map(|(j, (&t, &d))| {
            if j == forced || rng.random::<f64>() < cr {
                d
            } else {
                t
            }
        })
        .collect()
}

/// `count` distinct indices in `0..n`, none equal to `exclude`.
pub(crate) fn distinct_indices<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    exclude: usize,
    count: usize,
) -> Vec<usize> {
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let r = rng.random_range(0..n);
        if r != exclude && !picked.contains(&r) {
            picked.push(r);
        }
    }
    picked
}

/// One rand/1/bin generation. Trials are built from the current population,
/// clamped, evaluated in index order while budget remains, and replace their
/// parent when not worse.
pub fn de_step<R: Rng + ?Sized>(
    population: &Population,
    f: f64,
    cr: f64,
    rng: &mut R,
    evaluator: &mut Evaluator<'_>,
) -> Population {
    let n = population.len();
    assert!(n >= 4, "DE needs at least 4 individuals");
    let trials: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r = distinct_indices(rng, n, i, 3);
            let p = &population.points;
            let mutant = de_mutant(&p[r[0]], &p[r[1]], &p[r[2]], f);
            let mut trial = binomial_crossover(&p[i], &mutant, cr, rng);
            evaluator.domain().clamp_point(&mut trial);
            trial
        })
        .collect();

    let mut next = population.clone();
    for (i, trial) in trials.into_iter().enumerate() {
        if evaluator.remaining() == 0 {
            break;
        }
        let fitness = evaluator.evaluate(trial.clone());
        if fitness <= next.fitness[i] {
            next.points[i] = trial;
            next.fitness[i] = fitness;
        }
    }
    next
}
