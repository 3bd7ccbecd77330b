//! Fitness-landscape descriptors used to address archive cells: fitness
//! distance correlation, random-walk neutrality, and the equal-best flag.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Domain;
use crate::optim::Objective;
use crate::seed::{self, tag};

/// Bins per continuous descriptor axis.
pub const BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlaError {
    #[error("undefined descriptor: fdc={fdc}, neutrality={neutrality}")]
    UndefinedDescriptor { fdc: f64, neutrality: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fdc {
    pub value: f64,
    /// Fitness or distance had zero spread; `value` is 0 by convention.
    pub degenerate: bool,
}

/// Pearson correlation with population normalisation throughout, clamped to
/// `[-1, 1]`. `None` when either input has zero range.
pub fn correlation(f: &[f64], d: &[f64]) -> Option<f64> {
    assert_eq!(f.len(), d.len());
    let n = f.len() as f64;
    let spread = |xs: &[f64]| {
        let (lo, hi) = xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        hi - lo
    };
    if f.len() < 2 || spread(f) == 0.0 || spread(d) == 0.0 {
        return None;
    }
    let mean_f = f.iter().sum::<f64>() / n;
    let mean_d = d.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_f = 0.0;
    let mut var_d = 0.0;
    for (&fi, &di) in f.iter().zip(d) {
        let (a, b) = (fi - mean_f, di - mean_d);
        cov += a * b;
        var_f += a * a;
        var_d += b * b;
    }
    let r = (cov / n) / ((var_f / n).sqrt() * (var_d / n).sqrt());
    Some(if r.is_nan() { r } else { r.clamp(-1.0, 1.0) })
}

/// FDC of sampled points, using the best (lowest-fitness, first on ties)
/// sample as the reference optimum.
pub fn fdc_from_samples(points: &[Vec<f64>], fitness: &[f64]) -> Fdc {
    let best = fitness
        .iter()
        .enumerate()
        .fold(0, |best, (i, &f)| if f < fitness[best] { i } else { best });
    let distances: Vec<f64> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&points[best])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    match correlation(fitness, &distances) {
        Some(value) => Fdc {
            value,
            degenerate: false,
        },
        None => Fdc {
            value: 0.0,
            degenerate: true,
        },
    }
}

/// Fitness distance correlation over `n_samples` uniform samples. A
/// non-finite objective value makes the result NaN.
pub fn fdc<R: Rng + ?Sized>(
    h: &dyn Objective,
    domain: &Domain,
    n_samples: usize,
    rng: &mut R,
) -> Fdc {
    assert!(n_samples >= 2, "FDC needs at least two samples");
    let points: Vec<Vec<f64>> = (0..n_samples).map(|_| domain.sample(rng)).collect();
    let fitness: Vec<f64> = points.iter().map(|p| h.evaluate(p)).collect();
    if fitness.iter().any(|f| !f.is_finite()) {
        return Fdc {
            value: f64::NAN,
            degenerate: false,
        };
    }
    fdc_from_samples(&points, &fitness)
}

/// Fraction of consecutive pairs whose fitness differs by strictly less than
/// `eps`.
pub fn neutral_fraction(fitness: &[f64], eps: f64) -> f64 {
    assert!(fitness.len() >= 2, "need at least two walk points");
    let neutral = fitness
        .windows(2)
        .filter(|w| (w[0] - w[1]).abs() < eps)
        .count();
    neutral as f64 / (fitness.len() - 1) as f64
}

/// Random-walk neutrality.
///
/// The walk visits `steps` points. It starts uniformly in the domain; each
/// move perturbs every coordinate by `U[-s, s]` with
/// `s = step_fraction * (upper - lower)` and clamps back into the domain.
pub fn neutrality<R: Rng + ?Sized>(
    h: &dyn Objective,
    domain: &Domain,
    steps: usize,
    eps: f64,
    step_fraction: f64,
    rng: &mut R,
) -> f64 {
    assert!(steps >= 2, "neutrality needs at least two walk points");
    let reach = step_fraction * domain.width();
    let mut point = domain.sample(rng);
    let mut fitness = Vec::with_capacity(steps);
    fitness.push(h.evaluate(&point));
    for _ in 1..steps {
        for x in point.iter_mut() {
            *x = domain.clamp(*x + rng.random_range(-reach..=reach));
        }
        fitness.push(h.evaluate(&point));
    }
    neutral_fraction(&fitness, eps)
}

/// Archive cell address: FDC bin, neutrality bin, equal-best layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct Bin {
    pub fdc: u8,
    pub neutrality: u8,
    pub layer: u8,
}

impl Bin {
    pub fn new(fdc: u8, neutrality: u8, layer: u8) -> Self {
        Bin {
            fdc,
            neutrality,
            layer,
        }
    }
}

impl From<[u8; 3]> for Bin {
    fn from([fdc, neutrality, layer]: [u8; 3]) -> Self {
        Bin {
            fdc,
            neutrality,
            layer,
        }
    }
}

impl From<Bin> for [u8; 3] {
    fn from(b: Bin) -> Self {
        [b.fdc, b.neutrality, b.layer]
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.fdc, self.neutrality, self.layer)
    }
}

fn axis_bin(unit: f64) -> u8 {
    ((unit * BINS as f64).floor().max(0.0) as usize).min(BINS - 1) as u8
}

/// Floor-then-clamp binning of `fdc` over `[-1, 1]` and `neutrality` over
/// `[0, 1]` into 20 bins each.
pub fn to_bin(fdc: f64, neutrality: f64, equal_best: bool) -> Result<Bin, FlaError> {
    if !fdc.is_finite() || !neutrality.is_finite() {
        return Err(FlaError::UndefinedDescriptor { fdc, neutrality });
    }
    Ok(Bin {
        fdc: axis_bin((fdc + 1.0) / 2.0),
        neutrality: axis_bin(neutrality),
        layer: equal_best as u8,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorSettings {
    pub fdc_samples: usize,
    pub walk_steps: usize,
    pub neutrality_eps: f64,
    pub walk_step_fraction: f64,
}

impl Default for DescriptorSettings {
    fn default() -> Self {
        DescriptorSettings {
            fdc_samples: 5000,
            walk_steps: 5000,
            neutrality_eps: 0.005,
            walk_step_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub fdc: f64,
    pub neutrality: f64,
    pub equal_best: bool,
    pub bin: Bin,
}

/// Computes FDC and neutrality from their own RNG streams under `seed`, and
/// bins them together with `equal_best`.
pub fn describe(
    h: &dyn Objective,
    domain: &Domain,
    settings: &DescriptorSettings,
    equal_best: bool,
    seed: u64,
) -> Result<DescriptorVector, FlaError> {
    let fdc = fdc(
        h,
        domain,
        settings.fdc_samples,
        &mut seed::stream(seed, &[tag::FDC]),
    )
    .value;
    let neutrality = neutrality(
        h,
        domain,
        settings.walk_steps,
        settings.neutrality_eps,
        settings.walk_step_fraction,
        &mut seed::stream(seed, &[tag::WALK]),
    );
    let bin = to_bin(fdc, neutrality, equal_best)?;
    Ok(DescriptorVector {
        fdc,
        neutrality,
        equal_best,
        bin,
    })
}
