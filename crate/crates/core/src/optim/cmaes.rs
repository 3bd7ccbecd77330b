//! (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and the
//! usual rank-one plus rank-mu covariance update.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::Evaluator;

/// Relative eigenvalue floor applied when the covariance is re-decomposed.
const EIGEN_FLOOR: f64 = 1e-12;

/// Strategy constants, all derived from dimension and population size.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaEsParams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub chi_n: f64,
}

impl CmaEsParams {
    pub fn new(dimension: usize, lambda: usize) -> Self {
        let n = dimension as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| ((mu as f64) + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu =
            (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        CmaEsParams {
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaEsState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub path_sigma: DVector<f64>,
    pub path_c: DVector<f64>,
    /// Eigenvectors of `cov` (columns).
    pub basis: DMatrix<f64>,
    /// Square roots of the eigenvalues of `cov`.
    pub scales: DVector<f64>,
    pub generation: usize,
    pub params: CmaEsParams,
}

impl CmaEsState {
    pub fn new(mean: &[f64], sigma0: f64, lambda: usize) -> Self {
        let n = mean.len();
        CmaEsState {
            mean: DVector::from_column_slice(mean),
            sigma: sigma0,
            cov: DMatrix::identity(n, n),
            path_sigma: DVector::zeros(n),
            path_c: DVector::zeros(n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            generation: 0,
            params: CmaEsParams::new(n, lambda),
        }
    }

    fn decompose(&mut self) {
        let n = self.cov.nrows();
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let largest = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let floor = (largest * EIGEN_FLOOR).max(f64::MIN_POSITIVE);
        let values = eig
            .eigenvalues
            .map(|v| if v.is_finite() { v.max(floor) } else { floor });
        self.basis = eig.eigenvectors;
        self.scales = values.map(f64::sqrt);
        self.cov = &self.basis * DMatrix::from_diagonal(&values) * self.basis.transpose();
        debug_assert_eq!(self.cov.nrows(), n);
    }
}

/// One generation: sample lambda points from `N(m, sigma^2 C)`, clamp and
/// evaluate them, then adapt mean, paths, covariance and step size from the
/// clamped points. A generation cut short by the budget is evaluated but
/// not used for adaptation.
pub fn cmaes_step<R: Rng + ?Sized>(
    mut state: CmaEsState,
    rng: &mut R,
    evaluator: &mut Evaluator<'_>,
) -> CmaEsState {
    let n = state.mean.len();
    let p = state.params.clone();

    let mut steps: Vec<DVector<f64>> = Vec::with_capacity(p.lambda);
    let mut fitness: Vec<f64> = Vec::with_capacity(p.lambda);
    for _ in 0..p.lambda {
        if evaluator.remaining() == 0 {
            return state;
        }
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &state.basis * z.component_mul(&state.scales);
        let mut x: Vec<f64> = (&state.mean + &y * state.sigma).iter().copied().collect();
        evaluator.domain().clamp_point(&mut x);
        let step = (DVector::from_column_slice(&x) - &state.mean) / state.sigma;
        fitness.push(evaluator.evaluate(x));
        steps.push(step);
    }

    let mut order: Vec<usize> = (0..p.lambda).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));

    let mut y_w = DVector::zeros(n);
    for (w, &idx) in p.weights.iter().zip(&order) {
        y_w += &steps[idx] * *w;
    }
    state.mean += &y_w * state.sigma;

    let inv_sqrt = &state.basis
        * DMatrix::from_diagonal(&state.scales.map(|s| 1.0 / s))
        * state.basis.transpose();
    state.path_sigma = &state.path_sigma * (1.0 - p.c_sigma)
        + (&inv_sqrt * &y_w) * (p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff).sqrt();

    state.generation += 1;
    let norm_ps = state.path_sigma.norm();
    let decay = 1.0 - (1.0 - p.c_sigma).powi(2 * state.generation as i32);
    let h_sigma = norm_ps / decay.sqrt() < (1.4 + 2.0 / (n as f64 + 1.0)) * p.chi_n;
    let h = if h_sigma { 1.0 } else { 0.0 };

    state.path_c =
        &state.path_c * (1.0 - p.c_c) + &y_w * (h * (p.c_c * (2.0 - p.c_c) * p.mu_eff).sqrt());

    let mut rank_mu = DMatrix::zeros(n, n);
    for (w, &idx) in p.weights.iter().zip(&order) {
        rank_mu += &steps[idx] * steps[idx].transpose() * *w;
    }
    let rank_one =
        &state.path_c * state.path_c.transpose() + &state.cov * ((1.0 - h) * p.c_c * (2.0 - p.c_c));
    state.cov = &state.cov * (1.0 - p.c_1 - p.c_mu) + rank_one * p.c_1 + rank_mu * p.c_mu;

    state.sigma *= ((p.c_sigma / p.d_sigma) * (norm_ps / p.chi_n - 1.0)).exp();
    state.decompose();
    state
}
