//! Model fitting: maximum pseudolikelihood with Wald tests, posterior
//! sampling via the exchange algorithm, Gaussian approximation of the
//! posterior, information criteria, and a normality diagnostic.
//!
//! The pseudolikelihood treats each dyad's tie indicator as a logistic
//! observation with linear predictor βᵀδ_(ij). The posterior sampler avoids
//! the intractable normalizing constant by the exchange trick: each proposal
//! β′ is judged against one auxiliary network simulated at β′, so the
//! unknown constants cancel exactly in the acceptance ratio.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::net::Network;
use crate::prior::Gaussian;
use crate::sampler::{CoefficientVector, GraphState};
use crate::stats::{BoundModel, ModelSpec};

/// Newton iterations before declaring the pseudolikelihood MLE nonexistent.
const MPLE_MAX_ITER: usize = 100;
/// Coefficient magnitude treated as numerically divergent (separation).
const MPLE_DIVERGENCE_BOUND: f64 = 20.0;
/// Minimum posterior draws for moment summaries.
const MIN_DRAWS: usize = 1_000;
/// Minimum main iterations for the exchange sampler.
const MIN_MAIN_ITERS: usize = 1_000;
/// Target acceptance rate for the adaptive random-walk proposal.
const TARGET_ACCEPTANCE: f64 = 0.25;
/// Kolmogorov–Smirnov distance above which a marginal is flagged non-normal.
pub const KS_FLAG_THRESHOLD: f64 = 0.05;

/// Default exchange-sampler length for interactive use.
pub const DEFAULT_MAIN_ITERS: usize = 20_000;
/// Reference sampler length for full-fidelity runs.
pub const PAPER_MAIN_ITERS: usize = 100_000;
/// Default Gibbs sweeps per auxiliary network.
pub const DEFAULT_AUX_SWEEPS: usize = 50;

/// A maximum pseudolikelihood fit.
#[derive(Debug, Clone)]
pub struct MpleFit {
    pub coefficients: CoefficientVector,
    pub std_errors: Vec<f64>,
    /// Two-sided Wald p-values.
    pub p_values: Vec<f64>,
    /// Maximized log pseudolikelihood.
    pub log_pl: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Number of dyadic observations behind the fit.
    pub n_obs: usize,
    covariance: DMatrix<f64>,
}

impl MpleFit {
    /// Inverse observed information at the optimum.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Fit the model by Newton–Raphson logistic regression of tie indicators on
/// change statistics. Fails when the optimum does not exist (separation) or
/// the iteration does not converge.
pub fn fit_mple(net: &Network, model: &ModelSpec) -> Result<MpleFit> {
    let bound = BoundModel::bind(model, net)?;
    let design = bound.change_stat_matrix(net.adjacency());
    let x = &design.matrix;
    let y: Vec<f64> = design
        .dyads
        .iter()
        .map(|&(i, j)| net.has_edge(i, j) as usize as f64)
        .collect();
    let (d, k) = (x.nrows(), x.ncols());

    let log_lik = |eta: &DVector<f64>| -> f64 {
        eta.iter()
            .zip(&y)
            // log σ(η)^y σ(−η)^{1−y}, stable for large |η|.
            .map(|(&e, &yi)| yi * e - softplus(e))
            .sum()
    };

    let mut beta = DVector::zeros(k);
    let mut eta = x * &beta;
    let mut ll = log_lik(&eta);
    let mut converged = false;
    let mut iterations = 0;
    let mut info = DMatrix::zeros(k, k);

    for iter in 1..=MPLE_MAX_ITER {
        iterations = iter;
        let p: DVector<f64> = eta.map(sigmoid);
        let resid = DVector::from_iterator(d, y.iter().zip(p.iter()).map(|(&yi, &pi)| yi - pi));
        let grad = x.transpose() * &resid;

        // Observed information XᵀWX with W = diag(p(1−p)).
        info.fill(0.0);
        for r in 0..d {
            let w = p[r] * (1.0 - p[r]);
            for a in 0..k {
                let xa = x[(r, a)] * w;
                for b in 0..k {
                    info[(a, b)] += xa * x[(r, b)];
                }
            }
        }
        let chol = Cholesky::new(info.clone()).ok_or(Error::MpleDoesNotExist(iter))?;
        let step = chol.solve(&grad);

        // Step halving: never accept a decrease of the objective.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &beta + scale * &step;
            let cand_eta = x * &candidate;
            let cand_ll = log_lik(&cand_eta);
            if cand_ll >= ll - 1e-12 {
                beta = candidate;
                eta = cand_eta;
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::MpleDoesNotExist(iter));
        }
        if beta.iter().any(|b| b.abs() > MPLE_DIVERGENCE_BOUND) {
            return Err(Error::MpleDoesNotExist(iter));
        }
        if grad.amax() < 1e-10 || (scale * step.amax()) < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MpleDoesNotExist(iterations));
    }

    let covariance = Cholesky::new(info)
        .ok_or(Error::MpleDoesNotExist(iterations))?
        .inverse();
    let std_errors: Vec<f64> = (0..k).map(|t| covariance[(t, t)].sqrt()).collect();
    let norm = Normal::new(0.0, 1.0).expect("standard normal");
    let p_values: Vec<f64> = (0..k)
        .map(|t| 2.0 * (1.0 - norm.cdf((beta[t] / std_errors[t]).abs())))
        .collect();

    Ok(MpleFit {
        coefficients: CoefficientVector::new(
            bound.names().to_vec(),
            beta.iter().copied().collect(),
        )?,
        std_errors,
        p_values,
        log_pl: ll,
        converged,
        iterations,
        n_obs: d,
        covariance,
    })
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log(1 + e^x) without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Pooled posterior draws from the exchange sampler.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    names: Vec<String>,
    draws: DMatrix<f64>,
    chain_ids: Vec<u32>,
    pub acceptance_rate: f64,
    pub seed: u64,
}

impl PosteriorDraws {
    /// Wrap an M×K matrix of draws (used by tests and diagnostics).
    pub fn from_matrix(names: Vec<String>, draws: DMatrix<f64>, seed: u64) -> Self {
        let m = draws.nrows();
        PosteriorDraws {
            names,
            draws,
            chain_ids: vec![0; m],
            acceptance_rate: f64::NAN,
            seed,
        }
    }

    pub fn m(&self) -> usize {
        self.draws.nrows()
    }

    pub fn k(&self) -> usize {
        self.draws.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.draws
    }

    pub fn chain_ids(&self) -> &[u32] {
        &self.chain_ids
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        self.draws.column(t).iter().copied().collect()
    }

    /// CSV export: header of coefficient names, one row per draw.
    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for r in 0..self.m() {
            let row: Vec<String> = (0..self.k()).map(|c| self.draws[(r, c)].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Settings for [`sample_posterior`].
#[derive(Debug, Clone, Copy)]
pub struct ExchangeSettings {
    /// Exchange iterations per chain (the first 20% are burn-in).
    pub main_iters: usize,
    /// Gibbs sweeps per auxiliary network, starting from the observed ties.
    pub aux_sweeps: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for ExchangeSettings {
    fn default() -> Self {
        ExchangeSettings {
            main_iters: DEFAULT_MAIN_ITERS,
            aux_sweeps: DEFAULT_AUX_SWEEPS,
            chains: 2,
            seed: 0,
        }
    }
}

/// Streaming mean/covariance accumulator.
struct Welford {
    count: usize,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
}

impl Welford {
    fn new(k: usize) -> Self {
        Welford {
            count: 0,
            mean: DVector::zeros(k),
            m2: DMatrix::zeros(k, k),
        }
    }

    fn push(&mut self, x: &DVector<f64>) {
        self.count += 1;
        let delta = x - &self.mean;
        self.mean += &delta / self.count as f64;
        let delta2 = x - &self.mean;
        self.m2 += &delta * delta2.transpose();
    }

    fn covariance(&self) -> Option<DMatrix<f64>> {
        if self.count < 2 {
            return None;
        }
        Some(&self.m2 / (self.count - 1) as f64)
    }
}

/// Sample the unconstrained posterior by the exchange algorithm with an
/// adaptive random-walk proposal.
///
/// Each iteration proposes β′ ~ N(β, c²Σ), simulates one auxiliary network
/// at β′ by `aux_sweeps` Gibbs sweeps from the observed ties, and accepts
/// with probability min{1, exp[(β−β′)ᵀ(s(Y′)−s(Y))] · p(β′)/p(β)}. The
/// proposal scale c chases a 0.25 acceptance rate and Σ tracks the running
/// draw covariance during burn-in (the first 20% of iterations); both freeze
/// afterwards so the post-burn-in chain is a valid Markov chain. Chains run
/// sequentially on derived RNG streams and their post-burn-in draws are
/// pooled in chain order.
pub fn sample_posterior(
    net: &Network,
    model: &ModelSpec,
    prior: &Gaussian,
    settings: ExchangeSettings,
) -> Result<PosteriorDraws> {
    let bound = BoundModel::bind(model, net)?;
    let k = bound.k();
    if prior.names() != bound.names() {
        return Err(Error::SamplerPrecondition(format!(
            "prior is over {:?}, model statistics are {:?}",
            prior.names(),
            bound.names()
        )));
    }
    if settings.main_iters < MIN_MAIN_ITERS {
        return Err(Error::SamplerPrecondition(format!(
            "main_iters must be at least {MIN_MAIN_ITERS}, got {}",
            settings.main_iters
        )));
    }
    if settings.chains == 0 {
        return Err(Error::SamplerPrecondition("chains must be at least 1".into()));
    }

    let s_obs = bound.sufficient_stats(net.adjacency());
    let burn = settings.main_iters / 5;
    let kept_per_chain = settings.main_iters - burn;

    // Starting point and initial proposal shape from the MPLE when it
    // exists; otherwise from zero and a small spherical proposal.
    let (start, sigma0) = match fit_mple(net, model) {
        Ok(fit) => (
            DVector::from_iterator(k, fit.coefficients.values().iter().copied()),
            fit.covariance().clone(),
        ),
        Err(_) => (DVector::zeros(k), DMatrix::identity(k, k) * 0.01),
    };

    let mut draws = DMatrix::zeros(kept_per_chain * settings.chains, k);
    let mut chain_ids = Vec::with_capacity(kept_per_chain * settings.chains);
    let mut accepted_post = 0usize;

    for chain in 0..settings.chains {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(chain as u64);

        let mut beta = start.clone();
        let mut log_prior = prior.log_pdf(&beta);
        let mut log_c = (2.38 / (k as f64).sqrt()).ln();
        let mut welford = Welford::new(k);
        let mut chol = Cholesky::new(sigma0.clone())
            .unwrap_or_else(|| Cholesky::new(DMatrix::identity(k, k) * 0.01).expect("pd"));
        let mut frozen_step = None::<(f64, Cholesky<f64, nalgebra::Dyn>)>;

        for t in 0..settings.main_iters {
            let (c, l) = match &frozen_step {
                Some((c, l)) => (*c, l),
                None => (log_c.exp(), &chol),
            };
            let z = DVector::from_iterator(k, (0..k).map(|_| -> f64 {
                StandardNormal.sample(&mut rng)
            }));
            let proposal = &beta + c * (l.l() * z);

            // One auxiliary network at the proposal.
            let mut aux = GraphState::new(&bound, net.adjacency().clone());
            aux.run_sweeps(&proposal, settings.aux_sweeps, &mut rng)?;
            let s_aux = aux.stats();

            let log_prior_prop = prior.log_pdf(&proposal);
            let log_alpha = (&beta - &proposal).dot(&(s_aux - &s_obs)) + log_prior_prop - log_prior;
            let alpha = log_alpha.min(0.0).exp();
            let accept = rng.random::<f64>() < alpha;
            if accept {
                beta = proposal;
                log_prior = log_prior_prop;
            }

            if t < burn {
                // Robbins–Monro scale chase and covariance tracking.
                log_c += (t as f64 + 1.0).powf(-0.6) * (alpha - TARGET_ACCEPTANCE);
                welford.push(&beta);
                if welford.count > 2 * k + 10 {
                    if let Some(cov) = welford.covariance() {
                        let ridged = cov + DMatrix::identity(k, k) * 1e-9;
                        if let Some(ch) = Cholesky::new(ridged) {
                            chol = ch;
                        }
                    }
                }
                if t + 1 == burn {
                    frozen_step = Some((log_c.exp(), chol.clone()));
                }
            } else {
                let row = chain * kept_per_chain + (t - burn);
                for col in 0..k {
                    draws[(row, col)] = beta[col];
                }
                chain_ids.push(chain as u32);
                if accept {
                    accepted_post += 1;
                }
            }
        }
    }

    let acceptance_rate = accepted_post as f64 / (kept_per_chain * settings.chains) as f64;
    if acceptance_rate < 0.01 {
        return Err(Error::TuningFailure { rate: acceptance_rate });
    }

    Ok(PosteriorDraws {
        names: bound.names().to_vec(),
        draws,
        chain_ids,
        acceptance_rate,
        seed: settings.seed,
    })
}

/// Moment-match a Gaussian to posterior draws: sample mean and sample
/// covariance (denominator M−1).
pub fn gaussian_approx(draws: &PosteriorDraws) -> Result<Gaussian> {
    if draws.m() < MIN_DRAWS {
        return Err(Error::SamplerPrecondition(format!(
            "need at least {MIN_DRAWS} draws for a posterior summary, got {}",
            draws.m()
        )));
    }
    let m = draws.m();
    let k = draws.k();
    let x = draws.matrix();
    let mean = DVector::from_iterator(k, (0..k).map(|c| x.column(c).sum() / m as f64));
    let mut cov = DMatrix::zeros(k, k);
    for r in 0..m {
        for a in 0..k {
            let da = x[(r, a)] - mean[a];
            for b in a..k {
                cov[(a, b)] += da * (x[(r, b)] - mean[b]);
            }
        }
    }
    for a in 0..k {
        for b in a..k {
            let v = cov[(a, b)] / (m as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Gaussian::new(draws.names().to_vec(), mean, cov).map_err(|_| Error::RankDeficientDraws)
}

/// Information-criterion comparison of two nested pseudolikelihood fits.
#[derive(Debug, Clone)]
pub struct InformationCriteria {
    pub bic_full: f64,
    pub bic_null: f64,
    pub aic_full: f64,
    pub aic_null: f64,
    /// exp(−(BIC_null − BIC_full)/2): > 1 favours the null.
    pub bic_evidence_null: f64,
    /// exp(−(AIC_null − AIC_full)/2).
    pub aic_evidence_null: f64,
}

/// BIC/AIC evidence for the null (smaller) model against the full one.
/// The sample size in the BIC penalty is the dyad count. Both criteria sit
/// on the pseudolikelihood, which is the exact likelihood only when every
/// term is dyad-independent.
pub fn information_criteria(full: &MpleFit, null: &MpleFit) -> Result<InformationCriteria> {
    if !full.converged || !null.converged {
        return Err(Error::Invalid("information criteria need converged fits".into()));
    }
    if full.n_obs != null.n_obs {
        return Err(Error::NotNested(format!(
            "fits have different dyad counts ({} vs {})",
            full.n_obs, null.n_obs
        )));
    }
    let full_names = full.coefficients.names();
    let missing: Vec<&String> = null
        .coefficients
        .names()
        .iter()
        .filter(|n| !full_names.contains(n))
        .collect();
    if !missing.is_empty() {
        return Err(Error::NotNested(format!(
            "null statistics {missing:?} not in the full model"
        )));
    }
    let d = full.n_obs as f64;
    let ic = |fit: &MpleFit, penalty: f64| -> f64 {
        -2.0 * fit.log_pl + penalty * fit.coefficients.values().len() as f64
    };
    let bic_full = ic(full, d.ln());
    let bic_null = ic(null, d.ln());
    let aic_full = ic(full, 2.0);
    let aic_null = ic(null, 2.0);
    Ok(InformationCriteria {
        bic_full,
        bic_null,
        aic_full,
        aic_null,
        bic_evidence_null: (-(bic_null - bic_full) / 2.0).exp(),
        aic_evidence_null: (-(aic_null - aic_full) / 2.0).exp(),
    })
}

/// One coefficient's Kolmogorov–Smirnov normality check.
#[derive(Debug, Clone)]
pub struct KsCheck {
    pub name: String,
    pub statistic: f64,
    /// True when the marginal deviates from the fitted normal by more than
    /// [`KS_FLAG_THRESHOLD`].
    pub flagged: bool,
}

/// Marginal KS distance of each coefficient's draws from the fitted normal.
pub fn normality_check(draws: &PosteriorDraws, approx: &Gaussian) -> Vec<KsCheck> {
    let norm = Normal::new(0.0, 1.0).expect("standard normal");
    (0..draws.k())
        .map(|t| {
            let mut xs = draws.column(t);
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
            let mu = approx.mean()[t];
            let sd = approx.sd(t);
            let n = xs.len() as f64;
            let mut stat: f64 = 0.0;
            for (i, x) in xs.iter().enumerate() {
                let f = norm.cdf((x - mu) / sd);
                stat = stat.max((((i + 1) as f64) / n - f).abs());
                stat = stat.max((f - (i as f64) / n).abs());
            }
            KsCheck {
                name: draws.names()[t].clone(),
                statistic: stat,
                flagged: stat > KS_FLAG_THRESHOLD,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::DyadCovariate;
    use crate::prior::unit_information_prior;
    use crate::sampler::exact_enumeration;
    use crate::stats::StatisticSpec;
    use approx::assert_abs_diff_eq;

    fn florentine_edges_absdiff() -> (Network, ModelSpec) {
        let net = crate::data::florentine();
        let model = ModelSpec::new(vec![
            StatisticSpec::Edges,
            StatisticSpec::Absdiff { attr: "wealth".into() },
        ]);
        (net, model)
    }

    #[test]
    fn edges_only_mple_is_logit_density() {
        let net = crate::data::florentine();
        let model = ModelSpec::new(vec![StatisticSpec::Edges]);
        let fit = fit_mple(&net, &model).unwrap();
        let rho: f64 = 20.0 / 120.0;
        let want = (rho / (1.0 - rho)).ln();
        assert_abs_diff_eq!(fit.coefficients.values()[0], want, epsilon = 1e-8);
        assert!(fit.converged);
    }

    /// Independent iteratively reweighted least squares: the oracle follows
    /// the working-response formulation rather than the gradient form.
    fn irls_oracle(x: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
        let k = x.ncols();
        let d = x.nrows();
        let mut beta = DVector::<f64>::zeros(k);
        for _ in 0..60 {
            let eta = x * &beta;
            let p: Vec<f64> = eta.iter().map(|&e| 1.0 / (1.0 + (-e).exp())).collect();
            let w: Vec<f64> = p.iter().map(|&pi| (pi * (1.0 - pi)).max(1e-12)).collect();
            // Working response z = η + (y − p)/w; solve (XᵀWX) b = XᵀWz.
            let z: Vec<f64> = (0..d).map(|r| eta[r] + (y[r] - p[r]) / w[r]).collect();
            let mut xtwx = DMatrix::zeros(k, k);
            let mut xtwz = DVector::zeros(k);
            for r in 0..d {
                for a in 0..k {
                    xtwz[a] += x[(r, a)] * w[r] * z[r];
                    for b in 0..k {
                        xtwx[(a, b)] += x[(r, a)] * w[r] * x[(r, b)];
                    }
                }
            }
            let next = Cholesky::new(xtwx).unwrap().solve(&xtwz);
            let done = (&next - &beta).amax() < 1e-12;
            beta = next;
            if done {
                break;
            }
        }
        beta
    }

    #[test]
    fn mple_matches_independent_irls() {
        // Three dyad-independent instances; for these the pseudolikelihood is
        // the exact likelihood, so this doubles as the exact-MLE check.
        for seed in [1u64, 2, 3] {
            let n = 9;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cov = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    0.0
                } else {
                    ((i * 7 + j * 3 + seed as usize) % 11) as f64 / 5.0 - 1.0
                }
            });
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < 0.4 {
                        edges.push((i, j));
                    }
                }
            }
            let net = Network::from_edges(n, false, &edges)
                .unwrap()
                .with_covariate(DyadCovariate::new("c", cov).unwrap())
                .unwrap();
            let model = ModelSpec::new(vec![
                StatisticSpec::Edges,
                StatisticSpec::Edgecov { name: "c".into(), standardized: false },
            ]);
            let fit = fit_mple(&net, &model).unwrap();

            let bound = BoundModel::bind(&model, &net).unwrap();
            let design = bound.change_stat_matrix(net.adjacency());
            let y: Vec<f64> = design
                .dyads
                .iter()
                .map(|&(i, j)| net.has_edge(i, j) as usize as f64)
                .collect();
            let oracle = irls_oracle(&design.matrix, &y);
            for t in 0..2 {
                assert_abs_diff_eq!(fit.coefficients.values()[t], oracle[t], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn empty_graph_is_separated() {
        let net = Network::empty(6, false).unwrap();
        let model = ModelSpec::new(vec![StatisticSpec::Edges]);
        assert!(matches!(
            fit_mple(&net, &model),
            Err(Error::MpleDoesNotExist(_))
        ));
    }

    #[test]
    fn wald_p_values_in_unit_interval() {
        let (net, model) = florentine_edges_absdiff();
        let fit = fit_mple(&net, &model).unwrap();
        for p in &fit.p_values {
            assert!((0.0..=1.0).contains(p));
        }
        assert!(fit.std_errors.iter().all(|se| se.is_finite() && *se > 0.0));
    }

    #[test]
    fn exchange_sampler_rejects_short_runs() {
        let (net, model) = florentine_edges_absdiff();
        let prior = unit_information_prior(&net, &model).unwrap();
        let settings = ExchangeSettings { main_iters: 500, ..Default::default() };
        assert!(matches!(
            sample_posterior(&net, &model, &prior, settings),
            Err(Error::SamplerPrecondition(_))
        ));
    }

    /// Penalized Newton optimizer for the exact dyad-independent posterior
    /// mode, with the Laplace covariance — an independent objective from
    /// the sampler's.
    fn exact_map(
        x: &DMatrix<f64>,
        y: &[f64],
        prior_mean: &DVector<f64>,
        prior_prec: &DMatrix<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let k = x.ncols();
        let mut beta = DVector::<f64>::zeros(k);
        let mut hess = prior_prec.clone();
        for _ in 0..100 {
            let eta = x * &beta;
            let p: Vec<f64> = eta.iter().map(|&e| 1.0 / (1.0 + (-e).exp())).collect();
            let mut grad = prior_prec * (prior_mean - &beta);
            hess.copy_from(prior_prec);
            for r in 0..x.nrows() {
                for a in 0..k {
                    grad[a] += x[(r, a)] * (y[r] - p[r]);
                    for b in 0..k {
                        hess[(a, b)] += x[(r, a)] * x[(r, b)] * p[r] * (1.0 - p[r]);
                    }
                }
            }
            let step = Cholesky::new(hess.clone()).unwrap().solve(&grad);
            beta += &step;
            if step.amax() < 1e-12 {
                break;
            }
        }
        (beta, Cholesky::new(hess).unwrap().inverse())
    }

    #[test]
    fn exchange_posterior_matches_quadrature_for_dyad_independent_model() {
        // For a dyad-independent model the likelihood is a product of
        // independent logistic terms, so the exact posterior mean is
        // available by two-dimensional quadrature.
        let (net, model) = florentine_edges_absdiff();
        let prior = unit_information_prior(&net, &model).unwrap();
        let settings = ExchangeSettings {
            main_iters: 20_000,
            aux_sweeps: 30,
            chains: 1,
            seed: 42,
        };
        let draws = sample_posterior(&net, &model, &prior, settings).unwrap();
        let approx = gaussian_approx(&draws).unwrap();

        let bound = BoundModel::bind(&model, &net).unwrap();
        let design = bound.change_stat_matrix(net.adjacency());
        let y: Vec<f64> = design
            .dyads
            .iter()
            .map(|&(i, j)| net.has_edge(i, j) as usize as f64)
            .collect();
        let prior_prec = Cholesky::new(prior.covariance().clone()).unwrap().inverse();
        let (map, laplace) = exact_map(&design.matrix, &y, prior.mean(), &prior_prec);

        // Midpoint quadrature on a ±6-sd box around the mode.
        let log_post = |b: &DVector<f64>| -> f64 {
            let eta = &design.matrix * b;
            let ll: f64 = eta
                .iter()
                .zip(&y)
                .map(|(&e, &yi)| yi * e - softplus(e))
                .sum();
            ll + prior.log_pdf(b)
        };
        let sds = [laplace[(0, 0)].sqrt(), laplace[(1, 1)].sqrt()];
        let steps = 121;
        let mut total = 0.0;
        let mut mean = [0.0f64; 2];
        let center = log_post(&map);
        for a in 0..steps {
            let b0 = map[0] + (a as f64 / (steps - 1) as f64 - 0.5) * 12.0 * sds[0];
            for bi in 0..steps {
                let b1 = map[1] + (bi as f64 / (steps - 1) as f64 - 0.5) * 12.0 * sds[1];
                let w = (log_post(&DVector::from_vec(vec![b0, b1])) - center).exp();
                total += w;
                mean[0] += w * b0;
                mean[1] += w * b1;
            }
        }
        mean[0] /= total;
        mean[1] /= total;

        // Batch-means Monte Carlo standard error per coefficient.
        let m = draws.m();
        let batches = 20;
        let per = m / batches;
        for t in 0..draws.k() {
            let col = draws.column(t);
            let means: Vec<f64> = (0..batches)
                .map(|b| col[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
                .collect();
            let grand = means.iter().sum::<f64>() / batches as f64;
            let mcse = (means.iter().map(|v| (v - grand).powi(2)).sum::<f64>()
                / (batches as f64 - 1.0)
                / batches as f64)
                .sqrt();
            let tol = (2.0 * mcse).max(0.01);
            assert_abs_diff_eq!(approx.mean()[t], mean[t], epsilon = tol);
            // The mode itself should also be close, though skew keeps it
            // from coinciding with the mean exactly.
            assert_abs_diff_eq!(mean[t], map[t], epsilon = 0.1);
        }
    }

    #[test]
    fn exchange_posterior_matches_enumerated_posterior_mean() {
        // 4-node graph where the exact posterior is computable on a grid.
        let net = Network::from_edges(4, false, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let model = ModelSpec::new(vec![StatisticSpec::Edges, StatisticSpec::Triangle]);
        let prior = unit_information_prior(&net, &model).unwrap();
        let settings = ExchangeSettings {
            main_iters: 12_000,
            aux_sweeps: 30,
            chains: 1,
            seed: 7,
        };
        let draws = sample_posterior(&net, &model, &prior, settings).unwrap();
        let approx = gaussian_approx(&draws).unwrap();

        // Grid posterior: p(β|Y) ∝ exp{βᵀs_obs − log Z(β)} π(β).
        let bound = BoundModel::bind(&model, &net).unwrap();
        let s_obs = bound.sufficient_stats(net.adjacency());
        let grid: Vec<f64> = (0..61).map(|i| -4.5 + i as f64 * 0.15).collect();
        let mut total = 0.0;
        let mut mean = [0.0f64; 2];
        for &b0 in &grid {
            for &b1 in &grid {
                let beta =
                    CoefficientVector::new(bound.names().to_vec(), vec![b0, b1]).unwrap();
                let dist = exact_enumeration(&beta, &model, &net).unwrap();
                let point = DVector::from_vec(vec![b0, b1]);
                let log_post = b0 * s_obs[0] + b1 * s_obs[1] - dist.log_normalizer()
                    + prior.log_pdf(&point);
                let w = log_post.exp();
                total += w;
                mean[0] += w * b0;
                mean[1] += w * b1;
            }
        }
        mean[0] /= total;
        mean[1] /= total;

        assert_abs_diff_eq!(approx.mean()[0], mean[0], epsilon = 0.05);
        assert_abs_diff_eq!(approx.mean()[1], mean[1], epsilon = 0.05);
    }

    #[test]
    fn flat_likelihood_coefficient_recovers_its_prior() {
        // A covariate that is identically zero contributes nothing to the
        // likelihood, so its coefficient's posterior must equal its prior.
        let n = 8;
        let net = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < 0.3 {
                        edges.push((i, j));
                    }
                }
            }
            Network::from_edges(n, false, &edges)
                .unwrap()
                .with_covariate(
                    DyadCovariate::new("zero", DMatrix::zeros(n, n)).unwrap(),
                )
                .unwrap()
        };
        let model = ModelSpec::new(vec![
            StatisticSpec::Edges,
            StatisticSpec::Edgecov { name: "zero".into(), standardized: false },
        ]);
        // The unit-information prior is undefined here (zero column), so a
        // custom prior exercises the sampler directly.
        let prior = Gaussian::new(
            vec!["edges".into(), "zero".into()],
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[100.0, 0.0, 0.0, 1.0]),
        )
        .unwrap();
        let settings = ExchangeSettings {
            main_iters: 16_000,
            aux_sweeps: 20,
            chains: 1,
            seed: 5,
        };
        let draws = sample_posterior(&net, &model, &prior, settings).unwrap();
        let approx = gaussian_approx(&draws).unwrap();
        assert_abs_diff_eq!(approx.mean()[1], 0.0, epsilon = 0.06);
        assert!(
            (approx.covariance()[(1, 1)] - 1.0).abs() < 0.10,
            "flat-likelihood variance {} should be within 10% of the prior's 1.0",
            approx.covariance()[(1, 1)]
        );
    }

    #[test]
    fn exchange_sampler_is_seed_deterministic() {
        let (net, model) = florentine_edges_absdiff();
        let prior = unit_information_prior(&net, &model).unwrap();
        let settings = ExchangeSettings {
            main_iters: 2_000,
            aux_sweeps: 10,
            chains: 2,
            seed: 11,
        };
        let a = sample_posterior(&net, &model, &prior, settings).unwrap();
        let b = sample_posterior(&net, &model, &prior, settings).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.chain_ids(), b.chain_ids());
    }

    #[test]
    fn gaussian_approx_recovers_known_moments() {
        let target = Gaussian::new(
            vec!["a".into(), "b".into()],
            DVector::from_vec(vec![0.7, -1.2]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.8]),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 40_000;
        let mut mat = DMatrix::zeros(m, 2);
        for r in 0..m {
            let d = target.sample(&mut rng);
            mat[(r, 0)] = d[0];
            mat[(r, 1)] = d[1];
        }
        let draws = PosteriorDraws::from_matrix(vec!["a".into(), "b".into()], mat, 0);
        let approx = gaussian_approx(&draws).unwrap();
        for t in 0..2 {
            let tol = 4.0 * target.sd(t) / (m as f64).sqrt();
            assert_abs_diff_eq!(approx.mean()[t], target.mean()[t], epsilon = tol);
        }
    }

    #[test]
    fn constant_draws_are_rank_deficient() {
        let mat = DMatrix::from_element(2_000, 2, 1.5);
        let draws = PosteriorDraws::from_matrix(vec!["a".into(), "b".into()], mat, 0);
        assert!(matches!(
            gaussian_approx(&draws),
            Err(Error::RankDeficientDraws)
        ));
    }

    #[test]
    fn too_few_draws_rejected() {
        let mat = DMatrix::zeros(10, 1);
        let draws = PosteriorDraws::from_matrix(vec!["a".into()], mat, 0);
        assert!(matches!(
            gaussian_approx(&draws),
            Err(Error::SamplerPrecondition(_))
        ));
    }

    #[test]
    fn information_criteria_formulas() {
        let (net, model) = florentine_edges_absdiff();
        let full = fit_mple(&net, &model).unwrap();
        let same = information_criteria(&full, &full).unwrap();
        assert_abs_diff_eq!(same.bic_evidence_null, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.aic_evidence_null, 1.0, epsilon = 1e-12);

        // One parameter difference at identical fit quality: the BIC penalty
        // gap is log(120), so evidence for the null is √120.
        let null_model = ModelSpec::new(vec![StatisticSpec::Edges]);
        let null = fit_mple(&net, &null_model).unwrap();
        let mut null_same_ll = null.clone();
        null_same_ll.log_pl = full.log_pl;
        let ic = information_criteria(&full, &null_same_ll).unwrap();
        assert_abs_diff_eq!(ic.bic_evidence_null, 120.0f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(ic.aic_evidence_null, std::f64::consts::E, epsilon = 1e-10);
    }

    #[test]
    fn bic_more_conservative_than_aic_for_noise_covariate() {
        // Noise covariate: true effect 0. Evidence for the null should be
        // stronger under BIC than AIC.
        let n = 12;
        let noise = DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            if i == j {
                0.0
            } else {
                (((a * 13 + b * 29) % 17) as f64 - 8.0) / 8.0
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.3 {
                    edges.push((i, j));
                }
            }
        }
        let net = Network::from_edges(n, false, &edges)
            .unwrap()
            .with_covariate(DyadCovariate::new("noise", noise).unwrap())
            .unwrap();
        let full_model = ModelSpec::new(vec![
            StatisticSpec::Edges,
            StatisticSpec::Edgecov { name: "noise".into(), standardized: false },
        ]);
        let null_model = ModelSpec::new(vec![StatisticSpec::Edges]);
        let full = fit_mple(&net, &full_model).unwrap();
        let null = fit_mple(&net, &null_model).unwrap();
        let ic = information_criteria(&full, &null).unwrap();
        assert!(
            ic.bic_evidence_null > ic.aic_evidence_null,
            "BIC {} should exceed AIC {} for the null",
            ic.bic_evidence_null,
            ic.aic_evidence_null
        );
    }

    #[test]
    fn non_nested_models_rejected() {
        let net = crate::data::florentine();
        let full = fit_mple(
            &net,
            &ModelSpec::new(vec![StatisticSpec::Edges, StatisticSpec::Triangle]),
        )
        .unwrap();
        let other = fit_mple(
            &net,
            &ModelSpec::new(vec![
                StatisticSpec::Edges,
                StatisticSpec::Absdiff { attr: "wealth".into() },
            ]),
        )
        .unwrap();
        assert!(matches!(
            information_criteria(&full, &other),
            Err(Error::NotNested(_))
        ));
    }

    #[test]
    fn normality_check_flags_constructed_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = 5_000;
        let mut mat = DMatrix::zeros(m, 2);
        for r in 0..m {
            let z: f64 = StandardNormal.sample(&mut rng);
            mat[(r, 0)] = 2.0 + 0.5 * z;
            let z2: f64 = StandardNormal.sample(&mut rng);
            mat[(r, 1)] = z2.exp(); // strongly skewed
        }
        let draws = PosteriorDraws::from_matrix(vec!["normal".into(), "skewed".into()], mat, 0);
        let approx = gaussian_approx(&draws).unwrap();
        let checks = normality_check(&draws, &approx);
        assert!(!checks[0].flagged, "normal draws flagged: {}", checks[0].statistic);
        assert!(checks[1].flagged, "lognormal draws not flagged");
    }

    #[test]
    fn draws_csv_has_header_and_rows() {
        let mat = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.5]);
        let draws = PosteriorDraws::from_matrix(vec!["edges".into(), "gwesp".into()], mat, 0);
        let csv = draws.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "edges,gwesp");
        assert_eq!(lines[1], "1,2");
        assert_eq!(lines[2], "3,4.5");
    }
}
