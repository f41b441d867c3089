//! Batch simulation experiments: how the tests behave across network sizes
//! and effect strengths.
//!
//! Two studies are provided. The size study generates networks around a
//! marriage-network template whose focal covariate effect is tuned so the
//! classical two-sided p-value sits at the 0.05 threshold, then tracks how
//! the Bayes factor for the zero-effect hypothesis, its posterior
//! probability, and BIC/AIC evidence move as the network grows: the p-value
//! stays put by construction while the evidence measures accumulate. The
//! order study generates directed networks with three covariate effects
//! pinned to (β, 2β, 3β) and scores the ordered hypothesis against equality
//! and the complement across a β grid.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bf::{derive_seed, evaluate_hypotheses};
use crate::error::{Error, Result};
use crate::hypothesis::parse_hypotheses;
use crate::inference::{
    fit_mple, gaussian_approx, information_criteria, sample_posterior, ExchangeSettings,
};
use crate::net::{AttributeColumn, AttributeTable, DyadCovariate, Network};
use crate::prior::unit_information_prior;
use crate::sampler::{sample_networks, CoefficientVector};
use crate::stats::{ModelSpec, StatisticSpec};

/// Two-sided p-value window a generated network must hit to be kept in the
/// size study.
const P_WINDOW: (f64, f64) = (0.045, 0.055);
/// Gibbs burn-in sweeps when generating one network.
const GEN_SWEEPS: usize = 50;
/// Networks per batch when tuning the focal coefficient.
const TUNE_BATCH: usize = 15;
/// Bisection rounds for the focal-coefficient search.
const TUNE_ROUNDS: usize = 25;
/// Attempt budget per kept network before the search is declared failed.
const ATTEMPTS_PER_KEPT: usize = 400;

/// Middle value of a sample; NaN when empty.
fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite medians"));
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Settings for the network-size study.
#[derive(Debug, Clone)]
pub struct SizeStudyConfig {
    pub sizes: Vec<usize>,
    /// Networks kept (p-value in window) per size.
    pub reps: usize,
    /// Posterior sampler settings per kept network (seed is overridden
    /// per network).
    pub exchange: ExchangeSettings,
    pub seed: u64,
}

impl Default for SizeStudyConfig {
    fn default() -> Self {
        SizeStudyConfig {
            sizes: vec![7, 10, 15, 20, 25, 30],
            reps: 50,
            exchange: ExchangeSettings::default(),
            seed: 0,
        }
    }
}

/// One network size's medians in the size study.
#[derive(Debug, Clone)]
pub struct SizeStudyRow {
    pub n: usize,
    pub reps: usize,
    /// Tuned focal (wealth-difference) coefficient used for generation.
    pub focal: f64,
    pub median_p: f64,
    /// Median Bayes factor of the zero-effect hypothesis against its
    /// complement.
    pub median_bf: f64,
    /// Median posterior probability of the zero-effect hypothesis under
    /// equal prior probabilities.
    pub median_post_prob: f64,
    pub median_bic_evidence: f64,
    pub median_aic_evidence: f64,
}

fn size_study_model() -> ModelSpec {
    ModelSpec::new(vec![
        StatisticSpec::Edges,
        StatisticSpec::Kstar { k: 2 },
        StatisticSpec::Absdiff { attr: "wealth".into() },
    ])
}

/// Empty undirected template with wealth resampled from the marriage data.
fn wealth_template(n: usize, pool: &[f64], rng: &mut impl Rng) -> Result<Network> {
    let wealth: Vec<f64> = (0..n)
        .map(|_| pool[rng.random_range(0..pool.len())])
        .collect();
    let mut attrs = AttributeTable::new(n);
    attrs.insert_numeric("wealth", wealth)?;
    Network::empty(n, false)?.with_attributes(attrs)
}

/// Generate one network; `Ok(None)` when the Gibbs chain was stuck at a
/// degenerate graph.
fn generate(
    beta: &CoefficientVector,
    model: &ModelSpec,
    template: &Network,
    seed: u64,
) -> Result<Option<Network>> {
    let mut sample = sample_networks(beta, model, template, 1, GEN_SWEEPS, 1, seed)?;
    if sample.degenerate[0] {
        return Ok(None);
    }
    Ok(sample.networks.pop())
}

/// Focal-coefficient p-value at one candidate: the median two-sided Wald p
/// over a fresh batch of generated networks (skipping ones without a
/// pseudolikelihood fit).
fn median_focal_p(
    candidate: f64,
    base: &[f64],
    model: &ModelSpec,
    n: usize,
    pool: &[f64],
    focal_idx: usize,
    seed: u64,
) -> Result<Option<f64>> {
    let mut ps = Vec::new();
    for b in 0..TUNE_BATCH {
        let att_seed = derive_seed(seed, b as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(att_seed);
        let template = wealth_template(n, pool, &mut rng)?;
        let bound_names = vec!["edges".into(), "kstar2".into(), "absdiff.wealth".into()];
        let beta = CoefficientVector::new(
            bound_names,
            vec![base[0], base[1], candidate],
        )?;
        let Some(net) = generate(&beta, model, &template, att_seed)? else {
            continue;
        };
        if let Ok(fit) = fit_mple(&net, model) {
            ps.push(fit.p_values[focal_idx]);
        }
    }
    if ps.len() < TUNE_BATCH / 3 {
        return Ok(None);
    }
    Ok(Some(median(&mut ps)))
}

/// Bisection search for the focal coefficient whose generated networks have
/// a median two-sided p-value near 0.05. The p-value shrinks as the effect
/// strengthens, so the bracket is [0, hi] with hi doubled until the median
/// drops below the window.
fn tune_focal(
    base: &[f64],
    model: &ModelSpec,
    n: usize,
    pool: &[f64],
    focal_idx: usize,
    seed: u64,
) -> Result<f64> {
    let eval = |theta: f64, round: u64| {
        median_focal_p(theta, base, model, n, pool, focal_idx, derive_seed(seed, 777 + round))
    };
    let mut lo = 0.0;
    let mut hi = 0.005;
    let mut round = 0u64;
    loop {
        round += 1;
        match eval(hi, round)? {
            Some(p) if p < P_WINDOW.1 => break,
            _ => {
                hi *= 2.0;
                if hi > 20.0 {
                    return Err(Error::SimulationTuning(format!(
                        "no focal coefficient below 20 reaches p < {} at n = {n}",
                        P_WINDOW.1
                    )));
                }
            }
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..TUNE_ROUNDS {
        round += 1;
        mid = 0.5 * (lo + hi);
        match eval(mid, round)? {
            Some(p) if p > P_WINDOW.0 && p < P_WINDOW.1 => return Ok(mid),
            Some(p) if p >= P_WINDOW.1 => lo = mid,
            Some(_) => hi = mid,
            // Too few fits to judge: a stronger effect makes fits easier.
            None => lo = mid,
        }
    }
    Ok(mid)
}

/// Run the network-size study: per size, tune the focal effect, keep `reps`
/// generated networks whose focal p-value lands in (0.045, 0.055), and
/// record the medians of the classical and Bayesian evidence measures.
pub fn size_study(cfg: &SizeStudyConfig) -> Result<Vec<SizeStudyRow>> {
    if cfg.sizes.is_empty() || cfg.reps == 0 {
        return Err(Error::Invalid("size study needs sizes and reps".into()));
    }
    let florentine = crate::data::florentine();
    let model = size_study_model();
    let null_model = ModelSpec::new(vec![StatisticSpec::Edges, StatisticSpec::Kstar { k: 2 }]);
    let base_fit = fit_mple(&florentine, &model)?;
    let base = [
        base_fit.coefficients.get("edges").expect("edges"),
        base_fit.coefficients.get("kstar2").expect("kstar2"),
    ];
    let focal_idx = base_fit
        .coefficients
        .names()
        .iter()
        .position(|n| n == "absdiff.wealth")
        .expect("focal");
    let pool: Vec<f64> = match florentine.attributes().column("wealth") {
        Some(AttributeColumn::Numeric(v)) => v.clone(),
        _ => unreachable!("marriage data ships a numeric wealth column"),
    };

    let mut rows = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        let size_seed = derive_seed(cfg.seed, si as u64);
        let focal = tune_focal(&base, &model, n, &pool, focal_idx, size_seed)?;
        let beta = CoefficientVector::new(
            vec!["edges".into(), "kstar2".into(), "absdiff.wealth".into()],
            vec![base[0], base[1], focal],
        )?;

        let mut ps = Vec::new();
        let mut bfs = Vec::new();
        let mut probs = Vec::new();
        let mut bics = Vec::new();
        let mut aics = Vec::new();
        let mut attempt = 0u64;
        while ps.len() < cfg.reps {
            attempt += 1;
            if attempt as usize > ATTEMPTS_PER_KEPT * cfg.reps {
                return Err(Error::SimulationTuning(format!(
                    "kept only {}/{} networks in the p-window at n = {n}",
                    ps.len(),
                    cfg.reps
                )));
            }
            let att_seed = derive_seed(size_seed, 1_000_000 + attempt);
            let mut rng = ChaCha8Rng::seed_from_u64(att_seed);
            let template = wealth_template(n, &pool, &mut rng)?;
            let Some(net) = generate(&beta, &model, &template, att_seed)? else {
                continue;
            };
            let Ok(fit) = fit_mple(&net, &model) else { continue };
            let p = fit.p_values[focal_idx];
            if !(p > P_WINDOW.0 && p < P_WINDOW.1) {
                continue;
            }
            // The network is kept; now the expensive Bayesian side.
            let Ok(prior) = unit_information_prior(&net, &model) else { continue };
            let settings = ExchangeSettings { seed: att_seed, ..cfg.exchange };
            let Ok(draws) = sample_posterior(&net, &model, &prior, settings) else { continue };
            let Ok(post) = gaussian_approx(&draws) else { continue };
            let hset = parse_hypotheses("absdiff.wealth = 0", prior.names())?;
            let report = evaluate_hypotheses(&prior, &post, &hset, 1_000, att_seed)?;
            let Ok(null_fit) = fit_mple(&net, &null_model) else { continue };
            let ic = information_criteria(&fit, &null_fit)?;

            ps.push(p);
            bfs.push(report.hypotheses[0].bf);
            probs.push(report.posterior_probs[0]);
            bics.push(ic.bic_evidence_null);
            aics.push(ic.aic_evidence_null);
        }

        rows.push(SizeStudyRow {
            n,
            reps: cfg.reps,
            focal,
            median_p: median(&mut ps),
            median_bf: median(&mut bfs),
            median_post_prob: median(&mut probs),
            median_bic_evidence: median(&mut bics),
            median_aic_evidence: median(&mut aics),
        });
    }
    Ok(rows)
}

/// CSV for the size study, one row per network size.
pub fn size_study_csv(rows: &[SizeStudyRow]) -> String {
    let mut out = String::from(
        "n,reps,focal,median_p,median_bf,median_post_prob,median_bic_evidence,median_aic_evidence\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.reps,
            r.focal,
            r.median_p,
            r.median_bf,
            r.median_post_prob,
            r.median_bic_evidence,
            r.median_aic_evidence
        ));
    }
    out
}

/// Settings for the ordered-effects study.
#[derive(Debug, Clone)]
pub struct OrderStudyConfig {
    pub sizes: Vec<usize>,
    /// Focal scale: the three covariate effects are (β, 2β, 3β).
    pub betas: Vec<f64>,
    pub reps: usize,
    /// Baseline density, reciprocity, and transitivity coefficients used
    /// for generation.
    pub edges_base: f64,
    pub mutual_base: f64,
    pub gwesp_base: f64,
    pub exchange: ExchangeSettings,
    pub mc_draws: usize,
    pub seed: u64,
}

impl Default for OrderStudyConfig {
    fn default() -> Self {
        OrderStudyConfig {
            sizes: vec![10, 30],
            betas: vec![-0.4, -0.2, 0.0, 0.2, 0.4],
            reps: 50,
            edges_base: -2.2,
            mutual_base: 0.5,
            gwesp_base: 0.25,
            exchange: ExchangeSettings::default(),
            mc_draws: crate::bf::DEFAULT_MC_DRAWS,
            seed: 0,
        }
    }
}

/// One (size, β) grid point of the ordered-effects study.
#[derive(Debug, Clone)]
pub struct OrderStudyRow {
    pub n: usize,
    pub beta: f64,
    /// Networks that produced a usable fit at this grid point.
    pub reps_used: usize,
    /// True when no generated network was usable (degenerate point).
    pub degenerate: bool,
    /// Median posterior probabilities of the ordered hypothesis, the
    /// equality hypothesis, and the complement.
    pub median_prob_order: f64,
    pub median_prob_equal: f64,
    pub median_prob_complement: f64,
    /// Median Bayes factor of the ordered hypothesis against the
    /// unconstrained model.
    pub median_bf_order: f64,
}

fn order_study_model() -> ModelSpec {
    ModelSpec::new(vec![
        StatisticSpec::Edges,
        StatisticSpec::Edgecov { name: "prefsim".into(), standardized: true },
        StatisticSpec::Edgecov { name: "inflattr".into(), standardized: true },
        StatisticSpec::Edgecov { name: "committee".into(), standardized: true },
        StatisticSpec::Mutual,
        StatisticSpec::Gwesp { decay: 0.1 },
    ])
}

/// Directed template with three fresh standard-normal dyadic covariates.
fn order_template(n: usize, rng: &mut impl Rng) -> Result<Network> {
    let mut net = Network::empty(n, true)?;
    for name in ["prefsim", "inflattr", "committee"] {
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                let z: f64 = StandardNormal.sample(rng);
                z
            }
        });
        net = net.with_covariate(DyadCovariate::new(name, m)?)?;
    }
    Ok(net)
}

/// Run the ordered-effects study over the (size, β) grid. A grid point
/// where every generated network is degenerate or unfittable is flagged
/// rather than failing the run.
pub fn order_study(cfg: &OrderStudyConfig) -> Result<Vec<OrderStudyRow>> {
    if cfg.sizes.is_empty() || cfg.betas.is_empty() || cfg.reps == 0 {
        return Err(Error::Invalid("order study needs sizes, betas, and reps".into()));
    }
    let model = order_study_model();
    let names: Vec<String> = vec![
        "edges".into(),
        "prefsim".into(),
        "inflattr".into(),
        "committee".into(),
        "mutual".into(),
        "gwesp".into(),
    ];
    let hypothesis_text =
        "order: prefsim < inflattr < committee; equal: prefsim = inflattr = committee";

    let mut rows = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        for (bi, &beta) in cfg.betas.iter().enumerate() {
            let point_seed = derive_seed(cfg.seed, (si * 1000 + bi) as u64);
            let gen_beta = CoefficientVector::new(
                names.clone(),
                vec![
                    cfg.edges_base,
                    beta,
                    2.0 * beta,
                    3.0 * beta,
                    cfg.mutual_base,
                    cfg.gwesp_base,
                ],
            )?;

            let mut p_order = Vec::new();
            let mut p_equal = Vec::new();
            let mut p_comp = Vec::new();
            let mut bf_order = Vec::new();
            for rep in 0..cfg.reps {
                let rep_seed = derive_seed(point_seed, rep as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
                let template = order_template(n, &mut rng)?;
                let Some(net) = generate(&gen_beta, &model, &template, rep_seed)? else {
                    continue;
                };
                let Ok(prior) = unit_information_prior(&net, &model) else { continue };
                let settings = ExchangeSettings { seed: rep_seed, ..cfg.exchange };
                let Ok(draws) = sample_posterior(&net, &model, &prior, settings) else {
                    continue;
                };
                let Ok(post) = gaussian_approx(&draws) else { continue };
                let hset = parse_hypotheses(hypothesis_text, prior.names())?;
                let report =
                    evaluate_hypotheses(&prior, &post, &hset, cfg.mc_draws, rep_seed)?;
                p_order.push(report.posterior_probs[0]);
                p_equal.push(report.posterior_probs[1]);
                p_comp.push(report.posterior_probs[2]);
                bf_order.push(report.hypotheses[0].bf);
            }

            rows.push(OrderStudyRow {
                n,
                beta,
                reps_used: p_order.len(),
                degenerate: p_order.is_empty(),
                median_prob_order: median(&mut p_order),
                median_prob_equal: median(&mut p_equal),
                median_prob_complement: median(&mut p_comp),
                median_bf_order: median(&mut bf_order),
            });
        }
    }
    Ok(rows)
}

/// CSV for the ordered-effects study, one row per (size, β) grid point.
pub fn order_study_csv(rows: &[OrderStudyRow]) -> String {
    let mut out = String::from(
        "n,beta,reps_used,degenerate,median_prob_order,median_prob_equal,median_prob_complement,median_bf_order\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.beta,
            r.reps_used,
            r.degenerate,
            r.median_prob_order,
            r.median_prob_equal,
            r.median_prob_complement,
            r.median_bf_order
        ));
    }
    out
}
