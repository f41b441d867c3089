//! Bayes factors for constrained hypotheses against the unconstrained model.
//!
//! Each hypothesis {β : R_E β = 0, R_O β > 0} is scored by an extended
//! Savage–Dickey ratio: the density of R_E β at zero (posterior over prior)
//! times the probability that R_O β > 0 given R_E β = 0 (posterior over
//! prior). The density ratio rewards fit; the probability ratio charges for
//! complexity, since a vague prior spreads little mass over a narrow order
//! region. A complement hypothesis ("none of the named regions") is scored
//! from the leftover probability mass, and pairwise evidence plus posterior
//! hypothesis probabilities follow by arithmetic on the per-hypothesis
//! Bayes factors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::hypothesis::{ConstrainedHypothesis, HypothesisSet};
use crate::prior::{checked_cholesky, Gaussian};

/// Default Monte Carlo sample size for order-constraint probabilities.
pub const DEFAULT_MC_DRAWS: usize = 100_000;
/// Prior complement probability below which the complement hypothesis is
/// dropped as exhausted.
pub const COMPLEMENT_FLOOR: f64 = 1e-6;
/// Label given to the complement hypothesis in reports.
pub const COMPLEMENT_LABEL: &str = "complement";

/// A probability with its Monte Carlo standard error (zero when the value
/// is closed-form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub mc_se: f64,
}

impl ProbabilityEstimate {
    fn exact(value: f64) -> Self {
        ProbabilityEstimate { value, mc_se: 0.0 }
    }
}

/// One side (fit = posterior, complexity = prior) of a hypothesis's
/// Savage–Dickey decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfSide {
    /// Density of R_E β at zero; `None` when the hypothesis has no
    /// equality constraints.
    pub density_at_null: Option<f64>,
    /// P(R_O β > 0 | R_E β = 0); `None` when there are no order
    /// constraints. For the complement entry this is the complement
    /// probability itself.
    pub order_prob: Option<ProbabilityEstimate>,
}

/// A hypothesis's Bayes factor against the unconstrained model, with the
/// fit/complexity components it was assembled from.
#[derive(Debug, Clone)]
pub struct HypothesisEvidence {
    pub label: String,
    /// Human-readable constraint text (empty for the complement).
    pub rendered: String,
    pub bf: f64,
    pub fit: BfSide,
    pub complexity: BfSide,
}

/// Confirmatory evaluation of a hypothesis set.
#[derive(Debug, Clone)]
pub struct ConfirmatoryReport {
    /// Named hypotheses in input order, then the complement when kept.
    pub hypotheses: Vec<HypothesisEvidence>,
    /// True when the named regions exhausted the space and the complement
    /// was dropped.
    pub complement_dropped: bool,
    /// evidence_matrix[(t, u)] = BF of hypothesis t against hypothesis u.
    pub evidence_matrix: DMatrix<f64>,
    pub prior_probs: Vec<f64>,
    pub posterior_probs: Vec<f64>,
    pub mc_draws: usize,
    pub seed: u64,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// splitmix64: derive decorrelated seeds for independent MC runs.
pub(crate) fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        .wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Density of the Gaussian variable R_E β at the zero vector.
///
/// Clamped to the smallest positive float: a posterior sitting far from the
/// constraint would otherwise underflow to an exact zero and make decisive
/// evidence against the hypothesis unrepresentable as a Bayes factor.
pub fn density_at_null(g: &Gaussian, r_e: &DMatrix<f64>) -> Result<f64> {
    let q = r_e.nrows();
    if q == 0 || r_e.ncols() != g.dim() {
        return Err(Error::DegenerateTransform);
    }
    let mean = r_e * g.mean();
    let mut cov = r_e * g.covariance() * r_e.transpose();
    symmetrize(&mut cov);
    let chol = checked_cholesky(cov).ok_or(Error::DegenerateTransform)?;
    let solved = chol.solve(&mean);
    let quad = mean.dot(&solved);
    let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum();
    let log_pdf = -0.5 * q as f64 * (2.0 * std::f64::consts::PI).ln() - log_det - 0.5 * quad;
    Ok(log_pdf.exp().max(f64::MIN_POSITIVE))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Mean and covariance of R_O β given R_E β = 0 (plain R_O β moments when
/// there are no equality rows).
fn conditioned_order_moments(
    g: &Gaussian,
    r_e: &DMatrix<f64>,
    r_o: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let sigma = g.covariance();
    let mu_o = r_o * g.mean();
    let mut cov_oo = r_o * sigma * r_o.transpose();
    symmetrize(&mut cov_oo);
    if r_e.nrows() == 0 {
        return Ok((mu_o, cov_oo));
    }
    let mut cov_ee = r_e * sigma * r_e.transpose();
    symmetrize(&mut cov_ee);
    let cov_eo = r_e * sigma * r_o.transpose();
    let mu_e = r_e * g.mean();
    let chol = checked_cholesky(cov_ee).ok_or(Error::DegenerateConditioned)?;
    // E[O|E=0] = μ_O − Σ_OE Σ_EE⁻¹ μ_E; Cov = Σ_OO − Σ_OE Σ_EE⁻¹ Σ_EO.
    let mean = mu_o - cov_eo.transpose() * chol.solve(&mu_e);
    let mut cov = cov_oo - cov_eo.transpose() * chol.solve(&cov_eo);
    symmetrize(&mut cov);
    Ok((mean, cov))
}

/// P(R_O β > 0 | R_E β = 0): the normal CDF when R_O has one row, antithetic
/// Monte Carlo otherwise.
///
/// Estimates are floored at the method's resolution — the smallest positive
/// float for the closed form, the continuity-corrected zero-count estimate
/// for Monte Carlo — so a distribution sitting entirely outside the region
/// yields a tiny positive probability rather than an exact zero.
pub fn conditional_order_prob(
    g: &Gaussian,
    r_e: &DMatrix<f64>,
    r_o: &DMatrix<f64>,
    mc_draws: usize,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    if r_o.nrows() == 0 || r_o.ncols() != g.dim() {
        return Err(Error::DegenerateConditioned);
    }
    let (mean, cov) = conditioned_order_moments(g, r_e, r_o)?;
    let q = mean.len();
    if q == 1 {
        let v = cov[(0, 0)];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DegenerateConditioned);
        }
        return Ok(ProbabilityEstimate::exact(
            standard_normal().cdf(mean[0] / v.sqrt()).max(f64::MIN_POSITIVE),
        ));
    }

    // Factor the (possibly semi-definite) covariance for sampling. Rank
    // deficiency is legitimate here: conditioning can tie order directions
    // together without emptying the region.
    let eig = SymmetricEigen::new(cov);
    let peak = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::DegenerateConditioned);
    }
    let mut root = eig.eigenvectors.clone();
    for c in 0..q {
        let ev = eig.eigenvalues[c];
        if ev < -1e-8 * peak {
            return Err(Error::DegenerateConditioned);
        }
        let s = ev.max(0.0).sqrt();
        for r in 0..q {
            root[(r, c)] *= s;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (mc_draws / 2).max(1);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut z = DVector::zeros(q);
    for _ in 0..pairs {
        for zi in z.iter_mut() {
            *zi = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
        }
        let shift = &root * &z;
        let plus = (0..q).all(|i| mean[i] + shift[i] > 0.0) as usize as f64;
        let minus = (0..q).all(|i| mean[i] - shift[i] > 0.0) as usize as f64;
        let pair_mean = 0.5 * (plus + minus);
        sum += pair_mean;
        sum_sq += pair_mean * pair_mean;
    }
    let value = sum / pairs as f64;
    let var = ((sum_sq - sum * sum / pairs as f64) / (pairs as f64 - 1.0).max(1.0)).max(0.0);
    Ok(floored_mc_estimate(value, (var / pairs as f64).sqrt(), pairs))
}

/// Floor a Monte Carlo probability estimate at the continuity-corrected
/// value of a zero count, 0.5 / (draws + 1). Below that the sample carries
/// no information beyond "smaller than the method resolves", and an exact
/// zero would make the Bayes factor degenerate.
fn floored_mc_estimate(value: f64, mc_se: f64, pairs: usize) -> ProbabilityEstimate {
    let floor = 0.5 / (2.0 * pairs as f64 + 1.0);
    if value < floor {
        ProbabilityEstimate { value: floor, mc_se: floor }
    } else {
        ProbabilityEstimate { value, mc_se }
    }
}

/// Evaluate one side (prior or posterior) of a hypothesis.
fn side(
    g: &Gaussian,
    h: &ConstrainedHypothesis,
    mc_draws: usize,
    seed: u64,
) -> Result<BfSide> {
    let density = if h.has_equalities() {
        Some(density_at_null(g, h.r_e())?)
    } else {
        None
    };
    let order = if h.has_orders() {
        Some(conditional_order_prob(g, h.r_e(), h.r_o(), mc_draws, seed)?)
    } else {
        None
    };
    Ok(BfSide { density_at_null: density, order_prob: order })
}

/// The extended Savage–Dickey Bayes factor of one hypothesis against the
/// unconstrained model: density ratio × conditional order-probability
/// ratio, each factor 1 when its constraint block is empty.
pub fn bf_vs_unconstrained(
    prior: &Gaussian,
    post: &Gaussian,
    h: &ConstrainedHypothesis,
    mc_draws: usize,
    seed: u64,
) -> Result<HypothesisEvidence> {
    if prior.names() != post.names() {
        return Err(Error::Invalid(format!(
            "prior is over {:?}, posterior over {:?}",
            prior.names(),
            post.names()
        )));
    }
    let complexity = side(prior, h, mc_draws, derive_seed(seed, 1))?;
    let fit = side(post, h, mc_draws, derive_seed(seed, 2))?;
    let mut bf = 1.0;
    if let (Some(num), Some(den)) = (fit.density_at_null, complexity.density_at_null) {
        bf *= num / den;
    }
    if let (Some(num), Some(den)) = (fit.order_prob, complexity.order_prob) {
        bf *= num.value / den.value;
    }
    if !bf.is_finite() || bf <= 0.0 {
        return Err(Error::NonPositiveBayesFactor(bf));
    }
    Ok(HypothesisEvidence {
        label: h.label.clone(),
        rendered: h.render(prior.names()),
        bf,
        fit,
        complexity,
    })
}

/// Probability that β falls in none of the order-only hypothesis regions,
/// under one distribution. Regions of equality-constrained hypotheses carry
/// zero measure and are ignored; overlaps are counted once by testing joint
/// membership per draw. Estimates are floored like
/// [`conditional_order_prob`]'s.
fn complement_prob(
    g: &Gaussian,
    regions: &[&DMatrix<f64>],
    mc_draws: usize,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    if regions.is_empty() {
        return Ok(ProbabilityEstimate::exact(1.0));
    }
    if regions.len() == 1 && regions[0].nrows() == 1 {
        // Single half-space: closed form, evaluated as the tail on the
        // outside so a distribution deep inside the region cannot round the
        // complement to an exact zero.
        let (mean, cov) =
            conditioned_order_moments(g, &DMatrix::zeros(0, g.dim()), regions[0])?;
        let v = cov[(0, 0)];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DegenerateConditioned);
        }
        return Ok(ProbabilityEstimate::exact(
            standard_normal().cdf(-mean[0] / v.sqrt()).max(f64::MIN_POSITIVE),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (mc_draws / 2).max(1);
    let outside = |beta: &DVector<f64>| -> f64 {
        let hit = regions
            .iter()
            .any(|r| (*r * beta).iter().all(|&v| v > 0.0));
        (!hit) as usize as f64
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..pairs {
        let (a, b) = g.sample_antithetic_pair(&mut rng);
        let pair_mean = 0.5 * (outside(&a) + outside(&b));
        sum += pair_mean;
        sum_sq += pair_mean * pair_mean;
    }
    let value = sum / pairs as f64;
    let var = ((sum_sq - sum * sum / pairs as f64) / (pairs as f64 - 1.0).max(1.0)).max(0.0);
    Ok(floored_mc_estimate(
        value,
        (var / pairs as f64).sqrt(),
        pairs,
    ))
}

/// Bayes factor of the complement hypothesis ("β satisfies none of the
/// named order regions") against the unconstrained model. Returns `None`
/// when the named regions exhaust the space: prior complement probability
/// below [`COMPLEMENT_FLOOR`], or below what one Monte Carlo hit in the
/// draw budget would register (a floored zero-count estimate sits under
/// both, so "no prior draw landed outside" always drops).
pub fn complement_bf(
    prior: &Gaussian,
    post: &Gaussian,
    hset: &HypothesisSet,
    mc_draws: usize,
    seed: u64,
) -> Result<Option<HypothesisEvidence>> {
    let regions: Vec<&DMatrix<f64>> = hset
        .hypotheses
        .iter()
        .filter(|h| h.has_orders() && !h.has_equalities())
        .map(|h| h.r_o())
        .collect();
    let prior_p = complement_prob(prior, &regions, mc_draws, derive_seed(seed, 3))?;
    let one_hit = 0.5 / (mc_draws / 2).max(1) as f64;
    if prior_p.value < one_hit.max(COMPLEMENT_FLOOR) {
        return Ok(None);
    }
    let post_p = complement_prob(post, &regions, mc_draws, derive_seed(seed, 4))?;
    let bf = post_p.value / prior_p.value;
    if !bf.is_finite() || bf <= 0.0 {
        return Err(Error::NonPositiveBayesFactor(bf));
    }
    Ok(Some(HypothesisEvidence {
        label: COMPLEMENT_LABEL.into(),
        rendered: String::new(),
        bf,
        fit: BfSide { density_at_null: None, order_prob: Some(post_p) },
        complexity: BfSide { density_at_null: None, order_prob: Some(prior_p) },
    }))
}

/// Pairwise evidence matrix from per-hypothesis Bayes factors:
/// entry (t, u) = BF_tu / BF_uu′ = BF_t / BF_u.
pub fn evidence_matrix(bfs: &[f64]) -> Result<DMatrix<f64>> {
    for &b in bfs {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::NonPositiveBayesFactor(b));
        }
    }
    let t = bfs.len();
    Ok(DMatrix::from_fn(t, t, |a, b| bfs[a] / bfs[b]))
}

/// Posterior hypothesis probabilities from Bayes factors against a common
/// reference: P(H_t|Y) ∝ P(H_t) · BF_t.
pub fn posterior_probs(bfs: &[f64], prior_probs: &[f64]) -> Result<Vec<f64>> {
    if prior_probs.len() != bfs.len()
        || prior_probs.iter().any(|&p| p <= 0.0)
        || (prior_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidPriorProbs);
    }
    for &b in bfs {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::NonPositiveBayesFactor(b));
        }
    }
    let weights: Vec<f64> = bfs.iter().zip(prior_probs).map(|(b, p)| b * p).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Evaluate a full hypothesis set: per-hypothesis Bayes factors, the
/// complement, the pairwise evidence matrix, and posterior probabilities.
pub fn evaluate_hypotheses(
    prior: &Gaussian,
    post: &Gaussian,
    hset: &HypothesisSet,
    mc_draws: usize,
    seed: u64,
) -> Result<ConfirmatoryReport> {
    if hset.t() == 0 {
        return Err(Error::HypothesisParse("no hypotheses to evaluate".into()));
    }
    let mut hypotheses = Vec::with_capacity(hset.t() + 1);
    for (t, h) in hset.hypotheses.iter().enumerate() {
        hypotheses.push(bf_vs_unconstrained(
            prior,
            post,
            h,
            mc_draws,
            derive_seed(seed, 100 + t as u64),
        )?);
    }
    let mut complement_dropped = false;
    if hset.include_complement {
        match complement_bf(prior, post, hset, mc_draws, seed)? {
            Some(c) => hypotheses.push(c),
            None => complement_dropped = true,
        }
    }

    let kept = hypotheses.len();
    let prior_probs: Vec<f64> = match hset.prior_probs() {
        Some(given) => {
            // `given` covers named hypotheses plus the complement slot; when
            // the complement is dropped the rest renormalize proportionally.
            let used = &given[..kept.min(given.len())];
            let total: f64 = used.iter().sum();
            used.iter().map(|p| p / total).collect()
        }
        None => vec![1.0 / kept as f64; kept],
    };

    let bfs: Vec<f64> = hypotheses.iter().map(|h| h.bf).collect();
    let matrix = evidence_matrix(&bfs)?;
    let posterior = posterior_probs(&bfs, &prior_probs)?;

    Ok(ConfirmatoryReport {
        hypotheses,
        complement_dropped,
        evidence_matrix: matrix,
        prior_probs,
        posterior_probs: posterior,
        mc_draws,
        seed,
    })
}

/// Per-coefficient exploratory test: zero vs negative vs positive effect.
#[derive(Debug, Clone)]
pub struct ExploratoryRow {
    pub name: String,
    /// Savage–Dickey Bayes factor of β = 0 against the unconstrained model.
    pub bf_zero: f64,
    /// Posterior/prior probability ratio for β < 0.
    pub bf_negative: f64,
    /// Posterior/prior probability ratio for β > 0.
    pub bf_positive: f64,
    /// Posterior probabilities of the three hypotheses under equal (1/3)
    /// prior probabilities.
    pub prob_zero: f64,
    pub prob_negative: f64,
    pub prob_positive: f64,
}

/// Run the default exploratory test on every coefficient except `edges`,
/// whose flat prior supports no density ratio. All three Bayes factors are
/// closed-form in the one-dimensional marginals.
pub fn exploratory_test(prior: &Gaussian, post: &Gaussian) -> Result<Vec<ExploratoryRow>> {
    if prior.names() != post.names() {
        return Err(Error::Invalid(format!(
            "prior is over {:?}, posterior over {:?}",
            prior.names(),
            post.names()
        )));
    }
    let norm = standard_normal();
    let mut rows = Vec::new();
    for (i, name) in prior.names().iter().enumerate() {
        if name == "edges" {
            continue;
        }
        let (pm, ps) = (prior.mean()[i], prior.sd(i));
        let (qm, qs) = (post.mean()[i], post.sd(i));
        let pdf = |m: f64, s: f64| (-0.5 * (m / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let bf_zero = pdf(qm, qs) / pdf(pm, ps);
        let prior_neg = norm.cdf(-pm / ps);
        let post_neg = norm.cdf(-qm / qs);
        let bf_negative = post_neg / prior_neg;
        let bf_positive = (1.0 - post_neg) / (1.0 - prior_neg);
        for bf in [bf_zero, bf_negative, bf_positive] {
            if !bf.is_finite() {
                return Err(Error::NonPositiveBayesFactor(bf));
            }
        }
        let total = bf_zero + bf_negative + bf_positive;
        rows.push(ExploratoryRow {
            name: name.clone(),
            bf_zero,
            bf_negative,
            bf_positive,
            prob_zero: bf_zero / total,
            prob_negative: bf_negative / total,
            prob_positive: bf_positive / total,
        });
    }
    Ok(rows)
}

/// Strength-of-evidence category for a Bayes factor of the first hypothesis
/// in a pair against the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RafteryLabel {
    DecisiveAgainst,
    StrongAgainst,
    PositiveAgainst,
    WeakAgainst,
    NoPreference,
    WeakFor,
    PositiveFor,
    StrongFor,
    DecisiveFor,
}

impl RafteryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RafteryLabel::DecisiveAgainst => "decisive evidence against",
            RafteryLabel::StrongAgainst => "strong evidence against",
            RafteryLabel::PositiveAgainst => "positive evidence against",
            RafteryLabel::WeakAgainst => "weak evidence against",
            RafteryLabel::NoPreference => "no preference",
            RafteryLabel::WeakFor => "weak evidence for",
            RafteryLabel::PositiveFor => "positive evidence for",
            RafteryLabel::StrongFor => "strong evidence for",
            RafteryLabel::DecisiveFor => "decisive evidence for",
        }
    }
}

impl std::fmt::Display for RafteryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Map a Bayes factor to its interpretive category on the conventional
/// scale with cut points 3, 20, and 150 (and their reciprocals). The scale
/// is a reading aid, not a decision rule; reports print the number next to
/// the label.
pub fn raftery_label(bf: f64) -> Result<RafteryLabel> {
    if !bf.is_finite() || bf <= 0.0 {
        return Err(Error::NonPositiveBayesFactor(bf));
    }
    Ok(if bf < 1.0 / 150.0 {
        RafteryLabel::DecisiveAgainst
    } else if bf < 1.0 / 20.0 {
        RafteryLabel::StrongAgainst
    } else if bf < 1.0 / 3.0 {
        RafteryLabel::PositiveAgainst
    } else if bf < 1.0 {
        RafteryLabel::WeakAgainst
    } else if bf == 1.0 {
        RafteryLabel::NoPreference
    } else if bf <= 3.0 {
        RafteryLabel::WeakFor
    } else if bf <= 20.0 {
        RafteryLabel::PositiveFor
    } else if bf <= 150.0 {
        RafteryLabel::StrongFor
    } else {
        RafteryLabel::DecisiveFor
    })
}
