//! Network simulation: a Gibbs tie-toggle sampler for drawing networks at
//! fixed coefficients, and an exact enumeration oracle for tiny networks.
//!
//! The Gibbs sampler exploits the model's closed-form full conditionals: the
//! log odds that a tie is present given the rest of the graph is βᵀδ_(ij),
//! so one sweep resamples every dyad from its exact conditional. The
//! enumeration walks all 2^D graphs in Gray-code order, toggling one dyad at
//! a time so sufficient statistics update incrementally.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::{canonical_dyads, Adjacency, Network};
use crate::stats::{BoundModel, ModelSpec};

/// Largest dyad count for which exact enumeration is allowed (2^20 graphs).
pub const MAX_ENUMERATION_DYADS: usize = 20;

/// Default Gibbs settings for auxiliary draws inside posterior samplers.
pub const DEFAULT_BURN_IN: usize = 50;
/// Default sweeps between retained draws.
pub const DEFAULT_THIN: usize = 5;

/// Sweeps a chain must sit at the complete or empty graph before a draw is
/// flagged as degenerate.
const DEGENERACY_STREAK: usize = 10;

/// Named coefficients aligned with a model's statistic order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    names: Vec<String>,
    values: DVector<f64>,
}

impl CoefficientVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::Invalid(format!(
                "{} coefficient names for {} values",
                names.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(CoefficientVector {
            names,
            values: DVector::from_vec(values),
        })
    }

    /// Coefficients for a bound model, in its statistic order.
    pub fn for_model(model: &BoundModel, values: &[f64]) -> Result<Self> {
        Self::new(model.names().to_vec(), values.to_vec())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    fn check_model(&self, model: &BoundModel) -> Result<()> {
        if self.names != model.names() {
            return Err(Error::SamplerPrecondition(format!(
                "coefficient names {:?} do not match model statistics {:?}",
                self.names,
                model.names()
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A mutable graph being simulated: adjacency plus incrementally maintained
/// sufficient statistics for one bound model.
#[derive(Debug, Clone)]
pub struct GraphState<'m> {
    model: &'m BoundModel,
    adj: Adjacency,
    stats: DVector<f64>,
    dyads: Vec<(usize, usize)>,
    order: Vec<usize>,
    scratch: Vec<f64>,
    degenerate_streak: usize,
}

impl<'m> GraphState<'m> {
    pub fn new(model: &'m BoundModel, adj: Adjacency) -> Self {
        let stats = model.sufficient_stats(&adj);
        let dyads = canonical_dyads(adj.n(), adj.directed());
        let order: Vec<usize> = (0..dyads.len()).collect();
        let scratch = vec![0.0; model.k()];
        GraphState {
            model,
            adj,
            stats,
            dyads,
            order,
            scratch,
            degenerate_streak: 0,
        }
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    /// Current s(Y, X), maintained incrementally.
    pub fn stats(&self) -> &DVector<f64> {
        &self.stats
    }

    /// Consecutive sweeps the graph has ended complete or empty.
    pub fn degenerate_streak(&self) -> usize {
        self.degenerate_streak
    }

    /// Whether the chain has sat at a degenerate graph long enough that
    /// draws from it should be treated with suspicion.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_streak >= DEGENERACY_STREAK
    }

    /// One full Gibbs sweep: every dyad resampled from its conditional, in
    /// fresh random order.
    pub fn sweep(&mut self, beta: &DVector<f64>, rng: &mut impl Rng) -> Result<()> {
        self.order.shuffle(rng);
        for idx in 0..self.order.len() {
            let (i, j) = self.dyads[self.order[idx]];
            self.model.change_stats_into(&self.adj, i, j, &mut self.scratch);
            let mut log_odds = 0.0;
            for (b, d) in beta.iter().zip(&self.scratch) {
                log_odds += b * d;
            }
            if !log_odds.is_finite() {
                return Err(Error::NonFiniteLogOdds);
            }
            let tie = rng.random::<f64>() < sigmoid(log_odds);
            let was = self.adj.set(i, j, tie);
            if was != tie {
                let sign = if tie { 1.0 } else { -1.0 };
                for (s, d) in self.stats.iter_mut().zip(&self.scratch) {
                    *s += sign * d;
                }
            }
        }
        if self.adj.is_complete() || self.adj.is_empty_graph() {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
        Ok(())
    }

    pub fn run_sweeps(
        &mut self,
        beta: &DVector<f64>,
        sweeps: usize,
        rng: &mut impl Rng,
    ) -> Result<()> {
        for _ in 0..sweeps {
            self.sweep(beta, rng)?;
        }
        Ok(())
    }
}

/// Networks drawn by [`sample_networks`], with per-draw degeneracy flags.
#[derive(Debug, Clone)]
pub struct NetworkSample {
    pub networks: Vec<Network>,
    /// True where the chain had been stuck at the complete or empty graph
    /// for ten consecutive sweeps when the draw was taken.
    pub degenerate: Vec<bool>,
}

impl NetworkSample {
    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Draw `count` networks from the model at `beta` by Gibbs sweeps, starting
/// from the template's tie pattern. The first draw is taken after `burn_in`
/// sweeps and subsequent draws `thin` sweeps apart. Deterministic given
/// `seed`; attributes and covariates of the template are carried over to the
/// returned networks.
pub fn sample_networks(
    beta: &CoefficientVector,
    model: &ModelSpec,
    template: &Network,
    count: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<NetworkSample> {
    if count == 0 {
        return Err(Error::SamplerPrecondition("count must be at least 1".into()));
    }
    let bound = BoundModel::bind(model, template)?;
    beta.check_model(&bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GraphState::new(&bound, template.adjacency().clone());
    let mut networks = Vec::with_capacity(count);
    let mut degenerate = Vec::with_capacity(count);
    for k in 0..count {
        let sweeps = if k == 0 { burn_in } else { thin };
        state.run_sweeps(beta.values(), sweeps, &mut rng)?;
        networks.push(template.with_adjacency(state.adjacency().clone()));
        degenerate.push(state.is_degenerate());
    }
    Ok(NetworkSample { networks, degenerate })
}

/// The exact distribution over all 2^D tie patterns for a model at fixed
/// coefficients. Graphs are indexed by a bitmask over dyads in canonical
/// order (bit d set ⇔ dyad d tied).
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    n: usize,
    directed: bool,
    dyads: Vec<(usize, usize)>,
    /// Normalized log probabilities, indexed by graph mask.
    log_probs: Vec<f64>,
    log_z: f64,
    mean_stats: DVector<f64>,
    cov_stats: DMatrix<f64>,
}

impl ExactDistribution {
    /// Number of graphs, 2^D.
    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dyads(&self) -> &[(usize, usize)] {
        &self.dyads
    }

    /// log Σ_Y exp{βᵀ s(Y, X)} — the normalizing constant.
    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn probability(&self, mask: usize) -> f64 {
        self.log_probs[mask].exp()
    }

    /// Exact E[s(Y, X)].
    pub fn mean_stats(&self) -> &DVector<f64> {
        &self.mean_stats
    }

    /// Exact Cov[s(Y, X)].
    pub fn cov_stats(&self) -> &DMatrix<f64> {
        &self.cov_stats
    }

    /// Bitmask index of a tie pattern.
    pub fn mask_of(&self, adj: &Adjacency) -> Result<usize> {
        if adj.n() != self.n || adj.directed() != self.directed {
            return Err(Error::Invalid(
                "network shape does not match the enumerated space".into(),
            ));
        }
        let mut mask = 0usize;
        for (d, &(i, j)) in self.dyads.iter().enumerate() {
            if adj.has(i, j) {
                mask |= 1 << d;
            }
        }
        Ok(mask)
    }

    /// Total-variation distance between this distribution and the empirical
    /// distribution of the given draws.
    pub fn tv_from_draws<I: IntoIterator<Item = usize>>(&self, draws: I) -> f64 {
        let mut counts = vec![0u64; self.len()];
        let mut total = 0u64;
        for mask in draws {
            counts[mask] += 1;
            total += 1;
        }
        let total = total as f64;
        let mut tv = 0.0;
        for (mask, &c) in counts.iter().enumerate() {
            tv += (c as f64 / total - self.probability(mask)).abs();
        }
        tv / 2.0
    }
}

/// Enumerate the exact model distribution over all tie patterns of the
/// template's node set. Refuses dyad counts above
/// [`MAX_ENUMERATION_DYADS`]. The template's ties are irrelevant; only its
/// shape, attributes, and covariates matter.
pub fn exact_enumeration(
    beta: &CoefficientVector,
    model: &ModelSpec,
    template: &Network,
) -> Result<ExactDistribution> {
    let bound = BoundModel::bind(model, template)?;
    beta.check_model(&bound)?;
    let dyads = canonical_dyads(template.n(), template.directed());
    let d = dyads.len();
    if d > MAX_ENUMERATION_DYADS {
        return Err(Error::EnumerationTooLarge {
            max: MAX_ENUMERATION_DYADS,
            got: d,
        });
    }
    let size = 1usize << d;
    let b = beta.values();

    // Walk all graphs in Gray-code order so each step toggles one dyad and
    // the sufficient statistics update incrementally.
    let gray_walk = |mut visit: Box<dyn FnMut(usize, &DVector<f64>) + '_>| -> Result<()> {
        let empty = Adjacency::new(template.n(), template.directed());
        let mut stats = bound.sufficient_stats(&empty);
        let mut adj = empty;
        let mut scratch = vec![0.0; bound.k()];
        visit(0, &stats);
        let mut prev = 0usize;
        for i in 1..size {
            let gray = i ^ (i >> 1);
            let bit = (gray ^ prev).trailing_zeros() as usize;
            let (a, c) = dyads[bit];
            let adding = gray & (1 << bit) != 0;
            bound.change_stats_into(&adj, a, c, &mut scratch);
            adj.set(a, c, adding);
            let sign = if adding { 1.0 } else { -1.0 };
            for (s, delta) in stats.iter_mut().zip(&scratch) {
                *s += sign * delta;
            }
            visit(gray, &stats);
            prev = gray;
        }
        Ok(())
    };

    let mut log_weights = vec![0.0f64; size];
    gray_walk(Box::new(|mask, stats| {
        log_weights[mask] = b.dot(stats);
    }))?;

    // log-sum-exp with max shift.
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_weights.iter().map(|lw| (lw - max).exp()).sum();
    let log_z = max + sum.ln();

    let mut log_probs = log_weights;
    for lp in &mut log_probs {
        *lp -= log_z;
    }

    // Second walk for exact moments of s.
    let k = bound.k();
    let mut mean = DVector::zeros(k);
    let mut second = DMatrix::zeros(k, k);
    gray_walk(Box::new(|mask, stats| {
        let p = log_probs[mask].exp();
        for r in 0..k {
            mean[r] += p * stats[r];
            for c in 0..k {
                second[(r, c)] += p * stats[r] * stats[c];
            }
        }
    }))?;
    let cov = &second - &mean * mean.transpose();

    Ok(ExactDistribution {
        n: template.n(),
        directed: template.directed(),
        dyads,
        log_probs,
        log_z,
        mean_stats: mean,
        cov_stats: cov,
    })
}
