//! Model statistics: sufficient statistics s(Y, X), per-dyad change
//! statistics, and the stacked change-statistic design matrix.
//!
//! A [`ModelSpec`] names the statistics; [`BoundModel`] binds the spec to a
//! network's attributes and covariates, precomputing everything that does not
//! depend on the tie pattern. Change statistics are computed incrementally
//! from the bit-matrix adjacency so samplers can evaluate a dyad in O(degree)
//! time instead of recounting configurations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{Adjacency, AttributeColumn, Network};

/// One named network statistic. Decay parameters are fixed constants, not
/// free coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatisticSpec {
    /// Number of ties.
    Edges,
    /// Number of reciprocated dyads (directed only).
    Mutual,
    /// Number of k-stars, Σᵢ C(degᵢ, k) (undirected only).
    Kstar { k: u32 },
    /// Number of triangles (undirected only).
    Triangle,
    /// Geometrically weighted edgewise shared partners. For directed
    /// networks a shared partner of the tie i→j is a two-path i→k→j.
    Gwesp { decay: f64 },
    /// Geometrically weighted dyadwise shared partners, over all dyads.
    Gwdsp { decay: f64 },
    /// Geometrically weighted degrees (undirected only).
    Gwdegree { decay: f64 },
    /// Sum of a numeric attribute over both endpoints of each tie.
    Nodecov { attr: String },
    /// Ties incident to a node with the given categorical level.
    Nodefactor { attr: String, level: String },
    /// Ties received by a node with the given level (directed only).
    Nodeifactor { attr: String, level: String },
    /// Ties sent by a node with the given level (directed only).
    Nodeofactor { attr: String, level: String },
    /// Ties between nodes sharing the same categorical level.
    Nodematch { attr: String },
    /// Ties between the given pair of levels. Directed networks read the
    /// pair as (sender level, receiver level); undirected as unordered.
    Nodemix { attr: String, levels: (String, String) },
    /// Absolute attribute difference summed over ties.
    Absdiff { attr: String },
    /// Sum of a dyadic covariate over ties, optionally z-scored over the
    /// off-diagonal entries before use.
    Edgecov {
        name: String,
        #[serde(default)]
        standardized: bool,
    },
}

impl StatisticSpec {
    /// The coefficient name this statistic contributes. Edge covariates keep
    /// the covariate's own name so hypothesis text can refer to it directly.
    pub fn name(&self) -> String {
        match self {
            StatisticSpec::Edges => "edges".into(),
            StatisticSpec::Mutual => "mutual".into(),
            StatisticSpec::Kstar { k } => format!("kstar{k}"),
            StatisticSpec::Triangle => "triangle".into(),
            StatisticSpec::Gwesp { .. } => "gwesp".into(),
            StatisticSpec::Gwdsp { .. } => "gwdsp".into(),
            StatisticSpec::Gwdegree { .. } => "gwdegree".into(),
            StatisticSpec::Nodecov { attr } => format!("nodecov.{attr}"),
            StatisticSpec::Nodefactor { attr, level } => format!("nodefactor.{attr}.{level}"),
            StatisticSpec::Nodeifactor { attr, level } => format!("nodeifactor.{attr}.{level}"),
            StatisticSpec::Nodeofactor { attr, level } => format!("nodeofactor.{attr}.{level}"),
            StatisticSpec::Nodematch { attr } => format!("nodematch.{attr}"),
            StatisticSpec::Nodemix { attr, levels } => {
                format!("nodemix.{attr}.{}.{}", levels.0, levels.1)
            }
            StatisticSpec::Absdiff { attr } => format!("absdiff.{attr}"),
            StatisticSpec::Edgecov { name, .. } => name.clone(),
        }
    }
}

/// An ordered list of statistics defining an exponential-family model for
/// tie patterns: p(Y | β, X) ∝ exp{βᵀ s(Y, X)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub terms: Vec<StatisticSpec>,
}

impl ModelSpec {
    pub fn new(terms: Vec<StatisticSpec>) -> Self {
        ModelSpec { terms }
    }

    /// Parse the JSON document form: `{"terms":[{"kind":"edges"}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("model JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    /// Number of coefficients.
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(StatisticSpec::name).collect()
    }
}

/// Precomputed curved weights w(k) = e^τ (1 − (1 − e^{−τ})^k) for k = 0..=max.
#[derive(Debug, Clone)]
struct GwWeights {
    w: Vec<f64>,
}

impl GwWeights {
    fn new(decay: f64, max: usize) -> Self {
        let base = 1.0 - (-decay).exp();
        let scale = decay.exp();
        let w = (0..=max)
            .map(|k| scale * (1.0 - base.powi(k as i32)))
            .collect();
        GwWeights { w }
    }

    /// w(k)
    #[inline]
    fn w(&self, k: usize) -> f64 {
        self.w[k]
    }

    /// w(k+1) − w(k): the value of gaining one more shared partner / degree.
    #[inline]
    fn step(&self, k: usize) -> f64 {
        self.w[k + 1] - self.w[k]
    }
}

/// A statistic bound to a network's attributes, ready for evaluation.
#[derive(Debug, Clone)]
enum PreparedTerm {
    Edges,
    Mutual,
    Kstar(u32),
    Triangle,
    Gwesp(GwWeights),
    Gwdsp(GwWeights),
    Gwdegree(GwWeights),
    /// Any dyad-independent term: the change statistic for (i, j) is a fixed
    /// matrix entry regardless of the rest of the graph.
    Dyadic(DMatrix<f64>),
}

/// The change-statistic design matrix: one row per dyad in canonical order.
#[derive(Debug, Clone)]
pub struct ChangeStatMatrix {
    pub matrix: DMatrix<f64>,
    pub names: Vec<String>,
    pub dyads: Vec<(usize, usize)>,
}

/// A [`ModelSpec`] validated against and bound to one network's node
/// attributes and dyadic covariates. The tie pattern itself is passed to the
/// evaluation methods, so samplers can reuse one binding across graphs over
/// the same node set.
#[derive(Debug, Clone)]
pub struct BoundModel {
    n: usize,
    directed: bool,
    names: Vec<String>,
    edges_index: usize,
    terms: Vec<PreparedTerm>,
}

impl BoundModel {
    pub fn bind(spec: &ModelSpec, net: &Network) -> Result<Self> {
        let n = net.n();
        let directed = net.directed();
        let names = spec.names();

        for (a, name) in names.iter().enumerate() {
            if names[a + 1..].contains(name) {
                return Err(Error::InvalidModel(format!(
                    "duplicate statistic name {name:?}"
                )));
            }
        }
        let edges_index = match spec
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, StatisticSpec::Edges))
            .map(|(i, _)| i)
            .collect::<Vec<_>>()[..]
        {
            [i] => i,
            [] => {
                return Err(Error::InvalidModel(
                    "model must contain an edges term".into(),
                ))
            }
            _ => {
                return Err(Error::InvalidModel(
                    "model must contain exactly one edges term".into(),
                ))
            }
        };

        let mut terms = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            terms.push(prepare_term(t, net)?);
        }

        Ok(BoundModel {
            n,
            directed,
            names,
            edges_index,
            terms,
        })
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges_index(&self) -> usize {
        self.edges_index
    }

    /// s(Y, X) for the given tie pattern.
    pub fn sufficient_stats(&self, adj: &Adjacency) -> DVector<f64> {
        debug_assert_eq!(adj.n(), self.n);
        let mut out = DVector::zeros(self.k());
        for (t, term) in self.terms.iter().enumerate() {
            out[t] = self.suff_one(term, adj);
        }
        out
    }

    fn suff_one(&self, term: &PreparedTerm, adj: &Adjacency) -> f64 {
        let n = self.n;
        match term {
            PreparedTerm::Edges => adj.edge_count() as f64,
            PreparedTerm::Mutual => {
                let mut count = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if adj.has(i, j) && adj.has(j, i) {
                            count += 1;
                        }
                    }
                }
                count as f64
            }
            PreparedTerm::Kstar(k) => (0..n).map(|i| binom(adj.out_degree(i), *k)).sum(),
            PreparedTerm::Triangle => {
                let mut twice_thrice = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if adj.has(i, j) {
                            twice_thrice += adj.common_out(i, j);
                        }
                    }
                }
                debug_assert_eq!(twice_thrice % 3, 0);
                (twice_thrice / 3) as f64
            }
            PreparedTerm::Gwesp(w) => {
                let mut total = 0.0;
                if self.directed {
                    for i in 0..n {
                        for j in 0..n {
                            if i != j && adj.has(i, j) {
                                total += w.w(adj.two_paths(i, j));
                            }
                        }
                    }
                } else {
                    for i in 0..n {
                        for j in (i + 1)..n {
                            if adj.has(i, j) {
                                total += w.w(adj.common_out(i, j));
                            }
                        }
                    }
                }
                total
            }
            PreparedTerm::Gwdsp(w) => {
                let mut total = 0.0;
                if self.directed {
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                total += w.w(adj.two_paths(i, j));
                            }
                        }
                    }
                } else {
                    for i in 0..n {
                        for j in (i + 1)..n {
                            total += w.w(adj.common_out(i, j));
                        }
                    }
                }
                total
            }
            PreparedTerm::Gwdegree(w) => (0..n).map(|i| w.w(adj.out_degree(i))).sum(),
            PreparedTerm::Dyadic(m) => {
                let mut total = 0.0;
                for i in 0..n {
                    let lo = if self.directed { 0 } else { i + 1 };
                    for j in lo..n {
                        if i != j && adj.has(i, j) {
                            total += m[(i, j)];
                        }
                    }
                }
                total
            }
        }
    }

    /// Change statistics for dyad (i, j): s(Y with tie) − s(Y without tie),
    /// independent of the tie's current state. Written into `out`.
    pub fn change_stats_into(&self, adj: &Adjacency, i: usize, j: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.k());
        let cur = adj.has(i, j) as usize;
        for (t, term) in self.terms.iter().enumerate() {
            out[t] = self.change_one(term, adj, i, j, cur);
        }
    }

    /// Convenience allocating form of [`BoundModel::change_stats_into`].
    pub fn change_stats(&self, adj: &Adjacency, i: usize, j: usize) -> Result<DVector<f64>> {
        if i == j {
            return Err(Error::SelfDyad(i));
        }
        let mut out = DVector::zeros(self.k());
        self.change_stats_into(adj, i, j, out.as_mut_slice());
        Ok(out)
    }

    fn change_one(&self, term: &PreparedTerm, adj: &Adjacency, i: usize, j: usize, cur: usize) -> f64 {
        match term {
            PreparedTerm::Edges => 1.0,
            PreparedTerm::Mutual => adj.has(j, i) as usize as f64,
            PreparedTerm::Kstar(k) => {
                binom(adj.out_degree(i) - cur, k - 1) + binom(adj.out_degree(j) - cur, k - 1)
            }
            PreparedTerm::Triangle => adj.common_out(i, j) as f64,
            PreparedTerm::Gwesp(w) => {
                if self.directed {
                    // Own contribution of edge i→j, plus one more shared
                    // partner for each tie i→v completed by a path i→j→v and
                    // each tie u→j completed by a path u→i→j.
                    let mut delta = w.w(adj.two_paths(i, j));
                    for v in Adjacency::intersect_indices(adj.out_row(i), adj.out_row(j)) {
                        delta += w.step(adj.two_paths(i, v) - cur);
                    }
                    for u in Adjacency::intersect_indices(adj.in_row(i), adj.in_row(j)) {
                        delta += w.step(adj.two_paths(u, j) - cur);
                    }
                    delta
                } else {
                    // Own contribution, plus edges (i,u) and (j,u) for every
                    // common neighbour u each gain a shared partner.
                    let mut delta = w.w(adj.common_out(i, j));
                    for u in Adjacency::intersect_indices(adj.out_row(i), adj.out_row(j)) {
                        delta += w.step(adj.common_out(i, u) - cur);
                        delta += w.step(adj.common_out(j, u) - cur);
                    }
                    delta
                }
            }
            PreparedTerm::Gwdsp(w) => {
                if self.directed {
                    // The tie i→j creates a two-path i→j→v for each j→v and
                    // u→i→j for each u→i.
                    let mut delta = 0.0;
                    for v in Adjacency::row_indices(adj.out_row(j)) {
                        if v != i {
                            delta += w.step(adj.two_paths(i, v) - cur);
                        }
                    }
                    for u in Adjacency::row_indices(adj.in_row(i)) {
                        if u != j {
                            delta += w.step(adj.two_paths(u, j) - cur);
                        }
                    }
                    delta
                } else {
                    // Pairs {u, j} for u ∈ N(i)\{j} and {i, v} for v ∈ N(j)\{i}
                    // each gain one shared partner.
                    let mut delta = 0.0;
                    for u in Adjacency::row_indices(adj.out_row(i)) {
                        if u != j {
                            delta += w.step(adj.common_out(u, j) - cur);
                        }
                    }
                    for v in Adjacency::row_indices(adj.out_row(j)) {
                        if v != i {
                            delta += w.step(adj.common_out(i, v) - cur);
                        }
                    }
                    delta
                }
            }
            PreparedTerm::Gwdegree(w) => {
                w.step(adj.out_degree(i) - cur) + w.step(adj.out_degree(j) - cur)
            }
            PreparedTerm::Dyadic(m) => m[(i, j)],
        }
    }

    /// The full design matrix: change statistics for every dyad in canonical
    /// order, evaluated on the given tie pattern.
    pub fn change_stat_matrix(&self, adj: &Adjacency) -> ChangeStatMatrix {
        let dyads = crate::net::canonical_dyads(self.n, self.directed);
        let mut matrix = DMatrix::zeros(dyads.len(), self.k());
        let mut row = vec![0.0; self.k()];
        for (d, &(i, j)) in dyads.iter().enumerate() {
            self.change_stats_into(adj, i, j, &mut row);
            for (t, v) in row.iter().enumerate() {
                matrix[(d, t)] = *v;
            }
        }
        ChangeStatMatrix {
            matrix,
            names: self.names.clone(),
            dyads,
        }
    }
}

/// C(n, k) as a float; zero when k > n.
fn binom(n: usize, k: u32) -> f64 {
    let k = k as usize;
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (k - i) as f64;
    }
    acc
}

fn numeric_column<'a>(net: &'a Network, statistic: &str, attr: &str) -> Result<&'a [f64]> {
    match net.attributes().column(attr) {
        Some(AttributeColumn::Numeric(v)) => Ok(v),
        Some(_) => Err(Error::InvalidModel(format!(
            "{statistic}: attribute {attr:?} is categorical, expected numeric"
        ))),
        None => Err(Error::MissingReference {
            statistic: statistic.to_string(),
            name: attr.to_string(),
        }),
    }
}

fn categorical_column<'a>(
    net: &'a Network,
    statistic: &str,
    attr: &str,
) -> Result<(&'a [usize], &'a [String])> {
    match net.attributes().column(attr) {
        Some(AttributeColumn::Categorical { values, levels, .. }) => Ok((values, levels)),
        Some(_) => Err(Error::InvalidModel(format!(
            "{statistic}: attribute {attr:?} is numeric, expected categorical"
        ))),
        None => Err(Error::MissingReference {
            statistic: statistic.to_string(),
            name: attr.to_string(),
        }),
    }
}

fn level_index(statistic: &str, levels: &[String], level: &str) -> Result<usize> {
    levels
        .iter()
        .position(|l| l == level)
        .ok_or_else(|| Error::InvalidModel(format!("{statistic}: level {level:?} not observed")))
}

fn require_directed(spec: &StatisticSpec, directed: bool) -> Result<()> {
    if !directed {
        return Err(Error::InvalidModel(format!(
            "{} requires a directed network",
            spec.name()
        )));
    }
    Ok(())
}

fn require_undirected(spec: &StatisticSpec, directed: bool) -> Result<()> {
    if directed {
        return Err(Error::InvalidModel(format!(
            "{} requires an undirected network",
            spec.name()
        )));
    }
    Ok(())
}

fn check_decay(spec: &StatisticSpec, decay: f64) -> Result<()> {
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "{}: decay must be a positive real, got {decay}",
            spec.name()
        )));
    }
    Ok(())
}

fn prepare_term(spec: &StatisticSpec, net: &Network) -> Result<PreparedTerm> {
    let mut term = prepare_term_inner(spec, net)?;
    // Undirected dyads are unordered: force m[(j,i)] = m[(i,j)] so change
    // statistics are invariant to how the caller orders the pair. The upper
    // triangle is canonical.
    if !net.directed() {
        if let PreparedTerm::Dyadic(m) = &mut term {
            for i in 0..m.nrows() {
                for j in (i + 1)..m.ncols() {
                    m[(j, i)] = m[(i, j)];
                }
            }
        }
    }
    Ok(term)
}

fn prepare_term_inner(spec: &StatisticSpec, net: &Network) -> Result<PreparedTerm> {
    let n = net.n();
    let directed = net.directed();
    let dyadic = |f: &dyn Fn(usize, usize) -> f64| {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[(i, j)] = f(i, j);
                }
            }
        }
        PreparedTerm::Dyadic(m)
    };

    Ok(match spec {
        StatisticSpec::Edges => PreparedTerm::Edges,
        StatisticSpec::Mutual => {
            require_directed(spec, directed)?;
            PreparedTerm::Mutual
        }
        StatisticSpec::Kstar { k } => {
            require_undirected(spec, directed)?;
            if *k < 1 {
                return Err(Error::InvalidModel("kstar: k must be at least 1".into()));
            }
            PreparedTerm::Kstar(*k)
        }
        StatisticSpec::Triangle => {
            require_undirected(spec, directed)?;
            PreparedTerm::Triangle
        }
        StatisticSpec::Gwesp { decay } => {
            check_decay(spec, *decay)?;
            PreparedTerm::Gwesp(GwWeights::new(*decay, n))
        }
        StatisticSpec::Gwdsp { decay } => {
            check_decay(spec, *decay)?;
            PreparedTerm::Gwdsp(GwWeights::new(*decay, n))
        }
        StatisticSpec::Gwdegree { decay } => {
            require_undirected(spec, directed)?;
            check_decay(spec, *decay)?;
            PreparedTerm::Gwdegree(GwWeights::new(*decay, n))
        }
        StatisticSpec::Nodecov { attr } => {
            let x = numeric_column(net, "nodecov", attr)?;
            dyadic(&|i, j| x[i] + x[j])
        }
        StatisticSpec::Nodefactor { attr, level } => {
            let (values, levels) = categorical_column(net, "nodefactor", attr)?;
            let l = level_index("nodefactor", levels, level)?;
            dyadic(&|i, j| (values[i] == l) as usize as f64 + (values[j] == l) as usize as f64)
        }
        StatisticSpec::Nodeifactor { attr, level } => {
            require_directed(spec, directed)?;
            let (values, levels) = categorical_column(net, "nodeifactor", attr)?;
            let l = level_index("nodeifactor", levels, level)?;
            dyadic(&|_i, j| (values[j] == l) as usize as f64)
        }
        StatisticSpec::Nodeofactor { attr, level } => {
            require_directed(spec, directed)?;
            let (values, levels) = categorical_column(net, "nodeofactor", attr)?;
            let l = level_index("nodeofactor", levels, level)?;
            dyadic(&|i, _j| (values[i] == l) as usize as f64)
        }
        StatisticSpec::Nodematch { attr } => {
            let (values, _) = categorical_column(net, "nodematch", attr)?;
            dyadic(&|i, j| (values[i] == values[j]) as usize as f64)
        }
        StatisticSpec::Nodemix { attr, levels } => {
            let (values, lvl) = categorical_column(net, "nodemix", attr)?;
            let a = level_index("nodemix", lvl, &levels.0)?;
            let b = level_index("nodemix", lvl, &levels.1)?;
            if directed {
                dyadic(&|i, j| (values[i] == a && values[j] == b) as usize as f64)
            } else {
                dyadic(&|i, j| {
                    ((values[i] == a && values[j] == b) || (values[i] == b && values[j] == a))
                        as usize as f64
                })
            }
        }
        StatisticSpec::Absdiff { attr } => {
            let x = numeric_column(net, "absdiff", attr)?;
            dyadic(&|i, j| (x[i] - x[j]).abs())
        }
        StatisticSpec::Edgecov { name, standardized } => {
            let cov = net.covariate(name).ok_or_else(|| Error::MissingReference {
                statistic: "edgecov".to_string(),
                name: name.clone(),
            })?;
            let mut m = cov.matrix().clone();
            if *standardized {
                standardize_off_diagonal(name, &mut m)?;
            }
            for i in 0..n {
                m[(i, i)] = 0.0;
            }
            PreparedTerm::Dyadic(m)
        }
    })
}

/// z-score the off-diagonal entries in place (mean 0, sample sd 1, both
/// triangles pooled).
fn standardize_off_diagonal(name: &str, m: &mut DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    let count = (n * (n - 1)) as f64;
    let mut mean = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                mean += m[(i, j)];
            }
        }
    }
    mean /= count;
    let mut ss = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                ss += (m[(i, j)] - mean).powi(2);
            }
        }
    }
    let sd = (ss / (count - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::InvalidModel(format!(
            "edgecov {name:?}: covariate is constant, cannot standardize"
        )));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = (m[(i, j)] - mean) / sd;
            }
        }
    }
    Ok(())
}

/// s(Y, X) for a model on a network.
pub fn sufficient_stats(net: &Network, model: &ModelSpec) -> Result<DVector<f64>> {
    Ok(BoundModel::bind(model, net)?.sufficient_stats(net.adjacency()))
}

/// Change statistics for one dyad: s(Y with tie) − s(Y without tie).
pub fn change_stats_dyad(
    net: &Network,
    model: &ModelSpec,
    i: usize,
    j: usize,
) -> Result<DVector<f64>> {
    BoundModel::bind(model, net)?.change_stats(net.adjacency(), i, j)
}

/// The stacked change-statistic matrix over all dyads in canonical order.
pub fn change_stat_matrix(net: &Network, model: &ModelSpec) -> Result<ChangeStatMatrix> {
    Ok(BoundModel::bind(model, net)?.change_stat_matrix(net.adjacency()))
}
