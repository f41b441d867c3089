//! Network data: adjacency storage, node attributes, dyadic covariates,
//! and the CSV loaders for each.
//!
//! All types here are immutable after construction and safe to share across
//! threads. Node identity is positional after load; labels are kept for
//! reporting only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Bit-matrix adjacency with degree caches.
///
/// Row `i` holds the out-neighbours of `i` as a bitset. For undirected
/// networks the matrix is kept symmetric, so row `i` is simply the
/// neighbourhood of `i`. A separate in-neighbour matrix is maintained for
/// directed networks so that two-path counts are a single masked popcount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    directed: bool,
    words: usize,
    out_rows: Vec<u64>,
    in_rows: Vec<u64>,
    out_deg: Vec<u32>,
    in_deg: Vec<u32>,
    edge_count: usize,
}

impl Adjacency {
    pub fn new(n: usize, directed: bool) -> Self {
        let words = n.div_ceil(64);
        Adjacency {
            n,
            directed,
            words,
            out_rows: vec![0; n * words],
            in_rows: vec![0; n * words],
            out_deg: vec![0; n],
            in_deg: vec![0; n],
            edge_count: 0,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn has(&self, i: usize, j: usize) -> bool {
        self.out_rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Number of ties. Undirected ties are counted once.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn out_degree(&self, i: usize) -> usize {
        self.out_deg[i] as usize
    }

    #[inline]
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_deg[i] as usize
    }

    #[inline]
    pub fn out_row(&self, i: usize) -> &[u64] {
        &self.out_rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn in_row(&self, i: usize) -> &[u64] {
        &self.in_rows[i * self.words..(i + 1) * self.words]
    }

    /// Set the state of the (i, j) tie. For undirected graphs both
    /// directions are kept in sync. Returns the previous state.
    pub fn set(&mut self, i: usize, j: usize, present: bool) -> bool {
        debug_assert_ne!(i, j);
        let was = self.has(i, j);
        if was == present {
            return was;
        }
        let w = self.words;
        let (jw, jb) = (j / 64, 1u64 << (j % 64));
        let (iw, ib) = (i / 64, 1u64 << (i % 64));
        if present {
            self.out_rows[i * w + jw] |= jb;
            self.in_rows[j * w + iw] |= ib;
            self.out_deg[i] += 1;
            self.in_deg[j] += 1;
            self.edge_count += 1;
            if !self.directed {
                self.out_rows[j * w + iw] |= ib;
                self.in_rows[i * w + jw] |= jb;
                self.out_deg[j] += 1;
                self.in_deg[i] += 1;
            }
        } else {
            self.out_rows[i * w + jw] &= !jb;
            self.in_rows[j * w + iw] &= !ib;
            self.out_deg[i] -= 1;
            self.in_deg[j] -= 1;
            self.edge_count -= 1;
            if !self.directed {
                self.out_rows[j * w + iw] &= !ib;
                self.in_rows[i * w + jw] &= !jb;
                self.out_deg[j] -= 1;
                self.in_deg[i] -= 1;
            }
        }
        was
    }

    /// popcount of (out_row(a) AND out_row(b)).
    #[inline]
    pub fn common_out(&self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.out_row(a), self.out_row(b));
        ra.iter()
            .zip(rb)
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    /// popcount of (out_row(a) AND in_row(b)): directed two-paths a -> k -> b.
    #[inline]
    pub fn two_paths(&self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.out_row(a), self.in_row(b));
        ra.iter()
            .zip(rb)
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    /// popcount of (in_row(a) AND in_row(b)).
    #[inline]
    pub fn common_in(&self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.in_row(a), self.in_row(b));
        ra.iter()
            .zip(rb)
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    /// Indices set in the AND of two bit rows.
    pub fn intersect_indices<'a>(row_a: &'a [u64], row_b: &'a [u64]) -> IntersectIter<'a> {
        IntersectIter {
            a: row_a,
            b: row_b,
            word: 0,
            bits: row_a[0] & row_b[0],
        }
    }

    /// Indices set in a single bit row.
    pub fn row_indices(row: &[u64]) -> RowIter<'_> {
        RowIter {
            row,
            word: 0,
            bits: row[0],
        }
    }

    pub fn is_complete(&self) -> bool {
        let full = if self.directed {
            self.n * (self.n - 1)
        } else {
            self.n * (self.n - 1) / 2
        };
        self.edge_count == full
    }

    pub fn is_empty_graph(&self) -> bool {
        self.edge_count == 0
    }
}

/// Iterator over set bits in the AND of two rows.
pub struct IntersectIter<'a> {
    a: &'a [u64],
    b: &'a [u64],
    word: usize,
    bits: u64,
}

impl Iterator for IntersectIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(self.word * 64 + tz);
            }
            self.word += 1;
            if self.word >= self.a.len() {
                return None;
            }
            self.bits = self.a[self.word] & self.b[self.word];
        }
    }
}

/// Iterator over set bits in one row.
pub struct RowIter<'a> {
    row: &'a [u64],
    word: usize,
    bits: u64,
}

impl Iterator for RowIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(self.word * 64 + tz);
            }
            self.word += 1;
            if self.word >= self.row.len() {
                return None;
            }
            self.bits = self.row[self.word];
        }
    }
}

/// A column of node attributes.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeColumn {
    Numeric(Vec<f64>),
    Categorical {
        /// Index into `levels` for each node.
        values: Vec<usize>,
        /// Sorted distinct level labels.
        levels: Vec<String>,
        /// Index of the reference level.
        reference: usize,
    },
}

impl AttributeColumn {
    pub fn len(&self) -> usize {
        match self {
            AttributeColumn::Numeric(v) => v.len(),
            AttributeColumn::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named per-node columns, numeric or categorical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeTable {
    n: usize,
    columns: BTreeMap<String, AttributeColumn>,
}

impl AttributeTable {
    pub fn new(n: usize) -> Self {
        AttributeTable {
            n,
            columns: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert_numeric(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::RowCountMismatch {
                expected: self.n,
                got: values.len(),
            });
        }
        self.columns
            .insert(name.to_string(), AttributeColumn::Numeric(values));
        Ok(())
    }

    /// Insert a categorical column from raw labels. The reference level is the
    /// first level in sorted order unless `reference` overrides it.
    pub fn insert_categorical(
        &mut self,
        name: &str,
        labels: Vec<String>,
        reference: Option<&str>,
    ) -> Result<()> {
        if labels.len() != self.n {
            return Err(Error::RowCountMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        let mut levels: Vec<String> = labels.clone();
        levels.sort();
        levels.dedup();
        if levels.is_empty() {
            return Err(Error::Invalid(format!("column {name:?} has no levels")));
        }
        let reference = match reference {
            None => 0,
            Some(r) => levels
                .iter()
                .position(|l| l == r)
                .ok_or_else(|| Error::Invalid(format!("reference level {r:?} not in column {name:?}")))?,
        };
        let values = labels
            .iter()
            .map(|l| levels.iter().position(|x| x == l).unwrap())
            .collect();
        self.columns.insert(
            name.to_string(),
            AttributeColumn::Categorical {
                values,
                levels,
                reference,
            },
        );
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&AttributeColumn> {
        self.columns.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }
}

/// An n-by-n real-valued dyadic covariate. The diagonal carries no meaning
/// and is stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadCovariate {
    name: String,
    values: DMatrix<f64>,
}

impl DyadCovariate {
    pub fn new(name: &str, mut values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::NonSquareCovariate {
                name: name.to_string(),
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                if i == j {
                    values[(i, i)] = 0.0;
                } else if !values[(i, j)].is_finite() {
                    return Err(Error::NonFiniteCovariate {
                        name: name.to_string(),
                        row: i,
                        col: j,
                    });
                }
            }
        }
        Ok(DyadCovariate {
            name: name.to_string(),
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// An observed network: adjacency plus attached node attributes and dyadic
/// covariates. Immutable once built.
#[derive(Debug, Clone)]
pub struct Network {
    adj: Adjacency,
    labels: Vec<String>,
    attrs: AttributeTable,
    covariates: BTreeMap<String, DyadCovariate>,
}

impl Network {
    /// Build a network from an edge list over nodes `0..n`.
    ///
    /// Undirected edges are symmetrized; duplicate edges collapse. Self ties
    /// are rejected here (the loaders drop them with a warning instead).
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        let mut adj = Adjacency::new(n, directed);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::UnknownNode {
                    label: format!("{}", i.max(j) + 1),
                    n,
                });
            }
            if i == j {
                return Err(Error::SelfDyad(i));
            }
            adj.set(i, j, true);
        }
        Ok(Network {
            labels: (1..=n).map(|i| i.to_string()).collect(),
            attrs: AttributeTable::new(n),
            covariates: BTreeMap::new(),
            adj,
        })
    }

    /// A network with `n` nodes and no ties.
    pub fn empty(n: usize, directed: bool) -> Result<Self> {
        Self::from_edges(n, directed, &[])
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    pub fn directed(&self) -> bool {
        self.adj.directed()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.has(i, j)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    /// Tie density: edges over dyads.
    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / self.dyad_count() as f64
    }

    /// Total number of possible dyads: n(n-1) directed, n(n-1)/2 undirected.
    pub fn dyad_count(&self) -> usize {
        let n = self.n();
        if self.directed() {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        }
    }

    /// Dyads in canonical lexicographic order: (i, j) with i < j for
    /// undirected networks, all ordered pairs i != j for directed ones.
    pub fn dyads(&self) -> Vec<(usize, usize)> {
        canonical_dyads(self.n(), self.directed())
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.dyads()
            .into_iter()
            .filter(|&(i, j)| self.adj.has(i, j))
            .collect()
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn attributes(&self) -> &AttributeTable {
        &self.attrs
    }

    pub fn covariate(&self, name: &str) -> Option<&DyadCovariate> {
        self.covariates.get(name)
    }

    pub fn covariate_names(&self) -> impl Iterator<Item = &str> {
        self.covariates.keys().map(String::as_str)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::RowCountMismatch {
                expected: self.n(),
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_attributes(mut self, attrs: AttributeTable) -> Result<Self> {
        if attrs.n() != self.n() {
            return Err(Error::RowCountMismatch {
                expected: self.n(),
                got: attrs.n(),
            });
        }
        self.attrs = attrs;
        Ok(self)
    }

    pub fn with_covariate(mut self, cov: DyadCovariate) -> Result<Self> {
        if cov.dim() != self.n() {
            return Err(Error::CovariateDimensionMismatch {
                expected: self.n(),
                got: cov.dim(),
            });
        }
        self.covariates.insert(cov.name().to_string(), cov);
        Ok(self)
    }

    /// Replace the adjacency, keeping labels, attributes, and covariates.
    /// Used by the simulator to emit draws that carry the template's data.
    pub(crate) fn with_adjacency(&self, adj: Adjacency) -> Network {
        debug_assert_eq!(adj.n(), self.n());
        Network {
            adj,
            labels: self.labels.clone(),
            attrs: self.attrs.clone(),
            covariates: self.covariates.clone(),
        }
    }

    /// Render the tie list as `from,to` CSV (1-based indices, canonical order).
    pub fn to_edge_list_csv(&self) -> String {
        let mut out = String::from("from,to\n");
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{},{}", i + 1, j + 1);
        }
        out
    }
}

/// Canonical dyad order shared by the change-statistic matrix and the MPLE
/// design: lexicographic (i, j), i < j undirected, i != j directed.
pub fn canonical_dyads(n: usize, directed: bool) -> Vec<(usize, usize)> {
    let mut dyads = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if directed || i < j {
                dyads.push((i, j));
            }
        }
    }
    dyads
}

/// Input format for [`load_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetFormat {
    /// CSV with a `from,to` header; rows are 1-based indices or node labels.
    EdgeList,
    /// Headerless square CSV of 0/1 entries.
    Adjacency,
}

/// A loaded network together with load diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedNetwork {
    pub network: Network,
    /// Self ties found in the input and dropped.
    pub self_ties_dropped: usize,
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load a network from disk.
///
/// Edge lists may name nodes by 1-based index or by label; labels are mapped
/// to positions in sorted label order. `declared_n` forces the node count
/// (allowing isolates beyond the largest index); without it the count is
/// inferred. Undirected edge lists are symmetrized by logical OR, while an
/// asymmetric entry in an undirected adjacency file is an error. Self ties
/// are dropped and counted.
pub fn load_network(
    path: &Path,
    directed: bool,
    format: NetFormat,
    declared_n: Option<usize>,
) -> Result<LoadedNetwork> {
    let text = read_to_string(path)?;
    match format {
        NetFormat::EdgeList => load_edge_list(path, &text, directed, declared_n),
        NetFormat::Adjacency => load_adjacency(path, &text, directed, declared_n),
    }
}

fn load_edge_list(
    path: &Path,
    text: &str,
    directed: bool,
    declared_n: Option<usize>,
) -> Result<LoadedNetwork> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs: Vec<(String, String)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(Error::Csv {
                path: path.display().to_string(),
                message: format!("edge row needs two fields, got {}", record.len()),
            });
        }
        pairs.push((record[0].to_string(), record[1].to_string()));
    }

    let all_numeric = pairs
        .iter()
        .all(|(a, b)| a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok());

    let (n, resolve): (usize, BTreeMap<String, usize>) = if all_numeric {
        let max_idx = pairs
            .iter()
            .flat_map(|(a, b)| [a.parse::<usize>().unwrap(), b.parse::<usize>().unwrap()])
            .max()
            .unwrap_or(0);
        let n = match declared_n {
            Some(n) => {
                if max_idx > n {
                    return Err(Error::UnknownNode {
                        label: max_idx.to_string(),
                        n,
                    });
                }
                n
            }
            None => max_idx,
        };
        (n, BTreeMap::new())
    } else {
        let mut labels: Vec<String> = pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        labels.sort();
        labels.dedup();
        if let Some(n) = declared_n {
            if labels.len() != n {
                return Err(Error::UnknownNode {
                    label: labels.last().cloned().unwrap_or_default(),
                    n,
                });
            }
        }
        let map = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        (labels.len(), map)
    };

    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }

    let mut adj = Adjacency::new(n, directed);
    let mut self_ties = 0;
    for (a, b) in &pairs {
        let (i, j) = if all_numeric {
            let i = a.parse::<usize>().unwrap();
            let j = b.parse::<usize>().unwrap();
            if i == 0 || j == 0 {
                return Err(Error::UnknownNode {
                    label: "0".to_string(),
                    n,
                });
            }
            (i - 1, j - 1)
        } else {
            (resolve[a.as_str()], resolve[b.as_str()])
        };
        if i == j {
            self_ties += 1;
            continue;
        }
        adj.set(i, j, true);
    }

    let labels: Vec<String> = if all_numeric {
        (1..=n).map(|i| i.to_string()).collect()
    } else {
        resolve.keys().cloned().collect()
    };

    let network = Network {
        adj,
        labels,
        attrs: AttributeTable::new(n),
        covariates: BTreeMap::new(),
    };
    Ok(LoadedNetwork {
        network,
        self_ties_dropped: self_ties,
    })
}

fn load_adjacency(
    _path: &Path,
    text: &str,
    directed: bool,
    declared_n: Option<usize>,
) -> Result<LoadedNetwork> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (r, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (c, tok) in line.split(',').enumerate() {
            match tok.trim() {
                "0" => row.push(0),
                "1" => row.push(1),
                other => {
                    return Err(Error::NonBinaryEntry {
                        row: r,
                        col: c,
                        value: other.to_string(),
                    })
                }
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NonSquareAdjacency {
                rows: n,
                row: r,
                cols: row.len(),
            });
        }
    }
    if let Some(dn) = declared_n {
        if dn != n {
            return Err(Error::NonSquareAdjacency {
                rows: dn,
                row: 0,
                cols: n,
            });
        }
    }
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }

    let mut self_ties = 0;
    let mut adj = Adjacency::new(n, directed);
    for i in 0..n {
        if rows[i][i] == 1 {
            self_ties += 1;
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if !directed && rows[i][j] != rows[j][i] {
                return Err(Error::AsymmetricAdjacency { i, j });
            }
            if rows[i][j] == 1 && !adj.has(i, j) {
                adj.set(i, j, true);
            }
        }
    }

    let network = Network {
        adj,
        labels: (1..=n).map(|i| i.to_string()).collect(),
        attrs: AttributeTable::new(n),
        covariates: BTreeMap::new(),
    };
    Ok(LoadedNetwork {
        network,
        self_ties_dropped: self_ties,
    })
}

/// Column type requested in an attribute schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical { reference: Option<String> },
}

/// Load node attributes from a CSV with a header row. Only columns named in
/// `schema` are read; rows must match the node order of the network.
pub fn load_node_attributes(
    path: &Path,
    n: usize,
    schema: &[(String, ColumnKind)],
) -> Result<AttributeTable> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        for (c, field) in record.iter().enumerate() {
            if c < raw.len() {
                raw[c].push(field.to_string());
            }
        }
    }

    let rows = raw.first().map(Vec::len).unwrap_or(0);
    if rows != n {
        return Err(Error::RowCountMismatch {
            expected: n,
            got: rows,
        });
    }

    let mut table = AttributeTable::new(n);
    for (name, kind) in schema {
        let col_idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        match kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(n);
                for (row, token) in raw[col_idx].iter().enumerate() {
                    let v: f64 = token.parse().map_err(|_| Error::NonNumericToken {
                        column: name.clone(),
                        row,
                        token: token.clone(),
                    })?;
                    values.push(v);
                }
                table.insert_numeric(name, values)?;
            }
            ColumnKind::Categorical { reference } => {
                table.insert_categorical(name, raw[col_idx].clone(), reference.as_deref())?;
            }
        }
    }
    Ok(table)
}

/// Load a headerless square numeric CSV as a dyadic covariate.
pub fn load_dyad_covariate(path: &Path, name: &str) -> Result<DyadCovariate> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|_| Error::Csv {
                path: path.display().to_string(),
                message: format!("row {r}: non-numeric token {tok:?}"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    let nr = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != nr {
            return Err(Error::NonSquareCovariate {
                name: name.to_string(),
                rows: nr,
                cols: row.len(),
            });
        }
        let _ = r;
    }
    let values = DMatrix::from_fn(nr, nr, |i, j| rows[i][j]);
    DyadCovariate::new(name, values)
}
