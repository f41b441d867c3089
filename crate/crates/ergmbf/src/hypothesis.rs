//! Hypothesis strings and their constraint-matrix form.
//!
//! A hypothesis is text like `"a > b > 0"` or `"a = b, c > 0"` over named
//! coefficients. Hypotheses are separated by `;`, constraints within one
//! hypothesis by `&` or `,`, and each constraint is a chain of coefficient
//! names and the literal `0` joined by `=`, `<`, `>`. A chain expands
//! pairwise: `a > b > 0` means `a − b > 0` and `b > 0`.
//!
//! Parsing produces, per hypothesis, an equality matrix R_E and an order
//! matrix R_O with rows that are signed unit vectors or signed differences,
//! oriented so the hypothesis region is {β : R_E β = 0, R_O β > 0}. A
//! complement hypothesis covering "none of the above" is tracked alongside.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One constrained hypothesis: {β : R_E β = 0, R_O β > 0}.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedHypothesis {
    pub label: String,
    /// The text this hypothesis was parsed from.
    pub source: String,
    r_e: DMatrix<f64>,
    r_o: DMatrix<f64>,
}

impl ConstrainedHypothesis {
    /// Equality constraint matrix, q_E × K (possibly zero rows).
    pub fn r_e(&self) -> &DMatrix<f64> {
        &self.r_e
    }

    /// Order constraint matrix, q_O × K, oriented so R_O β > 0.
    pub fn r_o(&self) -> &DMatrix<f64> {
        &self.r_o
    }

    pub fn q_e(&self) -> usize {
        self.r_e.nrows()
    }

    pub fn q_o(&self) -> usize {
        self.r_o.nrows()
    }

    pub fn k(&self) -> usize {
        self.r_e.ncols()
    }

    pub fn has_equalities(&self) -> bool {
        self.q_e() > 0
    }

    pub fn has_orders(&self) -> bool {
        self.q_o() > 0
    }

    /// Whether β lies in the hypothesis region. Equalities are checked to
    /// `eq_tol` since exact zeros are a measure-zero event for sampled β.
    pub fn satisfied_by(&self, beta: &DVector<f64>, eq_tol: f64) -> bool {
        for r in 0..self.q_e() {
            let v: f64 = (0..self.k()).map(|c| self.r_e[(r, c)] * beta[c]).sum();
            if v.abs() > eq_tol {
                return false;
            }
        }
        for r in 0..self.q_o() {
            let v: f64 = (0..self.k()).map(|c| self.r_o[(r, c)] * beta[c]).sum();
            if v <= 0.0 {
                return false;
            }
        }
        true
    }

    /// Whether β satisfies the order constraints alone (the full-measure part
    /// of the region; equality surfaces have measure zero).
    pub fn order_satisfied_by(&self, beta: &DVector<f64>) -> bool {
        for r in 0..self.q_o() {
            let v: f64 = (0..self.k()).map(|c| self.r_o[(r, c)] * beta[c]).sum();
            if v <= 0.0 {
                return false;
            }
        }
        true
    }

    /// Render back to constraint text (`a = b & b = 0 & c > 0` form).
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for r in 0..self.q_e() {
            parts.push(render_row(self.r_e.row(r).iter().copied(), names, "="));
        }
        for r in 0..self.q_o() {
            parts.push(render_row(self.r_o.row(r).iter().copied(), names, ">"));
        }
        parts.join(" & ")
    }
}

fn render_row(row: impl Iterator<Item = f64>, names: &[String], op: &str) -> String {
    let mut pos = None;
    let mut neg = None;
    for (c, v) in row.enumerate() {
        if v > 0.5 {
            pos = Some(c);
        } else if v < -0.5 {
            neg = Some(c);
        }
    }
    match (pos, neg) {
        (Some(p), Some(n)) => format!("{} {op} {}", names[p], names[n]),
        (Some(p), None) => format!("{} {op} 0", names[p]),
        // A pure negative unit row only arises for orders: −β > 0 ⇔ β < 0.
        (None, Some(n)) => format!("{} < 0", names[n]),
        (None, None) => unreachable!("constraint rows are never all zero"),
    }
}

/// An ordered collection of hypotheses plus complement bookkeeping.
#[derive(Debug, Clone)]
pub struct HypothesisSet {
    pub hypotheses: Vec<ConstrainedHypothesis>,
    /// Whether a complement ("none of the above") hypothesis is evaluated
    /// alongside. Parsing always turns this on; the evidence stage drops it
    /// when the named hypotheses already exhaust the coefficient space.
    pub include_complement: bool,
    prior_probs: Option<Vec<f64>>,
}

impl HypothesisSet {
    /// Number of named hypotheses (excluding the complement).
    pub fn t(&self) -> usize {
        self.hypotheses.len()
    }

    /// Explicit prior probabilities, if set; otherwise all entities (named
    /// hypotheses plus complement when present) share probability equally.
    pub fn prior_probs(&self) -> Option<&[f64]> {
        self.prior_probs.as_deref()
    }

    /// Override the prior probabilities. Must cover every entity (named
    /// hypotheses plus the complement when included), be positive, and sum
    /// to 1.
    pub fn set_prior_probs(&mut self, probs: Vec<f64>) -> Result<()> {
        let want = self.t() + self.include_complement as usize;
        let sum: f64 = probs.iter().sum();
        if probs.len() != want || probs.iter().any(|&p| p <= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriorProbs);
        }
        self.prior_probs = Some(probs);
        Ok(())
    }
}

/// A node in a constraint link: a coefficient or the literal zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Coef(usize),
    Zero,
}

/// Parse hypothesis text over the given coefficient names.
///
/// An optional `label:` prefix names a hypothesis; otherwise labels are
/// `H1`, `H2`, … in order. Constraints on the `edges` coefficient are
/// rejected (its flat prior makes it untestable), as are contradictions and
/// anything but the literal `0` as a constant.
pub fn parse_hypotheses(text: &str, coef_names: &[String]) -> Result<HypothesisSet> {
    if text.trim().is_empty() {
        return Err(Error::HypothesisParse("empty hypothesis text".into()));
    }
    let k = coef_names.len();
    let mut hypotheses = Vec::new();
    let mut labels_seen: Vec<String> = Vec::new();

    for (index, segment) in text.split(';').enumerate() {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        let (label, body) = match split_label(segment) {
            Some((l, b)) => (l.to_string(), b),
            None => (format!("H{}", index + 1), segment),
        };
        if label == "complement" {
            return Err(Error::HypothesisParse(
                "the label \"complement\" is reserved".into(),
            ));
        }
        if labels_seen.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        labels_seen.push(label.clone());

        let mut eq_links: Vec<(Node, Node)> = Vec::new();
        let mut ord_links: Vec<(Node, Node)> = Vec::new();
        for atom in body.split(['&', ',']) {
            let atom = atom.trim();
            if atom.is_empty() {
                return Err(Error::HypothesisParse(format!(
                    "empty constraint in {body:?}"
                )));
            }
            parse_chain(atom, coef_names, &mut eq_links, &mut ord_links)?;
        }
        if eq_links.is_empty() && ord_links.is_empty() {
            return Err(Error::HypothesisParse(format!(
                "hypothesis {label:?} has no constraints"
            )));
        }

        let (r_e, r_o) = build_matrices(&label, k, coef_names, &eq_links, &ord_links)?;
        hypotheses.push(ConstrainedHypothesis {
            label,
            source: body.to_string(),
            r_e,
            r_o,
        });
    }

    if hypotheses.is_empty() {
        return Err(Error::HypothesisParse("no hypotheses in text".into()));
    }

    Ok(HypothesisSet {
        hypotheses,
        include_complement: true,
        prior_probs: None,
    })
}

/// Split a leading `label:` prefix if present. The prefix must be a single
/// identifier-ish token (no operators), so `a : b` is not mistaken for one.
fn split_label(segment: &str) -> Option<(&str, &str)> {
    let (head, tail) = segment.split_once(':')?;
    let head = head.trim();
    if head.is_empty() || head.contains(['=', '<', '>', '&', ',', ' ']) {
        return None;
    }
    Some((head, tail.trim()))
}

/// Parse one chain (`a > b = c < 0`) into pairwise links.
fn parse_chain(
    atom: &str,
    coef_names: &[String],
    eq_links: &mut Vec<(Node, Node)>,
    ord_links: &mut Vec<(Node, Node)>,
) -> Result<()> {
    let mut terms: Vec<Node> = Vec::new();
    let mut ops: Vec<char> = Vec::new();
    let mut cursor = atom;
    loop {
        let op_pos = cursor.find(['=', '<', '>']);
        let (term, rest) = match op_pos {
            Some(p) => {
                let (t, r) = cursor.split_at(p);
                ops.push(r.chars().next().unwrap());
                (t, &r[1..])
            }
            None => (cursor, ""),
        };
        terms.push(resolve_term(term.trim(), coef_names)?);
        if op_pos.is_none() {
            break;
        }
        cursor = rest;
    }
    if terms.len() < 2 {
        return Err(Error::HypothesisParse(format!(
            "constraint {atom:?} needs an operator (=, <, or >)"
        )));
    }
    for (w, op) in ops.iter().enumerate() {
        let (a, b) = (terms[w], terms[w + 1]);
        match op {
            '=' => eq_links.push((a, b)),
            '>' => ord_links.push((a, b)),
            '<' => ord_links.push((b, a)),
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn resolve_term(term: &str, coef_names: &[String]) -> Result<Node> {
    if term == "0" {
        return Ok(Node::Zero);
    }
    if term.is_empty() {
        return Err(Error::HypothesisParse("dangling operator".into()));
    }
    if term.parse::<f64>().is_ok() {
        return Err(Error::HypothesisParse(format!(
            "only the literal 0 may appear as a constant, got {term:?}"
        )));
    }
    if term == "edges" {
        return Err(Error::EdgesConstraint);
    }
    match coef_names.iter().position(|n| n == term) {
        Some(i) => Ok(Node::Coef(i)),
        None => Err(Error::HypothesisParse(format!(
            "unknown coefficient {term:?}; available: {}",
            coef_names.join(", ")
        ))),
    }
}

/// Reduce links to canonical matrices and detect contradictions.
///
/// Equality links induce classes (union-find over coefficients and the zero
/// node). Each class yields a chain of independent difference rows over its
/// sorted members, plus a unit row for the last member when the class
/// contains zero. Order links are then checked against the classes: a link
/// inside one class, or a directed cycle among classes, is a contradiction.
/// This is exact for this grammar: regions are intersections of half-spaces
/// and hyperplanes generated by coordinate differences, which are infeasible
/// precisely when such a cycle exists.
fn build_matrices(
    label: &str,
    k: usize,
    coef_names: &[String],
    eq_links: &[(Node, Node)],
    ord_links: &[(Node, Node)],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    // Union-find over k coefficients + the zero node at index k.
    let mut parent: Vec<usize> = (0..=k).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let node_idx = |n: Node| match n {
        Node::Coef(i) => i,
        Node::Zero => k,
    };
    for &(a, b) in eq_links {
        let (ra, rb) = (find(&mut parent, node_idx(a)), find(&mut parent, node_idx(b)));
        if ra != rb {
            parent[ra] = rb;
        }
    }

    // Canonical equality rows per class.
    let mut class_members: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for i in 0..=k {
        let root = find(&mut parent, i);
        class_members[root].push(i);
    }
    let mut eq_rows: Vec<DVector<f64>> = Vec::new();
    for members in class_members.iter().filter(|m| m.len() > 1) {
        let coefs: Vec<usize> = members.iter().copied().filter(|&i| i < k).collect();
        let has_zero = members.contains(&k);
        for w in coefs.windows(2) {
            let mut row = DVector::zeros(k);
            row[w[0]] = 1.0;
            row[w[1]] = -1.0;
            eq_rows.push(row);
        }
        if has_zero {
            let mut row = DVector::zeros(k);
            row[*coefs.last().expect("class with zero has a coefficient")] = 1.0;
            eq_rows.push(row);
        }
    }

    // Contradiction detection on the class digraph.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in ord_links {
        let (ra, rb) = (find(&mut parent, node_idx(a)), find(&mut parent, node_idx(b)));
        if ra == rb {
            let name = |n: Node| match n {
                Node::Coef(i) => coef_names[i].clone(),
                Node::Zero => "0".to_string(),
            };
            return Err(Error::ContradictoryHypothesis {
                label: label.to_string(),
                detail: format!(
                    "{} > {} contradicts the equalities tying them together",
                    name(a),
                    name(b)
                ),
            });
        }
        edges.push((ra, rb));
    }
    if has_cycle(k + 1, &edges) {
        return Err(Error::ContradictoryHypothesis {
            label: label.to_string(),
            detail: "order constraints form a cycle".into(),
        });
    }

    // Order rows, deduplicated and sorted descending-lexicographically so a
    // chain and its reversed form produce the identical matrix.
    let mut ord_rows: Vec<DVector<f64>> = Vec::new();
    for &(a, b) in ord_links {
        let mut row = DVector::zeros(k);
        if let Node::Coef(i) = a {
            row[i] += 1.0;
        }
        if let Node::Coef(i) = b {
            row[i] -= 1.0;
        }
        if !ord_rows.contains(&row) {
            ord_rows.push(row);
        }
    }
    ord_rows.sort_by(|x, y| {
        for (a, b) in x.iter().zip(y.iter()) {
            if a != b {
                return b.partial_cmp(a).expect("constraint entries are finite");
            }
        }
        std::cmp::Ordering::Equal
    });

    let to_matrix = |rows: &[DVector<f64>]| {
        DMatrix::from_fn(rows.len(), k, |r, c| rows[r][c])
    };
    Ok((to_matrix(&eq_rows), to_matrix(&ord_rows)))
}

fn has_cycle(nodes: usize, edges: &[(usize, usize)]) -> bool {
    // Iterative DFS with colors over the adjacency list.
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut color = vec![0u8; nodes]; // 0 white, 1 gray, 2 black
    for start in 0..nodes {
        if color[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < adj[node].len() {
                let child = adj[node][*next];
                *next += 1;
                match color[child] {
                    0 => {
                        color[child] = 1;
                        stack.push((child, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_order_pair_row() {
        let cn = names(&["b1", "b2", "b3", "b4"]);
        let set = parse_hypotheses("b4 > b2", &cn).unwrap();
        let h = &set.hypotheses[0];
        assert_eq!(h.q_e(), 0);
        assert_eq!(h.q_o(), 1);
        assert_eq!(
            h.r_o().row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, -1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn three_step_chain() {
        let cn = names(&["edges", "supervision", "same_team", "same_affiliation"]);
        let set = parse_hypotheses("supervision > same_team > same_affiliation > 0", &cn).unwrap();
        let h = &set.hypotheses[0];
        assert_eq!(h.q_o(), 3);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|r| h.r_o().row(r).iter().copied().collect())
            .collect();
        assert_eq!(rows[0], vec![0.0, 1.0, -1.0, 0.0]);
        assert_eq!(rows[1], vec![0.0, 0.0, 1.0, -1.0]);
        assert_eq!(rows[2], vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn equality_chain_with_zero() {
        let cn = names(&["a", "b"]);
        let set = parse_hypotheses("a = b = 0; a = b", &cn).unwrap();
        assert_eq!(set.t(), 2);
        assert!(set.include_complement);

        let h1 = &set.hypotheses[0];
        assert_eq!(h1.q_e(), 2);
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|r| h1.r_e().row(r).iter().copied().collect())
            .collect();
        assert_eq!(rows[0], vec![1.0, -1.0], "a − b = 0");
        assert_eq!(rows[1], vec![0.0, 1.0], "b = 0");

        let h2 = &set.hypotheses[1];
        assert_eq!(h2.q_e(), 1);
        assert_eq!(h2.q_o(), 0);
    }

    #[test]
    fn chains_ignore_whitespace_and_reverse() {
        let cn = names(&["a", "b", "c"]);
        let tight = parse_hypotheses("a>b>c", &cn).unwrap();
        let spaced = parse_hypotheses("  a >  b\t> c ", &cn).unwrap();
        let reversed = parse_hypotheses("c < b < a", &cn).unwrap();
        assert_eq!(tight.hypotheses[0].r_o(), spaced.hypotheses[0].r_o());
        assert_eq!(tight.hypotheses[0].r_o(), reversed.hypotheses[0].r_o());
    }

    #[test]
    fn amp_and_comma_both_separate() {
        let cn = names(&["a", "b"]);
        let amp = parse_hypotheses("a > 0 & b > 0", &cn).unwrap();
        let comma = parse_hypotheses("a > 0, b > 0", &cn).unwrap();
        assert_eq!(amp.hypotheses[0].r_o(), comma.hypotheses[0].r_o());
    }

    #[test]
    fn mixed_chain_splits_by_operator() {
        let cn = names(&["a", "b", "c"]);
        let set = parse_hypotheses("a = b > c", &cn).unwrap();
        let h = &set.hypotheses[0];
        assert_eq!(h.q_e(), 1);
        assert_eq!(h.q_o(), 1);
        assert_eq!(
            h.r_o().row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, -1.0]
        );
    }

    #[test]
    fn negative_unit_constraint() {
        let cn = names(&["a"]);
        let set = parse_hypotheses("a < 0", &cn).unwrap();
        let h = &set.hypotheses[0];
        assert_eq!(
            h.r_o().row(0).iter().copied().collect::<Vec<_>>(),
            vec![-1.0]
        );
        assert!(h.satisfied_by(&DVector::from_vec(vec![-0.5]), 1e-9));
        assert!(!h.satisfied_by(&DVector::from_vec(vec![0.5]), 1e-9));
    }

    #[test]
    fn errors_unknown_edges_contradiction_duplicate() {
        let cn = names(&["edges", "a", "b"]);
        assert!(matches!(
            parse_hypotheses("zzz > 0", &cn),
            Err(Error::HypothesisParse(_))
        ));
        assert!(matches!(
            parse_hypotheses("edges > 0", &cn),
            Err(Error::EdgesConstraint)
        ));
        assert!(matches!(
            parse_hypotheses("a > b & b > a", &cn),
            Err(Error::ContradictoryHypothesis { .. })
        ));
        assert!(matches!(
            parse_hypotheses("a = b & a > b", &cn),
            Err(Error::ContradictoryHypothesis { .. })
        ));
        assert!(matches!(
            parse_hypotheses("a > 0 & a < 0", &cn),
            Err(Error::ContradictoryHypothesis { .. })
        ));
        assert!(matches!(
            parse_hypotheses("a = 0 & a > 0", &cn),
            Err(Error::ContradictoryHypothesis { .. })
        ));
        assert!(matches!(
            parse_hypotheses("one: a > 0; one: b > 0", &cn),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            parse_hypotheses("a > 1.5", &cn),
            Err(Error::HypothesisParse(_))
        ));
        assert!(matches!(
            parse_hypotheses("a", &cn),
            Err(Error::HypothesisParse(_))
        ));
        // Indirect cycles through a third coefficient are caught too.
        assert!(matches!(
            parse_hypotheses("a > b & b > 0 & 0 > a", &cn),
            Err(Error::ContradictoryHypothesis { .. })
        ));
    }

    #[test]
    fn labels_default_and_custom() {
        let cn = names(&["a", "b"]);
        let set = parse_hypotheses("a > 0; grow: b > 0", &cn).unwrap();
        assert_eq!(set.hypotheses[0].label, "H1");
        assert_eq!(set.hypotheses[1].label, "grow");
    }

    #[test]
    fn prior_prob_override_validation() {
        let cn = names(&["a", "b"]);
        let mut set = parse_hypotheses("a > 0; b > 0", &cn).unwrap();
        // Two hypotheses + complement = 3 entities.
        assert!(set.set_prior_probs(vec![0.5, 0.5]).is_err());
        assert!(set.set_prior_probs(vec![0.5, 0.6, -0.1]).is_err());
        set.set_prior_probs(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(set.prior_probs().unwrap(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn render_round_trip_is_exact() {
        let cn = names(&["a", "b", "c", "d"]);
        for text in [
            "a > b > 0 & c > 0",
            "a = b & c > d",
            "a = b = 0",
            "a < 0 & b > c",
            "a = b & b = c & d > 0",
        ] {
            let set = parse_hypotheses(text, &cn).unwrap();
            let h = &set.hypotheses[0];
            let rendered = h.render(&cn);
            let reparsed = parse_hypotheses(&rendered, &cn).unwrap();
            let h2 = &reparsed.hypotheses[0];
            assert_eq!(h.r_e(), h2.r_e(), "equality rows differ for {text:?}");
            assert_eq!(h.r_o(), h2.r_o(), "order rows differ for {text:?}");
        }
    }

    /// Brute-force region-membership oracle: evaluate the original predicate
    /// directly on random vectors and compare with the matrix form.
    #[test]
    fn membership_matches_direct_predicate() {
        let cn = names(&["a", "b", "c"]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);

        // (text, predicate)
        type Pred = fn(f64, f64, f64) -> bool;
        let cases: Vec<(&str, Pred)> = vec![
            ("a > b > 0", |a, b, _| a > b && b > 0.0),
            ("a > 0 & b > 0 & c > 0", |a, b, c| a > 0.0 && b > 0.0 && c > 0.0),
            ("a < b", |a, b, _| a < b),
            ("a < 0 & c > b", |a, b, c| a < 0.0 && c > b),
            ("a = b & c > 0", |a, b, c| a == b && c > 0.0),
            ("a = b = c", |a, b, c| a == b && b == c),
            ("a = 0", |a, _, _| a == 0.0),
        ];
        for (text, pred) in cases {
            let set = parse_hypotheses(text, &cn).unwrap();
            let h = &set.hypotheses[0];
            for draw in 0..1000 {
                let mut v = [
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ];
                // Exercise the equality-true branches on a share of draws by
                // projecting onto the constraint surface.
                if draw % 4 == 0 {
                    if text.contains("a = b") {
                        v[1] = v[0];
                    }
                    if text.contains("b = c") || text.contains("a = b = c") {
                        v[2] = v[1];
                    }
                    if text.contains("a = 0") {
                        v[0] = 0.0;
                    }
                }
                let beta = DVector::from_vec(v.to_vec());
                assert_eq!(
                    h.satisfied_by(&beta, 1e-12),
                    pred(v[0], v[1], v[2]),
                    "{text} at {v:?}"
                );
            }
        }
    }

    #[test]
    fn equality_rows_are_linearly_independent() {
        let cn = names(&["a", "b", "c", "d"]);
        for text in ["a = b & b = c & a = c", "a = b & c = d & a = d", "a = b = 0 & c = 0"] {
            let set = parse_hypotheses(text, &cn).unwrap();
            let h = &set.hypotheses[0];
            let rank = h.r_e().clone().svd(false, false).rank(1e-10);
            assert_eq!(rank, h.q_e(), "redundant equality rows for {text:?}");
        }
    }
}
