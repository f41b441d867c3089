//! Human-readable tables and JSON payloads for fits and hypothesis tests.
//!
//! Text output mirrors the usual journal layout: a coefficient table with
//! classical and Bayesian columns side by side, a per-hypothesis evidence
//! table with its fit/complexity decomposition, the pairwise evidence
//! matrix, and interpretive labels. JSON payloads carry the same numbers
//! unrounded, with object keys in insertion order so repeated runs are
//! byte-identical.

use serde_json::{json, Map, Value};

use crate::bf::{raftery_label, ConfirmatoryReport, ExploratoryRow, HypothesisEvidence};
use crate::inference::{KsCheck, MpleFit};
use crate::prior::Gaussian;

/// Format a number for tables: fixed four decimals in a readable range,
/// scientific notation outside it.
fn fmt(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if a != 0.0 && (a >= 1e5 || a < 1e-4) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

/// Render rows of (label, cells) with right-aligned numeric columns under
/// the given headers. The first column is left-aligned.
fn table(headers: &[&str], rows: &[(String, Vec<String>)]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for (label, cells) in rows {
        widths[0] = widths[0].max(label.len());
        for (i, c) in cells.iter().enumerate() {
            widths[i + 1] = widths[i + 1].max(c.len());
        }
    }
    let mut out = String::new();
    out.push_str(&format!("  {:<w$}", headers[0], w = widths[0]));
    for (h, w) in headers[1..].iter().zip(&widths[1..]) {
        out.push_str(&format!("  {h:>w$}"));
    }
    out.push('\n');
    for (label, cells) in rows {
        out.push_str(&format!("  {label:<w$}", w = widths[0]));
        for (c, w) in cells.iter().zip(&widths[1..]) {
            out.push_str(&format!("  {c:>w$}"));
        }
        out.push('\n');
    }
    out
}

/// Everything the fit report can show; absent pieces are skipped.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitSummary<'a> {
    pub mple: Option<&'a MpleFit>,
    /// Shown when the pseudolikelihood fit is unavailable (e.g. separation).
    pub mple_note: Option<&'a str>,
    pub posterior: Option<&'a Gaussian>,
    pub acceptance_rate: Option<f64>,
    pub normality: Option<&'a [KsCheck]>,
}

/// Coefficient names, from whichever side of the summary is present.
fn summary_names<'a>(s: &FitSummary<'a>) -> &'a [String] {
    if let Some(m) = s.mple {
        m.coefficients.names()
    } else if let Some(p) = s.posterior {
        p.names()
    } else {
        &[]
    }
}

/// Plain-text coefficient table: maximum pseudolikelihood estimate,
/// standard error, and Wald p-value next to posterior mean and sd.
pub fn fit_text(s: &FitSummary) -> String {
    let names = summary_names(s);
    let mut out = String::from("Model fit\n=========\n\n");
    let mut rows = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut cells = Vec::new();
        match s.mple {
            Some(m) => {
                cells.push(fmt(m.coefficients.values()[i]));
                cells.push(fmt(m.std_errors[i]));
                cells.push(fmt(m.p_values[i]));
            }
            None => cells.extend(["--".into(), "--".into(), "--".into()]),
        }
        match s.posterior {
            Some(p) => {
                cells.push(fmt(p.mean()[i]));
                cells.push(fmt(p.sd(i)));
            }
            None => cells.extend(["--".into(), "--".into()]),
        }
        rows.push((name.clone(), cells));
    }
    out.push_str(&table(
        &["statistic", "MPLE", "s.e.", "p", "post mean", "post sd"],
        &rows,
    ));
    if let Some(note) = s.mple_note {
        out.push_str(&format!("\n  note: {note}\n"));
    }
    if let Some(m) = s.mple {
        out.push_str(&format!(
            "\n  log pseudolikelihood {} over {} dyads\n",
            fmt(m.log_pl),
            m.n_obs
        ));
    }
    if let Some(rate) = s.acceptance_rate {
        out.push_str(&format!("  sampler acceptance rate {}\n", fmt(rate)));
    }
    if let Some(ks) = s.normality {
        out.push_str("\nPosterior normality (Kolmogorov-Smirnov)\n");
        let rows: Vec<(String, Vec<String>)> = ks
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    vec![
                        fmt(c.statistic),
                        if c.flagged { "CHECK".into() } else { "ok".into() },
                    ],
                )
            })
            .collect();
        out.push_str(&table(&["statistic", "KS", "verdict"], &rows));
    }
    out
}

/// JSON payload for a fit: one object per coefficient plus run metadata.
pub fn fit_json(s: &FitSummary, seed: Option<u64>) -> Value {
    let names = summary_names(s);
    let coefficients: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut m = Map::new();
            m.insert("name".into(), json!(name));
            m.insert("mple".into(), opt_num(s.mple.map(|f| f.coefficients.values()[i])));
            m.insert("se".into(), opt_num(s.mple.map(|f| f.std_errors[i])));
            m.insert("p".into(), opt_num(s.mple.map(|f| f.p_values[i])));
            m.insert(
                "post_mean".into(),
                opt_num(s.posterior.map(|p| p.mean()[i])),
            );
            m.insert("post_sd".into(), opt_num(s.posterior.map(|p| p.sd(i))));
            Value::Object(m)
        })
        .collect();
    let mut root = Map::new();
    root.insert("coefficients".into(), Value::Array(coefficients));
    root.insert("log_pl".into(), opt_num(s.mple.map(|f| f.log_pl)));
    if let Some(note) = s.mple_note {
        root.insert("mple_note".into(), json!(note));
    }
    root.insert(
        "acceptance_rate".into(),
        opt_num(s.acceptance_rate),
    );
    if let Some(ks) = s.normality {
        root.insert(
            "normality".into(),
            Value::Array(
                ks.iter()
                    .map(|c| json!({"name": c.name, "ks": c.statistic, "flagged": c.flagged}))
                    .collect(),
            ),
        );
    }
    if let Some(seed) = seed {
        root.insert("settings".into(), json!({ "seed": seed }));
    }
    Value::Object(root)
}

fn opt_num(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => Value::Null,
    }
}

/// Prior description block for report headers.
pub fn prior_text(prior: &Gaussian) -> String {
    let mut out = String::from("Prior (unit information)\n");
    let rows: Vec<(String, Vec<String>)> = prior
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), vec![fmt(prior.mean()[i]), fmt(prior.sd(i))]))
        .collect();
    out.push_str(&table(&["statistic", "mean", "sd"], &rows));
    out
}

fn side_cells(h: &HypothesisEvidence, fit: bool) -> Vec<String> {
    let side = if fit { &h.fit } else { &h.complexity };
    vec![
        side.density_at_null.map_or("--".into(), fmt),
        side.order_prob.map_or("--".into(), |p| fmt(p.value)),
        side.order_prob
            .map_or("--".into(), |p| if p.mc_se > 0.0 { fmt(p.mc_se) } else { "exact".into() }),
    ]
}

/// Plain-text confirmatory report: evidence table, fit/complexity
/// decomposition, pairwise matrix, and interpretation lines.
pub fn confirmatory_text(rep: &ConfirmatoryReport) -> String {
    let mut out = String::from("Hypothesis test\n===============\n\n");
    for h in &rep.hypotheses {
        if h.rendered.is_empty() {
            out.push_str(&format!("  {}: none of the named hypotheses\n", h.label));
        } else {
            out.push_str(&format!("  {}: {}\n", h.label, h.rendered));
        }
    }
    if rep.complement_dropped {
        out.push_str("  (complement dropped: the hypotheses above exhaust the space)\n");
    }
    out.push('\n');

    let rows: Vec<(String, Vec<String>)> = rep
        .hypotheses
        .iter()
        .zip(rep.posterior_probs.iter().zip(&rep.prior_probs))
        .map(|(h, (post, prior))| {
            (
                h.label.clone(),
                vec![fmt(h.bf), fmt(*post), fmt(*prior)],
            )
        })
        .collect();
    out.push_str(&table(
        &["hypothesis", "BF vs unconstrained", "P(H|Y)", "prior P(H)"],
        &rows,
    ));

    out.push_str("\nFit and complexity components\n");
    let rows: Vec<(String, Vec<String>)> = rep
        .hypotheses
        .iter()
        .map(|h| {
            let mut cells = side_cells(h, true);
            cells.extend(side_cells(h, false));
            (h.label.clone(), cells)
        })
        .collect();
    out.push_str(&table(
        &[
            "hypothesis",
            "fit density",
            "fit P(order)",
            "mc se",
            "prior density",
            "prior P(order)",
            "mc se",
        ],
        &rows,
    ));

    out.push_str("\nEvidence matrix (row vs column)\n");
    let labels: Vec<&str> = rep.hypotheses.iter().map(|h| h.label.as_str()).collect();
    let rows: Vec<(String, Vec<String>)> = labels
        .iter()
        .enumerate()
        .map(|(r, l)| {
            (
                l.to_string(),
                (0..labels.len())
                    .map(|c| fmt(rep.evidence_matrix[(r, c)]))
                    .collect(),
            )
        })
        .collect();
    let mut headers: Vec<&str> = vec![""];
    headers.extend(&labels);
    out.push_str(&table(&headers, &rows));

    out.push_str("\nInterpretation\n");
    for (r, h) in rep.hypotheses.iter().enumerate() {
        for (c, other) in rep.hypotheses.iter().enumerate() {
            if r >= c {
                continue;
            }
            let bf = rep.evidence_matrix[(r, c)];
            if let Ok(label) = raftery_label(bf) {
                out.push_str(&format!(
                    "  {} vs {}: {} - {}\n",
                    h.label,
                    other.label,
                    fmt(bf),
                    label
                ));
            }
        }
    }
    out
}

fn side_json(h: &HypothesisEvidence, fit: bool) -> Value {
    let side = if fit { &h.fit } else { &h.complexity };
    let mut m = Map::new();
    m.insert("density_at_null".into(), opt_num(side.density_at_null));
    m.insert(
        "order_prob".into(),
        opt_num(side.order_prob.map(|p| p.value)),
    );
    m.insert(
        "order_prob_mc_se".into(),
        opt_num(side.order_prob.map(|p| p.mc_se)),
    );
    Value::Object(m)
}

/// JSON payload for a confirmatory test. Hypotheses appear in evaluation
/// order; `posterior_probs` is keyed by hypothesis label.
pub fn confirmatory_json(rep: &ConfirmatoryReport) -> Value {
    let hypotheses: Vec<Value> = rep
        .hypotheses
        .iter()
        .map(|h| {
            let mut m = Map::new();
            m.insert("label".into(), json!(h.label));
            m.insert("bf_vs_unconstrained".into(), json!(h.bf));
            m.insert("fit".into(), side_json(h, true));
            m.insert("complexity".into(), side_json(h, false));
            Value::Object(m)
        })
        .collect();
    let t = rep.hypotheses.len();
    let matrix: Vec<Value> = (0..t)
        .map(|r| Value::Array((0..t).map(|c| json!(rep.evidence_matrix[(r, c)])).collect()))
        .collect();
    let mut probs = Map::new();
    for (h, p) in rep.hypotheses.iter().zip(&rep.posterior_probs) {
        probs.insert(h.label.clone(), json!(p));
    }
    let mut root = Map::new();
    root.insert("hypotheses".into(), Value::Array(hypotheses));
    root.insert("evidence_matrix".into(), Value::Array(matrix));
    root.insert("posterior_probs".into(), Value::Object(probs));
    root.insert(
        "settings".into(),
        json!({"mc_draws": rep.mc_draws, "seed": rep.seed}),
    );
    Value::Object(root)
}

/// Plain-text exploratory report: per-coefficient posterior probabilities
/// of a zero, negative, or positive effect.
pub fn exploratory_text(rows: &[ExploratoryRow]) -> String {
    let mut out = String::from(
        "Exploratory test (equal prior probabilities 1/3)\n\
         ================================================\n\n",
    );
    let body: Vec<(String, Vec<String>)> = rows
        .iter()
        .map(|r| {
            (
                r.name.clone(),
                vec![
                    fmt(r.prob_zero),
                    fmt(r.prob_negative),
                    fmt(r.prob_positive),
                ],
            )
        })
        .collect();
    out.push_str(&table(
        &["statistic", "P(b=0|Y)", "P(b<0|Y)", "P(b>0|Y)"],
        &body,
    ));
    out
}

/// JSON payload for the exploratory test.
pub fn exploratory_json(rows: &[ExploratoryRow], seed: u64) -> Value {
    let body: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "bf_zero": r.bf_zero,
                "bf_negative": r.bf_negative,
                "bf_positive": r.bf_positive,
                "prob_zero": r.prob_zero,
                "prob_negative": r.prob_negative,
                "prob_positive": r.prob_positive,
            })
        })
        .collect();
    json!({
        "exploratory": body,
        "settings": {"seed": seed},
    })
}
