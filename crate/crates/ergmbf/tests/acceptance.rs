//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with
//! `cargo test --test acceptance -- --test-threads=1 --nocapture`
//! to see the lines; the slowest criteria are the two simulation studies.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergmbf::bf::{evaluate_hypotheses, evidence_matrix, posterior_probs};
use ergmbf::data::florentine;
use ergmbf::hypothesis::parse_hypotheses;
use ergmbf::inference::{
    fit_mple, gaussian_approx, normality_check, sample_posterior, ExchangeSettings,
};
use ergmbf::net::{Adjacency, Network};
use ergmbf::prior::{unit_information_prior, Gaussian};
use ergmbf::sampler::{sample_networks, CoefficientVector};
use ergmbf::sim::{order_study, size_study, OrderStudyConfig, SizeStudyConfig};
use ergmbf::stats::{change_stat_matrix, BoundModel, ModelSpec, StatisticSpec};

/// Print the criterion's PASS/FAIL line, then panic on failure.
fn conclude(criterion: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("{criterion}: PASS");
    } else {
        println!("{criterion}: FAIL — {}", failures.join("; "));
        panic!("{criterion} failed:\n  {}", failures.join("\n  "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, message: String) {
    if !ok {
        failures.push(message);
    }
}

/// 1-D Gaussian whose density at zero equals `target`.
fn density_pinned_gaussian(name: &str, target: f64) -> Gaussian {
    let sd = 1.0 / (target * (2.0 * std::f64::consts::PI).sqrt());
    Gaussian::new(
        vec![name.to_string()],
        DVector::zeros(1),
        DMatrix::from_element(1, 1, sd * sd),
    )
    .unwrap()
}

#[test]
fn criterion_1_density_ratio_fixture() {
    let mut failures = Vec::new();
    let post = density_pinned_gaussian("x", 2.04);
    let prior = density_pinned_gaussian("x", 0.387);
    let hset = parse_hypotheses("x = 0", prior.names()).unwrap();
    let report = evaluate_hypotheses(&prior, &post, &hset, 10_000, 0).unwrap();

    let bf = report.hypotheses[0].bf;
    let expected = 2.04 / 0.387;
    check(
        &mut failures,
        (bf - expected).abs() < 1e-10,
        format!("Bayes factor {bf} differs from {expected} by more than 1e-10"),
    );
    let (p1, p2) = (report.posterior_probs[0], report.posterior_probs[1]);
    check(
        &mut failures,
        (p1 - 0.8405).abs() < 0.005 && (p2 - 0.1595).abs() < 0.005,
        format!("posterior probabilities ({p1:.4}, {p2:.4}) off (0.8405, 0.1595)"),
    );
    conclude("criterion 1 (density-ratio fixture)", failures);
}

#[test]
fn criterion_2_orthant_complexity() {
    let mut failures = Vec::new();
    let std3 = Gaussian::new(
        vec!["a".into(), "b".into(), "c".into()],
        DVector::zeros(3),
        DMatrix::identity(3, 3),
    )
    .unwrap();
    let hset = parse_hypotheses("a < b < c", std3.names()).unwrap();
    let start = std::time::Instant::now();
    let report = evaluate_hypotheses(&std3, &std3, &hset, 100_000, 7).unwrap();
    let elapsed = start.elapsed();

    let prob = report.hypotheses[0]
        .complexity
        .order_prob
        .as_ref()
        .unwrap()
        .value;
    check(
        &mut failures,
        (prob - 1.0 / 6.0).abs() < 0.005,
        format!("ordering probability {prob:.5} off 1/6 by more than 0.005"),
    );
    check(
        &mut failures,
        elapsed.as_secs_f64() < 1.0,
        format!("took {elapsed:?}, budget 1 s"),
    );
    conclude("criterion 2 (orthant complexity)", failures);
}

#[test]
fn criterion_3_occam_saturation() {
    let mut failures = Vec::new();
    let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
    let prior = Gaussian::new(names.clone(), DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
    let hset = parse_hypotheses("a < b < c", prior.names()).unwrap();
    let start = std::time::Instant::now();

    // As the posterior concentrates deeper inside the ordered region, the
    // Bayes factor should rise toward 1 / P_prior(region) = 6.
    let mut last_bf = 0.0;
    let mut bfs = Vec::new();
    for delta in [0.25, 0.5, 1.0] {
        let post = Gaussian::new(
            names.clone(),
            DVector::from_vec(vec![-delta, 0.0, delta]),
            DMatrix::identity(3, 3) * 0.004,
        )
        .unwrap();
        let report = evaluate_hypotheses(&prior, &post, &hset, 200_000, 11).unwrap();
        last_bf = report.hypotheses[0].bf;
        bfs.push(last_bf);
    }
    check(
        &mut failures,
        bfs.windows(2).all(|w| w[1] >= w[0] - 0.05),
        format!("Bayes factors {bfs:?} do not increase toward the ceiling"),
    );
    check(
        &mut failures,
        (last_bf - 6.0).abs() / 6.0 < 0.05,
        format!("limiting Bayes factor {last_bf:.4} not within 5% of 6"),
    );
    let elapsed = start.elapsed();
    check(
        &mut failures,
        elapsed.as_secs_f64() < 10.0,
        format!("took {elapsed:?}, budget 10 s"),
    );
    conclude("criterion 3 (Occam saturation)", failures);
}

/// Four-node test bed: every tie pattern is enumerable.
fn four_node_model() -> (Network, ModelSpec) {
    let net = Network::from_edges(4, false, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
    let model = ModelSpec::new(vec![StatisticSpec::Edges, StatisticSpec::Triangle]);
    (net, model)
}

/// Sufficient statistics of every 4-node graph, indexed by dyad bitmask.
fn all_mask_stats(bound: &BoundModel, dyads: &[(usize, usize)]) -> Vec<DVector<f64>> {
    (0..1usize << dyads.len())
        .map(|mask| {
            let mut adj = Adjacency::new(4, false);
            for (d, &(i, j)) in dyads.iter().enumerate() {
                if mask & (1 << d) != 0 {
                    adj.set(i, j, true);
                }
            }
            bound.sufficient_stats(&adj)
        })
        .collect()
}

#[test]
fn criterion_4_enumeration_oracle_suite() {
    let mut failures = Vec::new();
    let start = std::time::Instant::now();
    let (net, model) = four_node_model();
    let bound = BoundModel::bind(&model, &net).unwrap();
    let dyads: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();

    // (a) Toggling any dyad of any graph changes the sufficient statistics
    // by exactly the reported change statistics.
    let mut toggle_errors = 0;
    for mask in 0..1usize << dyads.len() {
        let mut adj = Adjacency::new(4, false);
        for (d, &(i, j)) in dyads.iter().enumerate() {
            if mask & (1 << d) != 0 {
                adj.set(i, j, true);
            }
        }
        for &(i, j) in &dyads {
            let delta = bound.change_stats(&adj, i, j).unwrap();
            let mut on = adj.clone();
            on.set(i, j, true);
            let mut off = adj.clone();
            off.set(i, j, false);
            let diff = bound.sufficient_stats(&on) - bound.sufficient_stats(&off);
            if diff != delta {
                toggle_errors += 1;
            }
        }
    }
    check(
        &mut failures,
        toggle_errors == 0,
        format!("{toggle_errors} toggle inconsistencies across 64 graphs x 6 dyads"),
    );

    // (b) The Gibbs sampler's empirical distribution over all 64 graphs is
    // close to the exact one.
    let beta = CoefficientVector::new(
        vec!["edges".into(), "triangle".into()],
        vec![-1.5, 0.5],
    )
    .unwrap();
    let exact = ergmbf::sampler::exact_enumeration(&beta, &model, &net).unwrap();
    let sample = sample_networks(&beta, &model, &net, 10_000, 200, 5, 40).unwrap();
    let masks: Vec<usize> = sample
        .networks
        .iter()
        .map(|g| exact.mask_of(g.adjacency()).unwrap())
        .collect();
    let tv = exact.tv_from_draws(masks);
    check(
        &mut failures,
        tv < 0.03,
        format!("total-variation distance {tv:.4} >= 0.03 with 10,000 thinned draws"),
    );

    // (c) The posterior sampler's mean matches a grid evaluation of the
    // exact posterior (exact likelihood times the same prior).
    let prior = unit_information_prior(&net, &model).unwrap();
    let stats = all_mask_stats(&bound, &dyads);
    let s_obs = bound.sufficient_stats(net.adjacency());
    // The posterior on six dyads is wide (sd above 1), so the grid must
    // reach far into the tails to keep truncation bias out of the oracle.
    let grid: Vec<f64> = (0..361).map(|i| -9.0 + 0.05 * i as f64).collect();
    let (mut wsum, mut mean) = (0.0, DVector::<f64>::zeros(2));
    let mut max_logw = f64::NEG_INFINITY;
    let mut logws = Vec::with_capacity(grid.len() * grid.len());
    for &b0 in &grid {
        for &b1 in &grid {
            let b = DVector::from_vec(vec![b0, b1]);
            let logz = {
                let vals: Vec<f64> = stats.iter().map(|s| b.dot(s)).collect();
                let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            };
            let logw = b.dot(&s_obs) - logz + prior.log_pdf(&b);
            max_logw = max_logw.max(logw);
            logws.push((b, logw));
        }
    }
    for (b, logw) in logws {
        let w = (logw - max_logw).exp();
        wsum += w;
        mean += b * w;
    }
    mean /= wsum;

    // Four-node toggles are cheap, so generous settings keep both the
    // auxiliary-draw bias and the Monte Carlo error well under tolerance.
    let settings = ExchangeSettings {
        main_iters: 100_000,
        aux_sweeps: 30,
        chains: 2,
        seed: 41,
    };
    let draws = sample_posterior(&net, &model, &prior, settings).unwrap();
    let approx = gaussian_approx(&draws).unwrap();
    for (i, name) in ["edges", "triangle"].iter().enumerate() {
        let got = approx.mean()[i];
        eprintln!("  {name}: exchange mean {got:.4}, grid-exact {:.4}", mean[i]);
        check(
            &mut failures,
            (got - mean[i]).abs() < 0.05,
            format!("{name} posterior mean {got:.4} vs exact {:.4}", mean[i]),
        );
    }

    let elapsed = start.elapsed();
    check(
        &mut failures,
        elapsed.as_secs_f64() < 300.0,
        format!("took {elapsed:?}, budget 5 min"),
    );
    conclude("criterion 4 (enumeration oracle suite)", failures);
}

/// Independent logistic-regression solver (iteratively reweighted least
/// squares on the working response), used as the oracle for criterion 5.
fn irls_oracle(x: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
    let (d, k) = (x.nrows(), x.ncols());
    let mut beta = DVector::<f64>::zeros(k);
    for _ in 0..60 {
        let eta = x * &beta;
        let p: Vec<f64> = eta.iter().map(|&e| 1.0 / (1.0 + (-e).exp())).collect();
        let w: Vec<f64> = p.iter().map(|&pi| (pi * (1.0 - pi)).max(1e-12)).collect();
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
        let next = nalgebra::Cholesky::new(xtwx).unwrap().solve(&xtwz);
        let done = (&next - &beta).amax() < 1e-12;
        beta = next;
        if done {
            break;
        }
    }
    beta
}

#[test]
fn criterion_5_mple_correctness() {
    let mut failures = Vec::new();
    let net = florentine();

    // Edges-only model: the estimate is the tie-density logit.
    let edges_only = ModelSpec::new(vec![StatisticSpec::Edges]);
    let fit = fit_mple(&net, &edges_only).unwrap();
    let expected = (20.0f64 / 100.0).ln();
    check(
        &mut failures,
        (fit.coefficients.values()[0] - expected).abs() < 1e-8,
        format!(
            "edges estimate {} vs density logit {expected}",
            fit.coefficients.values()[0]
        ),
    );

    // Dyad-independent model: agreement with the independent solver.
    let model = ModelSpec::new(vec![
        StatisticSpec::Edges,
        StatisticSpec::Absdiff { attr: "wealth".into() },
    ]);
    let fit = fit_mple(&net, &model).unwrap();
    let design = change_stat_matrix(&net, &model).unwrap();
    let y: Vec<f64> = design
        .dyads
        .iter()
        .map(|&(i, j)| if net.has_edge(i, j) { 1.0 } else { 0.0 })
        .collect();
    let oracle = irls_oracle(&design.matrix, &y);
    for i in 0..2 {
        check(
            &mut failures,
            (fit.coefficients.values()[i] - oracle[i]).abs() < 1e-6,
            format!(
                "{} estimate {} vs logistic oracle {}",
                design.names[i],
                fit.coefficients.values()[i],
                oracle[i]
            ),
        );
    }
    conclude("criterion 5 (pseudolikelihood correctness)", failures);
}

#[test]
fn criterion_6_evidence_matrix_algebra() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let t = rng.random_range(2..6usize);
        let bfs: Vec<f64> = (0..t).map(|_| (rng.random::<f64>() * 6.0 - 3.0).exp()).collect();
        let m = evidence_matrix(&bfs).unwrap();
        for a in 0..t {
            for b in 0..t {
                check(
                    &mut failures,
                    (m[(a, b)] * m[(b, a)] - 1.0).abs() < 1e-12,
                    format!("symmetry violated at ({a}, {b})"),
                );
                for c in 0..t {
                    check(
                        &mut failures,
                        (m[(a, c)] - m[(a, b)] * m[(b, c)]).abs() < 1e-12 * m[(a, c)].max(1.0),
                        format!("transitivity violated at ({a}, {b}, {c})"),
                    );
                }
            }
        }
        let priors = vec![1.0 / t as f64; t];
        let probs = posterior_probs(&bfs, &priors).unwrap();
        let total: f64 = probs.iter().sum();
        check(
            &mut failures,
            (total - 1.0).abs() < 1e-12,
            format!("posterior probabilities sum to {total}"),
        );
        if failures.len() > 3 {
            break;
        }
    }
    conclude("criterion 6 (evidence-matrix algebra)", failures);
}

#[test]
fn criterion_7_evidence_vs_size_trend() {
    let mut failures = Vec::new();
    let start = std::time::Instant::now();
    let cfg = SizeStudyConfig {
        sizes: vec![7, 10, 15, 20, 25, 30],
        reps: 50,
        exchange: ExchangeSettings {
            main_iters: 10_000,
            aux_sweeps: 10,
            chains: 1,
            seed: 0,
        },
        seed: 0,
    };
    let rows = size_study(&cfg).unwrap();

    for r in &rows {
        check(
            &mut failures,
            r.median_p > 0.045 && r.median_p < 0.055,
            format!("n={}: median p {:.4} escaped the (0.045, 0.055) window", r.n, r.median_p),
        );
        check(
            &mut failures,
            r.median_bic_evidence > r.median_bf,
            format!(
                "n={}: BIC evidence {:.3} not above the density-ratio evidence {:.3}",
                r.n, r.median_bic_evidence, r.median_bf
            ),
        );
    }
    let bfs: Vec<f64> = rows.iter().map(|r| r.median_bf).collect();
    let inversions = bfs.windows(2).filter(|w| w[1] < w[0]).count();
    check(
        &mut failures,
        inversions <= 1,
        format!("median Bayes factors {bfs:?} have {inversions} inversions (allowed 1)"),
    );
    println!(
        "criterion 7 medians: bf {:?} bic {:?} ({:?})",
        bfs,
        rows.iter().map(|r| r.median_bic_evidence).collect::<Vec<_>>(),
        start.elapsed()
    );
    check(
        &mut failures,
        start.elapsed().as_secs_f64() < 1800.0,
        format!("took {:?}, budget 30 min", start.elapsed()),
    );
    conclude("criterion 7 (evidence-vs-size trend)", failures);
}

#[test]
fn criterion_8_order_test_consistency() {
    let mut failures = Vec::new();
    let start = std::time::Instant::now();
    let cfg = OrderStudyConfig {
        sizes: vec![10, 30],
        betas: vec![-0.4, -0.2, 0.0, 0.2, 0.4],
        reps: 50,
        exchange: ExchangeSettings {
            main_iters: 6_000,
            aux_sweeps: 10,
            chains: 1,
            seed: 0,
        },
        mc_draws: 20_000,
        seed: 0,
        ..OrderStudyConfig::default()
    };
    let rows = order_study(&cfg).unwrap();
    let at = |n: usize, beta: f64| {
        rows.iter()
            .find(|r| r.n == n && (r.beta - beta).abs() < 1e-12)
            .unwrap()
    };

    // At n = 30 the true hypothesis must win wherever |β| >= 0.2: the
    // ordering for positive β, the complement for negative β.
    for beta in [0.2, 0.4] {
        let r = at(30, beta);
        check(
            &mut failures,
            r.median_prob_order > r.median_prob_equal
                && r.median_prob_order > r.median_prob_complement,
            format!(
                "β={beta}: P(order)={:.3} not the maximum (equal {:.3}, complement {:.3})",
                r.median_prob_order, r.median_prob_equal, r.median_prob_complement
            ),
        );
    }
    for beta in [-0.2, -0.4] {
        let r = at(30, beta);
        check(
            &mut failures,
            r.median_prob_complement > r.median_prob_equal
                && r.median_prob_complement > r.median_prob_order,
            format!(
                "β={beta}: P(complement)={:.3} not the maximum (order {:.3}, equal {:.3})",
                r.median_prob_complement, r.median_prob_order, r.median_prob_equal
            ),
        );
    }

    // Evidence for equality at β = 0 strengthens with network size.
    let (small, large) = (at(10, 0.0), at(30, 0.0));
    check(
        &mut failures,
        large.median_prob_equal > small.median_prob_equal,
        format!(
            "P(equal | β=0) fell from {:.3} (n=10) to {:.3} (n=30)",
            small.median_prob_equal, large.median_prob_equal
        ),
    );
    println!(
        "criterion 8 rows: {:?} ({:?})",
        rows.iter()
            .map(|r| (r.n, r.beta, r.median_prob_order, r.median_prob_equal, r.median_prob_complement))
            .collect::<Vec<_>>(),
        start.elapsed()
    );
    check(
        &mut failures,
        start.elapsed().as_secs_f64() < 2700.0,
        format!("took {:?}, budget 45 min", start.elapsed()),
    );
    conclude("criterion 8 (order-test consistency)", failures);
}

#[test]
fn criterion_9_gaussian_approximation_diagnostic() {
    let mut failures = Vec::new();
    let net = florentine();
    let model = ModelSpec::new(vec![
        StatisticSpec::Edges,
        StatisticSpec::Kstar { k: 2 },
        StatisticSpec::Absdiff { attr: "wealth".into() },
    ]);
    let prior = unit_information_prior(&net, &model).unwrap();
    let settings = ExchangeSettings::default();
    let draws = sample_posterior(&net, &model, &prior, settings).unwrap();
    let approx = gaussian_approx(&draws).unwrap();
    for ks in normality_check(&draws, &approx) {
        check(
            &mut failures,
            !ks.flagged,
            format!("{}: KS distance {:.4} >= 0.05", ks.name, ks.statistic),
        );
    }
    conclude("criterion 9 (posterior normality)", failures);
}
