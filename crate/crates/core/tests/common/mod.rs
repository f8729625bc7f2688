#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use semnet_core::rng::rng_from_seed;
use semnet_core::WeightedGraph;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

pub fn random_graph(seed: u64, max_nodes: usize, density: f64) -> WeightedGraph {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(2..=max_nodes);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(0.01..=1.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

fn dense_weights(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut w = vec![vec![0.0; n]; n];
    for e in g.edges() {
        w[e.i][e.j] = e.w;
        w[e.j][e.i] = e.w;
    }
    w
}

/// Mean shortest distance over reachable ordered pairs and the reachable
/// fraction, by Floyd-Warshall with step length `1 - w`.
pub fn floyd_warshall_aspl(g: &WeightedGraph) -> (Option<f64>, f64) {
    let n = g.node_count();
    let w = dense_weights(g);
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
        for j in 0..n {
            if w[i][j] > 0.0 {
                d[i][j] = 1.0 - w[i][j];
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j].is_finite() {
                sum += d[i][j];
                count += 1;
            }
        }
    }
    let pairs = n * (n - 1);
    ((count > 0).then(|| sum / count as f64), count as f64 / pairs as f64)
}

/// Average clustering straight from the per-node formula: for each node sum
/// `(w_ij + w_ih) / 2` over ordered neighbor pairs that are themselves
/// adjacent, divided by `s_i (k_i - 1)`.
pub fn brute_force_cc(g: &WeightedGraph) -> f64 {
    let n = g.node_count();
    let w = dense_weights(g);
    let mut total = 0.0;
    for i in 0..n {
        let k = (0..n).filter(|&j| w[i][j] > 0.0).count();
        let s: f64 = w[i].iter().sum();
        if k < 2 {
            continue;
        }
        let mut acc = 0.0;
        for j in 0..n {
            for h in 0..n {
                if j != h && w[i][j] > 0.0 && w[i][h] > 0.0 && w[j][h] > 0.0 {
                    acc += (w[i][j] + w[i][h]) / 2.0;
                }
            }
        }
        total += acc / (s * (k as f64 - 1.0));
    }
    total / n as f64
}

/// Weighted modularity of `membership` from the textbook double sum.
pub fn modularity_double_sum(g: &WeightedGraph, membership: &[usize]) -> f64 {
    let n = g.node_count();
    let w = dense_weights(g);
    let s: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = s.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += w[i][j] - s[i] * s[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every partition of the nodes (restricted growth
/// strings), feasible up to about 10 nodes.
pub fn best_partition_q(g: &WeightedGraph) -> f64 {
    let n = g.node_count();
    let mut best = f64::NEG_INFINITY;
    let mut rgs = vec![0usize; n];
    loop {
        best = best.max(modularity_double_sum(g, &rgs));
        // next restricted growth string
        let mut k = n - 1;
        loop {
            if k == 0 {
                return best;
            }
            if rgs[k] <= *rgs[..k].iter().max().unwrap() {
                rgs[k] += 1;
                for x in &mut rgs[k + 1..] {
                    *x = 0;
                }
                break;
            }
            k -= 1;
        }
    }
}

/// Two weighted cliques of sizes `a` and `b` joined by one weak bridge.
pub fn two_cliques(seed: u64, a: usize, b: usize) -> WeightedGraph {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for (lo, hi) in [(0, a), (a, a + b)] {
        for i in lo..hi {
            for j in i + 1..hi {
                edges.push((i, j, rng.random_range(0.6..=1.0)));
            }
        }
    }
    edges.push((a - 1, a, rng.random_range(0.02..0.15)));
    WeightedGraph::from_edges(a + b, edges).unwrap()
}

pub fn truncated_normal_cdf(x: f64, mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let z = Normal::standard();
    let (a, b) = (z.cdf((lo - mu) / sigma), z.cdf((hi - mu) / sigma));
    ((z.cdf((x - mu) / sigma) - a) / (b - a)).clamp(0.0, 1.0)
}

pub fn truncated_normal_mean(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let z = Normal::standard();
    let (alpha, beta) = ((lo - mu) / sigma, (hi - mu) / sigma);
    mu + sigma * (z.pdf(alpha) - z.pdf(beta)) / (z.cdf(beta) - z.cdf(alpha))
}

/// Power of the one-sided pooled t-test from the noncentral t distribution,
/// `E_V[Phi(delta - c sqrt(V / df))]` with `V ~ chi2(df)`, by Simpson's rule.
pub fn noncentral_t_power(effect: f64, n_per_group: usize, alpha: f64) -> f64 {
    let df = (2 * n_per_group - 2) as f64;
    let c = statrs::distribution::StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(1.0 - alpha);
    let delta = effect * (n_per_group as f64 / 2.0).sqrt();
    let chi = ChiSquared::new(df).unwrap();
    let z = Normal::standard();
    let upper = df + 40.0 * (2.0 * df).sqrt();
    let steps = 20_000;
    let h = upper / steps as f64;
    let f = |v: f64| if v <= 0.0 { 0.0 } else { chi.pdf(v) * z.cdf(delta - c * (v / df).sqrt()) };
    let mut acc = f(0.0) + f(upper);
    for k in 1..steps {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Pearson of average ranks, ranks computed by counting.
pub fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let less = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}
