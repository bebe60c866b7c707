//! Observables: degrees, motif counts, transitivity, endpoint
//! assortativity, degree-dependent clustering, Hill tail estimates, CCDFs,
//! and the auxiliary structural metrics used for model comparison.

use crate::error::{Error, Result};
use crate::generator::Graph;
use crate::rng::{KeyedRng, Stream};
use std::collections::BTreeMap;

/// Joint motif/degree-moment vector; all CLT ingredients in one place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MotifVector {
    /// Triangle count T_n (each triangle once).
    pub t_n: u64,
    /// Wedge count W_n = sum_i C(D_i, 2).
    pub w_n: u64,
    /// Edge count E_n.
    pub e_n: u64,
    /// Q_{2,n} = sum_i D_i^2.
    pub q2: u64,
    /// Q_{3,n} = sum_i D_i^3.
    pub q3: u64,
    /// P_n = sum_{i<j} A_{ij} D_i D_j.
    pub p_n: u64,
    pub n: usize,
}

/// Count common neighbors of u and v that are strictly greater than v
/// (sorted-list intersection), realizing the i < j < l triangle convention.
fn common_above(a: &[u32], b: &[u32], v: u32) -> u64 {
    let mut i = a.partition_point(|&x| x <= v);
    let mut j = b.partition_point(|&x| x <= v);
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn motif_vector(graph: &Graph) -> MotifVector {
    let degrees = graph.degrees();
    let mut q2 = 0u64;
    let mut q3 = 0u64;
    let mut w_n = 0u64;
    for &d in &degrees {
        let d = d as u64;
        q2 += d * d;
        q3 += d * d * d;
        w_n += d * (d.saturating_sub(1)) / 2;
    }
    let mut e_n = 0u64;
    let mut p_n = 0u64;
    let mut t_n = 0u64;
    for (u, nbrs) in graph.adjacency.iter().enumerate() {
        for &v in nbrs {
            if (u as u32) < v {
                e_n += 1;
                p_n += degrees[u] as u64 * degrees[v as usize] as u64;
                t_n += common_above(nbrs, &graph.adjacency[v as usize], v);
            }
        }
    }
    MotifVector { t_n, w_n, e_n, q2, q3, p_n, n: graph.n }
}

/// Global transitivity C_n = 3 T_n / W_n, with C_n = 0 when W_n = 0.
pub fn transitivity(mv: &MotifVector) -> f64 {
    if mv.w_n == 0 {
        0.0
    } else {
        3.0 * mv.t_n as f64 / mv.w_n as f64
    }
}

/// Endpoint assortativity from the motif vector,
/// r_n = (P/E - (Q2/2E)^2) / (Q3/2E - (Q2/2E)^2), with the degenerate
/// conventions r_n = 0 when E = 0 or the denominator is <= 0.
pub fn assortativity(mv: &MotifVector) -> f64 {
    if mv.e_n == 0 {
        return 0.0;
    }
    let e = mv.e_n as f64;
    let mu = mv.q2 as f64 / (2.0 * e);
    let num = mv.p_n as f64 / e - mu * mu;
    let den = mv.q3 as f64 / (2.0 * e) - mu * mu;
    if den <= 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Pearson correlation of endpoint degrees over the 2E directed endpoint
/// pairs; the independent oracle for [`assortativity`].
pub fn endpoint_assortativity_direct(graph: &Graph) -> f64 {
    let degrees = graph.degrees();
    let mut sx = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut m = 0.0;
    for (u, nbrs) in graph.adjacency.iter().enumerate() {
        for &v in nbrs {
            let du = degrees[u] as f64;
            let dv = degrees[v as usize] as f64;
            sx += du;
            sxx += du * du;
            sxy += du * dv;
            m += 1.0;
        }
    }
    if m == 0.0 {
        return 0.0;
    }
    let mean = sx / m;
    let var = sxx / m - mean * mean;
    if var <= 0.0 {
        return 0.0;
    }
    (sxy / m - mean * mean) / var
}

/// Spearman correlation of endpoint degrees over the 2E directed endpoint
/// pairs, average-rank ties. A heavy-tail-robust diagnostic.
pub fn endpoint_assortativity_spearman(graph: &Graph) -> f64 {
    let degrees = graph.degrees();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (u, nbrs) in graph.adjacency.iter().enumerate() {
        for &v in nbrs {
            pairs.push((degrees[u] as f64, degrees[v as usize] as f64));
        }
    }
    if pairs.is_empty() {
        return 0.0;
    }
    let rank = |vals: Vec<f64>| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let ra = rank(pairs.iter().map(|p| p.0).collect());
    let rb = rank(pairs.iter().map(|p| p.1).collect());
    let m = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / m;
    let mb = rb.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..ra.len() {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Per-node local clustering C_i = T_i / C(D_i, 2), 0 when D_i < 2.
pub fn local_clustering(graph: &Graph) -> Vec<f64> {
    let mut tri = vec![0u64; graph.n];
    for (u, nbrs) in graph.adjacency.iter().enumerate() {
        for &v in nbrs {
            if (u as u32) < v {
                // every common neighbor w closes a triangle at u, v, and w
                let mut i = 0;
                let mut j = 0;
                let b = &graph.adjacency[v as usize];
                while i < nbrs.len() && j < b.len() {
                    match nbrs[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            tri[u] += 1;
                            tri[v as usize] += 1;
                            tri[nbrs[i] as usize] += 1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        }
    }
    // each triangle is discovered once per edge, i.e. three times total
    (0..graph.n)
        .map(|i| {
            let d = graph.degree(i) as u64;
            if d < 2 {
                0.0
            } else {
                (tri[i] / 3) as f64 / (d * (d - 1) / 2) as f64
            }
        })
        .collect()
}

/// Hill tail-index path and its median summary.
#[derive(Clone, Debug)]
pub struct TailEstimate {
    pub alpha_hat_path: Vec<(usize, f64)>,
    pub alpha_hat_median: f64,
    pub k_range: (usize, usize),
}

/// Hill estimator over descending order statistics:
/// alpha_hat(k) = [ (1/k) sum_{i<=k} ln(X_(i) / X_(k+1)) ]^{-1}.
pub fn hill_estimate(values: &[f64], k_min: usize, k_max: usize) -> Result<TailEstimate> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::Parameter(format!("need 1 <= k_min <= k_max, got [{k_min}, {k_max}]")));
    }
    let mut pos: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if pos.len() < k_max + 1 {
        return Err(Error::Parameter(format!(
            "need at least k_max+1 = {} positive values, got {}",
            k_max + 1,
            pos.len()
        )));
    }
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let logs: Vec<f64> = pos[..=k_max].iter().map(|&v| v.ln()).collect();
    let mut path = Vec::with_capacity(k_max - k_min + 1);
    let mut prefix = 0.0;
    for k in 1..=k_max {
        prefix += logs[k - 1];
        if k < k_min {
            continue;
        }
        let spacing = prefix / k as f64 - logs[k];
        if spacing <= 0.0 {
            return Err(Error::Domain(format!("degenerate (constant) top order statistics at k={k}")));
        }
        path.push((k, 1.0 / spacing));
    }
    let mut sorted: Vec<f64> = path.iter().map(|p| p.1).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(TailEstimate { alpha_hat_path: path, alpha_hat_median: median, k_range: (k_min, k_max) })
}

/// Hill estimate with the default k-range [ceil(0.01 m+), ceil(0.10 m+)]
/// where m+ counts values >= threshold (default 1).
pub fn hill_estimate_default(values: &[f64], threshold: f64) -> Result<TailEstimate> {
    let m_plus = values.iter().filter(|&&v| v >= threshold).count();
    if m_plus < 20 {
        return Err(Error::Parameter(format!("too few values >= {threshold}: {m_plus}")));
    }
    let k_min = ((0.01 * m_plus as f64).ceil() as usize).max(1);
    let k_max = ((0.10 * m_plus as f64).ceil() as usize).max(k_min);
    let pos_count = values.iter().filter(|&&v| v > 0.0).count();
    let k_max = k_max.min(pos_count.saturating_sub(1));
    hill_estimate(values, k_min, k_max)
}

/// Complementary CDF of degrees: pairs (k, P(D >= k)) for k = 0 ..= max+1.
pub fn degree_ccdf(graph: &Graph) -> Vec<(usize, f64)> {
    if graph.n == 0 {
        return Vec::new();
    }
    let degrees = graph.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 2];
    for &d in &degrees {
        counts[d] += 1;
    }
    let mut out = Vec::with_capacity(max + 2);
    let mut at_least = graph.n;
    for (k, &c) in counts.iter().enumerate() {
        out.push((k, at_least as f64 / graph.n as f64));
        at_least -= c;
    }
    out
}

/// Mean local clustering among nodes of each realized degree k >= 2.
pub fn degree_clustering_curve(graph: &Graph) -> Vec<(usize, f64)> {
    let local = local_clustering(graph);
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (i, &c) in local.iter().enumerate() {
        let d = graph.degree(i);
        if d >= 2 {
            let e = acc.entry(d).or_insert((0.0, 0));
            e.0 += c;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

/// Auxiliary structural metrics: spectral radius, k-core histogram, sampled
/// shortest-path lengths within the largest connected component.
#[derive(Clone, Debug)]
pub struct AuxMetrics {
    pub spectral_radius: f64,
    pub core_histogram: BTreeMap<usize, usize>,
    pub path_lengths: Vec<usize>,
    pub lcc_size: usize,
}

pub fn auxiliary_metrics(graph: &Graph, path_samples: usize, seed: u64) -> AuxMetrics {
    AuxMetrics {
        spectral_radius: spectral_radius(graph),
        core_histogram: core_histogram(graph),
        path_lengths: sample_path_lengths(graph, path_samples, seed).0,
        lcc_size: sample_path_lengths(graph, 0, seed).1,
    }
}

/// Spectral radius of the adjacency matrix via power iteration on the
/// step-norm estimate ||A x_k|| / ||x_k|| (robust to bipartite +/- pairs).
pub fn spectral_radius(graph: &Graph) -> f64 {
    if graph.n == 0 || graph.edge_count() == 0 {
        return 0.0;
    }
    let n = graph.n;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|c| *c /= nx);
    let mut prev = 0.0;
    for _ in 0..1_000 {
        let mut y = vec![0.0; n];
        for (u, nbrs) in graph.adjacency.iter().enumerate() {
            for &v in nbrs {
                y[u] += x[v as usize];
            }
        }
        let ny = norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        if (ny - prev).abs() <= 1e-8 * ny.max(1.0) {
            return ny;
        }
        prev = ny;
        y.iter_mut().for_each(|c| *c /= ny);
        x = y;
    }
    prev
}

/// k-core histogram via standard peeling: node -> its core number, counted.
pub fn core_histogram(graph: &Graph) -> BTreeMap<usize, usize> {
    let n = graph.n;
    let mut degree: Vec<usize> = graph.degrees();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    // bucket sort by current degree
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for (i, &d) in degree.iter().enumerate() {
        bins[d].push(i as u32);
    }
    let mut core = vec![0usize; n];
    let mut removed = vec![false; n];
    let mut k = 0usize;
    let mut processed = 0usize;
    while processed < n {
        let mut d = 0;
        while d <= max_deg && bins[d].is_empty() {
            d += 1;
        }
        if d > max_deg {
            break;
        }
        let v = bins[d].pop().unwrap() as usize;
        if removed[v] || degree[v] != d {
            continue; // stale entry
        }
        k = k.max(d);
        core[v] = k;
        removed[v] = true;
        processed += 1;
        for &u in &graph.adjacency[v] {
            let u = u as usize;
            if !removed[u] && degree[u] > 0 {
                degree[u] -= 1;
                bins[degree[u]].push(u as u32);
            }
        }
    }
    let mut hist = BTreeMap::new();
    for &c in &core {
        *hist.entry(c).or_insert(0usize) += 1;
    }
    hist
}

/// BFS shortest-path lengths over `samples` random source-target pairs
/// inside the largest connected component. Returns (lengths, lcc size).
pub fn sample_path_lengths(graph: &Graph, samples: usize, seed: u64) -> (Vec<usize>, usize) {
    if graph.n == 0 {
        return (Vec::new(), 0);
    }
    // components by BFS
    let mut comp = vec![usize::MAX; graph.n];
    let mut sizes = Vec::new();
    for start in 0..graph.n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut queue = std::collections::VecDeque::from([start]);
        comp[start] = id;
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &graph.adjacency[u] {
                if comp[v as usize] == usize::MAX {
                    comp[v as usize] = id;
                    queue.push_back(v as usize);
                }
            }
        }
        sizes.push(size);
    }
    let (lcc, lcc_size) =
        sizes.iter().enumerate().max_by_key(|(_, &s)| s).map(|(i, &s)| (i, s)).unwrap();
    let members: Vec<usize> = (0..graph.n).filter(|&i| comp[i] == lcc).collect();
    if lcc_size < 2 || samples == 0 {
        return (Vec::new(), lcc_size);
    }
    let mut rng = KeyedRng::new(seed, Stream::MonteCarlo, 0x9a7);
    let mut lengths = Vec::with_capacity(samples);
    let mut dist = vec![usize::MAX; graph.n];
    for _ in 0..samples {
        let s = members[rng.below(members.len() as u64) as usize];
        let mut t = members[rng.below(members.len() as u64) as usize];
        while t == s {
            t = members[rng.below(members.len() as u64) as usize];
        }
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &v in &graph.adjacency[u] {
                if dist[v as usize] == usize::MAX {
                    dist[v as usize] = dist[u] + 1;
                    queue.push_back(v as usize);
                }
            }
        }
        lengths.push(dist[t]);
    }
    (lengths, lcc_size)
}

/// Flat summary of the standard observables.
#[derive(Clone, Debug)]
pub struct StatSummary {
    pub n: usize,
    pub edges: u64,
    pub mean_degree: f64,
    pub transitivity: f64,
    pub assortativity_pearson: f64,
    pub assortativity_spearman: f64,
    pub hill: Option<TailEstimate>,
}

pub fn summarize(graph: &Graph) -> StatSummary {
    let mv = motif_vector(graph);
    let degrees: Vec<f64> = graph.degrees().iter().map(|&d| d as f64).collect();
    StatSummary {
        n: graph.n,
        edges: mv.e_n,
        mean_degree: graph.mean_degree(),
        transitivity: transitivity(&mv),
        assortativity_pearson: assortativity(&mv),
        assortativity_spearman: endpoint_assortativity_spearman(graph),
        hill: hill_estimate_default(&degrees, 1.0).ok(),
    }
}
