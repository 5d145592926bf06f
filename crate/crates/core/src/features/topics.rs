//! Topic clustering of post embeddings: seeded k-means with restarts, an
//! inertia curve over candidate cluster counts, and the elbow choice.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenize;
use crate::error::{Error, Result};

pub const RESTARTS: usize = 10;
pub const MAX_LLOYD_ITERATIONS: usize = 300;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares per candidate k.
    pub inertia_curve: BTreeMap<usize, f64>,
    #[serde(default)]
    pub top_terms: Vec<Vec<String>>,
}

impl TopicModel {
    pub fn dimension(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Index of the nearest centroid, lowest index on ties.
    pub fn assign(&self, v: &[f64]) -> Result<usize> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        Ok(nearest(&self.centroids, v).0)
    }
}

#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.gen_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansRun {
    let dim = points[0].len();
    let k = centroids.len();
    let mut assignments = vec![0; points.len()];
    let mut prev = f64::INFINITY;
    let mut inertia = 0.0;
    let mut iterations = 0;
    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        inertia = 0.0;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (i, d) = nearest(&centroids, p);
            *a = i;
            inertia += d;
        }
        if inertia == 0.0 || (prev - inertia).abs() <= RELATIVE_TOLERANCE * prev {
            break;
        }
        prev = inertia;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            // an emptied cluster keeps its previous centre
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
    }
    KMeansRun {
        centroids,
        assignments,
        inertia,
        iterations,
    }
}

/// Best of [`RESTARTS`] seeded k-means runs. Restart `r` draws from ChaCha8
/// stream `k * 1000 + r` of `seed`, so results are reproducible bit for bit.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansRun> {
    check_points(points)?;
    if k == 0 || k > points.len() {
        return Err(Error::InvalidInput(format!(
            "cannot form {k} clusters from {} vectors",
            points.len()
        )));
    }
    let mut best: Option<KMeansRun> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((k * 1000 + restart) as u64);
        let run = lloyd(points, plus_plus_seeds(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn check_points(points: &[Vec<f64>]) -> Result<()> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::EmptyDataset("no vectors to cluster".into()))?;
    if dim == 0 {
        return Err(Error::InvalidInput("zero-dimensional vectors".into()));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    Ok(())
}

fn total_sum_of_squares(points: &[Vec<f64>]) -> f64 {
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= points.len() as f64);
    points.iter().map(|p| sq_dist(p, &mean)).sum()
}

/// Picks k with the largest discrete second difference
/// `I(k-1) - 2 I(k) + I(k+1)` of the inertia curve, smallest k on ties.
/// `curve` must contain `k_min - 1` through `k_max`.
pub fn elbow(curve: &BTreeMap<usize, f64>, k_min: usize, k_max: usize) -> usize {
    if k_max <= k_min {
        return k_min;
    }
    let mut best = (k_min, f64::NEG_INFINITY);
    for k in k_min..k_max {
        let second = curve[&(k - 1)] - 2.0 * curve[&k] + curve[&(k + 1)];
        if second > best.1 {
            best = (k, second);
        }
    }
    best.0
}

/// Clusters `vectors` for each k in `k_min..=k_max` and keeps the elbow.
/// Returns the model and the per-vector topic assignment.
pub fn fit_topics(vectors: &[Vec<f64>], k_min: usize, k_max: usize, seed: u64) -> Result<(TopicModel, Vec<usize>)> {
    check_points(vectors)?;
    if k_min < 2 || k_max < k_min || k_max > vectors.len() {
        return Err(Error::InvalidInput(format!(
            "k range [{k_min}, {k_max}] must lie within [2, {}]",
            vectors.len()
        )));
    }
    let mut runs = BTreeMap::new();
    let mut curve = BTreeMap::new();
    for k in (k_min - 1)..=k_max {
        let inertia = if k == 1 {
            total_sum_of_squares(vectors)
        } else {
            let run = kmeans(vectors, k, seed)?;
            let inertia = run.inertia;
            runs.insert(k, run);
            inertia
        };
        curve.insert(k, inertia);
    }
    let k = elbow(&curve, k_min, k_max);
    let centroids = runs.remove(&k).expect("run for chosen k").centroids;
    let model = TopicModel {
        k,
        centroids,
        inertia_curve: curve.into_iter().filter(|(c, _)| *c >= k_min).collect(),
        top_terms: Vec::new(),
    };
    let assignments = vectors
        .iter()
        .map(|v| model.assign(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((model, assignments))
}

pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "aren",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
    "could", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don", "down", "during", "each", "even",
    "every", "few", "for", "from", "further", "get", "got", "had", "hadn", "has", "hasn", "have", "haven",
    "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if", "im", "in",
    "into", "is", "isn", "it", "its", "itself", "just", "ll", "m", "me", "might", "more", "most", "much",
    "must", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "one", "only", "or", "other",
    "our", "ours", "ourselves", "out", "over", "own", "re", "really", "s", "same", "she", "should", "shouldn",
    "so", "some", "still", "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "us", "ve",
    "very", "was", "wasn", "we", "were", "weren", "what", "when", "where", "which", "while", "who", "whom",
    "why", "will", "with", "won", "would", "wouldn", "you", "your", "yours", "yourself", "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Most frequent non-stopword tokens per cluster, ties lexicographic.
pub fn top_terms(cluster_texts: &[Vec<String>], m: usize) -> Vec<Vec<String>> {
    cluster_texts
        .iter()
        .map(|texts| {
            let mut counts: HashMap<String, usize> = HashMap::new();
            for t in texts {
                for tok in tokenize(t) {
                    if !is_stopword(&tok) {
                        *counts.entry(tok).or_default() += 1;
                    }
                }
            }
            let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.into_iter().take(m).map(|(t, _)| t).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn clouds(n_clouds: usize, per: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let mut out = Vec::new();
        for _ in 0..n_clouds {
            let centre: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
            for _ in 0..per {
                out.push(centre.iter().map(|c| c + noise.sample(&mut rng)).collect());
            }
        }
        out
    }

    #[test]
    fn stopwords_sorted() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!(STOPWORDS.len() >= 150);
    }

    #[test]
    fn elbow_finds_four_clouds() {
        let pts = clouds(4, 40, 10, 7);
        let (model, assign) = fit_topics(&pts, 2, 8, 1).unwrap();
        assert_eq!(model.k, 4);
        assert_eq!(assign.len(), pts.len());
        for k in 2..8 {
            assert!(model.inertia_curve[&k] >= model.inertia_curve[&(k + 1)] - 1e-9);
        }
        // each planted cloud maps to one topic
        for c in 0..4 {
            let first = assign[c * 40];
            assert!(assign[c * 40..(c + 1) * 40].iter().all(|&a| a == first));
        }
    }

    #[test]
    fn elbow_finds_two_clouds() {
        let pts = clouds(2, 50, 5, 3);
        let (model, _) = fit_topics(&pts, 2, 8, 9).unwrap();
        assert_eq!(model.k, 2);
    }

    #[test]
    fn identical_vectors() {
        let pts = vec![vec![1.0, 2.0]; 6];
        let (model, assign) = fit_topics(&pts, 2, 2, 0).unwrap();
        assert_eq!(model.k, 2);
        assert_eq!(model.inertia_curve[&2], 0.0);
        assert!(assign.iter().all(|&a| a == assign[0]));
    }

    #[test]
    fn bad_ranges() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(fit_topics(&pts, 2, 4, 0).is_err());
        assert!(fit_topics(&pts, 1, 2, 0).is_err());
        assert!(fit_topics(&[], 2, 2, 0).is_err());
        assert!(fit_topics(&[vec![0.0], vec![0.0, 1.0]], 2, 2, 0).is_err());
    }

    #[test]
    fn reproducible() {
        let pts = clouds(3, 30, 6, 11);
        let (a, aa) = fit_topics(&pts, 2, 6, 42).unwrap();
        let (b, bb) = fit_topics(&pts, 2, 6, 42).unwrap();
        assert_eq!(aa, bb);
        assert_eq!(a.centroids, b.centroids);
        let ia: Vec<u64> = a.inertia_curve.values().map(|v| v.to_bits()).collect();
        let ib: Vec<u64> = b.inertia_curve.values().map(|v| v.to_bits()).collect();
        assert_eq!(ia, ib);
    }

    #[test]
    fn elbow_rule_by_hand() {
        let curve: BTreeMap<usize, f64> = [(1, 100.0), (2, 60.0), (3, 50.0), (4, 45.0)].into();
        // second differences: k=2 -> 30, k=3 -> 5
        assert_eq!(elbow(&curve, 2, 4), 2);
        assert_eq!(elbow(&curve, 3, 3), 3);
    }

    #[test]
    fn top_terms_cases() {
        let t = top_terms(&[vec!["pain pain life".into()]], 2);
        assert_eq!(t, vec![vec!["pain".to_string(), "life".to_string()]]);
        assert_eq!(top_terms(&[vec![]], 3), vec![Vec::<String>::new()]);
        let t = top_terms(
            &[
                vec!["the cat and the dog".into(), "cat".into()],
                vec!["rain in the sky".into()],
            ],
            5,
        );
        assert_eq!(t[0], vec!["cat".to_string(), "dog".to_string()]);
        assert_eq!(t[1], vec!["rain".to_string(), "sky".to_string()]);
        assert!(t[0].iter().all(|w| !t[1].contains(w)));
    }
}
