//! Seeded, deterministic k-means with k-means++ initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use muskit_dsp::{FrameKind, FrameMatrix};

use crate::TokenError;

/// A flat K x D centroid matrix plus the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centroids: Vec<f64>,
    k: usize,
    dim: usize,
    pub feature_kind: FrameKind,
    pub seed: u64,
}

impl Codebook {
    pub fn new(
        centroids: Vec<f64>,
        k: usize,
        dim: usize,
        feature_kind: FrameKind,
        seed: u64,
    ) -> Result<Self, TokenError> {
        if centroids.len() != k * dim || k == 0 || dim == 0 {
            return Err(TokenError::Dimension {
                expected: k * dim,
                got: centroids.len(),
            });
        }
        Ok(Codebook {
            centroids,
            k,
            dim,
            feature_kind,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    /// Index of the nearest centroid by squared Euclidean distance; ties go
    /// to the lowest index.
    pub fn nearest(&self, frame: &[f64]) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for i in 0..self.k {
            let d = sq_dist(self.centroid(i), frame);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

pub(crate) const DEFAULT_MAX_ITERS: usize = 100;
pub(crate) const DEFAULT_TOL: f64 = 1e-6;

/// Fits a codebook with Lloyd iterations from k-means++ seeding.
///
/// Deterministic in (data, k, seed, max_iters, tol). Empty clusters are
/// re-seeded to the point farthest from its assigned centroid. Stops when
/// the largest centroid movement drops below `tol` or after `max_iters`.
pub fn kmeans_fit(
    data: &FrameMatrix,
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<Codebook, TokenError> {
    kmeans_fit_trace(data, k, seed, max_iters, tol).map(|(cb, _)| cb)
}

/// Like [`kmeans_fit`], also returning the within-cluster sum of squares
/// after each assignment step (non-increasing by construction).
pub fn kmeans_fit_trace(
    data: &FrameMatrix,
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<(Codebook, Vec<f64>), TokenError> {
    let t = data.rows();
    let dim = data.dim();
    if k == 0 {
        return Err(TokenError::InsufficientData { frames: t, k });
    }
    if t < k {
        return Err(TokenError::InsufficientData { frames: t, k });
    }
    data.validate()
        .map_err(|e| TokenError::BadData(e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(data, k, &mut rng);

    let mut assignment = vec![0usize; t];
    let mut wcss_trace = Vec::new();
    let mut prev_wcss = f64::INFINITY;

    for _ in 0..max_iters {
        // assignment step
        let mut wcss = 0.0f64;
        for (i, frame) in data.iter_rows().enumerate() {
            let (best, d) = nearest_of(&centroids, dim, frame);
            assignment[i] = best;
            wcss += d;
        }
        assert!(
            wcss <= prev_wcss * (1.0 + 1e-9) + 1e-12,
            "WCSS increased: {prev_wcss} -> {wcss}"
        );
        prev_wcss = wcss;
        wcss_trace.push(wcss);

        // update step: means in input order
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (i, frame) in data.iter_rows().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(frame) {
                *s += v;
            }
        }

        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] == 0 {
                continue; // handled below
            }
            for d in 0..dim {
                new_centroids[c * dim + d] = sums[c * dim + d] / counts[c] as f64;
            }
        }

        // re-seed empty clusters to the point farthest from its centroid
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far_idx = 0usize;
            let mut far_d = -1.0f64;
            for (i, frame) in data.iter_rows().enumerate() {
                let d = sq_dist(
                    &new_centroids[assignment[i] * dim..(assignment[i] + 1) * dim],
                    frame,
                );
                if d > far_d {
                    far_d = d;
                    far_idx = i;
                }
            }
            let frame = data.row(far_idx);
            new_centroids[c * dim..(c + 1) * dim].copy_from_slice(frame);
            // moving a point to its own cluster cannot raise the objective
            assignment[far_idx] = c;
        }

        // convergence: largest centroid movement
        let mut moved = 0.0f64;
        for c in 0..k {
            let m = sq_dist(
                &centroids[c * dim..(c + 1) * dim],
                &new_centroids[c * dim..(c + 1) * dim],
            )
            .sqrt();
            moved = moved.max(m);
        }
        centroids = new_centroids;
        if moved < tol {
            break;
        }
    }

    // final assignment so the reported WCSS matches the returned centroids
    let mut wcss = 0.0f64;
    for frame in data.iter_rows() {
        let (_, d) = nearest_of(&centroids, dim, frame);
        wcss += d;
    }
    assert!(
        wcss <= prev_wcss * (1.0 + 1e-9) + 1e-12,
        "WCSS increased on final assignment: {prev_wcss} -> {wcss}"
    );
    wcss_trace.push(wcss);

    let cb = Codebook::new(centroids, k, dim, data.kind, seed)?;
    Ok((cb, wcss_trace))
}

fn nearest_of(centroids: &[f64], dim: usize, frame: &[f64]) -> (usize, f64) {
    let k = centroids.len() / dim;
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for c in 0..k {
        let d = sq_dist(&centroids[c * dim..(c + 1) * dim], frame);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++: first centroid uniform, then proportional to squared distance
/// from the nearest chosen centroid.
fn plus_plus_init(data: &FrameMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let t = data.rows();
    let dim = data.dim();
    let mut centroids = Vec::with_capacity(k * dim);

    let first = rng.gen_range(0..t);
    centroids.extend_from_slice(data.row(first));

    let mut dists: Vec<f64> = data
        .iter_rows()
        .map(|f| sq_dist(f, data.row(first)))
        .collect();

    for _ in 1..k {
        let total: f64 = dists.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = t - 1;
            for (i, &d) in dists.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // all mass collapsed (duplicate points); any index works
            rng.gen_range(0..t)
        };
        let new_centroid = data.row(chosen).to_vec();
        for (i, frame) in data.iter_rows().enumerate() {
            let d = sq_dist(frame, &new_centroid);
            if d < dists[i] {
                dists[i] = d;
            }
        }
        centroids.extend_from_slice(&new_centroid);
    }
    centroids
}
