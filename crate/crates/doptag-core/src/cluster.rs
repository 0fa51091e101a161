//! Spectral clustering of receiver depth coordinates into photographic rows.
//!
//! Affinities W_ij = exp(-((y_i - y_j)/scale)^2), degree matrix D, Laplacian
//! L = D - W, eigendecomposition, then k-means on the spectral embedding with
//! deterministic initialization. Rows are ordered by ascending mean depth.

#[allow(unused_imports)] // shadowed by std's f64 methods under cargo test
use crate::math::FloatExt;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Symmetric affinity matrix with its degree matrix and unnormalized
/// Laplacian, all stored dense row-major (receiver counts are tiny).
#[derive(Debug, Clone)]
pub struct AffinitySet {
    pub n: usize,
    pub w: Vec<f64>,
    pub d: Vec<f64>,
    pub lap: Vec<f64>,
}

impl AffinitySet {
    pub fn w_at(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
    pub fn lap_at(&self, i: usize, j: usize) -> f64 {
        self.lap[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowAssignment {
    /// Cluster index per receiver, remapped so that index 0 is the row with
    /// the smallest mean depth.
    pub labels: Vec<usize>,
    /// Permutation of cluster indices by ascending mean depth. After the
    /// remap this is the identity; kept for the serialized report.
    pub row_order: Vec<usize>,
    /// Mean depth per cluster, ascending.
    pub row_means: Vec<f64>,
    /// Set when k-means hit its iteration cap before converging.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterError {
    EmptyInput,
    TooManyClusters { k: usize, n: usize },
    BadScale,
}

impl core::fmt::Display for ClusterError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ClusterError::EmptyInput => write!(f, "no depth values"),
            ClusterError::TooManyClusters { k, n } => {
                write!(f, "k = {k} exceeds point count {n}")
            }
            ClusterError::BadScale => write!(f, "affinity scale must be positive"),
        }
    }
}

/// Build W, D and L = D - W from depth values. W is symmetrized after
/// construction so the invariants hold exactly.
pub fn build_laplacian(ys: &[f64], scale: f64) -> Result<AffinitySet, ClusterError> {
    if ys.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    if !(scale > 0.0) {
        return Err(ClusterError::BadScale);
    }
    let n = ys.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let d = (ys[i] - ys[j]) / scale;
            let a = (-d * d).exp();
            w[i * n + j] = a;
            w[j * n + i] = a;
        }
    }
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = w[i * n..(i + 1) * n].iter().sum();
    }
    let mut lap = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            lap[i * n + j] = if i == j { d[i] } else { 0.0 } - w[i * n + j];
        }
    }
    Ok(AffinitySet { n, w, d, lap })
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues ascending, eigenvectors as columns in row-major
/// storage aligned with the eigenvalue order).
pub fn symmetric_eigen(mat: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = mat.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            eigvecs[k * n + new_col] = v[k * n + old_col];
        }
    }
    (eigvals, eigvecs)
}

/// Eigengap heuristic for the row count: the k in 1..=k_max maximizing
/// lambda_{k+1} - lambda_k on the ascending Laplacian spectrum. Falls back to
/// 1 when every gap is below 1e-9.
pub fn estimate_row_count(aff: &AffinitySet, k_max: usize) -> usize {
    let n = aff.n;
    if n <= 1 || k_max <= 1 {
        return 1;
    }
    let (eigvals, _) = symmetric_eigen(&aff.lap, n);
    let upper = k_max.min(n - 1);
    let mut best_k = 1;
    let mut best_gap = 0.0;
    for k in 1..=upper {
        // gap between lambda_k and lambda_{k+1}, ascending 1-based spectrum
        let gap = eigvals[k] - eigvals[k - 1];
        if gap > best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    if best_gap < 1e-9 {
        1
    } else {
        best_k
    }
}

/// Deterministic k-means on a 1-D slice of the embedding: centers start at
/// quantiles of the first nontrivial coordinate, iterate to a cap.
fn kmeans_embedding(embedding: &[f64], n: usize, k: usize) -> (Vec<usize>, bool) {
    // embedding: n rows x k columns, row-major
    let init_coord: Vec<f64> = if k > 1 {
        (0..n).map(|i| embedding[i * k + 1]).collect()
    } else {
        (0..n).map(|i| embedding[i * k]).collect()
    };
    let mut sorted = init_coord.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // centers at the (2j+1)/(2k) quantiles in all k embedding dims
    let mut centers = vec![0.0; k * k];
    for j in 0..k {
        let q = ((2 * j + 1) * n) / (2 * k);
        let q = q.min(n - 1);
        let target = sorted[q];
        // seed the center with the point whose init coordinate is nearest
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &c) in init_coord.iter().enumerate() {
            let d = (c - target).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        centers[j * k..(j + 1) * k].copy_from_slice(&embedding[best * k..(best + 1) * k]);
    }
    let mut labels = vec![0usize; n];
    let mut converged = false;
    for _ in 0..200 {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for j in 0..k {
                let mut d = 0.0;
                for c in 0..k {
                    let diff = embedding[i * k + c] - centers[j * k + c];
                    d += diff * diff;
                }
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![0.0; k * k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for c in 0..k {
                sums[labels[i] * k + c] += embedding[i * k + c];
            }
        }
        let mut reseeded = false;
        for j in 0..k {
            if counts[j] > 0 {
                for c in 0..k {
                    centers[j * k + c] = sums[j * k + c] / counts[j] as f64;
                }
            } else {
                // empty cluster (two seeds landed in one group): reseed at
                // the point farthest from its assigned center
                let mut far = 0;
                let mut far_d = -1.0;
                for i in 0..n {
                    let base = labels[i] * k;
                    let mut d = 0.0;
                    for c in 0..k {
                        let diff = embedding[i * k + c] - centers[base + c];
                        d += diff * diff;
                    }
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                centers[j * k..(j + 1) * k]
                    .copy_from_slice(&embedding[far * k..(far + 1) * k]);
                reseeded = true;
            }
        }
        if !changed && !reseeded {
            converged = true;
            break;
        }
    }
    (labels, converged)
}

/// Cluster depth values into `k` rows (or estimate k via the eigengap when
/// `None`). Labels come back remapped so cluster 0 is the nearest row.
pub fn cluster_rows(
    ys: &[f64],
    k: Option<usize>,
    scale: f64,
) -> Result<RowAssignment, ClusterError> {
    let n = ys.len();
    let aff = build_laplacian(ys, scale)?;
    let k = match k {
        Some(k) => {
            if k < 1 || k > n {
                return Err(ClusterError::TooManyClusters { k, n });
            }
            k
        }
        None => estimate_row_count(&aff, n.min(8)),
    };
    if k == 1 {
        let mean = ys.iter().sum::<f64>() / n as f64;
        return Ok(RowAssignment {
            labels: vec![0; n],
            row_order: vec![0],
            row_means: vec![mean],
            converged: true,
        });
    }
    let (_, eigvecs) = symmetric_eigen(&aff.lap, n);
    // embedding: coordinates in the k smallest eigenvectors
    let mut embedding = vec![0.0; n * k];
    for i in 0..n {
        for c in 0..k {
            embedding[i * k + c] = eigvecs[i * n + c];
        }
    }
    let (raw_labels, converged) = kmeans_embedding(&embedding, n, k);
    // mean depth per raw cluster (Eq-10 style row means)
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for i in 0..n {
        sums[raw_labels[i]] += ys[i];
        counts[raw_labels[i]] += 1;
    }
    let mut means: Vec<(usize, f64)> = (0..k)
        .map(|j| {
            let m = if counts[j] > 0 {
                sums[j] / counts[j] as f64
            } else {
                f64::INFINITY
            };
            (j, m)
        })
        .collect();
    means.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut remap = vec![0usize; k];
    for (new_idx, (old_idx, _)) in means.iter().enumerate() {
        remap[*old_idx] = new_idx;
    }
    let labels: Vec<usize> = raw_labels.iter().map(|&l| remap[l]).collect();
    let row_means: Vec<f64> = means.iter().map(|(_, m)| *m).collect();
    Ok(RowAssignment {
        labels,
        row_order: (0..k).collect(),
        row_means,
        converged,
    })
}
