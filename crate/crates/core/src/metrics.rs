//! Quantitative evaluation: proportion entropy, the normal-compositional
//! log-likelihood, spectral angles, and optimal topic matching.

use crate::density::log_gaussian_iso;
use crate::error::{Error, Result};
use crate::types::{HyperspectralCube, Simplex};

/// Entries below this contribute zero to the entropy sum.
const ENTROPY_FLOOR: f64 = 1e-12;

/// Total proportion entropy `H(P) = -sum_n sum_k p_nk ln p_nk`, with
/// `0 ln 0 = 0`. Lies in `[0, N ln K]`.
pub fn proportion_entropy(proportions: &[Simplex]) -> f64 {
    proportions
        .iter()
        .flat_map(|row| row.weights())
        .map(|&p| if p > ENTROPY_FLOOR { -p * p.ln() } else { 0.0 })
        .sum()
}

/// Overall fit of the data under the normal compositional model:
/// `sum_n ln N(x_n | sum_k p_nk e_k, (sum_k p_nk^2 sigma2_k) I)`.
pub fn ncm_log_likelihood(
    cube: &HyperspectralCube,
    means: &[Vec<f64>],
    proportions: &[Simplex],
    sigma2s: &[f64],
) -> Result<f64> {
    let k = means.len();
    if sigma2s.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: sigma2s.len(),
            context: "per-topic variance count",
        });
    }
    if proportions.len() != cube.num_pixels() {
        return Err(Error::DimensionMismatch {
            expected: cube.num_pixels(),
            got: proportions.len(),
            context: "proportion rows vs pixels",
        });
    }
    let bands = cube.bands();
    for mean in means {
        if mean.len() != bands {
            return Err(Error::DimensionMismatch {
                expected: bands,
                got: mean.len(),
                context: "endmember mean length",
            });
        }
    }
    let mut total = 0.0;
    let mut mixed_mean = vec![0.0; bands];
    for (n, row) in proportions.iter().enumerate() {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: row.len(),
                context: "proportion row length",
            });
        }
        mixed_mean.iter_mut().for_each(|v| *v = 0.0);
        let mut mixed_var = 0.0;
        for ((&p, mean), &s2) in row.weights().iter().zip(means).zip(sigma2s) {
            for (acc, &m) in mixed_mean.iter_mut().zip(mean) {
                *acc += p * m;
            }
            mixed_var += p * p * s2;
        }
        if !(mixed_var > 0.0) {
            return Err(Error::ZeroMixedVariance { pixel: n });
        }
        total += log_gaussian_iso(cube.pixel(n), &mixed_mean, mixed_var);
    }
    Ok(total)
}

/// Angle between two spectra in radians: `arccos(<a,b> / (|a||b|))`.
pub fn spectral_angle(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
            context: "spectral angle operands",
        });
    }
    let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return Err(Error::NonpositiveValue {
            name: "vector norm",
            value: 0.0,
        });
    }
    // acos(dot) loses ~sqrt(eps) accuracy near parallel vectors; the
    // atan2 form is accurate over the whole range.
    let mut diff2 = 0.0;
    let mut sum2 = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let u = x / na;
        let v = y / nb;
        diff2 += (u - v) * (u - v);
        sum2 += (u + v) * (u + v);
    }
    Ok(2.0 * diff2.sqrt().atan2(sum2.sqrt()))
}

/// Result of matching estimated topics to reference topics.
#[derive(Debug, Clone)]
pub struct TopicMatching {
    /// `assignment[k]` is the reference topic matched to estimated topic `k`.
    pub assignment: Vec<usize>,
    /// Spectral angle of each matched pair, indexed by estimated topic.
    pub per_topic_sad: Vec<f64>,
    pub mean_sad: f64,
}

/// Match estimated endmembers to reference endmembers by minimizing total
/// spectral angle over all permutations (Hungarian assignment on the K x K
/// angle matrix).
pub fn match_topics(estimated: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<TopicMatching> {
    if estimated.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: estimated.len(),
            context: "topic counts for matching",
        });
    }
    let k = estimated.len();
    let mut cost = vec![vec![0.0; k]; k];
    for (i, est) in estimated.iter().enumerate() {
        for (j, refm) in reference.iter().enumerate() {
            cost[i][j] = spectral_angle(est, refm)?;
        }
    }
    let assignment = min_cost_assignment(&cost);
    let per_topic_sad: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    let mean_sad = per_topic_sad.iter().sum::<f64>() / k as f64;
    Ok(TopicMatching {
        assignment,
        per_topic_sad,
        mean_sad,
    })
}

/// Hungarian algorithm (shortest augmenting path with potentials) for square
/// cost matrices. Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials; p[j] is the row matched to column j
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Root mean squared error between two proportion maps over all pixels and
/// topics, with estimated topic `k` compared against reference topic
/// `assignment[k]`.
pub fn proportion_rmse(
    estimated: &[Simplex],
    reference: &[Simplex],
    assignment: &[usize],
) -> Result<f64> {
    if estimated.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: estimated.len(),
            context: "proportion row counts",
        });
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for (est, refr) in estimated.iter().zip(reference) {
        for (k, &j) in assignment.iter().enumerate() {
            let d = est.weights()[k] - refr.weights()[j];
            acc += d * d;
            count += 1;
        }
    }
    Ok((acc / count as f64).sqrt())
}
