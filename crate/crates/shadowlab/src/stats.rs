//! Batch-means statistics for Monte-Carlo loops.

use rayon::prelude::*;

pub const BATCHES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    /// Standard error of the mean from the spread of batch means.
    pub stderr: Vec<f64>,
    pub samples: usize,
}

/// Runs `f` on sample indices 0..n in `BATCHES` contiguous batches and returns
/// the overall mean and batch-means standard error of every output coordinate.
/// Batches run in parallel; the reduction order is fixed, so results do not
/// depend on the thread count.
pub fn batch_means<F>(n: usize, width: usize, f: F) -> BatchStats
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    assert!(n >= 1, "need at least one sample");
    let batches = BATCHES.min(n);
    let sums: Vec<(Vec<f64>, usize)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lo = b * n / batches;
            let hi = (b + 1) * n / batches;
            let mut acc = vec![0.0; width];
            for k in lo..hi {
                let v = f(k);
                debug_assert_eq!(v.len(), width);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            (acc, hi - lo)
        })
        .collect();
    let mut mean = vec![0.0; width];
    for (s, _) in &sums {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut stderr = vec![0.0; width];
    if batches > 1 {
        for (s, cnt) in &sums {
            for ((e, x), m) in stderr.iter_mut().zip(s).zip(&mean) {
                let bm = x / *cnt as f64;
                *e += (bm - m).powi(2);
            }
        }
        let b = batches as f64;
        for e in stderr.iter_mut() {
            *e = (*e / (b - 1.0) / b).sqrt();
        }
    }
    BatchStats { mean, stderr, samples: n }
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (mean, var)
}

/// Median of the means of K contiguous groups; K = 1 is the plain mean.
pub fn median_of_means(xs: &[f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= xs.len(), "need 1 ≤ K ≤ N");
    if k == 1 {
        return xs.iter().sum::<f64>() / xs.len() as f64;
    }
    let n = xs.len();
    let mut means: Vec<f64> = (0..k)
        .map(|g| {
            let lo = g * n / k;
            let hi = (g + 1) * n / k;
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
