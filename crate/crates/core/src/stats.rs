//! Deterministic reductions and simple error estimates.

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `log Σ exp(x_i)`; `-inf` for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Combines two log-domain partial sums.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanError {
    pub mean: f64,
    /// Standard error of the mean (unbiased sample variance over `n`).
    pub stderr: f64,
    pub variance: f64,
    pub count: usize,
}

impl MeanError {
    /// `(mean - reference) / stderr`; zero when both the error and the offset vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if self.stderr == 0.0 {
            if diff.abs() <= 1e-12 * reference.abs().max(1.0) {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        } else {
            diff / self.stderr
        }
    }
}

pub fn mean_error(xs: &[f64]) -> MeanError {
    let n = xs.len();
    if n == 0 {
        return MeanError {
            mean: f64::NAN,
            stderr: f64::NAN,
            variance: f64::NAN,
            count: 0,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let variance = if n > 1 {
        pairwise_sum(&dev) / (n - 1) as f64
    } else {
        0.0
    };
    MeanError {
        mean,
        stderr: (variance / n as f64).sqrt(),
        variance,
        count: n,
    }
}

/// Mean with a batch-means error estimate for correlated series.
pub fn batch_means(xs: &[f64], batches: usize) -> MeanError {
    let batches = batches.max(2).min(xs.len().max(1));
    let len = xs.len() / batches;
    if len == 0 {
        return mean_error(xs);
    }
    let used = &xs[..len * batches];
    let means: Vec<f64> = used
        .chunks(len)
        .map(|c| pairwise_sum(c) / len as f64)
        .collect();
    let b = mean_error(&means);
    MeanError {
        mean: pairwise_sum(used) / used.len() as f64,
        stderr: b.stderr,
        variance: b.variance * len as f64,
        count: used.len(),
    }
}
