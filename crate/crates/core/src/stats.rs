//! Compensated accumulation and small-sample moment estimators.
//!
//! Every reduction that feeds a published number runs through Neumaier
//! summation in a fixed index order, so results do not depend on thread
//! count or partitioning.

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator in its own order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance (denominator n - 1), two-pass.
pub fn variance(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2);
    let m = mean(xs);
    let ss = compensated_sum(xs.iter().map(|&x| (x - m) * (x - m)));
    ss / (xs.len() - 1) as f64
}

/// Unbiased sample covariance, two-pass.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let mx = mean(xs);
    let my = mean(ys);
    let ss = compensated_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    ss / (xs.len() - 1) as f64
}

/// Standard error of `metric` estimated from `n_batches` contiguous batches.
///
/// The metric is evaluated on each batch (pairs of slices), the spread of the
/// batch values divided by sqrt(n_batches). Panics unless the sample splits
/// into batches of at least two points each.
pub fn batch_standard_error<F>(xs: &[f64], ys: &[f64], n_batches: usize, metric: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    assert!(xs.len() == ys.len());
    assert!(n_batches >= 2 && xs.len() >= 2 * n_batches);
    let values: Vec<f64> = batch_ranges(xs.len(), n_batches)
        .map(|(lo, hi)| metric(&xs[lo..hi], &ys[lo..hi]))
        .collect();
    (variance(&values) / n_batches as f64).sqrt()
}

/// Contiguous near-equal batch boundaries covering `len` samples.
pub fn batch_ranges(len: usize, n_batches: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_batches).map(move |b| (b * len / n_batches, (b + 1) * len / n_batches))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_handles_cancellation() {
        // Naive summation of this sequence loses the 1.0 entirely.
        let xs = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(xs.iter().copied()), 1.0);
    }

    #[test]
    fn moments_on_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((covariance(&xs, &ys) - 10.0 / 3.0).abs() < 1e-14);
        // Covariance of a variable with itself is its variance.
        assert!((covariance(&xs, &xs) - variance(&xs)).abs() < 1e-15);
    }

    #[test]
    fn batch_ranges_cover_everything() {
        let ranges: Vec<_> = batch_ranges(103, 10).collect();
        assert_eq!(ranges.len(), 10);
        assert_eq!(ranges[0].0, 0);
        assert_eq!(ranges[9].1, 103);
        for w in ranges.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn batch_error_scales_with_spread() {
        // Alternating sample: batch means split into two values around 0.
        let xs: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ys = xs.clone();
        let se = batch_standard_error(&xs, &ys, 10, |a, _| mean(a));
        assert!(se.abs() < 1e-12);
        let trending: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let se_trend = batch_standard_error(&trending, &ys, 10, |a, _| mean(a));
        assert!(se_trend > 1.0);
    }
}
