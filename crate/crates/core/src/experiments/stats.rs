//! Per-class summaries: five-number box statistics and score histograms.

use serde::Serialize;

use super::plot::FiveNumbers;

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn five_numbers(values: &[f64]) -> FiveNumbers {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    [
        quantile(&v, 0.0),
        quantile(&v, 0.25),
        quantile(&v, 0.5),
        quantile(&v, 0.75),
        quantile(&v, 1.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRow {
    pub feature: String,
    pub class: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxRow {
    pub fn new(feature: &str, class: &str, values: &[f64]) -> BoxRow {
        let f = five_numbers(values);
        BoxRow {
            feature: feature.to_string(),
            class: class.to_string(),
            n: values.len(),
            min: f[0],
            q1: f[1],
            median: f[2],
            q3: f[3],
            max: f[4],
        }
    }

    pub fn five(&self) -> FiveNumbers {
        [self.min, self.q1, self.median, self.q3, self.max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub class: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
    /// Count / (n · bin width): an estimate of the probability density.
    pub density: f64,
}

/// Equal-width histogram over [lo, hi]; the last bin is closed.
pub fn histogram(class: &str, values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<HistogramRow> {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v < lo || v > hi || width <= 0.0 {
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = values.len().max(1) as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| HistogramRow {
            class: class.to_string(),
            bin_lo: lo + width * i as f64,
            bin_hi: lo + width * (i + 1) as f64,
            count: c,
            density: if width > 0.0 { c as f64 / (n * width) } else { 0.0 },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        assert_eq!(five_numbers(&[4.0, 1.0, 3.0, 2.0, 5.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(five_numbers(&[]), [0.0; 5]);
        assert_eq!(quantile(&[0.0, 1.0], 0.5), 0.5);
    }

    #[test]
    fn histogram_density_integrates_to_one() {
        let h = histogram("fake", &[0.0, 0.1, 0.5, 1.0], 0.0, 1.0, 4);
        assert_eq!(h.iter().map(|r| r.count).sum::<usize>(), 4);
        let area: f64 = h.iter().map(|r| r.density * (r.bin_hi - r.bin_lo)).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(h[3].count, 1);
    }
}
