use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with fake news (label 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: &[u8], actual: &[u8]) -> Result<Confusion> {
        if predicted.len() != actual.len() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} labels",
                predicted.len(),
                actual.len()
            )));
        }
        let mut c = Confusion::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }

    pub fn metrics(&self) -> Metrics {
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = div(self.tp, self.tp + self.fp);
        let recall = div(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            accuracy: div(self.tp + self.tn, self.total()),
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn to_array(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }

    fn from_array(a: [f64; 4]) -> Metrics {
        Metrics {
            accuracy: a[0],
            precision: a[1],
            recall: a[2],
            f1: a[3],
        }
    }

    /// Per-metric mean and (population) standard deviation.
    pub fn mean_sd(items: &[Metrics]) -> (Metrics, Metrics) {
        if items.is_empty() {
            return (Metrics::default(), Metrics::default());
        }
        let n = items.len() as f64;
        let mut mean = [0.0; 4];
        for m in items {
            mean.iter_mut().zip(m.to_array()).for_each(|(a, v)| *a += v / n);
        }
        let mut var = [0.0; 4];
        for m in items {
            var.iter_mut()
                .zip(m.to_array().iter().zip(&mean))
                .for_each(|(a, (v, mu))| *a += (v - mu) * (v - mu) / n);
        }
        (Metrics::from_array(mean), Metrics::from_array(var.map(f64::sqrt)))
    }
}
