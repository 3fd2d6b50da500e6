use super::SimError;

/// Order-statistic quantile with the "higher" rule: `sorted[ceil(q (n - 1))]`.
pub fn empirical_quantile(samples: &[f64], q: f64) -> Result<f64, SimError> {
    SortedSamples::new(samples.to_vec()).quantile(q)
}

/// Whether `n` samples leave at least 100 in the tail beyond `q`.
pub fn quantile_reliable(n: usize, q: f64) -> bool {
    (1.0 - q) * n as f64 >= 100.0
}

/// Samples sorted once for repeated quantile and tail queries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortedSamples {
    values: Vec<f64>,
}

impl SortedSamples {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantile(&self, q: f64) -> Result<f64, SimError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(SimError::Invalid(format!("quantile level {q} outside (0, 1)")));
        }
        if self.values.is_empty() {
            return Err(SimError::Empty);
        }
        let idx = (q * (self.values.len() - 1) as f64).ceil() as usize;
        Ok(self.values[idx.min(self.values.len() - 1)])
    }

    /// Fraction of samples strictly above `x`.
    pub fn exceedance(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let at_most = self.values.partition_point(|&v| v <= x);
        (self.values.len() - at_most) as f64 / self.values.len() as f64
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }
}
