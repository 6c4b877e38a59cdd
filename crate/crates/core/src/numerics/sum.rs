use std::iter::Sum;
use std::ops::AddAssign;

/// Kahan–Babuška–Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().sum();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn matches_plain_sum_on_benign_input() {
        let xs: Vec<f64> = (1..=100).map(|k| 1.0 / k as f64).collect();
        let s: NeumaierSum = xs.iter().copied().sum();
        let naive: f64 = xs.iter().sum();
        assert!((s.value() - naive).abs() < 1e-13);
    }
}
