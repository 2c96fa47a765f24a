/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Running compensated sums of `terms`, starting from `start`.
/// The result has one more element than `terms`.
pub fn cumulative(start: f64, terms: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    acc.add(start);
    let mut out = vec![start];
    for term in terms {
        acc.add(term);
        out.push(acc.value());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_low_bits() {
        let mut s = CompensatedSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let mut s = CompensatedSum::new();
        for _ in 0..1_000_000 {
            s.add(0.1);
        }
        assert!((s.value() - 100_000.0).abs() < 1e-9);
    }

    #[test]
    fn cumulative_shape() {
        assert_eq!(cumulative(1.0, [1.0, 2.0]), vec![1.0, 2.0, 4.0]);
        assert_eq!(cumulative(0.5, []), vec![0.5]);
    }
}
