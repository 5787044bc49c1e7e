//! Small numerical helpers shared by the quadrature and series code.

/// Neumaier-compensated running sum.
///
/// Summation order is whatever order `add` is called in, so callers that
/// need reproducible totals must feed terms in a fixed order.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Odometer over a tensor-product index space, last axis fastest.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    counts: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(counts: &[usize]) -> Self {
        Self { counts: counts.to_vec(), current: vec![0; counts.len()], done: counts.contains(&0) }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut axis = self.counts.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.current[axis] += 1;
            if self.current[axis] < self.counts[axis] {
                break;
            }
            self.current[axis] = 0;
        }
        Some(out)
    }
}

/// Evenly spaced samples on `[lo, hi]`, endpoints included; a single
/// sample sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// `sum_{i >= start} i^{-s}` bounded above by `start^{-s} + start^{1-s}/(s-1)`.
pub(crate) fn power_tail(start: f64, s: f64) -> f64 {
    debug_assert!(start >= 1.0 && s > 1.0);
    start.powf(-s) + start.powf(1.0 - s) / (s - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.total() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn multi_index_is_lexicographic() {
        let all: Vec<_> = MultiIndex::new(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(MultiIndex::new(&[]).count(), 1);
        assert_eq!(MultiIndex::new(&[3, 0]).count(), 0);
    }

    #[test]
    fn power_tail_dominates_partial_sums() {
        for &s in &[2.0, 3.0, 4.5] {
            for start in 1..6 {
                let direct: f64 = (start..200_000).map(|i| (i as f64).powf(-s)).sum();
                assert!(power_tail(start as f64, s) >= direct);
            }
        }
    }
}
