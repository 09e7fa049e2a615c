//! Streaming mean and variance over vectors of fixed length.

/// Welford accumulator, mergeable with Chan's formula.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningMoments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    pub fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for ((m, s), (om, os)) in self
            .mean
            .iter_mut()
            .zip(&mut self.m2)
            .zip(other.mean.iter().zip(&other.m2))
        {
            let delta = om - *m;
            *m += delta * nb / n;
            *s += os + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sample variance (n − 1 denominator); zero below two samples.
    pub fn variance(&self, i: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2[i] / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self, i: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance(i) / self.count as f64).sqrt()
        }
    }
}

/// Merges adjacent pairs until one item is left, so the grouping depends
/// only on the number of items.
pub fn tree_reduce<T>(mut items: Vec<T>, merge: impl Fn(&mut T, &T)) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(mut a) = iter.next() {
            if let Some(b) = iter.next() {
                merge(&mut a, &b);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_two_pass() {
        let data = [1.0, 4.0, -2.0, 7.5, 3.25];
        let mut m = RunningMoments::new(1);
        for v in data {
            m.push(&[v]);
        }
        let mean = data.iter().sum::<f64>() / 5.0;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert_relative_eq!(m.mean()[0], mean, epsilon = 1e-14);
        assert_relative_eq!(m.variance(0), var, epsilon = 1e-13);
        assert_relative_eq!(m.stderr(0), (var / 5.0).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn single_sample_has_zero_error() {
        let mut m = RunningMoments::new(2);
        m.push(&[1.0, 2.0]);
        assert_eq!(m.stderr(1), 0.0);
    }

    #[test]
    fn tree_reduce_groups_pairwise() {
        let out = tree_reduce(
            vec!["a", "b", "c", "d", "e"]
                .into_iter()
                .map(String::from)
                .collect(),
            |a, b| *a = format!("({a}{b})"),
        );
        assert_eq!(out.unwrap(), "(((ab)(cd))e)");
        assert!(tree_reduce(Vec::<u8>::new(), |_, _| {}).is_none());
    }

    proptest::proptest! {
        #[test]
        fn merge_equals_sequential(xs in proptest::collection::vec(-10.0..10.0f64, 2..60), split in 0usize..60) {
            let split = split.min(xs.len());
            let mut whole = RunningMoments::new(1);
            let mut left = RunningMoments::new(1);
            let mut right = RunningMoments::new(1);
            for (i, &v) in xs.iter().enumerate() {
                whole.push(&[v]);
                if i < split { left.push(&[v]) } else { right.push(&[v]) }
            }
            left.merge(&right);
            proptest::prop_assert_eq!(left.count(), whole.count());
            proptest::prop_assert!((left.mean()[0] - whole.mean()[0]).abs() < 1e-12);
            proptest::prop_assert!((left.variance(0) - whole.variance(0)).abs() < 1e-10);
        }
    }
}
