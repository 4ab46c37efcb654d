/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `K` independent compensated accumulators updated in lockstep.
#[derive(Debug, Clone, Copy)]
pub struct KahanArray<const K: usize> {
    parts: [KahanSum; K],
}

impl<const K: usize> Default for KahanArray<K> {
    fn default() -> Self {
        Self {
            parts: [KahanSum::new(); K],
        }
    }
}

impl<const K: usize> KahanArray<K> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: [f64; K]) {
        for (p, v) in self.parts.iter_mut().zip(x) {
            p.add(v);
        }
    }

    pub fn value(&self) -> [f64; K] {
        std::array::from_fn(|i| self.parts[i].value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_lost_low_bits() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-10)).abs() < 1e-22);
    }

    #[test]
    fn handles_large_cancellation() {
        let s: KahanSum = [1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn array_matches_scalar() {
        let mut a = KahanArray::<2>::new();
        let mut s = KahanSum::new();
        for i in 0..1000 {
            let x = 1.0 / (i as f64 + 1.0);
            a.add([x, -x]);
            s.add(x);
        }
        assert_eq!(a.value(), [s.value(), -s.value()]);
    }
}
