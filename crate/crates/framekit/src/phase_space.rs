//! Phase spaces with a fixed coordinate ordering.
//!
//! Coordinates are always ordered `z = (q_1..q_N, p_1..p_N)`, so the
//! symplectic matrix is `Omega = [[0, I], [-I, 0]]` everywhere in the crate.
//! Indices are 0-based in code; labels carry the 1-based names used in
//! rendered output.

use std::fmt;
use std::sync::Arc;

use crate::matrix::Mat;

#[derive(Clone, PartialEq, Eq)]
pub struct PhaseSpace {
    n_pairs: usize,
    labels: Vec<String>,
}

impl PhaseSpace {
    /// `n` conjugate pairs with default labels `q1..qN, p1..pN`.
    pub fn new(n_pairs: usize) -> Arc<Self> {
        assert!(n_pairs > 0, "phase space needs at least one pair");
        let mut labels = Vec::with_capacity(2 * n_pairs);
        for i in 1..=n_pairs {
            labels.push(format!("q{i}"));
        }
        for i in 1..=n_pairs {
            labels.push(format!("p{i}"));
        }
        Arc::new(PhaseSpace { n_pairs, labels })
    }

    /// Labels come as pairs `(position, momentum)` in pair order.
    pub fn with_pair_labels(pairs: &[(&str, &str)]) -> Arc<Self> {
        assert!(!pairs.is_empty());
        let n = pairs.len();
        let mut labels = Vec::with_capacity(2 * n);
        labels.extend(pairs.iter().map(|(q, _)| q.to_string()));
        labels.extend(pairs.iter().map(|(_, p)| p.to_string()));
        Arc::new(PhaseSpace { n_pairs: n, labels })
    }

    /// A copy of `self` with one extra conjugate pair appended.
    pub fn append_pair(&self, q_label: &str, p_label: &str) -> Arc<Self> {
        let n = self.n_pairs + 1;
        let mut labels = Vec::with_capacity(2 * n);
        labels.extend(self.labels[..self.n_pairs].iter().cloned());
        labels.push(q_label.to_string());
        labels.extend(self.labels[self.n_pairs..].iter().cloned());
        labels.push(p_label.to_string());
        Arc::new(PhaseSpace { n_pairs: n, labels })
    }

    /// A copy of `self` with the conjugate pair `k` removed.
    pub fn drop_pair(&self, k: usize) -> Arc<Self> {
        assert!(self.n_pairs > 1 && k < self.n_pairs);
        let labels = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k && *i != self.n_pairs + k)
            .map(|(_, l)| l.clone())
            .collect();
        Arc::new(PhaseSpace { n_pairs: self.n_pairs - 1, labels })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn dim(&self) -> usize {
        2 * self.n_pairs
    }

    /// Index of the position coordinate of pair `i` (0-based).
    pub fn q(&self, i: usize) -> usize {
        assert!(i < self.n_pairs);
        i
    }

    /// Index of the momentum coordinate of pair `i` (0-based).
    pub fn p(&self, i: usize) -> usize {
        assert!(i < self.n_pairs);
        self.n_pairs + i
    }

    /// The conjugate partner of coordinate index `a`.
    pub fn conjugate(&self, a: usize) -> usize {
        if a < self.n_pairs {
            a + self.n_pairs
        } else {
            a - self.n_pairs
        }
    }

    /// Which pair coordinate index `a` belongs to.
    pub fn pair_of(&self, a: usize) -> usize {
        if a < self.n_pairs {
            a
        } else {
            a - self.n_pairs
        }
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn omega(&self) -> Mat {
        Mat::omega(self.n_pairs)
    }
}

impl fmt::Debug for PhaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseSpace({})", self.labels.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_convention() {
        let s = PhaseSpace::new(3);
        assert_eq!(s.q(0), 0);
        assert_eq!(s.p(0), 3);
        assert_eq!(s.conjugate(1), 4);
        assert_eq!(s.conjugate(4), 1);
        assert_eq!(s.label(3), "p1");
    }

    #[test]
    fn append_and_drop_pair() {
        let s = PhaseSpace::new(3);
        let ext = s.append_pair("q", "p");
        assert_eq!(ext.dim(), 8);
        assert_eq!(ext.label(3), "q");
        assert_eq!(ext.label(7), "p");
        let back = ext.drop_pair(3);
        assert_eq!(back.labels(), s.labels());
    }
}
