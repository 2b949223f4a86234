//! Integer partitions, interlacing relations and Maya diagrams.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A weakly decreasing sequence of positive integers.
///
/// Trailing zeros are never stored, so structural equality is equality of
/// partitions. Indexing past the stored parts yields 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Builds a partition from parts, dropping zeros.
    ///
    /// Returns `None` if the nonzero parts are not weakly decreasing.
    pub fn new(parts: Vec<u32>) -> Option<Self> {
        let mut parts = parts;
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return None;
        }
        Some(Partition { parts })
    }

    /// Sorts arbitrary parts into a partition.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    /// The i-th part, 1-based. Index 0 is not a part; use [`Partition::part0`].
    #[inline]
    pub fn part(&self, i: usize) -> u32 {
        if i == 0 || i > self.parts.len() {
            0
        } else {
            self.parts[i - 1]
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn first(&self) -> u32 {
        self.part(1)
    }

    pub fn conjugate(&self) -> Partition {
        let mut out = Vec::with_capacity(self.first() as usize);
        for c in 1..=self.first() {
            out.push(self.parts.iter().take_while(|&&p| p >= c).count() as u32);
        }
        Partition { parts: out }
    }

    /// Number of parts equal to `k`.
    pub fn multiplicity(&self, k: u32) -> usize {
        self.parts.iter().filter(|&&p| p == k).count()
    }

    /// Builds the partition with `mult[k-1]` parts equal to `k`.
    pub fn from_multiplicities(mult: &[u64]) -> Self {
        let mut parts = Vec::new();
        for (k, &m) in mult.iter().enumerate().rev() {
            for _ in 0..m {
                parts.push(k as u32 + 1);
            }
        }
        Partition { parts }
    }

    /// First `cutoff` particle positions `λ_i − i + 1/2 + c`, as doubled integers
    /// `2λ_i − 2i + 1 + 2c`.
    pub fn maya_doubled(&self, charge: i64, cutoff: usize) -> Vec<i64> {
        (1..=cutoff)
            .map(|i| 2 * (self.part(i) as i64 - i as i64 + charge) + 1)
            .collect()
    }

    /// First `cutoff` particle positions as exact half-integers.
    pub fn maya_positions(&self, charge: i64, cutoff: usize) -> Vec<Ratio<i64>> {
        self.maya_doubled(charge, cutoff)
            .into_iter()
            .map(|d| Ratio::new(d, 2))
            .collect()
    }

    /// Every partition with at most `max_len` parts, each at most `max_part`.
    pub fn all_in_box(max_part: u32, max_len: usize) -> Vec<Partition> {
        fn rec(cap: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            out.push(Partition { parts: cur.clone() });
            if left == 0 {
                return;
            }
            for p in 1..=cap {
                cur.push(p);
                rec(p, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(max_part, max_len, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    pub fn fits(&self, max_part: u32, max_len: usize) -> bool {
        self.first() <= max_part && self.len() <= max_len
    }
}

/// Decodes particle positions (doubled, strictly decreasing) back into a
/// partition and charge.
///
/// The positions must be the leading particles of a Maya diagram, and the
/// last one must already lie on the vacuum staircase. Returns `None` otherwise.
pub fn maya_decode(doubled: &[i64]) -> Option<(Partition, i64)> {
    let n = doubled.len();
    if n == 0 || doubled.windows(2).any(|w| w[0] <= w[1]) || doubled.iter().any(|d| d % 2 == 0) {
        return None;
    }
    // Deep particles sit at −i + 1/2 + c, so the last one fixes c once its part is 0.
    let c = (doubled[n - 1] - 1) / 2 + n as i64;
    let mut parts = Vec::with_capacity(n);
    for (k, &d) in doubled.iter().enumerate() {
        let p = (d - 1) / 2 + (k as i64 + 1) - c;
        if p < 0 {
            return None;
        }
        parts.push(p as u32);
    }
    Some((Partition::new(parts)?, c))
}

/// `μ ≺ λ`: λ/μ is a horizontal strip.
pub fn interlaces_h(mu: &Partition, lambda: &Partition) -> bool {
    let n = lambda.len().max(mu.len() + 1);
    for i in 1..=n {
        if lambda.part(i) < mu.part(i) {
            return false;
        }
        if mu.part(i) < lambda.part(i + 1) {
            return false;
        }
    }
    true
}

/// `μ ≺′ λ`: λ/μ is a vertical strip.
pub fn interlaces_v(mu: &Partition, lambda: &Partition) -> bool {
    let n = lambda.len().max(mu.len());
    for i in 1..=n {
        let (l, m) = (lambda.part(i), mu.part(i));
        if l < m || l > m + 1 {
            return false;
        }
    }
    true
}

/// Which strip type links two neighbouring partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strip {
    /// Horizontal strip, `≺`.
    H,
    /// Vertical strip, `≺′`.
    V,
}

impl Strip {
    pub fn flip(self) -> Strip {
        match self {
            Strip::H => Strip::V,
            Strip::V => Strip::H,
        }
    }

    /// Whether `small` sits below `big` by a strip of this type.
    pub fn holds(self, small: &Partition, big: &Partition) -> bool {
        match self {
            Strip::H => interlaces_h(small, big),
            Strip::V => interlaces_v(small, big),
        }
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "(")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        Partition::new(parts)
            .ok_or_else(|| serde::de::Error::custom("parts must be weakly decreasing"))
    }
}

/// Shorthand for building partitions in tests and examples.
#[macro_export]
macro_rules! part {
    () => { $crate::partitions::Partition::empty() };
    ($($x:expr),+ $(,)?) => {
        $crate::partitions::Partition::new(vec![$($x),+]).expect("weakly decreasing parts")
    };
}
