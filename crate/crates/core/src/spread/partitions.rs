use crate::error::{check, Result};

/// Composition of an integer into ordered parts, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedPartition(pub Vec<u32>);

impl OrderedPartition {
    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

fn extend(remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<OrderedPartition>) {
    if remaining == 0 {
        out.push(OrderedPartition(prefix.clone()));
        return;
    }
    for first in 2..=remaining {
        if remaining - first == 1 {
            continue;
        }
        prefix.push(first);
        extend(remaining - first, prefix, out);
        prefix.pop();
    }
}

/// All compositions of `k` with parts `>= 2`, in lexicographic order.
pub fn ordered_partitions(k: u32) -> Result<Vec<OrderedPartition>> {
    check(k >= 2, "k", "must be >= 2")?;
    let mut out = Vec::new();
    extend(k, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Number of compositions of `k` into parts `>= 2`, by the recurrence
/// `c(k) = 1 + Σ_{j=2}^{k-2} c(k - j)`.
pub fn composition_count(k: u32) -> u64 {
    let mut c = vec![0u64; (k as usize + 1).max(4)];
    for n in 2..=k as usize {
        c[n] = 1 + (2..=n.saturating_sub(2)).map(|j| c[n - j]).sum::<u64>();
    }
    c[k as usize]
}
