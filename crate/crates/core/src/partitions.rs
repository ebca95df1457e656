//! Set partitions of `{1..k}` and the subset-convolution recurrence that sums
//! products of block values over all of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension the partition-sum engine accepts.
pub const MAX_DIM: usize = 20;
/// Largest dimension for which naive enumeration is offered.
pub const MAX_ENUM_DIM: usize = 12;

/// Nonempty subset of `{1..k}`; bit `i-1` marks membership of index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetIndicator(u32);

impl SubsetIndicator {
    pub fn new(bits: u32, k: usize) -> Result<Self> {
        if k > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim: k, max: MAX_DIM });
        }
        if bits == 0 || bits >= (1u32 << k) {
            return Err(Error::OutOfDomain(format!("subset bits {bits} invalid for k = {k}")));
        }
        Ok(Self(bits))
    }

    /// Builds the subset from 1-based indices.
    pub fn from_indices(indices: &[usize], k: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i == 0 || i > k {
                return Err(Error::OutOfDomain(format!("index {i} outside 1..={k}")));
            }
            bits |= 1 << (i - 1);
        }
        Self::new(bits, k)
    }

    pub fn full(k: usize) -> Self {
        Self(((1u64 << k) - 1) as u32)
    }

    pub(crate) fn from_bits_unchecked(bits: u32) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && i <= 32 && self.0 & (1 << (i - 1)) != 0
    }

    /// Smallest 1-based index in the subset.
    pub fn min_index(self) -> usize {
        self.0.trailing_zeros() as usize + 1
    }

    /// Member indices, 1-based and increasing.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    /// Member indices, 0-based and increasing.
    pub fn positions(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).collect()
    }
}

impl fmt::Display for SubsetIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

/// A set partition stored as a restricted-growth string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    rgs: Vec<u8>,
}

impl Partition {
    pub fn from_rgs(rgs: Vec<u8>) -> Result<Self> {
        if rgs.is_empty() || rgs[0] != 0 {
            return Err(Error::OutOfDomain("restricted-growth string must start with 0".into()));
        }
        let mut max = 0u8;
        for &r in &rgs[1..] {
            if r > max + 1 {
                return Err(Error::OutOfDomain("not a restricted-growth string".into()));
            }
            max = max.max(r);
        }
        Ok(Self { rgs })
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs.iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    /// Blocks ordered by their smallest element.
    pub fn blocks(&self) -> Vec<SubsetIndicator> {
        let mut bits = vec![0u32; self.num_blocks()];
        for (i, &r) in self.rgs.iter().enumerate() {
            bits[r as usize] |= 1 << i;
        }
        bits.into_iter().map(SubsetIndicator).collect()
    }
}

/// Bell number via the Bell triangle.
pub fn bell_number(k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::OutOfDomain("bell_number needs k >= 1".into()));
    }
    if k > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: k, max: MAX_DIM });
    }
    let mut row = vec![1u64];
    for _ in 1..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let v = next.last().unwrap().checked_add(x).ok_or(Error::Overflow)?;
            next.push(v);
        }
        row = next;
    }
    Ok(*row.last().unwrap())
}

/// Streams every partition of `{1..k}` in lexicographic RGS order.
pub fn enumerate_partitions(k: usize) -> Result<PartitionIter> {
    if k == 0 {
        return Err(Error::OutOfDomain("enumerate_partitions needs k >= 1".into()));
    }
    if k > MAX_ENUM_DIM {
        return Err(Error::DimensionTooLarge { dim: k, max: MAX_ENUM_DIM });
    }
    Ok(PartitionIter { next: Some(vec![0; k]) })
}

pub struct PartitionIter {
    next: Option<Vec<u8>>,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let cur = self.next.take()?;
        let k = cur.len();
        // prefix maxima
        let mut pmax = vec![0u8; k];
        for i in 1..k {
            pmax[i] = pmax[i - 1].max(cur[i - 1]);
        }
        let mut succ = cur.clone();
        let mut found = false;
        for i in (1..k).rev() {
            if succ[i] <= pmax[i] {
                succ[i] += 1;
                for s in succ.iter_mut().skip(i + 1) {
                    *s = 0;
                }
                found = true;
                break;
            }
        }
        if found {
            self.next = Some(succ);
        }
        Some(Partition { rgs: cur })
    }
}

fn check_values(len: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::OutOfDomain("partition sum needs k >= 1".into()));
    }
    if k > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: k, max: MAX_DIM });
    }
    let size = 1usize << k;
    if len < size {
        return Err(Error::MissingBlockValue { expected: size - 1, got: len.saturating_sub(1) });
    }
    Ok(size)
}

/// Generic form of the recurrence
/// `A(T) = Σ_{min(T) ∈ S ⊆ T} v(S)·A(T∖S)`, `A(∅) = one`, returning `A({1..k})`.
///
/// `values[bits]` holds the block value of the subset `bits`; index 0 is
/// ignored. Subsets are visited by popcount, and inside each the candidate
/// blocks run from the largest bit pattern downwards.
pub fn partition_dp<T, Add, Mul>(values: &[T], k: usize, zero: T, one: T, add: Add, mul: Mul) -> Result<T>
where
    T: Clone,
    Add: Fn(&T, &T) -> T,
    Mul: Fn(&T, &T) -> T,
{
    let size = check_values(values.len(), k)?;
    let mut table: Vec<T> = vec![zero.clone(); size];
    table[0] = one;
    for pc in 1..=k {
        for t in 1..size as u32 {
            if t.count_ones() as usize != pc {
                continue;
            }
            let low = t & t.wrapping_neg();
            let rest = t ^ low;
            let mut acc = zero.clone();
            let mut sub = rest;
            loop {
                let s = sub | low;
                acc = add(&acc, &mul(&values[s as usize], &table[(t ^ s) as usize]));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            table[t as usize] = acc;
        }
    }
    Ok(table[size - 1].clone())
}

/// Σ over all partitions τ of `{1..k}` of Π_j `values[τ_j]`.
pub fn sum_partition_products(values: &[f64], k: usize) -> Result<f64> {
    let size = check_values(values.len(), k)?;
    if let Some(bad) = (1..size).find(|&s| !values[s].is_finite()) {
        return Err(Error::NonFiniteBlockValue { subset: bad as u32 });
    }
    partition_dp(values, k, 0.0, 1.0, |a, b| a + b, |a, b| a * b)
}

/// Log-space version of [`sum_partition_products`]; takes and returns logs.
/// `-inf` entries denote zero block values.
pub fn log_sum_partition_products(log_values: &[f64], k: usize) -> Result<f64> {
    let size = check_values(log_values.len(), k)?;
    if let Some(bad) = (1..size).find(|&s| log_values[s].is_nan() || log_values[s] == f64::INFINITY) {
        return Err(Error::NonFiniteBlockValue { subset: bad as u32 });
    }
    partition_dp(
        log_values,
        k,
        f64::NEG_INFINITY,
        0.0,
        |a, b| {
            let (hi, lo) = if a >= b { (*a, *b) } else { (*b, *a) };
            if hi == f64::NEG_INFINITY {
                hi
            } else {
                hi + (lo - hi).exp().ln_1p()
            }
        },
        |a, b| a + b,
    )
}

/// Direct sum over [`enumerate_partitions`]; a test oracle.
pub fn naive_partition_sum(values: &[f64], k: usize) -> Result<f64> {
    check_values(values.len(), k)?;
    let mut total = 0.0;
    for p in enumerate_partitions(k)? {
        total += p.blocks().iter().map(|b| values[b.bits() as usize]).product::<f64>();
    }
    Ok(total)
}
