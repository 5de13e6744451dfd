use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of variables.
pub const MAX_VARS: usize = 12;

/// Exponent vector `Q = (q_1, …, q_n)`.
///
/// The derived ordering compares the total degree first and then the
/// exponents lexicographically (graded lex), which is a monomial order:
/// `P < Q` implies `P + R < Q + R`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    degree: u16,
    exps: [u8; MAX_VARS],
}

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex {
            degree: 0,
            exps: [0; MAX_VARS],
        }
    }

    pub fn unit(i: usize) -> Self {
        let mut q = Self::zero();
        q.exps[i] = 1;
        q.degree = 1;
        q
    }

    pub fn from_slice(e: &[u32]) -> Result<Self> {
        if e.len() > MAX_VARS {
            return Err(Error::Invalid(format!("at most {MAX_VARS} variables supported")));
        }
        let mut q = Self::zero();
        let mut d = 0u32;
        for (k, &v) in e.iter().enumerate() {
            if v > u8::MAX as u32 {
                return Err(Error::Invalid(format!("exponent {v} too large")));
            }
            q.exps[k] = v as u8;
            d += v;
        }
        q.degree = d as u16;
        Ok(q)
    }

    /// Panicking constructor for literals in tests and examples.
    pub fn new(e: &[u32]) -> Self {
        Self::from_slice(e).expect("valid multi-index")
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.exps[i] as u32
    }

    pub fn to_vec(&self, n: usize) -> Vec<u32> {
        self.exps[..n].iter().map(|&v| v as u32).collect()
    }

    /// Highest variable index with a nonzero exponent.
    pub fn last_nonzero(&self) -> Option<usize> {
        (0..MAX_VARS).rev().find(|&k| self.exps[k] != 0)
    }

    /// Whether variables `≥ n` all have zero exponent.
    pub fn fits(&self, n: usize) -> bool {
        self.exps[n..].iter().all(|&v| v == 0)
    }

    #[inline]
    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..MAX_VARS {
            r.exps[k] += o.exps[k];
        }
        r.degree += o.degree;
        r
    }

    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        let mut r = *self;
        for k in 0..MAX_VARS {
            r.exps[k] = self.exps[k].checked_sub(o.exps[k])?;
        }
        r.degree -= o.degree;
        Some(r)
    }

    pub fn divides(&self, o: &Self) -> bool {
        (0..MAX_VARS).all(|k| self.exps[k] <= o.exps[k])
    }

    pub fn inc(&self, i: usize) -> Self {
        let mut r = *self;
        r.exps[i] += 1;
        r.degree += 1;
        r
    }

    pub fn dec(&self, i: usize) -> Option<Self> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut r = *self;
        r.exps[i] -= 1;
        r.degree -= 1;
        Some(r)
    }

    /// `Q! = q_1! ⋯ q_n!`
    pub fn factorial(&self) -> u128 {
        let mut acc: u128 = 1;
        for &e in &self.exps {
            for j in 2..=e as u128 {
                acc *= j;
            }
        }
        acc
    }

    /// All multi-indices in `n` variables with total degree exactly `d`, in
    /// ascending order.
    pub fn all_of_degree(n: usize, d: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(k: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if k + 1 == n {
                cur[k] = left as u32;
                out.push(MultiIndex::new(cur));
                return;
            }
            for v in 0..=left {
                cur[k] = v as u32;
                rec(k + 1, left - v, cur, out);
            }
            cur[k] = 0;
        }
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex::zero());
            }
            return out;
        }
        rec(0, d, &mut cur, &mut out);
        out.sort();
        out
    }

    /// All multi-indices with `lo ≤ |Q| ≤ hi`.
    pub fn all_in_range(n: usize, lo: usize, hi: usize) -> Vec<MultiIndex> {
        (lo..=hi).flat_map(|d| Self::all_of_degree(n, d)).collect()
    }

    /// Number of monomials of degree exactly `d` in `n` variables,
    /// `C(d+n−1, n−1)`, saturating.
    pub fn count_of_degree(n: usize, d: usize) -> u128 {
        binomial((d + n).saturating_sub(1) as u128, n.saturating_sub(1) as u128)
    }
}

pub(crate) fn binomial(a: u128, b: u128) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for k in 0..b {
        acc = match acc.checked_mul(a - k) {
            Some(v) => v / (k + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.last_nonzero().map_or(1, |k| k + 1);
        write!(f, "{:?}", &self.exps[..n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let a = MultiIndex::new(&[2, 0]);
        let b = MultiIndex::new(&[0, 3]);
        let c = MultiIndex::new(&[1, 1]);
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn enumeration_counts() {
        for n in 1..5 {
            for d in 0..7 {
                assert_eq!(
                    MultiIndex::all_of_degree(n, d).len() as u128,
                    MultiIndex::count_of_degree(n, d)
                );
            }
        }
        assert_eq!(binomial(19, 3), 969);
    }

    #[test]
    fn arithmetic() {
        let a = MultiIndex::new(&[2, 1, 0]);
        let b = MultiIndex::new(&[1, 1, 0]);
        assert_eq!(a.checked_sub(&b), Some(MultiIndex::new(&[1, 0, 0])));
        assert_eq!(b.checked_sub(&a), None);
        assert!(b.divides(&a));
        assert_eq!(a.factorial(), 2);
        assert_eq!(a.add(&b).degree(), 5);
    }
}
