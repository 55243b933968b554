//! Sparse integer polynomials truncated by degree in the error variables.
//!
//! Variables `0..n_err` are the error variables `w_k`; variables from
//! `n_err` upward are the no-error variables `z_i`. Only the error degree
//! counts against the budget.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPolynomial {
    k_max: usize,
    n_err: u32,
    /// Terms bucketed by error degree `0..=k_max`.
    buckets: Vec<BTreeMap<Monomial, BigInt>>,
}

fn merge(a: &[(u32, u32)], b: &[(u32, u32)]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl TruncatedPolynomial {
    pub fn zero(k_max: usize, n_err: u32) -> Self {
        TruncatedPolynomial { k_max, n_err, buckets: vec![BTreeMap::new(); k_max + 1] }
    }

    pub fn one(k_max: usize, n_err: u32) -> Self {
        Self::monomial(k_max, n_err, Vec::new(), BigInt::one())
    }

    pub fn var(k_max: usize, n_err: u32, v: u32) -> Self {
        Self::monomial(k_max, n_err, vec![(v, 1)], BigInt::one())
    }

    pub fn monomial(k_max: usize, n_err: u32, mono: Monomial, coeff: BigInt) -> Self {
        let mut p = Self::zero(k_max, n_err);
        let deg = p.error_degree(&mono);
        if deg <= k_max && !coeff.is_zero() {
            p.buckets[deg].insert(mono, coeff);
        }
        p
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_err(&self) -> u32 {
        self.n_err
    }

    pub fn error_degree(&self, mono: &[(u32, u32)]) -> usize {
        mono.iter().filter(|(v, _)| *v < self.n_err).map(|(_, e)| *e as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.buckets.iter().all(BTreeMap::is_empty)
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.buckets.iter().flat_map(|b| b.iter())
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (deg, bucket) in other.buckets.iter().enumerate().take(self.k_max + 1) {
            for (mono, c) in bucket {
                add_term(&mut self.buckets[deg], mono.clone(), c.clone());
            }
        }
    }

    /// Number of monomial pairs `mul` would combine, saturating.
    pub fn mul_cost(&self, other: &Self) -> u64 {
        let k_max = self.k_max.min(other.k_max);
        let mut cost: u64 = 0;
        for (da, ba) in self.buckets.iter().enumerate() {
            for bb in other.buckets.iter().take((k_max + 1).saturating_sub(da)) {
                cost = cost.saturating_add((ba.len() as u64).saturating_mul(bb.len() as u64));
            }
        }
        cost
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k_max = self.k_max.min(other.k_max);
        let mut out = Self::zero(k_max, self.n_err);
        for (da, ba) in self.buckets.iter().enumerate() {
            if ba.is_empty() {
                continue;
            }
            for (db, bb) in other.buckets.iter().enumerate() {
                if da + db > k_max {
                    break;
                }
                for (ma, ca) in ba {
                    for (mb, cb) in bb {
                        add_term(&mut out.buckets[da + db], merge(ma, mb), ca * cb);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = self.clone();
        for bucket in &mut out.buckets {
            bucket.retain(|_, v| {
                *v *= c;
                !v.is_zero()
            });
        }
        out
    }

    /// Error part of a monomial as a sparse exponent list.
    pub fn error_part(&self, mono: &[(u32, u32)]) -> Monomial {
        mono.iter().copied().filter(|(v, _)| *v < self.n_err).collect()
    }

    /// Sum of the coefficients of all monomials whose error part equals `s`.
    pub fn error_coefficient(&self, s: &[(u32, u32)]) -> BigInt {
        let deg: usize = s.iter().map(|(_, e)| *e as usize).sum();
        if deg > self.k_max {
            return BigInt::zero();
        }
        self.buckets[deg].iter().filter(|(m, _)| self.error_part(m) == s).map(|(_, c)| c.clone()).sum()
    }

    /// Replaces every `z` variable by `1 - Σ` of the error variables of its
    /// block. `blocks[i]` lists the error variables of block `i`, whose `z`
    /// is variable `n_err + i`. The result only involves error variables.
    pub fn substitute_z(&self, blocks: &[Vec<u32>]) -> Self {
        let mut powers: BTreeMap<(u32, u32), Self> = BTreeMap::new();
        let mut out = Self::zero(self.k_max, self.n_err);
        for (mono, c) in self.terms() {
            let mut term = Self::monomial(self.k_max, self.n_err, self.error_part(mono), c.clone());
            for &(v, e) in mono.iter().filter(|(v, _)| *v >= self.n_err) {
                let p = powers.entry((v, e)).or_insert_with(|| {
                    let i = (v - self.n_err) as usize;
                    let mut base = Self::one(self.k_max, self.n_err);
                    for &w in &blocks[i] {
                        base.add_assign(&Self::var(self.k_max, self.n_err, w).scale(&BigInt::from(-1)));
                    }
                    let mut acc = Self::one(self.k_max, self.n_err);
                    for _ in 0..e {
                        acc = acc.mul(&base);
                    }
                    acc
                });
                term = term.mul(p);
            }
            out.add_assign(&term);
        }
        out
    }

    /// Canonical text form: one `coeff * prod(var^exp)` line per monomial,
    /// variables `w{k}` (1-based) and `z{i}` (1-based), lines sorted.
    pub fn canonical_text(&self) -> String {
        let mut lines: Vec<String> = self
            .terms()
            .map(|(mono, c)| {
                let vars: Vec<String> = mono
                    .iter()
                    .map(|&(v, e)| {
                        let name =
                            if v < self.n_err { format!("w{}", v + 1) } else { format!("z{}", v - self.n_err + 1) };
                        format!("{name}^{e}")
                    })
                    .collect();
                format!("{c} * prod({})", vars.join(" "))
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// Total degree of each `z` block (error variables assigned via `block_of_err`).
    pub fn block_degrees(&self, mono: &[(u32, u32)], block_of_err: &[usize], n_blocks: usize) -> Vec<u32> {
        let mut deg = vec![0u32; n_blocks];
        for &(v, e) in mono {
            let b = if v < self.n_err { block_of_err[v as usize] } else { (v - self.n_err) as usize };
            deg[b] += e;
        }
        deg
    }

    pub fn has_negative_coefficients(&self) -> bool {
        self.terms().any(|(_, c)| c.is_negative())
    }
}

fn add_term(bucket: &mut BTreeMap<Monomial, BigInt>, mono: Monomial, c: BigInt) {
    use std::collections::btree_map::Entry;
    match bucket.entry(mono) {
        Entry::Vacant(e) => {
            if !c.is_zero() {
                e.insert(c);
            }
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: usize) -> (TruncatedPolynomial, TruncatedPolynomial, TruncatedPolynomial) {
        (TruncatedPolynomial::var(k, 2, 0), TruncatedPolynomial::var(k, 2, 1), TruncatedPolynomial::var(k, 2, 2))
    }

    #[test]
    fn truncation_drops_high_error_degree() {
        let (w1, w2, z) = p(1);
        let prod = w1.mul(&w2);
        assert!(prod.is_zero());
        let kept = w1.mul(&z).mul(&z);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.canonical_text(), "1 * prod(w1^1 z1^2)\n");
    }

    #[test]
    fn substitution_expands_binomially() {
        let (_, _, z) = p(2);
        let sq = z.mul(&z).substitute_z(&[vec![0, 1]]);
        // (1 - w1 - w2)^2 = 1 - 2w1 - 2w2 + w1^2 + 2w1w2 + w2^2
        assert_eq!(sq.len(), 6);
        assert_eq!(sq.error_coefficient(&[(0, 1)]), BigInt::from(-2));
        assert_eq!(sq.error_coefficient(&[(0, 1), (1, 1)]), BigInt::from(2));
        assert_eq!(sq.error_coefficient(&[]), BigInt::from(1));
    }

    #[test]
    fn cancellation_removes_terms() {
        let (w1, _, _) = p(2);
        let mut s = w1.clone();
        s.add_assign(&w1.scale(&BigInt::from(-1)));
        assert!(s.is_zero());
    }

    #[test]
    fn canonical_text_is_sorted() {
        let (w1, w2, z) = p(2);
        let mut s = z.mul(&w2);
        s.add_assign(&w1.mul(&w1));
        s.add_assign(&TruncatedPolynomial::one(2, 2));
        assert_eq!(s.canonical_text(), "1 * prod()\n1 * prod(w1^2)\n1 * prod(w2^1 z1^1)\n");
    }
}
