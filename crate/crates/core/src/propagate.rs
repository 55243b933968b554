//! Bottom-up propagation of weighted distributions through the DGM.
//!
//! A node's distribution is the pushforward, under its update function, of
//! the product of its parents' distributions. Parents are multiplied as if
//! independent even when they share ancestors: each use of a description
//! square is a fresh draw from its distribution. Tracking joint
//! configurations instead would correlate repeated reads and compute a
//! different function.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::dgm::{UnrolledDGM, Update};
use crate::error::{Error, Result};
use crate::machine::{tm_run, MachineSpec};
use crate::noisy::{LocalChart, NoisyCode};
use crate::poly::TruncatedPolynomial;

/// Weights attached to node values.
pub trait Semiring: Sync {
    type W: Clone + Send + Sync;
    fn zero(&self) -> Self::W;
    fn one(&self) -> Self::W;
    fn is_zero(&self, w: &Self::W) -> bool;
    fn add_assign(&self, acc: &mut Self::W, w: &Self::W);
    fn mul(&self, a: &Self::W, b: &Self::W) -> Result<Self::W>;
    /// Weight of value `v` on description square `block`.
    fn leaf(&self, block: usize, v: usize) -> Self::W;
}

/// Polynomial weights: `z_i` on the base value, `w_k` on alternative `k`.
pub struct PolySemiring<'a> {
    pub chart: &'a LocalChart,
    pub k_max: usize,
    pub budget: Budget,
    work: AtomicU64,
}

impl<'a> PolySemiring<'a> {
    pub fn new(chart: &'a LocalChart, k_max: usize, budget: Budget) -> Self {
        PolySemiring { chart, k_max, budget, work: AtomicU64::new(0) }
    }

    /// Monomial pairs combined so far.
    pub fn work(&self) -> u64 {
        self.work.load(Ordering::Relaxed)
    }
}

/// Resource limits for one propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest polynomial allowed at any node.
    pub max_terms: usize,
    /// Total monomial pairs combined by multiplications, checked before
    /// each product is formed.
    pub max_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_terms: DEFAULT_MAX_TERMS, max_work: DEFAULT_MAX_WORK }
    }
}

impl Semiring for PolySemiring<'_> {
    type W = TruncatedPolynomial;

    fn zero(&self) -> Self::W {
        TruncatedPolynomial::zero(self.k_max, self.chart.dim() as u32)
    }

    fn one(&self) -> Self::W {
        TruncatedPolynomial::one(self.k_max, self.chart.dim() as u32)
    }

    fn is_zero(&self, w: &Self::W) -> bool {
        w.is_zero()
    }

    fn add_assign(&self, acc: &mut Self::W, w: &Self::W) {
        acc.add_assign(w);
    }

    fn mul(&self, a: &Self::W, b: &Self::W) -> Result<Self::W> {
        let cost = a.mul_cost(b);
        let total = self.work.fetch_add(cost, Ordering::Relaxed).saturating_add(cost);
        if total > self.budget.max_work {
            return Err(Error::ResourceGuard(format!(
                "propagation work exceeded {} monomial products",
                self.budget.max_work
            )));
        }
        let p = a.mul(b);
        if p.len() > self.budget.max_terms {
            return Err(Error::ResourceGuard(format!("polynomial grew past {} monomials", self.budget.max_terms)));
        }
        Ok(p)
    }

    fn leaf(&self, block: usize, v: usize) -> Self::W {
        let d = self.chart.dim() as u32;
        let var = match self.chart.coord_of(block, v) {
            Some(k) => k as u32,
            None => d + block as u32,
        };
        TruncatedPolynomial::var(self.k_max, d, var)
    }
}

/// Numeric weights read straight off a noisy code.
pub struct ProbSemiring<'a, T> {
    pub code: &'a NoisyCode<T>,
}

macro_rules! prob_semiring {
    ($t:ty) => {
        impl Semiring for ProbSemiring<'_, $t> {
            type W = $t;

            fn zero(&self) -> $t {
                <$t>::zero()
            }

            fn one(&self) -> $t {
                <$t>::one()
            }

            fn is_zero(&self, w: &$t) -> bool {
                w.is_zero()
            }

            fn add_assign(&self, acc: &mut $t, w: &$t) {
                *acc += w.clone();
            }

            fn mul(&self, a: &$t, b: &$t) -> Result<$t> {
                Ok(a.clone() * b.clone())
            }

            fn leaf(&self, block: usize, v: usize) -> $t {
                self.code.blocks[block][v].clone()
            }
        }
    };
}

prob_semiring!(f64);
prob_semiring!(BigRational);

enum Dist<W> {
    Point(usize),
    Weighted(Arc<Vec<W>>),
}

/// Weighted distribution of the final simulated state, indexed by state.
pub fn propagate_with<S: Semiring>(dgm: &UnrolledDGM, x: &[usize], sr: &S) -> Result<Vec<S::W>> {
    let nodes = &dgm.nodes;
    let mut last_use = vec![0usize; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        for &p in &node.parents {
            last_use[p] = i;
        }
    }
    last_use[dgm.final_state] = usize::MAX;

    let mut dist: Vec<Option<Dist<S::W>>> = (0..nodes.len()).map(|_| None).collect();
    for i in 0..nodes.len() {
        let node = &nodes[i];
        let d = match node.update {
            Update::Leaf(b) => Dist::Weighted(Arc::new((0..node.domain).map(|v| sr.leaf(b, v)).collect())),
            Update::Identity => match dist[node.parents[0]].as_ref().expect("parent ready") {
                Dist::Point(v) => Dist::Point(*v),
                Dist::Weighted(w) => Dist::Weighted(Arc::clone(w)),
            },
            _ if !node.random => {
                let pv: Vec<usize> = node
                    .parents
                    .iter()
                    .map(|&p| match dist[p].as_ref().expect("parent ready") {
                        Dist::Point(v) => *v,
                        Dist::Weighted(_) => unreachable!("deterministic node with random parent"),
                    })
                    .collect();
                Dist::Point(dgm.apply(i, x, &pv))
            }
            _ => {
                let parents: Vec<&Dist<S::W>> =
                    node.parents.iter().map(|&p| dist[p].as_ref().expect("parent ready")).collect();
                let mut out: Vec<S::W> = (0..node.domain).map(|_| sr.zero()).collect();
                let mut pv = vec![0usize; parents.len()];
                push_forward(dgm, i, x, sr, &parents, 0, None, &mut pv, &mut out)?;
                Dist::Weighted(Arc::new(out))
            }
        };
        dist[i] = Some(d);
        for &p in &node.parents {
            if last_use[p] == i {
                dist[p] = None;
            }
        }
    }
    let m = dgm.state_count();
    match dist[dgm.final_state].take().expect("final node") {
        Dist::Point(v) => {
            let mut out: Vec<S::W> = (0..m).map(|_| sr.zero()).collect();
            out[v] = sr.one();
            Ok(out)
        }
        Dist::Weighted(w) => Ok(Arc::try_unwrap(w).unwrap_or_else(|a| (*a).clone())),
    }
}

#[allow(clippy::too_many_arguments)]
fn push_forward<S: Semiring>(
    dgm: &UnrolledDGM,
    node: usize,
    x: &[usize],
    sr: &S,
    parents: &[&Dist<S::W>],
    idx: usize,
    acc: Option<&S::W>,
    pv: &mut Vec<usize>,
    out: &mut [S::W],
) -> Result<()> {
    if idx == parents.len() {
        let v = dgm.apply(node, x, pv);
        let w = acc.expect("random node has a random parent");
        sr.add_assign(&mut out[v], w);
        return Ok(());
    }
    match parents[idx] {
        Dist::Point(v) => {
            pv[idx] = *v;
            push_forward(dgm, node, x, sr, parents, idx + 1, acc, pv, out)
        }
        Dist::Weighted(ws) => {
            for (v, w) in ws.iter().enumerate() {
                if sr.is_zero(w) {
                    continue;
                }
                pv[idx] = v;
                let next = match acc {
                    None => w.clone(),
                    Some(a) => sr.mul(a, w)?,
                };
                push_forward(dgm, node, x, sr, parents, idx + 1, Some(&next), pv, out)?;
            }
            Ok(())
        }
    }
}

/// Sparse multi-index: sorted `(coordinate, exponent)` pairs, zero based.
pub type MultiIndex = Vec<(u32, u32)>;

pub fn multi_index(dense: &[u32]) -> MultiIndex {
    dense.iter().enumerate().filter(|(_, &e)| e > 0).map(|(k, &e)| (k as u32, e)).collect()
}

pub fn weight(s: &[(u32, u32)]) -> usize {
    s.iter().map(|(_, e)| *e as usize).sum()
}

/// `f^τ` for every final state `τ`, truncated at error degree `k_max`.
pub fn propagate(
    dgm: &UnrolledDGM,
    x: &[usize],
    chart: &LocalChart,
    k_max: usize,
    budget: Budget,
) -> Result<Vec<TruncatedPolynomial>> {
    propagate_with(dgm, x, &PolySemiring::new(chart, k_max, budget))
}

/// `A^s_τ`: the coefficient of the monomial with error exponents `s` in `f^τ`.
pub fn syndrome_count(f: &[TruncatedPolynomial], s: &[(u32, u32)], tau: usize) -> Result<BigInt> {
    let k_max = f[tau].k_max();
    if weight(s) > k_max {
        return Err(Error::Budget { requested: weight(s), k_max });
    }
    Ok(f[tau].error_coefficient(s))
}

/// Propagated polynomials for one input together with its classical output.
#[derive(Clone, Debug)]
pub struct InputCounts {
    pub x: Vec<usize>,
    pub target: usize,
    pub f: Vec<TruncatedPolynomial>,
}

impl InputCounts {
    pub fn count(&self, s: &[(u32, u32)], tau: usize) -> Result<BigInt> {
        syndrome_count(&self.f, s, tau)
    }

    /// `A^s(x)`: syndromes of weight `s` that change the output.
    pub fn a_s(&self, s: &[(u32, u32)]) -> Result<BigInt> {
        let mut total = BigInt::zero();
        for tau in 0..self.f.len() {
            if tau != self.target {
                total += self.count(s, tau)?;
            }
        }
        Ok(total)
    }
}

/// Syndrome counts over a list of inputs for one machine and timeout.
#[derive(Clone, Debug)]
pub struct SyndromeCounts {
    pub chart: LocalChart,
    pub t: usize,
    pub k_max: usize,
    pub inputs: Vec<InputCounts>,
    /// Reads `n_i` of each description square along paths to the final state.
    pub block_reads: Vec<u32>,
}

pub const DEFAULT_MAX_TERMS: usize = 2_000_000;
/// detectA at `t = 2` needs about 2.5e7 for `k_max = 4` and twenty times
/// more for `k_max = 5`.
pub const DEFAULT_MAX_WORK: u64 = 40_000_000;

impl SyndromeCounts {
    pub fn compute(spec: &MachineSpec, inputs: &[Vec<usize>], t: usize, k_max: usize) -> Result<Self> {
        Self::compute_guarded(spec, inputs, t, k_max, Budget::default())
    }

    pub fn compute_guarded(
        spec: &MachineSpec,
        inputs: &[Vec<usize>],
        t: usize,
        k_max: usize,
        budget: Budget,
    ) -> Result<Self> {
        let chart = LocalChart::new(spec);
        let mut reads: Option<Vec<u32>> = None;
        let per_input: Vec<Result<(InputCounts, Vec<u32>)>> = inputs
            .par_iter()
            .map(|x| {
                let dgm = UnrolledDGM::unroll_collapsed(spec, t, x.len());
                let f = propagate(&dgm, x, &chart, k_max, budget)?;
                let target = tm_run(x, spec, t)?;
                let r = dgm
                    .block_path_counts()
                    .iter()
                    .map(|c| u32::try_from(c).map_err(|_| Error::ResourceGuard("path count overflow".into())))
                    .collect::<Result<Vec<u32>>>()?;
                Ok((InputCounts { x: x.clone(), target, f }, r))
            })
            .collect();
        let mut out = Vec::with_capacity(inputs.len());
        for item in per_input {
            let (ic, r) = item?;
            match &reads {
                None => reads = Some(r),
                Some(prev) => debug_assert_eq!(prev, &r, "path counts do not depend on the input"),
            }
            out.push(ic);
        }
        let block_reads = reads.unwrap_or_else(|| vec![0; chart.block_count()]);
        Ok(SyndromeCounts { chart, t, k_max, inputs: out, block_reads })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Weight-one counts `A^k(x)` as a matrix, rows inputs, columns coordinates.
    pub fn weight_one_matrix(&self) -> Result<Vec<Vec<BigInt>>> {
        self.inputs.iter().map(|ic| (0..self.dim()).map(|k| ic.a_s(&[(k as u32, 1)])).collect()).collect()
    }

    /// Checks that every monomial of every `f^τ` has block degrees equal to
    /// the path counts.
    pub fn check_homogeneity(&self) -> Result<()> {
        let d = self.dim();
        let block_of_err: Vec<usize> = (0..d).map(|k| self.chart.block_of_coord(k)).collect();
        for ic in &self.inputs {
            for f in &ic.f {
                for (mono, _) in f.terms() {
                    let deg = f.block_degrees(mono, &block_of_err, self.chart.block_count());
                    if deg != self.block_reads {
                        return Err(Error::InvalidSyndrome(format!(
                            "monomial with block degrees {deg:?} in input {:?}",
                            ic.x
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Distribution over final states after `t` cycles under a noisy code.
pub fn eval_model<T>(x: &[usize], code: &NoisyCode<T>, spec: &MachineSpec, t: usize) -> Result<Vec<T>>
where
    for<'a> ProbSemiring<'a, T>: Semiring<W = T>,
{
    let dgm = UnrolledDGM::unroll_collapsed(spec, t, x.len());
    propagate_with(&dgm, x, &ProbSemiring { code })
}
