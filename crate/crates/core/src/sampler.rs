//! Monte-Carlo sampling of the final state, one fresh draw per read.
//!
//! Sampling walks the demand tree of the final node: a node asks its
//! parents for values only when its update function needs them, and every
//! request draws anew. Nodes without symbolic ancestors are evaluated once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dgm::{UnrolledDGM, Update};
use crate::error::Result;
use crate::machine::{check_input, MachineSpec};
use crate::noisy::NoisyCode;
use crate::utm::UtmState;

pub struct ResampleSampler<'a> {
    dgm: UnrolledDGM,
    x: Vec<usize>,
    code: &'a NoisyCode<f64>,
    fixed: Vec<usize>,
}

/// Per-state frequency estimates with standard errors.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub samples: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

const CHUNK: usize = 4096;

impl<'a> ResampleSampler<'a> {
    pub fn new(spec: &MachineSpec, x: &[usize], code: &'a NoisyCode<f64>, t: usize) -> Result<Self> {
        check_input(x, spec)?;
        let dgm = UnrolledDGM::unroll_collapsed(spec, t, x.len());
        let fixed = dgm.evaluate(x, &vec![0; 3 * spec.tuple_count()]);
        Ok(ResampleSampler { dgm, x: x.to_vec(), code, fixed })
    }

    fn draw_leaf<R: Rng>(&self, block: usize, rng: &mut R) -> usize {
        let dist = &self.code.blocks[block];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (v, p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return v;
            }
        }
        dist.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    fn sample<R: Rng>(&self, node: usize, rng: &mut R) -> usize {
        let nd = &self.dgm.nodes[node];
        if !nd.random {
            return self.fixed[node];
        }
        let p = &nd.parents;
        match nd.update {
            Update::Leaf(b) => self.draw_leaf(b, rng),
            Update::Copy(active) => {
                if self.sample(p[2], rng) == active.index() {
                    self.sample(p[0], rng)
                } else {
                    self.sample(p[1], rng)
                }
            }
            Update::CompState(key) => {
                if self.sample(p[0], rng) == UtmState::CompState.index() && self.sample(p[1], rng) == key {
                    UtmState::CopySymbol.index()
                } else {
                    UtmState::NotCopySymbol.index()
                }
            }
            Update::WriteWork | Update::SetState => {
                let staged = self.sample(p[0], rng);
                let x_value =
                    if nd.update == Update::WriteWork { self.dgm.alphabet_size() } else { self.dgm.state_count() };
                if staged == x_value {
                    self.sample(p[1], rng)
                } else {
                    staged
                }
            }
            Update::Shift => match self.sample(p[0], rng) {
                0 => self.sample(p[1], rng),
                2 => self.sample(p[3], rng),
                _ => self.sample(p[2], rng),
            },
            _ => {
                let pv: Vec<usize> = p.iter().map(|&q| self.sample(q, rng)).collect();
                self.dgm.apply(node, &self.x, &pv)
            }
        }
    }

    pub fn sample_final<R: Rng>(&self, rng: &mut R) -> usize {
        self.sample(self.dgm.final_state, rng)
    }

    /// Frequencies of each final state over `samples` draws. Chunks use
    /// separate streams of one seed, so the result does not depend on the
    /// thread count.
    pub fn estimate(&self, samples: usize, seed: u64) -> Estimate {
        let m = self.dgm.state_count();
        let chunks = samples.div_ceil(CHUNK);
        let counts: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let len = CHUNK.min(samples - c * CHUNK);
                let mut k = vec![0u64; m];
                for _ in 0..len {
                    k[self.sample_final(&mut rng)] += 1;
                }
                k
            })
            .collect();
        let mut total = vec![0u64; m];
        for k in &counts {
            for (a, b) in total.iter_mut().zip(k) {
                *a += b;
            }
        }
        let n = samples as f64;
        let mean: Vec<f64> = total.iter().map(|&k| k as f64 / n).collect();
        let stderr = mean.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
        Estimate { samples, mean, stderr }
    }
}
