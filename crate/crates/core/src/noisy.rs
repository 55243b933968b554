//! Noisy codes and local coordinates at a classical code.
//!
//! A noisy code assigns to every tuple three distributions: the written
//! symbol, the next state and the direction. These are the `3N`
//! description squares (blocks); block `3a + k` is square `k` of tuple `a`.

use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{Direction, MachineSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SquareKind {
    Symbol,
    State,
    Dir,
}

impl SquareKind {
    pub const ALL: [SquareKind; 3] = [SquareKind::Symbol, SquareKind::State, SquareKind::Dir];

    pub fn index(self) -> usize {
        match self {
            SquareKind::Symbol => 0,
            SquareKind::State => 1,
            SquareKind::Dir => 2,
        }
    }

    pub fn prime_name(self) -> &'static str {
        match self {
            SquareKind::Symbol => "σ'",
            SquareKind::State => "q'",
            SquareKind::Dir => "d",
        }
    }
}

/// Block index of square `kind` of tuple `a`.
pub fn block_of(a: usize, kind: SquareKind) -> usize {
    3 * a + kind.index()
}

pub fn block_parts(block: usize) -> (usize, SquareKind) {
    (block / 3, SquareKind::ALL[block % 3])
}

/// Number of values a square of the given kind can take.
pub fn domain_size(spec: &MachineSpec, kind: SquareKind) -> usize {
    match kind {
        SquareKind::Symbol => spec.n(),
        SquareKind::State => spec.m(),
        SquareKind::Dir => 3,
    }
}

/// Base value of a description square.
pub fn base_value(spec: &MachineSpec, block: usize) -> usize {
    let (a, kind) = block_parts(block);
    let tr = spec.transitions()[a];
    match kind {
        SquareKind::Symbol => tr.write,
        SquareKind::State => tr.next,
        SquareKind::Dir => tr.dir.index(),
    }
}

/// Dimension of the space of noisy codes, `n·m·(n+m)`.
pub fn chart_dimension(n: usize, m: usize) -> usize {
    n * m * (n + m)
}

/// A point of W: one probability vector per description square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyCode<T> {
    pub blocks: Vec<Vec<T>>,
}

impl<T: Clone + Num + PartialOrd> NoisyCode<T> {
    pub fn tuple_count(&self) -> usize {
        self.blocks.len() / 3
    }

    pub fn dist(&self, a: usize, kind: SquareKind) -> &[T] {
        &self.blocks[block_of(a, kind)]
    }

    /// Checks nonnegativity and that each distribution sums to one within `tol`.
    pub fn validate(&self, tol: &T) -> Result<()> {
        for (b, dist) in self.blocks.iter().enumerate() {
            if dist.iter().any(|p| *p < T::zero()) {
                return Err(Error::InvalidDistribution(format!("negative entry in block {b}")));
            }
            let sum = dist.iter().cloned().fold(T::zero(), |acc, p| acc + p);
            let gap = if sum > T::one() { sum - T::one() } else { T::one() - sum };
            if gap > *tol {
                return Err(Error::InvalidDistribution(format!("block {b} does not sum to one")));
            }
        }
        Ok(())
    }

    /// The classical machine at the nearest vertex: the argmax of each
    /// distribution, ties to the smallest value.
    pub fn nearest_vertex(&self, like: &MachineSpec) -> Result<MachineSpec> {
        let argmax = |d: &[T]| {
            let mut best = 0;
            for (i, p) in d.iter().enumerate() {
                if *p > d[best] {
                    best = i;
                }
            }
            best
        };
        let transitions = (0..self.tuple_count())
            .map(|a| crate::machine::Transition {
                write: argmax(self.dist(a, SquareKind::Symbol)),
                next: argmax(self.dist(a, SquareKind::State)),
                dir: Direction::from_index(argmax(self.dist(a, SquareKind::Dir))).expect("3 directions"),
            })
            .collect();
        MachineSpec::new(like.alphabet.clone(), like.states.clone(), like.init_state, transitions)
    }
}

impl NoisyCode<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code serializes")
    }
}

/// Point mass at the machine's entries.
pub fn embed_code<T: Clone + Num>(spec: &MachineSpec) -> NoisyCode<T> {
    let blocks = (0..3 * spec.tuple_count())
        .map(|b| {
            let (_, kind) = block_parts(b);
            let mut d = vec![T::zero(); domain_size(spec, kind)];
            d[base_value(spec, b)] = T::one();
            d
        })
        .collect();
    NoisyCode { blocks }
}

/// Alternatives to `base` in coordinate order. Symbols and states go in
/// natural order; directions go nearest move first, Left before Right on
/// ties, so a Right base gives Stay then Left.
pub fn alternative_order(kind: SquareKind, base: usize, size: usize) -> Vec<usize> {
    let mut alts: Vec<usize> = (0..size).filter(|&v| v != base).collect();
    if kind == SquareKind::Dir {
        alts.sort_by_key(|&v| (v.abs_diff(base), v));
    }
    alts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinate {
    pub tuple: usize,
    pub kind: SquareKind,
    /// The alternative value this coordinate moves mass to.
    pub value: usize,
}

/// Local coordinates `w₁..w_d` at a classical code.
#[derive(Clone, Debug)]
pub struct LocalChart {
    pub base: MachineSpec,
    coords: Vec<Coordinate>,
    /// Per block, the coordinate index of each value (`None` for the base value).
    value_coord: Vec<Vec<Option<usize>>>,
}

impl LocalChart {
    pub fn new(base: &MachineSpec) -> Self {
        let mut coords = Vec::new();
        let mut value_coord = Vec::new();
        for a in 0..base.tuple_count() {
            for kind in SquareKind::ALL {
                let b = block_of(a, kind);
                let bv = base_value(base, b);
                let mut per_value = vec![None; domain_size(base, kind)];
                for v in alternative_order(kind, bv, per_value.len()) {
                    per_value[v] = Some(coords.len());
                    coords.push(Coordinate { tuple: a, kind, value: v });
                }
                value_coord.push(per_value);
            }
        }
        LocalChart { base: base.clone(), coords, value_coord }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn block_count(&self) -> usize {
        self.value_coord.len()
    }

    /// Coordinate `k`, zero based.
    pub fn coordinate(&self, k: usize) -> Coordinate {
        self.coords[k]
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn block_of_coord(&self, k: usize) -> usize {
        let c = self.coords[k];
        block_of(c.tuple, c.kind)
    }

    /// Coordinate of `value` in `block`, `None` for the base value.
    pub fn coord_of(&self, block: usize, value: usize) -> Option<usize> {
        self.value_coord[block][value]
    }

    /// Coordinates of a block in coordinate order.
    pub fn block_coords(&self, block: usize) -> Vec<usize> {
        let mut ks: Vec<usize> = self.value_coord[block].iter().flatten().copied().collect();
        ks.sort_unstable();
        ks
    }

    /// Alternative values of a block in coordinate order.
    pub fn alternatives(&self, block: usize) -> Vec<usize> {
        self.block_coords(block).into_iter().map(|k| self.coords[k].value).collect()
    }

    pub fn base_value(&self, block: usize) -> usize {
        base_value(&self.base, block)
    }

    /// Human-readable label, e.g. `3: (_,reject) q' reject→accept`.
    pub fn label(&self, k: usize) -> String {
        let c = self.coords[k];
        let spec = &self.base;
        let (s, q) = spec.key(c.tuple);
        let name = |v: usize| match c.kind {
            SquareKind::Symbol => spec.alphabet[v].clone(),
            SquareKind::State => spec.states[v].clone(),
            SquareKind::Dir => Direction::from_index(v).expect("direction").name().to_string(),
        };
        let bv = base_value(spec, block_of(c.tuple, c.kind));
        format!(
            "{}: ({},{}) {} {}→{}",
            k + 1,
            spec.alphabet[s],
            spec.states[q],
            c.kind.prime_name(),
            name(bv),
            name(c.value)
        )
    }

    pub fn chart_to_code<T: Clone + Num + PartialOrd>(&self, w: &[T]) -> Result<NoisyCode<T>> {
        if w.len() != self.dim() {
            return Err(Error::OutOfChart(format!("expected {} coordinates, got {}", self.dim(), w.len())));
        }
        if let Some(k) = w.iter().position(|x| *x < T::zero()) {
            return Err(Error::OutOfChart(format!("coordinate {} is negative", k + 1)));
        }
        let mut blocks = Vec::with_capacity(self.block_count());
        for (b, per_value) in self.value_coord.iter().enumerate() {
            let mut rest = T::one();
            let mut d = vec![T::zero(); per_value.len()];
            for (v, c) in per_value.iter().enumerate() {
                if let Some(k) = c {
                    d[v] = w[*k].clone();
                    rest = rest - w[*k].clone();
                }
            }
            if rest < T::zero() {
                return Err(Error::OutOfChart(format!("block {b} sums past one")));
            }
            d[self.base_value(b)] = rest;
            blocks.push(d);
        }
        Ok(NoisyCode { blocks })
    }

    /// Reads the coordinates of a code back off its alternative entries.
    pub fn code_to_chart<T: Clone + Zero>(&self, code: &NoisyCode<T>) -> Vec<T> {
        self.coords.iter().map(|c| code.blocks[block_of(c.tuple, c.kind)][c.value].clone()).collect()
    }
}

/// Moves a distribution a fraction `mu` towards the uniform barycenter.
pub fn smooth_mu<T: Clone + Num + PartialOrd + FromCount>(dist: &[T], mu: &T) -> Result<Vec<T>> {
    if !(*mu > T::zero() && *mu < T::one()) {
        return Err(Error::InvalidMu(mu.approx()));
    }
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    let share = mu.clone() / T::from_count(dist.len());
    let keep = T::one() - mu.clone();
    Ok(dist.iter().map(|p| keep.clone() * p.clone() + share.clone()).collect())
}

/// Integer-to-scalar conversion used where counts meet probabilities.
pub trait FromCount: Sized {
    fn from_count(n: usize) -> Self;
    fn approx(&self) -> f64;
}

impl FromCount for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn approx(&self) -> f64 {
        *self
    }
}

impl FromCount for num_rational::BigRational {
    fn from_count(n: usize) -> Self {
        num_rational::BigRational::from_integer(n.into())
    }
    fn approx(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().unwrap_or(f64::NAN)
    }
}
