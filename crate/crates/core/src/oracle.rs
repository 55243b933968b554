//! Named computation paths at `t = 2` and a direct evaluator for error
//! syndromes.
//!
//! For each description square the paths to the final state are:
//! `Γ_1..Γ_N` for `σ'` squares, `Θ_1..Θ_N` for `d` squares and
//! `Λ_1..Λ_N, Ω, Ξ` for `q'` squares. Index `j` is the tuple whose
//! comparison in the second cycle consumes the value. `Ω` is the direct
//! copy in the second cycle and `Ξ` the carried-over state when no tuple
//! matches. This module does not touch the DGM.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{tm_run, Direction, MachineSpec};
use crate::noisy::{alternative_order, base_value, block_of, block_parts, domain_size, LocalChart, SquareKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathName {
    Gamma(usize),
    Theta(usize),
    Lambda(usize),
    Omega,
    Xi,
}

impl PathName {
    pub fn label(self) -> String {
        match self {
            PathName::Gamma(j) => format!("Gamma{}", j + 1),
            PathName::Theta(j) => format!("Theta{}", j + 1),
            PathName::Lambda(j) => format!("Lambda{}", j + 1),
            PathName::Omega => "Omega".into(),
            PathName::Xi => "Xi".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPathSet {
    pub kind: SquareKind,
    pub paths: Vec<PathName>,
}

pub fn named_paths(kind: SquareKind, n_tuples: usize) -> NamedPathSet {
    let paths = match kind {
        SquareKind::Symbol => (0..n_tuples).map(PathName::Gamma).collect(),
        SquareKind::Dir => (0..n_tuples).map(PathName::Theta).collect(),
        SquareKind::State => {
            let mut p: Vec<PathName> = (0..n_tuples).map(PathName::Lambda).collect();
            p.push(PathName::Omega);
            p.push(PathName::Xi);
            p
        }
    };
    NamedPathSet { kind, paths }
}

/// Squares of a tuple on the description tape, keys included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescSquare {
    SymbolKey,
    StateKey,
    Prime(SquareKind),
}

/// Assignment of an alternative (1-based, in coordinate order) or `0`
/// (no error) to every path of every `σ'`, `q'`, `d` square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorSyndrome {
    pub assign: Vec<Vec<u8>>,
}

impl ErrorSyndrome {
    pub fn zero(spec: &MachineSpec) -> Self {
        let n_t = spec.tuple_count();
        let assign = (0..3 * n_t).map(|b| vec![0; named_paths(block_parts(b).1, n_t).paths.len()]).collect();
        ErrorSyndrome { assign }
    }

    /// Puts alternative `alt` (1-based) on path `path` of a square.
    pub fn flip(&mut self, spec: &MachineSpec, tuple: usize, square: DescSquare, path: usize, alt: u8) -> Result<()> {
        let kind = match square {
            DescSquare::Prime(k) => k,
            _ => return Err(Error::InvalidSyndrome("the keys σ, q carry no syndromes".into())),
        };
        if tuple >= spec.tuple_count() {
            return Err(Error::InvalidSyndrome(format!("tuple {tuple} out of range")));
        }
        let b = block_of(tuple, kind);
        let alts = domain_size(spec, kind) - 1;
        if alt as usize > alts || path >= self.assign[b].len() {
            return Err(Error::InvalidSyndrome(format!("path {path} / alternative {alt} out of range")));
        }
        self.assign[b][path] = alt;
        Ok(())
    }

    /// Weight vector in the chart's coordinates.
    pub fn weight(&self, chart: &LocalChart) -> Vec<u32> {
        let mut w = vec![0u32; chart.dim()];
        for (b, paths) in self.assign.iter().enumerate() {
            let ks = chart.block_coords(b);
            for &a in paths {
                if a > 0 {
                    w[ks[a as usize - 1]] += 1;
                }
            }
        }
        w
    }

    pub fn total_weight(&self) -> usize {
        self.assign.iter().flatten().filter(|&&a| a > 0).count()
    }
}

/// `𝒰(x, γ)` for two simulated steps.
pub fn eval_syndrome(x: &[usize], gamma: &ErrorSyndrome, spec: &MachineSpec) -> Result<usize> {
    let n_t = spec.tuple_count();
    if gamma.assign.len() != 3 * n_t {
        return Err(Error::InvalidSyndrome("wrong number of squares".into()));
    }
    let value = |block: usize, path: usize| -> Result<usize> {
        let (_, kind) = block_parts(block);
        let a = *gamma.assign[block]
            .get(path)
            .ok_or_else(|| Error::InvalidSyndrome(format!("block {block} has no path {path}")))?;
        let base = base_value(spec, block);
        if a == 0 {
            return Ok(base);
        }
        alternative_order(kind, base, domain_size(spec, kind))
            .get(a as usize - 1)
            .copied()
            .ok_or_else(|| Error::InvalidSyndrome(format!("alternative {a} out of range")))
    };
    let cell = |i: i64| if i >= 0 && (i as usize) < x.len() { x[i as usize] } else { 0 };

    // First cycle: the keys are concrete, so exactly one tuple matches.
    let star = spec.tuple_index(cell(0), spec.init_state);
    let mut sigma0 = Vec::with_capacity(n_t);
    let mut q1 = Vec::with_capacity(n_t);
    for j in 0..n_t {
        let written = value(block_of(star, SquareKind::Symbol), j)?;
        let dir = Direction::from_index(value(block_of(star, SquareKind::Dir), j)?).expect("direction");
        sigma0.push(match dir {
            Direction::Left => cell(-1),
            Direction::Stay => written,
            Direction::Right => cell(1),
        });
        q1.push(value(block_of(star, SquareKind::State), j)?);
    }
    let omega = n_t;
    let xi = n_t + 1;

    // Second cycle: per-comparison copies, last match wins.
    let mut out = value(block_of(star, SquareKind::State), xi)?;
    for j in 0..n_t {
        let (s, q) = spec.key(j);
        if sigma0[j] == s && q1[j] == q {
            out = value(block_of(j, SquareKind::State), omega)?;
        }
    }
    Ok(out)
}

/// One weight-one table: rows are inputs, columns the paths of the square
/// of coordinate `k` (zero based) carrying that coordinate's alternative.
#[derive(Clone, Debug, Serialize)]
pub struct WeightOneTable {
    pub coordinate: usize,
    pub paths: Vec<String>,
    pub inputs: Vec<String>,
    pub expected: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
    /// `A^k(x)` per input.
    pub errors: Vec<u32>,
}

pub fn weight_one_table(spec: &MachineSpec, k: usize, inputs: &[Vec<usize>]) -> Result<WeightOneTable> {
    let chart = LocalChart::new(spec);
    if k >= chart.dim() {
        return Err(Error::InvalidCoordinate(k + 1, chart.dim()));
    }
    let c = chart.coordinate(k);
    let b = block_of(c.tuple, c.kind);
    let alt = chart.block_coords(b).iter().position(|&kk| kk == k).expect("coordinate in block") as u8 + 1;
    let paths = named_paths(c.kind, spec.tuple_count());
    let mut cells = Vec::new();
    let mut errors = Vec::new();
    let mut expected = Vec::new();
    for x in inputs {
        let y = tm_run(x, spec, 2)?;
        let mut row = Vec::new();
        for p in 0..paths.paths.len() {
            let mut g = ErrorSyndrome::zero(spec);
            g.flip(spec, c.tuple, DescSquare::Prime(c.kind), p, alt)?;
            row.push(eval_syndrome(x, &g, spec)?);
        }
        errors.push(row.iter().filter(|&&v| v != y).count() as u32);
        cells.push(row);
        expected.push(y);
    }
    Ok(WeightOneTable {
        coordinate: k + 1,
        paths: paths.paths.iter().map(|p| p.label()).collect(),
        inputs: inputs.iter().map(|x| spec.format_input(x)).collect(),
        expected,
        cells,
        errors,
    })
}

impl WeightOneTable {
    /// CSV with one row per input. Cells name the final state; a cell that
    /// differs from the classical output is marked `ERROR:<state>`.
    pub fn to_csv(&self, spec: &MachineSpec) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["x".to_string()];
        header.extend((1..=self.paths.len()).map(|i| format!("e{i}")));
        header.push("A".into());
        wtr.write_record(&header).expect("in-memory csv");
        for (r, row) in self.cells.iter().enumerate() {
            let mut rec = vec![self.inputs[r].clone()];
            for &v in row {
                let name = &spec.states[v];
                rec.push(if v == self.expected[r] { name.clone() } else { format!("ERROR:{name}") });
            }
            rec.push(self.errors[r].to_string());
            wtr.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

/// All syndromes of total weight at most `c` on the given squares, ordered
/// by weight, then by slot combination, then by alternatives.
pub struct SyndromeIter {
    zero: ErrorSyndrome,
    /// `(block, path, number of alternatives)`.
    slots: Vec<(usize, usize, u8)>,
    c: usize,
    weight: usize,
    comb: Vec<usize>,
    alts: Vec<u8>,
    done: bool,
}

pub const MAX_ENUMERATED: u128 = 50_000_000;

pub fn enumerate_syndromes(spec: &MachineSpec, blocks: &[usize], c: usize) -> Result<SyndromeIter> {
    let n_t = spec.tuple_count();
    let mut slots = Vec::new();
    for &b in blocks {
        if b >= 3 * n_t {
            return Err(Error::InvalidSyndrome(format!("square {b} out of range")));
        }
        let kind = block_parts(b).1;
        let alts = (domain_size(spec, kind) - 1) as u8;
        for p in 0..named_paths(kind, n_t).paths.len() {
            if alts > 0 {
                slots.push((b, p, alts));
            }
        }
    }
    let max_alt = slots.iter().map(|s| s.2 as u128).max().unwrap_or(1);
    let mut bound: u128 = 0;
    let mut binom: u128 = 1;
    for w in 0..=c.min(slots.len()) {
        if w > 0 {
            binom = binom * (slots.len() - w + 1) as u128 / w as u128;
        }
        bound = bound.saturating_add(binom.saturating_mul(max_alt.saturating_pow(w as u32)));
    }
    if bound > MAX_ENUMERATED {
        return Err(Error::ResourceGuard(format!("about {bound} syndromes requested")));
    }
    Ok(SyndromeIter {
        zero: ErrorSyndrome::zero(spec),
        slots,
        c,
        weight: 0,
        comb: Vec::new(),
        alts: Vec::new(),
        done: false,
    })
}

impl SyndromeIter {
    fn advance(&mut self) {
        // Alternatives odometer.
        for i in (0..self.alts.len()).rev() {
            if self.alts[i] < self.slots[self.comb[i]].2 {
                self.alts[i] += 1;
                for a in &mut self.alts[i + 1..] {
                    *a = 1;
                }
                return;
            }
        }
        // Next combination of slots.
        let n = self.slots.len();
        let w = self.comb.len();
        for i in (0..w).rev() {
            if self.comb[i] < n - w + i {
                self.comb[i] += 1;
                for j in i + 1..w {
                    self.comb[j] = self.comb[j - 1] + 1;
                }
                self.alts = vec![1; w];
                return;
            }
        }
        // Next weight.
        self.weight += 1;
        if self.weight > self.c || self.weight > n {
            self.done = true;
            return;
        }
        self.comb = (0..self.weight).collect();
        self.alts = vec![1; self.weight];
    }
}

impl Iterator for SyndromeIter {
    type Item = ErrorSyndrome;

    fn next(&mut self) -> Option<ErrorSyndrome> {
        if self.done {
            return None;
        }
        let mut g = self.zero.clone();
        for (i, &s) in self.comb.iter().enumerate() {
            let (b, p, _) = self.slots[s];
            g.assign[b][p] = self.alts[i];
        }
        self.advance();
        Some(g)
    }
}
